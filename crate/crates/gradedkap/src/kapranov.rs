//! The transported coderivation δ = pbw⁻¹ ∘ [[Q, -]] ∘ pbw, extraction of
//! the bracket tower {R_k}, the multibrackets λ_k on vector fields, the map
//! B(Y; T) = pbw⁻¹(Y · pbw T) - ∇_Y T, the curvature-driven recursion that
//! rebuilds the tower, and connection-independence morphisms.

use std::collections::BTreeMap;

use crate::connection::{atiyah_cocycle, sym_cov_derivative, Connection};
use crate::diffop::DiffOp;
use crate::error::{Error, Result};
use crate::linfty::HomologicalVF;
use crate::pbw::PbwCtx;
use crate::scalar::{s_int, s_one};
use crate::tensor::{convolution, FrameWord, SymBundleMap, SymTensorField};
use crate::vector_field::VectorField;

/// The Kapranov sections R_k: Γ(S^k T) → Γ(T) for 2 <= k <= cap, each
/// graded-symmetric of internal degree +1 with R_2 the negated Atiyah
/// cocycle.
#[derive(Debug, Clone)]
pub struct RTower {
    maps: BTreeMap<usize, SymBundleMap>,
    pub arity_cap: usize,
}

impl RTower {
    pub fn map(&self, k: usize) -> Option<&SymBundleMap> {
        self.maps.get(&k)
    }

    pub fn maps(&self) -> impl Iterator<Item = (&usize, &SymBundleMap)> {
        self.maps.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.maps.values().all(|m| m.is_zero())
    }
}

/// δ(T) = pbw⁻¹([[Q, pbw(T)]]).
pub fn delta_nabla(q: &HomologicalVF, ctx: &PbwCtx, t: &SymTensorField) -> Result<SymTensorField> {
    let q_field = q.field().on_chart(ctx.chart());
    let image = ctx.pbw(&t.on_chart(ctx.chart()))?;
    ctx.pbw_inverse(&image.lie_derivative(&q_field)?)
}

/// Extracts R_k as the arity-1 projection of (δ - L_Q) on arity-k frame
/// words, after checking that the arity-0 and arity-1 layers vanish.
pub fn extract_r(q: &HomologicalVF, ctx: &PbwCtx, arity_cap: usize) -> Result<RTower> {
    let chart = ctx.chart();
    let q_field = q.field().on_chart(chart);
    // R_0 and R_1 must vanish: δ agrees with L_Q on functions and fields
    let probe = SymTensorField::unit(chart);
    let r0 = delta_nabla(q, ctx, &probe)?.sub(&probe.lie_derivative(&q_field)?);
    if !r0.is_zero() {
        return Err(Error::Inconsistency(
            "nonzero arity-0 layer while extracting the bracket tower".into(),
        ));
    }
    for j in 0..chart.dimension() {
        let x = SymTensorField::from_word(chart, &FrameWord::single(j));
        let r1 = delta_nabla(q, ctx, &x)?.sub(&x.lie_derivative(&q_field)?);
        if !r1.is_zero() {
            return Err(Error::Inconsistency(format!(
                "nonzero arity-1 layer on d/d{}",
                chart.name(j)
            )));
        }
    }
    let mut maps = BTreeMap::new();
    for k in 2..=arity_cap {
        let mut map = SymBundleMap::zero(chart, k, 1);
        for w in SymBundleMap::domain_words(chart, k) {
            let t = SymTensorField::from_word(chart, &w);
            let diff = delta_nabla(q, ctx, &t)?.sub(&t.lie_derivative(&q_field)?);
            map.set(w, diff.arity_one_vf())?;
        }
        maps.insert(k, map);
    }
    Ok(RTower { maps, arity_cap })
}

/// λ_1 = L_Q; for k >= 2, λ_k evaluates R_k on the symmetric product of the
/// inputs.
pub fn lambda(
    tower: &RTower,
    q: &HomologicalVF,
    inputs: &[VectorField],
) -> Result<VectorField> {
    if inputs.is_empty() {
        return Err(Error::InvalidInput("lambda needs at least one input".into()));
    }
    if inputs.len() == 1 {
        return q.field().commutator(&inputs[0]);
    }
    let k = inputs.len();
    let map = tower.map(k).ok_or_else(|| {
        Error::InvalidInput(format!(
            "bracket tower computed to arity {} but arity {k} was requested",
            tower.arity_cap
        ))
    })?;
    let mut t = SymTensorField::unit(map.chart());
    for x in inputs {
        t = t.product(&SymTensorField::from_vf(x).on_chart(map.chart()))?;
    }
    map.apply_tensor(&t)
}

/// B(Y; T) = pbw⁻¹(Y · pbw(T)) - ∇_Y T.
pub fn b_nabla(ctx: &PbwCtx, y: &VectorField, t: &SymTensorField) -> Result<SymTensorField> {
    let chart = ctx.chart();
    let y = y.on_chart(chart);
    let t = t.on_chart(chart);
    let composed = DiffOp::from_vf(&y).compose(&ctx.pbw(&t)?)?;
    let first = ctx.pbw_inverse(&composed)?;
    Ok(first.sub(&ctx.connection().nabla_tensor(&y, &t)?))
}

/// Rebuilds the tower from the Atiyah cocycle, the curvature (through B),
/// and symmetrized covariant derivatives:
///   R_n = 2/n (R̄_2 ⋆ id)
///       + 1/n Σ_{k=2}^{n-1} [ (d̃R_k ⋆ id) + (1-k)(R̄_k ⋆ id)
///                             - B ∘ (R̄_k ⊗ id) ∘ Δ ],
/// each right side evaluated on arity-n words and projected onto its
/// arity-1 layer after checking the higher layers cancel.
pub fn r_recursion(q: &HomologicalVF, ctx: &PbwCtx, arity_cap: usize) -> Result<RTower> {
    let chart = ctx.chart();
    let at = atiyah_cocycle(q, ctx.connection())?;
    let mut maps: BTreeMap<usize, SymBundleMap> = BTreeMap::new();
    if arity_cap >= 2 {
        let mut r2 = at.to_bundle_map()?.neg();
        if !chart.compatible(r2.chart()) {
            return Err(Error::ChartMismatch("tower chart".into()));
        }
        r2 = rehost_map(&r2, chart)?;
        maps.insert(2, r2);
    }
    for n in 3..=arity_cap {
        let mut dmaps: BTreeMap<usize, SymBundleMap> = BTreeMap::new();
        for (k, map) in &maps {
            dmaps.insert(*k, sym_cov_derivative(ctx.connection(), map)?);
        }
        let mut rn = SymBundleMap::zero(chart, n, 1);
        let inv_n = s_one() / s_int(n as i64);
        for w in SymBundleMap::domain_words(chart, n) {
            let t = SymTensorField::from_word(chart, &w);
            // 2/n (R̄_2 ⋆ id)
            let mut rhs = convolution(&maps[&2], &t)?.scale(&(s_int(2) * &inv_n));
            for k in 2..n {
                let rk = &maps[&k];
                let conv_d = convolution(&dmaps[&k], &t)?;
                let conv_r = convolution(rk, &t)?.scale(&s_int(1 - k as i64));
                let mut bterm = SymTensorField::zero(chart);
                for ((left, right), coeff) in crate::tensor::st_comultiply(&t).terms() {
                    if left.arity() != k {
                        continue;
                    }
                    let rk_left = rk.eval_word(&left.0);
                    if rk_left.is_zero() {
                        continue;
                    }
                    let piece = b_nabla(ctx, &rk_left, &SymTensorField::from_word(chart, right))?;
                    // frame words carry constant coefficients, so the
                    // unshuffle sign is the whole coefficient
                    let c = coeff.coefficient(&crate::function::Monomial::one());
                    bterm = bterm.add(&piece.scale(&c));
                }
                rhs = rhs.add(&conv_d.add(&conv_r).sub(&bterm).scale(&inv_n));
            }
            // the higher-arity layers of the right side must cancel
            for arity in 0..=rhs.max_arity() {
                if arity != 1 && !rhs.arity_component(arity).is_zero() {
                    return Err(Error::Inconsistency(format!(
                        "tower recursion left an arity-{arity} layer on {}",
                        w.render(chart)
                    )));
                }
            }
            rn.set(w, rhs.arity_one_vf())?;
        }
        maps.insert(n, rn);
    }
    Ok(RTower { maps, arity_cap })
}

fn rehost_map(map: &SymBundleMap, chart: &crate::chart::Chart) -> Result<SymBundleMap> {
    let mut out = SymBundleMap::zero(chart, map.arity(), map.degree());
    for (w, v) in map.entries() {
        out.set(w.clone(), v.on_chart(chart))?;
    }
    Ok(out)
}

/// Verdict of the squared-differential check (δ² = 0), the generalized
/// Jacobi identities of the induced bracket tower.
#[derive(Debug, Clone)]
pub struct LInftyVerdict {
    pub passed: bool,
    pub witness: Option<String>,
}

/// Verifies δ∘δ = 0 on all frame-word tensors up to the caps; with exact
/// internal arithmetic the vanishing is exact, and the weight cap guards
/// cost only.
pub fn check_linfty(
    q: &HomologicalVF,
    ctx: &PbwCtx,
    arity_cap: usize,
    _weight_cap: u32,
) -> Result<LInftyVerdict> {
    let chart = ctx.chart();
    for arity in 0..=arity_cap {
        for w in SymBundleMap::domain_words(chart, arity) {
            let t = SymTensorField::from_word(chart, &w);
            let once = delta_nabla(q, ctx, &t)?;
            let twice = delta_nabla(q, ctx, &once)?;
            if !twice.is_zero() {
                return Ok(LInftyVerdict {
                    passed: false,
                    witness: Some(format!(
                        "δ²({}) = {}",
                        w.render(chart),
                        twice.render()
                    )),
                });
            }
        }
    }
    Ok(LInftyVerdict {
        passed: true,
        witness: None,
    })
}

/// Reassembles δ from the extracted tower, δ = L_Q + Σ_k (R̄_k ⋆ id), and
/// compares on every frame word up to the caps; a failure signals that the
/// extraction missed R-linearity.
pub fn check_reassembly(
    q: &HomologicalVF,
    ctx: &PbwCtx,
    tower: &RTower,
    arity_cap: usize,
) -> Result<LInftyVerdict> {
    let chart = ctx.chart();
    let q_field = q.field().on_chart(chart);
    let x1 = crate::function::FormalFunction::coordinate(chart, 0);
    for arity in 0..=arity_cap {
        for w in SymBundleMap::domain_words(chart, arity) {
            let base = SymTensorField::from_word(chart, &w);
            for t in [base.clone(), base.scale_fn(&x1)?] {
                let lhs = delta_nabla(q, ctx, &t)?;
                let mut rhs = t.lie_derivative(&q_field)?;
                for (_, map) in tower.maps() {
                    rhs = rhs.add(&convolution(&rehost_map(map, chart)?, &t)?);
                }
                if lhs != rhs {
                    return Ok(LInftyVerdict {
                        passed: false,
                        witness: Some(format!(
                            "δ({}) differs from its tower reassembly",
                            t.render()
                        )),
                    });
                }
            }
        }
    }
    Ok(LInftyVerdict {
        passed: true,
        witness: None,
    })
}

/// The comparison morphism φ = pbw'⁻¹ ∘ pbw between the coalgebras of two
/// connections, with its arity components.
#[derive(Debug, Clone)]
pub struct LInftyMorphism {
    /// k -> φ_k as the arity-1 projection of φ on arity-k words.
    pub components: BTreeMap<usize, SymBundleMap>,
    pub intertwines: bool,
    pub phi1_is_identity: bool,
}

/// Builds φ and verifies φ ∘ δ = δ' ∘ φ on frame words up to the cap,
/// along with φ_1 = id.
pub fn connection_compare(
    q: &HomologicalVF,
    conn: &Connection,
    conn2: &Connection,
    arity_cap: usize,
) -> Result<LInftyMorphism> {
    conn.chart().check_compatible(conn2.chart())?;
    conn.check_torsion_free()?;
    conn2.check_torsion_free()?;
    let ctx = PbwCtx::new(conn);
    let ctx2 = PbwCtx::new(conn2);
    let chart = ctx.chart();
    let phi = |t: &SymTensorField| -> Result<SymTensorField> {
        ctx2.pbw_inverse(&ctx.pbw(t)?.on_chart(ctx2.chart()))
            .map(|s| s.on_chart(chart))
    };
    let mut intertwines = true;
    let mut components: BTreeMap<usize, SymBundleMap> = BTreeMap::new();
    let mut phi1_is_identity = true;
    for arity in 0..=arity_cap {
        let mut comp = SymBundleMap::zero(chart, arity, 0);
        for w in SymBundleMap::domain_words(chart, arity) {
            let t = SymTensorField::from_word(chart, &w);
            let image = phi(&t)?;
            if arity >= 1 {
                comp.set(w.clone(), image.arity_one_vf())?;
            }
            if arity == 1 && image != t {
                phi1_is_identity = false;
            }
            // φ ∘ δ = δ' ∘ φ; φ(t) may carry function coefficients
            let lhs = phi(&delta_nabla(q, &ctx, &t)?)?;
            let rhs = delta_nabla(q, &ctx2, &phi(&t)?.on_chart(ctx2.chart()))?.on_chart(chart);
            if lhs != rhs {
                intertwines = false;
            }
        }
        if arity >= 1 {
            components.insert(arity, comp);
        }
    }
    Ok(LInftyMorphism {
        components,
        intertwines,
        phi1_is_identity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::tests::uv_connection;
    use crate::function::FormalFunction;
    use crate::linfty::{presets, q_from_spec};

    #[test]
    fn delta_low_arities_match_lie_derivative() {
        let spec = presets::nonabelian2();
        let chart = spec.chart(None).unwrap();
        let q = q_from_spec(&spec, &chart).unwrap();
        let conn = Connection::trivial(&chart);
        let ctx = PbwCtx::new(&conn);
        let f = FormalFunction::coordinate(&chart, 1);
        let t = SymTensorField::from_fn(&f);
        assert_eq!(
            delta_nabla(&q, &ctx, &t).unwrap(),
            SymTensorField::from_fn(&q.field().apply(&f).unwrap())
        );
        let x = SymTensorField::from_vf(&VectorField::frame(&chart, 1));
        assert_eq!(
            delta_nabla(&q, &ctx, &x).unwrap(),
            SymTensorField::from_vf(
                &q.field().commutator(&VectorField::frame(&chart, 1)).unwrap()
            )
        );
    }

    #[test]
    fn abelian_tower_is_zero() {
        let spec = presets::abelian2();
        let chart = spec.chart(None).unwrap();
        let q = q_from_spec(&spec, &chart).unwrap();
        let conn = Connection::trivial(&chart);
        let ctx = PbwCtx::new(&conn);
        let tower = extract_r(&q, &ctx, 4).unwrap();
        assert!(tower.is_zero());
        let rec = r_recursion(&q, &ctx, 4).unwrap();
        assert!(rec.is_zero());
    }

    #[test]
    fn r2_is_minus_atiyah() {
        for spec in [presets::nonabelian2(), presets::sl2(), presets::dgla_uv()] {
            let chart = spec.chart(None).unwrap();
            let q = q_from_spec(&spec, &chart).unwrap();
            let conns = if spec.name == "dgla_uv" {
                vec![Connection::trivial(&chart), uv_connection(&chart, 1, 1, 1)]
            } else {
                vec![Connection::trivial(&chart)]
            };
            for conn in conns {
                let ctx = PbwCtx::new(&conn);
                let tower = extract_r(&q, &ctx, 2).unwrap();
                let at = atiyah_cocycle(&q, &conn).unwrap();
                let expected = at.to_bundle_map().unwrap().neg();
                for w in SymBundleMap::domain_words(&chart, 2) {
                    assert_eq!(
                        tower.map(2).unwrap().eval_word(&w.0),
                        expected.eval_word(&w.0).on_chart(ctx.chart()),
                        "{} word {w:?}",
                        spec.name
                    );
                }
            }
        }
    }

    #[test]
    fn lie_algebra_tower_vanishes_above_two() {
        // quadratic Q with trivial connection: R_k = 0 for k >= 3
        for spec in [presets::nonabelian2(), presets::heisenberg3(), presets::sl2()] {
            let chart = spec.chart(None).unwrap();
            let q = q_from_spec(&spec, &chart).unwrap();
            let conn = Connection::trivial(&chart);
            let ctx = PbwCtx::new(&conn);
            let tower = extract_r(&q, &ctx, 4).unwrap();
            assert!(tower.map(3).unwrap().is_zero(), "{}", spec.name);
            assert!(tower.map(4).unwrap().is_zero(), "{}", spec.name);
        }
    }

    #[test]
    fn tower_entries_are_degree_plus_one() {
        let spec = presets::dgla_uv();
        let chart = spec.chart(None).unwrap();
        let q = q_from_spec(&spec, &chart).unwrap();
        let conn = uv_connection(&chart, 1, 1, 1);
        let ctx = PbwCtx::new(&conn);
        let tower = extract_r(&q, &ctx, 4).unwrap();
        for (k, map) in tower.maps() {
            for (w, v) in map.entries() {
                if v.is_zero() {
                    continue;
                }
                let expected = 1 + w.degree(&chart);
                assert!(
                    v.is_homogeneous_of(expected),
                    "R_{k}({}) = {} not of degree {expected}",
                    w.render(&chart),
                    v.render()
                );
            }
        }
    }

    #[test]
    fn extract_matches_recursion_flat_and_nonflat() {
        #[allow(clippy::type_complexity)]
        let cases: Vec<(crate::linfty::LInftySpec, Option<(i64, i64, i64)>)> = vec![
            (presets::sl2(), None),
            (presets::ternary_q3(), None),
            (presets::dgla_uv(), Some((1, 1, 1))),
            (presets::dgla_uv(), Some((2, -1, 1))),
        ];
        for (spec, family) in cases {
            let chart = spec.chart(None).unwrap();
            let q = q_from_spec(&spec, &chart).unwrap();
            let conn = match family {
                None => Connection::trivial(&chart),
                Some((a, b, c)) => uv_connection(&chart, a, b, c),
            };
            let ctx = PbwCtx::new(&conn);
            let direct = extract_r(&q, &ctx, 4).unwrap();
            let recursive = r_recursion(&q, &ctx, 4).unwrap();
            for k in 2..=4usize {
                for w in SymBundleMap::domain_words(&chart, k) {
                    assert_eq!(
                        direct.map(k).unwrap().eval_word(&w.0),
                        recursive.map(k).unwrap().eval_word(&w.0),
                        "{} arity {k} word {w:?}",
                        spec.name
                    );
                }
            }
        }
    }

    #[test]
    fn flat_case_tower_is_iterated_sym_cov_derivative() {
        // R_n = 1/n d̃(R_{n-1}) for flat connections, n = 3, 4
        let cases: Vec<(crate::linfty::LInftySpec, Connection)> = vec![
            (presets::sl2(), Connection::trivial(&presets::sl2().chart(None).unwrap())),
            (
                presets::ternary_q3(),
                Connection::trivial(&presets::ternary_q3().chart(None).unwrap()),
            ),
            (
                presets::dgla_uv(),
                uv_connection(&presets::dgla_uv().chart(None).unwrap(), 0, 5, 0),
            ),
        ];
        for (spec, conn) in cases {
            let chart = spec.chart(None).unwrap();
            assert!(conn.is_flat().unwrap());
            let q = q_from_spec(&spec, &chart).unwrap();
            let ctx = PbwCtx::new(&conn);
            let tower = extract_r(&q, &ctx, 4).unwrap();
            for n in 3..=4usize {
                let prev = tower.map(n - 1).unwrap();
                let expected =
                    sym_cov_derivative(&conn, prev).unwrap().scale(&(s_one() / s_int(n as i64)));
                for w in SymBundleMap::domain_words(&chart, n) {
                    assert_eq!(
                        tower.map(n).unwrap().eval_word(&w.0),
                        expected.eval_word(&w.0),
                        "{} n={n} word {w:?}",
                        spec.name
                    );
                }
            }
        }
    }

    #[test]
    fn delta_squares_to_zero_and_reassembles() {
        #[allow(clippy::type_complexity)]
        let cases: Vec<(crate::linfty::LInftySpec, Option<(i64, i64, i64)>)> = vec![
            (presets::abelian2(), None),
            (presets::sl2(), None),
            (presets::dgla_uv(), Some((1, 1, 1))),
        ];
        for (spec, family) in cases {
            let chart = spec.chart(None).unwrap();
            let q = q_from_spec(&spec, &chart).unwrap();
            let conn = match family {
                None => Connection::trivial(&chart),
                Some((a, b, c)) => uv_connection(&chart, a, b, c),
            };
            let ctx = PbwCtx::new(&conn);
            let verdict = check_linfty(&q, &ctx, 4, 6).unwrap();
            assert!(verdict.passed, "{}: {:?}", spec.name, verdict.witness);
            let tower = extract_r(&q, &ctx, 6).unwrap();
            let re = check_reassembly(&q, &ctx, &tower, 3).unwrap();
            assert!(re.passed, "{}: {:?}", spec.name, re.witness);
        }
    }

    #[test]
    fn corrupted_tower_fails_reassembly() {
        let spec = presets::sl2();
        let chart = spec.chart(None).unwrap();
        let q = q_from_spec(&spec, &chart).unwrap();
        let conn = Connection::trivial(&chart);
        let ctx = PbwCtx::new(&conn);
        let mut tower = extract_r(&q, &ctx, 4).unwrap();
        // perturb R_2 by +∂_1 on one word
        let mut r2 = tower.maps.get(&2).unwrap().clone();
        let w = FrameWord(vec![0, 1]);
        let old = r2.eval_word(&w.0);
        r2.set(w, old.add(&VectorField::frame(&chart, 0))).unwrap();
        tower.maps.insert(2, r2);
        let re = check_reassembly(&q, &ctx, &tower, 3).unwrap();
        assert!(!re.passed, "perturbation must break the reassembly");
    }

    #[test]
    fn lambda_one_and_two() {
        let spec = presets::nonabelian2();
        let chart = spec.chart(None).unwrap();
        let q = q_from_spec(&spec, &chart).unwrap();
        let conn = Connection::trivial(&chart);
        let ctx = PbwCtx::new(&conn);
        let tower = extract_r(&q, &ctx, 3).unwrap();
        let x = VectorField::frame(&chart, 0);
        let y = VectorField::frame(&chart, 1);
        // λ_1 = L_Q
        assert_eq!(
            lambda(&tower, &q, std::slice::from_ref(&x)).unwrap(),
            q.field().commutator(&x).unwrap()
        );
        // λ_2 = -At
        let at = atiyah_cocycle(&q, &conn).unwrap();
        assert_eq!(
            lambda(&tower, &q, &[x.clone(), y.clone()]).unwrap(),
            at.tensor().value(0, 1).neg().on_chart(ctx.chart())
        );
        // arity past the cap is refused
        assert!(lambda(&tower, &q, &[x.clone(), x.clone(), y.clone(), y.clone()]).is_err());
    }

    #[test]
    fn lambda_k_is_function_multilinear() {
        // λ_2(f X, Y) = ± f λ_2(X, Y) with the degree-+1 Koszul sign
        let spec = presets::dgla_uv();
        let chart = spec.chart(None).unwrap();
        let q = q_from_spec(&spec, &chart).unwrap();
        let conn = uv_connection(&chart, 1, 1, 1);
        let ctx = PbwCtx::new(&conn);
        let tower = extract_r(&q, &ctx, 3).unwrap();
        let f = FormalFunction::coordinate(&chart, 0);
        let x = VectorField::frame(&chart, 0);
        let y = VectorField::frame(&chart, 1);
        let fx = x.scale_fn(&f).unwrap();
        let lhs = lambda(&tower, &q, &[fx, y.clone()]).unwrap();
        let base = lambda(&tower, &q, &[x.clone(), y.clone()]).unwrap();
        // |f| = 1 odd and the tower maps have degree +1: sign -1
        let rhs = base.scale_fn(&f.on_chart(ctx.chart())).unwrap().neg();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn b_nabla_unit_and_flat_cases() {
        let spec = presets::dgla_uv();
        let chart = spec.chart(None).unwrap();
        // T = 1 gives Y
        let conn = uv_connection(&chart, 1, 1, 1);
        let ctx = PbwCtx::new(&conn);
        let y = VectorField::frame(&chart, 0);
        assert_eq!(
            b_nabla(&ctx, &y, &SymTensorField::unit(&chart)).unwrap(),
            SymTensorField::from_vf(&y).on_chart(ctx.chart())
        );
        // flat connection: B(Y; T) = Y ⊙ T
        let flat = uv_connection(&chart, 0, 5, 0);
        assert!(flat.is_flat().unwrap());
        let ctxf = PbwCtx::new(&flat);
        for arity in 0..=3usize {
            for w in SymBundleMap::domain_words(&chart, arity) {
                let t = SymTensorField::from_word(&chart, &w);
                let lhs = b_nabla(&ctxf, &y, &t).unwrap();
                let rhs = SymTensorField::from_vf(&y)
                    .product(&t)
                    .unwrap()
                    .on_chart(ctxf.chart());
                assert_eq!(lhs, rhs, "word {w:?}");
            }
        }
    }

    #[test]
    fn b_nabla_is_function_bilinear() {
        // B(fY; T) = f B(Y; T) and B(Y; fT) = (-1)^{|Y||f|} f B(Y; T)
        let spec = presets::dgla_uv();
        let chart = spec.chart(None).unwrap();
        let conn = uv_connection(&chart, 1, 1, 1);
        let ctx = PbwCtx::new(&conn);
        let f = FormalFunction::coordinate(&chart, 0);
        let y = VectorField::frame(&chart, 0);
        let t = SymTensorField::from_word(&chart, &FrameWord(vec![0, 1]));
        let lhs = b_nabla(&ctx, &y.scale_fn(&f).unwrap(), &t).unwrap();
        let rhs = b_nabla(&ctx, &y, &t)
            .unwrap()
            .scale_fn(&f.on_chart(ctx.chart()))
            .unwrap();
        assert_eq!(lhs, rhs);
        let lhs = b_nabla(&ctx, &y, &t.scale_fn(&f).unwrap()).unwrap();
        // |Y| = -1 odd and |f| = 1 odd: sign -1
        let rhs = rhs.neg();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn connection_compare_identity_and_distinct() {
        let spec = presets::dgla_uv();
        let chart = spec.chart(None).unwrap();
        let q = q_from_spec(&spec, &chart).unwrap();
        let conn = uv_connection(&chart, 1, 1, 1);
        // same connection: φ = id at every arity
        let same = connection_compare(&q, &conn, &conn, 3).unwrap();
        assert!(same.intertwines && same.phi1_is_identity);
        for (k, comp) in &same.components {
            for w in SymBundleMap::domain_words(&chart, *k) {
                let expected = if *k == 1 {
                    VectorField::frame(&chart, w.0[0])
                } else {
                    VectorField::zero(&chart)
                };
                assert_eq!(comp.eval_word(&w.0), expected);
            }
        }
        // distinct connections intertwine with φ_1 = id and φ_2 the
        // difference tensor
        let conn2 = uv_connection(&chart, 0, 2, -1);
        let cmp = connection_compare(&q, &conn, &conn2, 3).unwrap();
        assert!(cmp.intertwines && cmp.phi1_is_identity);
        let diff = conn.difference(&conn2).unwrap();
        for w in SymBundleMap::domain_words(&chart, 2) {
            // φ(X ⊙ Y) = X ⊙ Y + pbw'⁻¹(∇'XY - ∇XY): arity-1 layer is the
            // negated difference
            let expected = diff.value(w.0[0], w.0[1]).neg();
            assert_eq!(cmp.components[&2].eval_word(&w.0), expected, "word {w:?}");
        }
    }
}
