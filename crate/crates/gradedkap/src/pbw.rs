//! The graded Poincare-Birkhoff-Witt map of an affine connection, its
//! filtration-based inverse, and the defect map C measuring the failure of
//! the PBW map to intertwine the Lie derivatives on tensors and operators.
//!
//! On frame words the map satisfies the averaged recursion
//!   pbw(X_1 ⊙ ... ⊙ X_n)
//!     = 1/n Σ_k ε_k ( X_k · pbw(X^{(k)}) - pbw(∇_{X_k} X^{(k)}) ),
//! with pbw(f) = f and pbw(X) = X, extended R-linearly. The inverse peels
//! the top-order symbol and recurses down the order filtration.

use std::cell::RefCell;
use std::collections::BTreeMap;

use crate::chart::Chart;
use crate::connection::{atiyah_cocycle, AtiyahCocycle, Connection};
use crate::diffop::DiffOp;
use crate::error::{Error, Result};
use crate::linfty::HomologicalVF;
use crate::scalar::{s_int, s_one};
use crate::tensor::{FrameWord, SymTensorField};
use crate::vector_field::VectorField;

/// Memoizing evaluation context for one connection. All arithmetic runs on
/// the lifted (untruncated) chart so that order peeling and operator
/// composition never lose low-weight terms; results are exact.
pub struct PbwCtx<'a> {
    conn: &'a Connection,
    chart: Chart,
    memo: RefCell<BTreeMap<FrameWord, DiffOp>>,
}

impl<'a> PbwCtx<'a> {
    pub fn new(conn: &'a Connection) -> Self {
        PbwCtx {
            conn,
            chart: conn.chart().lifted(),
            memo: RefCell::new(BTreeMap::new()),
        }
    }

    pub fn connection(&self) -> &Connection {
        self.conn
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    /// pbw on a canonical frame word.
    pub fn pbw_word(&self, word: &FrameWord) -> Result<DiffOp> {
        if let Some(hit) = self.memo.borrow().get(word) {
            return Ok(hit.clone());
        }
        let n = word.arity();
        let result = match n {
            0 => DiffOp::one(&self.chart),
            1 => DiffOp::frame(&self.chart, word.0[0]),
            _ => {
                let mut sum = DiffOp::zero(&self.chart);
                let mut prefix_deg = 0i64;
                for (k, &jk) in word.0.iter().enumerate() {
                    let djk = self.chart.frame_degree(jk);
                    let eps = (djk * prefix_deg) % 2 != 0;
                    let mut rest = word.0.clone();
                    rest.remove(k);
                    let rest_word = FrameWord(rest);
                    // X_k · pbw(rest)
                    let term1 = DiffOp::frame(&self.chart, jk).compose(&self.pbw_word(&rest_word)?)?;
                    // pbw(∇_{X_k} rest)
                    let rest_tensor = SymTensorField::from_word(&self.chart, &rest_word);
                    let nabla_rest = self
                        .conn
                        .nabla_tensor(&VectorField::frame(&self.chart, jk), &rest_tensor)?
                        .on_chart(&self.chart);
                    let term2 = self.pbw(&nabla_rest)?;
                    let mut piece = term1.sub(&term2);
                    if eps {
                        piece = piece.neg();
                    }
                    sum = sum.add(&piece);
                    prefix_deg += djk;
                }
                sum.scale(&(s_one() / s_int(n as i64)))
            }
        };
        self.memo.borrow_mut().insert(word.clone(), result.clone());
        Ok(result)
    }

    /// R-linear extension: pbw(f · W) = f · pbw(W).
    pub fn pbw(&self, t: &SymTensorField) -> Result<DiffOp> {
        self.chart.check_compatible(t.chart())?;
        let mut out = DiffOp::zero(&self.chart);
        for (w, f) in t.terms() {
            out = out.add(&self.pbw_word(w)?.scale_fn(&f.on_chart(&self.chart))?);
        }
        Ok(out)
    }

    /// Exact inverse along the order filtration: peel the top symbol,
    /// subtract its pbw image, recurse on the lower-order remainder.
    pub fn pbw_inverse(&self, d: &DiffOp) -> Result<SymTensorField> {
        self.chart.check_compatible(d.chart())?;
        let mut remainder = d.on_chart(&self.chart);
        let mut out = SymTensorField::zero(&self.chart);
        while !remainder.is_zero() {
            let n = remainder.order();
            let top = remainder.symbol(n);
            out = out.add(&top);
            remainder = remainder.sub(&self.pbw(&top)?);
            if remainder.order() >= n && !remainder.is_zero() && n > 0 {
                // pbw(top) must reproduce the order-n block exactly
                return Err(Error::Inconsistency(
                    "order did not drop while inverting the PBW map".into(),
                ));
            }
            if n == 0 {
                break;
            }
        }
        Ok(out)
    }
}

/// The defect map C(T) = [[Q, pbw(T)]] - pbw(L_Q T); R-linear of degree +1,
/// dropping operator order by one.
pub fn c_nabla(q: &HomologicalVF, ctx: &PbwCtx, t: &SymTensorField) -> Result<DiffOp> {
    let chart = ctx.chart();
    let q_field = q.field().on_chart(chart);
    let t = t.on_chart(chart);
    let term1 = ctx.pbw(&t)?.lie_derivative(&q_field)?;
    let term2 = ctx.pbw(&t.lie_derivative(&q_field)?)?;
    Ok(term1.sub(&term2))
}

/// Evaluates the recursive characterization of the defect map: zero in
/// arities 0 and 1, minus the Atiyah cocycle in arity 2, and for n >= 3
///   C(X) = 1/n Σ_k ε_k [ (-1)^{|X_k|} X_k · C(X^{(k)}) - C(∇_{X_k} X^{(k)}) ]
///        - 2/n Σ_{i<j} ε_i ε_j (-1)^{|X_i||X_j|}
///                      pbw( At(X_i, X_j) ⊙ X^{(i,j)} ).
pub fn c_nabla_recursive(
    q: &HomologicalVF,
    ctx: &PbwCtx,
    t: &SymTensorField,
) -> Result<DiffOp> {
    let at = atiyah_cocycle(q, ctx.connection())?;
    let chart = ctx.chart();
    let mut memo: BTreeMap<FrameWord, DiffOp> = BTreeMap::new();
    let mut out = DiffOp::zero(chart);
    for (w, f) in t.on_chart(chart).terms() {
        let cw = c_rec_word(ctx, &at, w, &mut memo)?;
        // R-linearity of degree +1: C(fW) = (-1)^{|f|} f C(W)
        for (fd, f_part) in f.homogeneous_parts() {
            let mut piece = cw.scale_fn(&f_part)?;
            if fd % 2 != 0 {
                piece = piece.neg();
            }
            out = out.add(&piece);
        }
    }
    Ok(out)
}

fn c_rec_word(
    ctx: &PbwCtx,
    at: &AtiyahCocycle,
    word: &FrameWord,
    memo: &mut BTreeMap<FrameWord, DiffOp>,
) -> Result<DiffOp> {
    if let Some(hit) = memo.get(word) {
        return Ok(hit.clone());
    }
    let chart = ctx.chart();
    let n = word.arity();
    let result = match n {
        0 | 1 => DiffOp::zero(chart),
        2 => {
            let v = at.tensor().value(word.0[0], word.0[1]).on_chart(chart);
            DiffOp::from_vf(&v).neg()
        }
        _ => {
            let mut sum = DiffOp::zero(chart);
            // first sum
            let mut prefix_deg = 0i64;
            for (k, &jk) in word.0.iter().enumerate() {
                let djk = chart.frame_degree(jk);
                let eps = (djk * prefix_deg) % 2 != 0;
                let mut rest = word.0.clone();
                rest.remove(k);
                let rest_word = FrameWord(rest);
                let c_rest = c_rec_word(ctx, at, &rest_word, memo)?;
                let mut term1 = DiffOp::frame(chart, jk).compose(&c_rest)?;
                if djk % 2 != 0 {
                    term1 = term1.neg();
                }
                // C(∇_{X_k} rest) via R-linear extension over the memo
                let rest_tensor = SymTensorField::from_word(chart, &rest_word);
                let nabla_rest = ctx
                    .connection()
                    .nabla_tensor(&VectorField::frame(chart, jk), &rest_tensor)?
                    .on_chart(chart);
                let mut term2 = DiffOp::zero(chart);
                for (w2, f2) in nabla_rest.terms() {
                    let cw2 = c_rec_word(ctx, at, w2, memo)?;
                    for (fd, f_part) in f2.homogeneous_parts() {
                        let mut piece = cw2.scale_fn(&f_part)?;
                        if fd % 2 != 0 {
                            piece = piece.neg();
                        }
                        term2 = term2.add(&piece);
                    }
                }
                let mut piece = term1.sub(&term2);
                if eps {
                    piece = piece.neg();
                }
                sum = sum.add(&piece);
                prefix_deg += djk;
            }
            // Atiyah double sum
            let mut at_sum = DiffOp::zero(chart);
            for i in 0..n {
                for j in (i + 1)..n {
                    let xi = word.0[i];
                    let xj = word.0[j];
                    let di = chart.frame_degree(xi);
                    let dj = chart.frame_degree(xj);
                    let eps_i: i64 = word.0[..i]
                        .iter()
                        .map(|&m| chart.frame_degree(m))
                        .sum::<i64>()
                        * di;
                    let eps_j: i64 = word.0[..j]
                        .iter()
                        .map(|&m| chart.frame_degree(m))
                        .sum::<i64>()
                        * dj;
                    let eps_negative = (eps_i + eps_j + di * dj) % 2 != 0;
                    let mut rest = word.0.clone();
                    rest.remove(j);
                    rest.remove(i);
                    let at_v = at.tensor().value(xi, xj).on_chart(chart);
                    let t = SymTensorField::from_vf(&at_v)
                        .product(&SymTensorField::from_word(chart, &FrameWord(rest)))?;
                    let piece = ctx.pbw(&t)?;
                    // contribution is -ε_i ε_j (-1)^{|X_i||X_j|} · piece
                    at_sum = at_sum.add(&if eps_negative { piece } else { piece.neg() });
                }
            }
            let inv_n = s_one() / s_int(n as i64);
            sum.scale(&inv_n).add(&at_sum.scale(&(s_int(2) * &inv_n)))
        }
    };
    memo.insert(word.clone(), result.clone());
    Ok(result)
}

/// Verdict of the equivalence "Atiyah cocycle vanishes iff the defect map
/// vanishes", checked on all frame words up to the arity cap.
#[derive(Debug, Clone)]
pub struct Theorem1Report {
    pub atiyah_is_zero: bool,
    pub c_is_zero: bool,
    pub arity_cap: usize,
    pub witness: Option<String>,
}

impl Theorem1Report {
    pub fn consistent(&self) -> bool {
        self.atiyah_is_zero == self.c_is_zero
    }
}

pub fn theorem1_check(
    q: &HomologicalVF,
    conn: &Connection,
    arity_cap: usize,
) -> Result<Theorem1Report> {
    let at = atiyah_cocycle(q, conn)?;
    let ctx = PbwCtx::new(conn);
    let mut c_is_zero = true;
    let mut witness = None;
    for arity in 0..=arity_cap {
        for w in crate::tensor::SymBundleMap::domain_words(ctx.chart(), arity) {
            let c = c_nabla(q, &ctx, &SymTensorField::from_word(ctx.chart(), &w))?;
            if !c.is_zero() {
                c_is_zero = false;
                if witness.is_none() {
                    witness = Some(format!(
                        "C({}) = {}",
                        w.render(ctx.chart()),
                        c.render()
                    ));
                }
            }
        }
    }
    if !at.is_zero() && witness.is_none() {
        let ((i, j), v) = at
            .tensor()
            .entries()
            .next()
            .map(|(k, v)| (*k, v.clone()))
            .expect("nonzero cocycle has entries");
        witness = Some(format!(
            "At({}, {}) = {}",
            conn.chart().name(i),
            conn.chart().name(j),
            v.render()
        ));
    }
    Ok(Theorem1Report {
        atiyah_is_zero: at.is_zero(),
        c_is_zero,
        arity_cap,
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::tests::uv_connection;
    use crate::diffop::do_coproduct_eval;
    use crate::function::FormalFunction;
    use crate::linfty::{presets, q_from_spec};
    use crate::tensor::{st_comultiply, SymBundleMap};

    #[test]
    fn pbw_base_cases() {
        let chart = presets::sl2().chart(None).unwrap();
        let conn = Connection::trivial(&chart);
        let ctx = PbwCtx::new(&conn);
        let f = FormalFunction::coordinate(&chart, 2);
        assert_eq!(
            ctx.pbw(&SymTensorField::from_fn(&f)).unwrap(),
            DiffOp::from_fn(&f)
        );
        let x = VectorField::frame(&chart, 1);
        assert_eq!(
            ctx.pbw(&SymTensorField::from_vf(&x)).unwrap(),
            DiffOp::from_vf(&x)
        );
    }

    #[test]
    fn pbw_pair_formula() {
        // pbw(X ⊙ Y) = XY - ∇_X Y for torsion-free connections
        let spec = presets::dgla_uv();
        let chart = spec.chart(None).unwrap();
        let conn = uv_connection(&chart, 1, 1, 1);
        let ctx = PbwCtx::new(&conn);
        for i in 0..2 {
            for j in 0..2 {
                let Some((sign, w)) = FrameWord::canonicalize(&[i, j], &chart) else {
                    continue;
                };
                let t = SymTensorField::from_word(&chart, &w);
                let lhs = ctx.pbw(&t).unwrap();
                let xi = DiffOp::frame(&chart, i);
                let xj = DiffOp::frame(&chart, j);
                let mut rhs = xi
                    .compose(&xj)
                    .unwrap()
                    .sub(&DiffOp::from_vf(&conn.gamma(i, j)));
                if sign < 0 {
                    rhs = rhs.neg();
                }
                assert_eq!(lhs, rhs, "pair ({i},{j})");
            }
        }
    }

    #[test]
    fn pbw_trivial_connection_collapses_to_del_monomials() {
        let chart = presets::sl2().chart(None).unwrap();
        let conn = Connection::trivial(&chart);
        let ctx = PbwCtx::new(&conn);
        let w = FrameWord(vec![0, 1, 2]);
        let t = SymTensorField::from_word(&chart, &w);
        let lhs = ctx.pbw(&t).unwrap();
        let mut expected = DiffOp::zero(&chart);
        expected.add_term(
            crate::diffop::DelMonomial(vec![0, 1, 2]),
            FormalFunction::one(&chart),
        );
        assert_eq!(lhs, expected);
    }

    #[test]
    fn pbw_filtration_and_symbol() {
        let spec = presets::dgla_uv();
        let chart = spec.chart(None).unwrap();
        let conn = uv_connection(&chart, 1, 0, 2);
        let ctx = PbwCtx::new(&conn);
        for arity in 0..=4usize {
            for w in SymBundleMap::domain_words(&chart, arity) {
                let t = SymTensorField::from_word(&chart, &w);
                let d = ctx.pbw(&t).unwrap();
                assert_eq!(d.order(), arity);
                assert_eq!(d.symbol(arity), t, "top symbol must be the word");
            }
        }
    }

    #[test]
    fn pbw_counit_compatibility() {
        // pbw(T) applied to 1 equals the arity-0 part of T
        let spec = presets::dgla_uv();
        let chart = spec.chart(None).unwrap();
        let conn = uv_connection(&chart, 2, 1, 1);
        let ctx = PbwCtx::new(&conn);
        let x1 = FormalFunction::coordinate(&chart, 0);
        let mut t = SymTensorField::from_word(&chart, &FrameWord(vec![0, 1]));
        t.add_term(FrameWord(vec![1]), x1.clone());
        t.add_term(FrameWord::empty(), x1.clone());
        let one = FormalFunction::one(&chart);
        assert_eq!(ctx.pbw(&t).unwrap().apply(&one).unwrap(), t.counit());
    }

    #[test]
    fn pbw_inverse_round_trips() {
        let spec = presets::dgla_uv();
        let chart = spec.chart(None).unwrap();
        let conn = uv_connection(&chart, 1, 1, 1);
        let ctx = PbwCtx::new(&conn);
        let x1 = FormalFunction::coordinate(&chart, 0);
        let x2 = FormalFunction::coordinate(&chart, 1);
        // assorted tensors of arity <= 3, weight <= 3
        let mut pool = Vec::new();
        for arity in 0..=3usize {
            for w in SymBundleMap::domain_words(&chart, arity) {
                pool.push(SymTensorField::from_word(&chart, &w));
                pool.push(
                    SymTensorField::from_word(&chart, &w)
                        .scale_fn(&x1)
                        .unwrap(),
                );
                pool.push(
                    SymTensorField::from_word(&chart, &w)
                        .scale_fn(&x2.multiply(&x2).unwrap())
                        .unwrap(),
                );
            }
        }
        for t in pool {
            let d = ctx.pbw(&t).unwrap();
            assert_eq!(ctx.pbw_inverse(&d).unwrap(), t);
        }
        // two-sided: order-0 and the trivial-connection ∂-word
        let f = DiffOp::from_fn(&x1);
        assert_eq!(
            ctx.pbw(&ctx.pbw_inverse(&f).unwrap()).unwrap(),
            f
        );
        let triv = Connection::trivial(&chart);
        let ctx0 = PbwCtx::new(&triv);
        let mut d = DiffOp::zero(&chart);
        d.add_term(crate::diffop::DelMonomial(vec![0, 1]), FormalFunction::one(&chart));
        let inv = ctx0.pbw_inverse(&d).unwrap();
        assert_eq!(inv, SymTensorField::from_word(&chart, &FrameWord(vec![0, 1])));
    }

    #[test]
    fn pbw_is_coalgebra_morphism() {
        // Δ(pbw T)(f ⊗ g) = Σ ± pbw(T_(1))(f) · pbw(T_(2))(g)
        // with the sign (-1)^{|T_(2)| |f|} from evaluating the right factor
        // first... equivalently: pbw(T)(fg) expanded through st_comultiply.
        let spec = presets::dgla_uv();
        let chart = spec.chart(None).unwrap();
        for conn in [Connection::trivial(&chart), uv_connection(&chart, 1, 1, 1)] {
            let ctx = PbwCtx::new(&conn);
            let x1 = FormalFunction::coordinate(&chart, 0);
            let x2 = FormalFunction::coordinate(&chart, 1);
            let probes = vec![
                FormalFunction::one(&chart),
                x1.clone(),
                x2.clone(),
                x1.multiply(&x2).unwrap(),
                x2.multiply(&x2).unwrap(),
            ];
            for arity in 0..=3usize {
                for w in SymBundleMap::domain_words(&chart, arity) {
                    let t = SymTensorField::from_word(&chart, &w);
                    let image = ctx.pbw(&t).unwrap();
                    for f in &probes {
                        for g in &probes {
                            let lhs = do_coproduct_eval(&image, f, g).unwrap();
                            let mut rhs = FormalFunction::zero(&chart);
                            for ((a, b), coeff) in st_comultiply(&t).terms() {
                                let da = ctx.pbw(&SymTensorField::from_word(&chart, a))
                                    .unwrap()
                                    .scale_fn(coeff)
                                    .unwrap();
                                let db = ctx.pbw(&SymTensorField::from_word(&chart, b)).unwrap();
                                // (D_a ⊗ D_b)(f ⊗ g) = (-1)^{|D_b||f|} D_a(f) D_b(g)
                                for (dbd, db_part) in db.homogeneous_parts() {
                                    for (fd, f_part) in f.homogeneous_parts() {
                                        let mut piece = da
                                            .apply(&f_part)
                                            .unwrap()
                                            .multiply(&db_part.apply(g).unwrap())
                                            .unwrap();
                                        if (dbd * fd) % 2 != 0 {
                                            piece = piece.neg();
                                        }
                                        rhs = rhs.add(&piece);
                                    }
                                }
                            }
                            assert_eq!(lhs, rhs, "word {w:?} f={f:?} g={g:?}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn c_nabla_base_identities() {
        let spec = presets::nonabelian2();
        let chart = spec.chart(None).unwrap();
        let q = q_from_spec(&spec, &chart).unwrap();
        let conn = Connection::trivial(&chart);
        let ctx = PbwCtx::new(&conn);
        // C(f) = 0 and C(X) = 0
        let f = FormalFunction::coordinate(&chart, 0);
        assert!(c_nabla(&q, &ctx, &SymTensorField::from_fn(&f)).unwrap().is_zero());
        for j in 0..2 {
            let x = SymTensorField::from_word(&chart, &FrameWord(vec![j]));
            assert!(c_nabla(&q, &ctx, &x).unwrap().is_zero());
        }
        // C(X ⊙ Y) = -At(X, Y)
        let at = atiyah_cocycle(&q, &conn).unwrap();
        let t = SymTensorField::from_word(&chart, &FrameWord(vec![0, 1]));
        let expected = DiffOp::from_vf(&at.tensor().value(0, 1)).neg();
        assert_eq!(c_nabla(&q, &ctx, &t).unwrap(), expected);
        // abelian: everything zero
        let ab = presets::abelian2();
        let chart0 = ab.chart(None).unwrap();
        let q0 = q_from_spec(&ab, &chart0).unwrap();
        let conn0 = Connection::trivial(&chart0);
        let ctx0 = PbwCtx::new(&conn0);
        for arity in 0..=3usize {
            for w in SymBundleMap::domain_words(&chart0, arity) {
                assert!(c_nabla(&q0, &ctx0, &SymTensorField::from_word(&chart0, &w))
                    .unwrap()
                    .is_zero());
            }
        }
    }

    #[test]
    fn c_nabla_recursive_matches_direct_to_arity_four() {
        // flat (trivial on sl2) and non-flat (uv family) connections
        #[allow(clippy::type_complexity)]
        let cases: Vec<(crate::linfty::LInftySpec, Option<(i64, i64, i64)>)> = vec![
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
            for arity in 0..=4usize {
                for w in SymBundleMap::domain_words(&chart, arity) {
                    let t = SymTensorField::from_word(&chart, &w);
                    let direct = c_nabla(&q, &ctx, &t).unwrap();
                    let recursive = c_nabla_recursive(&q, &ctx, &t).unwrap();
                    assert_eq!(direct, recursive, "{} word {w:?}", spec.name);
                }
            }
        }
    }

    #[test]
    fn c_nabla_order_drop() {
        let spec = presets::dgla_uv();
        let chart = spec.chart(None).unwrap();
        let q = q_from_spec(&spec, &chart).unwrap();
        let conn = uv_connection(&chart, 1, 1, 1);
        let ctx = PbwCtx::new(&conn);
        for arity in 1..=4usize {
            for w in SymBundleMap::domain_words(&chart, arity) {
                let c = c_nabla(&q, &ctx, &SymTensorField::from_word(&chart, &w)).unwrap();
                assert!(
                    c.is_zero() || c.order() < arity,
                    "order {} for arity {arity}",
                    c.order()
                );
            }
        }
    }

    #[test]
    fn theorem1_biconditional_on_examples() {
        // dg vector space with only q1: At = 0 and C = 0
        let dg = presets::dgvec();
        let chart = dg.chart(None).unwrap();
        let q = q_from_spec(&dg, &chart).unwrap();
        let conn = Connection::trivial(&chart);
        let report = theorem1_check(&q, &conn, 4).unwrap();
        assert!(report.atiyah_is_zero && report.c_is_zero && report.consistent());
        // 2-dim nonabelian: At != 0 and C(∂_1 ⊙ ∂_2) != 0
        let nab = presets::nonabelian2();
        let chart = nab.chart(None).unwrap();
        let q = q_from_spec(&nab, &chart).unwrap();
        let conn = Connection::trivial(&chart);
        let report = theorem1_check(&q, &conn, 4).unwrap();
        assert!(!report.atiyah_is_zero && !report.c_is_zero && report.consistent());
        assert!(report.witness.is_some());
        // abelian: consistent with both zero
        let ab = presets::abelian2();
        let chart = ab.chart(None).unwrap();
        let q = q_from_spec(&ab, &chart).unwrap();
        let conn = Connection::trivial(&chart);
        let report = theorem1_check(&q, &conn, 4).unwrap();
        assert!(report.atiyah_is_zero && report.c_is_zero && report.consistent());
    }
}
