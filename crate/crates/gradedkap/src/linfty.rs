//! L-infinity[1] structure data and the associated homological vector field.
//!
//! Multibrackets q_k of internal degree +1 are stored by structure constants
//! on sorted index tuples; values on unsorted tuples follow by graded
//! symmetry. The homological field on the chart is
//!     Q = - Σ_k 1/k! c^j_{i_1..i_k} x^{i_k} ... x^{i_1} ∂_j
//! summed over all tuples, with partials acting as left derivations; the
//! convention is validated globally by [Q,Q] = 0 on known Lie algebras.

use std::collections::BTreeMap;

use num::Zero;

use crate::chart::Chart;
use crate::error::{Error, Result};
use crate::function::FormalFunction;
use crate::scalar::{s_int, s_one, Scalar};
use crate::vector_field::VectorField;

/// Basis data and bracket table of a finite-dimensional L-infinity[1]
/// algebra. Degrees are those of the basis vectors e_i of g[1].
#[derive(Debug, Clone, PartialEq)]
pub struct LInftySpec {
    pub name: String,
    names: Vec<String>,
    degrees: Vec<i64>,
    /// arity -> sorted input tuple -> output index -> coefficient
    brackets: BTreeMap<usize, BTreeMap<Vec<usize>, BTreeMap<usize, Scalar>>>,
}

impl LInftySpec {
    pub fn new(name: impl Into<String>, names: Vec<String>, degrees: Vec<i64>) -> Result<Self> {
        if names.len() != degrees.len() || names.is_empty() {
            return Err(Error::InvalidInput(
                "generator names and degrees must be nonempty and of equal length".into(),
            ));
        }
        let mut unique = names.clone();
        unique.sort();
        unique.dedup();
        if unique.len() != names.len() {
            return Err(Error::InvalidInput("duplicate generator names".into()));
        }
        Ok(LInftySpec {
            name: name.into(),
            names,
            degrees,
            brackets: BTreeMap::new(),
        })
    }

    pub fn dimension(&self) -> usize {
        self.degrees.len()
    }

    pub fn generator_degree(&self, i: usize) -> i64 {
        self.degrees[i]
    }

    pub fn generator_degrees(&self) -> &[i64] {
        &self.degrees
    }

    pub fn generator_name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn generator_names(&self) -> &[String] {
        &self.names
    }

    pub fn generator_is_odd(&self, i: usize) -> bool {
        self.degrees[i].rem_euclid(2) == 1
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn max_arity(&self) -> usize {
        self.brackets.keys().copied().max().unwrap_or(0)
    }

    /// Registers c^output_{inputs} for a sorted input tuple. Rejects empty
    /// tuples (curved structures), unsorted or duplicate tuples, repeats of
    /// odd generators, and degree-inconsistent entries.
    pub fn add_bracket(&mut self, inputs: &[usize], output: usize, coeff: Scalar) -> Result<()> {
        if inputs.is_empty() {
            return Err(Error::InvalidInput(
                "curved structures (arity-0 bracket) are not supported".into(),
            ));
        }
        let d = self.dimension();
        if output >= d || inputs.iter().any(|&i| i >= d) {
            return Err(Error::InvalidInput(format!(
                "bracket entry {inputs:?} -> {output} references an unknown generator"
            )));
        }
        if inputs.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidInput(format!(
                "bracket inputs {inputs:?} must be sorted in generator order"
            )));
        }
        if inputs
            .windows(2)
            .any(|w| w[0] == w[1] && self.generator_is_odd(w[0]))
        {
            return Err(Error::InvalidInput(format!(
                "bracket inputs {inputs:?} repeat an odd generator; that word is zero"
            )));
        }
        let expected = 1 + inputs.iter().map(|&i| self.degrees[i]).sum::<i64>();
        if self.degrees[output] != expected {
            return Err(Error::InvalidInput(format!(
                "bracket {inputs:?} -> {output}: output degree {} but arity-{} brackets of these inputs must land in degree {}",
                self.degrees[output],
                inputs.len(),
                expected
            )));
        }
        if coeff.is_zero() {
            return Ok(());
        }
        let per_tuple = self
            .brackets
            .entry(inputs.len())
            .or_default()
            .entry(inputs.to_vec())
            .or_default();
        if per_tuple.contains_key(&output) {
            return Err(Error::InvalidInput(format!(
                "duplicate bracket entry for {inputs:?} -> {output}"
            )));
        }
        per_tuple.insert(output, coeff);
        Ok(())
    }

    /// All stored (sorted tuple, output, coefficient) triples of one arity.
    pub fn entries(&self, arity: usize) -> Vec<(Vec<usize>, usize, Scalar)> {
        let mut out = Vec::new();
        if let Some(per) = self.brackets.get(&arity) {
            for (tuple, outs) in per {
                for (j, c) in outs {
                    out.push((tuple.clone(), *j, c.clone()));
                }
            }
        }
        out
    }

    /// q_k on an arbitrary (possibly unsorted) tuple, as coefficients on the
    /// output basis. Koszul signs come from sorting in generator degrees.
    pub fn bracket_on(&self, tuple: &[usize]) -> BTreeMap<usize, Scalar> {
        let mut out = BTreeMap::new();
        let Some((sign, sorted)) =
            crate::grading::sort_word_signed(tuple, |i| self.generator_is_odd(i))
        else {
            return out;
        };
        if let Some(per) = self.brackets.get(&tuple.len()) {
            if let Some(outs) = per.get(&sorted) {
                for (j, c) in outs {
                    let mut v = c.clone();
                    if sign < 0 {
                        v = -v;
                    }
                    out.insert(*j, v);
                }
            }
        }
        out
    }

    /// The chart of the dg manifold g[1]: coordinate degrees are the
    /// negatives of generator degrees.
    pub fn chart(&self, truncation: Option<u32>) -> Result<Chart> {
        let degrees: Vec<i64> = self.degrees.iter().map(|d| -d).collect();
        Chart::new(self.names.clone(), degrees, truncation)
    }

    pub fn check_chart(&self, chart: &Chart) -> Result<()> {
        if chart.dimension() != self.dimension()
            || (0..self.dimension()).any(|i| chart.coordinate_degree(i) != -self.degrees[i])
        {
            return Err(Error::InvalidInput(
                "chart degrees are not the negated generator degrees of the bracket table".into(),
            ));
        }
        Ok(())
    }
}

/// A vector field of internal degree +1 whose self-commutator vanishes (up
/// to the chart truncation).
#[derive(Debug, Clone, PartialEq)]
pub struct HomologicalVF {
    field: VectorField,
}

impl HomologicalVF {
    pub fn field(&self) -> &VectorField {
        &self.field
    }

    pub fn chart(&self) -> &Chart {
        self.field.chart()
    }
}

/// Outcome of the [Q,Q] = 0 test; on failure carries the first nonzero
/// component of the self-commutator.
#[derive(Debug, Clone)]
pub enum HomologicalVerdict {
    Pass,
    Fail { coordinate: String, witness: String },
}

impl HomologicalVerdict {
    pub fn passed(&self) -> bool {
        matches!(self, HomologicalVerdict::Pass)
    }
}

/// Evaluates [Q,Q] in the (possibly truncated) chart algebra.
pub fn check_homological(q: &VectorField) -> Result<HomologicalVerdict> {
    if !q.is_homogeneous_of(1) {
        return Err(Error::InvalidInput(
            "homological candidates must be homogeneous of internal degree +1".into(),
        ));
    }
    let qq = q.commutator(q)?;
    for (j, comp) in qq.components().iter().enumerate() {
        if !comp.is_zero() {
            return Ok(HomologicalVerdict::Fail {
                coordinate: q.chart().name(j).to_string(),
                witness: comp.render(),
            });
        }
    }
    Ok(HomologicalVerdict::Pass)
}

/// Assembles Q from the bracket table on the given chart and verifies
/// [Q,Q] = 0 there.
pub fn q_from_spec(spec: &LInftySpec, chart: &Chart) -> Result<HomologicalVF> {
    spec.check_chart(chart)?;
    let q = q_candidate(spec, chart)?;
    match check_homological(&q)? {
        HomologicalVerdict::Pass => Ok(HomologicalVF { field: q }),
        HomologicalVerdict::Fail { coordinate, witness } => {
            Err(Error::NotHomological { coordinate, witness })
        }
    }
}

/// The raw field of the defining sum, before the square-zero check. The
/// component functions are the pairing-duals of the coderivation: Q^j is
/// the unique function with <Q^j, X> = -(-1)^{deg x^j} q(X) paired against
/// x^j for every word X, which expands to the 1/k!-averaged sum over all
/// index tuples.
pub fn q_candidate(spec: &LInftySpec, chart: &Chart) -> Result<VectorField> {
    spec.check_chart(chart)?;
    let mut components = vec![FormalFunction::zero(chart); chart.dimension()];
    for per_tuple in spec.brackets.values() {
        for (tuple, outs) in per_tuple {
            let kappa = pair_word(spec, tuple, tuple);
            if kappa.is_zero() {
                continue;
            }
            let mono = crate::function::Monomial(tuple.clone());
            for (j, c) in outs {
                let mut coeff = -(c.clone() / &kappa);
                if chart.coordinate_degree(*j) % 2 != 0 {
                    coeff = -coeff;
                }
                components[*j].add_term(mono.clone(), coeff);
            }
        }
    }
    VectorField::from_components(chart, components)
}

/// <x^{a_1}...x^{a_p}, e_{b_1}...e_{b_p}>: sum over matchings with the
/// Koszul sign of interleaving the e's into the coordinate word from the
/// left. This pairing is multiplicative through the shuffle coproduct and
/// is the duality every coalgebra-side identity runs through.
pub fn pair_word(spec: &LInftySpec, mono: &[usize], word: &[usize]) -> Scalar {
    if mono.len() != word.len() {
        return Scalar::zero();
    }
    if mono.is_empty() {
        return crate::scalar::s_one();
    }
    let a = mono[0];
    let mut total = Scalar::zero();
    for t in 0..word.len() {
        if word[t] != a {
            continue;
        }
        let mut crossings = 0usize;
        if spec.generator_is_odd(a) {
            crossings += mono[1..].iter().filter(|&&i| spec.generator_is_odd(i)).count();
            crossings += word[..t].iter().filter(|&&i| spec.generator_is_odd(i)).count();
        }
        let mut rest = word.to_vec();
        rest.remove(t);
        let sub = pair_word(spec, &mono[1..], &rest);
        if sub.is_zero() {
            continue;
        }
        if !crossings.is_multiple_of(2) {
            total -= sub;
        } else {
            total += sub;
        }
    }
    total
}

/// <f, X> for a full function.
pub fn pair_fn(spec: &LInftySpec, f: &crate::function::FormalFunction, word: &[usize]) -> Scalar {
    let mut total = Scalar::zero();
    for (m, c) in f.terms() {
        let p = pair_word(spec, &m.0, word);
        if !p.is_zero() {
            total += c.clone() * p;
        }
    }
    total
}

/// Canned structure tables used across the test suites.
pub mod presets {
    use super::*;

    /// Abelian two-dimensional Lie algebra.
    pub fn abelian2() -> LInftySpec {
        LInftySpec::new(
            "abelian2",
            vec!["e1".into(), "e2".into()],
            vec![-1, -1],
        )
        .unwrap()
    }

    /// Two-dimensional nonabelian Lie algebra, [e1, e2] = e2.
    pub fn nonabelian2() -> LInftySpec {
        let mut s = abelian2();
        s.name = "nonabelian2".into();
        s.add_bracket(&[0, 1], 1, s_one()).unwrap();
        s
    }

    /// Three-dimensional Heisenberg algebra, [e1, e2] = e3.
    pub fn heisenberg3() -> LInftySpec {
        let mut s = LInftySpec::new(
            "heisenberg3",
            vec!["e1".into(), "e2".into(), "e3".into()],
            vec![-1, -1, -1],
        )
        .unwrap();
        s.add_bracket(&[0, 1], 2, s_one()).unwrap();
        s
    }

    /// sl2 with basis (e, f, h): [e,f] = h, [h,e] = 2e, [h,f] = -2f.
    pub fn sl2() -> LInftySpec {
        let mut s = LInftySpec::new(
            "sl2",
            vec!["e".into(), "f".into(), "h".into()],
            vec![-1, -1, -1],
        )
        .unwrap();
        s.add_bracket(&[0, 1], 2, s_one()).unwrap();
        s.add_bracket(&[0, 2], 0, s_int(-2)).unwrap();
        s.add_bracket(&[1, 2], 1, s_int(2)).unwrap();
        s
    }

    /// Two-term dg vector space: q1(e1) = e2 with q1(e2) = 0.
    pub fn dgvec() -> LInftySpec {
        let mut s = LInftySpec::new(
            "dgvec",
            vec!["e1".into(), "e2".into()],
            vec![-1, 0],
        )
        .unwrap();
        s.add_bracket(&[0], 1, s_one()).unwrap();
        s
    }

    /// dg Lie algebra on generators u (degree -1) and v (degree 0):
    /// q1(u) = v and q2(u, v) = v.
    pub fn dgla_uv() -> LInftySpec {
        let mut s = LInftySpec::new(
            "dgla_uv",
            vec!["u".into(), "v".into()],
            vec![-1, 0],
        )
        .unwrap();
        s.add_bracket(&[0], 1, s_one()).unwrap();
        s.add_bracket(&[0, 1], 1, s_one()).unwrap();
        s
    }

    /// Pure ternary bracket: q3(e1, e2, e3) = w on three odd generators and
    /// one generator of degree -2.
    pub fn ternary_q3() -> LInftySpec {
        let mut s = LInftySpec::new(
            "ternary_q3",
            vec!["e1".into(), "e2".into(), "e3".into(), "w".into()],
            vec![-1, -1, -1, -2],
        )
        .unwrap();
        s.add_bracket(&[0, 1, 2], 3, s_one()).unwrap();
        s
    }

    /// Pure quaternary bracket: q4(e1, e2, e3, e4) = v, all generators odd.
    pub fn quaternary_q4() -> LInftySpec {
        let mut s = LInftySpec::new(
            "quaternary_q4",
            vec![
                "e1".into(),
                "e2".into(),
                "e3".into(),
                "e4".into(),
                "v".into(),
            ],
            vec![-1, -1, -1, -1, -3],
        )
        .unwrap();
        s.add_bracket(&[0, 1, 2, 3], 4, s_one()).unwrap();
        s
    }

    /// Jacobi violator: [e1, e2] = e3 together with [e1, e3] = e1.
    pub fn jacobi_violator() -> LInftySpec {
        let mut s = LInftySpec::new(
            "jacobi_violator",
            vec!["e1".into(), "e2".into(), "e3".into()],
            vec![-1, -1, -1],
        )
        .unwrap();
        s.add_bracket(&[0, 1], 2, s_one()).unwrap();
        s.add_bracket(&[0, 2], 0, s_one()).unwrap();
        s
    }
}
