//! Normal-ordered differential operators: finite sums of f · ∂-monomials
//! with every function coefficient on the left. Composition re-normalizes
//! via the operator Leibniz rule ∂_j ∘ g = ∂_j(g) + (-1)^{|∂_j||g|} g ∘ ∂_j.

use std::collections::BTreeMap;
use std::fmt;

use crate::chart::Chart;
use crate::error::Result;
use crate::function::FormalFunction;
use crate::grading::sort_word_signed;
use crate::scalar::Scalar;
use crate::tensor::{FrameWord, SymTensorField};
use crate::vector_field::VectorField;

/// Canonical ∂-monomial: sorted ascending, odd partials non-repeating
/// (mixed left partials graded-commute, and an odd partial squares to zero).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DelMonomial(pub Vec<usize>);

impl DelMonomial {
    pub fn identity() -> Self {
        DelMonomial(Vec::new())
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self, chart: &Chart) -> i64 {
        self.0.iter().map(|&j| chart.frame_degree(j)).sum()
    }

    pub fn canonicalize(word: &[usize], chart: &Chart) -> Option<(i8, DelMonomial)> {
        let (sign, sorted) = sort_word_signed(word, |j| chart.is_odd(j))?;
        Some((sign, DelMonomial(sorted)))
    }

    /// Applies the ∂-word to a function, rightmost partial first.
    pub fn apply(&self, f: &FormalFunction) -> FormalFunction {
        let mut out = f.clone();
        for &j in self.0.iter().rev() {
            out = out.partial(j);
        }
        out
    }

    pub fn render(&self, chart: &Chart) -> String {
        if self.0.is_empty() {
            return "1".to_string();
        }
        self.0
            .iter()
            .map(|&j| format!("d/d{}", chart.name(j)))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct DiffOp {
    chart: Chart,
    terms: BTreeMap<DelMonomial, FormalFunction>,
}

impl fmt::Debug for DiffOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

impl DiffOp {
    pub fn zero(chart: &Chart) -> Self {
        DiffOp {
            chart: chart.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn from_fn(f: &FormalFunction) -> Self {
        let mut d = Self::zero(f.chart());
        d.add_term(DelMonomial::identity(), f.clone());
        d
    }

    pub fn one(chart: &Chart) -> Self {
        Self::from_fn(&FormalFunction::one(chart))
    }

    pub fn from_vf(v: &VectorField) -> Self {
        let mut d = Self::zero(v.chart());
        for (j, comp) in v.components().iter().enumerate() {
            d.add_term(DelMonomial(vec![j]), comp.clone());
        }
        d
    }

    pub fn frame(chart: &Chart, j: usize) -> Self {
        let mut d = Self::zero(chart);
        d.add_term(DelMonomial(vec![j]), FormalFunction::one(chart));
        d
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn terms(&self) -> impl Iterator<Item = (&DelMonomial, &FormalFunction)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn order(&self) -> usize {
        self.terms.keys().map(|m| m.order()).max().unwrap_or(0)
    }

    pub fn add_term(&mut self, m: DelMonomial, f: FormalFunction) {
        if f.is_zero() {
            return;
        }
        let f = f.on_chart(&self.chart);
        let entry = self
            .terms
            .entry(m.clone())
            .or_insert_with(|| FormalFunction::zero(&self.chart));
        *entry = entry.add(&f);
        if entry.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn coefficient(&self, m: &DelMonomial) -> FormalFunction {
        self.terms
            .get(m)
            .cloned()
            .unwrap_or_else(|| FormalFunction::zero(&self.chart))
    }

    pub fn add(&self, other: &DiffOp) -> DiffOp {
        let mut out = self.clone();
        for (m, f) in &other.terms {
            out.add_term(m.clone(), f.clone());
        }
        out
    }

    pub fn sub(&self, other: &DiffOp) -> DiffOp {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> DiffOp {
        let mut out = Self::zero(&self.chart);
        for (m, f) in &self.terms {
            out.add_term(m.clone(), f.neg());
        }
        out
    }

    pub fn scale(&self, s: &Scalar) -> DiffOp {
        let mut out = Self::zero(&self.chart);
        for (m, f) in &self.terms {
            out.add_term(m.clone(), f.scale(s));
        }
        out
    }

    /// Left multiplication by a function.
    pub fn scale_fn(&self, g: &FormalFunction) -> Result<DiffOp> {
        let mut out = Self::zero(&self.chart);
        for (m, f) in &self.terms {
            out.add_term(m.clone(), g.multiply(f)?);
        }
        Ok(out)
    }

    /// Operator applied to a function.
    pub fn apply(&self, g: &FormalFunction) -> Result<FormalFunction> {
        self.chart.check_compatible(g.chart())?;
        let mut out = FormalFunction::zero(&self.chart);
        for (m, f) in &self.terms {
            out = out.add(&f.multiply(&m.apply(g))?);
        }
        Ok(out)
    }

    /// Internal degree of a term f·∂^A is |f| + |∂^A|.
    pub fn homogeneous_parts(&self) -> BTreeMap<i64, DiffOp> {
        let mut parts: BTreeMap<i64, DiffOp> = BTreeMap::new();
        for (m, f) in &self.terms {
            let md = m.degree(&self.chart);
            for (fd, piece) in f.homogeneous_parts() {
                parts
                    .entry(md + fd)
                    .or_insert_with(|| Self::zero(&self.chart))
                    .add_term(m.clone(), piece);
            }
        }
        parts
    }

    pub fn is_homogeneous_of(&self, degree: i64) -> bool {
        self.terms
            .iter()
            .all(|(m, f)| f.is_homogeneous_of(degree - m.degree(&self.chart)))
    }

    /// Composition, normal-ordered. For single terms,
    /// (f·∂^A) ∘ (g·∂^B) = f · (∂^A ∘ g) · ∂^B.
    pub fn compose(&self, other: &DiffOp) -> Result<DiffOp> {
        self.chart.check_compatible(&other.chart)?;
        let mut out = Self::zero(&self.chart);
        for (ma, fa) in &self.terms {
            for (mb, gb) in &other.terms {
                let moved = compose_word_with_fn(&self.chart, &ma.0, gb)?;
                for (mid, h) in moved.terms {
                    // f · h · ∂^{mid} ∂^B
                    let coeff = fa.multiply(&h)?;
                    if coeff.is_zero() {
                        continue;
                    }
                    let mut word = mid.0.clone();
                    word.extend_from_slice(&mb.0);
                    if let Some((sign, m)) = DelMonomial::canonicalize(&word, &self.chart) {
                        let coeff = if sign < 0 { coeff.neg() } else { coeff };
                        out.add_term(m, coeff);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Graded commutator with a degree-homogeneous operator Q (typically the
    /// homological field): [[Q, D]] = Q∘D - (-1)^{|Q||D|} D∘Q.
    pub fn lie_derivative(&self, q: &VectorField) -> Result<DiffOp> {
        let mut out = Self::zero(&self.chart);
        for (dq, q_part) in q.homogeneous_parts() {
            let q_op = DiffOp::from_vf(&q_part);
            for (dd, d_part) in self.homogeneous_parts() {
                let first = q_op.compose(&d_part)?;
                let second = d_part.compose(&q_op)?;
                let piece = if (dq * dd) % 2 != 0 {
                    first.add(&second)
                } else {
                    first.sub(&second)
                };
                out = out.add(&piece);
            }
        }
        Ok(out)
    }

    /// Order-n coefficient block as an arity-n symmetric tensor field.
    pub fn symbol(&self, n: usize) -> SymTensorField {
        let mut out = SymTensorField::zero(&self.chart);
        for (m, f) in &self.terms {
            if m.order() == n {
                out.add_term(FrameWord(m.0.clone()), f.clone());
            }
        }
        out
    }

    pub fn on_chart(&self, chart: &Chart) -> DiffOp {
        let mut out = Self::zero(chart);
        for (m, f) in &self.terms {
            out.add_term(m.clone(), f.on_chart(chart));
        }
        out
    }

    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        self.terms
            .iter()
            .map(|(m, f)| format!("({}) {}", f.render(), m.render(&self.chart)))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

/// ∂^A ∘ g as a normal-ordered operator, by the recursive one-step Leibniz
/// rule on the leftmost partial.
fn compose_word_with_fn(chart: &Chart, word: &[usize], g: &FormalFunction) -> Result<DiffOp> {
    if word.is_empty() {
        return Ok(DiffOp::from_fn(&g.on_chart(chart)));
    }
    let j = word[0];
    let rest = compose_word_with_fn(chart, &word[1..], g)?;
    // ∂_j ∘ (h · ∂^B) = ∂_j(h) ∂^B + (-1)^{|∂_j||h|} h ∂_j ∂^B
    let mut out = DiffOp::zero(chart);
    let dj = chart.frame_degree(j);
    for (mb, h) in rest.terms {
        out.add_term(mb.clone(), h.partial(j));
        for (hd, h_part) in h.homogeneous_parts() {
            let mut word = vec![j];
            word.extend_from_slice(&mb.0);
            if let Some((sign, m)) = DelMonomial::canonicalize(&word, chart) {
                let mut piece = h_part;
                if sign < 0 {
                    piece = piece.neg();
                }
                if (dj * hd) % 2 != 0 {
                    piece = piece.neg();
                }
                out.add_term(m, piece);
            }
        }
    }
    Ok(out)
}

/// Evaluates the coproduct of D on a pair (f, g), i.e. D(f·g). The two-sided
/// expansion used by the coalgebra-morphism tests lives on the tensor side.
pub fn do_coproduct_eval(
    d: &DiffOp,
    f: &FormalFunction,
    g: &FormalFunction,
) -> Result<FormalFunction> {
    d.apply(&f.multiply(g)?)
}
