//! The function algebra of the chart: weight-truncated graded-commutative
//! polynomials over the rationals.
//!
//! Partial derivatives act from the left: ∂_j(x^i) = δ_ij and
//! ∂_j(fg) = ∂_j(f) g + (-1)^{|∂_j||f|} f ∂_j(g) with deg ∂_j = -deg x^j.

use std::collections::BTreeMap;
use std::fmt;

use num::Zero;

use crate::chart::Chart;
use crate::error::Result;
use crate::grading::sort_word_signed;
use crate::scalar::{display_scalar, s_one, Scalar};

/// Canonical monomial: coordinate indices sorted ascending, odd coordinates
/// appearing at most once.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(pub Vec<usize>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn weight(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self, chart: &Chart) -> i64 {
        self.0.iter().map(|&i| chart.coordinate_degree(i)).sum()
    }

    /// Canonicalizes an arbitrary index word; `None` means the word is zero
    /// (an odd coordinate repeats).
    pub fn canonicalize(word: &[usize], chart: &Chart) -> Option<(i8, Monomial)> {
        let (sign, sorted) = sort_word_signed(word, |i| chart.is_odd(i))?;
        Some((sign, Monomial(sorted)))
    }

    pub fn render(&self, chart: &Chart) -> String {
        if self.0.is_empty() {
            return "1".to_string();
        }
        self.0
            .iter()
            .map(|&i| chart.name(i).to_string())
            .collect::<Vec<_>>()
            .join("*")
    }
}

/// A finite sum of canonical monomials with nonzero rational coefficients.
/// Zero is the empty sum.
#[derive(Clone, PartialEq, Eq)]
pub struct FormalFunction {
    chart: Chart,
    terms: BTreeMap<Monomial, Scalar>,
}

impl fmt::Debug for FormalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

impl FormalFunction {
    pub fn zero(chart: &Chart) -> Self {
        FormalFunction {
            chart: chart.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(chart: &Chart, c: Scalar) -> Self {
        let mut f = Self::zero(chart);
        f.add_term(Monomial::one(), c);
        f
    }

    pub fn one(chart: &Chart) -> Self {
        Self::constant(chart, s_one())
    }

    /// The coordinate function x^i.
    pub fn coordinate(chart: &Chart, i: usize) -> Self {
        let mut f = Self::zero(chart);
        f.add_term(Monomial(vec![i]), s_one());
        f
    }

    /// Builds a function from a raw (index word, coefficient) list,
    /// canonicalizing each word.
    pub fn from_words(chart: &Chart, words: &[(Vec<usize>, Scalar)]) -> Self {
        let mut f = Self::zero(chart);
        for (word, c) in words {
            if let Some((sign, m)) = Monomial::canonicalize(word, chart) {
                let coeff = if sign < 0 { -c.clone() } else { c.clone() };
                f.add_term(m, coeff);
            }
        }
        f
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, m: &Monomial) -> Scalar {
        self.terms.get(m).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds a canonical-monomial term, enforcing truncation and dropping
    /// zero coefficients.
    pub fn add_term(&mut self, m: Monomial, c: Scalar) {
        if c.is_zero() {
            return;
        }
        if let Some(cap) = self.chart.truncation() {
            if m.weight() as u32 > cap {
                return;
            }
        }
        let entry = self.terms.entry(m.clone()).or_insert_with(Scalar::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn add(&self, other: &FormalFunction) -> FormalFunction {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &FormalFunction) -> FormalFunction {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn neg(&self) -> FormalFunction {
        let mut out = Self::zero(&self.chart);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn scale(&self, s: &Scalar) -> FormalFunction {
        let mut out = Self::zero(&self.chart);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.clone() * s);
        }
        out
    }

    /// Graded-commutative product, canonicalized and truncated.
    pub fn multiply(&self, other: &FormalFunction) -> Result<FormalFunction> {
        self.chart.check_compatible(&other.chart)?;
        let mut out = Self::zero(&self.chart);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let mut word = ma.0.clone();
                word.extend_from_slice(&mb.0);
                if let Some((sign, m)) = Monomial::canonicalize(&word, &self.chart) {
                    let mut c = ca.clone() * cb;
                    if sign < 0 {
                        c = -c;
                    }
                    out.add_term(m, c);
                }
            }
        }
        Ok(out)
    }

    /// Left partial derivative ∂_j.
    pub fn partial(&self, j: usize) -> FormalFunction {
        let mut out = Self::zero(&self.chart);
        for (m, c) in &self.terms {
            let mut passed_parity = false;
            for (pos, &idx) in m.0.iter().enumerate() {
                if idx == j {
                    let mut rest = m.0.clone();
                    rest.remove(pos);
                    let coeff = if self.chart.is_odd(j) && passed_parity {
                        -c.clone()
                    } else {
                        c.clone()
                    };
                    out.add_term(Monomial(rest), coeff);
                }
                if self.chart.is_odd(idx) {
                    passed_parity = !passed_parity;
                }
            }
        }
        out
    }

    /// Decomposition into homogeneous internal-degree components.
    pub fn homogeneous_parts(&self) -> BTreeMap<i64, FormalFunction> {
        let mut parts: BTreeMap<i64, FormalFunction> = BTreeMap::new();
        for (m, c) in &self.terms {
            let d = m.degree(&self.chart);
            parts
                .entry(d)
                .or_insert_with(|| Self::zero(&self.chart))
                .add_term(m.clone(), c.clone());
        }
        parts
    }

    /// Internal degree when homogeneous. Zero is homogeneous of every
    /// degree; `None` marks a genuinely mixed function.
    pub fn homogeneous_degree(&self) -> Option<i64> {
        let mut deg = None;
        for m in self.terms.keys() {
            let d = m.degree(&self.chart);
            match deg {
                None => deg = Some(d),
                Some(existing) if existing != d => return None,
                _ => {}
            }
        }
        deg
    }

    pub fn is_homogeneous_of(&self, degree: i64) -> bool {
        self.terms
            .iter()
            .all(|(m, _)| m.degree(&self.chart) == degree)
    }

    pub fn max_weight(&self) -> usize {
        self.terms.keys().map(|m| m.weight()).max().unwrap_or(0)
    }

    /// Re-hosts the function on a compatible chart (used to lift values into
    /// exact arithmetic and to re-truncate results).
    pub fn on_chart(&self, chart: &Chart) -> FormalFunction {
        let mut out = Self::zero(chart);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut pieces = Vec::new();
        for (m, c) in &self.terms {
            let coeff = display_scalar(c);
            let piece = if m.0.is_empty() {
                coeff
            } else if coeff == "1" {
                m.render(&self.chart)
            } else if coeff == "-1" {
                format!("-{}", m.render(&self.chart))
            } else {
                format!("{}*{}", coeff, m.render(&self.chart))
            };
            pieces.push(piece);
        }
        let mut out = String::new();
        for (i, p) in pieces.iter().enumerate() {
            if i == 0 {
                out.push_str(p);
            } else if let Some(stripped) = p.strip_prefix('-') {
                out.push_str(" - ");
                out.push_str(stripped);
            } else {
                out.push_str(" + ");
                out.push_str(p);
            }
        }
        out
    }
}
