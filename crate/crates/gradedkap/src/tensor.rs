//! The filtered cocommutative coalgebra of symmetric tensor fields: frame
//! words under the symmetric product, the shuffle comultiplication with
//! primitive generators, the Lie derivative along a vector field, and the
//! coderivation (convolution) extension of arity-indexed bundle maps.

use std::collections::BTreeMap;
use std::fmt;


use crate::chart::Chart;
use crate::error::{Error, Result};
use crate::function::FormalFunction;
use crate::grading::{sort_word_signed, word_splits};
use crate::scalar::Scalar;
use crate::vector_field::VectorField;

/// Canonical frame word ∂_{j_1} ⊙ ... ⊙ ∂_{j_k}: indices sorted ascending,
/// frame directions of odd degree (deg ∂_j = -deg x^j) appearing at most
/// once.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FrameWord(pub Vec<usize>);

impl FrameWord {
    pub fn empty() -> Self {
        FrameWord(Vec::new())
    }

    pub fn single(j: usize) -> Self {
        FrameWord(vec![j])
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    /// Σ deg ∂_j = -Σ deg x^j.
    pub fn degree(&self, chart: &Chart) -> i64 {
        self.0.iter().map(|&j| chart.frame_degree(j)).sum()
    }

    pub fn canonicalize(word: &[usize], chart: &Chart) -> Option<(i8, FrameWord)> {
        // frame parity equals coordinate parity
        let (sign, sorted) = sort_word_signed(word, |j| chart.is_odd(j))?;
        Some((sign, FrameWord(sorted)))
    }

    /// All (left, right) splits with unshuffle Koszul signs.
    pub fn splits(&self, chart: &Chart) -> Vec<(i8, FrameWord, FrameWord)> {
        let degrees: Vec<i64> = self.0.iter().map(|&j| chart.frame_degree(j)).collect();
        word_splits(&self.0, &degrees)
            .into_iter()
            .map(|(s, l, r)| (s, FrameWord(l), FrameWord(r)))
            .collect()
    }

    pub fn render(&self, chart: &Chart) -> String {
        if self.0.is_empty() {
            return "1".to_string();
        }
        self.0
            .iter()
            .map(|&j| format!("d/d{}", chart.name(j)))
            .collect::<Vec<_>>()
            .join("esc")
            .replace("esc", " ⊙ ")
    }
}

/// Element of Γ(S(T)): per canonical frame word, a function coefficient.
/// The arity-0 component is the function part.
#[derive(Clone, PartialEq, Eq)]
pub struct SymTensorField {
    chart: Chart,
    terms: BTreeMap<FrameWord, FormalFunction>,
}

impl fmt::Debug for SymTensorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

impl SymTensorField {
    pub fn zero(chart: &Chart) -> Self {
        SymTensorField {
            chart: chart.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn unit(chart: &Chart) -> Self {
        Self::from_fn(&FormalFunction::one(chart))
    }

    pub fn from_fn(f: &FormalFunction) -> Self {
        let mut t = Self::zero(f.chart());
        t.add_term(FrameWord::empty(), f.clone());
        t
    }

    pub fn from_vf(v: &VectorField) -> Self {
        let mut t = Self::zero(v.chart());
        for (j, comp) in v.components().iter().enumerate() {
            t.add_term(FrameWord::single(j), comp.clone());
        }
        t
    }

    pub fn from_word(chart: &Chart, word: &FrameWord) -> Self {
        let mut t = Self::zero(chart);
        t.add_term(word.clone(), FormalFunction::one(chart));
        t
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn terms(&self) -> impl Iterator<Item = (&FrameWord, &FormalFunction)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, w: FrameWord, f: FormalFunction) {
        if f.is_zero() {
            return;
        }
        let f = f.on_chart(&self.chart);
        let entry = self
            .terms
            .entry(w.clone())
            .or_insert_with(|| FormalFunction::zero(&self.chart));
        *entry = entry.add(&f);
        if entry.is_zero() {
            self.terms.remove(&w);
        }
    }

    pub fn coefficient(&self, w: &FrameWord) -> FormalFunction {
        self.terms
            .get(w)
            .cloned()
            .unwrap_or_else(|| FormalFunction::zero(&self.chart))
    }

    pub fn add(&self, other: &SymTensorField) -> SymTensorField {
        let mut out = self.clone();
        for (w, f) in &other.terms {
            out.add_term(w.clone(), f.clone());
        }
        out
    }

    pub fn sub(&self, other: &SymTensorField) -> SymTensorField {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> SymTensorField {
        let mut out = Self::zero(&self.chart);
        for (w, f) in &self.terms {
            out.add_term(w.clone(), f.neg());
        }
        out
    }

    pub fn scale(&self, s: &Scalar) -> SymTensorField {
        let mut out = Self::zero(&self.chart);
        for (w, f) in &self.terms {
            out.add_term(w.clone(), f.scale(s));
        }
        out
    }

    /// Left multiplication by a function (no sign).
    pub fn scale_fn(&self, g: &FormalFunction) -> Result<SymTensorField> {
        let mut out = Self::zero(&self.chart);
        for (w, f) in &self.terms {
            out.add_term(w.clone(), g.multiply(f)?);
        }
        Ok(out)
    }

    pub fn max_arity(&self) -> usize {
        self.terms.keys().map(|w| w.arity()).max().unwrap_or(0)
    }

    pub fn arity_component(&self, k: usize) -> SymTensorField {
        let mut out = Self::zero(&self.chart);
        for (w, f) in &self.terms {
            if w.arity() == k {
                out.add_term(w.clone(), f.clone());
            }
        }
        out
    }

    /// Counit: the arity-0 component.
    pub fn counit(&self) -> FormalFunction {
        self.coefficient(&FrameWord::empty())
    }

    /// Arity-1 component as a vector field.
    pub fn arity_one_vf(&self) -> VectorField {
        let mut components = vec![FormalFunction::zero(&self.chart); self.chart.dimension()];
        for (w, f) in &self.terms {
            if w.arity() == 1 {
                components[w.0[0]] = components[w.0[0]].add(f);
            }
        }
        VectorField::from_components(&self.chart, components).expect("components match chart")
    }

    /// Internal degree of a term f·W is |f| + |W|.
    pub fn homogeneous_parts(&self) -> BTreeMap<i64, SymTensorField> {
        let mut parts: BTreeMap<i64, SymTensorField> = BTreeMap::new();
        for (w, f) in &self.terms {
            let wd = w.degree(&self.chart);
            for (fd, piece) in f.homogeneous_parts() {
                parts
                    .entry(wd + fd)
                    .or_insert_with(|| Self::zero(&self.chart))
                    .add_term(w.clone(), piece);
            }
        }
        parts
    }

    pub fn is_homogeneous_of(&self, degree: i64) -> bool {
        self.terms.iter().all(|(w, f)| {
            f.is_homogeneous_of(degree - w.degree(&self.chart))
        })
    }

    /// Symmetric product. Signs: the coefficient of the right factor moves
    /// left through the left factor's frame word, then the concatenated word
    /// is canonicalized.
    pub fn product(&self, other: &SymTensorField) -> Result<SymTensorField> {
        self.chart.check_compatible(&other.chart)?;
        let mut out = Self::zero(&self.chart);
        for (wa, fa) in &self.terms {
            let wa_deg = wa.degree(&self.chart);
            for (wb, fb) in &other.terms {
                for (fb_deg, fb_part) in fb.homogeneous_parts() {
                    let coeff = fa.multiply(&fb_part)?;
                    if coeff.is_zero() {
                        continue;
                    }
                    let mut word = wa.0.clone();
                    word.extend_from_slice(&wb.0);
                    let Some((sign, w)) = FrameWord::canonicalize(&word, &self.chart) else {
                        continue;
                    };
                    let mut total = sign;
                    if (fb_deg * wa_deg) % 2 != 0 {
                        total = -total;
                    }
                    let coeff = if total < 0 { coeff.neg() } else { coeff };
                    out.add_term(w, coeff);
                }
            }
        }
        Ok(out)
    }

    /// Lie derivative along a homogeneous vector field: the derivation
    /// action on the coefficient at arity 0, the commutator at arity 1,
    /// extended as a degree-|Q| derivation of the symmetric product.
    pub fn lie_derivative(&self, q: &VectorField) -> Result<SymTensorField> {
        self.chart.check_compatible(q.chart())?;
        let mut out = Self::zero(&self.chart);
        for (dq, q_part) in q.homogeneous_parts() {
            let bracket_frames: Vec<SymTensorField> = (0..self.chart.dimension())
                .map(|j| {
                    let frame = VectorField::frame(&self.chart, j);
                    Ok(SymTensorField::from_vf(&q_part.commutator(&frame)?))
                })
                .collect::<Result<_>>()?;
            for (w, f) in &self.terms {
                // coefficient part: Q(f) · W
                let qf = q_part.apply(f)?;
                let mut piece = Self::zero(&self.chart);
                piece.add_term(w.clone(), qf);
                out = out.add(&piece);
                // word part: f · Σ_m ± prefix ⊙ [Q, ∂_{j_m}] ⊙ suffix
                for (fd, f_part) in f.homogeneous_parts() {
                    let coeff_sign = (dq * fd) % 2 != 0;
                    let mut prefix_deg = 0i64;
                    for (m, &jm) in w.0.iter().enumerate() {
                        let mut term = SymTensorField::from_word(
                            &self.chart,
                            &FrameWord(w.0[..m].to_vec()),
                        );
                        term = term.product(&bracket_frames[jm])?;
                        term = term.product(&SymTensorField::from_word(
                            &self.chart,
                            &FrameWord(w.0[m + 1..].to_vec()),
                        ))?;
                        let mut sign = (dq * prefix_deg) % 2 != 0;
                        if coeff_sign {
                            sign = !sign;
                        }
                        let mut term = term.scale_fn(&f_part)?;
                        if sign {
                            term = term.neg();
                        }
                        out = out.add(&term);
                        prefix_deg += self.chart.frame_degree(jm);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn on_chart(&self, chart: &Chart) -> SymTensorField {
        let mut out = Self::zero(chart);
        for (w, f) in &self.terms {
            out.add_term(w.clone(), f.on_chart(chart));
        }
        out
    }

    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        self.terms
            .iter()
            .map(|(w, f)| format!("({}) {}", f.render(), w.render(&self.chart)))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

/// Element of Γ(S(T)) ⊗_R Γ(S(T)) in left-reduced normal form: function
/// coefficients live on the left tensor factor.
#[derive(Clone, PartialEq, Eq)]
pub struct TensorPairSum {
    chart: Chart,
    terms: BTreeMap<(FrameWord, FrameWord), FormalFunction>,
}

impl fmt::Debug for TensorPairSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body = self
            .terms
            .iter()
            .map(|((a, b), c)| {
                format!(
                    "({}) {} (x) {}",
                    c.render(),
                    a.render(&self.chart),
                    b.render(&self.chart)
                )
            })
            .collect::<Vec<_>>()
            .join(" + ");
        write!(f, "{}", if body.is_empty() { "0".into() } else { body })
    }
}

impl TensorPairSum {
    pub fn zero(chart: &Chart) -> Self {
        TensorPairSum {
            chart: chart.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn add_term(&mut self, left: FrameWord, right: FrameWord, f: FormalFunction) {
        if f.is_zero() {
            return;
        }
        let key = (left, right);
        let entry = self
            .terms
            .entry(key.clone())
            .or_insert_with(|| FormalFunction::zero(&self.chart));
        *entry = entry.add(&f);
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(FrameWord, FrameWord), &FormalFunction)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &TensorPairSum) -> TensorPairSum {
        let mut out = self.clone();
        for ((a, b), f) in &other.terms {
            out.add_term(a.clone(), b.clone(), f.clone());
        }
        out
    }

    pub fn sub(&self, other: &TensorPairSum) -> TensorPairSum {
        let mut out = self.clone();
        for ((a, b), f) in &other.terms {
            out.add_term(a.clone(), b.clone(), f.neg());
        }
        out
    }

    /// Koszul twist τ(a ⊗ b) = (-1)^{|a||b|} b ⊗ a; in left-reduced form the
    /// coefficient crosses both words and the net sign is word-degree only.
    pub fn twist(&self) -> TensorPairSum {
        let mut out = Self::zero(&self.chart);
        for ((a, b), f) in &self.terms {
            let sign = (a.degree(&self.chart) * b.degree(&self.chart)) % 2 != 0;
            let f = if sign { f.neg() } else { f.clone() };
            out.add_term(b.clone(), a.clone(), f);
        }
        out
    }

    /// (ε ⊗ id): keeps terms whose left word is empty.
    pub fn counit_left(&self) -> SymTensorField {
        let mut out = SymTensorField::zero(&self.chart);
        for ((a, b), f) in &self.terms {
            if a.arity() == 0 {
                out.add_term(b.clone(), f.clone());
            }
        }
        out
    }

    /// (id ⊗ ε): keeps terms whose right word is empty.
    pub fn counit_right(&self) -> SymTensorField {
        let mut out = SymTensorField::zero(&self.chart);
        for ((a, b), f) in &self.terms {
            if b.arity() == 0 {
                out.add_term(a.clone(), f.clone());
            }
        }
        out
    }

    /// (Δ ⊗ id), producing left-reduced triples.
    pub fn comultiply_left(&self) -> TensorTripleSum {
        let mut out = TensorTripleSum::zero(&self.chart);
        for ((a, b), f) in &self.terms {
            for (sign, a1, a2) in a.splits(&self.chart) {
                let piece = if sign < 0 { f.neg() } else { f.clone() };
                out.add_term(a1, a2, b.clone(), piece);
            }
        }
        out
    }

    /// (id ⊗ Δ).
    pub fn comultiply_right(&self) -> TensorTripleSum {
        let mut out = TensorTripleSum::zero(&self.chart);
        for ((a, b), f) in &self.terms {
            for (sign, b1, b2) in b.splits(&self.chart) {
                let piece = if sign < 0 { f.neg() } else { f.clone() };
                out.add_term(a.clone(), b1, b2, piece);
            }
        }
        out
    }

    /// (L_Q ⊗ id).
    pub fn lie_left(&self, q: &VectorField) -> Result<TensorPairSum> {
        let mut out = Self::zero(&self.chart);
        for ((a, b), f) in &self.terms {
            let mut fa = SymTensorField::zero(&self.chart);
            fa.add_term(a.clone(), f.clone());
            for (w, g) in fa.lie_derivative(q)?.terms() {
                out.add_term(w.clone(), b.clone(), g.clone());
            }
        }
        Ok(out)
    }

    /// (id ⊗ L_Q) with the Koszul sign (-1)^{|Q| |f a|}, re-reducing the
    /// right factor's new coefficients to the left.
    pub fn lie_right(&self, q: &VectorField) -> Result<TensorPairSum> {
        let mut out = Self::zero(&self.chart);
        for (dq, q_part) in q.homogeneous_parts() {
            for ((a, b), f) in &self.terms {
                let a_deg = a.degree(&self.chart);
                let lb = SymTensorField::from_word(&self.chart, b).lie_derivative(&q_part)?;
                for (fd, f_part) in f.homogeneous_parts() {
                    let left_deg = fd + a_deg;
                    for (w, g) in lb.terms() {
                        for (gd, g_part) in g.homogeneous_parts() {
                            // (-1)^{|Q||fa|} for moving L_Q past the left
                            // factor, then (-1)^{|g||a|} to carry the new
                            // coefficient g back across the left word
                            let mut sign = (dq * left_deg) % 2 != 0;
                            if (gd * a_deg) % 2 != 0 {
                                sign = !sign;
                            }
                            let mut piece = f_part.multiply(&g_part)?;
                            if sign {
                                piece = piece.neg();
                            }
                            out.add_term(a.clone(), w.clone(), piece);
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Triple tensors in left-reduced form; only needed to state
/// coassociativity.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TensorTripleSum {
    chart: Chart,
    terms: BTreeMap<(FrameWord, FrameWord, FrameWord), FormalFunction>,
}

impl TensorTripleSum {
    pub fn zero(chart: &Chart) -> Self {
        TensorTripleSum {
            chart: chart.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn add_term(&mut self, a: FrameWord, b: FrameWord, c: FrameWord, f: FormalFunction) {
        if f.is_zero() {
            return;
        }
        let key = (a, b, c);
        let entry = self
            .terms
            .entry(key.clone())
            .or_insert_with(|| FormalFunction::zero(&self.chart));
        *entry = entry.add(&f);
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Shuffle comultiplication with primitive generators; R-linear, so the
/// function coefficient stays on the left factor.
pub fn st_comultiply(t: &SymTensorField) -> TensorPairSum {
    let mut out = TensorPairSum::zero(t.chart());
    for (w, f) in t.terms() {
        for (sign, left, right) in w.splits(t.chart()) {
            let piece = if sign < 0 { f.neg() } else { f.clone() };
            out.add_term(left, right, piece);
        }
    }
    out
}

/// An R-linear bundle map Γ(S^k T) → Γ(T) of fixed arity and homogeneous
/// internal degree, stored by frame values. Values on unsorted words follow
/// by Koszul normalization, so the stored map is graded-symmetric by
/// construction.
#[derive(Clone, PartialEq, Eq)]
pub struct SymBundleMap {
    chart: Chart,
    arity: usize,
    degree: i64,
    entries: BTreeMap<FrameWord, VectorField>,
}

impl fmt::Debug for SymBundleMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body = self
            .entries
            .iter()
            .map(|(w, v)| format!("{} -> {}", w.render(&self.chart), v.render()))
            .collect::<Vec<_>>()
            .join("; ");
        write!(f, "SymBundleMap[{}]{{{}}}", self.arity, body)
    }
}

impl SymBundleMap {
    pub fn zero(chart: &Chart, arity: usize, degree: i64) -> Self {
        SymBundleMap {
            chart: chart.clone(),
            arity,
            degree,
            entries: BTreeMap::new(),
        }
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn degree(&self) -> i64 {
        self.degree
    }

    pub fn set(&mut self, word: FrameWord, value: VectorField) -> Result<()> {
        if word.arity() != self.arity {
            return Err(Error::InvalidInput(format!(
                "word arity {} does not match map arity {}",
                word.arity(),
                self.arity
            )));
        }
        if value.is_zero() {
            self.entries.remove(&word);
        } else {
            self.entries.insert(word, value);
        }
        Ok(())
    }

    pub fn add_value(&mut self, word: &FrameWord, value: &VectorField) -> Result<()> {
        let current = self.eval_word_canonical(word);
        self.set(word.clone(), current.add(value))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&FrameWord, &VectorField)> {
        self.entries.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.values().all(|v| v.is_zero())
    }

    fn eval_word_canonical(&self, word: &FrameWord) -> VectorField {
        self.entries
            .get(word)
            .cloned()
            .unwrap_or_else(|| VectorField::zero(&self.chart))
    }

    /// Value on an arbitrary index word.
    pub fn eval_word(&self, word: &[usize]) -> VectorField {
        match FrameWord::canonicalize(word, &self.chart) {
            None => VectorField::zero(&self.chart),
            Some((sign, w)) => {
                let v = self.eval_word_canonical(&w);
                if sign < 0 {
                    v.neg()
                } else {
                    v
                }
            }
        }
    }

    /// R-linear application to the arity-k component of a tensor:
    /// F(f·W) = (-1)^{|F||f|} f · F(W).
    pub fn apply_tensor(&self, t: &SymTensorField) -> Result<VectorField> {
        self.chart.check_compatible(t.chart())?;
        let mut out = VectorField::zero(&self.chart);
        for (w, f) in t.terms() {
            if w.arity() != self.arity {
                continue;
            }
            let value = self.eval_word_canonical(w);
            if value.is_zero() {
                continue;
            }
            for (fd, f_part) in f.homogeneous_parts() {
                let mut piece = value.scale_fn(&f_part)?;
                if (self.degree * fd) % 2 != 0 {
                    piece = piece.neg();
                }
                out = out.add(&piece);
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &SymBundleMap) -> Result<SymBundleMap> {
        if self.arity != other.arity {
            return Err(Error::InvalidInput("bundle map arity mismatch".into()));
        }
        let mut out = self.clone();
        for (w, v) in &other.entries {
            out.add_value(w, v)?;
        }
        Ok(out)
    }

    pub fn neg(&self) -> SymBundleMap {
        let mut out = SymBundleMap::zero(&self.chart, self.arity, self.degree);
        for (w, v) in &self.entries {
            out.entries.insert(w.clone(), v.neg());
        }
        out
    }

    pub fn scale(&self, s: &Scalar) -> SymBundleMap {
        let mut out = SymBundleMap::zero(&self.chart, self.arity, self.degree);
        for (w, v) in &self.entries {
            let scaled = v.scale(s);
            if !scaled.is_zero() {
                out.entries.insert(w.clone(), scaled);
            }
        }
        out
    }

    /// Canonical frame words of the map's arity over the chart (the domain
    /// basis), in lexicographic order.
    pub fn domain_words(chart: &Chart, arity: usize) -> Vec<FrameWord> {
        let mut out = Vec::new();
        let mut word = Vec::with_capacity(arity);
        fn step(chart: &Chart, arity: usize, start: usize, word: &mut Vec<usize>, out: &mut Vec<FrameWord>) {
            if word.len() == arity {
                out.push(FrameWord(word.clone()));
                return;
            }
            for j in start..chart.dimension() {
                if word.last() == Some(&j) && chart.is_odd(j) {
                    continue;
                }
                word.push(j);
                step(chart, arity, j, word, out);
                word.pop();
            }
        }
        step(chart, arity, 0, &mut word, &mut out);
        out
    }
}

/// Convolution-style coderivation extension: (F̄_k ⋆ id)(T) =
/// Σ ± F_k(T_(1)) ⊙ T_(2) over the shuffle coproduct, where F̄_k kills every
/// left factor whose arity differs from k.
pub fn convolution(f: &SymBundleMap, t: &SymTensorField) -> Result<SymTensorField> {
    f.chart().check_compatible(t.chart())?;
    let mut out = SymTensorField::zero(t.chart());
    for ((left, right), coeff) in st_comultiply(t).terms() {
        if left.arity() != f.arity() {
            continue;
        }
        let value = f.eval_word(&left.0);
        if value.is_zero() {
            continue;
        }
        for (cd, c_part) in coeff.homogeneous_parts() {
            let mut piece = SymTensorField::from_vf(&value);
            piece = piece.product(&SymTensorField::from_word(t.chart(), right))?;
            let mut piece = piece.scale_fn(&c_part)?;
            if (f.degree() * cd) % 2 != 0 {
                piece = piece.neg();
            }
            out = out.add(&piece);
        }
    }
    Ok(out)
}

/// Σ_k (F̄_k ⋆ id) for an arity-indexed family.
pub fn convolution_family(maps: &[&SymBundleMap], t: &SymTensorField) -> Result<SymTensorField> {
    let mut out = SymTensorField::zero(t.chart());
    for f in maps {
        out = out.add(&convolution(f, t)?);
    }
    Ok(out)
}
