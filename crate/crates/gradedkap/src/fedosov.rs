//! Fedosov-style flattening machinery: forms valued in fiberwise formal
//! vector fields, the Koszul operator and its homotopy, the recursion for
//! the connection form A, and the resulting independent route to the map
//! B(Y; T), used as a cross-implementation oracle for the pbw-based one.

use std::collections::BTreeMap;
use std::fmt;


use crate::chart::Chart;
use crate::connection::Connection;
use crate::error::{Error, Result};
use crate::grading::sort_word_signed;
use crate::scalar::{s_int, s_one, Scalar};
use crate::tensor::{convolution, FrameWord, SymBundleMap, SymTensorField};
use crate::vector_field::VectorField;

/// Canonical wedge word: sorted ascending; a frame direction of even
/// internal degree squares to zero in the exterior slot, one of odd degree
/// may repeat.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WedgeWord(pub Vec<usize>);

impl WedgeWord {
    pub fn empty() -> Self {
        WedgeWord(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self, chart: &Chart) -> i64 {
        self.0.iter().map(|&j| chart.frame_degree(j)).sum()
    }

    /// Sorts with the wedge sign rule: swapping adjacent a, b contributes
    /// -(-1)^{|∂_a||∂_b|}; an even-degree repeat kills the word.
    pub fn canonicalize(word: &[usize], chart: &Chart) -> Option<(i8, WedgeWord)> {
        let mut out = word.to_vec();
        let mut sign = 1i8;
        for i in 1..out.len() {
            let mut j = i;
            while j > 0 && out[j - 1] > out[j] {
                // -(-1)^{d_a d_b}: flips unless both degrees are odd
                if !(chart.is_odd(out[j - 1]) && chart.is_odd(out[j])) {
                    sign = -sign;
                }
                out.swap(j - 1, j);
                j -= 1;
            }
        }
        for k in 1..out.len() {
            if out[k] == out[k - 1] && !chart.is_odd(out[k]) {
                return None;
            }
        }
        Some((sign, WedgeWord(out)))
    }
}

/// A form with values in fiberwise formal vector fields, stored by values
/// on canonical (wedge word; symmetric word) pairs.
#[derive(Clone, PartialEq)]
pub struct TVForm {
    chart: Chart,
    p: usize,
    terms: BTreeMap<(WedgeWord, FrameWord), VectorField>,
}

impl fmt::Debug for TVForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body = self
            .terms
            .iter()
            .map(|((w, s), v)| format!("({:?}; {}) -> {}", w.0, s.render(&self.chart), v.render()))
            .collect::<Vec<_>>()
            .join("; ");
        write!(f, "TVForm[p={}]{{{body}}}", self.p)
    }
}

impl TVForm {
    pub fn zero(chart: &Chart, p: usize) -> Self {
        TVForm {
            chart: chart.clone(),
            p,
            terms: BTreeMap::new(),
        }
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn form_degree(&self) -> usize {
        self.p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|v| v.is_zero())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(WedgeWord, FrameWord), &VectorField)> {
        self.terms.iter()
    }

    pub fn set(&mut self, w: WedgeWord, s: FrameWord, value: VectorField) -> Result<()> {
        if w.len() != self.p {
            return Err(Error::InvalidInput(format!(
                "wedge word length {} in a p = {} form",
                w.len(),
                self.p
            )));
        }
        if value.is_zero() {
            self.terms.remove(&(w, s));
        } else {
            self.terms.insert((w, s), value);
        }
        Ok(())
    }

    pub fn add_value(&mut self, w: WedgeWord, s: FrameWord, value: &VectorField) -> Result<()> {
        let current = self
            .terms
            .get(&(w.clone(), s.clone()))
            .cloned()
            .unwrap_or_else(|| VectorField::zero(&self.chart));
        self.set(w, s, current.add(value))
    }

    pub fn add(&self, other: &TVForm) -> Result<TVForm> {
        if self.p != other.p {
            // zero forms are degree-agnostic
            if self.is_zero() {
                return Ok(other.clone());
            }
            if other.is_zero() {
                return Ok(self.clone());
            }
            return Err(Error::InvalidInput("form degree mismatch".into()));
        }
        let mut out = self.clone();
        for ((w, s), v) in &other.terms {
            out.add_value(w.clone(), s.clone(), v)?;
        }
        Ok(out)
    }

    pub fn neg(&self) -> TVForm {
        TVForm {
            chart: self.chart.clone(),
            p: self.p,
            terms: self.terms.iter().map(|(k, v)| (k.clone(), v.neg())).collect(),
        }
    }

    pub fn scale(&self, c: &Scalar) -> TVForm {
        let mut out = TVForm::zero(&self.chart, self.p);
        for ((w, s), v) in &self.terms {
            let sv = v.scale(c);
            if !sv.is_zero() {
                out.terms.insert((w.clone(), s.clone()), sv);
            }
        }
        out
    }

    /// Drops terms whose symmetric weight exceeds the cap.
    pub fn truncate_sym_weight(&self, cap: usize) -> TVForm {
        let mut out = TVForm::zero(&self.chart, self.p);
        for ((w, s), v) in &self.terms {
            if s.arity() <= cap {
                out.terms.insert((w.clone(), s.clone()), v.clone());
            }
        }
        out
    }

    pub fn max_sym_weight(&self) -> usize {
        self.terms.keys().map(|(_, s)| s.arity()).max().unwrap_or(0)
    }

    /// The sym-weight-n layer.
    pub fn sym_component(&self, n: usize) -> TVForm {
        let mut out = TVForm::zero(&self.chart, self.p);
        for ((w, s), v) in &self.terms {
            if s.arity() == n {
                out.terms.insert((w.clone(), s.clone()), v.clone());
            }
        }
        out
    }

    /// Evaluation with Koszul normalization of both argument words.
    pub fn eval(&self, wedge: &[usize], sym: &[usize]) -> VectorField {
        let Some((ws, w)) = WedgeWord::canonicalize(wedge, &self.chart) else {
            return VectorField::zero(&self.chart);
        };
        let Some((ss, s)) = sort_word_signed(sym, |j| self.chart.is_odd(j)) else {
            return VectorField::zero(&self.chart);
        };
        let v = self
            .terms
            .get(&(w, FrameWord(s)))
            .cloned()
            .unwrap_or_else(|| VectorField::zero(&self.chart));
        if ws * ss < 0 {
            v.neg()
        } else {
            v
        }
    }

    /// Internal degree of a term: |value| - |wedge| - |sym|.
    pub fn term_degree(&self, key: &(WedgeWord, FrameWord)) -> Option<i64> {
        let v = self.terms.get(key)?;
        let dv = v.homogeneous_degree()?;
        Some(dv - key.0.degree(&self.chart) - key.1.degree(&self.chart))
    }

    pub fn is_homogeneous_of(&self, degree: i64) -> bool {
        self.terms.iter().all(|((w, s), v)| {
            v.is_homogeneous_of(degree + w.degree(&self.chart) + s.degree(&self.chart))
        })
    }

    /// R-linear evaluation against a symmetric tensor with function
    /// coefficients; `op_degree` is the internal degree of the form block
    /// plus its wedge arguments.
    fn eval_sym_tensor(&self, wedge: &[usize], t: &SymTensorField, op_degree: i64) -> Result<VectorField> {
        let mut out = VectorField::zero(&self.chart);
        for (s, f) in t.terms() {
            let base = self.eval(wedge, &s.0);
            if base.is_zero() {
                continue;
            }
            for (fd, part) in f.homogeneous_parts() {
                let mut piece = base.scale_fn(&part.on_chart(&self.chart))?;
                if (op_degree * fd) % 2 != 0 {
                    piece = piece.neg();
                }
                out = out.add(&piece);
            }
        }
        Ok(out)
    }
}

/// All canonical wedge words of the given length.
pub fn wedge_words(chart: &Chart, p: usize) -> Vec<WedgeWord> {
    let mut out = Vec::new();
    let mut word = Vec::with_capacity(p);
    fn step(chart: &Chart, p: usize, start: usize, word: &mut Vec<usize>, out: &mut Vec<WedgeWord>) {
        if word.len() == p {
            out.push(WedgeWord(word.clone()));
            return;
        }
        for j in start..chart.dimension() {
            if word.last() == Some(&j) && !chart.is_odd(j) {
                continue;
            }
            word.push(j);
            step(chart, p, j, word, out);
            word.pop();
        }
    }
    step(chart, p, 0, &mut word, &mut out);
    out
}

/// Koszul operator: moves one wedge argument to the symmetric side,
/// (δω)(X_1 ∧ ... ∧ X_{p+1}; Y) = Σ_i ε (-1)^{i+1}
///     ω(X_1 ∧ ... X̂_i ...; X_i ⊙ Y).
pub fn koszul_delta(omega: &TVForm) -> Result<TVForm> {
    let chart = omega.chart();
    let mut support: Vec<(WedgeWord, FrameWord)> = Vec::new();
    for ((w, s), _) in omega.terms() {
        for (pos, &x) in s.0.iter().enumerate() {
            let mut wedge = w.0.clone();
            wedge.push(x);
            let Some((_, cw)) = WedgeWord::canonicalize(&wedge, chart) else {
                continue;
            };
            let mut sym = s.0.clone();
            sym.remove(pos);
            let key = (cw, FrameWord(sym));
            if !support.contains(&key) {
                support.push(key);
            }
        }
    }
    let mut out = TVForm::zero(chart, omega.form_degree() + 1);
    for (w, s) in support {
        let mut value = VectorField::zero(chart);
        for (i, &xi) in w.0.iter().enumerate() {
            let di = chart.frame_degree(xi);
            let tail_deg: i64 = w.0[i + 1..].iter().map(|&a| chart.frame_degree(a)).sum();
            let mut rest = w.0.clone();
            rest.remove(i);
            let mut sym = vec![xi];
            sym.extend_from_slice(&s.0);
            let mut piece = omega.eval(&rest, &sym);
            if (di * tail_deg) % 2 != 0 {
                piece = piece.neg();
            }
            if i % 2 != 0 {
                piece = piece.neg();
            }
            value = value.add(&piece);
        }
        out.add_value(w, s, &value)?;
    }
    Ok(out)
}

/// Homotopy operator: moves one symmetric argument to the wedge side,
/// (hω)(X_1 ∧ ...; Y_1 ⊙ ... ⊙ Y_{q+1}) = 1/(p+q) Σ_j ε
///     ω(Y_j ∧ X_1 ∧ ...; Y_1 ... Ŷ_j ...), and annihilates p = 0.
pub fn homotopy_h(omega: &TVForm) -> Result<TVForm> {
    let chart = omega.chart();
    if omega.form_degree() == 0 {
        return Ok(TVForm::zero(chart, 0));
    }
    let mut support: Vec<(WedgeWord, FrameWord)> = Vec::new();
    for ((w, s), _) in omega.terms() {
        for (pos, &y) in w.0.iter().enumerate() {
            let mut wedge = w.0.clone();
            wedge.remove(pos);
            let mut sym = s.0.clone();
            sym.push(y);
            let Some((_, cs)) = sort_word_signed(&sym, |j| chart.is_odd(j)) else {
                continue;
            };
            let key = (WedgeWord(wedge), FrameWord(cs));
            if !support.contains(&key) {
                support.push(key);
            }
        }
    }
    let mut out = TVForm::zero(chart, omega.form_degree() - 1);
    for (w, s) in support {
        let normalizer = s_one() / s_int((w.len() + s.arity()) as i64);
        let mut value = VectorField::zero(chart);
        let wedge_deg = w.degree(chart);
        for (j, &yj) in s.0.iter().enumerate() {
            let dj = chart.frame_degree(yj);
            let before_deg: i64 = s.0[..j].iter().map(|&a| chart.frame_degree(a)).sum();
            let mut wedge = vec![yj];
            wedge.extend_from_slice(&w.0);
            let mut sym = s.0.clone();
            sym.remove(j);
            let mut piece = omega.eval(&wedge, &sym);
            if (dj * (wedge_deg + before_deg)) % 2 != 0 {
                piece = piece.neg();
            }
            value = value.add(&piece);
        }
        out.add_value(w, s, &value.scale(&normalizer))?;
    }
    Ok(out)
}

/// Covariant exterior derivative on form values, frame brackets vanishing:
/// (d∇ω)(X_1 ∧ ... ∧ X_{p+1}; Y) = Σ_i ε (-1)^{i+1} (∇_{X_i} ω)(...; Y)
/// with the Hom-bundle connection (∇_X F)(Y) = ∇_X(F(Y))
/// - (-1)^{|X||F|} F(∇_X Y).
pub fn d_nabla(conn: &Connection, omega: &TVForm) -> Result<TVForm> {
    let chart = omega.chart();
    conn.chart().check_compatible(chart)?;
    let p = omega.form_degree();
    let mut out = TVForm::zero(chart, p + 1);
    // Γ insertions preserve symmetric weight but move across words, so the
    // output support is every canonical word up to the input's top weight
    let mut sym_support: Vec<FrameWord> = Vec::new();
    for weight in 0..=omega.max_sym_weight() {
        sym_support.extend(SymBundleMap::domain_words(chart, weight));
    }
    // internal-degree blocks of the form
    let mut block_degrees: Vec<i64> = Vec::new();
    for (key, _) in omega.terms() {
        if let Some(d) = omega.term_degree(key) {
            if !block_degrees.contains(&d) {
                block_degrees.push(d);
            }
        }
    }
    for block_deg in block_degrees {
        let omega_block = omega_degree_block(omega, block_deg)?;
        for w in wedge_words(chart, p + 1) {
            for s in &sym_support {
                let mut value = VectorField::zero(chart);
                let mut front_deg = 0i64;
                for (i, &xi) in w.0.iter().enumerate() {
                    let di = chart.frame_degree(xi);
                    // X_i crosses the form and the earlier wedge slots
                    let eps = (di * (block_deg + front_deg)) % 2 != 0;
                    let mut rest = w.0.clone();
                    rest.remove(i);
                    let rest_deg: i64 = rest.iter().map(|&a| chart.frame_degree(a)).sum();
                    // ∇_{X_i}(ω(rest; s))
                    let inner = omega_block.eval(&rest, &s.0);
                    let mut term = conn.nabla_frame(xi, &inner)?;
                    // -(-1)^{|X_i||F|} ω(rest; ∇_{X_i} s), F = ω(rest; -)
                    let nabla_s = conn.nabla_tensor(
                        &VectorField::frame(chart, xi),
                        &SymTensorField::from_word(chart, s),
                    )?;
                    let mut piece =
                        omega_block.eval_sym_tensor(&rest, &nabla_s, block_deg + rest_deg)?;
                    if (di * (block_deg + rest_deg)) % 2 == 0 {
                        piece = piece.neg();
                    }
                    term = term.add(&piece);
                    if eps {
                        term = term.neg();
                    }
                    if i % 2 != 0 {
                        term = term.neg();
                    }
                    value = value.add(&term);
                    front_deg += di;
                }
                out.add_value(w.clone(), s.clone(), &value)?;
            }
        }
    }
    Ok(out)
}

fn omega_degree_block(omega: &TVForm, degree: i64) -> Result<TVForm> {
    let mut out = TVForm::zero(omega.chart(), omega.form_degree());
    for (key, v) in omega.terms() {
        let slot = key.0.degree(omega.chart()) + key.1.degree(omega.chart());
        for (dv, part) in v.homogeneous_parts() {
            if dv - slot == degree && !part.is_zero() {
                out.add_value(key.0.clone(), key.1.clone(), &part)?;
            }
        }
    }
    Ok(out)
}

/// Fiberwise formal vector field: arity-indexed bundle maps.
#[derive(Clone)]
pub struct FiberField {
    chart: Chart,
    maps: BTreeMap<usize, SymBundleMap>,
}

impl FiberField {
    fn zero(chart: &Chart) -> Self {
        FiberField {
            chart: chart.clone(),
            maps: BTreeMap::new(),
        }
    }

    fn add_layer(&mut self, arity: usize, word: &FrameWord, value: &VectorField, degree: i64) -> Result<()> {
        let map = self
            .maps
            .entry(arity)
            .or_insert_with(|| SymBundleMap::zero(&self.chart, arity, degree));
        map.add_value(word, value)
    }

    /// Insertion composition (u • v)(Y) = Σ ± u(v(Y_(1)) ⊙ Y_(2)).
    fn insert(&self, other: &FiberField, s: &FrameWord) -> Result<VectorField> {
        let t = SymTensorField::from_word(&self.chart, s);
        let mut out = VectorField::zero(&self.chart);
        for vmap in other.maps.values() {
            let conv = convolution(vmap, &t)?;
            for umap in self.maps.values() {
                out = out.add(&umap.apply_tensor(&conv)?);
            }
        }
        Ok(out)
    }

    fn degree(&self) -> i64 {
        self.maps.values().next().map(|m| m.degree()).unwrap_or(0)
    }

    /// Graded commutator of insertions.
    fn bracket(&self, other: &FiberField, s: &FrameWord) -> Result<VectorField> {
        let first = self.insert(other, s)?;
        let second = other.insert(self, s)?;
        if (self.degree() * other.degree()) % 2 != 0 {
            Ok(first.add(&second))
        } else {
            Ok(first.sub(&second))
        }
    }
}

/// i_Y of a p = 1 form: the fiber field s -> (-1)^{|A||Y_i|}Y_i · A(∂_i; s).
pub fn contract_form(a: &TVForm, y: &VectorField) -> Result<FiberField> {
    let chart = a.chart();
    if a.form_degree() != 1 {
        return Err(Error::InvalidInput("contraction expects a one-form".into()));
    }
    let mut out = FiberField::zero(chart);
    for ((w, s), _) in a.terms() {
        let i = w.0[0];
        let y_i = y.component(i);
        if y_i.is_zero() {
            continue;
        }
        let base = a.eval(&w.0, &s.0);
        let block = a.term_degree(&(w.clone(), s.clone())).unwrap_or(0);
        for (fd, part) in y_i.homogeneous_parts() {
            let mut piece = base.scale_fn(&part.on_chart(chart))?;
            if (block * fd) % 2 != 0 {
                piece = piece.neg();
            }
            let degree = block + chart.frame_degree(i);
            out.add_layer(s.arity(), s, &piece, degree)?;
        }
    }
    Ok(out)
}

/// The connection form A = Σ_{n>=2} A_n solving the flattening fixed point
/// A = h(R + d∇A + 1/2 [A, A]) layer by layer in symmetric weight.
#[derive(Debug, Clone)]
pub struct FedosovA {
    pub form: TVForm,
    pub weight_cap: usize,
}

/// The curvature as a (p = 2, sym-weight 1) form.
pub fn curvature_form(conn: &Connection) -> Result<TVForm> {
    let chart = conn.chart();
    let r = conn.curvature()?;
    let mut out = TVForm::zero(chart, 2);
    for w in wedge_words(chart, 2) {
        for k in 0..chart.dimension() {
            let v = r.value(w.0[0], w.0[1], k);
            if !v.is_zero() {
                out.add_value(w.clone(), FrameWord(vec![k]), &v)?;
            }
        }
    }
    Ok(out)
}

pub fn a_nabla(conn: &Connection, weight_cap: usize) -> Result<FedosovA> {
    conn.check_torsion_free()?;
    let chart = conn.chart();
    let r_form = curvature_form(conn)?;
    let mut a = TVForm::zero(chart, 1);
    for _ in 0..=(weight_cap + 1) {
        let bracket = form_bracket(&a, &a)?;
        let rhs = r_form
            .add(&d_nabla(conn, &a)?)?
            .add(&bracket.scale(&(s_one() / s_int(2))))?;
        let next = homotopy_h(&rhs)?.truncate_sym_weight(weight_cap);
        if next == a {
            return Ok(FedosovA {
                form: a,
                weight_cap,
            });
        }
        a = next;
    }
    Err(Error::Inconsistency(
        "flattening recursion did not stabilize within the weight cap".into(),
    ))
}

/// Wedge-Lie bracket of two one-forms with fiber-field values.
pub fn form_bracket(a: &TVForm, b: &TVForm) -> Result<TVForm> {
    let chart = a.chart();
    if a.form_degree() != 1 || b.form_degree() != 1 {
        return Err(Error::InvalidInput("bracket expects one-forms".into()));
    }
    let mut out = TVForm::zero(chart, 2);
    // support of output sym words: brackets lower combined weight by one
    let mut sym_support: Vec<FrameWord> = Vec::new();
    let mut collect = |forms: [&TVForm; 2]| {
        for ((_, s1), _) in forms[0].terms() {
            for ((_, s2), _) in forms[1].terms() {
                if s1.arity() + s2.arity() == 0 {
                    continue;
                }
                let mut sym = s1.0.clone();
                sym.extend_from_slice(&s2.0);
                if sym.is_empty() {
                    continue;
                }
                // one slot is consumed by the insertion
                for drop in 0..sym.len() {
                    let mut word = sym.clone();
                    word.remove(drop);
                    if let Some((_, sorted)) = sort_word_signed(&word, |j| chart.is_odd(j)) {
                        let fw = FrameWord(sorted);
                        if !sym_support.contains(&fw) {
                            sym_support.push(fw);
                        }
                    }
                }
            }
        }
    };
    collect([a, b]);
    collect([b, a]);
    for w in wedge_words(chart, 2) {
        let (x, y) = (w.0[0], w.0[1]);
        let dx = chart.frame_degree(x);
        let dy = chart.frame_degree(y);
        for s in &sym_support {
            // [A, B](X ∧ Y) = [A(X), B(Y)] - (-1)^{|X||Y|} [A(Y), B(X)],
            // with fiber degrees carrying the |X|, |Y| contributions
            let ax = contract_form(a, &VectorField::frame(chart, x))?;
            let by = contract_form(b, &VectorField::frame(chart, y))?;
            let mut value = ax.bracket(&by, s)?;
            if x != y {
                let ay = contract_form(a, &VectorField::frame(chart, y))?;
                let bx = contract_form(b, &VectorField::frame(chart, x))?;
                let mut second = ay.bracket(&bx, s)?;
                if (dx * dy) % 2 != 0 {
                    second = second.neg();
                }
                value = value.sub(&second);
            }
            out.add_value(w.clone(), s.clone(), &value)?;
        }
    }
    Ok(out)
}

/// The Fedosov route to B(Y; T): the symmetric product Y ⊙ T corrected by
/// the transpose of the contracted connection form, which acts as the
/// coderivation extension of its layers. Under this engine's pairing the
/// transpose enters with a plus sign on every layer.
pub fn b_via_a(a: &FedosovA, y: &VectorField, t: &SymTensorField) -> Result<SymTensorField> {
    let needed = t.max_arity();
    if a.weight_cap < needed + 1 {
        return Err(Error::InsufficientCap {
            cap: a.weight_cap as u32,
            context: format!("B on arity-{needed} tensors needs the connection form to weight {}", needed + 1),
        });
    }
    let contraction = contract_form(&a.form, y)?;
    let mut out = SymTensorField::from_vf(y).product(t)?;
    for map in contraction.maps.values() {
        out = out.add(&convolution(map, t)?);
    }
    Ok(out)
}
