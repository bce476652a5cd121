//! Vector fields as graded derivations of the function algebra.
//!
//! A field X = Σ_j f_j ∂_j acts on functions by X(g) = Σ_j f_j · ∂_j(g);
//! the component f_j is recovered as X(x^j), so the graded commutator of
//! two derivations is computed componentwise as [X,Y](x^k).

use std::fmt;

use crate::chart::Chart;
use crate::error::{Error, Result};
use crate::function::FormalFunction;
use crate::scalar::Scalar;

#[derive(Clone, PartialEq, Eq)]
pub struct VectorField {
    chart: Chart,
    components: Vec<FormalFunction>,
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

impl VectorField {
    pub fn zero(chart: &Chart) -> Self {
        VectorField {
            chart: chart.clone(),
            components: (0..chart.dimension())
                .map(|_| FormalFunction::zero(chart))
                .collect(),
        }
    }

    /// The frame field ∂/∂x^j.
    pub fn frame(chart: &Chart, j: usize) -> Self {
        let mut v = Self::zero(chart);
        v.components[j] = FormalFunction::one(chart);
        v
    }

    pub fn from_components(chart: &Chart, components: Vec<FormalFunction>) -> Result<Self> {
        if components.len() != chart.dimension() {
            return Err(Error::InvalidInput(format!(
                "{} components for a dimension-{} chart",
                components.len(),
                chart.dimension()
            )));
        }
        for c in &components {
            chart.check_compatible(c.chart())?;
        }
        let components = components.iter().map(|c| c.on_chart(chart)).collect();
        Ok(VectorField {
            chart: chart.clone(),
            components,
        })
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn component(&self, j: usize) -> &FormalFunction {
        &self.components[j]
    }

    pub fn components(&self) -> &[FormalFunction] {
        &self.components
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| c.is_zero())
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.add(b))
            .collect();
        VectorField {
            chart: self.chart.clone(),
            components,
        }
    }

    pub fn sub(&self, other: &VectorField) -> VectorField {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> VectorField {
        VectorField {
            chart: self.chart.clone(),
            components: self.components.iter().map(|c| c.neg()).collect(),
        }
    }

    pub fn scale(&self, s: &Scalar) -> VectorField {
        VectorField {
            chart: self.chart.clone(),
            components: self.components.iter().map(|c| c.scale(s)).collect(),
        }
    }

    /// Left module action f·X (no sign; functions multiply components).
    pub fn scale_fn(&self, f: &FormalFunction) -> Result<VectorField> {
        let components = self
            .components
            .iter()
            .map(|c| f.multiply(c))
            .collect::<Result<Vec<_>>>()?;
        Ok(VectorField {
            chart: self.chart.clone(),
            components,
        })
    }

    /// Derivation action on a function.
    pub fn apply(&self, g: &FormalFunction) -> Result<FormalFunction> {
        self.chart.check_compatible(g.chart())?;
        let mut out = FormalFunction::zero(&self.chart);
        for (j, f_j) in self.components.iter().enumerate() {
            if f_j.is_zero() {
                continue;
            }
            out = out.add(&f_j.multiply(&g.partial(j))?);
        }
        Ok(out)
    }

    /// Internal degree when homogeneous: X has degree m iff each component
    /// f_j is homogeneous of degree m + deg x^j.
    pub fn homogeneous_degree(&self) -> Option<i64> {
        let mut deg = None;
        for (j, f_j) in self.components.iter().enumerate() {
            if f_j.is_zero() {
                continue;
            }
            let dj = f_j.homogeneous_degree()?;
            let field_deg = dj - self.chart.coordinate_degree(j);
            match deg {
                None => deg = Some(field_deg),
                Some(existing) if existing != field_deg => return None,
                _ => {}
            }
        }
        deg
    }

    pub fn is_homogeneous_of(&self, degree: i64) -> bool {
        self.components.iter().enumerate().all(|(j, f_j)| {
            f_j.is_homogeneous_of(degree + self.chart.coordinate_degree(j))
        })
    }

    /// Splits into homogeneous summands by field degree.
    pub fn homogeneous_parts(&self) -> Vec<(i64, VectorField)> {
        use std::collections::BTreeMap;
        let mut parts: BTreeMap<i64, VectorField> = BTreeMap::new();
        for (j, f_j) in self.components.iter().enumerate() {
            for (d, part) in f_j.homogeneous_parts() {
                let field_deg = d - self.chart.coordinate_degree(j);
                let entry = parts
                    .entry(field_deg)
                    .or_insert_with(|| VectorField::zero(&self.chart));
                entry.components[j] = entry.components[j].add(&part);
            }
        }
        parts.into_iter().collect()
    }

    /// Graded commutator [X,Y] = X∘Y - (-1)^{|X||Y|} Y∘X, computed on
    /// homogeneous parts.
    pub fn commutator(&self, other: &VectorField) -> Result<VectorField> {
        self.chart.check_compatible(&other.chart)?;
        let mut out = Self::zero(&self.chart);
        for (dx, x) in self.homogeneous_parts() {
            for (dy, y) in other.homogeneous_parts() {
                let mut components = Vec::with_capacity(self.chart.dimension());
                for k in 0..self.chart.dimension() {
                    let first = x.apply(&y.components[k])?;
                    let second = y.apply(&x.components[k])?;
                    let term = if (dx * dy) % 2 != 0 {
                        first.add(&second)
                    } else {
                        first.sub(&second)
                    };
                    components.push(term);
                }
                let part = VectorField {
                    chart: self.chart.clone(),
                    components,
                };
                out = out.add(&part);
            }
        }
        Ok(out)
    }

    pub fn on_chart(&self, chart: &Chart) -> VectorField {
        VectorField {
            chart: chart.clone(),
            components: self.components.iter().map(|c| c.on_chart(chart)).collect(),
        }
    }

    pub fn render(&self) -> String {
        let mut pieces = Vec::new();
        for (j, f_j) in self.components.iter().enumerate() {
            if f_j.is_zero() {
                continue;
            }
            pieces.push(format!("({}) d/d{}", f_j.render(), self.chart.name(j)));
        }
        if pieces.is_empty() {
            "0".to_string()
        } else {
            pieces.join(" + ")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::Monomial;
    use crate::scalar::s_int;

    fn odd2() -> Chart {
        Chart::anonymous(vec![1, 1], None).unwrap()
    }

    #[test]
    fn frame_pairs_with_coordinates() {
        let chart = odd2();
        let d1 = VectorField::frame(&chart, 0);
        let x1 = FormalFunction::coordinate(&chart, 0);
        let x2 = FormalFunction::coordinate(&chart, 1);
        assert_eq!(d1.apply(&x1).unwrap(), FormalFunction::one(&chart));
        assert!(d1.apply(&x2).unwrap().is_zero());
    }

    #[test]
    fn frames_commute() {
        let chart = Chart::anonymous(vec![1, 0, 2], None).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let c = VectorField::frame(&chart, i)
                    .commutator(&VectorField::frame(&chart, j))
                    .unwrap();
                assert!(c.is_zero());
            }
        }
    }

    #[test]
    fn commutator_frozen_value() {
        // [x1 d1, d1] = -d1 for x1 odd (hand expansion via Leibniz)
        let chart = odd2();
        let x1 = FormalFunction::coordinate(&chart, 0);
        let d1 = VectorField::frame(&chart, 0);
        let xd = d1.scale_fn(&x1).unwrap();
        let c = xd.commutator(&d1).unwrap();
        assert_eq!(c, d1.neg());
    }

    #[test]
    fn commutator_graded_antisymmetric() {
        let chart = Chart::anonymous(vec![1, 0], Some(6)).unwrap();
        let x1 = FormalFunction::coordinate(&chart, 0);
        let x2 = FormalFunction::coordinate(&chart, 1);
        let fields = vec![
            VectorField::frame(&chart, 0),
            VectorField::frame(&chart, 1),
            VectorField::frame(&chart, 1).scale_fn(&x1).unwrap(),
            VectorField::frame(&chart, 0).scale_fn(&x2).unwrap(),
            VectorField::frame(&chart, 0)
                .scale_fn(&x1.multiply(&x2).unwrap())
                .unwrap(),
        ];
        for x in &fields {
            for y in &fields {
                let dx = x.homogeneous_degree().unwrap_or(0);
                let dy = y.homogeneous_degree().unwrap_or(0);
                let lhs = x.commutator(y).unwrap();
                let mut rhs = y.commutator(x).unwrap().neg();
                if (dx * dy) % 2 != 0 {
                    rhs = rhs.neg();
                }
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn jacobi_identity_weight_two_fields() {
        // graded Jacobi [X,[Y,Z]] = [[X,Y],Z] + (-1)^{|X||Y|}[Y,[X,Z]]
        let chart = Chart::anonymous(vec![1, 2], Some(6)).unwrap();
        let x1 = FormalFunction::coordinate(&chart, 0);
        let x2 = FormalFunction::coordinate(&chart, 1);
        let mut fields = Vec::new();
        for j in 0..2 {
            fields.push(VectorField::frame(&chart, j));
            fields.push(VectorField::frame(&chart, j).scale_fn(&x1).unwrap());
            fields.push(VectorField::frame(&chart, j).scale_fn(&x2).unwrap());
            fields.push(
                VectorField::frame(&chart, j)
                    .scale_fn(&x1.multiply(&x2).unwrap())
                    .unwrap(),
            );
        }
        for x in &fields {
            for y in &fields {
                for z in &fields {
                    let dx = x.homogeneous_degree().unwrap_or(0);
                    let dy = y.homogeneous_degree().unwrap_or(0);
                    let lhs = x.commutator(&y.commutator(z).unwrap()).unwrap();
                    let mut rhs = x.commutator(y).unwrap().commutator(z).unwrap();
                    let mut second = y.commutator(&x.commutator(z).unwrap()).unwrap();
                    if (dx * dy) % 2 != 0 {
                        second = second.neg();
                    }
                    rhs = rhs.add(&second);
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn leibniz_rule_for_apply() {
        let chart = Chart::anonymous(vec![1, 1, 0], None).unwrap();
        let coords: Vec<FormalFunction> = (0..3)
            .map(|i| FormalFunction::coordinate(&chart, i))
            .collect();
        // frame fields and monomials of weight <= 3
        let mut monos = vec![FormalFunction::one(&chart)];
        for (a, coord) in coords.iter().enumerate() {
            monos.push(coord.clone());
            for b in a..3 {
                if let Some((_, m)) = Monomial::canonicalize(&[a, b], &chart) {
                    monos.push(FormalFunction::from_words(&chart, &[(m.0, s_int(1))]));
                }
                for c in b..3 {
                    if let Some((_, m)) = Monomial::canonicalize(&[a, b, c], &chart) {
                        monos.push(FormalFunction::from_words(&chart, &[(m.0, s_int(1))]));
                    }
                }
            }
        }
        for j in 0..3 {
            let x = VectorField::frame(&chart, j);
            let dx = x.homogeneous_degree().unwrap();
            for f in &monos {
                for g in &monos {
                    let lhs = x.apply(&f.multiply(g).unwrap()).unwrap();
                    let df = f.homogeneous_degree().unwrap_or(0);
                    let mut rhs = x.apply(f).unwrap().multiply(g).unwrap();
                    let mut second = f.multiply(&x.apply(g).unwrap()).unwrap();
                    if (dx * df) % 2 != 0 {
                        second = second.neg();
                    }
                    rhs = rhs.add(&second);
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn degree_bookkeeping() {
        let chart = Chart::anonymous(vec![1, 0], None).unwrap();
        let x1 = FormalFunction::coordinate(&chart, 0);
        // x1 d/dx2 has degree |x1| - d2 = 1
        let v = VectorField::frame(&chart, 1).scale_fn(&x1).unwrap();
        assert_eq!(v.homogeneous_degree(), Some(1));
        assert!(v.is_homogeneous_of(1));
        assert!(!v.is_homogeneous_of(0));
    }
}
