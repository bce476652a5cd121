//! Global charts on the graded manifold g[1]: coordinate names, internal
//! degrees, and the optional weight truncation.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grading::DegreeVector;

#[derive(Debug, PartialEq, Eq)]
struct ChartData {
    names: Vec<String>,
    degrees: DegreeVector,
    /// `None` runs all polynomial arithmetic exactly; `Some(n)` drops every
    /// monomial of weight > n at construction time.
    truncation: Option<u32>,
}

/// A chart is immutable and cheaply shareable; all values built over it hold
/// a reference.
#[derive(Clone)]
pub struct Chart(Arc<ChartData>);

impl PartialEq for Chart {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl Eq for Chart {}

impl fmt::Debug for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Chart")
            .field("names", &self.0.names)
            .field("degrees", &self.0.degrees.0)
            .field("truncation", &self.0.truncation)
            .finish()
    }
}

impl Chart {
    /// Coordinate degrees are deg x^i = -deg e_i for the chosen basis e_i of
    /// g[1].
    pub fn new(names: Vec<String>, degrees: Vec<i64>, truncation: Option<u32>) -> Result<Self> {
        if degrees.is_empty() {
            return Err(Error::InvalidInput("chart must have dimension >= 1".into()));
        }
        if names.len() != degrees.len() {
            return Err(Error::InvalidInput(format!(
                "{} coordinate names for {} degrees",
                names.len(),
                degrees.len()
            )));
        }
        if let Some(n) = truncation {
            if n == 0 {
                return Err(Error::InvalidInput("truncation weight must be >= 1".into()));
            }
        }
        let mut unique = names.clone();
        unique.sort();
        unique.dedup();
        if unique.len() != names.len() {
            return Err(Error::InvalidInput("duplicate coordinate names".into()));
        }
        Ok(Chart(Arc::new(ChartData {
            names,
            degrees: DegreeVector(degrees),
            truncation,
        })))
    }

    pub fn anonymous(degrees: Vec<i64>, truncation: Option<u32>) -> Result<Self> {
        let names = (1..=degrees.len()).map(|i| format!("x{i}")).collect();
        Self::new(names, degrees, truncation)
    }

    pub fn dimension(&self) -> usize {
        self.0.degrees.len()
    }

    pub fn degrees(&self) -> &DegreeVector {
        &self.0.degrees
    }

    /// deg x^i
    pub fn coordinate_degree(&self, i: usize) -> i64 {
        self.0.degrees.degree(i)
    }

    /// deg ∂/∂x^i = -deg x^i
    pub fn frame_degree(&self, i: usize) -> i64 {
        -self.0.degrees.degree(i)
    }

    pub fn is_odd(&self, i: usize) -> bool {
        self.0.degrees.is_odd(i)
    }

    pub fn name(&self, i: usize) -> &str {
        &self.0.names[i]
    }

    pub fn names(&self) -> &[String] {
        &self.0.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.names.iter().position(|n| n == name)
    }

    pub fn truncation(&self) -> Option<u32> {
        self.0.truncation
    }

    pub fn all_odd(&self) -> bool {
        (0..self.dimension()).all(|i| self.is_odd(i))
    }

    /// Same coordinates and degrees; truncation may differ. Operations mix
    /// values across caps only when the engine deliberately lifts to exact
    /// arithmetic.
    pub fn compatible(&self, other: &Chart) -> bool {
        self.0.names == other.0.names && self.0.degrees == other.0.degrees
    }

    pub fn check_compatible(&self, other: &Chart) -> Result<()> {
        if self.compatible(other) {
            Ok(())
        } else {
            Err(Error::ChartMismatch(format!(
                "{:?} vs {:?}",
                self.0.names, other.0.names
            )))
        }
    }

    /// The same chart with truncation removed; used internally where a
    /// pipeline lowers weight after raising it, so mid-computation drops
    /// would corrupt low-weight output.
    pub fn lifted(&self) -> Chart {
        if self.0.truncation.is_none() {
            self.clone()
        } else {
            Chart(Arc::new(ChartData {
                names: self.0.names.clone(),
                degrees: self.0.degrees.clone(),
                truncation: None,
            }))
        }
    }

    pub fn with_truncation(&self, truncation: Option<u32>) -> Chart {
        Chart(Arc::new(ChartData {
            names: self.0.names.clone(),
            degrees: self.0.degrees.clone(),
            truncation,
        }))
    }
}
