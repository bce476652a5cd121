//! The JSON input document: generators with degrees, bracket structure
//! constants on sorted tuples, an optional connection, and optional caps.

use serde::Deserialize;

use crate::chart::Chart;
use crate::connection::Connection;
use crate::error::{Error, Result};
use crate::function::FormalFunction;
use crate::linfty::LInftySpec;
use crate::scalar::parse_scalar;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    pub name: String,
    pub generators: Vec<GeneratorEntry>,
    #[serde(default)]
    pub brackets: Vec<BracketEntry>,
    #[serde(default)]
    pub connection: Option<ConnectionEntry>,
    #[serde(default)]
    pub truncation: Option<TruncationEntry>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorEntry {
    pub name: String,
    pub degree: i64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BracketEntry {
    pub inputs: Vec<String>,
    /// output basis name -> rational coefficient "p/q"
    pub output: std::collections::BTreeMap<String, String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ConnectionEntry {
    Trivial,
    Christoffel { entries: Vec<ChristoffelEntry> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChristoffelEntry {
    pub upper: String,
    pub lower: [String; 2],
    pub coeff: Vec<CoeffTerm>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffTerm {
    pub monomial: Vec<String>,
    pub value: String,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationEntry {
    pub weight: Option<u32>,
    pub arity: Option<u32>,
}

/// A parsed and validated document: the bracket table, its chart, the
/// connection, and the caps.
#[derive(Debug, Clone)]
pub struct LoadedSpec {
    pub spec: LInftySpec,
    pub chart: Chart,
    pub connection: Connection,
    pub connection_kind: &'static str,
    pub weight_cap: Option<u32>,
    pub arity_cap: usize,
}

pub fn parse_document(text: &str) -> Result<Document> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

/// Builds the bracket table from a document, enforcing sortedness, degree
/// consistency, and tuple uniqueness.
pub fn parse_spec(doc: &Document) -> Result<LInftySpec> {
    let names: Vec<String> = doc.generators.iter().map(|g| g.name.clone()).collect();
    let degrees: Vec<i64> = doc.generators.iter().map(|g| g.degree).collect();
    let mut spec = LInftySpec::new(doc.name.clone(), names, degrees)?;
    let mut seen: Vec<Vec<usize>> = Vec::new();
    for entry in &doc.brackets {
        let inputs = entry
            .inputs
            .iter()
            .map(|n| {
                spec.index_of(n).ok_or_else(|| {
                    Error::Parse(format!("bracket references unknown generator {n:?}"))
                })
            })
            .collect::<Result<Vec<usize>>>()?;
        if seen.contains(&inputs) {
            return Err(Error::Parse(format!(
                "duplicate bracket tuple {:?}",
                entry.inputs
            )));
        }
        seen.push(inputs.clone());
        for (out_name, value) in &entry.output {
            let output = spec.index_of(out_name).ok_or_else(|| {
                Error::Parse(format!("bracket output names unknown generator {out_name:?}"))
            })?;
            let coeff = parse_scalar(value)?;
            spec.add_bracket(&inputs, output, coeff).map_err(|e| {
                Error::Parse(format!("bracket {:?} -> {out_name}: {e}", entry.inputs))
            })?;
        }
    }
    Ok(spec)
}

pub fn load(text: &str) -> Result<LoadedSpec> {
    let doc = parse_document(text)?;
    let spec = parse_spec(&doc)?;
    // the engine computes exactly; the declared weight cap bounds reported
    // data and cohomology queries
    let chart = spec.chart(None)?;
    let weight_cap = doc.truncation.and_then(|t| t.weight);
    let arity_cap = doc
        .truncation
        .and_then(|t| t.arity)
        .map(|a| a as usize)
        .unwrap_or(4);
    if arity_cap < 2 {
        return Err(Error::Parse("truncation.arity must be at least 2".into()));
    }
    if let Some(w) = weight_cap {
        if w == 0 {
            return Err(Error::Parse("truncation.weight must be at least 1".into()));
        }
    }
    let (connection, connection_kind) = match &doc.connection {
        None | Some(ConnectionEntry::Trivial) => (Connection::trivial(&chart), "trivial"),
        Some(ConnectionEntry::Christoffel { entries }) => {
            let mut table = Vec::new();
            for e in entries {
                let upper = chart.index_of(&e.upper).ok_or_else(|| {
                    Error::Parse(format!("christoffel upper index {:?} unknown", e.upper))
                })?;
                let lower0 = chart.index_of(&e.lower[0]).ok_or_else(|| {
                    Error::Parse(format!("christoffel lower index {:?} unknown", e.lower[0]))
                })?;
                let lower1 = chart.index_of(&e.lower[1]).ok_or_else(|| {
                    Error::Parse(format!("christoffel lower index {:?} unknown", e.lower[1]))
                })?;
                let mut f = FormalFunction::zero(&chart);
                for term in &e.coeff {
                    let word = term
                        .monomial
                        .iter()
                        .map(|n| {
                            chart.index_of(n).ok_or_else(|| {
                                Error::Parse(format!("christoffel monomial names unknown coordinate {n:?}"))
                            })
                        })
                        .collect::<Result<Vec<usize>>>()?;
                    let value = parse_scalar(&term.value)?;
                    f = f.add(&FormalFunction::from_words(&chart, &[(word, value)]));
                }
                table.push((upper, lower0, lower1, f));
            }
            (
                Connection::from_christoffel(&chart, table)?,
                "christoffel",
            )
        }
    };
    Ok(LoadedSpec {
        spec,
        chart,
        connection,
        connection_kind,
        weight_cap,
        arity_cap,
    })
}
