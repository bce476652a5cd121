//! Verification suites and the machine-readable report. Reports are
//! deterministic: all maps iterate in key order, coefficients are rendered
//! as "p/q", and wall-clock data never enters the payload.

use num::Zero;
use serde::Serialize;

use crate::ce::{
    atiyah_class_is_zero, ce_differential, check_module_compatibility, closed_form_lambda,
    effective_word_cap, ewords_up_to, field_of_generator, identify_vf, CECochain, CEModule,
};
use crate::chart::Chart;
use crate::connection::{atiyah_cocycle, cq_apply, Connection};
use crate::diffop::{do_coproduct_eval, DiffOp};
use crate::error::{Error, Result};
use crate::fedosov::{
    a_nabla, b_via_a, curvature_form, d_nabla, form_bracket, homotopy_h, koszul_delta, wedge_words,
    TVForm,
};
use crate::function::{FormalFunction, Monomial};
use crate::input::LoadedSpec;
use crate::kapranov::{
    b_nabla, check_linfty, check_reassembly, connection_compare, delta_nabla, extract_r, lambda,
    r_recursion, RTower,
};
use crate::linfty::{check_homological, q_from_spec, HomologicalVF, HomologicalVerdict};
use crate::pbw::{c_nabla, c_nabla_recursive, theorem1_check, PbwCtx};
use crate::scalar::{format_scalar, s_int, s_one};
use crate::tensor::{st_comultiply, FrameWord, SymBundleMap, SymTensorField};
use crate::vector_field::VectorField;

pub const SUITE_NAMES: [&str; 7] = [
    "all",
    "pbw",
    "jacobi",
    "recursion",
    "fedosov",
    "connections",
    "closedform",
];

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub spec: SpecEcho,
    pub config: ConfigEcho,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub homological: Option<CheckResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub atiyah: Option<AtiyahSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tower: Option<TowerSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cohomology: Option<CohomologySection>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub suites: Vec<SuiteResult>,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpecEcho {
    pub name: String,
    pub generators: Vec<GeneratorEcho>,
    pub bracket_entries: usize,
    pub max_bracket_arity: usize,
    pub all_odd: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct GeneratorEcho {
    pub name: String,
    pub degree: i64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub command: String,
    pub connection: String,
    pub arity_cap: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight_cap: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suite: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub module: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree: Option<i64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub checks: Vec<CheckResult>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TermEcho {
    pub monomial: Vec<String>,
    pub value: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct FieldEcho {
    pub component: String,
    pub terms: Vec<TermEcho>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AtiyahSection {
    pub cocycle: Vec<CocycleEntry>,
    pub cocycle_is_zero: bool,
    pub class_is_zero: bool,
    pub approximate: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<CocycleEntry>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CocycleEntry {
    pub x: String,
    pub y: String,
    pub value: Vec<FieldEcho>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TowerSection {
    pub arities: Vec<TowerArity>,
    pub recursion_matches_extraction: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TowerArity {
    pub arity: usize,
    pub entries: Vec<TowerEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TowerEntry {
    pub word: Vec<String>,
    pub value: Vec<FieldEcho>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CohomologySection {
    pub module: String,
    pub degree: i64,
    pub dimension: usize,
    pub cochain_dimension: usize,
    pub approximate: bool,
    pub representatives: Vec<Vec<CochainEntryEcho>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CochainEntryEcho {
    pub word: Vec<String>,
    pub target: Vec<String>,
    pub value: String,
}

pub fn render_function(f: &FormalFunction, chart: &Chart, cap: Option<u32>) -> Vec<TermEcho> {
    f.terms()
        .filter(|(m, _)| cap.is_none_or(|c| m.weight() as u32 <= c))
        .map(|(m, c)| TermEcho {
            monomial: m.0.iter().map(|&i| chart.name(i).to_string()).collect(),
            value: format_scalar(c),
        })
        .collect()
}

pub fn render_field(v: &VectorField, chart: &Chart, cap: Option<u32>) -> Vec<FieldEcho> {
    v.components()
        .iter()
        .enumerate()
        .filter(|(_, f)| !f.is_zero())
        .map(|(j, f)| FieldEcho {
            component: chart.name(j).to_string(),
            terms: render_function(f, chart, cap),
        })
        .collect()
}

fn render_cochain(c: &CECochain, spec: &crate::linfty::LInftySpec, module: CEModule) -> Vec<CochainEntryEcho> {
    c.entries()
        .map(|((w, m), v)| CochainEntryEcho {
            word: w.iter().map(|&i| spec.generator_name(i).to_string()).collect(),
            target: match module {
                CEModule::Trivial => vec![],
                CEModule::Adjoint => vec![spec.generator_name(m[0]).to_string()],
                CEModule::Coadjoint => vec![format!("{}^", spec.generator_name(m[0]))],
                CEModule::Atiyah => vec![
                    format!("{}^", spec.generator_name(m[0])),
                    format!("{}^", spec.generator_name(m[1])),
                    spec.generator_name(m[2]).to_string(),
                ],
            },
            value: format_scalar(v),
        })
        .collect()
}

pub fn spec_echo(loaded: &LoadedSpec) -> SpecEcho {
    let spec = &loaded.spec;
    SpecEcho {
        name: spec.name.clone(),
        generators: (0..spec.dimension())
            .map(|i| GeneratorEcho {
                name: spec.generator_name(i).to_string(),
                degree: spec.generator_degree(i),
            })
            .collect(),
        bracket_entries: (1..=spec.max_arity()).map(|k| spec.entries(k).len()).sum(),
        max_bracket_arity: spec.max_arity(),
        all_odd: loaded.chart.all_odd(),
    }
}

pub fn homological_check(loaded: &LoadedSpec) -> Result<(Option<HomologicalVF>, CheckResult)> {
    let candidate = crate::linfty::q_candidate(&loaded.spec, &loaded.chart)?;
    match check_homological(&candidate)? {
        HomologicalVerdict::Pass => {
            let q = q_from_spec(&loaded.spec, &loaded.chart)?;
            Ok((
                Some(q),
                CheckResult {
                    name: "homological".into(),
                    passed: true,
                    witness: None,
                },
            ))
        }
        HomologicalVerdict::Fail { coordinate, witness } => Ok((
            None,
            CheckResult {
                name: "homological".into(),
                passed: false,
                witness: Some(format!("[Q,Q] component on {coordinate}: {witness}")),
            },
        )),
    }
}

pub fn atiyah_section(loaded: &LoadedSpec, q: &HomologicalVF) -> Result<AtiyahSection> {
    let chart = &loaded.chart;
    let at = atiyah_cocycle(q, &loaded.connection)?;
    let class = atiyah_class_is_zero(q, &loaded.connection, loaded.weight_cap)?;
    let mut cocycle = Vec::new();
    for i in 0..chart.dimension() {
        for j in 0..chart.dimension() {
            let v = at.tensor().value(i, j);
            if !v.is_zero() {
                cocycle.push(CocycleEntry {
                    x: chart.name(i).to_string(),
                    y: chart.name(j).to_string(),
                    value: render_field(&v, chart, loaded.weight_cap),
                });
            }
        }
    }
    let witness = class.witness.as_ref().map(|w| {
        let mut out = Vec::new();
        for ((i, j), v) in w.entries() {
            out.push(CocycleEntry {
                x: chart.name(*i).to_string(),
                y: chart.name(*j).to_string(),
                value: render_field(v, chart, loaded.weight_cap),
            });
        }
        out
    });
    Ok(AtiyahSection {
        cocycle,
        cocycle_is_zero: class.cocycle_is_zero,
        class_is_zero: class.class_is_zero,
        approximate: class.approximate,
        witness,
    })
}

pub fn tower_section(loaded: &LoadedSpec, q: &HomologicalVF) -> Result<TowerSection> {
    let ctx = PbwCtx::new(&loaded.connection);
    let extracted = extract_r(q, &ctx, loaded.arity_cap)?;
    let recursive = r_recursion(q, &ctx, loaded.arity_cap)?;
    for k in 2..=loaded.arity_cap {
        for w in SymBundleMap::domain_words(ctx.chart(), k) {
            let a = extracted.map(k).map(|m| m.eval_word(&w.0));
            let b = recursive.map(k).map(|m| m.eval_word(&w.0));
            if a != b {
                return Err(Error::Inconsistency(format!(
                    "tower mismatch at arity {k}, word {}: extraction {} vs recursion {}",
                    w.render(ctx.chart()),
                    a.map(|v| v.render()).unwrap_or_default(),
                    b.map(|v| v.render()).unwrap_or_default(),
                )));
            }
        }
    }
    Ok(TowerSection {
        arities: tower_arities(&extracted, &loaded.chart, loaded.weight_cap),
        recursion_matches_extraction: true,
    })
}

fn tower_arities(tower: &RTower, chart: &Chart, cap: Option<u32>) -> Vec<TowerArity> {
    tower
        .maps()
        .map(|(k, map)| TowerArity {
            arity: *k,
            entries: map
                .entries()
                .filter(|(_, v)| !v.is_zero())
                .map(|(w, v)| TowerEntry {
                    word: w.0.iter().map(|&i| chart.name(i).to_string()).collect(),
                    value: render_field(v, chart, cap),
                })
                .collect(),
        })
        .collect()
}

pub fn cohomology_section(
    loaded: &LoadedSpec,
    module: CEModule,
    degree: i64,
) -> Result<CohomologySection> {
    let report = crate::ce::ce_cohomology(&loaded.spec, module, degree, loaded.weight_cap)?;
    Ok(CohomologySection {
        module: format!("{module:?}").to_lowercase(),
        degree,
        dimension: report.dimension,
        cochain_dimension: report.cochain_dimension,
        approximate: report.approximate,
        representatives: report
            .representatives
            .iter()
            .map(|r| render_cochain(r, &loaded.spec, module))
            .collect(),
    })
}

struct SuiteCtx<'a> {
    loaded: &'a LoadedSpec,
    q: &'a HomologicalVF,
    /// the input connection and the trivial one, deduplicated
    connections: Vec<(&'static str, Connection)>,
}

impl<'a> SuiteCtx<'a> {
    fn new(loaded: &'a LoadedSpec, q: &'a HomologicalVF) -> Self {
        let trivial = Connection::trivial(&loaded.chart);
        let mut connections = vec![];
        if loaded.connection.is_trivial() {
            connections.push(("trivial", trivial));
        } else {
            connections.push(("input", loaded.connection.clone()));
            connections.push(("trivial", trivial));
        }
        SuiteCtx {
            loaded,
            q,
            connections,
        }
    }

    fn chart(&self) -> &Chart {
        &self.loaded.chart
    }

    fn probes(&self, max_weight: usize) -> Vec<FormalFunction> {
        let chart = self.chart();
        let mut out = vec![FormalFunction::one(chart)];
        let mut layer: Vec<Monomial> = vec![Monomial::one()];
        for _ in 0..max_weight {
            let mut next = Vec::new();
            for m in &layer {
                let start = m.0.last().copied().unwrap_or(0);
                for j in start..chart.dimension() {
                    let mut word = m.0.clone();
                    word.push(j);
                    if let Some((_, cm)) = Monomial::canonicalize(&word, chart) {
                        if !next.contains(&cm) {
                            next.push(cm);
                        }
                    }
                }
            }
            for m in &next {
                out.push(FormalFunction::from_words(chart, &[(m.0.clone(), s_one())]));
            }
            layer = next;
        }
        out
    }
}

type Check = (String, Box<dyn FnOnce() -> Result<CheckResult> + Send>);

fn simple_check(
    name: impl Into<String>,
    body: impl FnOnce() -> Result<Option<String>> + Send + 'static,
) -> Check {
    let name = name.into();
    let label = name.clone();
    (
        name,
        Box::new(move || {
            let witness = body()?;
            Ok(CheckResult {
                name: label,
                passed: witness.is_none(),
                witness,
            })
        }),
    )
}

/// Worker-pool map with deterministic output order; the pool width honors
/// GRADEDKAP_THREADS and falls back to the machine parallelism.
pub fn run_checks(checks: Vec<Check>) -> Result<Vec<CheckResult>> {
    let workers = match std::env::var("GRADEDKAP_THREADS") {
        Ok(v) => v.parse::<usize>().map_err(|_| {
            Error::InvalidInput(format!("GRADEDKAP_THREADS must be a positive integer, got {v:?}"))
        })?,
        Err(_) => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    }
    .max(1);
    if workers == 1 || checks.len() <= 1 {
        return checks.into_iter().map(|(_, body)| body()).collect();
    }
    let n = checks.len();
    let jobs: std::sync::Mutex<Vec<(usize, Check)>> =
        std::sync::Mutex::new(checks.into_iter().enumerate().collect());
    let results: std::sync::Mutex<Vec<Option<Result<CheckResult>>>> =
        std::sync::Mutex::new((0..n).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers.min(n) {
            scope.spawn(|| loop {
                let job = jobs.lock().expect("job queue").pop();
                match job {
                    None => break,
                    Some((idx, (_, body))) => {
                        let outcome = body();
                        results.lock().expect("slots")[idx] = Some(outcome);
                    }
                }
            });
        }
    });
    results
        .into_inner()
        .expect("pool finished")
        .into_iter()
        .map(|slot| slot.expect("every check ran"))
        .collect()
}

pub fn run_suites(loaded: &LoadedSpec, q: &HomologicalVF, which: &str) -> Result<Vec<SuiteResult>> {
    let names: Vec<&str> = match which {
        "all" => SUITE_NAMES[1..].to_vec(),
        other if SUITE_NAMES.contains(&other) => vec![other],
        other => {
            return Err(Error::InvalidInput(format!(
                "unknown suite {other:?}; expected one of {SUITE_NAMES:?}"
            )))
        }
    };
    let mut out = Vec::new();
    for name in names {
        let ctx = SuiteCtx::new(loaded, q);
        let checks = match name {
            "pbw" => pbw_suite(&ctx),
            "jacobi" => jacobi_suite(&ctx),
            "recursion" => recursion_suite(&ctx),
            "fedosov" => fedosov_suite(&ctx),
            "connections" => connections_suite(&ctx),
            "closedform" => closedform_suite(&ctx),
            _ => unreachable!(),
        };
        out.push(SuiteResult {
            name: name.to_string(),
            checks: run_checks(checks)?,
        });
    }
    Ok(out)
}

fn jacobi_suite(ctx: &SuiteCtx) -> Vec<Check> {
    let loaded = ctx.loaded.clone();
    let q = ctx.q.clone();
    let arity_cap = loaded.arity_cap;
    let connections = ctx.connections.clone();
    let mut checks = Vec::new();
    {
        let loaded = loaded.clone();
        checks.push(simple_check("q-square-zero", move || {
            let candidate = crate::linfty::q_candidate(&loaded.spec, &loaded.chart)?;
            Ok(match check_homological(&candidate)? {
                HomologicalVerdict::Pass => None,
                HomologicalVerdict::Fail { coordinate, witness } => {
                    Some(format!("[Q,Q] on {coordinate}: {witness}"))
                }
            })
        }));
    }
    {
        let q = q.clone();
        let chart = loaded.chart.clone();
        checks.push(simple_check("lie-derivative-squares-to-zero", move || {
            for arity in 0..=3usize {
                for w in SymBundleMap::domain_words(&chart, arity) {
                    let t = SymTensorField::from_word(&chart, &w);
                    let twice = t.lie_derivative(q.field())?.lie_derivative(q.field())?;
                    if !twice.is_zero() {
                        return Ok(Some(format!("L_Q² on {}", w.render(&chart))));
                    }
                }
            }
            Ok(None)
        }));
    }
    for (label, conn) in connections {
        let q = q.clone();
        checks.push(simple_check(format!("delta-squared-zero-{label}"), move || {
            let pbw = PbwCtx::new(&conn);
            let verdict = check_linfty(&q, &pbw, arity_cap, 6)?;
            Ok(if verdict.passed { None } else { verdict.witness })
        }));
    }
    checks
}

fn pbw_suite(ctx: &SuiteCtx) -> Vec<Check> {
    let mut checks = Vec::new();
    for (label, conn) in ctx.connections.clone() {
        let chart = ctx.chart().clone();
        let probes = ctx.probes(2);
        {
            let conn = conn.clone();
            let chart = chart.clone();
            let probes = probes.clone();
            checks.push(simple_check(format!("coalgebra-morphism-{label}"), move || {
                let pbw = PbwCtx::new(&conn);
                for arity in 0..=3usize {
                    for w in SymBundleMap::domain_words(&chart, arity) {
                        let t = SymTensorField::from_word(&chart, &w);
                        let image = pbw.pbw(&t)?;
                        for f in &probes {
                            for g in &probes {
                                let lhs = do_coproduct_eval(&image, &f.on_chart(pbw.chart()), &g.on_chart(pbw.chart()))?;
                                let mut rhs = FormalFunction::zero(pbw.chart());
                                for ((a, b), coeff) in st_comultiply(&t).terms() {
                                    let da = pbw
                                        .pbw(&SymTensorField::from_word(&chart, a))?
                                        .scale_fn(&coeff.on_chart(pbw.chart()))?;
                                    let db = pbw.pbw(&SymTensorField::from_word(&chart, b))?;
                                    for (dbd, db_part) in db.homogeneous_parts() {
                                        for (fd, f_part) in f.on_chart(pbw.chart()).homogeneous_parts() {
                                            let mut piece = da
                                                .apply(&f_part)?
                                                .multiply(&db_part.apply(&g.on_chart(pbw.chart()))?)?;
                                            if (dbd * fd) % 2 != 0 {
                                                piece = piece.neg();
                                            }
                                            rhs = rhs.add(&piece);
                                        }
                                    }
                                }
                                if lhs != rhs {
                                    return Ok(Some(format!(
                                        "Δ∘pbw mismatch on {} at ({}, {})",
                                        w.render(&chart),
                                        f.render(),
                                        g.render()
                                    )));
                                }
                            }
                        }
                    }
                }
                Ok(None)
            }));
        }
        {
            let conn = conn.clone();
            let chart = chart.clone();
            checks.push(simple_check(format!("counit-compatibility-{label}"), move || {
                let pbw = PbwCtx::new(&conn);
                let one = FormalFunction::one(pbw.chart());
                let x1 = FormalFunction::coordinate(pbw.chart(), 0);
                for arity in 0..=3usize {
                    for w in SymBundleMap::domain_words(&chart, arity) {
                        let mut t = SymTensorField::from_word(pbw.chart(), &w);
                        t = t.add(&SymTensorField::from_fn(&x1));
                        if pbw.pbw(&t)?.apply(&one)? != t.counit() {
                            return Ok(Some(format!("counit mismatch on {}", w.render(&chart))));
                        }
                    }
                }
                Ok(None)
            }));
        }
        {
            let conn = conn.clone();
            let chart = chart.clone();
            checks.push(simple_check(format!("symbol-filtration-{label}"), move || {
                let pbw = PbwCtx::new(&conn);
                for arity in 0..=4usize {
                    for w in SymBundleMap::domain_words(&chart, arity) {
                        let t = SymTensorField::from_word(pbw.chart(), &w);
                        let d = pbw.pbw(&t)?;
                        if d.order() != arity || d.symbol(arity) != t {
                            return Ok(Some(format!(
                                "filtration violated on {}",
                                w.render(&chart)
                            )));
                        }
                    }
                }
                Ok(None)
            }));
        }
        {
            let conn = conn.clone();
            let chart = chart.clone();
            checks.push(simple_check(format!("inverse-round-trip-{label}"), move || {
                let pbw = PbwCtx::new(&conn);
                let x1 = FormalFunction::coordinate(pbw.chart(), 0);
                for arity in 0..=3usize {
                    for w in SymBundleMap::domain_words(&chart, arity) {
                        for t in [
                            SymTensorField::from_word(pbw.chart(), &w),
                            SymTensorField::from_word(pbw.chart(), &w).scale_fn(&x1)?,
                        ] {
                            if pbw.pbw_inverse(&pbw.pbw(&t)?)? != t {
                                return Ok(Some(format!(
                                    "inverse failed on {}",
                                    w.render(&chart)
                                )));
                            }
                        }
                    }
                }
                Ok(None)
            }));
        }
    }
    checks
}

fn recursion_suite(ctx: &SuiteCtx) -> Vec<Check> {
    let mut checks = Vec::new();
    for (label, conn) in ctx.connections.clone() {
        let q = ctx.q.clone();
        let chart = ctx.chart().clone();
        let arity_cap = ctx.loaded.arity_cap;
        {
            let q = q.clone();
            let conn = conn.clone();
            let chart = chart.clone();
            checks.push(simple_check(format!("defect-base-cases-{label}"), move || {
                let pbw = PbwCtx::new(&conn);
                let f = FormalFunction::coordinate(pbw.chart(), 0);
                if !c_nabla(&q, &pbw, &SymTensorField::from_fn(&f))?.is_zero() {
                    return Ok(Some("C on a function is nonzero".into()));
                }
                for j in 0..chart.dimension() {
                    let x = SymTensorField::from_word(pbw.chart(), &FrameWord::single(j));
                    if !c_nabla(&q, &pbw, &x)?.is_zero() {
                        return Ok(Some(format!("C on d/d{} is nonzero", chart.name(j))));
                    }
                }
                let at = atiyah_cocycle(&q, &conn)?;
                for w in SymBundleMap::domain_words(&chart, 2) {
                    let t = SymTensorField::from_word(pbw.chart(), &w);
                    let lhs = c_nabla(&q, &pbw, &t)?;
                    let rhs = DiffOp::from_vf(&at.tensor().value(w.0[0], w.0[1]).on_chart(pbw.chart())).neg();
                    if lhs != rhs {
                        return Ok(Some(format!(
                            "pair defect differs from the cocycle on {}",
                            w.render(&chart)
                        )));
                    }
                }
                Ok(None)
            }));
        }
        {
            let q = q.clone();
            let conn = conn.clone();
            let chart = chart.clone();
            let name = format!("defect-recursion-{label}");
            let label2 = name.clone();
            checks.push((
                name,
                Box::new(move || {
                    let pbw = PbwCtx::new(&conn);
                    for arity in 0..=arity_cap {
                        for w in SymBundleMap::domain_words(&chart, arity) {
                            let t = SymTensorField::from_word(pbw.chart(), &w);
                            let direct = c_nabla(&q, &pbw, &t)?;
                            let recursive = c_nabla_recursive(&q, &pbw, &t)?;
                            if direct != recursive {
                                return Err(Error::Inconsistency(format!(
                                    "defect routes disagree on {}: direct {} vs recursive {}",
                                    w.render(&chart),
                                    direct.render(),
                                    recursive.render()
                                )));
                            }
                        }
                    }
                    Ok(CheckResult {
                        name: label2,
                        passed: true,
                        witness: None,
                    })
                }),
            ));
        }
        {
            let q = q.clone();
            let conn = conn.clone();
            checks.push(simple_check(format!("vanishing-biconditional-{label}"), move || {
                let report = theorem1_check(&q, &conn, arity_cap.min(3))?;
                Ok(if report.consistent() {
                    None
                } else {
                    Some(format!(
                        "cocycle zero: {}, defect zero: {} ({:?})",
                        report.atiyah_is_zero, report.c_is_zero, report.witness
                    ))
                })
            }));
        }
    }
    checks
}

fn connections_suite(ctx: &SuiteCtx) -> Vec<Check> {
    let mut checks = Vec::new();
    let q = ctx.q.clone();
    let chart = ctx.chart().clone();
    for (label, conn) in ctx.connections.clone() {
        let q = q.clone();
        let chart = chart.clone();
        checks.push(simple_check(format!("cocycle-symmetry-closedness-{label}"), move || {
            let at = atiyah_cocycle(&q, &conn)?;
            if !at.tensor().is_graded_symmetric() {
                return Ok(Some("cocycle is not graded symmetric".into()));
            }
            if !cq_apply(&q, at.tensor())?.is_zero() {
                return Ok(Some("cocycle is not closed".into()));
            }
            if conn.is_degree_zero() && !at.is_zero() && !at.tensor().is_homogeneous_of(1) {
                return Ok(Some("cocycle is not of internal degree +1".into()));
            }
            let _ = chart.dimension();
            Ok(None)
        }));
    }
    {
        let q = q.clone();
        let a = ctx.connections[0].1.clone();
        let b = ctx.connections.last().expect("nonempty").1.clone();
        checks.push(simple_check("class-independence", move || {
            let at_a = atiyah_cocycle(&q, &a)?;
            let at_b = atiyah_cocycle(&q, &b)?;
            let lhs = at_a.tensor().sub(at_b.tensor());
            let rhs = cq_apply(&q, &a.difference(&b)?)?;
            let d = lhs.sub(&rhs);
            Ok(if d.is_zero() {
                None
            } else {
                Some("difference of cocycles is not the coboundary of the difference tensor".into())
            })
        }));
    }
    {
        let q = q.clone();
        let a = ctx.connections[0].1.clone();
        let b = ctx.connections.last().expect("nonempty").1.clone();
        let arity_cap = ctx.loaded.arity_cap.min(3);
        checks.push(simple_check("connection-compare", move || {
            let cmp = connection_compare(&q, &a, &b, arity_cap)?;
            Ok(match (cmp.intertwines, cmp.phi1_is_identity) {
                (true, true) => None,
                (false, _) => Some("comparison morphism fails to intertwine".into()),
                (_, false) => Some("linear part of the comparison is not the identity".into()),
            })
        }));
    }
    {
        let q = q.clone();
        let conn = ctx.connections[0].1.clone();
        let arity_cap = ctx.loaded.arity_cap;
        checks.push(simple_check("tower-degree-audit", move || {
            if !conn.is_degree_zero() {
                return Ok(None); // degree audit only applies to degree-zero data
            }
            let pbw = PbwCtx::new(&conn);
            let tower = extract_r(&q, &pbw, arity_cap)?;
            for (k, map) in tower.maps() {
                for (w, v) in map.entries() {
                    if v.is_zero() {
                        continue;
                    }
                    let expected = 1 + w.degree(pbw.chart());
                    if !v.is_homogeneous_of(expected) {
                        return Ok(Some(format!(
                            "tower entry R_{k}({}) has wrong degree",
                            w.render(pbw.chart())
                        )));
                    }
                }
            }
            Ok(None)
        }));
    }
    checks
}

fn fedosov_suite(ctx: &SuiteCtx) -> Vec<Check> {
    let mut checks = Vec::new();
    let chart = ctx.chart().clone();
    {
        let chart = chart.clone();
        checks.push(simple_check("koszul-delta-squared", move || {
            for p in 0..=1usize {
                for w in wedge_words(&chart, p) {
                    for weight in 0..=3usize {
                        for s in SymBundleMap::domain_words(&chart, weight) {
                            for k in 0..chart.dimension() {
                                let mut form = TVForm::zero(&chart, p);
                                form.set(w.clone(), s.clone(), VectorField::frame(&chart, k))?;
                                if !koszul_delta(&koszul_delta(&form)?)?.is_zero() {
                                    return Ok(Some("δ² is nonzero".into()));
                                }
                            }
                        }
                    }
                }
            }
            Ok(None)
        }));
    }
    {
        let chart = chart.clone();
        checks.push(simple_check("homotopy-identity", move || {
            for p in 0..=2usize {
                for w in wedge_words(&chart, p) {
                    for weight in 0..=3usize {
                        for s in SymBundleMap::domain_words(&chart, weight) {
                            for k in 0..chart.dimension() {
                                let mut form = TVForm::zero(&chart, p);
                                form.set(w.clone(), s.clone(), VectorField::frame(&chart, k))?;
                                let lhs = koszul_delta(&homotopy_h(&form)?)?
                                    .add(&homotopy_h(&koszul_delta(&form)?)?)?;
                                let expected = if p == 0 && weight == 0 {
                                    TVForm::zero(&chart, 0)
                                } else {
                                    form.clone()
                                };
                                if lhs != expected {
                                    return Ok(Some(format!(
                                        "homotopy identity fails at p = {p}, weight {weight}"
                                    )));
                                }
                            }
                        }
                    }
                }
            }
            Ok(None)
        }));
    }
    for (label, conn) in ctx.connections.clone() {
        {
            let conn = conn.clone();
            checks.push(simple_check(format!("flattening-form-{label}"), move || {
                let cap = 5usize;
                let a = a_nabla(&conn, cap)?;
                if conn.is_flat()? && !a.form.is_zero() {
                    return Ok(Some("flat connection produced a nonzero form".into()));
                }
                if !homotopy_h(&a.form)?.is_zero() {
                    return Ok(Some("the homotopy does not annihilate the form".into()));
                }
                let lhs = koszul_delta(&a.form)?;
                let rhs = curvature_form(&conn)?
                    .add(&d_nabla(&conn, &a.form)?)?
                    .add(&form_bracket(&a.form, &a.form)?.scale(&(s_one() / s_int(2))))?;
                if lhs.truncate_sym_weight(cap - 1) != rhs.truncate_sym_weight(cap - 1) {
                    return Ok(Some("fixed-point equation fails below the cap".into()));
                }
                let expected_a2 = homotopy_h(&curvature_form(&conn)?)?;
                if a.form.sym_component(2) != expected_a2 {
                    return Ok(Some("weight-two layer is not h of the curvature".into()));
                }
                Ok(None)
            }));
        }
        {
            let conn = conn.clone();
            let chart = chart.clone();
            let name = format!("b-route-agreement-{label}");
            let label2 = name.clone();
            checks.push((
                name,
                Box::new(move || {
                    let a = a_nabla(&conn, 5)?;
                    let pbw = PbwCtx::new(&conn);
                    let x1 = FormalFunction::coordinate(&chart, 0);
                    let mut fields = Vec::new();
                    for j in 0..chart.dimension() {
                        fields.push(VectorField::frame(&chart, j));
                    }
                    fields.push(VectorField::frame(&chart, 0).scale_fn(&x1)?);
                    for y in &fields {
                        for arity in 0..=3usize {
                            for w in SymBundleMap::domain_words(&chart, arity) {
                                let t = SymTensorField::from_word(&chart, &w);
                                let fed = b_via_a(&a, y, &t)?.on_chart(pbw.chart());
                                let direct = b_nabla(&pbw, y, &t)?;
                                if fed != direct {
                                    return Err(Error::Inconsistency(format!(
                                        "B routes disagree on Y = {}, T = {}: {} vs {}",
                                        y.render(),
                                        w.render(&chart),
                                        fed.render(),
                                        direct.render()
                                    )));
                                }
                            }
                        }
                    }
                    Ok(CheckResult {
                        name: label2,
                        passed: true,
                        witness: None,
                    })
                }),
            ));
        }
    }
    checks
}

fn closedform_suite(ctx: &SuiteCtx) -> Vec<Check> {
    let mut checks = Vec::new();
    let loaded = ctx.loaded.clone();
    let q = ctx.q.clone();
    let chart = ctx.chart().clone();
    {
        let loaded = loaded.clone();
        let q = q.clone();
        let chart = chart.clone();
        checks.push(simple_check("lie-derivative-intertwining", move || {
            let cap = effective_word_cap(&loaded.spec, loaded.weight_cap.or(Some(4)))?;
            let mut fields = Vec::new();
            let probes: Vec<Monomial> = {
                let mut out = vec![Monomial::one()];
                for i in 0..chart.dimension() {
                    out.push(Monomial(vec![i]));
                    for j in i..chart.dimension() {
                        if let Some((_, m)) = Monomial::canonicalize(&[i, j], &chart) {
                            out.push(m);
                        }
                    }
                }
                out
            };
            for l in 0..chart.dimension() {
                for m in &probes {
                    let f = FormalFunction::from_words(&chart, &[(m.0.clone(), s_one())]);
                    fields.push(VectorField::frame(&chart, l).scale_fn(&f)?);
                }
            }
            for x in fields {
                let lhs = identify_vf(&loaded.spec, &q.field().commutator(&x)?, cap)?;
                let rhs = ce_differential(&loaded.spec, &identify_vf(&loaded.spec, &x, cap + 1)?, cap);
                let diff = lhs.sub(&rhs);
                for ((w, midx), c) in diff.entries() {
                    if w.len() <= cap && !c.is_zero() {
                        return Ok(Some(format!(
                            "intertwining fails on {} at word {w:?}|{midx:?}",
                            x.render()
                        )));
                    }
                }
            }
            Ok(None)
        }));
    }
    {
        let loaded = loaded.clone();
        let q = q.clone();
        let chart = chart.clone();
        let name = "tower-closed-form".to_string();
        let label2 = name.clone();
        checks.push((
            name,
            Box::new(move || {
                let cap = effective_word_cap(&loaded.spec, loaded.weight_cap.or(Some(4)))?;
                let conn = Connection::trivial(&chart);
                let pbw = PbwCtx::new(&conn);
                let arity_cap = loaded.arity_cap.min(4);
                let tower = extract_r(&q, &pbw, arity_cap)?;
                for n in 1..=arity_cap {
                    for word in SymBundleMap::domain_words(&chart, n) {
                        let inputs: Vec<VectorField> = word
                            .0
                            .iter()
                            .map(|&i| field_of_generator(&chart, i))
                            .collect();
                        let geometric = if n == 1 {
                            q.field().commutator(&inputs[0])?
                        } else {
                            lambda(&tower, &q, &inputs)?
                        };
                        let lhs = identify_vf(&loaded.spec, &geometric.on_chart(&chart), cap)?;
                        let rhs = closed_form_lambda(&loaded.spec, &word.0, cap);
                        if lhs != rhs {
                            return Err(Error::Inconsistency(format!(
                                "closed-form bracket mismatch at arity {n}, inputs {:?}",
                                word.0
                            )));
                        }
                    }
                }
                Ok(CheckResult {
                    name: label2,
                    passed: true,
                    witness: None,
                })
            }),
        ));
    }
    {
        let q = q.clone();
        let chart = chart.clone();
        let arity_cap = ctx.loaded.arity_cap.min(4);
        checks.push(simple_check("tower-iterated-partials", move || {
            let conn = Connection::trivial(&chart);
            let pbw = PbwCtx::new(&conn);
            let tower = extract_r(&q, &pbw, arity_cap)?;
            for n in 2..=arity_cap {
                for word in SymBundleMap::domain_words(&chart, n) {
                    let mut expected = VectorField::zero(&chart);
                    let degree_sum: i64 = word.0.iter().map(|&i| chart.coordinate_degree(i)).sum();
                    for l in 0..chart.dimension() {
                        let mut partial = q.field().component(l).clone();
                        for &i in word.0.iter().rev() {
                            partial = partial.partial(i);
                        }
                        let mut piece = VectorField::frame(&chart, l).scale_fn(&partial)?;
                        if (degree_sum + 1) % 2 != 0 {
                            piece = piece.neg();
                        }
                        expected = expected.add(&piece);
                    }
                    if tower.map(n).map(|m| m.eval_word(&word.0)) != Some(expected.on_chart(pbw.chart())) {
                        return Ok(Some(format!(
                            "iterated-partial formula fails at arity {n}, word {:?}",
                            word.0
                        )));
                    }
                }
            }
            Ok(None)
        }));
    }
    {
        let loaded = loaded.clone();
        checks.push(simple_check("module-compatibility", move || {
            for module in [
                CEModule::Trivial,
                CEModule::Adjoint,
                CEModule::Coadjoint,
                CEModule::Atiyah,
            ] {
                if let Some(witness) = check_module_compatibility(&loaded.spec, module, 3) {
                    return Ok(Some(witness));
                }
            }
            Ok(None)
        }));
    }
    {
        let loaded = loaded.clone();
        checks.push(simple_check("ce-differential-squares", move || {
            let cap = 3usize;
            for module in [CEModule::Adjoint, CEModule::Atiyah] {
                for word in ewords_up_to(&loaded.spec, 2) {
                    for midx in module.basis(loaded.spec.dimension()) {
                        let mut f = CECochain::zero(module, loaded.spec.dimension());
                        f.add_entry(word.clone(), midx.clone(), s_one());
                        let ddf = ce_differential(&loaded.spec, &ce_differential(&loaded.spec, &f, cap + 2), cap);
                        for ((w, m), c) in ddf.entries() {
                            if w.len() <= cap && !c.is_zero() {
                                return Ok(Some(format!(
                                    "d² is nonzero at {w:?}|{m:?}"
                                )));
                            }
                        }
                    }
                }
            }
            Ok(None)
        }));
    }
    {
        let loaded = loaded.clone();
        let q = q.clone();
        checks.push(simple_check("tower-reassembly", move || {
            let pbw = PbwCtx::new(&loaded.connection);
            let tower = extract_r(&q, &pbw, loaded.arity_cap.max(4))?;
            let verdict = check_reassembly(&q, &pbw, &tower, 3)?;
            Ok(if verdict.passed { None } else { verdict.witness })
        }));
    }
    {
        let q = q.clone();
        let loaded = loaded.clone();
        let chart = chart.clone();
        checks.push(simple_check("delta-reassembles-lie-derivative", move || {
            // sanity on the abelian-style identity: δ on the trivial
            // connection equals L_Q plus tower corrections, so at arity 1
            // both agree exactly
            let conn = Connection::trivial(&chart);
            let pbw = PbwCtx::new(&conn);
            for j in 0..chart.dimension() {
                let t = SymTensorField::from_word(pbw.chart(), &FrameWord::single(j));
                let lhs = delta_nabla(&q, &pbw, &t)?;
                let rhs = t.lie_derivative(&q.field().on_chart(pbw.chart()))?;
                if lhs != rhs {
                    return Ok(Some(format!(
                        "δ differs from L_Q on d/d{}",
                        chart.name(j)
                    )));
                }
            }
            let _ = &loaded;
            Ok(None)
        }));
    }
    checks
}

/// Renders a report as the human-readable text form.
pub fn render_text(report: &Report) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{} {} — {}\n",
        report.tool, report.version, report.spec.name
    ));
    out.push_str(&format!(
        "generators: {}\n",
        report
            .spec
            .generators
            .iter()
            .map(|g| format!("{} (degree {})", g.name, g.degree))
            .collect::<Vec<_>>()
            .join(", ")
    ));
    out.push_str(&format!(
        "command: {} | connection: {} | arity cap: {}{}\n",
        report.config.command,
        report.config.connection,
        report.config.arity_cap,
        report
            .config
            .weight_cap
            .map(|w| format!(" | weight cap: {w}"))
            .unwrap_or_default()
    ));
    if let Some(h) = &report.homological {
        out.push_str(&format!(
            "homological check: {}{}\n",
            if h.passed { "PASS" } else { "FAIL" },
            h.witness
                .as_ref()
                .map(|w| format!(" ({w})"))
                .unwrap_or_default()
        ));
    }
    if let Some(a) = &report.atiyah {
        out.push_str(&format!(
            "atiyah cocycle: {} entries, cocycle {}, class {}{}\n",
            a.cocycle.len(),
            if a.cocycle_is_zero { "zero" } else { "nonzero" },
            if a.class_is_zero { "zero" } else { "nonzero" },
            if a.approximate { " (cap-dependent)" } else { "" }
        ));
        for e in &a.cocycle {
            out.push_str(&format!("  At({}, {}):\n", e.x, e.y));
            for f in &e.value {
                let terms = f
                    .terms
                    .iter()
                    .map(|t| {
                        if t.monomial.is_empty() {
                            t.value.clone()
                        } else {
                            format!("{} {}", t.value, t.monomial.join("*"))
                        }
                    })
                    .collect::<Vec<_>>()
                    .join(" + ");
                out.push_str(&format!("    d/d{} : {}\n", f.component, terms));
            }
        }
    }
    if let Some(t) = &report.tower {
        out.push_str(&format!(
            "bracket tower: recursion matches extraction: {}\n",
            t.recursion_matches_extraction
        ));
        for a in &t.arities {
            out.push_str(&format!(
                "  arity {}: {} nonzero entries\n",
                a.arity,
                a.entries.len()
            ));
        }
    }
    if let Some(c) = &report.cohomology {
        out.push_str(&format!(
            "cohomology ({}, degree {}): dimension {} of {} cochains{}\n",
            c.module,
            c.degree,
            c.dimension,
            c.cochain_dimension,
            if c.approximate { " (cap-dependent)" } else { "" }
        ));
    }
    for suite in &report.suites {
        out.push_str(&format!("suite {}:\n", suite.name));
        for check in &suite.checks {
            out.push_str(&format!(
                "  [{}] {}{}\n",
                if check.passed { "PASS" } else { "FAIL" },
                check.name,
                check
                    .witness
                    .as_ref()
                    .map(|w| format!(" — {w}"))
                    .unwrap_or_default()
            ));
        }
    }
    out.push_str(&format!(
        "overall: {}\n",
        if report.passed { "PASS" } else { "FAIL" }
    ));
    out
}
