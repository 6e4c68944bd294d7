//! Command-line front end: JSON documents, subcommands and exit codes.
//!
//! Exit codes: 0 success, 1 general failure or FAIL verdict, 2 input is not a
//! cycle, 3 missing embedding or lengths, 4 unrecoverable degeneracy, 5
//! unsupported dimension, 6 unknown example, 7 time or resource budget
//! exhausted, 64 usage error.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chains::{Chain, Vertex};
use crate::flex::{
    bellows_check, example_zoo, flex_space, recompute_residual, trace_flex, ExampleSpec, FlexError, FlexTrace,
    TraceOptions, TraceStatus, ZooEmbedding, ZOO_NAMES,
};
use crate::geometry::{generalized_volume, rational_from_f64, winding_volume, ExactEmbedding, FloatEmbedding};
use crate::polyalg::{to_f64, Monomial, MultiPoly, Var, VarSymbol};
use crate::sabitov::{
    assignment_from_embedding, edge_var, sabitov_relation_traced, verify_root, Assignment, Multiplier,
    PipelineMode, PipelineOptions, SabitovError, SabitovRelation,
};

pub const SCHEMA_VERSION: u32 = 1;

pub mod exit {
    pub const FAILURE: u8 = 1;
    pub const NOT_A_CYCLE: u8 = 2;
    pub const MISSING_EMBEDDING: u8 = 3;
    pub const DEGENERACY: u8 = 4;
    pub const UNSUPPORTED_DIMENSION: u8 = 5;
    pub const UNKNOWN_EXAMPLE: u8 = 6;
    pub const RESOURCE_LIMIT: u8 = 7;
    pub const USAGE: u8 = 64;
}

/// Edge-length threshold used for the flex verdict.
const RESIDUAL_TOL: f64 = 1e-10;
const DRIFT_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("invalid document: {0}")]
    Document(String),
    #[error("{0}")]
    NotACycle(String),
    #[error("{0}")]
    MissingEmbedding(String),
    #[error("{message}")]
    Degeneracy { message: String, trace: Vec<String> },
    #[error("dimension n = {0} is not supported; elimination needs n = 3 or n = 4")]
    UnsupportedDimension(usize),
    #[error("unknown example {0:?}; see `zoo list`")]
    UnknownExample(String),
    #[error("{message}")]
    ResourceLimit { message: String, trace: Vec<String> },
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) | CliError::Document(_) | CliError::Failed(_) => exit::FAILURE,
            CliError::NotACycle(_) => exit::NOT_A_CYCLE,
            CliError::MissingEmbedding(_) => exit::MISSING_EMBEDDING,
            CliError::Degeneracy { .. } => exit::DEGENERACY,
            CliError::UnsupportedDimension(_) => exit::UNSUPPORTED_DIMENSION,
            CliError::UnknownExample(_) => exit::UNKNOWN_EXAMPLE,
            CliError::ResourceLimit { .. } => exit::RESOURCE_LIMIT,
        }
    }

    /// Pipeline log accompanying degeneracy and budget failures.
    pub fn trace(&self) -> &[String] {
        match self {
            CliError::Degeneracy { trace, .. } | CliError::ResourceLimit { trace, .. } => trace,
            _ => &[],
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<FlexError> for CliError {
    fn from(e: FlexError) -> Self {
        match e {
            FlexError::UnknownExample(name) => CliError::UnknownExample(name),
            other => CliError::Failed(other.to_string()),
        }
    }
}

fn doc_err(e: impl std::fmt::Display) -> CliError {
    CliError::Document(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "bellows", version, about = "Generalized volumes, Sabitov relations and flex checks for cycle polyhedra")]
pub struct Cli {
    /// Master seed for the winding oracle and the flexible constructors.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Stream pipeline progress to stderr.
    #[arg(long, short, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Symbolic,
    Specialized,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact generalized volume of an embedded cycle.
    Volume {
        input: PathBuf,
        /// Also estimate the volume from this many winding-number samples.
        #[arg(long)]
        oracle: Option<usize>,
    },
    /// Polynomial relation between the volume and the squared edge lengths.
    Sabitov {
        input: PathBuf,
        /// Defaults to specialized when the document carries lengths or an embedding.
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        /// Check exactly that the embedding's volume is a root.
        #[arg(long)]
        verify: bool,
        /// Write the relation document here.
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Wall-clock budget in seconds.
        #[arg(long, default_value_t = 600.0)]
        budget: f64,
    },
    /// Trace a flex and check that the volume stays constant.
    Flex {
        /// Cycle document or example name.
        input: String,
        #[arg(long, default_value_t = 50)]
        steps: usize,
        #[arg(long, default_value_t = 0.02)]
        step_size: f64,
        /// Corrector tolerance on squared edge lengths.
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        /// Write the trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Recompute residuals and volume drift of a saved trace.
    CheckTrace {
        trace: PathBuf,
        #[arg(long, default_value_t = RESIDUAL_TOL)]
        residual_tol: f64,
        #[arg(long, default_value_t = DRIFT_TOL)]
        drift_tol: f64,
    },
    /// Built-in examples.
    Zoo {
        #[command(subcommand)]
        action: ZooAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum ZooAction {
    List,
    Emit {
        name: String,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

/// Parses `p/q`, integers and finite decimals such as `-0.125`.
pub fn parse_rational(s: &str) -> Result<BigRational, CliError> {
    let t = s.trim();
    let bad = || CliError::Document(format!("not a rational: {s:?}"));
    if let Some((int, frac)) = t.split_once('.') {
        let neg = int.starts_with('-');
        let digits = format!("{}{}", int.trim_start_matches(['-', '+']), frac);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let num = BigInt::from_str(&digits).map_err(|_| bad())?;
        let den = num_traits::pow(BigInt::from(10), frac.len());
        let x = BigRational::new(num, den);
        return Ok(if neg { -x } else { x });
    }
    let x = BigRational::from_str(t).map_err(|_| bad())?;
    Ok(x)
}

pub fn format_rational(x: &BigRational) -> String {
    x.to_string()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleTerm {
    pub coefficient: i64,
    pub vertices: Vec<Vertex>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleDocument {
    pub v: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub n: usize,
    pub terms: Vec<CycleTerm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<BTreeMap<Vertex, Vec<String>>>,
    /// Squared edge lengths keyed `"u-v"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lengths: Option<BTreeMap<String, String>>,
}

fn chain_terms(z: &Chain) -> Vec<CycleTerm> {
    z.terms().map(|(vs, q)| CycleTerm { coefficient: q, vertices: vs.to_vec() }).collect()
}

fn chain_from_terms(n: usize, terms: &[CycleTerm]) -> Result<Chain, CliError> {
    if n == 0 {
        return Err(doc_err("n must be positive"));
    }
    Chain::from_terms(n - 1, terms.iter().map(|t| (t.coefficient, t.vertices.as_slice()))).map_err(doc_err)
}

fn check_version(v: u32) -> Result<(), CliError> {
    if v != SCHEMA_VERSION {
        return Err(doc_err(format!("unsupported schema version {v}")));
    }
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(doc_err)?;
    fs::write(path, text + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

impl CycleDocument {
    pub fn new(n: usize, z: &Chain) -> Self {
        CycleDocument { v: SCHEMA_VERSION, name: None, n, terms: chain_terms(z), embedding: None, lengths: None }
    }

    pub fn from_example(ex: &ExampleSpec) -> Self {
        let exact = match &ex.embedding {
            ZooEmbedding::Exact(p) => p.clone(),
            ZooEmbedding::Float(p) => p.map(|x| rational_from_f64(*x).unwrap_or_else(BigRational::zero)),
        };
        let mut doc = CycleDocument::new(ex.n, &ex.cycle).with_embedding(&exact);
        doc.name = Some(ex.name.clone());
        doc
    }

    pub fn with_embedding(mut self, p: &ExactEmbedding) -> Self {
        self.embedding = Some(p.points().map(|(v, x)| (v, x.iter().map(format_rational).collect())).collect());
        self
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let doc: CycleDocument = serde_json::from_str(text).map_err(doc_err)?;
        check_version(doc.v)?;
        doc.chain()?;
        doc.exact_embedding()?;
        doc.length_assignment()?;
        Ok(doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents serialize")
    }

    pub fn chain(&self) -> Result<Chain, CliError> {
        chain_from_terms(self.n, &self.terms)
    }

    pub fn exact_embedding(&self) -> Result<Option<ExactEmbedding>, CliError> {
        let Some(points) = &self.embedding else { return Ok(None) };
        let mut p = ExactEmbedding::new(self.n);
        for (&v, coords) in points {
            let x = coords.iter().map(|c| parse_rational(c)).collect::<Result<Vec<_>, _>>()?;
            p.insert(v, x).map_err(doc_err)?;
        }
        Ok(Some(p))
    }

    pub fn length_assignment(&self) -> Result<Option<Assignment>, CliError> {
        let Some(lengths) = &self.lengths else { return Ok(None) };
        let mut a = Assignment::new();
        for (key, value) in lengths {
            let bad = || doc_err(format!("length key {key:?} is not of the form \"u-v\""));
            let (u, v) = key.split_once('-').ok_or_else(bad)?;
            let (u, v): (Vertex, Vertex) = (u.trim().parse().map_err(|_| bad())?, v.trim().parse().map_err(|_| bad())?);
            a.insert(edge_var(u, v), parse_rational(value)?);
        }
        Ok(Some(a))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationTerm {
    pub coefficient: String,
    pub monomial: BTreeMap<String, u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    pub seconds: f64,
    /// Choices of simplex, cycle and branch made by the pipeline.
    #[serde(default)]
    pub choices: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationDocument {
    pub v: u32,
    pub variable: String,
    pub n: usize,
    pub degree: usize,
    pub terms: Vec<RelationTerm>,
    pub multiplier: Multiplier,
    pub provenance: Provenance,
}

impl RelationDocument {
    pub fn new(rel: &SabitovRelation, provenance: Provenance) -> Self {
        let terms = rel
            .as_poly()
            .terms()
            .map(|(m, c)| RelationTerm {
                coefficient: format_rational(c),
                monomial: m.pairs().iter().map(|&(v, e)| (v.symbol().to_string(), e)).collect(),
            })
            .collect();
        RelationDocument {
            v: SCHEMA_VERSION,
            variable: VarSymbol::Volume.to_string(),
            n: rel.n,
            degree: rel.degree(),
            terms,
            multiplier: rel.multiplier.clone(),
            provenance,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let doc: RelationDocument = serde_json::from_str(text).map_err(doc_err)?;
        check_version(doc.v)?;
        doc.relation()?;
        Ok(doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents serialize")
    }

    pub fn relation(&self) -> Result<SabitovRelation, CliError> {
        if self.variable != VarSymbol::Volume.to_string() {
            return Err(doc_err(format!("unknown relation variable {:?}", self.variable)));
        }
        let mut poly = MultiPoly::zero();
        for t in &self.terms {
            let pairs = t
                .monomial
                .iter()
                .map(|(s, &e)| Ok((Var::from(VarSymbol::from_str(s).map_err(doc_err)?), e)))
                .collect::<Result<Vec<_>, CliError>>()?;
            poly.add_term(Monomial::from_pairs(pairs), parse_rational(&t.coefficient)?);
        }
        SabitovRelation::from_parts(self.n, &poly, self.multiplier.clone()).map_err(doc_err)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub t: f64,
    pub coordinates: BTreeMap<Vertex, Vec<f64>>,
    pub residual: f64,
    pub volume: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceDocument {
    pub v: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub n: usize,
    pub terms: Vec<CycleTerm>,
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<String>,
    pub steps: Vec<TraceStep>,
}

impl TraceDocument {
    pub fn new(name: Option<String>, n: usize, z: &Chain, trace: &FlexTrace) -> Self {
        let steps = (0..trace.len())
            .map(|i| TraceStep {
                t: trace.parameters[i],
                coordinates: trace.embeddings[i].points().map(|(v, x)| (v, x.to_vec())).collect(),
                residual: trace.residuals[i],
                volume: trace.volumes[i],
            })
            .collect();
        let (status, truncation) = match &trace.status {
            TraceStatus::Completed => ("completed".to_string(), None),
            TraceStatus::Truncated { step, reason } => ("truncated".to_string(), Some(format!("step {step}: {reason}"))),
        };
        TraceDocument { v: SCHEMA_VERSION, name, n, terms: chain_terms(z), status, truncation, steps }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let doc: TraceDocument = serde_json::from_str(text).map_err(doc_err)?;
        check_version(doc.v)?;
        doc.trace()?;
        Ok(doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents serialize")
    }

    pub fn chain(&self) -> Result<Chain, CliError> {
        chain_from_terms(self.n, &self.terms)
    }

    pub fn trace(&self) -> Result<FlexTrace, CliError> {
        let embeddings = self
            .steps
            .iter()
            .map(|s| FloatEmbedding::from_points(self.n, s.coordinates.iter().map(|(&v, x)| (v, x.clone()))))
            .collect::<Result<Vec<_>, _>>()
            .map_err(doc_err)?;
        let status = match (self.status.as_str(), &self.truncation) {
            ("completed", _) => TraceStatus::Completed,
            ("truncated", reason) => TraceStatus::Truncated { step: self.steps.len(), reason: reason.clone().unwrap_or_default() },
            (other, _) => return Err(doc_err(format!("unknown trace status {other:?}"))),
        };
        Ok(FlexTrace {
            parameters: self.steps.iter().map(|s| s.t).collect(),
            residuals: self.steps.iter().map(|s| s.residual).collect(),
            volumes: self.steps.iter().map(|s| s.volume).collect(),
            embeddings,
            status,
        })
    }
}

fn require_cycle(z: &Chain) -> Result<(), CliError> {
    let b = z.boundary().map_err(doc_err)?;
    let first = b.terms().next().map(|(simplex, q)| (simplex.to_vec(), q));
    match first {
        None => Ok(()),
        Some((simplex, q)) => Err(CliError::NotACycle(format!(
            "input is not a cycle: its boundary has coefficient {q} on the simplex {simplex:?}"
        ))),
    }
}

fn load_cycle(path: &Path) -> Result<CycleDocument, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    CycleDocument::from_json(&text)
}

fn sabitov_error(e: SabitovError) -> CliError {
    match e {
        SabitovError::UnsupportedDimension(n) => CliError::UnsupportedDimension(n),
        SabitovError::NotACycle => CliError::NotACycle("input is not a cycle".into()),
        SabitovError::IncompleteAssignment(u, v) => {
            CliError::MissingEmbedding(format!("no squared length for edge {u}-{v}"))
        }
        SabitovError::UnrecoverableDegeneracy { trace } => {
            CliError::Degeneracy { message: "every simplex and cycle choice degenerated".into(), trace }
        }
        SabitovError::Degenerate(msg) => CliError::Degeneracy { message: msg, trace: Vec::new() },
        SabitovError::BudgetExhausted { trace } => CliError::ResourceLimit { message: "time budget exhausted".into(), trace },
        SabitovError::ResourceLimit { detail, trace } => CliError::ResourceLimit { message: detail, trace },
        other => CliError::Failed(other.to_string()),
    }
}

/// Runs one parsed command, writing the report to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    if let Some(t) = cli.threads {
        // a second initialization (e.g. in-process tests) keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global();
    }
    match &cli.command {
        Command::Volume { input, oracle } => cmd_volume(input, *oracle, cli.seed, out),
        Command::Sabitov { input, mode, verify, output, budget } => {
            cmd_sabitov(input, *mode, *verify, output.as_deref(), *budget, cli.verbose, out)
        }
        Command::Flex { input, steps, step_size, tol, trace } => {
            let opts = TraceOptions { steps: *steps, step_size: *step_size, tol: *tol, ..TraceOptions::default() };
            cmd_flex(input, &opts, trace.as_deref(), cli.seed, cli.verbose, out)
        }
        Command::CheckTrace { trace, residual_tol, drift_tol } => cmd_check_trace(trace, *residual_tol, *drift_tol, out),
        Command::Zoo { action: ZooAction::List } => {
            for name in ZOO_NAMES {
                writeln!(out, "{name}")?;
            }
            Ok(())
        }
        Command::Zoo { action: ZooAction::Emit { name, output } } => {
            let doc = CycleDocument::from_example(&example_zoo(name, cli.seed)?);
            match output {
                Some(path) => {
                    write_json(path, &doc)?;
                    writeln!(out, "written = {}", path.display())?;
                }
                None => writeln!(out, "{}", doc.to_json())?,
            }
            Ok(())
        }
    }
}

fn cmd_volume(input: &Path, oracle: Option<usize>, seed: u64, out: &mut dyn Write) -> Result<(), CliError> {
    let doc = load_cycle(input)?;
    let z = doc.chain()?;
    require_cycle(&z)?;
    let p = doc.exact_embedding()?.ok_or_else(|| CliError::MissingEmbedding("document has no embedding".into()))?;
    let v = generalized_volume(&z, &p, None).map_err(doc_err)?;
    writeln!(out, "n = {}", doc.n)?;
    writeln!(out, "V = {}", format_rational(&v))?;
    writeln!(out, "V_float = {:e}", to_f64(&v))?;
    if let Some(samples) = oracle {
        let est = winding_volume(&z, &p.to_float(), samples, seed).map_err(doc_err)?;
        writeln!(out, "oracle = {:.6} ± {:.6}", est.estimate, est.standard_error)?;
        writeln!(out, "oracle_samples = {}", est.samples)?;
        writeln!(out, "oracle_skipped = {}", est.skipped)?;
    }
    Ok(())
}

fn cmd_sabitov(
    input: &Path,
    mode: Option<Mode>,
    verify: bool,
    output: Option<&Path>,
    budget: f64,
    verbose: bool,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let doc = load_cycle(input)?;
    if doc.n != 3 && doc.n != 4 {
        return Err(CliError::UnsupportedDimension(doc.n));
    }
    let z = doc.chain()?;
    require_cycle(&z)?;
    let embedding = doc.exact_embedding()?;
    let given = doc.length_assignment()?;
    let mode = mode.unwrap_or(if embedding.is_some() || given.is_some() { Mode::Specialized } else { Mode::Symbolic });
    let from_embedding = match &embedding {
        Some(p) => Some(assignment_from_embedding(&z, p).map_err(doc_err)?),
        None => None,
    };
    let pipeline_mode = match mode {
        Mode::Symbolic => PipelineMode::Symbolic,
        Mode::Specialized => {
            if from_embedding.is_none() && given.is_none() {
                return Err(CliError::MissingEmbedding("specialized mode needs lengths or an embedding".into()));
            }
            let mut a = from_embedding.clone().unwrap_or_default();
            a.extend(given.clone().unwrap_or_default());
            PipelineMode::Specialized(a)
        }
    };
    let options = PipelineOptions {
        deadline: Some(Instant::now() + Duration::from_secs_f64(budget.max(0.0))),
        verbose,
        ..PipelineOptions::default()
    };
    let start = Instant::now();
    let (rel, choices) = sabitov_relation_traced(&z, doc.n, &pipeline_mode, options).map_err(sabitov_error)?;
    let seconds = start.elapsed().as_secs_f64();
    let mode_name = match mode {
        Mode::Symbolic => "symbolic",
        Mode::Specialized => "specialized",
    };
    writeln!(out, "n = {}", doc.n)?;
    writeln!(out, "mode = {mode_name}")?;
    writeln!(out, "degree = {}", rel.degree())?;
    writeln!(out, "multiplier = {}", rel.multiplier)?;
    writeln!(out, "terms = {}", rel.as_poly().len())?;
    writeln!(out, "seconds = {seconds:.3}")?;
    if let Some(path) = output {
        let provenance = Provenance { mode: mode_name.into(), source: doc.name.clone(), seconds, choices };
        write_json(path, &RelationDocument::new(&rel, provenance))?;
        writeln!(out, "relation = {}", path.display())?;
    }
    if verify {
        let (Some(p), Some(lengths)) = (&embedding, &from_embedding) else {
            writeln!(out, "verify = skipped (no embedding)")?;
            return Ok(());
        };
        let v = generalized_volume(&z, p, None).map_err(doc_err)?;
        let ok = verify_root(&rel, &v, lengths).map_err(sabitov_error)?;
        writeln!(out, "V = {}", format_rational(&v))?;
        writeln!(out, "verify = {}", if ok { "PASS" } else { "FAIL" })?;
        if !ok {
            return Err(CliError::Failed("the embedding's volume is not a root of the relation".into()));
        }
    }
    Ok(())
}

fn cmd_flex(
    input: &str,
    opts: &TraceOptions,
    trace_path: Option<&Path>,
    seed: u64,
    verbose: bool,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let doc = if Path::new(input).is_file() {
        load_cycle(Path::new(input))?
    } else {
        CycleDocument::from_example(&example_zoo(input, seed)?)
    };
    let z = doc.chain()?;
    require_cycle(&z)?;
    let p = doc
        .exact_embedding()?
        .ok_or_else(|| CliError::MissingEmbedding("document has no embedding".into()))?
        .to_float();
    let space = flex_space(&z.support(), &p, opts.kernel_tol)?;
    writeln!(out, "flex_dimension = {}", space.dimension())?;
    if space.dimension() == 0 {
        writeln!(out, "verdict = rigid")?;
        return Ok(());
    }
    if verbose {
        eprintln!("tracing {} steps of size {}", opts.steps, opts.step_size);
    }
    let trace = trace_flex(&z, &p, opts)?;
    let residual = recompute_residual(&z, &trace)?;
    let bellows = bellows_check(&z, &trace)?;
    writeln!(out, "steps = {}", trace.accepted_steps())?;
    match &trace.status {
        TraceStatus::Completed => writeln!(out, "status = completed")?,
        TraceStatus::Truncated { step, reason } => {
            writeln!(out, "status = truncated")?;
            writeln!(out, "truncation = step {step}: {reason}")?;
        }
    }
    writeln!(out, "arclength = {:e}", trace.parameters.last().copied().unwrap_or(0.0))?;
    writeln!(out, "max_residual = {residual:e}")?;
    writeln!(out, "volume = {:e}", bellows.initial_volume)?;
    writeln!(out, "volume_drift = {:e}", bellows.max_drift)?;
    writeln!(out, "relative_drift = {:e}", bellows.relative_drift)?;
    let verdict = if trace.accepted_steps() == 0 {
        "infinitesimal-only"
    } else if residual < RESIDUAL_TOL && bellows.relative_drift < DRIFT_TOL {
        "constant-volume"
    } else {
        "volume-changed"
    };
    writeln!(out, "verdict = {verdict}")?;
    if let Some(path) = trace_path {
        write_json(path, &TraceDocument::new(doc.name.clone(), doc.n, &z, &trace))?;
        writeln!(out, "trace = {}", path.display())?;
    }
    Ok(())
}

fn cmd_check_trace(path: &Path, residual_tol: f64, drift_tol: f64, out: &mut dyn Write) -> Result<(), CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let doc = TraceDocument::from_json(&text)?;
    let z = doc.chain()?;
    require_cycle(&z)?;
    let trace = doc.trace()?;
    let residual = recompute_residual(&z, &trace)?;
    let bellows = bellows_check(&z, &trace)?;
    let mut mismatch: f64 = 0.0;
    for (p, recorded) in trace.embeddings.iter().zip(&trace.volumes) {
        mismatch = mismatch.max((generalized_volume(&z, p, None).map_err(doc_err)? - recorded).abs());
    }
    let pass = residual < residual_tol && bellows.relative_drift < drift_tol && mismatch < drift_tol;
    writeln!(out, "steps = {}", trace.accepted_steps())?;
    writeln!(out, "max_residual = {residual:e}")?;
    writeln!(out, "volume_drift = {:e}", bellows.max_drift)?;
    writeln!(out, "relative_drift = {:e}", bellows.relative_drift)?;
    writeln!(out, "recorded_volume_error = {mismatch:e}")?;
    writeln!(out, "result = {}", if pass { "PASS" } else { "FAIL" })?;
    if pass {
        Ok(())
    } else {
        Err(CliError::Failed("trace does not preserve edge lengths and volume".into()))
    }
}
