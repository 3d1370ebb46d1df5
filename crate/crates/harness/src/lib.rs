//! Seeded trial batches of both pipelines against the offline optimum.
//!
//! Trial `k` of every instance uses seed `base_seed + k`. Trials run in
//! parallel but rows are collected in `(instance, trial)` order and every
//! aggregate is a sequential fold over them, so output bytes depend only on
//! the configuration.

use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ownbm::edge_weighted::{EdgeError, EdgePipeline};
use ownbm::format::{self, ParseError};
use ownbm::generators::{GenError, GeneratorConfig};
use ownbm::oracle::{self, OracleConfig, OracleError};
use ownbm::vertex_weighted::{VertexError, VertexPipeline};
use ownbm::{Instance, WeightMode};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const TRIALS_FILE: &str = "trials.csv";
pub const REPORT_FILE: &str = "report.json";

/// Slack for the deterministic floors when weights are floating point.
pub const FLOOR_SLACK: f64 = 1e-9;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: ParseError },
    #[error(transparent)]
    Generator(#[from] GenError),
    #[error("{id}: {source}")]
    Oracle { id: String, source: OracleError },
    #[error(transparent)]
    Edge(#[from] EdgeError),
    #[error(transparent)]
    Vertex(#[from] VertexError),
    #[error("{id}: vertex pipeline needs a vertex-weighted instance")]
    ModeMismatch { id: String },
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("no instances given")]
    NoInstances,
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("invariant breach:\n{}", .0.join("\n"))]
    Breach(Vec<String>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Source {
    File(PathBuf),
    Gen(GeneratorConfig),
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::File(p) => write!(f, "{}", p.display()),
            Source::Gen(g) => write!(f, "{g}"),
        }
    }
}

impl Source {
    pub fn load(&self) -> Result<Instance, HarnessError> {
        match self {
            Source::File(path) => load_instance(path),
            Source::Gen(cfg) => Ok(cfg.generate()?),
        }
    }
}

pub fn load_instance(path: &Path) -> Result<Instance, HarnessError> {
    let text = fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.to_owned(),
        source,
    })?;
    format::parse(&text).map_err(|source| HarnessError::Parse {
        path: path.to_owned(),
        source,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PipelineKind {
    Edge,
    Vertex,
}

impl fmt::Display for PipelineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PipelineKind::Edge => "edge",
            PipelineKind::Vertex => "vertex",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PipelineChoice {
    Edge,
    Vertex,
    Both,
}

impl FromStr for PipelineChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "edge" => Ok(PipelineChoice::Edge),
            "vertex" => Ok(PipelineChoice::Vertex),
            "both" => Ok(PipelineChoice::Both),
            _ => Err(format!("unknown pipeline {s:?} (edge, vertex, both)")),
        }
    }
}

impl PipelineChoice {
    /// Pipelines to run on an instance of the given mode. The edge pipeline
    /// runs on vertex-weighted instances through the `w_i + w_j` reduction;
    /// the vertex pipeline only accepts vertex-weighted input.
    fn plan(self, mode: WeightMode) -> Vec<PipelineKind> {
        match (self, mode) {
            (PipelineChoice::Edge, _) => vec![PipelineKind::Edge],
            (PipelineChoice::Vertex, _) => vec![PipelineKind::Vertex],
            (PipelineChoice::Both, WeightMode::Edge) => vec![PipelineKind::Edge],
            (PipelineChoice::Both, WeightMode::Vertex) => vec![PipelineKind::Edge, PipelineKind::Vertex],
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub sources: Vec<Source>,
    pub pipeline: PipelineChoice,
    pub trials: u64,
    pub base_seed: u64,
    pub strict: bool,
    pub oracle: OracleConfig,
}

impl ExperimentConfig {
    pub fn new(sources: Vec<Source>, pipeline: PipelineChoice, trials: u64, base_seed: u64) -> Self {
        ExperimentConfig {
            sources,
            pipeline,
            trials,
            base_seed,
            strict: false,
            oracle: OracleConfig::auto(),
        }
    }
}

/// A ratio against OPT, or "undefined" when OPT is zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Ratio {
    Value(f64),
    Undefined,
}

impl Ratio {
    pub fn of(x: f64, opt: f64) -> Self {
        if opt > 0.0 {
            Ratio::Value(x / opt)
        } else {
            Ratio::Undefined
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Ratio::Value(v) => Some(v),
            Ratio::Undefined => None,
        }
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ratio::Value(v) => write!(f, "{v}"),
            Ratio::Undefined => f.write_str("undefined"),
        }
    }
}

impl FromStr for Ratio {
    type Err = std::num::ParseFloatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "undefined" => Ok(Ratio::Undefined),
            _ => s.parse().map(Ratio::Value),
        }
    }
}

impl Serialize for Ratio {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Ratio::Value(v) => s.serialize_f64(*v),
            Ratio::Undefined => s.serialize_str("undefined"),
        }
    }
}

impl<'de> Deserialize<'de> for Ratio {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Ratio::Value(v)),
            Raw::Text(t) if t == "undefined" => Ok(Ratio::Undefined),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("bad ratio {t:?}"))),
        }
    }
}

/// One CSV row. `semi_weight` is the weight of the semi-matching under the
/// instance objective; `half_weight` and `branch` are empty for edge runs;
/// `final_weight` is the matching (edge) or 3-matching (vertex) weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub instance_id: String,
    pub trial: u64,
    pub seed: u64,
    pub branch: Option<String>,
    pub semi_weight: f64,
    pub half_weight: Option<f64>,
    pub final_weight: f64,
    pub opt: f64,
    pub ratio: Ratio,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean: f64,
    pub std_error: f64,
    pub ratio_mean: Ratio,
    /// Edge runs: min semi-matching weight over OPT.
    pub min_semi_ratio: Ratio,
    /// Vertex runs: min 3-matching weight over half-weight.
    pub min_three_over_half: Option<Ratio>,
}

/// Recomputes the aggregates of one instance/pipeline unit from its rows.
pub fn aggregate(rows: &[TrialRow]) -> Aggregate {
    let count = rows.len() as f64;
    let opt = rows.first().map_or(0.0, |r| r.opt);
    let mean = rows.iter().map(|r| r.final_weight).sum::<f64>() / count;
    let var = if rows.len() > 1 {
        rows.iter().map(|r| (r.final_weight - mean).powi(2)).sum::<f64>() / (count - 1.0)
    } else {
        0.0
    };
    let min_semi = rows.iter().map(|r| r.semi_weight).fold(f64::INFINITY, f64::min);
    let vertex = rows.iter().all(|r| r.half_weight.is_some());
    let min_three_over_half = vertex.then(|| {
        rows.iter()
            .map(|r| Ratio::of(r.final_weight, r.half_weight.unwrap_or(0.0)))
            .fold(Ratio::Undefined, |acc, r| match (acc, r) {
                (Ratio::Value(a), Ratio::Value(b)) => Ratio::Value(a.min(b)),
                (Ratio::Undefined, x) | (x, Ratio::Undefined) => x,
            })
    });
    Aggregate {
        mean,
        std_error: (var / count).sqrt(),
        ratio_mean: Ratio::of(mean, opt),
        min_semi_ratio: Ratio::of(min_semi, opt),
        min_three_over_half,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitReport {
    pub instance_id: String,
    pub source: String,
    pub pipeline: PipelineKind,
    pub mode: WeightMode,
    pub n: usize,
    pub d: usize,
    pub edges: usize,
    pub opt: f64,
    pub trials: u64,
    #[serde(flatten)]
    pub aggregate: Aggregate,
    pub deadline_violations: usize,
    pub validation_failures: usize,
    pub floor_breaches: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub base_seed: u64,
    pub trials: u64,
    pub units: Vec<UnitReport>,
    #[serde(skip)]
    pub rows: Vec<TrialRow>,
}

impl ExperimentReport {
    pub fn deadline_violations(&self) -> usize {
        self.units.iter().map(|u| u.deadline_violations).sum()
    }

    /// Human-readable breaches; empty when every invariant held.
    pub fn breaches(&self) -> Vec<String> {
        let mut out = Vec::new();
        for u in &self.units {
            let id = &u.instance_id;
            if u.deadline_violations > 0 {
                out.push(format!("{id}: {} deadline violations", u.deadline_violations));
            }
            if u.validation_failures > 0 {
                out.push(format!("{id}: {} trials failed validation", u.validation_failures));
            }
            if u.floor_breaches > 0 {
                out.push(format!("{id}: {} trials below the deterministic floor", u.floor_breaches));
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn write_csv<W: io::Write>(&self, out: W) -> Result<(), HarnessError> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush().map_err(|source| HarnessError::Io {
            path: PathBuf::from(TRIALS_FILE),
            source,
        })?;
        Ok(())
    }

    /// Writes `report.json` and `trials.csv` into `dir`, creating it.
    pub fn write_to(&self, dir: &Path) -> Result<(), HarnessError> {
        let io_err = |path: &Path| {
            let path = path.to_owned();
            move |source| HarnessError::Io { path, source }
        };
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let report = dir.join(REPORT_FILE);
        fs::write(&report, self.to_json()).map_err(io_err(&report))?;
        let trials = dir.join(TRIALS_FILE);
        let file = fs::File::create(&trials).map_err(io_err(&trials))?;
        self.write_csv(io::BufWriter::new(file))
    }
}

pub fn read_rows(path: &Path) -> Result<Vec<TrialRow>, HarnessError> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

pub fn read_report(path: &Path) -> Result<ExperimentReport, HarnessError> {
    let text = fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.to_owned(),
        source,
    })?;
    Ok(serde_json::from_str(&text)?)
}

struct Outcome {
    row: TrialRow,
    deadline_violations: usize,
    valid: bool,
    floor_ok: bool,
}

fn edge_trials(inst: &Instance, id: &str, opt: f64, seeds: &[u64]) -> Result<Vec<Outcome>, HarnessError> {
    let reduced;
    let inst = match inst.mode {
        WeightMode::Edge => inst,
        WeightMode::Vertex => {
            reduced = oracle::reduce_to_edge_weighted(inst).map_err(|source| HarnessError::Oracle {
                id: id.to_owned(),
                source,
            })?;
            &reduced
        }
    };
    let pipeline = EdgePipeline::new(inst)?;
    seeds
        .par_iter()
        .enumerate()
        .map(|(k, &seed)| {
            let run = pipeline.run(seed)?;
            Ok(Outcome {
                deadline_violations: run.deadline_violations(inst.d),
                valid: pipeline.validate(&run).is_ok(),
                floor_ok: run.semi_weight >= 0.5 * opt - FLOOR_SLACK,
                row: TrialRow {
                    instance_id: id.to_owned(),
                    trial: k as u64,
                    seed,
                    branch: None,
                    semi_weight: run.semi_weight,
                    half_weight: None,
                    final_weight: run.matching_weight,
                    opt,
                    ratio: Ratio::of(run.matching_weight, opt),
                },
            })
        })
        .collect()
}

fn vertex_trials(inst: &Instance, id: &str, opt: f64, seeds: &[u64]) -> Result<Vec<Outcome>, HarnessError> {
    if inst.mode != WeightMode::Vertex {
        return Err(HarnessError::ModeMismatch { id: id.to_owned() });
    }
    let pipeline = VertexPipeline::new(inst)?;
    seeds
        .par_iter()
        .enumerate()
        .map(|(k, &seed)| {
            let run = pipeline.run(seed)?;
            let g = pipeline.graph();
            let semi_weight: f64 = run
                .semi
                .entries
                .iter()
                .map(|p| g.vertex_weight(p.origin) + g.vertex_weight(p.terminal))
                .sum();
            Ok(Outcome {
                deadline_violations: run.deadline_violations(inst.d),
                valid: pipeline.validate(&run).is_ok(),
                floor_ok: run.three_weight >= run.half_weight,
                row: TrialRow {
                    instance_id: id.to_owned(),
                    trial: k as u64,
                    seed,
                    branch: Some(run.branch.to_string()),
                    semi_weight,
                    half_weight: Some(run.half_weight),
                    final_weight: run.three_weight,
                    opt,
                    ratio: Ratio::of(run.three_weight, opt),
                },
            })
        })
        .collect()
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport, HarnessError> {
    if cfg.trials == 0 {
        return Err(HarnessError::NoTrials);
    }
    if cfg.sources.is_empty() {
        return Err(HarnessError::NoInstances);
    }
    let seeds: Vec<u64> = (0..cfg.trials).map(|k| cfg.base_seed.wrapping_add(k)).collect();
    let mut units = Vec::new();
    let mut rows = Vec::new();
    for (index, source) in cfg.sources.iter().enumerate() {
        let inst = source.load()?;
        let base_id = format!("i{index:03}");
        let opt = oracle::opt(&inst, &cfg.oracle)
            .map_err(|source| HarnessError::Oracle {
                id: base_id.clone(),
                source,
            })?
            .weight;
        let plan = cfg.pipeline.plan(inst.mode);
        for &kind in &plan {
            let id = if plan.len() > 1 {
                format!("{base_id}/{kind}")
            } else {
                base_id.clone()
            };
            let outcomes = match kind {
                PipelineKind::Edge => edge_trials(&inst, &id, opt, &seeds)?,
                PipelineKind::Vertex => vertex_trials(&inst, &id, opt, &seeds)?,
            };
            let unit_rows: Vec<TrialRow> = outcomes.iter().map(|o| o.row.clone()).collect();
            units.push(UnitReport {
                instance_id: id,
                source: source.to_string(),
                pipeline: kind,
                mode: inst.mode,
                n: inst.n,
                d: inst.d,
                edges: inst.edges.len(),
                opt,
                trials: cfg.trials,
                aggregate: aggregate(&unit_rows),
                deadline_violations: outcomes.iter().map(|o| o.deadline_violations).sum(),
                validation_failures: outcomes.iter().filter(|o| !o.valid).count(),
                floor_breaches: outcomes.iter().filter(|o| !o.floor_ok).count(),
            });
            rows.extend(unit_rows);
        }
    }
    let report = ExperimentReport {
        base_seed: cfg.base_seed,
        trials: cfg.trials,
        units,
        rows,
    };
    if cfg.strict {
        let breaches = report.breaches();
        if !breaches.is_empty() {
            return Err(HarnessError::Breach(breaches));
        }
    }
    Ok(report)
}

fn cell(r: Ratio) -> String {
    match r {
        Ratio::Value(v) => format!("{v:.4}"),
        Ratio::Undefined => "undefined".into(),
    }
}

/// Plain-text table of a report's units.
pub fn render_table(report: &ExperimentReport) -> String {
    let header = [
        "instance", "pipeline", "n", "d", "|E|", "OPT", "trials", "mean", "se", "mean/OPT", "min floor",
        "deadline",
    ];
    let mut lines: Vec<Vec<String>> = vec![header.iter().map(|s| s.to_string()).collect()];
    for u in &report.units {
        let a = &u.aggregate;
        let floor = match u.pipeline {
            PipelineKind::Edge => cell(a.min_semi_ratio),
            PipelineKind::Vertex => a.min_three_over_half.map_or_else(|| "-".into(), cell),
        };
        lines.push(vec![
            u.instance_id.clone(),
            u.pipeline.to_string(),
            u.n.to_string(),
            u.d.to_string(),
            u.edges.to_string(),
            format!("{}", u.opt),
            u.trials.to_string(),
            format!("{:.4}", a.mean),
            format!("{:.4}", a.std_error),
            cell(a.ratio_mean),
            floor,
            u.deadline_violations.to_string(),
        ]);
    }
    let widths: Vec<usize> = (0..header.len())
        .map(|c| lines.iter().map(|l| l[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for (k, line) in lines.iter().enumerate() {
        let cells: Vec<String> = line
            .iter()
            .zip(&widths)
            .map(|(s, &w)| format!("{s:>w$}"))
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
        if k == 0 {
            let total = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
            out.push_str(&"-".repeat(total));
            out.push('\n');
        }
    }
    out
}
