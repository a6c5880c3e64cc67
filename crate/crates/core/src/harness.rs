//! Feature loading, multi-round selection runs and their reports.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::baselines::{kcenters_select, kmedoids_with_fixed, random_select};
use crate::distances::{compute_distance_matrix, DistanceMatrix, FeatureMatrix, Metric};
use crate::error::{Error, Result};
use crate::gbd::{select_coreset, BoundsTrace, GbdConfig, GbdStatus};
use crate::oracle::brute_force_optimum;
use crate::transport::{wasserstein, Selection};

const FMAT_MAGIC: &[u8; 4] = b"FMAT";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    #[default]
    Csv,
    Fmat,
}

impl FromStr for InputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(InputFormat::Csv),
            "fmat" => Ok(InputFormat::Fmat),
            other => Err(Error::Config(format!("unknown input format '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    #[default]
    Gbd,
    Kmedoids,
    Kcenters,
    Random,
    Oracle,
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gbd" => Ok(Strategy::Gbd),
            "kmedoids" => Ok(Strategy::Kmedoids),
            "kcenters" => Ok(Strategy::Kcenters),
            "random" => Ok(Strategy::Random),
            "oracle" => Ok(Strategy::Oracle),
            other => Err(Error::Config(format!("unknown strategy '{other}'"))),
        }
    }
}

/// Heuristic that provides the starting selection for a decomposition run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WarmStart {
    #[default]
    Kcenters,
    Kmedoids,
    Random,
}

impl FromStr for WarmStart {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kcenters" => Ok(WarmStart::Kcenters),
            "kmedoids" => Ok(WarmStart::Kmedoids),
            "random" => Ok(WarmStart::Random),
            other => Err(Error::Config(format!("unknown warm start '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub input: PathBuf,
    pub format: InputFormat,
    pub metric: Metric,
    pub strategy: Strategy,
    /// Points added in each round.
    pub rounds: Vec<usize>,
    pub gbd: GbdConfig,
    pub warm_start: WarmStart,
    /// Per-round limit for the decomposition; by default the total limit is split evenly over the
    /// rounds still to run.
    pub round_time_limit_s: Option<f64>,
    pub out_dir: Option<PathBuf>,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input: PathBuf::new(),
            format: InputFormat::Csv,
            metric: Metric::Euclidean,
            strategy: Strategy::Gbd,
            rounds: Vec::new(),
            gbd: GbdConfig::default(),
            warm_start: WarmStart::Kcenters,
            round_time_limit_s: None,
            out_dir: None,
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.rounds.is_empty() || self.rounds.contains(&0) {
            return Err(Error::Config("round budgets must be positive and non-empty".into()));
        }
        let total: usize = self.rounds.iter().sum();
        if total > n {
            return Err(Error::Config(format!("cumulative budget {total} exceeds the pool size {n}")));
        }
        if let Some(t) = self.round_time_limit_s {
            if !(t >= 0.0) {
                return Err(Error::Config("round time limit must be non-negative".into()));
            }
        }
        self.gbd.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundReport {
    pub round: usize,
    /// Cumulative number of selected points after this round.
    pub budget: usize,
    pub selected: Vec<usize>,
    pub wasserstein: f64,
    pub elapsed_s: f64,
    pub status: String,
    #[serde(skip)]
    pub trace: Option<BoundsTrace>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub rounds: Vec<RoundReport>,
    pub config_echo: serde_json::Value,
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Writes `report.json` and one `trace_round<r>.csv` per round that produced a trace.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("report.json"), self.to_json()? + "\n")?;
        for r in &self.rounds {
            if let Some(trace) = &r.trace {
                fs::write(dir.join(format!("trace_round{}.csv", r.round)), trace.to_csv())?;
            }
        }
        Ok(())
    }
}

fn parse_error(location: String, message: impl Into<String>) -> Error {
    Error::Parse { location, message: message.into() }
}

/// Comma-separated samples, one per line. A first line that does not parse as numbers is taken as
/// a header.
pub fn parse_csv(text: &str) -> Result<FeatureMatrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: Vec<std::result::Result<f64, _>> = fields.iter().map(|f| f.parse::<f64>()).collect();
        if let Some(col) = parsed.iter().position(|p| p.is_err()) {
            if rows.is_empty() && lineno == first_content_line(text) {
                continue;
            }
            return Err(parse_error(
                format!("line {}, column {}", lineno + 1, col + 1),
                format!("'{}' is not a number", fields[col]),
            ));
        }
        let values: Vec<f64> = parsed.into_iter().map(|p| p.expect("checked above")).collect();
        if let Some(first) = rows.first() {
            if first.len() != values.len() {
                return Err(Error::Shape(format!(
                    "line {} has {} fields, expected {}",
                    lineno + 1,
                    values.len(),
                    first.len()
                )));
            }
        }
        rows.push(values);
    }
    if rows.is_empty() {
        return Err(Error::Shape("no data rows".into()));
    }
    FeatureMatrix::from_rows(&rows)
}

fn first_content_line(text: &str) -> usize {
    text.lines().position(|l| !l.trim().is_empty()).unwrap_or(0)
}

/// `FMAT` magic, little-endian u32 `N` and `d`, then `N*d` little-endian f32 values row-major.
pub fn parse_fmat(bytes: &[u8]) -> Result<FeatureMatrix> {
    if bytes.len() < 12 {
        return Err(parse_error(format!("byte {}", bytes.len()), "truncated header"));
    }
    if &bytes[..4] != FMAT_MAGIC {
        return Err(parse_error("byte 0".into(), "missing FMAT magic"));
    }
    let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes")) as usize;
    let (n, dim) = (word(4), word(8));
    if n == 0 || dim == 0 {
        return Err(Error::Shape(format!("header declares {n} x {dim}")));
    }
    let expected = n
        .checked_mul(dim)
        .and_then(|c| c.checked_mul(4))
        .and_then(|c| c.checked_add(12))
        .ok_or_else(|| Error::Shape("header dimensions overflow".into()))?;
    if bytes.len() != expected {
        return Err(parse_error(
            format!("byte {}", bytes.len().min(expected)),
            format!("expected {expected} bytes for {n} x {dim}, found {}", bytes.len()),
        ));
    }
    let values =
        bytes[12..].chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")) as f64).collect();
    FeatureMatrix::new(n, dim, values)
}

pub fn fmat_bytes(features: &FeatureMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + 4 * features.values().len());
    out.extend_from_slice(FMAT_MAGIC);
    out.extend_from_slice(&(features.n_points() as u32).to_le_bytes());
    out.extend_from_slice(&(features.dim() as u32).to_le_bytes());
    for &v in features.values() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

pub fn load_features(path: &Path, format: InputFormat) -> Result<FeatureMatrix> {
    match format {
        InputFormat::Csv => parse_csv(&fs::read_to_string(path)?),
        InputFormat::Fmat => parse_fmat(&fs::read(path)?),
    }
}

/// Exact transport distance of the given index set.
pub fn evaluate_selection(dist: &DistanceMatrix, indices: &[usize]) -> Result<f64> {
    let sel = Selection::from_indices(dist.n(), indices)?;
    Ok(wasserstein(dist, &sel)?.value)
}

/// Loads the input named by `config` and runs every round.
pub fn run_rounds(config: &RunConfig) -> Result<Report> {
    let features = load_features(&config.input, config.format)?;
    let dist = compute_distance_matrix(&features, config.metric)?;
    run_rounds_on(&dist, config)
}

/// Runs every round on a precomputed distance matrix. Each round keeps all earlier selections.
/// When an output directory is configured the report is written after every round, so a failing
/// round leaves the completed ones on disk.
pub fn run_rounds_on(dist: &DistanceMatrix, config: &RunConfig) -> Result<Report> {
    config.validate(dist.n())?;
    let mut report = Report { rounds: Vec::new(), config_echo: serde_json::to_value(config)? };
    let started = Instant::now();
    let mut fixed: Vec<usize> = Vec::new();
    let mut cumulative = 0;

    for (r, &added) in config.rounds.iter().enumerate() {
        cumulative += added;
        let round_seed = config.seed.wrapping_add(r as u64);
        let time_limit = config.round_time_limit_s.unwrap_or_else(|| {
            let left = (config.gbd.total_time_limit_s - started.elapsed().as_secs_f64()).max(0.0);
            left / (config.rounds.len() - r) as f64
        });
        let round_started = Instant::now();
        let outcome = run_round(dist, config, cumulative, &fixed, round_seed, time_limit);
        let (sel, value, status, trace) = match outcome {
            Ok(v) => v,
            Err(e) => {
                if let Some(dir) = &config.out_dir {
                    report.write(dir)?;
                }
                return Err(e);
            }
        };
        fixed = sel.indices().to_vec();
        report.rounds.push(RoundReport {
            round: r + 1,
            budget: cumulative,
            selected: sel.indices().to_vec(),
            wasserstein: value,
            elapsed_s: round_started.elapsed().as_secs_f64(),
            status,
            trace,
        });
        if let Some(dir) = &config.out_dir {
            report.write(dir)?;
        }
    }
    Ok(report)
}

type RoundOutcome = (Selection, f64, String, Option<BoundsTrace>);

fn run_round(
    dist: &DistanceMatrix,
    config: &RunConfig,
    budget: usize,
    fixed: &[usize],
    seed: u64,
    time_limit: f64,
) -> Result<RoundOutcome> {
    let heuristic = |sel: Selection| -> Result<RoundOutcome> {
        let value = wasserstein(dist, &sel)?.value;
        Ok((sel, value, "heuristic".into(), None))
    };
    match config.strategy {
        Strategy::Kmedoids => heuristic(kmedoids_with_fixed(dist, budget, fixed, seed)?.0),
        Strategy::Kcenters => heuristic(kcenters_select(dist, budget, fixed, seed)?),
        Strategy::Random => heuristic(random_select(dist.n(), budget, fixed, seed)?),
        Strategy::Oracle => {
            let r = brute_force_optimum(dist, budget, fixed, false)?;
            Ok((r.sel_star, r.w_star, "optimal".into(), None))
        }
        Strategy::Gbd => {
            let warm = match config.warm_start {
                WarmStart::Kcenters => kcenters_select(dist, budget, fixed, seed)?,
                WarmStart::Kmedoids => kmedoids_with_fixed(dist, budget, fixed, seed)?.0,
                WarmStart::Random => random_select(dist.n(), budget, fixed, seed)?,
            };
            let gbd = GbdConfig { total_time_limit_s: time_limit, seed, ..config.gbd.clone() };
            let r = select_coreset(dist, budget, fixed, &warm, &gbd)?;
            let status = match r.status {
                GbdStatus::Converged => "converged",
                GbdStatus::TimeLimit => "time_limit",
            };
            Ok((r.best, r.best_value, status.into(), Some(r.trace)))
        }
    }
}
