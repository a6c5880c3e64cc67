use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;
use wass_coreset::baselines::{kcenters_select, kmedoids_with_fixed, random_select};
use wass_coreset::cuts::CutMode;
use wass_coreset::{
    brute_force_optimum, compute_distance_matrix, evaluate_selection, load_features, run_rounds, DistanceMatrix,
    InputFormat, Metric, RunConfig, Strategy, WarmStart,
};

#[derive(Parser)]
#[command(name = "wcoreset", version, about = "Minimum-Wasserstein core-set selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one or more selection rounds and write a report.
    Select(SelectArgs),
    /// Transport distance of a given selection.
    Eval(EvalArgs),
    /// Exhaustive optimum for small pools.
    Oracle(OracleArgs),
    /// Single-shot heuristic selection.
    Baseline(BaselineArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Feature file: one sample per row.
    #[arg(long)]
    input: Option<PathBuf>,
    /// csv or fmat.
    #[arg(long)]
    format: Option<InputFormat>,
    /// euclidean or cosine.
    #[arg(long)]
    metric: Option<Metric>,
}

impl InputArgs {
    fn distances(&self) -> Result<DistanceMatrix> {
        let path = self.input.as_deref().context("--input is required")?;
        let format = self.format.unwrap_or_else(|| guess_format(path));
        let features = load_features(path, format).with_context(|| format!("loading {}", path.display()))?;
        Ok(compute_distance_matrix(&features, self.metric.unwrap_or(Metric::Euclidean))?)
    }
}

fn guess_format(path: &Path) -> InputFormat {
    match path.extension().and_then(|e| e.to_str()) {
        Some("fmat") => InputFormat::Fmat,
        _ => InputFormat::Csv,
    }
}

fn parse_list(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<usize>().with_context(|| format!("'{t}' is not a non-negative integer")))
        .collect()
}

#[derive(Args)]
struct SelectArgs {
    /// JSON run configuration; flags given on the command line override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    input: InputArgs,
    /// Single-round budget.
    #[arg(long, conflicts_with = "rounds")]
    budget: Option<usize>,
    /// Comma-separated points added per round, e.g. 50,50,100.
    #[arg(long)]
    rounds: Option<String>,
    /// gbd, kmedoids, kcenters, random or oracle.
    #[arg(long)]
    strategy: Option<Strategy>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Total decomposition time in seconds, shared by the rounds.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Fixed decomposition time per round in seconds.
    #[arg(long)]
    round_time_limit: Option<f64>,
    #[arg(long)]
    master_time_limit: Option<f64>,
    #[arg(long)]
    master_gap: Option<f64>,
    #[arg(long)]
    beta_plus: Option<f64>,
    #[arg(long)]
    beta_minus: Option<f64>,
    /// Disable the enhanced optimality cuts.
    #[arg(long)]
    no_eoc: bool,
    /// Enable the local-branching pruning constraints.
    #[arg(long)]
    pruning: bool,
    /// corrected or paper-literal.
    #[arg(long)]
    cut_mode: Option<CutMode>,
    /// kcenters, kmedoids or random.
    #[arg(long)]
    warm_start: Option<WarmStart>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for report.json and the bound traces.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl SelectArgs {
    fn run_config(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => RunConfig::from_json_file(path).with_context(|| format!("reading {}", path.display()))?,
            None => RunConfig::default(),
        };
        if let Some(input) = &self.input.input {
            c.input = input.clone();
            c.format = guess_format(input);
        }
        if let Some(f) = self.input.format {
            c.format = f;
        }
        if let Some(m) = self.input.metric {
            c.metric = m;
        }
        if let Some(b) = self.budget {
            c.rounds = vec![b];
        }
        if let Some(r) = &self.rounds {
            c.rounds = parse_list(r)?;
        }
        if let Some(s) = self.strategy {
            c.strategy = s;
        }
        if let Some(w) = self.warm_start {
            c.warm_start = w;
        }
        if let Some(s) = self.seed {
            c.seed = s;
            c.gbd.seed = s;
        }
        if let Some(t) = self.round_time_limit {
            c.round_time_limit_s = Some(t);
        }
        if let Some(o) = &self.out {
            c.out_dir = Some(o.clone());
        }
        let g = &mut c.gbd;
        let overrides = [
            (self.epsilon, &mut g.epsilon),
            (self.time_limit, &mut g.total_time_limit_s),
            (self.master_time_limit, &mut g.master_time_limit_s),
            (self.master_gap, &mut g.master_gap_tol),
            (self.beta_plus, &mut g.beta_plus),
            (self.beta_minus, &mut g.beta_minus),
        ];
        for (flag, slot) in overrides {
            if let Some(v) = flag {
                *slot = v;
            }
        }
        if self.no_eoc {
            g.use_eoc = false;
        }
        if self.pruning {
            g.use_pruning = true;
        }
        if let Some(m) = self.cut_mode {
            g.cut_mode = m;
        }
        if c.input.as_os_str().is_empty() {
            bail!("an input file is required (--input or the config file)");
        }
        Ok(c)
    }
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Comma-separated indices.
    #[arg(long, required_unless_present = "report")]
    indices: Option<String>,
    /// Evaluate every round of a report.json instead.
    #[arg(long, conflicts_with = "indices")]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    budget: usize,
    /// Comma-separated indices that must be selected.
    #[arg(long, default_value = "")]
    fixed: String,
}

#[derive(Args)]
struct BaselineArgs {
    #[command(flatten)]
    input: InputArgs,
    /// kmedoids, kcenters or random.
    #[arg(long)]
    strategy: Strategy,
    #[arg(long)]
    budget: usize,
    #[arg(long, default_value = "")]
    fixed: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Select(args) => {
            let config = args.run_config()?;
            let report = run_rounds(&config)?;
            println!("{}", report.to_json()?);
        }
        Command::Eval(args) => {
            let dist = args.input.distances()?;
            if let Some(path) = &args.report {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                let report: wass_coreset::Report = serde_json::from_str(&text)?;
                let rows: Vec<_> = report
                    .rounds
                    .iter()
                    .map(|r| {
                        let w = evaluate_selection(&dist, &r.selected)?;
                        Ok(json!({"round": r.round, "wasserstein": w, "reported": r.wasserstein}))
                    })
                    .collect::<Result<_>>()?;
                println!("{}", serde_json::to_string_pretty(&rows)?);
            } else {
                let indices = parse_list(args.indices.as_deref().unwrap_or_default())?;
                println!("{}", json!({"wasserstein": evaluate_selection(&dist, &indices)?}));
            }
        }
        Command::Oracle(args) => {
            let dist = args.input.distances()?;
            let r = brute_force_optimum(&dist, args.budget, &parse_list(&args.fixed)?, false)?;
            println!("{}", json!({"wasserstein": r.w_star, "selected": r.sel_star.indices()}));
        }
        Command::Baseline(args) => {
            let dist = args.input.distances()?;
            let fixed = parse_list(&args.fixed)?;
            let sel = match args.strategy {
                Strategy::Kmedoids => kmedoids_with_fixed(&dist, args.budget, &fixed, args.seed)?.0,
                Strategy::Kcenters => kcenters_select(&dist, args.budget, &fixed, args.seed)?,
                Strategy::Random => random_select(dist.n(), args.budget, &fixed, args.seed)?,
                other => bail!("{other:?} is not a baseline; use the select subcommand"),
            };
            let w = evaluate_selection(&dist, sel.indices())?;
            println!("{}", json!({"wasserstein": w, "selected": sel.indices()}));
        }
    }
    Ok(())
}
