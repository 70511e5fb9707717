use clap::{Args, Parser, Subcommand};
use hgt_core::bpi::{self, BpiError};
use hgt_core::io::scenario::{BpiBlock, BpiMode, SimulateBlock};
use hgt_core::io::{self, parse_scenario, Scenario, Table};
use hgt_core::limit::{self, EngineError, EngineOptions, LimitTrajectory};
use hgt_core::outcome::{self, Classification};
use hgt_core::ssa::{self, SimConfig, SimError};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "hgt", version, about = "Horizontal gene transfer model: limit dynamics, outcome classification and simulation")]
struct Cli {
    /// Scenario JSON file with the model parameters and per-command blocks.
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    /// Directory for output files. Without it results go to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for replica simulations.
    #[arg(long, global = true, env = "HGT_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Piecewise-affine limit of the exponents: CSV samples plus a JSON sidecar.
    Limit(LimitArgs),
    /// Outcome of the first phases from the closed-form criteria.
    Classify,
    /// Exact stochastic simulation at finite K.
    Simulate(SimArgs),
    /// Simulate and compare the replica median with the limit trajectory.
    Compare(CompareArgs),
    /// Branching process with immigration: moments, exponent limit, survival, simulation.
    Bpi(BpiArgs),
}

#[derive(Args, Debug)]
struct LimitArgs {
    #[arg(long)]
    t_max: Option<f64>,
    /// Reject parameters that break the genericity conditions.
    #[arg(long)]
    strict: bool,
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Args, Debug, Clone)]
struct SimArgs {
    #[arg(long = "K")]
    k: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Horizon in log-K units.
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    grid_step: Option<f64>,
    #[arg(long)]
    replicas: Option<usize>,
    /// Write only the replica summary.
    #[arg(long)]
    aggregate: bool,
    #[arg(long)]
    event_budget: Option<u64>,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[command(flatten)]
    sim: SimArgs,
    /// Limit-trajectory sidecar written by `hgt limit`.
    #[arg(long)]
    trajectory: Option<PathBuf>,
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    crossing_tolerance: Option<f64>,
    #[arg(long, num_args = 2, value_names = ["START", "END"])]
    window: Option<Vec<f64>>,
}

#[derive(Args, Debug)]
struct BpiArgs {
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Evaluation time; repeat for several.
    #[arg(long = "t")]
    times: Vec<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    t_end: Option<f64>,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug)]
enum Mode {
    Mean,
    Variance,
    Limit,
    Survival,
    Simulate,
}

impl From<Mode> for BpiMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Mean => BpiMode::Mean,
            Mode::Variance => BpiMode::Variance,
            Mode::Limit => BpiMode::Limit,
            Mode::Survival => BpiMode::Survival,
            Mode::Simulate => BpiMode::Simulate,
        }
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    OutOfScope(String),
    Budget(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::OutOfScope(_) => 2,
            Failure::Budget(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::OutOfScope(m) | Failure::Budget(m) => m,
        }
    }
}

impl From<io::IoError> for Failure {
    fn from(e: io::IoError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::NonTerminating(_) => Failure::Budget(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Budget { .. } => Failure::Budget(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<BpiError> for Failure {
    fn from(e: BpiError) -> Self {
        match e {
            BpiError::OutOfScope(_) => Failure::OutOfScope(e.to_string()),
            BpiError::Budget { .. } => Failure::Budget(e.to_string()),
            BpiError::Invalid(_) => Failure::Usage(e.to_string()),
        }
    }
}

type Res<T> = Result<T, Failure>;

struct Output {
    dir: Option<PathBuf>,
}

impl Output {
    /// Writes `name` into the output directory, or prints it when there is none
    /// and `stdout` is set.
    fn emit(&self, name: &str, contents: &str, stdout: bool) -> Res<()> {
        match &self.dir {
            Some(dir) => {
                let path = dir.join(name);
                std::fs::write(&path, contents).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
            }
            None => {
                if stdout {
                    print!("{contents}");
                }
                Ok(())
            }
        }
    }
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn load(path: Option<&Path>) -> Res<Scenario> {
    let path = path.ok_or_else(|| Failure::Usage("--scenario <FILE> is required".into()))?;
    Ok(parse_scenario(path)?)
}

fn sim_config(scenario: &Scenario, args: &SimArgs) -> Res<SimConfig> {
    let params = *scenario.model()?;
    let block = scenario.simulate.clone();
    let need = |what: &str| Failure::Usage(format!("missing {what}: pass the flag or add a simulate block"));
    let pick = |flag: Option<f64>, f: fn(&SimulateBlock) -> f64, what: &str| {
        flag.or(block.as_ref().map(f)).ok_or_else(|| need(what))
    };
    let k = args.k.or(block.as_ref().map(|b| b.k)).ok_or_else(|| need("--K"))?;
    let horizon = pick(args.horizon, |b| b.horizon_logk, "--horizon")?;
    let step = pick(args.grid_step, |b| b.grid_step, "--grid-step")?;
    let seed = args.seed.or(block.as_ref().map(|b| b.seed)).unwrap_or(0);
    let mut cfg = SimConfig::new(params, k, seed, horizon, step)?;
    cfg.replicas = args.replicas.or(block.as_ref().map(|b| b.replicas)).unwrap_or(1);
    if let Some(b) = args.event_budget {
        cfg.event_budget = b;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_limit(scenario: &Scenario, args: &LimitArgs, out: &Output) -> Res<()> {
    let params = scenario.model()?;
    let block = scenario.limit.as_ref();
    let t_max = args
        .t_max
        .or(block.map(|b| b.t_max))
        .ok_or_else(|| Failure::Usage("missing --t-max (or a limit block)".into()))?;
    let samples = args.samples.or(block.map(|b| b.samples)).unwrap_or(201);
    if samples < 2 {
        return Err(Failure::Usage("--samples must be >= 2".into()));
    }
    let options = EngineOptions {
        strict: args.strict || block.is_some_and(|b| b.strict),
        ..EngineOptions::default()
    };
    let traj = limit::run(params, t_max, &options)?;
    for w in &traj.warnings {
        eprintln!("warning: {w}");
    }
    let end = traj.end_time().min(t_max);
    let times: Vec<f64> = (0..samples).map(|i| (end * i as f64 / (samples - 1) as f64).min(end)).collect();
    let table = Table::from_trajectory(&traj, &times)?;
    out.emit("limit.csv", &table.to_csv_string(), true)?;
    out.emit("limit.json", &json(&traj), false)
}

fn cmd_classify(scenario: &Scenario, out: &Output) -> Res<()> {
    let report = outcome::classify(scenario.model()?);
    out.emit("outcome.json", &json(&report), true)?;
    if let Classification::OutOfScope(reason) = &report.classification {
        return Err(Failure::OutOfScope(format!("out of scope: {reason}")));
    }
    Ok(())
}

fn cmd_simulate(scenario: &Scenario, args: &SimArgs, out: &Output) -> Res<()> {
    let cfg = sim_config(scenario, args)?;
    let traces = ssa::run_replicas(&cfg).into_iter().collect::<Result<Vec<_>, _>>()?;
    if cfg.replicas == 1 && !args.aggregate {
        return out.emit("simulate.csv", &Table::from_trace(&traces[0]).to_csv_string(), true);
    }
    let summary = ssa::summarize(&traces, None);
    if !args.aggregate {
        for (i, t) in traces.iter().enumerate() {
            out.emit(&format!("simulate_r{i:03}.csv"), &Table::from_trace(t).to_csv_string(), false)?;
        }
    }
    out.emit("simulate_summary.csv", &Table::from_summary(&summary).to_csv_string(), true)
}

fn cmd_compare(scenario: &Scenario, args: &CompareArgs, out: &Output) -> Res<()> {
    let cfg = sim_config(scenario, &args.sim)?;
    let block = scenario.compare.as_ref();
    let sidecar = args.trajectory.clone().or(block.and_then(|b| b.trajectory.clone()));
    let traj: LimitTrajectory = match sidecar {
        Some(path) => {
            let text = std::fs::read_to_string(&path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
        }
        None => limit::run(&cfg.params, cfg.horizon_logk.max(1e-9), &EngineOptions::default())?,
    };
    let window = match (&args.window, block.and_then(|b| b.window)) {
        (Some(w), _) => (w[0], w[1]),
        (None, Some(w)) => w,
        (None, None) => (0.0, cfg.horizon_logk),
    };
    let tolerance = args.tolerance.or(block.map(|b| b.tolerance)).unwrap_or(f64::INFINITY);
    let crossing = args.crossing_tolerance.or(block.and_then(|b| b.crossing_tolerance));
    let (summary, _) = ssa::ensemble(&cfg, None)?;
    let report = io::compare(&summary.grid, &summary.median, &traj, window, tolerance, crossing)?;
    out.emit("compare.json", &json(&report), true)
}

#[derive(Serialize)]
struct BpiValue {
    t: f64,
    value: f64,
}

#[derive(Serialize)]
struct BpiReport<'a> {
    mode: BpiMode,
    params: &'a bpi::BpiParams,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    values: Vec<BpiValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    path: Option<bpi::BpiPath>,
}

fn cmd_bpi(scenario: &Scenario, args: &BpiArgs, out: &Output) -> Res<()> {
    let block: &BpiBlock = scenario
        .bpi
        .as_ref()
        .ok_or_else(|| Failure::Usage("the scenario has no bpi block".into()))?;
    let p = &block.params;
    let mode = args.mode.map(BpiMode::from).unwrap_or(block.mode);
    let times = if args.times.is_empty() { block.times.clone() } else { args.times.clone() };
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Failure::Usage("times must be finite and >= 0".into()));
    }
    let eval = |f: &dyn Fn(f64) -> Result<f64, BpiError>| -> Res<Vec<BpiValue>> {
        if times.is_empty() {
            return Err(Failure::Usage("no evaluation times (--t or bpi.times)".into()));
        }
        times.iter().map(|&t| Ok(BpiValue { t, value: f(t)? })).collect()
    };
    let mut report = BpiReport {
        mode,
        params: p,
        values: Vec::new(),
        path: None,
    };
    match mode {
        BpiMode::Mean => report.values = eval(&|t| Ok(bpi::bpi_mean(p, t)))?,
        BpiMode::Variance => report.values = eval(&|t| Ok(bpi::bpi_variance(p, t)))?,
        BpiMode::Limit => report.values = eval(&|t| bpi::bpi_limit_exponent(p, t))?,
        BpiMode::Survival => report.values = eval(&|t| bpi::bp_survival_from(p.b, p.d, t, block.ancestors))?,
        BpiMode::Simulate => {
            let t_end = args
                .t_end
                .or(block.t_end_logk)
                .ok_or_else(|| Failure::Usage("missing --t-end (or bpi.t_end_logk)".into()))?;
            let seed = args.seed.unwrap_or(block.seed);
            report.path = Some(bpi::bpi_simulate(p, t_end, block.grid_step, seed)?);
        }
    }
    out.emit("bpi.json", &json(&report), true)
}

fn run(cli: Cli) -> Res<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Usage("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    if let Some(dir) = &cli.out {
        std::fs::create_dir_all(dir).map_err(|e| Failure::Usage(format!("{}: {e}", dir.display())))?;
    }
    let out = Output { dir: cli.out.clone() };
    let scenario = load(cli.scenario.as_deref())?;
    match &cli.command {
        Command::Limit(a) => cmd_limit(&scenario, a, &out),
        Command::Classify => cmd_classify(&scenario, &out),
        Command::Simulate(a) => cmd_simulate(&scenario, a, &out),
        Command::Compare(a) => cmd_compare(&scenario, a, &out),
        Command::Bpi(a) => cmd_bpi(&scenario, a, &out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
