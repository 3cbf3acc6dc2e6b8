use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use streamsel::data::{
    load_dataset, make_group_plan, normalize_features, stream_groups, DataFormat, GroupPlan, LabelSpec,
};
use streamsel::eval::{
    report_csv, run_experiment, DataSource, ExperimentConfig, GroupSpec, ReportFile, ReportSet, SynthConfig,
};
use streamsel::intra::{CriterionMode, ScoreContext};
use streamsel::ogfs::{ogfs_run, OgfsConfig};
use streamsel::{Error, Result};

#[derive(Parser)]
#[command(
    name = "streamsel",
    version,
    about = "Online group feature selection and streaming baselines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run OGFS over a dataset and write the selection as JSON.
    Select(SelectArgs),
    /// Run several selectors on one stream and score them by k-NN cross-validation.
    Compare(CompareArgs),
    /// Run the comparison on planted synthetic data over a range of seeds.
    Simulate(SimulateArgs),
    /// Turn a report into plot-ready CSV.
    Report(ReportArgs),
}

#[derive(Args)]
struct DataArgs {
    /// CSV or libsvm file.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = "csv")]
    format: DataFormat,
    /// CSV label column: first, last or a 0-based column index.
    #[arg(long, default_value = "last")]
    label: LabelSpec,
}

#[derive(Args)]
struct OgfsArgs {
    #[arg(long, default_value_t = 0.001)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.3)]
    lambda: f64,
    /// abs or signed.
    #[arg(long, default_value = "abs")]
    mode: CriterionMode,
    /// group or global.
    #[arg(long, default_value = "group")]
    context: ScoreContext,
    #[arg(long)]
    stop_k: Option<usize>,
}

impl OgfsArgs {
    fn config(&self) -> OgfsConfig {
        OgfsConfig {
            epsilon: self.epsilon,
            lambda: self.lambda,
            mode: self.mode,
            context: self.context,
            stop_k: self.stop_k,
            ..OgfsConfig::default()
        }
    }
}

#[derive(Args)]
struct EvalArgs {
    /// Comma-separated: ogfs, alpha, grafting, full.
    #[arg(long, default_value = "ogfs,alpha,grafting", value_delimiter = ',')]
    algorithms: Vec<String>,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[arg(long, default_value_t = 3)]
    knn: usize,
    #[arg(long, default_value_t = 0)]
    cv_seed: u64,
    /// Refit feature scaling inside every training fold.
    #[arg(long)]
    normalize_per_fold: bool,
    /// Rerun OGFS over this many random group orders.
    #[arg(long, default_value_t = 0)]
    order_trials: usize,
}

impl EvalArgs {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        cfg.algorithms = self.algorithms.clone();
        cfg.folds = self.folds;
        cfg.knn = self.knn;
        cfg.cv_seed = self.cv_seed;
        cfg.normalize_per_fold = self.normalize_per_fold;
        cfg.order_trials = self.order_trials;
    }
}

#[derive(Args)]
struct SelectArgs {
    #[command(flatten)]
    data: DataArgs,
    /// natural, half, tenth, hundredth, two-hundredth, size:K or file:PLAN.json.
    #[arg(long, default_value = "half")]
    groups: GroupSpec,
    #[command(flatten)]
    ogfs: OgfsArgs,
    /// Seed of the random group partition.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the group plan used.
    #[arg(long)]
    save_plan: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// Full experiment config as JSON; replaces the data, group and eval flags.
    #[arg(long, conflicts_with = "data")]
    config: Option<PathBuf>,
    #[arg(long, required_unless_present = "config")]
    data: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: DataFormat,
    #[arg(long, default_value = "last")]
    label: LabelSpec,
    #[arg(long, default_value = "half")]
    groups: GroupSpec,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    ogfs: OgfsArgs,
    #[command(flatten)]
    eval: EvalArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 200)]
    n: usize,
    #[arg(long, default_value_t = 500)]
    d: usize,
    /// Number of planted groups.
    #[arg(long, default_value_t = 10)]
    groups: usize,
    #[arg(long, default_value_t = 10)]
    informative: usize,
    #[arg(long, default_value_t = 0.5)]
    noise: f64,
    /// Inclusive range `A..B` or a comma-separated list.
    #[arg(long, default_value = "0..19")]
    seeds: String,
    #[command(flatten)]
    ogfs: OgfsArgs,
    #[command(flatten)]
    eval: EvalArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, required = true)]
    emit_csv: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    let bad = || Error::InvalidParameter(format!("bad seed list `{s}`"));
    if let Some((a, b)) = s.split_once("..") {
        let (a, b): (u64, u64) = (
            a.trim().parse().map_err(|_| bad())?,
            b.trim().parse().map_err(|_| bad())?,
        );
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect()
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => println!("{text}"),
    }
    Ok(())
}

fn select(args: &SelectArgs) -> Result<()> {
    let cfg = args.ogfs.config();
    cfg.validate()?;
    let raw = load_dataset(&args.data.data, args.data.format, args.data.label)?;
    let (ds, _) = normalize_features(&raw);
    let plan = match &args.groups {
        GroupSpec::File(p) => GroupPlan::load(p)?,
        GroupSpec::Strategy(s) => make_group_plan(ds.n_features(), *s, args.seed)?,
    };
    if let Some(p) = &args.save_plan {
        fs::write(p, plan.to_json()?)?;
    }
    let result = ogfs_run(stream_groups(&ds, &plan)?, &cfg)?;
    emit(&result.to_json()?, args.out.as_deref())
}

fn compare(args: &CompareArgs) -> Result<bool> {
    let cfg = match &args.config {
        Some(path) => serde_json::from_str(&fs::read_to_string(path)?)
            .map_err(|e| Error::InvalidParameter(format!("{}: {e}", path.display())))?,
        None => {
            let mut cfg = ExperimentConfig {
                data: DataSource::File {
                    path: args.data.clone().expect("required by clap"),
                    format: args.format,
                    label: args.label,
                },
                groups: args.groups.clone(),
                group_seed: args.seed,
                ogfs: args.ogfs.config(),
                ..Default::default()
            };
            args.eval.apply(&mut cfg);
            cfg
        }
    };
    let report = run_experiment(&cfg)?;
    emit(&serde_json::to_string_pretty(&report)?, args.out.as_deref())?;
    Ok(report.has_errors())
}

fn simulate(args: &SimulateArgs) -> Result<bool> {
    let seeds = parse_seeds(&args.seeds)?;
    let mut base = ExperimentConfig {
        ogfs: args.ogfs.config(),
        ..Default::default()
    };
    args.eval.apply(&mut base);
    let reports = seeds
        .iter()
        .map(|&seed| {
            let cfg = ExperimentConfig {
                data: DataSource::Synthetic(SynthConfig {
                    n: args.n,
                    d: args.d,
                    groups: args.groups,
                    informative: args.informative,
                    noise: args.noise,
                    seed,
                }),
                group_seed: seed,
                cv_seed: base.cv_seed.wrapping_add(seed),
                ..base.clone()
            };
            run_experiment(&cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    let partial = reports.iter().any(|r| r.has_errors());
    let set = ReportSet::new(reports);
    emit(&serde_json::to_string_pretty(&set)?, args.out.as_deref())?;
    Ok(partial)
}

fn report(args: &ReportArgs) -> Result<()> {
    let file = ReportFile::load(&args.input)?;
    let csv = report_csv(&file)?;
    match &args.out {
        Some(p) => fs::write(p, csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("STREAMSEL_THREADS") else {
        return Ok(());
    };
    let n: usize = value.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Error::InvalidParameter(format!("STREAMSEL_THREADS must be a positive integer, got `{value}`"))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::InvalidParameter(e.to_string()))
}

fn run(cli: &Cli) -> Result<()> {
    configure_threads()?;
    match &cli.command {
        Command::Select(a) => select(a),
        Command::Compare(a) => compare(a).map(|partial| {
            if partial {
                log::warn!("some algorithms failed; see the error rows in the report");
            }
        }),
        Command::Simulate(a) => simulate(a).map(|partial| {
            if partial {
                log::warn!("some algorithms failed; see the error rows in the report");
            }
        }),
        Command::Report(a) => report(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { 1 } else { 2 })
        }
    }
}
