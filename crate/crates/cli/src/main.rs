//! `ised`: train, compare and inspect sampling-based gradient estimators.
//!
//! Exit codes: 0 success, 1 configuration error, 2 runtime error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ised::bench::{hwf_counts, hwf_dataset, save_dataset, synth_dataset, TaskSpec, DEFAULT_NOISE};
use ised::experiment::{
    compare, golden, parse_seeds, run, DataSource, EstimatorName, ExperimentConfig, ExperimentError,
    ExternalProgram, GOLDEN_CASES,
};
use ised::Semiring;

/// Overrides the configured output directory (a `--output` flag still wins).
const OUTPUT_ENV: &str = "ISED_OUTPUT_DIR";

#[derive(Parser)]
#[command(name = "ised", version, about = "Sampling-based gradient estimation through black-box programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one configuration over its seeds and write metrics.
    Run(RunArgs),
    /// Run several configurations on one task and print a comparison table.
    Compare(CompareArgs),
    /// Print a worked reference vector.
    Golden {
        /// One of ised-addmult, ised-minmax, reinforce, dpl, scallop.
        case: String,
    },
    /// Write a dataset cache file.
    GenData(GenDataArgs),
}

/// Flags that override fields of the config file.
#[derive(Args, Default, Clone)]
struct Overrides {
    #[arg(long)]
    task: Option<String>,
    #[arg(long)]
    semiring: Option<Semiring>,
    #[arg(short = 'k', long = "k")]
    k: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    /// `0..2` (inclusive), `0,1,5` or a single seed.
    #[arg(long)]
    seeds: Option<String>,
    /// Hidden layer widths, comma separated.
    #[arg(long, value_delimiter = ',')]
    hidden: Option<Vec<usize>>,
    #[arg(long)]
    train_size: Option<usize>,
    #[arg(long)]
    test_size: Option<usize>,
    /// Synthetic feature noise σ.
    #[arg(long)]
    noise: Option<f64>,
    /// Use the formula-length split at this scale (hwf only).
    #[arg(long)]
    hwf_scale: Option<f64>,
    #[arg(long)]
    timeout_secs: Option<u64>,
    /// Run this command as the program instead of the builtin.
    #[arg(long)]
    external: Option<String>,
    #[arg(long = "external-arg", allow_hyphen_values = true)]
    external_args: Vec<String>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    estimator: Option<EstimatorName>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct CompareArgs {
    /// One TOML file per compared configuration.
    #[arg(long = "config")]
    configs: Vec<PathBuf>,
    /// Alternatively, one configuration per estimator, sharing every flag.
    #[arg(long, value_delimiter = ',')]
    estimators: Vec<EstimatorName>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct GenDataArgs {
    #[arg(long)]
    task: String,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_NOISE)]
    noise: f64,
    /// For hwf: generate the length split at this scale instead of `n` formulas.
    #[arg(long)]
    hwf_scale: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

fn apply(mut cfg: ExperimentConfig, o: &Overrides) -> Result<ExperimentConfig, ExperimentError> {
    if let Some(t) = &o.task {
        cfg.task = t.clone();
    }
    if let Some(s) = o.semiring {
        cfg.semiring = Some(s);
    }
    macro_rules! set {
        ($($field:ident),*) => { $(if let Some(v) = o.$field.clone() { cfg.$field = v; })* };
    }
    set!(k, epochs, lr, batch_size, hidden, train_size, test_size, timeout_secs);
    if let Some(s) = &o.seeds {
        cfg.seeds = parse_seeds(s)?;
    }
    match (o.hwf_scale, o.noise) {
        (Some(scale), noise) => {
            cfg.data = DataSource::Hwf {
                scale,
                noise: noise.unwrap_or(DEFAULT_NOISE),
            }
        }
        (None, Some(noise)) => match &mut cfg.data {
            DataSource::Synthetic { noise: n } | DataSource::Hwf { noise: n, .. } => *n = noise,
            _ => cfg.data = DataSource::Synthetic { noise },
        },
        (None, None) => {}
    }
    if let Some(cmd) = &o.external {
        cfg.external = Some(ExternalProgram {
            command: cmd.clone(),
            args: o.external_args.clone(),
        });
    }
    if let Ok(dir) = std::env::var(OUTPUT_ENV) {
        if !dir.is_empty() {
            cfg.output_dir = PathBuf::from(dir);
        }
    }
    if let Some(dir) = &o.output {
        cfg.output_dir = dir.clone();
    }
    Ok(cfg)
}

fn base_config(path: Option<&PathBuf>) -> Result<ExperimentConfig, ExperimentError> {
    path.map_or_else(|| Ok(ExperimentConfig::default()), |p| ExperimentConfig::load(p))
}

fn execute(cli: Cli) -> Result<(), ExperimentError> {
    match cli.command {
        Command::Run(args) => {
            let mut cfg = apply(base_config(args.config.as_ref())?, &args.overrides)?;
            if let Some(e) = args.estimator {
                cfg.estimator = e;
            }
            let report = run(&cfg)?;
            let s = &report.summary;
            println!(
                "{} {} k={}: accuracy {:.4} ± {:.4} over {} seed(s), {:.1} calls/example",
                s.task,
                s.estimator,
                s.k,
                s.accuracy_mean,
                s.accuracy_std,
                s.seeds.len(),
                s.calls_per_example
            );
            println!("results in {}", cfg.output_dir.display());
        }
        Command::Compare(args) => {
            let mut configs = args
                .configs
                .iter()
                .map(|p| ExperimentConfig::load(p).and_then(|c| apply(c, &args.overrides)))
                .collect::<Result<Vec<_>, _>>()?;
            let shared = apply(ExperimentConfig::default(), &args.overrides)?;
            configs.extend(args.estimators.iter().map(|&estimator| ExperimentConfig {
                estimator,
                ..shared.clone()
            }));
            let table = compare(&configs)?;
            print!("{table}");
            let dir = &shared.output_dir;
            std::fs::create_dir_all(dir).map_err(|e| ExperimentError::Runtime(e.to_string()))?;
            let json = serde_json::to_string_pretty(&table).expect("table serializes") + "\n";
            std::fs::write(dir.join("comparison.json"), json).map_err(|e| ExperimentError::Runtime(e.to_string()))?;
        }
        Command::Golden { case } => {
            if !GOLDEN_CASES.contains(&case.as_str()) {
                return Err(ExperimentError::Config(format!(
                    "unknown case {case:?}; expected one of {}",
                    GOLDEN_CASES.join(", ")
                )));
            }
            let v = golden(&case)?;
            let shown: Vec<String> = v.iter().map(|x| format!("{}", (x * 1e12).round() / 1e12)).collect();
            println!("[{}]", shown.join(", "));
        }
        Command::GenData(args) => {
            let task = TaskSpec::builtin(&args.task)?;
            let ds = match args.hwf_scale {
                Some(scale) => hwf_dataset(&task, &hwf_counts(scale), args.noise, args.seed)?,
                None => synth_dataset(&task, args.n, args.noise, args.seed)?,
            };
            save_dataset(&args.out, &task, &ds)?;
            println!("wrote {} examples to {}", ds.len(), args.out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
