use clap::{Args, Parser, Subcommand};
use fwlab::experiments::{exit_code_for, run, schema, Experiment, ExperimentConfig, GridConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "fwlab", version, about = "Run wave/fractal-measure experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment; `fwlab <experiment>` is shorthand for this.
    Run(Box<RunArgs>),
    /// Check a config file and print diagnostics.
    Validate { config: PathBuf },
    /// Print the config schema as JSON.
    Schema,
    /// List experiment names with the statement each one exercises.
    List,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment name; optional when --config names one.
    experiment: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides FWLAB_OUT and the config.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for parallel sweeps.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    /// Comma-separated exponents.
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<f64>>,
    #[arg(long)]
    alpha: Option<f64>,
    /// start:end:step
    #[arg(long)]
    alpha_grid: Option<String>,
    /// Comma-separated lattice sizes.
    #[arg(long, value_delimiter = ',')]
    q: Option<Vec<usize>>,
    /// first:last band index
    #[arg(long)]
    k: Option<String>,
    /// first:last log2 radius
    #[arg(long)]
    radii_log2: Option<String>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long)]
    time_intervals: Option<usize>,
    #[arg(long)]
    sphere_points: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    floors: Option<Vec<f64>>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    packets: Option<usize>,
    #[arg(long)]
    grid_size: Option<usize>,
    #[arg(long)]
    box_len: Option<f64>,
    /// Gate override, name=value; repeatable.
    #[arg(long = "tolerance", value_name = "NAME=VALUE")]
    tolerances: Vec<String>,
    /// Write GridField snapshots where the experiment produces them.
    #[arg(long)]
    snapshots: bool,
}

fn config_error(message: impl std::fmt::Display) -> ExitCode {
    eprintln!("config error: {message}");
    ExitCode::from(2)
}

fn parse_pair<T: std::str::FromStr>(flag: &str, text: &str) -> Result<[T; 2], String> {
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [a, b] => Ok([
            a.parse().map_err(|_| format!("--{flag}: bad number {a:?}"))?,
            b.parse().map_err(|_| format!("--{flag}: bad number {b:?}"))?,
        ]),
        _ => Err(format!("--{flag} expects first:last, got {text:?}")),
    }
}

fn parse_triple(text: &str) -> Result<[f64; 3], String> {
    let values: Vec<f64> = text
        .split(':')
        .map(|v| v.parse().map_err(|_| format!("--alpha-grid: bad number {v:?}")))
        .collect::<Result<_, _>>()?;
    values
        .try_into()
        .map_err(|_| format!("--alpha-grid expects start:end:step, got {text:?}"))
}

fn build_config(args: &RunArgs) -> Result<ExperimentConfig, String> {
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::load(path).map_err(|d| {
            d.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
        })?,
        None => {
            let name = args.experiment.as_deref().ok_or("an experiment name or --config is required")?;
            let e = Experiment::from_name(name).ok_or_else(|| format!("unknown experiment {name:?}"))?;
            ExperimentConfig::default_for(e)
        }
    };
    if let Some(name) = &args.experiment {
        if name != config.experiment.name() {
            return Err(format!("experiment {name:?} does not match the config's {}", config.experiment));
        }
    }
    let s = &mut config.sweep;
    if args.n.is_some() {
        s.n = args.n;
    }
    if args.p.is_some() {
        s.p = args.p.clone();
    }
    if args.alpha.is_some() {
        s.alpha = args.alpha;
    }
    if let Some(text) = &args.alpha_grid {
        s.alpha_grid = Some(parse_triple(text)?);
    }
    if args.q.is_some() {
        s.q = args.q.clone();
    }
    if let Some(text) = &args.k {
        s.k = Some(parse_pair("k", text)?);
    }
    if let Some(text) = &args.radii_log2 {
        s.radii_log2 = Some(parse_pair("radii-log2", text)?);
    }
    if args.lambda.is_some() {
        s.lambda = args.lambda;
    }
    if args.bins.is_some() {
        s.bins = args.bins;
    }
    if args.time_intervals.is_some() {
        s.time_intervals = args.time_intervals;
    }
    if args.sphere_points.is_some() {
        s.sphere_points = args.sphere_points;
    }
    if args.floors.is_some() {
        s.floors = args.floors.clone();
    }
    if args.trials.is_some() {
        s.trials = args.trials;
    }
    if args.packets.is_some() {
        s.packets = args.packets;
    }
    if args.grid_size.is_some() || args.box_len.is_some() {
        let base = config.grid.unwrap_or(GridConfig { size: 256, box_len: 2.0 });
        config.grid = Some(GridConfig {
            size: args.grid_size.unwrap_or(base.size),
            box_len: args.box_len.unwrap_or(base.box_len),
        });
    }
    for item in &args.tolerances {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| format!("--tolerance expects name=value, got {item:?}"))?;
        let value: f64 = value.parse().map_err(|_| format!("--tolerance {key}: bad number {value:?}"))?;
        config.tolerances.insert(key.to_string(), value);
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if args.snapshots {
        config.snapshots = true;
    }
    Ok(config)
}

fn run_command(args: RunArgs) -> ExitCode {
    let config = match build_config(&args) {
        Ok(c) => c,
        Err(message) => return config_error(message),
    };
    let problems = config.validate();
    if !problems.is_empty() {
        for d in &problems {
            eprintln!("config error: {d}");
        }
        return ExitCode::from(2);
    }
    if let Some(threads) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            return config_error(format!("--threads: {e}"));
        }
    }
    let out = args
        .out
        .clone()
        .or_else(|| std::env::var_os("FWLAB_OUT").map(PathBuf::from))
        .or_else(|| config.output.clone())
        .unwrap_or_else(|| PathBuf::from("fwlab-out").join(config.experiment.name()));
    let record = match run(&config, Some(&out)) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code_for(&e) as u8);
        }
    };
    if let Err(e) = record.write(&out) {
        eprintln!("error: {e}");
        return ExitCode::from(exit_code_for(&e) as u8);
    }
    for check in &record.checks {
        println!(
            "{:<6} {:<40} {:>14.6e} {} {:.6e}",
            if check.pass { "ok" } else { "FAIL" },
            check.name,
            check.value,
            check.relation,
            check.bound
        );
    }
    println!("{}: {} -> {}", record.experiment, if record.pass { "pass" } else { "fail" }, out.display());
    if record.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    // `fwlab <experiment> ...` is accepted as `fwlab run <experiment> ...`.
    let mut argv: Vec<String> = std::env::args().collect();
    if argv.get(1).is_some_and(|a| Experiment::from_name(a).is_some()) {
        argv.insert(1, "run".to_string());
    }
    let cli = Cli::parse_from(argv);
    match cli.command {
        Command::Run(args) => run_command(*args),
        Command::Validate { config } => match ExperimentConfig::load(&config) {
            Ok(c) => {
                let problems = c.validate();
                for d in &problems {
                    println!("{d}");
                }
                if problems.is_empty() {
                    println!("ok");
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(2)
                }
            }
            Err(problems) => {
                for d in &problems {
                    println!("{d}");
                }
                ExitCode::from(2)
            }
        },
        Command::Schema => {
            println!("{}", serde_json::to_string_pretty(&schema()).expect("schema serializes"));
            ExitCode::SUCCESS
        }
        Command::List => {
            for e in Experiment::ALL {
                println!("{:<24} {}", e.name(), e.anchor());
            }
            ExitCode::SUCCESS
        }
    }
}
