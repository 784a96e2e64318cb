use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand, ValueEnum};
use mbls::bench::{load_instance, BenchConfig, BenchError, OutputFormat, ParamOverrides};
use mbls::clustering::{cluster, ClusteringConfig};
use mbls::instance::{parse_tsplib, write_gtsp, InstanceError};
use mbls::{solve, StopSignal};

#[derive(Parser)]
#[command(name = "mbls", version, about = "Memetic breakout local search for the GTSP")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance and print the best tour found.
    Solve {
        /// A clustered `.gtsp` file, or a TSPLIB file to cluster first.
        instance: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Best-known cost; the search stops once it is reached.
        #[arg(long)]
        best_known: Option<i64>,
        /// Flat `key = value` parameter file.
        #[arg(long)]
        params: Option<PathBuf>,
        /// Wall-clock limit in seconds.
        #[arg(long)]
        time_limit: Option<f64>,
    },
    /// Run a benchmark described by a config file.
    Bench {
        #[arg(long)]
        config: PathBuf,
        /// Worker threads; overrides the config file.
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Write the table here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Also write one line per run to this file.
        #[arg(long)]
        runs_output: Option<PathBuf>,
    },
    /// Partition a TSPLIB instance into clusters and print it as `.gtsp`.
    Cluster {
        tsplib: PathBuf,
        /// Number of clusters; defaults to ceil(n / 5).
        #[arg(long)]
        m: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Markdown,
}

/// Failure carrying its process exit code.
struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn usage(msg: impl ToString) -> Self {
        Self { code: 1, msg: msg.to_string() }
    }
}

fn instance_code(e: &InstanceError) -> u8 {
    match e {
        InstanceError::Partition { .. } | InstanceError::Invalid(_) => 2,
        _ => 1,
    }
}

impl From<InstanceError> for Failure {
    fn from(e: InstanceError) -> Self {
        Self { code: instance_code(&e), msg: e.to_string() }
    }
}

impl From<BenchError> for Failure {
    fn from(e: BenchError) -> Self {
        let code = match &e {
            BenchError::Validation { .. } => 2,
            BenchError::Instance { source, .. } => instance_code(source),
            _ => 1,
        };
        Self { code, msg: e.to_string() }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Solve { instance, seed, best_known, params, time_limit } => {
            run_solve(&instance, seed, best_known, params.as_deref(), time_limit)
        }
        Command::Bench { config, jobs, format, output, runs_output } => {
            run_bench(&config, jobs, format, output, runs_output.as_deref())
        }
        Command::Cluster { tsplib, m } => run_cluster(&tsplib, m),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn run_solve(
    path: &Path,
    seed: u64,
    best_known: Option<i64>,
    params: Option<&Path>,
    time_limit: Option<f64>,
) -> Result<(), Failure> {
    if best_known.is_some_and(|b| b <= 0) {
        return Err(Failure::usage("--best-known must be positive"));
    }
    let overrides = match params {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::usage(format!("{}: {e}", p.display())))?;
            ParamOverrides::parse(&text)?
        }
        None => ParamOverrides::default(),
    };
    let mut inst = load_instance(path, &HashMap::new())?;
    if best_known.is_some() {
        inst = inst.with_best_known(best_known);
    }
    let params = overrides.params_for(inst.m());
    params.bls.validate().map_err(Failure::usage)?;
    if !(0.0..=1.0).contains(&params.mutation_rate) {
        return Err(Failure::usage("mutation_rate must lie in [0, 1]"));
    }
    let stop = match time_limit {
        Some(s) if s > 0.0 && s.is_finite() => StopSignal::new().with_deadline(Instant::now() + Duration::from_secs_f64(s)),
        Some(_) => return Err(Failure::usage("--time-limit must be positive")),
        None => StopSignal::new(),
    };
    let report = solve(&inst, &params, seed, &stop);
    report.revalidate(&inst)?;

    println!("instance: {}", inst.name());
    println!("nodes: {}", inst.n());
    println!("clusters: {}", inst.m());
    println!("seed: {seed}");
    println!("cost: {}", report.best_cost);
    if let Some(dev) = report.dev {
        println!("dev: {dev:.4}");
    }
    println!("generations: {}", report.generations);
    println!("descents: {}", report.descents);
    println!("time: {:.3}", report.wall_seconds);
    println!("tour: {}", report.best.to_line());
    Ok(())
}

fn run_bench(
    config: &Path,
    jobs: Option<usize>,
    format: Option<Format>,
    output: Option<PathBuf>,
    runs_output: Option<&Path>,
) -> Result<(), Failure> {
    let mut cfg = BenchConfig::load(config)?;
    if let Some(j) = jobs {
        if j == 0 {
            return Err(Failure::usage("--jobs must be at least 1"));
        }
        cfg.jobs = j;
    }
    if let Some(f) = format {
        cfg.format = match f {
            Format::Csv => OutputFormat::Csv,
            Format::Markdown => OutputFormat::Markdown,
        };
    }
    if output.is_some() {
        cfg.output = output;
    }
    let table = mbls::run_benchmark(&cfg)?;
    let text = match cfg.format {
        OutputFormat::Csv => table.to_csv(),
        OutputFormat::Markdown => table.to_markdown(),
    };
    let write = |path: &Path, text: &str| {
        std::fs::write(path, text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
    };
    match &cfg.output {
        Some(p) => write(p, &text)?,
        None => print!("{text}"),
    }
    if let Some(p) = runs_output {
        write(p, &table.runs_csv())?;
    }
    Ok(())
}

fn run_cluster(path: &Path, m: Option<usize>) -> Result<(), Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    let nodes = parse_tsplib(&text)?;
    let cfg = match m {
        Some(0) => return Err(Failure::usage("--m must be at least 1")),
        Some(m) => ClusteringConfig::fixed(m),
        None => ClusteringConfig::default(),
    };
    let inst = cluster(&nodes, &cfg)?;
    print!("{}", write_gtsp(&inst));
    Ok(())
}
