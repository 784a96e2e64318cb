//! Benchmark harness: repeated seeded runs per instance, deviation from the
//! best-known cost, and Table-style reports.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::bls::StopSignal;
use crate::clustering::{cluster, ClusteringConfig};
use crate::instance::{parse_gtsp, parse_tsplib, read_best_known, GtspInstance, InstanceError};
use crate::memetic::{solve, GenerationStat, MemeticParams};
use crate::solution::Tour;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("{path}: {source}")]
    Instance {
        path: PathBuf,
        #[source]
        source: InstanceError,
    },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("validation failed for {instance} seed {seed}: {msg}")]
    Validation { instance: String, seed: u64, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Percentage gap `100 · (f_avg − best) / best`.
pub fn compute_dev(f_avg: f64, best: i64) -> Result<f64, BenchError> {
    if best <= 0 {
        return Err(BenchError::InvalidInput(format!(
            "best-known cost must be positive, got {best}"
        )));
    }
    Ok(100.0 * (f_avg - best as f64) / best as f64)
}

/// Outcome of one seeded solve.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub instance: String,
    pub seed: u64,
    pub best_cost: i64,
    pub dev: Option<f64>,
    pub wall_seconds: f64,
    pub generations: usize,
    pub descents: usize,
    pub best: Tour,
    pub trace: Vec<GenerationStat>,
}

impl RunReport {
    /// Re-reads the serialized tour and checks it against the instance.
    pub fn revalidate(&self, inst: &GtspInstance) -> Result<(), BenchError> {
        let fail = |msg: String| BenchError::Validation {
            instance: self.instance.clone(),
            seed: self.seed,
            msg,
        };
        let (tour, written) = Tour::from_line(inst, &self.best.to_line()).map_err(|e| fail(e.to_string()))?;
        if tour.cost() != written || written != self.best_cost {
            return Err(fail(format!(
                "reported cost {} but the tour costs {}",
                self.best_cost,
                tour.cost()
            )));
        }
        Ok(())
    }
}

/// Optional replacements for the per-instance default parameters.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamOverrides {
    pub initial_jumps: Option<usize>,
    pub max_jumps: Option<usize>,
    pub stagnation_limit: Option<usize>,
    pub tabu_tenure: Option<u64>,
    pub directed_floor: Option<f64>,
    pub recency_share: Option<f64>,
    pub max_descents: Option<usize>,
    pub sample_size: Option<usize>,
    pub exhaustive_candidates: Option<bool>,
    pub mutation_rate: Option<f64>,
    pub max_generations: Option<usize>,
}

impl ParamOverrides {
    /// Defaults for `m` clusters with the overrides applied.
    pub fn params_for(&self, m: usize) -> MemeticParams {
        let mut p = MemeticParams::for_clusters(m);
        let b = &mut p.bls;
        macro_rules! set {
            ($($field:ident => $target:expr),* $(,)?) => {
                $(if let Some(v) = self.$field { $target = v; })*
            };
        }
        set! {
            initial_jumps => b.initial_jumps,
            max_jumps => b.max_jumps,
            stagnation_limit => b.stagnation_limit,
            tabu_tenure => b.tabu_tenure,
            directed_floor => b.directed_floor,
            recency_share => b.recency_share,
            max_descents => b.max_descents,
            sample_size => b.sample_size,
            exhaustive_candidates => b.exhaustive_candidates,
        }
        if let Some(v) = self.mutation_rate {
            p.mutation_rate = v;
        }
        if self.max_generations.is_some() {
            p.max_generations = self.max_generations;
        }
        p
    }

    /// Sets a parameter by config key. Returns `Ok(false)` for unknown keys.
    pub fn set(&mut self, key: &str, value: &str) -> Result<bool, String> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<Option<T>, String> {
            value
                .parse()
                .map(Some)
                .map_err(|_| format!("bad value '{value}' for {key}"))
        }
        match key {
            "initial_jumps" | "l0" => self.initial_jumps = parse(key, value)?,
            "max_jumps" | "l_max" => self.max_jumps = parse(key, value)?,
            "stagnation_limit" | "t" => self.stagnation_limit = parse(key, value)?,
            "tabu_tenure" | "gamma" => self.tabu_tenure = parse(key, value)?,
            "directed_floor" | "p0" => self.directed_floor = parse(key, value)?,
            "recency_share" | "q" => self.recency_share = parse(key, value)?,
            "max_descents" | "desc_max" => self.max_descents = parse(key, value)?,
            "sample_size" | "n" => self.sample_size = parse(key, value)?,
            "exhaustive_candidates" => self.exhaustive_candidates = parse(key, value)?,
            "mutation_rate" | "p_mut" => self.mutation_rate = parse(key, value)?,
            "max_generations" => self.max_generations = parse(key, value)?,
            _ => return Ok(false),
        }
        Ok(true)
    }

    /// Reads a flat `key = value` parameter file.
    pub fn parse(text: &str) -> Result<Self, BenchError> {
        let mut out = Self::default();
        for (line, key, value) in key_values(text)? {
            match out.set(&key, &value) {
                Ok(true) => {}
                Ok(false) => {
                    return Err(BenchError::Config {
                        line,
                        msg: format!("unknown parameter '{key}'"),
                    })
                }
                Err(msg) => return Err(BenchError::Config { line, msg }),
            }
        }
        Ok(out)
    }
}

fn key_values(text: &str) -> Result<Vec<(usize, String, String)>, BenchError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| BenchError::Config {
            line: i + 1,
            msg: format!("expected 'key = value', got '{line}'"),
        })?;
        out.push((i + 1, k.trim().to_ascii_lowercase(), v.trim().to_string()));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Markdown,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub instances: Vec<PathBuf>,
    pub runs: usize,
    pub seed: u64,
    pub params: ParamOverrides,
    pub time_limit: Duration,
    pub best_known: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
    pub jobs: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            instances: Vec::new(),
            runs: 20,
            seed: 0,
            params: ParamOverrides::default(),
            time_limit: Duration::from_secs(120),
            best_known: None,
            output: None,
            format: OutputFormat::Csv,
            jobs: 1,
        }
    }
}

impl BenchConfig {
    /// Parses a config file. Relative paths resolve against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, BenchError> {
        let mut cfg = Self::default();
        let resolve = |p: &str| {
            let p = PathBuf::from(p);
            if p.is_relative() {
                base_dir.join(p)
            } else {
                p
            }
        };
        for (line, key, value) in key_values(text)? {
            let bad = |what: &str| BenchError::Config {
                line,
                msg: format!("bad {what} '{value}'"),
            };
            match key.as_str() {
                "instances" => {
                    cfg.instances = value
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(resolve)
                        .collect()
                }
                "runs" => {
                    cfg.runs = value.parse().map_err(|_| bad("runs"))?;
                    if cfg.runs == 0 {
                        return Err(bad("runs"));
                    }
                }
                "seed" => cfg.seed = value.parse().map_err(|_| bad("seed"))?,
                "jobs" => cfg.jobs = value.parse::<usize>().map_err(|_| bad("jobs"))?.max(1),
                "time_limit" => {
                    let secs: f64 = value.parse().map_err(|_| bad("time_limit"))?;
                    if secs.is_nan() || secs <= 0.0 {
                        return Err(bad("time_limit"));
                    }
                    cfg.time_limit = Duration::from_secs_f64(secs);
                }
                "best_known" => cfg.best_known = Some(resolve(&value)),
                "output" => cfg.output = Some(resolve(&value)),
                "format" => {
                    cfg.format = match value.as_str() {
                        "csv" => OutputFormat::Csv,
                        "markdown" | "md" => OutputFormat::Markdown,
                        _ => return Err(bad("format")),
                    }
                }
                _ => match cfg.params.set(&key, &value) {
                    Ok(true) => {}
                    Ok(false) => {
                        return Err(BenchError::Config {
                            line,
                            msg: format!("unknown key '{key}'"),
                        })
                    }
                    Err(msg) => return Err(BenchError::Config { line, msg }),
                },
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }
}

/// Loads a clustered `.gtsp` file, or clusters a plain TSPLIB file with the
/// default rule. The best-known cost is looked up by instance name.
pub fn load_instance(path: &Path, best_known: &HashMap<String, i64>) -> Result<GtspInstance, BenchError> {
    let wrap = |source| BenchError::Instance {
        path: path.to_path_buf(),
        source,
    };
    let text = std::fs::read_to_string(path).map_err(|e| wrap(e.into()))?;
    let inst = if text.contains("GTSP_SET_SECTION") {
        parse_gtsp(&text).map_err(wrap)?
    } else {
        let nodes = parse_tsplib(&text).map_err(wrap)?;
        cluster(&nodes, &ClusteringConfig::default()).map_err(wrap)?
    };
    let best = best_known.get(inst.name()).copied();
    Ok(inst.with_best_known(best))
}

/// Per-run seed; depends only on the master seed, the instance name and the
/// run index.
pub fn derive_seed(master: u64, instance: &str, run: usize) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    let name = instance
        .bytes()
        .fold(0xcbf2_9ce4_8422_2325_u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3));
    mix(mix(master) ^ mix(name) ^ mix(run as u64).rotate_left(17))
}

/// Aggregated results for one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceRow {
    pub instance: String,
    pub nodes: usize,
    pub clusters: usize,
    pub best_known: Option<i64>,
    pub best_found: i64,
    pub mean_cost: f64,
    pub dev: Option<f64>,
    /// Runs that reached the best-known cost.
    pub hits: usize,
    pub runs: usize,
    pub cpu_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct BenchTable {
    pub rows: Vec<InstanceRow>,
    pub runs: Vec<RunReport>,
}

impl BenchTable {
    fn average(&self) -> (Option<f64>, f64) {
        let devs: Vec<f64> = self.rows.iter().filter_map(|r| r.dev).collect();
        let dev = (!devs.is_empty()).then(|| devs.iter().sum::<f64>() / devs.len() as f64);
        let cpu = if self.rows.is_empty() {
            0.0
        } else {
            self.rows.iter().map(|r| r.cpu_seconds).sum::<f64>() / self.rows.len() as f64
        };
        (dev, cpu)
    }

    /// Columns are the standard benchmark columns plus run statistics; the last
    /// column holds wall time.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("Instance,Nodes,Clusters,Best,Found,Avg,dev,Hits,Runs,CPU(s)\n");
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{:.2},{},{},{},{:.2}",
                r.instance,
                r.nodes,
                r.clusters,
                opt(r.best_known),
                r.best_found,
                r.mean_cost,
                opt_dev(r.dev),
                r.hits,
                r.runs,
                r.cpu_seconds
            )
            .unwrap();
        }
        if !self.rows.is_empty() {
            let (dev, cpu) = self.average();
            writeln!(out, "Average,,,,,,{},,,{cpu:.2}", opt_dev(dev)).unwrap();
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let header = ["Instance", "Nodes", "Clusters", "Best", "Found", "Avg", "dev", "Hits", "CPU(s)"];
        let mut rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.instance.clone(),
                    r.nodes.to_string(),
                    r.clusters.to_string(),
                    opt(r.best_known),
                    r.best_found.to_string(),
                    format!("{:.2}", r.mean_cost),
                    opt_dev(r.dev),
                    format!("{}/{}", r.hits, r.runs),
                    format!("{:.2}", r.cpu_seconds),
                ]
            })
            .collect();
        if !self.rows.is_empty() {
            let (dev, cpu) = self.average();
            let mut avg = vec![String::new(); header.len()];
            avg[0] = "Average".into();
            avg[6] = opt_dev(dev);
            avg[8] = format!("{cpu:.2}");
            rows.push(avg);
        }
        let widths: Vec<usize> = (0..header.len())
            .map(|c| rows.iter().map(|r| r[c].len()).chain([header[c].len()]).max().unwrap())
            .collect();
        let mut out = String::new();
        let line = |cells: &[String]| {
            let padded: Vec<String> = cells
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(c, (s, &w))| if c == 0 { format!("{s:<w$}") } else { format!("{s:>w$}") })
                .collect();
            format!("| {} |\n", padded.join(" | "))
        };
        out.push_str(&line(&header.map(String::from)));
        let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
        out.push_str(&line(&rule));
        for r in &rows {
            out.push_str(&line(r));
        }
        out
    }

    /// One line per run: instance, seed, cost, dev, generations, descents,
    /// wall seconds and the tour.
    pub fn runs_csv(&self) -> String {
        let mut out = String::from("instance,seed,cost,dev,generations,descents,wall_s,tour\n");
        for r in &self.runs {
            writeln!(
                out,
                "{},{},{},{},{},{},{:.3},{}",
                r.instance,
                r.seed,
                r.best_cost,
                opt_dev(r.dev),
                r.generations,
                r.descents,
                r.wall_seconds,
                r.best.to_line()
            )
            .unwrap();
        }
        out
    }
}

fn opt(v: Option<i64>) -> String {
    v.map_or_else(|| "-".into(), |v| v.to_string())
}

fn opt_dev(v: Option<f64>) -> String {
    // Clamp -0.00 to 0.00.
    v.map_or_else(|| "-".into(), |v| format!("{:.2}", if v.abs() < 0.005 { 0.0 } else { v }))
}

/// Drops the trailing wall-time column of a CSV produced by
/// [`BenchTable::to_csv`].
pub fn strip_time_column(csv: &str) -> String {
    csv.lines()
        .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Solves every configured instance `runs` times.
///
/// Runs execute on a pool of `cfg.jobs` threads; every run owns its RNG, so
/// the results do not depend on the pool size. Each run's tour is
/// re-validated before it is reported.
pub fn run_benchmark(cfg: &BenchConfig) -> Result<BenchTable, BenchError> {
    if cfg.runs == 0 {
        return Err(BenchError::InvalidInput("runs must be at least 1".into()));
    }
    let best_known = match &cfg.best_known {
        Some(p) => read_best_known(p).map_err(|source| BenchError::Instance {
            path: p.clone(),
            source,
        })?,
        None => HashMap::new(),
    };
    let instances: Vec<GtspInstance> = cfg
        .instances
        .iter()
        .map(|p| load_instance(p, &best_known))
        .collect::<Result<_, _>>()?;
    let params: Vec<MemeticParams> = instances.iter().map(|i| cfg.params.params_for(i.m())).collect();
    for p in &params {
        p.bls
            .validate()
            .map_err(|e| BenchError::InvalidInput(e.to_string()))?;
        if !(0.0..=1.0).contains(&p.mutation_rate) {
            return Err(BenchError::InvalidInput("mutation_rate must lie in [0, 1]".into()));
        }
    }

    let tasks: Vec<(usize, u64)> = instances
        .iter()
        .enumerate()
        .flat_map(|(i, inst)| (0..cfg.runs).map(move |r| (i, derive_seed(cfg.seed, inst.name(), r))))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.max(1))
        .build()
        .map_err(|e| BenchError::InvalidInput(e.to_string()))?;
    let reports: Vec<RunReport> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(i, seed)| {
                let stop = StopSignal::new().with_deadline(Instant::now() + cfg.time_limit);
                solve(&instances[i], &params[i], seed, &stop)
            })
            .collect()
    });
    for (report, &(i, _)) in reports.iter().zip(&tasks) {
        report.revalidate(&instances[i])?;
    }

    let mut rows = Vec::with_capacity(instances.len());
    for (i, inst) in instances.iter().enumerate() {
        let runs: Vec<&RunReport> = reports
            .iter()
            .zip(&tasks)
            .filter(|(_, t)| t.0 == i)
            .map(|(r, _)| r)
            .collect();
        let mean_cost = runs.iter().map(|r| r.best_cost as f64).sum::<f64>() / runs.len() as f64;
        rows.push(InstanceRow {
            instance: inst.name().to_string(),
            nodes: inst.n(),
            clusters: inst.m(),
            best_known: inst.best_known(),
            best_found: runs.iter().map(|r| r.best_cost).min().unwrap(),
            mean_cost,
            dev: inst.best_known().map(|b| compute_dev(mean_cost, b)).transpose()?,
            hits: runs
                .iter()
                .filter(|r| inst.best_known().is_some_and(|b| r.best_cost <= b))
                .count(),
            runs: runs.len(),
            cpu_seconds: runs.iter().map(|r| r.wall_seconds).sum::<f64>() / runs.len() as f64,
        });
    }
    Ok(BenchTable { rows, runs: reports })
}
