//! Command-line front end.
//!
//! Exit codes: 0 ran to completion, 1 invalid input or I/O failure,
//! 2 numerical failure, 3 verification failure.

pub mod config;
pub mod files;
pub mod report;
pub mod verify;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::detect::{
    identify, scan_surface, tune_minmax, Experiment, RecordedExperiment, SyntheticExperiment,
};
use crate::error::{Error, Result};
use crate::model::{LoadCase, MeasurementSet};

use config::RunConfig;
use files::{write_areas_csv, write_json, write_measurements, write_scan_csv, NoisyExperiment};
use report::RunReport;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

/// Environment variable that caps the worker thread count.
pub const THREADS_VAR: &str = "PEM_DETECT_THREADS";

#[derive(Debug, Parser)]
#[command(name = "pem-detect", version, about = "Damage identification from electric frequency responses")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write synthetic measurements for the configured damage.
    Synthesize(Common),
    /// Identify (d, x) at the configured tuning.
    Identify(IdentifyArgs),
    /// Sample the functional on a (d, x, beta) grid.
    Scan(Common),
    /// Alternate tuning and identification.
    Tune(IdentifyArgs),
    /// Cross-check the model against the finite element oracle.
    Verify(Common),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// TOML run configuration; defaults to the baseline setup.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory, overriding `output.dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// RNG seed, overriding `seed`.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct IdentifyArgs {
    #[command(flatten)]
    pub common: Common,
    /// Run the max-min tuning instead of a fixed-tuning identification.
    #[arg(long)]
    pub tune: bool,
    /// Measurement files to use instead of synthesizing (one per tuning).
    #[arg(long = "measurements")]
    pub measurements: Vec<PathBuf>,
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_INPUT
    }
}

pub fn main() -> i32 {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return EXIT_INPUT;
    }
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .map_err(|_| Error::InvalidInput(format!("{THREADS_VAR} must be a positive integer, got {v:?}")))?;
    // a pool that already exists (tests, embedding) is left alone
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Runs one command and returns its exit code.
pub fn run(command: Command) -> Result<i32> {
    match command {
        Command::Synthesize(c) => cmd_synthesize(&prepare(&c)?),
        Command::Identify(a) => cmd_identify(&prepare(&a.common)?, &a.measurements, a.tune),
        Command::Tune(a) => cmd_identify(&prepare(&a.common)?, &a.measurements, true),
        Command::Scan(c) => cmd_scan(&prepare(&c)?),
        Command::Verify(c) => cmd_verify(&prepare(&c)?),
    }
}

/// Loads the config and applies the command-line overrides.
pub fn prepare(c: &Common) -> Result<RunConfig> {
    let mut cfg = match &c.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &c.out {
        cfg.output.dir = out.clone();
    }
    if let Some(seed) = c.seed {
        cfg.seed = Some(seed);
    }
    std::fs::create_dir_all(&cfg.output.dir)?;
    Ok(cfg)
}

fn out_path(cfg: &RunConfig, name: &str) -> PathBuf {
    cfg.output.dir.join(name)
}

fn finish(report: &mut RunReport, cfg: &RunConfig) -> Result<()> {
    let path = out_path(cfg, &format!("report_{}.json", report.command));
    report.outputs.push(path.clone());
    write_json(&path, report)
}

/// Synthetic experiment for `loads`, with noise when configured.
pub fn experiment(cfg: &RunConfig, loads: Vec<LoadCase>) -> Result<Box<dyn Experiment>> {
    let inner = SyntheticExperiment {
        params: cfg.system,
        truth: cfg.damage,
        grid: cfg.grid.build(&cfg.system)?,
        loads,
    };
    if cfg.noise.amplitude > 0.0 {
        Ok(Box::new(NoisyExperiment {
            inner,
            amplitude: cfg.noise.amplitude,
            seed: cfg.require_seed("measurement noise")?,
        }))
    } else {
        Ok(Box::new(inner))
    }
}

fn check_grid(report: &mut RunReport, cfg: &RunConfig) -> Result<()> {
    let grid = cfg.grid.build(&cfg.system)?;
    let margin = grid.guard_margin(&cfg.system);
    if margin < cfg.grid.guard * 0.999 {
        report.warn(format!(
            "closest frequency sits {margin:.4} modal spacings from an undamaged resonance"
        ));
    }
    Ok(())
}

pub fn cmd_synthesize(cfg: &RunConfig) -> Result<i32> {
    let mut report = RunReport::new("synthesize", cfg.digest(), cfg.seed);
    check_grid(&mut report, cfg)?;
    let mut files = Vec::new();
    for (suffix, loads) in cfg.load_groups() {
        let set = report.time("synthesize", || -> Result<MeasurementSet> {
            let grid = cfg.grid.build(&cfg.system)?;
            let s = crate::spectral::synthesize_measurements(&cfg.system, &cfg.damage, &grid, &loads)?;
            let mut set = s.set;
            if !s.dropped.is_empty() {
                log::warn!("dropped frequencies {:?}", s.dropped);
            }
            if cfg.noise.amplitude > 0.0 {
                let seed = cfg.require_seed("measurement noise")?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                files::add_noise(&mut set, cfg.noise.amplitude, &mut rng);
            }
            Ok(set)
        })?;
        if set.grid.len() != cfg.grid.build(&cfg.system)?.len() {
            report.warn(format!(
                "{} frequencies dropped as numerically singular",
                cfg.grid.build(&cfg.system)?.len() - set.grid.len()
            ));
        }
        let path = out_path(cfg, &format!("measurements{suffix}.json"));
        write_measurements(&path, &set, cfg.noise.amplitude)?;
        files.push(serde_json::json!({
            "path": path,
            "frequencies": set.grid.len(),
            "load_cases": set.cases.len(),
        }));
        report.outputs.push(path);
    }
    report.result = serde_json::json!({ "files": files });
    finish(&mut report, cfg)?;
    Ok(EXIT_OK)
}

fn recorded(paths: &[PathBuf]) -> Result<Vec<MeasurementSet>> {
    paths.iter().map(|p| files::read_measurements(p)).collect()
}

pub fn cmd_identify(cfg: &RunConfig, measurements: &[PathBuf], tune: bool) -> Result<i32> {
    let command = if tune { "tune" } else { "identify" };
    let mut report = RunReport::new(command, cfg.digest(), cfg.seed);
    let eps = cfg.eps();

    // (file suffix, experiment) pairs
    let mut runs: Vec<(String, Box<dyn Experiment>)> = Vec::new();
    if measurements.is_empty() {
        check_grid(&mut report, cfg)?;
        for (suffix, loads) in cfg.load_groups() {
            runs.push((suffix, experiment(cfg, loads)?));
        }
    } else {
        let sets = report.time("read", || recorded(measurements))?;
        runs.push((String::new(), Box::new(RecordedExperiment::new(sets)?)));
    }

    let mut results = Vec::new();
    for (suffix, exp) in &runs {
        let result = if tune {
            report.time("tune", || {
                tune_minmax(exp.as_ref(), &cfg.system, eps, cfg.tune.start, &cfg.tune.options)
            })?
        } else {
            let data = report.time("measure", || exp.measure(cfg.system.beta))?;
            let mut opts = cfg.identify.clone();
            opts.simplex.seed = cfg.require_seed("random starts")?;
            report.time("identify", || identify(&data, &cfg.system, eps, &opts))?
        };
        if result.status != crate::model::Status::Converged {
            report.warn(format!("run{suffix} finished with status {:?}", result.status));
        }
        let path = out_path(cfg, &format!("result{suffix}.json"));
        write_json(&path, &result)?;
        report.outputs.push(path);
        results.push(serde_json::json!({
            "d_hat": result.d_hat,
            "x_hat": result.x_hat,
            "beta_used": result.beta_used,
            "e_final": result.e_final,
            "status": result.status,
            "trace_len": result.trace.len(),
        }));
    }
    report.result = serde_json::json!({ "runs": results });
    finish(&mut report, cfg)?;
    Ok(EXIT_OK)
}

pub fn cmd_scan(cfg: &RunConfig) -> Result<i32> {
    let mut report = RunReport::new("scan", cfg.digest(), cfg.seed);
    check_grid(&mut report, cfg)?;
    let axes = cfg.scan.axes()?;
    let mut summaries = Vec::new();
    for (suffix, loads) in cfg.load_groups() {
        let exp = experiment(cfg, loads)?;
        let scan = report.time("scan", || {
            scan_surface(
                exp.as_ref(),
                &cfg.system,
                cfg.eps(),
                axes.clone(),
                cfg.scan.level,
                cfg.identify.weighting,
            )
        })?;
        let tensor = out_path(cfg, &format!("scan{suffix}.csv"));
        let areas = out_path(cfg, &format!("areas{suffix}.csv"));
        write_scan_csv(&tensor, &scan)?;
        write_areas_csv(&areas, &scan)?;
        report.outputs.extend([tensor, areas]);
        let per_beta: Vec<_> = (0..scan.axes.beta.len())
            .map(|b| {
                serde_json::json!({
                    "beta": scan.axes.beta[b],
                    "area": scan.areas[b],
                    "argmin": scan.argmin(b),
                    "strict_local_minima": scan.strict_local_minima(b).len(),
                })
            })
            .collect();
        summaries.push(serde_json::json!({ "suffix": suffix, "slices": per_beta }));
    }
    report.result = serde_json::json!({ "scans": summaries });
    finish(&mut report, cfg)?;
    Ok(EXIT_OK)
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<i32> {
    let mut report = RunReport::new("verify", cfg.digest(), cfg.seed);
    let checks = report.time("checks", || verify::run_checks(cfg))?;
    let all = checks.iter().all(|c| c.passed);
    for c in &checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.measured);
    }
    report.result = serde_json::json!({ "passed": all, "checks": checks });
    finish(&mut report, cfg)?;
    Ok(if all { EXIT_OK } else { EXIT_VERIFY })
}
