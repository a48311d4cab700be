//! Scenario-driven front end: configuration, experiment sweeps and result
//! files. The binary is a thin wrapper over [`execute`].

pub mod config;
pub mod experiments;

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::rng::{trial_rng, SPLITTER};
use crate::waveform::{compose_tx, sensing_sinusoid, synth_comm, to_time_domain, write_iq};
use crate::Error;
use config::{Issue, ScenarioConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
/// Output files could not be written.
pub const EXIT_IO: i32 = 1;

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Allocation(_) | Error::Scene(_) => EXIT_CONFIG,
        Error::Domain(_) | Error::Resolution(_) | Error::Infeasible(_) => EXIT_INFEASIBLE,
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub out_dir: PathBuf,
    pub trials: Option<usize>,
    pub dump_iq: Option<PathBuf>,
}

/// Result of `validate`: schema and range errors block a run, warnings do not.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub errors: Vec<Issue>,
    pub warnings: Vec<Issue>,
}

pub fn validate_text(text: &str) -> ValidationReport {
    match config::parse(text) {
        Err(e) => ValidationReport { valid: false, errors: vec![e], warnings: Vec::new() },
        Ok(cfg) => {
            let errors = cfg.check();
            ValidationReport { valid: errors.is_empty(), errors, warnings: cfg.warnings() }
        }
    }
}

/// Files written by a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunArtifacts {
    pub csv: PathBuf,
    pub sidecar: PathBuf,
    pub exit_code: i32,
    pub message: Option<String>,
}

fn sidecar(cfg: &ScenarioConfig, seed: u64, outcome: &experiments::Outcome) -> Value {
    let columns: Vec<Value> =
        outcome.table.columns.iter().map(|(n, d)| json!({"name": n, "description": d})).collect();
    json!({
        "experiment": cfg.experiment.name(),
        "code_version": env!("CARGO_PKG_VERSION"),
        "master_seed": seed,
        "seed_splitter": SPLITTER,
        "allocation_stream": config::ALLOCATION_STREAM,
        "columns": columns,
        "summary": outcome.summary,
        "infeasible": outcome.infeasible,
        "config": cfg,
    })
}

fn io_error(path: &Path, e: std::io::Error) -> (i32, String) {
    (EXIT_IO, format!("{}: {e}", path.display()))
}

/// Parses, checks and runs a scenario. Errors come back as
/// `(exit code, message)`.
pub fn execute(text: &str, opts: &RunOptions) -> Result<RunArtifacts, (i32, String)> {
    let mut cfg = config::parse(text).map_err(|e| (EXIT_CONFIG, format!("config error at {e}")))?;
    if let Some(first) = cfg.check().first() {
        return Err((EXIT_CONFIG, format!("config error at {first}")));
    }
    let seed = opts.seed.unwrap_or(cfg.allocation.seed);
    cfg.allocation.seed = seed;
    if let (config::ExperimentConfig::MontecarloEstimation(m), Some(t)) = (&mut cfg.experiment, opts.trials) {
        m.trials = t;
    }
    let fail = |e: Error| (exit_code(&e), e.to_string());
    let res = config::resolve(&cfg, seed).map_err(fail)?;

    if let Some(path) = &opts.dump_iq {
        let allocation = res.allocation(&cfg.allocation).map_err(fail)?;
        let plan = experiments::power_plan(&cfg, &res, &allocation).map_err(fail)?;
        let mut rng = trial_rng(seed, 0);
        let comm = synth_comm(&res.grid, &allocation, &res.qam, &plan, &mut rng).map_err(fail)?;
        let tx = compose_tx(&comm, &plan, &sensing_sinusoid(&res.grid, res.impulse.0, res.impulse.1)).map_err(fail)?;
        let samples = to_time_domain(&tx.x).map_err(fail)?;
        let file = fs::File::create(path).map_err(|e| io_error(path, e))?;
        write_iq(&samples, BufWriter::new(file)).map_err(|e| io_error(path, e))?;
    }

    let outcome = experiments::run(&cfg, &res, opts.trials).map_err(fail)?;
    fs::create_dir_all(&opts.out_dir).map_err(|e| io_error(&opts.out_dir, e))?;
    let name = cfg.experiment.name();
    let csv = opts.out_dir.join(format!("{name}.csv"));
    let side = opts.out_dir.join(format!("{name}.json"));
    fs::write(&csv, outcome.table.to_csv()).map_err(|e| io_error(&csv, e))?;
    let body = serde_json::to_string_pretty(&sidecar(&cfg, seed, &outcome)).expect("sidecar serializes");
    fs::write(&side, body + "\n").map_err(|e| io_error(&side, e))?;
    let (exit_code, message) = match outcome.infeasible {
        Some(m) => (EXIT_INFEASIBLE, Some(m)),
        None => (EXIT_OK, None),
    };
    Ok(RunArtifacts { csv, sidecar: side, exit_code, message })
}
