use std::path::PathBuf;
use std::time::Instant;

use serde::Serialize;

/// Summary written next to every run's artifacts.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub version: &'static str,
    pub config_digest: String,
    pub seed: Option<u64>,
    pub timings: Vec<PhaseTiming>,
    pub result: serde_json::Value,
    pub outputs: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PhaseTiming {
    pub phase: String,
    pub seconds: f64,
}

impl RunReport {
    pub fn new(command: &str, config_digest: String, seed: Option<u64>) -> Self {
        Self {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION"),
            config_digest,
            seed,
            timings: Vec::new(),
            result: serde_json::Value::Null,
            outputs: Vec::new(),
            warnings: Vec::new(),
        }
    }

    /// Runs `f` and records its wall-clock time under `phase`.
    pub fn time<T>(&mut self, phase: &str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let out = f();
        self.timings.push(PhaseTiming {
            phase: phase.into(),
            seconds: t.elapsed().as_secs_f64(),
        });
        out
    }

    pub fn warn(&mut self, msg: impl Into<String>) {
        let msg = msg.into();
        log::warn!("{msg}");
        self.warnings.push(msg);
    }
}
