//! Run-metadata sidecar: config snapshot, seed, version, wall time.
//! Timestamps and durations live only here, never in primary artifacts,
//! so reruns stay byte-identical.

use std::path::{Path, PathBuf};
use std::time::Instant;

use qalign_core::error::{Error, Result};
use serde::Serialize;

use crate::config::RunConfig;

#[derive(Serialize)]
struct RunMeta<'a> {
    command: &'a str,
    version: &'a str,
    seed: u64,
    config: &'a RunConfig,
    wall_time_seconds: f64,
}

pub struct MetaWriter {
    command: &'static str,
    started: Instant,
}

impl MetaWriter {
    pub fn start(command: &'static str) -> Self {
        Self { command, started: Instant::now() }
    }

    /// Writes `<primary>.meta.json` next to the primary artifact (or
    /// `run_meta.json` inside it when the artifact is a directory).
    pub fn finish(self, primary: &Path, cfg: &RunConfig) -> Result<()> {
        let meta = RunMeta {
            command: self.command,
            version: env!("CARGO_PKG_VERSION"),
            seed: cfg.seed,
            config: cfg,
            wall_time_seconds: self.started.elapsed().as_secs_f64(),
        };
        let path: PathBuf = if primary.is_dir() {
            primary.join("run_meta.json")
        } else {
            let mut name = primary.file_name().unwrap_or_default().to_os_string();
            name.push(".meta.json");
            primary.with_file_name(name)
        };
        let json = serde_json::to_string_pretty(&meta).expect("meta serializes");
        std::fs::write(&path, json).map_err(|e| Error::io(&path, e))
    }
}
