//! Writing a complete run into a directory.
//!
//! Layout of a run directory:
//!
//! ```text
//! phi_00000000.pfds   temp_00000000.pfds   ...   snapshots, every `snapshot_every`
//! diagnostics.csv                                one row per diagnostics sample
//! phi_final.pgm                                  final phase field as an image
//! manifest.json                                  resolved params + file list
//! ```

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::diagnostics::DiagnosticsRecord;
use crate::error::Result;
use crate::io::{
    ensure_dir, write_diagnostics_csv, write_manifest, write_pgm, write_snapshot, Manifest,
    SnapshotMeta,
};
use crate::solver::{run, RunOptions, RunSink, SimParams, SimState};

pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";
pub const FINAL_IMAGE_FILE: &str = "phi_final.pgm";
pub const MANIFEST_FILE: &str = "manifest.json";

pub fn snapshot_file_name(field: &str, step: u64) -> String {
    format!("{field}_{step:08}.pfds")
}

/// Sink that writes snapshots into a directory as they arrive.
#[derive(Debug)]
pub struct DirSink {
    dir: PathBuf,
    outputs: Vec<String>,
    records: Vec<DiagnosticsRecord>,
}

impl DirSink {
    pub fn new(dir: &Path) -> Result<Self> {
        Ok(Self {
            dir: ensure_dir(dir)?,
            outputs: Vec::new(),
            records: Vec::new(),
        })
    }

    pub fn outputs(&self) -> &[String] {
        &self.outputs
    }

    /// Writes the diagnostics table, the final image and the manifest.
    pub fn finish(&mut self, params: &SimParams, last: Option<&SimState>) -> Result<()> {
        write_diagnostics_csv(&self.records, &self.dir.join(DIAGNOSTICS_FILE))?;
        self.outputs.push(DIAGNOSTICS_FILE.to_string());
        if let Some(state) = last {
            write_pgm(&state.phi, &self.dir.join(FINAL_IMAGE_FILE))?;
            self.outputs.push(FINAL_IMAGE_FILE.to_string());
        }
        let stamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let manifest = Manifest::new(params, self.outputs.clone(), stamp);
        write_manifest(&manifest, &self.dir.join(MANIFEST_FILE))
    }
}

impl RunSink for DirSink {
    fn snapshot(&mut self, state: &SimState, params: &SimParams) -> Result<()> {
        for (name, field) in [("phi", &state.phi), ("temp", &state.temp)] {
            let file = snapshot_file_name(name, state.step);
            let meta = SnapshotMeta {
                name: name.to_string(),
                step: state.step,
                dt: params.dt,
            };
            write_snapshot(field, &meta, &self.dir.join(&file))?;
            self.outputs.push(file);
        }
        Ok(())
    }

    fn diagnostics(&mut self, record: &DiagnosticsRecord) -> Result<()> {
        self.records.push(*record);
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub final_record: Option<DiagnosticsRecord>,
    pub records: Vec<DiagnosticsRecord>,
    pub outputs: Vec<String>,
}

/// Runs `params` and writes every output into `dir`.
///
/// If the run blows up, the diagnostics gathered so far and the manifest are
/// still written before the error is returned.
pub fn run_to_dir(params: &SimParams, dir: &Path, opts: &RunOptions) -> Result<RunSummary> {
    let mut sink = DirSink::new(dir)?;
    match run(params, &mut sink, opts) {
        Ok(outcome) => {
            sink.finish(params, Some(&outcome.state))?;
            Ok(RunSummary {
                final_record: outcome.records.last().copied(),
                records: outcome.records,
                outputs: sink.outputs,
            })
        }
        Err(e) => {
            sink.finish(params, None)?;
            Err(e)
        }
    }
}
