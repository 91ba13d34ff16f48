use std::fs;

use dendrite_core::io::{read_diagnostics_csv, read_manifest, read_snapshot};
use dendrite_core::output::{
    run_to_dir, snapshot_file_name, DIAGNOSTICS_FILE, FINAL_IMAGE_FILE, MANIFEST_FILE,
};
use dendrite_core::solver::{initialize, run, RunSink, SimParams, SimState};
use dendrite_core::{DiagnosticsRecord, Error, Result, RunOptions};

#[derive(Default)]
struct Recorder {
    snapshots: Vec<u64>,
    records: Vec<u64>,
}

impl RunSink for Recorder {
    fn snapshot(&mut self, state: &SimState, _: &SimParams) -> Result<()> {
        self.snapshots.push(state.step);
        Ok(())
    }

    fn diagnostics(&mut self, record: &DiagnosticsRecord) -> Result<()> {
        self.records.push(record.step);
        Ok(())
    }
}

fn small(total_steps: u64) -> SimParams {
    SimParams {
        nx: 32,
        ny: 32,
        total_steps,
        snapshot_every: 20,
        diagnostics_every: 15,
        ..SimParams::default()
    }
}

#[test]
fn zero_steps_writes_the_initial_state_once() {
    let p = small(0);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let summary = run_to_dir(&p, &out, &RunOptions::default()).unwrap();
    let mut names: Vec<String> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    let mut expected = vec![
        DIAGNOSTICS_FILE.to_string(),
        MANIFEST_FILE.to_string(),
        FINAL_IMAGE_FILE.to_string(),
        snapshot_file_name("phi", 0),
        snapshot_file_name("temp", 0),
    ];
    expected.sort();
    assert_eq!(names, expected);
    let (phi, meta) = read_snapshot(&out.join(snapshot_file_name("phi", 0))).unwrap();
    assert_eq!(meta.step, 0);
    assert_eq!(phi, initialize(&p).unwrap().phi);
    assert_eq!(summary.records.len(), 1);
}

#[test]
fn emission_schedule_includes_first_and_last_steps() {
    let mut sink = Recorder::default();
    run(&small(50), &mut sink, &RunOptions::default()).unwrap();
    assert_eq!(sink.snapshots, vec![0, 20, 40, 50]);
    assert_eq!(sink.records, vec![0, 15, 30, 45, 50]);
}

#[test]
fn outputs_describe_the_run() {
    let p = small(40);
    let dir = tempfile::tempdir().unwrap();
    let summary = run_to_dir(&p, dir.path(), &RunOptions::default()).unwrap();
    let records = read_diagnostics_csv(&dir.path().join(DIAGNOSTICS_FILE)).unwrap();
    assert_eq!(records, summary.records);
    assert_eq!(summary.final_record, records.last().copied());
    let manifest = read_manifest(&dir.path().join(MANIFEST_FILE)).unwrap();
    assert_eq!(manifest.resolved_params().unwrap(), p);
    for name in &manifest.outputs {
        assert!(dir.path().join(name).is_file(), "{name}");
    }
    let pgm = fs::read(dir.path().join(FINAL_IMAGE_FILE)).unwrap();
    assert!(pgm.starts_with(b"P5\n32 32\n255\n"));
    assert_eq!(pgm.len(), b"P5\n32 32\n255\n".len() + 32 * 32);
}

#[test]
fn blow_up_keeps_the_last_good_state() {
    let mut p = small(50);
    p.dt = 5e-3;
    let mut sink = Recorder::default();
    let err = run(&p, &mut sink, &RunOptions::default()).unwrap_err();
    let Error::BlowUp { step, .. } = err else {
        panic!("expected blow-up, got {err}");
    };
    assert_eq!(*sink.snapshots.last().unwrap(), step - 1);
}
