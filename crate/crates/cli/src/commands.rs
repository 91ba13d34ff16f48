use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::process::ExitCode;

use dendrite_core::io::{
    apply_config, apply_setting, is_config_key, read_snapshot, render_config, write_field_csv,
    write_pgm, SettingError,
};
use dendrite_core::output::run_to_dir;
use dendrite_core::solver::ensure_stable;
use dendrite_core::{presets, stability_check, DiagnosticsRecord, Error, RunOptions, SimParams};
use rayon::prelude::*;

use crate::ParamSource;

/// Like `println!`, but a closed stdout (e.g. `| head`) is not a panic.
macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

pub const EXIT_RUNTIME: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

pub const SWEEP_SUMMARY_FILE: &str = "sweep_summary.csv";

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn runtime(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_RUNTIME,
            message: message.into(),
        }
    }
}

type CmdResult = Result<ExitCode, Failure>;

fn is_config_error(e: &Error) -> bool {
    matches!(
        e,
        Error::UnknownKey(_)
            | Error::ParseValue { .. }
            | Error::Syntax { .. }
            | Error::InvalidParam { .. }
            | Error::Unstable { .. }
            | Error::Grid(_)
    )
}

fn classify(e: Error) -> Failure {
    if is_config_error(&e) {
        Failure::usage(e.to_string())
    } else {
        Failure::runtime(e.to_string())
    }
}

/// Preset, then config file, then `--set` overrides; validated, stability not checked.
fn resolve(src: &ParamSource) -> Result<SimParams, Failure> {
    let mut params = match &src.preset {
        Some(name) => presets::by_name(name).ok_or_else(|| {
            Failure::usage(format!(
                "unknown preset `{name}` (expected one of {})",
                presets::PRESET_NAMES.join(", ")
            ))
        })?,
        None => SimParams::default(),
    };
    if let Some(path) = &src.config {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
        params = apply_config(params, &text).map_err(classify)?;
    }
    for set in &src.sets {
        let (key, value) = set
            .split_once('=')
            .ok_or_else(|| Failure::usage(format!("--set expects KEY=VALUE, got `{set}`")))?;
        set_one(&mut params, key.trim(), value)?;
    }
    params.validate().map_err(classify)?;
    Ok(params)
}

fn set_one(params: &mut SimParams, key: &str, value: &str) -> Result<(), Failure> {
    apply_setting(params, key, value).map_err(|e| match e {
        SettingError::UnknownKey => Failure::usage(Error::UnknownKey(key.to_string()).to_string()),
        SettingError::BadValue(reason) => Failure::usage(format!(
            "cannot parse value `{value}` for `{key}`: {reason}"
        )),
    })
}

fn stable_or_forced(params: &SimParams, force: bool) -> Result<(), Failure> {
    match ensure_stable(params) {
        Ok(_) => Ok(()),
        Err(e) if force => {
            eprintln!("warning: {e}");
            Ok(())
        }
        Err(e) => Err(classify(e)),
    }
}

fn options(workers: Option<usize>) -> RunOptions {
    RunOptions {
        workers,
        ..RunOptions::default()
    }
}

pub fn run(src: &ParamSource, out: &Path, force: bool, workers: Option<usize>) -> CmdResult {
    let params = resolve(src)?;
    stable_or_forced(&params, force)?;
    let summary = run_to_dir(&params, out, &options(workers)).map_err(classify)?;
    if let Some(last) = summary.final_record {
        out!(
            "step {} t={} solid_fraction={:.6} max_tip={:.4} arms={}",
            last.step,
            last.time,
            last.solid_fraction,
            last.max_tip_extent(),
            last.arm_count
        );
    }
    out!(
        "wrote {} files to {}",
        summary.outputs.len() + 1,
        out.display()
    );
    Ok(ExitCode::SUCCESS)
}

struct SweepRow {
    value: String,
    outcome: Result<Option<DiagnosticsRecord>, String>,
}

pub fn sweep(
    src: &ParamSource,
    key: &str,
    values: &[String],
    out: &Path,
    force: bool,
    jobs: usize,
    workers: Option<usize>,
) -> CmdResult {
    if !is_config_key(key) {
        return Err(Failure::usage(
            Error::UnknownKey(key.to_string()).to_string(),
        ));
    }
    if values.is_empty() || values.iter().any(|v| v.trim().is_empty()) {
        return Err(Failure::usage(
            "--values must list at least one non-empty value",
        ));
    }
    let base = resolve(src)?;
    let mut runs = Vec::with_capacity(values.len());
    for value in values {
        let value = value.trim().to_string();
        let mut params = base;
        set_one(&mut params, key, &value)?;
        params.validate().map_err(classify)?;
        runs.push((value, params));
    }
    fs::create_dir_all(out).map_err(|e| Failure::runtime(format!("{}: {e}", out.display())))?;

    let execute = |(value, params): &(String, SimParams)| -> SweepRow {
        let dir = out.join(format!("{key}={value}"));
        let outcome = (|| {
            if !force {
                ensure_stable(params).map_err(|e| e.to_string())?;
            }
            run_to_dir(params, &dir, &options(workers))
                .map(|s| s.final_record)
                .map_err(|e| e.to_string())
        })();
        if let Err(msg) = &outcome {
            eprintln!("run {key}={value} failed: {msg}");
        }
        SweepRow {
            value: value.clone(),
            outcome,
        }
    };
    let rows: Vec<SweepRow> = if jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Failure::runtime(e.to_string()))?;
        pool.install(|| runs.par_iter().map(execute).collect())
    } else {
        runs.iter().map(execute).collect()
    };

    let summary = sweep_summary_csv(&rows);
    let path = out.join(SWEEP_SUMMARY_FILE);
    fs::write(&path, summary).map_err(|e| Failure::runtime(format!("{}: {e}", path.display())))?;
    let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
    out!(
        "{} runs, {} failed; summary in {}",
        rows.len(),
        failed,
        path.display()
    );
    if failed > 0 {
        Ok(ExitCode::from(EXIT_RUNTIME))
    } else {
        Ok(ExitCode::SUCCESS)
    }
}

fn sweep_summary_csv(rows: &[SweepRow]) -> String {
    let mut s =
        String::from("value,status,solid_fraction,tip_px,tip_mx,tip_py,tip_my,arm_count,error\n");
    for row in rows {
        match &row.outcome {
            Ok(Some(r)) => {
                let [px, mx, py, my] = r.tip_extent;
                let _ = writeln!(
                    s,
                    "{},ok,{:?},{:?},{:?},{:?},{:?},{},",
                    row.value, r.solid_fraction, px, mx, py, my, r.arm_count
                );
            }
            Ok(None) => {
                let _ = writeln!(s, "{},ok,,,,,,,", row.value);
            }
            Err(msg) => {
                let msg = msg.replace([',', '\n'], " ");
                let _ = writeln!(s, "{},failed,,,,,,,{msg}", row.value);
            }
        }
    }
    s
}

pub fn check(src: &ParamSource) -> CmdResult {
    let params = resolve(src)?;
    let report = stability_check(&params);
    out!("{}", render_config(&params).trim_end());
    out!("dt_max_thermal = {}", rounded(report.dt_max_thermal));
    out!("dt_max_phase = {}", rounded(report.dt_max_phase));
    out!(
        "cell_updates = {}",
        params.nx as u128 * params.ny as u128 * u128::from(params.total_steps)
    );
    if report.ok {
        out!(
            "stable: dt = {:e} <= {}",
            params.dt,
            rounded(report.bound())
        );
        Ok(ExitCode::SUCCESS)
    } else {
        out!(
            "unstable: dt = {:e} > {}",
            params.dt,
            rounded(report.bound())
        );
        Ok(ExitCode::from(EXIT_RUNTIME))
    }
}

/// Twelve significant digits, so 3dx^2/8 prints as 3.375e-4.
fn rounded(v: f64) -> String {
    let short: f64 = format!("{v:.11e}").parse().unwrap_or(v);
    format!("{short:e}")
}

pub fn render(snapshot: &Path, pgm: Option<&Path>, csv: Option<&Path>) -> CmdResult {
    let (field, meta) = read_snapshot(snapshot).map_err(|e| Failure::runtime(e.to_string()))?;
    if let Some(path) = pgm {
        write_pgm(&field, path).map_err(|e| Failure::runtime(e.to_string()))?;
        out!(
            "{} ({}x{}, step {}) -> {}",
            meta.name,
            field.nx(),
            field.ny(),
            meta.step,
            path.display()
        );
    }
    if let Some(path) = csv {
        write_field_csv(&field, path).map_err(|e| Failure::runtime(e.to_string()))?;
        out!("{} -> {}", meta.name, path.display());
    }
    Ok(ExitCode::SUCCESS)
}
