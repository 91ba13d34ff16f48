//! Config files, field snapshots, images, diagnostics tables and run manifests.
//!
//! Config files are line-oriented `key = value` text. `#` starts a comment.
//! Every key is optional and falls back to the defaults of [`SimParams`].
//!
//! Snapshots start with the magic line `PFDS1`, then `key value` header
//! lines, then a blank line, then `nx * ny` little-endian `f64` values in
//! row-major order (row index `j` outer).

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::diagnostics::DiagnosticsRecord;
use crate::error::{Error, IoContext, Result};
use crate::lattice::{DivisorMode, Field};
use crate::solver::{ensure_stable, SimParams};

/// Every accepted config key, in canonical order.
pub const CONFIG_KEYS: [&str; 21] = [
    "nx",
    "ny",
    "dx",
    "dt",
    "total_steps",
    "tau",
    "eps_bar",
    "delta",
    "j_mode",
    "theta0",
    "alpha",
    "gamma",
    "t_eq",
    "latent_heat",
    "noise_amp",
    "rng_seed",
    "seed_radius_sq",
    "divisor_mode",
    "snapshot_every",
    "diagnostics_every",
    "replicate_appendix_bug",
];

pub fn is_config_key(key: &str) -> bool {
    CONFIG_KEYS.contains(&key)
}

fn parse_as<T: std::str::FromStr>(value: &str) -> std::result::Result<T, String>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| e.to_string())
}

/// Sets one key on `p`. Keys are matched exactly.
pub fn apply_setting(
    p: &mut SimParams,
    key: &str,
    value: &str,
) -> std::result::Result<(), SettingError> {
    let value = value.trim();
    let r = match key {
        "nx" => parse_as(value).map(|v| p.nx = v),
        "ny" => parse_as(value).map(|v| p.ny = v),
        "dx" => parse_as(value).map(|v| p.dx = v),
        "dt" => parse_as(value).map(|v| p.dt = v),
        "total_steps" => parse_as(value).map(|v| p.total_steps = v),
        "tau" => parse_as(value).map(|v| p.model.tau = v),
        "eps_bar" => parse_as(value).map(|v| p.model.eps_bar = v),
        "delta" => parse_as(value).map(|v| p.model.delta = v),
        "j_mode" => parse_as(value).map(|v| p.model.j_mode = v),
        "theta0" => parse_as(value).map(|v| p.model.theta0 = v),
        "alpha" => parse_as(value).map(|v| p.model.alpha = v),
        "gamma" => parse_as(value).map(|v| p.model.gamma = v),
        "t_eq" => parse_as(value).map(|v| p.model.t_eq = v),
        "latent_heat" => parse_as(value).map(|v| p.model.latent_heat = v),
        "noise_amp" => parse_as(value).map(|v| p.model.noise_amp = v),
        "rng_seed" => parse_as(value).map(|v| p.rng_seed = v),
        "seed_radius_sq" => parse_as(value).map(|v| p.seed_radius_sq = v),
        "divisor_mode" => value.parse::<DivisorMode>().map(|v| p.divisor_mode = v),
        "snapshot_every" => parse_as(value).map(|v| p.snapshot_every = v),
        "diagnostics_every" => parse_as(value).map(|v| p.diagnostics_every = v),
        "replicate_appendix_bug" => parse_as(value).map(|v| p.replicate_appendix_bug = v),
        _ => return Err(SettingError::UnknownKey),
    };
    r.map_err(SettingError::BadValue)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SettingError {
    UnknownKey,
    BadValue(String),
}

/// Applies every `key = value` line of `text` on top of `base`, then
/// validates. Does not check stability.
pub fn apply_config(base: SimParams, text: &str) -> Result<SimParams> {
    let mut p = base;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Syntax {
                line: idx + 1,
                text: raw.trim().to_string(),
            });
        };
        let key = key.trim();
        match apply_setting(&mut p, key, value) {
            Ok(()) => {}
            Err(SettingError::UnknownKey) => return Err(Error::UnknownKey(key.to_string())),
            Err(SettingError::BadValue(reason)) => {
                return Err(Error::ParseValue {
                    line: idx + 1,
                    key: key.to_string(),
                    reason,
                })
            }
        }
    }
    p.validate()?;
    Ok(p)
}

/// Parses a config over the built-in defaults.
///
/// Unless `allow_unstable` is set, a time step above the explicit stability
/// bound is an error.
pub fn parse_config(text: &str, allow_unstable: bool) -> Result<SimParams> {
    let p = apply_config(SimParams::default(), text)?;
    if !allow_unstable {
        ensure_stable(&p)?;
    }
    Ok(p)
}

/// Canonical config text for `p`; parsing it back yields `p` exactly.
pub fn render_config(p: &SimParams) -> String {
    let m = &p.model;
    let values: [String; 21] = [
        p.nx.to_string(),
        p.ny.to_string(),
        fmt_f64(p.dx),
        fmt_f64(p.dt),
        p.total_steps.to_string(),
        fmt_f64(m.tau),
        fmt_f64(m.eps_bar),
        fmt_f64(m.delta),
        m.j_mode.to_string(),
        fmt_f64(m.theta0),
        fmt_f64(m.alpha),
        fmt_f64(m.gamma),
        fmt_f64(m.t_eq),
        fmt_f64(m.latent_heat),
        fmt_f64(m.noise_amp),
        p.rng_seed.to_string(),
        p.seed_radius_sq.to_string(),
        p.divisor_mode.to_string(),
        p.snapshot_every.to_string(),
        p.diagnostics_every.to_string(),
        p.replicate_appendix_bug.to_string(),
    ];
    let mut out = String::new();
    for (key, value) in CONFIG_KEYS.iter().zip(values) {
        out.push_str(key);
        out.push_str(" = ");
        out.push_str(&value);
        out.push('\n');
    }
    out
}

/// Shortest representation that parses back to the same bits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

pub const SNAPSHOT_MAGIC: &str = "PFDS1";
pub const SNAPSHOT_VERSION: u32 = 1;

/// Header metadata stored alongside a snapshot payload.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotMeta {
    pub name: String,
    pub step: u64,
    pub dt: f64,
}

/// Writes a snapshot to `w`; returns the number of bytes written.
pub fn encode_snapshot<W: Write>(w: &mut W, field: &Field, meta: &SnapshotMeta) -> Result<u64> {
    if meta.name.is_empty() || meta.name.chars().any(char::is_whitespace) {
        return Err(Error::Snapshot(format!(
            "field name `{}` must be a non-empty token",
            meta.name
        )));
    }
    let header = format!(
        "{SNAPSHOT_MAGIC}\nversion {SNAPSHOT_VERSION}\nnx {}\nny {}\ndx {}\ndy {}\ndt {}\nstep {}\nfield {}\n\n",
        field.nx(),
        field.ny(),
        fmt_f64(field.dx()),
        fmt_f64(field.dy()),
        fmt_f64(meta.dt),
        meta.step,
        meta.name,
    );
    w.write_all(header.as_bytes())?;
    let mut payload = Vec::with_capacity(8 * field.len());
    for v in field.data() {
        payload.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&payload)?;
    Ok((header.len() + payload.len()) as u64)
}

/// Reads a snapshot written by [`encode_snapshot`].
pub fn decode_snapshot<R: BufRead>(r: &mut R) -> Result<(Field, SnapshotMeta)> {
    let mut line = String::new();
    let next_line = |r: &mut R, line: &mut String| -> Result<()> {
        line.clear();
        let n = r.read_line(line)?;
        if n == 0 || !line.ends_with('\n') {
            return Err(Error::Snapshot("truncated header".into()));
        }
        line.pop();
        Ok(())
    };
    next_line(r, &mut line)?;
    if line != SNAPSHOT_MAGIC {
        return Err(Error::Snapshot(format!(
            "bad magic `{}`, expected `{SNAPSHOT_MAGIC}` (format version {SNAPSHOT_VERSION})",
            line.escape_debug()
        )));
    }
    let mut version = None;
    let (mut nx, mut ny) = (None, None);
    let (mut dx, mut dy, mut dt) = (None, None, None);
    let mut step = None;
    let mut name = None;
    loop {
        next_line(r, &mut line)?;
        if line.is_empty() {
            break;
        }
        let (key, value) = line
            .split_once(' ')
            .ok_or_else(|| Error::Snapshot(format!("malformed header line `{line}`")))?;
        let num_err = |e: &dyn std::fmt::Display| Error::Snapshot(format!("header `{key}`: {e}"));
        match key {
            "version" => version = Some(value.parse::<u32>().map_err(|e| num_err(&e))?),
            "nx" => nx = Some(value.parse::<usize>().map_err(|e| num_err(&e))?),
            "ny" => ny = Some(value.parse::<usize>().map_err(|e| num_err(&e))?),
            "dx" => dx = Some(value.parse::<f64>().map_err(|e| num_err(&e))?),
            "dy" => dy = Some(value.parse::<f64>().map_err(|e| num_err(&e))?),
            "dt" => dt = Some(value.parse::<f64>().map_err(|e| num_err(&e))?),
            "step" => step = Some(value.parse::<u64>().map_err(|e| num_err(&e))?),
            "field" => name = Some(value.to_string()),
            other => return Err(Error::Snapshot(format!("unknown header key `{other}`"))),
        }
    }
    match version {
        Some(SNAPSHOT_VERSION) => {}
        Some(v) => {
            return Err(Error::Snapshot(format!(
                "unsupported version {v}, expected {SNAPSHOT_VERSION}"
            )))
        }
        None => return Err(Error::Snapshot("missing version".into())),
    }
    let missing = |k: &str| Error::Snapshot(format!("missing header `{k}`"));
    let nx = nx.ok_or_else(|| missing("nx"))?;
    let ny = ny.ok_or_else(|| missing("ny"))?;
    let dx = dx.ok_or_else(|| missing("dx"))?;
    let dy = dy.ok_or_else(|| missing("dy"))?;
    let meta = SnapshotMeta {
        name: name.ok_or_else(|| missing("field"))?,
        step: step.ok_or_else(|| missing("step"))?,
        dt: dt.ok_or_else(|| missing("dt"))?,
    };
    let expected = nx
        .checked_mul(ny)
        .and_then(|n| n.checked_mul(8))
        .ok_or_else(|| Error::Snapshot(format!("dimensions {nx}x{ny} overflow")))?;
    let mut payload = Vec::with_capacity(expected);
    r.read_to_end(&mut payload)?;
    if payload.len() != expected {
        return Err(Error::Snapshot(format!(
            "payload size mismatch: {nx}x{ny} needs {expected} bytes, found {}",
            payload.len()
        )));
    }
    let data = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let field = Field::from_vec(nx, ny, dx, dy, data)
        .map_err(|e| Error::Snapshot(format!("invalid dimensions: {e}")))?;
    Ok((field, meta))
}

pub fn write_snapshot(field: &Field, meta: &SnapshotMeta, path: &Path) -> Result<u64> {
    let mut w = BufWriter::new(File::create(path).at(path)?);
    let n = encode_snapshot(&mut w, field, meta)?;
    w.flush().at(path)?;
    Ok(n)
}

pub fn read_snapshot(path: &Path) -> Result<(Field, SnapshotMeta)> {
    let mut r = BufReader::new(File::open(path).at(path)?);
    decode_snapshot(&mut r)
}

/// Grey level for `v`: clamp to `[0, 1]`, scale to 255, round half up.
#[inline]
pub fn grey_level(v: f64) -> u8 {
    let v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
    (v * 255.0 + 0.5).floor() as u8
}

/// Binary `P5` graymap, `nx` wide and `ny` tall, row `j = 0` first.
pub fn encode_pgm<W: Write>(w: &mut W, field: &Field) -> Result<()> {
    write!(w, "P5\n{} {}\n255\n", field.nx(), field.ny())?;
    let pixels: Vec<u8> = field.data().iter().map(|&v| grey_level(v)).collect();
    w.write_all(&pixels)?;
    Ok(())
}

pub fn write_pgm(field: &Field, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).at(path)?);
    encode_pgm(&mut w, field)?;
    w.flush().at(path)
}

/// One row of comma-separated values per grid row, 17 significant digits.
pub fn encode_field_csv<W: Write>(w: &mut W, field: &Field) -> Result<()> {
    for row in field.data().chunks(field.nx()) {
        let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn write_field_csv(field: &Field, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).at(path)?);
    encode_field_csv(&mut w, field)?;
    w.flush().at(path)
}

pub const DIAGNOSTICS_HEADER: &str =
    "step,time,solid_fraction,tip_px,tip_mx,tip_py,tip_my,conservation_sum,free_energy,arm_count";

pub fn encode_diagnostics_csv<W: Write>(w: &mut W, records: &[DiagnosticsRecord]) -> Result<()> {
    writeln!(w, "{DIAGNOSTICS_HEADER}")?;
    for r in records {
        let [px, mx, py, my] = r.tip_extent;
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            r.step,
            fmt_f64(r.time),
            fmt_f64(r.solid_fraction),
            fmt_f64(px),
            fmt_f64(mx),
            fmt_f64(py),
            fmt_f64(my),
            fmt_f64(r.conservation_sum),
            fmt_f64(r.free_energy),
            r.arm_count,
        )?;
    }
    Ok(())
}

pub fn write_diagnostics_csv(records: &[DiagnosticsRecord], path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).at(path)?);
    encode_diagnostics_csv(&mut w, records)?;
    w.flush().at(path)
}

/// Parses a CSV written by [`write_diagnostics_csv`].
pub fn read_diagnostics_csv(path: &Path) -> Result<Vec<DiagnosticsRecord>> {
    let text = fs::read_to_string(path).at(path)?;
    let mut lines = text.lines();
    if lines.next() != Some(DIAGNOSTICS_HEADER) {
        return Err(Error::Snapshot(format!(
            "{}: missing diagnostics header",
            path.display()
        )));
    }
    let bad = |n: usize| Error::Snapshot(format!("{}: malformed row {n}", path.display()));
    lines
        .enumerate()
        .map(|(n, line)| {
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 10 {
                return Err(bad(n + 1));
            }
            let f = |k: usize| cols[k].parse::<f64>().map_err(|_| bad(n + 1));
            Ok(DiagnosticsRecord {
                step: cols[0].parse().map_err(|_| bad(n + 1))?,
                time: f(1)?,
                solid_fraction: f(2)?,
                tip_extent: [f(3)?, f(4)?, f(5)?, f(6)?],
                conservation_sum: f(7)?,
                free_energy: f(8)?,
                arm_count: cols[9].parse().map_err(|_| bad(n + 1))?,
            })
        })
        .collect()
}

/// Everything needed to reproduce and audit a run directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub artifact: String,
    pub version: String,
    /// Canonical config text of the resolved parameters.
    pub config: String,
    pub params: SimParams,
    /// Files written, relative to the run directory, in emission order.
    pub outputs: Vec<String>,
    /// Wall-clock seconds since the Unix epoch. The only non-reproducible field.
    pub created_unix_timestamp: u64,
}

impl Manifest {
    pub fn new(params: &SimParams, outputs: Vec<String>, created_unix_timestamp: u64) -> Self {
        Self {
            artifact: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: render_config(params),
            params: *params,
            outputs,
            created_unix_timestamp,
        }
    }

    /// Re-parses the embedded config text.
    pub fn resolved_params(&self) -> Result<SimParams> {
        apply_config(SimParams::default(), &self.config)
    }
}

pub fn write_manifest(manifest: &Manifest, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(manifest)?;
    text.push('\n');
    fs::write(path, text).at(path)
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let text = fs::read_to_string(path).at(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub(crate) fn ensure_dir(path: &Path) -> Result<PathBuf> {
    fs::create_dir_all(path).at(path)?;
    Ok(path.to_path_buf())
}
