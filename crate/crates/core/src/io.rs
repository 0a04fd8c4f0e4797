//! CSV tables and `key = value` metadata records.
//!
//! Floats are written with Rust's shortest round-trip formatting, so every
//! record reads back bit for bit.

use std::fmt;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path as FsPath, PathBuf};
use std::str::FromStr;

use crate::analysis::scan::{AdjustedAngles, ScanResult};
use crate::chsh::Method;
use crate::experiment::{BeamBlockRun, ExperimentConfig, Interferogram};
use crate::quantum::Path;
use crate::{Error, Result};

/// Ordered `key = value` record. Lines starting with `#` and blank lines are
/// ignored when parsing; keys must be unique.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KeyValues {
    entries: Vec<(String, String)>,
}

impl KeyValues {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends or replaces `key`.
    pub fn set(&mut self, key: &str, value: impl fmt::Display) {
        let value = value.to_string();
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(e) => e.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut out = Self::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("expected `key = value`, got `{line}`"),
                });
            };
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() {
                return Err(Error::Parse {
                    line: i + 1,
                    message: "empty key".into(),
                });
            }
            if out.get(k).is_some() {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("duplicate key `{k}`"),
                });
            }
            out.entries.push((k.to_string(), v.to_string()));
        }
        Ok(out)
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| Error::Field {
            name: key.to_string(),
            reason: "missing".into(),
        })
    }

    /// Parses `key` with `FromStr`.
    pub fn value<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        let raw = self.require(key)?;
        raw.parse().map_err(|e: T::Err| Error::Field {
            name: key.to_string(),
            reason: format!("cannot parse `{raw}`: {e}"),
        })
    }
}

impl fmt::Display for KeyValues {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.entries {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}

pub fn write_config(kv: &mut KeyValues, config: &ExperimentConfig) {
    kv.set("max_rate", config.max_rate);
    kv.set("measure_time", config.measure_time);
    kv.set("visibility", config.visibility);
    kv.set("theta", config.theta);
    kv.set("dyn_offset", config.dyn_offset);
    kv.set("seed", config.seed);
}

pub fn read_config(kv: &KeyValues) -> Result<ExperimentConfig> {
    let config = ExperimentConfig {
        max_rate: kv.value("max_rate")?,
        measure_time: kv.value("measure_time")?,
        visibility: kv.value("visibility")?,
        theta: kv.value("theta")?,
        dyn_offset: kv.value("dyn_offset")?,
        seed: kv.value("seed")?,
    };
    config.validate()?;
    Ok(config)
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse {
            line,
            message: format!("{other:?}"),
        },
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn write_table<W: Write>(w: W, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header).map_err(csv_error)?;
    for row in rows {
        out.write_record(&row).map_err(csv_error)?;
    }
    out.flush()?;
    Ok(())
}

fn read_table<R: Read>(r: R, header: &[&str]) -> Result<Vec<csv::StringRecord>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let found = rdr.headers().map_err(csv_error)?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "expected header `{}`, got `{}`",
                header.join(","),
                found.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    rdr.records().map(|r| r.map_err(csv_error)).collect()
}

fn cell<T: FromStr>(rec: &csv::StringRecord, i: usize) -> Result<T> {
    let line = rec.position().map_or(0, |p| p.line() as usize);
    let raw = rec.get(i).ok_or_else(|| Error::Parse {
        line,
        message: format!("missing column {}", i + 1),
    })?;
    raw.parse().map_err(|_| Error::Parse {
        line,
        message: format!("cannot parse `{raw}`"),
    })
}

fn opt_cell(rec: &csv::StringRecord, i: usize) -> Result<Option<f64>> {
    match rec.get(i) {
        Some("") | None => Ok(None),
        Some(_) => cell(rec, i).map(Some),
    }
}

/// Numeric table with an arbitrary header.
pub fn write_rows<W: Write>(w: W, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    write_table(
        w,
        header,
        rows.into_iter().map(|r| r.iter().map(f64::to_string).collect()),
    )
}

/// Two-column numeric table.
pub fn write_xy<W: Write>(w: W, header: [&str; 2], xs: &[f64], ys: &[f64]) -> Result<()> {
    write_table(
        w,
        &header,
        xs.iter().zip(ys).map(|(x, y)| vec![x.to_string(), y.to_string()]),
    )
}

pub fn read_xy<R: Read>(r: R, header: [&str; 2]) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for rec in read_table(r, &header)? {
        xs.push(cell(&rec, 0)?);
        ys.push(cell(&rec, 1)?);
    }
    Ok((xs, ys))
}

pub const INTERFEROGRAM_HEADER: [&str; 2] = ["chi_rad", "counts"];
pub const BEAM_BLOCK_HEADER: [&str; 2] = ["delta_rad", "counts"];

/// Path of the metadata file that accompanies `csv`.
pub fn meta_path(csv: &FsPath) -> PathBuf {
    let mut s = csv.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

pub fn interferogram_metadata(gram: &Interferogram, config: &ExperimentConfig) -> KeyValues {
    let mut kv = KeyValues::new();
    kv.set("delta", gram.delta);
    kv.set("gamma", gram.gamma);
    kv.set("flipper_on", gram.flipper_on);
    write_config(&mut kv, config);
    kv
}

/// Writes `csv` and its `.meta` sidecar.
pub fn save_interferogram(csv: &FsPath, gram: &Interferogram, config: &ExperimentConfig) -> Result<()> {
    let mut buf = Vec::new();
    write_xy(&mut buf, INTERFEROGRAM_HEADER, &gram.chi_values, &gram.counts)?;
    fs::write(csv, buf)?;
    fs::write(meta_path(csv), interferogram_metadata(gram, config).to_string())?;
    Ok(())
}

pub fn load_interferogram(csv: &FsPath) -> Result<(Interferogram, ExperimentConfig)> {
    let (chi_values, counts) = read_xy(fs::File::open(csv)?, INTERFEROGRAM_HEADER)?;
    let kv = KeyValues::parse(&fs::read_to_string(meta_path(csv))?)?;
    let gram = Interferogram {
        chi_values,
        counts,
        delta: kv.value("delta")?,
        gamma: kv.value("gamma")?,
        flipper_on: kv.value("flipper_on")?,
    };
    Ok((gram, read_config(&kv)?))
}

pub fn path_name(p: Path) -> &'static str {
    match p {
        Path::I => "I",
        Path::II => "II",
    }
}

pub fn parse_path(s: &str) -> Option<Path> {
    match s {
        "I" => Some(Path::I),
        "II" => Some(Path::II),
        _ => None,
    }
}

pub fn beam_block_metadata(run: &BeamBlockRun, config: &ExperimentConfig) -> KeyValues {
    let mut kv = KeyValues::new();
    kv.set("gamma", run.gamma);
    kv.set("blocked_path", path_name(run.blocked_path));
    write_config(&mut kv, config);
    kv
}

pub fn save_beam_block(csv: &FsPath, run: &BeamBlockRun, config: &ExperimentConfig) -> Result<()> {
    let mut buf = Vec::new();
    write_xy(&mut buf, BEAM_BLOCK_HEADER, &run.delta_values, &run.counts)?;
    fs::write(csv, buf)?;
    fs::write(meta_path(csv), beam_block_metadata(run, config).to_string())?;
    Ok(())
}

pub fn load_beam_block(csv: &FsPath) -> Result<(BeamBlockRun, ExperimentConfig)> {
    let (delta_values, counts) = read_xy(fs::File::open(csv)?, BEAM_BLOCK_HEADER)?;
    let kv = KeyValues::parse(&fs::read_to_string(meta_path(csv))?)?;
    let raw = kv.require("blocked_path")?;
    let blocked_path = parse_path(raw).ok_or_else(|| Error::Field {
        name: "blocked_path".into(),
        reason: format!("expected I or II, got `{raw}`"),
    })?;
    let run = BeamBlockRun {
        delta_values,
        counts,
        gamma: kv.value("gamma")?,
        blocked_path,
    };
    Ok((run, read_config(&kv)?))
}

pub const SCAN_HEADER: [&str; 7] = [
    "gamma_rad",
    "beta1_rad",
    "beta1p_rad",
    "alpha2p_rad",
    "s",
    "sigma_s",
    "method",
];

/// One row of a scan table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub gamma: f64,
    pub beta1: Option<f64>,
    pub beta1_p: Option<f64>,
    pub alpha2_p: Option<f64>,
    pub s: f64,
    pub sigma_s: f64,
    pub method: Method,
}

impl From<&ScanResult> for ScanRow {
    fn from(r: &ScanResult) -> Self {
        let (beta1, beta1_p, alpha2_p) = match r.angles {
            AdjustedAngles::Polar { beta1, beta1_p } => (Some(beta1), Some(beta1_p), None),
            AdjustedAngles::Azimuthal { alpha2_p } => (None, None, Some(alpha2_p)),
        };
        Self {
            gamma: r.gamma,
            beta1,
            beta1_p,
            alpha2_p,
            s: r.s,
            sigma_s: r.sigma_s,
            method: r.method,
        }
    }
}

pub fn write_scan_rows<W: Write>(w: W, rows: &[ScanRow]) -> Result<()> {
    write_table(
        w,
        &SCAN_HEADER,
        rows.iter().map(|r| {
            vec![
                r.gamma.to_string(),
                fmt_opt(r.beta1),
                fmt_opt(r.beta1_p),
                fmt_opt(r.alpha2_p),
                r.s.to_string(),
                r.sigma_s.to_string(),
                r.method.as_str().to_string(),
            ]
        }),
    )
}

pub fn read_scan_rows<R: Read>(r: R) -> Result<Vec<ScanRow>> {
    read_table(r, &SCAN_HEADER)?
        .iter()
        .map(|rec| {
            let m: String = cell(rec, 6)?;
            let method = Method::parse(&m).ok_or_else(|| Error::Parse {
                line: rec.position().map_or(0, |p| p.line() as usize),
                message: format!("unknown method `{m}`"),
            })?;
            Ok(ScanRow {
                gamma: cell(rec, 0)?,
                beta1: opt_cell(rec, 1)?,
                beta1_p: opt_cell(rec, 2)?,
                alpha2_p: opt_cell(rec, 3)?,
                s: cell(rec, 4)?,
                sigma_s: cell(rec, 5)?,
                method,
            })
        })
        .collect()
}
