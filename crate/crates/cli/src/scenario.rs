//! Scenario records: parsing from `key = value` text, validation, and the
//! manifest that replays a run.

use std::collections::BTreeSet;
use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;
use std::str::FromStr;

use bellphase_core::analysis::scan::{default_delta_grid, default_gamma_list, spin_grid, ScanOptions};
use bellphase_core::angle::linspace_closed;
use bellphase_core::chsh::{DEFAULT_COARSE_STEP, DEFAULT_REFINE_TOL};
use bellphase_core::experiment::{default_chi_grid, ExperimentConfig, Sampling};
use bellphase_core::io::{parse_path, path_name, write_config, KeyValues};
use bellphase_core::quantum::Path;
use bellphase_core::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Analytic,
    Surface,
    SimulateInterferogram,
    BeamBlock,
    PolarScan,
    AzimuthalScan,
}

impl Kind {
    pub const ALL: [Kind; 6] = [
        Kind::Analytic,
        Kind::Surface,
        Kind::SimulateInterferogram,
        Kind::BeamBlock,
        Kind::PolarScan,
        Kind::AzimuthalScan,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Analytic => "analytic",
            Kind::Surface => "surface",
            Kind::SimulateInterferogram => "simulate-interferogram",
            Kind::BeamBlock => "beam-block",
            Kind::PolarScan => "polar-scan",
            Kind::AzimuthalScan => "azimuthal-scan",
        }
    }

    pub fn parse(s: &str) -> Option<Kind> {
        Kind::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone)]
pub enum Params {
    Analytic {
        gammas: Vec<f64>,
    },
    Surface {
        gamma: f64,
        alpha1_p: f64,
        points: usize,
    },
    SimulateInterferogram {
        gamma: f64,
        delta: f64,
        flipper_on: bool,
        chi_grid: Vec<f64>,
        sampling: Sampling,
    },
    BeamBlock {
        gamma: f64,
        blocked_path: Path,
        delta_grid: Vec<f64>,
        sampling: Sampling,
    },
    PolarScan {
        gammas: Vec<f64>,
        delta_grid: Vec<f64>,
        options: ScanOptions,
        grid_rows: bool,
    },
    AzimuthalScan {
        gammas: Vec<f64>,
        options: ScanOptions,
    },
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ExperimentConfig,
    pub params: Params,
}

fn field(name: &str, reason: impl Into<String>) -> Error {
    Error::Field {
        name: name.to_string(),
        reason: reason.into(),
    }
}

/// Angle in radians. Accepts a bare number or a number followed by `rad`,
/// `deg` or `pi` (multiples of π); `pi` alone is π.
pub fn parse_angle(raw: &str) -> Option<f64> {
    let s = raw.trim();
    let (num, scale) = if let Some(n) = s.strip_suffix("deg") {
        (n, PI / 180.0)
    } else if let Some(n) = s.strip_suffix("rad") {
        (n, 1.0)
    } else if let Some(n) = s.strip_suffix("pi") {
        (n, PI)
    } else {
        (s, 1.0)
    };
    let num = num.trim();
    let v: f64 = if num.is_empty() && scale == PI {
        1.0
    } else {
        num.parse().ok()?
    };
    let out = v * scale;
    out.is_finite().then_some(out)
}

fn parse_sampling(s: &str) -> Option<Sampling> {
    match s {
        "poisson" => Some(Sampling::Poisson),
        "expected" => Some(Sampling::Expected),
        _ => None,
    }
}

fn sampling_name(s: Sampling) -> &'static str {
    match s {
        Sampling::Poisson => "poisson",
        Sampling::Expected => "expected",
    }
}

fn parse_bool(s: &str) -> Option<bool> {
    match s {
        "true" | "on" | "yes" => Some(true),
        "false" | "off" | "no" => Some(false),
        _ => None,
    }
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(f64::to_string).collect::<Vec<_>>().join(", ")
}

/// Key lookup that remembers which keys were consumed.
struct Fields<'a> {
    kv: &'a KeyValues,
    used: BTreeSet<&'static str>,
}

impl<'a> Fields<'a> {
    fn raw(&mut self, key: &'static str) -> Option<&'a str> {
        self.used.insert(key);
        self.kv.get(key)
    }

    fn parsed<T>(&mut self, key: &'static str, default: T, parse: impl Fn(&str) -> Option<T>, what: &str) -> Result<T> {
        match self.raw(key) {
            None => Ok(default),
            Some(raw) => parse(raw).ok_or_else(|| field(key, format!("expected {what}, got `{raw}`"))),
        }
    }

    fn number<T: FromStr>(&mut self, key: &'static str, default: T) -> Result<T> {
        self.parsed(key, default, |s| s.parse().ok(), "a number")
    }

    fn angle(&mut self, key: &'static str, default: f64) -> Result<f64> {
        self.parsed(key, default, parse_angle, "an angle (rad, deg or pi)")
    }

    fn angles(&mut self, key: &'static str, default: Vec<f64>) -> Result<Vec<f64>> {
        let Some(raw) = self.raw(key) else {
            return Ok(default);
        };
        if raw.trim().is_empty() {
            return Ok(Vec::new());
        }
        raw.split(',')
            .map(|item| parse_angle(item).ok_or_else(|| field(key, format!("cannot parse angle `{}`", item.trim()))))
            .collect()
    }

    fn non_empty_angles(&mut self, key: &'static str, default: Vec<f64>) -> Result<Vec<f64>> {
        let v = self.angles(key, default)?;
        if v.is_empty() {
            return Err(field(key, "list is empty"));
        }
        Ok(v)
    }

    fn sampling(&mut self) -> Result<Sampling> {
        self.parsed("sampling", Sampling::Poisson, parse_sampling, "poisson or expected")
    }

    fn flag(&mut self, key: &'static str, default: bool) -> Result<bool> {
        self.parsed(key, default, parse_bool, "true or false")
    }

    fn scan_options(&mut self) -> Result<ScanOptions> {
        let options = ScanOptions {
            sampling: self.sampling()?,
            normalize_contrast: self.flag("normalize_contrast", false)?,
            chi_grid: self.non_empty_angles("chi_grid", default_chi_grid())?,
            coarse_step: self.angle("coarse_step", DEFAULT_COARSE_STEP)?,
            refine_tol: self.angle("refine_tol", DEFAULT_REFINE_TOL)?,
        };
        bellphase_core::chsh::check_search_params(options.coarse_step, options.refine_tol)?;
        Ok(options)
    }

    fn finish(self, kind: Kind) -> Result<()> {
        for (k, _) in self.kv.iter() {
            if k != "kind" && !self.used.contains(k) {
                return Err(field(k, format!("not a parameter of `{kind}`")));
            }
        }
        Ok(())
    }
}

/// Default γ grid of the analytic curves: 25 points over [0, 2π].
pub fn analytic_gamma_grid() -> Vec<f64> {
    linspace_closed(0.0, TAU, 25)
}

impl Scenario {
    /// Builds a scenario of `kind` from `kv`; absent keys take their defaults.
    /// `seed` overrides any seed in `kv`.
    pub fn from_fields(kind: Kind, kv: &KeyValues, seed: Option<u64>) -> Result<Scenario> {
        if let Some(k) = kv.get("kind") {
            if Kind::parse(k) != Some(kind) {
                return Err(field("kind", format!("`{k}` does not match subcommand `{kind}`")));
            }
        }
        let mut f = Fields {
            kv,
            used: BTreeSet::new(),
        };
        let defaults = ExperimentConfig::default();
        let file_seed = f.number("seed", defaults.seed)?;
        let config = ExperimentConfig {
            max_rate: f.number("max_rate", defaults.max_rate)?,
            measure_time: f.number("measure_time", defaults.measure_time)?,
            visibility: f.number("visibility", defaults.visibility)?,
            theta: f.angle("theta", defaults.theta)?,
            dyn_offset: f.angle("dyn_offset", defaults.dyn_offset)?,
            seed: seed.unwrap_or(file_seed),
        };
        config.validate()?;

        let params = match kind {
            Kind::Analytic => {
                if config.theta != 0.0 {
                    return Err(field("theta", "analytic curves assume a perfect flip (theta = 0)"));
                }
                Params::Analytic {
                    gammas: f.non_empty_angles("gammas", analytic_gamma_grid())?,
                }
            }
            Kind::Surface => {
                let points = f.number("points", 180usize)?;
                if points < 2 {
                    return Err(field("points", "need at least 2 points per axis"));
                }
                Params::Surface {
                    gamma: f.angle("gamma", FRAC_PI_2)?,
                    alpha1_p: f.angle("alpha1_p", FRAC_PI_2)?,
                    points,
                }
            }
            Kind::SimulateInterferogram => Params::SimulateInterferogram {
                gamma: f.angle("gamma", 0.0)?,
                delta: f.angle("delta", FRAC_PI_2)?,
                flipper_on: f.flag("flipper_on", true)?,
                chi_grid: f.non_empty_angles("chi_grid", default_chi_grid())?,
                sampling: f.sampling()?,
            },
            Kind::BeamBlock => Params::BeamBlock {
                gamma: f.angle("gamma", 0.0)?,
                blocked_path: f.parsed("blocked_path", Path::II, parse_path, "I or II")?,
                delta_grid: f.non_empty_angles("delta_grid", spin_grid(&default_delta_grid()))?,
                sampling: f.sampling()?,
            },
            Kind::PolarScan => Params::PolarScan {
                gammas: f.non_empty_angles("gammas", default_gamma_list())?,
                delta_grid: f.non_empty_angles("delta_grid", default_delta_grid())?,
                options: f.scan_options()?,
                grid_rows: f.flag("grid_rows", true)?,
            },
            Kind::AzimuthalScan => Params::AzimuthalScan {
                gammas: f.non_empty_angles("gammas", default_gamma_list())?,
                options: f.scan_options()?,
            },
        };
        f.finish(kind)?;
        Ok(Scenario { config, params })
    }

    /// Builds a scenario from a manifest, which names its own kind.
    pub fn from_manifest(kv: &KeyValues, seed: Option<u64>) -> Result<Scenario> {
        let raw = kv.require("kind")?;
        let kind = Kind::parse(raw).ok_or_else(|| {
            let names: Vec<_> = Kind::ALL.iter().map(|k| k.as_str()).collect();
            field(
                "kind",
                format!("unknown kind `{raw}`, expected one of {}", names.join(", ")),
            )
        })?;
        Self::from_fields(kind, kv, seed)
    }

    pub fn kind(&self) -> Kind {
        match self.params {
            Params::Analytic { .. } => Kind::Analytic,
            Params::Surface { .. } => Kind::Surface,
            Params::SimulateInterferogram { .. } => Kind::SimulateInterferogram,
            Params::BeamBlock { .. } => Kind::BeamBlock,
            Params::PolarScan { .. } => Kind::PolarScan,
            Params::AzimuthalScan { .. } => Kind::AzimuthalScan,
        }
    }

    /// Complete record of the scenario with every default resolved.
    pub fn manifest(&self) -> KeyValues {
        let mut kv = KeyValues::new();
        kv.set("kind", self.kind());
        write_config(&mut kv, &self.config);
        let scan = |kv: &mut KeyValues, o: &ScanOptions| {
            kv.set("sampling", sampling_name(o.sampling));
            kv.set("normalize_contrast", o.normalize_contrast);
            kv.set("chi_grid", join(&o.chi_grid));
            kv.set("coarse_step", o.coarse_step);
            kv.set("refine_tol", o.refine_tol);
        };
        match &self.params {
            Params::Analytic { gammas } => kv.set("gammas", join(gammas)),
            Params::Surface {
                gamma,
                alpha1_p,
                points,
            } => {
                kv.set("gamma", gamma);
                kv.set("alpha1_p", alpha1_p);
                kv.set("points", points);
            }
            Params::SimulateInterferogram {
                gamma,
                delta,
                flipper_on,
                chi_grid,
                sampling,
            } => {
                kv.set("gamma", gamma);
                kv.set("delta", delta);
                kv.set("flipper_on", flipper_on);
                kv.set("chi_grid", join(chi_grid));
                kv.set("sampling", sampling_name(*sampling));
            }
            Params::BeamBlock {
                gamma,
                blocked_path,
                delta_grid,
                sampling,
            } => {
                kv.set("gamma", gamma);
                kv.set("blocked_path", path_name(*blocked_path));
                kv.set("delta_grid", join(delta_grid));
                kv.set("sampling", sampling_name(*sampling));
            }
            Params::PolarScan {
                gammas,
                delta_grid,
                options,
                grid_rows,
            } => {
                kv.set("gammas", join(gammas));
                kv.set("delta_grid", join(delta_grid));
                scan(&mut kv, options);
                kv.set("grid_rows", grid_rows);
            }
            Params::AzimuthalScan { gammas, options } => {
                kv.set("gammas", join(gammas));
                scan(&mut kv, options);
            }
        }
        kv
    }
}
