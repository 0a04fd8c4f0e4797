mod scenario;

use std::fs;
use std::path::{Path as FsPath, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use bellphase_core::analysis::scan::{analytic_azimuthal_result, analytic_polar_result, grid_polar_result, ScanResult};
use bellphase_core::analysis::{run_azimuthal_scan, run_polar_scan, AdjustedAngles};
use bellphase_core::angle::linspace_open;
use bellphase_core::chsh::{chsh_combination, s_no_adjustment, s_polar_max, BellAngleSet, Method};
use bellphase_core::experiment::{reference_run, simulate_beam_block, simulate_interferogram, stream_index, Sampler};
use bellphase_core::io::{save_beam_block, save_interferogram, write_rows, write_scan_rows, KeyValues, ScanRow};
use bellphase_core::quantum::bell_state;
use bellphase_core::TSIRELSON;
use clap::{Args, Parser, Subcommand};

use scenario::{Kind, Params, Scenario};

/// Simulates neutron path-spin Bell tests with a geometric-phase flipper.
#[derive(Parser)]
#[command(name = "bellphase", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Master seed of every random stream [default: 0, or the config's `seed`]
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory, created if missing
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// `key = value` file with configuration and parameters
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Extra `key=value` setting, applied after the config file
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form S curves against γ
    Analytic,
    /// S over the (β₁, β₁′) plane at one γ
    Surface,
    /// One simulated interferogram (χ scan)
    Simulate,
    /// One beam-block δ scan
    BeamBlock,
    /// Polar-adjusted S from simulated counts
    ScanPolar,
    /// Azimuthal-adjusted and unadjusted S from simulated counts
    ScanAzimuthal,
    /// Replays the scenario recorded in a manifest
    Run {
        /// Manifest written by an earlier run
        manifest: PathBuf,
    },
}

impl Command {
    fn kind(&self) -> Option<Kind> {
        Some(match self {
            Command::Analytic => Kind::Analytic,
            Command::Surface => Kind::Surface,
            Command::Simulate => Kind::SimulateInterferogram,
            Command::BeamBlock => Kind::BeamBlock,
            Command::ScanPolar => Kind::PolarScan,
            Command::ScanAzimuthal => Kind::AzimuthalScan,
            Command::Run { .. } => return None,
        })
    }
}

const MANIFEST: &str = "manifest.txt";

fn read_fields(path: Option<&FsPath>, overrides: &[String]) -> Result<KeyValues> {
    let mut kv = match path {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            KeyValues::parse(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => KeyValues::new(),
    };
    for s in overrides {
        let (k, v) = s
            .split_once('=')
            .with_context(|| format!("--set expects KEY=VALUE, got `{s}`"))?;
        kv.set(k.trim(), v.trim());
    }
    Ok(kv)
}

fn write_file(dir: &FsPath, name: &str, bytes: &[u8]) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn scan_table(rows: impl IntoIterator<Item = ScanResult>) -> Result<Vec<u8>> {
    let rows: Vec<ScanRow> = rows.into_iter().map(|r| ScanRow::from(&r)).collect();
    let mut buf = Vec::new();
    write_scan_rows(&mut buf, &rows)?;
    Ok(buf)
}

/// Executes `scenario`, writing its tables and then the manifest into `out`.
fn run(scenario: &Scenario, out: &FsPath) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let config = &scenario.config;
    match &scenario.params {
        Params::Analytic { gammas } => {
            let mut buf = Vec::new();
            write_rows(
                &mut buf,
                &["gamma_rad", "s_no_adjust", "s_polar_max", "s_azimuthal_max"],
                gammas
                    .iter()
                    .map(|&g| vec![g, s_no_adjustment(g), s_polar_max(g), TSIRELSON]),
            )?;
            write_file(out, "analytic.csv", &buf)?;
        }
        Params::Surface {
            gamma,
            alpha1_p,
            points,
        } => {
            let state = bell_state(*gamma, config.theta, 0.0);
            let axis = linspace_open(0.0, std::f64::consts::TAU, *points);
            let rows = axis.iter().flat_map(|&b| {
                let state = &state;
                axis.iter().map(move |&bp| {
                    let s = chsh_combination(state, &BellAngleSet::polar(*alpha1_p, b, bp)).abs();
                    vec![b, bp, s]
                })
            });
            let mut buf = Vec::new();
            write_rows(&mut buf, &["beta1_rad", "beta1p_rad", "s"], rows)?;
            write_file(out, "surface.csv", &buf)?;
        }
        Params::SimulateInterferogram {
            gamma,
            delta,
            flipper_on,
            chi_grid,
            sampling,
        } => {
            let mut sampler = Sampler::new(*sampling, config.seed, stream_index(0, 0));
            let gram = if *flipper_on {
                simulate_interferogram(config, *delta, *gamma, chi_grid, &mut sampler)?
            } else {
                reference_run(config, *delta, chi_grid, &mut sampler)?
            };
            save_interferogram(&out.join("interferogram.csv"), &gram, config)?;
        }
        Params::BeamBlock {
            gamma,
            blocked_path,
            delta_grid,
            sampling,
        } => {
            let mut sampler = Sampler::new(*sampling, config.seed, stream_index(0, 0));
            let run = simulate_beam_block(config, delta_grid, *gamma, *blocked_path, &mut sampler)?;
            save_beam_block(&out.join("beam_block.csv"), &run, config)?;
        }
        Params::PolarScan {
            gammas,
            delta_grid,
            options,
            grid_rows,
        } => {
            let mut rows = run_polar_scan(config, gammas, delta_grid, options)?;
            rows.extend(gammas.iter().map(|&g| analytic_polar_result(g)));
            if *grid_rows {
                for &g in gammas {
                    rows.push(grid_polar_result(g, options.coarse_step, options.refine_tol)?);
                }
            }
            write_file(out, "scan_polar.csv", &scan_table(rows)?)?;
        }
        Params::AzimuthalScan { gammas, options } => {
            let results = run_azimuthal_scan(config, gammas, options)?;
            let adjusted = results
                .iter()
                .map(|r| r.adjusted)
                .chain(gammas.iter().map(|&g| analytic_azimuthal_result(g)));
            write_file(out, "scan_azimuthal.csv", &scan_table(adjusted)?)?;
            let unadjusted = results
                .iter()
                .map(|r| r.unadjusted)
                .chain(gammas.iter().map(|&g| ScanResult {
                    gamma: g,
                    angles: AdjustedAngles::Azimuthal { alpha2_p: 0.0 },
                    angle_sigmas: AdjustedAngles::Azimuthal { alpha2_p: 0.0 },
                    s: s_no_adjustment(g),
                    sigma_s: 0.0,
                    method: Method::Analytic,
                }));
            write_file(out, "scan_azimuthal_unadjusted.csv", &scan_table(unadjusted)?)?;
        }
    }
    write_file(out, MANIFEST, scenario.manifest().to_string().as_bytes())
}

fn main() -> ExitCode {
    match try_main(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn try_main(cli: Cli) -> Result<()> {
    let common = &cli.common;
    let scenario = match (&cli.command, cli.command.kind()) {
        (_, Some(kind)) => {
            let kv = read_fields(common.config.as_deref(), &common.set)?;
            Scenario::from_fields(kind, &kv, common.seed)?
        }
        (Command::Run { manifest }, None) => {
            if common.config.is_some() {
                bail!("--config cannot be combined with run; the manifest holds the whole scenario");
            }
            Scenario::from_manifest(&read_fields(Some(manifest), &common.set)?, common.seed)?
        }
        (_, None) => unreachable!("every other subcommand names a kind"),
    };
    run(&scenario, &common.out)
}
