//! Monte Carlo model of the counting experiment.
//!
//! Every detector reading is a Poisson draw around an expected count
//! `rate · measure_time`. Rates come from the exact joint probabilities of
//! [`crate::quantum`], with finite fringe contrast modelled as a blend of the
//! ideal probability toward its mean over the scanned phase:
//!
//! ```text
//! rate = max_rate · (m + V (p − m)) / p_peak
//! ```
//!
//! where `p_peak = 1/2` is the largest single-outcome probability of the ideal
//! state, so that `max_rate` is the peak rate at `V = 1`. Interferograms blend
//! toward the χ-average, beam-block curves toward the δ-average; both averages
//! are exact because the probabilities are first harmonics of the scanned
//! angle.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::angle::linspace_open;
use crate::quantum::{
    bell_state_with_offset, flipped_spinor, flipper_off_state, joint_probability, spin_up, JointSetting,
    MeasurementDirection, Path, PureState, Sign,
};
use crate::{Error, Result};

/// Largest probability of a single joint outcome for the ideal state.
pub const PEAK_PROBABILITY: f64 = 0.5;

/// Number of points in the default χ grid.
pub const DEFAULT_CHI_POINTS: usize = 32;

/// Parameters of the simulated instrument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentConfig {
    /// Peak detection rate R at unit contrast, counts/s.
    pub max_rate: f64,
    /// Counting time per point, s.
    pub measure_time: f64,
    /// Fringe contrast V in `[0, 1]`.
    pub visibility: f64,
    /// Flip imperfection θ, rad.
    pub theta: f64,
    /// Constant dynamical phase, rad.
    pub dyn_offset: f64,
    /// Master seed of all random streams.
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            max_rate: 25.0,
            measure_time: 800.0,
            visibility: 1.0,
            theta: 0.0,
            dyn_offset: 0.0,
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.max_rate > 0.0 && self.max_rate.is_finite()) {
            return Err(Error::Domain {
                name: "max_rate",
                value: self.max_rate,
                reason: "must be positive and finite",
            });
        }
        if !(self.measure_time > 0.0 && self.measure_time.is_finite()) {
            return Err(Error::Domain {
                name: "measure_time",
                value: self.measure_time,
                reason: "must be positive and finite",
            });
        }
        if !(0.0..=1.0).contains(&self.visibility) {
            return Err(Error::Domain {
                name: "visibility",
                value: self.visibility,
                reason: "must lie in [0, 1]",
            });
        }
        if !self.theta.is_finite() {
            return Err(Error::Domain {
                name: "theta",
                value: self.theta,
                reason: "must be finite",
            });
        }
        if !self.dyn_offset.is_finite() {
            return Err(Error::Domain {
                name: "dyn_offset",
                value: self.dyn_offset,
                reason: "must be finite",
            });
        }
        Ok(())
    }

    /// `max_rate · measure_time`.
    pub fn peak_counts(&self) -> f64 {
        self.max_rate * self.measure_time
    }

    fn scaled(&self, p: f64, mean: f64) -> f64 {
        self.max_rate * (mean + self.visibility * (p - mean)) / PEAK_PROBABILITY
    }
}

/// Poisson draws or exact expected counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampling {
    Poisson,
    Expected,
}

/// Source of counts for one simulated run.
#[derive(Debug, Clone)]
pub enum Sampler {
    Poisson(Box<ChaCha8Rng>),
    Expected,
}

impl Sampler {
    /// ChaCha8 generator keyed by `seed` on the given stream.
    pub fn poisson(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Sampler::Poisson(Box::new(rng))
    }

    pub fn new(sampling: Sampling, seed: u64, stream: u64) -> Self {
        match sampling {
            Sampling::Poisson => Self::poisson(seed, stream),
            Sampling::Expected => Sampler::Expected,
        }
    }

    /// One reading with the given expectation.
    pub fn draw(&mut self, mean: f64) -> f64 {
        match self {
            Sampler::Expected => mean,
            Sampler::Poisson(rng) => {
                if mean > 0.0 {
                    Poisson::new(mean).expect("finite positive mean").sample(rng)
                } else {
                    0.0
                }
            }
        }
    }
}

/// Stream index for setting `setting` of the `gamma_index`-th geometric phase.
pub fn stream_index(gamma_index: usize, setting: usize) -> u64 {
    ((gamma_index as u64) << 32) | setting as u64
}

/// Counts versus path phase χ at fixed spin analysis δ.
#[derive(Debug, Clone, PartialEq)]
pub struct Interferogram {
    pub chi_values: Vec<f64>,
    /// Integer-valued for Poisson runs, exact expectations otherwise.
    pub counts: Vec<f64>,
    pub delta: f64,
    pub gamma: f64,
    /// False for a reference run.
    pub flipper_on: bool,
}

/// Counts versus spin analysis δ with one path blocked.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamBlockRun {
    pub delta_values: Vec<f64>,
    pub counts: Vec<f64>,
    pub gamma: f64,
    pub blocked_path: Path,
}

/// Counts of the four sign combinations at one setting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountQuadruple {
    pub n_pp: f64,
    pub n_pm: f64,
    pub n_mp: f64,
    pub n_mm: f64,
}

impl CountQuadruple {
    pub fn new(n_pp: f64, n_pm: f64, n_mp: f64, n_mm: f64) -> Self {
        Self { n_pp, n_pm, n_mp, n_mm }
    }

    pub fn total(&self) -> f64 {
        self.n_pp + self.n_pm + self.n_mp + self.n_mm
    }
}

/// The default χ grid: two periods, [`DEFAULT_CHI_POINTS`] points.
pub fn default_chi_grid() -> Vec<f64> {
    linspace_open(0.0, 4.0 * PI, DEFAULT_CHI_POINTS)
}

fn x_plus() -> MeasurementDirection {
    MeasurementDirection::path(FRAC_PI_2, 0.0)
}

fn spin_dir(delta: f64) -> MeasurementDirection {
    MeasurementDirection::spin(delta, 0.0)
}

fn chi_blend(config: &ExperimentConfig, chi: f64, p: impl Fn(f64) -> f64) -> f64 {
    let here = p(chi);
    let mean = 0.5 * (here + p(chi + PI));
    config.scaled(here, mean)
}

/// Ideal probability of the `(+x̂ path, +δ spin)` outcome.
pub fn ideal_probability(config: &ExperimentConfig, chi: f64, delta: f64, gamma: f64) -> f64 {
    let state = bell_state_with_offset(gamma, config.theta, chi, config.dyn_offset);
    joint_probability(&state, &JointSetting::plus_plus(x_plus(), spin_dir(delta)))
}

/// Detection rate of the `(+x̂, +δ)` outcome in counts/s.
pub fn detection_rate(config: &ExperimentConfig, chi: f64, delta: f64, gamma: f64) -> f64 {
    chi_blend(config, chi, |c| ideal_probability(config, c, delta, gamma))
}

/// Detection rate with the in-beam flipper switched off.
pub fn reference_rate(config: &ExperimentConfig, chi: f64, delta: f64) -> f64 {
    chi_blend(config, chi, |c| {
        let state = flipper_off_state(c, config.dyn_offset);
        joint_probability(&state, &JointSetting::plus_plus(x_plus(), spin_dir(delta)))
    })
}

/// Ideal probability of spin outcome `+δ` with `blocked` absorbed; the open
/// branch carries amplitude `1/√2`.
pub fn beam_block_probability(config: &ExperimentConfig, delta: f64, blocked: Path) -> f64 {
    let spinor = match blocked.other() {
        Path::I => spin_up(),
        Path::II => flipped_spinor(config.theta),
    };
    0.5 * spin_dir(delta).ket(Sign::Plus).dotc(&spinor).norm_sqr()
}

/// Detection rate behind a beam block in counts/s.
pub fn beam_block_rate(config: &ExperimentConfig, delta: f64, blocked: Path) -> f64 {
    let p = beam_block_probability(config, delta, blocked);
    let mean = 0.5 * (p + beam_block_probability(config, delta + PI, blocked));
    config.scaled(p, mean)
}

/// The full state for a χ-scan point, for callers that want to cross-check
/// rates against [`joint_probability`].
pub fn scan_state(config: &ExperimentConfig, chi: f64, gamma: f64) -> PureState {
    bell_state_with_offset(gamma, config.theta, chi, config.dyn_offset)
}

fn check_grid(name: &'static str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Domain {
            name,
            value: 0.0,
            reason: "grid must not be empty",
        });
    }
    Ok(())
}

/// χ-scan with the flipper on.
pub fn simulate_interferogram(
    config: &ExperimentConfig,
    delta: f64,
    gamma: f64,
    chi_grid: &[f64],
    sampler: &mut Sampler,
) -> Result<Interferogram> {
    config.validate()?;
    check_grid("chi_grid", chi_grid)?;
    let counts = chi_grid
        .iter()
        .map(|&chi| sampler.draw(detection_rate(config, chi, delta, gamma) * config.measure_time))
        .collect();
    Ok(Interferogram {
        chi_values: chi_grid.to_vec(),
        counts,
        delta,
        gamma,
        flipper_on: true,
    })
}

/// χ-scan with the flipper off, used to calibrate phase zero and contrast.
pub fn reference_run(
    config: &ExperimentConfig,
    delta: f64,
    chi_grid: &[f64],
    sampler: &mut Sampler,
) -> Result<Interferogram> {
    config.validate()?;
    check_grid("chi_grid", chi_grid)?;
    let counts = chi_grid
        .iter()
        .map(|&chi| sampler.draw(reference_rate(config, chi, delta) * config.measure_time))
        .collect();
    Ok(Interferogram {
        chi_values: chi_grid.to_vec(),
        counts,
        delta,
        gamma: 0.0,
        flipper_on: false,
    })
}

/// δ-scan with one path blocked. `gamma` is recorded but cannot influence a
/// single-path measurement.
pub fn simulate_beam_block(
    config: &ExperimentConfig,
    delta_grid: &[f64],
    gamma: f64,
    blocked_path: Path,
    sampler: &mut Sampler,
) -> Result<BeamBlockRun> {
    config.validate()?;
    check_grid("delta_grid", delta_grid)?;
    let counts = delta_grid
        .iter()
        .map(|&d| sampler.draw(beam_block_rate(config, d, blocked_path) * config.measure_time))
        .collect();
    Ok(BeamBlockRun {
        delta_values: delta_grid.to_vec(),
        counts,
        gamma,
        blocked_path,
    })
}

/// `E = (N₊₊ − N₊₋ − N₋₊ + N₋₋)/N` with Poisson error propagation.
pub fn counts_to_expectation(q: &CountQuadruple) -> Result<(f64, f64)> {
    let total = q.total();
    if !(total > 0.0) {
        return Err(Error::ZeroCounts);
    }
    let e = (q.n_pp - q.n_pm - q.n_mp + q.n_mm) / total;
    let var: f64 = [(q.n_pp, 1.0), (q.n_pm, -1.0), (q.n_mp, -1.0), (q.n_mm, 1.0)]
        .iter()
        .map(|&(n, s)| (s - e) * (s - e) * n)
        .sum::<f64>()
        / (total * total);
    Ok((e, var.sqrt()))
}

/// `S = |E₁ − E₂ + E₃ + E₄|` with independent errors added in quadrature.
pub fn s_from_expectations(e: [f64; 4], sigmas: [f64; 4]) -> (f64, f64) {
    let s = (e[0] - e[1] + e[2] + e[3]).abs();
    let sigma = sigmas.iter().map(|x| x * x).sum::<f64>().sqrt();
    (s, sigma)
}
