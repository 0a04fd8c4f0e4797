//! Polar and azimuthal scan experiments.
//!
//! Path projections on `±ẑ` come from beam-block runs and projections on `±x̂`
//! from χ-scans evaluated at the reference phase zero. Each correlation is
//! built from fitted sinusoids, which makes it a smooth function
//!
//! ```text
//! E(x) = (Δb cos x + Δc sin x) / (a₊ + a₋)
//! ```
//!
//! of the spin angle (polar scan) or of the path phase (azimuthal scan), where
//! `(a±, b±, c±)` are the fitted coefficients of the `+` and `−` curves and
//! `Δb = b₊ − b₋`, `Δc = c₊ − c₋`.
//!
//! Statistical errors are propagated linearly through every fit with full
//! covariances, including the correlations introduced by the shared reference
//! run and by reading two projections off one χ-scan.

use std::f64::consts::{FRAC_PI_4, PI, TAU};

use nalgebra::{DMatrix, DVector, Matrix3, SMatrix, SVector};
use rayon::prelude::*;

use super::fit::{align_coefficients, fit_sinusoid, fit_sinusoid_points, jacobian, weighted_sinusoid_lsq, SinusoidFit};
use crate::angle::{linspace_closed, wrap_tau};
use crate::chsh::{
    check_search_params, grid_maximize_s, polar_optimal_angles, s_azimuthal, s_polar_max, Method, DEFAULT_COARSE_STEP,
    DEFAULT_REFINE_TOL,
};
use crate::experiment::{
    counts_to_expectation, default_chi_grid, reference_run, simulate_beam_block, simulate_interferogram, stream_index,
    CountQuadruple, ExperimentConfig, Sampler, Sampling,
};
use crate::optimize::{maximize_1d, maximize_2d, PeriodicDomain};
use crate::quantum::Path;
use crate::{Error, Result};

const GRID_TOL: f64 = 1e-9;

/// Largest admissible spacing of the polar δ grid.
pub const MAX_DELTA_STEP: f64 = PI / 8.0;

/// Spin analysis angles of the azimuthal scan: β, β + π, β′, β′ + π.
pub const AZIMUTHAL_DELTAS: [f64; 4] = [FRAC_PI_4, 5.0 * FRAC_PI_4, 3.0 * FRAC_PI_4, 7.0 * FRAC_PI_4];

#[derive(Debug, Clone, PartialEq)]
pub struct ScanOptions {
    pub sampling: Sampling,
    /// Divide χ-scan amplitudes by the reference contrast.
    pub normalize_contrast: bool,
    pub chi_grid: Vec<f64>,
    pub coarse_step: f64,
    pub refine_tol: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            sampling: Sampling::Poisson,
            normalize_contrast: false,
            chi_grid: default_chi_grid(),
            coarse_step: DEFAULT_COARSE_STEP,
            refine_tol: DEFAULT_REFINE_TOL,
        }
    }
}

/// Bell angles chosen by a scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AdjustedAngles {
    Polar { beta1: f64, beta1_p: f64 },
    Azimuthal { alpha2_p: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanResult {
    pub gamma: f64,
    pub angles: AdjustedAngles,
    /// Standard errors of the angles, same shape as `angles`.
    pub angle_sigmas: AdjustedAngles,
    pub s: f64,
    pub sigma_s: f64,
    pub method: Method,
}

/// Adjusted and unadjusted outcome of one azimuthal scan point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AzimuthalScanResult {
    pub adjusted: ScanResult,
    /// S at `α₂′ = 0`.
    pub unadjusted: ScanResult,
}

/// Steps of π/6 over `[0, π]`, then π/4 up to 2π.
pub fn default_gamma_list() -> Vec<f64> {
    let mut out: Vec<f64> = (0..=6).map(|k| k as f64 * PI / 6.0).collect();
    out.extend((1..=4).map(|k| PI + k as f64 * FRAC_PI_4));
    out
}

/// `[0, π]` in steps of π/8.
pub fn default_delta_grid() -> Vec<f64> {
    linspace_closed(0.0, PI, 9)
}

/// Checks that `grid` is increasing and covers `[0, π]` with spacing at most
/// [`MAX_DELTA_STEP`].
pub fn check_delta_grid(grid: &[f64]) -> Result<()> {
    let err = |value, reason| Error::Domain {
        name: "delta_grid",
        value,
        reason,
    };
    let (Some(&first), Some(&last)) = (grid.first(), grid.last()) else {
        return Err(err(0.0, "must not be empty"));
    };
    if first > GRID_TOL {
        return Err(err(first, "must start at 0"));
    }
    if last < PI - GRID_TOL {
        return Err(err(last, "must reach π"));
    }
    for w in grid.windows(2) {
        let step = w[1] - w[0];
        if !(step > 0.0) {
            return Err(err(w[1], "must be strictly increasing"));
        }
        if step > MAX_DELTA_STEP + GRID_TOL {
            return Err(err(step, "spacing must not exceed π/8"));
        }
    }
    Ok(())
}

fn check_gammas(gammas: &[f64]) -> Result<()> {
    if gammas.is_empty() {
        return Err(Error::Domain {
            name: "gamma_list",
            value: 0.0,
            reason: "must not be empty",
        });
    }
    Ok(())
}

/// The δ grid together with its antipodes, reduced to `[0, 2π)`, sorted and
/// deduplicated.
pub fn spin_grid(delta_grid: &[f64]) -> Vec<f64> {
    let mut all: Vec<f64> = delta_grid
        .iter()
        .flat_map(|&d| [wrap_tau(d), wrap_tau(d + PI)])
        .collect();
    all.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(all.len());
    for d in all {
        let dup = out.last().is_some_and(|&p| (d - p).abs() < GRID_TOL)
            || out.first().is_some_and(|&p| (TAU - d + p).abs() < GRID_TOL);
        if !dup {
            out.push(d);
        }
    }
    out
}

/// A `+` and `−` sinusoid whose normalised difference is a correlation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePair {
    pub plus: [f64; 3],
    pub minus: [f64; 3],
}

impl CurvePair {
    fn parts(&self) -> (f64, f64, f64) {
        (
            self.plus[1] - self.minus[1],
            self.plus[2] - self.minus[2],
            self.plus[0] + self.minus[0],
        )
    }

    /// Correlation at `x`.
    pub fn e(&self, x: f64) -> f64 {
        let (db, dc, d) = self.parts();
        (db * x.cos() + dc * x.sin()) / d
    }

    /// `dE/dx`; the second derivative is `−E`.
    pub fn de(&self, x: f64) -> f64 {
        let (db, dc, d) = self.parts();
        (-db * x.sin() + dc * x.cos()) / d
    }

    /// Gradient of [`CurvePair::e`] with respect to `(plus, minus)`.
    pub fn grad_e(&self, x: f64) -> SVector<f64, 6> {
        let (_, _, d) = self.parts();
        let e = self.e(x);
        let (s, c) = x.sin_cos();
        SVector::from([-e / d, c / d, s / d, -e / d, -c / d, -s / d])
    }

    /// Gradient of [`CurvePair::de`] with respect to `(plus, minus)`.
    pub fn grad_de(&self, x: f64) -> SVector<f64, 6> {
        let (_, _, d) = self.parts();
        let de = self.de(x);
        let (s, c) = x.sin_cos();
        SVector::from([-de / d, -s / d, c / d, -de / d, s / d, -c / d])
    }
}

fn stack(a: SVector<f64, 6>, b: SVector<f64, 6>) -> SVector<f64, 12> {
    let mut out = SVector::<f64, 12>::zeros();
    out.fixed_rows_mut::<6>(0).copy_from(&a);
    out.fixed_rows_mut::<6>(6).copy_from(&b);
    out
}

fn sigma_of(g: &SVector<f64, 12>, cov: &SMatrix<f64, 12, 12>) -> f64 {
    (g.transpose() * cov * g)[(0, 0)].max(0.0).sqrt()
}

/// S-surface over `(β₁, β₁′)` with α = ẑ and α′ = x̂, built from fitted δ-curves.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarSurface {
    /// Beam-block curves: `+` with path II blocked, `−` with path I blocked.
    pub z: CurvePair,
    /// χ-scan projections at phase zero (`+`) and at π (`−`) versus δ.
    pub x: CurvePair,
    /// Covariance of `(z.plus, z.minus, x.plus, x.minus)`.
    pub covariance: SMatrix<f64, 12, 12>,
    pub reference: SinusoidFit,
}

impl PolarSurface {
    /// `E(ẑ,β) − E(ẑ,β′) + E(x̂,β) + E(x̂,β′)`.
    pub fn signed(&self, beta: f64, beta_p: f64) -> f64 {
        self.z.e(beta) - self.z.e(beta_p) + self.x.e(beta) + self.x.e(beta_p)
    }

    pub fn s(&self, beta: f64, beta_p: f64) -> f64 {
        self.signed(beta, beta_p).abs()
    }

    /// Standard error of S at fixed angles.
    pub fn sigma_s(&self, beta: f64, beta_p: f64) -> f64 {
        let g = stack(
            self.z.grad_e(beta) - self.z.grad_e(beta_p),
            self.x.grad_e(beta) + self.x.grad_e(beta_p),
        );
        sigma_of(&g, &self.covariance)
    }

    /// Standard errors of a stationary point's coordinates, from the implicit
    /// function theorem.
    pub fn angle_sigmas(&self, beta: f64, beta_p: f64) -> [f64; 2] {
        // S separates into f(β) + g(β′), so the Hessian is diagonal
        let h_b = -(self.z.e(beta) + self.x.e(beta));
        let h_bp = self.z.e(beta_p) - self.x.e(beta_p);
        let m_b = stack(self.z.grad_de(beta), self.x.grad_de(beta));
        let m_bp = stack(-self.z.grad_de(beta_p), self.x.grad_de(beta_p));
        [
            sigma_of(&(m_b / h_b), &self.covariance),
            sigma_of(&(m_bp / h_bp), &self.covariance),
        ]
    }
}

/// S versus α₂′ at the standard polar angles.
#[derive(Debug, Clone, PartialEq)]
pub struct AzimuthalCurve {
    /// `(E, σ)` of the `ẑ` correlations at β and β′.
    pub ez_beta: (f64, f64),
    pub ez_beta_p: (f64, f64),
    /// χ-scan pairs at β and β′, in the phase relative to the reference zero.
    pub x_beta: CurvePair,
    pub x_beta_p: CurvePair,
    /// Covariance of `(x_beta.plus, x_beta.minus, x_beta_p.plus, x_beta_p.minus)`.
    pub covariance: SMatrix<f64, 12, 12>,
    pub reference: SinusoidFit,
}

impl AzimuthalCurve {
    pub fn signed(&self, alpha2_p: f64) -> f64 {
        let psi = -alpha2_p;
        self.ez_beta.0 - self.ez_beta_p.0 + self.x_beta.e(psi) + self.x_beta_p.e(psi)
    }

    pub fn s(&self, alpha2_p: f64) -> f64 {
        self.signed(alpha2_p).abs()
    }

    pub fn sigma_s(&self, alpha2_p: f64) -> f64 {
        let psi = -alpha2_p;
        let g = stack(self.x_beta.grad_e(psi), self.x_beta_p.grad_e(psi));
        let x = sigma_of(&g, &self.covariance);
        (x * x + self.ez_beta.1.powi(2) + self.ez_beta_p.1.powi(2)).sqrt()
    }

    pub fn angle_sigma(&self, alpha2_p: f64) -> f64 {
        let psi = -alpha2_p;
        let h = -(self.x_beta.e(psi) + self.x_beta_p.e(psi));
        // dS/dα = −(x_β.de + x_β′.de)(−α)
        let m = -stack(self.x_beta.grad_de(psi), self.x_beta_p.grad_de(psi));
        sigma_of(&(m / h), &self.covariance)
    }
}

struct AlignedScans {
    coefficients: Vec<[f64; 3]>,
    /// Covariance of the concatenated coefficients.
    covariance: DMatrix<f64>,
}

/// Rotates every scan to the reference phase zero and propagates both the
/// scan and the reference covariances.
fn align_scans(scans: &[SinusoidFit], reference: &SinusoidFit, scale: bool) -> Result<AlignedScans> {
    if !(reference.amplitude > 0.0) {
        return Err(Error::ZeroReferenceVisibility);
    }
    let r = reference.coefficients;
    let n = scans.len();
    let mut coefficients = Vec::with_capacity(n);
    let mut covariance = DMatrix::zeros(3 * n, 3 * n);
    let mut g = DMatrix::zeros(3 * n, 3);
    for (k, fit) in scans.iter().enumerate() {
        let c = fit.coefficients;
        coefficients.push(align_coefficients(c, r, scale));
        let jc = jacobian(|x| align_coefficients(*x, r, scale), &c);
        let jr = jacobian(|x| align_coefficients(c, *x, scale), &r);
        let block: Matrix3<f64> = jc * fit.covariance * jc.transpose();
        covariance.view_mut((3 * k, 3 * k), (3, 3)).copy_from(&block);
        g.view_mut((3 * k, 0), (3, 3)).copy_from(&jr);
    }
    covariance += &g * reference.covariance * g.transpose();
    Ok(AlignedScans {
        coefficients,
        covariance,
    })
}

fn to_array(v: &[f64]) -> [f64; 3] {
    [v[0], v[1], v[2]]
}

/// Simulates and fits every run of one polar scan point.
pub fn measure_polar_surface(
    config: &ExperimentConfig,
    gamma: f64,
    gamma_index: usize,
    delta_grid: &[f64],
    options: &ScanOptions,
) -> Result<PolarSurface> {
    check_delta_grid(delta_grid)?;
    let grid = spin_grid(delta_grid);
    let n = grid.len();
    let sampler = |k: usize| Sampler::new(options.sampling, config.seed, stream_index(gamma_index, k));

    let reference = fit_sinusoid(&reference_run(config, 0.0, &options.chi_grid, &mut sampler(0))?)?;
    let scans = grid
        .iter()
        .enumerate()
        .map(|(k, &d)| {
            fit_sinusoid(&simulate_interferogram(
                config,
                d,
                gamma,
                &options.chi_grid,
                &mut sampler(k + 1),
            )?)
        })
        .collect::<Result<Vec<_>>>()?;
    let aligned = align_scans(&scans, &reference, options.normalize_contrast)?;

    // projections at ψ = 0 and π: y = [X₊(δ₁..δₙ), X₋(δ₁..δₙ)] = M · coefficients
    let mut m = DMatrix::zeros(2 * n, 3 * n);
    for k in 0..n {
        m[(k, 3 * k)] = 1.0;
        m[(k, 3 * k + 1)] = 1.0;
        m[(n + k, 3 * k)] = 1.0;
        m[(n + k, 3 * k + 1)] = -1.0;
    }
    let flat = DVector::from_iterator(3 * n, aligned.coefficients.iter().flatten().copied());
    let y = &m * flat;
    let y_cov = &m * &aligned.covariance * m.transpose();

    let inv_var = |i: usize| {
        let v = y_cov[(i, i)];
        if v > 0.0 {
            1.0 / v
        } else {
            1.0
        }
    };
    let (y_plus, y_minus) = (y.rows(0, n), y.rows(n, n));
    let w_plus: Vec<f64> = (0..n).map(inv_var).collect();
    let w_minus: Vec<f64> = (n..2 * n).map(inv_var).collect();
    let plus = weighted_sinusoid_lsq(&grid, y_plus.as_slice(), &w_plus)?;
    let minus = weighted_sinusoid_lsq(&grid, y_minus.as_slice(), &w_minus)?;
    let mut op = DMatrix::zeros(6, 2 * n);
    op.view_mut((0, 0), (3, n)).copy_from(&plus.operator);
    op.view_mut((3, n), (3, n)).copy_from(&minus.operator);
    let x_cov = &op * y_cov * op.transpose();

    let z_plus = simulate_beam_block(config, &grid, gamma, Path::II, &mut sampler(n + 1))?;
    let z_minus = simulate_beam_block(config, &grid, gamma, Path::I, &mut sampler(n + 2))?;
    let z_plus = fit_sinusoid_points(&grid, &z_plus.counts)?;
    let z_minus = fit_sinusoid_points(&grid, &z_minus.counts)?;

    let mut covariance = SMatrix::<f64, 12, 12>::zeros();
    covariance.fixed_view_mut::<3, 3>(0, 0).copy_from(&z_plus.covariance);
    covariance.fixed_view_mut::<3, 3>(3, 3).copy_from(&z_minus.covariance);
    for i in 0..6 {
        for j in 0..6 {
            covariance[(6 + i, 6 + j)] = x_cov[(i, j)];
        }
    }

    Ok(PolarSurface {
        z: CurvePair {
            plus: z_plus.coefficients,
            minus: z_minus.coefficients,
        },
        x: CurvePair {
            plus: plus.coefficients,
            minus: minus.coefficients,
        },
        covariance,
        reference,
    })
}

/// Locates the maximum of a measured polar surface.
pub fn maximize_polar_surface(surface: &PolarSurface, gamma: f64, options: &ScanOptions) -> Result<ScanResult> {
    check_search_params(options.coarse_step, options.refine_tol)?;
    let m = maximize_2d(
        |b, bp| surface.s(b, bp),
        PeriodicDomain::SYMMETRIC,
        options.coarse_step,
        options.refine_tol,
    );
    let [sb, sbp] = surface.angle_sigmas(m.x, m.y);
    Ok(ScanResult {
        gamma,
        angles: AdjustedAngles::Polar {
            beta1: m.x,
            beta1_p: m.y,
        },
        angle_sigmas: AdjustedAngles::Polar {
            beta1: sb,
            beta1_p: sbp,
        },
        s: m.value,
        sigma_s: surface.sigma_s(m.x, m.y),
        method: Method::Counts,
    })
}

/// Polar-adjusted S from simulated counts for each γ, in input order.
pub fn run_polar_scan(
    config: &ExperimentConfig,
    gammas: &[f64],
    delta_grid: &[f64],
    options: &ScanOptions,
) -> Result<Vec<ScanResult>> {
    config.validate()?;
    check_gammas(gammas)?;
    check_delta_grid(delta_grid)?;
    check_search_params(options.coarse_step, options.refine_tol)?;
    gammas
        .par_iter()
        .enumerate()
        .map(|(i, &g)| {
            let surface = measure_polar_surface(config, g, i, delta_grid, options)?;
            maximize_polar_surface(&surface, g, options)
        })
        .collect()
}

/// Simulates and fits every run of one azimuthal scan point.
pub fn measure_azimuthal_curve(
    config: &ExperimentConfig,
    gamma: f64,
    gamma_index: usize,
    options: &ScanOptions,
) -> Result<AzimuthalCurve> {
    let sampler = |k: usize| Sampler::new(options.sampling, config.seed, stream_index(gamma_index, k));
    let reference = fit_sinusoid(&reference_run(config, 0.0, &options.chi_grid, &mut sampler(0))?)?;
    let scans = AZIMUTHAL_DELTAS
        .iter()
        .enumerate()
        .map(|(k, &d)| {
            fit_sinusoid(&simulate_interferogram(
                config,
                d,
                gamma,
                &options.chi_grid,
                &mut sampler(k + 1),
            )?)
        })
        .collect::<Result<Vec<_>>>()?;
    let aligned = align_scans(&scans, &reference, options.normalize_contrast)?;
    let mut covariance = SMatrix::<f64, 12, 12>::zeros();
    covariance.copy_from(&aligned.covariance);
    let c = &aligned.coefficients;

    let n_ii = simulate_beam_block(config, &AZIMUTHAL_DELTAS, gamma, Path::II, &mut sampler(5))?.counts;
    let n_i = simulate_beam_block(config, &AZIMUTHAL_DELTAS, gamma, Path::I, &mut sampler(6))?.counts;
    let ez_beta = counts_to_expectation(&CountQuadruple::new(n_ii[0], n_ii[1], n_i[0], n_i[1]))?;
    let ez_beta_p = counts_to_expectation(&CountQuadruple::new(n_ii[2], n_ii[3], n_i[2], n_i[3]))?;

    Ok(AzimuthalCurve {
        ez_beta,
        ez_beta_p,
        x_beta: CurvePair {
            plus: to_array(&c[0]),
            minus: to_array(&c[1]),
        },
        x_beta_p: CurvePair {
            plus: to_array(&c[2]),
            minus: to_array(&c[3]),
        },
        covariance,
        reference,
    })
}

/// Maximises a measured azimuthal curve over `α₂′ ∈ [0, 2π)` and evaluates it
/// at `α₂′ = 0`.
pub fn maximize_azimuthal_curve(
    curve: &AzimuthalCurve,
    gamma: f64,
    options: &ScanOptions,
) -> Result<AzimuthalScanResult> {
    check_search_params(options.coarse_step, options.refine_tol)?;
    let m = maximize_1d(
        |a| curve.s(a),
        PeriodicDomain::POSITIVE,
        options.coarse_step,
        options.refine_tol,
    );
    Ok(AzimuthalScanResult {
        adjusted: ScanResult {
            gamma,
            angles: AdjustedAngles::Azimuthal { alpha2_p: m.x },
            angle_sigmas: AdjustedAngles::Azimuthal {
                alpha2_p: curve.angle_sigma(m.x),
            },
            s: m.value,
            sigma_s: curve.sigma_s(m.x),
            method: Method::Counts,
        },
        unadjusted: ScanResult {
            gamma,
            angles: AdjustedAngles::Azimuthal { alpha2_p: 0.0 },
            angle_sigmas: AdjustedAngles::Azimuthal { alpha2_p: 0.0 },
            s: curve.s(0.0),
            sigma_s: curve.sigma_s(0.0),
            method: Method::Counts,
        },
    })
}

/// Azimuthal-adjusted and unadjusted S from simulated counts for each γ, in
/// input order.
pub fn run_azimuthal_scan(
    config: &ExperimentConfig,
    gammas: &[f64],
    options: &ScanOptions,
) -> Result<Vec<AzimuthalScanResult>> {
    config.validate()?;
    check_gammas(gammas)?;
    check_search_params(options.coarse_step, options.refine_tol)?;
    gammas
        .par_iter()
        .enumerate()
        .map(|(i, &g)| {
            let curve = measure_azimuthal_curve(config, g, i, options)?;
            maximize_azimuthal_curve(&curve, g, options)
        })
        .collect()
}

/// Closed-form polar optimum.
pub fn analytic_polar_result(gamma: f64) -> ScanResult {
    let a = polar_optimal_angles(gamma);
    ScanResult {
        gamma,
        angles: AdjustedAngles::Polar {
            beta1: a.beta1,
            beta1_p: a.beta1_p,
        },
        angle_sigmas: AdjustedAngles::Polar {
            beta1: 0.0,
            beta1_p: 0.0,
        },
        s: s_polar_max(gamma),
        sigma_s: 0.0,
        method: Method::Analytic,
    }
}

/// Numerically maximised ideal polar surface.
pub fn grid_polar_result(gamma: f64, coarse_step: f64, refine_tol: f64) -> Result<ScanResult> {
    let m = grid_maximize_s(gamma, coarse_step, refine_tol)?;
    Ok(ScanResult {
        gamma,
        angles: AdjustedAngles::Polar {
            beta1: m.beta1,
            beta1_p: m.beta1_p,
        },
        angle_sigmas: AdjustedAngles::Polar {
            beta1: 0.0,
            beta1_p: 0.0,
        },
        s: m.s,
        sigma_s: 0.0,
        method: Method::Grid,
    })
}

/// Closed-form azimuthal optimum at `α₂′ = γ mod 2π`.
pub fn analytic_azimuthal_result(gamma: f64) -> ScanResult {
    let a = wrap_tau(gamma);
    ScanResult {
        gamma,
        angles: AdjustedAngles::Azimuthal { alpha2_p: a },
        angle_sigmas: AdjustedAngles::Azimuthal { alpha2_p: 0.0 },
        s: s_azimuthal(a, 0.0, 0.0, gamma),
        sigma_s: 0.0,
        method: Method::Analytic,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chsh::{polar_solution_distance, s_general, s_no_adjustment, BellAngleSet};
    use crate::quantum::{bell_state, expectation, MeasurementDirection};
    use std::f64::consts::{FRAC_PI_2, SQRT_2};

    fn exact() -> ScanOptions {
        ScanOptions {
            sampling: Sampling::Expected,
            ..Default::default()
        }
    }

    #[test]
    fn gamma_and_delta_defaults() {
        let g = default_gamma_list();
        assert_eq!(g.len(), 11);
        assert!((g[6] - PI).abs() < 1e-15 && (g[10] - TAU).abs() < 1e-15);
        assert!(check_delta_grid(&default_delta_grid()).is_ok());
        assert_eq!(spin_grid(&default_delta_grid()).len(), 16);
    }

    #[test]
    fn delta_grid_validation() {
        assert!(check_delta_grid(&[]).is_err());
        assert!(check_delta_grid(&linspace_closed(0.0, PI, 5)).is_err());
        assert!(check_delta_grid(&linspace_closed(0.0, 3.0, 9)).is_err());
        assert!(check_delta_grid(&linspace_closed(0.0, PI, 17)).is_ok());
    }

    #[test]
    fn curve_pair_derivatives() {
        let p = CurvePair {
            plus: [3.0, 0.4, -0.2],
            minus: [2.0, -0.1, 0.3],
        };
        let h = 1e-6;
        for x in [0.0, 0.7, 2.0, -1.3] {
            let fd = (p.e(x + h) - p.e(x - h)) / (2.0 * h);
            assert!((fd - p.de(x)).abs() < 1e-9);
            let fd2 = (p.de(x + h) - p.de(x - h)) / (2.0 * h);
            assert!((fd2 + p.e(x)).abs() < 1e-9);
            let flat = |q: &[f64; 6]| CurvePair {
                plus: [q[0], q[1], q[2]],
                minus: [q[3], q[4], q[5]],
            };
            let v = [p.plus[0], p.plus[1], p.plus[2], p.minus[0], p.minus[1], p.minus[2]];
            let j = jacobian(|q| [flat(q).e(x), flat(q).de(x)], &v);
            for i in 0..6 {
                assert!((j[(0, i)] - p.grad_e(x)[i]).abs() < 1e-9);
                assert!((j[(1, i)] - p.grad_de(x)[i]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn polar_surface_matches_quantum_correlations() {
        let c = ExperimentConfig {
            theta: 0.4,
            dyn_offset: 0.7,
            ..Default::default()
        };
        for g in [0.0, 1.0, 2.5] {
            let surf = measure_polar_surface(&c, g, 0, &default_delta_grid(), &exact()).unwrap();
            let state = bell_state(g, c.theta, 0.0);
            for b in [0.1, 1.3, 2.9, -2.0] {
                let ez = expectation(
                    &state,
                    MeasurementDirection::path(0.0, 0.0),
                    MeasurementDirection::spin(b, 0.0),
                );
                let ex = expectation(
                    &state,
                    MeasurementDirection::path(FRAC_PI_2, 0.0),
                    MeasurementDirection::spin(b, 0.0),
                );
                assert!((surf.z.e(b) - ez).abs() < 1e-9, "γ={g} β={b}");
                assert!((surf.x.e(b) - ex).abs() < 1e-9, "γ={g} β={b}");
            }
        }
    }

    #[test]
    fn expected_counts_reproduce_polar_optimum() {
        let c = ExperimentConfig::default();
        let gammas = [0.0, FRAC_PI_4, FRAC_PI_2, 2.0, PI, 4.0];
        let out = run_polar_scan(&c, &gammas, &default_delta_grid(), &exact()).unwrap();
        for r in out {
            assert!((r.s - s_polar_max(r.gamma)).abs() < 1e-6, "{r:?}");
            let AdjustedAngles::Polar { beta1, beta1_p } = r.angles else {
                panic!()
            };
            assert!(polar_solution_distance(r.gamma, beta1, beta1_p) < 1e-5, "{r:?}");
        }
    }

    #[test]
    fn expected_counts_reproduce_azimuthal_optimum() {
        let c = ExperimentConfig {
            dyn_offset: -1.1,
            ..Default::default()
        };
        let gammas = [0.0, PI / 6.0, FRAC_PI_2, PI, 4.0, 5.5];
        let out = run_azimuthal_scan(&c, &gammas, &exact()).unwrap();
        for r in out {
            let g = r.adjusted.gamma;
            assert!((r.adjusted.s - 2.0 * SQRT_2).abs() < 1e-6);
            let AdjustedAngles::Azimuthal { alpha2_p } = r.adjusted.angles else {
                panic!()
            };
            assert!(crate::angle::circular_diff(alpha2_p, g).abs() < 1e-5, "{r:?}");
            assert!((r.unadjusted.s - s_no_adjustment(g)).abs() < 1e-9);
        }
    }

    #[test]
    fn azimuthal_curve_matches_general_s() {
        let c = ExperimentConfig::default();
        let curve = measure_azimuthal_curve(&c, 1.2, 0, &exact()).unwrap();
        for a in [0.0, 0.5, 2.0, 4.0] {
            let direct = s_general(&BellAngleSet::azimuthal(a, 0.0, 0.0), 1.2);
            assert!((curve.s(a) - direct).abs() < 1e-9);
        }
    }

    #[test]
    fn sigma_is_positive_and_small() {
        let c = ExperimentConfig::default();
        let surf = measure_polar_surface(&c, 0.0, 0, &default_delta_grid(), &exact()).unwrap();
        let s = surf.sigma_s(FRAC_PI_4, 3.0 * FRAC_PI_4);
        assert!(s > 0.0 && s < 0.05, "{s}");
        let [a, b] = surf.angle_sigmas(FRAC_PI_4, 3.0 * FRAC_PI_4);
        assert!(a > 0.0 && b > 0.0 && a < 0.05 && b < 0.05);
    }

    #[test]
    fn scans_reject_empty_gamma() {
        let c = ExperimentConfig::default();
        assert!(matches!(
            run_polar_scan(&c, &[], &default_delta_grid(), &exact()),
            Err(Error::Domain { name: "gamma_list", .. })
        ));
        assert!(run_azimuthal_scan(&c, &[], &exact()).is_err());
    }

    #[test]
    fn poisson_scans_are_deterministic() {
        let c = ExperimentConfig {
            seed: 11,
            ..Default::default()
        };
        let o = ScanOptions::default();
        let a = run_polar_scan(&c, &[0.0, 1.0], &default_delta_grid(), &o).unwrap();
        let b = run_polar_scan(&c, &[0.0, 1.0], &default_delta_grid(), &o).unwrap();
        assert_eq!(a, b);
        let a = run_azimuthal_scan(&c, &[0.3], &o).unwrap();
        assert_eq!(a, run_azimuthal_scan(&c, &[0.3], &o).unwrap());
    }

    #[test]
    fn contrast_normalization_rescales_chi_scan_correlations() {
        let c = ExperimentConfig {
            visibility: 0.5,
            ..Default::default()
        };
        let plain = run_polar_scan(&c, &[0.0], &default_delta_grid(), &exact()).unwrap();
        assert!((plain[0].s - 0.5 * 2.0 * SQRT_2).abs() < 1e-6);
        let o = ScanOptions {
            normalize_contrast: true,
            ..exact()
        };
        // only the x̂ correlations are rescaled by the reference contrast
        let norm = run_polar_scan(&c, &[0.0], &default_delta_grid(), &o).unwrap();
        assert!(norm[0].s > plain[0].s);
    }

    #[test]
    fn analytic_rows() {
        let r = analytic_polar_result(0.0);
        assert!((r.s - 2.0 * SQRT_2).abs() < 1e-12);
        let r = analytic_azimuthal_result(4.0);
        assert!((r.s - 2.0 * SQRT_2).abs() < 1e-12);
        let r = grid_polar_result(FRAC_PI_2, DEFAULT_COARSE_STEP, DEFAULT_REFINE_TOL).unwrap();
        assert!((r.s - 2.0).abs() < 1e-9 && r.method == Method::Grid);
    }
}
