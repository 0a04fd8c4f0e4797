//! CHSH S-functions for the geometric-phase Bell state, the analytically
//! adjusted Bell angles, and numerical maximisation of the S-surface.
//!
//! Path directions are α, α′ and spin directions β, β′. With α = 0 and all
//! azimuths zero the S-value depends on `(α₁′, β₁, β₁′)` (polar adjustment);
//! with the polar angles at the usual Bell values it depends on
//! `(α₂′, β₂, β₂′)` (azimuthal adjustment).

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};

use crate::angle::{circular_diff, wrap_half_turn};
use crate::optimize::{maximize_2d, Maximum2, PeriodicDomain};
use crate::quantum::{bell_state, expectation, MeasurementDirection, PureState};
use crate::{Error, Result};

/// Default coarse grid spacing for [`grid_maximize_s`].
pub const DEFAULT_COARSE_STEP: f64 = PI / 180.0;
/// Default refinement tolerance for [`grid_maximize_s`].
pub const DEFAULT_REFINE_TOL: f64 = 1e-7;

/// The four measurement directions of one S evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellAngleSet {
    pub alpha: MeasurementDirection,
    pub alpha_p: MeasurementDirection,
    pub beta: MeasurementDirection,
    pub beta_p: MeasurementDirection,
}

impl BellAngleSet {
    /// α = 0, α′ = (π/2, 0), β = (π/4, 0), β′ = (3π/4, 0).
    pub fn standard() -> Self {
        Self::polar(FRAC_PI_2, FRAC_PI_4, 3.0 * FRAC_PI_4)
    }

    /// α = 0 and all azimuths zero.
    pub fn polar(alpha1_p: f64, beta1: f64, beta1_p: f64) -> Self {
        Self {
            alpha: MeasurementDirection::path(0.0, 0.0),
            alpha_p: MeasurementDirection::path(alpha1_p, 0.0),
            beta: MeasurementDirection::spin(beta1, 0.0),
            beta_p: MeasurementDirection::spin(beta1_p, 0.0),
        }
    }

    /// Standard polar angles with the given azimuths (α₂ = 0).
    pub fn azimuthal(alpha2_p: f64, beta2: f64, beta2_p: f64) -> Self {
        Self {
            alpha: MeasurementDirection::path(0.0, 0.0),
            alpha_p: MeasurementDirection::path(FRAC_PI_2, alpha2_p),
            beta: MeasurementDirection::spin(FRAC_PI_4, beta2),
            beta_p: MeasurementDirection::spin(3.0 * FRAC_PI_4, beta2_p),
        }
    }
}

/// How an S-value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Analytic,
    Grid,
    Counts,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Analytic => "analytic",
            Method::Grid => "grid",
            Method::Counts => "counts",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        match s {
            "analytic" => Some(Method::Analytic),
            "grid" => Some(Method::Grid),
            "counts" => Some(Method::Counts),
            _ => None,
        }
    }
}

/// One S-value with the angles and method that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SValueRecord {
    pub gamma: f64,
    pub s: f64,
    pub angles: BellAngleSet,
    pub method: Method,
}

/// `E(α,β) − E(α,β′) + E(α′,β) + E(α′,β′)` on an arbitrary state (signed).
pub fn chsh_combination(state: &PureState, angles: &BellAngleSet) -> f64 {
    expectation(state, angles.alpha, angles.beta) - expectation(state, angles.alpha, angles.beta_p)
        + expectation(state, angles.alpha_p, angles.beta)
        + expectation(state, angles.alpha_p, angles.beta_p)
}

/// S-value of the ideal Bell state with geometric phase γ, from projector
/// expectation values.
pub fn s_general(angles: &BellAngleSet, gamma: f64) -> f64 {
    chsh_combination(&bell_state(gamma, 0.0, 0.0), angles).abs()
}

/// S at the standard Bell angles without any adjustment.
pub fn s_no_adjustment(gamma: f64) -> f64 {
    s_general(&BellAngleSet::standard(), gamma)
}

/// Closed form with α = 0 and all azimuths zero.
pub fn s_polar(alpha1_p: f64, beta1: f64, beta1_p: f64, gamma: f64) -> f64 {
    let (sa, ca) = alpha1_p.sin_cos();
    let (sb, cb) = beta1.sin_cos();
    let (sbp, cbp) = beta1_p.sin_cos();
    let cg = gamma.cos();
    (-sa * (cg * sb + cg * sbp) - ca * (cb + cbp) - cb + cbp).abs()
}

/// Polar Bell angles that maximise [`s_polar`] for a given γ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarAngles {
    pub beta1: f64,
    pub beta1_p: f64,
    pub alpha1_p: f64,
}

/// `β₁ = arctan(cos γ)` (principal branch), `β₁′ = π − β₁`, `α₁′ = π/2`.
pub fn polar_optimal_angles(gamma: f64) -> PolarAngles {
    let beta1 = gamma.cos().atan();
    PolarAngles {
        beta1,
        beta1_p: PI - beta1,
        alpha1_p: FRAC_PI_2,
    }
}

/// Maximum of the polar-adjusted S: `2√(1 + cos²γ)`, between 2 and 2√2 with
/// period π.
pub fn s_polar_max(gamma: f64) -> f64 {
    let c = gamma.cos();
    2.0 * (1.0 + c * c).sqrt()
}

/// Closed form with the polar angles at the usual Bell values.
pub fn s_azimuthal(alpha2_p: f64, beta2: f64, beta2_p: f64, gamma: f64) -> f64 {
    (-SQRT_2 - 0.5 * SQRT_2 * ((alpha2_p - beta2 - gamma).cos() + (alpha2_p - beta2_p - gamma).cos())).abs()
}

/// Azimuthal adjustment `α₂′ = γ (mod π)` in `[0, π)`, with `β₂ = β₂′ = 0`.
///
/// The S-function distinguishes `α₂′ = γ` (S = 2√2) from `α₂′ = γ + π`
/// (S = 0) when `β₂ = 0`; callers that need the maximising representative on
/// the full circle should use `γ mod 2π` directly.
pub fn azimuthal_optimal_angle(gamma: f64) -> f64 {
    wrap_half_turn(gamma)
}

/// Numerically located maximum of the polar S-surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarMaximum {
    pub beta1: f64,
    pub beta1_p: f64,
    pub s: f64,
}

impl From<Maximum2> for PolarMaximum {
    fn from(m: Maximum2) -> Self {
        Self {
            beta1: m.x,
            beta1_p: m.y,
            s: m.value,
        }
    }
}

/// Checks the grid-search preconditions shared by all S-surface maximisations.
pub fn check_search_params(coarse_step: f64, refine_tol: f64) -> Result<()> {
    if !(coarse_step > 0.0 && coarse_step <= PI / 64.0) {
        return Err(Error::Domain {
            name: "coarse_step",
            value: coarse_step,
            reason: "must lie in (0, π/64]",
        });
    }
    if !(refine_tol > 0.0 && refine_tol <= 1e-6) {
        return Err(Error::Domain {
            name: "refine_tol",
            value: refine_tol,
            reason: "must lie in (0, 1e-6]",
        });
    }
    Ok(())
}

/// Maximises `s_polar(π/2, β₁, β₁′, γ)` over `(β₁, β₁′) ∈ [−π, π)²` by a
/// coarse grid scan and local refinement.
pub fn grid_maximize_s(gamma: f64, coarse_step: f64, refine_tol: f64) -> Result<PolarMaximum> {
    check_search_params(coarse_step, refine_tol)?;
    let f = |b: f64, bp: f64| s_polar(FRAC_PI_2, b, bp, gamma);
    Ok(maximize_2d(f, PeriodicDomain::SYMMETRIC, coarse_step, refine_tol).into())
}

/// Distance of `(β₁, β₁′)` from the nearest analytic maximiser.
///
/// The maximisers of `|S|` at α₁′ = π/2 are `(b, π − b)` and its image under
/// `(β₁, β₁′) ↦ (β₁ + π, β₁′ + π)`, with `b = arctan(cos γ)`. The result is
/// the larger of the two circular coordinate distances to the closer one.
pub fn polar_solution_distance(gamma: f64, beta1: f64, beta1_p: f64) -> f64 {
    let opt = polar_optimal_angles(gamma);
    [0.0, PI]
        .iter()
        .map(|shift| {
            circular_diff(beta1, opt.beta1 + shift)
                .abs()
                .max(circular_diff(beta1_p, opt.beta1_p + shift).abs())
        })
        .fold(f64::INFINITY, f64::min)
}
