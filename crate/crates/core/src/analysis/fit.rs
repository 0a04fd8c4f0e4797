//! Weighted least-squares sinusoid fits and reference normalisation.
//!
//! The model is `a + b cos x + c sin x = a + A cos(x + φ)` with
//! `A = √(b² + c²)` and `φ = atan2(−c, b)`. A reference fringe
//! `1 + V cos(χ + φ₀)` therefore has phase `φ₀`.

use nalgebra::{DMatrix, Matrix3, SMatrix, Vector3};

use crate::angle::wrap_tau;
use crate::experiment::Interferogram;
use crate::quantum::C64;
use crate::{Error, Result};

/// Smallest number of points accepted by [`fit_sinusoid_points`].
pub const MIN_FIT_POINTS: usize = 5;

/// Relative eigenvalue floor of the normal matrix below which the design is
/// treated as rank deficient.
const RANK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinusoidFit {
    pub mean: f64,
    pub amplitude: f64,
    /// In `[0, 2π)`.
    pub phase: f64,
    /// `amplitude / mean`.
    pub visibility: f64,
    /// Linear coefficients `(a, b, c)`.
    pub coefficients: [f64; 3],
    /// Covariance of `(a, b, c)`.
    pub covariance: Matrix3<f64>,
    pub residual_chi2: f64,
}

impl SinusoidFit {
    pub fn from_coefficients(coefficients: [f64; 3], covariance: Matrix3<f64>, residual_chi2: f64) -> Self {
        let [a, b, c] = coefficients;
        let amplitude = b.hypot(c);
        Self {
            mean: a,
            amplitude,
            phase: wrap_tau((-c).atan2(b)),
            visibility: if a > 0.0 { amplitude / a } else { 0.0 },
            coefficients,
            covariance,
            residual_chi2,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let [a, b, c] = self.coefficients;
        a + b * x.cos() + c * x.sin()
    }
}

/// Solution of a weighted linear least-squares problem for the sinusoid model.
#[derive(Debug, Clone)]
pub struct WeightedSolution {
    pub coefficients: [f64; 3],
    /// `(XᵀWX)⁻¹`, the coefficient covariance when `W` holds inverse
    /// variances.
    pub normal_inverse: Matrix3<f64>,
    /// The linear map `(XᵀWX)⁻¹XᵀW` from data to coefficients (3 × n).
    pub operator: DMatrix<f64>,
    pub residual_chi2: f64,
}

fn basis(x: f64) -> Vector3<f64> {
    Vector3::new(1.0, x.cos(), x.sin())
}

/// Weighted least squares of `a + b cos x + c sin x` with explicit weights.
pub fn weighted_sinusoid_lsq(xs: &[f64], ys: &[f64], weights: &[f64]) -> Result<WeightedSolution> {
    if xs.len() != ys.len() || xs.len() != weights.len() {
        return Err(Error::Fit("data and weight lengths differ".into()));
    }
    if xs.len() < MIN_FIT_POINTS {
        return Err(Error::Fit(format!(
            "need at least {MIN_FIT_POINTS} points, got {}",
            xs.len()
        )));
    }
    let mut normal = Matrix3::zeros();
    let mut rhs = Vector3::zeros();
    for ((&x, &y), &w) in xs.iter().zip(ys).zip(weights) {
        let f = basis(x);
        normal += w * f * f.transpose();
        rhs += w * y * f;
    }
    let eig = normal.symmetric_eigen().eigenvalues;
    let (lo, hi) = (eig.min(), eig.max());
    if !(hi > 0.0) || lo <= RANK_TOL * hi {
        return Err(Error::Fit("rank-deficient design".into()));
    }
    let normal_inverse = normal
        .cholesky()
        .ok_or_else(|| Error::Fit("normal matrix not positive definite".into()))?
        .inverse();
    let coef = normal_inverse * rhs;
    let mut operator = DMatrix::zeros(3, xs.len());
    let mut chi2 = 0.0;
    for (j, ((&x, &y), &w)) in xs.iter().zip(ys).zip(weights).enumerate() {
        let f = basis(x);
        operator.set_column(j, &(normal_inverse * f * w));
        let r = y - coef.dot(&f);
        chi2 += w * r * r;
    }
    Ok(WeightedSolution {
        coefficients: [coef[0], coef[1], coef[2]],
        normal_inverse,
        operator,
        residual_chi2: chi2,
    })
}

/// Poisson-weighted fit of counts `ys` at angles `xs`, weights
/// `1 / max(count, 1)`.
pub fn fit_sinusoid_points(xs: &[f64], ys: &[f64]) -> Result<SinusoidFit> {
    let weights: Vec<f64> = ys.iter().map(|&y| 1.0 / y.max(1.0)).collect();
    let sol = weighted_sinusoid_lsq(xs, ys, &weights)?;
    Ok(SinusoidFit::from_coefficients(
        sol.coefficients,
        sol.normal_inverse,
        sol.residual_chi2,
    ))
}

pub fn fit_sinusoid(gram: &Interferogram) -> Result<SinusoidFit> {
    fit_sinusoid_points(&gram.chi_values, &gram.counts)
}

/// Coefficients re-expressed against the reference phase zero, optionally
/// divided by the reference contrast.
///
/// With `z = b − ic = A e^{iφ}`, the result has `z′ = z e^{−iφ_ref}` (and
/// `z′ /= V_ref` when scaling), so `a + A cos(χ + φ)` becomes
/// `a + A′ cos(ψ + φ − φ_ref)` in the shifted phase `ψ = χ + φ_ref`.
pub fn align_coefficients(coef: [f64; 3], reference: [f64; 3], scale_contrast: bool) -> [f64; 3] {
    let z = C64::new(coef[1], -coef[2]);
    let zr = C64::new(reference[1], -reference[2]);
    let r = zr.norm();
    let mut zp = z * zr.conj() / r;
    if scale_contrast {
        zp *= reference[0] / r;
    }
    [coef[0], zp.re, -zp.im]
}

/// Central-difference Jacobian of `f` at `x`.
pub fn jacobian<const N: usize, const M: usize>(f: impl Fn(&[f64; N]) -> [f64; M], x: &[f64; N]) -> SMatrix<f64, M, N> {
    let mut j = SMatrix::<f64, M, N>::zeros();
    for i in 0..N {
        let h = 1e-6 * x[i].abs().max(1.0);
        let mut up = *x;
        let mut dn = *x;
        up[i] += h;
        dn[i] -= h;
        let (fu, fd) = (f(&up), f(&dn));
        for k in 0..M {
            j[(k, i)] = (fu[k] - fd[k]) / (2.0 * h);
        }
    }
    j
}

/// A fit normalised by a reference fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedFit {
    /// Visibility clipped to `[0, 1]`; the covariance is that of the
    /// unclipped coefficients.
    pub fit: SinusoidFit,
    /// Unclipped visibility ratio.
    pub raw_visibility: f64,
    pub over_unity: bool,
}

/// Divides the visibility by the reference visibility and subtracts the
/// reference phase.
pub fn normalize_by_reference(fit: &SinusoidFit, reference: &SinusoidFit) -> Result<NormalizedFit> {
    if !(reference.visibility > 0.0) {
        return Err(Error::ZeroReferenceVisibility);
    }
    let (c, r) = (fit.coefficients, reference.coefficients);
    let coef = align_coefficients(c, r, true);
    let jc = jacobian(|x| align_coefficients(*x, r, true), &c);
    let jr = jacobian(|x| align_coefficients(c, *x, true), &r);
    let cov = jc * fit.covariance * jc.transpose() + jr * reference.covariance * jr.transpose();

    let unclipped = SinusoidFit::from_coefficients(coef, cov, fit.residual_chi2);
    let raw = unclipped.visibility;
    let over_unity = raw > 1.0;
    let mut out = unclipped;
    if over_unity {
        let k = 1.0 / raw;
        out = SinusoidFit::from_coefficients([coef[0], coef[1] * k, coef[2] * k], cov, fit.residual_chi2);
        out.visibility = 1.0;
    }
    Ok(NormalizedFit {
        fit: out,
        raw_visibility: raw,
        over_unity,
    })
}

/// Fitted intensities at `χ = 0` and `χ = π`.
pub fn projections_from_fit(fit: &SinusoidFit) -> (f64, f64) {
    let a = fit.mean;
    let b = fit.amplitude * fit.phase.cos();
    (a + b, a - b)
}
