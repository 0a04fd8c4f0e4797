use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use bellphase_core::analysis::fit::fit_sinusoid;
use bellphase_core::analysis::scan::{default_delta_grid, default_gamma_list, AdjustedAngles, ScanOptions};
use bellphase_core::analysis::{run_azimuthal_scan, run_polar_scan};
use bellphase_core::angle::{circular_diff, wrap_half_turn};
use bellphase_core::chsh::{chsh_combination, polar_solution_distance, s_no_adjustment, s_polar_max, BellAngleSet};
use bellphase_core::experiment::{default_chi_grid, simulate_interferogram, ExperimentConfig, Sampler, Sampling};
use bellphase_core::optimize::{maximize_1d, maximize_2d, PeriodicDomain};
use bellphase_core::quantum::bell_state;
use nalgebra::Vector3;

fn exact() -> ScanOptions {
    ScanOptions {
        sampling: Sampling::Expected,
        ..Default::default()
    }
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (m, (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt())
}

/// Direct maximisation of the projector-based CHSH combination.
fn direct_polar_max(gamma: f64, theta: f64) -> f64 {
    let state = bell_state(gamma, theta, 0.0);
    let f = |b: f64, bp: f64| chsh_combination(&state, &BellAngleSet::polar(FRAC_PI_2, b, bp)).abs();
    maximize_2d(f, PeriodicDomain::SYMMETRIC, PI / 90.0, 1e-9).value
}

fn direct_azimuthal_max(gamma: f64, theta: f64) -> f64 {
    let state = bell_state(gamma, theta, 0.0);
    let f = |a: f64| chsh_combination(&state, &BellAngleSet::azimuthal(a, 0.0, 0.0)).abs();
    maximize_1d(f, PeriodicDomain::POSITIVE, PI / 90.0, 1e-9).value
}

#[test]
fn expected_counts_match_analytic_values() {
    let gammas = default_gamma_list();
    for dyn_offset in [0.0, 0.8] {
        let config = ExperimentConfig {
            dyn_offset,
            ..Default::default()
        };
        let polar = run_polar_scan(&config, &gammas, &default_delta_grid(), &exact()).unwrap();
        let azim = run_azimuthal_scan(&config, &gammas, &exact()).unwrap();
        for ((p, a), &g) in polar.iter().zip(&azim).zip(&gammas) {
            assert_eq!(p.gamma, g);
            assert!((p.s - s_polar_max(g)).abs() < 1e-6, "{p:?}");
            assert!((a.adjusted.s - 2.0 * SQRT_2).abs() < 1e-6, "{a:?}");
            assert!((a.unadjusted.s - s_no_adjustment(g)).abs() < 1e-6, "{a:?}");
        }
    }
}

#[test]
fn imperfect_flip_matches_direct_computation() {
    for theta in [0.1, 0.35, 1.0] {
        let config = ExperimentConfig {
            theta,
            dyn_offset: -0.4,
            ..Default::default()
        };
        let gammas = [0.0, 0.9, FRAC_PI_2, 2.6, 4.4];
        let polar = run_polar_scan(&config, &gammas, &default_delta_grid(), &exact()).unwrap();
        let azim = run_azimuthal_scan(&config, &gammas, &exact()).unwrap();
        for ((p, a), &g) in polar.iter().zip(&azim).zip(&gammas) {
            assert!((p.s - direct_polar_max(g, theta)).abs() < 1e-6, "θ={theta} {p:?}");
            assert!(
                (a.adjusted.s - direct_azimuthal_max(g, theta)).abs() < 1e-6,
                "θ={theta} {a:?}"
            );
            assert!(p.s < s_polar_max(g) + 1e-9);
        }
    }
}

#[test]
fn estimator_is_unbiased_with_calibrated_errors() {
    // standard Bell angles at γ = 0: the unadjusted point of the azimuthal scan
    let options = ScanOptions::default();
    let mut s = Vec::new();
    let mut sig = Vec::new();
    for seed in 0..1000 {
        let config = ExperimentConfig {
            seed,
            ..Default::default()
        };
        let r = run_azimuthal_scan(&config, &[0.0], &options).unwrap()[0].unadjusted;
        s.push(r.s);
        sig.push(r.sigma_s);
    }
    let (m, sd) = mean_sd(&s);
    let (sigma, _) = mean_sd(&sig);
    assert!((m - 2.0 * SQRT_2).abs() < 0.01, "mean {m}");
    assert!((sd / sigma - 1.0).abs() < 0.2, "empirical {sd} vs propagated {sigma}");
}

#[test]
fn fitted_visibility_covers_configured_contrast() {
    // mean count 10⁴ per point at δ = π/2, γ = 0
    let trials = 1000;
    let mut inside = 0;
    for seed in 0..trials {
        let config = ExperimentConfig {
            visibility: 0.5,
            seed,
            ..Default::default()
        };
        let gram = simulate_interferogram(
            &config,
            FRAC_PI_2,
            0.0,
            &default_chi_grid(),
            &mut Sampler::poisson(seed, 0),
        )
        .unwrap();
        let f = fit_sinusoid(&gram).unwrap();
        let [a, b, c] = f.coefficients;
        let amp = b.hypot(c);
        let grad = Vector3::new(-amp / (a * a), b / (amp * a), c / (amp * a));
        let sigma = (grad.transpose() * f.covariance * grad)[(0, 0)].sqrt();
        if (f.visibility - 0.5).abs() <= 3.0 * sigma {
            inside += 1;
        }
    }
    assert!(inside as f64 >= 0.99 * trials as f64, "{inside}/{trials}");
}

#[test]
fn recovered_angles_within_errors() {
    let options = ScanOptions::default();
    let config = ExperimentConfig {
        seed: 5,
        visibility: 0.9,
        ..Default::default()
    };
    let gammas = default_gamma_list();
    let polar = run_polar_scan(&config, &gammas, &default_delta_grid(), &options).unwrap();
    for r in &polar {
        let (AdjustedAngles::Polar { beta1, beta1_p }, AdjustedAngles::Polar { beta1: s1, beta1_p: s2 }) =
            (r.angles, r.angle_sigmas)
        else {
            panic!("{r:?}")
        };
        let allowed = options.refine_tol + 3.0 * s1.max(s2);
        assert!(polar_solution_distance(r.gamma, beta1, beta1_p) <= allowed, "{r:?}");
        assert!((r.s - 0.9 * s_polar_max(r.gamma)).abs() <= 3.0 * r.sigma_s, "{r:?}");
    }

    let azim = run_azimuthal_scan(&config, &gammas, &options).unwrap();
    for r in &azim {
        let (AdjustedAngles::Azimuthal { alpha2_p }, AdjustedAngles::Azimuthal { alpha2_p: sigma }) =
            (r.adjusted.angles, r.adjusted.angle_sigmas)
        else {
            panic!("{r:?}")
        };
        let d = circular_diff(wrap_half_turn(alpha2_p), wrap_half_turn(r.adjusted.gamma)).abs();
        let d = d.min(PI - d);
        assert!(d <= 3.0 * sigma + options.refine_tol, "{r:?}");
        assert!(
            (r.adjusted.s - 0.9 * 2.0 * SQRT_2).abs() <= 3.0 * r.adjusted.sigma_s,
            "{r:?}"
        );
    }
}

#[test]
fn contrast_normalization_restores_full_correlation_in_chi_scans() {
    let config = ExperimentConfig {
        visibility: 0.6,
        ..Default::default()
    };
    let options = ScanOptions {
        normalize_contrast: true,
        ..exact()
    };
    // x̂ correlations regain unit contrast, ẑ correlations keep V
    let r = run_azimuthal_scan(&config, &[0.0], &options).unwrap()[0];
    assert!((r.unadjusted.s - (0.6 * SQRT_2 + SQRT_2)).abs() < 1e-9, "{r:?}");
}
