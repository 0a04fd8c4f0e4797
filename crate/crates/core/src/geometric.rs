//! Geometric phase from two successive rf spin flips.
//!
//! Each flipper rotates the spin by π about an axis in the x-y plane whose
//! azimuth is the phase φ of the oscillating field. The spinor goes from `|↑⟩`
//! to `|↓⟩` along one semi-great circle and back along another; the two
//! circles enclose the solid angle `Ω = 2(φ_I − φ_II)`.
//!
//! The phase that enters the entangled state is taken as `γ = φ_I − φ_II`
//! (with `φ_II = 0` this is `γ = φ_I`).

use std::f64::consts::TAU;

use nalgebra::{Matrix2, Vector4};

use crate::angle::wrap_tau;
use crate::quantum::{spin_up, PureState, C64};
use crate::{Error, Result};

/// Phase, angular frequency and exposure time of one rf flipper.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlipperSetting {
    /// Phase of the oscillating field, rad.
    pub phi: f64,
    /// Angular frequency ω, rad/s.
    pub frequency: f64,
    /// Time the neutron spends in the rf field, s.
    pub exposure_time: f64,
}

impl FlipperSetting {
    pub fn resonance(&self, constants: &PhysicalConstants) -> Result<ResonanceFields> {
        resonance_parameters_with(constants, self.frequency, self.exposure_time)
    }
}

/// Constants entering the resonance conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Reduced Planck constant, J·s.
    pub hbar: f64,
    /// Magnitude of the neutron magnetic moment, J/T.
    pub mu_neutron_abs: f64,
}

impl PhysicalConstants {
    /// CODATA 2018 values.
    pub const CODATA_2018: PhysicalConstants = PhysicalConstants {
        hbar: 1.054_571_817e-34,
        mu_neutron_abs: 9.662_365_1e-27,
    };
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::CODATA_2018
    }
}

/// Static guide field and oscillating amplitude for a resonant π flip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonanceFields {
    /// Guide field satisfying the frequency resonance, tesla.
    pub b0: f64,
    /// Oscillating amplitude satisfying the π-flip condition, tesla.
    pub b_rf: f64,
}

/// Spin rotation by π about `(cos φ, sin φ, 0)`: `U(φ) = −i (cos φ σx + sin φ σy)`.
///
/// `U(0)|↑⟩ = −i|↓⟩`; only phase differences between values of φ matter.
pub fn flipper_unitary(phi: f64) -> Matrix2<C64> {
    let zero = C64::new(0.0, 0.0);
    let minus_i = C64::new(0.0, -1.0);
    Matrix2::new(
        zero,
        minus_i * C64::from_polar(1.0, -phi),
        minus_i * C64::from_polar(1.0, phi),
        zero,
    )
}

/// Solid angle `Ω = 2(φ_I − φ_II)` enclosed by the two half circles, wrapped
/// to `(−2π, 2π]`.
pub fn solid_angle(phi_i: f64, phi_ii: f64) -> f64 {
    let four_pi = 2.0 * TAU;
    let r = (2.0 * (phi_i - phi_ii)).rem_euclid(four_pi);
    if r > TAU {
        r - four_pi
    } else {
        r
    }
}

/// Operative geometric phase `γ = φ_I − φ_II`.
pub fn geometric_phase(phi_i: f64, phi_ii: f64) -> f64 {
    phi_i - phi_ii
}

/// Resonance fields with CODATA constants.
pub fn resonance_parameters(omega: f64, tau: f64) -> Result<ResonanceFields> {
    resonance_parameters_with(&PhysicalConstants::CODATA_2018, omega, tau)
}

/// `B₀ = ħω/(2|μ|)` and `B_rf = πħ/(2τ|μ|)`.
pub fn resonance_parameters_with(c: &PhysicalConstants, omega: f64, tau: f64) -> Result<ResonanceFields> {
    if !(omega > 0.0) {
        return Err(Error::Domain {
            name: "omega",
            value: omega,
            reason: "angular frequency must be positive",
        });
    }
    if !(tau > 0.0) {
        return Err(Error::Domain {
            name: "tau",
            value: tau,
            reason: "exposure time must be positive",
        });
    }
    Ok(ResonanceFields {
        b0: c.hbar * omega / (2.0 * c.mu_neutron_abs),
        b_rf: std::f64::consts::PI * c.hbar / (2.0 * tau * c.mu_neutron_abs),
    })
}

/// Entangled state prepared with the two flippers.
///
/// The flipped branch of the zero-phase reference, `(|I,↑⟩ + |II,↓⟩)/√2`, is
/// defined as the one obtained with `φ_I = φ_II`: its spinor is
/// `U(φ_II)|↑⟩` re-labelled as `|↓⟩`. Running the in-beam flipper at `φ_I`
/// instead inserts `U(φ_I)U†(φ_II)` in front of that reference, which only
/// multiplies it by the phase `e^{i(φ_I − φ_II)}`.
pub fn flipper_route_state(phi_i: f64, phi_ii: f64) -> PureState {
    let reference = flipper_unitary(phi_ii) * spin_up();
    let rotated = flipper_unitary(phi_i) * flipper_unitary(phi_ii).adjoint() * reference;
    // component of the rotated spinor along the reference flipped state
    let along = reference.dotc(&rotated);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let amps = Vector4::new(C64::new(h, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), along * h);
    PureState::from_amplitudes(amps, wrap_tau(geometric_phase(phi_i, phi_ii)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::bell_state;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_6, PI};

    const TOL: f64 = 1e-12;

    fn spin_down() -> nalgebra::Vector2<C64> {
        nalgebra::Vector2::new(C64::new(0.0, 0.0), C64::new(1.0, 0.0))
    }

    #[test]
    fn convention_u0_up_is_minus_i_down() {
        let v = flipper_unitary(0.0) * spin_up();
        assert!((v[0]).norm() < TOL);
        assert!((v[1] - C64::new(0.0, -1.0)).norm() < TOL);
    }

    #[test]
    fn relative_phase_follows_phi() {
        let a = flipper_unitary(FRAC_PI_3) * spin_up();
        let b = flipper_unitary(0.0) * spin_up();
        let rel = a[1] / b[1];
        assert!((rel - C64::from_polar(1.0, FRAC_PI_3)).norm() < TOL);
    }

    #[test]
    fn u_u_dagger_is_identity() {
        let u = flipper_unitary(0.0);
        assert!((u * u.adjoint() - Matrix2::identity()).norm() < TOL);
    }

    #[test]
    fn geometric_operator_on_down() {
        // explicit product: U(φ) U†(0) = diag(e^{-iφ}, e^{iφ})
        for phi in [0.2, 1.0, -2.5, 4.0] {
            let v = flipper_unitary(phi) * flipper_unitary(0.0).adjoint() * spin_down();
            assert!((v[0]).norm() < TOL);
            assert!((v[1] - C64::from_polar(1.0, phi)).norm() < TOL);
        }
    }

    #[test]
    fn solid_angle_examples() {
        assert!((solid_angle(FRAC_PI_2, 0.0) - PI).abs() < TOL);
        assert_eq!(solid_angle(0.0, 0.0), 0.0);
        assert!((solid_angle(FRAC_PI_4, -FRAC_PI_4) - PI).abs() < TOL);
        assert!((solid_angle(PI, 0.0) - TAU).abs() < TOL);
        assert!((solid_angle(0.0, PI) - TAU).abs() < TOL);
        assert!((solid_angle(4.0, 0.0) - (8.0 - 2.0 * TAU)).abs() < TOL);
    }

    #[test]
    fn geometric_phase_examples() {
        assert!((geometric_phase(FRAC_PI_6, 0.0) - FRAC_PI_6).abs() < TOL);
        assert_eq!(geometric_phase(0.0, 0.0), 0.0);
        assert!((geometric_phase(FRAC_PI_2, FRAC_PI_4) - FRAC_PI_4).abs() < TOL);
    }

    #[test]
    fn resonance_examples() {
        let b58 = resonance_parameters(TAU * 58e3, 1e-4).unwrap().b0;
        assert!((b58 - 1.99e-3).abs() < 0.005e-3, "{b58}");
        let b29 = resonance_parameters(TAU * 29e3, 1e-4).unwrap().b0;
        assert!((b29 - 0.99e-3).abs() < 0.005e-3, "{b29}");
        let a = resonance_parameters(TAU * 58e3, 1e-4).unwrap().b_rf;
        let b = resonance_parameters(TAU * 58e3, 1e-3).unwrap().b_rf;
        assert!((a / b - 10.0).abs() < 1e-12);
    }

    #[test]
    fn resonance_rejects_nonpositive() {
        assert!(matches!(
            resonance_parameters(0.0, 1.0),
            Err(Error::Domain { name: "omega", .. })
        ));
        assert!(matches!(
            resonance_parameters(1.0, -1.0),
            Err(Error::Domain { name: "tau", .. })
        ));
        assert!(resonance_parameters(f64::NAN, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn unitarity(phi in -10.0f64..10.0) {
            let u = flipper_unitary(phi);
            prop_assert!((u.adjoint() * u - Matrix2::identity()).norm() < TOL);
            let v = u * spin_up();
            prop_assert!(v[0].norm() < TOL && (v[1].norm() - 1.0).abs() < TOL);
        }

        #[test]
        fn phase_vanishes_for_equal_flippers(phi in -10.0f64..10.0) {
            prop_assert_eq!(geometric_phase(phi, phi), 0.0);
        }

        #[test]
        fn solid_angle_antisymmetric(a in -6.0f64..6.0, b in -6.0f64..6.0) {
            let s = solid_angle(a, b);
            prop_assert!(s > -TAU && s <= TAU);
            let t = solid_angle(b, a);
            // antisymmetry holds modulo the 4π wrap at the boundary
            let d = crate::angle::wrap_pi((s + t) / 2.0);
            prop_assert!(d.abs() < 1e-9);
        }

        #[test]
        fn route_matches_bell_state(phi_i in -10.0f64..10.0, phi_ii in -10.0f64..10.0) {
            let routed = flipper_route_state(phi_i, phi_ii);
            let direct = bell_state(geometric_phase(phi_i, phi_ii), 0.0, 0.0);
            prop_assert!(routed.equals_up_to_global_phase(&direct, TOL));
        }
    }
}
