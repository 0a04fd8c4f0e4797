//! Exact quantum mechanics of the spin-path entangled neutron.
//!
//! The state lives in the tensor product of the path space `{|I⟩, |II⟩}` and
//! the spin space `{|↑⟩, |↓⟩}`, with amplitudes ordered
//! `(|I,↑⟩, |I,↓⟩, |II,↑⟩, |II,↓⟩)`. Measurements are rank-one projectors on
//! each factor, parametrised by a polar and an azimuthal angle.
//!
//! Expectation values are always obtained from the four joint probabilities
//! computed with explicit projectors. For the ideal state this gives
//!
//! ```text
//! E(α, β) = cos α₁ cos β₁ + sin α₁ sin β₁ cos(γ − α₂ − β₂)
//! ```
//!
//! Closed forms that carry the opposite overall sign describe the same
//! physics: every CHSH value is invariant under a global sign flip of the
//! four correlations.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{Complex, Matrix2, Matrix4, Vector2, Vector4};

use crate::angle::wrap_tau;

pub type C64 = Complex<f64>;

/// One of the two degrees of freedom of the neutron.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subspace {
    Path,
    Spin,
}

/// Outcome sign of a dichotomic measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];

    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Interferometer path, used for beam blocks and branch extraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Path {
    I,
    II,
}

impl Path {
    pub fn other(self) -> Path {
        match self {
            Path::I => Path::II,
            Path::II => Path::I,
        }
    }
}

/// Measurement direction on one subspace (polar, azimuthal), both in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementDirection {
    pub polar: f64,
    pub azimuthal: f64,
    pub subspace: Subspace,
}

impl MeasurementDirection {
    pub fn new(polar: f64, azimuthal: f64, subspace: Subspace) -> Self {
        Self {
            polar: wrap_tau(polar),
            azimuthal: wrap_tau(azimuthal),
            subspace,
        }
    }

    pub fn path(polar: f64, azimuthal: f64) -> Self {
        Self::new(polar, azimuthal, Subspace::Path)
    }

    pub fn spin(polar: f64, azimuthal: f64) -> Self {
        Self::new(polar, azimuthal, Subspace::Spin)
    }

    /// The orthogonal direction: polar angle shifted by π, azimuth unchanged.
    pub fn antipode(self) -> Self {
        Self::new(self.polar + std::f64::consts::PI, self.azimuthal, self.subspace)
    }

    /// `|±dir⟩` in the `(e₀, e₁)` basis of the subspace.
    pub fn ket(self, sign: Sign) -> Vector2<C64> {
        let (s, c) = (0.5 * self.polar).sin_cos();
        let phase = C64::from_polar(1.0, self.azimuthal);
        match sign {
            Sign::Plus => Vector2::new(C64::new(c, 0.0), phase * s),
            Sign::Minus => Vector2::new(C64::new(-s, 0.0), phase * c),
        }
    }
}

/// A joint spin-path projective measurement outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointSetting {
    pub path_dir: MeasurementDirection,
    pub spin_dir: MeasurementDirection,
    pub path_sign: Sign,
    pub spin_sign: Sign,
}

impl JointSetting {
    pub fn new(
        path_dir: MeasurementDirection,
        path_sign: Sign,
        spin_dir: MeasurementDirection,
        spin_sign: Sign,
    ) -> Self {
        Self {
            path_dir,
            spin_dir,
            path_sign,
            spin_sign,
        }
    }

    /// Both outcomes `+`.
    pub fn plus_plus(path_dir: MeasurementDirection, spin_dir: MeasurementDirection) -> Self {
        Self::new(path_dir, Sign::Plus, spin_dir, Sign::Plus)
    }
}

/// Normalised pure state over path ⊗ spin together with the parameters that
/// generated it.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    pub amplitudes: Vector4<C64>,
    /// Geometric phase γ carried by the `|II⟩` branch.
    pub gamma: f64,
    /// Flip-imperfection angle θ; `θ = 0` is a perfect flip to `|↓⟩`.
    pub theta: f64,
    /// Path phase χ applied to `|II⟩`.
    pub path_phase: f64,
    /// Constant dynamical phase, added to the path phase.
    pub dyn_offset: f64,
}

/// Spin state of the flipped branch: `sin(θ/2)|↑⟩ + cos(θ/2)|↓⟩`.
pub fn flipped_spinor(theta: f64) -> Vector2<C64> {
    let (s, c) = (0.5 * theta).sin_cos();
    Vector2::new(C64::new(s, 0.0), C64::new(c, 0.0))
}

/// Spin up, the state of the unflipped branch.
pub fn spin_up() -> Vector2<C64> {
    Vector2::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0))
}

/// Entangled state `(|I,↑⟩ + e^{i(χ+γ)}|II⟩ ⊗ (sin(θ/2)|↑⟩ + cos(θ/2)|↓⟩))/√2`.
///
/// With `θ = χ = 0` this is `(|I,↑⟩ + e^{iγ}|II,↓⟩)/√2`.
pub fn bell_state(gamma: f64, theta: f64, path_phase: f64) -> PureState {
    bell_state_with_offset(gamma, theta, path_phase, 0.0)
}

/// [`bell_state`] with a constant dynamical phase folded into the path phase.
pub fn bell_state_with_offset(gamma: f64, theta: f64, path_phase: f64, dyn_offset: f64) -> PureState {
    let phase = C64::from_polar(FRAC_1_SQRT_2, path_phase + dyn_offset + gamma);
    let flipped = flipped_spinor(theta);
    let amplitudes = Vector4::new(
        C64::new(FRAC_1_SQRT_2, 0.0),
        C64::new(0.0, 0.0),
        phase * flipped[0],
        phase * flipped[1],
    );
    PureState {
        amplitudes,
        gamma,
        theta,
        path_phase,
        dyn_offset,
    }
}

/// Interferometer state with the in-beam flipper switched off: both branches
/// carry `|↑⟩`, so no geometric phase is acquired.
pub fn flipper_off_state(path_phase: f64, dyn_offset: f64) -> PureState {
    let mut state = bell_state_with_offset(0.0, std::f64::consts::PI, path_phase, dyn_offset);
    // cos(π/2) is not exactly zero in floating point
    state.amplitudes[3] = C64::new(0.0, 0.0);
    state
}

impl PureState {
    /// Builds a state from raw amplitudes, normalising them.
    pub fn from_amplitudes(amplitudes: Vector4<C64>, gamma: f64) -> Self {
        let norm = amplitudes.norm();
        Self {
            amplitudes: amplitudes / C64::new(norm, 0.0),
            gamma,
            theta: 0.0,
            path_phase: 0.0,
            dyn_offset: 0.0,
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    /// Unnormalised spin amplitudes of one path branch.
    pub fn branch(&self, path: Path) -> Vector2<C64> {
        let o = match path {
            Path::I => 0,
            Path::II => 2,
        };
        Vector2::new(self.amplitudes[o], self.amplitudes[o + 1])
    }

    /// `⟨self|other⟩`.
    pub fn overlap(&self, other: &PureState) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// True when the two states differ by at most a global phase, amplitude by
    /// amplitude within `tol`.
    pub fn equals_up_to_global_phase(&self, other: &PureState, tol: f64) -> bool {
        let ov = self.overlap(other);
        if ov.norm() < tol {
            return false;
        }
        let phase = ov / ov.norm();
        self.amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .all(|(a, b)| (a * phase - b).norm() <= tol)
    }
}

/// Projector `|±dir⟩⟨±dir|` on the two-dimensional subspace of `dir`.
pub fn subspace_projector(dir: MeasurementDirection, sign: Sign) -> Matrix2<C64> {
    let v = dir.ket(sign);
    v * v.adjoint()
}

/// `⟨Ψ| P_path ⊗ P_spin |Ψ⟩`.
pub fn joint_probability(state: &PureState, setting: &JointSetting) -> f64 {
    debug_assert_eq!(setting.path_dir.subspace, Subspace::Path);
    debug_assert_eq!(setting.spin_dir.subspace, Subspace::Spin);
    let p = subspace_projector(setting.path_dir, setting.path_sign);
    let s = subspace_projector(setting.spin_dir, setting.spin_sign);
    let joint: Matrix4<C64> = p.kronecker(&s);
    let psi = &state.amplitudes;
    // Hermitian form: the imaginary part is rounding noise
    psi.dotc(&(joint * psi)).re.clamp(0.0, 1.0)
}

/// The four joint probabilities in the order `(++, +−, −+, −−)`.
pub fn joint_probabilities(
    state: &PureState,
    path_dir: MeasurementDirection,
    spin_dir: MeasurementDirection,
) -> [f64; 4] {
    let mut out = [0.0; 4];
    let mut k = 0;
    for ps in Sign::BOTH {
        for ss in Sign::BOTH {
            out[k] = joint_probability(state, &JointSetting::new(path_dir, ps, spin_dir, ss));
            k += 1;
        }
    }
    out
}

/// Correlation `⟨A(α) ⊗ B(β)⟩ = p₊₊ − p₊₋ − p₋₊ + p₋₋`.
pub fn expectation(state: &PureState, path_dir: MeasurementDirection, spin_dir: MeasurementDirection) -> f64 {
    let [pp, pm, mp, mm] = joint_probabilities(state, path_dir, spin_dir);
    pp - pm - mp + mm
}
