//! Mechanical side: free and harmonic propagators, the harmonic ground state,
//! classical actions and wavefunctions assembled from entropy and action.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{require_finite, require_positive, Error, Result};
use crate::path_integral::QuadraticChain;
use crate::quadrature::ContourRotation;

/// Minimum distance of `ωt` from a multiple of `π`.
pub const CAUSTIC_GUARD: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "QuantumSpec", into = "QuantumSpec")]
pub struct QuantumParams {
    m: f64,
    omega: f64,
    hbar: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantumSpec {
    pub m: f64,
    pub omega: f64,
    #[serde(default = "one")]
    pub hbar: f64,
}

fn one() -> f64 {
    1.0
}

impl TryFrom<QuantumSpec> for QuantumParams {
    type Error = Error;
    fn try_from(q: QuantumSpec) -> Result<Self> {
        QuantumParams::new(q.m, q.omega, q.hbar)
    }
}

impl From<QuantumParams> for QuantumSpec {
    fn from(q: QuantumParams) -> Self {
        QuantumSpec {
            m: q.m,
            omega: q.omega,
            hbar: q.hbar,
        }
    }
}

/// A probability density amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Amplitude(pub Complex64);

impl Amplitude {
    pub fn value(self) -> Complex64 {
        self.0
    }

    pub fn norm_sqr(self) -> f64 {
        self.0.norm_sqr()
    }

    pub fn phase(self) -> f64 {
        self.0.arg()
    }
}

impl QuantumParams {
    pub fn new(m: f64, omega: f64, hbar: f64) -> Result<Self> {
        let m = require_positive("m", m)?;
        let hbar = require_positive("hbar", hbar)?;
        if !(omega.is_finite() && omega >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "omega",
                value: omega,
                reason: "must be finite and non-negative",
            });
        }
        Ok(Self { m, omega, hbar })
    }

    pub fn free(m: f64, hbar: f64) -> Result<Self> {
        Self::new(m, 0.0, hbar)
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// `V(x) = m ω² x² / 2`.
    pub fn potential(&self, x: f64) -> f64 {
        0.5 * self.m * self.omega * self.omega * x * x
    }

    /// `sin ωt`, rejecting points within [`CAUSTIC_GUARD`] of a caustic.
    fn sin_away_from_caustic(&self, t: f64) -> Result<f64> {
        let phase = self.omega * t;
        let distance = (phase - PI * (phase / PI).round()).abs();
        if distance < CAUSTIC_GUARD {
            return Err(Error::Caustic { distance });
        }
        Ok(phase.sin())
    }

    /// `sqrt(m / 2πiħt) exp(i m (x₂ - x₁)² / 2ħt)`.
    pub fn free_propagator(&self, x1: f64, x2: f64, t: f64) -> Result<Amplitude> {
        check_time(t)?;
        let prefactor = (Complex64::new(0.0, -self.m / (2.0 * PI * self.hbar * t))).sqrt();
        let phase = self.m * (x2 - x1) * (x2 - x1) / (2.0 * self.hbar * t);
        Ok(Amplitude(prefactor * Complex64::from_polar(1.0, phase)))
    }

    /// Mehler kernel
    /// `sqrt(mω / 2πiħ sin ωt) exp[(i mω / 2ħ sin ωt)((x₁² + x₂²) cos ωt - 2 x₁ x₂)]`.
    ///
    /// The square root is the principal branch, which coincides with the
    /// continuation from `t → 0⁺` on `0 < ωt < π`. Reduces to the free
    /// propagator for `ω = 0`.
    pub fn harmonic_propagator(&self, x1: f64, x2: f64, t: f64) -> Result<Amplitude> {
        if self.omega == 0.0 {
            return self.free_propagator(x1, x2, t);
        }
        check_time(t)?;
        let sin = self.sin_away_from_caustic(t)?;
        let prefactor =
            (Complex64::new(0.0, -self.m * self.omega / (2.0 * PI * self.hbar * sin))).sqrt();
        let phase = self.harmonic_action_with_sin(x1, x2, t, sin) / self.hbar;
        Ok(Amplitude(prefactor * Complex64::from_polar(1.0, phase)))
    }

    /// Unnormalized ground state `exp(-mωx² / 2ħ)`.
    pub fn ground_state(&self, x: f64) -> Result<f64> {
        if self.omega == 0.0 {
            return Err(Error::InvalidParameter {
                name: "omega",
                value: 0.0,
                reason: "the ground state needs a confining potential",
            });
        }
        Ok((-self.m * self.omega * x * x / (2.0 * self.hbar)).exp())
    }

    /// Ground state normalized in `L²`, `(mω/πħ)^{1/4} exp(-mωx² / 2ħ)`.
    pub fn normalized_ground_state(&self, x: f64) -> Result<f64> {
        Ok((self.m * self.omega / (PI * self.hbar)).powf(0.25) * self.ground_state(x)?)
    }

    /// Classical action along the extremal path from `x1` to `x2` in time `t`;
    /// the free action when `ω = 0`.
    pub fn classical_action(&self, x1: f64, x2: f64, t: f64) -> Result<f64> {
        check_time(t)?;
        if self.omega == 0.0 {
            return Ok(self.m * (x2 - x1) * (x2 - x1) / (2.0 * t));
        }
        let sin = self.sin_away_from_caustic(t)?;
        Ok(self.harmonic_action_with_sin(x1, x2, t, sin))
    }

    fn harmonic_action_with_sin(&self, x1: f64, x2: f64, t: f64, sin: f64) -> f64 {
        let wt = self.omega * t;
        self.m * self.omega / (2.0 * sin) * ((x1 * x1 + x2 * x2) * wt.cos() - 2.0 * x1 * x2)
    }

    /// Discretized mechanical action `Σ Δt [m/2 ((x' - x)/Δt)² - V((x + x')/2)]`.
    pub fn chain(&self) -> QuadraticChain {
        QuadraticChain {
            kinetic: 0.5 * self.m,
            potential: -0.5 * self.m * self.omega * self.omega,
        }
    }

    /// Stationary value of the discretized action on `n_slices` slices.
    pub fn discrete_classical_action(&self, x1: f64, x2: f64, t: f64, n_slices: usize) -> Result<f64> {
        check_time(t)?;
        let h = t / n_slices.max(1) as f64;
        Ok(self.chain().stationary_path(x1, x2, h, n_slices)?.action)
    }
}

fn check_time(t: f64) -> Result<()> {
    require_finite("t", t)?;
    if t == 0.0 {
        Err(Error::ZeroTime)
    } else {
        Ok(())
    }
}

/// `Z^{-1/2} exp(S / 2k_B) exp(i I / ħ)`.
pub fn build_wavefunction(entropy: f64, action: f64, k_b: f64, hbar: f64, z: f64) -> Result<Amplitude> {
    require_finite("entropy", entropy)?;
    require_finite("action", action)?;
    let k_b = require_positive("k_b", k_b)?;
    let hbar = require_positive("hbar", hbar)?;
    let z = require_positive("Z", z)?;
    let modulus = (entropy / (2.0 * k_b)).exp() / z.sqrt();
    Ok(Amplitude(Complex64::from_polar(modulus, action / hbar)))
}

/// `|∫ K(x₃, t₂ | x₂) K(x₂, t₁ | x₁) dx₂ - K(x₃, t₁ + t₂ | x₁)|`, with the
/// oscillatory integral evaluated by contour rotation.
pub fn group_property_residual(
    q: &QuantumParams,
    x1: f64,
    x3: f64,
    t1: f64,
    t2: f64,
    contour: &ContourRotation,
) -> Result<f64> {
    let direct = q.harmonic_propagator(x1, x3, t1 + t2)?.value();
    check_time(t1)?;
    check_time(t2)?;
    let sin1 = q.sin_away_from_caustic(t1)?;
    let sin2 = q.sin_away_from_caustic(t2)?;
    let composed = contour.integrate(
        |x2| propagator_at(q, x1, x2, t1, sin1) * propagator_at(q, x2, Complex64::new(x3, 0.0), t2, sin2),
        0.5 * (x1 + x3),
    )?;
    Ok((composed.value - direct).norm())
}

/// `|∫ K(x₂, t | x₁) ψ₀(x₁) dx₁ - e^{-iωt/2} ψ₀(x₂)|` for the normalized
/// ground state.
pub fn ground_state_evolution_residual(
    q: &QuantumParams,
    x2: f64,
    t: f64,
    contour: &ContourRotation,
) -> Result<f64> {
    check_time(t)?;
    let sin = q.sin_away_from_caustic(t)?;
    let norm = (q.m * q.omega / (PI * q.hbar)).powf(0.25);
    let a = q.m * q.omega / (2.0 * q.hbar);
    let evolved = contour.integrate(
        |x1| propagator_at(q, x1, Complex64::new(x2, 0.0), t, sin) * norm * (-a * x1 * x1).exp(),
        0.0,
    )?;
    let expected = Complex64::from_polar(q.normalized_ground_state(x2)?, -0.5 * q.omega * t);
    Ok((evolved.value - expected).norm())
}

// Propagator with complex endpoints, for contour integration. `x1` is real or
// complex through the generic argument.
fn propagator_at<X: Into<Complex64>, Y: Into<Complex64>>(
    q: &QuantumParams,
    x1: X,
    x2: Y,
    t: f64,
    sin: f64,
) -> Complex64 {
    let (x1, x2) = (x1.into(), x2.into());
    if q.omega == 0.0 {
        let pre = Complex64::new(0.0, -q.m / (2.0 * PI * q.hbar * t)).sqrt();
        let d = x2 - x1;
        return pre * (Complex64::i() * q.m * d * d / (2.0 * q.hbar * t)).exp();
    }
    let pre = Complex64::new(0.0, -q.m * q.omega / (2.0 * PI * q.hbar * sin)).sqrt();
    let wt = q.omega * t;
    let action = q.m * q.omega / (2.0 * sin) * ((x1 * x1 + x2 * x2) * wt.cos() - 2.0 * x1 * x2);
    pre * (Complex64::i() * action / q.hbar).exp()
}
