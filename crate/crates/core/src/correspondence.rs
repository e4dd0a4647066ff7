//! The dictionary between the thermodynamic fluctuation process and quantum
//! mechanics, and checks of the identities it implies.
//!
//! | thermodynamics | mechanics |
//! |----------------|-----------|
//! | `τ`            | `i t`     |
//! | `γ`            | `ω`       |
//! | `y`            | `x`       |
//! | `s / 2k_B`     | `mω / ħ`  |
//!
//! Under it the resistance fixes the mass, `m = ħ r / 2k_B`, for both the
//! harmonic branch and the free (`γ → 0`) branch.
//!
//! Transition densities here are normalized in `y₂`. The harmonic identity
//! is usually written for the unnormalized density
//! `(1/√2π)(s/k_B)/√(1 - e^{-2γΔτ}) · exp(…)`, which is the normalized one
//! times `√(s/k_B) = √(2mω/ħ)`. [`verify_harmonic`] checks that written form,
//! and [`HarmonicCheck::normalized_rel_residual`] checks the equivalent
//! statement for the normalized density, where the `√(2mω/ħ)` drops out.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::ou::{OUParams, WienerParams};
use crate::path_integral::ThermoLagrangian;
use crate::quantum::{build_wavefunction, Amplitude, QuantumParams};
use crate::thermo::{ThermoState, ThermoSystem};
use crate::time::ComplexTime;

const INVARIANT_TOL: f64 = 1e-12;

/// `ω = γ`, `m = ħ s / (2 k_B γ)`.
pub fn map_to_quantum(p: &OUParams, hbar: f64) -> Result<QuantumParams> {
    let hbar = require_positive("hbar", hbar)?;
    QuantumParams::new(hbar * p.s() / (2.0 * p.k_b() * p.gamma()), p.gamma(), hbar)
}

/// Inverse of [`map_to_quantum`] for a given `k_B`: `γ = ω`, `s = 2k_B mω/ħ`,
/// `r = s / γ`.
pub fn map_to_thermo(q: &QuantumParams, k_b: f64) -> Result<OUParams> {
    let k_b = require_positive("k_b", k_b)?;
    if q.omega() == 0.0 {
        return Err(Error::InvalidParameter {
            name: "omega",
            value: 0.0,
            reason: "the free particle maps to the Wiener limit; use map_free_to_thermo",
        });
    }
    let s = 2.0 * k_b * q.m() * q.omega() / q.hbar();
    OUParams::new(s, s / q.omega(), k_b)
}

/// Free branch: `m = ħ r / 2k_B`, `ω = 0`.
pub fn map_free_to_quantum(w: &WienerParams, hbar: f64) -> Result<QuantumParams> {
    let hbar = require_positive("hbar", hbar)?;
    QuantumParams::free(hbar * w.r / (2.0 * w.k_b), hbar)
}

pub fn map_free_to_thermo(q: &QuantumParams, k_b: f64) -> Result<WienerParams> {
    let k_b = require_positive("k_b", k_b)?;
    WienerParams::new(2.0 * k_b * q.m() / q.hbar(), k_b)
}

/// A matched pair of thermodynamic and mechanical parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DictionaryMap {
    thermo: OUParams,
    quantum: QuantumParams,
    /// `y = conversion · x`.
    conversion: f64,
}

impl DictionaryMap {
    pub fn new(thermo: OUParams, hbar: f64) -> Result<Self> {
        let quantum = map_to_quantum(&thermo, hbar)?;
        Self::from_parts(thermo, quantum, 1.0)
    }

    /// Pairs given parameters, checking `ω = γ` and `s/2k_B = mω/ħ`.
    pub fn from_parts(thermo: OUParams, quantum: QuantumParams, conversion: f64) -> Result<Self> {
        let conversion = require_positive("conversion", conversion)?;
        let freq = (quantum.omega() - thermo.gamma()).abs() / thermo.gamma();
        if freq > INVARIANT_TOL {
            return Err(Error::InvalidParameter {
                name: "omega",
                value: quantum.omega(),
                reason: "must equal the thermodynamic relaxation rate",
            });
        }
        let lhs = thermo.s() / (2.0 * thermo.k_b());
        let rhs = quantum.m() * quantum.omega() / quantum.hbar();
        if (lhs - rhs).abs() > INVARIANT_TOL * lhs {
            return Err(Error::InvalidParameter {
                name: "m",
                value: quantum.m(),
                reason: "s/2k_B must equal m*omega/hbar",
            });
        }
        Ok(Self {
            thermo,
            quantum,
            conversion,
        })
    }

    pub fn thermo(&self) -> &OUParams {
        &self.thermo
    }

    pub fn quantum(&self) -> &QuantumParams {
        &self.quantum
    }

    pub fn conversion(&self) -> f64 {
        self.conversion
    }

    fn coordinate(&self, x: f64) -> f64 {
        self.conversion * x
    }

    /// `ΔV / ħω` with `ΔV = V(x₂) - V(x₁)`.
    pub fn boundary_term(&self, x1: f64, x2: f64) -> f64 {
        let q = &self.quantum;
        (q.potential(x2) - q.potential(x1)) / (q.hbar() * q.omega())
    }
}

/// Orientation of `ΔV` in the harmonic identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryConvention {
    /// `ΔV = V(x₂) - V(x₁)`.
    #[default]
    Forward,
    /// `ΔV = V(x₁) - V(x₂)`.
    Reversed,
}

impl BoundaryConvention {
    fn sign(self) -> f64 {
        match self {
            Self::Forward => 1.0,
            Self::Reversed => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicCheck {
    pub x1: f64,
    pub x2: f64,
    pub t: f64,
    /// Continued density in its unnormalized written form.
    pub lhs: Complex64,
    /// `exp(iωt/2 - ΔV/ħω) √(2mω/ħ) K(x₂, t | x₁, 0)`.
    pub rhs: Complex64,
    pub rel_residual: f64,
    /// `|f_norm - exp(iωt/2 - ΔV/ħω) K| / |…|` for the normalized density.
    pub normalized_rel_residual: f64,
}

pub fn verify_harmonic(map: &DictionaryMap, x1: f64, x2: f64, t: f64) -> Result<HarmonicCheck> {
    verify_harmonic_with(map, x1, x2, t, BoundaryConvention::Forward)
}

/// Harmonic identity with a chosen `ΔV` orientation; the reversed orientation
/// serves as a negative control.
pub fn verify_harmonic_with(
    map: &DictionaryMap,
    x1: f64,
    x2: f64,
    t: f64,
    convention: BoundaryConvention,
) -> Result<HarmonicCheck> {
    let p = map.thermo();
    let q = map.quantum();
    let normalized = p.transition_density_continued(map.coordinate(x1), map.coordinate(x2), ComplexTime::wick(t))?;
    let lhs = normalized * (p.s() / p.k_b()).sqrt();

    let kernel = q.harmonic_propagator(x1, x2, t)?.value();
    let factor = Complex64::new(
        -convention.sign() * map.boundary_term(x1, x2),
        0.5 * q.omega() * t,
    )
    .exp();
    let rhs_normalized = factor * kernel;
    let rhs = rhs_normalized * (2.0 * q.m() * q.omega() / q.hbar()).sqrt();
    Ok(HarmonicCheck {
        x1,
        x2,
        t,
        lhs,
        rhs,
        rel_residual: (lhs - rhs).norm() / rhs.norm(),
        normalized_rel_residual: (normalized - rhs_normalized).norm() / rhs_normalized.norm(),
    })
}

/// Largest relative residual of [`verify_harmonic`] over a grid.
pub fn verify_harmonic_grid(map: &DictionaryMap, xs: &[f64], omega_ts: &[f64]) -> Result<GridSummary> {
    let omega = map.quantum().omega();
    let mut summary = GridSummary::default();
    for &wt in omega_ts {
        for &x1 in xs {
            for &x2 in xs {
                let check = verify_harmonic(map, x1, x2, wt / omega)?;
                summary.absorb(check.rel_residual.max(check.normalized_rel_residual));
            }
        }
    }
    Ok(summary)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub max_residual: f64,
    pub points: usize,
}

impl GridSummary {
    fn absorb(&mut self, r: f64) {
        // NaN must surface as a failure
        self.max_residual = if r.is_nan() { f64::NAN } else { self.max_residual.max(r) };
        self.points += 1;
    }
}

/// Free-particle correspondence over a set of `(x₁, x₂, t)` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreeCheck {
    /// Least-squares `c` in `K_free ≈ c · W(iτ)`, shared by all points.
    pub fitted_constant: Complex64,
    pub max_rel_residual: f64,
    pub points: usize,
}

/// The two sides of the free identity at one point: the Wiener kernel
/// continued to `Δτ = i t`, and the free propagator with `m = ħ r / 2k_B`.
pub fn free_pair(w: &WienerParams, hbar: f64, x1: f64, x2: f64, t: f64) -> Result<(Complex64, Complex64)> {
    let q = map_free_to_quantum(w, hbar)?;
    let thermo = w.kernel(x1, x2, ComplexTime::wick(t))?;
    let quantum = q.free_propagator(x1, x2, t)?.value();
    Ok((thermo, quantum))
}

pub fn verify_free(w: &WienerParams, hbar: f64, points: &[(f64, f64, f64)]) -> Result<FreeCheck> {
    if points.is_empty() {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: 0,
        });
    }
    let pairs = points
        .iter()
        .map(|&(x1, x2, t)| free_pair(w, hbar, x1, x2, t))
        .collect::<Result<Vec<_>>>()?;
    let (num, den) = pairs.iter().fold((Complex64::new(0.0, 0.0), 0.0), |(n, d), (th, qu)| {
        (n + th.conj() * qu, d + th.norm_sqr())
    });
    let c = num / den;
    let max_rel_residual = pairs
        .iter()
        .map(|(th, qu)| (qu - c * th).norm() / qu.norm())
        .fold(0.0, f64::max);
    Ok(FreeCheck {
        fitted_constant: c,
        max_rel_residual,
        points: pairs.len(),
    })
}

/// Spread of `ln f_stat(x) - ln |ψ₀(x)|²` over `xs`: zero when the stationary
/// density is proportional to the squared ground state.
pub fn born_log_ratio_deviation(p: &OUParams, q: &QuantumParams, xs: &[f64]) -> Result<f64> {
    let ratios = xs
        .iter()
        .map(|&x| {
            let psi = q.ground_state(x)?;
            Ok(p.stationary_density(x).ln() - 2.0 * psi.ln())
        })
        .collect::<Result<Vec<f64>>>()?;
    let mean = ratios.iter().sum::<f64>() / ratios.len().max(1) as f64;
    Ok(ratios.iter().map(|r| (r - mean).abs()).fold(0.0, f64::max))
}

pub fn verify_stationary_born(p: &OUParams, hbar: f64, xs: &[f64]) -> Result<f64> {
    born_log_ratio_deviation(p, &map_to_quantum(p, hbar)?, xs)
}

/// `ψ = Z^{-1/2} exp(S/2k_B) exp(iI/ħ)` with `S(y) = -s y²/2` from the
/// one-variable thermodynamic system and `Z = √(2πk_B/s)`, so that `|ψ|²` is
/// the stationary density.
pub fn born_wavefunction(p: &OUParams, y: f64, action: f64, hbar: f64) -> Result<Amplitude> {
    let system = ThermoSystem::from_row_major(1, &[p.s()], &[1.0 / p.r()])?.with_k_b(p.k_b())?;
    let entropy = system.entropy(&ThermoState::new([y]))?;
    let z = (2.0 * std::f64::consts::PI * p.k_b() / p.s()).sqrt();
    build_wavefunction(entropy, action, p.k_b(), hbar, z)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionEntropyCheck {
    /// `-(1/2k_B) ∫ L dτ` on the extremal path, continued to `Δτ = i t`.
    pub thermo_exponent: Complex64,
    /// `i I / ħ` from the classical action.
    pub mechanical_exponent: Complex64,
    /// `ΔV / ħω`.
    pub boundary_term: f64,
    /// Largest of: exponent mismatch, mismatch of the continued density's
    /// Gaussian exponent with `iI/ħ - ΔV/ħω`, and mismatch of the prefactor
    /// ratio with `e^{iωt/2}`.
    pub analytic_residual: f64,
    /// Stationary discrete thermodynamic exponent, continued.
    pub discrete_thermo_exponent: Complex64,
    /// `i/ħ` times the stationary discrete mechanical action.
    pub discrete_mechanical_exponent: Complex64,
    /// `|discrete - analytic| / max(1, |analytic|)`.
    pub discrete_residual: f64,
    /// `|discrete thermo - discrete mechanical|`; the dictionary holds slice by slice.
    pub discrete_dictionary_residual: f64,
}

pub fn verify_action_entropy(
    map: &DictionaryMap,
    x1: f64,
    x2: f64,
    t: f64,
    n_slices: usize,
) -> Result<ActionEntropyCheck> {
    let p = map.thermo();
    let q = map.quantum();
    let (y1, y2) = (map.coordinate(x1), map.coordinate(x2));
    let wick = ComplexTime::wick(t);
    let lag = ThermoLagrangian::from(p);

    let thermo_exponent = -lag.extremal_action(y1, y2, wick)?;
    let action = q.classical_action(x1, x2, t)?;
    let mechanical_exponent = Complex64::new(0.0, action / q.hbar());
    let boundary_term = map.boundary_term(x1, x2);

    let gaussian = p.transition_exponent(y1, y2, wick)?;
    let kernel_prefactor = q.harmonic_propagator(0.0, 0.0, t)?.value();
    let ratio = p.transition_prefactor(wick)? / kernel_prefactor;
    let analytic_residual = [
        (thermo_exponent - mechanical_exponent).norm(),
        (gaussian - (mechanical_exponent - boundary_term)).norm(),
        (ratio - Complex64::from_polar(1.0, 0.5 * q.omega() * t)).norm(),
    ]
    .into_iter()
    .fold(0.0, f64::max);

    let discrete_thermo_exponent = -lag.continued_discrete_action(y1, y2, wick, n_slices)?;
    let discrete_mechanical_exponent =
        Complex64::new(0.0, q.discrete_classical_action(x1, x2, t, n_slices)? / q.hbar());
    let discrete_residual = (discrete_thermo_exponent - mechanical_exponent).norm()
        / mechanical_exponent.norm().max(1.0);
    let discrete_dictionary_residual = (discrete_thermo_exponent - discrete_mechanical_exponent).norm();

    Ok(ActionEntropyCheck {
        thermo_exponent,
        mechanical_exponent,
        boundary_term,
        analytic_residual,
        discrete_thermo_exponent,
        discrete_mechanical_exponent,
        discrete_residual,
        discrete_dictionary_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn central() -> DictionaryMap {
        DictionaryMap::new(OUParams::with_gamma(1.0, 2.0, 1.0).unwrap(), 1.0).unwrap()
    }

    #[test]
    fn mapping_example() {
        let p = OUParams::new(2.0, 2.0, 1.0).unwrap();
        let q = map_to_quantum(&p, 1.0).unwrap();
        assert_eq!((q.m(), q.omega()), (1.0, 1.0));
        let doubled = OUParams::new(2.0, 2.0, 2.0).unwrap();
        assert_eq!(map_to_quantum(&doubled, 1.0).unwrap().m(), 0.5);
    }

    #[test]
    fn free_mass_from_resistance() {
        let w = WienerParams::new(3.0, 0.5).unwrap();
        let q = map_free_to_quantum(&w, 2.0).unwrap();
        assert_eq!(q.m(), 6.0);
        assert_eq!(q.omega(), 0.0);
        assert_eq!(map_free_to_thermo(&q, 0.5).unwrap(), w);
        assert!(map_to_thermo(&q, 1.0).is_err());
    }

    #[test]
    fn dictionary_rejects_mismatched_parts() {
        let p = OUParams::new(2.0, 2.0, 1.0).unwrap();
        let wrong_mass = QuantumParams::new(1.01, 1.0, 1.0).unwrap();
        assert!(DictionaryMap::from_parts(p, wrong_mass, 1.0).is_err());
        let wrong_freq = QuantumParams::new(1.0, 1.1, 1.0).unwrap();
        assert!(DictionaryMap::from_parts(p, wrong_freq, 1.0).is_err());
        let ok = QuantumParams::new(1.0, 1.0, 1.0).unwrap();
        assert!(DictionaryMap::from_parts(p, ok, 1.0).is_ok());
    }

    #[test]
    fn harmonic_identity_on_the_diagonal() {
        let map = central();
        assert_eq!(map.quantum().m(), 1.0);
        let c = verify_harmonic(&map, 0.5, 0.5, 0.7).unwrap();
        assert!(c.rel_residual < 1e-9, "{c:?}");
        assert!(c.normalized_rel_residual < 1e-9);
    }

    #[test]
    fn reversed_boundary_breaks_the_identity() {
        let map = central();
        // |x2² - x1²| = 1
        let c = verify_harmonic_with(&map, 0.0, 1.0, 0.7, BoundaryConvention::Reversed).unwrap();
        let ratio = c.lhs.norm() / c.rhs.norm();
        assert!(!(1.0 / 1.1..=1.1).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn free_constant_is_unity() {
        let w = WienerParams::new(1.3, 0.8).unwrap();
        let pts = [(0.0, 0.0, 0.5), (0.0, 0.0, 1.0), (0.0, 0.0, 2.0)];
        let check = verify_free(&w, 1.0, &pts).unwrap();
        assert!((check.fitted_constant - 1.0).norm() < 1e-12);
        assert!(check.max_rel_residual < 1e-12);
    }

    #[test]
    fn free_pair_symmetric_under_swap() {
        let w = WienerParams::new(1.3, 0.8).unwrap();
        let a = free_pair(&w, 1.0, 0.3, -1.2, 0.9).unwrap();
        let b = free_pair(&w, 1.0, -1.2, 0.3, 0.9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn born_rule_deviation() {
        let p = OUParams::new(2.0, 1.0, 1.0).unwrap();
        let xs: Vec<f64> = (-12..=12).map(|k| 0.25 * k as f64).collect();
        assert!(verify_stationary_born(&p, 1.0, &xs).unwrap() < 1e-12);
    }

    #[test]
    fn action_entropy_trivial_path() {
        let c = verify_action_entropy(&central(), 0.0, 0.0, 0.7, 16).unwrap();
        assert!(c.thermo_exponent.norm() < 1e-15 && c.mechanical_exponent.norm() < 1e-15);
        assert!(c.analytic_residual < 1e-12);
    }

    #[test]
    fn born_wavefunction_modulus() {
        let p = OUParams::new(1.4, 0.6, 0.9).unwrap();
        for y in [-1.0, 0.0, 0.4, 2.2] {
            let psi = born_wavefunction(&p, y, 0.37, 1.0).unwrap();
            let expected = p.stationary_density(y).sqrt();
            assert!((psi.value().norm() - expected).abs() < 1e-14);
        }
    }
}
