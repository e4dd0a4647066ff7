//! Complex time arguments and square roots continued along the Wick arc.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Radius below which a prefactor argument counts as a caustic.
pub const CAUSTIC_TOL: f64 = 1e-9;

const ARC_STEP: f64 = 2e-3;

/// A time increment that is either a real thermodynamic interval `τ` or its
/// analytic continuation, typically `τ = i t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexTime(pub Complex64);

impl ComplexTime {
    pub fn real(tau: f64) -> Self {
        Self(Complex64::new(tau, 0.0))
    }

    /// `τ = i t`: the continuation of thermodynamic time to mechanical time.
    pub fn wick(t: f64) -> Self {
        Self(Complex64::new(0.0, t))
    }

    pub fn value(self) -> Complex64 {
        self.0
    }

    pub fn as_real(self) -> Option<f64> {
        (self.0.im == 0.0).then_some(self.0.re)
    }

    pub fn modulus(self) -> f64 {
        self.0.norm()
    }
}

impl From<f64> for ComplexTime {
    fn from(tau: f64) -> Self {
        Self::real(tau)
    }
}

/// `sqrt(g(τ))` continued from the positive real axis, where `g(|τ|) > 0`, along
/// the arc `|τ| e^{iθ}` with `θ` running from 0 to `arg τ`.
///
/// Fails with [`Error::Caustic`] if `g` comes within [`CAUSTIC_TOL`] of zero
/// anywhere on the arc.
pub fn continued_sqrt<G>(g: G, tau: Complex64) -> Result<Complex64>
where
    G: Fn(Complex64) -> Complex64,
{
    let radius = tau.norm();
    let phase = tau.arg();
    let check = |v: Complex64| {
        if v.norm() < CAUSTIC_TOL || !v.norm().is_finite() {
            Err(Error::Caustic { distance: v.norm() })
        } else {
            Ok(v)
        }
    };
    let end = check(g(tau))?;
    let mut root = check(g(Complex64::new(radius, 0.0)))?.sqrt();
    if phase == 0.0 {
        return Ok(root);
    }
    let steps = (phase.abs() / ARC_STEP).ceil().max(1.0) as usize;
    for k in 1..=steps {
        let z = if k == steps {
            tau
        } else {
            Complex64::from_polar(radius, phase * k as f64 / steps as f64)
        };
        let v = if k == steps { end } else { check(g(z))? };
        let candidate = v.sqrt();
        root = if (candidate - root).norm() <= (candidate + root).norm() {
            candidate
        } else {
            -candidate
        };
    }
    Ok(root)
}

/// `e^z - 1` without cancellation for small `|z|`.
pub fn exp_m1(z: Complex64) -> Complex64 {
    if z.norm() < 0.5 {
        let mut term = z;
        let mut sum = z;
        for k in 2..40 {
            term = term * z / k as f64;
            sum += term;
            if term.norm() <= 1e-17 * sum.norm() {
                break;
            }
        }
        sum
    } else {
        z.exp() - 1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wick_time_is_imaginary() {
        let t = ComplexTime::wick(0.7);
        assert_eq!(t.value(), Complex64::new(0.0, 0.7));
        assert_eq!(t.as_real(), None);
        assert_eq!(ComplexTime::real(2.0).as_real(), Some(2.0));
    }

    #[test]
    fn continuation_matches_principal_branch_in_right_half_plane() {
        let g = |z: Complex64| 1.0 - (-2.0 * z).exp();
        for &t in &[0.1, 0.5, 1.0, 1.5] {
            let tau = Complex64::new(0.3, t);
            let c = continued_sqrt(g, tau).unwrap();
            assert!((c - g(tau).sqrt()).norm() < 1e-14);
        }
    }

    #[test]
    fn continuation_tracks_past_the_principal_cut() {
        // sqrt(e^{2iθ}) continued from θ = 0 is e^{iθ}, not the principal root.
        let g = |z: Complex64| z * z;
        let tau = Complex64::from_polar(1.0, 3.0);
        let c = continued_sqrt(g, tau).unwrap();
        assert!((c - tau).norm() < 1e-12);
        assert!((c + g(tau).sqrt()).norm() < 1e-12);
    }

    #[test]
    fn caustic_is_rejected() {
        let g = |z: Complex64| 1.0 - (-2.0 * z).exp();
        let tau = Complex64::new(0.0, std::f64::consts::PI);
        assert!(matches!(continued_sqrt(g, tau), Err(Error::Caustic { .. })));
    }

    #[test]
    fn exp_m1_small_arguments() {
        let z = Complex64::new(1e-12, -3e-12);
        assert!((exp_m1(z) - z - z * z / 2.0).norm() < 1e-27);
        let w = Complex64::new(0.2, 0.3);
        assert!((exp_m1(w) - (w.exp() - 1.0)).norm() < 1e-15);
    }
}
