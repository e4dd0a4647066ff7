//! Onsager-Machlup path integral for the one-variable process.
//!
//! The Lagrangian is `L = (r/2)(ẏ² + γ²y²)` (entropy per unit time) and paths
//! are weighted by `exp(-(1/2k_B) ∫ L dτ)`. On a uniform grid of `n` slices the
//! action becomes a symmetric tridiagonal quadratic form in the interior
//! points, so the sliced path integral is a Gaussian integral evaluated in
//! closed form from the pivots of that form.
//!
//! Two factors fix the path measure. Each slice carries
//! `sqrt(r / 4πk_BΔτ) · (1 + γΔτ/2)`, and the endpoints carry
//! `exp(-(s/4k_B)(y₂² - y₁²))`, the integrated total derivative `γ r y ẏ`
//! that the Lagrangian above omits. With both, every slice is a normalized
//! Gaussian kernel whose stationary law is exactly the Boltzmann density, the
//! free case (`γ = 0`) is exact at any `n`, and the result converges to the
//! transition density at second order in `Δτ`.

use std::f64::consts::PI;
use std::ops::Neg;

use num_complex::Complex64;
use num_traits::Num;
use serde::{Deserialize, Serialize};

use crate::error::{require_finite, require_positive, Error, Result};
use crate::ou::{OUParams, WienerParams};
use crate::time::{ComplexTime, CAUSTIC_TOL};

/// Largest log-magnitude accepted before a kernel value is reported as out of range.
const MAX_LOG: f64 = 700.0;

/// Parameters of the thermodynamic Lagrangian. Unlike [`OUParams`] the
/// relaxation rate may vanish, which gives the free (Wiener) limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermoLagrangian {
    pub r: f64,
    pub k_b: f64,
    pub gamma: f64,
}

impl From<&OUParams> for ThermoLagrangian {
    fn from(p: &OUParams) -> Self {
        Self {
            r: p.r(),
            k_b: p.k_b(),
            gamma: p.gamma(),
        }
    }
}

impl From<&WienerParams> for ThermoLagrangian {
    fn from(w: &WienerParams) -> Self {
        Self {
            r: w.r,
            k_b: w.k_b,
            gamma: 0.0,
        }
    }
}

impl ThermoLagrangian {
    pub fn new(r: f64, k_b: f64, gamma: f64) -> Result<Self> {
        let r = require_positive("r", r)?;
        let k_b = require_positive("k_b", k_b)?;
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "gamma",
                value: gamma,
                reason: "must be finite and non-negative",
            });
        }
        Ok(Self { r, k_b, gamma })
    }

    pub fn free(r: f64, k_b: f64) -> Result<Self> {
        Self::new(r, k_b, 0.0)
    }

    /// `s = γ r`.
    pub fn s(&self) -> f64 {
        self.gamma * self.r
    }

    /// `(r/2)(ẏ² + γ²y²)`.
    pub fn value(&self, y: f64, ydot: f64) -> f64 {
        0.5 * self.r * (ydot * ydot + self.gamma * self.gamma * y * y)
    }

    /// The discretized action `(1/2k_B) Σ Δτ L` as a quadratic chain.
    pub fn chain(&self) -> QuadraticChain {
        let kinetic = self.r / (4.0 * self.k_b);
        QuadraticChain {
            kinetic,
            potential: kinetic * self.gamma * self.gamma,
        }
    }

    /// The exact conditional density this Lagrangian generates: the process
    /// transition density for `γ > 0`, the Wiener kernel for `γ = 0`.
    pub fn exact_kernel(&self, y1: f64, y2: f64, dtau: f64) -> Result<f64> {
        if self.gamma > 0.0 {
            OUParams::new(self.s(), self.r, self.k_b)?.transition_density(y1, y2, dtau)
        } else {
            WienerParams::new(self.r, self.k_b)?.kernel_real(y1, y2, dtau)
        }
    }

    /// `(1/2k_B) ∫ L dτ` along the continuum extremal path from `y1` to `y2`,
    /// `ÿ = γ² y`, for a possibly complex interval.
    pub fn extremal_action(&self, y1: f64, y2: f64, dtau: ComplexTime) -> Result<Complex64> {
        let tau = dtau.value();
        if tau.norm() == 0.0 {
            return Err(Error::ZeroTime);
        }
        let kinetic = self.r / (4.0 * self.k_b);
        if self.gamma == 0.0 {
            return Ok(kinetic * (y2 - y1) * (y2 - y1) / tau);
        }
        let gt = self.gamma * tau;
        let sinh = gt.sinh();
        if sinh.norm() < CAUSTIC_TOL {
            return Err(Error::Caustic {
                distance: sinh.norm(),
            });
        }
        Ok(kinetic * self.gamma * ((y1 * y1 + y2 * y2) * gt.cosh() - 2.0 * y1 * y2) / sinh)
    }
}

/// Scalars the chain algebra runs over: real time slices and continued ones.
pub trait ChainScalar: Num + Copy + Neg<Output = Self> + From<f64> {}
impl<T: Num + Copy + Neg<Output = T> + From<f64>> ChainScalar for T {}

/// Discrete quadratic action on a uniform grid with step `h`:
/// `Σ_k [kinetic (z_{k+1} - z_k)² / h + potential h ((z_k + z_{k+1}) / 2)²]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticChain {
    pub kinetic: f64,
    pub potential: f64,
}

/// Stationary point of a [`QuadraticChain`] with fixed endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryPath<T> {
    pub interior: Vec<T>,
    pub action: T,
    /// Pivots of the interior Hessian, whose product is its determinant.
    pub pivots: Vec<T>,
}

impl QuadraticChain {
    /// Per-slice coefficients: slice action `a (z² + z'²) + 2 b z z'`.
    fn slice_coefficients<T: ChainScalar>(&self, h: T) -> (T, T) {
        let k = T::from(self.kinetic) / h;
        let v = T::from(0.25 * self.potential) * h;
        (k + v, v - k)
    }

    pub fn action<T: ChainScalar>(&self, z: &[T], h: T) -> T {
        // difference form; the expanded a(z² + z'²) + 2bzz' cancels badly for small h
        let k = T::from(self.kinetic) / h;
        let v = T::from(self.potential) * h;
        let half = T::from(0.5);
        z.windows(2).fold(T::zero(), |acc, w| {
            let d = w[1] - w[0];
            let mid = half * (w[0] + w[1]);
            acc + k * d * d + v * mid * mid
        })
    }

    /// Solves `∂A/∂z_k = 0` for the interior points by the Thomas algorithm.
    pub fn stationary_path<T: ChainScalar>(
        &self,
        y1: f64,
        y2: f64,
        h: T,
        n_slices: usize,
    ) -> Result<StationaryPath<T>> {
        if n_slices == 0 {
            return Err(Error::InvalidParameter {
                name: "n_slices",
                value: 0.0,
                reason: "at least one slice is required",
            });
        }
        let (a, b) = self.slice_coefficients(h);
        let two = T::from(2.0);
        let m = n_slices - 1;
        // Hessian of the action in the interior points: 4a on the diagonal,
        // 2b off it; right-hand side collects the endpoint couplings.
        let diag = two * two * a;
        let off = two * b;
        let mut pivots = Vec::with_capacity(m);
        let mut rhs = vec![T::zero(); m];
        if m > 0 {
            rhs[0] = rhs[0] - off * T::from(y1);
            rhs[m - 1] = rhs[m - 1] - off * T::from(y2);
        }
        let mut c_prime = Vec::with_capacity(m);
        let mut d_prime = Vec::with_capacity(m);
        for k in 0..m {
            let pivot = if k == 0 {
                diag
            } else {
                diag - off * c_prime[k - 1]
            };
            if pivot == T::zero() {
                return Err(Error::MinimizerNonConvergence(format!(
                    "zero pivot at interior point {k}"
                )));
            }
            let d = if k == 0 {
                rhs[0] / pivot
            } else {
                (rhs[k] - off * d_prime[k - 1]) / pivot
            };
            pivots.push(pivot);
            c_prime.push(off / pivot);
            d_prime.push(d);
        }
        let mut interior = vec![T::zero(); m];
        for k in (0..m).rev() {
            interior[k] = if k + 1 == m {
                d_prime[k]
            } else {
                d_prime[k] - c_prime[k] * interior[k + 1]
            };
        }
        let mut full = Vec::with_capacity(n_slices + 1);
        full.push(T::from(y1));
        full.extend_from_slice(&interior);
        full.push(T::from(y2));
        let action = self.action(&full, h);
        Ok(StationaryPath {
            interior,
            action,
            pivots,
        })
    }
}

/// A discretized path between fixed endpoints on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretePath {
    pub y_start: f64,
    pub y_end: f64,
    pub dtau: f64,
    pub interior: Vec<f64>,
}

impl DiscretePath {
    pub fn new(y_start: f64, y_end: f64, dtau: f64, interior: Vec<f64>) -> Result<Self> {
        require_finite("y_start", y_start)?;
        require_finite("y_end", y_end)?;
        require_positive("dtau", dtau)?;
        for v in &interior {
            require_finite("interior value", *v)?;
        }
        Ok(Self {
            y_start,
            y_end,
            dtau,
            interior,
        })
    }

    /// The straight line between the endpoints, sampled at `n_slices + 1` points.
    pub fn straight(y_start: f64, y_end: f64, dtau: f64, n_slices: usize) -> Result<Self> {
        if n_slices == 0 {
            return Err(Error::InvalidParameter {
                name: "n_slices",
                value: 0.0,
                reason: "at least one slice is required",
            });
        }
        let interior = (1..n_slices)
            .map(|k| y_start + (y_end - y_start) * k as f64 / n_slices as f64)
            .collect();
        Self::new(y_start, y_end, dtau, interior)
    }

    pub fn n_slices(&self) -> usize {
        self.interior.len() + 1
    }

    pub fn step(&self) -> f64 {
        self.dtau / self.n_slices() as f64
    }

    pub fn points(&self) -> Vec<f64> {
        let mut z = Vec::with_capacity(self.interior.len() + 2);
        z.push(self.y_start);
        z.extend_from_slice(&self.interior);
        z.push(self.y_end);
        z
    }
}

impl ThermoLagrangian {
    /// `(1/2k_B) Σ Δτ (r/2)[((y_{k+1} - y_k)/Δτ)² + γ² ((y_k + y_{k+1})/2)²]`.
    pub fn discrete_action(&self, path: &DiscretePath) -> f64 {
        self.chain().action(&path.points(), path.step())
    }

    /// The path minimizing [`discrete_action`](Self::discrete_action).
    pub fn discrete_minimizer(&self, y1: f64, y2: f64, dtau: f64, n_slices: usize) -> Result<DiscretePath> {
        require_positive("dtau", dtau)?;
        let h = dtau / n_slices.max(1) as f64;
        let sp = self.chain().stationary_path(y1, y2, h, n_slices)?;
        DiscretePath::new(y1, y2, dtau, sp.interior)
    }

    /// The stationary discrete action continued to a complex interval.
    pub fn continued_discrete_action(
        &self,
        y1: f64,
        y2: f64,
        dtau: ComplexTime,
        n_slices: usize,
    ) -> Result<Complex64> {
        let tau = dtau.value();
        if tau.norm() == 0.0 {
            return Err(Error::ZeroTime);
        }
        let h = tau / n_slices.max(1) as f64;
        Ok(self.chain().stationary_path(y1, y2, h, n_slices)?.action)
    }

    /// Time-sliced evaluation of the path integral from `y1` to `y2` over
    /// `dtau` with `n_slices` slices.
    pub fn kernel_by_slicing(&self, y1: f64, y2: f64, dtau: f64, n_slices: usize) -> Result<f64> {
        if dtau == 0.0 {
            return Err(Error::ZeroTime);
        }
        require_positive("dtau", dtau)?;
        require_finite("y1", y1)?;
        require_finite("y2", y2)?;
        let n = n_slices as f64;
        let h = dtau / n;
        let chain = self.chain();
        let path = chain.stationary_path(y1, y2, h, n_slices)?;
        let mut log_det = 0.0;
        for p in &path.pivots {
            if p.is_nan() || *p <= 0.0 {
                return Err(Error::Range(format!("non-positive Hessian pivot {p:e}")));
            }
            log_det += p.ln();
        }
        let slice_norm = 0.5 * (chain.kinetic / (PI * h)).ln() + (0.5 * self.gamma * h).ln_1p();
        let boundary = -chain.kinetic * self.gamma * (y2 * y2 - y1 * y1);
        let log_kernel = n * slice_norm + boundary + 0.5 * (n - 1.0) * (2.0 * PI).ln()
            - 0.5 * log_det
            - path.action;
        if !log_kernel.is_finite() || log_kernel > MAX_LOG {
            return Err(Error::Range(format!(
                "sliced kernel log-magnitude {log_kernel:e} at gamma*dtau = {:e}",
                self.gamma * dtau
            )));
        }
        Ok(log_kernel.exp())
    }

    /// One row per slice count: sliced value, exact kernel, relative error.
    pub fn convergence_table(
        &self,
        y1: f64,
        y2: f64,
        dtau: f64,
        n_slices: &[usize],
    ) -> Result<Vec<ConvergenceRow>> {
        let reference = self.exact_kernel(y1, y2, dtau)?;
        n_slices
            .iter()
            .map(|&n| {
                let value = self.kernel_by_slicing(y1, y2, dtau, n)?;
                Ok(ConvergenceRow {
                    n_slices: n,
                    value,
                    reference,
                    rel_error: ((value - reference) / reference).abs(),
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n_slices: usize,
    pub value: f64,
    pub reference: f64,
    pub rel_error: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lag(r: f64, k_b: f64, gamma: f64) -> ThermoLagrangian {
        ThermoLagrangian::new(r, k_b, gamma).unwrap()
    }

    #[test]
    fn lagrangian_values() {
        let l = lag(2.0, 1.0, 3.0);
        assert_eq!(l.value(0.0, 0.0), 0.0);
        assert_eq!(l.value(1.0, 1.0), 10.0);
        assert!((l.value(2.5, 2.5) - 2.5 * 2.5 * 10.0).abs() < 1e-12);
    }

    #[test]
    fn zero_path_has_zero_action() {
        let l = lag(1.3, 0.7, 2.0);
        let p = DiscretePath::straight(0.0, 0.0, 1.0, 16).unwrap();
        assert_eq!(l.discrete_action(&p), 0.0);
    }

    #[test]
    fn free_straight_line_action_is_exact() {
        let l = lag(1.7, 0.6, 0.0);
        let (y1, y2, t) = (-0.4, 1.1, 0.8);
        let exact = l.r * (y2 - y1) * (y2 - y1) / (4.0 * l.k_b * t);
        for n in [1, 2, 7, 64] {
            let p = DiscretePath::straight(y1, y2, t, n).unwrap();
            assert!((l.discrete_action(&p) - exact).abs() < 1e-13 * exact.max(1.0));
        }
    }

    #[test]
    fn minimizer_is_a_minimum() {
        let l = lag(1.0, 1.0, 1.5);
        let best = l.discrete_minimizer(0.3, -0.8, 1.2, 24).unwrap();
        let a0 = l.discrete_action(&best);
        let mut state = 12345u64;
        for _ in 0..50 {
            let mut p = best.clone();
            for v in p.interior.iter_mut() {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                *v += if state >> 63 == 0 { 1e-3 } else { -1e-3 };
            }
            assert!(l.discrete_action(&p) > a0);
        }
    }

    #[test]
    fn single_slice_has_no_interior() {
        let l = lag(1.0, 1.0, 1.0);
        let sp = l.chain().stationary_path(0.2, 0.9, 0.5, 1).unwrap();
        assert!(sp.interior.is_empty() && sp.pivots.is_empty());
        let p = DiscretePath::new(0.2, 0.9, 0.5, vec![]).unwrap();
        assert!((sp.action - l.discrete_action(&p)).abs() < 1e-15);
    }

    #[test]
    fn free_slicing_reproduces_wiener_kernel() {
        let l = lag(2.0, 0.5, 0.0);
        for n in [1, 2, 3, 10, 100] {
            let k = l.kernel_by_slicing(0.3, -0.4, 0.7, n).unwrap();
            let w = l.exact_kernel(0.3, -0.4, 0.7).unwrap();
            assert!((k - w).abs() / w < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn slicing_errors() {
        let l = lag(1.0, 1.0, 1.0);
        assert_eq!(l.kernel_by_slicing(0.0, 0.0, 0.0, 4), Err(Error::ZeroTime));
        assert!(l.kernel_by_slicing(0.0, 0.0, 1.0, 0).is_err());
        let extreme = lag(1.0, 1.0, 1e300);
        assert!(matches!(
            extreme.kernel_by_slicing(0.5, 0.2, 1e10, 4),
            Err(Error::Range(_))
        ));
    }

    #[test]
    fn extremal_action_free_and_harmonic() {
        let free = lag(2.0, 1.0, 0.0);
        let a = free.extremal_action(0.0, 1.0, ComplexTime::real(2.0)).unwrap();
        assert!((a.re - 0.25).abs() < 1e-15);
        let l = lag(1.0, 1.0, 1e-7);
        let b = l.extremal_action(0.0, 1.0, ComplexTime::real(2.0)).unwrap();
        assert!((b.re - 0.125).abs() < 1e-10);
    }
}
