//! The stationary Gauss-Markov fluctuation process of a single extensive
//! variable (an Ornstein-Uhlenbeck process).
//!
//! With `s = -S''(0)`, resistance `r` and relaxation rate `γ = s / r`, the
//! transition density over an interval `Δτ` is Gaussian with mean
//! `e^{-γΔτ} y₁` and variance `k_B (1 - e^{-2γΔτ}) / s`, normalized in `y₂`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{require_finite, require_positive, Error, Result};
use crate::quadrature::GaussKronrod;
use crate::rng::stream_rng;
use crate::time::{continued_sqrt, exp_m1, ComplexTime};

/// Half-width, in standard deviations, of the quadrature window.
pub const QUADRATURE_WINDOW: f64 = 10.0;

/// Parameters of the process; `gamma` is derived as `s / r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OUSpec", into = "OUSpec")]
pub struct OUParams {
    s: f64,
    r: f64,
    k_b: f64,
    gamma: f64,
}

/// Serialized form of [`OUParams`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OUSpec {
    pub s: f64,
    pub r: f64,
    #[serde(default = "one")]
    pub k_b: f64,
}

fn one() -> f64 {
    1.0
}

impl TryFrom<OUSpec> for OUParams {
    type Error = Error;
    fn try_from(spec: OUSpec) -> Result<Self> {
        OUParams::new(spec.s, spec.r, spec.k_b)
    }
}

impl From<OUParams> for OUSpec {
    fn from(p: OUParams) -> Self {
        OUSpec {
            s: p.s,
            r: p.r,
            k_b: p.k_b,
        }
    }
}

impl OUParams {
    pub fn new(s: f64, r: f64, k_b: f64) -> Result<Self> {
        let s = require_positive("s", s)?;
        let r = require_positive("r", r)?;
        let k_b = require_positive("k_b", k_b)?;
        Ok(Self {
            s,
            r,
            k_b,
            gamma: s / r,
        })
    }

    /// Parameters with a prescribed relaxation rate, `s = γ r`.
    pub fn with_gamma(gamma: f64, r: f64, k_b: f64) -> Result<Self> {
        let gamma = require_positive("gamma", gamma)?;
        Self::new(gamma * r, r, k_b)
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn k_b(&self) -> f64 {
        self.k_b
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn stationary_variance(&self) -> f64 {
        self.k_b / self.s
    }

    /// Boltzmann density `sqrt(s / 2πk_B) exp(-s y² / 2k_B)`.
    pub fn stationary_density(&self, y: f64) -> f64 {
        (self.s / (2.0 * PI * self.k_b)).sqrt() * (-self.s * y * y / (2.0 * self.k_b)).exp()
    }

    /// Conditional mean factor `e^{-γΔτ}`.
    pub fn decay(&self, dtau: f64) -> f64 {
        (-self.gamma * dtau).exp()
    }

    /// Conditional variance `k_B (1 - e^{-2γΔτ}) / s`.
    pub fn transition_variance(&self, dtau: f64) -> f64 {
        -(-2.0 * self.gamma * dtau).exp_m1() * self.k_b / self.s
    }

    /// Conditional density of `y2` at `τ + dtau` given `y1` at `τ`.
    pub fn transition_density(&self, y1: f64, y2: f64, dtau: f64) -> Result<f64> {
        check_interval(dtau)?;
        let mean = self.decay(dtau) * y1;
        let var = self.transition_variance(dtau);
        let d = y2 - mean;
        Ok((-d * d / (2.0 * var)).exp() / (2.0 * PI * var).sqrt())
    }

    /// `1 - e^{-2γΔτ}` for a possibly complex interval.
    fn memory_gap(&self, dtau: Complex64) -> Complex64 {
        -exp_m1(-2.0 * self.gamma * dtau)
    }

    /// Normalization `sqrt(s / (2πk_B (1 - e^{-2γΔτ})))`, with the square root
    /// continued from the positive real axis.
    pub fn transition_prefactor(&self, dtau: ComplexTime) -> Result<Complex64> {
        let tau = nonzero(dtau)?;
        if let Some(real) = dtau.as_real() {
            check_interval(real)?;
        }
        let root = continued_sqrt(|z| self.memory_gap(z), tau)?;
        Ok((self.s / (2.0 * PI * self.k_b)).sqrt() / root)
    }

    /// Gaussian exponent `-(s / 2k_B) (y₂ - e^{-γΔτ} y₁)² / (1 - e^{-2γΔτ})`.
    pub fn transition_exponent(&self, y1: f64, y2: f64, dtau: ComplexTime) -> Result<Complex64> {
        let tau = nonzero(dtau)?;
        let gap = self.memory_gap(tau);
        if gap.norm() < crate::time::CAUSTIC_TOL {
            return Err(Error::Caustic {
                distance: gap.norm(),
            });
        }
        let d = y2 - (-self.gamma * tau).exp() * y1;
        Ok(-(self.s / (2.0 * self.k_b)) * d * d / gap)
    }

    /// The transition density analytically continued to complex `dtau`.
    pub fn transition_density_continued(
        &self,
        y1: f64,
        y2: f64,
        dtau: ComplexTime,
    ) -> Result<Complex64> {
        Ok(self.transition_prefactor(dtau)? * self.transition_exponent(y1, y2, dtau)?.exp())
    }

    /// Density of the gate values `y_k` at times `τ_k`, as the product of
    /// transition densities times the stationary density of the first gate.
    pub fn joint_density(&self, gates: &GateSequence) -> Result<f64> {
        let mut density = self.stationary_density(gates.values[0]);
        for k in 1..gates.len() {
            density *= self.transition_density(
                gates.values[k - 1],
                gates.values[k],
                gates.times[k] - gates.times[k - 1],
            )?;
        }
        Ok(density)
    }

    /// The same joint density evaluated as a zero-mean multivariate Gaussian
    /// with covariance `(k_B / s) e^{-γ|τ_i - τ_j|}`.
    pub fn joint_density_from_covariance(&self, gates: &GateSequence) -> Result<f64> {
        let n = gates.len();
        let cov = DMatrix::from_fn(n, n, |i, j| {
            self.stationary_variance() * (-self.gamma * (gates.times[i] - gates.times[j]).abs()).exp()
        });
        let chol = cov.cholesky().ok_or_else(|| {
            Error::Range("gate covariance is numerically singular".into())
        })?;
        let y = DVector::from_column_slice(&gates.values);
        let quad = y.dot(&chol.solve(&y));
        let log_det = chol.l().diagonal().iter().map(|d| 2.0 * d.ln()).sum::<f64>();
        Ok((-0.5 * quad - 0.5 * log_det - 0.5 * n as f64 * (2.0 * PI).ln()).exp())
    }

    /// Exact one-step update of a state over `dtau`.
    pub fn step(&self, y: f64, dtau: f64, noise: f64) -> f64 {
        self.decay(dtau) * y + noise * self.transition_variance(dtau).sqrt()
    }
}

/// The `γ → 0` limit taken as `s → 0` at fixed resistance: a Wiener process
/// with diffusion constant `k_B / r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WienerParams {
    pub r: f64,
    pub k_b: f64,
}

impl WienerParams {
    pub fn new(r: f64, k_b: f64) -> Result<Self> {
        Ok(Self {
            r: require_positive("r", r)?,
            k_b: require_positive("k_b", k_b)?,
        })
    }

    pub fn diffusion(&self) -> f64 {
        self.k_b / self.r
    }

    /// `sqrt(r / 4πk_BΔτ) exp(-r (y₂ - y₁)² / 4k_BΔτ)`, continued to complex `Δτ`.
    pub fn kernel(&self, y1: f64, y2: f64, dtau: ComplexTime) -> Result<Complex64> {
        let tau = nonzero(dtau)?;
        if let Some(real) = dtau.as_real() {
            check_interval(real)?;
        }
        let c = self.r / (4.0 * self.k_b);
        let root = continued_sqrt(|z| z, tau)?;
        let d = y2 - y1;
        Ok((c / PI).sqrt() / root * (-c * d * d / tau).exp())
    }

    pub fn kernel_real(&self, y1: f64, y2: f64, dtau: f64) -> Result<f64> {
        check_interval(dtau)?;
        let var = 2.0 * self.diffusion() * dtau;
        let d = y2 - y1;
        Ok((-d * d / (2.0 * var)).exp() / (2.0 * PI * var).sqrt())
    }
}

fn check_interval(dtau: f64) -> Result<()> {
    if dtau == 0.0 {
        Err(Error::ZeroTime)
    } else if !(dtau.is_finite() && dtau > 0.0) {
        Err(Error::InvalidParameter {
            name: "dtau",
            value: dtau,
            reason: "real time intervals must be finite and positive",
        })
    } else {
        Ok(())
    }
}

fn nonzero(dtau: ComplexTime) -> Result<Complex64> {
    let tau = dtau.value();
    if tau.norm() == 0.0 {
        Err(Error::ZeroTime)
    } else if !(tau.re.is_finite() && tau.im.is_finite()) {
        Err(Error::InvalidParameter {
            name: "dtau",
            value: tau.norm(),
            reason: "must be finite",
        })
    } else {
        Ok(tau)
    }
}

fn check_increasing(times: &[f64]) -> Result<()> {
    for (k, t) in times.iter().enumerate() {
        require_finite("time", *t)?;
        if k > 0 && *t <= times[k - 1] {
            return Err(Error::NonMonotoneTimes { index: k });
        }
    }
    Ok(())
}

/// Barrier (or gate) positions `y_k` at strictly increasing times `τ_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateSequence {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl GateSequence {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        if times.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: times.len(),
                found: values.len(),
            });
        }
        check_increasing(&times)?;
        for v in &values {
            require_finite("gate value", *v)?;
        }
        Ok(Self { times, values })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// All times moved by `delta`.
    pub fn shifted(&self, delta: f64) -> Self {
        Self {
            times: self.times.iter().map(|t| t + delta).collect(),
            values: self.values.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialCondition {
    Fixed(f64),
    Stationary,
}

/// A sampled trajectory and the `(seed, stream)` pair that reproduces it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub seed: u64,
    pub stream: u64,
}

impl OUParams {
    /// Samples one trajectory on `times` with the exact transition law, using
    /// RNG stream 0 of `seed`.
    pub fn sample_path(&self, initial: InitialCondition, times: &[f64], seed: u64) -> Result<PathSample> {
        self.sample_stream(initial, times, seed, 0)
    }

    /// Samples the trajectory driven by stream `stream` of `seed`.
    pub fn sample_stream(
        &self,
        initial: InitialCondition,
        times: &[f64],
        seed: u64,
        stream: u64,
    ) -> Result<PathSample> {
        if times.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        check_increasing(times)?;
        let mut rng = stream_rng(seed, stream);
        let mut y = match initial {
            InitialCondition::Fixed(y0) => require_finite("y0", y0)?,
            InitialCondition::Stationary => {
                let xi: f64 = StandardNormal.sample(&mut rng);
                xi * self.stationary_variance().sqrt()
            }
        };
        let mut values = Vec::with_capacity(times.len());
        values.push(y);
        for w in times.windows(2) {
            let xi: f64 = StandardNormal.sample(&mut rng);
            y = self.step(y, w[1] - w[0], xi);
            values.push(y);
        }
        Ok(PathSample {
            times: times.to_vec(),
            values,
            seed,
            stream,
        })
    }

    /// `n_paths` independent trajectories; path `k` uses stream `k`, so the
    /// ensemble does not depend on how the work is scheduled.
    pub fn sample_ensemble(
        &self,
        initial: InitialCondition,
        times: &[f64],
        n_paths: usize,
        seed: u64,
    ) -> Result<Vec<PathSample>> {
        (0..n_paths as u64)
            .into_par_iter()
            .map(|k| self.sample_stream(initial, times, seed, k))
            .collect()
    }
}

/// Monte Carlo estimate of a cumulative gate probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CumulativeEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub n_samples: usize,
    pub seed: u64,
}

const CHUNK: usize = 1024;

impl OUParams {
    /// Estimates `P(y(τ_k) ≤ y_k for all k)`.
    ///
    /// Each sample starts from the stationary law at `min(0, τ₁)` and is
    /// propagated exactly through the gate times.
    pub fn estimate_cumulative(
        &self,
        gates: &GateSequence,
        n_samples: usize,
        seed: u64,
    ) -> Result<CumulativeEstimate> {
        if n_samples < 1000 {
            return Err(Error::InvalidParameter {
                name: "n_samples",
                value: n_samples as f64,
                reason: "at least 1000 samples are required",
            });
        }
        let origin = gates.times[0].min(0.0);
        let n_chunks = n_samples.div_ceil(CHUNK);
        let hits: usize = (0..n_chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = stream_rng(seed, c as u64);
                let count = CHUNK.min(n_samples - c * CHUNK);
                let mut hits = 0;
                for _ in 0..count {
                    let xi: f64 = StandardNormal.sample(&mut rng);
                    let mut y = xi * self.stationary_variance().sqrt();
                    let mut t = origin;
                    let mut inside = true;
                    for (&tk, &bk) in gates.times.iter().zip(&gates.values) {
                        if tk > t {
                            let xi: f64 = StandardNormal.sample(&mut rng);
                            y = self.step(y, tk - t, xi);
                            t = tk;
                        }
                        inside &= y <= bk;
                    }
                    hits += usize::from(inside);
                }
                hits
            })
            .sum();
        let p = hits as f64 / n_samples as f64;
        Ok(CumulativeEstimate {
            estimate: p,
            stderr: (p * (1.0 - p) / n_samples as f64).sqrt(),
            n_samples,
            seed,
        })
    }
}

/// Result of a Chapman-Kolmogorov composition test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarkovReport {
    pub residual: f64,
    pub tol: f64,
    pub passed: bool,
    pub points: usize,
}

/// `|∫ f₂(y₃ | y₂) f₁(y₂ | y₁) dy₂ - f₃(y₃ | y₁)|`, where the first leg spans
/// `gap1`, the second `gap2`, and the direct kernel `gap1 + gap2`.
///
/// The three kernels may carry different parameters so that deliberately
/// mismatched compositions can be checked.
#[allow(clippy::too_many_arguments)]
pub fn chapman_kolmogorov_residual(
    first: &OUParams,
    second: &OUParams,
    direct: &OUParams,
    y1: f64,
    y3: f64,
    gap1: f64,
    gap2: f64,
    quadrature: &GaussKronrod,
) -> Result<f64> {
    check_interval(gap1)?;
    check_interval(gap2)?;
    let mean = first.decay(gap1) * y1;
    let sd = first.transition_variance(gap1).sqrt();
    let composed = quadrature.integrate(
        |y2| {
            second.transition_density(y2, y3, gap2).unwrap_or(f64::NAN)
                * first.transition_density(y1, y2, gap1).unwrap_or(f64::NAN)
        },
        mean - QUADRATURE_WINDOW * sd,
        mean + QUADRATURE_WINDOW * sd,
    )?;
    Ok((composed.value - direct.transition_density(y1, y3, gap1 + gap2)?).abs())
}

impl OUParams {
    /// Chapman-Kolmogorov check of the Markov property on every consecutive
    /// triple of gate times. For each triple the conditioning value is the
    /// first gate and the target runs over the third gate plus a 7-point grid
    /// spanning ±3 standard deviations of the direct kernel.
    pub fn markov_check(&self, gates: &GateSequence, tol: f64) -> Result<MarkovReport> {
        self.markov_check_with(self, gates, tol, &GaussKronrod::default())
    }

    /// As [`markov_check`](Self::markov_check), but the first leg of each
    /// composition uses `first_leg` parameters.
    pub fn markov_check_with(
        &self,
        first_leg: &OUParams,
        gates: &GateSequence,
        tol: f64,
        quadrature: &GaussKronrod,
    ) -> Result<MarkovReport> {
        if gates.len() < 3 {
            return Err(Error::InvalidParameter {
                name: "gates",
                value: gates.len() as f64,
                reason: "three or more times are required",
            });
        }
        let mut residual: f64 = 0.0;
        let mut points = 0;
        for k in 0..gates.len() - 2 {
            let (t1, t2, t3) = (gates.times[k], gates.times[k + 1], gates.times[k + 2]);
            let y1 = gates.values[k];
            let mean = self.decay(t3 - t1) * y1;
            let sd = self.transition_variance(t3 - t1).sqrt();
            let targets = std::iter::once(gates.values[k + 2])
                .chain((-3..=3).map(|j| mean + j as f64 * sd));
            for y3 in targets {
                let r = chapman_kolmogorov_residual(first_leg, self, self, y1, y3, t2 - t1, t3 - t2, quadrature)?;
                residual = residual.max(r);
                points += 1;
            }
        }
        Ok(MarkovReport {
            residual,
            tol,
            passed: residual <= tol,
            points,
        })
    }
}
