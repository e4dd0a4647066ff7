//! Adaptive Gauss-Kronrod quadrature for real and complex integrands, and
//! contour-rotated integration of oscillatory Gaussian-type integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

// 15-point Kronrod abscissae; odd indices are the 7-point Gauss nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Values that can be accumulated by the quadrature rules.
pub trait QuadValue:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn zero() -> Self;
    fn magnitude(self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Integral<T> {
    pub value: T,
    pub error: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

// Max-heap ordering on the error estimate.
struct ByError<T>(Segment<T>);

impl<T> PartialEq for ByError<T> {
    fn eq(&self, other: &Self) -> bool {
        self.0.error.total_cmp(&other.0.error) == Ordering::Equal
    }
}
impl<T> Eq for ByError<T> {}
impl<T> PartialOrd for ByError<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for ByError<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.error.total_cmp(&other.0.error)
    }
}

/// Globally adaptive 7/15-point Gauss-Kronrod integrator.
///
/// The interval with the largest error estimate is bisected until the summed
/// estimate drops below `max(abs_tol, rel_tol * |I|)`.
#[derive(Debug, Clone, Copy)]
pub struct GaussKronrod {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for GaussKronrod {
    fn default() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-12,
            max_intervals: 20_000,
        }
    }
}

impl GaussKronrod {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }

    pub fn integrate<T, F>(&self, f: F, a: f64, b: f64) -> Result<Integral<T>>
    where
        T: QuadValue,
        F: Fn(f64) -> T,
    {
        self.integrate_partitioned(f, a, b, 1)
    }

    /// Same as [`integrate`](Self::integrate) but starts from `pieces`
    /// equal sub-intervals, which helps with oscillatory integrands.
    pub fn integrate_partitioned<T, F>(
        &self,
        f: F,
        a: f64,
        b: f64,
        pieces: usize,
    ) -> Result<Integral<T>>
    where
        T: QuadValue,
        F: Fn(f64) -> T,
    {
        let pieces = pieces.max(1);
        let width = (b - a) / pieces as f64;
        let mut heap = BinaryHeap::with_capacity(pieces * 2);
        let mut total = T::zero();
        let mut total_err = 0.0;
        for k in 0..pieces {
            let lo = a + width * k as f64;
            let hi = if k + 1 == pieces { b } else { lo + width };
            let seg = kronrod_segment(&f, lo, hi);
            total = total + seg.value;
            total_err += seg.error;
            heap.push(ByError(seg));
        }

        loop {
            let tol = self.abs_tol.max(self.rel_tol * total.magnitude());
            if total_err <= tol {
                break;
            }
            if heap.len() >= self.max_intervals {
                return Err(Error::QuadratureNonConvergence {
                    error: total_err,
                    tolerance: tol,
                });
            }
            let ByError(worst) = heap.pop().expect("heap is never empty");
            let mid = 0.5 * (worst.a + worst.b);
            if mid <= worst.a || mid >= worst.b {
                // interval exhausted at floating-point resolution
                return Err(Error::QuadratureNonConvergence {
                    error: total_err,
                    tolerance: tol,
                });
            }
            let left = kronrod_segment(&f, worst.a, mid);
            let right = kronrod_segment(&f, mid, worst.b);
            total = total - worst.value + left.value + right.value;
            total_err += left.error + right.error - worst.error;
            heap.push(ByError(left));
            heap.push(ByError(right));
        }

        // re-sum to shed the drift of the incremental updates
        let mut value = T::zero();
        let mut error = 0.0;
        for ByError(seg) in heap.iter() {
            value = value + seg.value;
            error += seg.error;
        }
        Ok(Integral {
            value,
            error,
            intervals: heap.len(),
        })
    }
}

fn kronrod_segment<T, F>(f: &F, a: f64, b: f64) -> Segment<T>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_mass = fc.magnitude() * WGK[7];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        let pair = f1 + f2;
        kronrod = kronrod + pair * w;
        abs_mass += (f1.magnitude() + f2.magnitude()) * w;
        if j % 2 == 1 {
            gauss = gauss + pair * WG[j / 2];
        }
    }
    let value = kronrod * half;
    let abs_mass = abs_mass * half.abs();
    let error = ((kronrod - gauss) * half)
        .magnitude()
        .max(50.0 * f64::EPSILON * abs_mass);
    Segment {
        a,
        b,
        value,
        error,
    }
}

/// Integration of an entire function along the real axis by rotating the
/// contour about `center` through a small angle into the half plane where the
/// integrand decays.
///
/// The integral is computed at three angles `θ, 2θ, 3θ` and extrapolated
/// quadratically to `θ → 0`. For entire integrands with Gaussian decay in the
/// swept sector the three values coincide up to quadrature error, and
/// `spread` reports how far apart they are.
#[derive(Debug, Clone, Copy)]
pub struct ContourRotation {
    pub angle: f64,
    pub quadrature: GaussKronrod,
    /// Relative magnitude below which the tails are dropped.
    pub tail_cutoff: f64,
    pub max_half_width: f64,
}

impl Default for ContourRotation {
    fn default() -> Self {
        Self {
            angle: 1e-2,
            quadrature: GaussKronrod::new(1e-13, 1e-11),
            tail_cutoff: 1e-20,
            max_half_width: 1e4,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RotatedIntegral {
    pub value: Complex64,
    pub samples: [Complex64; 3],
    pub angles: [f64; 3],
    pub spread: f64,
}

impl ContourRotation {
    pub fn integrate<F>(&self, f: F, center: f64) -> Result<RotatedIntegral>
    where
        F: Fn(Complex64) -> Complex64,
    {
        let direction = [1.0, -1.0]
            .into_iter()
            .find_map(|sign| {
                let theta = sign * self.angle;
                self.half_width(&f, center, theta)
                    .and_then(|_| self.half_width(&f, center, 3.0 * theta))
                    .map(|_| sign)
            })
            .ok_or_else(|| Error::Range("integrand does not decay along either rotated contour".into()))?;

        let mut samples = [Complex64::new(0.0, 0.0); 3];
        let mut angles = [0.0; 3];
        for (k, slot) in samples.iter_mut().enumerate() {
            let theta = direction * self.angle * (k + 1) as f64;
            angles[k] = theta;
            let half = self
                .half_width(&f, center, theta)
                .ok_or_else(|| Error::Range("rotated integrand does not decay".into()))?;
            let rot = Complex64::from_polar(1.0, theta);
            let pieces = (4.0 * half).ceil() as usize;
            let integral = self.quadrature.integrate_partitioned(
                |u| f(Complex64::new(center, 0.0) + rot * u) * rot,
                -half,
                half,
                pieces,
            )?;
            *slot = integral.value;
        }
        let value = samples[0] * 3.0 - samples[1] * 3.0 + samples[2];
        let spread = (samples[0] - samples[1])
            .norm()
            .max((samples[1] - samples[2]).norm());
        Ok(RotatedIntegral {
            value,
            samples,
            angles,
            spread,
        })
    }

    fn half_width<F>(&self, f: &F, center: f64, theta: f64) -> Option<f64>
    where
        F: Fn(Complex64) -> Complex64,
    {
        let rot = Complex64::from_polar(1.0, theta);
        let at = |u: f64| f(Complex64::new(center, 0.0) + rot * u).norm();
        let mut peak = at(0.0);
        let mut half = 0.5;
        let mut quiet = 0;
        while half <= self.max_half_width {
            let edge = at(half).max(at(-half));
            if !edge.is_finite() {
                return None;
            }
            peak = peak.max(edge);
            if edge <= self.tail_cutoff * peak {
                quiet += 1;
                if quiet == 2 {
                    return Some(half);
                }
            } else {
                quiet = 0;
            }
            half *= 1.25;
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomials_of_degree_22_are_exact_on_one_panel() {
        for k in 0..=22 {
            let seg: Segment<f64> = kronrod_segment(&|x: f64| x.powi(k), -1.0, 1.0);
            let exact = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
            assert!((seg.value - exact).abs() < 1e-14, "degree {k}");
        }
    }

    #[test]
    fn gaussian_integral() {
        let gk = GaussKronrod::default();
        let r = gk.integrate(|x: f64| (-x * x).exp(), -10.0, 10.0).unwrap();
        assert!((r.value - PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn peaked_and_complex_integrands() {
        let gk = GaussKronrod::default();
        let r = gk
            .integrate(|x: f64| 1.0 / (1e-4 + x * x), -1.0, 1.0)
            .unwrap();
        let exact = 2.0 * (1.0 / 1e-2) * (1.0f64 / 1e-2).atan();
        assert!((r.value - exact).abs() / exact < 1e-11);

        let c = gk
            .integrate(|x: f64| Complex64::new(0.0, x).exp(), 0.0, PI)
            .unwrap();
        assert!((c.value - Complex64::new(0.0, 2.0)).norm() < 1e-13);
    }

    #[test]
    fn non_convergence_is_reported() {
        let gk = GaussKronrod {
            abs_tol: 1e-15,
            rel_tol: 0.0,
            max_intervals: 4,
        };
        let err = gk.integrate(|x: f64| (50.0 * x).sin(), 0.0, 10.0).unwrap_err();
        assert!(matches!(err, Error::QuadratureNonConvergence { .. }));
    }

    #[test]
    fn fresnel_gaussian_by_rotation() {
        // ∫ exp(i a x²) dx = sqrt(π/a) e^{iπ/4}
        let a = 1.7;
        let f = |z: Complex64| (Complex64::i() * a * z * z).exp();
        let r = ContourRotation::default().integrate(f, 0.0).unwrap();
        let exact = Complex64::from_polar((PI / a).sqrt(), PI / 4.0);
        assert!((r.value - exact).norm() < 1e-9, "{:?}", r);
        assert!(r.angles[0] > 0.0);

        // decaying only for negative rotation
        let g = |z: Complex64| (-Complex64::i() * a * z * z).exp();
        let r = ContourRotation::default().integrate(g, 0.0).unwrap();
        assert!((r.value - exact.conj()).norm() < 1e-9);
        assert!(r.angles[0] < 0.0);
    }
}
