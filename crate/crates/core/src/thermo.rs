//! Linear irreversible thermodynamics near equilibrium.
//!
//! The entropy is the quadratic form `S(y) = S0 - ½ yᵀ s y`, forces are its
//! gradient, and fluxes are tied to forces by the kinetic matrix `L`
//! (`ẏ = L Y`, `Y = R ẏ`, `R = L⁻¹`).

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{require_finite, require_positive, Error, Result};

const SYMMETRY_TOL: f64 = 1e-12;
const INVERSE_TOL: f64 = 1e-12;

/// An `N`-variable system in the linear (Onsager) regime.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermoSystem {
    s_matrix: DMatrix<f64>,
    l_matrix: DMatrix<f64>,
    r_matrix: DMatrix<f64>,
    k_b: f64,
    s0: f64,
    // cached for the Boltzmann density
    s_det: f64,
}

/// Extensive-variable deviations from equilibrium.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermoState(pub DVector<f64>);

impl ThermoState {
    pub fn new(y: impl Into<Vec<f64>>) -> Self {
        Self(DVector::from_vec(y.into()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Outcome of an Onsager reciprocity check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReciprocityReport {
    pub symmetric: bool,
    pub max_asymmetry: f64,
}

impl ThermoSystem {
    /// Builds a system from the negative entropy Hessian `s` and the kinetic
    /// matrix `L`, with `k_B = 1` and `S0 = 0`.
    pub fn new(s_matrix: DMatrix<f64>, l_matrix: DMatrix<f64>) -> Result<Self> {
        let n = s_matrix.nrows();
        if n == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        if s_matrix.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: s_matrix.ncols(),
            });
        }
        if l_matrix.nrows() != n || l_matrix.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: if l_matrix.nrows() != n {
                    l_matrix.nrows()
                } else {
                    l_matrix.ncols()
                },
            });
        }
        if s_matrix.iter().chain(l_matrix.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "matrix entry",
                value: f64::NAN,
                reason: "all matrix entries must be finite",
            });
        }

        let scale = s_matrix.amax().max(f64::MIN_POSITIVE);
        if max_asymmetry(&s_matrix) > SYMMETRY_TOL * scale {
            return Err(Error::NotPositiveDefinite);
        }
        let cholesky = s_matrix
            .clone()
            .cholesky()
            .ok_or(Error::NotPositiveDefinite)?;
        let s_det = cholesky.determinant();
        if !(s_det > 0.0 && s_det.is_finite()) {
            return Err(Error::NotPositiveDefinite);
        }

        let r_matrix = l_matrix
            .clone()
            .try_inverse()
            .ok_or(Error::SingularKinetics {
                residual: f64::INFINITY,
            })?;
        let residual = (&r_matrix * &l_matrix - DMatrix::identity(n, n)).amax();
        if residual.is_nan() || residual > INVERSE_TOL {
            return Err(Error::SingularKinetics { residual });
        }

        Ok(Self {
            s_matrix,
            l_matrix,
            r_matrix,
            k_b: 1.0,
            s0: 0.0,
            s_det,
        })
    }

    /// Row-major construction, as read from configuration files.
    pub fn from_row_major(n_vars: usize, s: &[f64], l: &[f64]) -> Result<Self> {
        for m in [s, l] {
            if m.len() != n_vars * n_vars {
                return Err(Error::DimensionMismatch {
                    expected: n_vars * n_vars,
                    found: m.len(),
                });
            }
        }
        Self::new(
            DMatrix::from_row_slice(n_vars, n_vars, s),
            DMatrix::from_row_slice(n_vars, n_vars, l),
        )
    }

    pub fn with_k_b(mut self, k_b: f64) -> Result<Self> {
        self.k_b = require_positive("k_b", k_b)?;
        Ok(self)
    }

    pub fn with_s0(mut self, s0: f64) -> Result<Self> {
        self.s0 = require_finite("s0", s0)?;
        Ok(self)
    }

    pub fn n_vars(&self) -> usize {
        self.s_matrix.nrows()
    }

    pub fn s_matrix(&self) -> &DMatrix<f64> {
        &self.s_matrix
    }

    pub fn l_matrix(&self) -> &DMatrix<f64> {
        &self.l_matrix
    }

    pub fn r_matrix(&self) -> &DMatrix<f64> {
        &self.r_matrix
    }

    pub fn k_b(&self) -> f64 {
        self.k_b
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len == self.n_vars() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.n_vars(),
                found: len,
            })
        }
    }

    /// `S0 - ½ yᵀ s y`.
    pub fn entropy(&self, state: &ThermoState) -> Result<f64> {
        self.check_len(state.len())?;
        Ok(self.s0 - 0.5 * state.0.dot(&(&self.s_matrix * &state.0)))
    }

    /// Thermodynamic forces `Y = ∂S/∂y = -s y`.
    pub fn forces(&self, state: &ThermoState) -> Result<DVector<f64>> {
        self.check_len(state.len())?;
        Ok(-(&self.s_matrix * &state.0))
    }

    /// Fluxes `ẏ = L Y`.
    pub fn fluxes(&self, forces: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_len(forces.len())?;
        Ok(&self.l_matrix * forces)
    }

    /// Forces `Y = R ẏ`, the inverse of [`fluxes`](Self::fluxes).
    pub fn forces_from_fluxes(&self, fluxes: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_len(fluxes.len())?;
        Ok(&self.r_matrix * fluxes)
    }

    pub fn check_reciprocity(&self, tol: f64) -> ReciprocityReport {
        let max_asymmetry = max_asymmetry(&self.l_matrix);
        ReciprocityReport {
            symmetric: max_asymmetry <= tol,
            max_asymmetry,
        }
    }

    /// Entropy production `Ṡ = ẏᵀ R ẏ` from the fluxes.
    pub fn entropy_production_rate(&self, fluxes: &DVector<f64>) -> Result<f64> {
        self.check_len(fluxes.len())?;
        Ok(fluxes.dot(&(&self.r_matrix * fluxes)))
    }

    /// Entropy production `Ṡ = Yᵀ L Y` from the forces.
    pub fn entropy_production_rate_from_forces(&self, forces: &DVector<f64>) -> Result<f64> {
        self.check_len(forces.len())?;
        Ok(forces.dot(&(&self.l_matrix * forces)))
    }

    /// Normalized Gaussian fluctuation density with covariance `k_B s⁻¹`.
    pub fn boltzmann_density(&self, state: &ThermoState) -> Result<f64> {
        self.check_len(state.len())?;
        let n = self.n_vars() as f64;
        let quad = state.0.dot(&(&self.s_matrix * &state.0));
        let log_z = 0.5 * n * (2.0 * PI * self.k_b).ln() - 0.5 * self.s_det.ln();
        Ok((-quad / (2.0 * self.k_b) - log_z).exp())
    }
}

fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    fn diag(s: &[f64]) -> ThermoSystem {
        let n = s.len();
        ThermoSystem::new(
            DMatrix::from_diagonal(&DVector::from_row_slice(s)),
            DMatrix::identity(n, n),
        )
        .unwrap()
    }

    #[test]
    fn entropy_examples() {
        let one = diag(&[1.0]);
        assert_eq!(one.entropy(&ThermoState::new([0.0])).unwrap(), 0.0);
        let two = diag(&[2.0]);
        assert_eq!(two.entropy(&ThermoState::new([3.0])).unwrap(), -9.0);
        let pair = diag(&[2.0, 1.0]);
        assert_eq!(pair.entropy(&ThermoState::new([1.0, 2.0])).unwrap(), -3.0);
        let shifted = diag(&[2.0]).with_s0(4.0).unwrap();
        assert_eq!(shifted.entropy(&ThermoState::new([1.0])).unwrap(), 3.0);
    }

    #[test]
    fn force_examples() {
        let pair = diag(&[2.0, 1.0]);
        assert_eq!(
            pair.forces(&ThermoState::new([0.0, 0.0])).unwrap(),
            DVector::from_row_slice(&[0.0, 0.0])
        );
        assert_eq!(
            diag(&[2.0]).forces(&ThermoState::new([3.0])).unwrap()[0],
            -6.0
        );
        assert_eq!(
            pair.forces(&ThermoState::new([1.0, 2.0])).unwrap(),
            DVector::from_row_slice(&[-2.0, -2.0])
        );
    }

    #[test]
    fn flux_examples() {
        let id = diag(&[1.0]);
        assert_eq!(id.fluxes(&DVector::from_row_slice(&[5.0])).unwrap()[0], 5.0);
        let sys = ThermoSystem::new(DMatrix::identity(2, 2), dmatrix![2.0, 1.0; 1.0, 3.0]).unwrap();
        assert_eq!(
            sys.fluxes(&DVector::from_row_slice(&[1.0, 0.0])).unwrap(),
            DVector::from_row_slice(&[2.0, 1.0])
        );
    }

    #[test]
    fn reciprocity_examples() {
        let sym = ThermoSystem::new(DMatrix::identity(2, 2), dmatrix![2.0, 1.0; 1.0, 3.0]).unwrap();
        assert!(sym.check_reciprocity(0.0).symmetric);
        let asym = ThermoSystem::new(DMatrix::identity(2, 2), dmatrix![2.0, 1.0; 0.0, 3.0]).unwrap();
        let report = asym.check_reciprocity(1e-9);
        assert!(!report.symmetric);
        assert_eq!(report.max_asymmetry, 1.0);
        assert!(diag(&[1.0, 1.0]).check_reciprocity(0.0).symmetric);
    }

    #[test]
    fn production_examples() {
        let sys = ThermoSystem::new(dmatrix![1.0], dmatrix![0.5]).unwrap();
        assert_eq!(sys.r_matrix()[(0, 0)], 2.0);
        assert_eq!(sys.entropy_production_rate(&DVector::from_row_slice(&[3.0])).unwrap(), 18.0);
        assert_eq!(sys.entropy_production_rate(&DVector::from_row_slice(&[0.0])).unwrap(), 0.0);
    }

    #[test]
    fn boltzmann_peak_and_factorization() {
        let one = diag(&[1.0]);
        let peak = one.boltzmann_density(&ThermoState::new([0.0])).unwrap();
        assert!((peak - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-15);

        let pair = diag(&[2.0, 0.5]).with_k_b(1.3).unwrap();
        let a = diag(&[2.0]).with_k_b(1.3).unwrap();
        let b = diag(&[0.5]).with_k_b(1.3).unwrap();
        for &(y0, y1) in &[(0.0, 0.0), (0.3, -1.1), (2.0, 1.5), (-0.7, 0.2)] {
            let joint = pair.boltzmann_density(&ThermoState::new([y0, y1])).unwrap();
            let prod = a.boltzmann_density(&ThermoState::new([y0])).unwrap()
                * b.boltzmann_density(&ThermoState::new([y1])).unwrap();
            assert!((joint - prod).abs() < 1e-14);
        }
    }

    #[test]
    fn construction_rejects_bad_inputs() {
        let not_pd = ThermoSystem::new(dmatrix![1.0, 2.0; 2.0, 1.0], DMatrix::identity(2, 2));
        assert_eq!(not_pd.unwrap_err(), Error::NotPositiveDefinite);
        let asym = ThermoSystem::new(dmatrix![1.0, 0.1; 0.0, 1.0], DMatrix::identity(2, 2));
        assert_eq!(asym.unwrap_err(), Error::NotPositiveDefinite);
        let singular = ThermoSystem::new(DMatrix::identity(2, 2), dmatrix![1.0, 2.0; 2.0, 4.0]);
        assert!(matches!(singular.unwrap_err(), Error::SingularKinetics { .. }));
        let shape = ThermoSystem::from_row_major(2, &[1.0, 0.0, 0.0, 1.0], &[1.0]);
        assert!(matches!(shape.unwrap_err(), Error::DimensionMismatch { .. }));
        assert!(diag(&[1.0]).with_k_b(0.0).is_err());
    }

    #[test]
    fn dimension_mismatch_on_operations() {
        let sys = diag(&[1.0, 2.0]);
        let bad = ThermoState::new([1.0]);
        assert!(matches!(sys.entropy(&bad), Err(Error::DimensionMismatch { expected: 2, found: 1 })));
        assert!(sys.forces(&bad).is_err());
        assert!(sys.boltzmann_density(&bad).is_err());
        assert!(sys.fluxes(&DVector::from_row_slice(&[1.0])).is_err());
        assert!(sys.entropy_production_rate(&DVector::from_row_slice(&[1.0, 2.0, 3.0])).is_err());
    }
}
