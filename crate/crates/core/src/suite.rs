//! The full verification run: every correspondence identity and process
//! invariant evaluated on configured grids and seeded random parameter sets,
//! each reported with its residual and tolerance.

use rand::RngExt;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::correspondence::{
    map_to_quantum, map_to_thermo, verify_action_entropy, verify_free, verify_harmonic,
    verify_harmonic_with, verify_stationary_born, BoundaryConvention, DictionaryMap,
};
use crate::error::{Error, Result};
use crate::ou::{GateSequence, InitialCondition, OUParams, WienerParams, QUADRATURE_WINDOW};
use crate::path_integral::ThermoLagrangian;
use crate::quadrature::{ContourRotation, GaussKronrod};
use crate::quantum::{ground_state_evolution_residual, group_property_residual};
use crate::rng::stream_rng;
use crate::thermo::{ThermoState, ThermoSystem};

/// Per-identity tolerances. Monte Carlo entries are measured in standard
/// errors; `slicing_order` bounds `|ratio - 4|` for successive halvings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub harmonic: f64,
    pub free: f64,
    pub born: f64,
    pub dictionary_roundtrip: f64,
    pub normalization: f64,
    pub chapman_kolmogorov: f64,
    pub detailed_balance: f64,
    pub factorization: f64,
    pub slicing_convergence: f64,
    pub slicing_order: f64,
    pub slicing_free: f64,
    pub group_property: f64,
    pub ground_state: f64,
    pub action_entropy_analytic: f64,
    pub action_entropy_discrete: f64,
    pub monte_carlo_sigmas: f64,
    pub thermo: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            harmonic: 1e-9,
            free: 1e-9,
            born: 1e-12,
            dictionary_roundtrip: 1e-12,
            normalization: 1e-8,
            chapman_kolmogorov: 1e-6,
            detailed_balance: 1e-12,
            factorization: 1e-10,
            slicing_convergence: 1e-3,
            slicing_order: 0.5,
            slicing_free: 1e-12,
            group_property: 1e-6,
            ground_state: 1e-6,
            action_entropy_analytic: 1e-10,
            action_entropy_discrete: 1e-4,
            monte_carlo_sigmas: 4.0,
            thermo: 1e-12,
        }
    }
}

impl Tolerances {
    pub fn uniform(tol: f64) -> Self {
        Self {
            harmonic: tol,
            free: tol,
            born: tol,
            dictionary_roundtrip: tol,
            normalization: tol,
            chapman_kolmogorov: tol,
            detailed_balance: tol,
            factorization: tol,
            slicing_convergence: tol,
            slicing_order: tol,
            slicing_free: tol,
            group_property: tol,
            ground_state: tol,
            action_entropy_analytic: tol,
            action_entropy_discrete: tol,
            monte_carlo_sigmas: tol,
            thermo: tol,
        }
    }

    fn all(&self) -> [(&'static str, f64); 17] {
        [
            ("harmonic", self.harmonic),
            ("free", self.free),
            ("born", self.born),
            ("dictionary_roundtrip", self.dictionary_roundtrip),
            ("normalization", self.normalization),
            ("chapman_kolmogorov", self.chapman_kolmogorov),
            ("detailed_balance", self.detailed_balance),
            ("factorization", self.factorization),
            ("slicing_convergence", self.slicing_convergence),
            ("slicing_order", self.slicing_order),
            ("slicing_free", self.slicing_free),
            ("group_property", self.group_property),
            ("ground_state", self.ground_state),
            ("action_entropy_analytic", self.action_entropy_analytic),
            ("action_entropy_discrete", self.action_entropy_discrete),
            ("monte_carlo_sigmas", self.monte_carlo_sigmas),
            ("thermo", self.thermo),
        ]
    }
}

/// An `N`-variable linear system given in row-major form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermoConfig {
    pub n_vars: usize,
    pub s_matrix: Vec<f64>,
    pub l_matrix: Vec<f64>,
    #[serde(default = "one")]
    pub k_b: f64,
    #[serde(default)]
    pub s0: f64,
}

fn one() -> f64 {
    1.0
}

impl ThermoConfig {
    pub fn build(&self) -> Result<ThermoSystem> {
        ThermoSystem::from_row_major(self.n_vars, &self.s_matrix, &self.l_matrix)?
            .with_k_b(self.k_b)?
            .with_s0(self.s0)
    }
}

impl Default for ThermoConfig {
    fn default() -> Self {
        Self {
            n_vars: 2,
            s_matrix: vec![2.0, 0.5, 0.5, 1.0],
            l_matrix: vec![1.0, 0.3, 0.3, 0.8],
            k_b: 1.0,
            s0: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarmonicGrid {
    pub xs: Vec<f64>,
    pub omega_ts: Vec<f64>,
}

impl Default for HarmonicGrid {
    fn default() -> Self {
        Self {
            xs: vec![-1.0, -0.5, 0.0, 0.5, 1.0],
            omega_ts: vec![0.3, 0.7, 1.2],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FreeGrid {
    pub wiener: WienerParams,
    pub xs: Vec<f64>,
    pub ts: Vec<f64>,
}

impl Default for FreeGrid {
    fn default() -> Self {
        Self {
            wiener: WienerParams { r: 2.0, k_b: 1.0 },
            xs: (0..=8).map(|k| -2.0 + 0.5 * k as f64).collect(),
            ts: vec![0.5, 1.0, 2.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SlicingStudy {
    pub y1: f64,
    pub y2: f64,
    /// Values of `γ Δτ` studied, each at most 2.
    pub gamma_dtaus: Vec<f64>,
    pub n_slices: Vec<usize>,
    /// Halvings from this `n` on enter the order estimate.
    pub order_from: usize,
}

impl Default for SlicingStudy {
    fn default() -> Self {
        Self {
            y1: 0.5,
            y2: -0.3,
            gamma_dtaus: vec![0.5, 1.0, 2.0],
            n_slices: vec![4, 8, 16, 32, 64, 128, 256],
            order_from: 32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonteCarloStudy {
    pub n_samples: usize,
    /// Lag for the autocorrelation check, in units of `1/γ`.
    pub lag: f64,
    pub gate_times: Vec<f64>,
    /// Gate values in units of the stationary standard deviation.
    pub gate_values: Vec<f64>,
    pub shift: f64,
}

impl Default for MonteCarloStudy {
    fn default() -> Self {
        Self {
            n_samples: 100_000,
            lag: 0.5,
            gate_times: vec![0.0, 0.4, 1.1],
            gate_values: vec![0.5, 1.0, 0.2],
            shift: 5.0,
        }
    }
}

/// Configuration of [`run_suite`]. Every field has a default, so `{}` is a
/// complete configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerificationConfig {
    pub seed: u64,
    pub hbar: f64,
    /// Central parameter set used by the grid identities.
    pub ou: OUParams,
    pub thermo: ThermoConfig,
    /// Number of random parameter sets for the randomized checks.
    pub random_sets: usize,
    pub harmonic: HarmonicGrid,
    pub free: FreeGrid,
    pub slicing: SlicingStudy,
    pub action_slices: usize,
    pub monte_carlo: MonteCarloStudy,
    pub tolerances: Tolerances,
    /// Replaces every tolerance when set.
    pub tol: Option<f64>,
}

impl Default for VerificationConfig {
    fn default() -> Self {
        Self {
            seed: 20_260_101,
            hbar: 1.0,
            ou: OUParams::new(2.0, 2.0, 1.0).expect("default parameters are valid"),
            thermo: ThermoConfig::default(),
            random_sets: 20,
            harmonic: HarmonicGrid::default(),
            free: FreeGrid::default(),
            slicing: SlicingStudy::default(),
            action_slices: 256,
            monte_carlo: MonteCarloStudy::default(),
            tolerances: Tolerances::default(),
            tol: None,
        }
    }
}

impl VerificationConfig {
    pub fn effective_tolerances(&self) -> Tolerances {
        self.tol.map_or(self.tolerances, Tolerances::uniform)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, tol) in self.effective_tolerances().all() {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    value: tol,
                    reason: "tolerances must be finite and positive",
                });
            }
        }
        let nonempty = [
            ("harmonic.xs", self.harmonic.xs.len()),
            ("harmonic.omega_ts", self.harmonic.omega_ts.len()),
            ("free.xs", self.free.xs.len()),
            ("free.ts", self.free.ts.len()),
            ("slicing.gamma_dtaus", self.slicing.gamma_dtaus.len()),
            ("slicing.n_slices", self.slicing.n_slices.len()),
            ("random_sets", self.random_sets),
            ("action_slices", self.action_slices),
        ];
        for (name, len) in nonempty {
            if len == 0 {
                return Err(Error::InvalidParameter {
                    name,
                    value: 0.0,
                    reason: "must be nonempty",
                });
            }
        }
        if self.monte_carlo.n_samples < 1000 {
            return Err(Error::InvalidParameter {
                name: "monte_carlo.n_samples",
                value: self.monte_carlo.n_samples as f64,
                reason: "at least 1000 samples are required",
            });
        }
        if self.monte_carlo.gate_times.len() != self.monte_carlo.gate_values.len() {
            return Err(Error::DimensionMismatch {
                expected: self.monte_carlo.gate_times.len(),
                found: self.monte_carlo.gate_values.len(),
            });
        }
        DictionaryMap::new(self.ou, self.hbar)?;
        self.thermo.build()?;
        Ok(())
    }
}

/// One verified identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityResult {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub details: Value,
}

impl IdentityResult {
    fn new(name: &str, residual: f64, tolerance: f64, details: Value) -> Self {
        Self {
            name: name.to_owned(),
            residual,
            tolerance,
            // NaN fails
            passed: residual <= tolerance,
            details,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub config: VerificationConfig,
    pub tolerances: Tolerances,
    pub entries: Vec<IdentityResult>,
    pub all_passed: bool,
}

/// Runs every check. Errors are configuration errors; failed identities are
/// reported in the entries.
pub fn run_suite(config: &VerificationConfig) -> Result<VerificationReport> {
    config.validate()?;
    let suite = Suite::new(config);
    let entries = vec![
        suite.harmonic()?,
        suite.free()?,
        suite.born()?,
        suite.dictionary_roundtrip()?,
        suite.normalization()?,
        suite.chapman_kolmogorov()?,
        suite.detailed_balance()?,
        suite.factorization()?,
        suite.slicing_convergence()?,
        suite.slicing_order()?,
        suite.slicing_free()?,
        suite.group_property()?,
        suite.ground_state()?,
        suite.action_entropy_analytic()?,
        suite.action_entropy_discrete()?,
        suite.monte_carlo_stationary()?,
        suite.monte_carlo_autocorrelation()?,
        suite.gate_stationarity()?,
        suite.thermo()?,
    ];
    Ok(VerificationReport {
        config: config.clone(),
        tolerances: suite.tol,
        all_passed: entries.iter().all(|e| e.passed),
        entries,
    })
}

/// The individual checks of [`run_suite`], callable one at a time.
pub struct Suite<'a> {
    config: &'a VerificationConfig,
    map: DictionaryMap,
    tol: Tolerances,
}

// Random-parameter streams, one per check.
const STREAM_BORN: u64 = 1;
const STREAM_ROUNDTRIP: u64 = 2;
const STREAM_NORMALIZATION: u64 = 3;
const STREAM_CK: u64 = 4;
const STREAM_BALANCE: u64 = 5;
const STREAM_FACTORIZATION: u64 = 6;
const STREAM_THERMO: u64 = 7;

fn random_params(rng: &mut ChaCha20Rng) -> OUParams {
    let s = rng.random_range(0.5..4.0);
    let r = rng.random_range(0.25..4.0);
    let k_b = rng.random_range(0.5..2.0);
    OUParams::new(s, r, k_b).expect("sampled parameters are positive")
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

fn worst(values: impl IntoIterator<Item = f64>) -> f64 {
    values
        .into_iter()
        .fold(0.0, |acc: f64, v| if v.is_nan() || acc.is_nan() { f64::NAN } else { acc.max(v) })
}

impl<'a> Suite<'a> {
    pub fn new(config: &'a VerificationConfig) -> Self {
        Self {
            config,
            map: DictionaryMap::new(config.ou, config.hbar).expect("validated configuration"),
            tol: config.effective_tolerances(),
        }
    }

    fn rng(&self, stream: u64) -> ChaCha20Rng {
        stream_rng(self.config.seed, stream)
    }

    pub fn harmonic(&self) -> Result<IdentityResult> {
        let grid = &self.config.harmonic;
        let omega = self.map.quantum().omega();
        let mut printed: f64 = 0.0;
        let mut normalized: f64 = 0.0;
        let mut points = 0;
        for &wt in &grid.omega_ts {
            for &x1 in &grid.xs {
                for &x2 in &grid.xs {
                    let c = verify_harmonic(&self.map, x1, x2, wt / omega)?;
                    printed = worst([printed, c.rel_residual]);
                    normalized = worst([normalized, c.normalized_rel_residual]);
                    points += 1;
                }
            }
        }
        let control = verify_harmonic_with(&self.map, 0.0, 1.0, 0.7 / omega, BoundaryConvention::Reversed)?;
        Ok(IdentityResult::new(
            "harmonic_correspondence",
            worst([printed, normalized]),
            self.tol.harmonic,
            json!({
                "points": points,
                "max_rel_residual_written_form": printed,
                "max_rel_residual_normalized": normalized,
                "reversed_boundary_ratio": control.lhs.norm() / control.rhs.norm(),
                "m": self.map.quantum().m(),
                "omega": omega,
            }),
        ))
    }

    pub fn free(&self) -> Result<IdentityResult> {
        let grid = &self.config.free;
        let mut points = Vec::new();
        for &t in &grid.ts {
            for &x1 in &grid.xs {
                for &x2 in &grid.xs {
                    points.push((x1, x2, t));
                }
            }
        }
        let check = verify_free(&grid.wiener, self.config.hbar, &points)?;
        Ok(IdentityResult::new(
            "free_correspondence",
            check.max_rel_residual,
            self.tol.free,
            json!({
                "points": check.points,
                "fitted_constant": [check.fitted_constant.re, check.fitted_constant.im],
                "m": self.config.hbar * grid.wiener.r / (2.0 * grid.wiener.k_b),
            }),
        ))
    }

    pub fn born(&self) -> Result<IdentityResult> {
        let xs: Vec<f64> = (-12..=12).map(|k| 0.25 * k as f64).collect();
        let mut rng = self.rng(STREAM_BORN);
        let mut deviations = vec![verify_stationary_born(&self.config.ou, self.config.hbar, &xs)?];
        for _ in 0..self.config.random_sets {
            deviations.push(verify_stationary_born(&random_params(&mut rng), self.config.hbar, &xs)?);
        }
        Ok(IdentityResult::new(
            "stationary_born_rule",
            worst(deviations.iter().copied()),
            self.tol.born,
            json!({ "parameter_sets": deviations.len(), "grid_points": xs.len() }),
        ))
    }

    pub fn dictionary_roundtrip(&self) -> Result<IdentityResult> {
        let mut rng = self.rng(STREAM_ROUNDTRIP);
        let mut residual: f64 = 0.0;
        for _ in 0..self.config.random_sets {
            let p = random_params(&mut rng);
            let back = map_to_thermo(&map_to_quantum(&p, self.config.hbar)?, p.k_b())?;
            residual = worst([residual, relative(back.s(), p.s()), relative(back.r(), p.r())]);
        }
        Ok(IdentityResult::new(
            "dictionary_roundtrip",
            residual,
            self.tol.dictionary_roundtrip,
            json!({ "parameter_sets": self.config.random_sets }),
        ))
    }

    pub fn normalization(&self) -> Result<IdentityResult> {
        let quad = GaussKronrod::default();
        let mut rng = self.rng(STREAM_NORMALIZATION);
        let mut residual: f64 = 0.0;
        for _ in 0..self.config.random_sets {
            let p = random_params(&mut rng);
            let dtau = rng.random_range(0.05..3.0) / p.gamma();
            let y1 = rng.random_range(-2.0..2.0) * p.stationary_variance().sqrt();
            let mean = p.decay(dtau) * y1;
            let sd = p.transition_variance(dtau).sqrt();
            let mass = quad.integrate(
                |y2| p.transition_density(y1, y2, dtau).unwrap_or(f64::NAN),
                mean - QUADRATURE_WINDOW * sd,
                mean + QUADRATURE_WINDOW * sd,
            )?;
            residual = worst([residual, (mass.value - 1.0).abs()]);
        }
        Ok(IdentityResult::new(
            "transition_normalization",
            residual,
            self.tol.normalization,
            json!({ "parameter_sets": self.config.random_sets }),
        ))
    }

    pub fn chapman_kolmogorov(&self) -> Result<IdentityResult> {
        let mut rng = self.rng(STREAM_CK);
        let mut residual: f64 = 0.0;
        let mut points = 0;
        for _ in 0..self.config.random_sets {
            let p = random_params(&mut rng);
            let y1 = rng.random_range(-2.0..2.0) * p.stationary_variance().sqrt();
            let gates = GateSequence::new(vec![0.0, 0.3, 1.0], vec![y1, 0.0, 0.0])?;
            let report = p.markov_check(&gates, self.tol.chapman_kolmogorov)?;
            residual = worst([residual, report.residual]);
            points += report.points;
        }
        Ok(IdentityResult::new(
            "chapman_kolmogorov",
            residual,
            self.tol.chapman_kolmogorov,
            json!({ "parameter_sets": self.config.random_sets, "points": points, "gaps": [0.3, 0.7] }),
        ))
    }

    pub fn detailed_balance(&self) -> Result<IdentityResult> {
        let mut rng = self.rng(STREAM_BALANCE);
        let mut residual: f64 = 0.0;
        for _ in 0..self.config.random_sets {
            let p = random_params(&mut rng);
            let sd = p.stationary_variance().sqrt();
            let dtau = rng.random_range(0.05..3.0) / p.gamma();
            for _ in 0..5 {
                let y1 = rng.random_range(-3.0..3.0) * sd;
                let y2 = rng.random_range(-3.0..3.0) * sd;
                let forward = p.stationary_density(y1) * p.transition_density(y1, y2, dtau)?;
                let backward = p.stationary_density(y2) * p.transition_density(y2, y1, dtau)?;
                residual = worst([residual, relative(forward, backward)]);
            }
        }
        Ok(IdentityResult::new(
            "detailed_balance",
            residual,
            self.tol.detailed_balance,
            json!({ "parameter_sets": self.config.random_sets, "points_per_set": 5 }),
        ))
    }

    pub fn factorization(&self) -> Result<IdentityResult> {
        let mut rng = self.rng(STREAM_FACTORIZATION);
        let mut residual: f64 = 0.0;
        for n in [3, 4] {
            for _ in 0..self.config.random_sets {
                let p = random_params(&mut rng);
                let sd = p.stationary_variance().sqrt();
                let mut t = rng.random_range(-1.0..1.0);
                let mut times = Vec::with_capacity(n);
                let mut values = Vec::with_capacity(n);
                for _ in 0..n {
                    times.push(t);
                    values.push(rng.random_range(-2.0..2.0) * sd);
                    t += rng.random_range(0.05..1.5) / p.gamma();
                }
                let gates = GateSequence::new(times, values)?;
                residual = worst([
                    residual,
                    relative(p.joint_density(&gates)?, p.joint_density_from_covariance(&gates)?),
                ]);
            }
        }
        Ok(IdentityResult::new(
            "factorization",
            residual,
            self.tol.factorization,
            json!({ "gate_counts": [3, 4], "sequences_per_count": self.config.random_sets }),
        ))
    }

    fn slicing_rows(&self) -> Result<Vec<(f64, Vec<f64>)>> {
        let st = &self.config.slicing;
        let p = &self.config.ou;
        let lag = ThermoLagrangian::from(p);
        st.gamma_dtaus
            .iter()
            .map(|&gd| {
                let rows = lag.convergence_table(st.y1, st.y2, gd / p.gamma(), &st.n_slices)?;
                Ok((gd, rows.iter().map(|r| r.rel_error).collect()))
            })
            .collect()
    }

    pub fn slicing_convergence(&self) -> Result<IdentityResult> {
        let rows = self.slicing_rows()?;
        let finest = worst(rows.iter().map(|(_, e)| *e.last().expect("nonempty")));
        let monotone = rows.iter().all(|(_, e)| e.windows(2).all(|w| w[1] < w[0]));
        Ok(IdentityResult::new(
            "slicing_convergence",
            finest,
            self.tol.slicing_convergence,
            json!({
                "n_slices": self.config.slicing.n_slices,
                "gamma_dtaus": self.config.slicing.gamma_dtaus,
                "rel_errors": rows.iter().map(|(_, e)| e.clone()).collect::<Vec<_>>(),
                "monotone": monotone,
            }),
        ))
    }

    pub fn slicing_order(&self) -> Result<IdentityResult> {
        let st = &self.config.slicing;
        let rows = self.slicing_rows()?;
        let mut ratios = Vec::new();
        for (_, errors) in &rows {
            for (k, pair) in st.n_slices.windows(2).enumerate() {
                if pair[1] == 2 * pair[0] && pair[0] >= st.order_from {
                    ratios.push(errors[k] / errors[k + 1]);
                }
            }
        }
        let residual = if ratios.is_empty() {
            f64::NAN
        } else {
            worst(ratios.iter().map(|r| (r - 4.0).abs()))
        };
        Ok(IdentityResult::new(
            "slicing_order",
            residual,
            self.tol.slicing_order,
            json!({ "error_ratios": ratios, "order_from": st.order_from }),
        ))
    }

    pub fn slicing_free(&self) -> Result<IdentityResult> {
        let st = &self.config.slicing;
        let w = self.config.free.wiener;
        let lag = ThermoLagrangian::from(&w);
        let mut residual: f64 = 0.0;
        for dtau in [0.3, 1.0, 2.5] {
            let exact = w.kernel_real(st.y1, st.y2, dtau)?;
            for &n in &st.n_slices {
                residual = worst([residual, relative(lag.kernel_by_slicing(st.y1, st.y2, dtau, n)?, exact)]);
            }
        }
        Ok(IdentityResult::new(
            "slicing_free_exact",
            residual,
            self.tol.slicing_free,
            json!({ "n_slices": st.n_slices, "dtaus": [0.3, 1.0, 2.5] }),
        ))
    }

    pub fn group_property(&self) -> Result<IdentityResult> {
        let q = self.map.quantum();
        let contour = ContourRotation::default();
        let cases = [(0.3, -0.4, 0.4, 0.5), (1.0, 0.5, 0.7, 0.9), (-0.8, 0.2, 0.3, 1.1), (0.0, 1.5, 1.2, 0.6)];
        let w = q.omega();
        let residual = worst(
            cases
                .iter()
                .map(|&(x1, x3, a, b)| group_property_residual(q, x1, x3, a / w, b / w, &contour))
                .collect::<Result<Vec<_>>>()?,
        );
        Ok(IdentityResult::new(
            "propagator_group_property",
            residual,
            self.tol.group_property,
            json!({ "cases": cases.len(), "rotation_angle": contour.angle }),
        ))
    }

    pub fn ground_state(&self) -> Result<IdentityResult> {
        let q = self.map.quantum();
        let contour = ContourRotation::default();
        let mut residual: f64 = 0.0;
        for wt in [0.5, 1.3, 2.5] {
            for x2 in [-1.0, 0.0, 0.5, 1.5] {
                residual = worst([residual, ground_state_evolution_residual(q, x2, wt / q.omega(), &contour)?]);
            }
        }
        Ok(IdentityResult::new(
            "ground_state_evolution",
            residual,
            self.tol.ground_state,
            json!({ "omega_ts": [0.5, 1.3, 2.5], "xs": [-1.0, 0.0, 0.5, 1.5] }),
        ))
    }

    fn action_grid(&self) -> Result<Vec<crate::correspondence::ActionEntropyCheck>> {
        let grid = &self.config.harmonic;
        let omega = self.map.quantum().omega();
        let mut out = Vec::new();
        for &wt in &grid.omega_ts {
            for &x1 in &grid.xs {
                for &x2 in &grid.xs {
                    out.push(verify_action_entropy(&self.map, x1, x2, wt / omega, self.config.action_slices)?);
                }
            }
        }
        Ok(out)
    }

    pub fn action_entropy_analytic(&self) -> Result<IdentityResult> {
        let checks = self.action_grid()?;
        Ok(IdentityResult::new(
            "action_entropy_analytic",
            worst(checks.iter().map(|c| c.analytic_residual)),
            self.tol.action_entropy_analytic,
            json!({ "points": checks.len() }),
        ))
    }

    pub fn action_entropy_discrete(&self) -> Result<IdentityResult> {
        let checks = self.action_grid()?;
        Ok(IdentityResult::new(
            "action_entropy_discrete",
            worst(checks.iter().map(|c| c.discrete_residual)),
            self.tol.action_entropy_discrete,
            json!({
                "points": checks.len(),
                "n_slices": self.config.action_slices,
                "max_discrete_dictionary_residual":
                    worst(checks.iter().map(|c| c.discrete_dictionary_residual)),
            }),
        ))
    }

    fn stationary_pairs(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let p = &self.config.ou;
        let lag = self.config.monte_carlo.lag / p.gamma();
        let paths = p.sample_ensemble(
            InitialCondition::Stationary,
            &[0.0, lag],
            self.config.monte_carlo.n_samples,
            self.config.seed,
        )?;
        Ok(paths.iter().map(|s| (s.values[0], s.values[1])).unzip())
    }

    pub fn monte_carlo_stationary(&self) -> Result<IdentityResult> {
        let p = &self.config.ou;
        let (y0, _) = self.stationary_pairs()?;
        let n = y0.len() as f64;
        let var = p.stationary_variance();
        let mean = y0.iter().sum::<f64>() / n;
        let sample_var = y0.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let z_mean = mean.abs() / (var / n).sqrt();
        let z_var = (sample_var - var).abs() / (var * (2.0 / (n - 1.0)).sqrt());
        Ok(IdentityResult::new(
            "monte_carlo_stationary_moments",
            z_mean.max(z_var),
            self.tol.monte_carlo_sigmas,
            json!({
                "n_samples": y0.len(),
                "mean": mean,
                "variance": sample_var,
                "expected_variance": var,
                "z_mean": z_mean,
                "z_variance": z_var,
                "seed": self.config.seed,
            }),
        ))
    }

    pub fn monte_carlo_autocorrelation(&self) -> Result<IdentityResult> {
        let p = &self.config.ou;
        let (y0, y1) = self.stationary_pairs()?;
        let n = y0.len() as f64;
        let var = p.stationary_variance();
        let products: Vec<f64> = y0.iter().zip(&y1).map(|(a, b)| a * b / var).collect();
        let rho = products.iter().sum::<f64>() / n;
        let se = (products.iter().map(|x| (x - rho).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt();
        let expected = (-self.config.monte_carlo.lag).exp();
        let z = (rho - expected).abs() / se;
        Ok(IdentityResult::new(
            "monte_carlo_autocorrelation",
            z,
            self.tol.monte_carlo_sigmas,
            json!({
                "n_samples": y0.len(),
                "lag_gamma": self.config.monte_carlo.lag,
                "autocorrelation": rho,
                "expected": expected,
                "stderr": se,
                "seed": self.config.seed,
            }),
        ))
    }

    pub fn gate_stationarity(&self) -> Result<IdentityResult> {
        let p = &self.config.ou;
        let mc = &self.config.monte_carlo;
        let sd = p.stationary_variance().sqrt();
        let gates = GateSequence::new(
            mc.gate_times.iter().map(|t| t / p.gamma()).collect(),
            mc.gate_values.iter().map(|v| v * sd).collect(),
        )?;
        let seed = self.config.seed;
        let base = p.estimate_cumulative(&gates, mc.n_samples, seed.wrapping_add(1))?;
        let moved = p.estimate_cumulative(&gates.shifted(mc.shift / p.gamma()), mc.n_samples, seed.wrapping_add(2))?;
        let z = (base.estimate - moved.estimate).abs() / base.stderr.hypot(moved.stderr);
        Ok(IdentityResult::new(
            "gate_probability_stationarity",
            z,
            self.tol.monte_carlo_sigmas,
            json!({ "base": base, "shifted": moved, "shift_gamma": mc.shift }),
        ))
    }

    pub fn thermo(&self) -> Result<IdentityResult> {
        let system = self.config.thermo.build()?;
        let reciprocity = system.check_reciprocity(self.tol.thermo);
        let mut rng = self.rng(STREAM_THERMO);
        let mut residual = reciprocity.max_asymmetry;
        for _ in 0..self.config.random_sets {
            let y: Vec<f64> = (0..system.n_vars()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let forces = system.forces(&ThermoState::new(y))?;
            let fluxes = system.fluxes(&forces)?;
            let back = system.forces_from_fluxes(&fluxes)?;
            let scale = forces.norm().max(f64::MIN_POSITIVE);
            residual = worst([
                residual,
                (back - &forces).norm() / scale,
                relative(
                    system.entropy_production_rate(&fluxes)?,
                    system.entropy_production_rate_from_forces(&forces)?,
                ),
            ]);
        }
        Ok(IdentityResult::new(
            "linear_regime_consistency",
            residual,
            self.tol.thermo,
            json!({ "n_vars": system.n_vars(), "max_asymmetry": reciprocity.max_asymmetry }),
        ))
    }
}
