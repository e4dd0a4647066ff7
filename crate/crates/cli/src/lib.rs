//! Configuration documents and subcommand implementations for the `onsager`
//! binary.
//!
//! A configuration document is one JSON object with an optional block per
//! subcommand; absent blocks and fields take their defaults, unknown fields
//! are rejected.

use std::fmt;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use onsager_core::path_integral::ConvergenceRow;
use onsager_core::suite::{run_suite, VerificationConfig, VerificationReport};
use onsager_core::{
    ComplexTime, GateSequence, InitialCondition, OUParams, QuantumParams, ThermoLagrangian,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: u8 = 0;
    pub const VERIFICATION_FAILED: u8 = 1;
    pub const USAGE: u8 = 2;
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io { path: PathBuf, source: io::Error },
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Config(msg) => write!(f, "configuration error: {msg}"),
            Self::Io { path, source } => write!(f, "{}: {source}", path.display()),
        }
    }
}

impl std::error::Error for CliError {}

impl From<onsager_core::Error> for CliError {
    fn from(e: onsager_core::Error) -> Self {
        Self::Config(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigDocument {
    pub verify_all: VerificationConfig,
    pub sample: SampleConfig,
    pub converge: ConvergeConfig,
    pub kernel_eval: KernelEvalConfig,
    pub estimate_gate: GateConfig,
}

impl ConfigDocument {
    /// Reads a document; `None` gives the defaults.
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleConfig {
    pub ou: OUParams,
    pub initial: InitialCondition,
    pub n_paths: usize,
    /// Recorded time points per path, `t_k = k dt` for `k = 0 .. n_steps - 1`.
    pub n_steps: usize,
    pub dt: f64,
    pub seed: u64,
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self {
            ou: OUParams::new(1.0, 1.0, 1.0).expect("valid"),
            initial: InitialCondition::Stationary,
            n_paths: 100,
            n_steps: 1000,
            dt: 0.01,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergeConfig {
    pub r: f64,
    pub k_b: f64,
    /// Zero gives the free (Wiener) kernel.
    pub gamma: f64,
    pub y1: f64,
    pub y2: f64,
    pub dtau: f64,
    pub n_slices: Vec<usize>,
}

impl Default for ConvergeConfig {
    fn default() -> Self {
        Self {
            r: 1.0,
            k_b: 1.0,
            gamma: 1.0,
            y1: 0.5,
            y2: -0.3,
            dtau: 1.0,
            n_slices: vec![4, 8, 16, 32, 64, 128, 256],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    /// Harmonic-oscillator propagator at real time `t`.
    Harmonic { m: f64, omega: f64, hbar: f64 },
    /// Free-particle propagator at real time `t`.
    Free { m: f64, hbar: f64 },
    /// Process transition density over `Δτ = t`, or over `Δτ = i t` when
    /// `wick` is set.
    Transition {
        s: f64,
        r: f64,
        k_b: f64,
        #[serde(default)]
        wick: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelEvalConfig {
    pub kernel: KernelSpec,
    /// `[x1, x2, t]` triples.
    pub points: Vec<[f64; 3]>,
}

impl Default for KernelEvalConfig {
    fn default() -> Self {
        Self {
            kernel: KernelSpec::Harmonic {
                m: 1.0,
                omega: 1.0,
                hbar: 1.0,
            },
            points: vec![[0.0, 0.0, 0.7], [0.5, -0.5, 0.7], [1.0, 0.0, 1.2]],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GateConfig {
    pub ou: OUParams,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub n_samples: usize,
    pub seed: u64,
}

impl Default for GateConfig {
    fn default() -> Self {
        Self {
            ou: OUParams::new(1.0, 1.0, 1.0).expect("valid"),
            times: vec![0.0, 0.5, 1.0],
            values: vec![0.5, 1.0, 0.0],
            n_samples: 100_000,
            seed: 1,
        }
    }
}

/// Hex SHA-256 of the canonical JSON of a configuration block, taken after
/// command-line overrides.
pub fn config_digest<T: Serialize>(block: &T) -> String {
    let bytes = serde_json::to_vec(block).expect("configuration blocks serialize");
    hex::encode(Sha256::digest(&bytes))
}

/// Output sink: a file when a path is given, stdout otherwise.
pub fn open_output(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(fs::File::create(p).map_err(|source| CliError::Io {
            path: p.to_owned(),
            source,
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn io_err(path: Option<&Path>) -> impl Fn(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.map_or_else(|| PathBuf::from("<stdout>"), Path::to_owned),
        source,
    }
}

fn write_json<T: Serialize>(out: Option<&Path>, value: &T) -> CliResult<()> {
    let mut w = open_output(out)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::Io {
        path: out.map_or_else(|| PathBuf::from("<stdout>"), Path::to_owned),
        source: e.into(),
    })?;
    writeln!(w).and_then(|_| w.flush()).map_err(io_err(out))
}

#[derive(Debug, Serialize)]
pub struct VerifyOutput<'a> {
    pub config_digest: String,
    pub seed: u64,
    pub report: &'a VerificationReport,
}

/// Runs the suite and writes the report; returns whether every identity passed.
pub fn cmd_verify_all(
    mut config: VerificationConfig,
    seed: Option<u64>,
    tol: Option<f64>,
    out: Option<&Path>,
) -> CliResult<bool> {
    if let Some(seed) = seed {
        config.seed = seed;
    }
    if tol.is_some() {
        config.tol = tol;
    }
    let report = run_suite(&config)?;
    for e in &report.entries {
        eprintln!(
            "{} {:<34} residual {:.3e}  tolerance {:.1e}",
            if e.passed { "PASS" } else { "FAIL" },
            e.name,
            e.residual,
            e.tolerance
        );
    }
    write_json(
        out,
        &VerifyOutput {
            config_digest: config_digest(&config),
            seed: config.seed,
            report: &report,
        },
    )?;
    Ok(report.all_passed)
}

pub fn cmd_sample(mut config: SampleConfig, seed: Option<u64>, out: Option<&Path>) -> CliResult<()> {
    if let Some(seed) = seed {
        config.seed = seed;
    }
    if config.n_paths == 0 || config.n_steps == 0 {
        return Err(CliError::Config("n_paths and n_steps must be positive".into()));
    }
    if !(config.dt > 0.0 && config.dt.is_finite()) {
        return Err(CliError::Config(format!("dt must be finite and positive, got {}", config.dt)));
    }
    let times: Vec<f64> = (0..config.n_steps).map(|k| k as f64 * config.dt).collect();
    let paths = config.ou.sample_ensemble(config.initial, &times, config.n_paths, config.seed)?;

    let mut w = open_output(out)?;
    let write = |w: &mut Box<dyn Write>| -> io::Result<()> {
        writeln!(w, "# config_digest={} seed={}", config_digest(&config), config.seed)?;
        writeln!(w, "path_id,time,value")?;
        for (id, path) in paths.iter().enumerate() {
            for (t, y) in path.times.iter().zip(&path.values) {
                writeln!(w, "{id},{t},{y}")?;
            }
        }
        w.flush()
    };
    write(&mut w).map_err(io_err(out))
}

pub fn convergence_rows(config: &ConvergeConfig) -> CliResult<Vec<ConvergenceRow>> {
    if config.n_slices.is_empty() {
        return Err(CliError::Config("n_slices must be nonempty".into()));
    }
    if config.n_slices.contains(&0) {
        return Err(CliError::Config("slice counts must be positive".into()));
    }
    let lag = ThermoLagrangian::new(config.r, config.k_b, config.gamma)?;
    Ok(lag.convergence_table(config.y1, config.y2, config.dtau, &config.n_slices)?)
}

pub fn cmd_converge(config: ConvergeConfig, out: Option<&Path>) -> CliResult<()> {
    let rows = convergence_rows(&config)?;
    let mut w = open_output(out)?;
    let write = |w: &mut Box<dyn Write>| -> io::Result<()> {
        writeln!(w, "# config_digest={} seed=none", config_digest(&config))?;
        writeln!(w, "n_slices,value,reference,rel_error")?;
        for r in &rows {
            writeln!(w, "{},{:e},{:e},{:e}", r.n_slices, r.value, r.reference, r.rel_error)?;
        }
        w.flush()
    };
    write(&mut w).map_err(io_err(out))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelRecord {
    pub re: f64,
    pub im: f64,
    pub x1: f64,
    pub x2: f64,
    pub t: f64,
    pub params: KernelSpec,
}

pub fn kernel_records(config: &KernelEvalConfig) -> CliResult<Vec<KernelRecord>> {
    config
        .points
        .iter()
        .map(|&[x1, x2, t]| {
            let value = match config.kernel {
                KernelSpec::Harmonic { m, omega, hbar } => {
                    QuantumParams::new(m, omega, hbar)?.harmonic_propagator(x1, x2, t)?.value()
                }
                KernelSpec::Free { m, hbar } => QuantumParams::free(m, hbar)?.free_propagator(x1, x2, t)?.value(),
                KernelSpec::Transition { s, r, k_b, wick } => {
                    let dtau = if wick { ComplexTime::wick(t) } else { ComplexTime::real(t) };
                    OUParams::new(s, r, k_b)?.transition_density_continued(x1, x2, dtau)?
                }
            };
            Ok(KernelRecord {
                re: value.re,
                im: value.im,
                x1,
                x2,
                t,
                params: config.kernel,
            })
        })
        .collect()
}

#[derive(Debug, Serialize)]
struct KernelOutput {
    config_digest: String,
    seed: Option<u64>,
    records: Vec<KernelRecord>,
}

pub fn cmd_kernel_eval(config: KernelEvalConfig, out: Option<&Path>) -> CliResult<()> {
    let records = kernel_records(&config)?;
    write_json(
        out,
        &KernelOutput {
            config_digest: config_digest(&config),
            seed: None,
            records,
        },
    )
}

#[derive(Debug, Serialize)]
struct GateOutput {
    config_digest: String,
    estimate: f64,
    stderr: f64,
    n_samples: usize,
    seed: u64,
}

pub fn cmd_estimate_gate(mut config: GateConfig, seed: Option<u64>, out: Option<&Path>) -> CliResult<()> {
    if let Some(seed) = seed {
        config.seed = seed;
    }
    let gates = GateSequence::new(config.times.clone(), config.values.clone())?;
    let est = config.ou.estimate_cumulative(&gates, config.n_samples, config.seed)?;
    write_json(
        out,
        &GateOutput {
            config_digest: config_digest(&config),
            estimate: est.estimate,
            stderr: est.stderr,
            n_samples: est.n_samples,
            seed: est.seed,
        },
    )
}
