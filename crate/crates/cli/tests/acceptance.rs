// Acceptance run: each criterion is evaluated at its stated tolerance and
// reported on one line. Exits non-zero if any criterion fails.

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use onsager_core::correspondence::{
    verify_action_entropy, verify_free, verify_harmonic, verify_stationary_born,
};
use onsager_core::ou::chapman_kolmogorov_residual;
use onsager_core::quadrature::{ContourRotation, GaussKronrod};
use onsager_core::quantum::{ground_state_evolution_residual, group_property_residual};
use onsager_core::rng::stream_rng;
use onsager_core::{DictionaryMap, GateSequence, InitialCondition, OUParams, ThermoLagrangian, WienerParams};
use rand::RngExt;
use rand_chacha::ChaCha20Rng;

const SEED: u64 = 0x00AC_CE97;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn random_params(rng: &mut ChaCha20Rng) -> OUParams {
    OUParams::new(
        rng.random_range(0.5..4.0),
        rng.random_range(0.25..4.0),
        rng.random_range(0.5..2.0),
    )
    .unwrap()
}

fn central_map() -> DictionaryMap {
    // s = 2, k_B = 1, γ = 1, ħ = 1, hence m = 1
    DictionaryMap::new(OUParams::with_gamma(1.0, 2.0, 1.0).unwrap(), 1.0).unwrap()
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let v = f();
    (v, start.elapsed())
}

fn harmonic() -> Outcome {
    let map = central_map();
    let xs = [-1.0, -0.5, 0.0, 0.5, 1.0];
    let (worst, elapsed) = timed(|| {
        let mut worst: f64 = 0.0;
        for wt in [0.3, 0.7, 1.2] {
            for x1 in xs {
                for x2 in xs {
                    let c = verify_harmonic(&map, x1, x2, wt).unwrap();
                    worst = worst.max(c.rel_residual).max(c.normalized_rel_residual);
                }
            }
        }
        worst
    });
    outcome(
        worst < 1e-9 && elapsed < Duration::from_secs(1),
        format!("max relative residual {worst:.2e} over 75 points in {elapsed:.2?}"),
    )
}

fn free() -> Outcome {
    let w = WienerParams::new(2.0, 1.0).unwrap();
    let xs: Vec<f64> = (0..=8).map(|k| -2.0 + 0.5 * k as f64).collect();
    let mut points = Vec::new();
    for t in [0.5, 1.0, 2.0] {
        for &x1 in &xs {
            for &x2 in &xs {
                points.push((x1, x2, t));
            }
        }
    }
    let (check, elapsed) = timed(|| verify_free(&w, 1.0, &points).unwrap());
    outcome(
        check.max_rel_residual < 1e-9 && elapsed < Duration::from_secs(1),
        format!(
            "residual {:.2e} with shared constant {:.6}{:+.1e}i over {} points in {elapsed:.2?}",
            check.max_rel_residual, check.fitted_constant.re, check.fitted_constant.im, check.points
        ),
    )
}

fn born() -> Outcome {
    let mut rng = stream_rng(SEED, 3);
    let xs: Vec<f64> = (-12..=12).map(|k| 0.25 * k as f64).collect();
    let worst = (0..20)
        .map(|_| {
            let p = random_params(&mut rng);
            let hbar = rng.random_range(0.2..3.0);
            verify_stationary_born(&p, hbar, &xs).unwrap()
        })
        .fold(0.0, f64::max);
    outcome(worst < 1e-12, format!("max log-ratio deviation {worst:.2e} over 20 parameter sets"))
}

fn normalization_and_markov() -> Outcome {
    let quad = GaussKronrod::default();
    let mut rng = stream_rng(SEED, 4);
    let ((norm, ck), elapsed) = timed(|| {
        let (mut norm, mut ck): (f64, f64) = (0.0, 0.0);
        for _ in 0..20 {
            let p = random_params(&mut rng);
            let sd = p.stationary_variance().sqrt();
            let dtau = rng.random_range(0.05..3.0) / p.gamma();
            let y1 = rng.random_range(-2.0..2.0) * sd;
            let mean = p.decay(dtau) * y1;
            let w = 10.0 * p.transition_variance(dtau).sqrt();
            let mass = quad
                .integrate(|y2| p.transition_density(y1, y2, dtau).unwrap(), mean - w, mean + w)
                .unwrap();
            norm = norm.max((mass.value - 1.0).abs());
            for y3 in [-1.0, 0.0, 0.7] {
                ck = ck.max(chapman_kolmogorov_residual(&p, &p, &p, y1, y3 * sd, 0.3, 0.7, &quad).unwrap());
            }
        }
        (norm, ck)
    });
    outcome(
        norm < 1e-8 && ck < 1e-6 && elapsed < Duration::from_secs(10),
        format!("normalization {norm:.2e}, Chapman-Kolmogorov {ck:.2e}, 20 sets in {elapsed:.2?}"),
    )
}

fn factorization() -> Outcome {
    let mut rng = stream_rng(SEED, 5);
    let mut worst: f64 = 0.0;
    for n in [3, 4] {
        for _ in 0..20 {
            let p = random_params(&mut rng);
            let sd = p.stationary_variance().sqrt();
            let mut t = 0.0;
            let (mut times, mut values) = (Vec::new(), Vec::new());
            for _ in 0..n {
                times.push(t);
                values.push(rng.random_range(-2.0..2.0) * sd);
                t += rng.random_range(0.05..1.5) / p.gamma();
            }
            let gates = GateSequence::new(times, values).unwrap();
            let f = p.joint_density(&gates).unwrap();
            let g = p.joint_density_from_covariance(&gates).unwrap();
            worst = worst.max(((f - g) / g).abs());
        }
    }
    outcome(worst < 1e-10, format!("max relative error {worst:.2e}, n = 3 and 4, 20 sequences each"))
}

fn slicing() -> Outcome {
    let ns = [4, 8, 16, 32, 64, 128, 256];
    let (y1, y2) = (0.5, -0.3);
    let lag = ThermoLagrangian::new(1.0, 1.0, 1.0).unwrap();
    let mut finest: f64 = 0.0;
    let mut ratios = Vec::new();
    for gd in [0.5, 1.0, 1.5, 2.0] {
        let rows = lag.convergence_table(y1, y2, gd, &ns).unwrap();
        finest = finest.max(rows.last().unwrap().rel_error);
        for k in 0..rows.len() - 1 {
            if rows[k].n_slices >= 32 {
                ratios.push(rows[k].rel_error / rows[k + 1].rel_error);
            }
        }
    }
    let order_ok = ratios.iter().all(|r| (3.5..=4.5).contains(r));
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), r| (a.min(*r), b.max(*r)));

    let free = ThermoLagrangian::free(1.0, 1.0).unwrap();
    let mut free_err: f64 = 0.0;
    for dtau in [0.3, 1.0, 2.5] {
        let exact = free.exact_kernel(y1, y2, dtau).unwrap();
        for n in ns {
            free_err = free_err.max(((free.kernel_by_slicing(y1, y2, dtau, n).unwrap() - exact) / exact).abs());
        }
    }
    outcome(
        finest < 1e-3 && order_ok && free_err < 1e-12,
        format!(
            "rel_error(256) {finest:.2e}, error ratios in [{lo:.3}, {hi:.3}], free slicing {free_err:.2e}"
        ),
    )
}

fn monte_carlo() -> Outcome {
    let p = OUParams::new(2.0, 1.0, 1.0).unwrap();
    let n = 100_000;
    let ((z_mean, z_var, z_acf, z_gate), elapsed) = timed(|| {
        let var = p.stationary_variance();
        let lag = 0.5 / p.gamma();
        let ens = p.sample_ensemble(InitialCondition::Stationary, &[0.0, lag], n, SEED).unwrap();
        let nf = n as f64;
        let y0: Vec<f64> = ens.iter().map(|s| s.values[0]).collect();
        let mean = y0.iter().sum::<f64>() / nf;
        let v = y0.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (nf - 1.0);
        let z_mean = mean.abs() / (var / nf).sqrt();
        let z_var = (v - var).abs() / (var * (2.0 / (nf - 1.0)).sqrt());
        let prods: Vec<f64> = ens.iter().map(|s| s.values[0] * s.values[1] / var).collect();
        let rho = prods.iter().sum::<f64>() / nf;
        let se = (prods.iter().map(|x| (x - rho).powi(2)).sum::<f64>() / (nf - 1.0) / nf).sqrt();
        let z_acf = (rho - (-0.5f64).exp()).abs() / se;

        let sd = var.sqrt();
        let gates = GateSequence::new(vec![0.0, 0.3, 0.9], vec![0.5 * sd, sd, 0.2 * sd]).unwrap();
        let a = p.estimate_cumulative(&gates, n, SEED + 1).unwrap();
        let b = p.estimate_cumulative(&gates.shifted(5.0), n, SEED + 2).unwrap();
        let z_gate = (a.estimate - b.estimate).abs() / a.stderr.hypot(b.stderr);
        (z_mean, z_var, z_acf, z_gate)
    });
    outcome(
        z_mean < 4.0 && z_var < 4.0 && z_acf < 4.0 && z_gate < 4.0 && elapsed < Duration::from_secs(60),
        format!(
            "z-scores mean {z_mean:.2}, variance {z_var:.4}, autocorrelation {z_acf:.2}, gate shift {z_gate:.2} in {elapsed:.2?}"
        ),
    )
}

fn quantum() -> Outcome {
    let map = central_map();
    let q = map.quantum();
    let contour = ContourRotation::default();
    let mut group: f64 = 0.0;
    for (x1, x3, t1, t2) in [(0.3, -0.4, 0.4, 0.5), (1.0, 0.5, 0.7, 0.9), (-0.8, 0.2, 0.3, 1.1), (0.0, 1.5, 1.2, 0.6)] {
        group = group.max(group_property_residual(q, x1, x3, t1, t2, &contour).unwrap());
    }
    let mut ground: f64 = 0.0;
    for t in [0.5, 1.3, 2.5] {
        for x in [-1.0, 0.0, 0.5, 1.5] {
            ground = ground.max(ground_state_evolution_residual(q, x, t, &contour).unwrap());
        }
    }
    outcome(
        group < 1e-6 && ground < 1e-6,
        format!("group property {group:.2e}, ground-state evolution {ground:.2e}"),
    )
}

fn action_entropy() -> Outcome {
    let map = central_map();
    let xs = [-1.0, -0.5, 0.0, 0.5, 1.0];
    let (mut analytic, mut discrete): (f64, f64) = (0.0, 0.0);
    for wt in [0.3, 0.7, 1.2] {
        for x1 in xs {
            for x2 in xs {
                let c = verify_action_entropy(&map, x1, x2, wt, 256).unwrap();
                analytic = analytic.max(c.analytic_residual);
                discrete = discrete.max(c.discrete_residual);
            }
        }
    }
    outcome(
        analytic < 1e-10 && discrete < 1e-4,
        format!("analytic {analytic:.2e}, discrete (256 slices) {discrete:.2e}"),
    )
}

fn cli() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_onsager");
    let configs = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let dir = tempfile::tempdir().unwrap();
    let status = |args: &[&str]| Command::new(bin).args(args).output().unwrap().status.code();

    let default = configs.join("default.json");
    let forced = configs.join("forced_failure.json");
    let report = dir.path().join("report.json");
    let ok = status(&["verify-all", "--config", default.to_str().unwrap(), "--out", report.to_str().unwrap()]);
    let fail = status(&["verify-all", "--config", forced.to_str().unwrap(), "--out", report.to_str().unwrap()]);

    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let sa = status(&["sample", "--config", default.to_str().unwrap(), "--seed", "42", "--out", a.to_str().unwrap()]);
    let sb = status(&["sample", "--config", default.to_str().unwrap(), "--seed", "42", "--out", b.to_str().unwrap()]);
    let identical = std::fs::read(&a).ok().zip(std::fs::read(&b).ok()).is_some_and(|(x, y)| !x.is_empty() && x == y);

    outcome(
        ok == Some(0) && fail == Some(1) && sa == Some(0) && sb == Some(0) && identical,
        format!("default exit {ok:?}, forced-failure exit {fail:?}, repeated sample byte-identical: {identical}"),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("harmonic-oscillator correspondence", harmonic),
        ("free-particle correspondence", free),
        ("stationary Born rule", born),
        ("transition normalization and Chapman-Kolmogorov", normalization_and_markov),
        ("factorization against the Gaussian oracle", factorization),
        ("time-slicing convergence", slicing),
        ("Monte Carlo stationarity and autocorrelation", monte_carlo),
        ("quantum group property and ground-state evolution", quantum),
        ("action-entropy bridge", action_entropy),
        ("command-line contract", cli),
    ];
    let mut failures = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let result = check();
        println!(
            "{} criterion {:>2} {name}: {}",
            if result.passed { "PASS" } else { "FAIL" },
            k + 1,
            result.detail
        );
        failures += usize::from(!result.passed);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
