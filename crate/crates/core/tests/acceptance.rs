//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits with a
//! nonzero status if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use langevin_mimo::channel::{generate_kronecker, ChannelRealization, Observation};
use langevin_mimo::constellation::Constellation;
use langevin_mimo::harness::{
    parse_csv, run_experiment_detailed, snr_to_noise_var, std_err_of_mean, ExperimentConfig,
    PointStats, RunOptions,
};
use langevin_mimo::langevin::{kinetic_step, LangevinConfig, TrajectoryState};
use langevin_mimo::score::{likelihood_score, prior_score, SpectralPoint};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let num = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt();
    let den = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den.max(1e-300)
}

fn log_mixture(x: f64, sigma: f64, levels: &[f64]) -> f64 {
    let e: Vec<f64> = levels
        .iter()
        .map(|l| -(x - l) * (x - l) / (2.0 * sigma * sigma))
        .collect();
    let m = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + e.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// Quadratic form of a Gaussian in the received domain, `−½ rᵀ C⁻¹ r` with
/// `r = y − H̄Vχ` and `C = |A|`, `A = σ0'² I − σ_l² H̄H̄ᵀ` (matrix absolute
/// value). Uses `|A|⁻¹ = sign(A) A⁻¹` with the Newton iteration for the matrix
/// sign, so no eigendecomposition or SVD enters the oracle.
struct DenseLikelihood {
    hv: DMatrix<f64>,
    cinv: DMatrix<f64>,
    y: DVector<f64>,
}

fn matrix_sign(a: &DMatrix<f64>) -> DMatrix<f64> {
    let mut x = a.clone();
    for _ in 0..100 {
        let inv = x.clone().try_inverse().expect("singular iterate");
        // Frobenius-norm scaling; it only speeds up the early iterations
        let mu = (inv.norm() / x.norm()).sqrt();
        let next = (&x * mu + inv / mu) * 0.5;
        let change = (&next - &x).norm();
        x = next;
        // quadratic convergence: the remaining error is about change²
        if change <= 1e-10 * x.norm() {
            break;
        }
    }
    x
}

impl DenseLikelihood {
    fn new(chan: &ChannelRealization, y: &DVector<f64>, sigma: f64) -> Self {
        let h = chan.h_real();
        let a = DMatrix::identity(h.nrows(), h.nrows()) * chan.real_noise_var()
            - h * h.transpose() * (sigma * sigma);
        let cinv = matrix_sign(&a) * a.try_inverse().expect("singular covariance");
        Self {
            hv: h * chan.svd_v(),
            cinv,
            y: y.clone(),
        }
    }

    fn log_density(&self, chi: &[f64]) -> f64 {
        let r = &self.y - &self.hv * DVector::from_column_slice(chi);
        -0.5 * r.dot(&(&self.cinv * &r))
    }
}

fn criterion_score() -> Outcome {
    let start = Instant::now();
    let mut g = ChaCha8Rng::seed_from_u64(101);
    let c = Constellation::qam(16).unwrap();
    let step = 1e-6;

    let mut prior_worst: f64 = 0.0;
    for _ in 0..100 {
        let sigma = g.gen_range(0.01..=1.0);
        let x: Vec<f64> = (0..64).map(|_| g.gen_range(-1.5..1.5)).collect();
        let got = prior_score(&x, sigma, &c).unwrap();
        let fd: Vec<f64> = x
            .iter()
            .map(|&v| {
                (log_mixture(v + step, sigma, c.pam_levels())
                    - log_mixture(v - step, sigma, c.pam_levels()))
                    / (2.0 * step)
            })
            .collect();
        prior_worst = prior_worst.max(rel_err(&got, &fd));
    }

    let mut lik_worst: f64 = 0.0;
    for _ in 0..100 {
        let h = generate_kronecker(64, 32, 0.6, &mut g).unwrap();
        let snr = g.gen_range(0.0..20.0);
        let chan = ChannelRealization::new(h, snr_to_noise_var(snr, 32, 64)).unwrap();
        let sigma = g.gen_range(0.01..=1.0);
        let y: Vec<Complex64> = (0..64)
            .map(|_| Complex64::new(g.gen_range(-1.0..1.0), g.gen_range(-1.0..1.0)))
            .collect();
        let obs = Observation::from_received(&chan, y).unwrap();
        let dense = DenseLikelihood::new(&chan, &obs.y_real, sigma);
        let chi: Vec<f64> = (0..64).map(|_| g.gen_range(-1.0..1.0)).collect();
        let got = likelihood_score(
            &SpectralPoint::new(chi.clone()).unwrap(),
            obs.eta.as_slice(),
            &chan,
            sigma,
        )
        .unwrap();
        let fd: Vec<f64> = (0..64)
            .map(|j| {
                let mut p = chi.clone();
                let mut m = chi.clone();
                p[j] += step;
                m[j] -= step;
                (dense.log_density(&p) - dense.log_density(&m)) / (2.0 * step)
            })
            .collect();
        lik_worst = lik_worst.max(rel_err(&got, &fd));
    }

    let t = start.elapsed();
    outcome(
        prior_worst <= 1e-5 && lik_worst <= 1e-5 && t < Duration::from_secs(10),
        format!(
            "max rel err prior {prior_worst:.2e}, likelihood {lik_worst:.2e} over 100 instances each; {:.1} s",
            t.as_secs_f64()
        ),
    )
}

fn criterion_stationarity() -> Outcome {
    let start = Instant::now();
    let cfg = LangevinConfig {
        num_levels: 1,
        steps_per_level: 1,
        num_trajectories: 1,
        step_size: 0.01,
        friction: 1.0,
        temperature: 1.0,
        mass_scalar: 1.0,
        sigma_first: 1.0,
        sigma_last: 1.0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let mut state = TrajectoryState::at_rest(vec![0.0]);
    let score = |x: &[f64], out: &mut [f64]| out[0] = -x[0];
    for _ in 0..10_000 {
        kinetic_step(&mut state, score, &cfg, &mut rng);
    }
    let n = 1_000_000;
    let (mut sum, mut sq) = (0.0, 0.0);
    for _ in 0..n {
        kinetic_step(&mut state, score, &cfg, &mut rng);
        sum += state.chi[0];
        sq += state.chi[0] * state.chi[0];
    }
    let mean = sum / n as f64;
    let var = sq / n as f64 - mean * mean;
    let t = start.elapsed();
    outcome(
        mean.abs() <= 0.02 && (var - 1.0).abs() <= 0.1 && t < Duration::from_secs(30),
        format!(
            "mean {mean:.4}, variance {var:.4} over 1e6 steps; {:.1} s",
            t.as_secs_f64()
        ),
    )
}

fn base_config() -> ExperimentConfig {
    ExperimentConfig {
        nu: 32,
        nr: 64,
        modulation_order: 16,
        rho: 0.6,
        coherence_block: 1000,
        ..ExperimentConfig::default()
    }
}

fn criterion_noiseless() -> Outcome {
    let start = Instant::now();
    let cfg = ExperimentConfig {
        snr_db_list: vec![0.0],
        noise_var: Some(1e-8),
        batch_size: 200,
        detectors: vec!["langevin-low1".into()],
        seed: 103,
        ..base_config()
    };
    let stats = run_experiment_detailed(&cfg, &RunOptions::default()).unwrap();
    let p = &stats[0];
    let t = start.elapsed();
    outcome(
        p.error_count() == 0 && t < Duration::from_secs(300),
        format!(
            "{} symbol errors over {} vectors (SER {:.3e}); {:.1} s",
            p.error_count(),
            p.record.num_vectors,
            p.record.ser,
            t.as_secs_f64()
        ),
    )
}

/// Standard error of `SER(a) − SER(b)` from per-vector paired differences.
fn paired_se(a: &PointStats, b: &PointStats) -> f64 {
    assert_eq!(a.vector_errors.len(), b.vector_errors.len());
    let n = a.symbols_per_vector as f64;
    let d: Vec<f64> = a
        .vector_errors
        .iter()
        .zip(&b.vector_errors)
        .map(|(&x, &y)| (x as f64 - y as f64) / n)
        .collect();
    std_err_of_mean(&d)
}

struct Sweep {
    stats: Vec<PointStats>,
    elapsed: Duration,
}

impl Sweep {
    fn run() -> Self {
        let start = Instant::now();
        let cfg = ExperimentConfig {
            snr_db_list: (0..=8).map(|k| 2.0 * k as f64).collect(),
            batch_size: 5000,
            detectors: ["zf", "mmse", "langevin-low1", "overdamped-low2"]
                .map(String::from)
                .to_vec(),
            seed: 104,
            ..base_config()
        };
        let stats = run_experiment_detailed(
            &cfg,
            &RunOptions {
                threads: 0,
                timing: false,
            },
        )
        .unwrap();
        Self {
            stats,
            elapsed: start.elapsed(),
        }
    }

    fn get(&self, detector: &str, snr: f64) -> &PointStats {
        self.stats
            .iter()
            .find(|p| p.record.detector == detector && p.record.snr_db == snr)
            .unwrap()
    }

    fn detectors(&self) -> Vec<String> {
        let mut d: Vec<String> = self
            .stats
            .iter()
            .map(|p| p.record.detector.clone())
            .collect();
        d.sort();
        d.dedup();
        d
    }
}

fn criterion_ordering(sweep: &Sweep) -> Outcome {
    let zf = sweep.get("zf", 16.0);
    let mmse = sweep.get("mmse", 16.0);
    let lan = sweep.get("langevin-low1", 16.0);
    let gap_lm = (mmse.record.ser - lan.record.ser) / paired_se(mmse, lan);
    let gap_mz = (zf.record.ser - mmse.record.ser) / paired_se(zf, mmse);
    let ratio = mmse.record.ser / lan.record.ser;
    outcome(
        gap_lm >= 3.0 && gap_mz >= 3.0 && ratio >= 10.0 && sweep.elapsed < Duration::from_secs(3600),
        format!(
            "16 dB, {} vectors: SER langevin-low1 {:.3e} < mmse {:.3e} ({gap_lm:.1} SE) < zf {:.3e} ({gap_mz:.1} SE); \
             mmse/langevin-low1 = {ratio:.2} (need >= 10)",
            lan.record.num_vectors, lan.record.ser, mmse.record.ser, zf.record.ser
        ),
    )
}

fn criterion_low_regime(sweep: &Sweep) -> Outcome {
    let mut pass = true;
    let mut parts = vec![];
    for snr in [14.0, 16.0] {
        let ud = sweep.get("langevin-low1", snr);
        let od = sweep.get("overdamped-low2", snr);
        let gap = (od.record.ser - ud.record.ser) / paired_se(od, ud);
        pass &= gap >= 2.0;
        parts.push(format!(
            "{snr} dB: langevin-low1 {:.3e} vs overdamped-low2 {:.3e} ({gap:+.1} SE)",
            ud.record.ser, od.record.ser
        ));
    }
    outcome(
        pass,
        format!("{}; need >= +2 SE at each point", parts.join(", ")),
    )
}

fn criterion_high_regime() -> Outcome {
    let start = Instant::now();
    let cfg = ExperimentConfig {
        snr_db_list: vec![12.0],
        batch_size: 2000,
        detectors: vec!["langevin-high".into(), "overdamped-high".into()],
        seed: 106,
        ..base_config()
    };
    let stats = run_experiment_detailed(
        &cfg,
        &RunOptions {
            threads: 0,
            timing: false,
        },
    )
    .unwrap();
    let (ud, od) = (&stats[0].record, &stats[1].record);
    let ratio = ud.ser / od.ser;
    outcome(
        (0.5..=2.0).contains(&ratio),
        format!(
            "12 dB, {} vectors: langevin-high {:.3e}, overdamped-high {:.3e}, ratio {ratio:.3}; {:.0} s",
            ud.num_vectors,
            ud.ser,
            od.ser,
            start.elapsed().as_secs_f64()
        ),
    )
}

fn criterion_runtime() -> Outcome {
    let cfg = ExperimentConfig {
        snr_db_list: vec![16.0],
        batch_size: 100,
        detectors: vec!["langevin-low1".into(), "langevin-high".into()],
        seed: 107,
        ..base_config()
    };
    let stats = run_experiment_detailed(&cfg, &RunOptions::single_thread()).unwrap();
    let (low, high) = (stats[0].record.ms_per_symbol, stats[1].record.ms_per_symbol);
    let ratio = high / low;
    outcome(
        ratio >= 5.0,
        format!("single thread: langevin-low1 {low:.4} ms/symbol, langevin-high {high:.4} ms/symbol, ratio {ratio:.2}"),
    )
}

fn criterion_monotone(sweep: &Sweep) -> Outcome {
    let snrs: Vec<f64> = (0..=8).map(|k| 2.0 * k as f64).collect();
    let mut pass = true;
    let mut parts = vec![];
    for d in sweep.detectors() {
        let mut inversions = 0;
        let mut large = 0;
        for w in snrs.windows(2) {
            let (lo, hi) = (sweep.get(&d, w[0]), sweep.get(&d, w[1]));
            let rise = hi.record.ser - lo.record.ser;
            if rise > 0.0 {
                inversions += 1;
                if rise >= 2.0 * paired_se(hi, lo) {
                    large += 1;
                }
            }
        }
        let ok = inversions <= 1 && large == 0;
        pass &= ok;
        parts.push(format!("{d}: {inversions} inversion(s), {large} >= 2 SE"));
    }
    outcome(
        pass,
        format!("0..16 dB, 5000 vectors/point; {}", parts.join("; ")),
    )
}

fn criterion_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        "nu = 8\nnr = 16\nmodulation_order = 16\nrho = 0.6\nsnr_db_list = [8.0, 12.0]\n\
         batch_size = 40\ncoherence_block = 20\n\
         detectors = [\"zf\", \"mmse\", \"langevin-low1\", \"overdamped-low2\"]\nseed = 108\n",
    )
    .unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_langevin-mimo"))
            .args(["simulate", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .args(["--single-thread", "--no-timing"])
            .output()
            .unwrap();
        assert!(
            status.status.success(),
            "{}",
            String::from_utf8_lossy(&status.stderr)
        );
        std::fs::read(out).unwrap()
    };
    let (a, b) = (run("a.csv"), run("b.csv"));
    let rows = parse_csv(std::str::from_utf8(&a).unwrap())
        .map(|r| r.len())
        .unwrap_or(0);
    outcome(
        a == b && rows == 8,
        format!(
            "two CLI runs, {} bytes each, {rows} rows, identical: {}",
            a.len(),
            a == b
        ),
    )
}

fn main() -> ExitCode {
    let mut all = true;
    let mut report = |id: usize, name: &str, o: Outcome| {
        all &= o.pass;
        println!(
            "{} [{id}] {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    };
    report(1, "score correctness", criterion_score());
    report(2, "integrator stationarity", criterion_stationarity());
    report(3, "noiseless recovery", criterion_noiseless());
    let sweep = Sweep::run();
    report(4, "detector ordering at 16 dB", criterion_ordering(&sweep));
    report(
        5,
        "underdamped vs overdamped, low regime",
        criterion_low_regime(&sweep),
    );
    report(
        6,
        "underdamped vs overdamped, high regime",
        criterion_high_regime(),
    );
    report(7, "runtime scaling", criterion_runtime());
    report(8, "monotonicity sweep", criterion_monotone(&sweep));
    report(9, "determinism", criterion_determinism());
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
