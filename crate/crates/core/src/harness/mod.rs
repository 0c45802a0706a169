//! Monte-Carlo SER experiments.
//!
//! For every SNR point the runner draws `⌈batch/coherence⌉` channels, sends
//! uniform random symbols through them and hands the *same* observations to
//! every configured detector. Channels, symbols, noise directions and detector
//! randomness are all derived from the experiment seed and the vector index
//! alone, so the draws are shared across SNR points as well (only the noise
//! scale changes) and the output does not depend on the thread count.

mod config;
mod csv;

pub use config::{load_config, parse_config};
pub use csv::{emit_csv, format_float, parse_csv, write_csv, CSV_HEADER};

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::baselines::{mmse_detect, zf_detect};
use crate::channel::{generate_kronecker, observe, ChannelRealization, Observation};
use crate::constellation::{symbol_errors, Constellation};
use crate::error::{invalid, Error, Result};
use crate::langevin::{detect, overdamped_detect, DetectionResult, LangevinConfig, PRESET_NAMES};

/// Detector names understood by [`Detector::from_name`] besides the
/// `langevin-custom` / `overdamped-custom` pair.
pub const DETECTOR_NAMES: [&str; 8] = [
    "zf",
    "mmse",
    "langevin-low1",
    "langevin-low2",
    "langevin-high",
    "overdamped-low1",
    "overdamped-low2",
    "overdamped-high",
];

/// `σ0² = Nu / (10^{SNR/10} Nr)`.
pub fn snr_to_noise_var(snr_db: f64, nu: usize, nr: usize) -> f64 {
    nu as f64 / (10f64.powf(snr_db / 10.0) * nr as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub enum DetectorKind {
    ZeroForcing,
    Mmse,
    Underdamped(LangevinConfig),
    Overdamped(LangevinConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Detector {
    pub name: String,
    pub kind: DetectorKind,
}

impl Detector {
    /// Resolves `zf`, `mmse`, `langevin-<preset>` and `overdamped-<preset>`;
    /// the `custom` preset refers to `custom`.
    pub fn from_name(name: &str, custom: Option<&LangevinConfig>) -> Result<Self> {
        let kind = match name {
            "zf" => DetectorKind::ZeroForcing,
            "mmse" => DetectorKind::Mmse,
            _ => {
                let (family, preset) = name
                    .split_once('-')
                    .ok_or_else(|| Error::UnknownDetector(name.to_string()))?;
                let cfg = match preset {
                    "custom" => custom.cloned().ok_or_else(|| {
                        invalid(format!("`{name}` needs sampler fields in the config"))
                    })?,
                    p if PRESET_NAMES.contains(&p) => LangevinConfig::preset(p)?,
                    _ => return Err(Error::UnknownDetector(name.to_string())),
                };
                cfg.validate()?;
                match family {
                    "langevin" => DetectorKind::Underdamped(cfg),
                    "overdamped" => DetectorKind::Overdamped(cfg),
                    _ => return Err(Error::UnknownDetector(name.to_string())),
                }
            }
        };
        Ok(Self {
            name: name.to_string(),
            kind,
        })
    }

    pub fn detect(
        &self,
        obs: &Observation,
        chan: &ChannelRealization,
        c: &Constellation,
        rng: &mut ChaCha8Rng,
    ) -> Result<DetectionResult> {
        match &self.kind {
            DetectorKind::ZeroForcing => zf_detect(obs, chan, c),
            DetectorKind::Mmse => mmse_detect(obs, chan, c),
            DetectorKind::Underdamped(cfg) => detect(obs, chan, c, cfg, rng),
            DetectorKind::Overdamped(cfg) => overdamped_detect(obs, chan, c, cfg, rng),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub nu: usize,
    pub nr: usize,
    pub modulation_order: usize,
    pub rho: f64,
    pub snr_db_list: Vec<f64>,
    /// Symbol vectors per SNR point.
    pub batch_size: usize,
    /// Symbol vectors per channel realization.
    pub coherence_block: usize,
    pub detectors: Vec<String>,
    /// Sampler used by `langevin-custom` / `overdamped-custom`.
    pub custom_langevin: Option<LangevinConfig>,
    pub seed: u64,
    /// Replaces the SNR-derived `σ0²` at every point when set.
    pub noise_var: Option<f64>,
}

impl Default for ExperimentConfig {
    /// The 64×32, 16-QAM, ρ = 0.6 system at 16 dB with paired ZF/MMSE/low1.
    fn default() -> Self {
        Self {
            nu: 32,
            nr: 64,
            modulation_order: 16,
            rho: 0.6,
            snr_db_list: vec![16.0],
            batch_size: 5000,
            coherence_block: 1000,
            detectors: vec!["zf".into(), "mmse".into(), "langevin-low1".into()],
            custom_langevin: None,
            seed: 0,
            noise_var: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nu == 0 || self.nr == 0 {
            return Err(invalid("nu and nr must be >= 1"));
        }
        if self.batch_size == 0 || self.coherence_block == 0 {
            return Err(invalid("batch_size and coherence_block must be >= 1"));
        }
        if self.snr_db_list.is_empty() {
            return Err(invalid("snr_db_list must not be empty"));
        }
        if self.snr_db_list.iter().any(|s| !s.is_finite()) {
            return Err(invalid("SNR values must be finite"));
        }
        if self.detectors.is_empty() {
            return Err(invalid("at least one detector is required"));
        }
        if let Some(nv) = self.noise_var {
            if !(nv.is_finite() && nv >= 0.0) {
                return Err(invalid(format!("noise_var must be >= 0, got {nv}")));
            }
        }
        Constellation::qam(self.modulation_order)?;
        crate::channel::exp_corr_matrix(1, self.rho)?;
        self.resolve_detectors()?;
        Ok(())
    }

    /// Non-fatal remarks about the configuration.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = vec![];
        if self.nu > self.nr {
            w.push(format!(
                "more users ({}) than receive antennas ({}): the channel is rank deficient",
                self.nu, self.nr
            ));
        }
        w
    }

    pub fn resolve_detectors(&self) -> Result<Vec<Detector>> {
        self.detectors
            .iter()
            .map(|n| Detector::from_name(n, self.custom_langevin.as_ref()))
            .collect()
    }

    pub fn num_blocks(&self) -> usize {
        self.batch_size.div_ceil(self.coherence_block)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    /// Worker threads; `0` uses rayon's default.
    pub threads: usize,
    /// Record wall time; when off, `ms_per_symbol` is written as 0.
    pub timing: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            threads: 0,
            timing: true,
        }
    }
}

impl RunOptions {
    pub fn single_thread() -> Self {
        Self {
            threads: 1,
            ..Self::default()
        }
    }
}

/// One (SNR, detector) measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct SerRecord {
    pub snr_db: f64,
    pub detector: String,
    pub ser: f64,
    pub num_vectors: usize,
    pub ms_per_symbol: f64,
}

/// A record together with the symbol errors of each vector, in vector order.
#[derive(Debug, Clone, PartialEq)]
pub struct PointStats {
    pub record: SerRecord,
    pub vector_errors: Vec<u32>,
    pub symbols_per_vector: usize,
}

impl PointStats {
    pub fn error_count(&self) -> u64 {
        self.vector_errors.iter().map(|&e| e as u64).sum()
    }

    /// Standard error of the SER estimate from the spread of per-vector error
    /// fractions.
    pub fn std_err(&self) -> f64 {
        let per: Vec<f64> = self
            .vector_errors
            .iter()
            .map(|&e| e as f64 / self.symbols_per_vector as f64)
            .collect();
        std_err_of_mean(&per)
    }
}

/// `s/√n` for the sample standard deviation `s`.
pub fn std_err_of_mean(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (var / n as f64).sqrt()
}

const TAG_CHANNEL: u64 = 1;
const TAG_SYMBOLS: u64 = 2;
const TAG_NOISE: u64 = 3;
const TAG_DETECTOR: u64 = 4;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn stream(seed: u64, parts: &[u64]) -> ChaCha8Rng {
    let s = parts
        .iter()
        .fold(splitmix64(seed), |acc, &p| splitmix64(acc ^ splitmix64(p)));
    ChaCha8Rng::seed_from_u64(s)
}

fn name_hash(name: &str) -> u64 {
    // FNV-1a
    name.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}

struct VectorOutcome {
    errors: Vec<u32>,
    elapsed: Vec<Duration>,
}

fn run_vector(
    cfg: &ExperimentConfig,
    index: u64,
    chan: &ChannelRealization,
    c: &Constellation,
    detectors: &[Detector],
    timing: bool,
) -> Result<VectorOutcome> {
    let x = c.random_symbols(cfg.nu, &mut stream(cfg.seed, &[TAG_SYMBOLS, index]));
    let obs = observe(chan, &x, &mut stream(cfg.seed, &[TAG_NOISE, index]))?;
    let mut errors = Vec::with_capacity(detectors.len());
    let mut elapsed = Vec::with_capacity(detectors.len());
    for d in detectors {
        let mut rng = stream(cfg.seed, &[TAG_DETECTOR, name_hash(&d.name), index]);
        let start = timing.then(Instant::now);
        let res = d.detect(&obs, chan, c, &mut rng)?;
        elapsed.push(start.map(|s| s.elapsed()).unwrap_or_default());
        errors.push(symbol_errors(&res.symbols, &x)? as u32);
    }
    Ok(VectorOutcome { errors, elapsed })
}

fn run_point(
    cfg: &ExperimentConfig,
    snr_db: f64,
    c: &Constellation,
    detectors: &[Detector],
    timing: bool,
) -> Result<Vec<PointStats>> {
    let nv = cfg
        .noise_var
        .unwrap_or_else(|| snr_to_noise_var(snr_db, cfg.nu, cfg.nr));
    let nd = detectors.len();
    let mut errors: Vec<Vec<u32>> = vec![Vec::with_capacity(cfg.batch_size); nd];
    let mut total = vec![Duration::ZERO; nd];

    for block in 0..cfg.num_blocks() {
        let h = generate_kronecker(
            cfg.nr,
            cfg.nu,
            cfg.rho,
            &mut stream(cfg.seed, &[TAG_CHANNEL, block as u64]),
        )?;
        let start = Instant::now();
        let chan = ChannelRealization::new(h, nv)?;
        let svd_time = if timing {
            start.elapsed()
        } else {
            Duration::ZERO
        };
        let first = block * cfg.coherence_block;
        let last = (first + cfg.coherence_block).min(cfg.batch_size);
        let outcomes: Vec<VectorOutcome> = (first..last)
            .into_par_iter()
            .map(|i| run_vector(cfg, i as u64, &chan, c, detectors, timing))
            .collect::<Result<_>>()?;
        for t in total.iter_mut() {
            *t += svd_time;
        }
        for o in outcomes {
            for d in 0..nd {
                errors[d].push(o.errors[d]);
                total[d] += o.elapsed[d];
            }
        }
    }

    let symbols = (cfg.batch_size * cfg.nu) as f64;
    Ok(detectors
        .iter()
        .zip(errors)
        .zip(total)
        .map(|((d, vector_errors), t)| {
            let count: u64 = vector_errors.iter().map(|&e| e as u64).sum();
            PointStats {
                record: SerRecord {
                    snr_db,
                    detector: d.name.clone(),
                    ser: count as f64 / symbols,
                    num_vectors: cfg.batch_size,
                    ms_per_symbol: t.as_secs_f64() * 1e3 / symbols,
                },
                vector_errors,
                symbols_per_vector: cfg.nu,
            }
        })
        .collect())
}

/// Runs the sweep and keeps per-vector error counts.
pub fn run_experiment_detailed(
    cfg: &ExperimentConfig,
    opts: &RunOptions,
) -> Result<Vec<PointStats>> {
    cfg.validate()?;
    let detectors = cfg.resolve_detectors()?;
    let c = Constellation::qam(cfg.modulation_order)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads)
        .build()
        .map_err(|e| invalid(format!("cannot build thread pool: {e}")))?;
    pool.install(|| {
        let mut out = vec![];
        for &snr in &cfg.snr_db_list {
            out.extend(run_point(cfg, snr, &c, &detectors, opts.timing)?);
        }
        Ok(out)
    })
}

pub fn run_experiment_with(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Vec<SerRecord>> {
    Ok(run_experiment_detailed(cfg, opts)?
        .into_iter()
        .map(|p| p.record)
        .collect())
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<SerRecord>> {
    run_experiment_with(cfg, &RunOptions::default())
}
