//! C ABI over the detectors.
//!
//! Objects are opaque handles created by `lm_*_new`-style constructors and
//! released with the matching `lm_*_free`. Every fallible call returns an
//! [`LmStatus`]; on failure a message is available from [`lm_last_error`] on
//! the same thread. Complex vectors cross the boundary as separate real and
//! imaginary arrays. Matrices are row-major.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use langevin_mimo::baselines::{mmse_detect, zf_detect};
use langevin_mimo::channel::{generate_kronecker, ChannelRealization, ComplexMatrix, Observation};
use langevin_mimo::constellation::Constellation;
use langevin_mimo::harness::snr_to_noise_var;
use langevin_mimo::langevin::{detect, overdamped_detect, LangevinConfig};
use langevin_mimo::{DetectionResult, Error};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numerical = 3,
    Panic = 4,
}

/// QAM constellation handle.
pub struct LmConstellation(Constellation);

/// Channel realization handle; holds the SVD and noise variance.
pub struct LmChannel(ChannelRealization);

/// Sampler configuration handle.
pub struct LmConfig(LangevinConfig);

/// Plain-data view of a sampler configuration.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmLangevinParams {
    pub num_levels: usize,
    pub steps_per_level: usize,
    pub num_trajectories: usize,
    pub step_size: f64,
    pub friction: f64,
    pub temperature: f64,
    pub mass_scalar: f64,
    pub sigma_first: f64,
    pub sigma_last: f64,
}

impl From<&LangevinConfig> for LmLangevinParams {
    fn from(c: &LangevinConfig) -> Self {
        Self {
            num_levels: c.num_levels,
            steps_per_level: c.steps_per_level,
            num_trajectories: c.num_trajectories,
            step_size: c.step_size,
            friction: c.friction,
            temperature: c.temperature,
            mass_scalar: c.mass_scalar,
            sigma_first: c.sigma_first,
            sigma_last: c.sigma_last,
        }
    }
}

impl From<&LmLangevinParams> for LangevinConfig {
    fn from(p: &LmLangevinParams) -> Self {
        Self {
            num_levels: p.num_levels,
            steps_per_level: p.steps_per_level,
            num_trajectories: p.num_trajectories,
            step_size: p.step_size,
            friction: p.friction,
            temperature: p.temperature,
            mass_scalar: p.mass_scalar,
            sigma_first: p.sigma_first,
            sigma_last: p.sigma_last,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Failure(LmStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Numerical(_) => LmStatus::Numerical,
            _ => LmStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(LmStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status code.
fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> LmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            LmStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&format!("internal panic: {msg}"));
            LmStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a>(p: *mut f64, len: usize, what: &str) -> Result<&'a mut [f64], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output handle"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Message for the last failed call on this thread, or an empty string.
/// Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn lm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Noise variance `σ0²` for an SNR in dB.
#[no_mangle]
pub extern "C" fn lm_snr_to_noise_var(snr_db: f64, nu: usize, nr: usize) -> f64 {
    snr_to_noise_var(snr_db, nu, nr)
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lm_constellation_qam(
    order: usize,
    out: *mut *mut LmConstellation,
) -> LmStatus {
    guard(|| put(out, LmConstellation(Constellation::qam(order)?)))
}

/// # Safety
/// `c` must be null or a handle from [`lm_constellation_qam`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lm_constellation_free(c: *mut LmConstellation) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Draws a Kronecker-correlated Rayleigh channel with exponential correlation
/// `rho` at both ends.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lm_channel_kronecker(
    nr: usize,
    nu: usize,
    rho: f64,
    noise_var: f64,
    seed: u64,
    out: *mut *mut LmChannel,
) -> LmStatus {
    guard(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = generate_kronecker(nr, nu, rho, &mut rng)?;
        put(out, LmChannel(ChannelRealization::new(h, noise_var)?))
    })
}

/// Channel from row-major `nr × nu` real and imaginary parts.
///
/// # Safety
/// `re` and `im` must each point to `nr * nu` doubles; `out` must be valid
/// for writes.
#[no_mangle]
pub unsafe extern "C" fn lm_channel_from_parts(
    nr: usize,
    nu: usize,
    re: *const f64,
    im: *const f64,
    noise_var: f64,
    out: *mut *mut LmChannel,
) -> LmStatus {
    guard(|| {
        let n = nr
            .checked_mul(nu)
            .ok_or_else(|| Failure(LmStatus::InvalidArgument, "matrix size overflows".into()))?;
        let h = ComplexMatrix::from_parts(nr, nu, slice(re, n, "re")?, slice(im, n, "im")?)?;
        put(out, LmChannel(ChannelRealization::new(h, noise_var)?))
    })
}

/// # Safety
/// `ch` must be null or a live channel handle.
#[no_mangle]
pub unsafe extern "C" fn lm_channel_free(ch: *mut LmChannel) {
    if !ch.is_null() {
        drop(Box::from_raw(ch));
    }
}

/// # Safety
/// `ch` must be a live channel handle; `nr` and `nu` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lm_channel_dims(
    ch: *const LmChannel,
    nr: *mut usize,
    nu: *mut usize,
) -> LmStatus {
    guard(|| {
        let ch = deref(ch, "channel")?;
        if nr.is_null() || nu.is_null() {
            return Err(null("output dimension"));
        }
        *nr = ch.0.nr();
        *nu = ch.0.nu();
        Ok(())
    })
}

/// Named preset: "low1", "low2" or "high".
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lm_config_preset(
    name: *const c_char,
    out: *mut *mut LmConfig,
) -> LmStatus {
    guard(|| {
        if name.is_null() {
            return Err(null("preset name"));
        }
        let name = CStr::from_ptr(name)
            .to_str()
            .map_err(|_| Failure(LmStatus::InvalidArgument, "preset name is not UTF-8".into()))?;
        put(out, LmConfig(LangevinConfig::preset(name)?))
    })
}

/// Validated configuration from explicit parameters.
///
/// # Safety
/// `params` must point to a valid struct; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lm_config_new(
    params: *const LmLangevinParams,
    out: *mut *mut LmConfig,
) -> LmStatus {
    guard(|| {
        let cfg = LangevinConfig::from(deref(params, "params")?);
        cfg.validate()?;
        put(out, LmConfig(cfg))
    })
}

/// # Safety
/// `cfg` must be a live handle; `params` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lm_config_get(
    cfg: *const LmConfig,
    params: *mut LmLangevinParams,
) -> LmStatus {
    guard(|| {
        let cfg = deref(cfg, "config")?;
        if params.is_null() {
            return Err(null("params"));
        }
        *params = LmLangevinParams::from(&cfg.0);
        Ok(())
    })
}

/// # Safety
/// `cfg` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lm_config_free(cfg: *mut LmConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Shared argument handling: reads `y` (length `nr`), runs `f`, writes the
/// detected symbols (length `nu`) and the residual `‖y − Hx‖²`.
#[allow(clippy::too_many_arguments)]
unsafe fn run_detector<F>(
    ch: *const LmChannel,
    c: *const LmConstellation,
    y_re: *const f64,
    y_im: *const f64,
    x_re: *mut f64,
    x_im: *mut f64,
    residual: *mut f64,
    f: F,
) -> LmStatus
where
    F: FnOnce(
        &Observation,
        &ChannelRealization,
        &Constellation,
    ) -> langevin_mimo::Result<DetectionResult>,
{
    guard(|| {
        let ch = &deref(ch, "channel")?.0;
        let c = &deref(c, "constellation")?.0;
        let (nr, nu) = (ch.nr(), ch.nu());
        let (yr, yi) = (slice(y_re, nr, "y_re")?, slice(y_im, nr, "y_im")?);
        let y: Vec<Complex64> = yr
            .iter()
            .zip(yi)
            .map(|(&a, &b)| Complex64::new(a, b))
            .collect();
        let obs = Observation::from_received(ch, y)?;
        let res = f(&obs, ch, c)?;
        let (xr, xi) = (slice_mut(x_re, nu, "x_re")?, slice_mut(x_im, nu, "x_im")?);
        for (k, s) in res.symbols.iter().enumerate() {
            xr[k] = s.re;
            xi[k] = s.im;
        }
        if !residual.is_null() {
            *residual = res.residual;
        }
        Ok(())
    })
}

/// Annealed underdamped Langevin detection. `seed` fixes the chains' noise.
///
/// # Safety
/// Handles must be live; `y_re`/`y_im` hold `nr` doubles and `x_re`/`x_im`
/// have room for `nu`. `residual` may be null.
#[no_mangle]
pub unsafe extern "C" fn lm_detect_langevin(
    ch: *const LmChannel,
    c: *const LmConstellation,
    cfg: *const LmConfig,
    seed: u64,
    y_re: *const f64,
    y_im: *const f64,
    x_re: *mut f64,
    x_im: *mut f64,
    residual: *mut f64,
) -> LmStatus {
    let Some(cfg) = cfg.as_ref() else {
        set_error("config is null");
        return LmStatus::NullPointer;
    };
    run_detector(ch, c, y_re, y_im, x_re, x_im, residual, |obs, ch, c| {
        detect(obs, ch, c, &cfg.0, &mut ChaCha8Rng::seed_from_u64(seed))
    })
}

/// Annealed overdamped Langevin detection.
///
/// # Safety
/// As for [`lm_detect_langevin`].
#[no_mangle]
pub unsafe extern "C" fn lm_detect_overdamped(
    ch: *const LmChannel,
    c: *const LmConstellation,
    cfg: *const LmConfig,
    seed: u64,
    y_re: *const f64,
    y_im: *const f64,
    x_re: *mut f64,
    x_im: *mut f64,
    residual: *mut f64,
) -> LmStatus {
    let Some(cfg) = cfg.as_ref() else {
        set_error("config is null");
        return LmStatus::NullPointer;
    };
    run_detector(ch, c, y_re, y_im, x_re, x_im, residual, |obs, ch, c| {
        overdamped_detect(obs, ch, c, &cfg.0, &mut ChaCha8Rng::seed_from_u64(seed))
    })
}

/// Zero-forcing detection.
///
/// # Safety
/// As for [`lm_detect_langevin`].
#[no_mangle]
pub unsafe extern "C" fn lm_detect_zf(
    ch: *const LmChannel,
    c: *const LmConstellation,
    y_re: *const f64,
    y_im: *const f64,
    x_re: *mut f64,
    x_im: *mut f64,
    residual: *mut f64,
) -> LmStatus {
    run_detector(ch, c, y_re, y_im, x_re, x_im, residual, zf_detect)
}

/// Linear MMSE detection.
///
/// # Safety
/// As for [`lm_detect_langevin`].
#[no_mangle]
pub unsafe extern "C" fn lm_detect_mmse(
    ch: *const LmChannel,
    c: *const LmConstellation,
    y_re: *const f64,
    y_im: *const f64,
    x_re: *mut f64,
    x_im: *mut f64,
    residual: *mut f64,
) -> LmStatus {
    run_detector(ch, c, y_re, y_im, x_re, x_im, residual, mmse_detect)
}
