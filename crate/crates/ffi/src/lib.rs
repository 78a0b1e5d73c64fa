//! C ABI over the `modesel` crate.
//!
//! Objects cross the boundary as opaque handles created by `*_new`/`*_load`
//! functions and released with the matching `*_free`. Every fallible call
//! returns a [`ModeselStatus`]; on failure the message is available from
//! [`modesel_last_error`] on the same thread. Panics are caught and reported
//! as [`ModeselStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use modesel::ahp::Slice;
use modesel::config::SimConfig;
use modesel::ldpc::{CalibrationSet, Modulation};
use modesel::output;
use modesel::selection::{sigmoid_norm, SelectorKind};
use modesel::sim::{self, Kpi};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeselStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Config = 4,
    Io = 5,
    Calibration = 6,
    Simulation = 7,
    Panic = 8,
}

/// Opaque configuration handle.
pub struct ModeselConfig(SimConfig);

/// Opaque calibration handle.
pub struct ModeselCalibration(CalibrationSet);

/// Per-run KPIs of one replication.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ModeselRunSummary {
    pub throughput_bps: f64,
    pub ber: f64,
    pub latency_ms: f64,
    pub jitter_ms: f64,
    pub handover_count: f64,
    pub relayed_ratio: f64,
    pub delivered_ratio: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ModeselAggregate {
    pub mean: f64,
    pub ci_halfwidth: f64,
    pub n_runs: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(ModeselStatus, String);

impl Failure {
    fn new(status: ModeselStatus, msg: impl ToString) -> Self {
        Failure(status, msg.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> ModeselStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ModeselStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(&format!("panic: {msg}"));
            ModeselStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::new(ModeselStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::new(ModeselStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure::new(ModeselStatus::NullPointer, format!("{name} is null")))
}

unsafe fn out_arg<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| Failure::new(ModeselStatus::NullPointer, format!("{name} is null")))
}

/// Copies `s` plus a terminating NUL into `buf`. `*needed` always receives
/// the required size including the NUL.
unsafe fn write_str(s: &str, buf: *mut c_char, len: usize, needed: *mut usize) -> Result<(), Failure> {
    if !needed.is_null() {
        *needed = s.len() + 1;
    }
    if buf.is_null() || len < s.len() + 1 {
        return Err(Failure::new(
            ModeselStatus::InvalidArgument,
            format!("buffer of {len} bytes is too small, need {}", s.len() + 1),
        ));
    }
    ptr::copy_nonoverlapping(s.as_ptr(), buf.cast::<u8>(), s.len());
    *buf.add(s.len()) = 0;
    Ok(())
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next `modesel_*` call on the same thread.
#[no_mangle]
pub extern "C" fn modesel_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn modesel_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}

/// New config holding the built-in defaults.
///
/// # Safety
/// `out` must be a valid pointer to a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn modesel_config_new(out: *mut *mut ModeselConfig) -> ModeselStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = Box::into_raw(Box::new(ModeselConfig(SimConfig::default())));
        Ok(())
    })
}

/// Defaults overlaid with a `key = value` file. The environment is not read.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn modesel_config_load(path: *const c_char, out: *mut *mut ModeselConfig) -> ModeselStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let out = out_arg(out, "out")?;
        let mut cfg = SimConfig::default();
        cfg.apply_file(Path::new(path)).map_err(|e| Failure::new(ModeselStatus::Config, e))?;
        cfg.validate().map_err(|e| Failure::new(ModeselStatus::Config, e))?;
        *out = Box::into_raw(Box::new(ModeselConfig(cfg)));
        Ok(())
    })
}

/// Sets one config key using the same syntax as the config file.
///
/// # Safety
/// `cfg` must come from this library; `key` and `value` must be
/// NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn modesel_config_set(cfg: *mut ModeselConfig, key: *const c_char, value: *const c_char) -> ModeselStatus {
    guard(|| {
        let cfg = out_arg(cfg, "cfg")?;
        let key = str_arg(key, "key")?;
        let value = str_arg(value, "value")?;
        let mut next = cfg.0.clone();
        next.set(key, value, "ffi").map_err(|e| Failure::new(ModeselStatus::Config, e))?;
        next.validate().map_err(|e| Failure::new(ModeselStatus::Config, e))?;
        cfg.0 = next;
        Ok(())
    })
}

/// Writes the hex SHA-256 of the effective config into `buf`.
///
/// # Safety
/// `cfg` must come from this library; `buf` must hold `len` bytes; `needed`
/// may be null.
#[no_mangle]
pub unsafe extern "C" fn modesel_config_hash(
    cfg: *const ModeselConfig,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> ModeselStatus {
    guard(|| write_str(&ref_arg(cfg, "cfg")?.0.hash(), buf, len, needed))
}

/// Writes the effective config in file syntax into `buf`.
///
/// # Safety
/// As for [`modesel_config_hash`].
#[no_mangle]
pub unsafe extern "C" fn modesel_config_text(
    cfg: *const ModeselConfig,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> ModeselStatus {
    guard(|| write_str(&ref_arg(cfg, "cfg")?.0.to_text(), buf, len, needed))
}

/// # Safety
/// `cfg` must come from this library and not be used afterwards; null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn modesel_config_free(cfg: *mut ModeselConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Static scores and ranks (LTE, NR, D2D) for `slice` under `cfg`.
///
/// # Safety
/// `scores` and `ranks` must each point to 3 writable elements.
#[no_mangle]
pub unsafe extern "C" fn modesel_rank(
    cfg: *const ModeselConfig,
    slice: *const c_char,
    scores: *mut f64,
    ranks: *mut u8,
) -> ModeselStatus {
    guard(|| {
        let mut c = ref_arg(cfg, "cfg")?.0.clone();
        c.slice = str_arg(slice, "slice")?
            .parse::<Slice>()
            .map_err(|e| Failure::new(ModeselStatus::InvalidArgument, e))?;
        if scores.is_null() || ranks.is_null() {
            return Err(Failure::new(ModeselStatus::NullPointer, "scores or ranks is null"));
        }
        let r = c.ranking().map_err(|e| Failure::new(ModeselStatus::Config, e))?.rank;
        for i in 0..3 {
            *scores.add(i) = r.scores[i];
            *ranks.add(i) = r.ranks[i];
        }
        Ok(())
    })
}

/// Reads a calibration file written by `modesel calibrate`.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn modesel_calibration_load(path: *const c_char, out: *mut *mut ModeselCalibration) -> ModeselStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let out = out_arg(out, "out")?;
        let text = fs::read_to_string(path).map_err(|e| Failure::new(ModeselStatus::Io, format!("{path}: {e}")))?;
        let set = CalibrationSet::from_text(&text).map_err(|e| Failure::new(ModeselStatus::Calibration, format!("{path}: {e}")))?;
        *out = Box::into_raw(Box::new(ModeselCalibration(set)));
        Ok(())
    })
}

/// Runs the LDPC calibration described by `cfg`. Slow at default settings.
///
/// # Safety
/// `cfg` must come from this library and `out` be a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn modesel_calibration_generate(cfg: *const ModeselConfig, out: *mut *mut ModeselCalibration) -> ModeselStatus {
    guard(|| {
        let cfg = ref_arg(cfg, "cfg")?;
        let out = out_arg(out, "out")?;
        let set = CalibrationSet::generate(&cfg.0.calibration_params()).map_err(|e| Failure::new(ModeselStatus::Calibration, e))?;
        *out = Box::into_raw(Box::new(ModeselCalibration(set)));
        Ok(())
    })
}

/// Saves a calibration in the text format read by
/// [`modesel_calibration_load`].
///
/// # Safety
/// `calib` must come from this library; `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn modesel_calibration_save(calib: *const ModeselCalibration, path: *const c_char) -> ModeselStatus {
    guard(|| {
        let calib = ref_arg(calib, "calib")?;
        let path = str_arg(path, "path")?;
        output::write_atomic(Path::new(path), calib.0.to_text().as_bytes())
            .map_err(|e| Failure::new(ModeselStatus::Io, format!("{path}: {e}")))
    })
}

/// Interpolated BLER for `modulation` (qpsk, qam16, qam64, qam256).
///
/// # Safety
/// `calib` must come from this library; `modulation` must be NUL-terminated;
/// `bler` must be writable.
#[no_mangle]
pub unsafe extern "C" fn modesel_calibration_bler(
    calib: *const ModeselCalibration,
    modulation: *const c_char,
    snr_db: f64,
    bler: *mut f64,
) -> ModeselStatus {
    guard(|| {
        let calib = ref_arg(calib, "calib")?;
        let m: Modulation = str_arg(modulation, "modulation")?
            .parse()
            .map_err(|e: String| Failure::new(ModeselStatus::InvalidArgument, e))?;
        let out = out_arg(bler, "bler")?;
        *out = calib.0.curve(m).map_err(|e| Failure::new(ModeselStatus::Calibration, e))?.bler_at(snr_db);
        Ok(())
    })
}

/// # Safety
/// `calib` must come from this library and not be used afterwards; null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn modesel_calibration_free(calib: *mut ModeselCalibration) {
    if !calib.is_null() {
        drop(Box::from_raw(calib));
    }
}

/// One replication of `selector` at the configured operating point.
///
/// # Safety
/// Handles must come from this library; `selector` must be NUL-terminated;
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn modesel_run(
    cfg: *const ModeselConfig,
    calib: *const ModeselCalibration,
    selector: *const c_char,
    seed: u64,
    out: *mut ModeselRunSummary,
) -> ModeselStatus {
    guard(|| {
        let cfg = ref_arg(cfg, "cfg")?;
        let calib = ref_arg(calib, "calib")?;
        let kind: SelectorKind = str_arg(selector, "selector")?
            .parse()
            .map_err(|e| Failure::new(ModeselStatus::InvalidArgument, e))?;
        let out = out_arg(out, "out")?;
        let mut sc = cfg.0.scenario().map_err(|e| Failure::new(ModeselStatus::Config, e))?;
        sc.selector = kind;
        let s = sim::run(&sc, &calib.0, seed, None).map_err(|e| Failure::new(ModeselStatus::Simulation, e))?;
        *out = ModeselRunSummary {
            throughput_bps: s.throughput_bps,
            ber: s.ber,
            latency_ms: s.latency_ms,
            jitter_ms: s.jitter_ms,
            handover_count: s.handover_count,
            relayed_ratio: s.relayed_ratio,
            delivered_ratio: s.delivered_ratio,
        };
        Ok(())
    })
}

/// Runs the configured sweep and writes `results.csv`, the plot files and
/// the config echo into `out_dir`, like `modesel sweep`. `*rows` receives
/// the number of CSV data rows when not null.
///
/// # Safety
/// Handles must come from this library; `out_dir` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn modesel_sweep(
    cfg: *const ModeselConfig,
    calib: *const ModeselCalibration,
    out_dir: *const c_char,
    rows: *mut usize,
) -> ModeselStatus {
    guard(|| {
        let cfg = &ref_arg(cfg, "cfg")?.0;
        let calib = ref_arg(calib, "calib")?;
        let dir = Path::new(str_arg(out_dir, "out_dir")?);
        let run = || -> Result<usize, Failure> {
            let base = cfg.scenario().map_err(|e| Failure::new(ModeselStatus::Config, e))?;
            let results = sim::run_sweep(&base, &cfg.sweep_plan(), &calib.0, None)
                .map_err(|e| Failure::new(ModeselStatus::Simulation, e))?;
            output::clear_failed(dir).map_err(|e| Failure::new(ModeselStatus::Io, e))?;
            output::write_sweep_outputs(dir, &results, &cfg.to_text(), &cfg.hash())
                .map_err(|e| Failure::new(ModeselStatus::Io, format!("{}: {e}", dir.display())))?;
            Ok(results.len() * Kpi::ALL.len())
        };
        match run() {
            Ok(n) => {
                if !rows.is_null() {
                    *rows = n;
                }
                Ok(())
            }
            Err(f) => {
                let _ = output::mark_failed(dir, &f.1);
                Err(f)
            }
        }
    })
}

/// Mean and 95% CI half-width of `n` values (n >= 2).
///
/// # Safety
/// `values` must point to `n` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn modesel_aggregate(values: *const f64, n: usize, out: *mut ModeselAggregate) -> ModeselStatus {
    guard(|| {
        if values.is_null() {
            return Err(Failure::new(ModeselStatus::NullPointer, "values is null"));
        }
        let out = out_arg(out, "out")?;
        let a = sim::aggregate(std::slice::from_raw_parts(values, n))
            .map_err(|e| Failure::new(ModeselStatus::InvalidArgument, e))?;
        *out = ModeselAggregate { mean: a.mean, ci_halfwidth: a.ci_halfwidth, n_runs: a.n_runs };
        Ok(())
    })
}

/// Logistic map of an RSRP value, `1 / (1 + exp(-(rsrp - center) / scale))`.
#[no_mangle]
pub extern "C" fn modesel_sigmoid_norm(rsrp_dbm: f64, center_dbm: f64, scale_db: f64) -> f64 {
    sigmoid_norm(rsrp_dbm, center_dbm, scale_db)
}
