//! C ABI over the `faultloc` library.
//!
//! Objects cross the boundary as opaque handles created by the `fl_*_load`,
//! parse and simulate functions and released with the matching `fl_*_free`.
//! Every fallible function returns an [`FlStatus`]; on failure the message
//! is available from [`fl_last_error_message`] on the same thread. Panics
//! never unwind into the caller.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;

use faultloc::circuit::{LineParameters, SourceImpedance};
use faultloc::emt::{simulate_event, EventSpec};
use faultloc::estimation::{EstimationConfig, ParameterEstimate};
use faultloc::mlp::TrainedModel;
use faultloc::pipeline::{estimate_record, takagi_locate};
use faultloc::records::comtrade::parse_comtrade;
use faultloc::records::{
    extract_window, resample, SampleMatrix, WaveformRecord, SAMPLES_PER_CYCLE, WINDOW_LEN,
};
use faultloc::signals::{clarke_forward, rotate_phases};
use faultloc::{Error, FaultType, Stage};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlStatus {
    Ok = 0,
    /// Null pointer, bad length, unknown fault type or out-of-range value.
    InvalidArgument = 1,
    /// File could not be read or written.
    Io = 2,
    /// Malformed COMTRADE, record, model or TOML input.
    Parse = 3,
    /// Parameter estimation or Takagi evaluation failed.
    Estimation = 4,
    /// Simulation failed.
    Simulation = 5,
    /// Training or prediction failed.
    Model = 6,
    /// Caller buffer too small; the required length was written.
    BufferTooSmall = 7,
    /// Internal panic caught at the boundary.
    Panic = 99,
}

/// Length of the flattened 81x6 fault window.
pub const FL_WINDOW_LEN: usize = 486;
const _: () = assert!(FL_WINDOW_LEN == WINDOW_LEN);

pub struct FlRecord(WaveformRecord);
pub struct FlLine(LineParameters);
pub struct FlModel(TrainedModel);

/// Parameter estimate of one record. Impedances in ohm, angles in degrees.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FlEstimate {
    pub zs_aerial_re: f64,
    pub zs_aerial_im: f64,
    /// 1 when the zero-mode impedance was estimated (grounded faults).
    pub has_zs_zero: i32,
    pub zs_zero_re: f64,
    pub zs_zero_im: f64,
    pub loading_deg: f64,
    pub fia_deg: f64,
    pub rf_lower: f64,
    pub rf_upper: f64,
    /// Fault sample index at 80 samples per cycle.
    pub t_f_index: u64,
    pub meas_peak: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> FlStatus {
    if let Error::Stage { stage, source } = e {
        return match stage {
            Stage::Input | Stage::Rotation => status_of(source),
            Stage::Training | Stage::Baseline => FlStatus::Model,
            _ => FlStatus::Estimation,
        };
    }
    match e {
        Error::Io(_) => FlStatus::Io,
        Error::Parse { .. }
        | Error::Structure(_)
        | Error::UnsupportedVersion(_)
        | Error::Channel(_)
        | Error::Format(_)
        | Error::Json(_)
        | Error::TomlDe(_)
        | Error::TomlSer(_) => FlStatus::Parse,
        Error::SimulationFailed { .. } | Error::Singular(_) => FlStatus::Simulation,
        Error::Divergence { .. }
        | Error::TooManyDivergent { .. }
        | Error::DatasetTooSmall(_)
        | Error::Dimension(_) => FlStatus::Model,
        Error::InvalidRecord(_)
        | Error::RateTooLow { .. }
        | Error::LengthMismatch(_)
        | Error::OutOfBounds(_)
        | Error::UnknownFaultType(_)
        | Error::InvalidParameter(_)
        | Error::Window { .. }
        | Error::TooShort { .. } => FlStatus::InvalidArgument,
        _ => FlStatus::Estimation,
    }
}

/// Runs `f`, translating errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), (FlStatus, String)>) -> FlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FlStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            FlStatus::Panic
        }
    }
}

trait IntoFl<T> {
    fn fl(self) -> Result<T, (FlStatus, String)>;
}

impl<T> IntoFl<T> for faultloc::Result<T> {
    fn fl(self) -> Result<T, (FlStatus, String)> {
        self.map_err(|e| (status_of(&e), e.to_string()))
    }
}

fn invalid(msg: impl Into<String>) -> (FlStatus, String) {
    (FlStatus::InvalidArgument, msg.into())
}

unsafe fn cstr<'a>(p: *const c_char, what: &str) -> Result<&'a str, (FlStatus, String)> {
    if p.is_null() {
        return Err(invalid(format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not UTF-8")))
}

unsafe fn bytes<'a>(p: *const u8, len: usize, what: &str) -> Result<&'a [u8], (FlStatus, String)> {
    if p.is_null() {
        return Err(invalid(format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn reference<'a, T>(p: *const T, what: &str) -> Result<&'a T, (FlStatus, String)> {
    p.as_ref().ok_or_else(|| invalid(format!("{what} is null")))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (FlStatus, String)> {
    p.as_mut().ok_or_else(|| invalid(format!("{what} is null")))
}

unsafe fn fault_type(p: *const c_char) -> Result<FaultType, (FlStatus, String)> {
    cstr(p, "fault type")?.parse::<FaultType>().fl()
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the last error message of this thread into `buf` (NUL
/// terminated, truncated to `cap`). Returns the full message length
/// without the terminator.
///
/// # Safety
/// `buf` must be null or valid for `cap` bytes.
#[no_mangle]
pub unsafe extern "C" fn fl_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && cap > 0 {
            let n = msg.len().min(cap - 1);
            ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Loads a native record, or a COMTRADE pair when `path` ends in `.cfg`.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fl_record_load(path: *const c_char, out: *mut *mut FlRecord) -> FlStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let rec = WaveformRecord::load_any(cstr(path, "path")?).fl()?;
        *out = boxed(FlRecord(rec));
        Ok(())
    })
}

/// Parses an in-memory COMTRADE `.cfg`/`.dat` pair.
///
/// # Safety
/// Buffers must be valid for their lengths; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fl_record_parse_comtrade(
    cfg: *const u8,
    cfg_len: usize,
    dat: *const u8,
    dat_len: usize,
    out: *mut *mut FlRecord,
) -> FlStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let rec = parse_comtrade(bytes(cfg, cfg_len, "cfg")?, bytes(dat, dat_len, "dat")?).fl()?;
        *out = boxed(FlRecord(rec));
        Ok(())
    })
}

/// # Safety
/// `rec` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fl_record_free(rec: *mut FlRecord) {
    if !rec.is_null() {
        drop(Box::from_raw(rec));
    }
}

/// Samples per channel, 0 for a null handle.
///
/// # Safety
/// `rec` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fl_record_len(rec: *const FlRecord) -> usize {
    rec.as_ref().map_or(0, |r| r.0.len())
}

/// Sample rate in Hz, 0 for a null handle.
///
/// # Safety
/// `rec` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fl_record_sample_rate(rec: *const FlRecord) -> f64 {
    rec.as_ref().map_or(0.0, |r| r.0.sample_rate)
}

/// Copies channel `index` (0..3 voltages A-C, 3..6 currents A-C) into
/// `buf`. `*len` is always set to the channel length; a short buffer
/// returns `BufferTooSmall` without copying.
///
/// # Safety
/// `buf` must be valid for `cap` doubles; `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fl_record_channel(
    rec: *const FlRecord,
    index: usize,
    buf: *mut f64,
    cap: usize,
    len: *mut usize,
) -> FlStatus {
    guard(|| {
        let rec = &reference(rec, "record")?.0;
        let len = out_ptr(len, "len")?;
        if index >= 6 {
            return Err(invalid(format!("channel index {index} outside 0..6")));
        }
        let ch = rec.channels()[index];
        *len = ch.len();
        if cap < ch.len() {
            return Err((
                FlStatus::BufferTooSmall,
                format!("channel needs {} values", ch.len()),
            ));
        }
        if buf.is_null() {
            return Err(invalid("buffer is null"));
        }
        ptr::copy_nonoverlapping(ch.as_ptr(), buf, ch.len());
        Ok(())
    })
}

/// Fault window in physical units at 80 samples per cycle, rows
/// `[iA, iB, iC, uA, uB, uC]` after rotating to the canonical fault, with
/// the fault sample at `t_f_index` (from [`fl_estimate`]). `out` receives
/// `FL_WINDOW_LEN` doubles.
///
/// # Safety
/// `out` must be valid for `FL_WINDOW_LEN` doubles.
#[no_mangle]
pub unsafe extern "C" fn fl_record_window(
    rec: *const FlRecord,
    fault: *const c_char,
    t_f_index: u64,
    out: *mut f64,
) -> FlStatus {
    guard(|| {
        let rec = &reference(rec, "record")?.0;
        let ft = fault_type(fault)?;
        if out.is_null() {
            return Err(invalid("out is null"));
        }
        let r = resample(rec, SAMPLES_PER_CYCLE).fl()?;
        let (rot, _, _) = rotate_phases(&r, ft);
        let w = extract_window(&rot, t_f_index as usize).fl()?;
        ptr::copy_nonoverlapping(w.data().as_ptr(), out, WINDOW_LEN);
        Ok(())
    })
}

/// Parses a line description from TOML text.
///
/// # Safety
/// `toml` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fl_line_from_toml(toml: *const c_char, out: *mut *mut FlLine) -> FlStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let line = LineParameters::from_toml_str(cstr(toml, "toml")?).fl()?;
        *out = boxed(FlLine(line));
        Ok(())
    })
}

/// # Safety
/// `path` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fl_line_load(path: *const c_char, out: *mut *mut FlLine) -> FlStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let line = LineParameters::load(cstr(path, "path")?).fl()?;
        *out = boxed(FlLine(line));
        Ok(())
    })
}

/// # Safety
/// `line` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fl_line_free(line: *mut FlLine) {
    if !line.is_null() {
        drop(Box::from_raw(line));
    }
}

/// Line length in km, 0 for a null handle.
///
/// # Safety
/// `line` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fl_line_length_km(line: *const FlLine) -> f64 {
    line.as_ref().map_or(0.0, |l| l.0.length_km)
}

fn to_fl_estimate(e: &ParameterEstimate) -> FlEstimate {
    let zero = e.zs_zero.unwrap_or_default();
    FlEstimate {
        zs_aerial_re: e.zs_aerial.re,
        zs_aerial_im: e.zs_aerial.im,
        has_zs_zero: e.zs_zero.is_some() as i32,
        zs_zero_re: zero.re,
        zs_zero_im: zero.im,
        loading_deg: e.loading_deg,
        fia_deg: e.fia_deg,
        rf_lower: e.rf_range[0],
        rf_upper: e.rf_range[1],
        t_f_index: e.t_f_index as u64,
        meas_peak: e.meas_peak,
    }
}

/// Estimates system parameters from a record. `k_ff` and `margin_c` of 0
/// or less select the defaults (1.5 and 0.05).
///
/// # Safety
/// Handles must be live; `fault` NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fl_estimate(
    rec: *const FlRecord,
    line: *const FlLine,
    fault: *const c_char,
    k_ff: f64,
    margin_c: f64,
    out: *mut FlEstimate,
) -> FlStatus {
    guard(|| {
        let rec = &reference(rec, "record")?.0;
        let line = &reference(line, "line")?.0;
        let ft = fault_type(fault)?;
        let out = out_ptr(out, "out")?;
        let mut cfg = EstimationConfig::default();
        if k_ff > 0.0 {
            cfg.k_ff = k_ff;
        }
        if margin_c > 0.0 {
            cfg.margin_c = margin_c;
        }
        let est = estimate_record(rec, ft, line, &cfg).fl()?;
        *out = to_fl_estimate(&est);
        Ok(())
    })
}

fn source(z: &[f64; 4], omega: f64) -> Result<SourceImpedance, (FlStatus, String)> {
    let s = SourceImpedance::from_complex(
        Complex64::new(z[0], z[1]),
        Complex64::new(z[2], z[3]),
        omega,
    );
    s.validate().fl()?;
    Ok(s)
}

/// Simulates one fault event with default numerics (3 cycles before and 1
/// after the fault, 80 samples per cycle). Source impedances are
/// `{r1, x1, r0, x0}` in ohm.
///
/// # Safety
/// Handles must be live; arrays valid for 4 doubles; `out` writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn fl_simulate(
    line: *const FlLine,
    fault: *const c_char,
    distance_km: f64,
    rf_ohm: f64,
    fia_deg: f64,
    loading_deg: f64,
    zs_local: *const [f64; 4],
    zs_remote: *const [f64; 4],
    out: *mut *mut FlRecord,
) -> FlStatus {
    guard(|| {
        let line = &reference(line, "line")?.0;
        let ft = fault_type(fault)?;
        let out = out_ptr(out, "out")?;
        let w = line.omega();
        let zl = source(reference(zs_local, "zs_local")?, w)?;
        let zr = source(reference(zs_remote, "zs_remote")?, w)?;
        let spec = EventSpec::new(
            ft,
            distance_km,
            rf_ohm,
            fia_deg,
            loading_deg,
            zl,
            zr,
            line.clone(),
        );
        let rec = simulate_event(&spec).fl()?;
        *out = boxed(FlRecord(rec));
        Ok(())
    })
}

/// Takagi distance from the one-cycle phasors ending `time_ms` after the
/// detected fault instant. `k_ff` of 0 or less selects 1.5.
///
/// # Safety
/// Handles must be live; `fault` NUL-terminated; `out_km` writable.
#[no_mangle]
pub unsafe extern "C" fn fl_takagi(
    rec: *const FlRecord,
    line: *const FlLine,
    fault: *const c_char,
    time_ms: f64,
    k_ff: f64,
    out_km: *mut f64,
) -> FlStatus {
    guard(|| {
        let rec = &reference(rec, "record")?.0;
        let line = &reference(line, "line")?.0;
        let ft = fault_type(fault)?;
        let out = out_ptr(out_km, "out_km")?;
        let k = if k_ff > 0.0 { k_ff } else { 1.5 };
        *out = takagi_locate(rec, line, ft, time_ms, k).fl()?.distance_km;
        Ok(())
    })
}

/// # Safety
/// `path` must be NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fl_model_load(path: *const c_char, out: *mut *mut FlModel) -> FlStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let m = TrainedModel::load(cstr(path, "path")?).fl()?;
        *out = boxed(FlModel(m));
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fl_model_free(model: *mut FlModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Distance in km for a window in physical units (as from
/// [`fl_record_window`]); `len` must equal `FL_WINDOW_LEN`.
///
/// # Safety
/// `window` must be valid for `len` doubles; `out_km` writable.
#[no_mangle]
pub unsafe extern "C" fn fl_model_predict(
    model: *const FlModel,
    window: *const f64,
    len: usize,
    out_km: *mut f64,
) -> FlStatus {
    guard(|| {
        let m = &reference(model, "model")?.0;
        let out = out_ptr(out_km, "out_km")?;
        if window.is_null() || len != WINDOW_LEN {
            return Err(invalid(format!(
                "window must hold {WINDOW_LEN} values, got {len}"
            )));
        }
        let data = std::slice::from_raw_parts(window, len).to_vec();
        let sample = SampleMatrix::from_rows(data, None).fl()?;
        *out = m.predict_raw(&sample).fl()?;
        Ok(())
    })
}

/// Clarke transform of `n` samples of phases A, B, C into alpha, beta and
/// zero mode outputs.
///
/// # Safety
/// Inputs and outputs must be valid for `n` doubles each.
#[no_mangle]
pub unsafe extern "C" fn fl_clarke_forward(
    a: *const f64,
    b: *const f64,
    c: *const f64,
    n: usize,
    alpha: *mut f64,
    beta: *mut f64,
    zero: *mut f64,
) -> FlStatus {
    guard(|| {
        if [a, b, c].iter().any(|p| p.is_null()) || [alpha, beta, zero].iter().any(|p| p.is_null())
        {
            return Err(invalid("null sample buffer"));
        }
        let s = |p: *const f64| std::slice::from_raw_parts(p, n);
        let modes = clarke_forward(s(a), s(b), s(c)).fl()?;
        for (src, dst) in modes.iter().zip([alpha, beta, zero]) {
            ptr::copy_nonoverlapping(src.as_ptr(), dst, n);
        }
        Ok(())
    })
}
