//! C ABI for the flexmarket simulator.
//!
//! Scenarios and reports are opaque handles created and released by this
//! library. Every fallible call returns an [`FmStatus`]; on failure the
//! message is available from [`fm_last_error_message`] on the same thread
//! until the next failing call. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use flexmarket::report::{load_scenario, parse_scenario, write_outputs};
use flexmarket::scenario::RenewableConfig;
use flexmarket::time::HOURS_PER_DAY;
use flexmarket::{run_simulation, Error, Regime, Scenario, SimulationReport};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Validation = 4,
    /// The market could not be cleared or balanced, or a ledger failed.
    Simulation = 5,
    Io = 6,
    OutOfRange = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FmRegime {
    Rtp = 0,
    Integrated = 1,
}

/// Cost metrics over the measured days of a run.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FmMetrics {
    pub measured_days: usize,
    /// EUR/MWh.
    pub combined: f64,
    pub usage: f64,
    pub balancing: f64,
    pub energy_mwh: f64,
    pub balancing_energy_mwh: f64,
    pub balancing_cost_eur: f64,
    pub mean_spot: f64,
    /// Only meaningful when `has_group_advantage` is true.
    pub group_advantage: f64,
    pub has_group_advantage: bool,
}

/// Opaque scenario handle.
pub struct FmScenario {
    scenario: Scenario,
}

/// Opaque handle to a finished run.
pub struct FmReport {
    report: SimulationReport,
    hash: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    let c = CString::new(text).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: FmStatus, message: impl Into<String>) -> FmStatus {
    set_error(message);
    status
}

fn status_of(e: &Error) -> FmStatus {
    match e {
        Error::Parse { .. } | Error::Json(_) => FmStatus::Parse,
        Error::Validation { .. } | Error::InvalidInput(_) | Error::TooLarge { .. } => {
            FmStatus::Validation
        }
        Error::Io(_) | Error::Csv(_) => FmStatus::Io,
        Error::DegenerateGroup(_) => FmStatus::OutOfRange,
        _ => FmStatus::Simulation,
    }
}

fn from_error(e: Error) -> FmStatus {
    fail(status_of(&e), e.to_string())
}

/// Runs `f`, turning a panic into [`FmStatus::Panic`].
fn guard(f: impl FnOnce() -> FmStatus) -> FmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(FmStatus::Panic, format!("panic: {message}"))
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, FmStatus> {
    if p.is_null() {
        return Err(fail(FmStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(FmStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

unsafe fn scenario_mut<'a>(s: *mut FmScenario) -> Result<&'a mut Scenario, FmStatus> {
    s.as_mut()
        .map(|h| &mut h.scenario)
        .ok_or_else(|| fail(FmStatus::NullPointer, "scenario is null"))
}

unsafe fn report_ref<'a>(r: *const FmReport) -> Result<&'a FmReport, FmStatus> {
    r.as_ref()
        .ok_or_else(|| fail(FmStatus::NullPointer, "report is null"))
}

unsafe fn emit_scenario(scenario: Scenario, out: *mut *mut FmScenario) -> FmStatus {
    *out = Box::into_raw(Box::new(FmScenario { scenario }));
    FmStatus::Ok
}

macro_rules! try_ffi {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(status) => return status,
        }
    };
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failure on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn fm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// The built-in desk-scale scenario.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn fm_scenario_desk(out: *mut *mut FmScenario) -> FmStatus {
    guard(|| {
        if out.is_null() {
            return fail(FmStatus::NullPointer, "out is null");
        }
        emit_scenario(Scenario::desk(), out)
    })
}

/// The desk system with the appliance fleet.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn fm_scenario_desk_appliances(out: *mut *mut FmScenario) -> FmStatus {
    guard(|| {
        if out.is_null() {
            return fail(FmStatus::NullPointer, "out is null");
        }
        emit_scenario(Scenario::desk_appliances(), out)
    })
}

/// Loads and validates a TOML scenario file.
///
/// # Safety
/// `path` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fm_scenario_load(
    path: *const c_char,
    out: *mut *mut FmScenario,
) -> FmStatus {
    guard(|| {
        let path = try_ffi!(str_arg(path, "path"));
        if out.is_null() {
            return fail(FmStatus::NullPointer, "out is null");
        }
        match load_scenario(Path::new(path)) {
            Ok(s) => emit_scenario(s, out),
            Err(e) => from_error(e),
        }
    })
}

/// Parses and validates a scenario from TOML text.
///
/// # Safety
/// `text` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fm_scenario_from_toml(
    text: *const c_char,
    out: *mut *mut FmScenario,
) -> FmStatus {
    guard(|| {
        let text = try_ffi!(str_arg(text, "text"));
        if out.is_null() {
            return fail(FmStatus::NullPointer, "out is null");
        }
        match parse_scenario(text) {
            Ok(s) => emit_scenario(s, out),
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `scenario` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn fm_scenario_set_regime(
    scenario: *mut FmScenario,
    regime: FmRegime,
) -> FmStatus {
    guard(|| {
        let s = try_ffi!(scenario_mut(scenario));
        s.regime = match regime {
            FmRegime::Rtp => Regime::Rtp,
            FmRegime::Integrated => Regime::Integrated,
        };
        FmStatus::Ok
    })
}

/// # Safety
/// `scenario` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn fm_scenario_set_flexible_ratio(
    scenario: *mut FmScenario,
    ratio: f64,
) -> FmStatus {
    guard(|| {
        let s = try_ffi!(scenario_mut(scenario));
        if !(0.0..=1.0).contains(&ratio) {
            return fail(
                FmStatus::Validation,
                format!("invalid value for 'flexible_ratio': {ratio} is outside [0, 1]"),
            );
        }
        s.flexible_ratio = ratio;
        FmStatus::Ok
    })
}

/// Simulated days, warm-up included.
///
/// # Safety
/// `scenario` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn fm_scenario_set_days(
    scenario: *mut FmScenario,
    n_days: usize,
) -> FmStatus {
    guard(|| {
        let s = try_ffi!(scenario_mut(scenario));
        if n_days == 0 {
            return fail(
                FmStatus::Validation,
                "invalid value for 'n_days': must be at least 1",
            );
        }
        s.n_days = n_days;
        FmStatus::Ok
    })
}

/// # Safety
/// `scenario` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn fm_scenario_set_seed(scenario: *mut FmScenario, seed: u64) -> FmStatus {
    guard(|| {
        let s = try_ffi!(scenario_mut(scenario));
        s.seed = seed;
        FmStatus::Ok
    })
}

/// Adds the default renewable producer, or removes any.
///
/// # Safety
/// `scenario` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn fm_scenario_set_renewable(
    scenario: *mut FmScenario,
    enabled: bool,
) -> FmStatus {
    guard(|| {
        let s = try_ffi!(scenario_mut(scenario));
        s.renewable = match (enabled, s.renewable.take()) {
            (false, _) => None,
            (true, existing) => Some(existing.unwrap_or_else(RenewableConfig::default)),
        };
        FmStatus::Ok
    })
}

/// Releases a scenario. NULL is ignored.
///
/// # Safety
/// `scenario` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fm_scenario_free(scenario: *mut FmScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Runs the scenario with the scenario's own seed.
///
/// # Safety
/// `scenario` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fm_simulate(
    scenario: *const FmScenario,
    out: *mut *mut FmReport,
) -> FmStatus {
    guard(|| {
        let Some(handle) = scenario.as_ref() else {
            return fail(FmStatus::NullPointer, "scenario is null");
        };
        if out.is_null() {
            return fail(FmStatus::NullPointer, "out is null");
        }
        let s = &handle.scenario;
        match run_simulation(s, s.seed) {
            Ok(report) => {
                let hash = CString::new(report.scenario_hash.clone()).expect("hex digest");
                *out = Box::into_raw(Box::new(FmReport { report, hash }));
                FmStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Releases a report. NULL is ignored.
///
/// # Safety
/// `report` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fm_report_free(report: *mut FmReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Simulated days in the report; 0 for NULL.
///
/// # Safety
/// `report` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn fm_report_day_count(report: *const FmReport) -> usize {
    report.as_ref().map_or(0, |r| r.report.days.len())
}

/// SHA-256 of the scenario as lowercase hex, owned by the report.
///
/// # Safety
/// `report` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn fm_report_scenario_hash(report: *const FmReport) -> *const c_char {
    report.as_ref().map_or(ptr::null(), |r| r.hash.as_ptr())
}

unsafe fn copy_hourly(
    report: *const FmReport,
    day: usize,
    out: *mut f64,
    pick: fn(&flexmarket::DayResult) -> &[f64; HOURS_PER_DAY],
) -> FmStatus {
    guard(|| {
        let r = try_ffi!(report_ref(report));
        if out.is_null() {
            return fail(FmStatus::NullPointer, "out is null");
        }
        let Some(d) = r.report.days.get(day) else {
            return fail(
                FmStatus::OutOfRange,
                format!("day {day} of {}", r.report.days.len()),
            );
        };
        ptr::copy_nonoverlapping(pick(d).as_ptr(), out, HOURS_PER_DAY);
        FmStatus::Ok
    })
}

/// Copies the 24 day-ahead prices (EUR/MWh) of `day` into `out`.
///
/// # Safety
/// `out` must have room for 24 doubles.
#[no_mangle]
pub unsafe extern "C" fn fm_report_spot_prices(
    report: *const FmReport,
    day: usize,
    out: *mut f64,
) -> FmStatus {
    copy_hourly(report, day, out, |d| &d.spot_prices)
}

/// Copies the 24 imbalance prices (EUR/MWh) of `day` into `out`.
///
/// # Safety
/// `out` must have room for 24 doubles.
#[no_mangle]
pub unsafe extern "C" fn fm_report_imbalance_prices(
    report: *const FmReport,
    day: usize,
    out: *mut f64,
) -> FmStatus {
    copy_hourly(report, day, out, |d| &d.imbalance_prices)
}

/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fm_report_metrics(
    report: *const FmReport,
    out: *mut FmMetrics,
) -> FmStatus {
    guard(|| {
        let r = try_ffi!(report_ref(report));
        if out.is_null() {
            return fail(FmStatus::NullPointer, "out is null");
        }
        let m = &r.report.metrics;
        *out = FmMetrics {
            measured_days: m.measured_days,
            combined: m.costs.combined,
            usage: m.costs.usage,
            balancing: m.costs.balancing,
            energy_mwh: m.energy_mwh,
            balancing_energy_mwh: m.balancing_energy_mwh,
            balancing_cost_eur: m.balancing_cost_eur,
            mean_spot: m.mean_spot,
            group_advantage: m.group_advantage.unwrap_or(0.0),
            has_group_advantage: m.group_advantage.is_some(),
        };
        FmStatus::Ok
    })
}

/// Writes the CSV and summary files of the run into `dir`, creating it.
///
/// # Safety
/// `report` must be a live handle; `dir` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn fm_report_write_outputs(
    report: *const FmReport,
    dir: *const c_char,
) -> FmStatus {
    guard(|| {
        let r = try_ffi!(report_ref(report));
        let dir = try_ffi!(str_arg(dir, "dir"));
        match write_outputs(&r.report, dir) {
            Ok(_) => FmStatus::Ok,
            Err(e) => from_error(e),
        }
    })
}
