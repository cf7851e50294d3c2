//! C ABI over the quanta-abm simulator.
//!
//! Configs and simulations are opaque heap handles owned by the caller and
//! released with the matching `*_free`. Every fallible call returns a
//! [`QabmStatus`]; the message for the last failure on the calling thread is
//! available from [`qabm_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use quanta_abm::{parse_config, Error, GnParameters, Role, ScenarioConfig, Simulation, Zone};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QabmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidConfig = 3,
    InvalidArgument = 4,
    SimulationFinished = 5,
    IndexOutOfRange = 6,
    Panic = 7,
}

/// Opaque scenario configuration.
pub struct QabmConfig(ScenarioConfig);

/// Opaque simulation run.
pub struct QabmSimulation(Simulation);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct QabmAgentRecord {
    pub agent_id: u32,
    /// 1 for the infector, 0 otherwise.
    pub is_infector: u8,
    /// 1 if the agent breathes from the cough zone.
    pub in_cough_zone: u8,
    pub weight_class: u8,
    pub seat_row: u32,
    pub seat_col: u32,
    pub weight_fraction: f64,
    pub breath_rate_m3ph: f64,
    pub dose_mq: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(status: QabmStatus, msg: impl Into<String>) -> QabmStatus {
    set_error(msg);
    status
}

fn status_of(err: &Error) -> QabmStatus {
    match err {
        Error::UnknownKey(_)
        | Error::Syntax { .. }
        | Error::InvalidValue { .. }
        | Error::Constraint(_) => QabmStatus::InvalidConfig,
        Error::Finished(_) => QabmStatus::SimulationFinished,
        _ => QabmStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> QabmStatus) -> QabmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(QabmStatus::Panic, "internal panic"),
    }
}

fn from_result(r: quanta_abm::Result<()>) -> QabmStatus {
    match r {
        Ok(()) => QabmStatus::Ok,
        Err(e) => fail(status_of(&e), e.to_string()),
    }
}

macro_rules! deref {
    ($p:expr) => {
        match unsafe { $p.as_ref() } {
            Some(v) => v,
            None => return fail(QabmStatus::NullPointer, concat!(stringify!($p), " is null")),
        }
    };
}

macro_rules! deref_mut {
    ($p:expr) => {
        match unsafe { $p.as_mut() } {
            Some(v) => v,
            None => return fail(QabmStatus::NullPointer, concat!(stringify!($p), " is null")),
        }
    };
}

/// Message for the most recent failure on this thread, or null if none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn qabm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Static, nul-terminated crate version.
#[no_mangle]
pub extern "C" fn qabm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Writes a new handle holding the default scenario into `*out`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qabm_config_default(out: *mut *mut QabmConfig) -> QabmStatus {
    guard(|| {
        if out.is_null() {
            return fail(QabmStatus::NullPointer, "out is null");
        }
        *out = Box::into_raw(Box::new(QabmConfig(ScenarioConfig::default())));
        QabmStatus::Ok
    })
}

/// Parses `key = value` config text into a new handle. `*out` is untouched
/// on failure.
///
/// # Safety
/// `text` must be null or a nul-terminated string; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn qabm_config_parse(
    text: *const c_char,
    out: *mut *mut QabmConfig,
) -> QabmStatus {
    guard(|| {
        if text.is_null() || out.is_null() {
            return fail(QabmStatus::NullPointer, "text or out is null");
        }
        let Ok(text) = CStr::from_ptr(text).to_str() else {
            return fail(QabmStatus::InvalidUtf8, "config text is not UTF-8");
        };
        match parse_config(text) {
            Ok(cfg) => {
                *out = Box::into_raw(Box::new(QabmConfig(cfg)));
                QabmStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// # Safety
/// `config` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qabm_config_free(config: *mut QabmConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Room volume in m³.
///
/// # Safety
/// `config` must be null or live; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn qabm_config_room_volume(
    config: *const QabmConfig,
    out: *mut f64,
) -> QabmStatus {
    guard(|| {
        let cfg = deref!(config);
        let out = deref_mut!(out);
        *out = cfg.0.room_volume();
        QabmStatus::Ok
    })
}

/// Builds a simulation from `config` and `seed`. The config handle may be
/// freed afterwards.
///
/// # Safety
/// `config` must be null or live; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn qabm_simulation_new(
    config: *const QabmConfig,
    seed: u32,
    out: *mut *mut QabmSimulation,
) -> QabmStatus {
    guard(|| {
        let cfg = deref!(config);
        if out.is_null() {
            return fail(QabmStatus::NullPointer, "out is null");
        }
        match Simulation::new(&cfg.0, seed) {
            Ok(sim) => {
                *out = Box::into_raw(Box::new(QabmSimulation(sim)));
                QabmStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// # Safety
/// `sim` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qabm_simulation_free(sim: *mut QabmSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Advances one second.
///
/// # Safety
/// `sim` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn qabm_simulation_step(sim: *mut QabmSimulation) -> QabmStatus {
    guard(|| from_result(deref_mut!(sim).0.step()))
}

/// Runs all remaining steps.
///
/// # Safety
/// `sim` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn qabm_simulation_run(sim: *mut QabmSimulation) -> QabmStatus {
    guard(|| from_result(deref_mut!(sim).0.run_to_end()))
}

/// Number of completed steps.
///
/// # Safety
/// `sim` must be null or live; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn qabm_simulation_step_index(
    sim: *const QabmSimulation,
    out: *mut u64,
) -> QabmStatus {
    guard(|| {
        let sim = deref!(sim);
        *deref_mut!(out) = sim.0.step_index();
        QabmStatus::Ok
    })
}

/// Airborne quanta in the room, mq: total, cough zone and bulk. Any output
/// pointer may be null to skip it.
///
/// # Safety
/// `sim` must be null or live; each output null or writable.
#[no_mangle]
pub unsafe extern "C" fn qabm_simulation_quanta(
    sim: *const QabmSimulation,
    total_mq: *mut f64,
    cough_zone_mq: *mut f64,
    bulk_mq: *mut f64,
) -> QabmStatus {
    guard(|| {
        let air = deref!(sim).0.air();
        if let Some(t) = total_mq.as_mut() {
            *t = air.total_quanta();
        }
        if let Some(c) = cough_zone_mq.as_mut() {
            *c = air.quanta(Zone::Cough);
        }
        if let Some(b) = bulk_mq.as_mut() {
            *b = air.quanta(Zone::Bulk);
        }
        QabmStatus::Ok
    })
}

/// Agent count, infector included.
///
/// # Safety
/// `sim` must be null or live; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn qabm_simulation_agent_count(
    sim: *const QabmSimulation,
    out: *mut usize,
) -> QabmStatus {
    guard(|| {
        let sim = deref!(sim);
        *deref_mut!(out) = sim.0.agents().len();
        QabmStatus::Ok
    })
}

/// Snapshot of agent `index` (0 is the infector).
///
/// # Safety
/// `sim` must be null or live; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn qabm_simulation_agent(
    sim: *const QabmSimulation,
    index: usize,
    out: *mut QabmAgentRecord,
) -> QabmStatus {
    guard(|| {
        let sim = deref!(sim);
        let out = deref_mut!(out);
        let records = sim.0.agent_records();
        let Some(r) = records.get(index) else {
            return fail(
                QabmStatus::IndexOutOfRange,
                format!("agent index {index} out of range (have {})", records.len()),
            );
        };
        *out = QabmAgentRecord {
            agent_id: r.agent_id as u32,
            is_infector: (r.role == Role::Infector) as u8,
            in_cough_zone: r.in_cough_zone as u8,
            weight_class: r.weight_class.get(),
            seat_row: r.seat_row as u32,
            seat_col: r.seat_col as u32,
            weight_fraction: r.weight_fraction,
            breath_rate_m3ph: r.breath_rate_m3ph,
            dose_mq: r.dose_mq,
        };
        QabmStatus::Ok
    })
}

fn check_time(t_s: f64) -> Option<QabmStatus> {
    (!(t_s >= 0.0 && t_s.is_finite())).then(|| {
        fail(
            QabmStatus::InvalidArgument,
            format!("t_s must be finite and >= 0, got {t_s}"),
        )
    })
}

/// Closed-form single-zone airborne quanta at `t_s`, in quanta.
///
/// # Safety
/// `config` must be null or live; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn qabm_oracle_quanta_at(
    config: *const QabmConfig,
    t_s: f64,
    out: *mut f64,
) -> QabmStatus {
    guard(|| {
        let cfg = deref!(config);
        let out = deref_mut!(out);
        if let Some(s) = check_time(t_s) {
            return s;
        }
        *out = GnParameters::from_config(&cfg.0).quanta_at(t_s);
        QabmStatus::Ok
    })
}

/// Closed-form dose in mq for a breathing rate in m³/h up to `t_s`.
///
/// # Safety
/// `config` must be null or live; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn qabm_oracle_expected_dose(
    config: *const QabmConfig,
    breath_rate_m3ph: f64,
    t_s: f64,
    out: *mut f64,
) -> QabmStatus {
    guard(|| {
        let cfg = deref!(config);
        let out = deref_mut!(out);
        if let Some(s) = check_time(t_s) {
            return s;
        }
        if !(breath_rate_m3ph >= 0.0 && breath_rate_m3ph.is_finite()) {
            return fail(
                QabmStatus::InvalidArgument,
                "breath rate must be finite and >= 0",
            );
        }
        *out = GnParameters::from_config(&cfg.0).expected_dose(breath_rate_m3ph, t_s);
        QabmStatus::Ok
    })
}
