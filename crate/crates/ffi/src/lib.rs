//! C ABI over `sop-core`.
//!
//! Schedules cross the boundary as opaque `SopSchedule` handles created by
//! [`sop_schedule_parse`] or [`sop_schedule_generate`] and released with
//! [`sop_schedule_free`]. Every fallible call returns a [`SopStatus`]; the
//! message behind the last failure on the calling thread is available from
//! [`sop_last_error`]. Panics never unwind into C.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use sop_core::bench::Solvers;
use sop_core::booking::{fill_schedule, snapshot_at_fill, Scenario};
use sop_core::instance::{generate_instance, GenConfig, Setup};
use sop_core::io::{read_schedule, write_schedule};
use sop_core::model::{Location, Order, OrderId, Schedule, WindowId};
use sop_core::slots::{commit, Method, QueryError, SlotQuery, Verdict};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SopStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidOrder = 4,
    InvalidArgument = 5,
    BufferTooSmall = 6,
    Unavailable = 7,
    /// A witness failed to replay; indicates a bug.
    Internal = 8,
    Panic = 99,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SopMethod {
    Simple = 0,
    Tsptw = 1,
    Ans = 2,
}

impl From<SopMethod> for Method {
    fn from(m: SopMethod) -> Self {
        match m {
            SopMethod::Simple => Method::Simple,
            SopMethod::Tsptw => Method::Tsptw,
            SopMethod::Ans => Method::Ans,
        }
    }
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SopVerdict {
    Unavailable = 0,
    Available = 1,
    /// The exact search hit its node budget.
    Undecided = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SopSetup {
    I = 1,
    II = 2,
    III = 3,
}

/// A prospective order. Meters, seconds, weight units.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct SopOrder {
    pub id: u32,
    pub x: i64,
    pub y: i64,
    pub weight: u32,
    pub service: i64,
}

/// Parameters for [`sop_schedule_generate`]; unspecified generator settings
/// keep their defaults.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct SopGenParams {
    pub seed: u64,
    pub pool_size: u32,
    pub vehicles: u32,
    pub setup: SopSetup,
    /// Re-optimize travel time after every booking.
    pub optimized: bool,
    /// Fill level in (0, 1].
    pub fill: f64,
}

/// Opaque schedule handle.
pub struct SopSchedule {
    inner: Schedule,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(SopStatus, String);

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SopStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SopStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            SopStatus::Panic
        }
    }
}

fn non_null<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    // SAFETY: callers pass either null or a pointer to a live `T`.
    unsafe { p.as_ref() }.ok_or_else(|| Failure(SopStatus::NullArgument, format!("{what} is null")))
}

fn query_failure(e: QueryError) -> Failure {
    Failure(SopStatus::InvalidOrder, e.to_string())
}

fn to_order(o: &SopOrder) -> Order {
    Order {
        id: OrderId(o.id),
        location: Location::new(o.x, o.y),
        weight: o.weight,
        service: o.service,
        window: WindowId(0),
    }
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sop_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sop_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a schedule file held in `text`.
///
/// # Safety
/// `text` must be null or a NUL-terminated string; `out` must be null or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn sop_schedule_parse(text: *const c_char, out: *mut *mut SopSchedule) -> SopStatus {
    guard(|| {
        if text.is_null() || out.is_null() {
            return Err(Failure(SopStatus::NullArgument, "text and out must be non-null".into()));
        }
        // SAFETY: checked non-null, NUL-terminated per contract.
        let text = unsafe { CStr::from_ptr(text) }
            .to_str()
            .map_err(|e| Failure(SopStatus::InvalidUtf8, e.to_string()))?;
        let inner = read_schedule(text).map_err(|e| Failure(SopStatus::Parse, e.to_string()))?;
        // SAFETY: checked non-null.
        unsafe { *out = Box::into_raw(Box::new(SopSchedule { inner })) };
        Ok(())
    })
}

/// Generates an instance, books it and returns the schedule at
/// `params.fill`.
///
/// # Safety
/// `params` must be null or point to a `SopGenParams`; `out` must be null
/// or writable.
#[no_mangle]
pub unsafe extern "C" fn sop_schedule_generate(params: *const SopGenParams, out: *mut *mut SopSchedule) -> SopStatus {
    guard(|| {
        let p = non_null(params, "params")?;
        if out.is_null() {
            return Err(Failure(SopStatus::NullArgument, "out is null".into()));
        }
        let setup = match p.setup {
            SopSetup::I => Setup::I,
            SopSetup::II => Setup::II,
            SopSetup::III => Setup::III,
        };
        let cfg = GenConfig {
            seed: p.seed,
            pool_size: p.pool_size as usize,
            vehicles: p.vehicles as usize,
            setup,
            ..GenConfig::default()
        };
        let bad = |e: String| Failure(SopStatus::InvalidArgument, e);
        let instance = generate_instance(&cfg).map_err(|e| bad(e.to_string()))?;
        let scenario = if p.optimized { Scenario::Optimized } else { Scenario::NonOptimized };
        let traj = fill_schedule(&instance, scenario);
        let inner = snapshot_at_fill(&instance, &traj, p.fill).map_err(|e| bad(e.to_string()))?;
        // SAFETY: checked non-null.
        unsafe { *out = Box::into_raw(Box::new(SopSchedule { inner })) };
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `schedule` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sop_schedule_free(schedule: *mut SopSchedule) {
    if !schedule.is_null() {
        // SAFETY: handle came from Box::into_raw and is freed once.
        drop(unsafe { Box::from_raw(schedule) });
    }
}

/// Number of time windows; 0 for a null handle.
///
/// # Safety
/// `schedule` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sop_schedule_window_count(schedule: *const SopSchedule) -> usize {
    // SAFETY: null or live per contract.
    unsafe { schedule.as_ref() }.map_or(0, |s| s.inner.context().windows().len())
}

/// Number of scheduled orders; 0 for a null handle.
///
/// # Safety
/// `schedule` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sop_schedule_order_count(schedule: *const SopSchedule) -> usize {
    // SAFETY: null or live per contract.
    unsafe { schedule.as_ref() }.map_or(0, |s| s.inner.order_count())
}

/// Number of tours; 0 for a null handle.
///
/// # Safety
/// `schedule` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sop_schedule_tour_count(schedule: *const SopSchedule) -> usize {
    // SAFETY: null or live per contract.
    unsafe { schedule.as_ref() }.map_or(0, |s| s.inner.len())
}

/// Decides every window for `order`. `verdicts[w]` receives the verdict for
/// window id `w`; `available` (optional) the number of available windows.
///
/// # Safety
/// `verdicts` must hold `len` writable elements; other pointers null or
/// valid.
#[no_mangle]
pub unsafe extern "C" fn sop_solve(
    schedule: *const SopSchedule,
    order: *const SopOrder,
    method: SopMethod,
    verdicts: *mut SopVerdict,
    len: usize,
    available: *mut usize,
) -> SopStatus {
    guard(|| {
        let s = &non_null(schedule, "schedule")?.inner;
        let o = non_null(order, "order")?;
        if verdicts.is_null() {
            return Err(Failure(SopStatus::NullArgument, "verdicts is null".into()));
        }
        let q = s.context().windows().len();
        if len < q {
            return Err(Failure(SopStatus::BufferTooSmall, format!("need room for {q} verdicts, got {len}")));
        }
        let query = SlotQuery::new(s, to_order(o)).map_err(query_failure)?;
        let result = Solvers::default().solve(&query, method.into());
        // SAFETY: `verdicts` holds at least `q` elements.
        let out = unsafe { std::slice::from_raw_parts_mut(verdicts, q) };
        for o in &result.outcomes {
            out[o.window.0 as usize] = match o.verdict {
                Verdict::Available(_) => SopVerdict::Available,
                Verdict::Unavailable => SopVerdict::Unavailable,
                Verdict::Undecided(_) => SopVerdict::Undecided,
            };
        }
        if !available.is_null() {
            // SAFETY: checked non-null.
            unsafe { *available = result.available().len() };
        }
        Ok(())
    })
}

/// Books `order` into `window` if `method` finds room, rearranging other
/// orders as the method's witness prescribes. Returns `Unavailable` and
/// leaves the schedule untouched otherwise.
///
/// # Safety
/// `schedule` must be a live handle not shared with another thread during
/// the call; `order` null or valid.
#[no_mangle]
pub unsafe extern "C" fn sop_schedule_commit(
    schedule: *mut SopSchedule,
    order: *const SopOrder,
    method: SopMethod,
    window: u32,
) -> SopStatus {
    guard(|| {
        // SAFETY: null or live and exclusive per contract.
        let handle = unsafe { schedule.as_mut() }
            .ok_or_else(|| Failure(SopStatus::NullArgument, "schedule is null".into()))?;
        let o = to_order(non_null(order, "order")?);
        let w = WindowId(window);
        let query = SlotQuery::with_windows(&handle.inner, o, vec![w]).map_err(query_failure)?;
        let result = Solvers::default().solve(&query, method.into());
        let Some(witness) = result.witness(w) else {
            return Err(Failure(SopStatus::Unavailable, format!("window {window} is not available")));
        };
        let next = commit(&handle.inner, &o, w, witness).map_err(|e| Failure(SopStatus::Internal, e.to_string()))?;
        handle.inner = next;
        Ok(())
    })
}

/// Serializes the schedule. `needed` receives the size including the
/// terminating NUL; when `buf` is null or `cap` too small nothing is written
/// and `BufferTooSmall` is returned.
///
/// # Safety
/// `buf` must be null or hold `cap` writable bytes; `needed` null or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn sop_schedule_write(
    schedule: *const SopSchedule,
    buf: *mut c_char,
    cap: usize,
    needed: *mut usize,
) -> SopStatus {
    guard(|| {
        let s = &non_null(schedule, "schedule")?.inner;
        let text = write_schedule(s).map_err(|e| Failure(SopStatus::InvalidArgument, e.to_string()))?;
        let n = text.len() + 1;
        if !needed.is_null() {
            // SAFETY: checked non-null.
            unsafe { *needed = n };
        }
        if buf.is_null() || cap < n {
            return Err(Failure(SopStatus::BufferTooSmall, format!("need {n} bytes, got {cap}")));
        }
        // SAFETY: `buf` holds at least `n` bytes.
        unsafe {
            ptr::copy_nonoverlapping(text.as_ptr().cast::<c_char>(), buf, text.len());
            *buf.add(text.len()) = 0;
        }
        Ok(())
    })
}
