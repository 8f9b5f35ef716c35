//! C ABI over the goldmitch divider model.
//!
//! Handles are opaque and owned by the caller; release them with the
//! matching `*_free`. Fallible calls return a [`GmStatus`]. On failure the
//! message is kept per thread and can be copied out with [`gm_last_error`].
//! Operands cross the boundary as `int64_t`, so register widths above 64
//! are only reachable from Rust.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use goldmitch::cyclesim::{run_cycles, FsmState, Simulator};
use goldmitch::{divide, DividerConfig, Error, MultiplierStrategy, SignedInput, SignedQuotient};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GmStatus {
    Ok = 0,
    NullPointer = 1,
    ZeroDivisor = 2,
    /// Quotient too large for the output port.
    Overflow = 3,
    InvalidConfig = 4,
    /// Operand wider than its port, or a result part wider than 64 bits.
    OutOfRange = 5,
    /// No quotient has been latched yet.
    NotReady = 6,
    Internal = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GmStrategy {
    Exact = 0,
    MitchellCorrected = 1,
    MitchellUncorrected = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GmConfig {
    pub width_dividend: u32,
    pub width_divisor: u32,
    pub extension: u32,
    pub width_quo: u32,
    /// Output fraction bits plus one.
    pub width_fra: u32,
    pub iterations: u32,
    /// A `GmStrategy` value.
    pub strategy: u32,
}

/// Sign-magnitude quotient: `(int_part + frac_part / 2^frac_bits)`, negated
/// when `negative`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GmQuotient {
    pub negative: bool,
    pub int_part: u64,
    pub frac_part: u64,
    pub int_bits: u32,
    pub frac_bits: u32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GmFsmState {
    Idle = 0,
    Sign = 1,
    Coeff = 2,
    Mult = 3,
    Out = 4,
}

/// One simulated clock cycle.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GmCycle {
    pub cycle: u64,
    pub state: GmFsmState,
    /// Iteration number for COEFF/MULT states, 0 otherwise.
    pub iteration: u32,
    /// `en[3:0]`
    pub en: u8,
    pub start: bool,
}

/// Opaque divider configuration handle.
pub struct GmDivider {
    cfg: DividerConfig,
}

/// Opaque clocked-simulator handle.
pub struct GmSimulator {
    sim: Simulator,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn fail(status: GmStatus, message: impl Into<String>) -> GmStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = message.into());
    status
}

fn status_of(e: &Error) -> GmStatus {
    match e {
        Error::ZeroDivisor => GmStatus::ZeroDivisor,
        Error::Overflow { .. } => GmStatus::Overflow,
        Error::InvalidConfig(_) | Error::InvalidFormat(_) => GmStatus::InvalidConfig,
        Error::OutOfRange { .. } => GmStatus::OutOfRange,
        Error::ZeroOperand | Error::Negative => GmStatus::Internal,
    }
}

type Outcome = Result<(), GmStatus>;

trait OrFail<T> {
    fn or_fail(self) -> Result<T, GmStatus>;
}

impl<T> OrFail<T> for goldmitch::Result<T> {
    fn or_fail(self) -> Result<T, GmStatus> {
        self.map_err(|e| fail(status_of(&e), e.to_string()))
    }
}

fn guarded(body: impl FnOnce() -> Outcome) -> GmStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => GmStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(GmStatus::Internal, "panic inside goldmitch"),
    }
}

unsafe fn require<'a, T>(p: *const T, what: &str) -> Result<&'a T, GmStatus> {
    p.as_ref()
        .ok_or_else(|| fail(GmStatus::NullPointer, format!("{what} is null")))
}

unsafe fn require_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, GmStatus> {
    p.as_mut()
        .ok_or_else(|| fail(GmStatus::NullPointer, format!("{what} is null")))
}

fn strategy_from(code: u32) -> Result<MultiplierStrategy, GmStatus> {
    match code {
        c if c == GmStrategy::Exact as u32 => Ok(MultiplierStrategy::Exact),
        c if c == GmStrategy::MitchellCorrected as u32 => Ok(MultiplierStrategy::MitchellCorrected),
        c if c == GmStrategy::MitchellUncorrected as u32 => {
            Ok(MultiplierStrategy::MitchellUncorrected)
        }
        c => Err(fail(
            GmStatus::InvalidConfig,
            format!("unknown strategy {c}"),
        )),
    }
}

fn strategy_to(s: MultiplierStrategy) -> GmStrategy {
    match s {
        MultiplierStrategy::Exact => GmStrategy::Exact,
        MultiplierStrategy::MitchellCorrected => GmStrategy::MitchellCorrected,
        MultiplierStrategy::MitchellUncorrected => GmStrategy::MitchellUncorrected,
    }
}

fn quotient_out(q: &SignedQuotient) -> Result<GmQuotient, GmStatus> {
    let wide = |name: &str| fail(GmStatus::OutOfRange, format!("{name} wider than 64 bits"));
    Ok(GmQuotient {
        negative: q.sign,
        int_part: u64::try_from(&q.int_part).map_err(|_| wide("integer part"))?,
        frac_part: u64::try_from(&q.frac_part).map_err(|_| wide("fraction part"))?,
        int_bits: q.int_bits,
        frac_bits: q.frac_bits,
    })
}

fn operands(
    cfg: &DividerConfig,
    dividend: i64,
    divisor: i64,
) -> Result<(SignedInput, SignedInput), GmStatus> {
    Ok((
        cfg.dividend(dividend as i128).or_fail()?,
        cfg.divisor(divisor as i128).or_fail()?,
    ))
}

/// The default configuration: 32-bit ports, 32 extension bits, four
/// iterations on corrected Mitchell multipliers.
#[no_mangle]
pub extern "C" fn gm_config_default() -> GmConfig {
    let d = DividerConfig::default();
    GmConfig {
        width_dividend: d.width_dividend,
        width_divisor: d.width_divisor,
        extension: d.extension,
        width_quo: d.width_quo,
        width_fra: d.width_fra,
        iterations: d.iterations,
        strategy: strategy_to(d.strategy) as u32,
    }
}

/// Validates `config` and stores a new divider handle in `*out`.
///
/// # Safety
/// `config` must point to a valid `GmConfig` and `out` to writable storage.
#[no_mangle]
pub unsafe extern "C" fn gm_divider_new(
    config: *const GmConfig,
    out: *mut *mut GmDivider,
) -> GmStatus {
    guarded(|| {
        let c = require(config, "config")?;
        let out = require_mut(out, "out")?;
        let cfg = DividerConfig {
            width_dividend: c.width_dividend,
            width_divisor: c.width_divisor,
            extension: c.extension,
            width_quo: c.width_quo,
            width_fra: c.width_fra,
            iterations: c.iterations,
            strategy: strategy_from(c.strategy)?,
        };
        cfg.validate().or_fail()?;
        *out = Box::into_raw(Box::new(GmDivider { cfg }));
        Ok(())
    })
}

/// # Safety
/// `divider` must come from `gm_divider_new` and not be freed twice. Null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn gm_divider_free(divider: *mut GmDivider) {
    if !divider.is_null() {
        drop(Box::from_raw(divider));
    }
}

/// Behavioral division.
///
/// # Safety
/// `divider` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gm_divide(
    divider: *const GmDivider,
    dividend: i64,
    divisor: i64,
    out: *mut GmQuotient,
) -> GmStatus {
    guarded(|| {
        let d = require(divider, "divider")?;
        let out = require_mut(out, "out")?;
        let (a, b) = operands(&d.cfg, dividend, divisor)?;
        *out = quotient_out(&divide(a, b, &d.cfg).or_fail()?)?;
        Ok(())
    })
}

/// Runs one division through the clocked model. `cycles` may be null;
/// otherwise it receives the cycle count from start pulse to output.
///
/// # Safety
/// `divider` must be a live handle, `out` writable, `cycles` null or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn gm_run_cycles(
    divider: *const GmDivider,
    dividend: i64,
    divisor: i64,
    out: *mut GmQuotient,
    cycles: *mut u32,
) -> GmStatus {
    guarded(|| {
        let d = require(divider, "divider")?;
        let out = require_mut(out, "out")?;
        let (a, b) = operands(&d.cfg, dividend, divisor)?;
        let (q, trace) = run_cycles(a, b, &d.cfg).or_fail()?;
        *out = quotient_out(&q)?;
        if let Some(c) = cycles.as_mut() {
            *c = trace.len() as u32;
        }
        Ok(())
    })
}

/// Nearest double to the quotient.
#[no_mangle]
pub extern "C" fn gm_quotient_to_f64(q: GmQuotient) -> f64 {
    let mag = q.int_part as f64 + q.frac_part as f64 / 2f64.powi(q.frac_bits as i32);
    if q.negative {
        -mag
    } else {
        mag
    }
}

/// Creates a simulator in reset, using the divider's configuration.
///
/// # Safety
/// `divider` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gm_simulator_new(
    divider: *const GmDivider,
    out: *mut *mut GmSimulator,
) -> GmStatus {
    guarded(|| {
        let d = require(divider, "divider")?;
        let out = require_mut(out, "out")?;
        let sim = Simulator::new(d.cfg).or_fail()?;
        *out = Box::into_raw(Box::new(GmSimulator { sim }));
        Ok(())
    })
}

/// # Safety
/// `sim` must come from `gm_simulator_new` and not be freed twice. Null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn gm_simulator_free(sim: *mut GmSimulator) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Drives the input ports for one cycle and takes the clock edge. `out` may
/// be null.
///
/// # Safety
/// `sim` must be a live handle, `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn gm_simulator_clock(
    sim: *mut GmSimulator,
    dividend: i64,
    divisor: i64,
    out: *mut GmCycle,
) -> GmStatus {
    guarded(|| {
        let s = require_mut(sim, "sim")?;
        let (a, b) = operands(s.sim.config(), dividend, divisor)?;
        let rec = s.sim.clock(a, b).or_fail()?;
        if let Some(out) = out.as_mut() {
            let (state, iteration) = match rec.state {
                FsmState::Idle => (GmFsmState::Idle, 0),
                FsmState::Sign => (GmFsmState::Sign, 0),
                FsmState::Coeff(i) => (GmFsmState::Coeff, i),
                FsmState::Mult(i) => (GmFsmState::Mult, i),
                FsmState::Out => (GmFsmState::Out, 0),
            };
            *out = GmCycle {
                cycle: rec.cycle,
                state,
                iteration,
                en: rec.en.bits(),
                start: rec.start,
            };
        }
        Ok(())
    })
}

/// Copies the latched quotient, or returns `NotReady`.
///
/// # Safety
/// `sim` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gm_simulator_output(
    sim: *const GmSimulator,
    out: *mut GmQuotient,
) -> GmStatus {
    guarded(|| {
        let s = require(sim, "sim")?;
        let out = require_mut(out, "out")?;
        let q = s
            .sim
            .output()
            .ok_or_else(|| fail(GmStatus::NotReady, "no quotient latched yet"))?;
        *out = quotient_out(q)?;
        Ok(())
    })
}

/// Copies the calling thread's last error message into `buf` (truncated,
/// always NUL-terminated when `len > 0`). Returns the full message length
/// without the terminator.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn gm_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Static name of a status code, e.g. `"ZERO_DIVISOR"`.
#[no_mangle]
pub extern "C" fn gm_status_name(status: GmStatus) -> *const c_char {
    let name: &'static CStr = match status {
        GmStatus::Ok => c"OK",
        GmStatus::NullPointer => c"NULL_POINTER",
        GmStatus::ZeroDivisor => c"ZERO_DIVISOR",
        GmStatus::Overflow => c"OVERFLOW",
        GmStatus::InvalidConfig => c"INVALID_CONFIG",
        GmStatus::OutOfRange => c"OUT_OF_RANGE",
        GmStatus::NotReady => c"NOT_READY",
        GmStatus::Internal => c"INTERNAL",
    };
    name.as_ptr()
}
