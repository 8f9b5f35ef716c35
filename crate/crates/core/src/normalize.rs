//! Leading-one detection and the normalization / auxiliary shifters.
//!
//! The shifters scan a register from the MSB for its first set bit. The
//! shift counts they hand on follow the hardware formulas; the scan count is
//! taken to include the leading one itself (1-based), which is the reading
//! under which those formulas place the divisor in [0.5, 1) and give the
//! right `k`/`sub`.

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::fxp::{DividerConfig, FxValue};

/// Result of scanning one register for its leading one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShiftInfo {
    /// Bit index of the most significant set bit (0 = LSB), `None` for zero.
    pub leading_one_index: Option<u32>,
    /// Zeros above the leading one (`width - 1 - index`), or `width` for zero.
    pub shift_length_r: u32,
    /// Auxiliary shifter output, `width_num + extension - (shift_length_r + 1) + 1`.
    pub shift_length_num: i64,
    /// Register width that was scanned.
    pub width: u32,
}

/// Scans a `width`-bit register.
pub fn leading_one_raw(raw: &BigUint, width: u32) -> ShiftInfo {
    let bits = raw.bits() as u32;
    debug_assert!(bits <= width, "raw value wider than its register");
    if bits == 0 {
        return ShiftInfo {
            leading_one_index: None,
            shift_length_r: width,
            shift_length_num: 0,
            width,
        };
    }
    let index = bits - 1;
    let shift_length_r = width - 1 - index;
    ShiftInfo {
        leading_one_index: Some(index),
        shift_length_r,
        shift_length_num: width as i64 - (shift_length_r as i64 + 1) + 1,
        width,
    }
}

pub fn leading_one(v: &FxValue) -> ShiftInfo {
    leading_one_raw(v.raw(), v.format().width())
}

/// Characteristic `k` and sub-unit shift `sub` of a nonzero value:
/// `2^k <= v < 2^(k+1)` when `v >= 1`, else `2^-sub <= v < 2^(1-sub)`.
pub fn count_k_sub(v: &FxValue) -> Result<(u32, u32)> {
    let info = leading_one(v);
    if info.leading_one_index.is_none() {
        return Err(Error::ZeroOperand);
    }
    let extension = v.format().frac_bits() as i64;
    let k = info.shift_length_num - extension - 1;
    let sub = extension - info.shift_length_num + 1;
    Ok((k.max(0) as u32, sub.max(0) as u32))
}

/// Output of the normalization shifter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Normalized {
    pub dividend_fix: FxValue,
    pub divisor_fix: FxValue,
    /// Left shift applied to both integer inputs (negative = right shift).
    pub shift: i64,
}

/// Shifts the divisor into [0.5, 1) and the dividend by the same amount.
pub fn normalize_pair(
    dividend_unsigned: u128,
    divisor_unsigned: u128,
    cfg: &DividerConfig,
) -> Result<Normalized> {
    if divisor_unsigned == 0 {
        return Err(Error::ZeroDivisor);
    }
    let fmt = cfg.internal_format()?;
    let divisor = BigUint::from(divisor_unsigned);
    if divisor.bits() > cfg.width_divisor as u64 {
        return Err(Error::Overflow {
            needed: divisor.bits(),
            available: cfg.width_divisor,
        });
    }
    let info = leading_one_raw(&divisor, cfg.width_divisor);
    let shift =
        cfg.extension as i64 - cfg.width_divisor as i64 + (info.shift_length_r as i64 + 1) - 1;
    Ok(Normalized {
        dividend_fix: FxValue::from_shifted(&BigUint::from(dividend_unsigned), shift, fmt)?,
        divisor_fix: FxValue::from_shifted(&divisor, shift, fmt)?,
        shift,
    })
}
