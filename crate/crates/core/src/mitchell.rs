//! Mitchell logarithmic multiplication.
//!
//! An operand is split as `N = 2^k (1 + x) 2^-sub`, so `log2 N ~ k - sub + x`.
//! Products add the characteristics and mantissa fractions; the optional
//! correction term recovers the dropped `x_N x_M` (or `x'_N x'_M`) product
//! using one nested uncorrected multiplication.

use num_bigint::BigUint;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::fxp::{shift_raw, FxFormat, FxValue};
use crate::normalize::{count_k_sub, leading_one};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultMode {
    Uncorrected,
    Corrected,
}

/// Logarithmic form of one nonzero operand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MitchellDecomposition {
    pub k: u32,
    pub sub: u32,
    /// Mantissa fraction, in [0, 1).
    pub x: FxValue,
    /// `1 - x`.
    pub x_complement: FxValue,
}

impl MitchellDecomposition {
    /// Signed binary exponent `k - sub`.
    pub fn exponent(&self) -> i64 {
        self.k as i64 - self.sub as i64
    }

    fn frac_bits(&self) -> u32 {
        self.x.format().frac_bits()
    }
}

/// Splits `v` into characteristic and mantissa fraction. The fraction is
/// truncated to `v`'s own fraction width.
pub fn decompose(v: &FxValue) -> Result<MitchellDecomposition> {
    let (k, sub) = count_k_sub(v)?;
    let fmt = v.format();
    let index = leading_one(v).leading_one_index.ok_or(Error::ZeroOperand)?;
    let below = v.raw() - (BigUint::from(1u32) << index);
    let align = fmt.frac_bits() as i64 - index as i64;
    let x_raw = shift_raw(&below, align);
    let x_complement = fmt.one_raw() - &x_raw;
    Ok(MitchellDecomposition {
        k,
        sub,
        x: FxValue::new(x_raw, fmt)?,
        x_complement: FxValue::new(x_complement, fmt)?,
    })
}

/// `2^exp * mant / 2^F` before the sub-unit shift, per the carry of
/// `x_N + x_M`. Returns `(mant, exp, carried)`.
fn log_sum(n: &MitchellDecomposition, m: &MitchellDecomposition) -> (BigUint, i64, bool) {
    debug_assert_eq!(n.frac_bits(), m.frac_bits());
    let one = n.x.format().one_raw();
    let sum = n.x.raw() + m.x.raw();
    let k = n.k as i64 + m.k as i64;
    if sum < one {
        (one + sum, k, false)
    } else {
        (sum, k + 1, true)
    }
}

/// Uncorrected Mitchell product, `2^(kN+kM) (1 + xN + xM)` or
/// `2^(kN+kM+1) (xN + xM)`, shifted right by `subN + subM`.
pub fn approx_product_raw(
    n: &MitchellDecomposition,
    m: &MitchellDecomposition,
    fmt: FxFormat,
) -> Result<FxValue> {
    let (mant, exp, _) = log_sum(n, m);
    let shift = exp - (n.sub + m.sub) as i64 + fmt.frac_bits() as i64 - n.frac_bits() as i64;
    FxValue::from_shifted(&mant, shift, fmt)
}

/// The term the uncorrected product drops, itself estimated with one
/// uncorrected multiplication of the (sub-unit) fractions. Not yet shifted
/// by `subN + subM`.
pub fn correction_term(
    n: &MitchellDecomposition,
    m: &MitchellDecomposition,
    fmt: FxFormat,
) -> Result<FxValue> {
    let (_, _, carried) = log_sum(n, m);
    let (p, q) = if carried {
        (&n.x_complement, &m.x_complement)
    } else {
        (&n.x, &m.x)
    };
    if p.is_zero() || q.is_zero() {
        return Ok(FxValue::zero(fmt));
    }
    // Both fractions are below one, so only their `sub` matters.
    let inner = approx_product_raw(&decompose(p)?, &decompose(q)?, fmt)?;
    FxValue::from_shifted(inner.raw(), n.k as i64 + m.k as i64, fmt)
}

/// Mitchell product of two unsigned values, truncated into `fmt`.
pub fn mitchell_multiply(
    a: &FxValue,
    b: &FxValue,
    mode: MultMode,
    fmt: FxFormat,
) -> Result<FxValue> {
    if a.is_zero() || b.is_zero() {
        return Ok(FxValue::zero(fmt));
    }
    let n = decompose(&a.convert(fmt)?)?;
    let m = decompose(&b.convert(fmt)?)?;
    match mode {
        MultMode::Uncorrected => approx_product_raw(&n, &m, fmt),
        MultMode::Corrected => {
            // 2^k_NM (1 + x_NM) is exactly the uncorrected mantissa/exponent pair.
            let (mant, exp, _) = log_sum(&n, &m);
            let primary = mant << exp as u64;
            let c = correction_term(&n, &m, fmt)?;
            let total = primary + c.raw();
            FxValue::from_shifted(&total, -((n.sub + m.sub) as i64), fmt)
        }
    }
}

/// Log-subtraction division: `2^(eN-eM) (1 + xN - xM)`, borrowing one from
/// the exponent when `xN < xM`.
pub fn mitchell_divide_direct(a: &FxValue, b: &FxValue, fmt: FxFormat) -> Result<FxValue> {
    if b.is_zero() {
        return Err(Error::ZeroDivisor);
    }
    if a.is_zero() {
        return Ok(FxValue::zero(fmt));
    }
    let n = decompose(&a.convert(fmt)?)?;
    let m = decompose(&b.convert(fmt)?)?;
    let one = fmt.one_raw();
    let exp = n.exponent() - m.exponent();
    let (mant, exp) = if n.x.raw() >= m.x.raw() {
        (one + n.x.raw() - m.x.raw(), exp)
    } else {
        ((one << 1u32) + n.x.raw() - m.x.raw(), exp - 1)
    };
    debug_assert!(!mant.is_zero());
    FxValue::from_shifted(&mant, exp, fmt)
}
