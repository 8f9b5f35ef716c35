//! Behavioral Goldschmidt division engine.
//!
//! With the divisor normalized into [0.5, 1), each step multiplies numerator
//! and denominator by `m = 2 - b`; the denominator converges quadratically to
//! one and the numerator to the quotient. Which multiplier fills the two
//! multiplier slots is pluggable so the Mitchell error can be separated from
//! the convergence error.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::One;

use crate::error::{Error, Result};
use crate::fxp::{
    input_sign_convert, output_sign_convert, DividerConfig, FxFormat, FxValue, SignSplit,
    SignedInput, SignedQuotient,
};
use crate::mitchell::{mitchell_multiply, MultMode};
use crate::normalize::{normalize_pair, Normalized};

/// Multiplier placed in the iteration unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultiplierStrategy {
    /// Full-width product truncated to the register; the reference baseline.
    Exact,
    MitchellCorrected,
    MitchellUncorrected,
}

impl MultiplierStrategy {
    pub const ALL: [MultiplierStrategy; 3] = [
        MultiplierStrategy::Exact,
        MultiplierStrategy::MitchellCorrected,
        MultiplierStrategy::MitchellUncorrected,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            MultiplierStrategy::Exact => "exact",
            MultiplierStrategy::MitchellCorrected => "mitchell_corrected",
            MultiplierStrategy::MitchellUncorrected => "mitchell_uncorrected",
        }
    }

    /// Truncating product of two registers of format `fmt`.
    pub fn multiply(&self, a: &FxValue, b: &FxValue, fmt: FxFormat) -> Result<FxValue> {
        match self {
            MultiplierStrategy::Exact => {
                let shift = a.format().frac_bits() as i64 + b.format().frac_bits() as i64
                    - fmt.frac_bits() as i64;
                FxValue::from_shifted(&(a.raw() * b.raw()), -shift, fmt)
            }
            MultiplierStrategy::MitchellCorrected => {
                mitchell_multiply(a, b, MultMode::Corrected, fmt)
            }
            MultiplierStrategy::MitchellUncorrected => {
                mitchell_multiply(a, b, MultMode::Uncorrected, fmt)
            }
        }
    }
}

impl fmt::Display for MultiplierStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MultiplierStrategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| {
                format!("unknown strategy {s:?} (expected exact, mitchell_corrected or mitchell_uncorrected)")
            })
    }
}

/// Numerator, denominator and last coefficient after `s` iterations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldschmidtState {
    pub a: FxValue,
    pub b: FxValue,
    /// One before the first iteration.
    pub m: FxValue,
    pub s: u32,
}

impl GoldschmidtState {
    pub fn initial(dividend_fix: FxValue, divisor_fix: FxValue) -> Self {
        let m = FxValue::one(divisor_fix.format());
        GoldschmidtState {
            a: dividend_fix,
            b: divisor_fix,
            m,
            s: 0,
        }
    }
}

/// `m = 2 - b`, exact.
pub fn iteration_coefficient(b: &FxValue) -> Result<FxValue> {
    let two = b.format().one_raw() << 1u32;
    if b.raw() >= &two {
        return Err(Error::InvalidFormat(format!(
            "coefficient operand {b} is not below 2"
        )));
    }
    FxValue::new(two - b.raw(), b.format())
}

pub fn iterate_once(
    st: &GoldschmidtState,
    strategy: MultiplierStrategy,
    fmt: FxFormat,
) -> Result<GoldschmidtState> {
    let m = iteration_coefficient(&st.b)?;
    let a = strategy.multiply(&m, &st.a, fmt)?;
    let b = strategy.multiply(&m, &st.b, fmt)?;
    Ok(GoldschmidtState {
        a,
        b,
        m,
        s: st.s + 1,
    })
}

/// All states from the normalized pair through `cfg.iterations`.
pub fn iterate(normalized: &Normalized, cfg: &DividerConfig) -> Result<Vec<GoldschmidtState>> {
    let fmt = cfg.internal_format()?;
    let mut states = Vec::with_capacity(cfg.iterations as usize + 1);
    let mut st = GoldschmidtState::initial(
        normalized.dividend_fix.clone(),
        normalized.divisor_fix.clone(),
    );
    for _ in 0..cfg.iterations {
        let next = iterate_once(&st, cfg.strategy, fmt)?;
        states.push(std::mem::replace(&mut st, next));
    }
    states.push(st);
    Ok(states)
}

/// Every intermediate of one division.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Division {
    pub split: SignSplit,
    pub normalized: Normalized,
    pub states: Vec<GoldschmidtState>,
    pub quotient: SignedQuotient,
}

impl Division {
    /// Final numerator register, before output truncation.
    pub fn magnitude(&self) -> &FxValue {
        &self.states.last().expect("at least the initial state").a
    }
}

pub fn divide_detailed(
    dividend: SignedInput,
    divisor: SignedInput,
    cfg: &DividerConfig,
) -> Result<Division> {
    cfg.validate()?;
    check_width(dividend, cfg.width_dividend)?;
    check_width(divisor, cfg.width_divisor)?;
    let split = input_sign_convert(dividend, divisor);
    let normalized = normalize_pair(split.dividend_unsigned, split.divisor_unsigned, cfg)?;
    let states = iterate(&normalized, cfg)?;
    let last = &states.last().expect("non-empty").a;
    let quotient = output_sign_convert(last, split.sign, cfg)?;
    Ok(Division {
        split,
        normalized,
        states,
        quotient,
    })
}

pub(crate) fn check_width(input: SignedInput, width: u32) -> Result<()> {
    if input.width() > width {
        SignedInput::new(input.value(), width)?;
    }
    Ok(())
}

/// Signed division through the full datapath.
pub fn divide(
    dividend: SignedInput,
    divisor: SignedInput,
    cfg: &DividerConfig,
) -> Result<SignedQuotient> {
    divide_detailed(dividend, divisor, cfg).map(|d| d.quotient)
}

/// Relative error bound after `s` exact iterations, `2^-(2^s)`.
pub fn error_bound(s: u32) -> BigRational {
    assert!(s < 32, "iteration count {s} too large for the closed form");
    BigRational::new(BigInt::one(), BigInt::from(BigUint::one() << (1u64 << s)))
}
