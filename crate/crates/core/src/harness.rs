//! Exact-rational oracle, error statistics and the reference sweeps.
//!
//! Nothing on the oracle side touches floating point: expected quotients
//! and products are `BigRational`s and relative errors are formed exactly.
//! `f64` only appears in the summary statistics handed to reports.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fxp::{decode, DividerConfig, FxFormat, FxValue, SignedQuotient};
use crate::goldschmidt::divide;
use crate::mitchell::{decompose, mitchell_divide_direct, mitchell_multiply, MultMode};

/// Identity of the sweep generator. Part of the reproducibility contract:
/// the same seed must give the same pairs in any implementation.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha 0.3, SeedableRng::seed_from_u64)";

/// Fraction width used by the exhaustive multiplier sweeps.
pub const MULT_SWEEP_EXTENSION: u32 = 32;

pub fn exact_quotient(dividend: i128, divisor: i128) -> Result<BigRational> {
    if divisor == 0 {
        return Err(Error::ZeroDivisor);
    }
    Ok(BigRational::new(dividend.into(), divisor.into()))
}

/// `|approx - exact| / |exact|`, or `|approx|` when `exact` is zero.
pub fn relative_error(approx: &BigRational, exact: &BigRational) -> BigRational {
    let diff = (approx - exact).abs();
    if exact.is_zero() {
        diff
    } else {
        diff / exact.abs()
    }
}

/// One reference division with the published figures attached.
#[derive(Debug, Clone, PartialEq)]
pub struct TestCase {
    pub dividend: i128,
    pub divisor: i128,
    pub expected_quotient: BigRational,
    pub published_computed: Option<f64>,
    /// Percent.
    pub published_rel_err: Option<f64>,
}

/// The eight calculation examples of the reference on-board test.
pub fn table1_cases() -> Vec<TestCase> {
    const MAX: i128 = (1 << 31) - 1;
    [
        (-17, 35, -0.4868, 0.22),
        (53, 11, 4.8253, 0.14),
        (345, 4252, 0.0812, 0.10),
        (2741, 67, 40.9342, 0.05),
        (34242, 5567, 6.1759, 0.40),
        (89230293, 432424, 206.7367, 0.18),
        (MAX, 947483647, 2.2685, 0.08),
        (MAX, -47483647, -45.4989, 0.60),
    ]
    .into_iter()
    .map(|(dividend, divisor, computed, err)| TestCase {
        dividend,
        divisor,
        expected_quotient: exact_quotient(dividend, divisor).expect("nonzero divisor"),
        published_computed: Some(computed),
        published_rel_err: Some(err),
    })
    .collect()
}

/// One evaluated case.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseRecord {
    pub dividend: i128,
    pub divisor: i128,
    pub exact: BigRational,
    pub computed: BigRational,
    pub rel_err: BigRational,
}

/// Summary over a set of cases.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub count: u64,
    pub max_rel_err: f64,
    pub mean_rel_err: f64,
    pub p99_rel_err: f64,
    /// The maximum without rounding.
    pub max_rel_err_exact: BigRational,
    /// First pair that attained the maximum. For multiplier sweeps this is
    /// the operand pair.
    pub worst_case: Option<(i128, i128)>,
    pub records: Vec<CaseRecord>,
}

/// Streaming builder for [`ErrorReport`]; `merge` is associative so partial
/// sweeps can be combined.
#[derive(Debug, Clone)]
pub struct ErrorAccumulator {
    keep_records: bool,
    errors: Vec<f64>,
    sum: f64,
    max: BigRational,
    worst: Option<(i128, i128)>,
    records: Vec<CaseRecord>,
}

impl ErrorAccumulator {
    pub fn new(keep_records: bool) -> Self {
        ErrorAccumulator {
            keep_records,
            errors: Vec::new(),
            sum: 0.0,
            max: BigRational::zero(),
            worst: None,
            records: Vec::new(),
        }
    }

    pub fn push(&mut self, lhs: i128, rhs: i128, exact: BigRational, computed: BigRational) {
        let err = relative_error(&computed, &exact);
        let e = err.to_f64().unwrap_or(f64::INFINITY);
        self.errors.push(e);
        self.sum += e;
        if self.worst.is_none() || err > self.max {
            self.max = err.clone();
            self.worst = Some((lhs, rhs));
        }
        if self.keep_records {
            self.records.push(CaseRecord {
                dividend: lhs,
                divisor: rhs,
                exact,
                computed,
                rel_err: err,
            });
        }
    }

    /// Appends `other`; ties on the maximum keep `self`'s worst case.
    pub fn merge(&mut self, other: ErrorAccumulator) {
        if other.worst.is_some() && (self.worst.is_none() || other.max > self.max) {
            self.max = other.max;
            self.worst = other.worst;
        }
        self.errors.extend(other.errors);
        self.sum += other.sum;
        self.records.extend(other.records);
    }

    pub fn finish(self) -> ErrorReport {
        let n = self.errors.len();
        let mut sorted = self.errors;
        sorted.sort_by(|a, b| a.total_cmp(b));
        let p99 = if n == 0 {
            0.0
        } else {
            sorted[(n * 99).div_ceil(100).max(1) - 1]
        };
        ErrorReport {
            count: n as u64,
            max_rel_err: self.max.to_f64().unwrap_or(f64::INFINITY),
            mean_rel_err: if n == 0 { 0.0 } else { self.sum / n as f64 },
            p99_rel_err: p99,
            max_rel_err_exact: self.max,
            worst_case: self.worst,
            records: self.records,
        }
    }
}

fn draw(rng: &mut ChaCha8Rng, width: u32) -> i128 {
    if width == 128 {
        rng.gen()
    } else {
        let half = 1i128 << (width - 1);
        rng.gen_range(-half..half)
    }
}

/// Whether `|q|` needs more than `width_quo` integer bits.
pub fn quotient_overflows(exact: &BigRational, cfg: &DividerConfig) -> bool {
    let int = exact.abs().to_integer();
    int.bits() > cfg.width_quo as u64
}

/// The `count` pseudo-random pairs a sweep evaluates. Zero divisors and
/// quotients that do not fit the output port are redrawn.
pub fn sweep_pairs(cfg: &DividerConfig, count: u64, seed: u64) -> Vec<(i128, i128)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(count as usize);
    while (pairs.len() as u64) < count {
        let a = draw(&mut rng, cfg.width_dividend);
        let b = draw(&mut rng, cfg.width_divisor);
        if b == 0 {
            continue;
        }
        if quotient_overflows(&BigRational::new(a.into(), b.into()), cfg) {
            continue;
        }
        pairs.push((a, b));
    }
    pairs
}

/// Divides `pairs` with the engine and collects errors against the oracle.
pub fn evaluate_pairs(
    cfg: &DividerConfig,
    pairs: &[(i128, i128)],
    keep_records: bool,
) -> Result<ErrorReport> {
    let mut acc = ErrorAccumulator::new(keep_records);
    for &(a, b) in pairs {
        let exact = exact_quotient(a, b)?;
        let q = divide(cfg.dividend(a)?, cfg.divisor(b)?, cfg)?;
        acc.push(a, b, exact, q.to_rational());
    }
    Ok(acc.finish())
}

/// Random accuracy sweep of the full divider.
pub fn sweep(cfg: &DividerConfig, count: u64, seed: u64) -> Result<ErrorReport> {
    cfg.validate()?;
    let pairs = sweep_pairs(cfg, count, seed);
    evaluate_pairs(cfg, &pairs, true)
}

/// Engine result for one reference case.
#[derive(Debug, Clone, PartialEq)]
pub struct Table1Row {
    pub case: TestCase,
    pub quotient: SignedQuotient,
    pub computed: BigRational,
    pub rel_err: BigRational,
}

pub fn run_table1(cfg: &DividerConfig) -> Result<Vec<Table1Row>> {
    table1_cases()
        .into_iter()
        .map(|case| {
            let q = divide(
                cfg.dividend(case.dividend)?,
                cfg.divisor(case.divisor)?,
                cfg,
            )?;
            let computed = q.to_rational();
            let rel_err = relative_error(&computed, &case.expected_quotient);
            Ok(Table1Row {
                case,
                quotient: q,
                computed,
                rel_err,
            })
        })
        .collect()
}

/// Format wide enough for every product of two `width`-bit integers.
pub fn mult_sweep_format(width: u32) -> Result<FxFormat> {
    FxFormat::new(2 * width + 1, MULT_SWEEP_EXTENSION)
}

fn check_exhaustive_width(width: u32) -> Result<()> {
    if width == 0 || width > 12 {
        return Err(Error::InvalidConfig(format!(
            "exhaustive operand width {width} outside 1..=12"
        )));
    }
    Ok(())
}

/// Multiplies every pair of nonzero `width`-bit integers with the Mitchell
/// multiplier and compares with the exact product.
pub fn mult_error_sweep(width: u32, mode: MultMode) -> Result<ErrorReport> {
    mult_error_sweep_filtered(width, mode, |_| true)
}

/// [`mult_error_sweep`] restricted to operands accepted by `keep`.
pub fn mult_error_sweep_filtered(
    width: u32,
    mode: MultMode,
    keep: impl Fn(u64) -> bool,
) -> Result<ErrorReport> {
    check_exhaustive_width(width)?;
    let fmt = mult_sweep_format(width)?;
    let operands: Vec<(u64, FxValue)> = (1u64..1 << width)
        .filter(|&v| keep(v))
        .map(|v| Ok((v, FxValue::from_integer(v, fmt)?)))
        .collect::<Result<_>>()?;
    let mut acc = ErrorAccumulator::new(false);
    for (a, fa) in &operands {
        for (b, fb) in &operands {
            let got = mitchell_multiply(fa, fb, mode, fmt)?;
            let exact = BigRational::from_integer(BigInt::from(a * b));
            acc.push(*a as i128, *b as i128, exact, decode(&got));
        }
    }
    Ok(acc.finish())
}

/// Exhaustive sweep of the log-subtraction divider over nonzero
/// `width`-bit integers.
pub fn direct_div_error_sweep(width: u32) -> Result<ErrorReport> {
    check_exhaustive_width(width)?;
    let fmt = mult_sweep_format(width)?;
    let operands: Vec<(u64, FxValue)> = (1u64..1 << width)
        .map(|v| Ok((v, FxValue::from_integer(v, fmt)?)))
        .collect::<Result<_>>()?;
    let mut acc = ErrorAccumulator::new(false);
    for (a, fa) in &operands {
        for (b, fb) in &operands {
            let got = mitchell_divide_direct(fa, fb, fmt)?;
            let exact = BigRational::new(BigInt::from(*a), BigInt::from(*b));
            acc.push(*a as i128, *b as i128, exact, decode(&got));
        }
    }
    Ok(acc.finish())
}

/// Mantissa fraction of a positive integer operand, as used by the sweeps.
pub fn mantissa_fraction(v: u64) -> Result<BigRational> {
    let fmt = FxFormat::new(64, MULT_SWEEP_EXTENSION)?;
    Ok(decode(
        &decompose(&FxValue::from_integer(BigUint::from(v), fmt)?)?.x,
    ))
}

/// `2^-bits`.
pub fn pow2_neg(bits: u32) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::one() << bits as usize)
}
