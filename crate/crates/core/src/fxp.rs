//! Fixed-point number formats and the sign converters at both ends of the
//! divider datapath.
//!
//! Every internal quantity is an unsigned bit-vector tagged with an
//! [`FxFormat`]. Narrowing always truncates toward zero (drops low bits), the
//! way a register write-back does.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::goldschmidt::MultiplierStrategy;

/// Widest register the model accepts.
pub const MAX_WIDTH: u32 = 256;

/// Integer/fraction split of an unsigned fixed-point register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FxFormat {
    int_bits: u32,
    frac_bits: u32,
}

impl FxFormat {
    pub fn new(int_bits: u32, frac_bits: u32) -> Result<Self> {
        if int_bits == 0 {
            return Err(Error::InvalidFormat("int_bits must be at least 1".into()));
        }
        match int_bits.checked_add(frac_bits) {
            Some(w) if w <= MAX_WIDTH => Ok(FxFormat {
                int_bits,
                frac_bits,
            }),
            _ => Err(Error::InvalidFormat(format!(
                "total width {}+{} exceeds {MAX_WIDTH}",
                int_bits, frac_bits
            ))),
        }
    }

    pub fn int_bits(&self) -> u32 {
        self.int_bits
    }

    pub fn frac_bits(&self) -> u32 {
        self.frac_bits
    }

    pub fn width(&self) -> u32 {
        self.int_bits + self.frac_bits
    }

    /// Raw encoding of 1.0 in this format.
    pub fn one_raw(&self) -> BigUint {
        BigUint::one() << self.frac_bits
    }

    /// Smallest raw value that no longer fits.
    pub fn limit_raw(&self) -> BigUint {
        BigUint::one() << self.width()
    }
}

impl fmt::Display for FxFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "UQ{}.{}", self.int_bits, self.frac_bits)
    }
}

/// An unsigned fixed-point value: `raw / 2^frac_bits`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FxValue {
    raw: BigUint,
    format: FxFormat,
}

impl FxValue {
    pub fn new(raw: BigUint, format: FxFormat) -> Result<Self> {
        if raw >= format.limit_raw() {
            return Err(overflow(&raw, format));
        }
        Ok(FxValue { raw, format })
    }

    pub fn zero(format: FxFormat) -> Self {
        FxValue {
            raw: BigUint::zero(),
            format,
        }
    }

    pub fn one(format: FxFormat) -> Self {
        FxValue {
            raw: format.one_raw(),
            format,
        }
    }

    /// Integer `n` placed at the binary point.
    pub fn from_integer(n: impl Into<BigUint>, format: FxFormat) -> Result<Self> {
        Self::new(n.into() << format.frac_bits, format)
    }

    /// Builds `raw * 2^shift` (`shift` counted in units of `format`'s ulp),
    /// truncating any bits shifted below the LSB.
    pub fn from_shifted(raw: &BigUint, shift: i64, format: FxFormat) -> Result<Self> {
        Self::new(shift_raw(raw, shift), format)
    }

    pub fn raw(&self) -> &BigUint {
        &self.raw
    }

    pub fn format(&self) -> FxFormat {
        self.format
    }

    pub fn is_zero(&self) -> bool {
        self.raw.is_zero()
    }

    pub fn integer_part(&self) -> BigUint {
        &self.raw >> self.format.frac_bits
    }

    pub fn fraction_raw(&self) -> BigUint {
        &self.raw & (self.format.one_raw() - 1u32)
    }

    /// Re-registers the value in another format, truncating dropped fraction
    /// bits.
    pub fn convert(&self, format: FxFormat) -> Result<Self> {
        let shift = format.frac_bits as i64 - self.format.frac_bits as i64;
        Self::from_shifted(&self.raw, shift, format)
    }

    pub fn to_rational(&self) -> BigRational {
        decode(self)
    }

    /// Lossy; for reporting only.
    pub fn to_f64(&self) -> f64 {
        decode(self).to_f64().unwrap_or(f64::NAN)
    }
}

impl fmt::Display for FxValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}/2^{}", self.raw, self.format.frac_bits)
    }
}

/// `raw * 2^shift`, floor on right shifts.
pub(crate) fn shift_raw(raw: &BigUint, shift: i64) -> BigUint {
    if shift >= 0 {
        raw << shift as u64
    } else {
        raw >> shift.unsigned_abs()
    }
}

fn overflow(raw: &BigUint, format: FxFormat) -> Error {
    let needed = raw.bits().saturating_sub(format.frac_bits as u64);
    Error::Overflow {
        needed,
        available: format.int_bits,
    }
}

/// Floor-truncating encoder for non-negative rationals.
pub fn encode(v: &BigRational, format: FxFormat) -> Result<FxValue> {
    if v.is_negative() {
        return Err(Error::Negative);
    }
    let scaled = v.numer() << format.frac_bits as usize;
    let raw = scaled.div_floor(v.denom());
    let raw = raw.to_biguint().expect("non-negative");
    FxValue::new(raw, format)
}

/// Exact value of a register.
pub fn decode(v: &FxValue) -> BigRational {
    BigRational::new(
        BigInt::from(v.raw.clone()),
        BigInt::one() << v.format.frac_bits as usize,
    )
}

/// A signed integer input port of a given two's-complement width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SignedInput {
    value: i128,
    width: u32,
}

impl SignedInput {
    pub fn new(value: i128, width: u32) -> Result<Self> {
        if width == 0 || width > 128 {
            return Err(Error::InvalidConfig(format!(
                "input width {width} outside 1..=128"
            )));
        }
        if width < 128 {
            let half = 1i128 << (width - 1);
            if value < -half || value >= half {
                return Err(Error::OutOfRange { value, width });
            }
        }
        Ok(SignedInput { value, width })
    }

    pub fn value(&self) -> i128 {
        self.value
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn is_negative(&self) -> bool {
        self.value < 0
    }
}

/// Output of the input sign converter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignSplit {
    pub dividend_unsigned: u128,
    pub divisor_unsigned: u128,
    /// Set when the quotient is negative.
    pub sign: bool,
}

/// Absolute values of both operands plus the XOR of their sign bits.
pub fn input_sign_convert(dividend: SignedInput, divisor: SignedInput) -> SignSplit {
    SignSplit {
        dividend_unsigned: dividend.value.unsigned_abs(),
        divisor_unsigned: divisor.value.unsigned_abs(),
        sign: dividend.is_negative() ^ divisor.is_negative(),
    }
}

/// The divider's result port: sign, `width_quo` integer bits and
/// `width_fra - 1` fraction bits, sign-magnitude.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignedQuotient {
    pub sign: bool,
    pub int_part: BigUint,
    pub frac_part: BigUint,
    pub int_bits: u32,
    pub frac_bits: u32,
}

impl SignedQuotient {
    pub fn magnitude(&self) -> BigRational {
        let raw = (&self.int_part << self.frac_bits as usize) | &self.frac_part;
        BigRational::new(BigInt::from(raw), BigInt::one() << self.frac_bits as usize)
    }

    pub fn to_rational(&self) -> BigRational {
        let m = self.magnitude();
        if self.sign {
            -m
        } else {
            m
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.to_rational().to_f64().unwrap_or(f64::NAN)
    }
}

impl fmt::Display for SignedQuotient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = (self.frac_bits as usize).div_ceil(4).max(1);
        write!(
            f,
            "{}{}.{:0digits$x}h",
            if self.sign { "-" } else { "" },
            self.int_part,
            &self.frac_part << ((digits * 4) - self.frac_bits as usize),
        )
    }
}

/// Converts the final magnitude back into a signed quotient.
///
/// The fraction keeps the top `width_fra - 1` bits of `result` (zero-padded
/// when the register has fewer). A quotient that reads as zero is always
/// reported with `sign = false`.
pub fn output_sign_convert(
    result: &FxValue,
    sign: bool,
    cfg: &DividerConfig,
) -> Result<SignedQuotient> {
    let int_part = result.integer_part();
    if int_part.bits() > cfg.width_quo as u64 {
        return Err(Error::Overflow {
            needed: int_part.bits(),
            available: cfg.width_quo,
        });
    }
    let out_frac = cfg.output_frac_bits();
    let shift = out_frac as i64 - result.format().frac_bits() as i64;
    let frac_part = shift_raw(&result.fraction_raw(), shift);
    let sign = sign && !(int_part.is_zero() && frac_part.is_zero());
    Ok(SignedQuotient {
        sign,
        int_part,
        frac_part,
        int_bits: cfg.width_quo,
        frac_bits: out_frac,
    })
}

/// Every parameter of the divider.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct DividerConfig {
    pub width_dividend: u32,
    pub width_divisor: u32,
    /// Fraction bits of every internal register.
    pub extension: u32,
    pub width_quo: u32,
    /// Output fraction width plus one.
    pub width_fra: u32,
    pub iterations: u32,
    pub strategy: MultiplierStrategy,
}

impl Default for DividerConfig {
    fn default() -> Self {
        DividerConfig {
            width_dividend: 32,
            width_divisor: 32,
            extension: 32,
            width_quo: 32,
            width_fra: 33,
            iterations: 4,
            strategy: MultiplierStrategy::MitchellCorrected,
        }
    }
}

impl DividerConfig {
    pub fn with_strategy(mut self, strategy: MultiplierStrategy) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn with_extension(mut self, extension: u32) -> Self {
        self.extension = extension;
        self
    }

    pub fn with_iterations(mut self, iterations: u32) -> Self {
        self.iterations = iterations;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.extension == 0 {
            return bad("extension must be at least 1".into());
        }
        if self.iterations == 0 {
            return bad("iterations must be at least 1".into());
        }
        for (name, w) in [
            ("width_dividend", self.width_dividend),
            ("width_divisor", self.width_divisor),
        ] {
            if w == 0 || w > 128 {
                return bad(format!("{name} = {w} outside 1..=128"));
            }
        }
        if self.width_quo == 0 {
            return bad("width_quo must be at least 1".into());
        }
        if self.width_fra == 0 {
            return bad("width_fra must be at least 1".into());
        }
        if self.width_quo + self.width_fra - 1 > MAX_WIDTH {
            return bad(format!("output width exceeds {MAX_WIDTH}"));
        }
        self.internal_format().map(|_| ())
    }

    /// Format shared by the data registers and the multiplier units.
    pub fn internal_format(&self) -> Result<FxFormat> {
        // m = 2 - b needs two integer bits even for 1-bit dividends.
        FxFormat::new(self.width_dividend.max(2), self.extension)
    }

    pub fn output_frac_bits(&self) -> u32 {
        self.width_fra - 1
    }

    pub fn dividend(&self, value: i128) -> Result<SignedInput> {
        SignedInput::new(value, self.width_dividend)
    }

    pub fn divisor(&self, value: i128) -> Result<SignedInput> {
        SignedInput::new(value, self.width_divisor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn format_limits() {
        assert!(FxFormat::new(0, 4).is_err());
        assert!(FxFormat::new(1, 0).is_ok());
        assert!(FxFormat::new(128, 128).is_ok());
        assert!(FxFormat::new(129, 128).is_err());
        assert!(FxValue::new(BigUint::from(256u32), FxFormat::new(4, 4).unwrap()).is_err());
        assert!(FxValue::new(BigUint::from(255u32), FxFormat::new(4, 4).unwrap()).is_ok());
    }

    #[test]
    fn encode_examples() {
        let f32_32 = FxFormat::new(32, 32).unwrap();
        let v = encode(&rat(11, 16), f32_32).unwrap();
        assert_eq!(v.raw(), &BigUint::from(0xB000_0000u64));

        // floor(2^8 / 3) = 85
        let f = FxFormat::new(4, 8).unwrap();
        assert_eq!(decode(&encode(&rat(1, 3), f).unwrap()), rat(85, 256));

        assert!(encode(&rat(0, 1), f).unwrap().is_zero());
        assert_eq!(
            encode(&rat(16, 1), f),
            Err(Error::Overflow {
                needed: 5,
                available: 4
            })
        );
        assert_eq!(encode(&rat(-1, 2), f), Err(Error::Negative));
    }

    #[test]
    fn input_sign_examples() {
        let s = |v| SignedInput::new(v, 32).unwrap();
        let r = input_sign_convert(s(-17), s(35));
        assert_eq!(
            (r.dividend_unsigned, r.divisor_unsigned, r.sign),
            (17, 35, true)
        );
        let r = input_sign_convert(s(0), s(7));
        assert_eq!(
            (r.dividend_unsigned, r.divisor_unsigned, r.sign),
            (0, 7, false)
        );
        let r = input_sign_convert(s(-(1 << 31)), s(-1));
        assert_eq!(
            (r.dividend_unsigned, r.divisor_unsigned, r.sign),
            (1 << 31, 1, false)
        );
    }

    #[test]
    fn input_range_checked() {
        assert!(SignedInput::new(1 << 31, 32).is_err());
        assert!(SignedInput::new(-(1 << 31) - 1, 32).is_err());
        assert!(SignedInput::new(i128::MIN, 128).is_ok());
        assert!(SignedInput::new(0, 0).is_err());
    }

    #[test]
    fn output_convert_truncates_and_clears_negative_zero() {
        let cfg = DividerConfig::default();
        let fmt = cfg.internal_format().unwrap();

        let zero = FxValue::zero(fmt);
        let q = output_sign_convert(&zero, true, &cfg).unwrap();
        assert!(!q.sign);
        assert!(q.int_part.is_zero() && q.frac_part.is_zero());

        // 4.8253 with more fraction bits than the port: floor to 32 bits.
        let wide = FxFormat::new(32, 40).unwrap();
        let v = encode(&rat(48253, 10000), wide).unwrap();
        let q = output_sign_convert(&v, false, &cfg).unwrap();
        assert_eq!(q.int_part, BigUint::from(4u32));
        assert_eq!(q.frac_part, v.fraction_raw() >> 8u32);
        let err = (q.to_rational() - rat(48253, 10000)).abs();
        assert!(err < BigRational::new(1.into(), BigInt::one() << 32));

        let v = encode(&rat(4868, 10000), fmt).unwrap();
        let q = output_sign_convert(&v, true, &cfg).unwrap();
        assert!(q.sign);
        assert_eq!(q.int_part, BigUint::zero());
        assert_eq!(q.frac_part, *v.raw());
    }

    #[test]
    fn output_convert_overflow_and_padding() {
        let cfg = DividerConfig {
            width_quo: 3,
            width_fra: 9,
            ..DividerConfig::default()
        };
        let fmt = FxFormat::new(8, 4).unwrap();
        let big = FxValue::from_integer(8u32, fmt).unwrap();
        assert!(matches!(
            output_sign_convert(&big, false, &cfg),
            Err(Error::Overflow {
                needed: 4,
                available: 3
            })
        ));
        let v = FxValue::new(BigUint::from(0x7Cu32), fmt).unwrap(); // 7.75
        let q = output_sign_convert(&v, false, &cfg).unwrap();
        assert_eq!(q.frac_part, BigUint::from(0xC0u32));
        assert_eq!(q.to_rational(), rat(31, 4));
    }

    #[test]
    fn default_config_is_valid() {
        let cfg = DividerConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.output_frac_bits(), 32);
        assert!(cfg.with_iterations(0).validate().is_err());
        assert!(cfg.with_extension(0).validate().is_err());
    }

    proptest! {
        #[test]
        fn sign_convert_matches_abs_xor(a in any::<i32>(), b in any::<i32>()) {
            let r = input_sign_convert(
                SignedInput::new(a as i128, 32).unwrap(),
                SignedInput::new(b as i128, 32).unwrap(),
            );
            prop_assert_eq!(r.dividend_unsigned, (a as i128).unsigned_abs());
            prop_assert_eq!(r.divisor_unsigned, (b as i128).unsigned_abs());
            prop_assert_eq!(r.sign, (a < 0) ^ (b < 0));
        }

        #[test]
        fn encode_floor_property(n in 0u64..1_000_000, d in 1u64..1_000_000, frac in 0u32..40) {
            let fmt = FxFormat::new(21, frac).unwrap();
            let v = BigRational::new(n.into(), d.into());
            let back = decode(&encode(&v, fmt).unwrap());
            let ulp = BigRational::new(1.into(), BigInt::one() << frac as usize);
            prop_assert!(back <= v);
            prop_assert!(&v - &back < ulp);
        }

        #[test]
        fn dyadics_round_trip(raw in any::<u64>(), frac in 0u32..64) {
            let fmt = FxFormat::new(64, frac).unwrap();
            let v = FxValue::new(BigUint::from(raw), fmt).unwrap();
            prop_assert_eq!(encode(&decode(&v), fmt).unwrap(), v);
        }
    }
}
