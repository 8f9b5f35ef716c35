//! Cycle-accurate model of the divider's control path: the iteration
//! trigger, the FSM controller and the data register.
//!
//! One call to [`Simulator::clock`] is one rising edge. The FSM is a Moore
//! machine; its state selects a one-hot enable `en[3:0]`:
//!
//! | state      | en     | action on the edge                              |
//! |------------|--------|-------------------------------------------------|
//! | `IDLE`     | `0000` | wait for `start`                                |
//! | `SIGN`     | `0001` | sign-convert + normalize, latch `*_fix`, `*_in` |
//! | `COEFFi`   | `0010` | latch `m = 2 - divisor_in`                      |
//! | `MULTi`    | `0100` | latch `m * *_in` into `*_out` and `*_in`        |
//! | `OUT`      | `1000` | latch the signed quotient                       |
//!
//! A division therefore takes `1 + 1 + 2 * iterations + 1` cycles counted
//! from the cycle in which `start` rises.

use std::fmt;
use std::io;

use crate::error::{Error, Result};
use crate::fxp::{
    input_sign_convert, output_sign_convert, DividerConfig, FxFormat, FxValue, SignedInput,
    SignedQuotient,
};
use crate::goldschmidt::{check_width, iteration_coefficient};
use crate::normalize::normalize_pair;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FsmState {
    Idle,
    Sign,
    /// Coefficient cycle of iteration `i` (1-based).
    Coeff(u32),
    /// Multiply cycle of iteration `i` (1-based).
    Mult(u32),
    Out,
}

impl FsmState {
    pub fn enables(&self) -> EnableBits {
        match self {
            FsmState::Idle => EnableBits::NONE,
            FsmState::Sign => EnableBits::SIGN,
            FsmState::Coeff(_) => EnableBits::COEFF,
            FsmState::Mult(_) => EnableBits::MULT,
            FsmState::Out => EnableBits::OUT,
        }
    }
}

impl fmt::Display for FsmState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FsmState::Idle => f.write_str("IDLE"),
            FsmState::Sign => f.write_str("SIGN"),
            FsmState::Coeff(i) => write!(f, "COEFF{i}"),
            FsmState::Mult(i) => write!(f, "MULT{i}"),
            FsmState::Out => f.write_str("OUT"),
        }
    }
}

/// `en[3:0]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct EnableBits(u8);

impl EnableBits {
    pub const NONE: EnableBits = EnableBits(0);
    pub const SIGN: EnableBits = EnableBits(0b0001);
    pub const COEFF: EnableBits = EnableBits(0b0010);
    pub const MULT: EnableBits = EnableBits(0b0100);
    pub const OUT: EnableBits = EnableBits(0b1000);

    pub fn bits(&self) -> u8 {
        self.0
    }

    pub fn bit(&self, i: u32) -> bool {
        self.0 >> i & 1 == 1
    }
}

impl fmt::Display for EnableBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04b}", self.0)
    }
}

/// Every clocked register of the divider.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegisterFile {
    /// Trigger history: the inputs sampled on the previous edge.
    pub dividend_1: i128,
    pub divisor_1: i128,
    pub dividend_fix: FxValue,
    pub divisor_fix: FxValue,
    pub dividend_out: FxValue,
    pub divisor_out: FxValue,
    pub dividend_in: FxValue,
    pub divisor_in: FxValue,
    /// Adder output held between the coefficient and multiply cycles.
    pub coeff: FxValue,
    pub sign: bool,
    pub quotient: Option<SignedQuotient>,
}

impl RegisterFile {
    pub fn reset(fmt: FxFormat) -> Self {
        let z = FxValue::zero(fmt);
        RegisterFile {
            dividend_1: 0,
            divisor_1: 0,
            dividend_fix: z.clone(),
            divisor_fix: z.clone(),
            dividend_out: z.clone(),
            divisor_out: z.clone(),
            dividend_in: z.clone(),
            divisor_in: z.clone(),
            coeff: z,
            sign: false,
            quotient: None,
        }
    }
}

/// Change detector: `start` is low only when both inputs equal the values
/// sampled on the previous edge.
pub fn trigger_step(dividend: i128, divisor: i128, regs: &RegisterFile) -> (bool, RegisterFile) {
    let start = dividend != regs.dividend_1 || divisor != regs.divisor_1;
    let mut next = regs.clone();
    next.dividend_1 = dividend;
    next.divisor_1 = divisor;
    (start, next)
}

/// Next state and the enables it drives. A `start` pulse restarts from any
/// state.
pub fn fsm_step(state: FsmState, start: bool, iterations: u32) -> (FsmState, EnableBits) {
    let next = if start {
        FsmState::Sign
    } else {
        match state {
            FsmState::Idle | FsmState::Out => FsmState::Idle,
            FsmState::Sign => FsmState::Coeff(1),
            FsmState::Coeff(i) => FsmState::Mult(i),
            FsmState::Mult(i) if i < iterations => FsmState::Coeff(i + 1),
            FsmState::Mult(_) => FsmState::Out,
        }
    };
    (next, next.enables())
}

/// Combinational results offered to the data register in one cycle. Only the
/// stage selected by the active enable is evaluated.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DatapathOutputs {
    pub fix: Option<(FxValue, FxValue, bool)>,
    pub coeff: Option<FxValue>,
    pub products: Option<(FxValue, FxValue)>,
    pub quotient: Option<SignedQuotient>,
}

fn evaluate(
    en: EnableBits,
    dividend: SignedInput,
    divisor: SignedInput,
    regs: &RegisterFile,
    cfg: &DividerConfig,
) -> Result<DatapathOutputs> {
    let mut out = DatapathOutputs::default();
    let fmt = cfg.internal_format()?;
    if en.bit(0) {
        let split = input_sign_convert(dividend, divisor);
        let n = normalize_pair(split.dividend_unsigned, split.divisor_unsigned, cfg)?;
        out.fix = Some((n.dividend_fix, n.divisor_fix, split.sign));
    }
    if en.bit(1) {
        out.coeff = Some(iteration_coefficient(&regs.divisor_in)?);
    }
    if en.bit(2) {
        let a = cfg.strategy.multiply(&regs.coeff, &regs.dividend_in, fmt)?;
        let b = cfg.strategy.multiply(&regs.coeff, &regs.divisor_in, fmt)?;
        out.products = Some((a, b));
    }
    if en.bit(3) {
        out.quotient = Some(output_sign_convert(&regs.dividend_out, regs.sign, cfg)?);
    }
    Ok(out)
}

/// Edge update of the data register. `*_in` is loaded from the
/// normalization shifter on `en[0]` and from the multipliers on `en[2]`, so
/// the first iteration consumes `*_fix` and later ones `*_out`.
pub fn register_step(en: EnableBits, dp: &DatapathOutputs, regs: &RegisterFile) -> RegisterFile {
    let mut next = regs.clone();
    if en.bit(0) {
        if let Some((a, b, sign)) = &dp.fix {
            next.dividend_fix = a.clone();
            next.divisor_fix = b.clone();
            next.dividend_in = a.clone();
            next.divisor_in = b.clone();
            next.sign = *sign;
        }
    }
    if en.bit(1) {
        if let Some(m) = &dp.coeff {
            next.coeff = m.clone();
        }
    }
    if en.bit(2) {
        if let Some((a, b)) = &dp.products {
            next.dividend_out = a.clone();
            next.divisor_out = b.clone();
            next.dividend_in = a.clone();
            next.divisor_in = b.clone();
        }
    }
    if en.bit(3) {
        if let Some(q) = &dp.quotient {
            next.quotient = Some(q.clone());
        }
    }
    next
}

/// One clock cycle as seen on the waveform.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleRecord {
    pub cycle: u64,
    pub state: FsmState,
    pub en: EnableBits,
    pub start: bool,
    /// Register contents after this cycle's edge.
    pub registers: RegisterFile,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CycleTrace {
    pub records: Vec<CycleRecord>,
}

impl CycleTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// How many records drive each enable bit, `[en0, en1, en2, en3]`.
    pub fn enable_census(&self) -> [usize; 4] {
        let mut counts = [0; 4];
        for r in &self.records {
            for (i, c) in counts.iter_mut().enumerate() {
                *c += r.en.bit(i as u32) as usize;
            }
        }
        counts
    }

    /// `cycle,state,en,start,dividend_in,divisor_in,dividend_out,divisor_out`
    pub fn write_csv<W: io::Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "cycle",
            "state",
            "en",
            "start",
            "dividend_in",
            "divisor_in",
            "dividend_out",
            "divisor_out",
        ])?;
        for r in &self.records {
            let g = &r.registers;
            out.write_record([
                r.cycle.to_string(),
                r.state.to_string(),
                r.en.to_string(),
                (r.start as u8).to_string(),
                format!("{:#x}", g.dividend_in.raw()),
                format!("{:#x}", g.divisor_in.raw()),
                format!("{:#x}", g.dividend_out.raw()),
                format!("{:#x}", g.divisor_out.raw()),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// A single divider instance being clocked.
#[derive(Debug, Clone)]
pub struct Simulator {
    cfg: DividerConfig,
    state: FsmState,
    regs: RegisterFile,
    cycle: u64,
}

impl Simulator {
    pub fn new(cfg: DividerConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Simulator {
            regs: RegisterFile::reset(cfg.internal_format()?),
            cfg,
            state: FsmState::Idle,
            cycle: 0,
        })
    }

    pub fn config(&self) -> &DividerConfig {
        &self.cfg
    }

    pub fn state(&self) -> FsmState {
        self.state
    }

    pub fn registers(&self) -> &RegisterFile {
        &self.regs
    }

    pub fn cycle(&self) -> u64 {
        self.cycle
    }

    /// Last latched quotient.
    pub fn output(&self) -> Option<&SignedQuotient> {
        self.regs.quotient.as_ref()
    }

    /// Applies the inputs for one cycle and takes the rising edge.
    pub fn clock(&mut self, dividend: SignedInput, divisor: SignedInput) -> Result<CycleRecord> {
        check_width(dividend, self.cfg.width_dividend)?;
        check_width(divisor, self.cfg.width_divisor)?;
        let en = self.state.enables();
        let dp = evaluate(en, dividend, divisor, &self.regs, &self.cfg)?;
        let (start, regs) = trigger_step(dividend.value(), divisor.value(), &self.regs);
        let regs = register_step(en, &dp, &regs);
        let record = CycleRecord {
            cycle: self.cycle,
            state: self.state,
            en,
            start,
            registers: regs.clone(),
        };
        self.regs = regs;
        self.state = fsm_step(self.state, start, self.cfg.iterations).0;
        self.cycle += 1;
        Ok(record)
    }
}

/// Runs one division from reset and returns the quotient together with the
/// trace from the start pulse through the output cycle.
pub fn run_cycles(
    dividend: SignedInput,
    divisor: SignedInput,
    cfg: &DividerConfig,
) -> Result<(SignedQuotient, CycleTrace)> {
    if divisor.value() == 0 {
        return Err(Error::ZeroDivisor);
    }
    let mut sim = Simulator::new(*cfg)?;
    let mut trace = CycleTrace::default();
    let budget = 4 + 2 * cfg.iterations as u64;
    while sim.cycle() < budget {
        let rec = sim.clock(dividend, divisor)?;
        let done = rec.state == FsmState::Out;
        if rec.start {
            trace.records.clear();
        }
        if rec.start || !trace.is_empty() {
            trace.records.push(rec);
        }
        if done {
            let q = sim.output().cloned().expect("OUT latches the quotient");
            return Ok((q, trace));
        }
    }
    unreachable!("division did not finish within {budget} cycles")
}
