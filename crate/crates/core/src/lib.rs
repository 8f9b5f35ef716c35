//! Bit-accurate model of a variable-width fixed-point divider that runs
//! Goldschmidt iterations on Mitchell logarithmic multipliers.
//!
//! * [`fxp`]: fixed-point registers and the sign converters
//! * [`normalize`]: leading-one detection and the normalization shifter
//! * [`mitchell`]: logarithmic multiplication with optional correction
//! * [`goldschmidt`]: the behavioral division engine
//! * [`cyclesim`]: the clocked FSM/data-register model
//! * [`harness`]: exact oracle, error statistics and reference sweeps
//! * [`cli`]: the `goldmitch` command-line tool

pub mod cli;
pub mod cyclesim;
pub mod error;
pub mod fxp;
pub mod goldschmidt;
pub mod harness;
pub mod mitchell;
pub mod normalize;

pub use error::{Error, Result};
pub use fxp::{DividerConfig, FxFormat, FxValue, SignedInput, SignedQuotient};
pub use goldschmidt::{divide, MultiplierStrategy};
pub use mitchell::MultMode;
