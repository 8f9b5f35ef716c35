use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// The divisor was zero; the hardware output is undefined in that case.
    #[error("invalid computation: divisor is zero")]
    ZeroDivisor,

    /// A logarithmic decomposition was requested for a zero operand.
    #[error("operand is zero and has no leading one")]
    ZeroOperand,

    #[error("value needs {needed} integer bits but the format only has {available}")]
    Overflow { needed: u64, available: u32 },

    #[error("invalid fixed-point format: {0}")]
    InvalidFormat(String),

    #[error("invalid divider configuration: {0}")]
    InvalidConfig(String),

    #[error("value {value} is not representable in {width}-bit two's complement")]
    OutOfRange { value: i128, width: u32 },

    #[error("negative value cannot be encoded as unsigned fixed point")]
    Negative,
}
