use thiserror::Error;

/// Errors produced anywhere in the library.
///
/// The CLI maps these onto stable exit codes through [`Error::exit_code`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("denominator vanishes at p = {0}")]
    PoleAtPoint(String),

    #[error("denominator is the zero polynomial")]
    DivisionByZeroPolynomial,

    #[error("function does not map the open interval into (0,1): {0}")]
    InvalidRange(String),

    #[error("no Polya exponent found up to cap {0}")]
    CapExceeded(usize),

    #[error("polynomial is identically zero")]
    ZeroPolynomial,

    #[error("polynomial is not homogeneous")]
    NotHomogeneous,

    #[error("malformed machine: {0}")]
    Malformed(String),

    #[error("state {0} cannot reach any final state")]
    NonHaltingState(usize),

    #[error("no output after {0} steps")]
    StepCapExceeded(u64),

    #[error("unknown built-in machine `{0}`")]
    UnknownName(String),

    #[error("operation needs an automaton with labels {{0, 1}} only")]
    NotBinaryLabels,

    #[error("operation needs a binary input alphabet, got {0} letters")]
    UnsupportedAlphabet(usize),

    #[error("word has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("output functions do not sum to 1")]
    NotAProbabilityVector,

    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),

    #[error("pushdown machine did not halt within {0} steps")]
    DidNotHalt(u64),

    #[error("stack emptied in non-final state {0}")]
    UndefinedFinal(usize),

    #[error("fixed-point iteration did not reach tolerance within {0} iterations")]
    IterCapExceeded(usize),

    #[error(
        "machine does not halt almost surely: goodness sum {sum:.12} below 1 - {tol:e} \
         for stack symbol {symbol} in state {state}"
    )]
    NotAlmostSurelyHalting {
        symbol: usize,
        state: usize,
        sum: f64,
        tol: f64,
    },

    #[error("machine too large to build: {0}")]
    TooLarge(String),

    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("invalid document: {0}")]
    Document(String),
}

impl Error {
    /// Exit code contract: 2 range, 3 cap, 4 parse, 5 non-halting, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidRange(_) | Error::PoleAtPoint(_) => 2,
            Error::CapExceeded(_) => 3,
            Error::Syntax { .. }
            | Error::DivisionByZeroPolynomial
            | Error::Document(_)
            | Error::UnknownName(_) => 4,
            Error::NonHaltingState(_) | Error::NotAlmostSurelyHalting { .. } | Error::DidNotHalt(_) => 5,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
