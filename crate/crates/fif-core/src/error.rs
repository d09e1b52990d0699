//! Crate-wide error type.
//!
//! Every fallible operation in this crate reports through [`enum@Error`]. The
//! variants are deliberately fine-grained so callers (and the CLI) can tell
//! a malformed input apart from a system that fails a mathematical
//! precondition.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("interpolation nodes must have strictly increasing x-coordinates")]
    NonIncreasingNodes,

    #[error("vertical scaling factor {0} is outside (-1, 1)")]
    ScalingOutOfRange(f64),

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("system is not contractive: {0}")]
    NotContractive(String),

    #[error("branch {0} is not invertible in y")]
    NotInvertibleInY(usize),

    #[error("branch index {index} out of range 1..={count}")]
    BranchOutOfRange { index: usize, count: usize },

    #[error("ordinate {value} lies outside the validity strip [{lo}, {hi}]")]
    OutsideValidityStrip { value: f64, lo: f64, hi: f64 },

    #[error("function is not strictly monotone on the requested domain")]
    NotMonotone,

    #[error("derivative vanishes on the requested domain (minimum |f'| = {0:e})")]
    DerivativeVanishes(f64),

    #[error("no shear coefficient up to {0} satisfies the contraction ratio condition")]
    ConditionUnattainable(f64),

    #[error("polyline grid does not match the system: {0}")]
    GridMismatch(String),

    #[error("x = {0} is outside the interpolation domain [{1}, {2}]")]
    OutOfDomain(f64, f64, f64),

    #[error("point cloud is empty")]
    EmptyCloud,

    #[error("address syntax error: {0}")]
    AddressSyntax(String),

    #[error("address symbol {symbol} out of range 1..={count}")]
    SymbolOutOfRange { symbol: u64, count: usize },

    #[error("address period parentheses must not be empty")]
    EmptyPeriodParens,

    #[error("address must be eventually periodic for this operation")]
    AddressNotPeriodic,

    #[error("x = {x} is not covered by the address domain within depth cap {cap}")]
    OutOfDomainAtCap { x: f64, cap: usize },

    #[error("operation supports affine branch maps only")]
    NonAffineUnsupported,

    #[error("ensemble of {0} prefixes exceeds the enumeration limit of {1}")]
    EnsembleTooLarge(u128, u64),

    #[error("operation requires exactly {expected} branches, system has {actual}")]
    UnsupportedBranchCount { expected: usize, actual: usize },

    #[error("x = {x} is a double point (detected at descent depth {depth})")]
    DoublePoint { x: f64, depth: usize },

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("condition violated: {0}")]
    ConditionViolated(String),

    #[error("cloud has {actual} points, at least {required} required")]
    TooFewPoints { actual: usize, required: usize },

    #[error("only {actual} usable scales, at least {required} required")]
    TooFewScales { actual: usize, required: usize },

    #[error("attractors differ: Hausdorff distance {0} exceeds tolerance {1}")]
    AttractorsDiffer(f64, f64),

    #[error("unknown example id {0:?}")]
    UnknownExample(String),

    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),

    #[error("example has no closed-form oracle")]
    NoOracle,

    #[error("x = {0} is outside the oracle domain [{1}, {2}]")]
    OutOfOracleDomain(f64, f64, f64),

    #[error("window or raster size is degenerate: {0}")]
    WindowDegenerate(String),

    #[error("interval endpoints must satisfy lo < hi, got [{0}, {1}]")]
    DegenerateInterval(f64, f64),

    #[error("affine map is singular")]
    SingularMap,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed CSV: {0}")]
    Csv(String),

    #[error("bad system configuration: {0}")]
    Config(String),
}
