use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("negative probability mass {value} at index {index}")]
    NegativeMass { index: usize, value: f64 },

    #[error("distributions have different lengths: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("distribution is empty")]
    EmptyDistribution,

    #[error("distribution does not sum to 1 (sum = {0})")]
    NotNormalized(f64),

    #[error("product alphabet of {size} symbols exceeds the cap of {cap}")]
    ProductTooLarge { size: f64, cap: usize },

    #[error("alpha = {alpha} outside [0, {max}]")]
    AlphaOutOfRange { alpha: f64, max: f64 },

    #[error("infeasible parameters: {0}")]
    InfeasibleParameters(String),

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("invalid collapse point (eps = {epsilon}, delta = {delta}); need 0 <= eps < delta <= 1")]
    InvalidCollapsePoint { epsilon: f64, delta: f64 },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("too few samples: need at least {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("unsupported sample dimension {0} for the histogram backend (max 3)")]
    UnsupportedDimension(usize),

    #[error("symbol {value} is not a valid index into an alphabet of size {size}")]
    SymbolOutOfRange { value: f64, size: usize },

    #[error("invalid alpha schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid classifier backend: {0}")]
    InvalidBackend(String),

    #[error("invalid mode spec: {0}")]
    InvalidModeSpec(String),

    #[error("reverse KL undefined: mode {mode} has generated mass but no reference mass")]
    UndefinedKl { mode: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
