use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid sizing error: {0}")]
    Sizing(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("outflow trace {trace} is not positive ({value}) at t = {t}, xi = {xi}")]
    NonPositiveTrace {
        trace: &'static str,
        t: f64,
        xi: f64,
        value: f64,
    },

    #[error("expression `{source_text}` for {field}: {message}")]
    Expression {
        field: String,
        source_text: String,
        message: String,
    },

    #[error("degenerate coefficient: {quantity} = {value:e}")]
    Degenerate { quantity: &'static str, value: f64 },

    #[error("nondegeneracy violated: h1 = {value} below delta = {delta} at (x index {i}, node {j})")]
    Nondegeneracy { value: f64, delta: f64, i: usize, j: usize },

    #[error("singular diagonal block in column {column}, row {row}")]
    SingularBlock { column: usize, row: usize },

    #[error("stability: dt = {dt} exceeds the advective limit {limit}")]
    Stability { dt: f64, limit: f64 },

    #[error("missing time level: {0}")]
    MissingTimeLevel(String),

    #[error("inadmissible state: {0}")]
    Inadmissible(String),

    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("field does not decay toward the far boundary: |f(eta_max)| = {edge:e}, max |f| = {peak:e}")]
    Decay { edge: f64, peak: f64 },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("malformed snapshot at byte {offset}: {message}")]
    Format { offset: usize, message: String },

    #[error("snapshot format version {found} is not supported (expected {expected})")]
    Version { found: u32, expected: u32 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
