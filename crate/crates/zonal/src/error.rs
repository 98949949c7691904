use thiserror::Error;

/// Everything that can go wrong across the crate.
///
/// Variants split into two broad groups, mirrored by the CLI exit codes:
/// *usage/validation* errors (bad configuration, violated preconditions —
/// exit code 2) and *numeric-domain* errors (quantities that left the
/// representable range at run time — exit code 3). [`Error::is_numeric`]
/// encodes the split.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Two points (or a point and a group) from different models were mixed.
    #[error("points lie in different models (H2 vs H3)")]
    ModelMismatch,

    /// A point constructor was handed a non-positive height.
    #[error("hyperbolic point must have positive height, got {height}")]
    NonPositiveHeight { height: f64 },

    /// An orbit point's height underflowed binary64 during a Möbius action.
    /// Carries the word length at fault when raised inside an enumeration.
    #[error("orbit point height underflowed binary64{}", match .word_length {
        Some(n) => format!(" at word length {n}"),
        None => String::new(),
    })]
    HeightUnderflow { word_length: Option<u32> },

    /// A matrix with |det| ≈ 0 cannot be normalized to determinant one.
    #[error("matrix is numerically singular (|det| = {det_abs:e})")]
    SingularMatrix { det_abs: f64 },

    /// An exact word count exceeded 128 bits.
    #[error("exact count exceeds 128 bits at length {n}")]
    CountOverflow { n: u32 },

    /// A continuant exceeded 128 bits (digit sums beyond the supported cap).
    #[error("continuant overflow at digit sum {n}")]
    ContinuantOverflow { n: u32 },

    /// δ at or below r_max/2 contradicts Beardon's lower bound for zonal
    /// groups; the asymptotic models are meaningless there.
    #[error("delta = {delta} violates Beardon's bound delta > r_max/2 = {bound}")]
    BeardonBound { delta: f64, bound: f64 },

    /// A fit or estimate was asked for with too little usable data.
    #[error("insufficient data: {reason}")]
    InsufficientData { reason: String },

    /// The sample points of a series span too small a multiplicative range
    /// for log-log model selection to mean anything.
    #[error("series span too short: max n / min n = {span:.3}, need >= {need}")]
    InsufficientSpan { span: f64, need: f64 },

    /// A word violates free-product normal form.
    #[error("word is not in normal form: {reason}")]
    NonNormal { reason: String },

    /// A coset prefix that is not a maximal-rank parabolic syllable of
    /// ℓ1-length ≥ 2, or that exceeds the length budget.
    #[error("invalid coset prefix: {reason}")]
    InvalidPrefix { reason: String },

    /// A request exceeded a configured cap (word length, digit sum, …).
    #[error("requested n = {requested} exceeds the configured cap {cap}")]
    CapExceeded { requested: u64, cap: u64 },

    /// Configuration rejected before any computation started.
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    /// True for numeric-domain failures (CLI exit code 3); false for
    /// usage/validation failures (CLI exit code 2).
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::HeightUnderflow { .. }
                | Error::CountOverflow { .. }
                | Error::ContinuantOverflow { .. }
        )
    }

    pub(crate) fn insufficient(reason: impl Into<String>) -> Self {
        Error::InsufficientData { reason: reason.into() }
    }

    pub(crate) fn non_normal(reason: impl Into<String>) -> Self {
        Error::NonNormal { reason: reason.into() }
    }
}
