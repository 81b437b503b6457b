use thiserror::Error;

/// Which half of the symmetrizability test rejected a Laplacian.
#[derive(Debug, Clone, PartialEq)]
pub enum SymmetrizableViolation {
    /// The left null vector has a component that is zero or negative.
    NonPositiveMass { node: usize, value: f64 },
    /// `m_i w_ij != m_j w_ji` for an adjacent pair.
    DetailedBalance { i: usize, j: usize, residual: f64 },
    /// The eigenbasis handed to an energy routine is not orthonormal.
    NonOrthogonalBasis { max_deviation: f64 },
}

impl std::fmt::Display for SymmetrizableViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::NonPositiveMass { node, value } => {
                write!(f, "left null vector component m[{node}] = {value:e} is not positive")
            }
            Self::DetailedBalance { i, j, residual } => {
                write!(f, "detailed balance fails on pair ({i}, {j}), residual {residual:e}")
            }
            Self::NonOrthogonalBasis { max_deviation } => {
                write!(f, "eigenbasis deviates from orthonormal by {max_deviation:e}")
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid Laplacian: {0}")]
    InvalidLaplacian(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("graph is disconnected ({components} components)")]
    DisconnectedGraph { components: usize },

    #[error("not symmetrizable: {0}")]
    NotSymmetrizable(SymmetrizableViolation),

    #[error("eigenvector basis is numerically dependent (condition number {condition:e})")]
    DefectiveMatrix { condition: f64 },

    #[error("eigenvalue computation did not converge")]
    NoConvergence,

    #[error("spectrum has non-real eigenvalues (max |Im| = {max_imag:e})")]
    ComplexSpectrum { max_imag: f64 },

    #[error("bad bracket: {0}")]
    BadBracket(String),

    #[error("no real-to-complex transition inside the bracket (spectrum real at eps = {hi})")]
    NoTransition { hi: f64 },

    #[error("time step {dt} exceeds the stability bound {bound}")]
    StepTooLarge { dt: f64, bound: f64 },

    #[error("state diverged at t = {time} (|x| > {threshold:e})")]
    Unstable { time: f64, threshold: f64 },

    #[error("series too short: {len} samples, need at least {min}")]
    TooShort { len: usize, min: usize },

    #[error("spectrum has no non-DC content")]
    AllZero,

    #[error("window {window} exceeds available length {len}")]
    WindowTooLarge { window: usize, len: usize },

    #[error("cutoff bin {cutoff} outside 1..={max_bin}")]
    BadCutoff { cutoff: usize, max_bin: usize },

    #[error("slice [{start}, {end}) outside series of length {len}")]
    OutOfRange { start: usize, end: usize, len: usize },

    #[error("input is empty")]
    EmptyInput,

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("trend segments {earlier} and {later} share no timestamp")]
    NoOverlap { earlier: usize, later: usize },

    #[error("zero anchor between trend segments {earlier} and {later}")]
    ZeroAnchor { earlier: usize, later: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable identifier used in machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidGraph(_) => "InvalidGraph",
            Error::InvalidLaplacian(_) => "InvalidLaplacian",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::InvalidInput(_) => "InvalidInput",
            Error::DisconnectedGraph { .. } => "DisconnectedGraph",
            Error::NotSymmetrizable(_) => "NotSymmetrizable",
            Error::DefectiveMatrix { .. } => "DefectiveMatrix",
            Error::NoConvergence => "NoConvergence",
            Error::ComplexSpectrum { .. } => "ComplexSpectrum",
            Error::BadBracket(_) => "BadBracket",
            Error::NoTransition { .. } => "NoTransition",
            Error::StepTooLarge { .. } => "StepTooLarge",
            Error::Unstable { .. } => "Unstable",
            Error::TooShort { .. } => "TooShort",
            Error::AllZero => "AllZero",
            Error::WindowTooLarge { .. } => "WindowTooLarge",
            Error::BadCutoff { .. } => "BadCutoff",
            Error::OutOfRange { .. } => "OutOfRange",
            Error::EmptyInput => "EmptyInput",
            Error::Parse { .. } => "ParseError",
            Error::NoOverlap { .. } => "NoOverlap",
            Error::ZeroAnchor { .. } => "ZeroAnchor",
            Error::Io(_) => "Io",
            Error::Json(_) => "ParseError",
            Error::Csv(_) => "ParseError",
        }
    }

    /// True for failures of the numerical machinery rather than of the input data.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::DisconnectedGraph { .. }
                | Error::NotSymmetrizable(_)
                | Error::DefectiveMatrix { .. }
                | Error::NoConvergence
                | Error::ComplexSpectrum { .. }
                | Error::BadBracket(_)
                | Error::NoTransition { .. }
                | Error::StepTooLarge { .. }
                | Error::Unstable { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
