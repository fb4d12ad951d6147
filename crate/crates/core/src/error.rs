use thiserror::Error;

pub type Result<T, E = PfError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PfError {
    #[error("index {index} outside coefficient window 0..={window}")]
    IndexOutOfWindow { index: i64, window: usize },

    #[error("minor enumeration needs {needed} evaluations, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },

    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),

    #[error("invalid minor spec: {0}")]
    InvalidMinor(String),

    #[error("sequence is empty")]
    EmptySequence,

    #[error("normalization requires c_0 = 1, found {0}")]
    NotNormalized(String),

    #[error("window mismatch: {0}")]
    WindowMismatch(String),

    #[error("infeasible perturbation: {0}")]
    Infeasible(String),

    #[error("malformed polyline: {0}")]
    MalformedPolyline(String),

    #[error("domain fails validation: {0}")]
    DomainInvalid(String),

    #[error("degenerate geometry: {0}")]
    GeometryDegenerate(String),

    #[error("tail condition unsatisfiable: {0}")]
    TailCondition(String),

    #[error("non-positive radius T = {0}")]
    NonPositiveT(String),

    #[error("zero coefficient at index {0}")]
    ZeroCoefficient(usize),

    #[error("sequence is not strictly positive at index {0}")]
    NotPositive(usize),

    #[error("x = {0} outside (0, T)")]
    XOutOfRange(String),

    #[error("complex coefficient at index {0} has nonzero imaginary part")]
    NotReal(usize),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl PfError {
    /// Stable machine-readable code, printed by the CLI and returned through the C ABI.
    pub fn code(&self) -> &'static str {
        match self {
            PfError::IndexOutOfWindow { .. } => "E_INDEX_OUT_OF_WINDOW",
            PfError::BudgetExceeded { .. } => "E_BUDGET_EXCEEDED",
            PfError::ParameterOutOfRange(_) => "E_PARAMETER_OUT_OF_RANGE",
            PfError::InvalidMinor(_) => "E_INVALID_MINOR",
            PfError::EmptySequence => "E_EMPTY_SEQUENCE",
            PfError::NotNormalized(_) => "E_NOT_NORMALIZED",
            PfError::WindowMismatch(_) => "E_WINDOW_MISMATCH",
            PfError::Infeasible(_) => "E_INFEASIBLE",
            PfError::MalformedPolyline(_) => "E_MALFORMED_POLYLINE",
            PfError::DomainInvalid(_) => "E_DOMAIN_INVALID",
            PfError::GeometryDegenerate(_) => "E_GEOMETRY_DEGENERATE",
            PfError::TailCondition(_) => "E_TAIL_CONDITION",
            PfError::NonPositiveT(_) => "E_NONPOSITIVE_T",
            PfError::ZeroCoefficient(_) => "E_ZERO_COEFFICIENT",
            PfError::NotPositive(_) => "E_NOT_POSITIVE",
            PfError::XOutOfRange(_) => "E_X_OUT_OF_RANGE",
            PfError::NotReal(_) => "E_NOT_REAL",
            PfError::Parse(_) => "E_PARSE",
            PfError::Io(_) => "E_IO",
        }
    }
}

impl From<serde_json::Error> for PfError {
    fn from(e: serde_json::Error) -> Self {
        PfError::Parse(e.to_string())
    }
}

impl From<std::io::Error> for PfError {
    fn from(e: std::io::Error) -> Self {
        PfError::Io(e.to_string())
    }
}
