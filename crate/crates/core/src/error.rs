use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("register of {requested} qubits exceeds the capacity of {limit} qubits")]
    Capacity { requested: usize, limit: usize },

    #[error("qubit {qubit} is out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },

    #[error("qubit {0} appears more than once")]
    DuplicateQubit(usize),

    #[error("index {index} is out of range {lo}..{hi}")]
    IndexOutOfRange { index: i64, lo: i64, hi: i64 },

    #[error("matrix is not unitary (max deviation {deviation:.3e})")]
    NonUnitary { deviation: f64 },

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NonHermitian { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("requested outcome has vanishing probability {probability:.3e}")]
    ZeroProbability { probability: f64 },

    #[error("state has zero norm")]
    ZeroNorm,

    #[error(
        "spectral bound violated: eigenvalue {eigenvalue} gives m0*exp(-eigenvalue*dtau) = {value} >= 1"
    )]
    SpectralBound { eigenvalue: f64, value: f64 },

    #[error("{what} = {value} is outside its domain")]
    Domain { what: &'static str, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("state has no antisymmetric component (norm {norm:.3e})")]
    VanishingAntisymmetric { norm: f64 },

    #[error("decay factor is undefined because gamma_gs vanishes")]
    DegenerateGamma,
}

impl Error {
    /// True for failures that stem from a numeric precondition of the
    /// physics (spectral bounds, domains, vanishing branches) rather than
    /// from malformed input.
    pub fn is_numeric_precondition(&self) -> bool {
        matches!(
            self,
            Error::SpectralBound { .. }
                | Error::Domain { .. }
                | Error::ZeroProbability { .. }
                | Error::VanishingAntisymmetric { .. }
                | Error::DegenerateGamma
                | Error::NonUnitary { .. }
                | Error::NonHermitian { .. }
        )
    }
}
