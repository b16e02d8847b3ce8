use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("degenerate spectrum: repeated eigenvalue {0} is zero within tolerance")]
    DegenerateSpectrum(f64),

    #[error("wrong spectral structure: expected {expected}, found {found}")]
    WrongStructure {
        expected: &'static str,
        found: &'static str,
    },

    #[error("spectrum mismatch: {0}")]
    SpectrumMismatch(String),

    #[error("inconsistent bound parameters: {0}")]
    InconsistentParams(String),

    #[error("invalid system configuration: {0}")]
    Config(String),
}
