use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid atom array: {0}")]
    InvalidArray(String),

    #[error("atom index {index} out of range for array of {len} atoms")]
    IndexOutOfRange { index: usize, len: usize },

    /// Pair quantities were requested for a single atom.
    #[error("pair quantities need distinct atoms (got {0} twice); use single_atom_characteristics")]
    SameAtom(usize),

    #[error("singular scattering system at detuning {detuning}: probe sits on eigenvalue {eigenvalue}")]
    SingularSystem { detuning: f64, eigenvalue: Complex64 },

    #[error("degenerate spectrum: eigenvalue cluster {cluster:?} is defective (exceptional point)")]
    DegenerateSpectrum { cluster: Vec<Complex64> },

    #[error("transfer-matrix pole: detuning {detuning} equals the Lamb-shifted resonance of atom {atom}")]
    Pole { atom: usize, detuning: f64 },

    #[error("configuration is not separate; the cascade needs disjoint atoms")]
    NotSeparate,

    #[error("array is not periodic: {0}")]
    NotPeriodic(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("chain is not in the topological phase (mu = {mu} >= 1)")]
    NonTopological { mu: f64 },

    #[error("least-squares fit did not converge after {iterations} iterations (cost trace {trace:?})")]
    NonConvergence { iterations: usize, trace: Vec<f64> },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    TomlParse(#[from] toml::de::Error),

    #[error(transparent)]
    TomlWrite(#[from] toml::ser::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
