use thiserror::Error;

/// Errors raised by the state algebra and the models built on it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} = {value} is outside its valid range {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("unknown mode `{0}`")]
    UnknownMode(String),
    #[error("mode `{0}` already exists")]
    DuplicateMode(String),
    #[error("occupation tuple {tuple:?} does not fit {modes} modes with cutoff {cutoff}")]
    MalformedTuple {
        tuple: Vec<u32>,
        modes: usize,
        cutoff: u32,
    },
    #[error("negative probability {value} for tuple {tuple:?}")]
    NegativeProbability { tuple: Vec<u32>, value: f64 },
    #[error("total probability {total} is not normalized")]
    NotNormalized { total: f64 },
    #[error("inconsistent source parameters: {0}")]
    InconsistentSource(String),
    #[error("{0} normalization is not defined for {1} sources")]
    UnsupportedNormalization(&'static str, &'static str),
    #[error("degenerate distribution: {0}")]
    Degenerate(&'static str),
    #[error("expected modes {expected:?}, found {found:?}")]
    ModeMismatch {
        expected: Vec<String>,
        found: Vec<String>,
    },
    #[error("cutoff mismatch: {0} vs {1}")]
    CutoffMismatch(u32, u32),
    #[error("enumeration would visit {paths} paths, above the bound of {bound}")]
    PathExplosion { paths: u64, bound: u64 },
    #[error("truncation leaves {lost} probability unaccounted, above {bound}")]
    Truncation { lost: f64, bound: f64 },
    #[error("click count {m} exceeds photon number {n}")]
    CountOrder { m: u32, n: u32 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
