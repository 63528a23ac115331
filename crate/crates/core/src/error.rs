use crate::C64;

/// Errors raised by the scattering engine.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScatterError {
    #[error(
        "transfer matrices evaluated at different wavenumbers: expected {expected}, found {found}"
    )]
    MismatchedWavenumber { expected: C64, found: C64 },

    #[error("|M22| = {m22_abs:e} is below the floor {floor:e}; amplitudes diverge near a spectral singularity")]
    SpectralSingularityProximity { m22_abs: f64, floor: f64 },

    #[error("transmission amplitude t_r vanishes; no transfer matrix exists")]
    ZeroTransmission,

    #[error("matrix is singular (det = {det})")]
    SingularMatrix { det: C64 },

    #[error("wavenumber k = 0 is not a valid scattering wavenumber")]
    ZeroWavenumber,

    #[error("det S = M11/M22 vanishes at k = {k}")]
    VanishingDeterminantS { k: C64 },

    #[error("transmission is not reciprocal: t_l = {t_l}, t_r = {t_r}")]
    NonReciprocal { t_l: C64, t_r: C64 },

    #[error("refractive index vanishes (z = k^2)")]
    ZeroRefractiveIndex,

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("| |det S| - 1 | = {deviation:e} exceeds tolerance; det S is not unimodular")]
    NotUnimodular { deviation: f64 },

    #[error("iteration did not converge after {iterations} steps (last residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("k0 = {k0} is not a spectral singularity (|M22| = {residual:e})")]
    NotASingularity { k0: f64, residual: f64 },

    #[error("duplicate sample value {0}")]
    DuplicateSamples(f64),

    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, ScatterError>;
