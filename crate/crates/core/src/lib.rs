//! One-dimensional wave scattering via 2×2 transfer matrices.
//!
//! The crate computes reflection and transmission amplitudes for point
//! interactions, rectangular barriers and sampled complex potentials, applies
//! parity, time-reversal and PT transforms, locates spectral singularities,
//! resonances and bound states in the complex `k` plane, and checks the
//! algebraic identities the scattering data must obey.
//!
//! Natural units with `ħ = 2m = 1` are used throughout, so `E = k²`.
//!
//! ```
//! use scatter1d::{models::PotentialModel, scattering_from_transfer, ScatteringSystem, C64};
//!
//! let delta = PotentialModel::Delta { z: C64::new(0.0, 2.0) };
//! let m = delta.transfer_matrix(C64::new(2.0, 0.0)).unwrap();
//! let d = scattering_from_transfer(&m).unwrap();
//! assert!((d.t_l - C64::new(2.0, 0.0)).norm() < 1e-14);
//! ```

// `!(x > 0.0)` style guards are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod grid;
pub mod models;
pub mod spectra;
pub mod symmetry;
pub mod transfer;
pub mod verify;

pub use error::{Result, ScatterError};
pub use transfer::{
    compose, det_s, negative_k_data, principal_sqrt, s_eigenvalues, s_matrix,
    scattering_from_transfer, scattering_from_transfer_with_floor, transfer_from_scattering,
    wronskian_constant, CoefficientPair, Matrix2, SConvention, SMatrix, ScatteringData,
    TransferMatrix,
};

pub type C64 = num_complex::Complex64;

/// Anything that yields a transfer matrix at a (possibly complex) wavenumber.
///
/// Implementations must be safe to call concurrently.
pub trait ScatteringSystem: Sync {
    fn transfer_matrix(&self, k: C64) -> Result<TransferMatrix>;

    /// Expected value of `det M(k)` when it is known independently of the
    /// transfer matrix, e.g. the product of matching-matrix determinants.
    fn expected_det(&self, _k: C64) -> Option<Result<C64>> {
        None
    }

    /// Characteristic length used to scale default wavenumber grids.
    fn length_scale(&self) -> f64 {
        1.0
    }
}
