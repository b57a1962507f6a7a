//! Spectral theory of discrete periodic Schrödinger operators `Δ + V` on `Z^d`.
//!
//! - [`lattice`]: period lattice and fundamental-domain indexing.
//! - [`potential`]: potentials, discrete Fourier transform, separable decompositions.
//! - [`floquet`]: Floquet matrices in the direct and Fourier bases, band spectra.
//! - [`laurent`]: Laurent polynomials and recovery of the Fermi polynomial.
//! - [`isospectral`]: Fermi and Floquet isospectrality decisions and identity checks.
//! - [`io`]: file formats for potentials, polynomials and band tables.

pub mod error;
pub mod fft;
pub mod floquet;
pub mod io;
pub mod isospectral;
pub mod lattice;
pub mod laurent;
pub mod linalg;
pub mod potential;

pub use error::{Error, Result};
pub use floquet::{band_structure, build_direct, build_fourier, char_poly_value, spectrum_at, Basis, FloquetMatrix, SpectrumSample};
pub use isospectral::{
    ambarzumian_check, classify_unity_determinants, compare_bloch, fermi_isospectral, floquet_isospectral,
    floquet_isospectral_seeded, fourier_shell_sum, rigidity_suite, verify_g55, verify_mean_identity,
    verify_shell_identities, BlochData, IsospectralityReport, Method, RigidityReport, ShellSpec, Transform, Witness,
};
pub use lattice::{Lattice, MultiIndex};
pub use laurent::{fermi_poly, poly_equal, LaurentPoly};
pub use potential::{combine_separable, FourierCoeffs, Partition, Potential};
pub use num_complex::Complex64;

/// Default seed for every randomized routine.
pub const DEFAULT_SEED: u64 = 0xF3E1;
