//! Numerical primitives: special functions, noncentral chi-square laws,
//! quadrature and lattice spectra of log-likelihood ratios.

pub mod ncchi2;
pub mod quad;
pub mod special;
pub mod spectrum;

pub use ncchi2::{nc_chi2_cdf, NoncentralChi2};
pub use special::{q_func, q_inv, reg_inc_beta};
pub use spectrum::{LogSpectrum, SpectrumTails, MAX_BINS};
