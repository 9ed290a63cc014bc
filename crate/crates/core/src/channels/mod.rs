//! Channel models and the exact or lattice laws of their log-likelihood ratios.

pub mod dmc;
pub mod gaussian;
pub mod quadform;

pub use dmc::{bsc, dmc_llr_atoms, dmc_llr_spectrum, lattice_step, llr_law_is_input_invariant, nfold_spectrum, DMWiretap, Kernel};
pub use gaussian::{gauss_conv_llr, gauss_eve_llr, GaussianWiretap, Measure};
pub use quadform::{quadform_cdf, QuadFormLLR, QuadFormTable, QuadTerm};
