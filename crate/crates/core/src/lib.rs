//! Liouvillian spectra, eigenvector statistics, and driven dynamics of the
//! dissipative anisotropic Dicke model.

pub mod dynamics;
pub mod eigvec;
pub mod error;
pub mod expm;
pub mod hilbert;
pub mod integrate;
pub mod lapack;
pub mod liouvillian;
pub mod params;
pub mod rmtstats;
pub mod sparse;
pub mod spectra;

pub use error::{Error, Result};
pub use params::ModelParams;
