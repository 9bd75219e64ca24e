//! Boosted complex free-field covariances: symbols, kernels, reflection
//! positivity, thermal structures and truncated Fock spectra.

pub mod error;
pub mod fock;
pub mod gaussian;
pub mod io;
pub mod kernels;
pub mod modes;
pub mod periodize;
pub mod testfn;
pub mod thermal;
pub mod linalg;
pub mod quad;
pub mod rp;
pub mod special;
pub mod symbols;

pub use error::{Error, Result};
pub use symbols::{BoostSpec, Momentum};
