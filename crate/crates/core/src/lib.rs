//! Fractional Besov and Nikol'skii semi-norms, BBM-type nonlocal functionals and
//! their limits, evaluated on functions sampled on uniform lattices.

pub mod cli;
pub mod counterexamples;
pub mod error;
pub mod findiff;
pub mod functionals;
pub mod gridfn;
pub mod kernels;
pub mod limits;
pub mod omega;
pub mod quad;
pub mod spec;

pub use error::{Error, Result};
