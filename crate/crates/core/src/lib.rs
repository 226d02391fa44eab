//! Certified brackets for covering numbers, entropy numbers, Kolmogorov widths
//! and Lipschitz-width constructions on finite point sets and on the
//! `K_sigma` sequence model.
//!
//! Every computed quantity is returned as a [`Bracket`]: a lower and an upper
//! bound, each tagged with the [`Method`] that produced it.

pub mod cli;
pub mod entropy;
pub mod error;
pub mod harness;
pub mod lipschitz;
pub mod mterm;
pub mod spaces;
pub mod widths;

pub use error::{Error, Result};
pub use spaces::{Bracket, CompactSetModel, Method, NormSpec};
