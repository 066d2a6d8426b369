//! Penalized maximum likelihood, Laplace approximation certificates and
//! their brute-force references.
#![no_std]

extern crate alloc;

pub mod eio;
pub mod error;
pub mod gauss_compare;
pub mod laplace;
pub mod linalg;
pub mod marginal;
pub mod oracle;
pub mod pmle;
pub mod rng;
pub mod sls;
pub mod sobolev;

pub use error::{Error, Result};
