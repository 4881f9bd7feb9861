pub mod asympt;
pub mod error;
pub mod hankelproc;
pub mod harness;
pub mod jacobi;
pub mod logbeta;
pub mod momentspace;
pub mod quad;
pub mod rng;
pub mod specfun;
pub mod stats;

pub use error::{Error, Result};
