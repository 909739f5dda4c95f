pub mod analytic;
pub mod error;
pub mod experiments;
pub mod galerkin;
pub mod geometry;
pub mod kernels;
pub mod nystrom;
pub mod spaces;
pub mod specfun;

pub use error::{Error, Result};
