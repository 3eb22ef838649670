//! Finite-N and scaled-limit correlation kernels and densities for circular
//! Jacobi ensembles with a spectrum singularity.

pub mod asymptotics;
pub mod density;
pub mod error;
pub mod finite_kernels;
pub mod jack_series;
pub mod limiting_kernels;
pub mod quadrature;
pub mod routh_romanovski;
pub mod special_fns;

pub use error::{Error, Result};
