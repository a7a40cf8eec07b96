//! Shared numerical kernels: special functions, bounded 1-d maximization,
//! Gauss-Legendre rules and compensated summation.

pub mod optimize;
pub mod quadrature;
pub mod special;
pub mod sum;
