//! Convolution operators built from probability-density kernels: kernel
//! evaluation, two independent evaluation paths (direct quadrature and
//! FFT), Fourier symbols, and numerical checks of the evolution equations
//! and approximation bounds the operators satisfy.

pub mod approx_bounds;
pub mod engine;
pub mod error;
pub mod grid;
pub mod kernels;
pub mod operators;
pub mod pde_verify;
pub mod quadrature;
pub mod spectral;
pub mod testfn;

pub use error::{Error, Result};
pub use grid::{GridFunction, GridSpec};
pub use kernels::{KernelId, Time, WjVariant};
pub use quadrature::QuadratureSpec;
pub use testfn::TestFunction;
