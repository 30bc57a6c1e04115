//! Nonlocal wave propagation on unbounded domains with nonlocal perfectly
//! matched layers.
//!
//! The PML-modified operator is a time convolution; it is realised through a
//! Talbot-contour quadrature of the inverse Laplace transform, which turns it
//! into `m` auxiliary ODEs per grid node. Space is discretized with an
//! asymptotically compatible quadrature-based scheme and time with a
//! staggered Verlet-type integrator.

pub mod discretize;
pub mod error;
pub mod integrate;
pub mod kernels;
pub mod metrics;
pub mod presets;
pub mod quad;
pub mod reference;
pub mod stretch;
pub mod talbot;

pub use error::{Error, Result};
pub use kernels::{CustomKernel, KernelKind, KernelSpec};
pub use num_complex::Complex64;
