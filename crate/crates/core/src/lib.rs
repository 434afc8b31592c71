//! Numerical laboratory for two-layer multi-scale sine networks.
//!
//! * [`hermite`] and [`quadrature`]: Hermite functions, connection
//!   coefficients, Gauss rules.
//! * [`spectral`]: diffusion coefficients, Hermite–Galerkin assembly and
//!   backward-Euler evolution of the frequency-domain training error.
//! * [`net`]: the multi-scale network, closed-form gradients and full-batch
//!   gradient descent.
//! * [`ntk`]: empirical and infinite-width neural tangent kernels.
//! * [`xform`]: analytic Fourier transforms of the target and the network,
//!   inverse transforms of Hermite expansions and quadrature oracles.
//! * [`harness`]: experiment drivers, CSV/JSON/SVG output.

pub mod error;
pub mod exec;
pub mod harness;
pub mod hermite;
pub mod net;
pub mod ntk;
pub mod quadrature;
pub mod spectral;
pub mod xform;

pub use error::{Error, Result};
pub use exec::Exec;
