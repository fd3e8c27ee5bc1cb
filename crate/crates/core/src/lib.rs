// SPDX-License-Identifier: Apache-2.0

//! Euler approximations for mixed stochastic differential equations
//!
//! ```text
//! X_t = X_0 + ∫ a(s, X_s) ds + ∫ b(s, X_s) dW_s + ∫ c(X_s) dB^H_s,   H ∈ (1/2, 1)
//! ```
//!
//! driven by a Wiener process `W` and an independent fractional Brownian
//! motion `B^H`, together with the Monte Carlo machinery used to measure the
//! mean-square convergence rate `δ^{1/2} ∨ δ^{2H-1}` of the scheme.
//!
//! * [`noise`]: exact samplers for Brownian increments and fractional Gaussian noise.
//! * [`model`]: coefficient triples, hypothesis probing and the built-in catalog.
//! * [`scheme`]: the Euler recursion, interpolation, the Lamperti-type transform.
//! * [`analysis`]: coupled fine/coarse error estimation, rate fitting, moment diagnostics.

pub mod analysis;
mod error;
pub mod model;
pub mod noise;
pub mod quad;
pub mod scheme;
pub mod table;

pub use error::{Error, Result};
pub use model::{Coefficients, ModelSpec};
pub use noise::{GridSpec, HurstIndex, NoisePath};
pub use scheme::Trajectory;
