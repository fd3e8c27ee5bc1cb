// SPDX-License-Identifier: Apache-2.0

//! Coefficients `a(t, x)`, `b(t, x)`, `c(x)` of the mixed equation, finite
//! probing of the standing hypotheses, and the built-in model catalog.

mod catalog;
mod hypotheses;

use std::fmt;
use std::sync::Arc;

pub use catalog::{
    builtin_models, lookup, Additive, CatalogEntry, FnCoefficients, TimeHoelder, Trig,
};
pub use hypotheses::{
    check_hypotheses, DerivativeCheck, HypothesisOutcome, HypothesisReport, ProbeDomain, Witness,
};

/// The coefficient functions of
/// `dX = a(t, X) dt + b(t, X) dW + c(X) dB^H` together with the state
/// derivatives the scheme diagnostics need. Implementations must be pure.
pub trait Coefficients: Send + Sync {
    /// Drift `a(t, x)`.
    fn drift(&self, t: f64, x: f64) -> f64;
    /// Brownian diffusion `b(t, x)`.
    fn diffusion(&self, t: f64, x: f64) -> f64;
    /// Fractional diffusion `c(x)`.
    fn fbm_diffusion(&self, x: f64) -> f64;

    fn drift_dx(&self, t: f64, x: f64) -> f64;
    fn diffusion_dx(&self, t: f64, x: f64) -> f64;
    fn fbm_diffusion_dx(&self, x: f64) -> f64;
    fn fbm_diffusion_dxx(&self, x: f64) -> f64;
}

/// A named model: coefficients, initial state `X_0` and hypothesis constant `K`.
#[derive(Clone)]
pub struct ModelSpec {
    pub name: String,
    pub x0: f64,
    pub bound: f64,
    coefficients: Arc<dyn Coefficients>,
}

impl fmt::Debug for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModelSpec")
            .field("name", &self.name)
            .field("x0", &self.x0)
            .field("bound", &self.bound)
            .finish_non_exhaustive()
    }
}

impl ModelSpec {
    pub fn new(
        name: impl Into<String>,
        x0: f64,
        bound: f64,
        coefficients: impl Coefficients + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            x0,
            bound,
            coefficients: Arc::new(coefficients),
        }
    }

    pub fn coefficients(&self) -> &dyn Coefficients {
        self.coefficients.as_ref()
    }

    #[inline]
    pub fn a(&self, t: f64, x: f64) -> f64 {
        self.coefficients.drift(t, x)
    }

    #[inline]
    pub fn b(&self, t: f64, x: f64) -> f64 {
        self.coefficients.diffusion(t, x)
    }

    #[inline]
    pub fn c(&self, x: f64) -> f64 {
        self.coefficients.fbm_diffusion(x)
    }

    #[inline]
    pub fn a_x(&self, t: f64, x: f64) -> f64 {
        self.coefficients.drift_dx(t, x)
    }

    #[inline]
    pub fn b_x(&self, t: f64, x: f64) -> f64 {
        self.coefficients.diffusion_dx(t, x)
    }

    #[inline]
    pub fn c_x(&self, x: f64) -> f64 {
        self.coefficients.fbm_diffusion_dx(x)
    }

    #[inline]
    pub fn c_xx(&self, x: f64) -> f64 {
        self.coefficients.fbm_diffusion_dxx(x)
    }

    /// Same coefficients with a different starting point.
    pub fn with_x0(mut self, x0: f64) -> Self {
        self.x0 = x0;
        self
    }
}
