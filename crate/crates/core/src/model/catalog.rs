// SPDX-License-Identifier: Apache-2.0

use super::{Coefficients, ModelSpec, ProbeDomain};
use crate::{Error, HurstIndex, Result};

/// Constant coefficients `a ≡ α₀`, `b ≡ β₀`, `c ≡ γ₀`. The solution is
/// `X_t = x0 + α₀ t + β₀ W_t + γ₀ B^H_t` and the Euler scheme reproduces it
/// exactly at grid nodes.
#[derive(Clone, Copy, Debug)]
pub struct Additive {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Coefficients for Additive {
    fn drift(&self, _t: f64, _x: f64) -> f64 {
        self.alpha
    }
    fn diffusion(&self, _t: f64, _x: f64) -> f64 {
        self.beta
    }
    fn fbm_diffusion(&self, _x: f64) -> f64 {
        self.gamma
    }
    fn drift_dx(&self, _t: f64, _x: f64) -> f64 {
        0.0
    }
    fn diffusion_dx(&self, _t: f64, _x: f64) -> f64 {
        0.0
    }
    fn fbm_diffusion_dx(&self, _x: f64) -> f64 {
        0.0
    }
    fn fbm_diffusion_dxx(&self, _x: f64) -> f64 {
        0.0
    }
}

/// `a = cos x`, `b = 1 + sin(x)/2`, `c = 2 + sin x`.
#[derive(Clone, Copy, Debug)]
pub struct Trig;

impl Coefficients for Trig {
    fn drift(&self, _t: f64, x: f64) -> f64 {
        x.cos()
    }
    fn diffusion(&self, _t: f64, x: f64) -> f64 {
        1.0 + 0.5 * x.sin()
    }
    fn fbm_diffusion(&self, x: f64) -> f64 {
        2.0 + x.sin()
    }
    fn drift_dx(&self, _t: f64, x: f64) -> f64 {
        -x.sin()
    }
    fn diffusion_dx(&self, _t: f64, x: f64) -> f64 {
        0.5 * x.cos()
    }
    fn fbm_diffusion_dx(&self, x: f64) -> f64 {
        x.cos()
    }
    fn fbm_diffusion_dxx(&self, x: f64) -> f64 {
        -x.sin()
    }
}

/// Time-inhomogeneous model whose drift carries a `t^{2H-1}` term, i.e. it is
/// exactly as rough in time as the time-Hölder hypothesis permits:
/// `a = t^{2H-1}/2 + sin(x)/4`, `b = 1 + cos(x)/4`, `c = 2 + sin(x)/2`.
#[derive(Clone, Copy, Debug)]
pub struct TimeHoelder {
    pub exponent: f64,
}

impl TimeHoelder {
    pub fn new(h: HurstIndex) -> Self {
        Self {
            exponent: 2.0 * h.value() - 1.0,
        }
    }
}

impl Coefficients for TimeHoelder {
    fn drift(&self, t: f64, x: f64) -> f64 {
        0.5 * t.max(0.0).powf(self.exponent) + 0.25 * x.sin()
    }
    fn diffusion(&self, _t: f64, x: f64) -> f64 {
        1.0 + 0.25 * x.cos()
    }
    fn fbm_diffusion(&self, x: f64) -> f64 {
        2.0 + 0.5 * x.sin()
    }
    fn drift_dx(&self, _t: f64, x: f64) -> f64 {
        0.25 * x.cos()
    }
    fn diffusion_dx(&self, _t: f64, x: f64) -> f64 {
        -0.25 * x.sin()
    }
    fn fbm_diffusion_dx(&self, x: f64) -> f64 {
        0.5 * x.cos()
    }
    fn fbm_diffusion_dxx(&self, x: f64) -> f64 {
        -0.5 * x.sin()
    }
}

type TimeStateFn = Box<dyn Fn(f64, f64) -> f64 + Send + Sync>;
type StateFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// Coefficients assembled from closures. Unset pieces default to
/// `a = 0`, `b = 0`, `c = 1` with zero derivatives.
pub struct FnCoefficients {
    a: TimeStateFn,
    a_x: TimeStateFn,
    b: TimeStateFn,
    b_x: TimeStateFn,
    c: StateFn,
    c_x: StateFn,
    c_xx: StateFn,
}

impl Default for FnCoefficients {
    fn default() -> Self {
        Self {
            a: Box::new(|_, _| 0.0),
            a_x: Box::new(|_, _| 0.0),
            b: Box::new(|_, _| 0.0),
            b_x: Box::new(|_, _| 0.0),
            c: Box::new(|_| 1.0),
            c_x: Box::new(|_| 0.0),
            c_xx: Box::new(|_| 0.0),
        }
    }
}

impl FnCoefficients {
    pub fn drift(
        mut self,
        a: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        a_x: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.a = Box::new(a);
        self.a_x = Box::new(a_x);
        self
    }

    pub fn diffusion(
        mut self,
        b: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        b_x: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.b = Box::new(b);
        self.b_x = Box::new(b_x);
        self
    }

    pub fn fbm_diffusion(
        mut self,
        c: impl Fn(f64) -> f64 + Send + Sync + 'static,
        c_x: impl Fn(f64) -> f64 + Send + Sync + 'static,
        c_xx: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.c = Box::new(c);
        self.c_x = Box::new(c_x);
        self.c_xx = Box::new(c_xx);
        self
    }
}

impl Coefficients for FnCoefficients {
    fn drift(&self, t: f64, x: f64) -> f64 {
        (self.a)(t, x)
    }
    fn diffusion(&self, t: f64, x: f64) -> f64 {
        (self.b)(t, x)
    }
    fn fbm_diffusion(&self, x: f64) -> f64 {
        (self.c)(x)
    }
    fn drift_dx(&self, t: f64, x: f64) -> f64 {
        (self.a_x)(t, x)
    }
    fn diffusion_dx(&self, t: f64, x: f64) -> f64 {
        (self.b_x)(t, x)
    }
    fn fbm_diffusion_dx(&self, x: f64) -> f64 {
        (self.c_x)(x)
    }
    fn fbm_diffusion_dxx(&self, x: f64) -> f64 {
        (self.c_xx)(x)
    }
}

/// A catalog entry: models may depend on the Hurst index (the time-Hölder
/// model matches its roughness to `H`), so entries hold a constructor.
#[derive(Clone, Copy)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub summary: &'static str,
    build: fn(HurstIndex) -> ModelSpec,
    x_range: (f64, f64),
}

impl CatalogEntry {
    pub fn build(&self, h: HurstIndex) -> ModelSpec {
        (self.build)(h)
    }

    /// The domain on which the entry is declared to satisfy the hypotheses.
    pub fn probe_domain(&self, horizon: f64) -> ProbeDomain {
        ProbeDomain::new((0.0, horizon), self.x_range, 41, 201)
            .expect("catalog probe domains are valid")
    }
}

fn additive(_: HurstIndex) -> ModelSpec {
    ModelSpec::new(
        "additive",
        0.0,
        2.0,
        Additive {
            alpha: 1.0,
            beta: 1.0,
            gamma: 1.0,
        },
    )
}

fn trig(_: HurstIndex) -> ModelSpec {
    // sup (c + 1/c + |c'| + |c''|) ≈ 4.582, attained near sin x ≈ 0.88
    // where |c'| and |c''| are both still large.
    ModelSpec::new("trig", 0.0, 5.0, Trig)
}

fn time_hoelder(h: HurstIndex) -> ModelSpec {
    ModelSpec::new("time-hoelder", 0.0, 4.0, TimeHoelder::new(h))
}

/// The built-in models, referenced by name from experiment configs.
pub fn builtin_models() -> &'static [CatalogEntry] {
    const CATALOG: &[CatalogEntry] = &[
        CatalogEntry {
            name: "additive",
            summary: "a = 1, b = 1, c = 1, x0 = 0 (Euler is exact)",
            build: additive,
            x_range: (-10.0, 10.0),
        },
        CatalogEntry {
            name: "trig",
            summary: "a = cos x, b = 1 + sin(x)/2, c = 2 + sin x, x0 = 0",
            build: trig,
            x_range: (-10.0, 10.0),
        },
        CatalogEntry {
            name: "time-hoelder",
            summary: "a = t^(2H-1)/2 + sin(x)/4, b = 1 + cos(x)/4, c = 2 + sin(x)/2, x0 = 0",
            build: time_hoelder,
            x_range: (-10.0, 10.0),
        },
    ];
    CATALOG
}

/// Looks a model up by name and instantiates it for `h`.
pub fn lookup(name: &str, h: HurstIndex) -> Result<ModelSpec> {
    builtin_models()
        .iter()
        .find(|e| e.name == name)
        .map(|e| e.build(h))
        .ok_or_else(|| {
            let known: Vec<&str> = builtin_models().iter().map(|e| e.name).collect();
            Error::Domain(format!(
                "unknown model `{name}` (known: {})",
                known.join(", ")
            ))
        })
}
