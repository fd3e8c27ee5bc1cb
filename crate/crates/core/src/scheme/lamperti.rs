// SPDX-License-Identifier: Apache-2.0

//! Lamperti-type transform `ψ(x) = ∫₀ˣ dz / c(z)`.
//!
//! Under `ψ` the fractional noise becomes additive:
//! `dψ(X) = α(t, X) dt + β(t, X) dW + dB^H` with
//! `α = a/c - b² c' / (2c²)` and `β = b/c`.

use std::fmt;

use crate::model::ModelSpec;
use crate::noise::NoisePath;
use crate::quad::integrate;
use crate::scheme::Trajectory;
use crate::{Error, Result};

/// Absolute tolerance of the quadrature behind `ψ`.
pub const PSI_TOLERANCE: f64 = 1e-10;
const SEGMENT_TOLERANCE: f64 = 1e-14;
const DEFAULT_HALF_WIDTH: f64 = 64.0;
const NODES_PER_UNIT: usize = 256;

/// `ψ`, its inverse, and the transformed coefficients `α`, `β`.
///
/// `ψ` is tabulated once at construction on `[-R, R]` (cumulative adaptive
/// quadrature between nodes) and evaluated by cubic Hermite interpolation
/// using the exact slopes `1/c`. Points outside the table fall back to direct
/// quadrature from the nearest table edge.
#[derive(Clone)]
pub struct TransformedModel {
    model: ModelSpec,
    lo: f64,
    step: f64,
    psi: Vec<f64>,
    slope: Vec<f64>,
    c_max: f64,
}

impl fmt::Debug for TransformedModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TransformedModel")
            .field("model", &self.model.name)
            .field("range", &(self.lo, self.hi()))
            .field("nodes", &self.psi.len())
            .finish()
    }
}

/// Builds the transform of `model` with the default table `[-64, 64]`.
pub fn lamperti_transform(model: &ModelSpec) -> Result<TransformedModel> {
    TransformedModel::with_half_width(model, DEFAULT_HALF_WIDTH)
}

impl TransformedModel {
    pub fn with_half_width(model: &ModelSpec, half_width: f64) -> Result<Self> {
        if !(half_width > 0.0) {
            return Err(Error::Domain(format!("table half width must be positive, got {half_width}")));
        }
        let per_side = (half_width * NODES_PER_UNIT as f64).ceil() as usize;
        let step = 1.0 / NODES_PER_UNIT as f64;
        let lo = -(per_side as f64) * step;
        let count = 2 * per_side + 1;

        let mut slope = Vec::with_capacity(count);
        let mut c_max = 0.0f64;
        for i in 0..count {
            let x = lo + i as f64 * step;
            let c = model.c(x);
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::Domain(format!(
                    "c({x}) = {c}: the transform needs a uniformly positive c"
                )));
            }
            c_max = c_max.max(c);
            slope.push(1.0 / c);
        }

        let inv_c = |z: f64| 1.0 / model.c(z);
        let mut psi = vec![0.0; count];
        for j in 0..per_side {
            let (i, x) = (per_side + j, j as f64 * step);
            psi[i + 1] = psi[i] + integrate(inv_c, x, x + step, SEGMENT_TOLERANCE)?;
            let (i, x) = (per_side - j, -(j as f64) * step);
            psi[i - 1] = psi[i] - integrate(inv_c, x - step, x, SEGMENT_TOLERANCE)?;
        }

        Ok(Self {
            model: model.clone(),
            lo,
            step,
            psi,
            slope,
            c_max,
        })
    }

    pub fn model(&self) -> &ModelSpec {
        &self.model
    }

    fn hi(&self) -> f64 {
        self.lo + (self.psi.len() - 1) as f64 * self.step
    }

    /// `ψ(x)` computed by adaptive quadrature from 0, bypassing the table.
    pub fn psi_quadrature(&self, x: f64) -> Result<f64> {
        integrate(|z| 1.0 / self.model.c(z), 0.0, x, PSI_TOLERANCE)
    }

    pub fn psi(&self, x: f64) -> Result<f64> {
        let (lo, hi) = (self.lo, self.hi());
        if x < lo || x > hi {
            let (edge, base) = if x < lo {
                (lo, self.psi[0])
            } else {
                (hi, self.psi[self.psi.len() - 1])
            };
            return Ok(base + integrate(|z| 1.0 / self.model.c(z), edge, x, PSI_TOLERANCE)?);
        }
        let pos = (x - lo) / self.step;
        let i = (pos.floor() as usize).min(self.psi.len() - 2);
        let s = pos - i as f64;
        // cubic Hermite basis on [x_i, x_{i+1}]
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        Ok(h00 * self.psi[i]
            + h10 * self.step * self.slope[i]
            + h01 * self.psi[i + 1]
            + h11 * self.step * self.slope[i + 1])
    }

    /// `ψ⁻¹(y)` by safeguarded Newton iteration.
    pub fn psi_inv(&self, y: f64) -> Result<f64> {
        self.psi_inv_near(y, y * self.model.c(0.0))
    }

    /// `ψ⁻¹(y)` starting the search at `hint`.
    pub fn psi_inv_near(&self, y: f64, hint: f64) -> Result<f64> {
        if !y.is_finite() || !hint.is_finite() {
            return Err(Error::Numerical(format!("cannot invert ψ at y = {y}")));
        }
        let mut x = hint;
        let mut r = self.psi(x)? - y;
        if r == 0.0 {
            return Ok(x);
        }
        // ψ' = 1/c, so the root is within c_max·|r| of x (outside the table
        // c is unknown; widen and let bisection sort it out)
        let reach = 2.0 * self.c_max * r.abs() + f64::EPSILON * (1.0 + x.abs());
        let (mut lo, mut hi) = if r > 0.0 { (x - reach, x) } else { (x, x + reach) };
        while self.psi(lo)? > y {
            lo -= hi - lo;
        }
        while self.psi(hi)? < y {
            hi += hi - lo;
        }

        for _ in 0..100 {
            let mut next = x - r * self.model.c(x);
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            let converged = (next - x).abs() <= 2.0 * f64::EPSILON * (1.0 + x.abs());
            x = next;
            if converged {
                return Ok(x);
            }
            r = self.psi(x)? - y;
            if r == 0.0 {
                return Ok(x);
            }
            if r > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            if hi - lo <= 2.0 * f64::EPSILON * (1.0 + x.abs()) {
                return Ok(x);
            }
        }
        Err(Error::Numerical(format!("ψ⁻¹({y}) did not converge")))
    }

    /// `α(t, x) = a/c - b² c' / (2c²)`.
    pub fn alpha(&self, t: f64, x: f64) -> f64 {
        let m = &self.model;
        let c = m.c(x);
        let b = m.b(t, x);
        m.a(t, x) / c - b * b * m.c_x(x) / (2.0 * c * c)
    }

    /// `β(t, x) = b/c`.
    pub fn beta(&self, t: f64, x: f64) -> f64 {
        self.model.b(t, x) / self.model.c(x)
    }

    fn step(&self, noise: &NoisePath, k: usize, x: f64, y: f64) -> Result<(f64, f64)> {
        let grid = &noise.grid;
        let t = grid.node(k);
        let y = y + self.alpha(t, x) * grid.mesh() + self.beta(t, x) * noise.dw[k] + noise.dbh[k];
        if !y.is_finite() {
            return Err(Error::NonFinite { step: k, t, x });
        }
        let x = self.psi_inv_near(y, x)?;
        Ok((x, y))
    }
}

/// Euler scheme applied to the transformed equation
/// `Y_{k+1} = Y_k + α δ + β ΔW_k + ΔB^H_k`, mapped back with `ψ⁻¹`.
///
/// The fractional noise enters additively, so this path does not carry the
/// `δ^{2H-1}` error term of the plain scheme.
pub fn lamperti_euler_path<'a>(
    transformed: &'a TransformedModel,
    noise: &'a NoisePath,
) -> Result<Trajectory<'a>> {
    let model = transformed.model();
    let mut values = Vec::with_capacity(noise.grid.steps() + 1);
    let mut x = model.x0;
    let mut y = transformed.psi(x)?;
    values.push(x);
    for k in 0..noise.grid.steps() {
        (x, y) = transformed.step(noise, k, x, y)?;
        values.push(x);
    }
    Ok(Trajectory {
        grid: noise.grid,
        values,
        model,
        noise,
    })
}

/// Terminal value of [`lamperti_euler_path`].
pub fn lamperti_euler_terminal(transformed: &TransformedModel, noise: &NoisePath) -> Result<f64> {
    let mut x = transformed.model().x0;
    let mut y = transformed.psi(x)?;
    for k in 0..noise.grid.steps() {
        (x, y) = transformed.step(noise, k, x, y)?;
    }
    Ok(x)
}
