// SPDX-License-Identifier: Apache-2.0

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::{Error, Result};

/// Mean-square rate exponent `min(1/2, 2H - 1)`: the Brownian rate above
/// `H = 3/4`, the fractional one below it.
pub fn theoretical_rate(h: f64) -> Result<f64> {
    if h > 0.5 && h < 1.0 {
        Ok(0.5f64.min(2.0 * h - 1.0))
    } else {
        Err(Error::Domain(format!("rate is defined for 1/2 < H < 1, got {h}")))
    }
}

/// Weighted log-log regression of error against mesh.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    /// 95% confidence interval for the slope.
    pub ci: (f64, f64),
}

impl RateFit {
    pub fn ci_contains(&self, value: f64) -> bool {
        self.ci.0 <= value && value <= self.ci.1
    }

    /// The same fit with an externally estimated slope standard error and
    /// the normal 95% interval around it.
    pub fn with_stderr(self, slope_stderr: f64) -> Self {
        let z = Normal::standard().inverse_cdf(0.975);
        Self {
            slope_stderr,
            ci: (self.slope - z * slope_stderr, self.slope + z * slope_stderr),
            ..self
        }
    }
}

/// Fits `log rmse = intercept + slope · log delta` to `(delta, rmse, stderr)`
/// points by weighted least squares with weights `(rmse / stderr)²`, the
/// inverse variance of `log rmse` to first order. If any standard error is
/// zero or missing all points get equal weight.
///
/// The interval is `slope ± t_{0.975, n-2} · se`, where `se` is the usual
/// residual-based standard error of the slope.
pub fn fit_rate(points: &[(f64, f64, f64)]) -> Result<RateFit> {
    let rows = design(points)?;
    let (x_bar, y_bar, sxx) = moments(&rows);
    let sxy: f64 = rows.iter().map(|r| r.2 * (r.0 - x_bar) * (r.1 - y_bar)).sum();
    let slope = sxy / sxx;
    let intercept = y_bar - slope * x_bar;

    let dof = (rows.len() - 2) as f64;
    let rss: f64 = rows
        .iter()
        .map(|r| r.2 * (r.1 - intercept - slope * r.0).powi(2))
        .sum();
    let slope_stderr = (rss / dof / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, dof)
        .map_err(|e| Error::Numerical(e.to_string()))?
        .inverse_cdf(0.975);
    Ok(RateFit {
        slope,
        intercept,
        slope_stderr,
        ci: (slope - t * slope_stderr, slope + t * slope_stderr),
    })
}

/// Coefficients `c_i` with `slope = Σ c_i log rmse_i` under the weights of
/// [`fit_rate`]. Propagating a covariance of the `log rmse_i` through them
/// gives the slope variance.
pub fn slope_contrasts(points: &[(f64, f64, f64)]) -> Result<Vec<f64>> {
    let rows = design(points)?;
    let (x_bar, _, sxx) = moments(&rows);
    Ok(rows.iter().map(|r| r.2 * (r.0 - x_bar) / sxx).collect())
}

// (log delta, log rmse, weight) rows after validation.
fn design(points: &[(f64, f64, f64)]) -> Result<Vec<(f64, f64, f64)>> {
    if points.len() < 3 {
        return Err(Error::Plan(format!(
            "rate fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    if let Some(&(delta, _, _)) = points.iter().find(|p| !(p.1 > 0.0)) {
        return Err(Error::DegenerateFit(format!(
            "non-positive error at delta = {delta}"
        )));
    }
    if points.iter().any(|p| !(p.0 > 0.0)) {
        return Err(Error::Domain("meshes must be positive".into()));
    }
    let informative = points.iter().all(|p| p.2 > 0.0 && p.2.is_finite());
    let rows: Vec<(f64, f64, f64)> = points
        .iter()
        .map(|&(delta, rmse, stderr)| {
            let w = if informative { (rmse / stderr).powi(2) } else { 1.0 };
            (delta.ln(), rmse.ln(), w)
        })
        .collect();
    let (_, _, sxx) = moments(&rows);
    if points.iter().all(|p| p.0 == points[0].0) || !(sxx > 0.0) {
        return Err(Error::DegenerateFit("all meshes coincide".into()));
    }
    Ok(rows)
}

// Weighted means of x and y and the weighted sum of squares of x.
fn moments(rows: &[(f64, f64, f64)]) -> (f64, f64, f64) {
    let total: f64 = rows.iter().map(|r| r.2).sum();
    let x_bar = rows.iter().map(|r| r.2 * r.0).sum::<f64>() / total;
    let y_bar = rows.iter().map(|r| r.2 * r.1).sum::<f64>() / total;
    let sxx = rows.iter().map(|r| r.2 * (r.0 - x_bar).powi(2)).sum();
    (x_bar, y_bar, sxx)
}
