// SPDX-License-Identifier: Apache-2.0

//! Strong-error estimation on coupled grids: every coarse path is driven by
//! block sums of the increments of one fine path, so coarse and reference
//! solutions see the same Brownian and fractional realizations.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rate::{fit_rate, slope_contrasts, theoretical_rate, RateFit};
use super::sum::{CompensatedSum, MeanAccumulator};
use crate::model::ModelSpec;
use crate::noise::{path_seed, GridSpec, HurstIndex, NoiseGenerator, NoisePath, SamplerKind};
use crate::scheme::{euler_terminal, lamperti_euler_terminal, lamperti_transform, TransformedModel};
use crate::{Error, Result};

/// Largest tolerated fraction of aborted paths.
pub const MAX_ABORT_FRACTION: f64 = 1e-4;
/// Below this every RMS error is treated as exact coincidence.
pub const EXACT_RMSE: f64 = 1e-12;
/// Minimum ratio between the coarsest mesh and the reference mesh.
pub const REFERENCE_MARGIN: usize = 8;

/// `coarse[j] = Σ_{i = jm}^{(j+1)m - 1} fine[i]`.
pub fn aggregate_increments(fine: &[f64], factor: usize) -> Result<Vec<f64>> {
    if factor == 0 || fine.len() % factor != 0 {
        return Err(Error::Plan(format!(
            "factor {factor} does not divide {} increments",
            fine.len()
        )));
    }
    Ok(fine.chunks_exact(factor).map(|c| c.iter().sum()).collect())
}

/// The noise path on the grid `factor` times coarser, driven by the same realization.
pub fn aggregate_noise(fine: &NoisePath, factor: usize) -> Result<NoisePath> {
    Ok(NoisePath {
        grid: fine.grid.coarsen(factor)?,
        dw: aggregate_increments(&fine.dw, factor)?,
        dbh: aggregate_increments(&fine.dbh, factor)?,
        seed: fine.seed,
    })
}

/// How the fine-grid reference solution is computed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceScheme {
    /// Euler scheme on the fine grid.
    Euler,
    /// Euler scheme for `ψ(X)` on the fine grid, mapped back through `ψ⁻¹`.
    /// The fractional noise is additive after the transform, so the reference
    /// does not share the coarse paths' leading `δ^{2H-1}` error term.
    #[default]
    Lamperti,
}

impl FromStr for ReferenceScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euler" => Ok(Self::Euler),
            "lamperti" => Ok(Self::Lamperti),
            other => Err(Error::Domain(format!(
                "unknown reference scheme `{other}` (expected euler or lamperti)"
            ))),
        }
    }
}

impl fmt::Display for ReferenceScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Euler => "euler",
            Self::Lamperti => "lamperti",
        })
    }
}

#[derive(Clone, Debug)]
pub struct CouplingPlan {
    pub model: ModelSpec,
    pub hurst: HurstIndex,
    pub horizon: f64,
    pub fine_steps: usize,
    /// Coarsening factors; coarse grid `i` has `fine_steps / factors[i]` steps.
    pub factors: Vec<usize>,
    pub paths: usize,
    pub base_seed: u64,
    pub sampler: SamplerKind,
    pub reference: ReferenceScheme,
}

impl CouplingPlan {
    pub fn validate(&self) -> Result<()> {
        if self.factors.len() < 3 {
            return Err(Error::Plan(format!(
                "need at least 3 coarsening factors for a rate fit, got {}",
                self.factors.len()
            )));
        }
        for &m in &self.factors {
            if m < 2 || self.fine_steps % m != 0 {
                return Err(Error::Plan(format!(
                    "factor {m} must be at least 2 and divide fine_n = {}",
                    self.fine_steps
                )));
            }
        }
        let mut sorted = self.factors.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.factors.len() {
            return Err(Error::Plan("coarsening factors must be distinct".into()));
        }
        if sorted[sorted.len() - 1] < REFERENCE_MARGIN {
            return Err(Error::Plan(format!(
                "reference mesh must be at most 1/{REFERENCE_MARGIN} of the coarsest mesh"
            )));
        }
        if self.paths == 0 {
            return Err(Error::Plan("need at least one path".into()));
        }
        GridSpec::new(self.horizon, self.fine_steps)?;
        Ok(())
    }

    fn sorted_factors(&self) -> Vec<usize> {
        let mut f = self.factors.clone();
        f.sort_unstable();
        f
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ErrorRecord {
    pub factor: usize,
    pub delta: f64,
    pub rmse: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AbortedPath {
    pub index: usize,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorReport {
    pub model: String,
    pub hurst: f64,
    pub horizon: f64,
    pub fine_steps: usize,
    pub base_seed: u64,
    pub sampler: SamplerKind,
    pub reference: ReferenceScheme,
    /// Sorted by increasing mesh.
    pub records: Vec<ErrorRecord>,
    /// Weighted log-log fit. Its standard error and interval account for
    /// the correlation between meshes: every mesh is evaluated on the same
    /// paths, so the errors move together from one sample to the next.
    /// `None` when every error is below [`EXACT_RMSE`].
    pub fit: Option<RateFit>,
    /// The interval from the residual scatter of the regression alone.
    pub residual_ci: Option<(f64, f64)>,
    /// `None` in degenerate Brownian mode.
    pub theoretical_slope: Option<f64>,
    pub paths_used: usize,
    pub paths_aborted: usize,
    pub aborted: Vec<AbortedPath>,
}

impl ErrorReport {
    pub fn exact(&self) -> bool {
        self.records.iter().all(|r| r.rmse < EXACT_RMSE)
    }

    /// Whether the fitted interval contains the theoretical exponent.
    pub fn ci_contains_theory(&self) -> Option<bool> {
        Some(self.fit?.ci_contains(self.theoretical_slope?))
    }
}

struct Setup<'a> {
    plan: &'a CouplingPlan,
    generator: NoiseGenerator,
    transformed: Option<TransformedModel>,
    factors: Vec<usize>,
}

impl Setup<'_> {
    fn path_errors(&self, index: usize) -> Result<Vec<f64>> {
        let noise = self.generator.path(path_seed(self.plan.base_seed, index as u64));
        let reference = match &self.transformed {
            Some(t) => lamperti_euler_terminal(t, &noise)?,
            None => euler_terminal(&self.plan.model, &noise)?,
        };
        self.factors
            .iter()
            .map(|&m| {
                let coarse = aggregate_noise(&noise, m)?;
                let x = euler_terminal(&self.plan.model, &coarse)?;
                Ok((reference - x).powi(2))
            })
            .collect()
    }
}

/// Monte Carlo estimate of the RMS error at `T` for every coarsening factor,
/// plus the log-log rate fit.
///
/// Paths run on the current rayon pool. Results are reduced in path order
/// with compensated sums, so the report does not depend on the worker count.
pub fn strong_error(plan: &CouplingPlan) -> Result<ErrorReport> {
    plan.validate()?;
    let grid = GridSpec::new(plan.horizon, plan.fine_steps)?;
    let setup = Setup {
        plan,
        generator: NoiseGenerator::new(grid, plan.hurst, plan.sampler)?,
        transformed: match plan.reference {
            ReferenceScheme::Lamperti => Some(lamperti_transform(&plan.model)?),
            ReferenceScheme::Euler => None,
        },
        factors: plan.sorted_factors(),
    };

    let outcomes: Vec<Result<Vec<f64>>> = (0..plan.paths)
        .into_par_iter()
        .map(|i| setup.path_errors(i))
        .collect();

    let width = setup.factors.len();
    let mut accumulators = vec![MeanAccumulator::default(); width];
    let mut completed = Vec::with_capacity(plan.paths);
    let mut aborted = Vec::new();
    for (index, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(errors) => {
                for (acc, &e) in accumulators.iter_mut().zip(&errors) {
                    acc.push(e);
                }
                completed.push(errors);
            }
            Err(e) => aborted.push(AbortedPath {
                index,
                error: e.to_string(),
            }),
        }
    }
    if !aborted.is_empty() && aborted.len() as f64 > MAX_ABORT_FRACTION * plan.paths as f64 {
        return Err(Error::RunFailure {
            aborted: aborted.len(),
            total: plan.paths,
            first_path: aborted[0].index,
            first_error: aborted[0].error.clone(),
        });
    }

    let records: Vec<ErrorRecord> = setup
        .factors
        .iter()
        .zip(&accumulators)
        .map(|(&factor, acc)| {
            let rmse = acc.mean().sqrt();
            let stderr = if rmse > 0.0 { acc.stderr() / (2.0 * rmse) } else { 0.0 };
            ErrorRecord {
                factor,
                delta: grid.mesh() * factor as f64,
                rmse,
                stderr,
            }
        })
        .collect();

    let (fit, residual_ci) = if records.iter().all(|r| r.rmse < EXACT_RMSE) {
        (None, None)
    } else {
        let points: Vec<_> = records.iter().map(|r| (r.delta, r.rmse, r.stderr)).collect();
        let fit = fit_rate(&points)?;
        let means: Vec<f64> = accumulators.iter().map(MeanAccumulator::mean).collect();
        let se = slope_stderr(&slope_contrasts(&points)?, &means, &completed);
        (Some(fit.with_stderr(se)), Some(fit.ci))
    };

    Ok(ErrorReport {
        model: plan.model.name.clone(),
        hurst: plan.hurst.value(),
        horizon: plan.horizon,
        fine_steps: plan.fine_steps,
        base_seed: plan.base_seed,
        sampler: setup.generator.sampler(),
        reference: plan.reference,
        records,
        fit,
        residual_ci,
        theoretical_slope: theoretical_rate(plan.hurst.value()).ok(),
        paths_used: plan.paths - aborted.len(),
        paths_aborted: aborted.len(),
        aborted,
    })
}

// Delta-method standard error of `Σ c_i log rmse_i` with `rmse_i² = mean of
// column i`, using the full path-level covariance between columns.
fn slope_stderr(contrasts: &[f64], means: &[f64], rows: &[Vec<f64>]) -> f64 {
    let n = rows.len() as f64;
    if n < 2.0 {
        return 0.0;
    }
    let mut variance = 0.0;
    for (a, ca) in contrasts.iter().enumerate() {
        for (b, cb) in contrasts.iter().enumerate() {
            let mut cov = CompensatedSum::default();
            for row in rows {
                cov.add((row[a] - means[a]) * (row[b] - means[b]));
            }
            let cov = cov.value() / (n - 1.0) / n;
            variance += 0.25 * ca * cb * cov / (means[a] * means[b]);
        }
    }
    variance.max(0.0).sqrt()
}
