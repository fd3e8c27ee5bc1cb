// SPDX-License-Identifier: Apache-2.0

use rayon::prelude::*;
use serde::Serialize;

use super::sum::MeanAccumulator;
use crate::noise::{fgn_covariance, path_seed, GridSpec, HurstIndex, NoiseGenerator, SamplerKind};
use crate::{Error, Result};

/// Empirical against analytic autocovariance of the fractional increments at one lag.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LagStatistic {
    pub lag: usize,
    pub empirical: f64,
    pub analytic: f64,
    /// `(empirical - analytic) / stderr`; 0 when both agree exactly.
    pub z: f64,
}

/// For every lag `k < N`, averages `ΔB^H_i ΔB^H_{i+k}` over `i` within a path
/// and then over paths; the standard error comes from the spread of the
/// per-path averages.
pub fn fgn_autocovariance_check(
    grid: GridSpec,
    h: HurstIndex,
    sampler: SamplerKind,
    paths: usize,
    base_seed: u64,
) -> Result<Vec<LagStatistic>> {
    if paths < 2 {
        return Err(Error::Plan("covariance check needs at least 2 paths".into()));
    }
    let generator = NoiseGenerator::new(grid, h, sampler)?;
    let n = grid.steps();
    let per_path: Vec<Vec<f64>> = (0..paths)
        .into_par_iter()
        .map(|i| {
            let x = generator.path(path_seed(base_seed, i as u64)).dbh;
            (0..n)
                .map(|k| {
                    let s: f64 = x.iter().zip(&x[k..]).map(|(a, b)| a * b).sum();
                    s / (n - k) as f64
                })
                .collect()
        })
        .collect();
    let mut accs = vec![MeanAccumulator::default(); n];
    for row in per_path {
        for (acc, v) in accs.iter_mut().zip(row) {
            acc.push(v);
        }
    }
    Ok(accs
        .iter()
        .enumerate()
        .map(|(lag, acc)| {
            let analytic = fgn_covariance(lag, h, grid.mesh());
            let diff = acc.mean() - analytic;
            let se = acc.stderr();
            LagStatistic {
                lag,
                empirical: acc.mean(),
                analytic,
                z: if diff == 0.0 { 0.0 } else { diff / se },
            }
        })
        .collect())
}
