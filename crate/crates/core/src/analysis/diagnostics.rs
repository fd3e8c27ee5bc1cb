// SPDX-License-Identifier: Apache-2.0

//! Monte Carlo checks of the moment estimates behind the convergence proof:
//! exponential moments of the squared noise, moments of the discrete
//! stochastic derivative, and uniform moment and grid-continuity bounds.

use rayon::prelude::*;
use serde::Serialize;

use super::coupling::aggregate_noise;
use super::rate::{fit_rate, RateFit};
use super::sum::MeanAccumulator;
use crate::model::ModelSpec;
use crate::noise::{path_seed, GridSpec, HurstIndex, NoiseGenerator, NoisePath, SamplerKind};
use crate::scheme::{euler_path, interpolate, Trajectory};
use crate::{Error, Result};

/// Sample mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub mean: f64,
    pub stderr: f64,
}

impl From<&MeanAccumulator> for MomentEstimate {
    fn from(acc: &MeanAccumulator) -> Self {
        Self {
            mean: acc.mean(),
            stderr: acc.stderr(),
        }
    }
}

/// `max / min - 1` over a set of positive values.
pub fn relative_spread(values: impl IntoIterator<Item = f64>) -> f64 {
    let (lo, hi) = values
        .into_iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    hi / lo - 1.0
}

// Runs `f` for paths 0..paths in parallel and feeds the per-path vectors to
// one accumulator per component, in path order.
fn accumulate<F>(paths: usize, width: usize, f: F) -> Result<Vec<MeanAccumulator>>
where
    F: Fn(usize) -> Result<Vec<f64>> + Sync + Send,
{
    let results: Vec<Result<Vec<f64>>> = (0..paths).into_par_iter().map(f).collect();
    let mut accs = vec![MeanAccumulator::default(); width];
    for values in results {
        for (acc, v) in accs.iter_mut().zip(values?) {
            acc.push(v);
        }
    }
    Ok(accs)
}

/// Pathwise derivative of `X_{ν_n}` with respect to the fractional increment
/// on cell `s_index`:
/// `c(X_{k₀}) Π_{k=k₀+1}^{n-1} (1 + a_x δ + b_x ΔW_k + c_x ΔB^H_k)`,
/// every factor evaluated at `(ν_k, X_{ν_k})`. The product is 1 when `n = k₀ + 1`.
pub fn stochastic_derivative_product(
    traj: &Trajectory<'_>,
    s_index: usize,
    n_index: usize,
) -> Result<f64> {
    if !(s_index < n_index && n_index <= traj.grid.steps()) {
        return Err(Error::Domain(format!(
            "need s_index < n_index <= {}, got {s_index} and {n_index}",
            traj.grid.steps()
        )));
    }
    let model = traj.model;
    let noise = traj.noise;
    let delta = traj.grid.mesh();
    let mut product = model.c(traj.values[s_index]);
    for k in s_index + 1..n_index {
        let (t, x) = (traj.grid.node(k), traj.values[k]);
        product *= 1.0
            + model.a_x(t, x) * delta
            + model.b_x(t, x) * noise.dw[k]
            + model.c_x(x) * noise.dbh[k];
    }
    Ok(product)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DerivativeDiagnostics {
    pub s_index: usize,
    pub n_index: usize,
    /// The product on the first path.
    pub product_value: f64,
    /// `(p, E|D_s X_T|^p)` for each requested power.
    pub moment_estimates: Vec<(u32, MomentEstimate)>,
}

/// Monte Carlo moments of the derivative of `X_T` with respect to the noise at
/// mid-horizon `s = T/2`.
pub fn derivative_moment_check(
    model: &ModelSpec,
    h: HurstIndex,
    grid: GridSpec,
    powers: &[u32],
    paths: usize,
    base_seed: u64,
    sampler: SamplerKind,
) -> Result<DerivativeDiagnostics> {
    if paths == 0 || powers.is_empty() || grid.steps() < 2 {
        return Err(Error::Plan(
            "derivative check needs paths, powers and at least 2 steps".into(),
        ));
    }
    let s_index = grid.cell_index(0.5 * grid.horizon());
    let n_index = grid.steps();
    let generator = NoiseGenerator::new(grid, h, sampler)?;
    let derivative = |i: usize| -> Result<f64> {
        let noise = generator.path(path_seed(base_seed, i as u64));
        let traj = euler_path(model, &noise)?;
        stochastic_derivative_product(&traj, s_index, n_index)
    };
    let product_value = derivative(0)?;
    let accs = accumulate(paths, powers.len(), |i| {
        let d = derivative(i)?.abs();
        Ok(powers.iter().map(|&p| d.powi(p as i32)).collect())
    })?;
    Ok(DerivativeDiagnostics {
        s_index,
        n_index,
        product_value,
        moment_estimates: powers.iter().copied().zip(accs.iter().map(Into::into)).collect(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExpMomentReport {
    /// `E exp{M Σ (ΔW_k² + (ΔB^H_k)²)}`.
    pub estimate: MomentEstimate,
    /// `E exp{M Σ ΔW_k²}`.
    pub brownian_estimate: MomentEstimate,
    /// `(1 - 2Mδ)^{-N/2}`.
    pub brownian_closed_form: f64,
    /// `(1 - 2MNδ^{2H})^{-1/2}`, a bound for the fractional factor.
    pub fractional_bound: f64,
    /// `brownian_closed_form · fractional_bound`.
    pub bound: f64,
}

impl ExpMomentReport {
    /// Whether the estimate is below the bound up to `sigmas` standard errors.
    pub fn within_bound(&self, sigmas: f64) -> bool {
        self.estimate.mean <= self.bound + sigmas * self.estimate.stderr
    }

    /// Whether the Brownian estimate matches its closed form within `sigmas` standard errors.
    pub fn brownian_matches(&self, sigmas: f64) -> bool {
        (self.brownian_estimate.mean - self.brownian_closed_form).abs()
            <= sigmas * self.brownian_estimate.stderr
    }
}

/// Exponential moment of the summed squared increments against its closed-form bound.
///
/// Fails with [`Error::BoundInapplicable`] unless `2Mδ < 1` and `2MNδ^{2H} < 1`.
pub fn exp_moment_check(
    m_coef: f64,
    grid: GridSpec,
    h: HurstIndex,
    paths: usize,
    base_seed: u64,
    sampler: SamplerKind,
) -> Result<ExpMomentReport> {
    if !(m_coef > 0.0) || paths == 0 {
        return Err(Error::Domain(format!(
            "need a positive coefficient and at least one path, got M = {m_coef}, {paths} paths"
        )));
    }
    let (delta, n) = (grid.mesh(), grid.steps() as f64);
    let brownian_arg = 2.0 * m_coef * delta;
    let fractional_arg = 2.0 * m_coef * n * delta.powf(2.0 * h.value());
    if brownian_arg >= 1.0 {
        return Err(Error::BoundInapplicable(format!("2Mδ = {brownian_arg} >= 1")));
    }
    if fractional_arg >= 1.0 {
        return Err(Error::BoundInapplicable(format!(
            "2MNδ^(2H) = {fractional_arg} >= 1"
        )));
    }
    let brownian_closed_form = (-0.5 * n * (-brownian_arg).ln_1p()).exp();
    let fractional_bound = (-0.5 * (-fractional_arg).ln_1p()).exp();

    let generator = NoiseGenerator::new(grid, h, sampler)?;
    let accs = accumulate(paths, 2, |i| {
        let noise = generator.path(path_seed(base_seed, i as u64));
        let w: f64 = noise.dw.iter().map(|x| x * x).sum();
        let b: f64 = noise.dbh.iter().map(|x| x * x).sum();
        Ok(vec![(m_coef * (w + b)).exp(), (m_coef * w).exp()])
    })?;
    Ok(ExpMomentReport {
        estimate: (&accs[0]).into(),
        brownian_estimate: (&accs[1]).into(),
        brownian_closed_form,
        fractional_bound,
        bound: brownian_closed_form * fractional_bound,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub steps: usize,
    pub delta: f64,
    /// `E[X_T^4]`.
    pub terminal_fourth: MomentEstimate,
    /// `E|D_{T/2} X_T|^2`.
    pub derivative_second: MomentEstimate,
    /// `E|D_{T/2} X_T|^4`.
    pub derivative_fourth: MomentEstimate,
    /// Mean over cells and paths of `|X_u - X_{t_u}|²` at cell midpoints `u`.
    pub continuity: MomentEstimate,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentSweep {
    pub rows: Vec<SweepRow>,
    /// Log-log fit of the continuity moment against the mesh.
    pub continuity_fit: RateFit,
}

impl MomentSweep {
    pub fn terminal_spread(&self) -> f64 {
        relative_spread(self.rows.iter().map(|r| r.terminal_fourth.mean))
    }

    pub fn derivative_spread(&self) -> f64 {
        relative_spread(self.rows.iter().map(|r| r.derivative_second.mean))
    }
}

/// Moment diagnostics across grids with `steps` cells each.
///
/// Every path samples its noise once on a grid twice as fine as the finest
/// requested one; each grid and its midpoint refinement are block sums of
/// that realization.
pub fn moment_sweep(
    model: &ModelSpec,
    h: HurstIndex,
    horizon: f64,
    steps: &[usize],
    paths: usize,
    base_seed: u64,
    sampler: SamplerKind,
) -> Result<MomentSweep> {
    let mut steps = steps.to_vec();
    steps.sort_unstable();
    steps.dedup();
    if steps.len() < 3 || steps[0] < 2 || paths < 2 {
        return Err(Error::Plan(
            "moment sweep needs at least 3 grids of at least 2 steps and 2 paths".into(),
        ));
    }
    let finest = 2 * steps[steps.len() - 1];
    if let Some(n) = steps.iter().find(|&&n| finest % (2 * n) != 0) {
        return Err(Error::Plan(format!(
            "{n} steps does not divide the finest grid of {finest} steps"
        )));
    }
    let generator = NoiseGenerator::new(GridSpec::new(horizon, finest)?, h, sampler)?;
    let width = 4 * steps.len();
    let accs = accumulate(paths, width, |i| {
        let noise = generator.path(path_seed(base_seed, i as u64));
        let mut out = Vec::with_capacity(width);
        for &n in &steps {
            out.extend(sweep_path(model, &noise, finest, n)?);
        }
        Ok(out)
    })?;

    let rows: Vec<SweepRow> = steps
        .iter()
        .zip(accs.chunks_exact(4))
        .map(|(&n, a)| SweepRow {
            steps: n,
            delta: horizon / n as f64,
            terminal_fourth: (&a[0]).into(),
            derivative_second: (&a[1]).into(),
            derivative_fourth: (&a[2]).into(),
            continuity: (&a[3]).into(),
        })
        .collect();
    let points: Vec<_> = rows
        .iter()
        .map(|r| (r.delta, r.continuity.mean, r.continuity.stderr))
        .collect();
    Ok(MomentSweep {
        continuity_fit: fit_rate(&points)?,
        rows,
    })
}

fn sweep_path(model: &ModelSpec, noise: &NoisePath, finest: usize, n: usize) -> Result<[f64; 4]> {
    let coarse = aggregate_noise(noise, finest / n)?;
    let refined = aggregate_noise(noise, finest / (2 * n))?;
    let traj = euler_path(model, &coarse)?;
    let derivative = stochastic_derivative_product(&traj, n / 2, n)?.abs();
    let mut continuity = 0.0;
    for k in 0..n {
        let u = refined.grid.node(2 * k + 1);
        continuity += (interpolate(&traj, u, Some(&refined))? - traj.values[k]).powi(2);
    }
    Ok([
        traj.terminal().powi(4),
        derivative.powi(2),
        derivative.powi(4),
        continuity / n as f64,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{lookup, Additive};
    use crate::noise::sample_noise_path;
    use crate::scheme::euler_path;

    fn hurst(h: f64) -> HurstIndex {
        HurstIndex::new(h).unwrap()
    }

    #[test]
    fn empty_product_and_constant_coefficients() {
        let model = ModelSpec::new(
            "const",
            0.3,
            4.0,
            Additive {
                alpha: 0.2,
                beta: 0.7,
                gamma: 1.5,
            },
        );
        let grid = GridSpec::new(1.0, 16).unwrap();
        let noise = sample_noise_path(grid, hurst(0.7), 3, SamplerKind::Cholesky).unwrap();
        let traj = euler_path(&model, &noise).unwrap();
        for n in 1..=16 {
            assert_eq!(stochastic_derivative_product(&traj, n - 1, n).unwrap(), 1.5);
            assert_eq!(stochastic_derivative_product(&traj, 0, n).unwrap(), 1.5);
        }
        assert!(stochastic_derivative_product(&traj, 4, 4).is_err());
        assert!(stochastic_derivative_product(&traj, 4, 17).is_err());

        let d = derivative_moment_check(&model, hurst(0.7), grid, &[2, 4], 8, 1, SamplerKind::Auto)
            .unwrap();
        assert_eq!((d.s_index, d.n_index), (8, 16));
        assert_eq!(d.moment_estimates[0].1.mean, 1.5f64.powi(2));
        assert_eq!(d.moment_estimates[1].1.mean, 1.5f64.powi(4));
        assert_eq!(d.moment_estimates[0].1.stderr, 0.0);
    }

    #[test]
    fn product_matches_finite_difference() {
        let h = hurst(0.7);
        let model = lookup("trig", h).unwrap();
        let grid = GridSpec::new(1.0, 16).unwrap();
        let noise = sample_noise_path(grid, h, 11, SamplerKind::Cholesky).unwrap();
        let traj = euler_path(&model, &noise).unwrap();
        let eps = 1e-6;
        for k0 in [0, 3, 7, 15] {
            let mut bumped = noise.clone();
            bumped.dbh[k0] += eps;
            let other = euler_path(&model, &bumped).unwrap();
            for n in k0 + 1..=16 {
                let fd = (other.values[n] - traj.values[n]) / eps;
                let d = stochastic_derivative_product(&traj, k0, n).unwrap();
                assert!((fd - d).abs() <= 1e-4 * d.abs().max(1e-8), "{k0} {n}: {fd} vs {d}");
            }
        }
    }

    #[test]
    fn brownian_closed_form_and_preconditions() {
        let grid = GridSpec::new(1.0, 10).unwrap();
        let r = exp_moment_check(1.0, grid, hurst(0.75), 20_000, 5, SamplerKind::Auto).unwrap();
        assert!((r.brownian_closed_form - 0.8f64.powi(-5)).abs() < 1e-12);
        assert!(r.brownian_matches(4.0), "{r:?}");
        assert!(matches!(
            exp_moment_check(6.0, grid, hurst(0.75), 10, 5, SamplerKind::Auto),
            Err(Error::BoundInapplicable(_))
        ));
        // 2MNδ^{2H} = 2·1·10·0.1^{1.1} ≈ 1.59
        assert!(matches!(
            exp_moment_check(1.0, grid, hurst(0.55), 10, 5, SamplerKind::Auto),
            Err(Error::BoundInapplicable(_))
        ));
    }

    #[test]
    fn degenerate_mode_gives_two_brownian_factors() {
        let grid = GridSpec::new(1.0, 10).unwrap();
        let r = exp_moment_check(
            0.25,
            grid,
            HurstIndex::degenerate_brownian(),
            20_000,
            9,
            SamplerKind::Cholesky,
        )
        .unwrap();
        let target = r.brownian_closed_form.powi(2);
        assert!((r.estimate.mean - target).abs() < 4.0 * r.estimate.stderr, "{r:?} vs {target}");
    }

    #[test]
    fn sweep_is_deterministic_and_validated() {
        let h = hurst(0.75);
        let model = lookup("trig", h).unwrap();
        let run = || moment_sweep(&model, h, 1.0, &[8, 16, 32], 50, 4, SamplerKind::Auto).unwrap();
        let a = run();
        assert_eq!(a, run());
        assert_eq!(a.rows.len(), 3);
        assert!(a.rows.iter().all(|r| r.continuity.mean > 0.0 && r.derivative_second.mean > 0.0));
        assert!(moment_sweep(&model, h, 1.0, &[8, 16], 50, 4, SamplerKind::Auto).is_err());
        assert!(moment_sweep(&model, h, 1.0, &[8, 12, 32], 50, 4, SamplerKind::Auto).is_err());
    }

    #[test]
    fn spread() {
        assert_eq!(relative_spread([2.0, 3.0, 2.5]), 0.5);
        assert_eq!(relative_spread([1.0]), 0.0);
    }
}
