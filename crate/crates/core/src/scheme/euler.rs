// SPDX-License-Identifier: Apache-2.0

use std::io::Write;

use crate::model::ModelSpec;
use crate::noise::{GridSpec, NoisePath};
use crate::table::{fmt_f64, write_csv};
use crate::{Error, Result};

/// One step `x + a(t,x)δ + b(t,x)ΔW + c(x)ΔB^H`.
#[inline]
pub fn euler_step(
    model: &ModelSpec,
    t: f64,
    x: f64,
    delta: f64,
    dw: f64,
    dbh: f64,
) -> Result<f64> {
    let next = x + model.a(t, x) * delta + model.b(t, x) * dw + model.c(x) * dbh;
    if next.is_finite() {
        Ok(next)
    } else {
        Err(Error::NonFinite { step: 0, t, x })
    }
}

fn step_at(model: &ModelSpec, noise: &NoisePath, k: usize, x: f64) -> Result<f64> {
    let grid = &noise.grid;
    euler_step(model, grid.node(k), x, grid.mesh(), noise.dw[k], noise.dbh[k]).map_err(|e| match e {
        Error::NonFinite { t, x, .. } => Error::NonFinite { step: k, t, x },
        other => other,
    })
}

/// Euler approximation at the grid nodes, tied to the model and noise that produced it.
#[derive(Clone, Debug)]
pub struct Trajectory<'a> {
    pub grid: GridSpec,
    pub values: Vec<f64>,
    pub model: &'a ModelSpec,
    pub noise: &'a NoisePath,
}

impl Trajectory<'_> {
    pub fn terminal(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Dumps `k,t,x` rows for every node.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let rows = self
            .values
            .iter()
            .enumerate()
            .map(|(k, x)| vec![k.to_string(), fmt_f64(self.grid.node(k)), fmt_f64(*x)]);
        Ok(write_csv(out, &["k", "t", "x"], rows)?)
    }
}

/// Runs the recursion over the whole noise path.
pub fn euler_path<'a>(model: &'a ModelSpec, noise: &'a NoisePath) -> Result<Trajectory<'a>> {
    let n = noise.grid.steps();
    let mut values = Vec::with_capacity(n + 1);
    let mut x = model.x0;
    values.push(x);
    for k in 0..n {
        x = step_at(model, noise, k, x)?;
        values.push(x);
    }
    Ok(Trajectory {
        grid: noise.grid,
        values,
        model,
        noise,
    })
}

/// Terminal value `X^δ_T` only; same arithmetic as [`euler_path`] without storing the path.
pub fn euler_terminal(model: &ModelSpec, noise: &NoisePath) -> Result<f64> {
    let mut x = model.x0;
    for k in 0..noise.grid.steps() {
        x = step_at(model, noise, k, x)?;
    }
    Ok(x)
}

/// Continuous interpolation
/// `X_u = X_{t_u} + a(t_u, X_{t_u})(u - t_u) + b(t_u, X_{t_u}) W_{u,t_u} + c(X_{t_u}) B^H_{u,t_u}`
/// with `t_u` the last node before `u`.
///
/// At grid nodes this is the stored value. Between nodes the Brownian and
/// fractional increments over `[t_u, u]` are needed; they are read from
/// `refinement`, a noise path on a finer grid whose blocks sum to the
/// trajectory's increments. Off-node points that are not nodes of the
/// refinement are rejected.
pub fn interpolate(traj: &Trajectory<'_>, u: f64, refinement: Option<&NoisePath>) -> Result<f64> {
    let grid = &traj.grid;
    if !(0.0..=grid.horizon()).contains(&u) {
        return Err(Error::Domain(format!(
            "interpolation time {u} outside [0, {}]",
            grid.horizon()
        )));
    }
    let k = grid.cell_index(u);
    let node = grid.node(k);
    if node == u || k == grid.steps() {
        return Ok(traj.values[k]);
    }
    let fine = refinement.ok_or(Error::UnsupportedPoint { u })?;
    let factor = refinement_factor(grid, fine)?;
    let fine_index = fine.grid.cell_index(u);
    if fine.grid.node(fine_index) != u {
        return Err(Error::UnsupportedPoint { u });
    }
    let start = k * factor;
    check_block(traj.noise, fine, k, factor)?;
    let w: f64 = fine.dw[start..fine_index].iter().sum();
    let b: f64 = fine.dbh[start..fine_index].iter().sum();
    let x = traj.values[k];
    let model = traj.model;
    Ok(x + model.a(node, x) * (u - node) + model.b(node, x) * w + model.c(x) * b)
}

fn refinement_factor(coarse: &GridSpec, fine: &NoisePath) -> Result<usize> {
    let (n, m) = (coarse.steps(), fine.grid.steps());
    if m % n != 0 || fine.grid.horizon() != coarse.horizon() {
        return Err(Error::Domain(format!(
            "refinement with {m} steps over {} does not refine {n} steps over {}",
            fine.grid.horizon(),
            coarse.horizon()
        )));
    }
    Ok(m / n)
}

fn check_block(coarse: &NoisePath, fine: &NoisePath, k: usize, factor: usize) -> Result<()> {
    let block = k * factor..(k + 1) * factor;
    let w: f64 = fine.dw[block.clone()].iter().sum();
    let b: f64 = fine.dbh[block].iter().sum();
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * (1.0 + y.abs());
    if close(w, coarse.dw[k]) && close(b, coarse.dbh[k]) {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "refinement increments do not aggregate to the trajectory noise in cell {k}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{lookup, Additive, FnCoefficients};
    use crate::noise::{sample_noise_path, HurstIndex, SamplerKind};
    use approx::assert_abs_diff_eq;

    fn constant(a: f64, b: f64, c: f64) -> ModelSpec {
        ModelSpec::new("const", 1.0, 10.0, Additive { alpha: a, beta: b, gamma: c })
    }

    #[test]
    fn step_arithmetic() {
        let m = constant(0.5, 2.0, 1.0);
        assert_abs_diff_eq!(euler_step(&m, 0.0, 1.0, 0.1, 0.2, -0.1).unwrap(), 1.35, epsilon = 1e-15);
        let m = constant(0.0, 2.0, 1.0);
        assert_eq!(euler_step(&m, 0.3, 1.7, 0.1, 0.0, 0.0).unwrap(), 1.7);
    }

    #[test]
    fn step_overflow_is_reported() {
        let m = ModelSpec::new("huge", 0.0, 1.0, FnCoefficients::default().drift(|_, _| f64::MAX, |_, _| 0.0));
        assert!(matches!(euler_step(&m, 0.0, f64::MAX, 2.0, 0.0, 0.0), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn path_overflow_carries_step_index() {
        let m = ModelSpec::new("exp", 1.0, 1.0, FnCoefficients::default().drift(|_, x| x * 1e300, |_, _| 0.0));
        let g = GridSpec::new(1.0, 8).unwrap();
        let noise = NoisePath::from_increments(g, vec![0.0; 8], vec![0.0; 8], 0).unwrap();
        match euler_path(&m, &noise) {
            Err(Error::NonFinite { step, .. }) => assert!(step < 8),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn additive_path_telescopes() {
        let h = HurstIndex::new(0.7).unwrap();
        let model = lookup("additive", h).unwrap();
        let g = GridSpec::new(1.0, 500).unwrap();
        let noise = sample_noise_path(g, h, 5, SamplerKind::Auto).unwrap();
        let traj = euler_path(&model, &noise).unwrap();
        let (mut w, mut b) = (0.0, 0.0);
        for n in 0..=500 {
            let exact = g.node(n) + w + b;
            assert_abs_diff_eq!(traj.values[n], exact, epsilon = 1e-12);
            if n < 500 {
                w += noise.dw[n];
                b += noise.dbh[n];
            }
        }
    }

    #[test]
    fn zero_noise_no_drift_is_constant() {
        let m = constant(0.0, 3.0, 2.0);
        let g = GridSpec::new(2.0, 10).unwrap();
        let noise = NoisePath::from_increments(g, vec![0.0; 10], vec![0.0; 10], 0).unwrap();
        let traj = euler_path(&m, &noise).unwrap();
        assert!(traj.values.iter().all(|&x| x == 1.0));
        assert_eq!(euler_terminal(&m, &noise).unwrap(), 1.0);
    }

    #[test]
    fn trig_recursion_identity_on_replay() {
        let h = HurstIndex::new(0.7).unwrap();
        let model = lookup("trig", h).unwrap();
        let g = GridSpec::new(1.0, 100).unwrap();
        let noise = sample_noise_path(g, h, 77, SamplerKind::Auto).unwrap();
        let traj = euler_path(&model, &noise).unwrap();
        assert_eq!(traj.values[0], model.x0);
        for k in 0..100 {
            let (t, x) = (k as f64 / 100.0, traj.values[k]);
            let replay = x + x.cos() * 0.01 + (1.0 + 0.5 * x.sin()) * noise.dw[k] + (2.0 + x.sin()) * noise.dbh[k];
            assert_abs_diff_eq!(traj.values[k + 1], replay, epsilon = 4.0 * f64::EPSILON * (1.0 + replay.abs()));
            assert_eq!(traj.values[k + 1], euler_step(&model, t, x, 0.01, noise.dw[k], noise.dbh[k]).unwrap());
        }
        assert_eq!(traj.terminal(), euler_terminal(&model, &noise).unwrap());
        assert_eq!(traj.values, euler_path(&model, &noise).unwrap().values);
    }

    fn refined_pair(h: HurstIndex, seed: u64) -> (NoisePath, NoisePath) {
        let fine_grid = GridSpec::new(1.0, 32).unwrap();
        let fine = sample_noise_path(fine_grid, h, seed, SamplerKind::Auto).unwrap();
        let coarse_grid = fine_grid.coarsen(2).unwrap();
        let sum2 = |v: &[f64]| v.chunks(2).map(|c| c[0] + c[1]).collect::<Vec<_>>();
        let coarse = NoisePath::from_increments(coarse_grid, sum2(&fine.dw), sum2(&fine.dbh), seed).unwrap();
        (coarse, fine)
    }

    #[test]
    fn interpolation_at_nodes_and_midpoints() {
        let h = HurstIndex::new(0.8).unwrap();
        let model = lookup("trig", h).unwrap();
        let (coarse, fine) = refined_pair(h, 9);
        let traj = euler_path(&model, &coarse).unwrap();
        for k in 0..=16 {
            assert_eq!(interpolate(&traj, traj.grid.node(k), None).unwrap(), traj.values[k]);
        }
        assert_eq!(interpolate(&traj, 1.0, None).unwrap(), traj.values[16]);

        for k in 0..16 {
            let (t, x) = (traj.grid.node(k), traj.values[k]);
            let u = fine.grid.node(2 * k + 1);
            let direct = x + x.cos() * (u - t) + (1.0 + 0.5 * x.sin()) * fine.dw[2 * k] + (2.0 + x.sin()) * fine.dbh[2 * k];
            assert_abs_diff_eq!(interpolate(&traj, u, Some(&fine)).unwrap(), direct, epsilon = 1e-14);
        }
    }

    #[test]
    fn interpolation_errors() {
        let h = HurstIndex::new(0.8).unwrap();
        let model = lookup("trig", h).unwrap();
        let (coarse, fine) = refined_pair(h, 9);
        let traj = euler_path(&model, &coarse).unwrap();
        assert!(matches!(interpolate(&traj, 0.03, None), Err(Error::UnsupportedPoint { .. })));
        // 0.01 is not a node of the 32-step refinement
        assert!(matches!(interpolate(&traj, 0.01, Some(&fine)), Err(Error::UnsupportedPoint { .. })));
        assert!(interpolate(&traj, 1.5, None).is_err());
        let (_, other) = refined_pair(h, 10);
        assert!(matches!(interpolate(&traj, 1.0 / 32.0, Some(&other)), Err(Error::Domain(_))));
    }

    #[test]
    fn trajectory_csv() {
        let m = constant(1.0, 0.0, 1.0);
        let g = GridSpec::new(1.0, 2).unwrap();
        let noise = NoisePath::from_increments(g, vec![0.0; 2], vec![0.0; 2], 0).unwrap();
        let traj = euler_path(&m, &noise).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "k,t,x\n0,0.0000000000000000e0,1.0000000000000000e0\n\
             1,5.0000000000000000e-1,1.5000000000000000e0\n\
             2,1.0000000000000000e0,2.0000000000000000e0\n"
        );
    }
}
