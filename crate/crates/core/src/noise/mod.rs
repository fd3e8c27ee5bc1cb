// SPDX-License-Identifier: Apache-2.0

//! Driving noise: Brownian increments and fractional Gaussian noise on a
//! uniform grid, drawn from disjoint random streams.

mod covariance;
mod fgn;
mod seed;

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub use covariance::{fbm_covariance, fgn_covariance, singular_kernel};
pub use fgn::{
    sample_fgn_cholesky, sample_fgn_circulant, CholeskyFgn, CirculantFgn, FgnSampler,
    SamplerKind, AUTO_CHOLESKY_STEPS, CHOLESKY_MAX_STEPS, EIGENVALUE_CLAMP,
};
pub use seed::path_seed;

use crate::table::{fmt_f64, write_csv};
use crate::{Error, Result};

const BROWNIAN_STREAM: u64 = 0x5717;
const FRACTIONAL_STREAM: u64 = 0xB4B4;

/// Hurst index of the fractional Brownian motion.
///
/// Normally restricted to `1/2 < H < 1`. The value `1/2` (plain Brownian
/// motion) is only reachable through [`HurstIndex::degenerate_brownian`] or
/// [`HurstIndex::with_degenerate`] and exists for testing.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct HurstIndex(f64);

impl HurstIndex {
    pub fn new(h: f64) -> Result<Self> {
        if h > 0.5 && h < 1.0 {
            Ok(Self(h))
        } else {
            Err(Error::Domain(format!("Hurst index must lie in (1/2, 1), got {h}")))
        }
    }

    pub fn degenerate_brownian() -> Self {
        Self(0.5)
    }

    /// Like [`HurstIndex::new`] but admits `h = 1/2` when `allow_degenerate` is set.
    pub fn with_degenerate(h: f64, allow_degenerate: bool) -> Result<Self> {
        if allow_degenerate && h == 0.5 {
            Ok(Self::degenerate_brownian())
        } else {
            Self::new(h)
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_degenerate(self) -> bool {
        self.0 == 0.5
    }
}

impl TryFrom<f64> for HurstIndex {
    type Error = Error;

    fn try_from(h: f64) -> Result<Self> {
        Self::new(h)
    }
}

impl From<HurstIndex> for f64 {
    fn from(h: HurstIndex) -> f64 {
        h.0
    }
}

/// Uniform partition `0 = ν_0 < ν_1 < … < ν_N = T` with mesh `δ = T / N`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    horizon: f64,
    steps: usize,
    mesh: f64,
}

impl GridSpec {
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::Domain(format!("horizon must be positive, got {horizon}")));
        }
        if steps == 0 {
            return Err(Error::Domain("grid needs at least one step".into()));
        }
        Ok(Self {
            horizon,
            steps,
            mesh: horizon / steps as f64,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn mesh(&self) -> f64 {
        self.mesh
    }

    /// Node time `ν_k = kδ`.
    pub fn node(&self, k: usize) -> f64 {
        k as f64 * self.mesh
    }

    /// Index of the last node at or before `u`, i.e. `max{n : ν_n ≤ u}`.
    pub fn cell_index(&self, u: f64) -> usize {
        let k = (u / self.mesh).floor();
        if k <= 0.0 {
            return 0;
        }
        let mut k = (k as usize).min(self.steps);
        // guard against the floor landing one past due to rounding
        while k > 0 && self.node(k) > u {
            k -= 1;
        }
        while k < self.steps && self.node(k + 1) <= u {
            k += 1;
        }
        k
    }

    /// The grid with `factor` times fewer steps over the same horizon.
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        if factor == 0 || self.steps % factor != 0 {
            return Err(Error::Plan(format!(
                "factor {factor} does not divide {} steps",
                self.steps
            )));
        }
        Self::new(self.horizon, self.steps / factor)
    }
}

/// One realization of the driving increments on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct NoisePath {
    pub grid: GridSpec,
    pub dw: Vec<f64>,
    pub dbh: Vec<f64>,
    pub seed: u64,
}

impl NoisePath {
    /// Builds a path from explicit increments, checking the lengths.
    pub fn from_increments(grid: GridSpec, dw: Vec<f64>, dbh: Vec<f64>, seed: u64) -> Result<Self> {
        if dw.len() != grid.steps() || dbh.len() != grid.steps() {
            return Err(Error::Domain(format!(
                "increment arrays have lengths {} and {}, grid has {} steps",
                dw.len(),
                dbh.len(),
                grid.steps()
            )));
        }
        Ok(Self { grid, dw, dbh, seed })
    }

    /// Dumps the path as CSV with header `k,dW,dBH`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let rows = self
            .dw
            .iter()
            .zip(&self.dbh)
            .enumerate()
            .map(|(k, (w, b))| vec![k.to_string(), fmt_f64(*w), fmt_f64(*b)]);
        Ok(write_csv(out, &["k", "dW", "dBH"], rows)?)
    }
}

/// `N` i.i.d. centered Gaussian increments with variance `δ`.
pub fn sample_brownian<R: Rng + ?Sized>(grid: &GridSpec, rng: &mut R) -> Vec<f64> {
    let sd = grid.mesh().sqrt();
    (0..grid.steps())
        .map(|_| sd * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Prepared noise source for a fixed `(grid, H)`; the fGn factorization or
/// embedding spectrum is computed once and shared by every path.
#[derive(Clone, Debug)]
pub struct NoiseGenerator {
    grid: GridSpec,
    hurst: HurstIndex,
    fgn: FgnSampler,
}

impl NoiseGenerator {
    pub fn new(grid: GridSpec, hurst: HurstIndex, sampler: SamplerKind) -> Result<Self> {
        let fgn = FgnSampler::new(sampler, &grid, hurst)?;
        Ok(Self { grid, hurst, fgn })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn hurst(&self) -> HurstIndex {
        self.hurst
    }

    pub fn sampler(&self) -> SamplerKind {
        self.fgn.kind()
    }

    /// The noise path for `seed`. `dW` and `dBH` come from two disjoint
    /// ChaCha streams keyed by the same seed.
    pub fn path(&self, seed: u64) -> NoisePath {
        let dw = sample_brownian(&self.grid, &mut substream(seed, BROWNIAN_STREAM));
        let dbh = self.fgn.sample(&mut substream(seed, FRACTIONAL_STREAM));
        NoisePath {
            grid: self.grid,
            dw,
            dbh,
            seed,
        }
    }
}

/// One-shot version of [`NoiseGenerator::path`].
pub fn sample_noise_path(
    grid: GridSpec,
    h: HurstIndex,
    seed: u64,
    sampler: SamplerKind,
) -> Result<NoisePath> {
    Ok(NoiseGenerator::new(grid, h, sampler)?.path(seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hurst_range() {
        assert!(HurstIndex::new(0.5).is_err());
        assert!(HurstIndex::new(1.0).is_err());
        assert!(HurstIndex::new(f64::NAN).is_err());
        assert!(HurstIndex::new(0.75).is_ok());
        assert!(HurstIndex::with_degenerate(0.5, false).is_err());
        assert!(HurstIndex::with_degenerate(0.5, true).unwrap().is_degenerate());
        assert!(HurstIndex::with_degenerate(0.4, true).is_err());
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(GridSpec::new(0.0, 10).is_err());
        assert!(GridSpec::new(1.0, 0).is_err());
        assert!(GridSpec::new(f64::INFINITY, 3).is_err());
    }

    #[test]
    fn coarsen() {
        let g = GridSpec::new(2.0, 64).unwrap();
        assert_eq!(g.coarsen(8).unwrap().steps(), 8);
        assert!(matches!(g.coarsen(3), Err(Error::Plan(_))));
    }

    #[test]
    fn cell_index_at_nodes_and_inside() {
        let g = GridSpec::new(1.0, 10).unwrap();
        for k in 0..=10 {
            assert_eq!(g.cell_index(g.node(k)), k);
        }
        assert_eq!(g.cell_index(0.55), 5);
        assert_eq!(g.cell_index(0.0999), 0);
    }

    #[test]
    fn brownian_determinism() {
        let g = GridSpec::new(1.0, 100).unwrap();
        let a = sample_brownian(&g, &mut substream(9, 1));
        let b = sample_brownian(&g, &mut substream(9, 1));
        assert_eq!(a, b);
    }

    #[test]
    fn noise_path_determinism_and_separation() {
        let g = GridSpec::new(1.0, 128).unwrap();
        let h = HurstIndex::new(0.7).unwrap();
        let gen = NoiseGenerator::new(g, h, SamplerKind::Auto).unwrap();
        assert_eq!(gen.path(11), gen.path(11));
        let (p, q) = (gen.path(11), gen.path(12));
        assert_ne!(p.dw, q.dw);
        assert_ne!(p.dbh, q.dbh);
        assert_eq!(p.dw.len(), 128);
        assert_eq!(p.dbh.len(), 128);
    }

    #[test]
    fn from_increments_checks_lengths() {
        let g = GridSpec::new(1.0, 3).unwrap();
        assert!(NoisePath::from_increments(g, vec![0.0; 3], vec![0.0; 2], 0).is_err());
        assert!(NoisePath::from_increments(g, vec![0.0; 3], vec![0.0; 3], 0).is_ok());
    }

    #[test]
    fn noise_csv_header_and_rows() {
        let g = GridSpec::new(1.0, 2).unwrap();
        let p = NoisePath::from_increments(g, vec![0.5, -0.25], vec![1.0, 0.0], 0).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "k,dW,dBH");
        assert_eq!(lines.len(), 3);
        assert!(lines[2].starts_with("1,-2.5000000000000000e-1,"));
    }

    proptest! {
        #[test]
        fn mesh_times_steps_is_horizon(horizon in 1e-3f64..1e3, steps in 1usize..1_000_000) {
            let g = GridSpec::new(horizon, steps).unwrap();
            let back = g.mesh() * steps as f64;
            prop_assert!((back - horizon).abs() <= horizon * f64::EPSILON);
            prop_assert!(g.node(steps.min(7)) <= g.node(steps.min(8)));
        }

        #[test]
        fn fbm_covariance_symmetric_with_diagonal(t in 0.0f64..10.0, s in 0.0f64..10.0, h in 0.501f64..0.999) {
            let h = HurstIndex::new(h).unwrap();
            prop_assert_eq!(fbm_covariance(t, s, h).unwrap(), fbm_covariance(s, t, h).unwrap());
            let diag = fbm_covariance(t, t, h).unwrap();
            prop_assert!((diag - t.powf(2.0 * h.value())).abs() <= 1e-12 * diag.max(1.0));
        }

        #[test]
        fn fgn_long_range_positive(k in 0usize..100_000, h in 0.501f64..0.999) {
            prop_assert!(fgn_covariance(k, HurstIndex::new(h).unwrap(), 0.01) > 0.0);
        }
    }
}
