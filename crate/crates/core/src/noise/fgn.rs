// SPDX-License-Identifier: Apache-2.0

//! Exact samplers for fractional Gaussian noise on a uniform grid.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::{fgn_covariance, GridSpec, HurstIndex};
use crate::{Error, Result};

/// Largest grid the Cholesky sampler accepts.
pub const CHOLESKY_MAX_STEPS: usize = 4096;

/// Largest grid for which [`SamplerKind::Auto`] picks the Cholesky sampler.
pub const AUTO_CHOLESKY_STEPS: usize = 256;

/// Relative tolerance below zero tolerated for circulant eigenvalues before
/// they are clamped.
pub const EIGENVALUE_CLAMP: f64 = 1e-10;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerKind {
    #[default]
    Auto,
    Cholesky,
    Circulant,
}

impl FromStr for SamplerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Self::Auto),
            "cholesky" => Ok(Self::Cholesky),
            "circulant" => Ok(Self::Circulant),
            other => Err(Error::Domain(format!(
                "unknown sampler `{other}` (expected auto, cholesky or circulant)"
            ))),
        }
    }
}

impl fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Auto => "auto",
            Self::Cholesky => "cholesky",
            Self::Circulant => "circulant",
        })
    }
}

/// Lower-triangular factor of the `N × N` fGn covariance matrix.
#[derive(Clone, Debug)]
pub struct CholeskyFgn {
    steps: usize,
    // row-major packed lower triangle: row i holds i + 1 entries
    lower: Vec<f64>,
}

impl CholeskyFgn {
    pub fn new(grid: &GridSpec, h: HurstIndex) -> Result<Self> {
        let n = grid.steps();
        if n > CHOLESKY_MAX_STEPS {
            return Err(Error::Domain(format!(
                "Cholesky sampler supports at most {CHOLESKY_MAX_STEPS} steps, got {n}"
            )));
        }
        let gamma: Vec<f64> = (0..n).map(|k| fgn_covariance(k, h, grid.mesh())).collect();
        let cov = DMatrix::from_fn(n, n, |i, j| gamma[i.abs_diff(j)]);
        let chol = cov.cholesky().ok_or_else(|| {
            Error::Numerical(format!(
                "fGn covariance ({n} × {n}, H = {}) is not numerically positive definite",
                h.value()
            ))
        })?;
        let l = chol.l();
        let mut lower = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            lower.extend((0..=i).map(|j| l[(i, j)]));
        }
        Ok(Self { steps: n, lower })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let z: Vec<f64> = (0..self.steps).map(|_| rng.sample(StandardNormal)).collect();
        let mut out = Vec::with_capacity(self.steps);
        let mut offset = 0;
        for i in 0..self.steps {
            let row = &self.lower[offset..offset + i + 1];
            out.push(row.iter().zip(&z).map(|(l, z)| l * z).sum());
            offset += i + 1;
        }
        out
    }
}

/// Davies–Harte circulant embedding sampler.
#[derive(Clone)]
pub struct CirculantFgn {
    steps: usize,
    // sqrt(λ_k / size) for the embedding of size `2M`, M = next power of two ≥ N
    scale: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for CirculantFgn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CirculantFgn")
            .field("steps", &self.steps)
            .field("embedding", &self.scale.len())
            .finish()
    }
}

impl CirculantFgn {
    pub fn new(grid: &GridSpec, h: HurstIndex) -> Result<Self> {
        let steps = grid.steps();
        let half = steps.next_power_of_two();
        let size = 2 * half;
        let mut row: Vec<Complex<f64>> = vec![Complex::new(0.0, 0.0); size];
        for k in 0..=half {
            let g = fgn_covariance(k, h, grid.mesh());
            row[k].re = g;
            if k > 0 && k < half {
                row[size - k].re = g;
            }
        }
        let fft = FftPlanner::new().plan_fft_forward(size);
        fft.process(&mut row);

        let eigen = circulant_eigenvalues(&row)?;
        let scale = eigen.iter().map(|&l| (l / size as f64).sqrt()).collect();
        Ok(Self { steps, scale, fft })
    }

    /// Embedding eigenvalues after clamping, mostly for inspection.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let size = self.scale.len() as f64;
        self.scale.iter().map(|s| s * s * size).collect()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut buf: Vec<Complex<f64>> = self
            .scale
            .iter()
            .map(|&s| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex::new(s * re, s * im)
            })
            .collect();
        self.fft.process(&mut buf);
        buf.truncate(self.steps);
        buf.into_iter().map(|c| c.re).collect()
    }
}

fn circulant_eigenvalues(spectrum: &[Complex<f64>]) -> Result<Vec<f64>> {
    let max = spectrum.iter().map(|c| c.re).fold(0.0f64, f64::max);
    let tolerance = EIGENVALUE_CLAMP * max;
    spectrum
        .iter()
        .enumerate()
        .map(|(index, c)| {
            if c.re >= 0.0 {
                Ok(c.re)
            } else if c.re > -tolerance {
                Ok(0.0)
            } else {
                Err(Error::Embedding {
                    index,
                    value: c.re,
                    tolerance,
                })
            }
        })
        .collect()
}

/// A prepared fGn sampler for one `(grid, H)` pair. Immutable, so one instance
/// can serve every worker.
#[derive(Clone, Debug)]
pub enum FgnSampler {
    Cholesky(CholeskyFgn),
    Circulant(CirculantFgn),
}

impl FgnSampler {
    pub fn new(kind: SamplerKind, grid: &GridSpec, h: HurstIndex) -> Result<Self> {
        let use_cholesky = match kind {
            SamplerKind::Cholesky => true,
            SamplerKind::Circulant => false,
            SamplerKind::Auto => grid.steps() <= AUTO_CHOLESKY_STEPS,
        };
        if use_cholesky {
            CholeskyFgn::new(grid, h).map(Self::Cholesky)
        } else {
            CirculantFgn::new(grid, h).map(Self::Circulant)
        }
    }

    pub fn kind(&self) -> SamplerKind {
        match self {
            Self::Cholesky(_) => SamplerKind::Cholesky,
            Self::Circulant(_) => SamplerKind::Circulant,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match self {
            Self::Cholesky(s) => s.sample(rng),
            Self::Circulant(s) => s.sample(rng),
        }
    }
}

/// `N` increments with covariance `Γ[i][j] = γ(|i-j|)` via the Cholesky factor of `Γ`.
pub fn sample_fgn_cholesky<R: Rng + ?Sized>(
    grid: &GridSpec,
    h: HurstIndex,
    rng: &mut R,
) -> Result<Vec<f64>> {
    Ok(CholeskyFgn::new(grid, h)?.sample(rng))
}

/// Same law as [`sample_fgn_cholesky`], via circulant embedding and the FFT.
pub fn sample_fgn_circulant<R: Rng + ?Sized>(
    grid: &GridSpec,
    h: HurstIndex,
    rng: &mut R,
) -> Result<Vec<f64>> {
    Ok(CirculantFgn::new(grid, h)?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_step_cholesky_has_variance_delta_2h() {
        let grid = GridSpec::new(0.25, 1).unwrap();
        let h = HurstIndex::new(0.7).unwrap();
        let sampler = CholeskyFgn::new(&grid, h).unwrap();
        assert_relative_eq!(sampler.lower[0], 0.25f64.powf(0.7), max_relative = 1e-14);
    }

    #[test]
    fn cholesky_guard() {
        let grid = GridSpec::new(1.0, CHOLESKY_MAX_STEPS + 1).unwrap();
        let h = HurstIndex::new(0.7).unwrap();
        assert!(matches!(CholeskyFgn::new(&grid, h), Err(Error::Domain(_))));
    }

    #[test]
    fn circulant_eigenvalues_nonnegative() {
        for &hv in &[0.51, 0.6, 0.75, 0.9, 0.99] {
            for &n in &[1usize, 2, 3, 64, 1000, 1 << 14] {
                let grid = GridSpec::new(1.0, n).unwrap();
                let s = CirculantFgn::new(&grid, HurstIndex::new(hv).unwrap()).unwrap();
                assert!(s.eigenvalues().iter().all(|&l| l >= 0.0));
            }
        }
    }

    #[test]
    fn eigenvalue_clamp_and_rejection() {
        let c = |re| Complex::new(re, 0.0);
        let ok = circulant_eigenvalues(&[c(1.0), c(-1e-12), c(0.5)]).unwrap();
        assert_eq!(ok, vec![1.0, 0.0, 0.5]);
        let err = circulant_eigenvalues(&[c(1.0), c(-1e-6)]).unwrap_err();
        assert!(matches!(err, Error::Embedding { index: 1, .. }));
    }

    #[test]
    fn degenerate_embedding_is_flat() {
        let grid = GridSpec::new(1.0, 16).unwrap();
        let s = CirculantFgn::new(&grid, HurstIndex::degenerate_brownian()).unwrap();
        for l in s.eigenvalues() {
            assert_relative_eq!(l, 1.0 / 16.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn samplers_are_deterministic_in_the_rng() {
        let grid = GridSpec::new(1.0, 50).unwrap();
        let h = HurstIndex::new(0.8).unwrap();
        for kind in [SamplerKind::Cholesky, SamplerKind::Circulant] {
            let s = FgnSampler::new(kind, &grid, h).unwrap();
            let a = s.sample(&mut ChaCha8Rng::seed_from_u64(3));
            let b = s.sample(&mut ChaCha8Rng::seed_from_u64(3));
            assert_eq!(a, b);
            assert_eq!(a.len(), 50);
        }
    }

    #[test]
    fn auto_switches_on_size() {
        let h = HurstIndex::new(0.8).unwrap();
        let small = GridSpec::new(1.0, AUTO_CHOLESKY_STEPS).unwrap();
        let large = GridSpec::new(1.0, AUTO_CHOLESKY_STEPS + 1).unwrap();
        assert_eq!(
            FgnSampler::new(SamplerKind::Auto, &small, h).unwrap().kind(),
            SamplerKind::Cholesky
        );
        assert_eq!(
            FgnSampler::new(SamplerKind::Auto, &large, h).unwrap().kind(),
            SamplerKind::Circulant
        );
    }
}
