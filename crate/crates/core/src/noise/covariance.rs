// SPDX-License-Identifier: Apache-2.0

use super::HurstIndex;
use crate::{Error, Result};

/// `E[B^H_t B^H_s] = (t^{2H} + s^{2H} - |t-s|^{2H}) / 2`.
pub fn fbm_covariance(t: f64, s: f64, h: HurstIndex) -> Result<f64> {
    if !(t >= 0.0 && s >= 0.0) {
        return Err(Error::Domain(format!(
            "fBm covariance needs non-negative times, got t = {t}, s = {s}"
        )));
    }
    let two_h = 2.0 * h.value();
    Ok(0.5 * (t.powf(two_h) + s.powf(two_h) - (t - s).abs().powf(two_h)))
}

/// Autocovariance `γ(k)` of fractional Gaussian noise on a mesh of width `delta`:
/// the covariance of `ΔB^H_n` and `ΔB^H_{n+k}`.
pub fn fgn_covariance(lag: usize, h: HurstIndex, delta: f64) -> f64 {
    debug_assert!(delta > 0.0);
    let two_h = 2.0 * h.value();
    delta.powf(two_h) * unit_second_difference(lag, two_h)
}

// (|k+1|^a - 2|k|^a + |k-1|^a) / 2. For large k the three powers nearly cancel,
// so factor out k^a and difference (1 ± 1/k)^a - 1 with expm1/ln_1p.
fn unit_second_difference(lag: usize, a: f64) -> f64 {
    if a == 1.0 {
        return if lag == 0 { 1.0 } else { 0.0 };
    }
    match lag {
        0 => 1.0,
        1 => 0.5 * (2f64.powf(a) - 2.0),
        k => {
            let k = k as f64;
            let inv = 1.0 / k;
            let up = (a * inv.ln_1p()).exp_m1();
            let down = (a * (-inv).ln_1p()).exp_m1();
            0.5 * k.powf(a) * (up + down)
        }
    }
}

/// The kernel `ψ(t, s) = H(2H-1)|t-s|^{2H-2}` of the fBm inner product.
pub fn singular_kernel(t: f64, s: f64, h: HurstIndex) -> Result<f64> {
    if t == s {
        return Err(Error::Singularity { t });
    }
    let h = h.value();
    Ok(h * (2.0 * h - 1.0) * (t - s).abs().powf(2.0 * h - 2.0))
}
