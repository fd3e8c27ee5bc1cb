// SPDX-License-Identifier: Apache-2.0

use mixfbm::noise::{fbm_covariance, singular_kernel, HurstIndex};

// Tanh-sinh rule on [a, b]; tolerates integrable endpoint singularities.
fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let step = 1.0 / 32.0;
    let half = 0.5 * (b - a);
    let mut total = 0.0;
    for j in -200i32..=200 {
        let t = j as f64 * step;
        let u = std::f64::consts::FRAC_PI_2 * t.sinh();
        let x = u.tanh();
        let w = std::f64::consts::FRAC_PI_2 * t.cosh() / u.cosh().powi(2);
        // distance to the nearer endpoint, computed without cancellation
        let gap = half / (u.abs().exp() * u.abs().cosh());
        let point = if x < 0.0 { a + gap } else { b - gap };
        if gap > 0.0 && point > a && point < b && w > 0.0 {
            total += w * f(point);
        }
    }
    total * half * step
}

// ∫_0^t ∫_0^s φ(u, v) dv du. The kernel depends on |u - v| only, so the
// inner integral runs over the distance r to the diagonal, which keeps the
// nodes next to the singularity exact.
fn kernel_integral(t: f64, s: f64, h: HurstIndex) -> f64 {
    let phi = |r: f64| singular_kernel(r, 0.0, h).unwrap();
    // the outer integrand has a kink at u = s
    let below = tanh_sinh(|u| tanh_sinh(phi, 0.0, u) + tanh_sinh(phi, 0.0, s - u), 0.0, t.min(s));
    let above = if t > s { tanh_sinh(|u| tanh_sinh(phi, u - s, u), s, t) } else { 0.0 };
    below + above
}

#[test]
fn kernel_integrates_to_unit_variance() {
    for h in [0.6, 0.75, 0.9] {
        let h = HurstIndex::new(h).unwrap();
        let total = kernel_integral(1.0, 1.0, h);
        assert!((total - 1.0).abs() < 1e-6, "H = {}: {total}", h.value());
    }
}

#[test]
fn kernel_integral_is_the_fbm_covariance() {
    let h = HurstIndex::new(0.7).unwrap();
    for (t, s) in [(0.5, 1.0), (1.0, 0.25), (2.0, 1.5), (0.3, 0.3)] {
        let oracle = kernel_integral(t, s, h);
        let exact = fbm_covariance(t, s, h).unwrap();
        assert!((oracle - exact).abs() < 1e-6 * exact.max(1.0), "({t}, {s}): {oracle} vs {exact}");
    }
}
