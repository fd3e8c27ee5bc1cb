// SPDX-License-Identifier: Apache-2.0

//! The Euler recursion
//!
//! ```text
//! X_{k+1} = X_k + a(ν_k, X_k) δ + b(ν_k, X_k) ΔW_k + c(X_k) ΔB^H_k,   X_0 = x0
//! ```
//!
//! its piecewise interpolation, the Lamperti-type transform `ψ(x) = ∫₀ˣ dz / c(z)`
//! and the discrete Gronwall bound.

mod euler;
mod lamperti;

pub use euler::{euler_path, euler_step, euler_terminal, interpolate, Trajectory};
pub use lamperti::{lamperti_euler_path, lamperti_euler_terminal, lamperti_transform, TransformedModel};

/// Bound `(x0 + 1) e^{K δ n}` satisfied by any non-negative sequence with
/// `x_{k+1} ≤ x_k (1 + Kδ) + Kδ`.
pub fn discrete_gronwall_bound(x0: f64, k: f64, delta: f64, n: u64) -> f64 {
    (x0 + 1.0) * (k * delta * n as f64).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn gronwall_examples() {
        assert_abs_diff_eq!(discrete_gronwall_bound(0.0, 1.0, 0.1, 10), std::f64::consts::E, epsilon = 1e-12);
        assert_eq!(discrete_gronwall_bound(2.5, 3.0, 0.1, 0), 3.5);
    }

    proptest! {
        #[test]
        fn extremal_recursion_stays_below_bound(
            x0 in 0.0f64..100.0,
            k in 1e-3f64..10.0,
            delta in 1e-4f64..0.5,
            n in 0u64..2000,
        ) {
            let mut x = x0;
            for step in 0..=n {
                let bound = discrete_gronwall_bound(x0, k, delta, step);
                prop_assert!(x <= bound * (1.0 + 1e-12), "step {step}: {x} > {bound}");
                x = x * (1.0 + k * delta) + k * delta;
            }
        }
    }
}
