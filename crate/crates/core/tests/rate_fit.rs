// SPDX-License-Identifier: Apache-2.0

use mixfbm::analysis::fit_rate;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

#[test]
fn interval_covers_the_true_slope_in_synthetic_trials() {
    let mut rng = ChaCha8Rng::seed_from_u64(2718);
    let trials = 500;
    let mut covered = 0;
    for _ in 0..trials {
        let points: Vec<(f64, f64, f64)> = (4..10)
            .map(|e| {
                let delta = 2f64.powi(-e);
                let rel = 0.01 + 0.005 * e as f64;
                let noise = Normal::new(0.0, rel).unwrap().sample(&mut rng);
                let rmse = 0.3 * delta.powf(0.35) * noise.exp();
                (delta, rmse, rel * rmse)
            })
            .collect();
        if fit_rate(&points).unwrap().ci_contains(0.35) {
            covered += 1;
        }
    }
    assert!(covered * 10 >= trials * 9, "coverage {covered}/{trials}");
}
