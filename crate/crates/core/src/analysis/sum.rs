// SPDX-License-Identifier: Apache-2.0

/// Neumaier compensated summation. Accumulating in a fixed order gives
/// reproducible sums regardless of how the terms were computed.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Running mean and standard error of the mean over an ordered stream.
#[derive(Clone, Copy, Debug, Default)]
pub struct MeanAccumulator {
    count: usize,
    sum: CompensatedSum,
    sum_sq: CompensatedSum,
}

impl MeanAccumulator {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum.add(x);
        self.sum_sq.add(x * x);
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.sum.value() / self.count as f64
    }

    /// Unbiased sample variance (0 for fewer than two samples).
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        let mean = self.mean();
        ((self.sum_sq.value() - n * mean * mean) / (n - 1.0)).max(0.0)
    }

    pub fn stderr(&self) -> f64 {
        (self.variance() / self.count as f64).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensation_recovers_small_terms() {
        let mut s = CompensatedSum::default();
        s.add(1.0);
        for _ in 0..1000 {
            s.add(1e-16);
        }
        s.add(-1.0);
        assert!((s.value() - 1e-13).abs() < 1e-25);
    }

    #[test]
    fn mean_and_variance() {
        let mut acc = MeanAccumulator::default();
        for x in [1.0, 2.0, 3.0, 4.0] {
            acc.push(x);
        }
        assert_eq!(acc.mean(), 2.5);
        assert!((acc.variance() - 5.0 / 3.0).abs() < 1e-15);
        assert!((acc.stderr() - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
    }
}
