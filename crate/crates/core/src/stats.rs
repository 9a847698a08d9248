//! Order-stable reductions for Monte-Carlo estimates.

/// Neumaier compensated summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

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

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Sample mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    /// Standard error of the mean; zero for fewer than two samples.
    pub stderr: f64,
    pub count: usize,
}

impl MeanEstimate {
    /// Two-pass estimate over `samples`. Panics on an empty slice.
    pub fn from_samples(samples: &[f64]) -> Self {
        assert!(!samples.is_empty(), "mean of an empty sample");
        let n = samples.len();
        let mean = samples.iter().copied().collect::<CompensatedSum>().value() / n as f64;
        let stderr = if n > 1 {
            let ss = samples
                .iter()
                .map(|x| (x - mean).powi(2))
                .collect::<CompensatedSum>()
                .value();
            (ss / (n - 1) as f64 / n as f64).sqrt()
        } else {
            0.0
        };
        Self { mean, stderr, count: n }
    }

    /// Number of standard errors separating the mean from `value` (signed).
    pub fn z_score(&self, value: f64) -> f64 {
        (self.mean - value) / self.stderr
    }
}
