/// z-value of a two-sided 95% normal interval.
pub const Z95: f64 = 1.96;

/// Sample mean with its standard error and 95% confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub stderr: f64,
    pub ci: f64,
}

impl Summary {
    /// Summary of the values, using the unbiased sample variance. A single
    /// value has zero standard error.
    pub fn of(values: impl IntoIterator<Item = f64>) -> Self {
        // Welford, in iteration order, so results are bit-reproducible.
        let (mut count, mut mean, mut m2) = (0usize, 0.0f64, 0.0f64);
        for x in values {
            count += 1;
            let delta = x - mean;
            mean += delta / count as f64;
            m2 += delta * (x - mean);
        }
        if count == 0 {
            return Self { mean: f64::NAN, stderr: f64::NAN, ci: f64::NAN };
        }
        let stderr = if count > 1 { (m2 / (count - 1) as f64 / count as f64).sqrt() } else { 0.0 };
        Self::with_stderr(mean, stderr)
    }

    /// Binomial proportion `successes / trials` with stderr `√(p(1−p)/N)`.
    pub fn proportion(successes: usize, trials: usize) -> Self {
        if trials == 0 {
            return Self { mean: f64::NAN, stderr: f64::NAN, ci: f64::NAN };
        }
        let p = successes as f64 / trials as f64;
        Self::with_stderr(p, (p * (1.0 - p) / trials as f64).sqrt())
    }

    pub fn with_stderr(mean: f64, stderr: f64) -> Self {
        Self { mean, stderr, ci: Z95 * stderr }
    }

    /// An exact value with no sampling error.
    pub fn exact(value: f64) -> Self {
        Self::with_stderr(value, 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_stderr() {
        let s = Summary::of([2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]);
        assert_eq!(s.mean, 5.0);
        // Sample variance 32/7.
        assert!((s.stderr - (32.0f64 / 7.0 / 8.0).sqrt()).abs() < 1e-12);
        assert_eq!(s.ci, 1.96 * s.stderr);
        assert_eq!(Summary::of([3.0]).stderr, 0.0);
        assert!(Summary::of([]).mean.is_nan());
    }

    #[test]
    fn proportions() {
        let p = Summary::proportion(25, 100);
        assert_eq!(p.mean, 0.25);
        assert!((p.stderr - (0.25f64 * 0.75 / 100.0).sqrt()).abs() < 1e-15);
        assert_eq!(Summary::proportion(0, 10).stderr, 0.0);
    }
}
