//! Mergeable one-pass statistics and the summaries every estimator reports.

use serde::Serialize;

use crate::error::{Error, Result};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.96;

/// Online mean and sum of squared deviations (Welford), mergeable with the
/// Chan et al. pairwise update so per-worker accumulators can be tree-reduced.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct StreamingMoments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl StreamingMoments {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_values<I: IntoIterator<Item = f64>>(values: I) -> Self {
        let mut m = Self::new();
        for v in values {
            m.update(v);
        }
        m
    }

    #[inline]
    pub fn update(&mut self, value: f64) {
        self.count += 1;
        let delta = value - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (value - self.mean);
    }

    pub fn merge(&self, other: &Self) -> Self {
        if other.count == 0 {
            return *self;
        }
        if self.count == 0 {
            return *other;
        }
        let count = self.count + other.count;
        let (na, nb, n) = (self.count as f64, other.count as f64, count as f64);
        let delta = other.mean - self.mean;
        // weighted form is symmetric in (self, other)
        let mean = (na * self.mean + nb * other.mean) / n;
        let m2 = self.m2 + other.m2 + delta * delta * na * nb / n;
        Self { count, mean, m2 }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn m2(&self) -> f64 {
        self.m2
    }

    /// Unbiased sample variance; `None` below two observations.
    pub fn variance(&self) -> Option<f64> {
        (self.count >= 2).then(|| self.m2 / (self.count - 1) as f64)
    }

    pub fn std_dev(&self) -> Option<f64> {
        self.variance().map(f64::sqrt)
    }

    /// Standard error of the mean.
    pub fn stderr(&self) -> Option<f64> {
        self.variance().map(|v| (v / self.count as f64).sqrt())
    }

    /// Mean with its standard error and a normal 95% interval.
    pub fn summary(&self) -> Result<EstimateSummary> {
        let stderr = self.stderr().ok_or_else(|| {
            Error::InsufficientData(format!(
                "a standard error needs at least 2 observations, got {}",
                self.count
            ))
        })?;
        Ok(EstimateSummary::new(self.mean, stderr, self.count))
    }
}

impl Extend<f64> for StreamingMoments {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for v in iter {
            self.update(v);
        }
    }
}

/// Bivariate online moments, used for the correlation between the crossing
/// indicator and the normalized offset of the same throw.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CoMoments {
    count: u64,
    mean_x: f64,
    mean_y: f64,
    m2_x: f64,
    m2_y: f64,
    c_xy: f64,
}

impl CoMoments {
    #[inline]
    pub fn update(&mut self, x: f64, y: f64) {
        self.count += 1;
        let n = self.count as f64;
        let dx = x - self.mean_x;
        let dy = y - self.mean_y;
        self.mean_x += dx / n;
        self.mean_y += dy / n;
        self.m2_x += dx * (x - self.mean_x);
        self.m2_y += dy * (y - self.mean_y);
        self.c_xy += dx * (y - self.mean_y);
    }

    pub fn merge(&self, other: &Self) -> Self {
        if other.count == 0 {
            return *self;
        }
        if self.count == 0 {
            return *other;
        }
        let count = self.count + other.count;
        let (na, nb, n) = (self.count as f64, other.count as f64, count as f64);
        let dx = other.mean_x - self.mean_x;
        let dy = other.mean_y - self.mean_y;
        let w = na * nb / n;
        Self {
            count,
            mean_x: (na * self.mean_x + nb * other.mean_x) / n,
            mean_y: (na * self.mean_y + nb * other.mean_y) / n,
            m2_x: self.m2_x + other.m2_x + dx * dx * w,
            m2_y: self.m2_y + other.m2_y + dy * dy * w,
            c_xy: self.c_xy + other.c_xy + dx * dy * w,
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Pearson correlation; `None` if either margin has zero spread.
    pub fn correlation(&self) -> Option<f64> {
        let denom = (self.m2_x * self.m2_y).sqrt();
        (self.count >= 2 && denom > 0.0).then(|| self.c_xy / denom)
    }
}

/// Point estimate with standard error and 95% normal interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateSummary {
    pub point: f64,
    pub stderr: f64,
    pub ci95_low: f64,
    pub ci95_high: f64,
    pub n_effective: u64,
}

impl EstimateSummary {
    pub fn new(point: f64, stderr: f64, n_effective: u64) -> Self {
        let half = Z95 * stderr;
        Self {
            point,
            stderr,
            ci95_low: point - half,
            ci95_high: point + half,
            n_effective,
        }
    }

    /// Distance from `target` in units of the standard error.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.point - target) / self.stderr
    }

    pub fn covers(&self, target: f64) -> bool {
        self.ci95_low <= target && target <= self.ci95_high
    }
}

/// Standard error of a binomial proportion, `sqrt(p(1-p)/n)`.
pub fn stderr_proportion(p_hat: f64, n: u64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_hat) {
        return Err(Error::InvalidArgument(format!(
            "proportion {p_hat} outside [0, 1]"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("proportion over zero trials".into()));
    }
    Ok((p_hat * (1.0 - p_hat) / n as f64).sqrt())
}

/// Least-squares slope of `ln(error)` against `ln(n)`.
///
/// A Monte Carlo error shrinking like `n^(-1/2)` fits a slope of -0.5.
pub fn fit_error_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "slope fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    if let Some(&(n, e)) = points
        .iter()
        .find(|&&(n, e)| !(n > 0.0 && e > 0.0 && n.is_finite() && e.is_finite()))
    {
        return Err(Error::InvalidArgument(format!(
            "slope fit needs positive finite points, got ({n}, {e})"
        )));
    }
    let k = points.len() as f64;
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |(sx, sy), &(n, e)| (sx + n.ln(), sy + e.ln()));
    let (mx, my) = (sx / k, sy / k);
    let (sxy, sxx) = points.iter().fold((0.0, 0.0), |(sxy, sxx), &(n, e)| {
        let dx = n.ln() - mx;
        (sxy + dx * (e.ln() - my), sxx + dx * dx)
    });
    if sxx == 0.0 {
        return Err(Error::InvalidArgument(
            "slope fit needs at least two distinct n".into(),
        ));
    }
    Ok(sxy / sxx)
}

/// Root mean square of a set of errors.
pub fn rms(errors: &[f64]) -> f64 {
    (errors.iter().map(|e| e * e).sum::<f64>() / errors.len() as f64).sqrt()
}

/// Median of the finite values; `None` when there are none.
pub fn median(values: &[f64]) -> Option<f64> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len().is_multiple_of(2) {
        0.5 * (v[mid - 1] + v[mid])
    } else {
        v[mid]
    })
}
