use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::FeatureVector;

/// Running per-feature mean and population variance (Welford), used to
/// z-score raw features. The dummy component is not tracked.
#[derive(Clone, Debug, PartialEq)]
pub struct NormStats<T> {
    count: u64,
    means: Vec<T>,
    vars: Vec<T>,
}

impl<T: Scalar> NormStats<T> {
    pub fn new(feature_count: usize) -> Self {
        NormStats { count: 0, means: vec![T::zero(); feature_count], vars: vec![T::zero(); feature_count] }
    }

    /// Rebuilds statistics from stored values (e.g. a checkpoint).
    pub fn from_parts(count: u64, means: Vec<T>, vars: Vec<T>) -> Result<Self> {
        if means.len() != vars.len() {
            return Err(Error::DimensionMismatch { expected: means.len(), got: vars.len() });
        }
        if means.iter().chain(&vars).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("normalization statistics"));
        }
        if vars.iter().any(|&v| v < T::zero()) {
            return Err(Error::InvalidArgument("negative variance".into()));
        }
        Ok(NormStats { count, means, vars })
    }

    pub fn feature_count(&self) -> usize {
        self.means.len()
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn means(&self) -> &[T] {
        &self.means
    }

    pub fn variances(&self) -> &[T] {
        &self.vars
    }

    pub fn update(&mut self, raw: &[f64]) -> Result<()> {
        self.check(raw)?;
        self.count += 1;
        let n = T::of(self.count as f64);
        let prev = n - T::one();
        for ((mean, var), &x) in self.means.iter_mut().zip(self.vars.iter_mut()).zip(raw) {
            let x = T::of(x);
            let delta = x - *mean;
            *mean += delta / n;
            let m2 = *var * prev + delta * (x - *mean);
            *var = (m2 / n).max(T::zero());
        }
        Ok(())
    }

    pub fn update_all<'a, I: IntoIterator<Item = &'a [f64]>>(&mut self, rows: I) -> Result<()> {
        rows.into_iter().try_for_each(|r| self.update(r))
    }

    /// Centers each feature and divides by its standard deviation; features
    /// with zero variance are only centered.
    pub fn transform(&self, raw: &[f64]) -> Result<FeatureVector<T>> {
        self.check(raw)?;
        let mut out = Vec::with_capacity(raw.len() + 1);
        for ((&mean, &var), &x) in self.means.iter().zip(&self.vars).zip(raw) {
            let centered = T::of(x) - mean;
            out.push(if var > T::zero() { centered / var.sqrt() } else { centered });
        }
        FeatureVector::with_dummy(out)
    }

    fn check(&self, raw: &[f64]) -> Result<()> {
        if raw.len() != self.means.len() {
            return Err(Error::DimensionMismatch { expected: self.means.len(), got: raw.len() });
        }
        if raw.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("raw features"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn matches_two_pass_statistics() {
        let rows = [[1.0, 10.0, 5.0], [2.0, 30.0, 5.0], [4.0, 20.0, 5.0], [9.0, 60.0, 5.0]];
        let mut s = NormStats::<f64>::new(3);
        s.update_all(rows.iter().map(|r| &r[..])).unwrap();
        for j in 0..3 {
            let mean = rows.iter().map(|r| r[j]).sum::<f64>() / 4.0;
            let var = rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / 4.0;
            assert_relative_eq!(s.means()[j], mean, epsilon = 1e-12);
            assert_relative_eq!(s.variances()[j], var, epsilon = 1e-12);
        }
        assert_eq!(s.count(), 4);
    }

    #[test]
    fn transform_zscores_and_passes_constant_features() {
        let mut s = NormStats::<f64>::new(2);
        s.update_all([&[0.0, 7.0][..], &[2.0, 7.0][..]]).unwrap();
        let v = s.transform(&[3.0, 9.0]).unwrap();
        assert_eq!(&*v, &[2.0, 2.0, 1.0]);
    }

    #[test]
    fn empty_stats_are_identity() {
        let s = NormStats::<f32>::new(2);
        assert_eq!(&*s.transform(&[3.0, -1.0]).unwrap(), &[3.0f32, -1.0, 1.0]);
    }

    #[test]
    fn rejects_bad_rows() {
        let mut s = NormStats::<f64>::new(2);
        assert!(s.update(&[1.0]).is_err());
        assert!(s.update(&[1.0, f64::NAN]).is_err());
        assert_eq!(s.count(), 0);
        assert!(NormStats::from_parts(1, vec![0.0], vec![-1.0f64]).is_err());
    }
}
