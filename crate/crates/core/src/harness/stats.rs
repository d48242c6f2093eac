//! Sample moments, covariances and the one-sample Kolmogorov–Smirnov test.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Smallest sample accepted by [`ks_test`].
pub const KS_MIN_SAMPLE: usize = 50;
const KOLMOGOROV_TERMS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MomentSummary {
    pub size: usize,
    pub mean: f64,
    /// Unbiased (`n - 1`) variance.
    pub variance: f64,
    pub skewness: f64,
    pub se_mean: f64,
    pub se_variance: f64,
    pub se_skewness: f64,
}

pub fn moment_summary(sample: &[f64]) -> Result<MomentSummary> {
    let size = sample.len();
    if size < 2 {
        return Err(Error::DegenerateSample(format!("need at least 2 values, got {size}")));
    }
    let n = size as f64;
    let mean = sample.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in sample {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let variance = m2 / (n - 1.0);
    let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);
    let skewness = if m2 > 0.0 { m3 / m2.powf(1.5) } else { 0.0 };
    // Var(s^2) ≈ (m4 - m2^2) / n for large n
    let se_variance = ((m4 - m2 * m2).max(0.0) / n).sqrt();
    let se_skewness = if size > 2 {
        (6.0 * n * (n - 1.0) / ((n - 2.0) * (n + 1.0) * (n + 3.0))).sqrt()
    } else {
        f64::INFINITY
    };
    Ok(MomentSummary { size, mean, variance, skewness, se_mean: (variance / n).sqrt(), se_variance, se_skewness })
}

/// Sample covariance of paired values with the standard error of the mean
/// of the centred products.
pub fn covariance_with_se(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    if x.len() < 2 {
        return Err(Error::DegenerateSample(format!("need at least 2 pairs, got {}", x.len())));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let prods: Vec<f64> = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).collect();
    let s = moment_summary(&prods)?;
    Ok((prods.iter().sum::<f64>() / (n - 1.0), s.se_mean))
}

/// `sup_x |F_n(x) - Φ((x - mean)/sd)|` without any size requirement.
pub fn ks_statistic(sample: &[f64], mean: f64, variance: f64) -> Result<f64> {
    if !(variance > 0.0) {
        return Err(Error::Domain { value: variance, domain: "variance > 0" });
    }
    let normal = Normal::new(mean, variance.sqrt())
        .map_err(|e| Error::InvalidParameter(format!("reference normal: {e}")))?;
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    Ok(sorted.iter().enumerate().fold(0.0_f64, |d, (i, &x)| {
        let f = normal.cdf(x);
        d.max(f - i as f64 / n).max((i + 1) as f64 / n - f)
    }))
}

/// Asymptotic Kolmogorov survival function
/// `Q(λ) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 λ^2)`, clamped to `[0, 1]`.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=KOLMOGOROV_TERMS {
        let jf = j as f64;
        sum += sign * (-2.0 * jf * jf * lambda * lambda).exp();
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// One-sample KS test against `Normal(mean, variance)`. The p-value uses
/// the effective-size correction `λ = (√n + 0.12 + 0.11/√n) D`.
pub fn ks_test(sample: &[f64], mean: f64, variance: f64) -> Result<KsResult> {
    if sample.len() < KS_MIN_SAMPLE {
        return Err(Error::DegenerateSample(format!(
            "KS test needs at least {KS_MIN_SAMPLE} values, got {}",
            sample.len()
        )));
    }
    if !(variance > 0.0) {
        return Err(Error::DegenerateSample(format!("reference variance {variance} is not positive")));
    }
    let statistic = ks_statistic(sample, mean, variance)?;
    let sqrt_n = (sample.len() as f64).sqrt();
    let lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * statistic;
    Ok(KsResult { statistic, p_value: kolmogorov_survival(lambda) })
}

/// Value at quantile `q` with linear interpolation between order statistics.
pub fn quantile(sample: &[f64], q: f64) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::DegenerateSample("empty sample".into()));
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Ok(sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::GaussianStream;

    #[test]
    fn moment_examples() {
        let c = moment_summary(&[3.0; 10]).unwrap();
        assert_eq!(c.variance, 0.0);
        assert_eq!(c.skewness, 0.0);
        let s = moment_summary(&[-1.0, 1.0]).unwrap();
        assert_eq!(s.mean, 0.0);
        assert_eq!(s.variance, 2.0);
        assert!(moment_summary(&[1.0]).is_err());
    }

    #[test]
    fn seeded_normal_mean() {
        let mut g = GaussianStream::new(11);
        let m = 100_000;
        let xs: Vec<f64> = (0..m).map(|_| 3.0 + 2.0 * g.normal()).collect();
        let s = moment_summary(&xs).unwrap();
        assert!((s.mean - 3.0).abs() < 4.0 * 2.0 / (m as f64).sqrt());
        assert!((s.variance - 4.0).abs() < 4.0 * s.se_variance);
        assert!(s.skewness.abs() < 4.0 * s.se_skewness);
    }

    #[test]
    fn two_point_statistic() {
        let d = ks_statistic(&[-1.0, 1.0], 0.0, 1.0).unwrap();
        assert!((d - 0.341_344_746_068_542_9).abs() < 1e-9, "{d}");
        assert!(ks_test(&[-1.0, 1.0], 0.0, 1.0).is_err());
    }

    #[test]
    fn null_and_shifted_samples() {
        let mut g = GaussianStream::new(5);
        let xs: Vec<f64> = (0..10_000).map(|_| g.normal()).collect();
        assert!(ks_test(&xs, 0.0, 1.0).unwrap().p_value > 1e-3);
        let shifted: Vec<f64> = xs.iter().map(|x| x + 5.0).collect();
        assert!(ks_test(&shifted, 0.0, 1.0).unwrap().p_value < 1e-6);
        assert!(ks_test(&xs, 0.0, 0.0).is_err());
    }

    #[test]
    fn kolmogorov_tail_values() {
        assert_eq!(kolmogorov_survival(0.0), 1.0);
        assert!((kolmogorov_survival(1.0) - 0.269_999_671_677_73).abs() < 1e-10);
        assert!((kolmogorov_survival(1.36) - 0.049_485_876_755_377_9).abs() < 1e-12);
    }

    #[test]
    fn covariance_of_independent_streams() {
        let mut g = GaussianStream::new(8);
        let x: Vec<f64> = (0..20_000).map(|_| g.normal()).collect();
        let y: Vec<f64> = (0..20_000).map(|_| g.normal()).collect();
        let (c, se) = covariance_with_se(&x, &y).unwrap();
        assert!(c.abs() < 4.0 * se);
        let (c, _) = covariance_with_se(&x, &x).unwrap();
        assert!((c - moment_summary(&x).unwrap().variance).abs() < 1e-12);
    }

    #[test]
    fn quantiles() {
        let xs = [4.0, 1.0, 3.0, 2.0];
        assert_eq!(quantile(&xs, 0.5).unwrap(), 2.5);
        assert_eq!(quantile(&xs, 1.0).unwrap(), 4.0);
        assert_eq!(quantile(&xs, 0.0).unwrap(), 1.0);
    }
}
