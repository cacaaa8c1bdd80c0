//! Small-sample statistics used by the harness diagnostics and tests:
//! moments with standard errors, Kolmogorov-Smirnov distances, an
//! Anderson-Darling normality check, and least-squares slope fitting.

use statrs::distribution::{ContinuousCDF, Normal};

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64
}

pub fn sd(xs: &[f64]) -> f64 {
    variance(xs).sqrt()
}

fn central_moment(xs: &[f64], m: f64, p: i32) -> f64 {
    xs.iter().map(|x| (x - m).powi(p)).sum::<f64>() / xs.len() as f64
}

/// Sample skewness g1 = m3 / m2^(3/2).
pub fn skewness(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let m2 = central_moment(xs, m, 2);
    let m3 = central_moment(xs, m, 3);
    m3 / m2.powf(1.5)
}

/// Asymptotic standard error of the sample skewness under normality.
pub fn skewness_se(n: usize) -> f64 {
    (6.0 / n as f64).sqrt()
}

/// Sample excess kurtosis g2 = m4 / m2^2 - 3.
pub fn kurtosis_excess(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let m2 = central_moment(xs, m, 2);
    let m4 = central_moment(xs, m, 4);
    m4 / (m2 * m2) - 3.0
}

pub fn kurtosis_se(n: usize) -> f64 {
    (24.0 / n as f64).sqrt()
}

/// (x - mean) / sd applied elementwise.
pub fn standardize(xs: &[f64]) -> Vec<f64> {
    let m = mean(xs);
    let s = sd(xs).max(f64::MIN_POSITIVE);
    xs.iter().map(|x| (x - m) / s).collect()
}

pub fn normal_cdf(z: f64) -> f64 {
    Normal::new(0.0, 1.0).unwrap().cdf(z)
}

/// One-sample Kolmogorov-Smirnov distance against a CDF.
pub fn ks_distance(xs: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, x) in sorted.iter().enumerate() {
        let f = cdf(*x);
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        d = d.max((f - lo).abs()).max((hi - f).abs());
    }
    d
}

/// Two-sample Kolmogorov-Smirnov distance.
pub fn ks_two_sample(xs: &[f64], ys: &[f64]) -> f64 {
    let mut a = xs.to_vec();
    let mut b = ys.to_vec();
    a.sort_by(|x, y| x.total_cmp(y));
    b.sort_by(|x, y| x.total_cmp(y));
    let (mut i, mut j) = (0usize, 0usize);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        // Step over the whole tie block in both samples before comparing,
        // so equal values never create a spurious gap.
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] == v {
            i += 1;
        }
        while j < b.len() && b[j] == v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// Asymptotic Kolmogorov critical coefficient c(alpha) with
/// P(sqrt(n) D > c) = alpha; reject when D > c / sqrt(n_eff).
pub fn ks_critical_coefficient(alpha: f64) -> f64 {
    (-0.5 * (alpha / 2.0).ln()).sqrt()
}

/// Effective sqrt-sample-size factor for the two-sample test.
pub fn ks_two_sample_scale(n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    ((n + m) / (n * m)).sqrt()
}

/// Anderson-Darling statistic A^2* against normality with estimated mean and
/// variance (the small-sample correction of the classic tables). Reject
/// normality at the 1% level when the value exceeds 1.035.
pub fn anderson_darling_normal(xs: &[f64]) -> f64 {
    let z = standardize(xs);
    let mut sorted = z;
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len();
    let nf = n as f64;
    let mut s = 0.0;
    for i in 0..n {
        let phi_lo = normal_cdf(sorted[i]).clamp(1e-300, 1.0 - 1e-16);
        let phi_hi = normal_cdf(sorted[n - 1 - i]).clamp(1e-300, 1.0 - 1e-16);
        s += (2.0 * i as f64 + 1.0) * (phi_lo.ln() + (1.0 - phi_hi).ln());
    }
    let a2 = -nf - s / nf;
    a2 * (1.0 + 0.75 / nf + 2.25 / (nf * nf))
}

pub const AD_NORMAL_CRIT_1PCT: f64 = 1.035;

/// Ordinary least squares y = intercept + slope x.
#[derive(Debug, Clone, Copy)]
pub struct OlsFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// Standard error of the slope under homoskedastic residuals.
    pub slope_se: f64,
}

pub fn ols(x: &[f64], y: &[f64]) -> OlsFit {
    assert_eq!(x.len(), y.len());
    let mx = mean(x);
    let my = mean(y);
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let e = b - (intercept + slope * a);
            e * e
        })
        .sum();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    let dof = (x.len().saturating_sub(2)).max(1) as f64;
    let slope_se = (ss_res / dof / sxx).sqrt();
    OlsFit {
        slope,
        intercept,
        r2,
        slope_se,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    #[test]
    fn moments_on_known_data() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_abs_diff_eq!(mean(&xs), 2.5);
        assert_abs_diff_eq!(variance(&xs), 5.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(skewness(&xs), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn ols_recovers_line() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 0.3 * v).collect();
        let fit = ols(&x, &y);
        assert_abs_diff_eq!(fit.slope, -0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.intercept, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.r2, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn ks_basics() {
        // Uniform sample against its own CDF: distance shrinks with n.
        let mut rng = crate::rng::rng_from_seed(1);
        let xs: Vec<f64> = (0..2000).map(|_| rng.gen::<f64>()).collect();
        let d = ks_distance(&xs, |x| x.clamp(0.0, 1.0));
        assert!(d < ks_critical_coefficient(0.01) / (xs.len() as f64).sqrt() * 1.5);
        // Two identical samples have distance 0.
        assert_abs_diff_eq!(ks_two_sample(&xs, &xs), 0.0);
    }

    #[test]
    fn anderson_darling_separates() {
        let mut rng = crate::rng::rng_from_seed(2);
        let gauss: Vec<f64> = (0..4000)
            .map(|_| {
                let u: f64 = rng.gen();
                let v: f64 = rng.gen();
                (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
            })
            .collect();
        assert!(anderson_darling_normal(&gauss) < AD_NORMAL_CRIT_1PCT);
        let skewed: Vec<f64> = gauss.iter().map(|z| z * z).collect();
        assert!(anderson_darling_normal(&skewed) > AD_NORMAL_CRIT_1PCT);
    }
}
