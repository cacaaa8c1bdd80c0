//! Dyadic filter banks built from a QMF pair: per-scale high-pass taps h_j
//! with decimation gamma_j = 2^j, their transfer functions, the scale-limit
//! transfer h_inf, vanishing-moment and smoothness diagnostics, and the
//! K-fold inverse-differencing helper.
//!
//! Tap convention: W_{j,k} = sum_t h_j(gamma_j k - t) y_t, taps supported on
//! 0..T_j-1 with T_j = (T-1)(2^j - 1) + 1 for a base QMF of length T.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Haar QMF pair (low, high).
pub fn haar_qmf() -> (Vec<f64>, Vec<f64>) {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    (vec![s, s], vec![s, -s])
}

/// Daubechies-2 QMF pair (two vanishing moments).
pub fn db2_qmf() -> (Vec<f64>, Vec<f64>) {
    let r3 = 3f64.sqrt();
    let norm = 4.0 * 2f64.sqrt();
    let h: Vec<f64> = [1.0 + r3, 3.0 + r3, 3.0 - r3, 1.0 - r3]
        .iter()
        .map(|v| v / norm)
        .collect();
    let g = alternating_flip(&h);
    (h, g)
}

/// g[n] = (-1)^n h[L-1-n].
pub fn alternating_flip(h: &[f64]) -> Vec<f64> {
    let l = h.len();
    (0..l)
        .map(|n| if n % 2 == 0 { h[l - 1 - n] } else { -h[l - 1 - n] })
        .collect()
}

fn upsample(taps: &[f64], factor: usize) -> Vec<f64> {
    if factor == 1 {
        return taps.to_vec();
    }
    let mut out = vec![0.0; (taps.len() - 1) * factor + 1];
    for (i, &t) in taps.iter().enumerate() {
        out[i * factor] = t;
    }
    out
}

fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// Count vanishing moments of taps: largest M with sum_t taps(t) t^m = 0
/// for all m < M, at tolerance 1e-9 * sum|taps| * T^m.
fn vanishing_moments(taps: &[f64]) -> u32 {
    let scale: f64 = taps.iter().map(|t| t.abs()).sum();
    let t_len = taps.len() as f64;
    let mut m = 0u32;
    loop {
        let s: f64 = taps
            .iter()
            .enumerate()
            .map(|(t, &h)| h * (t as f64).powi(m as i32))
            .sum();
        if s.abs() > 1e-9 * scale * t_len.powi(m as i32) || m > 16 {
            return m;
        }
        m += 1;
    }
}

/// Scale-limit transfer function h_inf of a QMF cascade, evaluated through
/// the convergent infinite product
/// h_inf(lambda) = [G(lambda/2)/sqrt2] prod_{k>=2} [H(lambda 2^{-k})/sqrt2].
#[derive(Debug, Clone)]
pub struct LimitTransfer {
    qmf_low: Vec<f64>,
    qmf_high: Vec<f64>,
    m_moments: u32,
    alpha: f64,
}

/// Fitted decay witness for |h_inf(lambda)| <= C |lambda|^M / (1+|lambda|)^{alpha+M}.
#[derive(Debug, Clone, Copy)]
pub struct DecayWitness {
    pub c: f64,
    pub m_moments: u32,
    pub alpha: f64,
    pub holds: bool,
}

impl LimitTransfer {
    fn dft(taps: &[f64], lambda: f64) -> Complex64 {
        taps.iter()
            .enumerate()
            .map(|(t, &h)| h * Complex64::new(0.0, -lambda * t as f64).exp())
            .sum()
    }

    pub fn eval(&self, lambda: f64) -> Complex64 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut acc = Self::dft(&self.qmf_high, lambda / 2.0) * s;
        // Tail factors approach 1 like 2^{-k} lambda; run until the argument
        // is below 1e-9 so the dropped tail is negligible.
        let mut arg = lambda / 4.0;
        let mut k = 0;
        while arg.abs() > 1e-9 && k < 80 {
            acc *= Self::dft(&self.qmf_low, arg) * s;
            arg /= 2.0;
            k += 1;
        }
        acc
    }

    pub fn magnitude(&self, lambda: f64) -> f64 {
        self.eval(lambda).norm()
    }

    pub fn m_moments(&self) -> u32 {
        self.m_moments
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Fit C as the grid supremum of |h_inf| / bound-shape over
    /// |lambda| in (0, 1e4]; by construction the bound then holds on the
    /// grid, and holds=false only for degenerate (momentless) filters.
    pub fn decay_witness(&self) -> DecayWitness {
        let mut c: f64 = 0.0;
        let mut lambda: f64 = 1e-3;
        while lambda <= 1e4 {
            let shape = lambda.powi(self.m_moments as i32)
                / (1.0 + lambda).powf(self.alpha + self.m_moments as f64);
            c = c.max(self.magnitude(lambda) / shape);
            lambda *= 1.02;
        }
        DecayWitness {
            c,
            m_moments: self.m_moments,
            alpha: self.alpha,
            holds: c.is_finite() && self.m_moments >= 1,
        }
    }
}

/// Per-scale filter bank: m parallel filters (usually one) sharing the
/// dyadic decimation gamma_j = 2^j.
#[derive(Debug, Clone)]
pub struct WaveletFilterBank {
    family: String,
    qmf_low: Vec<f64>,
    qmf_high: Vec<f64>,
    levels: u32,
    /// taps[i][j-1]: taps of filter i at scale j.
    taps: Vec<Vec<Vec<f64>>>,
    m_moments: u32,
    alpha_smooth: f64,
    k_applied: u32,
}

/// Smoothness diagnostic across scales.
#[derive(Debug, Clone, Copy)]
pub struct SmoothnessReport {
    pub c_fit: f64,
    pub holds: bool,
    pub m_moments: u32,
    pub alpha: f64,
}

impl WaveletFilterBank {
    /// Haar cascade; checks the cascade limit against the closed-form
    /// magnitude |sin^2(lambda/4)/(lambda/4)| as a build-time guard.
    pub fn build_haar(levels: u32) -> Result<Self> {
        let (h, g) = haar_qmf();
        let bank = Self::build_cascade(&h, &g, levels)?;
        let lt = bank.limit_transfer();
        let mut worst: f64 = 0.0;
        let mut lambda: f64 = 0.1;
        while lambda <= 20.0 {
            let closed = ((lambda / 4.0).sin().powi(2) / (lambda / 4.0)).abs();
            let rel = (lt.magnitude(lambda) - closed).abs() / closed.max(1e-3);
            worst = worst.max(rel);
            lambda += 0.37;
        }
        if worst > 0.02 {
            return Err(CoreError::numeric(
                "Haar cascade limit vs closed form",
                worst,
                0.02,
            ));
        }
        Ok(WaveletFilterBank {
            family: "haar".into(),
            ..bank
        })
    }

    /// Generic cascade from a QMF pair; verifies the quadrature-mirror
    /// relation (alternating flip, unit norm, shift-2 orthonormality).
    pub fn build_cascade(low: &[f64], high: &[f64], levels: u32) -> Result<Self> {
        if levels < 1 {
            return Err(CoreError::invalid("bank needs at least one level"));
        }
        if low.len() < 2 || low.len() != high.len() {
            return Err(CoreError::invalid(
                "QMF pair must be two equal-length filters with >= 2 taps",
            ));
        }
        let flip = alternating_flip(low);
        let flip_err = high
            .iter()
            .zip(&flip)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let mut ortho_err: f64 = (low.iter().map(|v| v * v).sum::<f64>() - 1.0).abs();
        for k in 1..(low.len() / 2) {
            let s: f64 = (0..low.len() - 2 * k).map(|n| low[n] * low[n + 2 * k]).sum();
            ortho_err = ortho_err.max(s.abs());
        }
        if flip_err > 1e-10 || ortho_err > 1e-10 {
            return Err(CoreError::invalid(format!(
                "not a quadrature-mirror pair (flip deviation {flip_err:.2e}, \
                 orthonormality deviation {ortho_err:.2e})"
            )));
        }
        let mut per_level = Vec::with_capacity(levels as usize);
        for j in 1..=levels {
            let mut taps = upsample(high, 1usize << (j - 1));
            for i in 0..j.saturating_sub(1) {
                taps = convolve(&taps, &upsample(low, 1usize << i));
            }
            per_level.push(taps);
        }
        let m = vanishing_moments(high);
        let alpha = if m >= 2 { 1.0 } else { 0.75 };
        let bank = WaveletFilterBank {
            family: "cascade".into(),
            qmf_low: low.to_vec(),
            qmf_high: high.to_vec(),
            levels,
            taps: vec![per_level],
            m_moments: m,
            alpha_smooth: alpha,
            k_applied: 0,
        };
        bank.check_moments()?;
        Ok(bank)
    }

    /// Raw single-filter bank for diagnostics (no QMF structure assumed).
    pub fn from_raw_taps(per_level: Vec<Vec<f64>>, alpha: f64) -> Result<Self> {
        if per_level.is_empty() || per_level.iter().any(Vec::is_empty) {
            return Err(CoreError::invalid("raw bank needs nonempty taps"));
        }
        let m = vanishing_moments(&per_level[0]);
        Ok(WaveletFilterBank {
            family: "raw".into(),
            qmf_low: Vec::new(),
            qmf_high: per_level[0].clone(),
            levels: per_level.len() as u32,
            taps: vec![per_level],
            m_moments: m,
            alpha_smooth: alpha,
            k_applied: 0,
        })
    }

    /// Replicate the filter m times (multivariate bank with identical
    /// components).
    pub fn duplicate(mut self, m: usize) -> Self {
        let base = self.taps[0].clone();
        self.taps = vec![base; m.max(1)];
        self
    }

    fn check_moments(&self) -> Result<()> {
        for (j, taps) in self.taps[0].iter().enumerate() {
            let scale: f64 = taps.iter().map(|t| t.abs()).sum();
            let t_len = taps.len() as f64;
            for m in 0..self.m_moments {
                let s: f64 = taps
                    .iter()
                    .enumerate()
                    .map(|(t, &h)| h * (t as f64).powi(m as i32))
                    .sum();
                if s.abs() > 1e-9 * scale * t_len.powi(m as i32) {
                    return Err(CoreError::numeric(
                        format!("vanishing moment m={m} at level {}", j + 1),
                        s.abs(),
                        1e-9 * scale * t_len.powi(m as i32),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn family(&self) -> &str {
        &self.family
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    pub fn num_filters(&self) -> usize {
        self.taps.len()
    }

    pub fn m_moments(&self) -> u32 {
        self.m_moments
    }

    pub fn alpha_smooth(&self) -> f64 {
        self.alpha_smooth
    }

    pub fn set_alpha_smooth(&mut self, alpha: f64) {
        self.alpha_smooth = alpha;
    }

    pub fn k_applied(&self) -> u32 {
        self.k_applied
    }

    pub fn set_k_applied(&mut self, k: u32) {
        self.k_applied = k;
    }

    /// Decimation factor gamma_j = 2^j.
    pub fn gamma(&self, j: u32) -> u64 {
        1u64 << j
    }

    /// Base QMF support length T (drives the n_j count).
    pub fn base_support(&self) -> usize {
        self.qmf_high.len().max(self.taps[0][0].len())
    }

    /// Support length of h_j.
    pub fn support(&self, j: u32) -> usize {
        self.taps[0][j as usize - 1].len()
    }

    pub fn taps(&self, filter: usize, j: u32) -> &[f64] {
        &self.taps[filter][j as usize - 1]
    }

    /// h_j with Delta^{-K} folded in: K-fold within-window partial sums.
    /// Compactly supported on the same window because the first K moments
    /// vanish; requires M >= K+1 so results are constant-shift invariant.
    pub fn effective_taps(&self, filter: usize, j: u32, k_diff: u32) -> Result<Vec<f64>> {
        if k_diff >= 1 && self.m_moments <= k_diff {
            return Err(CoreError::invalid(format!(
                "Delta^-K with K={k_diff} needs M >= K+1 vanishing moments, bank has M={}",
                self.m_moments
            )));
        }
        let mut taps = self.taps(filter, j).to_vec();
        for _ in 0..k_diff {
            let mut acc = 0.0;
            for t in taps.iter_mut() {
                acc += *t;
                *t = acc;
            }
        }
        Ok(taps)
    }

    /// Discrete transfer function of h_j at lambda (direct summation).
    pub fn transfer(&self, j: u32, lambda: f64) -> Complex64 {
        LimitTransfer::dft(self.taps(0, j), lambda)
    }

    /// Same value through the cascade product
    /// H_j(lambda) = G(2^{j-1} lambda) prod_{i=0}^{j-2} H(2^i lambda).
    pub fn transfer_product(&self, j: u32, lambda: f64) -> Complex64 {
        let mut acc = LimitTransfer::dft(&self.qmf_high, (1u64 << (j - 1)) as f64 * lambda);
        for i in 0..j - 1 {
            acc *= LimitTransfer::dft(&self.qmf_low, (1u64 << i) as f64 * lambda);
        }
        acc
    }

    pub fn limit_transfer(&self) -> LimitTransfer {
        LimitTransfer {
            qmf_low: self.qmf_low.clone(),
            qmf_high: self.qmf_high.clone(),
            m_moments: self.m_moments,
            alpha: self.alpha_smooth,
        }
    }

    /// Fit C in |h_j(lambda)| <= C gamma_j^{1/2} |gamma_j lambda|^M /
    /// (1 + gamma_j |lambda|)^{alpha+M} over a (j, lambda) grid; holds when
    /// the fit is finite, the filter has a vanishing moment, and C is stable
    /// (within 10%) across the two deepest levels.
    pub fn smoothness_check(&self) -> SmoothnessReport {
        self.smoothness_check_with(self.alpha_smooth)
    }

    pub fn smoothness_check_with(&self, alpha: f64) -> SmoothnessReport {
        let m = self.m_moments;
        if m == 0 {
            return SmoothnessReport {
                c_fit: f64::INFINITY,
                holds: false,
                m_moments: 0,
                alpha,
            };
        }
        let mut per_level_c = Vec::with_capacity(self.levels as usize);
        for j in 1..=self.levels {
            let gamma = self.gamma(j) as f64;
            let mut c: f64 = 0.0;
            let mut lambda = 1e-4;
            while lambda <= std::f64::consts::PI {
                let shape = gamma.sqrt() * (gamma * lambda).powi(m as i32)
                    / (1.0 + gamma * lambda).powf(alpha + m as f64);
                c = c.max(self.transfer(j, lambda).norm() / shape);
                lambda *= 1.05;
            }
            per_level_c.push(c);
        }
        let c_fit = per_level_c.iter().copied().fold(0.0, f64::max);
        let holds = if per_level_c.len() >= 2 {
            let a = per_level_c[per_level_c.len() - 2];
            let b = per_level_c[per_level_c.len() - 1];
            c_fit.is_finite() && (a - b).abs() <= 0.1 * a.max(b)
        } else {
            c_fit.is_finite()
        };
        SmoothnessReport {
            c_fit,
            holds,
            m_moments: m,
            alpha,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(BankJson {
            family: self.family.clone(),
            qmf: self.qmf_low.clone(),
            levels: self.levels,
            k: self.k_applied,
        })
        .expect("bank serializes")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let spec: BankJson = serde_json::from_value(value.clone())
            .map_err(|e| CoreError::Schema(format!("bank json: {e}")))?;
        let mut bank = match spec.family.as_str() {
            "haar" => Self::build_haar(spec.levels)?,
            "cascade" => {
                let high = alternating_flip(&spec.qmf);
                Self::build_cascade(&spec.qmf, &high, spec.levels)?
            }
            other => {
                return Err(CoreError::Schema(format!(
                    "unknown filter family {other:?}"
                )))
            }
        };
        bank.k_applied = spec.k;
        Ok(bank)
    }
}

#[derive(Serialize, Deserialize)]
struct BankJson {
    family: String,
    qmf: Vec<f64>,
    levels: u32,
    #[serde(rename = "K")]
    k: u32,
}

/// K-fold cumulative sum (Delta^{-K}) with zero initial conditions.
/// Requires M >= K+1 on the analyzing bank so downstream coefficients
/// ignore the arbitrary constant of summation.
pub fn apply_delta_inv_k(y: &[f64], k_diff: u32, m_moments: u32) -> Result<Vec<f64>> {
    if k_diff >= 1 && m_moments <= k_diff {
        return Err(CoreError::invalid(format!(
            "Delta^-K with K={k_diff} needs a bank with M >= K+1, got M={m_moments}"
        )));
    }
    let mut out = y.to_vec();
    for _ in 0..k_diff {
        let mut acc = 0.0;
        for v in out.iter_mut() {
            acc += *v;
            *v = acc;
        }
    }
    Ok(out)
}

/// n_j = floor(2^{-j} (N - T + 1) - T + 1), the count of boundary-free
/// wavelet coefficients at level j for base support T.
pub fn coefficient_count(n: usize, t: usize, j: u32) -> Result<usize> {
    if n == 0 || t == 0 {
        return Err(CoreError::invalid("sample and support lengths must be positive"));
    }
    let avail = (n as f64 - t as f64 + 1.0) / (1u64 << j) as f64 - t as f64 + 1.0;
    let count = avail.floor();
    if count < 1.0 {
        let n_min = (1u64 << j) as usize * t + t - 1;
        return Err(CoreError::InsufficientData(format!(
            "no boundary-free coefficients at level {j} with N={n}, T={t}; need N >= {n_min}"
        )));
    }
    Ok(count as usize)
}
