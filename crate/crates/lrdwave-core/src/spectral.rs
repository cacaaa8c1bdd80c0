//! Long-memory spectral model f(lambda) = |1 - e^{-i lambda}|^{-2d} f*(lambda)
//! with d in (0, 1/2), a short-memory factor f*, and the memory-exponent
//! calculus delta(q) = q d - (q - 1)/2.
//!
//! Models are normalized at construction so the process variance
//! integral(f) over (-pi, pi] equals one; all reported f*(0) values are
//! post-normalization.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{CoreError, Result};
use crate::quad;
use crate::rational::{rat_from_f64, rat_int, Rat};

/// Short-memory spectral factor families.
///
/// All three are bounded, continuous, and positive at frequency zero; enough
/// to exercise the f*(0) dependence of the limit constants.
#[derive(Debug, Clone, PartialEq)]
pub enum FStar {
    /// f*(lambda) = c.
    Const { c: f64 },
    /// f*(lambda) = a_0 + a_1 cos(lambda) + ... + a_p cos(p lambda),
    /// required positive on the whole circle.
    CosPoly { coeffs: Vec<f64> },
    /// f*(lambda) = |1 - phi e^{-i lambda}|^{-2} with |phi| < 1.
    ArFactor { phi: f64 },
}

impl FStar {
    /// Raw (pre-normalization) value at lambda.
    fn eval_raw(&self, lambda: f64) -> f64 {
        match self {
            FStar::Const { c } => *c,
            FStar::CosPoly { coeffs } => coeffs
                .iter()
                .enumerate()
                .map(|(k, a)| a * (k as f64 * lambda).cos())
                .sum(),
            FStar::ArFactor { phi } => {
                let re = 1.0 - phi * lambda.cos();
                let im = -phi * lambda.sin();
                (re * re + im * im).recip()
            }
        }
    }

    /// Fourier coefficients b_k of f* (f*(lambda) = sum_k b_k e^{-i k lambda},
    /// symmetric), truncated at relative 1e-17 for the geometric family.
    fn fourier_coeffs(&self) -> Vec<(i64, f64)> {
        match self {
            FStar::Const { c } => vec![(0, *c)],
            FStar::CosPoly { coeffs } => {
                let mut out = Vec::new();
                for (k, a) in coeffs.iter().enumerate() {
                    if *a == 0.0 {
                        continue;
                    }
                    if k == 0 {
                        out.push((0i64, *a));
                    } else {
                        out.push((k as i64, a / 2.0));
                        out.push((-(k as i64), a / 2.0));
                    }
                }
                out
            }
            FStar::ArFactor { phi } => {
                let scale = (1.0 - phi * phi).recip();
                let k_max = if phi.abs() < 1e-12 {
                    0
                } else {
                    ((1e-17f64.ln()) / phi.abs().ln()).ceil() as i64
                };
                let mut out = Vec::with_capacity((2 * k_max + 1) as usize);
                for k in -k_max..=k_max {
                    out.push((k, scale * phi.abs().powi(k.unsigned_abs() as i32)
                        * if *phi < 0.0 && k % 2 != 0 { -1.0 } else { 1.0 }));
                }
                out
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            FStar::Const { c } => {
                if !(c.is_finite() && *c > 0.0) {
                    return Err(CoreError::invalid(format!(
                        "constant short-memory factor must be positive, got {c}"
                    )));
                }
            }
            FStar::CosPoly { coeffs } => {
                if coeffs.is_empty() || coeffs.iter().any(|a| !a.is_finite()) {
                    return Err(CoreError::invalid(
                        "cosine-polynomial factor needs at least one finite coefficient",
                    ));
                }
                let min = (0..=8192)
                    .map(|i| self.eval_raw(std::f64::consts::PI * i as f64 / 8192.0))
                    .fold(f64::INFINITY, f64::min);
                if min <= 0.0 {
                    return Err(CoreError::invalid(format!(
                        "cosine-polynomial factor must stay positive on the circle \
                         (grid minimum {min:.3e})"
                    )));
                }
            }
            FStar::ArFactor { phi } => {
                if !(phi.is_finite() && phi.abs() < 1.0) {
                    return Err(CoreError::invalid(format!(
                        "autoregressive factor requires |phi| < 1, got {phi}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Memory exponents of the q-th Hermite component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemoryExponents {
    pub delta: f64,
    pub delta_plus: f64,
    pub delta_minus: f64,
}

/// Spectral model with memory parameter d, short-memory factor f*, and
/// differencing order K. Immutable after construction; operations are pure.
#[derive(Debug, Clone)]
pub struct SpectralModel {
    d: f64,
    fstar: FStar,
    k_diff: u32,
    normalization: f64,
}

impl SpectralModel {
    pub fn new(d: f64, fstar: FStar, k_diff: u32) -> Result<Self> {
        if !(d.is_finite() && d > 0.0 && d < 0.5) {
            return Err(CoreError::domain(format!(
                "memory parameter d must lie strictly inside (0, 1/2), got {d}"
            )));
        }
        fstar.validate()?;
        let mut model = SpectralModel {
            d,
            fstar,
            k_diff,
            normalization: 1.0,
        };
        // Unit-variance normalization: divide by the exact value of
        // integral(f_raw) = rho_raw(0).
        let rho0_raw = model.acf_unnormalized(0);
        if !(rho0_raw.is_finite() && rho0_raw > 0.0) {
            return Err(CoreError::numeric(
                "spectral normalization integral",
                rho0_raw,
                f64::MIN_POSITIVE,
            ));
        }
        model.normalization = rho0_raw.recip();
        Ok(model)
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn k_diff(&self) -> u32 {
        self.k_diff
    }

    pub fn fstar(&self) -> &FStar {
        &self.fstar
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// Post-normalization short-memory factor at frequency zero; this is the
    /// f*(0) that enters every limit constant.
    pub fn fstar0(&self) -> f64 {
        self.normalization * self.fstar.eval_raw(0.0)
    }

    /// Post-normalization f* at arbitrary frequency.
    pub fn fstar_eval(&self, lambda: f64) -> f64 {
        self.normalization * self.fstar.eval_raw(lambda)
    }

    /// Spectral density at lambda in (-pi, pi], lambda != 0.
    pub fn eval_f(&self, lambda: f64) -> Result<f64> {
        if lambda == 0.0 {
            return Err(CoreError::domain(
                "spectral density diverges at lambda = 0 for d > 0",
            ));
        }
        let modulus = 2.0 * (lambda / 2.0).sin().abs();
        Ok(self.normalization * modulus.powf(-2.0 * self.d) * self.fstar.eval_raw(lambda))
    }

    /// rho(tau) by singularity-aware quadrature with error control.
    ///
    /// The integral over (0, pi] is split at a point a; on (0, a] the
    /// substitution lambda = u^{1/(1-2d)} removes the |lambda|^{-2d}
    /// singularity exactly, and the remainder is handled by adaptive
    /// bisection that tracks the cos(lambda tau) oscillation.
    pub fn autocovariance(&self, tau: i64, tol: f64) -> Result<f64> {
        if !(tol > 0.0) {
            return Err(CoreError::domain("quadrature tolerance must be positive"));
        }
        let t = tau.unsigned_abs() as f64;
        let d = self.d;
        let p = (1.0 - 2.0 * d).recip();
        let a: f64 = 0.5f64.min(std::f64::consts::PI);
        // Smooth part of f without the power singularity:
        // g(lambda) = f(lambda) lambda^{2d}.
        let smooth = |lambda: f64| -> f64 {
            let ratio = if lambda.abs() < 1e-8 {
                1.0 + lambda * lambda / 24.0
            } else {
                lambda / (2.0 * (lambda / 2.0).sin())
            };
            self.normalization * ratio.powf(2.0 * d) * self.fstar.eval_raw(lambda)
        };
        // Singular panel via substitution: d lambda = p u^{p-1} du and
        // lambda^{-2d} u^{... } collapse to a constant Jacobian p.
        let u_max = a.powf(1.0 - 2.0 * d);
        let mut f_sing = |u: f64| -> f64 {
            let lambda = u.abs().powf(p);
            p * smooth(lambda) * (lambda * t).cos()
        };
        let (i_sing, e_sing) = quad::adaptive(&mut f_sing, 0.0, u_max, tol / 4.0, 40)?;
        // Oscillatory remainder on [a, pi].
        let mut f_rest = |lambda: f64| -> f64 {
            lambda.powf(-2.0 * d) * smooth(lambda) * (lambda * t).cos()
        };
        let (i_rest, e_rest) =
            quad::adaptive(&mut f_rest, a, std::f64::consts::PI, tol / 4.0, 44)?;
        let achieved = e_sing + e_rest;
        if !(achieved.is_finite()) {
            return Err(CoreError::numeric("autocovariance quadrature", f64::NAN, tol));
        }
        Ok(2.0 * (i_sing + i_rest))
    }

    /// Exact autocovariances rho(0..=max_lag) in O(max_lag + support(f*)).
    ///
    /// Independent of the quadrature path: the pure-power part has the
    /// closed-form Gamma-ratio covariance sequence, and multiplying spectra
    /// convolves covariance sequences, with f* contributing its (finite or
    /// geometrically truncated) Fourier coefficients.
    pub fn autocovariance_batch(&self, max_lag: usize) -> Vec<f64> {
        let b = self.fstar.fourier_coeffs();
        let k_max = b.iter().map(|(k, _)| k.unsigned_abs() as usize).max().unwrap_or(0);
        let r1 = self.power_acf(max_lag + k_max);
        let mut out = Vec::with_capacity(max_lag + 1);
        for tau in 0..=max_lag as i64 {
            let mut s = 0.0;
            for &(k, bk) in &b {
                s += bk * r1[(tau - k).unsigned_abs() as usize];
            }
            out.push(self.normalization * s);
        }
        out
    }

    /// Covariance sequence of the pure |1-e^{-i lambda}|^{-2d} spectrum:
    /// r(s) = 2 pi Gamma(1-2d) Gamma(s+d) / (Gamma(d) Gamma(1-d) Gamma(s+1-d)),
    /// computed by the stable forward recurrence r(s+1) = r(s) (s+d)/(s+1-d).
    fn power_acf(&self, max_lag: usize) -> Vec<f64> {
        let d = self.d;
        let r0 = 2.0
            * std::f64::consts::PI
            * (ln_gamma(1.0 - 2.0 * d) - 2.0 * ln_gamma(1.0 - d)).exp();
        let mut r = Vec::with_capacity(max_lag + 1);
        r.push(r0);
        for s in 0..max_lag {
            let s = s as f64;
            let prev = *r.last().unwrap();
            r.push(prev * (s + d) / (s + 1.0 - d));
        }
        r
    }

    fn acf_unnormalized(&self, tau: usize) -> f64 {
        let b = self.fstar.fourier_coeffs();
        let k_max = b.iter().map(|(k, _)| k.unsigned_abs() as usize).max().unwrap_or(0);
        let r1 = self.power_acf(tau + k_max);
        b.iter()
            .map(|&(k, bk)| bk * r1[(tau as i64 - k).unsigned_abs() as usize])
            .sum()
    }

    /// delta(q), delta_plus(q), delta_minus(q) for real q > 0.
    pub fn memory_exponent(&self, q: f64) -> Result<MemoryExponents> {
        memory_exponent(q, self.d)
    }

    /// Whether the q-th Hermite component is long-range dependent,
    /// i.e. q < 1/(1-2d). Decided in exact arithmetic when d permits.
    pub fn is_long_memory(&self, q: u32) -> Result<bool> {
        if q < 1 {
            return Err(CoreError::domain("long-memory criterion needs q >= 1"));
        }
        Ok(is_long_memory_check(q, self.d))
    }

    /// Stable 64-bit digest of the model parameters (provenance tagging).
    pub fn digest(&self) -> u64 {
        let json = serde_json::to_string(&ModelJson::from(self)).expect("model serializes");
        fnv1a64(json.as_bytes())
    }
}

/// delta(q) = q d - (q-1)/2 with its positive and negative parts; q may be
/// any positive real (half-integer arguments appear in the rate exponents).
pub fn memory_exponent(q: f64, d: f64) -> Result<MemoryExponents> {
    if !(q > 0.0) {
        return Err(CoreError::domain(format!(
            "memory exponent defined for q > 0, got {q}"
        )));
    }
    let delta = q * d - (q - 1.0) / 2.0;
    Ok(MemoryExponents {
        delta,
        delta_plus: delta.max(0.0),
        delta_minus: (-delta).max(0.0),
    })
}

/// q < 1/(1-2d), in exact rational arithmetic when d converts exactly.
pub fn is_long_memory_check(q: u32, d: f64) -> bool {
    if let Some(dr) = rat_from_f64(d) {
        let one = rat_int(1);
        let two = rat_int(2);
        // q (1 - 2d) < 1
        return rat_int(q as i128) * (one - two * dr) < one;
    }
    (q as f64) * (1.0 - 2.0 * d) < 1.0
}

/// Exact rational d for boundary-sensitive callers, when representable.
pub fn d_as_rational(d: f64) -> Option<Rat> {
    rat_from_f64(d)
}

/// FNV-1a 64-bit hash (stable across platforms and releases).
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

// ---------------------------------------------------------------------------
// JSON interface: {"d": .., "K": .., "fstar": {"kind": .., "params": [..]}}
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct FStarJson {
    kind: String,
    params: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelJson {
    d: f64,
    #[serde(rename = "K")]
    k: u32,
    fstar: FStarJson,
}

impl From<&SpectralModel> for ModelJson {
    fn from(m: &SpectralModel) -> Self {
        let (kind, params) = match &m.fstar {
            FStar::Const { c } => ("const", vec![*c]),
            FStar::CosPoly { coeffs } => ("cospoly", coeffs.clone()),
            FStar::ArFactor { phi } => ("arfactor", vec![*phi]),
        };
        ModelJson {
            d: m.d,
            k: m.k_diff,
            fstar: FStarJson {
                kind: kind.to_string(),
                params,
            },
        }
    }
}

impl SpectralModel {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(ModelJson::from(self)).expect("model serializes")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let spec: ModelJson = serde_json::from_value(value.clone())
            .map_err(|e| CoreError::Schema(format!("model json: {e}")))?;
        let fstar = match spec.fstar.kind.as_str() {
            "const" => {
                let [c] = spec.fstar.params[..] else {
                    return Err(CoreError::Schema(
                        "const factor takes exactly one parameter".into(),
                    ));
                };
                FStar::Const { c }
            }
            "cospoly" => FStar::CosPoly {
                coeffs: spec.fstar.params.clone(),
            },
            "arfactor" => {
                let [phi] = spec.fstar.params[..] else {
                    return Err(CoreError::Schema(
                        "arfactor takes exactly one parameter".into(),
                    ));
                };
                FStar::ArFactor { phi }
            }
            other => {
                return Err(CoreError::Schema(format!(
                    "unknown short-memory factor kind {other:?}"
                )))
            }
        };
        SpectralModel::new(spec.d, fstar, spec.k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn model(d: f64) -> SpectralModel {
        SpectralModel::new(d, FStar::Const { c: 1.0 }, 0).unwrap()
    }

    #[test]
    fn endpoint_value_at_pi() {
        // |1 - e^{-i pi}| = 2, so f(pi) = normalization * 2^{-2d} * c.
        let m = model(0.4);
        let got = m.eval_f(std::f64::consts::PI).unwrap();
        let expect = m.normalization() * (2f64).powf(-0.8);
        assert_abs_diff_eq!(got, expect, epsilon = 1e-14);
    }

    #[test]
    fn short_memory_degenerate_limit() {
        // d near 0: f is essentially flat.
        let m = SpectralModel::new(1e-6, FStar::Const { c: 3.0 }, 0).unwrap();
        let f1 = m.eval_f(0.3).unwrap();
        let f2 = m.eval_f(2.9).unwrap();
        assert_abs_diff_eq!(f1 / f2, 1.0, epsilon = 1e-4);
    }

    #[test]
    fn low_frequency_power_law() {
        let m = model(0.4);
        let lambda = 1e-4;
        let ratio = m.eval_f(lambda).unwrap() * lambda.powf(0.8) / (m.normalization() * 1.0);
        assert_abs_diff_eq!(ratio, 1.0, epsilon = 1e-3);
    }

    #[test]
    fn zero_frequency_is_domain_error() {
        assert!(matches!(model(0.4).eval_f(0.0), Err(CoreError::Domain(_))));
    }

    #[test]
    fn unit_variance_normalization() {
        for m in [
            model(0.4),
            SpectralModel::new(0.3, FStar::CosPoly { coeffs: vec![1.0, 0.4, 0.1] }, 0).unwrap(),
            SpectralModel::new(0.45, FStar::ArFactor { phi: 0.5 }, 1).unwrap(),
            SpectralModel::new(0.25, FStar::ArFactor { phi: -0.6 }, 0).unwrap(),
        ] {
            // Quadrature check of integral(f) = 1 against the closed-form
            // normalization.
            let rho0 = m.autocovariance(0, 1e-10).unwrap();
            assert_abs_diff_eq!(rho0, 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn acf_cross_scheme_agreement() {
        // Two independent evaluation paths: adaptive quadrature vs the
        // Gamma-recurrence/convolution closed form.
        for m in [
            model(0.4),
            SpectralModel::new(0.3, FStar::CosPoly { coeffs: vec![1.0, -0.3] }, 0).unwrap(),
            SpectralModel::new(0.35, FStar::ArFactor { phi: 0.4 }, 0).unwrap(),
        ] {
            let batch = m.autocovariance_batch(64);
            for tau in [0i64, 1, 2, 5, 17, 64] {
                let q = m.autocovariance(tau, 1e-9).unwrap();
                assert!(
                    (q - batch[tau as usize]).abs() < 1e-6,
                    "tau={tau}: quadrature {q} vs closed form {}",
                    batch[tau as usize]
                );
            }
        }
    }

    #[test]
    fn acf_symmetry_and_unit_lag0() {
        let m = model(0.4);
        assert_abs_diff_eq!(m.autocovariance(0, 1e-9).unwrap(), 1.0, epsilon = 1e-8);
        let plus = m.autocovariance(3, 1e-9).unwrap();
        let minus = m.autocovariance(-3, 1e-9).unwrap();
        assert_abs_diff_eq!(plus, minus, epsilon = 1e-12);
    }

    #[test]
    fn acf_hyperbolic_decay_slope() {
        // |rho(tau)| ~ tau^{2d-1}: log-log slope -(1-2d) = -0.2 for d = 0.4.
        let m = model(0.4);
        let rho = m.autocovariance_batch(1 << 12);
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        let mut tau = 64usize;
        while tau <= 1 << 12 {
            xs.push((tau as f64).ln());
            ys.push(rho[tau].abs().ln());
            tau *= 2;
        }
        let fit = crate::stats::ols(&xs, &ys);
        assert!(
            (fit.slope + 0.2).abs() < 0.02,
            "ACF tail slope {} should be about -0.2",
            fit.slope
        );
        // And the plateau rho(tau) tau^{1-2d} is positive and stable.
        let c1 = rho[1 << 10] * ((1u64 << 10) as f64).powf(0.2);
        let c2 = rho[1 << 12] * ((1u64 << 12) as f64).powf(0.2);
        assert!(c1 > 0.0 && (c1 / c2 - 1.0).abs() < 0.05);
    }

    #[test]
    fn memory_exponent_examples() {
        let m = model(0.4);
        let e = m.memory_exponent(1.0).unwrap();
        assert_eq!(e.delta, 0.4);
        let e = m.memory_exponent(2.0).unwrap();
        assert_abs_diff_eq!(e.delta, 0.3, epsilon = 1e-15);
        let e3 = memory_exponent(3.0, 0.3).unwrap();
        assert_abs_diff_eq!(e3.delta, -0.1, epsilon = 1e-15);
        assert_eq!(e3.delta_plus, 0.0);
        assert_abs_diff_eq!(e3.delta_minus, 0.1, epsilon = 1e-15);
        assert!(m.memory_exponent(0.0).is_err());
        assert!(m.memory_exponent(-2.0).is_err());
    }

    #[test]
    fn half_integer_identity() {
        // 2 delta((q+1)/2) = delta(q) + d.
        for d in [0.1, 0.26, 1.0 / 3.0, 0.4, 0.49] {
            for q in 1..=12 {
                let q = q as f64;
                let lhs = 2.0 * memory_exponent((q + 1.0) / 2.0, d).unwrap().delta;
                let rhs = memory_exponent(q, d).unwrap().delta + d;
                assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn long_memory_criterion() {
        let m = model(0.3);
        assert!(m.is_long_memory(2).unwrap());
        assert!(!m.is_long_memory(3).unwrap()); // 1/(1-2d) = 2.5
        assert!(SpectralModel::new(0.26, FStar::Const { c: 1.0 }, 0)
            .unwrap()
            .is_long_memory(2)
            .unwrap());
        for d in [0.05, 0.2, 0.4, 0.49] {
            assert!(model(d).is_long_memory(1).unwrap());
        }
        // Boundary is strict: d = 0.25 puts q = 2 exactly at 1/(1-2d) = 2.
        assert!(!model(0.25).is_long_memory(2).unwrap());
        assert!(m.is_long_memory(0).is_err());
    }

    #[test]
    fn json_round_trip() {
        let m = SpectralModel::new(0.42, FStar::ArFactor { phi: 0.3 }, 2).unwrap();
        let v = m.to_json();
        assert_eq!(v["fstar"]["kind"], "arfactor");
        let back = SpectralModel::from_json(&v).unwrap();
        assert_eq!(back.d(), 0.42);
        assert_eq!(back.k_diff(), 2);
        assert_eq!(m.digest(), back.digest());
    }

    #[test]
    fn invalid_models_rejected() {
        assert!(SpectralModel::new(0.0, FStar::Const { c: 1.0 }, 0).is_err());
        assert!(SpectralModel::new(0.5, FStar::Const { c: 1.0 }, 0).is_err());
        assert!(SpectralModel::new(0.4, FStar::Const { c: -1.0 }, 0).is_err());
        assert!(SpectralModel::new(0.4, FStar::ArFactor { phi: 1.0 }, 0).is_err());
        // Cosine polynomial dipping below zero on the circle.
        assert!(SpectralModel::new(0.4, FStar::CosPoly { coeffs: vec![1.0, 1.5] }, 0).is_err());
    }
}
