//! Probabilists' Hermite polynomials, chaos expansion of a nonlinearity G,
//! and the combinatorial structure of the expansion (which pairs of
//! coefficients interact) that drives regime classification downstream.
//!
//! Convention: G(x) = sum_q (c_q / q!) H_q(x) with c_q = E[G(X) H_q(X)],
//! X standard normal, so E[G^2] = sum_q c_q^2 / q!.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::quad::NormalExpectation;
use crate::stats;

/// H_q(x) via the three-term recurrence H_{q+1} = x H_q - q H_{q-1}.
pub fn hermite_eval(q: u32, x: f64) -> f64 {
    let (mut h_prev, mut h) = (1.0, x);
    if q == 0 {
        return 1.0;
    }
    for k in 1..q {
        let next = x * h - k as f64 * h_prev;
        h_prev = h;
        h = next;
    }
    h
}

/// All of H_0(x) ... H_qmax(x) in one recurrence sweep.
fn hermite_all(q_max: u32, x: f64) -> Vec<f64> {
    let mut h = Vec::with_capacity(q_max as usize + 1);
    h.push(1.0);
    if q_max >= 1 {
        h.push(x);
    }
    for k in 1..q_max as usize {
        h.push(x * h[k] - k as f64 * h[k - 1]);
    }
    h
}

pub fn factorial(q: u32) -> f64 {
    (1..=q as u64).map(|k| k as f64).product()
}

/// Nonlinearity specifications the expansion quadrature understands.
#[derive(Debug, Clone, PartialEq)]
pub enum GSpec {
    /// H_q itself.
    Hermite(u32),
    /// x^p.
    Power(u32),
    /// |x| - sqrt(2/pi), centered absolute value.
    AbsCentered,
    /// sign(x).
    Sign,
    /// Finite linear combination sum_i a_i G_i.
    Combo(Vec<(f64, GSpec)>),
}

impl GSpec {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            GSpec::Hermite(q) => hermite_eval(*q, x),
            GSpec::Power(p) => x.powi(*p as i32),
            GSpec::AbsCentered => x.abs() - (2.0 / std::f64::consts::PI).sqrt(),
            GSpec::Sign => {
                if x > 0.0 {
                    1.0
                } else if x < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            GSpec::Combo(terms) => terms.iter().map(|(a, g)| a * g.eval(x)).sum(),
        }
    }

    /// Smooth specs go through Gauss-Hermite; kinked ones need the split rule.
    pub fn is_smooth(&self) -> bool {
        match self {
            GSpec::Hermite(_) | GSpec::Power(_) => true,
            GSpec::AbsCentered | GSpec::Sign => false,
            GSpec::Combo(terms) => terms.iter().all(|(_, g)| g.is_smooth()),
        }
    }

    /// Polynomial specs have exactly finite expansions (no tail).
    pub fn is_polynomial(&self) -> bool {
        self.is_smooth()
    }

    /// Parse "power:3", "hermite:2", "abs-centered", "sign", or
    /// '+'-joined combinations with optional "a*" weights, e.g.
    /// "hermite:1+0.5*hermite:4".
    pub fn parse(text: &str) -> Result<GSpec> {
        let terms: Vec<&str> = text.split('+').map(str::trim).collect();
        if terms.len() > 1 {
            let parsed = terms
                .into_iter()
                .map(Self::parse_term)
                .collect::<Result<Vec<_>>>()?;
            return Ok(GSpec::Combo(parsed));
        }
        let (a, g) = Self::parse_term(terms[0])?;
        if a == 1.0 {
            Ok(g)
        } else {
            Ok(GSpec::Combo(vec![(a, g)]))
        }
    }

    fn parse_term(term: &str) -> Result<(f64, GSpec)> {
        let (weight, body) = match term.split_once('*') {
            Some((w, b)) => (
                w.trim().parse::<f64>().map_err(|_| {
                    CoreError::invalid(format!("bad weight in G term {term:?}"))
                })?,
                b.trim(),
            ),
            None => (1.0, term),
        };
        let g = match body.split_once(':') {
            Some(("hermite", q)) => GSpec::Hermite(q.parse().map_err(|_| {
                CoreError::invalid(format!("bad Hermite order in {term:?}"))
            })?),
            Some(("power", p)) => GSpec::Power(p.parse().map_err(|_| {
                CoreError::invalid(format!("bad power in {term:?}"))
            })?),
            None if body == "abs-centered" => GSpec::AbsCentered,
            None if body == "sign" => GSpec::Sign,
            _ => {
                return Err(CoreError::invalid(format!(
                    "unknown G spec {term:?} (expected hermite:q, power:p, \
                     abs-centered, sign, or a '+' combination)"
                )))
            }
        };
        Ok((weight, g))
    }
}

impl std::fmt::Display for GSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GSpec::Hermite(q) => write!(f, "hermite:{q}"),
            GSpec::Power(p) => write!(f, "power:{p}"),
            GSpec::AbsCentered => write!(f, "abs-centered"),
            GSpec::Sign => write!(f, "sign"),
            GSpec::Combo(terms) => {
                for (i, (a, g)) in terms.iter().enumerate() {
                    if i > 0 {
                        write!(f, "+")?;
                    }
                    if *a != 1.0 {
                        write!(f, "{a}*")?;
                    }
                    write!(f, "{g}")?;
                }
                Ok(())
            }
        }
    }
}

/// Sparse Hermite expansion: ordered (q, c_q) with nonzero c and q >= 1.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteExpansion {
    entries: Vec<(u32, f64)>,
    q_max: u32,
    tail_energy: f64,
    known_finite: bool,
}

/// Index combinatorics of an expansion. Sets are stored over positional
/// indices ell (the definitions); rendering reports q-values (the usual
/// display convention). See the q_* accessors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpansionStructure {
    q_seq: Vec<u32>,
    i_idx: Vec<usize>,
    j_idx: Vec<(usize, usize)>,
    ell0: Option<usize>,
    m0: Option<usize>,
    q0_star: u32,
}

/// Coefficient-decay diagnostic: fitted lambda in |c_q| ~ (q!)^d e^{-lambda q}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayReport {
    pub lambda: f64,
    pub satisfied: bool,
}

impl HermiteExpansion {
    /// Build from an explicit coefficient list (no quadrature).
    pub fn from_entries(entries: Vec<(u32, f64)>, q_max: u32) -> Result<Self> {
        if entries.is_empty() {
            return Err(CoreError::invalid("expansion needs at least one term"));
        }
        for w in entries.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(CoreError::invalid(
                    "expansion q values must be strictly increasing",
                ));
            }
        }
        for &(q, c) in &entries {
            if q == 0 {
                return Err(CoreError::invalid(
                    "q = 0 term excluded: G must be centered, so c_0 = E[G] = 0",
                ));
            }
            if !(c.is_finite() && c != 0.0) {
                return Err(CoreError::invalid(format!(
                    "coefficient at q = {q} must be finite and nonzero, got {c}"
                )));
            }
        }
        let top = entries.last().unwrap().0;
        Ok(HermiteExpansion {
            entries,
            q_max: q_max.max(top),
            tail_energy: 0.0,
            known_finite: false,
        })
    }

    /// Expand a function spec by quadrature: c_q = E[G(X) H_q(X)].
    pub fn expand(g: &GSpec, q_max: u32, nodes: usize) -> Result<Self> {
        if q_max == 0 || q_max > 150 {
            return Err(CoreError::invalid(format!(
                "truncation order must be in 1..=150, got {q_max}"
            )));
        }
        if nodes < 4 * q_max as usize {
            return Err(CoreError::invalid(format!(
                "need at least 4*q_max = {} quadrature nodes, got {nodes}",
                4 * q_max
            )));
        }
        let (c, mean, second) = if g.is_smooth() {
            gauss_hermite_moments(g, q_max, nodes)
        } else {
            // Kinked integrands: piecewise rule split at the kink, with a
            // doubled-node agreement gate.
            let coarse = split_moments(g, q_max, 48);
            let fine = split_moments(g, q_max, 96);
            let worst = coarse
                .0
                .iter()
                .zip(&fine.0)
                .map(|(a, b)| (a - b).abs())
                .fold((coarse.1 - fine.1).abs().max((coarse.2 - fine.2).abs()), f64::max);
            if worst > 1e-7 {
                return Err(CoreError::numeric(
                    "non-smooth expansion quadrature (node-doubling check)",
                    worst,
                    1e-7,
                ));
            }
            fine
        };
        if !second.is_finite() {
            return Err(CoreError::invalid("E[G^2] is not finite"));
        }
        if mean.abs() > 1e-8 {
            return Err(CoreError::invalid(format!(
                "G must be centered: E[G] = {mean:.3e} exceeds 1e-8"
            )));
        }
        let norm2 = second.max(0.0).sqrt().max(1.0);
        let mut entries = Vec::new();
        let mut energy = 0.0;
        for (qi, cq) in c.iter().enumerate().skip(1) {
            if cq.abs() >= 1e-10 * norm2 {
                entries.push((qi as u32, *cq));
                energy += cq * cq / factorial(qi as u32);
            }
        }
        if entries.is_empty() {
            return Err(CoreError::invalid(
                "all expansion coefficients vanish below the drop threshold",
            ));
        }
        let tail_energy = (second - energy).max(0.0);
        Ok(HermiteExpansion {
            entries,
            q_max,
            tail_energy,
            known_finite: g.is_polynomial(),
        })
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    /// Hermite rank q_0: smallest q with nonzero coefficient.
    pub fn q0(&self) -> u32 {
        self.entries[0].0
    }

    pub fn q_max(&self) -> u32 {
        self.q_max
    }

    pub fn tail_energy(&self) -> f64 {
        self.tail_energy
    }

    pub fn coeff(&self, q: u32) -> Option<f64> {
        self.entries
            .iter()
            .find(|(qq, _)| *qq == q)
            .map(|(_, c)| *c)
    }

    /// E[G^2] restricted to stored terms: sum c_q^2 / q!.
    pub fn energy(&self) -> f64 {
        self.entries
            .iter()
            .map(|&(q, c)| c * c / factorial(q))
            .sum()
    }

    /// Cov(G(X), G(Y)) for correlation rho: sum_q c_q^2 / q! rho^q.
    pub fn mehler_cov(&self, rho: f64) -> f64 {
        self.entries
            .iter()
            .map(|&(q, c)| c * c / factorial(q) * rho.powi(q as i32))
            .sum()
    }

    /// Pointwise G(x_t) = sum (c_q / q!) H_q(x_t), one recurrence per point.
    pub fn apply(&self, x_path: &[f64]) -> Vec<f64> {
        let top = self.entries.last().unwrap().0;
        let weights: Vec<(u32, f64)> = self
            .entries
            .iter()
            .map(|&(q, c)| (q, c / factorial(q)))
            .collect();
        x_path
            .iter()
            .map(|&x| {
                let h = hermite_all(top, x);
                weights.iter().map(|&(q, w)| w * h[q as usize]).sum()
            })
            .collect()
    }

    /// The index combinatorics driving regime selection.
    pub fn structure(&self) -> ExpansionStructure {
        let q_seq: Vec<u32> = self.entries.iter().map(|&(q, _)| q).collect();
        structure_of(&q_seq)
    }

    /// Fit lambda in the coefficient-decay model |c_q| ~ (q!)^d e^{-lambda q}.
    ///
    /// Expansions known to be exactly finite (polynomial G) satisfy any tail
    /// bound trivially; otherwise the sign of the fitted lambda decides.
    pub fn decay_check(&self, d: f64) -> DecayReport {
        if self.entries.len() < 3 || self.known_finite {
            return DecayReport {
                lambda: f64::INFINITY,
                satisfied: true,
            };
        }
        let xs: Vec<f64> = self.entries.iter().map(|&(q, _)| q as f64).collect();
        let ys: Vec<f64> = self
            .entries
            .iter()
            .map(|&(q, c)| c.abs().ln() - d * factorial(q).ln())
            .collect();
        let fit = stats::ols(&xs, &ys);
        let lambda = -fit.slope;
        DecayReport {
            lambda,
            satisfied: lambda > 0.0,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(ExpansionJson {
            coeffs: self
                .entries
                .iter()
                .map(|&(q, c)| (q, c))
                .collect(),
            qmax: self.q_max,
        })
        .expect("expansion serializes")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let spec: ExpansionJson = serde_json::from_value(value.clone())
            .map_err(|e| CoreError::Schema(format!("expansion json: {e}")))?;
        Self::from_entries(spec.coeffs, spec.qmax)
    }

    /// Parse the "1:3,3:6" CLI shorthand.
    pub fn parse_shorthand(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for part in text.split(',') {
            let (q, c) = part.trim().split_once(':').ok_or_else(|| {
                CoreError::invalid(format!("bad coefficient term {part:?}, expected q:c"))
            })?;
            let q: u32 = q
                .trim()
                .parse()
                .map_err(|_| CoreError::invalid(format!("bad q in {part:?}")))?;
            let c: f64 = c
                .trim()
                .parse()
                .map_err(|_| CoreError::invalid(format!("bad coefficient in {part:?}")))?;
            entries.push((q, c));
        }
        entries.sort_by_key(|&(q, _)| q);
        let top = entries.last().map(|&(q, _)| q).unwrap_or(0);
        Self::from_entries(entries, top)
    }
}

#[derive(Serialize, Deserialize)]
struct ExpansionJson {
    coeffs: Vec<(u32, f64)>,
    qmax: u32,
}

/// Structure sets from a strictly increasing q sequence.
pub fn structure_of(q_seq: &[u32]) -> ExpansionStructure {
    let n = q_seq.len();
    let i_idx: Vec<usize> = (0..n.saturating_sub(1))
        .filter(|&l| q_seq[l + 1] - q_seq[l] == 1)
        .collect();
    let mut j_idx = Vec::new();
    for l1 in 0..n {
        for l2 in l1 + 1..n {
            if q_seq[l1] != 1 && q_seq[l2] - q_seq[l1] >= 2 {
                j_idx.push((l1, l2));
            }
        }
    }
    let ell0 = i_idx.first().copied();
    let m0 = q_seq.iter().position(|&q| q >= 3);
    let q0_star = if q_seq[0] == 1 {
        q_seq.get(1).copied().unwrap_or(1)
    } else {
        q_seq[0]
    };
    ExpansionStructure {
        q_seq: q_seq.to_vec(),
        i_idx,
        j_idx,
        ell0,
        m0,
        q0_star,
    }
}

impl ExpansionStructure {
    pub fn len(&self) -> usize {
        self.q_seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q_seq.is_empty()
    }

    pub fn q_seq(&self) -> &[u32] {
        &self.q_seq
    }

    pub fn q_at(&self, ell: usize) -> u32 {
        self.q_seq[ell]
    }

    pub fn i_indices(&self) -> &[usize] {
        &self.i_idx
    }

    pub fn j_indices(&self) -> &[(usize, usize)] {
        &self.j_idx
    }

    pub fn ell0_index(&self) -> Option<usize> {
        self.ell0
    }

    pub fn m0_index(&self) -> Option<usize> {
        self.m0
    }

    /// q-value renderings (display convention).
    pub fn i_q_values(&self) -> Vec<u32> {
        self.i_idx.iter().map(|&l| self.q_seq[l]).collect()
    }

    pub fn j_q_pairs(&self) -> Vec<(u32, u32)> {
        self.j_idx
            .iter()
            .map(|&(a, b)| (self.q_seq[a], self.q_seq[b]))
            .collect()
    }

    pub fn q_ell0(&self) -> Option<u32> {
        self.ell0.map(|l| self.q_seq[l])
    }

    pub fn q_m0(&self) -> Option<u32> {
        self.m0.map(|l| self.q_seq[l])
    }

    pub fn q0(&self) -> u32 {
        self.q_seq[0]
    }

    pub fn q0_star(&self) -> u32 {
        self.q0_star
    }

    /// Second-smallest q, when present.
    pub fn q1(&self) -> Option<u32> {
        self.q_seq.get(1).copied()
    }
}

impl std::fmt::Display for ExpansionStructure {
    /// q-value rendering: "I={1}, ell0=1, m0=4, J={(2,4)}".
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let iq: Vec<String> = self.i_q_values().iter().map(u32::to_string).collect();
        write!(f, "I={{{}}}, ", iq.join(","))?;
        match self.q_ell0() {
            Some(q) => write!(f, "ell0={q}, ")?,
            None => write!(f, "ell0=inf, ")?,
        }
        match self.q_m0() {
            Some(q) => write!(f, "m0={q}, ")?,
            None => write!(f, "m0=-, ")?,
        }
        let jq: Vec<String> = self
            .j_q_pairs()
            .iter()
            .map(|(a, b)| format!("({a},{b})"))
            .collect();
        write!(f, "J={{{}}}", jq.join(","))
    }
}

/// Gauss-Hermite path (weight adapted to the standard normal): one sweep
/// accumulates every c_q plus E[G] and E[G^2].
fn gauss_hermite_moments(g: &GSpec, q_max: u32, nodes: usize) -> (Vec<f64>, f64, f64) {
    let rule = NormalExpectation::new(nodes);
    let mut c = vec![0.0; q_max as usize + 1];
    let (mut mean, mut second) = (0.0, 0.0);
    for (&x, &w) in rule.nodes().iter().zip(rule.weights()) {
        let gx = g.eval(x);
        let h = hermite_all(q_max, x);
        mean += w * gx;
        second += w * gx * gx;
        for (ci, hi) in c.iter_mut().zip(&h) {
            *ci += w * gx * hi;
        }
    }
    (c, mean, second)
}

/// Piecewise Gauss-Legendre with the normal density folded in, split at the
/// kink at zero; panel edges tighten near 0 and truncate at |x| = 12 where
/// the Gaussian weight is ~1e-32.
fn split_moments(g: &GSpec, q_max: u32, nodes_per_panel: usize) -> (Vec<f64>, f64, f64) {
    let rule = crate::quad::legendre(nodes_per_panel);
    let edges = [0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0, 12.0];
    let phi = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut c = vec![0.0; q_max as usize + 1];
    let (mut mean, mut second) = (0.0, 0.0);
    for sign in [-1.0, 1.0] {
        for w in edges.windows(2) {
            let (a, b) = (sign * w[0], sign * w[1]);
            for &(t, wt) in rule.as_node_weight_pairs() {
                // map [-1, 1] -> panel
                let x = 0.5 * (a + b) + 0.5 * (b - a) * t;
                let wx = wt * 0.5 * (b - a).abs() * phi(x);
                let gx = g.eval(x);
                let h = hermite_all(q_max, x);
                mean += wx * gx;
                second += wx * gx * gx;
                for (ci, hi) in c.iter_mut().zip(&h) {
                    *ci += wx * gx * hi;
                }
            }
        }
    }
    (c, mean, second)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    #[test]
    fn polynomial_values() {
        for x in [-2.0, 0.0, 3.0] {
            assert_eq!(hermite_eval(2, x), x * x - 1.0);
            assert_eq!(hermite_eval(0, x), 1.0);
        }
        assert_eq!(hermite_eval(3, 2.0), 2.0); // x^3 - 3x at 2
        assert_eq!(hermite_eval(1, -1.5), -1.5);
    }

    #[test]
    fn orthogonality_against_quadrature() {
        // E[H_q H_q'] = q! 1{q = q'}.
        let rule = NormalExpectation::new(64);
        for q in 0..=10u32 {
            for qp in 0..=10u32 {
                let val = rule.expect(|x| hermite_eval(q, x) * hermite_eval(qp, x));
                let want = if q == qp { factorial(q) } else { 0.0 };
                assert!(
                    (val - want).abs() < 1e-8,
                    "E[H_{q} H_{qp}] = {val}, want {want}"
                );
            }
        }
    }

    #[test]
    fn expand_cubic() {
        // Moment oracle: c_1 = E[X^4] = 3, c_3 = E[X^6] - 3 E[X^4] = 6.
        let e = HermiteExpansion::expand(&GSpec::Power(3), 6, 64).unwrap();
        assert_eq!(e.entries().len(), 2);
        assert_abs_diff_eq!(e.coeff(1).unwrap(), 3.0, epsilon = 1e-8);
        assert_abs_diff_eq!(e.coeff(3).unwrap(), 6.0, epsilon = 1e-8);
        assert_eq!(e.q0(), 1);
        assert!(e.tail_energy() < 1e-8);
    }

    #[test]
    fn expand_rejects_uncentered() {
        let err = HermiteExpansion::expand(&GSpec::Power(2), 6, 64).unwrap_err();
        assert!(matches!(err, CoreError::InvalidInput(_)), "{err}");
    }

    #[test]
    fn expand_pure_hermite_and_identity() {
        let e = HermiteExpansion::expand(&GSpec::Hermite(2), 6, 64).unwrap();
        assert_eq!(e.entries().len(), 1);
        assert_abs_diff_eq!(e.coeff(2).unwrap(), 2.0, epsilon = 1e-8);

        let e = HermiteExpansion::expand(&GSpec::Power(1), 4, 64).unwrap();
        assert_eq!(e.entries().len(), 1);
        assert_abs_diff_eq!(e.coeff(1).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn expand_sign_matches_parts_oracle() {
        // Integration by parts: int_0^inf H_q phi = H_{q-1}(0) phi(0), so
        // c_q = sqrt(2/pi) H_{q-1}(0) for odd q (even q vanish by symmetry).
        let s = (2.0 / std::f64::consts::PI).sqrt();
        let e = HermiteExpansion::expand(&GSpec::Sign, 9, 64).unwrap();
        for (q, want) in [(1u32, s), (3, -s), (5, 3.0 * s), (7, -15.0 * s)] {
            assert_abs_diff_eq!(e.coeff(q).unwrap(), want, epsilon = 1e-7);
        }
        assert!(e.coeff(2).is_none() && e.coeff(4).is_none());
        // E[G^2] = 1; the stored terms leave a genuine tail.
        assert!(e.tail_energy() > 1e-4);
        let deeper = HermiteExpansion::expand(&GSpec::Sign, 15, 64).unwrap();
        assert!(deeper.tail_energy() < e.tail_energy());
    }

    #[test]
    fn expand_abs_centered_matches_parts_oracle() {
        // x H_q = H_{q+1} + q H_{q-1} gives
        // c_q = sqrt(2/pi) (H_q(0) + q H_{q-2}(0)) for even q >= 2.
        let s = (2.0 / std::f64::consts::PI).sqrt();
        let e = HermiteExpansion::expand(&GSpec::AbsCentered, 8, 64).unwrap();
        for (q, want) in [(2u32, s), (4, -s), (6, 3.0 * s)] {
            assert_abs_diff_eq!(e.coeff(q).unwrap(), want, epsilon = 1e-7);
        }
        assert!(e.coeff(1).is_none() && e.coeff(3).is_none());
        assert_eq!(e.q0(), 2);
    }

    #[test]
    fn apply_examples() {
        let e = HermiteExpansion::from_entries(vec![(1, 1.0)], 1).unwrap();
        assert_eq!(e.apply(&[0.5, -1.0]), vec![0.5, -1.0]);

        let e = HermiteExpansion::from_entries(vec![(2, 2.0)], 2).unwrap();
        assert_abs_diff_eq!(e.apply(&[2.0])[0], 3.0, epsilon = 1e-12);

        let e = HermiteExpansion::from_entries(vec![(1, 3.0), (3, 6.0)], 3).unwrap();
        assert_abs_diff_eq!(e.apply(&[2.0])[0], 8.0, epsilon = 1e-12);
    }

    #[test]
    fn round_trip_through_apply() {
        // 3 H_1 + H_3 is x^3; re-expanding recovers the coefficients.
        let combo = GSpec::Combo(vec![(3.0, GSpec::Hermite(1)), (1.0, GSpec::Hermite(3))]);
        let e = HermiteExpansion::expand(&combo, 6, 64).unwrap();
        assert_abs_diff_eq!(e.coeff(1).unwrap(), 3.0, epsilon = 1e-8);
        assert_abs_diff_eq!(e.coeff(3).unwrap(), 6.0, epsilon = 1e-8);
    }

    #[test]
    fn mehler_covariance_against_simulation() {
        // Jointly Gaussian pair with correlation rho; empirical covariance of
        // G(X), G(Y) vs sum c_q^2/q! rho^q within 4 SEs.
        let e = HermiteExpansion::expand(&GSpec::Power(3), 6, 64).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let n = 1_000_000usize;
        for rho in [0.2f64, 0.8] {
            let mut prods = Vec::with_capacity(n);
            for _ in 0..n {
                let x: f64 = rng.sample(rand_distr::StandardNormal);
                let z: f64 = rng.sample(rand_distr::StandardNormal);
                let y = rho * x + (1.0 - rho * rho).sqrt() * z;
                let gx = x.powi(3);
                let gy = y.powi(3);
                prods.push(gx * gy);
            }
            let want = e.mehler_cov(rho);
            let got = crate::stats::mean(&prods);
            let se = (crate::stats::variance(&prods) / n as f64).sqrt();
            assert!(
                (got - want).abs() < 4.0 * se,
                "rho={rho}: empirical {got} vs Mehler {want} (se {se})"
            );
        }
    }

    #[test]
    fn structure_first_example_family() {
        // q in {1,2,4}: indices I={0}, ell0=0, m0=2, J={(1,2)};
        // q-values I={1}, ell0=1, m0=4, J={(2,4)}.
        let s = structure_of(&[1, 2, 4]);
        assert_eq!(s.i_indices(), &[0]);
        assert_eq!(s.ell0_index(), Some(0));
        assert_eq!(s.m0_index(), Some(2));
        assert_eq!(s.j_indices(), &[(1, 2)]);
        assert_eq!(s.i_q_values(), vec![1]);
        assert_eq!(s.q_ell0(), Some(1));
        assert_eq!(s.q_m0(), Some(4));
        assert_eq!(s.j_q_pairs(), vec![(2, 4)]);
        assert_eq!(s.to_string(), "I={1}, ell0=1, m0=4, J={(2,4)}");
        assert_eq!(s.q0_star(), 2); // q0 = 1, so next q
    }

    #[test]
    fn structure_second_example_family() {
        let s = structure_of(&[2, 3, 4]);
        assert_eq!(s.i_q_values(), vec![2, 3]);
        assert_eq!(s.q_ell0(), Some(2));
        assert_eq!(s.q_m0(), Some(3));
        assert_eq!(s.j_q_pairs(), vec![(2, 4)]);
        assert_eq!(s.q0_star(), 2);
    }

    #[test]
    fn structure_single_term_families() {
        let s = structure_of(&[1]);
        assert!(s.i_indices().is_empty() && s.j_indices().is_empty());
        assert_eq!(s.ell0_index(), None);
        assert_eq!(s.q_m0(), None);

        let s = structure_of(&[5]);
        assert!(s.i_indices().is_empty() && s.j_indices().is_empty());
        assert_eq!(s.q_m0(), Some(5));
        assert_eq!(s.q0_star(), 5);
    }

    #[test]
    fn structure_consecutive_and_separated() {
        // {q0, q0+1}: I={q0}, J empty.
        let s = structure_of(&[2, 3]);
        assert_eq!(s.i_q_values(), vec![2]);
        assert!(s.j_q_pairs().is_empty());
        // {q0, q0+1, q1} with a gap >= 2: J = {(q0,q1), (q0+1,q1)}.
        let s = structure_of(&[2, 3, 5]);
        assert_eq!(s.i_q_values(), vec![2]);
        assert_eq!(s.j_q_pairs(), vec![(2, 5), (3, 5)]);
    }

    #[test]
    fn structure_brute_force_agreement() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let len = rng.gen_range(1..=6);
            let mut qs: Vec<u32> = Vec::new();
            let mut next = 1u32;
            for _ in 0..len {
                next += rng.gen_range(0..4);
                qs.push(next);
                next += 1;
            }
            let s = structure_of(&qs);
            // Direct set comprehension.
            let i_ref: Vec<usize> = (0..qs.len())
                .filter(|&l| l + 1 < qs.len() && qs[l + 1] == qs[l] + 1)
                .collect();
            let mut j_ref = Vec::new();
            for a in 0..qs.len() {
                for b in 0..qs.len() {
                    if a < b && qs[a] != 1 && qs[b] >= qs[a] + 2 {
                        j_ref.push((a, b));
                    }
                }
            }
            assert_eq!(s.i_indices(), &i_ref[..], "I for {qs:?}");
            assert_eq!(s.j_indices(), &j_ref[..], "J for {qs:?}");
            assert_eq!(s.ell0_index(), i_ref.first().copied());
            assert_eq!(s.m0_index(), qs.iter().position(|&q| q >= 3));
        }
    }

    #[test]
    fn decay_reports() {
        // Two-entry and polynomial-built expansions: trivially satisfied.
        let e = HermiteExpansion::expand(&GSpec::Power(3), 6, 64).unwrap();
        let r = e.decay_check(0.4);
        assert!(r.satisfied && r.lambda.is_infinite());

        // Synthetic c_q = (q!)^d e^{-2q}: fitted lambda near 2.
        let d = 0.4;
        let entries: Vec<(u32, f64)> = (1..=8)
            .map(|q| (q, factorial(q).powf(d) * (-2.0 * q as f64).exp()))
            .collect();
        let e = HermiteExpansion::from_entries(entries, 8).unwrap();
        let r = e.decay_check(d);
        assert!((r.lambda - 2.0).abs() < 0.01, "lambda = {}", r.lambda);
        assert!(r.satisfied);

        // Synthetic c_q = (q!)^{0.49} against d = 0.4: growth, not decay.
        let entries: Vec<(u32, f64)> = (1..=8)
            .map(|q| (q, factorial(q).powf(0.49)))
            .collect();
        let e = HermiteExpansion::from_entries(entries, 8).unwrap();
        let r = e.decay_check(0.4);
        assert!(!r.satisfied && r.lambda < 0.0);
    }

    #[test]
    fn json_and_shorthand() {
        let e = HermiteExpansion::from_entries(vec![(1, 3.0), (3, 6.0)], 6).unwrap();
        let v = e.to_json();
        assert_eq!(v["coeffs"][0][0], 1);
        let back = HermiteExpansion::from_json(&v).unwrap();
        assert_eq!(back.entries(), e.entries());

        let sh = HermiteExpansion::parse_shorthand("1:3,3:6").unwrap();
        assert_eq!(sh.entries(), e.entries());
        assert!(HermiteExpansion::parse_shorthand("0:1").is_err());
        assert!(HermiteExpansion::parse_shorthand("2:0").is_err());
    }

    #[test]
    fn gspec_parsing() {
        assert_eq!(GSpec::parse("power:3").unwrap(), GSpec::Power(3));
        assert_eq!(GSpec::parse("hermite:2").unwrap(), GSpec::Hermite(2));
        assert_eq!(GSpec::parse("sign").unwrap(), GSpec::Sign);
        assert_eq!(GSpec::parse("abs-centered").unwrap(), GSpec::AbsCentered);
        let combo = GSpec::parse("hermite:1+0.5*hermite:4").unwrap();
        assert_eq!(
            combo,
            GSpec::Combo(vec![(1.0, GSpec::Hermite(1)), (0.5, GSpec::Hermite(4))])
        );
        assert!(GSpec::parse("fourier:2").is_err());
    }

    #[test]
    fn energy_identity() {
        // E[G^2] = sum c_q^2/q! for polynomial G: x^3 gives 9 + 36/6 = 15
        // = E[X^6].
        let e = HermiteExpansion::expand(&GSpec::Power(3), 6, 64).unwrap();
        assert_abs_diff_eq!(e.energy(), 15.0, epsilon = 1e-8);
    }
}
