//! Quadrature helpers shared by the spectral, Hermite, and limit-constant
//! modules: Gaussian expectation rules, panel-composite Gauss-Legendre, and
//! a bisection-adaptive scheme with error control.

use std::num::NonZeroUsize;

use gauss_quad::{GaussHermite, GaussLegendre};

use crate::error::{CoreError, Result};

/// Nodes/weights for E[g(X)] with X standard normal, i.e. integration against
/// the weight exp(-x^2/2)/sqrt(2 pi).
///
/// Built from the physicists' Gauss-Hermite rule by the substitution
/// x -> sqrt(2) x, which maps the weight exp(-x^2) sqrt(pi) onto the standard
/// normal density with total mass one.
#[derive(Debug, Clone)]
pub struct NormalExpectation {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl NormalExpectation {
    pub fn new(n: usize) -> Self {
        let n = n.max(1);
        let rule = GaussHermite::new(NonZeroUsize::new(n).unwrap());
        // The library nodes carry the eigensolver's ~1e-13 error, which the
        // high-order moment identities downstream can feel. Newton-polish
        // each node as a zero of the orthonormal polynomial p_n (derivative
        // sqrt(n) p_{n-1}) and take weights from the Christoffel function
        // 1 / sum_{k<n} p_k^2; both are stable in the orthonormal basis.
        let mut nodes: Vec<f64> = rule
            .as_node_weight_pairs()
            .iter()
            .map(|&(x, _)| std::f64::consts::SQRT_2 * x)
            .collect();
        let mut weights = Vec::with_capacity(n);
        for x in nodes.iter_mut() {
            for _ in 0..3 {
                let (pn, pn1) = orthonormal_pair(n, *x);
                let step = pn / ((n as f64).sqrt() * pn1);
                if step.is_finite() {
                    *x -= step;
                }
            }
            weights.push(christoffel_weight(n, *x));
        }
        NormalExpectation { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// E[g(X)] for X ~ N(0,1), with compensated summation so that moment
    /// identities hold near round-off even when g takes large values.
    pub fn expect(&self, mut g: impl FnMut(f64) -> f64) -> f64 {
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            let term = w * g(x) - comp;
            let next = sum + term;
            comp = (next - sum) - term;
            sum = next;
        }
        sum
    }
}

/// (p_n(x), p_{n-1}(x)) for the orthonormal probabilists' Hermite family:
/// p_{k+1} = (x p_k - sqrt(k) p_{k-1}) / sqrt(k+1).
fn orthonormal_pair(n: usize, x: f64) -> (f64, f64) {
    let (mut prev, mut cur) = (0.0f64, 1.0f64);
    for k in 0..n {
        let next = (x * cur - (k as f64).sqrt() * prev) / ((k + 1) as f64).sqrt();
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

fn christoffel_weight(n: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (0.0f64, 1.0f64);
    let mut sum_sq = 1.0f64;
    for k in 0..n - 1 {
        let next = (x * cur - (k as f64).sqrt() * prev) / ((k + 1) as f64).sqrt();
        prev = cur;
        cur = next;
        sum_sq += cur * cur;
    }
    sum_sq.recip()
}

/// Composite Gauss-Legendre integration over explicit panel edges.
pub fn integrate_panels(
    rule: &GaussLegendre,
    edges: &[f64],
    mut f: impl FnMut(f64) -> f64,
) -> f64 {
    edges
        .windows(2)
        .map(|w| rule.integrate(w[0], w[1], &mut f))
        .sum()
}

/// Geometrically refined panel edges from `a` toward the left endpoint
/// `at`, useful for integrable endpoint singularities: panels
/// [at + (a-at) 2^-k, ...] down to a floor width.
pub fn dyadic_edges_toward(at: f64, a: f64, levels: usize) -> Vec<f64> {
    let mut edges = Vec::with_capacity(levels + 2);
    edges.push(at);
    for k in (0..=levels).rev() {
        edges.push(at + (a - at) * (2f64).powi(-(k as i32)));
    }
    edges
}

/// Adaptive bisection quadrature: a panel is accepted when a 15-node and a
/// 31-node rule agree within the local tolerance share. Returns the value and
/// an error estimate; errors out if the requested tolerance is unreachable
/// within the depth budget.
pub fn adaptive(
    f: &mut impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    max_depth: u32,
) -> Result<(f64, f64)> {
    let lo = GaussLegendre::new(NonZeroUsize::new(15).unwrap());
    let hi = GaussLegendre::new(NonZeroUsize::new(31).unwrap());
    let total_span = (b - a).abs().max(f64::MIN_POSITIVE);
    let mut value = 0.0;
    let mut err = 0.0;
    // Explicit stack of (a, b, depth); tolerance is shared out by panel width.
    let mut stack = vec![(a, b, 0u32)];
    while let Some((pa, pb, depth)) = stack.pop() {
        let coarse = lo.integrate(pa, pb, &mut *f);
        let fine = hi.integrate(pa, pb, &mut *f);
        let local_err = (fine - coarse).abs();
        let local_tol = tol * (pb - pa).abs() / total_span;
        if local_err <= local_tol || depth >= max_depth {
            if depth >= max_depth && local_err > local_tol.max(tol) {
                return Err(CoreError::numeric(
                    "adaptive quadrature panel refinement",
                    local_err,
                    tol,
                ));
            }
            value += fine;
            err += local_err;
        } else {
            let mid = 0.5 * (pa + pb);
            stack.push((pa, mid, depth + 1));
            stack.push((mid, pb, depth + 1));
        }
    }
    Ok((value, err))
}

/// Fixed-degree Gauss-Legendre rule (thin constructor wrapper).
pub fn legendre(n: usize) -> GaussLegendre {
    GaussLegendre::new(NonZeroUsize::new(n.max(1)).unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn normal_moments() {
        let rule = NormalExpectation::new(32);
        assert_abs_diff_eq!(rule.expect(|_| 1.0), 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(rule.expect(|x| x * x), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rule.expect(|x| x.powi(4)), 3.0, epsilon = 1e-11);
        assert_abs_diff_eq!(rule.expect(|x| x.powi(6)), 15.0, epsilon = 1e-10);
        assert_abs_diff_eq!(rule.expect(|x| x.powi(3)), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn panels_integrate_cosine() {
        let rule = legendre(16);
        let edges = [0.0, 0.5, 1.0, 2.0, std::f64::consts::PI];
        let got = integrate_panels(&rule, &edges, |x| x.cos());
        assert_abs_diff_eq!(got, std::f64::consts::PI.sin(), epsilon = 1e-12);
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        // Integral of 1/sqrt(x) on (0,1] = 2; integrable singularity at 0.
        let (v, _) = adaptive(&mut |x: f64| x.abs().sqrt().recip(), 1e-12, 1.0, 1e-8, 48).unwrap();
        assert_abs_diff_eq!(v, 2.0, epsilon = 1e-5);
    }

    #[test]
    fn dyadic_edges_shape() {
        let e = dyadic_edges_toward(0.0, 1.0, 3);
        assert_eq!(e, vec![0.0, 0.125, 0.25, 0.5, 1.0]);
    }
}
