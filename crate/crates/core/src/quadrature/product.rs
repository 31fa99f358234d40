use crate::error::{Error, Result};

use super::gauss::legendre;
use super::mesh::GradedMesh;
use super::tanh_sinh::TanhSinh;

/// Weight `x^{−β}` or `x^{−β} ln x` on (0, ∞).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularWeight {
    pub beta: f64,
    pub log: bool,
}

impl SingularWeight {
    pub fn new(beta: f64, log: bool) -> Result<Self> {
        if !(0.0..1.0).contains(&beta) {
            return Err(Error::param(format!("weight exponent beta must lie in [0, 1), got {beta}")));
        }
        Ok(Self { beta, log })
    }

    pub fn power(beta: f64) -> Result<Self> {
        Self::new(beta, false)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let p = if self.beta == 0.0 { 1.0 } else { x.powf(-self.beta) };
        if self.log {
            p * x.ln()
        } else {
            p
        }
    }

    /// Antiderivative of `x^{k−β}` (times ln x) that vanishes at 0.
    fn primitive(&self, k: u32, x: f64) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        let q = k as f64 + 1.0 - self.beta;
        let xq = x.powf(q);
        if self.log {
            xq * (x.ln() / q - 1.0 / (q * q))
        } else {
            xq / q
        }
    }

    /// `(∫_a^b ω, ∫_a^b x ω)` for `0 ≤ a < b`.
    pub fn moments(&self, a: f64, b: f64) -> (f64, f64) {
        let h = b - a;
        if a <= 4.0 * h {
            (self.primitive(0, b) - self.primitive(0, a), self.primitive(1, b) - self.primitive(1, a))
        } else {
            let rule = legendre(8);
            rule.on_interval(a, b).fold((0.0, 0.0), |(m0, m1), (x, w)| {
                let v = w * self.eval(x);
                (m0 + v, m1 + v * x)
            })
        }
    }

    /// Weights `(w_a, w_b)` with `∫_a^b φ ω ≈ w_a φ(a) + w_b φ(b)` for linear φ.
    pub fn linear_panel(&self, a: f64, b: f64) -> (f64, f64) {
        let h = b - a;
        if a <= 4.0 * h {
            let (m0, m1) = self.moments(a, b);
            ((b * m0 - m1) / h, (m1 - a * m0) / h)
        } else {
            let rule = legendre(8);
            rule.on_interval(a, b).fold((0.0, 0.0), |(wa, wb), (x, w)| {
                let v = w * self.eval(x);
                (wa + v * (b - x) / h, wb + v * (x - a) / h)
            })
        }
    }
}

/// Row of product-integration weights for `∫_0^{t_i} g(s) (t_i − s)^{−β} [ln(t_i − s)] ds`,
/// with `g` interpolated linearly between mesh nodes. Returns `i + 1` weights.
pub fn product_weights(mesh: &GradedMesh, i: usize, beta: f64, log: bool) -> Result<Vec<f64>> {
    let weight = SingularWeight::new(beta, log)?;
    let nodes = mesh.nodes();
    if i >= nodes.len() {
        return Err(Error::param(format!("row index {i} outside mesh of {} nodes", nodes.len())));
    }
    Ok(product_row(nodes, i, &weight))
}

fn product_row(nodes: &[f64], i: usize, weight: &SingularWeight) -> Vec<f64> {
    let ti = nodes[i];
    let mut row = vec![0.0; i + 1];
    for j in 0..i {
        let xa = ti - nodes[j + 1];
        let xb = ti - nodes[j];
        let (wa, wb) = weight.linear_panel(xa, xb);
        row[j + 1] += wa;
        row[j] += wb;
    }
    row
}

/// Interpolatory rule on `[0, L]` for the weight ω, built on `n` Gauss–Legendre
/// nodes with exact monomial moments. Returns `(nodes, weights)`.
pub fn singular_panel_rule(len: f64, weight: &SingularWeight, n: usize) -> (Vec<f64>, Vec<f64>) {
    let rule = legendre(n);
    let xi = &rule.nodes;
    let q = |k: usize| k as f64 + 1.0 - weight.beta;
    // Moments on the unit interval.
    let plain: Vec<f64> = (0..n).map(|k| 1.0 / q(k)).collect();
    let logm: Vec<f64> = (0..n).map(|k| -1.0 / (q(k) * q(k))).collect();
    let scale = len.powf(1.0 - weight.beta);
    let ln_len = len.ln();
    let mut w = vec![0.0; n];
    for (j, wj) in w.iter_mut().enumerate() {
        // Monomial coefficients of the Lagrange basis polynomial for node j.
        let mut coef = vec![0.0; n];
        coef[0] = 1.0;
        let mut deg = 0;
        let mut denom = 1.0;
        for (m, &xm) in xi.iter().enumerate() {
            if m == j {
                continue;
            }
            deg += 1;
            for k in (1..=deg).rev() {
                coef[k] = coef[k - 1] - xm * coef[k];
            }
            coef[0] *= -xm;
            denom *= xi[j] - xm;
        }
        let dot = |mom: &[f64]| coef.iter().zip(mom).map(|(c, m)| c * m).sum::<f64>() / denom;
        *wj = if weight.log {
            scale * (ln_len * dot(&plain) + dot(&logm))
        } else {
            scale * dot(&plain)
        };
    }
    (xi.iter().map(|&x| x * len).collect(), w)
}

/// `∫_0^t φ(x) x^{−β} (ln x)^m dx` for φ smooth near 0.
///
/// φ receives `(x, t − x)` and may be singular (integrably) at `x = t`.
pub fn weighted_integral<F>(t: f64, weight: &SingularWeight, mut phi: F) -> Result<f64>
where
    F: FnMut(f64, f64) -> Result<f64>,
{
    if t <= 0.0 {
        return Ok(0.0);
    }
    let q = 0.125 * t;
    let (xs, ws) = singular_panel_rule(q, weight, 8);
    let mut sum = 0.0;
    for (x, w) in xs.into_iter().zip(ws) {
        sum += w * phi(x, t - x)?;
    }
    for (lo, hi) in [(q, 2.0 * q), (2.0 * q, 4.0 * q)] {
        for (x, w) in legendre(16).on_interval(lo, hi) {
            sum += w * weight.eval(x) * phi(x, t - x)?;
        }
    }
    let half = 0.5 * t;
    let tail = TanhSinh::with_tol(1e-14).integrate(half, t, |x, _, dr| Ok(weight.eval(x) * phi(x, dr)?))?;
    Ok(sum + tail.value)
}
