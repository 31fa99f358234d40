use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::specialfn::beta_unchecked;

/// Gauss–Jacobi rule on (0, 1) for the weight `(1−z)^a z^b`.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiRule {
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl JacobiRule {
    /// Σ v_k φ(z_k) ≈ ∫_0^1 (1−z)^a z^b φ(z) dz.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut phi: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&z, &w)| w * phi(z)).sum()
    }

    /// Maps the rule onto `[lo, hi]` with plain (a = b = 0) semantics.
    pub fn on_interval(&self, lo: f64, hi: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let h = hi - lo;
        self.nodes.iter().zip(&self.weights).map(move |(&z, &w)| (lo + h * z, h * w))
    }
}

/// Classical Gauss–Jacobi rule with `n` nodes, exact through degree `2n−1`.
pub fn gauss_jacobi(n: usize, a: f64, b: f64) -> Result<JacobiRule> {
    if n == 0 {
        return Err(Error::param("Gauss–Jacobi rule needs n >= 1"));
    }
    if !(a > -1.0 && b > -1.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::param(format!("Jacobi exponents must exceed -1, got a = {a}, b = {b}")));
    }
    // Jacobi matrix of the monic recurrence on [-1, 1] for (1-x)^a (1+x)^b,
    // mapped to (0, 1) by z = (1 + x)/2.
    let ab = a + b;
    let mut diag = Vec::with_capacity(n);
    let mut off = vec![0.0; n];
    for k in 0..n {
        let kf = k as f64;
        let alpha = if k == 0 {
            (b - a) / (ab + 2.0)
        } else {
            (b * b - a * a) / ((2.0 * kf + ab) * (2.0 * kf + ab + 2.0))
        };
        diag.push(0.5 * (1.0 + alpha));
        if k + 1 < n {
            let m = kf + 1.0;
            let beta = if k == 0 {
                4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab).powi(2) * (3.0 + ab))
            } else {
                let s = 2.0 * m + ab;
                4.0 * m * (m + a) * (m + b) * (m + ab) / (s * s * (s + 1.0) * (s - 1.0))
            };
            off[k] = 0.5 * beta.sqrt();
        }
    }
    let first = symmetric_tridiagonal_eigen(&mut diag, &mut off)?;
    let mu0 = beta_unchecked(a + 1.0, b + 1.0);
    let mut pairs: Vec<(f64, f64)> = diag.into_iter().zip(first.into_iter().map(|v| mu0 * v * v)).collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let (nodes, weights) = pairs.into_iter().unzip();
    Ok(JacobiRule { n, a, b, nodes, weights })
}

/// Implicit QL on a symmetric tridiagonal matrix. On return `diag` holds the
/// eigenvalues; the result holds the first component of each eigenvector.
fn symmetric_tridiagonal_eigen(diag: &mut [f64], off: &mut [f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut z = vec![0.0; n];
    z[0] = 1.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 100 {
                return Err(Error::QuadratureFailure("Golub–Welsch eigen iteration did not converge".into()));
            }
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + off[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
                let zf = z[i + 1];
                z[i + 1] = s * z[i] + c * zf;
                z[i] = c * z[i] - s * zf;
            }
            if deflated {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
    Ok(z)
}

/// Cached Gauss–Legendre rule on (0, 1).
pub fn legendre(n: usize) -> Arc<JacobiRule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<JacobiRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("legendre cache poisoned");
    map.entry(n)
        .or_insert_with(|| Arc::new(gauss_jacobi(n, 0.0, 0.0).expect("valid Legendre parameters")))
        .clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn midpoint_rule() {
        let r = gauss_jacobi(1, 0.0, 0.0).unwrap();
        assert!((r.nodes[0] - 0.5).abs() < 1e-15);
        assert!((r.weights[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn chebyshev_moment() {
        let r = gauss_jacobi(8, -0.5, -0.5).unwrap();
        assert!((r.weights.iter().sum::<f64>() - PI).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_exponents() {
        assert!(gauss_jacobi(4, -1.0, 0.0).is_err());
        assert!(gauss_jacobi(4, 0.0, -1.5).is_err());
        assert!(gauss_jacobi(0, 0.0, 0.0).is_err());
    }

    #[test]
    fn legendre_is_exact_for_polynomials() {
        let r = legendre(10);
        for k in 0..20 {
            let got = r.integrate(|z| z.powi(k));
            assert!((got - 1.0 / (k as f64 + 1.0)).abs() < 1e-14, "degree {k}");
        }
        assert!(r.nodes.iter().all(|&z| z > 0.0 && z < 1.0));
    }

    #[test]
    fn extreme_exponents_stay_finite() {
        let a = -1.0 + 1e-8;
        let r = gauss_jacobi(24, a, 0.0).unwrap();
        let sum: f64 = r.weights.iter().sum();
        let want = 1.0 / (a + 1.0);
        assert!((sum - want).abs() < want * 1e-12);
        assert!(r.nodes.iter().all(|z| z.is_finite()));
    }
}
