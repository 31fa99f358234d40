//! Gamma, log-Gamma, Beta and digamma on the positive real axis.
//!
//! Every kernel in the crate is built from these four functions. Arguments
//! stay in `(0, 2)` for exponents in `(0, 1)`, but the routines are accurate
//! on all of `(0, ∞)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn check_positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} requires a positive finite argument, got {x}")))
    }
}

fn lanczos_sum(x: f64) -> f64 {
    // x is already shifted by -1
    LANCZOS[1..]
        .iter()
        .enumerate()
        .fold(LANCZOS[0], |acc, (i, c)| acc + c / (x + (i + 1) as f64))
}

/// Γ(x) for x > 0.
pub fn gamma_fn(x: f64) -> Result<f64> {
    check_positive("gamma", x)?;
    Ok(gamma_unchecked(x))
}

pub(crate) fn gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        PI / ((PI * x).sin() * gamma_unchecked(1.0 - x))
    } else if x > 171.7 {
        f64::INFINITY
    } else {
        let xm = x - 1.0;
        let t = xm + LANCZOS_G + 0.5;
        (2.0 * PI).sqrt() * t.powf(xm + 0.5) * (-t).exp() * lanczos_sum(xm)
    }
}

/// ln Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> Result<f64> {
    check_positive("ln_gamma", x)?;
    Ok(ln_gamma_unchecked(x))
}

pub(crate) fn ln_gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        (PI / (PI * x).sin()).ln() - ln_gamma_unchecked(1.0 - x)
    } else {
        let xm = x - 1.0;
        let t = xm + LANCZOS_G + 0.5;
        0.5 * (2.0 * PI).ln() + (xm + 0.5) * t.ln() - t + lanczos_sum(xm).ln()
    }
}

/// B(a, b) = Γ(a)Γ(b)/Γ(a+b); large arguments go through log-Gamma.
pub fn beta_fn(a: f64, b: f64) -> Result<f64> {
    check_positive("beta", a)?;
    check_positive("beta", b)?;
    Ok(beta_unchecked(a, b))
}

pub(crate) fn beta_unchecked(a: f64, b: f64) -> f64 {
    if a + b < 100.0 {
        return gamma_unchecked(a) * gamma_unchecked(b) / gamma_unchecked(a + b);
    }
    (ln_gamma_unchecked(a) + ln_gamma_unchecked(b) - ln_gamma_unchecked(a + b)).exp()
}

/// ψ(x) = d/dx ln Γ(x) for x > 0.
pub fn digamma(x: f64) -> Result<f64> {
    check_positive("digamma", x)?;
    Ok(digamma_unchecked(x))
}

pub(crate) fn digamma_unchecked(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 10.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // Bernoulli tail: sum B_2k / (2k x^2k), k = 1..7
    let tail = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2
                        * (1.0 / 252.0
                            - inv2
                                * (1.0 / 240.0
                                    - inv2 * (1.0 / 132.0 - inv2 * (691.0 / 32760.0 - inv2 / 12.0))))));
    acc + x.ln() - 0.5 * inv - tail
}

/// 1/Γ(x), finite (and zero) at x = 0.
pub fn recip_gamma(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        1.0 / gamma_unchecked(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gamma_known_values() {
        assert_relative_eq!(gamma_fn(1.0).unwrap(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(gamma_fn(0.5).unwrap(), 1.772_453_850_905_516, max_relative = 1e-14);
        assert_relative_eq!(gamma_fn(5.0).unwrap(), 24.0, max_relative = 1e-14);
        assert_relative_eq!(gamma_fn(10.0).unwrap(), 362_880.0, max_relative = 1e-13);
    }

    #[test]
    fn gamma_rejects_nonpositive() {
        assert!(matches!(gamma_fn(0.0), Err(Error::Domain(_))));
        assert!(matches!(gamma_fn(-1.5), Err(Error::Domain(_))));
        assert!(beta_fn(0.0, 1.0).is_err());
        assert!(digamma(-0.1).is_err());
        assert!(ln_gamma(f64::NAN).is_err());
    }

    #[test]
    fn beta_known_values() {
        assert_relative_eq!(beta_fn(1.0, 1.0).unwrap(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(beta_fn(0.5, 0.5).unwrap(), PI, max_relative = 1e-14);
        assert_relative_eq!(beta_fn(2.0, 0.5).unwrap(), 4.0 / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn digamma_known_values() {
        assert_relative_eq!(digamma(1.0).unwrap(), -EULER_GAMMA, max_relative = 1e-14);
        assert_relative_eq!(digamma(2.0).unwrap(), 1.0 - EULER_GAMMA, max_relative = 1e-14);
        assert_relative_eq!(
            digamma(0.5).unwrap(),
            -EULER_GAMMA - 2.0 * std::f64::consts::LN_2,
            max_relative = 1e-14
        );
    }

    #[test]
    fn reciprocal_gamma_vanishes_at_zero() {
        assert_eq!(recip_gamma(0.0), 0.0);
        assert_relative_eq!(recip_gamma(1.0), 1.0, max_relative = 1e-15);
    }
}
