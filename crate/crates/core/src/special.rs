//! Regularized incomplete beta function.

// Unused when std is linked into the build, which supplies inherent float methods.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

const MAX_ITER: usize = 500;
const CF_EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;

pub fn ln_beta(a: f64, b: f64) -> f64 {
    libm::lgamma(a) + libm::lgamma(b) - libm::lgamma(a + b)
}

/// `I_x(a, b)`, the CDF of Beta(a, b) at `x`.
///
/// Continued fraction (modified Lentz), evaluated on whichever side of the
/// mean `(a+1)/(a+b+2)` converges quickly and reflected otherwise.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidConfig(alloc::format!(
            "beta parameters must be positive, got ({a}, {b})"
        )));
    }
    if x.is_nan() {
        return Err(Error::InvalidConfig("x is NaN".into()));
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    if x >= 1.0 {
        return Ok(1.0);
    }
    let front = (a * x.ln() + b * (1.0 - x).ln() - ln_beta(a, b)).exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        Ok(front * continued_fraction(a, b, x)? / a)
    } else {
        Ok(1.0 - front * continued_fraction(b, a, 1.0 - x)? / b)
    }
}

fn continued_fraction(a: f64, b: f64, x: f64) -> Result<f64> {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < CF_EPS {
            return Ok(h);
        }
    }
    Err(Error::NoConvergence {
        iterations: MAX_ITER,
        theta: x,
        score: f64::NAN,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_case() {
        for x in [0.0, 0.1, 0.37, 0.5, 0.99, 1.0] {
            assert!((regularized_incomplete_beta(1.0, 1.0, x).unwrap() - x).abs() < 1e-15);
        }
    }

    #[test]
    fn polynomial_cases() {
        // I_x(2,1) = x², I_x(1,2) = 1 − (1−x)², I_x(3,3) = 10x³ − 15x⁴ + 6x⁵
        for x in [0.05, 0.3, 0.5, 0.8] {
            let x: f64 = x;
            assert!((regularized_incomplete_beta(2.0, 1.0, x).unwrap() - x * x).abs() < 1e-14);
            assert!(
                (regularized_incomplete_beta(1.0, 2.0, x).unwrap() - (1.0 - (1.0 - x).powi(2)))
                    .abs()
                    < 1e-14
            );
            let p = 10.0 * x.powi(3) - 15.0 * x.powi(4) + 6.0 * x.powi(5);
            assert!((regularized_incomplete_beta(3.0, 3.0, x).unwrap() - p).abs() < 1e-14);
        }
    }

    #[test]
    fn symmetry_relation() {
        for x in [0.1, 0.4, 0.7] {
            let l = regularized_incomplete_beta(0.8, 1.5, x).unwrap();
            let r = 1.0 - regularized_incomplete_beta(1.5, 0.8, 1.0 - x).unwrap();
            assert!((l - r).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(regularized_incomplete_beta(0.0, 1.0, 0.5).is_err());
        assert!(regularized_incomplete_beta(1.0, -2.0, 0.5).is_err());
        assert!(regularized_incomplete_beta(1.0, 1.0, f64::NAN).is_err());
    }
}
