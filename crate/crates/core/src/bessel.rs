//! Bessel functions of the first kind by power series, and their first
//! positive zeros by bracketing + Brent. Used as the Euclidean-limit oracle
//! for the shooting solver; deliberately shares no code with the ODE path.

use crate::error::{Error, Result};
use crate::roots::brent;

/// Gamma function for positive integer or half-integer arguments.
///
/// Orders that occur here are nu = n/2 - 1 and n/2 for integer dimension n,
/// so only Gamma(k/2) is ever needed.
pub fn gamma_half_integer(x: f64) -> f64 {
    let two_x = 2.0 * x;
    let k = two_x.round() as i64;
    assert!(
        k > 0 && (two_x - k as f64).abs() < 1e-12,
        "gamma_half_integer expects positive multiples of 1/2, got {x}"
    );
    // walk down to Gamma(1) = 1 or Gamma(1/2) = sqrt(pi)
    let mut value = if k % 2 == 0 { 1.0 } else { std::f64::consts::PI.sqrt() };
    let mut arg = if k % 2 == 0 { 1.0 } else { 0.5 };
    while arg + 0.5 < x {
        value *= arg;
        arg += 1.0;
    }
    value
}

/// J_nu(x) via the ascending power series; accurate for the moderate
/// arguments (x <= ~20) needed to locate first zeros.
pub fn bessel_j(nu: f64, x: f64) -> f64 {
    assert!(x >= 0.0 && nu >= 0.0);
    if x == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    let half = 0.5 * x;
    let mut term = half.powf(nu) / gamma_half_integer(nu + 1.0);
    let q = half * half;
    let mut sum = term;
    for k in 1..200 {
        let kf = k as f64;
        term *= -q / (kf * (nu + kf));
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) && k > 4 {
            break;
        }
    }
    sum
}

/// First positive zero j_{nu,1} of J_nu, to near machine precision.
pub fn bessel_j_first_zero(nu: f64) -> Result<f64> {
    // J_nu > 0 on (0, j_{nu,1}); scan outward for the first sign change
    let mut lo = 0.05f64.max(0.2 * nu);
    let mut flo = bessel_j(nu, lo);
    let step = 0.05;
    let mut x = lo + step;
    while x < 40.0 {
        let fx = bessel_j(nu, x);
        if flo > 0.0 && fx <= 0.0 {
            return brent(lo, x, |t| bessel_j(nu, t), 1e-15);
        }
        lo = x;
        flo = fx;
        x += step;
    }
    Err(Error::NoConvergence(format!(
        "no sign change of J_{nu} found below x = 40"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gamma_small_arguments() {
        assert!((gamma_half_integer(1.0) - 1.0).abs() < 1e-15);
        assert!((gamma_half_integer(0.5) - PI.sqrt()).abs() < 1e-15);
        assert!((gamma_half_integer(4.0) - 6.0).abs() < 1e-12);
        assert!((gamma_half_integer(2.5) - 0.75 * PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn half_integer_orders_have_closed_forms() {
        // J_{1/2}(x) = sqrt(2/(pi x)) sin x, so j_{1/2,1} = pi exactly
        let z = bessel_j_first_zero(0.5).unwrap();
        assert!((z - PI).abs() < 1e-12);
        // J_{3/2} zero solves tan x = x
        let z = bessel_j_first_zero(1.5).unwrap();
        assert!((z - 4.493409457909064).abs() < 1e-10);
        for &x in &[0.7, 1.9, 3.4] {
            let explicit = (2.0 / (PI * x)).sqrt() * x.sin();
            assert!((bessel_j(0.5, x) - explicit).abs() < 1e-14);
        }
    }

    #[test]
    fn integer_order_zeros_match_literature() {
        let z0 = bessel_j_first_zero(0.0).unwrap();
        assert!((z0 - 2.404825557695773).abs() < 1e-11);
        let z1 = bessel_j_first_zero(1.0).unwrap();
        assert!((z1 - 3.831705970207512).abs() < 1e-11);
        let z2 = bessel_j_first_zero(2.0).unwrap();
        assert!((z2 - 5.135622301840683).abs() < 1e-11);
        let z3 = bessel_j_first_zero(3.0).unwrap();
        assert!((z3 - 6.380161895923984).abs() < 1e-11);
    }
}
