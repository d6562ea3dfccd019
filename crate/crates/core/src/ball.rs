//! Dirichlet eigenvalues of polar caps by shooting on the radial problem.
//!
//! λ₁(θ₁) is the first eigenvalue of the m = 0 radial problem and λ₂(θ₁)
//! the first eigenvalue of the m = 1 problem; the shooting function
//! F(λ) = u_m(θ₁; λ) changes sign from + to − exactly at each radial
//! eigenvalue because the positive zeros of u_m move left as λ grows.

use crate::bessel;
use crate::error::{Error, Result};
use crate::radial::{solve_radial, BallSpec, ModeParams, RadialSolution};
use crate::roots::brent;
use rayon::prelude::*;
use serde::Serialize;

const PI: f64 = std::f64::consts::PI;
/// Guard distance from the θ = π pole singularity.
const POLE_GUARD: f64 = 1e-6;

/// First two cap eigenvalues with their boundary residuals.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SpectralPair {
    pub n: u32,
    pub theta1: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    /// |u₀(θ₁; λ₁)| and |u₁(θ₁; λ₂)| scaled by the solution's sup on (0, θ₁).
    pub residual1: f64,
    pub residual2: f64,
}

impl SpectralPair {
    pub fn spec(&self) -> BallSpec {
        BallSpec {
            n: self.n,
            theta1: self.theta1,
        }
    }
}

/// First positive zero of u_m(·; λ) in (0, π).
pub fn first_zero(mode: ModeParams) -> Result<f64> {
    let sol = solve_radial(mode, PI - POLE_GUARD)?;
    sol.zeros()
        .into_iter()
        .next()
        .ok_or(Error::NoZeroInRange {
            m: mode.m,
            lambda: mode.lambda,
        })
}

fn boundary_value(n: u32, m: u32, lambda: f64, theta1: f64) -> Result<f64> {
    let mode = ModeParams::new(n, m, lambda)?;
    let sol = solve_radial(mode, theta1)?;
    Ok(sol.eval(theta1).0)
}

/// The λ with first_zero(λ) = θ₁, i.e. the first eigenvalue of the radial
/// problem of index m on (0, θ₁). `guess` warm-starts the bracket.
pub fn lambda_shoot_guess(spec: BallSpec, m: u32, guess: Option<f64>) -> Result<f64> {
    let scale = euclidean_guess(spec.n, m, spec.theta1)?;
    let mut lo = guess.map(|g| 0.9 * g).unwrap_or(0.5 * scale).max(1e-12);
    // walk down until no zero has been reached by θ₁ (u(θ₁) still positive)
    let mut f_lo = boundary_value(spec.n, m, lo, spec.theta1)?;
    let mut shrink = 0;
    while f_lo <= 0.0 {
        lo *= 0.4;
        shrink += 1;
        if shrink > 120 {
            return Err(Error::BracketExhausted(format!(
                "no positive lower bracket for n={}, m={m}, theta1={}",
                spec.n, spec.theta1
            )));
        }
        f_lo = boundary_value(spec.n, m, lo, spec.theta1)?;
    }
    // walk up in steps small enough not to skip past the second radial
    // eigenvalue (the spectral gap of these operators exceeds a factor 2)
    let mut hi = lo;
    let mut f_hi = f_lo;
    let mut grow = 0;
    while f_hi > 0.0 {
        hi *= 1.35;
        grow += 1;
        if grow > 200 {
            return Err(Error::BracketExhausted(format!(
                "no sign change found up to lambda = {hi}"
            )));
        }
        f_hi = boundary_value(spec.n, m, hi, spec.theta1)?;
        if f_hi > 0.0 {
            lo = hi;
        }
    }
    let lambda = brent(
        lo,
        hi,
        |l| boundary_value(spec.n, m, l, spec.theta1).unwrap_or(f64::NAN),
        1e-13 * hi.max(1.0),
    )?;
    // the first eigenfunction must not vanish inside the interval
    let sol = solve_radial(ModeParams::new(spec.n, m, lambda)?, spec.theta1)?;
    let interior_zero = sol
        .zeros()
        .into_iter()
        .any(|z| z < spec.theta1 * (1.0 - 1e-9));
    if interior_zero {
        return Err(Error::NoConvergence(format!(
            "shooting converged to a higher branch at lambda = {lambda}"
        )));
    }
    Ok(lambda)
}

/// Shooting solve with the default Euclidean-limit bracket seed.
pub fn lambda_shoot(spec: BallSpec, m: u32) -> Result<f64> {
    lambda_shoot_guess(spec, m, None)
}

/// Euclidean-limit scale j²_{ν,1}/θ₁² with ν = n/2 - 1 + m, used only to
/// seed brackets; the shooting itself never trusts it.
fn euclidean_guess(n: u32, m: u32, theta1: f64) -> Result<f64> {
    let nu = n as f64 / 2.0 - 1.0 + m as f64;
    let j = bessel::bessel_j_first_zero(nu)?;
    Ok(j * j / (theta1 * theta1))
}

/// λ₁ and λ₂ of the cap, with boundary residuals attached.
pub fn spectral_pair(spec: BallSpec) -> Result<SpectralPair> {
    let lambda1 = lambda_shoot(spec, 0)?;
    let lambda2 = lambda_shoot(spec, 1)?;
    let res = |m: u32, lambda: f64| -> Result<f64> {
        let sol = solve_radial(ModeParams::new(spec.n, m, lambda)?, spec.theta1)?;
        let sup = sample_sup(&sol, spec.theta1);
        Ok(sol.eval(spec.theta1).0.abs() / sup)
    };
    Ok(SpectralPair {
        n: spec.n,
        theta1: spec.theta1,
        lambda1,
        lambda2,
        residual1: res(0, lambda1)?,
        residual2: res(1, lambda2)?,
    })
}

fn sample_sup(sol: &RadialSolution, theta_end: f64) -> f64 {
    let mut sup = 0.0f64;
    for i in 1..128 {
        let t = theta_end * i as f64 / 128.0;
        sup = sup.max(sol.eval(t).0.abs());
    }
    sup.max(f64::MIN_POSITIVE)
}

/// One row of a θ₁ scan.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScanRow {
    pub theta1: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub ratio: f64,
    pub t2_lambda1: f64,
    pub t2_lambda2: f64,
    pub t2_gap: f64,
}

/// Monotonicity verdict for one scan column.
#[derive(Debug, Clone, Serialize)]
pub struct Monotonicity {
    pub column: String,
    pub increasing: bool,
    pub decreasing: bool,
    /// Index of the first adjacent pair violating strict monotonicity.
    pub first_violation: Option<usize>,
}

fn monotonicity(column: &str, values: &[f64], slack: f64) -> Monotonicity {
    let mut increasing = true;
    let mut decreasing = true;
    let mut first_violation = None;
    for i in 1..values.len() {
        let d = values[i] - values[i - 1];
        if d <= slack && increasing {
            increasing = false;
            first_violation.get_or_insert(i - 1);
        }
        if d >= -slack && decreasing {
            decreasing = false;
            first_violation.get_or_insert(i - 1);
        }
    }
    if increasing || decreasing {
        first_violation = None;
    }
    Monotonicity {
        column: column.to_string(),
        increasing,
        decreasing,
        first_violation,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanTable {
    pub n: u32,
    pub rows: Vec<ScanRow>,
    pub verdicts: Vec<Monotonicity>,
}

impl ScanTable {
    pub fn verdict(&self, column: &str) -> Option<&Monotonicity> {
        self.verdicts.iter().find(|v| v.column == column)
    }
}

/// Solve both eigenvalues over a θ₁ grid and attach monotonicity verdicts
/// (slack 1e-9 absorbs solver noise). Rows are independent and solved in
/// parallel; output order follows the input grid.
pub fn scan(n: u32, grid: &[f64]) -> Result<ScanTable> {
    let rows: Vec<ScanRow> = grid
        .par_iter()
        .map(|&theta1| {
            let spec = BallSpec::new(n, theta1)?;
            let pair = spectral_pair(spec)?;
            Ok(ScanRow {
                theta1,
                lambda1: pair.lambda1,
                lambda2: pair.lambda2,
                ratio: pair.lambda2 / pair.lambda1,
                t2_lambda1: theta1 * theta1 * pair.lambda1,
                t2_lambda2: theta1 * theta1 * pair.lambda2,
                t2_gap: theta1 * theta1 * (pair.lambda2 - pair.lambda1),
            })
        })
        .collect::<Result<_>>()?;
    let slack = 1e-9;
    let col = |f: fn(&ScanRow) -> f64| rows.iter().map(f).collect::<Vec<_>>();
    let verdicts = vec![
        monotonicity("lambda1", &col(|r| r.lambda1), slack),
        monotonicity("lambda2", &col(|r| r.lambda2), slack),
        monotonicity("ratio", &col(|r| r.ratio), slack),
        monotonicity("t2_lambda1", &col(|r| r.t2_lambda1), slack),
        monotonicity("t2_lambda2", &col(|r| r.t2_lambda2), slack),
        monotonicity("t2_gap", &col(|r| r.t2_gap), slack),
    ];
    Ok(ScanTable { n, rows, verdicts })
}

/// Verdicts of the closed-form eigenvalue inequalities for one cap:
/// (λ₂ - n)/λ₁ vs (n+2)/n (equality exactly at the hemisphere, reversed
/// beyond it) and the gap bound λ₂ - λ₁ > (n-1)/sin²θ₁ for θ₁ ≤ π/2.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RatioGapReport {
    pub shifted_ratio: f64,
    pub shifted_ratio_bound: f64,
    pub equality: bool,
    /// True when the shifted-ratio inequality holds in the direction the
    /// regime demands (≥ below π/2, equality only at π/2, < above π/2).
    pub shifted_ratio_ok: bool,
    pub gap: f64,
    pub gap_bound: f64,
    /// Gap inequality verdict; only asserted for θ₁ ≤ π/2.
    pub gap_ok: bool,
}

pub fn ratio_gap_checks(pair: &SpectralPair) -> RatioGapReport {
    let n = pair.n as f64;
    let lhs = (pair.lambda2 - n) / pair.lambda1;
    let rhs = (n + 2.0) / n;
    let equality = (lhs - rhs).abs() < 1e-8;
    let half = PI / 2.0;
    let shifted_ratio_ok = if (pair.theta1 - half).abs() < 1e-12 {
        equality
    } else if pair.theta1 < half {
        lhs > rhs && !equality
    } else {
        lhs < rhs && !equality
    };
    let gap = pair.lambda2 - pair.lambda1;
    let gap_bound = (n - 1.0) / (pair.theta1.sin() * pair.theta1.sin());
    let gap_ok = if pair.theta1 <= half + 1e-12 {
        gap > gap_bound
    } else {
        true
    };
    RatioGapReport {
        shifted_ratio: lhs,
        shifted_ratio_bound: rhs,
        equality,
        shifted_ratio_ok,
        gap,
        gap_bound,
        gap_ok,
    }
}

/// Zeros of u₀ and of (sin θ)^{n-1} u₁ on [0, π) interlace at fixed λ.
/// θ = 0 counts as the first zero of the weighted u₁.
pub fn interlace_check(n: u32, lambda: f64) -> Result<bool> {
    let z0 = solve_radial(ModeParams::new(n, 0, lambda)?, PI - POLE_GUARD)?.zeros();
    let z1 = solve_radial(ModeParams::new(n, 1, lambda)?, PI - POLE_GUARD)?.zeros();
    let mut merged: Vec<(f64, u8)> = vec![(0.0, 1)];
    merged.extend(z0.iter().map(|&z| (z, 0)));
    merged.extend(z1.iter().map(|&z| (z, 1)));
    merged.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    Ok(merged.windows(2).all(|w| w[0].1 != w[1].1))
}

/// Lemma-level sanity: the first cap eigenfunction u₀(·; λ₁) is strictly
/// decreasing on (0, θ₁).
pub fn first_eigenfunction_decreasing(spec: BallSpec) -> Result<bool> {
    let lambda1 = lambda_shoot(spec, 0)?;
    let sol = solve_radial(ModeParams::new(spec.n, 0, lambda1)?, spec.theta1)?;
    for i in 1..400 {
        let t = spec.theta1 * i as f64 / 400.0;
        if sol.eval(t).1 >= 0.0 {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn first_zero_of_cosine_family() {
        for n in [2u32, 3, 5] {
            let z = first_zero(ModeParams::new(n, 0, n as f64).unwrap()).unwrap();
            assert_abs_diff_eq!(z, PI / 2.0, epsilon = 1e-10);
        }
        let z = first_zero(ModeParams::new(2, 1, 6.0).unwrap()).unwrap();
        assert_abs_diff_eq!(z, PI / 2.0, epsilon = 1e-10);
    }

    #[test]
    fn first_zero_moves_left_with_lambda() {
        let z = first_zero(ModeParams::new(2, 0, 2.0 + 1e-6).unwrap()).unwrap();
        assert!(z < PI / 2.0);
        assert!(z > PI / 2.0 - 1e-4);
    }

    #[test]
    fn no_zero_reported_when_lambda_too_small() {
        // the m = 1 problem has no eigenvalue below n, so u₁ keeps one sign
        let err = first_zero(ModeParams::new(3, 1, 2.5).unwrap());
        assert!(matches!(err, Err(Error::NoZeroInRange { .. })));
    }

    #[test]
    fn hemisphere_eigenvalues_are_exact() {
        for n in 2..=6u32 {
            let spec = BallSpec::new(n, PI / 2.0).unwrap();
            let l1 = lambda_shoot(spec, 0).unwrap();
            let l2 = lambda_shoot(spec, 1).unwrap();
            assert_abs_diff_eq!(l1, n as f64, epsilon = 1e-9 * n as f64);
            assert_abs_diff_eq!(l2, 2.0 * (n as f64 + 1.0), epsilon = 1e-8);
        }
    }

    #[test]
    fn small_cap_reaches_euclidean_limit() {
        let spec = BallSpec::new(2, 0.05).unwrap();
        let l1 = lambda_shoot(spec, 0).unwrap();
        let j01 = bessel::bessel_j_first_zero(0.0).unwrap();
        assert!((0.05 * 0.05 * l1 - j01 * j01).abs() < 3e-3);
    }

    #[test]
    fn spectral_pair_hemisphere_and_ordering() {
        let pair = spectral_pair(BallSpec::new(4, PI / 2.0).unwrap()).unwrap();
        assert_abs_diff_eq!(pair.lambda1, 4.0, epsilon = 1e-8);
        assert_abs_diff_eq!(pair.lambda2, 10.0, epsilon = 1e-8);
        assert!(pair.lambda1 < pair.lambda2);
        assert!(pair.residual1 < 1e-9 && pair.residual2 < 1e-9);
    }

    #[test]
    fn ratio_tends_to_euclidean_value() {
        // λ₂/λ₁ → (j_{1,1}/j_{0,1})² ≈ 2.5387 as θ₁ → 0 in dimension 2
        let pair = spectral_pair(BallSpec::new(2, 0.01).unwrap()).unwrap();
        assert!((pair.lambda2 / pair.lambda1 - 2.5387).abs() < 1e-3);
    }

    #[test]
    fn scan_monotonicity_small() {
        let grid: Vec<f64> = (0..25).map(|i| 0.3 + 2.4 * i as f64 / 24.0).collect();
        let table = scan(2, &grid).unwrap();
        assert!(table.verdict("lambda1").unwrap().decreasing);
        assert!(table.verdict("lambda2").unwrap().decreasing);
        assert!(table.verdict("t2_lambda1").unwrap().decreasing);
        assert!(table.verdict("t2_lambda2").unwrap().increasing);
        assert!(table.verdict("ratio").unwrap().increasing);
    }

    #[test]
    fn ratio_gap_checks_hemisphere_equality_and_reversal() {
        let pair = spectral_pair(BallSpec::new(2, PI / 2.0).unwrap()).unwrap();
        let rep = ratio_gap_checks(&pair);
        assert!(rep.equality && rep.shifted_ratio_ok);
        assert_abs_diff_eq!(rep.shifted_ratio, 2.0, epsilon = 1e-8);
        assert!(rep.gap_ok);

        let pair = spectral_pair(BallSpec::new(3, PI / 4.0).unwrap()).unwrap();
        let rep = ratio_gap_checks(&pair);
        assert!(rep.shifted_ratio_ok && !rep.equality && rep.gap_ok);
        assert!(rep.shifted_ratio > rep.shifted_ratio_bound);

        let pair = spectral_pair(BallSpec::new(2, 3.0 * PI / 4.0).unwrap()).unwrap();
        let rep = ratio_gap_checks(&pair);
        assert!(rep.shifted_ratio < 2.0);
        assert!(rep.shifted_ratio_ok);
    }

    #[test]
    fn interlacing_examples() {
        assert!(interlace_check(2, 6.0).unwrap());
        assert!(interlace_check(3, 20.0).unwrap());
        // λ below the first eigenvalue of the near-full cap: at most one zero each
        assert!(interlace_check(2, 1.0).unwrap());
    }

    #[test]
    fn first_eigenfunction_monotone() {
        for &(n, t1) in &[(2u32, 1.0), (3, 2.0), (5, PI / 2.0)] {
            assert!(first_eigenfunction_decreasing(BallSpec::new(n, t1).unwrap()).unwrap());
        }
    }
}
