//! Analytic derivatives of the rescaled cap eigenvalues λ̃_j(c) = c²λ_j(cθ₁)
//! at c = 1, via first-order perturbation of the 1-D Schrödinger forms of
//! the radial problems, cross-checked against central finite differences.
//!
//! Everything is expressed through the auxiliary functions
//! ℓ(θ) = cot θ − θ csc²θ and m(θ) = csc²θ (1 − θ cot θ) and the
//! half-density eigenfunctions v_j = u_j sin^{(n-1)/2}θ.

use crate::ball::{lambda_shoot, lambda_shoot_guess};
use crate::error::{Error, Result};
use crate::quad::adaptive_simpson;
use crate::radial::{solve_radial, BallSpec, ModeParams, RadialSolution};
use serde::Serialize;

const PI: f64 = std::f64::consts::PI;

/// Switch point below which the series expansions replace the closed forms;
/// both branches agree to ~1e-13 in the crossover band.
const SERIES_CUTOFF: f64 = 0.05;

fn check_domain(theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::InvalidParameter(format!(
            "auxiliary functions are defined on (0, pi), got {theta}"
        )));
    }
    Ok(())
}

/// ℓ(θ) = cot θ − θ csc²θ; negative, decreasing, concave on (0, π).
pub fn ell(theta: f64) -> Result<f64> {
    check_domain(theta)?;
    if theta < SERIES_CUTOFF {
        let t2 = theta * theta;
        // -2θ/3 - 4θ³/45 - 4θ⁵/315 - 8θ⁷/4725 - 20θ⁹/93555
        return Ok(-theta
            * (2.0 / 3.0
                + t2 * (4.0 / 45.0
                    + t2 * (4.0 / 315.0 + t2 * (8.0 / 4725.0 + t2 * (20.0 / 93555.0))))));
    }
    let s = theta.sin();
    Ok(theta.cos() / s - theta / (s * s))
}

/// m(θ) = −ℓ'(θ)/2 = csc²θ (1 − θ cot θ); positive, increasing, convex,
/// with m(0⁺) = 1/3 and m(π/2) = 1.
pub fn mfun(theta: f64) -> Result<f64> {
    check_domain(theta)?;
    if theta < SERIES_CUTOFF {
        let t2 = theta * theta;
        // 1/3 + 2θ²/15 + 2θ⁴/63 + 4θ⁶/675 + 2θ⁸/2079
        return Ok(1.0 / 3.0
            + t2 * (2.0 / 15.0 + t2 * (2.0 / 63.0 + t2 * (4.0 / 675.0 + t2 * (2.0 / 2079.0)))));
    }
    let s = theta.sin();
    Ok((1.0 - theta * theta.cos() / s) / (s * s))
}

/// Adaptive Simpson with tolerance scaled to the integrand's sampled size.
fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let mut scale = 0.0f64;
    for i in 0..=64 {
        scale = scale.max(f(a + (b - a) * i as f64 / 64.0).abs());
    }
    let tol = 1e-13 * (scale * (b - a)).max(1e-300);
    adaptive_simpson(&|t| f(t), a, b, tol)
}

fn sin_weight(n: u32, theta: f64) -> f64 {
    theta.sin().powi(n as i32 - 1)
}

fn solved_mode(spec: BallSpec, m: u32) -> Result<(f64, RadialSolution)> {
    let lambda = lambda_shoot(spec, m)?;
    let sol = solve_radial(ModeParams::new(spec.n, m, lambda)?, spec.theta1)?;
    Ok((lambda, sol))
}

/// dλ̃₁/dc at c = 1 in the integrated-by-parts form
/// (n−1) ∫ [−ℓ u₀ u₀'] sin^{n−1}θ dθ / ∫ v₀² dθ.
pub fn dlambda1_dc(spec: BallSpec) -> Result<f64> {
    let (_, sol) = solved_mode(spec, 0)?;
    let n = spec.n;
    let num = integrate(
        &|t| {
            if t <= 0.0 {
                return 0.0;
            }
            let (u, du) = sol.eval(t);
            -ell(t).unwrap() * u * du * sin_weight(n, t)
        },
        0.0,
        spec.theta1,
    );
    let den = integrate(
        &|t| {
            if t <= 0.0 {
                return 0.0;
            }
            let (u, _) = sol.eval(t);
            u * u * sin_weight(n, t)
        },
        0.0,
        spec.theta1,
    );
    Ok((n as f64 - 1.0) * num / den)
}

/// dλ̃₁/dc at c = 1 in the direct perturbation form
/// ½(n−1) ∫ [(n−3) m(θ) − (n−1)] v₀² dθ / ∫ v₀² dθ.
/// Agrees with [`dlambda1_dc`] to quadrature accuracy.
pub fn dlambda1_dc_raw(spec: BallSpec) -> Result<f64> {
    let (_, sol) = solved_mode(spec, 0)?;
    weighted_mfun_average(spec, &sol, spec.n as f64 - 3.0)
}

/// dλ̃₂/dc at c = 1:
/// ½(n−1) ∫ [(n+1) m(θ) − (n−1)] v₁² dθ / ∫ v₁² dθ.
pub fn dlambda2_dc(spec: BallSpec) -> Result<f64> {
    let (_, sol) = solved_mode(spec, 1)?;
    weighted_mfun_average(spec, &sol, spec.n as f64 + 1.0)
}

fn weighted_mfun_average(spec: BallSpec, sol: &RadialSolution, mcoeff: f64) -> Result<f64> {
    let n = spec.n as f64;
    let v2 = |t: f64| {
        if t <= 0.0 {
            return 0.0;
        }
        let (u, _) = sol.eval(t);
        u * u * sin_weight(spec.n, t)
    };
    let num = integrate(
        &|t| {
            if t <= 0.0 {
                return 0.0;
            }
            (mcoeff * mfun(t).unwrap() - (n - 1.0)) * v2(t)
        },
        0.0,
        spec.theta1,
    );
    let den = integrate(&v2, 0.0, spec.theta1);
    Ok(0.5 * (n - 1.0) * num / den)
}

/// Central finite difference of c²λ_j(cθ₁) at c = 1 with relative step `h`,
/// warm-starting each shooting solve from the rescaled base eigenvalue.
pub fn fd_c2_lambda(spec: BallSpec, m: u32, h: f64) -> Result<f64> {
    let base = lambda_shoot(spec, m)?;
    let eval = |c: f64| -> Result<f64> {
        let scaled = BallSpec::new(spec.n, c * spec.theta1)?;
        let guess = base / (c * c);
        let lam = lambda_shoot_guess(scaled, m, Some(guess))?;
        Ok(c * c * lam)
    };
    let plus = eval(1.0 + h)?;
    let minus = eval(1.0 - h)?;
    Ok((plus - minus) / (2.0 * h))
}

/// Analytic derivatives next to their finite-difference estimates.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PerturbationReport {
    pub n: u32,
    pub theta1: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub d_lambda1_dc: f64,
    pub d_lambda1_dc_raw: f64,
    pub d_lambda2_dc: f64,
    pub fd1: f64,
    pub fd2: f64,
    pub fd_step: f64,
}

pub fn perturbation_report(spec: BallSpec, fd_step: f64) -> Result<PerturbationReport> {
    Ok(PerturbationReport {
        n: spec.n,
        theta1: spec.theta1,
        lambda1: lambda_shoot(spec, 0)?,
        lambda2: lambda_shoot(spec, 1)?,
        d_lambda1_dc: dlambda1_dc(spec)?,
        d_lambda1_dc_raw: dlambda1_dc_raw(spec)?,
        d_lambda2_dc: dlambda2_dc(spec)?,
        fd1: fd_c2_lambda(spec, 0, fd_step)?,
        fd2: fd_c2_lambda(spec, 1, fd_step)?,
        fd_step,
    })
}

/// Number of sign changes of the normalized half-density eigenfunctions'
/// difference v̂₁ − v̂₀ on (0, θ₁); a single crossing is what the
/// eigenvalue-ratio monotonicity argument needs for θ₁ ≤ π/2.
pub fn normalized_crossing_count(spec: BallSpec) -> Result<usize> {
    let (_, sol0) = solved_mode(spec, 0)?;
    let (_, sol1) = solved_mode(spec, 1)?;
    let n = spec.n;
    let v = |sol: &RadialSolution, t: f64| sol.eval(t).0 * t.sin().powf((n as f64 - 1.0) / 2.0);
    let norm0 = integrate(
        &|t| if t <= 0.0 { 0.0 } else { v(&sol0, t).powi(2) },
        0.0,
        spec.theta1,
    )
    .sqrt();
    let norm1 = integrate(
        &|t| if t <= 0.0 { 0.0 } else { v(&sol1, t).powi(2) },
        0.0,
        spec.theta1,
    )
    .sqrt();
    let samples = 2000;
    let mut count = 0usize;
    let mut last_sign = 0i8;
    let slack = 1e-10;
    for i in 1..samples {
        let t = spec.theta1 * i as f64 / samples as f64;
        let d = v(&sol1, t) / norm1 - v(&sol0, t) / norm0;
        let sign = if d > slack {
            1
        } else if d < -slack {
            -1
        } else {
            0
        };
        if sign != 0 {
            if last_sign != 0 && sign != last_sign {
                count += 1;
            }
            last_sign = sign;
        }
    }
    Ok(count)
}
