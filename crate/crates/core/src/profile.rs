//! Comparison functions built from the two cap eigenfunctions:
//!
//! ```text
//! p = -y₁'/y₁,   g = y₂/y₁,   q = sin θ · g'/g,{  }B = g'² + (n-1) g²/sin²θ
//! ```
//!
//! with y₁ = u₀(·; λ₁) and y₂ = u₁(·; λ₂)/c₁, the latter scaled to unit
//! initial slope so that the hemisphere closed forms are g = sin θ,
//! B = (n-1) + cos²θ, p = tan θ, q = cos θ. g is continued by g(θ₁) up to
//! the equator and reflected, which is the extension the center-of-mass
//! weight and the gap bound consume.

use crate::ball::{lambda_shoot, spectral_pair, SpectralPair};
use crate::error::{Error, Result};
use crate::radial::{solve_radial, BallSpec, ModeParams, RadialSolution};
use serde::Serialize;

const PI: f64 = std::f64::consts::PI;

/// Joint tabulation of y₁, y₂, p, q, g, B on (0, θ₁], plus the dense
/// machinery to evaluate them (and the symmetric extensions of g and B)
/// anywhere.
#[derive(Debug)]
pub struct GapProfile {
    pub n: u32,
    pub theta1: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub grid: Vec<f64>,
    pub y1: Vec<f64>,
    pub y2: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub g: Vec<f64>,
    pub b: Vec<f64>,
    /// g(θ₁) by the derivative ratio (both eigenfunctions vanish at θ₁).
    pub g_theta1: f64,
    /// q'(θ₁) = -⅓ (λ₂ - λ₁ - (n-1)/sin²θ₁) sin θ₁.
    pub q_prime_theta1: f64,
    /// q''(0) = 2 (λ₁/n - λ₂/(n+2) - (2-n)/(2(n+2))).
    pub q_second_zero: f64,
    sol1: RadialSolution,
    sol2: RadialSolution,
    /// unit-slope normalization divisor c₁ = λ₂/n applied to u₁
    y2_scale: f64,
    /// width of the boundary layer where q switches to its Taylor form
    edge_band: f64,
    /// quadratic and cubic coefficients of the boundary Taylor form of q
    q_edge_coeffs: (f64, f64),
    /// coefficients of ĝ = g/sin θ ≈ a + b θ² used below θ = 1e-3
    ghat_origin: (f64, f64),
}

impl GapProfile {
    pub fn spec(&self) -> BallSpec {
        BallSpec {
            n: self.n,
            theta1: self.theta1,
        }
    }

    pub fn pair(&self) -> SpectralPair {
        SpectralPair {
            n: self.n,
            theta1: self.theta1,
            lambda1: self.lambda1,
            lambda2: self.lambda2,
            residual1: 0.0,
            residual2: 0.0,
        }
    }

    /// y₁(θ) and its derivative.
    pub fn eval_y1(&self, theta: f64) -> (f64, f64) {
        self.sol1.eval(theta)
    }

    /// Unit-slope y₂(θ) and its derivative.
    pub fn eval_y2(&self, theta: f64) -> (f64, f64) {
        let (v, dv) = self.sol2.eval(theta);
        (v / self.y2_scale, dv / self.y2_scale)
    }

    /// p(θ) = -y₁'/y₁ on (0, θ₁).
    pub fn eval_p(&self, theta: f64) -> f64 {
        let (v, dv) = self.sol1.eval(theta);
        -dv / v
    }

    /// g(θ) = y₂/y₁ on (0, θ₁], with the derivative-ratio value at θ₁.
    pub fn eval_g(&self, theta: f64) -> f64 {
        if theta >= self.theta1 {
            return self.g_theta1;
        }
        let (v1, _) = self.sol1.eval(theta);
        let (v2, _) = self.sol2.eval(theta);
        v2 / (self.y2_scale * v1)
    }

    /// ĝ(θ) = g(θ)/sin θ, finite on [0, θ₁] with ĝ(0) = 1.
    pub fn eval_ghat(&self, theta: f64) -> f64 {
        if theta < 1e-3 {
            let (a, b) = self.ghat_origin;
            return a + b * theta * theta;
        }
        self.eval_g(theta) / theta.sin()
    }

    /// q(θ) = sin θ (y₂'/y₂ - y₁'/y₁); Taylor forms at both ends, where the
    /// direct expression degenerates (0/0 at the origin, cancellation of
    /// the two log-derivatives at θ₁).
    pub fn eval_q(&self, theta: f64) -> f64 {
        if theta < 1e-3 {
            return 1.0 + 0.5 * self.q_second_zero * theta * theta;
        }
        let d = theta - self.theta1;
        if d >= 0.0 {
            return 0.0;
        }
        if -d <= self.edge_band {
            let (c2, c3) = self.q_edge_coeffs;
            return self.q_prime_theta1 * d + c2 * d * d + c3 * d * d * d;
        }
        let (v1, dv1) = self.sol1.eval(theta);
        let (v2, dv2) = self.sol2.eval(theta);
        theta.sin() * (dv2 / v2 - dv1 / v1)
    }

    /// B(θ) = (q² + n - 1) ĝ(θ)² on [0, θ₁].
    pub fn eval_b(&self, theta: f64) -> f64 {
        let q = self.eval_q(theta);
        let gh = self.eval_ghat(theta);
        (q * q + self.n as f64 - 1.0) * gh * gh
    }

    /// Symmetric extension of g: g(θ₁) plateau to the equator, reflected.
    pub fn extended_g(&self, theta: f64) -> f64 {
        let folded = theta.min(PI - theta);
        if folded >= self.theta1 {
            self.g_theta1
        } else {
            self.eval_g(folded.max(0.0))
        }
    }

    /// G̃(θ) = extended g / sin θ, the center-of-mass weight; continuous and
    /// positive on (0, π), symmetric about π/2 by construction.
    pub fn gtilde(&self, theta: f64) -> f64 {
        let folded = theta.min(PI - theta).max(0.0);
        if folded >= self.theta1 {
            self.g_theta1 / folded.sin()
        } else {
            self.eval_ghat(folded)
        }
    }

    /// Symmetric extension of B; on the plateau B = (n-1) g(θ₁)²/sin²θ.
    pub fn extended_b(&self, theta: f64) -> f64 {
        let folded = theta.min(PI - theta).max(0.0);
        if folded >= self.theta1 {
            let r = self.g_theta1 / folded.sin();
            (self.n as f64 - 1.0) * r * r
        } else {
            self.eval_b(folded)
        }
    }

    /// CSV rows (theta, y1, y2, p, q, g, B); p(θ₁) prints as `inf`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta,y1,y2,p,q,g,B\n");
        for i in 0..self.grid.len() {
            out.push_str(&format!(
                "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}\n",
                self.grid[i],
                self.y1[i],
                self.y2[i],
                self.p[i],
                self.q[i],
                self.g[i],
                self.b[i]
            ));
        }
        out
    }
}

/// Build the profile on a uniform grid of `points` samples of (0, θ₁].
/// Restricted to θ₁ ≤ π/2, the regime in which the monotonicity theory holds.
pub fn build_profile(spec: BallSpec, points: usize) -> Result<GapProfile> {
    if spec.theta1 > PI / 2.0 + 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "profiles are defined for theta1 <= pi/2, got {}",
            spec.theta1
        )));
    }
    if points < 16 {
        return Err(Error::InvalidParameter("need at least 16 grid points".into()));
    }
    let pair = spectral_pair(spec)?;
    build_profile_from_pair(&pair, points)
}

/// Same as [`build_profile`] but reusing already-computed eigenvalues.
pub fn build_profile_from_pair(pair: &SpectralPair, points: usize) -> Result<GapProfile> {
    let (n, theta1) = (pair.n, pair.theta1);
    let (lambda1, lambda2) = (pair.lambda1, pair.lambda2);
    let sol1 = solve_radial(ModeParams::new(n, 0, lambda1)?, theta1)?;
    let sol2 = solve_radial(ModeParams::new(n, 1, lambda2)?, theta1)?;
    let y2_scale = lambda2 / n as f64;

    let (_, dy1_end) = sol1.eval(theta1);
    let (_, dy2_end) = sol2.eval(theta1);
    let g_theta1 = dy2_end / (y2_scale * dy1_end);
    let nf = n as f64;
    let s1 = theta1.sin();
    let q_prime_theta1 = -(lambda2 - lambda1 - (nf - 1.0) / (s1 * s1)) * s1 / 3.0;
    let q_second_zero =
        2.0 * (lambda1 / nf - lambda2 / (nf + 2.0) - (2.0 - nf) / (2.0 * (nf + 2.0)));

    // ĝ = a + bθ² near the origin, fitted where the direct ratio is stable
    let ghat_at = |t: f64| {
        let (v1, _) = sol1.eval(t);
        let (v2, _) = sol2.eval(t);
        v2 / (y2_scale * v1 * t.sin())
    };
    let (ta, tb) = (1e-3, 2e-3);
    let (ga, gb) = (ghat_at(ta), ghat_at(tb));
    let b_coef = (gb - ga) / (tb * tb - ta * ta);
    let ghat_origin = (ga - b_coef * ta * ta, b_coef);

    let edge_band = (0.01 * theta1).max(1e-3).min(0.2 * theta1);
    // direct q at two points outside the band pins the curvature and the
    // cubic term of the boundary Taylor form
    let q_direct = |t: f64| {
        let (v1, dv1) = sol1.eval(t);
        let (v2, dv2) = sol2.eval(t);
        t.sin() * (dv2 / v2 - dv1 / v1)
    };
    let d1 = -edge_band;
    let d2 = -2.0 * edge_band;
    let r1 = q_direct(theta1 + d1) - q_prime_theta1 * d1;
    let r2 = q_direct(theta1 + d2) - q_prime_theta1 * d2;
    let det = d1 * d1 * d2 * d2 * (d2 - d1);
    let q_edge_coeffs = (
        (r1 * d2 * d2 * d2 - r2 * d1 * d1 * d1) / det,
        (r2 * d1 * d1 - r1 * d2 * d2) / det,
    );

    let mut profile = GapProfile {
        n,
        theta1,
        lambda1,
        lambda2,
        grid: Vec::new(),
        y1: Vec::new(),
        y2: Vec::new(),
        p: Vec::new(),
        q: Vec::new(),
        g: Vec::new(),
        b: Vec::new(),
        g_theta1,
        q_prime_theta1,
        q_second_zero,
        sol1,
        sol2,
        y2_scale,
        edge_band,
        q_edge_coeffs,
        ghat_origin,
    };

    for i in 1..=points {
        let t = theta1 * i as f64 / points as f64;
        profile.grid.push(t);
        let (v1, dv1) = profile.sol1.eval(t);
        let (v2, _) = profile.sol2.eval(t);
        profile.y1.push(v1);
        profile.y2.push(v2 / profile.y2_scale);
        profile.p.push(-dv1 / v1);
        profile.q.push(profile.eval_q(t));
        profile.g.push(profile.eval_g(t));
        profile.b.push(profile.eval_b(t));
    }
    Ok(profile)
}

/// Sup of the pointwise residuals of the two Riccati equations
/// p' = λ₁ + p² - (n-1) cot θ p and
/// q' = 2pq - (n-2) q cot θ - (q²+1-n)/sin θ - (λ₂-λ₁) sin θ,
/// with p', q' from fourth-order finite differences of the dense profile,
/// evaluated on the interior 5%–95% of the grid.
pub fn riccati_residuals(profile: &GapProfile) -> (f64, f64) {
    let t1 = profile.theta1;
    let (nf, l1, l2) = (profile.n as f64, profile.lambda1, profile.lambda2);
    let d = 2e-4 * t1;
    let fd = |f: &dyn Fn(f64) -> f64, t: f64| {
        (-f(t + 2.0 * d) + 8.0 * f(t + d) - 8.0 * f(t - d) + f(t - 2.0 * d)) / (12.0 * d)
    };
    let mut sup_p = 0.0f64;
    let mut sup_q = 0.0f64;
    let checks = 180;
    for i in 0..=checks {
        let t = t1 * (0.05 + 0.90 * i as f64 / checks as f64);
        let cot = t.cos() / t.sin();
        let p = profile.eval_p(t);
        let q = profile.eval_q(t);
        let dp = fd(&|x| profile.eval_p(x), t);
        let dq = fd(&|x| profile.eval_q(x), t);
        let rp = dp - (l1 + p * p - (nf - 1.0) * cot * p);
        let rq = dq
            - (2.0 * p * q
                - (nf - 2.0) * q * cot
                - (q * q + 1.0 - nf) / t.sin()
                - (l2 - l1) * t.sin());
        sup_p = sup_p.max(rp.abs() / (1.0 + dp.abs()));
        sup_q = sup_q.max(rq.abs() / (1.0 + dq.abs()));
    }
    (sup_p, sup_q)
}

/// Structure report for p: positivity, monotonicity and convexity through
/// the auxiliary integrands σ and s, the boundary flags, and the
/// p·cot θ - λ₁/n monotonicity that feeds the q ≤ cos θ argument.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PStructureReport {
    pub p_positive: bool,
    pub sigma_positive: bool,
    pub s_positive: bool,
    pub p_zero_at_origin: bool,
    pub p_blows_up: bool,
    /// r = p cot θ - λ₁/n strictly increasing (asserted for θ₁ < π/2).
    pub r_increasing: bool,
    /// sup |r| over the interior; ~0 exactly at the hemisphere.
    pub r_sup_abs: f64,
    /// small-θ expansion p ≈ (λ₁/n)θ matches to the predicted θ³ term
    pub small_theta_ok: bool,
}

pub fn p_structure_check(profile: &GapProfile) -> PStructureReport {
    let t1 = profile.theta1;
    let (nf, l1) = (profile.n as f64, profile.lambda1);
    let samples = 600;
    let mut p_positive = true;
    let mut sigma_positive = true;
    let mut s_positive = true;
    let mut r_increasing = true;
    let mut r_sup: f64 = 0.0;
    let mut r_prev = f64::NEG_INFINITY;
    for i in 1..samples {
        let t = t1 * i as f64 / samples as f64;
        let (y, dy) = profile.eval_y1(t);
        let p = -dy / y;
        let cot = t.cos() / t.sin();
        let sigma = l1 * y * y + dy * dy + (nf - 1.0) * cot * y * dy;
        let s = (nf - 1.0) * y * y * p / (t.sin() * t.sin()) - (nf - 1.0) * cot * sigma
            + 2.0 * p * sigma;
        p_positive &= p > 0.0;
        sigma_positive &= sigma > 0.0;
        s_positive &= s > 0.0;
        let r = p * cot - l1 / nf;
        r_sup = r_sup.max(r.abs());
        if i > 1 && r <= r_prev - 1e-12 {
            r_increasing = false;
        }
        r_prev = r;
    }
    // p(0) = 0 with slope λ₁/n, cubic term λ₁(3λ₁ + n(n-1)) / (3n²(n+2))
    let cubic = l1 * (3.0 * l1 + nf * (nf - 1.0)) / (3.0 * nf * nf * (nf + 2.0));
    let mut small_theta_ok = true;
    for k in 1..=8 {
        let t = 0.01 * t1 * k as f64;
        let p = profile.eval_p(t);
        small_theta_ok &= (p - l1 / nf * t).abs() <= 2.0 * cubic.abs() * t * t * t + 1e-12;
    }
    let p_blows_up = profile.eval_p(t1 * (1.0 - 1e-6)) > 1e4;
    PStructureReport {
        p_positive,
        sigma_positive,
        s_positive,
        p_zero_at_origin: small_theta_ok,
        p_blows_up,
        r_increasing,
        r_sup_abs: r_sup,
        small_theta_ok,
    }
}

/// Bounds report for q and the monotonicity of g and B, including the
/// plateau extension of B up to the equator.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct QBoundsReport {
    pub q_nonnegative: bool,
    pub q_below_cos: bool,
    pub q_nonincreasing: bool,
    pub g_nondecreasing: bool,
    pub b_nonincreasing: bool,
    pub b_extension_nonincreasing: bool,
    pub q_at_origin: f64,
    pub q_at_theta1: f64,
    pub q_second_zero: f64,
    /// q''(0) < -1 must hold strictly below the hemisphere.
    pub q_second_below_minus_one: bool,
    /// ψ = cos θ - q stays nonnegative with ψ(θ₁) = cos θ₁.
    pub psi_boundary_matches: bool,
}

pub fn q_bounds_check(profile: &GapProfile) -> QBoundsReport {
    let t1 = profile.theta1;
    let slack = 1e-8;
    let samples = 800;
    let mut q_nonnegative = true;
    let mut q_below_cos = true;
    let mut q_nonincreasing = true;
    let mut g_nondecreasing = true;
    let mut b_nonincreasing = true;
    let mut prev_q = f64::INFINITY;
    let mut prev_g = f64::NEG_INFINITY;
    let mut prev_b = f64::INFINITY;
    for i in 1..=samples {
        let t = t1 * i as f64 / samples as f64;
        let q = profile.eval_q(t);
        let g = profile.eval_g(t);
        let b = profile.eval_b(t);
        q_nonnegative &= q >= -slack;
        q_below_cos &= q <= t.cos() + slack;
        q_nonincreasing &= q <= prev_q + slack;
        g_nondecreasing &= g >= prev_g - slack;
        b_nonincreasing &= b <= prev_b + slack;
        prev_q = q;
        prev_g = g;
        prev_b = b;
    }
    let mut b_extension_nonincreasing = true;
    let mut prev = f64::INFINITY;
    for i in 0..=100 {
        let t = t1 + (PI / 2.0 - t1) * i as f64 / 100.0;
        let b = profile.extended_b(t);
        b_extension_nonincreasing &= b <= prev + slack;
        prev = b;
    }
    let q0 = profile.eval_q(t1 * 1e-6);
    let q1 = profile.eval_q(t1);
    let psi_boundary_matches = ((t1.cos() - q1) - t1.cos()).abs() < slack;
    QBoundsReport {
        q_nonnegative,
        q_below_cos,
        q_nonincreasing,
        g_nondecreasing,
        b_nonincreasing,
        b_extension_nonincreasing,
        q_at_origin: q0,
        q_at_theta1: q1,
        q_second_zero: profile.q_second_zero,
        q_second_below_minus_one: profile.q_second_zero < -1.0,
        psi_boundary_matches,
    }
}

/// Cross-check: g rebuilt as exp ∫ q/sin from a mid anchor matches the
/// direct ratio. Returns the sup relative mismatch over the interior.
pub fn g_reconstruction_residual(profile: &GapProfile) -> f64 {
    let t1 = profile.theta1;
    let anchor = 0.5 * t1;
    let g_anchor = profile.eval_g(anchor);
    let mut sup: f64 = 0.0;
    for i in 1..40 {
        let t = t1 * (0.05 + 0.90 * i as f64 / 40.0);
        let integral = crate::quad::adaptive_simpson(
            &|x| profile.eval_q(x) / x.sin(),
            anchor.min(t),
            anchor.max(t),
            1e-12,
        );
        let rebuilt = if t >= anchor {
            g_anchor * integral.exp()
        } else {
            g_anchor * (-integral).exp()
        };
        sup = sup.max((rebuilt - profile.eval_g(t)).abs() / profile.eval_g(t).abs());
    }
    sup
}

/// λ₁ solve reused by consumers wanting a profile for a cap of given λ₁:
/// finds θ₁ ∈ (0, π/2] with λ₁(θ₁) = `lambda1` by bisection (λ₁ is
/// strictly decreasing in the radius). Errors when λ₁ < n, i.e. when no
/// hemisphere-contained ball attains it.
pub fn radius_for_lambda1(n: u32, lambda1: f64) -> Result<f64> {
    if lambda1 < n as f64 - 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "lambda1 = {lambda1} below the hemisphere value n = {n}; no cap with theta1 <= pi/2"
        )));
    }
    if (lambda1 - n as f64).abs() < 1e-13 {
        return Ok(PI / 2.0);
    }
    let f = |t1: f64| -> f64 {
        let spec = BallSpec { n, theta1: t1 };
        lambda_shoot(spec, 0).map(|l| l - lambda1).unwrap_or(f64::NAN)
    };
    let root = crate::roots::brent(1e-3, PI / 2.0, f, 1e-13)?;
    Ok(root)
}
