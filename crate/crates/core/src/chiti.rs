//! One-crossing comparison between the decreasing rearrangement of a
//! domain's first eigenfunction and the first eigenfunction of the
//! equal-λ₁ geodesic ball, both viewed as functions of enclosed volume s.
//! The ball profile satisfies the volume-coordinate integral equation
//!
//! ```text
//! -dv₁/ds = λ₁ n⁻² C_n⁻² (sin θ(s))^{2-2n} ∫₀^s v₁(s') ds'
//! ```
//!
//! with equality; admissible rearranged profiles satisfy it with ≤.

use crate::ball::lambda_shoot;
use crate::error::{Error, Result};
use crate::quad::adaptive_simpson;
use crate::radial::{solve_radial, BallSpec, ModeParams};
use crate::rearrange::{
    cap_volume, decreasing_rearrangement, theta_of_volume, unit_ball_volume, DomainMeasure,
    RearrangedProfile,
};
use serde::Serialize;

/// First ball eigenfunction tabulated against enclosed volume.
#[derive(Debug, Clone)]
pub struct V1Profile {
    pub n: u32,
    pub theta1: f64,
    pub lambda1: f64,
    /// ball volume |B|
    pub total_volume: f64,
    /// ∫₀^{|B|} v₁² ds under the solver normalization v₁(0) = 1
    pub square_integral: f64,
    s_table: Vec<f64>,
    v_table: Vec<f64>,
}

impl V1Profile {
    pub fn value_at(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return self.v_table[0];
        }
        if s >= self.total_volume {
            return 0.0;
        }
        let idx = self.s_table.partition_point(|&x| x < s).max(1);
        let (s0, s1) = (self.s_table[idx - 1], self.s_table[idx]);
        let w = (s - s0) / (s1 - s0);
        self.v_table[idx - 1] * (1.0 - w) + self.v_table[idx] * w
    }
}

/// Build v₁(s) for the ball of radius θ₁, resolving the reparameterization
/// s = A(θ) on `points` nodes.
pub fn v1_volume_profile(spec: BallSpec, points: usize) -> Result<V1Profile> {
    let lambda1 = lambda_shoot(spec, 0)?;
    v1_volume_profile_for(spec, lambda1, points)
}

/// Same but reusing a known λ₁ (callers matching a domain's λ₁).
pub fn v1_volume_profile_for(spec: BallSpec, lambda1: f64, points: usize) -> Result<V1Profile> {
    let sol = solve_radial(ModeParams::new(spec.n, 0, lambda1)?, spec.theta1)?;
    let n = spec.n;
    let ncn = n as f64 * unit_ball_volume(n);
    let mut s_table = Vec::with_capacity(points + 1);
    let mut v_table = Vec::with_capacity(points + 1);
    // cumulative volume by the Hermite rule: A' = nC_n sin^{n-1}θ exactly
    let mut acc = 0.0;
    let mut prev_theta = 0.0;
    let weight = |t: f64| ncn * t.sin().powi(n as i32 - 1);
    let dweight =
        |t: f64| ncn * (n as f64 - 1.0) * t.sin().powi(n as i32 - 2) * t.cos();
    s_table.push(0.0);
    v_table.push(1.0);
    for i in 1..=points {
        let t = spec.theta1 * i as f64 / points as f64;
        let h = t - prev_theta;
        acc += 0.5 * h * (weight(prev_theta) + weight(t))
            + h * h / 12.0 * (dweight(prev_theta) - dweight(t));
        s_table.push(acc);
        v_table.push(if i == points { 0.0 } else { sol.eval(t).0 });
        prev_theta = t;
    }
    let square_integral = adaptive_simpson(
        &|t: f64| {
            if t <= 0.0 {
                0.0
            } else {
                let (v, _) = sol.eval(t);
                v * v * weight(t)
            }
        },
        0.0,
        spec.theta1,
        1e-13 * acc,
    );
    Ok(V1Profile {
        n,
        theta1: spec.theta1,
        lambda1,
        total_volume: acc,
        square_integral,
        s_table,
        v_table,
    })
}

/// Max absolute residual of the volume-coordinate integral equation for
/// the ball profile itself, normalized by the sup of |dv/ds|.
pub fn v1_integral_equation_residual(spec: BallSpec) -> Result<f64> {
    let lambda1 = lambda_shoot(spec, 0)?;
    let sol = solve_radial(ModeParams::new(spec.n, 0, lambda1)?, spec.theta1)?;
    let n = spec.n as f64;
    let ncn = n * unit_ball_volume(spec.n);
    // in θ coordinates the equation reads
    //   -y₁'(θ) sin^{n-1}θ = λ₁ ∫₀^θ y₁ sin^{n-1} t dt
    let rhs_integral = |t: f64| {
        adaptive_simpson(
            &|x: f64| {
                if x <= 0.0 {
                    0.0
                } else {
                    sol.eval(x).0 * x.sin().powi(spec.n as i32 - 1)
                }
            },
            0.0,
            t,
            1e-13,
        )
    };
    let mut sup_residual = 0.0f64;
    let mut sup_scale = 0.0f64;
    for i in 1..=40 {
        let t = spec.theta1 * i as f64 / 41.0;
        let (_, dv) = sol.eval(t);
        let lhs = -dv * t.sin().powi(spec.n as i32 - 1);
        let rhs = lambda1 * rhs_integral(t);
        sup_residual = sup_residual.max((lhs - rhs).abs());
        sup_scale = sup_scale.max(lhs.abs());
    }
    let _ = ncn;
    Ok(sup_residual / sup_scale.max(1e-300))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum ChitiVerdict {
    /// Profiles agree within the noise slack; the domain is the ball.
    Identical,
    /// One crossing at volume `s1` (radius `r1`), ball profile on top first.
    OneCrossing { s1: f64, r1: f64 },
}

/// Comparison result; `samples` carries (s, u₁^#, v₁) rows for export.
#[derive(Debug, Clone, Serialize)]
pub struct ChitiReport {
    pub n: u32,
    pub theta1: f64,
    pub lambda1: f64,
    pub verdict: ChitiVerdict,
    pub u_sharp_at_zero: f64,
    pub v1_at_zero: f64,
    /// v₁ ≥ u₁^# before the crossing and ≤ after, up to slack.
    pub sign_pattern_ok: bool,
    pub slack: f64,
    /// |∫(u₁^#)² - ∫v₁²| after rescaling (should be ~0 by construction).
    pub normalization_residual: f64,
    #[serde(skip)]
    pub samples: Vec<(f64, f64, f64)>,
}

impl ChitiReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,u_sharp,v1\n");
        for &(s, u, v) in &self.samples {
            out.push_str(&format!("{s:.17e},{u:.17e},{v:.17e}\n"));
        }
        out
    }

    pub fn verdict_json(&self) -> serde_json::Value {
        serde_json::json!({
            "schema": 1,
            "n": self.n,
            "theta1": self.theta1,
            "lambda1": self.lambda1,
            "verdict": match self.verdict {
                ChitiVerdict::Identical => serde_json::json!({"kind": "identical"}),
                ChitiVerdict::OneCrossing { s1, r1 } =>
                    serde_json::json!({"kind": "one_crossing", "s1": s1, "r1": r1}),
            },
            "u_sharp_at_zero": self.u_sharp_at_zero,
            "v1_at_zero": self.v1_at_zero,
            "sign_pattern_ok": self.sign_pattern_ok,
            "slack": self.slack,
            "normalization_residual": self.normalization_residual,
        })
    }
}

/// Rescale `u_dm` to the ball's L² mass, rearrange it, and locate the
/// crossings of v₁ − u₁^#. `slack_rel` (relative to sup v₁) absorbs mesh
/// noise when the data comes from a discrete eigensolve; more than one
/// genuine crossing is a hard failure of the comparison property.
pub fn chiti_crossing(
    u_dm: &DomainMeasure,
    spec: BallSpec,
    lambda1: f64,
    slack_rel: f64,
) -> Result<ChitiReport> {
    let v1 = v1_volume_profile_for(spec, lambda1, 4000)?;
    let u_mass: f64 = u_dm.lp_sum(2);
    if u_mass <= 0.0 {
        return Err(Error::InvalidParameter("eigenfunction data has zero mass".into()));
    }
    let factor = (v1.square_integral / u_mass).sqrt();
    let u_sharp = decreasing_rearrangement(&u_dm.scaled(factor));
    let normalization_residual =
        (u_sharp.square_integral() - v1.square_integral).abs() / v1.square_integral;

    let v_sup = v1.value_at(0.0);
    let slack = slack_rel * v_sup;
    let s_max = v1.total_volume.min(u_sharp.total_measure());
    let samples_n = 2000;
    let mut samples = Vec::with_capacity(samples_n);
    let mut crossings: Vec<f64> = Vec::new();
    let mut last_sign = 0i8;
    let mut sup_abs_diff = 0.0f64;
    let mut prev_s = 0.0f64;
    for i in 0..samples_n {
        let s = s_max * (i as f64 + 0.5) / samples_n as f64;
        let u = u_sharp.value_at(s);
        let v = v1.value_at(s);
        let d = v - u;
        sup_abs_diff = sup_abs_diff.max(d.abs());
        if i % (samples_n / 400).max(1) == 0 {
            samples.push((s, u, v));
        }
        let sign = if d > slack {
            1
        } else if d < -slack {
            -1
        } else {
            0
        };
        if sign != 0 {
            if last_sign != 0 && sign != last_sign {
                crossings.push(0.5 * (prev_s + s));
            }
            last_sign = sign;
            prev_s = s;
        }
    }
    let u0 = u_sharp.value_at(0.0);
    let v0 = v1.value_at(0.0);
    if sup_abs_diff < slack {
        return Ok(ChitiReport {
            n: spec.n,
            theta1: spec.theta1,
            lambda1,
            verdict: ChitiVerdict::Identical,
            u_sharp_at_zero: u0,
            v1_at_zero: v0,
            sign_pattern_ok: true,
            slack,
            normalization_residual,
            samples,
        });
    }
    match crossings.len() {
        0 | 1 => {
            // a single crossing (or a one-signed difference that never
            // recrosses before s_max) with the ball profile on top first
            let s1 = crossings.first().copied().unwrap_or(s_max);
            let r1 = theta_of_volume(spec.n, 1.0, s1.min(v1.total_volume))?;
            let sign_pattern_ok = v0 >= u0 - slack;
            Ok(ChitiReport {
                n: spec.n,
                theta1: spec.theta1,
                lambda1,
                verdict: ChitiVerdict::OneCrossing { s1, r1 },
                u_sharp_at_zero: u0,
                v1_at_zero: v0,
                sign_pattern_ok,
                slack,
                normalization_residual,
                samples,
            })
        }
        k => Err(Error::MultipleCrossings { count: k }),
    }
}

/// Violation report for the rearranged differential inequality.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ChitiInequalityReport {
    /// max over the grid of (-du₁^#/ds - RHS); positive means violated
    pub max_violation: f64,
    /// sup of the RHS, for scaling tolerances
    pub rhs_sup: f64,
    pub bins: usize,
}

/// Check -du₁^#/ds ≤ λ₁ n⁻²C_n⁻² (sin θ(s))^{2-2n} ∫₀^s u₁^# on a binned
/// s-grid (first 2% skipped: the volume coordinate has an integrable
/// slope singularity at s = 0 for n ≥ 3).
pub fn chiti_inequality_residual(
    u_dm: &DomainMeasure,
    spec: BallSpec,
    lambda1: f64,
    bins: usize,
) -> Result<ChitiInequalityReport> {
    let v1 = v1_volume_profile_for(spec, lambda1, 2000)?;
    let factor = (v1.square_integral / u_dm.lp_sum(2)).sqrt();
    let u_sharp = decreasing_rearrangement(&u_dm.scaled(factor));
    inequality_residual_of_profile(&u_sharp, spec.n, lambda1, bins)
}

/// Same check for an already-rearranged profile (used by sensitivity tests).
pub fn inequality_residual_of_profile(
    u_sharp: &RearrangedProfile,
    n: u32,
    lambda1: f64,
    bins: usize,
) -> Result<ChitiInequalityReport> {
    let total = u_sharp.total_measure();
    let cn = unit_ball_volume(n);
    let coeff = lambda1 / (n as f64 * n as f64 * cn * cn);
    let ds = total / bins as f64;
    let mean = |b: usize| {
        (u_sharp.cumulative_at((b + 1) as f64 * ds) - u_sharp.cumulative_at(b as f64 * ds)) / ds
    };
    let mut max_violation = f64::NEG_INFINITY;
    let mut rhs_sup = 0.0f64;
    let skip = (bins / 50).max(1);
    let mut prev_mean = mean(skip - 1);
    for b in skip..bins {
        let m = mean(b);
        let s = b as f64 * ds;
        let slope = (prev_mean - m) / ds; // ≈ -du/ds at the bin boundary
        prev_mean = m;
        let theta = theta_of_volume(n, 1.0, s.min(cap_volume(n, 1.0, std::f64::consts::PI)?))?;
        let rhs = coeff * theta.sin().powi(2 - 2 * n as i32) * u_sharp.cumulative_at(s);
        rhs_sup = rhs_sup.max(rhs);
        max_violation = max_violation.max(slope - rhs);
    }
    Ok(ChitiInequalityReport {
        max_violation,
        rhs_sup,
        bins,
    })
}

/// Exact radial samples of the ball's own eigenfunction as value/measure
/// cells; the self-comparison oracle for the Identical verdict.
pub fn ball_domain_measure(spec: BallSpec, lambda1: f64, cells: usize) -> Result<DomainMeasure> {
    let sol = solve_radial(ModeParams::new(spec.n, 0, lambda1)?, spec.theta1)?;
    let mut entries = Vec::with_capacity(cells);
    for i in 0..cells {
        let t0 = spec.theta1 * i as f64 / cells as f64;
        let t1 = spec.theta1 * (i + 1) as f64 / cells as f64;
        let tm = 0.5 * (t0 + t1);
        let measure = cap_volume(spec.n, 1.0, t1)? - cap_volume(spec.n, 1.0, t0)?;
        entries.push((sol.eval(tm).0.max(0.0), measure));
    }
    DomainMeasure::new(entries)
}
