//! The n-dimensional radial family u_m(θ; λ) solving
//!
//! ```text
//! -y'' - (n-1) cot θ · y' + m(m+n-2) csc²θ · y = λ y      on (0, π),
//! ```
//!
//! the n-sphere analog of the associated Legendre equation. θ = 0 is a
//! regular singular point; solutions are seeded there with a Frobenius
//! series u_m = c_m θ^m (1 + a₁θ² + …) and continued by adaptive
//! Runge–Kutta. The raising/lowering/recursion identities between
//! consecutive m are exposed with residual checks.

use crate::error::{Error, Result};
use crate::ode::{self, Trajectory};
use crate::quad::{self, hermite_cumulative};
use crate::roots::bisect;

/// Geodesic ball (polar cap) on the n-sphere: dimension and radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallSpec {
    pub n: u32,
    pub theta1: f64,
}

impl BallSpec {
    pub fn new(n: u32, theta1: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!(
                "dimension n must be >= 2, got {n}"
            )));
        }
        if !(theta1 > 0.0 && theta1 < std::f64::consts::PI) {
            return Err(Error::InvalidParameter(format!(
                "geodesic radius must lie in (0, pi), got {theta1}"
            )));
        }
        Ok(Self { n, theta1 })
    }
}

/// Parameters of one radial mode: dimension n, angular index m, eigenparameter λ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeParams {
    pub n: u32,
    pub m: u32,
    pub lambda: f64,
}

impl ModeParams {
    pub fn new(n: u32, m: u32, lambda: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!(
                "dimension n must be >= 2, got {n}"
            )));
        }
        if !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "lambda must be finite, got {lambda}"
            )));
        }
        Ok(Self { n, m, lambda })
    }

    /// Coefficient m(m+n-2) of the csc²θ potential term.
    pub fn centrifugal(&self) -> f64 {
        let (m, n) = (self.m as f64, self.n as f64);
        m * (m + n - 2.0)
    }

    /// Leading Frobenius constant c_m, from c₀ = 1 and
    /// c_{j+1} = [λ - j(j+n-1)] / (2j+n) · c_j.
    pub fn leading_coefficient(&self) -> f64 {
        let n = self.n as f64;
        let mut c = 1.0;
        for j in 0..self.m {
            let jf = j as f64;
            c *= (self.lambda - jf * (jf + n - 1.0)) / (2.0 * jf + n);
        }
        c
    }
}

/// Sampled radial solution on a strictly increasing θ-grid.
#[derive(Debug, Clone)]
pub struct RadialFunction {
    pub mode: ModeParams,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub derivs: Vec<f64>,
}

impl RadialFunction {
    fn check_common_grid(&self, other: &Self) -> Result<()> {
        if self.grid.len() != other.grid.len()
            || self
                .grid
                .iter()
                .zip(&other.grid)
                .any(|(a, b)| (a - b).abs() > 1e-14)
        {
            return Err(Error::GridMismatch(
                "radial functions sampled on different grids".into(),
            ));
        }
        Ok(())
    }
}

/// Coefficients of the Laurent tails of cot θ and csc²θ about 0:
/// cot θ = 1/θ + Σ g_j θ^{2j-1},  csc²θ = 1/θ² + Σ h_j θ^{2j-2}
/// with h_j = -(2j-1) g_j. Eight terms keep the truncation far below
/// f64 resolution for θ ≤ 10⁻² seeds.
const COT_TAIL: [f64; 8] = [
    -1.0 / 3.0,
    -1.0 / 45.0,
    -2.0 / 945.0,
    -1.0 / 4725.0,
    -2.0 / 93555.0,
    -1382.0 / 638512875.0,
    -4.0 / 18243225.0,
    -3617.0 / 325641566250.0,
];

/// Frobenius expansion u_m = Σ_k b_k θ^{m+2k} with b₀ = c_m.
#[derive(Debug, Clone)]
struct FrobeniusSeries {
    m: f64,
    coeffs: Vec<f64>,
}

impl FrobeniusSeries {
    fn new(mode: ModeParams, order: usize) -> Self {
        let (n, m) = (mode.n as f64, mode.m as f64);
        let mm = mode.centrifugal();
        let mut b = vec![0.0; order + 1];
        b[0] = mode.leading_coefficient();
        for k in 1..=order {
            let kf = k as f64;
            // indicial denominator; always nonzero for k >= 1
            let dk = -2.0 * kf * (2.0 * m + 2.0 * kf + n - 2.0);
            let mut rhs = mode.lambda * b[k - 1];
            for (j, gj) in COT_TAIL.iter().enumerate().take(k) {
                let j1 = j + 1;
                if j1 > k {
                    break;
                }
                let hj = -(2.0 * j1 as f64 - 1.0) * gj;
                let prev = b[k - j1];
                rhs += (n - 1.0) * gj * (m + 2.0 * (k - j1) as f64) * prev - mm * hj * prev;
            }
            b[k] = rhs / dk;
        }
        Self { m, coeffs: b }
    }

    fn eval(&self, theta: f64) -> (f64, f64) {
        let b0 = self.coeffs[0];
        if theta == 0.0 {
            let value = if self.m == 0.0 { b0 } else { 0.0 };
            let deriv = if self.m == 1.0 { b0 } else { 0.0 };
            return (value, deriv);
        }
        let t2 = theta * theta;
        let mut val = 0.0;
        let mut der = 0.0;
        // Horner over θ² for the value and the term-wise derivative
        for (k, &bk) in self.coeffs.iter().enumerate().rev() {
            let p = self.m + 2.0 * k as f64;
            val = val * t2 + bk;
            der = der * t2 + bk * p;
        }
        let lead = theta.powf(self.m);
        // the p = 0 term drops out of the derivative, so dividing by θ is
        // safe for every m
        (val * lead, der * lead / theta)
    }

    /// Magnitude of the first omitted term, as a truncation bound.
    fn truncation_bound(&self, theta: f64) -> f64 {
        let k = self.coeffs.len();
        let last = *self.coeffs.last().unwrap();
        (last * theta * theta).abs() * theta.powf(self.m + 2.0 * (k - 1) as f64)
    }
}

/// Truncated Frobenius seed (value, derivative) of u_m at `theta_seed`.
///
/// `order` counts the retained θ² corrections beyond the leading term.
pub fn frobenius_seed(mode: ModeParams, order: usize, theta_seed: f64) -> Result<(f64, f64)> {
    if !(theta_seed > 0.0 && theta_seed <= 1e-3) {
        return Err(Error::InvalidParameter(format!(
            "theta_seed must lie in (0, 1e-3], got {theta_seed}"
        )));
    }
    if order < 2 {
        return Err(Error::InvalidParameter(format!(
            "series order must be >= 2, got {order}"
        )));
    }
    Ok(FrobeniusSeries::new(mode, order).eval(theta_seed))
}

/// Solver knobs. The defaults are tighter than strictly needed so that
/// downstream finite-difference cross-checks see a quiet noise floor.
#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub theta_seed: f64,
    pub series_order: usize,
    pub rtol: f64,
    pub atol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            theta_seed: 1e-3,
            series_order: 6,
            rtol: 1e-12,
            atol: 1e-14,
        }
    }
}

/// Dense radial solution: Frobenius series below the seed point, adaptive
/// Runge–Kutta trajectory above it.
#[derive(Debug, Clone)]
pub struct RadialSolution {
    pub mode: ModeParams,
    pub theta_seed: f64,
    series: FrobeniusSeries,
    traj: Trajectory,
}

impl RadialSolution {
    pub fn theta_end(&self) -> f64 {
        self.traj.t_end()
    }

    /// (u, u') at any θ in (0, theta_end].
    pub fn eval(&self, theta: f64) -> (f64, f64) {
        if theta <= self.theta_seed {
            self.series.eval(theta)
        } else {
            let y = self.traj.eval(theta);
            (y[0], y[1])
        }
    }

    /// Sample onto a caller-supplied strictly increasing grid.
    pub fn sample(&self, grid: &[f64]) -> Result<RadialFunction> {
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "sample grid must be strictly increasing".into(),
            ));
        }
        if let (Some(&first), Some(&last)) = (grid.first(), grid.last()) {
            if first <= 0.0 || last > self.theta_end() + 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "grid [{first}, {last}] outside solved range (0, {}]",
                    self.theta_end()
                )));
            }
        }
        let mut values = Vec::with_capacity(grid.len());
        let mut derivs = Vec::with_capacity(grid.len());
        for &t in grid {
            let (u, du) = self.eval(t);
            values.push(u);
            derivs.push(du);
        }
        Ok(RadialFunction {
            mode: self.mode,
            grid: grid.to_vec(),
            values,
            derivs,
        })
    }

    /// All zeros of u in the solved range, each refined by bisection on the
    /// dense interpolant to 1e-13.
    pub fn zeros(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for step in &self.traj.steps {
            let (a, b) = (step.y0[0], step.y1[0]);
            if a == 0.0 {
                continue;
            }
            if a.signum() != b.signum() || b == 0.0 {
                if let Ok(z) = bisect(step.t0, step.t1, |t| step.eval(t)[0], 1e-13) {
                    out.push(z);
                }
            }
        }
        out
    }

    /// Truncation bound of the seed series at the hand-off point.
    pub fn seed_truncation(&self) -> f64 {
        self.series.truncation_bound(self.theta_seed)
    }
}

/// Integrate u_m from the Frobenius seed out to `theta_end` (< π).
pub fn solve_radial(mode: ModeParams, theta_end: f64) -> Result<RadialSolution> {
    solve_radial_with(mode, theta_end, SolverOptions::default())
}

pub fn solve_radial_with(
    mode: ModeParams,
    theta_end: f64,
    opts: SolverOptions,
) -> Result<RadialSolution> {
    if !(theta_end > 0.0 && theta_end < std::f64::consts::PI) {
        return Err(Error::InvalidParameter(format!(
            "theta_end must lie in (0, pi), got {theta_end}"
        )));
    }
    // keep λ θ_seed² small so the series converges fast, and keep the seed
    // well inside the integration range
    let seed = opts
        .theta_seed
        .min(0.3 / mode.lambda.abs().max(1.0).sqrt())
        .min(0.1 * theta_end);
    let series = FrobeniusSeries::new(mode, opts.series_order);
    let (u0, du0) = series.eval(seed);
    let (n, mm, lambda) = (mode.n as f64, mode.centrifugal(), mode.lambda);
    let rhs = move |t: f64, y: [f64; 2]| {
        let s = t.sin();
        let c = t.cos();
        let cot = c / s;
        let csc2 = 1.0 / (s * s);
        [y[1], -(n - 1.0) * cot * y[1] + (mm * csc2 - lambda) * y[0]]
    };
    let traj = ode::integrate(rhs, seed, [u0, du0], theta_end, opts.rtol, opts.atol)?;
    Ok(RadialSolution {
        mode,
        theta_seed: seed,
        series,
        traj,
    })
}

/// Sample u_m on `grid` (all of which must lie in (0, π)).
pub fn eval_um(mode: ModeParams, grid: &[f64]) -> Result<RadialFunction> {
    let last = *grid
        .last()
        .ok_or_else(|| Error::InvalidParameter("empty grid".into()))?;
    solve_radial(mode, last)?.sample(grid)
}

/// Raising relation: u_{m+1} = -u_m' + m cot θ · u_m, applied pointwise.
/// Output derivatives come from the differentiated relation plus the ODE.
pub fn raise(u: &RadialFunction) -> RadialFunction {
    let mode = u.mode;
    let (m, lambda) = (mode.m as f64, mode.lambda);
    let mut values = Vec::with_capacity(u.grid.len());
    let mut derivs = Vec::with_capacity(u.grid.len());
    for ((&t, &v), &dv) in u.grid.iter().zip(&u.values).zip(&u.derivs) {
        let (s, c) = (t.sin(), t.cos());
        let cot = c / s;
        let csc2 = 1.0 / (s * s);
        let ddv = -(mode.n as f64 - 1.0) * cot * dv + (mode.centrifugal() * csc2 - lambda) * v;
        values.push(-dv + m * cot * v);
        derivs.push(-ddv + m * (cot * dv - csc2 * v));
    }
    RadialFunction {
        mode: ModeParams {
            m: mode.m + 1,
            ..mode
        },
        grid: u.grid.clone(),
        values,
        derivs,
    }
}

/// Lowering relation: returns [λ - (m-1)(m+n-2)] u_{m-1}
/// = u_m' + (m+n-2) cot θ · u_m, applied pointwise. Rejects m = 0.
pub fn lower(u: &RadialFunction) -> Result<RadialFunction> {
    let mode = u.mode;
    if mode.m == 0 {
        return Err(Error::InvalidParameter(
            "lowering relation needs m >= 1".into(),
        ));
    }
    let (m, n, lambda) = (mode.m as f64, mode.n as f64, mode.lambda);
    let k = m + n - 2.0;
    let mut values = Vec::with_capacity(u.grid.len());
    let mut derivs = Vec::with_capacity(u.grid.len());
    for ((&t, &v), &dv) in u.grid.iter().zip(&u.values).zip(&u.derivs) {
        let (s, c) = (t.sin(), t.cos());
        let cot = c / s;
        let csc2 = 1.0 / (s * s);
        let ddv = -(n - 1.0) * cot * dv + (mode.centrifugal() * csc2 - lambda) * v;
        values.push(dv + k * cot * v);
        derivs.push(ddv + k * (cot * dv - csc2 * v));
    }
    Ok(RadialFunction {
        mode: ModeParams {
            m: mode.m - 1,
            ..mode
        },
        grid: u.grid.clone(),
        values,
        derivs,
    })
}

/// Sup-norm residual of the three-term recursion
/// u_{m+1} - (2m+n-2) cot θ · u_m + [λ - (m-1)(m+n-2)] u_{m-1} = 0
/// for consecutive modes on a common grid.
pub fn recursion_residual(
    u_prev: &RadialFunction,
    u_mid: &RadialFunction,
    u_next: &RadialFunction,
) -> Result<f64> {
    u_mid.check_common_grid(u_prev)?;
    u_mid.check_common_grid(u_next)?;
    let (n, m, lambda) = (u_mid.mode.n, u_mid.mode.m, u_mid.mode.lambda);
    if u_prev.mode.m + 1 != m || u_next.mode.m != m + 1 {
        return Err(Error::InvalidParameter(
            "recursion_residual expects modes m-1, m, m+1".into(),
        ));
    }
    if u_prev.mode.n != n || u_next.mode.n != n {
        return Err(Error::InvalidParameter("dimension mismatch".into()));
    }
    if (u_prev.mode.lambda - lambda).abs() > 1e-14 || (u_next.mode.lambda - lambda).abs() > 1e-14 {
        return Err(Error::InvalidParameter("lambda mismatch".into()));
    }
    let (nf, mf) = (n as f64, m as f64);
    let prefactor = lambda - (mf - 1.0) * (mf + nf - 2.0);
    let mut sup: f64 = 0.0;
    for i in 0..u_mid.grid.len() {
        let cot = u_mid.grid[i].cos() / u_mid.grid[i].sin();
        let r = u_next.values[i] - (2.0 * mf + nf - 2.0) * cot * u_mid.values[i]
            + prefactor * u_prev.values[i];
        sup = sup.max(r.abs());
    }
    Ok(sup)
}

/// Sup-norm residual of the integral identity
/// (sin θ)^{m+n-1} u_{m+1}(θ) = [λ - m(m+n-1)] ∫₀^θ (sin t)^{m+n-1} u_m dt,
/// with the cumulative integral evaluated by Hermite quadrature on the
/// stored grid (plus an adaptive head below the first grid point).
pub fn integral_identity_residual(u_m: &RadialFunction, u_next: &RadialFunction) -> Result<f64> {
    u_m.check_common_grid(u_next)?;
    if u_next.mode.m != u_m.mode.m + 1 || u_next.mode.n != u_m.mode.n {
        return Err(Error::InvalidParameter(
            "integral identity expects consecutive modes".into(),
        ));
    }
    let (n, m, lambda) = (u_m.mode.n as f64, u_m.mode.m as f64, u_m.mode.lambda);
    let p = m + n - 1.0;
    let w: Vec<f64> = u_m
        .grid
        .iter()
        .zip(&u_m.values)
        .map(|(&t, &v)| t.sin().powf(p) * v)
        .collect();
    let dw: Vec<f64> = u_m
        .grid
        .iter()
        .zip(u_m.values.iter().zip(&u_m.derivs))
        .map(|(&t, (&v, &dv))| {
            let s = t.sin();
            p * s.powf(p - 1.0) * t.cos() * v + s.powf(p) * dv
        })
        .collect();
    let mut cumulative = hermite_cumulative(&u_m.grid, &w, &dw);
    // head contribution: integrand vanishes like t^{2m+n-1}, so the series
    // solution integrates cleanly from 0
    let mode = u_m.mode;
    let series = FrobeniusSeries::new(mode, 8);
    let head = quad::adaptive_simpson(
        &|t: f64| {
            if t == 0.0 {
                0.0
            } else {
                t.sin().powf(p) * series.eval(t).0
            }
        },
        0.0,
        u_m.grid[0],
        1e-14,
    );
    for c in &mut cumulative {
        *c += head;
    }
    let prefactor = lambda - m * (m + n - 1.0);
    let mut sup: f64 = 0.0;
    for i in 0..u_m.grid.len() {
        let lhs = u_m.grid[i].sin().powf(p) * u_next.values[i];
        sup = sup.max((lhs - prefactor * cumulative[i]).abs());
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn grid(from: f64, to: f64, count: usize) -> Vec<f64> {
        (0..count)
            .map(|i| from + (to - from) * i as f64 / (count - 1) as f64)
            .collect()
    }

    #[test]
    fn leading_coefficients_follow_recursion() {
        // c0 = 1 for every mode family
        let mode = ModeParams::new(3, 0, 17.3).unwrap();
        assert_eq!(mode.leading_coefficient(), 1.0);
        // c1 = lambda / n
        let mode = ModeParams::new(2, 1, 6.0).unwrap();
        assert_abs_diff_eq!(mode.leading_coefficient(), 3.0, epsilon = 1e-15);
    }

    #[test]
    fn seed_matches_cosine_for_lambda_n() {
        // u0(θ; n) = cos θ in every dimension
        for n in 2..=6 {
            let mode = ModeParams::new(n, 0, n as f64).unwrap();
            let (v, dv) = frobenius_seed(mode, 6, 1e-3).unwrap();
            assert_abs_diff_eq!(v, (1e-3f64).cos(), epsilon = 1e-15);
            assert_abs_diff_eq!(dv, -(1e-3f64).sin(), epsilon = 1e-15);
        }
    }

    #[test]
    fn seed_matches_hemisphere_m1_closed_form() {
        // n=2, m=1, λ=6: u1 = 3 sin θ cos θ with c1 = 3
        let mode = ModeParams::new(2, 1, 6.0).unwrap();
        let t = 1e-3;
        let (v, dv) = frobenius_seed(mode, 6, t).unwrap();
        assert_abs_diff_eq!(v, 3.0 * t.sin() * t.cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(dv, 3.0 * (2.0 * t).cos(), epsilon = 1e-12);
    }

    #[test]
    fn seed_rejects_bad_arguments() {
        let mode = ModeParams::new(2, 0, 2.0).unwrap();
        assert!(frobenius_seed(mode, 6, 0.0).is_err());
        assert!(frobenius_seed(mode, 6, 2e-3).is_err());
        assert!(frobenius_seed(mode, 1, 1e-3).is_err());
    }

    #[test]
    fn eval_um_reproduces_cosine() {
        let mode = ModeParams::new(4, 0, 4.0).unwrap();
        let g = grid(0.05, std::f64::consts::PI - 0.1, 400);
        let u = eval_um(mode, &g).unwrap();
        for (i, &t) in g.iter().enumerate() {
            assert_abs_diff_eq!(u.values[i], t.cos(), epsilon = 1e-10);
            assert_abs_diff_eq!(u.derivs[i], -t.sin(), epsilon = 1e-9);
        }
        // spot value: u0(π/3; 4) = cos(π/3) = 1/2
        let (v, _) = solve_radial(mode, 1.2).unwrap().eval(std::f64::consts::FRAC_PI_3);
        assert_abs_diff_eq!(v, 0.5, epsilon = 1e-10);
    }

    #[test]
    fn eval_um_reproduces_hemisphere_m1() {
        let mode = ModeParams::new(2, 1, 6.0).unwrap();
        let g = grid(0.02, 1.5, 300);
        let u = eval_um(mode, &g).unwrap();
        for (i, &t) in g.iter().enumerate() {
            assert_abs_diff_eq!(u.values[i], 3.0 * t.sin() * t.cos(), epsilon = 1e-10);
        }
        let (v, _) = solve_radial(mode, 1.0)
            .unwrap()
            .eval(std::f64::consts::FRAC_PI_4);
        assert_abs_diff_eq!(v, 1.5, epsilon = 1e-10);
    }

    #[test]
    fn frobenius_leading_behavior_near_zero() {
        for (n, m, lambda) in [(2u32, 1u32, 6.0), (3, 2, 21.0), (5, 1, 14.0)] {
            let mode = ModeParams::new(n, m, lambda).unwrap();
            let sol = solve_radial(mode, 1.0).unwrap();
            let cm = mode.leading_coefficient();
            // the O(θ²) correction shrinks as the sample point moves in
            let mut last = f64::INFINITY;
            for &t in &[1e-3, 3e-4, 1e-4, 1e-5] {
                let (v, _) = sol.eval(t);
                let dev = (v / t.powi(m as i32) - cm).abs();
                assert!(dev <= last + 1e-15 * cm.abs());
                last = dev;
            }
            assert!(last < 1e-8 * cm.abs());
        }
    }

    #[test]
    fn ode_residual_on_refined_subgrid() {
        // pointwise finite-difference residual of the ODE stays below 1e-8;
        // fourth-order stencils on the dense output, derivatives included
        let mode = ModeParams::new(3, 1, 11.7).unwrap();
        let sol = solve_radial(mode, 2.5).unwrap();
        let d = 2e-3;
        for i in 1..60 {
            let t = 0.1 + (2.3 - 0.1) * i as f64 / 60.0;
            let y: Vec<f64> = (-2..=2).map(|k| sol.eval(t + k as f64 * d).0).collect();
            let d1 = (-y[4] + 8.0 * y[3] - 8.0 * y[1] + y[0]) / (12.0 * d);
            let d2 = (-y[4] + 16.0 * y[3] - 30.0 * y[2] + 16.0 * y[1] - y[0]) / (12.0 * d * d);
            let resid = -d2 - 2.0 * (t.cos() / t.sin()) * d1
                + mode.centrifugal() / (t.sin() * t.sin()) * y[2]
                - mode.lambda * y[2];
            assert!(resid.abs() < 1e-8, "residual {resid} at theta {t}");
        }
    }

    #[test]
    fn raise_turns_cosine_into_sine() {
        let mode = ModeParams::new(3, 0, 3.0).unwrap();
        let g = grid(0.05, 2.8, 200);
        let u0 = eval_um(mode, &g).unwrap();
        let u1 = raise(&u0);
        assert_eq!(u1.mode.m, 1);
        for (i, &t) in g.iter().enumerate() {
            assert_abs_diff_eq!(u1.values[i], t.sin(), epsilon = 1e-9);
            assert_abs_diff_eq!(u1.derivs[i], t.cos(), epsilon = 1e-8);
        }
    }

    #[test]
    fn raise_matches_directly_solved_next_mode() {
        for (n, lambda) in [(2u32, 9.5), (4, 17.0), (6, 25.0)] {
            let g = grid(0.05, 2.0, 250);
            let u0 = eval_um(ModeParams::new(n, 0, lambda).unwrap(), &g).unwrap();
            let u1_direct = eval_um(ModeParams::new(n, 1, lambda).unwrap(), &g).unwrap();
            let u1_raised = raise(&u0);
            let sup = u1_direct
                .values
                .iter()
                .zip(&u1_raised.values)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            assert!(sup < 1e-7, "raise mismatch {sup} for n={n}");
        }
    }

    #[test]
    fn lower_recovers_scaled_previous_mode() {
        // hemisphere data: u2 = 3 sin²θ at n=2, λ=6 lowers to 4·u1
        let g = grid(0.05, 1.5, 150);
        let u2 = RadialFunction {
            mode: ModeParams::new(2, 2, 6.0).unwrap(),
            grid: g.clone(),
            values: g.iter().map(|&t| 3.0 * t.sin() * t.sin()).collect(),
            derivs: g.iter().map(|&t| 3.0 * (2.0 * t).sin()).collect(),
        };
        let lowered = lower(&u2).unwrap();
        for (i, &t) in g.iter().enumerate() {
            assert_abs_diff_eq!(
                lowered.values[i],
                4.0 * 3.0 * t.sin() * t.cos(),
                epsilon = 1e-10
            );
        }
        // λ = n, m = 1: u1 = sin θ lowers to n cos θ = λ u0
        let n = 5u32;
        let u1 = eval_um(ModeParams::new(n, 1, n as f64).unwrap(), &g).unwrap();
        let lowered = lower(&u1).unwrap();
        for (i, &t) in g.iter().enumerate() {
            assert_abs_diff_eq!(lowered.values[i], n as f64 * t.cos(), epsilon = 1e-9);
        }
    }

    #[test]
    fn lower_rejects_m0_and_degenerate_prefactor_kills_output() {
        let g = grid(0.1, 1.0, 50);
        let u0 = eval_um(ModeParams::new(3, 0, 5.0).unwrap(), &g).unwrap();
        assert!(lower(&u0).is_err());
        // λ = (m-1)(m+n-2) makes the lowered function vanish identically:
        // m=2, n=3 => λ = 3
        let u2 = eval_um(ModeParams::new(3, 2, 3.0).unwrap(), &g).unwrap();
        let lowered = lower(&u2).unwrap();
        let sup = lowered.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(sup < 1e-9, "expected near-zero output, sup {sup}");
    }

    #[test]
    fn raise_then_lower_scales_by_prefactor() {
        // lower(raise(u_m)) = [λ - m(m+n-1)] u_m
        let mode = ModeParams::new(3, 1, 13.0).unwrap();
        let g = grid(0.05, 1.8, 200);
        let u1 = eval_um(mode, &g).unwrap();
        let round = lower(&raise(&u1)).unwrap();
        // factor is λ - m(m+n-1) with m = 1, n = 3
        let factor = mode.lambda - 1.0 * (1.0 + 3.0 - 1.0);
        for i in 0..g.len() {
            assert_abs_diff_eq!(round.values[i], factor * u1.values[i], epsilon = 1e-8);
        }
    }

    #[test]
    fn recursion_residual_hemisphere_triple() {
        let g = grid(0.05, 1.5, 200);
        let u0 = eval_um(ModeParams::new(2, 0, 6.0).unwrap(), &g).unwrap();
        let u1 = eval_um(ModeParams::new(2, 1, 6.0).unwrap(), &g).unwrap();
        let u2 = eval_um(ModeParams::new(2, 2, 6.0).unwrap(), &g).unwrap();
        let r = recursion_residual(&u0, &u1, &u2).unwrap();
        assert!(r < 1e-8, "hemisphere recursion residual {r}");
    }

    #[test]
    fn recursion_residual_generic_triple_and_sensitivity() {
        let g = grid(0.1, 1.4, 150);
        let lambda = 15.5;
        let u0 = eval_um(ModeParams::new(4, 0, lambda).unwrap(), &g).unwrap();
        let u1 = eval_um(ModeParams::new(4, 1, lambda).unwrap(), &g).unwrap();
        let u2 = eval_um(ModeParams::new(4, 2, lambda).unwrap(), &g).unwrap();
        let r = recursion_residual(&u0, &u1, &u2).unwrap();
        assert!(r < 1e-6, "recursion residual {r}");

        let mut bumped = u1.clone();
        for v in &mut bumped.values {
            *v += 1e-3;
        }
        let rb = recursion_residual(&u0, &bumped, &u2).unwrap();
        let min_cot = g
            .iter()
            .map(|&t| (4.0 * t.cos() / t.sin()).abs())
            .fold(f64::INFINITY, f64::min);
        assert!(rb >= 1e-3 * min_cot - r);
    }

    #[test]
    fn recursion_rejects_mismatched_grids() {
        let g1 = grid(0.1, 1.4, 150);
        let g2 = grid(0.1, 1.4, 151);
        let u0 = eval_um(ModeParams::new(2, 0, 6.0).unwrap(), &g1).unwrap();
        let u1 = eval_um(ModeParams::new(2, 1, 6.0).unwrap(), &g2).unwrap();
        let u2 = eval_um(ModeParams::new(2, 2, 6.0).unwrap(), &g1).unwrap();
        assert!(recursion_residual(&u0, &u1, &u2).is_err());
    }

    #[test]
    fn integral_identity_closed_form_and_solver_data() {
        // λ = n, m = 0: sin^n θ = n ∫ sin^{n-1} t cos t dt exactly
        let g = grid(0.05, 2.6, 300);
        for n in [2u32, 3, 5] {
            let u0 = eval_um(ModeParams::new(n, 0, n as f64).unwrap(), &g).unwrap();
            let u1 = eval_um(ModeParams::new(n, 1, n as f64).unwrap(), &g).unwrap();
            let r = integral_identity_residual(&u0, &u1).unwrap();
            assert!(r < 1e-8, "integral identity residual {r} for n={n}");
        }
        // hemisphere n=2, m=1 data
        let g = grid(0.05, 1.5, 300);
        let u1 = eval_um(ModeParams::new(2, 1, 6.0).unwrap(), &g).unwrap();
        let u2 = eval_um(ModeParams::new(2, 2, 6.0).unwrap(), &g).unwrap();
        let r = integral_identity_residual(&u1, &u2).unwrap();
        assert!(r < 1e-6, "hemisphere m=1 integral residual {r}");
    }

    #[test]
    fn integral_identity_zero_prefactor() {
        // λ = m(m+n-1) makes u_{m+1} ≡ 0; both sides vanish
        let g = grid(0.1, 1.2, 100);
        let mode = ModeParams::new(3, 1, 3.0).unwrap(); // λ = 1·(1+2) = 3
        let u1 = eval_um(mode, &g).unwrap();
        let u2 = raise(&u1);
        let sup = u2.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(sup < 1e-9);
        let r = integral_identity_residual(&u1, &u2).unwrap();
        assert!(r < 1e-9);
    }

    #[test]
    fn first_zero_decreases_with_lambda() {
        // positive zeros of u_m decrease in λ
        for n in [2u32, 4, 6] {
            let mut prev = f64::INFINITY;
            for step in 0..8 {
                let lambda = n as f64 + 2.0 + 3.0 * step as f64;
                let sol =
                    solve_radial(ModeParams::new(n, 0, lambda).unwrap(), 3.1).unwrap();
                let zs = sol.zeros();
                assert!(!zs.is_empty());
                assert!(zs[0] < prev, "zero did not decrease at λ={lambda}, n={n}");
                prev = zs[0];
            }
        }
    }
}
