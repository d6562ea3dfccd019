//! Quadrature: adaptive Simpson and Hermite-corrected rules on stored grids.

/// Adaptive Simpson with absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Integral of a sampled function with known derivatives.
///
/// Per-interval two-point Hermite rule,
/// `∫ ≈ h(f0+f1)/2 + h²(d0−d1)/12`, exact for cubics; O(h⁵) local error.
/// The grid need not be uniform.
pub fn hermite_integral(grid: &[f64], values: &[f64], derivs: &[f64]) -> f64 {
    assert_eq!(grid.len(), values.len());
    assert_eq!(grid.len(), derivs.len());
    let mut total = 0.0;
    for i in 1..grid.len() {
        let h = grid[i] - grid[i - 1];
        total += 0.5 * h * (values[i - 1] + values[i]) + h * h / 12.0 * (derivs[i - 1] - derivs[i]);
    }
    total
}

/// Cumulative form of [`hermite_integral`]: `out[k] = ∫_{grid[0]}^{grid[k]}`.
pub fn hermite_cumulative(grid: &[f64], values: &[f64], derivs: &[f64]) -> Vec<f64> {
    let mut acc = vec![0.0; grid.len()];
    for i in 1..grid.len() {
        let h = grid[i] - grid[i - 1];
        acc[i] = acc[i - 1]
            + 0.5 * h * (values[i - 1] + values[i])
            + h * h / 12.0 * (derivs[i - 1] - derivs[i]);
    }
    acc
}

/// Composite trapezoid for samples without derivative data.
pub fn trapezoid(grid: &[f64], values: &[f64]) -> f64 {
    let mut total = 0.0;
    for i in 1..grid.len() {
        total += 0.5 * (grid[i] - grid[i - 1]) * (values[i - 1] + values[i]);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adaptive_simpson_matches_sine_integral() {
        let v = adaptive_simpson(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-12);
        assert!((v - 2.0).abs() < 1e-11);
    }

    #[test]
    fn hermite_rule_is_exact_for_cubics() {
        let grid: Vec<f64> = (0..=7).map(|i| 0.3 * i as f64).collect();
        let values: Vec<f64> = grid.iter().map(|&x| x * x * x - 2.0 * x).collect();
        let derivs: Vec<f64> = grid.iter().map(|&x| 3.0 * x * x - 2.0).collect();
        let exact = {
            let b: f64 = 2.1;
            b.powi(4) / 4.0 - b * b
        };
        assert!((hermite_integral(&grid, &values, &derivs) - exact).abs() < 1e-12);
    }

    #[test]
    fn hermite_beats_trapezoid_on_oscillatory_data() {
        let grid: Vec<f64> = (0..=100).map(|i| i as f64 * 0.01 * std::f64::consts::PI).collect();
        let values: Vec<f64> = grid.iter().map(|&x| x.sin()).collect();
        let derivs: Vec<f64> = grid.iter().map(|&x| x.cos()).collect();
        let herm = (hermite_integral(&grid, &values, &derivs) - 2.0).abs();
        let trap = (trapezoid(&grid, &values) - 2.0).abs();
        assert!(herm < 1e-8);
        assert!(herm < 1e-3 * trap);
    }
}
