//! Volume and boundary functions of geodesic balls on Sⁿ(ρ), decreasing /
//! increasing / symmetric-decreasing rearrangements on value-measure data,
//! and the sharp S² isoperimetric defect L² - (4πA - κA²).
//!
//! Rearrangement operates on (value, measure) pairs rather than grids: the
//! distribution-function representation is exact for piecewise-constant
//! data, so equimeasurability and Lᵖ sums survive to machine precision.

use crate::bessel::gamma_half_integer;
use crate::error::{Error, Result};
use crate::quad::adaptive_simpson;
use crate::roots::bisect;

const PI: f64 = std::f64::consts::PI;

/// Volume C_n of the unit ball in ℝⁿ; n C_n is the area of Sⁿ⁻¹.
pub fn unit_ball_volume(n: u32) -> f64 {
    PI.powf(n as f64 / 2.0) / gamma_half_integer(n as f64 / 2.0 + 1.0)
}

fn check_radius(rho: f64, r: f64) -> Result<()> {
    if rho <= 0.0 {
        return Err(Error::InvalidParameter(format!("rho must be positive, got {rho}")));
    }
    if !(0.0..=rho * PI + 1e-12).contains(&r) {
        return Err(Error::InvalidParameter(format!(
            "geodesic radius {r} outside [0, rho*pi]"
        )));
    }
    Ok(())
}

/// n-volume A(r) of the geodesic ball of radius r in Sⁿ(ρ):
/// A(r) = n C_n ∫₀^r (ρ sin(τ/ρ))^{n-1} dτ. Closed form for n = 2,
/// adaptive quadrature otherwise.
pub fn cap_volume(n: u32, rho: f64, r: f64) -> Result<f64> {
    check_radius(rho, r)?;
    if n == 2 {
        return Ok(2.0 * PI * rho * rho * (1.0 - (r / rho).cos()));
    }
    let ncn = n as f64 * unit_ball_volume(n);
    let integrand = |t: f64| (rho * (t / rho).sin()).powi(n as i32 - 1);
    let scale = (rho * (0.5 * PI)).powi(n as i32 - 1).max(1e-300);
    Ok(ncn * adaptive_simpson(&integrand, 0.0, r, 1e-14 * scale * r.max(1e-3)))
}

/// Boundary volume L(r) = n C_n (ρ sin(r/ρ))^{n-1} = A'(r).
pub fn cap_boundary(n: u32, rho: f64, r: f64) -> Result<f64> {
    check_radius(rho, r)?;
    Ok(n as f64 * unit_ball_volume(n) * (rho * (r / rho).sin()).powi(n as i32 - 1))
}

/// Total volume of Sⁿ(ρ).
pub fn sphere_volume(n: u32, rho: f64) -> f64 {
    cap_volume(n, rho, rho * PI).expect("full-sphere radius is in range")
}

/// Inverse of A: the radius r with cap_volume(r) = s, by bisection to 1e-12.
pub fn theta_of_volume(n: u32, rho: f64, s: f64) -> Result<f64> {
    let total = sphere_volume(n, rho);
    if !(0.0..=total * (1.0 + 1e-12)).contains(&s) {
        return Err(Error::InvalidParameter(format!(
            "volume {s} outside [0, {total}]"
        )));
    }
    if s <= 0.0 {
        return Ok(0.0);
    }
    if s >= total {
        return Ok(rho * PI);
    }
    bisect(
        0.0,
        rho * PI,
        |r| cap_volume(n, rho, r).unwrap_or(f64::NAN) - s,
        1e-12,
    )
}

/// A function on a measured domain, represented by (value, measure) pairs.
#[derive(Debug, Clone)]
pub struct DomainMeasure {
    entries: Vec<(f64, f64)>,
    total_measure: f64,
}

impl DomainMeasure {
    pub fn new(entries: Vec<(f64, f64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidParameter("empty domain measure".into()));
        }
        for &(v, m) in &entries {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter(format!("negative or non-finite value {v}")));
            }
            if !(m.is_finite() && m > 0.0) {
                return Err(Error::InvalidParameter(format!("non-positive measure {m}")));
            }
        }
        let total_measure = entries.iter().map(|e| e.1).sum();
        Ok(Self { entries, total_measure })
    }

    pub fn entries(&self) -> &[(f64, f64)] {
        &self.entries
    }

    pub fn total_measure(&self) -> f64 {
        self.total_measure
    }

    /// Σ vᵖ μ; p = 1 and p = 2 are the preserved norms checked in tests.
    pub fn lp_sum(&self, p: i32) -> f64 {
        self.entries.iter().map(|&(v, m)| v.powi(p) * m).sum()
    }

    /// Measure of the super-level set {f > t}.
    pub fn level_measure(&self, t: f64) -> f64 {
        self.entries
            .iter()
            .filter(|&&(v, _)| v > t)
            .map(|&(_, m)| m)
            .sum()
    }

    /// Rescale all values by a positive factor.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            entries: self.entries.iter().map(|&(v, m)| (factor * v, m)).collect(),
            total_measure: self.total_measure,
        }
    }

    /// Parse `value,measure` CSV rows (header optional).
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (idx == 0 && line.chars().any(|c| c.is_alphabetic())) {
                continue;
            }
            let mut parts = line.split(',');
            let v: f64 = parts
                .next()
                .ok_or_else(|| Error::Parse(format!("line {}: missing value", idx + 1)))?
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("line {}: {e}", idx + 1)))?;
            let m: f64 = parts
                .next()
                .ok_or_else(|| Error::Parse(format!("line {}: missing measure", idx + 1)))?
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("line {}: {e}", idx + 1)))?;
            entries.push((v, m));
        }
        Self::new(entries)
    }
}

/// Step-function profile on [0, |Ω|]: value `values[i]` on
/// [breaks[i], breaks[i+1]).
#[derive(Debug, Clone)]
pub struct RearrangedProfile {
    pub breaks: Vec<f64>,
    pub values: Vec<f64>,
}

impl RearrangedProfile {
    pub fn total_measure(&self) -> f64 {
        *self.breaks.last().unwrap()
    }

    pub fn value_at(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return self.values[0];
        }
        if s >= self.total_measure() {
            return *self.values.last().unwrap();
        }
        // partition_point gives the first break > s; the cell is one left
        let idx = self.breaks.partition_point(|&b| b <= s);
        self.values[idx.saturating_sub(1).min(self.values.len() - 1)]
    }

    pub fn integral(&self) -> f64 {
        self.values
            .iter()
            .zip(self.breaks.windows(2))
            .map(|(&v, w)| v * (w[1] - w[0]))
            .sum()
    }

    pub fn square_integral(&self) -> f64 {
        self.values
            .iter()
            .zip(self.breaks.windows(2))
            .map(|(&v, w)| v * v * (w[1] - w[0]))
            .sum()
    }

    /// ∫₀^s of the profile (piecewise linear in s, exact).
    pub fn cumulative_at(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, self.total_measure());
        let mut acc = 0.0;
        for (i, w) in self.breaks.windows(2).enumerate() {
            if s <= w[0] {
                break;
            }
            acc += self.values[i] * (s.min(w[1]) - w[0]);
        }
        acc
    }

    /// CSV rows `s,value`, one per step cell boundary.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,value\n");
        for (i, &v) in self.values.iter().enumerate() {
            out.push_str(&format!("{:.17e},{:.17e}\n", self.breaks[i], v));
        }
        out.push_str(&format!("{:.17e},{:.17e}\n", self.total_measure(), self.values.last().unwrap()));
        out
    }
}

fn rearranged(dm: &DomainMeasure, descending: bool) -> RearrangedProfile {
    let mut entries = dm.entries.clone();
    entries.sort_by(|a, b| {
        if descending {
            b.0.partial_cmp(&a.0).unwrap()
        } else {
            a.0.partial_cmp(&b.0).unwrap()
        }
    });
    // merge exact ties so the output is independent of input order
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(entries.len());
    for (v, m) in entries {
        match merged.last_mut() {
            Some(last) if last.0 == v => last.1 += m,
            _ => merged.push((v, m)),
        }
    }
    let mut breaks = Vec::with_capacity(merged.len() + 1);
    let mut values = Vec::with_capacity(merged.len());
    breaks.push(0.0);
    let mut acc = 0.0;
    for (v, m) in merged {
        acc += m;
        breaks.push(acc);
        values.push(v);
    }
    RearrangedProfile { breaks, values }
}

/// Decreasing rearrangement f^#: equimeasurable with f, nonincreasing on
/// [0, |Ω|].
pub fn decreasing_rearrangement(dm: &DomainMeasure) -> RearrangedProfile {
    rearranged(dm, true)
}

/// Increasing rearrangement f_#.
pub fn increasing_rearrangement(dm: &DomainMeasure) -> RearrangedProfile {
    rearranged(dm, false)
}

/// Symmetric decreasing rearrangement: radial profile r ↦ f^#(A(r)) on the
/// geodesic ball of volume |Ω| in Sⁿ(ρ).
#[derive(Debug, Clone)]
pub struct SymmetricProfile {
    pub profile: RearrangedProfile,
    pub n: u32,
    pub rho: f64,
}

impl SymmetricProfile {
    /// Radius of the equal-volume ball (the support of the rearrangement).
    pub fn support_radius(&self) -> Result<f64> {
        theta_of_volume(self.n, self.rho, self.profile.total_measure())
    }

    pub fn value_at_radius(&self, r: f64) -> Result<f64> {
        Ok(self.profile.value_at(cap_volume(self.n, self.rho, r)?))
    }
}

pub fn symmetric_rearrangement(dm: &DomainMeasure, n: u32, rho: f64) -> SymmetricProfile {
    SymmetricProfile {
        profile: decreasing_rearrangement(dm),
        n,
        rho,
    }
}

/// Closed-form isoperimetric defect of a geodesic cap on S²:
/// L(r)² - (4πA(r) - A(r)²), identically zero in exact arithmetic.
pub fn cap_isoperimetric_defect(r: f64) -> Result<f64> {
    let a = cap_volume(2, 1.0, r)?;
    let l = cap_boundary(2, 1.0, r)?;
    Ok(l * l - (4.0 * PI * a - a * a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn ball_volumes_match_known_constants() {
        assert_abs_diff_eq!(unit_ball_volume(2), PI, epsilon = 1e-14);
        assert_abs_diff_eq!(unit_ball_volume(3), 4.0 * PI / 3.0, epsilon = 1e-13);
        assert_abs_diff_eq!(unit_ball_volume(4), PI * PI / 2.0, epsilon = 1e-13);
    }

    #[test]
    fn cap_volume_closed_forms() {
        // hemisphere of S² has area 2π, the full sphere 4π
        assert_abs_diff_eq!(cap_volume(2, 1.0, PI / 2.0).unwrap(), 2.0 * PI, epsilon = 1e-13);
        assert_abs_diff_eq!(cap_volume(2, 1.0, PI).unwrap(), 4.0 * PI, epsilon = 1e-13);
        assert_abs_diff_eq!(cap_boundary(2, 1.0, PI / 2.0).unwrap(), 2.0 * PI, epsilon = 1e-13);
        assert_abs_diff_eq!(cap_boundary(2, 1.0, PI).unwrap(), 0.0, epsilon = 1e-13);
        // S³ closed form: A(r) = 2π(r - sin r cos r)
        let r = 1.234f64;
        assert_abs_diff_eq!(
            cap_volume(3, 1.0, r).unwrap(),
            2.0 * PI * (r - r.sin() * r.cos()),
            epsilon = 1e-10
        );
        // Euclidean limit: A ≈ C_n rⁿ for small r
        for n in [2u32, 4, 6] {
            let r = 1e-3;
            let a = cap_volume(n, 1.0, r).unwrap();
            let euclid = unit_ball_volume(n) * r.powi(n as i32);
            assert!((a / euclid - 1.0).abs() < 1e-5);
        }
        assert!(cap_volume(2, 1.0, 4.0).is_err());
    }

    #[test]
    fn volume_derivative_is_boundary() {
        for n in [2u32, 3, 5] {
            for &r in &[0.4, 1.0, 2.0] {
                let d = 1e-5;
                let fd = (cap_volume(n, 1.0, r + d).unwrap() - cap_volume(n, 1.0, r - d).unwrap())
                    / (2.0 * d);
                assert_abs_diff_eq!(
                    fd,
                    cap_boundary(n, 1.0, r).unwrap(),
                    epsilon = 1e-7 * fd.abs().max(1.0)
                );
            }
        }
    }

    #[test]
    fn theta_of_volume_round_trip() {
        assert_abs_diff_eq!(theta_of_volume(2, 1.0, 2.0 * PI).unwrap(), PI / 2.0, epsilon = 1e-11);
        assert_eq!(theta_of_volume(3, 1.0, 0.0).unwrap(), 0.0);
        for n in [2u32, 3] {
            for &s_frac in &[0.1, 0.45, 0.9] {
                let s = s_frac * sphere_volume(n, 1.0);
                let r = theta_of_volume(n, 1.0, s).unwrap();
                assert_abs_diff_eq!(cap_volume(n, 1.0, r).unwrap(), s, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn two_level_rearrangement_matches_definition() {
        let dm = DomainMeasure::new(vec![(1.0, 3.0), (2.0, 1.0)]).unwrap();
        let f = decreasing_rearrangement(&dm);
        assert_eq!(f.values, vec![2.0, 1.0]);
        assert_eq!(f.breaks, vec![0.0, 1.0, 4.0]);
        assert_eq!(f.value_at(0.5), 2.0);
        assert_eq!(f.value_at(1.5), 1.0);
        let g = increasing_rearrangement(&dm);
        assert_eq!(g.values, vec![1.0, 2.0]);
    }

    #[test]
    fn constant_function_is_fixed_point() {
        let dm = DomainMeasure::new(vec![(5.0, 1.0), (5.0, 2.5), (5.0, 0.5)]).unwrap();
        let f = decreasing_rearrangement(&dm);
        assert_eq!(f.values, vec![5.0]);
        assert_abs_diff_eq!(f.total_measure(), 4.0, epsilon = 1e-15);
    }

    #[test]
    fn radial_decreasing_data_is_a_fixed_point_of_symmetrization() {
        // sample a decreasing radial function on annular cells of a cap;
        // its symmetric rearrangement reproduces the same radial profile
        let n = 2;
        let cells = 400;
        let r_max = 1.2;
        let mut entries = Vec::new();
        for i in 0..cells {
            let r0 = r_max * i as f64 / cells as f64;
            let r1 = r_max * (i + 1) as f64 / cells as f64;
            let rm = 0.5 * (r0 + r1);
            let measure = cap_volume(n, 1.0, r1).unwrap() - cap_volume(n, 1.0, r0).unwrap();
            entries.push(((1.0 + r_max * r_max - rm * rm).sqrt(), measure));
        }
        let dm = DomainMeasure::new(entries).unwrap();
        let sym = symmetric_rearrangement(&dm, n, 1.0);
        assert_abs_diff_eq!(sym.support_radius().unwrap(), r_max, epsilon = 1e-9);
        for &r in &[0.2, 0.6, 1.0] {
            let expected = (1.0 + r_max * r_max - r * r).sqrt();
            assert!((sym.value_at_radius(r).unwrap() - expected).abs() < 5e-3);
        }
    }

    #[test]
    fn csv_round_trip() {
        let dm = DomainMeasure::from_csv("value,measure\n1.5,2.0\n0.5,1.0\n").unwrap();
        assert_eq!(dm.entries().len(), 2);
        assert!(DomainMeasure::from_csv("value,measure\n-1.0,2.0\n").is_err());
        assert!(DomainMeasure::from_csv("value,measure\n1.0,0.0\n").is_err());
        let prof = decreasing_rearrangement(&dm);
        let csv = prof.to_csv();
        assert!(csv.starts_with("s,value\n"));
    }

    #[test]
    fn cap_defect_vanishes_identically() {
        for &r in &[0.1, 0.7, PI / 2.0, 2.4, 3.0] {
            assert!(cap_isoperimetric_defect(r).unwrap().abs() < 1e-10);
        }
    }

    proptest! {
        #[test]
        fn equimeasurable_and_norm_preserving(
            raw in prop::collection::vec((0.0f64..10.0, 0.01f64..5.0), 1..40)
        ) {
            let dm = DomainMeasure::new(raw).unwrap();
            let f = decreasing_rearrangement(&dm);
            // decreasing, measure preserved
            prop_assert!(f.values.windows(2).all(|w| w[0] > w[1]));
            prop_assert!((f.total_measure() - dm.total_measure()).abs() < 1e-12);
            // L¹ and L² sums match exactly up to float addition order
            prop_assert!((f.integral() - dm.lp_sum(1)).abs() <= 1e-12 * dm.lp_sum(1).max(1.0));
            prop_assert!((f.square_integral() - dm.lp_sum(2)).abs() <= 1e-12 * dm.lp_sum(2).max(1.0));
            // equimeasurability at the distribution level
            for &(t, _) in dm.entries() {
                let lhs = dm.level_measure(t);
                let rhs: f64 = f
                    .values
                    .iter()
                    .zip(f.breaks.windows(2))
                    .filter(|(&v, _)| v > t)
                    .map(|(_, w)| w[1] - w[0])
                    .sum();
                prop_assert!((lhs - rhs).abs() < 1e-12 * lhs.max(1.0));
            }
        }

        #[test]
        fn increasing_is_reverse_of_decreasing(
            raw in prop::collection::vec((0.0f64..4.0, 0.1f64..1.0), 1..20)
        ) {
            let dm = DomainMeasure::new(raw).unwrap();
            let f = decreasing_rearrangement(&dm);
            let g = increasing_rearrangement(&dm);
            let mut rev = f.values.clone();
            rev.reverse();
            prop_assert_eq!(rev, g.values);
        }
    }
}
