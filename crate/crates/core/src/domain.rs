//! Domain-level pipeline on S²: center-of-mass recentring, the
//! eigenvalue-gap bound with its rearrangement chain, and the final
//! eigenvalue/ratio comparisons against the matching geodesic balls.

use crate::ball::{lambda_shoot, spectral_pair};
use crate::chiti::{
    chiti_crossing, chiti_inequality_residual, v1_volume_profile_for, ChitiInequalityReport,
    ChitiReport,
};
use crate::error::{Error, Result};
use crate::fem::{solve_dirichlet, DomainSpectrum};
use crate::mesh::{
    cross, dot, make_domain, normalize, spherical_triangle_area, DomainKind, SphericalDomainMesh,
    Vec3,
};
use crate::profile::{build_profile_from_pair, radius_for_lambda1, GapProfile};
use crate::quad::adaptive_simpson;
use crate::radial::BallSpec;
use crate::rearrange::{
    cap_volume, decreasing_rearrangement, increasing_rearrangement, sphere_volume, theta_of_volume,
    DomainMeasure,
};
use rayon::prelude::*;
use serde::Serialize;

const PI: f64 = std::f64::consts::PI;

/// One quadrature cell: an on-sphere point, its u₁ value and its share of
/// the (spherical) element area. Three edge-midpoint cells per triangle
/// integrate P1-squared data exactly on the flat element.
#[derive(Debug, Clone, Copy)]
pub struct QuadCell {
    pub point: Vec3,
    pub u: f64,
    pub area: f64,
}

/// Edge-midpoint quadrature cells with u₁ interpolated from vertex values.
pub fn quadrature_cells(mesh: &SphericalDomainMesh, u1: &[f64]) -> Vec<QuadCell> {
    let mut cells = Vec::with_capacity(3 * mesh.triangles.len());
    for t in &mesh.triangles {
        let p = [mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]];
        let area = spherical_triangle_area(p[0], p[1], p[2]) / 3.0;
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            let mid = normalize([
                0.5 * (mesh.vertices[a][0] + mesh.vertices[b][0]),
                0.5 * (mesh.vertices[a][1] + mesh.vertices[b][1]),
                0.5 * (mesh.vertices[a][2] + mesh.vertices[b][2]),
            ]);
            cells.push(QuadCell {
                point: mid,
                u: 0.5 * (u1[a] + u1[b]),
                area,
            });
        }
    }
    cells
}

/// u₁ samples as a value/measure domain for rearrangement work.
pub fn mesh_domain_measure(mesh: &SphericalDomainMesh, u1: &[f64]) -> Result<DomainMeasure> {
    let entries = quadrature_cells(mesh, u1)
        .into_iter()
        .map(|c| (c.u.max(0.0), c.area))
        .collect();
    DomainMeasure::new(entries)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CmMethod {
    FixedPoint,
    GridRefine,
    /// |v| vanished: every frame satisfies the orthogonality conditions.
    VanishingMoment,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CenterOfMassResult {
    pub y0: Vec3,
    /// the two first-moment integrals in the rotated frame, divided by the
    /// G̃-weighted mass
    pub orthogonality_residuals: [f64; 2],
    pub iterations: usize,
    pub method: CmMethod,
    /// grid-refine only: number of well-separated near-optimal directions
    pub candidates: usize,
}

fn moment<F: Fn(f64) -> f64 + Sync>(cells: &[QuadCell], gtilde: &F, y: Vec3) -> Vec3 {
    let acc = cells
        .par_iter()
        .fold(
            || [0.0f64; 3],
            |mut acc, c| {
                let ct = dot(c.point, y).clamp(-1.0, 1.0);
                let w = gtilde(ct.acos()) * c.u * c.u * c.area;
                acc[0] += w * c.point[0];
                acc[1] += w * c.point[1];
                acc[2] += w * c.point[2];
                acc
            },
        )
        .reduce(
            || [0.0f64; 3],
            |a, b| [a[0] + b[0], a[1] + b[1], a[2] + b[2]],
        );
    acc
}

fn gt_mass<F: Fn(f64) -> f64 + Sync>(cells: &[QuadCell], gtilde: &F, y: Vec3) -> f64 {
    cells
        .par_iter()
        .map(|c| {
            let ct = dot(c.point, y).clamp(-1.0, 1.0);
            gtilde(ct.acos()) * c.u * c.u * c.area
        })
        .sum()
}

/// Rotation whose rows are (t₁, t₂, y₀): maps y₀ to the north pole.
pub fn rotation_to_north(y0: Vec3) -> [[f64; 3]; 3] {
    let seed = if y0[2].abs() < 0.9 {
        [0.0, 0.0, 1.0]
    } else {
        [1.0, 0.0, 0.0]
    };
    let t1 = normalize(cross(seed, y0));
    let t2 = cross(y0, t1);
    [t1, t2, y0]
}

fn icosphere_directions(subdivisions: u32) -> Vec<Vec3> {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Vec3> = vec![
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ]
    .into_iter()
    .map(normalize)
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut midpoints: std::collections::HashMap<(usize, usize), usize> =
            std::collections::HashMap::new();
        let mut new_faces = Vec::with_capacity(4 * faces.len());
        for f in &faces {
            let mut mid = [0usize; 3];
            for k in 0..3 {
                let (a, b) = (f[k].min(f[(k + 1) % 3]), f[k].max(f[(k + 1) % 3]));
                mid[k] = *midpoints.entry((a, b)).or_insert_with(|| {
                    let p = normalize([
                        verts[a][0] + verts[b][0],
                        verts[a][1] + verts[b][1],
                        verts[a][2] + verts[b][2],
                    ]);
                    verts.push(p);
                    verts.len() - 1
                });
            }
            new_faces.push([f[0], mid[0], mid[2]]);
            new_faces.push([f[1], mid[1], mid[0]]);
            new_faces.push([f[2], mid[2], mid[1]]);
            new_faces.push(mid);
        }
        faces = new_faces;
    }
    verts
}

/// Fixed point of w(y) = v(y)/|v(y)| by damped iteration, with an
/// icosahedral grid-refinement fallback minimizing |w(y) - y|.
pub fn center_of_mass<F: Fn(f64) -> f64 + Sync>(
    mesh: &SphericalDomainMesh,
    u1: &[f64],
    gtilde: &F,
) -> Result<CenterOfMassResult> {
    let cells = quadrature_cells(mesh, u1);
    let total_u2: f64 = cells.iter().map(|c| c.u * c.u * c.area).sum();
    if total_u2 <= 0.0 {
        return Err(Error::InvalidParameter("u₁ is identically zero".into()));
    }
    // start from the u²-weighted direction of the domain
    let mut y = {
        let mut c0 = [0.0; 3];
        for c in &cells {
            let w = c.u * c.u * c.area;
            c0 = [c0[0] + w * c.point[0], c0[1] + w * c.point[1], c0[2] + w * c.point[2]];
        }
        normalize(c0)
    };
    let alpha = 0.5;
    let mut best_gap = f64::INFINITY;
    let mut best_y = y;
    for iter in 0..500 {
        let v = moment(&cells, gtilde, y);
        let vnorm = (dot(v, v)).sqrt();
        if vnorm < 1e-12 * total_u2 {
            return Ok(finish(
                &cells,
                gtilde,
                y,
                iter,
                CmMethod::VanishingMoment,
                1,
            ));
        }
        let w = [v[0] / vnorm, v[1] / vnorm, v[2] / vnorm];
        let gap =
            ((w[0] - y[0]).powi(2) + (w[1] - y[1]).powi(2) + (w[2] - y[2]).powi(2)).sqrt();
        if gap < best_gap {
            best_gap = gap;
            best_y = y;
        }
        if gap < 1e-13 {
            return Ok(finish(&cells, gtilde, y, iter + 1, CmMethod::FixedPoint, 1));
        }
        y = normalize([
            (1.0 - alpha) * y[0] + alpha * w[0],
            (1.0 - alpha) * y[1] + alpha * w[1],
            (1.0 - alpha) * y[2] + alpha * w[2],
        ]);
    }
    if best_gap < 1e-10 {
        return Ok(finish(&cells, gtilde, best_y, 500, CmMethod::FixedPoint, 1));
    }
    // grid-refine fallback
    let (y0, gap, candidates) = grid_refine(&cells, gtilde);
    if gap > 1e-7 {
        return Err(Error::CenterOfMassNonConvergence {
            iterations: 500,
            best_gap: gap.min(best_gap),
        });
    }
    Ok(finish(&cells, gtilde, y0, 500, CmMethod::GridRefine, candidates))
}

/// Exhaustive direction search: icosahedral sweep then shrinking local
/// rings around the best direction.
pub fn grid_refine<F: Fn(f64) -> f64 + Sync>(cells: &[QuadCell], gtilde: &F) -> (Vec3, f64, usize) {
    let gap_at = |y: Vec3| {
        let v = moment(cells, gtilde, y);
        let vn = dot(v, v).sqrt().max(1e-300);
        let w = [v[0] / vn, v[1] / vn, v[2] / vn];
        ((w[0] - y[0]).powi(2) + (w[1] - y[1]).powi(2) + (w[2] - y[2]).powi(2)).sqrt()
    };
    let dirs = icosphere_directions(3);
    let gaps: Vec<f64> = dirs.par_iter().map(|&d| gap_at(d)).collect();
    let (mut best_idx, mut best_gap) = (0usize, f64::INFINITY);
    for (i, &g) in gaps.iter().enumerate() {
        if g < best_gap {
            best_gap = g;
            best_idx = i;
        }
    }
    // candidate multiplicity: near-optimal, mutually separated directions
    let mut candidates: Vec<Vec3> = Vec::new();
    for (i, &g) in gaps.iter().enumerate() {
        if g < 10.0 * best_gap + 1e-12
            && candidates
                .iter()
                .all(|c| dot(*c, dirs[i]) < 0.95)
        {
            candidates.push(dirs[i]);
        }
    }
    let mut y = dirs[best_idx];
    let mut radius = 0.2f64;
    while radius > 1e-9 {
        let frame = rotation_to_north(y);
        let mut improved = false;
        for k in 0..12 {
            let phi = 2.0 * PI * k as f64 / 12.0;
            let cand = normalize([
                y[0] + radius * (phi.cos() * frame[0][0] + phi.sin() * frame[1][0]),
                y[1] + radius * (phi.cos() * frame[0][1] + phi.sin() * frame[1][1]),
                y[2] + radius * (phi.cos() * frame[0][2] + phi.sin() * frame[1][2]),
            ]);
            let g = gap_at(cand);
            if g < best_gap {
                best_gap = g;
                y = cand;
                improved = true;
            }
        }
        if !improved {
            radius *= 0.5;
        }
    }
    (y, best_gap, candidates.len().max(1))
}

fn finish<F: Fn(f64) -> f64 + Sync>(
    cells: &[QuadCell],
    gtilde: &F,
    y0: Vec3,
    iterations: usize,
    method: CmMethod,
    candidates: usize,
) -> CenterOfMassResult {
    let r = rotation_to_north(y0);
    let v = moment(cells, gtilde, y0);
    let mass = gt_mass(cells, gtilde, y0).abs().max(1e-300);
    let res = [
        dot(r[0], v) / mass,
        dot(r[1], v) / mass,
    ];
    CenterOfMassResult {
        y0,
        orthogonality_residuals: res,
        iterations,
        method,
        candidates,
    }
}

/// One inequality link of the rearrangement chains.
#[derive(Debug, Clone, Serialize)]
pub struct ChainLink {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// lhs ≤ rhs within tolerance (≥ for the g-chain, encoded by swap).
    pub holds: bool,
}

/// Gap-bound verdict for one mesh domain against its equal-λ₁ ball.
#[derive(Debug, Clone, Serialize)]
pub struct GapBoundReport {
    pub lambda1_domain: f64,
    pub lambda2_domain: f64,
    pub ball_radius: f64,
    pub lambda2_ball: f64,
    pub numerator: f64,
    pub denominator: f64,
    /// λ₁(Ω) + numerator/denominator
    pub bound: f64,
    /// λ₂(Ω) ≤ bound (up to mesh tolerance)
    pub variational_holds: bool,
    /// transplanting the southern part preserves both integrals
    pub reflection_residual: f64,
    /// B-chain and g-chain links, outermost first
    pub chain: Vec<ChainLink>,
    pub chain_holds: bool,
    /// bound ≤ λ₂(B_{λ₁}) (up to mesh tolerance)
    pub bound_below_ball: bool,
    /// ball-side identity: ∫B v² / ∫g² v² = λ₂(B) - λ₁(B)
    pub ball_identity_residual: f64,
    pub center_of_mass: CenterOfMassResult,
    pub mesh_error_rel: f64,
}

/// Fast inverse of the cap-volume function via a precomputed table.
struct VolumeInverse {
    s: Vec<f64>,
    theta: Vec<f64>,
}

impl VolumeInverse {
    fn build(n: u32, points: usize) -> Self {
        let mut s = Vec::with_capacity(points + 1);
        let mut theta = Vec::with_capacity(points + 1);
        for i in 0..=points {
            let t = PI * i as f64 / points as f64;
            theta.push(t);
            s.push(cap_volume(n, 1.0, t).unwrap());
        }
        Self { s, theta }
    }

    fn theta_at(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        let last = *self.s.last().unwrap();
        if s >= last {
            return PI;
        }
        let idx = self.s.partition_point(|&x| x < s).max(1);
        let (s0, s1) = (self.s[idx - 1], self.s[idx]);
        let w = (s - s0) / (s1 - s0);
        self.theta[idx - 1] * (1.0 - w) + self.theta[idx] * w
    }
}

/// ∫ f^# g^# ds for two step profiles over the same total measure,
/// computed exactly by a merge sweep.
fn paired_step_integral(
    f: &crate::rearrange::RearrangedProfile,
    g: &crate::rearrange::RearrangedProfile,
) -> f64 {
    let total = f.total_measure().min(g.total_measure());
    let (mut i, mut j) = (0usize, 0usize);
    let mut s = 0.0;
    let mut acc = 0.0;
    while s < total {
        let next = f.breaks[i + 1].min(g.breaks[j + 1]).min(total);
        acc += f.values[i] * g.values[j] * (next - s);
        s = next;
        if i + 2 < f.breaks.len() && f.breaks[i + 1] <= s {
            i += 1;
        }
        if j + 2 < g.breaks.len() && g.breaks[j + 1] <= s {
            j += 1;
        }
    }
    acc
}

/// ∫ radial(θ(s)) · step(s) ds over the step profile's support.
fn radial_step_integral(
    step: &crate::rearrange::RearrangedProfile,
    inv: &VolumeInverse,
    radial: &dyn Fn(f64) -> f64,
) -> f64 {
    let mut acc = 0.0;
    for (i, w) in step.breaks.windows(2).enumerate() {
        let (s0, s1) = (w[0], w[1]);
        let f = |s: f64| radial(inv.theta_at(s));
        // Simpson per cell; the radial factor is smooth
        let mid = 0.5 * (s0 + s1);
        acc += step.values[i] * (s1 - s0) / 6.0 * (f(s0) + 4.0 * f(mid) + f(s1));
    }
    acc
}

/// Verify the gap bound λ₂ - λ₁ ≤ ∫B u₁²/∫g²u₁² and its rearrangement
/// chain down to the equal-λ₁ ball. The mesh is recentred on the
/// center of mass first.
pub fn gap_bound(
    mesh: &SphericalDomainMesh,
    spectrum: &DomainSpectrum,
    profile: &GapProfile,
    mesh_error_rel: f64,
) -> Result<GapBoundReport> {
    if mesh.hemisphere_axis().is_none() {
        let max_angle = mesh.vertices.iter().map(|v| v[2].acos()).fold(0.0f64, f64::max);
        return Err(Error::HemisphereViolation { max_angle });
    }
    let cm = center_of_mass(mesh, &spectrum.u1, &|t| profile.gtilde(t))?;
    let r = rotation_to_north(cm.y0);
    let rotated = mesh.rotated(&r);
    let cells = quadrature_cells(&rotated, &spectrum.u1);

    // scale u² so the u-side matches the ball normalization ∫ v₁² ds
    let spec_ball = BallSpec {
        n: 2,
        theta1: profile.theta1,
    };
    let v1 = v1_volume_profile_for(spec_ball, profile.lambda1, 4000)?;
    let u2_raw: f64 = cells.iter().map(|c| c.u * c.u * c.area).sum();
    let factor = v1.square_integral / u2_raw;

    // transplant check: reflecting southern cells changes nothing because
    // the extended B and g fold about the equator
    let num_plain: f64 = cells
        .iter()
        .map(|c| profile.extended_b(c.point[2].clamp(-1.0, 1.0).acos()) * factor * c.u * c.u * c.area)
        .sum();
    let den_plain: f64 = cells
        .iter()
        .map(|c| {
            let g = profile.extended_g(c.point[2].clamp(-1.0, 1.0).acos());
            g * g * factor * c.u * c.u * c.area
        })
        .sum();
    let num_reflected: f64 = cells
        .iter()
        .map(|c| {
            let z = c.point[2].abs().clamp(-1.0, 1.0);
            profile.extended_b(z.acos()) * factor * c.u * c.u * c.area
        })
        .sum();
    let reflection_residual = (num_plain - num_reflected).abs() / num_plain.abs().max(1e-300);

    // rearrangement chains on the folded (northern) data
    let folded: Vec<(f64, f64, f64)> = cells
        .iter()
        .map(|c| {
            let theta = c.point[2].abs().clamp(-1.0, 1.0).acos();
            (theta, factor * c.u * c.u, c.area)
        })
        .collect();
    let u2_dm = DomainMeasure::new(folded.iter().map(|&(_, u2, a)| (u2, a)).collect())?;
    let b_dm = DomainMeasure::new(
        folded
            .iter()
            .map(|&(t, _, a)| (profile.extended_b(t), a))
            .collect(),
    )?;
    let g2_dm = DomainMeasure::new(
        folded
            .iter()
            .map(|&(t, _, a)| {
                let g = profile.extended_g(t);
                (g * g, a)
            })
            .collect(),
    )?;
    let u2_sharp = decreasing_rearrangement(&u2_dm);
    let b_sharp = decreasing_rearrangement(&b_dm);
    let g2_flat = increasing_rearrangement(&g2_dm);

    let inv = VolumeInverse::build(2, 4000);
    let hl_b = paired_step_integral(&b_sharp, &u2_sharp);
    let radial_b = radial_step_integral(&u2_sharp, &inv, &|t| profile.extended_b(t));
    let hl_g = paired_step_integral(&g2_flat, &u2_sharp);
    let radial_g = radial_step_integral(&u2_sharp, &inv, &|t| {
        let g = profile.extended_g(t);
        g * g
    });

    // ball-side integrals in θ (v₁ in the solver normalization)
    let sol_weight = |t: f64| 2.0 * PI * t.sin(); // n C_n sin^{n-1}, n = 2
    let ball_b = adaptive_simpson(
        &|t: f64| {
            if t <= 0.0 {
                0.0
            } else {
                let (y, _) = profile.eval_y1(t);
                profile.eval_b(t) * y * y * sol_weight(t)
            }
        },
        0.0,
        profile.theta1,
        1e-12,
    );
    let ball_g = adaptive_simpson(
        &|t: f64| {
            if t <= 0.0 {
                0.0
            } else {
                let (y, _) = profile.eval_y1(t);
                let g = profile.eval_g(t);
                g * g * y * y * sol_weight(t)
            }
        },
        0.0,
        profile.theta1,
        1e-12,
    );
    let gap_ball = profile.lambda2 - profile.lambda1;
    let ball_identity_residual = (ball_b / ball_g - gap_ball).abs() / gap_ball;

    let tol = 5.0 * mesh_error_rel + 1e-9;
    let mut chain = Vec::new();
    let mut push = |name: &str, lhs: f64, rhs: f64| {
        let scale = lhs.abs().max(rhs.abs()).max(1e-300);
        chain.push(ChainLink {
            name: name.to_string(),
            lhs,
            rhs,
            holds: lhs <= rhs + tol * scale,
        });
    };
    // B-chain: ∫B u² = transplant ≤ HL ≤ radial ≤ ball
    push("B: transplant equality", num_plain, num_reflected + 1e-12 * num_plain.abs());
    push("B: rearrangement", num_plain, hl_b);
    push("B: radial majorant", hl_b, radial_b);
    push("B: ball comparison", radial_b, ball_b);
    // g-chain: ∫g²u² ≥ HL ≥ radial ≥ ball (encoded as rhs ≤ lhs)
    push("g²: rearrangement", hl_g, den_plain);
    push("g²: radial minorant", radial_g, hl_g);
    push("g²: ball comparison", ball_g, radial_g);
    let chain_holds = chain.iter().all(|l| l.holds);

    let bound = spectrum.lambda1 + num_plain / den_plain;
    let lambda2_ball = profile.lambda2;
    let variational_holds =
        spectrum.lambda2 <= bound + tol * spectrum.lambda2.abs();
    let bound_below_ball = bound <= lambda2_ball * (1.0 + tol);

    Ok(GapBoundReport {
        lambda1_domain: spectrum.lambda1,
        lambda2_domain: spectrum.lambda2,
        ball_radius: profile.theta1,
        lambda2_ball,
        numerator: num_plain,
        denominator: den_plain,
        bound,
        variational_holds,
        reflection_residual,
        chain,
        chain_holds,
        bound_below_ball,
        ball_identity_residual,
        center_of_mass: cm,
        mesh_error_rel,
    })
}

/// End-to-end verdict for one domain.
#[derive(Debug, Clone, Serialize)]
pub struct PpwReport {
    pub lambda1: f64,
    pub lambda2: f64,
    pub mesh_h: f64,
    pub mesh_error_rel: f64,
    /// radius of the equal-λ₁ ball
    pub ball_radius: f64,
    pub lambda2_ball: f64,
    /// radius of the equal-volume ball Ω*
    pub star_radius: f64,
    pub lambda1_star: f64,
    pub lambda2_star: f64,
    /// λ₂(B_{λ₁}) - λ₂(Ω): Theorem-level margin, ≥ -O(mesh error)
    pub i1_margin: f64,
    /// λ₂/λ₁(Ω*) - λ₂/λ₁(Ω)
    pub i4_margin: f64,
    /// λ₁(Ω) - λ₁(Ω*): Faber-Krahn-type margin
    pub sperner_margin: f64,
    /// θ₁(Ω*) - θ₁(B_{λ₁}) ≥ 0
    pub radius_margin: f64,
    pub i1_ok: bool,
    pub i4_ok: bool,
    pub sperner_ok: bool,
    pub radius_ok: bool,
    pub gap: GapBoundReport,
}

impl PpwReport {
    pub fn all_ok(&self) -> bool {
        self.i1_ok
            && self.i4_ok
            && self.sperner_ok
            && self.radius_ok
            && self.gap.chain_holds
            && self.gap.variational_holds
            && self.gap.bound_below_ball
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "schema": 1,
            "lambda1": self.lambda1,
            "lambda2": self.lambda2,
            "bound": self.gap.bound,
            "ppw_margins": {
                "i1": self.i1_margin,
                "i4": self.i4_margin,
                "sperner": self.sperner_margin,
                "radius": self.radius_margin,
            },
            "y0": self.gap.center_of_mass.y0,
            "ball_radius": self.ball_radius,
            "star_radius": self.star_radius,
            "mesh_error_rel": self.mesh_error_rel,
            "all_ok": self.all_ok(),
        })
    }
}

/// Full pipeline for an already-meshed domain with a caller-supplied
/// relative eigenvalue error estimate.
pub fn ppw_check(mesh: &SphericalDomainMesh, mesh_error_rel: f64) -> Result<PpwReport> {
    let spectrum = solve_dirichlet(mesh, 2)?;
    ppw_check_with_spectrum(mesh, &spectrum, mesh_error_rel)
}

pub fn ppw_check_with_spectrum(
    mesh: &SphericalDomainMesh,
    spectrum: &DomainSpectrum,
    mesh_error_rel: f64,
) -> Result<PpwReport> {
    let ball_radius = radius_for_lambda1(2, spectrum.lambda1)?;
    let ball_pair = spectral_pair(BallSpec::new(2, ball_radius)?)?;
    let prof = build_profile_from_pair(&ball_pair, 1024)?;
    let gap = gap_bound(mesh, spectrum, &prof, mesh_error_rel)?;

    let area = mesh.spherical_area();
    if area >= sphere_volume(2, 1.0) / 2.0 + 1e-9 {
        return Err(Error::InvalidParameter(
            "domain volume exceeds the hemisphere".into(),
        ));
    }
    let star_radius = theta_of_volume(2, 1.0, area)?;
    let star_pair = spectral_pair(BallSpec::new(2, star_radius)?)?;

    let tol = 3.0 * mesh_error_rel;
    let i1_margin = ball_pair.lambda2 - spectrum.lambda2;
    let ratio_domain = spectrum.lambda2 / spectrum.lambda1;
    let ratio_star = star_pair.lambda2 / star_pair.lambda1;
    let i4_margin = ratio_star - ratio_domain;
    let sperner_margin = spectrum.lambda1 - star_pair.lambda1;
    let radius_margin = star_radius - ball_radius;

    Ok(PpwReport {
        lambda1: spectrum.lambda1,
        lambda2: spectrum.lambda2,
        mesh_h: spectrum.mesh_h,
        mesh_error_rel,
        ball_radius,
        lambda2_ball: ball_pair.lambda2,
        star_radius,
        lambda1_star: star_pair.lambda1,
        lambda2_star: star_pair.lambda2,
        i1_margin,
        i4_margin,
        sperner_margin,
        radius_margin,
        i1_ok: i1_margin >= -tol * ball_pair.lambda2,
        i4_ok: i4_margin >= -tol * ratio_star,
        sperner_ok: sperner_margin >= -tol * star_pair.lambda1,
        radius_ok: radius_margin >= -tol * star_radius,
        gap,
    })
}

/// Generate the domain at `h` and at 2h, estimate the relative eigenvalue
/// error by Richardson comparison, and run the full check on the fine mesh.
pub fn ppw_check_domain(kind: &DomainKind, h: f64) -> Result<PpwReport> {
    let fine = make_domain(kind, h)?;
    let coarse = make_domain(kind, 2.0 * h)?;
    let spec_fine = solve_dirichlet(&fine, 2)?;
    let spec_coarse = solve_dirichlet(&coarse, 2)?;
    let err = mesh_error_estimate(&spec_fine, &spec_coarse);
    ppw_check_with_spectrum(&fine, &spec_fine, err)
}

/// Relative eigenvalue error of the fine solve, assuming second-order
/// convergence: err(h) ≈ |λ(h) - λ(2h)| / 3.
pub fn mesh_error_estimate(fine: &DomainSpectrum, coarse: &DomainSpectrum) -> f64 {
    let e1 = (fine.lambda1 - coarse.lambda1).abs() / (3.0 * fine.lambda1);
    let e2 = (fine.lambda2 - coarse.lambda2).abs() / (3.0 * fine.lambda2);
    e1.max(e2)
}

/// Chiti pipeline for a meshed domain: rearranged-eigenfunction comparison
/// against the equal-λ₁ ball plus the differential-inequality check.
pub fn chiti_for_mesh(
    mesh: &SphericalDomainMesh,
    spectrum: &DomainSpectrum,
    slack_rel: f64,
) -> Result<(ChitiReport, ChitiInequalityReport)> {
    let ball_radius = radius_for_lambda1(2, spectrum.lambda1)?;
    let spec = BallSpec::new(2, ball_radius)?;
    let dm = mesh_domain_measure(mesh, &spectrum.u1)?;
    let report = chiti_crossing(&dm, spec, spectrum.lambda1, slack_rel)?;
    let ineq = chiti_inequality_residual(&dm, spec, spectrum.lambda1, 256)?;
    Ok((report, ineq))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chiti::ChitiVerdict;
    use approx::assert_abs_diff_eq;

    fn cap_mesh(theta1: f64, h: f64) -> SphericalDomainMesh {
        make_domain(&DomainKind::Cap { theta1 }, h).unwrap()
    }

    #[test]
    fn centered_cap_has_polar_center_of_mass() {
        let mesh = cap_mesh(0.8, 0.06);
        let spec = solve_dirichlet(&mesh, 2).unwrap();
        let prof = build_profile_from_pair(
            &spectral_pair(BallSpec::new(2, 0.8).unwrap()).unwrap(),
            512,
        )
        .unwrap();
        let cm = center_of_mass(&mesh, &spec.u1, &|t| prof.gtilde(t)).unwrap();
        assert!(cm.y0[2] > 1.0 - 1e-9, "y0 = {:?}", cm.y0);
        assert!(cm.orthogonality_residuals[0].abs() < 1e-8);
        assert!(cm.orthogonality_residuals[1].abs() < 1e-8);
    }

    #[test]
    fn center_of_mass_is_equivariant_under_rotation() {
        let mesh = cap_mesh(0.7, 0.07);
        let spec = solve_dirichlet(&mesh, 2).unwrap();
        let prof = build_profile_from_pair(
            &spectral_pair(BallSpec::new(2, 0.7).unwrap()).unwrap(),
            512,
        )
        .unwrap();
        let ang = 0.62f64;
        let (c, s) = (ang.cos(), ang.sin());
        let q = [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]];
        let rotated = mesh.rotated(&q);
        let cm = center_of_mass(&rotated, &spec.u1, &|t| prof.gtilde(t)).unwrap();
        // Q · north pole is the third column of Q
        let expected = [q[0][2], q[1][2], q[2][2]];
        for i in 0..3 {
            assert_abs_diff_eq!(cm.y0[i], expected[i], epsilon = 1e-8);
        }
    }

    #[test]
    fn fixed_point_and_grid_refine_agree_off_center() {
        let mesh = make_domain(
            &DomainKind::PerturbedCap {
                theta1: 0.65,
                amplitude: 0.12,
                wavenumber: 1,
            },
            0.06,
        )
        .unwrap();
        let spec = solve_dirichlet(&mesh, 2).unwrap();
        let ball_radius = radius_for_lambda1(2, spec.lambda1).unwrap();
        let prof = build_profile_from_pair(
            &spectral_pair(BallSpec::new(2, ball_radius).unwrap()).unwrap(),
            512,
        )
        .unwrap();
        let cm = center_of_mass(&mesh, &spec.u1, &|t| prof.gtilde(t)).unwrap();
        let cells = quadrature_cells(&mesh, &spec.u1);
        let (y_grid, gap, _) = grid_refine(&cells, &|t| prof.gtilde(t));
        assert!(gap < 1e-8);
        let angle = crate::mesh::arc_length(cm.y0, y_grid);
        assert!(angle < 1e-6, "methods disagree by {angle} rad");
        // wavenumber-1 perturbation pulls the center off the pole
        assert!(cm.y0[2] < 1.0 - 1e-10);
    }

    #[test]
    fn cap_gap_bound_is_tight() {
        let theta1 = 0.9;
        let fine = cap_mesh(theta1, 0.04);
        let coarse = cap_mesh(theta1, 0.08);
        let s_fine = solve_dirichlet(&fine, 2).unwrap();
        let s_coarse = solve_dirichlet(&coarse, 2).unwrap();
        let err = mesh_error_estimate(&s_fine, &s_coarse);
        let ball_radius = radius_for_lambda1(2, s_fine.lambda1).unwrap();
        let prof = build_profile_from_pair(
            &spectral_pair(BallSpec::new(2, ball_radius).unwrap()).unwrap(),
            1024,
        )
        .unwrap();
        let rep = gap_bound(&fine, &s_fine, &prof, err).unwrap();
        assert!(rep.chain_holds, "chain: {:#?}", rep.chain);
        assert!(rep.variational_holds);
        assert!(rep.bound_below_ball);
        assert!(rep.reflection_residual < 1e-12);
        assert!(rep.ball_identity_residual < 1e-6);
        // equality case: the bound matches the ball gap to mesh accuracy
        let gap_rel = (rep.bound - rep.lambda2_ball).abs() / rep.lambda2_ball;
        assert!(gap_rel < 5.0 * err + 1e-6, "gap_rel {gap_rel} vs err {err}");
    }

    #[test]
    fn cap_ppw_margins_vanish_to_mesh_accuracy() {
        let rep = ppw_check_domain(&DomainKind::Cap { theta1: 0.8 }, 0.05).unwrap();
        assert!(rep.all_ok(), "report: {:?}", rep.to_json());
        assert!(rep.i1_margin.abs() < 5.0 * rep.mesh_error_rel * rep.lambda2_ball + 1e-6);
        assert!(rep.i4_margin.abs() < 5.0 * rep.mesh_error_rel * 3.0 + 1e-6);
        assert!((rep.star_radius - 0.8).abs() < 2e-3);
        assert!((rep.ball_radius - 0.8).abs() < 2e-3);
    }

    #[test]
    fn perturbed_cap_has_positive_margins() {
        let kind = DomainKind::PerturbedCap {
            theta1: 0.8,
            amplitude: 0.1,
            wavenumber: 3,
        };
        let rep = ppw_check_domain(&kind, 0.05).unwrap();
        assert!(rep.all_ok(), "report: {:?}", rep.to_json());
        assert!(rep.i1_margin > 0.0, "i1 margin {}", rep.i1_margin);
        assert!(rep.i4_margin > 0.0, "i4 margin {}", rep.i4_margin);
        assert!(rep.sperner_margin > 0.0);
        assert!(rep.radius_margin > 0.0);
    }

    #[test]
    fn perturbed_cap_chiti_crosses_once() {
        let mesh = make_domain(
            &DomainKind::PerturbedCap {
                theta1: 0.8,
                amplitude: 0.1,
                wavenumber: 3,
            },
            0.045,
        )
        .unwrap();
        let spec = solve_dirichlet(&mesh, 2).unwrap();
        let (rep, ineq) = chiti_for_mesh(&mesh, &spec, 5e-3).unwrap();
        match rep.verdict {
            ChitiVerdict::OneCrossing { s1, .. } => assert!(s1 > 0.0),
            other => panic!("expected a crossing, got {other:?}"),
        }
        assert!(rep.sign_pattern_ok);
        assert!(rep.u_sharp_at_zero < rep.v1_at_zero);
        // inequality violation stays at mesh-noise level
        assert!(ineq.max_violation < 0.15 * ineq.rhs_sup);
    }
}
