//! Triangulated domains on the unit 2-sphere: polar caps, azimuthally
//! perturbed caps, and geodesic polygons, plus the mesh-side geometry
//! (spherical areas, boundary loops, isoperimetric defect).
//!
//! Triangles are flat (chord) triangles with vertices on the sphere;
//! consumers treat them as an O(h²) approximation of the curved domain.

use crate::error::{Error, Result};
use std::collections::HashMap;
use std::fmt::Write as _;

const PI: f64 = std::f64::consts::PI;

pub type Vec3 = [f64; 3];

pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn normalize(a: Vec3) -> Vec3 {
    let n = norm(a);
    [a[0] / n, a[1] / n, a[2] / n]
}

/// Geodesic (great-circle) distance between unit vectors.
pub fn arc_length(a: Vec3, b: Vec3) -> f64 {
    norm(cross(a, b)).atan2(dot(a, b))
}

/// Area of the spherical triangle with the given unit-vector corners,
/// by l'Huilier's formula.
pub fn spherical_triangle_area(a: Vec3, b: Vec3, c: Vec3) -> f64 {
    let (la, lb, lc) = (arc_length(b, c), arc_length(c, a), arc_length(a, b));
    let s = 0.5 * (la + lb + lc);
    let t = ((s / 2.0).tan()
        * ((s - la) / 2.0).tan()
        * ((s - lb) / 2.0).tan()
        * ((s - lc) / 2.0).tan())
    .max(0.0);
    4.0 * t.sqrt().atan()
}

/// Flat (chord) triangle area.
pub fn flat_triangle_area(a: Vec3, b: Vec3, c: Vec3) -> f64 {
    let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
    0.5 * norm(cross(u, v))
}

/// Domain generators.
#[derive(Debug, Clone)]
pub enum DomainKind {
    /// Polar cap of geodesic radius θ₁ about the north pole.
    Cap { theta1: f64 },
    /// Cap with boundary θ_b(φ) = θ₁ (1 + amplitude · cos(wavenumber·φ));
    /// interior rays scale proportionally. Amplitude 0 reproduces the cap.
    PerturbedCap {
        theta1: f64,
        amplitude: f64,
        wavenumber: u32,
    },
    /// Geodesic polygon through the given unit vertices (fan-subdivided).
    GeodesicPolygon { vertices: Vec<Vec3> },
}

/// Triangulated domain with vertex-level boundary flags.
#[derive(Debug, Clone)]
pub struct SphericalDomainMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary: Vec<bool>,
    pub provenance: String,
}

impl SphericalDomainMesh {
    /// Structural checks: unit vertices, 2-manifold-with-boundary edge
    /// incidence, consistent orientation, boundary flags matching the
    /// boundary edges.
    pub fn validate(&self) -> Result<()> {
        for (i, v) in self.vertices.iter().enumerate() {
            if (norm(*v) - 1.0).abs() > 1e-12 {
                return Err(Error::DegenerateMesh(format!(
                    "vertex {i} is off the sphere by {}",
                    (norm(*v) - 1.0).abs()
                )));
            }
        }
        let mut edge_use: HashMap<(usize, usize), i32> = HashMap::new();
        let mut directed: HashMap<(usize, usize), i32> = HashMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                if a == b {
                    return Err(Error::DegenerateMesh("degenerate triangle edge".into()));
                }
                *edge_use.entry((a.min(b), a.max(b))).or_insert(0) += 1;
                *directed.entry((a, b)).or_insert(0) += 1;
            }
        }
        let mut on_boundary = vec![false; self.vertices.len()];
        for (&(a, b), &count) in &edge_use {
            match count {
                1 => {
                    on_boundary[a] = true;
                    on_boundary[b] = true;
                }
                2 => {
                    // interior edge must appear once in each direction
                    if directed.get(&(a, b)).copied().unwrap_or(0) != 1 {
                        return Err(Error::DegenerateMesh(format!(
                            "inconsistent orientation at edge ({a}, {b})"
                        )));
                    }
                }
                _ => {
                    return Err(Error::DegenerateMesh(format!(
                        "edge ({a}, {b}) used {count} times"
                    )))
                }
            }
        }
        if on_boundary != self.boundary {
            return Err(Error::DegenerateMesh(
                "boundary flags disagree with boundary edges".into(),
            ));
        }
        Ok(())
    }

    /// Spherical area by summing triangle excesses.
    pub fn spherical_area(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                spherical_triangle_area(self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]])
            })
            .sum()
    }

    /// Longest edge (geodesic), the resolution parameter h.
    pub fn max_edge(&self) -> f64 {
        let mut h = 0.0f64;
        for t in &self.triangles {
            for k in 0..3 {
                h = h.max(arc_length(self.vertices[t[k]], self.vertices[t[(k + 1) % 3]]));
            }
        }
        h
    }

    /// Ordered boundary vertex loop (single closed component expected).
    pub fn boundary_loop(&self) -> Result<Vec<usize>> {
        let mut next: HashMap<usize, usize> = HashMap::new();
        let mut edge_use: HashMap<(usize, usize), i32> = HashMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *edge_use.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                if edge_use[&(a.min(b), a.max(b))] == 1 {
                    next.insert(a, b);
                }
            }
        }
        let &start = next
            .keys()
            .next()
            .ok_or_else(|| Error::DegenerateMesh("mesh has no boundary".into()))?;
        let mut loop_ = vec![start];
        let mut cur = next[&start];
        while cur != start {
            loop_.push(cur);
            cur = *next
                .get(&cur)
                .ok_or_else(|| Error::DegenerateMesh("open boundary chain".into()))?;
            if loop_.len() > next.len() {
                return Err(Error::DegenerateMesh("boundary is not a simple loop".into()));
            }
        }
        if loop_.len() != next.len() {
            return Err(Error::DegenerateMesh(
                "boundary has more than one component".into(),
            ));
        }
        Ok(loop_)
    }

    /// Geodesic length of the boundary loop.
    pub fn boundary_length(&self) -> Result<f64> {
        let loop_ = self.boundary_loop()?;
        Ok(loop_
            .iter()
            .zip(loop_.iter().cycle().skip(1))
            .map(|(&a, &b)| arc_length(self.vertices[a], self.vertices[b]))
            .sum())
    }

    /// Axis y with x·y ≥ 0 for all vertices, if the mesh sits inside a
    /// closed hemisphere around its average direction (the hemisphere cap
    /// itself touches the equator, so boundary contact is allowed).
    pub fn hemisphere_axis(&self) -> Option<Vec3> {
        let mut c = [0.0; 3];
        for v in &self.vertices {
            c = [c[0] + v[0], c[1] + v[1], c[2] + v[2]];
        }
        if norm(c) < 1e-12 {
            return None;
        }
        let axis = normalize(c);
        let min_dot = self
            .vertices
            .iter()
            .map(|v| dot(*v, axis))
            .fold(f64::INFINITY, f64::min);
        (min_dot > -1e-9).then_some(axis)
    }

    /// Apply a rotation matrix (rows are the new coordinate axes).
    pub fn rotated(&self, r: &[[f64; 3]; 3]) -> Self {
        let vertices = self
            .vertices
            .iter()
            .map(|v| {
                [
                    r[0][0] * v[0] + r[0][1] * v[1] + r[0][2] * v[2],
                    r[1][0] * v[0] + r[1][1] * v[1] + r[1][2] * v[2],
                    r[2][0] * v[0] + r[2][1] * v[1] + r[2][2] * v[2],
                ]
            })
            .collect();
        Self {
            vertices,
            triangles: self.triangles.clone(),
            boundary: self.boundary.clone(),
            provenance: format!("{} (rotated)", self.provenance),
        }
    }

    /// Plain-text encoding: `v x y z`, `t i j k`, `b i` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for v in &self.vertices {
            writeln!(out, "v {:.17e} {:.17e} {:.17e}", v[0], v[1], v[2]).unwrap();
        }
        for t in &self.triangles {
            writeln!(out, "t {} {} {}", t[0], t[1], t[2]).unwrap();
        }
        for (i, &b) in self.boundary.iter().enumerate() {
            if b {
                writeln!(out, "b {i}").unwrap();
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        let mut boundary_ids = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let mut it = line.split_whitespace();
            match it.next() {
                Some("v") => {
                    let mut coord = [0.0; 3];
                    for c in &mut coord {
                        *c = it
                            .next()
                            .ok_or_else(|| Error::Parse(format!("line {}: short vertex", ln + 1)))?
                            .parse()
                            .map_err(|e| Error::Parse(format!("line {}: {e}", ln + 1)))?;
                    }
                    vertices.push(coord);
                }
                Some("t") => {
                    let mut idx = [0usize; 3];
                    for c in &mut idx {
                        *c = it
                            .next()
                            .ok_or_else(|| Error::Parse(format!("line {}: short triangle", ln + 1)))?
                            .parse()
                            .map_err(|e| Error::Parse(format!("line {}: {e}", ln + 1)))?;
                    }
                    triangles.push(idx);
                }
                Some("b") => {
                    let i: usize = it
                        .next()
                        .ok_or_else(|| Error::Parse(format!("line {}: short flag", ln + 1)))?
                        .parse()
                        .map_err(|e| Error::Parse(format!("line {}: {e}", ln + 1)))?;
                    boundary_ids.push(i);
                }
                Some(other) => {
                    return Err(Error::Parse(format!("line {}: unknown tag {other}", ln + 1)))
                }
                None => {}
            }
        }
        let mut boundary = vec![false; vertices.len()];
        for i in boundary_ids {
            if i >= vertices.len() {
                return Err(Error::Parse(format!("boundary id {i} out of range")));
            }
            boundary[i] = true;
        }
        let mesh = Self {
            vertices,
            triangles,
            boundary,
            provenance: "from_text".into(),
        };
        mesh.validate()?;
        Ok(mesh)
    }
}

fn orient_outward(vertices: &[Vec3], t: &mut [usize; 3]) {
    let (a, b, c) = (vertices[t[0]], vertices[t[1]], vertices[t[2]]);
    let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
    let n = cross(u, v);
    let centroid = [a[0] + b[0] + c[0], a[1] + b[1] + c[1], a[2] + b[2] + c[2]];
    if dot(n, centroid) < 0.0 {
        t.swap(1, 2);
    }
}

/// Build a conforming triangulation with target edge length `h`.
pub fn make_domain(kind: &DomainKind, h: f64) -> Result<SphericalDomainMesh> {
    make_domain_with(kind, h, false)
}

/// `allow_beyond_hemisphere` downgrades the hemisphere-containment error to
/// a pass-through for exploratory runs; theorem checks refuse such meshes.
pub fn make_domain_with(
    kind: &DomainKind,
    h: f64,
    allow_beyond_hemisphere: bool,
) -> Result<SphericalDomainMesh> {
    if !(h > 1e-4 && h < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "target edge length {h} outside (1e-4, 1)"
        )));
    }
    let mesh = match kind {
        DomainKind::Cap { theta1 } => ring_mesh(*theta1, 0.0, 0, h)?,
        DomainKind::PerturbedCap {
            theta1,
            amplitude,
            wavenumber,
        } => ring_mesh(*theta1, *amplitude, *wavenumber, h)?,
        DomainKind::GeodesicPolygon { vertices } => polygon_mesh(vertices, h)?,
    };
    mesh.validate()?;
    if mesh.hemisphere_axis().is_none() && !allow_beyond_hemisphere {
        let max_angle = mesh
            .vertices
            .iter()
            .map(|v| v[2].acos())
            .fold(0.0f64, f64::max);
        return Err(Error::HemisphereViolation { max_angle });
    }
    Ok(mesh)
}

fn sph(theta: f64, phi: f64) -> Vec3 {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

/// Polar-ring triangulation; `amplitude`/`wavenumber` scale each ray's
/// colatitude by 1 + a·cos(kφ).
fn ring_mesh(theta1: f64, amplitude: f64, wavenumber: u32, h: f64) -> Result<SphericalDomainMesh> {
    if !(theta1 > 0.0 && theta1 * (1.0 + amplitude.abs()) < PI) {
        return Err(Error::InvalidParameter(format!(
            "cap radius {theta1} (amplitude {amplitude}) outside (0, pi)"
        )));
    }
    if amplitude.abs() >= 0.7 {
        return Err(Error::InvalidParameter(
            "perturbation amplitude must stay below 0.7".into(),
        ));
    }
    let rings = ((theta1 / h).ceil() as usize).max(2);
    let mut vertices: Vec<Vec3> = vec![[0.0, 0.0, 1.0]];
    let mut boundary = vec![false];
    let mut ring_start = vec![0usize; rings + 1];
    let mut ring_count = vec![0usize; rings + 1];
    ring_start[0] = 0;
    ring_count[0] = 1;
    let scale = |phi: f64| 1.0 + amplitude * (wavenumber as f64 * phi).cos();
    for i in 1..=rings {
        let theta_i = theta1 * i as f64 / rings as f64;
        let count = ((2.0 * PI * theta_i.sin() / h).ceil() as usize).max(6);
        ring_start[i] = vertices.len();
        ring_count[i] = count;
        let offset = if i % 2 == 0 { 0.5 } else { 0.0 };
        for j in 0..count {
            let phi = 2.0 * PI * (j as f64 + offset) / count as f64;
            vertices.push(sph(theta_i * scale(phi), phi));
            boundary.push(i == rings);
        }
    }
    let mut triangles: Vec<[usize; 3]> = Vec::new();
    // pole fan
    for j in 0..ring_count[1] {
        triangles.push([0, ring_start[1] + j, ring_start[1] + (j + 1) % ring_count[1]]);
    }
    // annular strips by two-pointer merge on azimuth
    for i in 1..rings {
        let (sa, na) = (ring_start[i], ring_count[i]);
        let (sb, nb) = (ring_start[i + 1], ring_count[i + 1]);
        let off_a = if i % 2 == 0 { 0.5 } else { 0.0 };
        let off_b = if (i + 1) % 2 == 0 { 0.5 } else { 0.0 };
        let ang_a = |k: usize| 2.0 * PI * (k as f64 + off_a) / na as f64;
        let ang_b = |k: usize| 2.0 * PI * (k as f64 + off_b) / nb as f64;
        let (mut ia, mut ib) = (0usize, 0usize);
        while ia < na || ib < nb {
            let next_a = if ia < na { ang_a(ia + 1) } else { f64::INFINITY };
            let next_b = if ib < nb { ang_b(ib + 1) } else { f64::INFINITY };
            if next_a <= next_b {
                triangles.push([sa + ia % na, sb + ib % nb, sa + (ia + 1) % na]);
                ia += 1;
            } else {
                triangles.push([sa + ia % na, sb + ib % nb, sb + (ib + 1) % nb]);
                ib += 1;
            }
        }
    }
    for t in &mut triangles {
        orient_outward(&vertices, t);
    }
    let provenance = if amplitude == 0.0 {
        format!("cap(theta1={theta1}, h={h})")
    } else {
        format!("perturbed_cap(theta1={theta1}, amplitude={amplitude}, wavenumber={wavenumber}, h={h})")
    };
    Ok(SphericalDomainMesh {
        vertices,
        triangles,
        boundary,
        provenance,
    })
}

/// Great-circle arcs (a, b) and (c, d) cross in their interiors.
fn arcs_cross(a: Vec3, b: Vec3, c: Vec3, d: Vec3) -> bool {
    let n1 = cross(a, b);
    let n2 = cross(c, d);
    let line = cross(n1, n2);
    if norm(line) < 1e-14 {
        return false; // coplanar arcs; adjacency rules handle these
    }
    for cand in [normalize(line), normalize([-line[0], -line[1], -line[2]])] {
        let within = |p: Vec3, q: Vec3, x: Vec3| {
            let npq = cross(p, q);
            dot(cross(p, x), npq) > 1e-12 && dot(cross(x, q), npq) > 1e-12
        };
        if within(a, b, cand) && within(c, d, cand) {
            return true;
        }
    }
    false
}

fn polygon_mesh(corners: &[Vec3], h: f64) -> Result<SphericalDomainMesh> {
    if corners.len() < 3 {
        return Err(Error::InvalidParameter("polygon needs at least 3 vertices".into()));
    }
    let corners: Vec<Vec3> = corners.iter().map(|v| normalize(*v)).collect();
    let k = corners.len();
    for i in 0..k {
        for j in i + 1..k {
            if dot(corners[i], corners[j]) > 1.0 - 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "repeated polygon vertices {i} and {j}"
                )));
            }
        }
    }
    // boundary self-intersection scan over non-adjacent edge pairs
    for i in 0..k {
        for j in 0..k {
            if i == j || (i + 1) % k == j || (j + 1) % k == i {
                continue;
            }
            if arcs_cross(corners[i], corners[(i + 1) % k], corners[j], corners[(j + 1) % k]) {
                return Err(Error::DegenerateMesh(format!(
                    "polygon edges {i} and {j} intersect"
                )));
            }
        }
    }
    let centroid = {
        let mut c = [0.0; 3];
        for v in &corners {
            c = [c[0] + v[0], c[1] + v[1], c[2] + v[2]];
        }
        if norm(c) < 1e-9 {
            return Err(Error::DegenerateMesh("polygon centroid is degenerate".into()));
        }
        normalize(c)
    };
    // one subdivision level for every fan triangle keeps spoke points shared
    let mut max_arc = 0.0f64;
    for i in 0..k {
        max_arc = max_arc
            .max(arc_length(corners[i], corners[(i + 1) % k]))
            .max(arc_length(centroid, corners[i]));
    }
    let level = ((max_arc / h).ceil() as usize).max(1);

    let mut vertices: Vec<Vec3> = Vec::new();
    let mut boundary: Vec<bool> = Vec::new();
    let mut index: HashMap<[u64; 3], usize> = HashMap::new();
    let mut triangles: Vec<[usize; 3]> = Vec::new();
    let mut vertex_id = |p: Vec3, on_boundary: bool, vertices: &mut Vec<Vec3>, boundary: &mut Vec<bool>| {
        let key = [p[0].to_bits(), p[1].to_bits(), p[2].to_bits()];
        if let Some(&id) = index.get(&key) {
            if on_boundary {
                boundary[id] = true;
            }
            return id;
        }
        let id = vertices.len();
        vertices.push(p);
        boundary.push(on_boundary);
        index.insert(key, id);
        id
    };
    for e in 0..k {
        let (a, b) = (corners[e], corners[(e + 1) % k]);
        // barycentric grid over (centroid, a, b), projected to the sphere
        let point = |i: usize, j: usize| {
            // i steps toward a, j toward b, rest stays at the centroid
            let ci = i as f64 / level as f64;
            let cj = j as f64 / level as f64;
            let c0 = 1.0 - ci - cj;
            normalize([
                c0 * centroid[0] + ci * a[0] + cj * b[0],
                c0 * centroid[1] + ci * a[1] + cj * b[1],
                c0 * centroid[2] + ci * a[2] + cj * b[2],
            ])
        };
        let mut grid: HashMap<(usize, usize), usize> = HashMap::new();
        for i in 0..=level {
            for j in 0..=(level - i) {
                let on_outer = i + j == level;
                let id = vertex_id(point(i, j), on_outer, &mut vertices, &mut boundary);
                grid.insert((i, j), id);
            }
        }
        for i in 0..level {
            for j in 0..(level - i) {
                let mut t = [grid[&(i, j)], grid[&(i + 1, j)], grid[&(i, j + 1)]];
                orient_outward(&vertices, &mut t);
                triangles.push(t);
                if i + j < level - 1 {
                    let mut t = [grid[&(i + 1, j)], grid[&(i + 1, j + 1)], grid[&(i, j + 1)]];
                    orient_outward(&vertices, &mut t);
                    triangles.push(t);
                }
            }
        }
    }
    Ok(SphericalDomainMesh {
        vertices,
        triangles,
        boundary,
        provenance: format!("geodesic_polygon({k} corners, h={h})"),
    })
}

/// Isoperimetric data of a meshed S² domain:
/// defect = L² - (4πA - A²) ≥ 0 with equality only for geodesic caps.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct IsoperimetricReport {
    pub boundary_length: f64,
    pub area: f64,
    pub defect: f64,
}

pub fn isoperimetric_check_s2(mesh: &SphericalDomainMesh) -> Result<IsoperimetricReport> {
    mesh.validate()?;
    let area = mesh.spherical_area();
    let boundary_length = mesh.boundary_length()?;
    Ok(IsoperimetricReport {
        boundary_length,
        area,
        defect: boundary_length * boundary_length - (4.0 * PI * area - area * area),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn octant_triangle_area() {
        let a = [1.0, 0.0, 0.0];
        let b = [0.0, 1.0, 0.0];
        let c = [0.0, 0.0, 1.0];
        assert_abs_diff_eq!(spherical_triangle_area(a, b, c), PI / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn cap_mesh_is_valid_and_close_to_cap_geometry() {
        let mesh = make_domain(&DomainKind::Cap { theta1: 0.8 }, 0.05).unwrap();
        mesh.validate().unwrap();
        let area = mesh.spherical_area();
        let exact = 2.0 * PI * (1.0 - 0.8f64.cos());
        assert!((area - exact).abs() < 3e-3 * exact, "area {area} vs {exact}");
        let len = mesh.boundary_length().unwrap();
        let exact_len = 2.0 * PI * 0.8f64.sin();
        assert!((len - exact_len).abs() < 3e-3 * exact_len);
        assert!(mesh.max_edge() < 0.11);
        assert!(mesh.hemisphere_axis().is_some());
    }

    #[test]
    fn perturbed_cap_amplitude_zero_equals_cap() {
        let cap = make_domain(&DomainKind::Cap { theta1: 0.6 }, 0.06).unwrap();
        let same = make_domain(
            &DomainKind::PerturbedCap {
                theta1: 0.6,
                amplitude: 0.0,
                wavenumber: 3,
            },
            0.06,
        )
        .unwrap();
        assert_eq!(cap.triangles, same.triangles);
        for (a, b) in cap.vertices.iter().zip(&same.vertices) {
            assert_abs_diff_eq!(a[0], b[0], epsilon = 1e-15);
            assert_abs_diff_eq!(a[2], b[2], epsilon = 1e-15);
        }
    }

    #[test]
    fn perturbed_cap_is_valid_and_noncircular() {
        let mesh = make_domain(
            &DomainKind::PerturbedCap {
                theta1: 0.7,
                amplitude: 0.1,
                wavenumber: 3,
            },
            0.04,
        )
        .unwrap();
        mesh.validate().unwrap();
        let rep = isoperimetric_check_s2(&mesh).unwrap();
        assert!(rep.defect > 1e-3, "non-cap defect {}", rep.defect);
    }

    #[test]
    fn cap_mesh_defect_is_small_but_positive() {
        // the inscribed boundary polygon is not a cap, so the discrete
        // defect is positive and O(h²)-small
        let mesh = make_domain(&DomainKind::Cap { theta1: 0.9 }, 0.03).unwrap();
        let rep = isoperimetric_check_s2(&mesh).unwrap();
        assert!(rep.defect > 0.0);
        assert!(rep.defect < 0.05);
    }

    #[test]
    fn polygon_mesh_shares_spokes_and_flags_boundary() {
        let tri = DomainKind::GeodesicPolygon {
            vertices: vec![
                normalize([0.3, 0.1, 1.0]),
                normalize([-0.25, 0.3, 1.0]),
                normalize([0.0, -0.35, 1.0]),
            ],
        };
        let mesh = make_domain(&tri, 0.05).unwrap();
        mesh.validate().unwrap();
        assert!(mesh.boundary_loop().unwrap().len() > 10);
        let rep = isoperimetric_check_s2(&mesh).unwrap();
        assert!(rep.defect > 0.0);
    }

    #[test]
    fn polygon_rejects_bad_input() {
        let p = normalize([0.3, 0.0, 1.0]);
        let repeated = DomainKind::GeodesicPolygon {
            vertices: vec![p, p, normalize([0.0, 0.3, 1.0])],
        };
        assert!(make_domain(&repeated, 0.05).is_err());
        // bow-tie quadrilateral self-intersects
        let bowtie = DomainKind::GeodesicPolygon {
            vertices: vec![
                normalize([0.3, 0.3, 1.0]),
                normalize([-0.3, -0.3, 1.0]),
                normalize([-0.3, 0.3, 1.0]),
                normalize([0.3, -0.3, 1.0]),
            ],
        };
        assert!(make_domain(&bowtie, 0.05).is_err());
    }

    #[test]
    fn hemisphere_violation_detected() {
        let big = DomainKind::Cap { theta1: 2.2 };
        assert!(matches!(
            make_domain(&big, 0.08),
            Err(Error::HemisphereViolation { .. })
        ));
        assert!(make_domain_with(&big, 0.08, true).is_ok());
    }

    #[test]
    fn text_round_trip() {
        let mesh = make_domain(&DomainKind::Cap { theta1: 0.5 }, 0.1).unwrap();
        let text = mesh.to_text();
        let back = SphericalDomainMesh::from_text(&text).unwrap();
        assert_eq!(mesh.triangles, back.triangles);
        assert_eq!(mesh.boundary, back.boundary);
        assert!(SphericalDomainMesh::from_text("v 0 0\n").is_err());
    }

    #[test]
    fn rotation_preserves_geometry() {
        let mesh = make_domain(&DomainKind::Cap { theta1: 0.6 }, 0.07).unwrap();
        let c = 0.3f64.cos();
        let s = 0.3f64.sin();
        let r = [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]];
        let rot = mesh.rotated(&r);
        rot.validate().unwrap();
        assert_abs_diff_eq!(mesh.spherical_area(), rot.spherical_area(), epsilon = 1e-12);
        assert_abs_diff_eq!(
            mesh.boundary_length().unwrap(),
            rot.boundary_length().unwrap(),
            epsilon = 1e-12
        );
    }
}
