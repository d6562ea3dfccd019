//! P1 finite elements on flat triangles with vertices on the sphere:
//! stiffness/mass assembly, Dirichlet elimination, and the smallest
//! eigenpairs of K u = λ M u by block inverse iteration with
//! Rayleigh–Ritz extraction (conjugate-gradient inner solves).

use crate::error::{Error, Result};
use crate::mesh::{cross, dot, flat_triangle_area, SphericalDomainMesh};
use nalgebra::{DMatrix, SymmetricEigen};

/// Compressed sparse rows, symmetric matrices stored fully.
#[derive(Debug, Clone)]
pub struct Csr {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl Csr {
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<f64> = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            if !cols.is_empty() && *row_ptr.last().unwrap() > 0 {
                // merge duplicate (r, c) entries as they stream in
            }
            if let (Some(&last_c), true) = (cols.last(), row_ptr[r + 1] > 0) {
                if last_c == c && row_ptr[r + 1] == cols.len() {
                    *vals.last_mut().unwrap() += v;
                    continue;
                }
            }
            cols.push(c);
            vals.push(v);
            row_ptr[r + 1] = cols.len();
        }
        // rows with no entries inherit the previous offset
        for r in 1..=n {
            if row_ptr[r] < row_ptr[r - 1] {
                row_ptr[r] = row_ptr[r - 1];
            }
        }
        Csr {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for r in 0..self.n {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            y[r] = acc;
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec(x, &mut y);
        y
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for r in 0..self.n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                if self.cols[k] == r {
                    d[r] = self.vals[k];
                }
            }
        }
        d
    }
}

fn dot_vec(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Jacobi-preconditioned conjugate gradients; `x` carries the warm start.
fn cg_solve(a: &Csr, b: &[f64], x: &mut [f64], diag: &[f64], rtol: f64) -> Result<usize> {
    let n = a.n;
    let mut r = vec![0.0; n];
    a.matvec(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let bnorm = dot_vec(b, b).sqrt().max(1e-300);
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(ri, di)| ri / di).collect();
    let mut p = z.clone();
    let mut rz = dot_vec(&r, &z);
    let mut ap = vec![0.0; n];
    let max_iter = 40 * (n as f64).sqrt() as usize + 200;
    for it in 0..max_iter {
        if dot_vec(&r, &r).sqrt() <= rtol * bnorm {
            return Ok(it);
        }
        a.matvec(&p, &mut ap);
        let pap = dot_vec(&p, &ap);
        if pap <= 0.0 {
            return Err(Error::EigenFailure(
                "stiffness matrix is not positive definite (mesh defect)".into(),
            ));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new = dot_vec(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::EigenFailure(format!(
        "CG stalled after {max_iter} iterations"
    )))
}

/// Dirichlet eigensolution on a mesh.
#[derive(Debug, Clone)]
pub struct DomainSpectrum {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    /// First eigenfunction on all mesh vertices (zero on the boundary),
    /// positive in the interior, L²-normalized against the mass matrix.
    pub u1: Vec<f64>,
    pub mesh_h: f64,
    pub interior_count: usize,
}

/// Assembled interior-dof system plus the vertex embedding.
pub struct Assembly {
    pub stiffness: Csr,
    pub mass: Csr,
    pub interior: Vec<usize>,
    pub vertex_to_dof: Vec<Option<usize>>,
}

pub fn assemble(mesh: &SphericalDomainMesh) -> Result<Assembly> {
    let nv = mesh.vertices.len();
    let mut vertex_to_dof = vec![None; nv];
    let mut interior = Vec::new();
    for v in 0..nv {
        if !mesh.boundary[v] {
            vertex_to_dof[v] = Some(interior.len());
            interior.push(v);
        }
    }
    if interior.is_empty() {
        return Err(Error::DegenerateMesh("no interior vertices".into()));
    }
    let n = interior.len();
    let mut kt = Vec::with_capacity(9 * mesh.triangles.len());
    let mut mt = Vec::with_capacity(9 * mesh.triangles.len());
    for t in &mesh.triangles {
        let p = [mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]];
        let area = flat_triangle_area(p[0], p[1], p[2]);
        if area < 1e-16 {
            return Err(Error::DegenerateMesh("zero-area triangle".into()));
        }
        // edge opposite vertex i, cyclic orientation
        let e = [
            [p[2][0] - p[1][0], p[2][1] - p[1][1], p[2][2] - p[1][2]],
            [p[0][0] - p[2][0], p[0][1] - p[2][1], p[0][2] - p[2][2]],
            [p[1][0] - p[0][0], p[1][1] - p[0][1], p[1][2] - p[0][2]],
        ];
        for i in 0..3 {
            let Some(di) = vertex_to_dof[t[i]] else { continue };
            for j in 0..3 {
                let Some(dj) = vertex_to_dof[t[j]] else { continue };
                kt.push((di, dj, dot(e[i], e[j]) / (4.0 * area)));
                let m = if i == j { area / 6.0 } else { area / 12.0 };
                mt.push((di, dj, m));
            }
        }
    }
    Ok(Assembly {
        stiffness: Csr::from_triplets(n, kt),
        mass: Csr::from_triplets(n, mt),
        interior,
        vertex_to_dof,
    })
}

fn splitmix(state: &mut u64) -> f64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 53) as f64 - 0.5
}

/// Smallest `want` eigenpairs of K u = λ M u by block inverse iteration.
pub fn smallest_eigenpairs(
    stiffness: &Csr,
    mass: &Csr,
    want: usize,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = stiffness.n;
    let block = (want + 3).min(n);
    let diag = stiffness.diagonal();
    if diag.iter().any(|&d| d <= 0.0) {
        return Err(Error::EigenFailure("nonpositive stiffness diagonal".into()));
    }
    let mut rng_state = 0x5eed_cafe_f00du64;
    let mut x: Vec<Vec<f64>> = (0..block)
        .map(|_| (0..n).map(|_| splitmix(&mut rng_state)).collect())
        .collect();
    let mut solutions: Vec<Vec<f64>> = vec![vec![0.0; n]; block];
    let mut ritz_prev = vec![f64::INFINITY; block];
    let mut scratch = vec![0.0; n];

    for _outer in 0..300 {
        // Y_j = K⁻¹ M X_j, warm-started from the previous solve
        for j in 0..block {
            mass.matvec(&x[j], &mut scratch);
            cg_solve(stiffness, &scratch, &mut solutions[j], &diag, 1e-12)?;
        }
        // M-orthonormalize (modified Gram-Schmidt, one re-pass)
        for j in 0..block {
            for _pass in 0..2 {
                for i in 0..j {
                    let mi = mass.apply(&solutions[i]);
                    let c = dot_vec(&solutions[j], &mi);
                    for k in 0..n {
                        solutions[j][k] -= c * solutions[i][k];
                    }
                }
            }
            let mj = mass.apply(&solutions[j]);
            let norm = dot_vec(&solutions[j], &mj).sqrt();
            if norm < 1e-300 {
                return Err(Error::EigenFailure("block collapsed to zero".into()));
            }
            for k in 0..n {
                solutions[j][k] /= norm;
            }
        }
        // Rayleigh-Ritz in the M-orthonormal basis
        let mut a = DMatrix::zeros(block, block);
        let ky: Vec<Vec<f64>> = solutions.iter().map(|y| stiffness.apply(y)).collect();
        for i in 0..block {
            for j in 0..block {
                a[(i, j)] = dot_vec(&solutions[i], &ky[j]);
            }
        }
        let sym = SymmetricEigen::new((&a + a.transpose()) * 0.5);
        let mut order: Vec<usize> = (0..block).collect();
        order.sort_by(|&p, &q| sym.eigenvalues[p].partial_cmp(&sym.eigenvalues[q]).unwrap());
        let ritz: Vec<f64> = order.iter().map(|&p| sym.eigenvalues[p]).collect();
        let mut rotated: Vec<Vec<f64>> = vec![vec![0.0; n]; block];
        for (slot, &p) in order.iter().enumerate() {
            for i in 0..block {
                let w = sym.eigenvectors[(i, p)];
                if w != 0.0 {
                    for k in 0..n {
                        rotated[slot][k] += w * solutions[i][k];
                    }
                }
            }
        }
        x = rotated;
        solutions = x.clone();

        let drift = (0..want)
            .map(|i| (ritz[i] - ritz_prev[i]).abs() / ritz[i].max(1e-300))
            .fold(0.0f64, f64::max);
        ritz_prev = ritz.clone();
        if drift < 1e-12 {
            // confirm with true residuals before accepting
            let mut ok = true;
            for i in 0..want {
                let kx = stiffness.apply(&x[i]);
                let mx = mass.apply(&x[i]);
                let mut res = 0.0;
                let mut scale = 0.0;
                for k in 0..n {
                    let r = kx[k] - ritz[i] * mx[k];
                    res += r * r;
                    scale += (ritz[i] * mx[k]).powi(2);
                }
                ok &= res.sqrt() <= 1e-7 * scale.sqrt().max(1e-300);
            }
            if ok {
                return Ok((ritz[..want].to_vec(), x.into_iter().take(want).collect()));
            }
        }
    }
    Err(Error::EigenFailure(
        "block inverse iteration did not converge".into(),
    ))
}

/// Assemble and solve for the smallest eigenpairs of the Dirichlet
/// Laplacian on the meshed domain; u₁ is sign-fixed positive and
/// M-normalized.
pub fn solve_dirichlet(mesh: &SphericalDomainMesh, k: usize) -> Result<DomainSpectrum> {
    let want = k.max(2) + 1;
    let asm = assemble(mesh)?;
    let (eigs, vecs) = smallest_eigenpairs(&asm.stiffness, &asm.mass, want)?;
    let mut u = vecs[0].clone();
    // orient positive; the discrete ground state has one sign
    let sum: f64 = u.iter().sum();
    if sum < 0.0 {
        for v in &mut u {
            *v = -*v;
        }
    }
    let negative = u.iter().filter(|&&v| v < -1e-10).count();
    if negative > 0 {
        return Err(Error::EigenFailure(format!(
            "first eigenvector changes sign at {negative} interior vertices"
        )));
    }
    let mut u1 = vec![0.0; mesh.vertices.len()];
    for (dof, &vertex) in asm.interior.iter().enumerate() {
        u1[vertex] = u[dof].max(0.0);
    }
    Ok(DomainSpectrum {
        lambda1: eigs[0],
        lambda2: eigs[1],
        lambda3: eigs[2],
        u1,
        mesh_h: mesh.max_edge(),
        interior_count: asm.interior.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{make_domain, DomainKind};

    #[test]
    fn csr_matvec_and_duplicate_merge() {
        let a = Csr::from_triplets(
            2,
            vec![(0, 0, 1.0), (0, 0, 1.0), (0, 1, 3.0), (1, 0, 3.0), (1, 1, 4.0)],
        );
        let y = a.apply(&[1.0, 2.0]);
        assert_eq!(y, vec![8.0, 11.0]);
        assert_eq!(a.diagonal(), vec![2.0, 4.0]);
    }

    #[test]
    fn cg_solves_small_spd_system() {
        let a = Csr::from_triplets(
            3,
            vec![
                (0, 0, 4.0),
                (0, 1, 1.0),
                (1, 0, 1.0),
                (1, 1, 3.0),
                (2, 2, 2.0),
            ],
        );
        let b = vec![1.0, 2.0, 2.0];
        let mut x = vec![0.0; 3];
        cg_solve(&a, &b, &mut x, &a.diagonal(), 1e-14).unwrap();
        let r = a.apply(&x);
        for i in 0..3 {
            assert!((r[i] - b[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn hemisphere_cap_eigenvalues_converge() {
        // λ₁ = 2, λ₂ = 6 for the hemisphere of S²
        let mesh = make_domain(
            &DomainKind::Cap {
                theta1: std::f64::consts::FRAC_PI_2,
            },
            0.06,
        )
        .unwrap();
        let spec = solve_dirichlet(&mesh, 2).unwrap();
        assert!((spec.lambda1 - 2.0).abs() < 0.01, "λ₁ = {}", spec.lambda1);
        assert!((spec.lambda2 - 6.0).abs() < 0.05, "λ₂ = {}", spec.lambda2);
        // λ₂ has multiplicity 2 on the continuum; the discrete pair is close
        assert!((spec.lambda3 - spec.lambda2).abs() < 0.05);
        // interior positivity
        assert!(spec.u1.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn eigenvalue_error_drops_at_second_order() {
        let exact = 2.0;
        let mut errs = Vec::new();
        for &h in &[0.12, 0.06] {
            let mesh = make_domain(
                &DomainKind::Cap {
                    theta1: std::f64::consts::FRAC_PI_2,
                },
                h,
            )
            .unwrap();
            let spec = solve_dirichlet(&mesh, 2).unwrap();
            errs.push((spec.lambda1 - exact).abs());
        }
        let ratio = errs[0] / errs[1];
        assert!(
            (2.5..8.0).contains(&ratio),
            "convergence ratio {ratio} from errors {errs:?}"
        );
    }

    #[test]
    fn cap_first_eigenfunction_is_radially_decreasing() {
        let mesh = make_domain(&DomainKind::Cap { theta1: 1.0 }, 0.05).unwrap();
        let spec = solve_dirichlet(&mesh, 2).unwrap();
        // bin u1 by colatitude; bin means must decrease outward up to O(h)
        let bins = 12;
        let mut sums = vec![0.0; bins];
        let mut counts = vec![0usize; bins];
        for (v, &u) in mesh.vertices.iter().zip(&spec.u1) {
            let theta = v[2].acos();
            let b = ((theta / 1.0) * bins as f64).min(bins as f64 - 1.0) as usize;
            sums[b] += u;
            counts[b] += 1;
        }
        let means: Vec<f64> = sums
            .iter()
            .zip(&counts)
            .map(|(s, &c)| s / c.max(1) as f64)
            .collect();
        for w in means.windows(2) {
            assert!(w[1] < w[0] + 0.02, "bin means not decreasing: {means:?}");
        }
    }

    #[test]
    fn rotation_leaves_eigenvalues_unchanged() {
        let mesh = make_domain(&DomainKind::Cap { theta1: 0.7 }, 0.07).unwrap();
        let spec = solve_dirichlet(&mesh, 2).unwrap();
        let ang = 0.83f64;
        let (c, s) = (ang.cos(), ang.sin());
        let r = [[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]];
        let spec_rot = solve_dirichlet(&mesh.rotated(&r), 2).unwrap();
        assert!((spec.lambda1 - spec_rot.lambda1).abs() < 1e-10 * spec.lambda1);
        assert!((spec.lambda2 - spec_rot.lambda2).abs() < 1e-10 * spec.lambda2);
    }
}
