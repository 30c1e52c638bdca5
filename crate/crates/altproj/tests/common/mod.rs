//! Independent oracles and seeded instance builders shared by the
//! integration tests. Everything here rests on the symmetric eigensolver,
//! never on the library's Gram-Schmidt or its SVD.

#![allow(dead_code)]

use altproj::linalg::{intersect, orthonormalize, sum, DEFAULT_TOL};
use altproj::random::{gaussian_vector, random_subspace, rng, Rng};
use altproj::{Matrix, Subspace, Vector};
use rand::Rng as _;

pub fn columns(vs: &[Vector], n: usize) -> Matrix {
    if vs.is_empty() {
        return Matrix::zeros(n, 0);
    }
    Matrix::from_columns(vs)
}

/// Sum of `v v^T` over eigenvectors of the symmetric `m` whose eigenvalue
/// exceeds `rel` times the largest one.
fn dominant_projector(m: &Matrix, rel: f64) -> Matrix {
    let n = m.nrows();
    let e = m.clone().symmetric_eigen();
    let top = e.eigenvalues.iter().fold(0.0_f64, |a, b| a.max(*b));
    let mut p = Matrix::zeros(n, n);
    if top <= 0.0 {
        return p;
    }
    for (i, l) in e.eigenvalues.iter().enumerate() {
        if *l > rel * top {
            let v = e.eigenvectors.column(i);
            p += v * v.transpose();
        }
    }
    p
}

/// Moore-Penrose inverse of the symmetric positive semidefinite `m`.
fn psd_pseudo_inverse(m: &Matrix, rel: f64) -> Matrix {
    let n = m.nrows();
    let e = m.clone().symmetric_eigen();
    let top = e.eigenvalues.iter().fold(0.0_f64, |a, b| a.max(*b));
    let mut p = Matrix::zeros(n, n);
    for (i, l) in e.eigenvalues.iter().enumerate() {
        if top > 0.0 && *l > rel * top {
            let v = e.eigenvectors.column(i);
            p += v * v.transpose() / *l;
        }
    }
    p
}

/// Projector onto the column span of `A`, from the eigenvectors of `A A^T`.
pub fn oracle_projector(a: &Matrix) -> Matrix {
    let n = a.nrows();
    if a.ncols() == 0 {
        return Matrix::zeros(n, n);
    }
    dominant_projector(&(a * a.transpose()), 1e-12)
}

/// `A^T (A A^T)^+ c`, the minimal-norm solution of a consistent system.
pub fn oracle_min_norm_solution(a: &Matrix, c: &Vector) -> Vector {
    a.transpose() * psd_pseudo_inverse(&(a * a.transpose()), 1e-12) * c
}

/// Eigenvalues of `[[0, M], [M^T, 0]]` are `+-sigma_i` (plus zeros), so the
/// largest one is the spectral norm without squaring small values.
fn jordan_wielandt(m: &Matrix) -> Vec<f64> {
    let (r, c) = m.shape();
    let mut big = Matrix::zeros(r + c, r + c);
    big.view_mut((0, r), (r, c)).copy_from(m);
    big.view_mut((r, 0), (c, r)).copy_from(&m.transpose());
    let mut ev: Vec<f64> = big.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

pub fn spectral_norm(m: &Matrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    jordan_wielandt(m)[0].max(0.0)
}

pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0_f64, |a, b| a.max(b.abs()))
}

/// Checks the projection laws on one seeded case in dimension 2..=12.
pub fn check_projection_laws(seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    let n = r.random_range(2..=12usize);
    let d = r.random_range(0..=n);
    let s = random_subspace(&mut r, n, d);
    let x = gaussian_vector(&mut r, n);
    let y = gaussian_vector(&mut r, n);
    let px = s.project(&x).map_err(|e| e.to_string())?;
    let ctx = format!("seed {seed}, n {n}, d {d}");

    let again = s.project(&px).map_err(|e| e.to_string())?;
    if (&again - &px).norm() > 1e-10 {
        return Err(format!("{ctx}: idempotence off by {}", (&again - &px).norm()));
    }
    let py = s.project(&y).map_err(|e| e.to_string())?;
    let adj = (px.dot(&y) - x.dot(&py)).abs();
    if adj > 1e-10 {
        return Err(format!("{ctx}: self-adjointness off by {adj}"));
    }
    let lhs = (&x - &px).norm_squared();
    let rhs = x.norm_squared() - px.norm_squared();
    if (lhs - rhs).abs() > 1e-9 * x.norm_squared().max(1.0) {
        return Err(format!("{ctx}: Pythagoras {lhs} vs {rhs}"));
    }
    if px.norm() > x.norm() + 1e-12 {
        return Err(format!("{ctx}: projection grew the norm"));
    }
    let coeffs = gaussian_vector(&mut r, d);
    let inside = s.basis() * coeffs;
    if (&x - &px).norm() > (&x - &inside).norm() + 1e-10 {
        return Err(format!("{ctx}: a point of S is closer than the projection"));
    }

    // Orthogonal additivity on U = S and V = a random subspace of S^perp.
    let comp = s.complement();
    let k = r.random_range(0..=comp.dim());
    let pick: Vec<Vector> = comp.basis_vectors().into_iter().take(k).collect();
    let v = orthonormalize(&pick, n, DEFAULT_TOL).map_err(|e| e.to_string())?;
    let both = sum(&[s.clone(), v.clone()], DEFAULT_TOL).map_err(|e| e.to_string())?;
    let diff = max_abs(&(s.projector() + v.projector() - both.projector()));
    if diff > 1e-10 {
        return Err(format!("{ctx}: P_U + P_V differs from P_(U+V) by {diff}"));
    }

    // Kernel chain over subspaces sharing a common part.
    let cd = r.random_range(0..n);
    let c = random_subspace(&mut r, n, cd);
    let count = r.random_range(2..=4usize);
    let spaces: Vec<Subspace> = (0..count)
        .map(|_| {
            let extra = r.random_range(0..=n - c.dim());
            let mut vs = c.basis_vectors();
            vs.extend((0..extra).map(|_| gaussian_vector(&mut r, n)));
            orthonormalize(&vs, n, DEFAULT_TOL).unwrap()
        })
        .collect();
    let m = intersect(&spaces, DEFAULT_TOL).map_err(|e| e.to_string())?;
    let chain = |z: &Vector| spaces.iter().fold(z.clone(), |acc, sp| sp.project(&acc).unwrap());
    let fixed = m.basis() * gaussian_vector(&mut r, m.dim());
    if (chain(&fixed) - &fixed).norm() > 1e-9 {
        return Err(format!("{ctx}: a common fixed point moved under the product"));
    }
    for sp in &spaces {
        if (sp.project(&fixed).unwrap() - &fixed).norm() > 1e-9 {
            return Err(format!("{ctx}: a common fixed point moved under one factor"));
        }
    }
    let off = m.complement().basis() * gaussian_vector(&mut r, n - m.dim());
    if off.norm() > 1e-6 {
        let moved_all = (chain(&off) - &off).norm() > 1e-9;
        let moved_one = spaces.iter().any(|sp| (sp.project(&off).unwrap() - &off).norm() > 1e-9);
        if moved_all != moved_one || !moved_all {
            return Err(format!("{ctx}: kernel chain equivalence fails off the intersection"));
        }
    }

    if !s.complement().complement().approx_eq(&s, 1e-10).unwrap() {
        return Err(format!("{ctx}: complement is not an involution"));
    }
    Ok(())
}

/// `k` random subspaces of `R^n` with dimensions drawn from `dims`.
pub fn random_family(seed: u64, n: usize, k: usize, dims: std::ops::RangeInclusive<usize>) -> Vec<Subspace> {
    let mut r = rng(seed);
    (0..k)
        .map(|_| {
            let d = r.random_range(dims.clone());
            random_subspace(&mut r, n, d)
        })
        .collect()
}

pub fn random_vector(seed: u64, n: usize) -> Vector {
    let mut r: Rng = rng(seed);
    gaussian_vector(&mut r, n)
}

/// `sup |<x, y>|` over unit `x` in the line `a` and unit `y` in the span of
/// `b1, b2`, by sampling 10^4 directions of the plane.
pub fn brute_force_line_plane(a: &Vector, b1: &Vector, b2: &Vector) -> f64 {
    let x = a.normalize();
    let q = orthonormalize(&[b1.clone(), b2.clone()], a.len(), DEFAULT_TOL).unwrap();
    let (u, w) = (q.basis().column(0).into_owned(), q.basis().column(1).into_owned());
    (0..10_000)
        .map(|i| {
            let t = std::f64::consts::PI * i as f64 / 10_000.0;
            x.dot(&(&u * t.cos() + &w * t.sin())).abs()
        })
        .fold(0.0, f64::max)
}

/// `sup ||(P_a P_b - P_M) z||` over 10^4 unit `z` of the plane, for lines
/// `a`, `b` in `R^2`.
pub fn brute_force_plane_lines(a: &Vector, b: &Vector) -> f64 {
    let pa = oracle_projector(&columns(std::slice::from_ref(a), 2));
    let pb = oracle_projector(&columns(std::slice::from_ref(b), 2));
    let same = (a.normalize().dot(&b.normalize()).abs() - 1.0).abs() < 1e-12;
    let pm = if same { pa.clone() } else { Matrix::zeros(2, 2) };
    let t = &pa * &pb - pm;
    (0..10_000)
        .map(|i| {
            let th = std::f64::consts::PI * i as f64 / 10_000.0;
            (&t * Vector::from_column_slice(&[th.cos(), th.sin()])).norm()
        })
        .fold(0.0, f64::max)
}

/// Projector onto the intersection: the kernel of `sum_k (I - P_k)`.
pub fn oracle_intersection_projector(spaces: &[Subspace]) -> Matrix {
    let n = spaces[0].ambient_dim();
    let id = Matrix::identity(n, n);
    let mut total = Matrix::zeros(n, n);
    for s in spaces {
        total += &id - oracle_projector(s.basis());
    }
    let e = total.symmetric_eigen();
    let mut p = Matrix::zeros(n, n);
    for (i, l) in e.eigenvalues.iter().enumerate() {
        if *l < 1e-10 {
            let v = e.eigenvectors.column(i);
            p += v * v.transpose();
        }
    }
    p
}

/// Principal-angle cosines between two subspaces.
pub fn oracle_cosines(a: &Subspace, b: &Subspace) -> Vec<f64> {
    if a.dim() == 0 || b.dim() == 0 {
        return Vec::new();
    }
    let ev = jordan_wielandt(&(a.basis().transpose() * b.basis()));
    ev.into_iter().take(a.dim().min(b.dim())).map(|x| x.max(0.0)).collect()
}
