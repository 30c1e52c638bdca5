//! Cyclic projection onto the hyperplanes of a linear system, and the
//! three-section string example.

use thiserror::Error;

use crate::linalg::{Matrix, Vector};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KaczmarzError {
    #[error("row {row} has a zero normal")]
    ZeroNormal { row: usize },
    #[error("non-finite value in row {row}")]
    NonFinite { row: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("max_sweeps must be at least 1")]
    NoSweeps,
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("section lengths must be positive and finite")]
    NonPositiveLength,
}

pub type Result<T> = std::result::Result<T, KaczmarzError>;

/// Sweeps without a decrease after which a system is reported as
/// suspected inconsistent.
pub const STALL_SWEEPS: usize = 50;

/// `{ z : <z, normal> = offset }`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperplane {
    normal: Vector,
    offset: f64,
    norm_sq: f64,
}

impl Hyperplane {
    pub fn new(normal: Vector, offset: f64) -> Result<Self> {
        if !offset.is_finite() || normal.iter().any(|v| !v.is_finite()) {
            return Err(KaczmarzError::NonFinite { row: 0 });
        }
        let norm_sq = normal.norm_squared();
        if norm_sq == 0.0 {
            return Err(KaczmarzError::ZeroNormal { row: 0 });
        }
        Ok(Hyperplane {
            normal,
            offset,
            norm_sq,
        })
    }

    pub fn normal(&self) -> &Vector {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// `|<x, normal> - offset| / ||normal||`.
    pub fn violation(&self, x: &Vector) -> f64 {
        (self.normal.dot(x) - self.offset).abs() / self.norm_sq.sqrt()
    }
}

/// `z - y (<z, y> - c) / ||y||^2`.
pub fn hyperplane_project(h: &Hyperplane, z: &Vector) -> Result<Vector> {
    if z.len() != h.normal.len() {
        return Err(KaczmarzError::DimensionMismatch {
            expected: h.normal.len(),
            found: z.len(),
        });
    }
    let t = (h.normal.dot(z) - h.offset) / h.norm_sq;
    Ok(z - &h.normal * t)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    rows: Vec<Hyperplane>,
    ambient_dim: usize,
}

impl LinearSystem {
    pub fn new(rows: Vec<Hyperplane>, ambient_dim: usize) -> Result<Self> {
        for h in &rows {
            if h.normal.len() != ambient_dim {
                return Err(KaczmarzError::DimensionMismatch {
                    expected: ambient_dim,
                    found: h.normal.len(),
                });
            }
        }
        Ok(LinearSystem { rows, ambient_dim })
    }

    /// Rows of `a` as normals, entries of `c` as offsets.
    pub fn from_dense(a: &Matrix, c: &Vector) -> Result<Self> {
        if a.nrows() != c.len() {
            return Err(KaczmarzError::DimensionMismatch {
                expected: a.nrows(),
                found: c.len(),
            });
        }
        let rows = (0..a.nrows())
            .map(|i| {
                Hyperplane::new(a.row(i).transpose(), c[i]).map_err(|e| match e {
                    KaczmarzError::ZeroNormal { .. } => KaczmarzError::ZeroNormal { row: i },
                    KaczmarzError::NonFinite { .. } => KaczmarzError::NonFinite { row: i },
                    other => other,
                })
            })
            .collect::<Result<_>>()?;
        LinearSystem::new(rows, a.ncols())
    }

    pub fn rows(&self) -> &[Hyperplane] {
        &self.rows
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn matrix(&self) -> Matrix {
        let mut a = Matrix::zeros(self.rows.len(), self.ambient_dim);
        for (i, h) in self.rows.iter().enumerate() {
            a.set_row(i, &h.normal.transpose());
        }
        a
    }

    pub fn rhs(&self) -> Vector {
        Vector::from_iterator(self.rows.len(), self.rows.iter().map(|h| h.offset))
    }

    /// Largest normalized row violation.
    pub fn max_violation(&self, x: &Vector) -> f64 {
        self.rows.iter().map(|h| h.violation(x)).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KaczmarzResult {
    pub solution: Vector,
    /// Max row violation after each sweep.
    pub residual_history: Vec<f64>,
    pub converged: bool,
    pub suspected_inconsistent: bool,
}

/// Row kept sparse when fewer than a quarter of its entries are nonzero.
enum Row {
    Dense(Vector),
    Sparse(Vec<(usize, f64)>),
}

/// Full sweeps in row order until the max violation is at most `tol`.
pub fn solve(sys: &LinearSystem, x0: &Vector, max_sweeps: usize, tol: f64) -> Result<KaczmarzResult> {
    if x0.len() != sys.ambient_dim {
        return Err(KaczmarzError::DimensionMismatch {
            expected: sys.ambient_dim,
            found: x0.len(),
        });
    }
    if max_sweeps == 0 {
        return Err(KaczmarzError::NoSweeps);
    }
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(KaczmarzError::BadTolerance(tol));
    }
    let rows: Vec<(Row, f64, f64)> = sys
        .rows
        .iter()
        .map(|h| {
            let nz: Vec<(usize, f64)> = h.normal.iter().copied().enumerate().filter(|(_, v)| *v != 0.0).collect();
            let row = if nz.len() * 4 < h.normal.len() {
                Row::Sparse(nz)
            } else {
                Row::Dense(h.normal.clone())
            };
            (row, h.offset, h.norm_sq)
        })
        .collect();

    let mut x = x0.clone();
    let mut history = Vec::new();
    let mut stall = 0usize;
    let mut converged = false;
    let mut suspected = false;
    for _ in 0..max_sweeps {
        for (row, c, nsq) in &rows {
            match row {
                Row::Dense(y) => {
                    let t = (y.dot(&x) - c) / nsq;
                    x.axpy(-t, y, 1.0);
                }
                Row::Sparse(nz) => {
                    let dot: f64 = nz.iter().map(|&(i, v)| v * x[i]).sum();
                    let t = (dot - c) / nsq;
                    for &(i, v) in nz {
                        x[i] -= t * v;
                    }
                }
            }
        }
        let r = sys.max_violation(&x);
        if let Some(&prev) = history.last() {
            stall = if r >= prev { stall + 1 } else { 0 };
        }
        history.push(r);
        if r <= tol {
            converged = true;
            break;
        }
        if stall >= STALL_SWEEPS {
            suspected = true;
            break;
        }
    }
    Ok(KaczmarzResult {
        solution: x,
        residual_history: history,
        converged,
        suspected_inconsistent: suspected,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThirdsResult {
    /// `(left, right)` clip positions for `k = 0..=n`.
    pub positions: Vec<(f64, f64)>,
    pub left_deviation: Vec<f64>,
    pub right_deviation: Vec<f64>,
    /// Whether `|left - c/3| <= (2c/3) 4^-k` and `|right - 2c/3| <= (c/3) 4^(1-k)` at every k.
    pub bound_ok: bool,
}

pub fn thirds_p1() -> Matrix {
    Matrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 0.5, 0.5, 0.0, 0.5, 0.5])
}

pub fn thirds_p2() -> Matrix {
    Matrix::from_row_slice(3, 3, &[0.5, 0.5, 0.0, 0.5, 0.5, 0.0, 0.0, 0.0, 1.0])
}

/// A string cut into sections `x, y, z` by two clips; each step moves one
/// clip to the middle of its two neighbouring sections, alternately.
pub fn thirds_demo(x: f64, y: f64, z: f64, n_iters: usize) -> Result<ThirdsResult> {
    if [x, y, z].iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(KaczmarzError::NonPositiveLength);
    }
    let c = x + y + z;
    let t = thirds_p2() * thirds_p1();
    let mut s = Vector::from_column_slice(&[x, y, z]);
    let mut positions = Vec::with_capacity(n_iters + 1);
    let mut left_deviation = Vec::with_capacity(n_iters + 1);
    let mut right_deviation = Vec::with_capacity(n_iters + 1);
    let mut bound_ok = true;
    let slack = 1e-15 * c;
    for k in 0..=n_iters {
        if k > 0 {
            s = &t * s;
        }
        let (l, r) = (s[0], s[0] + s[1]);
        let (dl, dr) = ((l - c / 3.0).abs(), (r - 2.0 * c / 3.0).abs());
        let scale = 4f64.powi(-(k as i32));
        bound_ok &= dl <= 2.0 * c / 3.0 * scale + slack;
        bound_ok &= dr <= c / 3.0 * 4.0 * scale + slack;
        positions.push((l, r));
        left_deviation.push(dl);
        right_deviation.push(dr);
    }
    Ok(ThirdsResult {
        positions,
        left_deviation,
        right_deviation,
        bound_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    #[test]
    fn project_onto_lines() {
        let h = Hyperplane::new(v(&[1.0, 0.0]), 2.0).unwrap();
        assert_eq!(hyperplane_project(&h, &v(&[0.0, 0.0])).unwrap(), v(&[2.0, 0.0]));
        let h = Hyperplane::new(v(&[1.0, 1.0]), 0.0).unwrap();
        assert_eq!(hyperplane_project(&h, &v(&[1.0, 0.0])).unwrap(), v(&[0.5, -0.5]));
        assert!(Hyperplane::new(v(&[0.0, 0.0]), 1.0).is_err());
    }

    #[test]
    fn orthogonal_rows_solve_in_one_sweep() {
        let sys = LinearSystem::from_dense(&Matrix::identity(2, 2), &v(&[2.0, 3.0])).unwrap();
        let r = solve(&sys, &v(&[0.0, 0.0]), 10, 1e-12).unwrap();
        assert_eq!(r.solution, v(&[2.0, 3.0]));
        assert_eq!(r.residual_history.len(), 1);
        assert!(r.converged);
    }

    #[test]
    fn inconsistent_system_is_flagged() {
        let a = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 0.0]);
        let sys = LinearSystem::from_dense(&a, &v(&[1.0, 2.0])).unwrap();
        let r = solve(&sys, &v(&[0.0, 0.0]), 1000, 1e-12).unwrap();
        assert!(r.suspected_inconsistent);
        assert!(!r.converged);
    }

    #[test]
    fn thirds_matrices_act_on_first_basis_vector() {
        assert_eq!(thirds_p1() * v(&[1.0, 0.0, 0.0]), v(&[1.0, 0.0, 0.0]));
        assert_eq!(thirds_p2() * v(&[1.0, 0.0, 0.0]), v(&[0.5, 0.5, 0.0]));
    }

    #[test]
    fn thirds_from_equal_sections_stays_put() {
        let r = thirds_demo(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 5).unwrap();
        assert!(r.left_deviation.iter().all(|&d| d < 1e-15));
        assert!(r.bound_ok);
        assert!(thirds_demo(0.0, 1.0, 1.0, 1).is_err());
    }
}
