//! Subspaces of R^n stored as orthonormal bases, and the dense matrix helpers
//! the rest of the crate builds on.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::word::Word;

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Default rank tolerance used when orthonormalizing input vectors.
pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite entry in input")]
    NonFinite,
    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),
    #[error("basis is not orthonormal (max deviation {0:e})")]
    NotOrthonormal(f64),
    #[error("at least one subspace is required")]
    Empty,
    #[error("letter {letter} has no matching operator (only {available} given)")]
    UnknownLetter { letter: usize, available: usize },
    #[error("singular value decomposition did not converge")]
    NoConvergence,
}

pub type Result<T> = std::result::Result<T, LinalgError>;

fn check_tol(tol: f64) -> Result<()> {
    if tol.is_finite() && tol > 0.0 {
        Ok(())
    } else {
        Err(LinalgError::InvalidTolerance(tol))
    }
}

fn check_finite(v: &Vector) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(LinalgError::NonFinite)
    }
}

/// A linear subspace of R^n. The basis columns are orthonormal.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    ambient_dim: usize,
    basis: Matrix,
}

impl Subspace {
    pub fn zero(ambient_dim: usize) -> Self {
        Subspace {
            ambient_dim,
            basis: Matrix::zeros(ambient_dim, 0),
        }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Subspace {
            ambient_dim,
            basis: Matrix::identity(ambient_dim, ambient_dim),
        }
    }

    /// Wraps columns that are already orthonormal, checking that they are.
    pub fn from_orthonormal(ambient_dim: usize, basis: Matrix) -> Result<Self> {
        if basis.nrows() != ambient_dim {
            return Err(LinalgError::DimensionMismatch {
                expected: ambient_dim,
                found: basis.nrows(),
            });
        }
        if basis.iter().any(|x| !x.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        let gram = basis.transpose() * &basis;
        let dev = (gram - Matrix::identity(basis.ncols(), basis.ncols())).amax();
        if dev > 1e-9 {
            return Err(LinalgError::NotOrthonormal(dev));
        }
        Ok(Subspace { ambient_dim, basis })
    }

    /// Span of a single nonzero vector (the zero subspace for a zero vector).
    pub fn line(v: &Vector) -> Result<Self> {
        orthonormalize(std::slice::from_ref(v), v.len(), DEFAULT_TOL)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn basis_vectors(&self) -> Vec<Vector> {
        self.basis.column_iter().map(|c| c.into_owned()).collect()
    }

    /// The orthogonal projector Q Q^T as a dense matrix.
    pub fn projector(&self) -> Matrix {
        &self.basis * self.basis.transpose()
    }

    pub fn project(&self, x: &Vector) -> Result<Vector> {
        if x.len() != self.ambient_dim {
            return Err(LinalgError::DimensionMismatch {
                expected: self.ambient_dim,
                found: x.len(),
            });
        }
        check_finite(x)?;
        Ok(self.project_unchecked(x))
    }

    pub(crate) fn project_unchecked(&self, x: &Vector) -> Vector {
        if self.dim() == 0 {
            return Vector::zeros(self.ambient_dim);
        }
        let coeffs = self.basis.tr_mul(x);
        &self.basis * coeffs
    }

    /// Distance from `x` to the subspace.
    pub fn distance(&self, x: &Vector) -> Result<f64> {
        let p = self.project(x)?;
        Ok((x - p).norm())
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> Result<bool> {
        check_tol(tol)?;
        let scale = x.norm().max(1.0);
        Ok(self.distance(x)? <= tol * scale)
    }

    pub fn is_subspace_of(&self, other: &Subspace, tol: f64) -> Result<bool> {
        self.same_ambient(other)?;
        for v in self.basis.column_iter() {
            if !other.contains(&v.into_owned(), tol)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Equality as sets: mutual containment.
    pub fn approx_eq(&self, other: &Subspace, tol: f64) -> Result<bool> {
        Ok(self.dim() == other.dim()
            && self.is_subspace_of(other, tol)?
            && other.is_subspace_of(self, tol)?)
    }

    pub fn complement(&self) -> Subspace {
        let n = self.ambient_dim;
        let target = n - self.dim();
        if target == 0 {
            return Subspace::zero(n);
        }
        let mut cands: Vec<Vector> = (0..n)
            .map(|i| {
                let mut e = Vector::zeros(n);
                e[i] = 1.0;
                for _ in 0..2 {
                    e -= self.project_unchecked(&e);
                }
                e
            })
            .collect();
        let basis = pivoted_gram_schmidt(&mut cands, DEFAULT_TOL, target);
        Subspace {
            ambient_dim: n,
            basis: columns(n, &basis),
        }
    }

    fn same_ambient(&self, other: &Subspace) -> Result<()> {
        if self.ambient_dim != other.ambient_dim {
            Err(LinalgError::DimensionMismatch {
                expected: self.ambient_dim,
                found: other.ambient_dim,
            })
        } else {
            Ok(())
        }
    }
}

fn columns(n: usize, vs: &[Vector]) -> Matrix {
    let mut m = Matrix::zeros(n, vs.len());
    for (j, v) in vs.iter().enumerate() {
        m.set_column(j, v);
    }
    m
}

/// Modified Gram-Schmidt with column pivoting and one reorthogonalization
/// pass. Candidates are consumed. Stops when the largest remaining residual
/// is at most `tol` times the largest input norm (or 1), or after `limit`
/// vectors.
fn pivoted_gram_schmidt(cands: &mut Vec<Vector>, tol: f64, limit: usize) -> Vec<Vector> {
    let scale = cands.iter().map(|c| c.norm()).fold(1.0_f64, f64::max);
    let mut basis: Vec<Vector> = Vec::new();
    while basis.len() < limit && !cands.is_empty() {
        let (idx, best) = cands
            .iter()
            .enumerate()
            .map(|(i, c)| (i, c.norm()))
            .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best <= tol * scale {
            break;
        }
        let mut q = cands.swap_remove(idx);
        for b in &basis {
            let d = b.dot(&q);
            q.axpy(-d, b, 1.0);
        }
        let nq = q.norm();
        if nq <= tol * scale {
            continue;
        }
        q /= nq;
        for c in cands.iter_mut() {
            let d = q.dot(c);
            c.axpy(-d, &q, 1.0);
        }
        basis.push(q);
    }
    basis
}

/// Orthonormal basis of the span of `vectors`. Directions whose residual
/// falls below `tol` (relative to the largest input norm) are dropped.
pub fn orthonormalize(vectors: &[Vector], ambient_dim: usize, tol: f64) -> Result<Subspace> {
    check_tol(tol)?;
    for v in vectors {
        if v.len() != ambient_dim {
            return Err(LinalgError::DimensionMismatch {
                expected: ambient_dim,
                found: v.len(),
            });
        }
        check_finite(v)?;
    }
    let mut cands = vectors.to_vec();
    let basis = pivoted_gram_schmidt(&mut cands, tol, ambient_dim);
    Ok(Subspace {
        ambient_dim,
        basis: columns(ambient_dim, &basis),
    })
}

/// The sum S1 + S2 + ... of subspaces.
pub fn sum(subspaces: &[Subspace], tol: f64) -> Result<Subspace> {
    let first = subspaces.first().ok_or(LinalgError::Empty)?;
    let mut vs = Vec::new();
    for s in subspaces {
        first.same_ambient(s)?;
        vs.extend(s.basis_vectors());
    }
    orthonormalize(&vs, first.ambient_dim, tol)
}

/// The intersection of the given subspaces, computed as the complement of
/// the sum of the complements.
pub fn intersect(subspaces: &[Subspace], tol: f64) -> Result<Subspace> {
    let first = subspaces.first().ok_or(LinalgError::Empty)?;
    check_tol(tol)?;
    if subspaces.len() == 1 {
        return Ok(first.clone());
    }
    let comps: Vec<Subspace> = subspaces
        .iter()
        .map(|s| first.same_ambient(s).map(|_| s.complement()))
        .collect::<Result<_>>()?;
    Ok(sum(&comps, tol)?.complement())
}

// SVDs go through faer: nalgebra 0.33-0.35 returns wrong factors (and wrong
// singular values) for a few percent of rank-deficient tall matrices.
fn to_faer(a: &Matrix) -> faer::Mat<f64> {
    faer::Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

/// Singular values and right singular vectors (as columns) of `a`.
fn thin_svd(a: &Matrix) -> Option<(Vec<f64>, Matrix)> {
    let svd = to_faer(a).thin_svd().ok()?;
    let s = svd.S().column_vector().iter().copied().collect();
    let v = svd.V();
    Some((s, Matrix::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)])))
}

/// Largest singular value.
pub fn operator_norm(a: &Matrix) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    match to_faer(a).singular_values() {
        Ok(s) => s.into_iter().fold(0.0, f64::max),
        Err(_) => (a.transpose() * a).symmetric_eigenvalues().max().max(0.0).sqrt(),
    }
}

/// `a^e` by repeated squaring. `a^0` is the identity.
pub fn matrix_power(a: &Matrix, mut e: u64) -> Matrix {
    let n = a.nrows();
    let mut result = Matrix::identity(n, n);
    let mut base = a.clone();
    while e > 0 {
        if e & 1 == 1 {
            result = &result * &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    result
}

/// `(P_X P_Y P_X)^s` for `s >= 1`, the identity for `s = 0`.
///
/// With `R = (I - P_Y) Q_X = U S V^T`, the sandwich in X-coordinates is
/// `V (I - S^2) V^T`. The singular values of `R` (sines of the principal
/// angles) carry high relative accuracy even when tiny, so
/// `(1 - s_i^2)^s = exp(s ln(1 - s_i^2))` stays accurate for exponents far
/// beyond what repeated squaring can resolve.
pub fn sandwich_power(x: &Subspace, y: &Subspace, s: u64) -> Result<Matrix> {
    x.same_ambient(y)?;
    let n = x.ambient_dim;
    if s == 0 {
        return Ok(Matrix::identity(n, n));
    }
    if x.dim() == 0 {
        return Ok(Matrix::zeros(n, n));
    }
    let r = &x.basis - &y.basis * y.basis.tr_mul(&x.basis);
    let (sv, vr) = thin_svd(&r).ok_or(LinalgError::NoConvergence)?;
    let scaled = Vector::from_iterator(sv.len(), sv.into_iter().map(|sv| {
        let d = (sv * sv).min(1.0);
        if d >= 1.0 {
            0.0
        } else {
            (s as f64 * (-d).ln_1p()).exp()
        }
    }));
    let v = &x.basis * vr;
    Ok(&v * Matrix::from_diagonal(&scaled) * v.transpose())
}

/// The matrix of a word with letter `i` (1-based) replaced by `ops[i-1]`.
/// The leftmost factor of the word is the leftmost matrix in the product.
pub fn word_matrix(word: &Word, ops: &[Matrix]) -> Result<Matrix> {
    let n = ops.first().map(|m| m.nrows()).ok_or(LinalgError::Empty)?;
    for m in ops {
        if m.nrows() != n || m.ncols() != n {
            return Err(LinalgError::DimensionMismatch {
                expected: n,
                found: m.nrows().max(m.ncols()),
            });
        }
    }
    word.eval_matrix(ops)
}
