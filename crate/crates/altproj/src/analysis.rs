//! Friedrichs angle and the rate of two-space alternating projections.

use crate::linalg::{intersect, operator_norm, orthonormalize, LinalgError, Matrix, Subspace, DEFAULT_TOL};

/// Rows where measured and predicted differ by more than this are flagged.
pub const RATE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct RateCurve {
    pub c: f64,
    /// `||(P2 P1)^n - P_M||` for `n = 1..=N`.
    pub measured: Vec<f64>,
    /// `c^(2n-1)`.
    pub predicted: Vec<f64>,
    /// 1-based rows where the two disagree beyond `RATE_TOL`.
    pub flagged: Vec<usize>,
}

fn deflate(s: &Subspace, m_perp: &Subspace) -> Result<Subspace, LinalgError> {
    let vs: Vec<_> = s.basis_vectors().iter().map(|b| m_perp.project_unchecked(b)).collect();
    orthonormalize(&vs, s.ambient_dim(), DEFAULT_TOL)
}

/// Cosine of the Friedrichs angle: the largest `|<x, y>|` over unit vectors
/// of `S1 ∩ M⊥` and `S2 ∩ M⊥`, where `M = S1 ∩ S2`. Zero when either is trivial.
pub fn friedrichs_cosine(s1: &Subspace, s2: &Subspace) -> Result<f64, LinalgError> {
    let m = intersect(&[s1.clone(), s2.clone()], DEFAULT_TOL)?;
    let perp = m.complement();
    let d1 = deflate(s1, &perp)?;
    let d2 = deflate(s2, &perp)?;
    if d1.dim() == 0 || d2.dim() == 0 {
        return Ok(0.0);
    }
    let c = operator_norm(&(d1.basis().transpose() * d2.basis()));
    Ok(c.clamp(0.0, 1.0))
}

pub fn rate_curve(s1: &Subspace, s2: &Subspace, n: usize) -> Result<RateCurve, LinalgError> {
    if s1.ambient_dim() != s2.ambient_dim() {
        return Err(LinalgError::DimensionMismatch {
            expected: s1.ambient_dim(),
            found: s2.ambient_dim(),
        });
    }
    let c = friedrichs_cosine(s1, s2)?;
    let pm = intersect(&[s1.clone(), s2.clone()], DEFAULT_TOL)?.projector();
    let t: Matrix = s2.projector() * s1.projector();
    let mut power = t.clone();
    let mut measured = Vec::with_capacity(n);
    let mut predicted = Vec::with_capacity(n);
    let mut flagged = Vec::new();
    for k in 1..=n {
        if k > 1 {
            power = &power * &t;
        }
        let m = operator_norm(&(&power - &pm));
        let p = c.powi(2 * k as i32 - 1);
        if (m - p).abs() >= RATE_TOL {
            flagged.push(k);
        }
        measured.push(m);
        predicted.push(p);
    }
    Ok(RateCurve {
        c,
        measured,
        predicted,
        flagged,
    })
}
