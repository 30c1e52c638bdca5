use super::quarter::quarter_circle_with;
use super::replace::replace_projection_with;
use super::{verify, Caps, QuarterCircleResult, ReplaceResult, Result};
use crate::linalg::{Subspace, Vector};
use crate::word::Word;

#[derive(Debug, Clone, PartialEq)]
pub struct TripleResult {
    pub w: Subspace,
    pub x: Subspace,
    pub y: Subspace,
    /// Over letters `1 = P_W`, `2 = P_X`, `3 = P_Y`.
    pub psi: Word,
    pub eta_achieved: f64,
    /// `||psi(P_W, P_X, P_Y) u - v||`.
    pub achieved_error: f64,
    pub s: Vec<u64>,
    pub betas: Vec<f64>,
    pub quarter: QuarterCircleResult,
    pub replace: ReplaceResult,
}

/// Replaces `P_W`-letter `1` by `a1` and chain letter `j + 1` by
/// `(a2 a3 a2)^{s(j)}`.
pub(crate) fn substitute_chain(phi: &Word, s: &[u64]) -> Word {
    phi.substitute(&|l| {
        if l == 1 {
            Word::letter(1)
        } else {
            Word::from_letters(&[2, 3, 2]).pow(s[l - 2])
        }
    })
}

pub fn build_triple(e: &Subspace, x: &Subspace, u: &Vector, v: &Vector, eps: f64, eta: f64) -> Result<TripleResult> {
    build_triple_with(e, x, u, v, eps, eta, &Caps::default())
}

pub fn build_triple_with(
    e: &Subspace,
    x: &Subspace,
    u: &Vector,
    v: &Vector,
    eps: f64,
    eta: f64,
    caps: &Caps,
) -> Result<TripleResult> {
    let quarter = quarter_circle_with(x, u, v, eps, caps)?;
    let inner_eps = eps / quarter.phi.len() as f64;
    let replace = replace_projection_with(&quarter.chain, x, e, inner_eps, eta, 1, caps)?;
    let psi = substitute_chain(&quarter.phi, &replace.s);
    let spaces = [quarter.w.clone(), x.clone(), replace.y.clone()];
    let achieved_error = (psi.apply_projections(&spaces, u)? - v).norm();
    verify("triple error", achieved_error, 3.0 * eps)?;
    Ok(TripleResult {
        w: quarter.w.clone(),
        x: x.clone(),
        y: replace.y.clone(),
        psi,
        eta_achieved: replace.eta_achieved,
        achieved_error,
        s: replace.s.clone(),
        betas: replace.betas.clone(),
        quarter,
        replace,
    })
}
