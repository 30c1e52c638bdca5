use super::{verify, Caps, DivergenceError, Result};
use crate::linalg::{intersect, operator_norm, orthonormalize, sandwich_power, Matrix, Subspace, Vector, DEFAULT_TOL};

#[derive(Debug, Clone, PartialEq)]
pub struct ReplaceResult {
    pub y: Subspace,
    /// `s(1) > ... > s(k)`.
    pub s: Vec<u64>,
    /// `beta_1 < ... < beta_{k+1}`.
    pub betas: Vec<f64>,
    /// Orthonormal basis `e_i` of X adapted to the chain, tier by tier.
    pub tier_basis: Vec<Vector>,
    /// Tier (1-based) of each `e_i`; tier `k+1` is the rest of X.
    pub tiers: Vec<usize>,
    /// `gamma_i = beta_{tier(i)}`.
    pub gammas: Vec<f64>,
    /// `||P_X - P_Y||`.
    pub eta_achieved: f64,
    /// `||(P_X P_Y P_X)^{s(j)} - P_{X_j}||` for each j.
    pub sandwich_errors: Vec<f64>,
    /// Dimension of `X ∩ Y` as computed.
    pub intersection_dim: usize,
}

/// Relative margin the exponent ladder keeps below eps.
pub const LADDER_MARGIN: f64 = 1e-9;

/// `1 - (1 + beta^2)^{-s}`, accurate when the power is close to 1.
fn shortfall(beta: f64, s: u64) -> f64 {
    -(-(s as f64) * beta.powi(2).ln_1p()).exp_m1()
}

/// Smallest `s >= 1` with `(1 + beta^2)^{-s} < eps`.
fn min_exponent(beta: f64, eps: f64) -> f64 {
    let l = beta.powi(2).ln_1p();
    let mut s = ((1.0 / eps).ln() / l).floor().max(0.0) + 1.0;
    if s > 2f64.powi(52) {
        // beyond integer resolution; far above any cap
        return s;
    }
    while s > 1.0 && (-(s - 1.0) * l).exp() < eps {
        s -= 1.0;
    }
    while (-s * l).exp() >= eps {
        s += 1.0;
    }
    s
}

fn capped(value: f64, tier: usize, cap: u64) -> Result<u64> {
    if value > cap as f64 {
        Err(DivergenceError::ExponentCap { tier, value, cap })
    } else {
        Ok(value as u64)
    }
}

pub fn replace_projection(
    chain: &[Subspace],
    x: &Subspace,
    e: &Subspace,
    eps: f64,
    eta: f64,
    a: u64,
) -> Result<ReplaceResult> {
    replace_projection_with(chain, x, e, eps, eta, a, &Caps::default())
}

pub fn replace_projection_with(
    chain: &[Subspace],
    x: &Subspace,
    e: &Subspace,
    eps: f64,
    eta: f64,
    a: u64,
    caps: &Caps,
) -> Result<ReplaceResult> {
    let k = chain.len();
    let n = x.ambient_dim();
    if k == 0 {
        return Err(DivergenceError::BadParameter("chain must be non-empty".into()));
    }
    if !(eps > 0.0 && eps.is_finite()) || !(eta > 0.0 && eta.is_finite()) || a < 1 {
        return Err(DivergenceError::BadParameter("need eps > 0, eta > 0, a >= 1".into()));
    }
    let mut prev: Option<&Subspace> = None;
    for (j, c) in chain.iter().enumerate() {
        let inside = prev.map_or(Ok(true), |p| p.is_subspace_of(c, 1e-9))?;
        if !inside || !c.is_subspace_of(x, 1e-9)? {
            return Err(DivergenceError::BadParameter(format!("chain member {} is not nested inside X", j + 1)));
        }
        prev = Some(c);
    }
    if !x.is_subspace_of(e, 1e-9)? {
        return Err(DivergenceError::BadParameter("X must lie inside E".into()));
    }

    // Exponent ladder. It aims slightly inside eps: with tiny betas the
    // minimal exponent clears eps by a relative 1e-12 or so, which rounding
    // in the verification below cannot resolve.
    let target = eps * (1.0 - LADDER_MARGIN);
    let mut betas = vec![0.0; k + 2];
    let mut s = vec![0u64; k + 1];
    betas[k + 1] = eta / 4.0;
    s[k] = capped(min_exponent(betas[k + 1], target).max((a + 1) as f64), k, caps.s_cap)?;
    for j in (1..=k).rev() {
        let mut b = betas[j + 1] / 2.0;
        while shortfall(b, s[j]) >= target {
            b /= 2.0;
            if b == 0.0 || !b.is_normal() {
                return Err(DivergenceError::BetaUnderflow { tier: j });
            }
        }
        betas[j] = b;
        if j > 1 {
            let next = min_exponent(b, target).max((s[j] + 1) as f64);
            s[j - 1] = capped(next, j - 1, caps.s_cap)?;
        }
    }

    // Basis of X adapted to the chain.
    let mut tier_basis: Vec<Vector> = Vec::new();
    let mut tiers = Vec::new();
    for (t, space) in chain.iter().chain(std::iter::once(x)).enumerate() {
        let fresh: Vec<Vector> = space
            .basis_vectors()
            .into_iter()
            .map(|mut b| {
                for _ in 0..2 {
                    for q in &tier_basis {
                        let d = q.dot(&b);
                        b.axpy(-d, q, 1.0);
                    }
                }
                b
            })
            .collect();
        let add = orthonormalize(&fresh, n, DEFAULT_TOL)?.basis_vectors();
        tiers.extend(std::iter::repeat_n(t + 1, add.len()));
        tier_basis.extend(add);
    }

    // Room for the tilts: X⊥ ∩ E.
    let room: Vec<Vector> = e
        .basis_vectors()
        .into_iter()
        .map(|mut b| {
            for _ in 0..2 {
                b -= x.project_unchecked(&b);
            }
            b
        })
        .collect();
    let room = orthonormalize(&room, n, DEFAULT_TOL)?.basis_vectors();
    if room.len() < x.dim() {
        return Err(DivergenceError::TooSmall {
            what: "orthogonal complement of X inside E",
            needed: x.dim(),
            available: room.len(),
        });
    }

    let gammas: Vec<f64> = tiers.iter().map(|&t| betas[t]).collect();
    let mut ybasis = Matrix::zeros(n, x.dim());
    for (i, (ei, g)) in tier_basis.iter().zip(&gammas).enumerate() {
        let col = (ei + &room[i] * *g) / g.hypot(1.0);
        ybasis.set_column(i, &col);
    }
    let y = Subspace::from_orthonormal(n, ybasis)?;

    let eta_achieved = operator_norm(&(x.projector() - y.projector()));
    verify("||P_X - P_Y||", eta_achieved, eta)?;
    let intersection_dim = intersect(&[x.clone(), y.clone()], DEFAULT_TOL)?.dim();
    if intersection_dim != 0 {
        return Err(DivergenceError::Verification {
            what: "dim(X ∩ Y)".into(),
            value: intersection_dim as f64,
            bound: 1.0,
        });
    }
    let mut sandwich_errors = Vec::with_capacity(k);
    for j in 1..=k {
        let err = operator_norm(&(sandwich_power(x, &y, s[j])? - chain[j - 1].projector()));
        verify(format!("||(P_X P_Y P_X)^s({j}) - P_X{j}||"), err, eps)?;
        sandwich_errors.push(err);
    }

    Ok(ReplaceResult {
        y,
        s: s[1..].to_vec(),
        betas: betas[1..].to_vec(),
        tier_basis,
        tiers,
        gammas,
        eta_achieved,
        sandwich_errors,
        intersection_dim,
    })
}
