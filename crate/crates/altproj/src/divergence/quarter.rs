use std::f64::consts::FRAC_PI_2;

use super::{verify, Caps, DivergenceError, Result};
use crate::linalg::{operator_norm, orthonormalize, sandwich_power, Matrix, Subspace, Vector, DEFAULT_TOL};
use crate::word::Word;

/// Smallest `k >= 1` with `cos(pi/2k)^k > 1 - eps`.
pub fn k_of_eps(eps: f64) -> Result<usize> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(DivergenceError::BadEpsilon(eps));
    }
    // cos(pi/4)^2 rounds to just above 1/2; ties must not count as strict.
    const MARGIN: f64 = 1e-12;
    let mut k = 1usize;
    while (FRAC_PI_2 / k as f64).cos().powi(k as i32) <= 1.0 - eps + MARGIN {
        k += 1;
    }
    Ok(k)
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuarterCircleResult {
    pub k: usize,
    /// `h_j = u cos(pi j / 2k) + v sin(pi j / 2k)` for `j = 0..=k`.
    pub h: Vec<Vector>,
    /// Orthonormal directions in `X ∩ W⊥` used for the perturbations.
    pub z: Vec<Vector>,
    /// `alpha_0 > ... > alpha_{k-1} > alpha_k = 0`.
    pub alphas: Vec<f64>,
    pub w: Subspace,
    /// `X_1 ⊂ ... ⊂ X_k`.
    pub chain: Vec<Subspace>,
    /// `r(1), ..., r(k)`.
    pub r: Vec<u64>,
    /// `||(P_{X_j} P_W P_{X_j})^{r(j)} - P_{h_j}||` for each j.
    pub intermediate: Vec<f64>,
    /// Over letters `1 = P_W`, `j + 1 = P_{X_j}`.
    pub phi: Word,
    /// `||phi(P_W, P_{X_1}, ...) u - v||`.
    pub achieved_error: f64,
    /// `||P_{h_k} ... P_{h_1} u - v||`.
    pub consecutive_error: f64,
}

fn line_projector(h: &Vector) -> Matrix {
    h * h.transpose()
}

fn sandwich_error(xj: &Subspace, w: &Subspace, ph: &Matrix, r: u64) -> Result<f64> {
    Ok(operator_norm(&(sandwich_power(xj, w, r)? - ph)))
}

/// Smallest `r <= cap` with `err(r) < tau`, assuming `err` is non-increasing
/// (it is `mu^r` for the second eigenvalue `mu` of the sandwich).
fn smallest_power(err: impl Fn(u64) -> Result<f64>, tau: f64, cap: u64, j: usize) -> Result<u64> {
    let mut hi = 1u64;
    while err(hi)? >= tau {
        if hi >= cap {
            return Err(DivergenceError::PowerCap { j, cap });
        }
        hi = (hi * 2).min(cap);
    }
    let mut lo = hi / 2;
    // err(lo) >= tau (or lo == 0), err(hi) < tau
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if err(mid)? < tau {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

pub fn quarter_circle(x: &Subspace, u: &Vector, v: &Vector, eps: f64, alpha0: f64) -> Result<QuarterCircleResult> {
    let caps = Caps {
        alpha0,
        ..Caps::default()
    };
    quarter_circle_with(x, u, v, eps, &caps)
}

pub fn quarter_circle_with(x: &Subspace, u: &Vector, v: &Vector, eps: f64, caps: &Caps) -> Result<QuarterCircleResult> {
    let k = k_of_eps(eps)?;
    let n = x.ambient_dim();
    if !(caps.alpha0 > 0.0 && caps.alpha0 < 1.0) {
        return Err(DivergenceError::BadParameter(format!("alpha0 must lie in (0,1), got {}", caps.alpha0)));
    }
    if u.len() != n || v.len() != n {
        return Err(DivergenceError::BadParameter("u and v must live in the ambient space of X".into()));
    }
    if (u.norm() - 1.0).abs() > 1e-10 || (v.norm() - 1.0).abs() > 1e-10 || u.dot(v).abs() > 1e-10 {
        return Err(DivergenceError::BadParameter("u and v must be orthonormal".into()));
    }
    if !x.contains(u, 1e-10)? || !x.contains(v, 1e-10)? {
        return Err(DivergenceError::BadParameter("u and v must lie in X".into()));
    }
    if x.dim() < k + 2 {
        return Err(DivergenceError::TooSmall {
            what: "quarter circle",
            needed: k + 2,
            available: x.dim(),
        });
    }

    let w = orthonormalize(&[u.clone(), v.clone()], n, DEFAULT_TOL)?;
    let h: Vec<Vector> = (0..=k)
        .map(|j| {
            let t = FRAC_PI_2 * j as f64 / k as f64;
            u * t.cos() + v * t.sin()
        })
        .collect();
    let w_perp: Vec<Vector> = x
        .basis_vectors()
        .iter()
        .map(|b| {
            let mut r = b.clone();
            for _ in 0..2 {
                r -= w.project_unchecked(&r);
            }
            r
        })
        .collect();
    let z = orthonormalize(&w_perp, n, DEFAULT_TOL)?.basis_vectors()[..k].to_vec();

    let tau = eps / k as f64;
    let mut alphas = vec![caps.alpha0];
    let mut chain = Vec::with_capacity(k);
    let mut r = Vec::with_capacity(k);
    let mut intermediate = Vec::with_capacity(k);
    // generators h_i + alpha_i z_i for i < j
    let mut gens: Vec<Vector> = vec![&h[0] + &z[0] * caps.alpha0];

    for j in 1..=k {
        let ph = line_projector(&h[j]);
        let mut unperturbed = gens.clone();
        unperturbed.push(h[j].clone());
        let xj_prime = orthonormalize(&unperturbed, n, DEFAULT_TOL)?;
        let rj = smallest_power(|p| sandwich_error(&xj_prime, &w, &ph, p), tau, caps.r_cap, j)?;

        let (xj, err) = if j < k {
            let mut alpha = alphas[j - 1] / 2.0;
            let mut found = None;
            for _ in 0..=caps.max_halvings {
                let mut g = gens.clone();
                g.push(&h[j] + &z[j] * alpha);
                let cand = orthonormalize(&g, n, DEFAULT_TOL)?;
                let e = sandwich_error(&cand, &w, &ph, rj)?;
                if e < tau {
                    found = Some((cand, e, g));
                    break;
                }
                alpha /= 2.0;
            }
            let (cand, e, g) = found.ok_or(DivergenceError::AlphaSearch {
                j,
                halvings: caps.max_halvings,
            })?;
            alphas.push(alpha);
            gens = g;
            (cand, e)
        } else {
            alphas.push(0.0);
            let e = sandwich_error(&xj_prime, &w, &ph, rj)?;
            (xj_prime, e)
        };
        if xj.dim() != j + 1 {
            return Err(DivergenceError::Verification {
                what: format!("dim X_{j}"),
                value: xj.dim() as f64,
                bound: (j + 1) as f64,
            });
        }
        chain.push(xj);
        r.push(rj);
        intermediate.push(err);
    }

    // phi = (b_k c b_k)^{r(k)} ... (b_1 c b_1)^{r(1)}
    let mut phi = Word::empty();
    for j in (1..=k).rev() {
        phi = phi.concat(Word::from_letters(&[j + 1, 1, j + 1]).pow(r[j - 1]));
    }
    let mut spaces = vec![w.clone()];
    spaces.extend(chain.iter().cloned());
    let achieved_error = (phi.apply_projections(&spaces, u)? - v).norm();

    let mut y = u.clone();
    for hj in &h[1..] {
        y = hj * hj.dot(&y);
    }
    let consecutive_error = (y - v).norm();

    verify("quarter-circle error", achieved_error, 2.0 * eps)?;
    Ok(QuarterCircleResult {
        k,
        h,
        z,
        alphas,
        w,
        chain,
        r,
        intermediate,
        phi,
        achieved_error,
        consecutive_error,
    })
}
