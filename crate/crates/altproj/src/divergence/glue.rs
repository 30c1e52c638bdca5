use super::quarter::{k_of_eps, quarter_circle_with};
use super::replace::replace_projection_with;
use super::triple::substitute_chain;
use super::{verify, Caps, DivergenceError, Result};
use crate::iteration::{run, sakai_constant, RunConfig};
use crate::linalg::{intersect, orthonormalize, sum, Subspace, Vector, DEFAULT_TOL};
use crate::random::{random_orthogonal, rng};
use crate::schedule::Schedule;
use crate::word::Word;

pub const FINITE_DIMENSION_CAVEAT: &str = "In finite dimension every schedule of projections converges in norm. \
This construction exhibits a finite window of checkpoints along which the iterates stay close to mutually \
orthogonal unit vectors; it does not exhibit divergence.";

/// Schedules up to this length are replayed step by step by [`sakai_blowup`].
pub const LITERAL_STEPS: u128 = 5_000;

#[derive(Debug, Clone, PartialEq)]
pub struct GlueOptions {
    pub caps: Caps,
    /// Reject epsilons with `4 * sum(eps) >= 1/2`.
    pub enforce_budget: bool,
}

impl Default for GlueOptions {
    fn default() -> Self {
        GlueOptions {
            caps: Caps::default(),
            enforce_budget: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TripleSummary {
    pub k: usize,
    pub r: Vec<u64>,
    pub s: Vec<u64>,
    pub betas: Vec<f64>,
    /// Flattened length of the triple's word.
    pub psi_len: u128,
    /// Occurrences of the rotating-plane letter.
    pub n_w: u128,
    pub delta: f64,
    pub eta: f64,
    pub eta_achieved: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GluedConstruction {
    pub ambient_dim: usize,
    pub seed: u64,
    pub m1: Subspace,
    pub m2: Subspace,
    pub m3: Subspace,
    /// `e_1, ..., e_{K+1}`.
    pub e: Vec<Vector>,
    /// `Psi^(1), ..., Psi^(K)` over letters `1 = M1`, `2 = M2`, `3 = M3`.
    pub words: Vec<Word>,
    /// `Psi^(K) ... Psi^(1)` flattened, acting from the right.
    pub schedule: Schedule,
    /// `n_k`: steps after the k-th word.
    pub checkpoints: Vec<u128>,
    pub epsilons: Vec<f64>,
    pub triples: Vec<TripleSummary>,
    /// `||Psi^(i) e_i - e_{i+1}||`.
    pub verified_bounds: Vec<f64>,
    /// `x_{n_k}` from `x_0 = e_1`.
    pub checkpoint_iterates: Vec<Vector>,
    /// `||x_{n_k} - e_{k+1}||`.
    pub checkpoint_errors: Vec<f64>,
    /// Iterates at every top-level factor boundary, with their step numbers.
    pub samples: Vec<(u128, Vector)>,
    /// Smallest `||x_{n_k} - x_{n_l}||` over `k < l`.
    pub non_cauchy_gap: f64,
    /// `||x_{n_K}||`, the smallest norm up to `n_K`.
    pub min_norm: f64,
    /// Dimension of `M1 ∩ M2 ∩ M3` as computed.
    pub intersection_dim: usize,
}

fn in_triple<T>(index: usize, r: Result<T>) -> Result<T> {
    r.map_err(|e| DivergenceError::Triple {
        index,
        source: Box::new(e),
    })
}

pub fn glue(k_count: usize, epsilons: &[f64], seed: u64) -> Result<GluedConstruction> {
    glue_with(k_count, epsilons, seed, &GlueOptions::default())
}

pub fn glue_with(k_count: usize, epsilons: &[f64], seed: u64, opts: &GlueOptions) -> Result<GluedConstruction> {
    if k_count < 2 || epsilons.len() != k_count {
        return Err(DivergenceError::BadParameter(format!(
            "need K >= 2 and K epsilons, got K = {k_count} with {} epsilons",
            epsilons.len()
        )));
    }
    let ks: Vec<usize> = epsilons.iter().map(|&e| k_of_eps(e)).collect::<Result<_>>()?;
    let total = 4.0 * epsilons.iter().sum::<f64>();
    if opts.enforce_budget && total >= 0.5 {
        return Err(DivergenceError::Budget { total });
    }

    // Frame: e_1..e_{K+1}, then blocks F_i of size 2k_i + 2.
    let n = k_count + 1 + ks.iter().map(|k| 2 * k + 2).sum::<usize>();
    let frame = random_orthogonal(&mut rng(seed), n);
    let col = |c: usize| -> Vector { frame.column(c).into_owned() };
    let e: Vec<Vector> = (0..=k_count).map(col).collect();
    let mut offset = k_count + 1;
    let mut blocks = Vec::with_capacity(k_count);
    let mut xs = Vec::with_capacity(k_count);
    for (i, &k) in ks.iter().enumerate() {
        let f: Vec<Vector> = (offset..offset + 2 * k + 2).map(col).collect();
        offset += 2 * k + 2;
        let mut ev = vec![e[i].clone(), e[i + 1].clone()];
        ev.extend(f.iter().cloned());
        blocks.push(orthonormalize(&ev, n, DEFAULT_TOL)?);
        let mut xv = vec![e[i].clone(), e[i + 1].clone()];
        xv.extend(f[..k].iter().cloned());
        xs.push(orthonormalize(&xv, n, DEFAULT_TOL)?);
    }

    let quarters = (0..k_count)
        .map(|i| in_triple(i + 1, quarter_circle_with(&xs[i], &e[i], &e[i + 1], epsilons[i], &opts.caps)))
        .collect::<Result<Vec<_>>>()?;
    let deltas: Vec<f64> = quarters
        .iter()
        .zip(epsilons)
        .map(|(q, &eps)| eps / q.phi.letter_count(1) as f64)
        .collect();
    let delta_at = |i: usize| if i == 0 || i > k_count { 1.0 } else { deltas[i - 1] };

    let mut ys = Vec::with_capacity(k_count);
    let mut words = Vec::with_capacity(k_count);
    let mut triples = Vec::with_capacity(k_count);
    for i in 1..=k_count {
        let q = &quarters[i - 1];
        let eta = delta_at(i - 1).min(delta_at(i + 1));
        let inner_eps = epsilons[i - 1] / q.phi.len() as f64;
        let rp = in_triple(
            i,
            replace_projection_with(&q.chain, &xs[i - 1], &blocks[i - 1], inner_eps, eta, 1, &opts.caps),
        )?;
        let psi = substitute_chain(&q.phi, &rp.s);
        // psi letters: 1 = plane, 2 = X, 3 = Y. The plane is played by the
        // other parity's Y-space.
        let (plane, own) = if i % 2 == 0 { (3, 2) } else { (2, 3) };
        let word = psi.substitute(&|l| Word::letter([plane, 1, own][l - 1]));
        triples.push(TripleSummary {
            k: q.k,
            r: q.r.clone(),
            s: rp.s.clone(),
            betas: rp.betas.clone(),
            psi_len: psi.len(),
            n_w: psi.letter_count(1),
            delta: deltas[i - 1],
            eta,
            eta_achieved: rp.eta_achieved,
        });
        ys.push(rp.y);
        words.push(word);
    }

    // Y_0 = span{e_1} joins the even side, span{e_{K+1}} caps the last block.
    let mut even = vec![Subspace::line(&e[0])?];
    let mut odd = Vec::new();
    for (i, y) in ys.iter().enumerate() {
        if (i + 1) % 2 == 0 {
            even.push(y.clone());
        } else {
            odd.push(y.clone());
        }
    }
    let cap = Subspace::line(&e[k_count])?;
    if (k_count + 1).is_multiple_of(2) {
        even.push(cap);
    } else {
        odd.push(cap);
    }
    let m1 = sum(&xs, DEFAULT_TOL)?;
    let m2 = sum(&even, DEFAULT_TOL)?;
    let m3 = sum(&odd, DEFAULT_TOL)?;
    let spaces = [m1.clone(), m2.clone(), m3.clone()];

    let mut verified_bounds = Vec::with_capacity(k_count);
    for (i, w) in words.iter().enumerate() {
        let b = (w.apply_projections(&spaces, &e[i])? - &e[i + 1]).norm();
        in_triple(i + 1, verify(format!("||Psi({}) e_{} - e_{}||", i + 1, i + 1, i + 2), b, 4.0 * epsilons[i]))?;
        verified_bounds.push(b);
    }

    let mut x = e[0].clone();
    let mut step = 0u128;
    let mut samples = vec![(0u128, x.clone())];
    let mut checkpoints = Vec::with_capacity(k_count);
    let mut checkpoint_iterates = Vec::with_capacity(k_count);
    for w in &words {
        for f in w.factors().iter().rev() {
            x = Word::from_factor(f.clone()).apply_projections(&spaces, &x)?;
            step += f.len();
            samples.push((step, x.clone()));
        }
        checkpoints.push(step);
        checkpoint_iterates.push(x.clone());
    }
    let checkpoint_errors: Vec<f64> = checkpoint_iterates
        .iter()
        .zip(&e[1..])
        .map(|(xk, ek)| (xk - ek).norm())
        .collect();
    let mut non_cauchy_gap = f64::INFINITY;
    for a in 0..k_count {
        for b in a + 1..k_count {
            non_cauchy_gap = non_cauchy_gap.min((&checkpoint_iterates[a] - &checkpoint_iterates[b]).norm());
        }
    }
    let min_norm = x.norm();
    let intersection_dim = intersect(&[m1.clone(), m2.clone(), m3.clone()], DEFAULT_TOL)?.dim();

    let full = words.iter().rev().cloned().fold(Word::empty(), Word::concat);
    let schedule = Schedule::constructed(full, 3).map_err(|err| DivergenceError::BadParameter(err.to_string()))?;

    Ok(GluedConstruction {
        ambient_dim: n,
        seed,
        m1,
        m2,
        m3,
        e,
        words,
        schedule,
        checkpoints,
        epsilons: epsilons.to_vec(),
        triples,
        verified_bounds,
        checkpoint_iterates,
        checkpoint_errors,
        samples,
        non_cauchy_gap,
        min_norm,
        intersection_dim,
    })
}

/// Empirical Sakai constant of the construction's schedule from `x_0 = e_1`.
///
/// Short schedules are replayed step by step. Longer ones are evaluated at
/// the recorded factor boundaries, where the increment sum over a window
/// telescopes to `||x_a||^2 - ||x_b||^2`; the result is then a lower bound
/// on the step-by-step value. Windows whose norm drop is below `1e-12` are
/// skipped, since cancellation makes them meaningless.
pub fn sakai_blowup(c: &GluedConstruction) -> Result<f64> {
    let len = c.schedule.len().unwrap_or(u128::MAX);
    if len <= LITERAL_STEPS {
        let cfg = RunConfig {
            max_steps: len as usize,
            stop_tol: f64::MIN_POSITIVE,
            window_len: 1,
            store_iterates: true,
            track_residual: false,
        };
        let spaces = [c.m1.clone(), c.m2.clone(), c.m3.clone()];
        let trace = run(&spaces, &c.schedule, &c.e[0], &cfg).map_err(|e| DivergenceError::BadParameter(e.to_string()))?;
        return sakai_constant(&trace).map_err(|e| DivergenceError::BadParameter(e.to_string()));
    }
    let pts: Vec<&Vector> = c.samples.iter().filter(|(n, _)| *n >= 1).map(|(_, x)| x).collect();
    let mut best = 0.0_f64;
    for a in 0..pts.len() {
        for b in a + 1..pts.len() {
            let den = pts[a].norm_squared() - pts[b].norm_squared();
            if den > 1e-12 {
                best = best.max((pts[b] - pts[a]).norm_squared() / den);
            }
        }
    }
    Ok(best)
}
