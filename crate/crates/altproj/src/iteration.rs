//! The iteration `x_n = P_{j_n} x_{n-1}` with traces and diagnostics.

use thiserror::Error;

use crate::linalg::{intersect, LinalgError, Subspace, Vector, DEFAULT_TOL};
use crate::schedule::Schedule;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IterationError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("schedule alphabet is {alphabet} but {spaces} subspaces were given")]
    AlphabetMismatch { alphabet: usize, spaces: usize },
    #[error("at least one subspace is required")]
    NoSubspaces,
    #[error("trace was recorded without stored iterates")]
    NoStoredIterates,
    #[error("invalid run configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, IterationError>;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub max_steps: usize,
    /// Stop once the increment (and the residual, when tracked) stays below
    /// this for `window_len` consecutive steps.
    pub stop_tol: f64,
    pub window_len: usize,
    pub store_iterates: bool,
    /// Track `||x_n - P_M x_0||`.
    pub track_residual: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            max_steps: 10_000,
            stop_tol: 1e-12,
            window_len: 5,
            store_iterates: false,
            track_residual: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Converged,
    MaxSteps,
    ScheduleExhausted,
}

/// Per-step record. Norms and residuals have one entry per iterate including
/// `x_0`; increments and indices have one entry per step.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub iterate_norms: Vec<f64>,
    pub increments: Vec<f64>,
    pub residuals: Option<Vec<f64>>,
    pub indices: Vec<usize>,
    pub final_iterate: Vector,
    pub stored_iterates: Option<Vec<Vector>>,
    pub limit: Option<Vector>,
    pub stop: StopReason,
}

impl Trace {
    pub fn steps(&self) -> usize {
        self.indices.len()
    }

    pub fn converged(&self) -> bool {
        self.stop == StopReason::Converged
    }

    pub fn final_residual(&self) -> Option<f64> {
        self.residuals.as_ref().and_then(|r| r.last().copied())
    }
}

fn check_family(subspaces: &[Subspace], x0: &Vector) -> Result<()> {
    if subspaces.is_empty() {
        return Err(IterationError::NoSubspaces);
    }
    for s in subspaces {
        if s.ambient_dim() != x0.len() {
            return Err(LinalgError::DimensionMismatch {
                expected: s.ambient_dim(),
                found: x0.len(),
            }
            .into());
        }
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(LinalgError::NonFinite.into());
    }
    Ok(())
}

pub fn run(subspaces: &[Subspace], schedule: &Schedule, x0: &Vector, cfg: &RunConfig) -> Result<Trace> {
    check_family(subspaces, x0)?;
    if schedule.alphabet() != subspaces.len() {
        return Err(IterationError::AlphabetMismatch {
            alphabet: schedule.alphabet(),
            spaces: subspaces.len(),
        });
    }
    if cfg.max_steps == 0 || cfg.window_len == 0 || !(cfg.stop_tol > 0.0) {
        return Err(IterationError::Config(
            "max_steps and window_len must be positive, stop_tol > 0".into(),
        ));
    }

    let limit = if cfg.track_residual {
        Some(reference_limit(subspaces, x0)?)
    } else {
        None
    };
    let mut x = x0.clone();
    let mut norms = vec![x.norm()];
    let mut increments = Vec::new();
    let mut residuals = limit.as_ref().map(|l| vec![(&x - l).norm()]);
    let mut indices = Vec::new();
    let mut stored = cfg.store_iterates.then(|| vec![x.clone()]);
    let mut quiet = 0usize;
    let mut stop = StopReason::MaxSteps;
    let mut emitted = schedule.iter();

    for _ in 0..cfg.max_steps {
        let Some(j) = emitted.next() else {
            stop = StopReason::ScheduleExhausted;
            break;
        };
        let next = subspaces[j - 1].project_unchecked(&x);
        let inc = (&next - &x).norm();
        x = next;
        norms.push(x.norm());
        increments.push(inc);
        indices.push(j);
        let mut small = inc < cfg.stop_tol;
        if let (Some(r), Some(l)) = (residuals.as_mut(), limit.as_ref()) {
            let res = (&x - l).norm();
            r.push(res);
            small &= res < cfg.stop_tol;
        }
        if let Some(s) = stored.as_mut() {
            s.push(x.clone());
        }
        quiet = if small { quiet + 1 } else { 0 };
        if quiet >= cfg.window_len {
            stop = StopReason::Converged;
            break;
        }
    }

    Ok(Trace {
        iterate_norms: norms,
        increments,
        residuals,
        indices,
        final_iterate: x,
        stored_iterates: stored,
        limit,
        stop,
    })
}

/// `P_M x_0` with `M` the intersection of the subspaces.
pub fn reference_limit(subspaces: &[Subspace], x0: &Vector) -> Result<Vector> {
    check_family(subspaces, x0)?;
    Ok(intersect(subspaces, DEFAULT_TOL)?.project(x0)?)
}

/// `||T^n x_0 - T^{n+1} x_0||` for `n = 0..=n_max`, `T = P_J ... P_1`.
pub fn kakutani_gaps(subspaces: &[Subspace], x0: &Vector, n_max: usize) -> Result<Vec<f64>> {
    check_family(subspaces, x0)?;
    let mut y = x0.clone();
    let mut gaps = Vec::with_capacity(n_max + 1);
    for _ in 0..=n_max {
        let mut ty = y.clone();
        for s in subspaces {
            ty = s.project_unchecked(&ty);
        }
        gaps.push((&y - &ty).norm());
        y = ty;
    }
    Ok(gaps)
}

/// Largest `||x_n - x_m||^2 / sum_{k=m}^{n-1} ||x_{k+1} - x_k||^2` over
/// `1 <= m < n <= L`, skipping zero denominators.
pub fn sakai_constant(trace: &Trace) -> Result<f64> {
    let xs = trace.stored_iterates.as_ref().ok_or(IterationError::NoStoredIterates)?;
    Ok(sakai_ratio_max(xs, 1))
}

/// Same ratio over an arbitrary list of iterates, starting at index `first`.
pub(crate) fn sakai_ratio_max(xs: &[Vector], first: usize) -> f64 {
    let inc: Vec<f64> = xs.windows(2).map(|w| (&w[1] - &w[0]).norm_squared()).collect();
    let mut best = 0.0_f64;
    for m in first..xs.len() {
        // Summed per window: differences of prefix sums lose the late,
        // tiny increments to cancellation.
        let mut den = 0.0;
        for n in m + 1..xs.len() {
            den += inc[n - 1];
            if den > 0.0 {
                best = best.max((&xs[n] - &xs[m]).norm_squared() / den);
            }
        }
    }
    best
}
