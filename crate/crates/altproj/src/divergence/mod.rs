//! A finite realization of three subspaces and a schedule whose iterates
//! pass close to an orthonormal sequence `e_1, e_2, ...`.
//!
//! The pieces, bottom up:
//! - [`quarter_circle`]: a word in `P_W` and projections onto a chain
//!   `X_1 ⊂ ... ⊂ X_k` that carries `u` close to `v`.
//! - [`replace_projection`]: a subspace `Y` close to `X` with
//!   `(P_X P_Y P_X)^{s(j)} ≈ P_{X_j}`, so every chain projection becomes a
//!   power of one fixed sandwich.
//! - [`build_triple`]: the two combined into a word in three projections.
//! - [`glue`]: triples on overlapping orthogonal blocks assembled into
//!   three subspaces `M1, M2, M3`.
//!
//! Everything lives in R^n, where any schedule eventually converges. What
//! is shown is a window of checkpoints along which the iterates stay close
//! to mutually orthogonal unit vectors.

mod glue;
mod quarter;
mod replace;
mod triple;

use thiserror::Error;

use crate::linalg::LinalgError;

pub use glue::{glue, glue_with, sakai_blowup, GlueOptions, GluedConstruction, TripleSummary, FINITE_DIMENSION_CAVEAT};
pub use quarter::{k_of_eps, quarter_circle, quarter_circle_with, QuarterCircleResult};
pub use replace::{replace_projection, replace_projection_with, ReplaceResult};
pub use triple::{build_triple, build_triple_with, TripleResult};

/// Search limits shared by the constructions.
#[derive(Debug, Clone, PartialEq)]
pub struct Caps {
    /// Largest power `r(j)` tried in the quarter-circle search.
    pub r_cap: u64,
    /// Largest exponent `s(j)` allowed in the replacement ladder.
    pub s_cap: u64,
    /// Halvings allowed when shrinking a perturbation `alpha_j`.
    pub max_halvings: u32,
    /// Starting perturbation `alpha_0`.
    pub alpha0: f64,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            r_cap: 1_000_000,
            s_cap: 1_000_000_000_000,
            max_halvings: 60,
            alpha0: 0.5,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DivergenceError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("epsilon must lie in (0, 1], got {0}")]
    BadEpsilon(f64),
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error("{what} needs dimension {needed}, only {available} available")]
    TooSmall {
        what: &'static str,
        needed: usize,
        available: usize,
    },
    #[error("power r({j}) exceeds the cap {cap}; use a larger epsilon")]
    PowerCap { j: usize, cap: u64 },
    #[error("no perturbation alpha_{j} found within {halvings} halvings")]
    AlphaSearch { j: usize, halvings: u32 },
    #[error("exponent s({tier}) = {value:e} exceeds the cap {cap}; use a larger epsilon or eta")]
    ExponentCap { tier: usize, value: f64, cap: u64 },
    #[error("beta_{tier} underflows double precision")]
    BetaUnderflow { tier: usize },
    #[error("check failed: {what} = {value:e}, bound {bound:e}")]
    Verification { what: String, value: f64, bound: f64 },
    #[error("budget 4*sum(eps) = {total} is not below 1/2")]
    Budget { total: f64 },
    #[error("triple {index}: {source}")]
    Triple {
        index: usize,
        #[source]
        source: Box<DivergenceError>,
    },
}

pub type Result<T> = std::result::Result<T, DivergenceError>;

fn verify(what: impl Into<String>, value: f64, bound: f64) -> Result<()> {
    if value < bound {
        Ok(())
    } else {
        Err(DivergenceError::Verification {
            what: what.into(),
            value,
            bound,
        })
    }
}
