//! Convex programs of the form `min_x Σ_i w_i ‖B_i L_i x − β_i‖` over
//! band-limited fields, solved by a primal-dual splitting.

pub mod atoms;
mod problem;
mod solver;

pub use atoms::Atom;
pub use problem::{blocks_for_norm, Block, BlockMap, Lift, Problem, Term};
pub use solver::{Duals, Fields, Solution, SolverOptions};

use crate::exec::Exec;
use crate::torus::DEFAULT_OVERSAMPLE;

/// Numerical settings shared by the convex-program based functionals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveConfig {
    pub tol: f64,
    pub max_iters: usize,
    pub oversample: usize,
    pub exec: Exec,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            tol: 1e-6,
            max_iters: 50_000,
            oversample: DEFAULT_OVERSAMPLE,
            exec: Exec::default(),
        }
    }
}

impl SolveConfig {
    pub fn with_tol(tol: f64) -> Self {
        SolveConfig {
            tol,
            ..Default::default()
        }
    }

    pub(crate) fn solver(&self, abs_floor: f64) -> SolverOptions {
        SolverOptions {
            tol: self.tol,
            max_iters: self.max_iters,
            abs_floor,
            ..Default::default()
        }
    }
}

