//! Band-limited fields on the torus, Littlewood–Paley blocks, norms and
//! Fourier-side differential operators.

mod element;
mod field;
pub mod lp;
mod norms;
mod ops;
mod shape;

pub use element::FieldLike;
pub use field::{TorusField, VectorField};
pub use lp::{last_block, lp_block, psi};
pub use norms::{norm, norm_with, s1linf_grid, Components, Couple, SpaceNorm, DEFAULT_OVERSAMPLE};
pub use ops::{
    div_free_part, div_residual, divergence, gradient, gradient_part, potential_of,
    zero_mean_project,
};
pub use shape::Shape;
