//! Functions on the strip `0 < Re z < 1` with values in band-limited fields,
//! represented by their two boundary traces.

mod cauchy;
mod hilbert;
mod line;
mod mollify;
mod symbols;
mod witness;

pub use cauchy::cauchy_eval;
pub use hilbert::{hilbert_kernel, hilbert_transform};
pub use line::LineFunction;
pub use mollify::{mollify, phi, phi_hat};
pub use symbols::{boundary_h, boundary_r, chi, rho, rho_hat};
pub use witness::{build_witness, fq_norm, verify_boundary_identity, LineGrid, StripWitness, DECAY_BUDGET};
