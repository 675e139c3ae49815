//! Spectral laboratory for bounded solutions of `div u = div v` on the torus
//! and the real interpolation couple `(L^∞, H^{d/2})`.

pub mod error;
pub mod convex;
pub mod divsolve;
pub mod exec;
pub mod grid;
pub mod interp;
pub mod io;
pub mod pipeline;
pub mod strip;
pub mod symbols;
pub mod torus;

pub use error::{Error, Result};
pub use exec::Exec;
pub use torus::{Couple, Shape, SpaceNorm, TorusField, VectorField};
