use num_complex::Complex64;

use super::{TorusField, VectorField};
use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `(div u)^(n) = i Σ_j n_j û_j(n)`.
pub fn divergence(u: &VectorField) -> TorusField {
    let shape = u.shape();
    let mut out = vec![Complex64::new(0.0, 0.0); shape.len()];
    for (i, o) in out.iter_mut().enumerate() {
        let n = shape.mode_of(i);
        for (j, c) in u.components().iter().enumerate() {
            *o += I * (n[j] as f64) * c.coeffs()[i];
        }
    }
    TorusField::from_raw(shape, out, u.is_real())
}

/// `(grad f)_j^(n) = i n_j f̂(n)`.
pub fn gradient(f: &TorusField) -> VectorField {
    let shape = f.shape();
    let modes = shape.modes();
    let comps = (0..shape.dim)
        .map(|j| f.map_modes(f.is_real(), |i, z| I * (modes[i][j] as f64) * z))
        .collect();
    VectorField::from_raw(comps)
}

/// Sets `f̂(0) = 0`.
pub fn zero_mean_project(f: &TorusField) -> TorusField {
    let z = f.shape().zero_index();
    f.map_modes(f.is_real(), |i, c| if i == z { Complex64::new(0.0, 0.0) } else { c })
}

/// Gradient part `n (n·û)/|n|²` of a vector field, zero at `n = 0`.
pub fn gradient_part(u: &VectorField) -> VectorField {
    let shape = u.shape();
    let d = shape.dim;
    let mut comps: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); shape.len()]; d];
    for i in 0..shape.len() {
        let n = shape.mode_of(i);
        let r2: f64 = n.iter().map(|&x| (x * x) as f64).sum();
        if r2 == 0.0 {
            continue;
        }
        let mut dot = Complex64::new(0.0, 0.0);
        for j in 0..d {
            dot += n[j] as f64 * u.components()[j].coeffs()[i];
        }
        for j in 0..d {
            comps[j][i] = dot * (n[j] as f64 / r2);
        }
    }
    VectorField::from_raw(
        comps
            .into_iter()
            .map(|c| TorusField::from_raw(shape, c, u.is_real()))
            .collect(),
    )
}

/// `u - gradient_part(u)`: the divergence-free part including the mean.
pub fn div_free_part(u: &VectorField) -> VectorField {
    u - &gradient_part(u)
}

/// Potential `p` with `grad p = gradient_part(u)` and `p̂(0) = 0`.
pub fn potential_of(u: &VectorField) -> TorusField {
    let shape = u.shape();
    let mut out = vec![Complex64::new(0.0, 0.0); shape.len()];
    for (i, o) in out.iter_mut().enumerate() {
        let n = shape.mode_of(i);
        let r2: f64 = n.iter().map(|&x| (x * x) as f64).sum();
        if r2 == 0.0 {
            continue;
        }
        let mut dot = Complex64::new(0.0, 0.0);
        for (j, c) in u.components().iter().enumerate() {
            dot += n[j] as f64 * c.coeffs()[i];
        }
        *o = -I * dot / r2;
    }
    TorusField::from_raw(shape, out, u.is_real())
}

/// Largest coefficientwise difference of the divergences.
pub fn div_residual(u: &VectorField, v: &VectorField) -> Result<f64> {
    if u.shape() != v.shape() {
        return Err(Error::ShapeMismatch("div residual of mismatched fields".into()));
    }
    Ok((&divergence(u) - &divergence(v)).max_abs_coeff())
}
