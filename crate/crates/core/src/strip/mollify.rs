use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;

use super::LineFunction;
use crate::error::{Error, Result};

const NODES: usize = 256;

fn rule() -> &'static (GaussLegendre, f64) {
    static RULE: OnceLock<(GaussLegendre, f64)> = OnceLock::new();
    RULE.get_or_init(|| {
        let r = GaussLegendre::new(NonZeroUsize::new(NODES).unwrap());
        let mass = r.integrate(-1.0, 1.0, bump);
        (r, mass)
    })
}

fn bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s * s)).exp()
    }
}

/// The normalized bump `φ(s) ∝ exp(−1/(1 − s²))` on `[−1, 1]`.
pub fn phi(s: f64) -> f64 {
    bump(s) / rule().1
}

/// `φ̂(ξ) = ∫ φ(s) e^{−iξs} ds`, real since `φ` is even; `φ̂(0) = 1` exactly.
pub fn phi_hat(xi: f64) -> f64 {
    let (r, mass) = rule();
    if xi == 0.0 {
        return 1.0;
    }
    r.integrate(-1.0, 1.0, |s| bump(s) * (xi * s).cos()) / mass
}

/// `g ∗ φ_ε` with `φ_ε(t) = φ(t/ε)/ε`, applied as the multiplier `φ̂(εξ)`.
pub fn mollify(g: &LineFunction, eps: f64) -> Result<LineFunction> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidArgument(format!("mollifier width {eps} must be positive")));
    }
    Ok(g.dft()
        .multiply_by(|xi| Complex64::new(phi_hat(eps * xi), 0.0))
        .idft())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::{Shape, SpaceNorm, TorusField};

    #[test]
    fn transform_matches_direct_sum() {
        let h = 1e-4;
        for xi in [0.5, 3.0, 10.0] {
            let direct: f64 = (0..20000)
                .map(|k| {
                    let s = -1.0 + (k as f64 + 0.5) * h;
                    phi(s) * (xi * s).cos() * h
                })
                .sum();
            assert!((direct - phi_hat(xi)).abs() < 1e-8);
        }
    }

    #[test]
    fn constant_is_unchanged_and_widths_converge() {
        let shape = Shape::new(1, 1);
        let c = LineFunction::from_fn(4.0, 0.125, shape, 1, SpaceNorm::Lp(2.0), |_| {
            vec![TorusField::constant(shape, 2.5)]
        })
        .unwrap();
        let m = mollify(&c, 0.7).unwrap();
        assert!(m.sub(&c).unwrap().max_abs() < 1e-10);

        let g = LineFunction::from_fn(8.0, 1.0 / 16.0, shape, 1, SpaceNorm::Lp(2.0), |t| {
            vec![TorusField::constant(shape, (-t * t).exp() * (3.0 * t).cos())]
        })
        .unwrap();
        let dev: Vec<f64> = [1.0, 0.5, 0.25]
            .iter()
            .map(|&e| mollify(&g, e).unwrap().sub(&g).unwrap().max_abs())
            .collect();
        assert!(dev[0] > dev[1] && dev[1] > dev[2]);
        assert!(mollify(&g, 0.0).is_err());
    }
}
