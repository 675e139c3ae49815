//! Boundary symbols of the strip: `v̂_j = χ_j v̂_j + ρ̂_j v̂_{1−j}` for every
//! function analytic in `0 < Re z < 1`, where `v_j(t) = v(j + it)` and
//! `ĝ(ξ) = ∫ g(t) e^{−iξt} dt`, so that `v̂_1 = e^{ξ} v̂_0`.

use num_complex::Complex64;

use super::{hilbert_transform, LineFunction};
use crate::error::{Error, Result};

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn parity(j: u8) -> f64 {
    if j % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `χ_j(ξ) = 1/2 − ((−1)^j/2) sgn ξ`: the indicator of `ξ < 0` for `j = 0`
/// and of `ξ > 0` for `j = 1`, with value `1/2` at the origin.
pub fn chi(j: u8, xi: f64) -> Complex64 {
    Complex64::new(0.5 - 0.5 * parity(j) * sgn(xi), 0.0)
}

/// `ρ̂_j(ξ) = e^{−|ξ|} (1 + (−1)^j sgn ξ)/2`, the transform of
/// `ρ_0(t) = 1/(2π(1 − it))` and `ρ_1(t) = 1/(2π(1 + it))`.
pub fn rho_hat(j: u8, xi: f64) -> Complex64 {
    Complex64::new((-xi.abs()).exp() * 0.5 * (1.0 + parity(j) * sgn(xi)), 0.0)
}

/// `ρ_j(t)` in closed form.
pub fn rho(j: u8, t: f64) -> Complex64 {
    let d = Complex64::new(1.0, -parity(j) * t);
    Complex64::new(1.0 / (2.0 * std::f64::consts::PI), 0.0) / d
}

fn check_side(j: u8) -> Result<()> {
    if j > 1 {
        return Err(Error::InvalidArgument(format!("boundary index {j} not in {{0,1}}")));
    }
    Ok(())
}

/// `H_j g = g/2 − (i(−1)^j/2) H g`, the operator with symbol `χ_j`.
pub fn boundary_h(j: u8, g: &LineFunction) -> Result<LineFunction> {
    check_side(j)?;
    let hg = hilbert_transform(g);
    g.scale(Complex64::new(0.5, 0.0))
        .add(&hg.scale(Complex64::new(0.0, -0.5 * parity(j))))
}

/// `R_j g = ρ_j ∗ g`, applied as a multiplier on the discrete spectrum.
pub fn boundary_r(j: u8, g: &LineFunction) -> Result<LineFunction> {
    check_side(j)?;
    Ok(g.dft().multiply_by(|xi| rho_hat(j, xi)).idft())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::{Shape, SpaceNorm, TorusField};

    #[test]
    fn chi_values() {
        assert_eq!(chi(0, -1.0).re, 1.0);
        assert_eq!(chi(0, 2.0).re, 0.0);
        assert_eq!(chi(1, 2.0).re, 1.0);
        for xi in [-3.0, 0.0, 0.5] {
            assert_eq!(chi(0, xi) + chi(1, xi), Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn rho_hat_is_bounded() {
        for m in -400..=400 {
            let xi = m as f64 / 20.0;
            assert!(rho_hat(0, xi).norm() <= 1.0 && rho_hat(1, xi).norm() <= 1.0);
        }
    }

    #[test]
    fn boundary_operators_have_their_symbols() {
        let shape = Shape::new(1, 1);
        let g = LineFunction::from_fn(10.0, 1.0 / 16.0, shape, 1, SpaceNorm::Lp(2.0), |t| {
            vec![TorusField::constant(shape, (-t * t).exp() * (1.0 + 0.3 * t))]
        })
        .unwrap();
        let sum = boundary_h(0, &g).unwrap().add(&boundary_h(1, &g).unwrap()).unwrap();
        assert!(sum.sub(&g).unwrap().max_abs() < 1e-12);
        for j in 0..2 {
            let r = boundary_r(j, &g).unwrap().dft();
            let want = g.dft().multiply_by(|xi| rho_hat(j, xi));
            assert!(r.sub(&want).unwrap().max_abs() < 1e-8);
        }
        assert!(boundary_h(2, &g).is_err());
    }
}
