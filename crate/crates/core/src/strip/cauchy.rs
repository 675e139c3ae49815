use num_complex::Complex64;

use super::LineFunction;
use crate::error::{Error, Result};
use crate::torus::TorusField;

/// Trapezoid quadrature of the Cauchy formula on the strip,
/// `u(z) = (1/2π) ∫ [u_1(t)/(1 + it − z) − u_0(t)/(it − z)] dt`.
pub fn cauchy_eval(u0: &LineFunction, u1: &LineFunction, z: Complex64) -> Result<Vec<TorusField>> {
    if !(z.re > 0.0 && z.re < 1.0) || !z.im.is_finite() {
        return Err(Error::OutsideStrip(format!("{z}")));
    }
    u0.check_same_grid(u1)?;
    let stride = u0.components() * u0.shape().len();
    let mut acc = vec![Complex64::new(0.0, 0.0); stride];
    let w = u0.step() / (2.0 * std::f64::consts::PI);
    for k in 0..u0.count() {
        let t = u0.t(k);
        let c0 = -w / (Complex64::new(0.0, t) - z);
        let c1 = w / (Complex64::new(1.0, t) - z);
        for ((a, p), q) in acc.iter_mut().zip(u0.sample_slice(k)).zip(u1.sample_slice(k)) {
            *a += c0 * p + c1 * q;
        }
    }
    let len = u0.shape().len();
    Ok(acc
        .chunks(len)
        .map(|c| TorusField::from_raw(u0.shape(), c.to_vec(), false))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::{Shape, SpaceNorm};

    fn traces(f: impl Fn(Complex64) -> Complex64) -> (LineFunction, LineFunction) {
        let shape = Shape::new(1, 1);
        let side = |j: f64| {
            LineFunction::from_fn(8.0, 1.0 / 64.0, shape, 1, SpaceNorm::Lp(2.0), |t| {
                let v = f(Complex64::new(j, t));
                vec![TorusField::single_mode(shape, &[0], v).unwrap()]
            })
            .unwrap()
        };
        (side(0.0), side(1.0))
    }

    #[test]
    fn reproduces_analytic_functions() {
        let th = 0.3;
        let (u0, u1) = traces(|z| ((z - th) * (z - th)).exp() * 2.0);
        let v = cauchy_eval(&u0, &u1, Complex64::new(th, 0.0)).unwrap();
        assert!((v[0].coeff(&[0]) - 2.0).norm() < 1e-6);

        let (u0, u1) = traces(|z| (0.5 * z * z).exp() * z);
        let z0 = Complex64::new(th, 0.0);
        let v = cauchy_eval(&u0, &u1, z0).unwrap();
        assert!((v[0].coeff(&[0]) - z0 * (0.5 * z0 * z0).exp()).norm() < 1e-6);
    }

    #[test]
    fn rejects_points_off_the_strip() {
        let (u0, u1) = traces(|_| Complex64::new(0.0, 0.0));
        assert!(cauchy_eval(&u0, &u1, Complex64::new(1.0, 0.0)).is_err());
        assert!(cauchy_eval(&u0, &u1, Complex64::new(-0.2, 1.0)).is_err());
        let v = cauchy_eval(&u0, &u1, Complex64::new(0.5, 0.0)).unwrap();
        assert_eq!(v[0].max_abs_coeff(), 0.0);
    }
}
