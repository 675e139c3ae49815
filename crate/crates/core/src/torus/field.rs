use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::Shape;
use crate::error::{Error, Result};
use crate::grid::grid_transform;

const REAL_TOL: f64 = 1e-12;

/// Band-limited function on `T^d` stored by its Fourier coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusField {
    shape: Shape,
    coeffs: Vec<Complex64>,
    real: bool,
}

impl TorusField {
    pub fn zeros(shape: Shape, real: bool) -> Self {
        TorusField {
            shape,
            coeffs: vec![Complex64::new(0.0, 0.0); shape.len()],
            real,
        }
    }

    /// Validating constructor. A real field must satisfy
    /// `f̂(-n) = conj f̂(n)` to `1e-12` relative.
    pub fn from_coeffs(shape: Shape, coeffs: Vec<Complex64>, real: bool) -> Result<Self> {
        if coeffs.len() != shape.len() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} coefficients, got {}",
                shape.len(),
                coeffs.len()
            )));
        }
        if let Some(i) = coeffs.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        let f = TorusField { shape, coeffs, real };
        if real {
            let dev = f.hermitian_deviation();
            if dev > REAL_TOL {
                return Err(Error::NotReal { deviation: dev });
            }
        }
        Ok(f)
    }

    /// Constructor for internal call sites whose output is known to be valid.
    pub(crate) fn from_raw(shape: Shape, coeffs: Vec<Complex64>, real: bool) -> Self {
        debug_assert_eq!(coeffs.len(), shape.len());
        TorusField { shape, coeffs, real }
    }

    pub fn single_mode(shape: Shape, n: &[i64], c: Complex64) -> Result<Self> {
        let idx = shape
            .index_of(n)
            .ok_or_else(|| Error::InvalidArgument(format!("mode {n:?} outside bandlimit")))?;
        let mut f = TorusField::zeros(shape, false);
        f.coeffs[idx] = c;
        Ok(f)
    }

    pub fn constant(shape: Shape, c: f64) -> Self {
        let mut f = TorusField::zeros(shape, true);
        let z = shape.zero_index();
        f.coeffs[z] = Complex64::new(c, 0.0);
        f
    }

    /// Gaussian random coefficients, optionally symmetrized to a real field.
    pub fn random<R: Rng + ?Sized>(shape: Shape, real: bool, rng: &mut R) -> Self {
        let coeffs: Vec<Complex64> = (0..shape.len())
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let f = TorusField::from_raw(shape, coeffs, false);
        if real {
            f.real_part()
        } else {
            f
        }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn dim(&self) -> usize {
        self.shape.dim
    }

    pub fn bandlimit(&self) -> usize {
        self.shape.bandlimit
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn coeff(&self, n: &[i64]) -> Complex64 {
        self.shape
            .index_of(n)
            .map(|i| self.coeffs[i])
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// `max |f̂(-n) - conj f̂(n)|` relative to the largest coefficient.
    pub fn hermitian_deviation(&self) -> f64 {
        let scale = self.coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        let dev = (0..self.coeffs.len())
            .map(|i| (self.coeffs[self.shape.neg_index(i)] - self.coeffs[i].conj()).norm())
            .fold(0.0, f64::max);
        dev / scale
    }

    /// Coefficients of `Re f(x)`.
    pub fn real_part(&self) -> TorusField {
        let c: Vec<Complex64> = (0..self.coeffs.len())
            .map(|i| 0.5 * (self.coeffs[i] + self.coeffs[self.shape.neg_index(i)].conj()))
            .collect();
        TorusField::from_raw(self.shape, c, true)
    }

    /// Coefficients of `Im f(x)`.
    pub fn imag_part(&self) -> TorusField {
        let c: Vec<Complex64> = (0..self.coeffs.len())
            .map(|i| {
                (self.coeffs[i] - self.coeffs[self.shape.neg_index(i)].conj())
                    * Complex64::new(0.0, -0.5)
            })
            .collect();
        TorusField::from_raw(self.shape, c, true)
    }

    /// Same coefficients with the realflag dropped.
    pub fn as_complex(&self) -> TorusField {
        TorusField::from_raw(self.shape, self.coeffs.clone(), false)
    }

    /// Elementwise coefficient map; the result is marked complex.
    pub fn map_modes<F>(&self, real: bool, mut f: F) -> TorusField
    where
        F: FnMut(usize, Complex64) -> Complex64,
    {
        let c = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &z)| f(i, z))
            .collect();
        TorusField::from_raw(self.shape, c, real)
    }

    pub fn scale(&self, c: Complex64) -> TorusField {
        let real = self.real && c.im == 0.0;
        self.map_modes(real, |_, z| z * c)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `(Σ |f̂(n)|²)^{1/2}`.
    pub fn l2_coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Values on the uniform grid with `(2N+1)·oversample` points per axis.
    pub fn grid_values(&self, oversample: usize) -> Vec<Complex64> {
        grid_transform(self.shape, oversample).to_grid(&self.coeffs)
    }

    /// Inverse of [`TorusField::grid_values`] on the same grid. Modes beyond
    /// the bandlimit are discarded.
    pub fn from_grid_values(
        shape: Shape,
        oversample: usize,
        values: &[Complex64],
        real: bool,
    ) -> Result<TorusField> {
        let t = grid_transform(shape, oversample);
        if values.len() != t.grid_len() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} grid values, got {}",
                t.grid_len(),
                values.len()
            )));
        }
        let f = TorusField::from_raw(shape, t.from_grid(values), false);
        Ok(if real { f.real_part() } else { f })
    }

    /// Point evaluation by direct summation.
    pub fn eval(&self, x: &[f64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, c) in self.coeffs.iter().enumerate() {
            if *c == Complex64::new(0.0, 0.0) {
                continue;
            }
            let n = self.shape.mode_of(i);
            let phase: f64 = n.iter().zip(x).map(|(&a, &b)| a as f64 * b).sum();
            acc += c * Complex64::new(phase.cos(), phase.sin());
        }
        acc
    }

    pub(crate) fn check_same_shape(&self, other: &TorusField) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch(format!(
                "{:?} vs {:?}",
                self.shape, other.shape
            )));
        }
        Ok(())
    }

    fn zip(&self, other: &TorusField, f: impl Fn(Complex64, Complex64) -> Complex64) -> TorusField {
        assert_eq!(self.shape, other.shape, "field shapes differ");
        let c = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| f(a, b))
            .collect();
        TorusField::from_raw(self.shape, c, self.real && other.real)
    }
}

impl Add for &TorusField {
    type Output = TorusField;
    fn add(self, rhs: &TorusField) -> TorusField {
        self.zip(rhs, |a, b| a + b)
    }
}

impl Sub for &TorusField {
    type Output = TorusField;
    fn sub(self, rhs: &TorusField) -> TorusField {
        self.zip(rhs, |a, b| a - b)
    }
}

impl Neg for &TorusField {
    type Output = TorusField;
    fn neg(self) -> TorusField {
        self.map_modes(self.real, |_, z| -z)
    }
}

impl Mul<f64> for &TorusField {
    type Output = TorusField;
    fn mul(self, rhs: f64) -> TorusField {
        self.map_modes(self.real, |_, z| z * rhs)
    }
}

/// A `d`-tuple of fields sharing one shape and realflag.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    components: Vec<TorusField>,
}

impl VectorField {
    pub fn new(components: Vec<TorusField>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::ShapeMismatch("vector field needs components".into()))?;
        if components.len() != first.dim() {
            return Err(Error::ShapeMismatch(format!(
                "{} components for dimension {}",
                components.len(),
                first.dim()
            )));
        }
        for c in &components[1..] {
            first.check_same_shape(c)?;
            if c.is_real() != first.is_real() {
                return Err(Error::ShapeMismatch("mixed realflags".into()));
            }
        }
        Ok(VectorField { components })
    }

    pub(crate) fn from_raw(components: Vec<TorusField>) -> Self {
        VectorField { components }
    }

    pub fn zeros(shape: Shape, real: bool) -> Self {
        VectorField {
            components: (0..shape.dim).map(|_| TorusField::zeros(shape, real)).collect(),
        }
    }

    pub fn random<R: Rng + ?Sized>(shape: Shape, real: bool, rng: &mut R) -> Self {
        VectorField {
            components: (0..shape.dim)
                .map(|_| TorusField::random(shape, real, rng))
                .collect(),
        }
    }

    pub fn components(&self) -> &[TorusField] {
        &self.components
    }

    pub fn into_components(self) -> Vec<TorusField> {
        self.components
    }

    pub fn shape(&self) -> Shape {
        self.components[0].shape()
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn is_real(&self) -> bool {
        self.components[0].is_real()
    }

    pub fn map(&self, f: impl Fn(&TorusField) -> TorusField) -> VectorField {
        VectorField {
            components: self.components.iter().map(f).collect(),
        }
    }

    pub fn scale(&self, c: Complex64) -> VectorField {
        self.map(|u| u.scale(c))
    }

    pub fn real_part(&self) -> VectorField {
        self.map(|u| u.real_part())
    }

    pub fn imag_part(&self) -> VectorField {
        self.map(|u| u.imag_part())
    }

    pub fn as_complex(&self) -> VectorField {
        self.map(|u| u.as_complex())
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.max_abs_coeff())
            .fold(0.0, f64::max)
    }

    pub fn l2_coeff_norm(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.l2_coeff_norm().powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

impl Add for &VectorField {
    type Output = VectorField;
    fn add(self, rhs: &VectorField) -> VectorField {
        VectorField {
            components: self
                .components
                .iter()
                .zip(&rhs.components)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &VectorField {
    type Output = VectorField;
    fn sub(self, rhs: &VectorField) -> VectorField {
        VectorField {
            components: self
                .components
                .iter()
                .zip(&rhs.components)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul<f64> for &VectorField {
    type Output = VectorField;
    fn mul(self, rhs: f64) -> VectorField {
        self.map(|u| u * rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn real_and_imag_parts_recombine() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = TorusField::random(Shape::new(2, 3), false, &mut rng);
        let re = f.real_part();
        let im = f.imag_part();
        assert!(re.hermitian_deviation() < 1e-14);
        assert!(im.hermitian_deviation() < 1e-14);
        let back = &re + &im.scale(Complex64::new(0.0, 1.0));
        for (a, b) in back.coeffs().iter().zip(f.coeffs()) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn rejects_non_hermitian_real_field() {
        let shape = Shape::new(1, 2);
        let mut c = vec![Complex64::new(0.0, 0.0); shape.len()];
        c[3] = Complex64::new(1.0, 0.0);
        assert!(matches!(
            TorusField::from_coeffs(shape, c, true),
            Err(Error::NotReal { .. })
        ));
    }

    #[test]
    fn rejects_nan() {
        let shape = Shape::new(1, 1);
        let c = vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(f64::NAN, 0.0),
            Complex64::new(0.0, 0.0),
        ];
        assert!(matches!(
            TorusField::from_coeffs(shape, c, false),
            Err(Error::NonFinite(1))
        ));
    }

    #[test]
    fn grid_values_agree_with_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f = TorusField::random(Shape::new(2, 2), false, &mut rng);
        let vals = f.grid_values(2);
        let l = 10;
        let step = 2.0 * std::f64::consts::PI / l as f64;
        let direct = f.eval(&[3.0 * step, 7.0 * step]);
        assert!((vals[3 * l + 7] - direct).norm() < 1e-12);
    }

    #[test]
    fn vector_field_validates_component_count() {
        let s = Shape::new(2, 1);
        assert!(VectorField::new(vec![TorusField::zeros(s, true)]).is_err());
        assert!(VectorField::new(vec![TorusField::zeros(s, true); 2]).is_ok());
    }
}
