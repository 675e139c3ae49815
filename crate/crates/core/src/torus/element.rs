use num_complex::Complex64;

use super::{Components, Shape, TorusField, VectorField};

/// Fields that can be flattened to coefficient vectors for the convex solver.
pub trait FieldLike: Components + Clone + Send + Sync {
    fn to_fields(&self) -> Vec<Vec<Complex64>>;
    fn from_fields(&self, fields: Vec<Vec<Complex64>>) -> Self;
    fn zeros_like(&self) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn scaled(&self, c: f64) -> Self;
    fn shape(&self) -> Shape;
    fn is_real_field(&self) -> bool;
}

impl FieldLike for TorusField {
    fn to_fields(&self) -> Vec<Vec<Complex64>> {
        vec![self.coeffs().to_vec()]
    }
    fn from_fields(&self, mut fields: Vec<Vec<Complex64>>) -> Self {
        let f = TorusField::from_raw(self.shape(), fields.remove(0), false);
        if self.is_real() {
            f.real_part()
        } else {
            f
        }
    }
    fn zeros_like(&self) -> Self {
        TorusField::zeros(self.shape(), self.is_real())
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn scaled(&self, c: f64) -> Self {
        self * c
    }
    fn shape(&self) -> Shape {
        TorusField::shape(self)
    }
    fn is_real_field(&self) -> bool {
        self.is_real()
    }
}

impl FieldLike for VectorField {
    fn to_fields(&self) -> Vec<Vec<Complex64>> {
        self.components().iter().map(|c| c.coeffs().to_vec()).collect()
    }
    fn from_fields(&self, fields: Vec<Vec<Complex64>>) -> Self {
        let shape = self.shape();
        let real = self.is_real();
        VectorField::from_raw(
            fields
                .into_iter()
                .map(|c| {
                    let f = TorusField::from_raw(shape, c, false);
                    if real {
                        f.real_part()
                    } else {
                        f
                    }
                })
                .collect(),
        )
    }
    fn zeros_like(&self) -> Self {
        VectorField::zeros(self.shape(), self.is_real())
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn scaled(&self, c: f64) -> Self {
        self * c
    }
    fn shape(&self) -> Shape {
        VectorField::shape(self)
    }
    fn is_real_field(&self) -> bool {
        self.is_real()
    }
}
