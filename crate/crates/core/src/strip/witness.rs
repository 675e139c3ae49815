use std::collections::BTreeMap;

use num_complex::Complex64;

use super::{chi, rho_hat, LineFunction};
use crate::error::{Error, Result};
use crate::interp::{dyadic_sum, j_functional};
use crate::torus::{Couple, FieldLike, Shape, TorusField};

/// Sampling of the two boundary lines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineGrid {
    pub half_width: f64,
    pub step: f64,
}

impl Default for LineGrid {
    fn default() -> Self {
        LineGrid {
            half_width: 8.0,
            step: 1.0 / 64.0,
        }
    }
}

/// Edge budget for the boundary samples and their spectra.
pub const DECAY_BUDGET: f64 = 1e-12;

/// An analytic function on the strip held through its boundary traces
/// `v_j(t) = v(j + it)`.
#[derive(Debug, Clone)]
pub struct StripWitness {
    pub boundary0: LineFunction,
    pub boundary1: LineFunction,
    pub theta: f64,
    pub delta: f64,
    pub blocks: BTreeMap<i32, Vec<TorusField>>,
    /// `fq_norm / Σ_ν`-bound measured at construction (0 when not built from blocks).
    pub constant: f64,
    pub j_sum: f64,
    pub fq: f64,
}

impl StripWitness {
    pub fn from_boundaries(boundary0: LineFunction, boundary1: LineFunction, theta: f64, delta: f64) -> Result<Self> {
        boundary0.check_same_grid(&boundary1)?;
        Ok(StripWitness {
            boundary0,
            boundary1,
            theta,
            delta,
            blocks: BTreeMap::new(),
            constant: 0.0,
            j_sum: 0.0,
            fq: 0.0,
        })
    }

    pub fn boundary(&self, j: u8) -> &LineFunction {
        if j == 0 {
            &self.boundary0
        } else {
            &self.boundary1
        }
    }

    /// `v(z)` from the boundary traces.
    pub fn eval(&self, z: Complex64) -> Result<Vec<TorusField>> {
        super::cauchy_eval(&self.boundary0, &self.boundary1, z)
    }

    /// Multiply by `exp(δ (z² − θ²))`; the value at `θ` is unchanged.
    pub fn gaussian_factor(&self, delta: f64) -> StripWitness {
        let th = self.theta;
        let g = |j: f64| {
            move |t: f64| (Complex64::new(delta, 0.0) * (Complex64::new(j, t).powi(2) - th * th)).exp()
        };
        StripWitness {
            boundary0: self.boundary0.multiply_by(g(0.0)),
            boundary1: self.boundary1.multiply_by(g(1.0)),
            delta: self.delta + delta,
            ..self.clone()
        }
    }
}

/// `v(z) = e^{δ(z² − θ²)} Σ_ν 2^{(z−θ)ν} a^ν` on both boundaries, so that
/// `v(θ) = Σ_ν a^ν`.
#[allow(clippy::too_many_arguments)]
pub fn build_witness<F: FieldLike>(
    blocks: &BTreeMap<i32, F>,
    shape: Shape,
    components: usize,
    couple: &Couple,
    theta: f64,
    q: f64,
    delta: f64,
    grid: LineGrid,
    oversample: usize,
) -> Result<StripWitness> {
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument(format!("δ = {delta} must be positive")));
    }
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidArgument(format!("θ = {theta} not in (0,1)")));
    }
    let stored: BTreeMap<i32, Vec<TorusField>> = blocks
        .iter()
        .map(|(&nu, b)| (nu, b.parts().to_vec()))
        .collect();
    for b in stored.values() {
        if b.len() != components || b.iter().any(|f| f.shape() != shape) {
            return Err(Error::ShapeMismatch("witness block layout differs".into()));
        }
    }
    let ln2 = std::f64::consts::LN_2;
    let side = |j: f64, space| -> Result<LineFunction> {
        let mut g = LineFunction::zeros(grid.half_width, grid.step, shape, components, space)?;
        let len = shape.len();
        for k in 0..g.count() {
            let z = Complex64::new(j, g.t(k));
            let env = (delta * (z * z - theta * theta)).exp();
            let slot = g.sample_slice_mut(k);
            for (&nu, b) in &stored {
                let w = env * ((z - theta) * (nu as f64 * ln2)).exp();
                for (c, f) in b.iter().enumerate() {
                    for (s, a) in slot[c * len..(c + 1) * len].iter_mut().zip(f.coeffs()) {
                        *s += w * a;
                    }
                }
            }
        }
        Ok(g)
    };
    let b0 = side(0.0, couple.a0.clone())?;
    let b1 = side(1.0, couple.a1.clone())?;
    for b in [&b0, &b1] {
        b.check_decay(DECAY_BUDGET)?;
        if let Err(Error::DecayViolation { required_half_width, .. }) = b.dft().check_decay(DECAY_BUDGET) {
            return Err(Error::InvalidArgument(format!(
                "boundary spectrum not resolved on the line grid; need step h <= {:.4}",
                std::f64::consts::PI / required_half_width
            )));
        }
    }
    let mut w = StripWitness::from_boundaries(b0, b1, theta, delta)?;
    let mut j = BTreeMap::new();
    for (&nu, b) in blocks {
        j.insert(nu, j_functional(b, couple, 2f64.powi(nu), oversample)?);
    }
    w.blocks = stored;
    w.j_sum = dyadic_sum(&j, theta, q);
    w.fq = fq_norm(&w, q, couple, oversample)?;
    w.constant = if w.j_sum > 0.0 { w.fq / w.j_sum } else { 0.0 };
    Ok(w)
}

/// `max_j (Δξ Σ_m ‖ŵ_j(ξ_m)‖_{A_j}^q)^{1/q}`.
pub fn fq_norm(w: &StripWitness, q: f64, c: &Couple, oversample: usize) -> Result<f64> {
    let n0 = w.boundary0.dft().lq_norm(&c.a0, q, oversample)?;
    let n1 = w.boundary1.dft().lq_norm(&c.a1, q, oversample)?;
    Ok(n0.max(n1))
}

/// `max_{j,ξ} ‖ŵ_j − χ_j ŵ_j − ρ̂_j ŵ_{1−j}‖ / max_{j,ξ} ‖ŵ_j‖` in coefficient `ℓ²`.
pub fn verify_boundary_identity(w: &StripWitness) -> f64 {
    let s = [w.boundary0.dft(), w.boundary1.dft()];
    let mut top = 0.0f64;
    let mut scale = 0.0f64;
    for j in 0..2u8 {
        let (own, other) = (&s[j as usize], &s[1 - j as usize]);
        for m in 0..own.count() {
            let xi = own.t(m);
            let (c, r) = (chi(j, xi), rho_hat(j, xi));
            let mut res = 0.0;
            let mut mag = 0.0;
            for (a, b) in own.sample_slice(m).iter().zip(other.sample_slice(m)) {
                res += (a - c * a - r * b).norm_sqr();
                mag += a.norm_sqr();
            }
            top = top.max(res.sqrt());
            scale = scale.max(mag.sqrt());
        }
    }
    if scale == 0.0 {
        0.0
    } else {
        top / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::SpaceNorm;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn couple() -> Couple {
        Couple::new(SpaceNorm::Lp(2.0), SpaceNorm::Hs(1.0))
    }

    fn grid() -> LineGrid {
        LineGrid {
            half_width: 16.0,
            step: 1.0 / 8.0,
        }
    }

    #[test]
    fn single_block_reproduces_value() {
        let shape = Shape::new(2, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b = TorusField::random(shape, true, &mut rng);
        let blocks = BTreeMap::from([(0, b.clone())]);
        let w = build_witness(&blocks, shape, 1, &couple(), 0.5, 2.0, 0.125, grid(), 2).unwrap();
        let v = w.eval(Complex64::new(0.5, 0.0)).unwrap();
        assert!((&v[0] - &b.as_complex()).max_abs_coeff() < 1e-6);
        assert!(verify_boundary_identity(&w) < 1e-4);
        assert!(w.constant.is_finite() && w.constant > 0.0);
    }

    #[test]
    fn empty_and_non_analytic() {
        let shape = Shape::new(1, 2);
        let blocks: BTreeMap<i32, TorusField> = BTreeMap::new();
        let w = build_witness(&blocks, shape, 1, &couple(), 0.5, 2.0, 0.125, grid(), 2).unwrap();
        assert_eq!(w.fq, 0.0);
        assert_eq!(verify_boundary_identity(&w), 0.0);
        let g = LineFunction::from_fn(4.0, 0.125, shape, 1, SpaceNorm::Lp(2.0), |t| {
            vec![TorusField::constant(shape, (-t * t).exp() * (1.0 + t.sin()))]
        })
        .unwrap();
        let zero = g.scale(Complex64::new(0.0, 0.0));
        let w = StripWitness::from_boundaries(g, zero, 0.5, 0.0).unwrap();
        assert!(verify_boundary_identity(&w) > 0.1);
    }

    #[test]
    fn gaussian_factor_does_not_grow_norm() {
        let shape = Shape::new(1, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let blocks = BTreeMap::from([
            (0, TorusField::random(shape, true, &mut rng)),
            (1, TorusField::random(shape, true, &mut rng)),
        ]);
        let c = couple();
        let w = build_witness(&blocks, shape, 1, &c, 0.5, 2.0, 0.125, grid(), 2).unwrap();
        let base = fq_norm(&w, 2.0, &c, 2).unwrap();
        for d in [0.05, 0.1, 0.2] {
            let g = w.gaussian_factor(d);
            assert!(fq_norm(&g, 2.0, &c, 2).unwrap() <= d.exp() * base * (1.0 + 1e-10));
        }
    }

    #[test]
    fn rejects_short_grid() {
        let shape = Shape::new(1, 1);
        let blocks = BTreeMap::from([(0, TorusField::constant(shape, 1.0))]);
        let g = LineGrid {
            half_width: 4.0,
            step: 1.0 / 8.0,
        };
        assert!(matches!(
            build_witness(&blocks, shape, 1, &couple(), 0.5, 2.0, 0.125, g, 2),
            Err(Error::DecayViolation { .. })
        ));
    }
}
