use serde::{Deserialize, Serialize};

use super::lp::{block_multipliers, last_block};
use super::{TorusField, VectorField};
use crate::error::{Error, Result};
use crate::grid::grid_transform;

/// Default points-per-mode oversampling for grid-evaluated norms.
pub const DEFAULT_OVERSAMPLE: usize = 4;

/// Pair of norms `(A_0, A_1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Couple {
    pub a0: SpaceNorm,
    pub a1: SpaceNorm,
}

impl Couple {
    pub fn new(a0: SpaceNorm, a1: SpaceNorm) -> Self {
        Couple { a0, a1 }
    }

    /// `(L^∞, H^{d/2})`.
    pub fn linf_sobolev(dim: usize) -> Self {
        Couple::new(SpaceNorm::Lp(f64::INFINITY), SpaceNorm::Hs(dim as f64 / 2.0))
    }

    /// `(L^∞, L^∞ ∩ H^{d/2})`.
    pub fn linf_intersection(dim: usize) -> Self {
        Couple::new(
            SpaceNorm::Lp(f64::INFINITY),
            SpaceNorm::MaxOf(vec![
                SpaceNorm::Lp(f64::INFINITY),
                SpaceNorm::Hs(dim as f64 / 2.0),
            ]),
        )
    }
}

/// Tagged norm descriptor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
pub enum SpaceNorm {
    /// Grid-quadrature `L^p`, `p ∈ [1, ∞]`.
    Lp(f64),
    /// `(Σ ⟨n⟩^{2s} |f̂(n)|²)^{1/2}`.
    Hs(f64),
    /// `(Σ_k (2^{kσ} ‖P_k f‖_{L^q})^q)^{1/q}`.
    BesovLP { sigma: f64, q: f64 },
    /// `‖Σ_k |P_k f|‖_{L^∞}`.
    S1Linf,
    MaxOf(Vec<SpaceNorm>),
    InterpKq {
        couple: Box<Couple>,
        theta: f64,
        q: f64,
        range: u32,
    },
}

impl SpaceNorm {
    pub fn validate(&self) -> Result<()> {
        match self {
            SpaceNorm::Lp(p) if !(*p >= 1.0) => {
                Err(Error::InvalidArgument(format!("Lp exponent {p} < 1")))
            }
            SpaceNorm::Hs(s) if !s.is_finite() => {
                Err(Error::InvalidArgument("Hs order must be finite".into()))
            }
            SpaceNorm::BesovLP { sigma, q } if !sigma.is_finite() || !(*q >= 1.0) => Err(
                Error::InvalidArgument(format!("Besov parameters σ={sigma}, q={q}")),
            ),
            SpaceNorm::MaxOf(list) => {
                if list.is_empty() {
                    return Err(Error::InvalidArgument("MaxOf list is empty".into()));
                }
                list.iter().try_for_each(|s| s.validate())
            }
            SpaceNorm::InterpKq {
                couple,
                theta,
                q,
                range,
            } => {
                if !(*theta > 0.0 && *theta < 1.0) {
                    return Err(Error::InvalidArgument(format!("θ={theta} not in (0,1)")));
                }
                if !(*q >= 1.0) || q.is_infinite() {
                    return Err(Error::InvalidArgument(format!("q={q} not in [1,∞)")));
                }
                if *range < 1 {
                    return Err(Error::InvalidArgument("dyadic range must be ≥ 1".into()));
                }
                couple.a0.validate()?;
                couple.a1.validate()
            }
            _ => Ok(()),
        }
    }

    /// Short human-readable label.
    pub fn label(&self) -> String {
        match self {
            SpaceNorm::Lp(p) if p.is_infinite() => "Linf".into(),
            SpaceNorm::Lp(p) => format!("L{p}"),
            SpaceNorm::Hs(s) => format!("H{s}"),
            SpaceNorm::BesovLP { sigma, q } => format!("B({sigma},{q})"),
            SpaceNorm::S1Linf => "S1Linf".into(),
            SpaceNorm::MaxOf(l) => {
                let parts: Vec<String> = l.iter().map(|s| s.label()).collect();
                format!("max({})", parts.join(","))
            }
            SpaceNorm::InterpKq {
                couple, theta, q, ..
            } => format!("({},{})_{{{theta},{q}}}", couple.a0.label(), couple.a1.label()),
        }
    }
}

/// Objects carrying one or more [`TorusField`] components.
pub trait Components {
    fn parts(&self) -> &[TorusField];
}

impl Components for TorusField {
    fn parts(&self) -> &[TorusField] {
        std::slice::from_ref(self)
    }
}

impl Components for VectorField {
    fn parts(&self) -> &[TorusField] {
        self.components()
    }
}

impl Components for [TorusField] {
    fn parts(&self) -> &[TorusField] {
        self
    }
}

impl Components for Vec<TorusField> {
    fn parts(&self) -> &[TorusField] {
        self
    }
}

/// Norm at the default oversampling. Vector norms are the max over components.
pub fn norm<F: Components + ?Sized>(f: &F, s: &SpaceNorm) -> Result<f64> {
    norm_with(f, s, DEFAULT_OVERSAMPLE)
}

pub fn norm_with<F: Components + ?Sized>(f: &F, s: &SpaceNorm, oversample: usize) -> Result<f64> {
    s.validate()?;
    if let SpaceNorm::InterpKq { .. } = s {
        return Err(Error::UnsupportedNorm(
            "interpolation norms are evaluated by the interpolation module".into(),
        ));
    }
    let mut best = 0.0f64;
    for c in f.parts() {
        best = best.max(scalar_norm(c, s, oversample)?);
    }
    Ok(best)
}

fn grid_lp(values: impl Iterator<Item = f64>, count: usize, p: f64) -> f64 {
    if p.is_infinite() {
        values.fold(0.0, f64::max)
    } else if p == 2.0 {
        (values.map(|v| v * v).sum::<f64>() / count as f64).sqrt()
    } else if p == 1.0 {
        values.sum::<f64>() / count as f64
    } else {
        (values.map(|v| v.powf(p)).sum::<f64>() / count as f64).powf(1.0 / p)
    }
}

fn scalar_norm(f: &TorusField, s: &SpaceNorm, oversample: usize) -> Result<f64> {
    let shape = f.shape();
    Ok(match s {
        SpaceNorm::Hs(order) => {
            let w = shape.norms_sq();
            f.coeffs()
                .iter()
                .zip(&w)
                .map(|(z, r2)| (1.0 + r2).powf(*order) * z.norm_sqr())
                .sum::<f64>()
                .sqrt()
        }
        SpaceNorm::Lp(p) => {
            let v = f.grid_values(oversample);
            let n = v.len();
            grid_lp(v.iter().map(|z| z.norm()), n, *p)
        }
        SpaceNorm::BesovLP { sigma, q } => {
            let t = grid_transform(shape, oversample);
            let mut terms = Vec::new();
            for (k, m) in block_multipliers(shape).iter().enumerate() {
                let c: Vec<_> = f.coeffs().iter().zip(m).map(|(z, w)| z * w).collect();
                let v = t.to_grid(&c);
                let n = v.len();
                let lq = grid_lp(v.iter().map(|z| z.norm()), n, *q);
                terms.push(2f64.powf(k as f64 * sigma) * lq);
            }
            if q.is_infinite() {
                terms.into_iter().fold(0.0, f64::max)
            } else {
                terms.iter().map(|x| x.powf(*q)).sum::<f64>().powf(1.0 / q)
            }
        }
        SpaceNorm::S1Linf => s1linf_grid(f, oversample).into_iter().fold(0.0, f64::max),
        SpaceNorm::MaxOf(list) => {
            let mut best = 0.0f64;
            for m in list {
                best = best.max(scalar_norm(f, m, oversample)?);
            }
            best
        }
        SpaceNorm::InterpKq { .. } => unreachable!("rejected above"),
    })
}

/// Pointwise square function `Σ_k |P_k f|` on the grid.
pub fn s1linf_grid(f: &TorusField, oversample: usize) -> Vec<f64> {
    let shape = f.shape();
    let t = grid_transform(shape, oversample);
    let mut acc = vec![0.0; t.grid_len()];
    for k in 0..=last_block(shape.bandlimit) {
        let m = super::lp::block_multiplier(shape, k);
        let c: Vec<_> = f.coeffs().iter().zip(&m).map(|(z, w)| z * w).collect();
        for (a, v) in acc.iter_mut().zip(t.to_grid(&c)) {
            *a += v.norm();
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::{lp_block, Shape};
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_has_unit_weight_in_every_sobolev_norm() {
        let f = TorusField::constant(Shape::new(2, 4), -2.5);
        for s in [-3.0, 0.0, 1.0, 4.5] {
            assert!((norm(&f, &SpaceNorm::Hs(s)).unwrap() - 2.5).abs() < 1e-15);
        }
    }

    #[test]
    fn sobolev_norm_of_exponential() {
        let shape = Shape::new(2, 5);
        let f = TorusField::single_mode(shape, &[3, -4], Complex64::new(1.0, 0.0)).unwrap();
        let got = norm(&f, &SpaceNorm::Hs(1.0)).unwrap();
        assert!((got - 26f64.powf(0.5)).abs() < 1e-12);
        let linf = norm(&f, &SpaceNorm::Lp(f64::INFINITY)).unwrap();
        assert!((linf - 1.0).abs() < 1e-12);
    }

    #[test]
    fn parseval() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = TorusField::random(Shape::new(2, 6), false, &mut rng);
        let h0 = norm(&f, &SpaceNorm::Hs(0.0)).unwrap();
        let l2 = norm(&f, &SpaceNorm::Lp(2.0)).unwrap();
        assert!((h0 - l2).abs() <= 1e-10 * h0);
    }

    #[test]
    fn single_block_field_has_s1linf_equal_to_sup() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = TorusField::random(Shape::new(1, 16), true, &mut rng);
        let b = lp_block(&f, 3).unwrap();
        // a block overlaps its neighbours, so use a mode set inside the flat part
        let flat = b.map_modes(true, |i, z| {
            let r = (i as i64 - 16).abs();
            if r == 8 {
                z
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let s1 = norm(&flat, &SpaceNorm::S1Linf).unwrap();
        let inf = norm(&flat, &SpaceNorm::Lp(f64::INFINITY)).unwrap();
        assert!((s1 - inf).abs() < 1e-12 * inf);
    }

    #[test]
    fn rejects_interpolation_norm() {
        let f = TorusField::constant(Shape::new(1, 2), 1.0);
        let s = SpaceNorm::InterpKq {
            couple: Box::new(Couple::linf_sobolev(1)),
            theta: 0.5,
            q: 2.0,
            range: 4,
        };
        assert!(matches!(norm(&f, &s), Err(Error::UnsupportedNorm(_))));
    }

    #[test]
    fn validation() {
        assert!(SpaceNorm::MaxOf(vec![]).validate().is_err());
        assert!(SpaceNorm::Lp(0.5).validate().is_err());
        assert!(SpaceNorm::BesovLP { sigma: 1.0, q: f64::INFINITY }
            .validate()
            .is_ok());
    }

    #[test]
    fn vector_norm_is_component_max() {
        let shape = Shape::new(2, 2);
        let a = TorusField::constant(shape, 1.0);
        let b = TorusField::constant(shape, 3.0);
        let v = VectorField::new(vec![a, b]).unwrap();
        assert!((norm(&v, &SpaceNorm::Hs(0.0)).unwrap() - 3.0).abs() < 1e-15);
    }
}
