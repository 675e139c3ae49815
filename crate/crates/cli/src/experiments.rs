//! Non-embedding experiment: averaged bumps `u_ν` with `u_ν(0) = 1`,
//! `‖u_ν‖_∞ ≤ 1` and `‖u_ν‖_{H^{d/2}} ≤ c 2^{-ν}`, and the partial sums
//! `f_n = u_1 + … + u_n`.

use std::collections::BTreeMap;

use bblab_core::convex::SolveConfig;
use bblab_core::interp::{dyadic_sum, interp_norm, j_functional};
use bblab_core::torus::{norm_with, SpaceNorm};
use bblab_core::{Couple, Error, Result, Shape, TorusField};
use num_complex::Complex64;
use serde::Serialize;

/// H^{d/2} bound of every single bump.
pub const BUMP_CONSTANT: f64 = 1.6;

fn weight(n: &[i64]) -> f64 {
    let r2: f64 = n.iter().map(|&x| (x * x) as f64).sum();
    (1.0 + r2).powf(-(n.len() as f64) / 2.0)
}

/// Mode pairs `{n, −n}` in order of increasing `|n|`, each with the mass
/// `w(n) = ⟨n⟩^{-d}` of the pair.
fn shells(shape: Shape) -> Vec<(Vec<usize>, f64)> {
    let mut modes: Vec<(i64, Vec<i64>, usize)> = (0..shape.len())
        .map(|i| {
            let n = shape.mode_of(i);
            (n.iter().map(|x| x * x).sum(), n, i)
        })
        .filter(|(_, n, _)| n.iter().find(|&&x| x != 0).is_none_or(|&x| x > 0))
        .collect();
    modes.sort();
    modes
        .into_iter()
        .map(|(_, n, i)| {
            let j = shape.neg_index(i);
            if i == j {
                (vec![i], weight(&n))
            } else {
                (vec![i, j], 2.0 * weight(&n))
            }
        })
        .collect()
}

/// Consecutive groups of mode pairs, each of mass at least `c^{-2}`, so that
/// the bump `ĝ ∝ w` on a group has `‖g‖_{H^{d/2}} ≤ c`. The `count` groups
/// of highest frequency are returned; their masses sit close to the threshold.
fn groups(shape: Shape, count: usize) -> Option<Vec<Vec<(usize, f64)>>> {
    let need = BUMP_CONSTANT.powi(-2);
    let mut out = Vec::new();
    let mut cur = Vec::new();
    let mut mass = 0.0;
    for (idx, w) in shells(shape) {
        let per = w / idx.len() as f64;
        cur.extend(idx.into_iter().map(|i| (i, per)));
        mass += w;
        if mass >= need {
            out.push(std::mem::take(&mut cur));
            mass = 0.0;
        }
    }
    if out.len() < count {
        return None;
    }
    Some(out.split_off(out.len() - count))
}

/// Smallest bandlimit hosting `4^ν` bumps.
pub fn required_bandlimit(nu: u32, dim: usize) -> usize {
    let mut n = 1;
    while groups(Shape::new(dim, n), 4usize.pow(nu)).is_none() {
        n *= 2;
    }
    let (mut lo, mut hi) = (n / 2, n);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if mid > 0 && groups(Shape::new(dim, mid), 4usize.pow(nu)).is_some() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// `u_ν = 4^{-ν} Σ_i g_i` over `4^ν` bumps with disjoint frequency supports,
/// each with nonnegative coefficients summing to one.
pub fn block_bump(nu: u32, dim: usize, bandlimit: usize) -> Result<TorusField> {
    let shape = Shape::try_new(dim, bandlimit)?;
    let count = 4usize.pow(nu);
    let Some(gs) = groups(shape, count) else {
        return Err(Error::InsufficientBandlimit {
            have: bandlimit,
            need: required_bandlimit(nu, dim),
        });
    };
    let mut coeffs = vec![Complex64::new(0.0, 0.0); shape.len()];
    for g in gs {
        let mass: f64 = g.iter().map(|p| p.1).sum();
        for (i, w) in g {
            coeffs[i] = Complex64::new(w / mass / count as f64, 0.0);
        }
    }
    TorusField::from_coeffs(shape, coeffs, true)
}

#[derive(Debug, Clone, Serialize)]
pub struct CounterexampleRow {
    pub n: u32,
    /// `f_n(0)`.
    pub value_at_zero: f64,
    pub linf_u: f64,
    pub hs_u: f64,
    /// `2^ν ‖u_ν‖_{H^{d/2}}`, bounded by the bump constant.
    pub scaled_hs_u: f64,
    pub j_u: f64,
    /// `(Σ_{ν ≤ n} (2^{-νθ} J(2^ν, u_ν))^q)^{1/q}`.
    pub j_sum: f64,
    pub linf_f: f64,
    pub interp_norm: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CounterexampleReport {
    pub rows: Vec<CounterexampleRow>,
    pub bump_constant: f64,
    /// `j_sum(n_max) / j_sum(n_max − 1)`.
    pub last_variation: Option<f64>,
}

pub struct CounterexampleConfig {
    pub dim: usize,
    pub bandlimit: usize,
    pub theta: f64,
    pub q: f64,
    /// Dyadic range for the interpolation norms; `None` skips them.
    pub interp_range: Option<u32>,
    pub solve: SolveConfig,
}

pub fn counterexample_run(n_max: u32, cfg: &CounterexampleConfig) -> Result<CounterexampleReport> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    let couple = Couple::linf_sobolev(cfg.dim);
    let os = cfg.solve.oversample;
    let shape = Shape::try_new(cfg.dim, cfg.bandlimit)?;
    let origin = vec![0.0; cfg.dim];
    let mut f = TorusField::zeros(shape, true);
    let mut js = BTreeMap::new();
    let mut rows = Vec::new();
    for nu in 1..=n_max {
        let u = block_bump(nu, cfg.dim, cfg.bandlimit)?;
        f = &f + &u;
        let j = j_functional(&u, &couple, 2f64.powi(nu as i32), os)?;
        js.insert(nu as i32, j);
        let hs = norm_with(&u, &couple.a1, os)?;
        let interp = match cfg.interp_range {
            Some(m) => Some(interp_norm(&f, &couple, cfg.theta, cfg.q, m, &cfg.solve)?),
            None => None,
        };
        rows.push(CounterexampleRow {
            n: nu,
            value_at_zero: f.eval(&origin).re,
            linf_u: norm_with(&u, &SpaceNorm::Lp(f64::INFINITY), os)?,
            hs_u: hs,
            scaled_hs_u: 2f64.powi(nu as i32) * hs,
            j_u: j,
            j_sum: dyadic_sum(&js, cfg.theta, cfg.q),
            linf_f: norm_with(&f, &SpaceNorm::Lp(f64::INFINITY), os)?,
            interp_norm: interp,
        });
    }
    let last_variation = (rows.len() >= 2).then(|| {
        let k = rows.len();
        rows[k - 1].j_sum / rows[k - 2].j_sum
    });
    Ok(CounterexampleReport {
        rows,
        bump_constant: BUMP_CONSTANT,
        last_variation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_bump_has_unit_value() {
        let u = block_bump(0, 2, 4).unwrap();
        assert!((u.eval(&[0.0, 0.0]).re - 1.0).abs() < 1e-14);
        let linf = norm_with(&u, &SpaceNorm::Lp(f64::INFINITY), 4).unwrap();
        assert!((linf - 1.0).abs() < 1e-14);
        assert!(u.coeffs().iter().all(|z| z.re >= 0.0 && z.im == 0.0));
    }

    #[test]
    fn bump_bounds() {
        for nu in 1..=2 {
            let u = block_bump(nu, 2, 32).unwrap();
            assert!((u.eval(&[0.0, 0.0]).re - 1.0).abs() < 1e-12);
            let linf = norm_with(&u, &SpaceNorm::Lp(f64::INFINITY), 2).unwrap();
            assert!(linf <= 1.0 + 1e-12);
            let hs = norm_with(&u, &SpaceNorm::Hs(1.0), 2).unwrap();
            assert!(hs <= BUMP_CONSTANT * 2f64.powi(-(nu as i32)) + 1e-12);
        }
    }

    #[test]
    fn too_small_bandlimit_names_requirement() {
        match block_bump(3, 2, 8) {
            Err(Error::InsufficientBandlimit { have: 8, need }) => {
                assert!(need > 8);
                assert!(block_bump(3, 2, need).is_ok());
                assert!(block_bump(3, 2, need - 1).is_err());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn j_sum_decreases_in_theta() {
        let base = CounterexampleConfig {
            dim: 2,
            bandlimit: 16,
            theta: 0.3,
            q: 2.0,
            interp_range: None,
            solve: SolveConfig::default(),
        };
        let a = counterexample_run(2, &base).unwrap();
        let b = counterexample_run(2, &CounterexampleConfig { theta: 0.8, ..base }).unwrap();
        assert!(b.rows[1].j_sum < a.rows[1].j_sum);
        assert!((a.rows[1].value_at_zero - 2.0).abs() < 1e-12);
    }
}
