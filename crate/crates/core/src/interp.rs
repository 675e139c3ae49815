//! K- and J-functionals, discrete `(θ, q)` interpolation norms and
//! J-decompositions.

use std::collections::BTreeMap;

use crate::convex::{Duals, Fields, Lift, Problem, SolveConfig, Term};
use crate::error::{Error, Result};
use crate::torus::{gradient, norm_with, Couple, FieldLike, SpaceNorm, TorusField, VectorField};

/// Near-optimal split `f = f0 + f1` of the K-functional.
#[derive(Debug, Clone)]
pub struct SplitResult<F> {
    pub f0: F,
    pub f1: F,
    pub value: f64,
    /// Certified lower bound on the infimum.
    pub lower_bound: f64,
    /// Relative duality gap.
    pub gap: f64,
    pub iters: usize,
}

/// `max(‖a‖_{A0}, t‖a‖_{A1})`.
pub fn j_functional<F: FieldLike>(a: &F, c: &Couple, t: f64, oversample: usize) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("t = {t} must be positive")));
    }
    Ok(norm_with(a, &c.a0, oversample)?.max(t * norm_with(a, &c.a1, oversample)?))
}

fn k_problem<F: FieldLike>(f: &F, c: &Couple, t: f64, oversample: usize) -> Result<Problem> {
    let shape = f.shape();
    let target = f.to_fields();
    let zero: Fields = target.iter().map(|v| vec![Default::default(); v.len()]).collect();
    let t0 = Term::new(1.0, Lift::Identity, &c.a0, &target, shape, oversample)?;
    let t1 = Term::new(t, Lift::Identity, &c.a1, &zero, shape, oversample)?;
    Problem::new(shape, target.len(), vec![t0, t1])
}

/// Warm-start state carried between neighbouring solves.
#[derive(Debug, Clone, Default)]
pub struct WarmStart {
    pub x: Option<Fields>,
    pub duals: Option<Duals>,
}

/// `K_t(f) = inf_{f = f0 + f1} ‖f0‖_{A0} + t‖f1‖_{A1}`.
pub fn k_functional<F: FieldLike>(f: &F, c: &Couple, t: f64, cfg: &SolveConfig) -> Result<SplitResult<F>> {
    k_functional_warm(f, c, t, cfg, &mut WarmStart::default())
}

pub fn k_functional_warm<F: FieldLike>(
    f: &F,
    c: &Couple,
    t: f64,
    cfg: &SolveConfig,
    warm: &mut WarmStart,
) -> Result<SplitResult<F>> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("t = {t} must be positive")));
    }
    let p = k_problem(f, c, t, cfg.oversample)?;
    let mut starts = vec![f.to_fields()];
    if let Some(x) = &warm.x {
        starts.push(x.clone());
    }
    let floor = 1e-14 * norm_with(f, &c.a0, cfg.oversample)?;
    let sol = p
        .solve(&starts, warm.duals.as_ref(), cfg.solver(floor))
        .require_converged()?;
    warm.x = Some(sol.x.clone());
    warm.duals = Some(sol.duals.clone());
    let f1 = f.from_fields(sol.x);
    let f0 = f.sub(&f1);
    // re-evaluate after any realness projection of the parts
    let value = norm_with(&f0, &c.a0, cfg.oversample)? + t * norm_with(&f1, &c.a1, cfg.oversample)?;
    Ok(SplitResult {
        f0,
        f1,
        value,
        lower_bound: sol.lower_bound,
        gap: sol.gap,
        iters: sol.iters,
    })
}

/// Splits at `t = 2^ν` for `ν = -m..=m`, warm-started in increasing `t`.
pub fn dyadic_splits<F: FieldLike>(
    f: &F,
    c: &Couple,
    m: u32,
    cfg: &SolveConfig,
) -> Result<BTreeMap<i32, SplitResult<F>>> {
    let m = m as i32;
    let nus: Vec<i32> = (-m..=m).collect();
    let mut out = BTreeMap::new();
    if cfg.exec.is_parallel() {
        let res = cfg
            .exec
            .map(nus, |nu| k_functional(f, c, 2f64.powi(nu), cfg).map(|s| (nu, s)));
        for r in res {
            let (nu, s) = r?;
            out.insert(nu, s);
        }
    } else {
        let mut warm = WarmStart::default();
        for nu in nus {
            warm.duals = None;
            out.insert(nu, k_functional_warm(f, c, 2f64.powi(nu), cfg, &mut warm)?);
        }
    }
    Ok(out)
}

fn check_theta_q(theta: f64, q: f64, m: u32) -> Result<()> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidArgument(format!("θ = {theta} not in (0,1)")));
    }
    if !(q >= 1.0) || q.is_infinite() {
        return Err(Error::InvalidArgument(format!("q = {q} not in [1,∞)")));
    }
    if m < 1 {
        return Err(Error::InvalidArgument("dyadic range M must be ≥ 1".into()));
    }
    Ok(())
}

/// `(Σ_{|ν|≤M} (2^{-νθ} x_ν)^q)^{1/q}` for a map `ν → x_ν`.
pub fn dyadic_sum(values: &BTreeMap<i32, f64>, theta: f64, q: f64) -> f64 {
    values
        .iter()
        .map(|(&nu, &k)| (2f64.powf(-(nu as f64) * theta) * k).powf(q))
        .sum::<f64>()
        .powf(1.0 / q)
}

/// Interpolation norm from precomputed K-values.
pub fn interp_norm_from_splits<F>(splits: &BTreeMap<i32, SplitResult<F>>, theta: f64, q: f64) -> f64 {
    let k: BTreeMap<i32, f64> = splits.iter().map(|(&nu, s)| (nu, s.value)).collect();
    dyadic_sum(&k, theta, q)
}

/// `‖a‖_{θ,q} = (Σ_{|ν|≤M} (2^{-νθ} K(2^ν, a))^q)^{1/q}`.
pub fn interp_norm<F: FieldLike>(
    a: &F,
    c: &Couple,
    theta: f64,
    q: f64,
    m: u32,
    cfg: &SolveConfig,
) -> Result<f64> {
    check_theta_q(theta, q, m)?;
    Ok(interp_norm_from_splits(&dyadic_splits(a, c, m, cfg)?, theta, q))
}

/// Evaluate any [`SpaceNorm`], including `InterpKq`.
pub fn norm_any<F: FieldLike>(a: &F, s: &SpaceNorm, cfg: &SolveConfig) -> Result<f64> {
    match s {
        SpaceNorm::InterpKq {
            couple,
            theta,
            q,
            range,
        } => interp_norm(a, couple, *theta, *q, *range, cfg),
        other => norm_with(a, other, cfg.oversample),
    }
}

#[derive(Debug, Clone)]
pub struct JDecomposition<F> {
    pub blocks: BTreeMap<i32, F>,
    /// `(Σ_ν (2^{-νθ} J(2^ν, a^ν))^q)^{1/q}`.
    pub j_sum: f64,
    pub interp_norm: f64,
    /// `j_sum / interp_norm`.
    pub constant: f64,
    /// Largest coefficient of `Σ_ν a^ν − a`.
    pub residual: f64,
}

/// Blocks `a^ν = f1(2^ν) − f1(2^{ν+1})` with the endpoints absorbed, so that
/// `Σ_ν a^ν = a`.
pub fn j_decomposition_from_splits<F: FieldLike>(
    a: &F,
    splits: &BTreeMap<i32, SplitResult<F>>,
    c: &Couple,
    theta: f64,
    q: f64,
    oversample: usize,
) -> Result<JDecomposition<F>> {
    let nus: Vec<i32> = splits.keys().cloned().collect();
    let (lo, hi) = (nus[0], *nus.last().unwrap());
    let mut blocks = BTreeMap::new();
    for &nu in &nus {
        let block = if nu == hi {
            splits[&hi].f1.clone()
        } else {
            let mut b = splits[&nu].f1.sub(&splits[&(nu + 1)].f1);
            if nu == lo {
                b = b.add(&a.sub(&splits[&lo].f1));
            }
            b
        };
        blocks.insert(nu, block);
    }
    let mut j = BTreeMap::new();
    let mut total = a.zeros_like();
    for (&nu, b) in &blocks {
        j.insert(nu, j_functional(b, c, 2f64.powi(nu), oversample)?);
        total = total.add(b);
    }
    let residual = total
        .sub(a)
        .parts()
        .iter()
        .map(|p| p.max_abs_coeff())
        .fold(0.0, f64::max);
    let j_sum = dyadic_sum(&j, theta, q);
    let interp = interp_norm_from_splits(splits, theta, q);
    Ok(JDecomposition {
        blocks,
        j_sum,
        interp_norm: interp,
        constant: if interp > 0.0 { j_sum / interp } else { 0.0 },
        residual,
    })
}

pub fn j_decomposition<F: FieldLike>(
    a: &F,
    c: &Couple,
    theta: f64,
    q: f64,
    m: u32,
    cfg: &SolveConfig,
) -> Result<JDecomposition<F>> {
    check_theta_q(theta, q, m)?;
    let splits = dyadic_splits(a, c, m, cfg)?;
    j_decomposition_from_splits(a, &splits, c, theta, q, cfg.oversample)
}

#[derive(Debug, Clone)]
pub struct KRatio {
    pub t: f64,
    pub constrained: f64,
    pub ambient: f64,
    pub ratio: f64,
}

/// `K_t(f; G(L¹), G(H^{-d/2})) / K_t(f; L¹, H^{-d/2})` for a gradient field
/// `f = grad p`; the constrained split is parametrized by potentials.
pub fn k_closedness_ratio(p: &TorusField, t: f64, cfg: &SolveConfig) -> Result<KRatio> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("t = {t} must be positive")));
    }
    let shape = p.shape();
    let d = shape.dim;
    let f: VectorField = gradient(p);
    let couple = Couple::new(SpaceNorm::Lp(1.0), SpaceNorm::Hs(-(d as f64) / 2.0));
    let target = f.to_fields();
    let zero: Fields = target.iter().map(|v| vec![Default::default(); v.len()]).collect();
    let t0 = Term::new(1.0, Lift::Gradient, &couple.a0, &target, shape, cfg.oversample)?;
    let t1 = Term::new(t, Lift::Gradient, &couple.a1, &zero, shape, cfg.oversample)?;
    let prob = Problem::new(shape, 1, vec![t0, t1])?;
    let floor = 1e-14 * norm_with(&f, &couple.a0, cfg.oversample)?;
    let cons = prob
        .solve(&[p.to_fields()], None, cfg.solver(floor))
        .require_converged()?;
    // the constrained optimum is feasible for the ambient problem
    let amb_prob = k_problem(&f, &couple, t, cfg.oversample)?;
    let lifted = gradient(&p.from_fields(cons.x.clone())).to_fields();
    let amb = amb_prob
        .solve(&[f.to_fields(), lifted], None, cfg.solver(floor))
        .require_converged()?;
    let ratio = if amb.value > 0.0 {
        cons.value / amb.value
    } else {
        1.0
    };
    Ok(KRatio {
        t,
        constrained: cons.value,
        ambient: amb.value,
        ratio,
    })
}
