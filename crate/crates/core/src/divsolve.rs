//! Bounded solutions of `div u = div v` at finite truncation.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::convex::{Duals, Fields, Lift, Problem, SolveConfig, Term};
use crate::error::{Error, Result};
use crate::torus::{
    div_free_part, div_residual, divergence, gradient_part, norm_with, FieldLike, Shape, SpaceNorm,
    VectorField,
};

/// Gradient part `û(n) = n (n·v̂(n)) / |n|²` with `û(0) = 0`.
pub fn mazya_solution(v: &VectorField) -> VectorField {
    gradient_part(v)
}

#[derive(Debug, Clone)]
pub struct DivSolveReport {
    pub u: VectorField,
    /// `max(‖u‖_∞, ‖u‖_X)`.
    pub objective: f64,
    /// Largest coefficient of `div u − div v`.
    pub residual: f64,
    /// Relative duality gap (largest over the real solves).
    pub gap: f64,
    pub iters: usize,
    pub baseline_objective: f64,
}

fn objective_norm(x1norm: &SpaceNorm) -> SpaceNorm {
    SpaceNorm::MaxOf(vec![SpaceNorm::Lp(f64::INFINITY), x1norm.clone()])
}

/// State reused between consecutive solves of nearby sources.
#[derive(Debug, Clone, Default)]
pub struct DivWarm {
    duals: Option<Duals>,
    x: Option<Fields>,
}

fn solve_real(
    v: &VectorField,
    x1norm: &SpaceNorm,
    cfg: &SolveConfig,
    warm: &mut DivWarm,
) -> Result<(VectorField, f64, f64, usize)> {
    let shape = v.shape();
    let um = mazya_solution(v);
    let obj = objective_norm(x1norm);
    let baseline = norm_with(&um, &obj, cfg.oversample)?;
    if baseline == 0.0 {
        return Ok((um, 0.0, 0.0, 0));
    }
    let target: Fields = um
        .components()
        .iter()
        .map(|c| c.coeffs().iter().map(|z| -z).collect())
        .collect();
    let term = Term::new(1.0, Lift::DivFree, &obj, &target, shape, cfg.oversample)?;
    let prob = Problem::new(shape, shape.dim, vec![term])?;
    let mut starts: Vec<Fields> = vec![vec![vec![Complex64::new(0.0, 0.0); shape.len()]; shape.dim]];
    if let Some(x) = &warm.x {
        starts.push(x.clone());
    }
    let sol = prob
        .solve(&starts, warm.duals.as_ref(), cfg.solver(1e-14 * baseline))
        .require_converged()?;
    warm.duals = Some(sol.duals.clone());
    warm.x = Some(sol.x.clone());
    let w = v.from_fields(sol.x);
    let u = &um + &div_free_part(&w);
    Ok((u, sol.value, sol.gap, sol.iters))
}

/// Minimize `max(‖u‖_∞, ‖u‖_X)` subject to `div u = div v` on every retained
/// mode. Complex sources are split into real and imaginary parts.
pub fn bounded_div_solve(v: &VectorField, x1norm: &SpaceNorm, cfg: &SolveConfig) -> Result<DivSolveReport> {
    bounded_div_solve_warm(v, x1norm, cfg, &mut [DivWarm::default(), DivWarm::default()])
}

pub fn bounded_div_solve_warm(
    v: &VectorField,
    x1norm: &SpaceNorm,
    cfg: &SolveConfig,
    warm: &mut [DivWarm; 2],
) -> Result<DivSolveReport> {
    x1norm.validate()?;
    if let SpaceNorm::InterpKq { .. } = x1norm {
        return Err(Error::UnsupportedNorm("interpolation norm as solver objective".into()));
    }
    let obj = objective_norm(x1norm);
    let um = mazya_solution(v);
    let baseline = norm_with(&um, &obj, cfg.oversample)?;
    let (u, gap, iters) = if v.is_real() || v.imag_part().max_abs_coeff() == 0.0 {
        let vr = v.real_part();
        let (u, _, gap, iters) = solve_real(&vr, x1norm, cfg, &mut warm[0])?;
        let u = if v.is_real() { u } else { u.as_complex() };
        (u, gap, iters)
    } else {
        let [w0, w1] = warm;
        let (ur, _, g0, i0) = solve_real(&v.real_part(), x1norm, cfg, w0)?;
        let (ui, _, g1, i1) = solve_real(&v.imag_part(), x1norm, cfg, w1)?;
        let u = &ur.as_complex() + &ui.as_complex().scale(Complex64::new(0.0, 1.0));
        (u, g0.max(g1), i0 + i1)
    };
    let mut objective = norm_with(&u, &obj, cfg.oversample)?;
    let u = if objective > baseline {
        objective = baseline;
        if v.is_real() {
            um
        } else {
            um.as_complex()
        }
    } else {
        u
    };
    let residual = div_residual(&u, v)?;
    Ok(DivSolveReport {
        u,
        objective,
        residual,
        gap,
        iters,
        baseline_objective: baseline,
    })
}

/// Distribution of optimal objectives over random unit sources.
#[derive(Debug, Clone, Serialize)]
pub struct ProbeStats {
    pub trials: usize,
    pub objectives: Vec<f64>,
    pub baselines: Vec<f64>,
    pub max: f64,
    pub mean: f64,
    pub median: f64,
    pub max_gap: f64,
    pub max_residual: f64,
    pub failures: Vec<String>,
}

/// Solve for `trials` random real sources normalized to `‖v‖_X = 1`; the max
/// objective is the measured finite-truncation constant.
pub fn bb_constant_probe(
    x: &SpaceNorm,
    shape: Shape,
    trials: usize,
    seed: u64,
    cfg: &SolveConfig,
) -> Result<ProbeStats> {
    let runs = cfg.exec.map((0..trials).collect(), |k| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        let mut v = VectorField::random(shape, true, &mut rng);
        let n = norm_with(&v, x, cfg.oversample)?;
        if n > 0.0 {
            v = &v * (1.0 / n);
        }
        bounded_div_solve(&v, x, cfg)
    });
    let mut objectives = Vec::new();
    let mut baselines = Vec::new();
    let mut failures = Vec::new();
    let mut max_gap = 0.0f64;
    let mut max_residual = 0.0f64;
    for (k, r) in runs.into_iter().enumerate() {
        match r {
            Ok(rep) => {
                objectives.push(rep.objective);
                baselines.push(rep.baseline_objective);
                max_gap = max_gap.max(rep.gap);
                max_residual = max_residual.max(rep.residual);
            }
            Err(e) => failures.push(format!("trial {k}: {e}")),
        }
    }
    let mut sorted = objectives.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let count = sorted.len();
    let median = if count == 0 {
        0.0
    } else if count % 2 == 1 {
        sorted[count / 2]
    } else {
        0.5 * (sorted[count / 2 - 1] + sorted[count / 2])
    };
    Ok(ProbeStats {
        trials,
        max: sorted.last().cloned().unwrap_or(0.0),
        mean: if count == 0 {
            0.0
        } else {
            sorted.iter().sum::<f64>() / count as f64
        },
        median,
        objectives,
        baselines,
        max_gap,
        max_residual,
        failures,
    })
}

/// `‖div v‖` in the coefficient max norm; scale for residual checks.
pub fn divergence_scale(v: &VectorField) -> f64 {
    divergence(v).max_abs_coeff()
}
