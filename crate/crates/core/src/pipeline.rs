//! Interpolation of bounded divergence solutions through the strip: a source
//! `b` is written as `v(θ)` for an analytic `v`, the trace `v̂_1(ξ)` is lifted
//! to bounded solutions frequency by frequency, and `a = u(θ)` is read back
//! with the Cauchy formula.

use num_complex::Complex64;
use serde::Serialize;

use crate::convex::SolveConfig;
use crate::divsolve::{bounded_div_solve_warm, mazya_solution, DivWarm};
use crate::error::{Error, Result};
use crate::interp::{interp_norm, j_decomposition};
use crate::strip::{build_witness, cauchy_eval, chi, rho_hat, LineFunction, LineGrid, StripWitness};
use crate::torus::{div_residual, divergence, norm_with, Couple, SpaceNorm, VectorField};

/// Samples per warm-started chain in the per-ξ lift. Fixed so that the
/// result does not depend on the thread count.
const LIFT_CHUNK: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    pub theta: f64,
    pub q: f64,
    /// Dyadic range `|ν| ≤ M` of the K- and J-sums.
    pub m: u32,
    pub delta: f64,
    pub grid: LineGrid,
    /// K-functional solves.
    pub solve: SolveConfig,
    /// Per-ξ divergence solves.
    pub lift: SolveConfig,
    /// Samples with `‖v̂_1(ξ)‖ ≤ skip · max_ξ ‖v̂_1‖` use the gradient part.
    pub skip: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            theta: 0.5,
            q: 2.0,
            m: 8,
            delta: 0.125,
            grid: LineGrid {
                half_width: 16.0,
                step: 0.125,
            },
            solve: SolveConfig {
                tol: 1e-4,
                oversample: 2,
                ..Default::default()
            },
            lift: SolveConfig {
                tol: 1e-4,
                oversample: 2,
                ..Default::default()
            },
            skip: 1e-9,
        }
    }
}

/// Aggregate of the per-ξ solves.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LiftStats {
    pub samples: usize,
    pub solved: usize,
    pub skipped: usize,
    pub iters: usize,
    pub max_gap: f64,
    /// Largest `|div û_1(ξ) − div v̂_1(ξ)|` coefficient.
    pub max_residual: f64,
    /// `max_ξ ‖û_1(ξ)‖_{A_1} / ‖v̂_1(ξ)‖_{B_1}` over solved samples.
    pub c_sol: f64,
    pub c_sol_min: f64,
    /// Largest departure of a sample from conjugate symmetry, relative to the peak sample.
    pub max_asymmetry: f64,
}

/// Solve `div û_1(ξ) = div v̂_1(ξ)` with `û_1(ξ)` minimal in
/// `L^∞ ∩ X` for every sample of the spectrum `v1hat`.
pub fn per_xi_lift(
    v1hat: &LineFunction,
    x1norm: &SpaceNorm,
    cfg: &SolveConfig,
    skip: f64,
) -> Result<(LineFunction, LiftStats)> {
    let shape = v1hat.shape();
    if v1hat.components() != shape.dim {
        return Err(Error::ShapeMismatch("lift needs vector-valued samples".into()));
    }
    let mags = v1hat.sample_l2();
    let peak = mags.iter().cloned().fold(0.0, f64::max);
    let b1norm = x1norm.clone();
    let a1norm = SpaceNorm::MaxOf(vec![SpaceNorm::Lp(f64::INFINITY), x1norm.clone()]);
    let chunks: Vec<Vec<usize>> = (0..v1hat.count())
        .collect::<Vec<_>>()
        .chunks(LIFT_CHUNK)
        .map(|c| c.to_vec())
        .collect();

    struct Out {
        k: usize,
        u: VectorField,
        solved: bool,
        iters: usize,
        gap: f64,
        residual: f64,
        ratio: f64,
        asym: f64,
    }

    let run = |ks: Vec<usize>| -> Result<Vec<Out>> {
        let mut warm = [DivWarm::default(), DivWarm::default()];
        let mut out = Vec::with_capacity(ks.len());
        for k in ks {
            let v = v1hat.sample_vector(k)?;
            if mags[k] == 0.0 || mags[k] <= skip * peak {
                out.push(Out {
                    k,
                    u: mazya_solution(&v),
                    solved: false,
                    iters: 0,
                    gap: 0.0,
                    residual: 0.0,
                    ratio: 0.0,
                    asym: 0.0,
                });
                continue;
            }
            let asym = v
                .components()
                .iter()
                .map(|c| c.hermitian_deviation() * c.max_abs_coeff())
                .fold(0.0, f64::max)
                / peak;
            let src = if asym <= 1e-9 { v.real_part() } else { v };
            let rep = bounded_div_solve_warm(&src, x1norm, cfg, &mut warm)?;
            let denom = norm_with(&src, &b1norm, cfg.oversample)?;
            let ratio = if denom > 0.0 {
                norm_with(&rep.u, &a1norm, cfg.oversample)? / denom
            } else {
                0.0
            };
            out.push(Out {
                k,
                u: rep.u.as_complex(),
                solved: true,
                iters: rep.iters,
                gap: rep.gap,
                residual: rep.residual,
                ratio,
                asym,
            });
        }
        Ok(out)
    };

    let results = cfg.exec.map(chunks, run);
    let mut u1 = v1hat.scale(Complex64::new(0.0, 0.0));
    let mut stats = LiftStats {
        samples: v1hat.count(),
        c_sol_min: f64::INFINITY,
        ..Default::default()
    };
    for chunk in results {
        for o in chunk? {
            let u = if o.u.is_real() { o.u.as_complex() } else { o.u };
            u1.set_sample(o.k, u.components())?;
            if o.solved {
                stats.solved += 1;
                stats.iters += o.iters;
                stats.max_gap = stats.max_gap.max(o.gap);
                stats.max_residual = stats.max_residual.max(o.residual);
                stats.c_sol = stats.c_sol.max(o.ratio);
                stats.c_sol_min = stats.c_sol_min.min(o.ratio);
                stats.max_asymmetry = stats.max_asymmetry.max(o.asym);
            } else {
                stats.skipped += 1;
            }
        }
    }
    if stats.solved == 0 {
        stats.c_sol_min = 0.0;
    }
    Ok((u1, stats))
}

/// One displayed estimate: `lhs` measured against `‖b‖_{θ,q}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LedgerEntry {
    pub label: &'static str,
    pub description: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    /// `None` when both sides vanish.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct PipelineReport {
    pub b: VectorField,
    pub a: VectorField,
    pub theta: f64,
    pub q: f64,
    /// Largest coefficient of `div a − div b`.
    pub div_residual: f64,
    /// `‖b‖` in `(L^∞, H^{d/2})_{θ,q}`.
    pub norm_b: f64,
    /// `‖a‖` in `(L^∞, L^∞ ∩ H^{d/2})_{θ,q}`.
    pub norm_a: f64,
    pub linf_a: f64,
    /// `norm_a / norm_b` (0 for `b = 0`).
    pub constant: f64,
    /// J-sum of the decomposition of `b` over `norm_b`.
    pub j_constant: f64,
    pub witness_constant: f64,
    /// Largest coefficient of `v(θ) − b` after quadrature.
    pub witness_error: f64,
    pub boundary_residual: f64,
    /// `div b = 0`: any divergence-free `a`, in particular `0`, is admissible.
    pub degenerate: bool,
    pub per_xi: LiftStats,
    pub grid: LineGrid,
    pub delta: f64,
    pub m: u32,
    pub ledger: Vec<LedgerEntry>,
    /// Boundary spectrum `v̂_1` and its lift `û_1`.
    pub v1hat: LineFunction,
    pub u1hat: LineFunction,
}

/// Everything needed for the estimate ledger.
pub struct Traces<'a> {
    pub v0hat: &'a LineFunction,
    pub u1hat: &'a LineFunction,
    pub norm_b: f64,
}

/// Realized ratios of the boundary estimates for both sides of the strip.
pub fn estimate_ledger(t: &Traces<'_>, q: f64, oversample: usize) -> Result<Vec<LedgerEntry>> {
    let d = t.v0hat.shape().dim as f64;
    let a0 = SpaceNorm::Lp(f64::INFINITY);
    let b1 = SpaceNorm::Hs(d / 2.0);
    let a1 = SpaceNorm::MaxOf(vec![a0.clone(), b1.clone()]);
    let u0 = t.v0hat;
    let u1 = t.u1hat;
    let j = |c: fn(u8, f64) -> Complex64, side: u8, g: &LineFunction| g.multiply_by(move |xi| c(side, xi));
    let chi0_u0 = j(chi, 0, u0);
    let rho0_u1 = j(rho_hat, 0, u1);
    let rho1_u0 = j(rho_hat, 1, u0);
    let chi1_u1 = j(chi, 1, u1);
    let side0 = chi0_u0.add(&rho0_u1)?;
    let side1 = chi1_u1.add(&rho1_u0)?;
    let n = |g: &LineFunction, s: &SpaceNorm| g.lq_norm(s, q, oversample);
    let rows: Vec<(&'static str, &'static str, f64)> = vec![
        ("0-1", "‖χ_0 û_0‖ in L^q(A_0)", n(&chi0_u0, &a0)?),
        ("0-2", "‖ρ̂_0 û_1‖ in L^q(A_0)", n(&rho0_u1, &a0)?),
        ("0-u", "‖(u(i·))^‖ in L^q(A_0)", n(&side0, &a0)?),
        ("1-1", "‖û_1‖ in L^q(A_1)", n(u1, &a1)?),
        ("1-2'", "‖ρ̂_1 û_0‖ in L^q(B_1)", n(&rho1_u0, &b1)?),
        ("1-2''", "‖ρ̂_1 û_0‖ in L^q(A_0)", n(&rho1_u0, &a0)?),
        ("1-2", "‖ρ̂_1 û_0‖ in L^q(A_1)", n(&rho1_u0, &a1)?),
        ("1-u", "‖(u(1+i·))^‖ in L^q(A_1)", n(&side1, &a1)?),
    ];
    Ok(rows
        .into_iter()
        .map(|(label, description, lhs)| LedgerEntry {
            label,
            description,
            lhs,
            rhs: t.norm_b,
            ratio: if t.norm_b > 0.0 {
                Some(lhs / t.norm_b)
            } else if lhs == 0.0 {
                None
            } else {
                Some(f64::INFINITY)
            },
        })
        .collect())
}

fn real_vector(fields: Vec<crate::torus::TorusField>, what: &'static str) -> Result<VectorField> {
    let v = VectorField::new(fields)?;
    let scale = v.max_abs_coeff().max(1e-300);
    let dev = v
        .components()
        .iter()
        .map(|c| c.hermitian_deviation())
        .fold(0.0, f64::max);
    if dev > 1e-6 * scale {
        return Err(Error::NotReal { deviation: dev / scale }.at_stage(what));
    }
    Ok(v.real_part())
}

/// Run the whole construction for a real source `b`.
pub fn run_pipeline(b: &VectorField, cfg: &PipelineConfig) -> Result<PipelineReport> {
    let shape = b.shape();
    let d = shape.dim;
    if !b.is_real() {
        return Err(Error::InvalidArgument("pipeline source must be real".into()));
    }
    let couple_b = Couple::linf_sobolev(d);
    let couple_a = Couple::linf_intersection(d);
    let b1norm = couple_b.a1.clone();

    let dec = j_decomposition(b, &couple_b, cfg.theta, cfg.q, cfg.m, &cfg.solve)
        .map_err(|e| e.at_stage("j_decomposition"))?;
    let w: StripWitness = build_witness(
        &dec.blocks,
        shape,
        d,
        &couple_b,
        cfg.theta,
        cfg.q,
        cfg.delta,
        cfg.grid,
        cfg.solve.oversample,
    )
    .map_err(|e| e.at_stage("build_witness"))?;
    let boundary_residual = crate::strip::verify_boundary_identity(&w);
    let th = Complex64::new(cfg.theta, 0.0);
    let vt = real_vector(w.eval(th).map_err(|e| e.at_stage("cauchy_eval"))?, "cauchy_eval")?;
    let witness_error = (&vt - b).max_abs_coeff();

    let v0hat = w.boundary0.dft();
    let v1hat = w.boundary1.dft();
    let (u1hat, per_xi) = per_xi_lift(&v1hat, &b1norm, &cfg.lift, cfg.skip).map_err(|e| e.at_stage("per_xi_lift"))?;
    let u1 = u1hat.idft();
    let a = real_vector(
        cauchy_eval(&w.boundary0, &u1, th).map_err(|e| e.at_stage("cauchy_eval"))?,
        "cauchy_eval",
    )?;

    let div_res = div_residual(&a, b)?;
    let norm_a = interp_norm(&a, &couple_a, cfg.theta, cfg.q, cfg.m, &cfg.solve).map_err(|e| e.at_stage("interp_norm"))?;
    let norm_b = dec.interp_norm;
    let linf_a = norm_with(&a, &SpaceNorm::Lp(f64::INFINITY), cfg.solve.oversample)?;
    let ledger = estimate_ledger(
        &Traces {
            v0hat: &v0hat,
            u1hat: &u1hat,
            norm_b,
        },
        cfg.q,
        cfg.lift.oversample,
    )?;
    let div_b = divergence(b).max_abs_coeff();
    Ok(PipelineReport {
        b: b.clone(),
        a,
        theta: cfg.theta,
        q: cfg.q,
        div_residual: div_res,
        norm_b,
        norm_a,
        linf_a,
        constant: if norm_b > 0.0 { norm_a / norm_b } else { 0.0 },
        j_constant: dec.constant,
        witness_constant: w.constant,
        witness_error,
        boundary_residual,
        degenerate: div_b <= 1e-14 * b.max_abs_coeff().max(f64::MIN_POSITIVE),
        per_xi,
        grid: cfg.grid,
        delta: cfg.delta,
        m: cfg.m,
        ledger,
        v1hat,
        u1hat,
    })
}
