use std::path::{Path, PathBuf};

use bblab_core::divsolve::{bb_constant_probe, bounded_div_solve};
use bblab_core::interp::{dyadic_splits, interp_norm_from_splits, j_decomposition_from_splits, k_closedness_ratio, k_functional};
use bblab_core::io::{load_fields, save_fields, save_line};
use bblab_core::pipeline::{run_pipeline, PipelineConfig};
use bblab_core::symbols::{s1linf_ratio, Builtin, SymbolGrid};
use bblab_core::torus::{norm_with, FieldLike};
use bblab_core::{Couple, Error, Shape, SpaceNorm, TorusField, VectorField};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{parse_norm, CommonArgs, ExperimentConfig};
use crate::experiments::{counterexample_run, CounterexampleConfig};
use crate::report::ReportDocument;
use crate::Command;

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Format(_)
            | Error::InvalidArgument(_)
            | Error::UnsupportedNorm(_)
            | Error::InsufficientBandlimit { .. }
            | Error::ShapeMismatch(_)
            | Error::NotReal { .. }
            | Error::NonFinite(_)
            | Error::OddnessViolation { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

type Outcome = Result<bool, Failure>;

fn usage(m: impl Into<String>) -> Failure {
    Failure::Usage(m.into())
}

fn resolve(tag: &str, a: &CommonArgs, tol: f64) -> Result<ExperimentConfig, Failure> {
    ExperimentConfig::resolve(tag, a, tol).map_err(usage)
}

fn rng(cfg: &ExperimentConfig) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed)
}

fn shape(cfg: &ExperimentConfig) -> Result<Shape, Failure> {
    Ok(Shape::try_new(cfg.d, cfg.n)?)
}

/// Random real field scaled to unit sup norm.
fn unit_vector(cfg: &ExperimentConfig, rng: &mut ChaCha8Rng) -> Result<VectorField, Failure> {
    let v = VectorField::random(shape(cfg)?, true, rng);
    let s = norm_with(&v, &SpaceNorm::Lp(f64::INFINITY), cfg.oversample)?;
    Ok(if s > 0.0 { &v * (1.0 / s) } else { v })
}

fn unit_scalar(cfg: &ExperimentConfig, rng: &mut ChaCha8Rng) -> Result<TorusField, Failure> {
    let f = TorusField::random(shape(cfg)?, true, rng);
    let s = norm_with(&f, &SpaceNorm::Lp(f64::INFINITY), cfg.oversample)?;
    Ok(if s > 0.0 { &f * (1.0 / s) } else { f })
}

fn load(path: &Path) -> Result<Vec<TorusField>, Failure> {
    Ok(load_fields(path)?)
}

fn vector_input(cfg: &ExperimentConfig, input: &Option<PathBuf>) -> Result<VectorField, Failure> {
    match input {
        Some(p) => {
            let v = VectorField::new(load(p)?).map_err(|e| usage(format!("{}: {e}", p.display())))?;
            if v.shape() != shape(cfg)? {
                return Err(usage(format!("{}: field shape differs from --d/--N", p.display())));
            }
            Ok(v)
        }
        None => unit_vector(cfg, &mut rng(cfg)),
    }
}

enum Element {
    Scalar(TorusField),
    Vector(VectorField),
}

fn element_input(cfg: &ExperimentConfig, input: &Option<PathBuf>) -> Result<Element, Failure> {
    match input {
        Some(p) => {
            let mut fs = load(p)?;
            if fs[0].shape() != shape(cfg)? {
                return Err(usage(format!("{}: field shape differs from --d/--N", p.display())));
            }
            if fs.len() == 1 {
                Ok(Element::Scalar(fs.remove(0)))
            } else {
                Ok(Element::Vector(VectorField::new(fs).map_err(|e| usage(format!("{}: {e}", p.display())))?))
            }
        }
        None => Ok(Element::Scalar(unit_scalar(cfg, &mut rng(cfg))?)),
    }
}

fn couple_named(name: &str, d: usize) -> Result<Couple, Failure> {
    match name {
        "linf-sobolev" => Ok(Couple::linf_sobolev(d)),
        "linf-intersection" => Ok(Couple::linf_intersection(d)),
        _ => Err(usage(format!("unknown couple `{name}`"))),
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .map(|x| {
            let v: f64 = x.trim().parse().map_err(|_| usage(format!("bad number `{x}`")))?;
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(usage(format!("t = {v} must be positive")))
            }
        })
        .collect()
}

fn emit(doc: &ReportDocument, common: &CommonArgs) -> Outcome {
    let json = doc.to_json();
    match &common.output {
        Some(p) => std::fs::write(p, &json).map_err(|e| usage(format!("{}: {e}", p.display())))?,
        None => print!("{json}"),
    }
    if let Some(p) = &common.csv {
        let csv = doc.to_csv().unwrap_or_default();
        std::fs::write(p, csv).map_err(|e| usage(format!("{}: {e}", p.display())))?;
    }
    Ok(doc.passed())
}

pub fn dispatch(cmd: Command) -> Outcome {
    match cmd {
        Command::SolveDiv { common, input, x1, save } => solve_div(&common, &input, &x1, &save),
        Command::InterpNorm { common, input, couple } => interp(&common, &input, &couple),
        Command::KFunctional { common, input, couple, t } => kfun(&common, &input, &couple, &t),
        Command::Pipeline { common, input, save_trace } => pipeline(&common, &input, &save_trace),
        Command::CheckSymbol {
            common,
            builtin,
            input,
            ell,
            ceiling,
        } => check_symbol(&common, builtin.as_deref(), &input, ell, ceiling),
        Command::Counterexample { common, n_max, interp } => counterexample(&common, n_max, interp),
        Command::KRatio { common, t } => kratio(&common, &t),
        Command::BbProbe { common, trials, x1 } => probe(&common, trials, &x1),
    }
}

fn solve_div(common: &CommonArgs, input: &Option<PathBuf>, x1: &str, save: &Option<PathBuf>) -> Outcome {
    let cfg = resolve("solve-div", common, 1e-6)?;
    let x = parse_norm(x1).map_err(usage)?;
    let v = vector_input(&cfg, input)?;
    let r = bounded_div_solve(&v, &x, &cfg.solve())?;
    let mut doc = ReportDocument::new(cfg.clone());
    doc.result("x1", x.label());
    doc.result("objective", r.objective);
    doc.result("baseline_objective", r.baseline_objective);
    doc.result("iterations", r.iters);
    doc.constant("improvement", if r.baseline_objective > 0.0 { r.objective / r.baseline_objective } else { 0.0 });
    doc.check_le("div_residual", r.residual, 1e-8);
    doc.check_le("objective_over_baseline", r.objective, r.baseline_objective * (1.0 + 1e-12));
    doc.check_le("duality_gap", r.gap, cfg.tol);
    if let Some(p) = save {
        save_fields(p, r.u.components())?;
    }
    emit(&doc, common)
}

fn interp(common: &CommonArgs, input: &Option<PathBuf>, couple: &str) -> Outcome {
    let cfg = resolve("interp-norm", common, 1e-5)?;
    let c = couple_named(couple, cfg.d)?;
    let mut doc = ReportDocument::new(cfg.clone());
    doc.result("couple", format!("({},{})", c.a0.label(), c.a1.label()));
    match element_input(&cfg, input)? {
        Element::Scalar(f) => interp_report(&f, &c, &cfg, &mut doc)?,
        Element::Vector(f) => interp_report(&f, &c, &cfg, &mut doc)?,
    }
    emit(&doc, common)
}

fn interp_report<F: FieldLike>(f: &F, c: &Couple, cfg: &ExperimentConfig, doc: &mut ReportDocument) -> Result<(), Failure> {
    let solve = cfg.solve();
    let splits = dyadic_splits(f, c, cfg.m, &solve)?;
    let norm = interp_norm_from_splits(&splits, cfg.theta, cfg.q);
    let dec = j_decomposition_from_splits(f, &splits, c, cfg.theta, cfg.q, cfg.oversample)?;
    doc.result("interp_norm", norm);
    doc.result("j_sum", dec.j_sum);
    doc.constant("j_over_k", dec.constant);
    doc.check_le("decomposition_residual", dec.residual, 1e-10 * norm.max(1.0));
    let gap = splits.values().map(|s| s.gap).fold(0.0, f64::max);
    doc.check_le("max_gap", gap, cfg.tol);
    let rows = splits
        .iter()
        .map(|(&nu, s)| vec![nu as f64, 2f64.powi(nu), s.value, s.lower_bound, s.gap])
        .collect();
    doc.table(&["nu", "t", "k", "lower_bound", "gap"], rows);
    Ok(())
}

fn kfun(common: &CommonArgs, input: &Option<PathBuf>, couple: &str, t: &str) -> Outcome {
    let cfg = resolve("k-functional", common, 1e-6)?;
    let c = couple_named(couple, cfg.d)?;
    let ts = parse_list(t)?;
    let mut doc = ReportDocument::new(cfg.clone());
    match element_input(&cfg, input)? {
        Element::Scalar(f) => k_report(&f, &c, &ts, &cfg, &mut doc)?,
        Element::Vector(f) => k_report(&f, &c, &ts, &cfg, &mut doc)?,
    }
    emit(&doc, common)
}

fn k_report<F: FieldLike>(f: &F, c: &Couple, ts: &[f64], cfg: &ExperimentConfig, doc: &mut ReportDocument) -> Result<(), Failure> {
    let solve = cfg.solve();
    let n0 = norm_with(f, &c.a0, cfg.oversample)?;
    let n1 = norm_with(f, &c.a1, cfg.oversample)?;
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    let mut gap = 0.0f64;
    for &t in ts {
        let r = k_functional(f, c, t, &solve)?;
        let bound = n0.min(t * n1);
        worst = worst.max((r.value - bound) / bound.max(f64::MIN_POSITIVE));
        gap = gap.max(r.gap);
        rows.push(vec![t, r.value, r.lower_bound, r.gap, bound]);
    }
    doc.result("norm_a0", n0);
    doc.result("norm_a1", n1);
    doc.result("values", rows.iter().map(|r| r[1]).collect::<Vec<_>>());
    doc.check_le("excess_over_min_bound", worst, 1e-6);
    doc.check_le("max_gap", gap, cfg.tol);
    doc.table(&["t", "k", "lower_bound", "gap", "min_bound"], rows);
    Ok(())
}

fn pipeline(common: &CommonArgs, input: &Option<PathBuf>, save_trace: &Option<PathBuf>) -> Outcome {
    let cfg = resolve("pipeline", common, 1e-4)?;
    let b = vector_input(&cfg, input)?;
    let solve = cfg.solve();
    let pc = PipelineConfig {
        theta: cfg.theta,
        q: cfg.q,
        m: cfg.m,
        delta: cfg.delta,
        grid: cfg.grid(),
        solve,
        lift: solve,
        ..Default::default()
    };
    let r = run_pipeline(&b, &pc)?;
    let mut doc = ReportDocument::new(cfg.clone());
    doc.result("norm_b", r.norm_b);
    doc.result("norm_a", r.norm_a);
    doc.result("linf_a", r.linf_a);
    doc.result("degenerate", r.degenerate);
    doc.result("per_xi", &r.per_xi);
    doc.result("ledger", &r.ledger);
    doc.constant("interpolation_constant", r.constant);
    doc.constant("witness_constant", r.witness_constant);
    doc.constant("j_constant", r.j_constant);
    doc.constant("lift_constant", r.per_xi.c_sol);
    doc.check_le("div_residual", r.div_residual, 1e-6);
    doc.check_le("witness_error", r.witness_error, 1e-6);
    doc.check_le("boundary_identity", r.boundary_residual, 1e-4);
    doc.check_le("per_xi_residual", r.per_xi.max_residual, 1e-8);
    let finite = r.constant.is_finite() && r.ledger.iter().all(|e| e.ratio.is_none_or(f64::is_finite));
    doc.check_ge("finite_ratios", finite as u8 as f64, 1.0);
    let v = r.v1hat.sample_l2();
    let u = r.u1hat.sample_l2();
    let rows = (0..v.len()).map(|k| vec![r.v1hat.t(k), v[k], u[k]]).collect();
    doc.table(&["xi", "v1hat_l2", "u1hat_l2"], rows);
    if let Some(p) = save_trace {
        save_line(p, &r.v1hat)?;
    }
    emit(&doc, common)
}

fn check_symbol(
    common: &CommonArgs,
    builtin: Option<&str>,
    input: &Option<PathBuf>,
    ell: usize,
    ceiling: f64,
) -> Outcome {
    let cfg = resolve("check-symbol", common, 1e-6)?;
    let m = match (builtin, input) {
        (Some(name), None) => {
            let b = Builtin::parse(name).ok_or_else(|| usage(format!("unknown builtin `{name}`")))?;
            if b.dim() != cfg.d {
                return Err(usage(format!("builtin `{name}` lives in d = {}", b.dim())));
            }
            b.grid(cfg.n)?
        }
        (None, Some(p)) => {
            let f = load(p)?.remove(0);
            SymbolGrid::new(f.shape(), ell, f.coeffs().to_vec())?
        }
        _ => return Err(usage("give exactly one of --builtin and --input")),
    };
    let r = s1linf_ratio(&m, cfg.oversample)?;
    let mut doc = ReportDocument::new(cfg.clone());
    doc.result("alpha", &r.check.alpha);
    doc.result("argmax", &r.check.at);
    doc.result("tail", r.check.tail);
    doc.result("s1linf", r.s1linf);
    doc.constant("C", r.check.constant);
    doc.constant("ratio", r.ratio);
    doc.check_le("s1linf_ratio", r.ratio, ceiling);
    doc.table(&["N", "C", "s1linf", "ratio", "tail"], vec![vec![cfg.n as f64, r.check.constant, r.s1linf, r.ratio, r.check.tail]]);
    emit(&doc, common)
}

fn counterexample(common: &CommonArgs, n_max: u32, with_interp: bool) -> Outcome {
    let cfg = resolve("counterexample", common, 1e-5)?;
    let cc = CounterexampleConfig {
        dim: cfg.d,
        bandlimit: cfg.n,
        theta: cfg.theta,
        q: cfg.q,
        interp_range: with_interp.then_some(cfg.m),
        solve: cfg.solve(),
    };
    let r = counterexample_run(n_max, &cc)?;
    let mut doc = ReportDocument::new(cfg.clone());
    doc.result("rows", &r.rows);
    doc.constant("bump_constant", r.bump_constant);
    for row in &r.rows {
        doc.check_le(&format!("value_at_zero_{}", row.n), (row.value_at_zero - row.n as f64).abs(), 1e-12 * row.n as f64);
        doc.check_le(&format!("scaled_hs_{}", row.n), row.scaled_hs_u, r.bump_constant * (1.0 + 1e-12));
        doc.check_le(&format!("linf_u_{}", row.n), row.linf_u, 1.0 + 1e-12);
    }
    if let Some(v) = r.last_variation {
        doc.constant("j_sum_variation", v);
        doc.check_le("j_sum_variation", v, 1.1);
    }
    let rows = r
        .rows
        .iter()
        .map(|x| vec![x.n as f64, x.value_at_zero, x.j_u, x.j_sum, x.linf_f, x.interp_norm.unwrap_or(f64::NAN)])
        .collect();
    doc.table(&["n", "f_n_at_0", "j_u", "j_sum", "linf_f", "interp_norm"], rows);
    emit(&doc, common)
}

fn kratio(common: &CommonArgs, t: &str) -> Outcome {
    let cfg = resolve("k-ratio", common, 1e-6)?;
    let ts = parse_list(t)?;
    let p = unit_scalar(&cfg, &mut rng(&cfg))?;
    let solve = cfg.solve();
    let mut rows = Vec::new();
    let mut min_ratio = f64::INFINITY;
    for &t in &ts {
        let r = k_closedness_ratio(&p, t, &solve)?;
        min_ratio = min_ratio.min(r.ratio);
        rows.push(vec![r.t, r.constrained, r.ambient, r.ratio]);
    }
    let mut doc = ReportDocument::new(cfg.clone());
    doc.result("ratios", rows.iter().map(|r| r[3]).collect::<Vec<_>>());
    doc.check_ge("min_ratio", min_ratio, 1.0 - 1e-6);
    doc.table(&["t", "constrained", "ambient", "ratio"], rows);
    emit(&doc, common)
}

fn probe(common: &CommonArgs, trials: usize, x1: &str) -> Outcome {
    let cfg = resolve("bb-probe", common, 1e-6)?;
    let x = parse_norm(x1).map_err(usage)?;
    let s = bb_constant_probe(&x, shape(&cfg)?, trials, cfg.seed, &cfg.solve())?;
    let mut doc = ReportDocument::new(cfg.clone());
    doc.result("objectives", &s.objectives);
    doc.result("failures", &s.failures);
    doc.constant("max", s.max);
    doc.constant("mean", s.mean);
    doc.constant("median", s.median);
    doc.check_le("failures", s.failures.len() as f64, 0.0);
    doc.check_le("max_residual", s.max_residual, 1e-8);
    doc.check_le("max_gap", s.max_gap, cfg.tol);
    let rows = s
        .objectives
        .iter()
        .zip(&s.baselines)
        .enumerate()
        .map(|(k, (o, b))| vec![k as f64, *o, *b])
        .collect();
    doc.table(&["trial", "objective", "baseline"], rows);
    emit(&doc, common)
}
