//! First-order primal-dual iteration with a duality-gap certificate.

use num_complex::Complex64;

use super::atoms::ResidualCurve;
use super::problem::{Problem, Term};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const BISECT_STEPS: usize = 100;

pub type Fields = Vec<Vec<Complex64>>;
/// Dual variables indexed by term, then block.
pub type Duals = Vec<Vec<Vec<Complex64>>>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Target relative duality gap.
    pub tol: f64,
    pub max_iters: usize,
    pub check_every: usize,
    /// Objective values below this count as zero when forming relative gaps.
    pub abs_floor: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-6,
            max_iters: 50_000,
            check_every: 20,
            abs_floor: 0.0,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        SolverOptions {
            tol,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub x: Fields,
    /// Best primal objective found.
    pub value: f64,
    /// Best certified lower bound.
    pub lower_bound: f64,
    /// `(value − lower_bound) / value`, zero when `value = 0`.
    pub gap: f64,
    pub iters: usize,
    pub converged: bool,
    pub duals: Duals,
}

impl Solution {
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged {
                iters: self.iters,
                gap: self.gap,
                value: self.value,
            })
        }
    }
}

fn add_scaled(a: &mut [Complex64], b: &[Complex64], s: f64) {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y * s;
    }
}

fn fields_norm(x: &[Vec<Complex64>]) -> f64 {
    x.iter()
        .flat_map(|c| c.iter())
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

fn term_dual(t: &Term, w: &[Vec<Complex64>]) -> f64 {
    t.blocks
        .iter()
        .zip(w)
        .map(|(b, wb)| b.dual_value(wb))
        .sum()
}

/// Project a term's duals onto `{Σ_b ‖w_b‖_{b,*} ≤ radius}`.
fn project_term_dual(t: &Term, w: &mut [Vec<Complex64>], radius: f64) {
    if term_dual(t, w) <= radius {
        return;
    }
    if t.blocks.len() == 1 {
        let b = &t.blocks[0];
        b.atom.project_dual_ball(&mut w[0], radius * b.scale);
        return;
    }
    let lambda = {
        let curves: Vec<ResidualCurve> = t
            .blocks
            .iter()
            .zip(w.iter())
            .map(|(b, wb)| ResidualCurve::new(b.atom, wb))
            .collect();
        let phi = |lam: f64| -> f64 {
            t.blocks
                .iter()
                .zip(&curves)
                .map(|(b, c)| c.eval(lam / b.scale) / b.scale)
                .sum()
        };
        let mut hi = t
            .blocks
            .iter()
            .zip(w.iter())
            .map(|(b, wb)| b.value(wb))
            .fold(0.0, f64::max);
        let mut lo = 0.0;
        for _ in 0..BISECT_STEPS {
            let mid = 0.5 * (lo + hi);
            if phi(mid) > radius {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        hi
    };
    for (b, wb) in t.blocks.iter().zip(w.iter_mut()) {
        let mut z = wb.clone();
        b.atom.project_primal_ball(&mut z, lambda / b.scale);
        for (a, c) in wb.iter_mut().zip(&z) {
            *a -= c;
        }
    }
}

impl Problem {
    fn zero_duals(&self) -> Duals {
        self.terms
            .iter()
            .map(|t| t.blocks.iter().map(|b| vec![ZERO; b.out_len()]).collect())
            .collect()
    }

    /// Norm subgradients at `x`, scaled by the term weights.
    fn subgradient_duals(&self, x: &[Vec<Complex64>]) -> Duals {
        let z = self.forward(x);
        let mut out = self.zero_duals();
        for ((t, zt), ot) in self.terms.iter().zip(&z).zip(out.iter_mut()) {
            let vals: Vec<f64> = t
                .blocks
                .iter()
                .zip(zt)
                .zip(&t.offsets)
                .map(|((b, zb), ob)| {
                    let r: Vec<Complex64> = zb.iter().zip(ob).map(|(a, c)| a - c).collect();
                    b.value(&r)
                })
                .collect();
            let top = vals.iter().cloned().fold(0.0, f64::max);
            if top == 0.0 {
                continue;
            }
            let active = vals.iter().position(|&v| v == top).unwrap();
            let b = &t.blocks[active];
            let r: Vec<Complex64> = zt[active]
                .iter()
                .zip(&t.offsets[active])
                .map(|(a, c)| a - c)
                .collect();
            let g = b.atom.subgradient(&r);
            ot[active] = g.into_iter().map(|v| v * (b.scale * t.weight)).collect();
        }
        out
    }

    /// Best dual lower bound obtainable from `w` after restoring dual
    /// feasibility by a correction on a single term.
    pub fn dual_bound(&self, w: &Duals) -> f64 {
        let r = self.adjoint(w);
        let scale_r = fields_norm(&r);
        // roundoff in r is relative to the duals, not to r itself
        let wn = w
            .iter()
            .flatten()
            .flat_map(|b| b.iter())
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt();
        let mut best = f64::NEG_INFINITY;
        let value_of = |w: &Duals| -> f64 {
            let mut s = 1.0f64;
            for (t, wt) in self.terms.iter().zip(w) {
                let dn = term_dual(t, wt);
                if t.weight > 0.0 {
                    s = s.max(dn / t.weight);
                } else if dn > 0.0 {
                    return f64::NEG_INFINITY;
                }
            }
            let pair: f64 = self
                .terms
                .iter()
                .zip(w)
                .map(|(t, wt)| {
                    t.offsets
                        .iter()
                        .zip(wt)
                        .map(|(o, wb)| {
                            o.iter()
                                .zip(wb)
                                .map(|(a, b)| (b.conj() * a).re)
                                .sum::<f64>()
                        })
                        .sum::<f64>()
                })
                .sum();
            -pair / s
        };
        if scale_r <= 1e-14 * wn {
            return value_of(w);
        }
        let len = self.shape().len();
        for (j, t) in self.terms.iter().enumerate() {
            let neg_r: Vec<Vec<Complex64>> =
                r.iter().map(|c| c.iter().map(|z| -z).collect()).collect();
            let z = self.modes.adjoint_pinv(t.lift, &neg_r);
            let back = self.modes.adjoint(t.lift, &z);
            let miss: f64 = back
                .iter()
                .zip(&neg_r)
                .flat_map(|(a, b)| a.iter().zip(b).map(|(p, q)| (p - q).norm_sqr()))
                .sum::<f64>()
                .sqrt();
            if miss > 1e-10 * scale_r && miss > 1e-14 * wn {
                continue;
            }
            let mut diag = vec![vec![0.0; len]; t.lifted_components];
            for b in &t.blocks {
                for (d, g) in diag[b.component].iter_mut().zip(b.gram_diagonal()) {
                    *d += g;
                }
            }
            let mut ok = true;
            let u: Vec<Vec<Complex64>> = z
                .iter()
                .zip(&diag)
                .map(|(zc, dc)| {
                    zc.iter()
                        .zip(dc)
                        .map(|(a, d)| {
                            if *d > 0.0 {
                                a / d
                            } else {
                                if a.norm() > 0.0 {
                                    ok = false;
                                }
                                ZERO
                            }
                        })
                        .collect()
                })
                .collect();
            if !ok {
                continue;
            }
            let mut w2 = w.clone();
            for (b, wb) in t.blocks.iter().zip(w2[j].iter_mut()) {
                let delta = b.apply(&u[b.component]);
                add_scaled(wb, &delta, 1.0);
            }
            best = best.max(value_of(&w2));
        }
        best
    }

    fn operator_norm(&self) -> f64 {
        let len = self.shape().len();
        let mut v: Fields = (0..self.components)
            .map(|c| {
                (0..len)
                    .map(|i| {
                        let a = ((i * 7 + c * 3) % 11) as f64;
                        Complex64::new(1.0 + 0.1 * a, 0.05 * ((i + c) % 5) as f64)
                    })
                    .collect()
            })
            .collect();
        let mut est = 0.0;
        for _ in 0..60 {
            let nv = fields_norm(&v);
            if nv == 0.0 {
                return 0.0;
            }
            v.iter_mut()
                .for_each(|c| c.iter_mut().for_each(|z| *z /= nv));
            let w = self.adjoint(&self.forward(&v));
            let new = fields_norm(&w).sqrt();
            let done = (new - est).abs() <= 1e-6 * new;
            est = new;
            v = w;
            if done {
                break;
            }
        }
        est * 1.02
    }

    /// Minimize the objective starting from the best of `starts`.
    pub fn solve(&self, starts: &[Fields], warm_duals: Option<&Duals>, opts: SolverOptions) -> Solution {
        let len = self.shape().len();
        let zero: Fields = vec![vec![ZERO; len]; self.components];
        let mut x = zero.clone();
        let mut best_value = self.objective(&x);
        for s in starts {
            let v = self.objective(s);
            if v < best_value {
                best_value = v;
                x = s.clone();
            }
        }
        let mut best_x = x.clone();

        let mut w = match warm_duals {
            Some(d) => {
                let mut d = d.clone();
                for (t, dt) in self.terms.iter().zip(d.iter_mut()) {
                    project_term_dual(t, dt, t.weight);
                }
                d
            }
            None => self.subgradient_duals(&x),
        };
        let mut best_lower = self.dual_bound(&w).max(0.0);
        if warm_duals.is_some() {
            best_lower = best_lower.max(self.dual_bound(&self.subgradient_duals(&x)));
        }

        let rel_gap = |p: f64, d: f64| -> f64 {
            let den = p.max(opts.abs_floor);
            if den <= 0.0 {
                0.0
            } else {
                ((p - d) / den).max(0.0)
            }
        };
        let mut gap = rel_gap(best_value, best_lower);
        if gap <= opts.tol {
            return Solution {
                x: best_x,
                value: best_value,
                lower_bound: best_lower,
                gap,
                iters: 0,
                converged: true,
                duals: w,
            };
        }

        let l = self.operator_norm();
        let eta = if l > 0.0 { 0.9 / l } else { 1.0 };
        let mut omega = 1.0f64;
        let mut x_prev = x.clone();
        let mut restart_x = x.clone();
        let mut restart_w = w.clone();
        let mut restart_gap = rel_gap(self.objective(&x), self.dual_bound(&w));
        let mut last_candidate = f64::INFINITY;
        let mut avg_x = zero.clone();
        let mut avg_w = self.zero_duals();
        let mut avg_count = 0usize;
        let mut since_restart = 0usize;
        let mut iters = 0;
        while iters < opts.max_iters {
            iters += 1;
            since_restart += 1;
            let (sigma, tau) = (eta * omega, eta / omega);
            let xbar: Fields = x
                .iter()
                .zip(&x_prev)
                .map(|(a, b)| a.iter().zip(b).map(|(p, q)| 2.0 * p - q).collect())
                .collect();
            let z = self.forward(&xbar);
            for ((t, wt), zt) in self.terms.iter().zip(w.iter_mut()).zip(&z) {
                for ((wb, zb), ob) in wt.iter_mut().zip(zt).zip(&t.offsets) {
                    for ((a, p), q) in wb.iter_mut().zip(zb).zip(ob) {
                        *a += sigma * (p - q);
                    }
                }
                project_term_dual(t, wt, t.weight);
            }
            let r = self.adjoint(&w);
            x_prev.clone_from(&x);
            for (xc, rc) in x.iter_mut().zip(&r) {
                add_scaled(xc, rc, -tau);
            }
            for (a, b) in avg_x.iter_mut().zip(&x) {
                add_scaled(a, b, 1.0);
            }
            for (a, b) in avg_w.iter_mut().flatten().zip(w.iter().flatten()) {
                add_scaled(a, b, 1.0);
            }
            avg_count += 1;

            if iters % opts.check_every != 0 && iters != opts.max_iters {
                continue;
            }
            let pv = self.objective(&x);
            let dv = self.dual_bound(&w);
            let inv = 1.0 / avg_count as f64;
            let ax: Fields = avg_x
                .iter()
                .map(|c| c.iter().map(|z| z * inv).collect())
                .collect();
            let aw: Duals = avg_w
                .iter()
                .map(|t| t.iter().map(|b| b.iter().map(|z| z * inv).collect()).collect())
                .collect();
            let pa = self.objective(&ax);
            let da = self.dual_bound(&aw);
            if pv < best_value {
                best_value = pv;
                best_x.clone_from(&x);
            }
            if pa < best_value {
                best_value = pa;
                best_x.clone_from(&ax);
            }
            best_lower = best_lower.max(dv).max(da);
            gap = rel_gap(best_value, best_lower);
            if gap <= opts.tol {
                break;
            }
            let (gp, ga) = (rel_gap(pv, dv), rel_gap(pa, da));
            let use_avg = ga < gp;
            let cand = gp.min(ga);
            let restart = since_restart >= 2 * opts.check_every
                && (cand <= 0.2 * restart_gap
                    || (cand <= 0.8 * restart_gap && cand > last_candidate)
                    || since_restart as f64 >= 0.36 * iters as f64);
            last_candidate = cand;
            if restart {
                let (cx, cw) = if use_avg { (ax, aw) } else { (x.clone(), w.clone()) };
                let dx = fields_norm(
                    &cx.iter()
                        .zip(&restart_x)
                        .map(|(a, b)| a.iter().zip(b).map(|(p, q)| p - q).collect())
                        .collect::<Fields>(),
                );
                let dy = cw
                    .iter()
                    .flatten()
                    .zip(restart_w.iter().flatten())
                    .flat_map(|(a, b)| a.iter().zip(b).map(|(p, q)| (p - q).norm_sqr()))
                    .sum::<f64>()
                    .sqrt();
                if dx > 0.0 && dy > 0.0 {
                    omega = (0.5 * (dy / dx).ln() + 0.5 * omega.ln()).exp();
                }
                x = cx;
                x_prev.clone_from(&x);
                w = cw;
                restart_x.clone_from(&x);
                restart_w.clone_from(&w);
                restart_gap = cand;
                last_candidate = f64::INFINITY;
                avg_x.iter_mut().for_each(|c| c.iter_mut().for_each(|z| *z = ZERO));
                avg_w
                    .iter_mut()
                    .flatten()
                    .for_each(|b| b.iter_mut().for_each(|z| *z = ZERO));
                avg_count = 0;
                since_restart = 0;
            }
        }
        Solution {
            x: best_x,
            value: best_value,
            lower_bound: best_lower,
            gap,
            iters,
            converged: gap <= opts.tol,
            duals: w,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::problem::{Lift, Term};
    use crate::torus::{Shape, SpaceNorm};

    #[test]
    fn nearest_point_in_l2_is_exact_immediately() {
        // min ‖x − f‖_2 + ‖x‖_2 has value ‖f‖ at either endpoint
        let shape = Shape::new(1, 3);
        let f: Vec<Complex64> = (0..shape.len())
            .map(|i| Complex64::new(i as f64 - 2.0, 0.5))
            .collect();
        let zero = vec![vec![ZERO; shape.len()]];
        let t0 = Term::new(1.0, Lift::Identity, &SpaceNorm::Lp(2.0), &[f.clone()], shape, 2).unwrap();
        let t1 = Term::new(1.0, Lift::Identity, &SpaceNorm::Lp(2.0), &zero, shape, 2).unwrap();
        let p = Problem::new(shape, 1, vec![t0, t1]).unwrap();
        let s = p.solve(&[vec![f.clone()]], None, SolverOptions::default());
        let nf = f.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!(s.converged);
        assert!((s.value - nf).abs() < 1e-12);
    }
}
