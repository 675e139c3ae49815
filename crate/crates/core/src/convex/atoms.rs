//! Elementary norms on complex vectors, their duals and ball projections.
//! Every norm acts on moduli and preserves phases.

use num_complex::Complex64;

const BISECT_STEPS: usize = 80;

/// Mixed norms used by blocks. `GroupL1` views the vector as `layers`
/// consecutive layers of `points` entries and takes `max_x Σ_k |z_{k,x}|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Atom {
    L2,
    Linf,
    L1,
    Lp(f64),
    GroupL1 { layers: usize, points: usize },
}

#[inline]
fn phase(z: Complex64) -> Complex64 {
    let r = z.norm();
    if r > 0.0 {
        z / r
    } else {
        Complex64::new(0.0, 0.0)
    }
}

fn lp_of(z: &[Complex64], p: f64) -> f64 {
    if p.is_infinite() {
        z.iter().map(|c| c.norm()).fold(0.0, f64::max)
    } else if p == 1.0 {
        z.iter().map(|c| c.norm()).sum()
    } else if p == 2.0 {
        z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    } else {
        let m = z.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if m == 0.0 {
            return 0.0;
        }
        m * z.iter().map(|c| (c.norm() / m).powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

fn conjugate_exponent(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

impl Atom {
    pub fn primal(&self, z: &[Complex64]) -> f64 {
        match *self {
            Atom::L2 => lp_of(z, 2.0),
            Atom::Linf => lp_of(z, f64::INFINITY),
            Atom::L1 => lp_of(z, 1.0),
            Atom::Lp(p) => lp_of(z, p),
            Atom::GroupL1 { layers, points } => (0..points)
                .map(|x| (0..layers).map(|k| z[k * points + x].norm()).sum::<f64>())
                .fold(0.0, f64::max),
        }
    }

    pub fn dual(&self, w: &[Complex64]) -> f64 {
        match *self {
            Atom::L2 => lp_of(w, 2.0),
            Atom::Linf => lp_of(w, 1.0),
            Atom::L1 => lp_of(w, f64::INFINITY),
            Atom::Lp(p) => lp_of(w, conjugate_exponent(p)),
            Atom::GroupL1 { layers, points } => (0..points)
                .map(|x| (0..layers).map(|k| w[k * points + x].norm()).fold(0.0, f64::max))
                .sum(),
        }
    }

    /// Project onto `{primal(z) ≤ radius}` in place.
    pub fn project_primal_ball(&self, z: &mut [Complex64], radius: f64) {
        match *self {
            Atom::L2 => project_lp_ball(z, 2.0, radius),
            Atom::Linf => project_lp_ball(z, f64::INFINITY, radius),
            Atom::L1 => project_lp_ball(z, 1.0, radius),
            Atom::Lp(p) => project_lp_ball(z, p, radius),
            Atom::GroupL1 { layers, points } => {
                let mut buf = vec![Complex64::new(0.0, 0.0); layers];
                for x in 0..points {
                    for k in 0..layers {
                        buf[k] = z[k * points + x];
                    }
                    project_lp_ball(&mut buf, 1.0, radius);
                    for k in 0..layers {
                        z[k * points + x] = buf[k];
                    }
                }
            }
        }
    }

    /// Project onto `{dual(w) ≤ radius}` in place.
    pub fn project_dual_ball(&self, w: &mut [Complex64], radius: f64) {
        match *self {
            Atom::L2 => project_lp_ball(w, 2.0, radius),
            Atom::Linf => project_lp_ball(w, 1.0, radius),
            Atom::L1 => project_lp_ball(w, f64::INFINITY, radius),
            Atom::Lp(p) => project_lp_ball(w, conjugate_exponent(p), radius),
            Atom::GroupL1 { layers, points } => project_group_dual(w, layers, points, radius),
        }
    }

    /// A dual vector `g` with `dual(g) = 1` and `Re⟨g, z⟩ = primal(z)`.
    /// Ties at the maximum share the mass evenly.
    pub fn subgradient(&self, z: &[Complex64]) -> Vec<Complex64> {
        let zero = Complex64::new(0.0, 0.0);
        let mut g = vec![zero; z.len()];
        let nz = self.primal(z);
        if nz == 0.0 {
            return g;
        }
        match *self {
            Atom::L2 => {
                for (gi, zi) in g.iter_mut().zip(z) {
                    *gi = zi / nz;
                }
            }
            Atom::L1 => {
                for (gi, zi) in g.iter_mut().zip(z) {
                    *gi = phase(*zi);
                }
            }
            Atom::Linf => {
                let ties: Vec<usize> = (0..z.len())
                    .filter(|&i| z[i].norm() >= nz * (1.0 - 1e-9))
                    .collect();
                let share = 1.0 / ties.len() as f64;
                for &i in &ties {
                    g[i] = phase(z[i]) * share;
                }
            }
            Atom::Lp(p) => {
                for (gi, zi) in g.iter_mut().zip(z) {
                    *gi = phase(*zi) * (zi.norm() / nz).powf(p - 1.0);
                }
            }
            Atom::GroupL1 { layers, points } => {
                let sums: Vec<f64> = (0..points)
                    .map(|x| (0..layers).map(|k| z[k * points + x].norm()).sum())
                    .collect();
                let ties: Vec<usize> = (0..points)
                    .filter(|&x| sums[x] >= nz * (1.0 - 1e-9))
                    .collect();
                let share = 1.0 / ties.len() as f64;
                for &x in &ties {
                    for k in 0..layers {
                        g[k * points + x] = phase(z[k * points + x]) * share;
                    }
                }
            }
        }
        g
    }
}

/// Threshold `τ ≥ 0` with `Σ (a_i − τ)_+ = radius`, given moduli sorted in
/// decreasing order. Returns 0 when the vector is already inside the ball.
fn l1_threshold(sorted_desc: &[f64], radius: f64) -> f64 {
    let total: f64 = sorted_desc.iter().sum();
    if total <= radius {
        return 0.0;
    }
    let mut acc = 0.0;
    let mut tau = 0.0;
    for (k, &a) in sorted_desc.iter().enumerate() {
        acc += a;
        let t = (acc - radius) / (k + 1) as f64;
        if k + 1 == sorted_desc.len() || sorted_desc[k + 1] <= t {
            tau = t;
            break;
        }
    }
    tau.max(0.0)
}

pub(crate) fn project_lp_ball(z: &mut [Complex64], p: f64, radius: f64) {
    let radius = radius.max(0.0);
    if p == 2.0 {
        let n = lp_of(z, 2.0);
        if n > radius {
            let s = radius / n;
            z.iter_mut().for_each(|c| *c *= s);
        }
    } else if p.is_infinite() {
        for c in z.iter_mut() {
            let r = c.norm();
            if r > radius {
                *c *= radius / r;
            }
        }
    } else if p == 1.0 {
        if lp_of(z, 1.0) <= radius {
            return;
        }
        let mut a: Vec<f64> = z.iter().map(|c| c.norm()).collect();
        a.sort_by(|x, y| y.partial_cmp(x).unwrap());
        let tau = l1_threshold(&a, radius);
        for c in z.iter_mut() {
            let r = c.norm();
            if r <= tau {
                *c = Complex64::new(0.0, 0.0);
            } else {
                *c *= (r - tau) / r;
            }
        }
    } else {
        if lp_of(z, p) <= radius {
            return;
        }
        project_general_lp(z, p, radius);
    }
}

/// Solve `u + μ u^{p−1} = a`, `u ∈ [0, a]`.
fn shrink_scalar(a: f64, mu: f64, p: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, a);
    for _ in 0..BISECT_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid + mu * mid.powf(p - 1.0) > a {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn project_general_lp(z: &mut [Complex64], p: f64, radius: f64) {
    let a: Vec<f64> = z.iter().map(|c| c.norm()).collect();
    let amax = a.iter().cloned().fold(0.0, f64::max);
    let norm_at = |mu: f64| -> f64 {
        a.iter()
            .map(|&ai| shrink_scalar(ai, mu, p).powf(p))
            .sum::<f64>()
            .powf(1.0 / p)
    };
    let mut hi = 1.0f64;
    while norm_at(hi) > radius && hi < 1e300 {
        hi *= 4.0;
    }
    let _ = amax;
    let mut lo = 0.0;
    for _ in 0..BISECT_STEPS {
        let mid = 0.5 * (lo + hi);
        if norm_at(mid) > radius {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    for (c, &ai) in z.iter_mut().zip(&a) {
        if ai > 0.0 {
            *c *= shrink_scalar(ai, hi, p) / ai;
        }
    }
}

/// Projection onto `{Σ_x max_k |w_{k,x}| ≤ radius}` by bisection on the
/// multiplier of the per-point `ℓ¹` prox.
fn project_group_dual(w: &mut [Complex64], layers: usize, points: usize, radius: f64) {
    let atom = Atom::GroupL1 { layers, points };
    if atom.dual(w) <= radius {
        return;
    }
    let sorted: Vec<Vec<f64>> = (0..points)
        .map(|x| {
            let mut v: Vec<f64> = (0..layers).map(|k| w[k * points + x].norm()).collect();
            v.sort_by(|a, b| b.partial_cmp(a).unwrap());
            v
        })
        .collect();
    // at multiplier μ the point value is the clip level τ_x(μ)
    let level = |v: &[f64], mu: f64| -> f64 {
        let tau = l1_threshold(v, mu);
        if tau == 0.0 {
            0.0
        } else {
            tau.min(v[0])
        }
    };
    let total = |mu: f64| -> f64 { sorted.iter().map(|v| level(v, mu)).sum() };
    let mut hi = sorted
        .iter()
        .map(|v| v.iter().sum::<f64>())
        .fold(0.0, f64::max);
    let mut lo = 0.0;
    for _ in 0..BISECT_STEPS {
        let mid = 0.5 * (lo + hi);
        if total(mid) > radius {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    for (x, v) in sorted.iter().enumerate() {
        let cap = level(v, hi);
        for k in 0..layers {
            let c = &mut w[k * points + x];
            let r = c.norm();
            if r > cap {
                *c *= cap / r;
            }
        }
    }
}

/// Moreau residual `‖y − Proj_{primal ≤ ρ}(y)‖_*` as a function of `ρ`,
/// with closed forms for `ℓ²` and `ℓ^∞`.
pub(crate) enum ResidualCurve<'a> {
    L2(f64),
    Linf { sorted_desc: Vec<f64>, prefix: Vec<f64> },
    Generic { atom: Atom, y: &'a [Complex64] },
}

impl<'a> ResidualCurve<'a> {
    pub fn new(atom: Atom, y: &'a [Complex64]) -> Self {
        match atom {
            Atom::L2 => ResidualCurve::L2(lp_of(y, 2.0)),
            Atom::Linf => {
                let mut s: Vec<f64> = y.iter().map(|c| c.norm()).collect();
                s.sort_by(|a, b| b.partial_cmp(a).unwrap());
                let mut prefix = Vec::with_capacity(s.len() + 1);
                prefix.push(0.0);
                let mut acc = 0.0;
                for v in &s {
                    acc += v;
                    prefix.push(acc);
                }
                ResidualCurve::Linf {
                    sorted_desc: s,
                    prefix,
                }
            }
            _ => ResidualCurve::Generic { atom, y },
        }
    }

    pub fn eval(&self, rho: f64) -> f64 {
        match self {
            ResidualCurve::L2(n) => (n - rho).max(0.0),
            ResidualCurve::Linf {
                sorted_desc,
                prefix,
            } => {
                // number of entries above rho
                let k = sorted_desc.partition_point(|&v| v > rho);
                prefix[k] - k as f64 * rho
            }
            ResidualCurve::Generic { atom, y } => {
                let mut z = y.to_vec();
                atom.project_primal_ball(&mut z, rho);
                let r: Vec<Complex64> = y.iter().zip(&z).map(|(a, b)| a - b).collect();
                atom.dual(&r)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_vec(n: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect()
    }

    fn dist2(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum()
    }

    /// Projection optimality: no feasible perturbation is closer.
    fn check_projection(atom: Atom, dual: bool, y: &[Complex64], radius: f64) {
        let mut p = y.to_vec();
        let norm = |v: &[Complex64]| if dual { atom.dual(v) } else { atom.primal(v) };
        if dual {
            atom.project_dual_ball(&mut p, radius)
        } else {
            atom.project_primal_ball(&mut p, radius)
        }
        assert!(norm(&p) <= radius * (1.0 + 1e-9) + 1e-12, "{atom:?} infeasible");
        let d0 = dist2(&p, y);
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..200 {
            let mut q = p.clone();
            for c in q.iter_mut() {
                *c += Complex64::new(rng.gen_range(-1e-3..1e-3), rng.gen_range(-1e-3..1e-3));
            }
            let n = norm(&q);
            if n > radius {
                q.iter_mut().for_each(|c| *c *= radius / n);
            }
            assert!(dist2(&q, y) >= d0 - 1e-10, "{atom:?} not optimal");
        }
    }

    #[test]
    fn projections_are_feasible_and_optimal() {
        let y = rand_vec(12, 1);
        for atom in [
            Atom::L2,
            Atom::Linf,
            Atom::L1,
            Atom::Lp(3.0),
            Atom::Lp(1.5),
            Atom::GroupL1 {
                layers: 3,
                points: 4,
            },
        ] {
            for radius in [0.1, 0.7, 2.0] {
                check_projection(atom, false, &y, radius);
                check_projection(atom, true, &y, radius);
            }
        }
    }

    #[test]
    fn duality_pairing() {
        let z = rand_vec(15, 3);
        for atom in [
            Atom::L2,
            Atom::Linf,
            Atom::L1,
            Atom::Lp(4.0),
            Atom::GroupL1 {
                layers: 5,
                points: 3,
            },
        ] {
            let g = atom.subgradient(&z);
            assert!((atom.dual(&g) - 1.0).abs() < 1e-9, "{atom:?}");
            let pair: f64 = g.iter().zip(&z).map(|(a, b)| (a.conj() * b).re).sum();
            assert!((pair - atom.primal(&z)).abs() < 1e-9, "{atom:?}");
            // Hölder on random dual vectors
            let w = rand_vec(15, 11);
            let pair: f64 = w.iter().zip(&z).map(|(a, b)| (a.conj() * b).re).sum();
            assert!(pair.abs() <= atom.dual(&w) * atom.primal(&z) + 1e-12);
        }
    }

    #[test]
    fn residual_curves_match_generic() {
        let y = rand_vec(20, 5);
        for atom in [Atom::L2, Atom::Linf] {
            let fast = ResidualCurve::new(atom, &y);
            let slow = ResidualCurve::Generic { atom, y: &y };
            for rho in [0.0, 0.05, 0.3, 0.9, 5.0] {
                assert!((fast.eval(rho) - slow.eval(rho)).abs() < 1e-12);
            }
        }
    }
}
