//! Sums of weighted norms of Fourier-diagonal lifts, `Σ_i w_i ‖B_i L_i x − β_i‖`.

use std::sync::Arc;

use num_complex::Complex64;

use super::atoms::Atom;
use crate::error::{Error, Result};
use crate::grid::{grid_transform, GridTransform};
use crate::torus::{lp, Shape, SpaceNorm};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Linear map from the unknowns to the field a term measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lift {
    /// `m` components to the same `m` components.
    Identity,
    /// Divergence-free projection of a `d`-vector.
    DivFree,
    /// Scalar potential to its `d`-vector gradient.
    Gradient,
}

impl Lift {
    pub fn output_components(&self, inputs: usize, dim: usize) -> usize {
        match self {
            Lift::Identity | Lift::DivFree => inputs,
            Lift::Gradient => dim,
        }
    }
}

/// Per-mode integer coordinates cached as floats.
#[derive(Debug, Clone)]
pub(crate) struct ModeTable {
    pub shape: Shape,
    pub n: Vec<Vec<f64>>,
    pub r2: Vec<f64>,
}

impl ModeTable {
    pub fn new(shape: Shape) -> Self {
        let modes = shape.modes();
        let n = modes
            .iter()
            .map(|m| m.iter().map(|&x| x as f64).collect())
            .collect::<Vec<Vec<f64>>>();
        let r2 = n.iter().map(|m| m.iter().map(|x| x * x).sum()).collect();
        ModeTable { shape, n, r2 }
    }

    pub fn apply(&self, lift: Lift, x: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
        match lift {
            Lift::Identity => x.to_vec(),
            Lift::DivFree => self.div_free(x),
            Lift::Gradient => {
                let d = self.shape.dim;
                (0..d)
                    .map(|j| {
                        x[0].iter()
                            .enumerate()
                            .map(|(i, z)| I * self.n[i][j] * z)
                            .collect()
                    })
                    .collect()
            }
        }
    }

    pub fn adjoint(&self, lift: Lift, y: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
        match lift {
            Lift::Identity => y.to_vec(),
            Lift::DivFree => self.div_free(y),
            Lift::Gradient => {
                let len = self.shape.len();
                let mut out = vec![ZERO; len];
                for (j, yj) in y.iter().enumerate() {
                    for i in 0..len {
                        out[i] -= I * self.n[i][j] * yj[i];
                    }
                }
                vec![out]
            }
        }
    }

    /// `z` with `L* z = r` of minimal norm, or `None` when `r` leaves the range.
    pub fn adjoint_pinv(&self, lift: Lift, r: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
        match lift {
            Lift::Identity => r.to_vec(),
            Lift::DivFree => self.div_free(r),
            Lift::Gradient => {
                let d = self.shape.dim;
                (0..d)
                    .map(|j| {
                        r[0].iter()
                            .enumerate()
                            .map(|(i, z)| {
                                if self.r2[i] == 0.0 {
                                    ZERO
                                } else {
                                    I * self.n[i][j] * z / self.r2[i]
                                }
                            })
                            .collect()
                    })
                    .collect()
            }
        }
    }

    fn div_free(&self, x: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
        let d = self.shape.dim;
        let len = self.shape.len();
        let mut out: Vec<Vec<Complex64>> = x.to_vec();
        for i in 0..len {
            if self.r2[i] == 0.0 {
                continue;
            }
            let mut dot = ZERO;
            for j in 0..d {
                dot += self.n[i][j] * x[j][i];
            }
            for j in 0..d {
                out[j][i] -= dot * (self.n[i][j] / self.r2[i]);
            }
        }
        out
    }
}

/// Linear part of a block.
#[derive(Debug, Clone)]
pub enum BlockMap {
    /// Coefficientwise weights.
    Fourier(Vec<f64>),
    /// Layers of normalized grid values `E(m_k ⊙ ĉ)/√(L^d)`.
    Grid {
        layers: Vec<Vec<f64>>,
        transform: Arc<GridTransform>,
    },
}

/// One member of a max-of-norms: `scale · atom(map(y_component))`.
#[derive(Debug, Clone)]
pub struct Block {
    pub component: usize,
    pub map: BlockMap,
    pub atom: Atom,
    pub scale: f64,
}

impl Block {
    pub fn out_len(&self) -> usize {
        match &self.map {
            BlockMap::Fourier(w) => w.len(),
            BlockMap::Grid { layers, transform } => layers.len() * transform.grid_len(),
        }
    }

    pub fn apply(&self, c: &[Complex64]) -> Vec<Complex64> {
        match &self.map {
            BlockMap::Fourier(w) => c.iter().zip(w).map(|(z, a)| z * a).collect(),
            BlockMap::Grid { layers, transform } => {
                let g = transform.grid_len();
                let norm = 1.0 / (g as f64).sqrt();
                let mut out = Vec::with_capacity(layers.len() * g);
                let mut buf = vec![ZERO; c.len()];
                for m in layers {
                    for ((b, z), a) in buf.iter_mut().zip(c).zip(m) {
                        *b = z * (a * norm);
                    }
                    out.extend(transform.to_grid(&buf));
                }
                out
            }
        }
    }

    /// Adds `map^*(w)` into `acc`.
    pub fn adjoint_add(&self, w: &[Complex64], acc: &mut [Complex64]) {
        match &self.map {
            BlockMap::Fourier(a) => {
                for ((o, z), s) in acc.iter_mut().zip(w).zip(a) {
                    *o += z * s;
                }
            }
            BlockMap::Grid { layers, transform } => {
                let g = transform.grid_len();
                let norm = (g as f64).sqrt();
                for (k, m) in layers.iter().enumerate() {
                    let c = transform.from_grid(&w[k * g..(k + 1) * g]);
                    for ((o, z), a) in acc.iter_mut().zip(c).zip(m) {
                        *o += z * (a * norm);
                    }
                }
            }
        }
    }

    /// Diagonal of `map^* map` in coefficient space.
    pub fn gram_diagonal(&self) -> Vec<f64> {
        match &self.map {
            BlockMap::Fourier(w) => w.iter().map(|a| a * a).collect(),
            BlockMap::Grid { layers, .. } => {
                let mut d = vec![0.0; layers[0].len()];
                for m in layers {
                    for (di, a) in d.iter_mut().zip(m) {
                        *di += a * a;
                    }
                }
                d
            }
        }
    }

    pub fn value(&self, z: &[Complex64]) -> f64 {
        self.scale * self.atom.primal(z)
    }

    pub fn dual_value(&self, w: &[Complex64]) -> f64 {
        self.atom.dual(w) / self.scale
    }
}

fn grid_block(
    component: usize,
    shape: Shape,
    oversample: usize,
    layers: Vec<Vec<f64>>,
    atom_of: impl Fn(usize, usize) -> Atom,
    quad_scale: impl Fn(f64) -> f64,
) -> Block {
    let transform = grid_transform(shape, oversample);
    let big = layers
        .iter()
        .flat_map(|m| m.iter())
        .fold(0.0f64, |a, b| a.max(b.abs()));
    let big = if big > 0.0 { big } else { 1.0 };
    let layers: Vec<Vec<f64>> = layers
        .into_iter()
        .map(|m| m.into_iter().map(|a| a / big).collect())
        .collect();
    let g = transform.grid_len();
    let atom = atom_of(layers.len(), g);
    Block {
        component,
        map: BlockMap::Grid { layers, transform },
        atom,
        scale: big * quad_scale(g as f64),
    }
}

/// Blocks whose max equals `s` applied to component `component`.
pub fn blocks_for_norm(
    s: &SpaceNorm,
    component: usize,
    shape: Shape,
    oversample: usize,
) -> Result<Vec<Block>> {
    s.validate()?;
    let ones = vec![1.0; shape.len()];
    Ok(match s {
        SpaceNorm::Lp(p) if *p == 2.0 => vec![Block {
            component,
            map: BlockMap::Fourier(ones),
            atom: Atom::L2,
            scale: 1.0,
        }],
        SpaceNorm::Lp(p) => {
            let p = *p;
            let atom = if p.is_infinite() {
                Atom::Linf
            } else if p == 1.0 {
                Atom::L1
            } else {
                Atom::Lp(p)
            };
            vec![grid_block(
                component,
                shape,
                oversample,
                vec![ones],
                move |_, _| atom,
                move |g| g.powf(0.5 - if p.is_infinite() { 0.0 } else { 1.0 / p }),
            )]
        }
        SpaceNorm::Hs(order) => {
            let w: Vec<f64> = shape
                .norms_sq()
                .into_iter()
                .map(|r2| (1.0 + r2).powf(order / 2.0))
                .collect();
            let big = w.iter().cloned().fold(0.0, f64::max);
            vec![Block {
                component,
                map: BlockMap::Fourier(w.into_iter().map(|a| a / big).collect()),
                atom: Atom::L2,
                scale: big,
            }]
        }
        SpaceNorm::BesovLP { sigma, q } => {
            let q = *q;
            let layers: Vec<Vec<f64>> = lp::block_multipliers(shape)
                .into_iter()
                .enumerate()
                .map(|(k, m)| {
                    let w = 2f64.powf(k as f64 * sigma);
                    m.into_iter().map(|a| a * w).collect()
                })
                .collect();
            let atom = if q.is_infinite() {
                Atom::Linf
            } else if q == 1.0 {
                Atom::L1
            } else if q == 2.0 {
                Atom::L2
            } else {
                Atom::Lp(q)
            };
            vec![grid_block(
                component,
                shape,
                oversample,
                layers,
                move |_, _| atom,
                move |g| g.powf(0.5 - if q.is_infinite() { 0.0 } else { 1.0 / q }),
            )]
        }
        SpaceNorm::S1Linf => vec![grid_block(
            component,
            shape,
            oversample,
            lp::block_multipliers(shape),
            |layers, points| Atom::GroupL1 { layers, points },
            |g| g.sqrt(),
        )],
        SpaceNorm::MaxOf(list) => {
            let mut out = Vec::new();
            for m in list {
                out.extend(blocks_for_norm(m, component, shape, oversample)?);
            }
            out
        }
        SpaceNorm::InterpKq { .. } => {
            return Err(Error::UnsupportedNorm(
                "interpolation norms are not convex-program atoms".into(),
            ))
        }
    })
}

/// `weight · max_b block_b(B_b (L x)_{c_b} − β_b)`.
#[derive(Debug, Clone)]
pub struct Term {
    pub weight: f64,
    pub lift: Lift,
    pub blocks: Vec<Block>,
    /// `β_b = B_b target_{c_b}` per block.
    pub offsets: Vec<Vec<Complex64>>,
    pub lifted_components: usize,
}

impl Term {
    /// Term measuring `‖L x − target‖_s` for a field norm `s` applied to every
    /// lifted component (vector norms take the max over components).
    pub fn new(
        weight: f64,
        lift: Lift,
        norm: &SpaceNorm,
        target: &[Vec<Complex64>],
        shape: Shape,
        oversample: usize,
    ) -> Result<Self> {
        let k = target.len();
        let mut blocks = Vec::new();
        for c in 0..k {
            blocks.extend(blocks_for_norm(norm, c, shape, oversample)?);
        }
        let offsets = blocks
            .iter()
            .map(|b| {
                if target[b.component].iter().all(|z| *z == ZERO) {
                    vec![ZERO; b.out_len()]
                } else {
                    b.apply(&target[b.component])
                }
            })
            .collect();
        Ok(Term {
            weight,
            lift,
            blocks,
            offsets,
            lifted_components: k,
        })
    }

    pub fn uses_offset(&self) -> bool {
        self.offsets.iter().any(|o| o.iter().any(|z| *z != ZERO))
    }
}

/// The full objective over `components` unknown fields of one shape.
#[derive(Debug, Clone)]
pub struct Problem {
    pub(crate) modes: ModeTable,
    pub components: usize,
    pub terms: Vec<Term>,
}

impl Problem {
    pub fn new(shape: Shape, components: usize, terms: Vec<Term>) -> Result<Self> {
        for t in &terms {
            let want = t.lift.output_components(components, shape.dim);
            if t.lifted_components != want {
                return Err(Error::ShapeMismatch(format!(
                    "term expects {} lifted components, lift produces {want}",
                    t.lifted_components
                )));
            }
            if t.lift == Lift::Gradient && components != 1 {
                return Err(Error::ShapeMismatch("gradient lift needs one potential".into()));
            }
            if t.lift == Lift::DivFree && components != shape.dim {
                return Err(Error::ShapeMismatch("div-free lift needs d components".into()));
            }
        }
        Ok(Problem {
            modes: ModeTable::new(shape),
            components,
            terms,
        })
    }

    pub fn shape(&self) -> Shape {
        self.modes.shape
    }

    /// Block outputs `B_b (L x)_{c_b}` per term and block (no offsets).
    pub fn forward(&self, x: &[Vec<Complex64>]) -> Vec<Vec<Vec<Complex64>>> {
        self.terms
            .iter()
            .map(|t| {
                let y = self.modes.apply(t.lift, x);
                t.blocks.iter().map(|b| b.apply(&y[b.component])).collect()
            })
            .collect()
    }

    /// `Σ_i L_i^* B_i^* w_i`.
    pub fn adjoint(&self, w: &[Vec<Vec<Complex64>>]) -> Vec<Vec<Complex64>> {
        let len = self.shape().len();
        let mut acc = vec![vec![ZERO; len]; self.components];
        for (t, wt) in self.terms.iter().zip(w) {
            let r = self.term_adjoint(t, wt);
            for (a, b) in acc.iter_mut().zip(r) {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
            }
        }
        acc
    }

    pub(crate) fn term_adjoint(&self, t: &Term, w: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
        let len = self.shape().len();
        let mut lifted = vec![vec![ZERO; len]; t.lifted_components];
        for (b, wb) in t.blocks.iter().zip(w) {
            b.adjoint_add(wb, &mut lifted[b.component]);
        }
        self.modes.adjoint(t.lift, &lifted)
    }

    /// Objective `Σ_i w_i max_b scale_b atom_b(z_b − β_b)` at given block outputs.
    pub fn objective_from(&self, z: &[Vec<Vec<Complex64>>]) -> f64 {
        self.terms
            .iter()
            .zip(z)
            .map(|(t, zt)| t.weight * term_value(t, zt))
            .sum()
    }

    pub fn objective(&self, x: &[Vec<Complex64>]) -> f64 {
        self.objective_from(&self.forward(x))
    }
}

pub(crate) fn term_value(t: &Term, z: &[Vec<Complex64>]) -> f64 {
    t.blocks
        .iter()
        .zip(z)
        .zip(&t.offsets)
        .map(|((b, zb), ob)| {
            let r: Vec<Complex64> = zb.iter().zip(ob).map(|(a, c)| a - c).collect();
            b.value(&r)
        })
        .fold(0.0, f64::max)
}
