use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::fft_plan;
use crate::torus::{norm_with, Shape, SpaceNorm, TorusField, VectorField};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Samples `g(t_k)`, `t_k = -T + k h`, of a function on the real line with
/// values in `components`-tuples of band-limited fields. A spectrum is stored
/// the same way on the dual grid `ξ_m = -T_ξ + m Δξ`.
#[derive(Debug, Clone, PartialEq)]
pub struct LineFunction {
    half_width: f64,
    step: f64,
    count: usize,
    shape: Shape,
    components: usize,
    /// Index `(k · components + c) · len + i`.
    data: Vec<Complex64>,
    pub space: SpaceNorm,
}

fn sample_count(half_width: f64, step: f64) -> Result<usize> {
    if !(half_width > 0.0) || !(step > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "line grid needs T > 0 and h > 0 (got T={half_width}, h={step})"
        )));
    }
    let ratio = 2.0 * half_width / step;
    let n = ratio.round();
    if (ratio - n).abs() > 1e-9 * ratio.max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "2T/h = {ratio} is not an integer"
        )));
    }
    Ok(n as usize + 1)
}

impl LineFunction {
    pub fn zeros(
        half_width: f64,
        step: f64,
        shape: Shape,
        components: usize,
        space: SpaceNorm,
    ) -> Result<Self> {
        let count = sample_count(half_width, step)?;
        if components == 0 {
            return Err(Error::InvalidArgument("line function needs components".into()));
        }
        Ok(LineFunction {
            half_width,
            step,
            count,
            shape,
            components,
            data: vec![ZERO; count * components * shape.len()],
            space,
        })
    }

    /// Sample `f(t)` at every grid point.
    pub fn from_fn<F>(
        half_width: f64,
        step: f64,
        shape: Shape,
        components: usize,
        space: SpaceNorm,
        mut f: F,
    ) -> Result<Self>
    where
        F: FnMut(f64) -> Vec<TorusField>,
    {
        let mut g = LineFunction::zeros(half_width, step, shape, components, space)?;
        for k in 0..g.count {
            let s = f(g.t(k));
            g.set_sample(k, &s)?;
        }
        Ok(g)
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn center(&self) -> usize {
        (self.count - 1) / 2
    }

    pub fn t(&self, k: usize) -> f64 {
        (k as f64 - self.center() as f64) * self.step
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.count).map(|k| self.t(k)).collect()
    }

    fn stride(&self) -> usize {
        self.components * self.shape.len()
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn sample_slice(&self, k: usize) -> &[Complex64] {
        let s = self.stride();
        &self.data[k * s..(k + 1) * s]
    }

    pub fn sample_slice_mut(&mut self, k: usize) -> &mut [Complex64] {
        let s = self.stride();
        &mut self.data[k * s..(k + 1) * s]
    }

    pub fn sample(&self, k: usize) -> Vec<TorusField> {
        let len = self.shape.len();
        self.sample_slice(k)
            .chunks(len)
            .map(|c| TorusField::from_raw(self.shape, c.to_vec(), false))
            .collect()
    }

    /// The sample as a vector field; needs `components = d`.
    pub fn sample_vector(&self, k: usize) -> Result<VectorField> {
        VectorField::new(self.sample(k))
    }

    pub fn set_sample(&mut self, k: usize, fields: &[TorusField]) -> Result<()> {
        if fields.len() != self.components {
            return Err(Error::ShapeMismatch(format!(
                "sample has {} components, expected {}",
                fields.len(),
                self.components
            )));
        }
        let len = self.shape.len();
        let shape = self.shape;
        let slot = self.sample_slice_mut(k);
        for (c, f) in fields.iter().enumerate() {
            if f.shape() != shape {
                return Err(Error::ShapeMismatch("sample shape differs".into()));
            }
            slot[c * len..(c + 1) * len].copy_from_slice(f.coeffs());
        }
        Ok(())
    }

    /// Same grid and layout, new data.
    pub(crate) fn with_data(&self, data: Vec<Complex64>) -> LineFunction {
        debug_assert_eq!(data.len(), self.data.len());
        LineFunction {
            data,
            ..self.clone_meta()
        }
    }

    fn clone_meta(&self) -> LineFunction {
        LineFunction {
            half_width: self.half_width,
            step: self.step,
            count: self.count,
            shape: self.shape,
            components: self.components,
            data: Vec::new(),
            space: self.space.clone(),
        }
    }

    pub fn same_grid(&self, other: &LineFunction) -> bool {
        self.count == other.count
            && (self.step - other.step).abs() <= 1e-15 * self.step
            && self.shape == other.shape
            && self.components == other.components
    }

    pub(crate) fn check_same_grid(&self, other: &LineFunction) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::ShapeMismatch("line functions live on different grids".into()))
        }
    }

    pub fn scale(&self, c: Complex64) -> LineFunction {
        self.with_data(self.data.iter().map(|z| z * c).collect())
    }

    pub fn add(&self, other: &LineFunction) -> Result<LineFunction> {
        self.check_same_grid(other)?;
        Ok(self.with_data(self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect()))
    }

    pub fn sub(&self, other: &LineFunction) -> Result<LineFunction> {
        self.check_same_grid(other)?;
        Ok(self.with_data(self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect()))
    }

    /// Multiply sample `k` by `m(t_k)` (or `m(ξ_k)` for spectra).
    pub fn multiply_by<F: Fn(f64) -> Complex64>(&self, m: F) -> LineFunction {
        let s = self.stride();
        let mut data = self.data.clone();
        for k in 0..self.count {
            let f = m(self.t(k));
            data[k * s..(k + 1) * s].iter_mut().for_each(|z| *z *= f);
        }
        self.with_data(data)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Coefficient `ℓ²` norm of every sample.
    pub fn sample_l2(&self) -> Vec<f64> {
        (0..self.count)
            .map(|k| {
                self.sample_slice(k)
                    .iter()
                    .map(|z| z.norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .collect()
    }

    /// Norm of every sample in `s` (max over components).
    pub fn sample_norms(&self, s: &SpaceNorm, oversample: usize) -> Result<Vec<f64>> {
        (0..self.count)
            .map(|k| norm_with(&self.sample(k), s, oversample))
            .collect()
    }

    /// `(h Σ_k ‖g_k‖_s^q)^{1/q}`.
    pub fn lq_norm(&self, s: &SpaceNorm, q: f64, oversample: usize) -> Result<f64> {
        let n = self.sample_norms(s, oversample)?;
        Ok(lq_of(&n, self.step, q))
    }

    /// Largest of the four outermost sample norms relative to the peak.
    pub fn edge_ratio(&self) -> f64 {
        let n = self.sample_l2();
        let peak = n.iter().cloned().fold(0.0, f64::max);
        if peak == 0.0 {
            return 0.0;
        }
        let c = self.count;
        let idx = [0, 1.min(c - 1), c.saturating_sub(2), c - 1];
        idx.iter().map(|&k| n[k]).fold(0.0, f64::max) / peak
    }

    /// Reject samples that have not decayed to `budget` of the peak at the
    /// edges, reporting the half-width a Gaussian envelope would need.
    pub fn check_decay(&self, budget: f64) -> Result<f64> {
        let r = self.edge_ratio();
        if r <= budget {
            return Ok(r);
        }
        let n = self.sample_l2();
        let peak = n.iter().cloned().fold(0.0, f64::max);
        let c = self.count;
        // slowest Gaussian rate e^{-a t^2} consistent with the edge samples
        let rate = [0, 1.min(c - 1), c.saturating_sub(2), c - 1]
            .iter()
            .filter(|&&k| n[k] > 0.0 && n[k] < peak && self.t(k) != 0.0)
            .map(|&k| -(n[k] / peak).ln() / self.t(k).powi(2))
            .fold(f64::INFINITY, f64::min);
        let t = self.half_width;
        let required = if rate.is_finite() && rate > 0.0 {
            (-budget.ln() / rate).sqrt()
        } else {
            2.0 * t
        };
        Err(Error::DecayViolation {
            edge_ratio: r,
            required_half_width: required.max(t),
        })
    }

    /// Centered transform `ĝ(ξ_m) = h Σ_k g_k e^{-i ξ_m t_k}` on the dual grid
    /// `Δξ = 2π/(P h)`.
    pub fn dft(&self) -> LineFunction {
        let p = self.count;
        let c = self.center() as f64;
        let dxi = 2.0 * std::f64::consts::PI / (p as f64 * self.step);
        let data = centered_transform(&self.data, p, self.stride(), c, -1.0, self.step);
        LineFunction {
            half_width: c * dxi,
            step: dxi,
            data,
            ..self.clone_meta()
        }
    }

    /// Exact inverse of [`LineFunction::dft`].
    pub fn idft(&self) -> LineFunction {
        let p = self.count;
        let c = self.center() as f64;
        let h = 2.0 * std::f64::consts::PI / (p as f64 * self.step);
        let scale = 1.0 / (p as f64 * h);
        let data = centered_transform(&self.data, p, self.stride(), c, 1.0, scale);
        LineFunction {
            half_width: c * h,
            step: h,
            data,
            ..self.clone_meta()
        }
    }
}

pub(crate) fn lq_of(norms: &[f64], step: f64, q: f64) -> f64 {
    if q.is_infinite() {
        norms.iter().cloned().fold(0.0, f64::max)
    } else {
        (step * norms.iter().map(|v| v.powf(q)).sum::<f64>()).powf(1.0 / q)
    }
}

/// `out_m = scale · Σ_k g_k e^{sign · 2πi (m-c)(k-c)/P}` along the sample axis.
fn centered_transform(
    data: &[Complex64],
    p: usize,
    stride: usize,
    c: f64,
    sign: f64,
    scale: f64,
) -> Vec<Complex64> {
    let fft = fft_plan(p, sign < 0.0);
    let two_pi = 2.0 * std::f64::consts::PI;
    let pre: Vec<Complex64> = (0..p)
        .map(|k| Complex64::from_polar(1.0, -sign * two_pi * c * k as f64 / p as f64))
        .collect();
    let post: Vec<Complex64> = (0..p)
        .map(|m| Complex64::from_polar(scale, -sign * two_pi * (m as f64 - c) * c / p as f64))
        .collect();
    let mut out = vec![ZERO; data.len()];
    let mut line = vec![ZERO; p];
    let mut scratch = vec![ZERO; fft.get_inplace_scratch_len()];
    for ch in 0..stride {
        if (0..p).all(|k| data[k * stride + ch] == ZERO) {
            continue;
        }
        for k in 0..p {
            line[k] = data[k * stride + ch] * pre[k];
        }
        fft.process_with_scratch(&mut line, &mut scratch);
        for m in 0..p {
            out[m * stride + ch] = line[m] * post[m];
        }
    }
    out
}
