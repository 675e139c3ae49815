//! Cached FFT plans and the pruned transform between band-limited
//! coefficients and values on the oversampled torus grid.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::torus::Shape;

type PlanKey = (usize, bool);

fn planner_cache() -> &'static Mutex<HashMap<PlanKey, Arc<dyn Fft<f64>>>> {
    static CACHE: OnceLock<Mutex<HashMap<PlanKey, Arc<dyn Fft<f64>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Shared 1-D FFT of the given length. `forward` uses `e^{-2πi jk/L}`.
pub fn fft_plan(len: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    let mut cache = planner_cache().lock().expect("fft cache poisoned");
    cache
        .entry((len, forward))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if forward {
                planner.plan_fft_forward(len)
            } else {
                planner.plan_fft_inverse(len)
            }
        })
        .clone()
}

/// Transform between the coefficient block `[-N, N]^d` and the uniform grid
/// with `L = (2N+1)·oversample` points per axis.
#[derive(Clone)]
pub struct GridTransform {
    shape: Shape,
    pub oversample: usize,
    pub points: usize,
    inverse: Arc<dyn Fft<f64>>,
    forward: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for GridTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GridTransform")
            .field("shape", &self.shape)
            .field("points", &self.points)
            .finish()
    }
}

impl GridTransform {
    pub fn new(shape: Shape, oversample: usize) -> Self {
        let oversample = oversample.max(1);
        let points = shape.side() * oversample;
        GridTransform {
            shape,
            oversample,
            points,
            inverse: fft_plan(points, false),
            forward: fft_plan(points, true),
        }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    /// Number of grid points `L^d`.
    pub fn grid_len(&self) -> usize {
        self.points.pow(self.shape.dim as u32)
    }

    #[inline]
    fn wrap(&self, i: usize) -> usize {
        // storage index i corresponds to frequency i - N
        let n = i as i64 - self.shape.bandlimit as i64;
        n.rem_euclid(self.points as i64) as usize
    }

    /// Exact trigonometric evaluation `f(x) = Σ f̂(n) e^{i n·x}` on the grid,
    /// row-major with `x_1` slowest.
    pub fn to_grid(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(coeffs.len(), self.shape.len());
        let d = self.shape.dim;
        let side = self.shape.side();
        let big_l = self.points;
        let mut sizes = vec![side; d];
        let mut data = coeffs.to_vec();
        let mut line = vec![Complex64::new(0.0, 0.0); big_l];
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.inverse.get_inplace_scratch_len()];
        for axis in (0..d).rev() {
            let outer: usize = sizes[..axis].iter().product();
            let inner: usize = sizes[axis + 1..].iter().product();
            let mut out = vec![Complex64::new(0.0, 0.0); outer * big_l * inner];
            for o in 0..outer {
                for c in 0..inner {
                    line.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
                    for i in 0..side {
                        line[self.wrap(i)] = data[(o * side + i) * inner + c];
                    }
                    self.inverse.process_with_scratch(&mut line, &mut scratch);
                    for (i, z) in line.iter().enumerate() {
                        out[(o * big_l + i) * inner + c] = *z;
                    }
                }
            }
            sizes[axis] = big_l;
            data = out;
        }
        data
    }

    /// Coefficient extraction on the same grid: forward FFT scaled by `L^{-d}`,
    /// keeping only modes in `[-N, N]^d`.
    pub fn from_grid(&self, values: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(values.len(), self.grid_len());
        let d = self.shape.dim;
        let side = self.shape.side();
        let big_l = self.points;
        let mut sizes = vec![big_l; d];
        let mut data = values.to_vec();
        let mut line = vec![Complex64::new(0.0, 0.0); big_l];
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.forward.get_inplace_scratch_len()];
        for axis in 0..d {
            let outer: usize = sizes[..axis].iter().product();
            let inner: usize = sizes[axis + 1..].iter().product();
            let mut out = vec![Complex64::new(0.0, 0.0); outer * side * inner];
            for o in 0..outer {
                for c in 0..inner {
                    for (i, z) in line.iter_mut().enumerate() {
                        *z = data[(o * big_l + i) * inner + c];
                    }
                    self.forward.process_with_scratch(&mut line, &mut scratch);
                    for i in 0..side {
                        out[(o * side + i) * inner + c] = line[self.wrap(i)];
                    }
                }
            }
            sizes[axis] = side;
            data = out;
        }
        let scale = 1.0 / (self.grid_len() as f64);
        data.iter_mut().for_each(|z| *z *= scale);
        data
    }
}

type GridKey = (usize, usize, usize);

/// Shared transform for `(shape, oversample)`.
pub fn grid_transform(shape: Shape, oversample: usize) -> Arc<GridTransform> {
    static CACHE: OnceLock<Mutex<HashMap<GridKey, Arc<GridTransform>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (shape.dim, shape.bandlimit, oversample.max(1));
    if let Some(t) = cache.lock().expect("grid cache poisoned").get(&key) {
        return t.clone();
    }
    let t = Arc::new(GridTransform::new(shape, oversample));
    cache
        .lock()
        .expect("grid cache poisoned")
        .entry(key)
        .or_insert(t)
        .clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_mode_evaluates_to_exponential() {
        let shape = Shape::new(2, 3);
        let g = GridTransform::new(shape, 2);
        let mut c = vec![Complex64::new(0.0, 0.0); shape.len()];
        let n = [2i64, -1];
        c[shape.index_of(&n).unwrap()] = Complex64::new(1.0, 0.0);
        let vals = g.to_grid(&c);
        let l = g.points;
        for a in 0..l {
            for b in 0..l {
                let x = [
                    2.0 * std::f64::consts::PI * a as f64 / l as f64,
                    2.0 * std::f64::consts::PI * b as f64 / l as f64,
                ];
                let phase = n[0] as f64 * x[0] + n[1] as f64 * x[1];
                let want = Complex64::new(phase.cos(), phase.sin());
                assert!((vals[a * l + b] - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn round_trip_3d() {
        let shape = Shape::new(3, 2);
        let g = GridTransform::new(shape, 3);
        let c: Vec<Complex64> = (0..shape.len())
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 1.3).cos()))
            .collect();
        let back = g.from_grid(&g.to_grid(&c));
        for (a, b) in c.iter().zip(&back) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
