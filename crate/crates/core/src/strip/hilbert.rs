use num_complex::Complex64;

use super::LineFunction;
use crate::grid::fft_plan;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Discrete Hilbert kernel `κ_m = (1 − (−1)^m)/(π m)`, whose transform is
/// exactly `−i sgn ω` on `(−π, π)`.
pub fn hilbert_kernel(m: i64) -> f64 {
    if m % 2 == 0 {
        0.0
    } else {
        2.0 / (std::f64::consts::PI * m as f64)
    }
}

/// `Hg` by aperiodic convolution of the samples with the discrete kernel,
/// computed with zero-padded FFTs.
pub fn hilbert_transform(g: &LineFunction) -> LineFunction {
    let p = g.count();
    let size = 2 * p;
    let fwd = fft_plan(size, true);
    let inv = fft_plan(size, false);
    let mut kernel = vec![ZERO; size];
    for m in 1..p {
        let k = hilbert_kernel(m as i64);
        kernel[m] = Complex64::new(k, 0.0);
        kernel[size - m] = Complex64::new(-k, 0.0);
    }
    fwd.process(&mut kernel);
    let stride = g.components() * g.shape().len();
    let data = g.data();
    let mut out = vec![ZERO; data.len()];
    let mut line = vec![ZERO; size];
    let mut scratch = vec![ZERO; fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len())];
    let norm = 1.0 / size as f64;
    for ch in 0..stride {
        if (0..p).all(|k| data[k * stride + ch] == ZERO) {
            continue;
        }
        line.iter_mut().for_each(|z| *z = ZERO);
        for k in 0..p {
            line[k] = data[k * stride + ch];
        }
        fwd.process_with_scratch(&mut line, &mut scratch);
        for (a, b) in line.iter_mut().zip(&kernel) {
            *a *= b * norm;
        }
        inv.process_with_scratch(&mut line, &mut scratch);
        for k in 0..p {
            out[k * stride + ch] = line[k];
        }
    }
    g.with_data(out)
}
