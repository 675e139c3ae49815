//! Smooth dyadic Littlewood–Paley partition with raised-cosine transitions.

use std::f64::consts::PI;

use super::{Shape, TorusField};
use crate::error::{Error, Result};

/// Index of the last block for bandlimit `N`: `ceil(log2 N) + 1`.
pub fn last_block(bandlimit: usize) -> usize {
    let mut k = 0usize;
    while (1usize << k) < bandlimit {
        k += 1;
    }
    k + 1
}

/// Low-pass profile `Φ_k`: 1 on `r ≤ 2^k`, 0 on `r ≥ 2^{k+1}`.
pub fn low_pass(k: usize, r: f64) -> f64 {
    let a = (1u64 << k) as f64;
    if r <= a {
        1.0
    } else if r >= 2.0 * a {
        0.0
    } else {
        0.5 * (1.0 + (PI * (r - a) / a).cos())
    }
}

/// Block multiplier `ψ_k(r)` for bandlimit `N`. The top block absorbs the
/// remainder so the blocks sum to one exactly.
pub fn psi(k: usize, r: f64, bandlimit: usize) -> f64 {
    let top = last_block(bandlimit);
    if k > top {
        return 0.0;
    }
    let lo = if k == 0 { 0.0 } else { low_pass(k - 1, r) };
    let hi = if k == top { 1.0 } else { low_pass(k, r) };
    hi - lo
}

/// `ψ_k(|n|)` for every stored mode.
pub fn block_multiplier(shape: Shape, k: usize) -> Vec<f64> {
    shape
        .norms_sq()
        .into_iter()
        .map(|r2| psi(k, r2.sqrt(), shape.bandlimit))
        .collect()
}

/// All block multipliers `ψ_0, …, ψ_K`.
pub fn block_multipliers(shape: Shape) -> Vec<Vec<f64>> {
    (0..=last_block(shape.bandlimit))
        .map(|k| block_multiplier(shape, k))
        .collect()
}

/// `P_k f`.
pub fn lp_block(f: &TorusField, k: usize) -> Result<TorusField> {
    let top = last_block(f.bandlimit());
    if k > top {
        return Err(Error::InvalidArgument(format!(
            "block {k} exceeds last block {top}"
        )));
    }
    let m = block_multiplier(f.shape(), k);
    Ok(f.map_modes(f.is_real(), |i, z| z * m[i]))
}
