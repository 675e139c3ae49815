use serde::{Deserialize, Serialize};

/// Band-limited lattice `Z^d ∩ [-N, N]^d`, stored row-major with `n_1`
/// slowest and index offset `+N` on every axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Shape {
    pub dim: usize,
    pub bandlimit: usize,
}

impl Shape {
    pub fn new(dim: usize, bandlimit: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        assert!(bandlimit >= 1, "bandlimit must be at least 1");
        Shape { dim, bandlimit }
    }

    /// Checked constructor; also rejects lattices above `2^28` modes.
    pub fn try_new(dim: usize, bandlimit: usize) -> crate::Result<Self> {
        let len = (2 * bandlimit as u128 + 1).checked_pow(dim as u32);
        if dim == 0 || bandlimit == 0 || len.is_none_or(|l| l > 1 << 28) {
            return Err(crate::Error::InvalidArgument(format!(
                "no lattice for d={dim}, N={bandlimit}"
            )));
        }
        Ok(Shape { dim, bandlimit })
    }

    #[inline]
    pub fn side(&self) -> usize {
        2 * self.bandlimit + 1
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.side().pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Flat index of the zero mode.
    pub fn zero_index(&self) -> usize {
        (self.len() - 1) / 2
    }

    pub fn index_of(&self, n: &[i64]) -> Option<usize> {
        if n.len() != self.dim {
            return None;
        }
        let big_n = self.bandlimit as i64;
        let side = self.side();
        let mut idx = 0usize;
        for &nj in n {
            if nj.abs() > big_n {
                return None;
            }
            idx = idx * side + (nj + big_n) as usize;
        }
        Some(idx)
    }

    pub fn mode_of(&self, mut idx: usize) -> Vec<i64> {
        let side = self.side();
        let big_n = self.bandlimit as i64;
        let mut n = vec![0i64; self.dim];
        for j in (0..self.dim).rev() {
            n[j] = (idx % side) as i64 - big_n;
            idx /= side;
        }
        n
    }

    /// Index of `-n` for the mode stored at `idx`. The layout is symmetric,
    /// so this is a reflection of the flat index.
    #[inline]
    pub fn neg_index(&self, idx: usize) -> usize {
        self.len() - 1 - idx
    }

    /// All modes in storage order.
    pub fn modes(&self) -> Vec<Vec<i64>> {
        (0..self.len()).map(|i| self.mode_of(i)).collect()
    }

    /// `|n|^2` for every stored mode.
    pub fn norms_sq(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| self.mode_of(i).iter().map(|&x| (x * x) as f64).sum())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip_and_reflection() {
        let s = Shape::new(3, 2);
        for i in 0..s.len() {
            let n = s.mode_of(i);
            assert_eq!(s.index_of(&n), Some(i));
            let neg: Vec<i64> = n.iter().map(|x| -x).collect();
            assert_eq!(s.index_of(&neg), Some(s.neg_index(i)));
        }
        assert_eq!(s.mode_of(s.zero_index()), vec![0, 0, 0]);
        assert_eq!(s.index_of(&[3, 0, 0]), None);
    }

    #[test]
    fn n1_is_slowest() {
        let s = Shape::new(2, 1);
        assert_eq!(s.mode_of(0), vec![-1, -1]);
        assert_eq!(s.mode_of(1), vec![-1, 0]);
        assert_eq!(s.mode_of(3), vec![0, -1]);
    }
}
