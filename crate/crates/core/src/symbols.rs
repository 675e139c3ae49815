//! Discrete multiplier symbols on `Z^d ∩ [-N, N]^d`: the summed-difference
//! decay conditions and the `S₁L^∞` size of the associated kernels.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::torus::{norm_with, Shape, SpaceNorm, TorusField};

/// Symbol values `m(n)` with a validity mask; differences shrink the valid
/// range along their axis.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolGrid {
    shape: Shape,
    ell: usize,
    values: Vec<Complex64>,
    valid: Vec<bool>,
}

impl SymbolGrid {
    /// Requires `1 ≤ ℓ ≤ d` and `m(0) = 0`.
    pub fn new(shape: Shape, ell: usize, values: Vec<Complex64>) -> Result<Self> {
        if ell == 0 || ell > shape.dim {
            return Err(Error::InvalidArgument(format!("ℓ = {ell} not in 1..={}", shape.dim)));
        }
        if values.len() != shape.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} symbol values for {} modes",
                values.len(),
                shape.len()
            )));
        }
        if let Some(i) = values.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        if values[shape.zero_index()] != Complex64::new(0.0, 0.0) {
            return Err(Error::InvalidArgument("symbol must vanish at n = 0".into()));
        }
        Ok(SymbolGrid {
            shape,
            ell,
            valid: vec![true; values.len()],
            values,
        })
    }

    /// `m(n) = f(n)` for `n ≠ 0`.
    pub fn from_fn(shape: Shape, ell: usize, f: impl Fn(&[i64]) -> Complex64) -> Result<Self> {
        let z = shape.zero_index();
        let values = (0..shape.len())
            .map(|i| if i == z { Complex64::new(0.0, 0.0) } else { f(&shape.mode_of(i)) })
            .collect();
        SymbolGrid::new(shape, ell, values)
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn is_valid(&self, i: usize) -> bool {
        self.valid[i]
    }

    pub fn get(&self, n: &[i64]) -> Option<Complex64> {
        self.shape
            .index_of(n)
            .filter(|&i| self.valid[i])
            .map(|i| self.values[i])
    }

    pub fn scale(&self, c: Complex64) -> SymbolGrid {
        SymbolGrid {
            values: self.values.iter().map(|z| z * c).collect(),
            ..self.clone()
        }
    }

    /// First coordinate among `0..ℓ` in which `m` is not exactly odd.
    pub fn check_odd(&self) -> Result<()> {
        for j in 0..self.ell {
            for i in 0..self.values.len() {
                let mut n = self.shape.mode_of(i);
                n[j] = -n[j];
                let r = self.shape.index_of(&n).unwrap();
                if self.values[r] != -self.values[i] {
                    return Err(Error::OddnessViolation {
                        coordinate: j + 1,
                        index: self.shape.mode_of(i),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Forward difference `∂_j m(n) = m(n + e_j) − m(n)`; entries with
/// `n_j = N` (or any invalid input) become invalid.
pub fn discrete_derivative(m: &SymbolGrid, j: usize) -> Result<SymbolGrid> {
    let shape = m.shape;
    if j >= shape.dim {
        return Err(Error::InvalidArgument(format!("axis {j} out of range")));
    }
    let step = shape.side().pow((shape.dim - 1 - j) as u32);
    let top = shape.bandlimit as i64;
    let mut values = vec![Complex64::new(0.0, 0.0); m.values.len()];
    let mut valid = vec![false; m.values.len()];
    for i in 0..values.len() {
        let nj = shape.mode_of(i)[j];
        if nj < top && m.valid[i] && m.valid[i + step] {
            values[i] = m.values[i + step] - m.values[i];
            valid[i] = true;
        }
    }
    Ok(SymbolGrid {
        shape,
        ell: m.ell,
        values,
        valid,
    })
}

/// Outcome of the decay check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BbCheck {
    /// `max_{α, n'} |n'|^{ℓ+|α|} Σ_{n''} |∂^α m(n', n'')|`.
    pub constant: f64,
    pub alpha: Vec<u8>,
    pub at: Vec<i64>,
    /// Largest share of an `n''`-sum coming from its outermost shell.
    pub tail: f64,
}

/// Minimal constant of the summed-difference bound over the positive
/// orthant `n' ∈ [1, N]^ℓ`, `α ∈ {0,1}^ℓ`.
pub fn check_bb_symbol(m: &SymbolGrid) -> Result<BbCheck> {
    check_bb_symbol_with(m, Exec::default())
}

pub fn check_bb_symbol_with(m: &SymbolGrid, exec: Exec) -> Result<BbCheck> {
    m.check_odd()?;
    let shape = m.shape;
    let ell = m.ell;
    let d = shape.dim;
    let nb = shape.bandlimit as i64;
    let inner = shape.side().pow((d - ell) as u32);
    let mut best = BbCheck {
        constant: 0.0,
        alpha: vec![0; ell],
        at: vec![1; ell],
        tail: 0.0,
    };
    for mask in 0..(1usize << ell) {
        let alpha: Vec<u8> = (0..ell).map(|j| ((mask >> j) & 1) as u8).collect();
        let mut dm = m.clone();
        for (j, &a) in alpha.iter().enumerate() {
            if a == 1 {
                dm = discrete_derivative(&dm, j)?;
            }
        }
        let order = (ell + alpha.iter().map(|&a| a as usize).sum::<usize>()) as i32;
        // outer index over n' ∈ [1, N]^ℓ
        let outer: Vec<Vec<i64>> = (0..(nb as usize).pow(ell as u32))
            .map(|mut r| {
                let mut np = vec![0i64; ell];
                for j in (0..ell).rev() {
                    np[j] = (r % nb as usize) as i64 + 1;
                    r /= nb as usize;
                }
                np
            })
            .collect();
        let dm = &dm;
        let rows = exec.map(outer, |np| {
            let mut full = np.clone();
            full.resize(d, -nb);
            let base = shape.index_of(&full).unwrap();
            let mut sum = 0.0;
            let mut shell = 0.0;
            let mut any = false;
            for r in 0..inner {
                let i = base + r;
                if !dm.valid[i] {
                    continue;
                }
                any = true;
                let v = dm.values[i].norm();
                sum += v;
                if shape.mode_of(i)[ell..].iter().any(|x| x.abs() == nb) {
                    shell += v;
                }
            }
            let r2: f64 = np.iter().map(|&x| (x * x) as f64).sum();
            let c = if any { sum * r2.sqrt().powi(order) } else { 0.0 };
            (np, c, if sum > 0.0 { shell / sum } else { 0.0 })
        });
        for (np, c, tail) in rows {
            best.tail = best.tail.max(tail);
            if c > best.constant {
                best.constant = c;
                best.alpha = alpha.clone();
                best.at = np;
            }
        }
    }
    Ok(best)
}

/// Kernel `K` with `K̂ = m`.
pub fn symbol_to_kernel(m: &SymbolGrid) -> TorusField {
    let f = TorusField::from_raw(m.shape, m.values.clone(), false);
    if f.hermitian_deviation() == 0.0 {
        f.real_part()
    } else {
        f
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioReport {
    pub check: BbCheck,
    pub s1linf: f64,
    pub ratio: f64,
}

/// `‖K‖_{S₁L^∞} / C`.
pub fn s1linf_ratio(m: &SymbolGrid, oversample: usize) -> Result<RatioReport> {
    let check = check_bb_symbol(m)?;
    let s1linf = norm_with(&symbol_to_kernel(m), &SpaceNorm::S1Linf, oversample)?;
    let ratio = if check.constant > 0.0 { s1linf / check.constant } else { 0.0 };
    Ok(RatioReport { check, s1linf, ratio })
}

/// Named symbols shipped with the toolkit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    /// `1/n` on `Z`.
    InvN,
    /// `n_1/|n|³` on `Z²`, `ℓ = 1`.
    N1OverCube,
    /// `n_1 n_2/|n|⁴` on `Z²`, `ℓ = 2`.
    N1N2OverQuartic,
}

impl Builtin {
    pub const ALL: [Builtin; 3] = [Builtin::InvN, Builtin::N1OverCube, Builtin::N1N2OverQuartic];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::InvN => "inv-n",
            Builtin::N1OverCube => "n1-over-cube",
            Builtin::N1N2OverQuartic => "n1n2-over-quartic",
        }
    }

    pub fn parse(s: &str) -> Option<Builtin> {
        Builtin::ALL.into_iter().find(|b| b.name() == s)
    }

    pub fn dim(self) -> usize {
        match self {
            Builtin::InvN => 1,
            _ => 2,
        }
    }

    pub fn ell(self) -> usize {
        match self {
            Builtin::N1N2OverQuartic => 2,
            _ => 1,
        }
    }

    pub fn grid(self, bandlimit: usize) -> Result<SymbolGrid> {
        let shape = Shape::try_new(self.dim(), bandlimit)?;
        let r = |n: &[i64]| n.iter().map(|&x| (x * x) as f64).sum::<f64>();
        let c = |x: f64| Complex64::new(x, 0.0);
        match self {
            Builtin::InvN => SymbolGrid::from_fn(shape, 1, |n| c(1.0 / n[0] as f64)),
            Builtin::N1OverCube => SymbolGrid::from_fn(shape, 1, |n| c(n[0] as f64 / r(n).powf(1.5))),
            Builtin::N1N2OverQuartic => {
                SymbolGrid::from_fn(shape, 2, |n| c((n[0] * n[1]) as f64 / r(n).powi(2)))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_examples() {
        let shape = Shape::new(1, 6);
        let m = Builtin::InvN.grid(6).unwrap();
        let dm = discrete_derivative(&m, 0).unwrap();
        for n in 1..6i64 {
            let want = -1.0 / (n * (n + 1)) as f64;
            assert!((dm.get(&[n]).unwrap().re - want).abs() <= 1e-15 * want.abs());
        }
        assert!(dm.get(&[6]).is_none());
        let lin = SymbolGrid::from_fn(shape, 1, |n| Complex64::new(n[0] as f64, 0.0)).unwrap();
        let d = discrete_derivative(&lin, 0).unwrap();
        assert!((-6..6).all(|n| d.get(&[n]).unwrap().re == 1.0));
    }

    #[test]
    fn inverse_n_has_unit_constant() {
        let c = check_bb_symbol(&Builtin::InvN.grid(64).unwrap()).unwrap();
        assert!((c.constant - 1.0).abs() < 1e-12);
        assert_eq!(c.at, vec![1]);
    }

    #[test]
    fn even_symbol_is_rejected() {
        let shape = Shape::new(1, 8);
        let m = SymbolGrid::from_fn(shape, 1, |n| Complex64::new(1.0 / (n[0].abs() as f64), 0.0)).unwrap();
        assert!(matches!(
            check_bb_symbol(&m),
            Err(Error::OddnessViolation { coordinate: 1, .. })
        ));
    }

    #[test]
    fn constant_is_homogeneous() {
        let m = Builtin::N1OverCube.grid(12).unwrap();
        let c = check_bb_symbol(&m).unwrap().constant;
        let c3 = check_bb_symbol(&m.scale(Complex64::new(-3.0, 0.0))).unwrap().constant;
        assert!((c3 - 3.0 * c).abs() < 1e-12 * c3);
    }

    #[test]
    fn shipped_family_ratios() {
        for b in Builtin::ALL {
            let r = s1linf_ratio(&b.grid(16).unwrap(), 2).unwrap();
            assert!(r.ratio.is_finite() && r.ratio > 0.0 && r.ratio <= 100.0, "{b:?} {r:?}");
        }
    }
}
