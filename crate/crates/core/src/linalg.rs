//! Small dense helpers with a fixed summation order.
//!
//! Matrices are `ndarray::Array2<f64>` indexed `(row, col)`. All products
//! here loop in index order so that results are bit-reproducible.

use ndarray::Array2;

/// Positive vector stored as `mantissa * exp(log_scale)` with
/// `max(mantissa) == 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogVec {
    pub mantissa: Vec<f64>,
    pub log_scale: f64,
}

impl LogVec {
    /// The all-ones vector, scale 0.
    pub fn ones(len: usize) -> Self {
        LogVec {
            mantissa: vec![1.0; len],
            log_scale: 0.0,
        }
    }

    /// Renormalizes `raw` so its largest entry is 1, folding the factor into
    /// `log_scale`. Returns `None` when `raw` has no positive entry.
    pub fn from_raw(raw: Vec<f64>, log_scale: f64) -> Option<Self> {
        let max = raw.iter().cloned().fold(0.0_f64, f64::max);
        if !(max > 0.0) || !max.is_finite() {
            return None;
        }
        let mantissa = raw.into_iter().map(|x| x / max).collect();
        Some(LogVec {
            mantissa,
            log_scale: log_scale + max.ln(),
        })
    }

    pub fn len(&self) -> usize {
        self.mantissa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mantissa.is_empty()
    }

    /// `ln` of entry `i`.
    pub fn ln_at(&self, i: usize) -> f64 {
        self.mantissa[i].ln() + self.log_scale
    }

    /// Entry `i` as a plain float. May overflow or underflow for deep levels.
    pub fn value(&self, i: usize) -> f64 {
        (self.ln_at(i)).exp()
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.value(i)).collect()
    }
}

/// `a * x`.
pub fn mat_vec(a: &Array2<f64>, x: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.ncols(), x.len());
    a.rows()
        .into_iter()
        .map(|row| {
            let mut s = 0.0;
            for (aij, xj) in row.iter().zip(x) {
                s += aij * xj;
            }
            s
        })
        .collect()
}

/// `a^T * y`.
pub fn mat_t_vec(a: &Array2<f64>, y: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.nrows(), y.len());
    let mut out = vec![0.0; a.ncols()];
    for (row, yi) in a.rows().into_iter().zip(y) {
        for (o, aij) in out.iter_mut().zip(row.iter()) {
            *o += aij * yi;
        }
    }
    out
}

/// `a * b` with the inner index summed in order.
pub fn mat_mul(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    assert_eq!(a.ncols(), b.nrows());
    let mut out = Array2::zeros((a.nrows(), b.ncols()));
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            let aik = a[(i, k)];
            if aik == 0.0 {
                continue;
            }
            for j in 0..b.ncols() {
                out[(i, j)] += aik * b[(k, j)];
            }
        }
    }
    out
}

/// Boolean product on supports.
pub fn bool_mul(a: &Array2<bool>, b: &Array2<bool>) -> Array2<bool> {
    assert_eq!(a.ncols(), b.nrows());
    let mut out = Array2::from_elem((a.nrows(), b.ncols()), false);
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            if !a[(i, k)] {
                continue;
            }
            for j in 0..b.ncols() {
                if b[(k, j)] {
                    out[(i, j)] = true;
                }
            }
        }
    }
    out
}

/// `a^p` for a square matrix, `p >= 1`.
pub fn mat_pow(a: &Array2<f64>, p: usize) -> Array2<f64> {
    assert!(p >= 1);
    let mut out = a.clone();
    for _ in 1..p {
        out = mat_mul(&out, a);
    }
    out
}

pub fn l1_distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum()
}

pub fn max_abs_diff(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn logvec_roundtrip() {
        let v = LogVec::from_raw(vec![2.0, 8.0, 4.0], 1.0).unwrap();
        assert_eq!(v.mantissa, vec![0.25, 1.0, 0.5]);
        assert!((v.value(1) - 8.0 * 1f64.exp()).abs() < 1e-12);
        assert!(LogVec::from_raw(vec![0.0, 0.0], 0.0).is_none());
    }

    #[test]
    fn products() {
        let a = array![[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]];
        assert_eq!(mat_vec(&a, &[1.0, 1.0]), vec![3.0, 7.0, 11.0]);
        assert_eq!(mat_t_vec(&a, &[1.0, 0.0, 1.0]), vec![6.0, 8.0]);
        let sq = array![[1.0, 1.0], [1.0, 0.0]];
        assert_eq!(mat_pow(&sq, 5), array![[8.0, 5.0], [5.0, 3.0]]);
    }
}
