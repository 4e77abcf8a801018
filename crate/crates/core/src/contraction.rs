//! The variation seminorm and how Markovian matrices contract it.
//!
//! For a row-stochastic `b: J x I` the contraction coefficient is
//!
//! ```text
//! ε = min over j, j' in J and I_1 ⊆ I of  Σ_{i∈I_1} b(j,i) + Σ_{i∉I_1} b(j',i)
//! ```
//!
//! and `var(Bf) <= (1 - ε) var(f)`. For fixed `(j, j')` the subset minimum is
//! attained by putting `i` in `I_1` exactly when `b(j,i) <= b(j',i)`, so
//! `ε = min_{j,j'} Σ_i min(b(j,i), b(j',i))`.

use ndarray::Array2;

use crate::error::{invalid, Error, Result};

/// Absolute row-sum tolerance for Markovian matrices.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// Largest column count accepted by [`contraction_epsilon_bruteforce`].
pub const BRUTEFORCE_MAX_COLS: usize = 16;

/// A nonnegative matrix whose rows sum to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovianMatrix(Array2<f64>);

impl MarkovianMatrix {
    /// Rejects negative or non-finite entries and rows whose sum is off by
    /// more than [`ROW_SUM_TOL`]. Rows are not renormalized.
    pub fn new(b: Array2<f64>) -> Result<Self> {
        if b.nrows() == 0 || b.ncols() == 0 {
            return Err(invalid("Markovian matrix must be nonempty"));
        }
        for (j, row) in b.rows().into_iter().enumerate() {
            if let Some(x) = row.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
                return Err(invalid(format!("row {j} has entry {x}")));
            }
            let s: f64 = row.sum();
            if (s - 1.0).abs() > ROW_SUM_TOL {
                return Err(invalid(format!("row {j} sums to {s:.17}")));
            }
        }
        Ok(MarkovianMatrix(b))
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.0
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.0
    }

    /// `Bf`.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        crate::linalg::mat_vec(&self.0, f)
    }
}

/// `max f - min f`.
pub fn variation(f: &[f64]) -> Result<f64> {
    let (first, rest) = f
        .split_first()
        .ok_or_else(|| invalid("variation of an empty vector"))?;
    let (lo, hi) = rest
        .iter()
        .fold((*first, *first), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    Ok(hi - lo)
}

/// Dobrushin coefficient, `min_{j,j'} Σ_i min(b(j,i), b(j',i))`.
pub fn contraction_epsilon(b: &MarkovianMatrix) -> f64 {
    let b = &b.0;
    let mut eps = f64::INFINITY;
    for j in 0..b.nrows() {
        for k in 0..b.nrows() {
            let mut s = 0.0;
            for i in 0..b.ncols() {
                s += b[(j, i)].min(b[(k, i)]);
            }
            eps = eps.min(s);
        }
    }
    eps
}

/// The subset minimum taken literally over all `2^|I|` subsets and all row
/// pairs. Test oracle for [`contraction_epsilon`]; the summation visits `i`
/// in order so both routes add identical operands.
pub fn contraction_epsilon_bruteforce(b: &MarkovianMatrix) -> Result<f64> {
    let b = &b.0;
    let cols = b.ncols();
    if cols > BRUTEFORCE_MAX_COLS {
        return Err(Error::Capacity {
            what: "subset enumeration columns",
            count: cols as u128,
            cap: BRUTEFORCE_MAX_COLS as u128,
        });
    }
    let mut eps = f64::INFINITY;
    for j in 0..b.nrows() {
        for k in 0..b.nrows() {
            for subset in 0u32..(1u32 << cols) {
                let mut s = 0.0;
                for i in 0..cols {
                    s += if subset & (1 << i) != 0 { b[(j, i)] } else { b[(k, i)] };
                }
                eps = eps.min(s);
            }
        }
    }
    Ok(eps)
}

/// `ε > 0`, i.e. no two rows of `b` have disjoint supports.
pub fn is_strictly_contracting(b: &MarkovianMatrix) -> bool {
    contraction_epsilon(b) > 0.0
}

/// `a_min / a_max` over all entries of a strictly positive matrix.
///
/// Lower bound for [`contraction_epsilon`] of `markovianize(a, u)` for any
/// strictly positive `u`.
pub fn ratio_bound(a: &Array2<f64>) -> Result<f64> {
    if a.is_empty() {
        return Err(invalid("empty matrix"));
    }
    if let Some(x) = a.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
        return Err(invalid(format!("entry {x} is not strictly positive")));
    }
    let min = a.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = a.iter().cloned().fold(0.0, f64::max);
    Ok(min / max)
}

/// `b(j,i) = (Au)(j)^{-1} a(j,i) u(i)` for a strongly positive `a` (no zero
/// row) and strictly positive `u`.
pub fn markovianize(a: &Array2<f64>, u: &[f64]) -> Result<MarkovianMatrix> {
    if a.ncols() != u.len() {
        return Err(invalid(format!("{} columns but scaling vector of length {}", a.ncols(), u.len())));
    }
    if let Some(x) = u.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
        return Err(invalid(format!("scaling entry {x} is not strictly positive")));
    }
    let mut b = Array2::zeros(a.dim());
    for j in 0..a.nrows() {
        let mut mass = 0.0;
        for i in 0..a.ncols() {
            mass += a[(j, i)] * u[i];
        }
        if !(mass > 0.0) {
            return Err(invalid(format!("row {j} is zero; matrix is not strongly positive")));
        }
        for i in 0..a.ncols() {
            b[(j, i)] = a[(j, i)] * u[i] / mass;
        }
    }
    MarkovianMatrix::new(b)
}
