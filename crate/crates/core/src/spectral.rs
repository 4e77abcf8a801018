//! Perron-Frobenius data of primitive nonnegative matrices.
//!
//! The stationary sequence `A, A, A, ...` has a unique state when `A` is
//! primitive; that state is `λ^{-n} μ` where `A^T μ = λ μ`. Normalized power
//! iteration on `A^T` computes it, and the contraction coefficient of `A^L`
//! (with `A^L > 0`) certifies the geometric rate.

use ndarray::Array2;
use serde::Serialize;

use crate::contraction::ratio_bound;
use crate::error::{invalid, Error, Result};
use crate::linalg::{bool_mul, mat_pow, mat_t_vec};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerronResult {
    pub lambda: f64,
    /// Probability vector `μ` with `A^T μ = λ μ`.
    pub left_vector: Vec<f64>,
    /// `‖A^T μ - λ μ‖_1` for the returned pair.
    pub residual: f64,
    pub iterations: usize,
    /// Smallest `L` with `A^L > 0`.
    pub exponent: usize,
    /// `1 - min(A^L) / max(A^L)`: variation contraction per `L` steps.
    pub contraction_bound: f64,
    pub converged: bool,
}

fn check_square_nonnegative(a: &Array2<f64>) -> Result<()> {
    if a.nrows() != a.ncols() || a.is_empty() {
        return Err(invalid(format!("matrix must be square and nonempty, got {:?}", a.dim())));
    }
    if let Some(x) = a.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
        return Err(invalid(format!("entry {x} is negative or not finite")));
    }
    for (i, row) in a.rows().into_iter().enumerate() {
        if row.iter().all(|x| *x == 0.0) {
            return Err(invalid(format!("row {i} is zero")));
        }
    }
    for (j, col) in a.columns().into_iter().enumerate() {
        if col.iter().all(|x| *x == 0.0) {
            return Err(invalid(format!("column {j} is zero")));
        }
    }
    Ok(())
}

/// Smallest `L <= (dim-1)^2 + 1` with `A^L` entrywise positive, or `None`
/// when `A` is not primitive.
pub fn primitivity_exponent(a: &Array2<f64>) -> Result<Option<usize>> {
    check_square_nonnegative(a)?;
    let n = a.nrows();
    let support = a.mapv(|x| x > 0.0);
    let wielandt = (n - 1) * (n - 1) + 1;
    let mut power = support.clone();
    for l in 1..=wielandt {
        if power.iter().all(|&b| b) {
            return Ok(Some(l));
        }
        power = bool_mul(&power, &support);
    }
    Ok(None)
}

/// Power iteration from the uniform vector.
pub fn perron(a: &Array2<f64>, tol: f64, max_iter: usize) -> Result<PerronResult> {
    let start = vec![1.0; a.nrows().max(1)];
    perron_from(a, &start, tol, max_iter)
}

/// Power iteration on `A^T` from a strictly positive `start`. Each step
/// computes `y = A^T μ`, takes `λ = Σ y` and stops once `‖y - λ μ‖_1 <= tol`;
/// otherwise `μ <- y / λ`.
pub fn perron_from(a: &Array2<f64>, start: &[f64], tol: f64, max_iter: usize) -> Result<PerronResult> {
    let exponent = primitivity_exponent(a)?
        .ok_or_else(|| Error::Unsupported("matrix is not primitive".into()))?;
    if start.len() != a.nrows() {
        return Err(invalid(format!("start vector has length {}, expected {}", start.len(), a.nrows())));
    }
    if let Some(x) = start.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
        return Err(invalid(format!("start entry {x} is not strictly positive")));
    }
    let contraction_bound = 1.0 - ratio_bound(&mat_pow(a, exponent))?;

    let total: f64 = start.iter().sum();
    let mut mu: Vec<f64> = start.iter().map(|x| x / total).collect();
    let mut iterations = 0;
    loop {
        let y = mat_t_vec(a, &mu);
        let lambda: f64 = y.iter().sum();
        let residual: f64 = y.iter().zip(&mu).map(|(yi, mi)| (yi - lambda * mi).abs()).sum();
        if residual <= tol || iterations >= max_iter {
            return Ok(PerronResult {
                lambda,
                left_vector: mu,
                residual,
                iterations,
                exponent,
                contraction_bound,
                converged: residual <= tol,
            });
        }
        mu = y.into_iter().map(|x| x / lambda).collect();
        iterations += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::array;

    #[test]
    fn exponent_examples() {
        assert_eq!(primitivity_exponent(&array![[1.0, 2.0], [3.0, 4.0]]).unwrap(), Some(1));
        assert_eq!(primitivity_exponent(&array![[1.0, 1.0], [1.0, 0.0]]).unwrap(), Some(2));
        assert_eq!(primitivity_exponent(&array![[0.0, 1.0], [1.0, 0.0]]).unwrap(), None);
        assert!(primitivity_exponent(&array![[1.0, 0.0], [1.0, 0.0]]).is_err());
        assert!(primitivity_exponent(&array![[1.0, 1.0], [0.0, 0.0]]).is_err());
    }

    #[test]
    fn wielandt_matrix_attains_bound() {
        // cycle 0->1->...->n-1->0 plus the chord n-1 -> 1
        let n = 5;
        let mut a = Array2::zeros((n, n));
        for i in 0..n {
            a[(i, (i + 1) % n)] = 1.0;
        }
        a[(n - 1, 1)] = 1.0;
        assert_eq!(primitivity_exponent(&a).unwrap(), Some((n - 1) * (n - 1) + 1));
    }

    #[test]
    fn perron_examples() {
        let r = perron(&array![[2.0]], 1e-12, 10).unwrap();
        assert_eq!((r.lambda, r.left_vector.clone()), (2.0, vec![1.0]));
        assert!(r.converged);

        let fib = perron(&array![[1.0, 1.0], [1.0, 0.0]], 1e-12, 1000).unwrap();
        assert_relative_eq!(fib.lambda, (1.0 + 5f64.sqrt()) / 2.0, epsilon = 1e-10);
        assert_eq!(fib.exponent, 2);
        assert!(fib.residual <= 1e-12);

        let (p, q) = (5.0, 2.0);
        let sym = perron(&array![[p, q], [q, p]], 1e-13, 100).unwrap();
        assert_relative_eq!(sym.lambda, p + q, epsilon = 1e-12);
        assert_relative_eq!(sym.left_vector[0], 0.5, epsilon = 1e-13);
    }

    #[test]
    fn rejects_periodic() {
        assert!(matches!(
            perron(&array![[0.0, 1.0], [1.0, 0.0]], 1e-10, 100),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn reports_nonconvergence() {
        let r = perron(&array![[1.0, 1.0], [1.0, 0.0]], 0.0, 3).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 3);
    }
}
