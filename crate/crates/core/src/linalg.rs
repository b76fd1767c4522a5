use nalgebra::Cholesky;

use crate::error::{Error, Result};
use crate::types::{Matrix, Vector};

/// Relative pivot threshold below which a factorization is declared singular.
const PIVOT_REL_TOL: f64 = 1e-14;

/// Solves Ax = b by LU with partial pivoting. Declares the matrix singular
/// when any pivot falls below 1e-14·max|A|, rather than returning a wildly
/// amplified solution.
pub fn lu_solve(a: &Matrix, b: &Vector) -> Result<Vector> {
    debug_assert_eq!(a.nrows(), a.ncols());
    debug_assert_eq!(a.nrows(), b.len());
    let scale = a.amax();
    if a.nrows() == 0 {
        return Ok(Vector::zeros(0));
    }
    if scale == 0.0 {
        return Err(Error::SingularMatrix);
    }
    let lu = a.clone().lu();
    let u = lu.u();
    for i in 0..u.nrows().min(u.ncols()) {
        if u[(i, i)].abs() < PIVOT_REL_TOL * scale {
            return Err(Error::SingularMatrix);
        }
    }
    lu.solve(b).ok_or(Error::SingularMatrix)
}

/// Solves a symmetric system, trying Cholesky first and falling back to LU
/// when the matrix is not positive definite (Gram matrices of degenerate
/// geometry can be semidefinite).
pub fn spd_solve(a: &Matrix, b: &Vector) -> Result<Vector> {
    match Cholesky::new(a.clone()) {
        Some(chol) => Ok(chol.solve(b)),
        None => lu_solve(a, b),
    }
}

/// 2-norm condition number σ_max/σ_min via singular values; ∞ when the
/// smallest singular value underflows to zero.
pub fn cond2(a: &Matrix) -> f64 {
    assert!(a.nrows() > 0 && a.ncols() > 0, "cond2 of empty matrix");
    let sv = a.clone().singular_values();
    let max = sv.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use approx::assert_relative_eq;

    #[test]
    fn identity_solve() {
        let a = Matrix::identity(3, 3);
        let b = Vector::from_vec(vec![1.0, 2.0, 3.0]);
        assert_eq!(lu_solve(&a, &b).unwrap(), b);
    }

    #[test]
    fn small_dense_solve() {
        let a = Matrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]);
        let b = Vector::from_vec(vec![3.0, 4.0]);
        let x = lu_solve(&a, &b).unwrap();
        assert_relative_eq!(x[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(x[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn rank_deficient_is_rejected() {
        let a = Matrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let b = Vector::from_vec(vec![1.0, 2.0]);
        assert_eq!(lu_solve(&a, &b), Err(Error::SingularMatrix));
        assert_eq!(spd_solve(&a, &b), Err(Error::SingularMatrix));
    }

    #[test]
    fn spd_solve_scaled_identity() {
        let a = Matrix::identity(2, 2) * 4.0;
        let b = Vector::from_vec(vec![8.0, 4.0]);
        let x = spd_solve(&a, &b).unwrap();
        assert_relative_eq!(x[0], 2.0, epsilon = 1e-14);
        assert_relative_eq!(x[1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn spd_solve_small_symmetric() {
        let a = Matrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let b = Vector::from_vec(vec![3.0, 3.0]);
        let x = spd_solve(&a, &b).unwrap();
        assert_relative_eq!(x[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(x[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn spd_and_lu_agree_on_random_gram_matrices() {
        let mut rng = RngStream::new(5);
        for n in [2usize, 5, 10] {
            let g = Matrix::from_fn(n, n, |_, _| rng.normal());
            let a = &g * g.transpose() + Matrix::identity(n, n);
            let b = Vector::from_fn(n, |_, _| rng.normal());
            let x1 = spd_solve(&a, &b).unwrap();
            let x2 = lu_solve(&a, &b).unwrap();
            assert!((&x1 - &x2).norm() <= 1e-8 * x1.norm().max(1.0));
        }
    }

    #[test]
    fn residual_is_small_on_well_conditioned_systems() {
        let mut rng = RngStream::new(6);
        for _ in 0..20 {
            let n = 8;
            let a = Matrix::from_fn(n, n, |_, _| rng.normal()) + Matrix::identity(n, n) * 3.0;
            let b = Vector::from_fn(n, |_, _| rng.normal());
            let x = lu_solve(&a, &b).unwrap();
            let res = (&a * &x - &b).norm();
            assert!(res <= 1e-10 * (a.norm() * x.norm() + b.norm()));
        }
    }

    #[test]
    fn condition_numbers_of_diagonal_matrices() {
        assert_relative_eq!(cond2(&Matrix::identity(3, 3)), 1.0, epsilon = 1e-12);
        let d = Matrix::from_diagonal(&Vector::from_vec(vec![10.0, 1.0]));
        assert_relative_eq!(cond2(&d), 10.0, epsilon = 1e-9);
        let near_singular = Matrix::from_diagonal(&Vector::from_vec(vec![1.0, 1e-9]));
        assert!(cond2(&near_singular) >= 1e8);
    }

    #[test]
    fn cond2_is_rotation_invariant() {
        // cond2(Q·D·Vᵀ) = cond2(D) for orthogonal Q, V; build the orthogonal
        // factors from QR of random matrices.
        let mut rng = RngStream::new(9);
        let n = 6;
        let d = Matrix::from_diagonal(&Vector::from_fn(n, |i, _| 1.0 + 3.0 * i as f64));
        let q = Matrix::from_fn(n, n, |_, _| rng.normal()).qr().q();
        let v = Matrix::from_fn(n, n, |_, _| rng.normal()).qr().q();
        let a = &q * &d * v.transpose();
        assert_relative_eq!(cond2(&a), cond2(&d), max_relative = 1e-3);
    }
}
