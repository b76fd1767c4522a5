use nalgebra::{DMatrix, DVector};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Structural nonzeros of a symmetric matrix, stored as upper-triangle index
/// pairs (i, j) with i ≤ j, diagonal included. Entries absent from the set
/// are identically zero for every x.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsityPattern {
    n: usize,
    upper: Vec<(usize, usize)>,
}

impl SparsityPattern {
    /// Builds a pattern from upper-triangle pairs; pairs are normalized,
    /// deduplicated, and sorted so equal patterns compare equal.
    pub fn new(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut upper: Vec<(usize, usize)> = pairs
            .into_iter()
            .map(|(i, j)| if i <= j { (i, j) } else { (j, i) })
            .collect();
        upper.sort_unstable();
        upper.dedup();
        assert!(upper.iter().all(|&(_, j)| j < n), "pattern index out of range");
        Self { n, upper }
    }

    pub fn diagonal(n: usize) -> Self {
        Self::new(n, (0..n).map(|i| (i, i)))
    }

    pub fn tridiagonal(n: usize) -> Self {
        Self::new(n, (0..n).map(|i| (i, i)).chain((0..n - 1).map(|i| (i, i + 1))))
    }

    /// Diagonal plus a full first column: every variable couples with x₁.
    pub fn arrowhead_first(n: usize) -> Self {
        Self::new(n, (0..n).map(|i| (i, i)).chain((1..n).map(|j| (0, j))))
    }

    /// Diagonal plus a full last column: every variable couples with xₙ.
    pub fn arrowhead_last(n: usize) -> Self {
        Self::new(n, (0..n).map(|i| (i, i)).chain((0..n - 1).map(|i| (i, n - 1))))
    }

    /// Independent 2×2 blocks over consecutive variable pairs.
    pub fn paired_blocks(n: usize) -> Self {
        assert!(n % 2 == 0);
        Self::new(n, (0..n).map(|i| (i, i)).chain((0..n / 2).map(|k| (2 * k, 2 * k + 1))))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of structural nonzeros in the upper triangle, diagonal included.
    pub fn nnz(&self) -> usize {
        self.upper.len()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.upper
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        let key = if i <= j { (i, j) } else { (j, i) };
        self.upper.binary_search(&key).is_ok()
    }
}

/// Length of the coefficient vector of a symmetric n×n matrix.
pub fn alpha_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Index pairs addressed by each coefficient slot: the n diagonal entries
/// first, then off-diagonals (i, j) with i < j in row-major order.
pub fn alpha_pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).map(|i| (i, i)).chain((0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j))))
}

/// Expands a coefficient vector into the symmetric matrix it parameterizes.
pub fn sym_from_alpha(alpha: &[f64], n: usize) -> Matrix {
    assert_eq!(alpha.len(), alpha_len(n), "coefficient vector has wrong length");
    let mut h = Matrix::zeros(n, n);
    for (c, (i, j)) in alpha_pairs(n).enumerate() {
        h[(i, j)] = alpha[c];
        h[(j, i)] = alpha[c];
    }
    h
}

/// Reads the coefficient vector back out of a symmetric matrix; inverse of
/// [`sym_from_alpha`].
pub fn alpha_from_sym(h: &Matrix) -> Vec<f64> {
    assert_eq!(h.nrows(), h.ncols(), "matrix must be square");
    alpha_pairs(h.nrows()).map(|(i, j)| h[(i, j)]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficient_layout_on_two_by_two() {
        let h = sym_from_alpha(&[2.0, 3.0, 1.0], 2);
        assert_eq!(h, Matrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]));
    }

    #[test]
    fn identity_coefficients() {
        let h = Matrix::identity(2, 2);
        assert_eq!(alpha_from_sym(&h), vec![1.0, 1.0, 0.0]);
    }

    #[test]
    fn round_trip_is_exact() {
        let mut rng = crate::rng::RngStream::new(11);
        for n in 1..=8 {
            let alpha: Vec<f64> = (0..alpha_len(n)).map(|_| rng.normal()).collect();
            let back = alpha_from_sym(&sym_from_alpha(&alpha, n));
            assert_eq!(alpha, back);
        }
    }

    #[test]
    fn tridiagonal_pattern_counts() {
        let p = SparsityPattern::tridiagonal(10);
        assert_eq!(p.nnz(), 19);
        assert!(p.contains(3, 4) && p.contains(4, 3) && !p.contains(3, 5));
    }

    #[test]
    fn pattern_constructors_normalize_order() {
        let a = SparsityPattern::new(3, [(2, 0), (1, 1), (0, 2)]);
        let b = SparsityPattern::new(3, [(0, 2), (1, 1)]);
        assert_eq!(a, b);
    }
}
