use crate::error::{Error, Result};
use crate::linalg::{lu_solve, spd_solve};
use crate::sampling::line_angle;
use crate::types::{alpha_pairs, Matrix, SparsityPattern, Vector};

/// How a model Hessian was recovered.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelMode {
    Determined,
    LeastChange,
    SparseDetermined,
}

/// Stacked interpolation and Hessian-product conditions M·α = δ.
#[derive(Clone, Debug)]
pub struct EnrichedSystem {
    pub m: Matrix,
    pub delta: Vector,
    pub n: usize,
    pub columns: Vec<(usize, usize)>,
    pub sparse: bool,
}

/// Symmetric model Hessian together with its packed coefficients.
#[derive(Clone, Debug)]
pub struct HessianModel {
    pub h: Matrix,
    pub alpha: Vec<f64>,
    pub mode: ModelMode,
}

/// Ordered unknown entries (i ≤ j) for a dense or pattern-restricted model.
pub fn model_columns(n: usize, pattern: Option<&SparsityPattern>) -> Vec<(usize, usize)> {
    match pattern {
        None => alpha_pairs(n).collect(),
        Some(p) => alpha_pairs(n).filter(|&(i, j)| p.contains(i, j)).collect(),
    }
}

/// Builds the enriched system from sample values plus one Hessian-vector pair.
///
/// Errors with `DegenerateGeometry` when `v` lies within 1e-6 radians of some
/// displacement y − x, which would make the product rows linearly dependent on
/// the interpolation rows.
#[allow(clippy::too_many_arguments)]
pub fn assemble(
    x: &Vector,
    grad_x: &Vector,
    f_x: f64,
    points: &[Vector],
    fvals: &[f64],
    v: &Vector,
    w: &Vector,
    pattern: Option<&SparsityPattern>,
) -> Result<EnrichedSystem> {
    for y in points {
        let s = y - x;
        if line_angle(v, &s) < 1e-6 {
            return Err(Error::DegenerateGeometry(
                "product direction is parallel to a sample displacement".into(),
            ));
        }
    }
    Ok(assemble_unchecked(x, grad_x, f_x, points, fvals, v, w, pattern))
}

#[allow(clippy::too_many_arguments)]
fn assemble_unchecked(
    x: &Vector,
    grad_x: &Vector,
    f_x: f64,
    points: &[Vector],
    fvals: &[f64],
    v: &Vector,
    w: &Vector,
    pattern: Option<&SparsityPattern>,
) -> EnrichedSystem {
    let n = x.len();
    let p = points.len();
    assert_eq!(fvals.len(), p);
    assert_eq!(v.len(), n);
    assert_eq!(w.len(), n);

    let columns = model_columns(n, pattern);
    let mut m = Matrix::zeros(p + n, columns.len());
    let mut delta = Vector::zeros(p + n);

    for (l, y) in points.iter().enumerate() {
        let s = y - x;
        for (c, &(i, j)) in columns.iter().enumerate() {
            m[(l, c)] = if i == j { 0.5 * s[i] * s[i] } else { s[i] * s[j] };
        }
        delta[l] = fvals[l] - f_x - grad_x.dot(&s);
    }
    // (Hv)_k = h_kk v_k + Σ_{j≠k} h_kj v_j, one row per output coordinate
    for (c, &(i, j)) in columns.iter().enumerate() {
        if i == j {
            m[(p + i, c)] = v[i];
        } else {
            m[(p + i, c)] += v[j];
            m[(p + j, c)] += v[i];
        }
    }
    for k in 0..n {
        delta[p + k] = w[k];
    }
    EnrichedSystem { m, delta, n, columns, sparse: pattern.is_some() }
}

fn model_from_alpha(sys: &EnrichedSystem, alpha: Vec<f64>, mode: ModelMode) -> HessianModel {
    let mut h = Matrix::zeros(sys.n, sys.n);
    for (c, &(i, j)) in sys.columns.iter().enumerate() {
        h[(i, j)] = alpha[c];
        h[(j, i)] = alpha[c];
    }
    HessianModel { h, alpha, mode }
}

/// Solves a square enriched system directly.
pub fn solve_determined(sys: &EnrichedSystem) -> Result<HessianModel> {
    if sys.m.nrows() != sys.m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "determined solve needs a square system, got {}x{}",
            sys.m.nrows(),
            sys.m.ncols()
        )));
    }
    let alpha = lu_solve(&sys.m, &sys.delta)?;
    let mode = if sys.sparse { ModelMode::SparseDetermined } else { ModelMode::Determined };
    Ok(model_from_alpha(sys, alpha.iter().copied().collect(), mode))
}

/// Minimum-change solve: among all α with Mα = δ, returns the one closest to
/// `alpha_prev`, via the normal equations of the equality-constrained projection.
pub fn solve_least_change(sys: &EnrichedSystem, alpha_prev: &[f64]) -> Result<HessianModel> {
    let ncols = sys.m.ncols();
    if alpha_prev.len() != ncols {
        return Err(Error::DimensionMismatch(format!(
            "previous coefficients have length {}, system has {} columns",
            alpha_prev.len(),
            ncols
        )));
    }
    if sys.m.nrows() > ncols {
        return Err(Error::DimensionMismatch(format!(
            "least-change solve needs rows ≤ columns, got {}x{}",
            sys.m.nrows(),
            ncols
        )));
    }
    let ap = Vector::from_column_slice(alpha_prev);
    let resid = &sys.delta - &sys.m * &ap;
    let gram = &sys.m * sys.m.transpose();
    let lambda = spd_solve(&gram, &resid)?;
    let alpha = ap + sys.m.transpose() * lambda;
    Ok(model_from_alpha(sys, alpha.iter().copied().collect(), ModelMode::LeastChange))
}
