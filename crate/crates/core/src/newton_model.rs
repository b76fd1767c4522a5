use crate::error::{Error, Result};
use crate::linalg::{cond2, lu_solve, spd_solve};
use crate::sampling::SampleSet;
use crate::types::{Matrix, Vector};

/// Model Newton direction with the system it was solved from.
#[derive(Clone, Debug)]
pub struct NewtonModel {
    pub d: Vector,
    pub z: Matrix,
    pub rhs: Vector,
    pub cond_z: f64,
    pub since_restart: u64,
}

/// Scale diagnostics for the current sample geometry.
#[derive(Clone, Copy, Debug)]
pub struct Diagnostics {
    pub delta_y: f64,
    pub delta_z: f64,
    pub ry_norm: Option<f64>,
}

/// Largest displacement and product norms of the set.
pub fn diagnostics(x: &Vector, s: &SampleSet) -> Diagnostics {
    let delta_y = s.points.iter().map(|y| (y - x).norm()).fold(0.0, f64::max);
    let delta_z = s
        .zvecs
        .as_ref()
        .map(|zs| zs.iter().map(|z| z.norm()).fold(0.0, f64::max))
        .unwrap_or(0.0);
    Diagnostics { delta_y, delta_z, ry_norm: None }
}

/// Builds the direction conditions Z·d = rhs from stored products, where
/// rhs_ℓ = −f(y^ℓ) + f(x) + ½(y^ℓ−x)ᵀz^ℓ.
pub fn build_conditions(x: &Vector, f_x: f64, s: &SampleSet) -> Result<(Matrix, Vector)> {
    let zvecs = s
        .zvecs
        .as_ref()
        .ok_or_else(|| Error::EmptyInput("sample set has no stored products".into()))?;
    let p = s.len();
    let n = x.len();
    let mut z = Matrix::zeros(p, n);
    let mut rhs = Vector::zeros(p);
    for l in 0..p {
        let sl = &s.points[l] - x;
        z.row_mut(l).copy_from(&zvecs[l].transpose());
        rhs[l] = -s.fvals[l] + f_x + 0.5 * sl.dot(&zvecs[l]);
    }
    Ok((z, rhs))
}

/// Condition number of the row-scaled system (rows divided by the largest
/// product norm); infinite when every product vanishes.
pub fn scaled_cond(z: &Matrix) -> f64 {
    let dz = (0..z.nrows()).map(|l| z.row(l).norm()).fold(0.0, f64::max);
    if dz == 0.0 {
        return f64::INFINITY;
    }
    cond2(&(z / dz))
}

/// Solves Z·d = rhs: directly when square, otherwise as the feasible point
/// closest to `d_prev`.
pub fn solve_newton(z: &Matrix, rhs: &Vector, d_prev: &Vector) -> Result<Vector> {
    let (p, n) = (z.nrows(), z.ncols());
    if p > n {
        return Err(Error::DimensionMismatch(format!(
            "direction solve needs rows ≤ columns, got {p}x{n}"
        )));
    }
    if p == n {
        return lu_solve(z, rhs);
    }
    if d_prev.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "previous direction has length {}, system has {n} columns",
            d_prev.len()
        )));
    }
    let resid = rhs - z * d_prev;
    let gram = z * z.transpose();
    let mu = spd_solve(&gram, &resid)?;
    Ok(d_prev + z.transpose() * mu)
}

/// Transports a stored product across a step using the two gradients:
/// z ← z + ∇f(x_prev) − ∇f(x_cur). Exact on quadratics.
pub fn correct_z(z_prev: &Vector, grad_prev: &Vector, grad_cur: &Vector) -> Vector {
    z_prev + grad_prev - grad_cur
}

/// Whether the safeguard bends every direction or only descent-deficient ones.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SafeguardMode {
    Always,
    Deficit,
}

/// Bends `d_n` toward steepest descent until cos(d, −g) reaches `eta`.
///
/// In `Deficit` mode directions already inside the cone pass through unchanged.
/// Directions collinear with the gradient cannot reach the cone boundary, so an
/// ascent-collinear (or zero) input falls back to −g at the input's length.
pub fn descent_safeguard(
    d_n: &Vector,
    g: &Vector,
    eta: f64,
    mode: SafeguardMode,
) -> Result<Vector> {
    assert!(0.0 < eta && eta < 1.0, "eta must lie strictly inside (0, 1)");
    let gg = g.norm_squared();
    if gg == 0.0 {
        return Err(Error::ZeroGradient);
    }
    let dd = d_n.norm_squared();
    if dd == 0.0 {
        return Ok(-g.clone());
    }
    let a = -g.dot(d_n);
    let cos0 = a / (gg.sqrt() * dd.sqrt());
    if mode == SafeguardMode::Deficit && cos0 >= eta {
        return Ok(d_n.clone());
    }
    let disc = (gg * dd - a * a).max(0.0);
    if disc <= 1e-14 * gg * dd {
        // collinear with g: only cos = ±1 is attainable inside span{d, g}
        return Ok(if cos0 >= eta {
            d_n.clone()
        } else {
            -(dd / gg).sqrt() * g
        });
    }
    let beta = (-a + eta * (disc / (1.0 - eta * eta)).sqrt()) / gg;
    Ok(d_n - beta * g)
}

/// Restart test: ill-conditioned scaled system or a singular last solve.
pub fn maybe_restart(cond_z: f64, cond_limit: f64, last_solve_singular: bool) -> bool {
    last_solve_singular || !cond_z.is_finite() || cond_z >= cond_limit
}

/// Norm of the y-space reconstruction operator for the current geometry
/// (needs p ≥ n). Calls the supplied product oracle once per sample point;
/// these calls are diagnostic and not meant to hit run counters.
pub fn ry_diagnostic(
    x: &Vector,
    s: &SampleSet,
    hvp: impl Fn(&Vector) -> Vector,
) -> Result<f64> {
    let (p, n) = (s.len(), x.len());
    if p < n {
        return Err(Error::DimensionMismatch(format!(
            "reconstruction diagnostic needs p ≥ n, got p={p}, n={n}"
        )));
    }
    let disps: Vec<Vector> = s.points.iter().map(|y| y - x).collect();
    let dy = disps.iter().map(|d| d.norm()).fold(0.0, f64::max);
    if dy == 0.0 {
        return Err(Error::DegenerateGeometry(
            "all sample points coincide with the center".into(),
        ));
    }
    let mut b = Matrix::zeros(n, p);
    for (l, d) in disps.iter().enumerate() {
        b.set_column(l, &hvp(&(d / dy)));
    }
    let a = &b * b.transpose();
    let scale = a.amax();
    if scale == 0.0 {
        return Err(Error::SingularMatrix);
    }
    let lu = a.lu();
    let u = lu.u();
    for i in 0..u.nrows() {
        if u[(i, i)].abs() < 1e-14 * scale {
            return Err(Error::SingularMatrix);
        }
    }
    let r = lu.solve(&b).ok_or(Error::SingularMatrix)?;
    let smax = r
        .singular_values()
        .iter()
        .cloned()
        .fold(0.0, f64::max);
    Ok(smax)
}
