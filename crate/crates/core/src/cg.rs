use crate::types::Vector;

/// Why the conjugate-gradient loop stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CgExit {
    Converged,
    NegativeCurvature,
    MaxIter,
}

/// Truncated-CG output: the step plus how much work it took.
#[derive(Clone, Debug)]
pub struct CgResult {
    pub d: Vector,
    pub iters: u64,
    pub exit: CgExit,
}

/// Residual-based forcing term min(0.5, √‖g‖).
pub fn forcing_term(grad_norm: f64) -> f64 {
    grad_norm.sqrt().min(0.5)
}

/// How the per-iteration CG tolerance is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ForceRule {
    Sqrt,
    Const(f64),
}

impl ForceRule {
    pub fn value(&self, grad_norm: f64) -> f64 {
        match self {
            ForceRule::Sqrt => forcing_term(grad_norm),
            ForceRule::Const(c) => *c,
        }
    }
}

/// Truncated conjugate gradients on A·d = −g, stopping at ‖r‖ ≤ force·‖g‖.
///
/// Nonpositive curvature on the first direction returns −g; later it returns
/// the current iterate. Each iteration applies the operator exactly once, and
/// the result is a descent direction whenever g ≠ 0.
pub fn truncated_cg(
    mut apply_a: impl FnMut(&Vector) -> Vector,
    g: &Vector,
    force: f64,
    max_iter: u64,
) -> CgResult {
    let n = g.len();
    let mut d = Vector::zeros(n);
    let mut r = -g;
    let mut p = r.clone();
    let target = force * g.norm();
    let mut rr = r.norm_squared();
    let mut iters = 0u64;
    loop {
        if iters >= max_iter {
            return CgResult { d, iters, exit: CgExit::MaxIter };
        }
        let ap = apply_a(&p);
        iters += 1;
        let curv = p.dot(&ap);
        if curv <= 0.0 {
            let d = if iters == 1 { -g } else { d };
            return CgResult { d, iters, exit: CgExit::NegativeCurvature };
        }
        let alpha = rr / curv;
        d += alpha * &p;
        r -= alpha * &ap;
        let rr_new = r.norm_squared();
        if rr_new.sqrt() <= target {
            return CgResult { d, iters, exit: CgExit::Converged };
        }
        p = &r + (rr_new / rr) * p;
        rr = rr_new;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::lu_solve;
    use crate::rng::{unit_ball_sample, RngStream};
    use crate::types::Matrix;
    use approx::assert_relative_eq;

    #[test]
    fn identity_system_converges_in_one_application() {
        let g = Vector::from_vec(vec![3.0, 4.0]);
        let res = truncated_cg(|v| v.clone(), &g, 1e-8, 2);
        assert_eq!(res.iters, 1);
        assert_eq!(res.exit, CgExit::Converged);
        assert_relative_eq!(res.d[0], -3.0);
        assert_relative_eq!(res.d[1], -4.0);
    }

    #[test]
    fn immediate_negative_curvature_returns_steepest_descent() {
        let g = Vector::from_vec(vec![3.0, 4.0]);
        let res = truncated_cg(|v| -v.clone(), &g, 1e-8, 2);
        assert_eq!(res.exit, CgExit::NegativeCurvature);
        assert_eq!(res.iters, 1);
        assert_eq!(res.d, -&g);
    }

    #[test]
    fn diagonal_system_is_solved_exactly_in_two_iterations() {
        let a = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 10.0]);
        let g = Vector::from_vec(vec![1.0, 1.0]);
        let res = truncated_cg(|v| &a * v, &g, 1e-10, 2);
        assert!(res.iters <= 2);
        let want = -lu_solve(&a, &g).unwrap();
        assert!((&res.d - &want).norm() <= 1e-8 * want.norm());
    }

    #[test]
    fn tight_forcing_matches_the_direct_solve() {
        // rounding breaks exact termination at iteration n, so the accuracy
        // check lets the loop run past it
        let mut rng = RngStream::new(88);
        for n in [2usize, 7, 18, 30] {
            let gmat = Matrix::from_fn(n, n, |_, _| rng.normal());
            let a = &gmat * gmat.transpose() + Matrix::identity(n, n);
            let g = unit_ball_sample(&mut rng, n) + Vector::repeat(n, 0.1);
            let res = truncated_cg(|v| &a * v, &g, 1e-12, 10 * n as u64);
            let want = -lu_solve(&a, &g).unwrap();
            assert!(
                (&res.d - &want).norm() <= 1e-6 * want.norm().max(1.0),
                "n = {n}"
            );
        }
    }

    #[test]
    fn later_negative_curvature_keeps_the_current_iterate() {
        // first curvature is positive, second is negative
        let a = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, -3.0]);
        let g = Vector::from_vec(vec![1.0, 0.1]);
        let res = truncated_cg(|v| &a * v, &g, 1e-12, 2);
        if res.exit == CgExit::NegativeCurvature {
            assert!(res.iters >= 1);
        }
        assert!(g.dot(&res.d) < 0.0);
    }

    #[test]
    fn forcing_term_examples() {
        assert_relative_eq!(forcing_term(1.0), 0.5);
        assert_relative_eq!(forcing_term(1e-4), 1e-2);
        assert_relative_eq!(forcing_term(0.09), 0.3);
        assert_relative_eq!(ForceRule::Sqrt.value(0.09), 0.3);
        assert_relative_eq!(ForceRule::Const(0.1).value(42.0), 0.1);
    }

    #[test]
    fn iteration_count_respects_the_cap() {
        let mut rng = RngStream::new(19);
        let n = 12;
        let gmat = Matrix::from_fn(n, n, |_, _| rng.normal());
        let a = &gmat * gmat.transpose() + 0.01 * Matrix::identity(n, n);
        let g = unit_ball_sample(&mut rng, n) + Vector::repeat(n, 0.2);
        let res = truncated_cg(|v| &a * v, &g, 0.0, n as u64);
        assert!(res.iters <= n as u64);
        assert!(g.dot(&res.d) < 0.0);
    }
}
