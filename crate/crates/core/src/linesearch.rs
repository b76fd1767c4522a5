use crate::error::{Error, Result};

/// Default sufficient-decrease constant.
pub const C1_DEFAULT: f64 = 1e-4;
/// Steps below this length abort the search.
pub const MIN_STEP_DEFAULT: f64 = 1e-10;

/// How a line search ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LsStatus {
    Success,
    StepTooSmall,
}

/// Accepted step (or the sub-threshold one that aborted the search).
#[derive(Clone, Copy, Debug)]
pub struct LineSearchResult {
    pub alpha: f64,
    pub f_new: f64,
    pub n_feval: u64,
    pub status: LsStatus,
}

// Minimizer of the quadratic through (0, phi0) with slope dphi0 and (a, fa).
fn quad_step(a: f64, fa: f64, phi0: f64, dphi0: f64) -> f64 {
    -dphi0 * a * a / (2.0 * (fa - phi0 - dphi0 * a))
}

// Minimizer of the cubic through (0, phi0) with slope dphi0 and two trials.
fn cubic_step(a0: f64, f0: f64, a1: f64, f1: f64, phi0: f64, dphi0: f64) -> f64 {
    let d0 = f0 - phi0 - dphi0 * a0;
    let d1 = f1 - phi0 - dphi0 * a1;
    let denom = a0 * a0 * a1 * a1 * (a0 - a1);
    let ca = (a1 * a1 * d0 - a0 * a0 * d1) / denom;
    let cb = (-a1 * a1 * a1 * d0 + a0 * a0 * a0 * d1) / denom;
    if ca.abs() <= 1e3 * f64::EPSILON * cb.abs() {
        return -dphi0 / (2.0 * cb);
    }
    let disc = cb * cb - 3.0 * ca * dphi0;
    if disc < 0.0 {
        return f64::NAN;
    }
    (-cb + disc.sqrt()) / (3.0 * ca)
}

// Trials live in [0.1·α, 0.5·α]; anything non-finite backs off to α/2.
fn clamp_trial(raw: f64, alpha: f64) -> f64 {
    if raw.is_finite() {
        raw.clamp(0.1 * alpha, 0.5 * alpha)
    } else {
        0.5 * alpha
    }
}

/// Backtracking line search with defaults for the decrease constant and floor.
pub fn cubic_search(phi: impl FnMut(f64) -> f64, phi0: f64, dphi0: f64) -> Result<LineSearchResult> {
    cubic_search_with(phi, phi0, dphi0, C1_DEFAULT, MIN_STEP_DEFAULT)
}

/// Backtracking line search from α = 1 with quadratic-then-cubic interpolation.
///
/// Requires dphi0 < 0. The first failed trial backtracks on the quadratic
/// model; later trials fit a cubic through the origin data and the two most
/// recent trials. Every trial is clamped into [0.1, 0.5]× the previous one,
/// and the search reports `StepTooSmall` once a trial falls below `min_step`.
pub fn cubic_search_with(
    mut phi: impl FnMut(f64) -> f64,
    phi0: f64,
    dphi0: f64,
    c1: f64,
    min_step: f64,
) -> Result<LineSearchResult> {
    if dphi0 >= 0.0 {
        return Err(Error::AscentDirection(dphi0));
    }
    let mut alpha = 1.0;
    let mut n_feval = 0u64;
    let mut older: Option<(f64, f64)> = None;
    loop {
        let fa = phi(alpha);
        n_feval += 1;
        if fa.is_finite() && fa <= phi0 + c1 * alpha * dphi0 {
            return Ok(LineSearchResult { alpha, f_new: fa, n_feval, status: LsStatus::Success });
        }
        let raw = if !fa.is_finite() {
            0.5 * alpha
        } else if let Some((a1, f1)) = older {
            cubic_step(alpha, fa, a1, f1, phi0, dphi0)
        } else {
            quad_step(alpha, fa, phi0, dphi0)
        };
        let next = clamp_trial(raw, alpha);
        older = Some((alpha, fa));
        if next < min_step {
            return Ok(LineSearchResult {
                alpha: next,
                f_new: fa,
                n_feval,
                status: LsStatus::StepTooSmall,
            });
        }
        alpha = next;
    }
}
