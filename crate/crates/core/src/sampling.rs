use crate::error::{Error, Result};
use crate::rng::{unit_ball_sample, RngStream};
use crate::types::Vector;

/// Sampling radius used before any step has been taken.
pub const INITIAL_RADIUS: f64 = 1e-2;

/// Step-scaled sampling radius, clamped to [1e-4, 1e-2].
pub fn radius(x_cur: &Vector, x_prev: &Vector) -> f64 {
    (x_cur - x_prev).norm().clamp(1e-4, 1e-2)
}

/// Angle in radians between the lines spanned by `a` and `b` (sign ignored).
pub fn line_angle(a: &Vector, b: &Vector) -> f64 {
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        // a zero vector is degenerate against anything
        return 0.0;
    }
    (a.dot(b).abs() / (na * nb)).min(1.0).acos()
}

/// Draws `p` unit-ball directions plus one product direction independent of them all.
///
/// The product direction is redrawn (up to 100 times) until its line angle to every
/// sample direction is at least 1e-6 radians.
pub fn fixed_directions(rng: &mut RngStream, n: usize, p: usize) -> Result<(Vec<Vector>, Vector)> {
    let dirs: Vec<Vector> = (0..p).map(|_| unit_ball_sample(rng, n)).collect();
    for _ in 0..100 {
        let v = unit_ball_sample(rng, n);
        if dirs.iter().all(|y| line_angle(&v, y) >= 1e-6) {
            return Ok((dirs, v));
        }
    }
    Err(Error::DegenerateGeometry(
        "no product direction independent of the sample directions after 100 draws".into(),
    ))
}

/// Rolling interpolation set kept around the current iterate.
#[derive(Clone, Debug)]
pub struct SampleSet {
    pub center: Vector,
    pub points: Vec<Vector>,
    pub fvals: Vec<f64>,
    pub zvecs: Option<Vec<Vector>>,
    pub ages: Vec<u64>,
}

impl SampleSet {
    pub fn new(
        center: Vector,
        points: Vec<Vector>,
        fvals: Vec<f64>,
        zvecs: Option<Vec<Vector>>,
    ) -> Self {
        assert!(!points.is_empty(), "sample set needs at least one point");
        assert_eq!(points.len(), fvals.len());
        if let Some(z) = &zvecs {
            assert_eq!(z.len(), points.len());
        }
        let ages = vec![0; points.len()];
        SampleSet { center, points, fvals, zvecs, ages }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Swaps the point farthest from `x_new` (ties: lowest index) for a fresh draw in
/// B(x_new, r), recenters the set, and returns the index of the new point.
///
/// The new point's f-value slot is set to NaN and its z-slot (when present) to zero;
/// the caller is expected to fill both before the set is used again.
pub fn replace_farthest(s: &mut SampleSet, x_new: &Vector, r: f64, rng: &mut RngStream) -> usize {
    let mut far = 0;
    let mut best = (&s.points[0] - x_new).norm();
    for i in 1..s.points.len() {
        let d = (&s.points[i] - x_new).norm();
        if d > best {
            far = i;
            best = d;
        }
    }
    s.points.remove(far);
    s.fvals.remove(far);
    s.ages.remove(far);
    if let Some(z) = s.zvecs.as_mut() {
        z.remove(far);
    }

    for a in s.ages.iter_mut() {
        *a += 1;
    }
    let n = x_new.len();
    s.points.push(x_new + r * unit_ball_sample(rng, n));
    s.fvals.push(f64::NAN);
    s.ages.push(0);
    if let Some(z) = s.zvecs.as_mut() {
        z.push(Vector::zeros(n));
    }
    s.center = x_new.clone();
    s.points.len() - 1
}
