use std::fmt;

use crate::rng::{unit_ball_sample, RngStream};
use crate::types::{SparsityPattern, Vector};

/// Per-run evaluation counters owned by a solver driver.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counters {
    pub n_f: u64,
    pub n_grad: u64,
    pub n_hvp: u64,
    pub n_iter: u64,
}

type ScalarFn = Box<dyn Fn(&Vector) -> f64 + Send + Sync>;
type GradFn = Box<dyn Fn(&Vector) -> Vector + Send + Sync>;
type HvpFn = Box<dyn Fn(&Vector, &Vector) -> Vector + Send + Sync>;

/// Test problem with analytic value, gradient, and Hessian-vector oracles.
pub struct ProblemDef {
    pub name: String,
    pub n: usize,
    pub x0: Vector,
    pub pattern: Option<SparsityPattern>,
    pub eval_f: ScalarFn,
    pub eval_grad: GradFn,
    pub eval_hvp: HvpFn,
}

impl ProblemDef {
    pub fn f(&self, x: &Vector) -> f64 {
        (self.eval_f)(x)
    }

    pub fn grad(&self, x: &Vector) -> Vector {
        (self.eval_grad)(x)
    }

    pub fn hvp(&self, x: &Vector, v: &Vector) -> Vector {
        (self.eval_hvp)(x, v)
    }
}

impl fmt::Debug for ProblemDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemDef")
            .field("name", &self.name)
            .field("n", &self.n)
            .finish()
    }
}

fn arwhead(n: usize) -> ProblemDef {
    assert!(n >= 2);
    let f = move |x: &Vector| -> f64 {
        let xn = x[n - 1];
        (0..n - 1)
            .map(|i| {
                let t = x[i] * x[i] + xn * xn;
                t * t - 4.0 * x[i] + 3.0
            })
            .sum()
    };
    let grad = move |x: &Vector| -> Vector {
        let xn = x[n - 1];
        let mut g = Vector::zeros(n);
        for i in 0..n - 1 {
            let t = x[i] * x[i] + xn * xn;
            g[i] += 4.0 * t * x[i] - 4.0;
            g[n - 1] += 4.0 * t * xn;
        }
        g
    };
    let hvp = move |x: &Vector, v: &Vector| -> Vector {
        let xn = x[n - 1];
        let vn = v[n - 1];
        let mut out = Vector::zeros(n);
        for i in 0..n - 1 {
            let t = x[i] * x[i] + xn * xn;
            let hii = 4.0 * t + 8.0 * x[i] * x[i];
            let hin = 8.0 * x[i] * xn;
            let hnn = 4.0 * t + 8.0 * xn * xn;
            out[i] += hii * v[i] + hin * vn;
            out[n - 1] += hin * v[i] + hnn * vn;
        }
        out
    };
    ProblemDef {
        name: format!("ARWHEAD_{n}"),
        n,
        x0: Vector::repeat(n, 1.0),
        pattern: Some(SparsityPattern::arrowhead_last(n)),
        eval_f: Box::new(f),
        eval_grad: Box::new(grad),
        eval_hvp: Box::new(hvp),
    }
}

const BEALE_C: [f64; 3] = [1.5, 2.25, 2.625];

fn beale_residuals(x: &Vector) -> ([f64; 3], [[f64; 2]; 3]) {
    let (a, b) = (x[0], x[1]);
    let r = [
        BEALE_C[0] - a * (1.0 - b),
        BEALE_C[1] - a * (1.0 - b * b),
        BEALE_C[2] - a * (1.0 - b * b * b),
    ];
    let dr = [
        [-(1.0 - b), a],
        [-(1.0 - b * b), 2.0 * a * b],
        [-(1.0 - b * b * b), 3.0 * a * b * b],
    ];
    (r, dr)
}

fn beale() -> ProblemDef {
    let f = |x: &Vector| -> f64 {
        let (r, _) = beale_residuals(x);
        r.iter().map(|ri| ri * ri).sum()
    };
    let grad = |x: &Vector| -> Vector {
        let (r, dr) = beale_residuals(x);
        let mut g = Vector::zeros(2);
        for k in 0..3 {
            g[0] += 2.0 * r[k] * dr[k][0];
            g[1] += 2.0 * r[k] * dr[k][1];
        }
        g
    };
    let hvp = |x: &Vector, v: &Vector| -> Vector {
        let (r, dr) = beale_residuals(x);
        let (a, b) = (x[0], x[1]);
        // second derivatives of each residual applied to v
        let d2rv = [
            [v[1], v[0]],
            [2.0 * b * v[1], 2.0 * b * v[0] + 2.0 * a * v[1]],
            [3.0 * b * b * v[1], 3.0 * b * b * v[0] + 6.0 * a * b * v[1]],
        ];
        let mut out = Vector::zeros(2);
        for k in 0..3 {
            let s = dr[k][0] * v[0] + dr[k][1] * v[1];
            out[0] += 2.0 * (s * dr[k][0] + r[k] * d2rv[k][0]);
            out[1] += 2.0 * (s * dr[k][1] + r[k] * d2rv[k][1]);
        }
        out
    };
    ProblemDef {
        name: "BEALE_2".into(),
        n: 2,
        x0: Vector::from_vec(vec![1.0, 1.0]),
        pattern: None,
        eval_f: Box::new(f),
        eval_grad: Box::new(grad),
        eval_hvp: Box::new(hvp),
    }
}

fn cube() -> ProblemDef {
    let f = |x: &Vector| -> f64 {
        let a = x[1] - x[0] * x[0] * x[0];
        (x[0] - 1.0).powi(2) + 100.0 * a * a
    };
    let grad = |x: &Vector| -> Vector {
        let a = x[1] - x[0] * x[0] * x[0];
        Vector::from_vec(vec![
            2.0 * (x[0] - 1.0) - 600.0 * x[0] * x[0] * a,
            200.0 * a,
        ])
    };
    let hvp = |x: &Vector, v: &Vector| -> Vector {
        let a = x[1] - x[0] * x[0] * x[0];
        let h11 = 2.0 - 1200.0 * x[0] * a + 1800.0 * x[0].powi(4);
        let h12 = -600.0 * x[0] * x[0];
        Vector::from_vec(vec![h11 * v[0] + h12 * v[1], h12 * v[0] + 200.0 * v[1]])
    };
    ProblemDef {
        name: "CUBE_2".into(),
        n: 2,
        x0: Vector::from_vec(vec![-1.2, 1.0]),
        pattern: None,
        eval_f: Box::new(f),
        eval_grad: Box::new(grad),
        eval_hvp: Box::new(hvp),
    }
}

// f = Σ_{i≤n−3} (x_i² + 100x_{i+1}² + 100x_{i+2}²): a diagonal quadratic.
fn dqdrtic_coeff(n: usize) -> Vector {
    let mut c = Vector::zeros(n);
    for j in 0..n {
        if j + 2 < n {
            c[j] += 1.0;
        }
        if (1..n - 1).contains(&j) {
            c[j] += 100.0;
        }
        if j >= 2 {
            c[j] += 100.0;
        }
    }
    c
}

fn dqdrtic(n: usize) -> ProblemDef {
    assert!(n >= 3);
    let c = dqdrtic_coeff(n);
    let cf = c.clone();
    let cg = c.clone();
    let f = move |x: &Vector| -> f64 { (0..x.len()).map(|j| cf[j] * x[j] * x[j]).sum() };
    let grad = move |x: &Vector| -> Vector {
        Vector::from_fn(x.len(), |j, _| 2.0 * cg[j] * x[j])
    };
    let hvp = move |_x: &Vector, v: &Vector| -> Vector {
        Vector::from_fn(v.len(), |j, _| 2.0 * c[j] * v[j])
    };
    ProblemDef {
        name: format!("DQDRTIC_{n}"),
        n,
        x0: Vector::repeat(n, 3.0),
        pattern: Some(SparsityPattern::diagonal(n)),
        eval_f: Box::new(f),
        eval_grad: Box::new(grad),
        eval_hvp: Box::new(hvp),
    }
}

fn dixon3dq(n: usize) -> ProblemDef {
    assert!(n >= 3);
    let f = move |x: &Vector| -> f64 {
        let mut s = (x[0] - 1.0).powi(2) + (x[n - 1] - 1.0).powi(2);
        for j in 1..n - 1 {
            s += (x[j] - x[j + 1]).powi(2);
        }
        s
    };
    let grad = move |x: &Vector| -> Vector {
        let mut g = Vector::zeros(n);
        g[0] += 2.0 * (x[0] - 1.0);
        g[n - 1] += 2.0 * (x[n - 1] - 1.0);
        for j in 1..n - 1 {
            let u = x[j] - x[j + 1];
            g[j] += 2.0 * u;
            g[j + 1] -= 2.0 * u;
        }
        g
    };
    let hvp = move |_x: &Vector, v: &Vector| -> Vector {
        let mut out = Vector::zeros(n);
        out[0] += 2.0 * v[0];
        out[n - 1] += 2.0 * v[n - 1];
        for j in 1..n - 1 {
            let u = v[j] - v[j + 1];
            out[j] += 2.0 * u;
            out[j + 1] -= 2.0 * u;
        }
        out
    };
    ProblemDef {
        name: format!("DIXON3DQ_{n}"),
        n,
        x0: Vector::repeat(n, -1.0),
        pattern: Some(SparsityPattern::tridiagonal(n)),
        eval_f: Box::new(f),
        eval_grad: Box::new(grad),
        eval_hvp: Box::new(hvp),
    }
}

fn tridia(n: usize) -> ProblemDef {
    assert!(n >= 2);
    let f = move |x: &Vector| -> f64 {
        let mut s = (x[0] - 1.0).powi(2);
        for i in 1..n {
            let u = 2.0 * x[i] - x[i - 1];
            s += (i + 1) as f64 * u * u;
        }
        s
    };
    let grad = move |x: &Vector| -> Vector {
        let mut g = Vector::zeros(n);
        g[0] += 2.0 * (x[0] - 1.0);
        for i in 1..n {
            let w = (i + 1) as f64;
            let u = 2.0 * x[i] - x[i - 1];
            g[i] += 4.0 * w * u;
            g[i - 1] -= 2.0 * w * u;
        }
        g
    };
    let hvp = move |_x: &Vector, v: &Vector| -> Vector {
        let mut out = Vector::zeros(n);
        out[0] += 2.0 * v[0];
        for i in 1..n {
            let w = (i + 1) as f64;
            let u = 2.0 * v[i] - v[i - 1];
            out[i] += 4.0 * w * u;
            out[i - 1] -= 2.0 * w * u;
        }
        out
    };
    ProblemDef {
        name: format!("TRIDIA_{n}"),
        n,
        x0: Vector::repeat(n, 1.0),
        pattern: Some(SparsityPattern::tridiagonal(n)),
        eval_f: Box::new(f),
        eval_grad: Box::new(grad),
        eval_hvp: Box::new(hvp),
    }
}

// ½xᵀAx with A the Hilbert matrix plus 10·I.
fn hilbertb(n: usize) -> ProblemDef {
    let a = crate::types::Matrix::from_fn(n, n, |i, j| {
        let base = 1.0 / ((i + j + 1) as f64);
        if i == j {
            base + 10.0
        } else {
            base
        }
    });
    let af = a.clone();
    let ag = a.clone();
    let f = move |x: &Vector| -> f64 { 0.5 * x.dot(&(&af * x)) };
    let grad = move |x: &Vector| -> Vector { &ag * x };
    let hvp = move |_x: &Vector, v: &Vector| -> Vector { &a * v };
    ProblemDef {
        name: format!("HILBERTB_{n}"),
        n,
        x0: Vector::repeat(n, -3.0),
        pattern: None,
        eval_f: Box::new(f),
        eval_grad: Box::new(grad),
        eval_hvp: Box::new(hvp),
    }
}

// Five squared groups; the last one is cubic-quadratic in (x1, x3).
fn engval2_groups(x: &Vector) -> ([f64; 5], [[f64; 3]; 5]) {
    let (a, b, c) = (x[0], x[1], x[2]);
    let t = 5.0 * c - a + 1.0;
    let g = [
        a * a + b * b + c * c - 1.0,
        a * a + b * b + (c - 2.0) * (c - 2.0) - 1.0,
        a + b + c - 1.0,
        a + b - c + 1.0,
        a * a * a + 3.0 * b * b + t * t - 36.0,
    ];
    let dg = [
        [2.0 * a, 2.0 * b, 2.0 * c],
        [2.0 * a, 2.0 * b, 2.0 * (c - 2.0)],
        [1.0, 1.0, 1.0],
        [1.0, 1.0, -1.0],
        [3.0 * a * a - 2.0 * t, 6.0 * b, 10.0 * t],
    ];
    (g, dg)
}

fn engval2() -> ProblemDef {
    let f = |x: &Vector| -> f64 {
        let (g, _) = engval2_groups(x);
        g.iter().map(|gi| gi * gi).sum()
    };
    let grad = |x: &Vector| -> Vector {
        let (g, dg) = engval2_groups(x);
        let mut out = Vector::zeros(3);
        for k in 0..5 {
            for j in 0..3 {
                out[j] += 2.0 * g[k] * dg[k][j];
            }
        }
        out
    };
    let hvp = |x: &Vector, v: &Vector| -> Vector {
        let (g, dg) = engval2_groups(x);
        let a = x[0];
        // Hessians of the groups applied to v (groups 3 and 4 are linear)
        let d2gv = [
            [2.0 * v[0], 2.0 * v[1], 2.0 * v[2]],
            [2.0 * v[0], 2.0 * v[1], 2.0 * v[2]],
            [0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0],
            [
                (6.0 * a + 2.0) * v[0] - 10.0 * v[2],
                6.0 * v[1],
                -10.0 * v[0] + 50.0 * v[2],
            ],
        ];
        let mut out = Vector::zeros(3);
        for k in 0..5 {
            let s = dg[k][0] * v[0] + dg[k][1] * v[1] + dg[k][2] * v[2];
            for j in 0..3 {
                out[j] += 2.0 * (s * dg[k][j] + g[k] * d2gv[k][j]);
            }
        }
        out
    };
    ProblemDef {
        name: "ENGVAL2_3".into(),
        n: 3,
        x0: Vector::from_vec(vec![1.0, 2.0, 0.0]),
        pattern: None,
        eval_f: Box::new(f),
        eval_grad: Box::new(grad),
        eval_hvp: Box::new(hvp),
    }
}

fn box3() -> ProblemDef {
    let f = |x: &Vector| -> f64 {
        (1..=10)
            .map(|i| {
                let t = 0.1 * i as f64;
                let c = (-t).exp() - (-10.0 * t).exp();
                let r = (-t * x[0]).exp() - (-t * x[1]).exp() - x[2] * c;
                r * r
            })
            .sum()
    };
    let grad = |x: &Vector| -> Vector {
        let mut g = Vector::zeros(3);
        for i in 1..=10 {
            let t = 0.1 * i as f64;
            let c = (-t).exp() - (-10.0 * t).exp();
            let (e1, e2) = ((-t * x[0]).exp(), (-t * x[1]).exp());
            let r = e1 - e2 - x[2] * c;
            g[0] += 2.0 * r * (-t * e1);
            g[1] += 2.0 * r * (t * e2);
            g[2] += 2.0 * r * (-c);
        }
        g
    };
    let hvp = |x: &Vector, v: &Vector| -> Vector {
        let mut out = Vector::zeros(3);
        for i in 1..=10 {
            let t = 0.1 * i as f64;
            let c = (-t).exp() - (-10.0 * t).exp();
            let (e1, e2) = ((-t * x[0]).exp(), (-t * x[1]).exp());
            let r = e1 - e2 - x[2] * c;
            let dr = [-t * e1, t * e2, -c];
            let d2rv = [t * t * e1 * v[0], -t * t * e2 * v[1], 0.0];
            let s = dr[0] * v[0] + dr[1] * v[1] + dr[2] * v[2];
            for j in 0..3 {
                out[j] += 2.0 * (s * dr[j] + r * d2rv[j]);
            }
        }
        out
    };
    ProblemDef {
        name: "BOX3_3".into(),
        n: 3,
        x0: Vector::from_vec(vec![0.0, 10.0, 20.0]),
        pattern: None,
        eval_f: Box::new(f),
        eval_grad: Box::new(grad),
        eval_hvp: Box::new(hvp),
    }
}

fn cosine(n: usize) -> ProblemDef {
    assert!(n >= 2);
    let f = move |x: &Vector| -> f64 {
        (0..n - 1).map(|i| (x[i] * x[i] - 0.5 * x[i + 1]).cos()).sum()
    };
    let grad = move |x: &Vector| -> Vector {
        let mut g = Vector::zeros(n);
        for i in 0..n - 1 {
            let su = (x[i] * x[i] - 0.5 * x[i + 1]).sin();
            g[i] -= su * 2.0 * x[i];
            g[i + 1] += su * 0.5;
        }
        g
    };
    let hvp = move |x: &Vector, v: &Vector| -> Vector {
        let mut out = Vector::zeros(n);
        for i in 0..n - 1 {
            let u = x[i] * x[i] - 0.5 * x[i + 1];
            let (su, cu) = (u.sin(), u.cos());
            // −cos(u)·∇u∇uᵀ − sin(u)·∇²u with ∇u = (2x_i, −0.5)
            let s = 2.0 * x[i] * v[i] - 0.5 * v[i + 1];
            out[i] += -cu * s * 2.0 * x[i] - 2.0 * su * v[i];
            out[i + 1] += -cu * s * (-0.5);
        }
        out
    };
    ProblemDef {
        name: format!("COSINE_{n}"),
        n,
        x0: Vector::repeat(n, 1.0),
        pattern: Some(SparsityPattern::tridiagonal(n)),
        eval_f: Box::new(f),
        eval_grad: Box::new(grad),
        eval_hvp: Box::new(hvp),
    }
}

fn engval1(n: usize) -> ProblemDef {
    assert!(n >= 2);
    let f = move |x: &Vector| -> f64 {
        (0..n - 1)
            .map(|i| {
                let t = x[i] * x[i] + x[i + 1] * x[i + 1];
                t * t - 4.0 * x[i] + 3.0
            })
            .sum()
    };
    let grad = move |x: &Vector| -> Vector {
        let mut g = Vector::zeros(n);
        for i in 0..n - 1 {
            let t = x[i] * x[i] + x[i + 1] * x[i + 1];
            g[i] += 4.0 * t * x[i] - 4.0;
            g[i + 1] += 4.0 * t * x[i + 1];
        }
        g
    };
    let hvp = move |x: &Vector, v: &Vector| -> Vector {
        let mut out = Vector::zeros(n);
        for i in 0..n - 1 {
            let t = x[i] * x[i] + x[i + 1] * x[i + 1];
            let hii = 4.0 * t + 8.0 * x[i] * x[i];
            let hij = 8.0 * x[i] * x[i + 1];
            let hjj = 4.0 * t + 8.0 * x[i + 1] * x[i + 1];
            out[i] += hii * v[i] + hij * v[i + 1];
            out[i + 1] += hij * v[i] + hjj * v[i + 1];
        }
        out
    };
    ProblemDef {
        name: format!("ENGVAL1_{n}"),
        n,
        x0: Vector::repeat(n, 2.0),
        pattern: Some(SparsityPattern::tridiagonal(n)),
        eval_f: Box::new(f),
        eval_grad: Box::new(grad),
        eval_hvp: Box::new(hvp),
    }
}

fn liarwhd(n: usize) -> ProblemDef {
    assert!(n >= 2);
    let f = move |x: &Vector| -> f64 {
        (0..n)
            .map(|i| {
                let a = x[i] * x[i] - x[0];
                4.0 * a * a + (x[i] - 1.0).powi(2)
            })
            .sum()
    };
    let grad = move |x: &Vector| -> Vector {
        let mut g = Vector::zeros(n);
        for i in 0..n {
            let a = x[i] * x[i] - x[0];
            g[i] += 16.0 * a * x[i] + 2.0 * (x[i] - 1.0);
            g[0] -= 8.0 * a;
        }
        g
    };
    let hvp = move |x: &Vector, v: &Vector| -> Vector {
        let mut out = Vector::zeros(n);
        for i in 0..n {
            let a = x[i] * x[i] - x[0];
            // 4a² has gradient factor ∇a = 2x_i e_i − e_1
            let s = 2.0 * x[i] * v[i] - v[0];
            out[i] += 8.0 * s * 2.0 * x[i] + 16.0 * a * v[i] + 2.0 * v[i];
            out[0] -= 8.0 * s;
        }
        out
    };
    ProblemDef {
        name: format!("LIARWHD_{n}"),
        n,
        x0: Vector::repeat(n, 4.0),
        pattern: Some(SparsityPattern::arrowhead_first(n)),
        eval_f: Box::new(f),
        eval_grad: Box::new(grad),
        eval_hvp: Box::new(hvp),
    }
}

fn dqrtic(n: usize) -> ProblemDef {
    let f = move |x: &Vector| -> f64 {
        (0..n).map(|i| (x[i] - (i + 1) as f64).powi(4)).sum()
    };
    let grad = move |x: &Vector| -> Vector {
        Vector::from_fn(n, |i, _| 4.0 * (x[i] - (i + 1) as f64).powi(3))
    };
    let hvp = move |x: &Vector, v: &Vector| -> Vector {
        Vector::from_fn(n, |i, _| 12.0 * (x[i] - (i + 1) as f64).powi(2) * v[i])
    };
    ProblemDef {
        name: format!("DQRTIC_{n}"),
        n,
        x0: Vector::repeat(n, 2.0),
        pattern: Some(SparsityPattern::diagonal(n)),
        eval_f: Box::new(f),
        eval_grad: Box::new(grad),
        eval_hvp: Box::new(hvp),
    }
}

fn edensch(n: usize) -> ProblemDef {
    assert!(n >= 2);
    let f = move |x: &Vector| -> f64 {
        16.0 + (0..n - 1)
            .map(|i| {
                let w = x[i + 1] * (x[i] - 2.0);
                (x[i] - 2.0).powi(4) + w * w + (x[i + 1] + 1.0).powi(2)
            })
            .sum::<f64>()
    };
    let grad = move |x: &Vector| -> Vector {
        let mut g = Vector::zeros(n);
        for i in 0..n - 1 {
            let w = x[i + 1] * (x[i] - 2.0);
            g[i] += 4.0 * (x[i] - 2.0).powi(3) + 2.0 * w * x[i + 1];
            g[i + 1] += 2.0 * w * (x[i] - 2.0) + 2.0 * (x[i + 1] + 1.0);
        }
        g
    };
    let hvp = move |x: &Vector, v: &Vector| -> Vector {
        let mut out = Vector::zeros(n);
        for i in 0..n - 1 {
            let w = x[i + 1] * (x[i] - 2.0);
            // ∇w = (x_{i+1}, x_i − 2); ∇²w couples the pair
            let s = x[i + 1] * v[i] + (x[i] - 2.0) * v[i + 1];
            out[i] += 12.0 * (x[i] - 2.0).powi(2) * v[i] + 2.0 * s * x[i + 1] + 2.0 * w * v[i + 1];
            out[i + 1] += 2.0 * s * (x[i] - 2.0) + 2.0 * w * v[i] + 2.0 * v[i + 1];
        }
        out
    };
    ProblemDef {
        name: format!("EDENSCH_{n}"),
        n,
        x0: Vector::zeros(n),
        pattern: Some(SparsityPattern::tridiagonal(n)),
        eval_f: Box::new(f),
        eval_grad: Box::new(grad),
        eval_hvp: Box::new(hvp),
    }
}

fn srosenbr(n: usize) -> ProblemDef {
    assert!(n >= 2 && n % 2 == 0);
    let f = move |x: &Vector| -> f64 {
        (0..n / 2)
            .map(|k| {
                let (a, b) = (x[2 * k], x[2 * k + 1]);
                let u = b - a * a;
                100.0 * u * u + (1.0 - a) * (1.0 - a)
            })
            .sum()
    };
    let grad = move |x: &Vector| -> Vector {
        let mut g = Vector::zeros(n);
        for k in 0..n / 2 {
            let (a, b) = (x[2 * k], x[2 * k + 1]);
            let u = b - a * a;
            g[2 * k] += -400.0 * u * a - 2.0 * (1.0 - a);
            g[2 * k + 1] += 200.0 * u;
        }
        g
    };
    let hvp = move |x: &Vector, v: &Vector| -> Vector {
        let mut out = Vector::zeros(n);
        for k in 0..n / 2 {
            let (a, b) = (x[2 * k], x[2 * k + 1]);
            let u = b - a * a;
            let haa = -400.0 * u + 800.0 * a * a + 2.0;
            let hab = -400.0 * a;
            out[2 * k] += haa * v[2 * k] + hab * v[2 * k + 1];
            out[2 * k + 1] += hab * v[2 * k] + 200.0 * v[2 * k + 1];
        }
        out
    };
    let x0 = Vector::from_fn(n, |i, _| if i % 2 == 0 { -1.2 } else { 1.0 });
    ProblemDef {
        name: format!("SROSENBR_{n}"),
        n,
        x0,
        pattern: Some(SparsityPattern::paired_blocks(n)),
        eval_f: Box::new(f),
        eval_grad: Box::new(grad),
        eval_hvp: Box::new(hvp),
    }
}

// Diagonal quadratic with eigenvalues spread geometrically from 1 to 100.
fn testquad(n: usize) -> ProblemDef {
    assert!(n >= 2);
    let d = Vector::from_fn(n, |i, _| 100f64.powf(i as f64 / (n - 1) as f64));
    let df = d.clone();
    let dg = d.clone();
    let f = move |x: &Vector| -> f64 { 0.5 * (0..x.len()).map(|i| df[i] * x[i] * x[i]).sum::<f64>() };
    let grad = move |x: &Vector| -> Vector { Vector::from_fn(x.len(), |i, _| dg[i] * x[i]) };
    let hvp = move |_x: &Vector, v: &Vector| -> Vector { Vector::from_fn(v.len(), |i, _| d[i] * v[i]) };
    ProblemDef {
        name: format!("TESTQUAD_{n}"),
        n,
        x0: Vector::repeat(n, 1.0),
        pattern: Some(SparsityPattern::diagonal(n)),
        eval_f: Box::new(f),
        eval_grad: Box::new(grad),
        eval_hvp: Box::new(hvp),
    }
}

/// Full instance list covering the small, sparse, and large benchmark sets.
pub fn registry() -> Vec<ProblemDef> {
    vec![
        arwhead(10),
        beale(),
        cube(),
        dqdrtic(10),
        dqdrtic(100),
        dixon3dq(10),
        dixon3dq(200),
        tridia(10),
        tridia(200),
        hilbertb(10),
        engval2(),
        box3(),
        cosine(10),
        cosine(200),
        engval1(200),
        liarwhd(100),
        liarwhd(200),
        srosenbr(50),
        srosenbr(100),
        dqrtic(10),
        edensch(200),
        testquad(100),
    ]
}

/// Looks up a problem instance by name, e.g. "TRIDIA_10".
pub fn find<'a>(reg: &'a [ProblemDef], name: &str) -> Option<&'a ProblemDef> {
    reg.iter().find(|p| p.name == name)
}

/// Finite-difference mismatches, one line per failing check.
#[derive(Debug)]
pub struct MismatchReport {
    pub failures: Vec<String>,
}

impl fmt::Display for MismatchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.failures.join("; "))
    }
}

/// Validates the gradient and Hessian-vector oracles against central differences.
pub fn fd_check(p: &ProblemDef, x: &Vector) -> Result<(), MismatchReport> {
    let n = p.n;
    let h = 1e-6 * (1.0 + x.norm());
    let mut failures = Vec::new();

    let g = p.grad(x);
    let mut gfd = Vector::zeros(n);
    for i in 0..n {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[i] += h;
        xm[i] -= h;
        gfd[i] = (p.f(&xp) - p.f(&xm)) / (2.0 * h);
    }
    let gerr = (&gfd - &g).norm();
    let gtol = 1e-5 * g.norm().max(1.0);
    if !(gerr <= gtol) {
        failures.push(format!(
            "gradient: central-difference deviation {gerr:.3e} exceeds {gtol:.3e}"
        ));
    }

    let mut rng = RngStream::new(0xfdc);
    for k in 0..5 {
        let mut v = unit_ball_sample(&mut rng, n);
        v /= v.norm();
        let hv = p.hvp(x, &v);
        let xp = x + h * &v;
        let xm = x - h * &v;
        let hfd = (p.grad(&xp) - p.grad(&xm)) / (2.0 * h);
        let herr = (&hfd - &hv).norm();
        let htol = 1e-4 * hv.norm().max(1.0);
        if !(herr <= htol) {
            failures.push(format!(
                "hvp (direction {k}): central-difference deviation {herr:.3e} exceeds {htol:.3e}"
            ));
        }
    }

    if failures.is_empty() {
        Ok(())
    } else {
        Err(MismatchReport { failures })
    }
}
