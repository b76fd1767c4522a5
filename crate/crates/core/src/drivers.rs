use std::io::{self, Write};
use std::time::Instant;

use crate::cg::{truncated_cg, ForceRule};
use crate::hessian_model::{assemble, solve_determined};
use crate::linesearch::{cubic_search_with, LsStatus};
use crate::newton_model::{
    build_conditions, correct_z, descent_safeguard, maybe_restart, scaled_cond, solve_newton,
    SafeguardMode,
};
use crate::problems::{Counters, ProblemDef};
use crate::rng::{unit_ball_sample, RngStream};
use crate::sampling::{fixed_directions, radius, replace_farthest, SampleSet, INITIAL_RADIUS};
use crate::types::{SparsityPattern, Vector};

/// Direction-generation method for the shared solve loop.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    InexactNewton,
    HessianModel,
    HessianModelSparse,
    NewtonModel,
}

impl Method {
    pub fn label(&self) -> &'static str {
        match self {
            Method::InexactNewton => "inexact_newton",
            Method::HessianModel => "hessian_model",
            Method::HessianModelSparse => "hessian_model_sparse",
            Method::NewtonModel => "newton_model",
        }
    }
}

/// Tunable knobs shared by every solver run.
#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub method: Method,
    pub grad_tol: f64,
    pub max_iter: u64,
    pub seed: u64,
    pub cond_restart: f64,
    pub eta: f64,
    pub c1: f64,
    pub min_step: f64,
    pub force_rule: ForceRule,
    pub safeguard: SafeguardMode,
    pub wall_limit_ms: f64,
    pub timing: bool,
    pub trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            method: Method::InexactNewton,
            grad_tol: 1e-5,
            max_iter: 2000,
            seed: 0,
            cond_restart: 1e8,
            eta: 0.95,
            c1: 1e-4,
            min_step: 1e-10,
            force_rule: ForceRule::Sqrt,
            safeguard: SafeguardMode::Deficit,
            wall_limit_ms: 60_000.0,
            timing: false,
            trace: false,
        }
    }
}

/// Terminal state of a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Converged,
    MaxIter,
    LinesearchFailure,
    NumericFailure,
}

impl Status {
    pub fn label(&self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::MaxIter => "max_iter",
            Status::LinesearchFailure => "linesearch_failure",
            Status::NumericFailure => "numeric_failure",
        }
    }
}

/// One accepted iteration in a run trace.
#[derive(Clone, Copy, Debug)]
pub struct TraceRow {
    pub iter: u64,
    pub f: f64,
    pub gnorm: f64,
    pub alpha: f64,
    pub inner: u64,
    pub hvp_total: u64,
}

/// Everything recorded about a single solver run.
#[derive(Clone, Debug)]
pub struct RunRecord {
    pub problem: String,
    pub method: Method,
    pub counters: Counters,
    pub status: Status,
    pub final_f: f64,
    pub final_grad_norm: f64,
    pub wall_ms: f64,
    pub restarts: u64,
    pub trace: Option<Vec<TraceRow>>,
}

/// Writes a trace as one line per accepted iteration.
pub fn write_trace(rec: &RunRecord, w: &mut impl Write) -> io::Result<()> {
    if let Some(rows) = &rec.trace {
        for r in rows {
            writeln!(
                w,
                "iter={} f={} gnorm={} alpha={} inner={} hvp={}",
                r.iter, r.f, r.gnorm, r.alpha, r.inner, r.hvp_total
            )?;
        }
    }
    Ok(())
}

/// Counting wrapper around a problem's oracles; owns the run's counters.
pub struct Oracle<'a> {
    pub problem: &'a ProblemDef,
    pub counters: Counters,
}

impl<'a> Oracle<'a> {
    pub fn new(problem: &'a ProblemDef) -> Self {
        Oracle { problem, counters: Counters::default() }
    }

    pub fn f(&mut self, x: &Vector) -> f64 {
        self.counters.n_f += 1;
        (self.problem.eval_f)(x)
    }

    pub fn grad(&mut self, x: &Vector) -> Vector {
        self.counters.n_grad += 1;
        (self.problem.eval_grad)(x)
    }

    pub fn hvp(&mut self, x: &Vector, v: &Vector) -> Vector {
        self.counters.n_hvp += 1;
        (self.problem.eval_hvp)(x, v)
    }
}

trait DirectionStrategy {
    /// Produces the next search direction plus an inner-iteration count.
    #[allow(clippy::too_many_arguments)]
    fn direction(
        &mut self,
        o: &mut Oracle,
        x: &Vector,
        f_x: f64,
        g: &Vector,
        k: u64,
        x_prev: Option<&Vector>,
        g_prev: Option<&Vector>,
    ) -> (Vector, u64);

    fn restarts(&self) -> u64 {
        0
    }
}

fn solve_loop<S: DirectionStrategy>(
    p: &ProblemDef,
    cfg: &SolverConfig,
    strategy: &mut S,
) -> RunRecord {
    let start = Instant::now();
    let mut o = Oracle::new(p);
    let mut x = p.x0.clone();
    let mut f = o.f(&x);
    let mut x_prev: Option<Vector> = None;
    let mut g_prev: Option<Vector> = None;
    let mut trace: Option<Vec<TraceRow>> = cfg.trace.then(Vec::new);
    let mut final_gnorm;
    let status;

    loop {
        let g = o.grad(&x);
        let gnorm = g.norm();
        final_gnorm = gnorm;
        if !f.is_finite() || !gnorm.is_finite() {
            status = Status::NumericFailure;
            break;
        }
        if gnorm < cfg.grad_tol {
            status = Status::Converged;
            break;
        }
        if o.counters.n_iter >= cfg.max_iter {
            status = Status::MaxIter;
            break;
        }
        if start.elapsed().as_secs_f64() * 1e3 > cfg.wall_limit_ms {
            status = Status::MaxIter;
            break;
        }

        let k = o.counters.n_iter;
        let (d, inner) = strategy.direction(&mut o, &x, f, &g, k, x_prev.as_ref(), g_prev.as_ref());
        if !d.iter().all(|t| t.is_finite()) {
            status = Status::NumericFailure;
            break;
        }
        let dphi0 = g.dot(&d);
        if dphi0 >= 0.0 {
            status = Status::NumericFailure;
            break;
        }

        let ls = match cubic_search_with(|a| o.f(&(&x + a * &d)), f, dphi0, cfg.c1, cfg.min_step) {
            Ok(r) => r,
            Err(_) => {
                status = Status::NumericFailure;
                break;
            }
        };
        if ls.status == LsStatus::StepTooSmall {
            status = Status::LinesearchFailure;
            break;
        }

        let x_new = &x + ls.alpha * &d;
        x_prev = Some(std::mem::replace(&mut x, x_new));
        g_prev = Some(g);
        f = ls.f_new;
        o.counters.n_iter += 1;
        if let Some(rows) = trace.as_mut() {
            rows.push(TraceRow {
                iter: o.counters.n_iter,
                f,
                gnorm,
                alpha: ls.alpha,
                inner,
                hvp_total: o.counters.n_hvp,
            });
        }
    }

    let wall = start.elapsed().as_secs_f64() * 1e3;
    RunRecord {
        problem: p.name.clone(),
        method: cfg.method,
        counters: o.counters,
        status,
        final_f: f,
        final_grad_norm: final_gnorm,
        wall_ms: if cfg.timing { wall } else { 0.0 },
        restarts: strategy.restarts(),
        trace,
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

fn run_tag(problem: &str, method: Method) -> u64 {
    fnv1a(format!("{}/{}", problem, method.label()).as_bytes())
}

struct TnStrategy {
    force: ForceRule,
}

impl DirectionStrategy for TnStrategy {
    fn direction(
        &mut self,
        o: &mut Oracle,
        x: &Vector,
        _f_x: f64,
        g: &Vector,
        _k: u64,
        _x_prev: Option<&Vector>,
        _g_prev: Option<&Vector>,
    ) -> (Vector, u64) {
        let force = self.force.value(g.norm());
        let res = truncated_cg(|v| o.hvp(x, v), g, force, x.len() as u64);
        (res.d, res.iters)
    }
}

struct MhStrategy {
    dirs: Vec<Vector>,
    vdir: Vector,
    pattern: Option<SparsityPattern>,
    force: ForceRule,
}

impl DirectionStrategy for MhStrategy {
    fn direction(
        &mut self,
        o: &mut Oracle,
        x: &Vector,
        f_x: f64,
        g: &Vector,
        k: u64,
        x_prev: Option<&Vector>,
        _g_prev: Option<&Vector>,
    ) -> (Vector, u64) {
        let n = x.len();
        let r = match (k, x_prev) {
            (0, _) | (_, None) => INITIAL_RADIUS,
            (_, Some(xp)) => radius(x, xp),
        };
        let points: Vec<Vector> = self.dirs.iter().map(|u| x + r * u).collect();
        let fvals: Vec<f64> = points.iter().map(|y| o.f(y)).collect();
        let v = r * &self.vdir;
        let w = o.hvp(x, &v);
        let model = assemble(x, g, f_x, &points, &fvals, &v, &w, self.pattern.as_ref())
            .and_then(|sys| solve_determined(&sys));
        match model {
            Ok(m) => {
                let force = self.force.value(g.norm());
                let res = truncated_cg(|u| &m.h * u, g, force, n as u64);
                (res.d, res.iters)
            }
            Err(_) => (-g, 0),
        }
    }
}

struct NdStrategy {
    rng: RngStream,
    set: Option<SampleSet>,
    eta: f64,
    mode: SafeguardMode,
    cond_limit: f64,
    restarts: u64,
    since_restart: u64,
}

impl NdStrategy {
    fn rebuild(&mut self, o: &mut Oracle, x: &Vector, r: f64) -> SampleSet {
        let n = x.len();
        let points: Vec<Vector> =
            (0..n).map(|_| x + r * unit_ball_sample(&mut self.rng, n)).collect();
        let fvals: Vec<f64> = points.iter().map(|y| o.f(y)).collect();
        let zvecs: Vec<Vector> = points.iter().map(|y| o.hvp(x, &(y - x))).collect();
        SampleSet::new(x.clone(), points, fvals, Some(zvecs))
    }
}

impl DirectionStrategy for NdStrategy {
    fn direction(
        &mut self,
        o: &mut Oracle,
        x: &Vector,
        f_x: f64,
        g: &Vector,
        _k: u64,
        x_prev: Option<&Vector>,
        g_prev: Option<&Vector>,
    ) -> (Vector, u64) {
        let n = x.len();
        let r = match x_prev {
            Some(xp) if self.set.is_some() => radius(x, xp),
            _ => INITIAL_RADIUS,
        };
        if let Some(set) = self.set.as_mut() {
            // transport the surviving products, then refresh the stalest point
            let gp = g_prev.expect("a step has been taken, so a previous gradient exists");
            if let Some(zs) = set.zvecs.as_mut() {
                for z in zs.iter_mut() {
                    *z = correct_z(z, gp, g);
                }
            }
            let idx = replace_farthest(set, x, r, &mut self.rng);
            set.fvals[idx] = o.f(&set.points[idx]);
            let znew = o.hvp(x, &(&set.points[idx] - x));
            set.zvecs.as_mut().expect("products are stored for this method")[idx] = znew;
            self.since_restart += 1;
        } else {
            let set = self.rebuild(o, x, r);
            self.set = Some(set);
            self.since_restart = 0;
        }

        for attempt in 0..2 {
            let set = self.set.as_ref().expect("sample set was just built");
            let solved = build_conditions(x, f_x, set).ok().and_then(|(z, rhs)| {
                let cond = scaled_cond(&z);
                if maybe_restart(cond, self.cond_limit, false) {
                    None
                } else {
                    solve_newton(&z, &rhs, &Vector::zeros(n)).ok()
                }
            });
            match solved {
                Some(dn) if dn.iter().all(|t| t.is_finite()) => {
                    let d = descent_safeguard(&dn, g, self.eta, self.mode)
                        .unwrap_or_else(|_| -g);
                    return (d, 0);
                }
                _ if attempt == 0 => {
                    self.restarts += 1;
                    self.since_restart = 0;
                    let set = self.rebuild(o, x, r);
                    self.set = Some(set);
                }
                _ => break,
            }
        }
        (-g, 0)
    }

    fn restarts(&self) -> u64 {
        self.restarts
    }
}

/// Truncated-Newton baseline: CG on the true Hessian-vector oracle.
pub fn run_inexact_newton(p: &ProblemDef, cfg: &SolverConfig) -> RunRecord {
    let mut cfg = cfg.clone();
    cfg.method = Method::InexactNewton;
    let mut strategy = TnStrategy { force: cfg.force_rule };
    solve_loop(p, &cfg, &mut strategy)
}

/// Model-Hessian method: recover H from interpolation plus one true product
/// per iteration, then run CG on the model (those products are free).
pub fn run_hessian_model(p: &ProblemDef, cfg: &SolverConfig, sparse: bool) -> RunRecord {
    let effective_sparse = sparse && p.pattern.is_some();
    let mut cfg = cfg.clone();
    cfg.method = if effective_sparse { Method::HessianModelSparse } else { Method::HessianModel };
    let n = p.n;
    let p_interp = if effective_sparse {
        p.pattern.as_ref().map(|pat| pat.nnz() - n).unwrap_or(0)
    } else {
        n * (n + 1) / 2 - n
    };
    let mut rng = RngStream::substream(cfg.seed, run_tag(&p.name, cfg.method));
    let (dirs, vdir) = match fixed_directions(&mut rng, n, p_interp) {
        Ok(dv) => dv,
        Err(_) => {
            return RunRecord {
                problem: p.name.clone(),
                method: cfg.method,
                counters: Counters::default(),
                status: Status::NumericFailure,
                final_f: f64::NAN,
                final_grad_norm: f64::NAN,
                wall_ms: 0.0,
                restarts: 0,
                trace: None,
            }
        }
    };
    let pattern = if effective_sparse { p.pattern.clone() } else { None };
    let mut strategy = MhStrategy { dirs, vdir, pattern, force: cfg.force_rule };
    solve_loop(p, &cfg, &mut strategy)
}

/// Model-direction method: one fresh product per iteration, with gradient
/// transport of the stored ones and condition-triggered restarts.
pub fn run_newton_model(p: &ProblemDef, cfg: &SolverConfig) -> RunRecord {
    let mut cfg = cfg.clone();
    cfg.method = Method::NewtonModel;
    let rng = RngStream::substream(cfg.seed, run_tag(&p.name, cfg.method));
    let mut strategy = NdStrategy {
        rng,
        set: None,
        eta: cfg.eta,
        mode: cfg.safeguard,
        cond_limit: cfg.cond_restart,
        restarts: 0,
        since_restart: 0,
    };
    solve_loop(p, &cfg, &mut strategy)
}

/// Runs the method selected by the configuration.
pub fn run(p: &ProblemDef, cfg: &SolverConfig) -> RunRecord {
    match cfg.method {
        Method::InexactNewton => run_inexact_newton(p, cfg),
        Method::HessianModel => run_hessian_model(p, cfg, false),
        Method::HessianModelSparse => run_hessian_model(p, cfg, true),
        Method::NewtonModel => run_newton_model(p, cfg),
    }
}
