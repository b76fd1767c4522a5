use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::drivers::{run, Method, RunRecord, SolverConfig};
use crate::error::{Error, Result};
use crate::problems::ProblemDef;

/// Cost metric used to build performance profiles.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    Hvp,
    Iters,
    Fevals,
}

impl Metric {
    pub fn label(&self) -> &'static str {
        match self {
            Metric::Hvp => "hvp",
            Metric::Iters => "iters",
            Metric::Fevals => "fevals",
        }
    }

    pub fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "hvp" => Ok(Metric::Hvp),
            "iters" => Ok(Metric::Iters),
            "fevals" => Ok(Metric::Fevals),
            _ => Err(format!("unknown metric `{s}` (expected hvp|iters|fevals)")),
        }
    }

    /// Cost of one run; failures count as infinitely expensive.
    pub fn from_row(&self, row: &CsvRow) -> f64 {
        if row.status != "converged" {
            return f64::INFINITY;
        }
        match self {
            Metric::Hvp => row.hvp as f64,
            Metric::Iters => row.iters as f64,
            Metric::Fevals => row.fevals as f64,
        }
    }
}

/// Method selector as exposed on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MethodSel {
    A,
    B,
    C,
}

impl MethodSel {
    pub fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "a" | "A" | "inexact_newton" => Ok(MethodSel::A),
            "b" | "B" | "hessian_model" | "hessian_model_sparse" => Ok(MethodSel::B),
            "c" | "C" | "newton_model" => Ok(MethodSel::C),
            _ => Err(format!("unknown method `{s}` (expected a|b|c)")),
        }
    }
}

/// Benchmark problem collection.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SetChoice {
    AppB,
    AppC,
    AppD,
    Custom,
}

impl SetChoice {
    pub fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "appB" | "appb" => Ok(SetChoice::AppB),
            "appC" | "appc" => Ok(SetChoice::AppC),
            "appD" | "appd" => Ok(SetChoice::AppD),
            _ => Err(format!("unknown set `{s}` (expected appB|appC|appD)")),
        }
    }
}

/// Problem names belonging to each built-in benchmark set.
pub fn set_problems(set: SetChoice) -> Vec<&'static str> {
    match set {
        SetChoice::AppB => vec![
            "ARWHEAD_10",
            "BEALE_2",
            "CUBE_2",
            "DQDRTIC_10",
            "DIXON3DQ_10",
            "TRIDIA_10",
            "HILBERTB_10",
            "ENGVAL2_3",
            "BOX3_3",
            "COSINE_10",
        ],
        SetChoice::AppC => vec![
            "TRIDIA_200",
            "COSINE_200",
            "ENGVAL1_200",
            "LIARWHD_100",
            "SROSENBR_50",
            "DQRTIC_10",
            "EDENSCH_200",
        ],
        SetChoice::AppD => vec![
            "SROSENBR_50",
            "SROSENBR_100",
            "DIXON3DQ_200",
            "DQDRTIC_100",
            "LIARWHD_200",
            "TESTQUAD_100",
            "TRIDIA_200",
        ],
        SetChoice::Custom => vec![],
    }
}

/// Picks the concrete method for a selector: the interpolation method runs
/// dense on the small dense set and sparse wherever patterns make it viable.
pub fn resolve_method(sel: MethodSel, set: SetChoice, p: &ProblemDef) -> Method {
    match sel {
        MethodSel::A => Method::InexactNewton,
        MethodSel::C => Method::NewtonModel,
        MethodSel::B => match set {
            SetChoice::AppB => Method::HessianModel,
            SetChoice::AppC | SetChoice::AppD => Method::HessianModelSparse,
            SetChoice::Custom => {
                if p.pattern.is_some() && p.n > 30 {
                    Method::HessianModelSparse
                } else {
                    Method::HessianModel
                }
            }
        },
    }
}

/// One solver's profile: fraction of problems solved within factor τ of best.
#[derive(Clone, Debug)]
pub struct ProfileCurve {
    pub solver: String,
    pub taus: Vec<f64>,
    pub rho: Vec<f64>,
}

fn row_ratios(row: &[f64]) -> Option<Vec<f64>> {
    let min = row.iter().copied().filter(|v| v.is_finite()).fold(f64::INFINITY, f64::min);
    if !min.is_finite() {
        return None;
    }
    Some(row.iter().map(|&v| if v == min { 1.0 } else { v / min }).collect())
}

/// Geometric grid of 64 points from 1 to the largest finite performance ratio.
pub fn tau_grid(t: &[Vec<f64>]) -> Vec<f64> {
    let mut rmax = 1.0f64;
    for row in t {
        if let Some(ratios) = row_ratios(row) {
            for r in ratios {
                if r.is_finite() && r > rmax {
                    rmax = r;
                }
            }
        }
    }
    (0..64).map(|i| rmax.powf(i as f64 / 63.0)).collect()
}

/// Computes profile curves from a problems-by-solvers cost table. Failures
/// are ∞; rows no solver finished are warned about and can satisfy no τ,
/// but the denominator stays the full problem count.
pub fn performance_profile(
    t: &[Vec<f64>],
    solvers: &[String],
    taus: &[f64],
    row_labels: &[String],
) -> Result<Vec<ProfileCurve>> {
    if t.len() != row_labels.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} table rows but {} labels",
            t.len(),
            row_labels.len()
        )));
    }
    for row in t {
        if row.len() != solvers.len() {
            return Err(Error::DimensionMismatch(format!(
                "table row has {} entries for {} solvers",
                row.len(),
                solvers.len()
            )));
        }
    }
    let mut kept: Vec<Vec<f64>> = Vec::new();
    for (row, label) in t.iter().zip(row_labels) {
        match row_ratios(row) {
            Some(r) => kept.push(r),
            None => eprintln!("warning: no solver solved {label}; it counts toward no curve"),
        }
    }
    if kept.is_empty() {
        return Err(Error::EmptyInput("no problem was solved by any solver".into()));
    }
    let denom = t.len() as f64;
    Ok(solvers
        .iter()
        .enumerate()
        .map(|(j, solver)| {
            let rho = taus
                .iter()
                .map(|&tau| kept.iter().filter(|r| r[j] <= tau).count() as f64 / denom)
                .collect();
            ProfileCurve { solver: solver.clone(), taus: taus.to_vec(), rho }
        })
        .collect())
}

/// Median with the usual even-length mean; infinities propagate.
pub fn median(mut v: Vec<f64>) -> f64 {
    assert!(!v.is_empty(), "median of no values");
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

/// One line of runs.csv.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvRow {
    pub problem: String,
    pub n: usize,
    pub method: String,
    pub seed: u64,
    pub status: String,
    pub iters: u64,
    pub hvp: u64,
    pub fevals: u64,
    pub gevals: u64,
    pub final_f: f64,
    pub final_gnorm: f64,
    pub wall_ms: f64,
}

pub const RUNS_HEADER: &str =
    "problem,n,method,seed,status,iters,hvp,fevals,gevals,final_f,final_gnorm,wall_ms";

/// One completed run inside a suite.
#[derive(Debug)]
pub struct SuiteRun {
    pub problem: String,
    pub n: usize,
    pub seed: u64,
    pub record: RunRecord,
}

pub fn csv_rows(runs: &[SuiteRun]) -> Vec<CsvRow> {
    runs.iter()
        .map(|r| CsvRow {
            problem: r.problem.clone(),
            n: r.n,
            method: r.record.method.label().to_string(),
            seed: r.seed,
            status: r.record.status.label().to_string(),
            iters: r.record.counters.n_iter,
            hvp: r.record.counters.n_hvp,
            fevals: r.record.counters.n_f,
            gevals: r.record.counters.n_grad,
            final_f: r.record.final_f,
            final_gnorm: r.record.final_grad_norm,
            wall_ms: r.record.wall_ms,
        })
        .collect()
}

pub fn write_runs_csv(rows: &[CsvRow], w: &mut impl Write) -> io::Result<()> {
    writeln!(w, "{RUNS_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{:.3}",
            r.problem,
            r.n,
            r.method,
            r.seed,
            r.status,
            r.iters,
            r.hvp,
            r.fevals,
            r.gevals,
            r.final_f,
            r.final_gnorm,
            r.wall_ms
        )?;
    }
    Ok(())
}

pub fn parse_runs_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == RUNS_HEADER => {}
        _ => return Err(Error::EmptyInput("runs csv missing expected header".into())),
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 12 {
            return Err(Error::DimensionMismatch(format!(
                "runs csv line {}: {} fields, expected 12",
                i + 2,
                fields.len()
            )));
        }
        let bad = |what: &str| {
            Error::DimensionMismatch(format!("runs csv line {}: bad {what}", i + 2))
        };
        rows.push(CsvRow {
            problem: fields[0].to_string(),
            n: fields[1].parse().map_err(|_| bad("n"))?,
            method: fields[2].to_string(),
            seed: fields[3].parse().map_err(|_| bad("seed"))?,
            status: fields[4].to_string(),
            iters: fields[5].parse().map_err(|_| bad("iters"))?,
            hvp: fields[6].parse().map_err(|_| bad("hvp"))?,
            fevals: fields[7].parse().map_err(|_| bad("fevals"))?,
            gevals: fields[8].parse().map_err(|_| bad("gevals"))?,
            final_f: fields[9].parse().map_err(|_| bad("final_f"))?,
            final_gnorm: fields[10].parse().map_err(|_| bad("final_gnorm"))?,
            wall_ms: fields[11].parse().map_err(|_| bad("wall_ms"))?,
        });
    }
    Ok(rows)
}

/// Per-problem median costs in first-appearance order.
#[derive(Clone, Debug)]
pub struct MetricTable {
    pub problems: Vec<String>,
    pub methods: Vec<String>,
    pub t: Vec<Vec<f64>>,
}

pub fn metric_table(rows: &[CsvRow], metric: Metric) -> MetricTable {
    let mut problems: Vec<String> = Vec::new();
    let mut methods: Vec<String> = Vec::new();
    for r in rows {
        if !problems.contains(&r.problem) {
            problems.push(r.problem.clone());
        }
        if !methods.contains(&r.method) {
            methods.push(r.method.clone());
        }
    }
    let mut cells: Vec<Vec<Vec<f64>>> = vec![vec![Vec::new(); methods.len()]; problems.len()];
    for r in rows {
        let i = problems.iter().position(|p| p == &r.problem).unwrap();
        let j = methods.iter().position(|m| m == &r.method).unwrap();
        cells[i][j].push(metric.from_row(r));
    }
    let t = cells
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|vals| if vals.is_empty() { f64::INFINITY } else { median(vals) })
                .collect()
        })
        .collect();
    MetricTable { problems, methods, t }
}

/// Recomputes profile curves from raw run rows.
pub fn profile_from_rows(rows: &[CsvRow], metric: Metric) -> Result<Vec<ProfileCurve>> {
    let tab = metric_table(rows, metric);
    let taus = tau_grid(&tab.t);
    performance_profile(&tab.t, &tab.methods, &taus, &tab.problems)
}

pub fn write_profile_csv(curves: &[ProfileCurve], w: &mut impl Write) -> io::Result<()> {
    writeln!(w, "solver,tau,rho")?;
    for c in curves {
        for (tau, rho) in c.taus.iter().zip(&c.rho) {
            writeln!(w, "{},{},{}", c.solver, tau, rho)?;
        }
    }
    Ok(())
}

/// Machine-readable digest of one suite invocation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Summary {
    pub metric: String,
    pub seeds: u64,
    pub methods: Vec<String>,
    pub problems: Vec<String>,
    pub medians: Vec<SummaryRow>,
    pub converged: u64,
    pub total: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SummaryRow {
    pub problem: String,
    pub method: String,
    pub median: Option<f64>,
}

pub fn write_summary_json(summary: &Summary, w: &mut impl Write) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *w, summary)?;
    writeln!(w)
}

/// Everything a suite invocation produces.
#[derive(Debug)]
pub struct SuiteResult {
    pub runs: Vec<SuiteRun>,
    pub rows: Vec<CsvRow>,
    pub curves: Vec<ProfileCurve>,
    pub summary: Summary,
}

/// Runs every (problem, method, seed) combination in parallel and aggregates
/// per-problem medians into profile curves.
pub fn run_suite(
    problems: &[&ProblemDef],
    sels: &[MethodSel],
    set: SetChoice,
    seeds: u64,
    metric: Metric,
    base: &SolverConfig,
) -> SuiteResult {
    let mut tasks: Vec<(usize, MethodSel, u64)> = Vec::new();
    for (pi, _) in problems.iter().enumerate() {
        for &sel in sels {
            for seed in 0..seeds.max(1) {
                tasks.push((pi, sel, seed));
            }
        }
    }
    let runs: Vec<SuiteRun> = tasks
        .par_iter()
        .map(|&(pi, sel, seed)| {
            let p = problems[pi];
            let mut cfg = base.clone();
            cfg.method = resolve_method(sel, set, p);
            cfg.seed = seed;
            let record = run(p, &cfg);
            SuiteRun { problem: p.name.clone(), n: p.n, seed, record }
        })
        .collect();
    let rows = csv_rows(&runs);
    let curves = match profile_from_rows(&rows, metric) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("warning: no profile emitted: {e}");
            Vec::new()
        }
    };
    let tab = metric_table(&rows, metric);
    let mut medians = Vec::new();
    for (i, problem) in tab.problems.iter().enumerate() {
        for (j, method) in tab.methods.iter().enumerate() {
            let m = tab.t[i][j];
            medians.push(SummaryRow {
                problem: problem.clone(),
                method: method.clone(),
                median: m.is_finite().then_some(m),
            });
        }
    }
    let summary = Summary {
        metric: metric.label().to_string(),
        seeds: seeds.max(1),
        methods: tab.methods.clone(),
        problems: tab.problems.clone(),
        medians,
        converged: rows.iter().filter(|r| r.status == "converged").count() as u64,
        total: rows.len() as u64,
    };
    SuiteResult { runs, rows, curves, summary }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{find, registry};

    fn labels(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn hand_enumerated_two_by_two_profile() {
        let t = vec![vec![1.0, 2.0], vec![4.0, 2.0]];
        let curves = performance_profile(
            &t,
            &labels(&["s1", "s2"]),
            &[1.0, 2.0],
            &labels(&["p1", "p2"]),
        )
        .unwrap();
        assert_eq!(curves[0].rho, vec![0.5, 1.0]);
        assert_eq!(curves[1].rho, vec![0.5, 1.0]);
    }

    #[test]
    fn single_solver_counts_fraction_of_finite_runs() {
        let t = vec![vec![1.0], vec![f64::INFINITY], vec![3.0]];
        let curves =
            performance_profile(&t, &labels(&["s"]), &[1.0, 5.0], &labels(&["p1", "p2", "p3"]))
                .unwrap();
        for rho in &curves[0].rho {
            assert!((rho - 2.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn always_failing_solver_has_zero_curve() {
        let t = vec![vec![1.0, f64::INFINITY], vec![2.0, f64::INFINITY]];
        let curves = performance_profile(
            &t,
            &labels(&["good", "bad"]),
            &[1.0, 10.0, 1e6],
            &labels(&["p1", "p2"]),
        )
        .unwrap();
        assert!(curves[0].rho.iter().all(|&r| r == 1.0));
        assert!(curves[1].rho.iter().all(|&r| r == 0.0));
    }

    #[test]
    fn all_failed_table_is_rejected() {
        let t = vec![vec![f64::INFINITY, f64::INFINITY]];
        let err = performance_profile(&t, &labels(&["a", "b"]), &[1.0], &labels(&["p"]));
        assert!(matches!(err, Err(Error::EmptyInput(_))));
    }

    #[test]
    fn tau_grid_is_geometric_from_one_to_worst_ratio() {
        let t = vec![vec![1.0, 8.0]];
        let taus = tau_grid(&t);
        assert_eq!(taus.len(), 64);
        assert_eq!(taus[0], 1.0);
        assert!((taus[63] - 8.0).abs() < 1e-12);
        assert!(taus.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn median_averages_even_lengths_and_keeps_infinities() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(median(vec![1.0, f64::INFINITY]), f64::INFINITY);
        assert_eq!(median(vec![1.0, 2.0, f64::INFINITY]), 2.0);
    }

    #[test]
    fn runs_csv_round_trips_byte_for_byte() {
        let rows = vec![
            CsvRow {
                problem: "BEALE_2".into(),
                n: 2,
                method: "inexact_newton".into(),
                seed: 0,
                status: "converged".into(),
                iters: 9,
                hvp: 17,
                fevals: 12,
                gevals: 10,
                final_f: 3.25e-13,
                final_gnorm: 7.5e-7,
                wall_ms: 0.0,
            },
            CsvRow {
                problem: "CUBE_2".into(),
                n: 2,
                method: "newton_model".into(),
                seed: 1,
                status: "max_iter".into(),
                iters: 2000,
                hvp: 2010,
                fevals: 4100,
                gevals: 2001,
                final_f: f64::NAN,
                final_gnorm: f64::INFINITY,
                wall_ms: 0.0,
            },
        ];
        let mut buf = Vec::new();
        write_runs_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let parsed = parse_runs_csv(&text).unwrap();
        let mut buf2 = Vec::new();
        write_runs_csv(&parsed, &mut buf2).unwrap();
        assert_eq!(text.as_bytes(), buf2.as_slice());
    }

    #[test]
    fn csv_parser_rejects_malformed_input() {
        assert!(parse_runs_csv("nonsense\n").is_err());
        let text = format!("{RUNS_HEADER}\nBEALE_2,2,a,0,converged,1,1\n");
        assert!(parse_runs_csv(&text).is_err());
    }

    #[test]
    fn suite_produces_ordered_rows_and_monotone_curves() {
        let reg = registry();
        let problems = vec![find(&reg, "BEALE_2").unwrap(), find(&reg, "CUBE_2").unwrap()];
        let cfg = SolverConfig::default();
        let out = run_suite(
            &problems,
            &[MethodSel::A, MethodSel::B],
            SetChoice::Custom,
            2,
            Metric::Hvp,
            &cfg,
        );
        assert_eq!(out.rows.len(), 8);
        assert_eq!(out.rows[0].problem, "BEALE_2");
        assert_eq!(out.rows[0].method, "inexact_newton");
        assert_eq!(out.rows[0].seed, 0);
        assert_eq!(out.rows[1].seed, 1);
        assert_eq!(out.rows[2].method, "hessian_model");
        assert_eq!(out.rows[4].problem, "CUBE_2");
        assert_eq!(out.summary.total, 8);
        assert_eq!(out.summary.converged, 8);
        assert_eq!(out.curves.len(), 2);
        for c in &out.curves {
            assert!(c.rho.windows(2).all(|w| w[0] <= w[1]));
            assert!(c.rho.iter().all(|&r| (0.0..=1.0).contains(&r)));
            assert_eq!(*c.rho.last().unwrap(), 1.0);
        }
    }

    #[test]
    fn profile_recomputed_from_csv_is_byte_identical() {
        let reg = registry();
        let problems = vec![find(&reg, "BEALE_2").unwrap(), find(&reg, "TRIDIA_10").unwrap()];
        let cfg = SolverConfig::default();
        let out = run_suite(
            &problems,
            &[MethodSel::A, MethodSel::C],
            SetChoice::Custom,
            2,
            Metric::Iters,
            &cfg,
        );
        let mut direct = Vec::new();
        write_profile_csv(&out.curves, &mut direct).unwrap();

        let mut runs_buf = Vec::new();
        write_runs_csv(&out.rows, &mut runs_buf).unwrap();
        let parsed = parse_runs_csv(&String::from_utf8(runs_buf).unwrap()).unwrap();
        let recomputed = profile_from_rows(&parsed, Metric::Iters).unwrap();
        let mut indirect = Vec::new();
        write_profile_csv(&recomputed, &mut indirect).unwrap();
        assert_eq!(direct, indirect);
    }

    #[test]
    fn summary_serializes_infinite_medians_as_null() {
        let summary = Summary {
            metric: "hvp".into(),
            seeds: 3,
            methods: vec!["inexact_newton".into()],
            problems: vec!["P".into()],
            medians: vec![SummaryRow { problem: "P".into(), method: "inexact_newton".into(), median: None }],
            converged: 0,
            total: 3,
        };
        let mut buf = Vec::new();
        write_summary_json(&summary, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("\"median\": null"));
        let back: Summary = serde_json::from_str(&text).unwrap();
        assert_eq!(back.total, 3);
    }

    #[test]
    fn selector_parsing_accepts_letters_and_full_names() {
        assert_eq!(MethodSel::from_str("a").unwrap(), MethodSel::A);
        assert_eq!(MethodSel::from_str("hessian_model").unwrap(), MethodSel::B);
        assert_eq!(MethodSel::from_str("newton_model").unwrap(), MethodSel::C);
        assert!(MethodSel::from_str("z").is_err());
        assert_eq!(Metric::from_str("hvp").unwrap(), Metric::Hvp);
        assert!(Metric::from_str("time").is_err());
        assert_eq!(SetChoice::from_str("appB").unwrap(), SetChoice::AppB);
        assert!(SetChoice::from_str("appE").is_err());
    }

    #[test]
    fn builtin_sets_name_registered_problems() {
        let reg = registry();
        for set in [SetChoice::AppB, SetChoice::AppC, SetChoice::AppD] {
            let names = set_problems(set);
            assert!(!names.is_empty());
            for name in names {
                assert!(find(&reg, name).is_some(), "{name} missing from registry");
            }
        }
        let p = find(&reg, "TRIDIA_200").unwrap();
        assert_eq!(resolve_method(MethodSel::B, SetChoice::AppC, p), Method::HessianModelSparse);
        assert_eq!(resolve_method(MethodSel::B, SetChoice::Custom, p), Method::HessianModelSparse);
        let small = find(&reg, "BEALE_2").unwrap();
        assert_eq!(resolve_method(MethodSel::B, SetChoice::Custom, small), Method::HessianModel);
        assert_eq!(resolve_method(MethodSel::B, SetChoice::AppB, small), Method::HessianModel);
    }
}
