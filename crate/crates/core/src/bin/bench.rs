use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hvp_model::bench::{
    parse_runs_csv, profile_from_rows, run_suite, set_problems, write_profile_csv,
    write_runs_csv, write_summary_json, Metric, MethodSel, SetChoice,
};
use hvp_model::cg::ForceRule;
use hvp_model::drivers::SolverConfig;
use hvp_model::newton_model::SafeguardMode;
use hvp_model::problems::{fd_check, find, registry, ProblemDef};
use hvp_model::rng::{unit_ball_sample, RngStream};

#[derive(Parser)]
#[command(name = "bench", about = "Benchmark runner for Hessian-free model-based solvers")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a suite and write runs.csv, a profile CSV, and summary.json
    Run(RunArgs),
    /// Recompute a profile CSV from an existing runs.csv
    Profile(ProfileArgs),
    /// Verify analytic gradients, products, and sparsity patterns
    Check,
}

#[derive(Args)]
struct RunArgs {
    /// Built-in problem set: appB, appC, or appD
    #[arg(long, conflicts_with = "problems")]
    set: Option<String>,
    /// Comma-separated problem names from the registry
    #[arg(long)]
    problems: Option<String>,
    /// Comma-separated methods: a (truncated Newton), b (model Hessian), c (model direction)
    #[arg(long, default_value = "a,b,c")]
    methods: String,
    /// Profile metric: hvp, iters, or fevals
    #[arg(long, default_value = "hvp")]
    metric: String,
    /// Seeds per (problem, method) pair
    #[arg(long, default_value_t = 3)]
    seeds: u64,
    /// Output directory
    #[arg(long, default_value = "bench-out")]
    out: PathBuf,
    /// CG stopping rule: sqrt or const:<value>
    #[arg(long, default_value = "sqrt")]
    force_rule: String,
    /// When the model direction is adjusted: deficit or always
    #[arg(long, default_value = "deficit")]
    safeguard: String,
    /// Record real wall-clock times instead of stable zeros
    #[arg(long)]
    timing: bool,
    /// Iteration cap per run
    #[arg(long, default_value_t = 2000)]
    max_iter: u64,
}

#[derive(Args)]
struct ProfileArgs {
    /// Existing runs.csv
    #[arg(long = "in")]
    input: PathBuf,
    /// Profile metric: hvp, iters, or fevals
    #[arg(long, default_value = "hvp")]
    metric: String,
    /// Output directory (defaults to the input's directory)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_force(s: &str) -> Result<ForceRule, String> {
    if s == "sqrt" {
        return Ok(ForceRule::Sqrt);
    }
    if let Some(v) = s.strip_prefix("const:") {
        return v
            .parse()
            .map(ForceRule::Const)
            .map_err(|_| format!("bad force-rule constant `{v}`"));
    }
    Err(format!("unknown force rule `{s}` (expected sqrt or const:<value>)"))
}

fn parse_safeguard(s: &str) -> Result<SafeguardMode, String> {
    match s {
        "deficit" => Ok(SafeguardMode::Deficit),
        "always" => Ok(SafeguardMode::Always),
        _ => Err(format!("unknown safeguard `{s}` (expected deficit|always)")),
    }
}

fn fail(msg: String) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    match Cli::parse().cmd {
        Cmd::Run(args) => cmd_run(args),
        Cmd::Profile(args) => cmd_profile(args),
        Cmd::Check => cmd_check(),
    }
}

fn cmd_run(args: RunArgs) -> ExitCode {
    let reg = registry();
    let (set, names) = match (&args.set, &args.problems) {
        (Some(s), None) => match SetChoice::from_str(s) {
            Ok(set) => (set, set_problems(set).iter().map(|n| n.to_string()).collect()),
            Err(e) => return fail(e),
        },
        (None, Some(list)) => {
            (SetChoice::Custom, list.split(',').map(|n| n.trim().to_string()).collect())
        }
        _ => return fail("pass exactly one of --set or --problems".into()),
    };
    let names: Vec<String> = names;
    let mut problems = Vec::new();
    for name in &names {
        match find(&reg, name) {
            Some(p) => problems.push(p),
            None => return fail(format!("unknown problem `{name}`")),
        }
    }
    let mut sels = Vec::new();
    for m in args.methods.split(',') {
        match MethodSel::from_str(m.trim()) {
            Ok(sel) => sels.push(sel),
            Err(e) => return fail(e),
        }
    }
    let metric = match Metric::from_str(&args.metric) {
        Ok(m) => m,
        Err(e) => return fail(e),
    };
    let force_rule = match parse_force(&args.force_rule) {
        Ok(f) => f,
        Err(e) => return fail(e),
    };
    let safeguard = match parse_safeguard(&args.safeguard) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    let cfg = SolverConfig {
        force_rule,
        safeguard,
        timing: args.timing,
        max_iter: args.max_iter,
        ..Default::default()
    };

    let out = run_suite(&problems, &sels, set, args.seeds, metric, &cfg);

    if let Err(e) = fs::create_dir_all(&args.out) {
        return fail(format!("cannot create {}: {e}", args.out.display()));
    }
    let runs_path = args.out.join("runs.csv");
    let profile_path = args.out.join(format!("profile_{}.csv", metric.label()));
    let summary_path = args.out.join("summary.json");
    let write = || -> std::io::Result<()> {
        let mut f = fs::File::create(&runs_path)?;
        write_runs_csv(&out.rows, &mut f)?;
        let mut f = fs::File::create(&profile_path)?;
        write_profile_csv(&out.curves, &mut f)?;
        let mut f = fs::File::create(&summary_path)?;
        write_summary_json(&out.summary, &mut f)?;
        Ok(())
    };
    if let Err(e) = write() {
        return fail(format!("write failed: {e}"));
    }

    let methods = &out.summary.methods;
    for (i, problem) in out.summary.problems.iter().enumerate() {
        let cells: Vec<String> = out.summary.medians
            [i * methods.len()..(i + 1) * methods.len()]
            .iter()
            .map(|row| match row.median {
                Some(m) => format!("{}={}", row.method, m),
                None => format!("{}=fail", row.method),
            })
            .collect();
        println!("{problem}: {}", cells.join(" "));
    }
    println!(
        "{} runs, {} converged; wrote {}, {}, {}",
        out.summary.total,
        out.summary.converged,
        runs_path.display(),
        profile_path.display(),
        summary_path.display()
    );

    if out.rows.iter().any(|r| r.status == "numeric_failure") {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

fn cmd_profile(args: ProfileArgs) -> ExitCode {
    let metric = match Metric::from_str(&args.metric) {
        Ok(m) => m,
        Err(e) => return fail(e),
    };
    let text = match fs::read_to_string(&args.input) {
        Ok(t) => t,
        Err(e) => return fail(format!("cannot read {}: {e}", args.input.display())),
    };
    let rows = match parse_runs_csv(&text) {
        Ok(r) => r,
        Err(e) => return fail(e.to_string()),
    };
    let curves = match profile_from_rows(&rows, metric) {
        Ok(c) => c,
        Err(e) => return fail(e.to_string()),
    };
    let dir = args
        .out
        .or_else(|| args.input.parent().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    if let Err(e) = fs::create_dir_all(&dir) {
        return fail(format!("cannot create {}: {e}", dir.display()));
    }
    let path = dir.join(format!("profile_{}.csv", metric.label()));
    let write = || -> std::io::Result<()> {
        let mut f = fs::File::create(&path)?;
        write_profile_csv(&curves, &mut f)
    };
    if let Err(e) = write() {
        return fail(format!("write failed: {e}"));
    }
    println!("wrote {}", path.display());
    ExitCode::SUCCESS
}

fn pattern_violation(p: &ProblemDef) -> Option<String> {
    let pattern = p.pattern.as_ref()?;
    let n = p.n;
    let x = &p.x0;
    let mut columns = Vec::with_capacity(n);
    let mut scale = 1.0f64;
    for j in 0..n {
        let e = hvp_model::Vector::from_fn(n, |i, _| if i == j { 1.0 } else { 0.0 });
        let col = p.hvp(x, &e);
        scale = scale.max(col.amax());
        columns.push(col);
    }
    for (j, col) in columns.iter().enumerate() {
        for i in 0..n {
            if !pattern.contains(i, j) && col[i].abs() > 1e-10 * scale {
                return Some(format!("H[{i},{j}] = {} outside declared pattern", col[i]));
            }
        }
    }
    None
}

fn cmd_check() -> ExitCode {
    let reg = registry();
    let mut rng = RngStream::new(0xc0ffee);
    let mut bad = 0usize;
    for p in &reg {
        let mut failures: Vec<String> = Vec::new();
        if let Err(report) = fd_check(p, &p.x0) {
            failures.extend(report.failures.iter().map(|f| format!("at x0: {f}")));
        }
        let nearby = &p.x0 + 0.1 * unit_ball_sample(&mut rng, p.n);
        if let Err(report) = fd_check(p, &nearby) {
            failures.extend(report.failures.iter().map(|f| format!("near x0: {f}")));
        }
        let u = unit_ball_sample(&mut rng, p.n);
        let v = unit_ball_sample(&mut rng, p.n);
        let hu = p.hvp(&p.x0, &u);
        let hv = p.hvp(&p.x0, &v);
        let asym = (u.dot(&hv) - v.dot(&hu)).abs();
        if asym > 1e-8 * (1.0 + hu.norm().max(hv.norm())) {
            failures.push(format!("product is not symmetric: |uᵀHv − vᵀHu| = {asym}"));
        }
        if let Some(msg) = pattern_violation(p) {
            failures.push(msg);
        }
        if failures.is_empty() {
            println!("ok   {}", p.name);
        } else {
            bad += 1;
            println!("FAIL {}", p.name);
            for f in failures {
                println!("     {f}");
            }
        }
    }
    if bad == 0 {
        println!("all {} problems pass", reg.len());
        ExitCode::SUCCESS
    } else {
        println!("{bad} problem(s) failed");
        ExitCode::FAILURE
    }
}
