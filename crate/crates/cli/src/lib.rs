//! Command runner behind the `fracrelax` binary.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use fracrelax::config::{self, SolverConfig};
use fracrelax::fractional::{caputo_derivative, GridFunction, TimeGrid};
use fracrelax::geometry::FiniteControlSet;
use fracrelax::mild::{solve_with_kernel, MildKernel};
use fracrelax::optimizer::{
    relaxation_experiment, solve_p, solve_rp, ExperimentReport, SolveReport,
};
use fracrelax::problem::{ControlSignal, CostSpec, ProblemSpec};
use fracrelax::relaxation::{bipolar_envelope, restricted_cost};
use fracrelax::sobolev::{s_alpha, t_alpha, Method};
use fracrelax::special::{density_moment, gamma_fn, mittag_leffler};
use fracrelax::{Error, Result};
use log::info;
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    SolveP,
    SolveRp,
    RelaxExp,
    Verify,
    Bench,
}

impl std::str::FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "solve-p" => Command::SolveP,
            "solve-rp" => Command::SolveRp,
            "relax-exp" => Command::RelaxExp,
            "verify" => Command::Verify,
            "bench" => Command::Bench,
            _ => {
                return Err(format!(
                    "unknown command `{s}` (solve-p, solve-rp, relax-exp, verify, bench)"
                ))
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Problem file; `verify` and `bench` fall back to the built-in benchmark.
    pub problem: Option<PathBuf>,
    pub command: Command,
    /// Overrides `solver.grid`.
    pub grid: Option<usize>,
    /// Overrides `solver.n_list`.
    pub n_list: Option<Vec<usize>>,
    pub seed: u64,
    /// Overrides `solver.gap_tol`.
    pub tol: Option<f64>,
    pub out: PathBuf,
    /// Fill the `runtime_ms` column (makes `report.csv` run-dependent).
    pub timings: bool,
}

/// Process exit status of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// The run finished but a check failed.
    ExperimentFailure,
}

impl Outcome {
    pub fn code(self) -> i32 {
        match self {
            Outcome::Success => 0,
            Outcome::ExperimentFailure => 2,
        }
    }
}

fn load(cfg: &RunConfig) -> Result<(ProblemSpec, SolverConfig)> {
    let (spec, mut solver) = match &cfg.problem {
        Some(p) => config::load_problem(p)?,
        None if matches!(cfg.command, Command::Verify | Command::Bench) => {
            config::parse_problem(config::benchmark_json())?
        }
        None => {
            return Err(Error::InvalidArgument(
                "--problem is required for this command".into(),
            ))
        }
    };
    if let Some(n) = cfg.grid {
        solver.grid = n;
    }
    if let Some(list) = &cfg.n_list {
        solver.n_list = list.clone();
    }
    if let Some(t) = cfg.tol {
        solver.gap_tol = t;
    }
    if solver.grid < 2 {
        return Err(Error::InvalidArgument(format!(
            "grid N = {} must be at least 2",
            solver.grid
        )));
    }
    Ok((spec, solver))
}

/// Runs one command and writes its artifacts into `cfg.out`.
pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    let (spec, solver) = load(cfg)?;
    fs::create_dir_all(&cfg.out)?;
    let grid = TimeGrid::new(spec.horizon, solver.grid)?;
    match cfg.command {
        Command::SolveP => {
            let rep = solve_p(&spec, &grid, solver.p_budget(), cfg.seed, solver.options())?;
            write_solution(&cfg.out, &rep)?;
            write_log(&cfg.out, &rep)?;
            let mut s = String::new();
            writeln!(s, "command: solve-p").unwrap();
            values_line(&mut s, "J", &rep.j);
            writeln!(s, "aggregate: {:e}", rep.aggregate).unwrap();
            writeln!(s, "evaluations: {}", rep.evaluations).unwrap();
            fs::write(cfg.out.join("summary.txt"), s)?;
            Ok(Outcome::Success)
        }
        Command::SolveRp => {
            let rep = solve_rp(&spec, &grid, solver.rp_budget(), cfg.seed, solver.options())?;
            write_solution(&cfg.out, &rep)?;
            write_log(&cfg.out, &rep)?;
            let mut s = String::new();
            writeln!(s, "command: solve-rp").unwrap();
            values_line(&mut s, "J**", &rep.j);
            if let Some(w) = &rep.j_weighted {
                values_line(&mut s, "J_weighted", w);
            }
            writeln!(s, "aggregate: {:e}", rep.aggregate).unwrap();
            writeln!(s, "stalled: {}", rep.stalled).unwrap();
            writeln!(s, "evaluations: {}", rep.evaluations).unwrap();
            fs::write(cfg.out.join("summary.txt"), s)?;
            Ok(if rep.stalled {
                Outcome::ExperimentFailure
            } else {
                Outcome::Success
            })
        }
        Command::RelaxExp => {
            let rep = relaxation_experiment(&spec, &grid, &solver.experiment(cfg.seed))?;
            fs::write(cfg.out.join("report.csv"), rep.to_csv(cfg.timings))?;
            write_solution(&cfg.out, &rep.rp)?;
            fs::write(cfg.out.join("summary.txt"), experiment_summary(&rep))?;
            if rep.failures.is_empty() {
                Ok(Outcome::Success)
            } else {
                for f in &rep.failures {
                    log::warn!("experiment check failed: {f}");
                }
                Ok(Outcome::ExperimentFailure)
            }
        }
        Command::Verify => {
            let checks = verify(&spec)?;
            let mut table = String::from("check,value,tolerance,status\n");
            for c in &checks {
                writeln!(
                    table,
                    "{},{:e},{:e},{}",
                    c.name,
                    c.value,
                    c.tol,
                    if c.pass { "pass" } else { "FAIL" }
                )
                .unwrap();
                println!(
                    "{:<40} {:>12.3e} <= {:<9.1e} {}",
                    c.name,
                    c.value,
                    c.tol,
                    if c.pass { "pass" } else { "FAIL" }
                );
            }
            fs::write(cfg.out.join("verify.csv"), table)?;
            Ok(if checks.iter().all(|c| c.pass) {
                Outcome::Success
            } else {
                Outcome::ExperimentFailure
            })
        }
        Command::Bench => {
            let rows = bench(&spec, &solver, cfg.seed)?;
            let mut table = String::from("operation,runtime_ms\n");
            for (name, ms) in &rows {
                writeln!(table, "{name},{ms:.3}").unwrap();
            }
            print!("{table}");
            fs::write(cfg.out.join("bench.csv"), table)?;
            Ok(Outcome::Success)
        }
    }
}

fn values_line(s: &mut String, label: &str, v: &[f64]) {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:e}")).collect();
    writeln!(s, "{label}: {}", parts.join(" ")).unwrap();
}

fn experiment_summary(rep: &ExperimentReport) -> String {
    let mut s = String::new();
    writeln!(s, "command: relax-exp").unwrap();
    values_line(&mut s, "J** (RP)", &rep.rp.j);
    writeln!(s, "RP aggregate: {:e}", rep.rp.aggregate).unwrap();
    if let Some(last) = rep.rows.last() {
        writeln!(s, "P aggregate at N = {}: {:e}", last.n, last.p_value).unwrap();
        writeln!(s, "gap: {:e}", last.gap).unwrap();
    }
    writeln!(s, "fitted C (gap <= C/N): {:e}", rep.fitted_c).unwrap();
    s.push_str("N,window_sup,p_value\n");
    for r in &rep.rows {
        writeln!(s, "{},{:e},{:e}", r.n, r.window_sup, r.p_value).unwrap();
    }
    if rep.failures.is_empty() {
        s.push_str("status: pass\n");
    } else {
        for f in &rep.failures {
            writeln!(s, "failure: {f}").unwrap();
        }
        s.push_str("status: FAIL\n");
    }
    s
}

/// `t, x_1..x_n, u<i>_<k>..` with each node carrying the control of the
/// cell that starts there (the last node repeats the last cell).
fn write_solution(dir: &Path, rep: &SolveReport) -> Result<()> {
    let x = &rep.trajectory;
    let n = x.dim();
    let mut s = String::from("t");
    for k in 0..n {
        write!(s, ",x{}", k + 1).unwrap();
    }
    for (i, ch) in rep.controls.iter().enumerate() {
        for k in 0..ch.first().map_or(0, |u| u.len()) {
            write!(s, ",u{}_{}", i + 1, k + 1).unwrap();
        }
    }
    s.push('\n');
    let cells = x.grid.cells();
    for j in 0..=cells {
        write!(s, "{:e}", x.grid.t(j)).unwrap();
        for v in x.values[j].iter() {
            write!(s, ",{v:e}").unwrap();
        }
        for ch in &rep.controls {
            for v in ch[j.min(cells - 1)].iter() {
                write!(s, ",{v:e}").unwrap();
            }
        }
        s.push('\n');
    }
    fs::write(dir.join("solution.csv"), s)?;
    Ok(())
}

fn write_log(dir: &Path, rep: &SolveReport) -> Result<()> {
    let mut s = String::from("iteration,objective\n");
    for r in &rep.log {
        writeln!(s, "{},{:e}", r.iteration, r.objective).unwrap();
    }
    fs::write(dir.join("iterations.csv"), s)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tol: f64,
    pub pass: bool,
}

fn check(name: impl Into<String>, value: f64, tol: f64) -> Check {
    Check {
        name: name.into(),
        value,
        tol,
        pass: value <= tol,
    }
}

fn max_abs(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax()
}

/// Oracle-pair and normalization checks, plus dual-method agreement of
/// `S_α`, `T_α` for the loaded problem.
pub fn verify(spec: &ProblemSpec) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let mut err: f64 = 0.0;
    for z in [-5.0, -1.0, 0.5, 2.0] {
        err = err.max((mittag_leffler(1.0, 1.0, z)? - f64::exp(z)).abs() / f64::exp(z));
    }
    out.push(check("mittag_leffler(1,1,z) vs exp(z)", err, 1e-12));
    // e·erfc(1)
    let erfc_half = (mittag_leffler(0.5, 1.0, -1.0)? - 0.427_583_576_155_807).abs();
    out.push(check(
        "mittag_leffler(1/2,1,-1) vs e*erfc(1)",
        erfc_half,
        1e-7,
    ));
    for alpha in [0.3, 0.5, 0.7, 0.9] {
        let m0 = (density_moment(alpha, 0)? - 1.0).abs();
        let m1 = (density_moment(alpha, 1)? - 1.0 / gamma_fn(1.0 + alpha)?).abs();
        out.push(check(format!("density mass alpha={alpha}"), m0, 1e-6));
        out.push(check(format!("density mean alpha={alpha}"), m1, 1e-6));
    }
    let a = spec.horizon;
    for (label, f) in [("S", s_alpha as fn(_, _, _, _) -> _), ("T", t_alpha)] {
        let mut e: f64 = 0.0;
        for frac in [0.1, 0.5, 1.0] {
            let t = frac * a;
            let x = f(&spec.triple, spec.alpha, t, Method::Series)?;
            let y = f(&spec.triple, spec.alpha, t, Method::Subordination)?;
            e = e.max(max_abs(&x, &y));
        }
        out.push(check(
            format!("{label}_alpha series vs subordination"),
            e,
            1e-6,
        ));
    }
    let grid = TimeGrid::new(1.0, 400)?;
    let lin = GridFunction::from_scalar(grid, |t| t);
    let d = caputo_derivative(&lin, 0.5)?;
    let g = gamma_fn(1.5)?;
    let e = grid
        .times()
        .iter()
        .zip(d.scalar())
        .fold(0.0f64, |m, (t, v)| m.max((v - t.sqrt() / g).abs()));
    out.push(check("caputo(t), alpha=1/2, N=400", e, 5e-3));
    let konst = caputo_derivative(&GridFunction::from_scalar(grid, |_| 3.0), 0.5)?;
    out.push(check("caputo(const)", konst.sup_norm(), 0.0));
    out.push(check(
        "mild closed form, N=200",
        closed_form_error(200)?,
        1e-4,
    ));
    let x = DVector::zeros(1);
    let mut cost = CostSpec::zero(1);
    cost.q = fracrelax::problem::ControlCost::Quadratic {
        weight: -1.0,
        center: vec![0.0],
    };
    let atoms = FiniteControlSet::scalar(&[-1.0, -0.2, 0.4, 1.0])?;
    let env = bipolar_envelope(&restricted_cost(&cost, &x, atoms.base_atoms()))?;
    let mut e: f64 = 0.0;
    for k in 0..=1000 {
        let u = -1.0 + 2.0 * k as f64 / 1000.0;
        e = e.max(
            (env.eval(&DVector::from_element(1, u))
                - pair_oracle(&[-1.0, -0.2, 0.4, 1.0], |v| -v * v, u))
            .abs(),
        );
    }
    out.push(check("bipolar envelope vs pair oracle", e, 1e-10));
    Ok(out)
}

/// `min` over atom pairs bracketing `u` of the chord value.
fn pair_oracle(atoms: &[f64], g: impl Fn(f64) -> f64, u: f64) -> f64 {
    let mut best = f64::INFINITY;
    for &a in atoms {
        for &b in atoms {
            if a <= u && u <= b {
                let v = if b > a {
                    let l = (u - a) / (b - a);
                    (1.0 - l) * g(a) + l * g(b)
                } else {
                    g(a)
                };
                best = best.min(v);
            }
        }
    }
    best
}

fn closed_form_error(cells: usize) -> Result<f64> {
    let spec = config::parse_problem(config::benchmark_json())?.0;
    let grid = TimeGrid::new(1.0, cells)?;
    let kernel = MildKernel::new(&spec, &grid)?;
    let u = ControlSignal::constant(grid, 1, DVector::from_element(1, 1.0));
    let sol = solve_with_kernel(&spec, &kernel, &u, Default::default())?;
    let g = gamma_fn(1.5)?;
    Ok(grid
        .times()
        .iter()
        .zip(sol.x.scalar())
        .fold(0.0f64, |m, (t, v)| m.max((v - t.sqrt() / g).abs())))
}

fn timed<T>(rows: &mut Vec<(String, f64)>, name: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    let start = Instant::now();
    let v = f()?;
    let ms = start.elapsed().as_secs_f64() * 1e3;
    info!("bench {name}: {ms:.3} ms");
    rows.push((name.to_string(), ms));
    Ok(v)
}

/// Wall-clock timings of the main operations on the loaded problem.
pub fn bench(spec: &ProblemSpec, solver: &SolverConfig, seed: u64) -> Result<Vec<(String, f64)>> {
    let mut rows = Vec::new();
    let alpha = spec.alpha;
    let a = spec.horizon;
    timed(&mut rows, "special.mittag_leffler_x1000", || {
        (0..1000).try_for_each(|k| mittag_leffler(alpha, 1.0, -(k as f64) / 100.0).map(drop))
    })?;
    timed(&mut rows, "special.density_moment", || {
        density_moment(alpha, 1)
    })?;
    timed(&mut rows, "sobolev.s_alpha_series", || {
        s_alpha(&spec.triple, alpha, a, Method::Series)
    })?;
    timed(&mut rows, "sobolev.s_alpha_subordination", || {
        s_alpha(&spec.triple, alpha, a, Method::Subordination)
    })?;
    let grid = TimeGrid::new(a, solver.grid)?;
    let kernel = timed(&mut rows, "mild.kernel", || MildKernel::new(spec, &grid))?;
    let u = ControlSignal::constant(grid, spec.r(), spec.constraint.base_atoms()[0].clone());
    timed(&mut rows, "mild.solve", || {
        solve_with_kernel(spec, &kernel, &u, solver.options())
    })?;
    let fine = TimeGrid::new(1.0, 1000)?;
    let f = GridFunction::from_scalar(fine, |t| t.sin());
    timed(&mut rows, "fractional.caputo_n1000", || {
        caputo_derivative(&f, alpha)
    })?;
    timed(&mut rows, "optimizer.solve_rp", || {
        solve_rp(spec, &grid, solver.rp_budget(), seed, solver.options())
    })?;
    timed(&mut rows, "optimizer.solve_p", || {
        solve_p(spec, &grid, solver.p_budget(), seed, solver.options())
    })?;
    Ok(rows)
}
