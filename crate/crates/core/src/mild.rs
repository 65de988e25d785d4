//! Mild solutions by successive approximation, equation residuals, the
//! a-priori trajectory bound and the solution-map continuity probe.

use log::{debug, warn};
use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fractional::{caputo_derivative, GridFunction, ProductWeights, TimeGrid};
use crate::geometry::weak_distance;
use crate::problem::{ControlLaw, ProblemSpec};
use crate::sobolev::{norm2, s_alpha_auto, t_alpha_auto};
use crate::special::{gamma_fn, mittag_leffler};

/// Discretized solution operators for one problem on one grid.
///
/// Node `k` of the mild equation reads
/// `x_k = S(t_k)M(x₀ − h) + Σ_d T((d+½)h)L⁻¹ (w_d^L f⁺_{k−1−d} + w_d^R f⁻_{k−d})`,
/// with `f⁺_j`, `f⁻_{j+1}` the dynamics at the two ends of cell `j`.
#[derive(Debug, Clone)]
pub struct MildKernel {
    grid: TimeGrid,
    n: usize,
    /// `S(t_k) M`, column-major, one block per node.
    sm: Vec<f64>,
    /// `w_d^L T((d+½)h) L⁻¹` and `w_d^R T((d+½)h) L⁻¹`, one block per lag.
    cl: Vec<f64>,
    cr: Vec<f64>,
}

impl MildKernel {
    pub fn new(problem: &ProblemSpec, grid: &TimeGrid) -> Result<Self> {
        let n = problem.n();
        let triple = &problem.triple;
        let alpha = problem.alpha;
        let nn = n * n;
        let cells = grid.cells();
        let h = grid.step();
        let weights = ProductWeights::new(alpha, grid)?;
        let mut sm = Vec::with_capacity((cells + 1) * nn);
        for k in 0..=cells {
            let s = s_alpha_auto(triple, alpha, grid.t(k))? * triple.m();
            sm.extend_from_slice(s.as_slice());
        }
        let mut cl = Vec::with_capacity(cells * nn);
        let mut cr = Vec::with_capacity(cells * nn);
        for d in 0..cells {
            let tl = t_alpha_auto(triple, alpha, (d as f64 + 0.5) * h)? * triple.l_inv();
            cl.extend(tl.iter().map(|v| v * weights.left[d]));
            cr.extend(tl.iter().map(|v| v * weights.right[d]));
        }
        Ok(Self {
            grid: *grid,
            n,
            sm,
            cl,
            cr,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }
}

/// `out += A v` for a column-major `n×n` block.
#[inline]
fn gemv_acc(out: &mut [f64], a: &[f64], v: &[f64]) {
    let n = out.len();
    for (c, &vc) in v.iter().enumerate() {
        let col = &a[c * n..(c + 1) * n];
        for (o, &x) in out.iter_mut().zip(col) {
            *o += x * vc;
        }
    }
}

/// Solver tolerances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverOptions {
    /// Sup-norm update at which the iteration stops.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 200,
        }
    }
}

/// Converged trajectory with the control values actually applied.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MildSolution {
    pub x: GridFunction,
    /// `controls[i][j]`: value of channel `i` on solver cell `j`.
    pub controls: Vec<Vec<DVector<f64>>>,
    /// `h(x, B_r u_r)` at the fixed point.
    pub nonlocal: DVector<f64>,
    pub iterations: usize,
    pub last_update: f64,
}

/// Rough Lipschitz constant of the fixed-point map in the sup norm.
pub fn contraction_estimate(problem: &ProblemSpec) -> f64 {
    let t = &problem.triple;
    let k3 = problem.constraint.k3();
    let r = problem.r();
    let k = t.c2() * t.m0() * norm2(t.m());
    let br = norm2(&problem.channels[r - 1]);
    let sum_b: f64 = problem.channels.iter().map(norm2).sum();
    let g = t.c1() * t.c2() * t.m0() / gamma_fn(problem.alpha).unwrap_or(f64::INFINITY);
    let volterra = g * problem.horizon.powf(problem.alpha) / problem.alpha;
    let dyn_ = &problem.dynamics;
    let state = norm2(&dyn_.c) + dyn_.nonlinearity.lipschitz();
    let control = dyn_.d.iter().map(norm2).fold(0.0, f64::max);
    let h: f64 = problem.nonlocal.samples.iter().map(|(_, h)| norm2(h)).sum();
    let gn = problem
        .nonlocal
        .control
        .as_ref()
        .map_or(0.0, |(_, g)| norm2(g));
    k * (h + gn * br * k3) + volterra * (state + control * sum_b * k3)
}

fn retraction_radius(problem: &ProblemSpec) -> f64 {
    if problem.constraint.is_state_dependent() {
        apriori_bound(problem).map_or(f64::INFINITY, |b| b.l0)
    } else {
        f64::INFINITY
    }
}

/// Solves the mild equation on `grid` for the given control law.
pub fn solve_mild(
    problem: &ProblemSpec,
    law: &dyn ControlLaw,
    grid: &TimeGrid,
    opts: SolverOptions,
) -> Result<MildSolution> {
    let kernel = MildKernel::new(problem, grid)?;
    solve_with_kernel(problem, &kernel, law, opts)
}

/// As [`solve_mild`], reusing precomputed operators.
pub fn solve_with_kernel(
    problem: &ProblemSpec,
    kernel: &MildKernel,
    law: &dyn ControlLaw,
    opts: SolverOptions,
) -> Result<MildSolution> {
    if law.channels() != problem.r() {
        return Err(Error::Dimension(format!(
            "control law has {} channels, problem has {}",
            law.channels(),
            problem.r()
        )));
    }
    let factor = contraction_estimate(problem);
    if factor > 1.0 {
        warn!("estimated contraction factor {factor:.3} exceeds 1; Picard iteration may be slow or diverge");
    }
    let grid = &kernel.grid;
    let n = kernel.n;
    let nn = n * n;
    let cells = grid.cells();
    let r = problem.r();
    let l0 = retraction_radius(problem);
    let ctrl_grid = law.grid();
    let ctrl_cell: Vec<usize> = (0..cells)
        .map(|j| ctrl_grid.cell_of(0.5 * (grid.t(j) + grid.t(j + 1))))
        .collect();
    let tau_u = problem.nonlocal.control.as_ref().map(|(tau, _)| *tau);

    let mut x: Vec<DVector<f64>> = vec![problem.x0.clone(); cells + 1];
    let mut prev_update = f64::INFINITY;
    let mut fp = vec![0.0; cells * n];
    let mut fm = vec![0.0; (cells + 1) * n];
    for iter in 1..=opts.max_iter {
        let mut controls: Vec<Vec<DVector<f64>>> = vec![Vec::with_capacity(cells); r];
        for j in 0..cells {
            let mut v = Vec::with_capacity(r);
            for (i, ch) in controls.iter_mut().enumerate() {
                let u = law.value(problem, i, ctrl_cell[j], &x[j], l0);
                v.push(&problem.channels[i] * &u);
                ch.push(u);
            }
            let f0 = problem.dynamics.eval(grid.t(j), problem.horizon, &x[j], &v);
            let f1 = problem
                .dynamics
                .eval(grid.t(j + 1), problem.horizon, &x[j + 1], &v);
            fp[j * n..(j + 1) * n].copy_from_slice(f0.as_slice());
            fm[(j + 1) * n..(j + 2) * n].copy_from_slice(f1.as_slice());
        }
        let xg = GridFunction::new(*grid, x.clone())?;
        let ur = match tau_u {
            Some(tau) => {
                let xt = xg.at(tau);
                law.value(problem, r - 1, ctrl_grid.cell_of(tau), &xt, l0)
            }
            None => DVector::zeros(problem.m()),
        };
        let hval = problem.nonlocal_term(&xg, &ur);
        let base = &problem.x0 - &hval;

        let mut next = Vec::with_capacity(cells + 1);
        let mut update: f64 = 0.0;
        for k in 0..=cells {
            let mut acc = vec![0.0; n];
            gemv_acc(&mut acc, &kernel.sm[k * nn..(k + 1) * nn], base.as_slice());
            for d in 0..k {
                gemv_acc(
                    &mut acc,
                    &kernel.cl[d * nn..(d + 1) * nn],
                    &fp[(k - 1 - d) * n..(k - d) * n],
                );
                gemv_acc(
                    &mut acc,
                    &kernel.cr[d * nn..(d + 1) * nn],
                    &fm[(k - d) * n..(k - d + 1) * n],
                );
            }
            let xk = DVector::from_vec(acc);
            update = update.max((&xk - &x[k]).norm());
            next.push(xk);
        }
        if next.iter().any(|v| v.iter().any(|c| !c.is_finite())) {
            return Err(Error::Contraction {
                iterations: iter,
                last_update: f64::INFINITY,
            });
        }
        debug!("picard sweep {iter}: update {update:e}");
        if update < opts.tol {
            return Ok(MildSolution {
                x: GridFunction::new(*grid, next)?,
                controls,
                nonlocal: hval,
                iterations: iter,
                last_update: update,
            });
        }
        if update > prev_update {
            for (xk, nk) in x.iter_mut().zip(&next) {
                *xk = &*xk + (nk - &*xk) * 0.5;
            }
        } else {
            x = next;
        }
        prev_update = update;
        if iter == opts.max_iter {
            return Err(Error::Contraction {
                iterations: iter,
                last_update: update,
            });
        }
    }
    Err(Error::Contraction {
        iterations: 0,
        last_update: f64::INFINITY,
    })
}

/// `L ᶜD^α[Mx] + Ex − f` at the nodes, the control on the cell ending at
/// each node. The value at `t₀` is zero.
pub fn residual(problem: &ProblemSpec, sol: &MildSolution) -> Result<GridFunction> {
    let grid = sol.x.grid;
    let t = &problem.triple;
    let mx = GridFunction::new(grid, sol.x.values.iter().map(|v| t.m() * v).collect())?;
    let dmx = caputo_derivative(&mx, problem.alpha)?;
    let mut out = vec![DVector::zeros(problem.n())];
    for k in 1..=grid.cells() {
        let v: Vec<DVector<f64>> = (0..problem.r())
            .map(|i| &problem.channels[i] * &sol.controls[i][k - 1])
            .collect();
        let f = problem
            .dynamics
            .eval(grid.t(k), problem.horizon, &sol.x.values[k], &v);
        out.push(t.l() * &dmx.values[k] + t.e() * &sol.x.values[k] - f);
    }
    GridFunction::new(grid, out)
}

/// Sup of `res` over nodes with `t ≥ from`.
pub fn residual_sup(res: &GridFunction, from: f64) -> f64 {
    (0..=res.grid.cells())
        .filter(|&k| res.grid.t(k) >= from)
        .map(|k| res.values[k].norm())
        .fold(0.0, f64::max)
}

/// `L₀` with its ingredients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AprioriBound {
    pub l0: f64,
    /// `φ = a₃ + c₃ L₀`.
    pub phi: f64,
    /// Gronwall factor `E_α(λ Γ(α) a^α)`.
    pub gronwall: f64,
    /// `c₂(1 + c₃‖B_r‖) C₂ M₀ ‖M‖`, the part of the nonlocal term absorbed.
    pub absorption: f64,
}

/// A-priori bound on `‖x‖_C` for every admissible trajectory of the
/// convexified system, from the singular Gronwall inequality.
///
/// The nonlocal term contributes `c₂(1 + c₃‖B_r‖)C₂M₀‖M‖ ‖x‖_C` on the
/// right; it is absorbed only when that coefficient times the Gronwall
/// factor is below one.
pub fn apriori_bound(problem: &ProblemSpec) -> Result<AprioriBound> {
    let t = &problem.triple;
    let (alpha, beta, a) = (problem.alpha, problem.beta, problem.horizon);
    let r = problem.r();
    let (a1, c1) = problem.dynamics.growth();
    let (a2, c2) = problem.nonlocal.growth();
    let (a3, c3) = problem.constraint.growth();
    let k = t.c2() * t.m0() * norm2(t.m());
    let g = t.c1() * t.c2() * t.m0() / gamma_fn(alpha)?;
    let br = if problem.nonlocal.control.is_some() {
        norm2(&problem.channels[r - 1])
    } else {
        0.0
    };
    let sum_b: f64 = (0..r)
        .filter(|&i| problem.dynamics.uses_channel(i))
        .map(|i| norm2(&problem.channels[i]))
        .sum();
    // ‖·‖_{L^{1/β}} of the constant growth functions.
    let lq = a.powf(beta);
    let holder =
        ((1.0 - beta) / (alpha - beta) * a.powf((alpha - beta) / (1.0 - beta))).powf(1.0 - beta);
    let psi =
        k * (problem.x0.norm() + a2 + c2 * br * a3) + g * holder * (a1 * lq + c1 * sum_b * a3 * lq);
    let absorb = k * c2 * (1.0 + c3 * br);
    let lambda = g * c1 * (1.0 + c3 * sum_b);
    let gronwall = if lambda == 0.0 {
        1.0
    } else {
        mittag_leffler(alpha, 1.0, lambda * gamma_fn(alpha)? * a.powf(alpha))
            .map_err(|e| Error::BoundUnavailable(format!("Gronwall factor: {e}")))?
    };
    if absorb * gronwall >= 1.0 {
        return Err(Error::BoundUnavailable(format!(
            "nonlocal coefficient {absorb:.4} times Gronwall factor {gronwall:.4} is not below 1"
        )));
    }
    let l0 = psi * gronwall / (1.0 - absorb * gronwall);
    Ok(AprioriBound {
        l0,
        phi: a3 + c3 * l0,
        gronwall,
        absorption: absorb,
    })
}

/// Sup-norm Lipschitz constant of the control-to-trajectory map for
/// strong perturbations of the controls (same constants as `L₀`).
pub fn perturbation_lipschitz(problem: &ProblemSpec) -> Result<f64> {
    let b = apriori_bound(problem)?;
    let t = &problem.triple;
    let r = problem.r();
    let k = t.c2() * t.m0() * norm2(t.m());
    let g = t.c1() * t.c2() * t.m0() / gamma_fn(problem.alpha)?;
    let volterra = g * problem.horizon.powf(problem.alpha) / problem.alpha;
    let sum_b: f64 = problem.channels.iter().map(norm2).sum();
    let br = norm2(&problem.channels[r - 1]);
    let direct = k * problem.nonlocal.k2() * br + volterra * problem.dynamics.k1() * sum_b;
    let k2x = k * problem.nonlocal.k2();
    // State feedback goes through the same Gronwall factor as L₀.
    let denom = 1.0 - k2x * b.gronwall;
    if denom <= 0.0 {
        return Err(Error::BoundUnavailable(
            "nonlocal state coefficient not absorbable".into(),
        ));
    }
    let lambda = g * problem.dynamics.k1();
    let growth = if lambda == 0.0 {
        1.0
    } else {
        mittag_leffler(
            problem.alpha,
            1.0,
            lambda * gamma_fn(problem.alpha)? * problem.horizon.powf(problem.alpha),
        )?
    };
    Ok(direct * growth / denom)
}

/// One row of the continuity probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeRow {
    pub weak_dist: f64,
    pub traj_dist: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuityReport {
    pub rows: Vec<ProbeRow>,
    /// Trajectory distances are nonincreasing along the sequence.
    pub monotone: bool,
}

/// Weak distance of the applied controls, maximized over channels.
pub fn control_weak_distance(a: &MildSolution, b: &MildSolution, q: f64) -> Result<f64> {
    let step = a.x.grid.step();
    let mut best: f64 = 0.0;
    for (ca, cb) in a.controls.iter().zip(&b.controls) {
        best = best.max(weak_distance(ca, cb, step, q)?);
    }
    Ok(best)
}

/// Tabulates `(‖uₙ − u*‖_ω, ‖xₙ − x*‖_C)` along a control sequence. Each
/// member is solved on its own control grid, and `u*` on that same grid.
pub fn continuity_probe(
    problem: &ProblemSpec,
    u_star: &dyn ControlLaw,
    sequence: &[&dyn ControlLaw],
    opts: SolverOptions,
) -> Result<ContinuityReport> {
    let mut rows = Vec::with_capacity(sequence.len());
    let mut cached: Option<(TimeGrid, MildKernel, MildSolution)> = None;
    for law in sequence {
        let grid = *law.grid();
        if cached.as_ref().is_none_or(|(g, _, _)| *g != grid) {
            let kernel = MildKernel::new(problem, &grid)?;
            let star = solve_with_kernel(problem, &kernel, u_star, opts)?;
            cached = Some((grid, kernel, star));
        }
        let (_, kernel, star) = cached.as_ref().expect("just filled");
        let sol = solve_with_kernel(problem, kernel, *law, opts)?;
        rows.push(ProbeRow {
            weak_dist: control_weak_distance(&sol, star, problem.q())?,
            traj_dist: sol.x.sup_distance(&star.x)?,
        });
    }
    let monotone = rows.windows(2).all(|w| w[1].traj_dist <= w[0].traj_dist);
    Ok(ContinuityReport { rows, monotone })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::fixtures::{benchmark, scalar_problem};
    use crate::problem::ControlSignal;

    fn constant_control(grid: &TimeGrid, v: f64) -> ControlSignal {
        ControlSignal::constant(*grid, 1, DVector::from_element(1, v))
    }

    #[test]
    fn closed_form_with_constant_control() {
        let p = scalar_problem(0.5, 0.0, 0.3);
        let grid = TimeGrid::new(1.0, 200).unwrap();
        let sol = solve_mild(
            &p,
            &constant_control(&grid, 1.0),
            &grid,
            SolverOptions::default(),
        )
        .unwrap();
        let g = gamma_fn(1.5).unwrap();
        for k in 0..=200 {
            let t = grid.t(k);
            assert!((sol.x.values[k][0] - (0.3 + t.sqrt() / g)).abs() < 1e-4);
        }
    }

    #[test]
    fn zero_data_keeps_initial_state() {
        let p = scalar_problem(0.7, 0.0, 1.5);
        let grid = TimeGrid::new(1.0, 50).unwrap();
        let sol = solve_mild(
            &p,
            &constant_control(&grid, 0.0),
            &grid,
            SolverOptions::default(),
        )
        .unwrap();
        assert!(sol.x.values.iter().all(|v| v[0] == 1.5));
        let res = residual(&p, &sol).unwrap();
        assert_eq!(res.sup_norm(), 0.0);
    }

    #[test]
    fn near_one_matches_exponential_decay() {
        let lambda = 0.8;
        let p = scalar_problem(0.999, lambda, 1.0);
        let grid = TimeGrid::new(1.0, 200).unwrap();
        let sol = solve_mild(
            &p,
            &constant_control(&grid, 0.0),
            &grid,
            SolverOptions::default(),
        )
        .unwrap();
        // Classical RK4 oracle for x' = −λx.
        let h = 1e-3;
        let mut y: f64 = 1.0;
        let mut t = 0.0;
        let f = |y: f64| -lambda * y;
        for k in 0..=200 {
            let target = grid.t(k);
            while t < target - 1e-12 {
                let (k1, k2) = (f(y), f(y + 0.5 * h * f(y)));
                let k3 = f(y + 0.5 * h * k2);
                let k4 = f(y + h * k3);
                y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                t += h;
            }
            assert!((sol.x.values[k][0] - y).abs() < 1e-2);
        }
    }

    #[test]
    fn apriori_bound_dominates_and_is_monotone() {
        let p = benchmark();
        let b = apriori_bound(&p).unwrap();
        let grid = TimeGrid::new(1.0, 64).unwrap();
        let sol = solve_mild(
            &p,
            &constant_control(&grid, 1.0),
            &grid,
            SolverOptions::default(),
        )
        .unwrap();
        assert!(sol.x.sup_norm() <= b.l0);
        assert_eq!(b.phi, 1.0);
        let mut q = p.clone();
        q.dynamics.d[0] *= 2.0;
        assert!(apriori_bound(&q).unwrap().l0 >= b.l0);
    }

    #[test]
    fn constant_sequence_has_zero_distances() {
        let p = benchmark();
        let grid = TimeGrid::new(1.0, 32).unwrap();
        let u = constant_control(&grid, 0.5);
        let seq: Vec<&dyn ControlLaw> = vec![&u, &u];
        let rep = continuity_probe(&p, &u, &seq, SolverOptions::default()).unwrap();
        assert!(rep
            .rows
            .iter()
            .all(|r| r.weak_dist == 0.0 && r.traj_dist == 0.0));
        assert!(rep.monotone);
    }
}
