//! Problem data: dynamics, nonlocal term, costs, constraint set and the
//! control representations fed to the mild solver.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fractional::TimeGrid;
use crate::geometry::FiniteControlSet;
use crate::sobolev::{norm2, OperatorTriple};

/// Globally Lipschitz nonlinearity `ν(x)`, applied componentwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Nonlinearity {
    Zero,
    /// `κ sin(x)`.
    Sin {
        kappa: f64,
    },
    /// `κ clamp(x, −1, 1)`.
    Saturation {
        kappa: f64,
    },
}

impl Nonlinearity {
    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        match *self {
            Nonlinearity::Zero => DVector::zeros(x.len()),
            Nonlinearity::Sin { kappa } => x.map(|v| kappa * v.sin()),
            Nonlinearity::Saturation { kappa } => x.map(|v| kappa * v.clamp(-1.0, 1.0)),
        }
    }

    /// Lipschitz constant, which also bounds `‖ν(x)‖ / ‖x‖`.
    pub fn lipschitz(&self) -> f64 {
        match *self {
            Nonlinearity::Zero => 0.0,
            Nonlinearity::Sin { kappa } | Nonlinearity::Saturation { kappa } => kappa.abs(),
        }
    }
}

/// `f(t, x, v₁, …, v_r) = F₀(t) + C x + Σ Dᵢ vᵢ + ν(x)` with `vᵢ = Bᵢuᵢ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DynamicsSpec {
    /// Samples of `F₀` on a uniform grid over `[0, a]`; one sample means constant.
    pub forcing: Vec<DVector<f64>>,
    pub c: DMatrix<f64>,
    /// One `n×n` matrix per channel; a zero matrix leaves that channel out.
    pub d: Vec<DMatrix<f64>>,
    pub nonlinearity: Nonlinearity,
}

impl DynamicsSpec {
    pub fn forcing_at(&self, t: f64, horizon: f64) -> DVector<f64> {
        let k = self.forcing.len();
        if k == 1 {
            return self.forcing[0].clone();
        }
        let pos = (t / horizon).clamp(0.0, 1.0) * (k - 1) as f64;
        let i = (pos.floor() as usize).min(k - 2);
        let w = pos - i as f64;
        &self.forcing[i] * (1.0 - w) + &self.forcing[i + 1] * w
    }

    pub fn eval(&self, t: f64, horizon: f64, x: &DVector<f64>, v: &[DVector<f64>]) -> DVector<f64> {
        let mut out = self.forcing_at(t, horizon) + &self.c * x + self.nonlinearity.apply(x);
        for (d, vi) in self.d.iter().zip(v) {
            out += d * vi;
        }
        out
    }

    /// True when channel `i` enters `f`.
    pub fn uses_channel(&self, i: usize) -> bool {
        self.d.get(i).is_some_and(|d| d.iter().any(|&v| v != 0.0))
    }

    /// Lipschitz constant `k₁` for `‖f(x, v) − f(y, w)‖ ≤ k₁(‖x−y‖ + Σ‖vᵢ−wᵢ‖)`.
    pub fn k1(&self) -> f64 {
        let dmax = self.d.iter().map(norm2).fold(0.0, f64::max);
        (norm2(&self.c) + self.nonlinearity.lipschitz()).max(dmax)
    }

    /// Growth data: `a₁ = sup ‖F₀‖` and `c₁ = k₁` (ν vanishes at the origin).
    pub fn growth(&self) -> (f64, f64) {
        let a1 = self.forcing.iter().map(|f| f.norm()).fold(0.0, f64::max);
        (a1, self.k1())
    }
}

/// `h(x, v) = Σ_k H_k x(τ_k) + G v(τ_u)` with `v = B_r u_r`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonlocalSpec {
    pub samples: Vec<(f64, DMatrix<f64>)>,
    pub control: Option<(f64, DMatrix<f64>)>,
}

impl NonlocalSpec {
    pub fn none() -> Self {
        Self {
            samples: Vec::new(),
            control: None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.samples.is_empty() && self.control.is_none()
    }

    fn h_norm(&self) -> f64 {
        self.samples.iter().map(|(_, h)| norm2(h)).sum()
    }

    fn g_norm(&self) -> f64 {
        self.control.as_ref().map_or(0.0, |(_, g)| norm2(g))
    }

    /// `k₂ = Σ‖H_k‖ + ‖G‖`.
    pub fn k2(&self) -> f64 {
        self.h_norm() + self.g_norm()
    }

    /// Growth data `(a₂, c₂)` for `‖h(x, v)‖ ≤ a₂ + c₂(‖x‖_C + ‖v‖)`.
    pub fn growth(&self) -> (f64, f64) {
        (0.0, self.h_norm().max(self.g_norm()))
    }
}

/// Control-dependent part of a running cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ControlCost {
    Zero,
    /// `w ‖u − c‖²`.
    Quadratic {
        weight: f64,
        center: Vec<f64>,
    },
    /// `c · u`.
    Linear {
        coef: Vec<f64>,
    },
    /// `w ‖u‖`.
    Norm {
        weight: f64,
    },
}

impl ControlCost {
    pub fn eval(&self, u: &DVector<f64>) -> f64 {
        match self {
            ControlCost::Zero => 0.0,
            ControlCost::Quadratic { weight, center } => {
                weight
                    * u.iter()
                        .zip(center)
                        .map(|(a, c)| (a - c).powi(2))
                        .sum::<f64>()
            }
            ControlCost::Linear { coef } => u.iter().zip(coef).map(|(a, c)| a * c).sum(),
            ControlCost::Norm { weight } => weight * u.norm(),
        }
    }

    /// Lipschitz constant in `u` on the ball of radius `phi`.
    pub fn lipschitz(&self, phi: f64) -> f64 {
        match self {
            ControlCost::Zero => 0.0,
            ControlCost::Quadratic { weight, center } => {
                let c = center.iter().map(|v| v * v).sum::<f64>().sqrt();
                2.0 * weight.abs() * (phi + c)
            }
            ControlCost::Linear { coef } => coef.iter().map(|v| v * v).sum::<f64>().sqrt(),
            ControlCost::Norm { weight } => weight.abs(),
        }
    }

    fn dim(&self) -> Option<usize> {
        match self {
            ControlCost::Quadratic { center, .. } => Some(center.len()),
            ControlCost::Linear { coef } => Some(coef.len()),
            _ => None,
        }
    }
}

/// `g(t, x, u) = offset + xᵀPx + pᵀx + q(u)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostSpec {
    pub offset: f64,
    pub p_mat: DMatrix<f64>,
    pub p_vec: DVector<f64>,
    pub q: ControlCost,
}

impl CostSpec {
    pub fn zero(n: usize) -> Self {
        Self {
            offset: 0.0,
            p_mat: DMatrix::zeros(n, n),
            p_vec: DVector::zeros(n),
            q: ControlCost::Zero,
        }
    }

    pub fn state_part(&self, x: &DVector<f64>) -> f64 {
        self.offset + x.dot(&(&self.p_mat * x)) + self.p_vec.dot(x)
    }

    pub fn eval(&self, x: &DVector<f64>, u: &DVector<f64>) -> f64 {
        self.state_part(x) + self.q.eval(u)
    }

    /// `k₄'` on the ball `‖x‖ ≤ l0`.
    pub fn k4_state(&self, l0: f64) -> f64 {
        norm2(&(&self.p_mat + self.p_mat.transpose())) * l0 + self.p_vec.norm()
    }

    /// `k₄''` on the ball `‖u‖ ≤ phi`.
    pub fn k4_control(&self, phi: f64) -> f64 {
        self.q.lipschitz(phi)
    }
}

/// The order, weak-norm exponent and horizon hypotheses.
pub fn check_exponents(alpha: f64, beta: f64, horizon: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Hypothesis {
            clause: "H1.3",
            detail: format!("alpha = {alpha} must lie in (0, 1)"),
        });
    }
    if !(beta > 0.0 && beta < alpha) {
        return Err(Error::Hypothesis {
            clause: "H1.3",
            detail: format!(
                "there must be a constant 0 < beta < alpha; got beta = {beta}, alpha = {alpha}"
            ),
        });
    }
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "horizon {horizon} must be positive"
        )));
    }
    Ok(())
}

/// A full problem instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProblemSpec {
    pub alpha: f64,
    pub beta: f64,
    pub horizon: f64,
    pub x0: DVector<f64>,
    pub triple: OperatorTriple,
    /// Channel operators `Bᵢ` (`n×m`).
    pub channels: Vec<DMatrix<f64>>,
    pub dynamics: DynamicsSpec,
    pub nonlocal: NonlocalSpec,
    pub costs: Vec<CostSpec>,
    pub constraint: FiniteControlSet,
}

impl ProblemSpec {
    /// Validates dimensions and the hypotheses the solver relies on.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        alpha: f64,
        beta: f64,
        horizon: f64,
        x0: DVector<f64>,
        triple: OperatorTriple,
        channels: Vec<DMatrix<f64>>,
        dynamics: DynamicsSpec,
        nonlocal: NonlocalSpec,
        costs: Vec<CostSpec>,
        constraint: FiniteControlSet,
    ) -> Result<Self> {
        check_exponents(alpha, beta, horizon)?;
        let n = triple.dim();
        let m = constraint.dim();
        let r = channels.len();
        if x0.len() != n {
            return Err(Error::Dimension(format!(
                "x0 has length {}, expected {n}",
                x0.len()
            )));
        }
        if r == 0 || r > 3 {
            return Err(Error::InvalidArgument(format!(
                "{r} control channels; 1 to 3 are supported"
            )));
        }
        for (i, b) in channels.iter().enumerate() {
            if b.shape() != (n, m) {
                return Err(Error::Dimension(format!(
                    "B{} is {:?}, expected ({n}, {m})",
                    i + 1,
                    b.shape()
                )));
            }
        }
        if dynamics.c.shape() != (n, n)
            || dynamics.d.len() != r
            || dynamics.d.iter().any(|d| d.shape() != (n, n))
        {
            return Err(Error::Dimension(format!(
                "dynamics needs C and one D per channel, all {n}x{n}"
            )));
        }
        if dynamics.forcing.is_empty() || dynamics.forcing.iter().any(|f| f.len() != n) {
            return Err(Error::Dimension(format!(
                "forcing samples must be nonempty vectors of length {n}"
            )));
        }
        for (tau, h) in &nonlocal.samples {
            if !(0.0..=horizon).contains(tau) || h.shape() != (n, n) {
                return Err(Error::Dimension(format!(
                    "nonlocal sample at {tau} must lie in [0, a] with an {n}x{n} matrix"
                )));
            }
        }
        if let Some((tau, g)) = &nonlocal.control {
            if !(0.0..=horizon).contains(tau) || g.shape() != (n, n) {
                return Err(Error::Dimension(format!(
                    "nonlocal control sample at {tau} must lie in [0, a] with an {n}x{n} matrix"
                )));
            }
        }
        if costs.len() != r {
            return Err(Error::Dimension(format!(
                "{} cost integrands for {r} channels",
                costs.len()
            )));
        }
        for (i, c) in costs.iter().enumerate() {
            if c.p_mat.shape() != (n, n) || c.p_vec.len() != n || c.q.dim().is_some_and(|d| d != m)
            {
                return Err(Error::Dimension(format!(
                    "cost g{} does not match n = {n}, m = {m}",
                    i + 1
                )));
            }
        }
        let finite = x0.iter().all(|v| v.is_finite())
            && channels.iter().all(|b| b.iter().all(|v| v.is_finite()))
            && costs
                .iter()
                .all(|c| c.offset.is_finite() && c.p_mat.iter().all(|v| v.is_finite()));
        if !finite {
            return Err(Error::InvalidArgument("problem data must be finite".into()));
        }
        Ok(Self {
            alpha,
            beta,
            horizon,
            x0,
            triple,
            channels,
            dynamics,
            nonlocal,
            costs,
            constraint,
        })
    }

    pub fn n(&self) -> usize {
        self.triple.dim()
    }

    pub fn m(&self) -> usize {
        self.constraint.dim()
    }

    pub fn r(&self) -> usize {
        self.channels.len()
    }

    /// Weak-norm exponent `q = 1/β`.
    pub fn q(&self) -> f64 {
        1.0 / self.beta
    }

    /// `h(x, B_r u_r)` for a trajectory sampled on `grid` and the channel-`r`
    /// control value at `τ_u`.
    pub fn nonlocal_term(
        &self,
        x: &crate::fractional::GridFunction,
        ur_at_tau: &DVector<f64>,
    ) -> DVector<f64> {
        let mut out = DVector::zeros(self.n());
        for (tau, h) in &self.nonlocal.samples {
            out += h * x.at(*tau);
        }
        if let Some((_, g)) = &self.nonlocal.control {
            out += g * (self.channels[self.r() - 1].clone() * ur_at_tau);
        }
        out
    }
}

/// Anything that yields per-cell channel values, possibly from the state.
pub trait ControlLaw {
    fn grid(&self) -> &TimeGrid;

    fn channels(&self) -> usize;

    /// Value of channel `i` on control cell `cell` when the state is `x`.
    fn value(
        &self,
        problem: &ProblemSpec,
        i: usize,
        cell: usize,
        x: &DVector<f64>,
        l0: f64,
    ) -> DVector<f64>;
}

/// Piecewise-constant controls given by value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ControlSignal {
    pub grid: TimeGrid,
    /// `values[i][j]`: channel `i` on cell `j`.
    pub values: Vec<Vec<DVector<f64>>>,
}

impl ControlSignal {
    pub fn new(grid: TimeGrid, values: Vec<Vec<DVector<f64>>>) -> Result<Self> {
        let dim = values.first().and_then(|c| c.first()).map(|v| v.len());
        for ch in &values {
            if ch.len() != grid.cells() {
                return Err(Error::Dimension(format!(
                    "channel has {} cells, grid has {}",
                    ch.len(),
                    grid.cells()
                )));
            }
            if ch
                .iter()
                .any(|v| Some(v.len()) != dim || v.iter().any(|x| !x.is_finite()))
            {
                return Err(Error::InvalidArgument(
                    "control values must be finite and of equal dimension".into(),
                ));
            }
        }
        Ok(Self { grid, values })
    }

    /// Every channel constant at `value`.
    pub fn constant(grid: TimeGrid, r: usize, value: DVector<f64>) -> Self {
        let values = vec![vec![value; grid.cells()]; r];
        Self { grid, values }
    }
}

impl ControlLaw for ControlSignal {
    fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    fn channels(&self) -> usize {
        self.values.len()
    }

    fn value(
        &self,
        _: &ProblemSpec,
        i: usize,
        cell: usize,
        _: &DVector<f64>,
        _: f64,
    ) -> DVector<f64> {
        self.values[i][cell].clone()
    }
}

/// Atom-valued controls by atom index, resolved against `U(t, x)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtomSchedule {
    pub grid: TimeGrid,
    /// `indices[i][j]`: atom used by channel `i` on cell `j`.
    pub indices: Vec<Vec<usize>>,
}

impl AtomSchedule {
    pub fn new(grid: TimeGrid, indices: Vec<Vec<usize>>, atoms: usize) -> Result<Self> {
        for ch in &indices {
            if ch.len() != grid.cells() {
                return Err(Error::Dimension(format!(
                    "channel has {} cells, grid has {}",
                    ch.len(),
                    grid.cells()
                )));
            }
            if let Some(&bad) = ch.iter().find(|&&k| k >= atoms) {
                return Err(Error::InvalidArgument(format!(
                    "atom index {bad} out of range ({atoms} atoms)"
                )));
            }
        }
        Ok(Self { grid, indices })
    }
}

impl ControlLaw for AtomSchedule {
    fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    fn channels(&self) -> usize {
        self.indices.len()
    }

    fn value(
        &self,
        problem: &ProblemSpec,
        i: usize,
        cell: usize,
        x: &DVector<f64>,
        l0: f64,
    ) -> DVector<f64> {
        let k = self.indices[i][cell];
        if problem.constraint.is_state_dependent() {
            problem.constraint.atoms_at(x, l0).swap_remove(k)
        } else {
            problem.constraint.base_atoms()[k].clone()
        }
    }
}

/// Young-measure controls: simplex weights over the atoms per channel and cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelaxedControl {
    pub grid: TimeGrid,
    /// `weights[i][j][k]`: mass of atom `k` for channel `i` on cell `j`.
    pub weights: Vec<Vec<Vec<f64>>>,
}

/// Slack allowed on the simplex constraints.
pub const SIMPLEX_TOL: f64 = 1e-12;

impl RelaxedControl {
    pub fn new(grid: TimeGrid, weights: Vec<Vec<Vec<f64>>>, atoms: usize) -> Result<Self> {
        for ch in &weights {
            if ch.len() != grid.cells() {
                return Err(Error::Dimension(format!(
                    "channel has {} cells, grid has {}",
                    ch.len(),
                    grid.cells()
                )));
            }
            for w in ch {
                let sum: f64 = w.iter().sum();
                if w.len() != atoms
                    || w.iter().any(|&v| !(v >= -SIMPLEX_TOL))
                    || (sum - 1.0).abs() > 1e-9
                {
                    return Err(Error::Precondition(format!(
                        "weights {w:?} are not in the {atoms}-simplex"
                    )));
                }
            }
        }
        Ok(Self { grid, weights })
    }

    /// All mass on atom `k`.
    pub fn pure(grid: TimeGrid, r: usize, atoms: usize, k: usize) -> Self {
        let mut w = vec![0.0; atoms];
        w[k] = 1.0;
        Self {
            weights: vec![vec![w; grid.cells()]; r],
            grid,
        }
    }

    /// The same weights on every channel and cell.
    pub fn uniform(grid: TimeGrid, r: usize, w: Vec<f64>) -> Self {
        Self {
            weights: vec![vec![w; grid.cells()]; r],
            grid,
        }
    }
}

fn barycenter(atoms: &[DVector<f64>], w: &[f64]) -> DVector<f64> {
    let mut out = DVector::zeros(atoms[0].len());
    for (a, &l) in atoms.iter().zip(w) {
        out += a * l;
    }
    out
}

impl ControlLaw for RelaxedControl {
    fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    fn channels(&self) -> usize {
        self.weights.len()
    }

    /// The barycenter `Σ λ_k u_k` over the atoms of `U(t, x)`.
    fn value(
        &self,
        problem: &ProblemSpec,
        i: usize,
        cell: usize,
        x: &DVector<f64>,
        l0: f64,
    ) -> DVector<f64> {
        let w = &self.weights[i][cell];
        if problem.constraint.is_state_dependent() {
            barycenter(&problem.constraint.atoms_at(x, l0), w)
        } else {
            barycenter(problem.constraint.base_atoms(), w)
        }
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::geometry::FiniteControlSet;
    use crate::sobolev::semigroup_reach;

    /// α = 0.5, scalar, `L = M = 1`, `E = 0`, `f = u`, `g = x²`, `U = {−1, 1}`.
    pub fn benchmark() -> ProblemSpec {
        scalar_problem(0.5, 0.0, 0.0)
    }

    pub fn scalar_problem(alpha: f64, e: f64, x0: f64) -> ProblemSpec {
        let one = DMatrix::from_element(1, 1, 1.0);
        let reach = semigroup_reach(alpha, 1.0).unwrap();
        let triple = OperatorTriple::new(
            one.clone(),
            one.clone(),
            DMatrix::from_element(1, 1, e),
            reach,
        )
        .unwrap();
        let dynamics = DynamicsSpec {
            forcing: vec![DVector::zeros(1)],
            c: DMatrix::zeros(1, 1),
            d: vec![one.clone()],
            nonlinearity: Nonlinearity::Zero,
        };
        let mut cost = CostSpec::zero(1);
        cost.p_mat = one.clone();
        ProblemSpec::new(
            alpha,
            alpha / 2.0,
            1.0,
            DVector::from_element(1, x0),
            triple,
            vec![one],
            dynamics,
            NonlocalSpec::none(),
            vec![cost],
            FiniteControlSet::scalar(&[-1.0, 1.0]).unwrap(),
        )
        .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::benchmark;
    use super::*;

    #[test]
    fn rejects_beta_not_below_alpha() {
        let p = benchmark();
        let err = ProblemSpec::new(
            0.5,
            0.6,
            1.0,
            p.x0.clone(),
            p.triple.clone(),
            p.channels.clone(),
            p.dynamics.clone(),
            p.nonlocal.clone(),
            p.costs.clone(),
            p.constraint.clone(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Hypothesis { clause: "H1.3", .. }));
    }

    #[test]
    fn dynamics_constants() {
        let d = DynamicsSpec {
            forcing: vec![DVector::from_row_slice(&[3.0, 4.0])],
            c: DMatrix::identity(2, 2) * 0.5,
            d: vec![DMatrix::identity(2, 2) * 0.2],
            nonlinearity: Nonlinearity::Sin { kappa: 0.25 },
        };
        assert_eq!(d.k1(), 0.75);
        assert_eq!(d.growth(), (5.0, 0.75));
        let x = DVector::from_row_slice(&[0.0, std::f64::consts::FRAC_PI_2]);
        let v = vec![DVector::from_row_slice(&[1.0, 1.0])];
        let f = d.eval(0.3, 1.0, &x, &v);
        assert!((f[0] - 3.2).abs() < 1e-15);
        assert!((f[1] - (4.0 + 0.5 * std::f64::consts::FRAC_PI_2 + 0.2 + 0.25)).abs() < 1e-15);
    }

    #[test]
    fn forcing_interpolates() {
        let d = DynamicsSpec {
            forcing: vec![
                DVector::from_element(1, 0.0),
                DVector::from_element(1, 2.0),
                DVector::from_element(1, 0.0),
            ],
            c: DMatrix::zeros(1, 1),
            d: vec![DMatrix::zeros(1, 1)],
            nonlinearity: Nonlinearity::Zero,
        };
        assert_eq!(d.forcing_at(0.25, 1.0)[0], 1.0);
        assert_eq!(d.forcing_at(0.5, 1.0)[0], 2.0);
        assert_eq!(d.forcing_at(1.0, 1.0)[0], 0.0);
        assert!(!d.uses_channel(0));
    }

    #[test]
    fn cost_catalog() {
        let u = DVector::from_row_slice(&[1.0, -2.0]);
        assert_eq!(
            ControlCost::Quadratic {
                weight: 2.0,
                center: vec![1.0, 0.0]
            }
            .eval(&u),
            8.0
        );
        assert_eq!(
            ControlCost::Linear {
                coef: vec![1.0, 1.0]
            }
            .eval(&u),
            -1.0
        );
        assert!((ControlCost::Norm { weight: 1.0 }.eval(&u) - 5f64.sqrt()).abs() < 1e-15);
        assert_eq!(ControlCost::Zero.eval(&u), 0.0);
    }

    #[test]
    fn relaxed_weights_validated() {
        let g = TimeGrid::new(1.0, 2).unwrap();
        assert!(RelaxedControl::new(g, vec![vec![vec![0.5, 0.5]; 2]], 2).is_ok());
        assert!(matches!(
            RelaxedControl::new(g, vec![vec![vec![0.7, 0.5]; 2]], 2),
            Err(Error::Precondition(_))
        ));
        assert!(AtomSchedule::new(g, vec![vec![0, 2]], 2).is_err());
    }

    #[test]
    fn relaxed_value_is_barycenter() {
        let p = benchmark();
        let g = TimeGrid::new(1.0, 2).unwrap();
        let rc = RelaxedControl::uniform(g, 1, vec![0.25, 0.75]);
        let x = DVector::zeros(1);
        assert_eq!(rc.value(&p, 0, 1, &x, 1.0)[0], 0.5);
    }
}
