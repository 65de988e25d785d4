//! Uniform time grids, the Riemann–Liouville integral by product
//! integration, the L1 Caputo derivative and the singular Gronwall majorant.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre_unit;
use crate::special::{gamma_fn, mittag_leffler};

/// Uniform grid `t_k = k a / N`, `k = 0..=N`, on `[0, a]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    horizon: f64,
    cells: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, cells: usize) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        if cells == 0 {
            return Err(Error::InvalidArgument(
                "grid needs at least one cell".into(),
            ));
        }
        Ok(TimeGrid { horizon, cells })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Number of cells N (the grid has N+1 nodes).
    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn nodes(&self) -> usize {
        self.cells + 1
    }

    pub fn step(&self) -> f64 {
        self.horizon / self.cells as f64
    }

    pub fn t(&self, k: usize) -> f64 {
        if k == self.cells {
            self.horizon
        } else {
            k as f64 * self.step()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.nodes()).map(|k| self.t(k)).collect()
    }

    /// Cell index containing `t` (the last cell owns the right endpoint).
    pub fn cell_of(&self, t: f64) -> usize {
        let c = (t / self.step()).floor();
        if c < 0.0 {
            0
        } else {
            (c as usize).min(self.cells - 1)
        }
    }

    /// True when every cell of `self` lies inside one cell of `coarse`.
    pub fn refines(&self, coarse: &TimeGrid) -> bool {
        self.horizon == coarse.horizon && self.cells.is_multiple_of(coarse.cells)
    }
}

/// Vector-valued samples at the nodes of a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridFunction {
    pub grid: TimeGrid,
    pub values: Vec<DVector<f64>>,
}

impl GridFunction {
    pub fn new(grid: TimeGrid, values: Vec<DVector<f64>>) -> Result<Self> {
        if values.len() != grid.nodes() {
            return Err(Error::Dimension(format!(
                "grid has {} nodes but {} values were given",
                grid.nodes(),
                values.len()
            )));
        }
        let dim = values[0].len();
        if values.iter().any(|v| v.len() != dim) {
            return Err(Error::Dimension(
                "grid function values have mixed lengths".into(),
            ));
        }
        if values.iter().any(|v| v.iter().any(|x| !x.is_finite())) {
            return Err(Error::InvalidArgument(
                "grid function has non-finite entries".into(),
            ));
        }
        Ok(GridFunction { grid, values })
    }

    pub fn from_fn(grid: TimeGrid, dim: usize, f: impl Fn(f64) -> DVector<f64>) -> Result<Self> {
        let values: Vec<_> = grid.times().into_iter().map(f).collect();
        if values.iter().any(|v| v.len() != dim) {
            return Err(Error::Dimension("sampler returned wrong dimension".into()));
        }
        GridFunction::new(grid, values)
    }

    pub fn from_scalar(grid: TimeGrid, f: impl Fn(f64) -> f64) -> Self {
        GridFunction {
            grid,
            values: grid
                .times()
                .into_iter()
                .map(|t| DVector::from_element(1, f(t)))
                .collect(),
        }
    }

    pub fn zeros(grid: TimeGrid, dim: usize) -> Self {
        GridFunction {
            grid,
            values: vec![DVector::zeros(dim); grid.nodes()],
        }
    }

    pub fn dim(&self) -> usize {
        self.values[0].len()
    }

    /// First component at every node.
    pub fn scalar(&self) -> Vec<f64> {
        self.values.iter().map(|v| v[0]).collect()
    }

    /// Sup over nodes of the Euclidean norm.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn sup_distance(&self, other: &GridFunction) -> Result<f64> {
        if self.grid != other.grid || self.dim() != other.dim() {
            return Err(Error::Dimension(
                "grid functions live on different grids".into(),
            ));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Linear interpolation at `t ∈ [0, a]`.
    pub fn at(&self, t: f64) -> DVector<f64> {
        let c = self.grid.cell_of(t);
        let h = self.grid.step();
        let w = ((t - self.grid.t(c)) / h).clamp(0.0, 1.0);
        &self.values[c] * (1.0 - w) + &self.values[c + 1] * w
    }

    pub fn linear_combination(&self, a: f64, other: &GridFunction, b: f64) -> Result<GridFunction> {
        if self.grid != other.grid || self.dim() != other.dim() {
            return Err(Error::Dimension(
                "grid functions live on different grids".into(),
            ));
        }
        Ok(GridFunction {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| x * a + y * b)
                .collect(),
        })
    }
}

/// `(j+1)^p − j^p` without cancellation for large `j`.
fn power_difference(p: f64, j: usize) -> f64 {
    if j == 0 {
        1.0
    } else {
        let jf = j as f64;
        jf.powf(p) * (p * (1.0 / jf).ln_1p()).exp_m1()
    }
}

/// Exact integrals of the kernel `τ^{α−1}` against the two hat functions of
/// each cell, for a uniform grid with step `h`.
///
/// For lag `j` (the cell `[t_{k−j−1}, t_{k−j}]` seen from node `t_k`),
/// `left[j]` multiplies the value at `t_{k−j−1}` and `right[j]` the value
/// at `t_{k−j}`. Weights are not divided by Γ(α).
#[derive(Debug, Clone, PartialEq)]
pub struct ProductWeights {
    pub alpha: f64,
    pub step: f64,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

impl ProductWeights {
    pub fn new(alpha: f64, grid: &TimeGrid) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::OutOfRange {
                function: "ProductWeights::new",
                value: alpha,
                detail: "alpha must lie in (0, 1]".into(),
            });
        }
        let n = grid.cells();
        let h = grid.step();
        let scale = h.powf(alpha);
        let rule = gauss_legendre_unit(16);
        let mut left = Vec::with_capacity(n);
        let mut right = Vec::with_capacity(n);
        for j in 0..n {
            let (wl, wr) = if j < 16 {
                let jf = j as f64;
                let i0 = power_difference(alpha, j) / alpha;
                let i1 = power_difference(alpha + 1.0, j) / (alpha + 1.0);
                // τ/h = j + σ; hat weights are σ (left node) and 1 − σ (right node).
                (i1 - jf * i0, (jf + 1.0) * i0 - i1)
            } else {
                let jf = j as f64;
                rule.iter().fold((0.0, 0.0), |(l, r), &(s, w)| {
                    let k = (jf + s).powf(alpha - 1.0) * w;
                    (l + k * s, r + k * (1.0 - s))
                })
            };
            left.push(wl * scale);
            right.push(wr * scale);
        }
        Ok(ProductWeights {
            alpha,
            step: h,
            left,
            right,
        })
    }

    /// Exact `∫_{t_{k−j−1}}^{t_{k−j}} (t_k − s)^{α−1} ds`.
    pub fn cell_mass(&self, j: usize) -> f64 {
        self.left[j] + self.right[j]
    }
}

fn check_alpha_open(function: &'static str, alpha: f64, upper_inclusive: bool) -> Result<()> {
    let ok = alpha > 0.0
        && if upper_inclusive {
            alpha <= 1.0
        } else {
            alpha < 1.0
        };
    if ok {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            function,
            value: alpha,
            detail: if upper_inclusive {
                "alpha must lie in (0, 1]"
            } else {
                "alpha must lie in (0, 1)"
            }
            .into(),
        })
    }
}

/// Riemann–Liouville integral `I^α f` at the grid nodes, with `f`
/// interpolated piecewise-linearly and the kernel integrated exactly.
pub fn rl_integral(f: &GridFunction, alpha: f64) -> Result<GridFunction> {
    check_alpha_open("rl_integral", alpha, true)?;
    let w = ProductWeights::new(alpha, &f.grid)?;
    Ok(rl_integral_with(f, &w))
}

pub fn rl_integral_with(f: &GridFunction, w: &ProductWeights) -> GridFunction {
    let inv_gamma = 1.0 / gamma_fn(w.alpha).expect("alpha validated by ProductWeights");
    let dim = f.dim();
    let mut out = Vec::with_capacity(f.grid.nodes());
    for k in 0..f.grid.nodes() {
        let mut acc = DVector::zeros(dim);
        for j in 0..k {
            let hi = k - j;
            acc.axpy(w.left[j], &f.values[hi - 1], 1.0);
            acc.axpy(w.right[j], &f.values[hi], 1.0);
        }
        out.push(acc * inv_gamma);
    }
    GridFunction {
        grid: f.grid,
        values: out,
    }
}

/// Caputo derivative of order `α ∈ (0,1)` by the L1 scheme: the
/// fractional integral `I^{1−α}` of the piecewise-constant difference
/// quotient of `x`. The value at `t_0` is reported as zero.
pub fn caputo_derivative(x: &GridFunction, alpha: f64) -> Result<GridFunction> {
    check_alpha_open("caputo_derivative", alpha, false)?;
    let n = x.grid.cells();
    if n < 2 {
        return Err(Error::GridTooCoarse { cells: n, min: 2 });
    }
    let h = x.grid.step();
    let coef = h.powf(-alpha) / gamma_fn(2.0 - alpha)?;
    let b: Vec<f64> = (0..n).map(|j| power_difference(1.0 - alpha, j)).collect();
    let diffs: Vec<DVector<f64>> = (0..n).map(|c| &x.values[c + 1] - &x.values[c]).collect();
    let dim = x.dim();
    let mut out = Vec::with_capacity(n + 1);
    out.push(DVector::zeros(dim));
    for k in 1..=n {
        let mut acc = DVector::zeros(dim);
        for j in 0..k {
            acc.axpy(b[j], &diffs[k - 1 - j], 1.0);
        }
        out.push(acc * coef);
    }
    Ok(GridFunction {
        grid: x.grid,
        values: out,
    })
}

/// Majorant `ψ(t) E_{1−γ}(λ Γ(1−γ) t^{1−γ})` from the singular Gronwall
/// inequality `x(t) ≤ ψ(t) + λ ∫₀ᵗ (t−s)^{−γ} x(s) ds`.
pub fn gronwall_bound(psi: &GridFunction, lambda: f64, gamma: f64) -> Result<GridFunction> {
    if psi.dim() != 1 {
        return Err(Error::Dimension("gronwall_bound expects a scalar ψ".into()));
    }
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::OutOfRange {
            function: "gronwall_bound",
            value: gamma,
            detail: "gamma must lie in [0, 1)".into(),
        });
    }
    let vals = psi.scalar();
    if vals.iter().any(|&v| v < 0.0) {
        return Err(Error::Precondition("ψ must be nonnegative".into()));
    }
    if vals.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Precondition("ψ must be nondecreasing".into()));
    }
    let order = 1.0 - gamma;
    let g = gamma_fn(order)?;
    let mut out = Vec::with_capacity(vals.len());
    for (k, &p) in vals.iter().enumerate() {
        let t = psi.grid.t(k);
        let e = mittag_leffler(order, 1.0, lambda * g * t.powf(order))?;
        out.push(DVector::from_element(1, p * e));
    }
    Ok(GridFunction {
        grid: psi.grid,
        values: out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> TimeGrid {
        TimeGrid::new(1.0, n).unwrap()
    }

    #[test]
    fn grid_basics() {
        let g = TimeGrid::new(2.0, 4).unwrap();
        assert_eq!(g.nodes(), 5);
        assert_eq!(g.t(4), 2.0);
        assert_eq!(g.cell_of(2.0), 3);
        assert_eq!(g.cell_of(0.49), 0);
        assert!(TimeGrid::new(0.0, 3).is_err());
        assert!(TimeGrid::new(1.0, 0).is_err());
        assert!(TimeGrid::new(2.0, 8).unwrap().refines(&g));
        assert!(!TimeGrid::new(2.0, 6).unwrap().refines(&g));
    }

    #[test]
    fn grid_function_rejects_nonfinite() {
        let g = grid(1);
        let v = vec![
            DVector::from_element(1, 0.0),
            DVector::from_element(1, f64::NAN),
        ];
        assert!(GridFunction::new(g, v).is_err());
        assert!(GridFunction::new(g, vec![DVector::zeros(1)]).is_err());
    }

    #[test]
    fn weights_sum_to_kernel_mass() {
        let g = grid(64);
        let w = ProductWeights::new(0.37, &g).unwrap();
        let h: f64 = g.step();
        for j in [0usize, 3, 15, 16, 17, 63] {
            let exact = h.powf(0.37) * (((j + 1) as f64).powf(0.37) - (j as f64).powf(0.37)) / 0.37;
            assert!((w.cell_mass(j) - exact).abs() < 1e-12 * exact, "j = {j}");
        }
    }

    #[test]
    fn weights_switch_smoothly_between_closed_form_and_quadrature() {
        let g = grid(40);
        let w = ProductWeights::new(0.5, &g).unwrap();
        // Closed form at j = 15 vs. the same quantity by brute-force midpoint
        // integration of the hat-weighted kernel.
        for j in [15usize, 16] {
            let m = 200_000;
            let (mut l, mut r) = (0.0, 0.0);
            for i in 0..m {
                let s = (i as f64 + 0.5) / m as f64;
                let k = (j as f64 + s).powf(-0.5) / m as f64;
                l += k * s;
                r += k * (1.0 - s);
            }
            let scale = g.step().powf(0.5);
            assert!((w.left[j] / scale - l).abs() < 1e-9);
            assert!((w.right[j] / scale - r).abs() < 1e-9);
        }
    }

    #[test]
    fn rl_of_zero_and_alpha_one() {
        let g = grid(10);
        let z = GridFunction::zeros(g, 2);
        assert!(rl_integral(&z, 0.4).unwrap().sup_norm() == 0.0);
        let one = GridFunction::from_scalar(g, |_| 1.0);
        let i1 = rl_integral(&one, 1.0).unwrap();
        for (k, v) in i1.scalar().iter().enumerate() {
            assert!((v - g.t(k)).abs() < 1e-14);
        }
    }

    #[test]
    fn rl_rejects_bad_alpha() {
        let g = grid(4);
        let one = GridFunction::from_scalar(g, |_| 1.0);
        assert!(rl_integral(&one, 0.0).is_err());
        assert!(rl_integral(&one, 1.5).is_err());
    }

    #[test]
    fn caputo_rejects_coarse_grid() {
        let g = grid(1);
        let x = GridFunction::from_scalar(g, |t| t);
        assert_eq!(
            caputo_derivative(&x, 0.5).unwrap_err(),
            Error::GridTooCoarse { cells: 1, min: 2 }
        );
        let g = grid(4);
        let x = GridFunction::from_scalar(g, |t| t);
        assert!(caputo_derivative(&x, 1.0).is_err());
    }

    #[test]
    fn gronwall_preconditions() {
        let g = grid(4);
        let dec = GridFunction::from_scalar(g, |t| 1.0 - t);
        assert!(matches!(
            gronwall_bound(&dec, 0.3, 0.5),
            Err(Error::Precondition(_))
        ));
        let neg = GridFunction::from_scalar(g, |_| -1.0);
        assert!(matches!(
            gronwall_bound(&neg, 0.3, 0.5),
            Err(Error::Precondition(_))
        ));
        let ok = GridFunction::from_scalar(g, |_| 1.0);
        assert!(gronwall_bound(&ok, 0.0, 0.5).is_err());
        assert!(gronwall_bound(&ok, 0.3, 1.0).is_err());
    }

    #[test]
    fn interpolation_at_nodes_and_midpoints() {
        let g = grid(4);
        let f = GridFunction::from_scalar(g, |t| 3.0 * t + 1.0);
        assert!((f.at(0.25)[0] - 1.75).abs() < 1e-15);
        assert!((f.at(0.6)[0] - 2.8).abs() < 1e-14);
        assert!((f.at(1.0)[0] - 4.0).abs() < 1e-15);
    }
}
