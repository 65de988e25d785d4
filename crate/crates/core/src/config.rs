//! JSON problem files.
//!
//! Matrices are row-major nested arrays (`[[row], [row], ...]`); vectors are
//! flat arrays. Every object rejects unknown keys.
//!
//! ```json
//! {
//!   "alpha": 0.5, "beta": 0.25, "horizon": 1.0, "x0": [0.0],
//!   "operators": { "L": [[1.0]], "M": [[1.0]], "E": [[0.0]] },
//!   "channels": [ [[1.0]] ],
//!   "dynamics": { "forcing": [[0.0]], "C": [[0.0]], "D": [ [[1.0]] ] },
//!   "costs": [ { "P": [[1.0]], "p": [0.0] } ],
//!   "constraint": { "atoms": [[-1.0], [1.0]] },
//!   "solver": { "grid": 16, "n_list": [4, 16, 64, 256] }
//! }
//! ```
//!
//! Optional keys: `dynamics.nonlinearity` (`{"kind": "zero" | "sin" |
//! "saturation", "kappa": ...}`), `nonlocal` (`{"samples": [{"tau", "H"}],
//! "control": {"tau", "G"}}`), per-cost `offset` and `q` (`{"kind": "zero" |
//! "quadratic" | "linear" | "norm", ...}`), `constraint.dependence`
//! (`{"kind": "none" | "translate" | "scale", ...}`) and every `solver` field.

use std::path::Path;

use log::info;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{FiniteControlSet, StateDependence};
use crate::mild::{apriori_bound, SolverOptions};
use crate::optimizer::{ExperimentConfig, PBudget, RpBudget};
use crate::problem::{
    check_exponents, ControlCost, CostSpec, DynamicsSpec, Nonlinearity, NonlocalSpec, ProblemSpec,
};
use crate::sobolev::{semigroup_reach, OperatorTriple};

type Rows = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub alpha: f64,
    pub beta: f64,
    pub horizon: f64,
    pub x0: Vec<f64>,
    pub operators: OperatorsFile,
    pub channels: Vec<Rows>,
    pub dynamics: DynamicsFile,
    #[serde(default, skip_serializing_if = "NonlocalFile::is_empty")]
    pub nonlocal: NonlocalFile,
    pub costs: Vec<CostFile>,
    pub constraint: ConstraintFile,
    #[serde(default)]
    pub solver: SolverConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorsFile {
    #[serde(rename = "L")]
    pub l: Rows,
    #[serde(rename = "M")]
    pub m: Rows,
    #[serde(rename = "E")]
    pub e: Rows,
}

fn zero_nonlinearity() -> Nonlinearity {
    Nonlinearity::Zero
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsFile {
    pub forcing: Rows,
    #[serde(rename = "C")]
    pub c: Rows,
    #[serde(rename = "D")]
    pub d: Vec<Rows>,
    #[serde(default = "zero_nonlinearity")]
    pub nonlinearity: Nonlinearity,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlocalFile {
    #[serde(default)]
    pub samples: Vec<StateSampleFile>,
    #[serde(default)]
    pub control: Option<ControlSampleFile>,
}

impl NonlocalFile {
    fn is_empty(&self) -> bool {
        self.samples.is_empty() && self.control.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSampleFile {
    pub tau: f64,
    #[serde(rename = "H")]
    pub h: Rows,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlSampleFile {
    pub tau: f64,
    #[serde(rename = "G")]
    pub g: Rows,
}

fn zero_cost() -> ControlCost {
    ControlCost::Zero
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostFile {
    #[serde(default)]
    pub offset: f64,
    #[serde(rename = "P")]
    pub p_mat: Rows,
    pub p: Vec<f64>,
    #[serde(default = "zero_cost")]
    pub q: ControlCost,
}

fn no_dependence() -> StateDependence {
    StateDependence::None
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintFile {
    pub atoms: Rows,
    #[serde(default = "no_dependence")]
    pub dependence: StateDependence,
}

/// Numerical settings carried in the `solver` block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Cells of the control grid.
    pub grid: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub p_restarts: usize,
    pub p_sweeps: usize,
    pub rp_restarts: usize,
    pub rp_iterations: usize,
    pub n_list: Vec<usize>,
    pub gap_tol: f64,
    /// Minimum cells of each chattering grid (0: twice the control grid).
    pub min_fine_cells: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let o = SolverOptions::default();
        let p = PBudget::default();
        let rp = RpBudget::default();
        Self {
            grid: 16,
            tol: o.tol,
            max_iter: o.max_iter,
            p_restarts: p.restarts,
            p_sweeps: p.sweeps,
            rp_restarts: rp.restarts,
            rp_iterations: rp.iterations,
            n_list: vec![4, 16, 64, 256],
            gap_tol: 1e-2,
            min_fine_cells: 0,
        }
    }
}

impl SolverConfig {
    pub fn options(&self) -> SolverOptions {
        SolverOptions {
            tol: self.tol,
            max_iter: self.max_iter,
        }
    }

    pub fn p_budget(&self) -> PBudget {
        PBudget {
            restarts: self.p_restarts,
            sweeps: self.p_sweeps,
        }
    }

    pub fn rp_budget(&self) -> RpBudget {
        RpBudget {
            restarts: self.rp_restarts,
            iterations: self.rp_iterations,
            ..RpBudget::default()
        }
    }

    pub fn experiment(&self, seed: u64) -> ExperimentConfig {
        ExperimentConfig {
            n_list: self.n_list.clone(),
            rp_budget: self.rp_budget(),
            seed,
            opts: self.options(),
            gap_tol: self.gap_tol,
            min_fine_cells: self.min_fine_cells,
        }
    }
}

fn matrix(name: &str, rows: &Rows) -> Result<DMatrix<f64>> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || c == 0 || rows.iter().any(|row| row.len() != c) {
        return Err(Error::Schema(format!(
            "field `{name}`: expected a nonempty rectangular array of rows"
        )));
    }
    Ok(DMatrix::from_row_iterator(
        r,
        c,
        rows.iter().flatten().copied(),
    ))
}

fn rows_of(m: &DMatrix<f64>) -> Rows {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn vector(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

impl ProblemFile {
    /// Parses JSON; syntax and schema errors carry line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem files always serialize")
    }

    /// Builds and validates the problem.
    pub fn build(&self) -> Result<ProblemSpec> {
        let l = matrix("operators.L", &self.operators.l)?;
        let m = matrix("operators.M", &self.operators.m)?;
        let e = matrix("operators.E", &self.operators.e)?;
        check_exponents(self.alpha, self.beta, self.horizon)?;
        let triple = OperatorTriple::new(l, m, e, semigroup_reach(self.alpha, self.horizon)?)?;
        let channels = self
            .channels
            .iter()
            .enumerate()
            .map(|(i, b)| matrix(&format!("channels[{i}]"), b))
            .collect::<Result<Vec<_>>>()?;
        let dynamics = DynamicsSpec {
            forcing: self.dynamics.forcing.iter().map(|f| vector(f)).collect(),
            c: matrix("dynamics.C", &self.dynamics.c)?,
            d: self
                .dynamics
                .d
                .iter()
                .enumerate()
                .map(|(i, d)| matrix(&format!("dynamics.D[{i}]"), d))
                .collect::<Result<Vec<_>>>()?,
            nonlinearity: self.dynamics.nonlinearity,
        };
        let nonlocal = NonlocalSpec {
            samples: self
                .nonlocal
                .samples
                .iter()
                .enumerate()
                .map(|(i, s)| Ok((s.tau, matrix(&format!("nonlocal.samples[{i}].H"), &s.h)?)))
                .collect::<Result<Vec<_>>>()?,
            control: match &self.nonlocal.control {
                Some(c) => Some((c.tau, matrix("nonlocal.control.G", &c.g)?)),
                None => None,
            },
        };
        let costs = self
            .costs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                Ok(CostSpec {
                    offset: c.offset,
                    p_mat: matrix(&format!("costs[{i}].P"), &c.p_mat)?,
                    p_vec: vector(&c.p),
                    q: c.q.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if self.constraint.atoms.is_empty() {
            return Err(Error::Schema(
                "field `constraint.atoms`: at least one atom is required".into(),
            ));
        }
        let atoms = self.constraint.atoms.iter().map(|a| vector(a)).collect();
        let constraint = FiniteControlSet::new(atoms, self.constraint.dependence)?;
        if self.solver.grid < 2 {
            return Err(Error::InvalidArgument(format!(
                "solver.grid = {} must be at least 2",
                self.solver.grid
            )));
        }
        ProblemSpec::new(
            self.alpha,
            self.beta,
            self.horizon,
            vector(&self.x0),
            triple,
            channels,
            dynamics,
            nonlocal,
            costs,
            constraint,
        )
    }

    /// Inverse of [`ProblemFile::build`].
    pub fn from_spec(spec: &ProblemSpec, solver: SolverConfig) -> Self {
        Self {
            alpha: spec.alpha,
            beta: spec.beta,
            horizon: spec.horizon,
            x0: spec.x0.iter().copied().collect(),
            operators: OperatorsFile {
                l: rows_of(spec.triple.l()),
                m: rows_of(spec.triple.m()),
                e: rows_of(spec.triple.e()),
            },
            channels: spec.channels.iter().map(rows_of).collect(),
            dynamics: DynamicsFile {
                forcing: spec
                    .dynamics
                    .forcing
                    .iter()
                    .map(|f| f.iter().copied().collect())
                    .collect(),
                c: rows_of(&spec.dynamics.c),
                d: spec.dynamics.d.iter().map(rows_of).collect(),
                nonlinearity: spec.dynamics.nonlinearity,
            },
            nonlocal: NonlocalFile {
                samples: spec
                    .nonlocal
                    .samples
                    .iter()
                    .map(|(tau, h)| StateSampleFile {
                        tau: *tau,
                        h: rows_of(h),
                    })
                    .collect(),
                control: spec
                    .nonlocal
                    .control
                    .as_ref()
                    .map(|(tau, g)| ControlSampleFile {
                        tau: *tau,
                        g: rows_of(g),
                    }),
            },
            costs: spec
                .costs
                .iter()
                .map(|c| CostFile {
                    offset: c.offset,
                    p_mat: rows_of(&c.p_mat),
                    p: c.p_vec.iter().copied().collect(),
                    q: c.q.clone(),
                })
                .collect(),
            constraint: ConstraintFile {
                atoms: spec
                    .constraint
                    .base_atoms()
                    .iter()
                    .map(|a| a.iter().copied().collect())
                    .collect(),
                dependence: spec.constraint.dependence(),
            },
            solver,
        }
    }
}

/// Serializes a problem with the given solver block.
pub fn serialize(spec: &ProblemSpec, solver: &SolverConfig) -> String {
    ProblemFile::from_spec(spec, solver.clone()).to_json()
}

/// Parses and validates a problem, logging its derived constants.
pub fn parse_problem(text: &str) -> Result<(ProblemSpec, SolverConfig)> {
    let file = ProblemFile::from_json(text)?;
    let spec = file.build()?;
    log_constants(&spec);
    Ok((spec, file.solver))
}

/// Reads a problem file from disk.
pub fn load_problem(path: impl AsRef<Path>) -> Result<(ProblemSpec, SolverConfig)> {
    let path = path.as_ref();
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_problem(&text)
}

fn log_constants(spec: &ProblemSpec) {
    let t = &spec.triple;
    info!(
        "problem: n = {}, m = {}, r = {}, alpha = {}, beta = {}, a = {}",
        spec.n(),
        spec.m(),
        spec.r(),
        spec.alpha,
        spec.beta,
        spec.horizon
    );
    info!(
        "k1 = {:e}, k2 = {:e}, k3 = {:e}, C1 = {:e}, C2 = {:e}, M0 = {:e}",
        spec.dynamics.k1(),
        spec.nonlocal.k2(),
        spec.constraint.k3(),
        t.c1(),
        t.c2(),
        t.m0()
    );
    match apriori_bound(spec) {
        Ok(b) => info!("L0 = {:e}, phi = {:e}", b.l0, b.phi),
        Err(e) => info!("L0 unavailable: {e}"),
    }
}

/// The benchmark problem as a JSON document.
pub fn benchmark_json() -> &'static str {
    include_str!("../problems/benchmark.json")
}
