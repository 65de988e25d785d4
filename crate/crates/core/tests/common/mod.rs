#![allow(dead_code)]

use fracrelax::geometry::FiniteControlSet;
use fracrelax::problem::{
    ControlCost, CostSpec, DynamicsSpec, Nonlinearity, NonlocalSpec, ProblemSpec,
};
use fracrelax::sobolev::{semigroup_reach, OperatorTriple};
use nalgebra::{DMatrix, DVector};

pub fn scalar(v: f64) -> DMatrix<f64> {
    DMatrix::from_element(1, 1, v)
}

/// Scalar problem `D^α x + e x = f0 + u`, `g = x² + q(u)`, `β = α/2`, `a = 1`.
pub fn scalar_problem(
    alpha: f64,
    e: f64,
    x0: f64,
    f0: f64,
    atoms: &[f64],
    q: ControlCost,
) -> ProblemSpec {
    let triple = OperatorTriple::new(
        scalar(1.0),
        scalar(1.0),
        scalar(e),
        semigroup_reach(alpha, 1.0).unwrap(),
    )
    .unwrap();
    let dynamics = DynamicsSpec {
        forcing: vec![DVector::from_element(1, f0)],
        c: scalar(0.0),
        d: vec![scalar(1.0)],
        nonlinearity: Nonlinearity::Zero,
    };
    let mut cost = CostSpec::zero(1);
    cost.p_mat = scalar(1.0);
    cost.q = q;
    ProblemSpec::new(
        alpha,
        alpha / 2.0,
        1.0,
        DVector::from_element(1, x0),
        triple,
        vec![scalar(1.0)],
        dynamics,
        NonlocalSpec::none(),
        vec![cost],
        FiniteControlSet::scalar(atoms).unwrap(),
    )
    .unwrap()
}

pub fn benchmark() -> ProblemSpec {
    scalar_problem(0.5, 0.0, 0.0, 0.0, &[-1.0, 1.0], ControlCost::Zero)
}

pub fn sup(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}
