mod common;

use common::{scalar, scalar_problem};
use fracrelax::fractional::TimeGrid;
use fracrelax::geometry::FiniteControlSet;
use fracrelax::mild::{MildKernel, SolverOptions};
use fracrelax::optimizer::{evaluate_p, solve_p, solve_rp, PBudget, RpBudget};
use fracrelax::problem::{
    AtomSchedule, ControlCost, CostSpec, DynamicsSpec, Nonlinearity, NonlocalSpec, ProblemSpec,
};
use fracrelax::sobolev::{semigroup_reach, OperatorTriple};
use nalgebra::DVector;
use proptest::prelude::*;

/// Scalar state driven by `r` channels, one cost per channel.
fn multi_channel(alpha: f64, e: f64, f0: f64, atoms: &[f64], r: usize, q: &[f64]) -> ProblemSpec {
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
        d: (0..r).map(|i| scalar(1.0 / (i + 1) as f64)).collect(),
        nonlinearity: Nonlinearity::Zero,
    };
    let costs = (0..r)
        .map(|i| {
            let mut c = CostSpec::zero(1);
            c.p_mat = scalar(1.0);
            c.q = ControlCost::Linear { coef: vec![q[i]] };
            c
        })
        .collect();
    ProblemSpec::new(
        alpha,
        alpha / 2.0,
        1.0,
        DVector::from_element(1, 0.2),
        triple,
        vec![scalar(1.0); r],
        dynamics,
        NonlocalSpec::none(),
        costs,
        FiniteControlSet::scalar(atoms).unwrap(),
    )
    .unwrap()
}

fn codes(base: usize, len: usize) -> Vec<Vec<usize>> {
    (0..base.pow(len as u32))
        .map(|mut c| {
            (0..len)
                .map(|_| {
                    let d = c % base;
                    c /= base;
                    d
                })
                .collect()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn relaxed_value_never_exceeds_atom_value(
        alpha in 0.3f64..0.9,
        e in 0.0f64..1.0,
        x0 in -0.5f64..0.5,
        f0 in -1.0f64..1.0,
        lo in -2.0f64..-0.1,
        hi in 0.1f64..2.0,
    ) {
        let p = scalar_problem(alpha, e, x0, f0, &[lo, hi], ControlCost::Zero);
        let grid = TimeGrid::new(1.0, 4).unwrap();
        let opts = SolverOptions::default();
        let atom = solve_p(&p, &grid, PBudget::default(), 0, opts).unwrap();
        let relaxed = solve_rp(&p, &grid, RpBudget::default(), 0, opts).unwrap();
        prop_assert!(relaxed.aggregate >= 0.0);
        prop_assert!(atom.aggregate - relaxed.aggregate >= -1e-8 * (1.0 + atom.aggregate), "{} < {}", atom.aggregate, relaxed.aggregate);
    }

    #[test]
    fn small_instances_match_brute_force(
        alpha in 0.3f64..0.9,
        e in 0.0f64..1.0,
        f0 in -1.0f64..1.0,
        atoms in prop::collection::vec(-2.0f64..2.0, 1..=2),
        r in 1usize..=2,
        cells in 1usize..=2,
        q in prop::collection::vec(-1.0f64..1.0, 2),
    ) {
        prop_assume!(atoms.len() == 1 || (atoms[0] - atoms[1]).abs() > 1e-6);
        let p = multi_channel(alpha, e, f0, &atoms, r, &q);
        let grid = TimeGrid::new(1.0, cells).unwrap();
        let opts = SolverOptions::default();
        let kernel = MildKernel::new(&p, &grid).unwrap();
        let brute = codes(atoms.len(), r * cells)
            .into_iter()
            .map(|code| {
                let indices = code.chunks(cells).map(<[usize]>::to_vec).collect();
                let law = AtomSchedule::new(grid, indices, atoms.len()).unwrap();
                evaluate_p(&p, &kernel, &law, opts).unwrap().aggregate
            })
            .fold(f64::INFINITY, f64::min);
        let best = solve_p(&p, &grid, PBudget::default(), 7, opts).unwrap();
        prop_assert_eq!(best.aggregate, brute);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn solvers_are_deterministic(seed in any::<u64>(), f0 in -1.0f64..1.0) {
        let p = scalar_problem(0.5, 0.3, 0.1, f0, &[-1.0, 0.0, 1.0], ControlCost::Quadratic { weight: 0.1, center: vec![0.0] });
        // 3^16 schedules: the seeded descent path, not enumeration.
        let grid = TimeGrid::new(1.0, 16).unwrap();
        let opts = SolverOptions::default();
        let budget = PBudget { restarts: 2, sweeps: 5 };
        prop_assert_eq!(solve_p(&p, &grid, budget, seed, opts).unwrap(), solve_p(&p, &grid, budget, seed, opts).unwrap());
        let budget = RpBudget { restarts: 2, iterations: 40, ..RpBudget::default() };
        prop_assert_eq!(solve_rp(&p, &grid, budget, seed, opts).unwrap(), solve_rp(&p, &grid, budget, seed, opts).unwrap());
    }
}
