mod common;

use common::{scalar, scalar_problem};
use fracrelax::fractional::TimeGrid;
use fracrelax::mild::{apriori_bound, solve_mild, SolverOptions};
use fracrelax::problem::{AtomSchedule, ControlCost, ControlSignal, NonlocalSpec, RelaxedControl};
use nalgebra::DVector;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn nonlocal_condition_holds_at_the_fixed_point(
        alpha in 0.3f64..0.9,
        e in 0.0f64..1.0,
        x0 in -1.0f64..1.0,
        h1 in -0.3f64..0.3,
        tau1 in 0.1f64..1.0,
        g in -0.3f64..0.3,
        u in -1.0f64..1.0,
    ) {
        let mut p = scalar_problem(alpha, e, x0, 0.2, &[-1.0, 1.0], ControlCost::Zero);
        p.nonlocal = NonlocalSpec { samples: vec![(tau1, scalar(h1))], control: Some((0.5, scalar(g))) };
        let grid = TimeGrid::new(1.0, 40).unwrap();
        let law = ControlSignal::constant(grid, 1, DVector::from_element(1, u));
        let sol = solve_mild(&p, &law, &grid, SolverOptions::default()).unwrap();
        let h = p.nonlocal_term(&sol.x, &DVector::from_element(1, u));
        prop_assert!((sol.x.values[0][0] + h[0] - x0).abs() <= 1e-10);
    }

    #[test]
    fn refinement_differences_follow_the_order(alpha in 0.3f64..0.9, e in 0.0f64..2.0, x0 in -1.0f64..1.0, u in -1.0f64..1.0) {
        let p = scalar_problem(alpha, e, x0, 0.0, &[-1.0, 1.0], ControlCost::Zero);
        let solve = |n: usize| {
            let grid = TimeGrid::new(1.0, n).unwrap();
            solve_mild(&p, &ControlSignal::constant(grid, 1, DVector::from_element(1, u)), &grid, SolverOptions::default()).unwrap().x
        };
        let diff = |n: usize| {
            let (a, b) = (solve(n), solve(2 * n));
            (0..=n).map(|k| (a.values[k][0] - b.values[2 * k][0]).abs()).fold(0.0, f64::max)
        };
        // C fitted on the coarsest pair must cover the finer ones.
        let c = diff(16) * 16f64.powf(alpha);
        for n in [32, 64] {
            prop_assert!(diff(n) <= c * (n as f64).powf(-alpha) + 1e-13);
        }
    }

    #[test]
    fn apriori_bound_dominates(
        alpha in 0.3f64..0.9,
        e in 0.0f64..1.0,
        x0 in -1.0f64..1.0,
        f0 in -1.0f64..1.0,
        idx in prop::collection::vec(0usize..3, 32),
        w in prop::collection::vec(0.0f64..1.0, 32),
    ) {
        let p = scalar_problem(alpha, e, x0, f0, &[-1.0, 0.5, 2.0], ControlCost::Zero);
        let l0 = apriori_bound(&p).unwrap().l0;
        let grid = TimeGrid::new(1.0, 32).unwrap();
        let a = solve_mild(&p, &AtomSchedule::new(grid, vec![idx], 3).unwrap(), &grid, SolverOptions::default()).unwrap();
        let weights = vec![w.iter().map(|&v| vec![v, 0.0, 1.0 - v]).collect()];
        let b = solve_mild(&p, &RelaxedControl::new(grid, weights, 3).unwrap(), &grid, SolverOptions::default()).unwrap();
        prop_assert!(a.x.sup_norm() <= l0 && b.x.sup_norm() <= l0);
    }

    #[test]
    fn solves_are_deterministic(alpha in 0.3f64..0.9, e in 0.0f64..1.0, idx in prop::collection::vec(0usize..2, 16)) {
        let p = scalar_problem(alpha, e, 0.3, 0.1, &[-1.0, 1.0], ControlCost::Zero);
        let grid = TimeGrid::new(1.0, 16).unwrap();
        let law = AtomSchedule::new(grid, vec![idx], 2).unwrap();
        let a = solve_mild(&p, &law, &grid, SolverOptions::default()).unwrap();
        let b = solve_mild(&p, &law, &grid, SolverOptions::default()).unwrap();
        prop_assert_eq!(a, b);
    }
}
