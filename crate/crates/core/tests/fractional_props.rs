mod common;

use common::sup;
use fracrelax::fractional::{
    caputo_derivative, gronwall_bound, rl_integral, GridFunction, TimeGrid,
};
use proptest::prelude::*;

fn smooth(c: [f64; 3]) -> impl Fn(f64) -> f64 {
    move |t: f64| c[0] + c[1] * t + c[2] * (3.0 * t).sin()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rl_integral_is_linear(
        alpha in 0.05f64..1.0,
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
        cf in prop::array::uniform3(-2.0f64..2.0),
        cg in prop::array::uniform3(-2.0f64..2.0),
        cells in 8usize..80,
    ) {
        let grid = TimeGrid::new(1.0, cells).unwrap();
        let f = GridFunction::from_scalar(grid, smooth(cf));
        let g = GridFunction::from_scalar(grid, smooth(cg));
        let lhs = rl_integral(&f.linear_combination(a, &g, b).unwrap(), alpha).unwrap();
        let rhs = rl_integral(&f, alpha).unwrap().linear_combination(a, &rl_integral(&g, alpha).unwrap(), b).unwrap();
        prop_assert!(lhs.sup_distance(&rhs).unwrap() <= 1e-12 * (1.0 + rhs.sup_norm()));
    }

    #[test]
    fn rl_semigroup_error_shrinks(cf in prop::array::uniform3(-2.0f64..2.0)) {
        let err = |cells: usize| {
            let grid = TimeGrid::new(1.0, cells).unwrap();
            let f = GridFunction::from_scalar(grid, smooth(cf));
            let two = rl_integral(&rl_integral(&f, 0.4).unwrap(), 0.3).unwrap();
            two.sup_distance(&rl_integral(&f, 0.7).unwrap()).unwrap()
        };
        let (coarse, fine) = (err(25), err(200));
        prop_assert!(fine <= 0.5 * coarse || coarse <= 1e-13, "{coarse:e} -> {fine:e}");
    }

    #[test]
    fn caputo_inverts_rl(alpha in 0.2f64..0.9, c in prop::array::uniform3(-2.0f64..2.0)) {
        let f = move |t: f64| c[1] * t + c[2] * (3.0 * t).sin() + c[0] * t * t;
        let err = |cells: usize| {
            let grid = TimeGrid::new(1.0, cells).unwrap();
            let fx = GridFunction::from_scalar(grid, f);
            let back = caputo_derivative(&rl_integral(&fx, alpha).unwrap(), alpha).unwrap();
            sup(back.scalar().iter().zip(fx.scalar()).map(|(a, b)| a - b))
        };
        let (coarse, fine) = (err(100), err(400));
        let scale = 1.0 + c.iter().map(|v| v.abs()).sum::<f64>();
        // O(h): at least a factor 2 over a 4x refinement, and small in absolute terms.
        prop_assert!(fine <= 0.5 * coarse + 1e-12 && fine <= 0.05 * scale, "{coarse:e} -> {fine:e}");
    }

    #[test]
    fn gronwall_is_monotone(
        lambda in 0.1f64..1.5,
        dl in 0.0f64..1.0,
        gamma in 0.0f64..0.6,
        base in 0.0f64..2.0,
        slope in 0.0f64..2.0,
        bump in 0.0f64..1.0,
    ) {
        let grid = TimeGrid::new(1.0, 32).unwrap();
        let psi = GridFunction::from_scalar(grid, |t| base + slope * t);
        let bigger = GridFunction::from_scalar(grid, |t| base + bump + slope * t);
        let lo = gronwall_bound(&psi, lambda, gamma).unwrap().scalar();
        let hi_l = gronwall_bound(&psi, lambda + dl, gamma).unwrap().scalar();
        let hi_p = gronwall_bound(&bigger, lambda, gamma).unwrap().scalar();
        for k in 0..lo.len() {
            prop_assert!(hi_l[k] >= lo[k] && hi_p[k] >= lo[k]);
        }
    }
}
