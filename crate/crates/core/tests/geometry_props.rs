use fracrelax::geometry::{convex_hull, hausdorff, hull_hausdorff, weak_norm};
use nalgebra::DVector;
use proptest::prelude::*;

fn planar(n: usize) -> impl Strategy<Value = Vec<DVector<f64>>> {
    prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), n).prop_filter_map(
        "distinct atoms",
        |pts| {
            let v: Vec<DVector<f64>> = pts
                .into_iter()
                .map(|(x, y)| DVector::from_vec(vec![x, y]))
                .collect();
            let distinct = v
                .iter()
                .enumerate()
                .all(|(i, a)| v[..i].iter().all(|b| (a - b).norm() > 1e-9));
            distinct.then_some(v)
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn weak_norm_is_below_the_holder_bound(
        vals in prop::collection::vec(-3.0f64..3.0, 1..60),
        a in 0.1f64..3.0,
        q in 1.05f64..8.0,
    ) {
        let step = a / vals.len() as f64;
        let cells: Vec<DVector<f64>> = vals.iter().map(|&v| DVector::from_element(1, v)).collect();
        let lq = (vals.iter().map(|v| v.abs().powf(q) * step).sum::<f64>()).powf(1.0 / q);
        prop_assert!(weak_norm(&cells, step, q).unwrap() <= a.powf(1.0 - 1.0 / q) * lq * (1.0 + 1e-12));
    }

    #[test]
    fn hull_contraction(a in planar(6), b in planar(6)) {
        let ha = convex_hull(&a).unwrap();
        let hb = convex_hull(&b).unwrap();
        prop_assert!(hull_hausdorff(&ha, &hb) <= hausdorff(&a, &b).unwrap() + 1e-12);
    }

    #[test]
    fn atoms_lie_in_their_hull(a in planar(7)) {
        let h = convex_hull(&a).unwrap();
        for p in &a {
            prop_assert!(h.contains(p));
        }
    }

    #[test]
    fn scalar_atoms_lie_in_their_hull(xs in prop::collection::vec(-5.0f64..5.0, 1..8)) {
        let mut xs = xs;
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        let atoms: Vec<DVector<f64>> = xs.iter().map(|&x| DVector::from_element(1, x)).collect();
        let h = convex_hull(&atoms).unwrap();
        prop_assert!(atoms.iter().all(|p| h.contains(p)));
    }
}
