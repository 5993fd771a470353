use proptest::prelude::*;
use urysohn_core::approx::{directed_hausdorff, hausdorff_finite};
use urysohn_core::PointSet;

fn cloud(dim: usize) -> impl Strategy<Value = PointSet> {
    prop::collection::vec(prop::collection::vec(-10.0f64..10.0, dim), 1..16)
        .prop_map(move |pts| PointSet::from_points(dim, pts))
}

fn triple() -> impl Strategy<Value = (PointSet, PointSet, PointSet)> {
    (1usize..=3).prop_flat_map(|d| (cloud(d), cloud(d), cloud(d)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn metric_axioms((a, b, c) in triple()) {
        let ab = hausdorff_finite(&a, &b).unwrap();
        prop_assert_eq!(ab, hausdorff_finite(&b, &a).unwrap());
        prop_assert_eq!(hausdorff_finite(&a, &a).unwrap(), 0.0);
        prop_assert!(ab >= 0.0);
        prop_assert!(directed_hausdorff(&a, &b).unwrap() <= ab);
        let (ac, bc) = (hausdorff_finite(&a, &c).unwrap(), hausdorff_finite(&b, &c).unwrap());
        // rounding in the three Euclidean norms can cost a few ulps
        prop_assert!(ac <= (ab + bc) * (1.0 + 4.0 * f64::EPSILON), "{} > {} + {}", ac, ab, bc);
        let same = a.iter().all(|p| b.iter().any(|q| p == q)) && b.iter().all(|q| a.iter().any(|p| p == q));
        prop_assert_eq!(ab == 0.0, same);
    }

    #[test]
    fn order_and_duplicates_do_not_matter(a in cloud(2), b in cloud(2)) {
        let mut rev: Vec<Vec<f64>> = a.iter().map(|p| p.to_vec()).collect();
        rev.reverse();
        rev.push(rev[0].clone());
        let a2 = PointSet::from_points(2, rev);
        prop_assert_eq!(hausdorff_finite(&a, &b).unwrap(), hausdorff_finite(&a2, &b).unwrap());
    }
}
