use proptest::collection::{btree_set, vec};
use proptest::prelude::*;
use tepkit::destroy_repair::removal_count;
use tepkit::fixtures;
use tepkit::hedging::{beta_intersection, consensus_average, union_plan};
use tepkit::report::gap_percent;
use tepkit::Plan;

fn plans() -> impl Strategy<Value = Vec<Plan>> {
    vec(btree_set(7usize..21, 0..14).prop_map(Plan::from_ids), 1..8)
}

proptest! {
    #[test]
    fn intersection_lies_inside_union(ps in plans(), beta in 0.01f64..=1.0) {
        let inter = beta_intersection(&ps, beta).unwrap();
        let all = union_plan(&ps);
        prop_assert!(inter.is_subset(&all));
        prop_assert_eq!(beta_intersection(&ps, 1.0 / ps.len() as f64).unwrap(), all);
    }

    #[test]
    fn higher_beta_shrinks_the_intersection(ps in plans(), a in 0.01f64..=1.0, b in 0.01f64..=1.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(beta_intersection(&ps, hi).unwrap().is_subset(&beta_intersection(&ps, lo).unwrap()));
    }

    #[test]
    fn consensus_is_a_fraction(ps in plans()) {
        let g6 = fixtures::g6();
        let p = vec![1.0 / ps.len() as f64; ps.len()];
        let all = union_plan(&ps);
        for (k, x) in consensus_average(&g6, &ps, &p) {
            prop_assert!((0.0..=1.0).contains(&x));
            prop_assert_eq!(x > 0.0, all.contains(k));
        }
    }

    #[test]
    fn removal_count_stays_in_range(rt in 1e-6f64..=1.0, n in 1usize..500) {
        let c = removal_count(rt, n);
        prop_assert!((1..=n).contains(&c));
        prop_assert!((c as f64 - rt * n as f64).abs() <= 1.0);
    }

    #[test]
    fn gap_sign_follows_the_bounds(ba in 1.0f64..1e7, ph in 1.0f64..1e7) {
        let g = gap_percent(ph, ba);
        prop_assert_eq!(g < 0.0, ph < ba);
    }
}
