mod common;

use common::gen::split_system;
use proptest::prelude::*;
use tightspan::split::{
    beta, decompose, is_octahedral_free, is_totally_decomposable, is_two_compatible, is_weakly_compatible,
    split_metric, WeightedSplitSystem, OCTAHEDRAL_BOUND,
};
use tightspan::FiniteMetric;

/// Four-point form: no points `x0..x3` and splits `S1, S2, S3` with `Si`
/// putting `x0, xi` on one side and the other two on the other.
fn four_point_weakly_compatible(s: &WeightedSplitSystem) -> bool {
    let n = s.ground_size();
    let shape = |k: usize, x: [usize; 4], i: usize| {
        let sp = s.split(k);
        let (j, l) = match i {
            1 => (2, 3),
            2 => (1, 3),
            _ => (1, 2),
        };
        sp.in_a(x[0]) == sp.in_a(x[i]) && sp.in_a(x[j]) == sp.in_a(x[l]) && sp.in_a(x[0]) != sp.in_a(x[j])
    };
    for x0 in 0..n {
        for x1 in 0..n {
            for x2 in 0..n {
                for x3 in 0..n {
                    let x = [x0, x1, x2, x3];
                    if (0..4).any(|a| (0..a).any(|b| x[a] == x[b])) {
                        continue;
                    }
                    let has = |i| (0..s.len()).any(|k| shape(k, x, i));
                    if has(1) && has(2) && has(3) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

#[test]
fn side_triple_check_is_weaker_than_the_four_point_form() {
    let s = WeightedSplitSystem::parse("1 2 | 3 4 : 1\n1 3 | 2 4 : 1\n1 4 | 2 3 : 1\n").unwrap();
    assert!(is_weakly_compatible(&s));
    assert!(!four_point_weakly_compatible(&s));
    // the metric is uniform, which the four pendant splits also produce
    assert_eq!(decompose(&split_metric(&s).unwrap()).unwrap().len(), 4);
}

proptest! {
    #[test]
    fn split_text_round_trips(s in split_system()) {
        prop_assert_eq!(WeightedSplitSystem::parse(&s.to_text()).unwrap(), s);
    }

    #[test]
    fn metric_text_round_trips(s in split_system()) {
        let m = split_metric(&s).unwrap();
        prop_assert_eq!(FiniteMetric::parse(&m.to_text()).unwrap(), m);
    }

    #[test]
    fn weakly_compatible_systems_decompose_to_themselves(s in split_system()) {
        prop_assume!(four_point_weakly_compatible(&s));
        prop_assert!(is_weakly_compatible(&s));
        let m = split_metric(&s).unwrap();
        prop_assert!(is_totally_decomposable(&m));
        let back = decompose(&m).unwrap();
        prop_assert_eq!(split_metric(&back).unwrap(), m);
        prop_assert_eq!(back, s);
    }

    #[test]
    fn decomposition_recovers_the_metric(s in split_system()) {
        let m = split_metric(&s).unwrap();
        if let Ok(d) = decompose(&m) {
            prop_assert!(is_weakly_compatible(&d));
            prop_assert_eq!(split_metric(&d).unwrap(), m);
        } else {
            prop_assert!(!is_totally_decomposable(&m));
        }
    }

    #[test]
    fn two_compatible_implies_the_other_properties(s in split_system()) {
        if is_two_compatible(&s) {
            prop_assert!(is_weakly_compatible(&s));
            prop_assert!(four_point_weakly_compatible(&s));
            prop_assert!(is_octahedral_free(&s, OCTAHEDRAL_BOUND).unwrap());
        }
    }

    #[test]
    fn beta_symmetries(s in split_system(), pick in prop::collection::vec(0usize..6, 4)) {
        let m = split_metric(&s).unwrap();
        let n = m.len();
        let [x, y, u, v] = [pick[0] % n, pick[1] % n, pick[2] % n, pick[3] % n];
        let b = beta(&m, x, y, u, v);
        prop_assert_eq!(&beta(&m, y, x, u, v), &b);
        prop_assert_eq!(&beta(&m, x, y, v, u), &b);
        prop_assert_eq!(&beta(&m, u, v, x, y), &b);
    }
}
