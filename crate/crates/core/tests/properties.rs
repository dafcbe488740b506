use dfep::data::{random_instance, RandomSpec};
use dfep::greedy::build_with;
use dfep::impurity::{check_admissibility, pairs, powers};
use dfep::{ClassCounts, Impurity, ImpurityFn, Instance, Rational};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn counts() -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec(0u64..500, 1..6)
}

fn instance() -> impl Strategy<Value = Instance> {
    (2usize..=12, 1usize..=3, any::<u64>()).prop_map(|(n, k, seed)| {
        let tests = (usize::BITS - (n - 1).leading_zeros()) as usize + 2;
        random_instance(&mut ChaCha8Rng::seed_from_u64(seed), RandomSpec::binary(n, tests, k)).unwrap()
    })
}

fn hinged(a: u32) -> ImpurityFn {
    ImpurityFn::hinged(Rational::from_integer(a as i128)).unwrap()
}

proptest! {
    #[test]
    fn powers_two_is_twice_pairs(c in counts()) {
        let c = ClassCounts::from_slice(&c);
        prop_assert_eq!(powers(2, &c).unwrap(), 2 * pairs(&c).unwrap());
    }

    #[test]
    fn impurities_ignore_class_order(mut c in counts(), rot in 0usize..6) {
        let fs = [ImpurityFn::Pairs, ImpurityFn::powers(3).unwrap(), hinged(2), ImpurityFn::hinged_offset(Rational::new(3, 2)).unwrap()];
        let before: Vec<u128> = fs.iter().map(|f| f.evaluate(&ClassCounts::from_slice(&c)).unwrap()).collect();
        let len = c.len();
        c.rotate_left(rot % len);
        let after: Vec<u128> = fs.iter().map(|f| f.evaluate(&ClassCounts::from_slice(&c)).unwrap()).collect();
        prop_assert_eq!(before, after);
    }

    #[test]
    fn zero_alpha_is_pairs(c in counts()) {
        let c = ClassCounts::from_slice(&c);
        prop_assert_eq!(hinged(0).evaluate(&c).unwrap(), pairs(&c).unwrap());
        prop_assert_eq!(ImpurityFn::hinged_offset(Rational::from_integer(0)).unwrap().evaluate(&c).unwrap(), pairs(&c).unwrap());
    }

    #[test]
    fn pure_sets_have_zero_impurity(n in 0u64..1000, k in 1usize..5, at in 0usize..5) {
        let mut v = vec![0; k];
        v[at % k] = n;
        let c = ClassCounts::from_slice(&v);
        for f in [ImpurityFn::Pairs, ImpurityFn::powers(4).unwrap(), hinged(3)] {
            prop_assert_eq!(f.evaluate(&c).unwrap(), 0);
        }
    }

    #[test]
    fn greedy_trees_are_valid_and_zero_error(inst in instance()) {
        for f in [ImpurityFn::Pairs, ImpurityFn::powers(3).unwrap()] {
            let (tree, trace) = build_with(&inst, &inst.object_ids(), &inst.test_ids(), &f, 0).unwrap();
            tree.validate(&inst).unwrap();
            prop_assert_eq!(tree.misclassified(&inst).unwrap(), 0);
            prop_assert_eq!(tree.max_cost(&inst).unwrap(), tree.max_leaf_path_cost(&inst).unwrap());
            prop_assert_eq!(trace.nodes.len(), tree.nodes.len() - tree.num_leaves());
        }
    }

    #[test]
    fn hinged_leaves_reach_zero(inst in instance(), a in 0u32..4) {
        let f = hinged(a);
        let (tree, _) = build_with(&inst, &inst.object_ids(), &inst.test_ids(), &f, 0).unwrap();
        for c in tree.leaf_class_counts(&inst).unwrap() {
            prop_assert_eq!(f.evaluate(&c).unwrap(), 0);
        }
    }

    #[test]
    fn leaves_respect_delta(inst in instance(), d in 0u128..40) {
        let f = ImpurityFn::Pairs;
        let (tree, _) = build_with(&inst, &inst.object_ids(), &inst.test_ids(), &f, d).unwrap();
        for c in tree.leaf_class_counts(&inst).unwrap() {
            prop_assert!(f.evaluate(&c).unwrap() <= d);
        }
    }

    #[test]
    fn json_round_trips(inst in instance()) {
        let back = Instance::from_json(&inst.to_json()).unwrap();
        prop_assert_eq!(&back, &inst);
        let (tree, _) = build_with(&inst, &inst.object_ids(), &inst.test_ids(), &ImpurityFn::Pairs, 0).unwrap();
        prop_assert_eq!(dfep::DecisionTree::from_json(&tree.to_json()).unwrap(), tree);
    }
}

#[test]
fn singleton_polynomial_fails_admissibility() {
    let ground = Instance::from_rows(&[0, 1, 1, 0], &[vec![], vec![], vec![], vec![]], 2).unwrap();
    let f = ImpurityFn::parse_unchecked("poly:x1").unwrap();
    let report = check_admissibility(&f, &ground, 8);
    assert!(!report.is_admissible());
    let ok = ImpurityFn::parse_unchecked("poly:x1*x2 + 2*x1^2*x2").unwrap();
    assert!(check_admissibility(&ok, &ground, 8).is_admissible());
}
