mod common;

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use xk::analysis::split_by_local_weight;
use xk::engine::{check_analysis_identity, stage_matrix, values};
use xk::norms::{mt_norm, verify_norming_tree};
use xk::rational::{fmt_q, parse_q, q};
use xk::spaces::check_containment;
use xk::suites::{random_blocks, random_mt_instance, random_registry};
use xk::{Certificate, Func, GammaId, Kind, ParameterSchedule, Q, Verdict};

fn rational() -> impl Strategy<Value = Q> {
    (-1000i64..1000, 1i64..500).prop_map(|(n, d)| q(n, d))
}

fn vector() -> impl Strategy<Value = BTreeMap<u64, Q>> {
    prop::collection::btree_map(1u64..30, rational(), 1..6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rational_text_round_trip(x in rational()) {
        prop_assert_eq!(parse_q(&fmt_q(&x)).unwrap(), x);
    }

    #[test]
    fn func_linearity(a in prop::collection::vec((0u32..20, rational()), 0..8),
                      b in prop::collection::vec((0u32..20, rational()), 0..8),
                      c in rational()) {
        let f = Func::from_pairs(a.into_iter().map(|(g, v)| (GammaId(g), v)));
        let g = Func::from_pairs(b.into_iter().map(|(g, v)| (GammaId(g), v)));
        prop_assert_eq!(f.plus(&g).minus(&g), f.clone());
        prop_assert_eq!(f.plus(&g).scaled(&c), f.scaled(&c).plus(&g.scaled(&c)));
        prop_assert!(f.plus(&g).l1() <= f.l1() + g.l1());
    }

    #[test]
    fn mt_norm_is_a_norm(seed in any::<u64>(), y in vector(), c in rational()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, p) = random_mt_instance(&mut rng, 6);
        let (v, tree) = mt_norm(&x, &p);
        prop_assert_eq!(&v, &common::mt_recursive(&x, &p));
        let sup = x.values().map(|c| c.abs()).max().unwrap();
        let l1: Q = x.values().map(|c| c.abs()).sum();
        prop_assert!(sup <= v && v <= l1);
        let scaled: BTreeMap<u64, Q> = x.iter().map(|(k, a)| (*k, a * &c)).filter(|(_, a)| !a.is_zero()).collect();
        prop_assert_eq!(mt_norm(&scaled, &p).0, &v * c.abs());
        let mut sum = x.clone();
        for (k, a) in &y {
            *sum.entry(*k).or_insert_with(Q::zero) += a;
        }
        sum.retain(|_, a| !a.is_zero());
        prop_assert!(mt_norm(&sum, &p).0 <= &v + mt_norm(&y, &p).0);
        let t = tree.unwrap();
        prop_assert!(verify_norming_tree(&t, &p).is_ok());
        prop_assert_eq!(t.eval(&x, &p), Some(v));
    }

    #[test]
    fn certificate_round_trip(x in rational(), n in any::<u32>(), seed in any::<u64>()) {
        let reg = xk::Registry::new(ParameterSchedule::toy_small(), xk::Which::XK, xk::OddGuard::Enforce);
        let c = Certificate::new("prop", "x", &reg, n, &serde_json::json!({"n": n}))
            .value("x", &x)
            .verdict(Verdict::Reported)
            .with_run(Some("units".into()), Some(seed));
        let back = Certificate::from_json(&serde_json::from_str(&c.to_canonical()).unwrap()).unwrap();
        prop_assert_eq!(back.to_canonical(), c.to_canonical());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn random_registries_are_consistent(seed in any::<u64>(), per_rank in 1usize..3) {
        let reg = random_registry(ParameterSchedule::toy_power(3), seed, 10, per_rank).unwrap();
        prop_assert!(check_containment(&reg).is_ok());
        let top = reg.max_rank();
        let rep = stage_matrix(&reg, top).unwrap().biorthogonality(&reg);
        prop_assert!(rep.failures.is_empty() && rep.unit_diagonal);
        for r in reg.records().iter().filter(|r| r.kind != Kind::Base) {
            prop_assert!(check_analysis_identity(&reg, r.id).unwrap());
        }
    }

    #[test]
    fn local_weight_split_is_additive(seed in any::<u64>(), thresh in 1usize..4) {
        let reg = random_registry(ParameterSchedule::toy_linear(8), seed, 14, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xs = random_blocks(&reg, &mut rng, 1, 3).unwrap();
        let top = reg.max_rank();
        let (y, z) = split_by_local_weight(&reg, &xs[0], thresh, top).unwrap();
        let whole = values(&reg, &xs[0], top).unwrap();
        let parts = values(&reg, &y.plus(&z), top).unwrap();
        prop_assert_eq!(whole, parts);
    }
}
