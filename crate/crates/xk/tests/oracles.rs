mod common;

use num_traits::{ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use xk::engine::{d_vector, eval, stage_matrix};
use xk::norms::{mt_norm, mt_norm_exhaustive};
use xk::rational::{q, qi};
use xk::spaces::{net_elements, net_size, Manifest, NetPolicy};
use xk::suites::{linear_registry, random_blocks, random_mt_instance, random_registry, toy_registry, SuiteConfig};
use xk::{OddGuard, ParameterSchedule, Q, Which};

#[test]
fn d_vectors_match_dense_inverse() {
    let reg = toy_registry(&SuiteConfig::default(), OddGuard::Enforce, 4).unwrap();
    let ids = reg.gamma_upto(4);
    assert!(ids.len() > 20);
    let inv = common::dense_inverse(&reg, &ids);
    for (k, g) in ids.iter().enumerate() {
        let d = d_vector(&reg, *g, 4).unwrap();
        for (i, h) in ids.iter().enumerate() {
            let got = d.get(h).cloned().unwrap_or_else(Q::zero);
            assert_eq!(got, inv[i][k], "d_{g}({h})");
        }
    }
}

#[test]
fn random_registry_matches_dense_inverse() {
    let reg = random_registry(ParameterSchedule::toy_power(3), 3, 9, 2).unwrap();
    let top = reg.max_rank();
    let ids = reg.gamma_upto(top);
    let inv = common::dense_inverse(&reg, &ids);
    for (k, g) in ids.iter().enumerate() {
        let d = d_vector(&reg, *g, top).unwrap();
        for (i, h) in ids.iter().enumerate() {
            assert_eq!(d.get(h).cloned().unwrap_or_else(Q::zero), inv[i][k]);
        }
    }
    assert!(stage_matrix(&reg, top).unwrap().biorthogonality(&reg).failures.is_empty());
}

#[test]
fn mt_norm_matches_recursive_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..300 {
        let (x, p) = random_mt_instance(&mut rng, 7);
        let want = common::mt_recursive(&x, &p);
        assert_eq!(mt_norm(&x, &p).0, want);
        assert_eq!(mt_norm_exhaustive(&x, &p, 7).unwrap(), want);
        let ex = p.clone().excluding(1);
        assert_eq!(mt_norm(&x, &ex).0, common::mt_recursive(&x, &ex));
    }
}

#[test]
fn small_average_by_hand() {
    // (1/4)(e_1+..+e_4) with one level l = 4, θ = 1/2: best is θ·Σ|x| = 1/2.
    let p = xk::norms::MTParams::new(vec![xk::norms::MTLevel { j: 1, l: 4, theta: q(1, 2) }], None, "t").unwrap();
    let x = xk::norms::average_vector(4);
    assert_eq!(mt_norm(&x, &p).0, q(1, 2));
    assert_eq!(common::mt_recursive(&x, &p), q(1, 2));
}

#[test]
fn factorial_net_counts_lattice_points() {
    let m = Manifest::new(ParameterSchedule::toy_small(), Which::XK, NetPolicy::SignedUnits, OddGuard::Enforce, 2);
    let reg = m.build().unwrap();
    for (p, n) in [(0u32, 1u32), (1, 2), (0, 2)] {
        let w = reg.window(p, n).len();
        for over in [1u64, 2, 3] {
            let d = (1..=over).product::<u64>() as usize;
            let policy = NetPolicy::FactorialLattice(Some(over));
            let want = common::l1_lattice_count(w, d);
            assert_eq!(net_size(w, policy, n).to_u128().unwrap(), want);
            let elems = net_elements(&reg, n, p, policy, 1_000_000).unwrap();
            assert_eq!(elems.len() as u128, want);
            assert!(elems.iter().all(|f| f.l1() <= qi(1)));
        }
    }
}

#[test]
fn lower_estimate_identity_recomputed() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for seed in 0..10 {
        let mut reg = random_registry(ParameterSchedule::toy_linear(16), seed, 30, 2).unwrap();
        let xs = random_blocks(&reg, &mut rng, 3, 2).unwrap();
        let le = xk::analysis::lower_estimate_witness(&mut reg, &xs, 1).unwrap();
        let total = xs.iter().fold(Q::zero(), |acc, x| acc + eval(&reg, x, le.gamma).unwrap());
        let m2 = reg.schedule().weight_value(2).unwrap();
        let sum: Q = le.maxabs.iter().cloned().sum();
        assert_eq!(total, &m2 * &sum);
        for (r, x) in xs.iter().enumerate() {
            let lo = if r == 0 { 0 } else { le.cuts[r - 1] };
            let hi = le.cuts[r];
            let vals = xk::engine::values(&reg, x, reg.max_rank()).unwrap();
            let want = vals
                .iter()
                .filter(|(g, _)| {
                    let k = reg.rank(**g).unwrap();
                    k > lo && k < hi
                })
                .map(|(_, v)| num_traits::Signed::abs(v))
                .max()
                .unwrap_or_else(Q::zero);
            assert_eq!(le.maxabs[r], want, "block {r}");
        }
    }
}

#[test]
fn forged_chain_fork_point() {
    let mut reg = linear_registry(512, Which::XK).unwrap();
    let (a, b) = xk::suites::forked_chains(&mut reg, 1, 2, 1, 2).unwrap();
    assert_eq!(xk::spaces::check_treelike(&reg, a, b).unwrap(), 3);
}
