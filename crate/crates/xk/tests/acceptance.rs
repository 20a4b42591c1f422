mod common;

use std::time::{Duration, Instant};

use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use xk::norms::mt_norm;
use xk::rational::{q, qi};
use xk::suites::{hiprobe, mt_average_values, random_mt_instance, run_suite, SuiteConfig};
use xk::{Certificate, Q, Verdict};

struct Outcome {
    pass: bool,
    detail: String,
}

fn all_verified(cs: &[Certificate], claim: &str) -> bool {
    let hits: Vec<_> = cs.iter().filter(|c| c.claim_id == claim).collect();
    !hits.is_empty() && hits.iter().all(|c| c.verdict == Verdict::Verified)
}

fn val(c: &Certificate, k: &str) -> String {
    c.values.get(k).cloned().unwrap_or_default()
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let t = Instant::now();
    let mut o = f();
    let el = t.elapsed();
    if let Some(l) = limit {
        if el >= l {
            o.pass = false;
        }
        o.detail = format!("{} in {:.1?} (limit {:?})", o.detail, el, l);
    } else {
        o.detail = format!("{} in {:.1?}", o.detail, el);
    }
    o
}

fn fail(e: impl std::fmt::Display) -> Outcome {
    Outcome { pass: false, detail: format!("error: {e}") }
}

fn c1(cfg: &SuiteConfig) -> Outcome {
    match run_suite("biorthogonality", cfg) {
        Ok(cs) => Outcome {
            pass: all_verified(&cs, "biorthogonality") && val(&cs[0], "failures") == "0",
            detail: format!("{} elements, {} pairs, {} failures", val(&cs[0], "elements"), val(&cs[0], "pairs_checked"), val(&cs[0], "failures")),
        },
        Err(e) => fail(e),
    }
}

fn c2(cfg: &SuiteConfig) -> Outcome {
    match run_suite("eval-analysis", cfg) {
        Ok(cs) => Outcome {
            pass: all_verified(&cs, "eval-analysis") && all_verified(&cs, "eval-analysis-prefix"),
            detail: format!("{} elements checked, {} failures", val(&cs[0], "checked"), val(&cs[0], "failures")),
        },
        Err(e) => fail(e),
    }
}

fn c3(cfg: &SuiteConfig) -> Outcome {
    match run_suite("projections", cfg) {
        Ok(cs) => Outcome {
            pass: all_verified(&cs, "projections"),
            detail: format!(
                "initial {} interval {} tail {} d* {}",
                val(&cs[0], "initial"),
                val(&cs[0], "interval"),
                val(&cs[0], "tail"),
                val(&cs[0], "dstar_l1")
            ),
        },
        Err(e) => fail(e),
    }
}

fn c4(cfg: &SuiteConfig) -> Outcome {
    let cs = match run_suite("mt-oracle", cfg) {
        Ok(cs) => cs,
        Err(e) => return fail(e),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut agree = 0;
    for _ in 0..200 {
        let (x, p) = random_mt_instance(&mut rng, 6);
        agree += usize::from(mt_norm(&x, &p).0 == common::mt_recursive(&x, &p));
    }
    Outcome {
        pass: all_verified(&cs, "mt-oracle") && agree == 200,
        detail: format!("exhaustive {}/200, trees {}/200, recursive {agree}/200", val(&cs[0], "agree"), val(&cs[0], "trees_ok")),
    }
}

fn c5() -> Outcome {
    match mt_average_values() {
        Ok((v, w, _)) => Outcome { pass: v == q(1, 4) && w <= q(1, 16), detail: format!("value {v}, excluded {w}") },
        Err(e) => fail(e),
    }
}

fn c6(cfg: &SuiteConfig) -> Outcome {
    match run_suite("lowerest", cfg) {
        Ok(cs) => Outcome {
            pass: all_verified(&cs, "lower-estimate") && val(&cs[0], "passed") == "50",
            detail: format!("{}/{}", val(&cs[0], "passed"), val(&cs[0], "cases")),
        },
        Err(e) => fail(e),
    }
}

fn c7(cfg: &SuiteConfig) -> Outcome {
    match run_suite("treelike", cfg) {
        Ok(cs) => Outcome {
            pass: all_verified(&cs, "treelike-stage") && all_verified(&cs, "treelike-forged") && val(&cs[1], "pairs") == "20",
            detail: format!("stage pairs {} failures {}, forged pairs {} failures {}", val(&cs[0], "pairs"), val(&cs[0], "failures"), val(&cs[1], "pairs"), val(&cs[1], "failures")),
        },
        Err(e) => fail(e),
    }
}

fn c8(cfg: &SuiteConfig) -> Outcome {
    let cs = match run_suite("depseq", cfg) {
        Ok(cs) => cs,
        Err(e) => return fail(e),
    };
    let inv_m = q(1, 4);
    let mut ones = 0;
    let mut zeros = 0;
    let mut exact = true;
    for c in &cs {
        let eps = match c.claim_id.as_str() {
            "dependent-sequence-one" => {
                ones += 1;
                qi(1)
            }
            "dependent-sequence-zero" => {
                zeros += 1;
                Q::zero()
            }
            _ => continue,
        };
        exact &= c.verdict == Verdict::Verified;
        let len: i64 = val(c, "length").parse().unwrap_or(0);
        exact &= (2..=5).contains(&len);
        for s in 1..=len {
            let want = xk::rational::fmt_q(&(qi(s) * &eps * &inv_m));
            exact &= val(c, &format!("partial_{s}")) == want;
        }
    }
    Outcome {
        pass: exact && ones == 10 && zeros == 10,
        detail: format!("{ones} eps=1 and {zeros} eps=0 sequences, prefix identities exact: {exact}"),
    }
}

fn c9(cfg: &SuiteConfig) -> Outcome {
    match hiprobe(cfg) {
        Ok((_, reps)) => {
            let good = reps.iter().filter(|r| r.direction() && r.sum_witness == r.expected_witness).count();
            let r = &reps[0];
            Outcome {
                pass: reps.len() == 10 && good >= 9,
                detail: format!("{good}/{} probes with ||y-z|| lower {} < witness {}", reps.len(), r.difference.lower, r.sum_witness),
            }
        }
        Err(e) => fail(e),
    }
}

fn c10(cfg: &SuiteConfig) -> Outcome {
    match run_suite("basicineq", cfg) {
        Ok(cs) => {
            let ok = cs.iter().filter(|c| c.verdict == Verdict::Verified && val(c, "tree_ok") == "1").count();
            Outcome { pass: cs.len() == 20 && ok == 20, detail: format!("{ok}/{}", cs.len()) }
        }
        Err(e) => fail(e),
    }
}

fn c11(cfg: &SuiteConfig) -> Outcome {
    let mut same = 0;
    let names = ["treelike", "lowerest", "basicineq", "depseq", "mt-oracle"];
    for name in names {
        let a = run_suite(name, cfg).map(|cs| cs.iter().map(Certificate::to_canonical).collect::<Vec<_>>());
        let b = run_suite(name, cfg).map(|cs| cs.iter().map(Certificate::to_canonical).collect::<Vec<_>>());
        if matches!((&a, &b), (Ok(x), Ok(y)) if x == y) {
            same += 1;
        }
    }
    Outcome { pass: same == names.len(), detail: format!("{same}/{} suites byte-identical on re-run", names.len()) }
}

fn main() {
    let cfg = SuiteConfig::default();
    let secs = Duration::from_secs;
    let results = [
        ("biorthogonality", timed(Some(secs(60)), || c1(&cfg))),
        ("evaluation analysis", timed(Some(secs(60)), || c2(&cfg))),
        ("projection bounds", timed(None, || c3(&cfg))),
        ("mixed Tsirelson oracle", timed(Some(secs(120)), || c4(&cfg))),
        ("averaging vector", timed(Some(secs(300)), c5)),
        ("lower estimate", timed(None, || c6(&cfg))),
        ("tree-like", timed(None, || c7(&cfg))),
        ("dependent sequences", timed(None, || c8(&cfg))),
        ("HI probe direction", timed(None, || c9(&cfg))),
        ("basic inequality", timed(None, || c10(&cfg))),
        ("determinism", timed(None, || c11(&cfg))),
    ];
    let mut failed = 0;
    for (i, (name, o)) in results.iter().enumerate() {
        println!("criterion {:>2} {:<24} {}  {}", i + 1, name, if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
