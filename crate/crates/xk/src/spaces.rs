//! Index-set generators for `Γ^max` and `Γ^K`, the nets `B_{n,p}`, forging of
//! prescribed analyses and the tree-like check for odd-weight chains.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive};
use serde_json::{json, Value};

use crate::engine::evaluation_analysis;
use crate::error::{Error, Result};
use crate::func::Func;
use crate::rational::{one, Q};
use crate::registry::{Draft, GammaId, Kind, OddGuard, Registry, Which};
use crate::schedule::ParameterSchedule;

pub const DEFAULT_STAGE_CAP: usize = 20_000;
pub const DEFAULT_NET_CAP: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NetPolicy {
    SignedUnits,
    DyadicAverages(usize),
    /// Rationals with denominator dividing `N_n!`; `None` means `N_n = n`.
    FactorialLattice(Option<u64>),
}

impl fmt::Display for NetPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NetPolicy::SignedUnits => write!(f, "units"),
            NetPolicy::DyadicAverages(k) => write!(f, "dyadic:{k}"),
            NetPolicy::FactorialLattice(None) => write!(f, "factorial"),
            NetPolicy::FactorialLattice(Some(n)) => write!(f, "factorial:{n}"),
        }
    }
}

impl FromStr for NetPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("unknown net policy {s:?}"));
        match s.split_once(':') {
            None if s == "units" => Ok(NetPolicy::SignedUnits),
            None if s == "factorial" => Ok(NetPolicy::FactorialLattice(None)),
            Some(("dyadic", k)) => match k.parse() {
                Ok(k) if k >= 1 => Ok(NetPolicy::DyadicAverages(k)),
                _ => Err(bad()),
            },
            Some(("factorial", n)) => n.parse().map(|n| NetPolicy::FactorialLattice(Some(n))).map_err(|_| bad()),
            _ => Err(bad()),
        }
    }
}

fn binom(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::ZERO;
    }
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

fn ceil_log2(k: usize) -> u32 {
    usize::BITS - (k.max(1) - 1).leading_zeros()
}

fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |a, k| a * k)
}

/// Number of functionals `net_elements` would return on a window of size `w`.
pub fn net_size(w: usize, policy: NetPolicy, n: u32) -> BigUint {
    match policy {
        NetPolicy::SignedUnits => BigUint::from(2 * w),
        NetPolicy::DyadicAverages(k) => {
            (1..=k.min(w)).map(|kk| binom(w, kk) * (BigUint::one() << kk)).sum()
        }
        NetPolicy::FactorialLattice(over) => {
            let d = factorial(over.unwrap_or(n as u64));
            let dd = d.to_usize().unwrap_or(usize::MAX);
            (0..=w.min(dd)).map(|k| (BigUint::one() << k) * binom(w, k) * binom_big(&d, k)).sum()
        }
    }
}

fn binom_big(n: &BigUint, k: usize) -> BigUint {
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - BigUint::from(i)) / BigUint::from(i + 1);
    }
    acc
}

fn combinations(w: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, w: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..w {
            if w - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, w, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, w, k, &mut Vec::new(), &mut out);
    out
}

/// The net `B_{n,p}` of the policy, supported in `Γ_n \ Γ_p`.
pub fn net_elements(reg: &Registry, n: u32, p: u32, policy: NetPolicy, cap: usize) -> Result<Vec<Func>> {
    if p >= n && !(p == n && n > 0) {
        return Err(Error::InvalidArgument(format!("net B_{{{n},{p}}} needs p < n")));
    }
    crate::engine::check_stage(reg, n)?;
    let window = reg.window(p, n);
    let count = net_size(window.len(), policy, n);
    if count > BigUint::from(cap) {
        return Err(Error::NetTooLarge { count: count.to_usize().unwrap_or(usize::MAX), cap });
    }
    let mut out = Vec::new();
    match policy {
        NetPolicy::SignedUnits => {
            for g in &window {
                out.push(Func::unit(*g));
                out.push(Func::single(*g, -one()));
            }
        }
        NetPolicy::DyadicAverages(k) => {
            for kk in 1..=k.min(window.len()) {
                let c = Q::new(BigInt::one(), BigInt::one() << ceil_log2(kk));
                for subset in combinations(window.len(), kk) {
                    for signs in 0u64..(1 << kk) {
                        let f = Func::from_pairs(subset.iter().enumerate().map(|(i, &s)| {
                            let v = if signs >> i & 1 == 0 { c.clone() } else { -c.clone() };
                            (window[s], v)
                        }));
                        out.push(f);
                    }
                }
            }
        }
        NetPolicy::FactorialLattice(over) => {
            let d = factorial(over.unwrap_or(n as u64)).to_i64().ok_or(Error::NetTooLarge { count: usize::MAX, cap })?;
            let mut cur = vec![0i64; window.len()];
            lattice(&window, d, 0, d, &mut cur, &mut out);
        }
    }
    Ok(out)
}

fn lattice(window: &[GammaId], d: i64, i: usize, left: i64, cur: &mut Vec<i64>, out: &mut Vec<Func>) {
    if i == window.len() {
        out.push(Func::from_pairs(
            window.iter().zip(cur.iter()).map(|(g, c)| (*g, Q::new((*c).into(), d.into()))),
        ));
        return;
    }
    for c in -left..=left {
        cur[i] = c;
        lattice(window, d, i + 1, left - c.abs(), cur, out);
    }
    cur[i] = 0;
}

/// Generation inputs for a registry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    pub schedule: ParameterSchedule,
    pub which: Which,
    pub net: NetPolicy,
    pub odd_guard: OddGuard,
    pub cap: usize,
    pub stage: u32,
}

impl Manifest {
    pub fn new(schedule: ParameterSchedule, which: Which, net: NetPolicy, odd_guard: OddGuard, stage: u32) -> Self {
        Manifest { schedule, which, net, odd_guard, cap: DEFAULT_STAGE_CAP, stage }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schedule": self.schedule.to_json(),
            "discipline": self.which.as_str(),
            "net": self.net.to_string(),
            "odd_guard": self.odd_guard.as_str(),
            "cap": self.cap,
            "stage": self.stage,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let s = |k: &str| v.get(k).and_then(Value::as_str);
        let schedule = ParameterSchedule::from_json(
            v.get("schedule").ok_or_else(|| Error::Parse("manifest needs a schedule".into()))?,
        )?;
        let which = match s("discipline").unwrap_or("XK") {
            "XK" | "xk" => Which::XK,
            "BmT" | "bmt" => Which::BmT,
            other => return Err(Error::Parse(format!("unknown discipline {other:?}"))),
        };
        let net = s("net").unwrap_or("units").parse()?;
        let odd_guard = match s("odd_guard").unwrap_or("enforce") {
            "enforce" => OddGuard::Enforce,
            "waive" => OddGuard::Waive,
            other => return Err(Error::Parse(format!("unknown odd_guard {other:?}"))),
        };
        let cap = v.get("cap").and_then(Value::as_u64).unwrap_or(DEFAULT_STAGE_CAP as u64) as usize;
        let stage = v.get("stage").and_then(Value::as_u64).unwrap_or(1) as u32;
        Ok(Manifest { schedule, which, net, odd_guard, cap, stage })
    }

    /// A fresh registry with stages `1..=stage` generated.
    pub fn build(&self) -> Result<Registry> {
        let mut reg = Registry::new(self.schedule.clone(), self.which, self.odd_guard);
        generate_upto(&mut reg, self.net, self.stage, self.cap)?;
        Ok(reg)
    }
}

fn stage_families(reg: &Registry, net: NetPolicy, q: u32, cap: usize) -> Result<Vec<Vec<Draft>>> {
    let n = q - 1;
    let s = reg.schedule();
    let len = s.len();
    let mut nets: BTreeMap<u32, Vec<Func>> = BTreeMap::new();
    let mut get_net = |p: u32| -> Result<Vec<Func>> {
        if let Some(v) = nets.get(&p) {
            return Ok(v.clone());
        }
        let v = if p == n && n > 0 {
            match net {
                NetPolicy::FactorialLattice(_) => vec![Func::zero()],
                _ => Vec::new(),
            }
        } else {
            net_elements(reg, n, p, net, DEFAULT_NET_CAP.max(cap))?
        };
        nets.insert(p, v.clone());
        Ok(v)
    };
    let ages_ok = |g: GammaId, j: usize| -> Result<bool> {
        let r = reg.record(g)?;
        Ok(r.weight_index == Some(j) && BigUint::from(r.age.unwrap_or(0)) < *s.n(j)?)
    };
    let mut fams = Vec::new();
    let mut total = 0usize;
    let mut push = |fams: &mut Vec<Vec<Draft>>, name: String, drafts: Vec<Draft>| -> Result<()> {
        total += drafts.len();
        if total > cap {
            return Err(Error::CombinatorialBlowup { stage: q, family: name, count: total, cap });
        }
        if !drafts.is_empty() {
            fams.push(drafts);
        }
        Ok(())
    };
    match reg.which() {
        Which::BmT => {
            for j in 1..=len.min(q as usize) {
                let d = get_net(0)?.into_iter().map(|b| Draft::type1(q, j, b)).collect();
                push(&mut fams, format!("type1 weight {j}"), d)?;
            }
            for j in 1..=len.min(n.saturating_sub(1) as usize) {
                let mut d = Vec::new();
                for p in j as u32..n {
                    let b = get_net(p)?;
                    for &xi in reg.delta(p) {
                        if ages_ok(xi, j)? {
                            d.extend(b.iter().map(|f| Draft::type2(q, xi, j, f.clone())));
                        }
                    }
                    if d.len() > cap {
                        break;
                    }
                }
                push(&mut fams, format!("type2 weight {j}"), d)?;
            }
        }
        Which::XK => {
            for j in (2..=len.min(q as usize)).step_by(2) {
                let d = get_net(0)?.into_iter().map(|b| Draft::type1(q, j, b)).collect();
                push(&mut fams, format!("type1 weight {j}"), d)?;
            }
            for j in (2..=len.min(n as usize)).step_by(2) {
                let mut d = Vec::new();
                for p in j as u32..=n {
                    let xis: Vec<GammaId> =
                        reg.delta(p).iter().copied().filter(|&xi| ages_ok(xi, j).unwrap_or(false)).collect();
                    if xis.is_empty() {
                        continue;
                    }
                    let b = get_net(p)?;
                    for xi in xis {
                        d.extend(b.iter().map(|f| Draft::type2(q, xi, j, f.clone())));
                    }
                    if d.len() > cap {
                        break;
                    }
                }
                push(&mut fams, format!("type2 weight {j}"), d)?;
            }
            let waive = reg.odd_guard() == OddGuard::Waive && s.mode() == crate::schedule::Mode::Toy;
            for j in (1..=len.min(q as usize)).step_by(2) {
                let nj = s.n(j)?;
                let mut d = Vec::new();
                for eta in reg.gamma_upto(n) {
                    let Some(w) = reg.weight_index(eta)? else { continue };
                    if w % 4 == 2 && (waive || *s.m(w)? > nj * nj) {
                        d.push(Draft::type1(q, j, Func::unit(eta)));
                    }
                }
                push(&mut fams, format!("odd type1 weight {j}"), d)?;
            }
            for j in (1..=len.min(n as usize)).step_by(2) {
                let mut d = Vec::new();
                for p in j as u32..=n {
                    for &xi in reg.delta(p) {
                        if !ages_ok(xi, j)? {
                            continue;
                        }
                        let target = 4 * reg.sigma(xi)?;
                        if target > len as u64 {
                            continue;
                        }
                        for eta in reg.window(p, n) {
                            if reg.weight_index(eta)? == Some(target as usize) {
                                d.push(Draft::type2(q, xi, j, Func::unit(eta)));
                            }
                        }
                    }
                }
                push(&mut fams, format!("odd type2 weight {j}"), d)?;
            }
        }
    }
    Ok(fams)
}

/// Materializes `Δ_q`; stages below `q` must already be generated.
pub fn generate_stage(reg: &mut Registry, net: NetPolicy, q: u32, cap: usize) -> Result<Vec<GammaId>> {
    if q == 0 || reg.generated_stage() + 1 != q {
        return Err(Error::InvalidArgument(format!(
            "stage {q} requested but stages are generated up to {}",
            reg.generated_stage()
        )));
    }
    let mut ids = Vec::new();
    if q == 1 {
        ids.push(reg.intern(Draft::base())?);
    } else {
        for fam in stage_families(reg, net, q, cap)? {
            for d in fam {
                ids.push(reg.intern(d)?);
            }
        }
    }
    reg.set_generated(q);
    Ok(ids)
}

pub fn generate_upto(reg: &mut Registry, net: NetPolicy, q: u32, cap: usize) -> Result<()> {
    for s in reg.generated_stage() + 1..=q {
        generate_stage(reg, net, s, cap)?;
    }
    Ok(())
}

/// Forges `ξ_1 = (p_1, m_{2j}^{-1}, b*_1)`, `ξ_{r+1} = (p_{r+1}, ξ_r, m_{2j}^{-1}, b*_{r+1})`.
pub fn forge_even(reg: &mut Registry, j: usize, cuts: &[u32], payloads: &[Func]) -> Result<GammaId> {
    let w = 2 * j;
    if cuts.is_empty() || cuts.len() != payloads.len() {
        return Err(Error::InvalidArgument("cuts and payloads must be nonempty and equal in length".into()));
    }
    let nj = reg.schedule().n(w)?.clone();
    if BigUint::from(cuts.len()) > nj {
        return Err(Error::AgeOverflow { j: w, age: cuts.len() as u64, limit: nj.to_string() });
    }
    if (cuts[0] as usize) < w {
        return Err(Error::CutTooSmall { p1: cuts[0], min: w as u32 });
    }
    if cuts.windows(2).any(|c| c[1] <= c[0]) {
        return Err(Error::InvalidArgument("cuts must be strictly increasing".into()));
    }
    let mut xi = reg.intern(Draft::type1(cuts[0], w, payloads[0].clone()))?;
    for (p, b) in cuts.iter().zip(payloads).skip(1) {
        xi = reg.intern(Draft::type2(*p, xi, w, b.clone()))?;
    }
    Ok(xi)
}

/// Forges an odd-weight chain of weight `m_{2j0-1}` with payloads `e*_{η_i}` at cuts `p_i`.
pub fn forge_odd_chain(reg: &mut Registry, j0: usize, targets: &[(u32, GammaId)]) -> Result<GammaId> {
    let w = 2 * j0 - 1;
    let (&(p1, eta1), rest) =
        targets.split_first().ok_or_else(|| Error::InvalidArgument("empty odd chain".into()))?;
    let mut xi = reg.intern(Draft::type1(p1, w, Func::unit(eta1)))?;
    for &(p, eta) in rest {
        xi = reg.intern(Draft::type2(p, xi, w, Func::unit(eta)))?;
    }
    Ok(xi)
}

fn odd_chain(reg: &Registry, g: GammaId) -> Result<(usize, Vec<(GammaId, GammaId)>)> {
    let rec = reg.record(g)?;
    let w = match rec.weight_index {
        Some(w) if w % 2 == 1 => w,
        _ => return Err(Error::WeightMismatch(format!("{g} is not of odd weight"))),
    };
    let rows = evaluation_analysis(reg, g)?;
    let mut out = Vec::new();
    for r in rows {
        let eta = match r.payload.iter().next() {
            Some((e, _)) if r.payload.len() == 1 => *e,
            _ => return Err(Error::TreelikeViolation(format!("{} has a non-unit payload", r.node))),
        };
        out.push((r.node, eta));
    }
    Ok((w, out))
}

/// The index `l` of the tree-like property, with both clauses checked directly.
pub fn check_treelike(reg: &Registry, g: GammaId, h: GammaId) -> Result<usize> {
    let (wg, cg) = odd_chain(reg, g)?;
    let (wh, ch) = odd_chain(reg, h)?;
    if wg != wh {
        return Err(Error::WeightMismatch(format!("weights {wg} and {wh} differ")));
    }
    let (long, short) = if cg.len() >= ch.len() { (cg, ch) } else { (ch, cg) };
    let weight = |e: GammaId| reg.weight_index(e).ok().flatten();
    let long_weights: Vec<_> = long.iter().map(|(_, e)| weight(*e)).collect();
    let hit = |i: usize| long_weights.contains(&weight(short[i - 1].1));
    let l = (2..=short.len()).rev().find(|&i| hit(i)).unwrap_or(1);
    for i in 1..l {
        if short[i - 1].0 != long[i - 1].0 {
            return Err(Error::TreelikeViolation(format!("ξ_{i} differs below l = {l}")));
        }
    }
    if let Some(i) = (l + 1..=short.len()).find(|&i| hit(i)) {
        return Err(Error::TreelikeViolation(format!("weight of η'_{i} recurs above l = {l}")));
    }
    Ok(l)
}

/// Upper containment and odd-weight rules over the whole registry.
pub fn check_containment(reg: &Registry) -> Result<()> {
    reg.revalidate()?;
    for r in reg.records() {
        if r.kind == Kind::Type2 {
            let p = reg.rank(r.predecessor.expect("type 2"))?;
            if p >= r.rank {
                return Err(Error::InvalidDraft(format!("{} precedes its predecessor", r.id)));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn toy(which: Which, stage: u32) -> Registry {
        Manifest::new(ParameterSchedule::toy_small(), which, NetPolicy::SignedUnits, OddGuard::Enforce, stage)
            .build()
            .unwrap()
    }

    #[test]
    fn stage_counts() {
        let r = toy(Which::XK, 5);
        let sizes: Vec<usize> = (1..=5).map(|q| r.delta(q).len()).collect();
        assert_eq!(sizes, vec![1, 2, 6, 36, 180]);
        for &g in r.delta(2) {
            assert_eq!(r.weight_index(g).unwrap(), Some(2));
        }
        check_containment(&r).unwrap();
    }

    #[test]
    fn signed_units_count() {
        let r = toy(Which::XK, 2);
        assert_eq!(net_elements(&r, 2, 0, NetPolicy::SignedUnits, 100).unwrap().len(), 6);
        for f in net_elements(&r, 2, 0, NetPolicy::DyadicAverages(3), 100).unwrap() {
            assert!(f.l1() <= one());
        }
    }

    #[test]
    fn net_policy_text() {
        for s in ["units", "dyadic:3", "factorial", "factorial:2"] {
            assert_eq!(s.parse::<NetPolicy>().unwrap().to_string(), s);
        }
        assert!("dyadic:0".parse::<NetPolicy>().is_err());
    }

    #[test]
    fn factorial_cap() {
        let r = toy(Which::XK, 3);
        assert!(matches!(
            net_elements(&r, 3, 0, NetPolicy::FactorialLattice(Some(5)), 1000),
            Err(Error::NetTooLarge { .. })
        ));
    }

    #[test]
    fn blowup_reports_family() {
        let mut r = toy(Which::XK, 5);
        match generate_stage(&mut r, NetPolicy::SignedUnits, 6, 1000) {
            Err(Error::CombinatorialBlowup { stage: 6, family, .. }) => assert!(family.contains("weight")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn forge_even_errors() {
        let mut r = toy(Which::XK, 3);
        let b = r.delta(1)[0];
        assert!(matches!(
            forge_even(&mut r, 2, &[3], &[Func::unit(b)]),
            Err(Error::CutTooSmall { p1: 3, min: 4 })
        ));
        let units = vec![Func::zero(); 3];
        assert!(matches!(
            forge_even(&mut r, 2, &[4, 5, 6], &units),
            Err(Error::AgeOverflow { .. })
        ));
        let g = forge_even(&mut r, 2, &[4, 6], &[Func::single(b, q(1, 2)), Func::zero()]).unwrap();
        assert_eq!(evaluation_analysis(&r, g).unwrap().len(), 2);
    }
}
