//! The Γ registry: interning of elements, ranks, weights, ages and σ-coding.
//!
//! BD-functionals `c*_γ` and dual functionals `d*_γ` are computed when an element
//! is interned. Every record refers only to earlier elements, so the memo is
//! filled in id order and never recurses.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::func::Func;
use crate::rational::{one, Q};
use crate::schedule::{Mode, ParameterSchedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GammaId(pub u32);

impl fmt::Display for GammaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    Base,
    Type1,
    Type2,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Base => "base",
            Kind::Type1 => "type1",
            Kind::Type2 => "type2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Which {
    /// Γ^max: all weights, no odd-weight coding.
    BmT,
    /// Γ^K: even weights free, odd weights coded through σ.
    XK,
}

impl Which {
    pub fn as_str(self) -> &'static str {
        match self {
            Which::BmT => "BmT",
            Which::XK => "XK",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OddGuard {
    Enforce,
    Waive,
}

impl OddGuard {
    pub fn as_str(self) -> &'static str {
        match self {
            OddGuard::Enforce => "enforce",
            OddGuard::Waive => "waive",
        }
    }
}

/// An element draft prior to interning.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Draft {
    pub rank: u32,
    pub kind: Kind,
    pub weight_index: usize,
    pub predecessor: Option<GammaId>,
    pub payload: Func,
}

impl Draft {
    pub fn base() -> Self {
        Draft { rank: 1, kind: Kind::Base, weight_index: 0, predecessor: None, payload: Func::zero() }
    }

    pub fn type1(rank: u32, j: usize, payload: Func) -> Self {
        Draft { rank, kind: Kind::Type1, weight_index: j, predecessor: None, payload }
    }

    pub fn type2(rank: u32, xi: GammaId, j: usize, payload: Func) -> Self {
        Draft { rank, kind: Kind::Type2, weight_index: j, predecessor: Some(xi), payload }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementRecord {
    pub id: GammaId,
    pub rank: u32,
    pub kind: Kind,
    /// `j` with weight `m_j^{-1}`; absent for the base element.
    pub weight_index: Option<usize>,
    pub age: Option<u64>,
    pub cut: u32,
    pub predecessor: Option<GammaId>,
    pub payload: Option<Func>,
    pub sigma: u64,
    /// Odd-weight Type 1 element admitted although `m_{4i-2} <= n_{2j-1}^2`.
    pub guard_waived: bool,
}

#[derive(Debug, Clone, Default)]
struct SigmaClass {
    count: u64,
    watermark: u32,
}

impl SigmaClass {
    /// Next value `t = count + 1 + ceil(w / 8)`, strictly increasing in interning order.
    fn next(&mut self, rank: u32) -> u64 {
        self.watermark = self.watermark.max(rank);
        let t = self.count + 1 + (self.watermark as u64).div_ceil(8);
        self.count += 1;
        t
    }
}

#[derive(Debug, Clone)]
pub struct Registry {
    schedule: ParameterSchedule,
    which: Which,
    odd_guard: OddGuard,
    records: Vec<ElementRecord>,
    index: HashMap<Draft, GammaId>,
    cstar: Vec<Func>,
    dstar: Vec<Func>,
    users: Vec<Vec<GammaId>>,
    by_rank: BTreeMap<u32, Vec<GammaId>>,
    generated: u32,
    sigma_odd: SigmaClass,
    sigma_other: SigmaClass,
}

impl Registry {
    pub fn new(schedule: ParameterSchedule, which: Which, odd_guard: OddGuard) -> Self {
        Registry {
            schedule,
            which,
            odd_guard,
            records: Vec::new(),
            index: HashMap::new(),
            cstar: Vec::new(),
            dstar: Vec::new(),
            users: Vec::new(),
            by_rank: BTreeMap::new(),
            generated: 0,
            sigma_odd: SigmaClass::default(),
            sigma_other: SigmaClass::default(),
        }
    }

    pub fn schedule(&self) -> &ParameterSchedule {
        &self.schedule
    }

    pub fn which(&self) -> Which {
        self.which
    }

    pub fn odd_guard(&self) -> OddGuard {
        self.odd_guard
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Highest stage materialized in full by the generator.
    pub fn generated_stage(&self) -> u32 {
        self.generated
    }

    pub(crate) fn set_generated(&mut self, q: u32) {
        self.generated = q;
    }

    pub fn max_rank(&self) -> u32 {
        self.by_rank.keys().next_back().copied().unwrap_or(0)
    }

    pub fn record(&self, g: GammaId) -> Result<&ElementRecord> {
        self.records.get(g.0 as usize).ok_or(Error::UnknownGamma(g))
    }

    pub fn records(&self) -> &[ElementRecord] {
        &self.records
    }

    pub fn contains(&self, g: GammaId) -> bool {
        (g.0 as usize) < self.records.len()
    }

    pub fn rank(&self, g: GammaId) -> Result<u32> {
        Ok(self.record(g)?.rank)
    }

    /// Rank of an element known to exist.
    pub(crate) fn rank_of(&self, g: GammaId) -> u32 {
        self.records[g.0 as usize].rank
    }

    pub fn weight_index(&self, g: GammaId) -> Result<Option<usize>> {
        Ok(self.record(g)?.weight_index)
    }

    pub fn sigma(&self, g: GammaId) -> Result<u64> {
        Ok(self.record(g)?.sigma)
    }

    pub fn c_star(&self, g: GammaId) -> Result<&Func> {
        self.cstar.get(g.0 as usize).ok_or(Error::UnknownGamma(g))
    }

    pub fn d_star(&self, g: GammaId) -> Result<&Func> {
        self.dstar.get(g.0 as usize).ok_or(Error::UnknownGamma(g))
    }

    /// Elements δ whose `c*_δ` has `g` in its support.
    pub fn users(&self, g: GammaId) -> &[GammaId] {
        self.users.get(g.0 as usize).map(Vec::as_slice).unwrap_or(&[])
    }

    /// `Δ_q`.
    pub fn delta(&self, q: u32) -> &[GammaId] {
        self.by_rank.get(&q).map(Vec::as_slice).unwrap_or(&[])
    }

    /// `Γ_q` in canonical order (rank, then interning order).
    pub fn gamma_upto(&self, q: u32) -> Vec<GammaId> {
        self.by_rank.range(..=q).flat_map(|(_, v)| v.iter().copied()).collect()
    }

    /// `Γ_q \ Γ_p` in canonical order.
    pub fn window(&self, p: u32, q: u32) -> Vec<GammaId> {
        if q <= p {
            return Vec::new();
        }
        self.by_rank.range(p + 1..=q).flat_map(|(_, v)| v.iter().copied()).collect()
    }

    pub fn count_upto(&self, q: u32) -> usize {
        self.by_rank.range(..=q).map(|(_, v)| v.len()).sum()
    }

    pub fn lookup(&self, d: &Draft) -> Option<GammaId> {
        self.index.get(d).copied()
    }

    /// Splits `f` as `Σ_{rank η > q} a_η d*_η + r` with `r` supported in `Γ_q`.
    /// The remainder `r` is `P*_{(0,q]} f`; the coefficients are listed by decreasing rank.
    pub fn peel(&self, f: &Func, q: u32) -> Result<(Func, Vec<(GammaId, Q)>)> {
        let mut work: BTreeMap<(u32, GammaId), Q> = BTreeMap::new();
        for (g, c) in f.iter() {
            work.insert((self.rank(*g)?, *g), c.clone());
        }
        let mut coeffs = Vec::new();
        while let Some(entry) = work.last_entry() {
            if entry.key().0 <= q {
                break;
            }
            let ((_, eta), a) = entry.remove_entry();
            for (h, c) in self.cstar[eta.0 as usize].iter() {
                let key = (self.rank_of(*h), *h);
                let slot = work.entry(key).or_insert_with(Q::zero);
                *slot += &a * c;
                if slot.is_zero() {
                    work.remove(&key);
                }
            }
            coeffs.push((eta, a));
        }
        let rest = Func::from_pairs(work.into_iter().map(|((_, g), c)| (g, c)));
        Ok((rest, coeffs))
    }

    fn weight_of(&self, g: GammaId) -> Option<usize> {
        self.records[g.0 as usize].weight_index
    }

    /// Checks a draft against every record invariant; returns `(age, cut, guard_waived)`.
    fn check_draft(&self, d: &Draft) -> Result<(Option<u64>, u32, bool)> {
        let bad = |s: String| Err(Error::InvalidDraft(s));
        if d.kind == Kind::Base {
            if d.rank != 1 || d.weight_index != 0 || d.predecessor.is_some() || !d.payload.is_zero() {
                return bad("base element must be (rank 1, no weight, no payload)".into());
            }
            return Ok((None, 0, false));
        }
        if d.rank < 2 {
            return bad(format!("{:?} element needs rank >= 2", d.kind));
        }
        let j = d.weight_index;
        if !self.schedule.has(j) {
            return Err(Error::IndexOutOfSchedule { index: j, len: self.schedule.len() });
        }
        for g in d.payload.support() {
            self.record(g)?;
        }
        let (cut, age) = match d.kind {
            Kind::Type1 => {
                if d.predecessor.is_some() {
                    return bad("type 1 element has no predecessor".into());
                }
                (0, 1u64)
            }
            Kind::Type2 => {
                let xi = d.predecessor.ok_or_else(|| Error::InvalidDraft("type 2 needs ξ".into()))?;
                let rec = self.record(xi)?;
                if rec.kind == Kind::Base {
                    return bad("predecessor cannot be the base element".into());
                }
                if rec.rank >= d.rank {
                    return bad(format!("predecessor rank {} not below rank {}", rec.rank, d.rank));
                }
                if rec.weight_index != Some(j) {
                    return Err(Error::WeightMismatch(format!(
                        "weight index {j} differs from predecessor's {:?}",
                        rec.weight_index
                    )));
                }
                (rec.rank, rec.age.unwrap_or(0) + 1)
            }
            Kind::Base => unreachable!(),
        };
        let nj = self.schedule.n(j)?;
        if BigUint::from(age) > *nj {
            return Err(Error::AgeOverflow { j, age, limit: nj.to_string() });
        }
        for g in d.payload.support() {
            let r = self.rank_of(g);
            if r > d.rank - 1 || r <= cut {
                return Err(Error::SupportOutOfWindow(format!(
                    "payload element {g} of rank {r} outside ({cut}, {}]",
                    d.rank - 1
                )));
            }
        }
        if d.payload.l1() > one() {
            return bad("payload has ℓ1-norm above 1".into());
        }
        let mut waived = false;
        match self.which {
            Which::BmT => {
                let ok = match d.kind {
                    Kind::Type1 => j as u64 <= d.rank as u64,
                    _ => j as u64 <= cut as u64 && cut + 1 < d.rank,
                };
                if !ok {
                    return bad(format!("weight index {j} not admitted at rank {} cut {cut}", d.rank));
                }
            }
            Which::XK => {
                let bound = if d.kind == Kind::Type1 { d.rank } else { cut };
                if j as u64 > bound as u64 {
                    return bad(format!("weight index {j} exceeds bound {bound} at rank {}", d.rank));
                }
                if j % 2 == 1 {
                    waived = self.check_odd(d, j)?;
                }
            }
        }
        Ok((Some(age), cut, waived))
    }

    fn check_odd(&self, d: &Draft, j: usize) -> Result<bool> {
        let viol = |s: String| Err(Error::OddWeightRuleViolation(s));
        let eta = match d.payload.iter().next() {
            Some((g, c)) if d.payload.len() == 1 && c.is_one() => *g,
            _ => return viol("odd-weight payload must be a single e*_η".into()),
        };
        let w = match self.weight_of(eta) {
            Some(w) => w,
            None => return viol(format!("payload element {eta} has no weight")),
        };
        match d.kind {
            Kind::Type1 => {
                if w % 4 != 2 {
                    return viol(format!("weight index {w} of η is not of the form 4i-2"));
                }
                let m = self.schedule.m(w)?;
                let n = self.schedule.n(j)?;
                if *m > n * n {
                    Ok(false)
                } else if self.odd_guard == OddGuard::Waive && self.schedule.mode() == Mode::Toy {
                    Ok(true)
                } else {
                    viol(format!("m_{w} = {m} is not above n_{j}^2"))
                }
            }
            _ => {
                let xi = d.predecessor.expect("type 2");
                let s = self.records[xi.0 as usize].sigma;
                if w as u64 != 4 * s {
                    return viol(format!("weight index {w} of η differs from 4σ(ξ) = {}", 4 * s));
                }
                Ok(false)
            }
        }
    }

    /// Interns a draft, returning the existing id for a structurally identical one.
    pub fn intern(&mut self, d: Draft) -> Result<GammaId> {
        if let Some(&g) = self.index.get(&d) {
            return Ok(g);
        }
        let (age, cut, waived) = self.check_draft(&d)?;
        let id = GammaId(self.records.len() as u32);
        let cstar = match d.kind {
            Kind::Base => Func::zero(),
            Kind::Type1 => d.payload.scaled(&self.schedule.weight_value(d.weight_index)?),
            Kind::Type2 => {
                let beta = self.schedule.weight_value(d.weight_index)?;
                let (_, tail) = self.peel(&d.payload, cut)?;
                let mut c = Func::unit(d.predecessor.expect("type 2"));
                for (eta, a) in tail {
                    c.add_scaled(&self.dstar[eta.0 as usize], &(&a * &beta));
                }
                c
            }
        };
        let mut dstar = cstar.scaled(&Q::from_integer((-1).into()));
        dstar.add(id, &one());
        let sigma = if d.weight_index % 2 == 1 {
            2 * self.sigma_odd.next(d.rank) - 1
        } else {
            2 * self.sigma_other.next(d.rank)
        };
        for h in cstar.support() {
            self.users[h.0 as usize].push(id);
        }
        self.records.push(ElementRecord {
            id,
            rank: d.rank,
            kind: d.kind,
            weight_index: (d.kind != Kind::Base).then_some(d.weight_index),
            age,
            cut,
            predecessor: d.predecessor,
            payload: (d.kind != Kind::Base).then(|| d.payload.clone()),
            sigma,
            guard_waived: waived,
        });
        self.cstar.push(cstar);
        self.dstar.push(dstar);
        self.users.push(Vec::new());
        self.by_rank.entry(d.rank).or_default().push(id);
        self.index.insert(d, id);
        Ok(id)
    }

    pub fn draft_of(&self, g: GammaId) -> Result<Draft> {
        let r = self.record(g)?;
        Ok(Draft {
            rank: r.rank,
            kind: r.kind,
            weight_index: r.weight_index.unwrap_or(0),
            predecessor: r.predecessor,
            payload: r.payload.clone().unwrap_or_default(),
        })
    }

    /// Re-checks every record invariant and the σ-coding over the whole registry.
    pub fn revalidate(&self) -> Result<()> {
        let mut seen = HashMap::new();
        for r in &self.records {
            let d = self.draft_of(r.id)?;
            let (age, cut, waived) = self.check_draft(&d)?;
            if age != r.age || cut != r.cut || waived != r.guard_waived {
                return Err(Error::InvalidDraft(format!("record {} disagrees with its draft", r.id)));
            }
            if 4 * r.sigma <= r.rank as u64 {
                return Err(Error::InvalidDraft(format!("4σ({}) <= rank", r.id)));
            }
            if let Some(other) = seen.insert(r.sigma, r.id) {
                return Err(Error::InvalidDraft(format!("σ({}) = σ({other})", r.id)));
            }
            let c = self.c_star(r.id)?;
            if c.support().any(|h| self.rank_of(h) >= r.rank) {
                return Err(Error::InvalidDraft(format!("c* of {} not below its rank", r.id)));
            }
        }
        Ok(())
    }

    /// Stage table rows for elements of rank at most `q`.
    pub fn stage_table_json(&self, q: u32) -> Value {
        Value::Array(
            self.gamma_upto(q)
                .into_iter()
                .map(|g| record_json(&self.records[g.0 as usize]))
                .collect(),
        )
    }
}

pub fn record_json(r: &ElementRecord) -> Value {
    json!({
        "id": r.id.0,
        "rank": r.rank,
        "kind": r.kind.as_str(),
        "weight_index": r.weight_index,
        "age": r.age,
        "cut": r.cut,
        "predecessor": r.predecessor.map(|g| g.0),
        "payload": r.payload.as_ref().map(Func::to_json).unwrap_or(Value::Array(vec![])),
        "sigma": r.sigma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn reg() -> Registry {
        let s = ParameterSchedule::from_u64(&[4, 16, 64, 256], &[4, 3, 4, 2]).unwrap();
        Registry::new(s, Which::XK, OddGuard::Waive)
    }

    #[test]
    fn base_and_type1() {
        let mut r = reg();
        let b = r.intern(Draft::base()).unwrap();
        assert_eq!(r.c_star(b).unwrap(), &Func::zero());
        assert_eq!(r.d_star(b).unwrap(), &Func::unit(b));
        let g = r.intern(Draft::type1(2, 2, Func::unit(b))).unwrap();
        let rec = r.record(g).unwrap();
        assert_eq!(rec.age, Some(1));
        assert_eq!(r.c_star(g).unwrap(), &Func::single(b, q(1, 16)));
        assert_eq!(r.intern(Draft::type1(2, 2, Func::unit(b))).unwrap(), g);
        assert_eq!(r.len(), 2);
    }

    #[test]
    fn type2_errors() {
        let mut r = reg();
        let b = r.intern(Draft::base()).unwrap();
        let g = r.intern(Draft::type1(2, 2, Func::unit(b))).unwrap();
        let h = r.intern(Draft::type1(3, 2, Func::unit(g))).unwrap();
        assert!(matches!(
            r.intern(Draft::type2(4, g, 4, Func::unit(h))),
            Err(Error::WeightMismatch(_))
        ));
        assert!(matches!(
            r.intern(Draft::type2(4, g, 2, Func::unit(b))),
            Err(Error::SupportOutOfWindow(_))
        ));
        assert!(matches!(
            r.intern(Draft::type2(4, GammaId(99), 2, Func::unit(h))),
            Err(Error::UnknownGamma(_))
        ));
        let t = r.intern(Draft::type2(4, g, 2, Func::unit(h))).unwrap();
        assert_eq!(r.record(t).unwrap().age, Some(2));
        let u = r.intern(Draft::type2(5, t, 2, Func::zero())).unwrap();
        assert_eq!(r.record(u).unwrap().age, Some(3));
        assert!(matches!(
            r.intern(Draft::type2(6, u, 2, Func::zero())),
            Err(Error::AgeOverflow { .. })
        ));
    }

    #[test]
    fn odd_rules() {
        let mut r = reg();
        let b = r.intern(Draft::base()).unwrap();
        let g = r.intern(Draft::type1(2, 2, Func::unit(b))).unwrap();
        let o = r.intern(Draft::type1(3, 1, Func::unit(g))).unwrap();
        assert!(r.record(o).unwrap().guard_waived);
        assert!(matches!(
            r.intern(Draft::type1(3, 1, Func::single(g, q(1, 2)))),
            Err(Error::OddWeightRuleViolation(_))
        ));
        let h = r.intern(Draft::type1(4, 4, Func::unit(g))).unwrap();
        assert!(matches!(
            r.intern(Draft::type2(5, o, 1, Func::unit(h))),
            Err(Error::OddWeightRuleViolation(_))
        ));
        let mut strict = Registry::new(r.schedule().clone(), Which::XK, OddGuard::Enforce);
        let b = strict.intern(Draft::base()).unwrap();
        let g = strict.intern(Draft::type1(2, 2, Func::unit(b))).unwrap();
        assert!(matches!(
            strict.intern(Draft::type1(3, 1, Func::unit(g))),
            Err(Error::OddWeightRuleViolation(_))
        ));
    }

    #[test]
    fn sigma_injective_and_large() {
        let mut r = reg();
        let b = r.intern(Draft::base()).unwrap();
        let mut ids = vec![b];
        for k in 0..5 {
            ids.push(r.intern(Draft::type1(2, 2, Func::single(b, q(1, k + 1)))).unwrap());
        }
        let g = ids[1];
        ids.push(r.intern(Draft::type1(3, 1, Func::unit(g))).unwrap());
        ids.push(r.intern(Draft::type1(3, 3, Func::unit(g))).unwrap());
        let mut s: Vec<u64> = ids.iter().map(|&g| r.sigma(g).unwrap()).collect();
        for &g in &ids {
            assert!(4 * r.sigma(g).unwrap() > r.rank(g).unwrap() as u64);
        }
        s.sort();
        s.dedup();
        assert_eq!(s.len(), ids.len());
        r.revalidate().unwrap();
    }
}
