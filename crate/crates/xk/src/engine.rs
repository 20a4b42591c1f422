//! The BD recursion: projections `P*_I`, vectors `d_γ`, extension operators,
//! evaluation analyses and exact stage-truncated operator norms.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::func::Func;
use crate::rational::{fmt_q, max_q, one, Q};
use crate::registry::{GammaId, Kind, Registry};

/// A rank interval `(lo, hi]`; `hi = None` is `(lo, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RankInterval {
    pub lo: u32,
    pub hi: Option<u32>,
}

impl RankInterval {
    pub fn upto(q: u32) -> Self {
        RankInterval { lo: 0, hi: Some(q) }
    }

    pub fn between(lo: u32, hi: u32) -> Self {
        RankInterval { lo, hi: Some(hi.max(lo)) }
    }

    pub fn above(lo: u32) -> Self {
        RankInterval { lo, hi: None }
    }

    pub fn contains(&self, r: u32) -> bool {
        r > self.lo && self.hi.is_none_or(|h| r <= h)
    }
}

pub fn check_stage(reg: &Registry, n: u32) -> Result<()> {
    let avail = reg.max_rank().max(reg.generated_stage());
    if n > avail || n == 0 && reg.is_empty() {
        return Err(Error::StageOverflow { requested: n, available: avail });
    }
    Ok(())
}

pub fn c_star(reg: &Registry, g: GammaId) -> Result<Func> {
    reg.c_star(g).cloned()
}

pub fn d_star(reg: &Registry, g: GammaId) -> Result<Func> {
    reg.d_star(g).cloned()
}

/// `P*_I f`.
pub fn project_l1(reg: &Registry, i: RankInterval, f: &Func) -> Result<Func> {
    let upper = match i.hi {
        Some(h) => reg.peel(f, h)?.0,
        None => f.clone(),
    };
    if i.lo == 0 {
        return Ok(upper);
    }
    let lower = reg.peel(&upper, i.lo)?.0;
    Ok(upper.minus(&lower))
}

/// Coefficients of `f` in the basis `(d*_γ)`.
pub fn dstar_expansion(reg: &Registry, f: &Func) -> Result<BTreeMap<GammaId, Q>> {
    Ok(reg.peel(f, 0)?.1.into_iter().collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct ECache {
    stage: u32,
    reg_len: usize,
    values: BTreeMap<GammaId, Q>,
}

/// A vector `Σ a_γ d_γ` with optional cached coordinates `x(γ)` on `Γ_N`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Point {
    d: BTreeMap<GammaId, Q>,
    cache: Option<ECache>,
}

impl Point {
    pub fn zero() -> Self {
        Point::default()
    }

    pub fn basis(g: GammaId) -> Self {
        Point::from_d([(g, one())])
    }

    pub fn from_d<I: IntoIterator<Item = (GammaId, Q)>>(it: I) -> Self {
        let mut p = Point::zero();
        for (g, c) in it {
            p.add_coord(g, &c);
        }
        p
    }

    fn add_coord(&mut self, g: GammaId, c: &Q) {
        if c.is_zero() {
            return;
        }
        let slot = self.d.entry(g).or_insert_with(Q::zero);
        *slot += c;
        if slot.is_zero() {
            self.d.remove(&g);
        }
    }

    pub fn d_coords(&self) -> &BTreeMap<GammaId, Q> {
        &self.d
    }

    pub fn coord(&self, g: GammaId) -> Q {
        self.d.get(&g).cloned().unwrap_or_else(Q::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.d.is_empty()
    }

    pub fn add_scaled(&mut self, other: &Point, c: &Q) {
        for (g, v) in &other.d {
            self.add_coord(*g, &(v * c));
        }
        self.cache = None;
    }

    pub fn plus(&self, other: &Point) -> Point {
        let mut p = Point { d: self.d.clone(), cache: None };
        p.add_scaled(other, &one());
        p
    }

    pub fn minus(&self, other: &Point) -> Point {
        let mut p = Point { d: self.d.clone(), cache: None };
        p.add_scaled(other, &-one());
        p
    }

    pub fn scaled(&self, c: &Q) -> Point {
        let mut p = Point::zero();
        p.add_scaled(self, c);
        p
    }

    pub fn sum<'a, I: IntoIterator<Item = &'a Point>>(it: I) -> Point {
        let mut p = Point::zero();
        for x in it {
            p.add_scaled(x, &one());
        }
        p
    }

    /// `ran x` as the smallest rank interval `[min, max]` covering the d-support.
    pub fn range(&self, reg: &Registry) -> Result<Option<(u32, u32)>> {
        let mut out: Option<(u32, u32)> = None;
        for g in self.d.keys() {
            let r = reg.rank(*g)?;
            out = Some(match out {
                None => (r, r),
                Some((a, b)) => (a.min(r), b.max(r)),
            });
        }
        Ok(out)
    }

    /// Fills the coordinate cache to stage `n`.
    pub fn refresh(&mut self, reg: &Registry, n: u32) -> Result<()> {
        let values = values(reg, self, n)?;
        self.cache = Some(ECache { stage: n, reg_len: reg.len(), values });
        Ok(())
    }

    pub fn cache_stage(&self) -> Option<u32> {
        self.cache.as_ref().map(|c| c.stage)
    }

    /// Cached nonzero coordinates on `Γ_N`; fails if absent or computed against a different registry state.
    pub fn cached(&self, reg: &Registry) -> Result<&BTreeMap<GammaId, Q>> {
        match &self.cache {
            Some(c) if c.reg_len == reg.len() => Ok(&c.values),
            _ => Err(Error::StaleCache),
        }
    }

    pub fn to_json(&self) -> Value {
        let d: Vec<Value> = self.d.iter().map(|(g, c)| json!([g.0, fmt_q(c)])).collect();
        let mut v = json!({ "d": d });
        if let Some(c) = &self.cache {
            let e: Vec<Value> = c.values.iter().map(|(g, q)| json!([g.0, fmt_q(q)])).collect();
            v["e"] = json!({ "stage": c.stage, "values": e });
        }
        v
    }

    /// Reads `{"d": [[id, "p/q"], ...]}`; any cached coordinates are ignored.
    pub fn from_json(v: &Value) -> Result<Point> {
        let d = v.get("d").ok_or_else(|| Error::Parse("point needs a \"d\" array".into()))?;
        let f = Func::from_json(d)?;
        Ok(Point::from_d(f.iter().map(|(g, c)| (*g, c.clone()))))
    }
}

/// Nonzero coordinates `x(δ)` for `δ ∈ Γ_n`, by forward propagation of `x(δ) = a_δ + ⟨c*_δ, x⟩`.
pub fn values(reg: &Registry, x: &Point, n: u32) -> Result<BTreeMap<GammaId, Q>> {
    let mut queue: BTreeSet<(u32, GammaId)> = BTreeSet::new();
    for g in x.d.keys() {
        let r = reg.rank(*g)?;
        if r <= n {
            queue.insert((r, *g));
        }
    }
    let mut out: BTreeMap<GammaId, Q> = BTreeMap::new();
    while let Some((_, g)) = queue.pop_first() {
        let v = x.coord(g) + reg.c_star(g)?.dot(&out);
        if v.is_zero() {
            continue;
        }
        out.insert(g, v);
        for &u in reg.users(g) {
            let r = reg.rank_of(u);
            if r <= n {
                queue.insert((r, u));
            }
        }
    }
    Ok(out)
}

/// `⟨f, x⟩` through the d*-expansion of `f`.
pub fn pairing(reg: &Registry, f: &Func, x: &Point) -> Result<Q> {
    let Some((lo, _)) = x.range(reg)? else {
        return Ok(Q::zero());
    };
    let (_, coeffs) = reg.peel(f, lo - 1)?;
    Ok(coeffs.iter().fold(Q::zero(), |acc, (g, a)| acc + a * x.coord(*g)))
}

/// `x(γ)`.
pub fn eval(reg: &Registry, x: &Point, g: GammaId) -> Result<Q> {
    pairing(reg, &Func::unit(g), x)
}

/// `d_γ` restricted to `Γ_n`.
pub fn d_vector(reg: &Registry, g: GammaId, n: u32) -> Result<BTreeMap<GammaId, Q>> {
    values(reg, &Point::basis(g), n)
}

/// `i_q(u)` with coordinates cached to stage `n`.
pub fn extend(reg: &Registry, q: u32, u: &BTreeMap<GammaId, Q>, n: u32) -> Result<Point> {
    if q > n {
        return Err(Error::InvalidArgument(format!("extension stage {q} above target {n}")));
    }
    check_stage(reg, n)?;
    for g in u.keys() {
        let r = reg.rank(*g)?;
        if r > q {
            return Err(Error::SupportOutOfWindow(format!("{g} of rank {r} outside Γ_{q}")));
        }
    }
    let mut x = Point::zero();
    for g in reg.gamma_upto(q) {
        let a = reg.d_star(g)?.dot(u);
        x.add_coord(g, &a);
    }
    x.refresh(reg, n)?;
    Ok(x)
}

/// `P_I x`, zeroing d-coordinates outside `I`.
pub fn fdd_project(reg: &Registry, i: RankInterval, x: &Point) -> Result<Point> {
    let mut out = Point::zero();
    for (g, c) in &x.d {
        if i.contains(reg.rank(*g)?) {
            out.add_coord(*g, c);
        }
    }
    if let Some(n) = x.cache_stage() {
        out.refresh(reg, n)?;
    }
    Ok(out)
}

/// `⟨e*_γ, P_{(s,∞)} x⟩`.
pub fn eval_after_projection(reg: &Registry, g: GammaId, s: u32, x: &Point) -> Result<Q> {
    let (_, coeffs) = reg.peel(&Func::unit(g), s)?;
    Ok(coeffs.iter().fold(Q::zero(), |acc, (h, a)| acc + a * x.coord(*h)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalysisRow {
    pub index: usize,
    pub cut: u32,
    pub payload: Func,
    pub node: GammaId,
}

impl AnalysisRow {
    pub fn to_json(&self) -> Value {
        json!({ "r": self.index, "p": self.cut, "b": self.payload.to_json(), "xi": self.node.0 })
    }
}

/// Rows `(p_r, b*_r, ξ_r)` in increasing `r`.
pub fn evaluation_analysis(reg: &Registry, g: GammaId) -> Result<Vec<AnalysisRow>> {
    let mut chain = Vec::new();
    let mut cur = Some(g);
    while let Some(h) = cur {
        let rec = reg.record(h)?;
        if rec.kind == Kind::Base {
            return Err(Error::BaseHasNoAnalysis);
        }
        chain.push(h);
        cur = rec.predecessor;
    }
    chain.reverse();
    chain
        .into_iter()
        .enumerate()
        .map(|(i, h)| {
            let rec = reg.record(h)?;
            Ok(AnalysisRow {
                index: i + 1,
                cut: rec.rank,
                payload: rec.payload.clone().unwrap_or_default(),
                node: h,
            })
        })
        .collect()
}

/// Right-hand sides of the analysis identity with windows `(p_{r-1}, p_r)` and `(p_{r-1}, ∞)`.
pub fn analysis_sums(reg: &Registry, g: GammaId) -> Result<(Func, Func)> {
    let rows = evaluation_analysis(reg, g)?;
    let j = reg.weight_index(g)?.ok_or(Error::BaseHasNoAnalysis)?;
    let beta = reg.schedule().weight_value(j)?;
    let mut bounded = Func::zero();
    let mut tail = Func::zero();
    let mut prev = 0;
    for row in &rows {
        let dx = reg.d_star(row.node)?;
        bounded.add_scaled(dx, &one());
        tail.add_scaled(dx, &one());
        let w = project_l1(reg, RankInterval::between(prev, row.cut - 1), &row.payload)?;
        bounded.add_scaled(&w, &beta);
        let t = project_l1(reg, RankInterval::above(prev), &row.payload)?;
        tail.add_scaled(&t, &beta);
        prev = row.cut;
    }
    Ok((bounded, tail))
}

/// Both analysis sums equal `e*_γ`.
pub fn check_analysis_identity(reg: &Registry, g: GammaId) -> Result<bool> {
    let (a, b) = analysis_sums(reg, g)?;
    let e = Func::unit(g);
    Ok(a == e && b == e)
}

/// Stage matrix in sparse form: rows `d*_ξ` and columns `d_γ↾Γ_N`, both over `Γ_N` in canonical order.
#[derive(Debug, Clone)]
pub struct StageMatrix {
    pub stage: u32,
    pub ids: Vec<GammaId>,
    pub dstar: Vec<Func>,
    pub d: Vec<BTreeMap<GammaId, Q>>,
}

pub fn stage_matrix(reg: &Registry, n: u32) -> Result<StageMatrix> {
    check_stage(reg, n)?;
    let ids = reg.gamma_upto(n);
    let dstar = ids.iter().map(|g| reg.d_star(*g).cloned()).collect::<Result<Vec<_>>>()?;
    let d = ids.iter().map(|g| d_vector(reg, *g, n)).collect::<Result<Vec<_>>>()?;
    Ok(StageMatrix { stage: n, ids, dstar, d })
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BiorthReport {
    pub pairs_checked: u64,
    pub failures: Vec<(GammaId, GammaId)>,
    pub unit_diagonal: bool,
}

impl StageMatrix {
    /// Checks `⟨d*_ξ, d_γ⟩ = δ_{ξγ}`. Pairs with disjoint supports vanish identically,
    /// so only `ξ` meeting `supp d_γ` are evaluated.
    pub fn biorthogonality(&self, reg: &Registry) -> BiorthReport {
        let pos: BTreeMap<GammaId, usize> =
            self.ids.iter().enumerate().map(|(i, g)| (*g, i)).collect();
        let mut rep = BiorthReport {
            unit_diagonal: self.dstar.iter().zip(&self.ids).all(|(f, g)| f.get(*g) == one()),
            ..Default::default()
        };
        for (k, g) in self.ids.iter().enumerate() {
            let col = &self.d[k];
            let mut touched: BTreeSet<GammaId> = BTreeSet::new();
            for h in col.keys() {
                touched.insert(*h);
                touched.extend(reg.users(*h).iter().filter(|u| pos.contains_key(u)));
            }
            touched.insert(*g);
            for xi in touched {
                let v = self.dstar[pos[&xi]].dot(col);
                rep.pairs_checked += 1;
                let want = if xi == *g { one() } else { Q::zero() };
                if v != want {
                    rep.failures.push((xi, *g));
                }
            }
        }
        rep
    }

    pub fn to_json(&self) -> Value {
        json!({
            "stage": self.stage,
            "ids": self.ids.iter().map(|g| g.0).collect::<Vec<_>>(),
            "dstar": self.dstar.iter().map(Func::to_json).collect::<Vec<_>>(),
            "d": self.d.iter().map(|c| {
                c.iter().map(|(g, q)| json!([g.0, fmt_q(q)])).collect::<Vec<_>>()
            }).collect::<Vec<_>>(),
        })
    }

    /// Dense CSV of the `d*` rows: header of ids, one row per `ξ`.
    pub fn dstar_csv(&self) -> String {
        let mut s = String::from("xi");
        for g in &self.ids {
            s.push_str(&format!(",{}", g.0));
        }
        s.push('\n');
        for (g, f) in self.ids.iter().zip(&self.dstar) {
            s.push_str(&g.0.to_string());
            for h in &self.ids {
                s.push(',');
                s.push_str(&fmt_q(&f.get(*h)));
            }
            s.push('\n');
        }
        s
    }
}

/// Remainders `P*_{(0,q]} f` for `q = 0..=top`, computed in one peeling pass.
pub fn projection_ladder(reg: &Registry, f: &Func, top: u32) -> Result<Vec<Func>> {
    let mut out = vec![Func::zero(); top as usize + 1];
    let mut cur = f.clone();
    for q in (0..=top).rev() {
        cur = reg.peel(&cur, q)?.0;
        out[q as usize] = cur.clone();
    }
    Ok(out)
}

/// Exact stage-`N` operator norms of the basis projections.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectionBounds {
    pub stage: u32,
    /// `max_q ‖P*_{(0,q]}‖` on `ℓ1(Γ_N)`.
    pub initial: Q,
    /// `max_{m<n} ‖P_{(m,n]}‖` on `ℓ∞(Γ_N)`.
    pub interval: Q,
    /// `max_n ‖P_{(n,∞)}‖` on `ℓ∞(Γ_N)`.
    pub tail: Q,
    /// `max_ξ ‖d*_ξ‖₁`.
    pub dstar_l1: Q,
}

impl ProjectionBounds {
    pub fn to_json(&self) -> Value {
        json!({
            "stage": self.stage,
            "initial": fmt_q(&self.initial),
            "interval": fmt_q(&self.interval),
            "tail": fmt_q(&self.tail),
            "dstar_l1": fmt_q(&self.dstar_l1),
        })
    }
}

pub fn projection_bounds(reg: &Registry, n: u32) -> Result<ProjectionBounds> {
    check_stage(reg, n)?;
    let mut pb = ProjectionBounds {
        stage: n,
        initial: Q::zero(),
        interval: Q::zero(),
        tail: Q::zero(),
        dstar_l1: Q::zero(),
    };
    for g in reg.gamma_upto(n) {
        let e = Func::unit(g);
        let ladder = projection_ladder(reg, &e, n)?;
        for (q, r) in ladder.iter().enumerate() {
            pb.initial = max_q(pb.initial.clone(), r.l1());
            if (q as u32) < n {
                pb.tail = max_q(pb.tail.clone(), e.minus(r).l1());
            }
            for lo in ladder.iter().take(q) {
                pb.interval = max_q(pb.interval.clone(), r.minus(lo).l1());
            }
        }
        pb.dstar_l1 = max_q(pb.dstar_l1.clone(), reg.d_star(g)?.l1());
    }
    Ok(pb)
}

/// `max_{q ≤ N} ‖P*_{(0,q]}‖` on `ℓ1(Γ_N)`.
pub fn basis_constant(reg: &Registry, n: u32) -> Result<Q> {
    check_stage(reg, n)?;
    let mut best = Q::zero();
    for g in reg.gamma_upto(n) {
        for r in projection_ladder(reg, &Func::unit(g), n)? {
            best = max_q(best, r.l1());
        }
    }
    Ok(best)
}

/// `(ran x, local support)` from the coordinate cache.
pub fn range_and_local_support(
    reg: &Registry,
    x: &Point,
) -> Result<(Option<(u32, u32)>, Vec<GammaId>)> {
    let ran = x.range(reg)?;
    let Some((_, q)) = ran else {
        return Ok((None, Vec::new()));
    };
    let cache = x.cached(reg)?;
    if x.cache_stage().unwrap_or(0) < q {
        return Err(Error::StaleCache);
    }
    let supp = cache.iter().filter(|(g, v)| reg.rank_of(**g) <= q && !v.is_zero()).map(|(g, _)| *g);
    Ok((ran, supp.collect()))
}

/// `max_{γ ∈ Γ_n} |x(γ)|` with an attaining element (the first in canonical order).
pub fn sup_abs(reg: &Registry, x: &Point, n: u32) -> Result<(Q, Option<GammaId>)> {
    let vals = values(reg, x, n)?;
    let mut best = Q::zero();
    let mut arg = None;
    let mut keyed: Vec<_> = vals.iter().map(|(g, v)| ((reg.rank_of(*g), *g), v)).collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    for ((_, g), v) in keyed {
        if v.abs() > best {
            best = v.abs();
            arg = Some(g);
        }
    }
    Ok((best, arg))
}

pub fn analysis_json(rows: &[AnalysisRow]) -> Value {
    Value::Array(rows.iter().map(AnalysisRow::to_json).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use crate::registry::{Draft, OddGuard, Which};
    use crate::schedule::ParameterSchedule;

    fn small() -> (Registry, Vec<GammaId>) {
        let s = ParameterSchedule::from_u64(&[4, 16, 64, 256], &[4, 3, 4, 2]).unwrap();
        let mut r = Registry::new(s, Which::XK, OddGuard::Waive);
        let b = r.intern(Draft::base()).unwrap();
        let g = r.intern(Draft::type1(2, 2, Func::unit(b))).unwrap();
        let h = r.intern(Draft::type1(3, 2, Func::single(g, q(-1, 2)))).unwrap();
        let t = r.intern(Draft::type2(4, g, 2, Func::unit(h))).unwrap();
        (r, vec![b, g, h, t])
    }

    #[test]
    fn cstar_cases() {
        let (r, ids) = small();
        assert!(c_star(&r, ids[0]).unwrap().is_zero());
        assert_eq!(c_star(&r, ids[1]).unwrap(), Func::single(ids[0], q(1, 16)));
        // e*_g + (1/16)(e*_h - P*_{(0,2]} e*_h); P*_{(0,2]} e*_h = c*_h = (-1/32) e*_g
        let want = Func::from_pairs([(ids[1], q(1, 1) + q(1, 16) * q(1, 32)), (ids[2], q(1, 16))]);
        assert_eq!(c_star(&r, ids[3]).unwrap(), want);
    }

    #[test]
    fn projections() {
        let (r, ids) = small();
        for g in &ids {
            let d = r.d_star(*g).unwrap();
            let rk = r.rank(*g).unwrap();
            for q in 0..=5 {
                let p = project_l1(&r, RankInterval::upto(q), d).unwrap();
                assert_eq!(p, if rk <= q { d.clone() } else { Func::zero() });
            }
        }
        let f = Func::from_pairs([(ids[3], q(1, 3)), (ids[2], q(2, 1))]);
        assert_eq!(project_l1(&r, RankInterval::upto(0), &f).unwrap(), Func::zero());
        let whole = project_l1(&r, RankInterval::above(0), &f).unwrap();
        assert_eq!(whole, f);
    }

    #[test]
    fn points_and_values() {
        let (r, ids) = small();
        let x = Point::basis(ids[1]);
        let v = values(&r, &x, 4).unwrap();
        assert_eq!(v[&ids[1]], one());
        assert!(!v.contains_key(&ids[0]));
        for g in &ids {
            assert_eq!(v.get(g).cloned().unwrap_or_default(), eval(&r, &x, *g).unwrap());
        }
        let (ran, supp) = {
            let mut y = x.clone();
            y.refresh(&r, 4).unwrap();
            range_and_local_support(&r, &y).unwrap()
        };
        assert_eq!(ran, Some((2, 2)));
        assert_eq!(supp, vec![ids[1]]);
    }

    #[test]
    fn stale_cache() {
        let (mut r, ids) = small();
        let mut x = Point::basis(ids[1]);
        x.refresh(&r, 4).unwrap();
        r.intern(Draft::type1(5, 2, Func::unit(ids[3]))).unwrap();
        assert_eq!(range_and_local_support(&r, &x), Err(Error::StaleCache));
    }

    #[test]
    fn analysis_round_trip() {
        let (r, ids) = small();
        let rows = evaluation_analysis(&r, ids[3]).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].node, ids[1]);
        assert!(check_analysis_identity(&r, ids[3]).unwrap());
        assert_eq!(evaluation_analysis(&r, ids[0]), Err(Error::BaseHasNoAnalysis));
    }

    #[test]
    fn extend_restricts() {
        let (r, ids) = small();
        let u: BTreeMap<_, _> = [(ids[0], q(1, 2)), (ids[2], q(-3, 1))].into();
        let x = extend(&r, 3, &u, 4).unwrap();
        let v = x.cached(&r).unwrap();
        for g in r.gamma_upto(3) {
            assert_eq!(v.get(&g).cloned().unwrap_or_default(), u.get(&g).cloned().unwrap_or_default());
        }
        assert!(extend(&r, 3, &u, 9).is_err());
    }

    #[test]
    fn stage_one_matrix() {
        let (r, _) = small();
        let m = stage_matrix(&r, 1).unwrap();
        assert_eq!(m.ids.len(), 1);
        assert_eq!(m.biorthogonality(&r).failures.len(), 0);
        assert_eq!(basis_constant(&r, 1).unwrap(), one());
        let full = stage_matrix(&r, 4).unwrap();
        let rep = full.biorthogonality(&r);
        assert!(rep.failures.is_empty() && rep.unit_diagonal);
    }
}
