//! Norm oracles: stage-truncated sup norms, mixed Tsirelson norms by interval
//! dynamic programming, norming trees and unconditionalized norms.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::engine::{check_stage, sup_abs, Point};
use crate::error::{Error, Result};
use crate::rational::{fmt_q, one, parse_q, recip_uint, Q};
use crate::registry::{GammaId, Registry};
use crate::schedule::ParameterSchedule;

pub const DEFAULT_BRUTE_FORCE_CAP: usize = 16;

/// `lower = max_{Γ_N}|x|` and `upper = M·max_{Γ_q}|x|` for `q = max ran x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormInterval {
    pub lower: Q,
    pub upper: Q,
    pub stage: u32,
    pub witness: Option<GammaId>,
}

impl NormInterval {
    pub fn to_json(&self) -> Value {
        json!({
            "lower": fmt_q(&self.lower),
            "upper": fmt_q(&self.upper),
            "stage": self.stage,
            "witness": self.witness.map(|g| g.0),
        })
    }
}

pub fn sup_norm_interval(reg: &Registry, x: &Point, n: u32) -> Result<NormInterval> {
    check_stage(reg, n)?;
    let (lower, witness) = sup_abs(reg, x, n)?;
    let upper = match x.range(reg)? {
        None => Q::zero(),
        Some((_, q)) => {
            let (m, _) = sup_abs(reg, x, q)?;
            reg.schedule().big_m() * m
        }
    };
    Ok(NormInterval { lower, upper, stage: n, witness })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MTLevel {
    pub j: usize,
    pub l: u64,
    pub theta: Q,
}

/// Parameters `(l_j, θ_j)` of a mixed Tsirelson norming set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MTParams {
    levels: Vec<MTLevel>,
    excluded: Option<usize>,
    tag: String,
}

impl MTParams {
    pub fn new(levels: Vec<MTLevel>, excluded: Option<usize>, tag: &str) -> Result<Self> {
        for (i, lv) in levels.iter().enumerate() {
            if lv.l == 0 || lv.theta <= Q::zero() || lv.theta >= one() {
                return Err(Error::InvalidArgument(format!("bad level j = {}", lv.j)));
            }
            if i > 0 && (lv.j <= levels[i - 1].j || lv.theta >= levels[i - 1].theta) {
                return Err(Error::InvalidArgument("levels need increasing j and decreasing θ".into()));
            }
        }
        Ok(MTParams { levels, excluded, tag: tag.to_string() })
    }

    /// `l_j = factor·n_j`, `θ_j = 1/m_j`.
    pub fn from_schedule(s: &ParameterSchedule, factor: u64) -> Result<Self> {
        let levels = (1..=s.len())
            .map(|j| {
                let l = (s.n(j)? * BigUint::from(factor)).to_u64().unwrap_or(u64::MAX);
                Ok(MTLevel { j, l, theta: s.weight_value(j)? })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(levels, None, &format!("l_j = {factor} n_j, theta_j = 1/m_j"))
    }

    pub fn excluding(mut self, j0: usize) -> Self {
        self.excluded = Some(j0);
        self
    }

    pub fn levels(&self) -> &[MTLevel] {
        &self.levels
    }

    pub fn excluded(&self) -> Option<usize> {
        self.excluded
    }

    pub fn level(&self, j: usize) -> Option<&MTLevel> {
        if self.excluded == Some(j) {
            return None;
        }
        self.levels.iter().find(|lv| lv.j == j)
    }

    /// Levels with `l_j < s` plus the first with `l_j ≥ s`; later ones are dominated.
    pub fn active(&self, s: usize) -> Vec<&MTLevel> {
        let mut out = Vec::new();
        for lv in self.levels.iter().filter(|lv| Some(lv.j) != self.excluded) {
            out.push(lv);
            if lv.l >= s as u64 {
                break;
            }
        }
        out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "levels": self.levels.iter().map(|lv| json!({"j": lv.j, "l": lv.l, "theta": fmt_q(&lv.theta)})).collect::<Vec<_>>(),
            "excluded": self.excluded,
            "tag": self.tag,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let arr = v.get("levels").and_then(Value::as_array).ok_or_else(|| Error::Parse("params need levels".into()))?;
        let levels = arr
            .iter()
            .map(|lv| {
                let j = lv.get("j").and_then(Value::as_u64).ok_or_else(|| Error::Parse("level j".into()))?;
                let l = lv.get("l").and_then(Value::as_u64).ok_or_else(|| Error::Parse("level l".into()))?;
                let t = lv.get("theta").and_then(Value::as_str).ok_or_else(|| Error::Parse("level theta".into()))?;
                Ok(MTLevel { j: j as usize, l, theta: parse_q(t)? })
            })
            .collect::<Result<Vec<_>>>()?;
        let excluded = v.get("excluded").and_then(Value::as_u64).map(|j| j as usize);
        let tag = v.get("tag").and_then(Value::as_str).unwrap_or("");
        Self::new(levels, excluded, tag)
    }
}

/// A functional of the norming set: `±e*_k` leaves and nodes `θ_j Σ children`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NormingTree {
    Leaf { sign: i8, k: u64 },
    Node { j: usize, children: Vec<NormingTree> },
}

impl NormingTree {
    pub fn support(&self) -> (u64, u64) {
        match self {
            NormingTree::Leaf { k, .. } => (*k, *k),
            NormingTree::Node { children, .. } => {
                let lo = children.iter().map(|c| c.support().0).min().unwrap_or(0);
                let hi = children.iter().map(|c| c.support().1).max().unwrap_or(0);
                (lo, hi)
            }
        }
    }

    /// Coefficients of the functional; `None` if a node weight is not in `params`.
    pub fn functional(&self, params: &MTParams) -> Option<BTreeMap<u64, Q>> {
        let mut out = BTreeMap::new();
        self.accumulate(params, &one(), &mut out)?;
        Some(out)
    }

    fn accumulate(&self, params: &MTParams, scale: &Q, out: &mut BTreeMap<u64, Q>) -> Option<()> {
        match self {
            NormingTree::Leaf { sign, k } => {
                let v = if *sign < 0 { -scale.clone() } else { scale.clone() };
                *out.entry(*k).or_insert_with(Q::zero) += v;
            }
            NormingTree::Node { j, children } => {
                let s = scale * &params.level(*j)?.theta;
                for c in children {
                    c.accumulate(params, &s, out)?;
                }
            }
        }
        Some(())
    }

    pub fn eval(&self, x: &BTreeMap<u64, Q>, params: &MTParams) -> Option<Q> {
        match self {
            NormingTree::Leaf { sign, k } => {
                let v = x.get(k).cloned().unwrap_or_else(Q::zero);
                Some(if *sign < 0 { -v } else { v })
            }
            NormingTree::Node { j, children } => {
                let t = params.level(*j)?.theta.clone();
                let mut acc = Q::zero();
                for c in children {
                    acc += c.eval(x, params)?;
                }
                Some(t * acc)
            }
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            NormingTree::Leaf { sign, k } => json!({"leaf": {"sign": sign, "k": k}}),
            NormingTree::Node { j, children } => {
                json!({"j": j, "children": children.iter().map(NormingTree::to_json).collect::<Vec<_>>()})
            }
        }
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        if let Some(leaf) = v.get("leaf") {
            let sign = leaf.get("sign").and_then(Value::as_i64).ok_or_else(|| Error::Parse("leaf sign".into()))?;
            let k = leaf.get("k").and_then(Value::as_u64).ok_or_else(|| Error::Parse("leaf k".into()))?;
            return Ok(NormingTree::Leaf { sign: sign as i8, k });
        }
        let j = v.get("j").and_then(Value::as_u64).ok_or_else(|| Error::Parse("node j".into()))?;
        let children = v
            .get("children")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("node children".into()))?
            .iter()
            .map(NormingTree::from_json)
            .collect::<Result<Vec<_>>>()?;
        Ok(NormingTree::Node { j: j as usize, children })
    }
}

/// Checks membership in the norming set; reports the first violation.
pub fn verify_norming_tree(t: &NormingTree, params: &MTParams) -> std::result::Result<(), String> {
    match t {
        NormingTree::Leaf { sign, .. } => {
            if *sign == 1 || *sign == -1 {
                Ok(())
            } else {
                Err(format!("leaf sign {sign} is not ±1"))
            }
        }
        NormingTree::Node { j, children } => {
            let lv = params.level(*j).ok_or_else(|| format!("weight index {j} not admitted"))?;
            if children.is_empty() {
                return Err(format!("node of weight {j} has no children"));
            }
            if children.len() as u64 > lv.l {
                return Err(format!("node of weight {j} has {} > {} children", children.len(), lv.l));
            }
            for w in children.windows(2) {
                if w[0].support().1 >= w[1].support().0 {
                    return Err(format!("children of node {j} are not successive"));
                }
            }
            children.iter().try_for_each(|c| verify_norming_tree(c, params))
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum VChoice {
    Leaf(usize),
    Level(usize, usize),
}

#[derive(Debug, Clone, Copy)]
enum Pieces {
    Free,
    AtMost(usize),
}

struct Dp<'a> {
    s: usize,
    k: Vec<u64>,
    x: Vec<Q>,
    levels: Vec<&'a MTLevel>,
    v: Vec<Q>,
    vc: Vec<VChoice>,
    u: Vec<Q>,
    uc: Vec<Option<usize>>,
    b: Vec<Vec<Q>>,
    bc: Vec<Vec<Option<usize>>>,
}

impl<'a> Dp<'a> {
    fn at(&self, a: usize, b: usize) -> usize {
        a * self.s + b
    }

    fn best_b(&self, a: usize, b: usize, d: usize) -> &Q {
        let d = d.min(b - a + 1).min(self.b[self.at(a, b)].len());
        &self.b[self.at(a, b)][d - 1]
    }

    fn run(&mut self) {
        let s = self.s;
        let free = self.levels.iter().any(|lv| lv.l >= s as u64);
        let dmax = self.levels.iter().filter(|lv| lv.l < s as u64).map(|lv| lv.l as usize).max().unwrap_or(1);
        for len in 1..=s {
            for a in 0..=s - len {
                let b = a + len - 1;
                let mut best = Q::zero();
                let mut choice = VChoice::Leaf(a);
                for i in a..=b {
                    if self.x[i].abs() > best {
                        best = self.x[i].abs();
                        choice = VChoice::Leaf(i);
                    }
                }
                for (li, lv) in self.levels.iter().enumerate() {
                    if len < 2 {
                        break;
                    }
                    let mut part: Option<(Q, usize)> = None;
                    for c in a..b {
                        let rest = if lv.l >= s as u64 {
                            self.u[self.at(c + 1, b)].clone()
                        } else if lv.l >= 2 {
                            self.best_b(c + 1, b, lv.l as usize - 1).clone()
                        } else {
                            break;
                        };
                        let val = &self.v[self.at(a, c)] + rest;
                        if part.as_ref().is_none_or(|(p, _)| val > *p) {
                            part = Some((val, c));
                        }
                    }
                    if let Some((p, c)) = part {
                        let val = &lv.theta * p;
                        if val > best {
                            best = val;
                            choice = VChoice::Level(li, c);
                        }
                    }
                }
                let idx = self.at(a, b);
                self.v[idx] = best.clone();
                self.vc[idx] = choice;
                if free {
                    let mut ub = best.clone();
                    let mut uc = None;
                    for c in a..b {
                        let val = &self.v[self.at(a, c)] + &self.u[self.at(c + 1, b)];
                        if val > ub {
                            ub = val;
                            uc = Some(c);
                        }
                    }
                    self.u[idx] = ub;
                    self.uc[idx] = uc;
                }
                let dm = dmax.min(len);
                let mut bv = vec![best.clone()];
                let mut bc = vec![None];
                for d in 2..=dm {
                    let mut top = best.clone();
                    let mut tc = None;
                    for c in a..b {
                        let val = &self.v[self.at(a, c)] + self.best_b(c + 1, b, d - 1);
                        if val > top {
                            top = val;
                            tc = Some(c);
                        }
                    }
                    bv.push(top);
                    bc.push(tc);
                }
                self.b[idx] = bv;
                self.bc[idx] = bc;
            }
        }
    }

    fn tree(&self, a: usize, b: usize) -> NormingTree {
        match self.vc[self.at(a, b)] {
            VChoice::Leaf(i) => NormingTree::Leaf { sign: if self.x[i].is_negative() { -1 } else { 1 }, k: self.k[i] },
            VChoice::Level(li, c) => {
                let lv = self.levels[li];
                let mode = if lv.l >= self.s as u64 { Pieces::Free } else { Pieces::AtMost(lv.l as usize - 1) };
                let mut children = vec![self.tree(a, c)];
                self.pieces(c + 1, b, mode, &mut children);
                NormingTree::Node { j: lv.j, children }
            }
        }
    }

    fn pieces(&self, a: usize, b: usize, mode: Pieces, out: &mut Vec<NormingTree>) {
        let cut = match mode {
            Pieces::Free => self.uc[self.at(a, b)],
            Pieces::AtMost(d) => {
                let d = d.min(b - a + 1).min(self.bc[self.at(a, b)].len());
                self.bc[self.at(a, b)][d - 1]
            }
        };
        match cut {
            None => out.push(self.tree(a, b)),
            Some(c) => {
                out.push(self.tree(a, c));
                let next = match mode {
                    Pieces::Free => Pieces::Free,
                    Pieces::AtMost(d) => Pieces::AtMost(d.min(b - a + 1) - 1),
                };
                self.pieces(c + 1, b, next, out);
            }
        }
    }
}

/// Exact mixed Tsirelson norm with an attaining tree; `None` for the zero vector.
pub fn mt_norm(x: &BTreeMap<u64, Q>, params: &MTParams) -> (Q, Option<NormingTree>) {
    let nz: Vec<(u64, Q)> = x.iter().filter(|(_, v)| !v.is_zero()).map(|(k, v)| (*k, v.clone())).collect();
    let s = nz.len();
    if s == 0 {
        return (Q::zero(), None);
    }
    let mut dp = Dp {
        s,
        k: nz.iter().map(|(k, _)| *k).collect(),
        x: nz.into_iter().map(|(_, v)| v).collect(),
        levels: params.active(s),
        v: vec![Q::zero(); s * s],
        vc: vec![VChoice::Leaf(0); s * s],
        u: vec![Q::zero(); s * s],
        uc: vec![None; s * s],
        b: vec![Vec::new(); s * s],
        bc: vec![Vec::new(); s * s],
    };
    dp.run();
    (dp.v[s - 1].clone(), Some(dp.tree(0, s - 1)))
}

/// Norm by exhausting all functionals of the norming set over `supp x`, tracking the best
/// value on each support subset; exponential, for cross-checking only.
pub fn mt_norm_exhaustive(x: &BTreeMap<u64, Q>, params: &MTParams, cap: usize) -> Result<Q> {
    let nz: Vec<Q> = x.values().filter(|v| !v.is_zero()).map(|v| v.abs()).collect();
    let s = nz.len();
    if s > cap.min(20) {
        return Err(Error::BruteForceCapExceeded { size: s, cap: cap.min(20) });
    }
    let mut best: BTreeMap<u32, Q> = (0..s).map(|i| (1u32 << i, nz[i].clone())).collect();
    let lo = |m: u32| m.trailing_zeros();
    let hi = |m: u32| 31 - m.leading_zeros();
    loop {
        let items: Vec<(u32, Q)> = best.iter().map(|(m, v)| (*m, v.clone())).collect();
        let mut changed = false;
        for lv in params.levels().iter().filter(|lv| Some(lv.j) != params.excluded()) {
            let maxn = (lv.l as usize).min(s);
            let mut stack: Vec<(usize, u32, Q)> = items.iter().map(|(m, v)| (1, *m, v.clone())).collect();
            while let Some((n, mask, acc)) = stack.pop() {
                if n >= 2 {
                    let v = &acc * &lv.theta;
                    let e = best.entry(mask).or_insert_with(Q::zero);
                    if v > *e {
                        *e = v;
                        changed = true;
                    }
                }
                if n == maxn {
                    continue;
                }
                for (m, v) in &items {
                    if lo(*m) > hi(mask) {
                        stack.push((n + 1, mask | m, &acc + v));
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    Ok(best.into_values().max().unwrap_or_else(Q::zero))
}

/// `n^{-1} Σ_{l=1}^n e_l`.
pub fn average_vector(n: u64) -> BTreeMap<u64, Q> {
    let c = recip_uint(&BigUint::from(n));
    (1..=n).map(|l| (l, c.clone())).collect()
}

pub fn schedule_subsequence(s: &ParameterSchedule, l: &[usize]) -> Result<ParameterSchedule> {
    s.subsequence(l)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UncondReport {
    /// `max_± ‖Σ ±w(γ) d_γ‖` at stage `N`.
    pub value: Q,
    /// Stage-`N` lower estimate of `‖Σ w(γ) U_γ‖` from test vectors `i_n(u)`.
    pub opnorm_lower: Q,
    pub signs: Vec<(GammaId, i8)>,
}

/// Unconditionalized norm by enumeration of sign patterns (first sign fixed by symmetry).
pub fn unconditionalized_norm(reg: &Registry, w: &BTreeMap<GammaId, Q>, n: u32, cap: usize) -> Result<UncondReport> {
    check_stage(reg, n)?;
    let supp: Vec<GammaId> = w.iter().filter(|(_, v)| !v.is_zero()).map(|(g, _)| *g).collect();
    if supp.len() > cap {
        return Err(Error::BruteForceCapExceeded { size: supp.len(), cap });
    }
    let mut best = Q::zero();
    let mut best_signs = Vec::new();
    let mut op = Q::zero();
    let patterns: u64 = if supp.is_empty() { 1 } else { 1 << (supp.len() - 1) };
    for mask in 0..patterns {
        let sign = |i: usize| if i > 0 && mask >> (i - 1) & 1 == 1 { -1i8 } else { 1 };
        let x = Point::from_d(supp.iter().enumerate().map(|(i, g)| (*g, &w[g] * Q::from_integer(sign(i).into()))));
        let (val, _) = sup_abs(reg, &x, n)?;
        // y = i_n(u) with u = ±1 has ‖y‖ ≤ M and W y = Σ ±w(γ) d_γ.
        let ratio = &val / reg.schedule().big_m();
        if ratio > op {
            op = ratio;
        }
        if val > best || best_signs.is_empty() {
            best = val;
            best_signs = supp.iter().enumerate().map(|(i, g)| (*g, sign(i))).collect();
        }
    }
    Ok(UncondReport { value: best, opnorm_lower: op, signs: best_signs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn two_level() -> MTParams {
        MTParams::new(
            vec![MTLevel { j: 1, l: 2, theta: q(1, 2) }, MTLevel { j: 2, l: 4, theta: q(1, 3) }],
            None,
            "test",
        )
        .unwrap()
    }

    #[test]
    fn unit_vector_norm_one() {
        let x: BTreeMap<u64, Q> = [(5, q(-1, 1))].into();
        let (v, t) = mt_norm(&x, &two_level());
        assert_eq!(v, one());
        assert_eq!(t.unwrap(), NormingTree::Leaf { sign: -1, k: 5 });
    }

    #[test]
    fn two_equal_coordinates() {
        let x: BTreeMap<u64, Q> = [(1, one()), (2, one())].into();
        let p = two_level();
        let (v, t) = mt_norm(&x, &p);
        assert_eq!(v, one());
        let x: BTreeMap<u64, Q> = [(1, one()), (2, one()), (3, one())].into();
        let (v, t3) = mt_norm(&x, &p);
        assert_eq!(v, one());
        verify_norming_tree(&t.unwrap(), &p).unwrap();
        verify_norming_tree(&t3.unwrap(), &p).unwrap();
        let x: BTreeMap<u64, Q> = (1..=4).map(|k| (k, one())).collect();
        let (v, t) = mt_norm(&x, &p);
        assert_eq!(v, q(4, 3));
        assert_eq!(t.unwrap().eval(&x, &p).unwrap(), v);
    }

    #[test]
    fn verify_rejects() {
        let p = two_level();
        let leaf = |k| NormingTree::Leaf { sign: 1, k };
        assert!(verify_norming_tree(&leaf(1), &p).is_ok());
        let wide = NormingTree::Node { j: 1, children: vec![leaf(1), leaf(2), leaf(3)] };
        assert!(verify_norming_tree(&wide, &p).is_err());
        let overlap = NormingTree::Node { j: 2, children: vec![leaf(2), leaf(1)] };
        assert!(verify_norming_tree(&overlap, &p).is_err());
        let excl = NormingTree::Node { j: 1, children: vec![leaf(1), leaf(2)] };
        assert!(verify_norming_tree(&excl, &p.clone().excluding(1)).is_err());
    }

    #[test]
    fn truncation_rule() {
        let p = two_level();
        assert_eq!(p.active(2).len(), 1);
        assert_eq!(p.active(3).len(), 2);
        assert_eq!(p.clone().excluding(1).active(2)[0].j, 2);
    }

    #[test]
    fn tree_json_round_trip() {
        let x: BTreeMap<u64, Q> = (1..=5).map(|k| (k, q(k as i64 - 3, 1))).collect();
        let (_, t) = mt_norm(&x, &two_level());
        let t = t.unwrap();
        assert_eq!(NormingTree::from_json(&t.to_json()).unwrap(), t);
        let p = two_level();
        assert_eq!(MTParams::from_json(&p.to_json()).unwrap(), p);
    }

    #[test]
    fn zero_vector() {
        let (v, t) = mt_norm(&BTreeMap::new(), &two_level());
        assert!(v.is_zero() && t.is_none());
    }
}
