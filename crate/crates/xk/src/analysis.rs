//! Constructions on block sequences: RIS certificates, averages, local-weight
//! splits, lower-estimate witnesses, exact pairs, dependent sequences, the
//! basic-inequality witness and the `y ± z` probe.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::certificate::{Certificate, Verdict};
use crate::engine::{eval, eval_after_projection, evaluation_analysis, extend, sup_abs, values, Point};
use crate::error::{Error, Result};
use crate::func::Func;
use crate::norms::{sup_norm_interval, verify_norming_tree, MTParams, NormInterval, NormingTree};
use crate::rational::{fmt_q, one, q, q_from_uint, qi, Q};
use crate::registry::{Draft, GammaId, Kind, Registry};
use crate::schedule::Mode;
use crate::spaces::forge_even;

/// Highest materialized rank.
pub fn top_stage(reg: &Registry) -> u32 {
    reg.max_rank().max(reg.generated_stage())
}

fn m_value(reg: &Registry, j: usize) -> Result<Q> {
    Ok(q_from_uint(reg.schedule().m(j)?))
}

fn weight(reg: &Registry, j: usize) -> Result<Q> {
    reg.schedule().weight_value(j)
}

fn points_json(xs: &[Point]) -> Value {
    Value::Array(xs.iter().map(|x| json!(x.d_coords().iter().map(|(g, c)| json!([g.0, fmt_q(c)])).collect::<Vec<_>>())).collect())
}

fn argmax_abs(lam: &[Q], lo: usize, hi: usize) -> usize {
    let mut best = lo;
    for k in lo..=hi {
        if lam[k].abs() > lam[best].abs() {
            best = k;
        }
    }
    best
}

/// Ranges of a block sequence; every block nonzero and strictly after its predecessor.
pub fn block_ranges(reg: &Registry, xs: &[Point]) -> Result<Vec<(u32, u32)>> {
    let mut out: Vec<(u32, u32)> = Vec::with_capacity(xs.len());
    for (k, x) in xs.iter().enumerate() {
        let r = x.range(reg)?.ok_or_else(|| Error::NotBlockSequence(format!("block {} is zero", k + 1)))?;
        if let Some(prev) = out.last() {
            if prev.1 >= r.0 {
                return Err(Error::NotBlockSequence(format!("block {} starts at rank {} ≤ {}", k + 1, r.0, prev.1)));
            }
        }
        out.push(r);
    }
    Ok(out)
}

/// Ranges of a skipped block sequence: at least one empty rank between blocks.
pub fn skipped_ranges(reg: &Registry, xs: &[Point]) -> Result<Vec<(u32, u32)>> {
    let r = block_ranges(reg, xs).map_err(|e| match e {
        Error::NotBlockSequence(s) => Error::NotSkippedBlock(s),
        e => e,
    })?;
    for (k, w) in r.windows(2).enumerate() {
        if w[0].1 + 1 >= w[1].0 {
            return Err(Error::NotSkippedBlock(format!("no gap between blocks {} and {}", k + 1, k + 2)));
        }
    }
    Ok(r)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RISCertificate {
    pub constant: Q,
    pub js: Vec<usize>,
    pub stage: u32,
    /// Stage-`N` lower norms `max_{Γ_N}|x_k|`.
    pub norms: Vec<Q>,
    pub bounded: bool,
    pub increasing: bool,
    pub decay: bool,
    pub decay_failure: Option<(usize, GammaId)>,
}

impl RISCertificate {
    pub fn holds(&self) -> bool {
        self.bounded && self.increasing && self.decay
    }

    pub fn to_json(&self) -> Value {
        json!({
            "constant": fmt_q(&self.constant),
            "js": self.js,
            "stage": self.stage,
            "norms": self.norms.iter().map(fmt_q).collect::<Vec<_>>(),
            "bounded": self.bounded,
            "increasing": self.increasing,
            "decay": self.decay,
            "decay_failure": self.decay_failure.map(|(k, g)| json!([k + 1, g.0])),
            "scope": "stage",
        })
    }
}

/// `j_1 = 1`, `j_{k+1} = max ran x_k + 1`.
pub fn ris_indices(reg: &Registry, xs: &[Point]) -> Result<Vec<usize>> {
    let r = block_ranges(reg, xs)?;
    let mut js = vec![1usize];
    js.extend(r.iter().take(r.len().saturating_sub(1)).map(|(_, hi)| *hi as usize + 1));
    js.truncate(xs.len());
    Ok(js)
}

/// Least `C` meeting the norm and decay conditions over `Γ_N`.
pub fn ris_constant(reg: &Registry, xs: &[Point], js: &[usize], n: u32) -> Result<Q> {
    block_ranges(reg, xs)?;
    let mut c = Q::zero();
    for (x, &jk) in xs.iter().zip(js) {
        for (g, v) in values(reg, x, n)? {
            let a = v.abs();
            if a > c {
                c = a.clone();
            }
            if let Some(i) = reg.weight_index(g)? {
                if i < jk {
                    let t = a * m_value(reg, i)?;
                    if t > c {
                        c = t;
                    }
                }
            }
        }
    }
    Ok(c)
}

pub fn check_ris(reg: &Registry, xs: &[Point], c: &Q, js: &[usize], n: u32) -> Result<RISCertificate> {
    let ranges = block_ranges(reg, xs)?;
    if js.len() != xs.len() {
        return Err(Error::InvalidArgument(format!("{} indices for {} blocks", js.len(), xs.len())));
    }
    if js.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("indices j_k must increase".into()));
    }
    let increasing = (1..xs.len()).all(|k| js[k] > ranges[k - 1].1 as usize);
    let mut norms = Vec::with_capacity(xs.len());
    let mut decay_failure = None;
    for (k, (x, &jk)) in xs.iter().zip(js).enumerate() {
        let vals = values(reg, x, n)?;
        norms.push(vals.values().map(Signed::abs).max().unwrap_or_else(Q::zero));
        if decay_failure.is_some() {
            continue;
        }
        for (g, v) in &vals {
            if let Some(i) = reg.weight_index(*g)? {
                if i < jk && v.abs() * m_value(reg, i)? > *c {
                    decay_failure = Some((k, *g));
                    break;
                }
            }
        }
    }
    Ok(RISCertificate {
        constant: c.clone(),
        js: js.to_vec(),
        stage: n,
        bounded: norms.iter().all(|v| v <= c),
        norms,
        increasing,
        decay: decay_failure.is_none(),
        decay_failure,
    })
}

/// `x = y + z` with the local support split at weight index `thresh`; the base element goes to `y`.
pub fn split_by_local_weight(reg: &Registry, x: &Point, thresh: usize, n: u32) -> Result<(Point, Point)> {
    let Some((_, q)) = x.range(reg)? else {
        return Ok((Point::zero(), Point::zero()));
    };
    let n = n.max(q);
    let mut low = BTreeMap::new();
    let mut high = BTreeMap::new();
    for (g, v) in values(reg, x, q)? {
        match reg.weight_index(g)? {
            Some(i) if i > thresh => high.insert(g, v),
            _ => low.insert(g, v),
        };
    }
    Ok((extend(reg, q, &low, n)?, extend(reg, q, &high, n)?))
}

fn local_weights(reg: &Registry, x: &Point) -> Result<Vec<Option<usize>>> {
    let Some((_, q)) = x.range(reg)? else {
        return Ok(Vec::new());
    };
    values(reg, x, q)?.keys().map(|g| reg.weight_index(*g)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LocalWeightClass {
    Bounded { j1: usize, constant: Q },
    RapidlyIncreasing { constant: Q },
    Neither,
}

/// Rapid increase is checked first. Bounded local weight uses `j1` when given,
/// else the largest weight index in the local support of `x_1`.
pub fn classify_local_weight(reg: &Registry, xs: &[Point], j1: Option<usize>, n: u32) -> Result<LocalWeightClass> {
    let ranges = block_ranges(reg, xs)?;
    let lw = xs.iter().map(|x| local_weights(reg, x)).collect::<Result<Vec<_>>>()?;
    let mut sup = Q::zero();
    for x in xs {
        let (v, _) = sup_abs(reg, x, n)?;
        if v > sup {
            sup = v;
        }
    }
    let rapid = (1..xs.len()).all(|k| lw[k].iter().all(|w| matches!(w, Some(i) if *i > ranges[k - 1].1 as usize)));
    if rapid {
        return Ok(LocalWeightClass::RapidlyIncreasing { constant: qi(3) * sup });
    }
    let j1 = j1.unwrap_or_else(|| lw.first().map(|w| w.iter().flatten().copied().max().unwrap_or(1)).unwrap_or(1));
    if lw.iter().flatten().all(|w| w.is_none_or(|i| i <= j1)) {
        return Ok(LocalWeightClass::Bounded { j1, constant: m_value(reg, j1)? * sup });
    }
    Ok(LocalWeightClass::Neither)
}

#[derive(Debug, Clone)]
pub struct L1Average {
    pub blocks: Vec<Point>,
    pub point: Point,
    /// Factor applied to the chosen candidates.
    pub scale: Q,
    pub block_norms: Vec<Q>,
    pub stage: u32,
}

impl L1Average {
    /// Largest `|⟨d*_γ, x⟩| / (‖d*_γ‖₁ max_k ‖x_k‖)`; at most `1/n` exactly.
    pub fn coordinate_ratio(&self, reg: &Registry) -> Result<Q> {
        let c = self.block_norms.iter().max().cloned().unwrap_or_else(Q::zero);
        if c.is_zero() {
            return Ok(Q::zero());
        }
        let mut best = Q::zero();
        for (g, v) in self.point.d_coords() {
            let r = v.abs() / (reg.d_star(*g)?.l1() * &c);
            if r > best {
                best = r;
            }
        }
        Ok(best)
    }
}

/// Searches consecutive windows of `n` candidates for a normalized `C`-ℓ1 average at stage `N`.
pub fn make_l1_average(reg: &Registry, candidates: &[Point], n: usize, c: &Q, stage: u32) -> Result<L1Average> {
    if n == 0 || c <= &one() {
        return Err(Error::InvalidArgument("need n ≥ 1 and C > 1".into()));
    }
    let nq = qi(n as i64);
    for start in 0..candidates.len().saturating_sub(n - 1) {
        let window = &candidates[start..start + n];
        if skipped_ranges(reg, window).is_err() {
            continue;
        }
        let x = Point::sum(window).scaled(&(one() / &nq));
        let (norm, _) = sup_abs(reg, &x, stage)?;
        if norm.is_zero() {
            continue;
        }
        let scale = one() / &norm;
        let blocks: Vec<Point> = window.iter().map(|b| b.scaled(&scale)).collect();
        let block_norms = blocks.iter().map(|b| sup_abs(reg, b, stage).map(|v| v.0)).collect::<Result<Vec<_>>>()?;
        if block_norms.iter().all(|v| v <= c) {
            return Ok(L1Average { point: x.scaled(&scale), blocks, scale, block_norms, stage });
        }
    }
    Err(Error::SearchExhausted(format!("no normalized {}-ℓ1 average of length {n} among {} candidates", fmt_q(c), candidates.len())))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LowerEstimate {
    pub gamma: GammaId,
    pub j: usize,
    pub cuts: Vec<u32>,
    pub etas: Vec<GammaId>,
    pub signs: Vec<i8>,
    pub maxabs: Vec<Q>,
    /// `⟨e*_γ, Σ x_r⟩`.
    pub lhs: Q,
    pub identity: bool,
    pub window_max: bool,
    pub norms: Vec<Q>,
    pub stage: u32,
}

impl LowerEstimate {
    pub fn sum_maxabs(&self) -> Q {
        self.maxabs.iter().sum()
    }

    /// `Σ maxabs_r ≥ ½ Σ ‖x_r‖` with stage-`N` norms.
    pub fn half_bound(&self) -> bool {
        self.sum_maxabs() * qi(2) >= self.norms.iter().sum::<Q>()
    }

    pub fn certificate(&self, reg: &Registry, xs: &[Point]) -> Result<Certificate> {
        let inputs = json!({"blocks": points_json(xs), "j": self.j});
        let m = m_value(reg, 2 * self.j)?;
        Ok(Certificate::new("lower-estimate", "<e*_g, sum x_r> = m_2j^-1 sum_r max|x_r| over windows", reg, self.stage, &inputs)
            .value("lhs", &self.lhs)
            .value("sum_maxabs", &self.sum_maxabs())
            .value("m_2j", &m)
            .value("sum_norms_stage", &self.norms.iter().sum::<Q>())
            .count("gamma", self.gamma.0 as u64)
            .count("half_bound", self.half_bound() as u64)
            .verdict(Verdict::of(self.identity && self.window_max && self.half_bound(), true)))
    }
}

fn first_cut(ranges: &[(u32, u32)], w: u32) -> Result<u32> {
    let p1 = (ranges[0].1 + 1).max(w);
    if ranges.len() > 1 && p1 >= ranges[1].0 {
        return Err(Error::CutTooSmall { p1: ranges[0].1 + 1, min: w });
    }
    Ok(p1)
}

fn cuts_for(ranges: &[(u32, u32)], w: u32) -> Result<Vec<u32>> {
    let mut cuts = vec![first_cut(ranges, w)?];
    cuts.extend(ranges.iter().skip(1).map(|r| r.1 + 1));
    Ok(cuts)
}

/// Forges `γ` of weight `m_{2j}` whose rows take `±e*_η` at the largest coordinate of each block.
pub fn lower_estimate_witness(reg: &mut Registry, xs: &[Point], j: usize) -> Result<LowerEstimate> {
    let ranges = skipped_ranges(reg, xs)?;
    let cuts = cuts_for(&ranges, (2 * j) as u32)?;
    let mut etas = Vec::new();
    let mut signs = Vec::new();
    let mut maxabs = Vec::new();
    let mut payloads = Vec::new();
    let mut window_max = true;
    for (r, x) in xs.iter().enumerate() {
        let lo = if r == 0 { 0 } else { cuts[r - 1] };
        let vals = values(reg, x, cuts[r] - 1)?;
        let mut keyed: Vec<_> = vals.iter().filter(|(g, _)| reg.rank_of(**g) > lo).map(|(g, v)| ((reg.rank_of(*g), *g), v)).collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        let mut best: Option<(GammaId, &Q)> = None;
        for ((_, g), v) in keyed {
            if best.is_none_or(|(_, b)| v.abs() > b.abs()) {
                best = Some((g, v));
            }
        }
        let (eta, v) = best.ok_or_else(|| Error::NotSkippedBlock(format!("block {} vanishes on its window", r + 1)))?;
        let sign: i8 = if v.is_negative() { -1 } else { 1 };
        window_max &= vals.iter().filter(|(g, _)| reg.rank_of(**g) > lo).all(|(_, u)| u.abs() <= v.abs());
        etas.push(eta);
        signs.push(sign);
        maxabs.push(v.abs());
        payloads.push(Func::single(eta, qi(sign as i64)));
    }
    let gamma = forge_even(reg, j, &cuts, &payloads)?;
    let total = Point::sum(xs);
    let lhs = eval(reg, &total, gamma)?;
    let identity = lhs == weight(reg, 2 * j)? * maxabs.iter().sum::<Q>();
    let stage = top_stage(reg);
    let norms = xs.iter().map(|x| sup_abs(reg, x, stage).map(|v| v.0)).collect::<Result<Vec<_>>>()?;
    Ok(LowerEstimate { gamma, j, cuts, etas, signs, maxabs, lhs, identity, window_max, norms, stage })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactPairReport {
    /// Claimed constant.
    pub constant: Q,
    /// Weight index of the witness.
    pub j: usize,
    pub eps: u8,
    pub gamma: GammaId,
    pub stage: u32,
    pub clause1: bool,
    pub clause2: bool,
    pub clause3: bool,
    pub value_at_gamma: Q,
    pub norm_lower: Q,
    pub max_dcoord: Q,
    /// Least constant for which all three clauses hold at this stage.
    pub least_constant: Q,
    /// Whether the sum had the full length `n_j`.
    pub full_length: bool,
}

impl ExactPairReport {
    pub fn holds(&self) -> bool {
        self.clause1 && self.clause2 && self.clause3
    }

    pub fn to_json(&self) -> Value {
        json!({
            "constant": fmt_q(&self.constant),
            "j": self.j,
            "eps": self.eps,
            "gamma": self.gamma.0,
            "stage": self.stage,
            "clauses": [self.clause1, self.clause2, self.clause3],
            "value_at_gamma": fmt_q(&self.value_at_gamma),
            "norm_lower": fmt_q(&self.norm_lower),
            "max_dcoord": fmt_q(&self.max_dcoord),
            "least_constant": fmt_q(&self.least_constant),
            "full_length": self.full_length,
        })
    }
}

/// Evaluates the three exact-pair clauses for `(x, γ)` over `Γ_N`.
pub fn exact_pair_report(reg: &Registry, x: &Point, gamma: GammaId, c: &Q, eps: u8, n: u32) -> Result<ExactPairReport> {
    let j = reg.weight_index(gamma)?.ok_or_else(|| Error::WeightMismatch(format!("{gamma} has no weight")))?;
    let mj = m_value(reg, j)?;
    let max_dcoord = x.d_coords().values().map(Signed::abs).max().unwrap_or_else(Q::zero);
    let vals = values(reg, x, n)?;
    let norm_lower = vals.values().map(Signed::abs).max().unwrap_or_else(Q::zero);
    let value_at_gamma = vals.get(&gamma).cloned().unwrap_or_else(Q::zero);
    let mut least = (&max_dcoord * &mj).max(norm_lower.clone());
    for (g, v) in &vals {
        if let Some(i) = reg.weight_index(*g)? {
            let t = match i.cmp(&j) {
                std::cmp::Ordering::Less => v.abs() * m_value(reg, i)?,
                std::cmp::Ordering::Greater => v.abs() * &mj,
                std::cmp::Ordering::Equal => continue,
            };
            if t > least {
                least = t;
            }
        }
    }
    let clause3 = {
        let mut ok = true;
        for (g, v) in &vals {
            if let Some(i) = reg.weight_index(*g)? {
                let bound = match i.cmp(&j) {
                    std::cmp::Ordering::Less => c / m_value(reg, i)?,
                    std::cmp::Ordering::Greater => c / &mj,
                    std::cmp::Ordering::Equal => continue,
                };
                ok &= v.abs() <= bound;
            }
        }
        ok
    };
    Ok(ExactPairReport {
        constant: c.clone(),
        j,
        eps,
        gamma,
        stage: n,
        clause1: max_dcoord <= c / &mj,
        clause2: norm_lower <= *c && value_at_gamma == Q::from_integer(eps.into()),
        clause3,
        value_at_gamma,
        norm_lower,
        max_dcoord,
        least_constant: least,
        full_length: false,
    })
}

#[derive(Debug, Clone)]
pub struct ExactPair {
    pub theta: Q,
    pub x: Point,
    pub gamma: GammaId,
    pub cuts: Vec<u32>,
    pub payloads: Vec<Func>,
    pub report: ExactPairReport,
}

impl ExactPair {
    pub fn certificate(&self, reg: &Registry, xs: &[Point]) -> Result<Certificate> {
        let inputs = json!({"blocks": points_json(xs), "j": self.report.j, "eps": self.report.eps});
        let admissible = reg.schedule().mode() == Mode::Admissible && self.report.full_length;
        let r = &self.report;
        Ok(Certificate::new(
            if r.eps == 1 { "exact-pair-one" } else { "exact-pair-zero" },
            "x(g) = eps exactly; clauses (1)-(3) at the claimed constant",
            reg,
            r.stage,
            &inputs,
        )
        .value("theta", &self.theta)
        .value("value_at_gamma", &r.value_at_gamma)
        .value("claimed_constant", &r.constant)
        .value("least_constant", &r.least_constant)
        .count("clauses_hold", r.holds() as u64)
        .verdict(if r.value_at_gamma != Q::from_integer(r.eps.into()) {
            Verdict::Violated
        } else {
            Verdict::of(r.holds(), admissible)
        }))
    }
}

fn window_values(reg: &Registry, x: &Point, lo: u32, hi: u32) -> Result<Vec<(GammaId, Q)>> {
    let vals = values(reg, x, hi)?;
    let mut out: Vec<((u32, GammaId), Q)> = Vec::new();
    for g in (lo + 1..=hi).flat_map(|r| reg.delta(r).iter().copied()) {
        out.push(((reg.rank_of(g), g), vals.get(&g).cloned().unwrap_or_else(Q::zero)));
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out.into_iter().map(|((_, g), v)| (g, v)).collect())
}

/// A functional on the window `(lo, hi]` of norm at most one killing `x`.
fn find_annihilator(reg: &Registry, x: &Point, lo: u32, hi: u32) -> Result<Option<Func>> {
    let w = window_values(reg, x, lo, hi)?;
    if let Some((g, _)) = w.iter().find(|(_, v)| v.is_zero()) {
        return Ok(Some(Func::unit(*g)));
    }
    if w.len() < 2 {
        return Ok(None);
    }
    let (a, u) = &w[0];
    let (b, v) = &w[1];
    let s = u.abs() + v.abs();
    Ok(Some(Func::from_pairs([(*a, v / &s), (*b, -(u / &s))])))
}

/// `ε = 1`: `x = θ m_{2j} a^{-1} Σ x_k` with `x(γ) = 1`. `ε = 0`: `z = m_{2j} a^{-1} Σ x_k` against rows killing each block.
pub fn make_exact_pair(
    reg: &mut Registry,
    xs: &[Point],
    j: usize,
    eps: u8,
    annihilators: Option<&[Func]>,
    c: &Q,
) -> Result<ExactPair> {
    let w = 2 * j;
    let a = xs.len();
    let m = m_value(reg, w)?;
    let full_length = BigUint::from(a) == *reg.schedule().n(w)?;
    let aq = qi(a as i64);
    match eps {
        1 => {
            let le = lower_estimate_witness(reg, xs, j)?;
            let s = le.sum_maxabs();
            let theta = &aq / &s;
            let x = Point::sum(xs).scaled(&(&theta * &m / &aq));
            let stage = top_stage(reg);
            let mut report = exact_pair_report(reg, &x, le.gamma, &(qi(22) * c), 1, stage)?;
            report.full_length = full_length;
            let payloads = le.etas.iter().zip(&le.signs).map(|(e, s)| Func::single(*e, qi(*s as i64))).collect();
            Ok(ExactPair { theta, x, gamma: le.gamma, cuts: le.cuts, payloads, report })
        }
        0 => {
            let ranges = skipped_ranges(reg, xs)?;
            let cuts = cuts_for(&ranges, w as u32)?;
            let mut payloads = Vec::with_capacity(a);
            for (k, x) in xs.iter().enumerate() {
                let lo = if k == 0 { 0 } else { cuts[k - 1] };
                let b = match annihilators {
                    Some(list) => list.get(k).cloned().ok_or(Error::AnnihilatorMissing(k + 1))?,
                    None => find_annihilator(reg, x, lo, cuts[k] - 1)?.ok_or(Error::AnnihilatorMissing(k + 1))?,
                };
                let vals = values(reg, x, cuts[k] - 1)?;
                let in_window = b.support().all(|g| reg.rank_of(g) > lo && reg.rank_of(g) < cuts[k]);
                if !in_window || b.l1() > one() || !b.dot(&vals).is_zero() {
                    return Err(Error::AnnihilatorMissing(k + 1));
                }
                payloads.push(b);
            }
            let gamma = forge_even(reg, j, &cuts, &payloads)?;
            let x = Point::sum(xs).scaled(&(&m / &aq));
            let stage = top_stage(reg);
            let mut report = exact_pair_report(reg, &x, gamma, &(qi(12) * c), 0, stage)?;
            report.full_length = full_length;
            Ok(ExactPair { theta: one(), x, gamma, cuts, payloads, report })
        }
        _ => Err(Error::InvalidArgument(format!("ε must be 0 or 1, got {eps}"))),
    }
}

/// A source of nonzero blocks placed above a given rank.
pub trait BlockSource {
    /// A block with `min ran > after`.
    fn next_block(&mut self, reg: &mut Registry, after: u32) -> Result<Point>;
    fn name(&self) -> String;
}

/// Blocks spanned by `d_g` of forged Type 1 elements with payload `±½e*_base`.
/// Two elements are forged on every rank; coordinates are normalized to max one.
#[derive(Debug, Clone)]
pub struct ForgedBlocks {
    rng: ChaCha8Rng,
    weight_index: usize,
    width: u32,
    label: String,
}

impl ForgedBlocks {
    pub fn new(seed: u64, weight_index: usize, width: u32) -> Self {
        ForgedBlocks {
            rng: ChaCha8Rng::seed_from_u64(seed),
            weight_index,
            width: width.max(1),
            label: format!("forged(w={weight_index},width={width},seed={seed})"),
        }
    }
}

/// The rank-one element, interned if missing.
pub fn base_element(reg: &mut Registry) -> Result<GammaId> {
    reg.intern(Draft::base())
}

impl BlockSource for ForgedBlocks {
    fn next_block(&mut self, reg: &mut Registry, after: u32) -> Result<Point> {
        let base = base_element(reg)?;
        let lo = (after + 1).max(self.weight_index as u32).max(2);
        let span = self.rng.gen_range(1..=self.width);
        let mut coords = Vec::new();
        for r in lo..lo + span {
            let pair = [
                reg.intern(Draft::type1(r, self.weight_index, Func::single(base, q(1, 2))))?,
                reg.intern(Draft::type1(r, self.weight_index, Func::single(base, q(-1, 2))))?,
            ];
            let pick = self.rng.gen_range(0..3);
            for (i, g) in pair.iter().enumerate() {
                if pick == 2 || pick == i {
                    let c = *[1i64, -1, 2, -2, 3].choose(&mut self.rng).expect("nonempty");
                    coords.push((*g, qi(c)));
                }
            }
        }
        let top = coords.iter().map(|(_, c)| c.abs()).max().unwrap_or_else(one);
        Ok(Point::from_d(coords.into_iter().map(|(g, c)| (g, c / &top))))
    }

    fn name(&self) -> String {
        self.label.clone()
    }
}

/// Number of blocks per exact pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerLength {
    Fixed(usize),
    /// `a = m_w` for the target weight index `w`.
    WeightValue,
}

#[derive(Debug, Clone)]
pub struct DependentSequenceRecord {
    pub j0: usize,
    pub eps: u8,
    pub cuts: Vec<u32>,
    pub xis: Vec<GammaId>,
    pub etas: Vec<GammaId>,
    pub points: Vec<Point>,
    /// Weight index of each `η_i`.
    pub targets: Vec<usize>,
    pub thetas: Vec<Q>,
    pub pair_reports: Vec<ExactPairReport>,
    pub ris_constants: Vec<Q>,
    pub sources: Vec<String>,
    pub inner: Vec<usize>,
}

impl DependentSequenceRecord {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Largest least-constant over the exact pairs.
    pub fn constant(&self) -> Q {
        self.pair_reports.iter().map(|r| r.least_constant.clone()).max().unwrap_or_else(Q::zero)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "j0": self.j0,
            "eps": self.eps,
            "cuts": self.cuts,
            "xis": self.xis.iter().map(|g| g.0).collect::<Vec<_>>(),
            "etas": self.etas.iter().map(|g| g.0).collect::<Vec<_>>(),
            "targets": self.targets,
            "thetas": self.thetas.iter().map(fmt_q).collect::<Vec<_>>(),
            "pairs": self.pair_reports.iter().map(ExactPairReport::to_json).collect::<Vec<_>>(),
            "ris_constants": self.ris_constants.iter().map(fmt_q).collect::<Vec<_>>(),
            "sources": self.sources,
            "inner": self.inner,
            "points": self.points.iter().map(Point::to_json).collect::<Vec<_>>(),
        })
    }
}

/// Smallest `w ≡ 2 (mod 4)` with `m_w > n_{2j0-1}²`, or `2` when the guard is waived.
pub fn first_target(reg: &Registry, j0: usize) -> Result<usize> {
    let s = reg.schedule();
    let n = s.n(2 * j0 - 1)?;
    let n2 = n * n;
    if let Some(w) = (2..=s.len()).step_by(4).find(|&w| *s.m(w).expect("in range") > n2) {
        return Ok(w);
    }
    if reg.odd_guard() == crate::registry::OddGuard::Waive && s.mode() == Mode::Toy && s.len() >= 2 {
        return Ok(2);
    }
    Err(Error::OddWeightRuleViolation(format!("no weight index w ≡ 2 (mod 4) with m_w > n_{}²", 2 * j0 - 1)))
}

/// Alternates exact pairs from the sources with links of an odd-weight chain of weight `m_{2j0-1}`.
pub fn make_dependent_sequence(
    reg: &mut Registry,
    j0: usize,
    sources: &mut [&mut dyn BlockSource],
    eps: u8,
    len: usize,
    inner: InnerLength,
) -> Result<DependentSequenceRecord> {
    if sources.is_empty() || len == 0 {
        return Err(Error::InvalidArgument("need a source and a positive length".into()));
    }
    let odd = 2 * j0 - 1;
    let limit = reg.schedule().n(odd)?.clone();
    if BigUint::from(len) > limit {
        return Err(Error::AgeOverflow { j: odd, age: len as u64, limit: limit.to_string() });
    }
    let mut rec = DependentSequenceRecord {
        j0,
        eps,
        cuts: Vec::new(),
        xis: Vec::new(),
        etas: Vec::new(),
        points: Vec::new(),
        targets: Vec::new(),
        thetas: Vec::new(),
        pair_reports: Vec::new(),
        ris_constants: Vec::new(),
        sources: Vec::new(),
        inner: Vec::new(),
    };
    let mut prev = 0u32;
    for i in 0..len {
        let w = match rec.xis.last() {
            None => first_target(reg, j0)?,
            Some(xi) => 4 * reg.sigma(*xi)? as usize,
        };
        if !reg.schedule().has(w) {
            return Err(Error::SearchExhausted(format!("schedule of length {} has no weight index {w}", reg.schedule().len())));
        }
        let a = match inner {
            InnerLength::Fixed(a) => a,
            InnerLength::WeightValue => reg.schedule().m(w)?.to_usize().ok_or_else(|| Error::SearchExhausted(format!("m_{w} too large")))?,
        };
        let src = &mut sources[i % sources.len()];
        let mut blocks = Vec::with_capacity(a);
        let mut after = prev.max(w as u32);
        for _ in 0..a {
            let b = src.next_block(reg, after)?;
            after = b.range(reg)?.expect("nonzero block").1 + 1;
            blocks.push(b);
        }
        let js = ris_indices(reg, &blocks)?;
        let c = ris_constant(reg, &blocks, &js, top_stage(reg))?;
        let pair = make_exact_pair(reg, &blocks, w / 2, eps, None, &c)?;
        let eta = pair.gamma;
        let p = reg.rank(eta)? + 1;
        let xi = match rec.xis.last() {
            None => reg.intern(Draft::type1(p, odd, Func::unit(eta)))?,
            Some(x) => reg.intern(Draft::type2(p, *x, odd, Func::unit(eta)))?,
        };
        prev = p;
        rec.cuts.push(p);
        rec.xis.push(xi);
        rec.etas.push(eta);
        rec.points.push(pair.x);
        rec.targets.push(w);
        rec.thetas.push(pair.theta);
        rec.pair_reports.push(pair.report);
        rec.ris_constants.push(c);
        rec.sources.push(src.name());
        rec.inner.push(a);
    }
    Ok(rec)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependentSequenceCheck {
    pub ranges: bool,
    pub chain: bool,
    pub first_pair: bool,
    pub later_pairs: bool,
    /// `Σ_{i≤s} x_i(ξ_s) = s·ε/m_{2j0-1}` for every `s`.
    pub partial_sums: bool,
    pub partial_values: Vec<Q>,
}

impl DependentSequenceCheck {
    pub fn holds(&self) -> bool {
        self.ranges && self.chain && self.first_pair && self.later_pairs && self.partial_sums
    }
}

/// Re-derives every structural clause of a dependent sequence from the registry.
pub fn check_dependent_sequence(reg: &Registry, rec: &DependentSequenceRecord) -> Result<DependentSequenceCheck> {
    let odd = 2 * rec.j0 - 1;
    let mut ranges = true;
    let mut prev = 0;
    for (x, &p) in rec.points.iter().zip(&rec.cuts) {
        match x.range(reg)? {
            Some((lo, hi)) => ranges &= prev < lo && hi < p,
            None => ranges = false,
        }
        prev = p;
    }
    let last = *rec.xis.last().ok_or_else(|| Error::InvalidArgument("empty record".into()))?;
    let rows = evaluation_analysis(reg, last)?;
    let chain = reg.weight_index(last)? == Some(odd)
        && rows.len() == rec.len()
        && rows.iter().enumerate().all(|(i, r)| r.cut == rec.cuts[i] && r.node == rec.xis[i] && r.payload == Func::unit(rec.etas[i]));
    let epsq = Q::from_integer(rec.eps.into());
    let pair_ok = |i: usize, w: usize| -> Result<bool> {
        Ok(reg.weight_index(rec.etas[i])? == Some(w) && eval(reg, &rec.points[i], rec.etas[i])? == epsq)
    };
    let w1 = reg.weight_index(rec.etas[0])?.unwrap_or(0);
    let guard = {
        let rec1 = reg.record(rec.xis[0])?;
        let n = reg.schedule().n(odd)?;
        *reg.schedule().m(w1)? > n * n || rec1.guard_waived
    };
    let first_pair = w1 % 4 == 2 && guard && pair_ok(0, w1)?;
    let mut later_pairs = true;
    for i in 1..rec.len() {
        let w = 4 * reg.sigma(rec.xis[i - 1])? as usize;
        later_pairs &= pair_ok(i, w)?;
    }
    let mut partial_values = Vec::with_capacity(rec.len());
    let mut partial_sums = true;
    let inv_m = weight(reg, odd)?;
    for s in 0..rec.len() {
        let total = Point::sum(&rec.points[..=s]);
        let v = eval(reg, &total, rec.xis[s])?;
        partial_sums &= v == qi(s as i64 + 1) * &epsq * &inv_m;
        partial_values.push(v);
    }
    Ok(DependentSequenceCheck { ranges, chain, first_pair, later_pairs, partial_sums, partial_values })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlternatingReport {
    pub stage: u32,
    /// `max_{γ', J} |Σ_{i∈J} (-1)^i x_i(γ')|` over `γ'` of weight `m_{2j0-1}`.
    pub max_interval_sum: Q,
    pub plain_average_norm: Q,
    pub alternating_average_norm: Q,
    /// `n^{-1} Σ x_i(ξ_n)`.
    pub xi_witness: Q,
    pub constant: Q,
    pub m: Q,
}

impl AlternatingReport {
    pub fn certificates(&self, reg: &Registry, rec: &DependentSequenceRecord) -> Vec<Certificate> {
        let inputs = rec.to_json();
        let admissible = reg.schedule().mode() == Mode::Admissible
            && BigUint::from(rec.len()) == *reg.schedule().n(2 * rec.j0 - 1).expect("in schedule");
        let c = &self.constant;
        let m2 = &self.m * &self.m;
        let plus_minus = qi(4) * c;
        let alt_bound = if rec.eps == 1 { qi(12) * c / &m2 } else { qi(4) * c / &m2 };
        let inv_m = one() / &self.m;
        let witness_expected = if rec.eps == 1 { inv_m.clone() } else { Q::zero() };
        vec![
            Certificate::new("alternating-intervals", "|sum_J (-1)^i x_i(g')| <= 4C", reg, self.stage, &inputs)
                .value("measured", &self.max_interval_sum)
                .value("predicted", &plus_minus)
                .verdict(Verdict::of(self.max_interval_sum <= plus_minus, admissible)),
            Certificate::new("alternating-average", "||n^-1 sum (-1)^i x_i|| small against m^-2", reg, self.stage, &inputs)
                .value("measured_lower", &self.alternating_average_norm)
                .value("predicted", &alt_bound)
                .verdict(Verdict::of(self.alternating_average_norm <= alt_bound, admissible)),
            Certificate::new("plain-average-witness", "n^-1 sum x_i(xi_n) = eps m^-1", reg, self.stage, &inputs)
                .value("xi_witness", &self.xi_witness)
                .value("plain_lower", &self.plain_average_norm)
                .value("inv_m", &inv_m)
                .verdict(Verdict::of(self.xi_witness == witness_expected && self.plain_average_norm >= self.xi_witness, true)),
        ]
    }
}

pub fn alternating_report(reg: &Registry, rec: &DependentSequenceRecord, n: u32) -> Result<AlternatingReport> {
    if rec.is_empty() {
        return Err(Error::InvalidArgument("empty record".into()));
    }
    crate::engine::check_stage(reg, n)?;
    let needed = *rec.cuts.last().expect("nonempty");
    if n < needed {
        return Err(Error::StageOverflow { requested: needed, available: n });
    }
    let odd = 2 * rec.j0 - 1;
    let vals = rec.points.iter().map(|x| values(reg, x, n)).collect::<Result<Vec<_>>>()?;
    let mut max_interval_sum = Q::zero();
    for g in reg.gamma_upto(n) {
        if reg.weight_index(g)? != Some(odd) {
            continue;
        }
        let mut acc = Q::zero();
        let (mut lo, mut hi) = (Q::zero(), Q::zero());
        for (i, v) in vals.iter().enumerate() {
            let x = v.get(&g).cloned().unwrap_or_else(Q::zero);
            if i % 2 == 0 {
                acc -= x;
            } else {
                acc += x;
            }
            lo = lo.min(acc.clone());
            hi = hi.max(acc.clone());
        }
        let spread = hi - lo;
        if spread > max_interval_sum {
            max_interval_sum = spread;
        }
    }
    let nq = one() / qi(rec.len() as i64);
    let plain = Point::sum(&rec.points).scaled(&nq);
    let mut alt = Point::zero();
    for (i, x) in rec.points.iter().enumerate() {
        alt.add_scaled(x, &if i % 2 == 0 { -nq.clone() } else { nq.clone() });
    }
    let xi_witness = eval(reg, &plain, *rec.xis.last().expect("nonempty"))?;
    Ok(AlternatingReport {
        stage: n,
        max_interval_sum,
        plain_average_norm: sup_abs(reg, &plain, n)?.0,
        alternating_average_norm: sup_abs(reg, &alt, n)?.0,
        xi_witness,
        constant: rec.constant(),
        m: m_value(reg, odd)?,
    })
}

#[derive(Debug, Clone)]
pub struct HIProbeReport {
    pub record: DependentSequenceRecord,
    pub stage: u32,
    /// `(y + z)(ξ_n)`.
    pub sum_witness: Q,
    pub expected_witness: Q,
    pub difference: NormInterval,
}

impl HIProbeReport {
    pub fn ratio(&self) -> Q {
        &self.difference.lower / &self.sum_witness
    }

    pub fn direction(&self) -> bool {
        self.difference.lower < self.sum_witness
    }

    pub fn certificates(&self, reg: &Registry) -> Vec<Certificate> {
        let inputs = self.record.to_json();
        let c = self.record.constant();
        let m = m_value(reg, 2 * self.record.j0 - 1).expect("in schedule");
        let predicted = qi(12) * &c / (&m * &m) * qi(self.record.len() as i64);
        vec![
            Certificate::new("hi-sum-witness", "(y+z)(xi_n) = n m^-1", reg, self.stage, &inputs)
                .value("witness", &self.sum_witness)
                .value("expected", &self.expected_witness)
                .verdict(Verdict::of(self.sum_witness == self.expected_witness, true)),
            Certificate::new("hi-direction", "||y-z|| below (y+z)(xi_n) at stage N", reg, self.stage, &inputs)
                .value("difference_lower", &self.difference.lower)
                .value("difference_upper", &self.difference.upper)
                .value("sum_witness", &self.sum_witness)
                .value("ratio", &self.ratio())
                .verdict(Verdict::of(self.direction(), false)),
            Certificate::new("hi-difference-bound", "||y-z|| <= 12 C n m^-2", reg, self.stage, &inputs)
                .value("difference_lower", &self.difference.lower)
                .value("predicted", &predicted)
                .verdict(Verdict::of(self.difference.lower <= predicted, reg.schedule().mode() == Mode::Admissible)),
        ]
    }
}

/// `y = Σ_{i odd} x_i`, `z = Σ_{i even} x_i` from an alternating dependent sequence with `ε = 1`.
pub fn hi_probe(
    reg: &mut Registry,
    y: &mut dyn BlockSource,
    z: &mut dyn BlockSource,
    j0: usize,
    len: usize,
    inner: InnerLength,
) -> Result<HIProbeReport> {
    let record = make_dependent_sequence(reg, j0, &mut [y, z], 1, len, inner)?;
    let mut ysum = Point::zero();
    let mut zsum = Point::zero();
    for (i, x) in record.points.iter().enumerate() {
        if i % 2 == 0 {
            ysum.add_scaled(x, &one());
        } else {
            zsum.add_scaled(x, &one());
        }
    }
    let stage = top_stage(reg);
    let last = *record.xis.last().expect("nonempty");
    let sum_witness = eval(reg, &ysum.plus(&zsum), last)?;
    let expected_witness = qi(len as i64) * weight(reg, 2 * j0 - 1)?;
    let difference = sup_norm_interval(reg, &ysum.minus(&zsum), stage)?;
    Ok(HIProbeReport { record, stage, sum_witness, expected_witness, difference })
}

#[derive(Debug, Clone)]
pub struct BasicInequality {
    /// Zero-based index `k_0`.
    pub k0: usize,
    /// Leaves are one-based block indices.
    pub tree: Option<NormingTree>,
    pub lhs: Q,
    pub rhs: Q,
    pub constant: Q,
    pub tree_check: std::result::Result<(), String>,
    pub support_ok: bool,
    pub stage: u32,
}

impl BasicInequality {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs && self.tree_check.is_ok() && self.support_ok
    }

    pub fn certificate(&self, reg: &Registry, inputs: &Value) -> Certificate {
        Certificate::new("basic-inequality", "|<e*_g, P_(s,inf) sum l_k x_k>| <= 5C|l_k0| + 5C g*(|l|)", reg, self.stage, inputs)
            .value("lhs", &self.lhs)
            .value("rhs", &self.rhs)
            .value("C", &self.constant)
            .count("k0", self.k0 as u64 + 1)
            .count("tree_ok", self.tree_check.is_ok() as u64)
            .verdict(Verdict::of(self.holds(), true))
    }
}

struct Witness<'a> {
    reg: &'a Registry,
    xs: &'a [Point],
    lam: &'a [Q],
    js: &'a [usize],
    ranges: Vec<(u32, u32)>,
    j0: Option<usize>,
}

impl Witness<'_> {
    fn combo(&self, lo: usize, hi: usize) -> Point {
        let mut p = Point::zero();
        for k in lo..=hi {
            p.add_scaled(&self.xs[k], &self.lam[k]);
        }
        p
    }

    fn run(&self, lo: usize, hi: usize, s: u32, g: GammaId) -> Result<(usize, Option<NormingTree>)> {
        let rec = self.reg.record(g)?;
        if rec.kind == Kind::Base {
            return Ok((lo, None));
        }
        let h = rec.weight_index.expect("weighted");
        if self.j0 == Some(h) {
            return Ok(match (lo..=hi).find(|&k| self.ranges[k].1 > s) {
                Some(l) => (argmax_abs(self.lam, l, hi), None),
                None => (lo, None),
            });
        }
        let l = (lo..=hi).rev().find(|&k| self.js[k] <= h).unwrap_or(lo);
        let k0 = argmax_abs(self.lam, lo, l);
        let rows = evaluation_analysis(self.reg, g)?;
        let cuts: Vec<u32> = rows.iter().map(|r| r.cut).collect();
        let mut leaves = Vec::new();
        let mut groups: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
        for k in l + 1..=hi {
            let (a, b) = self.ranges[k];
            if b <= s {
                continue;
            }
            let a = a.max(s + 1);
            if cuts.iter().any(|&p| a <= p && p <= b) {
                leaves.push(k);
                continue;
            }
            if let Some(r) = cuts.iter().position(|&p| b < p) {
                let e = groups.entry(r).or_insert((k, k));
                e.1 = k;
            }
        }
        let mut children: Vec<NormingTree> = leaves.iter().map(|&k| NormingTree::Leaf { sign: 1, k: k as u64 + 1 }).collect();
        for (r, (a, b)) in groups {
            let sr = s.max(if r == 0 { 0 } else { cuts[r - 1] });
            let v = self.combo(a, b);
            let mut best: Option<(GammaId, Q)> = None;
            for eta in rows[r].payload.support() {
                let val = eval_after_projection(self.reg, eta, sr, &v)?.abs();
                if best.as_ref().is_none_or(|(_, bv)| val > *bv) {
                    best = Some((eta, val));
                }
            }
            let Some((eta, val)) = best else { continue };
            if val.is_zero() {
                continue;
            }
            let (kr, sub) = self.run(a, b, sr, eta)?;
            children.push(NormingTree::Leaf { sign: 1, k: kr as u64 + 1 });
            if let Some(t) = sub {
                children.push(t);
            }
        }
        children.sort_by_key(|c| c.support().0);
        let tree = (!children.is_empty()).then_some(NormingTree::Node { j: h, children });
        Ok((k0, tree))
    }
}

/// Checks `|⟨e*_ξ, Σ_{k∈J} λ_k x_k⟩| ≤ 2C max_J |λ_k|` for all `ξ` of weight `m_{j0}` and intervals `J`.
pub fn exclusion_hypothesis(reg: &Registry, xs: &[Point], lam: &[Q], c: &Q, j0: usize, n: u32) -> Result<bool> {
    let vals = xs.iter().map(|x| values(reg, x, n)).collect::<Result<Vec<_>>>()?;
    for g in reg.gamma_upto(n) {
        if reg.weight_index(g)? != Some(j0) {
            continue;
        }
        let col: Vec<Q> = vals.iter().zip(lam).map(|(v, l)| v.get(&g).cloned().unwrap_or_else(Q::zero) * l).collect();
        for a in 0..col.len() {
            let mut acc = Q::zero();
            let mut mx = Q::zero();
            for b in a..col.len() {
                acc += &col[b];
                mx = mx.max(lam[b].abs());
                if acc.abs() > qi(2) * c * &mx {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Produces `k_0` and `g*` by the inductive splitting over the evaluation analysis of `γ`
/// and checks the resulting inequality exactly.
pub fn basic_inequality_witness(
    reg: &Registry,
    xs: &[Point],
    lam: &[Q],
    s: u32,
    gamma: GammaId,
    j0: Option<usize>,
    c: &Q,
    js: &[usize],
) -> Result<BasicInequality> {
    if xs.is_empty() || lam.len() != xs.len() {
        return Err(Error::InvalidArgument("need one coefficient per block".into()));
    }
    reg.record(gamma)?;
    let n = top_stage(reg);
    let cert = check_ris(reg, xs, c, js, n)?;
    if !cert.holds() {
        return Err(Error::NotCertifiedRIS(cert.to_json().to_string()));
    }
    if let Some(j) = j0 {
        if !exclusion_hypothesis(reg, xs, lam, c, j, n)? {
            return Err(Error::InvalidArgument(format!("interval hypothesis fails for weight index {j}")));
        }
    }
    let w = Witness { reg, xs, lam, js, ranges: block_ranges(reg, xs)?, j0 };
    let (k0, tree) = w.run(0, xs.len() - 1, s, gamma)?;
    let lhs = eval_after_projection(reg, gamma, s, &w.combo(0, xs.len() - 1))?.abs();
    let abs: BTreeMap<u64, Q> = lam.iter().enumerate().map(|(k, l)| (k as u64 + 1, l.abs())).collect();
    let mut params = MTParams::from_schedule(reg.schedule(), 3)?;
    if let Some(j) = j0 {
        params = params.excluding(j);
    }
    let five_c = qi(5) * c;
    let mut rhs = &five_c * lam[k0].abs();
    let (tree_check, support_ok) = match &tree {
        None => (Ok(()), true),
        Some(t) => {
            let check = verify_norming_tree(t, &params);
            if let Some(v) = t.eval(&abs, &params) {
                rhs += &five_c * v;
            }
            (check, t.support().0 > k0 as u64 + 1)
        }
    };
    Ok(BasicInequality { k0, tree, lhs, rhs, constant: c.clone(), tree_check, support_ok, stage: n })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightClassRow {
    pub h: usize,
    pub measured: Q,
    pub predicted: Q,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RISAverageReport {
    pub j0: usize,
    pub stage: u32,
    pub rows: Vec<WeightClassRow>,
    /// Stage-`N` lower norm of the average.
    pub norm_lower: Q,
    /// Whether the quoted prerequisites hold so that bounds are asserted.
    pub asserted: bool,
}

impl RISAverageReport {
    pub fn holds(&self) -> bool {
        self.rows.iter().all(|r| r.measured <= r.predicted)
    }

    pub fn certificate(&self, reg: &Registry, inputs: &Value) -> Certificate {
        let worst = self.rows.iter().map(|r| &r.measured / &r.predicted).max().unwrap_or_else(Q::zero);
        Certificate::new("ris-average", "weight-class bounds for n^-1 sum l_k x_k(g)", reg, self.stage, inputs)
            .value("norm_lower", &self.norm_lower)
            .value("worst_ratio", &worst)
            .count("classes", self.rows.len() as u64)
            .verdict(Verdict::of(self.holds(), self.asserted))
    }
}

/// `|n^{-1} Σ λ_k x_k(γ)|` grouped by the weight index of `γ`, against the class bounds.
pub fn ris_average_report(
    reg: &Registry,
    xs: &[Point],
    j0: usize,
    lambdas: Option<&[Q]>,
    c: &Q,
    js: &[usize],
    n: u32,
) -> Result<RISAverageReport> {
    let cert = check_ris(reg, xs, c, js, n)?;
    if !cert.holds() {
        return Err(Error::NotCertifiedRIS(cert.to_json().to_string()));
    }
    let len = xs.len().max(1);
    let nq = one() / qi(len as i64);
    let lam: Vec<Q> = match lambdas {
        Some(l) => l.to_vec(),
        None => vec![one(); xs.len()],
    };
    let mut avg = Point::zero();
    for (x, l) in xs.iter().zip(&lam) {
        avg.add_scaled(x, &(l * &nq));
    }
    let vals = values(reg, &avg, n)?;
    let mj0 = m_value(reg, j0)?;
    let mut best: BTreeMap<usize, Q> = BTreeMap::new();
    for (g, v) in &vals {
        if let Some(h) = reg.weight_index(*g)? {
            let e = best.entry(h).or_insert_with(Q::zero);
            if v.abs() > *e {
                *e = v.abs();
            }
        }
    }
    let mut rows = Vec::new();
    for (h, measured) in best {
        let mh = m_value(reg, h)?;
        let predicted = if lambdas.is_some() {
            if h < j0 {
                qi(5) * c * &nq + qi(10) * c / (&mj0 * &mj0 * &mh)
            } else {
                qi(5) * c * &nq + qi(5) * c / &mh
            }
        } else if h < j0 {
            qi(11) * c / (&mj0 * &mh)
        } else {
            qi(5) * c * &nq + qi(5) * c / &mh
        };
        rows.push(WeightClassRow { h, measured, predicted });
    }
    let s = reg.schedule();
    let asserted = s.mode() == Mode::Admissible
        && BigUint::from(xs.len()) == *s.n(j0)?
        && q_from_uint(s.n(j0)?) > qi(5) * &mj0 * &mj0;
    let norm_lower = vals.values().map(Signed::abs).max().unwrap_or_else(Q::zero);
    Ok(RISAverageReport { j0, stage: n, rows, norm_lower, asserted })
}

/// Draws `n` coefficients from `{±1, ±1/2}`.
pub fn random_coefficients(rng: &mut impl Rng, n: usize) -> Vec<Q> {
    (0..n)
        .map(|_| {
            let c = [q(1, 1), q(-1, 1), q(1, 2), q(-1, 2)];
            c[rng.gen_range(0..4)].clone()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry::{OddGuard, Which};
    use crate::schedule::ParameterSchedule;

    fn forging(len: usize) -> Registry {
        let mut reg = Registry::new(ParameterSchedule::toy_linear(len), Which::XK, OddGuard::Enforce);
        base_element(&mut reg).unwrap();
        reg
    }

    fn blocks(reg: &mut Registry, src: &mut ForgedBlocks, a: usize, after: u32) -> Vec<Point> {
        let mut out = Vec::new();
        let mut after = after;
        for _ in 0..a {
            let b = src.next_block(reg, after).unwrap();
            after = b.range(reg).unwrap().unwrap().1 + 1;
            out.push(b);
        }
        out
    }

    #[test]
    fn ris_condition_two_fails() {
        let mut reg = forging(16);
        let mut src = ForgedBlocks::new(1, 2, 1);
        let xs = blocks(&mut reg, &mut src, 2, 1);
        let n = top_stage(&reg);
        let r = xs[0].range(&reg).unwrap().unwrap().1 as usize;
        let cert = check_ris(&reg, &xs, &qi(10), &[1, r], n).unwrap();
        assert!(!cert.increasing);
        let cert = check_ris(&reg, &xs[..1], &qi(10), &[1], n).unwrap();
        assert!(cert.increasing && cert.decay);
    }

    #[test]
    fn lower_estimate_single_block() {
        let mut reg = forging(16);
        let mut src = ForgedBlocks::new(3, 2, 2);
        let xs = blocks(&mut reg, &mut src, 1, 3);
        let le = lower_estimate_witness(&mut reg, &xs, 2).unwrap();
        assert!(le.identity && le.window_max);
        assert_eq!(le.lhs, weight(&reg, 4).unwrap() * &le.maxabs[0]);
    }

    #[test]
    fn split_is_additive() {
        let mut reg = forging(16);
        let mut src = ForgedBlocks::new(5, 2, 3);
        let x = blocks(&mut reg, &mut src, 1, 4).remove(0);
        let n = top_stage(&reg);
        let (y, z) = split_by_local_weight(&reg, &x, 1, n).unwrap();
        assert_eq!(y.plus(&z).d_coords(), x.d_coords());
        assert!(y.is_zero());
        let (y, z) = split_by_local_weight(&reg, &x, 2, n).unwrap();
        assert_eq!(y.d_coords(), x.d_coords());
        assert!(z.is_zero());
    }

    #[test]
    fn exact_pairs_both_parities() {
        let mut reg = forging(32);
        let mut src = ForgedBlocks::new(9, 2, 1);
        let xs = blocks(&mut reg, &mut src, 3, 6);
        let one_pair = make_exact_pair(&mut reg, &xs, 3, 1, None, &one()).unwrap();
        assert_eq!(one_pair.report.value_at_gamma, one());
        let mut src = ForgedBlocks::new(10, 2, 1);
        let top = top_stage(&reg);
        let zs = blocks(&mut reg, &mut src, 3, top);
        let zero_pair = make_exact_pair(&mut reg, &zs, 3, 0, None, &one()).unwrap();
        assert!(zero_pair.report.value_at_gamma.is_zero());
        assert!(make_exact_pair(&mut reg, &zs, 3, 2, None, &one()).is_err());
    }

    #[test]
    fn dependent_sequence_length_one() {
        let mut reg = forging(128);
        let mut src = ForgedBlocks::new(2, 2, 1);
        let rec = make_dependent_sequence(&mut reg, 1, &mut [&mut src], 1, 1, InnerLength::Fixed(2)).unwrap();
        assert_eq!(rec.len(), 1);
        assert_eq!(reg.record(rec.xis[0]).unwrap().kind, Kind::Type1);
        assert!(check_dependent_sequence(&reg, &rec).unwrap().holds());
    }

    #[test]
    fn classification() {
        let mut reg = forging(16);
        let mut src = ForgedBlocks::new(4, 2, 1);
        let xs = blocks(&mut reg, &mut src, 3, 2);
        let n = top_stage(&reg);
        assert!(matches!(classify_local_weight(&reg, &xs, None, n).unwrap(), LocalWeightClass::Bounded { j1: 2, .. }));
        assert_eq!(classify_local_weight(&reg, &xs, Some(1), n).unwrap(), LocalWeightClass::Neither);
    }
}
