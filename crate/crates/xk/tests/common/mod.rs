#![allow(dead_code)]

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use xk::norms::MTParams;
use xk::{GammaId, Q, Registry};

/// Recursive mixed Tsirelson norm over contiguous groupings of the support.
pub fn mt_recursive(x: &BTreeMap<u64, Q>, params: &MTParams) -> Q {
    let vals: Vec<Q> = x.values().cloned().collect();
    let mut memo = BTreeMap::new();
    go(&vals, 0, vals.len(), params, &mut memo)
}

fn go(v: &[Q], a: usize, b: usize, p: &MTParams, memo: &mut BTreeMap<(usize, usize), Q>) -> Q {
    if let Some(r) = memo.get(&(a, b)) {
        return r.clone();
    }
    let mut best = v[a..b].iter().map(|c| c.abs()).max().unwrap_or_else(Q::zero);
    for lvl in p.levels() {
        if p.excluded() == Some(lvl.j) {
            continue;
        }
        let pieces = (lvl.l as usize).min(b - a);
        for k in 2..=pieces {
            let s = split(v, a, b, k, p, memo);
            let cand = &lvl.theta * s;
            if cand > best {
                best = cand;
            }
        }
    }
    memo.insert((a, b), best.clone());
    best
}

/// Best sum of norms over splits of `[a, b)` into exactly `k` nonempty intervals.
fn split(v: &[Q], a: usize, b: usize, k: usize, p: &MTParams, memo: &mut BTreeMap<(usize, usize), Q>) -> Q {
    if k == 1 {
        return go(v, a, b, p, memo);
    }
    let mut best = Q::zero();
    for c in a + 1..=b - (k - 1) {
        let s = go(v, a, c, p, memo) + split(v, c, b, k - 1, p, memo);
        if s > best {
            best = s;
        }
    }
    best
}

/// Inverse of `I - C` by Gauss-Jordan elimination on dense rational rows.
pub fn dense_inverse(reg: &Registry, ids: &[GammaId]) -> Vec<Vec<Q>> {
    let n = ids.len();
    let pos: BTreeMap<GammaId, usize> = ids.iter().enumerate().map(|(i, g)| (*g, i)).collect();
    let mut a = vec![vec![Q::zero(); 2 * n]; n];
    for (i, g) in ids.iter().enumerate() {
        a[i][i] = Q::from_integer(1.into());
        a[i][n + i] = Q::from_integer(1.into());
        for (h, c) in reg.c_star(*g).expect("known").iter() {
            a[i][pos[h]] -= c;
        }
    }
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero()).expect("invertible");
        a.swap(col, piv);
        let inv = a[col][col].recip();
        for x in a[col].iter_mut() {
            *x *= &inv;
        }
        let prow = a[col].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r == col || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (x, p) in row.iter_mut().zip(prow.iter()) {
                if !p.is_zero() {
                    *x -= &f * p;
                }
            }
        }
    }
    a.into_iter().map(|row| row[n..].to_vec()).collect()
}

/// Number of integer points `c ∈ ℤ^w` with `Σ|c_i| ≤ d`.
pub fn l1_lattice_count(w: usize, d: usize) -> u128 {
    let mut ways = vec![0u128; d + 1];
    ways[0] = 1;
    for _ in 0..w {
        let mut next = vec![0u128; d + 1];
        for (r, &cnt) in ways.iter().enumerate() {
            if cnt == 0 {
                continue;
            }
            next[r] += cnt;
            for c in 1..=d - r {
                next[r + c] += 2 * cnt;
            }
        }
        ways = next;
    }
    ways.iter().sum()
}
