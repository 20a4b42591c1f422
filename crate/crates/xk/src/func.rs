//! Finitely supported exact-rational functionals on Γ.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::rational::{fmt_q, parse_q, Q};
use crate::registry::GammaId;

/// A sparse vector in `ℓ1(Γ)`. Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Func {
    entries: BTreeMap<GammaId, Q>,
}

impl Func {
    pub fn zero() -> Self {
        Func::default()
    }

    pub fn unit(g: GammaId) -> Self {
        Self::single(g, Q::from_integer(1.into()))
    }

    pub fn single(g: GammaId, c: Q) -> Self {
        let mut f = Func::zero();
        f.add(g, &c);
        f
    }

    pub fn from_pairs<I: IntoIterator<Item = (GammaId, Q)>>(it: I) -> Self {
        let mut f = Func::zero();
        for (g, c) in it {
            f.add(g, &c);
        }
        f
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, g: GammaId) -> Q {
        self.entries.get(&g).cloned().unwrap_or_else(Q::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&GammaId, &Q)> {
        self.entries.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = GammaId> + '_ {
        self.entries.keys().copied()
    }

    pub fn entries(&self) -> &BTreeMap<GammaId, Q> {
        &self.entries
    }

    pub fn add(&mut self, g: GammaId, c: &Q) {
        if c.is_zero() {
            return;
        }
        let slot = self.entries.entry(g).or_insert_with(Q::zero);
        *slot += c;
        if slot.is_zero() {
            self.entries.remove(&g);
        }
    }

    pub fn add_scaled(&mut self, other: &Func, c: &Q) {
        if c.is_zero() {
            return;
        }
        for (g, v) in &other.entries {
            self.add(*g, &(v * c));
        }
    }

    pub fn plus(&self, other: &Func) -> Func {
        let mut f = self.clone();
        f.add_scaled(other, &Q::from_integer(1.into()));
        f
    }

    pub fn minus(&self, other: &Func) -> Func {
        let mut f = self.clone();
        f.add_scaled(other, &Q::from_integer((-1).into()));
        f
    }

    pub fn scaled(&self, c: &Q) -> Func {
        let mut f = Func::zero();
        f.add_scaled(self, c);
        f
    }

    pub fn l1(&self) -> Q {
        self.entries.values().fold(Q::zero(), |acc, v| acc + v.abs())
    }

    /// `Σ f(γ) u(γ)` against a coordinate map.
    pub fn dot(&self, u: &BTreeMap<GammaId, Q>) -> Q {
        let mut acc = Q::zero();
        if self.entries.len() <= u.len() {
            for (g, v) in &self.entries {
                if let Some(w) = u.get(g) {
                    acc += v * w;
                }
            }
        } else {
            for (g, w) in u {
                if let Some(v) = self.entries.get(g) {
                    acc += v * w;
                }
            }
        }
        acc
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.entries
                .iter()
                .map(|(g, c)| json!([g.0, fmt_q(c)]))
                .collect(),
        )
    }

    /// Reads `[[id, "p/q"], ...]`.
    pub fn from_json(v: &Value) -> Result<Func> {
        let arr = v.as_array().ok_or_else(|| Error::Parse("functional must be an array".into()))?;
        let mut f = Func::zero();
        for item in arr {
            let pair = item.as_array().filter(|p| p.len() == 2);
            let pair = pair.ok_or_else(|| Error::Parse(format!("bad entry {item}")))?;
            let id = pair[0].as_u64().ok_or_else(|| Error::Parse(format!("bad id {}", pair[0])))?;
            let c = match &pair[1] {
                Value::String(s) => parse_q(s)?,
                Value::Number(n) => parse_q(&n.to_string())?,
                other => return Err(Error::Parse(format!("bad coefficient {other}"))),
            };
            f.add(GammaId(id as u32), &c);
        }
        Ok(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn no_zero_entries() {
        let mut f = Func::single(GammaId(1), q(1, 2));
        f.add(GammaId(1), &q(-1, 2));
        assert!(f.is_zero());
        f.add(GammaId(2), &Q::zero());
        assert!(f.is_zero());
    }

    #[test]
    fn l1_and_dot() {
        let f = Func::from_pairs([(GammaId(0), q(1, 2)), (GammaId(3), q(-1, 3))]);
        assert_eq!(f.l1(), q(5, 6));
        let u: BTreeMap<_, _> = [(GammaId(3), q(3, 1)), (GammaId(4), q(9, 1))].into();
        assert_eq!(f.dot(&u), q(-1, 1));
    }

    #[test]
    fn json_round_trip() {
        let f = Func::from_pairs([(GammaId(0), q(1, 2)), (GammaId(7), q(-4, 3))]);
        assert_eq!(Func::from_json(&f.to_json()).unwrap(), f);
    }
}
