//! Parameter schedules `(m_j, n_j)`.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::rational::{fmt_q, one, qi, recip_uint, Q};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    Admissible,
    Toy,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Admissible => "admissible",
            Mode::Toy => "toy",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParameterSchedule {
    m: Vec<BigUint>,
    n: Vec<BigUint>,
    mode: Mode,
    theta: Q,
    big_m: Q,
}

/// Checks `n_{j+1} >= m_{j+1}^2 (4 n_j)^(2^(j+1))` without expanding hopeless powers.
fn growth_ok(j: usize, m_next: &BigUint, n_prev: &BigUint, n_next: &BigUint) -> bool {
    let four_n = n_prev * 4u32;
    let b4 = four_n.bits() as u128;
    let bm = m_next.bits() as u128;
    let bn = n_next.bits() as u128;
    if j + 1 >= 100 {
        return false;
    }
    let e = 1u128 << (j + 1);
    let lower = 2 * (bm - 1) + e.saturating_mul(b4 - 1);
    if lower >= bn {
        return false;
    }
    let rhs = m_next * m_next * four_n.pow(e as u32);
    *n_next >= rhs
}

impl ParameterSchedule {
    pub fn validate(m: Vec<BigUint>, n: Vec<BigUint>) -> Result<Self> {
        if m.is_empty() || m.len() != n.len() {
            return Err(Error::ScheduleViolation(format!(
                "m and n must be nonempty and of equal length (got {} and {})",
                m.len(),
                n.len()
            )));
        }
        if m.iter().chain(n.iter()).any(|v| v.is_zero()) {
            return Err(Error::ScheduleViolation("entries must be at least 1".into()));
        }
        if m[0] < BigUint::from(4u32) {
            return Err(Error::ScheduleViolation(format!("m_1 = {} < 4", m[0])));
        }
        if let Some(j) = (1..m.len()).find(|&j| m[j] <= m[j - 1]) {
            return Err(Error::ScheduleViolation(format!(
                "m not strictly increasing at index {}",
                j + 1
            )));
        }
        let admissible = (1..m.len()).all(|j| {
            m[j] >= &m[j - 1] * &m[j - 1] && growth_ok(j, &m[j], &n[j - 1], &n[j])
        });
        let theta = recip_uint(&m[0]);
        let big_m = one() / (one() - qi(2) * &theta);
        Ok(ParameterSchedule {
            m,
            n,
            mode: if admissible { Mode::Admissible } else { Mode::Toy },
            theta,
            big_m,
        })
    }

    pub fn from_u64(m: &[u64], n: &[u64]) -> Result<Self> {
        Self::validate(
            m.iter().map(|&v| BigUint::from(v)).collect(),
            n.iter().map(|&v| BigUint::from(v)).collect(),
        )
    }

    /// `m_j = j + 3`, `n_j = j + 4`.
    pub fn toy_linear(len: usize) -> Self {
        let m: Vec<u64> = (1..=len as u64).map(|j| j + 3).collect();
        let n: Vec<u64> = (1..=len as u64).map(|j| j + 4).collect();
        Self::from_u64(&m, &n).expect("linear toy schedule is valid")
    }

    /// `m_j = 4^j`, `n_j = 4^j`.
    pub fn toy_power(len: usize) -> Self {
        let v: Vec<BigUint> = (1..=len as u32).map(|j| BigUint::from(4u32).pow(j)).collect();
        Self::validate(v.clone(), v).expect("power toy schedule is valid")
    }

    /// Four weights with ages capped so that the full `X_K` stage 6 stays small.
    pub fn toy_small() -> Self {
        Self::from_u64(&[4, 16, 64, 256], &[4, 1, 4, 2]).expect("valid")
    }

    pub fn len(&self) -> usize {
        self.m.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m.is_empty()
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn theta(&self) -> &Q {
        &self.theta
    }

    /// Basis constant bound `1 / (1 - 2 theta)`.
    pub fn big_m(&self) -> &Q {
        &self.big_m
    }

    fn check(&self, j: usize) -> Result<()> {
        if j == 0 || j > self.len() {
            Err(Error::IndexOutOfSchedule { index: j, len: self.len() })
        } else {
            Ok(())
        }
    }

    pub fn has(&self, j: usize) -> bool {
        j >= 1 && j <= self.len()
    }

    pub fn m(&self, j: usize) -> Result<&BigUint> {
        self.check(j)?;
        Ok(&self.m[j - 1])
    }

    pub fn n(&self, j: usize) -> Result<&BigUint> {
        self.check(j)?;
        Ok(&self.n[j - 1])
    }

    /// `n_j` as a machine integer, saturating.
    pub fn n_u64(&self, j: usize) -> Result<u64> {
        Ok(self.n(j)?.to_u64().unwrap_or(u64::MAX))
    }

    /// Exactly `1 / m_j`.
    pub fn weight_value(&self, j: usize) -> Result<Q> {
        Ok(recip_uint(self.m(j)?))
    }

    pub fn m_values(&self) -> &[BigUint] {
        &self.m
    }

    pub fn n_values(&self) -> &[BigUint] {
        &self.n
    }

    /// The schedule `(m_{l_j}, n_{l_j})` for strictly increasing 1-based indices `l`.
    pub fn subsequence(&self, l: &[usize]) -> Result<Self> {
        if l.is_empty() {
            return Err(Error::InvalidArgument("empty index list".into()));
        }
        for (i, &j) in l.iter().enumerate() {
            self.check(j)?;
            if i > 0 && j <= l[i - 1] {
                return Err(Error::InvalidArgument("indices must be strictly increasing".into()));
            }
        }
        let sub = Self::validate(
            l.iter().map(|&j| self.m[j - 1].clone()).collect(),
            l.iter().map(|&j| self.n[j - 1].clone()).collect(),
        )?;
        if self.mode == Mode::Admissible && sub.mode != Mode::Admissible {
            return Err(Error::ScheduleViolation(
                "subsequence of an admissible schedule lost admissibility".into(),
            ));
        }
        Ok(sub)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "m": self.m.iter().map(uint_json).collect::<Vec<_>>(),
            "n": self.n.iter().map(uint_json).collect::<Vec<_>>(),
            "mode": self.mode.as_str(),
            "theta": fmt_q(&self.theta),
            "M": fmt_q(&self.big_m),
        })
    }

    /// Reads `{"m": [...], "n": [...]}`; entries may be numbers or decimal strings.
    pub fn from_json(v: &Value) -> Result<Self> {
        let list = |key: &str| -> Result<Vec<BigUint>> {
            let arr = v
                .get(key)
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Parse(format!("schedule needs an array {key:?}")))?;
            arr.iter().map(uint_from_json).collect()
        };
        Self::validate(list("m")?, list("n")?)
    }
}

pub fn uint_json(v: &BigUint) -> Value {
    match v.to_u64() {
        Some(x) => json!(x),
        None => json!(v.to_string()),
    }
}

pub fn uint_from_json(v: &Value) -> Result<BigUint> {
    match v {
        Value::Number(n) => n
            .as_u64()
            .map(BigUint::from)
            .ok_or_else(|| Error::Parse(format!("not a nonnegative integer: {n}"))),
        Value::String(s) => s.parse().map_err(|_| Error::Parse(format!("not an integer: {s:?}"))),
        other => Err(Error::Parse(format!("expected integer, got {other}"))),
    }
}

/// Smallest `n_2` making `m = (4, 16)`, `n_1 = 128` admissible: `256 * 512^4`.
pub fn min_admissible_n2_for_4_16_128() -> BigUint {
    BigUint::from(256u32) * BigUint::from(512u32).pow(4)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn admissible_example() {
        let n2 = min_admissible_n2_for_4_16_128();
        assert_eq!(n2, BigUint::from(17_592_186_044_416u64));
        let s = ParameterSchedule::validate(
            vec![4u32.into(), 16u32.into()],
            vec![128u32.into(), n2.clone()],
        )
        .unwrap();
        assert_eq!(s.mode(), Mode::Admissible);
        let s = ParameterSchedule::validate(
            vec![4u32.into(), 16u32.into()],
            vec![128u32.into(), n2 - 1u32],
        )
        .unwrap();
        assert_eq!(s.mode(), Mode::Toy);
    }

    #[test]
    fn toy_and_violation() {
        let s = ParameterSchedule::from_u64(&[4, 16, 256], &[8, 8, 8]).unwrap();
        assert_eq!(s.mode(), Mode::Toy);
        assert!(matches!(
            ParameterSchedule::from_u64(&[2, 4], &[8, 8]),
            Err(Error::ScheduleViolation(_))
        ));
        assert!(ParameterSchedule::from_u64(&[4, 4], &[1, 1]).is_err());
        assert!(ParameterSchedule::from_u64(&[4], &[1, 1]).is_err());
        assert!(ParameterSchedule::from_u64(&[4], &[0]).is_err());
    }

    #[test]
    fn theta_and_basis_constant() {
        let s = ParameterSchedule::from_u64(&[4, 16], &[1, 1]).unwrap();
        assert_eq!(s.theta(), &q(1, 4));
        assert_eq!(s.big_m(), &qi(2));
        let s = ParameterSchedule::from_u64(&[6, 7], &[1, 1]).unwrap();
        assert_eq!(s.big_m(), &q(3, 2));
    }

    #[test]
    fn weight_values() {
        let s = ParameterSchedule::from_u64(&[4, 16], &[1, 1]).unwrap();
        assert_eq!(s.weight_value(1).unwrap(), q(1, 4));
        assert_eq!(s.weight_value(2).unwrap(), q(1, 16));
        assert!(matches!(s.weight_value(3), Err(Error::IndexOutOfSchedule { index: 3, len: 2 })));
        assert!(s.weight_value(0).is_err());
    }

    #[test]
    fn subsequence_identity_and_evens() {
        let s = ParameterSchedule::toy_linear(6);
        assert_eq!(s.subsequence(&[1, 2, 3, 4, 5, 6]).unwrap(), s);
        assert!(s.subsequence(&[2, 2]).is_err());
        assert!(s.subsequence(&[7]).is_err());
        let n2 = min_admissible_n2_for_4_16_128();
        let adm = ParameterSchedule::validate(
            vec![4u32.into(), 16u32.into()],
            vec![128u32.into(), n2],
        )
        .unwrap();
        assert_eq!(adm.subsequence(&[2]).unwrap().mode(), Mode::Admissible);
    }

    #[test]
    fn json_round_trip() {
        let s = ParameterSchedule::toy_small();
        let back = ParameterSchedule::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
    }
}
