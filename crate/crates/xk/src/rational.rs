//! Exact rational helpers and the canonical `"p/q"` text form.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q_from_uint(n: &BigUint) -> Q {
    Q::from_integer(BigInt::from(n.clone()))
}

pub fn recip_uint(n: &BigUint) -> Q {
    Q::new(BigInt::one(), BigInt::from(n.clone()))
}

/// Canonical text: `p/q` with `q > 0` and `gcd(p, q) = 1`; integers keep the `/1`.
pub fn fmt_q(x: &Q) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(Q::new(n, d))
}

pub fn abs(x: &Q) -> Q {
    x.abs()
}

/// Decimal approximation for human-readable reports only.
pub fn approx(x: &Q) -> f64 {
    let n: f64 = x.numer().to_string().parse().unwrap_or(f64::NAN);
    let d: f64 = x.denom().to_string().parse().unwrap_or(f64::NAN);
    if n.is_finite() && d.is_finite() {
        n / d
    } else {
        f64::NAN
    }
}

pub fn max_q(a: Q, b: Q) -> Q {
    if b > a {
        b
    } else {
        a
    }
}

pub fn zero() -> Q {
    Q::zero()
}

pub fn one() -> Q {
    Q::one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form() {
        assert_eq!(fmt_q(&q(6, -4)), "-3/2");
        assert_eq!(fmt_q(&qi(0)), "0/1");
        assert_eq!(fmt_q(&qi(5)), "5/1");
    }

    #[test]
    fn parse_round_trip() {
        for s in ["1/4", "-7/3", "0/1", "12/1"] {
            assert_eq!(fmt_q(&parse_q(s).unwrap()), s);
        }
        assert_eq!(parse_q("3").unwrap(), qi(3));
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("x").is_err());
    }
}
