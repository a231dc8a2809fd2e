//! Small helpers around `BigRational`: constructors, parsing and formatting.

use crate::Q;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qs(xs: &[(i64, i64)]) -> Vec<Q> {
    xs.iter().map(|&(n, d)| q(n, d)).collect()
}

pub fn qv(xs: &[i64]) -> Vec<Q> {
    xs.iter().map(|&n| qi(n)).collect()
}

pub fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).fold(Q::zero(), |acc, (x, y)| acc + x * y)
}

pub fn sub(a: &[Q], b: &[Q]) -> Vec<Q> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[Q], b: &[Q]) -> Vec<Q> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[Q], s: &Q) -> Vec<Q> {
    a.iter().map(|x| x * s).collect()
}

pub fn norm2(a: &[Q]) -> Q {
    dot(a, a)
}

/// Unit vector of the numéraire: zeros and a trailing one.
pub fn cash(d: usize) -> Vec<Q> {
    let mut v = vec![Q::zero(); d];
    v[d - 1] = Q::one();
    v
}

pub fn abs(x: &Q) -> Q {
    x.abs()
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("not an exact number: {0:?}")]
pub struct ParseRationalError(pub String);

/// Parses `"3"`, `"-2/7"` or a finite decimal such as `"0.125"`.
pub fn parse_q(s: &str) -> Result<Q, ParseRationalError> {
    let err = || ParseRationalError(s.to_string());
    let t = s.trim();
    if t.is_empty() {
        return Err(err());
    }
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| err())?;
        let d: BigInt = d.trim().parse().map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(Q::new(n, d));
    }
    if let Some((ip, fp)) = t.split_once('.') {
        if fp.is_empty() || !fp.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        let neg = ip.starts_with('-');
        let ip = ip.trim_start_matches(['-', '+']);
        let whole: BigInt = if ip.is_empty() { BigInt::zero() } else { ip.parse().map_err(|_| err())? };
        let frac: BigInt = fp.parse().map_err(|_| err())?;
        let den = num_traits::pow(BigInt::from(10), fp.len());
        let v = Q::new(whole * &den + frac, den);
        return Ok(if neg { -v } else { v });
    }
    let n: BigInt = t.parse().map_err(|_| err())?;
    Ok(Q::from_integer(n))
}

pub fn fmt_q(x: &Q) -> String {
    x.to_string()
}

pub fn fmt_vec(v: &[Q]) -> Vec<String> {
    v.iter().map(fmt_q).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_forms() {
        assert_eq!(parse_q("3").unwrap(), qi(3));
        assert_eq!(parse_q("-2/6").unwrap(), q(-1, 3));
        assert_eq!(parse_q("0.125").unwrap(), q(1, 8));
        assert_eq!(parse_q("-1.5").unwrap(), q(-3, 2));
        assert_eq!(parse_q(".5").unwrap(), q(1, 2));
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("abc").is_err());
        assert!(parse_q("1.").is_err());
        assert!(parse_q("").is_err());
    }

    #[test]
    fn formats_as_ratio_strings() {
        assert_eq!(fmt_q(&q(2, 6)), "1/3");
        assert_eq!(fmt_q(&qi(-4)), "-4");
        assert_eq!(fmt_q(&qi(0)), "0");
    }

    #[test]
    fn format_parse_round_trip() {
        for (n, d) in [(1, 3), (-7, 2), (0, 5), (12, 1)] {
            let x = q(n, d);
            assert_eq!(parse_q(&fmt_q(&x)).unwrap(), x);
        }
    }
}
