//! Argument parsers. Structured inputs (adeles, frames, classes, torus
//! points) are JSON; a leading `@` reads the JSON from a file instead.

use std::collections::BTreeMap;

use picmonoid::arith::parse_rational;
use picmonoid::divisors::{ArithmeticDivisor, PrimeSet};
use picmonoid::picard::PicClass;
use picmonoid::{Error, Prime, Rational, Result};
use serde::de::DeserializeOwned;

pub fn rational(s: &str) -> Result<Rational> {
    parse_rational(s)
}

pub fn divisor(s: &str) -> Result<ArithmeticDivisor> {
    s.parse()
}

pub fn prime(s: &str) -> Result<Prime> {
    let n: u64 = s.trim().parse().map_err(|_| Error::Parse(format!("not a prime: {s:?}")))?;
    Prime::new(n)
}

/// Comma-separated primes; the empty string is the empty list.
pub fn primes(s: &str) -> Result<Vec<Prime>> {
    s.split(',').filter(|t| !t.trim().is_empty()).map(prime).collect()
}

pub fn u64_list(s: &str) -> Result<Vec<u64>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse().map_err(|_| Error::Parse(format!("not an integer: {t:?}"))))
        .collect()
}

/// `2:5,3:5` style caps.
pub fn caps(s: &str) -> Result<BTreeMap<Prime, u32>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            let (p, k) = t.split_once(':').ok_or_else(|| Error::Parse(format!("expected prime:cap, got {t:?}")))?;
            let k = k.trim().parse().map_err(|_| Error::Parse(format!("bad cap {k:?}")))?;
            Ok((prime(p)?, k))
        })
        .collect()
}

pub fn json<T: DeserializeOwned>(s: &str) -> Result<T> {
    let text = match s.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{path}: {e}")))?,
        None => s.to_string(),
    };
    serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))
}

/// A Picard class, either as JSON or as `D@λ`, the class of `(L(D), λ|·|)`.
pub fn pic_class(s: &str) -> Result<PicClass> {
    if s.trim_start().starts_with("{\"") || s.starts_with('@') {
        return json(s);
    }
    let (d, lambda) = s.rsplit_once('@').ok_or_else(|| Error::Parse(format!("expected JSON or D@lambda, got {s:?}")))?;
    PicClass::from_data(&divisor(d)?, &rational(lambda)?)
}

pub fn prime_set(list: &str, cofinite: bool) -> Result<PrimeSet> {
    let ps = primes(list)?;
    Ok(if cofinite { PrimeSet::all_except(ps) } else { PrimeSet::finite(ps) })
}
