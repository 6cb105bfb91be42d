//! Integer and rational helpers shared by every module: primality,
//! factorization, p-adic valuations and modular inverses.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// A rational prime. Construction checks primality, so every `Prime` in a
/// data structure is known to be prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct Prime(u64);

impl Prime {
    pub fn new(p: u64) -> Result<Prime> {
        if is_prime_u64(p) {
            Ok(Prime(p))
        } else {
            Err(Error::NonPrime(p.to_string()))
        }
    }

    pub fn get(self) -> u64 {
        self.0
    }

    pub fn big(self) -> BigUint {
        BigUint::from(self.0)
    }

    pub fn big_int(self) -> BigInt {
        BigInt::from(self.0)
    }

    pub fn pow(self, k: u32) -> BigUint {
        num_traits::pow(self.big(), k as usize)
    }

    pub fn ln(self) -> f64 {
        (self.0 as f64).ln()
    }
}

impl TryFrom<u64> for Prime {
    type Error = Error;
    fn try_from(p: u64) -> Result<Prime> {
        Prime::new(p)
    }
}

impl From<Prime> for u64 {
    fn from(p: Prime) -> u64 {
        p.0
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

// These twelve bases make Miller-Rabin deterministic for every n < 2^64.
const MR_BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'bases: for &a in &MR_BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

/// Miller-Rabin for arbitrary size: deterministic below 2^64, probabilistic
/// (fixed bases, error below 4^-24) above.
pub fn is_probable_prime(n: &BigUint) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    if n.is_even() {
        return false;
    }
    let one = BigUint::one();
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    let bases = MR_BASES.iter().chain([41u64, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89].iter());
    'bases: for &a in bases {
        let mut x = BigUint::from(a).modpow(&d, n);
        if x == one || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&BigUint::from(2u32), n);
            if x == n_minus_1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

fn pollard_brent(n: &BigUint) -> BigUint {
    let one = BigUint::one();
    let mut c = BigUint::one();
    loop {
        let f = |x: &BigUint| (x * x + &c) % n;
        let mut y = BigUint::from(2u32);
        let mut r: u64 = 1;
        let mut q = BigUint::one();
        let mut g = BigUint::one();
        let mut x = y.clone();
        let mut ys = y.clone();
        let m = 64u64;
        while g == one {
            x = y.clone();
            for _ in 0..r {
                y = f(&y);
            }
            let mut k = 0;
            while k < r && g == one {
                ys = y.clone();
                for _ in 0..m.min(r - k) {
                    y = f(&y);
                    let diff = if x > y { &x - &y } else { &y - &x };
                    q = (q * diff) % n;
                }
                g = q.gcd(n);
                k += m;
            }
            r *= 2;
        }
        if &g == n {
            loop {
                ys = f(&ys);
                let diff = if x > ys { &x - &ys } else { &ys - &x };
                g = diff.gcd(n);
                if g > one {
                    break;
                }
            }
        }
        if &g != n {
            return g;
        }
        c += 1u32;
    }
}

fn factor_into(n: BigUint, out: &mut BTreeMap<BigUint, u32>) {
    if n.is_one() {
        return;
    }
    if is_probable_prime(&n) {
        *out.entry(n).or_insert(0) += 1;
        return;
    }
    let d = pollard_brent(&n);
    let rest = &n / &d;
    factor_into(d, out);
    factor_into(rest, out);
}

/// Prime factorization of a positive integer. Fails with `PrimeTooLarge`
/// when a prime factor exceeds 64 bits.
pub fn factor(n: &BigUint) -> Result<BTreeMap<Prime, u32>> {
    if n.is_zero() {
        return Err(Error::ZeroInput);
    }
    let mut out = BTreeMap::new();
    let mut rest = n.clone();
    for p in 2u64..1000 {
        if !is_prime_u64(p) {
            continue;
        }
        let bp = BigUint::from(p);
        let mut e = 0;
        while (&rest % &bp).is_zero() {
            rest /= &bp;
            e += 1;
        }
        if e > 0 {
            out.insert(Prime(p), e);
        }
        if rest.is_one() {
            return Ok(out);
        }
    }
    let mut big = BTreeMap::new();
    factor_into(rest, &mut big);
    for (p, e) in big {
        let small = p.to_u64().ok_or_else(|| Error::PrimeTooLarge(p.to_string()))?;
        *out.entry(Prime(small)).or_insert(0) += e;
    }
    Ok(out)
}

/// `v_p(q)` for the nonzero rational `q`, as signed exponents.
pub fn factor_rational(q: &Rational) -> Result<BTreeMap<Prime, i64>> {
    if q.is_zero() {
        return Err(Error::ZeroInput);
    }
    let mut out: BTreeMap<Prime, i64> = BTreeMap::new();
    for (p, e) in factor(q.numer().magnitude())? {
        out.insert(p, e as i64);
    }
    for (p, e) in factor(q.denom().magnitude())? {
        out.insert(p, -(e as i64));
    }
    Ok(out)
}

/// Exponent of `p` in the nonzero integer `n`.
pub fn int_valuation(n: &BigInt, p: Prime) -> u64 {
    debug_assert!(!n.is_zero());
    let bp = p.big_int();
    let mut v = 0;
    let mut m = n.clone();
    loop {
        let (q, r) = m.div_rem(&bp);
        if !r.is_zero() {
            return v;
        }
        m = q;
        v += 1;
    }
}

/// `v_p(x)`, or `None` when `x = 0`.
pub fn valuation(x: &Rational, p: Prime) -> Option<i64> {
    if x.is_zero() {
        return None;
    }
    Some(int_valuation(x.numer(), p) as i64 - int_valuation(x.denom(), p) as i64)
}

/// Splits `x = p^v * w` with `w` a `p`-adic unit.
pub fn split_prime(x: &Rational, p: Prime) -> Option<(i64, Rational)> {
    let v = valuation(x, p)?;
    Some((v, x / pow_rational(p, v)))
}

pub fn pow_rational(p: Prime, e: i64) -> Rational {
    let base = p.big_int();
    if e >= 0 {
        Rational::from_integer(num_traits::pow(base, e as usize))
    } else {
        Rational::new(BigInt::one(), num_traits::pow(base, (-e) as usize))
    }
}

pub fn mod_inverse(a: &BigInt, m: &BigUint) -> Option<BigUint> {
    if m.is_one() {
        return Some(BigUint::zero());
    }
    let m_int = BigInt::from_biguint(Sign::Plus, m.clone());
    let a = a.mod_floor(&m_int);
    let egcd = a.extended_gcd(&m_int);
    if !egcd.gcd.is_one() {
        return None;
    }
    egcd.x.mod_floor(&m_int).to_biguint()
}

/// Residue of a rational whose denominator is invertible modulo `m`.
pub fn rational_mod(x: &Rational, m: &BigUint) -> Option<BigUint> {
    let inv = mod_inverse(x.denom(), m)?;
    let m_int = BigInt::from_biguint(Sign::Plus, m.clone());
    let num = x.numer().mod_floor(&m_int).to_biguint()?;
    Some((num * inv) % m)
}

/// Fractional part in `[0, 1)`.
pub fn frac(x: &Rational) -> Rational {
    x - x.floor()
}

/// Keeps only the prime powers of `x` at primes for which `keep` holds.
pub fn restrict_rational(x: &Rational, keep: impl Fn(Prime) -> bool) -> Result<Rational> {
    let mut out = Rational::one();
    for (p, e) in factor_rational(x)? {
        if keep(p) {
            out *= pow_rational(p, e);
        }
    }
    Ok(out)
}

/// Removes every power of `p` from the nonzero rational `x`.
pub fn strip_prime(x: &Rational, p: Prime) -> Rational {
    match split_prime(x, p) {
        Some((_, w)) => w,
        None => x.clone(),
    }
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(BigInt::from_str(s).map_err(|_| bad())?)),
    }
}

pub fn format_rational(x: &Rational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn abs_rational(x: &Rational) -> Rational {
    x.abs()
}

/// Primes `<= bound` by a simple sieve.
pub fn primes_up_to(bound: u64) -> Vec<Prime> {
    if bound < 2 {
        return Vec::new();
    }
    let n = bound as usize;
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i <= n {
        if sieve[i] {
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    sieve
        .iter()
        .enumerate()
        .filter(|(_, &is_p)| is_p)
        .map(|(k, _)| Prime(k as u64))
        .collect()
}

pub fn gcd_u64(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}
