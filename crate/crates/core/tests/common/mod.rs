//! Shared generators and brute-force oracles for the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};
use picmonoid::adeles::{Adele, FiniteAdele, TruncatedPadic};
use picmonoid::divisors::{ArithmeticDivisor, DefaultCoeff, ExtInt};
use picmonoid::covers::{FiberPoint, TorusPoint};
use picmonoid::frames_roots::Frame;
use picmonoid::{Prime, Rational};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SMALL_PRIMES: [u64; 10] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn p(n: u64) -> Prime {
    Prime::new(n).unwrap()
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn random_prime(rng: &mut impl Rng) -> Prime {
    p(*SMALL_PRIMES.choose(rng).unwrap())
}

/// A few distinct small primes.
pub fn random_prime_set(rng: &mut impl Rng, max: usize) -> Vec<Prime> {
    let k = rng.gen_range(0..=max);
    let mut ps: Vec<u64> = SMALL_PRIMES.choose_multiple(rng, k).copied().collect();
    ps.sort_unstable();
    ps.into_iter().map(p).collect()
}

/// Nonzero rational built from small prime powers and a sign.
pub fn random_rational(rng: &mut impl Rng) -> Rational {
    let mut q = Rational::one();
    for _ in 0..rng.gen_range(0..4) {
        let e = rng.gen_range(-3i64..=3);
        q *= pow(random_prime(rng), e);
    }
    if rng.gen_bool(0.3) {
        q = -q;
    }
    q
}

pub fn pow(p: Prime, e: i64) -> Rational {
    let b = BigInt::from(p.get()).pow(e.unsigned_abs() as u32);
    if e >= 0 {
        Rational::from_integer(b)
    } else {
        Rational::new(BigInt::one(), b)
    }
}

pub fn random_unit(rng: &mut impl Rng, p: Prime, digits: u32) -> BigUint {
    let m = p.get().pow(digits.min(6));
    loop {
        let u = rng.gen_range(1..m.max(2));
        if u % p.get() != 0 {
            return BigUint::from(u);
        }
    }
}

pub fn random_padic(rng: &mut impl Rng, p: Prime) -> TruncatedPadic {
    if rng.gen_ratio(1, 8) {
        return TruncatedPadic::zero(p);
    }
    let prec = rng.gen_range(1..=6);
    TruncatedPadic::new(p, rng.gen_range(-3..=3), random_unit(rng, p, prec), prec).unwrap()
}

/// Explicit components at a few primes and a global rational supported on
/// them.
pub fn random_finite_adele(rng: &mut impl Rng) -> FiniteAdele {
    let primes = random_prime_set(rng, 4);
    let comps: Vec<TruncatedPadic> = primes.iter().map(|&q| random_padic(rng, q)).collect();
    let mut global = Rational::one();
    for &q in &primes {
        if rng.gen_bool(0.5) {
            global *= pow(q, rng.gen_range(-2..=2));
        }
    }
    if rng.gen_bool(0.3) {
        global = -global;
    }
    FiniteAdele::new(comps, global).unwrap()
}

pub fn random_adele(rng: &mut impl Rng) -> Adele {
    let inf = if rng.gen_ratio(1, 10) { Rational::zero() } else { random_rational(rng) };
    Adele::new(random_finite_adele(rng), inf)
}

/// Frame over up to four small primes; one component in six vanishes.
pub fn random_frame(rng: &mut impl Rng, precision: u32) -> Frame {
    let primes = random_prime_set(rng, 4);
    let comps: Vec<TruncatedPadic> = primes
        .iter()
        .map(|&q| {
            if rng.gen_ratio(1, 6) {
                TruncatedPadic::zero(q)
            } else {
                let m = BigUint::from(q.get()).pow(precision);
                let unit = loop {
                    let u = BigUint::from(rng.gen::<u128>()) % &m;
                    if !(&u % q.get()).is_zero() {
                        break u;
                    }
                };
                TruncatedPadic::new(q, rng.gen_range(-3..=3), unit, precision).unwrap()
            }
        })
        .collect();
    let mut global = Rational::one();
    for &q in &primes {
        global *= pow(q, rng.gen_range(-2..=2));
    }
    let tau = random_rational(rng);
    Frame::new(FiniteAdele::new(comps, global).unwrap(), tau)
}

/// A random element of `L`: the lattice generator times an integer and
/// powers of singular primes.
pub fn random_element(rng: &mut impl Rng, f: &Frame) -> Rational {
    let mut x = f.lattice_generator() * Rational::from_integer(BigInt::from(rng.gen_range(-500..=500i64)));
    for q in &f.s_locus().members {
        x *= pow(*q, -rng.gen_range(0..=3));
    }
    x
}

pub fn random_exponent(rng: &mut impl Rng) -> Rational {
    rat(rng.gen_range(-36..=36), rng.gen_range(1..=12))
}

pub fn random_circle_point(rng: &mut impl Rng, q: Prime) -> FiberPoint {
    let lambda = if rng.gen_ratio(1, 4) { pow(q, rng.gen_range(-2..=2)) } else { random_rational(rng).abs() };
    FiberPoint::on_circle(q, &lambda, &random_exponent(rng)).unwrap()
}

pub fn random_torus_point(rng: &mut impl Rng, q: Prime) -> TorusPoint {
    let others: Vec<Prime> = random_prime_set(rng, 3).into_iter().filter(|r| *r != q).collect();
    let units: Vec<TruncatedPadic> = others
        .iter()
        .map(|&r| {
            let prec = rng.gen_range(1..=6);
            TruncatedPadic::new(r, 0, random_unit(rng, r, prec), prec).unwrap()
        })
        .collect();
    let mut global = pow(q, rng.gen_range(-2..=2));
    for &r in &others {
        global *= pow(r, rng.gen_range(-1..=1));
    }
    TorusPoint::new(q, units, global, random_exponent(rng)).unwrap()
}

/// Eventually-constant divisor over small primes; `allow_inf` enables
/// infinite coefficients and (rarely) the infinite default.
pub fn random_divisor(rng: &mut impl Rng, allow_inf: bool) -> ArithmeticDivisor {
    let default = if allow_inf && rng.gen_ratio(1, 10) { DefaultCoeff::Inf } else { DefaultCoeff::Zero };
    let entries: Vec<(Prime, ExtInt)> = random_prime_set(rng, 4)
        .into_iter()
        .map(|q| {
            let c = if allow_inf && rng.gen_ratio(1, 5) { ExtInt::Inf } else { ExtInt::from_i64(rng.gen_range(-3..=3)) };
            (q, c)
        })
        .collect();
    ArithmeticDivisor::new(entries, default)
}

/// Trial-division valuation of a nonzero integer.
pub fn trial_valuation(n: &BigInt, p: u64) -> i64 {
    if let Ok(mut m) = u128::try_from(n.abs()) {
        let mut v = 0;
        while m % p as u128 == 0 {
            m /= p as u128;
            v += 1;
        }
        return v;
    }
    let bp = BigInt::from(p);
    let mut n = n.abs();
    let mut v = 0;
    while (&n % &bp).is_zero() {
        n /= &bp;
        v += 1;
    }
    v
}

pub fn rational_valuation(x: &Rational, p: u64) -> i64 {
    trial_valuation(x.numer(), p) - trial_valuation(x.denom(), p)
}

/// Prime factors of a nonzero integer below `2^128` by trial division.
pub fn trial_primes(n: &BigInt) -> Vec<u64> {
    let mut n = u128::try_from(n.abs()).expect("test integers fit in 128 bits");
    let mut out = Vec::new();
    let mut d = 2u128;
    while d * d <= n {
        if n % d == 0 {
            out.push(d as u64);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(u64::try_from(n).expect("cofactor fits in 64 bits"));
    }
    out
}

/// Membership `x ∈ L(D)` by direct valuation checks at every prime dividing
/// `x` or carrying an explicit coefficient.
pub fn sections_oracle(d: &ArithmeticDivisor, x: &Rational) -> bool {
    if x.is_zero() {
        return true;
    }
    let mut primes = trial_primes(x.numer());
    primes.extend(trial_primes(x.denom()));
    primes.extend(d.explicit().keys().map(|q| q.get()));
    primes.sort_unstable();
    primes.dedup();
    let ok_at = |q: u64| match d.coeff(p(q)) {
        ExtInt::Inf => true,
        ExtInt::Finite(n) => BigInt::from(rational_valuation(x, q)) >= -n,
    };
    if !primes.iter().all(|&q| ok_at(q)) {
        return false;
    }
    // every other prime has the default coefficient and valuation zero
    true
}

// ---------------------------------------------------------------------------
// Splitting oracle: factor a resolvent polynomial of the fixed field mod p.

fn phi_m(m: u64) -> Vec<i64> {
    // x^m - 1 divided by Φ_d for every proper divisor d
    let mut num = vec![0i64; m as usize + 1];
    num[0] = -1;
    num[m as usize] = 1;
    for d in 1..m {
        if m.is_multiple_of(d) {
            num = int_div_exact(&num, &phi_m(d));
        }
    }
    num
}

fn int_div_exact(a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let mut q = vec![0i64; a.len() - db];
    for i in (0..q.len()).rev() {
        let c = r[i + db] / b[db];
        q[i] = c;
        for j in 0..=db {
            r[i + j] -= c * b[j];
        }
    }
    assert!(r.iter().all(|&c| c == 0), "inexact cyclotomic division");
    q
}

type Fp = Vec<u64>;

fn trim(mut a: Fp) -> Fp {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn fp_mul(a: &[u64], b: &[u64], p: u64) -> Fp {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut c = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            c[i + j] = (c[i + j] + x * y) % p;
        }
    }
    trim(c)
}

fn fp_inv(a: u64, p: u64) -> u64 {
    fp_pow(a, p - 2, p)
}

fn fp_pow(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = r * a % p;
        }
        a = a * a % p;
        e >>= 1;
    }
    r
}

fn fp_rem(a: &[u64], b: &[u64], p: u64) -> Fp {
    let mut r = trim(a.to_vec());
    let db = b.len() - 1;
    let inv = fp_inv(b[db], p);
    while r.len() > db {
        let shift = r.len() - 1 - db;
        let c = r[r.len() - 1] * inv % p;
        for j in 0..=db {
            r[shift + j] = (r[shift + j] + p - c * b[j] % p) % p;
        }
        r = trim(r);
    }
    r
}

fn fp_divmod(a: &[u64], b: &[u64], p: u64) -> (Fp, Fp) {
    let mut r = trim(a.to_vec());
    let db = b.len() - 1;
    let inv = fp_inv(b[db], p);
    let mut q = vec![0u64; r.len().saturating_sub(db).max(1)];
    while r.len() > db {
        let shift = r.len() - 1 - db;
        let c = r[r.len() - 1] * inv % p;
        q[shift] = c;
        for j in 0..=db {
            r[shift + j] = (r[shift + j] + p - c * b[j] % p) % p;
        }
        r = trim(r);
    }
    (trim(q), r)
}

fn fp_gcd(a: &[u64], b: &[u64], p: u64) -> Fp {
    let mut a = trim(a.to_vec());
    let mut b = trim(b.to_vec());
    while !b.is_empty() {
        let r = fp_rem(&a, &b, p);
        a = b;
        b = r;
    }
    let inv = fp_inv(*a.last().unwrap(), p);
    a.iter().map(|c| c * inv % p).collect()
}

fn fp_sub(a: &[u64], b: &[u64], p: u64) -> Fp {
    let n = a.len().max(b.len());
    trim((0..n).map(|i| (a.get(i).unwrap_or(&0) + p - b.get(i).unwrap_or(&0)) % p).collect())
}

fn fp_derivative(a: &[u64], p: u64) -> Fp {
    trim(a.iter().enumerate().skip(1).map(|(i, c)| c * (i as u64 % p) % p).collect())
}

/// Degrees of the irreducible factors of a monic squarefree polynomial over
/// `F_p`, by distinct-degree factorization.
fn ddf(f: &[u64], p: u64) -> Vec<usize> {
    let mut f = trim(f.to_vec());
    let mut degrees = Vec::new();
    let x: Fp = vec![0, 1];
    let mut h = fp_rem(&x, &f, p);
    let mut d = 0;
    while f.len() > 1 {
        d += 1;
        if 2 * d > f.len() - 1 {
            degrees.push(f.len() - 1);
            break;
        }
        h = fp_powmod(&h, p, &f, p);
        let g = fp_gcd(&f, &fp_sub(&h, &x, p), p);
        if g.len() > 1 {
            for _ in 0..(g.len() - 1) / d {
                degrees.push(d);
            }
            f = fp_divmod(&f, &g, p).0;
            h = fp_rem(&h, &f, p);
        }
    }
    degrees
}

fn fp_powmod(a: &[u64], mut e: u64, m: &[u64], p: u64) -> Fp {
    let mut r: Fp = vec![1];
    let mut b = fp_rem(a, m, p);
    while e > 0 {
        if e & 1 == 1 {
            r = fp_rem(&fp_mul(&r, &b, p), m, p);
        }
        b = fp_rem(&fp_mul(&b, &b, p), m, p);
        e >>= 1;
    }
    r
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn closure(gens: &[u64], m: u64) -> Vec<u64> {
    let mut set = vec![1 % m];
    let mut i = 0;
    while i < set.len() {
        for &g in gens {
            let y = set[i] * g % m;
            if !set.contains(&y) {
                set.push(y);
            }
        }
        i += 1;
    }
    set.sort_unstable();
    set
}

/// `(components, degree)` of `p` in the fixed field of `kernel` inside
/// `Q(ζ_m)`, or `None` if `p` ramifies there.
///
/// When `p | m` but the kernel contains the inertia subgroup, the field
/// already lives in `Q(ζ_{m'})` with `m'` the prime-to-`p` part, and the
/// computation moves there. The field is generated by relative traces
/// `θ_C = Σ_{a ∈ C} f(ζ^a)` of a random `f ∈ Z[ζ]`, and the factorization
/// of `Π_C (X - θ_C)` mod `p` is read off once it is squarefree.
pub fn splitting_oracle(m: u64, kernel_gens: &[u64], p: u64) -> Option<(usize, usize)> {
    assert!(m >= 2);
    let units: Vec<u64> = (1..m).filter(|&a| gcd(a, m) == 1).collect();
    let (mut m, mut kernel) = (m, closure(kernel_gens, m));
    if m % p == 0 {
        let mut pe = 1;
        while m % (pe * p) == 0 {
            pe *= p;
        }
        let mp = m / pe;
        let inertia_in_kernel = units.iter().filter(|&&u| u % mp == 1 % mp).all(|u| kernel.contains(u));
        if !inertia_in_kernel {
            return None;
        }
        kernel = {
            let mut k: Vec<u64> = kernel.iter().map(|k| k % mp).collect();
            k.sort_unstable();
            k.dedup();
            k
        };
        m = mp;
    }
    if m <= 2 {
        return Some((1, 1));
    }
    let units: Vec<u64> = (1..m).filter(|&a| gcd(a, m) == 1).collect();
    let mut cosets: Vec<Vec<u64>> = Vec::new();
    for &a in &units {
        if cosets.iter().any(|c| c.contains(&a)) {
            continue;
        }
        cosets.push(kernel.iter().map(|k| a * k % m).collect());
    }
    let n = cosets.len();
    let phi: Vec<u64> = phi_m(m).iter().map(|&c| c.rem_euclid(p as i64) as u64).collect();
    let mut rng = rng(m * 1_000_003 + p);
    for _ in 0..500 {
        let f: Vec<u64> = (0..m).map(|_| rng.gen_range(0..p)).collect();
        let thetas: Vec<Fp> = cosets
            .iter()
            .map(|c| {
                let mut v = vec![0u64; m as usize];
                for &a in c {
                    for (j, &cj) in f.iter().enumerate() {
                        let idx = (a * j as u64 % m) as usize;
                        v[idx] = (v[idx] + cj) % p;
                    }
                }
                fp_rem(&v, &phi, p)
            })
            .collect();
        // P(X) = Π (X - θ_C), coefficients in F_p[ζ]
        let mut poly: Vec<Fp> = vec![vec![1]];
        for th in &thetas {
            let mut next: Vec<Fp> = vec![Vec::new(); poly.len() + 1];
            for (i, c) in poly.iter().enumerate() {
                next[i + 1] = add(&next[i + 1], c, p);
                next[i] = fp_sub(&next[i], &fp_rem(&fp_mul(c, th, p), &phi, p), p);
            }
            poly = next;
        }
        let coeffs: Vec<u64> = poly
            .iter()
            .map(|c| {
                assert!(c.len() <= 1, "resolvent coefficient is not rational");
                c.first().copied().unwrap_or(0)
            })
            .collect();
        let deriv = fp_derivative(&coeffs, p);
        if deriv.is_empty() || fp_gcd(&coeffs, &deriv, p).len() != 1 {
            continue;
        }
        let degrees = ddf(&coeffs, p);
        assert_eq!(degrees.iter().sum::<usize>(), n);
        assert!(degrees.iter().all(|&d| d == degrees[0]), "Galois fiber with unequal degrees");
        return Some((degrees.len(), degrees[0]));
    }
    panic!("no squarefree resolvent found for m = {m}, p = {p}");
}

fn add(a: &[u64], b: &[u64], p: u64) -> Fp {
    let n = a.len().max(b.len());
    trim((0..n).map(|i| (a.get(i).unwrap_or(&0) + b.get(i).unwrap_or(&0)) % p).collect())
}

/// Every subgroup of `(Z/m)^×` for the small moduli used here, as sorted
/// generator lists, deduplicated by the subgroup they generate.
pub fn all_kernels(m: u64) -> Vec<Vec<u64>> {
    let units: Vec<u64> = (1..m).filter(|&a| gcd(a, m) == 1).collect();
    let mut seen: BTreeMap<Vec<u64>, Vec<u64>> = BTreeMap::new();
    for &a in &units {
        for &b in &units {
            let gens = if a == b { vec![a] } else { vec![a, b] };
            seen.entry(closure(&gens, m)).or_insert(gens);
        }
    }
    seen.into_values().collect()
}

// ---------------------------------------------------------------------------
// proptest strategies

pub mod strategies {
    use super::*;
    use proptest::prelude::*;

    pub fn arb_prime() -> impl Strategy<Value = Prime> {
        prop::sample::select(SMALL_PRIMES.to_vec()).prop_map(p)
    }

    /// Nonzero rational `± Π p^e` over a few small primes times a small integer.
    pub fn arb_rational() -> impl Strategy<Value = Rational> {
        (prop::collection::vec((arb_prime(), -4i64..=4), 0..4), 1i64..=12, any::<bool>()).prop_map(|(fs, k, neg)| {
            let q: Rational = fs.into_iter().map(|(q, e)| pow(q, e)).product::<Rational>() * Rational::from_integer(k.into());
            if neg {
                -q
            } else {
                q
            }
        })
    }

    pub fn arb_ext() -> impl Strategy<Value = ExtInt> {
        prop_oneof![4 => (-4i64..=4).prop_map(ExtInt::from_i64), 1 => Just(ExtInt::Inf)]
    }

    pub fn arb_divisor() -> impl Strategy<Value = ArithmeticDivisor> {
        (prop::collection::vec((arb_prime(), arb_ext()), 0..5), prop::bool::weighted(0.1))
            .prop_map(|(es, inf)| ArithmeticDivisor::new(es, if inf { DefaultCoeff::Inf } else { DefaultCoeff::Zero }))
    }

    /// Divisors with default `0` and only finite coefficients.
    pub fn arb_finite_divisor() -> impl Strategy<Value = ArithmeticDivisor> {
        prop::collection::vec((arb_prime(), (-4i64..=4).prop_map(ExtInt::from_i64)), 0..5)
            .prop_map(|es| ArithmeticDivisor::new(es, DefaultCoeff::Zero))
    }

    pub fn arb_finite_adele() -> impl Strategy<Value = FiniteAdele> {
        any::<u64>().prop_map(|s| random_finite_adele(&mut rng(s)))
    }

    pub fn arb_adele() -> impl Strategy<Value = Adele> {
        any::<u64>().prop_map(|s| random_adele(&mut rng(s)))
    }

    /// A frame together with a seed for drawing its elements.
    pub fn arb_frame() -> impl Strategy<Value = (Frame, u64)> {
        (any::<u64>(), any::<u64>()).prop_map(|(s, t)| (random_frame(&mut rng(s), 16), t))
    }
}
