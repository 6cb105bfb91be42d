//! Framed divisors `(L, ξ, τ)` and their roots.
//!
//! A frame is stored through its finite multiplier `a_f` (so that
//! `ξ(x) = a_f x ∈ Ẑ` on `L = {x : a_f x ∈ Ẑ}`) and the archimedean scalar
//! `τ`. Roots are never materialized: the level-`n` character
//! `x ↦ ξ(x) mod n` is evaluated on demand from the local components at the
//! primes dividing `n`.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::adeles::{finite_json, Adele, Component, FiniteAdele, QmodZ, TruncatedPadic};
use crate::arith::{self, factor, pow_rational, rational_mod, split_prime, valuation, Prime, Rational};
use crate::divisors::{ArithmeticDivisor, ExtInt, PrimeSet};
use crate::error::{Error, Result};

/// A framed divisor. Tight by construction: the divisor is read off the
/// valuations of the multiplier.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    multiplier: FiniteAdele,
    divisor: ArithmeticDivisor,
    tau: Rational,
}

impl Frame {
    pub fn new(multiplier: FiniteAdele, tau: Rational) -> Self {
        let divisor = multiplier.to_divisor();
        Frame { multiplier, divisor, tau }
    }

    /// `L = Z`, `ξ = id`, `τ = id`.
    pub fn trivial() -> Self {
        Frame::new(FiniteAdele::one(), Rational::one())
    }

    /// The frame attached to the adele `(a_f, a_∞)`.
    pub fn from_adele(a: &Adele) -> Self {
        Frame::new(a.finite.clone(), a.infinite.clone())
    }

    pub fn to_adele(&self) -> Adele {
        Adele::new(self.multiplier.clone(), self.tau.clone())
    }

    pub fn multiplier(&self) -> &FiniteAdele {
        &self.multiplier
    }

    pub fn divisor(&self) -> &ArithmeticDivisor {
        &self.divisor
    }

    pub fn tau(&self) -> &Rational {
        &self.tau
    }

    /// Primes where the multiplier vanishes, i.e. where `L` is `p`-divisible.
    pub fn s_locus(&self) -> PrimeSet {
        self.divisor.inf_locus()
    }

    /// Whether `x ∈ L`.
    pub fn contains(&self, x: &Rational) -> bool {
        self.multiplier.contains(x)
    }

    /// A generator of the `Z`-span of `L` away from the singular primes:
    /// `Π p^{-v_p(a_p)}` over the explicit nonzero components.
    pub fn lattice_generator(&self) -> Rational {
        let mut g = Rational::one();
        for (p, c) in self.multiplier.components() {
            if let Some(v) = c.finite_valuation() {
                g *= pow_rational(*p, -v);
            }
        }
        g
    }

    /// `ξ(x) mod n` as an integer in `[0, n)`.
    pub fn xi_mod(&self, x: &Rational, n: &BigUint) -> Result<BigUint> {
        if n.is_zero() {
            return Err(Error::InvalidArgument("level must be positive".into()));
        }
        if !self.contains(x) {
            return Err(Error::NotInGroup);
        }
        if n.is_one() || x.is_zero() {
            return Ok(BigUint::zero());
        }
        let mut residue = BigUint::zero();
        let mut modulus = BigUint::one();
        for (p, e) in factor(n)? {
            let m = p.pow(e);
            let r = self.local_residue(x, p, e)?;
            residue = crt_pair(&residue, &modulus, &r, &m);
            modulus *= m;
        }
        Ok(residue)
    }

    /// `a_p x mod p^e` for `x ∈ L`.
    fn local_residue(&self, x: &Rational, p: Prime, e: u32) -> Result<BigUint> {
        let m = p.pow(e);
        match self.multiplier.component(p) {
            Component::Global(g) => Ok(rational_mod(&(g * x), &m).expect("x a_p is p-integral")),
            Component::Explicit(c) => {
                let Some(va) = c.finite_valuation() else {
                    return Ok(BigUint::zero());
                };
                let (vx, ux) = split_prime(x, p).expect("x is nonzero");
                let v = va + vx;
                debug_assert!(v >= 0);
                if v >= e as i64 {
                    return Ok(BigUint::zero());
                }
                let digits = e - v as u32;
                let unit = c.unit_mod(digits)?;
                let r = unit * rational_mod(&ux, &p.pow(digits)).expect("unit");
                Ok((r * p.pow(v as u32)) % m)
            }
        }
    }
}

/// The unique residue modulo `m1 m2` congruent to `r1 mod m1` and
/// `r2 mod m2`, for coprime moduli.
fn crt_pair(r1: &BigUint, m1: &BigUint, r2: &BigUint, m2: &BigUint) -> BigUint {
    if m1.is_one() {
        return r2 % m2;
    }
    let m1i = BigInt::from(m1.clone());
    let inv = arith::mod_inverse(&m1i, m2).expect("coprime moduli");
    let diff = (BigInt::from(r2.clone()) - BigInt::from(r1.clone())).mod_floor(&BigInt::from(m2.clone()));
    let t = (diff * BigInt::from(inv)).mod_floor(&BigInt::from(m2.clone()));
    let out = BigInt::from(r1.clone()) + m1i * t;
    out.to_biguint().expect("non-negative")
}

#[derive(Serialize, Deserialize)]
struct FrameRepr {
    finite: BTreeMap<String, serde_json::Value>,
    #[serde(default = "one_string", skip_serializing_if = "is_one_string")]
    global: String,
    tau: String,
}

fn one_string() -> String {
    "1".into()
}

fn is_one_string(s: &String) -> bool {
    s == "1"
}

impl Serialize for Frame {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let (finite, global) = finite_json::to_value(&self.multiplier);
        FrameRepr { finite, global, tau: arith::format_rational(&self.tau) }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Frame {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Frame, D::Error> {
        let repr = FrameRepr::deserialize(d)?;
        let multiplier = finite_json::from_value(repr.finite, repr.global).map_err(serde::de::Error::custom)?;
        let tau = arith::parse_rational(&repr.tau).map_err(serde::de::Error::custom)?;
        Ok(Frame::new(multiplier, tau))
    }
}

/// Tightness: `v_p(α_p) = n_p` wherever `n_p` is finite and `α_p = 0` where
/// `n_p = ∞`. Primes missing from `alphas` outside the explicit support of
/// `d` are taken to carry unit multipliers.
pub fn frame_check_tight(alphas: &BTreeMap<Prime, TruncatedPadic>, d: &ArithmeticDivisor) -> Result<bool> {
    if let Some(p) = d.explicit().keys().find(|p| !alphas.contains_key(p)) {
        return Err(Error::MissingPrime(p.get()));
    }
    Ok(alphas.iter().all(|(p, a)| a.valuation() == d.coeff(*p)))
}

/// `ξ = ξ₁ ξ₂`, `τ = τ₁ τ₂`.
pub fn frame_tensor(f1: &Frame, f2: &Frame) -> Frame {
    Frame::new(f1.multiplier.multiply(&f2.multiplier), &f1.tau * &f2.tau)
}

/// The value `⟨ρ(1/n), x⟩ = (ξ(x) mod n)/n` of the root at level `n`.
pub fn root_eval(f: &Frame, n: &BigUint, x: &Rational) -> Result<QmodZ> {
    let r = f.xi_mod(x, n)?;
    Ok(QmodZ::new(&Rational::new(BigInt::from(r), BigInt::from(n.clone()))))
}

/// Whether the level-`n` root of `f1 ⊗ f2` at `x y` equals the product in
/// `Z/nZ` of the roots of `f1` at `x` and `f2` at `y`.
pub fn root_tensor_check(f1: &Frame, f2: &Frame, n: &BigUint, x: &Rational, y: &Rational) -> Result<bool> {
    let lhs = frame_tensor(f1, f2).xi_mod(&(x * y), n)?;
    let rhs = (f1.xi_mod(x, n)? * f2.xi_mod(y, n)?) % n;
    Ok(lhs == rhs)
}

/// Elements of `L` used to probe a root at the prime `p`: the lattice
/// generator times `c p^{-j}` for small `c` and, when `p` is singular, a
/// range of `p`-power denominators.
pub fn sample_sections(f: &Frame, p: Prime, k: u32) -> Vec<Rational> {
    let g = f.lattice_generator();
    let depth = if f.s_locus().contains(p) { k + 2 } else { 0 };
    let mut out = Vec::new();
    for j in 0..=depth {
        for c in 1..=6i64 {
            out.push(&g * Rational::from_integer(BigInt::from(c)) * pow_rational(p, -(j as i64)));
        }
    }
    out
}

/// Vanishing on singularities: when `p` lies in the singular locus, the
/// root vanishes at every level `p^k` on the sampled sections.
pub fn root_vanishing(f: &Frame, p: Prime, k: u32) -> Result<bool> {
    if !f.s_locus().contains(p) {
        return Ok(true);
    }
    let n = p.pow(k);
    for x in sample_sections(f, p, k) {
        if !f.xi_mod(&x, &n)?.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether `x ↦ α_p x mod p^k` maps `L(d)` onto `Z/p^k`, probing
/// `x ∈ p^{-n_p}{0, ..., p^k - 1}`. At a prime with `n_p = ∞` the target
/// must be zero instead, so the answer is whether `α_p = 0`. Returns
/// `false` when `α_p` does not even map `L(d)` into `Z_p`.
pub fn root_surjective_at(alphas: &BTreeMap<Prime, TruncatedPadic>, d: &ArithmeticDivisor, p: Prime, k: u32) -> Result<bool> {
    let alpha = alphas.get(&p).ok_or(Error::MissingPrime(p.get()))?;
    let n_p = match d.coeff(p) {
        ExtInt::Inf => return Ok(alpha.is_zero()),
        ExtInt::Finite(n) => i64::try_from(&n).map_err(|_| Error::InvalidArgument("coefficient out of range".into()))?,
    };
    let Some(va) = alpha.finite_valuation() else {
        return Ok(false);
    };
    let shift = va - n_p;
    if shift < 0 {
        return Ok(false);
    }
    let m = p.pow(k);
    let size = u64::try_from(&m).map_err(|_| Error::InvalidArgument("level too large to enumerate".into()))?;
    if size > 1 << 20 {
        return Err(Error::InvalidArgument("level too large to enumerate".into()));
    }
    if shift >= k as i64 {
        return Ok(m.is_one());
    }
    let unit = alpha.unit_mod(k - shift as u32)?;
    let scale = (unit * p.pow(shift as u32)) % &m;
    let hit: BTreeSet<BigUint> = (0..size).map(|c| (&scale * BigUint::from(c)) % &m).collect();
    Ok(hit.len() as u64 == size)
}

/// The torsion of the dual group seen through the frame: `Q_p / a_p Z_p` at
/// every prime outside the singular locus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualTorsionDescriptor {
    pub support_primes: PrimeSet,
    pub local_shift: BTreeMap<Prime, ExtInt>,
}

impl DualTorsionDescriptor {
    /// `v_p(a_p)`; primes without an entry have shift `0`.
    pub fn shift(&self, p: Prime) -> ExtInt {
        self.local_shift.get(&p).cloned().unwrap_or_else(ExtInt::zero)
    }

    /// Order of `x mod a_p Z_p` in `Q_p / a_p Z_p`, or `None` when `p` is
    /// singular (the quotient is `Q_p`, torsion free).
    pub fn element_order(&self, p: Prime, x: &Rational) -> Option<BigUint> {
        if !self.support_primes.contains(p) {
            return None;
        }
        let shift = match self.shift(p) {
            ExtInt::Inf => return None,
            ExtInt::Finite(s) => i64::try_from(&s).ok()?,
        };
        if x.is_zero() {
            return Some(BigUint::one());
        }
        let e = shift - valuation(x, p).expect("nonzero");
        Some(if e > 0 { p.pow(e as u32) } else { BigUint::one() })
    }
}

pub fn dual_torsion(f: &Frame) -> DualTorsionDescriptor {
    let local_shift = f
        .divisor
        .explicit()
        .iter()
        .filter(|(_, e)| !e.is_inf())
        .map(|(p, e)| (*p, e.clone()))
        .collect();
    DualTorsionDescriptor { support_primes: f.s_locus().complement(), local_shift }
}

/// Whether `f2 ≅ f1`, i.e. `(a_2, τ_2) = q (a_1, τ_1)` for some `q ∈ Q^×`.
///
/// The components away from the explicit primes are the exact global
/// rationals, which pins down `q = g_2 / g_1`. Explicit components are then
/// compared to the precision both sides carry.
pub fn pic_framed_class(f1: &Frame, f2: &Frame) -> bool {
    let q = f2.multiplier.global() / f1.multiplier.global();
    if f2.tau != &q * &f1.tau {
        return false;
    }
    let keys: BTreeSet<Prime> =
        f1.multiplier.components().keys().chain(f2.multiplier.components().keys()).copied().collect();
    keys.into_iter().all(|p| {
        let prec = [f1.multiplier.component(p), f2.multiplier.component(p)]
            .iter()
            .filter_map(|c| match c {
                Component::Explicit(t) => t.precision(),
                Component::Global(_) => None,
            })
            .max()
            .unwrap_or(1);
        let a1 = f1.multiplier.component_truncated(p, prec).mul_rational(&q);
        let a2 = f2.multiplier.component_truncated(p, prec);
        a1.agrees_with(&a2)
    })
}

/// CSV rows `level,x,numerator` of the root values `⟨ρ(1/n), x⟩ = numerator/n`.
pub fn root_table_csv(f: &Frame, levels: &[BigUint], xs: &[Rational]) -> Result<String> {
    let mut out = String::from("level,x,numerator\n");
    for n in levels {
        for x in xs {
            let r = f.xi_mod(x, n)?;
            out.push_str(&format!("{n},{},{r}\n", arith::format_rational(x)));
        }
    }
    Ok(out)
}
