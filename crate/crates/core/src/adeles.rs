//! Truncated p-adic numbers and rational adeles with precision tracking.
//!
//! A [`FiniteAdele`] stores finitely many truncated local components and one
//! exact rational `global` that is the component at every other prime. The
//! global factor is a unit away from the explicit primes, so the
//! representation covers the diagonal image of `Q^×` exactly as well as every
//! adele that is `1` almost everywhere.
//!
//! Precision model: a nonzero component stores `p^v * u` with the unit `u`
//! known modulo `p^precision`. Products keep the smaller precision, and any
//! operation that would need digits beyond what is stored fails with
//! [`Error::InsufficientPrecision`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith::{self, factor_rational, pow_rational, rational_mod, split_prime, valuation, Prime, Rational};
use crate::divisors::{ArithmeticDivisor, DefaultCoeff, ExtInt};
use crate::error::{Error, Result};
use crate::picard::PicClass;

/// `p^valuation * unit` with `unit` known modulo `p^precision`, or exact zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TruncatedPadic {
    prime: Prime,
    value: PadicValue,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum PadicValue {
    Zero,
    Nonzero { valuation: i64, unit: BigUint, precision: u32 },
}

impl TruncatedPadic {
    pub fn zero(prime: Prime) -> Self {
        TruncatedPadic { prime, value: PadicValue::Zero }
    }

    /// `p^valuation * unit`, reducing `unit` modulo `p^precision`.
    pub fn new(prime: Prime, valuation: i64, unit: BigUint, precision: u32) -> Result<Self> {
        if precision == 0 {
            return Err(Error::InvalidArgument("precision must be at least 1".into()));
        }
        if (&unit % prime.big()).is_zero() {
            return Err(Error::InvalidArgument(format!("unit {unit} is divisible by {prime}")));
        }
        let unit = unit % prime.pow(precision);
        Ok(TruncatedPadic { prime, value: PadicValue::Nonzero { valuation, unit, precision } })
    }

    /// The image of `x` in `Q_p`, with `k` unit digits.
    pub fn from_rational(x: &Rational, prime: Prime, k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("precision must be at least 1".into()));
        }
        match split_prime(x, prime) {
            None => Ok(Self::zero(prime)),
            Some((v, w)) => {
                let unit = rational_mod(&w, &prime.pow(k)).expect("unit part is invertible");
                Ok(TruncatedPadic { prime, value: PadicValue::Nonzero { valuation: v, unit, precision: k } })
            }
        }
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.value, PadicValue::Zero)
    }

    pub fn valuation(&self) -> ExtInt {
        match &self.value {
            PadicValue::Zero => ExtInt::Inf,
            PadicValue::Nonzero { valuation, .. } => ExtInt::from_i64(*valuation),
        }
    }

    pub fn finite_valuation(&self) -> Option<i64> {
        match &self.value {
            PadicValue::Zero => None,
            PadicValue::Nonzero { valuation, .. } => Some(*valuation),
        }
    }

    /// Known unit digits; `None` for exact zero (infinitely precise).
    pub fn precision(&self) -> Option<u32> {
        match &self.value {
            PadicValue::Zero => None,
            PadicValue::Nonzero { precision, .. } => Some(*precision),
        }
    }

    pub fn unit(&self) -> Option<&BigUint> {
        match &self.value {
            PadicValue::Zero => None,
            PadicValue::Nonzero { unit, .. } => Some(unit),
        }
    }

    /// The unit part modulo `p^digits`.
    pub fn unit_mod(&self, digits: u32) -> Result<BigUint> {
        match &self.value {
            PadicValue::Zero => Err(Error::InvalidArgument("exact zero has no unit part".into())),
            PadicValue::Nonzero { unit, precision, .. } => {
                if digits > *precision {
                    return Err(Error::InsufficientPrecision {
                        prime: self.prime.get(),
                        needed: digits as u64,
                        available: *precision as u64,
                    });
                }
                Ok(unit % self.prime.pow(digits))
            }
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.prime != other.prime {
            return Err(Error::PrimeMismatch(self.prime.get(), other.prime.get()));
        }
        Ok(match (&self.value, &other.value) {
            (
                PadicValue::Nonzero { valuation: v1, unit: u1, precision: k1 },
                PadicValue::Nonzero { valuation: v2, unit: u2, precision: k2 },
            ) => {
                let k = *k1.min(k2);
                let unit = (u1 * u2) % self.prime.pow(k);
                TruncatedPadic {
                    prime: self.prime,
                    value: PadicValue::Nonzero { valuation: v1 + v2, unit, precision: k },
                }
            }
            _ => Self::zero(self.prime),
        })
    }

    /// Product with an exact rational; precision is unchanged.
    pub fn mul_rational(&self, x: &Rational) -> Self {
        match (&self.value, split_prime(x, self.prime)) {
            (PadicValue::Nonzero { valuation, unit, precision }, Some((v, w))) => {
                let m = self.prime.pow(*precision);
                let w = rational_mod(&w, &m).expect("unit part is invertible");
                TruncatedPadic {
                    prime: self.prime,
                    value: PadicValue::Nonzero { valuation: valuation + v, unit: (unit * w) % m, precision: *precision },
                }
            }
            _ => Self::zero(self.prime),
        }
    }

    /// Equality to the common precision; zero only equals zero.
    pub fn agrees_with(&self, other: &Self) -> bool {
        match (&self.value, &other.value) {
            (PadicValue::Zero, PadicValue::Zero) => true,
            (
                PadicValue::Nonzero { valuation: v1, unit: u1, precision: k1 },
                PadicValue::Nonzero { valuation: v2, unit: u2, precision: k2 },
            ) => {
                let m = self.prime.pow(*k1.min(k2));
                v1 == v2 && (u1 % &m) == (u2 % &m)
            }
            _ => false,
        }
    }

    /// Equality with an exact rational, to the stored precision.
    pub fn agrees_with_rational(&self, x: &Rational) -> bool {
        match (&self.value, split_prime(x, self.prime)) {
            (PadicValue::Zero, None) => true,
            (PadicValue::Nonzero { valuation, unit, precision }, Some((v, w))) => {
                let m = self.prime.pow(*precision);
                *valuation == v && rational_mod(&w, &m).expect("unit part is invertible") == *unit
            }
            _ => false,
        }
    }
}

impl fmt::Display for TruncatedPadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.value {
            PadicValue::Zero => write!(f, "0 (in Q_{})", self.prime),
            PadicValue::Nonzero { valuation, unit, precision } => {
                write!(f, "{}^{} * ({} mod {}^{})", self.prime, valuation, unit, self.prime, precision)
            }
        }
    }
}

/// An element of `Q/Z`, stored as its representative in `[0, 1)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QmodZ(#[serde(with = "crate::serde_util::rational")] Rational);

impl QmodZ {
    pub fn new(x: &Rational) -> Self {
        QmodZ(arith::frac(x))
    }

    pub fn zero() -> Self {
        QmodZ(Rational::zero())
    }

    pub fn value(&self) -> &Rational {
        &self.0
    }

    pub fn add(&self, other: &Self) -> Self {
        QmodZ::new(&(&self.0 + &other.0))
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        QmodZ::new(&(&self.0 * Rational::from_integer(k.clone())))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl fmt::Display for QmodZ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", arith::format_rational(&self.0))
    }
}

/// A local component as seen by a [`FiniteAdele`]: either stored truncated
/// digits or the exact global rational.
#[derive(Debug, Clone)]
pub enum Component<'a> {
    Explicit(&'a TruncatedPadic),
    Global(&'a Rational),
}

/// A finite adele: explicit truncated components at finitely many primes and
/// the exact rational `global` at every other prime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteAdele {
    components: BTreeMap<Prime, TruncatedPadic>,
    global: Rational,
}

impl FiniteAdele {
    /// The unit adele `(1, 1, ...)`.
    pub fn one() -> Self {
        FiniteAdele { components: BTreeMap::new(), global: Rational::one() }
    }

    /// Components at the listed primes, `1` elsewhere.
    pub fn from_components(components: impl IntoIterator<Item = TruncatedPadic>) -> Self {
        let components = components.into_iter().map(|c| (c.prime, c)).collect();
        FiniteAdele { components, global: Rational::one() }
    }

    /// Explicit components plus a global rational. Every prime dividing the
    /// global rational must carry an explicit component.
    pub fn new(components: impl IntoIterator<Item = TruncatedPadic>, global: Rational) -> Result<Self> {
        if global.is_zero() {
            return Err(Error::ZeroInput);
        }
        let components: BTreeMap<Prime, TruncatedPadic> = components.into_iter().map(|c| (c.prime, c)).collect();
        for p in factor_rational(&global)?.keys() {
            if !components.contains_key(p) {
                return Err(Error::InvalidArgument(format!(
                    "global factor has prime {p} without an explicit component"
                )));
            }
        }
        Ok(FiniteAdele { components, global })
    }

    /// The diagonal image of `q ≠ 0`, with `precision` digits at the primes
    /// dividing `q`.
    pub fn diagonal(q: &Rational, precision: u32) -> Result<Self> {
        if q.is_zero() {
            return Err(Error::ZeroInput);
        }
        let mut components = BTreeMap::new();
        for p in factor_rational(q)?.into_keys() {
            components.insert(p, TruncatedPadic::from_rational(q, p, precision)?);
        }
        Ok(FiniteAdele { components, global: q.clone() })
    }

    /// Exact zero at `p`, one elsewhere: the idempotent `e_p`.
    pub fn idempotent(p: Prime) -> Self {
        Self::from_components([TruncatedPadic::zero(p)])
    }

    pub fn components(&self) -> &BTreeMap<Prime, TruncatedPadic> {
        &self.components
    }

    pub fn global(&self) -> &Rational {
        &self.global
    }

    pub fn component(&self, p: Prime) -> Component<'_> {
        match self.components.get(&p) {
            Some(c) => Component::Explicit(c),
            None => Component::Global(&self.global),
        }
    }

    /// The component at `p` as a truncated p-adic with `precision` digits
    /// when it is the exact global value.
    pub fn component_truncated(&self, p: Prime, precision: u32) -> TruncatedPadic {
        match self.component(p) {
            Component::Explicit(c) => c.clone(),
            Component::Global(g) => TruncatedPadic::from_rational(g, p, precision).expect("precision >= 1"),
        }
    }

    /// Componentwise product; each component keeps the smaller precision.
    pub fn multiply(&self, other: &Self) -> Self {
        let keys: BTreeSet<Prime> = self.components.keys().chain(other.components.keys()).copied().collect();
        let components = keys
            .into_iter()
            .map(|p| {
                let c = match (self.component(p), other.component(p)) {
                    (Component::Explicit(a), Component::Explicit(b)) => a.mul(b).expect("same prime"),
                    (Component::Explicit(a), Component::Global(g)) => a.mul_rational(g),
                    (Component::Global(g), Component::Explicit(b)) => b.mul_rational(g),
                    (Component::Global(_), Component::Global(_)) => unreachable!("key comes from an explicit map"),
                };
                (p, c)
            })
            .collect();
        FiniteAdele { components, global: &self.global * &other.global }
    }

    /// Multiplies by the diagonal rational `r`. Primes of `r` that had no
    /// explicit component receive one with `precision` digits.
    pub fn scale(&self, r: &Rational, precision: u32) -> Result<Self> {
        if r.is_zero() {
            return Err(Error::ZeroInput);
        }
        let mut components: BTreeMap<Prime, TruncatedPadic> =
            self.components.iter().map(|(p, c)| (*p, c.mul_rational(r))).collect();
        let global = &self.global * r;
        for p in factor_rational(r)?.into_keys() {
            components.entry(p).or_insert_with(|| TruncatedPadic::from_rational(&global, p, precision).expect("precision >= 1"));
        }
        Ok(FiniteAdele { components, global })
    }

    /// `Φ(a) = (v_p(a_p))_p`, with `v_p(0) = ∞`.
    pub fn to_divisor(&self) -> ArithmeticDivisor {
        ArithmeticDivisor::new(self.components.iter().map(|(p, c)| (*p, c.valuation())), DefaultCoeff::Zero)
    }

    /// Whether `q a ∈ Ẑ`, i.e. `q` lies in the rank-one group classified by `a`.
    pub fn contains(&self, q: &Rational) -> bool {
        if q.is_zero() {
            return true;
        }
        for (p, c) in &self.components {
            if let Some(v) = c.finite_valuation() {
                if v + valuation(q, *p).expect("nonzero") < 0 {
                    return false;
                }
            }
        }
        let mut den = q.denom().clone();
        for p in self.components.keys() {
            let bp = p.big_int();
            while den.is_multiple_of(&bp) {
                den /= &bp;
            }
        }
        den.is_one()
    }

    /// `ψ(a)(q) = Σ_p {q a_p}_p mod 1`.
    pub fn psi_pair(&self, q: &Rational) -> Result<QmodZ> {
        if q.is_zero() {
            return Ok(QmodZ::zero());
        }
        let mut total = Rational::zero();
        let y = q * &self.global;
        // Σ_p {y}_p ≡ y over all primes; the explicit primes are corrected below
        total += &y;
        for (p, c) in &self.components {
            total -= local_fraction(&y, *p);
            if let Some(v) = c.finite_valuation() {
                let w = v + valuation(q, *p).expect("nonzero");
                if w < 0 {
                    let digits = (-w) as u32;
                    let unit = c.unit_mod(digits)?;
                    let (_, q_unit) = split_prime(q, *p).expect("nonzero");
                    let m = p.pow(digits);
                    let r = (unit * rational_mod(&q_unit, &m).expect("unit")) % &m;
                    total += Rational::new(BigInt::from(r), BigInt::from(m));
                }
            }
        }
        Ok(QmodZ::new(&total))
    }

    /// The smallest stored precision, if any component is truncated.
    pub fn min_precision(&self) -> Option<u32> {
        self.components.values().filter_map(|c| c.precision()).min()
    }
}

/// `{y}_p`: the `p`-power-denominator part of the exact rational `y`.
pub fn local_fraction(y: &Rational, p: Prime) -> Rational {
    match split_prime(y, p) {
        Some((v, w)) if v < 0 => {
            let m = p.pow((-v) as u32);
            let r = rational_mod(&w, &m).expect("unit");
            Rational::new(BigInt::from(r), BigInt::from(m))
        }
        _ => Rational::zero(),
    }
}

/// A rational adele `(a_f, a_∞)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Adele {
    pub finite: FiniteAdele,
    pub infinite: Rational,
    pub real_lift: Option<f64>,
}

impl Adele {
    pub fn new(finite: FiniteAdele, infinite: Rational) -> Self {
        Adele { finite, infinite, real_lift: None }
    }

    pub fn one() -> Self {
        Adele::new(FiniteAdele::one(), Rational::one())
    }

    /// Diagonal image of `q ≠ 0`.
    pub fn diagonal(q: &Rational, precision: u32) -> Result<Self> {
        Ok(Adele::new(FiniteAdele::diagonal(q, precision)?, q.clone()))
    }

    pub fn with_real_lift(mut self) -> Self {
        self.real_lift = self.infinite.to_f64();
        self
    }

    pub fn multiply(&self, other: &Self) -> Self {
        let infinite = &self.infinite * &other.infinite;
        let real_lift = match (self.real_lift, other.real_lift) {
            (None, None) => None,
            _ => infinite.to_f64(),
        };
        Adele { finite: self.finite.multiply(&other.finite), infinite, real_lift }
    }

    /// Diagonal action of `r ∈ Q^×`.
    pub fn scale(&self, r: &Rational, precision: u32) -> Result<Self> {
        let infinite = &self.infinite * r;
        let real_lift = self.real_lift.and_then(|_| infinite.to_f64());
        Ok(Adele { finite: self.finite.scale(r, precision)?, infinite, real_lift })
    }

    /// Canonical representative of the class in `Y_Q = Q^× \ A`.
    ///
    /// Chooses `r` so that `r a` has valuation zero at every explicit prime
    /// with a nonzero component, a positive archimedean component, and an
    /// archimedean component free of the primes where `a_f` vanishes (those
    /// primes act trivially on the finite part). What is left is the unit
    /// part of the explicit components, which is the `Ẑ^×` ambiguity removed
    /// by [`Adele::xq_class`].
    pub fn yq_reduce(&self) -> YqReduction {
        let mut r = Rational::one();
        let mut zero_locus = BTreeSet::new();
        for (p, c) in self.finite.components() {
            match c.finite_valuation() {
                Some(v) => r *= pow_rational(*p, -v),
                None => {
                    zero_locus.insert(*p);
                }
            }
        }
        if !self.infinite.is_zero() {
            if self.infinite.is_negative() {
                r = -r;
            }
            let arch = &self.infinite * &r;
            for p in &zero_locus {
                if let Some(v) = valuation(&arch, *p) {
                    r *= pow_rational(*p, -v);
                }
            }
        }
        // r only involves explicit primes, so no new components appear
        let representative = self.scale(&r, 1).expect("r is nonzero");
        YqReduction { representative, factor: r, zero_locus }
    }

    /// The class in `X_Q ≅ Pic`, built from `(Φ(a_f), |a_∞|)`.
    pub fn xq_class(&self) -> PicClass {
        PicClass::from_data(&self.finite.to_divisor(), &self.infinite.abs()).expect("|a_∞| is non-negative")
    }
}

/// Output of [`Adele::yq_reduce`]: `representative = factor · a`.
#[derive(Debug, Clone)]
pub struct YqReduction {
    pub representative: Adele,
    pub factor: Rational,
    pub zero_locus: BTreeSet<Prime>,
}

impl YqReduction {
    /// Whether two reductions agree after discarding explicit unit digits,
    /// i.e. the original adeles are equal in `Q^× \ A / Ẑ^×`.
    pub fn agrees_up_to_units(&self, other: &YqReduction) -> bool {
        self.zero_locus == other.zero_locus && self.representative.infinite == other.representative.infinite
    }
}

#[derive(Serialize, Deserialize)]
struct PadicRepr {
    v: ExtInt,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    unit: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    prec: Option<u32>,
}

#[derive(Serialize, Deserialize)]
struct AdeleRepr {
    finite: BTreeMap<String, PadicRepr>,
    #[serde(rename = "inf")]
    infinite: String,
    #[serde(default = "one_string", skip_serializing_if = "is_one_string")]
    global: String,
}

fn one_string() -> String {
    "1".to_string()
}

fn is_one_string(s: &String) -> bool {
    s == "1"
}

impl AdeleRepr {
    fn from_finite(a: &FiniteAdele, infinite: &Rational) -> Self {
        let finite = a
            .components
            .iter()
            .map(|(p, c)| {
                let repr = match &c.value {
                    PadicValue::Zero => PadicRepr { v: ExtInt::Inf, unit: None, prec: None },
                    PadicValue::Nonzero { valuation, unit, precision } => PadicRepr {
                        v: ExtInt::from_i64(*valuation),
                        unit: Some(unit.to_string()),
                        prec: Some(*precision),
                    },
                };
                (p.to_string(), repr)
            })
            .collect();
        AdeleRepr {
            finite,
            infinite: arith::format_rational(infinite),
            global: arith::format_rational(&a.global),
        }
    }

    fn into_parts(self) -> Result<(FiniteAdele, Rational)> {
        let mut comps = Vec::new();
        for (p, r) in self.finite {
            let p = Prime::new(p.parse().map_err(|_| Error::Parse(format!("bad prime {p:?}")))?)?;
            let c = match r.v {
                ExtInt::Inf => TruncatedPadic::zero(p),
                ExtInt::Finite(v) => {
                    let v = v.to_i64().ok_or_else(|| Error::Parse("valuation out of range".into()))?;
                    let unit: BigUint = r
                        .unit
                        .ok_or_else(|| Error::Parse("missing unit".into()))?
                        .parse()
                        .map_err(|_| Error::Parse("bad unit digits".into()))?;
                    TruncatedPadic::new(p, v, unit, r.prec.ok_or_else(|| Error::Parse("missing prec".into()))?)?
                }
            };
            comps.push(c);
        }
        let global = arith::parse_rational(&self.global)?;
        Ok((FiniteAdele::new(comps, global)?, arith::parse_rational(&self.infinite)?))
    }
}

impl Serialize for Adele {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        AdeleRepr::from_finite(&self.finite, &self.infinite).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Adele {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Adele, D::Error> {
        let (finite, infinite) = AdeleRepr::deserialize(d)?.into_parts().map_err(serde::de::Error::custom)?;
        Ok(Adele::new(finite, infinite))
    }
}

/// JSON helpers for a finite adele embedded in a larger document (frames).
pub(crate) mod finite_json {
    use super::*;

    pub fn to_value(a: &FiniteAdele) -> (BTreeMap<String, serde_json::Value>, String) {
        let repr = AdeleRepr::from_finite(a, &Rational::zero());
        let finite = repr
            .finite
            .into_iter()
            .map(|(k, v)| (k, serde_json::to_value(v).expect("serializable")))
            .collect();
        (finite, repr.global)
    }

    pub fn from_value(finite: BTreeMap<String, serde_json::Value>, global: String) -> Result<FiniteAdele> {
        let finite = finite
            .into_iter()
            .map(|(k, v)| Ok((k, serde_json::from_value(v).map_err(|e| Error::Parse(e.to_string()))?)))
            .collect::<Result<BTreeMap<String, PadicRepr>>>()?;
        AdeleRepr { finite, infinite: "0".into(), global }.into_parts().map(|(f, _)| f)
    }
}
