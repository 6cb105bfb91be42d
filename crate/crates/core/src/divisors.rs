//! Arithmetic divisors on `Spec Z`: maps `p -> Z ∪ {∞}` with finitely many
//! negative values. A divisor `D` classifies the rank-one group
//! `L(D) = {x ∈ Q : v_p(x) >= -n_p for all p}`; addition of divisors is the
//! tensor product of the corresponding groups.
//!
//! The decidable subclass handled here is the eventually-constant one:
//! finitely many explicit coefficients over a default of `0` or `∞`. This
//! covers fractional ideals, `Z[1/p]`, `Z_S` and `Q` itself. Divisors given by
//! an arbitrary exponent rule are available through [`OracleDivisor`], which
//! supports addition and membership but not equality.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Add;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith::{self, factor_rational, pow_rational, valuation, Prime, Rational};
use crate::error::{Error, Result};

/// An integer or `+∞`. Addition absorbs into `∞`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ExtInt {
    Finite(BigInt),
    Inf,
}

impl ExtInt {
    pub fn zero() -> ExtInt {
        ExtInt::Finite(BigInt::zero())
    }

    pub fn from_i64(n: i64) -> ExtInt {
        ExtInt::Finite(BigInt::from(n))
    }

    pub fn is_inf(&self) -> bool {
        matches!(self, ExtInt::Inf)
    }

    pub fn finite(&self) -> Option<&BigInt> {
        match self {
            ExtInt::Finite(n) => Some(n),
            ExtInt::Inf => None,
        }
    }

    pub fn checked_neg(&self) -> Result<ExtInt> {
        match self {
            ExtInt::Finite(n) => Ok(ExtInt::Finite(-n)),
            ExtInt::Inf => Err(Error::InfiniteCoefficient),
        }
    }
}

impl Add for &ExtInt {
    type Output = ExtInt;
    fn add(self, rhs: &ExtInt) -> ExtInt {
        match (self, rhs) {
            (ExtInt::Finite(a), ExtInt::Finite(b)) => ExtInt::Finite(a + b),
            _ => ExtInt::Inf,
        }
    }
}

impl PartialOrd for ExtInt {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtInt {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering::*;
        match (self, other) {
            (ExtInt::Finite(a), ExtInt::Finite(b)) => a.cmp(b),
            (ExtInt::Finite(_), ExtInt::Inf) => Less,
            (ExtInt::Inf, ExtInt::Finite(_)) => Greater,
            (ExtInt::Inf, ExtInt::Inf) => Equal,
        }
    }
}

impl fmt::Display for ExtInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtInt::Finite(n) => write!(f, "{n}"),
            ExtInt::Inf => write!(f, "inf"),
        }
    }
}

impl FromStr for ExtInt {
    type Err = Error;
    fn from_str(s: &str) -> Result<ExtInt> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") {
            return Ok(ExtInt::Inf);
        }
        BigInt::from_str(s)
            .map(ExtInt::Finite)
            .map_err(|_| Error::Parse(format!("not an extended integer: {s:?}")))
    }
}

impl Serialize for ExtInt {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ExtInt {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<ExtInt, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The coefficient taken by every prime without an explicit entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DefaultCoeff {
    Zero,
    Inf,
}

impl DefaultCoeff {
    pub fn value(self) -> ExtInt {
        match self {
            DefaultCoeff::Zero => ExtInt::zero(),
            DefaultCoeff::Inf => ExtInt::Inf,
        }
    }
}

/// A set of primes, either finite or cofinite.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct PrimeSet {
    /// The listed primes: members when `complemented` is false, the excluded
    /// primes when it is true.
    pub members: BTreeSet<Prime>,
    pub complemented: bool,
}

impl PrimeSet {
    pub fn empty() -> PrimeSet {
        PrimeSet::default()
    }

    pub fn all() -> PrimeSet {
        PrimeSet { members: BTreeSet::new(), complemented: true }
    }

    pub fn finite(primes: impl IntoIterator<Item = Prime>) -> PrimeSet {
        PrimeSet { members: primes.into_iter().collect(), complemented: false }
    }

    pub fn all_except(primes: impl IntoIterator<Item = Prime>) -> PrimeSet {
        PrimeSet { members: primes.into_iter().collect(), complemented: true }
    }

    pub fn contains(&self, p: Prime) -> bool {
        self.members.contains(&p) != self.complemented
    }

    pub fn is_empty(&self) -> bool {
        !self.complemented && self.members.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        !self.complemented
    }

    pub fn complement(&self) -> PrimeSet {
        PrimeSet { members: self.members.clone(), complemented: !self.complemented }
    }

    pub fn union(&self, other: &PrimeSet) -> PrimeSet {
        match (self.complemented, other.complemented) {
            (false, false) => PrimeSet::finite(self.members.union(&other.members).copied()),
            (true, true) => PrimeSet::all_except(self.members.intersection(&other.members).copied()),
            (true, false) => PrimeSet::all_except(self.members.difference(&other.members).copied()),
            (false, true) => PrimeSet::all_except(other.members.difference(&self.members).copied()),
        }
    }

    pub fn intersection(&self, other: &PrimeSet) -> PrimeSet {
        self.complement().union(&other.complement()).complement()
    }
}

impl fmt::Display for PrimeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list: Vec<String> = self.members.iter().map(|p| p.to_string()).collect();
        if self.complemented {
            write!(f, "all primes except {{{}}}", list.join(", "))
        } else {
            write!(f, "{{{}}}", list.join(", "))
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PrimeSetRepr {
    Finite(Vec<Prime>),
    Cofinite { complement: Vec<Prime> },
}

impl Serialize for PrimeSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let list: Vec<Prime> = self.members.iter().copied().collect();
        if self.complemented {
            PrimeSetRepr::Cofinite { complement: list }.serialize(s)
        } else {
            PrimeSetRepr::Finite(list).serialize(s)
        }
    }
}

impl<'de> Deserialize<'de> for PrimeSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<PrimeSet, D::Error> {
        Ok(match PrimeSetRepr::deserialize(d)? {
            PrimeSetRepr::Finite(v) => PrimeSet::finite(v),
            PrimeSetRepr::Cofinite { complement } => PrimeSet::all_except(complement),
        })
    }
}

/// An eventually-constant arithmetic divisor in canonical sparse form:
/// no explicit entry equals the default, so structural equality is equality
/// of divisors.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ArithmeticDivisor {
    explicit: BTreeMap<Prime, ExtInt>,
    default: DefaultCoeff,
}

/// Result of [`ArithmeticDivisor::class_normalize`]: `D = Θ(S) + div(witness)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassNormalForm {
    pub s: PrimeSet,
    #[serde(with = "crate::serde_util::rational")]
    pub witness: Rational,
}

impl ArithmeticDivisor {
    /// Builds a divisor, dropping entries equal to the default.
    pub fn new(entries: impl IntoIterator<Item = (Prime, ExtInt)>, default: DefaultCoeff) -> Self {
        let base = default.value();
        let explicit = entries.into_iter().filter(|(_, e)| *e != base).collect();
        ArithmeticDivisor { explicit, default }
    }

    /// The zero divisor; its section group is `Z`.
    pub fn zero() -> Self {
        ArithmeticDivisor { explicit: BTreeMap::new(), default: DefaultCoeff::Zero }
    }

    pub fn explicit(&self) -> &BTreeMap<Prime, ExtInt> {
        &self.explicit
    }

    pub fn default_coeff(&self) -> DefaultCoeff {
        self.default
    }

    pub fn coeff(&self, p: Prime) -> ExtInt {
        self.explicit.get(&p).cloned().unwrap_or_else(|| self.default.value())
    }

    /// True when every coefficient is finite and the default is 0.
    pub fn is_finite_type(&self) -> bool {
        self.default == DefaultCoeff::Zero && self.explicit.values().all(|e| !e.is_inf())
    }

    /// Principal divisor `div(q) = Σ v_p(q)[p]`.
    pub fn from_rational(q: &Rational) -> Result<Self> {
        if q.is_zero() {
            return Err(Error::ZeroInput);
        }
        let entries = factor_rational(q)?.into_iter().map(|(p, e)| (p, ExtInt::from_i64(e)));
        Ok(Self::new(entries, DefaultCoeff::Zero))
    }

    /// Coefficientwise sum; `∞` absorbs.
    pub fn add(&self, other: &Self) -> Self {
        let default = if self.default == DefaultCoeff::Inf || other.default == DefaultCoeff::Inf {
            DefaultCoeff::Inf
        } else {
            DefaultCoeff::Zero
        };
        let keys: BTreeSet<Prime> = self.explicit.keys().chain(other.explicit.keys()).copied().collect();
        let entries = keys.into_iter().map(|p| (p, &self.coeff(p) + &other.coeff(p)));
        Self::new(entries, default)
    }

    pub fn negate(&self) -> Result<Self> {
        if self.default == DefaultCoeff::Inf {
            return Err(Error::InfiniteCoefficient);
        }
        let entries = self
            .explicit
            .iter()
            .map(|(p, e)| Ok((*p, e.checked_neg()?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(entries, DefaultCoeff::Zero))
    }

    /// Membership `x ∈ L(D)`, i.e. `v_p(x) >= -n_p` at every prime.
    pub fn sections_contains(&self, x: &Rational) -> bool {
        if x.is_zero() {
            return true;
        }
        for (p, n) in &self.explicit {
            if let ExtInt::Finite(n) = n {
                let v = valuation(x, *p).expect("nonzero");
                if BigInt::from(v) < -n {
                    return false;
                }
            }
        }
        match self.default {
            DefaultCoeff::Inf => true,
            DefaultCoeff::Zero => {
                // every prime outside the explicit set needs v_p(x) >= 0
                let mut den = x.denom().clone();
                for p in self.explicit.keys() {
                    let bp = p.big_int();
                    while (&den % &bp).is_zero() {
                        den /= &bp;
                    }
                }
                den.is_one()
            }
        }
    }

    /// Divisor of the subgroup of `Q` generated by `gens`:
    /// `n_p = max_g(-v_p(g))` over the nonzero generators.
    pub fn from_generators(gens: &[Rational]) -> Result<Self> {
        let mut exps: BTreeMap<Prime, i64> = BTreeMap::new();
        let nonzero: Vec<&Rational> = gens.iter().filter(|g| !g.is_zero()).collect();
        if nonzero.is_empty() {
            return Err(Error::AllZero);
        }
        let factored = nonzero.iter().map(|g| factor_rational(g)).collect::<Result<Vec<_>>>()?;
        let primes: BTreeSet<Prime> = factored.iter().flat_map(|f| f.keys().copied()).collect();
        for p in primes {
            let n = factored.iter().map(|f| -f.get(&p).copied().unwrap_or(0)).max().unwrap_or(0);
            exps.insert(p, n);
        }
        Ok(Self::new(exps.into_iter().map(|(p, e)| (p, ExtInt::from_i64(e))), DefaultCoeff::Zero))
    }

    /// `Θ(S)`: coefficient `∞` on `S`, `0` elsewhere. Its section group is the
    /// localization `Z_S = Z[1/p : p ∈ S]`.
    pub fn from_localization(s: &PrimeSet) -> Self {
        if s.complemented {
            Self::new(s.members.iter().map(|p| (*p, ExtInt::zero())), DefaultCoeff::Inf)
        } else {
            Self::new(s.members.iter().map(|p| (*p, ExtInt::Inf)), DefaultCoeff::Zero)
        }
    }

    /// The primes carrying coefficient `∞`.
    pub fn inf_locus(&self) -> PrimeSet {
        match self.default {
            DefaultCoeff::Zero => {
                PrimeSet::finite(self.explicit.iter().filter(|(_, e)| e.is_inf()).map(|(p, _)| *p))
            }
            DefaultCoeff::Inf => PrimeSet::all_except(self.explicit.keys().copied()),
        }
    }

    /// A positive `q` with `self = other + div(q)`, if the two are linearly
    /// equivalent.
    pub fn classes_equivalent(&self, other: &Self) -> Option<Rational> {
        if self.default != other.default {
            return None;
        }
        let mut q = Rational::one();
        let keys: BTreeSet<Prime> = self.explicit.keys().chain(other.explicit.keys()).copied().collect();
        for p in keys {
            match (self.coeff(p), other.coeff(p)) {
                (ExtInt::Finite(a), ExtInt::Finite(b)) => {
                    let d = a - b;
                    if !d.is_zero() {
                        q *= pow_rational(p, i64::try_from(&d).ok()?);
                    }
                }
                (ExtInt::Inf, ExtInt::Inf) => {}
                _ => return None,
            }
        }
        Some(q)
    }

    /// Splits `D = Θ(S) + div(q)` with `S` the `∞`-locus and `q > 0`.
    pub fn class_normalize(&self) -> ClassNormalForm {
        let mut witness = Rational::one();
        for (p, e) in &self.explicit {
            if let ExtInt::Finite(n) = e {
                if !n.is_zero() {
                    let n = i64::try_from(n).expect("coefficient exceeds i64");
                    witness *= pow_rational(*p, n);
                }
            }
        }
        ClassNormalForm { s: self.inf_locus(), witness }
    }

    /// Whether `D + D ~ D`. Every eventually-constant divisor passes; the
    /// check exists to exercise that classification.
    pub fn is_idempotent_class(&self) -> bool {
        self.add(self).classes_equivalent(self).is_some()
    }

    /// Generator `Π p^{-n_p}` of `L(D)` when `D` is of finite type.
    pub fn section_generator(&self) -> Result<Rational> {
        if !self.is_finite_type() {
            return Err(Error::InfiniteType);
        }
        let mut g = Rational::one();
        for (p, e) in &self.explicit {
            let n = i64::try_from(e.finite().expect("finite type")).expect("coefficient exceeds i64");
            g *= pow_rational(*p, -n);
        }
        Ok(g)
    }
}

impl fmt::Display for ArithmeticDivisor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body: Vec<String> = self.explicit.iter().map(|(p, e)| format!("{p}:{e}")).collect();
        let default = match self.default {
            DefaultCoeff::Zero => "0",
            DefaultCoeff::Inf => "inf",
        };
        write!(f, "{{{}; default:{default}}}", body.join(", "))
    }
}

impl FromStr for ArithmeticDivisor {
    type Err = Error;

    /// Parses `{p1:e1, p2:inf, ...; default:0|inf}`. The default clause may be
    /// omitted, in which case it is `0`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::Parse(format!("divisor {s:?}: {why}"));
        let inner = s
            .trim()
            .strip_prefix('{')
            .and_then(|r| r.strip_suffix('}'))
            .ok_or_else(|| bad("missing braces"))?;
        let (body, default) = match inner.split_once(';') {
            Some((b, d)) => {
                let d = d.trim().strip_prefix("default").ok_or_else(|| bad("expected default clause"))?;
                let d = d.trim_start().strip_prefix(':').ok_or_else(|| bad("expected ':'"))?.trim();
                let default = match d {
                    "0" => DefaultCoeff::Zero,
                    "inf" => DefaultCoeff::Inf,
                    _ => return Err(bad("default must be 0 or inf")),
                };
                (b, default)
            }
            None => (inner, DefaultCoeff::Zero),
        };
        let mut entries = BTreeMap::new();
        for item in body.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (p, e) = item.split_once(':').ok_or_else(|| bad("entry must be p:e"))?;
            let p: u64 = p.trim().parse().map_err(|_| bad("bad prime"))?;
            let p = Prime::new(p)?;
            if entries.insert(p, e.parse::<ExtInt>()?).is_some() {
                return Err(bad("repeated prime"));
            }
        }
        Ok(Self::new(entries, default))
    }
}

#[derive(Serialize, Deserialize)]
struct DivisorRepr {
    explicit: BTreeMap<String, ExtInt>,
    default: String,
}

impl Serialize for ArithmeticDivisor {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DivisorRepr {
            explicit: self.explicit.iter().map(|(p, e)| (p.to_string(), e.clone())).collect(),
            default: self.default.value().to_string(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ArithmeticDivisor {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = DivisorRepr::deserialize(d)?;
        let default = match repr.default.as_str() {
            "0" => DefaultCoeff::Zero,
            "inf" => DefaultCoeff::Inf,
            other => return Err(D::Error::custom(format!("bad default {other:?}"))),
        };
        let mut entries = Vec::new();
        for (p, e) in repr.explicit {
            let p: u64 = p.parse().map_err(D::Error::custom)?;
            entries.push((Prime::new(p).map_err(D::Error::custom)?, e));
        }
        Ok(Self::new(entries, default))
    }
}

/// Exponent rule for a divisor that is not eventually constant.
pub trait ExponentOracle: Send + Sync {
    fn exponent(&self, p: Prime) -> ExtInt;
    /// Every prime with a negative exponent. Must be exhaustive.
    fn negative_support(&self) -> BTreeSet<Prime>;
}

/// A general divisor backed by an [`ExponentOracle`]. Addition and
/// membership are supported; equality is not decidable and is not offered.
#[derive(Clone)]
pub struct OracleDivisor {
    terms: Vec<Arc<dyn ExponentOracle>>,
}

struct FromCanonical(ArithmeticDivisor);

impl ExponentOracle for FromCanonical {
    fn exponent(&self, p: Prime) -> ExtInt {
        self.0.coeff(p)
    }
    fn negative_support(&self) -> BTreeSet<Prime> {
        self.0
            .explicit
            .iter()
            .filter(|(_, e)| matches!(e, ExtInt::Finite(n) if n.is_negative()))
            .map(|(p, _)| *p)
            .collect()
    }
}

impl OracleDivisor {
    pub fn new(oracle: Arc<dyn ExponentOracle>) -> Self {
        OracleDivisor { terms: vec![oracle] }
    }

    pub fn from_canonical(d: ArithmeticDivisor) -> Self {
        Self::new(Arc::new(FromCanonical(d)))
    }

    pub fn exponent(&self, p: Prime) -> ExtInt {
        self.terms.iter().fold(ExtInt::zero(), |acc, t| &acc + &t.exponent(p))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        OracleDivisor { terms }
    }

    fn negative_support(&self) -> BTreeSet<Prime> {
        self.terms.iter().flat_map(|t| t.negative_support()).collect()
    }

    pub fn sections_contains(&self, x: &Rational) -> Result<bool> {
        if x.is_zero() {
            return Ok(true);
        }
        // outside supp(x) the condition reads n_p >= 0, which can only fail on
        // the declared negative support
        let mut check: BTreeSet<Prime> = factor_rational(x)?.into_keys().collect();
        check.extend(self.negative_support());
        Ok(check.into_iter().all(|p| match self.exponent(p) {
            ExtInt::Inf => true,
            ExtInt::Finite(n) => BigInt::from(valuation(x, p).expect("nonzero")) >= -n,
        }))
    }
}

impl fmt::Debug for OracleDivisor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OracleDivisor({} terms)", self.terms.len())
    }
}

/// `D` with coefficient `n` at `p` (default 0). Handy in tests and examples.
pub fn single(p: u64, n: ExtInt) -> Result<ArithmeticDivisor> {
    Ok(ArithmeticDivisor::new([(Prime::new(p)?, n)], DefaultCoeff::Zero))
}

pub fn format_witness(q: &Rational) -> String {
    arith::format_rational(q)
}
