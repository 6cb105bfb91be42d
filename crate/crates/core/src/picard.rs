//! The metrized Picard monoid of `Spec Z` compactified at `∞`, its Jacobian
//! quotient and the Abel–Jacobi map.
//!
//! A class is stored by the invariant subgroup `I = scale · Z_S ⊂ R` of the
//! paper's value-spectrum description: the singular locus `S` (primes at which
//! the underlying group is divisible) and the positive rational `scale`,
//! reduced modulo the multiplicative group generated by `S`. Reduction strips
//! the `S`-primes from the factorization of the scale, which makes class
//! equality structural even when `⟨S⟩` is dense in `R_+^×`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{pow_rational, strip_prime, valuation, Prime, Rational};
use crate::divisors::{ArithmeticDivisor, PrimeSet};
use crate::error::{Error, Result};
use crate::par::{self, Strategy};

/// A class in `Pic`, in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PicClass {
    #[serde(rename = "s")]
    s_locus: PrimeSet,
    #[serde(with = "crate::serde_util::rational")]
    scale: Rational,
    degenerate: bool,
}

/// Removes the primes of `s` from `x` (for cofinite `s`, keeps only the
/// excluded primes).
fn reduce_scale(x: &Rational, s: &PrimeSet) -> Rational {
    if x.is_zero() {
        return Rational::zero();
    }
    if s.complemented {
        let mut out = Rational::one();
        for p in &s.members {
            if let Some(v) = valuation(x, *p) {
                out *= pow_rational(*p, v);
            }
        }
        out
    } else {
        s.members.iter().fold(x.clone(), |acc, p| strip_prime(&acc, *p))
    }
}

impl PicClass {
    /// The class of `(L(D), λ|·|)`.
    pub fn from_data(d: &ArithmeticDivisor, lambda: &Rational) -> Result<PicClass> {
        if lambda.is_negative() {
            return Err(Error::NegativeScale);
        }
        let nf = d.class_normalize();
        // L(D) = witness^{-1} Z_S, so the invariant subgroup is (λ / witness) Z_S
        let scale = reduce_scale(&(lambda / &nf.witness), &nf.s);
        Ok(PicClass { degenerate: scale.is_zero(), s_locus: nf.s, scale })
    }

    /// `(Z, |·|)`.
    pub fn trivial() -> PicClass {
        PicClass { s_locus: PrimeSet::empty(), scale: Rational::one(), degenerate: false }
    }

    /// Canonical class for `(S, λ)` given directly.
    pub fn new(s_locus: PrimeSet, scale: &Rational) -> Result<PicClass> {
        if scale.is_negative() {
            return Err(Error::NegativeScale);
        }
        let scale = reduce_scale(scale, &s_locus);
        Ok(PicClass { degenerate: scale.is_zero(), s_locus, scale })
    }

    pub fn s_locus(&self) -> &PrimeSet {
        &self.s_locus
    }

    pub fn scale(&self) -> &Rational {
        &self.scale
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// Tensor product: union of loci, product of scales.
    pub fn product(&self, other: &PicClass) -> PicClass {
        let s_locus = self.s_locus.union(&other.s_locus);
        let scale = reduce_scale(&(&self.scale * &other.scale), &s_locus);
        PicClass { degenerate: self.degenerate || other.degenerate, s_locus, scale }
    }

    /// Rescales the metric by `mu > 0`.
    pub fn rescale(&self, mu: &Rational) -> Result<PicClass> {
        if !mu.is_positive() {
            return Err(Error::ZeroScale);
        }
        PicClass::new(self.s_locus.clone(), &(&self.scale * mu))
    }

    /// `S(𝒟) ∩ [0, bound]` restricted to denominators `Π p^{k_p}` with
    /// `k_p <= caps[p]` for `p ∈ S`.
    ///
    /// The sample is the arithmetic progression `{k · g : 0 <= k <= count}`
    /// with `g = scale / Π p^{caps[p]}`; it is returned in that closed form.
    pub fn value_spectrum_sample(&self, bound: &Rational, caps: &BTreeMap<Prime, u32>) -> Result<SpectrumSample> {
        if self.degenerate {
            return Ok(SpectrumSample::zero_only(bound.clone()));
        }
        let denominator = self.cap_denominator(caps)?;
        let step = &self.scale / Rational::from_integer(denominator);
        let count = if bound.is_negative() { None } else { Some((bound / &step).floor().to_integer()) };
        Ok(SpectrumSample { step, count, bound: bound.clone() })
    }

    fn cap_denominator(&self, caps: &BTreeMap<Prime, u32>) -> Result<BigInt> {
        if self.s_locus.complemented {
            let missing = (2u64..)
                .filter_map(|n| Prime::new(n).ok())
                .find(|p| !self.s_locus.members.contains(p) && !caps.contains_key(p))
                .expect("infinitely many primes");
            return Err(Error::MissingCap(missing.get()));
        }
        let mut den = BigInt::one();
        for p in &self.s_locus.members {
            let k = *caps.get(p).ok_or(Error::MissingCap(p.get()))?;
            den *= num_traits::pow(p.big_int(), k as usize);
        }
        Ok(den)
    }

    /// Brute-force enumeration of the same sample: every exponent vector
    /// `(k_p)` and every numerator `m`, merged, sorted and deduplicated.
    /// Intended as a cross-check of [`PicClass::value_spectrum_sample`] on
    /// small inputs.
    pub fn value_spectrum_enumerate(
        &self,
        bound: &Rational,
        caps: &BTreeMap<Prime, u32>,
        strategy: Strategy,
    ) -> Result<Vec<Rational>> {
        if self.degenerate {
            return Ok(vec![Rational::zero()]);
        }
        self.cap_denominator(caps)?;
        let primes: Vec<(Prime, u32)> = self.s_locus.members.iter().map(|p| (*p, caps[p])).collect();
        let mut vectors: Vec<Vec<u32>> = vec![Vec::new()];
        for (_, cap) in &primes {
            vectors = vectors
                .into_iter()
                .flat_map(|v| {
                    (0..=*cap).map(move |k| {
                        let mut w = v.clone();
                        w.push(k);
                        w
                    })
                })
                .collect();
        }
        let chunks = par::map(strategy, &vectors, |ks| {
            let mut d = Rational::one();
            for ((p, _), k) in primes.iter().zip(ks) {
                d *= pow_rational(*p, *k as i64);
            }
            let step = &self.scale / d;
            let count = (bound / &step).floor().to_integer();
            let mut out = Vec::new();
            let mut m = BigInt::zero();
            while m <= count {
                out.push(&step * Rational::from_integer(m.clone()));
                m += 1;
            }
            out
        });
        let mut all: Vec<Rational> = chunks.into_iter().flatten().collect();
        all.sort();
        all.dedup();
        Ok(all)
    }

    /// Image in the Jacobian: forget the scale, keep whether it vanished.
    pub fn jac_project(&self) -> JacClass {
        JacClass {
            s_locus: self.s_locus.clone(),
            arch: if self.degenerate { ArchFlag::Infinite } else { ArchFlag::Finite },
        }
    }
}

impl fmt::Display for PicClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(S = {}, scale = {})", self.s_locus, crate::arith::format_rational(&self.scale))
    }
}

/// `S(𝒟) ∩ [0, bound]` within denominator caps, as `{k · step : 0 <= k <= count}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectrumSample {
    #[serde(with = "crate::serde_util::rational")]
    pub step: Rational,
    /// `None` when `bound < 0` (empty sample).
    pub count: Option<BigInt>,
    #[serde(with = "crate::serde_util::rational")]
    pub bound: Rational,
}

impl SpectrumSample {
    fn zero_only(bound: Rational) -> Self {
        let count = if bound.is_negative() { None } else { Some(BigInt::zero()) };
        SpectrumSample { step: Rational::zero(), count, bound }
    }

    pub fn len(&self) -> usize {
        match &self.count {
            None => 0,
            Some(c) if self.step.is_zero() => usize::from(!c.is_negative()),
            Some(c) => c.to_usize().map_or(usize::MAX, |c| c + 1),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, x: &Rational) -> bool {
        let Some(count) = &self.count else { return false };
        if x.is_negative() || x > &self.bound {
            return false;
        }
        if self.step.is_zero() {
            return x.is_zero();
        }
        let k = x / &self.step;
        k.is_integer() && &k.to_integer() <= count
    }

    /// Sorted elements. Materializes the whole progression.
    pub fn elements(&self) -> Vec<Rational> {
        let Some(count) = &self.count else { return Vec::new() };
        if self.step.is_zero() {
            return vec![Rational::zero()];
        }
        let n = count.to_u64().expect("sample too large to materialize");
        (0..=n).map(|k| &self.step * Rational::from_integer(BigInt::from(k))).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArchFlag {
    Finite,
    Infinite,
}

/// A class in the Jacobian `Pic / R_+^×`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct JacClass {
    #[serde(rename = "s")]
    pub s_locus: PrimeSet,
    pub arch: ArchFlag,
}

impl JacClass {
    pub fn trivial() -> JacClass {
        JacClass { s_locus: PrimeSet::empty(), arch: ArchFlag::Finite }
    }

    /// `∞` is absorbing for the archimedean flag.
    pub fn product(&self, other: &JacClass) -> JacClass {
        let arch = if self.arch == ArchFlag::Infinite || other.arch == ArchFlag::Infinite {
            ArchFlag::Infinite
        } else {
            ArchFlag::Finite
        };
        JacClass { s_locus: self.s_locus.union(&other.s_locus), arch }
    }
}

/// A point of `Spec Z ∪ {∞}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurvePoint {
    Generic,
    Finite(Prime),
    Archimedean,
}

impl std::str::FromStr for CurvePoint {
    type Err = Error;
    fn from_str(s: &str) -> Result<CurvePoint> {
        match s.trim() {
            "eta" | "generic" => Ok(CurvePoint::Generic),
            "inf" | "infinity" => Ok(CurvePoint::Archimedean),
            other => {
                let n: u64 = other.parse().map_err(|_| Error::Parse(format!("not a point: {other:?}")))?;
                Ok(CurvePoint::Finite(Prime::new(n)?))
            }
        }
    }
}

/// The extended Abel–Jacobi map into the Jacobian.
pub fn abel_jacobi(point: CurvePoint) -> JacClass {
    match point {
        CurvePoint::Generic => JacClass::trivial(),
        CurvePoint::Finite(p) => JacClass { s_locus: PrimeSet::finite([p]), arch: ArchFlag::Finite },
        CurvePoint::Archimedean => JacClass { s_locus: PrimeSet::empty(), arch: ArchFlag::Infinite },
    }
}

/// `Θ(S)`: the class of the localization `Z_S`.
pub fn abel_jacobi_set(s: &PrimeSet) -> JacClass {
    JacClass { s_locus: s.clone(), arch: ArchFlag::Finite }
}

/// Sections `x ∈ L(D)` with `λ|x| <= 1`, in increasing order.
///
/// `L(D) = g Z` with `g = Π p^{-n_p}`, so there are `2⌊1/(λ g)⌋ + 1` of them.
pub fn unit_ball_sections(d: &ArithmeticDivisor, lambda: &Rational) -> Result<Vec<Rational>> {
    let g = d.section_generator()?;
    if lambda.is_negative() {
        return Err(Error::NegativeScale);
    }
    if lambda.is_zero() {
        return Err(Error::ZeroScale);
    }
    let k = (Rational::one() / (lambda * &g)).floor().to_integer();
    let k = k.to_i64().ok_or_else(|| Error::InvalidArgument("unit ball too large to list".into()))?;
    Ok((-k..=k).map(|j| &g * Rational::from_integer(BigInt::from(j))).collect())
}
