//! Abelian covers of the Picard curve from characters `(Z/mZ)^× → G`.
//!
//! A cover is given by a modulus `m` and a kernel `K ⊆ (Z/mZ)^×`; its group is
//! `G = (Z/mZ)^×/K`, which is the Galois group of the fixed field of `K`
//! inside `Q(ζ_m)`. Over an unramified prime the monodromy is the class of
//! `p` in `G`.
//!
//! The module also carries the fiber coordinates over the points of the
//! curve: the circles `C_p = R_+^×/p^Z`, the generic orbit and the absorbing
//! archimedean point, plus mapping-torus coordinates over `C_p`. Times are
//! kept as rational multiples of `log p`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::adeles::{finite_json, FiniteAdele, TruncatedPadic};
use crate::arith::{self, gcd_u64, pow_rational, split_prime, Prime, Rational};
use crate::error::{Error, Result};
use crate::picard::CurvePoint;

/// Largest modulus accepted by [`cover_from_character`].
pub const MAX_MODULUS: u64 = 1 << 20;

/// An element of the cover group, as an index into [`CoverSpec::cosets`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GroupElement(pub usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverSpec {
    modulus: u64,
    kernel: Vec<u64>,
    cosets: Vec<Vec<u64>>,
    // coset index per residue; usize::MAX for non-units
    coset_of: Vec<usize>,
    table: Vec<Vec<usize>>,
}

/// Builds `G = (Z/mZ)^× / ⟨kernel_gens⟩`. Coset `0` is the kernel itself and
/// cosets are ordered by their smallest residue.
pub fn cover_from_character(m: u64, kernel_gens: &[u64]) -> Result<CoverSpec> {
    if m == 0 {
        return Err(Error::InvalidArgument("modulus must be positive".into()));
    }
    if m > MAX_MODULUS {
        return Err(Error::InvalidArgument(format!("modulus {m} exceeds {MAX_MODULUS}")));
    }
    let units: Vec<u64> = (0..m).filter(|&a| gcd_u64(a, m) == 1).collect();
    let gens: Vec<u64> = kernel_gens.iter().map(|&g| g % m).collect();
    if let Some(&bad) = kernel_gens.iter().find(|&&g| gcd_u64(g % m, m) != 1) {
        return Err(Error::NonUnitGenerator { residue: bad, modulus: m });
    }
    let one = 1 % m;
    let mut kernel: BTreeSet<u64> = BTreeSet::from([one]);
    let mut frontier = vec![one];
    while let Some(x) = frontier.pop() {
        for &g in &gens {
            let y = mul_mod(x, g, m);
            if kernel.insert(y) {
                frontier.push(y);
            }
        }
    }
    let kernel: Vec<u64> = kernel.into_iter().collect();
    let mut coset_of = vec![usize::MAX; m as usize];
    let mut cosets = Vec::new();
    for &a in &units {
        if coset_of[a as usize] != usize::MAX {
            continue;
        }
        let idx = cosets.len();
        let mut coset: Vec<u64> = kernel.iter().map(|&k| mul_mod(a, k, m)).collect();
        coset.sort_unstable();
        for &b in &coset {
            coset_of[b as usize] = idx;
        }
        cosets.push(coset);
    }
    let table = cosets
        .iter()
        .map(|a| cosets.iter().map(|b| coset_of[mul_mod(a[0], b[0], m) as usize]).collect())
        .collect();
    Ok(CoverSpec { modulus: m, kernel, cosets, coset_of, table })
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

impl CoverSpec {
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// The kernel, closed under multiplication and sorted.
    pub fn kernel(&self) -> &[u64] {
        &self.kernel
    }

    pub fn cosets(&self) -> &[Vec<u64>] {
        &self.cosets
    }

    pub fn order(&self) -> usize {
        self.cosets.len()
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement(0)
    }

    /// The class of a unit residue.
    pub fn element_of(&self, residue: u64) -> Result<GroupElement> {
        let r = residue % self.modulus;
        match self.coset_of[r as usize] {
            usize::MAX => Err(Error::NonUnitGenerator { residue, modulus: self.modulus }),
            i => Ok(GroupElement(i)),
        }
    }

    /// Smallest residue in the coset.
    pub fn representative(&self, g: GroupElement) -> u64 {
        self.cosets[g.0][0]
    }

    pub fn mul(&self, a: GroupElement, b: GroupElement) -> GroupElement {
        GroupElement(self.table[a.0][b.0])
    }

    pub fn element_order(&self, g: GroupElement) -> usize {
        let mut x = g;
        let mut k = 1;
        while x != self.identity() {
            x = self.mul(x, g);
            k += 1;
        }
        k
    }

    /// The map `G → G'` induced by `K ⊆ K'` (same modulus), as a list of
    /// images indexed by element.
    pub fn quotient_map(&self, coarser: &CoverSpec) -> Result<Vec<GroupElement>> {
        if self.modulus != coarser.modulus {
            return Err(Error::InvalidArgument("covers have different moduli".into()));
        }
        if self.kernel.iter().any(|k| coarser.coset_of[*k as usize] != 0) {
            return Err(Error::InvalidArgument("kernel is not contained in the coarser kernel".into()));
        }
        Ok(self.cosets.iter().map(|c| GroupElement(coarser.coset_of[c[0] as usize])).collect())
    }
}

impl fmt::Display for CoverSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "modulus {} kernel {:?} order {}", self.modulus, self.kernel, self.order())?;
        for (i, c) in self.cosets.iter().enumerate() {
            writeln!(f, "  [{i}] {c:?}")?;
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct CoverRepr<'a> {
    modulus: u64,
    kernel: &'a [u64],
    order: usize,
    cosets: &'a [Vec<u64>],
}

impl Serialize for CoverSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CoverRepr { modulus: self.modulus, kernel: &self.kernel, order: self.order(), cosets: &self.cosets }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CoverSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<CoverSpec, D::Error> {
        #[derive(Deserialize)]
        struct Input {
            modulus: u64,
            kernel: Vec<u64>,
        }
        let i = Input::deserialize(d)?;
        cover_from_character(i.modulus, &i.kernel).map_err(serde::de::Error::custom)
    }
}

/// The cover cut out by `Q(√d)`: modulus `|disc|` and kernel the residues
/// where the Kronecker symbol `(disc/·)` is `1`.
pub fn quadratic_cover(d: i64) -> Result<CoverSpec> {
    if d == 0 || d == 1 || d.abs() > 50 {
        return Err(Error::InvalidArgument(format!("need a squarefree d ≠ 0, 1 with |d| ≤ 50, got {d}")));
    }
    if (2..=7i64).any(|q| d % (q * q) == 0) {
        return Err(Error::InvalidArgument(format!("{d} is not squarefree")));
    }
    let disc = if d.rem_euclid(4) == 1 { d } else { 4 * d };
    let m = disc.unsigned_abs();
    let kernel: Vec<u64> = (1..m).filter(|&a| gcd_u64(a, m) == 1 && kronecker(disc, a) == 1).collect();
    cover_from_character(m, &kernel)
}

/// The Kronecker symbol `(a/n)` for `n ≥ 1`.
pub fn kronecker(a: i64, n: u64) -> i32 {
    let mut a = a as i128;
    let mut n = n as i128;
    let mut result = 1;
    while n % 2 == 0 {
        n /= 2;
        match a.rem_euclid(8) {
            1 | 7 => {}
            3 | 5 => result = -result,
            _ => return 0,
        }
    }
    // Jacobi symbol for odd n
    a = a.rem_euclid(n);
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if matches!(n % 8, 3 | 5) {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        a %= n;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

/// `Frob_p`: the class of `p` in `G`.
///
/// For `p | m` with trivial inertia image the prime is still unramified in
/// the cover; then `Frob_p` is the class of the residue that is `p` modulo
/// the prime-to-`p` part of `m` and `1` modulo its `p`-part.
pub fn frobenius(c: &CoverSpec, p: Prime) -> Result<GroupElement> {
    let (pe, m_prime) = split_modulus(c.modulus, p.get());
    if pe == 1 {
        return c.element_of(p.get());
    }
    if inertia_nontrivial(c, pe) {
        return Err(Error::Ramified(p.get()));
    }
    let residue = (0..c.modulus)
        .step_by(pe as usize)
        .map(|u| u + 1)
        .find(|u| u % m_prime == p.get() % m_prime)
        .expect("CRT residue exists");
    c.element_of(residue)
}

// `(p^{v_p(m)}, m / p^{v_p(m)})`
fn split_modulus(m: u64, p: u64) -> (u64, u64) {
    let mut pe = 1;
    let mut rest = m;
    while rest.is_multiple_of(p) {
        rest /= p;
        pe *= p;
    }
    (pe, rest)
}

// Whether the image of `{u ≡ 1 mod m/pe}` in `G` is nontrivial.
fn inertia_nontrivial(c: &CoverSpec, pe: u64) -> bool {
    let m = c.modulus;
    let m_prime = m / pe;
    (1..m)
        .step_by(m_prime as usize)
        .filter(|&u| gcd_u64(u, m) == 1)
        .any(|u| c.coset_of[u as usize] != 0)
}

/// `(components, degree)` of the fiber over `C_p`: the degree is the order
/// of `Frob_p` and there are `|G| / degree` circles.
pub fn fiber_decomposition(c: &CoverSpec, p: Prime) -> Result<(usize, usize)> {
    let degree = c.element_order(frobenius(c, p)?);
    Ok((c.order() / degree, degree))
}

/// Ramified places: primes `p | m` whose inertia group, the image of
/// `{u ≡ 1 mod m/p^{v_p(m)}}`, is nontrivial in `G`, plus the archimedean
/// place, which is always listed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RamifiedSet {
    pub primes: BTreeSet<Prime>,
    pub archimedean: bool,
}

impl fmt::Display for RamifiedSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.primes.iter().map(|p| p.to_string()).collect();
        if self.archimedean {
            parts.push("inf".into());
        }
        write!(f, "{{{}}}", parts.join(", "))
    }
}

pub fn ramified_set(c: &CoverSpec) -> RamifiedSet {
    let primes = arith::factor(&c.modulus.into())
        .expect("modulus fits in 64 bits")
        .into_keys()
        .filter(|p| inertia_nontrivial(c, split_modulus(c.modulus, p.get()).0))
        .collect();
    RamifiedSet { primes, archimedean: true }
}

/// A point in the fiber of the Picard cover over a point of the curve.
///
/// Over a finite prime the coordinate is `λ = c·p^e ∈ R_+^×/p^Z` with `c` a
/// positive rational free of `p` and `e ∈ [0, 1)` rational, i.e. the time
/// `log λ mod log p` kept symbolically.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "orbit", rename_all = "lowercase")]
pub enum FiberPoint {
    Generic {
        #[serde(with = "crate::serde_util::rational")]
        lambda: Rational,
    },
    Finite {
        prime: Prime,
        #[serde(with = "crate::serde_util::rational")]
        lambda: Rational,
        #[serde(with = "crate::serde_util::rational")]
        exponent: Rational,
    },
    Archimedean,
}

impl FiberPoint {
    pub fn generic(lambda: &Rational) -> Result<FiberPoint> {
        if !lambda.is_positive() {
            return Err(Error::InvalidArgument("λ must be positive".into()));
        }
        Ok(FiberPoint::Generic { lambda: lambda.clone() })
    }

    /// The class of `λ p^e` in `C_p`.
    pub fn on_circle(p: Prime, lambda: &Rational, e: &Rational) -> Result<FiberPoint> {
        if !lambda.is_positive() {
            return Err(Error::InvalidArgument("λ must be positive".into()));
        }
        Ok(FiberPoint::Finite { prime: p, lambda: arith::strip_prime(lambda, p), exponent: arith::frac(e) })
    }

    /// The neutral element `λ = 1` of `C_p`.
    pub fn circle_identity(p: Prime) -> FiberPoint {
        FiberPoint::Finite { prime: p, lambda: Rational::one(), exponent: Rational::zero() }
    }

    pub fn circle_inverse(&self) -> Result<FiberPoint> {
        match self {
            FiberPoint::Finite { prime, lambda, exponent } => FiberPoint::on_circle(*prime, &lambda.recip(), &-exponent),
            FiberPoint::Generic { lambda } => FiberPoint::generic(&lambda.recip()),
            FiberPoint::Archimedean => Err(Error::InvalidArgument("the archimedean point is not invertible".into())),
        }
    }

    /// Order in `C_p`: finite iff `λ = 1`, in which case it is the
    /// denominator of the exponent.
    pub fn circle_order(&self) -> Option<BigInt> {
        match self {
            FiberPoint::Finite { lambda, exponent, .. } if lambda.is_one() => Some(exponent.denom().clone()),
            _ => None,
        }
    }

    /// `log λ` as a float, for display.
    pub fn log_coordinate(&self) -> Option<f64> {
        let ln = |x: &Rational| {
            use num_traits::ToPrimitive;
            x.numer().to_f64().unwrap_or(f64::NAN).ln() - x.denom().to_f64().unwrap_or(f64::NAN).ln()
        };
        match self {
            FiberPoint::Generic { lambda } => Some(ln(lambda)),
            FiberPoint::Finite { prime, lambda, exponent } => {
                use num_traits::ToPrimitive;
                Some(ln(lambda) + exponent.to_f64().unwrap_or(f64::NAN) * prime.ln())
            }
            FiberPoint::Archimedean => None,
        }
    }
}

/// Group law of `C_p`.
pub fn cp_product(x: &FiberPoint, y: &FiberPoint) -> Result<FiberPoint> {
    match (x, y) {
        (
            FiberPoint::Finite { prime: p, lambda: a, exponent: e },
            FiberPoint::Finite { prime: q, lambda: b, exponent: f },
        ) => {
            if p != q {
                return Err(Error::PrimeMismatch(p.get(), q.get()));
            }
            FiberPoint::on_circle(*p, &(a * b), &(e + f))
        }
        _ => Err(Error::InvalidArgument("cp_product takes two points of the same circle C_p".into())),
    }
}

/// The monoid law on the fibers over the points of the curve: the
/// archimedean point absorbs everything, the generic orbit acts on every
/// circle, and two circles only multiply over the same prime.
pub fn fiber_product(x: &FiberPoint, y: &FiberPoint) -> Result<FiberPoint> {
    match (x, y) {
        (FiberPoint::Archimedean, _) | (_, FiberPoint::Archimedean) => Ok(FiberPoint::Archimedean),
        (FiberPoint::Generic { lambda: a }, FiberPoint::Generic { lambda: b }) => FiberPoint::generic(&(a * b)),
        (FiberPoint::Generic { lambda: a }, FiberPoint::Finite { prime, lambda: b, exponent })
        | (FiberPoint::Finite { prime, lambda: b, exponent }, FiberPoint::Generic { lambda: a }) => {
            FiberPoint::on_circle(*prime, &(a * b), exponent)
        }
        _ => cp_product(x, y),
    }
}

/// The fiber types over a point of the curve, in the intermediate cover and
/// in the universal cover.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiberDescriptor {
    pub point: String,
    pub intermediate: String,
    pub universal: String,
    pub group_law: String,
}

pub fn fiber_descriptor(point: CurvePoint) -> FiberDescriptor {
    match point {
        CurvePoint::Generic => FiberDescriptor {
            point: "eta".into(),
            intermediate: "R_+^×".into(),
            universal: "C_Q".into(),
            group_law: "idele class group".into(),
        },
        CurvePoint::Finite(p) => FiberDescriptor {
            point: p.to_string(),
            intermediate: format!("R/(log {p})Z"),
            universal: format!("C_Q/Q_{p}^×"),
            group_law: "cp_product".into(),
        },
        CurvePoint::Archimedean => FiberDescriptor {
            point: "inf".into(),
            intermediate: "{1}".into(),
            universal: "Ẑ^×".into(),
            group_law: "absorbing".into(),
        },
    }
}

/// A point `(u, e log p)` of the mapping torus `(K^{(p)} × R)/((u, t) ~ (pu, t + log p))`.
///
/// `u` is stored as truncated unit components at finitely many primes
/// `v ≠ p` times an exact rational `global` that is a unit at every other
/// `v ≠ p` (only `p` and the explicit primes may divide it).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TorusPoint {
    prime: Prime,
    components: BTreeMap<Prime, TruncatedPadic>,
    global: Rational,
    time: Rational,
}

#[derive(Serialize, Deserialize)]
struct TorusRepr {
    prime: Prime,
    units: BTreeMap<String, serde_json::Value>,
    global: String,
    time: String,
}

impl Serialize for TorusPoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let (units, _) = finite_json::to_value(&FiniteAdele::from_components(self.components.values().cloned()));
        TorusRepr {
            prime: self.prime,
            units,
            global: arith::format_rational(&self.global),
            time: arith::format_rational(&self.time),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for TorusPoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<TorusPoint, D::Error> {
        let r = TorusRepr::deserialize(d)?;
        let parse = || -> Result<TorusPoint> {
            let units = finite_json::from_value(r.units, "1".into())?;
            TorusPoint::new(
                r.prime,
                units.components().values().cloned(),
                arith::parse_rational(&r.global)?,
                arith::parse_rational(&r.time)?,
            )
        };
        parse().map_err(serde::de::Error::custom)
    }
}

impl TorusPoint {
    pub fn new(prime: Prime, units: impl IntoIterator<Item = TruncatedPadic>, global: Rational, time: Rational) -> Result<TorusPoint> {
        let components: BTreeMap<Prime, TruncatedPadic> = units.into_iter().map(|c| (c.prime(), c)).collect();
        if components.contains_key(&prime) {
            return Err(Error::InvalidArgument(format!("unit part must live away from {prime}")));
        }
        if let Some((v, _)) = components.iter().find(|(_, c)| c.finite_valuation() != Some(0)) {
            return Err(Error::InvalidArgument(format!("component at {v} is not a unit")));
        }
        if global.is_zero() {
            return Err(Error::ZeroInput);
        }
        for q in arith::factor_rational(&global)?.keys() {
            if *q != prime && !components.contains_key(q) {
                return Err(Error::InvalidArgument(format!("global factor is not a unit at {q}")));
            }
        }
        Ok(TorusPoint { prime, components, global, time })
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn time(&self) -> &Rational {
        &self.time
    }

    pub fn global(&self) -> &Rational {
        &self.global
    }

    pub fn components(&self) -> &BTreeMap<Prime, TruncatedPadic> {
        &self.components
    }

    /// Multiplies the unit part by `p^k`, which is a unit at every `v ≠ p`.
    fn shift_units(&self, k: i64) -> (BTreeMap<Prime, TruncatedPadic>, Rational) {
        let f = pow_rational(self.prime, k);
        let comps = self.components.iter().map(|(v, c)| (*v, c.mul_rational(&f))).collect();
        (comps, &self.global * f)
    }

    /// Applies the generator of the relation `k` times:
    /// `(u, t) ↦ (p^k u, t + k log p)`.
    pub fn step(&self, k: i64) -> TorusPoint {
        let (components, global) = self.shift_units(k);
        TorusPoint { prime: self.prime, components, global, time: &self.time + Rational::from_integer(k.into()) }
    }

    /// Whether two points are the same element of the torus, i.e. their
    /// normalized representatives agree to the stored precision.
    pub fn equivalent(&self, other: &TorusPoint) -> bool {
        let a = torus_normalize(self);
        let b = torus_normalize(other);
        if a.prime != b.prime || a.time != b.time {
            return false;
        }
        let keys: BTreeSet<Prime> = a.components.keys().chain(b.components.keys()).copied().collect();
        keys.into_iter().all(|v| {
            let prec = a.components.get(&v).or(b.components.get(&v)).and_then(|c| c.precision()).unwrap_or(1);
            let x = a.components.get(&v).cloned().unwrap_or_else(|| TruncatedPadic::from_rational(&a.global, v, prec).expect("prec ≥ 1"));
            let y = b.components.get(&v).cloned().unwrap_or_else(|| TruncatedPadic::from_rational(&b.global, v, prec).expect("prec ≥ 1"));
            x.agrees_with(&y)
        }) && strip_explicit(&a.global, a.prime, &a.components) == strip_explicit(&b.global, b.prime, &b.components)
    }
}

fn strip_explicit(x: &Rational, p: Prime, comps: &BTreeMap<Prime, TruncatedPadic>) -> Rational {
    arith::restrict_rational(x, |q| q != p && !comps.contains_key(&q)).expect("factorable")
}

/// The representative with time exponent in `[0, 1)`.
pub fn torus_normalize(pt: &TorusPoint) -> TorusPoint {
    let k = pt.time.floor().to_integer();
    let k = i64::try_from(&k).expect("time exponent fits in i64");
    pt.step(-k)
}

/// Splits a positive rational as `c p^e` with `c` free of `p`.
pub fn circle_coordinates(lambda: &Rational, p: Prime) -> Option<(Rational, i64)> {
    let (e, c) = split_prime(lambda, p)?;
    Some((c.abs(), e))
}
