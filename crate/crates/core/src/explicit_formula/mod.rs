//! Numerical check of the Weil explicit formula for the Riemann zeta
//! function with radial test functions `g(t)`, `t = log |u|`.
//!
//! With `ĥ(z) = ∫ g(t) e^{zt} dt` the identity checked is
//!
//! ```text
//! ĥ(0) + ĥ(1) - Σ_ρ ĥ(ρ) = W_∞(g) + Σ_p W_p(g)
//! W_p(g) = log p · Σ_{m ≥ 1} (g(m log p) + p^{-m} g(-m log p))
//! W_∞(g) = (log 2π + γ) g(0) + FP ∫_0^∞ g(s) / (1 - e^{-s}) ds
//! ```
//!
//! for even `g`, where `FP` is the finite part `lim_{ε→0} (∫_ε^∞ + g(0) log ε)`
//! and `γ` is Euler's constant. `W_∞` is the principal value of
//! `½ ∫_{R^×} g(log|u|) / |1 - u| d*u` with the same finite-part convention.
//! The constants were fixed by comparing the shell decomposition of the
//! `p`-adic integrals and the digamma form of the archimedean term against
//! direct evaluation of both sides.

pub mod jet;
pub mod quadrature;
pub mod test_function;
pub mod zeros;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{self, pow_rational, valuation, Prime, Rational};
use crate::error::{Error, Result};
use crate::par::{self, compensated_sum, Strategy};
use quadrature::{integrate, Integral, Tolerance};
pub use test_function::{TestFunction, TestFunctionKind};
pub use zeros::{verify_zeros, ZeroCheck, ZeroTable};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// A place of `Q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Place {
    Finite(Prime),
    Archimedean,
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Finite(p) => write!(f, "{p}"),
            Place::Archimedean => f.write_str("inf"),
        }
    }
}

impl FromStr for Place {
    type Err = Error;
    fn from_str(s: &str) -> Result<Place> {
        match s.trim() {
            "inf" | "∞" => Ok(Place::Archimedean),
            other => {
                let n: u64 = other.parse().map_err(|_| Error::Parse(format!("bad place {other:?}")))?;
                Ok(Place::Finite(Prime::new(n)?))
            }
        }
    }
}

impl Serialize for Place {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Place {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Place, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

fn mellin_tolerance() -> Tolerance {
    Tolerance { abs: 1e-13, rel: 0.0, max_panels: 20_000 }
}

/// `ĥ(z) = ∫ g(t) e^{zt} dt` by adaptive quadrature, for `|Re z| ≤ 2`.
pub fn mellin_hat(g: &TestFunction, z: Complex64) -> Result<Integral<Complex64>> {
    if z.re.abs() > 2.0 {
        return Err(Error::InvalidArgument(format!("Re z = {} is outside [-2, 2]", z.re)));
    }
    if g.is_zero() {
        return Ok(Integral { value: Complex64::new(0.0, 0.0), error: 0.0 });
    }
    integrate(|t| (z * t).exp() * g.value(t), &g.pieces(), mellin_tolerance())
}

fn mellin_real(g: &TestFunction, x: f64) -> Result<Integral<f64>> {
    if g.is_zero() {
        return Ok(Integral { value: 0.0, error: 0.0 });
    }
    integrate(|t| (x * t).exp() * g.value(t), &g.pieces(), mellin_tolerance())
}

/// `W_p(g)`: a finite sum, since `g(m log p) = 0` once `m log p ≥ T`.
pub fn local_term_finite(g: &TestFunction, p: Prime) -> f64 {
    let lp = p.ln();
    let t_max = g.support();
    let mut terms = Vec::new();
    let mut m = 1;
    while (m as f64) * lp < t_max {
        let t = m as f64 * lp;
        terms.push(lp * (g.value(t) + (p.get() as f64).powi(-m) * g.value(-t)));
        m += 1;
    }
    compensated_sum(terms)
}

/// How the finite part at `u = 1` of the archimedean integral is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PvStrategy {
    /// Subtract `g(0)/s` on `(0, 1]`, whose finite part is zero.
    Subtraction,
    /// Cut out `|u - 1| < ε`, add back `g(0) log ε` and extrapolate `ε → 0`.
    SymmetricLimit,
}

/// `1/(1 - e^{-s}) - 1/s`.
fn kernel_remainder(s: f64) -> f64 {
    if s.abs() < 1e-2 {
        let s2 = s * s;
        0.5 + s / 12.0 - s * s2 / 720.0 + s * s2 * s2 / 30240.0
    } else {
        1.0 / -(-s).exp_m1() - 1.0 / s
    }
}

fn breakpoints(g: &TestFunction, extra: &[f64], lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let mut pts: Vec<f64> = g.pieces().iter().flat_map(|&(a, b)| [a, b]).chain(extra.iter().copied()).collect();
    pts.push(lo);
    pts.push(hi);
    pts.retain(|x| *x >= lo && *x <= hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts.windows(2).map(|w| (w[0], w[1])).collect()
}

/// `W_∞(g)` with the finite part at `u = 1` taken by `strategy`.
pub fn local_term_arch_with(g: &TestFunction, strategy: PvStrategy) -> Result<Integral<f64>> {
    if g.is_zero() {
        return Ok(Integral { value: 0.0, error: 0.0 });
    }
    let g0 = g.value(0.0);
    let constant = ((2.0 * PI).ln() + EULER_GAMMA) * g0;
    let fp = match strategy {
        PvStrategy::Subtraction => {
            let d = g.jet(0.0, 4).derivatives();
            let hi = g.support().max(1.0);
            let f = |s: f64| {
                let gs = g.value(s);
                // (g(s) - g(0))/s, by Taylor expansion where it cancels
                let diff = if s < 1e-3 { d[1] + s * (d[2] / 2.0 + s * (d[3] / 6.0 + s * d[4] / 24.0)) } else { (gs - g0) / s };
                if s <= 1.0 {
                    gs * kernel_remainder(s) + diff
                } else {
                    gs / -(-s).exp_m1()
                }
            };
            integrate(f, &breakpoints(g, &[1.0], 0.0, hi), Tolerance { abs: 1e-13, rel: 1e-14, max_panels: 20_000 })?
        }
        PvStrategy::SymmetricLimit => symmetric_limit(g, g0)?,
    };
    Ok(Integral { value: constant + fp.value, error: fp.error })
}

/// The default `W_∞`, by singularity subtraction.
pub fn local_term_arch(g: &TestFunction) -> Result<Integral<f64>> {
    local_term_arch_with(g, PvStrategy::Subtraction)
}

fn symmetric_limit(g: &TestFunction, g0: f64) -> Result<Integral<f64>> {
    let t_max = g.support();
    let tol = Tolerance { abs: 1e-14, rel: 1e-15, max_panels: 20_000 };
    let neg_branch = integrate(|s: f64| g.value(s) / (1.0 + s.exp()), &breakpoints(g, &[], -t_max, t_max), tol)?;
    let cut = |eps: f64| -> Result<(f64, f64)> {
        let right = (eps).ln_1p();
        let left = (-eps).ln_1p();
        let a = if right < t_max {
            integrate(|s: f64| g.value(s) / s.exp_m1(), &breakpoints(g, &[], right, t_max), tol)?
        } else {
            Integral { value: 0.0, error: 0.0 }
        };
        let b = if -t_max < left {
            integrate(|s: f64| g.value(s) / -s.exp_m1(), &breakpoints(g, &[], -t_max, left), tol)?
        } else {
            Integral { value: 0.0, error: 0.0 }
        };
        Ok((0.5 * (a.value + b.value) + g0 * eps.ln(), 0.5 * (a.error + b.error)))
    };
    // Richardson extrapolation in ε = ε₀ 2^{-j}; the error is a power series in ε
    let levels = 8;
    let mut table: Vec<Vec<f64>> = Vec::new();
    let mut err = 0.0f64;
    for j in 0..levels {
        let (v, e) = cut(0.05 / f64::powi(2.0, j))?;
        err = err.max(e);
        let mut row = vec![v];
        for k in 1..=j as usize {
            let f = f64::powi(2.0, k as i32);
            let prev = &table[j as usize - 1];
            row.push((f * row[k - 1] - prev[k - 1]) / (f - 1.0));
        }
        table.push(row);
    }
    let last = table.last().expect("levels > 0");
    let prev = &table[table.len() - 2];
    let value = last[last.len() - 1];
    let extrapolation = (value - prev[prev.len() - 1]).abs();
    Ok(Integral { value: 0.5 * neg_branch.value + value, error: 0.5 * neg_branch.error + err + extrapolation })
}

/// Tail estimate inputs: `C_k = ∫ |d^k/dt^k (g(t) e^{t/2})| dt`, so that
/// `|ĥ(1/2 + ir)| ≤ C_k / r^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayConstants {
    pub c: Vec<f64>,
}

/// Largest `k` used for smooth test functions.
pub const MAX_IBP_ORDER: usize = 14;

pub fn decay_constants(g: &TestFunction) -> Result<DecayConstants> {
    if g.is_zero() {
        return Ok(DecayConstants { c: vec![0.0] });
    }
    let k_max = g.smoothness().unwrap_or(MAX_IBP_ORDER).min(MAX_IBP_ORDER);
    let tol = Tolerance { abs: 0.0, rel: 1e-6, max_panels: 20_000 };
    let c = (0..=k_max)
        .map(|k| {
            let f = |t: f64| {
                let gj = g.jet(t, k);
                let e = Jet::variable(t, k).scale(0.5).exp();
                (&gj * &e).derivatives()[k].abs()
            };
            let r = integrate(f, &g.pieces(), tol)?;
            // margin for the quadrature of a function with kinks
            Ok((r.value + r.error) * (1.0 + 1e-4))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(DecayConstants { c })
}

use jet::Jet;

impl DecayConstants {
    /// `min_k C_k / r^k`, a decreasing bound on `|ĥ(1/2 + ir)|`.
    pub fn bound(&self, r: f64) -> f64 {
        self.c.iter().enumerate().map(|(k, c)| c / r.powi(k as i32)).fold(f64::INFINITY, f64::min)
    }
}

/// Main term of the zero-counting function, `(t/2π) log(t/2πe) + 7/8`.
fn counting_main(t: f64) -> f64 {
    t / (2.0 * PI) * (t / (2.0 * PI * std::f64::consts::E)).ln() + 0.875
}

/// Bound on `|N(t) - counting_main(t)|` for `t ≥ e`.
fn counting_error(t: f64) -> f64 {
    0.112 * t.ln() + 0.278 * t.ln().ln() + 2.51 + 0.2 / t
}

/// Bound on `Σ_{k > n} 2 |ĥ(1/2 + iγ_k)|`, given that exactly `n` zeros lie
/// below `t0 = γ_n` (or `t0 = 14` when `n = 0`).
///
/// Writes the sum as a Stieltjes integral against `N(t)`, integrates by
/// parts and replaces `N` by its main term plus the explicit error bound.
pub fn tail_bound(decay: &DecayConstants, t0: f64, n: usize) -> Result<f64> {
    if decay.c.iter().all(|c| *c == 0.0) {
        return Ok(0.0);
    }
    let boundary = decay.bound(t0) * (counting_main(t0) + counting_error(t0) - n as f64).max(0.0);
    let density = |t: f64| (t / (2.0 * PI)).ln() / (2.0 * PI) + 0.112 / t + 0.278 / (t * t.ln());
    // substitute t = t0 e^x
    let span = 60.0;
    let f = |x: f64| {
        let t = t0 * x.exp();
        decay.bound(t) * density(t) * t
    };
    let pieces: Vec<(f64, f64)> = (0..60).map(|i| (i as f64 * span / 60.0, (i + 1) as f64 * span / 60.0)).collect();
    let body = integrate(f, &pieces, Tolerance { abs: 0.0, rel: 1e-8, max_panels: 20_000 })?;
    // beyond t1 the k = 2 bound gives ∫ C_2 t^{-2} (log t) dt ≤ C_2 (log t1 + 1) / t1
    let t1 = t0 * span.exp();
    let far = decay.c.get(2).map_or(f64::INFINITY, |c2| c2 * (t1.ln() + 1.0) / t1);
    Ok(2.0 * (boundary + body.value + body.error + far))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralSide {
    pub value: f64,
    pub tail_bound: f64,
    pub quadrature_error: f64,
    /// `2 Re ĥ(1/2 + iγ_k)` for `k = 1..=n`.
    pub zero_terms: Vec<f64>,
    pub h0: f64,
    pub h1: f64,
}

/// `ĥ(0) + ĥ(1) - Σ_{k ≤ n} 2 Re ĥ(1/2 + iγ_k)` with the bound on the
/// omitted zeros.
pub fn spectral_side(g: &TestFunction, zeros: &ZeroTable, n: usize, strategy: Strategy) -> Result<SpectralSide> {
    if n > zeros.count() {
        return Err(Error::InsufficientZeros { requested: n, available: zeros.count() });
    }
    if g.is_zero() {
        return Ok(SpectralSide { value: 0.0, tail_bound: 0.0, quadrature_error: 0.0, zero_terms: vec![0.0; n], h0: 0.0, h1: 0.0 });
    }
    let h0 = mellin_real(g, 0.0)?;
    let h1 = mellin_real(g, 1.0)?;
    let terms = par::map(strategy, &zeros.ordinates()[..n], |&gamma| {
        mellin_hat(g, Complex64::new(0.5, gamma)).map(|r| (2.0 * r.value.re, 2.0 * r.error))
    })
    .into_iter()
    .collect::<Result<Vec<(f64, f64)>>>()?;
    let zero_terms: Vec<f64> = terms.iter().map(|t| t.0).collect();
    let quadrature_error = h0.error + h1.error + terms.iter().map(|t| t.1).sum::<f64>();
    let value = compensated_sum([h0.value, h1.value].into_iter().chain(zero_terms.iter().map(|t| -t)));
    let decay = decay_constants(g)?;
    let t0 = if n == 0 { 14.0 } else { zeros.ordinates()[n - 1] };
    let tail = tail_bound(&decay, t0, n)?;
    Ok(SpectralSide { value, tail_bound: tail, quadrature_error, zero_terms, h0: h0.value, h1: h1.value })
}

/// Per-place geometric terms: `∞` and every prime `p` with `log p < T`.
pub fn geometric_terms(g: &TestFunction) -> Result<BTreeMap<Place, f64>> {
    let mut out = BTreeMap::new();
    out.insert(Place::Archimedean, local_term_arch(g)?.value);
    let bound = g.support().exp().ceil() as u64;
    for p in arith::primes_up_to(bound) {
        if p.ln() < g.support() {
            out.insert(Place::Finite(p), local_term_finite(g, p));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalanceReport {
    pub test_function: String,
    pub spectral_side: f64,
    pub geometric_side: f64,
    pub per_place: BTreeMap<Place, f64>,
    pub residual: f64,
    pub zeros_used: usize,
    pub tail_bound: f64,
    pub quadrature_error: f64,
}

impl BalanceReport {
    /// Whether the residual is within `max(floor, tail bound)`.
    pub fn within(&self, floor: f64) -> bool {
        self.residual <= floor.max(self.tail_bound)
    }
}

pub fn balance(g: &TestFunction, zeros: &ZeroTable, n: usize, strategy: Strategy) -> Result<BalanceReport> {
    let spectral = spectral_side(g, zeros, n, strategy)?;
    let per_place = geometric_terms(g)?;
    let geometric_side = compensated_sum(per_place.values().copied());
    Ok(BalanceReport {
        test_function: g.to_string(),
        spectral_side: spectral.value,
        geometric_side,
        residual: (spectral.value - geometric_side).abs(),
        per_place,
        zeros_used: n,
        tail_bound: spectral.tail_bound,
        quadrature_error: spectral.quadrature_error,
    })
}

/// `(N, residual, tail bound)` for each requested `N`, sharing one pass
/// over the zeros.
pub fn residual_curve(g: &TestFunction, zeros: &ZeroTable, ns: &[usize], strategy: Strategy) -> Result<Vec<(usize, f64, f64)>> {
    let n_max = ns.iter().copied().max().unwrap_or(0);
    let spectral = spectral_side(g, zeros, n_max, strategy)?;
    let geometric = compensated_sum(geometric_terms(g)?.values().copied());
    let decay = decay_constants(g)?;
    ns.iter()
        .map(|&n| {
            let value = compensated_sum(
                [spectral.h0, spectral.h1].into_iter().chain(spectral.zero_terms[..n].iter().map(|t| -t)),
            );
            let t0 = if n == 0 { 14.0 } else { zeros.ordinates()[n - 1] };
            Ok((n, (value - geometric).abs(), tail_bound(&decay, t0, n)?))
        })
        .collect()
}

/// Gnuplot-ready `N residual tail_bound` rows.
pub fn residual_curve_data(curve: &[(usize, f64, f64)]) -> String {
    let mut out = String::from("# N residual tail_bound\n");
    for (n, r, t) in curve {
        out.push_str(&format!("{n} {r:.6e} {t:.6e}\n"));
    }
    out
}

/// `1/|1 - u|_v`, exact at every place.
pub fn dist_trace(u: &Rational, place: Place) -> Result<Rational> {
    let d = Rational::one() - u;
    if d.is_zero() {
        return Err(Error::FixedPointSingular);
    }
    Ok(match place {
        Place::Archimedean => d.abs().recip(),
        Place::Finite(p) => pow_rational(p, valuation(&d, p).expect("nonzero")),
    })
}

/// `1/|1 - u|_∞` as a float.
pub fn dist_trace_real(u: f64) -> Result<f64> {
    if u == 1.0 {
        return Err(Error::FixedPointSingular);
    }
    Ok(1.0 / (1.0 - u).abs())
}

/// The places where `|1 - u|_v ≠ 1`, together with `∞`.
pub fn relevant_places(u: &Rational) -> Result<Vec<Place>> {
    let d = Rational::one() - u;
    if d.is_zero() {
        return Err(Error::FixedPointSingular);
    }
    let mut out: Vec<Place> = arith::factor_rational(&d)?.into_keys().map(Place::Finite).collect();
    out.push(Place::Archimedean);
    Ok(out)
}

/// `Π_v 1/|1 - u|_v` over [`relevant_places`]; equal to `1` by the product
/// formula.
pub fn dist_trace_product(u: &Rational) -> Result<Rational> {
    relevant_places(u)?.into_iter().try_fold(Rational::one(), |acc, v| Ok(acc * dist_trace(u, v)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemilocalRhs {
    pub divergent: f64,
    pub finite: f64,
}

/// The right side of the semilocal trace formula split into the divergent
/// `2 g(0) log λ` and the sum of local terms over `places`.
pub fn semilocal_rhs(g: &TestFunction, places: &[Place], lambda: f64) -> Result<SemilocalRhs> {
    if !places.contains(&Place::Archimedean) {
        return Err(Error::InvalidArgument("the place set must contain inf".into()));
    }
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidArgument(format!("λ must be positive, got {lambda}")));
    }
    let mut terms = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for v in places {
        if !seen.insert(*v) {
            continue;
        }
        terms.push(match v {
            Place::Archimedean => local_term_arch(g)?.value,
            Place::Finite(p) => local_term_finite(g, *p),
        });
    }
    Ok(SemilocalRhs { divergent: 2.0 * g.value(0.0) * lambda.ln(), finite: compensated_sum(terms) })
}

/// The coefficient `2 g(0)` of `log λ` in the divergent part.
pub fn semilocal_divergent_coefficient(g: &TestFunction) -> f64 {
    2.0 * g.value(0.0)
}
