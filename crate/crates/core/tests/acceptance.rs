//! Acceptance suite. Each criterion prints one `PASS`/`FAIL` line; the test
//! fails if any criterion does.
//!
//! Run with `cargo test -p picmonoid --test acceptance -- --nocapture` to see
//! the report.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use common::*;
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use picmonoid::adeles::{Adele, FiniteAdele, TruncatedPadic};
use picmonoid::covers::{self, cover_from_character, fiber_decomposition, fiber_product, FiberPoint};
use picmonoid::divisors::{ArithmeticDivisor, DefaultCoeff, ExtInt, PrimeSet};
use picmonoid::explicit_formula::{
    dist_trace, dist_trace_product, local_term_arch, local_term_finite, relevant_places, residual_curve, semilocal_divergent_coefficient,
    semilocal_rhs, verify_zeros, Place, TestFunction, ZeroTable,
};
use picmonoid::frames_roots::{frame_tensor, root_eval, root_tensor_check};
use picmonoid::par::Strategy;
use picmonoid::picard::{abel_jacobi_set, PicClass};
use picmonoid::{Error, Prime, Rational};
use rand::Rng;

const BUDGET_ADELE_DIVISOR: Duration = Duration::from_secs(1);
const BUDGET_TENSOR: Duration = Duration::from_secs(5);
const BUDGET_DUALITY: Duration = Duration::from_secs(10);
const BUDGET_SPLITTING: Duration = Duration::from_secs(30);
const BUDGET_WEIL: Duration = Duration::from_secs(60);

/// Residual floor for the balance check.
const WEIL_RESIDUAL_FLOOR: f64 = 1e-2;
/// Half-width of the sign-change bracket certifying each bundled ordinate.
const ZERO_CERTIFICATE: f64 = 1e-8;
/// At least this many of the ten test functions must improve from N = 10 to N = 100.
const WEIL_MONOTONE_MIN: usize = 9;
/// Relative slack for `2 g(0) log λ` additivity in floating point.
const LOG_LINEARITY_RTOL: f64 = 1e-14;

/// Unit digits carried by frames used at levels up to `10^6`.
const FRAME_PRECISION: u32 = 24;

const WEIL_FAMILY: [&str; 10] = [
    "gaussian:T=5,sigma=1",
    "gaussian:T=5,sigma=1.5,omega=1",
    "bumpcos:T=5,s=1",
    "bumpcos:T=4,omega=1.5",
    "bump:c=0,w=1.5",
    "bump:c=log2,w=0.3",
    "bump:c=log3,w=0.4",
    "bump:c=2.5,w=1",
    "spline:T=5,n=6",
    "spline:T=3,n=6,omega=1",
];

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

struct Outcome {
    id: u32,
    name: &'static str,
    result: Check,
    elapsed: Duration,
}

fn run(id: u32, name: &'static str, budget: Option<Duration>, f: impl FnOnce() -> Check) -> Outcome {
    let start = Instant::now();
    let mut result = f();
    let elapsed = start.elapsed();
    if let (Ok(_), Some(b)) = (&result, budget) {
        if elapsed > b {
            result = Err(format!("took {elapsed:.2?}, budget {b:?}"));
        }
    }
    Outcome { id, name, result, elapsed }
}

#[test]
fn acceptance() {
    let outcomes = vec![
        run(1, "adele valuation map is a monoid isomorphism onto divisors", Some(BUDGET_ADELE_DIVISOR), criterion_adele_divisor),
        run(2, "tensor law for sections", Some(BUDGET_TENSOR), criterion_tensor_law),
        run(3, "X_Q class is invariant and multiplicative", None, criterion_xq_class),
        run(4, "value spectra reconstruct the class", None, criterion_reconstruction),
        run(5, "idempotents and the Θ semilattice", None, criterion_idempotents),
        run(6, "duality respects the tensor product", Some(BUDGET_DUALITY), criterion_duality),
        run(7, "root level consistency", None, criterion_root_consistency),
        run(8, "class-field splitting matches polynomial factorization", Some(BUDGET_SPLITTING), criterion_splitting),
        run(9, "C_p circle group and torus normalization", None, criterion_circle_group),
        run(10, "explicit formula balance", Some(BUDGET_WEIL), criterion_weil),
        run(11, "product formula for the distributional trace", None, criterion_product_formula),
    ];
    let mut failed = Vec::new();
    for o in &outcomes {
        match &o.result {
            Ok(detail) => println!("PASS criterion {}: {} ({detail}; {:.2?})", o.id, o.name, o.elapsed),
            Err(why) => {
                println!("FAIL criterion {}: {} ({why}; {:.2?})", o.id, o.name, o.elapsed);
                failed.push(o.id);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

// 1 -------------------------------------------------------------------------

fn criterion_adele_divisor() -> Check {
    let mut rng = rng(1);
    for i in 0..10_000 {
        let a = random_finite_adele(&mut rng);
        let b = random_finite_adele(&mut rng);
        let image = a.multiply(&b).to_divisor();
        ensure(image == a.to_divisor().add(&b.to_divisor()), || format!("pair {i}: Φ(ab) ≠ Φ(a) + Φ(b)"))?;
        // independent: coefficientwise sum of component valuations
        let primes: BTreeSet<Prime> = a.components().keys().chain(b.components().keys()).copied().collect();
        for q in primes {
            let va = a.component_truncated(q, 1).valuation();
            let vb = b.component_truncated(q, 1).valuation();
            let expected = match (va, vb) {
                (ExtInt::Finite(x), ExtInt::Finite(y)) => ExtInt::Finite(x + y),
                _ => ExtInt::Inf,
            };
            ensure(image.coeff(q) == expected, || format!("pair {i}: coefficient at {q}"))?;
        }
        ensure(image.default_coeff() == DefaultCoeff::Zero, || format!("pair {i}: default"))?;
    }
    Ok("10000 pairs, exact".into())
}

// 2 -------------------------------------------------------------------------

/// A random element of `L(D)` supported on the explicit primes of `D` and a
/// random integer cofactor.
fn random_section(rng: &mut impl Rng, d: &ArithmeticDivisor) -> Rational {
    let mut x = Rational::from_integer(BigInt::from(rng.gen_range(1..=30i64)));
    for (q, c) in d.explicit() {
        let e = match c {
            ExtInt::Inf => rng.gen_range(-5..=3),
            ExtInt::Finite(n) => -n.to_i64().unwrap() + rng.gen_range(0..=3),
        };
        x *= pow(*q, e);
    }
    if rng.gen_bool(0.5) {
        -x
    } else {
        x
    }
}

/// Splits `z ∈ L(D1 + D2)` as `x1 x2` with `xi ∈ L(Di)` by choosing the
/// exponent of `x1` prime by prime.
fn split_section(z: &Rational, d1: &ArithmeticDivisor, d2: &ArithmeticDivisor) -> (Rational, Rational) {
    let mut primes: BTreeSet<u64> = d1.explicit().keys().chain(d2.explicit().keys()).map(|q| q.get()).collect();
    primes.extend(trial_primes(z.numer()));
    primes.extend(trial_primes(z.denom()));
    let mut x1 = Rational::one();
    for q in primes {
        let vz = rational_valuation(z, q);
        let e = match (d1.coeff(p(q)), d2.coeff(p(q))) {
            (ExtInt::Finite(n1), _) => -n1.to_i64().unwrap(),
            (ExtInt::Inf, ExtInt::Finite(n2)) => vz + n2.to_i64().unwrap(),
            (ExtInt::Inf, ExtInt::Inf) => 0,
        };
        x1 *= pow(p(q), e);
    }
    let x2 = z / &x1;
    (x1, x2)
}

fn criterion_tensor_law() -> Check {
    let mut rng = rng(2);
    let mut checks = 0;
    for i in 0..1_000 {
        let d1 = random_divisor(&mut rng, true);
        let d2 = random_divisor(&mut rng, true);
        let (d1, d2) = (finite_default(d1), finite_default(d2));
        let sum = d1.add(&d2);
        for _ in 0..100 {
            let x1 = random_section(&mut rng, &d1);
            let x2 = random_section(&mut rng, &d2);
            ensure(d1.sections_contains(&x1) && d2.sections_contains(&x2), || format!("pair {i}: sampler left L(D)"))?;
            let prod = &x1 * &x2;
            ensure(sum.sections_contains(&prod), || format!("pair {i}: x1 x2 ∉ L(D1 + D2)"))?;
            ensure(sections_oracle(&sum, &prod), || format!("pair {i}: oracle rejects x1 x2"))?;
            let z = random_section(&mut rng, &sum);
            let (y1, y2) = split_section(&z, &d1, &d2);
            ensure(&y1 * &y2 == z, || format!("pair {i}: split does not multiply back"))?;
            ensure(d1.sections_contains(&y1) && d2.sections_contains(&y2), || format!("pair {i}: split of {z} leaves L(Di)"))?;
            checks += 1;
        }
    }
    Ok(format!("{checks} section pairs, exact"))
}

fn finite_default(d: ArithmeticDivisor) -> ArithmeticDivisor {
    ArithmeticDivisor::new(d.explicit().clone(), DefaultCoeff::Zero)
}

// 3 -------------------------------------------------------------------------

fn random_unit_adele(rng: &mut impl Rng) -> Adele {
    let comps: Vec<TruncatedPadic> = random_prime_set(rng, 3)
        .into_iter()
        .map(|q| {
            let prec = rng.gen_range(1..=6);
            TruncatedPadic::new(q, 0, random_unit(rng, q, prec), prec).unwrap()
        })
        .collect();
    Adele::new(FiniteAdele::from_components(comps), Rational::one())
}

fn criterion_xq_class() -> Check {
    let mut rng = rng(3);
    for i in 0..1_000 {
        let a = random_adele(&mut rng);
        let q = random_rational(&mut rng);
        let u = random_unit_adele(&mut rng);
        let translate = a.scale(&q, 4).unwrap().multiply(&u);
        ensure(translate.xq_class() == a.xq_class(), || format!("translate {i}: class changed"))?;
        let oracle = PicClass::from_data(&a.finite.to_divisor(), &a.infinite.abs()).unwrap();
        ensure(a.xq_class() == oracle, || format!("adele {i}: differs from (Φ(a_f), |a_∞|)"))?;
    }
    for i in 0..1_000 {
        let a = random_adele(&mut rng);
        let b = random_adele(&mut rng);
        ensure(a.multiply(&b).xq_class() == a.xq_class().product(&b.xq_class()), || format!("pair {i}: not multiplicative"))?;
    }
    Ok("1000 translates, 1000 pairs, exact".into())
}

// 4 -------------------------------------------------------------------------

/// Scales whose prime exponents stay below the denominator cap. A scale
/// carrying `r^{-cap}` would make adding `r` to `S` invisible inside the
/// capped window, since both samples would then share the same step.
fn random_scale(rng: &mut impl Rng) -> Rational {
    random_prime_set(rng, 4).into_iter().map(|q| pow(q, rng.gen_range(-3..=3))).product()
}

fn random_class(rng: &mut impl Rng) -> (ArithmeticDivisor, Rational, PicClass) {
    let d = finite_default(random_divisor(rng, true));
    let lambda = random_scale(rng);
    let c = PicClass::from_data(&d, &lambda).unwrap();
    (d, lambda, c)
}

fn caps_for(classes: &[&PicClass], cap: u32) -> BTreeMap<Prime, u32> {
    classes.iter().flat_map(|c| c.s_locus().members.iter().map(move |q| (*q, cap))).collect()
}

fn criterion_reconstruction() -> Check {
    let mut rng = rng(4);
    let bound = Rational::from_integer(100.into());
    let (mut equal, mut distinct) = (0, 0);
    for i in 0..1_000 {
        let (d, lambda, c1) = random_class(&mut rng);
        let c2 = if i % 2 == 0 {
            // same class through a different representative: (q L, λ/|q|)
            let q = random_rational(&mut rng);
            let shifted = d.add(&ArithmeticDivisor::from_rational(&q).unwrap().negate().unwrap());
            let mut c = PicClass::from_data(&shifted, &(&lambda / q.abs())).unwrap();
            if let Some(s) = c1.s_locus().members.iter().next() {
                c = c.rescale(&pow(*s, rng.gen_range(-2..=2))).unwrap();
            }
            c
        } else if rng.gen_bool(0.5) {
            let r = SMALL_PRIMES.iter().map(|&r| p(r)).find(|r| !c1.s_locus().contains(*r)).unwrap_or(p(31));
            let e = [-2i64, -1, 1, 2][rng.gen_range(0..4)];
            c1.rescale(&pow(r, e)).unwrap()
        } else {
            let r = SMALL_PRIMES.iter().map(|&r| p(r)).find(|r| !c1.s_locus().contains(*r)).unwrap_or(p(31));
            PicClass::from_data(&d.add(&ArithmeticDivisor::new([(r, ExtInt::Inf)], DefaultCoeff::Zero)), &lambda).unwrap()
        };
        let caps = caps_for(&[&c1, &c2], 5);
        let s1 = c1.value_spectrum_sample(&bound, &caps).map_err(|e| e.to_string())?;
        let s2 = c2.value_spectrum_sample(&bound, &caps).map_err(|e| e.to_string())?;
        let same = c1 == c2;
        ensure((s1 == s2) == same, || format!("pair {i}: spectra agree = {}, classes equal = {same}", s1 == s2))?;
        ensure(same == (i % 2 == 0), || format!("pair {i}: construction produced the wrong relation"))?;
        if same {
            equal += 1;
        } else {
            distinct += 1;
        }
        // brute-force enumeration agrees with the closed form on a small window
        if i < 100 {
            let small = caps_for(&[&c1], 1);
            let one = Rational::one();
            let closed = c1.value_spectrum_sample(&one, &small).unwrap();
            if closed.count.as_ref().is_some_and(|n| *n < BigInt::from(5_000)) {
                let brute = c1.value_spectrum_enumerate(&one, &small, Strategy::Parallel).unwrap();
                ensure(closed.elements() == brute, || format!("class {i}: closed form differs from enumeration"))?;
            }
        }
    }
    Ok(format!("{equal} equal and {distinct} perturbed pairs, exact"))
}

// 5 -------------------------------------------------------------------------

fn random_locus(rng: &mut impl Rng) -> PrimeSet {
    let ps = random_prime_set(rng, 5);
    if rng.gen_ratio(1, 4) {
        PrimeSet::all_except(ps)
    } else {
        PrimeSet::finite(ps)
    }
}

fn criterion_idempotents() -> Check {
    let mut rng = rng(5);
    for i in 0..200 {
        let s1 = random_locus(&mut rng);
        let s2 = random_locus(&mut rng);
        let theta = |s: &PrimeSet| ArithmeticDivisor::from_localization(s);
        let union = theta(&s1.union(&s2));
        ensure(union.classes_equivalent(&theta(&s1).add(&theta(&s2))).is_some(), || format!("sets {i}: Θ(S1 ∪ S2) ≠ Θ(S1) Θ(S2)"))?;
        ensure(
            abel_jacobi_set(&s1.union(&s2)) == abel_jacobi_set(&s1).product(&abel_jacobi_set(&s2)),
            || format!("sets {i}: Jacobian image not multiplicative"),
        )?;
        for s in [&s1, &s2] {
            let t = theta(s);
            ensure(t.is_idempotent_class(), || format!("sets {i}: Θ({s}) not idempotent"))?;
            ensure(t.add(&t).classes_equivalent(&t).is_some(), || format!("sets {i}: Θ({s})² ≠ Θ({s})"))?;
            ensure(t.class_normalize().s == *s, || format!("sets {i}: normal form does not recover {s}"))?;
        }
        // every representable class is idempotent, with S its infinite locus
        let d = random_divisor(&mut rng, true);
        ensure(d.is_idempotent_class() && d.add(&d).classes_equivalent(&d).is_some(), || format!("divisor {d} not idempotent"))?;
        ensure(d.class_normalize().s == d.inf_locus(), || format!("divisor {d}: normal form locus"))?;
    }
    Ok("200 set pairs, exact".into())
}

// 6, 7 ----------------------------------------------------------------------

fn criterion_duality() -> Check {
    let mut rng = rng(6);
    let mut checks = 0;
    for i in 0..1_000 {
        let f1 = random_frame(&mut rng, FRAME_PRECISION);
        let f2 = random_frame(&mut rng, FRAME_PRECISION);
        let t = frame_tensor(&f1, &f2);
        for _ in 0..5 {
            let n = BigUint::from(rng.gen_range(1..=10_000u32));
            let x = random_element(&mut rng, &f1);
            let y = random_element(&mut rng, &f2);
            let ok = root_tensor_check(&f1, &f2, &n, &x, &y).map_err(|e| format!("pair {i}: {e}"))?;
            ensure(ok, || format!("pair {i}: level {n} product identity fails"))?;
            // CRT: the level-n residue reduces to every prime-power level
            let xy = &x * &y;
            let whole = t.xi_mod(&xy, &n).map_err(|e| e.to_string())?;
            for (q, e) in picmonoid::arith::factor(&n).map_err(|e| e.to_string())? {
                let pe = q.pow(e);
                let local = t.xi_mod(&xy, &pe).map_err(|e| e.to_string())?;
                ensure(&whole % &pe == local, || format!("pair {i}: CRT mismatch at {q}^{e}"))?;
                let lhs = f1.xi_mod(&x, &pe).unwrap() * f2.xi_mod(&y, &pe).unwrap() % &pe;
                ensure(lhs == local, || format!("pair {i}: product identity fails at {q}^{e}"))?;
            }
            // the root is the pairing ψ(a_f) at x/n
            let nq = Rational::from_integer(BigInt::from(n.clone()));
            let psi = t.multiplier().psi_pair(&(&xy / &nq)).map_err(|e| e.to_string())?;
            ensure(root_eval(&t, &n, &xy).unwrap() == psi, || format!("pair {i}: root differs from ψ"))?;
            checks += 1;
        }
    }
    Ok(format!("{checks} evaluations over 1000 frame pairs, exact"))
}

fn criterion_root_consistency() -> Check {
    let mut rng = rng(7);
    for i in 0..5_000 {
        let f = random_frame(&mut rng, FRAME_PRECISION);
        let n = rng.gen_range(1..=10_000u64);
        let k = rng.gen_range(1..=100u64);
        let x = random_element(&mut rng, &f);
        let coarse = root_eval(&f, &BigUint::from(n), &x).map_err(|e| format!("case {i}: {e}"))?;
        let fine = root_eval(&f, &BigUint::from(n * k), &x).map_err(|e| format!("case {i}: {e}"))?;
        ensure(coarse == fine.scale(&BigInt::from(k)), || format!("case {i}: ρ(1/{n}) ≠ {k} ρ(1/{})", n * k))?;
    }
    Ok("5000 cases, exact".into())
}

// 8 -------------------------------------------------------------------------

fn criterion_splitting() -> Check {
    let primes: Vec<u64> = (2..1000).filter(|&n| Prime::new(n).is_ok()).collect();
    let mut cases = 0;
    let mut covers_checked = 0;
    for m in [3u64, 4, 5, 7, 8, 12] {
        for gens in all_kernels(m) {
            let c = cover_from_character(m, &gens).map_err(|e| e.to_string())?;
            covers_checked += 1;
            for &q in &primes {
                let got = fiber_decomposition(&c, p(q));
                match splitting_oracle(m, &gens, q) {
                    Some(expected) => {
                        ensure(got == Ok(expected), || format!("m = {m}, kernel {gens:?}, p = {q}: {got:?} vs {expected:?}"))?;
                        ensure(expected.0 * expected.1 == c.order(), || format!("m = {m}: components·degree ≠ |G|"))?;
                        cases += 1;
                    }
                    None => ensure(got == Err(Error::Ramified(q)), || format!("m = {m}, kernel {gens:?}, p = {q}: expected Ramified"))?,
                }
            }
        }
    }
    Ok(format!("{cases} unramified cases over {covers_checked} covers, 100% agreement"))
}

// 9 -------------------------------------------------------------------------

fn criterion_circle_group() -> Check {
    let mut rng = rng(9);
    let cp = covers::cp_product;
    for i in 0..10_000 {
        let q = random_prime(&mut rng);
        let [x, y, z] = [(); 3].map(|_| random_circle_point(&mut rng, q));
        let e = FiberPoint::circle_identity(q);
        let xy = cp(&x, &y).unwrap();
        ensure(cp(&xy, &z) == cp(&x, &cp(&y, &z).unwrap()), || format!("triple {i}: not associative"))?;
        ensure(xy == cp(&y, &x).unwrap(), || format!("triple {i}: not commutative"))?;
        ensure(cp(&x, &e).unwrap() == x, || format!("triple {i}: identity"))?;
        ensure(cp(&x, &x.circle_inverse().unwrap()).unwrap() == e, || format!("triple {i}: inverse"))?;
        // log coordinates add modulo log p
        let (lx, ly, lxy) = (x.log_coordinate().unwrap(), y.log_coordinate().unwrap(), xy.log_coordinate().unwrap());
        let turns = (lx + ly - lxy) / q.ln();
        ensure((turns - turns.round()).abs() < 1e-9, || format!("triple {i}: log coordinate not additive"))?;
        // torsion: order k exactly when λ is a power of p, found by search
        let mut power = x.clone();
        let mut found = None;
        for k in 1..=12u32 {
            if power == e {
                found = Some(k);
                break;
            }
            power = cp(&power, &x).unwrap();
        }
        let expected = x.circle_order().and_then(|o| o.to_u32()).filter(|o| *o <= 12);
        ensure(found == expected, || format!("triple {i}: order search {found:?} vs {expected:?}"))?;
        // ∞ absorbs every handle
        ensure(fiber_product(&x, &FiberPoint::Archimedean) == Ok(FiberPoint::Archimedean), || format!("triple {i}: ∞ does not absorb"))?;
        // torus normalization
        let t = random_torus_point(&mut rng, q);
        let n = covers::torus_normalize(&t);
        ensure(covers::torus_normalize(&n) == n, || format!("triple {i}: normalization not idempotent"))?;
        ensure(!n.time().is_negative() && n.time() < &Rational::one(), || format!("triple {i}: time outside [0, 1)"))?;
        let k = rng.gen_range(-5..=5);
        ensure(covers::torus_normalize(&t.step(k)) == n, || format!("triple {i}: step({k}) changes the normal form"))?;
        ensure(t.step(k).equivalent(&t), || format!("triple {i}: step({k}) not equivalent"))?;
    }
    Ok("10000 triples, exact".into())
}

// 10 ------------------------------------------------------------------------

fn criterion_weil() -> Check {
    let zeros = ZeroTable::bundled();
    ensure(zeros.count() == 100, || format!("bundled table has {} ordinates", zeros.count()))?;
    let checks = verify_zeros(&zeros, ZERO_CERTIFICATE, Strategy::Parallel);
    if let Some(bad) = checks.iter().find(|c| !c.certified) {
        return Err(format!("ordinate {} ({}) not certified to {ZERO_CERTIFICATE:e}", bad.index, bad.gamma));
    }
    let mut improved = 0;
    let mut worst_margin = 0.0f64;
    for name in WEIL_FAMILY {
        let g: TestFunction = name.parse().map_err(|e: Error| e.to_string())?;
        ensure(g.support() <= 5.0 + 1e-12, || format!("{name}: support exceeds T = 5"))?;
        let curve = residual_curve(&g, &zeros, &[10, 100], Strategy::Parallel).map_err(|e| format!("{name}: {e}"))?;
        let (_, r10, _) = curve[0];
        let (_, r100, t100) = curve[1];
        let allowed = WEIL_RESIDUAL_FLOOR.max(t100);
        ensure(r100 <= allowed, || format!("{name}: residual {r100:e} > {allowed:e}"))?;
        worst_margin = worst_margin.max(r100 / allowed);
        if r100 <= r10 {
            improved += 1;
        }
        // semilocal bookkeeping: 2 g(0) log λ is linear in log λ
        let places = [Place::Archimedean, Place::Finite(p(2)), Place::Finite(p(3))];
        let coeff = semilocal_divergent_coefficient(&g);
        let div = |l: f64| semilocal_rhs(&g, &places, l).map(|r| r.divergent).map_err(|e| e.to_string());
        for (a, b) in [(2.0, 3.0), (0.5, 7.0), (10.0, 10.0)] {
            let (da, db, dab) = (div(a)?, div(b)?, div(a * b)?);
            let scale = coeff.abs() * (a * b).ln().abs().max(1.0);
            ensure((dab - da - db).abs() <= LOG_LINEARITY_RTOL * scale.max(f64::MIN_POSITIVE), || format!("{name}: divergent part not additive in log λ"))?;
            ensure(da == coeff * a.ln(), || format!("{name}: divergent part ≠ 2 g(0) log λ"))?;
        }
        let rhs = semilocal_rhs(&g, &places, 2.0).map_err(|e| e.to_string())?;
        let direct = local_term_arch(&g).map_err(|e| e.to_string())?.value + local_term_finite(&g, p(2)) + local_term_finite(&g, p(3));
        ensure((rhs.finite - direct).abs() <= 1e-12 * direct.abs().max(1.0), || format!("{name}: finite part ≠ sum of local terms"))?;
    }
    ensure(improved >= WEIL_MONOTONE_MIN, || format!("only {improved}/10 functions improve from N = 10 to N = 100"))?;
    Ok(format!("100 zeros certified, 10/10 within bound (worst residual/allowed {worst_margin:.1e}), {improved}/10 improve"))
}

// 11 ------------------------------------------------------------------------

fn criterion_product_formula() -> Check {
    let mut rng = rng(11);
    let mut done = 0;
    while done < 1_000 {
        let u = &random_rational(&mut rng) * rat(rng.gen_range(-50..=50), rng.gen_range(1..=50));
        if u.is_zero() || u.is_one() {
            continue;
        }
        let product = dist_trace_product(&u).map_err(|e| e.to_string())?;
        ensure(product.is_one(), || format!("u = {u}: product {product}"))?;
        // each factor against a direct valuation
        let d = Rational::one() - &u;
        for v in relevant_places(&u).map_err(|e| e.to_string())? {
            let expected = match v {
                Place::Archimedean => d.abs().recip(),
                Place::Finite(q) => pow(q, rational_valuation(&d, q.get())),
            };
            ensure(dist_trace(&u, v).unwrap() == expected, || format!("u = {u}: factor at {v}"))?;
        }
        done += 1;
    }
    ensure(dist_trace(&Rational::one(), Place::Archimedean) == Err(Error::FixedPointSingular), || "u = 1 accepted".into())?;
    Ok("1000 rationals, exact".into())
}
