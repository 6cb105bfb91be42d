use std::path::Path;

use num_bigint::BigUint;
use picmonoid::adeles::Adele;
use picmonoid::arith::format_rational;
use picmonoid::covers::{self, CoverSpec, TorusPoint};
use picmonoid::divisors::format_witness;
use picmonoid::explicit_formula::{
    self as ef, local_term_arch, local_term_finite, residual_curve, residual_curve_data, semilocal_rhs, Place, TestFunction, ZeroTable,
};
use picmonoid::frames_roots::{self as fr, Frame};
use picmonoid::par::Strategy;
use picmonoid::picard::{abel_jacobi_set, unit_ball_sections};
use picmonoid::{Error, Rational, Result};
use serde::Serialize;
use serde_json::{json, Value};

use crate::input;
use crate::{AdeleCmd, CoverArgs, CoverCmd, DivisorCmd, FrameCmd, Outcome, PicCmd, WeilCmd};

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("library types serialize")
}

fn outcome<T: Serialize>(x: &T, text: impl Into<String>) -> Outcome {
    Outcome { payload: to_value(x), text: text.into(), diagnostics: Vec::new() }
}

/// Text is the pretty JSON itself.
fn structured<T: Serialize>(x: &T) -> Outcome {
    let payload = to_value(x);
    let text = serde_json::to_string_pretty(&payload).expect("serializable");
    Outcome { payload, text, diagnostics: Vec::new() }
}

fn level(s: &str) -> Result<BigUint> {
    s.trim().parse().map_err(|_| Error::Parse(format!("not a positive integer: {s:?}")))
}

fn rationals(xs: &[Rational]) -> Vec<String> {
    xs.iter().map(format_rational).collect()
}

pub fn divisor(cmd: DivisorCmd) -> Result<Outcome> {
    match cmd {
        DivisorCmd::Add { a, b } => {
            let sum = input::divisor(&a)?.add(&input::divisor(&b)?);
            Ok(outcome(&sum, sum.to_string()))
        }
        DivisorCmd::Equiv { a, b } => {
            let w = input::divisor(&a)?.classes_equivalent(&input::divisor(&b)?);
            let text = match &w {
                Some(q) => format!("equivalent, witness {}", format_witness(q)),
                None => "not equivalent".into(),
            };
            Ok(outcome(&json!({ "equivalent": w.is_some(), "witness": w.as_ref().map(format_rational) }), text))
        }
        DivisorCmd::Normalize { d } => {
            let nf = input::divisor(&d)?.class_normalize();
            let text = format!("S = {}, witness {}", nf.s, format_witness(&nf.witness));
            Ok(outcome(&nf, text))
        }
        DivisorCmd::Sections { d, x } => {
            let d = input::divisor(&d)?;
            match x {
                Some(x) => {
                    let inside = d.sections_contains(&input::rational(&x)?);
                    Ok(outcome(&json!({ "contains": inside }), inside.to_string()))
                }
                None => {
                    let g = format_rational(&d.section_generator()?);
                    Ok(outcome(&json!({ "generator": g }), format!("L(D) = {g} Z")))
                }
            }
        }
    }
}

pub fn adele(cmd: AdeleCmd) -> Result<Outcome> {
    match cmd {
        AdeleCmd::Mul { a, b } => {
            let a: Adele = input::json(&a)?;
            Ok(structured(&a.multiply(&input::json(&b)?)))
        }
        AdeleCmd::Todivisor { a } => {
            let d = input::json::<Adele>(&a)?.finite.to_divisor();
            Ok(outcome(&d, d.to_string()))
        }
        AdeleCmd::Xqclass { a } => Ok(structured(&input::json::<Adele>(&a)?.xq_class())),
        AdeleCmd::Pair { a, x } => {
            let a: Adele = input::json(&a)?;
            let v = a.finite.psi_pair(&input::rational(&x)?)?;
            let s = format_rational(v.value());
            Ok(outcome(&json!({ "value": s }), s.clone()))
        }
    }
}

pub fn pic(cmd: PicCmd) -> Result<Outcome> {
    match cmd {
        PicCmd::Product { a, b } => Ok(structured(&input::pic_class(&a)?.product(&input::pic_class(&b)?))),
        PicCmd::Equal { a, b } => {
            let eq = input::pic_class(&a)? == input::pic_class(&b)?;
            Ok(outcome(&json!({ "equal": eq }), eq.to_string()))
        }
        PicCmd::Spectrum { class, bound, caps, cap, list } => {
            let class = input::pic_class(&class)?;
            let caps = match (caps, cap) {
                (Some(c), _) => input::caps(&c)?,
                (None, Some(k)) => class.s_locus().members.iter().map(|p| (*p, k)).collect(),
                (None, None) => Default::default(),
            };
            let bound = input::rational(&bound)?;
            let sample = class.value_spectrum_sample(&bound, &caps)?;
            let mut payload = json!({ "sample": sample });
            let mut text = match &sample.count {
                Some(n) => format!("{{k · {} : 0 ≤ k ≤ {n}}}", format_rational(&sample.step)),
                None => "empty".into(),
            };
            if list {
                let xs = rationals(&class.value_spectrum_enumerate(&bound, &caps, Strategy::Parallel)?);
                text = xs.join("\n");
                payload["elements"] = json!(xs);
            }
            Ok(Outcome { payload, text, diagnostics: Vec::new() })
        }
        PicCmd::Unitball { d, lambda } => {
            let xs = rationals(&unit_ball_sections(&input::divisor(&d)?, &input::rational(&lambda)?)?);
            Ok(outcome(&xs, xs.join("\n")))
        }
        PicCmd::Jac { class } => Ok(structured(&input::pic_class(&class)?.jac_project())),
        PicCmd::Theta { primes, cofinite } => Ok(structured(&abel_jacobi_set(&input::prime_set(&primes, cofinite)?))),
    }
}

pub fn frame(cmd: FrameCmd) -> Result<Outcome> {
    match cmd {
        FrameCmd::Tensor { f1, f2 } => {
            let (f1, f2): (Frame, Frame) = (input::json(&f1)?, input::json(&f2)?);
            Ok(structured(&fr::frame_tensor(&f1, &f2)))
        }
        FrameCmd::Root { frame, n, x } => {
            let f: Frame = input::json(&frame)?;
            let v = fr::root_eval(&f, &level(&n)?, &input::rational(&x)?)?;
            let s = format_rational(v.value());
            Ok(outcome(&json!({ "level": n, "x": x, "value": s }), s.clone()))
        }
        FrameCmd::Dualcheck { f1, f2, n, x, y } => {
            let (f1, f2): (Frame, Frame) = (input::json(&f1)?, input::json(&f2)?);
            let ok = fr::root_tensor_check(&f1, &f2, &level(&n)?, &input::rational(&x)?, &input::rational(&y)?)?;
            Ok(outcome(&json!({ "holds": ok }), ok.to_string()))
        }
        FrameCmd::Torsion { frame, prime, x } => {
            let dual = fr::dual_torsion(&input::json(&frame)?);
            let mut out = structured(&dual);
            if let (Some(p), Some(x)) = (prime, x) {
                let order = dual.element_order(input::prime(&p)?, &input::rational(&x)?);
                let shown = order.as_ref().map_or("torsion free".to_string(), |o| o.to_string());
                out.payload = json!({ "descriptor": dual, "order": order.map(|o| o.to_string()) });
                out.text = format!("order {shown}");
            }
            Ok(out)
        }
    }
}

fn build_cover(args: &CoverArgs) -> Result<CoverSpec> {
    match (args.quadratic, args.modulus) {
        (Some(d), _) => covers::quadratic_cover(d),
        (None, Some(m)) => covers::cover_from_character(m, &input::u64_list(&args.kernel)?),
        (None, None) => Err(Error::InvalidArgument("need --modulus or --quadratic".into())),
    }
}

pub fn cover(cmd: CoverCmd) -> Result<Outcome> {
    match cmd {
        CoverCmd::Build(args) => {
            let c = build_cover(&args)?;
            Ok(outcome(&c, c.to_string()))
        }
        CoverCmd::Frobenius { cover, prime } => {
            let c = build_cover(&cover)?;
            let g = covers::frobenius(&c, input::prime(&prime)?)?;
            let (rep, order) = (c.representative(g), c.element_order(g));
            Ok(outcome(&json!({ "element": g.0, "representative": rep, "order": order }), format!("[{}] ∋ {rep}, order {order}", g.0)))
        }
        CoverCmd::Split { cover, primes } => {
            let c = build_cover(&cover)?;
            let mut text = String::from("p\tfrobenius\tcomponents\tdegree\n");
            let mut rows = Vec::new();
            for p in input::primes(&primes)? {
                match covers::frobenius(&c, p) {
                    Ok(g) => {
                        let (components, degree) = covers::fiber_decomposition(&c, p)?;
                        let rep = c.representative(g);
                        text.push_str(&format!("{p}\t{rep}\t{components}\t{degree}\n"));
                        rows.push(json!({ "p": p, "frobenius": rep, "components": components, "degree": degree }));
                    }
                    Err(Error::Ramified(_)) => {
                        text.push_str(&format!("{p}\tramified\t-\t-\n"));
                        rows.push(json!({ "p": p, "frobenius": "ramified" }));
                    }
                    Err(e) => return Err(e),
                }
            }
            Ok(Outcome { payload: json!(rows), text, diagnostics: Vec::new() })
        }
        CoverCmd::Ramified(args) => {
            let r = covers::ramified_set(&build_cover(&args)?);
            Ok(outcome(&r, r.to_string()))
        }
        CoverCmd::Torus { point, step } => {
            let t: TorusPoint = input::json(&point)?;
            Ok(structured(&covers::torus_normalize(&t.step(step))))
        }
    }
}

fn zero_table(path: Option<String>) -> Result<(ZeroTable, Vec<String>)> {
    let path = path.or_else(|| std::env::var("PICMONOID_ZEROS").ok().filter(|s| !s.is_empty()));
    Ok(match path {
        Some(p) => {
            let t = ZeroTable::load(Path::new(&p))?;
            let note = format!("{} zeros from {p}", t.count());
            (t, vec![note])
        }
        None => (ZeroTable::bundled(), vec!["bundled table of 100 zeros".into()]),
    })
}

fn test_function(s: &str) -> Result<TestFunction> {
    s.parse()
}

pub fn weil(cmd: WeilCmd) -> Result<Outcome> {
    match cmd {
        WeilCmd::Balance { tf, zeros, n, curve, sequential } => {
            let g = test_function(&tf)?;
            let (zeros, mut diagnostics) = zero_table(zeros)?;
            let strategy = if sequential { Strategy::Sequential } else { Strategy::Parallel };
            let report = ef::balance(&g, &zeros, n, strategy)?;
            if let Some(path) = curve {
                let ns: Vec<usize> = (1..=n).collect();
                let data = residual_curve_data(&residual_curve(&g, &zeros, &ns, strategy)?);
                std::fs::write(&path, data).map_err(|e| Error::InvalidArgument(format!("{path}: {e}")))?;
                diagnostics.push(format!("residual curve written to {path}"));
            }
            if !report.within(1e-2) {
                diagnostics.push("residual exceeds max(1e-2, tail bound)".into());
            }
            let text = format!(
                "{}\nspectral  {:.12}\ngeometric {:.12}\nresidual  {:.3e} (tail bound {:.3e}, N = {})",
                report.test_function, report.spectral_side, report.geometric_side, report.residual, report.tail_bound, report.zeros_used
            );
            let mut out = outcome(&report, text);
            out.diagnostics = diagnostics;
            Ok(out)
        }
        WeilCmd::Localterm { tf, place } => {
            let g = test_function(&tf)?;
            let (value, error) = match place.parse::<Place>()? {
                Place::Archimedean => {
                    let r = local_term_arch(&g)?;
                    (r.value, r.error)
                }
                Place::Finite(p) => (local_term_finite(&g, p), 0.0),
            };
            Ok(outcome(&json!({ "place": place, "value": value, "error": error }), format!("{value:.15e}")))
        }
        WeilCmd::Zerosverify { zeros, delta } => {
            let (zeros, diagnostics) = zero_table(zeros)?;
            let checks = ef::verify_zeros(&zeros, delta, Strategy::Parallel);
            let failed: Vec<usize> = checks.iter().filter(|c| !c.certified).map(|c| c.index).collect();
            let text = if failed.is_empty() {
                format!("all {} ordinates certified to {delta:e}", checks.len())
            } else {
                format!("{} of {} ordinates not certified: {failed:?}", failed.len(), checks.len())
            };
            let mut out = outcome(&checks, text);
            out.diagnostics = diagnostics;
            Ok(out)
        }
        WeilCmd::Semilocal { tf, places, lambda } => {
            let g = test_function(&tf)?;
            let places: Vec<Place> = places.split(',').filter(|s| !s.trim().is_empty()).map(str::parse).collect::<Result<_>>()?;
            let r = semilocal_rhs(&g, &places, lambda)?;
            Ok(outcome(&r, format!("divergent {:.15e}\nfinite    {:.15e}", r.divergent, r.finite)))
        }
    }
}
