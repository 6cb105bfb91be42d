//! Even, compactly supported test functions `g(t)` on the real line, with
//! `t = log |u|` the radial coordinate on the idele class group.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::jet::Jet;
use crate::error::{Error, Result};

/// The closed-form families. Every member is even with support in `[-T, T]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TestFunctionKind {
    /// `g ≡ 0` on `[-T, T]`.
    Zero { support: f64 },
    /// `φ((t - c)/w) + φ((t + c)/w)` (a single `φ(t/w)` when `c = 0`), with
    /// `φ(x) = exp(-s x²/(1 - x²))` on `|x| < 1`.
    Bump { center: f64, half_width: f64, sharpness: f64 },
    /// `φ(t/T) cos(ω t)`.
    BumpCos { support: f64, sharpness: f64, omega: f64 },
    /// `exp(-t²/2σ²) cos(ω t) φ(t/T)`.
    Gaussian { support: f64, sigma: f64, omega: f64, sharpness: f64 },
    /// Smoothed triangle: the centered cardinal B-spline of order `n` on
    /// `[-T, T]`, normalized to `g(0) = 1`, times `cos(ω t)`. It is
    /// `C^{n-2}` with a piecewise constant `(n-1)`-st derivative.
    Spline { support: f64, order: u32, omega: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TestFunction {
    kind: TestFunctionKind,
}

fn bump(x: f64, s: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        let x2 = x * x;
        (-s * x2 / (1.0 - x2)).exp()
    }
}

fn bump_jet(x: &Jet, s: f64) -> Jet {
    if x.value().abs() >= 1.0 {
        return Jet::constant(0.0, x.order());
    }
    let x2 = x * x;
    let one = Jet::constant(1.0, x.order());
    (&x2 * &(&one - &x2).recip()).scale(-s).exp()
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `M_n^{(k)}(x)` for the cardinal B-spline of order `n` centered at `0`.
fn bspline(n: u32, x: f64, k: u32) -> f64 {
    if x.abs() >= n as f64 / 2.0 || k >= n {
        return 0.0;
    }
    if x > 0.0 {
        // fewer cancelling terms on the left half
        let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
        return sign * bspline(n, -x, k);
    }
    let p = n - 1 - k;
    let fact: f64 = (1..=p).map(|i| i as f64).product();
    let mut s = 0.0;
    for j in 0..=n {
        let y = x + n as f64 / 2.0 - j as f64;
        if y > 0.0 {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            s += sign * binomial(n, j) * y.powi(p as i32);
        }
    }
    s / fact
}

/// `(sinh(ζ/2)/(ζ/2))^n`, the Laplace transform of the cardinal B-spline.
fn bspline_laplace(n: u32, zeta: Complex64) -> Complex64 {
    let half = zeta * 0.5;
    let ratio = if half.norm() < 1e-4 {
        let h2 = half * half;
        Complex64::new(1.0, 0.0) + h2 / 6.0 + h2 * h2 / 120.0
    } else {
        half.sinh() / half
    };
    ratio.powu(n)
}

impl TestFunction {
    pub fn new(kind: TestFunctionKind) -> Result<TestFunction> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("{name} must be positive and finite, got {v}")))
            }
        };
        match &kind {
            TestFunctionKind::Zero { support } => positive("T", *support)?,
            TestFunctionKind::Bump { center, half_width, sharpness } => {
                positive("w", *half_width)?;
                positive("s", *sharpness)?;
                if !(center.is_finite() && *center >= 0.0) {
                    return Err(Error::InvalidArgument(format!("center must be non-negative, got {center}")));
                }
            }
            TestFunctionKind::BumpCos { support, sharpness, omega } => {
                positive("T", *support)?;
                positive("s", *sharpness)?;
                if !omega.is_finite() {
                    return Err(Error::InvalidArgument("omega must be finite".into()));
                }
            }
            TestFunctionKind::Gaussian { support, sigma, omega, sharpness } => {
                positive("T", *support)?;
                positive("sigma", *sigma)?;
                positive("s", *sharpness)?;
                if !omega.is_finite() {
                    return Err(Error::InvalidArgument("omega must be finite".into()));
                }
            }
            TestFunctionKind::Spline { support, order, omega } => {
                positive("T", *support)?;
                if !(2..=12).contains(order) {
                    return Err(Error::InvalidArgument(format!("spline order must be in 2..=12, got {order}")));
                }
                if !omega.is_finite() {
                    return Err(Error::InvalidArgument("omega must be finite".into()));
                }
            }
        }
        Ok(TestFunction { kind })
    }

    pub fn zero(support: f64) -> TestFunction {
        TestFunction { kind: TestFunctionKind::Zero { support } }
    }

    pub fn kind(&self) -> &TestFunctionKind {
        &self.kind
    }

    /// `T` with `g = 0` outside `[-T, T]`.
    pub fn support(&self) -> f64 {
        match self.kind {
            TestFunctionKind::Zero { support }
            | TestFunctionKind::BumpCos { support, .. }
            | TestFunctionKind::Gaussian { support, .. }
            | TestFunctionKind::Spline { support, .. } => support,
            TestFunctionKind::Bump { center, half_width, .. } => center + half_width,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, TestFunctionKind::Zero { .. })
    }

    /// Number of integrations by parts that `|ĥ(1/2 + ir)| ≤ C_k / r^k`
    /// supports; `None` for smooth functions.
    pub fn smoothness(&self) -> Option<usize> {
        match self.kind {
            TestFunctionKind::Spline { order, .. } => Some(order as usize - 1),
            _ => None,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match self.kind {
            TestFunctionKind::Zero { .. } => 0.0,
            TestFunctionKind::Bump { center, half_width, sharpness } => {
                if center == 0.0 {
                    bump(t / half_width, sharpness)
                } else {
                    bump((t - center) / half_width, sharpness) + bump((t + center) / half_width, sharpness)
                }
            }
            TestFunctionKind::BumpCos { support, sharpness, omega } => bump(t / support, sharpness) * (omega * t).cos(),
            TestFunctionKind::Gaussian { support, sigma, omega, sharpness } => {
                let w = bump(t / support, sharpness);
                if w == 0.0 {
                    0.0
                } else {
                    (-t * t / (2.0 * sigma * sigma)).exp() * (omega * t).cos() * w
                }
            }
            TestFunctionKind::Spline { support, order, omega } => {
                let h = 2.0 * support / order as f64;
                bspline(order, t / h, 0) / bspline(order, 0.0, 0) * (omega * t).cos()
            }
        }
    }

    /// Taylor jet of `g` at `t` up to the given order.
    pub fn jet(&self, t: f64, order: usize) -> Jet {
        let x = Jet::variable(t, order);
        match self.kind {
            TestFunctionKind::Zero { .. } => Jet::constant(0.0, order),
            TestFunctionKind::Bump { center, half_width, sharpness } => {
                let shifted = |c: f64| bump_jet(&(&x - &Jet::constant(c, order)).scale(1.0 / half_width), sharpness);
                if center == 0.0 {
                    shifted(0.0)
                } else {
                    &shifted(center) + &shifted(-center)
                }
            }
            TestFunctionKind::BumpCos { support, sharpness, omega } => {
                &bump_jet(&x.scale(1.0 / support), sharpness) * &x.scale(omega).cos()
            }
            TestFunctionKind::Gaussian { support, sigma, omega, sharpness } => {
                let gauss = (&x * &x).scale(-1.0 / (2.0 * sigma * sigma)).exp();
                let window = bump_jet(&x.scale(1.0 / support), sharpness);
                &(&gauss * &x.scale(omega).cos()) * &window
            }
            TestFunctionKind::Spline { support, order: n, omega } => {
                let h = 2.0 * support / n as f64;
                let m0 = bspline(n, 0.0, 0);
                let d: Vec<f64> =
                    (0..=order).map(|k| bspline(n, t / h, k as u32) / (m0 * h.powi(k as i32))).collect();
                &Jet::from_derivatives(&d) * &x.scale(omega).cos()
            }
        }
    }

    /// Intervals covering the support on which `g` is smooth, for
    /// quadrature.
    pub fn pieces(&self) -> Vec<(f64, f64)> {
        match self.kind {
            TestFunctionKind::Zero { .. } => Vec::new(),
            TestFunctionKind::Bump { center, half_width, .. } => {
                if center == 0.0 {
                    vec![(-half_width, 0.0), (0.0, half_width)]
                } else if center >= half_width {
                    vec![(-center - half_width, -center), (-center, -center + half_width), (center - half_width, center), (center, center + half_width)]
                } else {
                    let t = center + half_width;
                    let a = half_width - center;
                    vec![(-t, -a), (-a, 0.0), (0.0, a), (a, t)]
                }
            }
            TestFunctionKind::BumpCos { support, .. } | TestFunctionKind::Gaussian { support, .. } => {
                vec![(-support, 0.0), (0.0, support)]
            }
            TestFunctionKind::Spline { support, order, .. } => {
                let h = 2.0 * support / order as f64;
                (0..order).map(|j| (-support + j as f64 * h, -support + (j + 1) as f64 * h)).collect()
            }
        }
    }

    /// `∫ g(t) e^{zt} dt` in closed form, when the family has one.
    pub fn closed_form_mellin(&self, z: Complex64) -> Option<Complex64> {
        match self.kind {
            TestFunctionKind::Zero { .. } => Some(Complex64::new(0.0, 0.0)),
            TestFunctionKind::Spline { support, order, omega } => {
                let h = 2.0 * support / order as f64;
                let scale = h / bspline(order, 0.0, 0);
                let w = Complex64::new(0.0, omega);
                let plus = bspline_laplace(order, (z + w) * h);
                let minus = bspline_laplace(order, (z - w) * h);
                Some((plus + minus) * (0.5 * scale))
            }
            _ => None,
        }
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            TestFunctionKind::Zero { support } => write!(f, "zero:T={support}"),
            TestFunctionKind::Bump { center, half_width, sharpness } => write!(f, "bump:c={center},w={half_width},s={sharpness}"),
            TestFunctionKind::BumpCos { support, sharpness, omega } => write!(f, "bumpcos:T={support},s={sharpness},omega={omega}"),
            TestFunctionKind::Gaussian { support, sigma, omega, sharpness } => {
                write!(f, "gaussian:T={support},sigma={sigma},omega={omega},s={sharpness}")
            }
            TestFunctionKind::Spline { support, order, omega } => write!(f, "spline:T={support},n={order},omega={omega}"),
        }
    }
}

/// Parses `kind:key=value,...`. Unlisted keys take defaults: `T = 5`,
/// `s = 1`, `omega = 0`, `sigma = 1`, `c = 0`, `w = 1`, `n = 6`. A constant
/// such as `log2` or `log3` is accepted wherever a number is.
impl FromStr for TestFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<TestFunction> {
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut params = std::collections::BTreeMap::new();
        for kv in rest.split(',').filter(|kv| !kv.trim().is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value in test function, got {kv:?}")))?;
            params.insert(k.trim().to_string(), parse_number(v.trim())?);
        }
        let mut take = |key: &str, default: f64| params.remove(key).unwrap_or(default);
        let kind = match name.trim() {
            "zero" => TestFunctionKind::Zero { support: take("T", 5.0) },
            "bump" => TestFunctionKind::Bump { center: take("c", 0.0), half_width: take("w", 1.0), sharpness: take("s", 1.0) },
            "bumpcos" => TestFunctionKind::BumpCos { support: take("T", 5.0), sharpness: take("s", 1.0), omega: take("omega", 0.0) },
            "gaussian" => TestFunctionKind::Gaussian {
                support: take("T", 5.0),
                sigma: take("sigma", 1.0),
                omega: take("omega", 0.0),
                sharpness: take("s", 1.0),
            },
            "spline" => {
                let n = take("n", 6.0);
                if n.fract() != 0.0 || n < 0.0 {
                    return Err(Error::Parse(format!("spline order must be an integer, got {n}")));
                }
                TestFunctionKind::Spline { support: take("T", 5.0), order: n as u32, omega: take("omega", 0.0) }
            }
            other => return Err(Error::Parse(format!("unknown test function kind {other:?}"))),
        };
        if let Some(k) = params.keys().next() {
            return Err(Error::Parse(format!("unknown parameter {k:?} for {name}")));
        }
        TestFunction::new(kind)
    }
}

fn parse_number(v: &str) -> Result<f64> {
    if let Some(n) = v.strip_prefix("log") {
        let n: f64 = n.parse().map_err(|_| Error::Parse(format!("bad number {v:?}")))?;
        return Ok(n.ln());
    }
    v.parse().map_err(|_| Error::Parse(format!("bad number {v:?}")))
}
