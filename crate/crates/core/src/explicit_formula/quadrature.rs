//! Globally adaptive Gauss–Kronrod (7, 15) quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Values that can be integrated: real or complex.
pub trait Integrand: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn norm(self) -> f64;
}

impl Integrand for f64 {
    fn zero() -> Self {
        0.0
    }
    fn norm(self) -> f64 {
        self.abs()
    }
}

impl Integrand for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn norm(self) -> f64 {
        Complex64::norm(self)
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the odd-indexed Kronrod nodes 1, 3, 5, 7
const WG: [f64; 4] = [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// One Kronrod panel: the 15-point value, `|K15 - G7|` and the 15-point
/// estimate of `∫ |f|`.
pub fn gk15<T: Integrand, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> (T, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    let mut l1 = fc.norm() * WGK[7];
    for i in 0..7 {
        let dx = h * XGK[i];
        let (lo, hi) = (f(c - dx), f(c + dx));
        let s = lo + hi;
        k = k + s * WGK[i];
        l1 += (lo.norm() + hi.norm()) * WGK[i];
        if i % 2 == 1 {
            g = g + s * WG[i / 2];
        }
    }
    let k = k * h;
    let g = g * h;
    (k, (k - g).norm(), l1 * h.abs())
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<T> {
    pub value: T,
    pub error: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_panels: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs: 1e-13, rel: 1e-13, max_panels: 4000 }
    }
}

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
    l1: f64,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integrates `f` over the union of `intervals`, bisecting the panel with
/// the largest error estimate until the total estimate meets `tol` or falls
/// to the rounding level `50 ε ∫|f|`.
pub fn integrate<T: Integrand, F: Fn(f64) -> T>(f: F, intervals: &[(f64, f64)], tol: Tolerance) -> Result<Integral<T>> {
    let mut heap = BinaryHeap::new();
    for &(a, b) in intervals {
        if b > a {
            let (value, error, l1) = gk15(&f, a, b);
            heap.push(Panel { a, b, value, error, l1 });
        }
    }
    loop {
        let (value, error, l1) =
            heap.iter().fold((T::zero(), 0.0, 0.0), |(v, e, l), p| (v + p.value, e + p.error, l + p.l1));
        if error <= tol.abs.max(tol.rel * value.norm()).max(50.0 * f64::EPSILON * l1) {
            return Ok(Integral { value, error });
        }
        if heap.len() >= tol.max_panels {
            return Err(Error::QuadratureFailure { achieved: error });
        }
        let worst = heap.pop().expect("error above tolerance implies a panel");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(Error::QuadratureFailure { achieved: error });
        }
        for (a, b) in [(worst.a, mid), (mid, worst.b)] {
            let (value, error, l1) = gk15(&f, a, b);
            heap.push(Panel { a, b, value, error, l1 });
        }
    }
}
