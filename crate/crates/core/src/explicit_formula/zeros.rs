//! Tables of ordinates of zeta zeros on the critical line, and a verifier
//! based on Euler–Maclaurin summation and the Riemann–Siegel theta function.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{self, Strategy};

const BUNDLED: &str = include_str!("../../data/zeros100.txt");

/// Ordinate of the first zero, for sanity-checking tables.
pub const FIRST_ORDINATE: f64 = 14.134_725_141_734_693;

/// Ascending positive ordinates `γ_k` of zeros `1/2 + iγ_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroTable {
    ordinates: Vec<f64>,
    provenance: String,
}

impl ZeroTable {
    /// Parses one ordinate per line; lines starting with `#` form the
    /// provenance note.
    pub fn parse(text: &str) -> Result<ZeroTable> {
        let mut ordinates = Vec::new();
        let mut provenance = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if let Some(note) = line.strip_prefix('#') {
                provenance.push(note.trim().to_string());
            } else if !line.is_empty() {
                let g: f64 = line.parse().map_err(|_| Error::Parse(format!("line {}: bad ordinate {line:?}", i + 1)))?;
                ordinates.push(g);
            }
        }
        ZeroTable::new(ordinates, provenance.join("\n"))
    }

    pub fn new(ordinates: Vec<f64>, provenance: String) -> Result<ZeroTable> {
        if let Some(first) = ordinates.first() {
            if (first - FIRST_ORDINATE).abs() > 1e-6 {
                return Err(Error::Parse(format!("first ordinate {first} is not the first zeta zero")));
            }
        }
        if ordinates.iter().any(|g| !g.is_finite()) || ordinates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Parse("ordinates must be finite and strictly increasing".into()));
        }
        Ok(ZeroTable { ordinates, provenance })
    }

    pub fn load(path: &Path) -> Result<ZeroTable> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        ZeroTable::parse(&text)
    }

    /// The first 100 ordinates shipped with the crate.
    pub fn bundled() -> ZeroTable {
        ZeroTable::parse(BUNDLED).expect("bundled table is well formed")
    }

    pub fn ordinates(&self) -> &[f64] {
        &self.ordinates
    }

    pub fn count(&self) -> usize {
        self.ordinates.len()
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }
}

const BERNOULLI_2K: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

/// `ζ(s)` by Euler–Maclaurin summation, for `Re s > 0` and moderate `|Im s|`.
pub fn zeta_euler_maclaurin(s: Complex64) -> Complex64 {
    let n = (s.im.abs() as usize).max(10) + 10;
    let nf = n as f64;
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 1..n {
        sum += (-s * (k as f64).ln()).exp();
    }
    let n_pow = (-s * nf.ln()).exp();
    sum += n_pow * nf / (s - 1.0) + n_pow * 0.5;
    // B_{2k}/(2k)! · s(s+1)···(s+2k-2) · N^{-s-2k+1}
    let mut rising = s;
    let mut fact = 2.0;
    let mut npow = n_pow / nf;
    for (k, b) in BERNOULLI_2K.iter().enumerate() {
        sum += rising * npow * (b / fact);
        let j = 2 * k as u32 + 1;
        rising = rising * (s + j as f64) * (s + (j + 1) as f64);
        fact *= ((j + 2) * (j + 3)) as f64;
        npow /= nf * nf;
    }
    sum
}

/// Riemann–Siegel theta by its Stirling expansion, accurate for `t ≥ 10`.
pub fn riemann_siegel_theta(t: f64) -> f64 {
    let t2 = t * t;
    t / 2.0 * (t / (2.0 * PI)).ln() - t / 2.0 - PI / 8.0
        + 1.0 / (48.0 * t)
        + 7.0 / (5760.0 * t * t2)
        + 31.0 / (80640.0 * t * t2 * t2)
        + 127.0 / (430080.0 * t * t2 * t2 * t2)
}

/// Hardy's `Z(t) = e^{iθ(t)} ζ(1/2 + it)`, real for real `t`.
pub fn hardy_z(t: f64) -> f64 {
    let z = zeta_euler_maclaurin(Complex64::new(0.5, t)) * Complex64::from_polar(1.0, riemann_siegel_theta(t));
    z.re
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroCheck {
    pub index: usize,
    pub gamma: f64,
    pub zeta_abs: f64,
    pub z_below: f64,
    pub z_above: f64,
    pub certified: bool,
}

/// Certifies each ordinate to within `delta` by a sign change of `Z` on
/// `[γ - δ, γ + δ]`.
pub fn verify_zeros(table: &ZeroTable, delta: f64, strategy: Strategy) -> Vec<ZeroCheck> {
    par::map(strategy, table.ordinates(), |&gamma| {
        let z_below = hardy_z(gamma - delta);
        let z_above = hardy_z(gamma + delta);
        let zeta_abs = zeta_euler_maclaurin(Complex64::new(0.5, gamma)).norm();
        ZeroCheck { index: 0, gamma, zeta_abs, z_below, z_above, certified: z_below * z_above < 0.0 }
    })
    .into_iter()
    .enumerate()
    .map(|(i, c)| ZeroCheck { index: i + 1, ..c })
    .collect()
}
