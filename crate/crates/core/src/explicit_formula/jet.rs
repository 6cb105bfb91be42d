//! Truncated Taylor series in one variable, for derivatives of closed-form
//! test functions.

use std::ops::{Add, Mul, Neg, Sub};

/// `Σ_{k ≤ order} c_k (t - t0)^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    c: Vec<f64>,
}

impl Jet {
    pub fn constant(x: f64, order: usize) -> Jet {
        let mut c = vec![0.0; order + 1];
        c[0] = x;
        Jet { c }
    }

    /// The identity function expanded at `t0`.
    pub fn variable(t0: f64, order: usize) -> Jet {
        let mut j = Jet::constant(t0, order);
        if order > 0 {
            j.c[1] = 1.0;
        }
        j
    }

    /// A jet from derivative values `f, f', f'', ...`.
    pub fn from_derivatives(d: &[f64]) -> Jet {
        let mut fact = 1.0;
        let c = d
            .iter()
            .enumerate()
            .map(|(k, v)| {
                if k > 0 {
                    fact *= k as f64;
                }
                v / fact
            })
            .collect();
        Jet { c }
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.c
    }

    /// `f^{(k)}(t0)` for `k = 0..=order`.
    pub fn derivatives(&self) -> Vec<f64> {
        let mut fact = 1.0;
        self.c
            .iter()
            .enumerate()
            .map(|(k, v)| {
                if k > 0 {
                    fact *= k as f64;
                }
                v * fact
            })
            .collect()
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet { c: self.c.iter().map(|x| x * s).collect() }
    }

    pub fn recip(&self) -> Jet {
        let n = self.c.len();
        let mut b = vec![0.0; n];
        b[0] = 1.0 / self.c[0];
        for k in 1..n {
            let s: f64 = (1..=k).map(|j| self.c[j] * b[k - j]).sum();
            b[k] = -s / self.c[0];
        }
        Jet { c: b }
    }

    pub fn exp(&self) -> Jet {
        let n = self.c.len();
        let mut b = vec![0.0; n];
        b[0] = self.c[0].exp();
        for k in 1..n {
            let s: f64 = (1..=k).map(|j| j as f64 * self.c[j] * b[k - j]).sum();
            b[k] = s / k as f64;
        }
        Jet { c: b }
    }

    /// `(sin, cos)` of the jet.
    pub fn sin_cos(&self) -> (Jet, Jet) {
        let n = self.c.len();
        let mut s = vec![0.0; n];
        let mut c = vec![0.0; n];
        (s[0], c[0]) = self.c[0].sin_cos();
        for k in 1..n {
            let mut ds = 0.0;
            let mut dc = 0.0;
            for j in 1..=k {
                ds += j as f64 * self.c[j] * c[k - j];
                dc += j as f64 * self.c[j] * s[k - j];
            }
            s[k] = ds / k as f64;
            c[k] = -dc / k as f64;
        }
        (Jet { c: s }, Jet { c })
    }

    pub fn cos(&self) -> Jet {
        self.sin_cos().1
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, o: &Jet) -> Jet {
        Jet { c: self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, o: &Jet) -> Jet {
        Jet { c: self.c.iter().zip(&o.c).map(|(a, b)| a - b).collect() }
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, o: &Jet) -> Jet {
        let n = self.c.len().min(o.c.len());
        let c = (0..n).map(|k| (0..=k).map(|j| self.c[j] * o.c[k - j]).sum()).collect();
        Jet { c }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_of_linear() {
        let t = Jet::variable(0.3, 5).scale(2.0);
        for (k, d) in t.exp().derivatives().iter().enumerate() {
            assert!((d - 2f64.powi(k as i32) * 0.6f64.exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn cos_and_recip() {
        let t = Jet::variable(0.7, 4);
        let d = t.cos().derivatives();
        let exact = [0.7f64.cos(), -0.7f64.sin(), -0.7f64.cos(), 0.7f64.sin(), 0.7f64.cos()];
        for (a, b) in d.iter().zip(exact) {
            assert!((a - b).abs() < 1e-14);
        }
        // 1/t has derivatives (-1)^k k! / t^{k+1}
        let r = t.recip().derivatives();
        let mut fact = 1.0;
        for (k, v) in r.iter().enumerate() {
            if k > 0 {
                fact *= k as f64;
            }
            let expect = (-1f64).powi(k as i32) * fact / 0.7f64.powi(k as i32 + 1);
            assert!((v - expect).abs() < 1e-10 * expect.abs());
        }
    }

    #[test]
    fn product_rule() {
        let t = Jet::variable(1.1, 3);
        let f = &t * &t.exp();
        let e = 1.1f64.exp();
        let expect = [1.1 * e, 2.1 * e, 3.1 * e, 4.1 * e];
        for (a, b) in f.derivatives().iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(Jet::from_derivatives(&f.derivatives()).coefficients().len(), 4);
    }
}
