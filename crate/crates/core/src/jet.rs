//! Truncated Taylor series ("jets") and the scalar abstraction shared with `f64`.
//!
//! A [`Jet`] of order `K` stores the coefficients `c_0..c_K` of a power
//! series in one variable. Arithmetic propagates coefficients exactly
//! (up to rounding), which gives Taylor coefficients of compositions
//! without finite differences. Closed-form maps written against [`Scalar`]
//! can therefore be evaluated on plain numbers or expanded in a parameter.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Numeric type accepted by the closed-form maps of this crate.
pub trait Scalar:
    Clone
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// A constant with the same shape as `self`.
    fn lift(&self, c: f64) -> Self;
    /// The constant term.
    fn value(&self) -> f64;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn exp(&self) -> Self;

    fn scale(&self, c: f64) -> Self {
        self.clone() * self.lift(c)
    }

    fn powi(&self, n: u32) -> Self {
        let mut acc = self.lift(1.0);
        for _ in 0..n {
            acc = acc * self.clone();
        }
        acc
    }
}

impl Scalar for f64 {
    fn lift(&self, c: f64) -> Self {
        c
    }
    fn value(&self) -> f64 {
        *self
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn powi(&self, n: u32) -> Self {
        f64::powi(*self, n as i32)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    c: Vec<f64>,
}

impl Jet {
    pub fn constant(value: f64, order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = value;
        Jet { c }
    }

    /// The independent variable `value + t`.
    pub fn variable(value: f64, order: usize) -> Self {
        let mut j = Jet::constant(value, order);
        if order >= 1 {
            j.c[1] = 1.0;
        }
        j
    }

    pub fn from_coeffs(c: Vec<f64>) -> Self {
        assert!(!c.is_empty(), "a jet needs at least one coefficient");
        Jet { c }
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.c.get(k).copied().unwrap_or(0.0)
    }

    pub(crate) fn set_coeff(&mut self, k: usize, v: f64) {
        self.c[k] = v;
    }

    /// Evaluates the truncated series at `t`.
    pub fn eval(&self, t: f64) -> f64 {
        self.c.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }

    fn check(&self, other: &Jet) {
        assert_eq!(self.c.len(), other.c.len(), "jet orders differ");
    }

    /// Simultaneous sine and cosine through the recurrences
    /// `s' = c u'`, `c' = −s u'`.
    fn sin_cos(&self) -> (Jet, Jet) {
        let n = self.c.len();
        let mut s = vec![0.0; n];
        let mut co = vec![0.0; n];
        s[0] = self.c[0].sin();
        co[0] = self.c[0].cos();
        for k in 1..n {
            let mut acc_s = 0.0;
            let mut acc_c = 0.0;
            for j in 1..=k {
                let ju = j as f64 * self.c[j];
                acc_s += ju * co[k - j];
                acc_c -= ju * s[k - j];
            }
            s[k] = acc_s / k as f64;
            co[k] = acc_c / k as f64;
        }
        (Jet { c: s }, Jet { c: co })
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(mut self, rhs: Jet) -> Jet {
        self.check(&rhs);
        for (a, b) in self.c.iter_mut().zip(rhs.c) {
            *a += b;
        }
        self
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: Jet) -> Jet {
        self.check(&rhs);
        for (a, b) in self.c.iter_mut().zip(rhs.c) {
            *a -= b;
        }
        self
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(mut self) -> Jet {
        for a in self.c.iter_mut() {
            *a = -*a;
        }
        self
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        self.check(&rhs);
        let n = self.c.len();
        let mut out = vec![0.0; n];
        for (k, o) in out.iter_mut().enumerate() {
            *o = (0..=k).map(|i| self.c[i] * rhs.c[k - i]).sum();
        }
        Jet { c: out }
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, rhs: Jet) -> Jet {
        self.check(&rhs);
        let n = self.c.len();
        let b0 = rhs.c[0];
        let mut out = vec![0.0; n];
        for k in 0..n {
            let acc: f64 = (0..k).map(|i| out[i] * rhs.c[k - i]).sum();
            out[k] = (self.c[k] - acc) / b0;
        }
        Jet { c: out }
    }
}

impl Scalar for Jet {
    fn lift(&self, c: f64) -> Self {
        Jet::constant(c, self.order())
    }

    fn value(&self) -> f64 {
        self.c[0]
    }

    fn sin(&self) -> Self {
        self.sin_cos().0
    }

    fn cos(&self) -> Self {
        self.sin_cos().1
    }

    fn sqrt(&self) -> Self {
        let n = self.c.len();
        let mut r = vec![0.0; n];
        r[0] = self.c[0].sqrt();
        for k in 1..n {
            let acc: f64 = (1..k).map(|i| r[i] * r[k - i]).sum();
            r[k] = (self.c[k] - acc) / (2.0 * r[0]);
        }
        Jet { c: r }
    }

    fn exp(&self) -> Self {
        let n = self.c.len();
        let mut e = vec![0.0; n];
        e[0] = self.c[0].exp();
        for k in 1..n {
            let acc: f64 = (1..=k).map(|j| j as f64 * self.c[j] * e[k - j]).sum();
            e[k] = acc / k as f64;
        }
        Jet { c: e }
    }

    fn scale(&self, c: f64) -> Self {
        Jet {
            c: self.c.iter().map(|v| v * c).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn factorial(k: usize) -> f64 {
        (1..=k).map(|i| i as f64).product()
    }

    #[test]
    fn sin_cos_match_maclaurin() {
        let t = Jet::variable(0.0, 8);
        let s = t.sin();
        let c = t.cos();
        for k in 0..=8 {
            let (es, ec) = match k % 4 {
                0 => (0.0, 1.0),
                1 => (1.0, 0.0),
                2 => (0.0, -1.0),
                _ => (-1.0, 0.0),
            };
            assert_relative_eq!(s.coeff(k), es / factorial(k), epsilon = 1e-15);
            assert_relative_eq!(c.coeff(k), ec / factorial(k), epsilon = 1e-15);
        }
    }

    #[test]
    fn division_inverts_multiplication() {
        let a = Jet::from_coeffs(vec![2.0, -1.0, 0.5, 3.0]);
        let b = Jet::from_coeffs(vec![4.0, 1.0, 0.0, -2.0]);
        let back = (a.clone() * b.clone()) / b;
        for k in 0..4 {
            assert_relative_eq!(back.coeff(k), a.coeff(k), epsilon = 1e-14);
        }
    }

    #[test]
    fn geometric_series() {
        // 4/(4 + t²) = 1 − t²/4 + t⁴/16 − …
        let t = Jet::variable(0.0, 6);
        let four = t.lift(4.0);
        let r = four.clone() / (four + t.clone() * t);
        let expect = [1.0, 0.0, -0.25, 0.0, 1.0 / 16.0, 0.0, -1.0 / 64.0];
        for (k, e) in expect.iter().enumerate() {
            assert_relative_eq!(r.coeff(k), *e, epsilon = 1e-15);
        }
    }

    #[test]
    fn sqrt_and_exp() {
        let t = Jet::variable(1.0, 5);
        let r = t.sqrt();
        let sq = r.clone() * r;
        for k in 0..=5 {
            assert_relative_eq!(sq.coeff(k), t.coeff(k), epsilon = 1e-14);
        }
        let e = Jet::variable(0.0, 6).exp();
        for k in 0..=6 {
            assert_relative_eq!(e.coeff(k), 1.0 / factorial(k), epsilon = 1e-15);
        }
    }

    #[test]
    fn eval_horner() {
        let j = Jet::from_coeffs(vec![1.0, 2.0, 3.0]);
        assert_eq!(j.eval(2.0), 1.0 + 4.0 + 12.0);
    }
}
