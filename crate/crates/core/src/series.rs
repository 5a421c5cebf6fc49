//! Truncated Laurent series in `s = d^{-1/κ}` with tracked absolute precision.
//!
//! A series stores coefficients for orders `v, v+1, …` and an absolute
//! precision `p`: all coefficients of order `< p` are known (unstored ones
//! are zero), orders `≥ p` are unknown. Each coefficient also carries a
//! magnitude bound of the terms that produced it; coefficients that cancel
//! below `SNAP` times that bound are set to exactly zero, so symbolic
//! cancellations survive floating point and the valuation stays correct.

use std::f64::consts::FRAC_PI_2;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::scalar::Scalar;

/// Relative precision carried past the valuation of any computed series.
pub const MAX_TERMS: i32 = 48;
/// Precision marker of the exact zero.
const ZERO_PREC: i32 = i32::MAX / 4;
const SNAP: f64 = 2e-15;

#[derive(Clone, Debug)]
pub struct Series {
    v: i32,
    c: Vec<f64>,
    m: Vec<f64>,
    p: i32,
}

impl Series {
    pub fn zero() -> Self {
        Series { v: ZERO_PREC, c: vec![], m: vec![], p: ZERO_PREC }
    }

    /// Zero up to `s^p`, unknown beyond.
    pub fn zero_to(p: i32) -> Self {
        Series { v: p, c: vec![], m: vec![], p }
    }

    pub fn nan() -> Self {
        Series { v: 0, c: vec![f64::NAN], m: vec![f64::INFINITY], p: MAX_TERMS }
    }

    pub fn monomial(order: i32, coeff: f64) -> Self {
        if coeff == 0.0 {
            return Self::zero();
        }
        Series { v: order, c: vec![coeff], m: vec![coeff.abs()], p: order + MAX_TERMS }
    }

    /// Coefficients `c[j]` of `s^{v+j}` known up to (excluding) order `p`.
    pub fn from_coeffs(v: i32, c: &[f64], p: i32) -> Self {
        let m = c.iter().map(|x| x.abs()).collect();
        let mut s = Series { v, c: c.to_vec(), m, p };
        s.normalize();
        s
    }

    /// Valuation (lowest order with a nonzero coefficient, or `prec` for zero).
    pub fn val(&self) -> i32 {
        self.v
    }

    pub fn prec(&self) -> i32 {
        self.p
    }

    pub fn is_exact_zero(&self) -> bool {
        self.p >= ZERO_PREC
    }

    pub fn has_nan(&self) -> bool {
        self.c.iter().any(|x| !x.is_finite())
    }

    /// Magnitude bound of the coefficient at order `o` (0 outside the stored range).
    pub fn mag(&self, o: i32) -> f64 {
        if o < self.v {
            return 0.0;
        }
        self.m.get((o - self.v) as usize).copied().unwrap_or(0.0)
    }

    /// Coefficient of `s^o`, or `None` when `o` is beyond the precision.
    pub fn coef(&self, o: i32) -> Option<f64> {
        if o >= self.p {
            return None;
        }
        if o < self.v {
            return Some(0.0);
        }
        Some(self.c.get((o - self.v) as usize).copied().unwrap_or(0.0))
    }

    /// Orders `lo..hi` that may hold nonzero stored coefficients.
    fn stored_end(&self) -> i32 {
        self.v + self.c.len() as i32
    }

    fn normalize(&mut self) {
        if self.p >= ZERO_PREC && self.c.is_empty() {
            *self = Self::zero();
            return;
        }
        // Only the leading run is snapped: it decides the valuation.
        for (c, m) in self.c.iter_mut().zip(&self.m) {
            if c.abs() <= SNAP * m {
                *c = 0.0;
            } else {
                break;
            }
        }
        let lead = self.c.iter().position(|&x| x != 0.0);
        match lead {
            None => {
                if self.p >= ZERO_PREC {
                    *self = Self::zero();
                } else {
                    self.v = self.p;
                    self.c.clear();
                    self.m.clear();
                }
                return;
            }
            Some(k) => {
                self.c.drain(..k);
                self.m.drain(..k);
                self.v += k as i32;
            }
        }
        if self.p > self.v + MAX_TERMS {
            self.p = self.v + MAX_TERMS;
        }
        let keep = (self.p - self.v).max(0) as usize;
        self.c.truncate(keep);
        self.m.truncate(keep);
        while self.c.last() == Some(&0.0) {
            self.c.pop();
            self.m.pop();
        }
    }

    fn add_impl(&self, o: &Series, sign: f64) -> Series {
        if o.is_exact_zero() {
            return self.clone();
        }
        if self.is_exact_zero() {
            return if sign > 0.0 { o.clone() } else { -o.clone() };
        }
        let p = self.p.min(o.p);
        let v = self.v.min(o.v);
        let end = self.stored_end().max(o.stored_end()).min(p);
        let len = (end - v).max(0) as usize;
        let mut c = Vec::with_capacity(len);
        let mut m = Vec::with_capacity(len);
        for j in 0..len as i32 {
            let ord = v + j;
            c.push(self.coef(ord).unwrap_or(0.0) + sign * o.coef(ord).unwrap_or(0.0));
            m.push(self.mag(ord) + o.mag(ord));
        }
        let mut s = Series { v, c, m, p };
        s.normalize();
        s
    }

    fn mul_impl(&self, o: &Series) -> Series {
        if self.is_exact_zero() || o.is_exact_zero() {
            return Self::zero();
        }
        let p = (self.v + o.p).min(o.v + self.p);
        if self.c.is_empty() || o.c.is_empty() {
            return Self::zero_to(p);
        }
        let v = self.v + o.v;
        let len = ((p - v).max(0) as usize).min(self.c.len() + o.c.len() - 1);
        let mut c = vec![0.0; len];
        let mut m = vec![0.0; len];
        for (i, (ca, ma)) in self.c.iter().zip(&self.m).enumerate() {
            if i >= len {
                break;
            }
            for (j, (cb, mb)) in o.c.iter().zip(&o.m).enumerate() {
                if i + j >= len {
                    break;
                }
                c[i + j] += ca * cb;
                m[i + j] += ma * mb;
            }
        }
        let mut s = Series { v, c, m, p };
        s.normalize();
        s
    }

    pub fn recip(&self) -> Series {
        if self.c.is_empty() || self.has_nan() {
            return Self::nan();
        }
        let rel = (self.p - self.v).min(MAX_TERMS);
        let len = rel.max(0) as usize;
        let b0 = self.c[0];
        let mut c = vec![0.0; len];
        let mut m = vec![0.0; len];
        if len > 0 {
            c[0] = 1.0 / b0;
            m[0] = 1.0 / b0.abs();
        }
        for k in 1..len {
            let (mut acc, mut mag) = (0.0, 0.0);
            for j in 1..=k.min(self.c.len() - 1) {
                acc += self.c[j] * c[k - j];
                mag += self.m[j] * m[k - j];
            }
            c[k] = -acc / b0;
            m[k] = mag / b0.abs();
        }
        let mut s = Series { v: -self.v, c, m, p: -self.v + rel };
        s.normalize();
        s
    }

    pub fn sqrt_s(&self) -> Series {
        if self.is_exact_zero() {
            return Self::zero();
        }
        if self.c.is_empty() {
            return Self::zero_to(self.p.div_euclid(2));
        }
        if self.v % 2 != 0 || self.c[0] <= 0.0 || self.has_nan() {
            return Self::nan();
        }
        let rel = (self.p - self.v).min(MAX_TERMS);
        let len = rel.max(0) as usize;
        let mut c = vec![0.0; len];
        let mut m = vec![0.0; len];
        let r0 = self.c[0].sqrt();
        if len > 0 {
            c[0] = r0;
            m[0] = r0;
        }
        for k in 1..len {
            let mut acc = self.c.get(k).copied().unwrap_or(0.0);
            let mut mag = self.m.get(k).copied().unwrap_or(0.0);
            for j in 1..k {
                acc -= c[j] * c[k - j];
                mag += m[j] * m[k - j];
            }
            c[k] = acc / (2.0 * r0);
            m[k] = mag / (2.0 * r0);
        }
        let v = self.v / 2;
        let mut s = Series { v, c, m, p: v + rel };
        s.normalize();
        s
    }

    /// Formal derivative with respect to `s`.
    pub fn deriv(&self) -> Series {
        if self.is_exact_zero() {
            return Self::zero();
        }
        let mut c = Vec::with_capacity(self.c.len());
        let mut m = Vec::with_capacity(self.c.len());
        for (j, (x, y)) in self.c.iter().zip(&self.m).enumerate() {
            let k = (self.v + j as i32) as f64;
            c.push(k * x);
            m.push(k.abs() * y);
        }
        let mut s = Series { v: self.v - 1, c, m, p: self.p - 1 };
        s.normalize();
        s
    }

    /// Antiderivative with zero constant term.
    pub fn integ(&self) -> Series {
        if self.is_exact_zero() {
            return Self::zero();
        }
        let mut c = Vec::with_capacity(self.c.len());
        let mut m = Vec::with_capacity(self.c.len());
        for (j, (x, y)) in self.c.iter().zip(&self.m).enumerate() {
            let k = self.v + j as i32 + 1;
            if k == 0 {
                if *x != 0.0 {
                    return Self::nan();
                }
                c.push(0.0);
                m.push(0.0);
                continue;
            }
            c.push(x / k as f64);
            m.push(y / (k as f64).abs());
        }
        let mut s = Series { v: self.v + 1, c, m, p: self.p + 1 };
        s.normalize();
        s
    }

    /// `atan(t)` for a series of nonnegative valuation.
    pub fn atan_s(&self) -> Series {
        if self.c.is_empty() {
            return self.clone();
        }
        if self.v < 0 || self.has_nan() {
            return Self::nan();
        }
        let t0 = self.coef(0).unwrap_or(0.0);
        let one = Series::monomial(0, 1.0);
        let dt = self.deriv();
        let body = (dt / (one + self.clone() * self.clone())).integ();
        Series::monomial(0, t0.atan()) + body
    }

    /// Evaluate the known part at a numeric `s`.
    pub fn eval(&self, s: f64) -> f64 {
        self.c.iter().enumerate().map(|(j, c)| c * s.powi(self.v + j as i32)).sum()
    }
}

impl Add for Series {
    type Output = Series;
    fn add(self, o: Series) -> Series {
        self.add_impl(&o, 1.0)
    }
}

impl Sub for Series {
    type Output = Series;
    fn sub(self, o: Series) -> Series {
        self.add_impl(&o, -1.0)
    }
}

impl Mul for Series {
    type Output = Series;
    fn mul(self, o: Series) -> Series {
        self.mul_impl(&o)
    }
}

impl Div for Series {
    type Output = Series;
    fn div(self, o: Series) -> Series {
        if self.is_exact_zero() {
            return Series::zero();
        }
        self.mul_impl(&o.recip())
    }
}

impl Neg for Series {
    type Output = Series;
    fn neg(mut self) -> Series {
        self.c.iter_mut().for_each(|x| *x = -*x);
        self
    }
}

impl Scalar for Series {
    fn cst(x: f64) -> Self {
        Series::monomial(0, x)
    }
    fn sqrt(&self) -> Self {
        self.sqrt_s()
    }
    fn atan2(&self, x: &Self) -> Self {
        let (y, x) = (self, x);
        match (y.c.is_empty(), x.c.is_empty()) {
            (true, true) => Series::nan(),
            (true, false) => Series::zero_to(y.p - x.v),
            (false, true) => Series::monomial(0, FRAC_PI_2) + Series::zero_to(x.p - y.v),
            _ if x.v <= y.v => (y.clone() / x.clone()).atan_s(),
            _ => Series::monomial(0, FRAC_PI_2) - (x.clone() / y.clone()).atan_s(),
        }
    }
    fn value(&self) -> f64 {
        self.coef(0).unwrap_or(f64::NAN)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(v: i32, c: &[f64]) -> Series {
        Series::from_coeffs(v, c, v + MAX_TERMS)
    }

    #[test]
    fn arithmetic_agrees_with_evaluation() {
        let a = poly(-2, &[1.0, 0.5, -0.25]);
        let b = poly(0, &[2.0, -1.0, 0.3]);
        let s = 0.01;
        let (av, bv) = (a.eval(s), b.eval(s));
        assert!(((a.clone() * b.clone()).eval(s) - av * bv).abs() < 1e-9 * (av * bv).abs());
        assert!(((a.clone() / b.clone()).eval(s) - av / bv).abs() < 1e-9 * (av / bv).abs());
        let q = b.sqrt_s();
        assert!((q.eval(s) - bv.sqrt()).abs() < 1e-12);
        let t = poly(1, &[0.7, 0.2]);
        assert!((t.atan_s().eval(s) - t.eval(s).atan()).abs() < 1e-14);
    }

    #[test]
    fn cancellation_snaps_to_exact_zero() {
        let a = poly(0, &[1.0 / 3.0, 0.1]);
        let b = poly(0, &[1.0 / 3.0, 0.1]);
        let d = a - b;
        assert!(d.is_exact_zero() || d.c.is_empty());
        let x = poly(0, &[0.1, 0.2]) * poly(0, &[3.0]) - poly(0, &[0.3, 0.6]);
        assert!(x.c.is_empty());
    }

    #[test]
    fn precision_propagates() {
        let a = Series::from_coeffs(0, &[1.0, 2.0], 2);
        let b = Series::from_coeffs(-4, &[1.0], 4);
        let p = a.clone() * b;
        assert_eq!(p.val(), -4);
        assert_eq!(p.prec(), -2);
        assert_eq!(a.recip().prec(), 2);
        let odd = Series::from_coeffs(1, &[1.0], 5);
        assert!(odd.sqrt_s().has_nan());
    }

    #[test]
    fn atan2_of_small_over_large() {
        let y = poly(2, &[1.0]);
        let x = poly(0, &[1.0]);
        let t = y.atan2(&x);
        assert_eq!(t.val(), 2);
        assert!((t.coef(2).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(t.coef(6), Some(-1.0 / 3.0));
        let u = x.atan2(&y);
        assert!((u.coef(0).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert!((u.coef(2).unwrap() + 1.0).abs() < 1e-15);
    }
}
