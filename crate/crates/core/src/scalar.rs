//! Number types the reduced field is generic over.
//!
//! The same field code runs on plain `f64`, on forward-mode duals (exact
//! Jacobian columns) and on truncated Laurent series in `s = d^{-1/κ}`.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

pub trait Scalar:
    Clone
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn cst(x: f64) -> Self;
    fn sqrt(&self) -> Self;
    /// Two-argument arctangent; only used with `y ≥ 0`, `x ≥ 0`.
    fn atan2(&self, x: &Self) -> Self;
    /// Leading numeric value (the value of the constant term for series).
    fn value(&self) -> f64;

    fn scale(&self, k: f64) -> Self {
        self.clone() * Self::cst(k)
    }
    fn sq(&self) -> Self {
        self.clone() * self.clone()
    }
}

impl Scalar for f64 {
    fn cst(x: f64) -> Self {
        x
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn atan2(&self, x: &Self) -> Self {
        f64::atan2(*self, *x)
    }
    fn value(&self) -> f64 {
        *self
    }
}

/// Forward-mode dual number `v + t ε` with `ε² = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual {
    pub v: f64,
    pub t: f64,
}

impl Dual {
    pub fn new(v: f64, t: f64) -> Self {
        Dual { v, t }
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual::new(self.v + o.v, self.t + o.t)
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual::new(self.v - o.v, self.t - o.t)
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual::new(self.v * o.v, self.v * o.t + self.t * o.v)
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, o: Dual) -> Dual {
        let q = self.v / o.v;
        Dual::new(q, (self.t - q * o.t) / o.v)
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual::new(-self.v, -self.t)
    }
}

impl Scalar for Dual {
    fn cst(x: f64) -> Self {
        Dual::new(x, 0.0)
    }
    fn sqrt(&self) -> Self {
        let r = self.v.sqrt();
        // d sqrt at 0 is unbounded; a zero tangent keeps vanishing entries inert
        let t = if r > 0.0 { self.t / (2.0 * r) } else { 0.0 };
        Dual::new(r, t)
    }
    fn atan2(&self, x: &Self) -> Self {
        let r2 = self.v * self.v + x.v * x.v;
        let t = if r2 > 0.0 { (x.v * self.t - self.v * x.t) / r2 } else { 0.0 };
        Dual::new(self.v.atan2(x.v), t)
    }
    fn value(&self) -> f64 {
        self.v
    }
}
