//! Hyper-dual numbers for exact first and second derivatives.
//!
//! A hyper-dual number `a + b·ε₁ + c·ε₂ + d·ε₁ε₂` with `ε₁² = ε₂² = 0`
//! carries a value, two directional first derivatives, and the mixed
//! second derivative. Seeding `ε₁` on coordinate `i` and `ε₂` on
//! coordinate `j` and evaluating a smooth function yields
//! `(f, ∂ᵢf, ∂ⱼf, ∂ᵢ∂ⱼf)` with no truncation error.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HyperDual {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
    pub d12: f64,
}

impl HyperDual {
    pub const fn new(value: f64, d1: f64, d2: f64, d12: f64) -> Self {
        Self { value, d1, d2, d12 }
    }

    pub const fn constant(value: f64) -> Self {
        Self::new(value, 0.0, 0.0, 0.0)
    }

    /// A variable seeded in direction 1 and/or direction 2.
    pub const fn variable(value: f64, seed1: bool, seed2: bool) -> Self {
        Self::new(value, if seed1 { 1.0 } else { 0.0 }, if seed2 { 1.0 } else { 0.0 }, 0.0)
    }

    /// Applies a scalar function given its value and first two derivatives
    /// at `self.value`.
    pub fn chain(self, f: f64, df: f64, ddf: f64) -> Self {
        Self {
            value: f,
            d1: df * self.d1,
            d2: df * self.d2,
            d12: df * self.d12 + ddf * self.d1 * self.d2,
        }
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(c, -s, -c)
    }

    /// Caller guarantees `cos(value) != 0`.
    pub fn tan(self) -> Self {
        let t = self.value.tan();
        let sec2 = 1.0 + t * t;
        self.chain(t, sec2, 2.0 * t * sec2)
    }

    pub fn exp(self) -> Self {
        let e = self.value.exp();
        self.chain(e, e, e)
    }

    /// Caller guarantees `value > 0`.
    pub fn ln(self) -> Self {
        let inv = 1.0 / self.value;
        self.chain(self.value.ln(), inv, -inv * inv)
    }

    /// Caller guarantees `value > 0`.
    pub fn sqrt(self) -> Self {
        let s = self.value.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.value))
    }

    pub fn powi(self, n: i32) -> Self {
        match n {
            0 => Self::constant(1.0),
            1 => self,
            _ => {
                let x = self.value;
                let nf = f64::from(n);
                self.chain(x.powi(n), nf * x.powi(n - 1), nf * (nf - 1.0) * x.powi(n - 2))
            }
        }
    }

    /// Caller guarantees `value > 0`.
    pub fn powf(self, p: f64) -> Self {
        let x = self.value;
        self.chain(x.powf(p), p * x.powf(p - 1.0), p * (p - 1.0) * x.powf(p - 2.0))
    }

    pub fn recip(self) -> Self {
        let inv = 1.0 / self.value;
        self.chain(inv, -inv * inv, 2.0 * inv * inv * inv)
    }
}

impl Add for HyperDual {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(
            self.value + rhs.value,
            self.d1 + rhs.d1,
            self.d2 + rhs.d2,
            self.d12 + rhs.d12,
        )
    }
}

impl Sub for HyperDual {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(
            self.value - rhs.value,
            self.d1 - rhs.d1,
            self.d2 - rhs.d2,
            self.d12 - rhs.d12,
        )
    }
}

impl Mul for HyperDual {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::new(
            self.value * rhs.value,
            self.d1 * rhs.value + self.value * rhs.d1,
            self.d2 * rhs.value + self.value * rhs.d2,
            self.d12 * rhs.value + self.d1 * rhs.d2 + self.d2 * rhs.d1 + self.value * rhs.d12,
        )
    }
}

impl Div for HyperDual {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Self) -> Self {
        self * rhs.recip()
    }
}

impl Neg for HyperDual {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.value, -self.d1, -self.d2, -self.d12)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule_mixed_partial() {
        // f(x, y) = x * y at (3, 5), seeding x in direction 1 and y in direction 2.
        let x = HyperDual::variable(3.0, true, false);
        let y = HyperDual::variable(5.0, false, true);
        let f = x * y;
        assert_eq!(f, HyperDual::new(15.0, 5.0, 3.0, 1.0));
    }

    #[test]
    fn cube_power_rule() {
        let x = HyperDual::variable(2.0, true, true);
        assert_eq!(x.powi(3), HyperDual::new(8.0, 12.0, 12.0, 12.0));
        let xxx = x * x * x;
        assert_eq!(xxx, HyperDual::new(8.0, 12.0, 12.0, 12.0));
    }

    #[test]
    fn quotient_matches_closed_form() {
        // 1/x at x = 2: (0.5, -0.25, -0.25, 0.25)
        let x = HyperDual::variable(2.0, true, true);
        let q = HyperDual::constant(1.0) / x;
        assert!((q.value - 0.5).abs() < 1e-15);
        assert!((q.d1 + 0.25).abs() < 1e-15);
        assert!((q.d12 - 0.25).abs() < 1e-15);
    }

    #[test]
    fn transcendental_second_derivatives() {
        let x0 = 0.7_f64;
        let x = HyperDual::variable(x0, true, true);
        let s = x.sin();
        assert!((s.d12 + x0.sin()).abs() < 1e-15);
        let l = x.ln();
        assert!((l.d12 + 1.0 / (x0 * x0)).abs() < 1e-14);
        let r = x.sqrt();
        assert!((r.d12 + 0.25 * x0.powf(-1.5)).abs() < 1e-14);
        let t = x.tan();
        let sec2 = 1.0 / x0.cos().powi(2);
        assert!((t.d1 - sec2).abs() < 1e-14);
        assert!((t.d12 - 2.0 * x0.tan() * sec2).abs() < 1e-13);
    }
}
