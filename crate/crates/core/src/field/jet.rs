//! First-order forward-mode jets: a value together with its gradient.
//!
//! Every field is evaluated through [`Scalar`], so the same code path yields
//! plain values (`f64`) and exact gradients (`Jet`).

use std::ops::{Add, Mul, Neg, Sub};

use crate::geometry::MAX_DIM;

pub trait Scalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn constant(c: f64) -> Self;
    fn scale(self, c: f64) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn value(self) -> f64;
}

impl Scalar for f64 {
    #[inline]
    fn constant(c: f64) -> Self {
        c
    }
    #[inline]
    fn scale(self, c: f64) -> Self {
        self * c
    }
    #[inline]
    fn sin(self) -> Self {
        f64::sin(self)
    }
    #[inline]
    fn cos(self) -> Self {
        f64::cos(self)
    }
    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }
    #[inline]
    fn value(self) -> f64 {
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub g: [f64; MAX_DIM],
}

impl Jet {
    /// The coordinate function `x_axis` evaluated at `x`.
    pub fn variable(x: f64, axis: usize) -> Self {
        let mut g = [0.0; MAX_DIM];
        g[axis] = 1.0;
        Jet { v: x, g }
    }

    #[inline]
    fn chain(self, v: f64, dv: f64) -> Self {
        let mut g = self.g;
        for gi in &mut g {
            *gi *= dv;
        }
        Jet { v, g }
    }
}

impl Add for Jet {
    type Output = Jet;
    #[inline]
    fn add(self, o: Jet) -> Jet {
        let mut g = self.g;
        for (a, b) in g.iter_mut().zip(o.g) {
            *a += b;
        }
        Jet { v: self.v + o.v, g }
    }
}

impl Sub for Jet {
    type Output = Jet;
    #[inline]
    fn sub(self, o: Jet) -> Jet {
        let mut g = self.g;
        for (a, b) in g.iter_mut().zip(o.g) {
            *a -= b;
        }
        Jet { v: self.v - o.v, g }
    }
}

impl Mul for Jet {
    type Output = Jet;
    #[inline]
    fn mul(self, o: Jet) -> Jet {
        let mut g = [0.0; MAX_DIM];
        for i in 0..MAX_DIM {
            g[i] = self.g[i] * o.v + self.v * o.g[i];
        }
        Jet { v: self.v * o.v, g }
    }
}

impl Neg for Jet {
    type Output = Jet;
    #[inline]
    fn neg(self) -> Jet {
        self.chain(-self.v, -1.0)
    }
}

impl Scalar for Jet {
    #[inline]
    fn constant(c: f64) -> Self {
        Jet { v: c, g: [0.0; MAX_DIM] }
    }
    #[inline]
    fn scale(self, c: f64) -> Self {
        self.chain(self.v * c, c)
    }
    #[inline]
    fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c)
    }
    #[inline]
    fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s)
    }
    #[inline]
    fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e)
    }
    #[inline]
    fn value(self) -> f64 {
        self.v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule_and_chain_rule() {
        let x = Jet::variable(0.3, 0);
        let y = Jet::variable(-1.2, 1);
        let f = (x * y).sin() + x.exp().scale(2.0);
        let expected_dx = (0.3f64 * -1.2).cos() * -1.2 + 2.0 * 0.3f64.exp();
        let expected_dy = (0.3f64 * -1.2).cos() * 0.3;
        assert!((f.g[0] - expected_dx).abs() < 1e-14);
        assert!((f.g[1] - expected_dy).abs() < 1e-14);
        assert_eq!(f.g[2], 0.0);
    }
}
