//! Forward-mode differentiation with second-order jets in two variables.
//!
//! A [`Jet2`] carries a value together with its first and second partial
//! derivatives with respect to the two spatial coordinates. The scalar type is
//! generic so the same propagation code runs on plain `f64` (direct
//! evaluation) and on graph expressions (when recording a differentiable
//! program, see [`super::graph`]).

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Arithmetic interface shared by `f64` and recorded graph expressions.
pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// A constant with the same evaluation context as `self`.
    fn lift(self, c: f64) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tanh(self) -> Self;
    fn exp(self) -> Self;
    fn sqrt(self) -> Self;
}

impl Scalar for f64 {
    #[inline]
    fn lift(self, c: f64) -> Self {
        c
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
    fn tanh(self) -> Self {
        f64::tanh(self)
    }
    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
}

/// Second-order jet in two variables: value, gradient and Hessian entries.
#[derive(Clone, Copy, Debug)]
pub struct Jet2<S: Scalar> {
    pub v: S,
    pub dx: S,
    pub dy: S,
    pub dxx: S,
    pub dxy: S,
    pub dyy: S,
}

impl<S: Scalar> Jet2<S> {
    pub fn constant_like(like: S, c: f64) -> Self {
        let z = like.lift(0.0);
        Jet2 {
            v: like.lift(c),
            dx: z,
            dy: z,
            dxx: z,
            dxy: z,
            dyy: z,
        }
    }

    /// Seed a jet for the independent variable along axis `dir` (0 = x, 1 = y).
    pub fn var(value: S, dir: usize) -> Self {
        let z = value.lift(0.0);
        let o = value.lift(1.0);
        Jet2 {
            v: value,
            dx: if dir == 0 { o } else { z },
            dy: if dir == 1 { o } else { z },
            dxx: z,
            dxy: z,
            dyy: z,
        }
    }

    /// Jet whose value is `value` and whose derivatives all vanish.
    pub fn frozen(value: S) -> Self {
        let z = value.lift(0.0);
        Jet2 {
            v: value,
            dx: z,
            dy: z,
            dxx: z,
            dxy: z,
            dyy: z,
        }
    }

    /// Chain rule for a scalar function `u` applied to this jet, given
    /// `u(f)`, `u'(f)` and `u''(f)` evaluated at the current value.
    #[inline]
    pub fn chain(self, v: S, d1: S, d2: S) -> Self {
        Jet2 {
            v,
            dx: d1 * self.dx,
            dy: d1 * self.dy,
            dxx: d2 * self.dx * self.dx + d1 * self.dxx,
            dxy: d2 * self.dx * self.dy + d1 * self.dxy,
            dyy: d2 * self.dy * self.dy + d1 * self.dyy,
        }
    }

    pub fn sin(self) -> Self {
        let s = self.v.sin();
        let c = self.v.cos();
        self.chain(s, c, -s)
    }

    pub fn cos(self) -> Self {
        let s = self.v.sin();
        let c = self.v.cos();
        self.chain(c, -s, -c)
    }

    pub fn tanh(self) -> Self {
        let t = self.v.tanh();
        let one = self.v.lift(1.0);
        let d1 = one - t * t;
        let d2 = -(t + t) * d1;
        self.chain(t, d1, d2)
    }

    pub fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    pub fn sqrt(self) -> Self {
        let r = self.v.sqrt();
        let half = self.v.lift(0.5);
        let d1 = half / r;
        let d2 = -self.v.lift(0.25) / (r * r * r);
        self.chain(r, d1, d2)
    }

    pub fn recip(self) -> Self {
        let one = self.v.lift(1.0);
        let inv = one / self.v;
        let d1 = -inv * inv;
        let d2 = self.v.lift(2.0) * inv * inv * inv;
        self.chain(inv, d1, d2)
    }

    pub fn powi(self, n: i32) -> Self {
        assert!(n >= 0, "negative powers go through recip");
        match n {
            0 => Jet2::constant_like(self.v, 1.0),
            1 => self,
            _ => {
                let mut acc = self;
                for _ in 1..n {
                    acc = acc * self;
                }
                acc
            }
        }
    }

    pub fn scale(self, c: f64) -> Self {
        let k = self.v.lift(c);
        Jet2 {
            v: self.v * k,
            dx: self.dx * k,
            dy: self.dy * k,
            dxx: self.dxx * k,
            dxy: self.dxy * k,
            dyy: self.dyy * k,
        }
    }

    pub fn laplacian(&self) -> S {
        self.dxx + self.dyy
    }
}

impl<S: Scalar> Add for Jet2<S> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Jet2 {
            v: self.v + o.v,
            dx: self.dx + o.dx,
            dy: self.dy + o.dy,
            dxx: self.dxx + o.dxx,
            dxy: self.dxy + o.dxy,
            dyy: self.dyy + o.dyy,
        }
    }
}

impl<S: Scalar> Sub for Jet2<S> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Jet2 {
            v: self.v - o.v,
            dx: self.dx - o.dx,
            dy: self.dy - o.dy,
            dxx: self.dxx - o.dxx,
            dxy: self.dxy - o.dxy,
            dyy: self.dyy - o.dyy,
        }
    }
}

impl<S: Scalar> Neg for Jet2<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Jet2 {
            v: -self.v,
            dx: -self.dx,
            dy: -self.dy,
            dxx: -self.dxx,
            dxy: -self.dxy,
            dyy: -self.dyy,
        }
    }
}

impl<S: Scalar> Mul for Jet2<S> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let two = self.v.lift(2.0);
        Jet2 {
            v: self.v * o.v,
            dx: self.dx * o.v + self.v * o.dx,
            dy: self.dy * o.v + self.v * o.dy,
            dxx: self.dxx * o.v + two * self.dx * o.dx + self.v * o.dxx,
            dxy: self.dxy * o.v + self.dx * o.dy + self.dy * o.dx + self.v * o.dxy,
            dyy: self.dyy * o.v + two * self.dy * o.dy + self.v * o.dyy,
        }
    }
}

impl<S: Scalar> Div for Jet2<S> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

impl<S: Scalar> Add<f64> for Jet2<S> {
    type Output = Self;
    fn add(self, c: f64) -> Self {
        Jet2 {
            v: self.v + self.v.lift(c),
            ..self
        }
    }
}

impl<S: Scalar> Sub<f64> for Jet2<S> {
    type Output = Self;
    fn sub(self, c: f64) -> Self {
        Jet2 {
            v: self.v - self.v.lift(c),
            ..self
        }
    }
}

impl<S: Scalar> Mul<f64> for Jet2<S> {
    type Output = Self;
    fn mul(self, c: f64) -> Self {
        self.scale(c)
    }
}

impl Jet2<f64> {
    pub fn constant(c: f64) -> Self {
        Jet2::constant_like(0.0, c)
    }

    /// Jets for a spatial point `(x, y)`.
    pub fn at_point(p: [f64; 2]) -> (Self, Self) {
        (Jet2::var(p[0], 0), Jet2::var(p[1], 1))
    }

    pub fn gradient(&self) -> [f64; 2] {
        [self.dx, self.dy]
    }
}
