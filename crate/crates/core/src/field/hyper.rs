//! Forward-mode truncated Taylor arithmetic.
//!
//! [`Hyper`] carries a value, the full gradient and the upper triangle of the
//! Hessian with respect to up to [`MAX_DIM`] independent variables, so one
//! sweep through an expression yields exact second-order data. [`Dual`] is the
//! first-order counterpart, used where only Jacobians are needed (fluxes).
//!
//! Both implement [`Scalar`], as does `f64`, so closed-form formulas can be
//! written once and evaluated either plainly or with derivatives.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Largest number of independent variables a jet can track.
pub const MAX_DIM: usize = 6;

/// Arithmetic shared by `f64`, [`Dual`] and [`Hyper`].
pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn value(&self) -> f64;
    /// A constant with the same variable count as `self`.
    fn constant_like(&self, c: f64) -> Self;
    fn ln(self) -> Self;
    fn exp(self) -> Self;
    fn powf(self, p: f64) -> Self;
    fn sqrt(self) -> Self;
    fn recip(self) -> Self;
    fn powi(self, k: i32) -> Self {
        self.powf(f64::from(k))
    }
}

impl Scalar for f64 {
    fn value(&self) -> f64 {
        *self
    }
    fn constant_like(&self, c: f64) -> Self {
        c
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn powf(self, p: f64) -> Self {
        f64::powf(self, p)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn recip(self) -> Self {
        1.0 / self
    }
    fn powi(self, k: i32) -> Self {
        f64::powi(self, k)
    }
}

/// Value plus gradient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual {
    n: usize,
    v: f64,
    g: [f64; MAX_DIM],
}

impl Dual {
    pub fn constant(n: usize, v: f64) -> Self {
        assert!(n <= MAX_DIM, "dual dimension {n} exceeds {MAX_DIM}");
        Dual { n, v, g: [0.0; MAX_DIM] }
    }

    /// The `i`-th independent variable with value `v`.
    pub fn variable(n: usize, i: usize, v: f64) -> Self {
        let mut d = Dual::constant(n, v);
        d.g[i] = 1.0;
        d
    }

    /// Build from explicit value and gradient.
    pub fn from_parts(v: f64, grad: &[f64]) -> Self {
        let mut d = Dual::constant(grad.len(), v);
        d.g[..grad.len()].copy_from_slice(grad);
        d
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn grad(&self) -> &[f64] {
        &self.g[..self.n]
    }

    fn map(self, f: f64, f1: f64) -> Self {
        let mut out = Dual::constant(self.n, f);
        for i in 0..self.n {
            out.g[i] = f1 * self.g[i];
        }
        out
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        let mut out = self;
        out.v += o.v;
        for i in 0..self.n {
            out.g[i] += o.g[i];
        }
        out
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        self + (-o)
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        self * -1.0
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        let mut out = Dual::constant(self.n.max(o.n), self.v * o.v);
        for i in 0..out.n {
            out.g[i] = self.g[i] * o.v + self.v * o.g[i];
        }
        out
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, o: Dual) -> Dual {
        self * o.recip()
    }
}

impl Add<f64> for Dual {
    type Output = Dual;
    fn add(mut self, c: f64) -> Dual {
        self.v += c;
        self
    }
}

impl Sub<f64> for Dual {
    type Output = Dual;
    fn sub(mut self, c: f64) -> Dual {
        self.v -= c;
        self
    }
}

impl Mul<f64> for Dual {
    type Output = Dual;
    fn mul(mut self, c: f64) -> Dual {
        self.v *= c;
        for i in 0..self.n {
            self.g[i] *= c;
        }
        self
    }
}

impl Div<f64> for Dual {
    type Output = Dual;
    fn div(self, c: f64) -> Dual {
        self * (1.0 / c)
    }
}

impl Scalar for Dual {
    fn value(&self) -> f64 {
        self.v
    }
    fn constant_like(&self, c: f64) -> Self {
        Dual::constant(self.n, c)
    }
    fn ln(self) -> Self {
        self.map(self.v.ln(), 1.0 / self.v)
    }
    fn exp(self) -> Self {
        let e = self.v.exp();
        self.map(e, e)
    }
    fn powf(self, p: f64) -> Self {
        self.map(self.v.powf(p), p * self.v.powf(p - 1.0))
    }
    fn sqrt(self) -> Self {
        let r = self.v.sqrt();
        self.map(r, 0.5 / r)
    }
    fn recip(self) -> Self {
        let r = 1.0 / self.v;
        self.map(r, -r * r)
    }
    fn powi(self, k: i32) -> Self {
        self.map(self.v.powi(k), f64::from(k) * self.v.powi(k - 1))
    }
}

/// Value, gradient and (upper-triangular) Hessian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyper {
    n: usize,
    v: f64,
    g: [f64; MAX_DIM],
    h: [[f64; MAX_DIM]; MAX_DIM],
}

impl Hyper {
    pub fn constant(n: usize, v: f64) -> Self {
        assert!(n <= MAX_DIM, "jet dimension {n} exceeds {MAX_DIM}");
        Hyper {
            n,
            v,
            g: [0.0; MAX_DIM],
            h: [[0.0; MAX_DIM]; MAX_DIM],
        }
    }

    pub fn variable(n: usize, i: usize, v: f64) -> Self {
        let mut x = Hyper::constant(n, v);
        x.g[i] = 1.0;
        x
    }

    /// Seed all `x.len()` variables at once.
    pub fn variables(x: &[f64]) -> Vec<Hyper> {
        let n = x.len();
        x.iter().enumerate().map(|(i, &v)| Hyper::variable(n, i, v)).collect()
    }

    /// Build from a value, gradient and a full Hessian (row-major, only the
    /// upper triangle is read).
    pub fn from_parts(v: f64, grad: &[f64], hess: impl Fn(usize, usize) -> f64) -> Self {
        let n = grad.len();
        let mut x = Hyper::constant(n, v);
        x.g[..n].copy_from_slice(grad);
        for i in 0..n {
            for j in i..n {
                x.h[i][j] = hess(i, j);
            }
        }
        x
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn grad(&self) -> &[f64] {
        &self.g[..self.n]
    }

    /// Hessian entry; symmetric access into the upper triangle.
    pub fn hess(&self, i: usize, j: usize) -> f64 {
        if i <= j {
            self.h[i][j]
        } else {
            self.h[j][i]
        }
    }

    /// Apply a univariate function with derivatives `f1`, `f2` at the value.
    pub fn chain(self, f: f64, f1: f64, f2: f64) -> Self {
        let mut out = Hyper::constant(self.n, f);
        for i in 0..self.n {
            out.g[i] = f1 * self.g[i];
            for j in i..self.n {
                out.h[i][j] = f1 * self.h[i][j] + f2 * self.g[i] * self.g[j];
            }
        }
        out
    }
}

impl Add for Hyper {
    type Output = Hyper;
    fn add(self, o: Hyper) -> Hyper {
        let n = self.n.max(o.n);
        let mut out = Hyper::constant(n, self.v + o.v);
        for i in 0..n {
            out.g[i] = self.g[i] + o.g[i];
            for j in i..n {
                out.h[i][j] = self.h[i][j] + o.h[i][j];
            }
        }
        out
    }
}

impl Sub for Hyper {
    type Output = Hyper;
    fn sub(self, o: Hyper) -> Hyper {
        let n = self.n.max(o.n);
        let mut out = Hyper::constant(n, self.v - o.v);
        for i in 0..n {
            out.g[i] = self.g[i] - o.g[i];
            for j in i..n {
                out.h[i][j] = self.h[i][j] - o.h[i][j];
            }
        }
        out
    }
}

impl Neg for Hyper {
    type Output = Hyper;
    fn neg(self) -> Hyper {
        self * -1.0
    }
}

impl Mul for Hyper {
    type Output = Hyper;
    fn mul(self, o: Hyper) -> Hyper {
        let n = self.n.max(o.n);
        let mut out = Hyper::constant(n, self.v * o.v);
        for i in 0..n {
            out.g[i] = self.g[i] * o.v + self.v * o.g[i];
            for j in i..n {
                out.h[i][j] = self.h[i][j] * o.v
                    + self.v * o.h[i][j]
                    + self.g[i] * o.g[j]
                    + o.g[i] * self.g[j];
            }
        }
        out
    }
}

impl Div for Hyper {
    type Output = Hyper;
    fn div(self, o: Hyper) -> Hyper {
        self * o.recip()
    }
}

impl Add<f64> for Hyper {
    type Output = Hyper;
    fn add(mut self, c: f64) -> Hyper {
        self.v += c;
        self
    }
}

impl Sub<f64> for Hyper {
    type Output = Hyper;
    fn sub(mut self, c: f64) -> Hyper {
        self.v -= c;
        self
    }
}

impl Mul<f64> for Hyper {
    type Output = Hyper;
    fn mul(mut self, c: f64) -> Hyper {
        self.v *= c;
        for i in 0..self.n {
            self.g[i] *= c;
            for j in i..self.n {
                self.h[i][j] *= c;
            }
        }
        self
    }
}

impl Div<f64> for Hyper {
    type Output = Hyper;
    fn div(self, c: f64) -> Hyper {
        self * (1.0 / c)
    }
}

impl Scalar for Hyper {
    fn value(&self) -> f64 {
        self.v
    }
    fn constant_like(&self, c: f64) -> Self {
        Hyper::constant(self.n, c)
    }
    fn ln(self) -> Self {
        let r = 1.0 / self.v;
        self.chain(self.v.ln(), r, -r * r)
    }
    fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }
    fn powf(self, p: f64) -> Self {
        let f2 = p * (p - 1.0) * self.v.powf(p - 2.0);
        self.chain(self.v.powf(p), p * self.v.powf(p - 1.0), f2)
    }
    fn sqrt(self) -> Self {
        let r = self.v.sqrt();
        self.chain(r, 0.5 / r, -0.25 / (r * self.v))
    }
    fn recip(self) -> Self {
        let r = 1.0 / self.v;
        self.chain(r, -r * r, 2.0 * r * r * r)
    }
    fn powi(self, k: i32) -> Self {
        let kf = f64::from(k);
        let f2 = if k == 0 || k == 1 {
            0.0
        } else {
            kf * (kf - 1.0) * self.v.powi(k - 2)
        };
        let f1 = if k == 0 { 0.0 } else { kf * self.v.powi(k - 1) };
        self.chain(self.v.powi(k), f1, f2)
    }
}
