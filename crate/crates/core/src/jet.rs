//! Truncated bivariate Taylor jets for forward-mode differentiation.
//!
//! A [`Jet`] carries the Taylor coefficients of a function of two chart
//! variables `(u, v)` about a base point, up to total order [`ORDER`]. All
//! arithmetic is exact in the truncated polynomial ring, so a height
//! function evaluated on jets yields its derivatives up to third order with
//! no step-size error. Geometry formulas are written once against the
//! [`Scalar`] trait and run on either `f64` or `Jet`.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Highest total derivative order tracked.
pub const ORDER: usize = 3;
const LEN: usize = 10;

/// Monomial exponents `(a, b)` for `du^a dv^b`, graded by total degree.
const EXPONENTS: [(usize, usize); LEN] =
    [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (3, 0), (2, 1), (1, 2), (0, 3)];

const NONE: u8 = u8::MAX;

const fn index_of(a: usize, b: usize) -> u8 {
    let mut k = 0;
    while k < LEN {
        if EXPONENTS[k].0 == a && EXPONENTS[k].1 == b {
            return k as u8;
        }
        k += 1;
    }
    NONE
}

const fn product_table() -> [[u8; LEN]; LEN] {
    let mut table = [[NONE; LEN]; LEN];
    let mut i = 0;
    while i < LEN {
        let mut j = 0;
        while j < LEN {
            let a = EXPONENTS[i].0 + EXPONENTS[j].0;
            let b = EXPONENTS[i].1 + EXPONENTS[j].1;
            if a + b <= ORDER {
                table[i][j] = index_of(a, b);
            }
            j += 1;
        }
        i += 1;
    }
    table
}

static PRODUCT: [[u8; LEN]; LEN] = product_table();

/// Scalar types the geometry formulas can be evaluated on.
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
    fn cst(c: f64) -> Self;
    /// Value at the base point.
    fn re(&self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sinh(self) -> Self;
    fn cosh(self) -> Self;
    fn sqrt(self) -> Self;
    fn asinh(self) -> Self;
    fn acos(self) -> Self;
    fn atan(self) -> Self;

    fn tanh(self) -> Self {
        self.sinh() / self.cosh()
    }

    fn powi(self, n: u32) -> Self {
        let mut acc = Self::cst(1.0);
        for _ in 0..n {
            acc = acc * self;
        }
        acc
    }

    /// Two-argument arctangent; the branch is fixed by the base value.
    fn atan2(y: Self, x: Self) -> Self;
}

impl Scalar for f64 {
    fn cst(c: f64) -> Self {
        c
    }
    fn re(&self) -> f64 {
        *self
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn sinh(self) -> Self {
        f64::sinh(self)
    }
    fn cosh(self) -> Self {
        f64::cosh(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn asinh(self) -> Self {
        f64::asinh(self)
    }
    fn acos(self) -> Self {
        f64::acos(self)
    }
    fn atan(self) -> Self {
        f64::atan(self)
    }
    fn tanh(self) -> Self {
        f64::tanh(self)
    }
    fn atan2(y: Self, x: Self) -> Self {
        f64::atan2(y, x)
    }
}

/// Chart direction for partial derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    U,
    V,
}

/// Taylor coefficients `c[(a,b)]` of `f(u0 + du, v0 + dv)` in `du^a dv^b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    c: [f64; LEN],
}

impl Jet {
    pub fn constant(value: f64) -> Self {
        let mut c = [0.0; LEN];
        c[0] = value;
        Self { c }
    }

    /// The independent variable `u` at `u0`.
    pub fn var_u(u0: f64) -> Self {
        let mut j = Self::constant(u0);
        j.c[1] = 1.0;
        j
    }

    /// The independent variable `v` at `v0`.
    pub fn var_v(v0: f64) -> Self {
        let mut j = Self::constant(v0);
        j.c[2] = 1.0;
        j
    }

    /// Builds a jet from partial derivatives: `derivs(a, b)` must return
    /// `∂_u^a ∂_v^b f` at the base point.
    pub fn from_partials(mut derivs: impl FnMut(usize, usize) -> f64) -> Self {
        let mut c = [0.0; LEN];
        for (k, &(a, b)) in EXPONENTS.iter().enumerate() {
            c[k] = derivs(a, b) / (factorial(a) * factorial(b));
        }
        Self { c }
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// `∂_u^a ∂_v^b f` at the base point, for `a + b <= ORDER`.
    pub fn partial(&self, a: usize, b: usize) -> f64 {
        let k = index_of(a, b);
        assert!(k != NONE, "derivative order exceeds jet order");
        self.c[k as usize] * factorial(a) * factorial(b)
    }

    pub fn gradient(&self) -> [f64; 2] {
        [self.partial(1, 0), self.partial(0, 1)]
    }

    pub fn hessian(&self) -> [[f64; 2]; 2] {
        let uv = self.partial(1, 1);
        [[self.partial(2, 0), uv], [uv, self.partial(0, 2)]]
    }

    /// Jet of the partial derivative. The top-order coefficients of the
    /// result are unknown and set to zero, so its valid order drops by one.
    pub fn diff(&self, axis: Axis) -> Self {
        let mut out = [0.0; LEN];
        for (k, &(a, b)) in EXPONENTS.iter().enumerate() {
            let (na, nb, factor) = match axis {
                Axis::U if a > 0 => (a - 1, b, a as f64),
                Axis::V if b > 0 => (a, b - 1, b as f64),
                _ => continue,
            };
            out[index_of(na, nb) as usize] = factor * self.c[k];
        }
        Self { c: out }
    }

    /// `d(axis)` as a chart-index helper: 0 is `u`, 1 is `v`.
    pub fn d(&self, i: usize) -> Self {
        self.diff(if i == 0 { Axis::U } else { Axis::V })
    }

    /// Applies a univariate function given its value and first three
    /// derivatives at the base value.
    pub fn compose(&self, f: [f64; 4]) -> Self {
        let mut delta = *self;
        delta.c[0] = 0.0;
        let d2 = delta * delta;
        let d3 = d2 * delta;
        let mut out = delta * f[1] + d2 * (f[2] / 2.0) + d3 * (f[3] / 6.0);
        out.c[0] = f[0];
        out
    }

    pub fn recip(self) -> Self {
        let x = self.c[0];
        let r = 1.0 / x;
        self.compose([r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r])
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

impl Add for Jet {
    type Output = Jet;
    fn add(mut self, rhs: Jet) -> Jet {
        for k in 0..LEN {
            self.c[k] += rhs.c[k];
        }
        self
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: Jet) -> Jet {
        for k in 0..LEN {
            self.c[k] -= rhs.c[k];
        }
        self
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let mut out = [0.0; LEN];
        for i in 0..LEN {
            let a = self.c[i];
            if a == 0.0 {
                continue;
            }
            for j in 0..LEN {
                let k = PRODUCT[i][j];
                if k != NONE {
                    out[k as usize] += a * rhs.c[j];
                }
            }
        }
        Jet { c: out }
    }
}

impl Div for Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Jet) -> Jet {
        self * rhs.recip()
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(mut self) -> Jet {
        for k in 0..LEN {
            self.c[k] = -self.c[k];
        }
        self
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.c[0] += rhs;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: f64) -> Jet {
        self.c[0] -= rhs;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(mut self, rhs: f64) -> Jet {
        for k in 0..LEN {
            self.c[k] *= rhs;
        }
        self
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, rhs: f64) -> Jet {
        self * (1.0 / rhs)
    }
}

impl Scalar for Jet {
    fn cst(c: f64) -> Self {
        Jet::constant(c)
    }
    fn re(&self) -> f64 {
        self.c[0]
    }
    fn sin(self) -> Self {
        let (s, c) = self.c[0].sin_cos();
        self.compose([s, c, -s, -c])
    }
    fn cos(self) -> Self {
        let (s, c) = self.c[0].sin_cos();
        self.compose([c, -s, -c, s])
    }
    fn sinh(self) -> Self {
        let (s, c) = (self.c[0].sinh(), self.c[0].cosh());
        self.compose([s, c, s, c])
    }
    fn cosh(self) -> Self {
        let (s, c) = (self.c[0].sinh(), self.c[0].cosh());
        self.compose([c, s, c, s])
    }
    fn sqrt(self) -> Self {
        let x = self.c[0];
        let r = x.sqrt();
        self.compose([r, 0.5 / r, -0.25 / (r * x), 0.375 / (r * x * x)])
    }
    fn asinh(self) -> Self {
        let x = self.c[0];
        let q = 1.0 + x * x;
        let r = q.sqrt();
        self.compose([x.asinh(), 1.0 / r, -x / (q * r), (2.0 * x * x - 1.0) / (q * q * r)])
    }
    fn acos(self) -> Self {
        let x = self.c[0];
        let q = 1.0 - x * x;
        let r = q.sqrt();
        self.compose([x.acos(), -1.0 / r, -x / (q * r), -(1.0 + 2.0 * x * x) / (q * q * r)])
    }
    fn atan(self) -> Self {
        let x = self.c[0];
        let q = 1.0 + x * x;
        self.compose([x.atan(), 1.0 / q, -2.0 * x / (q * q), (6.0 * x * x - 2.0) / (q * q * q)])
    }
    fn atan2(y: Self, x: Self) -> Self {
        // Rotate so the base point lies on the positive axis, then the
        // remaining angle is a small atan.
        let base = f64::atan2(y.c[0], x.c[0]);
        let (s, c) = base.sin_cos();
        let along = x * c + y * s;
        let across = y * c - x * s;
        (across / along).atan() + base
    }
}
