//! Truncated multivariate Taylor polynomials in three variables, up to total degree 3.
//!
//! Model frames are written once over the [`Scalar`] trait and evaluated either on `f64`
//! or on [`Jet`]s, which yields exact frame derivatives. Brackets of brackets (needed for
//! the Reeb field and its structure functions) then cost no finite differences.

use core::ops::{Add, Div, Mul, Neg, Sub};

use crate::math;

pub const MAX_ORDER: u8 = 3;
const N: usize = 20;
/// Number of monomials of degree at most `d`.
const NCUM: [usize; 4] = [1, 4, 10, 20];

const fn build_exps() -> [[u8; 3]; N] {
    let mut out = [[0u8; 3]; N];
    let mut n = 0;
    let mut d = 0u8;
    while d <= 3 {
        let mut a = d as i32;
        while a >= 0 {
            let mut b = d as i32 - a;
            while b >= 0 {
                let c = d as i32 - a - b;
                out[n] = [a as u8, b as u8, c as u8];
                n += 1;
                b -= 1;
            }
            a -= 1;
        }
        d += 1;
    }
    out
}

const EXPS: [[u8; 3]; N] = build_exps();

const fn build_index() -> [[[u8; 4]; 4]; 4] {
    let mut idx = [[[u8::MAX; 4]; 4]; 4];
    let mut n = 0;
    while n < N {
        let e = EXPS[n];
        idx[e[0] as usize][e[1] as usize][e[2] as usize] = n as u8;
        n += 1;
    }
    idx
}

const INDEX: [[[u8; 4]; 4]; 4] = build_index();

#[inline]
fn degree(i: usize) -> usize {
    let e = EXPS[i];
    (e[0] + e[1] + e[2]) as usize
}

#[inline]
fn index_of(a: u8, b: u8, c: u8) -> usize {
    INDEX[a as usize][b as usize][c as usize] as usize
}

/// Taylor coefficients around a base point; `order` is the highest trustworthy degree.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    order: u8,
    c: [f64; N],
}

impl Jet {
    pub fn constant(v: f64) -> Self {
        let mut c = [0.0; N];
        c[0] = v;
        Self { order: MAX_ORDER, c }
    }

    /// The coordinate function `x_var` expanded at `value`, truncated at `order`.
    pub fn variable(var: usize, value: f64, order: u8) -> Self {
        assert!(var < 3 && order <= MAX_ORDER);
        let mut c = [0.0; N];
        c[0] = value;
        if order >= 1 {
            c[1 + var] = 1.0;
        }
        Self { order, c }
    }

    /// Jets of the three coordinates at `x`.
    pub fn point(x: [f64; 3], order: u8) -> [Self; 3] {
        [
            Self::variable(0, x[0], order),
            Self::variable(1, x[1], order),
            Self::variable(2, x[2], order),
        ]
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// First partial derivatives at the base point. Requires order ≥ 1.
    pub fn gradient(&self) -> [f64; 3] {
        debug_assert!(self.order >= 1);
        [self.c[1], self.c[2], self.c[3]]
    }

    /// Partial derivative as a jet of one lower order.
    pub fn partial(&self, var: usize) -> Self {
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        let order = self.order - 1;
        let mut c = [0.0; N];
        for (i, ci) in c.iter_mut().enumerate().take(NCUM[order as usize]) {
            let mut e = EXPS[i];
            e[var] += 1;
            *ci = e[var] as f64 * self.c[index_of(e[0], e[1], e[2])];
        }
        Self { order, c }
    }

    fn truncate(mut self, order: u8) -> Self {
        for v in self.c.iter_mut().skip(NCUM[order as usize]) {
            *v = 0.0;
        }
        self.order = order;
        self
    }

    /// Apply a scalar function given its derivatives f, f', f'', f''' at the base value.
    fn compose(self, d: [f64; 4]) -> Self {
        let mut delta = self;
        delta.c[0] = 0.0;
        let mut out = Self::constant(d[0]).truncate(self.order);
        let mut pow = Self::constant(1.0).truncate(self.order);
        let mut fact = 1.0;
        for (k, dk) in d.iter().enumerate().skip(1).take(self.order as usize) {
            pow = pow * delta;
            fact *= k as f64;
            out = out + pow.scale(dk / fact);
        }
        out
    }

    pub fn scale(mut self, s: f64) -> Self {
        for v in self.c.iter_mut() {
            *v *= s;
        }
        self
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        let order = self.order.min(rhs.order);
        let mut c = [0.0; N];
        for (i, ci) in c.iter_mut().enumerate().take(NCUM[order as usize]) {
            *ci = self.c[i] + rhs.c[i];
        }
        Jet { order, c }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        self + (-rhs)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let order = self.order.min(rhs.order) as usize;
        let mut c = [0.0; N];
        for i in 0..NCUM[order] {
            let a = self.c[i];
            if a == 0.0 {
                continue;
            }
            let ei = EXPS[i];
            for (ej, b) in EXPS.iter().zip(&rhs.c).take(NCUM[order - degree(i)]) {
                c[index_of(ei[0] + ej[0], ei[1] + ej[1], ei[2] + ej[2])] += a * b;
            }
        }
        Jet { order: order as u8, c }
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, rhs: Jet) -> Jet {
        let g = rhs.c[0];
        let inv = rhs.compose([1.0 / g, -1.0 / (g * g), 2.0 / (g * g * g), -6.0 / (g * g * g * g)]);
        self * inv
    }
}

/// Arithmetic shared by `f64` and [`Jet`], enough to write chart formulas once.
pub trait Scalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    fn cst(v: f64) -> Self;
    fn val(&self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn sqrt(self) -> Self;
}

impl Scalar for f64 {
    fn cst(v: f64) -> Self {
        v
    }
    fn val(&self) -> f64 {
        *self
    }
    fn sin(self) -> Self {
        math::sin(self)
    }
    fn cos(self) -> Self {
        math::cos(self)
    }
    fn exp(self) -> Self {
        math::exp(self)
    }
    fn sqrt(self) -> Self {
        math::sqrt(self)
    }
}

impl Scalar for Jet {
    fn cst(v: f64) -> Self {
        Jet::constant(v)
    }
    fn val(&self) -> f64 {
        self.value()
    }
    fn sin(self) -> Self {
        let (s, c) = (math::sin(self.c[0]), math::cos(self.c[0]));
        self.compose([s, c, -s, -c])
    }
    fn cos(self) -> Self {
        let (s, c) = (math::sin(self.c[0]), math::cos(self.c[0]));
        self.compose([c, -s, -c, s])
    }
    fn exp(self) -> Self {
        let e = math::exp(self.c[0]);
        self.compose([e, e, e, e])
    }
    fn sqrt(self) -> Self {
        let r = math::sqrt(self.c[0]);
        self.compose([r, 0.5 / r, -0.25 / (r * r * r), 0.375 / (r * r * r * r * r)])
    }
}

/// A vector field expanded to some order at a point.
pub type JetVec = [Jet; 3];

/// `[V,W] = DW·V − DV·W`, one order lower than its inputs.
pub fn bracket(v: &JetVec, w: &JetVec) -> JetVec {
    let mut out = [Jet::constant(0.0); 3];
    for (i, oi) in out.iter_mut().enumerate() {
        let mut acc = Jet::constant(0.0);
        for j in 0..3 {
            acc = acc + w[i].partial(j) * v[j] - v[i].partial(j) * w[j];
        }
        *oi = acc;
    }
    out
}

/// Directional derivative V(f).
pub fn derivative(v: &JetVec, f: &Jet) -> Jet {
    let mut acc = Jet::constant(0.0);
    for (j, vj) in v.iter().enumerate() {
        acc = acc + f.partial(j) * *vj;
    }
    acc
}

pub fn dot(a: &JetVec, b: &JetVec) -> Jet {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: &JetVec, b: &JetVec) -> JetVec {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn scale_vec(s: Jet, v: &JetVec) -> JetVec {
    [s * v[0], s * v[1], s * v[2]]
}

pub fn add_vec(a: &JetVec, b: &JetVec) -> JetVec {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn values(v: &JetVec) -> [f64; 3] {
    [v[0].value(), v[1].value(), v[2].value()]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn monomial_tables_consistent() {
        for (i, e) in EXPS.iter().enumerate() {
            assert_eq!(index_of(e[0], e[1], e[2]), i);
        }
        assert_eq!(degree(0), 0);
        assert_eq!(degree(19), 3);
    }

    #[test]
    fn polynomial_derivatives_exact() {
        // f = x²y + 3yz³ at (1, 2, -1)
        let [x, y, z] = Jet::point([1.0, 2.0, -1.0], 3);
        let f = x * x * y + Jet::constant(3.0) * y * z * z * z;
        assert!(close(f.value(), 2.0 - 6.0, 1e-15));
        let g = f.gradient();
        assert!(close(g[0], 4.0, 1e-15));
        assert!(close(g[1], 1.0 - 3.0, 1e-15));
        assert!(close(g[2], 18.0, 1e-15));
        let fxy = f.partial(0).partial(1);
        assert!(close(fxy.value(), 2.0, 1e-15));
        let fzzz = f.partial(2).partial(2).partial(2);
        assert!(close(fzzz.value(), 36.0, 1e-15));
    }

    #[test]
    fn transcendental_against_finite_differences() {
        let f = |p: [f64; 3]| (p[0] * p[1]).sin() + (p[2] / (1.0 + p[0] * p[0])).exp() * (2.0 + p[1]).sqrt();
        let p0 = [0.3, 0.7, -0.4];
        let [x, y, z] = Jet::point(p0, 3);
        let one = Jet::constant(1.0);
        let fj = (x * y).sin() + (z / (one + x * x)).exp() * (Jet::constant(2.0) + y).sqrt();
        assert!(close(fj.value(), f(p0), 1e-14));
        let h = 1e-5;
        for k in 0..3 {
            let mut a = p0;
            let mut b = p0;
            a[k] += h;
            b[k] -= h;
            let fd = (f(a) - f(b)) / (2.0 * h);
            assert!(close(fj.gradient()[k], fd, 1e-9));
        }
        // second derivative in x
        let fd2 = (f([p0[0] + 1e-4, p0[1], p0[2]]) - 2.0 * f(p0) + f([p0[0] - 1e-4, p0[1], p0[2]])) / 1e-8;
        assert!(close(fj.partial(0).partial(0).value(), fd2, 1e-6));
    }

    #[test]
    fn bracket_of_heisenberg_frame() {
        let p = Jet::point([0.4, -1.1, 2.0], 3);
        let half = Jet::constant(0.5);
        let zero = Jet::constant(0.0);
        let one = Jet::constant(1.0);
        let x = [one, zero, -(half * p[1])];
        let y = [zero, one, half * p[0]];
        let w = bracket(&x, &y);
        assert_eq!(values(&w), [0.0, 0.0, 1.0]);
        assert_eq!(w[2].order(), 2);
    }

    #[test]
    fn division_and_cos_series() {
        let [x, _, _] = Jet::point([0.5, 0.0, 0.0], 3);
        let r = Jet::constant(1.0) / (Jet::constant(1.0) - x);
        // 1/(1-x) at 0.5: derivatives k!/(1-x)^{k+1}
        assert!(close(r.value(), 2.0, 1e-15));
        assert!(close(r.gradient()[0], 4.0, 1e-14));
        assert!(close(r.partial(0).partial(0).value(), 16.0, 1e-13));
        assert!(close(r.partial(0).partial(0).partial(0).value(), 96.0, 1e-12));
        let c = x.cos();
        assert!(close(c.partial(0).partial(0).partial(0).value(), 0.5f64.sin(), 1e-14));
    }
}
