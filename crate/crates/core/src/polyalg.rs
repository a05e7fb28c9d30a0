//! Homogeneous polynomials in (u, v) with {u, v} = 1.
//!
//! `HomPoly<F>` stores the coefficient of u^{k−m} v^m at index m. Everything is exact over
//! [`BigRational`]; `f64` is available for interoperability.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Div, Mul, Neg, Sub};
use core::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Coefficient ring.
pub trait Ring:
    Clone + PartialEq + fmt::Debug + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_int(n: i64) -> Self;
    fn is_zero(&self) -> bool;
}

/// Coefficient field; `negligible` is exact zero for exact fields.
pub trait Field: Ring + Div<Output = Self> {
    fn magnitude(&self) -> f64;
    fn negligible(&self, scale: f64) -> bool;
}

impl Ring for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_int(n: i64) -> Self {
        n as f64
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
}

impl Field for f64 {
    fn magnitude(&self) -> f64 {
        libm::fabs(*self)
    }
    fn negligible(&self, scale: f64) -> bool {
        libm::fabs(*self) <= 1e-12 * scale.max(1.0)
    }
}

impl Ring for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_int(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
}

impl Field for BigRational {
    fn magnitude(&self) -> f64 {
        self.abs().to_f64().unwrap_or(f64::INFINITY)
    }
    fn negligible(&self, _scale: f64) -> bool {
        Zero::is_zero(self)
    }
}

/// a + b i over a ring.
#[derive(Clone, Debug, PartialEq)]
pub struct Gaussian<F> {
    pub re: F,
    pub im: F,
}

impl<F: Ring> Gaussian<F> {
    pub fn new(re: F, im: F) -> Self {
        Self { re, im }
    }
}

impl<F: Ring> Add for Gaussian<F> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.re + o.re, self.im + o.im)
    }
}

impl<F: Ring> Sub for Gaussian<F> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.re - o.re, self.im - o.im)
    }
}

impl<F: Ring> Mul for Gaussian<F> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let re = self.re.clone() * o.re.clone() - self.im.clone() * o.im.clone();
        Self::new(re, self.re * o.im + self.im * o.re)
    }
}

impl<F: Ring> Neg for Gaussian<F> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.re, -self.im)
    }
}

impl<F: Ring> Ring for Gaussian<F> {
    fn zero() -> Self {
        Self::new(F::zero(), F::zero())
    }
    fn one() -> Self {
        Self::new(F::one(), F::zero())
    }
    fn from_int(n: i64) -> Self {
        Self::new(F::from_int(n), F::zero())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

#[derive(Clone, PartialEq)]
pub struct HomPoly<F> {
    coeffs: Vec<F>,
}

pub type RatPoly = HomPoly<BigRational>;
pub type FloatPoly = HomPoly<f64>;

impl<F: Ring> HomPoly<F> {
    /// Polynomial of degree `coeffs.len() − 1`.
    pub fn new(coeffs: Vec<F>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidParameter(
                "a homogeneous polynomial needs at least one coefficient".into(),
            ));
        }
        Ok(Self { coeffs })
    }

    pub fn from_ints(c: &[i64]) -> Result<Self> {
        Self::new(c.iter().map(|x| F::from_int(*x)).collect())
    }

    pub fn zero(k: usize) -> Self {
        Self {
            coeffs: vec![F::zero(); k + 1],
        }
    }

    pub fn constant(c: F) -> Self {
        Self { coeffs: vec![c] }
    }

    /// c·u^{k−m} v^m
    pub fn monomial(k: usize, m: usize, c: F) -> Self {
        let mut p = Self::zero(k);
        p.coeffs[m] = c;
        p
    }

    pub fn u() -> Self {
        Self::monomial(1, 0, F::one())
    }

    pub fn v() -> Self {
        Self::monomial(1, 1, F::one())
    }

    /// I = u² + v²
    pub fn i_form() -> Self {
        Self {
            coeffs: vec![F::one(), F::zero(), F::one()],
        }
    }

    /// I^n, degree 2n.
    pub fn i_power(n: usize) -> Self {
        Self::i_form().pow(n)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[F] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Ring::is_zero)
    }

    pub fn scale(&self, c: &F) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|x| x.clone() * c.clone()).collect(),
        }
    }

    pub fn try_add(&self, o: &Self) -> Result<Self> {
        self.same_degree(o)?;
        Ok(Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&o.coeffs)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        })
    }

    pub fn try_sub(&self, o: &Self) -> Result<Self> {
        self.same_degree(o)?;
        Ok(Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&o.coeffs)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        })
    }

    fn same_degree(&self, o: &Self) -> Result<()> {
        if self.degree() != o.degree() {
            return Err(Error::DegreeMismatch(self.degree(), o.degree()));
        }
        Ok(())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut c = vec![F::zero(); self.degree() + o.degree() + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                c[i + j] = c[i + j].clone() + a.clone() * b.clone();
            }
        }
        Self { coeffs: c }
    }

    pub fn pow(&self, n: usize) -> Self {
        let mut r = Self::constant(F::one());
        for _ in 0..n {
            r = r.mul(self);
        }
        r
    }

    /// ∂_u; the derivative of a constant is the zero constant.
    pub fn d_u(&self) -> Self {
        let k = self.degree();
        if k == 0 {
            return Self::zero(0);
        }
        Self {
            coeffs: (0..k)
                .map(|m| F::from_int((k - m) as i64) * self.coeffs[m].clone())
                .collect(),
        }
    }

    /// ∂_v
    pub fn d_v(&self) -> Self {
        let k = self.degree();
        if k == 0 {
            return Self::zero(0);
        }
        Self {
            coeffs: (0..k)
                .map(|m| F::from_int(m as i64 + 1) * self.coeffs[m + 1].clone())
                .collect(),
        }
    }

    /// {P, Q} = ∂_u P ∂_v Q − ∂_v P ∂_u Q; the zero constant when deg P + deg Q < 2.
    pub fn poisson(&self, q: &Self) -> Self {
        if self.degree() + q.degree() < 2 {
            return Self::zero(0);
        }
        if self.degree() == 0 || q.degree() == 0 {
            return Self::zero(self.degree() + q.degree() - 2);
        }
        let a = self.d_u().mul(&q.d_v());
        let b = self.d_v().mul(&q.d_u());
        a.try_sub(&b).expect("both products have degree deg P + deg Q − 2")
    }

    /// A = u∂_v − v∂_u
    pub fn a_operator(&self) -> Self {
        let k = self.degree();
        let mut c = vec![F::zero(); k + 1];
        for (m, q) in self.coeffs.iter().enumerate() {
            if m > 0 {
                c[m - 1] = c[m - 1].clone() + F::from_int(m as i64) * q.clone();
            }
            if m < k {
                c[m + 1] = c[m + 1].clone() - F::from_int((k - m) as i64) * q.clone();
            }
        }
        Self { coeffs: c }
    }

    /// Matrix of A on P_k in the monomial basis (column m is A(u^{k−m}v^m)).
    pub fn a_matrix(k: usize) -> Vec<Vec<F>> {
        let mut rows = vec![vec![F::zero(); k + 1]; k + 1];
        for m in 0..=k {
            let col = Self::monomial(k, m, F::one()).a_operator();
            for (row, c) in rows.iter_mut().zip(col.coeffs) {
                row[m] = c;
            }
        }
        rows
    }

    pub fn map<G>(&self, f: impl Fn(&F) -> G) -> HomPoly<G> {
        HomPoly {
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }
}

impl<F: Field> HomPoly<F> {
    /// (1/2π)∫ Q(cos θ, sin θ) dθ from the moments (a−1)!!(b−1)!!/(a+b)!!.
    pub fn circle_average(&self) -> F {
        let k = self.degree();
        let mut acc = F::zero();
        for (m, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                acc = acc + c.clone() * circle_moment::<F>(k - m, m);
            }
        }
        acc
    }

    pub fn inner_product(&self, o: &Self) -> F {
        self.mul(o).circle_average()
    }

    /// Q = Q0 + c·I^{k/2} with Q0 of zero circle average; c = 0 for odd k.
    pub fn decompose(&self) -> (Self, F) {
        let k = self.degree();
        if k % 2 == 1 {
            return (self.clone(), F::zero());
        }
        let c = self.circle_average();
        let q0 = self.try_sub(&Self::i_power(k / 2).scale(&c)).expect("same degree");
        (q0, c)
    }

    fn scale_hint(&self) -> f64 {
        self.coeffs.iter().map(Field::magnitude).fold(0.0, f64::max)
    }

    /// The unique Q of zero circle average with A(Q) = R. Works mode by mode on the unit
    /// circle, where A acts as ∂_θ.
    pub fn solve_cohomological(&self) -> Result<Self> {
        let k = self.degree();
        let avg = self.circle_average();
        if !avg.negligible(self.scale_hint()) {
            return Err(Error::NotInRange);
        }
        let two = F::from_int(2);
        let half = F::one() / two;
        let g = |re: F, im: F| Gaussian::new(re, im);
        // u = (z + z̄)/2, v = (z − z̄)/(2i), as polynomials in (z, z̄)
        let uz: HomPoly<Gaussian<F>> = HomPoly {
            coeffs: vec![g(half.clone(), F::zero()), g(half.clone(), F::zero())],
        };
        let vz: HomPoly<Gaussian<F>> = HomPoly {
            coeffs: vec![g(F::zero(), -half.clone()), g(F::zero(), half.clone())],
        };
        let mut modes: HomPoly<Gaussian<F>> = HomPoly::zero(k);
        for (m, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let term = uz.pow(k - m).mul(&vz.pow(m));
            for (b, t) in term.coeffs.into_iter().enumerate() {
                let add = t * g(c.clone(), F::zero());
                modes.coeffs[b] = modes.coeffs[b].clone() + add;
            }
        }
        // coefficient of z^{k−b} z̄^b is the mode e^{i(k−2b)θ}
        let up: HomPoly<Gaussian<F>> = HomPoly {
            coeffs: vec![g(F::one(), F::zero()), g(F::zero(), F::one())],
        };
        let down: HomPoly<Gaussian<F>> = HomPoly {
            coeffs: vec![g(F::one(), F::zero()), g(F::zero(), -F::one())],
        };
        let ipow = HomPoly::<Gaussian<F>>::i_form();
        let mut q: HomPoly<Gaussian<F>> = HomPoly::zero(k);
        for (b, c) in modes.coeffs.into_iter().enumerate() {
            let m = k as i64 - 2 * b as i64;
            if m == 0 || c.is_zero() {
                continue;
            }
            // c / (i m) = (c.im − i c.re)/m
            let mf = F::from_int(m);
            let c = g(c.im / mf.clone(), -(c.re / mf));
            let n = m.unsigned_abs() as usize;
            let e = if m > 0 { up.pow(n) } else { down.pow(n) };
            let term = e.mul(&ipow.pow((k - n) / 2));
            for (i, t) in term.coeffs.into_iter().enumerate() {
                q.coeffs[i] = q.coeffs[i].clone() + t * c.clone();
            }
        }
        Ok(HomPoly {
            coeffs: q.coeffs.into_iter().map(|z| z.re).collect(),
        })
    }
}

fn circle_moment<F: Field>(a: usize, b: usize) -> F {
    if a % 2 == 1 || b % 2 == 1 {
        return F::zero();
    }
    let mut r = F::one();
    for n in (1..a).step_by(2) {
        r = r * F::from_int(n as i64);
    }
    for n in (1..b).step_by(2) {
        r = r * F::from_int(n as i64);
    }
    for n in (2..=a + b).step_by(2) {
        r = r / F::from_int(n as i64);
    }
    r
}

/// Rank by Gaussian elimination (exact for exact fields).
pub fn rank<F: Field>(mut rows: Vec<Vec<F>>) -> usize {
    let scale = rows.iter().flatten().map(Field::magnitude).fold(0.0, f64::max);
    let ncols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..ncols {
        let pivot = (rank..rows.len())
            .filter(|&r| !rows[r][col].negligible(scale))
            .max_by(|&a, &b| rows[a][col].magnitude().total_cmp(&rows[b][col].magnitude()));
        let Some(p) = pivot else { continue };
        rows.swap(rank, p);
        let piv = rows[rank][col].clone();
        for r in 0..rows.len() {
            if r == rank || rows[r][col].is_zero() {
                continue;
            }
            let f = rows[r][col].clone() / piv.clone();
            let pivot_row = rows[rank].clone();
            for (x, p) in rows[r][col..].iter_mut().zip(&pivot_row[col..]) {
                *x = x.clone() - p.clone() * f.clone();
            }
        }
        rank += 1;
    }
    rank
}

pub fn a_matrix_rank<F: Field>(k: usize) -> usize {
    rank(HomPoly::<F>::a_matrix(k))
}

/// dim P_k⁰: k for even k, k + 1 for odd k.
pub fn zero_average_dimension(k: usize) -> usize {
    if k.is_multiple_of(2) {
        k
    } else {
        k + 1
    }
}

impl<F: fmt::Display> fmt::Display for HomPoly<F> {
    /// `c0,c1,...,ck`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl<F: fmt::Debug> fmt::Debug for HomPoly<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("HomPoly").field(&self.coeffs).finish()
    }
}

impl<F: FromStr + Ring> FromStr for HomPoly<F> {
    type Err = Error;

    /// Parses `c0,c1,...,ck`; rationals may be written `p/q`.
    fn from_str(s: &str) -> Result<Self> {
        let coeffs = s
            .split(',')
            .map(|t| {
                let t = t.trim();
                t.parse::<F>()
                    .map_err(|_| Error::InvalidParameter(format!("bad coefficient '{t}'")))
            })
            .collect::<Result<Vec<F>>>()?;
        HomPoly::new(coeffs)
    }
}

/// Render as a sum of monomials, e.g. `2*u^2*v - 1/2*v^3`.
pub fn pretty<F: fmt::Display + Ring>(p: &HomPoly<F>) -> String {
    let k = p.degree();
    let mut out = String::new();
    for (m, c) in p.coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let mono = match (k - m, m) {
            (0, 0) => String::new(),
            (a, 0) => power("u", a),
            (0, b) => power("v", b),
            (a, b) => format!("{}*{}", power("u", a), power("v", b)),
        };
        let cs = format!("{c}");
        let (neg, mag) = match cs.strip_prefix('-') {
            Some(r) => (true, String::from(r)),
            None => (false, cs),
        };
        if !out.is_empty() {
            out.push_str(if neg { " - " } else { " + " });
        } else if neg {
            out.push('-');
        }
        match (mono.is_empty(), mag == "1") {
            (true, _) => out.push_str(&mag),
            (false, true) => out.push_str(&mono),
            (false, false) => {
                out.push_str(&mag);
                out.push('*');
                out.push_str(&mono);
            }
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

fn power(x: &str, n: usize) -> String {
    if n == 1 {
        String::from(x)
    } else {
        format!("{x}^{n}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rp(c: &[i64]) -> RatPoly {
        RatPoly::from_ints(c).unwrap()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn bracket_identities() {
        let i = RatPoly::i_form();
        assert_eq!(RatPoly::u().poisson(&RatPoly::v()), rp(&[1]));
        assert_eq!(rp(&[1, 0, 0, 0]).poisson(&i), rp(&[0, 6, 0, 0]));
        assert_eq!(rp(&[0, 1, 0, 0]).poisson(&i), rp(&[-2, 0, 4, 0]));
        assert_eq!(rp(&[0, 0, 0, 1]).poisson(&i), rp(&[0, 0, -6, 0]));
        assert_eq!(rp(&[0, 0, 1, 0]).poisson(&i), rp(&[0, -4, 0, 2]));
        assert_eq!(rp(&[1]).poisson(&RatPoly::u()), rp(&[0]));
        assert_eq!(rp(&[5]).poisson(&rp(&[1, 2, 3, 4])), rp(&[0, 0]));
    }

    #[test]
    fn a_operator_examples() {
        assert!(RatPoly::i_form().a_operator().is_zero());
        assert_eq!(rp(&[0, 1, 0]).a_operator(), rp(&[1, 0, -1]));
        assert_eq!(rp(&[1, 0, 0]).a_operator(), rp(&[0, -2, 0]));
    }

    #[test]
    fn inner_products() {
        assert_eq!(rp(&[1, 0, 0]).inner_product(&rp(&[0, 0, 1])), q(1, 8));
        assert_eq!(RatPoly::u().inner_product(&RatPoly::v()), q(0, 1));
        for n in 0..6 {
            let p = RatPoly::i_power(n);
            assert_eq!(p.inner_product(&p), q(1, 1));
        }
    }

    #[test]
    fn decompositions() {
        let (q0, c) = rp(&[1, 0, 0]).decompose();
        assert_eq!(
            (q0, c),
            (RatPoly::new(vec![q(1, 2), q(0, 1), q(-1, 2)]).unwrap(), q(1, 2))
        );
        assert_eq!(rp(&[1, 0, 0, 0]).decompose(), (rp(&[1, 0, 0, 0]), q(0, 1)));
        assert_eq!(RatPoly::i_power(2).decompose(), (rp(&[0, 0, 0, 0, 0]), q(1, 1)));
    }

    #[test]
    fn solver_examples() {
        assert_eq!(rp(&[1, 0, -1]).solve_cohomological().unwrap(), rp(&[0, 1, 0]));
        let r = rp(&[0, 6, 0, 0]);
        assert_eq!(r.solve_cohomological().unwrap().a_operator(), r);
        assert!(matches!(
            RatPoly::i_form().solve_cohomological(),
            Err(Error::NotInRange)
        ));
        assert_eq!(rp(&[0]).solve_cohomological().unwrap(), rp(&[0]));
        let f = FloatPoly::from_ints(&[1, 0, -1])
            .unwrap()
            .solve_cohomological()
            .unwrap();
        assert!((f.coeffs()[1] - 1.0).abs() < 1e-15 && f.coeffs()[0].abs() < 1e-15);
    }

    #[test]
    fn ranks() {
        for k in 0..=12 {
            let expect = if k % 2 == 0 { k } else { k + 1 };
            assert_eq!(a_matrix_rank::<BigRational>(k), expect, "k = {k}");
            assert_eq!(zero_average_dimension(k), expect);
        }
    }

    #[test]
    fn text_round_trip() {
        let p: RatPoly = "1/2, -3,0,7/4".parse().unwrap();
        assert_eq!(p.degree(), 3);
        assert_eq!(p.to_string(), "1/2,-3,0,7/4");
        assert_eq!(pretty(&p), "1/2*u^3 - 3*u^2*v + 7/4*v^3");
        assert!("1,x".parse::<RatPoly>().is_err());
        assert_eq!(pretty(&rp(&[0, 0])), "0");
    }
}
