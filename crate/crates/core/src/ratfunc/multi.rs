//! Multivariate integer polynomials over the probability simplex, used by
//! the dice (multi-letter) constructions.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::bernstein::HomogeneousPoly;
use super::poly::IntPolynomial;
use super::rational::RationalFunction;
use crate::error::{Error, Result};

/// Exponent vector, one entry per variable.
pub type Monomial = Vec<u32>;

/// Sparse polynomial in `nvars` variables with integer coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiPoly {
    nvars: usize,
    terms: BTreeMap<Monomial, BigInt>,
}

impl MultiPoly {
    pub fn zero(nvars: usize) -> Self {
        MultiPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: BigInt) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, BigInt::one())
    }

    /// The variable with index `i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars);
        let mut m = vec![0; nvars];
        m[i] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(m, BigInt::one());
        p
    }

    /// `p_0 + ... + p_(nvars-1)`.
    pub fn simplex_sum(nvars: usize) -> Self {
        (0..nvars).fold(Self::zero(nvars), |acc, i| acc.add(&Self::var(nvars, i)))
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Monomial, BigInt)>) -> Self {
        let mut p = Self::zero(nvars);
        for (m, c) in terms {
            assert_eq!(m.len(), nvars, "monomial arity");
            p.add_term(m, c);
        }
        p
    }

    /// Univariate `poly(x)` with `x` the variable `var`.
    pub fn from_univariate(poly: &IntPolynomial, nvars: usize, var: usize) -> Self {
        let mut p = Self::zero(nvars);
        for (i, c) in poly.coeffs().iter().enumerate() {
            let mut m = vec![0; nvars];
            m[var] = i as u32;
            p.add_term(m, c.clone());
        }
        p
    }

    /// Binary homogeneous form `sum c_i p^i q^(k-i)` with `q` as variable 0
    /// and `p` as variable 1.
    pub fn from_homogeneous(h: &HomogeneousPoly) -> Self {
        let k = h.degree() as u32;
        Self::from_terms(
            2,
            h.coeffs()
                .iter()
                .enumerate()
                .map(|(i, c)| (vec![k - i as u32, i as u32], c.clone())),
        )
    }

    fn add_term(&mut self, m: Monomial, c: BigInt) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigInt)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &[u32]) -> BigInt {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.iter().sum()).max()
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(|m| m.iter().sum::<u32>());
        match degs.next() {
            None => true,
            Some(d) => degs.all(|e| e == d),
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        self.terms.values().all(|c| !c.is_negative())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        MultiPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut out = Self::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m = ma.iter().zip(mb).map(|(a, b)| a + b).collect();
                out.add_term(m, ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        MultiPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn pow(&self, exp: u32) -> Self {
        (0..exp).fold(Self::one(self.nvars), |acc, _| acc.mul(self))
    }

    /// Multiply by `p_0 + ... + p_(s-1)`.
    pub fn simplex_shift(&self) -> Self {
        self.mul(&Self::simplex_sum(self.nvars))
    }

    /// Pad every monomial of degree `j` with `(sum p)^(k-j)`; the result is
    /// homogeneous of degree `k` and agrees with `self` on the simplex.
    pub fn homogenize_to(&self, k: u32) -> Self {
        let sum = Self::simplex_sum(self.nvars);
        let mut out = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            let j: u32 = m.iter().sum();
            assert!(k >= j, "homogenization degree below term degree");
            let mono = Self::from_terms(self.nvars, [(m.clone(), c.clone())]);
            out = out.add(&mono.mul(&sum.pow(k - j)));
        }
        out
    }

    pub fn eval(&self, point: &[BigRational]) -> BigRational {
        assert_eq!(point.len(), self.nvars);
        let mut acc = BigRational::zero();
        for (m, c) in &self.terms {
            let mut t = BigRational::from_integer(c.clone());
            for (x, &e) in point.iter().zip(m) {
                for _ in 0..e {
                    t *= x;
                }
            }
            acc += t;
        }
        acc
    }

    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        use num_traits::ToPrimitive;
        self.terms
            .iter()
            .map(|(m, c)| {
                m.iter()
                    .zip(point)
                    .fold(c.to_f64().unwrap_or(f64::NAN), |t, (&e, &x)| t * x.powi(e as i32))
            })
            .sum()
    }

    /// Equality as functions on the simplex: homogenize both to a common
    /// degree and compare coefficients.
    pub fn equal_on_simplex(&self, other: &Self) -> bool {
        let k = self.degree().unwrap_or(0).max(other.degree().unwrap_or(0));
        self.homogenize_to(k) == other.homogenize_to(k)
    }

    /// Two-variable polynomial back to univariate in `p`, with variable 1 as
    /// `p` and variable 0 as `1 - p`.
    pub fn to_univariate(&self) -> IntPolynomial {
        assert_eq!(self.nvars, 2);
        let mut acc = IntPolynomial::zero();
        for (m, c) in &self.terms {
            let t = &IntPolynomial::one_minus_var().pow(m[0]) * &IntPolynomial::var().pow(m[1]);
            acc = &acc + &t.scale(c);
        }
        acc
    }
}

/// Smallest `n <= cap` with `(p_1 + ... + p_s)^n poly` having nonnegative coefficients.
pub fn polya_multi(poly: &MultiPoly, cap: usize) -> Result<usize> {
    polya_multi_joint(std::slice::from_ref(poly), cap).map(|(n, _)| n)
}

/// Joint version of [`polya_multi`] returning the shifted polynomials.
pub fn polya_multi_joint(polys: &[MultiPoly], cap: usize) -> Result<(usize, Vec<MultiPoly>)> {
    if polys.iter().any(MultiPoly::is_zero) {
        return Err(Error::ZeroPolynomial);
    }
    if polys.iter().any(|p| !p.is_homogeneous()) {
        return Err(Error::NotHomogeneous);
    }
    let mut current = polys.to_vec();
    for n in 0..=cap {
        if current.iter().all(MultiPoly::is_nonnegative) {
            return Ok((n, current));
        }
        if n < cap {
            current = current.iter().map(MultiPoly::simplex_shift).collect();
        }
    }
    Err(Error::CapExceeded(cap))
}

/// Ratio of two multivariate polynomials, interpreted on the simplex.
///
/// Not reduced to lowest terms; equality is tested on the simplex.
#[derive(Clone, Debug)]
pub struct MultiRational {
    num: MultiPoly,
    den: MultiPoly,
}

impl MultiRational {
    pub fn new(num: MultiPoly, den: MultiPoly) -> Result<Self> {
        assert_eq!(num.nvars, den.nvars);
        if den.is_zero() {
            return Err(Error::DivisionByZeroPolynomial);
        }
        Ok(MultiRational { num, den })
    }

    pub fn one(nvars: usize) -> Self {
        MultiRational {
            num: MultiPoly::one(nvars),
            den: MultiPoly::one(nvars),
        }
    }

    /// Embed a univariate function as a function on the 2-letter simplex
    /// (variable 1 is `p`, variable 0 is `1 - p`).
    pub fn from_univariate(f: &RationalFunction) -> Self {
        let (d, e) = super::bernstein::homogenize(f);
        MultiRational {
            num: MultiPoly::from_homogeneous(&d),
            den: MultiPoly::from_homogeneous(&e),
        }
    }

    pub fn nvars(&self) -> usize {
        self.num.nvars
    }

    pub fn num(&self) -> &MultiPoly {
        &self.num
    }

    pub fn den(&self) -> &MultiPoly {
        &self.den
    }

    pub fn add(&self, other: &Self) -> Self {
        MultiRational {
            num: self.num.mul(&other.den).add(&other.num.mul(&self.den)),
            den: self.den.mul(&other.den),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        MultiRational {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        MultiRational {
            num: self.num.mul(&other.num),
            den: self.den.mul(&other.den),
        }
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Self::new(self.num.mul(&other.den), self.den.mul(&other.num))
    }

    pub fn pow(&self, exp: u32) -> Self {
        MultiRational {
            num: self.num.pow(exp),
            den: self.den.pow(exp),
        }
    }

    pub fn eval(&self, point: &[BigRational]) -> Result<BigRational> {
        let d = self.den.eval(point);
        if d.is_zero() {
            return Err(Error::PoleAtPoint(format!("{point:?}")));
        }
        Ok(self.num.eval(point) / d)
    }

    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        self.num.eval_f64(point) / self.den.eval_f64(point)
    }

    pub fn equal_on_simplex(&self, other: &Self) -> bool {
        self.num
            .mul(&other.den)
            .equal_on_simplex(&other.num.mul(&self.den))
    }

    /// Canonical univariate form; only for two variables.
    pub fn to_univariate(&self) -> Result<RationalFunction> {
        if self.nvars() != 2 {
            return Err(Error::UnsupportedAlphabet(self.nvars()));
        }
        RationalFunction::new(self.num.to_univariate(), self.den.to_univariate())
    }
}

/// Interior lattice points of the simplex with the given denominator.
pub(crate) fn simplex_grid(nvars: usize, denom: u32) -> Vec<Vec<BigRational>> {
    fn rec(left: u32, slots: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if slots == 1 {
            if left >= 1 {
                prefix.push(left);
                out.push(prefix.clone());
                prefix.pop();
            }
            return;
        }
        for v in 1..left {
            prefix.push(v);
            rec(left - v, slots - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut raw = Vec::new();
    rec(denom, nvars, &mut Vec::new(), &mut raw);
    raw.into_iter()
        .map(|pt| {
            pt.into_iter()
                .map(|v| BigRational::new(v.into(), denom.into()))
                .collect()
        })
        .collect()
}

/// Terms in `p1..ps`, highest exponents of `p1` first, e.g. `p1^2-3*p1*p2`.
impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let factors: Vec<String> = m
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(v, &e)| {
                    if e == 1 {
                        format!("p{}", v + 1)
                    } else {
                        format!("p{}^{e}", v + 1)
                    }
                })
                .collect();
            let mag = c.abs();
            if c.is_negative() {
                write!(f, "-")?;
            } else if i > 0 {
                write!(f, "+")?;
            }
            match (factors.is_empty(), mag.is_one()) {
                (true, _) => write!(f, "{mag}")?,
                (false, true) => write!(f, "{}", factors.join("*"))?,
                (false, false) => write!(f, "{mag}*{}", factors.join("*"))?,
            }
        }
        Ok(())
    }
}

impl fmt::Display for MultiRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == MultiPoly::one(self.nvars()) {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mono(nvars: usize, terms: &[(&[u32], i64)]) -> MultiPoly {
        MultiPoly::from_terms(nvars, terms.iter().map(|(m, c)| (m.to_vec(), BigInt::from(*c))))
    }

    #[test]
    fn polya_multi_examples() {
        assert_eq!(polya_multi(&mono(2, &[(&[1, 1], 1)]), 10), Ok(0));
        let hexagon = mono(2, &[(&[2, 0], 1), (&[1, 1], -1), (&[0, 2], 1)]);
        assert_eq!(polya_multi(&hexagon, 10), Ok(1));
    }

    #[test]
    fn polya_multi_errors() {
        assert_eq!(polya_multi(&MultiPoly::zero(3), 5), Err(Error::ZeroPolynomial));
        let inhom = mono(2, &[(&[1, 0], 1), (&[0, 0], 1)]);
        assert_eq!(polya_multi(&inhom, 5), Err(Error::NotHomogeneous));
    }

    #[test]
    fn homogenize_agrees_on_simplex() {
        // 1 + p0 p1 - p2 in three variables
        let f = mono(3, &[(&[0, 0, 0], 1), (&[1, 1, 0], 1), (&[0, 0, 1], -1)]);
        let h = f.homogenize_to(3);
        assert!(h.is_homogeneous());
        for pt in simplex_grid(3, 7) {
            assert_eq!(f.eval(&pt), h.eval(&pt));
        }
    }

    #[test]
    fn grid_sizes() {
        assert_eq!(simplex_grid(2, 100).len(), 99);
        assert_eq!(simplex_grid(3, 10).len(), 36);
    }

    #[test]
    fn univariate_round_trip() {
        let f = RationalFunction::new(
            IntPolynomial::from_i64s(&[1, -3, 3]),
            IntPolynomial::from_i64s(&[2]),
        )
        .unwrap();
        let m = MultiRational::from_univariate(&f);
        assert_eq!(m.to_univariate().unwrap(), f);
    }
}
