//! Homogeneous forms in `(p, q)` with `q = 1 - p`, Polya positivization,
//! and the Bernstein pair `(d, e)` certifying that a rational function maps
//! `(0,1)` into `(0,1)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::poly::IntPolynomial;
use super::rational::RationalFunction;
use crate::error::{Error, Result};

/// Default bound on the Polya exponent search.
pub const DEFAULT_POLYA_CAP: usize = 200;

/// Homogeneous polynomial `sum_i coeffs[i] p^i q^(k-i)` of degree `k = coeffs.len() - 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HomogeneousPoly {
    coeffs: Vec<BigInt>,
}

impl HomogeneousPoly {
    /// Panics on an empty coefficient list; degree 0 needs one entry.
    pub fn new(coeffs: Vec<BigInt>) -> Self {
        assert!(
            !coeffs.is_empty(),
            "homogeneous polynomial needs degree + 1 coefficients"
        );
        HomogeneousPoly { coeffs }
    }

    pub fn from_i64s(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.coeffs.iter().all(|c| !c.is_negative())
    }

    /// `D(p,q) = sum_i a_i p^i (p+q)^(k-i)` for `poly = sum_i a_i p^i`, so that
    /// `D(p, 1-p) = poly(p)`. Requires `k >= deg poly`.
    pub fn pad(poly: &IntPolynomial, k: usize) -> Self {
        let deg = poly.degree().unwrap_or(0);
        assert!(k >= deg, "padding degree {k} below polynomial degree {deg}");
        let mut out = vec![BigInt::zero(); k + 1];
        for (i, a) in poly.coeffs().iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            // a_i p^i (p+q)^(k-i) contributes a_i * C(k-i, m-i) at p^m q^(k-m)
            let mut binom = BigInt::one();
            for j in 0..=(k - i) {
                out[i + j] += a * &binom;
                binom = binom * BigInt::from(k - i - j) / BigInt::from(j + 1);
            }
        }
        HomogeneousPoly { coeffs: out }
    }

    /// `sum_i c_i p^i (1-p)^(k-i)` as a polynomial in `p`.
    pub fn dehomogenize(&self) -> IntPolynomial {
        let k = self.degree();
        let mut acc = IntPolynomial::zero();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let term =
                &IntPolynomial::var().pow(i as u32) * &IntPolynomial::one_minus_var().pow((k - i) as u32);
            acc = &acc + &term.scale(c);
        }
        acc
    }

    /// Multiply by `(p + q)`: `c'_i = c_i + c_(i-1)`.
    pub fn pascal_shift(&self) -> Self {
        let k = self.degree();
        let mut out = Vec::with_capacity(k + 2);
        out.push(self.coeffs[0].clone());
        for i in 1..=k {
            out.push(&self.coeffs[i] + &self.coeffs[i - 1]);
        }
        out.push(self.coeffs[k].clone());
        HomogeneousPoly { coeffs: out }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.degree(), other.degree());
        HomogeneousPoly {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

/// Integer coefficients `d`, `e` of degree `k` with `0 <= d_i <= e_i`, so
/// that `f(p) = sum d_i p^i (1-p)^(k-i) / sum e_i p^i (1-p)^(k-i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BernsteinPair {
    d: Vec<BigInt>,
    e: Vec<BigInt>,
    polya_exponent: usize,
}

impl BernsteinPair {
    pub fn new(d: Vec<BigInt>, e: Vec<BigInt>, polya_exponent: usize) -> Result<Self> {
        if d.len() != e.len() || d.is_empty() {
            return Err(Error::Malformed(
                "Bernstein coefficient lists must be nonempty and of equal length".into(),
            ));
        }
        if d.iter().zip(&e).any(|(di, ei)| di.is_negative() || di > ei) {
            return Err(Error::Malformed(
                "Bernstein coefficients violate 0 <= d_i <= e_i".into(),
            ));
        }
        if e.iter().all(Zero::is_zero) {
            return Err(Error::Malformed("all e_i are zero".into()));
        }
        Ok(BernsteinPair { d, e, polya_exponent })
    }

    pub fn degree(&self) -> usize {
        self.d.len() - 1
    }

    pub fn d(&self) -> &[BigInt] {
        &self.d
    }

    pub fn e(&self) -> &[BigInt] {
        &self.e
    }

    pub fn polya_exponent(&self) -> usize {
        self.polya_exponent
    }

    /// The represented function `D(p) / E(p)` in canonical form.
    pub fn to_rational(&self) -> RationalFunction {
        RationalFunction::new(
            HomogeneousPoly::new(self.d.clone()).dehomogenize(),
            HomogeneousPoly::new(self.e.clone()).dehomogenize(),
        )
        .expect("some e_i > 0 keeps E nonzero on (0,1)")
    }
}

/// Homogenize numerator and denominator to the common degree `max(deg num, deg den)`.
///
/// No sign normalization happens here; [`bernstein_from_rational`] does that first.
pub fn homogenize(f: &RationalFunction) -> (HomogeneousPoly, HomogeneousPoly) {
    homogenize_pair(f.num(), f.den())
}

fn homogenize_pair(num: &IntPolynomial, den: &IntPolynomial) -> (HomogeneousPoly, HomogeneousPoly) {
    let k = num.degree().unwrap_or(0).max(den.degree().unwrap_or(0));
    (HomogeneousPoly::pad(num, k), HomogeneousPoly::pad(den, k))
}

/// Smallest `n <= cap` such that `(p+q)^n P` has nonnegative coefficients
/// for every `P` in `polys`, together with the shifted polynomials.
pub fn polya_positivize(polys: &[HomogeneousPoly], cap: usize) -> Result<(usize, Vec<HomogeneousPoly>)> {
    if polys.iter().any(HomogeneousPoly::is_zero) {
        return Err(Error::ZeroPolynomial);
    }
    let mut current = polys.to_vec();
    for n in 0..=cap {
        if current.iter().all(HomogeneousPoly::is_nonnegative) {
            return Ok((n, current));
        }
        if n < cap {
            current = current.iter().map(HomogeneousPoly::pascal_shift).collect();
        }
    }
    Err(Error::CapExceeded(cap))
}

pub fn polya_exponent(polys: &[HomogeneousPoly], cap: usize) -> Result<usize> {
    polya_positivize(polys, cap).map(|(n, _)| n)
}

/// Interior grid used for early range rejection: `j / 100`, `j = 1..=99`.
pub(crate) fn interior_grid() -> impl Iterator<Item = BigRational> {
    (1..=99).map(|j| BigRational::new(BigInt::from(j), BigInt::from(100)))
}

/// Write `f` as a ratio of Bernstein sums with `0 <= d_i <= e_i`.
///
/// Success certifies `0 < f(p) < 1` on `(0,1)`.
pub fn bernstein_from_rational(f: &RationalFunction, cap: usize) -> Result<BernsteinPair> {
    for x in interior_grid() {
        let v = f
            .eval(&x)
            .map_err(|_| Error::InvalidRange(format!("denominator vanishes at p = {x}")))?;
        if !v.is_positive() || v >= BigRational::one() {
            return Err(Error::InvalidRange(format!("f({x}) = {v} is not in (0,1)")));
        }
    }
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let (mut num, mut den) = (f.num().clone(), f.den().clone());
    if den.eval(&half).is_negative() {
        num = -num;
        den = -den;
    }
    if !num.eval(&half).is_positive() {
        return Err(Error::InvalidRange("numerator is not positive on (0,1)".into()));
    }
    let (d, e) = homogenize_pair(&num, &den);
    let gap = e.sub(&d);
    let (n, shifted) = polya_positivize(&[d, e, gap], cap).map_err(|err| match err {
        Error::ZeroPolynomial => Error::InvalidRange("f is identically 0 or 1".into()),
        other => other,
    })?;
    let [d, e, _]: [HomogeneousPoly; 3] = shifted.try_into().expect("three polynomials");
    BernsteinPair::new(d.coeffs, e.coeffs, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratfunc::IntPolynomial;

    fn rf(num: &[i64], den: &[i64]) -> RationalFunction {
        RationalFunction::new(IntPolynomial::from_i64s(num), IntPolynomial::from_i64s(den)).unwrap()
    }

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&c| BigInt::from(c)).collect()
    }

    #[test]
    fn homogenize_examples() {
        let (d, e) = homogenize(&rf(&[1], &[3]));
        assert_eq!((d.coeffs(), e.coeffs()), (&ints(&[1])[..], &ints(&[3])[..]));

        let (d, e) = homogenize(&rf(&[1, -3, 3], &[2]));
        assert_eq!(d.coeffs(), &ints(&[1, -1, 1])[..]);
        assert_eq!(e.coeffs(), &ints(&[2, 4, 2])[..]);

        let (d, e) = homogenize(&rf(&[0, 2, -2], &[1]));
        assert_eq!(d.coeffs(), &ints(&[0, 2, 0])[..]);
        assert_eq!(e.coeffs(), &ints(&[1, 2, 1])[..]);
    }

    #[test]
    fn polya_examples() {
        let d = HomogeneousPoly::from_i64s(&[1, -1, 1]);
        let e = HomogeneousPoly::from_i64s(&[2, 4, 2]);
        assert_eq!(
            polya_exponent(&[HomogeneousPoly::from_i64s(&[0, 2, 0])], 10),
            Ok(0)
        );
        let (n, shifted) = polya_positivize(std::slice::from_ref(&d), 10).unwrap();
        assert_eq!(n, 1);
        assert_eq!(shifted[0].coeffs(), &ints(&[1, 0, 0, 1])[..]);
        assert_eq!(polya_exponent(&[d.clone(), e.clone(), e.sub(&d)], 10), Ok(1));
    }

    #[test]
    fn polya_cap_and_zero() {
        // (p - q)^2 vanishes at p = q, never positivizable
        let sq = HomogeneousPoly::from_i64s(&[1, -2, 1]);
        assert_eq!(polya_exponent(&[sq], 25), Err(Error::CapExceeded(25)));
        assert_eq!(
            polya_exponent(&[HomogeneousPoly::from_i64s(&[0, 0])], 5),
            Err(Error::ZeroPolynomial)
        );
    }

    #[test]
    fn bernstein_examples() {
        let b = bernstein_from_rational(&rf(&[1], &[3]), DEFAULT_POLYA_CAP).unwrap();
        assert_eq!(
            (b.degree(), b.d(), b.e(), b.polya_exponent()),
            (0, &ints(&[1])[..], &ints(&[3])[..], 0)
        );

        let b = bernstein_from_rational(&rf(&[1, -3, 3], &[2]), DEFAULT_POLYA_CAP).unwrap();
        assert_eq!(b.degree(), 3);
        assert_eq!(b.d(), &ints(&[1, 0, 0, 1])[..]);
        assert_eq!(b.e(), &ints(&[2, 6, 6, 2])[..]);
        assert_eq!(b.polya_exponent(), 1);
    }

    #[test]
    fn invalid_ranges() {
        for f in [
            rf(&[0, 2], &[1]),
            rf(&[1, 1], &[1]),
            rf(&[0], &[1]),
            rf(&[1], &[1]),
        ] {
            assert!(
                matches!(bernstein_from_rational(&f, 50), Err(Error::InvalidRange(_))),
                "{f}"
            );
        }
        // pole at 1/2
        let pole = rf(&[1], &[-1, 2]);
        assert!(matches!(
            bernstein_from_rational(&pole, 50),
            Err(Error::InvalidRange(_))
        ));
    }

    #[test]
    fn sign_normalization() {
        // p / (p + 1) written with negated numerator and denominator
        let f = rf(&[0, -1], &[-1, -1]);
        let b = bernstein_from_rational(&f, 50).unwrap();
        assert_eq!(b.to_rational(), rf(&[0, 1], &[1, 1]));
    }

    #[test]
    fn pad_dehomogenize_round_trip() {
        let p = IntPolynomial::from_i64s(&[3, -7, 0, 2]);
        for k in 3..7 {
            assert_eq!(HomogeneousPoly::pad(&p, k).dehomogenize(), p);
        }
    }
}
