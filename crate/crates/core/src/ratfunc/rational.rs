use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::poly::IntPolynomial;
use crate::error::{Error, Result};

/// A rational function `num(p) / den(p)` in canonical form.
///
/// Canonical means: `num` and `den` are coprime over Q, the joint integer
/// content is 1, and `den` has a positive leading coefficient. The zero
/// function is `0 / 1`. Equality of canonical forms is equality of functions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalFunction {
    num: IntPolynomial,
    den: IntPolynomial,
}

impl RationalFunction {
    pub fn new(num: IntPolynomial, den: IntPolynomial) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZeroPolynomial);
        }
        if num.is_zero() {
            return Ok(Self::zero());
        }
        let g = num.gcd(&den);
        let mut num = num.div_exact(&g).expect("gcd divides numerator");
        let mut den = den.div_exact(&g).expect("gcd divides denominator");
        let mut c = num.content().gcd(&den.content());
        if den.leading().is_some_and(Signed::is_negative) {
            c = -c;
        }
        if !c.is_one() {
            num = IntPolynomial::new(num.coeffs().iter().map(|a| a / &c).collect());
            den = IntPolynomial::new(den.coeffs().iter().map(|a| a / &c).collect());
        }
        Ok(RationalFunction { num, den })
    }

    pub fn zero() -> Self {
        RationalFunction {
            num: IntPolynomial::zero(),
            den: IntPolynomial::one(),
        }
    }

    pub fn one() -> Self {
        Self::from_poly(IntPolynomial::one())
    }

    /// The identity function `p`.
    pub fn var() -> Self {
        Self::from_poly(IntPolynomial::var())
    }

    pub fn from_poly(p: IntPolynomial) -> Self {
        Self::new(p, IntPolynomial::one()).expect("unit denominator")
    }

    pub fn constant(c: &BigRational) -> Self {
        Self::new(
            IntPolynomial::constant(c.numer().clone()),
            IntPolynomial::constant(c.denom().clone()),
        )
        .expect("nonzero denominator")
    }

    pub fn from_ints(num: i64, den: i64) -> Self {
        Self::constant(&BigRational::new(num.into(), den.into()))
    }

    pub fn num(&self) -> &IntPolynomial {
        &self.num
    }

    pub fn den(&self) -> &IntPolynomial {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Canonicalize again; a no-op on values built through [`RationalFunction::new`].
    pub fn canonical(&self) -> Self {
        Self::new(self.num.clone(), self.den.clone()).expect("nonzero denominator")
    }

    pub fn eval(&self, x: &BigRational) -> Result<BigRational> {
        let d = self.den.eval(x);
        if d.is_zero() {
            return Err(Error::PoleAtPoint(x.to_string()));
        }
        Ok(self.num.eval(x) / d)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.num.eval_f64(x) / self.den.eval_f64(x)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(
            &(&self.num * &other.den) + &(&other.num * &self.den),
            &self.den * &other.den,
        )
        .expect("product of nonzero denominators")
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(
            &(&self.num * &other.den) - &(&other.num * &self.den),
            &self.den * &other.den,
        )
        .expect("product of nonzero denominators")
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::new(&self.num * &other.num, &self.den * &other.den).expect("product of nonzero denominators")
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Self::new(&self.num * &other.den, &self.den * &other.num)
    }

    pub fn neg(&self) -> Self {
        RationalFunction {
            num: -&self.num,
            den: self.den.clone(),
        }
    }

    pub fn pow(&self, exp: u32) -> Self {
        Self::new(self.num.pow(exp), self.den.pow(exp)).expect("nonzero denominator")
    }

    /// `1 - f`.
    pub fn complement(&self) -> Self {
        Self::one().sub(self)
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        Self::new(self.num.scale(c), self.den.clone()).expect("nonzero denominator")
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let den_is_one = self.den.is_constant() && self.den.coeff(0).is_one();
        if den_is_one {
            return write!(f, "{}", self.num);
        }
        if self.num.term_count() > 1 {
            write!(f, "({})", self.num)?;
        } else {
            write!(f, "{}", self.num)?;
        }
        if self.den.is_constant() {
            write!(f, "/{}", self.den)
        } else {
            write!(f, "/({})", self.den)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn ratio() -> RationalFunction {
        // p^2 / (p^2 + (1-p)^2)
        RationalFunction::new(
            IntPolynomial::from_i64s(&[0, 0, 1]),
            IntPolynomial::from_i64s(&[1, -2, 2]),
        )
        .unwrap()
    }

    #[test]
    fn eval_examples() {
        let half = RationalFunction::from_ints(1, 2);
        assert_eq!(half.eval(&q(3, 10)).unwrap(), q(1, 2));
        assert_eq!(ratio().eval(&q(1, 2)).unwrap(), q(1, 2));
        assert_eq!(ratio().eval(&q(1, 3)).unwrap(), q(1, 5));
    }

    #[test]
    fn pole_detected() {
        let f = RationalFunction::new(IntPolynomial::one(), IntPolynomial::from_i64s(&[-1, 2])).unwrap();
        assert!(matches!(f.eval(&q(1, 2)), Err(Error::PoleAtPoint(_))));
    }

    #[test]
    fn canonical_form() {
        let f = RationalFunction::new(
            IntPolynomial::from_i64s(&[-2, 6, -6]),
            IntPolynomial::from_i64s(&[-4]),
        )
        .unwrap();
        assert_eq!(f.num(), &IntPolynomial::from_i64s(&[1, -3, 3]));
        assert_eq!(f.den(), &IntPolynomial::from_i64s(&[2]));
        // (p^2 - 1)/(p - 1) = p + 1
        let g = RationalFunction::new(
            IntPolynomial::from_i64s(&[-1, 0, 1]),
            IntPolynomial::from_i64s(&[-1, 1]),
        )
        .unwrap();
        assert_eq!(g, RationalFunction::from_poly(IntPolynomial::from_i64s(&[1, 1])));
        assert!(RationalFunction::new(IntPolynomial::one(), IntPolynomial::zero()).is_err());
    }

    #[test]
    fn arithmetic() {
        let p = RationalFunction::var();
        let sum = ratio().add(&ratio().complement());
        assert_eq!(sum, RationalFunction::one());
        assert_eq!(p.mul(&p).sub(&p.pow(2)), RationalFunction::zero());
        assert_eq!(p.div(&p).unwrap(), RationalFunction::one());
    }

    #[test]
    fn display() {
        assert_eq!(ratio().to_string(), "p^2/(2p^2-2p+1)");
        assert_eq!(RationalFunction::from_ints(1, 2).to_string(), "1/2");
        assert_eq!(RationalFunction::var().complement().to_string(), "-p+1");
        let f = RationalFunction::new(
            IntPolynomial::from_i64s(&[1, -3, 3]),
            IntPolynomial::from_i64s(&[2]),
        )
        .unwrap();
        assert_eq!(f.to_string(), "(3p^2-3p+1)/2");
    }
}
