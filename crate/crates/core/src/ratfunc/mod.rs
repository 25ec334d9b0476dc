//! Exact polynomial and rational-function arithmetic over Q, homogeneous
//! (Bernstein) forms and Polya positivization.

mod bernstein;
mod multi;
mod poly;
mod rational;

pub use bernstein::{
    bernstein_from_rational, homogenize, polya_exponent, polya_positivize, BernsteinPair, HomogeneousPoly,
    DEFAULT_POLYA_CAP,
};
pub(crate) use multi::simplex_grid;
pub use multi::{polya_multi, polya_multi_joint, Monomial, MultiPoly, MultiRational};
pub use poly::IntPolynomial;
pub use rational::RationalFunction;

use num_rational::BigRational;

/// Exact evaluation of a polynomial.
pub fn poly_eval(poly: &IntPolynomial, x: &BigRational) -> BigRational {
    poly.eval(x)
}

/// Exact evaluation of a rational function.
pub fn ratfunc_eval(f: &RationalFunction, x: &BigRational) -> crate::Result<BigRational> {
    f.eval(x)
}
