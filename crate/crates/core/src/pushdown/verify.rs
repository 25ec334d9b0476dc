use crate::error::{Error, Result};
use crate::ratfunc::MultiPoly;

/// Residuals of a candidate relation `P(p, f) = 0` on sampled values.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraicReport {
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub tol: f64,
    pub passed: bool,
}

/// Evaluate `|P(p, f_p)|` for each `(p, f_p)`. Variable 0 of `relation` is
/// `p`, variable 1 is `f`.
pub fn verify_algebraic(values: &[(f64, f64)], relation: &MultiPoly, tol: f64) -> Result<AlgebraicReport> {
    if relation.nvars() != 2 {
        return Err(Error::AlphabetMismatch(format!(
            "relation has {} variables, expected 2",
            relation.nvars()
        )));
    }
    if relation.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let residuals: Vec<f64> = values
        .iter()
        .map(|&(p, f)| relation.eval_f64(&[p, f]).abs())
        .collect();
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    Ok(AlgebraicReport {
        passed: residuals.iter().all(|r| *r <= tol),
        residuals,
        max_residual,
        tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_root_relation() {
        let p = MultiPoly::var(2, 0);
        let f = MultiPoly::var(2, 1);
        let values: Vec<(f64, f64)> = (1..10).map(|i| i as f64 / 10.0).map(|x| (x, x.sqrt())).collect();
        assert!(
            verify_algebraic(&values, &f.pow(2).sub(&p), 1e-12)
                .unwrap()
                .passed
        );
        let wrong = verify_algebraic(&values, &f.sub(&p), 1e-9).unwrap();
        assert!(!wrong.passed && wrong.max_residual > 0.1);
        assert_eq!(
            verify_algebraic(&values, &MultiPoly::zero(2), 1e-9).unwrap_err(),
            Error::ZeroPolynomial
        );
    }
}
