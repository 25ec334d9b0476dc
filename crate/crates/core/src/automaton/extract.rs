//! Exact extraction of `P_p[label]` as a rational function of `p`.
//!
//! For each label the absorption probability `F(s)` is harmonic on the live
//! states, `F(s) = p F(delta(s,1)) + (1-p) F(delta(s,0))`, with boundary
//! values 1 on finals of that label and 0 on the others. The system has
//! entries in Z[p] and is solved by fraction-free (Bareiss) elimination with
//! all labels as right-hand-side columns. The start state is the last unknown,
//! so the last row after elimination reads `det(A) x = det(A_start)`.

use crate::error::{Error, Result};
use crate::ratfunc::{IntPolynomial, RationalFunction};

use super::ValidatedAutomaton;

pub fn extract_rational(a: &ValidatedAutomaton) -> Result<Vec<RationalFunction>> {
    if a.alphabet_size() != 2 {
        return Err(Error::UnsupportedAlphabet(a.alphabet_size()));
    }
    let labels = a.label_count();
    if let Some(label) = a.output(a.start()) {
        return Ok((0..labels)
            .map(|l| {
                if l as u32 == label {
                    RationalFunction::one()
                } else {
                    RationalFunction::zero()
                }
            })
            .collect());
    }

    // unknowns: live states, start moved to the last column
    let mut order: Vec<usize> = (0..a.state_count())
        .filter(|&s| a.output(s).is_none() && s != a.start())
        .collect();
    order.push(a.start());
    let m = order.len();
    let mut column = vec![usize::MAX; a.state_count()];
    for (c, &s) in order.iter().enumerate() {
        column[s] = c;
    }

    let weights = [IntPolynomial::one_minus_var(), IntPolynomial::var()];
    let width = m + labels;
    let mut rows: Vec<Vec<IntPolynomial>> = vec![vec![IntPolynomial::zero(); width]; m];
    for (r, &s) in order.iter().enumerate() {
        let row = &mut rows[r];
        row[r] = &row[r] + &IntPolynomial::one();
        for (bit, w) in weights.iter().enumerate() {
            let t = a.step(s, bit);
            match a.output(t) {
                Some(label) => {
                    let c = m + label as usize;
                    row[c] = &row[c] + w;
                }
                None => {
                    let c = column[t];
                    row[c] = &row[c] - w;
                }
            }
        }
    }

    bareiss_forward(&mut rows, m);

    let last = &rows[m - 1];
    (0..labels)
        .map(|l| RationalFunction::new(last[m + l].clone(), last[m - 1].clone()))
        .collect()
}

/// In-place fraction-free forward elimination on the first `m` columns of an
/// `m x width` matrix. Divisions by the previous pivot are exact.
fn bareiss_forward(rows: &mut [Vec<IntPolynomial>], m: usize) {
    let width = rows[0].len();
    let mut prev = IntPolynomial::one();
    for k in 0..m {
        let pivot_row = (k..m)
            .find(|&i| !rows[i][k].is_zero())
            .expect("harmonic system of a validated automaton is nonsingular");
        rows.swap(k, pivot_row);
        let (top, bottom) = rows.split_at_mut(k + 1);
        let pivot = &top[k];
        for row in bottom.iter_mut() {
            let factor = row[k].clone();
            for j in (k + 1)..width {
                let num = &(&pivot[k] * &row[j]) - &(&factor * &pivot[j]);
                row[j] = num.div_exact(&prev).expect("Bareiss division is exact");
            }
            row[k] = IntPolynomial::zero();
        }
        prev = top[k][k].clone();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::{builtin, relabel_complement, validate, FiniteCoinAutomaton};

    fn extract(name: &str) -> Vec<RationalFunction> {
        extract_rational(&validate(&builtin(name).unwrap()).unwrap()).unwrap()
    }

    fn rf(num: &[i64], den: &[i64]) -> RationalFunction {
        RationalFunction::new(IntPolynomial::from_i64s(num), IntPolynomial::from_i64s(den)).unwrap()
    }

    #[test]
    fn figure_one_machines() {
        assert_eq!(extract("von_neumann"), vec![rf(&[1], &[2]), rf(&[1], &[2])]);
        assert_eq!(extract("square")[1], rf(&[0, 0, 1], &[1]));
        assert_eq!(extract("ratio")[1], rf(&[0, 0, 1], &[1, -2, 2]));
    }

    #[test]
    fn complement_extracts_one_minus() {
        for name in ["square", "von_neumann", "ratio"] {
            let f = extract(name)[1].clone();
            let c = relabel_complement(&builtin(name).unwrap()).unwrap();
            let g = extract_rational(&validate(&c).unwrap()).unwrap();
            assert_eq!(g[1], f.complement());
        }
        let c = relabel_complement(&builtin("von_neumann").unwrap()).unwrap();
        assert_eq!(
            extract_rational(&validate(&c).unwrap()).unwrap()[1],
            rf(&[1], &[2])
        );
    }

    #[test]
    fn start_already_final() {
        let a = FiniteCoinAutomaton::new(2, 0, vec![vec![0, 0]], vec![Some(1)]).unwrap();
        let fs = extract_rational(&validate(&a).unwrap()).unwrap();
        assert_eq!(fs, vec![RationalFunction::zero(), RationalFunction::one()]);
    }

    #[test]
    fn three_labels() {
        // read one bit; 1 -> label 2; 0 -> read another bit: 0 -> label 0, 1 -> label 1
        let a = FiniteCoinAutomaton::new(
            2,
            0,
            vec![vec![1, 4], vec![2, 3], vec![2, 2], vec![3, 3], vec![4, 4]],
            vec![None, None, Some(0), Some(1), Some(2)],
        )
        .unwrap();
        let fs = extract_rational(&validate(&a).unwrap()).unwrap();
        assert_eq!(fs[0], rf(&[1, -2, 1], &[1]));
        assert_eq!(fs[1], rf(&[0, 1, -1], &[1]));
        assert_eq!(fs[2], rf(&[0, 1], &[1]));
    }
}
