use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use super::rank::{binomial, rank_word};
use crate::automaton::FiniteCoinAutomaton;
use crate::error::{Error, Result};
use crate::ratfunc::{bernstein_from_rational, BernsteinPair, HomogeneousPoly, RationalFunction};
use crate::source::SymbolSource;

/// Largest block length accepted by the exhaustive enumeration oracle.
pub const BRUTE_FORCE_MAX_LENGTH: usize = 20;
/// Largest block length compiled into an explicit automaton.
pub const COMPILE_MAX_LENGTH: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BlockOutcome {
    Out1,
    Out0,
    Discard,
}

/// Reads words `v w` with `|v| = k`, `|w| = 2r`. Words whose padding `w` is
/// unbalanced are discarded; otherwise, with `i = n_1(v)` and the 1-based
/// combined rank `B = rank(v) C(2r,r) + rank(w) + 1`, the word outputs 1 when
/// `B <= d_i`, 0 when `d_i < B <= e_i`, and is discarded otherwise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockSimulation {
    k: usize,
    r: usize,
    d: Vec<BigUint>,
    e: Vec<BigUint>,
}

impl BlockSimulation {
    pub fn new(k: usize, r: usize, d: Vec<BigUint>, e: Vec<BigUint>) -> Result<Self> {
        if d.len() != k + 1 || e.len() != k + 1 {
            return Err(Error::Malformed(format!(
                "thresholds must have {} entries",
                k + 1
            )));
        }
        let central = binomial(2 * r, r);
        for i in 0..=k {
            if d[i] > e[i] || e[i] > binomial(k, i) * &central {
                return Err(Error::Malformed(format!(
                    "thresholds at weight {i} violate d_i <= e_i <= C(k,i) C(2r,r)"
                )));
            }
        }
        if e.iter().all(Zero::is_zero) {
            return Err(Error::Malformed("block simulation never produces output".into()));
        }
        Ok(BlockSimulation { k, r, d, e })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn d(&self) -> &[BigUint] {
        &self.d
    }

    pub fn e(&self) -> &[BigUint] {
        &self.e
    }

    pub fn block_length(&self) -> usize {
        self.k + 2 * self.r
    }

    pub fn classify_block(&self, word: &[u8]) -> Result<BlockOutcome> {
        if word.len() != self.block_length() {
            return Err(Error::LengthMismatch {
                expected: self.block_length(),
                got: word.len(),
            });
        }
        let (v, w) = word.split_at(self.k);
        let pad = rank_word(w);
        if pad.weight != self.r {
            return Ok(BlockOutcome::Discard);
        }
        let payload = rank_word(v);
        let b = payload.rank * binomial(2 * self.r, self.r) + pad.rank + 1u32;
        let i = payload.weight;
        Ok(if b <= self.d[i] {
            BlockOutcome::Out1
        } else if b <= self.e[i] {
            BlockOutcome::Out0
        } else {
            BlockOutcome::Discard
        })
    }

    /// Closed form `sum d_i p^i (1-p)^(k-i) / sum e_i p^i (1-p)^(k-i)`.
    pub fn exact_distribution(&self) -> RationalFunction {
        let lift = |v: &[BigUint]| {
            HomogeneousPoly::new(v.iter().map(|x| BigInt::from(x.clone())).collect()).dehomogenize()
        };
        RationalFunction::new(lift(&self.d), lift(&self.e))
            .expect("some e_i > 0 keeps the denominator nonzero")
    }

    /// Independent route to the output probability: classify every word of
    /// the block length and sum the exact monomial measures.
    pub fn brute_force_distribution(&self) -> Result<RationalFunction> {
        let len = self.block_length();
        if len > BRUTE_FORCE_MAX_LENGTH {
            return Err(Error::TooLarge(format!("block length {len} for enumeration")));
        }
        let mut ones = vec![BigInt::zero(); len + 1];
        let mut halts = vec![BigInt::zero(); len + 1];
        let mut word = vec![0u8; len];
        for x in 0u64..(1u64 << len) {
            for (j, b) in word.iter_mut().enumerate() {
                *b = ((x >> j) & 1) as u8;
            }
            let weight = x.count_ones() as usize;
            match self.classify_block(&word)? {
                BlockOutcome::Out1 => {
                    ones[weight] += 1;
                    halts[weight] += 1;
                }
                BlockOutcome::Out0 => halts[weight] += 1,
                BlockOutcome::Discard => {}
            }
        }
        RationalFunction::new(
            HomogeneousPoly::new(ones).dehomogenize(),
            HomogeneousPoly::new(halts).dehomogenize(),
        )
    }

    /// Read whole blocks until one is not discarded.
    pub fn run_block<S: SymbolSource + ?Sized>(&self, src: &mut S, step_cap: u64) -> Result<BlockRun> {
        let len = self.block_length();
        let mut buf = vec![0u8; len];
        let mut consumed = 0u64;
        loop {
            if consumed + len as u64 > step_cap {
                return Err(Error::StepCapExceeded(step_cap));
            }
            for b in buf.iter_mut() {
                *b = src.next_symbol() as u8;
            }
            consumed += len as u64;
            match self.classify_block(&buf)? {
                BlockOutcome::Out1 => return Ok(BlockRun { bit: 1, consumed }),
                BlockOutcome::Out0 => return Ok(BlockRun { bit: 0, consumed }),
                BlockOutcome::Discard => {}
            }
        }
    }

    /// Explicit automaton: a prefix tree over one block whose leaves go to
    /// the final states (label 0 at index `2^L - 1`, label 1 after it) or
    /// back to the root.
    pub fn compile_to_automaton(&self) -> Result<FiniteCoinAutomaton> {
        let len = self.block_length();
        if len > COMPILE_MAX_LENGTH {
            return Err(Error::TooLarge(format!("block length {len} for compilation")));
        }
        let node = |depth: usize, prefix: usize| (1usize << depth) - 1 + prefix;
        let inner = (1usize << len) - 1;
        let (zero, one) = (inner, inner + 1);
        let mut delta = vec![Vec::new(); inner + 2];
        let mut word = vec![0u8; len];
        for depth in 0..len {
            for prefix in 0..(1usize << depth) {
                let mut row = Vec::with_capacity(2);
                for bit in 0..2usize {
                    let next = prefix | (bit << depth);
                    if depth + 1 < len {
                        row.push(node(depth + 1, next));
                    } else {
                        for (j, b) in word.iter_mut().enumerate() {
                            *b = ((next >> j) & 1) as u8;
                        }
                        row.push(match self.classify_block(&word)? {
                            BlockOutcome::Out1 => one,
                            BlockOutcome::Out0 => zero,
                            BlockOutcome::Discard => 0,
                        });
                    }
                }
                delta[node(depth, prefix)] = row;
            }
        }
        delta[zero] = vec![zero, zero];
        delta[one] = vec![one, one];
        let mut outputs = vec![None; inner + 2];
        outputs[zero] = Some(0);
        outputs[one] = Some(1);
        FiniteCoinAutomaton::new(2, 0, delta, outputs)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockRun {
    pub bit: u8,
    pub consumed: u64,
}

/// Block simulation from a Bernstein pair with the smallest padding `r`
/// such that `e_i <= C(k,i) C(2r,r)` for all `i`.
pub fn build_block(b: &BernsteinPair) -> BlockSimulation {
    let k = b.degree();
    let to_u = |v: &[BigInt]| -> Vec<BigUint> {
        v.iter()
            .map(|x| x.to_biguint().expect("Bernstein coefficients are nonnegative"))
            .collect()
    };
    let (d, e) = (to_u(b.d()), to_u(b.e()));
    let mut r = 0;
    let mut central = BigUint::one();
    while !(0..=k).all(|i| e[i] <= binomial(k, i) * &central) {
        r += 1;
        central = binomial(2 * r, r);
    }
    BlockSimulation::new(k, r, d, e).expect("constructed thresholds are feasible")
}

/// The full pipeline: Bernstein certificate, then block construction.
pub fn rational_to_block(f: &RationalFunction, cap: usize) -> Result<BlockSimulation> {
    Ok(build_block(&bernstein_from_rational(f, cap)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::{extract_rational, validate};
    use crate::ratfunc::{IntPolynomial, DEFAULT_POLYA_CAP};
    use crate::source::ScriptedSource;

    fn rf(num: &[i64], den: &[i64]) -> RationalFunction {
        RationalFunction::new(IntPolynomial::from_i64s(num), IntPolynomial::from_i64s(den)).unwrap()
    }

    fn u(v: &[u32]) -> Vec<BigUint> {
        v.iter().map(|&x| BigUint::from(x)).collect()
    }

    fn pair(d: &[i64], e: &[i64]) -> BernsteinPair {
        BernsteinPair::new(
            d.iter().map(|&x| BigInt::from(x)).collect(),
            e.iter().map(|&x| BigInt::from(x)).collect(),
            0,
        )
        .unwrap()
    }

    fn bits(s: &str) -> Vec<u8> {
        s.bytes().map(|b| b - b'0').collect()
    }

    #[test]
    fn minimal_padding() {
        let third = build_block(&pair(&[1], &[3]));
        assert_eq!((third.r(), third.block_length()), (2, 4));
        let cubic = build_block(&pair(&[1, 0, 0, 1], &[2, 6, 6, 2]));
        assert_eq!((cubic.r(), cubic.block_length()), (1, 5));
        let two_pq = build_block(&pair(&[0, 2, 0], &[1, 2, 1]));
        assert_eq!((two_pq.r(), two_pq.block_length()), (0, 2));
    }

    #[test]
    fn one_third_classification() {
        let sim = build_block(&pair(&[1], &[3]));
        let mut counts = [0usize; 3];
        for x in 0u32..16 {
            let w: Vec<u8> = (0..4).map(|j| ((x >> j) & 1) as u8).collect();
            match sim.classify_block(&w).unwrap() {
                BlockOutcome::Out1 => counts[0] += 1,
                BlockOutcome::Out0 => counts[1] += 1,
                BlockOutcome::Discard => counts[2] += 1,
            }
        }
        // 1 of the 6 balanced words -> 1, 2 -> 0, 3 balanced + 10 unbalanced discarded
        assert_eq!(counts, [1, 2, 13]);
        assert_eq!(sim.classify_block(&bits("1110")).unwrap(), BlockOutcome::Discard);
        assert_eq!(sim.classify_block(&bits("1100")).unwrap(), BlockOutcome::Out1);
        assert!(matches!(
            sim.classify_block(&bits("110")),
            Err(Error::LengthMismatch { expected: 4, got: 3 })
        ));
    }

    #[test]
    fn two_pq_classification() {
        let sim = build_block(&pair(&[0, 2, 0], &[1, 2, 1]));
        assert_eq!(sim.classify_block(&bits("10")).unwrap(), BlockOutcome::Out1);
        assert_eq!(sim.classify_block(&bits("01")).unwrap(), BlockOutcome::Out1);
        assert_eq!(sim.classify_block(&bits("00")).unwrap(), BlockOutcome::Out0);
        assert_eq!(sim.classify_block(&bits("11")).unwrap(), BlockOutcome::Out0);
    }

    #[test]
    fn scripted_block_runs() {
        let sim = build_block(&pair(&[1], &[3]));
        let run = sim
            .run_block(&mut ScriptedSource::from_digits("1100"), 1000)
            .unwrap();
        assert_eq!(run, BlockRun { bit: 1, consumed: 4 });
        // 1111 discarded, then 1010 (rank 1 -> B = 2) outputs 0
        let run = sim
            .run_block(&mut ScriptedSource::from_digits("11111010"), 1000)
            .unwrap();
        assert_eq!(run, BlockRun { bit: 0, consumed: 8 });
        let err = sim
            .run_block(&mut ScriptedSource::from_digits("1111"), 10)
            .unwrap_err();
        assert_eq!(err, Error::StepCapExceeded(10));
    }

    #[test]
    fn distributions_closed_form_and_brute_force() {
        let cases = [
            (pair(&[1], &[3]), rf(&[1], &[3])),
            (pair(&[1, 0, 0, 1], &[2, 6, 6, 2]), rf(&[1, -3, 3], &[2])),
            (pair(&[0, 2, 0], &[1, 2, 1]), rf(&[0, 2, -2], &[1])),
        ];
        for (b, f) in cases {
            let sim = build_block(&b);
            assert_eq!(sim.exact_distribution(), f);
            assert_eq!(sim.brute_force_distribution().unwrap(), f);
        }
    }

    #[test]
    fn pipeline() {
        let sim = rational_to_block(&rf(&[1], &[3]), DEFAULT_POLYA_CAP).unwrap();
        assert_eq!(sim.block_length(), 4);
        let sim = rational_to_block(&rf(&[1, -3, 3], &[2]), DEFAULT_POLYA_CAP).unwrap();
        assert_eq!(sim.block_length(), 5);
        assert!(matches!(
            rational_to_block(&rf(&[0, 2], &[1]), DEFAULT_POLYA_CAP),
            Err(Error::InvalidRange(_))
        ));
    }

    #[test]
    fn infeasible_thresholds_rejected() {
        assert!(BlockSimulation::new(0, 1, u(&[1]), u(&[3])).is_err());
        assert!(BlockSimulation::new(0, 2, u(&[4]), u(&[3])).is_err());
        assert!(BlockSimulation::new(1, 0, u(&[0]), u(&[1])).is_err());
        assert!(BlockSimulation::new(0, 0, u(&[0]), u(&[0])).is_err());
    }

    #[test]
    fn compiled_automaton_extracts_same_function() {
        for f in [rf(&[1], &[3]), rf(&[0, 2, -2], &[1]), rf(&[1, -3, 3], &[2])] {
            let sim = rational_to_block(&f, DEFAULT_POLYA_CAP).unwrap();
            let a = validate(&sim.compile_to_automaton().unwrap()).unwrap();
            assert_eq!(extract_rational(&a).unwrap()[1], f);
        }
    }
}
