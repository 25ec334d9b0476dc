//! Block simulations over an `s`-letter alphabet with `t + 1` outputs.
//!
//! A [`DiceBlockSimulation`] is a chain of binary stages over an ordering
//! `o` of the outputs. Stage `j` simulates
//! `F_j = f_o(j) / (1 - f_o(0) - ... - f_o(j-1))` against its complement.
//! One block is the concatenation of one word per stage; the block is
//! discarded if any stage discards, otherwise the output is `o(j)` for the
//! first stage `j` that says 1, or `o(t)` if none does. Requiring every stage
//! to be non-discarded keeps the conditional law equal to
//! `prod_(i<j) (1 - F_i) F_j`.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::block::BlockOutcome;
use super::rank::{letter_counts, multinomial, multiset_rank};
use crate::error::{Error, Result};
use crate::ratfunc::{
    bernstein_from_rational, polya_multi_joint, simplex_grid, BernsteinPair, Monomial, MultiPoly,
    MultiRational, RationalFunction,
};
use crate::source::SymbolSource;

/// Largest number of words enumerated by the dice brute-force oracle.
pub const DICE_BRUTE_FORCE_MAX_WORDS: u64 = 1 << 20;

/// Per-histogram thresholds `(d, e)` of one stage.
pub type Thresholds = BTreeMap<Monomial, (BigUint, BigUint)>;

/// One binary stage: payload of `k` letters and a padding word in which
/// every letter appears exactly `r` times.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiceStage {
    alphabet: usize,
    k: usize,
    r: usize,
    thresholds: Thresholds,
}

impl DiceStage {
    pub fn new(alphabet: usize, k: usize, r: usize, thresholds: Thresholds) -> Result<Self> {
        if alphabet < 2 {
            return Err(Error::UnsupportedAlphabet(alphabet));
        }
        let pad = multinomial(&vec![r; alphabet]);
        for (alpha, (d, e)) in &thresholds {
            if alpha.len() != alphabet || alpha.iter().sum::<u32>() as usize != k {
                return Err(Error::Malformed(format!(
                    "histogram {alpha:?} does not match stage"
                )));
            }
            let counts: Vec<usize> = alpha.iter().map(|&a| a as usize).collect();
            if d > e || e > &(multinomial(&counts) * &pad) {
                return Err(Error::Malformed(format!(
                    "thresholds for histogram {alpha:?} are infeasible"
                )));
            }
        }
        if thresholds.values().all(|(_, e)| e.is_zero()) {
            return Err(Error::Malformed("stage never produces output".into()));
        }
        Ok(DiceStage {
            alphabet,
            k,
            r,
            thresholds,
        })
    }

    /// Binary stage from a Bernstein pair: histogram `(k - i, i)` carries `(d_i, e_i)`.
    pub fn from_bernstein(b: &BernsteinPair) -> Self {
        let k = b.degree();
        let mut coeffs = BTreeMap::new();
        for i in 0..=k {
            coeffs.insert(
                vec![(k - i) as u32, i as u32],
                (b.d()[i].clone(), b.e()[i].clone()),
            );
        }
        Self::with_minimal_padding(2, k, coeffs)
    }

    fn with_minimal_padding(alphabet: usize, k: usize, coeffs: BTreeMap<Monomial, (BigInt, BigInt)>) -> Self {
        let thresholds: Thresholds = coeffs
            .into_iter()
            .filter(|(_, (_, e))| !e.is_zero())
            .map(|(m, (d, e))| {
                (
                    m,
                    (
                        d.to_biguint().expect("nonnegative"),
                        e.to_biguint().expect("nonnegative"),
                    ),
                )
            })
            .collect();
        let mut r = 0;
        loop {
            let pad = multinomial(&vec![r; alphabet]);
            let fits = thresholds.iter().all(|(alpha, (_, e))| {
                let counts: Vec<usize> = alpha.iter().map(|&a| a as usize).collect();
                e <= &(multinomial(&counts) * &pad)
            });
            if fits {
                break;
            }
            r += 1;
        }
        DiceStage::new(alphabet, k, r, thresholds).expect("minimal padding is feasible")
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn thresholds(&self) -> &Thresholds {
        &self.thresholds
    }

    pub fn block_length(&self) -> usize {
        self.k + self.alphabet * self.r
    }

    pub fn classify(&self, word: &[u8]) -> Result<BlockOutcome> {
        if word.len() != self.block_length() {
            return Err(Error::LengthMismatch {
                expected: self.block_length(),
                got: word.len(),
            });
        }
        let (v, w) = word.split_at(self.k);
        if letter_counts(w, self.alphabet).iter().any(|&c| c != self.r) {
            return Ok(BlockOutcome::Discard);
        }
        let alpha: Monomial = letter_counts(v, self.alphabet)
            .into_iter()
            .map(|c| c as u32)
            .collect();
        let Some((d, e)) = self.thresholds.get(&alpha) else {
            return Ok(BlockOutcome::Discard);
        };
        let pad = multinomial(&vec![self.r; self.alphabet]);
        let b = multiset_rank(v, self.alphabet) * pad + multiset_rank(w, self.alphabet) + 1u32;
        Ok(if &b <= d {
            BlockOutcome::Out1
        } else if &b <= e {
            BlockOutcome::Out0
        } else {
            BlockOutcome::Discard
        })
    }

    /// Probability that the stage does not discard.
    pub fn acceptance_probability(&self, probs: &[f64]) -> f64 {
        let pad: f64 = probs.iter().map(|q| q.powi(self.r as i32)).product();
        let e: f64 = self
            .thresholds
            .iter()
            .map(|(alpha, (_, e))| {
                let mono: f64 = alpha.iter().zip(probs).map(|(&a, q)| q.powi(a as i32)).product();
                e.to_f64().unwrap_or(f64::INFINITY) * mono
            })
            .sum();
        e * pad
    }

    /// `sum d_alpha p^alpha / sum e_alpha p^alpha`.
    pub fn ratio(&self) -> MultiRational {
        let poly = |pick: fn(&(BigUint, BigUint)) -> &BigUint| {
            MultiPoly::from_terms(
                self.alphabet,
                self.thresholds
                    .iter()
                    .map(|(m, de)| (m.clone(), BigInt::from(pick(de).clone()))),
            )
        };
        MultiRational::new(poly(|de| &de.0), poly(|de| &de.1)).expect("some e > 0")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiceBlockSimulation {
    alphabet: usize,
    stages: Vec<DiceStage>,
    order: Vec<usize>,
}

impl DiceBlockSimulation {
    pub fn new(alphabet: usize, stages: Vec<DiceStage>) -> Result<Self> {
        let order = (0..=stages.len()).collect();
        Self::with_order(alphabet, stages, order)
    }

    /// `order[j]` is the output emitted when stage `j` is the first to say 1;
    /// the last entry is emitted when no stage does.
    pub fn with_order(alphabet: usize, stages: Vec<DiceStage>, order: Vec<usize>) -> Result<Self> {
        let mut sorted = order.clone();
        sorted.sort_unstable();
        if sorted != (0..=stages.len()).collect::<Vec<_>>() {
            return Err(Error::Malformed(
                "stage order is not a permutation of the outputs".into(),
            ));
        }
        if stages.is_empty() {
            return Err(Error::Malformed(
                "dice simulation needs at least one stage".into(),
            ));
        }
        if stages.iter().any(|s| s.alphabet != alphabet) {
            return Err(Error::AlphabetMismatch("stages over different alphabets".into()));
        }
        Ok(DiceBlockSimulation {
            alphabet,
            stages,
            order,
        })
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet
    }

    pub fn outputs(&self) -> usize {
        self.stages.len() + 1
    }

    pub fn stages(&self) -> &[DiceStage] {
        &self.stages
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Probability that one block is not discarded.
    pub fn acceptance_probability(&self, probs: &[f64]) -> f64 {
        self.stages
            .iter()
            .map(|s| s.acceptance_probability(probs))
            .product()
    }

    /// Expected number of symbols per output at the given letter law.
    pub fn expected_symbols(&self, probs: &[f64]) -> f64 {
        self.block_length() as f64 / self.acceptance_probability(probs)
    }

    pub fn block_length(&self) -> usize {
        self.stages.iter().map(DiceStage::block_length).sum()
    }

    /// Output label of one block, `None` for discard.
    pub fn classify(&self, word: &[u8]) -> Result<Option<usize>> {
        if word.len() != self.block_length() {
            return Err(Error::LengthMismatch {
                expected: self.block_length(),
                got: word.len(),
            });
        }
        let mut first = None;
        let mut offset = 0;
        for (j, stage) in self.stages.iter().enumerate() {
            let part = &word[offset..offset + stage.block_length()];
            offset += stage.block_length();
            match stage.classify(part)? {
                BlockOutcome::Discard => return Ok(None),
                BlockOutcome::Out1 => {
                    first.get_or_insert(j);
                }
                BlockOutcome::Out0 => {}
            }
        }
        Ok(Some(self.order[first.unwrap_or(self.stages.len())]))
    }

    /// Per-output probabilities from the stage ratios.
    pub fn exact_distribution(&self) -> Vec<MultiRational> {
        let mut out = vec![MultiRational::one(self.alphabet); self.outputs()];
        let mut rest = MultiRational::one(self.alphabet);
        for (stage, &label) in self.stages.iter().zip(&self.order) {
            let f = stage.ratio();
            out[label] = rest.mul(&f);
            rest = rest.mul(&MultiRational::one(self.alphabet).sub(&f));
        }
        out[self.order[self.stages.len()]] = rest;
        out
    }

    /// Canonical univariate distributions; binary alphabets only.
    pub fn exact_distribution_univariate(&self) -> Result<Vec<RationalFunction>> {
        self.exact_distribution()
            .iter()
            .map(MultiRational::to_univariate)
            .collect()
    }

    /// Enumerate every block and sum monomial measures per output.
    pub fn brute_force_distribution(&self) -> Result<Vec<MultiRational>> {
        let len = self.block_length();
        let s = self.alphabet as u64;
        let total = s
            .checked_pow(len as u32)
            .filter(|&n| n <= DICE_BRUTE_FORCE_MAX_WORDS)
            .ok_or_else(|| Error::TooLarge(format!("{s}^{len} words for enumeration")))?;
        let mut per_label: Vec<BTreeMap<Monomial, BigInt>> = vec![BTreeMap::new(); self.outputs()];
        let mut word = vec![0u8; len];
        for x in 0..total {
            let mut y = x;
            for c in word.iter_mut() {
                *c = (y % s) as u8;
                y /= s;
            }
            if let Some(label) = self.classify(&word)? {
                let alpha: Monomial = letter_counts(&word, self.alphabet)
                    .into_iter()
                    .map(|c| c as u32)
                    .collect();
                *per_label[label].entry(alpha).or_insert_with(BigInt::zero) += 1;
            }
        }
        let polys: Vec<MultiPoly> = per_label
            .into_iter()
            .map(|terms| MultiPoly::from_terms(self.alphabet, terms))
            .collect();
        let total_mass = polys
            .iter()
            .fold(MultiPoly::zero(self.alphabet), |acc, p| acc.add(p));
        polys
            .into_iter()
            .map(|p| MultiRational::new(p, total_mass.clone()))
            .collect()
    }

    pub fn run<S: SymbolSource + ?Sized>(&self, src: &mut S, step_cap: u64) -> Result<DiceRun> {
        let len = self.block_length();
        let mut buf = vec![0u8; len];
        let mut consumed = 0u64;
        loop {
            if consumed + len as u64 > step_cap {
                return Err(Error::StepCapExceeded(step_cap));
            }
            for c in buf.iter_mut() {
                *c = src.next_symbol() as u8;
            }
            consumed += len as u64;
            if let Some(label) = self.classify(&buf)? {
                return Ok(DiceRun { label, consumed });
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DiceRun {
    pub label: usize,
    pub consumed: u64,
}

/// Largest output count for which every stage order is tried.
const ORDER_SEARCH_MAX_OUTPUTS: usize = 5;

/// Block simulation for the probability vector `fs` over the simplex of
/// `fs[0].nvars()` letters. For up to five outputs every stage order is
/// built and the one with the fewest expected symbols per output at the
/// barycenter is kept.
pub fn dice_rational_to_block(fs: &[MultiRational], cap: usize) -> Result<DiceBlockSimulation> {
    if fs.len() < 2 {
        return Err(Error::NotAProbabilityVector);
    }
    let s = fs[0].nvars();
    if fs.iter().any(|f| f.nvars() != s) {
        return Err(Error::AlphabetMismatch(
            "functions over different simplices".into(),
        ));
    }
    let sum = fs[1..].iter().fold(fs[0].clone(), |acc, f| acc.add(f));
    if !sum.equal_on_simplex(&MultiRational::one(s)) {
        return Err(Error::NotAProbabilityVector);
    }
    let identity: Vec<usize> = (0..fs.len()).collect();
    if fs.len() > ORDER_SEARCH_MAX_OUTPUTS {
        return build_chain(fs, identity, cap);
    }
    let center = vec![1.0 / s as f64; s];
    let mut best: Option<(f64, DiceBlockSimulation)> = None;
    let mut first_err = None;
    for order in permutations(fs.len()) {
        match build_chain(fs, order, cap) {
            Ok(sim) => {
                let cost = sim.expected_symbols(&center);
                if best.as_ref().is_none_or(|(c, _)| cost < *c) {
                    best = Some((cost, sim));
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    best.map(|(_, sim)| sim)
        .ok_or_else(|| first_err.expect("at least one order was tried"))
}

fn build_chain(fs: &[MultiRational], order: Vec<usize>, cap: usize) -> Result<DiceBlockSimulation> {
    let s = fs[0].nvars();
    let mut stages = Vec::with_capacity(fs.len() - 1);
    let mut rest = MultiRational::one(s);
    for &j in &order[..fs.len() - 1] {
        let target = fs[j]
            .div(&rest)
            .map_err(|_| Error::InvalidRange("an earlier output has probability 1".into()))?;
        stages.push(stage_for(&target, cap)?);
        rest = rest.sub(&fs[j]);
    }
    DiceBlockSimulation::with_order(s, stages, order)
}

/// All permutations of `0..n` in lexicographic order.
fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..n).collect();
    loop {
        out.push(current.clone());
        let Some(i) = (1..n).rev().find(|&i| current[i - 1] < current[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| current[j] > current[i - 1]).unwrap();
        current.swap(i - 1, j);
        current[i..].reverse();
    }
}

/// Univariate convenience: each `f` is a function of `p`, letter 1 has probability `p`.
pub fn dice_from_univariate(fs: &[RationalFunction], cap: usize) -> Result<DiceBlockSimulation> {
    let lifted: Vec<MultiRational> = fs.iter().map(MultiRational::from_univariate).collect();
    dice_rational_to_block(&lifted, cap)
}

fn stage_for(target: &MultiRational, cap: usize) -> Result<DiceStage> {
    if target.nvars() == 2 {
        let f = target.to_univariate()?;
        return Ok(DiceStage::from_bernstein(&bernstein_from_rational(&f, cap)?));
    }
    let s = target.nvars();
    for pt in simplex_grid(s, 10) {
        let v = target
            .eval(&pt)
            .map_err(|_| Error::InvalidRange("denominator vanishes on the simplex".into()))?;
        if !v.is_positive() || v >= BigRational::one() {
            return Err(Error::InvalidRange(format!(
                "value {v} outside (0,1) on the simplex"
            )));
        }
    }
    let center = vec![BigRational::new(BigInt::one(), BigInt::from(s)); s];
    let (mut num, mut den) = (target.num().clone(), target.den().clone());
    if den.eval(&center).is_negative() {
        num = num.neg();
        den = den.neg();
    }
    let k = num.degree().unwrap_or(0).max(den.degree().unwrap_or(0));
    let d = num.homogenize_to(k);
    let e = den.homogenize_to(k);
    let gap = e.sub(&d);
    let (_, shifted) = polya_multi_joint(&[d, e, gap], cap).map_err(|err| match err {
        Error::ZeroPolynomial => Error::InvalidRange("stage function is identically 0 or 1".into()),
        other => other,
    })?;
    let degree = shifted[1].degree().unwrap_or(0) as usize;
    let mut coeffs: BTreeMap<Monomial, (BigInt, BigInt)> = BTreeMap::new();
    for (m, c) in shifted[1].terms() {
        coeffs.insert(m.clone(), (shifted[0].coeff(m), c.clone()));
    }
    Ok(DiceStage::with_minimal_padding(s, degree, coeffs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratfunc::{IntPolynomial, DEFAULT_POLYA_CAP};
    use crate::source::ScriptedSource;

    fn rf(num: &[i64], den: &[i64]) -> RationalFunction {
        RationalFunction::new(IntPolynomial::from_i64s(num), IntPolynomial::from_i64s(den)).unwrap()
    }

    #[test]
    fn identity_dice() {
        let p = RationalFunction::var();
        let sim = dice_from_univariate(&[p.clone(), p.complement()], DEFAULT_POLYA_CAP).unwrap();
        assert_eq!(sim.block_length(), 1);
        assert_eq!(
            sim.exact_distribution_univariate().unwrap(),
            vec![p.clone(), p.complement()]
        );
        assert_eq!(sim.classify(&[1]).unwrap(), Some(0));
        assert_eq!(sim.classify(&[0]).unwrap(), Some(1));
    }

    #[test]
    fn ladder_symbol_distribution() {
        // g = (1-p)/2, outputs (g, 1-2g, g)
        let g = rf(&[1, -1], &[2]);
        let mid = RationalFunction::one().sub(&g.scale(&BigInt::from(2)));
        let fs = [g.clone(), mid.clone(), g.clone()];
        let sim = dice_from_univariate(&fs, DEFAULT_POLYA_CAP).unwrap();
        assert_eq!(sim.outputs(), 3);
        // the middle output is exactly p, so its stage goes first and needs no padding
        assert_eq!(sim.order()[0], 1);
        assert_eq!(sim.block_length(), 3);
        assert_eq!(sim.exact_distribution_univariate().unwrap(), fs.to_vec());
        let brute: Vec<RationalFunction> = sim
            .brute_force_distribution()
            .unwrap()
            .iter()
            .map(|f| f.to_univariate().unwrap())
            .collect();
        assert_eq!(brute, fs.to_vec());
    }

    #[test]
    fn fixed_order_matches_target() {
        let g = rf(&[1, -1], &[2]);
        let mid = RationalFunction::one().sub(&g.scale(&BigInt::from(2)));
        let fs: Vec<MultiRational> = [&g, &mid, &g].map(MultiRational::from_univariate).to_vec();
        for order in permutations(3) {
            let sim = build_chain(&fs, order, DEFAULT_POLYA_CAP).unwrap();
            let exact = sim.exact_distribution();
            for (a, b) in exact.iter().zip(&fs) {
                assert!(a.equal_on_simplex(b));
            }
        }
        assert_eq!(permutations(3).len(), 6);
    }

    #[test]
    fn not_a_probability_vector() {
        let p = RationalFunction::var();
        assert_eq!(
            dice_from_univariate(&[p.clone(), p.clone()], 10).unwrap_err(),
            Error::NotAProbabilityVector
        );
        assert_eq!(
            dice_from_univariate(&[p], 10).unwrap_err(),
            Error::NotAProbabilityVector
        );
    }

    #[test]
    fn three_letter_pair() {
        // f = p0 p1 + p2^2 on the 3-simplex, paired with 1 - f
        let f = MultiPoly::var(3, 0)
            .mul(&MultiPoly::var(3, 1))
            .add(&MultiPoly::var(3, 2).pow(2));
        let f = MultiRational::new(f, MultiPoly::one(3)).unwrap();
        let g = MultiRational::one(3).sub(&f);
        let sim = dice_rational_to_block(&[f.clone(), g.clone()], DEFAULT_POLYA_CAP).unwrap();
        let exact = sim.exact_distribution();
        assert!(exact[0].equal_on_simplex(&f));
        assert!(exact[1].equal_on_simplex(&g));
        let brute = sim.brute_force_distribution().unwrap();
        for pt in [
            [1, 1, 1].map(|x| BigRational::new(x.into(), 3.into())),
            [1, 2, 3].map(|x| BigRational::new(x.into(), 6.into())),
            [5, 1, 4].map(|x| BigRational::new(x.into(), 10.into())),
        ] {
            assert_eq!(brute[0].eval(&pt).unwrap(), f.eval(&pt).unwrap());
            assert_eq!(brute[1].eval(&pt).unwrap(), g.eval(&pt).unwrap());
        }
    }

    #[test]
    fn scripted_dice_run() {
        let g = rf(&[1, -1], &[2]);
        let mid = RationalFunction::one().sub(&g.scale(&BigInt::from(2)));
        let sim = dice_from_univariate(&[g.clone(), mid, g], DEFAULT_POLYA_CAP).unwrap();
        // the second stage discards unless its two-letter pad is balanced
        let mut src = ScriptedSource::from_digits("100");
        assert_eq!(sim.run(&mut src, 12).unwrap_err(), Error::StepCapExceeded(12));
        assert_eq!(sim.classify(&[1, 1, 0]).unwrap(), Some(1));
        assert_eq!(sim.classify(&[1, 0, 1]).unwrap(), Some(1));
        let (a, b) = (sim.order()[1], sim.order()[2]);
        assert_eq!(sim.classify(&[0, 1, 0]).unwrap(), Some(a));
        assert_eq!(sim.classify(&[0, 0, 1]).unwrap(), Some(b));
        // every run consumes whole blocks
        let mut src = crate::source::BitSource::new(3, 0.4);
        for _ in 0..200 {
            let out = sim.run(&mut src, 1 << 20).unwrap();
            assert_eq!(out.consumed % 3, 0);
            assert!(out.label < 3);
        }
    }
}
