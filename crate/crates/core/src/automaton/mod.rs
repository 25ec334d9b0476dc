//! Finite coin automata.
//!
//! A machine reads input symbols until it enters a final state. Final states
//! are absorbing and carry an output label; the probability of each label as
//! a function of `p` is recovered exactly by [`extract_rational`].

mod builtin;
mod extract;

use std::collections::VecDeque;

pub use builtin::{builtin, BUILTIN_NAMES};
pub use extract::extract_rational;

use num_rational::BigRational;
use num_traits::One;

use crate::error::{Error, Result};
use crate::source::SymbolSource;

/// Default per-run input cap (2^32 symbols).
pub const DEFAULT_STEP_CAP: u64 = 1 << 32;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteCoinAutomaton {
    alphabet_size: usize,
    start: usize,
    delta: Vec<Vec<usize>>,
    outputs: Vec<Option<u32>>,
}

impl FiniteCoinAutomaton {
    /// Checks table shape, index ranges and that final states are absorbing.
    pub fn new(
        alphabet_size: usize,
        start: usize,
        delta: Vec<Vec<usize>>,
        outputs: Vec<Option<u32>>,
    ) -> Result<Self> {
        let n = delta.len();
        if n == 0 || alphabet_size == 0 {
            return Err(Error::Malformed("automaton needs states and letters".into()));
        }
        if outputs.len() != n {
            return Err(Error::Malformed(format!(
                "{} output entries for {n} states",
                outputs.len()
            )));
        }
        if start >= n {
            return Err(Error::Malformed(format!("start state {start} out of range")));
        }
        for (s, row) in delta.iter().enumerate() {
            if row.len() != alphabet_size {
                return Err(Error::Malformed(format!(
                    "state {s} has {} transitions",
                    row.len()
                )));
            }
            if let Some(&t) = row.iter().find(|&&t| t >= n) {
                return Err(Error::Malformed(format!("state {s} moves to missing state {t}")));
            }
            if outputs[s].is_some() && row.iter().any(|&t| t != s) {
                return Err(Error::Malformed(format!("final state {s} is not absorbing")));
            }
        }
        Ok(FiniteCoinAutomaton {
            alphabet_size,
            start,
            delta,
            outputs,
        })
    }

    pub fn state_count(&self) -> usize {
        self.delta.len()
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn delta(&self) -> &[Vec<usize>] {
        &self.delta
    }

    pub fn step(&self, state: usize, symbol: usize) -> usize {
        self.delta[state][symbol]
    }

    pub fn outputs(&self) -> &[Option<u32>] {
        &self.outputs
    }

    pub fn output(&self, state: usize) -> Option<u32> {
        self.outputs[state]
    }

    /// One more than the largest output label.
    pub fn label_count(&self) -> usize {
        self.outputs.iter().flatten().max().map_or(0, |&m| m as usize + 1)
    }
}

/// An automaton pruned to its reachable part, in which every state reaches
/// a final state. Such a machine halts with probability 1 for every `p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidatedAutomaton(FiniteCoinAutomaton);

impl ValidatedAutomaton {
    pub fn automaton(&self) -> &FiniteCoinAutomaton {
        &self.0
    }

    pub fn into_inner(self) -> FiniteCoinAutomaton {
        self.0
    }

    /// States that are not final.
    pub fn live_states(&self) -> usize {
        self.0.outputs.iter().filter(|o| o.is_none()).count()
    }
}

impl std::ops::Deref for ValidatedAutomaton {
    type Target = FiniteCoinAutomaton;
    fn deref(&self) -> &FiniteCoinAutomaton {
        &self.0
    }
}

/// Prune unreachable states (preserving relative order) and check that every
/// remaining state can reach a final state.
pub fn validate(a: &FiniteCoinAutomaton) -> Result<ValidatedAutomaton> {
    let n = a.state_count();
    let mut reachable = vec![false; n];
    let mut queue = VecDeque::from([a.start]);
    reachable[a.start] = true;
    while let Some(s) = queue.pop_front() {
        for &t in &a.delta[s] {
            if !reachable[t] {
                reachable[t] = true;
                queue.push_back(t);
            }
        }
    }

    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for s in (0..n).filter(|&s| reachable[s]) {
        for &t in &a.delta[s] {
            preds[t].push(s);
        }
    }
    let mut halts = vec![false; n];
    let mut queue: VecDeque<usize> = (0..n)
        .filter(|&s| reachable[s] && a.outputs[s].is_some())
        .collect();
    for &s in &queue {
        halts[s] = true;
    }
    while let Some(t) = queue.pop_front() {
        for &s in &preds[t] {
            if !halts[s] {
                halts[s] = true;
                queue.push_back(s);
            }
        }
    }
    if let Some(bad) = (0..n).find(|&s| reachable[s] && !halts[s]) {
        return Err(Error::NonHaltingState(bad));
    }

    let mut remap = vec![usize::MAX; n];
    let kept: Vec<usize> = (0..n).filter(|&s| reachable[s]).collect();
    for (new, &old) in kept.iter().enumerate() {
        remap[old] = new;
    }
    let delta = kept
        .iter()
        .map(|&s| a.delta[s].iter().map(|&t| remap[t]).collect())
        .collect();
    let outputs = kept.iter().map(|&s| a.outputs[s]).collect();
    Ok(ValidatedAutomaton(FiniteCoinAutomaton {
        alphabet_size: a.alphabet_size,
        start: remap[a.start],
        delta,
        outputs,
    }))
}

/// Result of one run: the output label and the number of symbols read.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunOutcome {
    pub label: u32,
    pub consumed: u64,
}

/// Feed symbols from `src` until a final state is entered.
pub fn run<S: SymbolSource + ?Sized>(
    a: &ValidatedAutomaton,
    src: &mut S,
    step_cap: u64,
) -> Result<RunOutcome> {
    let mut state = a.start;
    let mut consumed = 0u64;
    loop {
        if let Some(label) = a.outputs[state] {
            return Ok(RunOutcome { label, consumed });
        }
        if consumed >= step_cap {
            return Err(Error::StepCapExceeded(step_cap));
        }
        state = a.delta[state][src.next_symbol()];
        consumed += 1;
    }
}

/// Swap output labels 0 and 1, turning an `f`-coin into a `(1-f)`-coin.
pub fn relabel_complement(a: &FiniteCoinAutomaton) -> Result<FiniteCoinAutomaton> {
    if a.outputs.iter().flatten().any(|&l| l > 1) {
        return Err(Error::NotBinaryLabels);
    }
    let mut out = a.clone();
    for o in out.outputs.iter_mut().flatten() {
        *o = 1 - *o;
    }
    Ok(out)
}

/// A binary word together with its letter counts, the data that determines
/// its probability `p^ones (1-p)^zeros`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WordMeasure {
    word: Vec<u8>,
    ones: usize,
    zeros: usize,
}

impl WordMeasure {
    pub fn new(word: &[u8]) -> Self {
        let ones = word.iter().filter(|&&b| b == 1).count();
        WordMeasure {
            word: word.to_vec(),
            ones,
            zeros: word.len() - ones,
        }
    }

    pub fn word(&self) -> &[u8] {
        &self.word
    }

    pub fn ones(&self) -> usize {
        self.ones
    }

    pub fn zeros(&self) -> usize {
        self.zeros
    }

    pub fn probability(&self, p: &BigRational) -> BigRational {
        let q = BigRational::one() - p;
        num_traits::pow(p.clone(), self.ones) * num_traits::pow(q, self.zeros)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::ScriptedSource;

    #[test]
    fn von_neumann_is_valid() {
        let v = validate(&builtin("von_neumann").unwrap()).unwrap();
        assert_eq!(v.live_states(), 3);
        assert_eq!(v.state_count(), 5);
    }

    #[test]
    fn non_halting_loop_rejected() {
        let a = FiniteCoinAutomaton::new(
            2,
            0,
            vec![vec![1, 2], vec![1, 1], vec![2, 2]],
            vec![None, None, Some(1)],
        )
        .unwrap();
        assert_eq!(validate(&a), Err(Error::NonHaltingState(1)));
    }

    #[test]
    fn unreachable_states_pruned() {
        let sq = builtin("square").unwrap();
        let n = sq.state_count();
        let mut delta = sq.delta().to_vec();
        delta.insert(0, vec![0, 0]);
        for row in delta.iter_mut().skip(1) {
            for t in row.iter_mut() {
                *t += 1;
            }
        }
        // state 0 is a disconnected non-final loop
        let mut outputs = sq.outputs().to_vec();
        outputs.insert(0, None);
        let padded = FiniteCoinAutomaton::new(2, sq.start() + 1, delta, outputs).unwrap();
        let v = validate(&padded).unwrap();
        assert_eq!(v.state_count(), n);
        assert_eq!(v.automaton(), &sq);
    }

    #[test]
    fn malformed_rejected() {
        assert!(FiniteCoinAutomaton::new(2, 0, vec![vec![0, 1], vec![0, 1]], vec![None, Some(0)]).is_err());
        assert!(FiniteCoinAutomaton::new(2, 3, vec![vec![0, 0]], vec![None]).is_err());
        assert!(FiniteCoinAutomaton::new(2, 0, vec![vec![0, 5]], vec![None]).is_err());
    }

    #[test]
    fn scripted_runs() {
        let vn = validate(&builtin("von_neumann").unwrap()).unwrap();
        let out = run(&vn, &mut ScriptedSource::from_digits("01"), 100).unwrap();
        assert_eq!(
            out,
            RunOutcome {
                label: 0,
                consumed: 2
            }
        );
        let out = run(&vn, &mut ScriptedSource::from_digits("0010"), 100).unwrap();
        assert_eq!(
            out,
            RunOutcome {
                label: 1,
                consumed: 4
            }
        );

        let sq = validate(&builtin("square").unwrap()).unwrap();
        let out = run(&sq, &mut ScriptedSource::from_digits("11"), 100).unwrap();
        assert_eq!(
            out,
            RunOutcome {
                label: 1,
                consumed: 2
            }
        );
    }

    #[test]
    fn step_cap() {
        let vn = validate(&builtin("von_neumann").unwrap()).unwrap();
        let err = run(&vn, &mut ScriptedSource::from_digits("00"), 10).unwrap_err();
        assert_eq!(err, Error::StepCapExceeded(10));
    }

    #[test]
    fn complement_is_involution() {
        for name in BUILTIN_NAMES {
            let a = builtin(name).unwrap();
            let c = relabel_complement(&a).unwrap();
            assert_ne!(a, c);
            assert_eq!(relabel_complement(&c).unwrap(), a);
        }
    }

    #[test]
    fn word_measure() {
        let w = WordMeasure::new(&[1, 0, 1]);
        assert_eq!((w.ones(), w.zeros()), (2, 1));
        let p = BigRational::new(1.into(), 3.into());
        assert_eq!(w.probability(&p), BigRational::new(2.into(), 27.into()));
    }
}
