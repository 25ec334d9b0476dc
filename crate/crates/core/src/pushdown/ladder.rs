//! The ladder walk and the machines built from it.
//!
//! The ladder machine reads symbols from `{0, 1, 2}`: 0 pops, 1 moves to the
//! other rung side, 2 pushes. Started on the left with one `x` on the stack,
//! it halts on the left with probability `gamma`, the least root of
//! `2 g gamma^2 - 2 gamma + 1 = 0` when the symbol law is `(g, 1-2g, g)`.

use num_bigint::BigInt;

use super::machine::{PushdownCoinAutomaton, Transition};
use crate::blocks::{dice_from_univariate, DiceBlockSimulation};
use crate::error::{Error, Result};
use crate::ratfunc::{bernstein_from_rational, IntPolynomial, RationalFunction, DEFAULT_POLYA_CAP};

pub const LADDER_LEFT: usize = 0;
pub const LADDER_RIGHT: usize = 1;

/// Largest product machine built by [`compose_with_block`].
pub const COMPOSE_MAX_STATES: usize = 1 << 20;

/// The three-letter ladder machine; left is labelled 1, right 0.
pub fn ladder_machine() -> PushdownCoinAutomaton {
    let mut t = Vec::with_capacity(6);
    for side in [LADDER_LEFT, LADDER_RIGHT] {
        t.push(Transition::pop(side));
        t.push(Transition::new(1 - side, vec![0]));
        t.push(Transition::new(side, vec![0, 0]));
    }
    PushdownCoinAutomaton::new(
        3,
        vec!["x".into()],
        LADDER_LEFT,
        vec![0],
        t,
        vec![Some(1), Some(0)],
    )
    .expect("ladder machine is well formed")
}

/// `(1 - sqrt(1 - 2g)) / 2g`.
pub fn gamma_closed_form(g: f64) -> f64 {
    (1.0 - (1.0 - 2.0 * g).sqrt()) / (2.0 * g)
}

/// Ladder machine paired with the rational `g` driving its symbol law.
#[derive(Clone, Debug, PartialEq)]
pub struct Ladder {
    machine: PushdownCoinAutomaton,
    g: RationalFunction,
}

impl Ladder {
    pub fn machine(&self) -> &PushdownCoinAutomaton {
        &self.machine
    }

    pub fn g(&self) -> &RationalFunction {
        &self.g
    }

    /// `(g, 1 - 2g, g)` as rational functions.
    pub fn distribution(&self) -> [RationalFunction; 3] {
        let mid = RationalFunction::one().sub(&self.g.scale(&BigInt::from(2)));
        [self.g.clone(), mid, self.g.clone()]
    }

    pub fn symbol_distribution(&self, p: f64) -> [f64; 3] {
        let g = self.g.eval_f64(p);
        [g, 1.0 - 2.0 * g, g]
    }

    pub fn gamma(&self, p: f64) -> f64 {
        gamma_closed_form(self.g.eval_f64(p))
    }

    /// Binary-input machine: `(g, 1-2g, g)` symbols are produced by a dice
    /// block simulation and fed to the ladder.
    pub fn compose(&self) -> Result<PushdownCoinAutomaton> {
        let dice = dice_from_univariate(&self.distribution(), DEFAULT_POLYA_CAP)?;
        compose_with_block(&dice, &self.machine)
    }
}

/// Ladder for `g` mapping `(0,1)` into `(0, 1/2)`.
pub fn build_ladder_pda(g: &RationalFunction) -> Result<Ladder> {
    bernstein_from_rational(g, DEFAULT_POLYA_CAP)?;
    let mid = RationalFunction::one().sub(&g.scale(&BigInt::from(2)));
    bernstein_from_rational(&mid, DEFAULT_POLYA_CAP).map_err(|e| match e {
        Error::InvalidRange(msg) => Error::InvalidRange(format!("1-2g: {msg}")),
        other => other,
    })?;
    Ok(Ladder {
        machine: ladder_machine(),
        g: g.clone(),
    })
}

/// Product of a block reader and a machine over the block's outputs. States
/// are `(machine state, prefix of the current block)`; when a block
/// completes without being discarded, its output is fed to `m`.
pub fn compose_with_block(
    dice: &DiceBlockSimulation,
    m: &PushdownCoinAutomaton,
) -> Result<PushdownCoinAutomaton> {
    if dice.outputs() != m.input_alphabet_size() {
        return Err(Error::AlphabetMismatch(format!(
            "block has {} outputs, machine reads {} symbols",
            dice.outputs(),
            m.input_alphabet_size()
        )));
    }
    let s = dice.alphabet_size();
    let len = dice.block_length();
    let too_large = || Error::TooLarge(format!("product of a length-{len} block reader"));
    let words = (s as u64).checked_pow(len as u32).ok_or_else(too_large)? as usize;
    let nodes = (words - 1) / (s - 1);
    let state_count = nodes.checked_mul(m.state_count()).ok_or_else(too_large)?;
    if len == 0 || state_count > COMPOSE_MAX_STATES {
        return Err(too_large());
    }

    // offset of each depth in the prefix tree, and letter weights
    let mut offset = vec![0usize; len];
    let mut weight = vec![1usize; len];
    for d in 1..len {
        offset[d] = offset[d - 1] + weight[d - 1];
        weight[d] = weight[d - 1] * s;
    }
    let mut word = vec![0u8; len];
    let mut table = Vec::with_capacity(words);
    for value in 0..words {
        let mut y = value;
        for c in word.iter_mut() {
            *c = (y % s) as u8;
            y /= s;
        }
        table.push(dice.classify(&word)?);
    }

    let stack_size = m.stack_size();
    let mut transitions = Vec::with_capacity(state_count * s * stack_size);
    let mut finals = vec![None; state_count];
    for q in 0..m.state_count() {
        finals[q * nodes] = m.final_label(q);
        for d in 0..len {
            for v in 0..weight[d] {
                for a in 0..s {
                    for b in 0..stack_size {
                        let prefix = v + a * weight[d];
                        let tr = if d + 1 < len {
                            Transition::new(q * nodes + offset[d + 1] + prefix, vec![b])
                        } else {
                            match table[prefix] {
                                None => Transition::new(q * nodes, vec![b]),
                                Some(sym) => {
                                    let inner = m.transition(q, sym, b);
                                    Transition::new(inner.next * nodes, inner.push.clone())
                                }
                            }
                        };
                        transitions.push(tr);
                    }
                }
            }
        }
    }
    PushdownCoinAutomaton::new(
        s,
        m.stack_alphabet().to_vec(),
        m.start() * nodes,
        m.initial_stack().to_vec(),
        transitions,
        finals,
    )
}

fn half_complement() -> RationalFunction {
    RationalFunction::new(IntPolynomial::one_minus_var(), IntPolynomial::from_i64s(&[2]))
        .expect("nonzero denominator")
}

/// Binary machine whose value is `gamma(p) = (1 - sqrt(p)) / (1 - p)`,
/// the ladder driven by `g = (1-p)/2`.
pub fn build_gamma_pda() -> PushdownCoinAutomaton {
    build_ladder_pda(&half_complement())
        .and_then(|l| l.compose())
        .expect("g = (1-p)/2 is a valid ladder law")
}

/// Binary machine with value `sqrt(p)` built on [`build_gamma_pda`].
pub fn build_sqrt_pda() -> PushdownCoinAutomaton {
    sqrt_from_gamma(&build_gamma_pda())
}

/// Read one bit, output 1 on a 1, otherwise run `gamma` and output the
/// complement of its label: `p + (1-p)(1 - gamma)`.
pub fn sqrt_from_gamma(gamma: &PushdownCoinAutomaton) -> PushdownCoinAutomaton {
    let inner = gamma.complement();
    let n = inner.state_count();
    let stack_size = inner.stack_size();
    let (wrap, yes) = (0, n + 1);
    let mut transitions = Vec::with_capacity((n + 2) * 2 * stack_size);
    for b in 0..stack_size {
        transitions.push(Transition::new(1 + inner.start(), vec![b]));
    }
    for _ in 0..stack_size {
        transitions.push(Transition::pop(yes));
    }
    for q in 0..n {
        for a in 0..2 {
            for b in 0..stack_size {
                let t = inner.transition(q, a, b);
                transitions.push(Transition::new(t.next + 1, t.push.clone()));
            }
        }
    }
    for _ in 0..2 {
        for b in 0..stack_size {
            transitions.push(Transition::new(yes, vec![b]));
        }
    }
    let mut finals = vec![None];
    finals.extend_from_slice(inner.finals());
    finals.push(Some(1));
    PushdownCoinAutomaton::new(
        2,
        inner.stack_alphabet().to_vec(),
        wrap,
        inner.initial_stack().to_vec(),
        transitions,
        finals,
    )
    .expect("wrapper is well formed")
}

/// Binary ladder machine with down 1/4, side 3/8 and up 3/8: the walk is
/// transient and the machine fails to halt with positive probability.
pub fn build_transient_ladder_pda() -> PushdownCoinAutomaton {
    let fs = [(1, 4), (3, 8), (3, 8)].map(|(n, d)| RationalFunction::from_ints(n, d));
    let dice = dice_from_univariate(&fs, DEFAULT_POLYA_CAP).expect("constant law");
    compose_with_block(&dice, &ladder_machine()).expect("alphabets match")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pushdown::alpha::{alpha_fixed_point, pda_value, pda_value_with_distribution, AlphaOptions};
    use crate::pushdown::machine::pda_run;
    use crate::source::{DieSource, ScriptedSource};

    #[test]
    fn constant_ladders() {
        let opts = AlphaOptions::default();
        for (g, want) in [(0.25, 2.0 - 2f64.sqrt()), (0.375, 2.0 / 3.0)] {
            let v = pda_value_with_distribution(&ladder_machine(), &[g, 1.0 - 2.0 * g, g], &opts).unwrap();
            assert!((v.value - want).abs() < 1e-9, "g={g}: {}", v.value);
            assert!((gamma_closed_form(g) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn ladder_range_checks() {
        assert!(build_ladder_pda(&half_complement()).is_ok());
        let bad = RationalFunction::from_ints(1, 2);
        assert!(matches!(build_ladder_pda(&bad), Err(Error::InvalidRange(_))));
        let bad = RationalFunction::var();
        assert!(matches!(build_ladder_pda(&bad), Err(Error::InvalidRange(_))));
    }

    #[test]
    fn gamma_machine_value() {
        let m = build_gamma_pda();
        for p in [0.25, 4.0 / 9.0, 0.5] {
            let v = pda_value(&m, p, &AlphaOptions::default()).unwrap();
            let want = (1.0 - f64::sqrt(p)) / (1.0 - p);
            assert!((v.value - want).abs() < 1e-9, "p={p}: {} vs {want}", v.value);
        }
    }

    #[test]
    fn sqrt_machine_value() {
        let m = build_sqrt_pda();
        for p in [0.25, 0.81] {
            let v = pda_value(&m, p, &AlphaOptions::default()).unwrap();
            assert!((v.value - p.sqrt()).abs() < 1e-9);
        }
        let mut src = ScriptedSource::from_digits("1");
        let out = pda_run(&m, &mut src, 10).unwrap();
        assert_eq!((out.label, out.consumed), (1, 1));
    }

    #[test]
    fn transient_variant_is_refused() {
        let m = build_transient_ladder_pda();
        let err = pda_value(&m, 0.5, &AlphaOptions::default()).unwrap_err();
        match err {
            Error::NotAlmostSurelyHalting { sum, .. } => assert!(sum < 2.0 / 3.0 + 1e-9, "{sum}"),
            other => panic!("unexpected {other:?}"),
        }
        // from a block boundary the walk returns with probability down/up = 2/3
        let sys = alpha_fixed_point(&m, &[0.5, 0.5], &AlphaOptions::default()).unwrap();
        let g = sys.goodness(0, m.start()).unwrap();
        assert!((g - 2.0 / 3.0).abs() < 1e-9, "{g}");
    }

    #[test]
    fn composed_consumption_is_whole_blocks() {
        let m = build_gamma_pda();
        let mut src = crate::source::BitSource::new(5, 0.5);
        let mut halted = 0;
        for _ in 0..200 {
            if let Ok(out) = pda_run(&m, &mut src, 1 << 16) {
                assert_eq!(out.consumed % 3, 0);
                halted += 1;
            }
        }
        assert!(halted > 150);
    }

    #[test]
    fn three_letter_run() {
        // push, side step, pop, pop: ends on the right
        let mut src = ScriptedSource::from_digits("2100");
        let out = pda_run(&ladder_machine(), &mut src, 10).unwrap();
        assert_eq!((out.label, out.consumed), (0, 4));
        let mut die = DieSource::for_trial(1, 0, &[0.25, 0.5, 0.25]);
        assert!(pda_run(&ladder_machine(), &mut die, 1 << 20).is_ok());
    }
}
