//! Input streams for the simulations: i.i.d. biased bits, biased dice and
//! scripted sequences.
//!
//! Seeded sources use xoshiro256++ keyed by a SplitMix64 hash of
//! `(seed, trial)`, so the generator for trial `i` under seed `s` is a pure
//! function of `(s, i)`.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::{SplitMix64, Xoshiro256PlusPlus};

/// A stream of input symbols with consumption accounting.
pub trait SymbolSource {
    fn next_symbol(&mut self) -> usize;

    /// Symbols drawn so far.
    fn consumed(&self) -> u64;
}

const UNIT: f64 = 1.0 / (1u64 << 53) as f64;

type Rng = Xoshiro256PlusPlus;

#[inline]
fn uniform53(rng: &mut Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * UNIT
}

fn keyed_rng(seed: u64, trial: u64) -> Rng {
    let key = SplitMix64::seed_from_u64(seed).next_u64() ^ trial;
    let key = SplitMix64::seed_from_u64(key).next_u64();
    Rng::seed_from_u64(key)
}

/// Independent tosses of a `p`-coin: each bit is 1 iff the next 53-bit
/// uniform is below `p`.
#[derive(Clone, Debug)]
pub struct BitSource {
    rng: Rng,
    bias: f64,
    /// `u * 2^-53 < bias` iff `u < threshold` for integers `u < 2^53`.
    threshold: u64,
    consumed: u64,
}

impl BitSource {
    pub fn new(seed: u64, bias: f64) -> Self {
        Self::for_trial(seed, 0, bias)
    }

    /// Generator keyed by `(seed, trial)`.
    pub fn for_trial(seed: u64, trial: u64, bias: f64) -> Self {
        assert!(bias > 0.0 && bias < 1.0, "bias must lie in (0,1), got {bias}");
        BitSource {
            rng: keyed_rng(seed, trial),
            bias,
            threshold: (bias * (1u64 << 53) as f64).ceil() as u64,
            consumed: 0,
        }
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    #[inline]
    pub fn next_bit(&mut self) -> u8 {
        self.consumed += 1;
        u8::from((self.rng.next_u64() >> 11) < self.threshold)
    }
}

impl SymbolSource for BitSource {
    #[inline]
    fn next_symbol(&mut self) -> usize {
        self.next_bit() as usize
    }

    fn consumed(&self) -> u64 {
        self.consumed
    }
}

/// Independent rolls of a die with the given face probabilities.
#[derive(Clone, Debug)]
pub struct DieSource {
    rng: Rng,
    cumulative: Vec<f64>,
    consumed: u64,
}

impl DieSource {
    pub fn for_trial(seed: u64, trial: u64, probs: &[f64]) -> Self {
        assert!(!probs.is_empty() && probs.iter().all(|&x| x >= 0.0));
        let total: f64 = probs.iter().sum();
        assert!((total - 1.0).abs() < 1e-9, "face probabilities sum to {total}");
        let cumulative = probs
            .iter()
            .scan(0.0, |acc, &x| {
                *acc += x;
                Some(*acc)
            })
            .collect();
        DieSource {
            rng: keyed_rng(seed, trial),
            cumulative,
            consumed: 0,
        }
    }
}

impl SymbolSource for DieSource {
    fn next_symbol(&mut self) -> usize {
        self.consumed += 1;
        let u = uniform53(&mut self.rng);
        self.cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.cumulative.len() - 1)
    }

    fn consumed(&self) -> u64 {
        self.consumed
    }
}

/// Replays a fixed symbol sequence, cycling when exhausted.
#[derive(Clone, Debug)]
pub struct ScriptedSource {
    script: Vec<usize>,
    consumed: u64,
}

impl ScriptedSource {
    pub fn new(script: impl Into<Vec<usize>>) -> Self {
        let script = script.into();
        assert!(!script.is_empty(), "empty script");
        ScriptedSource { script, consumed: 0 }
    }

    /// From a string of digits, e.g. `"0010"`.
    pub fn from_digits(digits: &str) -> Self {
        Self::new(
            digits
                .chars()
                .map(|c| c.to_digit(10).expect("digit") as usize)
                .collect::<Vec<_>>(),
        )
    }
}

impl SymbolSource for ScriptedSource {
    fn next_symbol(&mut self) -> usize {
        let s = self.script[(self.consumed % self.script.len() as u64) as usize];
        self.consumed += 1;
        s
    }

    fn consumed(&self) -> u64 {
        self.consumed
    }
}
