//! Seeded Monte Carlo harness. Trial `i` draws its bits from a generator
//! keyed by `(seed, i)` and all tallies are integers, so a report depends
//! only on the configuration.

use serde::Serialize;

use crate::automaton::{self, validate, DEFAULT_STEP_CAP};
use crate::document::Machine;
use crate::error::{Error, Result};
use crate::pushdown::{pda_run, DEFAULT_PDA_STEP_CAP};
use crate::source::BitSource;

#[derive(Clone, Debug, PartialEq)]
pub struct MonteCarloConfig {
    pub p: f64,
    pub n: u64,
    pub seed: u64,
    /// Per-trial input cap; `None` picks the machine kind's default.
    pub step_cap: Option<u64>,
    /// Exact value of `P[label]` to test against.
    pub target: Option<f64>,
    /// Output counted as a success.
    pub label: u32,
}

impl MonteCarloConfig {
    pub fn new(p: f64, n: u64, seed: u64) -> Self {
        MonteCarloConfig {
            p,
            n,
            seed,
            step_cap: None,
            target: None,
            label: 1,
        }
    }

    pub fn with_target(mut self, target: f64) -> Self {
        self.target = Some(target);
        self
    }
}

/// Agreement threshold, in standard errors of the target.
pub const Z_TOLERANCE: f64 = 4.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonteCarloReport {
    pub machine: String,
    pub p: f64,
    pub seed: u64,
    pub label: u32,
    pub n_requested: u64,
    /// Trials that produced an output.
    pub n_trials: u64,
    pub successes: u64,
    /// `successes / n_trials`; absent when nothing halted.
    pub estimate: Option<f64>,
    pub standard_error: Option<f64>,
    pub target: Option<f64>,
    /// `(estimate - target) / sqrt(target (1 - target) / n_trials)`.
    pub z_score: Option<f64>,
    /// Whether `|z_score| <= 4`.
    pub within_tolerance: Option<bool>,
    /// Over halted trials.
    pub mean_bits_consumed: Option<f64>,
    pub did_not_halt: u64,
    pub did_not_halt_rate: f64,
    pub step_cap: u64,
}

impl MonteCarloReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }
}

/// Run `cfg.n` independent trials of `machine` on a `cfg.p`-coin.
pub fn simulate(machine: &Machine, cfg: &MonteCarloConfig) -> Result<MonteCarloReport> {
    if !(cfg.p > 0.0 && cfg.p < 1.0) {
        return Err(Error::InvalidRange(format!("bias {} is not in (0,1)", cfg.p)));
    }
    if cfg.n == 0 {
        return Err(Error::InvalidRange("trial count must be positive".into()));
    }
    if let Some(t) = cfg.target {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidRange(format!("target {t} is not a probability")));
        }
    }
    let cap = cfg.step_cap.unwrap_or(match machine {
        Machine::Pushdown(_) => DEFAULT_PDA_STEP_CAP,
        _ => DEFAULT_STEP_CAP,
    });
    let binary = |inputs: usize| {
        if inputs == 2 {
            Ok(())
        } else {
            Err(Error::UnsupportedAlphabet(inputs))
        }
    };
    let mut tally = Tally::default();
    match machine {
        Machine::Finite(a) => {
            binary(a.alphabet_size())?;
            let a = validate(a)?;
            for i in 0..cfg.n {
                let mut src = BitSource::for_trial(cfg.seed, i, cfg.p);
                tally.add(
                    automaton::run(&a, &mut src, cap).map(|o| (o.label, o.consumed)),
                    cfg.label,
                )?;
            }
        }
        Machine::Block(b) => {
            for i in 0..cfg.n {
                let mut src = BitSource::for_trial(cfg.seed, i, cfg.p);
                tally.add(
                    b.run_block(&mut src, cap).map(|o| (o.bit as u32, o.consumed)),
                    cfg.label,
                )?;
            }
        }
        Machine::Dice(d) => {
            binary(d.alphabet_size())?;
            for i in 0..cfg.n {
                let mut src = BitSource::for_trial(cfg.seed, i, cfg.p);
                tally.add(
                    d.run(&mut src, cap).map(|o| (o.label as u32, o.consumed)),
                    cfg.label,
                )?;
            }
        }
        Machine::Pushdown(m) => {
            binary(m.input_alphabet_size())?;
            for i in 0..cfg.n {
                let mut src = BitSource::for_trial(cfg.seed, i, cfg.p);
                tally.add(
                    pda_run(m, &mut src, cap).map(|o| (o.label, o.consumed)),
                    cfg.label,
                )?;
            }
        }
    }
    Ok(tally.report(machine.kind(), cfg, cap))
}

#[derive(Default)]
struct Tally {
    halted: u64,
    successes: u64,
    bits: u128,
    did_not_halt: u64,
}

impl Tally {
    fn add(&mut self, outcome: Result<(u32, u64)>, label: u32) -> Result<()> {
        match outcome {
            Ok((l, consumed)) => {
                self.halted += 1;
                self.successes += u64::from(l == label);
                self.bits += u128::from(consumed);
                Ok(())
            }
            Err(Error::DidNotHalt(_)) | Err(Error::StepCapExceeded(_)) => {
                self.did_not_halt += 1;
                Ok(())
            }
            Err(e) => Err(e),
        }
    }

    fn report(&self, kind: &str, cfg: &MonteCarloConfig, cap: u64) -> MonteCarloReport {
        let n = self.halted as f64;
        let estimate = (self.halted > 0).then(|| self.successes as f64 / n);
        let standard_error = estimate.map(|e| (e * (1.0 - e) / n).sqrt());
        let z_score = match (estimate, cfg.target) {
            (Some(e), Some(t)) => {
                let sd = (t * (1.0 - t) / n).sqrt();
                Some(if sd > 0.0 {
                    (e - t) / sd
                } else if e == t {
                    0.0
                } else {
                    f64::INFINITY
                })
            }
            _ => None,
        };
        MonteCarloReport {
            machine: kind.to_string(),
            p: cfg.p,
            seed: cfg.seed,
            label: cfg.label,
            n_requested: cfg.n,
            n_trials: self.halted,
            successes: self.successes,
            estimate,
            standard_error,
            target: cfg.target,
            z_score: z_score.filter(|z| z.is_finite()),
            within_tolerance: z_score.map(|z| z.abs() <= Z_TOLERANCE),
            mean_bits_consumed: (self.halted > 0).then(|| self.bits as f64 / n),
            did_not_halt: self.did_not_halt,
            did_not_halt_rate: self.did_not_halt as f64 / cfg.n as f64,
            step_cap: cap,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::builtin;
    use crate::blocks::rational_to_block;
    use crate::ratfunc::{RationalFunction, DEFAULT_POLYA_CAP};

    #[test]
    fn von_neumann_is_fair_and_reproducible() {
        let m = Machine::Finite(builtin("von_neumann").unwrap());
        let cfg = MonteCarloConfig::new(0.3, 20_000, 42).with_target(0.5);
        let a = simulate(&m, &cfg).unwrap();
        let b = simulate(&m, &cfg).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(a.n_trials, 20_000);
        assert_eq!(a.within_tolerance, Some(true));
        // expected 1 / (p q) tosses per output
        let mean = a.mean_bits_consumed.unwrap();
        assert!((mean - 1.0 / 0.21).abs() < 0.2, "{mean}");
    }

    #[test]
    fn block_consumption_is_whole_blocks() {
        let b = rational_to_block(&RationalFunction::from_ints(1, 3), DEFAULT_POLYA_CAP).unwrap();
        let m = Machine::Block(b);
        let r = simulate(&m, &MonteCarloConfig::new(0.7, 5_000, 1).with_target(1.0 / 3.0)).unwrap();
        assert_eq!(r.within_tolerance, Some(true));
        assert_eq!(r.did_not_halt, 0);
    }

    #[test]
    fn cap_is_tallied_not_fatal() {
        let m = Machine::Finite(builtin("von_neumann").unwrap());
        let mut cfg = MonteCarloConfig::new(0.5, 1_000, 3);
        cfg.step_cap = Some(2);
        let r = simulate(&m, &cfg).unwrap();
        assert!(r.did_not_halt > 300 && r.did_not_halt < 700, "{}", r.did_not_halt);
        assert_eq!(r.n_trials + r.did_not_halt, 1_000);
    }

    #[test]
    fn rejects_bad_configuration() {
        let m = Machine::Finite(builtin("square").unwrap());
        assert!(matches!(
            simulate(&m, &MonteCarloConfig::new(1.0, 10, 0)),
            Err(Error::InvalidRange(_))
        ));
        assert!(matches!(
            simulate(&m, &MonteCarloConfig::new(0.5, 0, 0)),
            Err(Error::InvalidRange(_))
        ));
    }
}
