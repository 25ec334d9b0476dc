//! Machine files: one JSON document per machine, tagged by `kind` and
//! `version`. Thresholds are written as decimal strings since they outgrow
//! 64 bits quickly.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::automaton::FiniteCoinAutomaton;
use crate::blocks::{BlockSimulation, DiceBlockSimulation, DiceStage};
use crate::error::{Error, Result};
use crate::pushdown::{PushdownCoinAutomaton, Transition};

pub const FORMAT_VERSION: u32 = 1;

/// Any machine the CLI can store, run or analyse.
#[derive(Clone, Debug, PartialEq)]
pub enum Machine {
    Finite(FiniteCoinAutomaton),
    Block(BlockSimulation),
    Pushdown(PushdownCoinAutomaton),
    Dice(DiceBlockSimulation),
}

impl Machine {
    pub fn kind(&self) -> &'static str {
        match self {
            Machine::Finite(_) => "finite",
            Machine::Block(_) => "block",
            Machine::Pushdown(_) => "pushdown",
            Machine::Dice(_) => "dice-block",
        }
    }

    pub fn to_document(&self) -> Document {
        match self {
            Machine::Finite(a) => Document::Finite(FiniteDoc {
                version: FORMAT_VERSION,
                alphabet_size: a.alphabet_size(),
                start: a.start(),
                delta: a.delta().to_vec(),
                outputs: a.outputs().to_vec(),
            }),
            Machine::Block(b) => Document::Block(BlockDoc {
                version: FORMAT_VERSION,
                k: b.k(),
                r: b.r(),
                d: decimal(b.d()),
                e: decimal(b.e()),
            }),
            Machine::Pushdown(m) => Document::Pushdown(pushdown_doc(m)),
            Machine::Dice(s) => Document::DiceBlock(DiceDoc {
                version: FORMAT_VERSION,
                alphabet_size: s.alphabet_size(),
                order: s.order().to_vec(),
                stages: s
                    .stages()
                    .iter()
                    .map(|st| StageDoc {
                        k: st.k(),
                        r: st.r(),
                        thresholds: st
                            .thresholds()
                            .iter()
                            .map(|(h, (d, e))| ThresholdDoc {
                                histogram: h.clone(),
                                d: d.to_string(),
                                e: e.to_string(),
                            })
                            .collect(),
                    })
                    .collect(),
            }),
        }
    }

    /// Pretty JSON terminated by a newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_document()).expect("serializable");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Machine> {
        let doc: Document = serde_json::from_str(text).map_err(|e| Error::Document(e.to_string()))?;
        doc.into_machine()
    }
}

fn decimal(xs: &[BigUint]) -> Vec<String> {
    xs.iter().map(ToString::to_string).collect()
}

fn parse_big(s: &str) -> Result<BigUint> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::Document(format!(
            "`{s}` is not a nonnegative decimal integer"
        )));
    }
    Ok(s.parse().expect("digits"))
}

fn parse_bigs(xs: &[String]) -> Result<Vec<BigUint>> {
    xs.iter().map(|s| parse_big(s)).collect()
}

fn pushdown_doc(m: &PushdownCoinAutomaton) -> PushdownDoc {
    let (inputs, stack) = (m.input_alphabet_size(), m.stack_size());
    let mut transitions = Vec::with_capacity(m.transitions().len());
    for state in 0..m.state_count() {
        for symbol in 0..inputs {
            for top in 0..stack {
                let t = m.transition(state, symbol, top);
                transitions.push(TransitionDoc {
                    state,
                    symbol,
                    top,
                    next: t.next,
                    push: t.push.clone(),
                });
            }
        }
    }
    PushdownDoc {
        version: FORMAT_VERSION,
        input_alphabet_size: inputs,
        stack_alphabet: m.stack_alphabet().to_vec(),
        start: m.start(),
        initial_stack: m.initial_stack().to_vec(),
        finals: m.finals().to_vec(),
        transitions,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Document {
    Finite(FiniteDoc),
    Block(BlockDoc),
    Pushdown(PushdownDoc),
    DiceBlock(DiceDoc),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteDoc {
    pub version: u32,
    pub alphabet_size: usize,
    pub start: usize,
    /// `delta[state][symbol]`.
    pub delta: Vec<Vec<usize>>,
    /// Output label of each final state, `null` elsewhere.
    pub outputs: Vec<Option<u32>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockDoc {
    pub version: u32,
    pub k: usize,
    pub r: usize,
    pub d: Vec<String>,
    pub e: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionDoc {
    pub state: usize,
    pub symbol: usize,
    pub top: usize,
    pub next: usize,
    /// Replacement word, top first. Empty pops.
    pub push: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PushdownDoc {
    pub version: u32,
    pub input_alphabet_size: usize,
    pub stack_alphabet: Vec<String>,
    pub start: usize,
    /// Top first.
    pub initial_stack: Vec<usize>,
    pub finals: Vec<Option<u32>>,
    pub transitions: Vec<TransitionDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdDoc {
    pub histogram: Vec<u32>,
    pub d: String,
    pub e: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageDoc {
    pub k: usize,
    pub r: usize,
    pub thresholds: Vec<ThresholdDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiceDoc {
    pub version: u32,
    pub alphabet_size: usize,
    pub order: Vec<usize>,
    pub stages: Vec<StageDoc>,
}

impl Document {
    fn version(&self) -> u32 {
        match self {
            Document::Finite(d) => d.version,
            Document::Block(d) => d.version,
            Document::Pushdown(d) => d.version,
            Document::DiceBlock(d) => d.version,
        }
    }

    /// Validates and builds the machine. Structural problems surface as
    /// [`Error::Document`].
    pub fn into_machine(self) -> Result<Machine> {
        if self.version() != FORMAT_VERSION {
            return Err(Error::Document(format!(
                "unsupported version {} (expected {FORMAT_VERSION})",
                self.version()
            )));
        }
        let machine = match self {
            Document::Finite(d) => {
                FiniteCoinAutomaton::new(d.alphabet_size, d.start, d.delta, d.outputs).map(Machine::Finite)
            }
            Document::Block(d) => {
                BlockSimulation::new(d.k, d.r, parse_bigs(&d.d)?, parse_bigs(&d.e)?).map(Machine::Block)
            }
            Document::Pushdown(d) => pushdown_from_doc(d).map(Machine::Pushdown),
            Document::DiceBlock(d) => {
                let mut stages = Vec::with_capacity(d.stages.len());
                for st in d.stages {
                    let mut thresholds = BTreeMap::new();
                    for t in st.thresholds {
                        let pair = (parse_big(&t.d)?, parse_big(&t.e)?);
                        if thresholds.insert(t.histogram.clone(), pair).is_some() {
                            return Err(Error::Document(format!(
                                "histogram {:?} listed twice",
                                t.histogram
                            )));
                        }
                    }
                    stages.push(DiceStage::new(d.alphabet_size, st.k, st.r, thresholds)?);
                }
                DiceBlockSimulation::with_order(d.alphabet_size, stages, d.order).map(Machine::Dice)
            }
        };
        machine.map_err(|e| match e {
            Error::Document(_) => e,
            other => Error::Document(other.to_string()),
        })
    }
}

fn pushdown_from_doc(d: PushdownDoc) -> Result<PushdownCoinAutomaton> {
    let (inputs, stack, states) = (d.input_alphabet_size, d.stack_alphabet.len(), d.finals.len());
    let total = states * inputs * stack;
    let mut table: Vec<Option<Transition>> = vec![None; total];
    for t in d.transitions {
        if t.state >= states || t.symbol >= inputs || t.top >= stack {
            return Err(Error::Document(format!(
                "transition ({}, {}, {}) out of range",
                t.state, t.symbol, t.top
            )));
        }
        let slot = &mut table[(t.state * inputs + t.symbol) * stack + t.top];
        if slot.is_some() {
            return Err(Error::Document(format!(
                "transition ({}, {}, {}) listed twice",
                t.state, t.symbol, t.top
            )));
        }
        *slot = Some(Transition::new(t.next, t.push));
    }
    let transitions = table
        .into_iter()
        .enumerate()
        .map(|(i, t)| {
            t.ok_or_else(|| {
                let (top, rest) = (i % stack, i / stack);
                Error::Document(format!(
                    "missing transition for state {}, symbol {}, top {top}",
                    rest / inputs,
                    rest % inputs
                ))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    PushdownCoinAutomaton::new(
        inputs,
        d.stack_alphabet,
        d.start,
        d.initial_stack,
        transitions,
        d.finals,
    )
}
