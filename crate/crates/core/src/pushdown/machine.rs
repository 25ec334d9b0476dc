use crate::error::{Error, Result};
use crate::source::SymbolSource;

/// Longest replacement word accepted by [`PushdownCoinAutomaton::new`].
pub const MAX_REPLACEMENT: usize = 8;

/// Transition step cap used when none is given.
pub const DEFAULT_PDA_STEP_CAP: u64 = 100_000_000;

/// Target of one transition. `push` replaces the top symbol and is written
/// top first; an empty word pops.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub next: usize,
    pub push: Vec<usize>,
}

impl Transition {
    pub fn pop(next: usize) -> Self {
        Transition {
            next,
            push: Vec::new(),
        }
    }

    pub fn new(next: usize, push: Vec<usize>) -> Self {
        Transition { next, push }
    }
}

/// Pushdown coin automaton. The machine halts exactly when the stack is
/// empty and outputs the label of the state it is in.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PushdownCoinAutomaton {
    state_count: usize,
    input_alphabet_size: usize,
    stack_alphabet: Vec<String>,
    start: usize,
    initial_stack: Vec<usize>,
    transitions: Vec<Transition>,
    finals: Vec<Option<u32>>,
    table: Vec<Step>,
    arena: Vec<u32>,
}

/// Flattened transition used by [`pda_run`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Step {
    next: u32,
    /// Table offset of `next`'s block of transitions.
    base: u32,
    op: Op,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Op {
    Pop,
    /// Replacement equals the top symbol.
    Keep,
    /// Pop, then push `arena[start..start + len]` (stored bottom first).
    Replace {
        start: u32,
        len: u32,
    },
}

impl PushdownCoinAutomaton {
    /// `transitions` is indexed by `(state * inputs + symbol) * stack_size + top`.
    pub fn new(
        input_alphabet_size: usize,
        stack_alphabet: Vec<String>,
        start: usize,
        initial_stack: Vec<usize>,
        transitions: Vec<Transition>,
        finals: Vec<Option<u32>>,
    ) -> Result<Self> {
        let state_count = finals.len();
        let stack_size = stack_alphabet.len();
        if input_alphabet_size < 2 {
            return Err(Error::UnsupportedAlphabet(input_alphabet_size));
        }
        if state_count == 0 || stack_size == 0 {
            return Err(Error::Malformed("machine needs states and stack symbols".into()));
        }
        if start >= state_count {
            return Err(Error::Malformed(format!("start state {start} out of range")));
        }
        if initial_stack.is_empty() {
            return Err(Error::Malformed("initial stack must be nonempty".into()));
        }
        if initial_stack.iter().any(|&b| b >= stack_size) {
            return Err(Error::Malformed("initial stack uses an unknown symbol".into()));
        }
        let expected = state_count * input_alphabet_size * stack_size;
        if transitions.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                got: transitions.len(),
            });
        }
        for t in &transitions {
            if t.next >= state_count {
                return Err(Error::Malformed(format!(
                    "transition to unknown state {}",
                    t.next
                )));
            }
            if t.push.len() > MAX_REPLACEMENT {
                return Err(Error::Malformed(format!(
                    "replacement word longer than {MAX_REPLACEMENT}"
                )));
            }
            if t.push.iter().any(|&b| b >= stack_size) {
                return Err(Error::Malformed("replacement uses an unknown symbol".into()));
            }
        }
        if finals.iter().flatten().any(|&l| l > 1) {
            return Err(Error::NotBinaryLabels);
        }
        let mut arena = Vec::new();
        let table = transitions
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let top = i % stack_size;
                let op = match t.push.as_slice() {
                    [] => Op::Pop,
                    [b] if *b == top => Op::Keep,
                    word => {
                        let start = arena.len() as u32;
                        arena.extend(word.iter().rev().map(|&b| b as u32));
                        Op::Replace {
                            start,
                            len: word.len() as u32,
                        }
                    }
                };
                Step {
                    next: t.next as u32,
                    base: (t.next * input_alphabet_size * stack_size) as u32,
                    op,
                }
            })
            .collect();
        Ok(PushdownCoinAutomaton {
            table,
            arena,
            state_count,
            input_alphabet_size,
            stack_alphabet,
            start,
            initial_stack,
            transitions,
            finals,
        })
    }

    pub fn state_count(&self) -> usize {
        self.state_count
    }

    pub fn input_alphabet_size(&self) -> usize {
        self.input_alphabet_size
    }

    pub fn stack_alphabet(&self) -> &[String] {
        &self.stack_alphabet
    }

    pub fn stack_size(&self) -> usize {
        self.stack_alphabet.len()
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn initial_stack(&self) -> &[usize] {
        &self.initial_stack
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn finals(&self) -> &[Option<u32>] {
        &self.finals
    }

    pub fn final_label(&self, state: usize) -> Option<u32> {
        self.finals[state]
    }

    pub fn transition(&self, state: usize, symbol: usize, top: usize) -> &Transition {
        &self.transitions[self.index(state, symbol, top)]
    }

    fn index(&self, state: usize, symbol: usize, top: usize) -> usize {
        (state * self.input_alphabet_size + symbol) * self.stack_alphabet.len() + top
    }

    /// States entered by some popping transition.
    pub fn pop_targets(&self) -> Vec<usize> {
        let mut hit = vec![false; self.state_count];
        for t in &self.transitions {
            if t.push.is_empty() {
                hit[t.next] = true;
            }
        }
        (0..self.state_count).filter(|&s| hit[s]).collect()
    }

    /// Same machine with labels 0 and 1 exchanged.
    pub fn complement(&self) -> Self {
        let mut out = self.clone();
        for l in out.finals.iter_mut().flatten() {
            *l = 1 - *l;
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PdaOutcome {
    pub label: u32,
    pub consumed: u64,
}

/// Run until the stack empties. Each transition reads one input symbol.
pub fn pda_run<S: SymbolSource + ?Sized>(
    m: &PushdownCoinAutomaton,
    src: &mut S,
    step_cap: u64,
) -> Result<PdaOutcome> {
    // top of stack is the last element
    let mut stack: Vec<u32> = m.initial_stack.iter().rev().map(|&b| b as u32).collect();
    let stack_size = m.stack_size();
    let mut base = m.start * m.input_alphabet_size * stack_size;
    let mut top = *stack.last().expect("nonempty initial stack") as usize;
    // a table lookup keeps the symbol out of any branch
    let offsets: Vec<usize> = (0..m.input_alphabet_size).map(|a| a * stack_size).collect();
    let mut consumed = 0u64;
    let state = loop {
        if consumed >= step_cap {
            return Err(Error::DidNotHalt(step_cap));
        }
        let step = m.table[base + offsets[src.next_symbol()] + top];
        consumed += 1;
        base = step.base as usize;
        match step.op {
            Op::Keep => continue,
            Op::Pop => {
                stack.pop();
            }
            Op::Replace { start, len } => {
                stack.pop();
                stack.extend_from_slice(&m.arena[start as usize..(start + len) as usize]);
            }
        }
        match stack.last() {
            Some(&t) => top = t as usize,
            None => break step.next as usize,
        }
    };
    match m.finals[state] {
        Some(label) => Ok(PdaOutcome { label, consumed }),
        None => Err(Error::UndefinedFinal(state)),
    }
}
