//! First-passage probabilities of a pushdown coin automaton.
//!
//! `alpha(b, s, s')` is the probability that, started in state `s` with `b`
//! on top of the stack, the machine eventually removes that `b` and is in
//! state `s'` at that moment. The values are the least fixed point of
//!
//! ```text
//! alpha(b, s, s') = sum_a P(a) * [ s' = t            if delta(s,a,b) = (t, empty)
//!                                | alpha~(w, t, s')  if delta(s,a,b) = (t, w) ]
//! ```
//!
//! where `alpha~(w_1..w_n, t, s')` sums `prod alpha(w_i, s_(i-1), s_i)` over
//! all intermediate states. Only states entered by a pop can appear as `s'`,
//! and only `(b, s)` pairs reachable from the initial configuration are kept.
//!
//! The system is solved by Newton's method started at zero, which for
//! monotone polynomial systems increases monotonically to the least fixed
//! point. Plain fixed-point iteration converges like `1/n` when a walk is
//! null recurrent, which is exactly the regime of the ladder machine.

use nalgebra::{DMatrix, DVector};
use twofloat::TwoFloat;

use super::machine::PushdownCoinAutomaton;
use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_ITER_CAP: usize = 1_000_000;
pub const DEFAULT_HALTING_TOL: f64 = 1e-9;

/// Iteration scheme for [`alpha_fixed_point`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Method {
    /// Newton steps, with a plain step whenever Newton is not monotone.
    #[default]
    Newton,
    /// Plain iteration of the right-hand side.
    Kleene,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlphaOptions {
    /// Stop when successive iterates differ by less than this in sup norm.
    pub tol: f64,
    pub iter_cap: usize,
    /// A goodness sum below `1 - halting_tol` means the pair is bad.
    pub halting_tol: f64,
    pub method: Method,
    /// Solve for every `(symbol, state)` pair, not only the reachable ones.
    pub all_pairs: bool,
}

impl Default for AlphaOptions {
    fn default() -> Self {
        AlphaOptions {
            tol: DEFAULT_TOL,
            iter_cap: DEFAULT_ITER_CAP,
            halting_tol: DEFAULT_HALTING_TOL,
            method: Method::Newton,
            all_pairs: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Goodness {
    pub symbol: usize,
    pub state: usize,
    pub sum: f64,
}

/// Per stack symbol `b`, the `S x S` matrix of `alpha(b, ., .)`.
#[derive(Clone, Debug, PartialEq)]
pub struct StackTransferMatrix {
    symbol: usize,
    matrix: DMatrix<f64>,
}

impl StackTransferMatrix {
    pub fn symbol(&self) -> usize {
        self.symbol
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.matrix.row_iter().map(|r| r.sum()).collect()
    }
}

/// Solved first-passage system.
#[derive(Clone, Debug)]
pub struct AlphaSystem {
    state_count: usize,
    stack_size: usize,
    targets: Vec<usize>,
    pairs: Vec<(usize, usize)>,
    pair_index: Vec<Option<usize>>,
    values: Vec<f64>,
    iterations: usize,
}

impl AlphaSystem {
    /// States that can follow a pop.
    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    /// `(symbol, state)` pairs carried by the system.
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// `alpha(b, s, s')`; zero for pairs outside the system.
    pub fn alpha(&self, symbol: usize, state: usize, next: usize) -> f64 {
        let Some(i) = self.pair_index[symbol * self.state_count + state] else {
            return 0.0;
        };
        match self.targets.iter().position(|&t| t == next) {
            Some(j) => self.values[i * self.targets.len() + j],
            None => 0.0,
        }
    }

    fn row(&self, pair: usize) -> &[f64] {
        let n = self.targets.len();
        &self.values[pair * n..(pair + 1) * n]
    }

    pub fn goodness(&self, symbol: usize, state: usize) -> Option<f64> {
        self.pair_index[symbol * self.state_count + state].map(|i| self.row(i).iter().sum())
    }

    pub fn goodness_sums(&self) -> Vec<Goodness> {
        self.pairs
            .iter()
            .enumerate()
            .map(|(i, &(symbol, state))| Goodness {
                symbol,
                state,
                sum: self.row(i).iter().sum(),
            })
            .collect()
    }

    pub fn min_goodness(&self) -> Option<Goodness> {
        self.goodness_sums()
            .into_iter()
            .min_by(|a, b| a.sum.total_cmp(&b.sum))
    }

    pub fn transfer_matrix(&self, symbol: usize) -> StackTransferMatrix {
        let n = self.state_count;
        let mut matrix = DMatrix::zeros(n, n);
        for s in 0..n {
            if let Some(i) = self.pair_index[symbol * n + s] {
                for (j, &t) in self.targets.iter().enumerate() {
                    matrix[(s, t)] = self.values[i * self.targets.len() + j];
                }
            }
        }
        StackTransferMatrix { symbol, matrix }
    }

    /// `alpha~(w, ., .)` as a product of transfer matrices, top symbol first.
    /// The empty word gives the identity.
    pub fn word_transfer(&self, word: &[usize]) -> DMatrix<f64> {
        word.iter().fold(
            DMatrix::identity(self.state_count, self.state_count),
            |acc, &b| acc * self.transfer_matrix(b).matrix,
        )
    }

    /// Row of `alpha~(word, state, .)` over the pop targets.
    fn word_row(&self, word: &[usize], state: usize) -> Option<Vec<f64>> {
        let (&first, rest) = word.split_first()?;
        let i = self.pair_index[first * self.state_count + state]?;
        let mut v = self.row(i).to_vec();
        for &b in rest {
            let mut next = vec![0.0; self.targets.len()];
            for (u, &t) in self.targets.iter().enumerate() {
                if v[u] == 0.0 {
                    continue;
                }
                let Some(k) = self.pair_index[b * self.state_count + t] else {
                    continue;
                };
                for (slot, a) in next.iter_mut().zip(self.row(k)) {
                    *slot += v[u] * a;
                }
            }
            v = next;
        }
        Some(v)
    }
}

/// One summand of the right-hand side for a pair.
#[derive(Clone, Debug)]
struct Term {
    prob: f64,
    /// Low word of the weight; with `prob` the weights sum exactly to one.
    prob_lo: f64,
    kind: TermKind,
}

#[derive(Clone, Debug)]
enum TermKind {
    /// Pop into target column `j`.
    Pop(usize),
    /// Replace with a word: pair of its top symbol at the next state, then
    /// the remaining symbols.
    Push { first: usize, rest: Vec<usize> },
}

/// Arithmetic used to evaluate the right-hand side.
trait Scalar: Copy + std::ops::Add<Output = Self> + std::ops::Mul<Output = Self> + From<f64> {}

impl Scalar for f64 {}
impl Scalar for TwoFloat {}

struct Equations {
    targets: Vec<usize>,
    pairs: Vec<(usize, usize)>,
    pair_index: Vec<Option<usize>>,
    terms: Vec<Vec<Term>>,
    state_count: usize,
}

impl Equations {
    /// Pairs reachable from the initial configuration (or all pairs), grown
    /// together with the set of states each pair can pop into.
    fn build(m: &PushdownCoinAutomaton, probs: &[f64], all_pairs: bool) -> Self {
        let n = m.state_count();
        let mut eqs = Equations {
            targets: m.pop_targets(),
            pairs: Vec::new(),
            pair_index: vec![None; m.stack_size() * n],
            terms: Vec::new(),
            state_count: n,
        };
        if all_pairs {
            for b in 0..m.stack_size() {
                for s in 0..n {
                    eqs.add(b, s);
                }
            }
        } else {
            eqs.add(m.initial_stack()[0], m.start());
        }
        // an f64 law such as (1-p, p) misses one by an ulp, which at a
        // critical system can remove the fixed point altogether
        let mut weights: Vec<TwoFloat> = probs.iter().map(|&q| TwoFloat::from(q)).collect();
        let total = weights.iter().fold(TwoFloat::from(0.0), |acc, &w| acc + w);
        if let Some(big) = (0..probs.len()).max_by(|&a, &b| probs[a].total_cmp(&probs[b])) {
            weights[big] += TwoFloat::from(1.0) - total;
        }
        loop {
            while eqs.terms.len() < eqs.pairs.len() {
                let (b, s) = eqs.pairs[eqs.terms.len()];
                let mut terms = Vec::new();
                for (a, _) in probs.iter().enumerate().filter(|(_, &q)| q > 0.0) {
                    let tr = m.transition(s, a, b);
                    let kind = match tr.push.split_first() {
                        None => TermKind::Pop(
                            eqs.targets
                                .iter()
                                .position(|&t| t == tr.next)
                                .expect("pop target"),
                        ),
                        Some((&w1, rest)) => TermKind::Push {
                            first: eqs.add(w1, tr.next),
                            rest: rest.to_vec(),
                        },
                    };
                    terms.push(Term {
                        prob: weights[a].hi(),
                        prob_lo: weights[a].lo(),
                        kind,
                    });
                }
                eqs.terms.push(terms);
            }
            let support = eqs.support();
            let mut chains: Vec<(usize, Vec<usize>)> = eqs
                .terms
                .iter()
                .flatten()
                .filter_map(|t| match &t.kind {
                    TermKind::Push { first, rest } if !rest.is_empty() => Some((*first, rest.clone())),
                    _ => None,
                })
                .collect();
            if !all_pairs {
                let tau = m.initial_stack();
                let first = eqs.pair_index[tau[0] * n + m.start()].expect("initial pair");
                chains.push((first, tau[1..].to_vec()));
            }
            let before = eqs.pairs.len();
            for (first, rest) in chains {
                let w = eqs.width();
                let mut row = support[first * w..(first + 1) * w].to_vec();
                for &b in &rest {
                    let mut next = vec![false; w];
                    for u in (0..w).filter(|&u| row[u]) {
                        let k = eqs.add(b, eqs.targets[u]);
                        if k * w < support.len() {
                            for (slot, &q) in next.iter_mut().zip(&support[k * w..(k + 1) * w]) {
                                *slot |= q;
                            }
                        }
                    }
                    row = next;
                }
            }
            if eqs.pairs.len() == before {
                return eqs;
            }
        }
    }

    fn add(&mut self, b: usize, s: usize) -> usize {
        let key = b * self.state_count + s;
        if let Some(i) = self.pair_index[key] {
            return i;
        }
        self.pair_index[key] = Some(self.pairs.len());
        self.pairs.push((b, s));
        self.pairs.len() - 1
    }

    fn width(&self) -> usize {
        self.targets.len()
    }

    fn var_count(&self) -> usize {
        self.pairs.len() * self.width()
    }

    /// Pair index of symbol `b` at the `u`-th pop target.
    fn at_target(&self, b: usize, u: usize) -> Option<usize> {
        self.pair_index[b * self.state_count + self.targets[u]]
    }

    /// Row vectors after each symbol of a push term: `rows[0]` is the first
    /// pair's row, `rows[k]` includes `rest[..k]`.
    fn prefix_rows<T: Scalar>(&self, x: &[f64], first: usize, rest: &[usize]) -> Vec<Vec<T>> {
        let w = self.width();
        let mut rows: Vec<Vec<T>> = vec![x[first * w..(first + 1) * w]
            .iter()
            .map(|&v| T::from(v))
            .collect()];
        for &b in rest {
            let prev = rows.last().unwrap();
            let mut next = vec![T::from(0.0); w];
            for (u, &vu) in prev.iter().enumerate() {
                let Some(k) = self.at_target(b, u) else { continue };
                for (slot, &a) in next.iter_mut().zip(&x[k * w..(k + 1) * w]) {
                    *slot = *slot + vu * T::from(a);
                }
            }
            rows.push(next);
        }
        rows
    }

    fn apply<T: Scalar>(&self, x: &[f64]) -> Vec<T> {
        let w = self.width();
        let mut out = vec![T::from(0.0); x.len()];
        for (i, terms) in self.terms.iter().enumerate() {
            let row = &mut out[i * w..(i + 1) * w];
            for term in terms {
                let prob = T::from(term.prob) + T::from(term.prob_lo);
                match &term.kind {
                    TermKind::Pop(j) => row[*j] = row[*j] + prob,
                    TermKind::Push { first, rest } => {
                        let v = self.prefix_rows::<T>(x, *first, rest).pop().unwrap();
                        for (slot, a) in row.iter_mut().zip(v) {
                            *slot = *slot + prob * a;
                        }
                    }
                }
            }
        }
        out
    }

    /// Which variables have a positive least fixed point.
    fn support(&self) -> Vec<bool> {
        let w = self.width();
        let mut pos = vec![false; self.var_count()];
        loop {
            let mut changed = false;
            for (i, terms) in self.terms.iter().enumerate() {
                for term in terms {
                    let mut row = vec![false; w];
                    match &term.kind {
                        TermKind::Pop(j) => row[*j] = true,
                        TermKind::Push { first, rest } => {
                            row.copy_from_slice(&pos[first * w..(first + 1) * w]);
                            for &b in rest {
                                let mut next = vec![false; w];
                                for u in (0..w).filter(|&u| row[u]) {
                                    let Some(k) = self.at_target(b, u) else { continue };
                                    for (slot, &q) in next.iter_mut().zip(&pos[k * w..(k + 1) * w]) {
                                        *slot |= q;
                                    }
                                }
                                row = next;
                            }
                        }
                    }
                    for (j, &r) in row.iter().enumerate() {
                        if r && !pos[i * w + j] {
                            pos[i * w + j] = true;
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                return pos;
            }
        }
    }

    /// Jacobian of `apply` at `x`, restricted to the variables in `vars`
    /// (`slot[v]` is the compact index of variable `v`).
    fn jacobian(&self, x: &[f64], vars: &[usize], slot: &[Option<usize>]) -> DMatrix<f64> {
        let w = self.width();
        let n = vars.len();
        let mut jac = DMatrix::zeros(n, n);
        for (i, terms) in self.terms.iter().enumerate() {
            for term in terms {
                let TermKind::Push { first, rest } = &term.kind else {
                    continue;
                };
                let rows = self.prefix_rows::<f64>(x, *first, rest);
                // suffix[k]: product of the transfer blocks for rest[k..]
                let mut suffix = vec![DMatrix::<f64>::identity(w, w); rest.len() + 1];
                for k in (0..rest.len()).rev() {
                    let mut block = DMatrix::zeros(w, w);
                    for u in 0..w {
                        if let Some(pk) = self.at_target(rest[k], u) {
                            for v in 0..w {
                                block[(u, v)] = x[pk * w + v];
                            }
                        }
                    }
                    suffix[k] = block * &suffix[k + 1];
                }
                for j in 0..w {
                    let Some(r) = slot[i * w + j] else { continue };
                    // derivative with respect to the first pair's row
                    for u in 0..w {
                        if let Some(c) = slot[first * w + u] {
                            jac[(r, c)] += term.prob * suffix[0][(u, j)];
                        }
                    }
                    // derivative with respect to rest[k] blocks
                    for k in 0..rest.len() {
                        for (u, &left) in rows[k].iter().enumerate() {
                            if left == 0.0 {
                                continue;
                            }
                            let Some(pk) = self.at_target(rest[k], u) else {
                                continue;
                            };
                            for v in 0..w {
                                if let Some(c) = slot[pk * w + v] {
                                    jac[(r, c)] += term.prob * left * suffix[k + 1][(v, j)];
                                }
                            }
                        }
                    }
                }
            }
        }
        jac
    }
}

fn check_distribution(m: &PushdownCoinAutomaton, probs: &[f64]) -> Result<()> {
    if probs.len() != m.input_alphabet_size() {
        return Err(Error::LengthMismatch {
            expected: m.input_alphabet_size(),
            got: probs.len(),
        });
    }
    let total: f64 = probs.iter().sum();
    if probs.iter().any(|&q| !(0.0..=1.0).contains(&q)) || (total - 1.0).abs() > 1e-12 {
        return Err(Error::NotAProbabilityVector);
    }
    Ok(())
}

/// Least fixed point of the first-passage system under the given input
/// symbol law.
pub fn alpha_fixed_point(
    m: &PushdownCoinAutomaton,
    probs: &[f64],
    opts: &AlphaOptions,
) -> Result<AlphaSystem> {
    check_distribution(m, probs)?;
    let eqs = Equations::build(m, probs, opts.all_pairs);
    let support = eqs.support();
    let vars: Vec<usize> = (0..eqs.var_count()).filter(|&v| support[v]).collect();
    let mut slot = vec![None; eqs.var_count()];
    for (c, &v) in vars.iter().enumerate() {
        slot[v] = Some(c);
    }

    let mut x = vec![0.0; eqs.var_count()];
    let mut iterations = 0;
    loop {
        if iterations >= opts.iter_cap {
            return Err(Error::IterCapExceeded(opts.iter_cap));
        }
        iterations += 1;
        // the residual is formed in double-double: near a critical fixed
        // point it is quadratically small and f64 cancellation would stall
        // Newton around sqrt(eps)
        let tx: Vec<TwoFloat> = eqs.apply(&x);
        let plain = || tx.iter().map(|&v| f64::from(v)).collect::<Vec<f64>>();
        let mut floor_at_old = true;
        let mut next = match opts.method {
            Method::Newton => {
                let residual: Vec<f64> = tx.iter().zip(&x).map(|(&t, &v)| f64::from(t - v)).collect();
                match newton_step(&eqs, &x, &residual, &vars, &slot) {
                    Some(next) => {
                        floor_at_old = false;
                        next
                    }
                    None => plain(),
                }
            }
            Method::Kleene => {
                let next = plain();
                debug_assert!(
                    next.iter().zip(&x).all(|(n, o)| *n >= o - 1e-12),
                    "plain iteration decreased"
                );
                next
            }
        };
        let mut delta = 0.0f64;
        for (n, &old) in next.iter_mut().zip(&x) {
            *n = n.clamp(if floor_at_old { old } else { 0.0 }, 1.0);
            delta = delta.max((*n - old).abs());
        }
        x = next;
        if delta < opts.tol {
            break;
        }
    }
    Ok(AlphaSystem {
        state_count: eqs.state_count,
        stack_size: m.stack_size(),
        targets: eqs.targets,
        pairs: eqs.pairs,
        pair_index: eqs.pair_index,
        values: x,
        iterations,
    })
}

/// `x + (I - J(x))^-1 (T(x) - x)` on the support, or `None` when the step
/// is singular, not monotone or leaves `[0, 1]`.
fn newton_step(
    eqs: &Equations,
    x: &[f64],
    residual: &[f64],
    vars: &[usize],
    slot: &[Option<usize>],
) -> Option<Vec<f64>> {
    const SLACK: f64 = 1e-9;
    let n = vars.len();
    if n == 0 {
        return Some(x.to_vec());
    }
    let mut a = -eqs.jacobian(x, vars, slot);
    for i in 0..n {
        a[(i, i)] += 1.0;
    }
    let rhs = DVector::from_iterator(n, vars.iter().map(|&v| residual[v]));
    let step = a.lu().solve(&rhs)?;
    let mut next = x.to_vec();
    for (c, &v) in vars.iter().enumerate() {
        let value = x[v] + step[c];
        // downward moves are allowed: rounding near a singular Jacobian can
        // push an iterate just past the least fixed point
        if !value.is_finite() || !(-SLACK..=1.0 + SLACK).contains(&value) {
            return None;
        }
        next[v] = value;
    }
    Some(next)
}

/// Ratio between the solve tolerance and the halting tolerance.
const HALTING_MARGIN: f64 = 1e-3;

/// Value of a pushdown machine together with the solver diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct PdaValue {
    pub value: f64,
    pub iterations: usize,
    pub min_goodness: Option<Goodness>,
}

/// `P[output 1]` for a binary-input machine reading a `p`-coin.
pub fn pda_value(m: &PushdownCoinAutomaton, p: f64, opts: &AlphaOptions) -> Result<PdaValue> {
    if m.input_alphabet_size() != 2 {
        return Err(Error::UnsupportedAlphabet(m.input_alphabet_size()));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidRange(format!("bias {p} outside (0,1)")));
    }
    pda_value_with_distribution(m, &[1.0 - p, p], opts)
}

/// `P[output 1]` when input symbols are drawn i.i.d. from `probs`. Refuses
/// machines with a reachable bad pair.
pub fn pda_value_with_distribution(
    m: &PushdownCoinAutomaton,
    probs: &[f64],
    opts: &AlphaOptions,
) -> Result<PdaValue> {
    // solve well below the halting threshold so solver error cannot pass
    // for a goodness deficit
    let opts = AlphaOptions {
        all_pairs: false,
        tol: opts.tol.min(opts.halting_tol * HALTING_MARGIN),
        ..*opts
    };
    let system = alpha_fixed_point(m, probs, &opts)?;
    let min_goodness = system.min_goodness();
    if let Some(g) = min_goodness {
        if g.sum < 1.0 - opts.halting_tol {
            return Err(Error::NotAlmostSurelyHalting {
                symbol: g.symbol,
                state: g.state,
                sum: g.sum,
                tol: opts.halting_tol,
            });
        }
    }
    let row = system
        .word_row(m.initial_stack(), m.start())
        .expect("initial pair is in the system");
    let value = system
        .targets
        .iter()
        .zip(row)
        .filter(|(&t, _)| m.final_label(t) == Some(1))
        .map(|(_, v)| v)
        .sum();
    Ok(PdaValue {
        value,
        iterations: system.iterations,
        min_goodness,
    })
}

impl AlphaSystem {
    pub fn stack_size(&self) -> usize {
        self.stack_size
    }

    pub fn state_count(&self) -> usize {
        self.state_count
    }
}
