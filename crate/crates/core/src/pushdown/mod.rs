//! Pushdown coin automata: execution, first-passage probabilities, the
//! ladder construction and the `sqrt(p)` machine.

mod alpha;
mod ladder;
mod machine;
mod verify;

pub use alpha::{
    alpha_fixed_point, pda_value, pda_value_with_distribution, AlphaOptions, AlphaSystem, Goodness, Method,
    PdaValue, StackTransferMatrix, DEFAULT_HALTING_TOL, DEFAULT_ITER_CAP, DEFAULT_TOL,
};
pub use ladder::{
    build_gamma_pda, build_ladder_pda, build_sqrt_pda, build_transient_ladder_pda, compose_with_block,
    gamma_closed_form, ladder_machine, sqrt_from_gamma, Ladder, COMPOSE_MAX_STATES, LADDER_LEFT,
    LADDER_RIGHT,
};
pub use machine::{
    pda_run, PdaOutcome, PushdownCoinAutomaton, Transition, DEFAULT_PDA_STEP_CAP, MAX_REPLACEMENT,
};
pub use verify::{verify_algebraic, AlgebraicReport};
