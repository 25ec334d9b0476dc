//! Block simulations: read fixed-length words, output 1, output 0 or
//! discard and retry.

mod block;
mod dice;
mod rank;

pub use block::{
    build_block, rational_to_block, BlockOutcome, BlockRun, BlockSimulation, BRUTE_FORCE_MAX_LENGTH,
    COMPILE_MAX_LENGTH,
};
pub use dice::{
    dice_from_univariate, dice_rational_to_block, DiceBlockSimulation, DiceRun, DiceStage, Thresholds,
    DICE_BRUTE_FORCE_MAX_WORDS,
};
pub use rank::{
    binomial, letter_counts, multinomial, multiset_rank, multiset_unrank, rank_word, unrank_word, RankedWord,
};
