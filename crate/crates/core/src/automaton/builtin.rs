use super::FiniteCoinAutomaton;
use crate::error::{Error, Result};

pub const BUILTIN_NAMES: [&str; 3] = ["von_neumann", "square", "ratio"];

/// The three introductory machines: the unbiased coin, `p^2`, and
/// `p^2 / (p^2 + (1-p)^2)`.
///
/// All read pairs of tosses from state 0; states 3 and 4 are the final
/// states with labels 0 and 1.
pub fn builtin(name: &str) -> Result<FiniteCoinAutomaton> {
    let (delta, outputs) = match name {
        // 01 -> 0, 10 -> 1, 00 and 11 start over
        "von_neumann" => (
            vec![vec![1, 2], vec![0, 3], vec![4, 0], vec![3, 3], vec![4, 4]],
            vec![None, None, None, Some(0), Some(1)],
        ),
        // two tosses; 11 -> 1, anything else -> 0
        "square" => (
            vec![vec![1, 2], vec![3, 3], vec![3, 4], vec![3, 3], vec![4, 4]],
            vec![None, None, None, Some(0), Some(1)],
        ),
        // 00 -> 0, 11 -> 1, 01 and 10 start over
        "ratio" => (
            vec![vec![1, 2], vec![3, 0], vec![0, 4], vec![3, 3], vec![4, 4]],
            vec![None, None, None, Some(0), Some(1)],
        ),
        other => return Err(Error::UnknownName(other.to_string())),
    };
    FiniteCoinAutomaton::new(2, 0, delta, outputs)
}
