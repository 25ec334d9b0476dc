//! Combinatorial number system: colexicographic ranking of fixed-weight
//! binary words, and its extension to words over larger alphabets with a
//! fixed letter histogram.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// `n! / (c_0! c_1! ...)` for `n = sum c_i`.
pub fn multinomial(counts: &[usize]) -> BigUint {
    let mut total = 0;
    let mut acc = BigUint::one();
    for &c in counts {
        total += c;
        acc *= binomial(total, c);
    }
    acc
}

/// A binary word with its weight and colex rank among words of the same
/// length and weight.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankedWord {
    pub word: Vec<u8>,
    pub weight: usize,
    pub rank: BigUint,
}

/// Colex rank: with the ones at positions `j_1 < j_2 < ...`, the rank is
/// `sum_m C(j_m, m)`.
pub fn rank_word(word: &[u8]) -> RankedWord {
    let mut rank = BigUint::zero();
    let mut weight = 0;
    for (j, &b) in word.iter().enumerate() {
        if b == 1 {
            weight += 1;
            rank += binomial(j, weight);
        }
    }
    RankedWord {
        word: word.to_vec(),
        weight,
        rank,
    }
}

/// Inverse of [`rank_word`].
pub fn unrank_word(length: usize, weight: usize, rank: &BigUint) -> Result<Vec<u8>> {
    if weight > length || rank >= &binomial(length, weight) {
        return Err(Error::Malformed(format!(
            "rank {rank} out of range for length {length}, weight {weight}"
        )));
    }
    let mut word = vec![0u8; length];
    let mut rest = rank.clone();
    let mut hi = length;
    for m in (1..=weight).rev() {
        // largest j < hi with C(j, m) <= rest
        let mut j = hi - 1;
        loop {
            let c = binomial(j, m);
            if c <= rest {
                rest -= c;
                break;
            }
            j -= 1;
        }
        word[j] = 1;
        hi = j;
    }
    Ok(word)
}

/// Letter histogram of a word over `{0, .., alphabet-1}`.
pub fn letter_counts(word: &[u8], alphabet: usize) -> Vec<usize> {
    let mut counts = vec![0; alphabet];
    for &c in word {
        counts[c as usize] += 1;
    }
    counts
}

/// Rank among words with the same histogram. The positions of the highest
/// letter are ranked colex, then the word with that letter removed is
/// ranked recursively; the two combine in mixed radix. For a binary word
/// this is exactly [`rank_word`].
pub fn multiset_rank(word: &[u8], alphabet: usize) -> BigUint {
    if alphabet <= 1 || word.is_empty() {
        return BigUint::zero();
    }
    let top = (alphabet - 1) as u8;
    let marks: Vec<u8> = word.iter().map(|&c| u8::from(c == top)).collect();
    let rest: Vec<u8> = word.iter().copied().filter(|&c| c != top).collect();
    let rest_counts = letter_counts(&rest, alphabet - 1);
    rank_word(&marks).rank * multinomial(&rest_counts) + multiset_rank(&rest, alphabet - 1)
}

/// Inverse of [`multiset_rank`] for the given histogram.
pub fn multiset_unrank(counts: &[usize], rank: &BigUint) -> Result<Vec<u8>> {
    let alphabet = counts.len();
    let length: usize = counts.iter().sum();
    if rank >= &multinomial(counts) {
        return Err(Error::Malformed(format!("rank {rank} out of range")));
    }
    if alphabet <= 1 {
        return Ok(vec![0; length]);
    }
    let radix = multinomial(&counts[..alphabet - 1]);
    let marks = unrank_word(length, counts[alphabet - 1], &(rank / &radix))?;
    let rest = multiset_unrank(&counts[..alphabet - 1], &(rank % &radix))?;
    let mut rest_iter = rest.into_iter();
    Ok(marks
        .into_iter()
        .map(|m| {
            if m == 1 {
                (alphabet - 1) as u8
            } else {
                rest_iter.next().expect("histogram matches")
            }
        })
        .collect())
}
