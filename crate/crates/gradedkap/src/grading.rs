//! Degree bookkeeping and Koszul signs.
//!
//! Convention used throughout: permuting two homogeneous objects past one
//! another contributes (-1)^{|a||b|}. Only parities matter, so all sign
//! computations reduce degrees mod 2.

use crate::error::{Error, Result};

/// Per-coordinate internal degrees of a chart, deg x^i.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DegreeVector(pub Vec<i64>);

impl DegreeVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self, i: usize) -> i64 {
        self.0[i]
    }

    pub fn is_odd(&self, i: usize) -> bool {
        self.0[i].rem_euclid(2) == 1
    }
}

/// Koszul sign of the permutation sending slot i to the object originally at
/// position `perm[i]` (0-based). `degrees[k]` is the degree of the object
/// originally at position k. The sign is the product of (-1)^{|a||b|} over
/// all inversion pairs.
pub fn koszul_sign(perm: &[usize], degrees: &[i64]) -> Result<i8> {
    if perm.len() != degrees.len() {
        return Err(Error::InvalidInput(format!(
            "permutation length {} does not match degree count {}",
            perm.len(),
            degrees.len()
        )));
    }
    let n = perm.len();
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::InvalidInput(format!(
                "sequence {perm:?} is not a permutation of 0..{n}"
            )));
        }
        seen[p] = true;
    }
    let mut sign = 1i8;
    for i in 0..n {
        for j in (i + 1)..n {
            if perm[i] > perm[j] && degrees[perm[i]] % 2 != 0 && degrees[perm[j]] % 2 != 0 {
                sign = -sign;
            }
        }
    }
    Ok(sign)
}

/// Sorts an index word ascending, accumulating the Koszul sign of the sort;
/// `parity_of(idx)` reports whether the object at that index is odd. Returns
/// `None` when an odd index repeats (the word is zero).
pub fn sort_word_signed<F>(word: &[usize], parity_of: F) -> Option<(i8, Vec<usize>)>
where
    F: Fn(usize) -> bool,
{
    let mut out = word.to_vec();
    let mut sign = 1i8;
    // insertion sort; adjacent swap of two odd objects flips the sign
    for i in 1..out.len() {
        let mut j = i;
        while j > 0 && out[j - 1] > out[j] {
            if parity_of(out[j - 1]) && parity_of(out[j]) {
                sign = -sign;
            }
            out.swap(j - 1, j);
            j -= 1;
        }
    }
    for k in 1..out.len() {
        if out[k] == out[k - 1] && parity_of(out[k]) {
            return None;
        }
    }
    Some((sign, out))
}

/// Enumerates all splits of a word into a (left, right) pair of subwords
/// keeping relative order, together with the Koszul sign of the unshuffle.
/// Position subsets are enumerated directly, so repeated even indices
/// contribute their shuffle multiplicity. Degrees are per position.
pub fn word_splits(word: &[usize], degrees: &[i64]) -> Vec<(i8, Vec<usize>, Vec<usize>)> {
    assert_eq!(word.len(), degrees.len());
    let n = word.len();
    let mut out = Vec::with_capacity(1 << n);
    for mask in 0u32..(1u32 << n) {
        let mut left = Vec::new();
        let mut right = Vec::new();
        let mut sign = 1i8;
        let mut odd_sent_right = 0u32;
        for (pos, (&idx, &deg)) in word.iter().zip(degrees.iter()).enumerate() {
            if mask & (1 << pos) != 0 {
                // goes left: crosses every odd element already sent right
                if deg % 2 != 0 && odd_sent_right % 2 == 1 {
                    sign = -sign;
                }
                left.push(idx);
            } else {
                if deg % 2 != 0 {
                    odd_sent_right += 1;
                }
                right.push(idx);
            }
        }
        out.push((sign, left, right));
    }
    out
}
