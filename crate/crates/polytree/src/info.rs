//! Information-theoretic quantities over small discrete tables.
//!
//! Everything is measured in bits (base-2 logarithms), with the convention
//! `0 * log(0/q) = 0`. Accumulated rounding can leave quantities that are
//! mathematically non-negative a hair below zero, so results are clamped at
//! zero.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::model::{DistributionSource, Polytree, JOINT_SUM_TOLERANCE};

/// Joint distribution of an ordered variable pair, row-major (second index
/// fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct PairTable {
    cards: (usize, usize),
    probs: Vec<f64>,
}

impl PairTable {
    /// Validates shape, non-negativity, and unit mass within
    /// [`JOINT_SUM_TOLERANCE`].
    pub fn new(cards: (usize, usize), probs: Vec<f64>) -> Result<Self> {
        if cards.0 == 0 || cards.1 == 0 {
            return Err(Error::Validation("pair table needs positive cardinalities".into()));
        }
        if probs.len() != cards.0 * cards.1 {
            return Err(Error::Validation(format!(
                "pair table has {} entries, expected {}x{}",
                probs.len(),
                cards.0,
                cards.1
            )));
        }
        validate_mass(&probs)?;
        Ok(Self { cards, probs })
    }

    pub fn cards(&self) -> (usize, usize) {
        self.cards
    }

    pub fn prob(&self, a: usize, b: usize) -> f64 {
        self.probs[a * self.cards.1 + b]
    }

    pub fn transposed(&self) -> PairTable {
        let (ca, cb) = self.cards;
        let mut probs = vec![0.0; self.probs.len()];
        for a in 0..ca {
            for b in 0..cb {
                probs[b * ca + a] = self.prob(a, b);
            }
        }
        PairTable {
            cards: (cb, ca),
            probs,
        }
    }

    fn first_marginal(&self) -> Vec<f64> {
        let (ca, cb) = self.cards;
        let mut m = vec![0.0; ca];
        for (a, out) in m.iter_mut().enumerate() {
            for b in 0..cb {
                *out += self.prob(a, b);
            }
        }
        m
    }

    fn second_marginal(&self) -> Vec<f64> {
        let (ca, cb) = self.cards;
        let mut m = vec![0.0; cb];
        for a in 0..ca {
            for (b, out) in m.iter_mut().enumerate() {
                *out += self.prob(a, b);
            }
        }
        m
    }
}

/// Joint distribution of an ordered variable triple, row-major (third index
/// fastest). The third position is the conditioning variable in
/// [`conditional_mutual_information`].
#[derive(Debug, Clone, PartialEq)]
pub struct TripleTable {
    cards: (usize, usize, usize),
    probs: Vec<f64>,
}

impl TripleTable {
    pub fn new(cards: (usize, usize, usize), probs: Vec<f64>) -> Result<Self> {
        if cards.0 == 0 || cards.1 == 0 || cards.2 == 0 {
            return Err(Error::Validation(
                "triple table needs positive cardinalities".into(),
            ));
        }
        if probs.len() != cards.0 * cards.1 * cards.2 {
            return Err(Error::Validation(format!(
                "triple table has {} entries, expected {}x{}x{}",
                probs.len(),
                cards.0,
                cards.1,
                cards.2
            )));
        }
        validate_mass(&probs)?;
        Ok(Self { cards, probs })
    }

    pub fn cards(&self) -> (usize, usize, usize) {
        self.cards
    }

    pub fn prob(&self, a: usize, b: usize, c: usize) -> f64 {
        self.probs[(a * self.cards.1 + b) * self.cards.2 + c]
    }

    /// Swaps the first two positions, keeping the conditioning position.
    pub fn swapped(&self) -> TripleTable {
        let (ca, cb, cc) = self.cards;
        let mut probs = vec![0.0; self.probs.len()];
        for a in 0..ca {
            for b in 0..cb {
                for c in 0..cc {
                    probs[(b * ca + a) * cc + c] = self.prob(a, b, c);
                }
            }
        }
        TripleTable {
            cards: (cb, ca, cc),
            probs,
        }
    }
}

fn validate_mass(probs: &[f64]) -> Result<()> {
    let mut sum = 0.0;
    for (k, &p) in probs.iter().enumerate() {
        if !p.is_finite() || p < 0.0 {
            return Err(Error::Validation(format!(
                "table entry {k} is {p}, not a probability"
            )));
        }
        sum += p;
    }
    if (sum - 1.0).abs() > JOINT_SUM_TOLERANCE {
        return Err(Error::Validation(format!(
            "table sums to {sum}, expected 1 within {JOINT_SUM_TOLERANCE:e}"
        )));
    }
    Ok(())
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y).expect("table entries are finite") {
            Ordering::Less => return true,
            Ordering::Greater => return false,
            Ordering::Equal => {}
        }
    }
    false
}

/// Mutual information of the pair, in bits.
///
/// The table is brought to a canonical orientation before summing, so the
/// result is bit-for-bit identical for a table and its transpose regardless
/// of summation order effects.
pub fn mutual_information(table: &PairTable) -> f64 {
    let flipped;
    let t = if should_flip_pair(table) {
        flipped = table.transposed();
        &flipped
    } else {
        table
    };
    let first = t.first_marginal();
    let second = t.second_marginal();
    let mut bits = 0.0;
    for (a, &pa) in first.iter().enumerate() {
        for (b, &pb) in second.iter().enumerate() {
            let p = t.prob(a, b);
            if p > 0.0 {
                bits += p * (p / (pa * pb)).log2();
            }
        }
    }
    bits.max(0.0)
}

fn should_flip_pair(t: &PairTable) -> bool {
    match t.cards.0.cmp(&t.cards.1) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => lex_less(&t.transposed().probs, &t.probs),
    }
}

/// Conditional mutual information `I(first; second | third)`, in bits.
///
/// Canonicalized like [`mutual_information`], so swapping the first two
/// positions gives a bit-for-bit identical result.
pub fn conditional_mutual_information(table: &TripleTable) -> f64 {
    let swapped;
    let t = if should_flip_triple(table) {
        swapped = table.swapped();
        &swapped
    } else {
        table
    };
    let (ca, cb, cc) = t.cards;
    let mut p_ac = vec![0.0; ca * cc];
    let mut p_bc = vec![0.0; cb * cc];
    let mut p_c = vec![0.0; cc];
    for a in 0..ca {
        for b in 0..cb {
            for c in 0..cc {
                let p = t.prob(a, b, c);
                p_ac[a * cc + c] += p;
                p_bc[b * cc + c] += p;
                p_c[c] += p;
            }
        }
    }
    let mut bits = 0.0;
    for a in 0..ca {
        for b in 0..cb {
            for c in 0..cc {
                let p = t.prob(a, b, c);
                if p > 0.0 {
                    bits += p * (p * p_c[c] / (p_ac[a * cc + c] * p_bc[b * cc + c])).log2();
                }
            }
        }
    }
    bits.max(0.0)
}

fn should_flip_triple(t: &TripleTable) -> bool {
    match t.cards.0.cmp(&t.cards.1) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => lex_less(&t.swapped().probs, &t.probs),
    }
}

/// How well a candidate model reproduces an exact source distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Closeness {
    /// Kullback-Leibler divergence from the source to the candidate, in
    /// bits; zero means the candidate reproduces the source exactly.
    Bits(f64),
    /// The candidate assigns zero probability to an outcome the source
    /// gives positive mass, so the divergence is unbounded.
    Unrepresentable,
}

impl Closeness {
    pub fn bits(&self) -> Option<f64> {
        match self {
            Closeness::Bits(b) => Some(*b),
            Closeness::Unrepresentable => None,
        }
    }

    pub fn is_unrepresentable(&self) -> bool {
        matches!(self, Closeness::Unrepresentable)
    }
}

/// Divergence of a candidate model from an exact source over the same
/// variables: the expected log-ratio of source to candidate probabilities.
///
/// Lower is better; the maximum-weight spanning tree construction minimizes
/// this over all tree-shaped candidates.
pub fn closeness(source: &DistributionSource, candidate: &Polytree) -> Result<Closeness> {
    if !source.is_exact() {
        return Err(Error::InvalidInput(
            "closeness requires an exact source distribution".into(),
        ));
    }
    if source.variables() != candidate.variables() {
        return Err(Error::InvalidInput(
            "closeness requires the candidate to declare the same variables \
             (names and cardinalities) as the source"
            .into(),
        ));
    }
    let mut bits = 0.0;
    let mut unrepresentable = false;
    source.for_each_outcome(|a, p| {
        if p > 0.0 && !unrepresentable {
            let q = candidate.joint_unchecked(a);
            if q <= 0.0 {
                unrepresentable = true;
            } else {
                bits += p * (p / q).log2();
            }
        }
    })?;
    if unrepresentable {
        Ok(Closeness::Unrepresentable)
    } else {
        Ok(Closeness::Bits(bits.max(0.0)))
    }
}
