//! Marginalization of distribution sources onto small variable subsets.
//!
//! All operations make a single pass over the source's outcomes: full
//! enumeration of the joint space for exact sources, distinct observed rows
//! for empirical ones.

use crate::error::{Error, Result};
use crate::info::{PairTable, TripleTable};
use crate::model::DistributionSource;

/// Visits every assignment of the given cardinalities in row-major order
/// (last index varies fastest).
pub(crate) fn for_each_assignment(cards: &[usize], mut f: impl FnMut(&[usize])) {
    if cards.is_empty() {
        f(&[]);
        return;
    }
    let mut a = vec![0usize; cards.len()];
    loop {
        f(&a);
        let mut i = cards.len();
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            a[i] += 1;
            if a[i] < cards[i] {
                break;
            }
            a[i] = 0;
        }
    }
}

fn validate_subset(src: &DistributionSource, idxs: &[usize]) -> Result<()> {
    let n = src.n_variables();
    for (k, &i) in idxs.iter().enumerate() {
        if i >= n {
            return Err(Error::InvalidInput(format!(
                "variable index {i} out of range for {n} variables"
            )));
        }
        if idxs[..k].contains(&i) {
            return Err(Error::InvalidInput(format!(
                "variable index {i} repeated in marginal request"
            )));
        }
    }
    Ok(())
}

/// Marginal probabilities over `idxs`, flat in row-major order with the last
/// requested variable varying fastest.
pub(crate) fn marginal(src: &DistributionSource, idxs: &[usize]) -> Result<Vec<f64>> {
    validate_subset(src, idxs)?;
    let vars = src.variables();
    let cards: Vec<usize> = idxs.iter().map(|&i| vars[i].cardinality()).collect();
    let space = cards.iter().product();
    let mut probs = vec![0.0f64; space];
    src.for_each_outcome(|a, p| {
        let mut idx = 0;
        for (&i, &c) in idxs.iter().zip(&cards) {
            idx = idx * c + a[i];
        }
        probs[idx] += p;
    })?;
    Ok(probs)
}

/// Joint distribution of the ordered variable pair `(i, j)`.
pub fn pair_marginal(src: &DistributionSource, i: usize, j: usize) -> Result<PairTable> {
    if i == j {
        return Err(Error::InvalidInput(format!(
            "pair marginal needs two distinct variables, got ({i}, {j})"
        )));
    }
    let probs = marginal(src, &[i, j])?;
    let vars = src.variables();
    PairTable::new((vars[i].cardinality(), vars[j].cardinality()), probs)
}

/// Joint distribution of the ordered variable triple `(i, j, k)`.
pub fn triple_marginal(
    src: &DistributionSource,
    i: usize,
    j: usize,
    k: usize,
) -> Result<TripleTable> {
    if i == j || j == k || i == k {
        return Err(Error::InvalidInput(format!(
            "triple marginal needs three distinct variables, got ({i}, {j}, {k})"
        )));
    }
    let probs = marginal(src, &[i, j, k])?;
    let vars = src.variables();
    TripleTable::new(
        (
            vars[i].cardinality(),
            vars[j].cardinality(),
            vars[k].cardinality(),
        ),
        probs,
    )
}

/// Index of the unordered pair `(i, j)`, `i < j`, in the flat listing
/// `(0,1), (0,2), ..., (0,n-1), (1,2), ...`.
pub(crate) fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

/// All `n*(n-1)/2` pair marginals in one pass over the source, indexed by
/// [`pair_index`].
pub(crate) fn all_pair_tables(src: &DistributionSource) -> Result<Vec<PairTable>> {
    let vars = src.variables();
    let n = vars.len();
    if n < 2 {
        return Err(Error::InvalidInput(
            "pairwise marginals need at least two variables".into(),
        ));
    }
    let cards: Vec<usize> = vars.iter().map(|v| v.cardinality()).collect();
    let mut tables: Vec<Vec<f64>> = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            tables.push(vec![0.0; cards[i] * cards[j]]);
        }
    }
    src.for_each_outcome(|a, p| {
        let mut k = 0;
        for i in 0..n {
            let base = a[i];
            for j in i + 1..n {
                tables[k][base * cards[j] + a[j]] += p;
                k += 1;
            }
        }
    })?;
    let mut out = Vec::with_capacity(tables.len());
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            out.push(PairTable::new(
                (cards[i], cards[j]),
                std::mem::take(&mut tables[k]),
            )?);
            k += 1;
        }
    }
    Ok(out)
}
