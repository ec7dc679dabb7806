//! Core model types: variables, poly-tree models, datasets, and the
//! distribution sources that structure recovery operates on.
//!
//! An *assignment* is one value per variable, in variable order; value `v`
//! for variable `i` must satisfy `v < cardinality(i)`. Conditional
//! probability tables are stored flat: rows are parent assignments in
//! row-major order (last listed parent varying fastest) and the child index
//! varies fastest within a row, so
//! `cpt[row * cardinality + child_value]` is `P(child = child_value | row)`.

pub mod io;
pub(crate) mod marginal;
mod random;

pub use marginal::{pair_marginal, triple_marginal};
pub use random::{check_nondegeneracy, random_polytree, NondegeneracyReport};

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Tolerance for each conditional probability column summing to one.
pub const CPT_COLUMN_TOLERANCE: f64 = 1e-12;
/// Tolerance for a joint probability table summing to one.
pub const JOINT_SUM_TOLERANCE: f64 = 1e-9;
/// Largest explicit joint table accepted, in entries.
pub const EXPLICIT_ENTRY_CAP: usize = 1 << 20;
/// Largest joint outcome space a factored model will be enumerated over.
pub const ENUMERATION_CAP: usize = 1 << 24;

/// A named discrete variable with a finite number of states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableSpec {
    name: String,
    cardinality: usize,
}

impl VariableSpec {
    pub fn new(name: impl Into<String>, cardinality: usize) -> Result<Self> {
        let name = name.into();
        if name.is_empty() {
            return Err(Error::Validation("variable name must be non-empty".into()));
        }
        if cardinality < 2 {
            return Err(Error::Validation(format!(
                "variable {name:?} must have cardinality >= 2, got {cardinality}"
            )));
        }
        Ok(Self { name, cardinality })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn cardinality(&self) -> usize {
        self.cardinality
    }
}

fn validate_variables(variables: &[VariableSpec]) -> Result<()> {
    if variables.is_empty() {
        return Err(Error::Validation("at least one variable is required".into()));
    }
    for (i, a) in variables.iter().enumerate() {
        for b in &variables[i + 1..] {
            if a.name == b.name {
                return Err(Error::Validation(format!(
                    "duplicate variable name {:?}",
                    a.name
                )));
            }
        }
    }
    Ok(())
}

fn checked_space(cards: impl IntoIterator<Item = usize>) -> Option<usize> {
    cards
        .into_iter()
        .try_fold(1usize, |acc, c| acc.checked_mul(c))
}

fn validate_assignment(variables: &[VariableSpec], assignment: &[usize]) -> Result<()> {
    if assignment.len() != variables.len() {
        return Err(Error::InvalidInput(format!(
            "assignment has {} values but the model has {} variables",
            assignment.len(),
            variables.len()
        )));
    }
    for (i, (&v, spec)) in assignment.iter().zip(variables).enumerate() {
        if v >= spec.cardinality {
            return Err(Error::InvalidInput(format!(
                "value {v} out of range for variable {} ({:?} has cardinality {})",
                i, spec.name, spec.cardinality
            )));
        }
    }
    Ok(())
}

/// A discrete Bayesian network whose directed graph is a poly-tree: acyclic,
/// with at most one undirected path between any two nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Polytree {
    variables: Vec<VariableSpec>,
    parents: Vec<Vec<usize>>,
    cpts: Vec<Vec<f64>>,
}

impl Polytree {
    /// Builds a model and checks every structural and numeric invariant:
    /// parent lists must describe a poly-tree and each CPT column must be a
    /// probability distribution over the child's states.
    pub fn new(
        variables: Vec<VariableSpec>,
        parents: Vec<Vec<usize>>,
        cpts: Vec<Vec<f64>>,
    ) -> Result<Self> {
        validate_variables(&variables)?;
        let n = variables.len();
        if parents.len() != n {
            return Err(Error::Validation(format!(
                "expected {n} parent lists, got {}",
                parents.len()
            )));
        }
        if cpts.len() != n {
            return Err(Error::Validation(format!(
                "expected {n} conditional probability tables, got {}",
                cpts.len()
            )));
        }

        // Parent lists: in range, no self-loops, no duplicates, and the
        // undirected skeleton must be acyclic (poly-tree condition).
        let mut dsu = UnionFind::new(n);
        let mut edge_count = 0usize;
        for (child, plist) in parents.iter().enumerate() {
            for (k, &p) in plist.iter().enumerate() {
                if p >= n {
                    return Err(Error::Validation(format!(
                        "variable {child} lists parent {p}, but there are only {n} variables"
                    )));
                }
                if p == child {
                    return Err(Error::Validation(format!(
                        "variable {child} lists itself as a parent"
                    )));
                }
                if plist[..k].contains(&p) {
                    return Err(Error::Validation(format!(
                        "variable {child} lists parent {p} twice"
                    )));
                }
                if !dsu.union(p, child) {
                    return Err(Error::Validation(format!(
                        "edge {p} -> {child} closes an undirected cycle; \
                         the structure must be a poly-tree"
                    )));
                }
                edge_count += 1;
            }
        }
        // Acyclic with n-1 edges means singly connected.
        if edge_count != n - 1 {
            return Err(Error::Validation(format!(
                "{edge_count} edges over {n} variables; a poly-tree needs exactly {} \
                 so that the structure is connected",
                n - 1
            )));
        }

        // CPT shapes and column normalization.
        for (i, cpt) in cpts.iter().enumerate() {
            let card = variables[i].cardinality;
            let rows = checked_space(parents[i].iter().map(|&p| variables[p].cardinality))
                .ok_or_else(|| {
                    Error::Validation(format!("parent space of variable {i} overflows"))
                })?;
            let expected = rows * card;
            if cpt.len() != expected {
                return Err(Error::Validation(format!(
                    "CPT for variable {i} has {} entries, expected {expected}",
                    cpt.len()
                )));
            }
            for (k, &p) in cpt.iter().enumerate() {
                if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                    return Err(Error::Validation(format!(
                        "CPT entry {k} for variable {i} is {p}, not a probability"
                    )));
                }
            }
            for row in 0..rows {
                let sum: f64 = cpt[row * card..(row + 1) * card].iter().sum();
                if (sum - 1.0).abs() > CPT_COLUMN_TOLERANCE {
                    return Err(Error::Validation(format!(
                        "CPT column {row} for variable {i} sums to {sum}, \
                         expected 1 within {CPT_COLUMN_TOLERANCE:e}"
                    )));
                }
            }
        }

        Ok(Self {
            variables,
            parents,
            cpts,
        })
    }

    pub fn n_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn variables(&self) -> &[VariableSpec] {
        &self.variables
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn cardinality(&self, i: usize) -> usize {
        self.variables[i].cardinality
    }

    pub fn parents(&self, i: usize) -> &[usize] {
        &self.parents[i]
    }

    pub fn children(&self, i: usize) -> Vec<usize> {
        (0..self.n_variables())
            .filter(|&c| self.parents[c].contains(&i))
            .collect()
    }

    pub fn cpt(&self, i: usize) -> &[f64] {
        &self.cpts[i]
    }

    /// Directed edges `(parent, child)`, sorted.
    pub fn directed_edges(&self) -> Vec<(usize, usize)> {
        let mut edges: Vec<(usize, usize)> = self
            .parents
            .iter()
            .enumerate()
            .flat_map(|(child, ps)| ps.iter().map(move |&p| (p, child)))
            .collect();
        edges.sort_unstable();
        edges
    }

    /// Undirected skeleton edges `(low, high)`, sorted.
    pub fn skeleton_edges(&self) -> Vec<(usize, usize)> {
        let mut edges: Vec<(usize, usize)> = self
            .directed_edges()
            .into_iter()
            .map(|(u, v)| (u.min(v), u.max(v)))
            .collect();
        edges.sort_unstable();
        edges
    }

    /// Flat row index of a parent assignment (last parent varies fastest).
    fn parent_row(&self, i: usize, assignment: &[usize]) -> usize {
        let mut row = 0;
        for &p in &self.parents[i] {
            row = row * self.variables[p].cardinality + assignment[p];
        }
        row
    }

    /// The conditional distribution of variable `i` for one full assignment
    /// of its parents, given as values for all variables.
    pub fn cpt_column_for(&self, i: usize, assignment: &[usize]) -> Result<&[f64]> {
        validate_assignment(&self.variables, assignment)?;
        Ok(self.column_unchecked(i, assignment))
    }

    fn column_unchecked(&self, i: usize, assignment: &[usize]) -> &[f64] {
        let card = self.variables[i].cardinality;
        let row = self.parent_row(i, assignment);
        &self.cpts[i][row * card..(row + 1) * card]
    }

    /// Joint probability of one assignment: the product over variables of
    /// the conditional probability of each value given its parents' values.
    pub fn joint_probability(&self, assignment: &[usize]) -> Result<f64> {
        validate_assignment(&self.variables, assignment)?;
        Ok(self.joint_unchecked(assignment))
    }

    pub(crate) fn joint_unchecked(&self, assignment: &[usize]) -> f64 {
        let mut p = 1.0;
        for i in 0..self.n_variables() {
            p *= self.column_unchecked(i, assignment)[assignment[i]];
        }
        p
    }

    /// Number of joint assignments, or `None` on overflow.
    pub fn assignment_count(&self) -> Option<usize> {
        checked_space(self.variables.iter().map(|v| v.cardinality))
    }

    /// Nodes ordered so every parent precedes its children; ties broken by
    /// smallest index for determinism.
    pub fn topological_order(&self) -> Vec<usize> {
        let n = self.n_variables();
        let mut placed = vec![false; n];
        let mut order = Vec::with_capacity(n);
        while order.len() < n {
            let next = (0..n)
                .find(|&i| !placed[i] && self.parents[i].iter().all(|&p| placed[p]))
                .expect("validated poly-tree is acyclic");
            placed[next] = true;
            order.push(next);
        }
        order
    }

    /// Draws `rows` independent samples by ancestral sampling with a
    /// deterministic generator seeded from `seed`.
    pub fn sample(&self, rows: u64, seed: u64) -> Result<Dataset> {
        if rows == 0 {
            return Err(Error::InvalidInput("sample size must be positive".into()));
        }
        let order = self.topological_order();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts: BTreeMap<Vec<usize>, u64> = BTreeMap::new();
        let mut assignment = vec![0usize; self.n_variables()];
        for _ in 0..rows {
            for &i in &order {
                let column = self.column_unchecked(i, &assignment);
                assignment[i] = draw_categorical(column, rng.random::<f64>());
            }
            *counts.entry(assignment.clone()).or_insert(0) += 1;
        }
        Dataset::from_counts(self.variables.clone(), counts)
    }

    /// Log-likelihood of a dataset under this model, in bits. Rows the model
    /// assigns zero probability drive the result to negative infinity.
    pub fn log_likelihood_bits(&self, data: &Dataset) -> Result<f64> {
        if data.variables.len() != self.variables.len() {
            return Err(Error::InvalidInput(format!(
                "dataset has {} variables, model has {}",
                data.variables.len(),
                self.variables.len()
            )));
        }
        for (d, m) in data.variables.iter().zip(&self.variables) {
            if d.name != m.name {
                return Err(Error::InvalidInput(format!(
                    "dataset variable {:?} does not match model variable {:?}",
                    d.name, m.name
                )));
            }
            if d.cardinality > m.cardinality {
                return Err(Error::InvalidInput(format!(
                    "dataset variable {:?} has cardinality {}, model allows {}",
                    d.name, d.cardinality, m.cardinality
                )));
            }
        }
        let mut total = 0.0;
        for (row, count) in data.iter() {
            let p = self.joint_unchecked(row);
            if p <= 0.0 {
                return Ok(f64::NEG_INFINITY);
            }
            total += count as f64 * p.log2();
        }
        Ok(total)
    }
}

fn draw_categorical(column: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (v, &p) in column.iter().enumerate() {
        acc += p;
        if u < acc {
            return v;
        }
    }
    column.len() - 1
}

/// A multiset of complete observations, stored as distinct-row counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    variables: Vec<VariableSpec>,
    counts: BTreeMap<Vec<usize>, u64>,
    total: u64,
}

impl Dataset {
    pub fn from_counts(
        variables: Vec<VariableSpec>,
        counts: BTreeMap<Vec<usize>, u64>,
    ) -> Result<Self> {
        validate_variables(&variables)?;
        let mut total: u64 = 0;
        for (row, &count) in &counts {
            validate_assignment(&variables, row)?;
            if count == 0 {
                return Err(Error::Validation("zero-count row in dataset".into()));
            }
            total = total.checked_add(count).ok_or_else(|| {
                Error::Validation("dataset row counts overflow".into())
            })?;
        }
        if total == 0 {
            return Err(Error::Validation("dataset must contain at least one row".into()));
        }
        Ok(Self {
            variables,
            counts,
            total,
        })
    }

    pub fn from_rows<I>(variables: Vec<VariableSpec>, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = Vec<usize>>,
    {
        let mut counts: BTreeMap<Vec<usize>, u64> = BTreeMap::new();
        for row in rows {
            *counts.entry(row).or_insert(0) += 1;
        }
        Self::from_counts(variables, counts)
    }

    pub fn variables(&self) -> &[VariableSpec] {
        &self.variables
    }

    pub fn n_variables(&self) -> usize {
        self.variables.len()
    }

    /// Total number of observations.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Number of distinct observed rows.
    pub fn distinct_rows(&self) -> usize {
        self.counts.len()
    }

    /// Iterates over `(row, count)` pairs in sorted row order.
    pub fn iter(&self) -> impl Iterator<Item = (&[usize], u64)> {
        self.counts.iter().map(|(row, &c)| (row.as_slice(), c))
    }
}

/// A joint distribution that recovery can query: an exact factored model, an
/// exact explicit table, or an empirical sample.
#[derive(Debug, Clone)]
pub enum DistributionSource {
    Factored(Polytree),
    Explicit {
        variables: Vec<VariableSpec>,
        probs: Vec<f64>,
    },
    Empirical(Dataset),
}

impl DistributionSource {
    pub fn from_model(model: Polytree) -> Self {
        Self::Factored(model)
    }

    /// Wraps an explicit joint table. `probs` is flat in row-major order
    /// with the last variable varying fastest; it must sum to one within
    /// [`JOINT_SUM_TOLERANCE`] and hold at most [`EXPLICIT_ENTRY_CAP`]
    /// entries.
    pub fn explicit(variables: Vec<VariableSpec>, probs: Vec<f64>) -> Result<Self> {
        validate_variables(&variables)?;
        let space = checked_space(variables.iter().map(|v| v.cardinality))
            .filter(|&s| s <= EXPLICIT_ENTRY_CAP)
            .ok_or_else(|| {
                Error::Validation(format!(
                    "explicit joint table exceeds the {EXPLICIT_ENTRY_CAP}-entry cap"
                ))
            })?;
        if probs.len() != space {
            return Err(Error::Validation(format!(
                "explicit joint table has {} entries, expected {space}",
                probs.len()
            )));
        }
        let mut sum = 0.0;
        for (k, &p) in probs.iter().enumerate() {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::Validation(format!(
                    "joint table entry {k} is {p}, not a probability"
                )));
            }
            sum += p;
        }
        if (sum - 1.0).abs() > JOINT_SUM_TOLERANCE {
            return Err(Error::Validation(format!(
                "joint table sums to {sum}, expected 1 within {JOINT_SUM_TOLERANCE:e}"
            )));
        }
        Ok(Self::Explicit { variables, probs })
    }

    pub fn empirical(data: Dataset) -> Self {
        Self::Empirical(data)
    }

    pub fn variables(&self) -> &[VariableSpec] {
        match self {
            Self::Factored(m) => m.variables(),
            Self::Explicit { variables, .. } => variables,
            Self::Empirical(d) => d.variables(),
        }
    }

    pub fn n_variables(&self) -> usize {
        self.variables().len()
    }

    /// Exact sources carry distribution values; empirical sources carry
    /// sample frequencies.
    pub fn is_exact(&self) -> bool {
        !matches!(self, Self::Empirical(_))
    }

    /// Number of observations behind an empirical source.
    pub fn sample_count(&self) -> Option<u64> {
        match self {
            Self::Empirical(d) => Some(d.total()),
            _ => None,
        }
    }

    /// Calls `f` with every outcome that has nonzero probability (all
    /// outcomes for exact sources) and its probability.
    pub(crate) fn for_each_outcome(&self, mut f: impl FnMut(&[usize], f64)) -> Result<()> {
        match self {
            Self::Factored(m) => {
                let space = m.assignment_count().filter(|&s| s <= ENUMERATION_CAP);
                if space.is_none() {
                    return Err(Error::InvalidInput(format!(
                        "joint outcome space exceeds the {ENUMERATION_CAP}-assignment \
                         enumeration cap"
                    )));
                }
                let cards: Vec<usize> =
                    m.variables().iter().map(|v| v.cardinality).collect();
                marginal::for_each_assignment(&cards, |a| f(a, m.joint_unchecked(a)));
            }
            Self::Explicit { variables, probs } => {
                let cards: Vec<usize> = variables.iter().map(|v| v.cardinality).collect();
                let mut k = 0;
                marginal::for_each_assignment(&cards, |a| {
                    f(a, probs[k]);
                    k += 1;
                });
            }
            Self::Empirical(d) => {
                let total = d.total() as f64;
                for (row, count) in d.iter() {
                    f(row, count as f64 / total);
                }
            }
        }
        Ok(())
    }
}

/// Disjoint-set forest used for cycle detection and edge-component grouping.
#[derive(Debug, Clone)]
pub(crate) struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    pub(crate) fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }

    /// Merges the sets holding `a` and `b`; returns false if already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}
