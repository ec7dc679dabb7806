//! Turning a partially-directed recovery result into a fully parameterized
//! model: completing the orientation (optionally steered by user overrides)
//! and fitting conditional probability tables from the source distribution.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::model::marginal::marginal;
use crate::model::{DistributionSource, Polytree, UnionFind, ENUMERATION_CAP};
use crate::orient::{independent, EdgeState, IndependenceOracle, RecoveredStructure};

/// User-chosen directions for edges the distribution left undetermined.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OrientationOverride {
    assignments: Vec<(usize, usize)>,
}

impl OrientationOverride {
    /// Each pair is `(from, to)`: direct the skeleton edge `{from, to}`
    /// from `from` toward `to`.
    pub fn new(assignments: Vec<(usize, usize)>) -> Self {
        Self { assignments }
    }

    /// No overrides: completion falls back to its default rooting rule.
    pub fn none() -> Self {
        Self::default()
    }

    pub fn assignments(&self) -> &[(usize, usize)] {
        &self.assignments
    }
}

/// A fully directed poly-tree structure (no parameters yet).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedTree {
    parents: Vec<Vec<usize>>,
}

impl DirectedTree {
    /// Builds from per-node parent lists, validating that the edges form a
    /// poly-tree: indices in range, no self-loops or duplicates, exactly
    /// `n - 1` edges, and no cycle.
    pub fn from_parent_lists(parents: Vec<Vec<usize>>) -> Result<Self> {
        let n = parents.len();
        if n == 0 {
            return Err(Error::InvalidInput(
                "a directed tree needs at least one node".into(),
            ));
        }
        let mut edge_count = 0usize;
        let mut dsu = UnionFind::new(n);
        for (child, ps) in parents.iter().enumerate() {
            for (k, &p) in ps.iter().enumerate() {
                if p >= n {
                    return Err(Error::InvalidInput(format!(
                        "parent index {p} out of range for {n} nodes"
                    )));
                }
                if p == child {
                    return Err(Error::InvalidInput(format!(
                        "node {child} cannot be its own parent"
                    )));
                }
                if ps[..k].contains(&p) {
                    return Err(Error::InvalidInput(format!(
                        "node {child} lists parent {p} twice"
                    )));
                }
                if !dsu.union(p, child) {
                    return Err(Error::InvalidInput(format!(
                        "edge {p} -> {child} closes a cycle; the edges must form a tree"
                    )));
                }
                edge_count += 1;
            }
        }
        if edge_count != n - 1 {
            return Err(Error::InvalidInput(format!(
                "a poly-tree on {n} nodes has exactly {} edges, got {edge_count}",
                n - 1
            )));
        }
        let mut parents = parents;
        parents.iter_mut().for_each(|p| p.sort_unstable());
        Ok(Self { parents })
    }

    /// The directed structure of an existing model.
    pub fn from_model(model: &Polytree) -> Self {
        let parents = (0..model.n_variables())
            .map(|i| model.parents(i).to_vec())
            .collect();
        Self::from_parent_lists(parents).expect("a valid model carries a valid structure")
    }

    pub fn n(&self) -> usize {
        self.parents.len()
    }

    /// Parents of node `i`, sorted ascending.
    pub fn parents(&self, i: usize) -> &[usize] {
        &self.parents[i]
    }

    /// All edges as `(parent, child)`, sorted.
    pub fn directed_edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.parents.len().saturating_sub(1));
        for (child, ps) in self.parents.iter().enumerate() {
            for &p in ps {
                out.push((p, child));
            }
        }
        out.sort_unstable();
        out
    }
}

/// Extends a recovery result to a fully directed tree.
///
/// Overridden edges take their given direction; every remaining undirected
/// fragment is rooted at its lowest-index node and directed away from that
/// root. Any parent pair created by an override or by completion (rather
/// than by recovery itself) must still be judged marginally independent by
/// the oracle — a completion that manufactures a dependent parent pair is
/// rejected, since the resulting model could not reproduce the source.
pub fn complete_orientation(
    recovered: &RecoveredStructure,
    overrides: &OrientationOverride,
    src: &DistributionSource,
    oracle: &IndependenceOracle,
) -> Result<DirectedTree> {
    let n = recovered.skeleton().n();
    if n != src.n_variables() {
        return Err(Error::InvalidInput(format!(
            "recovered structure covers {n} nodes but the source has {} variables",
            src.n_variables()
        )));
    }
    let edges = recovered.skeleton().edges();
    let names: Vec<&str> = src.variables().iter().map(|v| v.name()).collect();

    let mut orientation: Vec<Option<(usize, usize)>> = recovered
        .edge_states()
        .iter()
        .map(|s| match s {
            EdgeState::Directed { from, to } => Some((*from, *to)),
            EdgeState::Undetermined => None,
        })
        .collect();
    let mut is_new = vec![false; edges.len()];

    for &(from, to) in overrides.assignments() {
        if from >= n || to >= n || from == to {
            return Err(Error::InvalidInput(format!(
                "override {from} -> {to} is not a pair of distinct node indices below {n}"
            )));
        }
        let key = (from.min(to), from.max(to));
        let k = edges.binary_search(&key).map_err(|_| {
            Error::InvalidInput(format!(
                "override names {}-{}, which is not a skeleton edge",
                names[key.0], names[key.1]
            ))
        })?;
        match (recovered.edge_states()[k], orientation[k]) {
            (EdgeState::Directed { .. }, _) => {
                return Err(Error::InvalidInput(format!(
                    "override targets {}-{}, but recovery already directed that edge; \
                     overrides may only direct undetermined edges",
                    names[key.0], names[key.1]
                )));
            }
            (EdgeState::Undetermined, Some(_)) => {
                return Err(Error::InvalidInput(format!(
                    "edge {}-{} is overridden more than once",
                    names[key.0], names[key.1]
                )));
            }
            (EdgeState::Undetermined, None) => {
                orientation[k] = Some((from, to));
                is_new[k] = true;
            }
        }
    }

    // Each remaining fragment of undirected edges is rooted at its
    // lowest-index node and directed outward from there.
    let mut frag_adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (k, &(u, v)) in edges.iter().enumerate() {
        if orientation[k].is_none() {
            frag_adj[u].push(v);
            frag_adj[v].push(u);
        }
    }
    frag_adj.iter_mut().for_each(|a| a.sort_unstable());
    let mut visited = vec![false; n];
    for root in 0..n {
        if visited[root] || frag_adj[root].is_empty() {
            continue;
        }
        // Scanning roots in ascending order makes the first unvisited node
        // of each fragment its minimum.
        visited[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &w in &frag_adj[u] {
                if !visited[w] {
                    visited[w] = true;
                    let key = (u.min(w), u.max(w));
                    let k = edges.binary_search(&key).expect("fragment edges come from the skeleton");
                    orientation[k] = Some((u, w));
                    is_new[k] = true;
                    queue.push_back(w);
                }
            }
        }
    }

    // Collect parents, remembering which arrived by override/completion.
    let mut parents: Vec<Vec<(usize, bool)>> = vec![Vec::new(); n];
    for (k, _) in edges.iter().enumerate() {
        let (from, to) = orientation[k].expect("every edge is directed by now");
        parents[to].push((from, is_new[k]));
    }

    // A parent pair introduced by this completion must still look
    // independent; recovery-committed pairs were already verified.
    for v in 0..n {
        let ps = &parents[v];
        for i in 0..ps.len() {
            for j in i + 1..ps.len() {
                let (p, p_new) = ps[i];
                let (q, q_new) = ps[j];
                if !(p_new || q_new) {
                    continue;
                }
                if !independent(src, p, q, oracle)? {
                    return Err(Error::InvalidInput(format!(
                        "completion makes {} and {} joint parents of {}, but the oracle \
                         judges them dependent; a poly-tree with that collider could not \
                         reproduce the source — choose a different override",
                        names[p], names[q], names[v]
                    )));
                }
            }
        }
    }

    DirectedTree::from_parent_lists(
        parents
            .into_iter()
            .map(|ps| ps.into_iter().map(|(p, _)| p).collect())
            .collect(),
    )
}

/// A fitted model together with any fitting warnings (uniform fallback
/// columns for parent assignments that carry no mass).
#[derive(Debug, Clone)]
pub struct FittedModel {
    pub model: Polytree,
    pub warnings: Vec<String>,
}

/// Estimates conditional probability tables for `tree` from the source.
///
/// Exact sources yield the source's own conditionals (each column is the
/// family marginal normalized over the child), so the fitted model
/// reproduces the source joint wherever the structure can express it.
/// Empirical sources take maximum-likelihood frequency estimates with
/// optional additive smoothing: each cell gets `count + smoothing` before
/// normalizing. A parent assignment with no mass and no smoothing falls
/// back to a uniform column and is reported in the warnings.
pub fn fit_parameters(
    src: &DistributionSource,
    tree: &DirectedTree,
    smoothing: f64,
) -> Result<FittedModel> {
    if tree.n() != src.n_variables() {
        return Err(Error::InvalidInput(format!(
            "tree covers {} nodes but the source has {} variables",
            tree.n(),
            src.n_variables()
        )));
    }
    if !smoothing.is_finite() || smoothing < 0.0 {
        return Err(Error::InvalidInput(format!(
            "smoothing must be finite and non-negative, got {smoothing}"
        )));
    }
    if smoothing > 0.0 && src.is_exact() {
        return Err(Error::InvalidInput(
            "additive smoothing applies to empirical sample counts; \
             exact sources take smoothing 0"
                .into(),
        ));
    }

    let variables = src.variables().to_vec();
    let cards: Vec<usize> = variables.iter().map(|v| v.cardinality()).collect();
    let n = variables.len();
    let mut warnings = Vec::new();
    let mut cpts = Vec::with_capacity(n);

    for v in 0..n {
        let card = cards[v];
        let mut family: Vec<usize> = tree.parents(v).to_vec();
        family.push(v);
        let mut space = 1usize;
        for &i in &family {
            space = space.checked_mul(cards[i]).filter(|&s| s <= ENUMERATION_CAP).ok_or_else(
                || {
                    Error::InvalidInput(format!(
                        "family of {} spans more than {ENUMERATION_CAP} assignments",
                        variables[v].name()
                    ))
                },
            )?;
        }
        // Mass per family assignment, parents outermost and the child
        // fastest — the same layout the conditional table uses.
        let mass: Vec<f64> = match src {
            DistributionSource::Empirical(data) => {
                let mut out = vec![0.0; space];
                for (row, count) in data.iter() {
                    let mut flat = 0usize;
                    for &i in &family {
                        flat = flat * cards[i] + row[i];
                    }
                    out[flat] += count as f64;
                }
                out
            }
            _ => marginal(src, &family)?,
        };

        let rows = space / card;
        let mut cpt = vec![0.0; space];
        for row in 0..rows {
            let base = row * card;
            let row_mass: f64 = mass[base..base + card].iter().sum();
            let denom = row_mass + smoothing * card as f64;
            if denom <= 0.0 {
                for cell in &mut cpt[base..base + card] {
                    *cell = 1.0 / card as f64;
                }
                warnings.push(format!(
                    "no mass for parent assignment {row} of {}; column set to uniform",
                    variables[v].name()
                ));
            } else {
                for val in 0..card {
                    cpt[base + val] = (mass[base + val] + smoothing) / denom;
                }
            }
        }
        cpts.push(cpt);
    }

    let parents = (0..n).map(|i| tree.parents(i).to_vec()).collect();
    let model = Polytree::new(variables, parents, cpts)?;
    Ok(FittedModel { model, warnings })
}
