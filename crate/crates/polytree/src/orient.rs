//! Directionality recovery: collider detection, basin sweeping, and the
//! labeling of edges the distribution cannot orient.
//!
//! A node with two or more parents is detectable because its parents are
//! marginally independent of one another while every other adjacent pair is
//! dependent. Once one parent pair is found at a node, the rest of that
//! node's branches — and, transitively, the branches of every descendant
//! reached by the sweep — are resolved by the partially-directed-triplet
//! test: given a known parent A of B and an unoriented neighbor C, C is a
//! parent of B exactly when A and C are independent. Edges outside every
//! such region carry no orientation signal and are labeled undetermined.
//!
//! Degenerate distributions can null out marginal weights entirely (an XOR
//! collider has all pairwise information zero); degenerate mode swaps the
//! marginal-independence criterion for a conditional one — the collider is
//! the triplet whose endpoints stay informative *given* the middle node.

use std::collections::{HashMap, VecDeque};

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::info::{conditional_mutual_information, mutual_information};
use crate::model::marginal::{all_pair_tables, pair_index};
use crate::model::{pair_marginal, triple_marginal, DistributionSource, Polytree, UnionFind};
use crate::skeleton::Skeleton;

/// Default independence threshold for exact sources, in bits.
pub const DEFAULT_EXACT_EPSILON_BITS: f64 = 1e-9;
/// Default significance level for the sample-based independence test.
pub const DEFAULT_GTEST_ALPHA: f64 = 0.01;

/// Decides marginal (and, in degenerate mode, conditional) independence.
#[derive(Debug, Clone, PartialEq)]
pub enum IndependenceOracle {
    /// Compare exact information against a tiny threshold: suitable for
    /// exact sources where independence means a true zero.
    ExactThreshold { epsilon_bits: f64 },
    /// Compare plug-in information against a user-chosen threshold.
    FixedThreshold { tau_bits: f64 },
    /// Likelihood-ratio test: `G = 2 N ln(2) I` against the chi-square
    /// critical value at `alpha`. Only meaningful for empirical sources.
    GTest { alpha: f64, sample_count: u64 },
}

impl IndependenceOracle {
    pub fn exact_threshold(epsilon_bits: f64) -> Result<Self> {
        if !epsilon_bits.is_finite() || epsilon_bits <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "epsilon must be positive and finite, got {epsilon_bits}"
            )));
        }
        Ok(Self::ExactThreshold { epsilon_bits })
    }

    pub fn fixed_threshold(tau_bits: f64) -> Result<Self> {
        if !tau_bits.is_finite() || tau_bits <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "tau must be positive and finite, got {tau_bits}"
            )));
        }
        Ok(Self::FixedThreshold { tau_bits })
    }

    pub fn g_test(alpha: f64, sample_count: u64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidInput(format!(
                "significance level must lie strictly between 0 and 1, got {alpha}"
            )));
        }
        if sample_count == 0 {
            return Err(Error::InvalidInput(
                "sample count must be positive".into(),
            ));
        }
        Ok(Self::GTest {
            alpha,
            sample_count,
        })
    }

    /// Errors when the oracle cannot serve the given source kind.
    fn check_source(&self, src: &DistributionSource) -> Result<()> {
        if matches!(self, Self::GTest { .. }) && src.is_exact() {
            return Err(Error::OracleConfig(
                "the G-test judges sampling noise and needs an empirical source; \
                 use a threshold oracle for exact distributions"
                    .into(),
            ));
        }
        Ok(())
    }

    /// True when a pair with the given mutual information (bits) and
    /// cardinalities is judged independent.
    fn judge_pair_independent(&self, mi_bits: f64, cards: (usize, usize)) -> bool {
        match *self {
            Self::ExactThreshold { epsilon_bits } => mi_bits < epsilon_bits,
            Self::FixedThreshold { tau_bits } => mi_bits < tau_bits,
            Self::GTest {
                alpha,
                sample_count,
            } => {
                let df = ((cards.0 - 1) * (cards.1 - 1)) as f64;
                g_statistic(mi_bits, sample_count) <= chi_square_critical(df, alpha)
            }
        }
    }

    /// True when conditional information `I(a, c | b)` (bits) is judged to
    /// exceed noise — the degenerate-mode collider signal.
    fn judge_conditional_dependent(&self, cmi_bits: f64, cards: (usize, usize, usize)) -> bool {
        match *self {
            Self::ExactThreshold { epsilon_bits } => cmi_bits > epsilon_bits,
            Self::FixedThreshold { tau_bits } => cmi_bits > tau_bits,
            Self::GTest {
                alpha,
                sample_count,
            } => {
                let df = ((cards.0 - 1) * (cards.1 - 1) * cards.2) as f64;
                g_statistic(cmi_bits, sample_count) > chi_square_critical(df, alpha)
            }
        }
    }
}

fn g_statistic(information_bits: f64, sample_count: u64) -> f64 {
    2.0 * sample_count as f64 * std::f64::consts::LN_2 * information_bits
}

fn chi_square_critical(df: f64, alpha: f64) -> f64 {
    ChiSquared::new(df)
        .expect("degrees of freedom are positive")
        .inverse_cdf(1.0 - alpha)
}

fn validate_distinct(src: &DistributionSource, indices: &[usize]) -> Result<()> {
    let n = src.n_variables();
    for (k, &i) in indices.iter().enumerate() {
        if i >= n {
            return Err(Error::InvalidInput(format!(
                "variable index {i} out of range for {n} variables"
            )));
        }
        if indices[..k].contains(&i) {
            return Err(Error::InvalidInput(format!(
                "variable index {i} used twice; the variables must be distinct"
            )));
        }
    }
    Ok(())
}

/// Does the oracle judge variables `i` and `j` marginally independent?
pub fn independent(
    src: &DistributionSource,
    i: usize,
    j: usize,
    oracle: &IndependenceOracle,
) -> Result<bool> {
    validate_distinct(src, &[i, j])?;
    oracle.check_source(src)?;
    let table = pair_marginal(src, i, j)?;
    let mi = mutual_information(&table);
    Ok(oracle.judge_pair_independent(mi, table.cards()))
}

/// What an adjacent triplet `a - b - c` looks like from the distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TripletClass {
    /// `a -> b <- c`: both outer variables are parents of the middle one.
    Collider,
    /// A chain or fork; the two are indistinguishable from the joint alone.
    ChainOrFork,
}

/// Classifies the adjacent triplet `a - b - c` (both edges assumed present
/// in the skeleton under study). Normal mode calls it a collider when the
/// endpoints are marginally independent; degenerate mode instead requires
/// the endpoints to stay dependent given the middle node, which keeps
/// working when marginal weights vanish.
pub fn classify_triplet(
    src: &DistributionSource,
    a: usize,
    b: usize,
    c: usize,
    oracle: &IndependenceOracle,
    degenerate_mode: bool,
) -> Result<TripletClass> {
    validate_distinct(src, &[a, b, c])?;
    oracle.check_source(src)?;
    let collider = if degenerate_mode {
        let table = triple_marginal(src, a, c, b)?;
        let cmi = conditional_mutual_information(&table);
        oracle.judge_conditional_dependent(cmi, table.cards())
    } else {
        let table = pair_marginal(src, a, c)?;
        oracle.judge_pair_independent(mutual_information(&table), table.cards())
    };
    Ok(if collider {
        TripletClass::Collider
    } else {
        TripletClass::ChainOrFork
    })
}

/// Which side of an oriented edge a newly resolved neighbor lands on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NeighborRole {
    Parent,
    Child,
}

/// Resolves the unoriented skeleton edge `b - d` given that `known_parent`
/// is already an oriented parent of `b`: `d` is a parent exactly when it is
/// independent of the known parent, else a child.
pub fn resolve_neighbor(
    src: &DistributionSource,
    b: usize,
    known_parent: usize,
    d: usize,
    oracle: &IndependenceOracle,
    degenerate_mode: bool,
) -> Result<NeighborRole> {
    validate_distinct(src, &[b, known_parent, d])?;
    match classify_triplet(src, known_parent, b, d, oracle, degenerate_mode)? {
        TripletClass::Collider => Ok(NeighborRole::Parent),
        TripletClass::ChainOrFork => Ok(NeighborRole::Child),
    }
}

/// Orientation state of one skeleton edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeState {
    Directed { from: usize, to: usize },
    /// The distribution does not determine this edge's direction; external
    /// semantics are needed.
    Undetermined,
}

/// The outcome of directionality recovery over a skeleton.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveredStructure {
    skeleton: Skeleton,
    edge_states: Vec<EdgeState>,
    basins: Vec<Vec<(usize, usize)>>,
    warnings: Vec<String>,
}

impl RecoveredStructure {
    pub fn skeleton(&self) -> &Skeleton {
        &self.skeleton
    }

    /// One state per skeleton edge, parallel to `skeleton().edges()`.
    pub fn edge_states(&self) -> &[EdgeState] {
        &self.edge_states
    }

    /// State of the edge between `u` and `v`, if such an edge exists.
    pub fn state_of(&self, u: usize, v: usize) -> Option<EdgeState> {
        let e = (u.min(v), u.max(v));
        self.skeleton
            .edges()
            .binary_search(&e)
            .ok()
            .map(|k| self.edge_states[k])
    }

    /// All directed edges as `(from, to)`, sorted.
    pub fn directed_edges(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = self
            .edge_states
            .iter()
            .filter_map(|s| match s {
                EdgeState::Directed { from, to } => Some((*from, *to)),
                EdgeState::Undetermined => None,
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// All undetermined edges as `(low, high)`, sorted.
    pub fn undetermined_edges(&self) -> Vec<(usize, usize)> {
        self.skeleton
            .edges()
            .iter()
            .zip(&self.edge_states)
            .filter_map(|(&e, s)| (*s == EdgeState::Undetermined).then_some(e))
            .collect()
    }

    /// Directed-edge groups, one per recovered causal basin (connected
    /// components of the directed edges).
    pub fn basins(&self) -> &[Vec<(usize, usize)>] {
        &self.basins
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }
}

/// Recovers every orientation the distribution supports, sweeping from the
/// outermost internal nodes inward.
///
/// Internal nodes are visited layer by layer (layer 0 holds the leaves;
/// layer k the nodes that become leaves once layers below k are deleted).
/// At each node whose edges are still unoriented, unoriented neighbor pairs
/// are tested for the collider signature; a hit orients those two edges
/// inward and resolves the node's remaining branches against the first
/// discovered parent. Every node that acquires an incoming arrow then has
/// its own remaining branches resolved the same way, and so on until
/// quiescence — sweeping each causal basin in full. Edges never reached are
/// labeled [`EdgeState::Undetermined`] and listed in a warning as needing
/// external semantics.
///
/// Oracle contradictions (a neighbor whose verdicts differ across discovered
/// parents, or a would-be parent pair the oracle judges dependent) are
/// reported as warnings and leave the affected edge undetermined; they never
/// abort the sweep.
pub fn recover_directions(
    src: &DistributionSource,
    skeleton: &Skeleton,
    oracle: &IndependenceOracle,
    degenerate_mode: bool,
) -> Result<RecoveredStructure> {
    if skeleton.n() != src.n_variables() {
        return Err(Error::InvalidInput(format!(
            "skeleton covers {} nodes but the source has {} variables",
            skeleton.n(),
            src.n_variables()
        )));
    }
    oracle.check_source(src)?;

    let n = skeleton.n();
    let mut warnings = Vec::new();
    let names: Vec<String> = src
        .variables()
        .iter()
        .map(|v| v.name().to_string())
        .collect();

    for group in skeleton.tie_groups() {
        let listed = group
            .edges
            .iter()
            .map(|&(u, v)| format!("{}-{}", names[u], names[v]))
            .collect::<Vec<_>>()
            .join(", ");
        warnings.push(format!(
            "weight tie: candidate edges {listed} have weights within tolerance \
             ({:.6}..{:.6} bits); the selected skeleton depends on the tie-breaking rule",
            group.min_weight_bits, group.max_weight_bits
        ));
    }
    if !degenerate_mode && !skeleton.tie_groups().is_empty() {
        warnings.push(
            "weight ties detected: consider degenerate mode, which classifies \
             triplets by conditional information instead of marginal weights"
                .into(),
        );
    }

    if skeleton.edges().is_empty() {
        return Ok(RecoveredStructure {
            skeleton: skeleton.clone(),
            edge_states: Vec::new(),
            basins: Vec::new(),
            warnings,
        });
    }

    let mut sweep = Sweep::new(src, skeleton, oracle, degenerate_mode, names, warnings)?;

    // Scan internal nodes from the outermost layer inward; ties within a
    // layer break by node index so the sweep is deterministic.
    let layers = peel_layers(&sweep.adj);
    let mut scan: Vec<usize> = (0..n).filter(|&i| sweep.adj[i].len() >= 2).collect();
    scan.sort_by_key(|&i| (layers[i], i));

    for &b in &scan {
        if sweep.in_parents[b].is_empty() {
            sweep.try_discover(b)?;
        }
        sweep.drain()?;
    }

    let Sweep {
        states,
        conflicted: _,
        mut warnings,
        names,
        ..
    } = sweep;

    let edge_states: Vec<EdgeState> = states
        .iter()
        .map(|s| match s {
            Some((from, to)) => EdgeState::Directed {
                from: *from,
                to: *to,
            },
            None => EdgeState::Undetermined,
        })
        .collect();

    let undetermined: Vec<(usize, usize)> = skeleton
        .edges()
        .iter()
        .zip(&edge_states)
        .filter_map(|(&e, s)| (*s == EdgeState::Undetermined).then_some(e))
        .collect();
    if !undetermined.is_empty() {
        let listed = undetermined
            .iter()
            .map(|&(u, v)| format!("{}-{}", names[u], names[v]))
            .collect::<Vec<_>>()
            .join(", ");
        warnings.push(format!(
            "undetermined edges need external semantics to orient: {listed}"
        ));
    }

    let basins = group_directed_components(n, &edge_states);

    Ok(RecoveredStructure {
        skeleton: skeleton.clone(),
        edge_states,
        basins,
        warnings,
    })
}

/// Distance of each node from the outside of the tree: layer 0 holds the
/// leaves, layer k the nodes that become leaves after deleting all layers
/// below k.
fn peel_layers(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut degree: Vec<usize> = adj.iter().map(|a| a.len()).collect();
    let mut layer = vec![0usize; n];
    let mut peeled = vec![false; n];
    let mut current: Vec<usize> = (0..n).filter(|&i| degree[i] <= 1).collect();
    let mut k = 0;
    while !current.is_empty() {
        for &v in &current {
            layer[v] = k;
            peeled[v] = true;
        }
        let mut next = Vec::new();
        for &v in &current {
            for &w in &adj[v] {
                if !peeled[w] {
                    degree[w] -= 1;
                    if degree[w] <= 1 && !next.contains(&w) {
                        next.push(w);
                    }
                }
            }
        }
        current = next;
        k += 1;
    }
    layer
}

fn group_directed_components(n: usize, edge_states: &[EdgeState]) -> Vec<Vec<(usize, usize)>> {
    let directed: Vec<(usize, usize)> = edge_states
        .iter()
        .filter_map(|s| match s {
            EdgeState::Directed { from, to } => Some((*from, *to)),
            EdgeState::Undetermined => None,
        })
        .collect();
    let mut dsu = UnionFind::new(n);
    for &(u, v) in &directed {
        dsu.union(u, v);
    }
    let mut groups: HashMap<usize, Vec<(usize, usize)>> = HashMap::new();
    for &(u, v) in &directed {
        groups.entry(dsu.find(u)).or_default().push((u, v));
    }
    let mut basins: Vec<Vec<(usize, usize)>> = groups.into_values().collect();
    for basin in &mut basins {
        basin.sort_unstable();
    }
    basins.sort_by_key(|b| b[0]);
    basins
}

/// Mutable sweep state: orientation per skeleton edge, discovered parents
/// per node, and a queue of nodes whose remaining branches await
/// resolution.
struct Sweep<'a> {
    src: &'a DistributionSource,
    oracle: &'a IndependenceOracle,
    degenerate: bool,
    cards: Vec<usize>,
    pair_mi: Vec<f64>,
    cmi_cache: HashMap<(usize, usize, usize), f64>,
    adj: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
    states: Vec<Option<(usize, usize)>>,
    conflicted: Vec<bool>,
    in_parents: Vec<Vec<usize>>,
    queue: VecDeque<usize>,
    warnings: Vec<String>,
    names: Vec<String>,
}

impl<'a> Sweep<'a> {
    fn new(
        src: &'a DistributionSource,
        skeleton: &Skeleton,
        oracle: &'a IndependenceOracle,
        degenerate: bool,
        names: Vec<String>,
        warnings: Vec<String>,
    ) -> Result<Self> {
        let n = skeleton.n();
        // One pass over the source funds every marginal-independence test
        // the sweep will make.
        let pair_mi: Vec<f64> = all_pair_tables(src)?
            .iter()
            .map(mutual_information)
            .collect();
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in skeleton.edges() {
            adj[u].push(v);
            adj[v].push(u);
        }
        adj.iter_mut().for_each(|a| a.sort_unstable());
        Ok(Self {
            src,
            oracle,
            degenerate,
            cards: src.variables().iter().map(|v| v.cardinality()).collect(),
            pair_mi,
            cmi_cache: HashMap::new(),
            adj,
            edges: skeleton.edges().to_vec(),
            states: vec![None; skeleton.edges().len()],
            conflicted: vec![false; skeleton.edges().len()],
            in_parents: vec![Vec::new(); n],
            queue: VecDeque::new(),
            warnings,
            names,
        })
    }

    fn edge_id(&self, u: usize, v: usize) -> usize {
        self.edges
            .binary_search(&(u.min(v), u.max(v)))
            .expect("sweep only visits skeleton edges")
    }

    fn pair_independent(&self, i: usize, j: usize) -> bool {
        let n = self.cards.len();
        let mi = self.pair_mi[pair_index(n, i.min(j), i.max(j))];
        self.oracle
            .judge_pair_independent(mi, (self.cards[i], self.cards[j]))
    }

    /// The collider signature for the adjacent triplet `a - b - c`.
    fn collider_signal(&mut self, a: usize, b: usize, c: usize) -> Result<bool> {
        if !self.degenerate {
            return Ok(self.pair_independent(a, c));
        }
        let key = (a.min(c), a.max(c), b);
        let cmi = match self.cmi_cache.get(&key) {
            Some(&v) => v,
            None => {
                let table = triple_marginal(self.src, key.0, key.1, b)?;
                let v = conditional_mutual_information(&table);
                self.cmi_cache.insert(key, v);
                v
            }
        };
        Ok(self.oracle.judge_conditional_dependent(
            cmi,
            (self.cards[key.0], self.cards[key.1], self.cards[b]),
        ))
    }

    fn unoriented_neighbors(&self, b: usize) -> Vec<usize> {
        self.adj[b]
            .iter()
            .copied()
            .filter(|&d| {
                let e = self.edge_id(b, d);
                self.states[e].is_none() && !self.conflicted[e]
            })
            .collect()
    }

    /// Orients `from -> to` and queues `to` for branch resolution.
    fn commit(&mut self, from: usize, to: usize) {
        let e = self.edge_id(from, to);
        debug_assert!(self.states[e].is_none());
        self.states[e] = Some((from, to));
        self.in_parents[to].push(from);
        self.queue.push_back(to);
    }

    /// Tests unoriented neighbor pairs of `b` (lexicographically) for the
    /// collider signature; the first hit orients both edges into `b`.
    fn try_discover(&mut self, b: usize) -> Result<()> {
        let candidates = self.unoriented_neighbors(b);
        for x in 0..candidates.len() {
            for y in x + 1..candidates.len() {
                let (a, c) = (candidates[x], candidates[y]);
                if !self.collider_signal(a, b, c)? {
                    continue;
                }
                // A committed parent pair must also be marginally
                // independent (in normal mode this is the signal itself).
                if self.degenerate && !self.pair_independent(a, c) {
                    continue;
                }
                self.commit(a, b);
                self.commit(c, b);
                return Ok(());
            }
        }
        Ok(())
    }

    /// Resolves every remaining branch of nodes in the queue until nothing
    /// new is oriented.
    fn drain(&mut self) -> Result<()> {
        while let Some(v) = self.queue.pop_front() {
            self.resolve_node(v)?;
        }
        Ok(())
    }

    /// Classifies each unoriented neighbor of `v` against the first
    /// discovered parent, cross-checking against the others where the
    /// source is exact, and enforcing that committed parent pairs stay
    /// mutually independent.
    fn resolve_node(&mut self, v: usize) -> Result<()> {
        if self.in_parents[v].is_empty() {
            return Ok(());
        }
        let witness = self.in_parents[v][0];
        for d in self.unoriented_neighbors(v) {
            let is_parent = self.collider_signal(witness, v, d)?;

            // With an exact source every discovered parent must give the
            // same verdict; a split vote is an oracle contradiction.
            if self.src.is_exact() {
                let others: Vec<usize> = self.in_parents[v][1..].to_vec();
                let mut contradiction = None;
                for p in others {
                    if self.collider_signal(p, v, d)? != is_parent {
                        contradiction = Some(p);
                        break;
                    }
                }
                if let Some(p) = contradiction {
                    let e = self.edge_id(v, d);
                    self.conflicted[e] = true;
                    self.warnings.push(format!(
                        "orientation conflict at {}: {} is judged {} of parent {} but \
                         not of parent {}; edge {}-{} left undetermined",
                        self.names[v],
                        self.names[d],
                        if is_parent { "independent" } else { "dependent" },
                        self.names[witness],
                        self.names[p],
                        self.names[v.min(d)],
                        self.names[v.max(d)],
                    ));
                    continue;
                }
            }

            if is_parent {
                // Structure invariant: no node may end up with two parents
                // the oracle judges dependent.
                let dependent_with = self.in_parents[v]
                    .iter()
                    .copied()
                    .find(|&p| !self.pair_independent(p, d));
                if let Some(p) = dependent_with {
                    let e = self.edge_id(v, d);
                    self.conflicted[e] = true;
                    self.warnings.push(format!(
                        "orientation conflict at {}: would-be parents {} and {} are \
                         judged dependent; edge {}-{} left undetermined",
                        self.names[v],
                        self.names[p],
                        self.names[d],
                        self.names[v.min(d)],
                        self.names[v.max(d)],
                    ));
                    continue;
                }
                self.commit(d, v);
            } else {
                self.commit(v, d);
            }
        }
        Ok(())
    }
}

/// The ground-truth causal basins of a model: each multi-parent node seeds a
/// region holding the edges into it, the edges into every descendant of it,
/// and nothing else; overlapping regions merge. Returns each basin's
/// directed edges, sorted, basins ordered by their smallest edge.
pub fn causal_basins(model: &Polytree) -> Vec<Vec<(usize, usize)>> {
    let n = model.n_variables();
    // covered[w]: w is a multi-parent node or a descendant of one, so every
    // edge into w belongs to a basin.
    let mut covered = vec![false; n];
    for m in 0..n {
        if model.parents(m).len() < 2 {
            continue;
        }
        let mut stack = vec![m];
        covered[m] = true;
        while let Some(u) = stack.pop() {
            for c in model.children(u) {
                if !covered[c] {
                    covered[c] = true;
                    stack.push(c);
                }
            }
        }
    }
    let mut dsu = UnionFind::new(n);
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for w in (0..n).filter(|&w| covered[w]) {
        for &p in model.parents(w) {
            edges.push((p, w));
            dsu.union(p, w);
        }
    }
    let mut groups: HashMap<usize, Vec<(usize, usize)>> = HashMap::new();
    for &(u, v) in &edges {
        groups.entry(dsu.find(u)).or_default().push((u, v));
    }
    let mut basins: Vec<Vec<(usize, usize)>> = groups.into_values().collect();
    for basin in &mut basins {
        basin.sort_unstable();
    }
    basins.sort_by_key(|b| b[0]);
    basins
}
