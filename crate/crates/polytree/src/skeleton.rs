//! Skeleton recovery: pairwise information weights and the maximum-weight
//! spanning tree over them.
//!
//! For distributions generated by a poly-tree, every non-adjacent pair
//! carries no more information than the weakest edge on the path joining it,
//! so a maximum-weight spanning tree over pairwise mutual information
//! recovers the undirected structure whenever those inequalities are strict.
//! Near-ties are where that guarantee frays; the tree builder therefore
//! reports every cluster of near-equal candidate weights whose members'
//! accept/reject fates differ, since breaking such a tie differently could
//! change the returned skeleton.

use crate::error::{Error, Result};
use crate::info::mutual_information;
use crate::model::marginal::{all_pair_tables, pair_index};
use crate::model::{DistributionSource, UnionFind};

/// Default tie tolerance for exact sources, in bits.
pub const DEFAULT_EXACT_TIE_TOLERANCE_BITS: f64 = 1e-9;
/// Default tie tolerance for empirical sources, in bits.
pub const DEFAULT_EMPIRICAL_TIE_TOLERANCE_BITS: f64 = 1e-4;

/// Mutual information, in bits, for every unordered variable pair.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedEdgeSet {
    n: usize,
    weights: Vec<f64>,
}

impl WeightedEdgeSet {
    /// Builds from a flat triangular weight list in the order
    /// `(0,1), (0,2), ..., (0,n-1), (1,2), ...`.
    pub fn from_flat(n: usize, weights: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput("need at least two nodes".into()));
        }
        if weights.len() != n * (n - 1) / 2 {
            return Err(Error::InvalidInput(format!(
                "expected {} pair weights for {n} nodes, got {}",
                n * (n - 1) / 2,
                weights.len()
            )));
        }
        for (k, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "pair weight {k} is {w}; weights must be non-negative and finite"
                )));
            }
        }
        Ok(Self { n, weights })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Weight of the unordered pair `(i, j)`.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        assert!(i != j && i < self.n && j < self.n, "invalid pair ({i}, {j})");
        self.weights[pair_index(self.n, i.min(j), i.max(j))]
    }

    /// Iterates `(i, j, weight)` with `i < j` in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            (i + 1..self.n).map(move |j| (i, j, self.weight(i, j)))
        })
    }
}

/// Computes the mutual information of every variable pair in one pass over
/// the source.
pub fn compute_weights(src: &DistributionSource) -> Result<WeightedEdgeSet> {
    let tables = all_pair_tables(src)?;
    Ok(WeightedEdgeSet {
        n: src.n_variables(),
        weights: tables.iter().map(mutual_information).collect(),
    })
}

/// A cluster of candidate pairs whose weights agree within the tie
/// tolerance but whose accept/reject fates differ, so the returned skeleton
/// depends on the tie-breaking rule.
#[derive(Debug, Clone, PartialEq)]
pub struct TieGroup {
    /// Member candidate pairs, lexicographically sorted.
    pub edges: Vec<(usize, usize)>,
    /// Largest weight in the cluster, in bits.
    pub max_weight_bits: f64,
    /// Smallest weight in the cluster, in bits.
    pub min_weight_bits: f64,
}

/// An undirected recovered structure: an acyclic edge set plus any weight
/// ties observed while building it.
#[derive(Debug, Clone, PartialEq)]
pub struct Skeleton {
    n: usize,
    edges: Vec<(usize, usize)>,
    tie_groups: Vec<TieGroup>,
}

impl Skeleton {
    /// Wraps a known undirected structure. The edges must form a spanning
    /// tree: distinct, in range, acyclic, and exactly `n - 1` of them. No
    /// tie information is attached.
    pub fn from_edges(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidInput("need at least one node".into()));
        }
        if edges.len() != n - 1 {
            return Err(Error::InvalidInput(format!(
                "a spanning tree over {n} nodes has {} edges, got {}",
                n - 1,
                edges.len()
            )));
        }
        let mut normalized: Vec<(usize, usize)> = Vec::with_capacity(edges.len());
        let mut dsu = UnionFind::new(n);
        for (u, v) in edges {
            if u == v || u >= n || v >= n {
                return Err(Error::InvalidInput(format!(
                    "invalid edge ({u}, {v}) for {n} nodes"
                )));
            }
            let e = (u.min(v), u.max(v));
            if !dsu.union(e.0, e.1) {
                return Err(Error::InvalidInput(format!(
                    "edge {e:?} closes a cycle or repeats; the skeleton must be a tree"
                )));
            }
            normalized.push(e);
        }
        normalized.sort_unstable();
        Ok(Self {
            n,
            edges: normalized,
            tie_groups: Vec::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Edges `(low, high)`, lexicographically sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn contains_edge(&self, u: usize, v: usize) -> bool {
        self.edges.binary_search(&(u.min(v), u.max(v))).is_ok()
    }

    pub fn tie_groups(&self) -> &[TieGroup] {
        &self.tie_groups
    }

    pub fn neighbors(&self, u: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == u {
                    Some(b)
                } else if b == u {
                    Some(a)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Fate {
    Accepted,
    Rejected,
    Unexamined,
}

/// Builds the maximum-weight spanning tree by greedy accumulation: candidate
/// pairs are taken in descending weight order (ties broken lexicographically
/// by pair) and accepted unless they would close a cycle.
///
/// Any cluster of candidates within `tie_tolerance_bits` of one another that
/// mixes accepted and non-accepted members is reported as a [`TieGroup`],
/// because a different tie-breaking rule could have produced a different
/// tree.
pub fn mwst(weights: &WeightedEdgeSet, tie_tolerance_bits: f64) -> Result<Skeleton> {
    if !tie_tolerance_bits.is_finite() || tie_tolerance_bits < 0.0 {
        return Err(Error::InvalidInput(format!(
            "tie tolerance must be non-negative and finite, got {tie_tolerance_bits}"
        )));
    }
    let n = weights.n;
    if n < 2 {
        return Err(Error::InvalidInput(
            "spanning-tree recovery needs at least two nodes".into(),
        ));
    }
    let mut candidates: Vec<(usize, usize, f64)> = weights.iter().collect();
    candidates.sort_by(|a, b| {
        b.2.partial_cmp(&a.2)
            .expect("weights are finite")
            .then_with(|| (a.0, a.1).cmp(&(b.0, b.1)))
    });

    let mut dsu = UnionFind::new(n);
    let mut fates = vec![Fate::Unexamined; candidates.len()];
    let mut edges: Vec<(usize, usize)> = Vec::with_capacity(n.saturating_sub(1));
    for (k, &(i, j, _)) in candidates.iter().enumerate() {
        if edges.len() + 1 == n {
            break;
        }
        if dsu.union(i, j) {
            fates[k] = Fate::Accepted;
            edges.push((i, j));
        } else {
            fates[k] = Fate::Rejected;
        }
    }
    if edges.len() != n - 1 {
        return Err(Error::Internal(format!(
            "spanning tree over a complete graph accepted {} of {} edges",
            edges.len(),
            n - 1
        )));
    }
    edges.sort_unstable();

    // Cluster consecutive candidates whose weight gap is within tolerance.
    let mut tie_groups = Vec::new();
    let mut start = 0;
    while start < candidates.len() {
        let mut end = start + 1;
        while end < candidates.len()
            && candidates[end - 1].2 - candidates[end].2 <= tie_tolerance_bits
        {
            end += 1;
        }
        if end - start >= 2 {
            let members = &fates[start..end];
            let any_accepted = members.contains(&Fate::Accepted);
            let any_other = members.iter().any(|&f| f != Fate::Accepted);
            if any_accepted && any_other {
                let mut group: Vec<(usize, usize)> = candidates[start..end]
                    .iter()
                    .map(|&(i, j, _)| (i, j))
                    .collect();
                group.sort_unstable();
                tie_groups.push(TieGroup {
                    edges: group,
                    max_weight_bits: candidates[start].2,
                    min_weight_bits: candidates[end - 1].2,
                });
            }
        }
        start = end;
    }

    Ok(Skeleton {
        n,
        edges,
        tie_groups,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Polytree, VariableSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spec(name: &str, card: usize) -> VariableSpec {
        VariableSpec::new(name, card).unwrap()
    }

    #[test]
    fn hand_weights_give_the_expected_tree_with_no_ties() {
        // (0,1)=0.5, (0,2)=0.2, (1,2)=0.4 -> keep (0,1) and (1,2).
        let w = WeightedEdgeSet::from_flat(3, vec![0.5, 0.2, 0.4]).unwrap();
        let sk = mwst(&w, DEFAULT_EXACT_TIE_TOLERANCE_BITS).unwrap();
        assert_eq!(sk.edges(), &[(0, 1), (1, 2)]);
        assert!(sk.tie_groups().is_empty());
        assert!(sk.contains_edge(2, 1));
        assert!(!sk.contains_edge(0, 2));
    }

    fn copy_chain3() -> Polytree {
        // X -> Y -> Z, all deterministic copies of a fair coin.
        let copy = vec![1.0, 0.0, 0.0, 1.0];
        Polytree::new(
            vec![spec("X", 2), spec("Y", 2), spec("Z", 2)],
            vec![vec![], vec![0], vec![1]],
            vec![vec![0.5, 0.5], copy.clone(), copy],
        )
        .unwrap()
    }

    #[test]
    fn deterministic_chain_weights_are_all_one_bit() {
        let src = DistributionSource::from_model(copy_chain3());
        let w = compute_weights(&src).unwrap();
        for (i, j, bits) in w.iter() {
            assert_eq!(bits, 1.0, "pair ({i}, {j})");
        }
    }

    #[test]
    fn deterministic_chain_reports_a_tie_across_all_candidate_pairs() {
        let src = DistributionSource::from_model(copy_chain3());
        let w = compute_weights(&src).unwrap();
        let sk = mwst(&w, DEFAULT_EXACT_TIE_TOLERANCE_BITS).unwrap();
        assert_eq!(sk.edges().len(), 2);
        // Lexicographic tie-breaking keeps (0,1) and (0,2).
        assert_eq!(sk.edges(), &[(0, 1), (0, 2)]);
        assert_eq!(sk.tie_groups().len(), 1);
        let group = &sk.tie_groups()[0];
        assert_eq!(group.edges, vec![(0, 1), (0, 2), (1, 2)]);
        assert_eq!(group.max_weight_bits, 1.0);
        assert_eq!(group.min_weight_bits, 1.0);
    }

    #[test]
    fn equal_weight_edges_that_are_all_accepted_are_not_a_tie() {
        // B = A OR C: both true edges carry the same weight, the non-edge
        // (A, C) carries zero. No tie-break decision affects the result.
        let or_gate = Polytree::new(
            vec![spec("A", 2), spec("B", 2), spec("C", 2)],
            vec![vec![], vec![0, 2], vec![]],
            vec![
                vec![0.5, 0.5],
                vec![1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0],
                vec![0.5, 0.5],
            ],
        )
        .unwrap();
        let src = DistributionSource::from_model(or_gate);
        let w = compute_weights(&src).unwrap();
        assert_eq!(w.weight(0, 1).to_bits(), w.weight(1, 2).to_bits());
        assert!(w.weight(0, 2) < 1e-12);
        let sk = mwst(&w, DEFAULT_EXACT_TIE_TOLERANCE_BITS).unwrap();
        assert_eq!(sk.edges(), &[(0, 1), (1, 2)]);
        assert!(sk.tie_groups().is_empty());
    }

    #[test]
    fn compute_weights_agrees_with_individual_pair_information() {
        use crate::info::mutual_information;
        use crate::model::pair_marginal;
        let m = Polytree::new(
            vec![spec("A", 3), spec("B", 2), spec("C", 2)],
            vec![vec![], vec![0], vec![1]],
            vec![
                vec![0.5, 0.3, 0.2],
                vec![0.9, 0.1, 0.4, 0.6, 0.2, 0.8],
                vec![0.7, 0.3, 0.1, 0.9],
            ],
        )
        .unwrap();
        let src = DistributionSource::from_model(m);
        let w = compute_weights(&src).unwrap();
        for (i, j, bits) in w.iter() {
            let direct = mutual_information(&pair_marginal(&src, i, j).unwrap());
            assert_eq!(bits.to_bits(), direct.to_bits(), "pair ({i}, {j})");
        }
    }

    /// Decodes a node sequence into the labeled tree it encodes; every
    /// labeled tree on n nodes corresponds to exactly one length-(n-2)
    /// sequence, which lets the test enumerate all spanning trees.
    fn tree_from_sequence(seq: &[usize], n: usize) -> Vec<(usize, usize)> {
        let mut degree = vec![1usize; n];
        for &s in seq {
            degree[s] += 1;
        }
        let mut edges = Vec::with_capacity(n - 1);
        let mut leaves: std::collections::BinaryHeap<std::cmp::Reverse<usize>> = (0..n)
            .filter(|&i| degree[i] == 1)
            .map(std::cmp::Reverse)
            .collect();
        for &s in seq {
            let std::cmp::Reverse(leaf) = leaves.pop().unwrap();
            edges.push((leaf.min(s), leaf.max(s)));
            degree[s] -= 1;
            if degree[s] == 1 {
                leaves.push(std::cmp::Reverse(s));
            }
        }
        let std::cmp::Reverse(a) = leaves.pop().unwrap();
        let std::cmp::Reverse(b) = leaves.pop().unwrap();
        edges.push((a.min(b), a.max(b)));
        edges
    }

    #[test]
    fn greedy_tree_attains_the_exhaustive_maximum_weight() {
        let n = 5;
        let mut rng = ChaCha8Rng::seed_from_u64(5150);
        for trial in 0..40 {
            let flat: Vec<f64> = (0..n * (n - 1) / 2).map(|_| rng.random::<f64>()).collect();
            let w = WeightedEdgeSet::from_flat(n, flat).unwrap();
            let sk = mwst(&w, 0.0).unwrap();
            let total: f64 = sk.edges().iter().map(|&(i, j)| w.weight(i, j)).sum();

            // Exhaustive maximum over all 125 labeled trees on 5 nodes.
            let mut best = f64::NEG_INFINITY;
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        let tree = tree_from_sequence(&[a, b, c], n);
                        let sum: f64 = tree.iter().map(|&(i, j)| w.weight(i, j)).sum();
                        best = best.max(sum);
                    }
                }
            }
            assert!(
                (total - best).abs() < 1e-12,
                "trial {trial}: greedy {total} vs exhaustive {best}"
            );
        }
    }

    #[test]
    fn from_edges_rejects_cycles_and_duplicates() {
        assert!(Skeleton::from_edges(3, vec![(0, 1), (1, 2)]).is_ok());
        assert!(Skeleton::from_edges(3, vec![(0, 1), (1, 0)]).is_err());
        assert!(Skeleton::from_edges(3, vec![(0, 1), (1, 2), (2, 0)]).is_err());
        assert!(Skeleton::from_edges(3, vec![(0, 3)]).is_err());
    }

    #[test]
    fn neighbors_are_sorted() {
        let sk = Skeleton::from_edges(4, vec![(2, 1), (1, 0), (1, 3)]).unwrap();
        assert_eq!(sk.neighbors(1), vec![0, 2, 3]);
        assert_eq!(sk.neighbors(0), vec![1]);
    }

    #[test]
    fn weight_accessor_is_symmetric() {
        let w = WeightedEdgeSet::from_flat(3, vec![0.5, 0.2, 0.4]).unwrap();
        assert_eq!(w.weight(2, 0), 0.2);
        assert_eq!(w.weight(0, 2), 0.2);
    }

    #[test]
    fn negative_or_non_finite_weights_are_rejected() {
        assert!(WeightedEdgeSet::from_flat(3, vec![0.5, -0.1, 0.4]).is_err());
        assert!(WeightedEdgeSet::from_flat(3, vec![0.5, f64::NAN, 0.4]).is_err());
        assert!(mwst(
            &WeightedEdgeSet::from_flat(3, vec![0.5, 0.2, 0.4]).unwrap(),
            -1.0
        )
        .is_err());
    }
}
