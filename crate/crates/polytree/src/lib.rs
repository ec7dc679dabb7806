//! Recovery of poly-tree Bayesian networks from joint distributions.
//!
//! A poly-tree is a directed acyclic graph whose underlying undirected
//! graph is a tree — nodes may have several parents, but there is at most
//! one path between any two nodes. When data is generated by such a model,
//! a surprising amount of its structure can be read back off the joint
//! distribution alone:
//!
//! 1. **Skeleton** — the undirected tree is a maximum-weight spanning tree
//!    under pairwise mutual information ([`skeleton::mwst`]). Ties in the
//!    weights mark distributions whose skeleton is not identifiable and are
//!    reported rather than silently broken.
//! 2. **Orientation** — multi-parent nodes betray themselves: their parents
//!    are mutually independent while every other adjacent pair is
//!    dependent. [`orient::recover_directions`] finds each such collider
//!    and sweeps direction outward through its causal basin; edges outside
//!    every basin are provably unorientable from the distribution and come
//!    back [`orient::EdgeState::Undetermined`].
//! 3. **Estimation** — [`estimate::complete_orientation`] extends the
//!    partial orientation to a full tree (honoring user overrides), and
//!    [`estimate::fit_parameters`] fits conditional probability tables so
//!    that exact inputs are reproduced exactly and sampled inputs get
//!    maximum-likelihood (optionally smoothed) estimates.
//!
//! Distributions enter through [`model::DistributionSource`]: an exact
//! factored model, an exact explicit joint table, or an empirical dataset
//! of samples. Independence judgments are pluggable via
//! [`orient::IndependenceOracle`] — thresholds for exact arithmetic, a
//! G-test for samples.

pub mod error;
pub mod estimate;
pub mod info;
pub mod model;
pub mod orient;
pub mod skeleton;

pub use error::{Error, Result};
pub use estimate::{
    complete_orientation, fit_parameters, DirectedTree, FittedModel, OrientationOverride,
};
pub use info::{
    closeness, conditional_mutual_information, mutual_information, Closeness, PairTable,
    TripleTable,
};
pub use model::{
    check_nondegeneracy, pair_marginal, random_polytree, triple_marginal, Dataset,
    DistributionSource, NondegeneracyReport, Polytree, VariableSpec,
};
pub use orient::{
    causal_basins, classify_triplet, independent, recover_directions, resolve_neighbor,
    EdgeState, IndependenceOracle, NeighborRole, RecoveredStructure, TripletClass,
};
pub use skeleton::{compute_weights, mwst, Skeleton, TieGroup, WeightedEdgeSet};
