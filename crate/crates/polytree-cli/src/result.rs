//! The result-file schema — the single record of a learn run. Evaluation
//! and DOT export both consume it, so everything they report or draw comes
//! from the same structure the learner wrote.
//!
//! Shape:
//!
//! ```json
//! {
//!   "variables": ["A", "B", "C"],
//!   "weights":   [[0, 1, 0.311], [0, 2, 0.0], [1, 2, 0.311]],
//!   "skeleton":  [[0, 1], [1, 2]],
//!   "edges":     [{"u": 0, "v": 1, "state": "directed", "from": 0},
//!                 {"u": 1, "v": 2, "state": "undetermined"}],
//!   "basins":    [[[0, 1], [2, 1]]],
//!   "warnings":  ["..."],
//!   "model":     { ... }
//! }
//! ```
//!
//! Indices refer to `variables` order. `skeleton` and `edges` are parallel
//! arrays; basin members are `[from, to]` pairs of directed edges. `model`
//! (optional) is a fitted model in the model-JSON format.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use polytree::orient::{EdgeState, RecoveredStructure};
use polytree::skeleton::{Skeleton, WeightedEdgeSet};
use polytree::{causal_basins, DistributionSource, Error, Polytree};

pub const STATE_DIRECTED: &str = "directed";
pub const STATE_UNDETERMINED: &str = "undetermined";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultFile {
    /// Variable names; indices elsewhere in the file refer to this order.
    pub variables: Vec<String>,
    /// Every candidate pair's weight in bits: `[i, j, bits]` with `i < j`.
    pub weights: Vec<(usize, usize, f64)>,
    /// Undirected recovered edges `[i, j]`, `i < j`, sorted.
    pub skeleton: Vec<(usize, usize)>,
    /// Per-edge orientation state, parallel to `skeleton`.
    pub edges: Vec<EdgeEntry>,
    /// Directed-edge groups, one per causal basin, as `[from, to]` pairs.
    pub basins: Vec<Vec<(usize, usize)>>,
    /// Tie reports, oracle conflicts, and external-semantics needs, verbatim.
    pub warnings: Vec<String>,
    /// Fitted model, present when learning ran with `--fit`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<serde_json::Value>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeEntry {
    pub u: usize,
    pub v: usize,
    /// `"directed"` or `"undetermined"`.
    pub state: String,
    /// The source endpoint of a directed edge (`u` or `v`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub from: Option<usize>,
}

impl EdgeEntry {
    pub fn is_directed(&self) -> bool {
        self.state == STATE_DIRECTED
    }

    /// `(from, to)` for a directed entry; `None` for an undetermined one.
    pub fn directed_pair(&self) -> Option<(usize, usize)> {
        if !self.is_directed() {
            return None;
        }
        let from = self.from?;
        let to = if from == self.u { self.v } else { self.u };
        Some((from, to))
    }
}

impl ResultFile {
    /// Assembles the record of one learn run.
    pub fn build(
        src: &DistributionSource,
        weights: &WeightedEdgeSet,
        recovered: &RecoveredStructure,
        warnings: Vec<String>,
        fitted: Option<&Polytree>,
    ) -> Self {
        let edges = recovered
            .skeleton()
            .edges()
            .iter()
            .zip(recovered.edge_states())
            .map(|(&(u, v), state)| match *state {
                EdgeState::Directed { from, .. } => EdgeEntry {
                    u,
                    v,
                    state: STATE_DIRECTED.into(),
                    from: Some(from),
                },
                EdgeState::Undetermined => EdgeEntry {
                    u,
                    v,
                    state: STATE_UNDETERMINED.into(),
                    from: None,
                },
            })
            .collect();
        ResultFile {
            variables: src
                .variables()
                .iter()
                .map(|v| v.name().to_string())
                .collect(),
            weights: weights.iter().collect(),
            skeleton: recovered.skeleton().edges().to_vec(),
            edges,
            basins: recovered.basins().to_vec(),
            warnings,
            model: fitted.map(|m| {
                serde_json::from_str(&m.to_json_string()).expect("model JSON re-parses")
            }),
        }
    }

    /// Deterministic serialization: two-space pretty JSON, fixed key order,
    /// trailing newline.
    pub fn to_json_string(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("result serializes");
        text.push('\n');
        text
    }

    pub fn save(&self, path: &Path) -> Result<(), Error> {
        std::fs::write(path, self.to_json_string()).map_err(|e| annotate_io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| annotate_io(path, e))?;
        let file: ResultFile = serde_json::from_str(&text)
            .map_err(|e| Error::Parse(format!("result JSON: {e}")))?;
        file.validate()?;
        Ok(file)
    }

    /// Structural sanity for externally supplied result files: indices in
    /// range, a spanning-tree skeleton mirrored by the edge entries, edge
    /// states well-formed, and basins that partition the directed edges.
    fn validate(&self) -> Result<(), Error> {
        let n = self.variables.len();
        let bad = |msg: String| Error::Parse(format!("result JSON: {msg}"));
        if n == 0 {
            return Err(bad("no variables listed".into()));
        }
        for &(i, j, w) in &self.weights {
            if i >= n || j >= n || i == j {
                return Err(bad(format!("weight entry [{i}, {j}] is not a variable pair")));
            }
            if !w.is_finite() {
                return Err(bad(format!("weight of pair [{i}, {j}] is not finite")));
            }
        }
        Skeleton::from_edges(n, self.skeleton.clone())
            .map_err(|e| bad(format!("skeleton: {e}")))?;
        if self.edges.len() != self.skeleton.len() {
            return Err(bad(format!(
                "{} edge entries for {} skeleton edges; the arrays are parallel",
                self.edges.len(),
                self.skeleton.len()
            )));
        }
        for (entry, &(s, t)) in self.edges.iter().zip(&self.skeleton) {
            let (u, v) = (entry.u.min(entry.v), entry.u.max(entry.v));
            if (u, v) != (s.min(t), s.max(t)) {
                return Err(bad(format!(
                    "edge entry {}-{} does not match skeleton edge {s}-{t}",
                    entry.u, entry.v
                )));
            }
            match entry.state.as_str() {
                STATE_DIRECTED => {
                    let from = entry.from.ok_or_else(|| {
                        bad(format!("directed edge {u}-{v} is missing \"from\""))
                    })?;
                    if from != entry.u && from != entry.v {
                        return Err(bad(format!(
                            "directed edge {u}-{v} lists \"from\": {from}, which is \
                             neither endpoint"
                        )));
                    }
                }
                STATE_UNDETERMINED => {
                    if entry.from.is_some() {
                        return Err(bad(format!(
                            "undetermined edge {u}-{v} must not carry \"from\""
                        )));
                    }
                }
                other => {
                    return Err(bad(format!(
                        "edge {u}-{v} has unknown state {other:?}; expected \
                         \"directed\" or \"undetermined\""
                    )));
                }
            }
        }
        let directed: BTreeSet<(usize, usize)> = self
            .edges
            .iter()
            .filter_map(EdgeEntry::directed_pair)
            .collect();
        let mut in_basins: BTreeSet<(usize, usize)> = BTreeSet::new();
        for basin in &self.basins {
            if basin.is_empty() {
                return Err(bad("empty basin listed".into()));
            }
            for &(f, t) in basin {
                if !directed.contains(&(f, t)) {
                    return Err(bad(format!(
                        "basin lists {f} -> {t}, which is not a directed edge"
                    )));
                }
                if !in_basins.insert((f, t)) {
                    return Err(bad(format!(
                        "edge {f} -> {t} appears in more than one basin"
                    )));
                }
            }
        }
        if in_basins != directed {
            return Err(bad(
                "the basins do not cover every directed edge exactly once".into(),
            ));
        }
        if let Some(value) = &self.model {
            let text = serde_json::to_string(value).expect("value serializes");
            let model = Polytree::from_json_str(&text)
                .map_err(|e| bad(format!("embedded model: {e}")))?;
            let names: Vec<&str> = model.variables().iter().map(|v| v.name()).collect();
            let listed: Vec<&str> = self.variables.iter().map(|s| s.as_str()).collect();
            if names != listed {
                return Err(bad(
                    "embedded model variables do not match the result variables".into(),
                ));
            }
        }
        Ok(())
    }
}

fn annotate_io(path: &Path, e: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(
        e.kind(),
        format!("{}: {e}", path.display()),
    ))
}

/// Structure-quality metrics of a learned result against a ground-truth
/// model: skeleton precision/recall/F1, orientation accuracy over the
/// truth's basin edges, and whether the undetermined set is exactly the
/// truth's non-basin edge set.
#[derive(Debug, Serialize, Deserialize)]
pub struct EvalReport {
    pub skeleton_precision: f64,
    pub skeleton_recall: f64,
    pub skeleton_f1: f64,
    pub skeleton_common_edges: usize,
    pub learned_edge_count: usize,
    pub truth_edge_count: usize,
    /// Share of ground-truth basin edges recovered with matching direction.
    pub directed_accuracy: f64,
    pub correctly_directed_basin_edges: usize,
    pub truth_basin_edge_count: usize,
    /// Learned undetermined set == truth skeleton minus basin edges.
    pub undetermined_set_exact: bool,
    /// Warnings echoed from the learned result.
    pub warnings: Vec<String>,
}

impl EvalReport {
    pub fn to_json_string(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }
}

/// Scores `result` against the ground-truth `truth` model. The variable
/// lists must match by name and order.
pub fn evaluate(result: &ResultFile, truth: &Polytree) -> Result<EvalReport, Error> {
    let truth_names: Vec<&str> = truth.variables().iter().map(|v| v.name()).collect();
    let result_names: Vec<&str> = result.variables.iter().map(|s| s.as_str()).collect();
    if truth_names != result_names {
        return Err(Error::Validation(format!(
            "variable sets differ: the result lists [{}] but the truth model lists [{}]",
            result_names.join(", "),
            truth_names.join(", ")
        )));
    }

    let learned: BTreeSet<(usize, usize)> = result
        .skeleton
        .iter()
        .map(|&(u, v)| (u.min(v), u.max(v)))
        .collect();
    let truth_skeleton: BTreeSet<(usize, usize)> = truth.skeleton_edges().into_iter().collect();
    let common = learned.intersection(&truth_skeleton).count();
    let precision = ratio(common, learned.len());
    let recall = ratio(common, truth_skeleton.len());
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };

    let basin_edges: Vec<(usize, usize)> = causal_basins(truth).into_iter().flatten().collect();
    let learned_directed: BTreeSet<(usize, usize)> = result
        .edges
        .iter()
        .filter_map(EdgeEntry::directed_pair)
        .collect();
    let correct = basin_edges
        .iter()
        .filter(|e| learned_directed.contains(e))
        .count();
    let directed_accuracy = ratio(correct, basin_edges.len());

    let basin_pairs: BTreeSet<(usize, usize)> = basin_edges
        .iter()
        .map(|&(f, t)| (f.min(t), f.max(t)))
        .collect();
    let truth_nonbasin: BTreeSet<(usize, usize)> = truth_skeleton
        .iter()
        .filter(|e| !basin_pairs.contains(e))
        .copied()
        .collect();
    let learned_undetermined: BTreeSet<(usize, usize)> = result
        .edges
        .iter()
        .filter(|e| !e.is_directed())
        .map(|e| (e.u.min(e.v), e.u.max(e.v)))
        .collect();

    Ok(EvalReport {
        skeleton_precision: precision,
        skeleton_recall: recall,
        skeleton_f1: f1,
        skeleton_common_edges: common,
        learned_edge_count: learned.len(),
        truth_edge_count: truth_skeleton.len(),
        directed_accuracy,
        correctly_directed_basin_edges: correct,
        truth_basin_edge_count: basin_edges.len(),
        undetermined_set_exact: learned_undetermined == truth_nonbasin,
        warnings: result.warnings.clone(),
    })
}

fn ratio(numerator: usize, denominator: usize) -> f64 {
    if denominator == 0 {
        1.0
    } else {
        numerator as f64 / denominator as f64
    }
}
