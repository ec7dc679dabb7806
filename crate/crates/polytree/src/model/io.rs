//! File formats: JSON model files, CSV datasets, and JSON explicit joint
//! tables.
//!
//! Model JSON shape:
//!
//! ```json
//! {
//!   "variables": [{"name": "A", "cardinality": 2}, ...],
//!   "parents":   {"B": ["A", "C"], ...},
//!   "cpts":      {"A": [0.5, 0.5], "B": [...], ...}
//! }
//! ```
//!
//! `variables` fixes the variable order. `parents` maps a variable to its
//! ordered parent list (variables absent from the map have none); the CPT
//! row order follows that listed parent order, last parent fastest, child
//! index fastest within a row. Datasets are CSV with a header row of
//! variable names and one integer cell per variable; cardinalities are
//! inferred as one above the largest observed value (at least 2). Explicit
//! joint tables are JSON with `variables` and a flat `probs` array, last
//! variable fastest.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Dataset, DistributionSource, Polytree, VariableSpec};

/// Cells above this value are rejected when reading CSV datasets, keeping
/// inferred cardinalities (and the contingency tables built from them) sane.
pub const MAX_CSV_VALUE: usize = 4095;

#[derive(Serialize, Deserialize)]
struct VariableSpecFile {
    name: String,
    cardinality: usize,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    variables: Vec<VariableSpecFile>,
    #[serde(default)]
    parents: BTreeMap<String, Vec<String>>,
    cpts: BTreeMap<String, Vec<f64>>,
}

impl Polytree {
    /// Parses a model from its JSON representation.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)
            .map_err(|e| Error::Parse(format!("model JSON: {e}")))?;
        let variables: Vec<VariableSpec> = file
            .variables
            .iter()
            .map(|v| VariableSpec::new(v.name.clone(), v.cardinality))
            .collect::<Result<_>>()?;
        let index_of = |name: &str| -> Result<usize> {
            variables
                .iter()
                .position(|v| v.name() == name)
                .ok_or_else(|| Error::Parse(format!("unknown variable {name:?}")))
        };
        for name in file.parents.keys() {
            index_of(name).map_err(|_| {
                Error::Parse(format!("parents entry for unknown variable {name:?}"))
            })?;
        }
        for name in file.cpts.keys() {
            index_of(name)
                .map_err(|_| Error::Parse(format!("CPT entry for unknown variable {name:?}")))?;
        }
        let mut parents: Vec<Vec<usize>> = vec![Vec::new(); variables.len()];
        for (child, plist) in &file.parents {
            let c = index_of(child)?;
            parents[c] = plist
                .iter()
                .map(|p| {
                    index_of(p).map_err(|_| {
                        Error::Parse(format!("variable {child:?} lists unknown parent {p:?}"))
                    })
                })
                .collect::<Result<_>>()?;
        }
        let mut cpts: Vec<Vec<f64>> = Vec::with_capacity(variables.len());
        for v in &variables {
            let cpt = file.cpts.get(v.name()).ok_or_else(|| {
                Error::Parse(format!("missing CPT for variable {:?}", v.name()))
            })?;
            cpts.push(cpt.clone());
        }
        Polytree::new(variables, parents, cpts)
    }

    /// Serializes to the JSON model format, deterministically (two-space
    /// indentation, keys sorted).
    pub fn to_json_string(&self) -> String {
        let file = ModelFile {
            variables: self
                .variables()
                .iter()
                .map(|v| VariableSpecFile {
                    name: v.name().to_string(),
                    cardinality: v.cardinality(),
                })
                .collect(),
            parents: (0..self.n_variables())
                .map(|i| {
                    (
                        self.variables()[i].name().to_string(),
                        self.parents(i)
                            .iter()
                            .map(|&p| self.variables()[p].name().to_string())
                            .collect(),
                    )
                })
                .collect(),
            cpts: (0..self.n_variables())
                .map(|i| {
                    (
                        self.variables()[i].name().to_string(),
                        self.cpt(i).to_vec(),
                    )
                })
                .collect(),
        };
        let mut text = serde_json::to_string_pretty(&file).expect("model serializes");
        text.push('\n');
        text
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Io(std::io::Error::new(
                e.kind(),
                format!("{}: {e}", path.display()),
            ))
        })?;
        Self::from_json_str(&text)
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }
}

impl Dataset {
    /// Parses a dataset from CSV text: a header row of variable names, then
    /// one row of integers per observation. Cardinalities are inferred as
    /// `max observed value + 1`, floored at 2.
    pub fn from_csv_reader<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let names: Vec<String> = rdr
            .headers()
            .map_err(|e| Error::Parse(format!("dataset CSV header: {e}")))?
            .iter()
            .map(|s| s.to_string())
            .collect();
        if names.is_empty() {
            return Err(Error::Parse("dataset CSV has no columns".into()));
        }
        let mut rows: Vec<Vec<usize>> = Vec::new();
        let mut max_value = vec![0usize; names.len()];
        for (line, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| Error::Parse(format!("dataset CSV: {e}")))?;
            if record.len() != names.len() {
                return Err(Error::Parse(format!(
                    "dataset CSV row {}: {} cells, expected {}",
                    line + 2,
                    record.len(),
                    names.len()
                )));
            }
            let mut row = Vec::with_capacity(names.len());
            for (col, cell) in record.iter().enumerate() {
                let value: usize = cell.parse().map_err(|_| {
                    Error::Parse(format!(
                        "dataset CSV row {}, column {:?}: {cell:?} is not a \
                         non-negative integer",
                        line + 2,
                        names[col]
                    ))
                })?;
                if value > MAX_CSV_VALUE {
                    return Err(Error::Parse(format!(
                        "dataset CSV row {}, column {:?}: value {value} exceeds the \
                         supported maximum of {MAX_CSV_VALUE}",
                        line + 2,
                        names[col]
                    )));
                }
                max_value[col] = max_value[col].max(value);
                row.push(value);
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::Parse("dataset CSV has no data rows".into()));
        }
        let variables: Vec<VariableSpec> = names
            .into_iter()
            .zip(&max_value)
            .map(|(name, &m)| VariableSpec::new(name, (m + 1).max(2)))
            .collect::<Result<_>>()?;
        Dataset::from_rows(variables, rows)
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| {
            Error::Io(std::io::Error::new(
                e.kind(),
                format!("{}: {e}", path.display()),
            ))
        })?;
        Self::from_csv_reader(std::io::BufReader::new(file))
    }

    /// Writes the dataset as CSV, one line per observation (repeated rows
    /// expanded), rows in sorted order for determinism.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(self.variables().iter().map(|v| v.name()))
            .map_err(csv_io_error)?;
        let mut cells: Vec<String> = Vec::new();
        for (row, count) in self.iter() {
            cells.clear();
            cells.extend(row.iter().map(|v| v.to_string()));
            for _ in 0..count {
                wtr.write_record(&cells).map_err(csv_io_error)?;
            }
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

fn csv_io_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

#[derive(Serialize, Deserialize)]
struct JointFile {
    variables: Vec<VariableSpecFile>,
    probs: Vec<f64>,
}

/// Parses an explicit joint table from JSON: `variables` plus a flat
/// `probs` array in row-major order, last variable fastest.
pub fn explicit_from_json_str(text: &str) -> Result<DistributionSource> {
    let file: JointFile = serde_json::from_str(text)
        .map_err(|e| Error::Parse(format!("joint table JSON: {e}")))?;
    let variables: Vec<VariableSpec> = file
        .variables
        .iter()
        .map(|v| VariableSpec::new(v.name.clone(), v.cardinality))
        .collect::<Result<_>>()?;
    DistributionSource::explicit(variables, file.probs)
}

pub fn load_explicit_json(path: impl AsRef<Path>) -> Result<DistributionSource> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })?;
    explicit_from_json_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn or_gate_json() -> &'static str {
        r#"{
            "variables": [
                {"name": "A", "cardinality": 2},
                {"name": "B", "cardinality": 2},
                {"name": "C", "cardinality": 2}
            ],
            "parents": {"B": ["A", "C"]},
            "cpts": {
                "A": [0.5, 0.5],
                "B": [1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0],
                "C": [0.5, 0.5]
            }
        }"#
    }

    #[test]
    fn model_json_round_trips() {
        let m = Polytree::from_json_str(or_gate_json()).unwrap();
        assert_eq!(m.parents(1), &[0, 2]);
        assert_eq!(m.variable_index("C"), Some(2));
        let text = m.to_json_string();
        let again = Polytree::from_json_str(&text).unwrap();
        assert_eq!(m, again);
        assert_eq!(text, again.to_json_string(), "serialization is stable");
    }

    #[test]
    fn parent_order_in_the_file_controls_cpt_row_order() {
        // Same table, parents listed as [C, A]: rows are now (c, a)-major.
        let text = r#"{
            "variables": [
                {"name": "A", "cardinality": 2},
                {"name": "B", "cardinality": 2},
                {"name": "C", "cardinality": 2}
            ],
            "parents": {"B": ["C", "A"]},
            "cpts": {
                "A": [0.5, 0.5],
                "B": [1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0],
                "C": [0.5, 0.5]
            }
        }"#;
        let m = Polytree::from_json_str(text).unwrap();
        assert_eq!(m.parents(1), &[2, 0]);
        // Row for (C=0, A=1) is the second row: P(B=1 | A=1, C=0) = 1.
        let p = m.joint_probability(&[1, 1, 0]).unwrap();
        assert!((p - 0.25).abs() < 1e-15);
    }

    #[test]
    fn missing_cpt_is_a_parse_error_naming_the_variable() {
        let text = r#"{
            "variables": [{"name": "A", "cardinality": 2}],
            "cpts": {}
        }"#;
        let err = Polytree::from_json_str(text).unwrap_err();
        match err {
            Error::Parse(msg) => assert!(msg.contains("\"A\""), "message was: {msg}"),
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn unknown_parent_name_is_a_parse_error() {
        let text = r#"{
            "variables": [
                {"name": "A", "cardinality": 2},
                {"name": "B", "cardinality": 2}
            ],
            "parents": {"B": ["Q"]},
            "cpts": {"A": [0.5, 0.5], "B": [1.0, 0.0, 0.0, 1.0]}
        }"#;
        assert!(matches!(
            Polytree::from_json_str(text).unwrap_err(),
            Error::Parse(_)
        ));
    }

    #[test]
    fn malformed_json_reports_position() {
        let err = Polytree::from_json_str("{ nope").unwrap_err();
        match err {
            Error::Parse(msg) => assert!(msg.contains("line"), "message was: {msg}"),
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn csv_round_trips_and_infers_cardinalities() {
        let text = "A,B\n0,2\n1,0\n1,0\n0,1\n";
        let data = Dataset::from_csv_reader(text.as_bytes()).unwrap();
        assert_eq!(data.total(), 4);
        assert_eq!(data.variables()[0].cardinality(), 2);
        assert_eq!(data.variables()[1].cardinality(), 3);

        let mut out = Vec::new();
        data.write_csv(&mut out).unwrap();
        let again = Dataset::from_csv_reader(out.as_slice()).unwrap();
        assert_eq!(data, again);
    }

    #[test]
    fn csv_cardinality_floor_is_two() {
        let data = Dataset::from_csv_reader("X\n0\n0\n".as_bytes()).unwrap();
        assert_eq!(data.variables()[0].cardinality(), 2);
    }

    #[test]
    fn csv_rejects_bad_cells_with_row_and_column() {
        let err = Dataset::from_csv_reader("A,B\n0,1\n0,x\n".as_bytes()).unwrap_err();
        match err {
            Error::Parse(msg) => {
                assert!(msg.contains("row 3"), "message was: {msg}");
                assert!(msg.contains("\"B\""), "message was: {msg}");
            }
            other => panic!("expected parse error, got {other}"),
        }
        assert!(Dataset::from_csv_reader("A\n-1\n".as_bytes()).is_err());
        assert!(Dataset::from_csv_reader("A\n\n".as_bytes()).is_err());
    }

    #[test]
    fn explicit_joint_json_parses_and_validates() {
        let text = r#"{
            "variables": [
                {"name": "X", "cardinality": 2},
                {"name": "Y", "cardinality": 2}
            ],
            "probs": [0.5, 0.0, 0.0, 0.5]
        }"#;
        let src = explicit_from_json_str(text).unwrap();
        assert_eq!(src.n_variables(), 2);
        assert!(src.is_exact());

        let bad = r#"{
            "variables": [{"name": "X", "cardinality": 2}],
            "probs": [0.5, 0.4]
        }"#;
        assert!(matches!(
            explicit_from_json_str(bad).unwrap_err(),
            Error::Validation(_)
        ));
    }
}
