//! Problem files: JSON documents with matrices as nested row arrays.
//!
//! Real matrices are arrays of rows of numbers. Complex matrices accept
//! either plain numbers or `[re, im]` pairs per entry. Unknown fields are
//! rejected so that typos surface as schema errors.

use std::path::Path;

use qef_core::matrix::{c, CMat, RMat};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub type RealRows = Vec<Vec<f64>>;
pub type ComplexRows = Vec<Vec<Entry>>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Pair([f64; 2]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Weight {
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub c: Option<RealRows>,
    #[serde(rename = "D", default, skip_serializing_if = "Option::is_none")]
    pub d: Option<RealRows>,
    pub sigma: RealRows,
    pub theta_block: RealRows,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub parameter: String,
    pub grid: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<RealRows>,
    #[serde(rename = "P", default, skip_serializing_if = "Option::is_none")]
    pub p: Option<RealRows>,
    #[serde(rename = "Pi", default, skip_serializing_if = "Option::is_none")]
    pub pi: Option<RealRows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub risk: Option<f64>,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a: Option<ComplexRows>,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub b: Option<ComplexRows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factors: Option<Vec<ComplexRows>>,
    #[serde(rename = "C0", default, skip_serializing_if = "Option::is_none")]
    pub c0: Option<RealRows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<Weight>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            CliError::Malformed(format!("problem file field `{path}`: {inner}"))
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Malformed(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn require<'a, T>(field: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
        field
            .as_ref()
            .ok_or_else(|| CliError::Malformed(format!("problem file field `{name}` is missing")))
    }
}

fn shape<T>(rows: &[Vec<T>], name: &str) -> Result<(usize, usize), CliError> {
    let r = rows.len();
    let cols = rows.first().map_or(0, Vec::len);
    if r == 0 || cols == 0 {
        return Err(CliError::Malformed(format!("`{name}` is empty")));
    }
    if let Some(k) = rows.iter().position(|row| row.len() != cols) {
        return Err(CliError::Malformed(format!(
            "`{name}[{k}]` has {} entries, expected {cols}",
            rows[k].len()
        )));
    }
    Ok((r, cols))
}

pub fn real_matrix(rows: &RealRows, name: &str) -> Result<RMat, CliError> {
    let (r, k) = shape(rows, name)?;
    Ok(RMat::from_fn(r, k, |i, j| rows[i][j]))
}

pub fn complex_matrix(rows: &ComplexRows, name: &str) -> Result<CMat, CliError> {
    let (r, k) = shape(rows, name)?;
    Ok(CMat::from_fn(r, k, |i, j| match rows[i][j] {
        Entry::Real(x) => c(x, 0.0),
        Entry::Pair([re, im]) => c(re, im),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_paths_in_errors() {
        let err = ProblemFile::parse(r#"{"weights": [{"sigma": [[1]], "theta_block": "x"}]}"#).unwrap_err();
        assert!(err.to_string().contains("weights[0].theta_block"), "{err}");
        let err = ProblemFile::parse(r#"{"Theta": [[0]]}"#).unwrap_err();
        assert!(err.to_string().contains("unknown field"), "{err}");
    }

    #[test]
    fn complex_entries() {
        let p = ProblemFile::parse(r#"{"A": [[1, [0.5, -2]], [[0.5, -2], 3]]}"#).unwrap();
        let a = complex_matrix(p.a.as_ref().unwrap(), "A").unwrap();
        assert_eq!(a[(0, 1)], c(0.5, -2.0));
        assert_eq!(a[(1, 1)], c(3.0, 0.0));
    }

    #[test]
    fn ragged_rows_rejected() {
        let err = real_matrix(&vec![vec![1.0, 2.0], vec![3.0]], "P").unwrap_err();
        assert!(err.to_string().contains("P[1]"));
    }
}
