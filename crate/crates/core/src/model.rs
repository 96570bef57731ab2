//! JSON model files describing a structure: algebra dimension, sparse
//! bracket table (one-based indices), inner product, and drift vector.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::algebra::NilpotentAlgebra;
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::randers::RandersStructure;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BracketEntry {
    /// One-based basis indices with i < j.
    pub i: usize,
    pub j: usize,
    /// Coefficients of `[e_i, e_j]` keyed by one-based basis index.
    pub coeffs: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub dim: usize,
    pub class_bound: usize,
    #[serde(default)]
    pub brackets: Vec<BracketEntry>,
    /// Row-major inner product at the identity.
    pub metric: Vec<Vec<f64>>,
    /// Drift vector at the identity.
    pub vector: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<BTreeMap<String, String>>,
}

pub fn parse_model(text: &str) -> Result<ModelFile> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn read_model(path: &Path) -> Result<ModelFile> {
    let text = std::fs::read_to_string(path)?;
    parse_model(&text)
}

impl ModelFile {
    pub fn to_structure(&self) -> Result<RandersStructure> {
        if self.metric.len() != self.dim
            || self.metric.iter().any(|row| row.len() != self.dim)
        {
            return Err(Error::Model(format!(
                "metric must be a {0} x {0} row-major matrix",
                self.dim
            )));
        }
        if self.vector.len() != self.dim {
            return Err(Error::Model(format!(
                "vector must have {} entries, found {}",
                self.dim,
                self.vector.len()
            )));
        }
        let mut triples = Vec::new();
        for entry in &self.brackets {
            for (key, &value) in &entry.coeffs {
                let k: usize = key.parse().map_err(|_| {
                    Error::Model(format!(
                        "bracket coefficient key '{key}' is not a basis index"
                    ))
                })?;
                triples.push((entry.i, entry.j, k, value));
            }
        }
        let alg = NilpotentAlgebra::new(self.dim, self.class_bound, &triples)?;
        let a = Mat::from_rows(self.metric.clone());
        RandersStructure::new(alg, a, self.vector.clone())
    }

    pub fn from_structure(
        s: &RandersStructure,
        labels: Option<BTreeMap<String, String>>,
    ) -> ModelFile {
        let n = s.dim();
        let mut brackets = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let mut coeffs = BTreeMap::new();
                for k in 0..n {
                    let v = s.algebra().c(i, j, k);
                    if v != 0.0 {
                        coeffs.insert((k + 1).to_string(), v);
                    }
                }
                if !coeffs.is_empty() {
                    brackets.push(BracketEntry {
                        i: i + 1,
                        j: j + 1,
                        coeffs,
                    });
                }
            }
        }
        let a = s.metric_identity();
        ModelFile {
            dim: n,
            class_bound: s.algebra().class_bound(),
            brackets,
            metric: (0..n).map(|i| (0..n).map(|j| a[(i, j)]).collect()).collect(),
            vector: s.drift().to_vec(),
            labels,
        }
    }

    pub fn to_json_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("model serialization cannot fail");
        s.push('\n');
        s
    }
}
