//! TOML model files.
//!
//! ```toml
//! [[variable]]
//! name = "Z"
//! values = ["T", "F"]
//! cpt = [{ probs = [0.25, 0.75] }]
//!
//! [[variable]]
//! name = "X"
//! values = ["T", "F"]
//! parents = ["Z", "U"]
//! cpt = [
//!   { given = ["T", "a"], probs = [0.9, 0.1] },
//!   { given = ["T", "b"], probs = [0.8, 0.2] },
//!   { given = ["F", "a"], probs = [0.7, 0.3] },
//!   { given = ["F", "b"], probs = [0.6, 0.4] },
//! ]
//!
//! [[latent]]
//! name = "U"
//! values = ["a", "b"]
//! marginal = [0.5, 0.5]
//! ```
//!
//! Each `[[variable]]` lists its domain labels, its parents (observed or
//! latent) and one CPT row per parent assignment, keyed by the parents'
//! labels in `given`. Rows may appear in any order but each assignment
//! exactly once. Each `[[latent]]` must be a parent of exactly two observed
//! variables. Probabilities within a row must sum to one within
//! [`FILE_ROW_TOLERANCE`]; rows are renormalized on load.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{for_each_assignment, DiscreteScm, LatentVar, ObservedVar, OracleError};
use crate::admg::VertexName;

/// Accepted deviation of a written row sum from one.
pub const FILE_ROW_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    #[serde(default)]
    pub variable: Vec<VariableSpec>,
    #[serde(default)]
    pub latent: Vec<LatentSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableSpec {
    pub name: String,
    pub values: Vec<String>,
    #[serde(default)]
    pub parents: Vec<String>,
    pub cpt: Vec<RowSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RowSpec {
    #[serde(default)]
    pub given: Vec<String>,
    pub probs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatentSpec {
    pub name: String,
    pub values: Vec<String>,
    pub marginal: Vec<f64>,
}

fn name(s: &str) -> Result<VertexName, OracleError> {
    VertexName::new(s).map_err(|e| OracleError::ModelFile(e.to_string()))
}

fn normalized(what: &str, probs: &[f64]) -> Result<Vec<f64>, OracleError> {
    let total: f64 = probs.iter().sum();
    if probs.iter().any(|p| !p.is_finite() || *p < 0.0) || (total - 1.0).abs() > FILE_ROW_TOLERANCE {
        return Err(OracleError::ModelFile(format!(
            "{what}: probabilities must be non-negative and sum to 1 (sum is {total})"
        )));
    }
    Ok(probs.iter().map(|p| p / total).collect())
}

/// Parses a model from TOML text.
pub fn parse_model(text: &str) -> Result<DiscreteScm, OracleError> {
    let file: ModelFile = toml::from_str(text).map_err(|e| OracleError::ModelFile(e.to_string()))?;
    file.build()
}

/// Reads and parses a model file.
pub fn load_model(path: &Path) -> Result<DiscreteScm, OracleError> {
    let text = std::fs::read_to_string(path).map_err(|e| OracleError::ModelFile(format!("{}: {e}", path.display())))?;
    parse_model(&text)
}

impl ModelFile {
    pub fn build(&self) -> Result<DiscreteScm, OracleError> {
        let mut domains: BTreeMap<String, &[String]> = BTreeMap::new();
        for (n, values) in self
            .variable
            .iter()
            .map(|v| (&v.name, &v.values))
            .chain(self.latent.iter().map(|l| (&l.name, &l.values)))
        {
            domains.insert(n.clone(), values);
        }

        let latents = self
            .latent
            .iter()
            .map(|l| {
                Ok(LatentVar {
                    name: name(&l.name)?,
                    labels: l.values.clone(),
                    marginal: normalized(&format!("marginal of `{}`", l.name), &l.marginal)?,
                })
            })
            .collect::<Result<Vec<_>, OracleError>>()?;

        let mut observed = Vec::with_capacity(self.variable.len());
        for v in &self.variable {
            let parent_domains = v
                .parents
                .iter()
                .map(|p| {
                    domains
                        .get(p)
                        .copied()
                        .ok_or_else(|| OracleError::ModelFile(format!("unknown parent `{p}` of `{}`", v.name)))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let mut rows: BTreeMap<Vec<usize>, Vec<f64>> = BTreeMap::new();
            for row in &v.cpt {
                if row.given.len() != v.parents.len() {
                    return Err(OracleError::ModelFile(format!(
                        "`{}`: row {:?} must name one value per parent",
                        v.name, row.given
                    )));
                }
                let key =
                    row.given
                        .iter()
                        .zip(&parent_domains)
                        .zip(&v.parents)
                        .map(|((label, domain), parent)| {
                            domain.iter().position(|d| d == label).ok_or_else(|| {
                                OracleError::ModelFile(format!("`{label}` is not a value of `{parent}`"))
                            })
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                let probs = normalized(&format!("`{}` given {:?}", v.name, row.given), &row.probs)?;
                if rows.insert(key, probs).is_some() {
                    return Err(OracleError::ModelFile(format!(
                        "`{}`: duplicate row {:?}",
                        v.name, row.given
                    )));
                }
            }
            let sizes: Vec<usize> = parent_domains.iter().map(|d| d.len()).collect();
            let mut cpt = Vec::with_capacity(rows.len());
            let mut missing = None;
            for_each_assignment(&sizes, |digits| match rows.get(digits) {
                Some(r) => cpt.push(r.clone()),
                None => {
                    missing.get_or_insert_with(|| digits.to_vec());
                }
            });
            if let Some(digits) = missing {
                let labels: Vec<&str> = digits
                    .iter()
                    .zip(&parent_domains)
                    .map(|(&d, dom)| dom[d].as_str())
                    .collect();
                return Err(OracleError::ModelFile(format!(
                    "`{}`: missing row for {labels:?}",
                    v.name
                )));
            }
            observed.push(ObservedVar {
                name: name(&v.name)?,
                labels: v.values.clone(),
                parents: v.parents.iter().map(|p| name(p)).collect::<Result<_, _>>()?,
                cpt,
            });
        }
        DiscreteScm::new(observed, latents)
    }
}
