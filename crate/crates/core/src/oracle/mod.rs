//! Exact numerical ground truth for identification results.
//!
//! A [`DiscreteScm`] is a finite structural causal model in semi-Markovian
//! form: observed variables with conditional probability tables, and latent
//! variables that each confound exactly two observed variables. Joint and
//! interventional distributions are computed by exhaustive enumeration into
//! a [`JointTable`], and [`evaluate`] gives expressions their numerical value
//! on such a table.

mod eval;
mod model_file;
mod random;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::admg::{Admg, GraphError, VarSet, VertexName};

pub use eval::{evaluate, Evaluator};
pub use model_file::{load_model, parse_model, ModelFile};
pub use random::{random_scm, random_scm_with_domains};

/// Tolerance for CPT rows and latent marginals summing to one.
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;

/// Assignment of values (indices into each variable's domain).
pub type Binding = BTreeMap<VertexName, usize>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("model file: {0}")]
    ModelFile(String),
    #[error("division by a zero probability")]
    ZeroDenominator,
    #[error("no value bound for `{0}`")]
    UnboundVariable(VertexName),
    #[error("`{0}` is not a variable of the table")]
    UnknownVariable(VertexName),
    #[error("value {value} out of range for `{var}`")]
    InvalidValue { var: VertexName, value: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// An observed variable and its conditional probability table.
///
/// `cpt[row][value]` is the probability of `value` given the parent
/// assignment numbered `row`, with the first parent as the most significant
/// digit.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedVar {
    pub name: VertexName,
    pub labels: Vec<String>,
    pub parents: Vec<VertexName>,
    pub cpt: Vec<Vec<f64>>,
}

/// An unobserved confounder with its marginal distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentVar {
    pub name: VertexName,
    pub labels: Vec<String>,
    pub marginal: Vec<f64>,
}

/// A validated discrete structural causal model.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteScm {
    observed: Vec<ObservedVar>,
    latents: Vec<LatentVar>,
    /// Observed variables in a topological order of the parent relation.
    order: Vec<usize>,
}

fn check_distribution(what: &str, probs: &[f64], size: usize) -> Result<(), OracleError> {
    if probs.len() != size {
        return Err(OracleError::InvalidModel(format!(
            "{what}: expected {size} probabilities, found {}",
            probs.len()
        )));
    }
    if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(OracleError::InvalidModel(format!(
            "{what}: negative or non-finite probability"
        )));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > ROW_SUM_TOLERANCE {
        return Err(OracleError::InvalidModel(format!(
            "{what}: probabilities sum to {total}"
        )));
    }
    Ok(())
}

impl DiscreteScm {
    pub fn new(observed: Vec<ObservedVar>, latents: Vec<LatentVar>) -> Result<Self, OracleError> {
        let mut sizes: BTreeMap<&VertexName, usize> = BTreeMap::new();
        for (name, labels) in observed
            .iter()
            .map(|o| (&o.name, &o.labels))
            .chain(latents.iter().map(|l| (&l.name, &l.labels)))
        {
            if labels.len() < 2 {
                return Err(OracleError::InvalidModel(format!("`{name}` needs at least two values")));
            }
            if sizes.insert(name, labels.len()).is_some() {
                return Err(OracleError::InvalidModel(format!("`{name}` is declared twice")));
            }
        }
        for l in &latents {
            check_distribution(&format!("marginal of `{}`", l.name), &l.marginal, l.labels.len())?;
            let children = observed.iter().filter(|o| o.parents.contains(&l.name)).count();
            if children != 2 {
                return Err(OracleError::InvalidModel(format!(
                    "latent `{}` must have exactly two observed children, found {children}",
                    l.name
                )));
            }
        }
        for o in &observed {
            let mut rows = 1usize;
            for (k, p) in o.parents.iter().enumerate() {
                let size = sizes
                    .get(p)
                    .ok_or_else(|| OracleError::InvalidModel(format!("unknown parent `{p}` of `{}`", o.name)))?;
                if o.parents[..k].contains(p) || p == &o.name {
                    return Err(OracleError::InvalidModel(format!("bad parent list for `{}`", o.name)));
                }
                rows *= size;
            }
            if o.cpt.len() != rows {
                return Err(OracleError::InvalidModel(format!(
                    "`{}` needs {rows} CPT rows, found {}",
                    o.name,
                    o.cpt.len()
                )));
            }
            for (r, row) in o.cpt.iter().enumerate() {
                check_distribution(&format!("row {r} of `{}`", o.name), row, o.labels.len())?;
            }
        }

        let index: BTreeMap<&VertexName, usize> = observed.iter().enumerate().map(|(i, o)| (&o.name, i)).collect();
        let mut placed = vec![false; observed.len()];
        let mut order = Vec::with_capacity(observed.len());
        while order.len() < observed.len() {
            let next = (0..observed.len()).find(|&i| {
                !placed[i]
                    && observed[i]
                        .parents
                        .iter()
                        .all(|p| index.get(p).is_none_or(|&j| placed[j]))
            });
            match next {
                Some(i) => {
                    placed[i] = true;
                    order.push(i);
                }
                None => return Err(OracleError::InvalidModel("parent structure is cyclic".into())),
            }
        }
        Ok(Self {
            observed,
            latents,
            order,
        })
    }

    pub fn observed(&self) -> &[ObservedVar] {
        &self.observed
    }

    pub fn latents(&self) -> &[LatentVar] {
        &self.latents
    }

    pub fn variable(&self, name: &VertexName) -> Option<&ObservedVar> {
        self.observed.iter().find(|o| &o.name == name)
    }

    /// Index of `label` in the domain of observed variable `name`.
    pub fn value_index(&self, name: &VertexName, label: &str) -> Option<usize> {
        self.variable(name)?.labels.iter().position(|l| l == label)
    }

    pub fn observed_names(&self) -> Vec<VertexName> {
        self.observed.iter().map(|o| o.name.clone()).collect()
    }

    pub fn has_latents(&self) -> bool {
        !self.latents.is_empty()
    }

    /// Joint over observed variables after forcing the values in `forced`.
    fn enumerate(&self, forced: &Binding) -> Result<JointTable, OracleError> {
        for (k, &v) in forced {
            let o = self
                .variable(k)
                .ok_or_else(|| OracleError::UnknownVariable(k.clone()))?;
            if v >= o.labels.len() {
                return Err(OracleError::InvalidValue {
                    var: k.clone(),
                    value: v,
                });
            }
        }
        let obs_sizes: Vec<usize> = self.observed.iter().map(|o| o.labels.len()).collect();
        let lat_sizes: Vec<usize> = self.latents.iter().map(|l| l.labels.len()).collect();
        let n_obs = self.observed.len();

        // Position of each parent in the combined (observed ++ latent) vector.
        let mut position: BTreeMap<&VertexName, usize> = BTreeMap::new();
        for (i, o) in self.observed.iter().enumerate() {
            position.insert(&o.name, i);
        }
        for (j, l) in self.latents.iter().enumerate() {
            position.insert(&l.name, n_obs + j);
        }
        let parent_slots: Vec<Vec<(usize, usize)>> = self
            .observed
            .iter()
            .map(|o| {
                o.parents
                    .iter()
                    .map(|p| {
                        let slot = position[p];
                        let size = if slot < n_obs {
                            obs_sizes[slot]
                        } else {
                            lat_sizes[slot - n_obs]
                        };
                        (slot, size)
                    })
                    .collect()
            })
            .collect();
        let forced_at: Vec<Option<usize>> = self.observed.iter().map(|o| forced.get(&o.name).copied()).collect();

        let mut probs = vec![0.0; obs_sizes.iter().product()];
        let mut values = vec![0usize; n_obs + lat_sizes.len()];
        for_each_assignment(&lat_sizes, |lat| {
            let weight: f64 = lat.iter().zip(&self.latents).map(|(&v, l)| l.marginal[v]).product();
            if weight == 0.0 {
                return;
            }
            values[n_obs..].copy_from_slice(lat);
            for_each_assignment(&obs_sizes, |obs| {
                values[..n_obs].copy_from_slice(obs);
                let mut w = weight;
                for &i in &self.order {
                    let factor = match forced_at[i] {
                        Some(v) => {
                            if values[i] == v {
                                1.0
                            } else {
                                0.0
                            }
                        }
                        None => {
                            let row = parent_slots[i]
                                .iter()
                                .fold(0usize, |acc, &(slot, size)| acc * size + values[slot]);
                            self.observed[i].cpt[row][values[i]]
                        }
                    };
                    w *= factor;
                    if w == 0.0 {
                        break;
                    }
                }
                probs[mixed_radix(obs, &obs_sizes)] += w;
            });
        });
        Ok(JointTable {
            variables: self.observed_names(),
            sizes: obs_sizes,
            probs,
        })
    }
}

/// Calls `f` on every assignment of a mixed-radix counter, last digit
/// fastest.
pub(crate) fn for_each_assignment(sizes: &[usize], mut f: impl FnMut(&[usize])) {
    let mut digits = vec![0usize; sizes.len()];
    if sizes.contains(&0) {
        return;
    }
    loop {
        f(&digits);
        let mut k = sizes.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            digits[k] += 1;
            if digits[k] < sizes[k] {
                break;
            }
            digits[k] = 0;
        }
    }
}

pub(crate) fn mixed_radix(digits: &[usize], sizes: &[usize]) -> usize {
    digits.iter().zip(sizes).fold(0, |acc, (&d, &s)| acc * s + d)
}

/// A distribution over full assignments of a list of variables, stored
/// densely in mixed-radix order (first variable most significant).
#[derive(Debug, Clone, PartialEq)]
pub struct JointTable {
    variables: Vec<VertexName>,
    sizes: Vec<usize>,
    probs: Vec<f64>,
}

impl JointTable {
    pub fn new(variables: Vec<VertexName>, sizes: Vec<usize>, probs: Vec<f64>) -> Result<Self, OracleError> {
        if variables.len() != sizes.len() || probs.len() != sizes.iter().product::<usize>() {
            return Err(OracleError::InvalidModel(
                "table shape does not match its variables".into(),
            ));
        }
        Ok(Self {
            variables,
            sizes,
            probs,
        })
    }

    pub fn variables(&self) -> &[VertexName] {
        &self.variables
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn size_of(&self, v: &VertexName) -> Option<usize> {
        self.position(v).map(|i| self.sizes[i])
    }

    pub fn position(&self, v: &VertexName) -> Option<usize> {
        self.variables.iter().position(|u| u == v)
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Probability of a full assignment.
    pub fn get(&self, b: &Binding) -> Result<f64, OracleError> {
        let mut digits = Vec::with_capacity(self.variables.len());
        for (v, &size) in self.variables.iter().zip(&self.sizes) {
            let value = *b.get(v).ok_or_else(|| OracleError::UnboundVariable(v.clone()))?;
            if value >= size {
                return Err(OracleError::InvalidValue { var: v.clone(), value });
            }
            digits.push(value);
        }
        Ok(self.probs[mixed_radix(&digits, &self.sizes)])
    }

    /// Every full assignment with its probability, in storage order.
    pub fn entries(&self) -> Vec<(Binding, f64)> {
        let mut out = Vec::with_capacity(self.probs.len());
        let mut k = 0;
        for_each_assignment(&self.sizes, |digits| {
            let b = self.variables.iter().cloned().zip(digits.iter().copied()).collect();
            out.push((b, self.probs[k]));
            k += 1;
        });
        out
    }

    /// Marginal probability of the partial assignment `b`.
    pub fn marginal_probability(&self, b: &Binding) -> Result<f64, OracleError> {
        let mut fixed = vec![None; self.variables.len()];
        for (k, &v) in b {
            let i = self
                .position(k)
                .ok_or_else(|| OracleError::UnknownVariable(k.clone()))?;
            if v >= self.sizes[i] {
                return Err(OracleError::InvalidValue {
                    var: k.clone(),
                    value: v,
                });
            }
            fixed[i] = Some(v);
        }
        let mut total = 0.0;
        let mut idx = 0;
        for_each_assignment(&self.sizes, |digits| {
            if digits.iter().zip(&fixed).all(|(d, f)| f.is_none_or(|v| v == *d)) {
                total += self.probs[idx];
            }
            idx += 1;
        });
        Ok(total)
    }
}

/// The graph of `m`: observed parent edges become directed edges and each
/// latent becomes a bidirected edge between its two children.
pub fn scm_graph(m: &DiscreteScm) -> Result<Admg, OracleError> {
    let latent_names: VarSet = m.latents.iter().map(|l| l.name.clone()).collect();
    let mut directed = Vec::new();
    let mut latent_children: BTreeMap<&VertexName, Vec<VertexName>> = BTreeMap::new();
    for o in &m.observed {
        for p in &o.parents {
            if latent_names.contains(p) {
                latent_children.entry(p).or_default().push(o.name.clone());
            } else {
                directed.push((p.clone(), o.name.clone()));
            }
        }
    }
    let bidirected = latent_children.into_values().map(|c| (c[0].clone(), c[1].clone()));
    Ok(Admg::new(m.observed_names(), directed, bidirected)?)
}

/// Observational joint distribution of the observed variables.
pub fn joint(m: &DiscreteScm) -> JointTable {
    m.enumerate(&Binding::new())
        .expect("empty intervention is always valid")
}

/// Joint distribution of the observed variables in the model where each
/// variable in `x` is forced to its bound value.
pub fn interventional(m: &DiscreteScm, x: &Binding) -> Result<JointTable, OracleError> {
    m.enumerate(x)
}

/// `P(var | cond)` from a table.
pub fn conditional_from_table(t: &JointTable, var: &Binding, cond: &Binding) -> Result<f64, OracleError> {
    if let Some(k) = var.keys().find(|k| cond.contains_key(*k)) {
        return Err(OracleError::InvalidModel(format!(
            "`{k}` is both a target and a condition"
        )));
    }
    let den = t.marginal_probability(cond)?;
    if den == 0.0 {
        return Err(OracleError::ZeroDenominator);
    }
    let mut both = cond.clone();
    both.extend(var.iter().map(|(k, v)| (k.clone(), *v)));
    Ok(t.marginal_probability(&both)? / den)
}
