//! Seeded random models compatible with a given graph.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{DiscreteScm, LatentVar, ObservedVar};
use crate::admg::{Admg, VertexName};

/// Smallest unnormalized weight drawn for a table entry.
const MIN_WEIGHT: f64 = 0.05;

fn distribution(rng: &mut ChaCha8Rng, size: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..size).map(|_| rng.gen_range(MIN_WEIGHT..=1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

fn labels(size: usize) -> Vec<String> {
    (0..size).map(|i| i.to_string()).collect()
}

/// Random binary model for `g`; see [`random_scm_with_domains`].
pub fn random_scm(g: &Admg, seed: u64) -> DiscreteScm {
    random_scm_with_domains(g, seed, &BTreeMap::new())
}

/// Random model for `g`, deterministic in `seed`.
///
/// Observed variables take the sizes in `domains` (two values when absent).
/// Each bidirected edge becomes a binary latent named `U[A,B]`. Every
/// probability is drawn from `[0.05, 1]` before normalization, so all joint
/// entries are strictly positive.
pub fn random_scm_with_domains(g: &Admg, seed: u64, domains: &BTreeMap<VertexName, usize>) -> DiscreteScm {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = |v: &VertexName| domains.get(v).copied().unwrap_or(2).max(2);

    let latents: Vec<LatentVar> = g
        .bidirected_edges()
        .map(|(a, b)| LatentVar {
            name: VertexName::latent(a, b),
            labels: labels(2),
            marginal: distribution(&mut rng, 2),
        })
        .collect();
    let mut latent_parents: BTreeMap<&VertexName, Vec<VertexName>> = BTreeMap::new();
    for (a, b) in g.bidirected_edges() {
        let u = VertexName::latent(a, b);
        latent_parents.entry(a).or_default().push(u.clone());
        latent_parents.entry(b).or_default().push(u);
    }

    let observed = g
        .topological_order()
        .iter()
        .map(|v| {
            let mut parents: Vec<VertexName> = g.parents(v).into_iter().collect();
            parents.extend(latent_parents.get(v).cloned().unwrap_or_default());
            let rows: usize = parents
                .iter()
                .map(|p| if p.is_latent() { 2 } else { size(p) })
                .product();
            ObservedVar {
                name: v.clone(),
                labels: labels(size(v)),
                parents,
                cpt: (0..rows).map(|_| distribution(&mut rng, size(v))).collect(),
            }
        })
        .collect();
    DiscreteScm::new(observed, latents).expect("generated model is valid")
}
