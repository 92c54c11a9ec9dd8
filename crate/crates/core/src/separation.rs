//! d-separation on ADMGs.
//!
//! Every check runs on the explicit-confounder expansion of the graph, so a
//! bidirected edge behaves like a latent fork. [`d_separated`] uses a
//! Bayes-ball reachability sweep; [`d_separated_naive`] enumerates every
//! simple path and is kept as a reference implementation.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::admg::{Admg, GraphError, VarSet, VertexName};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeparationError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("vertex sets overlap on `{0}`")]
    OverlappingSets(VertexName),
    #[error("not a path in the graph: {0}")]
    InvalidPath(String),
}

/// A sequence of vertices in the explicit-confounder graph where each
/// consecutive pair is joined by a directed edge in either orientation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path(pub Vec<VertexName>);

impl Path {
    pub fn vertices(&self) -> &[VertexName] {
        &self.0
    }
}

fn check_sets(g: &Admg, xs: &VarSet, ys: &VarSet, zs: &VarSet) -> Result<(), SeparationError> {
    for v in xs.iter().chain(ys).chain(zs) {
        if !g.contains(v) {
            return Err(GraphError::UnknownVertex(v.clone()).into());
        }
    }
    if let Some(v) = xs.intersection(ys).next() {
        return Err(SeparationError::OverlappingSets(v.clone()));
    }
    if let Some(v) = zs.iter().find(|v| xs.contains(*v) || ys.contains(*v)) {
        return Err(SeparationError::OverlappingSets(v.clone()));
    }
    Ok(())
}

/// Whether `xs` and `ys` are d-separated by `zs` in `g`.
///
/// The conditioning set may not overlap `xs` or `ys`, and `xs` and `ys` must
/// be disjoint.
pub fn d_separated(g: &Admg, xs: &VarSet, ys: &VarSet, zs: &VarSet) -> Result<bool, SeparationError> {
    check_sets(g, xs, ys, zs)?;
    let dag = g.explicit_confounders()?;
    let z_ancestors = dag.ancestors(zs)?;

    #[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
    enum Dir {
        /// Arrived from a child.
        Up,
        /// Arrived from a parent.
        Down,
    }

    let mut visited: BTreeSet<(VertexName, Dir)> = BTreeSet::new();
    let mut queue: VecDeque<(VertexName, Dir)> = xs.iter().map(|x| (x.clone(), Dir::Up)).collect();
    while let Some((v, dir)) = queue.pop_front() {
        if !visited.insert((v.clone(), dir)) {
            continue;
        }
        let conditioned = zs.contains(&v);
        if !conditioned && ys.contains(&v) {
            return Ok(false);
        }
        let to_parents = match dir {
            Dir::Up => !conditioned,
            Dir::Down => z_ancestors.contains(&v),
        };
        let to_children = !conditioned;
        if to_parents {
            queue.extend(dag.parents(&v).into_iter().map(|p| (p, Dir::Up)));
        }
        if to_children {
            queue.extend(dag.children(&v).into_iter().map(|c| (c, Dir::Down)));
        }
    }
    Ok(true)
}

/// Whether path `p` is blocked by `zs` in the explicit-confounder expansion
/// of `g`.
pub fn path_blocked(g: &Admg, p: &Path, zs: &VarSet) -> Result<bool, SeparationError> {
    let dag = g.explicit_confounders()?;
    validate_path(&dag, p)?;
    Ok(blocked_in_dag(&dag, &p.0, zs))
}

fn validate_path(dag: &Admg, p: &Path) -> Result<(), SeparationError> {
    let vs = &p.0;
    let describe = || vs.iter().map(VertexName::to_string).collect::<Vec<_>>().join(" - ");
    if vs.len() < 2 {
        return Err(SeparationError::InvalidPath(describe()));
    }
    let distinct: BTreeSet<&VertexName> = vs.iter().collect();
    if distinct.len() != vs.len() {
        return Err(SeparationError::InvalidPath(describe()));
    }
    for pair in vs.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if !dag.contains(a) || !dag.contains(b) || !(dag.has_directed(a, b) || dag.has_directed(b, a)) {
            return Err(SeparationError::InvalidPath(describe()));
        }
    }
    Ok(())
}

fn blocked_in_dag(dag: &Admg, vs: &[VertexName], zs: &VarSet) -> bool {
    vs.windows(3).any(|w| {
        let (prev, mid, next) = (&w[0], &w[1], &w[2]);
        let collider = dag.has_directed(prev, mid) && dag.has_directed(next, mid);
        if collider {
            let below = dag
                .descendants(&std::iter::once(mid.clone()).collect())
                .expect("path vertex is in the graph");
            below.is_disjoint(zs)
        } else {
            zs.contains(mid)
        }
    })
}

/// Reference d-separation check: enumerates all simple paths between each
/// pair in `xs × ys` and tests each with the blocking rule. Exponential.
pub fn d_separated_naive(g: &Admg, xs: &VarSet, ys: &VarSet, zs: &VarSet) -> Result<bool, SeparationError> {
    check_sets(g, xs, ys, zs)?;
    let dag = g.explicit_confounders()?;
    let neighbours: BTreeMap<VertexName, VarSet> = dag
        .vertices()
        .iter()
        .map(|v| {
            let mut n = dag.parents(v);
            n.extend(dag.children(v));
            (v.clone(), n)
        })
        .collect();

    fn walk(
        dag: &Admg,
        neighbours: &BTreeMap<VertexName, VarSet>,
        path: &mut Vec<VertexName>,
        target: &VertexName,
        zs: &VarSet,
    ) -> bool {
        let last = path.last().expect("path is never empty").clone();
        if &last == target {
            return blocked_in_dag(dag, path, zs);
        }
        for next in &neighbours[&last] {
            if path.contains(next) {
                continue;
            }
            path.push(next.clone());
            let ok = walk(dag, neighbours, path, target, zs);
            path.pop();
            if !ok {
                return false;
            }
        }
        true
    }

    for x in xs {
        for y in ys {
            let mut path = vec![x.clone()];
            if !walk(&dag, &neighbours, &mut path, y, zs) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
