//! Acyclic directed mixed graphs.
//!
//! An [`Admg`] holds a set of observed vertices, directed edges (direct
//! causes) and bidirected edges (a hidden common cause shared by the two
//! endpoints). The directed part is always acyclic, and a topological order
//! of it is computed once at construction and carried through every derived
//! graph.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A set of vertex names, always iterated in sorted order.
pub type VarSet = BTreeSet<VertexName>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("malformed edge specification `{0}`")]
    Parse(String),
    #[error("invalid vertex name `{0}`: only letters, digits and underscore are allowed")]
    InvalidName(String),
    #[error("self-loop on vertex `{0}`")]
    SelfLoop(VertexName),
    #[error("directed part contains a cycle through `{0}`")]
    CyclicGraph(VertexName),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(VertexName),
    #[error("latent vertex name `{0}` collides with an existing vertex")]
    NameCollision(VertexName),
    #[error("a graph needs at least one vertex")]
    EmptyGraph,
}

/// Name of a vertex (a variable of the causal model).
///
/// Names parsed from user input are restricted to `[A-Za-z0-9_]+`. Latent
/// vertices synthesized by [`Admg::explicit_confounders`] use the reserved
/// form `U[A,B]`, which can never clash with a parsed name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexName(String);

impl VertexName {
    pub fn new(name: impl Into<String>) -> Result<Self, GraphError> {
        let name = name.into();
        let valid = !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        if valid {
            Ok(Self(name))
        } else {
            Err(GraphError::InvalidName(name))
        }
    }

    /// Canonical name of the latent confounder of `a` and `b`.
    pub fn latent(a: &VertexName, b: &VertexName) -> Self {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        Self(format!("U[{},{}]", lo.0, hi.0))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_latent(&self) -> bool {
        self.0.starts_with("U[")
    }
}

impl fmt::Display for VertexName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::str::FromStr for VertexName {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::new(s)
    }
}

/// Builds a [`VarSet`] from string literals. Panics on invalid names, so it
/// is meant for fixtures and tests.
pub fn var_set<'a>(names: impl IntoIterator<Item = &'a str>) -> VarSet {
    names
        .into_iter()
        .map(|n| VertexName::new(n).expect("valid vertex name"))
        .collect()
}

/// An acyclic directed mixed graph.
///
/// Equality compares vertices and edges only; the cached topological order is
/// ignored, so two graphs built from the same edges in different ways are
/// equal.
#[derive(Debug, Clone)]
pub struct Admg {
    vertices: VarSet,
    directed: BTreeSet<(VertexName, VertexName)>,
    bidirected: BTreeSet<(VertexName, VertexName)>,
    topo: Vec<VertexName>,
}

impl PartialEq for Admg {
    fn eq(&self, other: &Self) -> bool {
        self.graphs_equal(other)
    }
}

impl Eq for Admg {}

enum EdgeSpec {
    Directed(VertexName, VertexName),
    Bidirected(VertexName, VertexName),
}

fn parse_edge(raw: &str) -> Result<EdgeSpec, GraphError> {
    let token = raw.trim();
    let (lhs, rhs, bidirected) = if let Some((l, r)) = token.split_once("<->") {
        (l, r, true)
    } else if let Some((l, r)) = token.split_once("->") {
        (l, r, false)
    } else {
        return Err(GraphError::Parse(token.to_string()));
    };
    let name = |s: &str| VertexName::new(s.trim()).map_err(|_| GraphError::Parse(token.to_string()));
    let (a, b) = (name(lhs)?, name(rhs)?);
    if a == b {
        return Err(GraphError::SelfLoop(a));
    }
    Ok(if bidirected {
        EdgeSpec::Bidirected(a, b)
    } else {
        EdgeSpec::Directed(a, b)
    })
}

/// Parses a list of `A->B` / `A<->B` edge specifications.
///
/// The resulting graph contains exactly the vertices mentioned by the edges.
/// Duplicate edges collapse to one.
pub fn parse_graph<S: AsRef<str>>(edge_specs: &[S]) -> Result<Admg, GraphError> {
    let mut vertices = VarSet::new();
    let mut directed = Vec::new();
    let mut bidirected = Vec::new();
    for spec in edge_specs {
        match parse_edge(spec.as_ref())? {
            EdgeSpec::Directed(a, b) => {
                vertices.insert(a.clone());
                vertices.insert(b.clone());
                directed.push((a, b));
            }
            EdgeSpec::Bidirected(a, b) => {
                vertices.insert(a.clone());
                vertices.insert(b.clone());
                bidirected.push((a, b));
            }
        }
    }
    Admg::new(vertices, directed, bidirected)
}

/// Parses the graph text format: edges separated by newlines or commas,
/// `#` starts a comment running to the end of the line, blank entries are
/// skipped.
pub fn parse_graph_text(text: &str) -> Result<Admg, GraphError> {
    let specs: Vec<&str> = text
        .lines()
        .map(|line| line.split_once('#').map_or(line, |(edges, _)| edges))
        .flat_map(|line| line.split(','))
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    parse_graph(&specs)
}

impl Admg {
    /// Builds a graph from explicit parts. Unlike [`parse_graph`] this allows
    /// isolated vertices.
    pub fn new(
        vertices: impl IntoIterator<Item = VertexName>,
        directed: impl IntoIterator<Item = (VertexName, VertexName)>,
        bidirected: impl IntoIterator<Item = (VertexName, VertexName)>,
    ) -> Result<Self, GraphError> {
        let vertices: VarSet = vertices.into_iter().collect();
        if vertices.is_empty() {
            return Err(GraphError::EmptyGraph);
        }
        let check = |a: &VertexName, b: &VertexName| -> Result<(), GraphError> {
            for v in [a, b] {
                if !vertices.contains(v) {
                    return Err(GraphError::UnknownVertex(v.clone()));
                }
            }
            if a == b {
                return Err(GraphError::SelfLoop(a.clone()));
            }
            Ok(())
        };
        let mut dir = BTreeSet::new();
        for (a, b) in directed {
            check(&a, &b)?;
            dir.insert((a, b));
        }
        let mut bi = BTreeSet::new();
        for (a, b) in bidirected {
            check(&a, &b)?;
            bi.insert(if a < b { (a, b) } else { (b, a) });
        }
        let topo = topological_sort(&vertices, &dir)?;
        Ok(Self {
            vertices,
            directed: dir,
            bidirected: bi,
            topo,
        })
    }

    pub fn vertices(&self) -> &VarSet {
        &self.vertices
    }

    pub fn directed_edges(&self) -> impl Iterator<Item = (&VertexName, &VertexName)> {
        self.directed.iter().map(|(a, b)| (a, b))
    }

    /// Bidirected edges as `(a, b)` pairs with `a < b`.
    pub fn bidirected_edges(&self) -> impl Iterator<Item = (&VertexName, &VertexName)> {
        self.bidirected.iter().map(|(a, b)| (a, b))
    }

    pub fn num_directed(&self) -> usize {
        self.directed.len()
    }

    pub fn num_bidirected(&self) -> usize {
        self.bidirected.len()
    }

    pub fn has_directed(&self, tail: &VertexName, head: &VertexName) -> bool {
        self.directed.contains(&(tail.clone(), head.clone()))
    }

    pub fn has_bidirected(&self, a: &VertexName, b: &VertexName) -> bool {
        let key = if a < b {
            (a.clone(), b.clone())
        } else {
            (b.clone(), a.clone())
        };
        self.bidirected.contains(&key)
    }

    pub fn contains(&self, v: &VertexName) -> bool {
        self.vertices.contains(v)
    }

    pub fn parents(&self, v: &VertexName) -> VarSet {
        self.directed
            .iter()
            .filter(|(_, h)| h == v)
            .map(|(t, _)| t.clone())
            .collect()
    }

    pub fn children(&self, v: &VertexName) -> VarSet {
        self.directed
            .iter()
            .filter(|(t, _)| t == v)
            .map(|(_, h)| h.clone())
            .collect()
    }

    /// Vertices joined to `v` by a bidirected edge.
    pub fn spouses(&self, v: &VertexName) -> VarSet {
        self.bidirected
            .iter()
            .filter_map(|(a, b)| {
                if a == v {
                    Some(b.clone())
                } else if b == v {
                    Some(a.clone())
                } else {
                    None
                }
            })
            .collect()
    }

    fn require_subset(&self, s: &VarSet) -> Result<(), GraphError> {
        match s.iter().find(|v| !self.vertices.contains(*v)) {
            Some(v) => Err(GraphError::UnknownVertex(v.clone())),
            None => Ok(()),
        }
    }

    /// Node-induced subgraph on `s`. The topological order is the parent's
    /// order restricted to `s`.
    pub fn induced_subgraph(&self, s: &VarSet) -> Result<Admg, GraphError> {
        self.require_subset(s)?;
        if s.is_empty() {
            return Err(GraphError::EmptyGraph);
        }
        let keep = |(a, b): &&(VertexName, VertexName)| s.contains(a) && s.contains(b);
        Ok(Admg {
            vertices: s.clone(),
            directed: self.directed.iter().filter(keep).cloned().collect(),
            bidirected: self.bidirected.iter().filter(keep).cloned().collect(),
            topo: self.topo.iter().filter(|v| s.contains(*v)).cloned().collect(),
        })
    }

    fn closure(&self, s: &VarSet, forward: bool) -> Result<VarSet, GraphError> {
        self.require_subset(s)?;
        let mut seen = s.clone();
        let mut queue: VecDeque<VertexName> = s.iter().cloned().collect();
        while let Some(v) = queue.pop_front() {
            for (t, h) in &self.directed {
                let next = match (forward, t == &v, h == &v) {
                    (true, true, _) => h,
                    (false, _, true) => t,
                    _ => continue,
                };
                if seen.insert(next.clone()) {
                    queue.push_back(next.clone());
                }
            }
        }
        Ok(seen)
    }

    /// Ancestors of `s`, including `s` itself. Bidirected edges are ignored.
    pub fn ancestors(&self, s: &VarSet) -> Result<VarSet, GraphError> {
        self.closure(s, false)
    }

    /// Descendants of `s`, including `s` itself. Bidirected edges are ignored.
    pub fn descendants(&self, s: &VarSet) -> Result<VarSet, GraphError> {
        self.closure(s, true)
    }

    /// Vertices without children in the directed part.
    pub fn root_set(&self) -> VarSet {
        let tails: VarSet = self.directed.iter().map(|(t, _)| t.clone()).collect();
        self.vertices.difference(&tails).cloned().collect()
    }

    /// `G` with all edges into `x` removed. A bidirected edge counts as an
    /// incoming arrow at both endpoints.
    pub fn cut_incoming(&self, x: &VarSet) -> Result<Admg, GraphError> {
        self.require_subset(x)?;
        Ok(Admg {
            vertices: self.vertices.clone(),
            directed: self.directed.iter().filter(|(_, h)| !x.contains(h)).cloned().collect(),
            bidirected: self
                .bidirected
                .iter()
                .filter(|(a, b)| !x.contains(a) && !x.contains(b))
                .cloned()
                .collect(),
            topo: self.topo.clone(),
        })
    }

    /// `G` with all directed edges out of `z` removed. Bidirected edges stay:
    /// a confounded vertex has no outgoing arrow towards its confounder.
    pub fn cut_outgoing(&self, z: &VarSet) -> Result<Admg, GraphError> {
        self.require_subset(z)?;
        Ok(Admg {
            vertices: self.vertices.clone(),
            directed: self.directed.iter().filter(|(t, _)| !z.contains(t)).cloned().collect(),
            bidirected: self.bidirected.clone(),
            topo: self.topo.clone(),
        })
    }

    /// Maximal C-components: connected components of the bidirected part.
    ///
    /// Components are ordered by the topological position of their earliest
    /// member.
    pub fn c_components(&self) -> Vec<VarSet> {
        let mut assigned: BTreeMap<&VertexName, usize> = BTreeMap::new();
        let mut components: Vec<VarSet> = Vec::new();
        for start in &self.topo {
            if assigned.contains_key(start) {
                continue;
            }
            let id = components.len();
            let mut comp = VarSet::new();
            let mut stack = vec![start.clone()];
            while let Some(v) = stack.pop() {
                if !comp.insert(v.clone()) {
                    continue;
                }
                for w in self.spouses(&v) {
                    if !comp.contains(&w) {
                        stack.push(w);
                    }
                }
            }
            for v in &comp {
                let key = self.vertices.get(v).expect("component member is a vertex");
                assigned.insert(key, id);
            }
            components.push(comp);
        }
        components
    }

    /// Whether `self` is contained in `other`: vertices and both edge sets.
    pub fn is_subgraph(&self, other: &Admg) -> bool {
        self.vertices.is_subset(&other.vertices)
            && self.directed.is_subset(&other.directed)
            && self.bidirected.is_subset(&other.bidirected)
    }

    pub fn graphs_equal(&self, other: &Admg) -> bool {
        self.is_subgraph(other) && other.is_subgraph(self)
    }

    /// Replaces every bidirected edge `{A, B}` by a latent vertex `U[A,B]`
    /// with arrows into `A` and `B`.
    pub fn explicit_confounders(&self) -> Result<Admg, GraphError> {
        let mut vertices = self.vertices.clone();
        let mut directed: Vec<_> = self.directed.iter().cloned().collect();
        for (a, b) in &self.bidirected {
            let u = VertexName::latent(a, b);
            if !vertices.insert(u.clone()) {
                return Err(GraphError::NameCollision(u));
            }
            directed.push((u.clone(), a.clone()));
            directed.push((u, b.clone()));
        }
        Admg::new(vertices, directed, std::iter::empty())
    }

    /// The cached topological order of the directed part.
    pub fn topological_order(&self) -> &[VertexName] {
        &self.topo
    }

    /// Renders the graph in Graphviz DOT syntax. Bidirected edges are drawn
    /// dashed with arrowheads on both ends.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph G {\n");
        for v in &self.topo {
            out.push_str(&format!("  {v};\n"));
        }
        for (a, b) in &self.directed {
            out.push_str(&format!("  {a} -> {b};\n"));
        }
        for (a, b) in &self.bidirected {
            out.push_str(&format!("  {a} -> {b} [dir=both, style=dashed];\n"));
        }
        out.push_str("}\n");
        out
    }
}

impl fmt::Display for Admg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.directed.iter().map(|(a, b)| format!("{a}->{b}")).collect();
        parts.extend(self.bidirected.iter().map(|(a, b)| format!("{a}<->{b}")));
        let isolated: Vec<String> = self
            .vertices
            .iter()
            .filter(|v| {
                !self.directed.iter().any(|(a, b)| a == *v || b == *v)
                    && !self.bidirected.iter().any(|(a, b)| a == *v || b == *v)
            })
            .map(|v| v.to_string())
            .collect();
        parts.extend(isolated);
        write!(f, "{{{}}}", parts.join(", "))
    }
}

#[derive(Serialize)]
struct AdmgRecord<'a> {
    vertices: Vec<&'a VertexName>,
    directed: Vec<[&'a VertexName; 2]>,
    bidirected: Vec<[&'a VertexName; 2]>,
}

impl Serialize for Admg {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        AdmgRecord {
            vertices: self.vertices.iter().collect(),
            directed: self.directed.iter().map(|(a, b)| [a, b]).collect(),
            bidirected: self.bidirected.iter().map(|(a, b)| [a, b]).collect(),
        }
        .serialize(serializer)
    }
}

/// Kahn's algorithm; ties among ready vertices go to the smallest name.
fn topological_sort(
    vertices: &VarSet,
    directed: &BTreeSet<(VertexName, VertexName)>,
) -> Result<Vec<VertexName>, GraphError> {
    let mut indegree: BTreeMap<&VertexName, usize> = vertices.iter().map(|v| (v, 0)).collect();
    for (_, h) in directed {
        *indegree.get_mut(h).expect("edge endpoint is a vertex") += 1;
    }
    let mut ready: BTreeSet<&VertexName> = indegree.iter().filter(|(_, &d)| d == 0).map(|(v, _)| *v).collect();
    let mut order = Vec::with_capacity(vertices.len());
    while let Some(v) = ready.pop_first() {
        order.push(v.clone());
        for (t, h) in directed {
            if t == v {
                let d = indegree.get_mut(h).expect("edge endpoint is a vertex");
                *d -= 1;
                if *d == 0 {
                    ready.insert(h);
                }
            }
        }
    }
    if order.len() != vertices.len() {
        let stuck = indegree
            .iter()
            .find(|(v, &d)| d > 0 && !order.contains(v))
            .map(|(v, _)| (*v).clone())
            .expect("some vertex remains on a cycle");
        return Err(GraphError::CyclicGraph(stuck));
    }
    Ok(order)
}

/// Vertices strictly before `v` in `order`, intersected with `possible`.
pub fn previous_in_order(v: &VertexName, possible: &VarSet, order: &[VertexName]) -> Result<VarSet, GraphError> {
    let pos = order
        .iter()
        .position(|u| u == v)
        .ok_or_else(|| GraphError::UnknownVertex(v.clone()))?;
    Ok(order[..pos].iter().filter(|u| possible.contains(*u)).cloned().collect())
}
