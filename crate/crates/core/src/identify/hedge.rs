//! Hedge witnesses for non-identifiable effects.

use serde::Serialize;

use crate::admg::{Admg, GraphError, VarSet};

/// Two nested graphs certifying that a sub-query `P_{sub_x}(sub_y)` cannot
/// be identified: `forest_f` meets the intervention set, `forest_f_sub` is
/// contained in it and avoids the intervention set, and both are single
/// C-components.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HedgeWitness {
    pub forest_f: Admg,
    pub forest_f_sub: Admg,
    pub sub_x: VarSet,
    pub sub_y: VarSet,
}

/// Builds the witness `(g, g[s])` for the failing sub-query `P_x(y)`.
pub fn hedge_search_witness(g: &Admg, s: &VarSet, x: &VarSet, y: &VarSet) -> Result<HedgeWitness, GraphError> {
    Ok(HedgeWitness {
        forest_f: g.clone(),
        forest_f_sub: g.induced_subgraph(s)?,
        sub_x: x.clone(),
        sub_y: y.clone(),
    })
}

impl HedgeWitness {
    /// Reduces both graphs to literal C-forests sharing one root set.
    ///
    /// The roots are those of `forest_f_sub`. Every other vertex keeps a
    /// single outgoing edge, preferring a child inside `forest_f_sub` and
    /// then the earliest child in topological order. Bidirected edges are
    /// kept.
    pub fn thinned(&self) -> Result<HedgeWitness, GraphError> {
        let f = &self.forest_f;
        let inner = self.forest_f_sub.vertices();
        let roots = self.forest_f_sub.root_set();
        let position =
            |v: &crate::admg::VertexName| f.topological_order().iter().position(|u| u == v).unwrap_or(usize::MAX);
        let mut directed = Vec::new();
        for v in f.vertices() {
            if roots.contains(v) {
                continue;
            }
            let chosen = f
                .children(v)
                .into_iter()
                .min_by_key(|c| (!inner.contains(c), position(c)));
            if let Some(c) = chosen {
                directed.push((v.clone(), c));
            }
        }
        let bidirected = f.bidirected_edges().map(|(a, b)| (a.clone(), b.clone()));
        let forest_f = Admg::new(f.vertices().clone(), directed, bidirected)?;
        let forest_f_sub = forest_f.induced_subgraph(inner)?;
        Ok(HedgeWitness {
            forest_f,
            forest_f_sub,
            sub_x: self.sub_x.clone(),
            sub_y: self.sub_y.clone(),
        })
    }

    /// Checks the structural invariants. `forests` additionally requires at
    /// most one child per vertex and equal root sets, which holds after
    /// [`HedgeWitness::thinned`].
    pub fn check(&self, forests: bool) -> Result<(), String> {
        let (f, fs) = (&self.forest_f, &self.forest_f_sub);
        if !fs.is_subgraph(f) {
            return Err("inner graph is not a subgraph of the outer graph".into());
        }
        if self.sub_x.is_disjoint(f.vertices()) {
            return Err("outer graph does not meet the intervention set".into());
        }
        if !self.sub_x.is_disjoint(fs.vertices()) {
            return Err("inner graph meets the intervention set".into());
        }
        for (name, g) in [("outer", f), ("inner", fs)] {
            if g.c_components().len() != 1 {
                return Err(format!("{name} graph is not a single C-component"));
            }
        }
        if forests {
            for (name, g) in [("outer", f), ("inner", fs)] {
                if let Some(v) = g.vertices().iter().find(|v| g.children(v).len() > 1) {
                    return Err(format!("{name} graph: `{v}` has more than one child"));
                }
            }
            if f.root_set() != fs.root_set() {
                return Err("root sets differ".into());
            }
        }
        Ok(())
    }
}
