//! Identification of causal effects.
//!
//! [`identify`] answers `P_x(y)` and `P_x(y | z)` queries against an
//! [`Admg`]. On success the result is an [`Expression`] over the
//! observational distribution; otherwise a [`HedgeWitness`] explains which
//! sub-query failed.
//!
//! The unconditional algorithm ([`id_uncond`]) is a recursion with seven
//! mutually exclusive cases, tried in order:
//!
//! 1. no intervention: marginalize;
//! 2. drop vertices that are not ancestors of the outcome;
//! 3. add vertices that the intervention already cuts off from the outcome
//!    to the intervention set;
//! 4. split over the C-components of `G[V \ X]`;
//! 5. fail with a hedge when `G` is a single C-component;
//! 6. the remaining component is a C-component of `G`: a product of
//!    conditionals;
//! 7. the remaining component sits inside a larger C-component: recurse on
//!    that component with a rebuilt distribution.
//!
//! The conditional algorithm ([`idc`]) moves conditioning variables into
//! the intervention set while a d-separation test allows it, then divides
//! the joint effect by its marginal.

mod hedge;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::admg::{previous_in_order, Admg, GraphError, VarSet};
use crate::expr::{conditional_raw, marginalize, simplify_with, ExprError, Expression, SimplifyLevel};
use crate::separation::{d_separated, SeparationError};

pub use hedge::{hedge_search_witness, HedgeWitness};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IdentifyError {
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("not identifiable: {0}")]
    NotIdentifiable(Box<HedgeWitness>),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Separation(#[from] SeparationError),
    #[error("internal error: {0}")]
    Internal(String),
}

impl fmt::Display for HedgeWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = |vs: &VarSet| vs.iter().map(|v| v.as_str()).collect::<Vec<_>>().join(", ");
        write!(
            f,
            "hedge for P_{{{}}}({}) formed by F = {} and F' = {}",
            names(&self.sub_x),
            names(&self.sub_y),
            self.forest_f,
            self.forest_f_sub
        )
    }
}

/// A causal query `P_x(y | z)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Query {
    pub y: VarSet,
    pub x: VarSet,
    pub z: VarSet,
}

impl Query {
    pub fn new(y: VarSet, x: VarSet, z: VarSet) -> Self {
        Self { y, x, z }
    }

    /// Unconditional query `P_x(y)`.
    pub fn effect(y: VarSet, x: VarSet) -> Self {
        Self::new(y, x, VarSet::new())
    }

    pub fn validate(&self, g: &Admg) -> Result<(), IdentifyError> {
        if self.y.is_empty() {
            return Err(IdentifyError::InvalidQuery("the outcome set is empty".into()));
        }
        for (label, set) in [("outcome", &self.y), ("intervention", &self.x), ("condition", &self.z)] {
            if let Some(v) = set.iter().find(|v| !g.contains(v)) {
                return Err(IdentifyError::InvalidQuery(format!(
                    "{label} `{v}` is not a vertex of the graph"
                )));
            }
        }
        for (a, b, sa, sb) in [
            ("outcome", "intervention", &self.y, &self.x),
            ("outcome", "condition", &self.y, &self.z),
            ("intervention", "condition", &self.x, &self.z),
        ] {
            if let Some(v) = sa.intersection(sb).next() {
                return Err(IdentifyError::InvalidQuery(format!(
                    "`{v}` is in both the {a} and the {b} sets"
                )));
            }
        }
        Ok(())
    }
}

/// Which recursion produced a trace step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Id,
    Idc,
}

/// One recursive call and the case that fired for it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub depth: usize,
    pub algorithm: Algorithm,
    pub line: u8,
    pub y: VarSet,
    pub x: VarSet,
    pub z: VarSet,
    pub vertices: VarSet,
    /// Vertices moved into the intervention set by this step.
    #[serde(skip_serializing_if = "VarSet::is_empty")]
    pub added: VarSet,
}

impl fmt::Display for TraceStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = |vs: &VarSet| vs.iter().map(|v| v.as_str()).collect::<Vec<_>>().join(",");
        let algo = match self.algorithm {
            Algorithm::Id => "ID",
            Algorithm::Idc => "IDC",
        };
        write!(
            f,
            "{:indent$}{algo} line {}: P_{{{}}}({}",
            "",
            self.line,
            names(&self.x),
            names(&self.y),
            indent = 2 * self.depth
        )?;
        if !self.z.is_empty() {
            write!(f, " | {}", names(&self.z))?;
        }
        write!(f, ") on {{{}}}", names(&self.vertices))?;
        if !self.added.is_empty() {
            write!(f, ", adding {{{}}}", names(&self.added))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct IdentifyOptions {
    pub simplify: SimplifyLevel,
    /// Reduce hedge witnesses to literal C-forests.
    pub thin_hedge: bool,
}

/// Result of [`identify_traced`]: the outcome plus the recursion log.
#[derive(Debug, Clone)]
pub struct Traced {
    pub result: Result<Expression, IdentifyError>,
    pub trace: Vec<TraceStep>,
}

impl Traced {
    /// Vertices that case 3 added to an intervention set anywhere in the
    /// recursion. The identified expression does not depend on their values.
    pub fn introduced_interventions(&self) -> VarSet {
        self.trace
            .iter()
            .filter(|s| s.algorithm == Algorithm::Id && s.line == 3)
            .flat_map(|s| s.added.iter().cloned())
            .collect()
    }

    pub fn max_depth(&self) -> usize {
        self.trace.iter().map(|s| s.depth).max().unwrap_or(0)
    }
}

/// Identifies `q` in `g` with full simplification.
pub fn identify(q: &Query, g: &Admg) -> Result<Expression, IdentifyError> {
    identify_traced(q, g, IdentifyOptions::default()).result
}

/// Identifies `q` in `g`, recording every recursive call.
pub fn identify_traced(q: &Query, g: &Admg, options: IdentifyOptions) -> Traced {
    let mut run = Run {
        options,
        trace: Vec::new(),
    };
    let result = q.validate(g).and_then(|()| {
        let p = Expression::joint(g.vertices().clone())?;
        let e = if q.z.is_empty() {
            run.id(&q.y, &q.x, &p, g, 0)?
        } else {
            run.idc(&q.y, &q.x, &q.z, &p, g, 0)?
        };
        Ok(simplify_with(&e, options.simplify))
    });
    let result = match result {
        Err(IdentifyError::NotIdentifiable(w)) if options.thin_hedge => match w.thinned() {
            Ok(t) => Err(IdentifyError::NotIdentifiable(Box::new(t))),
            Err(e) => Err(e.into()),
        },
        other => other,
    };
    Traced {
        result,
        trace: run.trace,
    }
}

/// The unconditional recursion for `P_x(y)` given the distribution `p` over
/// the vertices of `g`. The result is not simplified beyond the
/// intermediate distributions.
pub fn id_uncond(y: &VarSet, x: &VarSet, p: &Expression, g: &Admg) -> Result<Expression, IdentifyError> {
    Run::default().id(y, x, p, g, 0)
}

/// The conditional recursion for `P_x(y | z)`.
pub fn idc(y: &VarSet, x: &VarSet, z: &VarSet, p: &Expression, g: &Admg) -> Result<Expression, IdentifyError> {
    Run::default().idc(y, x, z, p, g, 0)
}

#[derive(Default)]
struct Run {
    options: IdentifyOptions,
    trace: Vec<TraceStep>,
}

fn minus(a: &VarSet, b: &VarSet) -> VarSet {
    a.difference(b).cloned().collect()
}

fn union(a: &VarSet, b: &VarSet) -> VarSet {
    a.union(b).cloned().collect()
}

fn intersect(a: &VarSet, b: &VarSet) -> VarSet {
    a.intersection(b).cloned().collect()
}

impl Run {
    #[allow(clippy::too_many_arguments)]
    fn log(
        &mut self,
        depth: usize,
        algorithm: Algorithm,
        line: u8,
        y: &VarSet,
        x: &VarSet,
        z: &VarSet,
        g: &Admg,
        added: VarSet,
    ) {
        self.trace.push(TraceStep {
            depth,
            algorithm,
            line,
            y: y.clone(),
            x: x.clone(),
            z: z.clone(),
            vertices: g.vertices().clone(),
            added,
        });
    }

    fn id(
        &mut self,
        y: &VarSet,
        x: &VarSet,
        p: &Expression,
        g: &Admg,
        depth: usize,
    ) -> Result<Expression, IdentifyError> {
        let v = g.vertices();
        let none = VarSet::new();
        let log = |run: &mut Self, line: u8, added: VarSet| run.log(depth, Algorithm::Id, line, y, x, &none, g, added);

        if x.is_empty() {
            log(self, 1, VarSet::new());
            return Ok(marginalize(p, &minus(v, y)));
        }

        let an = g.ancestors(y)?;
        if &an != v {
            log(self, 2, VarSet::new());
            let sub = g.induced_subgraph(&an)?;
            let p2 = marginalize(p, &minus(v, &an));
            return self.id(y, &intersect(x, &an), &p2, &sub, depth + 1);
        }

        let an_cut = g.cut_incoming(x)?.ancestors(y)?;
        let w = minus(&minus(v, x), &an_cut);
        if !w.is_empty() {
            log(self, 3, w.clone());
            return self.id(y, &union(x, &w), p, g, depth + 1);
        }

        let rest = minus(v, x);
        let components = g.induced_subgraph(&rest)?.c_components();
        if components.len() > 1 {
            log(self, 4, VarSet::new());
            let mut factors = Vec::with_capacity(components.len());
            for s in &components {
                factors.push(self.id(s, &minus(v, s), p, g, depth + 1)?);
            }
            let product = Expression::product(factors)?;
            return Ok(marginalize(&product, &minus(v, &union(y, x))));
        }
        let s = components
            .into_iter()
            .next()
            .ok_or_else(|| IdentifyError::Internal("no vertices left outside the intervention set".into()))?;

        let whole = g.c_components();
        if whole.len() == 1 {
            log(self, 5, VarSet::new());
            return Err(IdentifyError::NotIdentifiable(Box::new(hedge_search_witness(
                g, &s, x, y,
            )?)));
        }

        let order = g.topological_order();
        if whole.contains(&s) {
            log(self, 6, VarSet::new());
            let mut factors = Vec::new();
            for vi in order.iter().filter(|u| s.contains(*u)) {
                let prev = previous_in_order(vi, v, order)?;
                let single: VarSet = std::iter::once(vi.clone()).collect();
                factors.push(self.tidy(conditional_raw(p, &single, &prev, v)?));
            }
            let product = Expression::product(factors)?;
            return Ok(marginalize(&product, &minus(&s, y)));
        }

        let Some(larger) = whole.iter().find(|c| s.is_subset(c)) else {
            return Err(IdentifyError::Internal("no case of the recursion applies".into()));
        };
        log(self, 7, VarSet::new());
        let mut factors = Vec::new();
        for vi in order.iter().filter(|u| larger.contains(*u)) {
            let prev = previous_in_order(vi, v, order)?;
            let single: VarSet = std::iter::once(vi.clone()).collect();
            factors.push(conditional_raw(p, &single, &prev, v)?);
        }
        let p_new = self.tidy(Expression::product(factors)?);
        let sub = g.induced_subgraph(larger)?;
        self.id(y, &intersect(x, larger), &p_new, &sub, depth + 1)
    }

    fn idc(
        &mut self,
        y: &VarSet,
        x: &VarSet,
        z: &VarSet,
        p: &Expression,
        g: &Admg,
        depth: usize,
    ) -> Result<Expression, IdentifyError> {
        let surgered = g.cut_incoming(x)?;
        for zi in g.topological_order().iter().filter(|v| z.contains(*v)) {
            let single: VarSet = std::iter::once(zi.clone()).collect();
            let cut = surgered.cut_outgoing(&single)?;
            let given = minus(&union(x, z), &single);
            if d_separated(&cut, y, &single, &given)? {
                self.log(depth, Algorithm::Idc, 1, y, x, z, g, single.clone());
                return self.idc(y, &union(x, &single), &minus(z, &single), p, g, depth + 1);
            }
        }
        if z.is_empty() {
            return self.id(y, x, p, g, depth);
        }
        self.log(depth, Algorithm::Idc, 2, y, x, z, g, VarSet::new());
        let joint = self.id(&union(y, z), x, p, g, depth + 1)?;
        let normalizer = marginalize(&joint, y);
        Ok(Expression::quotient(joint, normalizer))
    }

    fn tidy(&self, e: Expression) -> Expression {
        simplify_with(&e, self.options.simplify)
    }
}
