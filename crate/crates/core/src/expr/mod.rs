//! Symbolic probability expressions.
//!
//! An [`Expression`] is an immutable tree of observational probability
//! atoms, products, marginal sums and quotients. Identified causal effects
//! are returned in this form.
//!
//! A [`Expression::Marginal`] sums only over those of its variables that are
//! free in its body; summing over a variable the body does not mention has
//! no effect. This keeps "drop absent variables from a sum" a sound rewrite.

mod latex;
mod simplify;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::admg::{VarSet, VertexName};

pub use latex::{to_latex, to_text};
pub use simplify::{is_unit, simplify, simplify_counted, simplify_with, SimplifyLevel, MAX_PASSES};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("a probability atom needs at least one variable")]
    EmptyVar,
    #[error("`{0}` appears both as a variable and in the conditioning set")]
    VarCondOverlap(VertexName),
    #[error("a product needs at least one factor")]
    EmptyProduct,
}

/// A probability expression.
///
/// Serialized as a record tagged with `kind` (`atom`, `product`, `marginal`,
/// `quotient`); sets serialize as sorted arrays.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Expression {
    /// `P(var | cond)`.
    Atom { var: VarSet, cond: VarSet },
    /// Product of at least two factors.
    Product { children: Vec<Expression> },
    /// `Σ_{sumset} body`.
    Marginal { sumset: VarSet, body: Box<Expression> },
    /// `num / den`.
    Quotient { num: Box<Expression>, den: Box<Expression> },
}

impl Expression {
    pub fn atom(var: VarSet, cond: VarSet) -> Result<Self, ExprError> {
        if var.is_empty() {
            return Err(ExprError::EmptyVar);
        }
        if let Some(v) = var.intersection(&cond).next() {
            return Err(ExprError::VarCondOverlap(v.clone()));
        }
        Ok(Expression::Atom { var, cond })
    }

    /// The joint `P(vars)`.
    pub fn joint(vars: VarSet) -> Result<Self, ExprError> {
        Self::atom(vars, VarSet::new())
    }

    /// Product of `children`; a single child is returned unchanged.
    pub fn product(children: Vec<Expression>) -> Result<Self, ExprError> {
        match children.len() {
            0 => Err(ExprError::EmptyProduct),
            1 => Ok(children.into_iter().next().expect("one child")),
            _ => Ok(Expression::Product { children }),
        }
    }

    /// `Σ_{sumset} body`; an empty sumset returns `body`.
    pub fn marginal(sumset: VarSet, body: Expression) -> Self {
        if sumset.is_empty() {
            body
        } else {
            Expression::Marginal {
                sumset,
                body: Box::new(body),
            }
        }
    }

    pub fn quotient(num: Expression, den: Expression) -> Self {
        Expression::Quotient {
            num: Box::new(num),
            den: Box::new(den),
        }
    }

    /// Checks the per-variant invariants recursively. Useful after
    /// deserializing an expression from untrusted input.
    pub fn validate(&self) -> Result<(), ExprError> {
        match self {
            Expression::Atom { var, cond } => Self::atom(var.clone(), cond.clone()).map(|_| ()),
            Expression::Product { children } => {
                if children.len() < 2 {
                    return Err(ExprError::EmptyProduct);
                }
                children.iter().try_for_each(Expression::validate)
            }
            Expression::Marginal { body, .. } => body.validate(),
            Expression::Quotient { num, den } => {
                num.validate()?;
                den.validate()
            }
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Expression::Atom { .. } => 1,
            Expression::Product { children } => 1 + children.iter().map(Expression::size).sum::<usize>(),
            Expression::Marginal { body, .. } => 1 + body.size(),
            Expression::Quotient { num, den } => 1 + num.size() + den.size(),
        }
    }
}

/// Variables occurring in `e` that are not bound by an enclosing sum.
pub fn free_variables(e: &Expression) -> VarSet {
    match e {
        Expression::Atom { var, cond } => var.union(cond).cloned().collect(),
        Expression::Product { children } => children.iter().flat_map(free_variables).collect(),
        Expression::Marginal { sumset, body } => free_variables(body).difference(sumset).cloned().collect(),
        Expression::Quotient { num, den } => {
            let mut fv = free_variables(num);
            fv.extend(free_variables(den));
            fv
        }
    }
}

/// Sums `vs` out of `e`.
///
/// An unconditioned atom loses the summed variables directly. Anything else
/// is wrapped in a marginal over the summed variables that are free in `e`.
pub fn marginalize(e: &Expression, vs: &VarSet) -> Expression {
    if let Expression::Atom { var, cond } = e {
        if cond.is_empty() {
            let kept: VarSet = var.difference(vs).cloned().collect();
            if !kept.is_empty() {
                return Expression::Atom {
                    var: kept,
                    cond: VarSet::new(),
                };
            }
        }
    }
    let effective: VarSet = free_variables(e).intersection(vs).cloned().collect();
    Expression::marginal(effective, e.clone())
}

/// Builds `p(var | cond)` from a distribution `p` over `scope`, without
/// simplifying.
pub(crate) fn conditional_raw(
    p: &Expression,
    var: &VarSet,
    cond: &VarSet,
    scope: &VarSet,
) -> Result<Expression, ExprError> {
    if var.is_empty() {
        return Err(ExprError::EmptyVar);
    }
    if let Some(v) = var.intersection(cond).next() {
        return Err(ExprError::VarCondOverlap(v.clone()));
    }
    let keep: VarSet = var.union(cond).cloned().collect();
    let num = marginalize(p, &scope.difference(&keep).cloned().collect());
    if cond.is_empty() {
        return Ok(num);
    }
    let den = marginalize(p, &scope.difference(cond).cloned().collect());
    Ok(Expression::quotient(num, den))
}

/// Conditional distribution `p(var | cond)` of a distribution `p` whose
/// variables range over `scope`. Variables of `p` outside `scope` are treated
/// as fixed values. The result is fully simplified.
pub fn conditional(p: &Expression, var: &VarSet, cond: &VarSet, scope: &VarSet) -> Result<Expression, ExprError> {
    Ok(simplify(&conditional_raw(p, var, cond, scope)?))
}

/// Structural equality after full simplification.
pub fn expressions_equal(a: &Expression, b: &Expression) -> bool {
    simplify(a) == simplify(b)
}

/// Shorthand for building atoms in fixtures and tests. Panics on invalid
/// input.
pub fn p<'a>(var: impl IntoIterator<Item = &'a str>, cond: impl IntoIterator<Item = &'a str>) -> Expression {
    Expression::atom(crate::admg::var_set(var), crate::admg::var_set(cond)).expect("valid atom")
}
