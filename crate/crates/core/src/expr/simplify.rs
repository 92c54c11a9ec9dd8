//! Sound rewrite rules for probability expressions.
//!
//! Rules are applied bottom-up, repeatedly, until the expression stops
//! changing:
//!
//! - nested products are flattened and factors sorted canonically;
//! - sums drop variables their body does not mention, and nested sums merge;
//! - factors that do not mention any summed variable move out of the sum;
//! - `Σ_S P(A|C)` drops `S ∩ A` from both the sum and the atom;
//! - quotients cancel identical factors, and `P(A|C) / P(B|C)` with `B ⊂ A`
//!   becomes `P(A \ B | C ∪ B)`;
//! - with [`SimplifyLevel::Full`], chained atoms `P(A|B,C) P(B|C)` merge into
//!   `P(A,B|C)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{free_variables, to_latex, to_text, Expression};
use crate::admg::VarSet;

/// Upper bound on full bottom-up passes before giving up on a fixed point.
pub const MAX_PASSES: usize = 256;

/// How aggressively [`simplify_with`] rewrites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimplifyLevel {
    /// Return the expression unchanged.
    None,
    /// Every rule except chain merging.
    Basic,
    #[default]
    Full,
}

impl fmt::Display for SimplifyLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SimplifyLevel::None => "none",
            SimplifyLevel::Basic => "basic",
            SimplifyLevel::Full => "full",
        })
    }
}

impl FromStr for SimplifyLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(SimplifyLevel::None),
            "basic" => Ok(SimplifyLevel::Basic),
            "full" => Ok(SimplifyLevel::Full),
            other => Err(format!("unknown simplify level `{other}`")),
        }
    }
}

/// Full simplification.
pub fn simplify(e: &Expression) -> Expression {
    simplify_with(e, SimplifyLevel::Full)
}

pub fn simplify_with(e: &Expression, level: SimplifyLevel) -> Expression {
    simplify_counted(e, level).0
}

/// Simplifies and reports how many passes were needed to reach the fixed
/// point (the final pass that confirms no change included).
pub fn simplify_counted(e: &Expression, level: SimplifyLevel) -> (Expression, usize) {
    if level == SimplifyLevel::None {
        return (e.clone(), 0);
    }
    let mut current = e.clone();
    for pass_no in 1..=MAX_PASSES {
        let next = pass(&current, level, &VarSet::new());
        if next == current {
            return (current, pass_no);
        }
        current = next;
    }
    (current, MAX_PASSES)
}

/// `Σ_S P(A|C)` where the effective sum is exactly `A`: identically one.
pub fn is_unit(e: &Expression) -> bool {
    match e {
        Expression::Marginal { sumset, body } => match body.as_ref() {
            Expression::Atom { var, cond } => {
                let effective: VarSet = sumset
                    .iter()
                    .filter(|v| var.contains(*v) || cond.contains(*v))
                    .cloned()
                    .collect();
                &effective == var
            }
            _ => false,
        },
        _ => false,
    }
}

/// One bottom-up pass. `bound` holds the variables summed by enclosing
/// marginals; no rewrite may remove one of them from a subexpression, since
/// the enclosing sum would then silently change its range.
fn pass(e: &Expression, level: SimplifyLevel, bound: &VarSet) -> Expression {
    match e {
        Expression::Atom { .. } => e.clone(),
        Expression::Product { children } => {
            product(children.iter().map(|c| pass(c, level, bound)).collect(), level, bound)
        }
        Expression::Marginal { sumset, body } => {
            let effective: VarSet = free_variables(body).intersection(sumset).cloned().collect();
            let inner: VarSet = bound.union(&effective).cloned().collect();
            marginal(&effective, pass(body, level, &inner))
        }
        Expression::Quotient { num, den } => quotient(pass(num, level, bound), pass(den, level, bound), bound),
    }
}

/// Variables of `bound` that occur free in any of `parts`.
fn protected<'a>(parts: impl IntoIterator<Item = &'a Expression>, bound: &VarSet) -> VarSet {
    parts
        .into_iter()
        .flat_map(free_variables)
        .filter(|v| bound.contains(v))
        .collect()
}

/// Whether `parts` still mention every variable in `required`.
fn covers<'a>(parts: impl IntoIterator<Item = &'a Expression>, required: &VarSet) -> bool {
    required.is_subset(&protected(parts, required))
}

fn sort_key(e: &Expression) -> (String, String) {
    (to_latex(e), to_text(e))
}

fn canonical_sort(children: &mut [Expression]) {
    children.sort_by_cached_key(sort_key);
}

fn factors(e: Expression) -> Vec<Expression> {
    match e {
        Expression::Product { children } => children,
        other => vec![other],
    }
}

fn rebuild(mut children: Vec<Expression>) -> Expression {
    if children.len() == 1 {
        children.pop().expect("one child")
    } else {
        Expression::Product { children }
    }
}

fn product(children: Vec<Expression>, level: SimplifyLevel, bound: &VarSet) -> Expression {
    let mut flat: Vec<Expression> = children.into_iter().flat_map(factors).collect();
    let required = protected(&flat, bound);
    let mut i = 0;
    while i < flat.len() {
        let droppable = is_unit(&flat[i])
            && flat.iter().any(|c| !is_unit(c))
            && covers(
                flat.iter().enumerate().filter(|(k, _)| *k != i).map(|(_, c)| c),
                &required,
            );
        if droppable {
            flat.remove(i);
        } else {
            i += 1;
        }
    }
    canonical_sort(&mut flat);
    if level == SimplifyLevel::Full {
        while let Some((i, j, merged)) = find_chain(&flat) {
            flat[i] = merged;
            flat.remove(j);
            canonical_sort(&mut flat);
        }
    }
    rebuild(flat)
}

/// First pair `(i, j)` in canonical order with `P(A|B,C)` at `i` and
/// `P(B|C)` at `j`.
fn find_chain(children: &[Expression]) -> Option<(usize, usize, Expression)> {
    for (i, first) in children.iter().enumerate() {
        let Expression::Atom { var: v1, cond: c1 } = first else {
            continue;
        };
        for (j, second) in children.iter().enumerate() {
            if i == j {
                continue;
            }
            let Expression::Atom { var: v2, cond: c2 } = second else {
                continue;
            };
            let chained: VarSet = v2.union(c2).cloned().collect();
            if c1 == &chained {
                let merged = Expression::Atom {
                    var: v1.union(v2).cloned().collect(),
                    cond: c2.clone(),
                };
                return Some((i, j, merged));
            }
        }
    }
    None
}

fn marginal(sumset: &VarSet, body: Expression) -> Expression {
    let effective: VarSet = free_variables(&body).intersection(sumset).cloned().collect();
    if effective.is_empty() {
        return body;
    }
    match body {
        Expression::Marginal { sumset: inner, body } => Expression::Marginal {
            sumset: effective.union(&inner).cloned().collect(),
            body,
        },
        Expression::Atom { var, cond } => {
            let kept: VarSet = var.difference(&effective).cloned().collect();
            if kept.is_empty() {
                // Summing out every variable leaves either one or a count.
                return Expression::marginal(effective, Expression::Atom { var, cond });
            }
            let rest: VarSet = effective.difference(&var).cloned().collect();
            Expression::marginal(rest, Expression::Atom { var: kept, cond })
        }
        Expression::Product { children } => {
            let (inside, outside): (Vec<_>, Vec<_>) = children
                .into_iter()
                .partition(|c| !free_variables(c).is_disjoint(&effective));
            let summed = Expression::marginal(effective, rebuild(inside));
            if outside.is_empty() {
                summed
            } else {
                let mut all = outside;
                all.push(summed);
                Expression::Product { children: all }
            }
        }
        quotient @ Expression::Quotient { .. } => Expression::marginal(effective, quotient),
    }
}

fn quotient(num: Expression, den: Expression, bound: &VarSet) -> Expression {
    let required = protected([&num, &den], bound);
    let mut nf = factors(num);
    let mut df = factors(den);
    let keeps = |nf: &[Expression], df: &[Expression]| covers(nf.iter().chain(df), &required);

    let mut i = 0;
    while i < df.len() {
        let rest: Vec<Expression> = df
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != i)
            .map(|(_, d)| d.clone())
            .collect();
        if is_unit(&df[i]) && keeps(&nf, &rest) {
            df = rest;
        } else {
            i += 1;
        }
    }

    let mut i = 0;
    while i < df.len() {
        let cancel = nf.iter().position(|n| n == &df[i]).filter(|&k| {
            let nrest: Vec<Expression> = nf
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != k)
                .map(|(_, n)| n.clone())
                .collect();
            let drest: Vec<Expression> = df
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, d)| d.clone())
                .collect();
            nf.len() > 1 && keeps(&nrest, &drest)
        });
        match cancel {
            Some(k) => {
                nf.remove(k);
                df.remove(i);
            }
            None => i += 1,
        }
    }

    let mut i = 0;
    while i < df.len() {
        let folded = match &df[i] {
            Expression::Atom { var: b, cond: c } => nf.iter().enumerate().find_map(|(k, n)| match n {
                Expression::Atom { var: a, cond } if cond == c && b.is_subset(a) && b != a => Some((
                    k,
                    Expression::Atom {
                        var: a.difference(b).cloned().collect(),
                        cond: c.union(b).cloned().collect(),
                    },
                )),
                _ => None,
            }),
            _ => None,
        };
        match folded {
            Some((k, atom)) => {
                nf[k] = atom;
                df.remove(i);
            }
            None => i += 1,
        }
    }

    if df.is_empty() {
        rebuild(nf)
    } else {
        Expression::quotient(rebuild(nf), rebuild(df))
    }
}
