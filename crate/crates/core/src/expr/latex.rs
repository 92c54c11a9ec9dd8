//! LaTeX and plain-text rendering.

use super::Expression;
use crate::admg::VarSet;

fn latex_names(vs: &VarSet) -> String {
    let mut names: Vec<(String, &str)> = vs.iter().map(|v| (v.as_str().to_lowercase(), v.as_str())).collect();
    names.sort();
    names.into_iter().map(|(lower, _)| lower).collect::<Vec<_>>().join(", ")
}

fn text_names(vs: &VarSet) -> String {
    vs.iter().map(|v| v.as_str()).collect::<Vec<_>>().join(", ")
}

/// Renders `e` as LaTeX. Variables are written in lowercase, sorted, and
/// product factors appear in the order stored in the tree.
///
/// ```
/// use causal_id::expr::{p, to_latex, Expression};
/// use causal_id::admg::var_set;
/// let e = Expression::marginal(
///     var_set(["Z"]),
///     Expression::product(vec![p(["Y"], ["X", "Z"]), p(["Z"], [])]).unwrap(),
/// );
/// assert_eq!(to_latex(&e), r"\sum_{z}P(y|x, z)P(z)");
/// ```
pub fn to_latex(e: &Expression) -> String {
    match e {
        Expression::Atom { var, cond } => {
            if cond.is_empty() {
                format!("P({})", latex_names(var))
            } else {
                format!("P({}|{})", latex_names(var), latex_names(cond))
            }
        }
        Expression::Product { children } => {
            let last = children.len().saturating_sub(1);
            children
                .iter()
                .enumerate()
                .map(|(i, c)| match c {
                    Expression::Marginal { .. } if i < last => {
                        format!("\\left({}\\right)", to_latex(c))
                    }
                    _ => to_latex(c),
                })
                .collect()
        }
        Expression::Marginal { sumset, body } => {
            format!("\\sum_{{{}}}{}", latex_names(sumset), to_latex(body))
        }
        Expression::Quotient { num, den } => {
            format!("\\frac{{{}}}{{{}}}", to_latex(num), to_latex(den))
        }
    }
}

/// Renders `e` as plain text, keeping variable names as written.
pub fn to_text(e: &Expression) -> String {
    match e {
        Expression::Atom { var, cond } => {
            if cond.is_empty() {
                format!("P({})", text_names(var))
            } else {
                format!("P({} | {})", text_names(var), text_names(cond))
            }
        }
        Expression::Product { children } => {
            let last = children.len().saturating_sub(1);
            children
                .iter()
                .enumerate()
                .map(|(i, c)| match c {
                    Expression::Marginal { .. } if i < last => format!("[{}]", to_text(c)),
                    _ => to_text(c),
                })
                .collect::<Vec<_>>()
                .join(" ")
        }
        Expression::Marginal { sumset, body } => {
            format!("sum_{{{}}} {}", text_names(sumset), to_text(body))
        }
        Expression::Quotient { num, den } => format!("({}) / ({})", to_text(num), to_text(den)),
    }
}
