//! Numerical evaluation of expressions against a joint table.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use super::{for_each_assignment, mixed_radix, Binding, JointTable, OracleError};
use crate::admg::{VarSet, VertexName};
use crate::expr::{free_variables, Expression};

/// Evaluates expressions on one table, caching marginal tables by variable
/// subset.
pub struct Evaluator<'a> {
    table: &'a JointTable,
    cache: RefCell<HashMap<Vec<usize>, Rc<Vec<f64>>>>,
}

impl<'a> Evaluator<'a> {
    pub fn new(table: &'a JointTable) -> Self {
        Self {
            table,
            cache: RefCell::new(HashMap::new()),
        }
    }

    fn positions(&self, vars: &VarSet) -> Result<Vec<usize>, OracleError> {
        let mut pos = vars
            .iter()
            .map(|v| {
                self.table
                    .position(v)
                    .ok_or_else(|| OracleError::UnknownVariable(v.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        pos.sort_unstable();
        Ok(pos)
    }

    fn marginal_table(&self, positions: &[usize]) -> Rc<Vec<f64>> {
        if let Some(t) = self.cache.borrow().get(positions) {
            return Rc::clone(t);
        }
        let sizes: Vec<usize> = positions.iter().map(|&i| self.table.sizes()[i]).collect();
        let mut out = vec![0.0; sizes.iter().product()];
        let probs = self.table.probabilities();
        let mut k = 0;
        let mut digits = Vec::with_capacity(positions.len());
        for_each_assignment(self.table.sizes(), |full| {
            digits.clear();
            digits.extend(positions.iter().map(|&i| full[i]));
            out[mixed_radix(&digits, &sizes)] += probs[k];
            k += 1;
        });
        let out = Rc::new(out);
        self.cache.borrow_mut().insert(positions.to_vec(), Rc::clone(&out));
        out
    }

    /// Marginal probability that `vars` take their values in `b`.
    fn probability(&self, vars: &VarSet, b: &Binding) -> Result<f64, OracleError> {
        if vars.is_empty() {
            return Ok(1.0);
        }
        let positions = self.positions(vars)?;
        let mut digits = Vec::with_capacity(positions.len());
        let mut sizes = Vec::with_capacity(positions.len());
        for &i in &positions {
            let name = &self.table.variables()[i];
            let value = *b.get(name).ok_or_else(|| OracleError::UnboundVariable(name.clone()))?;
            let size = self.table.sizes()[i];
            if value >= size {
                return Err(OracleError::InvalidValue {
                    var: name.clone(),
                    value,
                });
            }
            digits.push(value);
            sizes.push(size);
        }
        Ok(self.marginal_table(&positions)[mixed_radix(&digits, &sizes)])
    }

    pub fn evaluate(&self, e: &Expression, b: &Binding) -> Result<f64, OracleError> {
        match e {
            Expression::Atom { var, cond } => {
                let den = self.probability(cond, b)?;
                if den == 0.0 {
                    return Err(OracleError::ZeroDenominator);
                }
                let both: VarSet = var.union(cond).cloned().collect();
                Ok(self.probability(&both, b)? / den)
            }
            Expression::Product { children } => {
                let mut acc = 1.0;
                for c in children {
                    acc *= self.evaluate(c, b)?;
                }
                Ok(acc)
            }
            Expression::Marginal { sumset, body } => {
                let summed: Vec<VertexName> = free_variables(body).intersection(sumset).cloned().collect();
                let sizes = summed
                    .iter()
                    .map(|v| {
                        self.table
                            .size_of(v)
                            .ok_or_else(|| OracleError::UnknownVariable(v.clone()))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let mut inner = b.clone();
                let mut total = 0.0;
                let mut failure = None;
                for_each_assignment(&sizes, |digits| {
                    if failure.is_some() {
                        return;
                    }
                    for (v, &d) in summed.iter().zip(digits) {
                        inner.insert(v.clone(), d);
                    }
                    match self.evaluate(body, &inner) {
                        Ok(x) => total += x,
                        Err(err) => failure = Some(err),
                    }
                });
                match failure {
                    Some(err) => Err(err),
                    None => Ok(total),
                }
            }
            Expression::Quotient { num, den } => {
                let d = self.evaluate(den, b)?;
                if d == 0.0 {
                    return Err(OracleError::ZeroDenominator);
                }
                Ok(self.evaluate(num, b)? / d)
            }
        }
    }
}

/// Value of `e` on table `t` with free variables bound by `b`. Sums range
/// only over summed variables that occur free in their body.
pub fn evaluate(e: &Expression, t: &JointTable, b: &Binding) -> Result<f64, OracleError> {
    Evaluator::new(t).evaluate(e, b)
}
