//! `verify`: compare an identified expression against a model's exact
//! interventional distribution.

use std::collections::{BTreeMap, HashMap};
use std::process::ExitCode;

use anyhow::{bail, Context};
use causal_id::admg::VarSet;
use causal_id::expr::{free_variables, to_latex};
use causal_id::identify::{identify, IdentifyError, Query};
use causal_id::oracle::{
    conditional_from_table, interventional, joint, load_model, random_scm_with_domains, scm_graph, Binding,
    DiscreteScm, Evaluator, JointTable, OracleError,
};
use causal_id::Expression;

use crate::{VerifyArgs, EXIT_NOT_IDENTIFIABLE, EXIT_TOLERANCE};

/// Every binding of `vars` with the domain sizes of `model`.
fn bindings(model: &DiscreteScm, vars: &VarSet) -> Vec<Binding> {
    let mut out = vec![Binding::new()];
    for var in vars {
        let size = model.variable(var).map_or(1, |o| o.labels.len());
        out = out
            .into_iter()
            .flat_map(|b| {
                (0..size).map(move |value| {
                    let mut b = b.clone();
                    b.insert(var.clone(), value);
                    b
                })
            })
            .collect();
    }
    out
}

fn restrict(b: &Binding, vars: &VarSet) -> Binding {
    b.iter()
        .filter(|(k, _)| vars.contains(*k))
        .map(|(k, v)| (k.clone(), *v))
        .collect()
}

/// Exact `P_x(y | z)` for the model, caching one table per intervention.
struct Oracle<'a> {
    model: &'a DiscreteScm,
    tables: HashMap<Binding, JointTable>,
}

impl Oracle<'_> {
    /// `None` when the conditioning event has probability zero.
    fn value(&mut self, q: &Query, b: &Binding) -> Result<Option<f64>, OracleError> {
        let xb = restrict(b, &q.x);
        if !self.tables.contains_key(&xb) {
            let t = interventional(self.model, &xb)?;
            self.tables.insert(xb.clone(), t);
        }
        let t = &self.tables[&xb];
        let yb = restrict(b, &q.y);
        if q.z.is_empty() {
            return t.marginal_probability(&yb).map(Some);
        }
        match conditional_from_table(t, &yb, &restrict(b, &q.z)) {
            Ok(v) => Ok(Some(v)),
            Err(OracleError::ZeroDenominator) => Ok(None),
            Err(e) => Err(e),
        }
    }
}

struct Comparison {
    max_deviation: f64,
    /// Bindings skipped because a conditioning event has probability zero.
    skipped: usize,
}

fn compare(model: &DiscreteScm, q: &Query, e: &Expression) -> anyhow::Result<Comparison> {
    let table = joint(model);
    let evaluator = Evaluator::new(&table);
    let mut oracle = Oracle {
        model,
        tables: HashMap::new(),
    };
    let mut vars = free_variables(e);
    vars.extend(q.y.iter().chain(&q.x).chain(&q.z).cloned());
    let mut result = Comparison {
        max_deviation: 0.0,
        skipped: 0,
    };
    for b in bindings(model, &vars) {
        let expected = oracle.value(q, &b)?;
        let got = match evaluator.evaluate(e, &b) {
            Ok(v) => Some(v),
            Err(OracleError::ZeroDenominator) => None,
            Err(err) => return Err(err.into()),
        };
        match (got, expected) {
            (Some(got), Some(expected)) => result.max_deviation = result.max_deviation.max((got - expected).abs()),
            _ => result.skipped += 1,
        }
    }
    Ok(result)
}

fn describe(model: &DiscreteScm, q: &Query, b: &Binding) -> String {
    let assign = |vars: &VarSet| {
        vars.iter()
            .map(|v| {
                let label = model.variable(v).map_or("?", |o| o.labels[b[v]].as_str());
                format!("{v}={label}")
            })
            .collect::<Vec<_>>()
            .join(", ")
    };
    let mut s = String::from("P");
    if !q.x.is_empty() {
        s.push_str(&format!("_{{{}}}", assign(&q.x)));
    }
    s.push_str(&format!("({}", assign(&q.y)));
    if !q.z.is_empty() {
        s.push_str(&format!(" | {}", assign(&q.z)));
    }
    s.push(')');
    s
}

/// Values of the identified expression on the model itself, one line per
/// assignment of the query variables. Other free variables are fixed to
/// their first value.
fn print_values(model: &DiscreteScm, q: &Query, e: &Expression) -> anyhow::Result<()> {
    let table = joint(model);
    let evaluator = Evaluator::new(&table);
    let query_vars: VarSet = q.y.iter().chain(&q.x).chain(&q.z).cloned().collect();
    for b in bindings(model, &query_vars) {
        let mut full = b.clone();
        for v in free_variables(e).difference(&query_vars) {
            full.insert(v.clone(), 0);
        }
        match evaluator.evaluate(e, &full) {
            Ok(value) => println!("  {} = {value:.6}", describe(model, q, &b)),
            Err(OracleError::ZeroDenominator) => println!("  {} undefined", describe(model, q, &b)),
            Err(err) => return Err(err.into()),
        }
    }
    Ok(())
}

pub fn run(args: VerifyArgs) -> anyhow::Result<ExitCode> {
    if args.trials == 0 {
        bail!("--trials must be at least 1");
    }
    let model = load_model(&args.model).with_context(|| format!("loading {}", args.model.display()))?;
    let g = scm_graph(&model)?;
    let q = args.query.to_query()?;
    let e = match identify(&q, &g) {
        Ok(e) => e,
        Err(IdentifyError::NotIdentifiable(w)) => {
            println!("not identifiable: {w}");
            return Ok(ExitCode::from(EXIT_NOT_IDENTIFIABLE));
        }
        Err(err) => return Err(err.into()),
    };
    println!("expression: {}", to_latex(&e));
    print_values(&model, &q, &e)?;

    let domains: BTreeMap<_, _> = model
        .observed()
        .iter()
        .map(|o| (o.name.clone(), o.labels.len()))
        .collect();
    let mut worst = 0.0f64;
    for trial in 0..args.trials {
        let (label, c) = if trial == 0 {
            ("model file".to_string(), compare(&model, &q, &e)?)
        } else {
            let seed = args.seed.wrapping_add(trial as u64);
            let m = random_scm_with_domains(&g, seed, &domains);
            (format!("seed {seed}"), compare(&m, &q, &e)?)
        };
        worst = worst.max(c.max_deviation);
        let skipped = if c.skipped > 0 {
            format!(", {} undefined bindings skipped", c.skipped)
        } else {
            String::new()
        };
        println!(
            "trial {} ({label}): max deviation {:.3e}{skipped}",
            trial + 1,
            c.max_deviation
        );
    }
    println!("max deviation {worst:.3e} (tolerance {:.3e})", args.tolerance);
    Ok(if worst <= args.tolerance {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_TOLERANCE)
    })
}
