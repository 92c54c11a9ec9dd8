//! Fixtures, generators and independent numerical checks shared by the
//! integration tests.

#![allow(dead_code)]

use std::collections::HashMap;

use causal_id::admg::{parse_graph, Admg, VarSet, VertexName};
use causal_id::expr::{free_variables, Expression};
use causal_id::identify::Query;
use causal_id::oracle::{
    conditional_from_table, interventional, joint, Binding, DiscreteScm, Evaluator, JointTable, ObservedVar,
};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn v(name: &str) -> VertexName {
    VertexName::new(name).unwrap()
}

pub fn set(names: &[&str]) -> VarSet {
    names.iter().map(|n| v(n)).collect()
}

pub fn graph(edges: &[&str]) -> Admg {
    parse_graph(edges).unwrap()
}

pub fn front_door() -> Admg {
    graph(&["X->Z", "Z->Y", "X<->Y"])
}

pub fn bow_arc() -> Admg {
    graph(&["X->Y", "X<->Y"])
}

pub fn sunscreen_graph() -> Admg {
    graph(&["Z->X", "Z->Y", "X->Y"])
}

/// Z->X, X->W, W->Y, X->Y, Z->Y.
pub fn graph_1a() -> Admg {
    graph(&["Z->X", "X->W", "W->Y", "X->Y", "Z->Y"])
}

/// Collider chain between X and Y with one confounded pair.
pub fn dsep_example() -> Admg {
    graph(&["X->Z1", "Z2->Z1", "Z3->Z2", "Y->Z3", "Z1<->Z3"])
}

/// Reconstruction: non-identifiable `P_x(y)` failing on `P_{x,z}(w)`.
pub fn hedge_example() -> Admg {
    graph(&["X->W", "Z->W", "W->Y", "X<->W", "X<->Z"])
}

/// Reconstruction: toxin, afflictions and survival of mother and child.
pub fn pregnancy() -> Admg {
    graph(&["W->X", "X->Y1", "Z->Y2", "W<->Y1", "W<->Z", "X<->Z", "Y2<->Z"])
}

/// [`pregnancy`] plus `W->Z`.
pub fn pregnancy_linked() -> Admg {
    graph(&["W->X", "X->Y1", "Z->Y2", "W->Z", "W<->Y1", "W<->Z", "X<->Z", "Y2<->Z"])
}

/// Reconstruction: conditional effect with a free introduced variable.
pub fn conditional_example() -> Admg {
    graph(&["W->X", "W->Z", "X->Z", "Z->Y", "X<->Y"])
}

fn bern(p: f64) -> Vec<f64> {
    vec![p, 1.0 - p]
}

fn tf_var(name: &str, parents: &[&str], cpt: Vec<Vec<f64>>) -> ObservedVar {
    ObservedVar {
        name: v(name),
        labels: vec!["T".into(), "F".into()],
        parents: parents.iter().map(|p| v(p)).collect(),
        cpt,
    }
}

/// Season, sunscreen and sunburn; value 0 is `T`.
pub fn sunscreen_scm() -> DiscreteScm {
    DiscreteScm::new(
        vec![
            tf_var("Z", &[], vec![bern(0.25)]),
            tf_var("X", &["Z"], vec![bern(0.9), bern(0.7)]),
            tf_var("Y", &["X", "Z"], vec![bern(0.99), bern(0.2), bern(0.6), bern(0.05)]),
        ],
        vec![],
    )
    .unwrap()
}

pub const NAMES: [&str; 8] = ["A", "B", "C", "D", "E", "F", "G", "H"];

/// Random ADMG on the first `n` of [`NAMES`]: a random causal order, each
/// forward pair joined with probability `p_dir`, and up to `max_bi`
/// distinct bidirected edges.
pub fn random_admg<R: Rng>(rng: &mut R, n: usize, p_dir: f64, max_bi: usize) -> Admg {
    let mut order: Vec<VertexName> = NAMES[..n].iter().map(|s| v(s)).collect();
    order.shuffle(rng);
    let mut directed = Vec::new();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p_dir) {
                directed.push((order[i].clone(), order[j].clone()));
            }
            pairs.push((order[i].clone(), order[j].clone()));
        }
    }
    pairs.shuffle(rng);
    let k = rng.gen_range(0..=max_bi.min(pairs.len()));
    Admg::new(order.clone(), directed, pairs.into_iter().take(k)).unwrap()
}

/// Random query with nonempty `y`, possibly empty `x`, and `z` only when
/// `with_condition` is set.
pub fn random_query<R: Rng>(rng: &mut R, g: &Admg, with_condition: bool) -> Query {
    let mut vs: Vec<VertexName> = g.vertices().iter().cloned().collect();
    vs.shuffle(rng);
    let n = vs.len();
    let ny = rng.gen_range(1..=n.min(2));
    let nx = rng.gen_range(0..=(n - ny).min(2));
    let nz = if with_condition {
        rng.gen_range(1..=(n - ny - nx).clamp(1, 2)).min(n - ny - nx)
    } else {
        0
    };
    let y = vs[..ny].iter().cloned().collect();
    let x = vs[ny..ny + nx].iter().cloned().collect();
    let z = vs[ny + nx..ny + nx + nz].iter().cloned().collect();
    Query::new(y, x, z)
}

/// Every assignment of `vars` with domain sizes taken from `table`.
pub fn assignments(vars: &VarSet, table: &JointTable) -> Vec<Binding> {
    let mut out = vec![Binding::new()];
    for var in vars {
        let size = table.size_of(var).expect("variable in table");
        out = out
            .into_iter()
            .flat_map(|b| {
                (0..size).map(move |val| {
                    let mut b = b.clone();
                    b.insert(var.clone(), val);
                    b
                })
            })
            .collect();
    }
    out
}

pub fn restrict(b: &Binding, vars: &VarSet) -> Binding {
    b.iter()
        .filter(|(k, _)| vars.contains(*k))
        .map(|(k, v)| (k.clone(), *v))
        .collect()
}

/// Oracle value of `P_x(y | z)` at the values in `b`.
pub struct EffectOracle<'a> {
    model: &'a DiscreteScm,
    cache: HashMap<Binding, JointTable>,
}

impl<'a> EffectOracle<'a> {
    pub fn new(model: &'a DiscreteScm) -> Self {
        Self {
            model,
            cache: HashMap::new(),
        }
    }

    pub fn value(&mut self, q: &Query, b: &Binding) -> f64 {
        let xb = restrict(b, &q.x);
        let model = self.model;
        let table = self
            .cache
            .entry(xb.clone())
            .or_insert_with(|| interventional(model, &xb).unwrap());
        let yb = restrict(b, &q.y);
        if q.z.is_empty() {
            table.marginal_probability(&yb).unwrap()
        } else {
            conditional_from_table(table, &yb, &restrict(b, &q.z)).unwrap()
        }
    }
}

/// Largest absolute gap between `e` evaluated on the observational joint
/// and the oracle effect, over every assignment of the query variables and
/// of the free variables of `e`.
pub fn max_deviation(model: &DiscreteScm, q: &Query, e: &Expression) -> f64 {
    let table = joint(model);
    let evaluator = Evaluator::new(&table);
    let mut oracle = EffectOracle::new(model);
    let mut vars = free_variables(e);
    vars.extend(q.y.iter().cloned());
    vars.extend(q.x.iter().cloned());
    vars.extend(q.z.iter().cloned());
    assignments(&vars, &table)
        .iter()
        .map(|b| (evaluator.evaluate(e, b).unwrap() - oracle.value(q, b)).abs())
        .fold(0.0, f64::max)
}

/// Conditional mutual information `I(X; Y | Z)` in nats.
pub fn conditional_mutual_information(t: &JointTable, x: &VarSet, y: &VarSet, z: &VarSet) -> f64 {
    let mut xyz = x.clone();
    xyz.extend(y.iter().cloned());
    xyz.extend(z.iter().cloned());
    let xz: VarSet = x.union(z).cloned().collect();
    let yz: VarSet = y.union(z).cloned().collect();
    assignments(&xyz, t)
        .iter()
        .map(|b| {
            let pxyz = t.marginal_probability(b).unwrap();
            if pxyz == 0.0 {
                return 0.0;
            }
            let pz = t.marginal_probability(&restrict(b, z)).unwrap();
            let pxz = t.marginal_probability(&restrict(b, &xz)).unwrap();
            let pyz = t.marginal_probability(&restrict(b, &yz)).unwrap();
            pxyz * (pxyz * pz / (pxz * pyz)).ln()
        })
        .sum()
}

fn random_subset<R: Rng>(rng: &mut R, pool: &[VertexName], p: f64) -> VarSet {
    pool.iter().filter(|_| rng.gen_bool(p)).cloned().collect()
}

/// Random expression tree over `vars`, at most `depth` levels deep.
pub fn random_expression<R: Rng>(rng: &mut R, vars: &[VertexName], depth: usize) -> Expression {
    let choice = if depth == 0 { 0 } else { rng.gen_range(0..4) };
    match choice {
        1 => {
            let n = rng.gen_range(2..=3);
            Expression::product((0..n).map(|_| random_expression(rng, vars, depth - 1)).collect()).unwrap()
        }
        2 => {
            let body = random_expression(rng, vars, depth - 1);
            let fv: Vec<VertexName> = free_variables(&body).into_iter().collect();
            let mut sumset = random_subset(rng, &fv, 0.5);
            if rng.gen_bool(0.2) {
                sumset.insert(vars.choose(rng).unwrap().clone());
            }
            Expression::marginal(sumset, body)
        }
        3 => Expression::quotient(
            random_expression(rng, vars, depth - 1),
            random_expression(rng, vars, depth - 1),
        ),
        _ => {
            let mut var = random_subset(rng, vars, 0.4);
            if var.is_empty() {
                var.insert(vars.choose(rng).unwrap().clone());
            }
            let rest: Vec<VertexName> = vars.iter().filter(|v| !var.contains(*v)).cloned().collect();
            let cond = random_subset(rng, &rest, 0.4);
            Expression::atom(var, cond).unwrap()
        }
    }
}

/// Strictly positive random joint table over `vars` with the given domain
/// sizes.
pub fn random_positive_table<R: Rng>(rng: &mut R, vars: &[VertexName], sizes: &[usize]) -> JointTable {
    let cells: usize = sizes.iter().product();
    let raw: Vec<f64> = (0..cells).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    JointTable::new(vars.to_vec(), sizes.to_vec(), raw.iter().map(|p| p / total).collect()).unwrap()
}

/// Largest gap between `a` and `b` over every binding of `vars`, scaled by
/// `max(1, |a|)`. For probability-valued expressions this is the absolute
/// gap; quotient trees can take values far above one, where only relative
/// error is meaningful.
pub fn evaluation_gap(t: &JointTable, a: &Expression, b: &Expression, vars: &VarSet) -> f64 {
    let evaluator = Evaluator::new(t);
    assignments(vars, t)
        .iter()
        .map(|bind| {
            let (x, y) = (
                evaluator.evaluate(a, bind).unwrap(),
                evaluator.evaluate(b, bind).unwrap(),
            );
            (x - y).abs() / x.abs().max(1.0)
        })
        .fold(0.0, f64::max)
}

/// Raw (unsimplified) identify outputs on random graphs, each with a
/// strictly positive observational table for the graph.
pub fn raw_identified_expressions<R: Rng>(rng: &mut R, count: usize) -> Vec<(Expression, JointTable)> {
    use causal_id::identify::{identify_traced, IdentifyOptions};
    use causal_id::oracle::random_scm;
    use causal_id::SimplifyLevel;
    let options = IdentifyOptions {
        simplify: SimplifyLevel::None,
        thin_hedge: false,
    };
    let mut out = Vec::new();
    while out.len() < count {
        let n = rng.gen_range(2..=6);
        let g = random_admg(rng, n, 0.4, 3);
        let conditional = rng.gen_bool(0.3);
        let q = random_query(rng, &g, conditional);
        if let Ok(e) = identify_traced(&q, &g, options).result {
            let seed = rng.gen();
            out.push((e, joint(&random_scm(&g, seed))));
        }
    }
    out
}

/// Largest entrywise gaps for the C-component factorization of `model`,
/// whose graph is `g`: `(a)` compares the joint against the product of
/// component factors obtained by intervention, `(b)` compares each factor
/// against the product of sequential conditionals of the joint.
pub fn c_component_factorization_gaps(model: &DiscreteScm, g: &Admg) -> (f64, f64) {
    let table = joint(model);
    let all = g.vertices().clone();
    let order = g.topological_order();
    let components = g.c_components();
    let mut cache: HashMap<Binding, JointTable> = HashMap::new();
    let (mut gap_a, mut gap_b) = (0.0f64, 0.0f64);
    for b in assignments(&all, &table) {
        let mut product = 1.0;
        for s in &components {
            let rest: VarSet = all.difference(s).cloned().collect();
            let fixed = restrict(&b, &rest);
            let t = cache
                .entry(fixed.clone())
                .or_insert_with(|| interventional(model, &fixed).unwrap());
            let factor = t.marginal_probability(&restrict(&b, s)).unwrap();
            product *= factor;

            let mut sequential = 1.0;
            for (i, vi) in order.iter().enumerate().filter(|(_, v)| s.contains(*v)) {
                let prev: VarSet = order[..i].iter().cloned().collect();
                let single: VarSet = [vi.clone()].into();
                sequential *= conditional_from_table(&table, &restrict(&b, &single), &restrict(&b, &prev)).unwrap();
            }
            gap_b = gap_b.max((factor - sequential).abs());
        }
        gap_a = gap_a.max((table.get(&b).unwrap() - product).abs());
    }
    (gap_a, gap_b)
}

/// Every ADMG on the given vertex names.
pub fn all_admgs(names: &[&str]) -> Vec<Admg> {
    let vs: Vec<VertexName> = names.iter().map(|n| v(n)).collect();
    let pairs: Vec<(usize, usize)> = (0..vs.len())
        .flat_map(|i| (i + 1..vs.len()).map(move |j| (i, j)))
        .collect();
    let mut out = Vec::new();
    let dir_states = 3usize.pow(pairs.len() as u32);
    for d in 0..dir_states {
        let mut code = d;
        let mut directed = Vec::new();
        for &(i, j) in &pairs {
            match code % 3 {
                1 => directed.push((vs[i].clone(), vs[j].clone())),
                2 => directed.push((vs[j].clone(), vs[i].clone())),
                _ => {}
            }
            code /= 3;
        }
        for mask in 0..(1usize << pairs.len()) {
            let bidirected = pairs
                .iter()
                .enumerate()
                .filter(|(k, _)| mask >> k & 1 == 1)
                .map(|(_, &(i, j))| (vs[i].clone(), vs[j].clone()));
            if let Ok(g) = Admg::new(vs.clone(), directed.clone(), bidirected) {
                out.push(g);
            }
        }
    }
    out
}

pub fn subsets(items: &[VertexName]) -> Vec<VarSet> {
    (0..(1usize << items.len()))
        .map(|mask| {
            items
                .iter()
                .enumerate()
                .filter(|(k, _)| mask >> k & 1 == 1)
                .map(|(_, v)| v.clone())
                .collect()
        })
        .collect()
}
