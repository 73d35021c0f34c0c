use std::collections::BTreeSet;

use super::{DatalogProgram, Term, GOAL};
use crate::error::{Error, Result};
use crate::structure::{Elem, Signature, Structure, StructureBuilder, Tuple};

const UNBOUND: Elem = Elem::MAX;

struct CompiledRule {
    head_rel: usize,
    head: Vec<usize>,
    body: Vec<(usize, Vec<usize>)>,
    vars: usize,
    // join order with no delta atom, then one per IDB body position
    plain_order: Vec<usize>,
    delta_orders: Vec<(usize, Vec<usize>)>,
}

/// A program compiled for repeated semi-naive evaluation.
pub struct Evaluator {
    edb: Signature,
    full: Signature,
    rules: Vec<CompiledRule>,
    goal: usize,
}

fn join_order(body: &[(usize, Vec<usize>)], first: Option<usize>, vars: usize) -> Vec<usize> {
    let mut bound = vec![false; vars];
    let mut order = Vec::with_capacity(body.len());
    let mut pending: Vec<usize> = (0..body.len()).collect();
    let take = |i: usize, order: &mut Vec<usize>, bound: &mut Vec<bool>| {
        order.push(i);
        for &v in &body[i].1 {
            bound[v] = true;
        }
    };
    if let Some(f) = first {
        pending.retain(|&i| i != f);
        take(f, &mut order, &mut bound);
    }
    while !pending.is_empty() {
        // most bound arguments first; ties keep rule order
        let (pos, _) = pending
            .iter()
            .enumerate()
            .max_by_key(|&(p, &i)| {
                let b = body[i].1.iter().filter(|&&v| bound[v]).count();
                let all = b == body[i].1.len();
                (all, b, std::cmp::Reverse(p))
            })
            .expect("non-empty");
        let i = pending.remove(pos);
        take(i, &mut order, &mut bound);
    }
    order
}

impl Evaluator {
    pub fn new(p: &DatalogProgram) -> Result<Self> {
        let full = p.full_signature();
        let index = |name: &str| full.relation_index(name).expect("declared");
        let mut rules = Vec::new();
        for rule in p.rules() {
            if rule.has_constants() {
                return Err(Error::ConstantInRule(rule.to_string()));
            }
            let names = rule.variables();
            let var = |t: &Term| match t {
                Term::Var(v) => names.iter().position(|n| n == v).expect("collected"),
                Term::Const(_) => unreachable!("rejected above"),
            };
            let body: Vec<(usize, Vec<usize>)> = rule
                .body
                .iter()
                .map(|a| (index(&a.rel), a.args.iter().map(var).collect()))
                .collect();
            let vars = names.len();
            let plain_order = join_order(&body, None, vars);
            let delta_orders = rule
                .body
                .iter()
                .enumerate()
                .filter(|(_, a)| p.idb().has_relation(&a.rel))
                .map(|(i, _)| (i, join_order(&body, Some(i), vars)))
                .collect();
            rules.push(CompiledRule {
                head_rel: index(&rule.head.rel),
                head: rule.head.args.iter().map(var).collect(),
                body,
                vars,
                plain_order,
                delta_orders,
            });
        }
        Ok(Evaluator {
            edb: p.edb().clone(),
            goal: index(GOAL),
            full,
            rules,
        })
    }

    fn run(&self, a: &Structure, stop_at_goal: bool) -> Result<Vec<BTreeSet<Tuple>>> {
        if a.signature() != &self.edb {
            return Err(Error::SignatureMismatch(format!(
                "program EDB is [{}], structure has [{}]",
                self.edb,
                a.signature()
            )));
        }
        let mut full: Vec<BTreeSet<Tuple>> = vec![BTreeSet::new(); self.full.relation_count()];
        for (i, (name, _)) in self.full.relations().enumerate() {
            if let Some(facts) = a.facts(name) {
                full[i] = facts.clone();
            }
        }

        let mut derived: Vec<BTreeSet<Tuple>> = vec![BTreeSet::new(); full.len()];
        for rule in &self.rules {
            self.fire(rule, &rule.plain_order, None, &full, &mut derived);
        }
        loop {
            let mut delta: Vec<BTreeSet<Tuple>> = vec![BTreeSet::new(); full.len()];
            let mut any = false;
            for (i, facts) in derived.iter_mut().enumerate() {
                for t in std::mem::take(facts) {
                    if !full[i].contains(&t) {
                        delta[i].insert(t);
                        any = true;
                    }
                }
            }
            if !any {
                return Ok(full);
            }
            for (i, d) in delta.iter().enumerate() {
                full[i].extend(d.iter().cloned());
            }
            if stop_at_goal && !full[self.goal].is_empty() {
                return Ok(full);
            }
            for rule in &self.rules {
                for (pos, order) in &rule.delta_orders {
                    let rel = rule.body[*pos].0;
                    if !delta[rel].is_empty() {
                        self.fire(rule, order, Some((*pos, &delta[rel])), &full, &mut derived);
                    }
                }
            }
        }
    }

    fn fire(
        &self,
        rule: &CompiledRule,
        order: &[usize],
        delta: Option<(usize, &BTreeSet<Tuple>)>,
        full: &[BTreeSet<Tuple>],
        out: &mut [BTreeSet<Tuple>],
    ) {
        let mut binding = vec![UNBOUND; rule.vars];
        let mut sink = |b: &[Elem]| {
            let t: Tuple = rule.head.iter().map(|&v| b[v]).collect();
            if !full[rule.head_rel].contains(&t) {
                out[rule.head_rel].insert(t);
            }
        };
        join(rule, order, 0, &mut binding, full, delta, &mut sink);
    }

    pub fn least_fixed_point(&self, a: &Structure) -> Result<Structure> {
        let rels = self.run(a, false)?;
        let mut b = StructureBuilder::with_names(self.full.clone(), a.names().to_vec())?;
        for (i, (name, _)) in self.full.relations().enumerate() {
            for t in &rels[i] {
                b.fact(name, t)?;
            }
        }
        for (c, e) in a.constants() {
            b.constant(c, e)?;
        }
        b.build()
    }

    pub fn derives_goal(&self, a: &Structure) -> Result<bool> {
        Ok(!self.run(a, true)?[self.goal].is_empty())
    }

    /// The IDB relations of the fixed point, by name.
    pub fn idb_relations(&self, a: &Structure) -> Result<Vec<(String, BTreeSet<Tuple>)>> {
        let rels = self.run(a, false)?;
        Ok(self
            .full
            .relations()
            .enumerate()
            .filter(|(_, (name, _))| !self.edb.has_relation(name))
            .map(|(i, (name, _))| (name.to_string(), rels[i].clone()))
            .collect())
    }
}

fn join(
    rule: &CompiledRule,
    order: &[usize],
    step: usize,
    binding: &mut Vec<Elem>,
    full: &[BTreeSet<Tuple>],
    delta: Option<(usize, &BTreeSet<Tuple>)>,
    sink: &mut dyn FnMut(&[Elem]),
) {
    let Some(&ai) = order.get(step) else {
        sink(binding);
        return;
    };
    let (rel, vars) = &rule.body[ai];
    let src = match delta {
        Some((d, set)) if d == ai => set,
        _ => &full[*rel],
    };
    if vars.iter().all(|&v| binding[v] != UNBOUND) {
        let t: Tuple = vars.iter().map(|&v| binding[v]).collect();
        if src.contains(&t) {
            join(rule, order, step + 1, binding, full, delta, sink);
        }
        return;
    }
    let candidates: Box<dyn Iterator<Item = &Tuple>> = match vars.first() {
        Some(&v0) if binding[v0] != UNBOUND => {
            let b0 = binding[v0];
            Box::new(src.range(vec![b0]..vec![b0 + 1]))
        }
        _ => Box::new(src.iter()),
    };
    let mut newly = Vec::with_capacity(vars.len());
    for t in candidates {
        let mut ok = true;
        for (p, &v) in vars.iter().enumerate() {
            if binding[v] == UNBOUND {
                binding[v] = t[p];
                newly.push(v);
            } else if binding[v] != t[p] {
                ok = false;
                break;
            }
        }
        if ok {
            join(rule, order, step + 1, binding, full, delta, sink);
        }
        for v in newly.drain(..) {
            binding[v] = UNBOUND;
        }
    }
}

/// `Π(a)`: the least expansion of `a` by the IDB relations satisfying every rule.
pub fn least_fixed_point(p: &DatalogProgram, a: &Structure) -> Result<Structure> {
    Evaluator::new(p)?.least_fixed_point(a)
}

pub fn derives_goal(p: &DatalogProgram, a: &Structure) -> Result<bool> {
    Evaluator::new(p)?.derives_goal(a)
}
