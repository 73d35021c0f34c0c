use std::collections::{BTreeSet, HashMap, HashSet};

use varisat::{ExtendFormula, Lit, Solver, Var};

use super::eval::{bit, compile, index_tuple, Compiled, Node, RelRef, SemanticsMode, Term};
use super::Formula;
use crate::error::{Error, Result};
use crate::structure::{Elem, Structure, Tuple};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Gate {
    Const(bool),
    Lit(Var, bool),
    And(Vec<usize>),
    Or(Vec<usize>),
}

const FALSE: usize = 0;
const TRUE: usize = 1;

#[derive(Default)]
struct Circuit {
    gates: Vec<Gate>,
    memo: HashMap<Gate, usize>,
    vars: HashMap<(usize, usize), Var>,
    next_var: usize,
}

impl Circuit {
    fn new() -> Self {
        let mut c = Circuit::default();
        c.intern(Gate::Const(false));
        c.intern(Gate::Const(true));
        c
    }

    fn intern(&mut self, g: Gate) -> usize {
        if let Some(&id) = self.memo.get(&g) {
            return id;
        }
        let id = self.gates.len();
        self.gates.push(g.clone());
        self.memo.insert(g, id);
        id
    }

    fn var(&mut self, instance: usize, tuple: usize) -> Var {
        let next = &mut self.next_var;
        *self.vars.entry((instance, tuple)).or_insert_with(|| {
            *next += 1;
            Var::from_index(*next - 1)
        })
    }

    fn junction(&mut self, conj: bool, parts: Vec<usize>) -> usize {
        let (unit, zero) = if conj { (TRUE, FALSE) } else { (FALSE, TRUE) };
        let mut kept = Vec::with_capacity(parts.len());
        for p in parts {
            if p == zero {
                return zero;
            }
            if p == unit {
                continue;
            }
            match &self.gates[p] {
                Gate::And(cs) if conj => kept.extend(cs.iter().copied()),
                Gate::Or(cs) if !conj => kept.extend(cs.iter().copied()),
                _ => kept.push(p),
            }
        }
        kept.sort_unstable();
        kept.dedup();
        match kept.len() {
            0 => unit,
            1 => kept[0],
            _ => self.intern(if conj { Gate::And(kept) } else { Gate::Or(kept) }),
        }
    }
}

struct Grounder<'a> {
    c: &'a Compiled,
    guarded: Vec<HashSet<usize>>,
    mode: SemanticsMode,
    circuit: Circuit,
    fo: Vec<Elem>,
    so: Vec<usize>,
    instances: usize,
    trace_instance: Option<usize>,
    /// free first-order slots of each quantifier node, keyed by address
    free: HashMap<usize, Vec<usize>>,
    memo: HashMap<(usize, Vec<Elem>, Vec<usize>), usize>,
}

fn free_slots(node: &Node, out: &mut HashMap<usize, Vec<usize>>) -> BTreeSet<usize> {
    let term = |t: &Term| match t {
        Term::Var(s) => Some(*s),
        Term::Const(_) => None,
    };
    match node {
        Node::True | Node::False => BTreeSet::new(),
        Node::Rel(_, args) => args.iter().filter_map(term).collect(),
        Node::Eq(x, y) => [x, y].into_iter().filter_map(term).collect(),
        Node::Not(g) | Node::SoExists(_, _, g) | Node::SoForall(_, _, g) => free_slots(g, out),
        Node::And(x, y) | Node::Or(x, y) | Node::Implies(x, y) | Node::Iff(x, y) => {
            let mut f = free_slots(x, out);
            f.extend(free_slots(y, out));
            f
        }
        Node::Exists(s, g) | Node::Forall(s, g) => {
            let mut f = free_slots(g, out);
            f.remove(s);
            out.insert(node as *const Node as usize, f.iter().copied().collect());
            f
        }
    }
}

impl Grounder<'_> {
    fn val(&self, t: Term) -> Elem {
        match t {
            Term::Var(s) => self.fo[s],
            Term::Const(e) => e,
        }
    }

    fn literal(&mut self, node: &Node, positive: bool) -> usize {
        let truth = |b: bool| if b == positive { TRUE } else { FALSE };
        match node {
            Node::Eq(x, y) => truth(self.val(*x) == self.val(*y)),
            Node::Rel(r, args) => {
                let idx = args
                    .iter()
                    .fold(0usize, |acc, &t| acc * self.c.n + self.val(t) as usize);
                match r {
                    RelRef::Struct(i) => truth(bit(&self.c.rels[*i], idx)),
                    RelRef::So(s) => {
                        let arity = self.c.so_slots[*s].1;
                        if self.mode == SemanticsMode::Guarded && !self.guarded[arity].contains(&idx) {
                            return truth(false);
                        }
                        let v = self.circuit.var(self.so[*s], idx);
                        self.circuit.intern(Gate::Lit(v, positive))
                    }
                }
            }
            Node::True => truth(true),
            Node::False => truth(false),
            _ => unreachable!("negation normal form"),
        }
    }

    fn ground(&mut self, node: &Node) -> usize {
        match node {
            Node::True | Node::False | Node::Eq(..) | Node::Rel(..) => self.literal(node, true),
            Node::Not(g) => self.literal(g, false),
            Node::And(x, y) | Node::Or(x, y) => {
                let parts = vec![self.ground(x), self.ground(y)];
                self.circuit.junction(matches!(node, Node::And(..)), parts)
            }
            Node::Exists(s, g) | Node::Forall(s, g) => {
                let addr = node as *const Node as usize;
                let key = (
                    addr,
                    self.free[&addr].iter().map(|&v| self.fo[v]).collect(),
                    self.so.clone(),
                );
                if let Some(&id) = self.memo.get(&key) {
                    return id;
                }
                let mut parts = Vec::with_capacity(self.c.n);
                for e in 0..self.c.n as Elem {
                    self.fo[*s] = e;
                    parts.push(self.ground(g));
                }
                let id = self.circuit.junction(matches!(node, Node::Forall(..)), parts);
                self.memo.insert(key, id);
                id
            }
            Node::SoExists(s, _, g) => {
                let inst = self.instances;
                self.instances += 1;
                if self.c.trace_slot == Some(*s) && self.trace_instance.is_none() {
                    self.trace_instance = Some(inst);
                }
                let saved = self.so[*s];
                self.so[*s] = inst;
                let out = self.ground(g);
                self.so[*s] = saved;
                out
            }
            Node::Implies(..) | Node::Iff(..) | Node::SoForall(..) => {
                unreachable!("negation normal form with existential second-order quantifiers")
            }
        }
    }
}

fn so_polarities(f: &Formula, out: &mut BTreeSet<bool>) {
    use Formula as F;
    match f {
        F::True | F::False | F::Atom(..) | F::Eq(..) => {}
        F::Not(g) | F::Exists(_, g) | F::Forall(_, g) => so_polarities(g, out),
        F::And(x, y) | F::Or(x, y) | F::Implies(x, y) | F::Iff(x, y) => {
            so_polarities(x, out);
            so_polarities(y, out);
        }
        F::SoExists(_, _, g) => {
            out.insert(true);
            so_polarities(g, out);
        }
        F::SoForall(_, _, g) => {
            out.insert(false);
            so_polarities(g, out);
        }
    }
}

/// Decides `phi` by grounding its second-order quantifiers into a SAT
/// instance. All of them must be existential, or all universal, once
/// negations are pushed inward.
pub(crate) fn ground_and_solve(
    phi: &Formula,
    a: &Structure,
    mode: SemanticsMode,
    assignment: &[(&str, Elem)],
) -> Result<(bool, Option<(String, BTreeSet<Tuple>)>)> {
    let nnf = phi.nnf();
    let mut pols = BTreeSet::new();
    so_polarities(&nnf, &mut pols);
    if pols.len() > 1 {
        return Err(Error::InvalidInput(
            "grounding needs second-order quantifiers of a single polarity".into(),
        ));
    }
    let negate = pols.contains(&false);
    let target = if negate { phi.clone().not().nnf() } else { nnf };
    let c = compile(&target, a, mode, assignment)?;
    let guarded = c
        .candidates
        .iter()
        .map(|cs| cs.iter().copied().collect())
        .collect();
    let mut free = HashMap::new();
    free_slots(&c.root, &mut free);
    let mut g = Grounder {
        c: &c,
        guarded,
        mode,
        circuit: Circuit::new(),
        fo: vec![0; c.fo_slots],
        so: vec![usize::MAX; c.so_slots.len()],
        instances: 0,
        trace_instance: None,
        free,
        memo: HashMap::new(),
    };
    let root = g.ground(&c.root);
    let trace_instance = g.trace_instance;
    let circuit = g.circuit;

    let (sat, model) = match circuit.gates[root] {
        Gate::Const(b) => (b, None),
        _ => {
            let mut solver = Solver::new();
            let mut gate_lit: Vec<Option<Lit>> = vec![None; circuit.gates.len()];
            let mut next = circuit.next_var;
            for (id, gate) in circuit.gates.iter().enumerate() {
                gate_lit[id] = Some(match gate {
                    Gate::Const(_) => continue,
                    Gate::Lit(v, pos) => Lit::from_var(*v, *pos),
                    Gate::And(_) | Gate::Or(_) => {
                        next += 1;
                        Lit::from_var(Var::from_index(next - 1), true)
                    }
                });
            }
            // children always precede their parent, and every gate occurs
            // positively, so one implication direction suffices
            for (id, gate) in circuit.gates.iter().enumerate() {
                let lit = |i: usize| gate_lit[i].expect("non-constant child");
                match gate {
                    Gate::And(cs) => {
                        for &ch in cs {
                            solver.add_clause(&[!lit(id), lit(ch)]);
                        }
                    }
                    Gate::Or(cs) => {
                        let mut clause = vec![!lit(id)];
                        clause.extend(cs.iter().map(|&ch| lit(ch)));
                        solver.add_clause(&clause);
                    }
                    _ => {}
                }
            }
            solver.add_clause(&[gate_lit[root].expect("non-constant root")]);
            let sat = solver
                .solve()
                .map_err(|e| Error::InvalidInput(format!("SAT solver failed: {e}")))?;
            (sat, if sat { solver.model() } else { None })
        }
    };

    let witness = match (sat, c.trace_slot, trace_instance) {
        (true, Some(slot), Some(inst)) => {
            let (name, arity) = &c.so_slots[slot];
            let truth: HashSet<Lit> = model.unwrap_or_default().into_iter().collect();
            let tuples = c.candidates[*arity]
                .iter()
                .filter(|&&t| {
                    circuit
                        .vars
                        .get(&(inst, t))
                        .is_some_and(|v| truth.contains(&Lit::from_var(*v, true)))
                })
                .map(|&t| index_tuple(c.n, *arity, t))
                .collect();
            Some((name.clone(), tuples))
        }
        _ => None,
    };
    Ok((sat != negate, witness))
}
