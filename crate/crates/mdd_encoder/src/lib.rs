//! Reduced ordered multi-valued decision diagrams for `sum c_i b_i <= B`
//! over the objective literals, built by degree-interval dynamic
//! programming. Each layer is a group of literals known to be pairwise
//! exclusive; singleton layers give the binary case.
//!
//! Every internal node gets a variable `v` with the defining constraints
//! `v -> suffix <= l` and `v <- suffix <= u`, proved in the log before any
//! encoding clause mentions `v`.

mod amo;
mod certify;

use std::collections::{BTreeMap, HashMap};

use pb_core::{Coeff, Lit, Objective, PbConstraint, Var};
use proof_log::{ConstraintId, ProofLogger};

pub use amo::{detect_amo_groups, Probe};

/// One layer: objective terms with the most expensive first, plus the proof ids
/// of `sum b_i <= 1` and `sum c_i b_i <= max c_i` when it has more than
/// one literal.
#[derive(Clone, Debug)]
pub struct Layer {
    pub terms: Vec<(Coeff, Lit)>,
    pub amo: Option<ConstraintId>,
    pub ub: Option<ConstraintId>,
}

impl Layer {
    pub fn max_cost(&self) -> Coeff {
        self.terms[0].0
    }

    pub fn cost_sum(&self) -> Coeff {
        self.terms.iter().map(|&(c, _)| c).sum()
    }
}

/// A child or root pointer. `Node` carries the layer it is used at and the
/// degree interval it represents there; a node reused at an earlier layer
/// than the one it was built for has a shifted lower bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeRef {
    False,
    True,
    Node { id: usize, layer: usize, lo: Coeff, hi: Coeff },
}

#[derive(Clone, Debug)]
pub struct MddNode {
    pub layer: usize,
    pub lo: Coeff,
    pub hi: Coeff,
    /// One child per literal of the layer, then the else-child.
    pub children: Vec<NodeRef>,
    pub var: Var,
    /// Proof-only variable for `suffix <= hi`; absent when `lo == hi`.
    pub vprime: Option<Var>,
    pub def: Option<Def>,
    pub encoded: bool,
}

/// Proof ids of the two defining constraints of a node variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Def {
    pub fwd: ConstraintId,
    pub bwd: ConstraintId,
}

/// Step count of one layer shift and the bound it must respect.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShiftRecord {
    pub skipped_layers: usize,
    pub skipped_lits: usize,
    pub steps: u64,
}

impl ShiftRecord {
    pub fn bound(&self) -> u64 {
        6 * self.skipped_lits as u64 + 3
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Encoding {
    /// The bound is below zero: no assignment is better than the incumbent.
    Infeasible,
    /// The bound cannot be exceeded under the layer constraints.
    Trivial,
    /// New clauses with their proof ids; the last one is the root unit.
    Clauses(Vec<(Vec<Lit>, ConstraintId)>),
}

pub struct MddEncoder {
    layers: Vec<Layer>,
    /// `S_k`: total cost of layers `k..`.
    suffix_sum: Vec<Coeff>,
    /// Largest value of layers `k..` respecting the groups.
    maxsum: Vec<Coeff>,
    constant: Coeff,
    memo: Vec<BTreeMap<Coeff, (Coeff, NodeRef)>>,
    nodes: Vec<MddNode>,
    shifted: HashMap<(usize, usize), Def>,
    shifts: Vec<ShiftRecord>,
    roots: Vec<ConstraintId>,
}

fn min_hi(a: Option<Coeff>, b: Option<Coeff>) -> Option<Coeff> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

impl MddEncoder {
    /// Lay out the objective in the given groups of term positions. Layers
    /// are ordered by descending maximum cost, literals inside a layer by
    /// descending cost, ties by variable. Positions in no group become
    /// singleton layers.
    pub fn new(o: &Objective, groups: &[Vec<usize>], log: &mut ProofLogger) -> MddEncoder {
        let mut seen = vec![false; o.len()];
        let mut layers: Vec<Vec<usize>> = Vec::new();
        for g in groups.iter().filter(|g| !g.is_empty()) {
            let mut g = g.clone();
            for &i in &g {
                assert!(!std::mem::replace(&mut seen[i], true), "position {i} in two groups");
            }
            g.sort_by_key(|&i| (std::cmp::Reverse(o.terms()[i].0), o.terms()[i].1.var()));
            layers.push(g);
        }
        layers.extend((0..o.len()).filter(|&i| !seen[i]).map(|i| vec![i]));
        layers.sort_by_key(|g| (std::cmp::Reverse(o.terms()[g[0]].0), o.terms()[g[0]].1.var()));
        MddEncoder::from_layers(o, &layers, log)
    }

    /// Use `layers` as given, in order. Together they must cover every
    /// objective position exactly once. Layers of two or more literals get
    /// their at-most-one and upper-bound constraints derived in `log`;
    /// every pair in such a layer must be RUP.
    pub fn from_layers(o: &Objective, layers: &[Vec<usize>], log: &mut ProofLogger) -> MddEncoder {
        let mut count = vec![0; o.len()];
        let mut layers: Vec<Layer> = layers
            .iter()
            .map(|g| {
                assert!(!g.is_empty(), "empty layer");
                let terms: Vec<(Coeff, Lit)> = g.iter().map(|&i| o.terms()[i]).collect();
                g.iter().for_each(|&i| count[i] += 1);
                let mut terms = terms;
                let max = terms.iter().map(|&(c, _)| c).max().unwrap();
                let first = terms.iter().position(|&(c, _)| c == max).unwrap();
                terms.swap(0, first);
                Layer { terms, amo: None, ub: None }
            })
            .collect();
        assert!(count.iter().all(|&c| c == 1), "layers must partition the objective");
        for layer in &mut layers {
            if layer.terms.len() > 1 {
                let (amo, ub) = amo::certify_amo(&layer.terms, log);
                layer.amo = Some(amo);
                layer.ub = Some(ub);
            }
        }
        let m = layers.len();
        let mut suffix_sum = vec![0; m + 1];
        let mut maxsum = vec![0; m + 1];
        for k in (0..m).rev() {
            suffix_sum[k] = suffix_sum[k + 1] + layers[k].cost_sum();
            maxsum[k] = maxsum[k + 1] + layers[k].max_cost();
        }
        MddEncoder {
            layers,
            suffix_sum,
            maxsum,
            constant: o.constant(),
            memo: vec![BTreeMap::new(); m],
            nodes: Vec::new(),
            shifted: HashMap::new(),
            shifts: Vec::new(),
            roots: Vec::new(),
        }
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn nodes(&self) -> &[MddNode] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &MddNode {
        &self.nodes[id]
    }

    pub fn shift_records(&self) -> &[ShiftRecord] {
        &self.shifts
    }

    /// Largest value of layers `k..` respecting the groups.
    pub fn maxsum(&self, k: usize) -> Coeff {
        self.maxsum[k]
    }

    /// Terms of layers `k..`.
    pub fn suffix_terms(&self, k: usize) -> Vec<(Coeff, Lit)> {
        self.layers[k..].iter().flat_map(|g| g.terms.iter().copied()).collect()
    }

    fn bounds(&self, r: NodeRef, layer: usize) -> (Option<Coeff>, Option<Coeff>) {
        match r {
            NodeRef::False => (None, Some(-1)),
            NodeRef::True => (Some(self.maxsum[layer]), None),
            NodeRef::Node { lo, hi, .. } => (Some(lo), Some(hi)),
        }
    }

    /// The diagram for `sum of layers k.. <= b`. New nodes take variables
    /// from `next_var`.
    pub fn build(&mut self, k: usize, b: Coeff, next_var: &mut Var) -> NodeRef {
        if b < 0 {
            return NodeRef::False;
        }
        if b >= self.maxsum[k] {
            return NodeRef::True;
        }
        if let Some((_, &(hi, r))) = self.memo[k].range(..=b).next_back() {
            if b <= hi {
                return r;
            }
        }
        let costs: Vec<Coeff> = self.layers[k].terms.iter().map(|&(c, _)| c).collect();
        let mut children = Vec::with_capacity(costs.len() + 1);
        for &c in &costs {
            children.push(self.build(k + 1, b - c, next_var));
        }
        children.push(self.build(k + 1, b, next_var));
        let (mut lo, mut hi) = self.bounds(children[costs.len()], k + 1);
        for (&c, &r) in costs.iter().zip(&children) {
            let (l, u) = self.bounds(r, k + 1);
            lo = lo.max(l.map(|l| l + c));
            hi = min_hi(hi, u.map(|u| u + c));
        }
        let (lo, hi) = (lo.expect("internal node without lower bound"), hi.expect("internal node without upper bound"));
        debug_assert!(lo <= b && b <= hi);
        let r = if children.iter().all(|&c| c == children[0]) {
            let NodeRef::Node { id, .. } = children[0] else { unreachable!("constant children on an internal node") };
            NodeRef::Node { id, layer: k, lo, hi }
        } else {
            let id = self.nodes.len();
            let var = *next_var;
            *next_var += 1;
            self.nodes.push(MddNode { layer: k, lo, hi, children, var, vprime: None, def: None, encoded: false });
            NodeRef::Node { id, layer: k, lo, hi }
        };
        self.memo[k].insert(lo, (hi, r));
        r
    }

    /// Evaluate a diagram pointer under an assignment that respects the
    /// groups.
    pub fn eval(&self, mut r: NodeRef, value: impl Fn(Lit) -> bool) -> bool {
        loop {
            match r {
                NodeRef::False => return false,
                NodeRef::True => return true,
                NodeRef::Node { id, layer, .. } => {
                    let n = &self.nodes[id];
                    debug_assert!(layer <= n.layer);
                    let g = &self.layers[n.layer];
                    let pick = g.terms.iter().position(|&(_, l)| value(l)).unwrap_or(g.terms.len());
                    r = n.children[pick];
                }
            }
        }
    }

    /// Build, certify and encode `O <= best - 1` for the objective this
    /// encoder was made for; `sic` is the id of that constraint. Nodes from
    /// earlier calls are reused and not encoded again.
    pub fn encode(&mut self, best: Coeff, sic: ConstraintId, next_var: &mut Var, log: &mut ProofLogger) -> Encoding {
        let bound = best - 1 - self.constant;
        if bound < 0 {
            return Encoding::Infeasible;
        }
        let root = self.build(0, bound, next_var);
        let NodeRef::Node { id: root_id, hi, .. } = root else {
            return Encoding::Trivial;
        };
        let root_def = self.certify(root, next_var, log).expect("internal root");
        let mut clauses = Vec::new();
        for id in 0..self.nodes.len() {
            if !self.nodes[id].encoded {
                self.certify(
                    NodeRef::Node { id, layer: self.nodes[id].layer, lo: self.nodes[id].lo, hi: self.nodes[id].hi },
                    next_var,
                    log,
                );
                clauses.extend(self.node_clauses(id, next_var, log));
                self.nodes[id].encoded = true;
            }
        }
        let v = Lit::pos(self.nodes[root_id].var);
        let unit = log.pol().id(root_def.bwd).id(sic).add().div(hi + 1).finish_expect(&PbConstraint::clause(&[v]));
        self.roots.push(unit);
        clauses.push((vec![v], unit));
        Encoding::Clauses(clauses)
    }

    pub(crate) fn def_fwd(&self, k: usize, v: Var, l: Coeff) -> PbConstraint {
        let mut t: Vec<(Coeff, Lit)> = self.suffix_terms(k).into_iter().map(|(c, b)| (-c, b)).collect();
        t.push((self.suffix_sum[k] - l, Lit::neg(v)));
        PbConstraint::from_terms(t, -l).expect("defining constraint overflow")
    }

    pub(crate) fn def_bwd(&self, k: usize, v: Var, u: Coeff) -> PbConstraint {
        let mut t = self.suffix_terms(k);
        t.push((u + 1, Lit::pos(v)));
        PbConstraint::from_terms(t, u + 1).expect("defining constraint overflow")
    }
}
