use pb_core::{Coeff, Lit, PbConstraint, Var};
use proof_log::{ConstraintId, PolBuilder, ProofLogger};

use crate::{Def, MddEncoder, NodeRef, ShiftRecord};

fn clause(lits: &[Lit]) -> PbConstraint {
    let mut l = lits.to_vec();
    l.sort_unstable();
    PbConstraint::clause(&l)
}

fn all_b<'a>(p: PolBuilder<'a>, layer: &[(Coeff, Lit)]) -> PolBuilder<'a> {
    layer.iter().fold(p, |p, &(_, b)| p.add_axiom(b, 1))
}

fn check_infeasible(log: &ProofLogger, id: ConstraintId) {
    if let Some(c) = log.constraint(id) {
        assert!(c.is_infeasible(), "expected a contradiction, got `{c}`");
    }
}

/// What a child pointer contributes to a derivation.
#[derive(Clone, Copy)]
enum Child {
    False,
    True,
    Node { var: Var, lo: Coeff, hi: Coeff, def: Def },
}

impl MddEncoder {
    /// Defining constraints of `r` at the layer it is used at; `None` for
    /// leaves.
    pub fn certify(&mut self, r: NodeRef, next_var: &mut Var, log: &mut ProofLogger) -> Option<Def> {
        let NodeRef::Node { id, layer, lo, .. } = r else { return None };
        let base = self.certify_home(id, next_var, log);
        if layer == self.nodes[id].layer {
            return Some(base);
        }
        if let Some(&d) = self.shifted.get(&(id, layer)) {
            return Some(d);
        }
        let d = self.shift(id, layer, lo, base, log);
        self.shifted.insert((id, layer), d);
        Some(d)
    }

    fn child(&mut self, r: NodeRef, next_var: &mut Var, log: &mut ProofLogger) -> Child {
        match r {
            NodeRef::False => Child::False,
            NodeRef::True => Child::True,
            NodeRef::Node { id, lo, hi, .. } => {
                let def = self.certify(r, next_var, log).unwrap();
                Child::Node { var: self.nodes[id].var, lo, hi, def }
            }
        }
    }

    fn certify_home(&mut self, id: usize, next_var: &mut Var, log: &mut ProofLogger) -> Def {
        if let Some(d) = self.nodes[id].def {
            return d;
        }
        let refs = self.nodes[id].children.clone();
        let children: Vec<Child> = refs.iter().map(|&r| self.child(r, next_var, log)).collect();
        let (k, l, u, v) = (self.nodes[id].layer, self.nodes[id].lo, self.nodes[id].hi, self.nodes[id].var);
        let terms = self.suffix_terms(k);
        let (fwd, bwd_l) = log.reify_le(v, &terms, l);
        let bwd = if l == u {
            bwd_l
        } else {
            let vp = *next_var;
            *next_var += 1;
            self.nodes[id].vprime = Some(vp);
            let (fwd_u, bwd_u) = log.reify_le(vp, &terms, u);
            let ctx = Ctx { k, l, u, v, vp, fwd_u, bwd_l };
            let width = self.layers[k].terms.len();
            let mut cases = Vec::with_capacity(width + 1);
            for m in 0..width {
                cases.push(self.case_lit(&ctx, m, children[m], log));
            }
            cases.push(self.case_else(&ctx, children[width], log));
            let mut p = log.pol();
            for c in cases {
                p = p.add_scaled(c, 1);
            }
            p.div(width as Coeff + 1).mul(u + 1).id(bwd_u).add().finish_expect(&self.def_bwd(k, v, u))
        };
        let d = Def { fwd, bwd };
        self.nodes[id].def = Some(d);
        d
    }

    /// Add `b * c` for every term of `terms` except position `skip`.
    fn weaken<'a>(p: PolBuilder<'a>, terms: &[(Coeff, Lit)], skip: Option<usize>) -> PolBuilder<'a> {
        terms
            .iter()
            .enumerate()
            .filter(|&(i, _)| Some(i) != skip)
            .fold(p, |p, (_, &(c, b))| p.add_axiom(b, c))
    }

    /// Add the upper bounds of layers `from..`, giving
    /// `sum of layers from.. <= maxsum(from)` up to singleton layers.
    fn add_ubs<'a>(&self, mut p: PolBuilder<'a>, from: usize) -> PolBuilder<'a> {
        for g in &self.layers[from..] {
            if let Some(ub) = g.ub {
                p = p.add_scaled(ub, 1);
            }
        }
        p
    }

    /// `~b_m + ~v' + v >= 1` by contradiction.
    fn case_lit(&self, x: &Ctx, m: usize, child: Child, log: &mut ProofLogger) -> ConstraintId {
        let layer = &self.layers[x.k].terms;
        let (cm, bm) = layer[m];
        let (v, vp) = (Lit::pos(x.v), Lit::pos(x.vp));
        let neg = log.begin_contradiction(&clause(&[!bm, !vp, v]));
        let unit_b = log.pol().id(neg).add_axiom(!vp, 1).add_axiom(v, 1).finish_expect(&clause(&[bm]));
        let s_k = self.suffix_sum[x.k];
        let s_next = self.suffix_sum[x.k + 1];
        // the suffix after this layer is at most u - c_m
        let vc_true = if matches!(child, Child::True) {
            None
        } else {
            let unit_vp = log.pol().id(neg).add_axiom(!bm, 1).add_axiom(v, 1).finish_expect(&clause(&[vp]));
            let p = log.pol().id(x.fwd_u).add_scaled(unit_vp, s_k - x.u).add_scaled(unit_b, cm);
            let p = Self::weaken(p, layer, Some(m));
            match child {
                Child::False => {
                    let id = p.finish();
                    check_infeasible(log, id);
                    return log.end_contradiction();
                }
                Child::Node { var, hi, def, .. } => {
                    Some(p.add_scaled(def.bwd, 1).div(hi + 1).finish_expect(&clause(&[Lit::pos(var)])))
                }
                Child::True => unreachable!(),
            }
        };
        // the suffix after this layer is at least l + 1 - c_m
        let unit_nv = log.pol().id(neg).add_axiom(!bm, 1).add_axiom(!vp, 1).finish_expect(&clause(&[!v]));
        let mut p = log.pol().id(x.bwd_l).add_scaled(unit_nv, x.l + 1);
        if layer.len() > 1 {
            let big = layer.iter().enumerate().filter(|&(i, _)| i != m).map(|(_, &(c, _))| c).max().unwrap();
            let amo = self.layers[x.k].amo.expect("group without AMO");
            p = p.id(amo).id(unit_b).add().mul(big).add();
            for (i, &(c, b)) in layer.iter().enumerate() {
                if i != m && c < big {
                    p = p.add_axiom(b, big - c);
                }
            }
        }
        p = p.add_axiom(!bm, cm);
        let vc_false = match child {
            Child::True => {
                let id = self.add_ubs(p, x.k + 1).finish();
                check_infeasible(log, id);
                return log.end_contradiction();
            }
            Child::Node { var, lo, def, .. } => {
                p.add_scaled(def.fwd, 1).div(s_next - lo).finish_expect(&clause(&[Lit::neg(var)]))
            }
            Child::False => unreachable!(),
        };
        let id = log.pol().id(vc_true.unwrap()).id(vc_false).add().finish();
        check_infeasible(log, id);
        log.end_contradiction()
    }

    /// `sum b_i + ~v' + v >= 1` by contradiction.
    fn case_else(&self, x: &Ctx, child: Child, log: &mut ProofLogger) -> ConstraintId {
        let layer = &self.layers[x.k].terms;
        let (v, vp) = (Lit::pos(x.v), Lit::pos(x.vp));
        let mut lits: Vec<Lit> = layer.iter().map(|&(_, b)| b).collect();
        lits.extend([!vp, v]);
        let neg = log.begin_contradiction(&clause(&lits));
        let s_k = self.suffix_sum[x.k];
        let s_next = self.suffix_sum[x.k + 1];
        // the suffix after this layer is at least l + 1
        let unit_nv = all_b(log.pol().id(neg), layer).add_axiom(!vp, 1).finish_expect(&clause(&[!v]));
        let big = layer[0].0;
        let mut p = log
            .pol()
            .id(x.bwd_l)
            .add_scaled(unit_nv, x.l + 1)
            .id(neg)
            .add_axiom(!vp, 1)
            .add_axiom(v, 1)
            .mul(big)
            .add();
        for &(c, b) in layer {
            if c < big {
                p = p.add_axiom(b, big - c);
            }
        }
        let vc_false = match child {
            Child::True => {
                let id = self.add_ubs(p, x.k + 1).finish();
                check_infeasible(log, id);
                return log.end_contradiction();
            }
            Child::Node { var, lo, def, .. } => {
                p.add_scaled(def.fwd, 1).div(s_next - lo).finish_expect(&clause(&[Lit::neg(var)]))
            }
            Child::False => unreachable!("else-child of an internal node is never false"),
        };
        // the suffix after this layer is at most u
        let Child::Node { var, hi, def, .. } = child else { unreachable!() };
        let unit_vp = all_b(log.pol().id(neg), layer).add_axiom(v, 1).finish_expect(&clause(&[vp]));
        let p = log.pol().id(x.fwd_u).add_scaled(unit_vp, s_k - x.u);
        let vc_true = Self::weaken(p, layer, None)
            .add_scaled(def.bwd, 1)
            .div(hi + 1)
            .finish_expect(&clause(&[Lit::pos(var)]));
        let id = log.pol().id(vc_true).id(vc_false).add().finish();
        check_infeasible(log, id);
        log.end_contradiction()
    }

    /// Defining constraints of node `id` at the earlier layer `to`, where
    /// its lower bound is `lo`.
    fn shift(&mut self, id: usize, to: usize, lo: Coeff, base: Def, log: &mut ProofLogger) -> Def {
        let (k, u, v) = (self.nodes[id].layer, self.nodes[id].hi, self.nodes[id].var);
        debug_assert!(to < k);
        let skipped = &self.layers[to..k];
        let mut p = log.pol().id(base.fwd);
        let mut slack: Coeff = 0;
        for g in skipped {
            match g.ub {
                Some(ub) => p = p.add_scaled(ub, 1),
                None => p = p.add_axiom(!g.terms[0].1, g.terms[0].0),
            }
            slack += g.cost_sum() - g.max_cost();
        }
        if slack > 0 {
            p = p.add_axiom(Lit::neg(v), slack);
        }
        let fwd_steps = p.steps().total();
        let fwd = p.finish_expect(&self.def_fwd(to, v, lo));
        let skipped_terms: Vec<(Coeff, Lit)> = skipped.iter().flat_map(|g| g.terms.iter().copied()).collect();
        let p = Self::weaken(log.pol().id(base.bwd), &skipped_terms, None);
        let bwd_steps = p.steps().total();
        let bwd = p.finish_expect(&self.def_bwd(to, v, u));
        let rec = ShiftRecord { skipped_layers: k - to, skipped_lits: skipped_terms.len(), steps: fwd_steps + bwd_steps };
        assert!(rec.steps <= rec.bound(), "layer shift uses {} steps, bound {}", rec.steps, rec.bound());
        self.shifts.push(rec);
        Def { fwd, bwd }
    }

    /// The encoding clauses of node `id`: `~b_m \/ v_c \/ ~v` per literal
    /// child and `v_e \/ ~v` for the else-child, leaves filled in.
    pub(crate) fn node_clauses(
        &mut self,
        id: usize,
        next_var: &mut Var,
        log: &mut ProofLogger,
    ) -> Vec<(Vec<Lit>, ConstraintId)> {
        let (k, l, v) = (self.nodes[id].layer, self.nodes[id].lo, self.nodes[id].var);
        let def = self.nodes[id].def.expect("node not certified");
        let refs = self.nodes[id].children.clone();
        let children: Vec<Child> = refs.iter().map(|&r| self.child(r, next_var, log)).collect();
        let layer = self.layers[k].terms.clone();
        let s_k = self.suffix_sum[k];
        let nv = Lit::neg(v);
        let mut out = Vec::new();
        for (m, &(cm, bm)) in layer.iter().enumerate() {
            let (lits, p, divisor) = match children[m] {
                Child::True => continue,
                Child::False => {
                    let terms = self.suffix_terms(k);
                    let p = Self::weaken(log.pol().id(def.fwd), &terms, Some(m));
                    (vec![!bm, nv], p, (s_k - l).max(cm))
                }
                Child::Node { var, hi, def: cd, .. } => {
                    let p = Self::weaken(log.pol().id(def.fwd).add_scaled(cd.bwd, 1), &layer, Some(m));
                    let d = (s_k - l).max(hi + 1).max(cm).max(cm + hi + 1 - l);
                    (vec![!bm, Lit::pos(var), nv], p, d)
                }
            };
            let mut lits = lits;
            lits.sort_unstable();
            let cid = p.div(divisor).finish_expect(&PbConstraint::clause(&lits));
            out.push((lits, cid));
        }
        match children[layer.len()] {
            Child::True => {}
            Child::False => unreachable!("else-child of an internal node is never false"),
            Child::Node { var, hi, def: cd, .. } => {
                let p = Self::weaken(log.pol().id(def.fwd).add_scaled(cd.bwd, 1), &layer, None);
                let d = (s_k - l).max(hi + 1);
                let mut lits = vec![Lit::pos(var), nv];
                lits.sort_unstable();
                let cid = p.div(d).finish_expect(&PbConstraint::clause(&lits));
                out.push((lits, cid));
            }
        }
        out
    }
}

struct Ctx {
    k: usize,
    l: Coeff,
    u: Coeff,
    v: Var,
    vp: Var,
    fwd_u: ConstraintId,
    bwd_l: ConstraintId,
}
