//! Checker for pseudo-Boolean proofs of MaxSAT optimality.
//!
//! Shares only the constraint algebra with the solver. Every rule is
//! replayed on the checker's own store: `pol` by evaluating the RPN
//! expression, `rup` by propagation, `red` either as a singleton-witness
//! reification or as a proof by contradiction, `soli` by evaluating the
//! solution against the formula and all live constraints.

use std::collections::{HashMap, HashSet};

use instance_io::PboInstance;
use pb_core::text::{parse_constraint, parse_int, parse_lit};
use pb_core::{Coeff, Lit, Objective, PbConstraint, Propagator, Var};
use thiserror::Error;

pub type ConstraintId = u64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// `conclusion BOUNDS v v`, justified.
    Optimal(Coeff),
    /// `conclusion UNSAT`, justified.
    Unsat,
    /// Every step is valid but the proof has no conclusion.
    Incomplete,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {reason}")]
pub struct Rejection {
    pub line: usize,
    pub reason: String,
}

/// Accepted lines per rule.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CheckCensus {
    pub pol: u64,
    pub rup: u64,
    pub red: u64,
    pub subproofs: u64,
    pub soli: u64,
    pub del: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckReport {
    pub verdict: Verdict,
    pub census: CheckCensus,
}

type Check<T> = Result<T, String>;

struct Subproof {
    claim: PbConstraint,
    first_temp: ConstraintId,
}

#[derive(PartialEq, Eq, Clone, Copy)]
enum Phase {
    Header,
    Formula,
    Body,
    Output,
    Concluded,
    Ended,
}

struct Checker<'a> {
    formula: &'a [PbConstraint],
    objective: &'a Objective,
    store: HashMap<ConstraintId, PbConstraint>,
    next_id: ConstraintId,
    prop: Propagator,
    prop_dirty: bool,
    used_vars: HashSet<Var>,
    subproof: Option<Subproof>,
    best: Option<Coeff>,
    refuted_since_soli: bool,
    phase: Phase,
    verdict: Verdict,
    census: CheckCensus,
    fresh: Vec<(ConstraintId, bool)>,
}

/// A constraint stored while checking.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEntry {
    pub line: usize,
    pub id: ConstraintId,
    pub constraint: PbConstraint,
    /// Stored inside a proof by contradiction (the negated claim or a step).
    pub temporary: bool,
}

/// Check `proof` against `inst`.
pub fn check_proof(inst: &PboInstance, proof: &str) -> Result<CheckReport, Rejection> {
    run(inst, proof, None)
}

/// Like [`check_proof`], also returning every stored constraint.
pub fn check_proof_traced(
    inst: &PboInstance,
    proof: &str,
) -> Result<(CheckReport, Vec<TraceEntry>), Rejection> {
    let mut trace = Vec::new();
    let report = run(inst, proof, Some(&mut trace))?;
    Ok((report, trace))
}

fn run(inst: &PboInstance, proof: &str, trace: Option<&mut Vec<TraceEntry>>) -> Result<CheckReport, Rejection> {
    let mut ch = Checker::new(&inst.formula, &inst.objective);
    let mut local = Vec::new();
    let tracing = trace.is_some();
    for (i, line) in proof.lines().enumerate() {
        ch.line(line).map_err(|reason| Rejection { line: i + 1, reason })?;
        if tracing {
            for (id, temporary) in ch.fresh.drain(..) {
                let constraint = ch.store[&id].clone();
                local.push(TraceEntry { line: i + 1, id, constraint, temporary });
            }
        }
        ch.fresh.clear();
    }
    if let Some(t) = trace {
        *t = local;
    }
    let last = proof.lines().count();
    match ch.phase {
        Phase::Ended => {}
        Phase::Header => return Err(Rejection { line: last, reason: "missing proof header".into() }),
        Phase::Body | Phase::Formula if ch.subproof.is_none() => ch.verdict = Verdict::Incomplete,
        Phase::Body | Phase::Formula => {
            return Err(Rejection { line: last, reason: "unterminated subproof".into() })
        }
        _ => return Err(Rejection { line: last, reason: "missing `end pseudo-Boolean proof`".into() }),
    }
    Ok(CheckReport { verdict: ch.verdict, census: ch.census })
}

fn lit_var_set(c: &PbConstraint) -> impl Iterator<Item = Var> + '_ {
    c.lits().map(|l| l.var())
}

impl<'a> Checker<'a> {
    fn new(formula: &'a [PbConstraint], objective: &'a Objective) -> Checker<'a> {
        let mut used_vars: HashSet<Var> = objective.terms().iter().map(|&(_, l)| l.var()).collect();
        for c in formula {
            used_vars.extend(lit_var_set(c));
        }
        Checker {
            formula,
            objective,
            store: HashMap::new(),
            next_id: 1,
            prop: Propagator::new(0),
            prop_dirty: false,
            used_vars,
            subproof: None,
            best: None,
            refuted_since_soli: false,
            phase: Phase::Header,
            verdict: Verdict::Incomplete,
            census: CheckCensus::default(),
            fresh: Vec::new(),
        }
    }

    fn line(&mut self, line: &str) -> Check<()> {
        let mut toks = line.split_whitespace().peekable();
        let Some(&head) = toks.peek() else { return Ok(()) };
        if head.starts_with('*') {
            return Ok(());
        }
        toks.next();
        let rest: Vec<&str> = toks.collect();
        match self.phase {
            Phase::Header => {
                if head == "pseudo-Boolean" && rest == ["proof", "version", "2.0"] {
                    self.phase = Phase::Formula;
                    return Ok(());
                }
                return Err("expected `pseudo-Boolean proof version 2.0`".into());
            }
            Phase::Formula => {
                if head != "f" {
                    return Err("expected `f <n>`".into());
                }
                let n = match rest.as_slice() {
                    [n] => n.parse::<usize>().map_err(|_| format!("bad formula size `{n}`"))?,
                    _ => return Err("expected `f <n>`".into()),
                };
                if n != self.formula.len() {
                    return Err(format!("proof loads {n} constraints, instance has {}", self.formula.len()));
                }
                for c in self.formula {
                    self.store_new(c.clone());
                }
                self.phase = Phase::Body;
                return Ok(());
            }
            Phase::Output => {
                return self.conclusion(head, &rest);
            }
            Phase::Concluded => {
                if head == "end" && rest == ["pseudo-Boolean", "proof"] {
                    self.phase = Phase::Ended;
                    return Ok(());
                }
                return Err("expected `end pseudo-Boolean proof`".into());
            }
            Phase::Ended => return Err("content after the end of the proof".into()),
            Phase::Body => {}
        }
        match head {
            "pol" => self.pol(&rest),
            "rup" => self.rup(&rest),
            "red" => self.red(&rest),
            "end" if rest.is_empty() => self.end_subproof(),
            "soli" => self.soli(&rest),
            "del" => self.del(&rest),
            "output" => {
                if self.subproof.is_some() {
                    return Err("output inside a subproof".into());
                }
                if rest != ["NONE"] {
                    return Err("only `output NONE` is supported".into());
                }
                self.phase = Phase::Output;
                Ok(())
            }
            _ => Err(format!("unknown rule `{head}`")),
        }
    }

    fn store_new(&mut self, c: PbConstraint) -> ConstraintId {
        let id = self.next_id;
        self.next_id += 1;
        self.used_vars.extend(lit_var_set(&c));
        if c.is_infeasible() && self.subproof.is_none() {
            self.refuted_since_soli = true;
        }
        if !self.prop_dirty {
            for l in c.lits() {
                self.prop.ensure_var(l.var());
            }
            self.prop.add(c.clone());
        }
        self.store.insert(id, c);
        self.fresh.push((id, self.subproof.is_some()));
        id
    }

    fn live(&self, id: ConstraintId) -> Check<&PbConstraint> {
        self.store.get(&id).ok_or_else(|| format!("constraint {id} is not live"))
    }

    fn one_constraint(rest: &[&str]) -> Check<PbConstraint> {
        let mut it = rest.iter().copied();
        let c = parse_constraint(&mut it).map_err(|e| e.to_string())?;
        if let Some(t) = it.next() {
            return Err(format!("unexpected `{t}` after constraint"));
        }
        Ok(c)
    }

    fn pol(&mut self, rest: &[&str]) -> Check<()> {
        let mut stack: Vec<PbConstraint> = Vec::new();
        let mut i = 0;
        while i < rest.len() {
            let tok = rest[i];
            let next = rest.get(i + 1).copied();
            if tok == "+" {
                let b = stack.pop().ok_or("stack underflow at `+`")?;
                let a = stack.pop().ok_or("stack underflow at `+`")?;
                stack.push(a.add(&b).map_err(|e| e.to_string())?);
            } else if tok == "s" {
                let a = stack.pop().ok_or("stack underflow at `s`")?;
                stack.push(a.saturate());
            } else if tok.starts_with('x') || tok.starts_with('~') {
                let l = parse_lit(tok).map_err(|e| e.to_string())?;
                stack.push(PbConstraint::literal_axiom(l));
            } else if next == Some("*") || next == Some("d") {
                let k = parse_int(tok).map_err(|e| e.to_string())?;
                let a = stack.pop().ok_or("stack underflow at scalar operation")?;
                let r = if next == Some("*") { a.multiply(k) } else { a.divide(k) };
                stack.push(r.map_err(|e| e.to_string())?);
                i += 1;
            } else {
                let id: ConstraintId = tok.parse().map_err(|_| format!("bad pol token `{tok}`"))?;
                stack.push(self.live(id)?.clone());
            }
            i += 1;
        }
        if stack.len() != 1 {
            return Err(format!("pol leaves {} constraints on the stack", stack.len()));
        }
        self.census.pol += 1;
        self.store_new(stack.pop().unwrap());
        Ok(())
    }

    fn rebuild_propagator(&mut self) {
        let max_var = self.store.values().flat_map(|c| c.lits()).map(|l| l.var()).max().unwrap_or(0);
        let mut p = Propagator::new(max_var as usize);
        let mut ids: Vec<ConstraintId> = self.store.keys().copied().collect();
        ids.sort_unstable();
        let temp_from = self.subproof.as_ref().map(|s| s.first_temp);
        for id in ids {
            if temp_from.is_some_and(|t| id >= t) && p.decision_level() == 0 {
                p.new_level();
            }
            p.add(self.store[&id].clone());
        }
        if temp_from.is_some() && p.decision_level() == 0 {
            p.new_level();
        }
        self.prop = p;
        self.prop_dirty = false;
    }

    fn is_rup(&mut self, c: &PbConstraint) -> Check<bool> {
        if self.prop_dirty {
            self.rebuild_propagator();
        }
        let neg = c.negate().map_err(|e| e.to_string())?;
        if self.prop.propagate().is_some() {
            return Ok(true);
        }
        let level = self.prop.decision_level();
        self.prop.new_level();
        for l in neg.lits() {
            self.prop.ensure_var(l.var());
        }
        self.prop.add(neg);
        let conflict = self.prop.propagate().is_some();
        self.prop.backtrack(level);
        Ok(conflict)
    }

    fn rup(&mut self, rest: &[&str]) -> Check<()> {
        let c = Self::one_constraint(rest)?;
        if !self.is_rup(&c)? {
            return Err(format!("rup: `{c}` does not propagate to a conflict"));
        }
        self.census.rup += 1;
        self.store_new(c);
        Ok(())
    }

    fn red(&mut self, rest: &[&str]) -> Check<()> {
        if self.subproof.is_some() {
            return Err("red inside a subproof".into());
        }
        let mut it = rest.iter().copied();
        let c = parse_constraint(&mut it).map_err(|e| e.to_string())?;
        let tail: Vec<&str> = it.collect();
        match tail.as_slice() {
            [";", "begin"] => {
                let neg = c.negate().map_err(|e| e.to_string())?;
                self.census.subproofs += 1;
                let first_temp = self.next_id;
                self.subproof = Some(Subproof { claim: c, first_temp });
                if !self.prop_dirty {
                    self.prop.new_level();
                }
                self.store_new(neg);
                Ok(())
            }
            [var, "->", bit] => {
                let l = parse_lit(var).map_err(|e| e.to_string())?;
                if !l.is_positive() {
                    return Err(format!("witness must name a variable, found `{var}`"));
                }
                let b = match *bit {
                    "0" => false,
                    "1" => true,
                    _ => return Err(format!("witness value must be 0 or 1, found `{bit}`")),
                };
                self.check_reification(&c, l.var(), b)?;
                self.census.red += 1;
                self.store_new(c);
                Ok(())
            }
            [] | [";"] => Err("red with an empty witness needs a subproof".into()),
            _ => Err("malformed witness".into()),
        }
    }

    fn check_reification(&self, c: &PbConstraint, v: Var, b: bool) -> Check<()> {
        if self.objective.contains_var(v) {
            return Err(format!("witness variable x{v} occurs in the objective"));
        }
        if !c.restrict(v, b).is_tautology() {
            return Err(format!("`{c}` is not satisfied by its witness x{v} -> {}", b as u8));
        }
        let partner = c.restrict(v, !b).negate().map_err(|e| e.to_string())?;
        let mut has_partner = false;
        for (id, d) in &self.store {
            if !d.contains_var(v) {
                continue;
            }
            let dw = d.restrict(v, b);
            if dw == partner {
                has_partner = true;
            } else if !dw.is_tautology() {
                return Err(format!("witness x{v} -> {} falsifies constraint {id}", b as u8));
            }
        }
        if self.used_vars.contains(&v) && !has_partner {
            return Err(format!("witness variable x{v} is not fresh"));
        }
        Ok(())
    }

    fn end_subproof(&mut self) -> Check<()> {
        let sp = self.subproof.take().ok_or("`end` without an open subproof")?;
        let last = self.next_id - 1;
        if last == sp.first_temp || !self.store[&last].is_infeasible() {
            return Err(format!("subproof for `{}` does not end in a contradiction", sp.claim));
        }
        for id in sp.first_temp..self.next_id {
            self.store.remove(&id);
        }
        if !self.prop_dirty {
            self.prop.backtrack(0);
        }
        self.store_new(sp.claim);
        Ok(())
    }

    fn soli(&mut self, rest: &[&str]) -> Check<()> {
        if self.subproof.is_some() {
            return Err("soli inside a subproof".into());
        }
        let mut value: HashMap<Var, bool> = HashMap::new();
        for tok in rest {
            let l: Lit = parse_lit(tok).map_err(|e| e.to_string())?;
            if value.insert(l.var(), l.is_positive()).is_some() {
                return Err(format!("variable x{} assigned twice", l.var()));
            }
        }
        let val = |v: Var| value.get(&v).copied().unwrap_or(false);
        for (i, c) in self.formula.iter().enumerate() {
            if !c.eval(val) {
                return Err(format!("solution violates formula constraint {}", i + 1));
            }
        }
        for (id, c) in &self.store {
            if !c.eval(val) {
                return Err(format!("solution violates constraint {id}"));
            }
        }
        let obj = self.objective.eval(val);
        if let Some(best) = self.best {
            if obj >= best {
                return Err(format!("solution value {obj} does not improve on {best}"));
            }
        }
        self.best = Some(obj);
        self.census.soli += 1;
        let sic = self.objective.improving_constraint(obj).map_err(|e| e.to_string())?;
        self.refuted_since_soli = false;
        self.store_new(sic);
        Ok(())
    }

    fn del(&mut self, rest: &[&str]) -> Check<()> {
        if self.subproof.is_some() {
            return Err("del inside a subproof".into());
        }
        let id = match rest {
            ["id", n] => n.parse::<ConstraintId>().map_err(|_| format!("bad id `{n}`"))?,
            _ => return Err("expected `del id <n>`".into()),
        };
        if id as usize <= self.formula.len() {
            return Err("formula constraints cannot be deleted".into());
        }
        self.store.remove(&id).ok_or_else(|| format!("constraint {id} is not live"))?;
        self.census.del += 1;
        self.prop_dirty = true;
        Ok(())
    }

    fn conclusion(&mut self, head: &str, rest: &[&str]) -> Check<()> {
        if head != "conclusion" {
            return Err("expected a conclusion".into());
        }
        if !self.refuted_since_soli {
            return Err("no contradiction derived after the last solution".into());
        }
        match rest {
            ["UNSAT"] => {
                if self.best.is_some() {
                    return Err("UNSAT claimed after a solution was logged".into());
                }
                self.verdict = Verdict::Unsat;
            }
            ["BOUNDS", lb, ub] => {
                let lb = parse_int(lb).map_err(|e| e.to_string())?;
                let ub = parse_int(ub).map_err(|e| e.to_string())?;
                if lb != ub {
                    return Err("only exact bounds are supported".into());
                }
                if self.best != Some(ub) {
                    return Err(format!("upper bound {ub} differs from the best solution {:?}", self.best));
                }
                self.verdict = Verdict::Optimal(ub);
            }
            _ => return Err("malformed conclusion".into()),
        }
        self.phase = Phase::Concluded;
        Ok(())
    }
}
