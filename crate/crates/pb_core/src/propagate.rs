//! Slack-based unit propagation over normalized PB constraints.
//!
//! The slack of `sum a_i l_i >= A` is the total coefficient of literals that
//! are not false, minus `A`. A negative slack is a conflict, and any
//! unassigned literal whose coefficient exceeds the slack is forced true.
//! Clauses are the special case where the slack is the number of non-false
//! literals minus one.

use crate::constraint::{Coeff, PbConstraint};
use crate::lit::{Lit, Var};

/// Why a literal is on the trail.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Reason {
    Decision,
    Constraint(usize),
}

/// A partial assignment with trail order, decision levels and reasons.
#[derive(Clone, Debug, Default)]
pub struct Assignment {
    value: Vec<Option<bool>>,
    level: Vec<u32>,
    reason: Vec<Reason>,
    pos: Vec<u32>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
}

impl Assignment {
    pub fn new(num_vars: usize) -> Assignment {
        let mut a = Assignment::default();
        a.ensure_var(num_vars as Var);
        a
    }

    pub fn ensure_var(&mut self, v: Var) {
        let n = v as usize + 1;
        if self.value.len() < n {
            self.value.resize(n, None);
            self.level.resize(n, 0);
            self.reason.resize(n, Reason::Decision);
            self.pos.resize(n, 0);
        }
    }

    pub fn num_vars(&self) -> usize {
        self.value.len().saturating_sub(1)
    }

    pub fn var_value(&self, v: Var) -> Option<bool> {
        self.value.get(v as usize).copied().flatten()
    }

    pub fn lit_value(&self, l: Lit) -> Option<bool> {
        self.var_value(l.var()).map(|b| l.eval(b))
    }

    pub fn level(&self, v: Var) -> u32 {
        self.level[v as usize]
    }

    pub fn reason(&self, v: Var) -> Reason {
        self.reason[v as usize]
    }

    pub fn trail(&self) -> &[Lit] {
        &self.trail
    }

    pub fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn position(&self, v: Var) -> usize {
        self.pos[v as usize] as usize
    }

    /// Put `l` on the trail. The variable must be unassigned.
    pub fn push(&mut self, l: Lit, reason: Reason) {
        self.ensure_var(l.var());
        let v = l.var() as usize;
        debug_assert!(self.value[v].is_none(), "variable assigned twice");
        self.value[v] = Some(l.is_positive());
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.pos[v] = self.trail.len() as u32;
        self.trail.push(l);
    }

    pub fn new_level(&mut self) {
        self.trail_lim.push(self.trail.len());
    }

    /// Undo every level above `level`, returning the removed literals in
    /// trail order.
    pub fn backtrack(&mut self, level: u32) -> Vec<Lit> {
        if self.decision_level() <= level {
            return Vec::new();
        }
        let keep = self.trail_lim[level as usize];
        self.trail_lim.truncate(level as usize);
        let removed: Vec<Lit> = self.trail.drain(keep..).collect();
        for l in &removed {
            self.value[l.var() as usize] = None;
        }
        removed
    }
}

struct Entry {
    c: PbConstraint,
    slack: Coeff,
    max_coeff: Coeff,
}

/// Incremental PB propagator with decision levels. Constraints added at a
/// level are removed again when that level is backtracked.
pub struct Propagator {
    assign: Assignment,
    entries: Vec<Entry>,
    occurs: Vec<Vec<(u32, Coeff)>>,
    constraint_lim: Vec<usize>,
    qhead: usize,
    conflict: Option<(usize, u32)>,
}

impl Propagator {
    pub fn new(num_vars: usize) -> Propagator {
        let mut p = Propagator {
            assign: Assignment::new(num_vars),
            entries: Vec::new(),
            occurs: Vec::new(),
            constraint_lim: Vec::new(),
            qhead: 0,
            conflict: None,
        };
        p.ensure_var(num_vars as Var);
        p
    }

    pub fn ensure_var(&mut self, v: Var) {
        self.assign.ensure_var(v);
        let n = 2 * (v as usize + 1);
        if self.occurs.len() < n {
            self.occurs.resize_with(n, Vec::new);
        }
    }

    pub fn assignment(&self) -> &Assignment {
        &self.assign
    }

    pub fn value(&self, l: Lit) -> Option<bool> {
        self.assign.lit_value(l)
    }

    pub fn constraint(&self, idx: usize) -> &PbConstraint {
        &self.entries[idx].c
    }

    pub fn num_constraints(&self) -> usize {
        self.entries.len()
    }

    pub fn decision_level(&self) -> u32 {
        self.assign.decision_level()
    }

    /// The violated constraint, if propagation has found one.
    pub fn conflict(&self) -> Option<usize> {
        self.conflict.map(|(c, _)| c)
    }

    fn processed_false(&self, l: Lit) -> bool {
        self.assign.lit_value(l) == Some(false) && self.assign.position(l.var()) < self.qhead
    }

    /// Add a constraint at the current level and return its index.
    pub fn add(&mut self, c: PbConstraint) -> usize {
        let idx = self.entries.len();
        let mut slack: Coeff = -c.degree();
        for &(a, l) in c.terms() {
            self.ensure_var(l.var());
            if !self.processed_false(l) {
                slack += a;
            }
            self.occurs[l.code()].push((idx as u32, a));
        }
        let max_coeff = c.max_coeff();
        self.entries.push(Entry { c, slack, max_coeff });
        if self.conflict.is_none() {
            self.check(idx);
        }
        idx
    }

    fn set_conflict(&mut self, idx: usize) {
        if self.conflict.is_none() {
            self.conflict = Some((idx, self.decision_level()));
        }
    }

    fn check(&mut self, idx: usize) {
        let e = &self.entries[idx];
        if e.slack < 0 {
            self.set_conflict(idx);
            return;
        }
        if e.max_coeff <= e.slack {
            return;
        }
        let slack = e.slack;
        let forced: Vec<Lit> = e
            .c
            .terms()
            .iter()
            .filter(|&&(a, l)| a > slack && self.assign.lit_value(l).is_none())
            .map(|&(_, l)| l)
            .collect();
        for l in forced {
            self.assign.push(l, Reason::Constraint(idx));
        }
    }

    pub fn new_level(&mut self) {
        self.assign.new_level();
        self.constraint_lim.push(self.entries.len());
    }

    /// Assign `l` as a decision. Returns false if `l` is already false.
    pub fn assume(&mut self, l: Lit) -> bool {
        self.ensure_var(l.var());
        match self.assign.lit_value(l) {
            Some(true) => true,
            Some(false) => false,
            None => {
                self.assign.push(l, Reason::Decision);
                true
            }
        }
    }

    /// Propagate to fixpoint. Returns the index of a violated constraint.
    pub fn propagate(&mut self) -> Option<usize> {
        while self.conflict.is_none() && self.qhead < self.assign.trail.len() {
            let p = self.assign.trail[self.qhead];
            self.qhead += 1;
            let falsified = (!p).code();
            let mut touched = Vec::new();
            for k in 0..self.occurs[falsified].len() {
                let (idx, a) = self.occurs[falsified][k];
                let e = &mut self.entries[idx as usize];
                e.slack -= a;
                if e.slack < e.max_coeff {
                    touched.push(idx as usize);
                }
            }
            for idx in touched {
                if self.conflict.is_some() {
                    break;
                }
                self.check(idx);
            }
        }
        self.conflict()
    }

    /// Undo all levels above `level`, dropping constraints added there.
    pub fn backtrack(&mut self, level: u32) {
        if self.decision_level() <= level {
            return;
        }
        let keep_trail = self.assign.trail_lim[level as usize];
        for i in (keep_trail..self.assign.trail.len()).rev() {
            if i < self.qhead {
                let p = self.assign.trail[i];
                for k in 0..self.occurs[(!p).code()].len() {
                    let (idx, a) = self.occurs[(!p).code()][k];
                    self.entries[idx as usize].slack += a;
                }
            }
        }
        self.assign.backtrack(level);
        self.qhead = self.qhead.min(keep_trail);
        let keep = self.constraint_lim[level as usize];
        self.constraint_lim.truncate(level as usize);
        while self.entries.len() > keep {
            let idx = self.entries.len() - 1;
            let e = self.entries.pop().unwrap();
            for &(_, l) in e.c.terms() {
                let last = self.occurs[l.code()].pop();
                debug_assert_eq!(last.map(|(i, _)| i as usize), Some(idx));
            }
        }
        if matches!(self.conflict, Some((_, lvl)) if lvl > level) {
            self.conflict = None;
        }
    }
}

/// Result of [`propagate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Propagation {
    /// Trail after propagation with the reason of every literal.
    Fixpoint(Vec<(Lit, Reason)>),
    /// Index into `db` of a violated constraint.
    Conflict(usize),
}

/// Extend the assignment `alpha` by unit propagation over `db`.
pub fn propagate(db: &[PbConstraint], alpha: &[Lit]) -> Propagation {
    let num_vars = db
        .iter()
        .flat_map(|c| c.lits())
        .chain(alpha.iter().copied())
        .map(|l| l.var() as usize)
        .max()
        .unwrap_or(0);
    let mut p = Propagator::new(num_vars);
    for &l in alpha {
        assert!(p.assume(l), "assumptions must be consistent");
    }
    for c in db {
        p.add(c.clone());
    }
    match p.propagate() {
        Some(idx) => Propagation::Conflict(idx),
        None => Propagation::Fixpoint(
            p.assignment().trail().iter().map(|&l| (l, p.assignment().reason(l.var()))).collect(),
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(v: Var) -> Lit {
        Lit::pos(v)
    }

    #[test]
    fn unit_clause() {
        let db = [PbConstraint::clause(&[x(1), x(2)])];
        match propagate(&db, &[!x(1)]) {
            Propagation::Fixpoint(t) => {
                assert_eq!(t, vec![(!x(1), Reason::Decision), (x(2), Reason::Constraint(0))])
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn slack_forces_two_literals() {
        let c = PbConstraint::from_terms([(5, x(1)), (3, x(2)), (3, x(3))], 6).unwrap();
        match propagate(&[c], &[!x(1)]) {
            Propagation::Fixpoint(t) => {
                let lits: Vec<Lit> = t.iter().map(|&(l, _)| l).collect();
                assert_eq!(lits, vec![!x(1), x(2), x(3)]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn complementary_units_conflict() {
        let db = [PbConstraint::clause(&[x(1)]), PbConstraint::clause(&[!x(1)])];
        assert!(matches!(propagate(&db, &[]), Propagation::Conflict(_)));
    }

    #[test]
    fn levels_drop_constraints_and_restore_slack() {
        let mut p = Propagator::new(3);
        p.add(PbConstraint::clause(&[x(1), x(2), x(3)]));
        assert_eq!(p.propagate(), None);
        p.new_level();
        p.add(PbConstraint::clause(&[!x(1)]));
        p.add(PbConstraint::clause(&[!x(2)]));
        assert_eq!(p.propagate(), None);
        assert_eq!(p.value(x(3)), Some(true));
        p.add(PbConstraint::clause(&[!x(3)]));
        assert!(p.propagate().is_some());
        p.backtrack(0);
        assert_eq!(p.conflict(), None);
        assert_eq!(p.num_constraints(), 1);
        assert_eq!(p.value(x(3)), None);
        p.new_level();
        p.assume(!x(3));
        p.assume(!x(2));
        assert_eq!(p.propagate(), None);
        assert_eq!(p.value(x(1)), Some(true));
    }
}
