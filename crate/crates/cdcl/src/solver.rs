use lookahead::LookaheadHost;
use mdd_encoder::Probe;
use pb_core::{Lit, Var};
use proof_log::ConstraintId;

use crate::heap::VarHeap;

/// Index of a clause in the database.
pub type ClauseRef = u32;

struct Clause {
    lits: Vec<Lit>,
    id: ConstraintId,
    learnt: bool,
    lbd: u32,
    deleted: bool,
}

#[derive(Clone, Copy)]
struct Watch {
    cref: ClauseRef,
    blocker: Lit,
}

/// Status of a clause right after it was added.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Added {
    /// At least two literals are not false, or one is true.
    Ok(ClauseRef),
    /// All literals but the first are false; the first was enqueued.
    Unit(ClauseRef),
    /// Every literal is false.
    Conflict(ClauseRef),
}

/// Clause database, trail and branching state.
pub struct Solver {
    clauses: Vec<Clause>,
    watches: Vec<Vec<Watch>>,
    assigns: Vec<Option<bool>>,
    level: Vec<u32>,
    reason: Vec<Option<ClauseRef>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    heap: VarHeap,
    phase: Vec<bool>,
    seen: Vec<bool>,
    num_vars: Var,
    /// Phase saving is off while look-ahead owns the upper levels.
    saving_phases: bool,
    pub(crate) propagations: u64,
}

const VAR_DECAY: f64 = 0.95;

impl Solver {
    pub fn new(num_vars: Var) -> Solver {
        let mut s = Solver {
            clauses: Vec::new(),
            watches: Vec::new(),
            assigns: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: Vec::new(),
            var_inc: 1.0,
            heap: VarHeap::default(),
            phase: Vec::new(),
            seen: Vec::new(),
            num_vars: 0,
            saving_phases: true,
            propagations: 0,
        };
        s.grow(num_vars);
        s
    }

    pub fn num_vars(&self) -> Var {
        self.num_vars
    }

    /// Make room for variables up to `n`.
    pub fn grow(&mut self, n: Var) {
        if n <= self.num_vars {
            return;
        }
        let len = n as usize + 1;
        self.watches.resize_with(2 * len, Vec::new);
        self.assigns.resize(len, None);
        self.level.resize(len, 0);
        self.reason.resize(len, None);
        self.activity.resize(len, 0.0);
        self.phase.resize(len, false);
        self.seen.resize(len, false);
        self.heap.grow(n as usize);
        for v in self.num_vars + 1..=n {
            self.heap.insert(v, &self.activity);
        }
        self.num_vars = n;
    }

    pub fn set_phase(&mut self, l: Lit) {
        self.phase[l.var() as usize] = l.is_positive();
    }

    /// Initial activity; only meaningful before search starts.
    pub fn set_activity(&mut self, v: Var, a: f64) {
        self.activity[v as usize] = a;
        self.heap.increased(v, &self.activity);
    }

    pub fn value(&self, l: Lit) -> Option<bool> {
        self.assigns[l.var() as usize].map(|b| b == l.is_positive())
    }

    pub fn var_value(&self, v: Var) -> Option<bool> {
        self.assigns[v as usize]
    }

    pub fn level(&self, v: Var) -> u32 {
        self.level[v as usize]
    }

    pub fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    pub fn trail(&self) -> &[Lit] {
        &self.trail
    }

    pub fn clause(&self, c: ClauseRef) -> &[Lit] {
        &self.clauses[c as usize].lits
    }

    pub fn clause_id(&self, c: ClauseRef) -> ConstraintId {
        self.clauses[c as usize].id
    }

    pub fn reason(&self, v: Var) -> Option<ClauseRef> {
        self.reason[v as usize]
    }

    pub fn num_assigned(&self) -> usize {
        self.trail.len()
    }

    fn enqueue(&mut self, l: Lit, reason: Option<ClauseRef>) {
        let v = l.var() as usize;
        debug_assert!(self.assigns[v].is_none());
        self.assigns[v] = Some(l.is_positive());
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    /// Open a decision level and assign `l`.
    pub fn decide(&mut self, l: Lit) {
        self.trail_lim.push(self.trail.len());
        self.enqueue(l, None);
    }

    /// Assign `l` at the current level with reason `c`, which must contain
    /// `l` and have every other literal false.
    pub fn imply(&mut self, l: Lit, c: ClauseRef) {
        debug_assert!(self.clause(c).contains(&l));
        debug_assert!(self.clause(c).iter().all(|&m| m == l || self.value(m) == Some(false)));
        self.enqueue(l, Some(c));
    }

    pub fn backtrack(&mut self, level: u32) {
        if self.decision_level() <= level {
            return;
        }
        let lim = self.trail_lim[level as usize];
        for i in (lim..self.trail.len()).rev() {
            let l = self.trail[i];
            let v = l.var() as usize;
            self.assigns[v] = None;
            self.reason[v] = None;
            if self.saving_phases {
                self.phase[v] = l.is_positive();
            }
            self.heap.insert(l.var(), &self.activity);
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(level as usize);
        self.qhead = self.qhead.min(lim);
    }

    /// Add a clause with proof id `id`. Literals are reordered so that the
    /// watched pair is the best available; a clause that is unit under the
    /// current assignment has its literal enqueued at the current level.
    pub fn add_clause(&mut self, lits: &[Lit], id: ConstraintId, learnt: bool) -> Added {
        let mut lits = lits.to_vec();
        lits.sort_unstable();
        lits.dedup();
        for l in &lits {
            self.grow(l.var());
        }
        // true first, then unassigned, then false by descending level
        lits.sort_by_key(|&l| match self.value(l) {
            Some(true) => (0, 0),
            None => (1, 0),
            Some(false) => (2, u32::MAX - self.level(l.var())),
        });
        let lbd = self.lbd(&lits);
        let cref = self.clauses.len() as ClauseRef;
        if lits.len() >= 2 {
            self.watches[lits[0].code()].push(Watch { cref, blocker: lits[1] });
            self.watches[lits[1].code()].push(Watch { cref, blocker: lits[0] });
        }
        let first = lits.first().copied();
        let second_false = lits.get(1).map_or(true, |&l| self.value(l) == Some(false));
        self.clauses.push(Clause { lits, id, learnt, lbd, deleted: false });
        match first.map(|l| self.value(l)) {
            None | Some(Some(false)) => Added::Conflict(cref),
            Some(None) if second_false => {
                self.enqueue(first.unwrap(), Some(cref));
                Added::Unit(cref)
            }
            _ => Added::Ok(cref),
        }
    }

    fn lbd(&mut self, lits: &[Lit]) -> u32 {
        let mut levels: Vec<u32> = lits.iter().filter(|l| self.value(**l).is_some()).map(|l| self.level(l.var())).collect();
        levels.sort_unstable();
        levels.dedup();
        levels.len() as u32
    }

    /// Unit propagation over the watched clauses. Returns a falsified
    /// clause on conflict.
    pub fn propagate(&mut self) -> Option<ClauseRef> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.propagations += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[false_lit.code()]);
            let mut i = 0;
            let mut j = 0;
            let mut conflict = None;
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.value(w.blocker) == Some(true) {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let c = &mut self.clauses[w.cref as usize];
                if c.deleted {
                    continue;
                }
                if c.lits[0] == false_lit {
                    c.lits.swap(0, 1);
                }
                let first = c.lits[0];
                let watch = Watch { cref: w.cref, blocker: first };
                if first != w.blocker && self.assigns[first.var() as usize] == Some(first.is_positive()) {
                    ws[j] = watch;
                    j += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..c.lits.len() {
                    let l = c.lits[k];
                    if self.assigns[l.var() as usize] != Some(!l.is_positive()) {
                        c.lits.swap(1, k);
                        self.watches[l.code()].push(watch);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = watch;
                j += 1;
                match self.value(first) {
                    Some(false) => {
                        conflict = Some(w.cref);
                        while i < ws.len() {
                            ws[j] = ws[i];
                            i += 1;
                            j += 1;
                        }
                    }
                    None => self.enqueue(first, Some(w.cref)),
                    Some(true) => unreachable!(),
                }
            }
            ws.truncate(j);
            debug_assert!(self.watches[false_lit.code()].is_empty());
            self.watches[false_lit.code()] = ws;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                return conflict;
            }
        }
        None
    }

    fn bump(&mut self, v: Var) {
        let a = &mut self.activity[v as usize];
        *a += self.var_inc;
        if *a > 1e100 {
            for x in &mut self.activity {
                *x *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.increased(v, &self.activity);
    }

    /// First-UIP analysis of the falsified clause `confl`, which must have
    /// a literal at the current level. Returns the learned clause, asserting
    /// literal first, and the level to jump back to. Literals fixed at level
    /// 0 are dropped; every literal whose reason is covered by the rest of
    /// the clause is removed.
    pub fn analyze(&mut self, confl: ClauseRef) -> (Vec<Lit>, u32) {
        let dl = self.decision_level();
        debug_assert!(dl > 0);
        let mut out = vec![Lit::pos(1)];
        let mut path = 0usize;
        let mut idx = self.trail.len();
        let mut p: Option<Lit> = None;
        let mut confl = Some(confl);
        loop {
            let c = confl.expect("propagated literal without reason");
            for k in 0..self.clauses[c as usize].lits.len() {
                let q = self.clauses[c as usize].lits[k];
                if Some(q.var()) == p.map(|p| p.var()) {
                    continue;
                }
                let v = q.var() as usize;
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump(q.var());
                    if self.level[v] >= dl {
                        path += 1;
                    } else {
                        out.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[self.trail[idx].var() as usize] {
                    break;
                }
            }
            let l = self.trail[idx];
            p = Some(l);
            confl = self.reason[l.var() as usize];
            self.seen[l.var() as usize] = false;
            path -= 1;
            if path == 0 {
                break;
            }
        }
        out[0] = !p.unwrap();
        let mut kept = vec![out[0]];
        for &q in &out[1..] {
            let redundant = self.reason[q.var() as usize].is_some_and(|r| {
                self.clauses[r as usize]
                    .lits
                    .iter()
                    .all(|&m| m.var() == q.var() || self.seen[m.var() as usize] || self.level[m.var() as usize] == 0)
            });
            if !redundant {
                kept.push(q);
            }
        }
        for &q in &out[1..] {
            self.seen[q.var() as usize] = false;
        }
        let mut bt = 0;
        if kept.len() > 1 {
            let (i, _) = kept.iter().enumerate().skip(1).max_by_key(|(_, l)| self.level(l.var())).unwrap();
            kept.swap(1, i);
            bt = self.level(kept[1].var());
        }
        self.var_inc /= VAR_DECAY;
        (kept, bt)
    }

    /// Highest-activity unassigned variable with its saved phase.
    pub fn pick_branch(&mut self) -> Option<Lit> {
        while let Some(v) = self.heap.pop(&self.activity) {
            if self.assigns[v as usize].is_none() {
                return Some(Lit::new(v, self.phase[v as usize]));
            }
        }
        None
    }

    /// Learned clauses that may be deleted: not a reason, not binary.
    fn deletable(&self, c: ClauseRef) -> bool {
        let cl = &self.clauses[c as usize];
        if !cl.learnt || cl.deleted || cl.lits.len() <= 2 {
            return false;
        }
        let l = cl.lits[0];
        !(self.value(l) == Some(true) && self.reason[l.var() as usize] == Some(c))
    }

    /// Drop the worse half (by LBD) of the deletable learned clauses with
    /// LBD above 2. Returns the proof ids of the dropped clauses.
    pub fn reduce_db(&mut self) -> Vec<ConstraintId> {
        let mut cand: Vec<ClauseRef> = (0..self.clauses.len() as ClauseRef)
            .filter(|&c| self.deletable(c) && self.clauses[c as usize].lbd > 2)
            .collect();
        cand.sort_by_key(|&c| (std::cmp::Reverse(self.clauses[c as usize].lbd), c));
        cand.truncate(cand.len() / 2);
        let mut ids = Vec::with_capacity(cand.len());
        for c in cand {
            let cl = &mut self.clauses[c as usize];
            cl.deleted = true;
            cl.lits = Vec::new();
            ids.push(cl.id);
        }
        ids
    }

    pub fn num_learnt(&self) -> usize {
        self.clauses.iter().filter(|c| c.learnt && !c.deleted).count()
    }
}

impl LookaheadHost for Solver {
    fn value(&self, l: Lit) -> Option<bool> {
        Solver::value(self, l)
    }

    fn level(&self, v: Var) -> u32 {
        Solver::level(self, v)
    }

    fn decision_level(&self) -> u32 {
        Solver::decision_level(self)
    }

    fn trail(&self) -> &[Lit] {
        &self.trail
    }

    fn reason(&self, v: Var, out: &mut Vec<Lit>) -> bool {
        match self.reason[v as usize] {
            Some(c) => {
                out.clear();
                out.extend_from_slice(&self.clauses[c as usize].lits);
                true
            }
            None => false,
        }
    }

    fn assume(&mut self, l: Lit) {
        self.saving_phases = false;
        self.decide(l);
    }

    fn propagate(&mut self) -> Option<Vec<Lit>> {
        Solver::propagate(self).map(|c| self.clauses[c as usize].lits.clone())
    }

    fn backtrack(&mut self, level: u32) {
        Solver::backtrack(self, level);
        self.saving_phases = true;
    }
}

impl Probe for Solver {
    fn probe(&mut self, l: Lit) -> Option<Vec<Lit>> {
        if self.value(l).is_some() {
            return None;
        }
        let level = self.decision_level();
        let start = self.trail.len();
        self.saving_phases = false;
        self.decide(l);
        let out = match Solver::propagate(self) {
            None => Some(self.trail[start + 1..].to_vec()),
            Some(_) => None,
        };
        Solver::backtrack(self, level);
        self.saving_phases = true;
        out
    }
}
