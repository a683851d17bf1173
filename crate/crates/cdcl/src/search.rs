use std::time::Instant;

use instance_io::PboInstance;
use lookahead::{lookahead, LookaheadOutcome};
use mdd_encoder::{detect_amo_groups, Encoding, MddEncoder};
use pb_core::{Coeff, Lit, Objective, Var};
use proof_log::{Conclusion, ConstraintId, ProofLogger};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{luby, Added, ClauseRef, Outcome, SolveStats, Solver, SolverConfig};

const RESTART_START: u64 = 1000;
const RESTART_UNIT: u64 = 100;
const REDUCE_FIRST: u64 = 2000;
const REDUCE_INC: u64 = 300;

enum Step {
    Continue,
    /// Conflict at decision level 0.
    Root,
    Limit,
}

struct Incumbent {
    value: Coeff,
    sic: ConstraintId,
    model: Vec<bool>,
}

struct Search<'a> {
    s: Solver,
    o: &'a Objective,
    cfg: &'a SolverConfig,
    num_instance_vars: Var,
    stats: SolveStats,
    best: Option<Incumbent>,
    mdd: Option<MddEncoder>,
    next_var: Var,
    start: Instant,
    nodes: u64,
    restart_idx: u64,
    since_restart: u64,
    next_reduce: u64,
    reductions: u64,
}

/// Minimize the objective of `inst`. The logger must already hold the
/// formula (`f` line); the proof ends with a conclusion unless a limit is
/// hit.
pub fn solve(inst: &PboInstance, log: &mut ProofLogger, cfg: &SolverConfig) -> (Outcome, SolveStats) {
    assert_eq!(log.peek_id(), inst.formula.len() as ConstraintId + 1, "formula not loaded into the proof");
    let mut s = Solver::new(inst.num_vars);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for v in 1..=inst.num_vars {
        s.set_activity(v, rng.gen::<f64>() * 1e-6);
    }
    for &(_, l) in inst.objective.terms() {
        s.set_phase(!l);
    }
    let mut search = Search {
        s,
        o: &inst.objective,
        cfg,
        num_instance_vars: inst.num_vars,
        stats: SolveStats::default(),
        best: None,
        mdd: None,
        next_var: inst.num_vars + 1,
        start: Instant::now(),
        nodes: 0,
        restart_idx: 0,
        since_restart: 0,
        next_reduce: REDUCE_FIRST,
        reductions: 0,
    };
    let outcome = search.run(inst, log);
    let mut stats = search.stats;
    stats.propagations = search.s.propagations;
    let _ = log.flush();
    (outcome, stats)
}

impl Search<'_> {
    fn run(&mut self, inst: &PboInstance, log: &mut ProofLogger) -> Outcome {
        for (i, c) in inst.formula.iter().enumerate() {
            if c.is_tautology() {
                continue;
            }
            assert!(c.is_empty() || c.is_clause(), "formula constraint {} is not a clause: {c}", i + 1);
            let lits: Vec<Lit> = c.lits().collect();
            if let Added::Conflict(_) = self.add(&lits, i as ConstraintId + 1, false) {
                return self.finish_root(log);
            }
        }
        loop {
            if let Some(c) = self.s.propagate() {
                match self.conflict(c, log) {
                    Step::Continue => continue,
                    Step::Root => return self.finish_root(log),
                    Step::Limit => return self.indeterminate(),
                }
            }
            self.nodes += 1;
            if self.nodes % 64 == 0 && self.out_of_time() {
                return self.indeterminate();
            }
            let period = self.cfg.lookahead_period;
            if self.best.is_some() && period > 0 && self.nodes % period == 0 {
                match self.lookahead(log) {
                    None => {}
                    Some(Step::Continue) => continue,
                    Some(Step::Root) => return self.finish_root(log),
                    Some(Step::Limit) => return self.indeterminate(),
                }
            }
            if let Some(l) = self.s.pick_branch() {
                self.stats.decisions += 1;
                self.s.decide(l);
                continue;
            }
            let value = self.o.eval(|v| self.s.var_value(v) == Some(true));
            if self.best.as_ref().map_or(true, |b| value < b.value) {
                let model: Vec<bool> = (0..=self.s.num_vars()).map(|v| v > 0 && self.s.var_value(v) == Some(true)).collect();
                let sic = log.soli(&model);
                self.stats.solutions += 1;
                let model = model[..=self.num_instance_vars as usize].to_vec();
                self.best = Some(Incumbent { value, sic, model });
                if value <= self.o.constant() {
                    // nothing is cheaper than the constant: the new bound is infeasible
                    return self.finish_root(log);
                }
                if self.encoding_due() {
                    match self.encode(log) {
                        Step::Continue => continue,
                        Step::Root => return self.finish_root(log),
                        Step::Limit => return self.indeterminate(),
                    }
                }
            }
            // a complete assignment not below the bound: its trivial cores
            // alone reach the bound
            match self.lookahead(log).expect("complete assignment without a soft conflict") {
                Step::Continue => {}
                Step::Root => return self.finish_root(log),
                Step::Limit => return self.indeterminate(),
            }
        }
    }

    /// Add a clause; unit clauses go to level 0 since they are never watched.
    fn add(&mut self, lits: &[Lit], id: ConstraintId, learnt: bool) -> Added {
        if lits.len() <= 1 {
            self.s.backtrack(0);
        }
        self.s.add_clause(lits, id, learnt)
    }

    fn out_of_time(&self) -> bool {
        self.cfg.time_limit.is_some_and(|t| self.start.elapsed() >= t)
    }

    fn indeterminate(&self) -> Outcome {
        Outcome::Indeterminate { best: self.best.as_ref().map(|b| (b.value, b.model.clone())) }
    }

    fn finish_root(&mut self, log: &mut ProofLogger) -> Outcome {
        log.rup_clause(&[]);
        match &self.best {
            Some(b) => {
                log.conclude(Conclusion::Bounds(b.value));
                Outcome::Optimum { value: b.value, model: b.model.clone() }
            }
            None => {
                log.conclude(Conclusion::Unsat);
                Outcome::Unsat
            }
        }
    }

    /// Learn from the falsified clause `c`, then apply restarts, clause
    /// deletion and limits.
    fn conflict(&mut self, c: ClauseRef, log: &mut ProofLogger) -> Step {
        self.stats.conflicts += 1;
        if let Step::Root = self.learn(c, log) {
            return Step::Root;
        }
        if self.cfg.conflict_limit.is_some_and(|n| self.stats.conflicts >= n) || self.out_of_time() {
            return Step::Limit;
        }
        if self.cfg.restarts && self.stats.conflicts >= RESTART_START {
            self.since_restart += 1;
            if self.since_restart >= RESTART_UNIT * luby(self.restart_idx) {
                self.restart_idx += 1;
                self.since_restart = 0;
                self.stats.restarts += 1;
                self.s.backtrack(0);
            }
        }
        if self.cfg.reduce_db && self.stats.conflicts >= self.next_reduce {
            self.reductions += 1;
            self.next_reduce += REDUCE_FIRST + REDUCE_INC * self.reductions;
            for id in self.s.reduce_db() {
                log.delete(id);
                self.stats.deleted += 1;
            }
        }
        Step::Continue
    }

    fn learn(&mut self, c: ClauseRef, log: &mut ProofLogger) -> Step {
        let lits = self.s.clause(c);
        let top = lits.iter().map(|l| self.s.level(l.var())).max().unwrap_or(0);
        if top == 0 {
            return Step::Root;
        }
        self.s.backtrack(top);
        let (learnt, bt) = self.s.analyze(c);
        let mut sorted = learnt.clone();
        sorted.sort_unstable();
        let id = log.rup_clause(&sorted);
        self.stats.learned += 1;
        self.s.backtrack(bt);
        let added = self.s.add_clause(&learnt, id, true);
        debug_assert!(matches!(added, Added::Unit(_)), "learned clause is not asserting");
        Step::Continue
    }

    /// One look-ahead call against the incumbent. `None` if it found
    /// nothing.
    fn lookahead(&mut self, log: &mut ProofLogger) -> Option<Step> {
        let b = self.best.as_ref()?;
        let bound = Some((b.value, b.sic));
        match lookahead(&mut self.s, self.o, bound, log, &mut self.stats.lookahead) {
            LookaheadOutcome::Nothing => None,
            LookaheadOutcome::SoftConflict { clause, id } => match self.add(&clause, id, true) {
                Added::Conflict(c) => Some(self.conflict(c, log)),
                _ => {
                    // a unit soft conflict moved to level 0 and asserted
                    self.stats.conflicts += 1;
                    Some(Step::Continue)
                }
            },
            LookaheadOutcome::Hardened(hs) => {
                for h in hs {
                    if self.s.value(h.lit) == Some(true) {
                        continue;
                    }
                    if let Added::Conflict(c) = self.add(&h.clause, h.id, true) {
                        return Some(self.conflict(c, log));
                    }
                }
                Some(Step::Continue)
            }
        }
    }

    fn encoding_due(&self) -> bool {
        self.cfg.mdd_threshold > 0 && !self.o.is_empty() && self.o.len() <= self.cfg.mdd_threshold
    }

    /// Add the certified encoding of `O <= best - 1` at level 0.
    fn encode(&mut self, log: &mut ProofLogger) -> Step {
        self.s.backtrack(0);
        if self.s.propagate().is_some() {
            return Step::Root;
        }
        if self.mdd.is_none() {
            let groups = if self.cfg.amo_detect { detect_amo_groups(&mut self.s, self.o) } else { Vec::new() };
            self.stats.amo_groups = groups.iter().filter(|g| g.len() > 1).count();
            self.mdd = Some(MddEncoder::new(self.o, &groups, log));
        }
        let b = self.best.as_ref().expect("encoding without incumbent");
        let mdd = self.mdd.as_mut().unwrap();
        let enc = mdd.encode(b.value, b.sic, &mut self.next_var, log);
        self.stats.mdd_encodings += 1;
        self.stats.mdd_nodes = mdd.nodes().len();
        match enc {
            Encoding::Infeasible => Step::Root,
            Encoding::Trivial => Step::Continue,
            Encoding::Clauses(cs) => {
                self.s.grow(self.next_var - 1);
                for (lits, id) in cs {
                    self.stats.mdd_clauses += 1;
                    if let Added::Conflict(_) = self.add(&lits, id, false) {
                        return Step::Root;
                    }
                }
                Step::Continue
            }
        }
    }
}
