//! Writer for pseudo-Boolean proofs.
//!
//! The logger keeps its own copy of every live constraint so that each
//! `pol` line can be evaluated as it is written and compared with what the
//! caller expects. A disabled logger hands out ids and writes nothing.

mod pol;
mod thm1;

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::io::{self, Write};

use pb_core::{Coeff, Lit, Objective, PbConstraint, Propagator, Var};

pub use pol::{PolBuilder, StepCount};
pub use thm1::{CoreTerm, Thm1Kind, Thm1Record};

pub type ConstraintId = u64;

/// Number of proof lines and primitive steps by rule.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Census {
    pub pol: u64,
    pub rup: u64,
    pub red: u64,
    pub subproofs: u64,
    pub soli: u64,
    pub del: u64,
    pub steps: StepCount,
}

impl Census {
    pub fn lines(&self) -> u64 {
        self.pol + self.rup + self.red + self.subproofs + self.soli + self.del
    }
}

/// Outcome written by [`ProofLogger::conclude`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Conclusion {
    Bounds(Coeff),
    Unsat,
}

#[derive(Clone, Debug)]
pub struct LoggerOptions {
    /// Check every RUP claim against the logger's store before writing it.
    pub verify_rup: bool,
    /// Write `del` lines for retired constraints.
    pub log_deletions: bool,
}

impl Default for LoggerOptions {
    fn default() -> Self {
        LoggerOptions { verify_rup: cfg!(debug_assertions), log_deletions: false }
    }
}

enum Sink {
    Off,
    Buffer(Vec<u8>),
    Writer(io::BufWriter<Box<dyn Write>>),
}

struct Subproof {
    claim: PbConstraint,
    first_temp: ConstraintId,
}

pub struct ProofLogger {
    sink: Sink,
    opts: LoggerOptions,
    objective: Objective,
    next_id: ConstraintId,
    store: HashMap<ConstraintId, PbConstraint>,
    used_vars: HashSet<Var>,
    /// Proof-level definitions `v <-> phi`, in order of introduction.
    defs: Vec<(Var, PbConstraint)>,
    defined: HashSet<Var>,
    subproof: Option<Subproof>,
    best: Option<Coeff>,
    sic: Option<ConstraintId>,
    refuted_since_soli: bool,
    concluded: bool,
    census: Census,
    thm1: Vec<Thm1Record>,
    io_error: Option<io::Error>,
}

impl ProofLogger {
    fn with_sink(sink: Sink, objective: Objective, opts: LoggerOptions) -> ProofLogger {
        let used_vars = objective.terms().iter().map(|&(_, l)| l.var()).collect();
        let mut p = ProofLogger {
            sink,
            opts,
            objective,
            next_id: 1,
            store: HashMap::new(),
            used_vars,
            defs: Vec::new(),
            defined: HashSet::new(),
            subproof: None,
            best: None,
            sic: None,
            refuted_since_soli: false,
            concluded: false,
            census: Census::default(),
            thm1: Vec::new(),
            io_error: None,
        };
        p.emit("pseudo-Boolean proof version 2.0");
        p
    }

    /// A logger that writes nothing and keeps no constraints.
    pub fn disabled(objective: Objective) -> ProofLogger {
        ProofLogger::with_sink(Sink::Off, objective, LoggerOptions::default())
    }

    pub fn in_memory(objective: Objective, opts: LoggerOptions) -> ProofLogger {
        ProofLogger::with_sink(Sink::Buffer(Vec::new()), objective, opts)
    }

    pub fn to_writer(w: Box<dyn Write>, objective: Objective, opts: LoggerOptions) -> ProofLogger {
        ProofLogger::with_sink(Sink::Writer(io::BufWriter::new(w)), objective, opts)
    }

    pub fn is_enabled(&self) -> bool {
        !matches!(self.sink, Sink::Off)
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    /// Proof text so far, for in-memory loggers.
    pub fn text(&self) -> Option<&str> {
        match &self.sink {
            Sink::Buffer(b) => std::str::from_utf8(b).ok(),
            _ => None,
        }
    }

    pub fn census(&self) -> &Census {
        &self.census
    }

    pub fn thm1_records(&self) -> &[Thm1Record] {
        &self.thm1
    }

    /// Live constraint with the given id.
    pub fn constraint(&self, id: ConstraintId) -> Option<&PbConstraint> {
        self.store.get(&id)
    }

    /// Id of the current solution-improving constraint.
    pub fn sic(&self) -> Option<ConstraintId> {
        self.sic
    }

    pub fn best(&self) -> Option<Coeff> {
        self.best
    }

    /// Flush buffered output and report the first I/O error, if any.
    pub fn flush(&mut self) -> io::Result<()> {
        if let Sink::Writer(w) = &mut self.sink {
            if let Err(e) = w.flush() {
                self.io_error.get_or_insert(e);
            }
        }
        match self.io_error.take() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    fn emit(&mut self, line: &str) {
        let res = match &mut self.sink {
            Sink::Off => return,
            Sink::Buffer(b) => {
                b.extend_from_slice(line.as_bytes());
                b.push(b'\n');
                Ok(())
            }
            Sink::Writer(w) => w.write_all(line.as_bytes()).and_then(|_| w.write_all(b"\n")),
        };
        if let Err(e) = res {
            self.io_error.get_or_insert(e);
        }
    }

    fn fresh_id(&mut self) -> ConstraintId {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    fn store_new(&mut self, c: PbConstraint) -> ConstraintId {
        let id = self.fresh_id();
        if self.is_enabled() {
            self.used_vars.extend(c.lits().map(|l| l.var()));
            if c.is_infeasible() && self.subproof.is_none() {
                self.refuted_since_soli = true;
            }
            self.store.insert(id, c);
        }
        id
    }

    pub(crate) fn get(&self, id: ConstraintId) -> &PbConstraint {
        self.store.get(&id).unwrap_or_else(|| panic!("proof references dead id {id}"))
    }

    /// `f n`: the formula becomes ids `1..=n`.
    pub fn load_formula(&mut self, formula: &[PbConstraint]) {
        assert_eq!(self.next_id, 1, "formula must be loaded first");
        self.emit(&format!("f {}", formula.len()));
        for c in formula {
            self.store_new(c.clone());
        }
    }

    /// `rup c ;`
    pub fn rup(&mut self, c: &PbConstraint) -> ConstraintId {
        if self.is_enabled() {
            if self.opts.verify_rup {
                assert!(self.is_rup(c), "claimed RUP step does not propagate to conflict: {c}");
            }
            self.census.rup += 1;
            self.emit(&format!("rup {c}"));
        }
        self.store_new(c.clone())
    }

    pub fn rup_clause(&mut self, lits: &[Lit]) -> ConstraintId {
        self.rup(&PbConstraint::clause(lits))
    }

    /// Whether `c` follows from the live store by unit propagation.
    pub fn is_rup(&self, c: &PbConstraint) -> bool {
        let mut ids: Vec<&ConstraintId> = self.store.keys().collect();
        ids.sort_unstable();
        let max_var = self
            .store
            .values()
            .chain(std::iter::once(c))
            .flat_map(|d| d.lits())
            .map(|l| l.var() as usize)
            .max()
            .unwrap_or(0);
        let mut p = Propagator::new(max_var);
        p.add(c.negate().expect("negation overflow"));
        for id in ids {
            p.add(self.store[id].clone());
        }
        p.propagate().is_some()
    }

    /// Start a `pol` line.
    pub fn pol(&mut self) -> PolBuilder<'_> {
        PolBuilder::new(self)
    }

    /// Reify `v <-> sum a_i l_i <= rhs` by two redundance steps. Returns
    /// the ids of `v -> ...` and `v <- ...`.
    pub fn reify_le(
        &mut self,
        v: Var,
        terms: &[(Coeff, Lit)],
        rhs: Coeff,
    ) -> (ConstraintId, ConstraintId) {
        let sum: Coeff = terms.iter().map(|&(a, _)| a).sum();
        // v -> sum <= rhs:  (sum - rhs) ~v - sum a_i l_i >= -rhs
        let mut fwd_terms: Vec<(Coeff, Lit)> = terms.iter().map(|&(a, l)| (-a, l)).collect();
        fwd_terms.push((sum - rhs, Lit::neg(v)));
        let fwd = PbConstraint::from_terms(fwd_terms, -rhs).expect("reification overflow");
        // v <- sum <= rhs:  (rhs + 1) v + sum a_i l_i >= rhs + 1
        let mut bwd_terms: Vec<(Coeff, Lit)> = terms.to_vec();
        bwd_terms.push((rhs + 1, Lit::pos(v)));
        let bwd = PbConstraint::from_terms(bwd_terms, rhs + 1).expect("reification overflow");
        let def = pb_core::normalize(&pb_core::RawConstraint::le(terms.to_vec(), rhs))
            .expect("reification overflow");
        self.define(v, def);
        let a = self.red_witness(&fwd, v, false);
        let b = self.red_witness(&bwd, v, true);
        (a, b)
    }

    fn define(&mut self, v: Var, phi: PbConstraint) {
        if self.is_enabled() {
            assert!(!self.used_vars.contains(&v), "reified variable x{v} is not fresh");
            assert!(self.defined.insert(v));
            self.defs.push((v, phi));
        }
    }

    fn red_witness(&mut self, c: &PbConstraint, v: Var, b: bool) -> ConstraintId {
        if self.is_enabled() {
            self.census.red += 1;
            self.emit(&format!("red {c} x{v} -> {}", b as u8));
        }
        self.store_new(c.clone())
    }

    /// Open a proof by contradiction of `c`. Returns the id of `~c`.
    pub fn begin_contradiction(&mut self, c: &PbConstraint) -> ConstraintId {
        assert!(self.subproof.is_none(), "nested subproofs are not supported");
        let neg = c.negate().expect("negation overflow");
        self.subproof = Some(Subproof { claim: c.clone(), first_temp: self.next_id });
        if self.is_enabled() {
            self.census.subproofs += 1;
            self.emit(&format!("red {c} ; begin"));
        }
        self.store_new(neg)
    }

    /// Close the open subproof, whose last step must be a contradiction,
    /// and return the id of the proven constraint.
    pub fn end_contradiction(&mut self) -> ConstraintId {
        let sp = self.subproof.take().expect("no open subproof");
        if self.is_enabled() {
            let last = self.get(self.next_id - 1);
            assert!(
                self.next_id - 1 > sp.first_temp && last.is_infeasible(),
                "subproof for {} does not end in a contradiction",
                sp.claim
            );
            for id in sp.first_temp..self.next_id {
                self.store.remove(&id);
            }
            self.emit("end");
        }
        self.store_new(sp.claim)
    }

    /// Log a solution. `model` is indexed by variable (index 0 unused);
    /// variables outside it and proof-only definitions are filled in here.
    /// Returns the id of the new solution-improving constraint.
    pub fn soli(&mut self, model: &[bool]) -> ConstraintId {
        let value = self.objective.eval(|v| model.get(v as usize).copied().unwrap_or(false));
        if let Some(best) = self.best {
            assert!(value < best, "solution of value {value} does not improve on {best}");
        }
        self.best = Some(value);
        let sic = self.objective.improving_constraint(value).expect("objective overflow");
        if self.is_enabled() {
            let max_var = self.used_vars.iter().copied().max().unwrap_or(0).max(model.len().saturating_sub(1) as Var);
            let mut full = vec![false; max_var as usize + 1];
            for (v, slot) in full.iter_mut().enumerate().skip(1) {
                *slot = model.get(v).copied().unwrap_or(false);
            }
            for (v, phi) in &self.defs {
                let val = phi.eval(|u| full[u as usize]);
                full[*v as usize] = val;
            }
            for (id, c) in &self.store {
                assert!(c.eval(|u| full[u as usize]), "logged solution violates constraint {id}: {c}");
            }
            let mut line = String::from("soli");
            for (v, &b) in full.iter().enumerate().skip(1) {
                let _ = write!(line, " {}", Lit::new(v as Var, b));
            }
            self.census.soli += 1;
            self.emit(&line);
            self.refuted_since_soli = false;
        }
        let old = self.sic.take();
        let id = self.store_new(sic);
        self.sic = Some(id);
        if let Some(old) = old {
            if self.opts.log_deletions {
                self.delete(old);
            }
        }
        let _ = self.flush_quiet();
        id
    }

    fn flush_quiet(&mut self) -> Result<(), ()> {
        if let Sink::Writer(w) = &mut self.sink {
            if let Err(e) = w.flush() {
                self.io_error.get_or_insert(e);
                return Err(());
            }
        }
        Ok(())
    }

    /// `del id n`. Ignored unless deletions are enabled.
    pub fn delete(&mut self, id: ConstraintId) {
        if !self.opts.log_deletions || !self.is_enabled() {
            return;
        }
        assert!(Some(id) != self.sic, "the live solution-improving constraint is never deleted");
        if self.store.remove(&id).is_some() {
            self.census.del += 1;
            self.emit(&format!("del id {id}"));
        }
    }

    /// Write the conclusion. Requires a contradiction after the last solution.
    pub fn conclude(&mut self, c: Conclusion) {
        assert!(!self.concluded, "conclusion written twice");
        if self.is_enabled() {
            assert!(self.refuted_since_soli, "conclusion without a derived contradiction");
            let line = match c {
                Conclusion::Bounds(v) => {
                    assert_eq!(self.best, Some(v), "bounds must match the best logged solution");
                    format!("conclusion BOUNDS {v} {v}")
                }
                Conclusion::Unsat => {
                    assert!(self.best.is_none(), "UNSAT after a logged solution");
                    "conclusion UNSAT".to_string()
                }
            };
            self.emit("output NONE");
            self.emit(&line);
            self.emit("end pseudo-Boolean proof");
        }
        self.concluded = true;
        let _ = self.flush_quiet();
    }

    /// Write a comment line.
    pub fn comment(&mut self, text: &str) {
        if self.is_enabled() {
            self.emit(&format!("* {text}"));
        }
    }

    /// Id the next stored constraint will get.
    pub fn peek_id(&self) -> ConstraintId {
        self.next_id
    }
}
