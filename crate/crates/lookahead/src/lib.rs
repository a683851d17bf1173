//! Bounding by look-ahead: find an O-compatible set of weighted local cores
//! under the current assignment and turn it into a soft conflict or into
//! hardened objective literals, with a cutting-planes derivation for each
//! learned clause.
//!
//! The procedure runs on the host's own trail: every assumption opens a
//! decision level above the current one and all of them are undone before
//! returning.

mod cores;

use pb_core::{Coeff, Lit, Objective, Var};
use proof_log::{ConstraintId, CoreTerm, ProofLogger};

pub use cores::{core_weight, CoreSet, WeightedLocalCore};

/// What look-ahead needs from the solver.
pub trait LookaheadHost {
    fn value(&self, l: Lit) -> Option<bool>;
    fn level(&self, v: Var) -> u32;
    fn decision_level(&self) -> u32;
    fn trail(&self) -> &[Lit];
    /// Fill `out` with the clause that implied `v` and return true, or
    /// return false if `v` was a decision.
    fn reason(&self, v: Var, out: &mut Vec<Lit>) -> bool;
    /// Open a decision level and make `l` true.
    fn assume(&mut self, l: Lit);
    /// Unit propagate. On conflict return the falsified clause.
    fn propagate(&mut self) -> Option<Vec<Lit>>;
    fn backtrack(&mut self, level: u32);
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LookaheadStats {
    pub calls: u64,
    pub cores: u64,
    pub soft_conflicts: u64,
    pub hardenings: u64,
}

/// A hardened literal: `lit` must be made true, justified by `clause`
/// (which contains `lit`; every other literal is false).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hardening {
    pub lit: Lit,
    pub clause: Vec<Lit>,
    pub id: ConstraintId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LookaheadOutcome {
    Nothing,
    /// `clause` is falsified by the current assignment.
    SoftConflict { clause: Vec<Lit>, id: ConstraintId },
    Hardened(Vec<Hardening>),
}

enum Seed {
    Conflict(Vec<Lit>),
    Propagated(Lit),
}

fn objective_position(o: &Objective, l: Lit) -> Option<usize> {
    let i = o.terms().binary_search_by_key(&l.var(), |&(_, t)| t.var()).ok()?;
    (o.terms()[i].1 == l).then_some(i)
}

/// Unassigned objective literal with the largest positive residual,
/// ties broken by variable index.
fn pick<H: LookaheadHost>(host: &H, o: &Objective, cs: &CoreSet) -> Option<Lit> {
    let mut best: Option<(Coeff, Lit)> = None;
    for (i, &(_, l)) in o.terms().iter().enumerate() {
        let r = cs.residual_at(i);
        if r > 0 && host.value(l).is_none() && best.map_or(true, |(b, _)| r > b) {
            best = Some((r, l));
        }
    }
    best.map(|(_, l)| l)
}

/// Reduce a core found above level `base` to the decisions it depends on
/// (`K'`) and the literals at or below `base` it uses (`R`). Literals fixed
/// at level 0 are left out of `R`.
pub fn improve_core<H: LookaheadHost>(host: &H, base: u32, seed_conflict: Option<&[Lit]>, seed_true: Option<Lit>) -> (Vec<Lit>, Vec<Lit>) {
    let trail = host.trail();
    let mut marked = std::collections::HashSet::new();
    let mut reasons = Vec::new();
    let mut kprime = Vec::new();
    if let Some(c) = seed_conflict {
        marked.extend(c.iter().map(|l| l.var()));
    }
    if let Some(l) = seed_true {
        marked.insert(l.var());
        kprime.push(!l);
    }
    let mut buf = Vec::new();
    for &p in trail.iter().rev() {
        let v = p.var();
        if host.level(v) <= base {
            break;
        }
        if !marked.contains(&v) {
            continue;
        }
        if host.reason(v, &mut buf) {
            marked.extend(buf.iter().filter(|q| q.var() != v).map(|q| q.var()));
        } else {
            kprime.push(p);
        }
    }
    for &p in trail {
        let lvl = host.level(p.var());
        if lvl > base {
            break;
        }
        if lvl > 0 && marked.contains(&p.var()) {
            reasons.push(p);
        }
    }
    reasons.sort_unstable();
    kprime.sort_unstable();
    kprime.dedup();
    (reasons, kprime)
}

/// Whether asserting `r` and `k` on top of the current state propagates to
/// a conflict. Leaves the host at its current level.
pub fn refutes<H: LookaheadHost>(host: &mut H, r: &[Lit], k: &[Lit]) -> bool {
    let base = host.decision_level();
    let mut conflict = false;
    for &l in r.iter().chain(k) {
        match host.value(l) {
            Some(true) => {}
            Some(false) => {
                conflict = true;
                break;
            }
            None => {
                host.assume(l);
                if host.propagate().is_some() {
                    conflict = true;
                    break;
                }
            }
        }
    }
    host.backtrack(base);
    conflict
}

/// Collect cores until their weight reaches `target` or no unassigned
/// objective literal with positive residual is left.
pub fn discover_cores<H: LookaheadHost>(host: &mut H, o: &Objective, target: Coeff) -> CoreSet {
    let base = host.decision_level();
    let mut cs = CoreSet::new(o);
    for &(c, l) in o.terms() {
        if host.value(l) == Some(true) {
            cs.insert(o, WeightedLocalCore { weight: c, reasons: vec![l], core: vec![!l] });
        }
    }
    while cs.weight() < target {
        let mut seed = None;
        while let Some(l) = pick(host, o, &cs) {
            let start = host.trail().len();
            host.assume(!l);
            let conflict = host.propagate();
            let propagated = host.trail()[start + 1..]
                .iter()
                .copied()
                .find(|&p| objective_position(o, p).is_some_and(|i| cs.residual_at(i) > 0));
            if let Some(p) = propagated {
                seed = Some(Seed::Propagated(p));
            } else if let Some(c) = conflict {
                seed = Some(Seed::Conflict(c));
            }
            if seed.is_some() {
                break;
            }
        }
        let Some(seed) = seed else { break };
        let (r, k) = match &seed {
            Seed::Conflict(c) => improve_core(host, base, Some(c), None),
            Seed::Propagated(p) => improve_core(host, base, None, Some(*p)),
        };
        host.backtrack(base);
        debug_assert!(refutes(host, &r, &k), "improved core does not propagate to a conflict");
        let weight = core_weight(o, &k, &cs);
        cs.insert(o, WeightedLocalCore { weight, reasons: r, core: k });
    }
    host.backtrack(base);
    cs
}

fn log_cores(cs: &CoreSet, log: &mut ProofLogger) -> Vec<CoreTerm> {
    cs.cores()
        .iter()
        .map(|q| CoreTerm {
            weight: q.weight,
            clause: if q.is_trivial() { None } else { Some(log.rup_clause(&q.clause())) },
        })
        .collect()
}

/// One look-ahead call. `bound` is the best objective value so far (`None`
/// while no solution is known) and `sic` the id of its solution-improving
/// constraint.
pub fn lookahead<H: LookaheadHost>(
    host: &mut H,
    o: &Objective,
    bound: Option<(Coeff, ConstraintId)>,
    log: &mut ProofLogger,
    stats: &mut LookaheadStats,
) -> LookaheadOutcome {
    let Some((best, sic)) = bound else { return LookaheadOutcome::Nothing };
    stats.calls += 1;
    let target = best - o.constant();
    let cs = discover_cores(host, o, target);
    stats.cores += cs.cores().iter().filter(|q| !q.is_trivial()).count() as u64;
    let residuals = cs.positive_residuals(o);
    if cs.weight() >= target {
        stats.soft_conflicts += 1;
        let terms = log_cores(&cs, log);
        let clause = cs.clause();
        let id = log.derive_soft_conflict(&terms, &residuals, best, sic, &clause);
        return LookaheadOutcome::SoftConflict { clause, id };
    }
    let hardened: Vec<Lit> = residuals
        .iter()
        .filter(|&&(l, r)| r + cs.weight() >= target && host.value(l).is_none())
        .map(|&(l, _)| l)
        .collect();
    if hardened.is_empty() {
        return LookaheadOutcome::Nothing;
    }
    let terms = log_cores(&cs, log);
    let base = cs.clause();
    let mut out = Vec::with_capacity(hardened.len());
    for l in hardened {
        let mut clause = base.clone();
        clause.push(!l);
        clause.sort_unstable();
        let id = log.derive_hardening(&terms, &residuals, l, best, sic, &clause);
        out.push(Hardening { lit: !l, clause, id });
    }
    stats.hardenings += out.len() as u64;
    LookaheadOutcome::Hardened(out)
}
