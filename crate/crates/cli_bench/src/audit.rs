//! Semantic audit of an accepted proof on a small instance, independent of
//! the checker's rules.
//!
//! Every feasible assignment of the instance is enumerated and extended to
//! the reified variables through the `red` lines that introduce them. A
//! constraint stored at some line must then hold on every extended
//! assignment whose value is below the best solution logged up to that
//! line. Variables with no definition count against the constraint, so a
//! constraint must hold for all of their values. Logged solutions must be
//! feasible and the conclusion must match the enumerated optimum.

use instance_io::PboInstance;
use pb_core::text::parse_lit;
use pb_core::{Coeff, PbConstraint, Var};
use proof_checker::{TraceEntry, Verdict};

/// Largest number of variables (instance plus relaxation) audited.
pub const AUDIT_MAX_VARS: u32 = 16;

const UNDEF: u8 = 2;

pub struct Auditor {
    inst: PboInstance,
    /// Feasible assignments as bit sets with their objective value.
    models: Vec<(Coeff, u64)>,
    optimum: Option<Coeff>,
}

/// A witness definition: `var` takes `!bit` exactly when `c` allows it.
struct Def {
    var: Var,
    bit: bool,
    c: PbConstraint,
}

fn holds(c: &PbConstraint, full: &[u8]) -> bool {
    let mut lhs: Coeff = 0;
    for &(a, l) in c.terms() {
        match full.get(l.var() as usize).copied().unwrap_or(UNDEF) {
            UNDEF => {}
            b => {
                if l.eval(b == 1) {
                    lhs += a;
                }
            }
        }
    }
    lhs >= c.degree()
}

impl Auditor {
    /// `None` if the instance is too large to enumerate.
    pub fn new(inst: &PboInstance) -> Option<Auditor> {
        if inst.num_vars > AUDIT_MAX_VARS {
            return None;
        }
        let mut models = Vec::new();
        for bits in 0u64..1 << inst.num_vars {
            let value = |v: Var| bits >> (v - 1) & 1 == 1;
            if inst.is_feasible(value) {
                models.push((inst.objective.eval(value), bits));
            }
        }
        let optimum = models.iter().map(|&(v, _)| v).min();
        Some(Auditor { inst: inst.clone(), models, optimum })
    }

    pub fn optimum(&self) -> Option<Coeff> {
        self.optimum
    }

    /// Check an accepted proof given its verdict and constraint trace.
    pub fn audit(&self, proof: &str, verdict: Verdict, trace: &[TraceEntry]) -> Result<(), String> {
        let lines: Vec<&str> = proof.lines().collect();
        let n = self.inst.num_vars;

        // best logged value at or before each line (1-based)
        let mut best_at: Vec<Option<Coeff>> = vec![None; lines.len() + 1];
        let mut best: Option<Coeff> = None;
        for (i, line) in lines.iter().enumerate() {
            let mut toks = line.split_whitespace();
            if toks.next() == Some("soli") {
                let mut bits = 0u64;
                for t in toks {
                    let l = parse_lit(t).map_err(|e| format!("line {}: {e}", i + 1))?;
                    if l.var() <= n && l.is_positive() {
                        bits |= 1 << (l.var() - 1);
                    }
                }
                let value = |v: Var| bits >> (v - 1) & 1 == 1;
                if !self.inst.is_feasible(value) {
                    return Err(format!("line {}: logged solution is infeasible", i + 1));
                }
                let v = self.inst.objective.eval(value);
                best = Some(best.map_or(v, |b: Coeff| b.min(v)));
            }
            best_at[i + 1] = best;
        }

        let mut defs: Vec<Def> = Vec::new();
        let mut max_var = n;
        for e in trace {
            max_var = max_var.max(e.constraint.lits().map(|l| l.var()).max().unwrap_or(0));
            if e.temporary {
                continue;
            }
            let toks: Vec<&str> = lines[e.line - 1].split_whitespace().collect();
            if toks.first() != Some(&"red") || toks.len() < 4 || toks[toks.len() - 2] != "->" {
                continue;
            }
            let var = parse_lit(toks[toks.len() - 3]).map_err(|err| err.to_string())?.var();
            if defs.iter().all(|d| d.var != var) {
                defs.push(Def { var, bit: toks[toks.len() - 1] == "1", c: e.constraint.clone() });
            }
        }

        let mut full = vec![UNDEF; max_var as usize + 1];
        for &(value, bits) in &self.models {
            full.fill(UNDEF);
            for v in 1..=n {
                full[v as usize] = (bits >> (v - 1) & 1) as u8;
            }
            for d in &defs {
                let alt = !d.bit;
                let allowed = holds(&d.c.restrict(d.var, alt), &full);
                full[d.var as usize] = if allowed { alt as u8 } else { d.bit as u8 };
            }
            for e in trace.iter().filter(|e| !e.temporary) {
                if best_at[e.line].is_some_and(|b| value >= b) {
                    continue;
                }
                if !holds(&e.constraint, &full) {
                    return Err(format!(
                        "line {}: constraint {} `{}` fails on a solution of value {value}",
                        e.line, e.id, e.constraint
                    ));
                }
            }
        }

        match (verdict, self.optimum) {
            (Verdict::Incomplete, _) => Ok(()),
            (Verdict::Optimal(v), Some(o)) if v == o => Ok(()),
            (Verdict::Unsat, None) => Ok(()),
            (v, o) => Err(format!("conclusion {v:?} but the optimum is {o:?}")),
        }
    }
}
