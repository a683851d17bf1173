use pb_core::{Coeff, Lit, Objective, PbConstraint, PbResult, Var};

use crate::MaxSatInstance;

/// How a soft clause shows up in the objective.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SoftRepr {
    /// Unit soft clause `{l}`: the objective pays for `~l`.
    Unit(Lit),
    /// Non-unit soft clause relaxed by the fresh literal `b`.
    Relaxed(Lit),
    /// Empty soft clause: its weight goes into the objective constant.
    Constant,
    /// Tautological soft clause: never falsified.
    Satisfied,
}

impl SoftRepr {
    /// The objective literal charged when this soft clause is falsified.
    pub fn objective_lit(self) -> Option<Lit> {
        match self {
            SoftRepr::Unit(l) => Some(!l),
            SoftRepr::Relaxed(b) => Some(b),
            _ => None,
        }
    }
}

/// Pseudo-Boolean optimization view: minimize `objective` subject to `formula`.
#[derive(Clone, Debug)]
pub struct PboInstance {
    /// Instance variables followed by relaxation variables.
    pub num_vars: u32,
    pub num_instance_vars: u32,
    /// Hard clauses in file order, then one relaxed clause per non-unit soft.
    pub formula: Vec<PbConstraint>,
    pub objective: Objective,
    /// Per soft clause, in file order.
    pub soft: Vec<SoftRepr>,
}

impl PboInstance {
    pub fn is_feasible(&self, value: impl Fn(Var) -> bool) -> bool {
        self.formula.iter().all(|c| c.eval(&value))
    }
}

/// Sorted, duplicate-free literals, or `None` for a tautology.
fn clean(c: &[Lit]) -> Option<Vec<Lit>> {
    let mut lits = c.to_vec();
    lits.sort_unstable();
    lits.dedup();
    if lits.windows(2).any(|w| w[0] == !w[1]) {
        None
    } else {
        Some(lits)
    }
}

pub fn to_pbo(inst: &MaxSatInstance) -> PbResult<PboInstance> {
    let mut formula = Vec::with_capacity(inst.hard.len() + inst.soft.len());
    for c in &inst.hard {
        match clean(c) {
            Some(lits) => formula.push(PbConstraint::clause(&lits)),
            None => formula.push(PbConstraint::constant(0)),
        }
    }
    let mut next: Var = inst.num_vars;
    let mut terms: Vec<(Coeff, Lit)> = Vec::new();
    let mut constant: Coeff = 0;
    let mut soft = Vec::with_capacity(inst.soft.len());
    for (w, c) in &inst.soft {
        let repr = match clean(c) {
            None => SoftRepr::Satisfied,
            Some(lits) if lits.is_empty() => {
                constant = constant.checked_add(*w).ok_or(pb_core::PbError::Overflow)?;
                SoftRepr::Constant
            }
            Some(lits) if lits.len() == 1 => SoftRepr::Unit(lits[0]),
            Some(mut lits) => {
                next += 1;
                let b = Lit::pos(next);
                lits.push(b);
                formula.push(PbConstraint::clause(&lits));
                SoftRepr::Relaxed(b)
            }
        };
        if let Some(l) = repr.objective_lit() {
            terms.push((*w, l));
        }
        soft.push(repr);
    }
    Ok(PboInstance {
        num_vars: next,
        num_instance_vars: inst.num_vars,
        formula,
        objective: Objective::new(terms, constant)?,
        soft,
    })
}
