//! Cutting-planes derivations of soft-conflict and hardening clauses from a
//! weighted core set and the solution-improving constraint.

use pb_core::{Coeff, Lit, PbConstraint};

use crate::{ConstraintId, ProofLogger};

/// A core as seen by the derivation: its weight and the id of its clause.
/// Trivial cores `<w, {l}, {~l}>` have the tautological clause `~l \/ l`
/// and pass `None`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CoreTerm {
    pub weight: Coeff,
    pub clause: Option<ConstraintId>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Thm1Kind {
    SoftConflict,
    Hardening,
}

/// Step census of one derivation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Thm1Record {
    pub kind: Thm1Kind,
    pub steps: u64,
    pub objective_len: usize,
    pub cores: usize,
}

impl Thm1Record {
    pub fn bound(&self) -> u64 {
        let base = 3 * self.objective_len as u64 + 2 * self.cores as u64;
        match self.kind {
            Thm1Kind::SoftConflict => base + 1,
            Thm1Kind::Hardening => base.saturating_sub(2),
        }
    }

    pub fn within_bound(&self) -> bool {
        self.steps <= self.bound()
    }
}

fn clause_of(lits: &[Lit]) -> PbConstraint {
    let mut l = lits.to_vec();
    l.sort_unstable();
    l.dedup();
    PbConstraint::clause(&l)
}

impl ProofLogger {
    /// Derive `clause_C` when the core weight reaches the bound `best`,
    /// whose solution-improving constraint is `sic`. `residuals` lists
    /// every objective literal with positive residual weight; `expected` is
    /// the disjunction of the negated reasons.
    pub fn derive_soft_conflict(
        &mut self,
        cores: &[CoreTerm],
        residuals: &[(Lit, Coeff)],
        best: Coeff,
        sic: ConstraintId,
        expected: &[Lit],
    ) -> ConstraintId {
        let weight: Coeff = cores.iter().map(|q| q.weight).sum();
        assert!(
            weight + self.objective.constant() >= best,
            "core weight {weight} does not reach the bound {best}"
        );
        self.derive(Thm1Kind::SoftConflict, cores, residuals, sic, None, expected)
    }

    /// Derive `clause_C \/ ~l` when `r(l) + w(C)` reaches the bound.
    pub fn derive_hardening(
        &mut self,
        cores: &[CoreTerm],
        residuals: &[(Lit, Coeff)],
        l: Lit,
        best: Coeff,
        sic: ConstraintId,
        expected: &[Lit],
    ) -> ConstraintId {
        let weight: Coeff = cores.iter().map(|q| q.weight).sum();
        let r = residuals.iter().find(|&&(m, _)| m == l).map_or(0, |&(_, r)| r);
        assert!(
            r + weight + self.objective.constant() >= best,
            "residual {r} plus core weight {weight} does not reach the bound {best}"
        );
        self.derive(Thm1Kind::Hardening, cores, residuals, sic, Some(l), expected)
    }

    fn derive(
        &mut self,
        kind: Thm1Kind,
        cores: &[CoreTerm],
        residuals: &[(Lit, Coeff)],
        sic: ConstraintId,
        skip: Option<Lit>,
        expected: &[Lit],
    ) -> ConstraintId {
        let objective_len = self.objective.len();
        let mut pol = self.pol().id(sic);
        for &(l, r) in residuals {
            debug_assert!(r > 0);
            if Some(l) != skip {
                pol = pol.add_axiom(l, r);
            }
        }
        for q in cores {
            if let Some(id) = q.clause {
                pol = pol.add_scaled(id, q.weight);
            }
        }
        let divisor = pol.top().map_or(1, |c| c.max_coeff().max(c.degree()).max(1));
        let pol = pol.div(divisor);
        let steps = pol.steps().total();
        let id = pol.finish_expect(&clause_of(expected));
        let rec = Thm1Record { kind, steps, objective_len, cores: cores.len() };
        assert!(rec.within_bound(), "derivation uses {} steps, bound {}", rec.steps, rec.bound());
        self.thm1.push(rec);
        id
    }
}
