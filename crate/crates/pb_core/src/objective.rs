use crate::constraint::{normalize, Coeff, PbConstraint, PbResult, RawConstraint};
use crate::lit::{Lit, Var};

/// A linear objective `sum c_i l_i + constant` to be minimized.
///
/// Costs are strictly positive, terms are sorted by variable and each
/// variable occurs once, so `cost(l) > 0` implies `cost(!l) == 0`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Objective {
    terms: Vec<(Coeff, Lit)>,
    constant: Coeff,
}

impl Objective {
    pub fn new(terms: impl IntoIterator<Item = (Coeff, Lit)>, constant: Coeff) -> PbResult<Objective> {
        // Normalizing `sum >= 0` moves the cancelled parts into the degree.
        let k = PbConstraint::from_terms(terms, 0)?;
        let constant = constant.checked_sub(k.degree()).ok_or(crate::PbError::Overflow)?;
        Ok(Objective { terms: k.terms().to_vec(), constant })
    }

    pub fn terms(&self) -> &[(Coeff, Lit)] {
        &self.terms
    }

    pub fn constant(&self) -> Coeff {
        self.constant
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `w_O(l)`: the cost of `l`, zero if `l` is not an objective literal.
    pub fn cost(&self, l: Lit) -> Coeff {
        match self.terms.binary_search_by_key(&l.var(), |&(_, t)| t.var()) {
            Ok(i) if self.terms[i].1 == l => self.terms[i].0,
            _ => 0,
        }
    }

    pub fn contains_var(&self, v: Var) -> bool {
        self.terms.binary_search_by_key(&v, |&(_, t)| t.var()).is_ok()
    }

    pub fn eval(&self, value: impl Fn(Var) -> bool) -> Coeff {
        self.constant
            + self
                .terms
                .iter()
                .filter(|&&(_, l)| l.eval(value(l.var())))
                .map(|&(c, _)| c)
                .sum::<Coeff>()
    }

    /// The solution-improving constraint `O <= bound - 1`, normalized.
    pub fn improving_constraint(&self, bound: Coeff) -> PbResult<PbConstraint> {
        let rhs = bound
            .checked_sub(1)
            .and_then(|b| b.checked_sub(self.constant))
            .ok_or(crate::PbError::Overflow)?;
        normalize(&RawConstraint::le(self.terms.clone(), rhs))
    }
}
