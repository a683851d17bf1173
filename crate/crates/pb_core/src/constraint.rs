use std::fmt;

use thiserror::Error;

use crate::lit::{Lit, Var};

/// Coefficient and degree type. All arithmetic is checked.
pub type Coeff = i128;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PbError {
    #[error("coefficient arithmetic overflowed")]
    Overflow,
    #[error("multiplier or divisor must be at least 1, got {0}")]
    BadFactor(Coeff),
}

pub type PbResult<T> = Result<T, PbError>;

fn add(a: Coeff, b: Coeff) -> PbResult<Coeff> {
    a.checked_add(b).ok_or(PbError::Overflow)
}

fn sub(a: Coeff, b: Coeff) -> PbResult<Coeff> {
    a.checked_sub(b).ok_or(PbError::Overflow)
}

fn mul(a: Coeff, b: Coeff) -> PbResult<Coeff> {
    a.checked_mul(b).ok_or(PbError::Overflow)
}

fn div_ceil(a: Coeff, k: Coeff) -> Coeff {
    debug_assert!(k > 0);
    -((-a).div_euclid(k))
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Relation {
    Ge,
    Le,
}

/// An unnormalized linear inequality with arbitrary integer coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawConstraint {
    pub terms: Vec<(Coeff, Lit)>,
    pub relation: Relation,
    pub rhs: Coeff,
}

impl RawConstraint {
    pub fn ge(terms: Vec<(Coeff, Lit)>, rhs: Coeff) -> RawConstraint {
        RawConstraint { terms, relation: Relation::Ge, rhs }
    }

    pub fn le(terms: Vec<(Coeff, Lit)>, rhs: Coeff) -> RawConstraint {
        RawConstraint { terms, relation: Relation::Le, rhs }
    }
}

/// A normalized pseudo-Boolean constraint `sum a_i l_i >= degree`.
///
/// Coefficients are strictly positive, each variable occurs at most once and
/// terms are sorted by variable. The degree is kept exact: a non-positive
/// degree means the constraint is trivially satisfied, but the value still
/// matters when the constraint takes part in a linear combination.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct PbConstraint {
    terms: Vec<(Coeff, Lit)>,
    degree: Coeff,
}

/// Normalize an inequality of either direction.
pub fn normalize(raw: &RawConstraint) -> PbResult<PbConstraint> {
    match raw.relation {
        Relation::Ge => PbConstraint::from_terms(raw.terms.iter().copied(), raw.rhs),
        Relation::Le => {
            let mut neg = Vec::with_capacity(raw.terms.len());
            for &(a, l) in &raw.terms {
                neg.push((a.checked_neg().ok_or(PbError::Overflow)?, l));
            }
            let rhs = raw.rhs.checked_neg().ok_or(PbError::Overflow)?;
            PbConstraint::from_terms(neg, rhs)
        }
    }
}

impl PbConstraint {
    /// Normalize `sum a_i l_i >= degree` where the `a_i` may have any sign
    /// and literals may repeat.
    pub fn from_terms(
        terms: impl IntoIterator<Item = (Coeff, Lit)>,
        degree: Coeff,
    ) -> PbResult<PbConstraint> {
        // Rewrite everything over positive literals: a*~x = a - a*x.
        let mut signed: Vec<(Var, Coeff)> = Vec::new();
        let mut constant: Coeff = 0;
        for (a, l) in terms {
            if a == 0 {
                continue;
            }
            if l.is_positive() {
                signed.push((l.var(), a));
            } else {
                signed.push((l.var(), a.checked_neg().ok_or(PbError::Overflow)?));
                constant = add(constant, a)?;
            }
        }
        signed.sort_unstable_by_key(|&(v, _)| v);
        let mut out: Vec<(Coeff, Lit)> = Vec::with_capacity(signed.len());
        let mut i = 0;
        while i < signed.len() {
            let v = signed[i].0;
            let mut s: Coeff = 0;
            while i < signed.len() && signed[i].0 == v {
                s = add(s, signed[i].1)?;
                i += 1;
            }
            if s > 0 {
                out.push((s, Lit::pos(v)));
            } else if s < 0 {
                // s*x = s - s*~x
                out.push((s.checked_neg().ok_or(PbError::Overflow)?, Lit::neg(v)));
                constant = add(constant, s)?;
            }
        }
        Ok(PbConstraint { terms: out, degree: sub(degree, constant)? })
    }

    /// The clause `l_1 + ... + l_n >= 1`.
    pub fn clause(lits: &[Lit]) -> PbConstraint {
        PbConstraint::from_terms(lits.iter().map(|&l| (1, l)), 1)
            .expect("clauses cannot overflow")
    }

    /// The literal axiom `l >= 0`.
    pub fn literal_axiom(l: Lit) -> PbConstraint {
        PbConstraint { terms: vec![(1, l)], degree: 0 }
    }

    /// `0 >= degree`.
    pub fn constant(degree: Coeff) -> PbConstraint {
        PbConstraint { terms: Vec::new(), degree }
    }

    pub fn terms(&self) -> &[(Coeff, Lit)] {
        &self.terms
    }

    pub fn degree(&self) -> Coeff {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn lits(&self) -> impl Iterator<Item = Lit> + '_ {
        self.terms.iter().map(|&(_, l)| l)
    }

    pub fn coeff_of(&self, l: Lit) -> Coeff {
        match self.terms.binary_search_by_key(&l.var(), |&(_, t)| t.var()) {
            Ok(i) if self.terms[i].1 == l => self.terms[i].0,
            _ => 0,
        }
    }

    pub fn contains_var(&self, v: Var) -> bool {
        self.terms.binary_search_by_key(&v, |&(_, t)| t.var()).is_ok()
    }

    pub fn max_coeff(&self) -> Coeff {
        self.terms.iter().map(|&(a, _)| a).max().unwrap_or(0)
    }

    pub fn coeff_sum(&self) -> PbResult<Coeff> {
        self.terms.iter().try_fold(0, |s, &(a, _)| add(s, a))
    }

    /// Degree at most zero: satisfied by every assignment.
    pub fn is_tautology(&self) -> bool {
        self.degree <= 0
    }

    /// Exactly the form `0 >= d` with `d >= 1`.
    pub fn is_contradiction(&self) -> bool {
        self.terms.is_empty() && self.degree >= 1
    }

    /// No assignment satisfies the constraint.
    pub fn is_infeasible(&self) -> bool {
        match self.coeff_sum() {
            Ok(s) => s < self.degree,
            Err(_) => false,
        }
    }

    /// All coefficients one and degree one.
    pub fn is_clause(&self) -> bool {
        self.degree == 1 && self.terms.iter().all(|&(a, _)| a == 1)
    }

    /// Evaluate under a total assignment.
    pub fn eval(&self, value: impl Fn(Var) -> bool) -> bool {
        let mut lhs: Coeff = 0;
        for &(a, l) in &self.terms {
            if l.eval(value(l.var())) {
                lhs += a;
            }
        }
        lhs >= self.degree
    }

    /// The constraint satisfied exactly by the assignments violating `self`.
    pub fn negate(&self) -> PbResult<PbConstraint> {
        let sum = self.coeff_sum()?;
        let degree = add(sub(sum, self.degree)?, 1)?;
        Ok(PbConstraint { terms: self.terms.iter().map(|&(a, l)| (a, !l)).collect(), degree })
    }

    /// Sum of two constraints, with `x + ~x = 1` cancellation.
    pub fn add(&self, other: &PbConstraint) -> PbResult<PbConstraint> {
        let (a, b) = (&self.terms, &other.terms);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let mut degree = add(self.degree, other.degree)?;
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            let (ca, la) = a[i];
            let (cb, lb) = b[j];
            if la.var() < lb.var() {
                out.push(a[i]);
                i += 1;
            } else if lb.var() < la.var() {
                out.push(b[j]);
                j += 1;
            } else {
                if la == lb {
                    out.push((add(ca, cb)?, la));
                } else if ca > cb {
                    out.push((ca - cb, la));
                    degree = sub(degree, cb)?;
                } else if cb > ca {
                    out.push((cb - ca, lb));
                    degree = sub(degree, ca)?;
                } else {
                    degree = sub(degree, ca)?;
                }
                i += 1;
                j += 1;
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Ok(PbConstraint { terms: out, degree })
    }

    pub fn multiply(&self, k: Coeff) -> PbResult<PbConstraint> {
        if k < 1 {
            return Err(PbError::BadFactor(k));
        }
        let mut terms = Vec::with_capacity(self.terms.len());
        for &(a, l) in &self.terms {
            terms.push((mul(a, k)?, l));
        }
        Ok(PbConstraint { terms, degree: mul(self.degree, k)? })
    }

    /// Division with rounding up of coefficients and degree.
    pub fn divide(&self, k: Coeff) -> PbResult<PbConstraint> {
        if k < 1 {
            return Err(PbError::BadFactor(k));
        }
        Ok(PbConstraint {
            terms: self.terms.iter().map(|&(a, l)| (div_ceil(a, k), l)).collect(),
            degree: div_ceil(self.degree, k),
        })
    }

    /// Cap every coefficient at the degree.
    pub fn saturate(&self) -> PbConstraint {
        if self.degree <= 0 {
            return PbConstraint::constant(self.degree);
        }
        PbConstraint {
            terms: self.terms.iter().map(|&(a, l)| (a.min(self.degree), l)).collect(),
            degree: self.degree,
        }
    }

    /// Fix `var` to `value` and renormalize.
    pub fn restrict(&self, var: Var, value: bool) -> PbConstraint {
        let mut degree = self.degree;
        let mut terms = Vec::with_capacity(self.terms.len());
        for &(a, l) in &self.terms {
            if l.var() == var {
                if l.eval(value) {
                    degree -= a;
                }
            } else {
                terms.push((a, l));
            }
        }
        PbConstraint { terms, degree }
    }
}

impl fmt::Display for PbConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &(a, l) in &self.terms {
            write!(f, "+{} {} ", a, l)?;
        }
        write!(f, ">= {} ;", self.degree)
    }
}

impl fmt::Debug for PbConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
