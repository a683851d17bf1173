use pb_core::{Coeff, Lit, Objective, PbConstraint};
use proof_log::{ConstraintId, ProofLogger};

/// Root-level probing.
pub trait Probe {
    /// Literals true after asserting `l` on a fresh level and propagating,
    /// or `None` if `l` is assigned or propagation fails.
    fn probe(&mut self, l: Lit) -> Option<Vec<Lit>>;
}

/// Greedy partition of the objective positions into groups whose literals
/// exclude each other pairwise by propagation. Positions are taken by
/// descending cost, ties by variable; each group starts at the first free
/// position and takes every later position excluded by all its members.
pub fn detect_amo_groups<P: Probe>(p: &mut P, o: &Objective) -> Vec<Vec<usize>> {
    let n = o.len();
    let mut excl = vec![Vec::new(); n];
    for (i, &(_, l)) in o.terms().iter().enumerate() {
        let Some(implied) = p.probe(l) else { continue };
        for q in implied {
            if let Some(j) = position(o, !q) {
                if j != i {
                    excl[i].push(j);
                    excl[j].push(i);
                }
            }
        }
    }
    for e in &mut excl {
        e.sort_unstable();
        e.dedup();
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(o.terms()[i].0), o.terms()[i].1.var()));
    let mut taken = vec![false; n];
    let mut groups = Vec::new();
    for (a, &i) in order.iter().enumerate() {
        if taken[i] {
            continue;
        }
        taken[i] = true;
        let mut g = vec![i];
        for &j in &order[a + 1..] {
            if !taken[j] && g.iter().all(|&h| excl[h].binary_search(&j).is_ok()) {
                taken[j] = true;
                g.push(j);
            }
        }
        groups.push(g);
    }
    groups
}

fn position(o: &Objective, l: Lit) -> Option<usize> {
    let i = o.terms().binary_search_by_key(&l.var(), |&(_, t)| t.var()).ok()?;
    (o.terms()[i].1 == l).then_some(i)
}

/// `sum_{i<=j} ~b_i >= j` for the first `j + 1` literals.
fn amo_prefix(terms: &[(Coeff, Lit)], j: usize) -> PbConstraint {
    PbConstraint::from_terms(terms[..=j].iter().map(|&(_, b)| (1, !b)), j as Coeff).unwrap()
}

/// Derive `AMO: sum b_i <= 1` from the pairwise clauses, then
/// `UB: sum c_i b_i <= max c_i`. Returns both ids.
pub(crate) fn certify_amo(terms: &[(Coeff, Lit)], log: &mut ProofLogger) -> (ConstraintId, ConstraintId) {
    let n = terms.len();
    assert!(n >= 2);
    let pair = |log: &mut ProofLogger, i: usize, j: usize| {
        let mut c = [!terms[i].1, !terms[j].1];
        c.sort_unstable();
        log.rup_clause(&c)
    };
    let mut amo = pair(log, 0, 1);
    for j in 2..n {
        let pairs: Vec<ConstraintId> = (0..j).map(|i| pair(log, i, j)).collect();
        let mut p = log.pol().id(amo).mul(j as Coeff - 1);
        for id in pairs {
            p = p.add_scaled(id, 1);
        }
        amo = p.div(j as Coeff).finish_expect(&amo_prefix(terms, j));
    }
    let max = terms[0].0;
    let mut p = log.pol().id(amo).mul(max);
    for &(c, b) in &terms[1..] {
        if c < max {
            p = p.add_axiom(b, max - c);
        }
    }
    let expected = pb_core::normalize(&pb_core::RawConstraint::le(terms.to_vec(), max)).unwrap();
    let ub = p.finish_expect(&expected);
    (amo, ub)
}
