use pb_core::{Coeff, Lit, Objective, PbConstraint, Var};
use proof_log::*;
use proptest::prelude::*;

fn x(v: Var) -> Lit {
    Lit::pos(v)
}

fn logger(o: &Objective) -> ProofLogger {
    ProofLogger::in_memory(o.clone(), LoggerOptions { verify_rup: true, log_deletions: false })
}

#[test]
fn section_three_soft_conflict_divides_by_five() {
    let (y1, y2) = (x(5), x(6));
    let o = Objective::new([(3, x(1)), (5, x(2)), (5, x(3)), (6, x(4))], 0).unwrap();
    let sic = o.improving_constraint(7).unwrap();
    assert_eq!(sic.to_string(), "+3 ~x1 +5 ~x2 +5 ~x3 +6 ~x4 >= 13 ;");
    let mut p = logger(&o);
    p.load_formula(&[
        PbConstraint::clause(&[!y1, x(1), x(2)]),
        PbConstraint::clause(&[!y2, x(3), x(4)]),
        sic,
    ]);
    let cores = [CoreTerm { weight: 3, clause: Some(1) }, CoreTerm { weight: 5, clause: Some(2) }];
    let residuals = [(x(2), 2), (x(4), 1)];
    let id = p.derive_soft_conflict(&cores, &residuals, 7, 3, &[!y1, !y2]);
    assert_eq!(p.constraint(id).unwrap().to_string(), "+1 ~x5 +1 ~x6 >= 1 ;");
    let last = p.text().unwrap().lines().last().unwrap().to_string();
    assert_eq!(last, "pol 3 x2 2 * + x4 + 1 3 * + 2 5 * + 5 d");
    let rec = p.thm1_records()[0];
    assert!(rec.within_bound());
}

#[test]
fn appendix_trace_soft_conflict_divides_by_eight() {
    let (y1, y2, y3) = (x(6), x(7), x(8));
    let o = Objective::new([(5, x(1)), (9, x(2)), (6, x(3)), (2, x(4)), (6, x(5))], 0).unwrap();
    let mut p = logger(&o);
    p.load_formula(&[
        PbConstraint::clause(&[y1, !y3, x(2), x(3)]),
        PbConstraint::clause(&[y1, !y2, x(4), x(5)]),
        o.improving_constraint(12).unwrap(),
    ]);
    let cores = [
        CoreTerm { weight: 5, clause: None },
        CoreTerm { weight: 6, clause: Some(1) },
        CoreTerm { weight: 2, clause: Some(2) },
    ];
    let residuals = [(x(2), 3), (x(5), 4)];
    // check the pre-division constraint by replaying without the division
    let pre = p
        .pol()
        .id(3)
        .add_axiom(x(2), 3)
        .add_axiom(x(5), 4)
        .add_scaled(1, 6)
        .add_scaled(2, 2)
        .finish();
    assert_eq!(p.constraint(pre).unwrap().to_string(), "+5 ~x1 +8 x6 +2 ~x7 +6 ~x8 >= 2 ;");
    let id = p.derive_soft_conflict(&cores, &residuals, 12, 3, &[!x(1), y1, !y3, !y2]);
    assert_eq!(p.constraint(id).unwrap(), &PbConstraint::clause(&[!x(1), y1, !y2, !y3]));
    assert!(p.text().unwrap().ends_with(" 8 d\n"));
}

#[test]
fn single_trivial_core_gives_unit() {
    let o = Objective::new([(4, x(1)), (2, x(2))], 0).unwrap();
    let mut p = logger(&o);
    p.load_formula(&[o.improving_constraint(4).unwrap()]);
    let id = p.derive_soft_conflict(&[CoreTerm { weight: 4, clause: None }], &[(x(2), 2)], 4, 1, &[!x(1)]);
    assert_eq!(p.constraint(id).unwrap(), &PbConstraint::clause(&[!x(1)]));
}

#[test]
fn hardening_example() {
    let y = x(3);
    let o = Objective::new([(3, x(1)), (5, x(2))], 0).unwrap();
    let mut p = logger(&o);
    p.load_formula(&[PbConstraint::clause(&[!y, x(1)]), o.improving_constraint(5).unwrap()]);
    let id = p.derive_hardening(&[CoreTerm { weight: 3, clause: Some(1) }], &[(x(2), 5)], x(2), 5, 2, &[
        !y,
        !x(2),
    ]);
    assert_eq!(p.constraint(id).unwrap(), &PbConstraint::clause(&[!x(2), !y]));
    assert!(p.thm1_records()[0].within_bound());
}

#[test]
fn hardening_without_cores_gives_unit() {
    let o = Objective::new([(6, x(1)), (2, x(2))], 0).unwrap();
    let mut p = logger(&o);
    p.load_formula(&[o.improving_constraint(5).unwrap()]);
    let id = p.derive_hardening(&[], &[(x(1), 6), (x(2), 2)], x(1), 5, 1, &[!x(1)]);
    assert_eq!(p.constraint(id).unwrap(), &PbConstraint::clause(&[!x(1)]));
}

#[test]
fn empty_reason_set_gives_contradiction() {
    let o = Objective::new([(3, x(1)), (3, x(2))], 0).unwrap();
    let mut p = logger(&o);
    p.load_formula(&[PbConstraint::clause(&[x(1), x(2)]), o.improving_constraint(3).unwrap()]);
    let id = p.derive_soft_conflict(&[CoreTerm { weight: 3, clause: Some(1) }], &[], 3, 2, &[]);
    assert!(p.constraint(id).unwrap().is_contradiction());
}

#[derive(Debug, Clone)]
struct Scenario {
    costs: Vec<Coeff>,
    // (weight, reason literals over y vars, objective positions in K)
    cores: Vec<(Coeff, Vec<Lit>, Vec<usize>)>,
    trivial: Vec<usize>,
}

const NY: u32 = 4;

fn scenario() -> impl Strategy<Value = Scenario> {
    (
        prop::collection::vec(1i128..=9, 1..=5),
        prop::collection::vec(
            (
                prop::collection::vec((1..=NY, any::<bool>()), 0..3),
                prop::collection::vec(0usize..5, 1..4),
                1i128..=9,
            ),
            0..4,
        ),
        prop::collection::vec(0usize..5, 0..2),
    )
        .prop_map(|(costs, raw, triv)| {
            let n = costs.len();
            let mut residual = costs.clone();
            let mut trivial = Vec::new();
            for t in triv {
                let i = t % n;
                if !trivial.contains(&i) {
                    trivial.push(i);
                    residual[i] = 0;
                }
            }
            let mut cores = Vec::new();
            for (r, k, w) in raw {
                let mut k: Vec<usize> = k.into_iter().map(|i| i % n).filter(|&i| residual[i] > 0).collect();
                k.sort_unstable();
                k.dedup();
                if k.is_empty() {
                    continue;
                }
                let w = k.iter().map(|&i| residual[i]).min().unwrap().min(w);
                for &i in &k {
                    residual[i] -= w;
                }
                let reasons = r.into_iter().map(|(v, p)| Lit::new(n as Var + v, p)).collect();
                cores.push((w, reasons, k));
            }
            Scenario { costs, cores, trivial }
        })
}

struct Built {
    o: Objective,
    formula: Vec<PbConstraint>,
    terms: Vec<CoreTerm>,
    residuals: Vec<(Lit, Coeff)>,
    clause_c: Vec<Lit>,
    weight: Coeff,
}

fn build(s: &Scenario) -> Built {
    let n = s.costs.len();
    let o = Objective::new(s.costs.iter().enumerate().map(|(i, &c)| (c, x(i as Var + 1))), 0).unwrap();
    let mut residual = s.costs.clone();
    let mut formula = Vec::new();
    let mut terms = Vec::new();
    let mut clause_c = Vec::new();
    let mut weight = 0;
    for &i in &s.trivial {
        residual[i] = 0;
        weight += s.costs[i];
        terms.push(CoreTerm { weight: s.costs[i], clause: None });
        clause_c.push(!x(i as Var + 1));
    }
    for (w, r, k) in &s.cores {
        let mut lits: Vec<Lit> = r.iter().map(|&l| !l).collect();
        lits.extend(k.iter().map(|&i| x(i as Var + 1)));
        lits.sort_unstable();
        lits.dedup();
        if lits.windows(2).any(|p| p[0] == !p[1]) {
            continue;
        }
        for &i in k {
            residual[i] -= w;
        }
        weight += w;
        formula.push(PbConstraint::clause(&lits));
        terms.push(CoreTerm { weight: *w, clause: Some(formula.len() as u64) });
        clause_c.extend(r.iter().map(|&l| !l));
    }
    clause_c.sort_unstable();
    clause_c.dedup();
    let residuals = (0..n).filter(|&i| residual[i] > 0).map(|i| (x(i as Var + 1), residual[i])).collect();
    Built { o, formula, terms, residuals, clause_c, weight }
}

fn entailed(formula: &[PbConstraint], c: &PbConstraint, nvars: u32) -> bool {
    (0u32..1 << nvars).all(|bits| {
        let val = |v: Var| bits >> (v - 1) & 1 == 1;
        !formula.iter().all(|f| f.eval(val)) || c.eval(val)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn random_soft_conflicts_are_sound(s in scenario(), frac in 0.0f64..1.0) {
        let b = build(&s);
        prop_assume!(b.weight >= 1);
        prop_assume!(!b.clause_c.windows(2).any(|p| p[0] == !p[1]));
        let bound = 1 + ((b.weight - 1) as f64 * frac) as Coeff;
        let mut formula = b.formula.clone();
        formula.push(b.o.improving_constraint(bound).unwrap());
        let mut p = logger(&b.o);
        p.load_formula(&formula);
        let id = p.derive_soft_conflict(&b.terms, &b.residuals, bound, formula.len() as u64, &b.clause_c);
        let got = p.constraint(id).unwrap().clone();
        let nvars = s.costs.len() as u32 + NY;
        prop_assert!(entailed(&formula, &got, nvars));
        prop_assert!(p.thm1_records()[0].within_bound());
    }

    #[test]
    fn random_hardenings_are_sound(s in scenario(), pick in 0usize..5, frac in 0.0f64..1.0) {
        let b = build(&s);
        prop_assume!(!b.residuals.is_empty());
        prop_assume!(!b.clause_c.windows(2).any(|p| p[0] == !p[1]));
        let (l, r) = b.residuals[pick % b.residuals.len()];
        prop_assume!(!b.clause_c.contains(&l));
        let bound = 1 + ((r + b.weight - 1) as f64 * frac) as Coeff;
        let mut formula = b.formula.clone();
        formula.push(b.o.improving_constraint(bound).unwrap());
        let mut expected = b.clause_c.clone();
        expected.push(!l);
        let mut p = logger(&b.o);
        p.load_formula(&formula);
        let id = p.derive_hardening(&b.terms, &b.residuals, l, bound, formula.len() as u64, &expected);
        let got = p.constraint(id).unwrap().clone();
        let nvars = s.costs.len() as u32 + NY;
        prop_assert!(entailed(&formula, &got, nvars));
        prop_assert!(p.thm1_records()[0].within_bound());
    }
}
