use pb_core::*;
use proptest::prelude::*;

fn truth_table(c: &PbConstraint, n: u32) -> Vec<bool> {
    (0u32..1 << n).map(|bits| c.eval(|v| bits >> (v - 1) & 1 == 1)).collect()
}

fn raw_eval(r: &RawConstraint, bits: u32) -> bool {
    let lhs: i128 = r
        .terms
        .iter()
        .map(|&(a, l)| if l.eval(bits >> (l.var() - 1) & 1 == 1) { a } else { 0 })
        .sum();
    match r.relation {
        Relation::Ge => lhs >= r.rhs,
        Relation::Le => lhs <= r.rhs,
    }
}

fn lit_strategy(n: u32) -> impl Strategy<Value = Lit> {
    (1..=n, any::<bool>()).prop_map(|(v, p)| Lit::new(v, p))
}

fn raw_strategy(n: u32) -> impl Strategy<Value = RawConstraint> {
    (
        prop::collection::vec((-9i128..=9, lit_strategy(n)), 0..7),
        any::<bool>(),
        -12i128..=12,
    )
        .prop_map(|(terms, ge, rhs)| RawConstraint {
            terms,
            relation: if ge { Relation::Ge } else { Relation::Le },
            rhs,
        })
}

fn constraint_strategy(n: u32) -> impl Strategy<Value = PbConstraint> {
    (prop::collection::vec((1i128..=9, lit_strategy(n)), 0..7), -3i128..=15)
        .prop_map(|(terms, d)| PbConstraint::from_terms(terms, d).unwrap())
}

#[test]
fn le_example_has_equal_truth_table() {
    let raw = RawConstraint::le(vec![(3, Lit::pos(1)), (5, Lit::pos(2))], 6);
    let c = normalize(&raw).unwrap();
    assert_eq!(c.to_string(), "+3 ~x1 +5 ~x2 >= 2 ;");
    for bits in 0..4 {
        assert_eq!(c.eval(|v| bits >> (v - 1) & 1 == 1), raw_eval(&raw, bits));
    }
}

#[test]
fn negation_example_complements_truth_table() {
    let c = text::parse_constraint_str("+3 ~x1 +5 ~x2 >= 2 ;").unwrap();
    let n = c.negate().unwrap();
    assert_eq!(n.to_string(), "+3 x1 +5 x2 >= 7 ;");
    let (a, b) = (truth_table(&c, 2), truth_table(&n, 2));
    assert!(a.iter().zip(&b).all(|(x, y)| x != y));
}

#[test]
fn saturation_example_keeps_truth_table() {
    let c = text::parse_constraint_str("+4 x1 +2 x2 >= 3 ;").unwrap();
    assert_eq!(truth_table(&c, 2), truth_table(&c.saturate(), 2));
}

#[test]
fn propagation_example_is_entailed() {
    let c = text::parse_constraint_str("+5 x1 +3 x2 +3 x3 >= 6 ;").unwrap();
    // every completion of ~x1 satisfying c sets x2 and x3
    for bits in 0u32..8 {
        let val = |v: Var| bits >> (v - 1) & 1 == 1;
        if !val(1) && c.eval(val) {
            assert!(val(2) && val(3));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn normalize_preserves_models(raw in raw_strategy(6)) {
        let c = normalize(&raw).unwrap();
        for bits in 0u32..64 {
            prop_assert_eq!(c.eval(|v| bits >> (v - 1) & 1 == 1), raw_eval(&raw, bits));
        }
        let mut vars: Vec<Var> = c.lits().map(|l| l.var()).collect();
        let len = vars.len();
        vars.dedup();
        prop_assert_eq!(vars.len(), len);
        prop_assert!(c.terms().iter().all(|&(a, _)| a > 0));
        prop_assert!(c.terms().windows(2).all(|w| w[0].1.var() < w[1].1.var()));
    }

    #[test]
    fn normalize_is_idempotent(raw in raw_strategy(6)) {
        let c = normalize(&raw).unwrap();
        let again = PbConstraint::from_terms(c.terms().iter().copied(), c.degree()).unwrap();
        prop_assert_eq!(again, c);
    }

    #[test]
    fn negation_complements_and_is_involutive(c in constraint_strategy(10)) {
        let n = c.negate().unwrap();
        let nn = n.negate().unwrap();
        let (t, tn, tnn) = (truth_table(&c, 10), truth_table(&n, 10), truth_table(&nn, 10));
        prop_assert!(t.iter().zip(&tn).all(|(a, b)| a != b));
        prop_assert_eq!(t, tnn);
    }

    #[test]
    fn cutting_planes_rules_are_sound(
        a in constraint_strategy(8),
        b in constraint_strategy(8),
        k in 1i128..6,
        l in lit_strategy(8),
    ) {
        let sum = a.add(&b).unwrap();
        let mult = a.multiply(k).unwrap();
        let div = a.divide(k).unwrap();
        let sat = a.saturate();
        let ax = PbConstraint::literal_axiom(l);
        for bits in 0u32..256 {
            let val = |v: Var| bits >> (v - 1) & 1 == 1;
            prop_assert!(ax.eval(val));
            if a.eval(val) {
                prop_assert!(mult.eval(val));
                prop_assert!(div.eval(val));
                prop_assert!(sat.eval(val));
                if b.eval(val) {
                    prop_assert!(sum.eval(val));
                }
            }
        }
    }

    #[test]
    fn propagation_is_sound_and_maximal(
        db in prop::collection::vec(constraint_strategy(10), 1..8),
        alpha in prop::collection::vec(lit_strategy(10), 0..4),
    ) {
        let mut alpha_set: Vec<Lit> = Vec::new();
        for l in alpha {
            if !alpha_set.iter().any(|m| m.var() == l.var()) {
                alpha_set.push(l);
            }
        }
        let holds = |bits: u32, l: Lit| l.eval(bits >> (l.var() - 1) & 1 == 1);
        let models: Vec<u32> = (0u32..1 << 10)
            .filter(|&bits| alpha_set.iter().all(|&l| holds(bits, l)))
            .filter(|&bits| db.iter().all(|c| c.eval(|v| bits >> (v - 1) & 1 == 1)))
            .collect();
        match propagate(&db, &alpha_set) {
            Propagation::Conflict(_) => prop_assert!(models.is_empty()),
            Propagation::Fixpoint(trail) => {
                let lits: Vec<Lit> = trail.iter().map(|&(l, _)| l).collect();
                for &l in &lits {
                    prop_assert!(models.iter().all(|&m| holds(m, l)));
                }
                // no constraint is unit or violated at the fixpoint
                for c in &db {
                    let slack: i128 = c
                        .terms()
                        .iter()
                        .filter(|&&(_, l)| !lits.contains(&!l))
                        .map(|&(a, _)| a)
                        .sum::<i128>()
                        - c.degree();
                    prop_assert!(slack >= 0);
                    for &(a, l) in c.terms() {
                        if !lits.contains(&l) && !lits.contains(&!l) {
                            prop_assert!(a <= slack);
                        }
                    }
                }
            }
        }
    }
}
