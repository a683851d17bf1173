use cli_bench::bench::quantile;
use cli_bench::gen::{brute_force_optimum, random_instance, GenParams};
use cli_bench::mutate::{cosmetic, CosmeticKind};
use cli_bench::solve_once;
use cdcl::{Outcome, SolverConfig};
use instance_io::to_pbo;
use proof_checker::check_proof;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const KINDS: [CosmeticKind; 6] = [
    CosmeticKind::DoubleSpace,
    CosmeticKind::Tab,
    CosmeticKind::Leading,
    CosmeticKind::Trailing,
    CosmeticKind::Comment,
    CosmeticKind::BlankLine,
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn solver_matches_brute_force_and_proof_is_accepted(seed in any::<u64>(), period in 0u64..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng, &GenParams { max_vars: 10, max_clauses: 30, max_weight: 20 });
        let pbo = to_pbo(&inst).unwrap();
        let cfg = SolverConfig { seed, lookahead_period: period, ..SolverConfig::default() };
        let run = solve_once(&pbo, &cfg, true);
        let got = match run.outcome {
            Outcome::Optimum { value, .. } => Some(value),
            Outcome::Unsat => None,
            Outcome::Indeterminate { .. } => panic!("no limit was set"),
        };
        prop_assert_eq!(got, brute_force_optimum(&inst));
        prop_assert!(check_proof(&pbo, run.proof.as_deref().unwrap()).is_ok());
    }

    #[test]
    fn cosmetic_edits_keep_the_verdict(seed in any::<u64>(), k in 0usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng, &GenParams { max_vars: 8, max_clauses: 20, max_weight: 10 });
        let pbo = to_pbo(&inst).unwrap();
        let proof = solve_once(&pbo, &SolverConfig::default(), true).proof.unwrap();
        let base = check_proof(&pbo, &proof).unwrap().verdict;
        let edited = cosmetic(&proof, KINDS[k], &mut rng);
        prop_assert_eq!(check_proof(&pbo, &edited).unwrap().verdict, base);
    }

    #[test]
    fn quantile_is_an_element_between_the_extremes(mut xs in prop::collection::vec(0.0f64..100.0, 1..40), q in 0.0f64..=1.0) {
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let v = quantile(&xs, q).unwrap();
        prop_assert!(xs.contains(&v));
        prop_assert!(xs[0] <= v && v <= xs[xs.len() - 1]);
        let below = xs.iter().filter(|&&x| x < v).count();
        prop_assert!(below as f64 <= q * xs.len() as f64);
    }
}
