//! Regenerate the desk corpus and its brute-force optima:
//! `cargo run --example make_corpus -p cli_bench -- corpus`

use std::fmt::Write as _;
use std::path::PathBuf;

use cli_bench::gen::{brute_force_optimum, cover_instance, grouped_instance, pigeonhole, random_instance, GenParams};
use instance_io::{parse_wcnf, write_wcnf, MaxSatInstance};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TINY: &str = "c two soft clauses, one of them empty\nh 1 2 0\nh -1 -2 0\n4 1 0\n3 0\n2 -2 3 0\n";
const NO_SOFT: &str = "c hard clauses only\nh 1 2 3 0\nh -1 -2 0\nh -2 -3 0\nh 2 -4 0\n";
const CLASH: &str = "c contradictory units below a satisfiable core\nh 1 2 0\nh 3 0\nh -1 4 0\nh -3 0\n5 -1 0\n7 2 4 0\n";

fn main() -> anyhow::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "corpus".into()));
    std::fs::create_dir_all(&dir)?;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut set: Vec<(String, MaxSatInstance)> = Vec::new();
    let p = GenParams { max_vars: 20, max_clauses: 70, max_weight: 50 };
    while set.len() < 11 {
        let inst = random_instance(&mut rng, &p);
        // satisfiable, not tiny, and with something to optimize
        if inst.num_vars >= 12 && brute_force_optimum(&inst).is_some_and(|v| v > 0) {
            set.push((format!("random_{:02}.wcnf", set.len()), inst));
        }
    }
    set.push(("grouped_5x4.wcnf".into(), grouped_instance(&mut rng, 5, 4, 40)));
    set.push(("grouped_6x3.wcnf".into(), grouped_instance(&mut rng, 6, 3, 40)));
    set.push(("grouped_4x5.wcnf".into(), grouped_instance(&mut rng, 4, 5, 40)));
    set.push(("cover_20x30.wcnf".into(), cover_instance(&mut rng, 20, 30, 30)));
    set.push(("cover_18x25.wcnf".into(), cover_instance(&mut rng, 18, 25, 30)));
    set.push(("php_5_4.wcnf".into(), pigeonhole(5, 4)));
    set.push(("tiny.wcnf".into(), parse_wcnf(TINY)?));
    set.push(("no_soft.wcnf".into(), parse_wcnf(NO_SOFT)?));
    // hand-written files keep their comments
    let raw = [("tiny.wcnf", TINY), ("no_soft.wcnf", NO_SOFT), ("clash.wcnf", CLASH)];
    set.push(("clash.wcnf".into(), parse_wcnf(CLASH)?));
    let mut optima = String::from("# brute-force optima of the desk corpus\n");
    for (name, inst) in &set {
        let text = match raw.iter().find(|(n, _)| n == name) {
            Some((_, t)) => t.to_string(),
            None => write_wcnf(inst),
        };
        std::fs::write(dir.join(name), text)?;
        match brute_force_optimum(inst) {
            Some(v) => writeln!(optima, "{name} {v}")?,
            None => writeln!(optima, "{name} UNSAT")?,
        }
    }
    std::fs::write(dir.join("optima.txt"), optima)?;
    println!("wrote {} instances to {}", set.len(), dir.display());
    Ok(())
}
