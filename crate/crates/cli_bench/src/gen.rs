//! Seeded random instances and a brute-force optimum.

use instance_io::MaxSatInstance;
use pb_core::{Coeff, Lit, Var};
use rand::seq::SliceRandom;
use rand::Rng;

#[derive(Clone, Debug)]
pub struct GenParams {
    pub max_vars: u32,
    /// Hard plus soft clauses.
    pub max_clauses: usize,
    pub max_weight: Coeff,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams { max_vars: 18, max_clauses: 60, max_weight: 50 }
    }
}

fn clause<R: Rng>(rng: &mut R, n: u32, width: usize) -> Vec<Lit> {
    let mut vars: Vec<Var> = (1..=n).collect();
    vars.shuffle(rng);
    vars.truncate(width.min(n as usize));
    vars.sort_unstable();
    vars.into_iter().map(|v| Lit::new(v, rng.gen())).collect()
}

/// Random hard clauses of width 2 or 3 (rarely 1) and a mix of unit and
/// non-unit weighted soft clauses.
pub fn random_instance<R: Rng>(rng: &mut R, p: &GenParams) -> MaxSatInstance {
    let n = rng.gen_range(4.min(p.max_vars)..=p.max_vars);
    let max_hard = (2 * n as usize).min(p.max_clauses * 3 / 4);
    let n_hard = rng.gen_range((n as usize / 2).min(max_hard)..=max_hard);
    let n_soft = rng.gen_range(1..=(p.max_clauses - n_hard).min(2 * n as usize).max(1));
    let mut hard = Vec::with_capacity(n_hard);
    for _ in 0..n_hard {
        let width = match rng.gen_range(0..40) {
            0 => 1,
            1..=15 => 2,
            _ => 3,
        };
        hard.push(clause(rng, n, width));
    }
    let mut soft = Vec::with_capacity(n_soft);
    for _ in 0..n_soft {
        let width = if rng.gen_bool(0.5) { 1 } else { rng.gen_range(2..=3) };
        soft.push((rng.gen_range(1..=p.max_weight), clause(rng, n, width)));
    }
    MaxSatInstance { num_vars: n, hard, soft }
}

/// Exactly one variable per group; choosing a variable costs its weight,
/// and a few soft clauses couple the groups.
pub fn grouped_instance<R: Rng>(rng: &mut R, groups: usize, size: usize, max_weight: Coeff) -> MaxSatInstance {
    let n = (groups * size) as Var;
    let mut hard = Vec::new();
    let mut soft = Vec::new();
    for g in 0..groups {
        let vars: Vec<Var> = (1..=size as Var).map(|i| g as Var * size as Var + i).collect();
        hard.push(vars.iter().map(|&v| Lit::pos(v)).collect());
        for (i, &a) in vars.iter().enumerate() {
            for &b in &vars[i + 1..] {
                hard.push(vec![Lit::neg(a), Lit::neg(b)]);
            }
            soft.push((rng.gen_range(1..=max_weight), vec![Lit::neg(a)]));
        }
    }
    for _ in 0..groups {
        let a = rng.gen_range(1..=n);
        let b = rng.gen_range(1..=n);
        if a != b {
            hard.push(vec![Lit::neg(a.min(b)), Lit::neg(a.max(b))]);
        }
        soft.push((rng.gen_range(1..=max_weight), clause(rng, n, 2)));
    }
    MaxSatInstance { num_vars: n, hard, soft }
}

/// Weighted set cover: every element needs one of the sets containing it.
pub fn cover_instance<R: Rng>(rng: &mut R, sets: u32, elements: usize, max_weight: Coeff) -> MaxSatInstance {
    let mut hard = Vec::with_capacity(elements);
    for _ in 0..elements {
        let k = rng.gen_range(2..=4.min(sets as usize));
        let mut c: Vec<Lit> = clause(rng, sets, k).into_iter().map(|l| Lit::pos(l.var())).collect();
        c.sort_unstable();
        hard.push(c);
    }
    let soft = (1..=sets).map(|v| (rng.gen_range(1..=max_weight), vec![Lit::neg(v)])).collect();
    MaxSatInstance { num_vars: sets, hard, soft }
}

/// `p` pigeons in `h` holes as hard clauses, with unit softs preferring
/// empty holes. Unsatisfiable when `p > h`.
pub fn pigeonhole(p: u32, h: u32) -> MaxSatInstance {
    let var = |i: u32, j: u32| i * h + j + 1;
    let mut hard = Vec::new();
    for i in 0..p {
        hard.push((0..h).map(|j| Lit::pos(var(i, j))).collect());
    }
    for j in 0..h {
        for a in 0..p {
            for b in a + 1..p {
                hard.push(vec![Lit::neg(var(a, j)), Lit::neg(var(b, j))]);
            }
        }
    }
    let soft = (0..p * h).map(|v| ((v % 3 + 1) as Coeff, vec![Lit::neg(v + 1)])).collect();
    MaxSatInstance { num_vars: p * h, hard, soft }
}

/// Bit masks of the positive and negative literals of a clause.
fn masks(c: &[Lit]) -> (u64, u64) {
    let mut pos = 0u64;
    let mut neg = 0u64;
    for l in c {
        let bit = 1u64 << (l.var() - 1);
        if l.is_positive() {
            pos |= bit;
        } else {
            neg |= bit;
        }
    }
    (pos, neg)
}

/// Minimum cost over all assignments, `None` if the hard clauses are
/// unsatisfiable.
pub fn brute_force_optimum(inst: &MaxSatInstance) -> Option<Coeff> {
    assert!(inst.num_vars <= 30, "too many variables to enumerate");
    let hard: Vec<(u64, u64)> = inst.hard.iter().map(|c| masks(c)).collect();
    let soft: Vec<(Coeff, u64, u64)> = inst
        .soft
        .iter()
        .map(|(w, c)| {
            let (p, n) = masks(c);
            (*w, p, n)
        })
        .collect();
    let sat = |bits: u64, p: u64, n: u64| bits & p != 0 || !bits & n != 0;
    let mut best: Option<Coeff> = None;
    for bits in 0u64..1 << inst.num_vars {
        if !hard.iter().all(|&(p, n)| sat(bits, p, n)) {
            continue;
        }
        let cost: Coeff = soft.iter().filter(|&&(_, p, n)| !sat(bits, p, n)).map(|&(w, _, _)| w).sum();
        if best.is_none_or(|b| cost < b) {
            best = Some(cost);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_instances_respect_the_limits() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = GenParams::default();
        for _ in 0..500 {
            let inst = random_instance(&mut rng, &p);
            assert!(inst.num_vars <= p.max_vars);
            assert!(inst.hard.len() + inst.soft.len() <= p.max_clauses);
            assert!(!inst.soft.is_empty());
            assert!(inst.soft.iter().all(|(w, c)| (1..=p.max_weight).contains(w) && !c.is_empty()));
            assert!(inst.hard.iter().chain(inst.soft.iter().map(|(_, c)| c)).flatten().all(|l| l.var() <= inst.num_vars));
        }
    }

    #[test]
    fn optimum_agrees_with_the_cost_function() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = GenParams { max_vars: 8, ..GenParams::default() };
        for _ in 0..100 {
            let inst = random_instance(&mut rng, &p);
            let slow = (0u64..1 << inst.num_vars).filter_map(|b| inst.cost(|v| b >> (v - 1) & 1 == 1)).min();
            assert_eq!(brute_force_optimum(&inst), slow);
        }
    }

    #[test]
    fn structured_optima() {
        assert_eq!(brute_force_optimum(&pigeonhole(4, 3)), None);
        assert!(brute_force_optimum(&pigeonhole(3, 3)).is_some());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = grouped_instance(&mut rng, 3, 3, 10);
        assert!(brute_force_optimum(&g).is_some());
        let c = cover_instance(&mut rng, 10, 12, 10);
        assert!(brute_force_optimum(&c).is_some());
    }
}
