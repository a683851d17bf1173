//! Clause-learning branch and bound for weighted MaxSAT in its
//! pseudo-Boolean form. Decisions, watched-literal propagation, 1UIP
//! learning and backjumping find solutions; look-ahead over weighted local
//! cores and an optional decision-diagram encoding of the
//! solution-improving constraint prune the search. Every clause the solver
//! adds is justified in the proof log.

mod heap;
mod search;
mod solver;

use std::time::Duration;

use lookahead::LookaheadStats;
use pb_core::Coeff;

pub use search::solve;
pub use solver::{Added, ClauseRef, Solver};

#[derive(Clone, Debug)]
pub struct SolverConfig {
    /// Seeds the initial activity perturbation.
    pub seed: u64,
    pub conflict_limit: Option<u64>,
    pub time_limit: Option<Duration>,
    /// Luby restarts once 1000 conflicts have been reached.
    pub restarts: bool,
    /// LBD-based deletion of learned clauses.
    pub reduce_db: bool,
    /// Run look-ahead at every `n`-th search node; 0 runs it only at
    /// complete assignments.
    pub lookahead_period: u64,
    /// Largest objective for which the decision-diagram encoding is added;
    /// 0 disables it.
    pub mdd_threshold: usize,
    pub amo_detect: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            seed: 0,
            conflict_limit: None,
            time_limit: None,
            restarts: true,
            reduce_db: false,
            lookahead_period: 1,
            mdd_threshold: 200,
            amo_detect: true,
        }
    }
}

/// Result of a solver run. Models are indexed by variable, index 0 unused,
/// and cover the instance and relaxation variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Optimum { value: Coeff, model: Vec<bool> },
    Unsat,
    /// A limit was hit; the best solution so far, if any.
    Indeterminate { best: Option<(Coeff, Vec<bool>)> },
}

#[derive(Clone, Debug, Default)]
pub struct SolveStats {
    pub decisions: u64,
    pub conflicts: u64,
    pub propagations: u64,
    pub restarts: u64,
    pub learned: u64,
    pub deleted: u64,
    pub solutions: u64,
    pub lookahead: LookaheadStats,
    pub amo_groups: usize,
    pub mdd_encodings: u64,
    pub mdd_nodes: usize,
    pub mdd_clauses: u64,
}

/// Luby sequence 1, 1, 2, 1, 1, 2, 4, ... at position `i` (from 0).
pub fn luby(mut i: u64) -> u64 {
    let mut size = 1;
    let mut seq = 0;
    while size < i + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != i {
        size = (size - 1) >> 1;
        seq -= 1;
        i %= size;
    }
    1 << seq
}
