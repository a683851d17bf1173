//! Library side of the `maxcert` command line: dual solver runs with and
//! without proof logging, report rows, instance generators with a
//! brute-force optimum, and a mutation harness for the proof checker.

pub mod audit;
pub mod bench;
pub mod gen;
pub mod mutate;

pub use bench::{bench_dir, run_instance, solve_once, summary, table, BenchOptions, Expected, RunReport};
