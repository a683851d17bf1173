use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{Context, Result};
use cdcl::{solve, Outcome, SolverConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};
use cli_bench::bench::logger_options;
use cli_bench::{bench_dir, summary, table, BenchOptions};
use instance_io::{cost_line, model_line, parse_wcnf, status_line, to_pbo, PboInstance, SolveStatus};
use proof_checker::{check_proof, Verdict};
use proof_log::ProofLogger;

#[derive(Parser)]
#[command(name = "maxcert", version, about = "Certified branch and bound MaxSAT solving and proof checking")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve a WCNF instance, optionally writing a proof.
    Solve {
        wcnf: PathBuf,
        /// Write the proof to this file.
        #[arg(long)]
        proof: Option<PathBuf>,
        /// Directory for `<instance>.pbp` when --proof is not given.
        #[arg(long, env = "MAXCERT_PROOF_DIR")]
        proof_dir: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Check a proof against a WCNF instance.
    Check {
        wcnf: PathBuf,
        proof: PathBuf,
        /// Print the per-rule census and timing.
        #[arg(long)]
        verbose: bool,
    },
    /// Solve every instance of a directory with logging off and on, and
    /// check each proof.
    Bench {
        dir: PathBuf,
        /// `name value` oracle file (defaults to optima.txt in the directory).
        #[arg(long)]
        oracle: Option<PathBuf>,
        /// Semantic and cosmetic proof mutations per instance.
        #[arg(long, default_value_t = 0)]
        fuzz_proofs: usize,
        /// Keep the proofs in this directory.
        #[arg(long, env = "MAXCERT_PROOF_DIR")]
        proof_dir: Option<PathBuf>,
        /// Print only the key=value records.
        #[arg(long)]
        records: bool,
        #[command(flatten)]
        solver: SolverArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Wall-clock limit in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long)]
    conflict_limit: Option<u64>,
    /// Largest objective that gets the decision-diagram encoding; 0 disables it.
    #[arg(long, default_value_t = 200)]
    mdd_threshold: usize,
    /// Look-ahead every n-th search node; 0 only at complete assignments.
    #[arg(long, default_value_t = 1)]
    lookahead_period: u64,
    #[arg(long, value_enum, default_value_t = Switch::On)]
    amo_detect: Switch,
    #[arg(long, value_enum, default_value_t = Switch::On)]
    restarts: Switch,
    /// Delete learned clauses by LBD.
    #[arg(long)]
    reduce_db: bool,
}

impl SolverArgs {
    fn config(&self) -> Result<SolverConfig> {
        let time_limit = match self.time_limit {
            Some(t) => Some(Duration::try_from_secs_f64(t).context("bad --time-limit")?),
            None => None,
        };
        Ok(SolverConfig {
            seed: self.seed,
            conflict_limit: self.conflict_limit,
            time_limit,
            restarts: matches!(self.restarts, Switch::On),
            reduce_db: self.reduce_db,
            lookahead_period: self.lookahead_period,
            mdd_threshold: self.mdd_threshold,
            amo_detect: matches!(self.amo_detect, Switch::On),
        })
    }
}

fn load(path: &Path) -> Result<PboInstance> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let inst = parse_wcnf(&text).with_context(|| format!("parsing {}", path.display()))?;
    to_pbo(&inst).with_context(|| format!("converting {}", path.display()))
}

fn cmd_solve(wcnf: &Path, proof: Option<PathBuf>, proof_dir: Option<PathBuf>, args: &SolverArgs) -> Result<u8> {
    let inst = load(wcnf)?;
    let cfg = args.config()?;
    let proof = proof.or_else(|| {
        proof_dir.map(|d| d.join(Path::new(wcnf.file_name().unwrap_or_default()).with_extension("pbp")))
    });
    let mut log = match &proof {
        Some(p) => {
            let f = File::create(p).with_context(|| format!("creating {}", p.display()))?;
            ProofLogger::to_writer(Box::new(BufWriter::new(f)), inst.objective.clone(), logger_options())
        }
        None => ProofLogger::disabled(inst.objective.clone()),
    };
    log.load_formula(&inst.formula);
    let start = Instant::now();
    let (outcome, stats) = solve(&inst, &mut log, &cfg);
    if let Some(p) = &proof {
        log.flush().with_context(|| format!("writing {}", p.display()))?;
    }
    println!(
        "c time {:.3}s decisions {} conflicts {} solutions {} soft_conflicts {} hardenings {} mdd_nodes {}",
        start.elapsed().as_secs_f64(),
        stats.decisions,
        stats.conflicts,
        stats.solutions,
        stats.lookahead.soft_conflicts,
        stats.lookahead.hardenings,
        stats.mdd_nodes
    );
    let n = inst.num_instance_vars as usize;
    let (status, best, code) = match &outcome {
        Outcome::Optimum { value, model } => (SolveStatus::Optimum, Some((*value, model)), 0),
        Outcome::Unsat => (SolveStatus::Unsatisfiable, None, 20),
        Outcome::Indeterminate { best } => (SolveStatus::Unknown, best.as_ref().map(|(v, m)| (*v, m)), 30),
    };
    if let Some((value, _)) = best {
        println!("{}", cost_line(value));
    }
    println!("{}", status_line(&status));
    if let Some((_, model)) = best {
        println!("{}", model_line(&model[1..=n]));
    }
    Ok(code)
}

fn cmd_check(wcnf: &Path, proof: &Path, verbose: bool) -> Result<u8> {
    let inst = load(wcnf)?;
    let text = std::fs::read_to_string(proof).with_context(|| format!("reading {}", proof.display()))?;
    let start = Instant::now();
    let res = check_proof(&inst, &text);
    let secs = start.elapsed().as_secs_f64();
    let code = match &res {
        Ok(r) => match r.verdict {
            Verdict::Optimal(v) => {
                println!("ACCEPT optimum {v}");
                0
            }
            Verdict::Unsat => {
                println!("ACCEPT unsatisfiable");
                0
            }
            Verdict::Incomplete => {
                println!("INCOMPLETE every step is valid but there is no conclusion");
                1
            }
        },
        Err(rej) => {
            println!("REJECT line {}: {}", rej.line, rej.reason);
            1
        }
    };
    if verbose {
        if let Ok(r) = &res {
            let c = &r.census;
            println!(
                "c pol={} rup={} red={} subproofs={} soli={} del={} bytes={}",
                c.pol,
                c.rup,
                c.red,
                c.subproofs,
                c.soli,
                c.del,
                text.len()
            );
        }
        println!("c check_time={secs:.6}s");
    }
    Ok(code)
}

fn cmd_bench(dir: &Path, opts: &BenchOptions, records_only: bool) -> Result<u8> {
    let res = bench_dir(dir, opts)?;
    if !records_only {
        print!("{}", table(&res.reports));
    }
    for r in &res.reports {
        println!("{}", r.record(true));
    }
    println!("{}", summary(&res.reports));
    let mut ok = res.reports.iter().all(|r| r.ok());
    if let Some(f) = &res.fuzz {
        println!("fuzz {}", f.record());
        for e in &f.escapes {
            println!("fuzz_escape kind={} line={} old={} new={} reason={}", e.kind, e.line, e.old, e.new, e.reason);
        }
        ok &= f.unsound == 0;
    }
    Ok(if ok { 0 } else { 1 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Solve { wcnf, proof, proof_dir, solver } => cmd_solve(&wcnf, proof, proof_dir, &solver),
        Cmd::Check { wcnf, proof, verbose } => cmd_check(&wcnf, &proof, verbose),
        Cmd::Bench { dir, oracle, fuzz_proofs, proof_dir, records, solver } => solver.config().and_then(|cfg| {
            if let Some(d) = &proof_dir {
                std::fs::create_dir_all(d).with_context(|| format!("creating {}", d.display()))?;
            }
            let opts = BenchOptions { cfg, oracle, fuzz: fuzz_proofs, proof_dir };
            cmd_bench(&dir, &opts, records)
        }),
    };
    match res {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
