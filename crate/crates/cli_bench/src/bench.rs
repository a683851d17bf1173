//! Solving with and without proof logging, checking, and the report rows.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use cdcl::{solve, Outcome, SolveStats, SolverConfig};
use instance_io::{parse_wcnf, to_pbo, PboInstance};
use pb_core::Coeff;
use proof_checker::{check_proof, Verdict};
use proof_log::{Census, LoggerOptions, ProofLogger, Thm1Record};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::audit::Auditor;
use crate::mutate::{fuzz_proof, FuzzReport};

/// Known result of an instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Expected {
    Optimum(Coeff),
    Unsat,
}

impl Expected {
    pub fn of(o: Option<Coeff>) -> Expected {
        o.map_or(Expected::Unsat, Expected::Optimum)
    }
}

/// Parse `name value` lines, where value is an integer or `UNSAT`.
pub fn parse_oracle(text: &str) -> Result<BTreeMap<String, Expected>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let [name, value] = toks[..] else { bail!("oracle line {}: expected `name value`", i + 1) };
        let e = match value {
            "UNSAT" => Expected::Unsat,
            v => Expected::Optimum(v.parse().with_context(|| format!("oracle line {}: bad value `{v}`", i + 1))?),
        };
        out.insert(name.to_string(), e);
    }
    Ok(out)
}

pub fn logger_options() -> LoggerOptions {
    LoggerOptions { verify_rup: false, log_deletions: true }
}

/// One solver run.
pub struct Run {
    pub outcome: Outcome,
    pub stats: SolveStats,
    pub secs: f64,
    pub proof: Option<String>,
    pub census: Option<Census>,
    /// Soft-conflict and hardening derivations with their step counts.
    pub thm1: Vec<Thm1Record>,
}

impl Run {
    pub fn over_bound(&self) -> usize {
        self.thm1.iter().filter(|r| !r.within_bound()).count()
    }
}

/// Solve `inst`, logging an in-memory proof when `logging` is set.
pub fn solve_once(inst: &PboInstance, cfg: &SolverConfig, logging: bool) -> Run {
    let start = Instant::now();
    let mut log = if logging {
        ProofLogger::in_memory(inst.objective.clone(), logger_options())
    } else {
        ProofLogger::disabled(inst.objective.clone())
    };
    log.load_formula(&inst.formula);
    let (outcome, stats) = solve(inst, &mut log, cfg);
    let secs = start.elapsed().as_secs_f64();
    Run {
        outcome,
        stats,
        secs,
        proof: log.text().map(str::to_string),
        census: logging.then(|| log.census().clone()),
        thm1: log.thm1_records().to_vec(),
    }
}

pub fn outcome_name(o: &Outcome) -> &'static str {
    match o {
        Outcome::Optimum { .. } => "OPTIMUM",
        Outcome::Unsat => "UNSAT",
        Outcome::Indeterminate { .. } => "UNKNOWN",
    }
}

fn expected_of(o: &Outcome) -> Option<Expected> {
    match o {
        Outcome::Optimum { value, .. } => Some(Expected::Optimum(*value)),
        Outcome::Unsat => Some(Expected::Unsat),
        Outcome::Indeterminate { .. } => None,
    }
}

/// Per-instance benchmark row.
#[derive(Clone, Debug, Default)]
pub struct RunReport {
    pub name: String,
    /// OPTIMUM, UNSAT, UNKNOWN or ERROR.
    pub outcome: String,
    pub optimum: Option<Coeff>,
    pub plain_secs: f64,
    pub logged_secs: f64,
    pub proof_bytes: Option<usize>,
    pub census: Option<Census>,
    pub check_secs: Option<f64>,
    /// ACCEPT, INCOMPLETE or REJECT; present iff a proof was produced.
    pub verdict: Option<String>,
    /// Same optimum or UNSAT with logging on and off; `None` when either
    /// run hit a limit.
    pub consistent: Option<bool>,
    pub oracle_match: Option<bool>,
    pub over_bound: usize,
    pub error: Option<String>,
}

impl RunReport {
    fn error(name: &str, e: String) -> RunReport {
        RunReport { name: name.to_string(), outcome: "ERROR".into(), error: Some(e), ..RunReport::default() }
    }

    pub fn logging_overhead(&self) -> Option<f64> {
        (self.plain_secs > 0.0 && self.verdict.is_some()).then(|| self.logged_secs / self.plain_secs)
    }

    pub fn check_ratio(&self) -> Option<f64> {
        self.check_secs.filter(|_| self.logged_secs > 0.0).map(|c| c / self.logged_secs)
    }

    /// Passed every check that applies to it.
    pub fn ok(&self) -> bool {
        self.error.is_none()
            && self.verdict.as_deref() != Some("REJECT")
            && self.consistent != Some(false)
            && self.oracle_match != Some(false)
            && self.over_bound == 0
    }

    /// One `key=value` record; with `timings` false the record is
    /// deterministic under a fixed seed.
    pub fn record(&self, timings: bool) -> String {
        let opt = |v: Option<String>| v.unwrap_or_else(|| "-".into());
        let mut s = format!(
            "instance={} outcome={} optimum={}",
            self.name,
            self.outcome,
            opt(self.optimum.map(|v| v.to_string()))
        );
        if timings {
            let _ = write!(s, " solve_plain_s={:.6} solve_logged_s={:.6}", self.plain_secs, self.logged_secs);
        }
        let _ = write!(s, " proof_bytes={}", opt(self.proof_bytes.map(|v| v.to_string())));
        if let Some(c) = &self.census {
            let _ = write!(
                s,
                " pol={} rup={} red={} subproofs={} soli={} del={} steps={}",
                c.pol,
                c.rup,
                c.red,
                c.subproofs,
                c.soli,
                c.del,
                c.steps.total()
            );
        }
        if timings {
            let _ = write!(s, " check_s={}", opt(self.check_secs.map(|v| format!("{v:.6}"))));
        }
        let _ = write!(
            s,
            " verdict={} consistent={} oracle={} over_bound={}",
            opt(self.verdict.clone()),
            opt(self.consistent.map(|b| b.to_string())),
            opt(self.oracle_match.map(|b| b.to_string())),
            self.over_bound
        );
        if let Some(e) = &self.error {
            let _ = write!(s, " error={}", e.replace(char::is_whitespace, "_"));
        }
        s
    }
}

/// Dual run and check of one instance. Also returns the proof.
pub fn run_instance(
    name: &str,
    inst: &PboInstance,
    cfg: &SolverConfig,
    oracle: Option<Expected>,
) -> (RunReport, Option<String>) {
    let plain = solve_once(inst, cfg, false);
    let logged = solve_once(inst, cfg, true);
    let mut r = RunReport {
        name: name.to_string(),
        outcome: outcome_name(&logged.outcome).into(),
        optimum: match &logged.outcome {
            Outcome::Optimum { value, .. } => Some(*value),
            _ => None,
        },
        plain_secs: plain.secs,
        logged_secs: logged.secs,
        census: logged.census.clone(),
        over_bound: logged.over_bound(),
        ..RunReport::default()
    };
    r.consistent = match (expected_of(&plain.outcome), expected_of(&logged.outcome)) {
        (Some(a), Some(b)) => Some(a == b),
        _ => None,
    };
    r.oracle_match = oracle.zip(expected_of(&logged.outcome)).map(|(a, b)| a == b);
    if let Some(proof) = &logged.proof {
        r.proof_bytes = Some(proof.len());
        let start = Instant::now();
        let res = check_proof(inst, proof);
        r.check_secs = Some(start.elapsed().as_secs_f64());
        r.verdict = Some(
            match (res, &logged.outcome) {
                (Ok(rep), Outcome::Optimum { value, .. }) if rep.verdict == Verdict::Optimal(*value) => "ACCEPT",
                (Ok(rep), Outcome::Unsat) if rep.verdict == Verdict::Unsat => "ACCEPT",
                (Ok(rep), Outcome::Indeterminate { .. }) if rep.verdict == Verdict::Incomplete => "INCOMPLETE",
                (Ok(rep), _) => {
                    r.error = Some(format!("checker verdict {:?} differs from the solver", rep.verdict));
                    "REJECT"
                }
                (Err(rej), _) => {
                    r.error = Some(rej.to_string());
                    "REJECT"
                }
            }
            .to_string(),
        );
    }
    (r, logged.proof)
}

#[derive(Clone, Debug, Default)]
pub struct BenchOptions {
    pub cfg: SolverConfig,
    /// Oracle file; defaults to `optima.txt` in the directory if present.
    pub oracle: Option<PathBuf>,
    /// Semantic and cosmetic mutations per instance; 0 disables fuzzing.
    pub fuzz: usize,
    pub proof_dir: Option<PathBuf>,
}

pub struct BenchResult {
    pub reports: Vec<RunReport>,
    pub fuzz: Option<FuzzReport>,
}

/// The `.wcnf` files of `dir`, sorted by name.
pub fn instance_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "wcnf"))
        .collect();
    files.sort();
    Ok(files)
}

fn load(path: &Path) -> Result<PboInstance> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let inst = parse_wcnf(&text).with_context(|| format!("parsing {}", path.display()))?;
    to_pbo(&inst).with_context(|| format!("converting {}", path.display()))
}

/// Run every instance of `dir`. Failures of single instances are recorded
/// in their rows.
pub fn bench_dir(dir: &Path, opts: &BenchOptions) -> Result<BenchResult> {
    let files = instance_files(dir)?;
    let oracle_path = opts.oracle.clone().or_else(|| Some(dir.join("optima.txt")).filter(|p| p.exists()));
    let oracle = match oracle_path {
        Some(p) => parse_oracle(&std::fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?)?,
        None => BTreeMap::new(),
    };
    let mut reports = Vec::with_capacity(files.len());
    let mut fuzz = (opts.fuzz > 0).then(FuzzReport::default);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.cfg.seed);
    for path in files {
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        let inst = match load(&path) {
            Ok(i) => i,
            Err(e) => {
                reports.push(RunReport::error(&name, format!("{e:#}")));
                continue;
            }
        };
        let (mut report, proof) = run_instance(&name, &inst, &opts.cfg, oracle.get(&name).copied());
        if let (Some(dir), Some(p)) = (&opts.proof_dir, &proof) {
            let out = dir.join(Path::new(&name).with_extension("pbp"));
            if let Err(e) = std::fs::write(&out, p) {
                report.error.get_or_insert(format!("writing {}: {e}", out.display()));
            }
        }
        if let (Some(total), Some(p), Some("ACCEPT")) = (&mut fuzz, &proof, report.verdict.as_deref()) {
            let auditor = Auditor::new(&inst);
            total.merge(&fuzz_proof(&inst, p, auditor.as_ref(), opts.fuzz, opts.fuzz, &mut rng));
        }
        reports.push(report);
    }
    Ok(BenchResult { reports, fuzz })
}

/// Nearest-rank quantile of sorted values.
pub fn quantile(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    Some(sorted[rank - 1])
}

fn sorted(v: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = v.collect();
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

/// Aggregate `key=value` line: counts, then median and quartiles of the
/// logging overhead (logged / plain time) and the checking ratio (check /
/// logged time).
pub fn summary(reports: &[RunReport]) -> String {
    let count = |f: &dyn Fn(&RunReport) -> bool| reports.iter().filter(|r| f(r)).count();
    let mut s = format!(
        "summary instances={} optimum={} unsat={} unknown={} errors={} accepted={} rejected={} consistent={}/{} oracle_mismatch={} over_bound={}",
        reports.len(),
        count(&|r| r.outcome == "OPTIMUM"),
        count(&|r| r.outcome == "UNSAT"),
        count(&|r| r.outcome == "UNKNOWN"),
        count(&|r| r.outcome == "ERROR"),
        count(&|r| r.verdict.as_deref() == Some("ACCEPT")),
        count(&|r| r.verdict.as_deref() == Some("REJECT")),
        count(&|r| r.consistent == Some(true)),
        count(&|r| r.consistent.is_some()),
        count(&|r| r.oracle_match == Some(false)),
        reports.iter().map(|r| r.over_bound).sum::<usize>(),
    );
    for (key, v) in [
        ("overhead", sorted(reports.iter().filter_map(RunReport::logging_overhead))),
        ("check_ratio", sorted(reports.iter().filter_map(RunReport::check_ratio))),
    ] {
        let q = |p| quantile(&v, p).map_or("-".to_string(), |x| format!("{x:.3}"));
        let _ = write!(s, " {key}_q25={} {key}_median={} {key}_q75={}", q(0.25), q(0.5), q(0.75));
    }
    s
}

/// Human-readable table, one row per instance.
pub fn table(reports: &[RunReport]) -> String {
    let mut s = format!(
        "{:<24} {:>8} {:>9} {:>10} {:>10} {:>8} {:>10} {:>8} {:>10} {:>8} {:>10}\n",
        "instance", "outcome", "optimum", "plain_s", "logged_s", "overhd", "bytes", "lines", "check_s", "ratio", "verdict"
    );
    for r in reports {
        let f = |v: Option<f64>, p: usize| v.map_or("-".to_string(), |x| format!("{x:.p$}"));
        let _ = writeln!(
            s,
            "{:<24} {:>8} {:>9} {:>10.4} {:>10.4} {:>8} {:>10} {:>8} {:>10} {:>8} {:>10}",
            r.name,
            r.outcome,
            r.optimum.map_or("-".into(), |v| v.to_string()),
            r.plain_secs,
            r.logged_secs,
            f(r.logging_overhead(), 2),
            r.proof_bytes.map_or("-".into(), |v| v.to_string()),
            r.census.as_ref().map_or("-".into(), |c| c.lines().to_string()),
            f(r.check_secs, 4),
            f(r.check_ratio(), 2),
            r.verdict.as_deref().unwrap_or("-"),
        );
    }
    s
}
