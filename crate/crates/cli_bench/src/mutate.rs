//! Single-token proof mutations.
//!
//! Semantic mutations change one meaning-bearing token of a proof line.
//! A mutated proof the checker still accepts is audited: if it passes the
//! audit the mutation only weakened or re-derived something valid and is
//! counted as neutral, otherwise the checker accepted an unsound proof.
//! Cosmetic mutations change only whitespace and comments.

use std::collections::BTreeMap;
use std::fmt;

use instance_io::PboInstance;
use pb_core::Coeff;
use proof_checker::check_proof_traced;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::audit::Auditor;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SemanticKind {
    Coefficient,
    Degree,
    Polarity,
    WitnessBit,
    Id,
    Multiplier,
    Bound,
    FormulaSize,
}

impl fmt::Display for SemanticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SemanticKind::Coefficient => "coefficient",
            SemanticKind::Degree => "degree",
            SemanticKind::Polarity => "polarity",
            SemanticKind::WitnessBit => "witness",
            SemanticKind::Id => "id",
            SemanticKind::Multiplier => "multiplier",
            SemanticKind::Bound => "bound",
            SemanticKind::FormulaSize => "formula_size",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CosmeticKind {
    DoubleSpace,
    Tab,
    Leading,
    Trailing,
    Comment,
    BlankLine,
}

const COSMETIC: [CosmeticKind; 6] = [
    CosmeticKind::DoubleSpace,
    CosmeticKind::Tab,
    CosmeticKind::Leading,
    CosmeticKind::Trailing,
    CosmeticKind::Comment,
    CosmeticKind::BlankLine,
];

/// A mutable token: line index (from 0) and token index within the line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Site {
    pub line: usize,
    pub token: usize,
    pub kind: SemanticKind,
}

fn is_lit(t: &str) -> bool {
    let v = t.strip_prefix('~').unwrap_or(t);
    v.strip_prefix('x').is_some_and(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
}

/// Sites of a constraint starting at token `i`; returns the index after `;`.
fn constraint_sites(toks: &[&str], mut i: usize, line: usize, out: &mut Vec<Site>) -> usize {
    let site = |token, kind| Site { line, token, kind };
    while i < toks.len() {
        if toks[i] == ">=" {
            if i + 1 < toks.len() {
                out.push(site(i + 1, SemanticKind::Degree));
            }
            return i + 3;
        }
        out.push(site(i, SemanticKind::Coefficient));
        if i + 1 < toks.len() {
            out.push(site(i + 1, SemanticKind::Polarity));
        }
        i += 2;
    }
    i
}

/// Every meaning-bearing token of the proof.
pub fn semantic_sites(proof: &str) -> Vec<Site> {
    let mut out = Vec::new();
    for (line, text) in proof.lines().enumerate() {
        let toks: Vec<&str> = text.split_whitespace().collect();
        let site = |token, kind| Site { line, token, kind };
        match toks.first().copied() {
            Some("f") if toks.len() == 2 => out.push(site(1, SemanticKind::FormulaSize)),
            Some("pol") => {
                for (i, t) in toks.iter().enumerate().skip(1) {
                    if is_lit(t) {
                        out.push(site(i, SemanticKind::Polarity));
                    } else if t.bytes().all(|b| b.is_ascii_digit()) {
                        let scaled = matches!(toks.get(i + 1), Some(&"*") | Some(&"d"));
                        out.push(site(i, if scaled { SemanticKind::Multiplier } else { SemanticKind::Id }));
                    }
                }
            }
            Some("rup") => {
                constraint_sites(&toks, 1, line, &mut out);
            }
            Some("red") => {
                let end = constraint_sites(&toks, 1, line, &mut out);
                if toks.len() == end + 3 && toks[end + 1] == "->" {
                    out.push(site(end + 2, SemanticKind::WitnessBit));
                }
            }
            Some("soli") => out.extend((1..toks.len()).map(|i| site(i, SemanticKind::Polarity))),
            Some("del") if toks.len() == 3 => out.push(site(2, SemanticKind::Id)),
            Some("conclusion") if toks.get(1) == Some(&"BOUNDS") => {
                out.extend((2..toks.len()).map(|i| site(i, SemanticKind::Bound)));
            }
            _ => {}
        }
    }
    out
}

fn shift<R: Rng>(rng: &mut R, v: Coeff, min: Coeff) -> Coeff {
    if v - 1 < min || rng.gen_bool(0.5) {
        v + 1
    } else {
        v - 1
    }
}

/// A different token of the same kind.
pub fn mutate_token<R: Rng>(tok: &str, kind: SemanticKind, rng: &mut R) -> String {
    let int = || tok.parse::<Coeff>().unwrap_or(0);
    match kind {
        SemanticKind::Coefficient => {
            let v = int();
            let mut w = shift(rng, v, Coeff::MIN);
            if w == 0 {
                w = v + 1;
            }
            format!("{w:+}")
        }
        SemanticKind::Degree | SemanticKind::Bound => shift(rng, int(), Coeff::MIN).to_string(),
        SemanticKind::Polarity => match tok.strip_prefix('~') {
            Some(v) => v.to_string(),
            None => format!("~{tok}"),
        },
        SemanticKind::WitnessBit => if tok == "0" { "1" } else { "0" }.to_string(),
        SemanticKind::Id => {
            let v = int();
            if rng.gen_bool(0.5) {
                shift(rng, v, 1).to_string()
            } else {
                let mut w = rng.gen_range(1..=v + 5);
                if w == v {
                    w = v + 1;
                }
                w.to_string()
            }
        }
        SemanticKind::Multiplier => shift(rng, int(), 1).to_string(),
        SemanticKind::FormulaSize => shift(rng, int(), 0).to_string(),
    }
}

fn rebuild(proof: &str, line: usize, new_line: &str) -> String {
    let mut out = String::with_capacity(proof.len() + 8);
    for (i, l) in proof.lines().enumerate() {
        out.push_str(if i == line { new_line } else { l });
        out.push('\n');
    }
    out
}

/// Replace the token at `site`; returns the new proof and the new token.
pub fn apply<R: Rng>(proof: &str, site: &Site, rng: &mut R) -> (String, String) {
    let text = proof.lines().nth(site.line).expect("site outside the proof");
    let mut toks: Vec<String> = text.split_whitespace().map(str::to_string).collect();
    let new = mutate_token(&toks[site.token], site.kind, rng);
    toks[site.token] = new.clone();
    (rebuild(proof, site.line, &toks.join(" ")), new)
}

/// A whitespace or comment change that keeps every token.
pub fn cosmetic<R: Rng>(proof: &str, kind: CosmeticKind, rng: &mut R) -> String {
    let lines: Vec<&str> = proof.lines().collect();
    let i = rng.gen_range(0..lines.len());
    let l = lines[i];
    match kind {
        CosmeticKind::DoubleSpace | CosmeticKind::Tab => {
            let spaces: Vec<usize> = l.match_indices(' ').map(|(p, _)| p).collect();
            let Some(&p) = spaces.choose(rng) else { return rebuild(proof, i, &format!("{l} ")) };
            let with = if kind == CosmeticKind::Tab { "\t" } else { "  " };
            rebuild(proof, i, &format!("{}{with}{}", &l[..p], &l[p + 1..]))
        }
        CosmeticKind::Leading => rebuild(proof, i, &format!("  {l}")),
        CosmeticKind::Trailing => rebuild(proof, i, &format!("{l} \t")),
        CosmeticKind::Comment => rebuild(proof, i, &format!("* inserted remark {i}\n{l}")),
        CosmeticKind::BlankLine => rebuild(proof, i, &format!("\n{l}")),
    }
}

/// One accepted mutation that failed the audit.
#[derive(Clone, Debug)]
pub struct Escape {
    pub kind: SemanticKind,
    pub line: usize,
    pub old: String,
    pub new: String,
    pub reason: String,
}

#[derive(Clone, Debug, Default)]
pub struct FuzzReport {
    pub semantic: usize,
    pub rejected: usize,
    /// Accepted and passing the audit.
    pub neutral: usize,
    /// Accepted and failing the audit.
    pub unsound: usize,
    /// Accepted on an instance too large to audit.
    pub unaudited: usize,
    pub cosmetic: usize,
    pub cosmetic_accepted: usize,
    /// Per kind: generated, rejected.
    pub by_kind: BTreeMap<SemanticKind, (usize, usize)>,
    pub escapes: Vec<Escape>,
}

impl FuzzReport {
    pub fn merge(&mut self, o: &FuzzReport) {
        self.semantic += o.semantic;
        self.rejected += o.rejected;
        self.neutral += o.neutral;
        self.unsound += o.unsound;
        self.unaudited += o.unaudited;
        self.cosmetic += o.cosmetic;
        self.cosmetic_accepted += o.cosmetic_accepted;
        for (k, &(g, r)) in &o.by_kind {
            let e = self.by_kind.entry(*k).or_default();
            e.0 += g;
            e.1 += r;
        }
        self.escapes.extend(o.escapes.iter().cloned());
    }

    /// Mutations that changed what the proof establishes.
    pub fn meaningful(&self) -> usize {
        self.semantic - self.neutral
    }

    pub fn record(&self) -> String {
        let mut s = format!(
            "semantic={} rejected={} neutral={} unsound={} unaudited={} cosmetic={} cosmetic_accepted={}",
            self.semantic,
            self.rejected,
            self.neutral,
            self.unsound,
            self.unaudited,
            self.cosmetic,
            self.cosmetic_accepted
        );
        for (k, (g, r)) in &self.by_kind {
            s.push_str(&format!(" {k}={r}/{g}"));
        }
        s
    }
}

/// Mutate an accepted proof of `inst`: `semantic` single-token mutations,
/// spread evenly over the token kinds present, and `cosmetic` layout
/// changes.
pub fn fuzz_proof<R: Rng>(
    inst: &PboInstance,
    proof: &str,
    auditor: Option<&Auditor>,
    semantic: usize,
    cosmetic_count: usize,
    rng: &mut R,
) -> FuzzReport {
    let baseline = check_proof_traced(inst, proof).expect("fuzzing a proof the checker rejects").0.verdict;
    let mut by_kind: BTreeMap<SemanticKind, Vec<Site>> = BTreeMap::new();
    for s in semantic_sites(proof) {
        by_kind.entry(s.kind).or_default().push(s);
    }
    let kinds: Vec<SemanticKind> = by_kind.keys().copied().collect();
    let mut rep = FuzzReport::default();
    for _ in 0..semantic {
        let Some(kind) = kinds.choose(rng) else { break };
        let site = *by_kind[kind].choose(rng).unwrap();
        let old = proof.lines().nth(site.line).unwrap().split_whitespace().nth(site.token).unwrap().to_string();
        let (mutant, new) = apply(proof, &site, rng);
        rep.semantic += 1;
        let entry = rep.by_kind.entry(site.kind).or_default();
        entry.0 += 1;
        match check_proof_traced(inst, &mutant) {
            Err(_) => {
                rep.rejected += 1;
                entry.1 += 1;
            }
            Ok((report, trace)) => match auditor {
                None => rep.unaudited += 1,
                Some(a) => match a.audit(&mutant, report.verdict, &trace) {
                    Ok(()) => rep.neutral += 1,
                    Err(reason) => {
                        rep.unsound += 1;
                        rep.escapes.push(Escape { kind: site.kind, line: site.line + 1, old, new, reason });
                    }
                },
            },
        }
    }
    for _ in 0..cosmetic_count {
        let kind = *COSMETIC.choose(rng).unwrap();
        let mutant = cosmetic(proof, kind, rng);
        rep.cosmetic += 1;
        if check_proof_traced(inst, &mutant).is_ok_and(|(r, _)| r.verdict == baseline) {
            rep.cosmetic_accepted += 1;
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const PROOF: &str = "pseudo-Boolean proof version 2.0\nf 2\n\
        pol 1 2 + 3 * 2 d\nrup +1 x1 +2 ~x3 >= 2 ;\nred +2 ~x4 +1 x1 >= 1 ; x4 -> 0\n\
        red +1 x2 >= 1 ; begin\nend\nsoli x1 ~x2\ndel id 3\noutput NONE\nconclusion BOUNDS 3 3\n\
        end pseudo-Boolean proof\n";

    #[test]
    fn sites_cover_every_token_kind() {
        let sites = semantic_sites(PROOF);
        let at = |line: usize, token: usize| sites.iter().find(|s| s.line == line && s.token == token).map(|s| s.kind);
        assert_eq!(at(1, 1), Some(SemanticKind::FormulaSize));
        assert_eq!(at(2, 1), Some(SemanticKind::Id));
        assert_eq!(at(2, 4), Some(SemanticKind::Multiplier));
        assert_eq!(at(2, 6), Some(SemanticKind::Multiplier));
        assert_eq!(at(3, 1), Some(SemanticKind::Coefficient));
        assert_eq!(at(3, 4), Some(SemanticKind::Polarity));
        assert_eq!(at(3, 6), Some(SemanticKind::Degree));
        assert_eq!(at(4, 10), Some(SemanticKind::WitnessBit));
        assert_eq!(at(4, 8), None);
        assert_eq!(at(5, 4), Some(SemanticKind::Degree));
        assert_eq!(at(7, 2), Some(SemanticKind::Polarity));
        assert_eq!(at(8, 2), Some(SemanticKind::Id));
        assert_eq!(at(10, 3), Some(SemanticKind::Bound));
        assert_eq!(at(11, 0), None);
    }

    #[test]
    fn mutations_change_exactly_one_token() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for site in semantic_sites(PROOF) {
            let (m, new) = apply(PROOF, &site, &mut rng);
            let diff: Vec<(&str, &str)> = PROOF
                .split_whitespace()
                .zip(m.split_whitespace())
                .filter(|(a, b)| a != b)
                .collect();
            assert_eq!(diff.len(), 1, "{site:?}");
            assert_eq!(diff[0].1, new);
        }
    }

    #[test]
    fn cosmetic_changes_keep_the_tokens() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let toks = |p: &str| p.split_whitespace().filter(|t| !t.starts_with('*')).map(str::to_string).collect::<Vec<_>>();
        for &k in COSMETIC.iter().cycle().take(60) {
            let m = cosmetic(PROOF, k, &mut rng);
            let stripped: String = m.lines().filter(|l| !l.trim_start().starts_with('*')).collect::<Vec<_>>().join("\n");
            assert_eq!(toks(&stripped), toks(PROOF), "{k:?}");
            assert_ne!(m, PROOF);
        }
    }
}
