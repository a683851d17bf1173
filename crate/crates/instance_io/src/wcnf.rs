use std::fmt::Write as _;

use pb_core::{Coeff, Lit, Var};
use thiserror::Error;

/// Hard and weighted soft clauses over variables `1..=num_vars`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MaxSatInstance {
    pub num_vars: u32,
    pub hard: Vec<Vec<Lit>>,
    pub soft: Vec<(Coeff, Vec<Lit>)>,
}

impl MaxSatInstance {
    /// Total weight of falsified soft clauses, or `None` if a hard clause
    /// is falsified.
    pub fn cost(&self, value: impl Fn(Var) -> bool) -> Option<Coeff> {
        let sat = |c: &[Lit]| c.iter().any(|l| l.eval(value(l.var())));
        if !self.hard.iter().all(|c| sat(c)) {
            return None;
        }
        Some(self.soft.iter().filter(|(_, c)| !sat(c)).map(|&(w, _)| w).sum())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    #[error("legacy `p wcnf` header; only the 2022 format is supported")]
    LegacyHeader,
    #[error("bad weight `{0}`; weights must be positive integers")]
    BadWeight(String),
    #[error("bad literal `{0}`")]
    BadLiteral(String),
    #[error("clause is missing its terminating 0")]
    MissingZero,
    #[error("unexpected token `{0}` after the terminating 0")]
    Trailing(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

fn parse_clause<'a>(mut toks: impl Iterator<Item = &'a str>) -> Result<Vec<Lit>, ParseErrorKind> {
    let mut lits = Vec::new();
    loop {
        let tok = toks.next().ok_or(ParseErrorKind::MissingZero)?;
        let v: i64 = tok.parse().map_err(|_| ParseErrorKind::BadLiteral(tok.to_string()))?;
        if v == 0 {
            break;
        }
        lits.push(Lit::from_dimacs(v).ok_or_else(|| ParseErrorKind::BadLiteral(tok.to_string()))?);
    }
    if let Some(tok) = toks.next() {
        return Err(ParseErrorKind::Trailing(tok.to_string()));
    }
    Ok(lits)
}

/// Parse a new-format WCNF file.
pub fn parse_wcnf(text: &str) -> Result<MaxSatInstance, ParseError> {
    let mut inst = MaxSatInstance::default();
    for (i, raw) in text.lines().enumerate() {
        let err = |kind| ParseError { line: i + 1, kind };
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        let mut toks = line.split_whitespace();
        let first = toks.next().unwrap();
        let lits = if first == "p" {
            return Err(err(ParseErrorKind::LegacyHeader));
        } else if first == "h" {
            let c = parse_clause(toks).map_err(err)?;
            inst.hard.push(c.clone());
            c
        } else {
            let w = match first.parse::<u64>() {
                Ok(w) if w > 0 => w as Coeff,
                _ => return Err(err(ParseErrorKind::BadWeight(first.to_string()))),
            };
            let c = parse_clause(toks).map_err(err)?;
            inst.soft.push((w, c.clone()));
            c
        };
        for l in lits {
            inst.num_vars = inst.num_vars.max(l.var());
        }
    }
    Ok(inst)
}

/// Serialize to the format read by [`parse_wcnf`]: hard clauses first.
pub fn write_wcnf(inst: &MaxSatInstance) -> String {
    let mut out = String::new();
    let clause = |out: &mut String, c: &[Lit]| {
        for l in c {
            let _ = write!(out, " {}", l.to_dimacs());
        }
        out.push_str(" 0\n");
    };
    for c in &inst.hard {
        out.push('h');
        clause(&mut out, c);
    }
    for (w, c) in &inst.soft {
        let _ = write!(out, "{w}");
        clause(&mut out, c);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_hard_and_soft() {
        let inst = parse_wcnf("c hi\nh 1 2 0\n3 -1 0\n").unwrap();
        assert_eq!(inst.num_vars, 2);
        assert_eq!(inst.hard, vec![vec![Lit::pos(1), Lit::pos(2)]]);
        assert_eq!(inst.soft, vec![(3, vec![Lit::neg(1)])]);
    }

    #[test]
    fn empty_input() {
        assert_eq!(parse_wcnf("").unwrap(), MaxSatInstance::default());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse_wcnf("h 1 0\np wcnf 2 1 10\n").unwrap_err();
        assert_eq!(e, ParseError { line: 2, kind: ParseErrorKind::LegacyHeader });
        assert_eq!(parse_wcnf("0 1 0").unwrap_err().kind, ParseErrorKind::BadWeight("0".into()));
        assert_eq!(parse_wcnf("-2 1 0").unwrap_err().kind, ParseErrorKind::BadWeight("-2".into()));
        assert_eq!(parse_wcnf("c\n\nh 1 2").unwrap_err(), ParseError {
            line: 3,
            kind: ParseErrorKind::MissingZero
        });
        assert!(matches!(parse_wcnf("h 1 0 2").unwrap_err().kind, ParseErrorKind::Trailing(_)));
        assert!(matches!(parse_wcnf("h 1 a 0").unwrap_err().kind, ParseErrorKind::BadLiteral(_)));
    }

    #[test]
    fn cost_of_assignment() {
        let inst = parse_wcnf("h 1 2 0\n3 -1 0\n4 -2 0\n").unwrap();
        assert_eq!(inst.cost(|v| v == 1), Some(3));
        assert_eq!(inst.cost(|_| false), None);
    }
}
