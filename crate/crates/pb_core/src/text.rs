//! Canonical text form shared with the proof format: `+3 x1 +5 ~x2 >= 2 ;`.

use thiserror::Error;

use crate::constraint::{Coeff, PbConstraint, PbError};
use crate::lit::Lit;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TextError {
    #[error("expected a literal, found `{0}`")]
    BadLiteral(String),
    #[error("expected an integer, found `{0}`")]
    BadInteger(String),
    #[error("expected `>=`")]
    MissingRelation,
    #[error("expected `;` after the degree")]
    MissingTerminator,
    #[error("unexpected token `{0}` after constraint")]
    Trailing(String),
    #[error(transparent)]
    Arithmetic(#[from] PbError),
}

/// Parse `x12` or `~x12`.
pub fn parse_lit(tok: &str) -> Result<Lit, TextError> {
    let (positive, rest) = match tok.strip_prefix('~') {
        Some(r) => (false, r),
        None => (true, tok),
    };
    let num = rest.strip_prefix('x').ok_or_else(|| TextError::BadLiteral(tok.to_string()))?;
    if num.is_empty() || !num.bytes().all(|b| b.is_ascii_digit()) {
        return Err(TextError::BadLiteral(tok.to_string()));
    }
    match num.parse::<u32>() {
        Ok(v) if v >= 1 && v <= u32::MAX >> 1 => Ok(Lit::new(v, positive)),
        _ => Err(TextError::BadLiteral(tok.to_string())),
    }
}

pub fn parse_int(tok: &str) -> Result<Coeff, TextError> {
    let digits = tok.strip_prefix(['+', '-']).unwrap_or(tok);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(TextError::BadInteger(tok.to_string()));
    }
    tok.parse::<Coeff>().map_err(|_| TextError::BadInteger(tok.to_string()))
}

/// Parse a constraint from a token stream, consuming up to and including
/// the terminating `;`. Coefficients may be negative; the result is normalized.
pub fn parse_constraint<'a, I>(tokens: &mut I) -> Result<PbConstraint, TextError>
where
    I: Iterator<Item = &'a str>,
{
    let mut terms = Vec::new();
    loop {
        let tok = tokens.next().ok_or(TextError::MissingRelation)?;
        if tok == ">=" {
            break;
        }
        let a = parse_int(tok)?;
        let l = parse_lit(tokens.next().ok_or(TextError::MissingRelation)?)?;
        terms.push((a, l));
    }
    let degree = parse_int(tokens.next().ok_or(TextError::MissingTerminator)?)?;
    match tokens.next() {
        Some(";") => {}
        _ => return Err(TextError::MissingTerminator),
    }
    Ok(PbConstraint::from_terms(terms, degree)?)
}

/// Parse a complete constraint string; nothing may follow the `;`.
pub fn parse_constraint_str(s: &str) -> Result<PbConstraint, TextError> {
    let mut it = s.split_whitespace();
    let c = parse_constraint(&mut it)?;
    match it.next() {
        None => Ok(c),
        Some(t) => Err(TextError::Trailing(t.to_string())),
    }
}
