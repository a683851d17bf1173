//! MaxSAT instances in the 2022 WCNF format, their pseudo-Boolean
//! optimization view and MSE-style result lines.

mod pbo;
mod wcnf;

pub use pbo::{to_pbo, PboInstance, SoftRepr};
pub use wcnf::{parse_wcnf, write_wcnf, MaxSatInstance, ParseError, ParseErrorKind};

use pb_core::Coeff;

/// Final outcome reported by the solver.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Optimum,
    Unsatisfiable,
    Unknown,
}

/// `s ...` status line.
pub fn status_line(s: &SolveStatus) -> &'static str {
    match s {
        SolveStatus::Optimum => "s OPTIMUM FOUND",
        SolveStatus::Unsatisfiable => "s UNSATISFIABLE",
        SolveStatus::Unknown => "s UNKNOWN",
    }
}

/// `o <value>` line for an incumbent.
pub fn cost_line(value: Coeff) -> String {
    format!("o {value}")
}

/// `v <01...>` line; `model[i]` is the value of variable `i + 1`.
pub fn model_line(model: &[bool]) -> String {
    let mut s = String::with_capacity(model.len() + 2);
    s.push_str("v ");
    s.extend(model.iter().map(|&b| if b { '1' } else { '0' }));
    s
}
