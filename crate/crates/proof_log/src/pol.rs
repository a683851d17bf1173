use std::fmt::Write as _;
use std::ops::AddAssign;

use pb_core::{Coeff, Lit, PbConstraint};

use crate::{ConstraintId, ProofLogger};

/// Primitive cutting-planes steps. Multiplications by one are not steps
/// and are not written.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepCount {
    pub axioms: u64,
    pub mults: u64,
    pub adds: u64,
    pub divs: u64,
    pub sats: u64,
}

impl StepCount {
    pub fn total(&self) -> u64 {
        self.axioms + self.mults + self.adds + self.divs + self.sats
    }
}

impl AddAssign for StepCount {
    fn add_assign(&mut self, o: StepCount) {
        self.axioms += o.axioms;
        self.mults += o.mults;
        self.adds += o.adds;
        self.divs += o.divs;
        self.sats += o.sats;
    }
}

/// One `pol` line in reverse Polish notation, evaluated as it is built.
pub struct PolBuilder<'a> {
    log: &'a mut ProofLogger,
    text: String,
    stack: Vec<PbConstraint>,
    depth: usize,
    steps: StepCount,
}

impl<'a> PolBuilder<'a> {
    pub(crate) fn new(log: &'a mut ProofLogger) -> PolBuilder<'a> {
        PolBuilder { log, text: String::from("pol"), stack: Vec::new(), depth: 0, steps: StepCount::default() }
    }

    fn live(&self) -> bool {
        self.log.is_enabled()
    }

    fn pop(&mut self) -> PbConstraint {
        self.stack.pop().expect("pol stack underflow")
    }

    pub fn id(mut self, id: ConstraintId) -> Self {
        let _ = write!(self.text, " {id}");
        self.depth += 1;
        if self.live() {
            let c = self.log.get(id).clone();
            self.stack.push(c);
        }
        self
    }

    pub fn axiom(mut self, l: Lit) -> Self {
        let _ = write!(self.text, " {l}");
        self.depth += 1;
        self.steps.axioms += 1;
        if self.live() {
            self.stack.push(PbConstraint::literal_axiom(l));
        }
        self
    }

    pub fn mul(mut self, k: Coeff) -> Self {
        assert!(k >= 1, "multiplier must be positive");
        assert!(self.depth >= 1, "pol stack underflow");
        if k == 1 {
            return self;
        }
        let _ = write!(self.text, " {k} *");
        self.steps.mults += 1;
        if self.live() {
            let c = self.pop().multiply(k).expect("coefficient overflow");
            self.stack.push(c);
        }
        self
    }

    pub fn add(mut self) -> Self {
        assert!(self.depth >= 2, "pol stack underflow");
        self.depth -= 1;
        self.text.push_str(" +");
        self.steps.adds += 1;
        if self.live() {
            let b = self.pop();
            let a = self.pop();
            self.stack.push(a.add(&b).expect("coefficient overflow"));
        }
        self
    }

    /// Push `id * k` and add it to the top of the stack, or just push it
    /// when the stack is empty.
    pub fn add_scaled(self, id: ConstraintId, k: Coeff) -> Self {
        let first = self.depth == 0;
        let b = self.id(id).mul(k);
        if first {
            b
        } else {
            b.add()
        }
    }

    /// Push the literal axiom `l * k` and add it to the top of the stack.
    pub fn add_axiom(self, l: Lit, k: Coeff) -> Self {
        let first = self.depth == 0;
        let b = self.axiom(l).mul(k);
        if first {
            b
        } else {
            b.add()
        }
    }

    pub fn div(mut self, k: Coeff) -> Self {
        assert!(k >= 1, "divisor must be positive");
        assert!(self.depth >= 1, "pol stack underflow");
        let _ = write!(self.text, " {k} d");
        self.steps.divs += 1;
        if self.live() {
            let c = self.pop().divide(k).expect("division");
            self.stack.push(c);
        }
        self
    }

    pub fn sat(mut self) -> Self {
        assert!(self.depth >= 1, "pol stack underflow");
        self.text.push_str(" s");
        self.steps.sats += 1;
        if self.live() {
            let c = self.pop().saturate();
            self.stack.push(c);
        }
        self
    }

    /// Current top of the stack; `None` when logging is disabled.
    pub fn top(&self) -> Option<&PbConstraint> {
        self.stack.last()
    }

    pub fn steps(&self) -> StepCount {
        self.steps
    }

    /// Write the line and store its result.
    pub fn finish(self) -> ConstraintId {
        self.finish_with_steps().0
    }

    pub fn finish_with_steps(mut self) -> (ConstraintId, StepCount) {
        assert_eq!(self.depth, 1, "pol must leave exactly one constraint");
        let result = self.stack.pop().unwrap_or_default();
        let steps = self.steps;
        if self.live() {
            self.log.census.pol += 1;
            self.log.census.steps += steps;
            self.log.emit(&self.text);
        }
        (self.log.store_new(result), steps)
    }

    /// Like [`PolBuilder::finish`], but abort if the derived constraint
    /// differs from `expected`.
    pub fn finish_expect(self, expected: &PbConstraint) -> ConstraintId {
        if let Some(top) = self.stack.last() {
            assert_eq!(top, expected, "derivation `{}` does not give the expected constraint", self.text);
        }
        self.finish()
    }
}
