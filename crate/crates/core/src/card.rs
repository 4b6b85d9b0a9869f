//! Exactly-one constraints over relaxation variables.

use crate::error::{Error, Result};
use crate::formula::{Clause, Var};

/// Hands out fresh variables above a fixed universe.
#[derive(Debug, Clone)]
pub struct VarAllocator {
    next: u32,
}

impl VarAllocator {
    /// The first variable handed out is `above + 1`.
    pub fn above(above: u32) -> VarAllocator {
        VarAllocator { next: above + 1 }
    }

    pub fn fresh(&mut self) -> Var {
        let v = Var::new(self.next);
        self.next += 1;
        v
    }

    /// Highest variable handed out so far (or the initial bound).
    pub fn max_var(&self) -> u32 {
        self.next - 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Equals1Encoding {
    pub clauses: Vec<Clause>,
    pub aux_vars: Vec<Var>,
}

/// Pairwise encoding: one at-least-one clause and `n(n-1)/2` binary
/// at-most-one clauses. No auxiliary variables, so `_fresh` is untouched;
/// it is part of the signature for encodings that need it.
pub fn encode_equals1(vars: &[Var], _fresh: &mut VarAllocator) -> Result<Equals1Encoding> {
    if vars.is_empty() {
        return Err(Error::InvalidInput("equals1 over no variables".into()));
    }
    let mut sorted = vars.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidInput("equals1 over repeated variables".into()));
    }
    let mut clauses = Vec::with_capacity(1 + vars.len() * (vars.len() - 1) / 2);
    clauses.push(Clause::new(vars.iter().map(|v| v.pos())));
    for (i, a) in vars.iter().enumerate() {
        for b in &vars[i + 1..] {
            clauses.push(Clause::new([a.neg(), b.neg()]));
        }
    }
    Ok(Equals1Encoding {
        clauses,
        aux_vars: Vec::new(),
    })
}
