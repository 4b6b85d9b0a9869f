//! Weighted partial MaxSAT with preprocessing that stays sound for
//! optimisation: clauses carry labels, and removal acts on labels.
//!
//! The usual entry point is [`pipeline::solve_wcnf`].

pub mod bce;
pub mod card;
pub mod dimacs;
pub mod error;
pub mod formula;
pub mod lcnf_prep;
pub mod maxsat;
pub mod oracle;
pub mod pipeline;
pub mod reduction;
pub mod sat;

pub use error::{Error, Result};
pub use formula::{
    lcnf_from_wcnf, Assignment, Clause, Label, LabelSet, LabelledClause, Lcnf, Lit, MaxSatSolution,
    Var, Wcnf, Weight,
};
