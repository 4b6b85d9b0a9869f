//! Encoding of a labelled CNF as a plain weighted CNF, so any weighted
//! partial MaxSAT solver can handle it.

use std::collections::BTreeMap;

use crate::formula::{Label, Lcnf, MaxSatSolution, Var, Wcnf};
use crate::formula::Clause;

/// Each label gets a selector `a` above the formula's variables, allocated
/// in ascending label order. Every clause `C^L` becomes the hard clause
/// `C ∨ ¬a_l...`, every label the soft unit `(a_l)` with the label's weight.
pub fn lcnf_to_wcnf(phi: &Lcnf) -> (Wcnf, BTreeMap<Label, Var>) {
    let top = phi
        .clauses()
        .map(|c| c.clause.max_var())
        .fold(phi.num_vars, u32::max);
    let selectors: BTreeMap<Label, Var> = phi
        .labels()
        .into_iter()
        .enumerate()
        .map(|(i, l)| (l, Var::new(top + 1 + i as u32)))
        .collect();
    let mut f = Wcnf::new(top + selectors.len() as u32);
    for c in phi.clauses() {
        let lits = c
            .clause
            .iter()
            .chain(c.labels.iter().map(|l| selectors[&l].neg()));
        f.add_hard(Clause::new(lits));
    }
    for (&l, &a) in &selectors {
        f.add_soft(Clause::new([a.pos()]), phi.weight(l).expect("validated formula"));
    }
    (f, selectors)
}

/// Reads a solution of the encoded WCNF back as a labelled-CNF solution:
/// removed labels are those whose selector is false.
pub fn lift_reduction_solution(
    sol: &MaxSatSolution,
    selectors: &BTreeMap<Label, Var>,
    num_vars: u32,
) -> MaxSatSolution {
    let mut model = sol.model.clone();
    model.extend_to(selectors.values().map(|v| v.index()).max().unwrap_or(0));
    MaxSatSolution {
        model: model.truncated(num_vars),
        cost: sol.cost,
        falsified: selectors
            .iter()
            .filter(|(_, a)| !model.value(**a))
            .map(|(l, _)| l.id())
            .collect(),
    }
}
