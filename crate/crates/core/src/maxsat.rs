//! Core-guided MaxSAT over labelled CNF.
//!
//! Relaxation acts on labels, never on clauses directly. Each label starts
//! out as a single *piece*; when WMSU1 meets a core whose cheapest label
//! weighs less than some other core label, that heavier label is split and
//! the split-off piece carries the relaxed copies. Fu–Malik is the unit
//! weight special case, where no split ever happens.
//!
//! Two drivers share the same working formula: the non-incremental one
//! loads a fresh solver per iteration, the incremental one keeps a single
//! solver and retires stale clauses through versioned selector variables.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::card::{encode_equals1, VarAllocator};
use crate::error::{Error, Result};
use crate::formula::{Assignment, Label, Lcnf, Lit, MaxSatSolution, Var};
use crate::sat::{SatOracle, SolveOutcome, Solver, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum Mode {
    #[default]
    NonIncremental,
    Incremental,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum Algorithm {
    FuMalik,
    #[default]
    Wmsu1,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MaxSatConfig {
    pub mode: Mode,
    pub algorithm: Algorithm,
    /// Conflict budget handed to every SAT call.
    pub conflict_budget: Option<u64>,
}

/// One line per unsatisfiable iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceLine {
    pub iteration: usize,
    pub core_size: usize,
    pub w_min: u64,
    pub lower_bound: u64,
}

impl fmt::Display for TraceLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "iter {} core {} wmin {} lb {}",
            self.iteration, self.core_size, self.w_min, self.lower_bound
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MaxSatStats {
    /// Unsatisfiable iterations, i.e. cores processed.
    pub iterations: usize,
    /// Times a clause database was loaded into a solver from scratch.
    pub loads: usize,
    pub sat_calls: usize,
    pub trace: Vec<TraceLine>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    /// `falsified` of the solution holds the removed label ids.
    Optimum(MaxSatSolution),
    /// The ∅-labelled clauses alone are unsatisfiable.
    HardUnsat,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaxSatResult {
    pub outcome: Outcome,
    pub stats: MaxSatStats,
}

/// Per-piece bookkeeping. A label owns one or more pieces whose weights add
/// up to the label's weight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelState {
    pub label: Label,
    pub weight: u64,
    /// The last entry is the current selector.
    pub selector_versions: Vec<Var>,
    /// Every relaxation variable whose truth disables this piece, including
    /// those inherited from the piece it was split from.
    pub relaxation_vars: Vec<Var>,
}

impl LabelState {
    fn selector(&self) -> Var {
        *self.selector_versions.last().expect("at least one version")
    }
}

#[derive(Debug, Clone)]
struct WorkClause {
    lits: Vec<Lit>,
    /// Sorted piece indices.
    pieces: Vec<usize>,
}

impl WorkClause {
    fn with_selectors(&self, states: &[LabelState]) -> Vec<Lit> {
        let mut v = self.lits.clone();
        v.extend(self.pieces.iter().map(|&p| states[p].selector().neg()));
        v
    }
}

/// The relaxed working formula shared by both drivers.
struct Working {
    clauses: Vec<WorkClause>,
    states: Vec<LabelState>,
    alloc: VarAllocator,
}

impl Working {
    fn new(phi: &Lcnf) -> Working {
        let top = phi
            .clauses()
            .map(|c| c.clause.max_var())
            .fold(phi.num_vars, u32::max);
        let mut alloc = VarAllocator::above(top);
        let mut index = BTreeMap::new();
        let mut states = Vec::new();
        for l in phi.labels() {
            index.insert(l, states.len());
            states.push(LabelState {
                label: l,
                weight: phi.weight(l).expect("validated formula"),
                selector_versions: vec![alloc.fresh()],
                relaxation_vars: Vec::new(),
            });
        }
        let clauses = phi
            .clauses()
            .map(|c| WorkClause {
                lits: c.clause.lits().to_vec(),
                pieces: c.labels.iter().map(|l| index[&l]).collect(),
            })
            .collect();
        Working {
            clauses,
            states,
            alloc,
        }
    }

    fn assumptions(&self) -> Vec<Lit> {
        self.states.iter().map(|s| s.selector().pos()).collect()
    }

    fn selector_owner(&self) -> BTreeMap<Var, usize> {
        self.states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.selector(), i))
            .collect()
    }

    fn load_into<S: SatOracle>(&self, solver: &mut S, hard_only: bool) {
        solver.reserve_vars(self.alloc.max_var());
        for c in &self.clauses {
            if hard_only && !c.pieces.is_empty() {
                continue;
            }
            solver.add_clause(&c.with_selectors(&self.states));
        }
    }

    /// Relaxes the pieces of one core. Returns the indices of clauses that
    /// were changed or created, the pieces relaxed in place and w_min.
    fn relax_core(&mut self, core: &BTreeSet<usize>) -> Result<(Vec<usize>, Vec<usize>, u64)> {
        let w_min = core
            .iter()
            .map(|&p| self.states[p].weight)
            .min()
            .ok_or_else(|| Error::Internal("empty core".into()))?;
        let mut touched = BTreeSet::new();
        let mut fresh_r = Vec::with_capacity(core.len());
        let (in_place, split): (Vec<usize>, Vec<usize>) =
            core.iter().partition(|&&p| self.states[p].weight == w_min);

        for &p in &in_place {
            let r = self.alloc.fresh();
            fresh_r.push(r);
            self.states[p].relaxation_vars.push(r);
            for (i, c) in self.clauses.iter_mut().enumerate() {
                if c.pieces.binary_search(&p).is_ok() {
                    c.lits.push(r.pos());
                    touched.insert(i);
                }
            }
        }
        for &p in &split {
            let r = self.alloc.fresh();
            fresh_r.push(r);
            let mut inherited = self.states[p].relaxation_vars.clone();
            inherited.push(r);
            let q = self.states.len();
            self.states.push(LabelState {
                label: self.states[p].label,
                weight: w_min,
                selector_versions: vec![self.alloc.fresh()],
                relaxation_vars: inherited,
            });
            self.states[p].weight -= w_min;
            let copies: Vec<WorkClause> = self
                .clauses
                .iter()
                .filter(|c| c.pieces.binary_search(&p).is_ok())
                .map(|c| {
                    let mut lits = c.lits.clone();
                    lits.push(r.pos());
                    let mut pieces: Vec<usize> =
                        c.pieces.iter().copied().filter(|&x| x != p).collect();
                    pieces.push(q);
                    pieces.sort_unstable();
                    WorkClause { lits, pieces }
                })
                .collect();
            for c in copies {
                touched.insert(self.clauses.len());
                self.clauses.push(c);
            }
        }

        let enc = encode_equals1(&fresh_r, &mut self.alloc)?;
        for c in enc.clauses {
            touched.insert(self.clauses.len());
            self.clauses.push(WorkClause {
                lits: c.lits().to_vec(),
                pieces: Vec::new(),
            });
        }
        Ok((touched.into_iter().collect(), in_place, w_min))
    }

    /// Original labels every piece of which is switched off by a true
    /// relaxation variable.
    fn removed_labels(&self, model: &Assignment) -> BTreeSet<Label> {
        let mut alive: BTreeMap<Label, bool> = BTreeMap::new();
        for s in &self.states {
            let killed = s.relaxation_vars.iter().any(|&r| model.value(r));
            *alive.entry(s.label).or_insert(false) |= !killed;
        }
        alive
            .into_iter()
            .filter(|&(_, a)| !a)
            .map(|(l, _)| l)
            .collect()
    }
}

/// Maps failed selector assumptions back to the labels they stand for.
pub fn extract_core_labels(
    outcome: &SolveOutcome,
    selector_map: &BTreeMap<Var, Label>,
) -> Result<BTreeSet<Label>> {
    match outcome {
        SolveOutcome::Sat(_) => Err(Error::Internal("core requested from a SAT outcome".into())),
        SolveOutcome::Unsat { failed } => {
            if failed.is_empty() {
                return Err(Error::Internal(
                    "empty core although the hard part is satisfiable".into(),
                ));
            }
            failed
                .iter()
                .map(|l| {
                    selector_map
                        .get(&l.var())
                        .copied()
                        .ok_or_else(|| Error::Internal(format!("{l} is not a selector")))
                })
                .collect()
        }
    }
}

/// Adds `r` to every clause whose label-set contains `l`, as a plain
/// labelled-CNF transformation.
pub fn relax_label(phi: &Lcnf, l: Label, r: Var) -> Lcnf {
    let clauses = phi.clauses().map(|c| {
        if c.labels.contains(l) {
            crate::formula::LabelledClause::new(c.clause.with(r.pos()), c.labels.clone())
        } else {
            c.clone()
        }
    });
    let mut out = Lcnf::new(clauses, phi.weights().clone()).expect("weights unchanged");
    out.num_vars = phi.num_vars.max(r.index());
    out
}

fn piece_core(outcome: &SolveOutcome, owner: &BTreeMap<Var, usize>) -> Result<BTreeSet<usize>> {
    match outcome {
        SolveOutcome::Unsat { failed } if !failed.is_empty() => failed
            .iter()
            .map(|l| {
                owner
                    .get(&l.var())
                    .copied()
                    .ok_or_else(|| Error::Internal(format!("{l} is not a current selector")))
            })
            .collect(),
        SolveOutcome::Unsat { .. } => Err(Error::Internal(
            "empty core although the hard part is satisfiable".into(),
        )),
        SolveOutcome::Sat(_) => unreachable!(),
    }
}

/// Fu–Malik over a labelled CNF whose label weights are all 1.
pub fn solve_fu_malik_lcnf(phi: &Lcnf, mode: Mode) -> Result<MaxSatResult> {
    solve_lcnf(
        phi,
        &MaxSatConfig {
            mode,
            algorithm: Algorithm::FuMalik,
            conflict_budget: None,
        },
    )
}

pub fn solve_wmsu1_lcnf(phi: &Lcnf, mode: Mode) -> Result<MaxSatResult> {
    solve_lcnf(
        phi,
        &MaxSatConfig {
            mode,
            algorithm: Algorithm::Wmsu1,
            conflict_budget: None,
        },
    )
}

/// Solves with the built-in CDCL solver.
pub fn solve_lcnf(phi: &Lcnf, config: &MaxSatConfig) -> Result<MaxSatResult> {
    let solver_config = SolverConfig {
        conflict_budget: config.conflict_budget,
        ..SolverConfig::default()
    };
    solve_lcnf_with(phi, config, || Solver::with_config(solver_config))
}

/// Solves with solvers produced by `factory`. The factory is called once in
/// incremental mode and once per load otherwise.
pub fn solve_lcnf_with<S, F>(phi: &Lcnf, config: &MaxSatConfig, mut factory: F) -> Result<MaxSatResult>
where
    S: SatOracle,
    F: FnMut() -> S,
{
    if config.algorithm == Algorithm::FuMalik && phi.labels().iter().any(|&l| phi.weight(l) != Some(1)) {
        return Err(Error::InvalidInput(
            "Fu-Malik needs every label weight to be 1".into(),
        ));
    }
    let mut w = Working::new(phi);
    let mut stats = MaxSatStats::default();
    let mut lb = 0u64;

    let mut inc = match config.mode {
        Mode::Incremental => {
            let mut s = factory();
            w.load_into(&mut s, false);
            stats.loads += 1;
            // every selector free: only the ∅-labelled clauses bind
            stats.sat_calls += 1;
            if !s.solve_under_assumptions(&[])?.is_sat() {
                return Ok(MaxSatResult {
                    outcome: Outcome::HardUnsat,
                    stats,
                });
            }
            Some(s)
        }
        Mode::NonIncremental => {
            let mut s = factory();
            w.load_into(&mut s, true);
            stats.loads += 1;
            stats.sat_calls += 1;
            if !s.solve_under_assumptions(&[])?.is_sat() {
                return Ok(MaxSatResult {
                    outcome: Outcome::HardUnsat,
                    stats,
                });
            }
            None
        }
    };

    loop {
        let assumptions = w.assumptions();
        let outcome = match inc.as_mut() {
            Some(s) => s.solve_under_assumptions(&assumptions)?,
            None => {
                let mut s = factory();
                w.load_into(&mut s, false);
                stats.loads += 1;
                s.solve_under_assumptions(&assumptions)?
            }
        };
        stats.sat_calls += 1;
        let model = match outcome {
            SolveOutcome::Sat(m) => m,
            unsat => {
                let core = piece_core(&unsat, &w.selector_owner())?;
                let old_selectors: Vec<Var> = w.states.iter().map(LabelState::selector).collect();
                let (touched, in_place, w_min) = w.relax_core(&core)?;
                if let Some(s) = inc.as_mut() {
                    for &p in &in_place {
                        let v = w.alloc.fresh();
                        w.states[p].selector_versions.push(v);
                    }
                    s.reserve_vars(w.alloc.max_var());
                    for &p in &in_place {
                        s.add_clause(&[old_selectors[p].neg()]);
                    }
                    for &i in &touched {
                        s.add_clause(&w.clauses[i].with_selectors(&w.states));
                    }
                }
                lb = lb.checked_add(w_min).ok_or(Error::WeightOverflow)?;
                stats.iterations += 1;
                stats.trace.push(TraceLine {
                    iteration: stats.iterations,
                    core_size: core.len(),
                    w_min,
                    lower_bound: lb,
                });
                continue;
            }
        };

        let removed = w.removed_labels(&model);
        let cost = phi.cost_of_labels(removed.iter())?;
        let original = model.truncated(phi.num_vars);
        if cost != lb || !phi.models_without(&original, &removed) {
            return Err(Error::Internal(format!(
                "certificate mismatch: lower bound {lb}, removed labels cost {cost}"
            )));
        }
        return Ok(MaxSatResult {
            outcome: Outcome::Optimum(MaxSatSolution {
                model: original,
                cost,
                falsified: removed.iter().map(|l| l.id()).collect(),
            }),
            stats,
        });
    }
}
