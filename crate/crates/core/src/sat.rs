//! Incremental CDCL SAT solver with assumptions.
//!
//! Two watched literals, first-UIP learning, VSIDS-style branching with
//! geometric restarts. Assumptions are decided first, one per decision
//! level, so learned clauses never depend on them and stay valid for later
//! calls. When an assumption is found false the failed subset is read off
//! the implication graph (`analyze_final`).
//!
//! Learned clauses are never deleted.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::formula::{Assignment, Clause, Lit, Var};

/// Outcome of a single `solve_under_assumptions` call.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    /// The model covers every variable known to the solver.
    Sat(Assignment),
    /// `failed` is a subset of the assumptions that is inconsistent with the
    /// clause database. Empty when the database alone is unsatisfiable.
    Unsat { failed: Vec<Lit> },
}

impl SolveOutcome {
    pub fn is_sat(&self) -> bool {
        matches!(self, SolveOutcome::Sat(_))
    }
}

/// Incremental SAT oracle interface. The built-in [`Solver`] is the
/// reference implementation.
pub trait SatOracle {
    /// Makes sure variables `1..=n` exist.
    fn reserve_vars(&mut self, n: u32);

    fn num_vars(&self) -> u32;

    /// Adds a permanent clause.
    fn add_clause(&mut self, lits: &[Lit]);

    fn solve_under_assumptions(&mut self, assumptions: &[Lit]) -> Result<SolveOutcome>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Value {
    True,
    False,
    Undef,
}

#[derive(Debug, Clone, Copy)]
struct Watcher {
    cref: u32,
    blocker: Lit,
}

#[derive(Debug, Clone)]
struct ClauseData {
    lits: Vec<Lit>,
    learnt: bool,
}

/// Counters, mostly for tests and tracing.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolverStats {
    pub solves: u64,
    pub conflicts: u64,
    pub decisions: u64,
    pub propagations: u64,
    pub restarts: u64,
    pub learnt_clauses: u64,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    /// Per-call conflict limit. `None` means unlimited.
    pub conflict_budget: Option<u64>,
    pub restart_first: u64,
    pub restart_factor: f64,
    pub var_decay: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            conflict_budget: None,
            restart_first: 100,
            restart_factor: 1.5,
            var_decay: 0.95,
        }
    }
}

enum Search {
    Sat,
    Unsat,
    Restart,
}

/// Binary max-heap over variables keyed by activity; equal activities are
/// broken towards the lower variable index.
#[derive(Debug, Default, Clone)]
struct VarHeap {
    heap: Vec<u32>,
    // position in `heap`, usize::MAX if absent; indexed by variable
    pos: Vec<usize>,
}

impl VarHeap {
    fn better(act: &[f64], a: u32, b: u32) -> bool {
        let (x, y) = (act[a as usize], act[b as usize]);
        x > y || (x == y && a < b)
    }

    fn grow(&mut self, n: usize) {
        if self.pos.len() < n {
            self.pos.resize(n, usize::MAX);
        }
    }

    fn contains(&self, v: u32) -> bool {
        self.pos.get(v as usize).is_some_and(|&p| p != usize::MAX)
    }

    fn insert(&mut self, v: u32, act: &[f64]) {
        if self.contains(v) {
            return;
        }
        self.pos[v as usize] = self.heap.len();
        self.heap.push(v);
        self.sift_up(self.heap.len() - 1, act);
    }

    fn increased(&mut self, v: u32, act: &[f64]) {
        if let Some(&p) = self.pos.get(v as usize) {
            if p != usize::MAX {
                self.sift_up(p, act);
            }
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<u32> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().expect("non-empty");
        self.pos[top as usize] = usize::MAX;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last as usize] = 0;
            self.sift_down(0, act);
        }
        Some(top)
    }

    fn sift_up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            let p = self.heap[parent];
            if !Self::better(act, v, p) {
                break;
            }
            self.heap[i] = p;
            self.pos[p as usize] = i;
            i = parent;
        }
        self.heap[i] = v;
        self.pos[v as usize] = i;
    }

    fn sift_down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        let n = self.heap.len();
        loop {
            let l = 2 * i + 1;
            if l >= n {
                break;
            }
            let r = l + 1;
            let child = if r < n && Self::better(act, self.heap[r], self.heap[l]) {
                r
            } else {
                l
            };
            let c = self.heap[child];
            if !Self::better(act, c, v) {
                break;
            }
            self.heap[i] = c;
            self.pos[c as usize] = i;
            i = child;
        }
        self.heap[i] = v;
        self.pos[v as usize] = i;
    }
}

/// The built-in CDCL engine.
///
/// Not `Sync`-shared: one caller at a time, but a handle may be moved across
/// threads between calls.
#[derive(Debug, Clone)]
pub struct Solver {
    config: SolverConfig,
    num_vars: u32,
    clauses: Vec<ClauseData>,
    // indexed by literal code; clauses watching that literal
    watches: Vec<Vec<Watcher>>,
    // per-variable state, index 0 unused
    assigns: Vec<Value>,
    level: Vec<u32>,
    reason: Vec<Option<u32>>,
    phase: Vec<bool>,
    activity: Vec<f64>,
    seen: Vec<bool>,
    heap: VarHeap,
    var_inc: f64,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    // false once the clause database is unsatisfiable on its own
    ok: bool,
    stats: SolverStats,
}

impl Default for Solver {
    fn default() -> Self {
        Solver::new()
    }
}

impl Solver {
    pub fn new() -> Solver {
        Solver::with_config(SolverConfig::default())
    }

    pub fn with_config(config: SolverConfig) -> Solver {
        Solver {
            config,
            num_vars: 0,
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2],
            assigns: vec![Value::Undef],
            level: vec![0],
            reason: vec![None],
            phase: vec![false],
            activity: vec![0.0],
            seen: vec![false],
            heap: VarHeap::default(),
            var_inc: 1.0,
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            ok: true,
            stats: SolverStats::default(),
        }
    }

    pub fn stats(&self) -> SolverStats {
        self.stats
    }

    /// Number of stored clauses, learnt ones included.
    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn new_var(&mut self) -> Var {
        self.reserve_vars(self.num_vars + 1);
        Var::new(self.num_vars)
    }

    pub fn reserve_vars(&mut self, n: u32) {
        if n <= self.num_vars {
            return;
        }
        let size = n as usize + 1;
        self.assigns.resize(size, Value::Undef);
        self.level.resize(size, 0);
        self.reason.resize(size, None);
        self.phase.resize(size, false);
        self.activity.resize(size, 0.0);
        self.seen.resize(size, false);
        self.watches.resize(2 * size, Vec::new());
        self.heap.grow(size);
        for v in self.num_vars + 1..=n {
            self.heap.insert(v, &self.activity);
        }
        self.num_vars = n;
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    fn lit_value(&self, l: Lit) -> Value {
        match self.assigns[l.var().index() as usize] {
            Value::Undef => Value::Undef,
            v => {
                if (v == Value::True) == l.is_positive() {
                    Value::True
                } else {
                    Value::False
                }
            }
        }
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn var_level(&self, l: Lit) -> u32 {
        self.level[l.var().index() as usize]
    }

    /// Adds a clause. Clauses are only added at the root level, so literals
    /// fixed there are simplified away immediately.
    pub fn add_clause(&mut self, lits: &[Lit]) {
        self.cancel_until(0);
        let clause = Clause::new(lits.iter().copied());
        self.reserve_vars(clause.max_var());
        if !self.ok || clause.is_tautology() {
            return;
        }
        let mut kept = Vec::with_capacity(clause.len());
        for l in clause.iter() {
            match self.lit_value(l) {
                Value::True if self.var_level(l) == 0 => return,
                Value::False if self.var_level(l) == 0 => {}
                _ => kept.push(l),
            }
        }
        match kept.len() {
            0 => self.ok = false,
            1 => self.enqueue(kept[0], None),
            _ => {
                self.attach(kept, false);
            }
        }
    }

    fn attach(&mut self, lits: Vec<Lit>, learnt: bool) -> u32 {
        let cref = self.clauses.len() as u32;
        let (a, b) = (lits[0], lits[1]);
        self.watches[a.code()].push(Watcher { cref, blocker: b });
        self.watches[b.code()].push(Watcher { cref, blocker: a });
        self.clauses.push(ClauseData { lits, learnt });
        cref
    }

    fn enqueue(&mut self, l: Lit, reason: Option<u32>) {
        let v = l.var().index() as usize;
        debug_assert_eq!(self.assigns[v], Value::Undef);
        self.assigns[v] = if l.is_positive() {
            Value::True
        } else {
            Value::False
        };
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    fn new_decision_level(&mut self) {
        self.trail_lim.push(self.trail.len());
    }

    fn cancel_until(&mut self, level: u32) {
        if self.decision_level() <= level {
            return;
        }
        let lim = self.trail_lim[level as usize];
        for i in (lim..self.trail.len()).rev() {
            let l = self.trail[i];
            let v = l.var().index();
            self.assigns[v as usize] = Value::Undef;
            self.reason[v as usize] = None;
            self.phase[v as usize] = l.is_positive();
            self.heap.insert(v, &self.activity);
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(level as usize);
        self.qhead = self.qhead.min(lim);
    }

    /// Unit propagation. Returns a conflicting clause, if any.
    fn propagate(&mut self) -> Option<u32> {
        let mut conflict = None;
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[false_lit.code()]);
            let mut i = 0;
            let mut j = 0;
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.lit_value(w.blocker) == Value::True {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let cref = w.cref as usize;
                {
                    let lits = &mut self.clauses[cref].lits;
                    if lits[0] == false_lit {
                        lits.swap(0, 1);
                    }
                }
                let first = self.clauses[cref].lits[0];
                let w = Watcher {
                    cref: w.cref,
                    blocker: first,
                };
                if self.lit_value(first) == Value::True {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                // look for a new literal to watch
                let len = self.clauses[cref].lits.len();
                let mut moved = false;
                for k in 2..len {
                    let l = self.clauses[cref].lits[k];
                    if self.lit_value(l) != Value::False {
                        self.clauses[cref].lits.swap(1, k);
                        self.watches[l.code()].push(w);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = w;
                j += 1;
                match self.lit_value(first) {
                    Value::False => {
                        conflict = Some(w.cref);
                        self.qhead = self.trail.len();
                        while i < ws.len() {
                            ws[j] = ws[i];
                            j += 1;
                            i += 1;
                        }
                    }
                    _ => self.enqueue(first, Some(w.cref)),
                }
            }
            ws.truncate(j);
            self.watches[false_lit.code()] = ws;
            if conflict.is_some() {
                break;
            }
        }
        conflict
    }

    fn bump(&mut self, v: u32) {
        self.activity[v as usize] += self.var_inc;
        if self.activity[v as usize] > 1e100 {
            for a in self.activity.iter_mut() {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.increased(v, &self.activity);
    }

    /// First-UIP conflict analysis. Returns the learnt clause (asserting
    /// literal first) and the backjump level.
    fn analyze(&mut self, mut confl: u32) -> (Vec<Lit>, u32) {
        let mut learnt: Vec<Lit> = vec![Lit::new(Var::new(1), true)];
        let mut path = 0usize;
        let mut p: Option<Lit> = None;
        let mut index = self.trail.len();
        let current = self.decision_level();
        loop {
            let lits = self.clauses[confl as usize].lits.clone();
            let start = usize::from(p.is_some());
            for &q in &lits[start..] {
                let v = q.var().index();
                if !self.seen[v as usize] && self.level[v as usize] > 0 {
                    self.seen[v as usize] = true;
                    self.bump(v);
                    if self.level[v as usize] >= current {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            // next marked literal on the trail
            loop {
                index -= 1;
                if self.seen[self.trail[index].var().index() as usize] {
                    break;
                }
            }
            let lit = self.trail[index];
            p = Some(lit);
            self.seen[lit.var().index() as usize] = false;
            path -= 1;
            if path == 0 {
                break;
            }
            confl = self.reason[lit.var().index() as usize].expect("implied literal has a reason");
        }
        learnt[0] = !p.expect("uip found");
        for l in &learnt[1..] {
            self.seen[l.var().index() as usize] = false;
        }
        let backjump = if learnt.len() == 1 {
            0
        } else {
            let (max_i, _) = learnt
                .iter()
                .enumerate()
                .skip(1)
                .max_by_key(|(_, l)| self.var_level(**l))
                .expect("at least two literals");
            learnt.swap(1, max_i);
            self.var_level(learnt[1])
        };
        (learnt, backjump)
    }

    /// Collects the assumptions responsible for `p` being false.
    fn analyze_final(&mut self, p: Lit) -> Vec<Lit> {
        let mut failed = vec![p];
        if self.decision_level() == 0 || self.var_level(p) == 0 {
            return failed;
        }
        self.seen[p.var().index() as usize] = true;
        for i in (self.trail_lim[0]..self.trail.len()).rev() {
            let l = self.trail[i];
            let v = l.var().index() as usize;
            if !self.seen[v] {
                continue;
            }
            match self.reason[v] {
                None => {
                    debug_assert!(self.level[v] > 0);
                    failed.push(l);
                }
                Some(cref) => {
                    for k in 1..self.clauses[cref as usize].lits.len() {
                        let q = self.clauses[cref as usize].lits[k];
                        if self.level[q.var().index() as usize] > 0 {
                            self.seen[q.var().index() as usize] = true;
                        }
                    }
                }
            }
            self.seen[v] = false;
        }
        self.seen[p.var().index() as usize] = false;
        failed.sort_unstable();
        failed.dedup();
        failed
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        while let Some(v) = self.heap.pop(&self.activity) {
            if self.assigns[v as usize] == Value::Undef {
                return Some(Lit::new(Var::new(v), self.phase[v as usize]));
            }
        }
        None
    }

    fn search(
        &mut self,
        assumptions: &[Lit],
        restart_limit: u64,
        conflicts_at_start: u64,
        failed: &mut Vec<Lit>,
    ) -> Result<Search> {
        let mut local_conflicts = 0u64;
        loop {
            if let Some(confl) = self.propagate() {
                self.stats.conflicts += 1;
                local_conflicts += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    return Ok(Search::Unsat);
                }
                let (learnt, backjump) = self.analyze(confl);
                self.cancel_until(backjump);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let first = learnt[0];
                    let cref = self.attach(learnt, true);
                    self.stats.learnt_clauses += 1;
                    self.enqueue(first, Some(cref));
                }
                self.var_inc /= self.config.var_decay;
                if let Some(budget) = self.config.conflict_budget {
                    if self.stats.conflicts - conflicts_at_start >= budget {
                        return Err(Error::ResourceLimit {
                            conflicts: self.stats.conflicts - conflicts_at_start,
                        });
                    }
                }
                continue;
            }
            if local_conflicts >= restart_limit {
                self.cancel_until(0);
                return Ok(Search::Restart);
            }
            let mut next = None;
            while (self.decision_level() as usize) < assumptions.len() {
                let a = assumptions[self.decision_level() as usize];
                match self.lit_value(a) {
                    Value::True => self.new_decision_level(),
                    Value::False => {
                        *failed = self.analyze_final(a);
                        return Ok(Search::Unsat);
                    }
                    Value::Undef => {
                        next = Some(a);
                        break;
                    }
                }
            }
            let next = match next {
                Some(l) => l,
                None => match self.pick_branch() {
                    Some(l) => {
                        self.stats.decisions += 1;
                        l
                    }
                    None => return Ok(Search::Sat),
                },
            };
            self.new_decision_level();
            self.enqueue(next, None);
        }
    }

    /// Decides the clause database together with `assumptions`.
    ///
    /// Deterministic for a given history of calls. Fails only when the
    /// conflict budget runs out; the handle remains usable afterwards.
    pub fn solve_under_assumptions(&mut self, assumptions: &[Lit]) -> Result<SolveOutcome> {
        self.stats.solves += 1;
        self.cancel_until(0);
        if let Some(max) = assumptions.iter().map(|l| l.var().index()).max() {
            self.reserve_vars(max);
        }
        if !self.ok {
            return Ok(SolveOutcome::Unsat { failed: Vec::new() });
        }
        let start = self.stats.conflicts;
        let mut limit = self.config.restart_first as f64;
        let mut failed = Vec::new();
        let result = loop {
            match self.search(assumptions, limit as u64, start, &mut failed) {
                Ok(Search::Restart) => {
                    self.stats.restarts += 1;
                    limit *= self.config.restart_factor;
                }
                Ok(Search::Sat) => {
                    let values = (1..=self.num_vars)
                        .map(|v| self.assigns[v as usize] == Value::True)
                        .collect();
                    break Ok(SolveOutcome::Sat(Assignment::from_bools(values)));
                }
                Ok(Search::Unsat) => {
                    break Ok(SolveOutcome::Unsat {
                        failed: std::mem::take(&mut failed),
                    });
                }
                Err(e) => break Err(e),
            }
        };
        self.cancel_until(0);
        result
    }

    /// Original (non-learnt) clauses in DIMACS, plus root-level units.
    pub fn dump_dimacs(&self) -> String {
        let originals: Vec<&ClauseData> = self.clauses.iter().filter(|c| !c.learnt).collect();
        let root = if self.trail_lim.is_empty() {
            self.trail.len()
        } else {
            self.trail_lim[0]
        };
        let mut out = String::new();
        let count = originals.len() + root + usize::from(!self.ok);
        let _ = writeln!(out, "p cnf {} {}", self.num_vars, count);
        for l in &self.trail[..root] {
            let _ = writeln!(out, "{l} 0");
        }
        for c in originals {
            for l in &c.lits {
                let _ = write!(out, "{l} ");
            }
            out.push_str("0\n");
        }
        if !self.ok {
            out.push_str("0\n");
        }
        out
    }
}

impl SatOracle for Solver {
    fn reserve_vars(&mut self, n: u32) {
        Solver::reserve_vars(self, n)
    }

    fn num_vars(&self) -> u32 {
        self.num_vars
    }

    fn add_clause(&mut self, lits: &[Lit]) {
        Solver::add_clause(self, lits)
    }

    fn solve_under_assumptions(&mut self, assumptions: &[Lit]) -> Result<SolveOutcome> {
        Solver::solve_under_assumptions(self, assumptions)
    }
}
