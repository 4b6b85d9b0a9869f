//! Resolution and subsumption preprocessing on labelled CNF.
//!
//! The atomic steps follow the labelled rules: a resolvent carries the union
//! of its parents' labels, and `C1^L1` subsumes `C2^L2` only if `C1 ⊊ C2`
//! and `L1 ⊆ L2`. Under these rules every step keeps the set of minimal
//! correction sets of the formula unchanged, so MaxSAT solutions survive.
//!
//! [`preprocess_lcnf`] runs the steps in rounds over an occurrence-indexed
//! copy of the formula; the standalone functions operate on [`Lcnf`]
//! values directly and serve as the reference semantics.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::{Assignment, Clause, Label, LabelledClause, Lcnf, Lit, Var};

/// Resolves `c1` (containing `x`) with `c2` (containing `¬x`).
pub fn l_resolve(c1: &LabelledClause, c2: &LabelledClause, x: Var) -> Result<LabelledClause> {
    if !c1.clause.contains(x.pos()) || !c2.clause.contains(x.neg()) {
        return Err(Error::InvalidInput(format!(
            "cannot resolve {c1} and {c2} on {x}"
        )));
    }
    Ok(resolve_unchecked(c1, c2, x))
}

fn resolve_unchecked(c1: &LabelledClause, c2: &LabelledClause, x: Var) -> LabelledClause {
    let clause = Clause::new(
        c1.clause
            .iter()
            .filter(|&l| l != x.pos())
            .chain(c2.clause.iter().filter(|&l| l != x.neg())),
    );
    LabelledClause::new(clause, c1.labels.union(&c2.labels))
}

/// Non-tautological resolvents of all clause pairs on `x`, deduplicated.
fn resolvents<'a, I, J>(pos: I, neg: J, x: Var) -> BTreeSet<LabelledClause>
where
    I: IntoIterator<Item = &'a LabelledClause>,
    J: IntoIterator<Item = &'a LabelledClause> + Clone,
{
    let mut out = BTreeSet::new();
    for p in pos {
        for n in neg.clone() {
            let r = resolve_unchecked(p, n, x);
            if !r.clause.is_tautology() {
                out.insert(r);
            }
        }
    }
    out
}

/// Eliminates `x` by clause distribution, unconditionally.
pub fn l_ve(phi: &Lcnf, x: Var) -> Lcnf {
    let pos: Vec<&LabelledClause> = phi.clauses().filter(|c| c.clause.contains(x.pos())).collect();
    let neg: Vec<&LabelledClause> = phi.clauses().filter(|c| c.clause.contains(x.neg())).collect();
    let mut clauses: BTreeSet<LabelledClause> = phi
        .clauses()
        .filter(|c| !c.clause.contains(x.pos()) && !c.clause.contains(x.neg()))
        .cloned()
        .collect();
    clauses.extend(resolvents(pos.iter().copied(), neg.iter().copied(), x));
    Lcnf::from_parts(phi.num_vars, clauses, phi.weights().clone())
}

/// [`l_ve`] if it strictly shrinks the number of labelled clauses.
pub fn l_bve(phi: &Lcnf, x: Var) -> Lcnf {
    let eliminated = l_ve(phi, x);
    if eliminated.len() < phi.len() {
        eliminated
    } else {
        phi.clone()
    }
}

/// Labelled subsumption: strict clause inclusion and label inclusion.
pub fn subsumes(c1: &LabelledClause, c2: &LabelledClause) -> bool {
    c1.clause.len() < c2.clause.len()
        && c1.clause.is_subset_of(&c2.clause)
        && c1.labels.is_subset_of(&c2.labels)
}

/// Removes `c2` if `c1` subsumes it.
pub fn l_sub(phi: &Lcnf, c1: &LabelledClause, c2: &LabelledClause) -> Lcnf {
    let mut out = phi.clone();
    if phi.contains(c1) && subsumes(c1, c2) {
        out.remove(c2);
    }
    out
}

/// If `c1 = (l ∨ A)^L1` and `c2 = (¬l ∨ B)^L2` with `A ⊊ B` and
/// `L1 ⊆ L2`, returns `B^L2`.
pub fn self_subsuming_strengthening(
    c1: &LabelledClause,
    c2: &LabelledClause,
) -> Option<LabelledClause> {
    if !c1.labels.is_subset_of(&c2.labels) || c1.clause.len() >= c2.clause.len() {
        return None;
    }
    let l = c1.clause.iter().find(|&l| c2.clause.contains(!l))?;
    let a = c1.clause.without(l);
    let b = c2.clause.without(!l);
    (a.len() < b.len() && a.is_subset_of(&b)).then(|| LabelledClause::new(b, c2.labels.clone()))
}

/// Replaces `c2` by its strengthening with `c1`, if the pattern applies.
pub fn l_ssr(phi: &Lcnf, c1: &LabelledClause, c2: &LabelledClause) -> Lcnf {
    let mut out = phi.clone();
    if !phi.contains(c1) || !phi.contains(c2) {
        return out;
    }
    if let Some(b) = self_subsuming_strengthening(c1, c2) {
        out.remove(c2);
        out.insert(b).expect("labels unchanged");
    }
    out
}

/// Clauses removed when `var` was eliminated, in elimination order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BveEntry {
    pub var: Var,
    pub clauses: Vec<LabelledClause>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BveRecord {
    pub entries: Vec<BveEntry>,
}

impl BveRecord {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn eliminated_vars(&self) -> Vec<Var> {
        self.entries.iter().map(|e| e.var).collect()
    }
}

/// Which passes to run and how long.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrepConfig {
    pub subsumption: bool,
    pub self_subsumption: bool,
    pub variable_elimination: bool,
    pub max_rounds: usize,
    /// A variable is left alone if eliminating it would create a resolvent
    /// with more labels than this.
    pub max_label_set: usize,
}

impl Default for PrepConfig {
    fn default() -> Self {
        PrepConfig {
            subsumption: true,
            self_subsumption: true,
            variable_elimination: true,
            max_rounds: 10,
            max_label_set: 32,
        }
    }
}

impl PrepConfig {
    /// No passes at all.
    pub fn none() -> Self {
        PrepConfig {
            subsumption: false,
            self_subsumption: false,
            variable_elimination: false,
            ..PrepConfig::default()
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PrepStats {
    pub rounds: usize,
    pub subsumed: usize,
    pub strengthened: usize,
    pub eliminated_vars: usize,
}

/// Occurrence-indexed working copy. Slots never change once filled; a
/// strengthened clause goes into a new slot. Occurrence lists are pruned
/// lazily.
struct Db {
    slots: Vec<Option<LabelledClause>>,
    index: HashMap<LabelledClause, usize>,
    occurs: Vec<Vec<usize>>,
}

impl Db {
    fn new(phi: &Lcnf) -> Db {
        let mut db = Db {
            slots: Vec::new(),
            index: HashMap::new(),
            occurs: vec![Vec::new(); 2 * (phi.num_vars as usize + 1)],
        };
        for c in phi.clauses() {
            db.add(c.clone());
        }
        db
    }

    fn add(&mut self, c: LabelledClause) -> bool {
        if self.index.contains_key(&c) {
            return false;
        }
        let id = self.slots.len();
        for l in c.clause.iter() {
            if l.code() >= self.occurs.len() {
                self.occurs.resize(l.code() + 2, Vec::new());
            }
            self.occurs[l.code()].push(id);
        }
        self.index.insert(c.clone(), id);
        self.slots.push(Some(c));
        true
    }

    fn remove(&mut self, id: usize) -> Option<LabelledClause> {
        let c = self.slots[id].take()?;
        self.index.remove(&c);
        Some(c)
    }

    fn get(&self, id: usize) -> Option<&LabelledClause> {
        self.slots[id].as_ref()
    }

    fn live_ids(&self) -> Vec<usize> {
        (0..self.slots.len()).filter(|&i| self.slots[i].is_some()).collect()
    }

    fn occurrences(&mut self, lit: Lit) -> Vec<usize> {
        let Some(list) = self.occurs.get_mut(lit.code()) else {
            return Vec::new();
        };
        list.retain(|&id| self_slot_alive(&self.slots, id));
        list.clone()
    }

    fn occurrence_count(&self, lit: Lit) -> usize {
        self.occurs
            .get(lit.code())
            .map_or(0, |l| l.iter().filter(|&&id| self.slots[id].is_some()).count())
    }

    fn fingerprint(&self) -> u64 {
        let set: BTreeSet<&LabelledClause> = self.slots.iter().flatten().collect();
        let mut h = DefaultHasher::new();
        set.hash(&mut h);
        h.finish()
    }

    fn into_lcnf(self, num_vars: u32, weights: BTreeMap<Label, u64>) -> Lcnf {
        Lcnf::from_parts(num_vars, self.slots.into_iter().flatten().collect(), weights)
    }
}

fn self_slot_alive(slots: &[Option<LabelledClause>], id: usize) -> bool {
    slots[id].is_some()
}

/// Candidates for a clause: those sharing its rarest literal. For the empty
/// clause every other clause is a candidate.
fn subsumption_candidates(db: &mut Db, c: &LabelledClause) -> Vec<usize> {
    match c.clause.iter().min_by_key(|&l| db.occurrence_count(l)) {
        Some(l) => db.occurrences(l),
        None => db.live_ids(),
    }
}

fn subsumption_pass(db: &mut Db, stats: &mut PrepStats) {
    let mut ids = db.live_ids();
    ids.sort_by_key(|&i| db.get(i).map_or(0, |c| c.clause.len()));
    for id in ids {
        let Some(c1) = db.get(id).cloned() else {
            continue;
        };
        for other in subsumption_candidates(db, &c1) {
            if other == id {
                continue;
            }
            if db.get(other).is_some_and(|c2| subsumes(&c1, c2)) {
                db.remove(other);
                stats.subsumed += 1;
            }
        }
    }
}

fn self_subsumption_fixpoint(db: &mut Db, stats: &mut PrepStats) {
    loop {
        let mut changed = false;
        for id in db.live_ids() {
            let Some(c1) = db.get(id).cloned() else {
                continue;
            };
            for l in c1.clause.iter() {
                for other in db.occurrences(!l) {
                    if other == id {
                        continue;
                    }
                    let Some(c2) = db.get(other) else { continue };
                    if let Some(b) = self_subsuming_strengthening(&c1, c2) {
                        db.remove(other);
                        db.add(b);
                        stats.strengthened += 1;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
}

fn elimination_sweep(db: &mut Db, config: &PrepConfig, record: &mut BveRecord, stats: &mut PrepStats) {
    let mut vars: Vec<(usize, Var)> = (1..db.occurs.len() / 2)
        .map(|v| Var::new(v as u32))
        .map(|v| (db.occurrence_count(v.pos()) + db.occurrence_count(v.neg()), v))
        .filter(|(n, _)| *n > 0)
        .collect();
    vars.sort_unstable();
    for (_, x) in vars {
        let pos_ids = db.occurrences(x.pos());
        let neg_ids = db.occurrences(x.neg());
        if pos_ids.is_empty() && neg_ids.is_empty() {
            continue;
        }
        let pos: Vec<LabelledClause> = pos_ids.iter().filter_map(|&i| db.get(i).cloned()).collect();
        let neg: Vec<LabelledClause> = neg_ids.iter().filter_map(|&i| db.get(i).cloned()).collect();
        let removed = pos.len() + neg.len();
        let mut added: BTreeSet<LabelledClause> = BTreeSet::new();
        let mut viable = true;
        'pairs: for p in &pos {
            for n in &neg {
                let r = resolve_unchecked(p, n, x);
                if r.clause.is_tautology() || db.index.contains_key(&r) {
                    continue;
                }
                if r.labels.len() > config.max_label_set {
                    viable = false;
                    break 'pairs;
                }
                added.insert(r);
                if added.len() >= removed {
                    viable = false;
                    break 'pairs;
                }
            }
        }
        if !viable {
            continue;
        }
        for id in pos_ids.iter().chain(neg_ids.iter()) {
            db.remove(*id);
        }
        for r in added {
            db.add(r);
        }
        record.entries.push(BveEntry {
            var: x,
            clauses: pos.into_iter().chain(neg).collect(),
        });
        stats.eliminated_vars += 1;
    }
}

/// Runs rounds of subsumption, self-subsuming resolution and one variable
/// elimination sweep until a round leaves the formula unchanged or the
/// round limit is hit.
pub fn preprocess_lcnf(phi: &Lcnf, config: &PrepConfig) -> (Lcnf, BveRecord) {
    let (out, record, _) = preprocess_lcnf_with_stats(phi, config);
    (out, record)
}

pub fn preprocess_lcnf_with_stats(phi: &Lcnf, config: &PrepConfig) -> (Lcnf, BveRecord, PrepStats) {
    let mut db = Db::new(phi);
    let mut record = BveRecord::default();
    let mut stats = PrepStats::default();
    let any = config.subsumption || config.self_subsumption || config.variable_elimination;
    if any {
        for _ in 0..config.max_rounds {
            let before = db.fingerprint();
            stats.rounds += 1;
            if config.subsumption {
                subsumption_pass(&mut db, &mut stats);
            }
            if config.self_subsumption {
                self_subsumption_fixpoint(&mut db, &mut stats);
            }
            if config.variable_elimination {
                elimination_sweep(&mut db, config, &mut record, &mut stats);
            }
            if db.fingerprint() == before {
                break;
            }
        }
    }
    (db.into_lcnf(phi.num_vars, phi.weights().clone()), record, stats)
}

/// Assigns every eliminated variable, last eliminated first, so that the
/// recorded clauses avoiding `removed` are satisfied. `false` is tried first.
pub fn bve_reconstruct(record: &BveRecord, tau: &Assignment, removed: &BTreeSet<Label>) -> Assignment {
    let mut a = tau.clone();
    for entry in record.entries.iter().rev() {
        a.extend_to(entry.var.index());
        for c in &entry.clauses {
            a.extend_to(c.clause.max_var());
        }
        let relevant: Vec<&LabelledClause> = entry
            .clauses
            .iter()
            .filter(|c| c.labels.is_disjoint_from(removed))
            .collect();
        a.set(entry.var, false);
        if !relevant.iter().all(|c| c.clause.is_satisfied_by(&a)) {
            a.set(entry.var, true);
        }
    }
    a
}
