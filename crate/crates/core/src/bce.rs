//! Blocked clause elimination on the weighted formula.
//!
//! Blockedness is judged against every clause of the formula, hard and soft
//! alike, with weights ignored. Removed clauses go on a stack together with
//! the literal they were blocked on; [`bce_reconstruct`] replays that stack
//! backwards to lift an assignment of the reduced formula.

use std::collections::VecDeque;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::formula::{Assignment, Clause, Lit, Wcnf};

/// Where an eliminated clause came from. Indices are 0-based positions in
/// the input's `hard` / `soft` vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Origin {
    Hard { index: usize },
    Soft { index: usize, weight: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BceEntry {
    pub clause: Clause,
    pub blocking: Lit,
    pub origin: Origin,
}

/// Elimination stack plus the index map for the surviving soft clauses.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BceRecord {
    /// In elimination order.
    pub entries: Vec<BceEntry>,
    /// `soft_origin[i]` is the 0-based input index of the i-th surviving
    /// soft clause.
    pub soft_origin: Vec<usize>,
    pub hard_origin: Vec<usize>,
}

impl BceRecord {
    /// Sidecar text: one `<blocking literal> : <clause literals> 0` per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let _ = write!(out, "{} :", e.blocking);
            for l in e.clause.iter() {
                let _ = write!(out, " {l}");
            }
            out.push_str(" 0\n");
        }
        out
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BceConfig {
    /// Only soft clauses may be eliminated; hard clauses still take part in
    /// blockedness checks.
    pub soft_only: bool,
}

/// Whether `c` is blocked on `l` with respect to `f`: every resolvent of `c`
/// with a clause of `f` containing `¬l` is a tautology. A pure literal makes
/// this vacuously true.
pub fn is_blocked<'a, I>(f: I, c: &Clause, l: Lit) -> bool
where
    I: IntoIterator<Item = &'a Clause>,
{
    debug_assert!(c.contains(l));
    f.into_iter()
        .filter(|d| d.contains(!l))
        .all(|d| resolvent_is_tautology(c, d, l))
}

fn resolvent_is_tautology(c: &Clause, d: &Clause, l: Lit) -> bool {
    // (c \ {l}) ∪ (d \ {¬l}): a complementary pair either straddles the two
    // sides or sits inside one of them.
    if c.iter().any(|m| m != l && d.contains(!m)) {
        return true;
    }
    c.without(l).is_tautology() || d.without(!l).is_tautology()
}

struct Db<'a> {
    clauses: Vec<&'a Clause>,
    alive: Vec<bool>,
    eligible: Vec<bool>,
    occurs: Vec<Vec<usize>>,
}

impl<'a> Db<'a> {
    fn blocking_literal(&self, ci: usize) -> Option<Lit> {
        let c = self.clauses[ci];
        c.iter().find(|&l| {
            self.occurs[(!l).code()]
                .iter()
                .filter(|&&di| self.alive[di] && di != ci)
                .all(|&di| resolvent_is_tautology(c, self.clauses[di], l))
        })
    }
}

/// Removes blocked clauses until none is left. The result does not depend
/// on the order of removals.
pub fn bce_fixpoint(f: &Wcnf, config: BceConfig) -> (Wcnf, BceRecord) {
    let mut origins = Vec::with_capacity(f.hard.len() + f.soft.len());
    let mut clauses = Vec::with_capacity(origins.capacity());
    for (i, c) in f.hard.iter().enumerate() {
        origins.push(Origin::Hard { index: i });
        clauses.push(c);
    }
    for (i, (c, w)) in f.soft.iter().enumerate() {
        origins.push(Origin::Soft {
            index: i,
            weight: *w,
        });
        clauses.push(c);
    }
    let n = clauses.len();
    let mut occurs = vec![Vec::new(); 2 * (f.num_vars as usize + 1)];
    for (i, c) in clauses.iter().enumerate() {
        for l in c.iter() {
            if l.code() >= occurs.len() {
                occurs.resize(l.code() + 2, Vec::new());
            }
            occurs[l.code()].push(i);
        }
    }
    let eligible = origins
        .iter()
        .map(|o| !config.soft_only || matches!(o, Origin::Soft { .. }))
        .collect();
    let mut db = Db {
        clauses,
        alive: vec![true; n],
        eligible,
        occurs,
    };
    let mut record = BceRecord::default();

    let remove = |db: &mut Db, ci: usize, l: Lit, record: &mut BceRecord| {
        db.alive[ci] = false;
        record.entries.push(BceEntry {
            clause: db.clauses[ci].clone(),
            blocking: l,
            origin: origins[ci],
        });
    };

    // tautologies first; blocked on the first literal whose complement occurs
    for ci in 0..n {
        if db.eligible[ci] && db.clauses[ci].is_tautology() {
            let c = db.clauses[ci];
            let l = c.iter().find(|&l| c.contains(!l)).expect("tautology");
            remove(&mut db, ci, l, &mut record);
        }
    }

    let mut queue: VecDeque<usize> = (0..n).filter(|&i| db.alive[i] && db.eligible[i]).collect();
    let mut queued = vec![false; n];
    for &i in &queue {
        queued[i] = true;
    }
    while let Some(ci) = queue.pop_front() {
        queued[ci] = false;
        if !db.alive[ci] {
            continue;
        }
        if let Some(l) = db.blocking_literal(ci) {
            remove(&mut db, ci, l, &mut record);
            // clauses containing ¬m for m in the removed clause may now be blocked
            for m in db.clauses[ci].iter() {
                for &di in &db.occurs[(!m).code()] {
                    if db.alive[di] && db.eligible[di] && !queued[di] {
                        queued[di] = true;
                        queue.push_back(di);
                    }
                }
            }
        }
    }

    let mut out = Wcnf::new(f.num_vars);
    for (i, c) in f.hard.iter().enumerate() {
        if db.alive[i] {
            out.hard.push(c.clone());
            record.hard_origin.push(i);
        }
    }
    for (i, (c, w)) in f.soft.iter().enumerate() {
        if db.alive[f.hard.len() + i] {
            out.soft.push((c.clone(), *w));
            record.soft_origin.push(i);
        }
    }
    (out, record)
}

/// Lifts `tau` through the elimination stack, last eliminated first: a
/// falsified clause gets its blocking literal made true. Variables missing
/// from `tau` start out false.
pub fn bce_reconstruct(record: &BceRecord, tau: &Assignment, num_vars: u32) -> Assignment {
    let mut a = tau.clone();
    a.extend_to(num_vars);
    for e in record.entries.iter().rev() {
        a.extend_to(e.clause.max_var());
        if !e.clause.is_satisfied_by(&a) {
            a.satisfy(e.blocking);
        }
    }
    a
}
