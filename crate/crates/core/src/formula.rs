//! Clauses, weighted CNF, labelled CNF and assignments.
//!
//! Every type here is a plain value. Clauses and label-sets are kept in a
//! canonical sorted form so that structural equality coincides with set
//! equality, which the labelled-CNF code relies on for deduplication.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Not;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A propositional variable. Indices start at 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Var(u32);

impl Var {
    /// Panics if `index` is zero.
    pub fn new(index: u32) -> Var {
        assert!(index >= 1, "variable indices start at 1");
        Var(index)
    }

    pub fn index(self) -> u32 {
        self.0
    }

    pub fn pos(self) -> Lit {
        Lit::new(self, true)
    }

    pub fn neg(self) -> Lit {
        Lit::new(self, false)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

/// A literal, packed as `2 * var + negated`. Ordering follows the variable
/// index first, positive before negative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: Var, positive: bool) -> Lit {
        Lit(var.0 << 1 | u32::from(!positive))
    }

    /// Builds a literal from its DIMACS form. Panics on zero.
    pub fn from_dimacs(value: i64) -> Lit {
        assert!(value != 0, "0 is not a DIMACS literal");
        let var = u32::try_from(value.unsigned_abs()).expect("variable index out of range");
        Lit::new(Var::new(var), value > 0)
    }

    pub fn to_dimacs(self) -> i64 {
        let v = i64::from(self.var().0);
        if self.is_positive() {
            v
        } else {
            -v
        }
    }

    pub fn var(self) -> Var {
        Var(self.0 >> 1)
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    /// Dense index usable for per-literal tables (`2 * var + negated`).
    pub fn code(self) -> usize {
        self.0 as usize
    }
}

impl Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// A disjunction of literals, stored sorted and without duplicates.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Clause(Vec<Lit>);

impl Clause {
    pub fn new<I: IntoIterator<Item = Lit>>(lits: I) -> Clause {
        let mut lits: Vec<Lit> = lits.into_iter().collect();
        lits.sort_unstable();
        lits.dedup();
        Clause(lits)
    }

    pub fn from_dimacs(lits: &[i64]) -> Clause {
        Clause::new(lits.iter().map(|&l| Lit::from_dimacs(l)))
    }

    pub fn empty() -> Clause {
        Clause(Vec::new())
    }

    pub fn lits(&self) -> &[Lit] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, lit: Lit) -> bool {
        self.0.binary_search(&lit).is_ok()
    }

    /// True when the clause contains some literal together with its negation.
    /// Complementary literals are adjacent in the canonical order.
    pub fn is_tautology(&self) -> bool {
        self.0.windows(2).any(|w| w[0] == !w[1])
    }

    /// Non-strict inclusion.
    pub fn is_subset_of(&self, other: &Clause) -> bool {
        sorted_subset(&self.0, &other.0)
    }

    pub fn without(&self, lit: Lit) -> Clause {
        Clause(self.0.iter().copied().filter(|&l| l != lit).collect())
    }

    pub fn with(&self, lit: Lit) -> Clause {
        let mut lits = self.0.clone();
        if let Err(pos) = lits.binary_search(&lit) {
            lits.insert(pos, lit);
        }
        Clause(lits)
    }

    pub fn max_var(&self) -> u32 {
        self.0.last().map_or(0, |l| l.var().index())
    }

    pub fn is_satisfied_by(&self, assignment: &Assignment) -> bool {
        self.0.iter().any(|&l| assignment.lit_value(l))
    }

    pub fn iter(&self) -> impl Iterator<Item = Lit> + '_ {
        self.0.iter().copied()
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{l}")?;
        }
        f.write_str(")")
    }
}

pub(crate) fn sorted_subset<T: Ord>(small: &[T], big: &[T]) -> bool {
    if small.len() > big.len() {
        return false;
    }
    let mut it = big.iter();
    'outer: for x in small {
        for y in it.by_ref() {
            match y.cmp(x) {
                std::cmp::Ordering::Less => continue,
                std::cmp::Ordering::Equal => continue 'outer,
                std::cmp::Ordering::Greater => return false,
            }
        }
        return false;
    }
    true
}

/// Cost of falsifying a clause: a positive integer or the hard marker.
///
/// `Hard` orders above every soft weight and never takes part in sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Weight {
    Soft(u64),
    Hard,
}

impl Weight {
    pub fn soft(self) -> Option<u64> {
        match self {
            Weight::Soft(w) => Some(w),
            Weight::Hard => None,
        }
    }
}

/// Sums weights, failing on overflow.
pub fn checked_weight_sum<I: IntoIterator<Item = u64>>(weights: I) -> Result<u64> {
    weights
        .into_iter()
        .try_fold(0u64, |acc, w| acc.checked_add(w))
        .ok_or(Error::WeightOverflow)
}

/// A weighted partial CNF. Soft clauses are addressed by their 1-based
/// position in `soft`; duplicates are allowed and stay distinct.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Wcnf {
    pub num_vars: u32,
    pub hard: Vec<Clause>,
    pub soft: Vec<(Clause, u64)>,
}

impl Wcnf {
    pub fn new(num_vars: u32) -> Wcnf {
        Wcnf {
            num_vars,
            ..Wcnf::default()
        }
    }

    pub fn add_hard(&mut self, clause: Clause) {
        self.num_vars = self.num_vars.max(clause.max_var());
        self.hard.push(clause);
    }

    /// Panics on a zero weight.
    pub fn add_soft(&mut self, clause: Clause, weight: u64) {
        assert!(weight >= 1, "soft weights are positive");
        self.num_vars = self.num_vars.max(clause.max_var());
        self.soft.push((clause, weight));
    }

    pub fn total_soft_weight(&self) -> Result<u64> {
        checked_weight_sum(self.soft.iter().map(|(_, w)| *w))
    }

    pub fn is_unweighted(&self) -> bool {
        self.soft.iter().all(|(_, w)| *w == 1)
    }

    pub fn hard_satisfied_by(&self, assignment: &Assignment) -> bool {
        self.hard.iter().all(|c| c.is_satisfied_by(assignment))
    }

    /// 1-based indices of the soft clauses falsified by `assignment`.
    pub fn falsified_soft(&self, assignment: &Assignment) -> BTreeSet<u32> {
        self.soft
            .iter()
            .enumerate()
            .filter(|(_, (c, _))| !c.is_satisfied_by(assignment))
            .map(|(i, _)| i as u32 + 1)
            .collect()
    }

    pub fn cost_of(&self, assignment: &Assignment) -> Result<u64> {
        checked_weight_sum(
            self.soft
                .iter()
                .filter(|(c, _)| !c.is_satisfied_by(assignment))
                .map(|(_, w)| *w),
        )
    }

    /// All clauses, weights disregarded.
    pub fn clauses(&self) -> impl Iterator<Item = &Clause> {
        self.hard.iter().chain(self.soft.iter().map(|(c, _)| c))
    }
}

/// Label identifier. Labels live in their own namespace, separate from
/// variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Label(u32);

impl Label {
    /// Panics if `id` is zero.
    pub fn new(id: u32) -> Label {
        assert!(id >= 1, "label ids start at 1");
        Label(id)
    }

    pub fn id(self) -> u32 {
        self.0
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Sorted, duplicate-free set of labels. The empty set marks a clause that
/// can never be removed.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LabelSet(Vec<Label>);

impl LabelSet {
    pub fn new<I: IntoIterator<Item = Label>>(labels: I) -> LabelSet {
        let mut v: Vec<Label> = labels.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        LabelSet(v)
    }

    pub fn from_ids(ids: &[u32]) -> LabelSet {
        LabelSet::new(ids.iter().map(|&i| Label::new(i)))
    }

    pub fn empty() -> LabelSet {
        LabelSet(Vec::new())
    }

    pub fn singleton(label: Label) -> LabelSet {
        LabelSet(vec![label])
    }

    pub fn labels(&self) -> &[Label] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, label: Label) -> bool {
        self.0.binary_search(&label).is_ok()
    }

    pub fn is_subset_of(&self, other: &LabelSet) -> bool {
        sorted_subset(&self.0, &other.0)
    }

    pub fn is_contained_in(&self, set: &BTreeSet<Label>) -> bool {
        self.0.iter().all(|l| set.contains(l))
    }

    pub fn is_disjoint_from(&self, set: &BTreeSet<Label>) -> bool {
        !self.0.iter().any(|l| set.contains(l))
    }

    pub fn union(&self, other: &LabelSet) -> LabelSet {
        LabelSet::new(self.0.iter().chain(other.0.iter()).copied())
    }

    pub fn iter(&self) -> impl Iterator<Item = Label> + '_ {
        self.0.iter().copied()
    }
}

impl fmt::Display for LabelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{l}")?;
        }
        f.write_str("}")
    }
}

/// A clause together with the labels that can remove it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LabelledClause {
    pub clause: Clause,
    pub labels: LabelSet,
}

impl LabelledClause {
    pub fn new(clause: Clause, labels: LabelSet) -> LabelledClause {
        LabelledClause { clause, labels }
    }

    pub fn hard(clause: Clause) -> LabelledClause {
        LabelledClause::new(clause, LabelSet::empty())
    }
}

impl fmt::Display for LabelledClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}^{}", self.clause, self.labels)
    }
}

/// A weighted labelled CNF formula.
///
/// Clauses form a set: two entries are the same only if both the clause and
/// the label-set agree. The weight map may hold entries for labels that no
/// longer occur in any clause (subsumption can drop them); such labels are
/// never charged.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Lcnf {
    pub num_vars: u32,
    clauses: BTreeSet<LabelledClause>,
    weights: BTreeMap<Label, u64>,
}

impl Lcnf {
    /// Builds a formula, checking that every used label has a positive weight.
    pub fn new<I>(clauses: I, weights: BTreeMap<Label, u64>) -> Result<Lcnf>
    where
        I: IntoIterator<Item = LabelledClause>,
    {
        let mut phi = Lcnf {
            num_vars: 0,
            clauses: BTreeSet::new(),
            weights,
        };
        if let Some((l, _)) = phi.weights.iter().find(|(_, w)| **w == 0) {
            return Err(Error::InvalidInput(format!("label {l} has weight 0")));
        }
        for c in clauses {
            phi.try_insert(c)?;
        }
        Ok(phi)
    }

    /// Convenience constructor where every label weighs 1.
    pub fn unit_weights<I>(clauses: I) -> Lcnf
    where
        I: IntoIterator<Item = LabelledClause>,
    {
        let clauses: Vec<LabelledClause> = clauses.into_iter().collect();
        let weights = clauses
            .iter()
            .flat_map(|c| c.labels.iter())
            .map(|l| (l, 1))
            .collect();
        Lcnf::new(clauses, weights).expect("all labels weighted")
    }

    pub(crate) fn from_parts(
        num_vars: u32,
        clauses: BTreeSet<LabelledClause>,
        weights: BTreeMap<Label, u64>,
    ) -> Lcnf {
        debug_assert!(clauses
            .iter()
            .flat_map(|c| c.labels.iter())
            .all(|l| weights.contains_key(&l)));
        Lcnf {
            num_vars,
            clauses,
            weights,
        }
    }

    fn try_insert(&mut self, c: LabelledClause) -> Result<bool> {
        if let Some(l) = c.labels.iter().find(|l| !self.weights.contains_key(l)) {
            return Err(Error::InvalidInput(format!("label {l} has no weight")));
        }
        self.num_vars = self.num_vars.max(c.clause.max_var());
        Ok(self.clauses.insert(c))
    }

    /// Inserts a clause whose labels are already weighted. Returns false if
    /// an identical labelled clause was present.
    pub fn insert(&mut self, c: LabelledClause) -> Result<bool> {
        self.try_insert(c)
    }

    pub fn remove(&mut self, c: &LabelledClause) -> bool {
        self.clauses.remove(c)
    }

    pub fn contains(&self, c: &LabelledClause) -> bool {
        self.clauses.contains(c)
    }

    pub fn clauses(&self) -> impl Iterator<Item = &LabelledClause> {
        self.clauses.iter()
    }

    pub fn clause_set(&self) -> &BTreeSet<LabelledClause> {
        &self.clauses
    }

    /// Number of labelled clauses.
    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn weights(&self) -> &BTreeMap<Label, u64> {
        &self.weights
    }

    pub fn weight(&self, label: Label) -> Option<u64> {
        self.weights.get(&label).copied()
    }

    /// Labels occurring in at least one clause.
    pub fn labels(&self) -> BTreeSet<Label> {
        self.clauses.iter().flat_map(|c| c.labels.iter()).collect()
    }

    /// Distinct clause parts, labels dropped.
    pub fn clause_parts(&self) -> BTreeSet<Clause> {
        self.clauses.iter().map(|c| c.clause.clone()).collect()
    }

    pub fn max_label_set(&self) -> usize {
        self.clauses.iter().map(|c| c.labels.len()).max().unwrap_or(0)
    }

    /// The subformula made of clauses whose label-set lies inside `m`.
    pub fn induced_subformula(&self, m: &BTreeSet<Label>) -> Lcnf {
        let clauses = self
            .clauses
            .iter()
            .filter(|c| c.labels.is_contained_in(m))
            .cloned()
            .collect();
        Lcnf::from_parts(self.num_vars, clauses, self.weights.clone())
    }

    /// Sum of the weights of `r`. Labels without a weight entry are an error.
    pub fn cost_of_labels<'a, I>(&self, r: I) -> Result<u64>
    where
        I: IntoIterator<Item = &'a Label>,
    {
        let mut total = 0u64;
        for l in r {
            let w = self
                .weights
                .get(l)
                .ok_or_else(|| Error::InvalidInput(format!("label {l} has no weight")))?;
            total = total.checked_add(*w).ok_or(Error::WeightOverflow)?;
        }
        Ok(total)
    }

    /// True if `assignment` satisfies every clause whose labels avoid `removed`.
    pub fn models_without(&self, assignment: &Assignment, removed: &BTreeSet<Label>) -> bool {
        self.clauses
            .iter()
            .filter(|c| c.labels.is_disjoint_from(removed))
            .all(|c| c.clause.is_satisfied_by(assignment))
    }

    /// One line per clause: `lits 0 | labels`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.clauses {
            for l in c.clause.iter() {
                out.push_str(&format!("{l} "));
            }
            out.push_str("0 |");
            for l in c.labels.iter() {
                out.push_str(&format!(" {l}"));
            }
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for Lcnf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, c) in self.clauses.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str("}")
    }
}

/// Labels the i-th soft clause with `{i}` and hard clauses with the empty set.
pub fn lcnf_from_wcnf(f: &Wcnf) -> Lcnf {
    let mut clauses = BTreeSet::new();
    let mut weights = BTreeMap::new();
    for c in &f.hard {
        clauses.insert(LabelledClause::hard(c.clone()));
    }
    for (i, (c, w)) in f.soft.iter().enumerate() {
        let label = Label::new(i as u32 + 1);
        weights.insert(label, *w);
        clauses.insert(LabelledClause::new(c.clone(), LabelSet::singleton(label)));
    }
    Lcnf::from_parts(f.num_vars, clauses, weights)
}

/// Total truth assignment over variables `1..=len`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Assignment {
    values: Vec<bool>,
}

impl Assignment {
    /// All variables false.
    pub fn all_false(num_vars: u32) -> Assignment {
        Assignment {
            values: vec![false; num_vars as usize],
        }
    }

    pub fn from_bools(values: Vec<bool>) -> Assignment {
        Assignment { values }
    }

    /// Assignment whose variable `i` is bit `i - 1` of `bits`.
    pub fn from_bits(num_vars: u32, bits: u64) -> Assignment {
        Assignment {
            values: (0..num_vars).map(|i| bits >> i & 1 == 1).collect(),
        }
    }

    pub fn num_vars(&self) -> u32 {
        self.values.len() as u32
    }

    /// Panics if `var` lies outside the universe.
    pub fn value(&self, var: Var) -> bool {
        self.values[var.index() as usize - 1]
    }

    pub fn lit_value(&self, lit: Lit) -> bool {
        self.value(lit.var()) == lit.is_positive()
    }

    pub fn set(&mut self, var: Var, value: bool) {
        self.extend_to(var.index());
        self.values[var.index() as usize - 1] = value;
    }

    /// Makes `lit` true.
    pub fn satisfy(&mut self, lit: Lit) {
        self.set(lit.var(), lit.is_positive());
    }

    /// Grows the universe, new variables false.
    pub fn extend_to(&mut self, num_vars: u32) {
        if self.values.len() < num_vars as usize {
            self.values.resize(num_vars as usize, false);
        }
    }

    pub fn truncated(&self, num_vars: u32) -> Assignment {
        let mut a = self.clone();
        a.values.truncate(num_vars as usize);
        a.extend_to(num_vars);
        a
    }

    pub fn as_bools(&self) -> &[bool] {
        &self.values
    }

    /// Signed DIMACS literals, one per variable.
    pub fn to_dimacs(&self) -> Vec<i64> {
        self.values
            .iter()
            .enumerate()
            .map(|(i, &b)| if b { i as i64 + 1 } else { -(i as i64 + 1) })
            .collect()
    }
}

/// Result of a MaxSAT computation.
///
/// For a weighted CNF `falsified` holds the 1-based indices of the falsified
/// soft clauses; for a labelled CNF it holds the ids of the removed labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaxSatSolution {
    pub model: Assignment,
    pub cost: u64,
    pub falsified: BTreeSet<u32>,
}

impl MaxSatSolution {
    pub fn removed_labels(&self) -> BTreeSet<Label> {
        self.falsified.iter().map(|&i| Label::new(i)).collect()
    }
}
