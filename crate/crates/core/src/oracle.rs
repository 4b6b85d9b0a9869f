//! Brute-force ground truth for small instances.
//!
//! Nothing here touches the CDCL engine: satisfiability is decided by
//! walking the truth table, so the oracle stays independent of the code it
//! is used to check.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::formula::{
    Assignment, Clause, Label, LabelSet, LabelledClause, Lcnf, Lit, MaxSatSolution, Var, Wcnf,
};

pub const DEFAULT_VAR_CAP: u32 = 20;
pub const DEFAULT_SUBSET_CAP: usize = 16;
/// Largest label count any table may be built for (2^25 bits, 4 MiB).
pub const MAX_SUBSET_CAP: usize = 25;

/// A clause as two bit masks over the variables (variable i is bit i-1).
#[derive(Debug, Clone, Copy)]
struct Masks {
    pos: u64,
    neg: u64,
}

impl Masks {
    fn of(c: &Clause) -> Masks {
        let mut m = Masks { pos: 0, neg: 0 };
        for l in c.iter() {
            let bit = 1u64 << (l.var().index() - 1);
            if l.is_positive() {
                m.pos |= bit;
            } else {
                m.neg |= bit;
            }
        }
        m
    }

    fn satisfied(self, bits: u64) -> bool {
        bits & self.pos != 0 || !bits & self.neg != 0
    }
}

fn universe(num_vars: u32, clauses: impl IntoIterator<Item = u32>, cap: u32) -> Result<u32> {
    let n = clauses.into_iter().fold(num_vars, u32::max);
    if n > cap {
        return Err(Error::CapExceeded(format!("{n} variables, cap is {cap}")));
    }
    Ok(n)
}

/// Assignments in lexicographic order of (x1, x2, ...), false before true.
fn lex_bits(n: u32) -> impl Iterator<Item = u64> {
    (0..1u64 << n).map(move |k| {
        // x1 is the most significant position of the counter
        (0..n).fold(0u64, |acc, i| acc | ((k >> (n - 1 - i)) & 1) << i)
    })
}

/// Exhaustive weighted partial MaxSAT. `Ok(None)` means the hard clauses are
/// unsatisfiable. The witness is the lexicographically least optimal model.
pub fn brute_force_maxsat(f: &Wcnf) -> Result<Option<MaxSatSolution>> {
    brute_force_maxsat_with_cap(f, DEFAULT_VAR_CAP)
}

pub fn brute_force_maxsat_with_cap(f: &Wcnf, cap: u32) -> Result<Option<MaxSatSolution>> {
    let n = universe(f.num_vars, f.clauses().map(Clause::max_var), cap)?;
    f.total_soft_weight()?;
    let hard: Vec<Masks> = f.hard.iter().map(Masks::of).collect();
    let soft: Vec<(Masks, u64)> = f.soft.iter().map(|(c, w)| (Masks::of(c), *w)).collect();
    let mut best: Option<(u64, u64)> = None;
    for bits in lex_bits(n) {
        if !hard.iter().all(|m| m.satisfied(bits)) {
            continue;
        }
        let cost: u64 = soft
            .iter()
            .filter(|(m, _)| !m.satisfied(bits))
            .map(|(_, w)| w)
            .sum();
        if best.is_none_or(|(c, _)| cost < c) {
            best = Some((cost, bits));
        }
    }
    Ok(best.map(|(cost, bits)| {
        let model = Assignment::from_bits(n, bits);
        let falsified = f.falsified_soft(&model);
        MaxSatSolution {
            model,
            cost,
            falsified,
        }
    }))
}

/// Satisfiability of every induced subformula of a labelled CNF.
///
/// Labels are indexed by their position in `labels`; bit `m` of the table
/// tells whether the subformula induced by the labels in mask `m` is
/// satisfiable.
#[derive(Debug, Clone)]
pub struct SubsetTable {
    pub labels: Vec<Label>,
    sat: Vec<u64>,
}

// positions within a 64-bit word whose index has bit i clear, i < 6
const LOW_CLEAR: [u64; 6] = [
    0x5555_5555_5555_5555,
    0x3333_3333_3333_3333,
    0x0f0f_0f0f_0f0f_0f0f,
    0x00ff_00ff_00ff_00ff,
    0x0000_ffff_0000_ffff,
    0x0000_0000_ffff_ffff,
];

impl SubsetTable {
    pub fn build(phi: &Lcnf) -> Result<SubsetTable> {
        Self::build_with_caps(phi, DEFAULT_VAR_CAP, DEFAULT_SUBSET_CAP)
    }

    pub fn build_with_caps(phi: &Lcnf, var_cap: u32, subset_cap: usize) -> Result<SubsetTable> {
        let labels: Vec<Label> = phi.labels().into_iter().collect();
        if labels.len() > subset_cap.min(MAX_SUBSET_CAP) {
            return Err(Error::CapExceeded(format!(
                "{} labels, cap is {}",
                labels.len(),
                subset_cap.min(MAX_SUBSET_CAP)
            )));
        }
        let n = universe(phi.num_vars, phi.clauses().map(|c| c.clause.max_var()), var_cap)?;
        let index: BTreeMap<Label, usize> = labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
        let clauses: Vec<(Masks, u32)> = phi
            .clauses()
            .map(|c| {
                let mask = c.labels.iter().fold(0u32, |m, l| m | 1 << index[&l]);
                (Masks::of(&c.clause), mask)
            })
            .collect();

        // Under one assignment, M is usable iff no falsified clause has its
        // labels inside M. Distinct falsified-label families are collected
        // first since many assignments share one.
        let mut families: HashSet<Vec<u32>> = HashSet::new();
        for bits in 0..1u64 << n {
            let mut fam: Vec<u32> = clauses
                .iter()
                .filter(|(m, _)| !m.satisfied(bits))
                .map(|&(_, l)| l)
                .collect();
            if fam.contains(&0) {
                continue;
            }
            fam.sort_unstable();
            fam.dedup();
            families.insert(fam);
        }
        let k = labels.len();
        let full = ((1u64 << k) - 1) as u32;
        let mut table = SubsetTable {
            labels,
            sat: vec![0; (1usize << k).div_ceil(64)],
        };
        if families.iter().flatten().all(|l| l.count_ones() <= 1) {
            // Singleton labels: the usable masks under one assignment are
            // exactly the subsets of the unfalsified labels, so the table is
            // the downward closure of one mask per family.
            for fam in &families {
                let top = full & !fam.iter().fold(0, |a, l| a | l);
                table.set(top);
            }
            table.close_downward();
        } else {
            for m in 0..=full {
                if families.iter().any(|fam| fam.iter().all(|&l| l & m != l)) {
                    table.set(m);
                }
            }
        }
        Ok(table)
    }

    fn set(&mut self, m: u32) {
        self.sat[m as usize / 64] |= 1 << (m % 64);
    }

    /// `sat[m] |= sat[m | bit]` for every label bit.
    fn close_downward(&mut self) {
        let k = self.labels.len();
        for (i, clear) in LOW_CLEAR.iter().enumerate().take(k) {
            for w in &mut self.sat {
                *w |= (*w >> (1 << i)) & clear;
            }
        }
        for i in 6..k {
            let stride = 1 << (i - 6);
            for base in (0..self.sat.len()).step_by(2 * stride) {
                for j in base..base + stride {
                    self.sat[j] |= self.sat[j + stride];
                }
            }
        }
    }

    pub fn is_sat(&self, mask: u32) -> bool {
        self.sat[mask as usize / 64] >> (mask % 64) & 1 == 1
    }

    pub fn full_mask(&self) -> u32 {
        ((1u64 << self.labels.len()) - 1) as u32
    }

    fn to_ids(&self, mask: u32) -> BTreeSet<u32> {
        (0..self.labels.len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| self.labels[i].id())
            .collect()
    }

    /// Unsatisfiable masks all of whose one-smaller subsets are satisfiable.
    pub fn muses(&self) -> BTreeSet<BTreeSet<u32>> {
        (0..=self.full_mask())
            .filter(|&m| !self.is_sat(m) && ones(m).all(|b| self.is_sat(m & !b)))
            .map(|m| self.to_ids(m))
            .collect()
    }

    /// Complements of satisfiable masks that cannot grow by one label.
    pub fn mcses(&self) -> BTreeSet<BTreeSet<u32>> {
        let full = self.full_mask();
        (0..=full)
            .filter(|&r| {
                let keep = full & !r;
                self.is_sat(keep) && ones(r).all(|b| !self.is_sat(keep | b))
            })
            .map(|r| self.to_ids(r))
            .collect()
    }
}

fn ones(m: u32) -> impl Iterator<Item = u32> {
    (0..32).map(|i| 1u32 << i).filter(move |b| m & b != 0)
}

/// All MUSes of a labelled CNF, as label-id sets.
pub fn enumerate_mus(phi: &Lcnf) -> Result<BTreeSet<BTreeSet<u32>>> {
    Ok(SubsetTable::build(phi)?.muses())
}

/// All MCSes of a labelled CNF, as label-id sets.
pub fn enumerate_mcs(phi: &Lcnf) -> Result<BTreeSet<BTreeSet<u32>>> {
    Ok(SubsetTable::build(phi)?.mcses())
}

/// A collection of label-id sets, such as all MUSes.
pub type LabelFamily = BTreeSet<BTreeSet<u32>>;

/// MUSes and MCSes from one table, allowing up to `subset_cap` labels.
pub fn enumerate_mus_mcs_with_cap(phi: &Lcnf, subset_cap: usize) -> Result<(LabelFamily, LabelFamily)> {
    let t = SubsetTable::build_with_caps(phi, DEFAULT_VAR_CAP, subset_cap)?;
    Ok((t.muses(), t.mcses()))
}

/// Clause `i` (0-based) of `clauses` gets the label `i + 1`, so duplicate
/// clauses stay distinct.
pub fn cnf_as_lcnf(clauses: &[Clause]) -> Lcnf {
    let mut phi = Lcnf::unit_weights(clauses.iter().enumerate().map(|(i, c)| {
        LabelledClause::new(c.clone(), LabelSet::singleton(Label::new(i as u32 + 1)))
    }));
    phi.num_vars = clauses.iter().map(Clause::max_var).max().unwrap_or(0);
    phi
}

/// MUSes of a plain CNF as sets of 1-based clause indices.
pub fn enumerate_mus_cnf(clauses: &[Clause]) -> Result<BTreeSet<BTreeSet<u32>>> {
    enumerate_mus(&cnf_as_lcnf(clauses))
}

pub fn enumerate_mcs_cnf(clauses: &[Clause]) -> Result<BTreeSet<BTreeSet<u32>>> {
    enumerate_mcs(&cnf_as_lcnf(clauses))
}

/// Minimum LCNF MaxSAT cost by exhaustion over label subsets, with the
/// cheapest removed set (ties broken by the smallest sorted id list).
/// `Ok(None)` when the ∅-labelled part is unsatisfiable.
pub fn brute_force_lcnf(phi: &Lcnf) -> Result<Option<(u64, BTreeSet<u32>)>> {
    let table = SubsetTable::build(phi)?;
    let full = table.full_mask();
    let mut best: Option<(u64, BTreeSet<u32>)> = None;
    for r in 0..=full {
        if !table.is_sat(full & !r) {
            continue;
        }
        let ids = table.to_ids(r);
        let cost = phi.cost_of_labels(ids.iter().map(|&i| Label::new(i)).collect::<Vec<_>>().iter())?;
        let better = match &best {
            None => true,
            Some((c, s)) => cost < *c || (cost == *c && ids < *s),
        };
        if better {
            best = Some((cost, ids));
        }
    }
    Ok(best)
}

/// Irreducible hitting sets of `sets`: sets meeting every member such that
/// no element can be dropped. Berge's algorithm: the transversals are
/// extended one member at a time and pruned back to the minimal ones.
pub fn minimal_hitting_sets(sets: &BTreeSet<BTreeSet<u32>>) -> BTreeSet<BTreeSet<u32>> {
    let elems: Vec<u32> = sets.iter().flatten().copied().collect::<BTreeSet<_>>().into_iter().collect();
    assert!(elems.len() <= 64, "hitting-set universe too large");
    let bit = |e: &u32| 1u64 << elems.binary_search(e).unwrap();
    let mut members: Vec<u64> = sets.iter().map(|s| s.iter().map(bit).fold(0, |a, b| a | b)).collect();
    // small members first keeps the intermediate families small
    members.sort_by_key(|m| m.count_ones());

    let mut tr: Vec<u64> = vec![0];
    for &s in &members {
        let mut next: Vec<u64> = Vec::new();
        for &h in &tr {
            if h & s != 0 {
                next.push(h);
            } else {
                next.extend((0..64).map(|i| 1u64 << i).filter(|b| s & b != 0).map(|b| h | b));
            }
        }
        next.sort_by_key(|h| (h.count_ones(), *h));
        next.dedup();
        let mut kept: Vec<u64> = Vec::with_capacity(next.len());
        for h in next {
            if !kept.iter().any(|&m| m & !h == 0) {
                kept.push(h);
            }
        }
        tr = kept;
    }
    tr.into_iter()
        .map(|h| (0..elems.len()).filter(|i| h >> i & 1 == 1).map(|i| elems[i]).collect())
        .collect()
}

/// Checks that each family is exactly the irreducible hitting sets of the
/// other.
pub fn check_hitting_duality(
    muses: &BTreeSet<BTreeSet<u32>>,
    mcses: &BTreeSet<BTreeSet<u32>>,
) -> bool {
    minimal_hitting_sets(mcses) == *muses && minimal_hitting_sets(muses) == *mcses
}

fn random_clause(rng: &mut ChaCha8Rng, nvars: u32) -> Clause {
    let len = rng.gen_range(1..=4u32.min(nvars));
    let mut vars: Vec<u32> = (1..=nvars).collect();
    vars.shuffle(rng);
    Clause::new(
        vars[..len as usize]
            .iter()
            .map(|&v| Lit::new(Var::new(v), rng.gen_bool(0.5))),
    )
}

/// Makes `c` true under `planted` by flipping one of its literals if needed.
fn plant(rng: &mut ChaCha8Rng, c: Clause, planted: &Assignment) -> Clause {
    if c.is_satisfied_by(planted) {
        return c;
    }
    let lits = c.lits();
    let pick = rng.gen_range(0..lits.len());
    Clause::new(
        lits.iter()
            .enumerate()
            .map(|(i, &l)| if i == pick { !l } else { l }),
    )
}

fn random_assignment(rng: &mut ChaCha8Rng, nvars: u32) -> Assignment {
    Assignment::from_bools((0..nvars).map(|_| rng.gen_bool(0.5)).collect())
}

/// Seeded random WCNF together with the hidden assignment that satisfies
/// its hard clauses.
pub fn random_wcnf_planted(
    seed: u64,
    nvars: u32,
    nclauses: usize,
    max_weight: u64,
    hard_fraction: f64,
) -> (Wcnf, Assignment) {
    assert!(nvars >= 1 && max_weight >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let planted = random_assignment(&mut rng, nvars);
    let mut f = Wcnf::new(nvars);
    for _ in 0..nclauses {
        let c = random_clause(&mut rng, nvars);
        if rng.gen_bool(hard_fraction) {
            f.add_hard(plant(&mut rng, c, &planted));
        } else {
            let w = rng.gen_range(1..=max_weight);
            f.add_soft(c, w);
        }
    }
    (f, planted)
}

/// Seeded random WCNF: clause lengths uniform in 1..=4, a satisfiable hard
/// part, soft weights uniform in `1..=max_weight`.
pub fn random_wcnf(seed: u64, nvars: u32, nclauses: usize, max_weight: u64, hard_fraction: f64) -> Wcnf {
    random_wcnf_planted(seed, nvars, nclauses, max_weight, hard_fraction).0
}

/// Seeded random labelled CNF over labels `1..=nlabels`. Roughly one clause
/// in six is ∅-labelled; those are planted to be jointly satisfiable. Every
/// label that occurs gets a weight in `1..=max_weight`.
pub fn random_lcnf(
    seed: u64,
    nvars: u32,
    nclauses: usize,
    nlabels: u32,
    max_labelset: usize,
    max_weight: u64,
) -> Lcnf {
    assert!(nvars >= 1 && nlabels >= 1 && max_labelset >= 1 && max_weight >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let planted = random_assignment(&mut rng, nvars);
    let all: Vec<u32> = (1..=nlabels).collect();
    let mut clauses = Vec::with_capacity(nclauses);
    for _ in 0..nclauses {
        let c = random_clause(&mut rng, nvars);
        if rng.gen_range(0..6) == 0 {
            clauses.push(LabelledClause::hard(plant(&mut rng, c, &planted)));
        } else {
            let k = rng.gen_range(1..=max_labelset.min(all.len()));
            let ids: Vec<u32> = all.choose_multiple(&mut rng, k).copied().collect();
            clauses.push(LabelledClause::new(c, LabelSet::from_ids(&ids)));
        }
    }
    let used: BTreeSet<Label> = clauses.iter().flat_map(|c| c.labels.iter()).collect();
    let weights = used
        .into_iter()
        .map(|l| (l, rng.gen_range(1..=max_weight)))
        .collect();
    let mut phi = Lcnf::new(clauses, weights).expect("weights cover every label");
    phi.num_vars = nvars;
    phi
}
