//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Every expected value is either computed here by the brute-force oracle
//! (which never calls the CDCL engine) or pinned from the worked examples.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lmaxsat::bce::{bce_fixpoint, bce_reconstruct, BceConfig};
use lmaxsat::dimacs::{parse_str, write_instance, ParseOptions};
use lmaxsat::lcnf_prep::{l_bve, l_ssr, l_sub, preprocess_lcnf, self_subsuming_strengthening, subsumes, PrepConfig};
use lmaxsat::maxsat::{solve_lcnf, Algorithm, MaxSatConfig, Mode, Outcome};
use lmaxsat::oracle::{
    brute_force_lcnf, brute_force_maxsat, check_hitting_duality, enumerate_mcs, enumerate_mcs_cnf,
    enumerate_mus, enumerate_mus_cnf, enumerate_mus_mcs_with_cap, random_lcnf, random_wcnf, MAX_SUBSET_CAP,
};
use lmaxsat::pipeline::{solve_wcnf, PipelineConfig, PipelineOutcome};
use lmaxsat::reduction::{lcnf_to_wcnf, lift_reduction_solution};
use lmaxsat::sat::{SolveOutcome, Solver};
use lmaxsat::{lcnf_from_wcnf, Assignment, Clause, LabelSet, LabelledClause, Lcnf, Lit, Var, Wcnf};

// Tolerances: every criterion demands exact agreement on 100% of instances.
const REQUIRED_AGREEMENT: f64 = 1.0;

const ORACLE_INSTANCES: u64 = 1200;
const ORACLE_BUDGET: Duration = Duration::from_secs(600);
const MCS_INSTANCES: u64 = 400;
const MCS_BUDGET: Duration = Duration::from_secs(300);
const BCE_INSTANCES: u64 = 400;
const BCE_SUBSETS: usize = 5;
const BCE_BUDGET: Duration = Duration::from_secs(300);
const SAT_RANDOM_INSTANCES: u64 = 1000;
const EXHAUSTIVE_MAX_CLAUSES: usize = 8;
const GOLDEN_MIN_FILES: usize = 20;
const EXAMPLE_BUDGET: Duration = Duration::from_secs(1);
/// Widest label count the MUS/MCS tables are built for.
const DUALITY_LABEL_CAP: usize = MAX_SUBSET_CAP;

/// Outcome of one criterion.
struct Verdict {
    passed: usize,
    total: usize,
    failures: Vec<String>,
    notes: Vec<String>,
    elapsed: Duration,
    budget: Duration,
}

impl Verdict {
    fn new(budget: Duration) -> Verdict {
        Verdict {
            passed: 0,
            total: 0,
            failures: Vec::new(),
            notes: Vec::new(),
            elapsed: Duration::ZERO,
            budget,
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.total += 1;
        if ok {
            self.passed += 1;
        } else {
            self.failures.push(what());
        }
    }

    fn note(&mut self, s: String) {
        self.notes.push(s);
    }

    fn ok(&self) -> bool {
        self.total > 0
            && self.passed as f64 / self.total as f64 >= REQUIRED_AGREEMENT
            && self.elapsed <= self.budget
    }
}

/// Unsatisfiable instances met along the way, for the duality criterion.
#[derive(Default)]
struct DualityLog {
    checked: usize,
    failed: Vec<String>,
    skipped_over_cap: usize,
}

impl DualityLog {
    fn record(&mut self, origin: &str, muses: &BTreeSet<BTreeSet<u32>>, mcses: &BTreeSet<BTreeSet<u32>>) {
        self.checked += 1;
        if !check_hitting_duality(muses, mcses) {
            self.failed.push(format!("{origin}: MUS {muses:?} vs MCS {mcses:?}"));
        }
    }
}

/// Costs seen under each configuration, for mode equivalence.
#[derive(Default)]
struct ModeLog {
    pairs: usize,
    cost_mismatch: Vec<String>,
    load_violations: Vec<String>,
    loads_inc: usize,
    loads_noninc: usize,
}

fn c(lits: &[i64]) -> Clause {
    Clause::from_dimacs(lits)
}

fn lc(lits: &[i64], labels: &[u32]) -> LabelledClause {
    LabelledClause::new(c(lits), LabelSet::from_ids(labels))
}

fn sets(v: &[&[u32]]) -> BTreeSet<BTreeSet<u32>> {
    v.iter().map(|s| s.iter().copied().collect()).collect()
}

// p = 1, q = 2, r = 3
fn unit_contradictions() -> Wcnf {
    let mut f = Wcnf::new(3);
    for cl in [&[1][..], &[-1], &[1, 2], &[1, -2], &[3], &[-3]] {
        f.add_soft(c(cl), 1);
    }
    f
}

fn shared_labels() -> Lcnf {
    let mut phi = Lcnf::unit_weights([
        lc(&[-1], &[]),
        lc(&[3], &[]),
        lc(&[1, 2], &[1]),
        lc(&[1, -2], &[1, 2]),
        lc(&[1], &[2]),
        lc(&[-3], &[3]),
    ]);
    phi.num_vars = 3;
    phi
}

/// Every preprocessing setting × mode × algorithm that applies to `f`.
fn all_configs(f: &Wcnf) -> Vec<PipelineConfig> {
    let algs: &[Algorithm] = if f.is_unweighted() {
        &[Algorithm::FuMalik, Algorithm::Wmsu1]
    } else {
        &[Algorithm::Wmsu1]
    };
    let mut v = Vec::new();
    for (bce, rs) in [(false, false), (true, false), (false, true), (true, true)] {
        for &algorithm in algs {
            for mode in [Mode::NonIncremental, Mode::Incremental] {
                v.push(PipelineConfig {
                    bce,
                    rs,
                    mode,
                    algorithm,
                    ..PipelineConfig::default()
                });
            }
        }
    }
    v
}

fn prep_name(cfg: &PipelineConfig) -> &'static str {
    match (cfg.bce, cfg.rs) {
        (false, false) => "none",
        (true, false) => "bce",
        (false, true) => "rs",
        (true, true) => "bce,rs",
    }
}

// ---------------------------------------------------------------------------
// helpers that reproduce preprocessing applied without labels

/// Clause-level variable elimination, applied only when it shrinks the set.
fn naive_bve(f: &BTreeSet<Clause>, x: Var) -> BTreeSet<Clause> {
    let (with, without): (Vec<&Clause>, Vec<&Clause>) = f
        .iter()
        .partition(|cl| cl.contains(x.pos()) || cl.contains(x.neg()));
    let mut out: BTreeSet<Clause> = without.into_iter().cloned().collect();
    for p in with.iter().filter(|cl| cl.contains(x.pos())) {
        for n in with.iter().filter(|cl| cl.contains(x.neg())) {
            let r = Clause::new(p.without(x.pos()).iter().chain(n.without(x.neg()).iter()));
            if !r.is_tautology() {
                out.insert(r);
            }
        }
    }
    if out.len() < f.len() {
        out
    } else {
        f.clone()
    }
}

/// Clause-level subsumption elimination.
fn naive_sub(f: &[Clause]) -> Vec<Clause> {
    f.iter()
        .filter(|c2| !f.iter().any(|c1| c1.len() < c2.len() && c1.is_subset_of(c2)))
        .cloned()
        .collect()
}

fn optimal_models(f: &Wcnf) -> (u64, Vec<Assignment>) {
    let n = f.num_vars;
    let mut best = u64::MAX;
    let mut models = Vec::new();
    for bits in 0..1u64 << n {
        let a = Assignment::from_bits(n, bits);
        if !f.hard_satisfied_by(&a) {
            continue;
        }
        let cost = f.cost_of(&a).unwrap();
        if cost < best {
            best = cost;
            models.clear();
        }
        if cost == best {
            models.push(a);
        }
    }
    (best, models)
}

// ---------------------------------------------------------------------------

fn criterion_1() -> Verdict {
    let mut v = Verdict::new(EXAMPLE_BUDGET);
    let f = unit_contradictions();
    for cfg in all_configs(&f) {
        let got = solve_wcnf(&f, &cfg).map(|r| r.outcome);
        let ok = matches!(&got, Ok(PipelineOutcome::Optimum(s)) if s.cost == 2 && f.cost_of(&s.model).unwrap() == 2);
        v.check(ok, || format!("{} {:?} {:?}: {got:?}", prep_name(&cfg), cfg.mode, cfg.algorithm));
    }

    // plain variable elimination collapses F to {∅}: 8 models of cost 1
    let mut g: BTreeSet<Clause> = f.clauses().cloned().collect();
    for x in 1..=3 {
        g = naive_bve(&g, Var::new(x));
    }
    v.check(g == [Clause::empty()].into_iter().collect(), || format!("BVE(F) = {g:?}"));
    let mut bve = Wcnf::new(3);
    for cl in &g {
        bve.add_soft(cl.clone(), 1);
    }
    let (cost, models) = optimal_models(&bve);
    v.check(cost == 1 && models.len() == 8, || {
        format!("BVE(F): cost {cost}, {} optimal models", models.len())
    });

    // plain subsumption keeps C1, C2, C5, C6 and admits optima with p = 0
    let all: Vec<Clause> = f.clauses().cloned().collect();
    let kept = naive_sub(&all);
    v.check(kept == vec![c(&[1]), c(&[-1]), c(&[3]), c(&[-3])], || format!("SUB(F) = {kept:?}"));
    let mut sub = Wcnf::new(3);
    for cl in kept {
        sub.add_soft(cl, 1);
    }
    let (sub_cost, sub_models) = optimal_models(&sub);
    let p = Var::new(1);
    let p_false = sub_models.iter().find(|a| !a.value(p));
    v.check(sub_cost == 2 && p_false.is_some(), || "SUB(F) has no optimum with p = 0".into());
    if let Some(a) = p_false {
        // such a model is not optimal for F
        v.check(f.cost_of(a).unwrap() > 2, || format!("{a:?} is optimal for F"));
    }
    let (f_cost, f_models) = optimal_models(&f);
    v.check(f_cost == 2 && f_models.len() == 4 && f_models.iter().all(|a| a.value(p)), || {
        format!("F: cost {f_cost}, {} optimal models", f_models.len())
    });
    v
}

fn criterion_2() -> Verdict {
    let mut v = Verdict::new(EXAMPLE_BUDGET);
    let phi = shared_labels();
    let muses = enumerate_mus(&phi).unwrap();
    let mcses = enumerate_mcs(&phi).unwrap();
    v.check(muses == sets(&[&[2], &[3]]), || format!("MUSes {muses:?}"));
    v.check(mcses == sets(&[&[2, 3]]), || format!("MCSes {mcses:?}"));
    let expected: BTreeSet<u32> = [2, 3].into_iter().collect();
    for algorithm in [Algorithm::FuMalik, Algorithm::Wmsu1] {
        for mode in [Mode::NonIncremental, Mode::Incremental] {
            let cfg = MaxSatConfig {
                mode,
                algorithm,
                conflict_budget: None,
            };
            let got = solve_lcnf(&phi, &cfg).map(|r| r.outcome);
            let ok = matches!(&got, Ok(Outcome::Optimum(s)) if s.cost == 2 && s.falsified == expected);
            v.check(ok, || format!("{algorithm:?} {mode:?}: {got:?}"));
        }
    }
    let (f, sel) = lcnf_to_wcnf(&phi);
    let brute = brute_force_maxsat(&f).unwrap().unwrap();
    let lifted = lift_reduction_solution(&brute, &sel, 3);
    v.check(brute.cost == 2 && lifted.falsified == expected, || {
        format!("reduction by brute force: {brute:?}")
    });
    for cfg in all_configs(&f) {
        let got = solve_wcnf(&f, &cfg).map(|r| r.outcome);
        let ok = matches!(&got, Ok(PipelineOutcome::Optimum(s)) if s.cost == 2);
        v.check(ok, || format!("reduction, {} {:?}: {got:?}", prep_name(&cfg), cfg.mode));
    }
    v
}

fn criterion_3(duality: &mut DualityLog, modes: &mut ModeLog) -> Verdict {
    let mut v = Verdict::new(ORACLE_BUDGET);
    let fractions = [0.0, 0.3, 0.6];
    let mut weighted = 0;
    let mut with_hard = 0;
    for i in 0..ORACLE_INSTANCES {
        let mut rng = ChaCha8Rng::seed_from_u64(0x0c3 ^ i);
        let nvars = rng.gen_range(1..=12);
        let nclauses = rng.gen_range(1..=25);
        let max_weight = if i % 3 == 0 { 1 } else { 5 };
        let hf = fractions[(i / 3 % 3) as usize];
        let f = random_wcnf(i, nvars, nclauses, max_weight, hf);
        weighted += usize::from(!f.is_unweighted());
        with_hard += usize::from(!f.hard.is_empty());

        let brute = brute_force_maxsat(&f).unwrap();
        let expected = brute.as_ref().map(|s| s.cost);
        let mut costs: BTreeMap<(&str, Algorithm, Mode), (Option<u64>, usize)> = BTreeMap::new();
        for cfg in all_configs(&f) {
            let got = solve_wcnf(&f, &cfg);
            let cost = match &got {
                Ok(r) => match &r.outcome {
                    PipelineOutcome::Optimum(s) => Some(s.cost),
                    PipelineOutcome::HardUnsat => None,
                },
                Err(_) => Some(u64::MAX),
            };
            let loads = got.as_ref().map_or(0, |r| r.stats.loads);
            v.check(cost == expected, || {
                format!(
                    "seed {i} {} {:?} {:?}: got {got:?}, brute force {expected:?}",
                    prep_name(&cfg),
                    cfg.mode,
                    cfg.algorithm
                )
            });
            costs.insert((prep_name(&cfg), cfg.algorithm, cfg.mode), (cost, loads));
        }
        for ((prep, alg, mode), (cost, loads)) in &costs {
            if *mode != Mode::Incremental {
                continue;
            }
            let (non_cost, non_loads) = costs[&(*prep, *alg, Mode::NonIncremental)];
            modes.pairs += 1;
            modes.loads_inc += loads;
            modes.loads_noninc += non_loads;
            if *cost != non_cost {
                modes.cost_mismatch.push(format!("seed {i} {prep} {alg:?}: {cost:?} vs {non_cost:?}"));
            }
            if *loads >= non_loads {
                modes.load_violations.push(format!("seed {i} {prep} {alg:?}: {loads} vs {non_loads}"));
            }
        }

        if expected.is_some_and(|c| c > 0) {
            if f.soft.len() > DUALITY_LABEL_CAP {
                duality.skipped_over_cap += 1;
            } else {
                let phi = lcnf_from_wcnf(&f);
                let (muses, mcses) = enumerate_mus_mcs_with_cap(&phi, DUALITY_LABEL_CAP).unwrap();
                // the cheapest MCS is the optimum
                let cheapest = mcses
                    .iter()
                    .map(|r| r.iter().map(|&l| f.soft[l as usize - 1].1).sum::<u64>())
                    .min();
                v.check(cheapest == expected, || format!("seed {i}: cheapest MCS {cheapest:?}"));
                duality.record(&format!("wcnf seed {i}"), &muses, &mcses);
            }
        }
    }
    v.note(format!("{ORACLE_INSTANCES} instances, {weighted} weighted, {with_hard} with hard clauses"));
    v
}

fn criterion_4(duality: &mut DualityLog) -> Verdict {
    let mut v = Verdict::new(MCS_BUDGET);
    let (mut bve_steps, mut sub_steps, mut ssr_steps) = (0usize, 0usize, 0usize);
    for i in 0..MCS_INSTANCES {
        let mut rng = ChaCha8Rng::seed_from_u64(0x0c4 ^ i);
        let nvars = rng.gen_range(2..=if i % 2 == 0 { 5 } else { 10 });
        let nlabels = rng.gen_range(2..=8);
        let nclauses = rng.gen_range(3..=12);
        let max_labelset = rng.gen_range(1..=3);
        let phi = random_lcnf(i, nvars, nclauses, nlabels, max_labelset, 3);
        let base = enumerate_mcs(&phi).unwrap();

        for x in 1..=nvars {
            let out = l_bve(&phi, Var::new(x));
            if out != phi {
                bve_steps += 1;
                let got = enumerate_mcs(&out).unwrap();
                v.check(got == base, || format!("seed {i} bve x{x}: {got:?} vs {base:?}"));
            }
        }
        let clauses: Vec<&LabelledClause> = phi.clauses().collect();
        for c1 in &clauses {
            for c2 in &clauses {
                if subsumes(c1, c2) {
                    sub_steps += 1;
                    let got = enumerate_mcs(&l_sub(&phi, c1, c2)).unwrap();
                    v.check(got == base, || format!("seed {i} sub {c1} {c2}: {got:?} vs {base:?}"));
                }
                if self_subsuming_strengthening(c1, c2).is_some() {
                    ssr_steps += 1;
                    let got = enumerate_mcs(&l_ssr(&phi, c1, c2)).unwrap();
                    v.check(got == base, || format!("seed {i} ssr {c1} {c2}: {got:?} vs {base:?}"));
                }
            }
        }
        // the full schedule as well
        let (pre, _) = preprocess_lcnf(&phi, &PrepConfig::default());
        let got = enumerate_mcs(&pre).unwrap();
        v.check(got == base, || format!("seed {i} full schedule: {got:?} vs {base:?}"));

        if !base.contains(&BTreeSet::new()) && !base.is_empty() {
            duality.record(&format!("lcnf seed {i}"), &enumerate_mus(&phi).unwrap(), &base);
        }
        let _ = brute_force_lcnf(&phi).unwrap().expect("planted hard part");
    }
    v.check(bve_steps > 0 && sub_steps > 0 && ssr_steps > 0, || {
        "some rule was never exercised".into()
    });
    v.note(format!("{MCS_INSTANCES} formulas, {bve_steps} bve, {sub_steps} sub, {ssr_steps} ssr steps"));
    v
}

fn criterion_5(duality: &mut DualityLog) -> Verdict {
    let mut v = Verdict::new(BCE_BUDGET);
    let mut unsat = 0usize;
    let mut lifted_models = 0usize;
    let mut removed_any = 0usize;
    for i in 0..BCE_INSTANCES {
        let mut rng = ChaCha8Rng::seed_from_u64(0x0c5 ^ i);
        let nvars = rng.gen_range(2..=8);
        let nclauses = rng.gen_range(2..=12);
        let hf = if i % 2 == 0 { 0.0 } else { 0.3 };
        let f = random_wcnf(i, nvars, nclauses, 5, hf);

        // the clause list as a plain CNF
        let clauses: Vec<Clause> = f.clauses().cloned().collect();
        let mut plain = Wcnf::new(f.num_vars);
        for cl in &clauses {
            plain.add_soft(cl.clone(), 1);
        }
        let (_, rec) = bce_fixpoint(&plain, BceConfig::default());
        let kept: BTreeSet<usize> = rec.soft_origin.iter().copied().collect();
        removed_any += usize::from(kept.len() < clauses.len());

        for k in 0..BCE_SUBSETS {
            let subset: Vec<usize> = (0..clauses.len()).filter(|_| rng.gen_bool(0.5)).collect();
            let mut sub = Wcnf::new(f.num_vars);
            for &j in &subset {
                sub.add_soft(clauses[j].clone(), 1);
            }
            let (_, sub_rec) = bce_fixpoint(&sub, BceConfig::default());
            let sub_kept: BTreeSet<usize> = sub_rec.soft_origin.iter().map(|&j| subset[j]).collect();
            v.check(sub_kept.is_subset(&kept), || {
                format!("seed {i} subset {k}: BCE(F') = {sub_kept:?} not within BCE(F) = {kept:?}")
            });
        }

        let muses = enumerate_mus_cnf(&clauses).unwrap();
        if !muses.is_empty() {
            unsat += 1;
            let reduced: Vec<Clause> = rec.soft_origin.iter().map(|&j| clauses[j].clone()).collect();
            let reduced_muses: BTreeSet<BTreeSet<u32>> = enumerate_mus_cnf(&reduced)
                .unwrap()
                .into_iter()
                .map(|m| m.into_iter().map(|j| rec.soft_origin[j as usize - 1] as u32 + 1).collect())
                .collect();
            v.check(reduced_muses == muses, || {
                format!("seed {i}: MUS(F) = {muses:?}, MUS(BCE(F)) = {reduced_muses:?}")
            });
            duality.record(&format!("cnf seed {i}"), &muses, &enumerate_mcs_cnf(&clauses).unwrap());
        }

        for soft_only in [false, true] {
            let (g, rec) = bce_fixpoint(&f, BceConfig { soft_only });
            let (opt_f, _) = optimal_models(&f);
            let (opt_g, models) = optimal_models(&g);
            v.check(opt_f == opt_g, || format!("seed {i}: optimum {opt_f} became {opt_g}"));
            for a in models {
                lifted_models += 1;
                let lifted = bce_reconstruct(&rec, &a, f.num_vars);
                let ok = f.hard_satisfied_by(&lifted) && f.cost_of(&lifted).unwrap() == opt_g;
                v.check(ok, || format!("seed {i} soft_only={soft_only}: {a:?} lifts to {lifted:?}"));
            }
        }
    }
    v.note(format!(
        "{BCE_INSTANCES} formulas ({removed_any} shrunk), {unsat} unsatisfiable, {lifted_models} models lifted"
    ));
    v
}

fn criterion_6(log: &DualityLog) -> Verdict {
    let mut v = Verdict::new(Duration::MAX);
    v.total = log.checked + log.skipped_over_cap;
    v.passed = log.checked - log.failed.len();
    v.failures = log.failed.clone();
    if log.skipped_over_cap > 0 {
        v.failures.push(format!("{} instances above the {DUALITY_LABEL_CAP}-label cap", log.skipped_over_cap));
    }
    v.note(format!("{} unsatisfiable instances checked", log.checked));
    v
}

fn criterion_7(log: &ModeLog) -> Verdict {
    let mut v = Verdict::new(Duration::MAX);
    v.total = 2 * log.pairs;
    v.passed = v.total - log.cost_mismatch.len() - log.load_violations.len();
    v.failures = log.cost_mismatch.iter().chain(&log.load_violations).cloned().collect();
    v.note(format!(
        "{} pairs, loads incremental {} vs non-incremental {}",
        log.pairs, log.loads_inc, log.loads_noninc
    ));
    v
}

/// Satisfying assignments of a CNF over `n ≤ 12` variables, as a bitset
/// indexed by assignment.
fn truth_table(clauses: &[Clause], n: u32) -> Vec<bool> {
    (0..1u64 << n)
        .map(|bits| {
            let a = Assignment::from_bits(n, bits);
            clauses.iter().all(|cl| cl.is_satisfied_by(&a))
        })
        .collect()
}

fn sat_by_table(clauses: &[Clause], n: u32) -> bool {
    truth_table(clauses, n).into_iter().any(|b| b)
}

fn criterion_8() -> Verdict {
    let mut v = Verdict::new(Duration::MAX);

    // every non-tautological clause over three variables, as a mask of the
    // assignments it allows
    let mut pool: Vec<(Clause, u8)> = Vec::new();
    for code in 1..27u32 {
        let mut lits = Vec::new();
        let mut k = code;
        for var in 1..=3 {
            match k % 3 {
                1 => lits.push(var),
                2 => lits.push(-var),
                _ => {}
            }
            k /= 3;
        }
        let cl = c(&lits);
        let mask = (0..8u64)
            .filter(|&b| cl.is_satisfied_by(&Assignment::from_bits(3, b)))
            .fold(0u8, |m, b| m | 1 << b);
        pool.push((cl, mask));
    }
    let mut exhaustive = 0usize;
    let mut pick: Vec<usize> = Vec::new();
    // all subsets of the pool of size ≤ 8, in lexicographic order
    fn walk(
        pool: &[(Clause, u8)],
        start: usize,
        pick: &mut Vec<usize>,
        v: &mut Verdict,
        count: &mut usize,
    ) {
        let mask = pick.iter().fold(0xffu8, |m, &i| m & pool[i].1);
        let mut s = Solver::new();
        s.reserve_vars(3);
        for &i in pick.iter() {
            s.add_clause(pool[i].0.lits());
        }
        let out = s.solve_under_assumptions(&[]).unwrap();
        *count += 1;
        let ok = match &out {
            SolveOutcome::Sat(a) => mask != 0 && pick.iter().all(|&i| pool[i].0.is_satisfied_by(a)),
            SolveOutcome::Unsat { failed } => mask == 0 && failed.is_empty(),
        };
        v.check(ok, || format!("3-var CNF {pick:?}: {out:?}"));
        if pick.len() == EXHAUSTIVE_MAX_CLAUSES {
            return;
        }
        for i in start..pool.len() {
            pick.push(i);
            walk(pool, i + 1, pick, v, count);
            pick.pop();
        }
    }
    walk(&pool, 0, &mut pick, &mut v, &mut exhaustive);

    let (mut sat, mut unsat) = (0usize, 0usize);
    for i in 0..SAT_RANDOM_INSTANCES {
        let mut rng = ChaCha8Rng::seed_from_u64(0x0c8 ^ i);
        let n = rng.gen_range(1..=12u32);
        let m = rng.gen_range(1..=(5 * n as usize).max(2));
        let f = random_wcnf(i, n, m, 1, 0.0);
        let clauses: Vec<Clause> = f.soft.iter().map(|(cl, _)| cl.clone()).collect();
        let mut s = Solver::new();
        s.reserve_vars(n);
        for cl in &clauses {
            s.add_clause(cl.lits());
        }
        // one handle, several assumption sets
        for round in 0..3 {
            let k = rng.gen_range(0..=4.min(n as usize));
            let assumptions: Vec<Lit> = (0..k)
                .map(|_| Lit::new(Var::new(rng.gen_range(1..=n)), rng.gen_bool(0.5)))
                .collect();
            let mut with: Vec<Clause> = clauses.clone();
            with.extend(assumptions.iter().map(|&l| Clause::new([l])));
            let expected = sat_by_table(&with, n);
            let out = s.solve_under_assumptions(&assumptions).unwrap();
            match &out {
                SolveOutcome::Sat(a) => {
                    sat += 1;
                    let ok = expected && with.iter().all(|cl| cl.is_satisfied_by(a));
                    v.check(ok, || format!("seed {i} round {round}: bad model"));
                }
                SolveOutcome::Unsat { failed } => {
                    unsat += 1;
                    v.check(!expected, || format!("seed {i} round {round}: UNSAT but satisfiable"));
                    let subset = failed.iter().all(|l| assumptions.contains(l));
                    let mut core = clauses.clone();
                    core.extend(failed.iter().map(|&l| Clause::new([l])));
                    let mut fresh = Solver::new();
                    for cl in &clauses {
                        fresh.add_clause(cl.lits());
                    }
                    let again = fresh.solve_under_assumptions(failed).unwrap();
                    v.check(subset && !sat_by_table(&core, n) && !again.is_sat(), || {
                        format!("seed {i} round {round}: failed {failed:?} is not a core of {assumptions:?}")
                    });
                }
            }
        }
    }
    v.note(format!(
        "{exhaustive} three-variable CNFs, {SAT_RANDOM_INSTANCES} random formulas ({sat} SAT / {unsat} UNSAT calls)"
    ));
    v
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn inputs(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| matches!(p.extension().and_then(|e| e.to_str()), Some("cnf" | "wcnf")))
        .collect();
    v.sort();
    v
}

fn with_suffix(p: &Path, suffix: &str) -> PathBuf {
    let mut s = p.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn criterion_9() -> Verdict {
    let mut v = Verdict::new(Duration::MAX);
    let opts = ParseOptions::default();
    let root = golden_dir();
    let mut files = 0;
    for p in inputs(&root.join("roundtrip")) {
        files += 1;
        let text = std::fs::read_to_string(&p).unwrap();
        let out = parse_str(&text, opts).map(|i| write_instance(&i));
        v.check(out.as_deref() == Ok(text.as_str()), || format!("{}: {out:?}", p.display()));
    }
    for p in inputs(&root.join("normalize")) {
        files += 1;
        let text = std::fs::read_to_string(&p).unwrap();
        let expected = std::fs::read_to_string(with_suffix(&p, ".expected")).unwrap();
        let first = parse_str(&text, opts).unwrap();
        let out = write_instance(&first);
        v.check(out == expected, || format!("{}: {out:?}", p.display()));
        // the canonical text is a fixed point and parses to the same instance
        let second = parse_str(&out, opts).unwrap();
        v.check(write_instance(&second) == out && second.wcnf == first.wcnf, || {
            format!("{}: not a fixed point", p.display())
        });
    }
    for p in inputs(&root.join("errors")) {
        files += 1;
        let text = std::fs::read_to_string(&p).unwrap();
        let expected = std::fs::read_to_string(with_suffix(&p, ".err")).unwrap();
        let got = parse_str(&text, opts).map(|_| ()).map_err(|e| e.to_string());
        v.check(got.as_ref().err().map(String::as_str) == Some(expected.trim_end()), || {
            format!("{}: {got:?}", p.display())
        });
    }
    v.check(files >= GOLDEN_MIN_FILES, || format!("only {files} golden files"));
    v.note(format!("{files} golden files"));
    v
}

fn timed(f: impl FnOnce() -> Verdict) -> Verdict {
    let start = Instant::now();
    let mut v = f();
    v.elapsed = start.elapsed();
    v
}

fn main() {
    let mut duality = DualityLog::default();
    let mut modes = ModeLog::default();
    let results = vec![
        ("unit contradictions", timed(criterion_1)),
        ("shared labels", timed(criterion_2)),
        ("oracle equivalence", timed(|| criterion_3(&mut duality, &mut modes))),
        ("MCS preservation", timed(|| criterion_4(&mut duality))),
        ("BCE suite", timed(|| criterion_5(&mut duality))),
        ("hitting-set duality", timed(|| criterion_6(&duality))),
        ("mode equivalence", timed(|| criterion_7(&modes))),
        ("SAT conformance", timed(criterion_8)),
        ("DIMACS golden corpus", timed(criterion_9)),
    ];
    let mut all = true;
    for (i, (name, v)) in results.iter().enumerate() {
        all &= v.ok();
        println!(
            "criterion {}: {} {name}: {}/{} checks in {:.2?}{}{}",
            i + 1,
            if v.ok() { "PASS" } else { "FAIL" },
            v.passed,
            v.total,
            v.elapsed,
            if v.notes.is_empty() { "" } else { "; " },
            v.notes.join("; ")
        );
        if v.elapsed > v.budget {
            println!("    over budget of {:?}", v.budget);
        }
        for f in v.failures.iter().take(5) {
            println!("    {f}");
        }
    }
    if !all {
        std::process::exit(1);
    }
}
