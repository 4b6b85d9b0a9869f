//! End-to-end solving of a weighted CNF: optional blocked clause
//! elimination, lifting to labelled CNF, optional labelled preprocessing,
//! core-guided search, then model reconstruction back to the input formula.

use crate::bce::{bce_fixpoint, bce_reconstruct, BceConfig, BceRecord};
use crate::error::{Error, Result};
use crate::formula::{lcnf_from_wcnf, MaxSatSolution, Wcnf};
use crate::lcnf_prep::{bve_reconstruct, preprocess_lcnf, BveRecord, PrepConfig};
use crate::maxsat::{solve_lcnf, Algorithm, MaxSatConfig, MaxSatStats, Mode, Outcome};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineConfig {
    pub bce: bool,
    /// Restrict BCE to soft clauses.
    pub bce_soft_only: bool,
    /// Labelled variable elimination, subsumption and self-subsumption.
    pub rs: bool,
    pub prep: PrepConfig,
    pub mode: Mode,
    pub algorithm: Algorithm,
    pub conflict_budget: Option<u64>,
    /// Check the reconstructed model against the input before returning.
    pub verify: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            bce: false,
            bce_soft_only: false,
            rs: false,
            prep: PrepConfig::default(),
            mode: Mode::default(),
            algorithm: Algorithm::default(),
            conflict_budget: None,
            verify: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PipelineOutcome {
    /// Solution over the input formula; `falsified` holds 1-based soft
    /// clause indices.
    Optimum(MaxSatSolution),
    HardUnsat,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineResult {
    pub outcome: PipelineOutcome,
    pub stats: MaxSatStats,
    pub bce_removed: usize,
    pub lcnf_clauses_before: usize,
    pub lcnf_clauses_after: usize,
}

/// Everything needed to map a model of the preprocessed labelled formula
/// back to the input.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Preprocessed {
    pub lcnf: crate::formula::Lcnf,
    pub bce: BceRecord,
    pub bve: BveRecord,
    pub lcnf_clauses_before: usize,
}

pub fn preprocess_wcnf(f: &Wcnf, config: &PipelineConfig) -> Preprocessed {
    let (g, bce) = if config.bce {
        bce_fixpoint(
            f,
            BceConfig {
                soft_only: config.bce_soft_only,
            },
        )
    } else {
        (f.clone(), BceRecord::default())
    };
    let phi = lcnf_from_wcnf(&g);
    let before = phi.len();
    let (lcnf, bve) = if config.rs {
        preprocess_lcnf(&phi, &config.prep)
    } else {
        (phi, BveRecord::default())
    };
    Preprocessed {
        lcnf,
        bce,
        bve,
        lcnf_clauses_before: before,
    }
}

pub fn solve_wcnf(f: &Wcnf, config: &PipelineConfig) -> Result<PipelineResult> {
    if config.algorithm == Algorithm::FuMalik && !f.is_unweighted() {
        return Err(Error::InvalidInput(
            "fumalik needs every soft weight to be 1".into(),
        ));
    }
    f.total_soft_weight()?;
    let pre = preprocess_wcnf(f, config);
    let result = solve_lcnf(
        &pre.lcnf,
        &MaxSatConfig {
            mode: config.mode,
            algorithm: config.algorithm,
            conflict_budget: config.conflict_budget,
        },
    )?;
    let mut out = PipelineResult {
        outcome: PipelineOutcome::HardUnsat,
        stats: result.stats,
        bce_removed: pre.bce.entries.len(),
        lcnf_clauses_before: pre.lcnf_clauses_before,
        lcnf_clauses_after: pre.lcnf.len(),
    };
    let sol = match result.outcome {
        Outcome::HardUnsat => return Ok(out),
        Outcome::Optimum(sol) => sol,
    };
    let lifted = bve_reconstruct(&pre.bve, &sol.model, &sol.removed_labels());
    let model = bce_reconstruct(&pre.bce, &lifted, f.num_vars).truncated(f.num_vars);
    if config.verify {
        if !f.hard_satisfied_by(&model) {
            return Err(Error::Internal(
                "reconstructed model falsifies a hard clause".into(),
            ));
        }
        let cost = f.cost_of(&model)?;
        if cost != sol.cost {
            return Err(Error::Internal(format!(
                "reconstructed model costs {cost}, solver reported {}",
                sol.cost
            )));
        }
    }
    out.outcome = PipelineOutcome::Optimum(MaxSatSolution {
        falsified: f.falsified_soft(&model),
        model,
        cost: sol.cost,
    });
    Ok(out)
}
