//! Seeded simulation studies comparing design strategies.
//!
//! Each replication generates a network, builds the optimal design under
//! every design prior together with the two baselines, and scores them all
//! by the exact integrated MSE under the true prior. Replications run in
//! parallel; every random component draws from a substream derived from
//! `(master_seed, family, replication)`, so results are a pure function of
//! the configuration.

mod anova;
mod ranking;
mod report;

pub use anova::{anova_mss, AnovaFactor, AnovaResponse, AnovaRow, AnovaTable};
pub use ranking::{ranking_stability, run_ranking_study, RankingStabilityReport};
pub use report::{
    read_records_csv, read_records_json, relative_histogram, write_report, CsvRecord, HistogramBin, ReportFormat,
    HISTOGRAM_BIN_WIDTH,
};

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::{
    optimize_assignment, randomized_balanced, spectral_clusters, stratified_randomization, Objective, OptimizerConfig,
    QuadraticRiskObjective,
};
use crate::models::PriorSpec;
use crate::netgen::NetworkFamily;
use crate::seeds::{derive, derive_path, rng_from_seed};
use crate::{Error, Result};

/// `(mu0, sigma0)` pairs of the prior-misspecification grid; the first one
/// is the generating prior.
pub const MISSPECIFICATION_PAIRS: [(f64, f64); 10] = [
    (1.0, 0.5),
    (2.0, 0.7),
    (5.0, 1.0),
    (7.0, 1.2),
    (10.0, 1.5),
    (15.0, 2.0),
    (20.0, 2.5),
    (30.0, 3.0),
    (40.0, 4.0),
    (50.0, 5.0),
];

/// The misspecification grid, keeping every other hyper-parameter of `base`.
pub fn misspecification_grid(base: &PriorSpec) -> Vec<PriorSpec> {
    MISSPECIFICATION_PAIRS
        .iter()
        .map(|&(mu0, sigma0)| base.with_mean_prior(mu0, sigma0))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Optimal,
    RandomizedBalanced,
    StratifiedSpectral,
}

impl Strategy {
    pub fn as_str(&self) -> &'static str {
        match self {
            Strategy::Optimal => "optimal",
            Strategy::RandomizedBalanced => "randomized-balanced",
            Strategy::StratifiedSpectral => "stratified-spectral",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "optimal" => Ok(Strategy::Optimal),
            "randomized-balanced" => Ok(Strategy::RandomizedBalanced),
            "stratified-spectral" => Ok(Strategy::StratifiedSpectral),
            other => Err(Error::Parse(format!("unknown design strategy {other:?}"))),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudyConfig {
    /// `None` selects the four default families for `n_nodes`.
    pub network_families: Option<Vec<NetworkFamily>>,
    pub n_nodes: usize,
    pub n_replications: usize,
    pub true_prior: PriorSpec,
    /// `None` selects `[true_prior]` for the comparative study and the
    /// misspecification grid otherwise.
    pub design_priors: Option<Vec<PriorSpec>>,
    /// Prior draws in the Monte-Carlo objective of the optimal design.
    pub n_mc_draws: usize,
    /// Annealing settings; the seed is replaced per replication.
    pub optimizer: OptimizerConfig,
    pub k_clusters: usize,
    /// Randomizations averaged to score each randomized baseline.
    pub n_baseline_draws: usize,
    pub master_seed: u64,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            network_families: None,
            n_nodes: 100,
            n_replications: 20,
            true_prior: PriorSpec::default(),
            design_priors: None,
            n_mc_draws: 1000,
            optimizer: OptimizerConfig::default(),
            k_clusters: 4,
            n_baseline_draws: 50,
            master_seed: 0,
        }
    }
}

impl StudyConfig {
    pub fn families(&self) -> Vec<NetworkFamily> {
        self.network_families
            .clone()
            .unwrap_or_else(|| NetworkFamily::desk_defaults(self.n_nodes))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, msg: String| Err(Error::invalid(format!("{key}: {msg}")));
        if self.n_nodes < 4 {
            return bad("n_nodes", format!("must be at least 4, got {}", self.n_nodes));
        }
        if self.n_replications == 0 {
            return bad("n_replications", "must be at least 1".into());
        }
        if self.n_mc_draws == 0 {
            return bad("n_mc_draws", "must be at least 1".into());
        }
        if self.n_baseline_draws == 0 {
            return bad("n_baseline_draws", "must be at least 1".into());
        }
        if self.k_clusters < 2 || self.k_clusters > self.n_nodes / 2 {
            return bad(
                "k_clusters",
                format!("must be in 2..={}, got {}", self.n_nodes / 2, self.k_clusters),
            );
        }
        if self.network_families.as_ref().is_some_and(Vec::is_empty) {
            return bad("network_families", "must not be empty".into());
        }
        if self.design_priors.as_ref().is_some_and(Vec::is_empty) {
            return bad("design_priors", "must not be empty".into());
        }
        self.true_prior
            .validate()
            .map_err(|e| Error::invalid(format!("true_prior: {e}")))?;
        for (i, p) in self.design_priors.iter().flatten().enumerate() {
            p.validate()
                .map_err(|e| Error::invalid(format!("design_priors[{i}]: {e}")))?;
        }
        self.optimizer
            .validate()
            .map_err(|e| Error::invalid(format!("optimizer: {e}")))
    }
}

/// One scored design.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyRecord {
    pub replication_id: usize,
    pub network_family: String,
    pub design_strategy: Strategy,
    pub design_prior_id: usize,
    /// Integrated MSE under the true prior.
    pub imse_true: f64,
    /// `imse_true` divided by the randomized-balanced score on the same network.
    pub relative_imse: f64,
}

/// Scores of every strategy on one replication's network.
struct ReplicationScores {
    family_index: usize,
    family: String,
    replication_id: usize,
    balanced: f64,
    stratified: Option<f64>,
    optimal: Vec<f64>,
}

const STREAM_NETWORK: u64 = 0;
const STREAM_BALANCED: u64 = 1;
const STREAM_STRATIFIED: u64 = 2;
const STREAM_MC_DRAWS: u64 = 3;
const STREAM_OPTIMIZER: u64 = 4;

fn score_replication(
    cfg: &StudyConfig,
    family_index: usize,
    family: &NetworkFamily,
    replication_id: usize,
    design_priors: &[PriorSpec],
    with_stratified: bool,
) -> Result<ReplicationScores> {
    let rep_seed = derive_path(cfg.master_seed, &[family_index as u64, replication_id as u64]);
    let net = family.generate(cfg.n_nodes, derive(rep_seed, STREAM_NETWORK))?;
    let alg = net.algebra();
    let truth = QuadraticRiskObjective::closed_form(&cfg.true_prior, &alg)?;

    let mut rng = rng_from_seed(derive(rep_seed, STREAM_BALANCED));
    let mut balanced = 0.0;
    for _ in 0..cfg.n_baseline_draws {
        balanced += truth.evaluate(&randomized_balanced(cfg.n_nodes, &mut rng)?);
    }
    balanced /= cfg.n_baseline_draws as f64;

    let stratified = if with_stratified {
        let mut rng = rng_from_seed(derive(rep_seed, STREAM_STRATIFIED));
        let labels = spectral_clusters(&net, cfg.k_clusters, &mut rng)?;
        let mut total = 0.0;
        for _ in 0..cfg.n_baseline_draws {
            total += truth.evaluate(&stratified_randomization(&labels, &mut rng)?);
        }
        Some(total / cfg.n_baseline_draws as f64)
    } else {
        None
    };

    let optimal = design_priors
        .iter()
        .enumerate()
        .map(|(p, prior)| {
            let objective = QuadraticRiskObjective::monte_carlo(
                prior,
                &alg,
                cfg.n_mc_draws,
                derive_path(rep_seed, &[STREAM_MC_DRAWS, p as u64]),
            )?;
            let opt_cfg = cfg
                .optimizer
                .with_seed(derive_path(rep_seed, &[STREAM_OPTIMIZER, p as u64]));
            let design = optimize_assignment(&objective, &opt_cfg)?;
            Ok(truth.evaluate(&design.assignment))
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ReplicationScores {
        family_index,
        family: family.name().to_string(),
        replication_id,
        balanced,
        stratified,
        optimal,
    })
}

fn score_all(cfg: &StudyConfig, design_priors: &[PriorSpec], with_stratified: bool) -> Result<Vec<ReplicationScores>> {
    cfg.validate()?;
    for (i, p) in design_priors.iter().enumerate() {
        p.validate()
            .map_err(|e| Error::invalid(format!("design_priors[{i}]: {e}")))?;
    }
    let families = cfg.families();
    let jobs: Vec<(usize, usize)> = (0..families.len())
        .flat_map(|f| (0..cfg.n_replications).map(move |r| (f, r)))
        .collect();
    jobs.into_par_iter()
        .map(|(f, r)| score_replication(cfg, f, &families[f], r, design_priors, with_stratified))
        .collect()
}

fn record(s: &ReplicationScores, strategy: Strategy, prior_id: usize, imse: f64) -> StudyRecord {
    StudyRecord {
        replication_id: s.replication_id,
        network_family: s.family.clone(),
        design_strategy: strategy,
        design_prior_id: prior_id,
        imse_true: imse,
        relative_imse: imse / s.balanced,
    }
}

/// Optimal rows for each design prior, then baseline rows for each id in
/// `baseline_prior_ids`.
fn emit(scores: &[ReplicationScores], baseline_prior_ids: &[usize]) -> Vec<StudyRecord> {
    let mut out = Vec::new();
    let mut ordered: Vec<&ReplicationScores> = scores.iter().collect();
    ordered.sort_by_key(|s| (s.family_index, s.replication_id));
    for s in ordered {
        for (p, &v) in s.optimal.iter().enumerate() {
            out.push(record(s, Strategy::Optimal, p, v));
        }
        for &p in baseline_prior_ids {
            out.push(record(s, Strategy::RandomizedBalanced, p, s.balanced));
            if let Some(v) = s.stratified {
                out.push(record(s, Strategy::StratifiedSpectral, p, v));
            }
        }
    }
    out
}

/// Optimal design (per design prior, `[true_prior]` by default) against the
/// randomized-balanced and spectral-stratified baselines.
pub fn run_comparative_study(cfg: &StudyConfig) -> Result<Vec<StudyRecord>> {
    let priors = cfg.design_priors.clone().unwrap_or_else(|| vec![cfg.true_prior]);
    Ok(emit(&score_all(cfg, &priors, true)?, &[0]))
}

/// Optimal designs under each (possibly wrong) design prior, scored under
/// the true prior, plus one randomized-balanced row per replication.
pub fn run_misspecification_study(cfg: &StudyConfig) -> Result<Vec<StudyRecord>> {
    let priors = cfg
        .design_priors
        .clone()
        .unwrap_or_else(|| misspecification_grid(&cfg.true_prior));
    Ok(emit(&score_all(cfg, &priors, false)?, &[0]))
}

/// Full strategy x design prior x family x replication layout for the
/// analysis of variance. Baselines do not depend on the design prior, so
/// their rows are repeated under every prior id to keep the layout balanced.
pub fn run_factorial_study(cfg: &StudyConfig) -> Result<Vec<StudyRecord>> {
    let priors = cfg
        .design_priors
        .clone()
        .unwrap_or_else(|| misspecification_grid(&cfg.true_prior));
    let ids: Vec<usize> = (0..priors.len()).collect();
    Ok(emit(&score_all(cfg, &priors, true)?, &ids))
}

/// Per-network ratio of a strategy's score to another strategy's score.
#[derive(Clone, Debug, PartialEq)]
pub struct PairedRatio {
    pub network_family: String,
    pub replication_id: usize,
    pub design_prior_id: usize,
    pub ratio: f64,
}

/// Ratios `imse(numerator) / imse(denominator)` on matching networks. The
/// denominator row is matched on prior id when one exists, otherwise on
/// prior id 0.
pub fn paired_ratios(records: &[StudyRecord], numerator: Strategy, denominator: Strategy) -> Vec<PairedRatio> {
    use std::collections::HashMap;
    let denominators: HashMap<(&str, usize, usize), f64> = records
        .iter()
        .filter(|r| r.design_strategy == denominator)
        .map(|r| {
            (
                (r.network_family.as_str(), r.replication_id, r.design_prior_id),
                r.imse_true,
            )
        })
        .collect();
    records
        .iter()
        .filter(|r| r.design_strategy == numerator)
        .filter_map(|r| {
            let key = (r.network_family.as_str(), r.replication_id, r.design_prior_id);
            let fallback = (r.network_family.as_str(), r.replication_id, 0);
            let d = denominators.get(&key).or_else(|| denominators.get(&fallback))?;
            Some(PairedRatio {
                network_family: r.network_family.clone(),
                replication_id: r.replication_id,
                design_prior_id: r.design_prior_id,
                ratio: r.imse_true / d,
            })
        })
        .collect()
}

/// Median of a non-empty slice (mean of the middle pair for even lengths).
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    })
}
