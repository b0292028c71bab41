//! Whether independent Monte-Carlo estimates of the integrated MSE rank
//! candidate designs the same way the exact value does.

use serde::{Deserialize, Serialize};

use super::StudyConfig;
use crate::design::{
    optimize_assignment, randomized_balanced, spectral_clusters, stratified_randomization, Objective,
    QuadraticRiskObjective,
};
use crate::models::PriorSpec;
use crate::netgen::NetworkAlgebra;
use crate::risk::Assignment;
use crate::seeds::{derive, derive_path, rng_from_seed};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankingStabilityReport {
    pub n_pairs: usize,
    pub n_designs: usize,
    /// Design pairs compared per repetition times `n_pairs`.
    pub n_comparisons: usize,
    /// Design pairs left out because their exact values coincide.
    pub n_ties_excluded: usize,
    /// Fraction of comparisons where both estimates agree with the exact order.
    pub concordance: f64,
}

fn tied(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

/// For each of `n_pairs` repetitions, two independent estimates with
/// `n_draws` prior draws each are compared with the exact ordering of every
/// design pair. Pairs with equal exact values are excluded; when nothing is
/// left to compare the concordance is 1.
pub fn ranking_stability(
    alg: &NetworkAlgebra,
    prior: &PriorSpec,
    designs: &[Assignment],
    n_draws: usize,
    n_pairs: usize,
    seed: u64,
) -> Result<RankingStabilityReport> {
    if designs.len() < 2 {
        return Err(Error::invalid(format!(
            "ranking stability needs at least 2 designs, got {}",
            designs.len()
        )));
    }
    if n_pairs == 0 {
        return Err(Error::invalid("n_pairs must be at least 1"));
    }
    for d in designs {
        if d.len() != alg.len() {
            return Err(Error::DimensionMismatch {
                expected: alg.len(),
                got: d.len(),
            });
        }
    }
    let exact_obj = QuadraticRiskObjective::closed_form(prior, alg)?;
    let exact: Vec<f64> = designs.iter().map(|d| exact_obj.evaluate(d)).collect();

    let mut ordered = Vec::new();
    let mut ties = 0;
    for a in 0..designs.len() {
        for b in a + 1..designs.len() {
            if tied(exact[a], exact[b]) {
                ties += 1;
            } else if exact[a] < exact[b] {
                ordered.push((a, b));
            } else {
                ordered.push((b, a));
            }
        }
    }

    let mut agree = 0;
    for t in 0..n_pairs as u64 {
        let first = QuadraticRiskObjective::monte_carlo(prior, alg, n_draws, derive_path(seed, &[t, 0]))?;
        let second = QuadraticRiskObjective::monte_carlo(prior, alg, n_draws, derive_path(seed, &[t, 1]))?;
        let e1: Vec<f64> = designs.iter().map(|d| first.evaluate(d)).collect();
        let e2: Vec<f64> = designs.iter().map(|d| second.evaluate(d)).collect();
        agree += ordered
            .iter()
            .filter(|&&(lo, hi)| e1[lo] < e1[hi] && e2[lo] < e2[hi])
            .count();
    }
    let n_comparisons = ordered.len() * n_pairs;
    Ok(RankingStabilityReport {
        n_pairs,
        n_designs: designs.len(),
        n_comparisons,
        n_ties_excluded: ties * n_pairs,
        concordance: if n_comparisons == 0 {
            1.0
        } else {
            agree as f64 / n_comparisons as f64
        },
    })
}

/// Ranking stability on one network of the first configured family, with
/// `n_designs` candidates cycling through optimal, randomized-balanced and
/// spectral-stratified designs. Estimates use the true prior.
pub fn run_ranking_study(
    cfg: &StudyConfig,
    n_designs: usize,
    n_draws: usize,
    n_pairs: usize,
) -> Result<RankingStabilityReport> {
    cfg.validate()?;
    let family = cfg.families().remove(0);
    let seed = derive(cfg.master_seed, 0x5241_4e4b);
    let net = family.generate(cfg.n_nodes, derive(seed, 0))?;
    let alg = net.algebra();
    let mut rng = rng_from_seed(derive(seed, 1));
    let labels = spectral_clusters(&net, cfg.k_clusters, &mut rng)?;
    let mut designs = Vec::with_capacity(n_designs);
    for i in 0..n_designs {
        let design = match i % 3 {
            0 => {
                let objective = QuadraticRiskObjective::monte_carlo(
                    &cfg.true_prior,
                    &alg,
                    cfg.n_mc_draws,
                    derive_path(seed, &[2, i as u64]),
                )?;
                let opt = cfg.optimizer.with_seed(derive_path(seed, &[3, i as u64]));
                optimize_assignment(&objective, &opt)?.assignment
            }
            1 => randomized_balanced(cfg.n_nodes, &mut rng)?,
            _ => stratified_randomization(&labels, &mut rng)?,
        };
        designs.push(design);
    }
    ranking_stability(&alg, &cfg.true_prior, &designs, n_draws, n_pairs, derive(seed, 4))
}
