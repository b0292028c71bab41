//! Treatment assignment strategies.

mod anneal;
mod spectral;

pub use anneal::{
    optimize_assignment, FnObjective, Move, Objective, OptimizerConfig, QuadraticRiskObjective, QuadraticState,
};
pub use spectral::{kmeans, spectral_clusters, spectral_embedding};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::models::NormalModelParams;
use crate::netgen::{sample_nodes, Network, NetworkAlgebra};
use crate::risk::Assignment;
use crate::{Error, Result};

/// Largest network [`brute_force`] will enumerate.
pub const BRUTE_FORCE_MAX_UNITS: usize = 20;

#[derive(Clone, Debug, PartialEq)]
pub struct DesignResult {
    pub assignment: Assignment,
    /// Objective at `assignment`, freshly evaluated.
    pub objective: f64,
    /// `(iteration, best objective so far)`, non-increasing.
    pub trace: Vec<(usize, f64)>,
    pub point_prior: Option<PointPriorReport>,
}

/// Candidate designs and cross-evaluation matrix of the point-prior procedure.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointPriorReport {
    pub candidates: Vec<Vec<u8>>,
    /// `gamma[i][j]` is the MSE of candidate `i` under parameter set `j`.
    pub gamma: Vec<Vec<f64>>,
    pub losses: Vec<f64>,
    pub winner: usize,
}

/// `floor(n / 2)` distinct units chosen uniformly.
pub(crate) fn balanced_indices<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<usize> {
    sample_nodes(rng, n, n / 2)
}

/// Completely randomized design with `floor(n / 2)` treated units.
pub fn randomized_balanced<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Assignment> {
    if n < 2 {
        return Err(Error::invalid(format!("need at least 2 units, got {n}")));
    }
    let mut z = vec![false; n];
    for i in balanced_indices(rng, n) {
        z[i] = true;
    }
    Assignment::new(z)
}

/// Balanced randomization within each stratum.
///
/// A stratum of size `m` treats `floor(m/2)` or `ceil(m/2)` units. Half of the
/// odd-sized strata (rounded down, chosen at random) round up, so the overall
/// treated count is always `floor(n / 2)`.
pub fn stratified_randomization<R: Rng + ?Sized>(labels: &[usize], rng: &mut R) -> Result<Assignment> {
    let n = labels.len();
    if n < 2 {
        return Err(Error::invalid(format!("need at least 2 units, got {n}")));
    }
    let n_strata = labels.iter().max().map_or(0, |&m| m + 1);
    let mut strata: Vec<Vec<usize>> = vec![Vec::new(); n_strata];
    for (i, &l) in labels.iter().enumerate() {
        strata[l].push(i);
    }
    let odd: Vec<usize> = (0..n_strata).filter(|&s| strata[s].len() % 2 == 1).collect();
    let mut round_up = vec![false; n_strata];
    for idx in sample_nodes(rng, odd.len(), odd.len() / 2) {
        round_up[odd[idx]] = true;
    }
    let mut z = vec![false; n];
    for (s, members) in strata.iter().enumerate() {
        let take = members.len() / 2 + usize::from(round_up[s]);
        for idx in sample_nodes(rng, members.len(), take) {
            z[members[idx]] = true;
        }
    }
    Assignment::new(z)
}

/// Stratified design with strata from spectral clustering of the network.
pub fn stratified_spectral<R: Rng + ?Sized>(net: &Network, k_clusters: usize, rng: &mut R) -> Result<Assignment> {
    let labels = spectral_clusters(net, k_clusters, rng)?;
    stratified_randomization(&labels, rng)
}

fn assignment_from_code(code: u64, n: usize) -> Vec<bool> {
    (0..n).map(|i| (code >> (n - 1 - i)) & 1 == 1).collect()
}

/// Exact minimum over all non-degenerate assignments. Ties go to the
/// smallest binary encoding of `Z`, unit 0 being the most significant bit.
pub fn brute_force<O: Objective>(objective: &O) -> Result<DesignResult> {
    let n = objective.n_units();
    if n > BRUTE_FORCE_MAX_UNITS {
        return Err(Error::TooLarge {
            n,
            max: BRUTE_FORCE_MAX_UNITS,
        });
    }
    if n < 2 {
        return Err(Error::invalid(format!("need at least 2 units, got {n}")));
    }
    let all = (1u64 << n) - 1;
    let (objective_value, code) = (1..all)
        .into_par_iter()
        .map(|code| {
            let a = Assignment::new(assignment_from_code(code, n)).expect("non-degenerate code");
            (objective.evaluate(&a), code)
        })
        .reduce(
            || (f64::INFINITY, u64::MAX),
            |a, b| match a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)) {
                std::cmp::Ordering::Greater => b,
                _ => a,
            },
        );
    Ok(DesignResult {
        assignment: Assignment::new(assignment_from_code(code, n))?,
        objective: objective_value,
        trace: Vec::new(),
        point_prior: None,
    })
}

/// Parameter sets and their (unnormalized) prior weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointPriorGrid {
    pub params: Vec<NormalModelParams>,
    pub weights: Vec<f64>,
}

impl PointPriorGrid {
    pub fn new(params: Vec<NormalModelParams>, weights: Vec<f64>) -> Result<Self> {
        let grid = PointPriorGrid { params, weights };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.params.is_empty() {
            return Err(Error::invalid("point-prior grid needs at least one parameter set"));
        }
        if self.params.len() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                expected: self.params.len(),
                got: self.weights.len(),
            });
        }
        if self.weights.iter().any(|&w| !(w >= 0.0 && w.is_finite())) {
            return Err(Error::invalid("point-prior weights must be non-negative"));
        }
        if !self.weights.iter().any(|&w| w > 0.0) {
            return Err(Error::invalid("at least one point-prior weight must be positive"));
        }
        for p in &self.params {
            NormalModelParams::new(p.mu(), p.sigma2(), p.gamma2())?;
        }
        Ok(())
    }
}

/// Three-step point-prior procedure: optimize the MSE at each parameter set,
/// cross-evaluate every candidate under every parameter set, and return the
/// candidate with the smallest prior-weighted loss (first index on ties).
///
/// Every per-parameter search uses the same `cfg`, seed included.
pub fn point_prior_design(grid: &PointPriorGrid, alg: &NetworkAlgebra, cfg: &OptimizerConfig) -> Result<DesignResult> {
    grid.validate()?;
    let objectives: Vec<QuadraticRiskObjective> = grid
        .params
        .iter()
        .map(|p| QuadraticRiskObjective::point(p, alg))
        .collect();
    let candidates = objectives
        .iter()
        .map(|obj| optimize_assignment(obj, cfg))
        .collect::<Result<Vec<_>>>()?;
    let gamma: Vec<Vec<f64>> = candidates
        .iter()
        .map(|c| objectives.iter().map(|obj| obj.evaluate(&c.assignment)).collect())
        .collect();
    let losses: Vec<f64> = gamma
        .iter()
        .map(|row| row.iter().zip(&grid.weights).map(|(g, w)| g * w).sum())
        .collect();
    let winner = (1..losses.len()).fold(0, |best, i| if losses[i] < losses[best] { i } else { best });
    let report = PointPriorReport {
        candidates: candidates.iter().map(|c| c.assignment.to_bits()).collect(),
        gamma,
        losses,
        winner,
    };
    let chosen = candidates.into_iter().nth(winner).expect("winner index in range");
    Ok(DesignResult {
        assignment: chosen.assignment,
        objective: report.losses[winner],
        trace: chosen.trace,
        point_prior: Some(report),
    })
}
