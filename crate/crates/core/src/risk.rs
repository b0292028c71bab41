//! Mean squared error of the difference-in-means estimator under the
//! network-correlated outcome models, and its integral over a prior.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::models::{
    draw_params_from_prior, nef_abstract_poisson_gamma, NefAbstract, NormalModelParams, PoissonGammaParams, PriorSpec,
};
use crate::netgen::{NeighborhoodSizes, Network, NetworkAlgebra};
use crate::seeds::substream;
use crate::{Error, Result};

/// Binary treatment vector with both groups non-empty.
///
/// Ordering is lexicographic in `z` (unit 0 most significant), which is the
/// tie-break order used by the design searches.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment {
    z: Vec<bool>,
    n1: usize,
}

impl Assignment {
    pub fn new(z: Vec<bool>) -> Result<Self> {
        let n1 = z.iter().filter(|&&t| t).count();
        let n0 = z.len() - n1;
        if n1 == 0 || n0 == 0 {
            return Err(Error::DegenerateAssignment {
                treated: n1,
                control: n0,
            });
        }
        Ok(Assignment { z, n1 })
    }

    /// From a 0/1 vector.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        let z = bits
            .iter()
            .map(|&b| match b {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(Error::invalid(format!(
                    "assignment entries must be 0 or 1, got {other}"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(z)
    }

    pub fn to_bits(&self) -> Vec<u8> {
        self.z.iter().map(|&t| u8::from(t)).collect()
    }

    pub fn z(&self) -> &[bool] {
        &self.z
    }

    pub fn into_inner(self) -> Vec<bool> {
        self.z
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn is_treated(&self, i: usize) -> bool {
        self.z[i]
    }

    pub fn n_treated(&self) -> usize {
        self.n1
    }

    pub fn n_control(&self) -> usize {
        self.z.len() - self.n1
    }

    pub fn complement(&self) -> Assignment {
        Assignment {
            z: self.z.iter().map(|&t| !t).collect(),
            n1: self.n_control(),
        }
    }
}

/// `w_i = Z_i / N1 - (1 - Z_i) / N0`, so that the estimator is `w'Y`.
#[derive(Clone, Debug, PartialEq)]
pub struct ContrastWeights(pub Vec<f64>);

pub fn contrast_weights(a: &Assignment) -> ContrastWeights {
    let t = 1.0 / a.n_treated() as f64;
    let c = -1.0 / a.n_control() as f64;
    ContrastWeights(a.z.iter().map(|&z| if z { t } else { c }).collect())
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

/// Difference in mean closed-neighborhood size between treated and control.
pub fn delta_neighborhood(a: &Assignment, sizes: &NeighborhoodSizes) -> Result<f64> {
    check_len(a.len(), sizes.0.len())?;
    let (mut treated, mut control) = (0usize, 0usize);
    for (&z, &s) in a.z.iter().zip(&sizes.0) {
        if z {
            treated += s;
        } else {
            control += s;
        }
    }
    Ok(treated as f64 / a.n_treated() as f64 - control as f64 / a.n_control() as f64)
}

fn quadratic_form(w: &[f64], m: &DMatrix<f64>) -> f64 {
    let n = w.len();
    let mut total = 0.0;
    for i in 0..n {
        if w[i] == 0.0 {
            continue;
        }
        let mut row = 0.0;
        for j in 0..n {
            row += m[(i, j)] * w[j];
        }
        total += w[i] * row;
    }
    total
}

/// `w' cov w`.
pub fn variance_of_contrast(w: &ContrastWeights, cov: &DMatrix<f64>) -> Result<f64> {
    if cov.nrows() != cov.ncols() {
        return Err(Error::DimensionMismatch {
            expected: cov.nrows(),
            got: cov.ncols(),
        });
    }
    check_len(cov.nrows(), w.0.len())?;
    Ok(quadratic_form(&w.0, cov))
}

/// Assignment-dependent ingredients of the MSE. Every model-specific MSE
/// is a non-negative linear combination of these three numbers (plus a
/// per-unit diagonal term for non-constant conditional variances).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RiskTerms {
    /// Difference in mean neighborhood size.
    pub delta: f64,
    /// `w' A'A w`.
    pub gram_form: f64,
    /// `w'w = 1/N1 + 1/N0`.
    pub identity_form: f64,
}

impl RiskTerms {
    pub fn new(alg: &NetworkAlgebra, a: &Assignment) -> Result<Self> {
        check_len(alg.len(), a.len())?;
        let w = contrast_weights(a);
        Ok(RiskTerms {
            delta: delta_neighborhood(a, &alg.sizes)?,
            gram_form: quadratic_form(&w.0, &alg.gram.0),
            identity_form: 1.0 / a.n_treated() as f64 + 1.0 / a.n_control() as f64,
        })
    }

    /// `bias_coef * delta^2 + gram_coef * w'A'Aw + identity_coef * w'w`.
    pub fn combine(&self, bias_coef: f64, gram_coef: f64, identity_coef: f64) -> f64 {
        bias_coef * self.delta * self.delta + gram_coef * self.gram_form + identity_coef * self.identity_form
    }
}

/// `mu^2 delta^2 + w' (phi_x A'A + diag(E[Lambda])) w`.
pub fn mse_general(abs: &NefAbstract, alg: &NetworkAlgebra, a: &Assignment) -> Result<f64> {
    check_len(alg.len(), abs.expected_lambda().len())?;
    let terms = RiskTerms::new(alg, a)?;
    let w = contrast_weights(a);
    let diag: f64 = w.0.iter().zip(abs.expected_lambda()).map(|(wi, l)| wi * wi * l).sum();
    let mu = abs.mu();
    Ok(mu * mu * terms.delta * terms.delta + abs.phi_x() * terms.gram_form + diag)
}

/// Normal-Normal MSE: `mu^2 delta^2 + sigma2 w'(gamma2/sigma2 I + A'A)w`.
pub fn mse_normal(params: &NormalModelParams, alg: &NetworkAlgebra, a: &Assignment) -> Result<f64> {
    let terms = RiskTerms::new(alg, a)?;
    let mu = params.mu();
    let sigma2 = params.sigma2();
    Ok(mu * mu * terms.delta * terms.delta
        + sigma2 * (params.gamma2() / sigma2 * terms.identity_form + terms.gram_form))
}

/// Poisson-Gamma MSE, evaluated through the general form.
pub fn mse_poisson_gamma(
    params: &PoissonGammaParams,
    net: &Network,
    alg: &NetworkAlgebra,
    a: &Assignment,
) -> Result<f64> {
    mse_general(&nef_abstract_poisson_gamma(params, net), alg, a)
}

/// Bias/variance split of the Normal-Normal MSE, with the network variance
/// broken into within-treated, within-control and cross-group sums of shared
/// closed neighbors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MseDecomposition {
    pub bias_sq: f64,
    pub group_size_var: f64,
    pub net_var_treated: f64,
    pub net_var_control: f64,
    /// Enters the total with a minus sign.
    pub net_var_cross: f64,
    pub total: f64,
}

pub fn mse_decomposition_normal(
    params: &NormalModelParams,
    alg: &NetworkAlgebra,
    a: &Assignment,
) -> Result<MseDecomposition> {
    check_len(alg.len(), a.len())?;
    let delta = delta_neighborhood(a, &alg.sizes)?;
    let n1 = a.n_treated() as f64;
    let n0 = a.n_control() as f64;
    let (mut tt, mut cc, mut tc) = (0.0, 0.0, 0.0);
    let g = &alg.gram.0;
    for i in 0..a.len() {
        for j in 0..a.len() {
            match (a.z[i], a.z[j]) {
                (true, true) => tt += g[(i, j)],
                (false, false) => cc += g[(i, j)],
                (true, false) => tc += g[(i, j)],
                (false, true) => {}
            }
        }
    }
    let s2 = params.sigma2();
    let bias_sq = params.mu() * params.mu() * delta * delta;
    let group_size_var = params.gamma2() * (1.0 / n1 + 1.0 / n0);
    let net_var_treated = s2 / (n1 * n1) * tt;
    let net_var_control = s2 / (n0 * n0) * cc;
    let net_var_cross = 2.0 * s2 / (n1 * n0) * tc;
    Ok(MseDecomposition {
        bias_sq,
        group_size_var,
        net_var_treated,
        net_var_control,
        net_var_cross,
        total: bias_sq + group_size_var + net_var_treated + net_var_control - net_var_cross,
    })
}

/// Monte-Carlo estimate of the integrated MSE.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImseEstimate {
    pub value: f64,
    pub n_draws: usize,
    /// Sample standard deviation of the per-draw MSE over `sqrt(n_draws)`.
    pub std_error: f64,
}

/// Parameter draws `0..n_draws`; draw `i` always comes from substream `i`
/// of `seed`, independent of thread scheduling.
pub fn prior_draws(prior: &PriorSpec, n_draws: usize, seed: u64) -> Result<Vec<NormalModelParams>> {
    prior.validate()?;
    (0..n_draws)
        .into_par_iter()
        .map(|i| draw_params_from_prior(prior, &mut substream(seed, i as u64)))
        .collect()
}

pub fn imse_mc(
    prior: &PriorSpec,
    alg: &NetworkAlgebra,
    a: &Assignment,
    n_draws: usize,
    seed: u64,
) -> Result<ImseEstimate> {
    if n_draws == 0 {
        return Err(Error::invalid("n_draws must be at least 1"));
    }
    let terms = RiskTerms::new(alg, a)?;
    let per_draw: Vec<f64> = prior_draws(prior, n_draws, seed)?
        .iter()
        .map(|p| terms.combine(p.mu() * p.mu(), p.sigma2(), p.gamma2()))
        .collect();
    let n = n_draws as f64;
    let value = per_draw.iter().sum::<f64>() / n;
    let std_error = if n_draws > 1 {
        let var = per_draw.iter().map(|m| (m - value).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    Ok(ImseEstimate {
        value,
        n_draws,
        std_error,
    })
}

/// Exact integrated MSE of the Normal-Normal model. The MSE is linear in
/// `mu^2`, `sigma2` and `gamma2`, so integrating substitutes their prior
/// means.
pub fn imse_closed_form_normal(prior: &PriorSpec, alg: &NetworkAlgebra, a: &Assignment) -> Result<f64> {
    prior.validate()?;
    let terms = RiskTerms::new(alg, a)?;
    Ok(terms.combine(prior.mean_mu_sq(), prior.mean_sigma2(), prior.mean_gamma2()))
}
