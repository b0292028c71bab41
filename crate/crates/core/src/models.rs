//! Network-correlated outcome models.
//!
//! Each unit carries a latent `X_j`; unit `i` responds to the sum of the
//! latents over its closed neighborhood, so units that share neighbors have
//! correlated outcomes. Two concrete instances are provided: Normal-Normal
//! and Poisson-Gamma. Treatment shifts every outcome by a constant `tau`.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Gamma, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::netgen::{Network, NetworkAlgebra};
use crate::risk::Assignment;
use crate::{Error, Result};

/// Parameters of the Normal-Normal model:
/// `X_j ~ Normal(mu, sigma2)`, `Y_i | X ~ Normal(sum_{j in N_i} X_j, gamma2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalModelParams {
    mu: f64,
    sigma2: f64,
    gamma2: f64,
}

impl NormalModelParams {
    /// `sigma2` must be positive; `gamma2` may be zero (noise-free outcomes
    /// given the latents).
    pub fn new(mu: f64, sigma2: f64, gamma2: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::invalid(format!("mu must be finite, got {mu}")));
        }
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::invalid(format!("sigma2 must be positive, got {sigma2}")));
        }
        if !(gamma2 >= 0.0 && gamma2.is_finite()) {
            return Err(Error::invalid(format!("gamma2 must be non-negative, got {gamma2}")));
        }
        Ok(NormalModelParams { mu, sigma2, gamma2 })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn gamma2(&self) -> f64 {
        self.gamma2
    }
}

/// Parameters of the Poisson-Gamma model:
/// `X_j ~ lambda * Gamma(r)`, `Y_i | X ~ Poisson(sum_{j in N_i} X_j)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoissonGammaParams {
    r: f64,
    lambda: f64,
}

impl PoissonGammaParams {
    pub fn new(r: f64, lambda: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::invalid(format!("Gamma shape r must be positive, got {r}")));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::invalid(format!("lambda must be positive, got {lambda}")));
        }
        Ok(PoissonGammaParams { r, lambda })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// Model-independent summary that fully determines the MSE: the latent
/// mean, the latent variance function value, and the expected conditional
/// variance of each unit.
#[derive(Clone, Debug, PartialEq)]
pub struct NefAbstract {
    mu: f64,
    phi_x: f64,
    expected_lambda: Vec<f64>,
}

impl NefAbstract {
    pub fn new(mu: f64, phi_x: f64, expected_lambda: Vec<f64>) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::invalid("mu must be finite"));
        }
        if !(phi_x >= 0.0 && phi_x.is_finite()) {
            return Err(Error::invalid(format!("phi_x must be non-negative, got {phi_x}")));
        }
        if expected_lambda.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
            return Err(Error::invalid("expected conditional variances must be non-negative"));
        }
        Ok(NefAbstract {
            mu,
            phi_x,
            expected_lambda,
        })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn phi_x(&self) -> f64 {
        self.phi_x
    }

    pub fn expected_lambda(&self) -> &[f64] {
        &self.expected_lambda
    }
}

pub fn nef_abstract_normal(params: &NormalModelParams, net: &Network) -> NefAbstract {
    NefAbstract {
        mu: params.mu,
        phi_x: params.sigma2,
        expected_lambda: vec![params.gamma2; net.node_count()],
    }
}

pub fn nef_abstract_poisson_gamma(params: &PoissonGammaParams, net: &Network) -> NefAbstract {
    let mu = params.r * params.lambda;
    NefAbstract {
        mu,
        phi_x: mu * params.lambda,
        // E[sum_{j in N_i} X_j] = |N_i| * r * lambda
        expected_lambda: (0..net.node_count()).map(|i| (net.degree(i) + 1) as f64 * mu).collect(),
    }
}

/// Marginal covariance of `Y(0)`: `phi_x * A'A + diag(E[Lambda])`.
pub fn marginal_covariance(abs: &NefAbstract, alg: &NetworkAlgebra) -> Result<DMatrix<f64>> {
    let n = alg.len();
    if abs.expected_lambda.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: abs.expected_lambda.len(),
        });
    }
    let mut cov = &alg.gram.0 * abs.phi_x;
    for (i, &v) in abs.expected_lambda.iter().enumerate() {
        cov[(i, i)] += v;
    }
    Ok(cov)
}

/// Hyper-prior over Normal-Normal parameters:
/// `gamma2 ~ InvGamma(r_gamma, lambda_gamma)`, `mu ~ Normal(mu0, sd = sigma0)`,
/// `sigma2 ~ InvGamma(r_sigma, lambda_sigma)`.
///
/// Inverse-Gamma uses (shape, scale), so its mean is `scale / (shape - 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorSpec {
    pub mu0: f64,
    pub sigma0: f64,
    pub r_gamma: f64,
    pub lambda_gamma: f64,
    pub r_sigma: f64,
    pub lambda_sigma: f64,
}

impl Default for PriorSpec {
    /// The generating prior of the simulation studies.
    fn default() -> Self {
        PriorSpec {
            mu0: 1.0,
            sigma0: 0.5,
            r_gamma: 3.0,
            lambda_gamma: 1.0,
            r_sigma: 2.0,
            lambda_sigma: 1.0,
        }
    }
}

impl PriorSpec {
    pub fn new(
        mu0: f64,
        sigma0: f64,
        r_gamma: f64,
        lambda_gamma: f64,
        r_sigma: f64,
        lambda_sigma: f64,
    ) -> Result<Self> {
        let prior = PriorSpec {
            mu0,
            sigma0,
            r_gamma,
            lambda_gamma,
            r_sigma,
            lambda_sigma,
        };
        prior.validate()?;
        Ok(prior)
    }

    /// Same prior with a different `(mu0, sigma0)` pair.
    pub fn with_mean_prior(self, mu0: f64, sigma0: f64) -> Self {
        PriorSpec { mu0, sigma0, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mu0.is_finite() {
            return Err(Error::invalid(format!("mu0 must be finite, got {}", self.mu0)));
        }
        for (name, v) in [
            ("sigma0", self.sigma0),
            ("lambda_gamma", self.lambda_gamma),
            ("lambda_sigma", self.lambda_sigma),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("r_gamma", self.r_gamma), ("r_sigma", self.r_sigma)] {
            if !(v > 1.0 && v.is_finite()) {
                return Err(Error::NonIntegrablePrior(format!(
                    "{name} must exceed 1 for a finite integrated MSE, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Prior mean of `mu^2`.
    pub fn mean_mu_sq(&self) -> f64 {
        self.sigma0 * self.sigma0 + self.mu0 * self.mu0
    }

    /// Prior mean of `sigma2`.
    pub fn mean_sigma2(&self) -> f64 {
        self.lambda_sigma / (self.r_sigma - 1.0)
    }

    /// Prior mean of `gamma2`.
    pub fn mean_gamma2(&self) -> f64 {
        self.lambda_gamma / (self.r_gamma - 1.0)
    }
}

fn inverse_gamma<R: Rng + ?Sized>(rng: &mut R, shape: f64, scale: f64) -> f64 {
    let g = Gamma::new(shape, 1.0).expect("validated shape").sample(rng);
    scale / g
}

/// Draws `(mu, sigma2, gamma2)` in the order `gamma2`, `mu`, `sigma2`.
pub fn draw_params_from_prior<R: Rng + ?Sized>(prior: &PriorSpec, rng: &mut R) -> Result<NormalModelParams> {
    prior.validate()?;
    let gamma2 = inverse_gamma(rng, prior.r_gamma, prior.lambda_gamma);
    let mu = Normal::new(prior.mu0, prior.sigma0)
        .expect("validated sigma0")
        .sample(rng);
    let sigma2 = inverse_gamma(rng, prior.r_sigma, prior.lambda_sigma);
    NormalModelParams::new(mu, sigma2, gamma2)
}

/// One realization of the control potential outcomes. `Y(1)` is never stored:
/// it is always `Y(0) + tau`.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeVector {
    pub y0: Vec<f64>,
    pub tau: f64,
}

impl OutcomeVector {
    pub fn y1(&self, i: usize) -> f64 {
        self.y0[i] + self.tau
    }

    /// Difference-in-means estimate under assignment `a`, observing `Y_i(1)`
    /// for treated and `Y_i(0)` for control units.
    pub fn difference_in_means(&self, a: &Assignment) -> Result<f64> {
        if a.len() != self.y0.len() {
            return Err(Error::DimensionMismatch {
                expected: self.y0.len(),
                got: a.len(),
            });
        }
        let (mut treated, mut control) = (0.0, 0.0);
        for (i, &z) in a.z().iter().enumerate() {
            if z {
                treated += self.y1(i);
            } else {
                control += self.y0[i];
            }
        }
        Ok(treated / a.n_treated() as f64 - control / a.n_control() as f64)
    }
}

fn neighborhood_sums(net: &Network, x: &[f64]) -> Vec<f64> {
    (0..net.node_count())
        .map(|i| x[i] + net.neighbors(i).iter().map(|&j| x[j]).sum::<f64>())
        .collect()
}

pub fn sample_outcomes_normal<R: Rng + ?Sized>(
    params: &NormalModelParams,
    net: &Network,
    tau: f64,
    rng: &mut R,
) -> OutcomeVector {
    let latent = Normal::new(params.mu, params.sigma2.sqrt()).expect("validated sigma2");
    let x: Vec<f64> = (0..net.node_count()).map(|_| latent.sample(rng)).collect();
    let noise = Normal::new(0.0, params.gamma2.sqrt()).expect("validated gamma2");
    let y0 = neighborhood_sums(net, &x)
        .into_iter()
        .map(|m| m + noise.sample(rng))
        .collect();
    OutcomeVector { y0, tau }
}

pub fn sample_outcomes_poisson_gamma<R: Rng + ?Sized>(
    params: &PoissonGammaParams,
    net: &Network,
    tau: f64,
    rng: &mut R,
) -> OutcomeVector {
    let latent = Gamma::new(params.r, 1.0).expect("validated shape");
    let x: Vec<f64> = (0..net.node_count())
        .map(|_| params.lambda * latent.sample(rng))
        .collect();
    let y0 = neighborhood_sums(net, &x)
        .into_iter()
        .map(|rate| {
            if rate > 0.0 {
                Poisson::new(rate).expect("positive rate").sample(rng)
            } else {
                0.0
            }
        })
        .collect();
    OutcomeVector { y0, tau }
}
