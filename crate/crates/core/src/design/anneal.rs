//! Simulated annealing over treatment assignments.
//!
//! The move set mixes single-unit flips, which change the group sizes, with
//! treated/control swaps, which keep them fixed. Flips that would empty a
//! group are rejected. Temperature cools geometrically every iteration.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::models::{NormalModelParams, PriorSpec};
use crate::netgen::NetworkAlgebra;
use crate::risk::{prior_draws, Assignment, RiskTerms};
use crate::seeds::{substream, StreamRng};
use crate::{Error, Result};

use super::{balanced_indices, DesignResult};

/// Local modification of an assignment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Move {
    Flip(usize),
    Swap { treated: usize, control: usize },
}

/// Function to minimize over assignments, with optional incremental
/// evaluation of local moves.
///
/// `peek` and `apply` receive the assignment *before* the move. Only moves
/// that leave both groups non-empty are ever passed in.
pub trait Objective: Sync {
    type State: Send;

    fn n_units(&self) -> usize;

    fn evaluate(&self, a: &Assignment) -> f64;

    fn init(&self, a: &Assignment) -> Self::State;

    fn value(&self, state: &Self::State) -> f64;

    fn peek(&self, state: &Self::State, z: &[bool], mv: Move) -> f64;

    fn apply(&self, state: &mut Self::State, z: &[bool], mv: Move);
}

fn moved(z: &[bool], mv: Move) -> Assignment {
    let mut z = z.to_vec();
    match mv {
        Move::Flip(k) => z[k] = !z[k],
        Move::Swap { treated, control } => {
            z[treated] = false;
            z[control] = true;
        }
    }
    Assignment::new(z).expect("moves never empty a group")
}

/// Wraps a plain closure; every move is evaluated from scratch.
pub struct FnObjective<F> {
    n: usize,
    f: F,
}

impl<F> FnObjective<F>
where
    F: Fn(&Assignment) -> f64 + Sync,
{
    pub fn new(n: usize, f: F) -> Self {
        FnObjective { n, f }
    }
}

impl<F> Objective for FnObjective<F>
where
    F: Fn(&Assignment) -> f64 + Sync,
{
    type State = f64;

    fn n_units(&self) -> usize {
        self.n
    }

    fn evaluate(&self, a: &Assignment) -> f64 {
        (self.f)(a)
    }

    fn init(&self, a: &Assignment) -> f64 {
        (self.f)(a)
    }

    fn value(&self, state: &f64) -> f64 {
        *state
    }

    fn peek(&self, _: &f64, z: &[bool], mv: Move) -> f64 {
        (self.f)(&moved(z, mv))
    }

    fn apply(&self, state: &mut f64, z: &[bool], mv: Move) {
        *state = (self.f)(&moved(z, mv));
    }
}

/// `bias_coef * delta^2 + gram_coef * w'A'Aw + identity_coef * w'w`.
///
/// This covers the Normal-Normal MSE at a point (`mu^2, sigma2, gamma2`),
/// its exact prior integral (prior means), and its Monte-Carlo integral with
/// a fixed set of draws (sample means over the draws). Moves are evaluated
/// in O(1) and applied in O(n).
#[derive(Clone, Debug)]
pub struct QuadraticRiskObjective<'a> {
    alg: &'a NetworkAlgebra,
    bias_coef: f64,
    gram_coef: f64,
    identity_coef: f64,
    total_size: f64,
    total_gram: f64,
}

#[derive(Clone, Debug)]
pub struct QuadraticState {
    /// `G z`.
    gz: Vec<f64>,
    /// `z' G z`.
    within_treated: f64,
    /// `z' G 1`.
    treated_row_sum: f64,
    /// Sum of neighborhood sizes over treated units.
    treated_size: f64,
    n1: usize,
}

impl<'a> QuadraticRiskObjective<'a> {
    pub fn new(alg: &'a NetworkAlgebra, bias_coef: f64, gram_coef: f64, identity_coef: f64) -> Self {
        QuadraticRiskObjective {
            alg,
            bias_coef,
            gram_coef,
            identity_coef,
            total_size: alg.sizes.0.iter().sum::<usize>() as f64,
            total_gram: alg.gram_row_sums.iter().sum(),
        }
    }

    /// MSE at a single parameter value.
    pub fn point(params: &NormalModelParams, alg: &'a NetworkAlgebra) -> Self {
        Self::new(alg, params.mu() * params.mu(), params.sigma2(), params.gamma2())
    }

    /// Exact integrated MSE under `prior`.
    pub fn closed_form(prior: &PriorSpec, alg: &'a NetworkAlgebra) -> Result<Self> {
        prior.validate()?;
        Ok(Self::new(
            alg,
            prior.mean_mu_sq(),
            prior.mean_sigma2(),
            prior.mean_gamma2(),
        ))
    }

    /// Monte-Carlo integrated MSE with the draws of [`crate::risk::imse_mc`]
    /// for the same `seed`, held fixed across all candidate assignments.
    pub fn monte_carlo(prior: &PriorSpec, alg: &'a NetworkAlgebra, n_draws: usize, seed: u64) -> Result<Self> {
        if n_draws == 0 {
            return Err(Error::invalid("n_draws must be at least 1"));
        }
        let draws = prior_draws(prior, n_draws, seed)?;
        let n = n_draws as f64;
        let (mut mu_sq, mut sigma2, mut gamma2) = (0.0, 0.0, 0.0);
        for p in &draws {
            mu_sq += p.mu() * p.mu();
            sigma2 += p.sigma2();
            gamma2 += p.gamma2();
        }
        Ok(Self::new(alg, mu_sq / n, sigma2 / n, gamma2 / n))
    }

    pub fn coefficients(&self) -> (f64, f64, f64) {
        (self.bias_coef, self.gram_coef, self.identity_coef)
    }

    fn value_of(&self, within: f64, row_sum: f64, size: f64, n1: usize) -> f64 {
        let n = self.alg.len();
        let t = n1 as f64;
        let c = (n - n1) as f64;
        let gram_form = within / (t * t) + (self.total_gram - 2.0 * row_sum + within) / (c * c)
            - 2.0 * (row_sum - within) / (t * c);
        let delta = size / t - (self.total_size - size) / c;
        self.bias_coef * delta * delta + self.gram_coef * gram_form + self.identity_coef * (1.0 / t + 1.0 / c)
    }

    fn gram(&self, i: usize, j: usize) -> f64 {
        self.alg.gram.0[(i, j)]
    }

    fn size(&self, i: usize) -> f64 {
        self.alg.sizes.0[i] as f64
    }

    fn after(&self, s: &QuadraticState, z: &[bool], mv: Move) -> (f64, f64, f64, usize) {
        match mv {
            Move::Flip(k) if z[k] => (
                s.within_treated - 2.0 * s.gz[k] + self.gram(k, k),
                s.treated_row_sum - self.alg.gram_row_sums[k],
                s.treated_size - self.size(k),
                s.n1 - 1,
            ),
            Move::Flip(k) => (
                s.within_treated + 2.0 * s.gz[k] + self.gram(k, k),
                s.treated_row_sum + self.alg.gram_row_sums[k],
                s.treated_size + self.size(k),
                s.n1 + 1,
            ),
            Move::Swap { treated: i, control: j } => (
                s.within_treated - 2.0 * s.gz[i]
                    + self.gram(i, i)
                    + 2.0 * (s.gz[j] - self.gram(i, j))
                    + self.gram(j, j),
                s.treated_row_sum - self.alg.gram_row_sums[i] + self.alg.gram_row_sums[j],
                s.treated_size - self.size(i) + self.size(j),
                s.n1,
            ),
        }
    }
}

impl Objective for QuadraticRiskObjective<'_> {
    type State = QuadraticState;

    fn n_units(&self) -> usize {
        self.alg.len()
    }

    fn evaluate(&self, a: &Assignment) -> f64 {
        RiskTerms::new(self.alg, a)
            .expect("assignment sized to the network")
            .combine(self.bias_coef, self.gram_coef, self.identity_coef)
    }

    fn init(&self, a: &Assignment) -> QuadraticState {
        let n = self.alg.len();
        let g = &self.alg.gram.0;
        let gz: Vec<f64> = (0..n)
            .map(|i| (0..n).filter(|&j| a.is_treated(j)).map(|j| g[(i, j)]).sum())
            .collect();
        let treated = (0..n).filter(|&i| a.is_treated(i));
        QuadraticState {
            within_treated: treated.clone().map(|i| gz[i]).sum(),
            treated_row_sum: treated.clone().map(|i| self.alg.gram_row_sums[i]).sum(),
            treated_size: treated.map(|i| self.size(i)).sum(),
            n1: a.n_treated(),
            gz,
        }
    }

    fn value(&self, s: &QuadraticState) -> f64 {
        self.value_of(s.within_treated, s.treated_row_sum, s.treated_size, s.n1)
    }

    fn peek(&self, s: &QuadraticState, z: &[bool], mv: Move) -> f64 {
        let (w, r, sz, n1) = self.after(s, z, mv);
        self.value_of(w, r, sz, n1)
    }

    fn apply(&self, s: &mut QuadraticState, z: &[bool], mv: Move) {
        let (w, r, sz, n1) = self.after(s, z, mv);
        s.within_treated = w;
        s.treated_row_sum = r;
        s.treated_size = sz;
        s.n1 = n1;
        let g = &self.alg.gram.0;
        let mut shift = |k: usize, sign: f64| {
            for (i, v) in s.gz.iter_mut().enumerate() {
                *v += sign * g[(i, k)];
            }
        };
        match mv {
            Move::Flip(k) => shift(k, if z[k] { -1.0 } else { 1.0 }),
            Move::Swap { treated, control } => {
                shift(treated, -1.0);
                shift(control, 1.0);
            }
        }
    }
}

/// Annealing schedule and search budget.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    /// Iterations per restart; `None` means `200 * n`.
    pub max_iters: Option<usize>,
    pub n_restarts: usize,
    /// Starting temperature; `None` means the objective value at the
    /// restart's random balanced starting point.
    pub init_temperature: Option<f64>,
    pub cooling_rate: f64,
    /// Probability of proposing a swap rather than a flip.
    pub move_mix: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            max_iters: None,
            n_restarts: 5,
            init_temperature: None,
            cooling_rate: 0.995,
            move_mix: 0.5,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn with_seed(&self, seed: u64) -> Self {
        OptimizerConfig { seed, ..self.clone() }
    }

    pub fn iterations_for(&self, n: usize) -> usize {
        self.max_iters.unwrap_or(200 * n)
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters == Some(0) {
            return Err(Error::invalid("max_iters must be positive"));
        }
        if self.n_restarts == 0 {
            return Err(Error::invalid("n_restarts must be positive"));
        }
        if let Some(t) = self.init_temperature {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::invalid(format!("init_temperature must be positive, got {t}")));
            }
        }
        if !(self.cooling_rate > 0.0 && self.cooling_rate < 1.0) {
            return Err(Error::invalid(format!(
                "cooling_rate must be in (0, 1), got {}",
                self.cooling_rate
            )));
        }
        if !(0.0..=1.0).contains(&self.move_mix) {
            return Err(Error::invalid(format!(
                "move_mix must be in [0, 1], got {}",
                self.move_mix
            )));
        }
        Ok(())
    }
}

/// Treated and control index lists with O(1) membership updates.
struct Groups {
    treated: Vec<usize>,
    control: Vec<usize>,
    pos: Vec<usize>,
}

impl Groups {
    fn new(z: &[bool]) -> Self {
        let mut g = Groups {
            treated: Vec::new(),
            control: Vec::new(),
            pos: vec![0; z.len()],
        };
        for (i, &t) in z.iter().enumerate() {
            let list = if t { &mut g.treated } else { &mut g.control };
            g.pos[i] = list.len();
            list.push(i);
        }
        g
    }

    fn toggle(&mut self, z: &mut [bool], k: usize) {
        let (from, to) = if z[k] {
            (&mut self.treated, &mut self.control)
        } else {
            (&mut self.control, &mut self.treated)
        };
        let p = self.pos[k];
        from.swap_remove(p);
        if p < from.len() {
            self.pos[from[p]] = p;
        }
        self.pos[k] = to.len();
        to.push(k);
        z[k] = !z[k];
    }
}

struct RestartOutcome {
    assignment: Assignment,
    objective: f64,
    trace: Vec<(usize, f64)>,
}

fn propose(rng: &mut StreamRng, groups: &Groups, z: &[bool], move_mix: f64) -> Option<Move> {
    if rng.random::<f64>() < move_mix {
        let i = groups.treated[rng.random_range(0..groups.treated.len())];
        let j = groups.control[rng.random_range(0..groups.control.len())];
        Some(Move::Swap { treated: i, control: j })
    } else {
        let k = rng.random_range(0..z.len());
        let emptied = if z[k] {
            groups.treated.len() == 1
        } else {
            groups.control.len() == 1
        };
        (!emptied).then_some(Move::Flip(k))
    }
}

fn anneal_once<O: Objective>(objective: &O, cfg: &OptimizerConfig, restart: usize) -> RestartOutcome {
    let n = objective.n_units();
    let mut rng = substream(cfg.seed, restart as u64);
    let mut z = vec![false; n];
    for i in balanced_indices(&mut rng, n) {
        z[i] = true;
    }
    let start = Assignment::new(z.clone()).expect("balanced start");
    let mut groups = Groups::new(&z);
    let mut state = objective.init(&start);
    let mut current = objective.value(&state);
    let mut temperature = cfg.init_temperature.unwrap_or(current.abs());
    let mut best = (current, z.clone());
    let mut trace = vec![(0, current)];

    for iter in 0..cfg.iterations_for(n) {
        if let Some(mv) = propose(&mut rng, &groups, &z, cfg.move_mix) {
            let candidate = objective.peek(&state, &z, mv);
            let delta = candidate - current;
            let accept = delta <= 0.0 || (temperature > 0.0 && rng.random::<f64>() < (-delta / temperature).exp());
            if accept {
                objective.apply(&mut state, &z, mv);
                match mv {
                    Move::Flip(k) => groups.toggle(&mut z, k),
                    Move::Swap { treated, control } => {
                        groups.toggle(&mut z, treated);
                        groups.toggle(&mut z, control);
                    }
                }
                current = candidate;
                if current < best.0 {
                    best = (current, z.clone());
                    trace.push((iter + 1, current));
                }
            }
        }
        temperature *= cfg.cooling_rate;
    }

    let assignment = Assignment::new(best.1).expect("search keeps both groups non-empty");
    RestartOutcome {
        objective: objective.evaluate(&assignment),
        assignment,
        trace,
    }
}

/// Minimizes `objective` by simulated annealing with independent restarts.
///
/// Restarts run in parallel, each on its own substream of `cfg.seed`; the
/// winner is the smallest objective, ties broken by the smallest assignment
/// in lexicographic order, so the result does not depend on scheduling.
pub fn optimize_assignment<O: Objective>(objective: &O, cfg: &OptimizerConfig) -> Result<DesignResult> {
    cfg.validate()?;
    let n = objective.n_units();
    if n < 2 {
        return Err(Error::invalid(format!("need at least 2 units, got {n}")));
    }
    let outcomes: Vec<RestartOutcome> = (0..cfg.n_restarts)
        .into_par_iter()
        .map(|r| anneal_once(objective, cfg, r))
        .collect();

    let iters = cfg.iterations_for(n);
    let mut trace = Vec::new();
    let mut running = f64::INFINITY;
    for (r, outcome) in outcomes.iter().enumerate() {
        for &(it, v) in &outcome.trace {
            if v < running {
                running = v;
                trace.push((r * (iters + 1) + it, v));
            }
        }
    }

    let winner = outcomes
        .into_iter()
        .min_by(|a, b| {
            a.objective
                .total_cmp(&b.objective)
                .then_with(|| a.assignment.cmp(&b.assignment))
        })
        .expect("at least one restart");
    Ok(DesignResult {
        assignment: winner.assignment,
        objective: winner.objective,
        trace,
        point_prior: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::brute_force;
    use crate::netgen::{gen_erdos_renyi, Network};
    use crate::risk::mse_normal;
    use crate::seeds::rng_from_seed;

    fn random_assignment(rng: &mut StreamRng, n: usize) -> Assignment {
        loop {
            let z: Vec<bool> = (0..n).map(|_| rng.random::<bool>()).collect();
            if let Ok(a) = Assignment::new(z) {
                return a;
            }
        }
    }

    #[test]
    fn incremental_moves_match_direct_evaluation() {
        let net = gen_erdos_renyi(15, 0.3, 2).unwrap();
        let alg = net.algebra();
        let obj = QuadraticRiskObjective::new(&alg, 1.7, 0.9, 0.4);
        let mut rng = rng_from_seed(3);
        let a = random_assignment(&mut rng, 15);
        let mut z = a.z().to_vec();
        let mut state = obj.init(&a);
        assert!((obj.value(&state) - obj.evaluate(&a)).abs() < 1e-12);
        for _ in 0..500 {
            let groups = Groups::new(&z);
            let Some(mv) = propose(&mut rng, &groups, &z, 0.5) else {
                continue;
            };
            let peeked = obj.peek(&state, &z, mv);
            let direct = obj.evaluate(&moved(&z, mv));
            assert!((peeked - direct).abs() < 1e-10 * direct.max(1.0), "{mv:?}");
            obj.apply(&mut state, &z, mv);
            z = moved(&z, mv).into_inner();
            assert!((obj.value(&state) - direct).abs() < 1e-10 * direct.max(1.0));
        }
    }

    #[test]
    fn point_objective_is_mse_normal() {
        let net = gen_erdos_renyi(12, 0.3, 5).unwrap();
        let alg = net.algebra();
        let p = NormalModelParams::new(1.2, 0.8, 0.3).unwrap();
        let obj = QuadraticRiskObjective::point(&p, &alg);
        let mut rng = rng_from_seed(4);
        for _ in 0..20 {
            let a = random_assignment(&mut rng, 12);
            let m = mse_normal(&p, &alg, &a).unwrap();
            assert!((obj.evaluate(&a) - m).abs() < 1e-12 * m);
        }
    }

    #[test]
    fn monte_carlo_objective_equals_imse_mc() {
        let net = gen_erdos_renyi(14, 0.3, 6).unwrap();
        let alg = net.algebra();
        let prior = PriorSpec::default();
        let obj = QuadraticRiskObjective::monte_carlo(&prior, &alg, 3000, 99).unwrap();
        let mut rng = rng_from_seed(5);
        for _ in 0..10 {
            let a = random_assignment(&mut rng, 14);
            let mc = crate::risk::imse_mc(&prior, &alg, &a, 3000, 99).unwrap().value;
            assert!((obj.evaluate(&a) - mc).abs() < 1e-10 * mc);
        }
    }

    #[test]
    fn edgeless_graph_optimum_is_balanced() {
        let alg = Network::empty(6).unwrap().algebra();
        let p = NormalModelParams::new(1.0, 1.0, 1.0).unwrap();
        let obj = QuadraticRiskObjective::point(&p, &alg);
        // oracle: on an edgeless graph MSE = (sigma2 + gamma2)(1/N1 + 1/N0)
        let best_by_size = (1..6)
            .map(|n1| 2.0 * (1.0 / n1 as f64 + 1.0 / (6 - n1) as f64))
            .fold(f64::INFINITY, f64::min);
        assert!((best_by_size - 4.0 / 3.0).abs() < 1e-15);
        let res = optimize_assignment(&obj, &OptimizerConfig::default()).unwrap();
        assert_eq!(res.assignment.n_treated(), 3);
        assert!((res.objective - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn constant_objective_returns_valid_assignment() {
        let obj = FnObjective::new(7, |_: &Assignment| 3.5);
        let res = optimize_assignment(&obj, &OptimizerConfig::default()).unwrap();
        assert_eq!(res.objective, 3.5);
        assert_eq!(res.assignment.len(), 7);
        let zero = FnObjective::new(4, |_: &Assignment| 0.0);
        assert_eq!(
            optimize_assignment(&zero, &OptimizerConfig::default())
                .unwrap()
                .objective,
            0.0
        );
    }

    #[test]
    fn trace_is_monotone_and_bounds_the_result() {
        let net = gen_erdos_renyi(30, 0.15, 8).unwrap();
        let alg = net.algebra();
        let obj = QuadraticRiskObjective::closed_form(&PriorSpec::default(), &alg).unwrap();
        let res = optimize_assignment(&obj, &OptimizerConfig::default().with_seed(4)).unwrap();
        assert!(res.trace.windows(2).all(|w| w[1].1 <= w[0].1 && w[1].0 > w[0].0));
        let last = res.trace.last().unwrap().1;
        assert!((res.objective - last).abs() <= 1e-12 * last);
        assert!(res.trace.iter().all(|&(_, v)| res.objective <= v + 1e-12 * v));
        assert!((obj.evaluate(&res.assignment) - res.objective).abs() <= 1e-12);
    }

    #[test]
    fn search_is_deterministic_and_respects_flip_only_or_swap_only() {
        let net = gen_erdos_renyi(20, 0.2, 1).unwrap();
        let alg = net.algebra();
        let obj = QuadraticRiskObjective::closed_form(&PriorSpec::default(), &alg).unwrap();
        let cfg = OptimizerConfig::default().with_seed(11);
        let a = optimize_assignment(&obj, &cfg).unwrap();
        let b = optimize_assignment(&obj, &cfg).unwrap();
        assert_eq!(a.assignment, b.assignment);
        assert_eq!(a.trace, b.trace);

        let swaps_only = OptimizerConfig {
            move_mix: 1.0,
            ..cfg.clone()
        };
        assert_eq!(
            optimize_assignment(&obj, &swaps_only).unwrap().assignment.n_treated(),
            10
        );
        let flips_only = OptimizerConfig { move_mix: 0.0, ..cfg };
        assert!(optimize_assignment(&obj, &flips_only).is_ok());
    }

    #[test]
    fn tiny_networks_never_go_degenerate() {
        let alg = Network::path(2).unwrap().algebra();
        let obj = QuadraticRiskObjective::new(&alg, 1.0, 1.0, 1.0);
        let cfg = OptimizerConfig {
            move_mix: 0.0,
            ..OptimizerConfig::default()
        };
        let res = optimize_assignment(&obj, &cfg).unwrap();
        assert_eq!(res.assignment.n_treated(), 1);
    }

    #[test]
    fn matches_brute_force_on_small_graphs() {
        let mut hits = 0;
        for seed in 0..10 {
            let net = gen_erdos_renyi(10, 0.3, seed).unwrap();
            let alg = net.algebra();
            let obj = QuadraticRiskObjective::closed_form(&PriorSpec::default(), &alg).unwrap();
            let exact = brute_force(&obj).unwrap();
            let found = optimize_assignment(&obj, &OptimizerConfig::default().with_seed(seed)).unwrap();
            assert!(found.objective >= exact.objective - 1e-12);
            if found.objective <= exact.objective * (1.0 + 1e-9) {
                hits += 1;
            }
        }
        assert!(hits >= 9, "hits={hits}");
    }

    #[test]
    fn config_validation() {
        let ok = OptimizerConfig::default();
        assert!(ok.validate().is_ok());
        for bad in [
            OptimizerConfig {
                n_restarts: 0,
                ..ok.clone()
            },
            OptimizerConfig {
                max_iters: Some(0),
                ..ok.clone()
            },
            OptimizerConfig {
                cooling_rate: 1.0,
                ..ok.clone()
            },
            OptimizerConfig {
                move_mix: 1.5,
                ..ok.clone()
            },
            OptimizerConfig {
                init_temperature: Some(-1.0),
                ..ok.clone()
            },
        ] {
            assert!(bad.validate().is_err());
        }
        assert_eq!(ok.iterations_for(12), 2400);
    }
}
