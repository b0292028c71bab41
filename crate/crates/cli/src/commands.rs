use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use nalgebra::DMatrix;
use serde_json::{json, Value};

use netdesign::design::{
    optimize_assignment, point_prior_design, randomized_balanced, stratified_spectral, Objective, PointPriorGrid,
    QuadraticRiskObjective,
};
use netdesign::models::{NormalModelParams, PoissonGammaParams, PriorSpec};
use netdesign::netgen::{Network, NetworkFamily};
use netdesign::risk::{
    contrast_weights, delta_neighborhood, imse_mc, mse_decomposition_normal, mse_normal, mse_poisson_gamma,
    variance_of_contrast, Assignment, ContrastWeights,
};
use netdesign::seeds::{derive, rng_from_seed};
use netdesign::simharness::{
    anova_mss, median, relative_histogram, run_comparative_study, run_factorial_study, run_misspecification_study,
    run_ranking_study, write_report, AnovaFactor, AnovaResponse, CsvRecord, ReportFormat, Strategy, StudyConfig,
    StudyRecord,
};
use netdesign::Error;

use crate::{
    Cli, Command, DesignArgs, EvaluateArgs, FamilyArg, FormatArg, GenNetworkArgs, ModelArg, ObjectiveArg, PriorArgs,
    SimulateArgs, StrategyArg, StudyArg,
};

const STREAM_MC_DRAWS: u64 = 1;
const STREAM_OPTIMIZER: u64 = 2;

pub fn run(cli: Cli) -> Result<()> {
    if let Some(workers) = cli.workers {
        if workers == 0 {
            return Err(Error::InvalidParameter("--workers must be at least 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .context("configuring the worker pool")?;
    }
    let cfg = load_config(cli.config.as_deref())?;
    let seed = cli.seed.unwrap_or(cfg.master_seed);
    match cli.command {
        Command::GenNetwork(args) => gen_network(&args, seed),
        Command::Design(args) => design(&args, &cfg, seed),
        Command::Evaluate(args) => evaluate(&args, &cfg, seed),
        Command::Simulate(args) => simulate(&args, cfg, seed),
    }
}

fn load_config(path: Option<&Path>) -> Result<StudyConfig> {
    let Some(path) = path else {
        return Ok(StudyConfig::default());
    };
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let cfg: StudyConfig = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    cfg.validate()
        .with_context(|| format!("invalid configuration {}", path.display()))?;
    Ok(cfg)
}

fn emit(value: &Value, output: Option<&PathBuf>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    print!("{text}");
    if let Some(path) = output {
        fs::write(path, &text).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?;
    }
    Ok(())
}

fn gen_network(args: &GenNetworkArgs, seed: u64) -> Result<()> {
    let n = args.n as f64;
    let family = match args.family {
        FamilyArg::Er => NetworkFamily::ErdosRenyi {
            p: args.p.unwrap_or((5.0 / (n - 1.0)).min(1.0)),
        },
        FamilyArg::Sw => NetworkFamily::SmallWorld {
            k: args.k,
            beta: args.beta,
        },
        FamilyArg::Pl => NetworkFamily::PowerLaw { m: args.m },
        FamilyArg::Sbm => NetworkFamily::Sbm {
            n_blocks: args.blocks,
            p_in: args.p_in.unwrap_or((16.0 / n).min(1.0)),
            p_out: args.p_out.unwrap_or((4.0 / (3.0 * n)).min(1.0)),
        },
    };
    let net = family.generate(args.n, seed)?;
    net.write(&args.output)?;
    println!(
        "n={} edges={} mean_degree={:.4}",
        net.node_count(),
        net.edge_count(),
        net.mean_degree()
    );
    Ok(())
}

fn merge_prior(args: &PriorArgs, base: PriorSpec) -> Result<PriorSpec> {
    let prior = PriorSpec {
        mu0: args.mu0.unwrap_or(base.mu0),
        sigma0: args.sigma0.unwrap_or(base.sigma0),
        r_gamma: args.r_gamma.unwrap_or(base.r_gamma),
        lambda_gamma: args.lambda_gamma.unwrap_or(base.lambda_gamma),
        r_sigma: args.r_sigma.unwrap_or(base.r_sigma),
        lambda_sigma: args.lambda_sigma.unwrap_or(base.lambda_sigma),
    };
    prior.validate()?;
    Ok(prior)
}

fn design(args: &DesignArgs, cfg: &StudyConfig, seed: u64) -> Result<()> {
    let net = Network::read(&args.network)?;
    let alg = net.algebra();
    let prior = merge_prior(&args.prior, cfg.true_prior)?;
    let mut opt_cfg = cfg.optimizer.with_seed(derive(seed, STREAM_OPTIMIZER));
    if args.iters.is_some() {
        opt_cfg.max_iters = args.iters;
    }
    if let Some(r) = args.restarts {
        opt_cfg.n_restarts = r;
    }
    opt_cfg.validate()?;
    let truth = QuadraticRiskObjective::closed_form(&prior, &alg)?;

    let mut extra = serde_json::Map::new();
    let (assignment, objective) = match args.strategy {
        StrategyArg::Optimal => {
            let result = match args.objective {
                ObjectiveArg::Mc => {
                    let n_draws = args.n_draws.unwrap_or(cfg.n_mc_draws);
                    extra.insert("n_draws".into(), json!(n_draws));
                    let obj =
                        QuadraticRiskObjective::monte_carlo(&prior, &alg, n_draws, derive(seed, STREAM_MC_DRAWS))?;
                    optimize_assignment(&obj, &opt_cfg)?
                }
                ObjectiveArg::ClosedForm => optimize_assignment(&truth, &opt_cfg)?,
            };
            let kind = match args.objective {
                ObjectiveArg::Mc => "mc",
                ObjectiveArg::ClosedForm => "closed-form",
            };
            extra.insert("objective_kind".into(), json!(kind));
            (result.assignment, result.objective)
        }
        StrategyArg::Balanced => {
            let a = randomized_balanced(net.node_count(), &mut rng_from_seed(seed))?;
            let v = truth.evaluate(&a);
            (a, v)
        }
        StrategyArg::Stratified => {
            let k = args.k_clusters.unwrap_or(cfg.k_clusters);
            extra.insert("k_clusters".into(), json!(k));
            let a = stratified_spectral(&net, k, &mut rng_from_seed(seed))?;
            let v = truth.evaluate(&a);
            (a, v)
        }
        StrategyArg::PointPrior => {
            let path = args
                .grid
                .as_ref()
                .ok_or_else(|| Error::InvalidParameter("--strategy point-prior requires --grid".into()))?;
            let text = fs::read_to_string(path).map_err(|e| Error::Io {
                path: path.clone(),
                source: e,
            })?;
            let grid: PointPriorGrid =
                serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
            let result = point_prior_design(&grid, &alg, &opt_cfg)?;
            extra.insert("point_prior".into(), serde_json::to_value(&result.point_prior)?);
            (result.assignment, result.objective)
        }
    };
    let strategy = match args.strategy {
        StrategyArg::Optimal => "optimal",
        StrategyArg::Balanced => "balanced",
        StrategyArg::Stratified => "stratified",
        StrategyArg::PointPrior => "point-prior",
    };
    let mut out = serde_json::Map::new();
    out.insert("z".into(), json!(assignment.to_bits()));
    out.insert("objective".into(), json!(objective));
    out.insert("strategy".into(), json!(strategy));
    out.insert("seed".into(), json!(seed));
    out.insert("n_treated".into(), json!(assignment.n_treated()));
    out.insert("imse_closed_form".into(), json!(truth.evaluate(&assignment)));
    out.extend(extra);
    emit(&Value::Object(out), args.output.as_ref())
}

fn parse_assignment(text: &str) -> Result<Assignment> {
    let bits: Vec<u8> = serde_json::from_str(text)
        .map_err(|e| Error::Parse(format!("--assignment must be a JSON list of 0/1: {e}")))?;
    Ok(Assignment::from_bits(&bits)?)
}

fn read_matrix(path: &Path) -> Result<DMatrix<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let rows: Vec<Vec<f64>> = serde_json::from_str(&text)
        .map_err(|e| Error::Parse(format!("{}: expected a list of rows: {e}", path.display())))?;
    let n = rows.len();
    if n == 0 {
        return Err(Error::Parse(format!("{}: empty matrix", path.display())).into());
    }
    if let Some(bad) = rows.iter().find(|r| r.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: bad.len(),
        }
        .into());
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn evaluate(args: &EvaluateArgs, cfg: &StudyConfig, seed: u64) -> Result<()> {
    if let Some(cov_path) = &args.explicit_cov {
        let cov = read_matrix(cov_path)?;
        let w = match (&args.weights, &args.assignment) {
            (Some(text), _) => ContrastWeights(
                serde_json::from_str(text)
                    .map_err(|e| Error::Parse(format!("--weights must be a JSON list of numbers: {e}")))?,
            ),
            (None, Some(text)) => contrast_weights(&parse_assignment(text)?),
            (None, None) => {
                return Err(Error::InvalidParameter("--explicit-cov needs --weights or --assignment".into()).into())
            }
        };
        let v = variance_of_contrast(&w, &cov)?;
        return emit(
            &json!({ "variance_of_contrast": v, "weights": w.0 }),
            args.output.as_ref(),
        );
    }

    let net_path = args
        .network
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("--network is required".into()))?;
    let text = args
        .assignment
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("--assignment is required".into()))?;
    let net = Network::read(net_path)?;
    let alg = net.algebra();
    let a = parse_assignment(text)?;
    if a.len() != net.node_count() {
        return Err(Error::DimensionMismatch {
            expected: net.node_count(),
            got: a.len(),
        }
        .into());
    }
    if args.decompose && args.model != ModelArg::Normal {
        return Err(Error::InvalidParameter("--decompose requires --model normal".into()).into());
    }

    let mut out = serde_json::Map::new();
    out.insert("n_treated".into(), json!(a.n_treated()));
    out.insert("n_control".into(), json!(a.n_control()));
    out.insert("delta".into(), json!(delta_neighborhood(&a, &alg.sizes)?));
    match args.model {
        ModelArg::Prior => {
            let prior = merge_prior(&args.prior, cfg.true_prior)?;
            out.insert("model".into(), json!("prior"));
            let exact = QuadraticRiskObjective::closed_form(&prior, &alg)?.evaluate(&a);
            out.insert("imse_closed_form".into(), json!(exact));
            if args.mc_draws > 0 {
                let est = imse_mc(&prior, &alg, &a, args.mc_draws, seed)?;
                out.insert("imse_mc".into(), serde_json::to_value(est)?);
            }
        }
        ModelArg::Normal => {
            let params = NormalModelParams::new(args.mu, args.sigma2, args.gamma2)?;
            out.insert("model".into(), json!("normal"));
            out.insert("mse".into(), json!(mse_normal(&params, &alg, &a)?));
            if args.decompose {
                let d = mse_decomposition_normal(&params, &alg, &a)?;
                out.insert("decomposition".into(), serde_json::to_value(d)?);
            }
        }
        ModelArg::PoissonGamma => {
            let params = PoissonGammaParams::new(args.r, args.lambda)?;
            out.insert("model".into(), json!("poisson-gamma"));
            out.insert("mse".into(), json!(mse_poisson_gamma(&params, &net, &alg, &a)?));
        }
    }
    emit(&Value::Object(out), args.output.as_ref())
}

fn write_rows<T: CsvRecord>(rows: &[T], dir: &Path, stem: &str, format: ReportFormat, cfg: &StudyConfig) -> Result<()> {
    let ext = match format {
        ReportFormat::Csv => "csv",
        ReportFormat::Json => "json",
    };
    write_report(rows, &dir.join(format!("{stem}.{ext}")), format, cfg)?;
    Ok(())
}

fn median_summary(records: &[StudyRecord]) -> String {
    let parts: Vec<String> = [
        Strategy::Optimal,
        Strategy::RandomizedBalanced,
        Strategy::StratifiedSpectral,
    ]
    .iter()
    .filter_map(|&s| {
        let v: Vec<f64> = records
            .iter()
            .filter(|r| r.design_strategy == s)
            .map(|r| r.relative_imse)
            .collect();
        median(&v).map(|m| format!("{s}={m:.4}"))
    })
    .collect();
    format!("median relative iMSE: {}", parts.join(" "))
}

fn simulate(args: &SimulateArgs, mut cfg: StudyConfig, seed: u64) -> Result<()> {
    cfg.master_seed = seed;
    cfg.validate()?;
    let format = match args.format {
        FormatArg::Csv => ReportFormat::Csv,
        FormatArg::Json => ReportFormat::Json,
    };
    let dir = args.output_dir.as_path();
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    match args.study {
        StudyArg::Comparative => {
            let recs = run_comparative_study(&cfg)?;
            write_rows(&recs, dir, "comparative_records", format, &cfg)?;
            write_rows(&relative_histogram(&recs), dir, "comparative_histogram", format, &cfg)?;
            println!("{}", median_summary(&recs));
        }
        StudyArg::Misspec => {
            let recs = run_misspecification_study(&cfg)?;
            write_rows(&recs, dir, "misspec_records", format, &cfg)?;
            write_rows(&relative_histogram(&recs), dir, "misspec_histogram", format, &cfg)?;
            println!("{}", median_summary(&recs));
        }
        StudyArg::Anova => {
            let recs = run_factorial_study(&cfg)?;
            let table = anova_mss(&recs, &AnovaFactor::ALL, AnovaResponse::ImseTrue)?;
            write_rows(&recs, dir, "anova_records", format, &cfg)?;
            write_rows(&table.rows, dir, "anova_table", format, &cfg)?;
            let mss: Vec<String> = table
                .rows
                .iter()
                .filter(|r| r.factor != "total")
                .map(|r| format!("{}={:.6}", r.factor, r.mss))
                .collect();
            println!("{}; MSS {}", median_summary(&recs), mss.join(" "));
        }
        StudyArg::Ranking => {
            let report = run_ranking_study(&cfg, args.ranking_designs, args.ranking_draws, args.ranking_pairs)?;
            write_rows(std::slice::from_ref(&report), dir, "ranking", format, &cfg)?;
            println!(
                "ranking concordance: {:.4} over {} comparisons ({} tied pairs excluded)",
                report.concordance, report.n_comparisons, report.n_ties_excluded
            );
        }
    }
    Ok(())
}
