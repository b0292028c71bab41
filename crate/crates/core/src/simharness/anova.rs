//! Main-effects analysis of variance over study records.
//!
//! Each factor's sum of squares is its marginal between-level sum of
//! squares, `sum_l n_l (mean_l - grand_mean)^2`. On a balanced factorial
//! layout these are orthogonal, so they coincide with the sequential
//! decomposition in the order strategy, design prior, network family. The
//! residual collects everything else (interactions, replication noise and
//! search noise): total SS minus the factor SS, over the remaining degrees
//! of freedom.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::StudyRecord;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnovaFactor {
    Strategy,
    DesignPrior,
    NetworkFamily,
}

impl AnovaFactor {
    pub const ALL: [AnovaFactor; 3] = [
        AnovaFactor::Strategy,
        AnovaFactor::DesignPrior,
        AnovaFactor::NetworkFamily,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            AnovaFactor::Strategy => "strategy",
            AnovaFactor::DesignPrior => "design_prior",
            AnovaFactor::NetworkFamily => "network_family",
        }
    }

    fn level(&self, r: &StudyRecord) -> String {
        match self {
            AnovaFactor::Strategy => r.design_strategy.as_str().to_string(),
            AnovaFactor::DesignPrior => r.design_prior_id.to_string(),
            AnovaFactor::NetworkFamily => r.network_family.clone(),
        }
    }
}

/// Which record field is analysed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnovaResponse {
    ImseTrue,
    RelativeImse,
}

impl AnovaResponse {
    fn value(&self, r: &StudyRecord) -> f64 {
        match self {
            AnovaResponse::ImseTrue => r.imse_true,
            AnovaResponse::RelativeImse => r.relative_imse,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnovaRow {
    pub factor: String,
    pub df: usize,
    pub ss: f64,
    pub mss: f64,
}

/// Factor rows in the requested order, then `residual`, then `total`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnovaTable {
    pub response: AnovaResponse,
    pub rows: Vec<AnovaRow>,
}

impl AnovaTable {
    pub fn row(&self, factor: &str) -> Option<&AnovaRow> {
        self.rows.iter().find(|r| r.factor == factor)
    }

    pub fn mss(&self, factor: &str) -> Option<f64> {
        self.row(factor).map(|r| r.mss)
    }
}

pub fn anova_mss(records: &[StudyRecord], factors: &[AnovaFactor], response: AnovaResponse) -> Result<AnovaTable> {
    let n = records.len();
    if n < 2 {
        return Err(Error::invalid("analysis of variance needs at least two records"));
    }
    let y: Vec<f64> = records.iter().map(|r| response.value(r)).collect();
    let grand = y.iter().sum::<f64>() / n as f64;
    let total_ss: f64 = y.iter().map(|v| (v - grand).powi(2)).sum();

    let mut rows = Vec::new();
    let mut used_df = 0;
    let mut factor_ss = 0.0;
    for factor in factors {
        let mut levels: BTreeMap<String, (f64, usize)> = BTreeMap::new();
        for (r, &v) in records.iter().zip(&y) {
            let e = levels.entry(factor.level(r)).or_insert((0.0, 0));
            e.0 += v;
            e.1 += 1;
        }
        if levels.len() < 2 {
            return Err(Error::invalid(format!(
                "factor {} has {} level(s); at least 2 are required",
                factor.name(),
                levels.len()
            )));
        }
        let ss: f64 = levels
            .values()
            .map(|&(sum, count)| count as f64 * (sum / count as f64 - grand).powi(2))
            .sum();
        let df = levels.len() - 1;
        used_df += df;
        factor_ss += ss;
        rows.push(AnovaRow {
            factor: factor.name().to_string(),
            df,
            ss,
            mss: ss / df as f64,
        });
    }
    let total_df = n - 1;
    if used_df >= total_df {
        return Err(Error::invalid("no residual degrees of freedom left"));
    }
    let residual_df = total_df - used_df;
    let residual_ss = total_ss - factor_ss;
    rows.push(AnovaRow {
        factor: "residual".to_string(),
        df: residual_df,
        ss: residual_ss,
        mss: residual_ss / residual_df as f64,
    });
    rows.push(AnovaRow {
        factor: "total".to_string(),
        df: total_df,
        ss: total_ss,
        mss: total_ss / total_df as f64,
    });
    Ok(AnovaTable { response, rows })
}
