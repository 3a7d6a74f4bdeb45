//! Evaluation toolchain: rank correlation, logistic-remapped linear
//! correlation, intensity sweeps over the distortion catalogue, and
//! maximum-differentiation pair selection.

mod correlation;
mod gmad;
mod logistic;
mod sweep;

pub use correlation::{pearson, srcc};
pub use gmad::{gmad_select, GmadBand, GmadPair, GmadSelection};
pub use logistic::{fit_logistic, plcc, LogisticFit, LogisticParams};
pub use sweep::{intensity_sweep, write_sweep_csv, KindCorrelation, SweepCell, SweepReport};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Full evaluation of predictions against opinion scores.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub n: usize,
    pub srcc: f64,
    pub plcc: f64,
    pub logistic: LogisticParams,
    /// True when the logistic fit fell back to the identity mapping.
    pub fallback_identity: bool,
    pub warning: Option<String>,
    /// Per item: id, prediction, opinion score, residual `mos - f(pred)`.
    pub residuals: Vec<ResidualRow>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResidualRow {
    pub id: String,
    pub pred: f64,
    pub mos: f64,
    pub residual: f64,
}

/// Computes SRCC, the four-parameter logistic fit, and PLCC for matched
/// `(id, prediction, mos)` triples.
pub fn evaluate(items: &[(String, f64, f64)]) -> Result<EvalReport> {
    if items.len() < 3 {
        return Err(Error::invalid(format!(
            "need at least 3 items for correlations, got {}",
            items.len()
        )));
    }
    let pred: Vec<f64> = items.iter().map(|(_, p, _)| *p).collect();
    let mos: Vec<f64> = items.iter().map(|(_, _, m)| *m).collect();
    let srcc_value = srcc(&pred, &mos)?;
    let fit = fit_logistic(&pred, &mos)?;
    let plcc_value = {
        let mapped: Vec<f64> = pred.iter().map(|&x| fit.apply(x)).collect();
        pearson(&mapped, &mos)?
    };
    let residuals = items
        .iter()
        .map(|(id, p, m)| ResidualRow { id: id.clone(), pred: *p, mos: *m, residual: m - fit.apply(*p) })
        .collect();
    Ok(EvalReport {
        n: items.len(),
        srcc: srcc_value,
        plcc: plcc_value,
        logistic: fit.params,
        fallback_identity: fit.fallback_identity,
        warning: fit.warning,
        residuals,
    })
}
