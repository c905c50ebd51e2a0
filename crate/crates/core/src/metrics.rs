//! Percentage error metrics over USD predictions.
//!
//! Percentages are scaled by 100. Confidence half-widths use the normal
//! approximation `1.96 * sd / sqrt(n)` over the per-sample terms: absolute
//! percentage errors for MAPE, squared percentage errors for MSPE. The RMSPE
//! half-width is the square root of the MSPE half-width so it is expressed in
//! percent like the RMSPE itself.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const Z_95: f64 = 1.96;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub n: usize,
    pub rmse: f64,
    pub mape: f64,
    pub mape_ci_halfwidth: f64,
    pub mspe: f64,
    pub rmspe: f64,
    pub rmspe_ci_halfwidth: f64,
    pub maxape: f64,
}

fn ci_halfwidth(terms: &[f64]) -> f64 {
    let n = terms.len();
    if n < 2 {
        return 0.0;
    }
    let mean = terms.iter().sum::<f64>() / n as f64;
    let var = terms.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / (n - 1) as f64;
    Z_95 * var.sqrt() / (n as f64).sqrt()
}

pub fn evaluate(predictions: &[f64], truth: &[f64]) -> Result<MetricsReport> {
    if predictions.len() != truth.len() {
        return Err(Error::Shape(format!(
            "{} predictions for {} true values",
            predictions.len(),
            truth.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::Empty("no predictions to evaluate".into()));
    }
    if let Some(bad) = truth.iter().find(|y| !(**y > 0.0)) {
        return Err(Error::InvalidArgument(format!("true value {bad} is not positive")));
    }
    if predictions.iter().any(|p| !p.is_finite()) {
        return Err(Error::NonFinite("prediction".into()));
    }
    let n = truth.len();
    let mut ape = Vec::with_capacity(n);
    let mut spe = Vec::with_capacity(n);
    let mut sq_err = 0.0;
    for (p, y) in predictions.iter().zip(truth) {
        let e = (p - y) / y;
        ape.push(100.0 * e.abs());
        spe.push(100.0 * 100.0 * e * e);
        sq_err += (p - y) * (p - y);
    }
    let nf = n as f64;
    let mape = ape.iter().sum::<f64>() / nf;
    let mspe = spe.iter().sum::<f64>() / nf;
    Ok(MetricsReport {
        n,
        rmse: (sq_err / nf).sqrt(),
        mape,
        mape_ci_halfwidth: ci_halfwidth(&ape),
        mspe,
        rmspe: mspe.sqrt(),
        rmspe_ci_halfwidth: ci_halfwidth(&spe).sqrt(),
        maxape: ape.iter().copied().fold(0.0, f64::max),
    })
}

/// Unweighted mean of the reports' RMSPE values.
pub fn mean_rmspe_across(reports: &BTreeMap<String, MetricsReport>) -> Result<f64> {
    if reports.is_empty() {
        return Err(Error::Empty("no reports to average".into()));
    }
    Ok(reports.values().map(|r| r.rmspe).sum::<f64>() / reports.len() as f64)
}
