//! ARIMA(p, 1, 0) with drift, fitted by conditional least squares.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArimaModel {
    pub p: usize,
    /// Differencing order; always 1.
    pub d: usize,
    pub intercept: f64,
    pub ar_coeffs: Vec<f64>,
    pub fit_n: usize,
    /// Lag order asked for; differs from `p` when the normal equations were
    /// singular and the fit fell back to the drift-only model.
    pub requested_p: usize,
}

fn differences(y: &[f64]) -> Vec<f64> {
    y.windows(2).map(|w| w[1] - w[0]).collect()
}

/// Solves `a x = b` for a small dense symmetric system using Gaussian
/// elimination with partial pivoting. `a` is row-major `n x n`.
pub(crate) fn solve_dense(mut a: Vec<f64>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    let scale = (0..n).map(|i| a[i * n + i].abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::Singular("zero design matrix".into()));
    }
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r, &s| a[r * n + col].abs().total_cmp(&a[s * n + col].abs()))
            .unwrap();
        if a[pivot_row * n + col].abs() <= 1e-12 * scale {
            return Err(Error::Singular(format!("pivot {col} vanishes")));
        }
        if pivot_row != col {
            for k in 0..n {
                a.swap(col * n + k, pivot_row * n + k);
            }
            b.swap(col, pivot_row);
        }
        for r in col + 1..n {
            let factor = a[r * n + col] / a[col * n + col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[r * n + k] -= factor * a[col * n + k];
            }
            b[r] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let tail: f64 = (r + 1..n).map(|k| a[r * n + k] * x[k]).sum();
        x[r] = (b[r] - tail) / a[r * n + r];
    }
    Ok(x)
}

fn drift_only(y_train: &[f64], requested_p: usize) -> ArimaModel {
    let dy = differences(y_train);
    ArimaModel {
        p: 0,
        d: 1,
        intercept: dy.iter().sum::<f64>() / dy.len() as f64,
        ar_coeffs: Vec::new(),
        fit_n: y_train.len(),
        requested_p,
    }
}

/// Regresses `Δy_t` on an intercept and `Δy_{t-1..t-p}`.
pub fn fit(y_train: &[f64], p: usize) -> Result<ArimaModel> {
    if y_train.len() < p + 3 {
        return Err(Error::InsufficientData(format!(
            "ARIMA({p},1,0) needs at least {} observations, have {}",
            p + 3,
            y_train.len()
        )));
    }
    if y_train.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("ARIMA training series".into()));
    }
    if p == 0 {
        return Ok(drift_only(y_train, 0));
    }
    let dy = differences(y_train);
    let dim = p + 1;
    let mut xtx = vec![0.0; dim * dim];
    let mut xty = vec![0.0; dim];
    let mut row = vec![0.0; dim];
    for t in p..dy.len() {
        row[0] = 1.0;
        for m in 1..=p {
            row[m] = dy[t - m];
        }
        for a in 0..dim {
            xty[a] += row[a] * dy[t];
            for b in 0..dim {
                xtx[a * dim + b] += row[a] * row[b];
            }
        }
    }
    match solve_dense(xtx, xty) {
        Ok(beta) => Ok(ArimaModel {
            p,
            d: 1,
            intercept: beta[0],
            ar_coeffs: beta[1..].to_vec(),
            fit_n: y_train.len(),
            requested_p: p,
        }),
        Err(e) => {
            log::warn!("ARIMA({p},1,0) normal equations singular ({e}); falling back to p = 0");
            Ok(drift_only(y_train, p))
        }
    }
}

/// Forecasts the level `j` steps after the end of `history`.
pub fn forecast(model: &ArimaModel, history: &[f64], j: usize) -> Result<f64> {
    if history.len() < model.p + 1 {
        return Err(Error::InsufficientData(format!(
            "forecast with p={} needs {} history points, have {}",
            model.p,
            model.p + 1,
            history.len()
        )));
    }
    let last = *history.last().unwrap();
    if model.p == 0 {
        return Ok(last + j as f64 * model.intercept);
    }
    let mut recent = differences(&history[history.len() - model.p - 1..]);
    let mut level = last;
    for _ in 0..j {
        let n = recent.len();
        let step = model.intercept
            + model
                .ar_coeffs
                .iter()
                .enumerate()
                .map(|(m, phi)| phi * recent[n - 1 - m])
                .sum::<f64>();
        level += step;
        recent.push(step);
    }
    Ok(level)
}

fn one_step_rmspe(model: &ArimaModel, y: &[f64], from: usize) -> Result<f64> {
    let mut acc = 0.0;
    for t in from..y.len() {
        let pred = forecast(model, &y[..t], 1)?;
        let e = (pred - y[t]) / y[t];
        acc += e * e;
    }
    Ok(100.0 * (acc / (y.len() - from) as f64).sqrt())
}

/// Number of validation points held out by [`select_lag`].
pub fn lag_validation_len(n: usize) -> usize {
    ((0.2 * n as f64) - 1e-9).ceil().max(1.0) as usize
}

/// Picks the lag in `0..=max_p` whose fit on the first 80% of `y_train`
/// has the lowest one-step RMSPE on the last 20%; ties go to the smaller lag.
pub fn select_lag(y_train: &[f64], max_p: usize) -> Result<usize> {
    if max_p == 0 {
        return Ok(0);
    }
    let scores = lag_scores(y_train, max_p)?;
    let mut best: Option<(usize, f64)> = None;
    for (p, score) in scores.into_iter().enumerate() {
        let Some(score) = score else { continue };
        if best.is_none_or(|(_, b)| score < b) {
            best = Some((p, score));
        }
    }
    best.map(|(p, _)| p)
        .ok_or_else(|| Error::InsufficientData("no lag order could be fitted".into()))
}

/// Validation RMSPE per candidate lag; `None` where the candidate could not
/// be fitted or fell back to a smaller order.
pub fn lag_scores(y_train: &[f64], max_p: usize) -> Result<Vec<Option<f64>>> {
    if y_train.iter().any(|v| *v <= 0.0) {
        return Err(Error::InvalidArgument("lag selection needs a positive series".into()));
    }
    let n = y_train.len();
    let n_val = lag_validation_len(n);
    if n_val >= n {
        return Err(Error::InsufficientData("series too short for lag selection".into()));
    }
    let split = n - n_val;
    (0..=max_p)
        .map(|p| match fit(&y_train[..split], p) {
            Ok(m) if m.p == p && split > p => one_step_rmspe(&m, y_train, split).map(Some),
            Ok(_) | Err(Error::InsufficientData(_)) => Ok(None),
            Err(e) => Err(e),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn drift_of_linear_series() {
        let m = fit(&[1.0, 2.0, 3.0, 4.0, 5.0], 0).unwrap();
        assert_eq!(m.intercept, 1.0);
        assert!(m.ar_coeffs.is_empty());
        let m = fit(&[3.0; 6], 0).unwrap();
        assert_eq!(m.intercept, 0.0);
    }

    #[test]
    fn ar1_on_quadratic_differences() {
        // Δy = [1,2,3,4,5]: Δy_t = 1 + Δy_{t-1} exactly
        let m = fit(&[1.0, 2.0, 4.0, 7.0, 11.0, 16.0], 1).unwrap();
        assert!((m.intercept - 1.0).abs() < 1e-12);
        assert!((m.ar_coeffs[0] - 1.0).abs() < 1e-12);
        // 16 + (1 + 5) + (1 + 6)
        let f = forecast(&m, &[1.0, 2.0, 4.0, 7.0, 11.0, 16.0], 2).unwrap();
        assert!((f - 29.0).abs() < 1e-10);
    }

    #[test]
    fn drift_forecasts() {
        let m = ArimaModel {
            p: 0,
            d: 1,
            intercept: 1.0,
            ar_coeffs: vec![],
            fit_n: 5,
            requested_p: 0,
        };
        assert_eq!(forecast(&m, &[4.0, 5.0], 2).unwrap(), 7.0);
        let walk = ArimaModel { intercept: 0.0, ..m };
        for j in 1..5 {
            assert_eq!(forecast(&walk, &[4.0, 5.0], j).unwrap(), 5.0);
        }
    }

    #[test]
    fn too_short_series() {
        assert!(fit(&[1.0, 2.0], 0).is_err());
        assert!(fit(&[1.0, 2.0, 3.0, 4.0], 2).is_err());
        let m = fit(&[1.0, 2.0, 4.0, 7.0, 11.0, 16.0], 1).unwrap();
        assert!(forecast(&m, &[5.0], 1).is_err());
    }

    #[test]
    fn singular_design_falls_back() {
        // constant differences make the lag column collinear with the intercept
        let m = fit(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0], 1).unwrap();
        assert_eq!(m.p, 0);
        assert_eq!(m.requested_p, 1);
        assert_eq!(m.intercept, 1.0);
    }

    #[test]
    fn max_lag_zero() {
        assert_eq!(select_lag(&[1.0, 2.0, 3.0], 0).unwrap(), 0);
    }

    #[test]
    fn dense_solver() {
        let x = solve_dense(vec![2.0, 1.0, 1.0, 3.0], vec![3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-15 && (x[1] - 1.4).abs() < 1e-15);
        assert!(solve_dense(vec![1.0, 2.0, 2.0, 4.0], vec![1.0, 2.0]).is_err());
    }
}
