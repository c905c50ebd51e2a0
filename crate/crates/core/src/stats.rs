//! Correlation, dispersion and autocorrelation statistics.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signals::{quartiles, SignalMatrix};

/// Pearson correlation with its two-sided p-value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pearson {
    pub r: f64,
    pub p: f64,
}

fn check_pair(x: &[f64], y: &[f64], min_n: usize) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::Shape(format!("series lengths {} and {} differ", x.len(), y.len())));
    }
    if x.len() < min_n {
        return Err(Error::InsufficientData(format!(
            "need at least {min_n} samples, have {}",
            x.len()
        )));
    }
    Ok(())
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample Pearson r and the two-sided p-value of its t statistic with
/// `n - 2` degrees of freedom.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<Pearson> {
    check_pair(x, y, 3)?;
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::InvalidArgument("pearson correlation of a constant series is undefined".into()));
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let df = (x.len() - 2) as f64;
    let p = if r.abs() == 1.0 {
        0.0
    } else {
        let t2 = r * r * df / (1.0 - r * r);
        regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t2))
    };
    Ok(Pearson { r, p })
}

/// Two-sided tail probability `P(|T| > |t|)` for Student's t with `df` degrees of freedom.
pub fn student_t_two_sided(t: f64, df: f64) -> f64 {
    regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t))
}

/// Natural log of the gamma function (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    const COEFFS: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEFFS[0];
    let t = x + 7.5;
    for (i, c) in COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Regularized incomplete beta `I_x(a, b)` via the Lentz continued fraction.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(a, b, x) / a
    } else {
        1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b
    }
}

fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=500 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Double-centred distance matrix, row-major `n x n`.
fn centered_distances(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut a = vec![0.0; n * n];
    for k in 0..n {
        for l in 0..n {
            a[k * n + l] = (x[k] - x[l]).abs();
        }
    }
    let row_means: Vec<f64> = (0..n)
        .map(|k| a[k * n..(k + 1) * n].iter().sum::<f64>() / n as f64)
        .collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    // the distance matrix is symmetric, so column means equal row means
    for k in 0..n {
        for l in 0..n {
            a[k * n + l] += grand - row_means[k] - row_means[l];
        }
    }
    a
}

/// Distance correlation with the biased `1/n²` estimator; 0 when either
/// distance variance vanishes.
pub fn distance_correlation(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y, 1)?;
    let n = x.len() as f64;
    let a = centered_distances(x);
    let b = centered_distances(y);
    let (mut ab, mut aa, mut bb) = (0.0, 0.0, 0.0);
    for (p, q) in a.iter().zip(&b) {
        ab += p * q;
        aa += p * p;
        bb += q * q;
    }
    let dcov = (ab / (n * n)).max(0.0).sqrt();
    let dvar_x = (aa / (n * n)).sqrt();
    let dvar_y = (bb / (n * n)).sqrt();
    let denom = dvar_x * dvar_y;
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok((dcov / denom.sqrt()).clamp(0.0, 1.0))
}

/// Sample standard deviation (divisor `n - 1`) and interquartile range.
pub fn dispersion(x: &[f64]) -> Result<(f64, f64)> {
    if x.len() < 2 {
        return Err(Error::InsufficientData("dispersion needs at least 2 samples".into()));
    }
    let m = mean(x);
    let var = x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() - 1) as f64;
    let (q1, _, q3) = quartiles(x);
    Ok((var.sqrt(), q3 - q1))
}

/// Sample autocorrelation for lags `0..=max_lag`.
pub fn autocorrelation(x: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = x.len();
    if max_lag >= n {
        return Err(Error::InvalidArgument(format!("max_lag {max_lag} must be below series length {n}")));
    }
    let m = mean(x);
    let dev: Vec<f64> = x.iter().map(|v| v - m).collect();
    let denom: f64 = dev.iter().map(|d| d * d).sum();
    if denom == 0.0 {
        return Err(Error::InvalidArgument("autocorrelation of a constant series".into()));
    }
    Ok((0..=max_lag)
        .map(|lag| {
            if lag == 0 {
                return 1.0;
            }
            dev[..n - lag].iter().zip(&dev[lag..]).map(|(a, b)| a * b).sum::<f64>() / denom
        })
        .collect())
}

/// One signal column vetted against price.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub signal: String,
    /// `None` when the column is constant and Pearson r is undefined.
    pub pearson: Option<Pearson>,
    pub distance_corr: f64,
    pub sigma: f64,
    pub iqr: f64,
    pub n: usize,
}

/// Correlates every column of `signals` with `price_high`.
pub fn correlation_table(signals: &SignalMatrix, price_high: &[f64]) -> Result<Vec<CorrelationReport>> {
    if signals.rows() != price_high.len() {
        return Err(Error::Range(format!(
            "signal calendar has {} days but price has {}",
            signals.rows(),
            price_high.len()
        )));
    }
    (0..signals.width())
        .map(|c| {
            let col = signals.column(c);
            let constant = col.iter().all(|v| *v == col[0]);
            let pearson = if constant { None } else { Some(pearson(&col, price_high)?) };
            let (sigma, iqr) = dispersion(&col)?;
            Ok(CorrelationReport {
                signal: signals.columns()[c].clone(),
                pearson,
                distance_corr: distance_correlation(&col, price_high)?,
                sigma,
                iqr,
                n: col.len(),
            })
        })
        .collect()
}

/// Marker written for undefined Pearson statistics.
pub const UNDEFINED: &str = "---";

/// `signal,pearson_r,pearson_p,distance_corr,sigma,iqr`.
pub fn correlation_csv(rows: &[CorrelationReport]) -> String {
    let mut out = String::from("signal,pearson_r,pearson_p,distance_corr,sigma,iqr\n");
    for r in rows {
        let (pr, pp) = match r.pearson {
            Some(p) => (p.r.to_string(), p.p.to_string()),
            None => (UNDEFINED.to_string(), UNDEFINED.to_string()),
        };
        let _ = writeln!(out, "{},{pr},{pp},{},{},{}", r.signal, r.distance_corr, r.sigma, r.iqr);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calendar::DateRange;

    #[test]
    fn perfect_correlations() {
        let p = pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap();
        assert_eq!(p.r, 1.0);
        assert_eq!(p.p, 0.0);
        let p = pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap();
        assert_eq!(p.r, -1.0);
    }

    #[test]
    fn pearson_errors() {
        assert!(pearson(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0]).is_err());
        assert!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn pearson_hand_case() {
        // x=[1..5], y=[2,1,4,3,5]: cov sum 8, sxx = syy = 10 -> r = 0.8
        let p = pearson(&[1.0, 2.0, 3.0, 4.0, 5.0], &[2.0, 1.0, 4.0, 3.0, 5.0]).unwrap();
        assert!((p.r - 0.8).abs() < 1e-15);
        // t = 0.8 * sqrt(3 / 0.36) = 2.3094, df 3
        assert!((p.p - 0.104_088_038_661_828).abs() < 1e-10, "{}", p.p);
    }

    #[test]
    fn incomplete_beta_edges() {
        assert_eq!(regularized_incomplete_beta(2.0, 3.0, 0.0), 0.0);
        assert_eq!(regularized_incomplete_beta(2.0, 3.0, 1.0), 1.0);
        // I_x(1, 1) = x
        assert!((regularized_incomplete_beta(1.0, 1.0, 0.3) - 0.3).abs() < 1e-14);
        // t = 0 -> p = 1
        assert!((student_t_two_sided(0.0, 7.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn ln_gamma_known_values() {
        assert!(ln_gamma(1.0).abs() < 1e-14);
        assert!((ln_gamma(5.0) - 24f64.ln()).abs() < 1e-13);
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-13);
    }

    #[test]
    fn distance_correlation_branches() {
        let x = [1.0, 3.0, 2.0, 7.0];
        assert!((distance_correlation(&x, &x).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(distance_correlation(&x, &[4.0; 4]).unwrap(), 0.0);
        assert!(distance_correlation(&x, &[1.0]).is_err());
    }

    #[test]
    fn dispersion_cases() {
        let (_, iqr) = dispersion(&[0.0, 1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(iqr, 2.0);
        assert_eq!(dispersion(&[3.0, 3.0, 3.0]).unwrap(), (0.0, 0.0));
        let (sigma, _) = dispersion(&[2.0, 4.0]).unwrap();
        assert!((sigma - 2f64.sqrt()).abs() < 1e-15);
        assert!(dispersion(&[1.0]).is_err());
    }

    #[test]
    fn autocorrelation_cases() {
        let acf = autocorrelation(&[1.0, 3.0, 2.0, 5.0], 2).unwrap();
        assert_eq!(acf[0], 1.0);
        // alternating series: sum of lagged products -5, denominator 6
        let acf = autocorrelation(&[1.0, -1.0, 1.0, -1.0, 1.0, -1.0], 1).unwrap();
        assert!((acf[1] + 5.0 / 6.0).abs() < 1e-15);
        assert!(autocorrelation(&[1.0, 2.0, 3.0], 3).is_err());
        assert!(autocorrelation(&[2.0, 2.0, 2.0], 1).is_err());
    }

    #[test]
    fn table_flags_constant_columns() {
        let cal = DateRange::with_len("2017-01-01".parse().unwrap(), 5);
        let price = [10.0, 12.0, 11.0, 15.0, 14.0];
        let mut values = Vec::new();
        for p in price {
            values.extend([p, 0.0]);
        }
        let m = SignalMatrix::new(cal, vec!["copy".into(), "zero".into()], values).unwrap();
        let table = correlation_table(&m, &price).unwrap();
        let copy = table[0].pearson.unwrap();
        assert!((copy.r - 1.0).abs() < 1e-15);
        assert!((table[0].distance_corr - 1.0).abs() < 1e-15);
        assert!(table[1].pearson.is_none());
        assert_eq!(table[1].distance_corr, 0.0);
        let csv = correlation_csv(&table);
        assert!(csv.lines().nth(2).unwrap().starts_with("zero,---,---,0,"));
        assert!(correlation_table(&m, &price[..4]).is_err());
    }
}
