//! Min-max normalization, supervised windowing and the fixed train/test
//! split shared by every configuration of an ablation grid.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::calendar::DateRange;
use crate::error::{Error, Result};
use crate::signals::SignalMatrix;

/// Largest training window the default split accommodates.
pub const DEFAULT_K_MAX: usize = 14;
/// Largest forecasting window the default split accommodates.
pub const DEFAULT_J_MAX: usize = 3;
pub const DEFAULT_TRAIN_FRAC: f64 = 0.8;
pub const DEFAULT_VALIDATION_FRAC: f64 = 0.2;

// Guards floor/ceil of fractional counts against representation error,
// e.g. 0.8 * 10 landing a hair under 8.
const COUNT_EPS: f64 = 1e-9;

/// Per-column `(min, max)` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormParams {
    pub columns: BTreeMap<String, (f64, f64)>,
}

impl NormParams {
    pub fn get(&self, column: &str) -> Option<(f64, f64)> {
        self.columns.get(column).copied()
    }
}

pub fn fit_minmax(matrix: &SignalMatrix) -> NormParams {
    let mut columns = BTreeMap::new();
    for (c, name) in matrix.columns().iter().enumerate() {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for r in 0..matrix.rows() {
            let v = matrix.get(r, c);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        columns.insert(name.clone(), (lo, hi));
    }
    NormParams { columns }
}

/// Maps each cell to `(v - min) / (max - min)`, clamped into `[0, 1]`.
/// Returns the scaled matrix and how many cells needed clamping. Constant
/// columns map to 0.
pub fn apply_minmax(matrix: &SignalMatrix, params: &NormParams) -> Result<(SignalMatrix, usize)> {
    let bounds: Vec<(f64, f64)> = matrix
        .columns()
        .iter()
        .map(|c| {
            params
                .get(c)
                .ok_or_else(|| Error::Shape(format!("no normalization params for column `{c}`")))
        })
        .collect::<Result<_>>()?;
    let w = bounds.len();
    let mut clamped = 0;
    let values = matrix
        .values()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let (lo, hi) = bounds[i % w];
            if hi <= lo {
                return 0.0;
            }
            let s = (v - lo) / (hi - lo);
            if !(0.0..=1.0).contains(&s) {
                clamped += 1;
            }
            s.clamp(0.0, 1.0)
        })
        .collect();
    Ok((SignalMatrix::new(matrix.calendar(), matrix.columns().to_vec(), values)?, clamped))
}

/// Scales a single value the way [`apply_minmax`] would, without clamping.
pub fn scale_value(value: f64, column: &str, params: &NormParams) -> Result<f64> {
    let (lo, hi) = params
        .get(column)
        .ok_or_else(|| Error::Shape(format!("no normalization params for column `{column}`")))?;
    if hi <= lo {
        return Ok(0.0);
    }
    Ok((value - lo) / (hi - lo))
}

/// Maps a normalized value back to the column's original units.
pub fn invert_minmax(value: f64, column: &str, params: &NormParams) -> Result<f64> {
    let (lo, hi) = params
        .get(column)
        .ok_or_else(|| Error::Shape(format!("no normalization params for column `{column}`")))?;
    if hi <= lo {
        return Err(Error::InvalidArgument(format!(
            "column `{column}` is constant and cannot be un-normalized"
        )));
    }
    Ok(lo + value * (hi - lo))
}

/// One supervised example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    /// `k x F` row-major window; the last row is the anchor day.
    pub input: Vec<f64>,
    pub target: f64,
    pub anchor_date: NaiveDate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowedDataset {
    pub k: usize,
    pub j: usize,
    pub feature_names: Vec<String>,
    pub samples: Vec<Sample>,
}

impl WindowedDataset {
    pub fn features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Date each sample's target refers to.
    pub fn target_date(&self, sample: &Sample) -> NaiveDate {
        sample.anchor_date + Duration::days(self.j as i64)
    }

    /// Samples whose anchor date lies inside `range`, in order.
    pub fn select(&self, range: DateRange) -> WindowedDataset {
        WindowedDataset {
            k: self.k,
            j: self.j,
            feature_names: self.feature_names.clone(),
            samples: self
                .samples
                .iter()
                .filter(|s| range.contains(s.anchor_date))
                .cloned()
                .collect(),
        }
    }

    /// One row per sample: anchor date, flattened window, target.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("anchor_date");
        for lag in (0..self.k).rev() {
            for f in &self.feature_names {
                let _ = write!(out, ",{f}@t-{lag}");
            }
        }
        out.push_str(",target\n");
        for s in &self.samples {
            let _ = write!(out, "{}", s.anchor_date);
            for v in &s.input {
                let _ = write!(out, ",{v}");
            }
            let _ = writeln!(out, ",{}", s.target);
        }
        out
    }
}

/// Pairs each `k`-day window of `x` ending at anchor `i` with `y[i + j]`.
pub fn make_windows(x: &SignalMatrix, y: &[f64], k: usize, j: usize) -> Result<WindowedDataset> {
    if k == 0 || j == 0 {
        return Err(Error::InvalidArgument(format!("k and j must be at least 1 (k={k}, j={j})")));
    }
    let n = x.rows();
    if y.len() != n {
        return Err(Error::Shape(format!("{} signal rows but {} targets", n, y.len())));
    }
    if n < k + j {
        return Err(Error::InsufficientData(format!(
            "series of {n} days is shorter than k + j = {}",
            k + j
        )));
    }
    let w = x.width();
    let cal = x.calendar();
    let samples = (k - 1..n - j)
        .map(|i| Sample {
            input: x.values()[(i + 1 - k) * w..(i + 1) * w].to_vec(),
            target: y[i + j],
            anchor_date: cal.date_at(i),
        })
        .collect();
    Ok(WindowedDataset {
        k,
        j,
        feature_names: x.columns().to_vec(),
        samples,
    })
}

/// Anchor-date ranges for training and testing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub train: DateRange,
    pub test: DateRange,
}

/// Splits the anchors available to the largest `(k_max, j_max)` window pair
/// chronologically, so every smaller configuration shares the same dates.
pub fn split_protocol(calendar: DateRange, k_max: usize, j_max: usize, train_frac: f64) -> Result<SplitPlan> {
    if k_max == 0 || j_max == 0 {
        return Err(Error::InvalidArgument("k_max and j_max must be at least 1".into()));
    }
    if !(0.0 < train_frac && train_frac < 1.0) {
        return Err(Error::InvalidArgument(format!("train fraction {train_frac} outside (0, 1)")));
    }
    let n = calendar.len();
    if n < k_max + j_max + 5 {
        return Err(Error::InsufficientData(format!(
            "{n} days cannot host windows k={k_max}, j={j_max} with a test set"
        )));
    }
    let first = k_max - 1;
    let count = n - k_max - j_max + 1;
    let n_train = ((train_frac * count as f64) + COUNT_EPS).floor() as usize;
    if n_train == 0 || n_train == count {
        return Err(Error::InsufficientData(format!("{count} anchors cannot be split {train_frac}")));
    }
    Ok(SplitPlan {
        train: DateRange::new(calendar.date_at(first), calendar.date_at(first + n_train - 1))?,
        test: DateRange::new(calendar.date_at(first + n_train), calendar.date_at(first + count - 1))?,
    })
}

/// Holds out the chronologically last `ceil(frac * n)` samples for validation.
pub fn validation_tail(train: &WindowedDataset, frac: f64) -> Result<(WindowedDataset, WindowedDataset)> {
    let n = train.len();
    if n < 5 {
        return Err(Error::InsufficientData(format!("{n} samples; validation split needs 5")));
    }
    let n_val = ((frac * n as f64) - COUNT_EPS).ceil().max(1.0) as usize;
    let n_val = n_val.min(n - 1);
    let mut fit = train.clone();
    let val_samples = fit.samples.split_off(n - n_val);
    let val = WindowedDataset {
        samples: val_samples,
        ..train.clone_empty()
    };
    Ok((fit, val))
}

impl WindowedDataset {
    fn clone_empty(&self) -> WindowedDataset {
        WindowedDataset {
            k: self.k,
            j: self.j,
            feature_names: self.feature_names.clone(),
            samples: Vec::new(),
        }
    }
}
