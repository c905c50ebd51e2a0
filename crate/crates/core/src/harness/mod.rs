//! The ablation engine: grid enumeration, per-configuration runs on a shared
//! split, ranking, report emission and the synthetic data generator.

mod report;
mod synthetic;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use chrono::{Duration, NaiveDate};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arima;
use crate::calendar::DateRange;
use crate::dataset::{
    apply_minmax, fit_minmax, make_windows, split_protocol, validation_tail, SplitPlan, WindowedDataset,
    DEFAULT_J_MAX, DEFAULT_K_MAX, DEFAULT_TRAIN_FRAC, DEFAULT_VALIDATION_FRAC,
};
use crate::error::{Error, Result};
use crate::ingest::{align_calendar, CommentRecord, EventRecord, PriceSeries};
use crate::lstm::{self, init_network, TrainConfig, TrainedModel, DEFAULT_SIZES};
use crate::metrics::{evaluate, MetricsReport};
use crate::signals::{
    build_vocabulary, concat_signals, github_all_signal, github_popularity_signal, reddit_language_signal,
    reddit_score_signal, reddit_sentiment_signal, reddit_volume_signal, SentimentLexicon, SignalFamily, SignalMatrix,
    Vocabulary, DEFAULT_VOCAB_SIZE, PRICE_HIGH_COLUMN,
};
use crate::stats::autocorrelation;

pub use report::{emit_report, metrics_csv, predictions_csv, ranking_csv, render_svg};
pub use synthetic::{generate_synthetic, SYNTHETIC_COIN, SYNTHETIC_REPO, SYNTHETIC_START, SYNTHETIC_SUBREDDIT};

/// Upper bound on the ARIMA lag order considered by default.
pub const DEFAULT_ARIMA_MAX_P: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    Arima,
    Lstm,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Arima => "ARIMA",
            ModelKind::Lstm => "LSTM",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One cell of the ablation grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub coin: String,
    pub model: ModelKind,
    /// Social families added to price, sorted and deduplicated. Price itself
    /// is implied and never listed.
    pub signals: Vec<SignalFamily>,
    /// Training window; 0 for ARIMA, which consumes the full history.
    pub k: usize,
    pub j: usize,
    pub sizes: Vec<usize>,
    pub train: TrainConfig,
    pub seed: u64,
}

impl ExperimentConfig {
    /// Stable identifier used for file names and seed derivation.
    pub fn id(&self) -> String {
        let mut sig = String::from("price");
        for s in &self.signals {
            sig.push('+');
            sig.push_str(&s.name().to_ascii_lowercase());
        }
        let coin = sanitize(&self.coin);
        match self.model {
            ModelKind::Arima => format!("{coin}_arima_{sig}_j{}", self.j),
            ModelKind::Lstm => format!("{coin}_lstm_{sig}_k{}_j{}", self.k, self.j),
        }
    }

    /// `$`, `$+R_Lang`, ...
    pub fn signals_label(&self) -> String {
        signals_label(&self.signals)
    }

    pub fn validate(&self) -> Result<()> {
        if self.j == 0 {
            return Err(Error::InvalidArgument("forecasting window j must be at least 1".into()));
        }
        if self.signals.contains(&SignalFamily::Price) {
            return Err(Error::InvalidArgument("price is implied; list only social families".into()));
        }
        if self.signals.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("signal families must be sorted and unique".into()));
        }
        match self.model {
            ModelKind::Arima if !self.signals.is_empty() => {
                Err(Error::InvalidArgument("ARIMA uses price history only".into()))
            }
            ModelKind::Lstm if self.k == 0 => Err(Error::InvalidArgument("training window k must be at least 1".into())),
            ModelKind::Lstm if self.sizes.is_empty() => Err(Error::InvalidArgument("no LSTM layers".into())),
            _ => self.train.validate(),
        }
    }
}

pub fn signals_label(signals: &[SignalFamily]) -> String {
    let mut s = String::from("$");
    for f in signals {
        s.push('+');
        s.push_str(f.name());
    }
    s
}

fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '-' })
        .collect()
}

fn fnv1a(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for one configuration, depending only on the master seed and the
/// configuration's identifier.
pub fn derive_seed(master: u64, id: &str) -> u64 {
    splitmix64(master ^ fnv1a(id))
}

/// Every subset of `available` (deduplicated, canonical order), starting
/// with the empty set.
pub fn signal_powerset(available: &[SignalFamily]) -> Vec<Vec<SignalFamily>> {
    let set: BTreeSet<SignalFamily> = available.iter().copied().filter(|f| *f != SignalFamily::Price).collect();
    let fams: Vec<SignalFamily> = set.into_iter().collect();
    (0u32..1 << fams.len())
        .map(|mask| {
            fams.iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, f)| *f)
                .collect()
        })
        .collect()
}

/// The signal sets reported in the published ablation: `$`, `$+R_Lang`,
/// `$+GH_Pop+R_Lang`, `$+R_Vol`.
pub fn reported_signal_sets() -> Vec<Vec<SignalFamily>> {
    vec![
        vec![],
        vec![SignalFamily::RLang],
        vec![SignalFamily::GhPop, SignalFamily::RLang],
        vec![SignalFamily::RVol],
    ]
}

/// Settings shared by every configuration of a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridTemplate {
    pub sizes: Vec<usize>,
    pub train: TrainConfig,
    pub master_seed: u64,
}

impl Default for GridTemplate {
    fn default() -> Self {
        GridTemplate {
            sizes: DEFAULT_SIZES.to_vec(),
            train: TrainConfig::default(),
            master_seed: 0,
        }
    }
}

/// Builds the grid: per coin and `j`, one ARIMA run followed by an LSTM run
/// for every `k` and signal set.
pub fn enumerate_grid(
    coins: &[String],
    signal_sets: &[Vec<SignalFamily>],
    ks: &[usize],
    js: &[usize],
    template: &GridTemplate,
) -> Result<Vec<ExperimentConfig>> {
    if coins.is_empty() || ks.is_empty() || js.is_empty() || signal_sets.is_empty() {
        return Err(Error::InvalidArgument("grid ranges must be nonempty".into()));
    }
    let mut sets: Vec<Vec<SignalFamily>> = Vec::new();
    for s in signal_sets {
        let canon: Vec<SignalFamily> = s
            .iter()
            .copied()
            .filter(|f| *f != SignalFamily::Price)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        if !sets.contains(&canon) {
            sets.push(canon);
        }
    }
    let mut out = Vec::new();
    for coin in coins {
        for &j in js {
            out.push(seeded(
                ExperimentConfig {
                    coin: coin.clone(),
                    model: ModelKind::Arima,
                    signals: Vec::new(),
                    k: 0,
                    j,
                    sizes: Vec::new(),
                    train: template.train.clone(),
                    seed: 0,
                },
                template.master_seed,
            ));
            for &k in ks {
                for set in &sets {
                    out.push(seeded(
                        ExperimentConfig {
                            coin: coin.clone(),
                            model: ModelKind::Lstm,
                            signals: set.clone(),
                            k,
                            j,
                            sizes: template.sizes.clone(),
                            train: template.train.clone(),
                            seed: 0,
                        },
                        template.master_seed,
                    ));
                }
            }
        }
    }
    for c in &out {
        c.validate()?;
    }
    Ok(out)
}

fn seeded(mut config: ExperimentConfig, master: u64) -> ExperimentConfig {
    config.seed = derive_seed(master, &config.id());
    config.train.seed = splitmix64(config.seed);
    config
}

/// Raw archives for one coin.
#[derive(Debug, Clone, PartialEq)]
pub struct CoinData {
    pub coin: String,
    pub price: PriceSeries,
    pub comments: Vec<CommentRecord>,
    pub events: Vec<EventRecord>,
}

#[derive(Debug, Clone)]
pub struct SignalOptions {
    pub vocab_size: usize,
    pub lexicon: SentimentLexicon,
}

impl Default for SignalOptions {
    fn default() -> Self {
        SignalOptions {
            vocab_size: DEFAULT_VOCAB_SIZE,
            lexicon: SentimentLexicon::bundled(),
        }
    }
}

/// One coin's price high and signal families on the shared calendar.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedCoin {
    pub coin: String,
    pub calendar: DateRange,
    pub price_high: Vec<f64>,
    pub families: BTreeMap<SignalFamily, SignalMatrix>,
    /// Families that could not be built, with the reason.
    pub unavailable: BTreeMap<SignalFamily, String>,
    pub vocabulary: Option<Vocabulary>,
}

/// Builds one family's matrix over `calendar`.
pub fn family_matrix(
    family: SignalFamily,
    data: &CoinData,
    price_high: &[f64],
    calendar: DateRange,
    vocabulary: Option<&Vocabulary>,
    options: &SignalOptions,
) -> Result<SignalMatrix> {
    Ok(match family {
        SignalFamily::Price => SignalMatrix::from_column(calendar, PRICE_HIGH_COLUMN, price_high)?,
        SignalFamily::GhPop => github_popularity_signal(&data.events, calendar),
        SignalFamily::GhAll => github_all_signal(&data.events, calendar),
        SignalFamily::RVol => reddit_volume_signal(&data.comments, calendar),
        SignalFamily::RLang => {
            let vocab = vocabulary.ok_or_else(|| Error::InvalidArgument("R_Lang needs a vocabulary".into()))?;
            reddit_language_signal(&data.comments, vocab, calendar)?
        }
        SignalFamily::RScore => reddit_score_signal(&data.comments, calendar),
        SignalFamily::RSent => reddit_sentiment_signal(&data.comments, &options.lexicon, calendar),
    })
}

/// Aligns the coin's price to `calendar` and builds the requested families.
/// Families that fail are recorded in `unavailable` rather than aborting.
pub fn prepare_coin(
    data: &CoinData,
    calendar: DateRange,
    families: &[SignalFamily],
    options: &SignalOptions,
) -> Result<PreparedCoin> {
    let (aligned, fills) = align_calendar(&data.price, calendar.start, calendar.end)?;
    if fills.count() > 0 {
        log::warn!("{}: forward-filled {} missing price days", data.coin, fills.count());
    }
    aligned.validate(true)?;
    let in_range: Vec<CommentRecord> =
        data.comments.iter().filter(|c| calendar.contains(c.day())).cloned().collect();
    let mut vocabulary = None;
    let mut unavailable = BTreeMap::new();
    if families.contains(&SignalFamily::RLang) {
        match build_vocabulary(&in_range, options.vocab_size) {
            Ok(v) => vocabulary = Some(v),
            Err(e) => {
                unavailable.insert(SignalFamily::RLang, e.to_string());
            }
        }
    }
    let mut built = BTreeMap::new();
    for &f in families.iter().collect::<BTreeSet<_>>() {
        if f == SignalFamily::Price || unavailable.contains_key(&f) {
            continue;
        }
        match family_matrix(f, data, &aligned.high, calendar, vocabulary.as_ref(), options) {
            Ok(m) => {
                built.insert(f, m);
            }
            Err(e) => {
                unavailable.insert(f, e.to_string());
            }
        }
    }
    Ok(PreparedCoin {
        coin: data.coin.clone(),
        calendar,
        price_high: aligned.high,
        families: built,
        unavailable,
        vocabulary,
    })
}

/// The largest calendar covered by every coin's price series, optionally
/// clipped to `[start, end]`.
pub fn common_calendar(coins: &[CoinData], start: Option<NaiveDate>, end: Option<NaiveDate>) -> Result<DateRange> {
    let mut range: Option<DateRange> = None;
    for c in coins {
        let r = c
            .price
            .range()
            .ok_or_else(|| Error::Empty(format!("price series for {}", c.coin)))?;
        range = Some(match range {
            None => r,
            Some(acc) => acc
                .intersect(&r)
                .ok_or_else(|| Error::Range(format!("{} shares no days with the other coins", c.coin)))?,
        });
    }
    let mut range = range.ok_or_else(|| Error::Empty("no coins".into()))?;
    let s = start.unwrap_or(range.start).max(range.start);
    let e = end.unwrap_or(range.end).min(range.end);
    if start.is_some_and(|d| d < range.start) || end.is_some_and(|d| d > range.end) {
        return Err(Error::Range(format!(
            "requested {}..={} extends beyond the shared price range {range}",
            start.map_or("*".to_string(), |d| d.to_string()),
            end.map_or("*".to_string(), |d| d.to_string()),
        )));
    }
    range = DateRange::new(s, e)?;
    Ok(range)
}

/// Immutable input shared by every experiment of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct DataBundle {
    pub calendar: DateRange,
    pub coins: Vec<PreparedCoin>,
    pub split: SplitPlan,
    pub k_max: usize,
    pub j_max: usize,
}

impl DataBundle {
    /// Splits the shared calendar for windows up to `k_max` and `j_max`
    /// (never below the protocol defaults of 14 and 3).
    pub fn new(coins: Vec<PreparedCoin>, k_max: usize, j_max: usize) -> Result<Self> {
        let calendar = coins
            .first()
            .map(|c| c.calendar)
            .ok_or_else(|| Error::Empty("no coins in bundle".into()))?;
        if let Some(c) = coins.iter().find(|c| c.calendar != calendar) {
            return Err(Error::Range(format!("{} uses calendar {} instead of {calendar}", c.coin, c.calendar)));
        }
        let k_max = k_max.max(DEFAULT_K_MAX);
        let j_max = j_max.max(DEFAULT_J_MAX);
        let split = split_protocol(calendar, k_max, j_max, DEFAULT_TRAIN_FRAC)?;
        Ok(DataBundle {
            calendar,
            coins,
            split,
            k_max,
            j_max,
        })
    }

    pub fn coin(&self, name: &str) -> Result<&PreparedCoin> {
        self.coins
            .iter()
            .find(|c| c.coin == name)
            .ok_or_else(|| Error::InvalidArgument(format!("coin `{name}` is not in the bundle")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Normalization {
    /// Min/max over the whole calendar.
    Full,
    /// Min/max over days up to the last training anchor.
    TrainOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub normalization: Normalization,
    pub validation_frac: f64,
    pub arima_max_p: usize,
    /// Refit ARIMA coefficients at every test anchor instead of once on the
    /// training span.
    pub arima_refit: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            normalization: Normalization::Full,
            validation_frac: DEFAULT_VALIDATION_FRAC,
            arima_max_p: DEFAULT_ARIMA_MAX_P,
            arima_refit: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictionPoint {
    /// Day the prediction refers to (anchor + j).
    pub date: NaiveDate,
    pub true_usd: f64,
    pub pred_usd: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub epochs: usize,
    pub best_epoch: usize,
    pub best_val_mse: Option<f64>,
    pub arima_p: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub metrics: Option<MetricsReport>,
    pub predictions: Vec<PredictionPoint>,
    pub summary: TrainSummary,
    pub error: Option<String>,
}

impl ExperimentResult {
    pub fn failed(config: ExperimentConfig, error: &Error) -> Self {
        ExperimentResult {
            config,
            metrics: None,
            predictions: Vec::new(),
            summary: TrainSummary::default(),
            error: Some(error.to_string()),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.error.is_none() && self.metrics.is_some()
    }
}

/// Price high first, then each requested family's columns in canonical order.
pub fn feature_matrix(coin: &PreparedCoin, signals: &[SignalFamily]) -> Result<SignalMatrix> {
    let price = SignalMatrix::from_column(coin.calendar, PRICE_HIGH_COLUMN, &coin.price_high)?;
    let mut parts = vec![&price];
    for f in signals {
        match coin.families.get(f) {
            Some(m) => parts.push(m),
            None => {
                let why = coin.unavailable.get(f).map_or("not prepared", String::as_str);
                return Err(Error::InvalidArgument(format!("{} signal unavailable for {}: {why}", f, coin.coin)));
            }
        }
    }
    concat_signals(&parts)
}

fn check_windows(config: &ExperimentConfig, bundle: &DataBundle) -> Result<()> {
    config.validate()?;
    if config.j > bundle.j_max || config.k > bundle.k_max {
        return Err(Error::InvalidArgument(format!(
            "k={} j={} exceed the split's k_max={} j_max={}",
            config.k, config.j, bundle.k_max, bundle.j_max
        )));
    }
    Ok(())
}

/// A trained LSTM with the windowed test set it should be scored on.
pub struct FittedLstm {
    pub model: TrainedModel,
    pub test: WindowedDataset,
}

/// Builds features, normalizes, windows and trains the configuration's LSTM.
pub fn fit_lstm(config: &ExperimentConfig, bundle: &DataBundle, options: &RunOptions) -> Result<FittedLstm> {
    check_windows(config, bundle)?;
    if config.model != ModelKind::Lstm {
        return Err(Error::InvalidArgument("fit_lstm needs an LSTM configuration".into()));
    }
    let coin = bundle.coin(&config.coin)?;
    let x = feature_matrix(coin, &config.signals)?;
    let norm = match options.normalization {
        Normalization::Full => fit_minmax(&x),
        Normalization::TrainOnly => fit_minmax(&x.slice(DateRange::new(bundle.calendar.start, bundle.split.train.end)?)?),
    };
    let (xn, clamped) = apply_minmax(&x, &norm)?;
    if clamped > 0 {
        log::debug!("{}: {clamped} cells clamped into [0, 1]", config.id());
    }
    let yn = xn.column(0);
    let windows = make_windows(&xn, &yn, config.k, config.j)?;
    let train_set = windows.select(bundle.split.train);
    let test = windows.select(bundle.split.test);
    if test.len() != bundle.split.test.len() {
        return Err(Error::Range(format!(
            "{} of {} test anchors available",
            test.len(),
            bundle.split.test.len()
        )));
    }
    let (fit, val) = validation_tail(&train_set, options.validation_frac)?;
    let net = init_network(x.width(), &config.sizes, config.seed)?;
    let mut model = lstm::train(net, &fit, &val, norm, &config.train)?;
    model.meta.insert("coin".into(), config.coin.clone());
    model.meta.insert("signals".into(), config.signals_label());
    model.meta.insert("calendar_start".into(), bundle.calendar.start.to_string());
    model.meta.insert("calendar_end".into(), bundle.calendar.end.to_string());
    if config.signals.contains(&SignalFamily::RLang) {
        if let Some(v) = &coin.vocabulary {
            model.meta.insert("vocabulary".into(), serde_json::to_string(v)?);
        }
    }
    Ok(FittedLstm { model, test })
}

/// Largest lag in `1..=cap` whose autocorrelation of first differences is
/// outside the white-noise band `±1.96/sqrt(n)`; 0 if none is.
pub fn significant_lag_cap(y: &[f64], cap: usize) -> usize {
    if y.len() < 3 || cap == 0 {
        return 0;
    }
    let dy: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).collect();
    let cap = cap.min(dy.len() - 1);
    let Ok(acf) = autocorrelation(&dy, cap) else {
        return 0;
    };
    let band = 1.96 / (dy.len() as f64).sqrt();
    (1..=cap).rev().find(|&l| acf[l].abs() > band).unwrap_or(0)
}

fn run_arima(config: &ExperimentConfig, bundle: &DataBundle, options: &RunOptions) -> Result<ExperimentResult> {
    let coin = bundle.coin(&config.coin)?;
    let cal = bundle.calendar;
    let last_train = cal.index_of(bundle.split.train.end).expect("split inside calendar");
    let y_train = &coin.price_high[..=last_train];
    let max_p = significant_lag_cap(y_train, options.arima_max_p);
    let p = arima::select_lag(y_train, max_p)?;
    let model = arima::fit(y_train, p)?;
    let mut predictions = Vec::with_capacity(bundle.split.test.len());
    for anchor in bundle.split.test.iter() {
        let i = cal.index_of(anchor).expect("split inside calendar");
        let history = &coin.price_high[..=i];
        let pred = if options.arima_refit {
            arima::forecast(&arima::fit(history, p)?, history, config.j)?
        } else {
            arima::forecast(&model, history, config.j)?
        };
        predictions.push(PredictionPoint {
            date: anchor + Duration::days(config.j as i64),
            true_usd: coin.price_high[i + config.j],
            pred_usd: pred,
        });
    }
    finish(config, predictions, TrainSummary {
        arima_p: Some(model.p),
        ..TrainSummary::default()
    })
}

fn run_lstm(config: &ExperimentConfig, bundle: &DataBundle, options: &RunOptions) -> Result<ExperimentResult> {
    let fitted = fit_lstm(config, bundle, options)?;
    score_lstm(config, bundle, &fitted)
}

/// Predicts every test anchor of a fitted LSTM and evaluates in USD.
pub fn score_lstm(config: &ExperimentConfig, bundle: &DataBundle, fitted: &FittedLstm) -> Result<ExperimentResult> {
    let FittedLstm { model, test } = fitted;
    let coin = bundle.coin(&config.coin)?;
    let windows: Vec<&[f64]> = test.samples.iter().map(|s| s.input.as_slice()).collect();
    let preds = lstm::predict(model, &windows)?;
    let predictions = test
        .samples
        .iter()
        .zip(preds)
        .map(|(s, pred)| {
            let i = bundle.calendar.index_of(s.anchor_date).expect("anchor inside calendar");
            PredictionPoint {
                date: test.target_date(s),
                true_usd: coin.price_high[i + config.j],
                pred_usd: pred,
            }
        })
        .collect();
    let summary = TrainSummary {
        epochs: model.history.len(),
        best_epoch: model.best_epoch,
        best_val_mse: model.history.get(model.best_epoch.wrapping_sub(1)).map(|h| h.val_mse),
        arima_p: None,
    };
    finish(config, predictions, summary)
}

fn finish(config: &ExperimentConfig, predictions: Vec<PredictionPoint>, summary: TrainSummary) -> Result<ExperimentResult> {
    let pred: Vec<f64> = predictions.iter().map(|p| p.pred_usd).collect();
    let truth: Vec<f64> = predictions.iter().map(|p| p.true_usd).collect();
    let metrics = evaluate(&pred, &truth)?;
    Ok(ExperimentResult {
        config: config.clone(),
        metrics: Some(metrics),
        predictions,
        summary,
        error: None,
    })
}

/// Runs one configuration on the bundle's shared split and scores every
/// test anchor in USD.
pub fn run_experiment(config: &ExperimentConfig, bundle: &DataBundle, options: &RunOptions) -> Result<ExperimentResult> {
    check_windows(config, bundle)?;
    log::info!("running {}", config.id());
    match config.model {
        ModelKind::Arima => run_arima(config, bundle, options),
        ModelKind::Lstm => run_lstm(config, bundle, options),
    }
}

/// Runs every configuration on a pool of `jobs` threads. Failures become
/// failed rows; output order follows `configs`.
pub fn run_grid(
    configs: &[ExperimentConfig],
    bundle: &DataBundle,
    options: &RunOptions,
    jobs: usize,
) -> Result<Vec<ExperimentResult>> {
    let run = |c: &ExperimentConfig| match run_experiment(c, bundle, options) {
        Ok(r) => r,
        Err(e) => {
            log::warn!("{} failed: {e}", c.id());
            ExperimentResult::failed(c.clone(), &e)
        }
    };
    if jobs <= 1 {
        return Ok(configs.iter().map(run).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    Ok(pool.install(|| configs.par_iter().map(run).collect()))
}

/// One line of the ranking table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankRow {
    pub model: String,
    pub signals: String,
    /// Mean RMSPE across coins, per forecasting window.
    pub rmspe_by_j: BTreeMap<usize, f64>,
    pub mean: f64,
}

/// Groups successful results by model, signal set and (when several are
/// present) training window; averages RMSPE across coins per `j`, then
/// across `j`, and sorts ascending with ties broken by name.
pub fn rank_models(results: &[ExperimentResult]) -> Result<Vec<RankRow>> {
    let (rows, dropped) = rank_inner(results, true)?;
    debug_assert!(dropped.is_empty());
    Ok(rows)
}

/// Like [`rank_models`], but groups with incomplete coverage are left out
/// and their labels returned instead of failing the whole ranking.
pub fn rank_complete(results: &[ExperimentResult]) -> (Vec<RankRow>, Vec<String>) {
    rank_inner(results, false).unwrap_or_default()
}

fn rank_inner(results: &[ExperimentResult], strict: bool) -> Result<(Vec<RankRow>, Vec<String>)> {
    let ok: Vec<&ExperimentResult> = results.iter().filter(|r| r.is_ok()).collect();
    if ok.is_empty() {
        return Err(Error::Empty("no successful results to rank".into()));
    }
    let lstm_ks: BTreeSet<usize> = ok
        .iter()
        .filter(|r| r.config.model == ModelKind::Lstm)
        .map(|r| r.config.k)
        .collect();
    let multi_k = lstm_ks.len() > 1;
    let mut groups: BTreeMap<(String, String), BTreeMap<(usize, String), f64>> = BTreeMap::new();
    let mut coverage: BTreeSet<(usize, String)> = BTreeSet::new();
    for r in &ok {
        let c = &r.config;
        let model = if multi_k && c.model == ModelKind::Lstm {
            format!("LSTM(k={})", c.k)
        } else {
            c.model.name().to_string()
        };
        let key = (c.j, c.coin.clone());
        coverage.insert(key.clone());
        let cell = groups.entry((model.clone(), c.signals_label())).or_default();
        if cell.insert(key, r.metrics.as_ref().unwrap().rmspe).is_some() {
            return Err(Error::InvalidArgument(format!(
                "duplicate result for {model} {} ({}, j={})",
                c.signals_label(),
                c.coin,
                c.j
            )));
        }
    }
    let mut rows = Vec::with_capacity(groups.len());
    let mut dropped = Vec::new();
    for ((model, signals), cells) in groups {
        if cells.keys().ne(coverage.iter()) {
            if !strict {
                dropped.push(format!("{model} {signals}"));
                continue;
            }
            return Err(Error::InvalidArgument(format!(
                "inconsistent coverage: {model} {signals} has {} of {} (coin, j) cells",
                cells.len(),
                coverage.len()
            )));
        }
        let mut per_j: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
        for ((j, _), v) in &cells {
            let e = per_j.entry(*j).or_insert((0.0, 0));
            e.0 += v;
            e.1 += 1;
        }
        let rmspe_by_j: BTreeMap<usize, f64> = per_j.into_iter().map(|(j, (s, n))| (j, s / n as f64)).collect();
        let mean = rmspe_by_j.values().sum::<f64>() / rmspe_by_j.len() as f64;
        rows.push(RankRow {
            model,
            signals,
            rmspe_by_j,
            mean,
        });
    }
    rows.sort_by(|a, b| {
        a.mean
            .total_cmp(&b.mean)
            .then_with(|| a.model.cmp(&b.model))
            .then_with(|| a.signals.cmp(&b.signals))
    });
    Ok((rows, dropped))
}
