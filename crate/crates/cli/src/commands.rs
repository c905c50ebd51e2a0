use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use chrono::{Duration, NaiveDate};
use coinseer_core::dataset::scale_value;
use coinseer_core::harness::{
    common_calendar, emit_report, enumerate_grid, family_matrix, fit_lstm, generate_synthetic, prepare_coin,
    rank_models, reported_signal_sets, run_grid, score_lstm, signal_powerset, CoinData, DataBundle, GridTemplate,
    ModelKind, Normalization, RunOptions, SignalOptions, SYNTHETIC_REPO, SYNTHETIC_SUBREDDIT,
};
use coinseer_core::ingest::{align_calendar, comments_to_ndjson, events_to_ndjson};
use coinseer_core::lstm::{self, TrainConfig, TrainedModel, DEFAULT_SIZES};
use coinseer_core::signals::{concat_signals, SentimentLexicon, SignalFamily, Vocabulary, DEFAULT_VOCAB_SIZE};
use coinseer_core::stats::{correlation_csv, correlation_table};
use coinseer_core::{DateRange, ExperimentResult, SignalMatrix};

use crate::config::{CoinConfig, Config, DataSource, RunManifest, SignalSpec};
use crate::{DataArgs, ModelArgs};

const SEED_ENV: &str = "COINSEER_SEED";

fn env_seed() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => Ok(Some(v.trim().parse().with_context(|| format!("{SEED_ENV}=`{v}` is not a seed"))?)),
        Err(_) => Ok(None),
    }
}

/// Flag, then config file, then environment, then 0.
fn resolve_seed(flag: Option<u64>, cfg: &Config) -> Result<u64> {
    Ok(match flag.or(cfg.seed) {
        Some(s) => s,
        None => env_seed()?.unwrap_or(0),
    })
}

struct Inputs {
    cfg: Config,
    source: DataSource,
    coins: Vec<CoinData>,
    seed: u64,
    options: SignalOptions,
}

fn load_inputs(data: &DataArgs) -> Result<Inputs> {
    let (cfg, source_path) = match &data.config {
        Some(path) => (Config::load(path)?, Some(path.clone())),
        None => (Config::default(), None),
    };
    let seed = resolve_seed(data.seed, &cfg)?;
    let source = match source_path {
        Some(path) => DataSource::Config {
            path,
            coins: cfg.coins.clone(),
        },
        None => DataSource::Synthetic {
            seed,
            days: data.days,
        },
    };
    let coins = source.load(&cfg)?;
    let lexicon = match data.lexicon.as_ref().or(cfg.lexicon.as_ref()) {
        Some(path) => SentimentLexicon::load(path)?,
        None => SentimentLexicon::bundled(),
    };
    let options = SignalOptions {
        vocab_size: data.vocab_size.or(cfg.vocab_size).unwrap_or(DEFAULT_VOCAB_SIZE),
        lexicon,
    };
    Ok(Inputs {
        cfg,
        source,
        coins,
        seed,
        options,
    })
}

impl Inputs {
    fn calendar(&self, data: &DataArgs) -> Result<DateRange> {
        Ok(common_calendar(&self.coins, data.start.or(self.cfg.start), data.end.or(self.cfg.end))?)
    }

    fn manifest(&self, command: &str, output: &Path) -> RunManifest {
        RunManifest::new(command, self.source.clone(), self.seed, output)
    }
}

fn parse_families(s: &str) -> Result<Vec<SignalFamily>> {
    let mut out: Vec<SignalFamily> = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty() && *t != "$")
        .map(|t| SignalFamily::from_str(t).map_err(anyhow::Error::from))
        .collect::<Result<_>>()?;
    out.retain(|f| *f != SignalFamily::Price);
    out.sort();
    out.dedup();
    Ok(out)
}

fn families_or_all(spec: Option<&str>) -> Result<Vec<SignalFamily>> {
    match spec {
        None | Some("all") => Ok(SignalFamily::SOCIAL.to_vec()),
        Some(s) => parse_families(s),
    }
}

fn signal_sets(flag: Option<&str>, cfg: &Config) -> Result<Vec<Vec<SignalFamily>>> {
    let spec = match flag {
        Some(s) => SignalSpec::Named(s.to_string()),
        None => cfg.signals.clone().unwrap_or(SignalSpec::Named("reported".into())),
    };
    Ok(match spec {
        SignalSpec::Named(s) if s == "reported" => reported_signal_sets(),
        SignalSpec::Named(s) if s == "all" => signal_powerset(&SignalFamily::SOCIAL),
        SignalSpec::Named(s) if s == "none" => vec![vec![]],
        SignalSpec::Named(s) => signal_powerset(&parse_families(&s)?),
        SignalSpec::Families(list) => signal_powerset(&parse_families(&list.join(","))?),
    })
}

fn train_config(args: &ModelArgs, cfg: &Config) -> TrainConfig {
    let d = TrainConfig::default();
    TrainConfig {
        batch_size: args.batch_size.unwrap_or(d.batch_size),
        learning_rate: args.learning_rate.unwrap_or(d.learning_rate),
        max_epochs: args.epochs.or(cfg.max_epochs).unwrap_or(d.max_epochs),
        patience: args.patience.unwrap_or(d.patience),
        clip_norm: args.clip_norm,
        ..d
    }
}

fn template(args: &ModelArgs, cfg: &Config, seed: u64) -> GridTemplate {
    GridTemplate {
        sizes: args
            .sizes
            .as_ref()
            .map(|c| c.0.clone())
            .or_else(|| cfg.sizes.clone())
            .unwrap_or_else(|| DEFAULT_SIZES.to_vec()),
        train: train_config(args, cfg),
        master_seed: seed,
    }
}

fn run_options(args: &ModelArgs) -> RunOptions {
    let d = RunOptions::default();
    RunOptions {
        normalization: if args.train_only_norm {
            Normalization::TrainOnly
        } else {
            Normalization::Full
        },
        arima_max_p: args.max_p.unwrap_or(d.arima_max_p),
        arima_refit: args.arima_refit,
        ..d
    }
}

fn bundle(inputs: &Inputs, data: &DataArgs, families: &[SignalFamily], k_max: usize, j_max: usize) -> Result<DataBundle> {
    let calendar = inputs.calendar(data)?;
    let prepared = inputs
        .coins
        .iter()
        .map(|c| prepare_coin(c, calendar, families, &inputs.options))
        .collect::<coinseer_core::Result<Vec<_>>>()?;
    Ok(DataBundle::new(prepared, k_max, j_max)?)
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn file_stem(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '-' })
        .collect()
}

pub fn ingest(data: &DataArgs, out: &Path) -> Result<ExitCode> {
    let inputs = load_inputs(data)?;
    let calendar = inputs.calendar(data)?;
    create_dir(out)?;
    for c in &inputs.coins {
        let (aligned, fills) = align_calendar(&c.price, calendar.start, calendar.end)?;
        let comments: Vec<_> = c.comments.iter().filter(|r| calendar.contains(r.day())).cloned().collect();
        let events: Vec<_> = c.events.iter().filter(|r| calendar.contains(r.day())).cloned().collect();
        let stem = file_stem(&c.coin);
        write_file(&out.join(format!("price_{stem}.csv")), aligned.to_csv())?;
        write_file(&out.join(format!("reddit_{stem}.ndjson")), comments_to_ndjson(&comments))?;
        write_file(&out.join(format!("github_{stem}.ndjson")), events_to_ndjson(&events))?;
        println!(
            "{}: {} days ({} filled), {} comments, {} events",
            c.coin,
            aligned.len(),
            fills.count(),
            comments.len(),
            events.len()
        );
    }
    let mut manifest = inputs.manifest("ingest", out);
    manifest.set("calendar", calendar)?;
    manifest.write(&out.join("manifest.json"))?;
    Ok(ExitCode::SUCCESS)
}

pub fn signals(data: &DataArgs, spec: Option<&str>, out: &Path) -> Result<ExitCode> {
    let inputs = load_inputs(data)?;
    let families = families_or_all(spec)?;
    let calendar = inputs.calendar(data)?;
    create_dir(out)?;
    for c in &inputs.coins {
        let prepared = prepare_coin(c, calendar, &families, &inputs.options)?;
        if let Some((f, why)) = prepared.unavailable.iter().next() {
            bail!("{}: cannot build {f}: {why}", c.coin);
        }
        let stem = file_stem(&c.coin);
        for (f, m) in &prepared.families {
            let name = f.name().to_ascii_lowercase();
            write_file(&out.join(format!("signals_{stem}_{name}.csv")), m.to_csv())?;
        }
        if let Some(v) = &prepared.vocabulary {
            write_file(&out.join(format!("vocabulary_{stem}.json")), serde_json::to_string(v)? + "\n")?;
        }
    }
    let mut manifest = inputs.manifest("signals", out);
    manifest.set("calendar", calendar)?;
    manifest.set("families", &families)?;
    manifest.set("vocab_size", inputs.options.vocab_size)?;
    manifest.write(&out.join("manifest.json"))?;
    Ok(ExitCode::SUCCESS)
}

pub fn correlate(data: &DataArgs, spec: Option<&str>, out: &Path) -> Result<ExitCode> {
    let inputs = load_inputs(data)?;
    let families = families_or_all(spec)?;
    let calendar = inputs.calendar(data)?;
    create_dir(out)?;
    for c in &inputs.coins {
        let prepared = prepare_coin(c, calendar, &families, &inputs.options)?;
        for (f, why) in &prepared.unavailable {
            log::warn!("{}: {f} skipped: {why}", c.coin);
        }
        let parts: Vec<&SignalMatrix> = prepared.families.values().collect();
        if parts.is_empty() {
            bail!("{}: no signals to correlate", c.coin);
        }
        let matrix = concat_signals(&parts)?;
        let table = correlation_table(&matrix, &prepared.price_high)?;
        write_file(&out.join(format!("correlation_{}.csv", file_stem(&c.coin))), correlation_csv(&table))?;
    }
    let mut manifest = inputs.manifest("correlate", out);
    manifest.set("calendar", calendar)?;
    manifest.set("families", &families)?;
    manifest.write(&out.join("manifest.json"))?;
    Ok(ExitCode::SUCCESS)
}

fn pick_coin<'a>(coins: &'a [CoinData], name: Option<&str>) -> Result<&'a CoinData> {
    match name {
        Some(n) => coins
            .iter()
            .find(|c| c.coin == n)
            .with_context(|| format!("coin `{n}` not in the data")),
        None => coins.first().context("no coins"),
    }
}

pub fn train(
    data: &DataArgs,
    model_args: &ModelArgs,
    coin: Option<&str>,
    k: usize,
    j: usize,
    signals: &str,
    out: &Path,
) -> Result<ExitCode> {
    let inputs = load_inputs(data)?;
    let coin = pick_coin(&inputs.coins, coin)?.coin.clone();
    let families = parse_families(signals)?;
    let b = bundle(&inputs, data, &families, k, j)?;
    let grid = enumerate_grid(
        &[coin],
        std::slice::from_ref(&families),
        &[k],
        &[j],
        &template(model_args, &inputs.cfg, inputs.seed),
    )?;
    let config = grid
        .into_iter()
        .find(|c| c.model == ModelKind::Lstm)
        .expect("grid holds an LSTM run");
    let options = run_options(model_args);
    let fitted = fit_lstm(&config, &b, &options)?;
    let result = score_lstm(&config, &b, &fitted)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    fitted.model.save(out)?;
    let m = result.metrics.as_ref().expect("scored run has metrics");
    println!(
        "{} epochs (best {}), test n={} RMSPE {:.4} MAPE {:.4} MaxAPE {:.4}",
        result.summary.epochs, result.summary.best_epoch, m.n, m.rmspe, m.mape, m.maxape
    );
    let mut manifest = inputs.manifest("train", out);
    manifest.set("config", &config)?;
    manifest.set("run_options", &options)?;
    manifest.set("split", b.split)?;
    let mut path = out.as_os_str().to_owned();
    path.push(".manifest.json");
    manifest.write(Path::new(&path))?;
    Ok(ExitCode::SUCCESS)
}

fn families_from_label(label: &str) -> Result<Vec<SignalFamily>> {
    parse_families(&label.replace('+', ","))
}

pub fn forecast(data: &DataArgs, model_path: &Path, coin: Option<&str>, out: Option<&Path>) -> Result<ExitCode> {
    if !model_path.is_file() {
        bail!("model file not found: {}", model_path.display());
    }
    let model = TrainedModel::load(model_path)?;
    let inputs = load_inputs(data)?;
    let coin = pick_coin(&inputs.coins, coin.or(model.meta.get("coin").map(String::as_str)))?;
    let families = families_from_label(model.meta.get("signals").map_or("$", String::as_str))?;
    let range = coin.price.range().context("empty price series")?;
    let start = data.start.or(inputs.cfg.start).unwrap_or(range.start);
    let end = data.end.or(inputs.cfg.end).unwrap_or(range.end);
    let calendar = DateRange::new(start, end)?;
    if let Some(model_end) = model.meta.get("calendar_end").and_then(|s| s.parse::<NaiveDate>().ok()) {
        if calendar.end < model_end {
            log::warn!("data ends {} before the model's calendar end {model_end}; forecast is stale", calendar.end);
            eprintln!("warning: data ends {} before the model's calendar end {model_end}", calendar.end);
        }
    }
    let without_lang: Vec<SignalFamily> = families.iter().copied().filter(|f| *f != SignalFamily::RLang).collect();
    let prepared = prepare_coin(coin, calendar, &without_lang, &inputs.options)?;
    if let Some((f, why)) = prepared.unavailable.iter().next() {
        bail!("cannot build {f}: {why}");
    }
    let vocabulary: Option<Vocabulary> = match model.meta.get("vocabulary") {
        Some(v) => Some(serde_json::from_str(v).context("model vocabulary")?),
        None => None,
    };
    let mut parts = vec![family_matrix(
        SignalFamily::Price,
        coin,
        &prepared.price_high,
        calendar,
        None,
        &inputs.options,
    )?];
    for f in &families {
        parts.push(match prepared.families.get(f) {
            Some(m) => m.clone(),
            None => family_matrix(*f, coin, &prepared.price_high, calendar, vocabulary.as_ref(), &inputs.options)?,
        });
    }
    let matrix = concat_signals(&parts.iter().collect::<Vec<_>>())?;
    if matrix.columns() != model.feature_names.as_slice() {
        bail!(
            "data provides {} feature columns, model expects {} ({})",
            matrix.width(),
            model.feature_names.len(),
            model.feature_names.join(",")
        );
    }
    if matrix.rows() < model.k {
        bail!("model needs {} days of data, have {}", model.k, matrix.rows());
    }
    let mut window = Vec::with_capacity(model.k * matrix.width());
    for r in matrix.rows() - model.k..matrix.rows() {
        for (c, name) in matrix.columns().iter().enumerate() {
            window.push(scale_value(matrix.get(r, c), name, &model.norm)?.clamp(0.0, 1.0));
        }
    }
    let pred = lstm::predict(&model, &[window.as_slice()])?[0];
    let date = calendar.end + Duration::days(model.j as i64);
    let text = format!("date,pred_usd\n{date},{pred:.6}\n");
    match out {
        Some(path) => write_file(path, text)?,
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}

pub struct AblateArgs {
    pub data: DataArgs,
    pub model: ModelArgs,
    pub k: Option<Vec<usize>>,
    pub j: Option<Vec<usize>>,
    pub signals: Option<String>,
    pub jobs: usize,
    pub strict: bool,
    pub out: PathBuf,
}

pub fn ablate(args: &AblateArgs) -> Result<ExitCode> {
    let inputs = load_inputs(&args.data)?;
    let ks = args.k.clone().or_else(|| inputs.cfg.k.clone()).unwrap_or_else(|| vec![1]);
    let js = args.j.clone().or_else(|| inputs.cfg.j.clone()).unwrap_or_else(|| vec![1, 2, 3]);
    if ks.contains(&0) || js.contains(&0) {
        bail!("k and j must be at least 1");
    }
    let sets = signal_sets(args.signals.as_deref(), &inputs.cfg)?;
    let needed: Vec<SignalFamily> = sets.iter().flatten().copied().collect();
    let b = bundle(
        &inputs,
        &args.data,
        &needed,
        *ks.iter().max().unwrap(),
        *js.iter().max().unwrap(),
    )?;
    let coins: Vec<String> = b.coins.iter().map(|c| c.coin.clone()).collect();
    let grid_template = template(&args.model, &inputs.cfg, inputs.seed);
    let grid = enumerate_grid(&coins, &sets, &ks, &js, &grid_template)?;
    let options = run_options(&args.model);
    log::info!("{} experiments on {} thread(s)", grid.len(), args.jobs);
    let results = run_grid(&grid, &b, &options, args.jobs)?;

    create_dir(&args.out)?;
    let mut json = serde_json::to_string_pretty(&results)?;
    json.push('\n');
    write_file(&args.out.join("results.json"), json)?;
    emit_report(&results, &args.out)?;
    let mut manifest = inputs.manifest("ablate", &args.out);
    manifest.set("k", &ks)?;
    manifest.set("j", &js)?;
    manifest.set("signal_sets", &sets)?;
    manifest.set("template", &grid_template)?;
    manifest.set("run_options", &options)?;
    manifest.set("jobs", args.jobs)?;
    manifest.set("split", b.split)?;
    manifest.write(&args.out.join("manifest.json"))?;

    let failed = results.iter().filter(|r| !r.is_ok()).count();
    if let Ok(rows) = rank_models(&results) {
        for r in rows {
            println!("{:<12} {:<24} mean RMSPE {:.4}", r.model, r.signals, r.mean);
        }
    }
    println!("{} experiments, {failed} failed; report in {}", results.len(), args.out.display());
    if failed == results.len() || (failed > 0 && args.strict) {
        return Ok(ExitCode::from(1));
    }
    if failed > 0 {
        eprintln!("warning: {failed} experiment(s) failed; see metrics.csv");
    }
    Ok(ExitCode::SUCCESS)
}

pub fn report(results_path: &Path, out: &Path) -> Result<ExitCode> {
    let text = fs::read_to_string(results_path).with_context(|| format!("reading {}", results_path.display()))?;
    let results: Vec<ExperimentResult> =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", results_path.display()))?;
    emit_report(&results, out)?;
    Ok(ExitCode::SUCCESS)
}

pub fn synth(seed: Option<u64>, days: usize, out: &Path) -> Result<ExitCode> {
    let seed = match seed {
        Some(s) => s,
        None => env_seed()?.unwrap_or(0),
    };
    let data = generate_synthetic(seed, days)?;
    create_dir(out)?;
    write_file(&out.join("price.csv"), data.price.to_csv())?;
    write_file(&out.join("reddit.ndjson"), comments_to_ndjson(&data.comments))?;
    write_file(&out.join("github.ndjson"), events_to_ndjson(&data.events))?;
    let cfg = Config {
        coins: vec![CoinConfig {
            name: data.coin.clone(),
            price_csv: "price.csv".into(),
            reddit: Some("reddit.ndjson".into()),
            subreddit: Some(SYNTHETIC_SUBREDDIT.into()),
            github: Some("github.ndjson".into()),
            repo: Some(SYNTHETIC_REPO.into()),
        }],
        seed: Some(seed),
        ..Config::default()
    };
    let mut json = serde_json::to_string_pretty(&cfg)?;
    json.push('\n');
    write_file(&out.join("config.json"), json)?;
    println!(
        "{days} days, {} comments, {} events written to {}",
        data.comments.len(),
        data.events.len(),
        out.display()
    );
    Ok(ExitCode::SUCCESS)
}
