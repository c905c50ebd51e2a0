mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{ArgAction, ArgGroup, Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "coinseer", version, about = "Forecast cryptocurrency price highs from social signals")]
struct Cli {
    /// Repeat for more log output (-v info, -vv debug).
    #[arg(short, long, action = ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

/// Where the price and social data come from.
#[derive(Args, Clone)]
#[command(group(ArgGroup::new("source").required(true).args(["config", "synthetic"])))]
pub struct DataArgs {
    /// JSON run configuration listing coins and archive paths.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Use the bundled synthetic generator instead of archives.
    #[arg(long)]
    pub synthetic: bool,
    /// Days of synthetic data.
    #[arg(long, default_value_t = 600)]
    pub days: usize,
    /// Master seed; defaults to the config's seed, then $COINSEER_SEED, then 0.
    #[arg(long)]
    pub seed: Option<u64>,
    /// First day of the analysis calendar.
    #[arg(long)]
    pub start: Option<NaiveDate>,
    /// Last day of the analysis calendar.
    #[arg(long)]
    pub end: Option<NaiveDate>,
    /// Sentiment lexicon TSV (token, polarity, subjectivity).
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    /// Number of tokens kept for R_Lang.
    #[arg(long)]
    pub vocab_size: Option<usize>,
}

/// LSTM and ARIMA settings.
#[derive(Args, Clone, Default)]
pub struct ModelArgs {
    /// LSTM layer sizes, e.g. `400,800`.
    #[arg(long, value_parser = parse_sizes)]
    pub sizes: Option<Counts>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub patience: Option<usize>,
    /// Clip the global gradient norm to this value.
    #[arg(long)]
    pub clip_norm: Option<f64>,
    /// Fit min-max bounds on the training span only.
    #[arg(long)]
    pub train_only_norm: bool,
    /// Refit ARIMA at every test anchor.
    #[arg(long)]
    pub arima_refit: bool,
    /// Largest ARIMA lag order considered.
    #[arg(long)]
    pub max_p: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Validate archives and write cleaned, calendar-aligned copies.
    Ingest {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write one signal CSV per coin and family.
    Signals {
        #[command(flatten)]
        data: DataArgs,
        /// Comma-separated families (default: all six).
        #[arg(long)]
        signals: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Correlate every signal column with price high, per coin.
    Correlate {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        signals: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train one LSTM configuration and save it.
    Train {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        model: ModelArgs,
        /// Coin to train on (default: the first).
        #[arg(long)]
        coin: Option<String>,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        k: u64,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        j: u64,
        /// Social families added to price, comma-separated.
        #[arg(long, default_value = "")]
        signals: String,
        /// Model file to write.
        #[arg(long)]
        out: PathBuf,
    },
    /// Predict the price high j days after the latest data.
    Forecast {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        coin: Option<String>,
        /// CSV output (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the ablation grid and write the report.
    Ablate {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        model: ModelArgs,
        /// Training windows, e.g. `1`, `1..14`, `1,7,14`.
        #[arg(long, value_parser = parse_range)]
        k: Option<Counts>,
        /// Forecasting windows.
        #[arg(long, value_parser = parse_range)]
        j: Option<Counts>,
        /// `reported` (default), `all`, or comma-separated families whose
        /// powerset is run.
        #[arg(long)]
        signals: Option<String>,
        /// Worker threads.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        jobs: u64,
        /// Exit 1 when any experiment fails, not only when all do.
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-render a report from a saved results.json.
    Report {
        #[arg(long)]
        results: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the synthetic dataset as archives plus a config.
    Synth {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 600)]
        days: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

/// A parsed list of positive counts.
#[derive(Debug, Clone, PartialEq)]
pub struct Counts(pub Vec<usize>);

/// `3`, `1..3` (inclusive) or `1,2,5`; every value at least 1.
fn parse_range(s: &str) -> Result<Counts, String> {
    let s = s.trim();
    let values: Vec<usize> = if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| format!("bad range start in `{s}`"))?;
        let b: usize = b.trim_start_matches('=').trim().parse().map_err(|_| format!("bad range end in `{s}`"))?;
        if a > b {
            return Err(format!("empty range `{s}`"));
        }
        (a..=b).collect()
    } else {
        s.split(',')
            .map(|v| v.trim().parse().map_err(|_| format!("`{v}` is not a count")))
            .collect::<Result<_, _>>()?
    };
    if values.contains(&0) {
        return Err("windows must be at least 1".into());
    }
    let mut values = values;
    values.sort_unstable();
    values.dedup();
    Ok(Counts(values))
}

fn parse_sizes(s: &str) -> Result<Counts, String> {
    let sizes: Vec<usize> = s
        .split(',')
        .map(|v| v.trim().parse().map_err(|_| format!("`{v}` is not a layer size")))
        .collect::<Result<_, _>>()?;
    if sizes.is_empty() || sizes.contains(&0) {
        return Err("layer sizes must be positive".into());
    }
    Ok(Counts(sizes))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    let outcome = match cli.command {
        Command::Ingest { data, out } => commands::ingest(&data, &out),
        Command::Signals { data, signals, out } => commands::signals(&data, signals.as_deref(), &out),
        Command::Correlate { data, signals, out } => commands::correlate(&data, signals.as_deref(), &out),
        Command::Train {
            data,
            model,
            coin,
            k,
            j,
            signals,
            out,
        } => commands::train(&data, &model, coin.as_deref(), k as usize, j as usize, &signals, &out),
        Command::Forecast { data, model, coin, out } => {
            commands::forecast(&data, &model, coin.as_deref(), out.as_deref())
        }
        Command::Ablate {
            data,
            model,
            k,
            j,
            signals,
            jobs,
            strict,
            out,
        } => commands::ablate(&commands::AblateArgs {
            data,
            model,
            k: k.map(|c| c.0),
            j: j.map(|c| c.0),
            signals,
            jobs: jobs as usize,
            strict,
            out,
        }),
        Command::Report { results, out } => commands::report(&results, &out),
        Command::Synth { seed, days, out } => commands::synth(seed, days, &out),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("1..3").unwrap().0, vec![1, 2, 3]);
        assert_eq!(parse_range("1..=2").unwrap().0, vec![1, 2]);
        assert_eq!(parse_range("7,1,7").unwrap().0, vec![1, 7]);
        assert_eq!(parse_range("14").unwrap().0, vec![14]);
        assert!(parse_range("0").is_err());
        assert!(parse_range("3..1").is_err());
        assert!(parse_range("a").is_err());
    }

    #[test]
    fn cli_shape() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
