use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use chrono::NaiveDate;
use coinseer_core::harness::{generate_synthetic, CoinData};
use coinseer_core::ingest::{load_github_events, load_price_series, load_reddit_comments};
use serde::{Deserialize, Serialize};

/// One coin's archive locations. Relative paths resolve against the
/// config file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoinConfig {
    pub name: String,
    pub price_csv: PathBuf,
    #[serde(default)]
    pub reddit: Option<PathBuf>,
    #[serde(default)]
    pub subreddit: Option<String>,
    #[serde(default)]
    pub github: Option<PathBuf>,
    #[serde(default)]
    pub repo: Option<String>,
}

/// Signal sets for the ablation: a named preset or families whose
/// powerset is enumerated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SignalSpec {
    Named(String),
    Families(Vec<String>),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub coins: Vec<CoinConfig>,
    #[serde(default)]
    pub start: Option<NaiveDate>,
    #[serde(default)]
    pub end: Option<NaiveDate>,
    #[serde(default)]
    pub lexicon: Option<PathBuf>,
    #[serde(default)]
    pub vocab_size: Option<usize>,
    #[serde(default)]
    pub k: Option<Vec<usize>>,
    #[serde(default)]
    pub j: Option<Vec<usize>>,
    #[serde(default)]
    pub signals: Option<SignalSpec>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub sizes: Option<Vec<usize>>,
    #[serde(default)]
    pub max_epochs: Option<usize>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: Config =
            serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for c in &mut cfg.coins {
            c.price_csv = resolve(base, &c.price_csv);
            c.reddit = c.reddit.as_ref().map(|p| resolve(base, p));
            c.github = c.github.as_ref().map(|p| resolve(base, p));
        }
        cfg.lexicon = cfg.lexicon.as_ref().map(|p| resolve(base, p));
        if cfg.coins.is_empty() {
            bail!("config {} lists no coins", path.display());
        }
        Ok(cfg)
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn require(path: &Path) -> Result<()> {
    if !path.is_file() {
        bail!("archive not found: {}", path.display());
    }
    Ok(())
}

/// Loads every coin's price series and, when configured, its Reddit and
/// GitHub archives.
pub fn load_coins(cfg: &Config) -> Result<Vec<CoinData>> {
    let mut out = Vec::with_capacity(cfg.coins.len());
    for c in &cfg.coins {
        require(&c.price_csv)?;
        let price = load_price_series(&c.price_csv, &c.name)?;
        let comments = match &c.reddit {
            Some(path) => {
                require(path)?;
                let sub = c.subreddit.as_deref().unwrap_or(&c.name);
                let loaded = load_reddit_comments(path, sub).with_context(|| format!("reading {}", path.display()))?;
                log::info!(
                    "{}: {} comments from {} lines ({} skipped, {} other subreddits)",
                    c.name,
                    loaded.records.len(),
                    loaded.lines,
                    loaded.skipped,
                    loaded.dropped
                );
                loaded.records
            }
            None => Vec::new(),
        };
        let events = match &c.github {
            Some(path) => {
                require(path)?;
                let repo = c
                    .repo
                    .as_deref()
                    .with_context(|| format!("{}: github archive given without `repo`", c.name))?;
                let loaded = load_github_events(path, repo).with_context(|| format!("reading {}", path.display()))?;
                log::info!(
                    "{}: {} events from {} lines ({} skipped, {} dropped)",
                    c.name,
                    loaded.records.len(),
                    loaded.lines,
                    loaded.skipped,
                    loaded.dropped
                );
                loaded.records
            }
            None => Vec::new(),
        };
        out.push(CoinData {
            coin: c.name.clone(),
            price,
            comments,
            events,
        });
    }
    Ok(out)
}

/// Where a run's data came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    Config { path: PathBuf, coins: Vec<CoinConfig> },
    Synthetic { seed: u64, days: usize },
}

impl DataSource {
    pub fn load(&self, cfg: &Config) -> Result<Vec<CoinData>> {
        match self {
            DataSource::Config { .. } => load_coins(cfg),
            DataSource::Synthetic { seed, days } => Ok(vec![generate_synthetic(*seed, *days)?]),
        }
    }
}

/// Everything needed to replay a run, written as `manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    pub source: DataSource,
    pub master_seed: u64,
    pub output: PathBuf,
    pub settings: BTreeMap<String, serde_json::Value>,
}

impl RunManifest {
    pub fn new(command: &str, source: DataSource, master_seed: u64, output: &Path) -> Self {
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            source,
            master_seed,
            output: output.to_path_buf(),
            settings: BTreeMap::new(),
        }
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) -> Result<()> {
        self.settings.insert(key.to_string(), serde_json::to_value(value)?);
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_paths_resolve_against_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        fs::write(
            &path,
            r#"{"coins":[{"name":"btc","price_csv":"p.csv","reddit":"/abs/r.ndjson"}],"signals":"reported","k":[1]}"#,
        )
        .unwrap();
        let cfg = Config::load(&path).unwrap();
        assert_eq!(cfg.coins[0].price_csv, dir.path().join("p.csv"));
        assert_eq!(cfg.coins[0].reddit, Some(PathBuf::from("/abs/r.ndjson")));
        assert_eq!(cfg.signals, Some(SignalSpec::Named("reported".into())));
    }

    #[test]
    fn unknown_fields_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        fs::write(&path, r#"{"coins":[],"bogus":1}"#).unwrap();
        assert!(Config::load(&path).is_err());
    }
}
