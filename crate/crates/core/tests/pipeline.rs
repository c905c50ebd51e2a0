use chrono::NaiveDate;
use coinseer_core::arima::{fit, forecast};
use coinseer_core::harness::{
    enumerate_grid, generate_synthetic, prepare_coin, run_experiment, DataBundle, GridTemplate, ModelKind,
    RunOptions, SignalOptions,
};
use coinseer_core::metrics::evaluate;
use coinseer_core::signals::github_popularity_signal;
use coinseer_core::stats::pearson;
use coinseer_core::{SignalFamily, TrainConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

#[test]
fn synthetic_watch_events_track_price() {
    let strong = (0..100)
        .filter(|&seed| {
            let data = generate_synthetic(seed, 600).unwrap();
            let cal = data.price.range().unwrap();
            let watch = github_popularity_signal(&data.events, cal).column(0);
            pearson(&watch, &data.price.high).unwrap().r > 0.3
        })
        .count();
    assert!(strong >= 95, "only {strong} of 100 seeds correlate");
}

#[test]
fn synthetic_bundle_starts_on_fixed_day() {
    let data = generate_synthetic(3, 60).unwrap();
    assert_eq!(data.price.dates[0], NaiveDate::from_ymd_opt(2015, 11, 1).unwrap());
    assert_eq!(data.price.len(), 60);
    assert!(generate_synthetic(3, 10).is_err());
}

#[test]
fn random_walk_rmspe_matches_step_size() {
    let sigma = 0.01;
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let noise = Normal::new(0.0, sigma).unwrap();
    let mut y = vec![1000.0];
    for _ in 0..3000 {
        let last = *y.last().unwrap();
        y.push(last * (1.0 + noise.sample(&mut rng)));
    }
    let split = 2000;
    let model = fit(&y[..split], 0).unwrap();
    let (mut pred, mut truth) = (Vec::new(), Vec::new());
    for t in split..y.len() - 1 {
        pred.push(forecast(&model, &y[..=t], 1).unwrap());
        truth.push(y[t + 1]);
    }
    let m = evaluate(&pred, &truth).unwrap();
    let expected = 100.0 * sigma;
    assert!((m.rmspe - expected).abs() < 0.1 * expected, "RMSPE {} vs {expected}", m.rmspe);
}

fn small_bundle() -> DataBundle {
    let data = generate_synthetic(5, 160).unwrap();
    let cal = data.price.range().unwrap();
    let options = SignalOptions {
        vocab_size: 30,
        ..SignalOptions::default()
    };
    let coin = prepare_coin(&data, cal, &[SignalFamily::RLang, SignalFamily::RVol], &options).unwrap();
    DataBundle::new(vec![coin], 3, 2).unwrap()
}

#[test]
fn experiments_are_reproducible() {
    let bundle = small_bundle();
    let template = GridTemplate {
        sizes: vec![5, 7],
        train: TrainConfig {
            max_epochs: 5,
            ..TrainConfig::default()
        },
        master_seed: 21,
    };
    let sets = vec![vec![], vec![SignalFamily::RLang, SignalFamily::RVol]];
    let grid = enumerate_grid(&["synthcoin".to_string()], &sets, &[3], &[2], &template).unwrap();
    assert_eq!(grid.len(), 3);
    for config in &grid {
        let a = run_experiment(config, &bundle, &RunOptions::default()).unwrap();
        let b = run_experiment(config, &bundle, &RunOptions::default()).unwrap();
        assert!(a.is_ok(), "{:?}", a.error);
        assert_eq!(a, b);
        assert_eq!(a.predictions.len(), a.metrics.as_ref().unwrap().n);
        assert_eq!(a.predictions[0].date, bundle.split.test.start + chrono::Duration::days(2));
        if config.model == ModelKind::Arima {
            assert!(a.summary.arima_p.is_some());
        }
    }
}

#[test]
fn unknown_coin_is_an_error() {
    let bundle = small_bundle();
    let grid = enumerate_grid(&["nope".to_string()], &[vec![]], &[1], &[1], &GridTemplate::default()).unwrap();
    assert!(run_experiment(&grid[0], &bundle, &RunOptions::default()).is_err());
}
