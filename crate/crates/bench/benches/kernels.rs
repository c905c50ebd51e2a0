use coinseer_core::arima::fit;
use coinseer_core::lstm::init_network;
use coinseer_core::stats::distance_correlation;
use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

fn series(n: usize, phase: f64) -> Vec<f64> {
    (0..n).map(|i| (i as f64 * 0.37 + phase).sin() * 10.0 + i as f64 * 0.01).collect()
}

fn lstm(c: &mut Criterion) {
    let mut group = c.benchmark_group("lstm");
    for (features, sizes, k) in [(1, vec![32, 64], 7), (9, vec![64, 128], 14)] {
        let net = init_network(features, &sizes, 1).unwrap();
        let window = series(k * features, 0.0);
        let label = format!("f{features}_k{k}_{}x{}", sizes[0], sizes[1]);
        group.bench_function(BenchmarkId::new("forward", &label), |b| {
            b.iter(|| net.forward(black_box(&window)).unwrap())
        });
        let mut grads = vec![0.0; net.params().len()];
        group.bench_function(BenchmarkId::new("forward_backward", &label), |b| {
            b.iter(|| {
                let (pred, cache) = net.forward(black_box(&window)).unwrap();
                net.backward(&cache, pred, &mut grads).unwrap();
            })
        });
    }
    group.finish();
}

fn statistics(c: &mut Criterion) {
    let mut group = c.benchmark_group("stats");
    for n in [100, 500] {
        let (x, y) = (series(n, 0.0), series(n, 1.0));
        group.bench_function(BenchmarkId::new("distance_correlation", n), |b| {
            b.iter(|| distance_correlation(black_box(&x), black_box(&y)).unwrap())
        });
    }
    let y = series(800, 0.5);
    group.bench_function("arima_fit_p5", |b| b.iter(|| fit(black_box(&y), 5).unwrap()));
    group.finish();
}

criterion_group!(benches, lstm, statistics);
criterion_main!(benches);
