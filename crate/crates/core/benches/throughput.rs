use std::hint::black_box;
use std::path::PathBuf;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use ioi_core::config::FusionConfig;
use ioi_core::doa::MusicEstimator;
use ioi_core::eval::run_suite_dir;
use ioi_core::par::Execution;
use ioi_core::sim::{run_scenario, AudioSynth, Scenario};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn scenarios() -> PathBuf {
    [env!("CARGO_MANIFEST_DIR"), "scenarios"].iter().collect()
}

fn pseudospectrum(c: &mut Criterion) {
    let cfg = FusionConfig::default();
    let est = MusicEstimator::new(&cfg.array, &cfg.doa).unwrap();
    let synth = AudioSynth {
        array: cfg.array.clone(),
        sample_rate: cfg.doa.sample_rate,
        snr_db: 20.0,
        seed: 1,
    };
    let audio = synth.point_source(40.0, 0.0, 1600);
    let cov = est.covariance(&audio).unwrap();
    let mut g = c.benchmark_group("pseudospectrum");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| est.pseudospectrum(black_box(&cov), exec).unwrap())
        });
    }
    g.finish();
}

fn scenario(c: &mut Criterion) {
    let sc = Scenario::load(scenarios().join("suite").join("s1a_speak_facing.scn")).unwrap();
    let cfg = FusionConfig::default();
    let mut g = c.benchmark_group("run_scenario");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| run_scenario(black_box(&sc), &cfg, exec).unwrap())
        });
    }
    g.finish();
}

fn suite(c: &mut Criterion) {
    let dir = scenarios().join("suite");
    let cfg = FusionConfig::default();
    let mut g = c.benchmark_group("suite");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| run_suite_dir(&dir, &cfg, 1.0, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, pseudospectrum, scenario, suite);
criterion_main!(benches);
