use ioi_core::config::{DoaConfig, FusionConfig, MicArrayGeometry};
use ioi_core::doa::MusicEstimator;
use ioi_core::model::{wrap_degrees, Timestamp};
use ioi_core::par::Execution;
use ioi_core::sim::AudioSynth;

const FRAME: usize = 1600;

fn synth(array: &MicArrayGeometry, snr_db: f64, seed: u64) -> AudioSynth {
    AudioSynth {
        array: array.clone(),
        sample_rate: 16_000,
        snr_db,
        seed,
    }
}

fn estimator(array: &MicArrayGeometry, n_sources: usize) -> MusicEstimator {
    let doa = DoaConfig {
        n_sources,
        ..DoaConfig::default()
    };
    MusicEstimator::new(array, &doa).unwrap()
}

fn err(a: f64, b: f64) -> f64 {
    wrap_degrees(a - b).abs()
}

#[test]
fn single_source_within_one_grid_step() {
    let array = MicArrayGeometry::default();
    let est = estimator(&array, 1);
    let audio = synth(&array, 20.0, 1).point_source(40.0, 0.0, FRAME);
    let (_, found) = est
        .localize(&audio, Timestamp::ZERO, Execution::default())
        .unwrap();
    assert_eq!(found.len(), 1);
    assert!(
        err(found[0].direction.azimuth(), 40.0) <= 1.0,
        "{:?}",
        found
    );
}

#[test]
fn two_sources_are_resolved() {
    let array = MicArrayGeometry::default();
    let est = estimator(&array, 2);
    let audio = synth(&array, 20.0, 2).sources(&[(-60.0, 1.0), (60.0, 1.0)], 0.0, 8000);
    let (_, found) = est
        .localize(&audio, Timestamp::ZERO, Execution::default())
        .unwrap();
    assert_eq!(found.len(), 2);
    let mut az: Vec<f64> = found.iter().map(|s| s.direction.azimuth()).collect();
    az.sort_by(f64::total_cmp);
    assert!(
        err(az[0], -60.0) <= 3.0 && err(az[1], 60.0) <= 3.0,
        "{az:?}"
    );
}

#[test]
fn sensor_noise_alone_has_no_dominant_peak() {
    let array = MicArrayGeometry::default();
    let est = estimator(&array, 1);
    let quiet = (0..100)
        .filter(|&seed| {
            let audio = synth(&array, 20.0, seed).sources(&[], 0.0, FRAME);
            let (spec, found) = est
                .localize(&audio, Timestamp::ZERO, Execution::default())
                .unwrap();
            found.is_empty() && spec.max() / spec.median() < 10.0
        })
        .count();
    assert!(quiet >= 95, "{quiet}/100");
}

#[test]
fn rotating_array_and_source_shifts_the_spectrum() {
    let array = MicArrayGeometry::default();
    let rotated = array.rotated(30.0);
    let a = estimator(&array, 1);
    let b = estimator(&rotated, 1);
    let audio_a = synth(&array, f64::INFINITY, 3).point_source(-75.0, 0.0, FRAME);
    let audio_b = synth(&rotated, f64::INFINITY, 3).point_source(-45.0, 0.0, FRAME);
    let sa = a
        .pseudospectrum(&a.covariance(&audio_a).unwrap(), Execution::default())
        .unwrap();
    let sb = b
        .pseudospectrum(&b.covariance(&audio_b).unwrap(), Execution::default())
        .unwrap();
    let n = sa.values.len();
    assert!(err(sb.argmax(), sa.argmax() + 30.0) < 1e-9);
    // values agree up to floating-point noise in the phase terms
    for i in 0..n {
        let j = (i + 30) % n;
        let (x, y) = (sa.values[i], sb.values[j]);
        assert!((x - y).abs() <= 1e-6 * x.max(y), "{i}: {x} vs {y}");
    }
}

#[test]
fn broadband_error_never_exceeds_worst_bin() {
    let array = MicArrayGeometry::default();
    let est = estimator(&array, 1);
    for (seed, az) in [(4, -170.3), (5, -33.3), (6, 12.7), (7, 99.9), (8, 150.5)] {
        let audio = synth(&array, 10.0, seed).point_source(az, 0.0, FRAME);
        let cov = est.covariance(&audio).unwrap();
        let grid = est.grid();
        let worst = est
            .bin_spectra(&cov, Execution::Sequential)
            .unwrap()
            .iter()
            .map(|v| {
                let i = (0..v.len()).fold(0, |b, i| if v[i] > v[b] { i } else { b });
                err(grid[i], az)
            })
            .fold(0.0, f64::max);
        let broadband = est.pseudospectrum(&cov, Execution::Sequential).unwrap();
        assert!(err(broadband.argmax(), az) <= worst, "az {az}");
    }
}

#[test]
fn execution_modes_are_bitwise_identical() {
    let cfg = FusionConfig::default();
    let est = estimator(&cfg.array, 2);
    let audio = synth(&cfg.array, 20.0, 9).sources(&[(10.0, 1.0), (-120.0, 0.7)], 0.0, FRAME);
    let cov = est.covariance(&audio).unwrap();
    let a = est.pseudospectrum(&cov, Execution::Sequential).unwrap();
    let b = est.pseudospectrum(&cov, Execution::Parallel).unwrap();
    assert_eq!(a.values.len(), b.values.len());
    assert!(a
        .values
        .iter()
        .zip(&b.values)
        .all(|(x, y)| x.to_bits() == y.to_bits()));
}
