//! Analyses checked against independent brute-force computations.

use oda_core::analysis::{rate_from_counters, window_average, CounterPoint};
use oda_core::telemetry::{PowerTrace, RailName};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Naive per-window mean: for every window, scan the whole trace.
fn naive_window_means(samples: &[(f64, f64)], t0: f64, window: f64, n_windows: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for k in 0..n_windows {
        let lo = t0 + k as f64 * window;
        let hi = lo + window;
        let inside: Vec<f64> = samples.iter().filter(|(t, _)| *t >= lo && *t < hi).map(|(_, v)| *v).collect();
        if !inside.is_empty() {
            out.push((lo + window / 2.0, inside.iter().sum::<f64>() / inside.len() as f64));
        }
    }
    out
}

#[test]
fn one_khz_noise_trace_with_one_ms_windows() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    // First sample opens the first window; later ones sit 0.1-0.6 ms into their slot.
    let samples: Vec<(f64, f64)> = (0..3000)
        .map(|i| {
            let jitter = if i == 0 { 0.0 } else { rng.random_range(1e-4..6e-4) };
            (i as f64 * 1e-3 + 2e-4 + jitter, 3075.0 + rng.random_range(-60.0..60.0))
        })
        .collect();
    let trace = PowerTrace::from_pairs(RailName::Core, samples.iter().copied()).unwrap();
    let out = window_average(&trace, 1e-3).unwrap();
    assert_eq!(out.len(), samples.len());

    let expected = naive_window_means(&samples, samples[0].0, 1e-3, 3000);
    assert_eq!(expected.len(), out.len());
    for (got, (t, v)) in out.points().iter().zip(&expected) {
        assert!((got.t - t).abs() < 1e-9);
        assert!((got.v - v).abs() < 1e-9);
    }
}

#[test]
fn irregular_trace_matches_naive_windows() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut t = 0.0;
    let mut samples = Vec::new();
    for _ in 0..2000 {
        t += rng.random_range(1e-4..3e-3);
        samples.push((t, rng.random_range(0.0..5000.0)));
    }
    let trace = PowerTrace::from_pairs(RailName::DdrMem, samples.iter().copied()).unwrap();
    let window = 0.0173;
    let out = window_average(&trace, window).unwrap();
    let n_windows = ((t - samples[0].0) / window) as usize + 2;
    let expected = naive_window_means(&samples, samples[0].0, window, n_windows);
    assert_eq!(out.len(), expected.len());
    for (got, (et, ev)) in out.points().iter().zip(&expected) {
        assert!((got.t - et).abs() < 1e-9);
        assert!((got.v - ev).abs() < 1e-6);
    }
}

#[test]
fn two_hz_sampling_recovers_thousand_per_second() {
    // Synthetic counter: incremented 1000 times per second, read at 2 Hz with jitter.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut pts = Vec::new();
    for k in 0..240 {
        let t = k as f64 * 0.5 + rng.random_range(0.0..0.01);
        pts.push(CounterPoint::new(t, (t * 1000.0).floor() as u64));
    }
    let rates = rate_from_counters(&pts);
    assert_eq!(rates.len(), pts.len() - 1);
    for (r, w) in rates.iter().zip(pts.windows(2)) {
        // One count of truncation at each end of the interval.
        let quantization = 1.0 / (w[1].t - w[0].t);
        assert!((r.v - 1000.0).abs() <= quantization + 1e-9, "{r:?}");
    }
}
