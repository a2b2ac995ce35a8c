//! Cross-checks the spectral autocorrelation against a long filtered-noise
//! realization generated in the time domain.

use quietzone::{signal_autocorrelation, synthesize_psd, Preset, SignalSpec, SpectralGrid};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

/// Gaussian white noise shaped by the Butterworth magnitude response on its
/// own DFT grid, returned in the time domain.
fn filtered_noise(spec: &SignalSpec, fs: f64, len: usize, seed: u64) -> Vec<f64> {
    let SignalSpec::FilteredNoise { stages } = spec else {
        panic!("expected filtered noise");
    };
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut buf: Vec<Complex64> = (0..len)
        .map(|_| Complex64::new(StandardNormal.sample(&mut rng), 0.0))
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(len).process(&mut buf);
    for (k, z) in buf.iter_mut().enumerate() {
        let f = k.min(len - k) as f64 * fs / len as f64;
        let power: f64 = stages.iter().map(|s| quietzone::butterworth_gain(s, f)).product();
        *z *= power.sqrt();
    }
    planner.plan_fft_inverse(len).process(&mut buf);
    buf.into_iter().map(|z| z.re / len as f64).collect()
}

fn biased_autocorrelation(x: &[f64], lag: usize) -> f64 {
    let r0: f64 = x.iter().map(|v| v * v).sum();
    let rk: f64 = x.iter().zip(&x[lag..]).map(|(a, b)| a * b).sum();
    rk / r0
}

#[test]
fn lpf300_autocorrelation_matches_long_realization() {
    let fs = 2000.0;
    let spec = Preset::Lpf300.spec();
    let x = filtered_noise(&spec, fs, 1 << 20, 2024);
    // 1 ms at 2 kHz
    let estimate = biased_autocorrelation(&x, 2);
    let psd = synthesize_psd(&spec, &SpectralGrid::default()).unwrap();
    let analytic = signal_autocorrelation(&psd, 1e-3);
    assert!(
        (estimate - analytic).abs() < 0.02,
        "time domain {estimate} vs spectral {analytic}"
    );
}

#[test]
fn bpf_autocorrelation_matches_long_realization_at_several_lags() {
    let fs = 2000.0;
    let spec = Preset::Bpf.spec();
    let x = filtered_noise(&spec, fs, 1 << 20, 7);
    let psd = synthesize_psd(&spec, &SpectralGrid::default()).unwrap();
    for lag in [1usize, 2, 3, 5, 8] {
        let estimate = biased_autocorrelation(&x, lag);
        let analytic = signal_autocorrelation(&psd, lag as f64 / fs);
        assert!((estimate - analytic).abs() < 0.02, "lag {lag}: {estimate} vs {analytic}");
    }
}
