//! Direction-sampling estimate of diffuse-field correlation.
//!
//! A diffuse field is a superposition of plane waves arriving uniformly from
//! all directions with random phases. For one plane wave travelling along
//! `k̂`, the pressure at `r1` is the pressure at `r0` delayed by
//! `k̂·Δ𝐫/c`, so its space-time correlation is the signal autocorrelation at
//! lag `Δt - k̂·Δ𝐫/c`. Averaging that over sampled directions estimates the
//! field correlation without using the sinc kernel at all.
//!
//! The autocorrelation comes from the spectrum (Wiener–Khinchin). Per-query
//! it is tabulated on a lag grid and evaluated by cubic Hermite
//! interpolation with exact node derivatives; the node spacing is chosen so
//! the interpolation error stays below [`TABLE_ERROR_BOUND`].
//!
//! Directions come from ChaCha20 (`rand_chacha::ChaCha20Rng`) seeded with
//! `seed_from_u64`; each direction consumes two `f64` draws, the cosine of
//! the polar angle (uniform on `[-1, 1)`) then the azimuth (uniform on
//! `[0, 2π)`).

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::correlation::validate_speed;
use crate::numeric::CompensatedSum;
use crate::spectral::PowerSpectrum;
use crate::{Error, Result};

/// Upper bound on the Hermite interpolation error of [`AutocorrelationTable`].
pub const TABLE_ERROR_BOUND: f64 = 1e-12;

const MAX_TABLE_NODES: usize = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleConfig {
    n_directions: u64,
    seed: u64,
}

impl OracleConfig {
    pub fn new(n_directions: u64, seed: u64) -> Result<Self> {
        if n_directions == 0 {
            return Err(Error::InvalidArgument(
                "oracle needs at least one direction".into(),
            ));
        }
        Ok(Self { n_directions, seed })
    }

    pub fn n_directions(&self) -> u64 {
        self.n_directions
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Normalised autocorrelation `R(τ)/R(0) = Σ S(m) cos(ω_m τ) / Σ S(m)`.
pub fn signal_autocorrelation(spectrum: &PowerSpectrum, lag: f64) -> f64 {
    let mut num = CompensatedSum::new();
    let mut den = CompensatedSum::new();
    for line in spectrum.lines() {
        num.add(line.weight * (line.omega * lag).cos());
        den.add(line.weight);
    }
    num.total() / den.total()
}

fn autocorrelation_slope(spectrum: &PowerSpectrum, lag: f64) -> f64 {
    let mut num = CompensatedSum::new();
    let mut den = CompensatedSum::new();
    for line in spectrum.lines() {
        num.add(-line.weight * line.omega * (line.omega * lag).sin());
        den.add(line.weight);
    }
    num.total() / den.total()
}

/// Normalised autocorrelation tabulated on `[0, max_lag]`.
#[derive(Debug, Clone)]
pub struct AutocorrelationTable {
    step: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl AutocorrelationTable {
    pub fn new(spectrum: &PowerSpectrum, max_lag: f64) -> Result<Self> {
        if !(max_lag.is_finite() && max_lag >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "maximum lag must be finite and non-negative, got {max_lag}"
            )));
        }
        // |R''''| ≤ Σ S ω⁴ / Σ S; cubic Hermite error ≤ h⁴ |R''''| / 384
        let fourth_moment = spectrum
            .lines()
            .iter()
            .map(|l| l.weight * l.omega.powi(4))
            .sum::<f64>()
            / spectrum.total_power();
        let ideal = if fourth_moment > 0.0 {
            (384.0 * TABLE_ERROR_BOUND / fourth_moment).powf(0.25)
        } else {
            f64::INFINITY
        };
        let segments = if max_lag == 0.0 {
            1
        } else {
            ((max_lag / ideal).ceil() as usize).max(1)
        };
        if segments >= MAX_TABLE_NODES {
            return Err(Error::InvalidArgument(format!(
                "lag range {max_lag} s needs {segments} table segments"
            )));
        }
        let step = if max_lag == 0.0 { 1.0 } else { max_lag / segments as f64 };
        let lags = (0..=segments).map(|i| i as f64 * step);
        let values = lags.clone().map(|t| signal_autocorrelation(spectrum, t)).collect();
        let slopes = lags.map(|t| autocorrelation_slope(spectrum, t)).collect();
        Ok(Self {
            step,
            values,
            slopes,
        })
    }

    pub fn max_lag(&self) -> f64 {
        (self.values.len() - 1) as f64 * self.step
    }

    /// Interpolated `R(τ)/R(0)`; `τ` is folded to `|τ|` and must not exceed
    /// [`max_lag`](Self::max_lag) by more than rounding.
    pub fn eval(&self, lag: f64) -> f64 {
        let t = lag.abs() / self.step;
        let last = self.values.len() - 1;
        let i = (t.floor() as usize).min(last.saturating_sub(1));
        let s = t - i as f64;
        debug_assert!(s <= 1.0 + 1e-9, "lag {lag} outside table");
        let (f0, f1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.slopes[i] * self.step, self.slopes[i + 1] * self.step);
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * f0 + h10 * m0 + h01 * f1 + h11 * m1
    }
}

fn check_inputs(delta_r: f64, delta_t: f64, c: f64) -> Result<()> {
    if !(delta_r.is_finite() && delta_r >= 0.0 && delta_t.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "invalid oracle query Δr = {delta_r}, Δt = {delta_t}"
        )));
    }
    validate_speed(c)
}

/// Lag range an oracle query at `(delta_r, delta_t)` can touch.
pub fn required_max_lag(delta_r: f64, delta_t: f64, c: f64) -> f64 {
    delta_t.abs() + delta_r / c
}

/// Averages `autocorrelation(Δt - k̂·Δ𝐫/c)` over sampled directions, with
/// `Δ𝐫` along the z axis.
fn average_over_directions(
    delta_r: f64,
    delta_t: f64,
    c: f64,
    config: &OracleConfig,
    autocorrelation: impl Fn(f64) -> f64,
) -> f64 {
    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    let separation = [0.0, 0.0, delta_r];
    let mut acc = CompensatedSum::new();
    for _ in 0..config.n_directions {
        let cos_theta: f64 = rng.gen::<f64>() * 2.0 - 1.0;
        let azimuth: f64 = rng.gen::<f64>() * 2.0 * PI;
        let sin_theta = (1.0 - cos_theta * cos_theta).max(0.0).sqrt();
        let k_hat = [
            sin_theta * azimuth.cos(),
            sin_theta * azimuth.sin(),
            cos_theta,
        ];
        let projection: f64 = k_hat.iter().zip(&separation).map(|(k, r)| k * r).sum();
        acc.add(autocorrelation(delta_t - projection / c));
    }
    acc.total() / config.n_directions as f64
}

/// Monte Carlo estimate of `ρ(Δ𝐫, Δt)` using a shared lag table.
///
/// `table` must cover [`required_max_lag`].
pub fn oracle_correlation_with_table(
    table: &AutocorrelationTable,
    delta_r: f64,
    delta_t: f64,
    c: f64,
    config: &OracleConfig,
) -> Result<f64> {
    check_inputs(delta_r, delta_t, c)?;
    let needed = required_max_lag(delta_r, delta_t, c);
    if needed > table.max_lag() * (1.0 + 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "lag table covers {} s but the query needs {needed} s",
            table.max_lag()
        )));
    }
    Ok(average_over_directions(delta_r, delta_t, c, config, |t| {
        table.eval(t)
    }))
}

/// Monte Carlo estimate of `ρ(Δ𝐫, Δt)` from `config.n_directions` plane-wave
/// directions.
pub fn oracle_correlation(
    spectrum: &PowerSpectrum,
    delta_r: f64,
    delta_t: f64,
    c: f64,
    config: &OracleConfig,
) -> Result<f64> {
    check_inputs(delta_r, delta_t, c)?;
    let table = AutocorrelationTable::new(spectrum, required_max_lag(delta_r, delta_t, c))?;
    oracle_correlation_with_table(&table, delta_r, delta_t, c, config)
}

/// As [`oracle_correlation`], but evaluating the autocorrelation sum exactly
/// for every direction. `O(n·M)`; meant for small `n`.
pub fn oracle_correlation_exact(
    spectrum: &PowerSpectrum,
    delta_r: f64,
    delta_t: f64,
    c: f64,
    config: &OracleConfig,
) -> Result<f64> {
    check_inputs(delta_r, delta_t, c)?;
    Ok(average_over_directions(delta_r, delta_t, c, config, |t| {
        signal_autocorrelation(spectrum, t)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{synthesize_psd, Preset, SpectralGrid};
    use approx::assert_abs_diff_eq;

    const C: f64 = 343.0;

    fn psd(preset: Preset) -> PowerSpectrum {
        synthesize_psd(&preset.spec(), &SpectralGrid::default()).unwrap()
    }

    #[test]
    fn autocorrelation_reference_values() {
        for preset in Preset::ALL {
            assert_eq!(signal_autocorrelation(&psd(preset), 0.0), 1.0);
        }
        let f = SpectralGrid::default().frequency(614);
        assert_abs_diff_eq!(
            signal_autocorrelation(&psd(Preset::Tone300), 1.0 / (2.0 * f)),
            -1.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn zero_config_is_rejected() {
        assert!(OracleConfig::new(0, 1).is_err());
    }

    #[test]
    fn table_interpolation_stays_within_bound() {
        for preset in Preset::ALL {
            let s = psd(preset);
            let table = AutocorrelationTable::new(&s, 0.5 / C).unwrap();
            for i in 0..=997 {
                let lag = table.max_lag() * i as f64 / 997.0;
                let exact = signal_autocorrelation(&s, lag);
                assert!((table.eval(lag) - exact).abs() < 1e-10, "{preset} lag {lag}");
                assert_eq!(table.eval(-lag), table.eval(lag));
            }
        }
    }

    #[test]
    fn zero_separation_gives_exactly_one() {
        for seed in [0, 1, 42, u64::MAX] {
            let cfg = OracleConfig::new(1000, seed).unwrap();
            assert_eq!(oracle_correlation(&psd(Preset::Bpf), 0.0, 0.0, C, &cfg).unwrap(), 1.0);
        }
    }

    #[test]
    fn tone_half_wavelength_is_decorrelated() {
        let f = SpectralGrid::default().frequency(614);
        let n = 100_000;
        let cfg = OracleConfig::new(n, 7).unwrap();
        let rho = oracle_correlation(&psd(Preset::Tone300), C / f / 2.0, 0.0, C, &cfg).unwrap();
        assert!(rho.abs() < 3.0 / (n as f64).sqrt(), "{rho}");
    }

    #[test]
    fn seeds_are_deterministic() {
        let s = psd(Preset::Lpf600);
        let cfg = OracleConfig::new(20_000, 99).unwrap();
        let a = oracle_correlation(&s, 0.2, 1e-4, C, &cfg).unwrap();
        let b = oracle_correlation(&s, 0.2, 1e-4, C, &cfg).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        let other = OracleConfig::new(20_000, 100).unwrap();
        assert_ne!(a, oracle_correlation(&s, 0.2, 1e-4, C, &other).unwrap());
    }

    #[test]
    fn tabulated_and_exact_paths_agree() {
        let s = psd(Preset::Bpf);
        let cfg = OracleConfig::new(2_000, 3).unwrap();
        for (dr, dt) in [(0.1, 0.0), (0.3, 2e-4)] {
            let a = oracle_correlation(&s, dr, dt, C, &cfg).unwrap();
            let b = oracle_correlation_exact(&s, dr, dt, C, &cfg).unwrap();
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
    }

    #[test]
    fn short_table_is_rejected() {
        let s = psd(Preset::Bpf);
        let table = AutocorrelationTable::new(&s, 0.1 / C).unwrap();
        let cfg = OracleConfig::new(10, 0).unwrap();
        assert!(oracle_correlation_with_table(&table, 0.2, 0.0, C, &cfg).is_err());
    }
}
