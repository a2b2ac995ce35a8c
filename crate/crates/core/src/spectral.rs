//! Excitation signals and their discrete power spectral densities.
//!
//! Broadband signals are white noise shaped by cascaded Butterworth stages.
//! Their spectra use the analytic magnitude-squared response, i.e. the
//! expected periodogram of the filtered noise, so every output is
//! deterministic. White-noise input has unit power per bin.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::numeric::CompensatedSum;
use crate::{Error, Result};

/// Default sampling rate in Hz.
pub const DEFAULT_FS_HZ: f64 = 2000.0;
/// Default DFT length.
pub const DEFAULT_M_POINTS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FilterKind {
    LowPass,
    HighPass,
}

impl FilterKind {
    fn tag(self) -> &'static str {
        match self {
            FilterKind::LowPass => "lp",
            FilterKind::HighPass => "hp",
        }
    }
}

/// One Butterworth stage of a noise-shaping cascade.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterStage {
    kind: FilterKind,
    order: u32,
    cutoff_hz: f64,
}

impl FilterStage {
    pub fn new(kind: FilterKind, order: u32, cutoff_hz: f64) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidFilter("order must be at least 1".into()));
        }
        if !(cutoff_hz.is_finite() && cutoff_hz > 0.0) {
            return Err(Error::InvalidFilter(format!(
                "cutoff must be positive and finite, got {cutoff_hz}"
            )));
        }
        Ok(Self {
            kind,
            order,
            cutoff_hz,
        })
    }

    pub fn low_pass(order: u32, cutoff_hz: f64) -> Result<Self> {
        Self::new(FilterKind::LowPass, order, cutoff_hz)
    }

    pub fn high_pass(order: u32, cutoff_hz: f64) -> Result<Self> {
        Self::new(FilterKind::HighPass, order, cutoff_hz)
    }

    pub fn kind(&self) -> FilterKind {
        self.kind
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn cutoff_hz(&self) -> f64 {
        self.cutoff_hz
    }
}

impl fmt::Display for FilterStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.kind.tag(), self.order, self.cutoff_hz)
    }
}

/// Magnitude-squared Butterworth response of `stage` at frequency `f` (Hz).
///
/// Low-pass: `1 / (1 + (f/fc)^(2n))`. High-pass: `(f/fc)^(2n) / (1 + (f/fc)^(2n))`.
/// Negative frequencies are folded onto `|f|`.
pub fn butterworth_gain(stage: &FilterStage, f: f64) -> f64 {
    let ratio = (f.abs() / stage.cutoff_hz).powi(2 * stage.order as i32);
    match stage.kind {
        FilterKind::LowPass => 1.0 / (1.0 + ratio),
        // ratio/(1+ratio) loses the limit once ratio overflows to inf
        FilterKind::HighPass if ratio.is_infinite() => 1.0,
        FilterKind::HighPass => ratio / (1.0 + ratio),
    }
}

/// Declarative description of the signal exciting the diffuse field.
#[derive(Debug, Clone, PartialEq)]
pub enum SignalSpec {
    PureTone { freq_hz: f64 },
    FilteredNoise { stages: Vec<FilterStage> },
}

impl SignalSpec {
    /// Checks the signal against the Nyquist limit of `grid`.
    pub fn validate(&self, grid: &SpectralGrid) -> Result<()> {
        let nyquist = grid.nyquist_hz();
        match self {
            SignalSpec::PureTone { freq_hz } => {
                if !(freq_hz.is_finite() && *freq_hz > 0.0 && *freq_hz < nyquist) {
                    return Err(Error::InvalidSignal(format!(
                        "tone frequency {freq_hz} Hz must lie in (0, {nyquist})"
                    )));
                }
            }
            SignalSpec::FilteredNoise { stages } => {
                if stages.is_empty() {
                    return Err(Error::InvalidSignal(
                        "filtered noise needs at least one filter stage".into(),
                    ));
                }
                if let Some(stage) = stages.iter().find(|s| s.cutoff_hz >= nyquist) {
                    return Err(Error::InvalidSignal(format!(
                        "cutoff {} Hz is not below Nyquist {nyquist} Hz",
                        stage.cutoff_hz
                    )));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for SignalSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SignalSpec::PureTone { freq_hz } => write!(f, "tone:{freq_hz}"),
            SignalSpec::FilteredNoise { stages } => {
                for (i, stage) in stages.iter().enumerate() {
                    if i > 0 {
                        f.write_str("+")?;
                    }
                    write!(f, "{stage}")?;
                }
                Ok(())
            }
        }
    }
}

/// Parses either a preset name (`tone300`, `lpf300`, `lpf600`, `bpf`) or an
/// inline description: `tone:<hz>` or `+`-joined stages `lp:<order>:<hz>` /
/// `hp:<order>:<hz>`, e.g. `lp:8:400+hp:2:600`.
impl FromStr for SignalSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Ok(preset) = s.parse::<Preset>() {
            return Ok(preset.spec());
        }
        let bad = || Error::InvalidSignal(format!("cannot parse signal '{s}'"));
        if let Some(freq) = s.strip_prefix("tone:") {
            let freq_hz = freq.trim().parse::<f64>().map_err(|_| bad())?;
            return Ok(SignalSpec::PureTone { freq_hz });
        }
        let stages = s
            .split('+')
            .map(|part| {
                let fields: Vec<&str> = part.trim().split(':').collect();
                let [kind, order, cutoff] = fields[..] else {
                    return Err(bad());
                };
                let kind = match kind {
                    "lp" => FilterKind::LowPass,
                    "hp" => FilterKind::HighPass,
                    _ => return Err(bad()),
                };
                let order = order.parse::<u32>().map_err(|_| bad())?;
                let cutoff = cutoff.parse::<f64>().map_err(|_| bad())?;
                FilterStage::new(kind, order, cutoff)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SignalSpec::FilteredNoise { stages })
    }
}

/// The four reference excitations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    /// 300 Hz pure tone.
    Tone300,
    /// White noise through a 32nd-order low-pass at 300 Hz.
    Lpf300,
    /// White noise through a 32nd-order low-pass at 600 Hz.
    Lpf600,
    /// 8th-order low-pass at 400 Hz cascaded with a 2nd-order high-pass at
    /// 600 Hz. The cutoffs are kept as given, even though the high-pass
    /// corner sits above the low-pass one.
    Bpf,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Tone300, Preset::Lpf300, Preset::Lpf600, Preset::Bpf];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Tone300 => "tone300",
            Preset::Lpf300 => "lpf300",
            Preset::Lpf600 => "lpf600",
            Preset::Bpf => "bpf",
        }
    }

    pub fn spec(self) -> SignalSpec {
        let lp = |n, fc| FilterStage::low_pass(n, fc).expect("preset stage");
        let hp = |n, fc| FilterStage::high_pass(n, fc).expect("preset stage");
        match self {
            Preset::Tone300 => SignalSpec::PureTone { freq_hz: 300.0 },
            Preset::Lpf300 => SignalSpec::FilteredNoise {
                stages: vec![lp(32, 300.0)],
            },
            Preset::Lpf600 => SignalSpec::FilteredNoise {
                stages: vec![lp(32, 600.0)],
            },
            Preset::Bpf => SignalSpec::FilteredNoise {
                stages: vec![lp(8, 400.0), hp(2, 600.0)],
            },
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidSignal(format!("unknown preset '{s}'")))
    }
}

/// DFT frequency grid: `m_points` bins at sampling rate `fs_hz`.
///
/// Bin `m <= M/2` sits at `m * fs / M`; bins above `M/2` stand for the
/// negative frequencies `m * fs / M - fs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralGrid {
    fs_hz: f64,
    m_points: usize,
}

impl Default for SpectralGrid {
    fn default() -> Self {
        Self {
            fs_hz: DEFAULT_FS_HZ,
            m_points: DEFAULT_M_POINTS,
        }
    }
}

impl SpectralGrid {
    pub fn new(fs_hz: f64, m_points: usize) -> Result<Self> {
        if !(fs_hz.is_finite() && fs_hz > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "sampling rate must be positive, got {fs_hz}"
            )));
        }
        if m_points < 2 || m_points % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "DFT size must be even and at least 2, got {m_points}"
            )));
        }
        Ok(Self { fs_hz, m_points })
    }

    pub fn fs_hz(&self) -> f64 {
        self.fs_hz
    }

    pub fn m_points(&self) -> usize {
        self.m_points
    }

    pub fn nyquist_hz(&self) -> f64 {
        self.fs_hz / 2.0
    }

    pub fn bin_width_hz(&self) -> f64 {
        self.fs_hz / self.m_points as f64
    }

    /// Signed frequency of bin `m` in Hz.
    pub fn frequency(&self, m: usize) -> f64 {
        let mag = self.abs_frequency(m);
        if m > self.m_points / 2 {
            -mag
        } else {
            mag
        }
    }

    /// `|f_m|`, computed from the folded index so that bins `m` and `M - m`
    /// get bit-identical values.
    pub fn abs_frequency(&self, m: usize) -> f64 {
        let m = m % self.m_points;
        let folded = m.min(self.m_points - m);
        folded as f64 * self.fs_hz / self.m_points as f64
    }

    /// Index of the non-negative-frequency bin closest to `freq_hz`.
    pub fn nearest_bin(&self, freq_hz: f64) -> usize {
        (freq_hz * self.m_points as f64 / self.fs_hz).round() as usize
    }
}

/// A spectral line of the folded (one-sided) spectrum: angular frequency in
/// rad/s and the combined weight of bin `m` and its mirror `M - m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralLine {
    pub omega: f64,
    pub weight: f64,
}

/// Discrete, conjugate-symmetric power spectral density.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSpectrum {
    grid: SpectralGrid,
    weights: Vec<f64>,
    lines: Vec<SpectralLine>,
    total_power: f64,
}

impl PowerSpectrum {
    /// Builds a spectrum from raw per-bin weights, checking non-negativity,
    /// bitwise mirror symmetry and positive total power.
    pub fn from_weights(grid: SpectralGrid, weights: Vec<f64>) -> Result<Self> {
        let m_points = grid.m_points();
        if weights.len() != m_points {
            return Err(Error::InvalidArgument(format!(
                "expected {m_points} weights, got {}",
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "spectral weights must be finite and non-negative, got {w}"
            )));
        }
        if (1..m_points).any(|m| weights[m] != weights[m_points - m]) {
            return Err(Error::InvalidArgument(
                "spectral weights are not conjugate-symmetric".into(),
            ));
        }
        let total_power = weights.iter().copied().collect::<CompensatedSum>().total();
        if total_power <= 0.0 {
            return Err(Error::ZeroPower);
        }
        let half = m_points / 2;
        let lines = (0..=half)
            .filter_map(|m| {
                let weight = if m == 0 || m == half {
                    weights[m]
                } else {
                    weights[m] + weights[m_points - m]
                };
                (weight > 0.0).then(|| SpectralLine {
                    omega: 2.0 * PI * grid.abs_frequency(m),
                    weight,
                })
            })
            .collect();
        Ok(Self {
            grid,
            weights,
            lines,
            total_power,
        })
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `Σ S(m)` over all `M` bins.
    pub fn total_power(&self) -> f64 {
        self.total_power
    }

    /// Non-zero lines of the one-sided spectrum in ascending frequency.
    ///
    /// Because `S(m) = S(M-m)` and every kernel used here is even in
    /// frequency, sums over all bins reduce to sums over these lines.
    pub fn lines(&self) -> &[SpectralLine] {
        &self.lines
    }

    /// Largest angular frequency carrying power, in rad/s.
    pub fn max_omega(&self) -> f64 {
        self.lines.last().map_or(0.0, |l| l.omega)
    }
}

/// Synthesizes the discrete PSD of `spec` on `grid`.
///
/// Filtered noise gets `S(m) = Π_stages |H(f_m)|²`; a pure tone puts unit
/// weight on the bin nearest its frequency and on the mirror bin.
pub fn synthesize_psd(spec: &SignalSpec, grid: &SpectralGrid) -> Result<PowerSpectrum> {
    spec.validate(grid)?;
    let m_points = grid.m_points();
    let weights = match spec {
        SignalSpec::PureTone { freq_hz } => {
            let bin = grid.nearest_bin(*freq_hz);
            if bin == 0 || bin >= m_points / 2 {
                return Err(Error::DegenerateTone {
                    freq_hz: *freq_hz,
                    bin,
                });
            }
            let mut weights = vec![0.0; m_points];
            weights[bin] = 1.0;
            weights[m_points - bin] = 1.0;
            weights
        }
        SignalSpec::FilteredNoise { stages } => (0..m_points)
            .map(|m| {
                let f = grid.abs_frequency(m);
                stages.iter().map(|s| butterworth_gain(s, f)).product()
            })
            .collect(),
    };
    PowerSpectrum::from_weights(*grid, weights)
}

/// One-sided table of `(f_m, S(m))` for `m` in `0..=M/2`.
pub fn psd_report(spectrum: &PowerSpectrum) -> Vec<(f64, f64)> {
    let grid = spectrum.grid();
    (0..=grid.m_points() / 2)
        .map(|m| (grid.frequency(m), spectrum.weights()[m]))
        .collect()
}
