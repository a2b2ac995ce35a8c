//! Shared fixtures for the benchmarks.

use quietzone::{synthesize_psd, Point, PowerSpectrum, Preset, Scenario, SpectralGrid};

pub fn preset_spectrum(preset: Preset) -> PowerSpectrum {
    synthesize_psd(&preset.spec(), &SpectralGrid::default()).expect("preset spectrum")
}

pub fn default_scenario() -> Scenario {
    Scenario::near_field(Point::xy(0.2, 0.0).expect("point")).expect("scenario")
}
