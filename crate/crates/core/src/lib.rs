//! Broadband spatial-temporal correlation in diffuse sound fields and the
//! zones of quiet produced by local active noise control.
//!
//! The crate is organised bottom-up:
//!
//! - [`spectral`]: excitation signals and their discrete power spectra.
//! - [`correlation`]: diffuse-field correlation for tones and broadband spectra.
//! - [`geometry`]: points, distances and control scenarios.
//! - [`zones`]: attenuation for near-field and far-field control, zone widths
//!   and 2-D attenuation fields.
//! - [`contour`]: iso-attenuation contours and their extents.
//! - [`oracle`]: a plane-wave direction-sampling estimate of the correlation,
//!   used to validate [`correlation`] without its sinc kernel.

pub mod contour;
pub mod correlation;
mod error;
pub mod geometry;
mod numeric;
pub mod oracle;
pub mod spectral;
pub mod zones;

pub use contour::{contour_extent, extract_iso_contour, ContourExtent, ContourSet, Polyline};
pub use correlation::{
    broadband_correlation, cross_correlation, puretone_correlation, sinc, CorrelationQuery,
};
pub use error::{Error, Result};
pub use geometry::{radial_difference, separation, ControlMode, Point, Scenario};
pub use oracle::{oracle_correlation, signal_autocorrelation, AutocorrelationTable, OracleConfig};
pub use spectral::{
    butterworth_gain, psd_report, synthesize_psd, FilterKind, FilterStage, PowerSpectrum, Preset,
    SignalSpec, SpectralGrid,
};
pub use zones::{
    attenuation_db, attenuation_db_floored, attenuation_field_2d, farfield_attenuation,
    nearfield_attenuation, nearfield_attenuation_limit, zone_width, AttenuationField, GridSpec,
    ZoneSearch, DB_FLOOR,
};

/// Default speed of sound in m/s.
pub const DEFAULT_SPEED_OF_SOUND: f64 = 343.0;
