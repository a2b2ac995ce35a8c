use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid spectral grid: {0}")]
    InvalidGrid(String),

    #[error("invalid filter stage: {0}")]
    InvalidFilter(String),

    #[error("invalid signal: {0}")]
    InvalidSignal(String),

    #[error("tone at {freq_hz} Hz snaps to degenerate bin {bin} (DC or Nyquist)")]
    DegenerateTone { freq_hz: f64, bin: usize },

    #[error("spectrum has zero total power")]
    ZeroPower,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point at distance {r} m is inside the exclusion radius {r_min} m around the source")]
    InsideExclusion { r: f64, r_min: f64 },

    #[error("scenario mode mismatch: expected {expected}")]
    ModeMismatch { expected: &'static str },

    #[error("attenuation does not cross {threshold} within {max_distance} m")]
    NoCrossing { threshold: f64, max_distance: f64 },

    #[error("invalid grid specification: {0}")]
    InvalidGridSpec(String),

    #[error("contour set has no closed polyline")]
    NoClosedContour,

    #[error("polygon area is undefined for an open polyline")]
    OpenPolyline,
}
