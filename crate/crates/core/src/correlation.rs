//! Spatial-temporal correlation of a diffuse sound field.
//!
//! For a broadband field the correlation between two points `Δ𝐫` apart with
//! time lag `Δt` is the power-weighted mean of the tonal kernel
//! `sinc(ωΔ𝐫/c)·cos(ωΔt)` over the spectrum. Bins above `M/2` are treated as
//! negative frequencies, so the sum is real by construction.

use std::f64::consts::PI;

use crate::numeric::CompensatedSum;
use crate::spectral::PowerSpectrum;
use crate::{Error, Result};

/// Separation, time lag and sound speed for one correlation evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationQuery {
    delta_r: f64,
    delta_t: f64,
    c: f64,
}

impl CorrelationQuery {
    /// `delta_r` in m (≥ 0), `delta_t` in s, `c` in m/s (> 0).
    pub fn new(delta_r: f64, delta_t: f64, c: f64) -> Result<Self> {
        if !(delta_r.is_finite() && delta_r >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "separation must be finite and non-negative, got {delta_r}"
            )));
        }
        if !delta_t.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "time lag must be finite, got {delta_t}"
            )));
        }
        validate_speed(c)?;
        Ok(Self {
            delta_r,
            delta_t,
            c,
        })
    }

    pub fn delta_r(&self) -> f64 {
        self.delta_r
    }

    pub fn delta_t(&self) -> f64 {
        self.delta_t
    }

    pub fn c(&self) -> f64 {
        self.c
    }
}

pub(crate) fn validate_speed(c: f64) -> Result<()> {
    if c.is_finite() && c > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "speed of sound must be positive, got {c}"
        )))
    }
}

/// Unnormalised sinc, `sin(x)/x`, with `sinc(0) = 1`.
#[inline]
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.sin() / x
    }
}

/// `sinc(x)·cos(y)`, sharing one `sin_cos` when the arguments coincide
/// (the on-axis case `Δt = Δ𝐫/c`).
#[inline]
fn tonal_kernel(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        y.cos()
    } else if y == 0.0 {
        x.sin() / x
    } else if x == y {
        let (s, c) = x.sin_cos();
        s * c / x
    } else {
        x.sin() / x * y.cos()
    }
}

/// Correlation of a pure-tone diffuse field: `sinc(kΔ𝐫)·cos(ωΔt)`.
pub fn puretone_correlation(f_hz: f64, q: &CorrelationQuery) -> f64 {
    let omega = 2.0 * PI * f_hz;
    tonal_kernel(omega * q.delta_r / q.c, omega * q.delta_t)
}

/// Broadband correlation coefficient `ρ(Δ𝐫, Δt)` of a diffuse field excited
/// by `spectrum`.
///
/// Lines are accumulated in ascending frequency with compensated summation;
/// numerator and normaliser share the order, so `ρ(0, 0) = 1` exactly.
pub fn broadband_correlation(spectrum: &PowerSpectrum, q: &CorrelationQuery) -> f64 {
    correlation_sum(spectrum, q.delta_r, q.delta_t, q.c)
}

pub(crate) fn correlation_sum(spectrum: &PowerSpectrum, delta_r: f64, delta_t: f64, c: f64) -> f64 {
    let mut num = CompensatedSum::new();
    let mut den = CompensatedSum::new();
    let space = delta_r / c;
    for line in spectrum.lines() {
        num.add(line.weight * tonal_kernel(line.omega * space, line.omega * delta_t));
        den.add(line.weight);
    }
    num.total() / den.total()
}

/// Normalised primary/secondary cross-correlation at a point `r1` from the
/// source, given cancellation at distance `r0`:
/// `-(r0/r1)·ρ(Δ𝐫, Δr/c)` with `Δ𝐫 = delta_r_sep` and `Δr = delta_r_rad`.
pub fn cross_correlation(
    spectrum: &PowerSpectrum,
    delta_r_sep: f64,
    delta_r_rad: f64,
    r0: f64,
    r1: f64,
    c: f64,
) -> Result<f64> {
    if !(r1.is_finite() && r1 > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "observation distance must be positive, got {r1}"
        )));
    }
    if !(r0.is_finite() && r0 > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "cancellation distance must be positive, got {r0}"
        )));
    }
    let q = CorrelationQuery::new(delta_r_sep, delta_r_rad / c, c)?;
    Ok(-(r0 / r1) * broadband_correlation(spectrum, &q))
}
