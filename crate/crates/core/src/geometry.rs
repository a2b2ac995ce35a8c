//! Positions relative to the secondary source (at the origin) and the
//! control scenario built around a cancellation point.

use std::fmt;
use std::str::FromStr;

use crate::correlation::validate_speed;
use crate::{Error, Result, DEFAULT_SPEED_OF_SOUND};

/// Default far-field ratio `E[ps²]/E[pp²]`.
pub const DEFAULT_GAIN_RATIO: f64 = 3.0;
/// Default exclusion radius around the source in metres.
pub const DEFAULT_R_MIN: f64 = 0.01;

/// Cartesian position in metres. 2-D points have `z = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    coords: [f64; 3],
}

impl Point {
    pub const ORIGIN: Point = Point { coords: [0.0; 3] };

    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && z.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "point coordinates must be finite, got ({x}, {y}, {z})"
            )));
        }
        Ok(Self { coords: [x, y, z] })
    }

    pub fn xy(x: f64, y: f64) -> Result<Self> {
        Self::new(x, y, 0.0)
    }

    pub fn x(&self) -> f64 {
        self.coords[0]
    }

    pub fn y(&self) -> f64 {
        self.coords[1]
    }

    pub fn z(&self) -> f64 {
        self.coords[2]
    }

    /// Distance from the source at the origin.
    pub fn norm(&self) -> f64 {
        let [x, y, z] = self.coords;
        x.hypot(y).hypot(z)
    }
}

/// Euclidean distance `|p1 - p0|`.
pub fn separation(p1: &Point, p0: &Point) -> f64 {
    let [x1, y1, z1] = p1.coords;
    let [x0, y0, z0] = p0.coords;
    (x1 - x0).hypot(y1 - y0).hypot(z1 - z0)
}

/// Signed difference of source distances, `|p1| - |p0|`.
pub fn radial_difference(p1: &Point, p0: &Point) -> f64 {
    p1.norm() - p0.norm()
}

/// Whether the cancellation point sits in the direct field of the secondary
/// source or beyond the reverberation distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ControlMode {
    #[default]
    NearField,
    FarField,
}

impl ControlMode {
    pub fn name(self) -> &'static str {
        match self {
            ControlMode::NearField => "near-field",
            ControlMode::FarField => "far-field",
        }
    }
}

impl fmt::Display for ControlMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ControlMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "near-field" | "near" | "nearfield" => Ok(ControlMode::NearField),
            "far-field" | "far" | "farfield" => Ok(ControlMode::FarField),
            _ => Err(Error::InvalidArgument(format!("unknown control mode '{s}'"))),
        }
    }
}

/// Secondary source at the origin cancelling the primary field at
/// `cancellation_point`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    cancellation_point: Point,
    c: f64,
    mode: ControlMode,
    gain_ratio: f64,
    r_min: f64,
}

impl Scenario {
    pub fn new(
        cancellation_point: Point,
        c: f64,
        mode: ControlMode,
        gain_ratio: f64,
        r_min: f64,
    ) -> Result<Self> {
        if !(cancellation_point.norm() > 0.0) {
            return Err(Error::InvalidArgument(
                "cancellation point must not coincide with the source".into(),
            ));
        }
        validate_speed(c)?;
        if !(gain_ratio.is_finite() && gain_ratio >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "gain ratio must be non-negative, got {gain_ratio}"
            )));
        }
        if !(r_min.is_finite() && r_min >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "exclusion radius must be non-negative, got {r_min}"
            )));
        }
        if mode == ControlMode::NearField && cancellation_point.norm() < r_min {
            return Err(Error::InsideExclusion {
                r: cancellation_point.norm(),
                r_min,
            });
        }
        Ok(Self {
            cancellation_point,
            c,
            mode,
            gain_ratio,
            r_min,
        })
    }

    /// Near-field scenario with default sound speed and exclusion radius.
    pub fn near_field(cancellation_point: Point) -> Result<Self> {
        Self::new(
            cancellation_point,
            DEFAULT_SPEED_OF_SOUND,
            ControlMode::NearField,
            DEFAULT_GAIN_RATIO,
            DEFAULT_R_MIN,
        )
    }

    /// Far-field scenario with default sound speed.
    pub fn far_field(cancellation_point: Point, gain_ratio: f64) -> Result<Self> {
        Self::new(
            cancellation_point,
            DEFAULT_SPEED_OF_SOUND,
            ControlMode::FarField,
            gain_ratio,
            DEFAULT_R_MIN,
        )
    }

    pub fn with_speed_of_sound(self, c: f64) -> Result<Self> {
        Self::new(self.cancellation_point, c, self.mode, self.gain_ratio, self.r_min)
    }

    pub fn cancellation_point(&self) -> &Point {
        &self.cancellation_point
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn mode(&self) -> ControlMode {
        self.mode
    }

    pub fn gain_ratio(&self) -> f64 {
        self.gain_ratio
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }
}
