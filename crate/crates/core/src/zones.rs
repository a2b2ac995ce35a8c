//! Attenuation around the cancellation point.
//!
//! `ε` is the controlled mean-square pressure divided by the primary one.
//! Near-field control uses a monopole secondary source whose pressure at
//! `r1` is the cancellation-point pressure scaled by `r0/r1` and delayed by
//! `(r1 - r0)/c`:
//!
//! ```text
//! ε = 1 + (r0/r1)² - 2 (r0/r1) ρ(Δ𝐫, Δr/c)
//! ```
//!
//! Far-field control treats the secondary field as a second, uncorrelated
//! diffuse field with power ratio `g`: `ε = (1 + g)(1 - ρ²(Δ𝐫, 0))`.

use rayon::prelude::*;

use crate::correlation::correlation_sum;
use crate::geometry::{radial_difference, separation, ControlMode, Point, Scenario};
use crate::spectral::PowerSpectrum;
use crate::{Error, Result};

/// dB value reported for `ε = 0`.
pub const DB_FLOOR: f64 = -100.0;

fn require_mode(scenario: &Scenario, mode: ControlMode) -> Result<()> {
    if scenario.mode() == mode {
        Ok(())
    } else {
        Err(Error::ModeMismatch {
            expected: mode.name(),
        })
    }
}

fn require_distance(d: f64) -> Result<()> {
    if d.is_finite() && d >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "distance must be finite and non-negative, got {d}"
        )))
    }
}

/// Near-field attenuation at `p1` in general position.
pub fn nearfield_attenuation(
    spectrum: &PowerSpectrum,
    scenario: &Scenario,
    p1: &Point,
) -> Result<f64> {
    require_mode(scenario, ControlMode::NearField)?;
    let r1 = p1.norm();
    if r1 < scenario.r_min() || r1 == 0.0 {
        return Err(Error::InsideExclusion {
            r: r1,
            r_min: scenario.r_min(),
        });
    }
    let p0 = scenario.cancellation_point();
    let sep = separation(p1, p0);
    if sep == 0.0 {
        return Ok(0.0);
    }
    let rad = radial_difference(p1, p0);
    let c = scenario.c();
    let rho = correlation_sum(spectrum, sep, rad / c, c);
    let a = p0.norm() / r1;
    // (1 - a)² + 2a(1 - ρ) is the same quantity without the cancellation of
    // the expanded form; rounding of ρ just above 1 is floored
    Ok(((1.0 - a) * (1.0 - a) + 2.0 * a * (1.0 - rho)).max(0.0))
}

/// Near-field attenuation in the on-axis limit `r1 ≈ r0`, `Δr = Δ𝐫 = d`:
/// `ε = 2(1 - ρ(d, d/c))`.
pub fn nearfield_attenuation_limit(spectrum: &PowerSpectrum, d: f64, c: f64) -> Result<f64> {
    require_distance(d)?;
    crate::correlation::validate_speed(c)?;
    if d == 0.0 {
        return Ok(0.0);
    }
    Ok((2.0 * (1.0 - correlation_sum(spectrum, d, d / c, c))).max(0.0))
}

/// Far-field attenuation at distance `d` from the cancellation point:
/// `ε = (1 + g)(1 - ρ²(d, 0))`.
pub fn farfield_attenuation(spectrum: &PowerSpectrum, scenario: &Scenario, d: f64) -> Result<f64> {
    require_mode(scenario, ControlMode::FarField)?;
    require_distance(d)?;
    if d == 0.0 {
        return Ok(0.0);
    }
    let rho = correlation_sum(spectrum, d, 0.0, scenario.c());
    Ok(((1.0 + scenario.gain_ratio()) * (1.0 - rho * rho)).max(0.0))
}

/// `10·log10(ε)`; `ε = 0` gives `-inf`.
pub fn attenuation_db(epsilon: f64) -> f64 {
    10.0 * epsilon.log10()
}

/// [`attenuation_db`] clamped below at [`DB_FLOOR`].
pub fn attenuation_db_floored(epsilon: f64) -> f64 {
    attenuation_db(epsilon).max(DB_FLOOR)
}

/// Bracketing parameters for [`zone_width`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZoneSearch {
    /// Scan step in metres.
    pub step: f64,
    /// Scan limit in metres.
    pub max_distance: f64,
    /// Bisection stops once `|ε - threshold|` drops below this.
    pub tolerance: f64,
}

impl Default for ZoneSearch {
    fn default() -> Self {
        Self {
            step: 5e-4,
            max_distance: 2.0,
            tolerance: 1e-9,
        }
    }
}

/// The 1-D attenuation curve used for zone widths: the near-field on-axis
/// limit or the far-field curve, depending on the scenario mode.
pub fn attenuation_curve(spectrum: &PowerSpectrum, scenario: &Scenario, d: f64) -> Result<f64> {
    match scenario.mode() {
        ControlMode::NearField => nearfield_attenuation_limit(spectrum, d, scenario.c()),
        ControlMode::FarField => farfield_attenuation(spectrum, scenario, d),
    }
}

/// Width `2d*` of the zone where the attenuation curve stays below
/// `threshold`, with `d*` its smallest positive crossing.
pub fn zone_width(
    spectrum: &PowerSpectrum,
    scenario: &Scenario,
    threshold: f64,
    search: &ZoneSearch,
) -> Result<f64> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "threshold must lie in (0, 1), got {threshold}"
        )));
    }
    if !(search.step > 0.0 && search.max_distance > 0.0 && search.tolerance > 0.0) {
        return Err(Error::InvalidArgument("invalid zone search settings".into()));
    }
    let eps = |d: f64| attenuation_curve(spectrum, scenario, d);

    let n_steps = (search.max_distance / search.step).ceil() as usize;
    let mut lo = 0.0;
    let mut hi = None;
    for i in 1..=n_steps {
        let d = (i as f64 * search.step).min(search.max_distance);
        if eps(d)? >= threshold {
            hi = Some(d);
            break;
        }
        lo = d;
    }
    let Some(mut hi) = hi else {
        return Err(Error::NoCrossing {
            threshold,
            max_distance: search.max_distance,
        });
    };

    let mut mid = 0.5 * (lo + hi);
    loop {
        let value = eps(mid)?;
        if (value - threshold).abs() < search.tolerance {
            break;
        }
        if value < threshold {
            lo = mid;
        } else {
            hi = mid;
        }
        let next = 0.5 * (lo + hi);
        if next == mid || next == lo || next == hi {
            break;
        }
        mid = next;
    }
    Ok(2.0 * mid)
}

/// Rectangular evaluation grid in metres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub spacing: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            x_min: 0.05,
            x_max: 0.45,
            y_min: -0.2,
            y_max: 0.2,
            spacing: 0.0025,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.x_min, self.x_max, self.y_min, self.y_max, self.spacing]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.spacing <= 0.0 || self.x_max <= self.x_min || self.y_max <= self.y_min
        {
            return Err(Error::InvalidGridSpec(format!("{self:?}")));
        }
        if self.nx() < 2 || self.ny() < 2 {
            return Err(Error::InvalidGridSpec(
                "grid needs at least 2x2 nodes".into(),
            ));
        }
        Ok(())
    }

    /// Nodes along x; the span is rounded to a whole number of steps.
    pub fn nx(&self) -> usize {
        ((self.x_max - self.x_min) / self.spacing).round() as usize + 1
    }

    pub fn ny(&self) -> usize {
        ((self.y_max - self.y_min) / self.spacing).round() as usize + 1
    }

    /// Same extent at half the spacing.
    pub fn refined(&self) -> Self {
        Self {
            spacing: self.spacing / 2.0,
            ..*self
        }
    }
}

/// Attenuation sampled on a regular grid. Cells inside the exclusion radius
/// hold `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct AttenuationField {
    x_min: f64,
    y_min: f64,
    spacing: f64,
    nx: usize,
    ny: usize,
    values: Vec<Option<f64>>,
}

impl AttenuationField {
    /// Wraps row-major values (`j * nx + i`).
    pub fn from_values(
        x_min: f64,
        y_min: f64,
        spacing: f64,
        nx: usize,
        ny: usize,
        values: Vec<Option<f64>>,
    ) -> Result<Self> {
        if values.len() != nx * ny || nx < 2 || ny < 2 || !(spacing > 0.0) {
            return Err(Error::InvalidGridSpec(format!(
                "{nx}x{ny} field with {} values and spacing {spacing}",
                values.len()
            )));
        }
        if values.iter().flatten().any(|v| !(*v >= 0.0)) {
            return Err(Error::InvalidArgument(
                "attenuation values must be non-negative".into(),
            ));
        }
        Ok(Self {
            x_min,
            y_min,
            spacing,
            nx,
            ny,
            values,
        })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.spacing
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y_min + j as f64 * self.spacing
    }

    pub fn x_max(&self) -> f64 {
        self.x(self.nx - 1)
    }

    pub fn y_max(&self) -> f64 {
        self.y(self.ny - 1)
    }

    pub fn value(&self, i: usize, j: usize) -> Option<f64> {
        self.values[j * self.nx + i]
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    /// `(x, y, ε)` for every unmasked node in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (0..self.ny).flat_map(move |j| {
            (0..self.nx).filter_map(move |i| self.value(i, j).map(|v| (self.x(i), self.y(j), v)))
        })
    }
}

/// Evaluates the attenuation over `grid`.
///
/// Near-field cells use the general-position formula and are masked inside
/// the exclusion radius; far-field cells use the separation from the
/// cancellation point.
pub fn attenuation_field_2d(
    spectrum: &PowerSpectrum,
    scenario: &Scenario,
    grid: &GridSpec,
) -> Result<AttenuationField> {
    grid.validate()?;
    let (nx, ny) = (grid.nx(), grid.ny());
    let rows: Vec<Vec<Option<f64>>> = (0..ny)
        .into_par_iter()
        .map(|j| {
            let y = grid.y_min + j as f64 * grid.spacing;
            (0..nx)
                .map(|i| {
                    let x = grid.x_min + i as f64 * grid.spacing;
                    let p = Point::xy(x, y)?;
                    match scenario.mode() {
                        ControlMode::NearField => {
                            match nearfield_attenuation(spectrum, scenario, &p) {
                                Ok(v) => Ok(Some(v)),
                                Err(Error::InsideExclusion { .. }) => Ok(None),
                                Err(e) => Err(e),
                            }
                        }
                        ControlMode::FarField => {
                            let d = separation(&p, scenario.cancellation_point());
                            farfield_attenuation(spectrum, scenario, d).map(Some)
                        }
                    }
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    AttenuationField::from_values(
        grid.x_min,
        grid.y_min,
        grid.spacing,
        nx,
        ny,
        rows.into_iter().flatten().collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{synthesize_psd, Preset, SpectralGrid};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    const C: f64 = 343.0;

    fn psd(preset: Preset) -> PowerSpectrum {
        synthesize_psd(&preset.spec(), &SpectralGrid::default()).unwrap()
    }

    fn tone_freq() -> f64 {
        SpectralGrid::default().frequency(614)
    }

    fn near() -> Scenario {
        Scenario::near_field(Point::xy(0.2, 0.0).unwrap()).unwrap()
    }

    fn far(g: f64) -> Scenario {
        Scenario::far_field(Point::xy(0.2, 0.0).unwrap(), g).unwrap()
    }

    /// Smallest root of `f(x) = target` on `(0, x_max)` by dense scan and
    /// linear interpolation, independent of the bisection in `zone_width`.
    fn scan_root(f: impl Fn(f64) -> f64, target: f64, x_max: f64) -> f64 {
        let n = 2_000_000;
        let mut prev = (0.0, f(0.0));
        for i in 1..=n {
            let x = x_max * i as f64 / n as f64;
            let v = f(x);
            if v >= target {
                return prev.0 + (target - prev.1) / (v - prev.1) * (x - prev.0);
            }
            prev = (x, v);
        }
        panic!("no root");
    }

    #[test]
    fn cancellation_point_is_silent() {
        for preset in Preset::ALL {
            let e = nearfield_attenuation(&psd(preset), &near(), near().cancellation_point());
            assert_eq!(e.unwrap(), 0.0);
        }
    }

    #[test]
    fn decorrelated_fields_add_in_power() {
        // off-axis point on the circle r1 = r0 has Δr = 0; place it so kΔ𝐫 = π
        let tone = psd(Preset::Tone300);
        let k = 2.0 * PI * tone_freq() / C;
        let chord: f64 = PI / k;
        let r0: f64 = 0.4;
        let half_angle = (chord / (2.0 * r0)).asin();
        let p1 = Point::xy(r0 * (2.0 * half_angle).cos(), r0 * (2.0 * half_angle).sin()).unwrap();
        let scenario = Scenario::near_field(Point::xy(r0, 0.0).unwrap()).unwrap();
        let e = nearfield_attenuation(&tone, &scenario, &p1).unwrap();
        let a = r0 / p1.norm();
        assert_abs_diff_eq!(e, 1.0 + a * a, epsilon = 1e-12);
    }

    #[test]
    fn limit_curve_matches_closed_form_for_tone() {
        let tone = psd(Preset::Tone300);
        let k = 2.0 * PI * tone_freq() / C;
        for i in 0..50 {
            let d = i as f64 * 0.01;
            let x = k * d;
            let expected = if x == 0.0 { 0.0 } else { 2.0 * (1.0 - x.sin() / x * x.cos()) };
            assert_abs_diff_eq!(nearfield_attenuation_limit(&tone, d, C).unwrap(), expected, epsilon = 1e-12);
        }
        let quarter = (PI / 2.0) / k;
        assert_abs_diff_eq!(nearfield_attenuation_limit(&tone, quarter, C).unwrap(), 2.0, epsilon = 1e-12);
        assert_eq!(nearfield_attenuation_limit(&tone, 0.0, C).unwrap(), 0.0);
    }

    #[test]
    fn general_formula_tends_to_limit_far_from_source() {
        // r0 → ∞ on-axis: the general form converges to the limit curve
        let bpf = psd(Preset::Bpf);
        let r0 = 1e6;
        let scenario = Scenario::near_field(Point::xy(r0, 0.0).unwrap()).unwrap();
        for d in [0.01, 0.05, 0.1] {
            let p1 = Point::xy(r0 + d, 0.0).unwrap();
            let general = nearfield_attenuation(&bpf, &scenario, &p1).unwrap();
            let limit = nearfield_attenuation_limit(&bpf, d, C).unwrap();
            assert_abs_diff_eq!(general, limit, epsilon = 1e-6);
        }
    }

    #[test]
    fn far_field_reference_values() {
        let tone = psd(Preset::Tone300);
        let k = 2.0 * PI * tone_freq() / C;
        assert_eq!(farfield_attenuation(&tone, &far(3.0), 0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(farfield_attenuation(&tone, &far(3.0), PI / k).unwrap(), 4.0, epsilon = 1e-12);
        for i in 0..100 {
            let e = farfield_attenuation(&tone, &far(0.0), i as f64 * 0.01).unwrap();
            assert!(e <= 1.0);
        }
    }

    #[test]
    fn mode_and_domain_errors() {
        let tone = psd(Preset::Tone300);
        let p = Point::xy(0.3, 0.0).unwrap();
        assert!(matches!(
            nearfield_attenuation(&tone, &far(3.0), &p),
            Err(Error::ModeMismatch { .. })
        ));
        assert!(matches!(
            farfield_attenuation(&tone, &near(), 0.1),
            Err(Error::ModeMismatch { .. })
        ));
        let close = Point::xy(0.005, 0.0).unwrap();
        assert!(matches!(
            nearfield_attenuation(&tone, &near(), &close),
            Err(Error::InsideExclusion { .. })
        ));
        assert!(nearfield_attenuation_limit(&tone, -0.1, C).is_err());
        assert!(zone_width(&tone, &near(), 1.5, &ZoneSearch::default()).is_err());
    }

    #[test]
    fn db_conversion() {
        assert_abs_diff_eq!(attenuation_db(0.1), -10.0, epsilon = 1e-12);
        assert_eq!(attenuation_db(1.0), 0.0);
        assert_abs_diff_eq!(attenuation_db(4.0), 6.0206, epsilon = 1e-4);
        assert_eq!(attenuation_db(0.0), f64::NEG_INFINITY);
        assert_eq!(attenuation_db_floored(0.0), DB_FLOOR);
    }

    #[test]
    fn tone_near_field_zone_width() {
        let tone = psd(Preset::Tone300);
        let f = tone_freq();
        let k = 2.0 * PI * f / C;
        let x_star = scan_root(|x| 2.0 * (1.0 - if x == 0.0 { 1.0 } else { x.sin() / x * x.cos() }), 0.1, 1.0);
        let width = zone_width(&tone, &near(), 0.1, &ZoneSearch::default()).unwrap();
        assert_abs_diff_eq!(width, 2.0 * x_star / k, epsilon = 1e-8);
        let lambda = C / 300.0;
        assert!((width / lambda - 0.088).abs() < 0.002, "{}", width / lambda);
    }

    #[test]
    fn tone_far_field_zone_width() {
        let tone = psd(Preset::Tone300);
        let k = 2.0 * PI * tone_freq() / C;
        // 4(1 - sinc²(x)) = 0.1 ⇔ sinc(x) = √0.975
        let x_star = scan_root(|x| if x == 0.0 { 0.0 } else { 4.0 * (1.0 - (x.sin() / x).powi(2)) }, 0.1, 1.0);
        let width = zone_width(&tone, &far(3.0), 0.1, &ZoneSearch::default()).unwrap();
        assert_abs_diff_eq!(width, 2.0 * x_star / k, epsilon = 1e-8);
        assert!((width / (C / 300.0) - 0.0875).abs() < 5e-4);
    }

    #[test]
    fn tiny_threshold_gives_tiny_positive_width() {
        let tone = psd(Preset::Tone300);
        let width = zone_width(&tone, &near(), 1e-6, &ZoneSearch::default()).unwrap();
        assert!(width > 0.0 && width < 1e-3, "{width}");
    }

    #[test]
    fn no_crossing_is_reported() {
        let tone = psd(Preset::Tone300);
        let search = ZoneSearch {
            max_distance: 0.01,
            ..ZoneSearch::default()
        };
        assert!(matches!(
            zone_width(&tone, &near(), 0.1, &search),
            Err(Error::NoCrossing { .. })
        ));
    }

    #[test]
    fn tone_zone_width_scales_with_wavelength() {
        let grid = SpectralGrid::default();
        let ratios: Vec<f64> = [150.0, 300.0, 600.0]
            .iter()
            .map(|&f| {
                let spec = crate::spectral::SignalSpec::PureTone { freq_hz: f };
                let s = synthesize_psd(&spec, &grid).unwrap();
                let snapped = grid.frequency(grid.nearest_bin(f));
                zone_width(&s, &near(), 0.1, &ZoneSearch::default()).unwrap() * snapped / C
            })
            .collect();
        for r in &ratios {
            assert!((r - 0.0878).abs() < 1e-3, "{r}");
            assert!((r - ratios[0]).abs() < 1e-9);
        }
    }

    #[test]
    fn field_reproduces_pointwise_attenuation_and_symmetry() {
        let tone = psd(Preset::Tone300);
        let grid = GridSpec {
            spacing: 0.01,
            ..GridSpec::default()
        };
        let field = attenuation_field_2d(&tone, &near(), &grid).unwrap();
        assert_eq!((field.nx(), field.ny()), (41, 41));
        // the node nearest (0.2, 0)
        assert!(field.value(15, 20).unwrap() < 1e-20);
        for j in 0..field.ny() {
            for i in 0..field.nx() {
                let mirrored = field.value(i, field.ny() - 1 - j).unwrap();
                assert_abs_diff_eq!(field.value(i, j).unwrap(), mirrored, epsilon = 1e-9);
            }
        }
        // on-axis samples agree with direct evaluation
        for i in 0..field.nx() {
            let p = Point::xy(field.x(i), 0.0).unwrap();
            let direct = nearfield_attenuation(&tone, &near(), &p).unwrap();
            assert_abs_diff_eq!(field.value(i, 20).unwrap(), direct, epsilon = 1e-9);
        }
    }

    #[test]
    fn field_masks_cells_near_source() {
        let tone = psd(Preset::Tone300);
        let grid = GridSpec {
            x_min: -0.05,
            x_max: 0.25,
            y_min: -0.05,
            y_max: 0.05,
            spacing: 0.005,
        };
        let field = attenuation_field_2d(&tone, &near(), &grid).unwrap();
        let masked = field.values().iter().filter(|v| v.is_none()).count();
        assert!(masked > 0);
        for j in 0..field.ny() {
            for i in 0..field.nx() {
                let r = field.x(i).hypot(field.y(j));
                assert_eq!(field.value(i, j).is_none(), r < 0.01);
            }
        }
    }

    #[test]
    fn tone_field_on_axis_extent_matches_axis_curve() {
        // on-axis 10 dB extent of the 2-D field vs the 1-D general-position
        // curve along the axis. The r0/r1 factor makes both narrower than the
        // r1 ≈ r0 limit width at r0 = 0.2 m.
        let tone = psd(Preset::Tone300);
        let grid = GridSpec {
            spacing: 0.001,
            y_min: -0.002,
            y_max: 0.002,
            ..GridSpec::default()
        };
        let field = attenuation_field_2d(&tone, &near(), &grid).unwrap();
        let j = 2;
        let quiet: Vec<f64> = (0..field.nx())
            .filter(|&i| field.value(i, j).unwrap() < 0.1)
            .map(|i| field.x(i))
            .collect();
        let extent = quiet.last().unwrap() - quiet.first().unwrap();
        let curve = |x: f64| nearfield_attenuation(&tone, &near(), &Point::xy(x, 0.0).unwrap()).unwrap();
        let right = scan_root(|d| curve(0.2 + d), 0.1, 0.2);
        let left = scan_root(|d| curve(0.2 - d), 0.1, 0.15);
        assert!((extent - (left + right)).abs() <= 2.0 * grid.spacing);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn attenuation_is_non_negative(
            preset_idx in 0usize..4,
            x in -0.5f64..0.5,
            y in -0.5f64..0.5,
            r0 in 0.02f64..0.6,
        ) {
            let s = psd(Preset::ALL[preset_idx]);
            let scenario = Scenario::near_field(Point::xy(r0, 0.0).unwrap()).unwrap();
            let p = Point::xy(x, y).unwrap();
            if let Ok(e) = nearfield_attenuation(&s, &scenario, &p) {
                prop_assert!(e >= 0.0);
            }
            let d = x.hypot(y);
            let e = nearfield_attenuation_limit(&s, d, C).unwrap();
            prop_assert!((0.0..=4.0).contains(&e));
            prop_assert!(farfield_attenuation(&s, &far(3.0), d).unwrap() >= 0.0);
        }
    }
}
