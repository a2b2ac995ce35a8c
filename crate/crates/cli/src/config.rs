//! Run configuration: built-in defaults, then an optional flat TOML file,
//! then command-line flags, each layer overriding the previous one.
//!
//! Config file keys (all optional):
//!
//! ```toml
//! signal = "bpf"              # preset or inline, e.g. "lp:8:400+hp:2:600"
//! fs_hz = 2000.0
//! m_points = 4096
//! c_mps = 343.0
//! mode = "near-field"         # or "far-field"
//! r0 = "0.2,0"
//! gain_ratio = 3.0
//! r_min = 0.01
//! grid = "0.05,0.45,-0.2,0.2,0.0025"   # x_min,x_max,y_min,y_max,spacing
//! threshold_db = -10.0
//! sweep_max = 0.5
//! sweep_step = 0.001
//! seed = 1
//! n_directions = 100000
//! tolerance = 0.01
//! kind = "auto"               # corr only: "auto" or "cross"
//! out = "out.csv"
//! contour_out = "contour.csv" # zone2d only
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use quietzone::geometry::{DEFAULT_GAIN_RATIO, DEFAULT_R_MIN};
use quietzone::spectral::{DEFAULT_FS_HZ, DEFAULT_M_POINTS};
use quietzone::{
    ControlMode, GridSpec, Point, Scenario, SignalSpec, SpectralGrid, DEFAULT_SPEED_OF_SOUND,
};
use serde::Deserialize;

use crate::CliError;

pub const DEFAULT_SIGNAL: &str = "tone300";
pub const DEFAULT_THRESHOLD_DB: f64 = -10.0;
pub const DEFAULT_SWEEP_MAX: f64 = 0.5;
pub const DEFAULT_SWEEP_STEP: f64 = 0.001;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_N_DIRECTIONS: u64 = 100_000;
pub const DEFAULT_TOLERANCE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrKind {
    /// Primary auto-correlation ρ(Δr, 0).
    #[default]
    Auto,
    /// Primary/secondary cross-correlation -ρ(Δr, Δr/c) with r0/r1 = 1.
    Cross,
}

impl fmt::Display for CorrKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CorrKind::Auto => "auto",
            CorrKind::Cross => "cross",
        })
    }
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct CliArgs {
    /// TOML file with default values for any of the flags below.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Preset (tone300, lpf300, lpf600, bpf) or inline spec such as lp:8:400+hp:2:600.
    #[arg(long)]
    pub signal: Option<String>,
    /// Sampling rate in Hz.
    #[arg(long)]
    pub fs: Option<f64>,
    /// DFT length M.
    #[arg(long = "dft-size")]
    pub dft_size: Option<usize>,
    /// Speed of sound in m/s.
    #[arg(long)]
    pub c: Option<f64>,
    /// near-field or far-field.
    #[arg(long)]
    pub mode: Option<String>,
    /// Cancellation point "x,y" (or "x,y,z") in metres.
    #[arg(long, allow_hyphen_values = true)]
    pub r0: Option<String>,
    /// Far-field power ratio E[ps²]/E[pp²].
    #[arg(long = "gain-ratio")]
    pub gain_ratio: Option<f64>,
    /// Exclusion radius around the source in metres.
    #[arg(long = "r-min")]
    pub r_min: Option<f64>,
    /// Zone threshold in dB (negative).
    #[arg(long = "threshold-db", allow_hyphen_values = true)]
    pub threshold_db: Option<f64>,
    /// 2-D grid "x_min,x_max,y_min,y_max,spacing" in metres.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Largest Δr of 1-D sweeps in metres.
    #[arg(long = "sweep-max")]
    pub sweep_max: Option<f64>,
    /// Δr step of 1-D sweeps in metres.
    #[arg(long = "sweep-step")]
    pub sweep_step: Option<f64>,
    /// Oracle RNG seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Oracle plane-wave directions.
    #[arg(long)]
    pub directions: Option<u64>,
    /// Oracle tolerance on max |analytic - oracle|.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Correlation kind for `corr`.
    #[arg(long, value_enum)]
    pub kind: Option<CorrKind>,
    /// Output CSV path (stdout when omitted; required by zone2d).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Contour CSV path for zone2d (default: <out stem>.contour.csv).
    #[arg(long = "contour-out")]
    pub contour_out: Option<PathBuf>,
}

/// Flat key-value config file; every key is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub signal: Option<String>,
    pub fs_hz: Option<f64>,
    pub m_points: Option<usize>,
    pub c_mps: Option<f64>,
    pub mode: Option<String>,
    pub r0: Option<String>,
    pub gain_ratio: Option<f64>,
    pub r_min: Option<f64>,
    pub threshold_db: Option<f64>,
    pub grid: Option<String>,
    pub sweep_max: Option<f64>,
    pub sweep_step: Option<f64>,
    pub seed: Option<u64>,
    pub n_directions: Option<u64>,
    pub tolerance: Option<f64>,
    pub kind: Option<CorrKind>,
    pub out: Option<PathBuf>,
    pub contour_out: Option<PathBuf>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("config file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }
}

/// Fully resolved configuration with every default materialised.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub signal_label: String,
    pub signal: SignalSpec,
    pub spectral_grid: SpectralGrid,
    pub c_mps: f64,
    pub mode: ControlMode,
    pub r0: Point,
    pub gain_ratio: f64,
    pub r_min: f64,
    pub threshold_db: f64,
    pub grid: GridSpec,
    pub sweep_max: f64,
    pub sweep_step: f64,
    pub seed: u64,
    pub n_directions: u64,
    pub tolerance: f64,
    pub kind: CorrKind,
    pub out: Option<PathBuf>,
    pub contour_out: Option<PathBuf>,
}

fn parse_floats(text: &str, what: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Config(format!("cannot parse {what} '{text}'")))
        })
        .collect()
}

pub fn parse_point(text: &str) -> Result<Point, CliError> {
    let p = match parse_floats(text, "point")?[..] {
        [x, y] => Point::xy(x, y),
        [x, y, z] => Point::new(x, y, z),
        _ => return Err(CliError::Config(format!("point '{text}' needs 2 or 3 coordinates"))),
    };
    Ok(p?)
}

pub fn parse_grid(text: &str) -> Result<GridSpec, CliError> {
    let [x_min, x_max, y_min, y_max, spacing] = parse_floats(text, "grid")?[..] else {
        return Err(CliError::Config(format!(
            "grid '{text}' needs x_min,x_max,y_min,y_max,spacing"
        )));
    };
    let grid = GridSpec {
        x_min,
        x_max,
        y_min,
        y_max,
        spacing,
    };
    grid.validate()?;
    Ok(grid)
}

fn fmt_grid(g: &GridSpec) -> String {
    format!("{},{},{},{},{}", g.x_min, g.x_max, g.y_min, g.y_max, g.spacing)
}

impl RunConfig {
    /// Merges defaults, the optional config file named by `args.config`,
    /// and the flags.
    pub fn resolve(args: &CliArgs) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        Self::merge(&file, args)
    }

    pub fn merge(file: &FileConfig, args: &CliArgs) -> Result<Self, CliError> {
        fn pick<T: Clone>(flag: &Option<T>, file: &Option<T>, default: T) -> T {
            flag.clone().or_else(|| file.clone()).unwrap_or(default)
        }

        let signal_label = pick(&args.signal, &file.signal, DEFAULT_SIGNAL.to_string());
        let signal = SignalSpec::from_str(&signal_label)?;
        let spectral_grid = SpectralGrid::new(
            pick(&args.fs, &file.fs_hz, DEFAULT_FS_HZ),
            pick(&args.dft_size, &file.m_points, DEFAULT_M_POINTS),
        )?;
        signal.validate(&spectral_grid)?;

        let mode = ControlMode::from_str(&pick(
            &args.mode,
            &file.mode,
            ControlMode::default().name().to_string(),
        ))?;
        let r0 = match args.r0.as_ref().or(file.r0.as_ref()) {
            Some(text) => parse_point(text)?,
            None => Point::xy(0.2, 0.0)?,
        };
        let grid = match args.grid.as_ref().or(file.grid.as_ref()) {
            Some(text) => parse_grid(text)?,
            None => GridSpec::default(),
        };

        let cfg = Self {
            signal_label,
            signal,
            spectral_grid,
            c_mps: pick(&args.c, &file.c_mps, DEFAULT_SPEED_OF_SOUND),
            mode,
            r0,
            gain_ratio: pick(&args.gain_ratio, &file.gain_ratio, DEFAULT_GAIN_RATIO),
            r_min: pick(&args.r_min, &file.r_min, DEFAULT_R_MIN),
            threshold_db: pick(&args.threshold_db, &file.threshold_db, DEFAULT_THRESHOLD_DB),
            grid,
            sweep_max: pick(&args.sweep_max, &file.sweep_max, DEFAULT_SWEEP_MAX),
            sweep_step: pick(&args.sweep_step, &file.sweep_step, DEFAULT_SWEEP_STEP),
            seed: pick(&args.seed, &file.seed, DEFAULT_SEED),
            n_directions: pick(&args.directions, &file.n_directions, DEFAULT_N_DIRECTIONS),
            tolerance: pick(&args.tolerance, &file.tolerance, DEFAULT_TOLERANCE),
            kind: pick(&args.kind, &file.kind, CorrKind::default()),
            out: args.out.clone().or_else(|| file.out.clone()),
            contour_out: args.contour_out.clone().or_else(|| file.contour_out.clone()),
        };
        cfg.scenario()?;
        if !(cfg.sweep_step > 0.0 && cfg.sweep_max >= 0.0 && cfg.sweep_max.is_finite()) {
            return Err(CliError::Config(format!(
                "sweep needs max >= 0 and step > 0, got {} / {}",
                cfg.sweep_max, cfg.sweep_step
            )));
        }
        if !cfg.threshold_db.is_finite() {
            return Err(CliError::Config("threshold must be finite".into()));
        }
        if !(cfg.tolerance > 0.0) {
            return Err(CliError::Config("tolerance must be positive".into()));
        }
        if cfg.n_directions == 0 {
            return Err(CliError::Config("directions must be at least 1".into()));
        }
        Ok(cfg)
    }

    pub fn scenario(&self) -> Result<Scenario, CliError> {
        Ok(Scenario::new(
            self.r0,
            self.c_mps,
            self.mode,
            self.gain_ratio,
            self.r_min,
        )?)
    }

    /// `Δr` values of 1-D sweeps: `0, step, 2·step, …` up to `sweep_max`.
    pub fn sweep(&self) -> Vec<f64> {
        let n = (self.sweep_max / self.sweep_step + 1e-9).floor() as usize;
        (0..=n).map(|i| i as f64 * self.sweep_step).collect()
    }

    /// `key=value` lines describing every resolved setting.
    pub fn echo(&self) -> Vec<String> {
        let r0 = if self.r0.z() == 0.0 {
            format!("{},{}", self.r0.x(), self.r0.y())
        } else {
            format!("{},{},{}", self.r0.x(), self.r0.y(), self.r0.z())
        };
        let path = |p: &Option<PathBuf>| p.as_ref().map_or("-".to_string(), |p| p.display().to_string());
        vec![
            format!("signal={} ({})", self.signal_label, self.signal),
            format!("fs_hz={}", self.spectral_grid.fs_hz()),
            format!("m_points={}", self.spectral_grid.m_points()),
            format!("c_mps={}", self.c_mps),
            format!("mode={}", self.mode),
            format!("r0={r0}"),
            format!("gain_ratio={}", self.gain_ratio),
            format!("r_min={}", self.r_min),
            format!("threshold_db={}", self.threshold_db),
            format!("grid={}", fmt_grid(&self.grid)),
            format!("sweep_max={}", self.sweep_max),
            format!("sweep_step={}", self.sweep_step),
            format!("seed={}", self.seed),
            format!("n_directions={}", self.n_directions),
            format!("tolerance={}", self.tolerance),
            format!("kind={}", self.kind),
            format!("out={}", path(&self.out)),
            format!("contour_out={}", path(&self.contour_out)),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_materialised() {
        let cfg = RunConfig::merge(&FileConfig::default(), &CliArgs::default()).unwrap();
        assert_eq!(cfg.signal_label, "tone300");
        assert_eq!(cfg.spectral_grid, SpectralGrid::default());
        assert_eq!(cfg.c_mps, 343.0);
        assert_eq!(cfg.grid, GridSpec::default());
        assert_eq!(cfg.sweep().len(), 501);
        assert_eq!(*cfg.sweep().last().unwrap(), 0.5);
        assert!(cfg.echo().iter().any(|l| l == "grid=0.05,0.45,-0.2,0.2,0.0025"));
    }

    #[test]
    fn flags_override_file_values() {
        let file = FileConfig::parse(
            r#"
            signal = "bpf"
            c_mps = 340.0
            r0 = "0.3,0.1"
            "#,
        )
        .unwrap();
        let args = CliArgs {
            c: Some(343.0),
            ..CliArgs::default()
        };
        let cfg = RunConfig::merge(&file, &args).unwrap();
        assert_eq!(cfg.signal_label, "bpf");
        assert_eq!(cfg.c_mps, 343.0);
        assert_eq!(cfg.r0, Point::xy(0.3, 0.1).unwrap());
    }

    #[test]
    fn bad_inputs_are_config_errors() {
        assert!(FileConfig::parse("colour = 3").is_err());
        let cases = [
            CliArgs { signal: Some("pink".into()), ..Default::default() },
            CliArgs { dft_size: Some(1001), ..Default::default() },
            CliArgs { grid: Some("0,1,0".into()), ..Default::default() },
            CliArgs { r0: Some("0,0".into()), ..Default::default() },
            CliArgs { mode: Some("mid-field".into()), ..Default::default() },
            CliArgs { sweep_step: Some(0.0), ..Default::default() },
            CliArgs { signal: Some("lp:4:1500".into()), ..Default::default() },
        ];
        for args in cases {
            let err = RunConfig::merge(&FileConfig::default(), &args).unwrap_err();
            assert_eq!(err.exit_code(), 1, "{args:?}");
        }
    }
}
