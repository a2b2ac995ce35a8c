//! The five report commands. Each builds its CSV documents in memory so the
//! output is identical whether it goes to a file or to stdout.

use std::path::{Path, PathBuf};

use clap::Parser;
use quietzone::oracle::oracle_correlation_with_table;
use quietzone::zones::attenuation_curve;
use quietzone::{
    attenuation_db_floored, attenuation_field_2d, broadband_correlation, contour_extent,
    cross_correlation, extract_iso_contour, psd_report, synthesize_psd, AutocorrelationTable,
    CorrelationQuery, OracleConfig, PowerSpectrum, SignalSpec, ZoneSearch,
};

use crate::config::{CliArgs, CorrKind, RunConfig};
use crate::csv::{fmt_num, CsvDoc};
use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "quietzone", version, about = "Zones of quiet in broadband diffuse sound fields")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Subcommand,
}

#[derive(Debug, Clone, clap::Subcommand)]
pub enum Subcommand {
    /// One-sided power spectral density of the signal: freq_hz,psd.
    Psd(#[command(flatten)] CliArgs),
    /// Spatial auto- or cross-correlation sweep: delta_r_m,rho.
    Corr(#[command(flatten)] CliArgs),
    /// 1-D attenuation sweep and zone width: delta_r_m,epsilon,attenuation_db.
    Zone1d(#[command(flatten)] CliArgs),
    /// 2-D attenuation field (x_m,y_m,epsilon) and its iso-contour.
    Zone2d(#[command(flatten)] CliArgs),
    /// Direction-sampling oracle against the analytic correlation.
    Oracle(#[command(flatten)] CliArgs),
}

impl Subcommand {
    pub fn name(&self) -> &'static str {
        match self {
            Subcommand::Psd(_) => "psd",
            Subcommand::Corr(_) => "corr",
            Subcommand::Zone1d(_) => "zone1d",
            Subcommand::Zone2d(_) => "zone2d",
            Subcommand::Oracle(_) => "oracle",
        }
    }

    pub fn args(&self) -> &CliArgs {
        match self {
            Subcommand::Psd(a)
            | Subcommand::Corr(a)
            | Subcommand::Zone1d(a)
            | Subcommand::Zone2d(a)
            | Subcommand::Oracle(a) => a,
        }
    }
}

/// Documents produced by one command. A `None` path means stdout.
#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutput {
    pub files: Vec<(Option<PathBuf>, String)>,
    pub summary: Vec<String>,
    /// Set when a validation tolerance was exceeded (exit code 2).
    pub failure: Option<String>,
}

impl CommandOutput {
    fn single(path: Option<PathBuf>, doc: CsvDoc, summary: Vec<String>) -> Self {
        Self {
            files: vec![(path, doc.into_string())],
            summary,
            failure: None,
        }
    }

    /// Writes every document and returns the process exit code.
    pub fn emit(&self) -> Result<i32, CliError> {
        for (path, text) in &self.files {
            match path {
                Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io {
                    path: p.display().to_string(),
                    source,
                })?,
                None => print!("{text}"),
            }
        }
        for line in &self.summary {
            eprintln!("{line}");
        }
        Ok(match &self.failure {
            Some(msg) => {
                eprintln!("validation failed: {msg}");
                2
            }
            None => 0,
        })
    }
}

fn header(command: &str, cfg: &RunConfig) -> CsvDoc {
    let mut doc = CsvDoc::new();
    doc.comment(format!("quietzone {command}"));
    for line in cfg.echo() {
        doc.comment(line);
    }
    doc
}

fn spectrum(cfg: &RunConfig) -> Result<PowerSpectrum, CliError> {
    Ok(synthesize_psd(&cfg.signal, &cfg.spectral_grid)?)
}

/// Resolves the configuration for `sub` and runs it.
pub fn run(sub: &Subcommand) -> Result<CommandOutput, CliError> {
    let cfg = RunConfig::resolve(sub.args())?;
    run_with(sub, &cfg)
}

pub fn run_with(sub: &Subcommand, cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    match sub {
        Subcommand::Psd(_) => cmd_psd(cfg),
        Subcommand::Corr(_) => cmd_corr(cfg),
        Subcommand::Zone1d(_) => cmd_zone1d(cfg),
        Subcommand::Zone2d(_) => cmd_zone2d(cfg),
        Subcommand::Oracle(_) => cmd_oracle(cfg),
    }
}

pub fn cmd_psd(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let psd = spectrum(cfg)?;
    let mut doc = header("psd", cfg);
    doc.columns(&["freq_hz", "psd"]);
    for (f, s) in psd_report(&psd) {
        doc.row(&[f, s]);
    }
    Ok(CommandOutput::single(cfg.out.clone(), doc, vec![]))
}

pub fn cmd_corr(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let psd = spectrum(cfg)?;
    let c = cfg.c_mps;
    let mut doc = header("corr", cfg);
    doc.columns(&["delta_r_m", "rho"]);
    for dr in cfg.sweep() {
        let rho = match cfg.kind {
            CorrKind::Auto => broadband_correlation(&psd, &CorrelationQuery::new(dr, 0.0, c)?),
            CorrKind::Cross => cross_correlation(&psd, dr, dr, 1.0, 1.0, c)?,
        };
        doc.row(&[dr, rho]);
    }
    Ok(CommandOutput::single(cfg.out.clone(), doc, vec![]))
}

fn tone_frequency(cfg: &RunConfig) -> Option<f64> {
    match cfg.signal {
        SignalSpec::PureTone { freq_hz } => {
            let grid = cfg.spectral_grid;
            Some(grid.frequency(grid.nearest_bin(freq_hz)))
        }
        SignalSpec::FilteredNoise { .. } => None,
    }
}

pub fn cmd_zone1d(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    if cfg.threshold_db >= 0.0 {
        return Err(CliError::Config(format!(
            "zone threshold must be negative, got {} dB",
            cfg.threshold_db
        )));
    }
    let psd = spectrum(cfg)?;
    let scenario = cfg.scenario()?;
    let threshold = 10f64.powf(cfg.threshold_db / 10.0);

    let mut summary = Vec::new();
    match quietzone::zone_width(&psd, &scenario, threshold, &ZoneSearch::default()) {
        Ok(width) => {
            summary.push(format!("zone_width_m={}", fmt_num(width)));
            if let Some(f) = tone_frequency(cfg) {
                let lambda = cfg.c_mps / f;
                summary.push(format!(
                    "zone_width_wavelengths={} (lambda={} m at {} Hz)",
                    fmt_num(width / lambda),
                    fmt_num(lambda),
                    fmt_num(f)
                ));
            }
        }
        Err(quietzone::Error::NoCrossing { max_distance, .. }) => summary.push(format!(
            "zone_width_m=none (no crossing of {} dB within {} m)",
            cfg.threshold_db, max_distance
        )),
        Err(e) => return Err(e.into()),
    }

    let mut doc = header("zone1d", cfg);
    for line in &summary {
        doc.comment(line);
    }
    doc.columns(&["delta_r_m", "epsilon", "attenuation_db"]);
    for d in cfg.sweep() {
        let eps = attenuation_curve(&psd, &scenario, d)?;
        doc.row(&[d, eps, attenuation_db_floored(eps)]);
    }
    Ok(CommandOutput::single(cfg.out.clone(), doc, summary))
}

/// Default contour path: `<dir>/<stem>.contour.csv` next to the field file.
pub fn default_contour_path(field: &Path) -> PathBuf {
    let stem = field.file_stem().map_or("zone2d".into(), |s| s.to_string_lossy().into_owned());
    field.with_file_name(format!("{stem}.contour.csv"))
}

pub fn cmd_zone2d(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let field_path = cfg
        .out
        .clone()
        .ok_or_else(|| CliError::Config("zone2d needs --out for the field file".into()))?;
    let contour_path = cfg
        .contour_out
        .clone()
        .unwrap_or_else(|| default_contour_path(&field_path));
    let cfg = &RunConfig {
        contour_out: Some(contour_path.clone()),
        ..cfg.clone()
    };
    let psd = spectrum(cfg)?;
    let scenario = cfg.scenario()?;
    let field = attenuation_field_2d(&psd, &scenario, &cfg.grid)?;
    let contours = extract_iso_contour(&field, cfg.threshold_db)?;

    let r0 = scenario.cancellation_point();
    let geometry = [
        "source=0,0".to_string(),
        format!("cancellation_point={},{}", r0.x(), r0.y()),
        format!("level_db={}", cfg.threshold_db),
    ];

    let mut summary = vec![format!(
        "contours={} closed={}",
        contours.polylines.len(),
        contours.polylines.iter().filter(|p| p.closed).count()
    )];
    if contours.is_empty() {
        summary.push(format!(
            "notice: no {} dB contour inside the grid; contour file is empty",
            cfg.threshold_db
        ));
    } else {
        match contour_extent(&contours) {
            Ok(extent) => {
                let largest = contours.largest_closed().expect("closed contour");
                summary.push(format!("max_diameter_m={}", fmt_num(extent.max_diameter)));
                summary.push(format!("area_m2={}", fmt_num(extent.area)));
                summary.push(format!(
                    "axial_extent_m={}",
                    fmt_num(largest.span_along(r0.x(), r0.y()))
                ));
            }
            Err(quietzone::Error::NoClosedContour) => {
                summary.push("notice: no closed contour; extent undefined".into());
            }
            Err(e) => return Err(e.into()),
        }
    }

    let mut field_doc = header("zone2d", cfg);
    for line in geometry.iter().chain(&summary) {
        field_doc.comment(line);
    }
    field_doc.columns(&["x_m", "y_m", "epsilon"]);
    for (x, y, eps) in field.iter() {
        field_doc.row(&[x, y, eps]);
    }

    let mut contour_doc = header("zone2d", cfg);
    for line in geometry.iter().chain(&summary) {
        contour_doc.comment(line);
    }
    contour_doc.columns(&["polyline_id", "vertex_id", "x_m", "y_m"]);
    for (pid, poly) in contours.polylines.iter().enumerate() {
        for (vid, (x, y)) in poly.vertices.iter().enumerate() {
            contour_doc.id_row(&[pid, vid], &[*x, *y]);
        }
    }

    Ok(CommandOutput {
        files: vec![
            (Some(field_path), field_doc.into_string()),
            (Some(contour_path), contour_doc.into_string()),
        ],
        summary,
        failure: None,
    })
}

pub fn cmd_oracle(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let psd = spectrum(cfg)?;
    let c = cfg.c_mps;
    let oracle = OracleConfig::new(cfg.n_directions, cfg.seed)?;
    let sweep = cfg.sweep();
    let table = AutocorrelationTable::new(&psd, sweep.last().copied().unwrap_or(0.0) / c)?;

    let mut rows = Vec::with_capacity(sweep.len());
    let mut max_err = 0.0f64;
    for dr in sweep {
        let analytic = broadband_correlation(&psd, &CorrelationQuery::new(dr, 0.0, c)?);
        let estimate = oracle_correlation_with_table(&table, dr, 0.0, c, &oracle)?;
        let err = (analytic - estimate).abs();
        max_err = max_err.max(err);
        rows.push([dr, analytic, estimate, err]);
    }

    let summary = vec![format!(
        "max_abs_err={} tolerance={}",
        fmt_num(max_err),
        cfg.tolerance
    )];
    let mut doc = header("oracle", cfg);
    doc.comment("rng=ChaCha20 seed_from_u64");
    doc.comment(&summary[0]);
    doc.columns(&["delta_r_m", "rho_analytic", "rho_oracle", "abs_err"]);
    for row in &rows {
        doc.row(row);
    }
    let failure = (max_err > cfg.tolerance).then(|| {
        format!(
            "max |analytic - oracle| = {} exceeds {}",
            fmt_num(max_err),
            cfg.tolerance
        )
    });
    Ok(CommandOutput {
        failure,
        ..CommandOutput::single(cfg.out.clone(), doc, summary)
    })
}

/// Parses `argv`, runs the command and writes its outputs. Returns the
/// process exit code (0 ok, 1 configuration error, 2 validation failure).
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli.command).and_then(|out| out.emit()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("quietzone {}: {e}", cli.command.name());
            e.exit_code()
        }
    }
}
