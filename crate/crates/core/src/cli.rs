//! Command-line front-end.
//!
//! Every subcommand reads an optional JSON config, writes a JSON (or flat
//! CSV) report to `--out` or stdout, and maps errors to exit codes:
//! 0 success, 1 validation error, 2 numerical failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::action::ActionBinding;
use crate::alignment::{calibrate, AlignmentResult, NaturalDistances, ObjectiveSpec, OptimizerConfig, FULL_CIRCLE};
use crate::detector::DetectorGeometry;
use crate::error::{Error, Result};
use crate::group::{quotient_spec, GaugeGroupSpec};
use crate::image_io::{read_image, write_image, ImageFormat};
use crate::kernel::{
    compute_kernel_analytic, compute_kernel_numeric, enumerate_detector_types, misaligned_line_kernel_demo, seeded_probes,
    KernelReport, TiltedLineReport, DEFAULT_KERNEL_TOL, DEFAULT_PROBE_SEED,
};
use crate::metrics::{natural_distance, parse_k, DistanceForm, MetricSpec, WeightVector};
use crate::scenario::{build_measurement, build_plan, run_scenario, ScenarioConfig};

#[derive(Debug, Parser)]
#[command(name = "natcalib", version, about = "Natural-coordinate calibration of detector images")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (or directory for `simulate`); stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Pixel norm exponent, a real >= 1 or `inf`.
    #[arg(long, global = true)]
    k: Option<String>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate the scenario plan I and measurement T.
    Simulate,
    /// Recover natural coordinates of a measured image against a reference.
    Calibrate,
    /// Kernel of the action for a detector geometry.
    AnalyzeKernel,
    /// List the coordinate normal subgroups of a gauge group.
    EnumerateDetectors,
    /// Natural distance of a coordinate vector.
    Distance,
    /// Run the end-to-end linac scenario.
    DemoLinac,
}

/// `calibrate` config. Image paths are relative to the config file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct CalibrateConfig {
    reference: PathBuf,
    measured: PathBuf,
    #[serde(default = "GaugeGroupSpec::linac")]
    spec: GaugeGroupSpec,
    #[serde(default = "ActionBinding::linac")]
    binding: ActionBinding,
    /// Drop factors the detector cannot see before searching.
    #[serde(default = "yes")]
    quotient_kernel: bool,
    #[serde(default)]
    search_bounds: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    weights: Option<Vec<f64>>,
    #[serde(default)]
    metric: MetricSpec,
    #[serde(default)]
    form: DistanceForm,
    #[serde(default)]
    optimizer: OptimizerConfig,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct KernelConfig {
    geometry: DetectorGeometry,
    #[serde(default = "GaugeGroupSpec::linac")]
    spec: GaugeGroupSpec,
    #[serde(default = "ActionBinding::linac")]
    binding: ActionBinding,
    #[serde(default = "default_kernel_tol")]
    tol: f64,
    /// Tilt used for the misaligned-line analysis on line geometries.
    #[serde(default = "default_tilt")]
    tilt_angle: f64,
}

fn default_kernel_tol() -> f64 {
    DEFAULT_KERNEL_TOL
}

fn default_tilt() -> f64 {
    0.1
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            geometry: DetectorGeometry::cylinder(64, 64, 1.0),
            spec: GaugeGroupSpec::linac(),
            binding: ActionBinding::linac(),
            tol: DEFAULT_KERNEL_TOL,
            tilt_angle: default_tilt(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct KernelAnalysis {
    geometry: DetectorGeometry,
    factors: Vec<String>,
    probe_seed: u64,
    analytic: KernelReport,
    numeric: KernelReport,
    agree: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    tilted_line: Option<TiltedLineReport>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct CatalogConfig {
    #[serde(default = "GaugeGroupSpec::linac")]
    spec: GaugeGroupSpec,
}

impl Default for CatalogConfig {
    fn default() -> Self {
        Self { spec: GaugeGroupSpec::linac() }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct DistanceConfig {
    coords: Vec<f64>,
    #[serde(default)]
    weights: Option<Vec<f64>>,
    #[serde(default)]
    form: DistanceForm,
}

#[derive(Debug, Clone, Serialize)]
struct DistanceReport {
    coords: Vec<f64>,
    weights: WeightVector,
    form: DistanceForm,
    d_nat: f64,
    all_forms: NaturalDistances,
}

#[derive(Debug, Clone, Serialize)]
struct SimulateReport {
    config: ScenarioConfig,
    plan: String,
    measured: String,
    plan_peak: f64,
    measured_peak: f64,
}

/// Parses `argv` (program name first), runs one subcommand and returns the
/// process exit code.
pub fn cli_dispatch<S: AsRef<str>>(argv: &[S]) -> i32 {
    let cli = match Cli::try_parse_from(argv.iter().map(|s| s.as_ref())) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    limit_threads();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn limit_threads() {
    if let Some(n) = std::env::var("NATCALIB_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        if n > 0 {
            // fails harmlessly if a pool already exists
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn run(cli: &Cli) -> Result<i32> {
    match cli.command {
        Command::Simulate => simulate(cli),
        Command::Calibrate => calibrate_cmd(cli),
        Command::AnalyzeKernel => analyze_kernel(cli),
        Command::EnumerateDetectors => enumerate(cli),
        Command::Distance => distance(cli),
        Command::DemoLinac => demo_linac(cli),
    }
}

fn load<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))
}

fn load_or_default<T: for<'de> Deserialize<'de> + Default>(cli: &Cli) -> Result<T> {
    cli.config.as_deref().map_or_else(|| Ok(T::default()), load)
}

fn metric_override(cli: &Cli) -> Result<Option<MetricSpec>> {
    cli.k.as_deref().map(|k| MetricSpec::new(parse_k(k)?)).transpose()
}

fn scenario_config(cli: &Cli) -> Result<ScenarioConfig> {
    let mut cfg: ScenarioConfig = load_or_default(cli)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(m) = metric_override(cli)? {
        cfg.metric = m;
    }
    Ok(cfg)
}

fn emit<T: Serialize>(cli: &Cli, report: &T) -> Result<()> {
    let value = serde_json::to_value(report)?;
    let mut text = match cli.format {
        Format::Json => serde_json::to_string_pretty(&value)?,
        Format::Csv => to_csv(&value),
    };
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match &cli.out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

/// `key,value` lines with dotted paths; an array of flat objects becomes a
/// table instead.
fn to_csv(value: &Value) -> String {
    if let Some(rows) = table_rows(value) {
        return rows;
    }
    let mut out = String::from("key,value\n");
    flatten(value, String::new(), &mut out);
    out
}

fn table_rows(value: &Value) -> Option<String> {
    let entries = value.as_object()?.get("entries")?.as_array()?;
    let first = entries.first()?.as_object()?;
    let cols: Vec<&String> = first.keys().collect();
    let mut out = cols.iter().map(|c| c.as_str()).collect::<Vec<_>>().join(",");
    out.push('\n');
    for e in entries {
        let cells: Vec<String> = cols.iter().map(|c| csv_cell(e.get(c.as_str()).unwrap_or(&Value::Null))).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    Some(out)
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::String(s) => quote(s),
        Value::Array(items) => quote(&items.iter().map(|i| i.as_str().map_or_else(|| i.to_string(), String::from)).collect::<Vec<_>>().join(" ")),
        other => other.to_string(),
    }
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn flatten(value: &Value, prefix: String, out: &mut String) {
    let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match value {
        Value::Object(map) => map.iter().for_each(|(k, v)| flatten(v, join(k), out)),
        Value::Array(items) => items.iter().enumerate().for_each(|(i, v)| flatten(v, join(&i.to_string()), out)),
        leaf => {
            out.push_str(&quote(&prefix));
            out.push(',');
            out.push_str(&csv_cell(leaf));
            out.push('\n');
        }
    }
}

fn simulate(cli: &Cli) -> Result<i32> {
    let cfg = scenario_config(cli)?;
    let plan = build_plan(&cfg)?;
    let measured = build_measurement(&cfg, &plan)?;
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)?;
    let (format, ext) = match cli.format {
        Format::Json => (ImageFormat::Json, "json"),
        Format::Csv => (ImageFormat::Csv, "csv"),
    };
    let plan_path = dir.join(format!("plan.{ext}"));
    let measured_path = dir.join(format!("measured.{ext}"));
    write_image(&plan_path, &plan, format)?;
    write_image(&measured_path, &measured, format)?;
    let report = SimulateReport {
        config: cfg,
        plan: plan_path.display().to_string(),
        measured: measured_path.display().to_string(),
        plan_peak: plan.max(),
        measured_peak: measured.max(),
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(0)
}

fn calibrate_cmd(cli: &Cli) -> Result<i32> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| Error::InvalidConfig("calibrate needs --config".into()))?;
    let cfg: CalibrateConfig = load(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let reference = read_image(&base.join(&cfg.reference))?;
    let measured = read_image(&base.join(&cfg.measured))?;
    if reference.geometry() != measured.geometry() {
        return Err(Error::GeometryMismatch);
    }
    let full = Arc::new(cfg.spec);
    let spec = if cfg.quotient_kernel {
        let kernel = compute_kernel_analytic(&full, &cfg.binding, reference.geometry())?;
        Arc::new(quotient_spec(&full, &kernel.kernel_factors)?)
    } else {
        Arc::clone(&full)
    };
    let pick = |all: &[f64]| -> Vec<f64> {
        spec.names().iter().map(|n| all[full.index_of(n).expect("subset")]).collect()
    };
    let bounds: Vec<[f64; 2]> = match &cfg.search_bounds {
        Some(b) if b.len() == full.dim() => spec.names().iter().map(|n| b[full.index_of(n).expect("subset")]).collect(),
        Some(b) => b.clone(),
        None => spec.factors().iter().map(|f| f.bounds.unwrap_or(if f.kind.is_periodic() { FULL_CIRCLE } else { [-0.2, 0.2] })).collect(),
    };
    let weights = match &cfg.weights {
        Some(w) if w.len() == full.dim() && spec.dim() != full.dim() => WeightVector::new(pick(w))?,
        Some(w) => WeightVector::new(w.clone())?,
        None => WeightVector::uniform(spec.dim()),
    };
    let metric = metric_override(cli)?.unwrap_or(cfg.metric);
    let obj = ObjectiveSpec::new(reference, measured, spec, cfg.binding, metric, bounds)?;
    let mut result: AlignmentResult = calibrate(&obj, &cfg.optimizer, &weights, cfg.form)?;
    result.elapsed_ms = None;
    emit(cli, &result)?;
    Ok(0)
}

fn analyze_kernel(cli: &Cli) -> Result<i32> {
    let cfg: KernelConfig = load_or_default(cli)?;
    let seed = cli.seed.unwrap_or(DEFAULT_PROBE_SEED);
    let spec = Arc::new(cfg.spec);
    let analytic = compute_kernel_analytic(&spec, &cfg.binding, &cfg.geometry)?;
    let probes = seeded_probes(&cfg.geometry, seed)?;
    let numeric = compute_kernel_numeric(&spec, &cfg.binding, &cfg.geometry, &probes, cfg.tol)?;
    let tilted_line = match cfg.geometry {
        DetectorGeometry::Line { .. } => Some(misaligned_line_kernel_demo(cfg.tilt_angle, &spec, &cfg.geometry, &cfg.binding, None)?),
        _ => None,
    };
    let agree = analytic.kernel_factors == numeric.kernel_factors
        && analytic.rank == numeric.rank
        && analytic.indistinguishable_groups == numeric.indistinguishable_groups;
    let report = KernelAnalysis {
        geometry: cfg.geometry,
        factors: spec.names().into_iter().map(String::from).collect(),
        probe_seed: seed,
        analytic,
        numeric,
        agree,
        tilted_line,
    };
    emit(cli, &report)?;
    Ok(0)
}

fn enumerate(cli: &Cli) -> Result<i32> {
    let cfg: CatalogConfig = load_or_default(cli)?;
    emit(cli, &enumerate_detector_types(&cfg.spec)?)?;
    Ok(0)
}

fn distance(cli: &Cli) -> Result<i32> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| Error::InvalidConfig("distance needs --config with a coords file".into()))?;
    let cfg: DistanceConfig = load(path)?;
    let weights = match cfg.weights {
        Some(w) => WeightVector::new(w)?,
        None => WeightVector::uniform(cfg.coords.len()),
    };
    let form = match metric_override(cli)? {
        Some(metric) => DistanceForm::GeneralNorm { metric },
        None => cfg.form,
    };
    let report = DistanceReport {
        d_nat: natural_distance(&cfg.coords, &weights, form)?,
        all_forms: NaturalDistances::compute(&cfg.coords, &weights)?,
        coords: cfg.coords,
        weights,
        form,
    };
    emit(cli, &report)?;
    Ok(0)
}

fn demo_linac(cli: &Cli) -> Result<i32> {
    let cfg = scenario_config(cli)?;
    let report = run_scenario(&cfg)?;
    emit(cli, &report)?;
    Ok(if report.pass { 0 } else { 2 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(cli_dispatch(&["natcalib"]), 1);
        assert_eq!(cli_dispatch(&["natcalib", "bogus"]), 1);
        assert_eq!(cli_dispatch(&["natcalib", "--help"]), 0);
    }

    #[test]
    fn missing_config_is_validation_error() {
        assert_eq!(cli_dispatch(&["natcalib", "calibrate"]), 1);
        assert_eq!(cli_dispatch(&["natcalib", "distance", "--config", "/nonexistent.json"]), 1);
    }

    #[test]
    fn csv_flattening() {
        let v: Value = serde_json::json!({"a": {"b": [1, 2]}, "s": "x,y"});
        assert_eq!(to_csv(&v), "key,value\na.b.0,1\na.b.1,2\ns,\"x,y\"\n");
        let t: Value = serde_json::json!({"entries": [{"n": ["a", "b"], "v": []}]});
        assert_eq!(to_csv(&t), "n,v\na b,\n");
    }
}
