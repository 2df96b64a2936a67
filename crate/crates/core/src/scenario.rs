//! End-to-end linac therapy-plan check.
//!
//! A plan `I` is produced by sweeping a single Gaussian beam spot along a
//! helical curve in the gauge group. The measurement `T` is the plan moved
//! by an injected misalignment `g`, plus optional clamped Gaussian noise.
//! Calibration should recover the correction `g⁻¹` on the detector's
//! visible quotient.

use std::f64::consts::TAU;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::action::{apply, ActionBinding};
use crate::alignment::{calibrate, AlignmentResult, NaturalDistances, ObjectiveSpec, OptimizerConfig, FULL_CIRCLE};
use crate::detector::{DetectorGeometry, Image};
use crate::error::{Error, Result};
use crate::group::{arc_difference, evaluate_curve, inverse, quotient_spec, GaugeGroupSpec, GroupCurve, GroupElement};
use crate::kernel::{compute_kernel_analytic, KernelReport};
use crate::metrics::{DistanceForm, MetricSpec, WeightVector};
use crate::plan::{generate_gaussian_plan, GaussianSpot};

/// Helical sweep of one beam spot. The curve runs from `(phi_start,
/// z_start, amplitude_start)` to `(phi_end, z_end, amplitude_end)`; the
/// amplitude ramp is linear in log-intensity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepPlan {
    pub phi_start: f64,
    pub phi_end: f64,
    pub z_start: f64,
    pub z_end: f64,
    pub amplitude_start: f64,
    pub amplitude_end: f64,
    pub spot_width: f64,
    pub n_spots: usize,
}

impl Default for SweepPlan {
    fn default() -> Self {
        Self {
            phi_start: 0.0,
            phi_end: 5.2,
            z_start: 0.35,
            z_end: 0.65,
            amplitude_start: 0.6,
            amplitude_end: 1.4,
            spot_width: 0.1,
            n_spots: 48,
        }
    }
}

impl SweepPlan {
    /// The sweep as a curve in the `{phi, z, c, i}` group, with knots close
    /// enough that every segment follows the intended arc.
    pub fn curve(&self) -> Result<GroupCurve> {
        if !(self.amplitude_start > 0.0 && self.amplitude_end > 0.0) {
            return Err(Error::BadSpotParameters("sweep amplitudes must be positive".into()));
        }
        let spec = Arc::new(GaugeGroupSpec::linac());
        let span = self.phi_end - self.phi_start;
        let knots = ((span.abs() / 1.0).ceil() as usize).max(1);
        let (la, lb) = (self.amplitude_start.ln(), self.amplitude_end.ln());
        let samples = (0..=knots)
            .map(|k| {
                let u = k as f64 / knots as f64;
                let g = GroupElement::new(
                    Arc::clone(&spec),
                    vec![
                        self.phi_start + u * span,
                        self.z_start + u * (self.z_end - self.z_start),
                        0.0,
                        la + u * (lb - la),
                    ],
                )?;
                Ok((u, g))
            })
            .collect::<Result<Vec<_>>>()?;
        GroupCurve::new(samples)
    }

    /// Spots obtained by moving a unit template spot along the curve.
    pub fn spots(&self) -> Result<Vec<GaussianSpot>> {
        let curve = self.curve()?;
        let n = self.n_spots.max(1);
        (0..n)
            .map(|k| {
                let t = if n == 1 { 0.0 } else { k as f64 / (n - 1) as f64 };
                let g = evaluate_curve(&curve, t)?;
                let c = g.coords();
                Ok(GaussianSpot {
                    phi: c[0],
                    z: c[1],
                    amplitude: c[3].exp(),
                    width: self.spot_width,
                })
            })
            .collect()
    }
}

/// Injected device misalignment in linac coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Perturbation {
    pub phi: f64,
    pub z: f64,
    pub c: f64,
    pub log_i: f64,
}

impl Default for Perturbation {
    fn default() -> Self {
        Self {
            phi: 0.49,
            z: 0.05,
            c: 0.0,
            log_i: 1.1f64.ln(),
        }
    }
}

impl Perturbation {
    pub fn identity() -> Self {
        Self { phi: 0.0, z: 0.0, c: 0.0, log_i: 0.0 }
    }

    pub fn as_vec(&self) -> Vec<f64> {
        vec![self.phi, self.z, self.c, self.log_i]
    }
}

/// Pass/fail tolerance per linac factor, in canonical units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub phi: f64,
    pub z: f64,
    pub c: f64,
    pub log_i: f64,
}

impl Tolerances {
    /// One pixel in φ and z, 0.01 in scale, 0.005 in log-intensity.
    pub fn for_geometry(geometry: &DetectorGeometry) -> Self {
        let phi = match *geometry {
            DetectorGeometry::Cylinder { n_phi, .. } => TAU / n_phi as f64,
            _ => TAU / 64.0,
        };
        Self {
            phi,
            z: geometry.axial_pitch(),
            c: 0.01,
            log_i: 0.005,
        }
    }

    pub fn get(&self, name: &str) -> f64 {
        match name {
            "phi" => self.phi,
            "z" => self.z,
            "c" => self.c,
            _ => self.log_i,
        }
    }

    pub fn scaled(&self, f: f64) -> Self {
        Self {
            phi: self.phi * f,
            z: self.z * f,
            c: self.c * f,
            log_i: self.log_i * f,
        }
    }
}

/// Scenario inputs. Every numeric default is an implementer choice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub geometry: DetectorGeometry,
    pub sweep: SweepPlan,
    /// Extra spots added on top of the sweep.
    pub extra_spots: Vec<GaussianSpot>,
    pub perturbation: Perturbation,
    /// Standard deviation of additive Gaussian noise; clamped at zero after.
    pub noise_sigma: f64,
    pub metric: MetricSpec,
    /// `[w_phi, w_z, w_c, w_i]`, normalized on use.
    pub weights: Vec<f64>,
    pub form: DistanceForm,
    /// `[phi, z, c, log_i]` search intervals.
    pub search_bounds: Vec<[f64; 2]>,
    pub optimizer: OptimizerConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            geometry: DetectorGeometry::cylinder(64, 64, 1.0),
            sweep: SweepPlan::default(),
            extra_spots: vec![],
            perturbation: Perturbation::default(),
            noise_sigma: 0.0,
            metric: MetricSpec::l2(),
            weights: vec![0.25; 4],
            form: DistanceForm::Quadratic,
            search_bounds: default_search_bounds(),
            optimizer: OptimizerConfig::default(),
            tolerances: None,
            seed: 0,
        }
    }
}

/// Full circle in φ, ±0.15 in z, ±0.08 in c, ±0.3 in log-intensity.
pub fn default_search_bounds() -> Vec<[f64; 2]> {
    vec![FULL_CIRCLE, [-0.15, 0.15], [-0.08, 0.08], [-0.3, 0.3]]
}

/// Recovery error of one factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorCheck {
    pub factor: String,
    pub injected: f64,
    pub expected_correction: f64,
    pub recovered_correction: f64,
    pub error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub note: String,
    pub config: ScenarioConfig,
    pub plan_peak: f64,
    pub kernel: KernelReport,
    pub visible_factors: Vec<String>,
    pub alignment: AlignmentResult,
    pub d_nat: NaturalDistances,
    pub checks: Vec<FactorCheck>,
    pub pass: bool,
}

/// Reference plan for a config.
pub fn build_plan(cfg: &ScenarioConfig) -> Result<Image> {
    let mut spots = cfg.sweep.spots()?;
    spots.extend(cfg.extra_spots.iter().copied());
    generate_gaussian_plan(&cfg.geometry, &spots)
}

/// `T = g.I` plus clamped noise.
pub fn build_measurement(cfg: &ScenarioConfig, plan: &Image) -> Result<Image> {
    let spec = Arc::new(GaugeGroupSpec::linac());
    let g = GroupElement::new(spec, cfg.perturbation.as_vec())?;
    let moved = apply(&g, plan, &ActionBinding::linac())?;
    if cfg.noise_sigma == 0.0 {
        return Ok(moved);
    }
    let normal = Normal::new(0.0, cfg.noise_sigma).map_err(|e| Error::InvalidConfig(format!("noise sigma: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let noise: Vec<f64> = (0..moved.values().len()).map(|_| normal.sample(&mut rng)).collect();
    moved.with_noise_clamped(&noise)
}

fn validate(cfg: &ScenarioConfig) -> Result<()> {
    cfg.geometry.validate()?;
    if !(cfg.noise_sigma >= 0.0 && cfg.noise_sigma.is_finite()) {
        return Err(Error::InvalidConfig("noise_sigma must be finite and >= 0".into()));
    }
    if cfg.weights.len() != 4 {
        return Err(Error::InvalidWeights("expected four weights [w_phi, w_z, w_c, w_i]".into()));
    }
    if cfg.search_bounds.len() != 4 {
        return Err(Error::InvalidConfig("expected four search intervals [phi, z, c, log_i]".into()));
    }
    Ok(())
}

pub const SCENARIO_NOTE: &str =
    "synthetic linac plan; geometry, sweep, doses, bounds and tolerances are implementer-chosen defaults";

/// Generates the plan and measurement, calibrates on the visible quotient
/// and checks the recovered correction against `g⁻¹`.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioReport> {
    validate(cfg)?;
    let full = Arc::new(GaugeGroupSpec::linac());
    let binding = ActionBinding::linac();
    let plan = build_plan(cfg)?;
    let measured = build_measurement(cfg, &plan)?;

    let kernel = compute_kernel_analytic(&full, &binding, &cfg.geometry)?;
    let visible = Arc::new(quotient_spec(&full, &kernel.kernel_factors)?);
    let keep: Vec<usize> = visible.names().iter().map(|n| full.index_of(n).expect("subset")).collect();
    let bounds: Vec<[f64; 2]> = keep.iter().map(|&j| cfg.search_bounds[j]).collect();
    let weights = WeightVector::new(keep.iter().map(|&j| cfg.weights[j]).collect())?;

    let obj = ObjectiveSpec::new(plan.clone(), measured, Arc::clone(&visible), binding, cfg.metric, bounds)?;
    let mut alignment = calibrate(&obj, &cfg.optimizer, &weights, cfg.form)?;
    alignment.elapsed_ms = None;

    let g = GroupElement::new(Arc::clone(&full), cfg.perturbation.as_vec())?;
    let expected = inverse(&g)?.signed_coords();
    let tolerances = cfg.tolerances.unwrap_or_else(|| Tolerances::for_geometry(&cfg.geometry));
    let checks: Vec<FactorCheck> = keep
        .iter()
        .enumerate()
        .map(|(q, &j)| {
            let factor = &full.factors()[j];
            let got = alignment.natural_coords[q];
            let error = if factor.kind.is_periodic() {
                arc_difference(expected[j], got)
            } else {
                got - expected[j]
            };
            let tolerance = tolerances.get(&factor.name);
            FactorCheck {
                factor: factor.name.clone(),
                injected: cfg.perturbation.as_vec()[j],
                expected_correction: expected[j],
                recovered_correction: got,
                error,
                tolerance,
                pass: error.abs() <= tolerance,
            }
        })
        .collect();
    let pass = checks.iter().all(|c| c.pass);
    Ok(ScenarioReport {
        note: SCENARIO_NOTE.to_string(),
        config: cfg.clone(),
        plan_peak: plan.max(),
        kernel,
        visible_factors: visible.names().into_iter().map(String::from).collect(),
        d_nat: alignment.d_nat_all.clone(),
        alignment,
        checks,
        pass,
    })
}
