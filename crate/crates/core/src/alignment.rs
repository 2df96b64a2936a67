//! Recovering natural coordinates: minimize `F(y) = ‖I − s(y).T‖_k` over
//! the quotient coordinates of the gauge group.
//!
//! The search runs in three stages: a full-factorial coarse grid over the
//! search box, simplex refinement from the best grid points, then
//! clustering of the refined minimizers into a minima set. When the
//! minimum is not unique (the reference has a non-trivial stabilizer) the
//! member closest to the origin is reported as the natural coordinates.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::action::{apply, ActionBinding};
use crate::detector::Image;
use crate::error::{Error, Result};
use crate::group::{arc_difference, signed_angle, GaugeGroupSpec, GroupElement};
use crate::metrics::{
    distance_k, natural_distance, stabilizer_diagnostic, DiagnosticConfig, DistanceForm, MetricSpec, WeightVector,
};
use crate::optimizer::{grid_point, linspace, nelder_mead, SimplexOptions};

/// Evaluation budget shared by the coarse grid and the brute-force oracle.
pub const MAX_GRID_EVALUATIONS: u128 = 10_000_000;

/// Optimizer knobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    /// Grid points per factor.
    pub coarse_grid: usize,
    pub refine_max_iter: usize,
    /// Absolute tolerance on the simplex spread of F.
    pub refine_tol: f64,
    pub multistart_count: usize,
    /// Relative window on F for minima-set membership.
    pub minima_cluster_tol: f64,
    /// Minimizers closer than this (canonical units) are one cluster.
    pub coordinate_cluster_tol: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            coarse_grid: 9,
            refine_max_iter: 500,
            refine_tol: 1e-10,
            multistart_count: 8,
            minima_cluster_tol: 1e-6,
            coordinate_cluster_tol: 0.05,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.coarse_grid >= 2
            && self.refine_max_iter > 0
            && self.refine_tol > 0.0
            && self.multistart_count > 0
            && self.minima_cluster_tol > 0.0
            && self.coordinate_cluster_tol > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig("optimizer settings must be positive and coarse_grid >= 2".into()))
        }
    }
}

/// Everything `F` depends on.
#[derive(Debug, Clone)]
pub struct ObjectiveSpec {
    /// The plan `I`.
    pub reference: Image,
    /// The measurement `T`.
    pub measured: Image,
    /// Chart of the visible quotient; the coordinates being searched.
    pub spec: Arc<GaugeGroupSpec>,
    pub binding: ActionBinding,
    pub metric: MetricSpec,
    /// Closed search interval per factor, circle factors in `(-π, π]` terms.
    pub search_bounds: Vec<[f64; 2]>,
}

impl ObjectiveSpec {
    pub fn new(
        reference: Image,
        measured: Image,
        spec: Arc<GaugeGroupSpec>,
        binding: ActionBinding,
        metric: MetricSpec,
        search_bounds: Vec<[f64; 2]>,
    ) -> Result<Self> {
        if reference.geometry() != measured.geometry() {
            return Err(Error::GeometryMismatch);
        }
        if search_bounds.len() != spec.dim() {
            return Err(Error::InvalidConfig(format!(
                "{} search intervals for {} factors; every factor needs a compact interval",
                search_bounds.len(),
                spec.dim()
            )));
        }
        for (f, [lo, hi]) in spec.factors().iter().zip(&search_bounds) {
            if !(lo.is_finite() && hi.is_finite() && *lo <= 0.0 && 0.0 <= *hi && lo < hi) {
                return Err(Error::InvalidConfig(format!(
                    "search interval [{lo}, {hi}] of `{}` must be finite, non-empty and contain 0",
                    f.name
                )));
            }
        }
        Ok(Self {
            reference,
            measured,
            spec,
            binding,
            metric,
            search_bounds,
        })
    }

    fn element(&self, y: &[f64]) -> Result<GroupElement> {
        if y.len() != self.spec.dim() {
            return Err(Error::LengthMismatch {
                expected: self.spec.dim(),
                got: y.len(),
            });
        }
        for ((f, &v), [lo, hi]) in self.spec.factors().iter().zip(y).zip(&self.search_bounds) {
            if !(v >= *lo && v <= *hi) {
                return Err(Error::OutOfBounds {
                    factor: f.name.clone(),
                    value: v,
                    lo: *lo,
                    hi: *hi,
                });
            }
        }
        GroupElement::new(Arc::clone(&self.spec), y.to_vec())
    }

    fn is_full_circle(&self, j: usize) -> bool {
        let [lo, hi] = self.search_bounds[j];
        self.spec.factors()[j].kind.is_periodic() && hi - lo >= TAU - 1e-9
    }
}

/// `F(y) = d_k(I, s(y).T)`.
pub fn evaluate_objective(y: &[f64], obj: &ObjectiveSpec) -> Result<f64> {
    let g = obj.element(y)?;
    let moved = apply(&g, &obj.measured, &obj.binding)?;
    distance_k(&obj.reference, &moved, obj.metric)
}

/// A member of the minima set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Minimum {
    pub coords: Vec<f64>,
    pub residual: f64,
}

/// Best F after each stage, and work done.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageSummary {
    pub coarse_best: f64,
    pub coarse_evaluations: usize,
    pub refined_best: f64,
    pub refine_starts: usize,
    pub refine_iterations: usize,
}

/// `d_nat` under every supported formula.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaturalDistances {
    pub quadratic: f64,
    pub general_norm_k2: f64,
    pub linear_example: f64,
    /// `Σ wᵢ |yᵢ|`, the non-negative variant of the signed linear sum.
    pub linear_example_abs: f64,
}

impl NaturalDistances {
    pub fn compute(coords: &[f64], w: &WeightVector) -> Result<Self> {
        let abs: Vec<f64> = coords.iter().map(|y| y.abs()).collect();
        Ok(Self {
            quadratic: natural_distance(coords, w, DistanceForm::Quadratic)?,
            general_norm_k2: natural_distance(coords, w, DistanceForm::GeneralNorm { metric: MetricSpec::l2() })?,
            linear_example: natural_distance(coords, w, DistanceForm::LinearExample)?,
            linear_example_abs: natural_distance(&abs, w, DistanceForm::LinearExample)?,
        })
    }
}

pub const REPRESENTATIVE_RULE: &str =
    "member of the minima set closest to the origin (Euclidean in canonical coordinates, circle factors by shorter arc)";

/// Outcome of [`calibrate`].
///
/// `natural_coords` is the correction `s̄` that maps the measurement back
/// onto the plan. `estimated_misalignment` is its inverse, the device offset
/// that produced the measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentResult {
    pub factors: Vec<String>,
    pub natural_coords: Vec<f64>,
    pub estimated_misalignment: Vec<f64>,
    pub residual: f64,
    pub identity_residual: f64,
    pub minima_set: Vec<Minimum>,
    pub degenerate_directions: Vec<String>,
    pub chosen_representative_rule: String,
    pub d_nat: f64,
    pub d_nat_form: DistanceForm,
    pub d_nat_all: NaturalDistances,
    pub weights: WeightVector,
    pub metric: MetricSpec,
    pub search_bounds: Vec<[f64; 2]>,
    pub config: OptimizerConfig,
    pub stages: StageSummary,
    /// False when the refinement that produced the best point ran out of
    /// iterations before meeting `refine_tol`.
    pub converged: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
}

fn coarse_axes(obj: &ObjectiveSpec, n: usize) -> Vec<Vec<f64>> {
    (0..obj.spec.dim())
        .map(|j| {
            if obj.is_full_circle(j) {
                (0..n).map(|k| signed_angle(TAU * k as f64 / n as f64)).collect()
            } else {
                let [lo, hi] = obj.search_bounds[j];
                linspace(lo, hi, n)
            }
        })
        .collect()
}

/// Distance between two coordinate vectors, shorter arc on circle factors.
fn chart_distance(spec: &GaugeGroupSpec, a: &[f64], b: &[f64]) -> f64 {
    spec.factors()
        .iter()
        .zip(a.iter().zip(b))
        .map(|(f, (x, y))| {
            let d = if f.kind.is_periodic() { arc_difference(*y, *x) } else { x - y };
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

fn origin_distance(spec: &GaugeGroupSpec, a: &[f64]) -> f64 {
    chart_distance(spec, a, &vec![0.0; a.len()])
}

/// Runs the three-stage search and assembles the report.
pub fn calibrate(obj: &ObjectiveSpec, cfg: &OptimizerConfig, w: &WeightVector, form: DistanceForm) -> Result<AlignmentResult> {
    let started = Instant::now();
    cfg.validate()?;
    if obj.measured.is_zero() {
        return Err(Error::AllZeroMeasured);
    }
    let dim = obj.spec.dim();
    if w.len() != dim {
        return Err(Error::LengthMismatch { expected: dim, got: w.len() });
    }
    let f = |y: &[f64]| evaluate_objective(y, obj).unwrap_or(f64::INFINITY);

    // stage 1: coarse grid, plus the identity so we never do worse than no correction
    let axes = coarse_axes(obj, cfg.coarse_grid);
    let total = (cfg.coarse_grid as u128).pow(dim as u32);
    if total > MAX_GRID_EVALUATIONS {
        return Err(Error::BudgetExceeded(total));
    }
    let total = total as usize;
    let grid_values: Vec<f64> = (0..total).into_par_iter().map(|i| f(&grid_point(i, &axes))).collect();
    let identity_residual = evaluate_objective(&vec![0.0; dim], obj)?;

    let mut candidates: Vec<(f64, Vec<f64>)> = grid_values
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, grid_point(i, &axes)))
        .collect();
    candidates.push((identity_residual, vec![0.0; dim]));
    // stable: ties keep grid order
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
    let coarse_best = candidates[0].0;
    let mut starts: Vec<(f64, Vec<f64>)> = Vec::with_capacity(cfg.multistart_count);
    for c in candidates {
        if starts.len() == cfg.multistart_count {
            break;
        }
        if !starts.iter().any(|s| s.1 == c.1) {
            starts.push(c);
        }
    }

    // stage 2: simplex refinement, half a grid cell as the initial step
    let steps: Vec<f64> = (0..dim)
        .map(|j| {
            let [lo, hi] = obj.search_bounds[j];
            let cells = if obj.is_full_circle(j) { cfg.coarse_grid } else { cfg.coarse_grid - 1 };
            0.5 * (hi - lo) / cells as f64
        })
        .collect();
    let opts = SimplexOptions {
        max_iter: cfg.refine_max_iter,
        f_tol: cfg.refine_tol,
        x_tol: 1e-12,
    };
    let refined: Vec<_> = starts
        .par_iter()
        .map(|(_, x0)| nelder_mead(f, x0, &steps, &obj.search_bounds, opts))
        .collect();
    let refine_iterations = refined.iter().map(|r| r.iterations).sum();
    let best = refined
        .iter()
        .min_by(|a, b| a.f.total_cmp(&b.f))
        .expect("at least one start");
    let refined_best = best.f.min(coarse_best);
    let converged = best.converged;

    // stage 3: minima set
    let window = cfg.minima_cluster_tol * (1.0 + refined_best.abs());
    let mut members: Vec<Minimum> = refined
        .iter()
        .filter(|r| r.f <= refined_best + window)
        .map(|r| Minimum {
            coords: canonical(&obj.spec, &r.x),
            residual: r.f,
        })
        .collect();
    members.sort_by(|a, b| a.residual.total_cmp(&b.residual));
    let mut minima_set: Vec<Minimum> = Vec::new();
    for m in members {
        if !minima_set
            .iter()
            .any(|rep| chart_distance(&obj.spec, &rep.coords, &m.coords) <= cfg.coordinate_cluster_tol)
        {
            minima_set.push(m);
        }
    }
    let natural = minima_set
        .iter()
        .min_by(|a, b| {
            origin_distance(&obj.spec, &a.coords)
                .total_cmp(&origin_distance(&obj.spec, &b.coords))
                .then(a.residual.total_cmp(&b.residual))
        })
        .cloned()
        .expect("minima set is non-empty");

    let estimated_misalignment = canonical(&obj.spec, &natural.coords.iter().map(|y| -y).collect::<Vec<_>>());
    let diag = stabilizer_diagnostic(&obj.reference, &obj.spec, &obj.binding, obj.metric, DiagnosticConfig::default())?;
    let d_nat = natural_distance(&natural.coords, w, form)?;

    Ok(AlignmentResult {
        factors: obj.spec.names().into_iter().map(String::from).collect(),
        natural_coords: natural.coords.clone(),
        estimated_misalignment,
        residual: natural.residual,
        identity_residual,
        minima_set,
        degenerate_directions: diag.degenerate_factors(),
        chosen_representative_rule: REPRESENTATIVE_RULE.to_string(),
        d_nat,
        d_nat_form: form,
        d_nat_all: NaturalDistances::compute(&natural.coords, w)?,
        weights: w.clone(),
        metric: obj.metric,
        search_bounds: obj.search_bounds.clone(),
        config: *cfg,
        stages: StageSummary {
            coarse_best,
            coarse_evaluations: total + 1,
            refined_best,
            refine_starts: starts.len(),
            refine_iterations,
        },
        converged,
        elapsed_ms: Some(started.elapsed().as_secs_f64() * 1e3),
    })
}

/// Circle coordinates mapped to `(-π, π]`, others unchanged.
fn canonical(spec: &GaugeGroupSpec, y: &[f64]) -> Vec<f64> {
    spec.factors()
        .iter()
        .zip(y)
        .map(|(f, &v)| if f.kind.is_periodic() { signed_angle(v) } else { v })
        .collect()
}

/// Exhaustive argmin of `F` over a `density`-per-factor grid spanning the
/// search box (endpoints included). Test oracle for [`calibrate`].
pub fn brute_force_oracle(obj: &ObjectiveSpec, density: usize) -> Result<(Vec<f64>, f64)> {
    let dim = obj.spec.dim();
    let total = (density as u128).pow(dim as u32);
    if total > MAX_GRID_EVALUATIONS {
        return Err(Error::BudgetExceeded(total));
    }
    if density == 0 {
        return Err(Error::InvalidConfig("oracle density must be positive".into()));
    }
    let axes: Vec<Vec<f64>> = obj.search_bounds.iter().map(|[lo, hi]| linspace(*lo, *hi, density)).collect();
    let values: Vec<f64> = (0..total as usize)
        .into_par_iter()
        .map(|i| evaluate_objective(&grid_point(i, &axes), obj).unwrap_or(f64::INFINITY))
        .collect();
    let (best, &fbest) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
        .expect("non-empty grid");
    Ok((grid_point(best, &axes), fbest))
}

/// Full-circle interval for circle factors.
pub const FULL_CIRCLE: [f64; 2] = [-PI, PI];
