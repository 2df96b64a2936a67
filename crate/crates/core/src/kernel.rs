//! Which gauge directions a detector cannot see.
//!
//! The kernel of the induced action is computed two ways: numerically, by
//! perturbing probe images along each factor, and from a per-geometry
//! table of which action semantics a detector registers.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::action::{apply, ActionBinding, ActionSemantic};
use crate::detector::{DetectorGeometry, Image};
use crate::error::{Error, Result};
use crate::group::{quotient_spec, GaugeGroupSpec, GroupElement};
use crate::metrics::{analyze_directions, l2, l2_diff, perturbation_direction};
use crate::plan::random_spot_plan;

/// Relative change below which a factor's action counts as trivial.
pub const DEFAULT_KERNEL_TOL: f64 = 1e-9;
/// Probe steps, several sizes so that integer-pixel shifts cannot alias.
pub const KERNEL_STEPS: [f64; 4] = [0.01, -0.01, 0.1, -0.1];
const DIRECTION_STEP: f64 = 1e-3;
pub const MIN_PROBES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelMethod {
    Analytic,
    Numeric,
}

/// Kernel of the induced action for one detector.
///
/// `kernel_factors` are the coordinate factors acting trivially. `rank` is
/// the full kernel dimension: it equals `|kernel_factors|` unless some
/// visible factors are linearly dependent, in which case each dependency
/// (listed in `indistinguishable_groups`, with its direction in
/// `coupled_directions`) adds one more invisible combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelReport {
    pub kernel_factors: Vec<String>,
    pub rank: usize,
    pub method: KernelMethod,
    pub indistinguishable_groups: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub coupled_directions: Vec<Vec<f64>>,
    /// Largest relative image change seen per factor (numeric method only).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub max_relative_change: Vec<f64>,
}

/// Numeric kernel: factor `j` is in the kernel iff no probe changes by
/// `tol` or more (relative, 2-norm) under any step in [`KERNEL_STEPS`].
pub fn compute_kernel_numeric(
    spec: &Arc<GaugeGroupSpec>,
    binding: &ActionBinding,
    geometry: &DetectorGeometry,
    probes: &[Image],
    tol: f64,
) -> Result<KernelReport> {
    if probes.len() < MIN_PROBES {
        return Err(Error::TooFewProbes {
            needed: MIN_PROBES,
            got: probes.len(),
        });
    }
    if probes.iter().any(|p| p.geometry() != geometry) {
        return Err(Error::GeometryMismatch);
    }
    let usable: Vec<&Image> = probes
        .iter()
        .filter(|p| !p.is_zero() && (geometry.pixel_count() == 1 || !p.is_constant()))
        .collect();
    if usable.is_empty() {
        return Err(Error::DegenerateProbes);
    }

    let names: Vec<String> = spec.factors().iter().map(|f| f.name.clone()).collect();
    let mut max_change = vec![0.0f64; names.len()];
    let mut columns = vec![Vec::new(); names.len()];
    for probe in &usable {
        let norm = l2(probe.values());
        for j in 0..names.len() {
            for eps in KERNEL_STEPS {
                let moved = apply(&GroupElement::along(Arc::clone(spec), j, eps)?, probe, binding)?;
                let rel = l2_diff(moved.values(), probe.values()) / norm;
                max_change[j] = max_change[j].max(rel);
            }
            let d = perturbation_direction(spec, j, probe, binding, DIRECTION_STEP)?;
            columns[j].extend(d.into_iter().map(|x| x / norm));
        }
    }
    let in_kernel: Vec<bool> = max_change.iter().map(|&c| c < tol).collect();
    let analysis = analyze_directions(&columns, &in_kernel, &names);
    let kernel_factors: Vec<String> = names
        .iter()
        .zip(&in_kernel)
        .filter(|(_, &k)| k)
        .map(|(n, _)| n.clone())
        .collect();
    Ok(KernelReport {
        rank: names.len() - analysis.rank,
        kernel_factors,
        method: KernelMethod::Numeric,
        indistinguishable_groups: analysis.indistinguishable_groups,
        coupled_directions: analysis.null_vectors,
        max_relative_change: max_change,
    })
}

/// Numeric kernel with three seeded random-spot probes.
pub fn compute_kernel_default(
    spec: &Arc<GaugeGroupSpec>,
    binding: &ActionBinding,
    geometry: &DetectorGeometry,
) -> Result<KernelReport> {
    let probes = default_probes(geometry)?;
    compute_kernel_numeric(spec, binding, geometry, &probes, DEFAULT_KERNEL_TOL)
}

pub const DEFAULT_PROBE_SEED: u64 = 1000;

pub fn default_probes(geometry: &DetectorGeometry) -> Result<Vec<Image>> {
    seeded_probes(geometry, DEFAULT_PROBE_SEED)
}

/// Three random four-spot plans with seeds `seed, seed + 1, seed + 2`.
pub fn seeded_probes(geometry: &DetectorGeometry, seed: u64) -> Result<Vec<Image>> {
    (0..MIN_PROBES as u64).map(|k| random_spot_plan(geometry, seed.wrapping_add(k), 4)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Channel {
    Rotation,
    Translation,
    Scale,
    Intensity,
}

/// Kernel read off from which channels each geometry registers.
pub fn compute_kernel_analytic(
    spec: &GaugeGroupSpec,
    binding: &ActionBinding,
    geometry: &DetectorGeometry,
) -> Result<KernelReport> {
    geometry.validate()?;
    let channel = |name: &str| match binding.get(name) {
        Some(ActionSemantic::RotatePhi) => Some(Channel::Rotation),
        Some(ActionSemantic::TranslateZ) => Some(Channel::Translation),
        Some(ActionSemantic::ScaleRadial { .. }) => Some(Channel::Scale),
        Some(ActionSemantic::MultiplyIntensity) => Some(Channel::Intensity),
        None => None,
    };
    // channels invisible to the geometry, and channels that collapse onto one
    let (invisible, merged): (Vec<Channel>, Vec<Vec<Channel>>) = match *geometry {
        DetectorGeometry::Cylinder { .. } | DetectorGeometry::Plane { .. } => (vec![], vec![]),
        DetectorGeometry::Line { tilt: 0.0, .. } => (vec![Channel::Rotation], vec![]),
        DetectorGeometry::Line { .. } => (vec![], vec![vec![Channel::Rotation, Channel::Translation]]),
        DetectorGeometry::Point => (
            vec![Channel::Rotation, Channel::Translation],
            vec![vec![Channel::Scale, Channel::Intensity]],
        ),
    };
    // a visible factor's observable: the merged class it belongs to
    let class_of = |c: Channel| -> Channel {
        merged
            .iter()
            .find(|m| m.contains(&c))
            .map(|m| m[0])
            .unwrap_or(c)
    };
    let mut kernel_factors = Vec::new();
    let mut classes: Vec<(Channel, Vec<String>)> = Vec::new();
    for f in spec.factors() {
        match channel(&f.name) {
            Some(c) if !invisible.contains(&c) => {
                let cls = class_of(c);
                match classes.iter_mut().find(|(k, _)| *k == cls) {
                    Some((_, members)) => members.push(f.name.clone()),
                    None => classes.push((cls, vec![f.name.clone()])),
                }
            }
            _ => kernel_factors.push(f.name.clone()),
        }
    }
    let mut groups: Vec<Vec<String>> = classes.into_iter().map(|(_, m)| m).filter(|m| m.len() > 1).collect();
    for g in &mut groups {
        g.sort_unstable_by_key(|n| spec.index_of(n));
    }
    groups.sort();
    let coupled: usize = groups.iter().map(|g| g.len() - 1).sum();
    Ok(KernelReport {
        rank: kernel_factors.len() + coupled,
        kernel_factors,
        method: KernelMethod::Analytic,
        indistinguishable_groups: groups,
        coupled_directions: vec![],
        max_relative_change: vec![],
    })
}

/// One detector type: a coordinate normal subgroup and the quotient it leaves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorType {
    pub normal_subgroup: Vec<String>,
    pub visible_quotient: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorTypeCatalog {
    pub entries: Vec<DetectorType>,
}

pub const MAX_CATALOG_FACTORS: usize = 20;

/// All `2^M` coordinate subgroups of an abelian product spec, ordered by size
/// then by their lexicographically sorted factor names.
pub fn enumerate_detector_types(spec: &GaugeGroupSpec) -> Result<DetectorTypeCatalog> {
    let m = spec.dim();
    if m > MAX_CATALOG_FACTORS {
        return Err(Error::TooManyFactors(m));
    }
    let names = spec.names();
    let mut entries = Vec::with_capacity(1 << m);
    for mask in 0u32..(1u32 << m) {
        let mut sub: Vec<String> = (0..m).filter(|j| mask & (1 << j) != 0).map(|j| names[j].to_string()).collect();
        sub.sort();
        let visible = quotient_spec(spec, &sub)?.names().into_iter().map(String::from).collect();
        entries.push(DetectorType {
            normal_subgroup: sub,
            visible_quotient: visible,
        });
    }
    entries.sort_by(|a, b| {
        a.normal_subgroup
            .len()
            .cmp(&b.normal_subgroup.len())
            .then_with(|| a.normal_subgroup.cmp(&b.normal_subgroup))
    });
    Ok(DetectorTypeCatalog { entries })
}

/// Kernel analysis of a line detector tilted on the cylinder surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TiltedLineReport {
    pub tilt: f64,
    pub kernel: KernelReport,
    /// Least-squares slope `dφ/dz` of the visible `(φ, z)` direction.
    pub fitted_slope: Option<f64>,
    pub relation: String,
}

/// Tilts `line` by `angle` (radians of φ per unit z), computes its numeric
/// kernel and fits the visible submanifold `φ(z) = slope·z` from the
/// rotation and translation sensitivity directions.
///
/// Probes default to seeded random-spot plans; supplied probes must have
/// the line's grid and are re-read on the tilted geometry.
pub fn misaligned_line_kernel_demo(
    angle: f64,
    spec: &Arc<GaugeGroupSpec>,
    line: &DetectorGeometry,
    binding: &ActionBinding,
    probes: Option<&[Image]>,
) -> Result<TiltedLineReport> {
    let (n, length) = match *line {
        DetectorGeometry::Line { n, length, .. } => (n, length),
        _ => return Err(Error::InvalidGeometry("tilted-line demo needs a line geometry".into())),
    };
    let geometry = DetectorGeometry::Line { n, length, tilt: angle };
    geometry.validate()?;
    let probes: Vec<Image> = match probes {
        Some(p) => p.iter().map(|img| img.with_geometry(geometry.clone())).collect::<Result<_>>()?,
        None => default_probes(&geometry)?,
    };
    let kernel = compute_kernel_numeric(spec, binding, &geometry, &probes, DEFAULT_KERNEL_TOL)?;

    let rot = spec.factors().iter().position(|f| matches!(binding.get(&f.name), Some(ActionSemantic::RotatePhi)));
    let tr = spec.factors().iter().position(|f| matches!(binding.get(&f.name), Some(ActionSemantic::TranslateZ)));
    let fitted_slope = match (rot, tr) {
        (Some(r), Some(t)) => {
            let (mut num, mut den) = (0.0, 0.0);
            for p in probes.iter().filter(|p| !p.is_constant()) {
                let dr = perturbation_direction(spec, r, p, binding, DIRECTION_STEP)?;
                let dt = perturbation_direction(spec, t, p, binding, DIRECTION_STEP)?;
                num += dr.iter().zip(&dt).map(|(a, b)| a * b).sum::<f64>();
                den += dt.iter().map(|b| b * b).sum::<f64>();
            }
            (den > 0.0).then(|| num / den)
        }
        _ => None,
    };
    let relation = match fitted_slope {
        Some(s) => format!("phi(z) = {s:.6} * z"),
        None => "undetermined".to_string(),
    };
    Ok(TiltedLineReport {
        tilt: angle,
        kernel,
        fitted_slope,
        relation,
    })
}

/// Union of kernel factors as a set, for subset comparisons.
pub fn kernel_set(report: &KernelReport) -> BTreeSet<&str> {
    report.kernel_factors.iter().map(String::as_str).collect()
}
