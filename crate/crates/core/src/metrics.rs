//! Pixel-level k-norms, induced image distances, stabilizer diagnostics and
//! the natural alignment distance.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::action::{apply, ActionBinding};
use crate::detector::Image;
use crate::error::{Error, Result};
use crate::group::{GaugeGroupSpec, GroupElement};

/// Singular-value cutoff for unit-normalized perturbation directions.
pub const RANK_TOL: f64 = 1e-6;
/// Null-vector components above this magnitude tie a factor into a group.
const GROUP_COMPONENT_TOL: f64 = 1e-3;

pub(crate) fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn l2_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Exponent `k ∈ [1, ∞]` of the pixel norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSpec {
    k: f64,
}

impl MetricSpec {
    pub fn new(k: f64) -> Result<Self> {
        if k.is_nan() || k < 1.0 {
            return Err(Error::BadK(k));
        }
        Ok(Self { k })
    }

    pub fn l1() -> Self {
        Self { k: 1.0 }
    }

    pub fn l2() -> Self {
        Self { k: 2.0 }
    }

    pub fn max() -> Self {
        Self { k: f64::INFINITY }
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// `(Σ |x|^k)^(1/k)`, or `max |x|` for `k = ∞`.
    pub fn norm_of(&self, v: &[f64]) -> f64 {
        self.norm_iter(v.iter().copied())
    }

    fn norm_iter(&self, it: impl Iterator<Item = f64>) -> f64 {
        let k = self.k;
        if k == 1.0 {
            it.map(f64::abs).sum()
        } else if k == 2.0 {
            it.map(|x| x * x).sum::<f64>().sqrt()
        } else if k.is_infinite() {
            it.map(f64::abs).fold(0.0, f64::max)
        } else {
            it.map(|x| x.abs().powf(k)).sum::<f64>().powf(1.0 / k)
        }
    }
}

impl Default for MetricSpec {
    fn default() -> Self {
        Self::l2()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum KRepr {
    Num(f64),
    Text(String),
}

#[derive(Serialize, Deserialize)]
struct MetricRepr {
    k: KRepr,
}

impl Serialize for MetricSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let k = if self.k.is_infinite() { KRepr::Text("inf".into()) } else { KRepr::Num(self.k) };
        MetricRepr { k }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for MetricSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = MetricRepr::deserialize(d)?;
        let k = match repr.k {
            KRepr::Num(k) => k,
            KRepr::Text(t) => parse_k(&t).map_err(serde::de::Error::custom)?,
        };
        MetricSpec::new(k).map_err(serde::de::Error::custom)
    }
}

/// Parses `"2"`, `"1.5"`, `"inf"` or `"infinity"`.
pub fn parse_k(text: &str) -> Result<f64> {
    match text.trim().to_ascii_lowercase().as_str() {
        "inf" | "infinity" | "max" => Ok(f64::INFINITY),
        t => t.parse::<f64>().map_err(|e| Error::Parse(format!("bad k `{text}`: {e}"))),
    }
}

pub fn norm_k(img: &Image, m: MetricSpec) -> Result<f64> {
    if img.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    Ok(m.norm_of(img.values()))
}

/// `d_k(a, b) = ‖a − b‖_k`.
pub fn distance_k(a: &Image, b: &Image, m: MetricSpec) -> Result<f64> {
    if a.geometry() != b.geometry() {
        return Err(Error::GeometryMismatch);
    }
    Ok(m.norm_iter(a.values().iter().zip(b.values()).map(|(x, y)| x - y)))
}

/// Non-negative weights normalized to sum to one.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct WeightVector {
    weights: Vec<f64>,
}

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidWeights("weights must be finite and non-negative".into()));
        }
        let sum: f64 = weights.iter().sum();
        if weights.is_empty() {
            return Ok(Self { weights });
        }
        if sum <= 0.0 {
            return Err(Error::InvalidWeights("weights sum to zero".into()));
        }
        Ok(Self {
            weights: weights.iter().map(|w| w / sum).collect(),
        })
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            weights: vec![1.0 / n as f64; n],
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

impl<'de> Deserialize<'de> for WeightVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<f64>::deserialize(d)?;
        WeightVector::new(raw).map_err(serde::de::Error::custom)
    }
}

/// Which natural-distance formula to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum DistanceForm {
    /// `Σ wᵢ yᵢ²`.
    #[default]
    Quadratic,
    /// `‖(w₁y₁, …, w_N y_N)‖_k`.
    GeneralNorm { metric: MetricSpec },
    /// Signed sum `Σ wᵢ yᵢ`; can be negative.
    LinearExample,
}

/// Natural alignment distance of quotient coordinates `coords`. Circle
/// coordinates should be passed as their `(-π, π]` representative.
pub fn natural_distance(coords: &[f64], w: &WeightVector, form: DistanceForm) -> Result<f64> {
    if coords.len() != w.len() {
        return Err(Error::LengthMismatch {
            expected: w.len(),
            got: coords.len(),
        });
    }
    let pairs = coords.iter().zip(w.as_slice());
    Ok(match form {
        DistanceForm::Quadratic => pairs.map(|(y, w)| w * y * y).sum(),
        DistanceForm::GeneralNorm { metric } => metric.norm_iter(pairs.map(|(y, w)| w * y)),
        DistanceForm::LinearExample => pairs.map(|(y, w)| w * y).sum(),
    })
}

/// Perturbation-direction analysis shared by the stabilizer diagnostic and
/// the numeric kernel computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionAnalysis {
    /// Rank of the matrix of non-degenerate directions.
    pub rank: usize,
    /// Factor groups whose directions are linearly dependent.
    pub indistinguishable_groups: Vec<Vec<String>>,
    /// Null directions in canonical coordinates (unit length, largest
    /// component positive).
    pub null_vectors: Vec<Vec<f64>>,
}

/// Rank analysis of per-factor directions. Columns flagged in `zero` are
/// treated as identically zero and left out.
pub(crate) fn analyze_directions(columns: &[Vec<f64>], zero: &[bool], names: &[String]) -> DirectionAnalysis {
    let live: Vec<usize> = (0..columns.len()).filter(|&j| !zero[j]).collect();
    if live.is_empty() {
        return DirectionAnalysis {
            rank: 0,
            indistinguishable_groups: vec![],
            null_vectors: vec![],
        };
    }
    let rows = columns[live[0]].len();
    let mut a = DMatrix::<f64>::zeros(rows, live.len());
    let mut norms = vec![1.0; columns.len()];
    for (jj, &j) in live.iter().enumerate() {
        norms[j] = l2(&columns[j]);
        for (r, v) in columns[j].iter().enumerate() {
            a[(r, jj)] = v / norms[j];
        }
    }
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let mut rank = 0;
    let mut null_vectors = Vec::new();
    for (idx, &s) in svd.singular_values.iter().enumerate() {
        if s > RANK_TOL {
            rank += 1;
        } else {
            let mut full = vec![0.0; columns.len()];
            for (jj, &j) in live.iter().enumerate() {
                full[j] = v_t[(idx, jj)];
            }
            null_vectors.push(full);
        }
    }
    // merge overlapping supports of null vectors
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for nv in &null_vectors {
        let support: Vec<usize> = (0..nv.len()).filter(|&j| nv[j].abs() > GROUP_COMPONENT_TOL).collect();
        let mut merged = support;
        groups.retain(|g| {
            if g.iter().any(|j| merged.contains(j)) {
                merged.extend(g.iter().copied());
                false
            } else {
                true
            }
        });
        merged.sort_unstable();
        merged.dedup();
        groups.push(merged);
    }
    groups.sort();
    // back to canonical coordinates, unit length, largest component positive
    for nv in &mut null_vectors {
        nv.iter_mut().zip(&norms).for_each(|(v, n)| *v /= n);
        let len = l2(nv);
        let pivot = nv.iter().copied().fold(0.0, |m: f64, v| if v.abs() > m.abs() { v } else { m });
        let s = pivot.signum() / len;
        nv.iter_mut().for_each(|v| *v = *v * s + 0.0);
    }
    DirectionAnalysis {
        rank,
        indistinguishable_groups: groups
            .into_iter()
            .map(|g| g.into_iter().map(|j| names[j].clone()).collect())
            .collect(),
        null_vectors,
    }
}

/// Central-difference image derivative along factor `j`.
pub(crate) fn perturbation_direction(
    spec: &Arc<GaugeGroupSpec>,
    j: usize,
    img: &Image,
    binding: &ActionBinding,
    step: f64,
) -> Result<Vec<f64>> {
    let plus = apply(&GroupElement::along(Arc::clone(spec), j, step)?, img, binding)?;
    let minus = apply(&GroupElement::along(Arc::clone(spec), j, -step)?, img, binding)?;
    Ok(plus
        .values()
        .iter()
        .zip(minus.values())
        .map(|(p, m)| (p - m) / (2.0 * step))
        .collect())
}

/// Step and tolerance of [`stabilizer_diagnostic`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticConfig {
    pub step: f64,
    /// Degeneracy threshold relative to `‖img‖₂`.
    pub tol_rel: f64,
}

impl Default for DiagnosticConfig {
    fn default() -> Self {
        Self { step: 1e-3, tol_rel: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorSensitivity {
    pub name: String,
    pub sensitivity: f64,
    pub degenerate: bool,
}

/// Per-factor sensitivities of an image and the rank of their directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilizerReport {
    pub metric: MetricSpec,
    pub step: f64,
    pub tolerance: f64,
    pub factors: Vec<FactorSensitivity>,
    pub rank: usize,
    pub indistinguishable_groups: Vec<Vec<String>>,
}

impl StabilizerReport {
    pub fn degenerate_factors(&self) -> Vec<String> {
        self.factors.iter().filter(|f| f.degenerate).map(|f| f.name.clone()).collect()
    }
}

/// How strongly each factor moves `img`. Factors whose sensitivity falls below
/// `tol_rel·‖img‖₂` lie in the image's stabilizer and are flagged degenerate.
pub fn stabilizer_diagnostic(
    img: &Image,
    spec: &Arc<GaugeGroupSpec>,
    binding: &ActionBinding,
    m: MetricSpec,
    cfg: DiagnosticConfig,
) -> Result<StabilizerReport> {
    if !(cfg.step > 0.0) {
        return Err(Error::InvalidConfig("diagnostic step must be positive".into()));
    }
    let tolerance = cfg.tol_rel * l2(img.values());
    let names: Vec<String> = spec.factors().iter().map(|f| f.name.clone()).collect();
    let mut columns = Vec::with_capacity(names.len());
    let mut factors = Vec::with_capacity(names.len());
    for (j, name) in names.iter().enumerate() {
        let d = perturbation_direction(spec, j, img, binding, cfg.step)?;
        let sensitivity = m.norm_of(&d);
        factors.push(FactorSensitivity {
            name: name.clone(),
            sensitivity,
            degenerate: !(sensitivity >= tolerance) || sensitivity == 0.0,
        });
        columns.push(d);
    }
    let zero: Vec<bool> = factors.iter().map(|f| f.degenerate).collect();
    let analysis = analyze_directions(&columns, &zero, &names);
    Ok(StabilizerReport {
        metric: m,
        step: cfg.step,
        tolerance,
        factors,
        rank: analysis.rank,
        indistinguishable_groups: analysis.indistinguishable_groups,
    })
}
