//! The device gauge group: a finite product of one-parameter abelian factors.
//!
//! Every factor is stored in an additive canonical coordinate. Multiplicative
//! factors (scale, intensity) live in log-space, circle factors are kept
//! normalized to `[0, 2π)`. Composition is coordinate-wise addition for all
//! kinds.

use std::collections::HashSet;
use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Kind of a one-parameter gauge factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorKind {
    /// Periodic angle in radians, period 2π.
    Circle,
    /// Additive real (a translation).
    Line,
    /// Multiplicative positive real, stored as its logarithm.
    PositiveScale,
    /// Multiplicative beam intensity, stored as its logarithm.
    Intensity,
}

impl FactorKind {
    pub fn is_periodic(self) -> bool {
        matches!(self, FactorKind::Circle)
    }
}

/// One named factor of a [`GaugeGroupSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Factor {
    pub name: String,
    pub kind: FactorKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<[f64; 2]>,
}

impl Factor {
    pub fn new(name: impl Into<String>, kind: FactorKind) -> Self {
        Self {
            name: name.into(),
            kind,
            bounds: None,
        }
    }

    pub fn with_bounds(mut self, lo: f64, hi: f64) -> Self {
        self.bounds = Some([lo, hi]);
        self
    }
}

#[derive(Deserialize)]
struct RawSpec {
    factors: Vec<Factor>,
}

/// Ordered list of gauge factors; the device group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec")]
pub struct GaugeGroupSpec {
    factors: Vec<Factor>,
}

impl TryFrom<RawSpec> for GaugeGroupSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        GaugeGroupSpec::new(raw.factors)
    }
}

impl GaugeGroupSpec {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        let mut seen = HashSet::new();
        for f in &factors {
            if !seen.insert(f.name.as_str()) {
                return Err(Error::InvalidSpec(format!("duplicate factor `{}`", f.name)));
            }
            if let Some([lo, hi]) = f.bounds {
                if !(lo <= 0.0 && 0.0 <= hi) || !lo.is_finite() || !hi.is_finite() {
                    return Err(Error::InvalidSpec(format!(
                        "bounds [{lo}, {hi}] of `{}` must be finite and contain 0",
                        f.name
                    )));
                }
            }
        }
        Ok(Self { factors })
    }

    /// The four linac gauges: rotation `phi`, axial shift `z`, radial scaling
    /// `c` and beam intensity `i`, all unbounded.
    pub fn linac() -> Self {
        Self {
            factors: vec![
                Factor::new("phi", FactorKind::Circle),
                Factor::new("z", FactorKind::Line),
                Factor::new("c", FactorKind::PositiveScale),
                Factor::new("i", FactorKind::Intensity),
            ],
        }
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    /// Group dimension.
    pub fn dim(&self) -> usize {
        self.factors.len()
    }

    pub fn names(&self) -> Vec<&str> {
        self.factors.iter().map(|f| f.name.as_str()).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.factors.iter().position(|f| f.name == name)
    }

    /// Sub-product of the named factors, in this spec's order.
    pub fn restrict<S: AsRef<str>>(&self, keep: &[S]) -> Result<Self> {
        for k in keep {
            if self.index_of(k.as_ref()).is_none() {
                return Err(Error::UnknownFactor(k.as_ref().to_string()));
            }
        }
        let factors = self
            .factors
            .iter()
            .filter(|f| keep.iter().any(|k| k.as_ref() == f.name))
            .cloned()
            .collect();
        Ok(Self { factors })
    }

    fn check_bounds(&self, coords: &[f64]) -> Result<()> {
        for (f, &x) in self.factors.iter().zip(coords) {
            if let Some([lo, hi]) = f.bounds {
                let v = if f.kind.is_periodic() { signed_angle(x) } else { x };
                if v < lo || v > hi {
                    return Err(Error::BoundsViolation {
                        factor: f.name.clone(),
                        value: v,
                        lo,
                        hi,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Chart on the quotient `spec / ker`: the spec with the kernel factors removed.
pub fn quotient_spec<S: AsRef<str>>(spec: &GaugeGroupSpec, kernel_factors: &[S]) -> Result<GaugeGroupSpec> {
    for k in kernel_factors {
        if spec.index_of(k.as_ref()).is_none() {
            return Err(Error::UnknownFactor(k.as_ref().to_string()));
        }
    }
    let factors = spec
        .factors
        .iter()
        .filter(|f| !kernel_factors.iter().any(|k| k.as_ref() == f.name))
        .cloned()
        .collect();
    Ok(GaugeGroupSpec { factors })
}

/// Representative of an angle in `[0, 2π)`.
pub fn normalize_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    // rem_euclid rounds tiny negatives up to exactly TAU
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Representative of an angle in `(-π, π]`.
pub fn signed_angle(x: f64) -> f64 {
    let r = normalize_angle(x);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Shorter-arc difference `to - from`, in `(-π, π]`. The antipodal case
/// resolves to `+π`.
pub fn arc_difference(from: f64, to: f64) -> f64 {
    signed_angle(to - from)
}

/// An element of the gauge group, in canonical coordinates.
#[derive(Debug, Clone)]
pub struct GroupElement {
    spec: Arc<GaugeGroupSpec>,
    coords: Vec<f64>,
}

impl PartialEq for GroupElement {
    fn eq(&self, other: &Self) -> bool {
        self.same_spec(other) && self.coords == other.coords
    }
}

impl GroupElement {
    /// Builds an element, normalizing circle coordinates and checking bounds.
    pub fn new(spec: Arc<GaugeGroupSpec>, coords: Vec<f64>) -> Result<Self> {
        if coords.len() != spec.dim() {
            return Err(Error::LengthMismatch {
                expected: spec.dim(),
                got: coords.len(),
            });
        }
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidSpec("non-finite group coordinate".into()));
        }
        let coords = normalize(&spec, coords);
        spec.check_bounds(&coords)?;
        Ok(Self { spec, coords })
    }

    /// Element with a single non-zero coordinate.
    pub fn along(spec: Arc<GaugeGroupSpec>, factor: usize, value: f64) -> Result<Self> {
        let mut coords = vec![0.0; spec.dim()];
        coords[factor] = value;
        Self::new(spec, coords)
    }

    pub fn spec(&self) -> &Arc<GaugeGroupSpec> {
        &self.spec
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Coordinates with every circle factor mapped into `(-π, π]`.
    pub fn signed_coords(&self) -> Vec<f64> {
        self.spec
            .factors
            .iter()
            .zip(&self.coords)
            .map(|(f, &x)| if f.kind.is_periodic() { signed_angle(x) } else { x })
            .collect()
    }

    /// Value of the named factor, if present.
    pub fn get(&self, name: &str) -> Option<f64> {
        self.spec.index_of(name).map(|i| self.coords[i])
    }

    pub fn is_identity(&self) -> bool {
        self.coords.iter().all(|&x| x == 0.0)
    }

    fn same_spec(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.spec, &other.spec) || *self.spec == *other.spec
    }
}

fn normalize(spec: &GaugeGroupSpec, mut coords: Vec<f64>) -> Vec<f64> {
    for (f, x) in spec.factors.iter().zip(coords.iter_mut()) {
        if f.kind.is_periodic() {
            *x = normalize_angle(*x);
        }
    }
    coords
}

pub fn identity(spec: &Arc<GaugeGroupSpec>) -> GroupElement {
    GroupElement {
        spec: Arc::clone(spec),
        coords: vec![0.0; spec.dim()],
    }
}

pub fn compose(a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
    if !a.same_spec(b) {
        return Err(Error::SpecMismatch);
    }
    let coords = a.coords.iter().zip(&b.coords).map(|(x, y)| x + y).collect();
    GroupElement::new(Arc::clone(&a.spec), coords)
}

pub fn inverse(g: &GroupElement) -> Result<GroupElement> {
    let coords = g.coords.iter().map(|x| -x).collect();
    GroupElement::new(Arc::clone(&g.spec), coords)
}

/// Sampled curve `t ↦ c(t)` in the gauge group.
#[derive(Debug, Clone)]
pub struct GroupCurve {
    samples: Vec<(f64, GroupElement)>,
}

impl GroupCurve {
    pub fn new(samples: Vec<(f64, GroupElement)>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidCurve("no samples".into()));
        }
        for w in samples.windows(2) {
            if !(w[0].0 < w[1].0) {
                return Err(Error::InvalidCurve("parameters must be strictly increasing".into()));
            }
            if !w[0].1.same_spec(&w[1].1) {
                return Err(Error::SpecMismatch);
            }
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[(f64, GroupElement)] {
        &self.samples
    }

    pub fn range(&self) -> (f64, f64) {
        (self.samples[0].0, self.samples[self.samples.len() - 1].0)
    }
}

/// Piecewise-linear evaluation of a curve; circle factors follow the shorter arc.
pub fn evaluate_curve(curve: &GroupCurve, t: f64) -> Result<GroupElement> {
    let (lo, hi) = curve.range();
    if !(lo <= t && t <= hi) {
        return Err(Error::OutOfRange { t, lo, hi });
    }
    let s = &curve.samples;
    let seg = s.partition_point(|(ti, _)| *ti <= t).saturating_sub(1).min(s.len().saturating_sub(2));
    if s.len() == 1 {
        return Ok(s[0].1.clone());
    }
    let (t0, g0) = &s[seg];
    let (t1, g1) = &s[seg + 1];
    if t == *t0 {
        return Ok(g0.clone());
    }
    if t == *t1 {
        return Ok(g1.clone());
    }
    let u = (t - t0) / (t1 - t0);
    let coords = g0
        .spec
        .factors
        .iter()
        .zip(g0.coords.iter().zip(&g1.coords))
        .map(|(f, (&a, &b))| {
            if f.kind.is_periodic() {
                a + u * arc_difference(a, b)
            } else {
                a + u * (b - a)
            }
        })
        .collect();
    GroupElement::new(Arc::clone(&g0.spec), coords)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linac() -> Arc<GaugeGroupSpec> {
        Arc::new(GaugeGroupSpec::linac())
    }

    fn el(spec: &Arc<GaugeGroupSpec>, c: &[f64]) -> GroupElement {
        GroupElement::new(Arc::clone(spec), c.to_vec()).unwrap()
    }

    #[test]
    fn identity_is_zero() {
        let s = linac();
        assert_eq!(identity(&s).coords(), &[0.0; 4]);
        let empty = Arc::new(GaugeGroupSpec::new(vec![]).unwrap());
        assert!(identity(&empty).coords().is_empty());
        let g = el(&s, &[1.0, -0.3, 0.2, 0.1]);
        assert_eq!(compose(&identity(&s), &g).unwrap(), g);
    }

    #[test]
    fn compose_examples() {
        let s = linac();
        let r = compose(&el(&s, &[PI, 0., 0., 0.]), &el(&s, &[1.5 * PI, 0., 0., 0.])).unwrap();
        assert!((r.coords()[0] - PI / 2.0).abs() < 1e-15);
        let r = compose(&el(&s, &[0., 1.5, 0., 0.]), &el(&s, &[0., -0.5, 0., 0.])).unwrap();
        assert_eq!(r.coords(), &[0.0, 1.0, 0.0, 0.0]);
        let r = compose(&el(&s, &[0., 0., 0., 0.2]), &el(&s, &[0., 0., 0., 0.3])).unwrap();
        assert!((r.coords()[3] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn inverse_example() {
        let s = linac();
        let g = el(&s, &[PI / 2.0, 1.0, 0.1, -0.2]);
        let inv = inverse(&g).unwrap();
        assert!((inv.coords()[0] - 1.5 * PI).abs() < 1e-15);
        assert_eq!(&inv.coords()[1..], &[-1.0, -0.1, 0.2]);
        assert_eq!(inverse(&identity(&s)).unwrap(), identity(&s));
    }

    #[test]
    fn spec_mismatch() {
        let a = el(&linac(), &[0.0; 4]);
        let other = Arc::new(GaugeGroupSpec::new(vec![Factor::new("x", FactorKind::Line)]).unwrap());
        let b = GroupElement::new(other, vec![1.0]).unwrap();
        assert!(matches!(compose(&a, &b), Err(Error::SpecMismatch)));
    }

    #[test]
    fn bounds_are_enforced() {
        let spec = Arc::new(
            GaugeGroupSpec::new(vec![
                Factor::new("z", FactorKind::Line).with_bounds(-1.0, 2.0),
                Factor::new("phi", FactorKind::Circle).with_bounds(-0.5, 0.5),
            ])
            .unwrap(),
        );
        let a = el(&spec, &[1.5, 0.4]);
        assert!(matches!(compose(&a, &a), Err(Error::BoundsViolation { .. })));
        // inverse of 1.5 is -1.5 < -1
        assert!(matches!(inverse(&a), Err(Error::BoundsViolation { .. })));
        // circle bound applies to the signed representative
        assert!(GroupElement::new(Arc::clone(&spec), vec![0.0, -0.4]).is_ok());
        assert!(GroupElement::new(spec, vec![0.0, 0.6]).is_err());
    }

    #[test]
    fn spec_validation() {
        let dup = GaugeGroupSpec::new(vec![Factor::new("a", FactorKind::Line), Factor::new("a", FactorKind::Circle)]);
        assert!(dup.is_err());
        let bad = GaugeGroupSpec::new(vec![Factor::new("a", FactorKind::Line).with_bounds(0.5, 1.0)]);
        assert!(bad.is_err());
    }

    #[test]
    fn spec_json() {
        let json = r#"{"factors":[{"name":"phi","kind":"circle"},{"name":"z","kind":"line","bounds":[-5,5]},
            {"name":"c","kind":"positive_scale"},{"name":"i","kind":"intensity"}]}"#;
        let spec: GaugeGroupSpec = serde_json::from_str(json).unwrap();
        assert_eq!(spec.names(), ["phi", "z", "c", "i"]);
        assert_eq!(spec.factors()[1].bounds, Some([-5.0, 5.0]));
        let back: GaugeGroupSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
        let dup = r#"{"factors":[{"name":"a","kind":"line"},{"name":"a","kind":"line"}]}"#;
        assert!(serde_json::from_str::<GaugeGroupSpec>(dup).is_err());
    }

    #[test]
    fn curve_endpoints_and_midpoint() {
        let s = linac();
        let id = identity(&s);
        let g = el(&s, &[0., 2., 0., 0.]);
        let curve = GroupCurve::new(vec![(0.0, id.clone()), (1.0, g)]).unwrap();
        assert_eq!(evaluate_curve(&curve, 0.0).unwrap(), id);
        assert_eq!(evaluate_curve(&curve, 0.5).unwrap().coords(), &[0., 1., 0., 0.]);
        assert!(matches!(evaluate_curve(&curve, 1.5), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn curve_takes_shorter_arc() {
        let s = linac();
        let a = el(&s, &[0.1, 0., 0., 0.]);
        let b = el(&s, &[TAU - 0.1, 0., 0., 0.]);
        let curve = GroupCurve::new(vec![(0.0, a), (1.0, b)]).unwrap();
        let mid = evaluate_curve(&curve, 0.5).unwrap().coords()[0];
        // oracle: angular offset from 0 via atan2
        let off = mid.sin().atan2(mid.cos());
        assert!(off.abs() < 1e-12, "mid = {mid}");
    }

    #[test]
    fn antipodal_tie_goes_positive() {
        assert_eq!(arc_difference(0.0, PI), PI);
        assert_eq!(arc_difference(PI, 0.0), PI);
    }

    #[test]
    fn curve_rejects_non_increasing() {
        let s = linac();
        let id = identity(&s);
        assert!(GroupCurve::new(vec![(1.0, id.clone()), (1.0, id)]).is_err());
    }

    #[test]
    fn quotient_examples() {
        let spec = GaugeGroupSpec::linac();
        assert_eq!(quotient_spec(&spec, &["phi"]).unwrap().names(), ["z", "c", "i"]);
        assert_eq!(quotient_spec::<&str>(&spec, &[]).unwrap(), spec);
        assert_eq!(quotient_spec(&spec, &["phi", "z", "c", "i"]).unwrap().dim(), 0);
        assert!(matches!(quotient_spec(&spec, &["q"]), Err(Error::UnknownFactor(_))));
    }

    #[test]
    fn normalize_never_returns_tau() {
        assert_eq!(normalize_angle(-1e-18), 0.0);
        assert_eq!(normalize_angle(TAU), 0.0);
        assert!(normalize_angle(-0.5) > 0.0);
    }
}
