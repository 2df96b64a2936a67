//! Induced action of the gauge group on detector images.
//!
//! Geometric factors act first (one bilinear resampling pass), intensity last.
//! In the `(row, col)` pixel chart a pixel at `p` moves to
//! `center + m·(p − center) + κ(c)·Δ`, where `m = e^c`, `Δ` collects the
//! rotation and translation shifts and `κ(c) = (e^c − 1)/c` (1 at `c = 0`).
//! This is the flow of a single affine generator, so negating all
//! coordinates inverts the pixel map exactly. Output pixels sample the input
//! at `center + (p − κΔ − center)/m`.
//!
//! On a cylinder, radial scaling seen from an on-axis source leaves angles
//! alone: only the axial column direction is magnified and rotation stays a
//! pure periodic row shift. Rows of a cylinder wrap; everything else is
//! zero-filled.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::detector::{DetectorGeometry, Image};
use crate::error::{Error, Result};
use crate::group::{self, signed_angle, GroupElement};
use crate::metrics;

/// Shifts within this many pixels of an integer are snapped, so that
/// angles like `2π·k/n_phi` act as exact index permutations.
const SNAP_PIXELS: f64 = 1e-9;

/// How a gauge factor acts on a detector image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionSemantic {
    /// Rotation about the cylinder axis, in radians.
    RotatePhi,
    /// Translation along the axis, in length units.
    TranslateZ,
    /// Magnification `m = e^c` about `center` (pixel chart, defaults to the
    /// grid center).
    ScaleRadial {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<[f64; 2]>,
    },
    /// Multiplies every pixel by `e^(log-intensity)`.
    MultiplyIntensity,
}

/// Map from factor name to its action on images. Unbound factors, and bound
/// names absent from an element's spec, act trivially.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ActionBinding {
    bindings: BTreeMap<String, ActionSemantic>,
}

impl ActionBinding {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bind(mut self, factor: impl Into<String>, semantic: ActionSemantic) -> Self {
        self.bindings.insert(factor.into(), semantic);
        self
    }

    /// `phi → RotatePhi, z → TranslateZ, c → ScaleRadial, i → MultiplyIntensity`.
    pub fn linac() -> Self {
        Self::new()
            .bind("phi", ActionSemantic::RotatePhi)
            .bind("z", ActionSemantic::TranslateZ)
            .bind("c", ActionSemantic::ScaleRadial { center: None })
            .bind("i", ActionSemantic::MultiplyIntensity)
    }

    pub fn get(&self, factor: &str) -> Option<&ActionSemantic> {
        self.bindings.get(factor)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &ActionSemantic)> {
        self.bindings.iter()
    }
}

/// Net transform of an element after summing coordinates per semantic.
#[derive(Debug, Clone, Copy, Default)]
struct Transform {
    phi: f64,
    z: f64,
    log_m: f64,
    log_i: f64,
    center: Option<[f64; 2]>,
}

impl Transform {
    fn of(g: &GroupElement, binding: &ActionBinding) -> Self {
        let mut t = Transform::default();
        for (factor, &x) in g.spec().factors().iter().zip(g.coords()) {
            match binding.get(&factor.name) {
                Some(ActionSemantic::RotatePhi) => t.phi += x,
                Some(ActionSemantic::TranslateZ) => t.z += x,
                Some(ActionSemantic::ScaleRadial { center }) => {
                    t.log_m += x;
                    if center.is_some() {
                        t.center = *center;
                    }
                }
                Some(ActionSemantic::MultiplyIntensity) => t.log_i += x,
                None => {}
            }
        }
        t
    }
}

fn snap(shift: f64) -> f64 {
    let r = shift.round();
    if (shift - r).abs() < SNAP_PIXELS {
        r
    } else {
        shift
    }
}

#[inline]
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + t * (b - a)
}

struct Sampler<'a> {
    values: &'a [f64],
    rows: usize,
    cols: usize,
    periodic_rows: bool,
}

impl Sampler<'_> {
    #[inline]
    fn at(&self, r: i64, c: i64) -> f64 {
        if c < 0 || c >= self.cols as i64 {
            return 0.0;
        }
        let r = if self.periodic_rows {
            r.rem_euclid(self.rows as i64)
        } else if r < 0 || r >= self.rows as i64 {
            return 0.0;
        } else {
            r
        };
        self.values[r as usize * self.cols + c as usize]
    }

    #[inline]
    fn bilinear(&self, u: f64, v: f64) -> f64 {
        let r0 = u.floor();
        let c0 = v.floor();
        let fr = u - r0;
        let fc = v - c0;
        let (r0, c0) = (r0 as i64, c0 as i64);
        let top = lerp(self.at(r0, c0), self.at(r0, c0 + 1), fc);
        if fr == 0.0 {
            return top;
        }
        let bottom = lerp(self.at(r0 + 1, c0), self.at(r0 + 1, c0 + 1), fc);
        lerp(top, bottom, fr)
    }
}

/// Row and column shifts (pixels) induced by rotation `phi` and translation `z`.
fn pixel_shifts(geometry: &DetectorGeometry, phi: f64, z: f64) -> (f64, f64) {
    match *geometry {
        DetectorGeometry::Cylinder { n_phi, n_z, height } => {
            (group::normalize_angle(phi) * n_phi as f64 / TAU, z * n_z as f64 / height)
        }
        DetectorGeometry::Plane { n_x, n_y, width, height } => {
            (signed_angle(phi) * n_x as f64 / width, z * n_y as f64 / height)
        }
        DetectorGeometry::Line { n, length, tilt } => {
            let along = (tilt * signed_angle(phi) + z) / (1.0 + tilt * tilt).sqrt();
            (0.0, along * n as f64 / length)
        }
        DetectorGeometry::Point => (0.0, 0.0),
    }
}

/// Applies `g` to `img` through `binding`: the image `g.img`.
pub fn apply(g: &GroupElement, img: &Image, binding: &ActionBinding) -> Result<Image> {
    if img.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    let t = Transform::of(g, binding);
    let geometry = img.geometry();
    let (rows, cols) = geometry.dims();

    let has_scale = t.log_m != 0.0 && !matches!(geometry, DetectorGeometry::Point);
    // a cylinder's radial scaling keeps angles and magnifies the axis only
    let scale_rows = has_scale && !matches!(geometry, DetectorGeometry::Cylinder { .. });
    let (mut dr, mut dc) = pixel_shifts(geometry, t.phi, t.z);
    if has_scale {
        // exponential coordinates: (Δ, c) flows along one affine generator,
        // so the element with negated coordinates acts as the exact inverse
        let k = t.log_m.exp_m1() / t.log_m;
        dc *= k;
        if scale_rows {
            dr *= k;
        }
    }
    let (dr, dc) = (snap(dr), snap(dc));

    let mut out = if dr == 0.0 && dc == 0.0 && !has_scale {
        img.values().to_vec()
    } else {
        let sampler = Sampler {
            values: img.values(),
            rows,
            cols,
            periodic_rows: matches!(geometry, DetectorGeometry::Cylinder { .. }),
        };
        let inv_m = (-t.log_m).exp();
        let [cr, cc] = t.center.unwrap_or([(rows as f64 - 1.0) / 2.0, (cols as f64 - 1.0) / 2.0]);
        let mut out = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                let mut u = r as f64 - dr;
                let mut v = c as f64 - dc;
                if scale_rows {
                    u = cr + (u - cr) * inv_m;
                }
                if has_scale {
                    v = cc + (v - cc) * inv_m;
                }
                out.push(sampler.bilinear(u, v));
            }
        }
        out
    };

    let log_gain = t.log_i + geometry.integrated_dims() as f64 * t.log_m;
    if log_gain != 0.0 {
        let gain = log_gain.exp();
        out.iter_mut().for_each(|v| *v *= gain);
    }
    out.iter_mut().for_each(|v| *v = v.max(0.0));
    Ok(Image::from_raw(geometry.clone(), out))
}

/// Relative defect `‖g.(h.I) − (gh).I‖₂ / ‖I‖₂` of the pixelized action.
pub fn action_defect(g: &GroupElement, h: &GroupElement, img: &Image, binding: &ActionBinding) -> Result<f64> {
    let n = metrics::l2(img.values());
    if n == 0.0 {
        return Err(Error::ZeroImage);
    }
    let gh = group::compose(g, h)?;
    let lhs = apply(g, &apply(h, img, binding)?, binding)?;
    let rhs = apply(&gh, img, binding)?;
    Ok(metrics::l2_diff(lhs.values(), rhs.values()) / n)
}
