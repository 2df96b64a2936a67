//! Synthetic dose plans built from Gaussian spots.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::detector::{DetectorGeometry, Image};
use crate::error::{Error, Result};
use crate::group::signed_angle;

/// One Gaussian dose spot centred at `(phi, z)`; `width` is the standard
/// deviation in length units on the unrolled detector surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianSpot {
    pub phi: f64,
    pub z: f64,
    pub amplitude: f64,
    pub width: f64,
}

/// A φ-uniform band of dose around the cylinder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingBand {
    pub z: f64,
    pub amplitude: f64,
    pub width: f64,
}

fn check_spot(phi: f64, z: f64, amplitude: f64, width: f64) -> Result<()> {
    if !(phi.is_finite() && z.is_finite() && amplitude.is_finite() && width.is_finite()) {
        return Err(Error::BadSpotParameters("non-finite parameter".into()));
    }
    if width <= 0.0 {
        return Err(Error::BadSpotParameters(format!("width {width} must be positive")));
    }
    if amplitude < 0.0 {
        return Err(Error::BadSpotParameters(format!("amplitude {amplitude} must be non-negative")));
    }
    Ok(())
}

#[inline]
fn gauss(d2: f64, width: f64) -> f64 {
    (-d2 / (2.0 * width * width)).exp()
}

/// Sum of Gaussian spots sampled at pixel centres.
///
/// On the cylinder each spot is summed over its periodic images in φ. Line
/// pixels integrate the spot across the line, the point detector integrates
/// it completely.
pub fn generate_gaussian_plan(geometry: &DetectorGeometry, spots: &[GaussianSpot]) -> Result<Image> {
    geometry.validate()?;
    for s in spots {
        check_spot(s.phi, s.z, s.amplitude, s.width)?;
    }
    let (rows, cols) = geometry.dims();
    let mut values = vec![0.0; rows * cols];
    match *geometry {
        DetectorGeometry::Cylinder { n_phi, n_z, height } => {
            let radius = geometry.radius().unwrap_or(1.0);
            let circumference = TAU * radius;
            for s in spots {
                let wraps = (6.0 * s.width / circumference).ceil() as i64 + 1;
                for a in 0..n_phi {
                    let dphi = signed_angle(TAU * a as f64 / n_phi as f64 - s.phi);
                    let arc = dphi * radius;
                    let ring: f64 = (-wraps..=wraps)
                        .map(|k| {
                            let x = arc + k as f64 * circumference;
                            gauss(x * x, s.width)
                        })
                        .sum();
                    for b in 0..n_z {
                        let dz = (b as f64 + 0.5) * height / n_z as f64 - s.z;
                        values[a * n_z + b] += s.amplitude * ring * gauss(dz * dz, s.width);
                    }
                }
            }
        }
        DetectorGeometry::Plane { n_x, n_y, width, height } => {
            for s in spots {
                for a in 0..n_x {
                    let dx = (a as f64 + 0.5 - n_x as f64 / 2.0) * width / n_x as f64 - signed_angle(s.phi);
                    for b in 0..n_y {
                        let dz = (b as f64 + 0.5) * height / n_y as f64 - s.z;
                        values[a * n_y + b] += s.amplitude * gauss(dx * dx + dz * dz, s.width);
                    }
                }
            }
        }
        DetectorGeometry::Line { n, length, tilt } => {
            let norm = (1.0 + tilt * tilt).sqrt();
            for s in spots {
                let s0 = (tilt * signed_angle(s.phi) + s.z) / norm;
                let across = (2.0 * PI).sqrt() * s.width;
                for (b, v) in values.iter_mut().enumerate() {
                    let ds = (b as f64 + 0.5) * length / n as f64 - s0;
                    *v += s.amplitude * across * gauss(ds * ds, s.width);
                }
            }
        }
        DetectorGeometry::Point => {
            values[0] = spots.iter().map(|s| s.amplitude * TAU * s.width * s.width).sum();
        }
    }
    Image::new(geometry.clone(), values)
}

/// Plan made of φ-uniform bands. Every row of a cylinder (or plane) image is
/// bit-identical, so the plan is exactly invariant under rotation.
pub fn generate_ring_plan(geometry: &DetectorGeometry, bands: &[RingBand]) -> Result<Image> {
    geometry.validate()?;
    for b in bands {
        check_spot(0.0, b.z, b.amplitude, b.width)?;
    }
    let (rows, cols, height) = match *geometry {
        DetectorGeometry::Cylinder { n_phi, n_z, height } => (n_phi, n_z, height),
        DetectorGeometry::Plane { n_x, n_y, height, .. } => (n_x, n_y, height),
        _ => return Err(Error::InvalidGeometry("ring plans need a cylinder or plane".into())),
    };
    let profile: Vec<f64> = (0..cols)
        .map(|b| {
            let z = (b as f64 + 0.5) * height / cols as f64;
            bands.iter().map(|r| r.amplitude * gauss((z - r.z).powi(2), r.width)).sum()
        })
        .collect();
    let values = (0..rows).flat_map(|_| profile.iter().copied()).collect();
    Image::new(geometry.clone(), values)
}

/// Random spots placed away from the axial edges, widths of 3 to 6 axial
/// pixels. Deterministic for a given seed.
pub fn random_spots(geometry: &DetectorGeometry, seed: u64, count: usize) -> Vec<GaussianSpot> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pitch = geometry.axial_pitch();
    let (lo, hi) = match *geometry {
        DetectorGeometry::Cylinder { height, .. } | DetectorGeometry::Plane { height, .. } => (0.25 * height, 0.75 * height),
        DetectorGeometry::Line { length, .. } => (0.3 * length, 0.7 * length),
        DetectorGeometry::Point => (0.0, 1.0),
    };
    let phi_span = match geometry {
        DetectorGeometry::Line { .. } | DetectorGeometry::Plane { .. } => 0.5,
        _ => PI,
    };
    (0..count)
        .map(|_| GaussianSpot {
            phi: rng.random_range(-phi_span..phi_span),
            z: rng.random_range(lo..hi),
            amplitude: rng.random_range(0.5..1.5),
            width: pitch * rng.random_range(3.0..6.0),
        })
        .collect()
}

/// Plan from [`random_spots`].
pub fn random_spot_plan(geometry: &DetectorGeometry, seed: u64, count: usize) -> Result<Image> {
    generate_gaussian_plan(geometry, &random_spots(geometry, seed, count))
}
