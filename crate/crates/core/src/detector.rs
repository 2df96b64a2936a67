//! Detector geometries and the pixel images they record.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pixel layout of a detector.
///
/// All charts index pixels as `(row, col)`:
///
/// * `Cylinder`: rows run around the axis (`φ_a = 2π·a / n_phi`, periodic),
///   columns along the axis (`z_b = (b + ½)·height / n_z`). The radius is
///   implied by the pixel grid so that pixels are square, see [`Self::radius`].
/// * `Plane`: a flat `n_x × n_y` patch tangent to a unit-radius cylinder; rows
///   follow arc length, columns the axis.
/// * `Line`: a single row of `n` pixels lying on the cylinder surface. `tilt`
///   is the slope `dφ/dz` of the line relative to the axis (0 = aligned). Each
///   pixel integrates dose across the line.
/// * `Point`: one pixel integrating the whole dose field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum DetectorGeometry {
    Cylinder { n_phi: usize, n_z: usize, height: f64 },
    Plane { n_x: usize, n_y: usize, width: f64, height: f64 },
    Line {
        n: usize,
        length: f64,
        #[serde(default)]
        tilt: f64,
    },
    Point,
}

impl DetectorGeometry {
    pub fn cylinder(n_phi: usize, n_z: usize, height: f64) -> Self {
        Self::Cylinder { n_phi, n_z, height }
    }

    pub fn line(n: usize, length: f64) -> Self {
        Self::Line { n, length, tilt: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        match *self {
            Self::Cylinder { n_phi, n_z, height } => {
                if n_phi < 2 || n_z < 1 {
                    return Err(Error::InvalidGeometry("cylinder needs n_phi >= 2 and n_z >= 1".into()));
                }
                if !positive(height) {
                    return Err(Error::InvalidGeometry("cylinder height must be positive".into()));
                }
            }
            Self::Plane { n_x, n_y, width, height } => {
                if n_x < 1 || n_y < 1 || !positive(width) || !positive(height) {
                    return Err(Error::InvalidGeometry("plane needs positive counts and extents".into()));
                }
            }
            Self::Line { n, length, tilt } => {
                if n < 1 || !positive(length) || !tilt.is_finite() {
                    return Err(Error::InvalidGeometry("line needs n >= 1, positive length, finite tilt".into()));
                }
            }
            Self::Point => {}
        }
        Ok(())
    }

    /// Grid dimensions `(rows, cols)`.
    pub fn dims(&self) -> (usize, usize) {
        match *self {
            Self::Cylinder { n_phi, n_z, .. } => (n_phi, n_z),
            Self::Plane { n_x, n_y, .. } => (n_x, n_y),
            Self::Line { n, .. } => (1, n),
            Self::Point => (1, 1),
        }
    }

    pub fn pixel_count(&self) -> usize {
        let (r, c) = self.dims();
        r * c
    }

    /// Cylinder radius making the pixels square: `height·n_phi / (2π·n_z)`.
    pub fn radius(&self) -> Option<f64> {
        match *self {
            Self::Cylinder { n_phi, n_z, height } => Some(height * n_phi as f64 / (TAU * n_z as f64)),
            _ => None,
        }
    }

    /// Axial pixel pitch in length units.
    pub fn axial_pitch(&self) -> f64 {
        match *self {
            Self::Cylinder { n_z, height, .. } => height / n_z as f64,
            Self::Plane { n_y, height, .. } => height / n_y as f64,
            Self::Line { n, length, .. } => length / n as f64,
            Self::Point => 1.0,
        }
    }

    /// Number of chart dimensions a pixel integrates over. The scaling action
    /// rescales recorded dose by `m^dim`.
    pub(crate) fn integrated_dims(&self) -> i32 {
        match self {
            Self::Cylinder { .. } | Self::Plane { .. } => 0,
            Self::Line { .. } => 1,
            Self::Point => 2,
        }
    }
}

/// Non-negative dose values on a detector grid, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    geometry: DetectorGeometry,
    values: Vec<f64>,
}

impl Image {
    pub fn new(geometry: DetectorGeometry, values: Vec<f64>) -> Result<Self> {
        geometry.validate()?;
        let n = geometry.pixel_count();
        if values.len() != n {
            return Err(Error::InvalidImage(format!("expected {n} pixels, got {}", values.len())));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::NonFiniteInput);
        }
        Ok(Self { geometry, values })
    }

    pub fn filled(geometry: DetectorGeometry, value: f64) -> Result<Self> {
        let n = geometry.pixel_count();
        Self::new(geometry, vec![value; n])
    }

    pub fn zeros(geometry: DetectorGeometry) -> Result<Self> {
        Self::filled(geometry, 0.0)
    }

    pub(crate) fn from_raw(geometry: DetectorGeometry, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), geometry.pixel_count());
        Self { geometry, values }
    }

    pub fn geometry(&self) -> &DetectorGeometry {
        &self.geometry
    }

    pub fn dims(&self) -> (usize, usize) {
        self.geometry.dims()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let (_, cols) = self.dims();
        self.values[row * cols + col]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn is_constant(&self) -> bool {
        self.values.windows(2).all(|w| w[0] == w[1])
    }

    /// Pixel-wise sum with another image of the same geometry.
    pub fn add(&self, other: &Image) -> Result<Image> {
        if self.geometry != other.geometry {
            return Err(Error::GeometryMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Image::new(self.geometry.clone(), values)
    }

    /// Adds `noise[j]` to each pixel and clamps at zero.
    pub fn with_noise_clamped(&self, noise: &[f64]) -> Result<Image> {
        if noise.len() != self.values.len() {
            return Err(Error::LengthMismatch {
                expected: self.values.len(),
                got: noise.len(),
            });
        }
        let values = self.values.iter().zip(noise).map(|(v, n)| (v + n).max(0.0)).collect();
        Image::new(self.geometry.clone(), values)
    }

    /// Copy of this image interpreted on another geometry with the same grid.
    pub fn with_geometry(&self, geometry: DetectorGeometry) -> Result<Image> {
        Image::new(geometry, self.values.clone())
    }
}
