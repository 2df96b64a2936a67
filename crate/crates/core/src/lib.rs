//! Natural-coordinate calibration of device/detector systems.
//!
//! A device's adjustable degrees of freedom form a product of one-parameter
//! gauge factors ([`group`]). The group acts on detector images
//! ([`action`]); images are compared with pixel k-norms ([`metrics`]). What a
//! detector cannot see is its kernel ([`kernel`]), and the coordinates it can
//! see are recovered from a measured image by minimizing
//! `F(y) = ‖I − s(y).T‖_k` ([`alignment`]). [`scenario`] wires everything
//! into a synthetic linac therapy-plan check, and [`cli`] exposes it on the
//! command line.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod action;
pub mod alignment;
pub mod cli;
pub mod detector;
pub mod error;
pub mod group;
pub mod image_io;
pub mod kernel;
pub mod metrics;
pub mod optimizer;
pub mod plan;
pub mod scenario;

pub use action::{action_defect, apply, ActionBinding, ActionSemantic};
pub use alignment::{brute_force_oracle, calibrate, evaluate_objective, AlignmentResult, ObjectiveSpec, OptimizerConfig};
pub use detector::{DetectorGeometry, Image};
pub use error::{Error, Result};
pub use group::{compose, evaluate_curve, identity, inverse, quotient_spec, Factor, FactorKind, GaugeGroupSpec, GroupCurve, GroupElement};
pub use kernel::{compute_kernel_numeric, enumerate_detector_types, misaligned_line_kernel_demo, DetectorTypeCatalog, KernelReport};
pub use metrics::{distance_k, natural_distance, norm_k, stabilizer_diagnostic, DistanceForm, MetricSpec, WeightVector};
pub use plan::{generate_gaussian_plan, generate_ring_plan, GaussianSpot, RingBand};
pub use scenario::{run_scenario, ScenarioConfig, ScenarioReport};
