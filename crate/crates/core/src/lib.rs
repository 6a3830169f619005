//! Multi-antenna electromagnetic body model for device-free localization.
//!
//! A transmitter illuminates a uniform linear array of `2M + 1` receivers.
//! A target, idealized as a perfectly absorbing vertical sheet, perturbs the
//! field at each antenna; the perturbation is evaluated with a scalar
//! diffraction integral over the sheet. Beamforming the array output with
//! planar look weights and maximizing the received power against the empty
//! scene yields a direction of arrival and an excess attenuation.
//!
//! Modules, bottom up:
//!
//! * [`geometry`]: layout, distances and angles.
//! * [`quadrature`]: tensor-product Gauss-Legendre integration and its
//!   midpoint-rule reference.
//! * [`em_model`]: field ratios, signal vectors, noisy snapshots.
//! * [`array_processing`]: steering vectors, array factors, correlation
//!   matrices, beamformer power.
//! * [`doa`]: the grid-search estimator.
//! * [`scenario`] and [`sweep`]: scenario files, parameter sweeps and the
//!   CSV/JSON outputs used by the `dfl-array` binary.

pub mod array_processing;
pub mod doa;
pub mod em_model;
pub mod error;
pub mod geometry;
pub mod quadrature;
pub mod scenario;
pub mod sweep;

pub use array_processing::{BeamWeights, CorrelationMatrix, Hypothesis, SteeringVector};
pub use doa::{DoaEstimate, GammaGrid, PowerRatioCurve};
pub use em_model::{FieldKind, FieldVector, NoiseModel, Occupancy};
pub use error::{ModelError, QuadratureError};
pub use geometry::{LinkLayout, TargetSheet, Vec3};
pub use quadrature::QuadratureSpec;
pub use scenario::Scenario;
