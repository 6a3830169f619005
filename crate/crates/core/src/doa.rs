//! Direction-of-arrival and excess-attenuation estimation by beamforming
//! power maximization.
//!
//! For every grid angle the array is steered with planar look weights and
//! the output power of the occupied scene is compared with the power the
//! central antenna receives in the empty scene, `P_0`. The estimate is the
//! grid angle with the largest ratio; its attenuation is
//! `10 log10(P_0 / P_y)` at that angle.

use std::f64::consts::PI;

use crate::array_processing::{beamform_power, correlation_matrix, steering_planar, BeamWeights};
use crate::em_model::{signal_vector, FieldVector, Occupancy};
use crate::error::{ModelError, Result};
use crate::geometry::{LinkLayout, TargetSheet};
use crate::quadrature::QuadratureSpec;

/// Default grid step: 0.1 degree.
pub const DEFAULT_GAMMA_STEP: f64 = PI / 1800.0;

/// Uniform angle grid including both endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaGrid {
    start: f64,
    stop: f64,
    step: f64,
}

impl Default for GammaGrid {
    fn default() -> Self {
        GammaGrid {
            start: 0.0,
            stop: PI,
            step: DEFAULT_GAMMA_STEP,
        }
    }
}

impl GammaGrid {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        if !(start.is_finite() && stop.is_finite() && 0.0 <= start && start < stop && stop <= PI) {
            return Err(ModelError::invalid(
                "gamma_grid",
                format!("need 0 <= start < stop <= pi, got [{start}, {stop}]"),
            ));
        }
        if !(step.is_finite() && step > 0.0) {
            return Err(ModelError::invalid(
                "gamma_grid",
                format!("step must be > 0, got {step}"),
            ));
        }
        Ok(GammaGrid { start, stop, step })
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn stop(&self) -> f64 {
        self.stop
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    fn intervals(&self) -> usize {
        (((self.stop - self.start) / self.step) - 1e-9).ceil().max(1.0) as usize
    }

    pub fn len(&self) -> usize {
        self.intervals() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid angles. Points are interpolated between the endpoints rather than
    /// accumulated, so `start`, `stop` and exact fractions such as `pi/2` are
    /// hit without drift. If the span is not a whole number of steps the
    /// effective step is slightly smaller than requested.
    pub fn points(&self) -> Vec<f64> {
        let n = self.intervals();
        let span = self.stop - self.start;
        (0..=n)
            .map(|i| {
                if i == n {
                    self.stop
                } else {
                    self.start + span * (i as f64 / n as f64)
                }
            })
            .collect()
    }
}

/// `P_y(occupied) / P_0(empty)` sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerRatioCurve {
    pub gammas: Vec<f64>,
    pub ratios: Vec<f64>,
}

impl PowerRatioCurve {
    pub fn len(&self) -> usize {
        self.gammas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gammas.is_empty()
    }

    /// Index of the largest ratio, ties going to the smallest angle.
    pub fn argmax(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, r) in self.ratios.iter().enumerate() {
            match best {
                Some(b) if *r <= self.ratios[b] => {}
                _ => best = Some(i),
            }
        }
        best
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DoaEstimate {
    pub gamma_hat: f64,
    pub attenuation_db: f64,
    pub p0: f64,
    pub py: f64,
    pub curve: PowerRatioCurve,
}

impl DoaEstimate {
    pub fn gamma_hat_deg(&self) -> f64 {
        self.gamma_hat.to_degrees()
    }
}

/// Power received by the central antenna in the empty scene, `1 + sigma_n^2`
/// with the unit-field normalization.
pub fn reference_power_p0(sigma_n: f64) -> f64 {
    1.0 + sigma_n * sigma_n
}

/// Power-ratio curve for an already computed signal vector.
pub fn power_ratio_curve_for_signal(
    layout: &LinkLayout,
    signal: &FieldVector,
    grid: &GammaGrid,
    sigma_n: f64,
) -> Result<PowerRatioCurve> {
    let r = correlation_matrix(signal, sigma_n)?;
    let p0 = reference_power_p0(sigma_n);
    let gammas = grid.points();
    let ratios = gammas
        .iter()
        .map(|&g| {
            let w = BeamWeights::look(&steering_planar(layout, g)?);
            Ok(beamform_power(&r, &w)? / p0)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PowerRatioCurve { gammas, ratios })
}

pub fn power_ratio_curve(
    layout: &LinkLayout,
    sheet: &TargetSheet,
    grid: &GammaGrid,
    sigma_n: f64,
    spec: &QuadratureSpec,
) -> Result<PowerRatioCurve> {
    let s = signal_vector(layout, &Occupancy::Occupied(*sheet), spec)?;
    power_ratio_curve_for_signal(layout, &s, grid, sigma_n)
}

/// Estimate from an already computed signal vector. Passing the empty-scene
/// signal gives the null case.
pub fn estimate_from_signal(
    layout: &LinkLayout,
    signal: &FieldVector,
    grid: &GammaGrid,
    sigma_n: f64,
) -> Result<DoaEstimate> {
    let curve = power_ratio_curve_for_signal(layout, signal, grid, sigma_n)?;
    let best = curve.argmax().expect("grid always has points");
    let ratio = curve.ratios[best];
    if ratio == 0.0 {
        return Err(ModelError::InfiniteAttenuation);
    }
    let p0 = reference_power_p0(sigma_n);
    Ok(DoaEstimate {
        gamma_hat: curve.gammas[best],
        attenuation_db: -10.0 * ratio.log10(),
        p0,
        py: ratio * p0,
        curve,
    })
}

pub fn estimate_doa(
    layout: &LinkLayout,
    sheet: &TargetSheet,
    grid: &GammaGrid,
    sigma_n: f64,
    spec: &QuadratureSpec,
) -> Result<DoaEstimate> {
    let s = signal_vector(layout, &Occupancy::Occupied(*sheet), spec)?;
    estimate_from_signal(layout, &s, grid, sigma_n)
}
