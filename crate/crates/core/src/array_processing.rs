//! Steering vectors, array factors, beamforming weights and output power.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::em_model::FieldVector;
use crate::error::{ModelError, Result};
use crate::geometry::{check_gamma, LinkLayout};
use crate::quadrature::compensated_sum;

/// Wavefront assumption used to build a steering vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Hypothesis {
    /// Far-field plane wave.
    Planar,
    /// Spherical wavefront seen from a transmitter at distance `d0`.
    NonPlanar,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector {
    values: Vec<Complex64>,
    hypothesis: Hypothesis,
    gamma: f64,
}

impl SteeringVector {
    pub fn as_slice(&self) -> &[Complex64] {
        &self.values
    }

    pub fn hypothesis(&self) -> Hypothesis {
        self.hypothesis
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(Complex64::norm_sqr).sum()
    }
}

/// `a_m = exp(j m k d_a cos gamma)`.
pub fn steering_planar(layout: &LinkLayout, gamma: f64) -> Result<SteeringVector> {
    check_gamma(gamma)?;
    let phase_step = layout.wavenumber() * layout.spacing() * gamma.cos();
    let values = layout
        .indices()
        .map(|m| Complex64::from_polar(1.0, f64::from(m) * phase_step))
        .collect();
    Ok(SteeringVector {
        values,
        hypothesis: Hypothesis::Planar,
        gamma,
    })
}

/// `a_m = (d0/d_m) exp(j m k d_a cos((gamma + phi_m)/2) / cos((gamma - phi_m)/2))`.
pub fn steering_nonplanar(layout: &LinkLayout, gamma: f64) -> Result<SteeringVector> {
    check_gamma(gamma)?;
    let kd = layout.wavenumber() * layout.spacing();
    let values = layout
        .indices()
        .map(|m| {
            if m == 0 {
                return Complex64::new(1.0, 0.0);
            }
            let phi = layout.phi_unchecked(gamma, m);
            let skew = ((gamma + phi) / 2.0).cos() / ((gamma - phi) / 2.0).cos();
            let gain = layout.d0() / layout.link_distance_unchecked(m);
            Complex64::from_polar(gain, f64::from(m) * kd * skew)
        })
        .collect();
    Ok(SteeringVector {
        values,
        hypothesis: Hypothesis::NonPlanar,
        gamma,
    })
}

pub fn steering(layout: &LinkLayout, gamma: f64, hypothesis: Hypothesis) -> Result<SteeringVector> {
    match hypothesis {
        Hypothesis::Planar => steering_planar(layout, gamma),
        Hypothesis::NonPlanar => steering_nonplanar(layout, gamma),
    }
}

/// Linear beamforming coefficients `w`.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamWeights(Vec<Complex64>);

impl BeamWeights {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        if values.iter().any(|w| !(w.re.is_finite() && w.im.is_finite())) {
            return Err(ModelError::invalid("weights", "entries must be finite"));
        }
        if values.iter().all(|w| w.norm_sqr() == 0.0) {
            return Err(ModelError::invalid("weights", "must not be all zero"));
        }
        Ok(BeamWeights(values))
    }

    /// `w_m = 1 / (2M + 1)`.
    pub fn uniform(num_antennas: usize) -> Self {
        let n = num_antennas.max(1);
        BeamWeights(vec![Complex64::new(1.0 / n as f64, 0.0); n])
    }

    /// Weights that steer the array toward the steering vector's angle:
    /// `w = conj(a) / (2M + 1)`, so the array factor `w^T a` is coherent
    /// there.
    pub fn look(steering: &SteeringVector) -> Self {
        let n = steering.len() as f64;
        BeamWeights(steering.values.iter().map(|a| a.conj() / n).collect())
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        BeamWeights::new(self.0.iter().map(|w| w * factor).collect())
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(Complex64::norm_sqr).sum()
    }
}

/// `F_a = w^T a(gamma)`. Compensated, so uniform weights give exactly 1 at
/// the coherent angle.
pub fn array_factor(
    layout: &LinkLayout,
    weights: &BeamWeights,
    gamma: f64,
    hypothesis: Hypothesis,
) -> Result<Complex64> {
    let a = steering(layout, gamma, hypothesis)?;
    check_len(a.len(), weights.len())?;
    Ok(compensated_sum(weights.0.iter().zip(&a.values).map(|(w, a)| w * a)))
}

/// Beamformer output `y = w^H r`.
pub fn beamform_output(weights: &BeamWeights, received: &FieldVector) -> Result<Complex64> {
    check_len(weights.len(), received.len())?;
    Ok(compensated_sum(
        weights.0.iter().zip(received.as_slice()).map(|(w, r)| w.conj() * r),
    ))
}

/// Autocorrelation matrix `R = E[r r^H]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix(DMatrix<Complex64>);

impl CorrelationMatrix {
    pub fn from_matrix(matrix: DMatrix<Complex64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(ModelError::invalid("correlation matrix", "must be square"));
        }
        Ok(CorrelationMatrix(matrix))
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.0.diagonal().iter().map(|d| d.re).sum()
    }

    /// `max |R - R^H|` over all entries.
    pub fn hermitian_defect(&self) -> f64 {
        let adjoint = self.0.adjoint();
        (&self.0 - adjoint).iter().map(|d| d.norm()).fold(0.0, f64::max)
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let hermitian = (&self.0 + self.0.adjoint()) * Complex64::new(0.5, 0.0);
        hermitian
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Hermitian within `1e-12` and no eigenvalue below `-1e-10 * trace`.
    pub fn is_hermitian_psd(&self) -> bool {
        let floor = -1e-10 * self.trace().abs().max(f64::MIN_POSITIVE);
        self.hermitian_defect() < 1e-12 && self.min_eigenvalue() >= floor
    }
}

/// Analytic `R = s s^H + sigma_n^2 I` for a deterministic signal in white
/// noise.
pub fn correlation_matrix(signal: &FieldVector, sigma_n: f64) -> Result<CorrelationMatrix> {
    if !(sigma_n.is_finite() && sigma_n >= 0.0) {
        return Err(ModelError::invalid(
            "sigma_n",
            format!("must be finite and >= 0, got {sigma_n}"),
        ));
    }
    let s = DVector::from_column_slice(signal.as_slice());
    let mut r = &s * s.adjoint();
    let noise = sigma_n * sigma_n;
    for i in 0..r.nrows() {
        r[(i, i)] += noise;
    }
    Ok(CorrelationMatrix(r))
}

/// Output power `P_y = w^H R w`.
pub fn beamform_power(correlation: &CorrelationMatrix, weights: &BeamWeights) -> Result<f64> {
    check_len(correlation.dim(), weights.len())?;
    let w = DVector::from_column_slice(weights.as_slice());
    let p = (w.adjoint() * &correlation.0 * &w)[(0, 0)];
    // Imaginary part is rounding only for Hermitian R.
    Ok(p.re.max(0.0))
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(ModelError::DimensionMismatch { expected, got });
    }
    Ok(())
}
