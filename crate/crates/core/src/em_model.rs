//! Per-antenna field ratios with and without the target, noiseless signal
//! vectors, noisy snapshots and excess attenuation.
//!
//! All fields are normalized to the free-space field at the central antenna,
//! `E_R(0) = 1`, so the signal vector is dimensionless and `sigma_n` is the
//! noise amplitude relative to a unit central-antenna signal.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{ModelError, Result};
use crate::geometry::{check_clearance, LinkLayout, TargetSheet};
use crate::quadrature::{integrate_2d, QuadratureSpec};

/// Whether the monitored area is empty or holds the target sheet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Occupancy {
    Empty,
    Occupied(TargetSheet),
}

impl Occupancy {
    pub fn from_optional(sheet: Option<TargetSheet>) -> Self {
        sheet.map_or(Occupancy::Empty, Occupancy::Occupied)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    /// `E(m) / E_R(m)`: the target's effect at each antenna on its own.
    RatioPerAntenna,
    /// `E(m) / E_R(0)` or `E_R(m) / E_R(0)`: noiseless signal vector.
    RatioToCenter,
    /// Noisy observation `r`.
    Snapshot,
}

/// Complex per-antenna values indexed `m = -M..=M`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldVector {
    values: Vec<Complex64>,
    kind: FieldKind,
}

impl FieldVector {
    pub fn new(values: Vec<Complex64>, kind: FieldKind) -> Result<Self> {
        if values.len().is_multiple_of(2) {
            return Err(ModelError::invalid(
                "field vector",
                format!("length must be odd, got {}", values.len()),
            ));
        }
        if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(ModelError::invalid("field vector", format!("entry {i} is not finite")));
        }
        Ok(FieldVector { values, kind })
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn half_size(&self) -> u32 {
        (self.values.len() / 2) as u32
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.values
    }

    /// Value at antenna `m`, `None` when out of range.
    pub fn get(&self, m: i32) -> Option<Complex64> {
        let slot = m.checked_add(self.half_size() as i32)?;
        usize::try_from(slot).ok().and_then(|s| self.values.get(s).copied())
    }

    /// `(m, value)` pairs in storage order.
    pub fn indexed(&self) -> impl Iterator<Item = (i32, Complex64)> + '_ {
        let m0 = -(self.half_size() as i32);
        self.values.iter().enumerate().map(move |(i, v)| (m0 + i as i32, *v))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(Complex64::norm_sqr).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    sigma_n: f64,
    seed: u64,
}

impl NoiseModel {
    pub fn new(sigma_n: f64, seed: u64) -> Result<Self> {
        if !(sigma_n.is_finite() && sigma_n >= 0.0) {
            return Err(ModelError::invalid(
                "sigma_n",
                format!("must be finite and >= 0, got {sigma_n}"),
            ));
        }
        Ok(NoiseModel { sigma_n, seed })
    }

    pub fn noiseless() -> Self {
        NoiseModel { sigma_n: 0.0, seed: 0 }
    }

    pub fn sigma_n(&self) -> f64 {
        self.sigma_n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Circularly-symmetric complex Gaussian sample for antenna `m` at
    /// snapshot `t_index`, with `E|n|^2 = sigma_n^2`. The draw depends only on
    /// `(seed, t_index, m)`.
    pub fn sample(&self, t_index: u64, m: i32) -> Complex64 {
        if self.sigma_n == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&t_index.to_le_bytes());
        key[16..24].copy_from_slice(&i64::from(m).to_le_bytes());
        key[24..].copy_from_slice(b"awgn-v1\0");
        let mut rng = ChaCha8Rng::from_seed(key);
        let scale = self.sigma_n * std::f64::consts::FRAC_1_SQRT_2;
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        Complex64::new(re * scale, im * scale)
    }
}

/// Integrand of the diffraction integral for antenna `m`:
/// `exp(-j k (r1 + r2 - d_m)) / (r1 r2)` as a function of the sheet
/// coordinates. Fails if the sheet comes within one wavelength of TX or RX.
pub fn diffraction_integrand(
    layout: &LinkLayout,
    sheet: &TargetSheet,
    m: i32,
) -> Result<impl Fn(f64, f64) -> Complex64 + Send + Sync> {
    check_clearance(layout, sheet, m)?;
    let rx = layout.antenna_position(m)?;
    let tx = layout.transmitter();
    let d_m = layout.link_distance_unchecked(m);
    let k = layout.wavenumber();
    let sheet = *sheet;
    Ok(move |xi2: f64, xi3: f64| {
        let p = sheet.point_unchecked(xi2, xi3);
        let r1 = p.distance(&tx);
        let r2 = p.distance(&rx);
        Complex64::from_polar(1.0 / (r1 * r2), -k * (r1 + r2 - d_m))
    })
}

/// `E(m) / E_R(m) = 1 - j (d_m / lambda) * integral over the sheet`.
pub fn perturbed_ratio(layout: &LinkLayout, sheet: &TargetSheet, m: i32, spec: &QuadratureSpec) -> Result<Complex64> {
    let f = diffraction_integrand(layout, sheet, m)?;
    let integral = integrate_2d(f, sheet.half_width(), sheet.half_height(), spec)?;
    let d_m = layout.link_distance_unchecked(m);
    Ok(Complex64::new(1.0, 0.0) - Complex64::new(0.0, d_m / layout.wavelength()) * integral.value)
}

/// `E_r`: perturbed ratios for every antenna. Antennas are evaluated in
/// parallel and gathered in index order.
pub fn perturbed_ratios(layout: &LinkLayout, sheet: &TargetSheet, spec: &QuadratureSpec) -> Result<FieldVector> {
    let indices: Vec<i32> = layout.indices().collect();
    let values = indices
        .par_iter()
        .map(|&m| perturbed_ratio(layout, sheet, m, spec))
        .collect::<Result<Vec<_>>>()?;
    FieldVector::new(values, FieldKind::RatioPerAntenna)
}

/// `E_R(m) / E_R(0) = (d0 / d_m) exp(-j k (d_m - d0))`.
pub fn reference_ratio(layout: &LinkLayout, m: i32) -> Result<Complex64> {
    layout.check_index(m)?;
    let d_m = layout.link_distance_unchecked(m);
    Ok(Complex64::from_polar(
        layout.d0() / d_m,
        -layout.wavenumber() * (d_m - layout.d0()),
    ))
}

/// Noiseless signal vector `s` with `E_R(0) = 1`.
pub fn signal_vector(layout: &LinkLayout, occupancy: &Occupancy, spec: &QuadratureSpec) -> Result<FieldVector> {
    match occupancy {
        Occupancy::Empty => {
            let values = layout
                .indices()
                .map(|m| reference_ratio(layout, m))
                .collect::<Result<Vec<_>>>()?;
            FieldVector::new(values, FieldKind::RatioToCenter)
        }
        Occupancy::Occupied(sheet) => {
            let ratios = perturbed_ratios(layout, sheet, spec)?;
            occupied_signal(layout, &ratios)
        }
    }
}

/// `diag(a_LoS) E_r`: combine per-antenna ratios with the free-space
/// reference ratios.
pub fn occupied_signal(layout: &LinkLayout, ratios: &FieldVector) -> Result<FieldVector> {
    if ratios.len() != layout.num_antennas() {
        return Err(ModelError::DimensionMismatch {
            expected: layout.num_antennas(),
            got: ratios.len(),
        });
    }
    let values = ratios
        .indexed()
        .map(|(m, e)| reference_ratio(layout, m).map(|a| a * e))
        .collect::<Result<Vec<_>>>()?;
    FieldVector::new(values, FieldKind::RatioToCenter)
}

/// `r = s + n` for snapshot `t_index`.
pub fn snapshot(signal: &FieldVector, noise: &NoiseModel, t_index: u64) -> FieldVector {
    let values = signal.indexed().map(|(m, s)| s + noise.sample(t_index, m)).collect();
    FieldVector {
        values,
        kind: FieldKind::Snapshot,
    }
}

/// `-20 log10 |E / E_R|`, positive when the target absorbs.
pub fn excess_attenuation_db(ratio: Complex64) -> Result<f64> {
    let magnitude = ratio.norm();
    if magnitude == 0.0 {
        return Err(ModelError::InfiniteAttenuation);
    }
    Ok(-20.0 * magnitude.log10())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::wavelength_for;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn ref_layout(half_size: u32) -> LinkLayout {
        LinkLayout::new(wavelength_for(2.4868e9), 5.0, 0.06, half_size, 0.9).unwrap()
    }

    fn target(y: f64) -> TargetSheet {
        TargetSheet::new(0.45, 0.9, 0.0, 2.5, y).unwrap()
    }

    fn spec(layout: &LinkLayout) -> QuadratureSpec {
        QuadratureSpec::for_wavelength(layout.wavelength())
    }

    // Independent midpoint-rule evaluation of the perturbed ratio, written
    // straight from the geometry without the library's helpers.
    fn oracle_ratio(lambda: f64, d0: f64, da: f64, m: i32, y: f64, n: usize) -> Complex64 {
        let (ay, az, x) = (0.45, 0.9, 2.5);
        let k = 2.0 * std::f64::consts::PI / lambda;
        let ym = m as f64 * da;
        let dm = (d0 * d0 + ym * ym).sqrt();
        let (hy, hz) = (2.0 * ay / n as f64, 2.0 * az / n as f64);
        let mut sum = Complex64::new(0.0, 0.0);
        for j in 0..n {
            let z = -az + (j as f64 + 0.5) * hz;
            for i in 0..n {
                let py = y - ay + (i as f64 + 0.5) * hy;
                let r1 = (x * x + py * py + z * z).sqrt();
                let r2 = ((d0 - x).powi(2) + (py - ym).powi(2) + z * z).sqrt();
                sum += Complex64::from_polar(1.0 / (r1 * r2), -k * (r1 + r2 - dm));
            }
        }
        Complex64::new(1.0, 0.0) - Complex64::new(0.0, dm / lambda) * sum * (hy * hz)
    }

    #[test]
    fn reference_ratio_examples() {
        let l = LinkLayout::new(0.12, 5.0, 0.06, 2, 0.9).unwrap();
        assert_eq!(reference_ratio(&l, 0).unwrap(), Complex64::new(1.0, 0.0));
        for m in 1..=2 {
            assert_eq!(reference_ratio(&l, m).unwrap(), reference_ratio(&l, -m).unwrap());
        }
        let a = reference_ratio(&l, 2).unwrap();
        assert_abs_diff_eq!(a.norm(), 0.999712, epsilon = 1e-6);
        assert_abs_diff_eq!(a.arg(), -0.0754, epsilon = 1e-4);
        assert!(reference_ratio(&l, 3).is_err());
    }

    #[test]
    fn empty_signal_vector() {
        let l = ref_layout(0);
        let s = signal_vector(&l, &Occupancy::Empty, &spec(&l)).unwrap();
        assert_eq!(s.as_slice(), &[Complex64::new(1.0, 0.0)]);

        let l = ref_layout(2);
        let s = signal_vector(&l, &Occupancy::Empty, &spec(&l)).unwrap();
        assert_eq!(s.kind(), FieldKind::RatioToCenter);
        for (m, v) in s.indexed() {
            assert_abs_diff_eq!(v.norm(), 5.0 / l.link_distance(m).unwrap(), epsilon = 1e-15);
        }
    }

    #[test]
    fn vanishing_sheet_leaves_field_untouched() {
        let l = ref_layout(2);
        let tiny = TargetSheet::new(1e-9, 0.9, 0.0, 2.5, 0.0).unwrap();
        let r = perturbed_ratio(&l, &tiny, 0, &spec(&l)).unwrap();
        assert!((r - Complex64::new(1.0, 0.0)).norm() < 1e-8);
        assert!(excess_attenuation_db(r).unwrap().abs() < 1e-6);
    }

    #[test]
    fn far_target_barely_perturbs() {
        let l = ref_layout(2);
        let r = perturbed_ratio(&l, &target(10.0), 0, &spec(&l)).unwrap();
        assert!((r - Complex64::new(1.0, 0.0)).norm() < 0.05);
        let oracle = oracle_ratio(l.wavelength(), 5.0, 0.06, 0, 10.0, 600);
        assert!((r - oracle).norm() < 1e-4);
    }

    #[test]
    fn on_link_target_absorbs() {
        let l = ref_layout(2);
        let r = perturbed_ratio(&l, &target(0.0), 0, &spec(&l)).unwrap();
        let oracle = oracle_ratio(l.wavelength(), 5.0, 0.06, 0, 0.0, 600);
        assert!(r.norm() < 1.0);
        assert!((r - oracle).norm() < 1e-4, "{r} vs {oracle}");
        assert_abs_diff_eq!(r.norm(), GOLDEN_CENTER_MAGNITUDE, epsilon = 1e-5);
    }

    // |E(0)/E_R(0)| for the reference scenario, target at (2.5, 0): an
    // independent numpy midpoint sum gives 0.4023947 (n = 2000) and
    // 0.4023896 (n = 4000); Richardson-extrapolated.
    const GOLDEN_CENTER_MAGNITUDE: f64 = 0.402_388;

    #[test]
    fn occupied_signal_matches_oracle_per_antenna() {
        let l = ref_layout(2);
        let s = signal_vector(&l, &Occupancy::Occupied(target(0.2)), &spec(&l)).unwrap();
        for (m, v) in s.indexed() {
            let expected = reference_ratio(&l, m).unwrap() * oracle_ratio(l.wavelength(), 5.0, 0.06, m, 0.2, 600);
            assert!((v - expected).norm() < 1e-4, "m={m}: {v} vs {expected}");
        }
    }

    #[test]
    fn centered_target_gives_mirror_symmetric_signal() {
        let l = ref_layout(2);
        let s = signal_vector(&l, &Occupancy::Occupied(target(0.0)), &spec(&l)).unwrap();
        for m in 1..=2 {
            assert_eq!(s.get(m), s.get(-m));
        }
    }

    #[test]
    fn occupied_signal_factorizes() {
        let l = ref_layout(2);
        let sp = spec(&l);
        let sheet = target(-0.3);
        let er = perturbed_ratios(&l, &sheet, &sp).unwrap();
        let empty = signal_vector(&l, &Occupancy::Empty, &sp).unwrap();
        let occupied = signal_vector(&l, &Occupancy::Occupied(sheet), &sp).unwrap();
        for ((a, e), s) in empty.as_slice().iter().zip(er.as_slice()).zip(occupied.as_slice()) {
            assert_eq!(a * e, *s);
        }
    }

    #[test]
    fn single_antenna_attenuation_is_even_in_y() {
        let l = ref_layout(0);
        let sp = spec(&l);
        for y in [0.1, 0.35, 0.8] {
            let up = excess_attenuation_db(perturbed_ratio(&l, &target(y), 0, &sp).unwrap()).unwrap();
            let down = excess_attenuation_db(perturbed_ratio(&l, &target(-y), 0, &sp).unwrap()).unwrap();
            assert!((up - down).abs() < 1e-6);
        }
    }

    #[test]
    fn singular_geometry_propagates() {
        let l = ref_layout(2);
        let close = TargetSheet::new(0.45, 0.9, 0.0, 4.97, 0.0).unwrap();
        assert!(matches!(
            perturbed_ratio(&l, &close, 0, &spec(&l)),
            Err(ModelError::Singularity { .. })
        ));
    }

    #[test]
    fn attenuation_examples() {
        assert_eq!(excess_attenuation_db(Complex64::new(1.0, 0.0)).unwrap(), 0.0);
        assert_abs_diff_eq!(
            excess_attenuation_db(Complex64::new(0.5, 0.0)).unwrap(),
            6.0206,
            epsilon = 1e-4
        );
        assert_eq!(excess_attenuation_db(Complex64::new(0.0, 1.0)).unwrap(), 0.0);
        assert_eq!(
            excess_attenuation_db(Complex64::new(0.0, 0.0)),
            Err(ModelError::InfiniteAttenuation)
        );
    }

    #[test]
    fn field_vector_validation() {
        assert!(FieldVector::new(vec![Complex64::new(1.0, 0.0); 2], FieldKind::Snapshot).is_err());
        assert!(FieldVector::new(vec![Complex64::new(f64::NAN, 0.0)], FieldKind::Snapshot).is_err());
        let v = FieldVector::new(vec![Complex64::new(1.0, 0.0); 5], FieldKind::Snapshot).unwrap();
        assert_eq!(v.get(-2), Some(Complex64::new(1.0, 0.0)));
        assert_eq!(v.get(3), None);
        assert_eq!(v.get(i32::MIN), None);
    }

    #[test]
    fn noiseless_snapshot_is_the_signal() {
        let l = ref_layout(2);
        let s = signal_vector(&l, &Occupancy::Empty, &spec(&l)).unwrap();
        let r = snapshot(&s, &NoiseModel::new(0.0, 42).unwrap(), 7);
        assert_eq!(r.as_slice(), s.as_slice());
        assert_eq!(r.kind(), FieldKind::Snapshot);
    }

    #[test]
    fn noise_statistics() {
        let sigma = 0.1;
        let noise = NoiseModel::new(sigma, 2024).unwrap();
        let n = 100_000u64;
        let ms = [-2, -1, 0, 1, 2];
        let mut mean = [Complex64::new(0.0, 0.0); 5];
        let mut cov = [[Complex64::new(0.0, 0.0); 5]; 5];
        for t in 0..n {
            let x: Vec<Complex64> = ms.iter().map(|&m| noise.sample(t, m)).collect();
            for i in 0..5 {
                mean[i] += x[i];
                for j in 0..5 {
                    cov[i][j] += x[i] * x[j].conj();
                }
            }
        }
        let var = sigma * sigma;
        for i in 0..5 {
            assert!((mean[i] / n as f64).norm() < 5.0 * sigma / (n as f64).sqrt());
            for (j, c) in cov[i].iter().enumerate() {
                let c = c / n as f64;
                if i == j {
                    assert!((c.re - var).abs() < 0.02 * var, "diag {c}");
                } else {
                    assert!(c.norm() < 0.02 * var, "offdiag {c}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn snapshots_are_reproducible(seed in any::<u64>(), t in any::<u64>(), m in -8i32..=8) {
            let a = NoiseModel::new(0.3, seed).unwrap();
            prop_assert_eq!(a.sample(t, m), a.sample(t, m));
            prop_assert_ne!(a.sample(t, m), a.sample(t.wrapping_add(1), m));
        }
    }
}
