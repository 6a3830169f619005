//! Link, array and target layout.
//!
//! Coordinates: the transmitter sits at the origin, `x` runs along the
//! line of sight to the central antenna, `y` runs along the array and `z` is
//! vertical, measured from the plane of the links (the floor plays no
//! electromagnetic role, so the link height only matters for bookkeeping).
//!
//! Antenna `m` of a `2M + 1` element array sits at `(d0, m * d_a, 0)`.
//! Arrival angles `gamma` are measured from the `+y` end of the array axis,
//! so `gamma = pi/2` is broadside, looking back along the line of sight.

use std::f64::consts::FRAC_PI_2;
use std::f64::consts::PI;

use crate::error::{ModelError, Result};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ORIGIN: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn distance(&self, other: &Vec3) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

/// Wavelength for a carrier frequency in Hz.
pub fn wavelength_for(frequency_hz: f64) -> f64 {
    SPEED_OF_LIGHT / frequency_hz
}

/// Minor semi-axis `sqrt(lambda * d) / 2` of the first Fresnel ellipsoid of a
/// link of length `d`.
pub fn fresnel_radius(wavelength: f64, link_length: f64) -> f64 {
    (wavelength * link_length).sqrt() / 2.0
}

/// Transmitter plus a uniform linear array of `2M + 1` isotropic receivers
/// placed orthogonally to the central line of sight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkLayout {
    wavelength: f64,
    d0: f64,
    spacing: f64,
    half_size: u32,
    height: f64,
}

impl LinkLayout {
    pub fn new(wavelength: f64, d0: f64, spacing: f64, half_size: u32, height: f64) -> Result<Self> {
        check_positive("wavelength", wavelength)?;
        check_positive("d0", d0)?;
        check_positive("d_a", spacing)?;
        if !(height.is_finite() && height >= 0.0) {
            return Err(ModelError::invalid(
                "h",
                format!("must be finite and >= 0, got {height}"),
            ));
        }
        Ok(LinkLayout {
            wavelength,
            d0,
            spacing,
            half_size,
            height,
        })
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    pub fn d0(&self) -> f64 {
        self.d0
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn half_size(&self) -> u32 {
        self.half_size
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn num_antennas(&self) -> usize {
        2 * self.half_size as usize + 1
    }

    /// Antenna indices `-M..=M` in storage order.
    pub fn indices(&self) -> impl Iterator<Item = i32> + Clone {
        let m = self.half_size as i32;
        -m..=m
    }

    /// Storage slot of antenna `m`.
    pub fn slot(&self, m: i32) -> Result<usize> {
        self.check_index(m)?;
        Ok((m + self.half_size as i32) as usize)
    }

    pub fn check_index(&self, m: i32) -> Result<()> {
        if m.unsigned_abs() > self.half_size {
            return Err(ModelError::AntennaOutOfRange {
                m,
                half_size: self.half_size,
            });
        }
        Ok(())
    }

    /// Warning text when the spacing is too tight for the no-coupling
    /// assumption (`d_a > lambda/4`).
    pub fn coupling_warning(&self) -> Option<String> {
        (self.spacing <= self.wavelength / 4.0).then(|| {
            format!(
                "array spacing d_a = {} m is not above lambda/4 = {} m; mutual antenna coupling is \
                 not negligible and the model is approximate",
                self.spacing,
                self.wavelength / 4.0
            )
        })
    }

    pub fn transmitter(&self) -> Vec3 {
        Vec3::ORIGIN
    }

    pub fn antenna_position(&self, m: i32) -> Result<Vec3> {
        self.check_index(m)?;
        Ok(Vec3::new(self.d0, f64::from(m) * self.spacing, 0.0))
    }

    /// LoS length `d_m = sqrt(d0^2 + m^2 d_a^2)` from TX to antenna `m`.
    pub fn link_distance(&self, m: i32) -> Result<f64> {
        self.check_index(m)?;
        Ok(self.link_distance_unchecked(m))
    }

    pub(crate) fn link_distance_unchecked(&self, m: i32) -> f64 {
        if m == 0 {
            return self.d0;
        }
        let y = f64::from(m) * self.spacing;
        (self.d0 * self.d0 + y * y).sqrt()
    }

    /// Angle between the LoS of antenna `m` and the array axis for a wave
    /// arriving at angle `gamma`: `arcsin((d0/d_m) sin gamma)`, taken on the
    /// same side of broadside as `gamma` so that `phi_0 = gamma` on all of
    /// `[0, pi]`.
    pub fn phi(&self, gamma: f64, m: i32) -> Result<f64> {
        self.check_index(m)?;
        check_gamma(gamma)?;
        Ok(self.phi_unchecked(gamma, m))
    }

    pub(crate) fn phi_unchecked(&self, gamma: f64, m: i32) -> f64 {
        if m == 0 {
            return gamma;
        }
        let ratio = self.d0 / self.link_distance_unchecked(m);
        let principal = (ratio * gamma.sin()).clamp(-1.0, 1.0).asin();
        if gamma > FRAC_PI_2 {
            PI - principal
        } else {
            principal
        }
    }
}

/// Perfectly absorbing vertical rectangle standing in for the target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetSheet {
    half_width: f64,
    half_height: f64,
    theta: f64,
    x: f64,
    y: f64,
}

impl TargetSheet {
    /// `half_width` is `a_y`, `half_height` is `a_z`; the barycenter is at
    /// `(x, y, 0)`; `theta` rotates the sheet about its vertical axis, with
    /// positive values turning the `+xi2` edge toward the transmitter.
    pub fn new(half_width: f64, half_height: f64, theta: f64, x: f64, y: f64) -> Result<Self> {
        check_positive("a_y", half_width)?;
        check_positive("a_z", half_height)?;
        if !(theta.is_finite() && (-FRAC_PI_2..=FRAC_PI_2).contains(&theta)) {
            return Err(ModelError::invalid(
                "theta",
                format!("must lie in [-pi/2, pi/2], got {theta}"),
            ));
        }
        if !(x.is_finite() && y.is_finite()) {
            return Err(ModelError::invalid(
                "barycenter",
                format!("must be finite, got ({x}, {y})"),
            ));
        }
        Ok(TargetSheet {
            half_width,
            half_height,
            theta,
            x,
            y,
        })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn half_height(&self) -> f64 {
        self.half_height
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn barycenter(&self) -> Vec3 {
        Vec3::new(self.x, self.y, 0.0)
    }

    pub fn area(&self) -> f64 {
        4.0 * self.half_width * self.half_height
    }

    /// Same sheet moved to another barycenter.
    pub fn moved_to(&self, x: f64, y: f64) -> Result<Self> {
        TargetSheet::new(self.half_width, self.half_height, self.theta, x, y)
    }

    pub fn point(&self, xi2: f64, xi3: f64) -> Result<Vec3> {
        if !(xi2.abs() <= self.half_width && xi3.abs() <= self.half_height) {
            return Err(ModelError::OutsideSheet {
                xi2,
                xi3,
                a_y: self.half_width,
                a_z: self.half_height,
            });
        }
        Ok(self.point_unchecked(xi2, xi3))
    }

    // Mirror-exact: (Y, xi2) -> (-Y, -xi2) yields exactly the mirrored point
    // for theta = 0, which the symmetric quadrature relies on.
    #[inline]
    pub(crate) fn point_unchecked(&self, xi2: f64, xi3: f64) -> Vec3 {
        let (sin_t, cos_t) = self.theta.sin_cos();
        if self.theta == 0.0 {
            Vec3::new(self.x, self.y + xi2, xi3)
        } else {
            Vec3::new(self.x - xi2 * sin_t, self.y + xi2 * cos_t, xi3)
        }
    }

    /// Shortest distance from `p` to any point of the sheet.
    pub fn distance_to(&self, p: &Vec3) -> f64 {
        let (sin_t, cos_t) = self.theta.sin_cos();
        let (dx, dy, dz) = (p.x - self.x, p.y - self.y, p.z);
        // Local frame: u = (-sin, cos, 0) along xi2, v = z along xi3.
        let u = (-dx * sin_t + dy * cos_t).clamp(-self.half_width, self.half_width);
        let v = dz.clamp(-self.half_height, self.half_height);
        p.distance(&self.point_unchecked(u, v))
    }
}

/// Distances `(r1, r2)` from the sheet element at `(xi2, xi3)` to the
/// transmitter and to antenna `m`.
pub fn path_lengths(layout: &LinkLayout, sheet: &TargetSheet, m: i32, xi2: f64, xi3: f64) -> Result<(f64, f64)> {
    let rx = layout.antenna_position(m)?;
    let p = sheet.point(xi2, xi3)?;
    let r1 = p.distance(&layout.transmitter());
    let r2 = p.distance(&rx);
    guard_distance(layout, m, "TX", r1)?;
    guard_distance(layout, m, "RX", r2)?;
    Ok((r1, r2))
}

/// Fails when any point of the sheet is closer than one wavelength to the
/// transmitter or to antenna `m`.
pub fn check_clearance(layout: &LinkLayout, sheet: &TargetSheet, m: i32) -> Result<()> {
    let rx = layout.antenna_position(m)?;
    guard_distance(layout, m, "TX", sheet.distance_to(&layout.transmitter()))?;
    guard_distance(layout, m, "RX", sheet.distance_to(&rx))
}

fn guard_distance(layout: &LinkLayout, m: i32, path: &'static str, distance: f64) -> Result<()> {
    if distance < layout.wavelength() {
        return Err(ModelError::Singularity {
            path,
            m,
            distance,
            wavelength: layout.wavelength(),
        });
    }
    Ok(())
}

pub(crate) fn check_gamma(gamma: f64) -> Result<()> {
    if !(0.0..=PI).contains(&gamma) {
        return Err(ModelError::invalid(
            "gamma",
            format!("must lie in [0, pi], got {gamma}"),
        ));
    }
    Ok(())
}

fn check_positive(field: &'static str, value: f64) -> Result<()> {
    if !(value.is_finite() && value > 0.0) {
        return Err(ModelError::invalid(
            field,
            format!("must be finite and > 0, got {value}"),
        ));
    }
    Ok(())
}
