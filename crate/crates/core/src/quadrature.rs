//! Tensor-product Gauss-Legendre integration over the target rectangle.
//!
//! Each axis of `[-a_y, a_y] x [-a_z, a_z]` is cut into uniform panels with a
//! fixed Gauss-Legendre rule per panel. Panels are halved until two
//! successive levels agree to `rel_tol`, measured against the integral of
//! `|f|` so that cancelling integrands still terminate.
//!
//! Nodes are laid out mirror-exactly about zero and the inner sum adds each
//! mirror pair `f(x) + f(-x)` before accumulating. An integrand that is the
//! mirror image of another in `xi2` therefore integrates to a bit-identical
//! result; the array model depends on this for its `m <-> -m` symmetry.

use num_complex::Complex64;

use crate::error::QuadratureError;

/// Hard cap on panel-halving steps.
pub const MAX_REFINEMENT_LEVELS: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub panel_max_side: f64,
    pub points_per_panel: usize,
    pub rel_tol: f64,
}

impl QuadratureSpec {
    pub fn new(panel_max_side: f64, points_per_panel: usize, rel_tol: f64) -> Result<Self, QuadratureError> {
        let spec = QuadratureSpec {
            panel_max_side,
            points_per_panel,
            rel_tol,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Defaults tuned for the diffraction integrand: quarter-wave panels,
    /// four nodes per panel and axis, `1e-6` relative tolerance.
    pub fn for_wavelength(wavelength: f64) -> Self {
        QuadratureSpec {
            panel_max_side: wavelength / 4.0,
            points_per_panel: 4,
            rel_tol: 1e-6,
        }
    }

    pub fn validate(&self) -> Result<(), QuadratureError> {
        if !(self.panel_max_side.is_finite() && self.panel_max_side > 0.0) {
            return Err(QuadratureError::InvalidSpec(format!(
                "panel_max_side must be > 0, got {}",
                self.panel_max_side
            )));
        }
        if self.points_per_panel < 2 {
            return Err(QuadratureError::InvalidSpec(format!(
                "points_per_panel must be >= 2, got {}",
                self.points_per_panel
            )));
        }
        if !(self.rel_tol.is_finite() && self.rel_tol > 0.0) {
            return Err(QuadratureError::InvalidSpec(format!(
                "rel_tol must be > 0, got {}",
                self.rel_tol
            )));
        }
        Ok(())
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: Complex64,
    /// `|I_L - I_{L-1}|` between the last two levels.
    pub error_estimate: f64,
    /// Number of halvings performed (0 when the domain is empty).
    pub levels: u32,
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, ascending, mirror-exact.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // Newton converges from the right end, x > 0.
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite rule on `[-half, half]` stored as mirror pairs.
#[derive(Debug, Clone)]
struct AxisRule {
    /// `(x, w)` with `x < 0`; the mirror node is `-x` with the same weight.
    pairs: Vec<(f64, f64)>,
    center: Option<f64>,
}

impl AxisRule {
    fn new(half: f64, panels: usize, gl: &(Vec<f64>, Vec<f64>)) -> Self {
        let (t, w) = gl;
        let h = 2.0 * half / panels as f64;
        let mut all = Vec::with_capacity(panels * t.len());
        for i in 0..panels {
            let left = -half + h * i as f64;
            for (tj, wj) in t.iter().zip(w) {
                all.push((left + 0.5 * h * (1.0 + tj), 0.5 * h * wj));
            }
        }
        let count = all.len();
        let pairs = all[..count / 2].to_vec();
        let center = (count % 2 == 1).then(|| all[count / 2].1);
        AxisRule { pairs, center }
    }

    fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.pairs
            .iter()
            .copied()
            .chain(self.center.map(|w| (0.0, w)))
            .chain(self.pairs.iter().rev().map(|&(x, w)| (-x, w)))
    }
}

/// Fixed (non-adaptive) tensor-product rule over `[-a_y, a_y] x [-a_z, a_z]`.
#[derive(Debug, Clone)]
pub struct TensorRule {
    across: AxisRule,
    vertical: AxisRule,
}

impl TensorRule {
    pub fn new(a_y: f64, a_z: f64, panels_y: usize, panels_z: usize, points: usize) -> Self {
        let gl = gauss_legendre(points);
        TensorRule {
            across: AxisRule::new(a_y, panels_y.max(1), &gl),
            vertical: AxisRule::new(a_z, panels_z.max(1), &gl),
        }
    }

    /// Returns `(integral of f, integral of |f|)`.
    pub fn integrate<F>(&self, f: &F) -> Result<(Complex64, f64), QuadratureError>
    where
        F: Fn(f64, f64) -> Complex64 + ?Sized,
    {
        let mut outer = Neumaier::default();
        let mut outer_abs = 0.0;
        for (xi3, wz) in self.vertical.nodes() {
            let mut inner = Neumaier::default();
            let mut inner_abs = 0.0;
            for &(xi2, wy) in &self.across.pairs {
                let left = eval(f, xi2, xi3)?;
                let right = eval(f, -xi2, xi3)?;
                inner.add((left + right) * wy);
                inner_abs += (left.norm() + right.norm()) * wy;
            }
            if let Some(wy) = self.across.center {
                let mid = eval(f, 0.0, xi3)?;
                inner.add(mid * wy);
                inner_abs += mid.norm() * wy;
            }
            outer.add(inner.total() * wz);
            outer_abs += inner_abs * wz;
        }
        Ok((outer.total(), outer_abs))
    }
}

#[inline]
fn eval<F>(f: &F, xi2: f64, xi3: f64) -> Result<Complex64, QuadratureError>
where
    F: Fn(f64, f64) -> Complex64 + ?Sized,
{
    let v = f(xi2, xi3);
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(QuadratureError::NonFinite { xi2, xi3 })
    }
}

/// Adaptive integration of `f` over `[-a_y, a_y] x [-a_z, a_z]`.
pub fn integrate_2d<F>(f: F, a_y: f64, a_z: f64, spec: &QuadratureSpec) -> Result<Integral, QuadratureError>
where
    F: Fn(f64, f64) -> Complex64,
{
    spec.validate()?;
    if !(a_y.is_finite() && a_z.is_finite() && a_y >= 0.0 && a_z >= 0.0) {
        return Err(QuadratureError::InvalidSpec(format!(
            "half extents must be finite and >= 0, got ({a_y}, {a_z})"
        )));
    }
    if a_y == 0.0 || a_z == 0.0 {
        return Ok(Integral {
            value: Complex64::new(0.0, 0.0),
            error_estimate: 0.0,
            levels: 0,
        });
    }

    let base_y = panels_for(2.0 * a_y, spec.panel_max_side);
    let base_z = panels_for(2.0 * a_z, spec.panel_max_side);
    let p = spec.points_per_panel;

    let (mut previous, _) = TensorRule::new(a_y, a_z, base_y, base_z, p).integrate(&f)?;
    let mut error_estimate = f64::INFINITY;
    for level in 1..=MAX_REFINEMENT_LEVELS {
        let scale = 1usize << level;
        let rule = TensorRule::new(a_y, a_z, base_y * scale, base_z * scale, p);
        let (current, l1) = rule.integrate(&f)?;
        error_estimate = (current - previous).norm();
        if error_estimate <= spec.rel_tol * l1 {
            return Ok(Integral {
                value: current,
                error_estimate,
                levels: level,
            });
        }
        previous = current;
    }
    Err(QuadratureError::NotConverged {
        value_re: previous.re,
        value_im: previous.im,
        error_estimate,
        levels: MAX_REFINEMENT_LEVELS,
    })
}

fn panels_for(extent: f64, max_side: f64) -> usize {
    ((extent / max_side).ceil() as usize).max(1)
}

/// Midpoint Riemann sum on an `n x n` grid. Deliberately plain; used as the
/// reference against which [`integrate_2d`] is checked.
pub fn integrate_2d_oracle<F>(f: F, a_y: f64, a_z: f64, n_per_axis: usize) -> Complex64
where
    F: Fn(f64, f64) -> Complex64,
{
    assert!(n_per_axis >= 10, "oracle needs at least 10 cells per axis");
    let n = n_per_axis as f64;
    let (hy, hz) = (2.0 * a_y / n, 2.0 * a_z / n);
    let mut sum = Complex64::new(0.0, 0.0);
    for j in 0..n_per_axis {
        let xi3 = -a_z + (j as f64 + 0.5) * hz;
        let mut row = Complex64::new(0.0, 0.0);
        for i in 0..n_per_axis {
            row += f(-a_y + (i as f64 + 0.5) * hy, xi3);
        }
        sum += row;
    }
    sum * (hy * hz)
}

/// Neumaier-compensated complex accumulator.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct Neumaier {
    sum: Complex64,
    carry: Complex64,
}

impl Neumaier {
    #[inline]
    pub(crate) fn add(&mut self, v: Complex64) {
        let (s, c) = two_sum(self.sum.re, v.re);
        let (t, d) = two_sum(self.sum.im, v.im);
        self.sum = Complex64::new(s, t);
        self.carry += Complex64::new(c, d);
    }

    pub(crate) fn total(&self) -> Complex64 {
        self.sum + self.carry
    }
}

pub(crate) fn compensated_sum(values: impl IntoIterator<Item = Complex64>) -> Complex64 {
    let mut acc = Neumaier::default();
    values.into_iter().for_each(|v| acc.add(v));
    acc.total()
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let err = if a.abs() >= b.abs() { (a - s) + b } else { (b - s) + a };
    (s, err)
}
