//! Plane geometry shared by every other module: discs, open sectors,
//! equispaced circle grids and finite-difference Wirtinger derivatives.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default multiplicative padding applied by [`minimal_enclosing_sector`].
pub const DEFAULT_SECTOR_PADDING: f64 = 1.05;

/// Smallest angular length handed out for a sector, so that a set of
/// collinear values still gets an open sector around it.
pub const MIN_SECTOR_WIDTH: f64 = 1e-9;

/// Closed disc `|z - center| <= radius`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disc {
    center: Complex64,
    radius: f64,
}

impl Disc {
    pub fn new(center: Complex64, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::invalid(format!("disc radius must be positive, got {radius}")));
        }
        Ok(Self { center, radius })
    }

    pub fn unit() -> Self {
        Self { center: Complex64::new(0.0, 0.0), radius: 1.0 }
    }

    pub fn centered(radius: f64) -> Result<Self> {
        Self::new(Complex64::new(0.0, 0.0), radius)
    }

    pub fn center(&self) -> Complex64 {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn contains(&self, z: Complex64) -> bool {
        (z - self.center).norm() <= self.radius
    }

    /// Tensor polar grid: the center plus `n_radii` rings at radii
    /// `radius * i / n_radii` (i = 1..=n_radii), each carrying `n_angles`
    /// equispaced points starting at angle 0.
    pub fn polar_grid(&self, n_radii: usize, n_angles: usize) -> Vec<Complex64> {
        let mut pts = Vec::with_capacity(n_radii * n_angles + 1);
        pts.push(self.center);
        for i in 1..=n_radii {
            let r = self.radius * i as f64 / n_radii as f64;
            for m in 0..n_angles {
                let theta = TAU * m as f64 / n_angles as f64;
                pts.push(self.center + Complex64::from_polar(r, theta));
            }
        }
        pts
    }

    /// Polar grid restricted to the annulus `inner <= |z - center| <= radius`,
    /// with `n_radii` rings spaced evenly from `inner` to the outer radius.
    pub fn annulus_grid(&self, inner: f64, n_radii: usize, n_angles: usize) -> Vec<Complex64> {
        let mut pts = Vec::with_capacity(n_radii * n_angles);
        for i in 0..n_radii {
            let t = if n_radii == 1 { 1.0 } else { i as f64 / (n_radii - 1) as f64 };
            let r = inner + (self.radius - inner) * t;
            for m in 0..n_angles {
                let theta = TAU * m as f64 / n_angles as f64;
                pts.push(self.center + Complex64::from_polar(r, theta));
            }
        }
        pts
    }
}

/// Open sector `{vertex + r e^{iθ} : r > 0, θ_lo < θ < θ_hi}`.
///
/// The bounds are stored as given (not reduced mod 2π) so an interval can
/// straddle the branch cut of the principal argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sector {
    vertex: Complex64,
    theta_lo: f64,
    theta_hi: f64,
}

impl Sector {
    pub fn new(vertex: Complex64, theta_lo: f64, theta_hi: f64) -> Result<Self> {
        let len = theta_hi - theta_lo;
        if !(len > 0.0 && len < TAU) {
            return Err(Error::invalid(format!(
                "sector angular length must lie in (0, 2π), got {len}"
            )));
        }
        Ok(Self { vertex, theta_lo, theta_hi })
    }

    /// Sector with vertex 0.
    pub fn at_origin(theta_lo: f64, theta_hi: f64) -> Result<Self> {
        Self::new(Complex64::new(0.0, 0.0), theta_lo, theta_hi)
    }

    pub fn vertex(&self) -> Complex64 {
        self.vertex
    }

    pub fn theta_lo(&self) -> f64 {
        self.theta_lo
    }

    pub fn theta_hi(&self) -> f64 {
        self.theta_hi
    }

    pub fn angular_length(&self) -> f64 {
        self.theta_hi - self.theta_lo
    }

    pub fn bisector(&self) -> f64 {
        0.5 * (self.theta_lo + self.theta_hi)
    }

    /// Angle of `w - vertex` measured counter-clockwise from `theta_lo`,
    /// reduced to `[0, 2π)`. `None` at the vertex.
    fn offset(&self, w: Complex64) -> Option<f64> {
        let d = w - self.vertex;
        if d.re == 0.0 && d.im == 0.0 {
            return None;
        }
        Some((d.arg() - self.theta_lo).rem_euclid(TAU))
    }

    /// Membership in the open sector.
    pub fn contains(&self, w: Complex64) -> bool {
        match self.offset(w) {
            Some(t) => t > 0.0 && t < self.angular_length(),
            None => false,
        }
    }

    /// Membership in the closed sector, with an angular tolerance on both
    /// bounding rays. The vertex belongs to the closed sector.
    pub fn closure_contains(&self, w: Complex64, tol: f64) -> bool {
        match self.offset(w) {
            Some(t) => t <= self.angular_length() + tol || t >= TAU - tol,
            None => true,
        }
    }

    /// The same sector rotated about its vertex by `angle`.
    pub fn rotated(&self, angle: f64) -> Self {
        Self { vertex: self.vertex, theta_lo: self.theta_lo + angle, theta_hi: self.theta_hi + angle }
    }
}

/// Open sector at 0 returned by [`minimal_enclosing_sector`], together with
/// the exact circular spread of the input arguments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnclosingSector {
    pub sector: Sector,
    pub spread: f64,
}

/// Circular spread of a set of angles: `2π` minus the largest gap between
/// consecutive sorted angles (wrap-around included). Also returns the angle
/// at which the covering arc starts.
pub fn circular_spread(angles: &mut [f64]) -> Option<(f64, f64)> {
    if angles.is_empty() {
        return None;
    }
    angles.sort_by(|a, b| a.total_cmp(b));
    let n = angles.len();
    let mut max_gap = angles[0] + TAU - angles[n - 1];
    let mut start = angles[0];
    for i in 1..n {
        let gap = angles[i] - angles[i - 1];
        if gap > max_gap {
            max_gap = gap;
            start = angles[i];
        }
    }
    Some((TAU - max_gap, start))
}

/// Smallest open sector at the origin containing every value, padded by
/// `padding` (a factor ≥ 1). Returns `Ok(None)` when no padded sector of
/// angular length below 2π exists.
pub fn minimal_enclosing_sector_padded(
    values: &[Complex64],
    padding: f64,
) -> Result<Option<EnclosingSector>> {
    if values.is_empty() {
        return Err(Error::invalid("minimal_enclosing_sector needs at least one value"));
    }
    let mut angles = Vec::with_capacity(values.len());
    for v in values {
        if v.re == 0.0 && v.im == 0.0 {
            return Err(Error::invalid("zero value passed to minimal_enclosing_sector"));
        }
        angles.push(v.arg());
    }
    let (spread, start) = circular_spread(&mut angles).expect("nonempty");
    if spread * padding >= TAU {
        return Ok(None);
    }
    let width = (spread * padding).max(spread + MIN_SECTOR_WIDTH);
    let width = if width >= TAU { 0.5 * (spread + TAU) } else { width };
    let mid = start + 0.5 * spread;
    let lo = mid - 0.5 * width;
    let sector = Sector::at_origin(lo, lo + width)?;
    Ok(Some(EnclosingSector { sector, spread }))
}

/// [`minimal_enclosing_sector_padded`] with the default padding.
pub fn minimal_enclosing_sector(values: &[Complex64]) -> Result<Option<EnclosingSector>> {
    minimal_enclosing_sector_padded(values, DEFAULT_SECTOR_PADDING)
}

/// Equispaced samples `e^{2πim/n}` on the unit circle.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleGrid {
    points: Vec<Complex64>,
}

impl CircleGrid {
    pub const MIN_POINTS: usize = 8;

    pub fn new(n: usize) -> Result<Self> {
        if n < Self::MIN_POINTS {
            return Err(Error::invalid(format!("circle grid needs at least 8 points, got {n}")));
        }
        let points = (0..n).map(|m| Complex64::from_polar(1.0, TAU * m as f64 / n as f64)).collect();
        Ok(Self { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    /// Half the arc length between neighbouring samples, `π/n`.
    pub fn half_spacing(&self) -> f64 {
        PI / self.points.len() as f64
    }
}

/// Default finite-difference step at `z`.
pub fn default_step(z: Complex64) -> f64 {
    1e-5 * z.norm().max(1.0)
}

/// Central-difference Wirtinger derivatives `(∂φ/∂z, ∂φ/∂z̄)` at `z`.
pub fn wirtinger_fd<F, E>(phi: F, z: Complex64, h: f64) -> std::result::Result<(Complex64, Complex64), E>
where
    F: Fn(Complex64) -> std::result::Result<Complex64, E>,
{
    let dx = (phi(z + h)? - phi(z - h)?) / (2.0 * h);
    let ih = Complex64::new(0.0, h);
    let dy = (phi(z + ih)? - phi(z - ih)?) / (2.0 * h);
    let i = Complex64::i();
    Ok(((dx - i * dy) * 0.5, (dx + i * dy) * 0.5))
}

/// [`wirtinger_fd`] for functions that cannot fail.
pub fn wirtinger_fd_total<F>(phi: F, z: Complex64, h: f64) -> (Complex64, Complex64)
where
    F: Fn(Complex64) -> Complex64,
{
    wirtinger_fd::<_, std::convert::Infallible>(|w| Ok(phi(w)), z, h).unwrap_or_else(|e| match e {})
}

/// `|∂φ/∂z| + |∂φ/∂z̄|`.
pub fn gradient_norm(d: (Complex64, Complex64)) -> f64 {
    d.0.norm() + d.1.norm()
}
