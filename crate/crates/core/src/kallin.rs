//! Kallin separation of the sheets: the polynomial `p(z, w) = z w / C_*` maps
//! sheet `j` into a wedge of half-angle `arctan(C/(1-C))` around the ray
//! `arg ω_j`, and these wedges meet only at 0 when `C` is below the size
//! bound. Also the symmetrization that turns approximants on the sheets into
//! polynomials in `(z, w^Δ)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::approx::{sector_scan, ScanConfig};
use crate::complex::Disc;
use crate::error::{Error, Result};
use crate::poly::BiPoly;
use crate::sheets::SheetSystem;
use crate::surface::size_rhs;

/// Midpoint of the admissible interval `(A, size_rhs(Δ))`.
pub fn choose_c(a: f64, delta: usize) -> Result<f64> {
    let rhs = size_rhs(delta as i64)?;
    if !(a < rhs) {
        return Err(Error::invalid(format!("empty interval for C: A = {a} is not below {rhs}")));
    }
    Ok(0.5 * (a + rhs))
}

/// Full opening angle `2 arctan(C / (1 - C))` of each wedge.
pub fn vertex_angle(c: f64) -> f64 {
    2.0 * (c / (1.0 - c)).atan()
}

/// Wedges around `arg ω_j` of half-angle `arctan(C/(1-C))` are pairwise
/// disjoint off 0 iff the half-angle is below `π/Δ`.
pub fn wedges_disjoint(c: f64, delta: usize) -> bool {
    delta <= 1 || 0.5 * vertex_angle(c) < PI / delta as f64
}

pub fn p_eval(sys: &SheetSystem, z: Complex64, w: Complex64) -> Complex64 {
    z * w / sys.c_star()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SheetMargins {
    pub sheet: usize,
    /// `min (Re q / |z|^{k/Δ+1} - (1 - C))` with `q = ω_j^{-1} p(z, F_j(z))`.
    pub re_margin: f64,
    /// `min (C - |Im q| / |z|^{k/Δ+1})`.
    pub im_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContainmentMargins {
    pub eps: f64,
    pub per_sheet: Vec<SheetMargins>,
}

impl ContainmentMargins {
    pub fn min_margin(&self) -> f64 {
        self.per_sheet.iter().map(|m| m.re_margin.min(m.im_margin)).fold(f64::INFINITY, f64::min)
    }

    pub fn all_positive(&self) -> bool {
        self.min_margin() > 0.0
    }
}

/// Relative margins of the wedge containment `p(S_j(eps)) ⊂ W_j` on the
/// punctured polar grid of radius `eps`.
pub fn containment_margins(sys: &SheetSystem, c: f64, eps: f64, n_radii: usize, n_angles: usize) -> Result<ContainmentMargins> {
    if !(eps > 0.0) || eps > sys.validity_radius() * (1.0 + 1e-12) {
        return Err(Error::invalid(format!("eps = {eps} outside (0, δ = {}]", sys.validity_radius())));
    }
    let expo = sys.base().k() as f64 / sys.delta() as f64 + 1.0;
    let pts = Disc::centered(eps)?.polar_grid(n_radii, n_angles);
    let mut per_sheet = Vec::with_capacity(sys.delta());
    for j in 1..=sys.delta() {
        let rot = sys.omega(j).conj();
        let (mut re_m, mut im_m) = (f64::INFINITY, f64::INFINITY);
        for &z in pts.iter().skip(1) {
            let q = rot * p_eval(sys, z, sys.sheet_eval(j, z)?) / z.norm().powf(expo);
            re_m = re_m.min(q.re - (1.0 - c));
            im_m = im_m.min(c - q.im.abs());
        }
        per_sheet.push(SheetMargins { sheet: j, re_margin: re_m, im_margin: im_m });
    }
    Ok(ContainmentMargins { eps, per_sheet })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSearch {
    pub iterations: usize,
    pub margin_radii: usize,
    pub margin_angles: usize,
    pub jacobian_radii: usize,
    pub jacobian_angles: usize,
    pub scan: ScanConfig,
}

impl Default for EpsilonSearch {
    fn default() -> Self {
        Self {
            iterations: 30,
            margin_radii: 16,
            margin_angles: 128,
            jacobian_radii: 8,
            jacobian_angles: 64,
            scan: ScanConfig { n_radii: 8, n_angles: 32, zeta_radii: 2, zeta_angles: 8, ..Default::default() },
        }
    }
}

/// The three checks at one trial radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonChecks {
    pub eps: f64,
    pub containment_min: f64,
    /// Radius of the Jacobian test annulus, `min(2 eps, δ)`.
    pub jacobian_radius: f64,
    pub jacobian_min: f64,
    pub sector_passed: bool,
    pub sector_max_spread: f64,
}

impl EpsilonChecks {
    pub fn passed(&self) -> bool {
        self.containment_min > 0.0 && self.jacobian_min > 0.0 && self.sector_passed
    }

    fn failures(&self) -> String {
        let mut out = Vec::new();
        if !(self.containment_min > 0.0) {
            out.push(format!("containment (min margin {:.3e})", self.containment_min));
        }
        if !(self.jacobian_min > 0.0) {
            out.push(format!("jacobian (min gap {:.3e})", self.jacobian_min));
        }
        if !self.sector_passed {
            out.push("sector scan".to_string());
        }
        out.join(", ")
    }
}

pub fn epsilon_checks(sys: &SheetSystem, c: f64, eps: f64, cfg: &EpsilonSearch) -> Result<EpsilonChecks> {
    let containment = containment_margins(sys, c, eps, cfg.margin_radii, cfg.margin_angles)?;
    let jr = (2.0 * eps).min(sys.validity_radius());
    let jacobian_min = sys.min_jacobian_gap(jr / 100.0, jr, cfg.jacobian_radii, cfg.jacobian_angles)?;
    let scan = sector_scan(|z| sys.f0_unchecked(z), &Disc::centered(eps)?, &cfg.scan);
    Ok(EpsilonChecks {
        eps,
        containment_min: containment.min_margin(),
        jacobian_radius: jr,
        jacobian_min,
        sector_passed: scan.passed,
        sector_max_spread: scan.max_spread,
    })
}

/// Largest radius in `(0, δ]`, by bisection, at which the containment
/// margins, the Jacobian test and the sector scan of `F_0` all pass.
pub fn epsilon_search(sys: &SheetSystem, a: f64, c: f64, cfg: &EpsilonSearch) -> Result<EpsilonChecks> {
    let rhs = size_rhs(sys.delta() as i64)?;
    if !(a < c && c < rhs) {
        return Err(Error::invalid(format!("C = {c} is not in (A, size_rhs) = ({a}, {rhs})")));
    }
    let delta_r = sys.validity_radius();
    let top = epsilon_checks(sys, c, delta_r, cfg)?;
    if top.passed() {
        return Ok(top);
    }
    let (mut lo, mut hi) = (0.0, delta_r);
    let mut best = None;
    let mut last_fail = top;
    for _ in 0..cfg.iterations {
        let mid = 0.5 * (lo + hi);
        let chk = epsilon_checks(sys, c, mid, cfg)?;
        if chk.passed() {
            lo = mid;
            best = Some(chk);
        } else {
            hi = mid;
            last_fail = chk;
        }
    }
    best.ok_or_else(|| Error::NoRadius(format!("at eps = {:.3e}: {} failed", last_fail.eps, last_fail.failures())))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KallinReport {
    pub c: f64,
    pub epsilon: f64,
    pub vertex_angle: f64,
    pub wedge_disjoint: bool,
    pub containment_margins: ContainmentMargins,
    pub checks: EpsilonChecks,
}

/// Chooses `C` (midpoint unless overridden), searches `ε` and reports the
/// margins at `ε`.
pub fn kallin_report(sys: &SheetSystem, a: f64, c_override: Option<f64>, cfg: &EpsilonSearch) -> Result<KallinReport> {
    let c = match c_override {
        Some(c) => c,
        None => choose_c(a, sys.delta())?,
    };
    let checks = epsilon_search(sys, a, c, cfg)?;
    let containment = containment_margins(sys, c, checks.eps, cfg.margin_radii, cfg.margin_angles)?;
    Ok(KallinReport {
        c,
        epsilon: checks.eps,
        vertex_angle: vertex_angle(c),
        wedge_disjoint: wedges_disjoint(c, sys.delta()),
        containment_margins: containment,
        checks,
    })
}

/// `P` with `(1/Δ) Σ_j g(z, ω_j w) = P(z, w^Δ)`: keeps the terms whose
/// `w`-exponent is a multiple of `Δ` and maps `w^{Δν}` to `u^ν`.
pub fn symmetrize(g: &BiPoly, delta: usize) -> Result<BiPoly> {
    if delta == 0 {
        return Err(Error::invalid("Δ must be at least 1"));
    }
    let d = delta as u32;
    Ok(BiPoly::from_terms(g.terms().filter(|((_, nu), _)| nu % d == 0).map(|((mu, nu), c)| ((mu, nu / d), c))))
}

/// `(1/Δ) Σ_j g(z, ω_j w)` evaluated directly.
pub fn rotation_average(g: &BiPoly, delta: usize, z: Complex64, w: Complex64) -> Complex64 {
    let sum: Complex64 = (0..delta)
        .map(|j| g.eval(z, Complex64::from_polar(1.0, 2.0 * PI * j as f64 / delta as f64) * w))
        .sum();
    sum / delta as f64
}
