//! The Δ sheets of the pullback of a certified surface under the covering
//! `Ψ(z, w) = (z, w^Δ)`.
//!
//! After normalization the graph reads `w = Σ(z) + G(z) = D(z)(1 + u(z))` with
//! `D = C_M z^{k-M} z̄^M`. Since `|z|^k e^{-iΔθ}` has the single-valued root
//! `|z|^{k/Δ} e^{-iθ}`, every sheet is that root times a principal root of
//! `1 + u`, which is well defined wherever `|u| < 1`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex::{default_step, wirtinger_fd, Disc};
use crate::error::{Error, Result};
use crate::surface::{CRSurface, Certificate, Tau};

/// Grid and margin for the validity-radius search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusSearch {
    pub n_angles: usize,
    pub n_radii: usize,
    pub iterations: usize,
    /// Required gap below 1 for `|u|`.
    pub margin: f64,
}

impl Default for RadiusSearch {
    fn default() -> Self {
        Self { n_angles: 2048, n_radii: 64, iterations: 40, margin: 0.05 }
    }
}

fn max_abs_u(tau: &Tau, r: f64, cfg: &RadiusSearch) -> f64 {
    (1..=cfg.n_radii)
        .into_par_iter()
        .map(|i| {
            let rho = r * i as f64 / cfg.n_radii as f64;
            (0..cfg.n_angles)
                .map(|m| {
                    let z = Complex64::from_polar(rho, 2.0 * PI * m as f64 / cfg.n_angles as f64);
                    tau.u_eval(z).map(|u| u.norm()).unwrap_or(f64::INFINITY)
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

/// Largest sampled `δ <= radius` with `|u| <= 1 - margin` on `0 < |z| <= δ`.
pub fn delta_radius(s: &CRSurface, m: usize, cfg: &RadiusSearch) -> Result<f64> {
    let tau = s.tau(m)?;
    let ok = |r: f64| max_abs_u(&tau, r, cfg) <= 1.0 - cfg.margin;
    if ok(s.radius()) {
        return Ok(s.radius());
    }
    let (mut lo, mut hi) = (0.0, s.radius());
    for _ in 0..cfg.iterations {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if lo > 0.0 {
        Ok(lo)
    } else {
        Err(Error::NoRadius(format!(
            "sup |u| = {:.6} on the smallest trial radius {hi:.3e} exceeds {}",
            max_abs_u(&tau, hi, cfg),
            1.0 - cfg.margin
        )))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SheetSystem {
    base: CRSurface,
    m: usize,
    delta: usize,
    c_star: Complex64,
    omegas: Vec<Complex64>,
    validity_radius: f64,
    tau: Tau,
}

/// Serializable summary of a [`SheetSystem`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SheetSummary {
    pub m: usize,
    pub delta: usize,
    pub c_star: Complex64,
    pub omegas: Vec<Complex64>,
    pub validity_radius: f64,
}

impl SheetSystem {
    /// Sheets for a passing certificate, at its selected index.
    pub fn build(s: &CRSurface, cert: &Certificate) -> Result<Self> {
        if !cert.passed {
            return Err(Error::NotCertified(cert.reason.clone().unwrap_or_default()));
        }
        let m = cert.m().expect("passing certificate selects an index");
        Self::for_index(s, m, &RadiusSearch::default())
    }

    /// Sheets at an arbitrary `M ∈ I(S)`, without consulting the certificate.
    pub fn for_index(s: &CRSurface, m: usize, search: &RadiusSearch) -> Result<Self> {
        let base = s.normalize();
        let tau = base.tau(m)?;
        let delta = 2 * m - base.k();
        let c_m = base.coefficient(m);
        let c_star = Complex64::from_polar(c_m.norm().powf(1.0 / delta as f64), c_m.arg() / delta as f64);
        let omegas = (0..delta)
            .map(|j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 / delta as f64))
            .collect();
        let validity_radius = delta_radius(&base, m, search)?;
        Ok(Self { base, m, delta, c_star, omegas, validity_radius, tau })
    }

    pub fn base(&self) -> &CRSurface {
        &self.base
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn delta(&self) -> usize {
        self.delta
    }

    pub fn c_star(&self) -> Complex64 {
        self.c_star
    }

    pub fn omegas(&self) -> &[Complex64] {
        &self.omegas
    }

    /// `ω_j` for `1 <= j <= Δ`.
    pub fn omega(&self, j: usize) -> Complex64 {
        self.omegas[j - 1]
    }

    pub fn validity_radius(&self) -> f64 {
        self.validity_radius
    }

    pub fn validity_disc(&self) -> Disc {
        Disc::centered(self.validity_radius).expect("validity radius is positive")
    }

    pub fn tau(&self) -> &Tau {
        &self.tau
    }

    pub fn summary(&self) -> SheetSummary {
        SheetSummary {
            m: self.m,
            delta: self.delta,
            c_star: self.c_star,
            omegas: self.omegas.clone(),
            validity_radius: self.validity_radius,
        }
    }

    fn check_radius(&self, z: Complex64) -> Result<()> {
        if z.norm() > self.validity_radius * (1.0 + 1e-12) {
            return Err(Error::domain(z, format!("outside the validity disc of radius {}", self.validity_radius)));
        }
        Ok(())
    }

    /// `|z|^{k/Δ} e^{-iθ} (1 + u)^{1/Δ}` with no radius check.
    pub fn f0_unchecked(&self, z: Complex64) -> Complex64 {
        if z.re == 0.0 && z.im == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let (r, theta) = z.to_polar();
        let u = self.tau.u_eval(z).expect("z is nonzero");
        let lead = Complex64::from_polar(r.powf(self.base.k() as f64 / self.delta as f64), -theta);
        lead * (Complex64::new(1.0, 0.0) + u).powf(1.0 / self.delta as f64)
    }

    /// The normalized sheet `F_0 = F_1 / C_*`.
    pub fn f0_eval(&self, z: Complex64) -> Result<Complex64> {
        self.check_radius(z)?;
        Ok(self.f0_unchecked(z))
    }

    /// `F_j(z) = C_* ω_j F_0(z)`, `1 <= j <= Δ`.
    pub fn sheet_eval(&self, j: usize, z: Complex64) -> Result<Complex64> {
        if j == 0 || j > self.delta {
            return Err(Error::invalid(format!("sheet index {j} outside 1..={}", self.delta)));
        }
        Ok(self.c_star * self.omega(j) * self.f0_eval(z)?)
    }

    /// `𝔉(z) = Σ(z) + G(z)`.
    pub fn graph_eval(&self, z: Complex64) -> Complex64 {
        self.base.graph_eval(z)
    }

    /// Max relative residual of `∏_j (w - F_j(z)) = w^Δ - 𝔉(z)` over the
    /// pairs `(z_i, w_i)`.
    pub fn verify_product(&self, z_samples: &[Complex64], w_samples: &[Complex64]) -> Result<f64> {
        if z_samples.len() != w_samples.len() {
            return Err(Error::invalid("z and w sample counts differ"));
        }
        let mut worst = 0.0f64;
        for (&z, &w) in z_samples.iter().zip(w_samples) {
            let f0 = self.f0_eval(z)?;
            let prod: Complex64 = self.omegas.iter().map(|&om| w - self.c_star * om * f0).product();
            let wd = w.powu(self.delta as u32);
            let big_f = self.graph_eval(z);
            let scale = (wd.norm() + big_f.norm()).max(f64::MIN_POSITIVE);
            worst = worst.max((prod - (wd - big_f)).norm() / scale);
        }
        Ok(worst)
    }

    /// `|∂F_0/∂z̄| - |∂F_0/∂z|` by central differences; positive means
    /// `F_0` reverses orientation at `z`.
    pub fn jacobian_gap(&self, z: Complex64) -> Result<f64> {
        if z.re == 0.0 && z.im == 0.0 {
            return Err(Error::domain(z, "the Jacobian test excludes z = 0"));
        }
        self.check_radius(z)?;
        // the stencil may step slightly past δ
        let h = default_step(z).min(0.25 * z.norm());
        let (dz, dzb) =
            wirtinger_fd(|w| Ok::<_, Error>(self.f0_unchecked(w)), z, h)?;
        Ok(dzb.norm() - dz.norm())
    }

    /// Closed-form `|∂F_0/∂z̄| - |∂F_0/∂z|`, available when `G = 0`.
    pub fn jacobian_gap_closed(&self, z: Complex64) -> Option<f64> {
        if !self.base.residual().is_zero() || (z.re == 0.0 && z.im == 0.0) {
            return None;
        }
        let kd = self.base.k() as f64 / self.delta as f64;
        let inv = 1.0 / self.delta as f64;
        let (r, theta) = z.to_polar();
        // F_0 = g h with g = z^{(kd-1)/2} z̄^{(kd+1)/2} and h = (1+τ)^{1/Δ}
        let g = Complex64::from_polar(r.powf(kd), -theta);
        let g_z = g * (0.5 * (kd - 1.0)) / z;
        let g_zb = g * (0.5 * (kd + 1.0)) / z.conj();
        let one_tau = Complex64::new(1.0, 0.0) + self.tau.eval(z).ok()?;
        let h = one_tau.powf(inv);
        let (t_z, t_zb) = self.tau.wirtinger(z).ok()?;
        let dh = h / one_tau * inv;
        let f_z = g_z * h + g * dh * t_z;
        let f_zb = g_zb * h + g * dh * t_zb;
        Some(f_zb.norm() - f_z.norm())
    }

    /// Minimum of [`Self::jacobian_gap`] over the annulus grid
    /// `inner <= |z| <= outer`.
    pub fn min_jacobian_gap(&self, inner: f64, outer: f64, n_radii: usize, n_angles: usize) -> Result<f64> {
        let disc = Disc::centered(outer)?;
        let pts = disc.annulus_grid(inner, n_radii, n_angles);
        let gaps: Vec<f64> = pts.par_iter().map(|&z| self.jacobian_gap(z)).collect::<Result<_>>()?;
        Ok(gaps.into_iter().fold(f64::INFINITY, f64::min))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::CircleGrid;
    use crate::poly::BihomPoly;
    use crate::surface::certify;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn system(nonzero: &[(usize, Complex64)], k: usize) -> SheetSystem {
        let s = CRSurface::from_leading(k, nonzero, 1.0).unwrap();
        let cert = certify(&s, &CircleGrid::new(1024).unwrap());
        SheetSystem::build(&s, &cert).unwrap()
    }

    fn zbar3() -> SheetSystem {
        system(&[(3, c(1.0, 0.0))], 3)
    }

    fn quartic() -> SheetSystem {
        system(&[(4, c(1.0, 0.0)), (3, c(0.3, 0.0))], 4)
    }

    fn coarse() -> RadiusSearch {
        RadiusSearch { n_angles: 256, n_radii: 32, ..Default::default() }
    }

    #[test]
    fn validity_radius_examples() {
        assert_eq!(zbar3().validity_radius(), 1.0);
        assert_eq!(quartic().validity_radius(), 1.0);
        let s = CRSurface::from_leading(3, &[(3, c(1.0, 0.0))], 1.0)
            .unwrap()
            .with_residual(BihomPoly::monomial(2, 2, c(1.0, 0.0)))
            .unwrap();
        let d = delta_radius(&s, 3, &coarse()).unwrap();
        assert_abs_diff_eq!(d, 0.95, epsilon = 1e-9);
    }

    #[test]
    fn radius_search_reports_failure() {
        let s = CRSurface::from_leading(3, &[(3, c(1.0, 0.0)), (2, c(0.97, 0.0))], 1.0).unwrap();
        assert!(matches!(delta_radius(&s, 3, &coarse()), Err(Error::NoRadius(_))));
    }

    #[test]
    fn build_examples() {
        let sys = zbar3();
        assert_eq!((sys.delta(), sys.c_star()), (3, c(1.0, 0.0)));
        let w = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
        assert_abs_diff_eq!((sys.omega(2) - w).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((sys.omega(3) - w * w).norm(), 0.0, epsilon = 1e-15);

        let s = CRSurface::from_leading(3, &[(3, c(-4.0, 0.0))], 1.0).unwrap();
        // k = 3, M = 3 gives Δ = 3; Δ = 2 needs even k
        let s2 = CRSurface::from_leading(4, &[(3, c(-4.0, 0.0))], 1.0).unwrap();
        let sys2 = SheetSystem::for_index(&s2, 3, &coarse()).unwrap();
        assert_eq!(sys2.delta(), 2);
        assert_abs_diff_eq!((sys2.c_star() - c(0.0, 2.0)).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((sys2.c_star().powu(2) - c(-4.0, 0.0)).norm(), 0.0, epsilon = 1e-12);
        let cs = SheetSystem::for_index(&s, 3, &coarse()).unwrap().c_star();
        assert_abs_diff_eq!((cs.powu(3) - c(-4.0, 0.0)).norm(), 0.0, epsilon = 1e-12);

        let sys = quartic();
        let expect = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)];
        for (o, e) in sys.omegas().iter().zip(expect) {
            assert_abs_diff_eq!((o - e).norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn failing_certificate_is_rejected() {
        let s = CRSurface::from_leading(3, &[(3, c(1.0, 0.0)), (2, c(0.9, 0.0))], 1.0).unwrap();
        let cert = certify(&s, &CircleGrid::new(256).unwrap());
        assert!(matches!(SheetSystem::build(&s, &cert), Err(Error::NotCertified(_))));
    }

    #[test]
    fn sheet_values() {
        let sys = zbar3();
        assert_abs_diff_eq!((sys.sheet_eval(1, c(0.6, 0.6)).unwrap() - c(0.6, -0.6)).norm(), 0.0, epsilon = 1e-14);
        let e = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
        assert_abs_diff_eq!((sys.sheet_eval(2, c(1.0, 0.0)).unwrap() - e).norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!((sys.f0_eval(c(0.0, 1.0)).unwrap() - c(0.0, -1.0)).norm(), 0.0, epsilon = 1e-14);
        assert!(sys.sheet_eval(1, c(1.1, 0.0)).is_err());
        assert!(sys.sheet_eval(4, c(0.1, 0.0)).is_err());
        assert_eq!(sys.sheet_eval(1, c(0.0, 0.0)).unwrap(), c(0.0, 0.0));

        let sys = quartic();
        let expect = 0.5 * 1.3f64.powf(0.25);
        assert_abs_diff_eq!((sys.sheet_eval(1, c(0.5, 0.0)).unwrap() - c(expect, 0.0)).norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!((sys.f0_eval(c(0.5, 0.0)).unwrap() - c(0.533_895, 0.0)).norm(), 0.0, epsilon = 1e-6);

        let sys = system(&[(3, c(0.0, 5.0))], 3);
        assert_abs_diff_eq!((sys.f0_eval(c(1.0, 0.0)).unwrap() - c(1.0, 0.0)).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn product_identity() {
        let sys = zbar3();
        let zs: Vec<_> = (0..50).map(|i| Complex64::from_polar(0.02 * i as f64, 0.7 * i as f64)).collect();
        let ws: Vec<_> = (0..50).map(|i| Complex64::from_polar(0.9 - 0.01 * i as f64, -1.3 * i as f64)).collect();
        assert!(sys.verify_product(&zs, &ws).unwrap() <= 1e-12);
        assert!(quartic().verify_product(&zs, &ws).unwrap() <= 1e-9);
    }

    #[test]
    fn single_sheet_case() {
        // k = 3, M = 2 gives Δ = 1 and F_1 = 𝔉
        let s = CRSurface::from_leading(3, &[(2, c(1.0, 0.0))], 1.0).unwrap();
        let sys = SheetSystem::for_index(&s, 2, &coarse()).unwrap();
        assert_eq!(sys.delta(), 1);
        let z = c(0.3, -0.2);
        assert_abs_diff_eq!((sys.sheet_eval(1, z).unwrap() - s.graph_eval(z)).norm(), 0.0, epsilon = 1e-15);
        assert!(sys.verify_product(&[z], &[c(0.1, 0.4)]).unwrap() <= 1e-15);
    }

    #[test]
    fn jacobian_examples() {
        let sys = zbar3();
        for z in [c(0.5, 0.0), c(0.01, -0.02), c(-0.7, 0.7)] {
            assert_abs_diff_eq!(sys.jacobian_gap(z).unwrap(), 1.0, epsilon = 1e-8);
            assert_abs_diff_eq!(sys.jacobian_gap_closed(z).unwrap(), 1.0, epsilon = 1e-14);
        }
        assert!(sys.jacobian_gap(c(0.0, 0.0)).is_err());

        let sys = quartic();
        let b = 0.3 + 0.6 / (4.0 * 0.7);
        let gap = sys.jacobian_gap(c(0.5, 0.0)).unwrap();
        assert!(gap >= (1.0 - b) * 0.999, "{gap}");
        for i in 0..32 {
            let z = Complex64::from_polar(0.05 + 0.03 * i as f64, 0.4 * i as f64);
            let fd = sys.jacobian_gap(z).unwrap();
            let cf = sys.jacobian_gap_closed(z).unwrap();
            assert!((fd - cf).abs() < 1e-7, "{fd} vs {cf}");
        }
    }

    #[test]
    fn jacobian_gap_with_residual() {
        let s = CRSurface::from_leading(3, &[(3, c(1.0, 0.0))], 1.0)
            .unwrap()
            .with_residual(BihomPoly::monomial(2, 2, c(1.0, 0.0)))
            .unwrap();
        let sys = SheetSystem::for_index(&s, 3, &coarse()).unwrap();
        assert!(sys.jacobian_gap_closed(c(0.1, 0.0)).is_none());
        // positive near 0; at |z| close to δ = 0.95 the residual dominates
        let d = sys.validity_radius();
        assert!(sys.min_jacobian_gap(d / 100.0, 0.5, 8, 64).unwrap() > 0.0);
        assert!(sys.min_jacobian_gap(0.9, d, 2, 64).unwrap() < 0.0);
    }

    proptest! {
        #[test]
        fn root_consistency_and_symmetry(r in 0.001f64..1.0, th in -PI..PI) {
            let sys = quartic();
            let z = Complex64::from_polar(r, th);
            let target = sys.graph_eval(z);
            let f1 = sys.sheet_eval(1, z).unwrap();
            for j in 1..=sys.delta() {
                let fj = sys.sheet_eval(j, z).unwrap();
                prop_assert!((fj.powu(4) - target).norm() <= 1e-10 * target.norm());
                prop_assert!((fj - sys.omega(j) * f1).norm() <= 1e-12 * f1.norm());
            }
        }

        #[test]
        fn sheets_are_distinct_and_bounded(r in 0.001f64..1.0, th in -PI..PI) {
            let sys = quartic();
            let z = Complex64::from_polar(r, th);
            let f: Vec<_> = (1..=4).map(|j| sys.sheet_eval(j, z).unwrap()).collect();
            let sep = 2.0 * (PI / 4.0).sin() * f[0].norm() * (1.0 - 1e-12);
            for i in 0..4 {
                for j in 0..i {
                    prop_assert!((f[i] - f[j]).norm() >= sep);
                }
                prop_assert!(f[i].norm() <= sys.c_star().norm() * 2f64.powf(0.25) * r);
            }
        }
    }
}
