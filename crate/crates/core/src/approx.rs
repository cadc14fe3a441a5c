//! Density of the algebra `[z, F]`: the sector condition on
//! `(z - ζ)(F(z) - F(ζ))`, the approximants `Q_n` and `f_n` of `1/(z - ζ)`,
//! and minimax fits over the basis `z^a F^b`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex::{minimal_enclosing_sector_padded, Disc, Sector, DEFAULT_SECTOR_PADDING};
use crate::error::{Error, Result};
use crate::minimax::{lawson, BasisMatrix, LawsonConfig, MinimaxFit};
use crate::poly::BiPoly;

/// Values closer than this count as equal when comparing `F(z)` with `F(ζ)`.
pub const FIBER_TOL: f64 = 1e-12;

/// Relative slack for closed-sector membership of `(z - ζ) W(z)`.
const CLOSURE_TOL: f64 = 1e-9;

/// A vertex-0 sector containing every `(z - ζ)(F(z) - F(ζ))`, with the
/// rotation and root order that put it in the right half-plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorWitness {
    pub zeta: Complex64,
    pub sector: Sector,
    pub phi: f64,
    pub nu: u32,
}

impl SectorWitness {
    pub fn new(zeta: Complex64, sector: Sector) -> Result<Self> {
        let (phi, nu) = choose_branch(&sector)?;
        Ok(Self { zeta, sector, phi, nu })
    }

    /// `Q_n(w)` after checking that `w` lies in the closed sector.
    pub fn qn(&self, n: u32, w: Complex64) -> Result<Complex64> {
        if w != Complex64::new(0.0, 0.0) && !self.sector.closure_contains(w, CLOSURE_TOL) {
            return Err(Error::domain(w, "outside the witness sector"));
        }
        qn_eval(self.phi, self.nu, n, w)
    }
}

/// Rotation `φ` taking the bisector to angle 0, and `ν = 1` for sectors of
/// length at most `π`, `ν = 2` otherwise.
pub fn choose_branch(sector: &Sector) -> Result<(f64, u32)> {
    let len = sector.angular_length();
    if !(len > 0.0 && len < 2.0 * PI) {
        return Err(Error::invalid(format!("sector length {len} is not in (0, 2π)")));
    }
    let phi = (-sector.bisector() + PI).rem_euclid(2.0 * PI) - PI;
    Ok((phi, if len <= PI { 1 } else { 2 }))
}

/// `Q_n(w) = {1 - [1 + (e^{iφ} w)^{1/ν}]^{-n}}^ν / w`, and `e^{iφ} n` at
/// `w = 0`. Rejects `w` off the half-plane (`ν = 1`) or on the cut (`ν = 2`)
/// where the principal root leaves the closed right half-plane.
pub fn qn_eval(phi: f64, nu: u32, n: u32, w: Complex64) -> Result<Complex64> {
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    if nu != 1 && nu != 2 {
        return Err(Error::invalid(format!("branch order must be 1 or 2, got {nu}")));
    }
    let rot = Complex64::from_polar(1.0, phi);
    if w.re == 0.0 && w.im == 0.0 {
        return Ok(rot * n as f64);
    }
    let v = rot * w;
    let admissible = match nu {
        1 => v.re >= -CLOSURE_TOL * v.norm(),
        _ => !(v.im == 0.0 && v.re < 0.0),
    };
    if !admissible {
        return Err(Error::domain(w, "outside the admissible branch region"));
    }
    let root = if nu == 1 { v } else { v.sqrt() };
    let one = Complex64::new(1.0, 0.0);
    let inner = one - (one + root).powi(-(n as i32));
    Ok(inner.powu(nu) / w)
}

/// `f_n(z) = W(z) Q_n((z - ζ) W(z))` with `W = F - F(ζ)`.
pub fn fn_eval<F>(f: F, witness: &SectorWitness, n: u32, z: Complex64) -> Result<Complex64>
where
    F: Fn(Complex64) -> Complex64,
{
    let w = f(z) - f(witness.zeta);
    if w.norm() <= FIBER_TOL {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok(w * witness.qn(n, (z - witness.zeta) * w)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    /// Rings and angles of the polar grid of test points `z`.
    pub n_radii: usize,
    pub n_angles: usize,
    /// Rings and angles of the polar grid of base points `ζ`.
    pub zeta_radii: usize,
    pub zeta_angles: usize,
    pub padding: f64,
    /// A fiber is flagged when more than this many grid points besides `ζ`
    /// share its value.
    pub fiber_hit_limit: usize,
    /// Declared exceptional base points, skipped by the scan.
    pub exceptional: Vec<Complex64>,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            n_radii: 24,
            n_angles: 96,
            zeta_radii: 6,
            zeta_angles: 24,
            padding: DEFAULT_SECTOR_PADDING,
            fiber_hit_limit: 4,
            exceptional: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZetaOutcome {
    pub zeta: Complex64,
    /// Exact circular spread of the arguments; `None` if every value sat on
    /// the fiber of `ζ`.
    pub spread: Option<f64>,
    pub witness: Option<SectorWitness>,
    pub violation: bool,
    pub fiber_hits: usize,
    pub fiber_flag: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub passed: bool,
    pub max_spread: f64,
    pub violating_zeta: Vec<Complex64>,
    pub fiber_flags: Vec<Complex64>,
    pub outcomes: Vec<ZetaOutcome>,
}

fn scan_one(zeta: Complex64, f_zeta: Complex64, pts: &[Complex64], vals: &[Complex64], cfg: &ScanConfig) -> ZetaOutcome {
    let mut products = Vec::with_capacity(pts.len());
    let mut hits = 0;
    for (&z, &fz) in pts.iter().zip(vals) {
        if z == zeta {
            continue;
        }
        let w = fz - f_zeta;
        if w.norm() <= FIBER_TOL {
            hits += 1;
            continue;
        }
        products.push((z - zeta) * w);
    }
    if products.is_empty() {
        return ZetaOutcome {
            zeta,
            spread: None,
            witness: None,
            violation: false,
            fiber_hits: hits,
            fiber_flag: hits > cfg.fiber_hit_limit,
        };
    }
    let enclosing = minimal_enclosing_sector_padded(&products, cfg.padding).expect("zero products were filtered");
    let mut angles: Vec<f64> = products.iter().map(|p| p.arg()).collect();
    let spread = crate::complex::circular_spread(&mut angles).map(|(s, _)| s);
    let (witness, violation) = match enclosing {
        Some(e) => (SectorWitness::new(zeta, e.sector).ok(), false),
        None => (None, true),
    };
    ZetaOutcome {
        zeta,
        spread,
        witness,
        violation,
        fiber_hits: hits,
        fiber_flag: hits > cfg.fiber_hit_limit,
    }
}

/// Checks that every `(z - ζ)(F(z) - F(ζ))` over the grid fits in an open
/// sector at 0 for each sampled `ζ` outside the exceptional set.
pub fn sector_scan<F>(f: F, disc: &Disc, cfg: &ScanConfig) -> ScanReport
where
    F: Fn(Complex64) -> Complex64 + Sync,
{
    let pts = disc.polar_grid(cfg.n_radii, cfg.n_angles);
    let vals: Vec<Complex64> = pts.par_iter().map(|&z| f(z)).collect();
    let zetas: Vec<Complex64> = disc
        .polar_grid(cfg.zeta_radii, cfg.zeta_angles)
        .into_iter()
        .filter(|z| !cfg.exceptional.iter().any(|e| (z - e).norm() <= FIBER_TOL))
        .collect();
    let outcomes: Vec<ZetaOutcome> =
        zetas.par_iter().map(|&zeta| scan_one(zeta, f(zeta), &pts, &vals, cfg)).collect();
    let max_spread = outcomes.iter().filter_map(|o| o.spread).fold(0.0, f64::max);
    let violating_zeta: Vec<_> = outcomes.iter().filter(|o| o.violation).map(|o| o.zeta).collect();
    let fiber_flags: Vec<_> = outcomes.iter().filter(|o| o.fiber_flag).map(|o| o.zeta).collect();
    ScanReport {
        passed: violating_zeta.is_empty() && fiber_flags.is_empty(),
        max_spread,
        violating_zeta,
        fiber_flags,
        outcomes,
    }
}

/// Exponents `(a, b)` of `z^a F^b`, ordered by `b` and then `a`.
pub fn algebra_basis(a_max: u32, b_max: u32) -> Vec<(u32, u32)> {
    (0..=b_max).flat_map(|b| (0..=a_max).map(move |a| (a, b))).collect()
}

/// Tensor polar grid with `n_radii` rings (plus the center) of `n_angles`
/// points, the default for density experiments.
pub fn density_grid(disc: &Disc, n_radii: usize, n_angles: usize) -> Vec<Complex64> {
    disc.polar_grid(n_radii, n_angles)
}

fn basis_matrix(z: &[Complex64], fz: &[Complex64], basis: &[(u32, u32)]) -> BasisMatrix {
    BasisMatrix::from_fn(z.len(), basis.len(), |i, l| {
        let (a, b) = basis[l];
        z[i].powu(a) * fz[i].powu(b)
    })
}

/// Minimax fit of `target` by `Σ c_{ab} z^a F^b` on `grid`.
pub fn minimax_fit<F, T>(f: F, target: T, basis: &[(u32, u32)], grid: &[Complex64], cfg: &LawsonConfig) -> Result<MinimaxFit>
where
    F: Fn(Complex64) -> Complex64 + Sync,
    T: Fn(Complex64) -> Complex64 + Sync,
{
    let fz: Vec<_> = grid.par_iter().map(|&z| f(z)).collect();
    let b: Vec<_> = grid.par_iter().map(|&z| target(z)).collect();
    lawson(&basis_matrix(grid, &fz, basis), &b, cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxStep {
    pub a_max: u32,
    pub b_max: u32,
    /// Best sup error over this and all earlier (nested) steps.
    pub error: f64,
    /// Sup error of this step's own fit.
    pub step_error: f64,
    pub lower_bound: f64,
    pub iterations: usize,
    pub non_convergence: bool,
}

/// `(a, b, re, im)`: coefficient `re + i im` of `z^a F^b`.
pub type AlgebraTerm = (u32, u32, f64, f64);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxReport {
    pub steps: Vec<ApproxStep>,
    /// Terms of the best fit so far.
    pub coefficients: Vec<AlgebraTerm>,
}

impl ApproxReport {
    pub fn errors(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.error).collect()
    }

    /// The best fit as a polynomial `g(z, w)` with `w` standing for `F`.
    pub fn to_bipoly(&self) -> BiPoly {
        BiPoly::from_terms(self.coefficients.iter().map(|&(a, b, re, im)| ((a, b), Complex64::new(re, im))))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("a_max,b_max,error,step_error,lower_bound,iterations,non_convergence\n");
        for s in &self.steps {
            out.push_str(&format!(
                "{},{},{:e},{:e},{:e},{},{}\n",
                s.a_max, s.b_max, s.error, s.step_error, s.lower_bound, s.iterations, s.non_convergence
            ));
        }
        out
    }
}

/// Runs [`minimax_fit`] along a nested schedule of `(a_max, b_max)`.
pub fn approx_report<F, T>(f: F, target: T, schedule: &[(u32, u32)], grid: &[Complex64], cfg: &LawsonConfig) -> Result<ApproxReport>
where
    F: Fn(Complex64) -> Complex64 + Sync,
    T: Fn(Complex64) -> Complex64 + Sync,
{
    for pair in schedule.windows(2) {
        if pair[1].0 < pair[0].0 || pair[1].1 < pair[0].1 {
            return Err(Error::invalid(format!("schedule is not nested at {:?} → {:?}", pair[0], pair[1])));
        }
    }
    let fz: Vec<_> = grid.par_iter().map(|&z| f(z)).collect();
    let b: Vec<_> = grid.par_iter().map(|&z| target(z)).collect();
    let mut steps = Vec::with_capacity(schedule.len());
    let mut best: Option<(f64, Vec<AlgebraTerm>)> = None;
    for &(a_max, b_max) in schedule {
        let basis = algebra_basis(a_max, b_max);
        let fit = lawson(&basis_matrix(grid, &fz, &basis), &b, cfg)?;
        if best.as_ref().map_or(true, |(e, _)| fit.sup_error < *e) {
            let coeffs = basis
                .iter()
                .zip(&fit.coefficients)
                .map(|(&(a, bb), c)| (a, bb, c.re, c.im))
                .collect();
            best = Some((fit.sup_error, coeffs));
        }
        let (error, _) = best.as_ref().expect("set above");
        steps.push(ApproxStep {
            a_max,
            b_max,
            error: *error,
            step_error: fit.sup_error,
            lower_bound: fit.lower_bound,
            iterations: fit.iterations,
            non_convergence: fit.non_convergence,
        });
    }
    Ok(ApproxReport { steps, coefficients: best.map(|(_, c)| c).unwrap_or_default() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn small() -> ScanConfig {
        ScanConfig { n_radii: 10, n_angles: 40, zeta_radii: 3, zeta_angles: 8, ..Default::default() }
    }

    #[test]
    fn scan_conjugate() {
        let r = sector_scan(|z| z.conj(), &Disc::unit(), &small());
        assert!(r.passed);
        assert_eq!(r.max_spread, 0.0);
    }

    #[test]
    fn scan_contraction_spread() {
        let r = sector_scan(|z| z.conj() + 0.5 * z, &Disc::unit(), &small());
        assert!(r.passed);
        assert!(r.max_spread <= 2.0 * 0.5f64.asin() + 1e-12, "{}", r.max_spread);
        assert!(r.max_spread > 0.9);
    }

    #[test]
    fn scan_flags_circular_fibers() {
        let cfg = ScanConfig { exceptional: vec![c(0.0, 0.0)], ..small() };
        let r = sector_scan(|z| c(z.norm_sqr(), 0.0), &Disc::unit(), &cfg);
        assert!(!r.passed);
        assert!(!r.fiber_flags.is_empty());
        assert!(r.outcomes.iter().all(|o| o.zeta != c(0.0, 0.0)));
    }

    #[test]
    fn scan_finds_violations() {
        // holomorphic F: (z - ζ)² covers every direction
        let r = sector_scan(|z| z, &Disc::unit(), &small());
        assert!(!r.passed);
        assert!(!r.violating_zeta.is_empty());
    }

    #[test]
    fn branch_examples() {
        let s = Sector::at_origin(-PI / 3.0, PI / 3.0).unwrap();
        assert_eq!(choose_branch(&s).unwrap(), (0.0, 1));
        let s = Sector::at_origin(-0.75 * PI, 0.75 * PI).unwrap();
        assert_eq!(choose_branch(&s).unwrap(), (0.0, 2));
        let s = Sector::at_origin(PI / 2.0 - 0.1, PI / 2.0 + 0.1).unwrap();
        let (phi, nu) = choose_branch(&s).unwrap();
        assert_abs_diff_eq!(phi, -PI / 2.0, epsilon = 1e-15);
        assert_eq!(nu, 1);
    }

    #[test]
    fn qn_examples() {
        assert_abs_diff_eq!((qn_eval(0.0, 1, 1, c(3.0, 0.0)).unwrap() - c(0.25, 0.0)).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((qn_eval(0.0, 1, 2, c(3.0, 0.0)).unwrap() - c(0.3125, 0.0)).norm(), 0.0, epsilon = 1e-15);
        for nu in [1, 2] {
            assert_eq!(qn_eval(0.0, nu, 2, c(0.0, 0.0)).unwrap(), c(2.0, 0.0));
        }
        assert!(qn_eval(0.0, 1, 2, c(-1.0, 0.1)).is_err());
        assert!(qn_eval(0.0, 2, 2, c(-1.0, 0.0)).is_err());
        assert!(qn_eval(0.0, 2, 2, c(-1.0, 0.1)).is_ok());
    }

    #[test]
    fn fn_examples() {
        let sector = Sector::at_origin(-1e-3, 1e-3).unwrap();
        let wit = SectorWitness::new(c(0.0, 0.0), sector).unwrap();
        let f = |z: Complex64| z.conj();
        assert_abs_diff_eq!((fn_eval(f, &wit, 1, c(1.0, 0.0)).unwrap() - c(0.5, 0.0)).norm(), 0.0, epsilon = 1e-15);
        for n in 1..=40 {
            assert!(fn_eval(f, &wit, n, c(1.0, 0.0)).unwrap().norm() <= 4.0);
        }
        assert_eq!(fn_eval(f, &wit, 3, c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        // holomorphic F leaves the sector
        assert!(fn_eval(|z| z, &wit, 3, c(0.0, 1.0)).is_err());
    }

    #[test]
    fn reciprocal_limit() {
        let wit = SectorWitness::new(c(0.0, 0.0), Sector::at_origin(-1e-3, 1e-3).unwrap()).unwrap();
        let pts: Vec<_> = Disc::unit().polar_grid(12, 48);
        let worst = |n: u32| {
            pts.iter()
                .filter(|z| z.norm() > 0.3)
                .map(|&z| (z * fn_eval(|v: Complex64| v.conj(), &wit, n, z).unwrap() - 1.0).norm())
                .fold(0.0, f64::max)
        };
        assert!(worst(200) < worst(20));
        assert!(worst(2000) < 1e-12);
    }

    #[test]
    fn basis_order() {
        assert_eq!(algebra_basis(2, 1), vec![(0, 0), (1, 0), (2, 0), (0, 1), (1, 1), (2, 1)]);
        assert_eq!(algebra_basis(3, 0), vec![(0, 0), (1, 0), (2, 0), (3, 0)]);
    }

    #[test]
    fn fit_in_span() {
        let grid = density_grid(&Disc::unit(), 16, 64);
        let fit = minimax_fit(|z| z.conj(), |z| z.conj(), &[(0, 0), (1, 0), (0, 1)], &grid, &LawsonConfig::default())
            .unwrap();
        assert!(fit.sup_error <= 1e-10);
        assert!((fit.coefficients[2] - c(1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn holomorphic_fit_of_conjugate() {
        let grid = density_grid(&Disc::unit(), 16, 64);
        let fit = minimax_fit(|z| z, |z| z.conj(), &algebra_basis(2, 0), &grid, &LawsonConfig::default()).unwrap();
        assert!(fit.sup_error >= 1.0 - 1e-9);
        assert!(fit.sup_error <= 1.0 + 1e-3);
    }

    #[test]
    fn report_on_conjugate() {
        let grid = density_grid(&Disc::unit(), 8, 32);
        let rep = approx_report(|z| z.conj(), |z| z.conj(), &[(0, 0), (0, 1)], &grid, &LawsonConfig::default()).unwrap();
        assert!(rep.errors()[1] <= 1e-10);
        let g = rep.to_bipoly();
        assert!((g.coeff(0, 1) - c(1.0, 0.0)).norm() < 1e-9);
        assert!(approx_report(|z| z, |z| z, &[(1, 1), (0, 2)], &grid, &LawsonConfig::default()).is_err());
    }

    proptest! {
        #[test]
        fn qn_bound_and_monotone_convergence(r in 1e-3f64..10.0, th in -1.5f64..1.5, phi in -PI..PI) {
            // w with e^{iφ} w in the open right half-plane
            let w = Complex64::from_polar(r, th - phi);
            let mut prev = f64::INFINITY;
            for n in 1..=200 {
                let q = qn_eval(phi, 1, n, w).unwrap();
                prop_assert!(q.norm() * w.norm() <= 4.0 + 1e-12);
                let err = (w * q - 1.0).norm();
                prop_assert!(err <= prev + 1e-15);
                prev = err;
            }
        }

        #[test]
        fn qn_bound_second_order(r in 1e-3f64..10.0, th in -3.1f64..3.1) {
            let w = Complex64::from_polar(r, th);
            for n in [1, 2, 5, 20, 100, 200] {
                let q = qn_eval(0.0, 2, n, w).unwrap();
                prop_assert!(q.norm() * w.norm() <= 4.0 + 1e-12);
            }
        }

        #[test]
        fn contraction_scans_pass(cc in 0.0f64..0.8, ph in -PI..PI) {
            let rot = Complex64::from_polar(cc, ph);
            let cfg = ScanConfig { n_radii: 6, n_angles: 24, zeta_radii: 2, zeta_angles: 6, ..Default::default() };
            let r = sector_scan(|z| z.conj() + rot * z, &Disc::unit(), &cfg);
            prop_assert!(r.passed);
            prop_assert!(r.max_spread <= 2.0 * cc.asin() + 1e-9);
        }
    }
}
