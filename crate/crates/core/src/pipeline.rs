//! The full chain for one surface: certificate, sheets, sector and density
//! checks on the normalized sheet, then the Kallin step. Stops at the first
//! failing step.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::approx::{approx_report, density_grid, sector_scan, ApproxReport, ScanConfig, ScanReport};
use crate::complex::{CircleGrid, Disc};
use crate::error::Result;
use crate::kallin::{containment_margins, epsilon_checks, kallin_report, rotation_average, symmetrize, vertex_angle, wedges_disjoint, EpsilonSearch, KallinReport};
use crate::minimax::LawsonConfig;
use crate::poly::BiPoly;
use crate::sheets::{SheetSummary, SheetSystem};
use crate::surface::{certify, certify_forced, CRSurface, Certificate, SurfaceSpec};

pub const DEFAULT_SEED: u64 = 0x5eed_c0de;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineOptions {
    pub samples: usize,
    pub force_m: Option<usize>,
    pub force_c: Option<f64>,
    pub eps: Option<f64>,
    pub seed: u64,
    pub product_pairs: usize,
    pub density_schedule: Vec<(u32, u32)>,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            samples: crate::surface::DEFAULT_CIRCLE_SAMPLES,
            force_m: None,
            force_c: None,
            eps: None,
            seed: DEFAULT_SEED,
            product_pairs: 1000,
            density_schedule: vec![(0, 0), (1, 1), (2, 2), (3, 3)],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SheetStep {
    pub passed: bool,
    pub sheets: SheetSummary,
    pub product_residual: f64,
    pub product_pairs: usize,
    pub jacobian_min: f64,
    pub jacobian_inner: f64,
    pub jacobian_outer: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSummary {
    pub passed: bool,
    pub radius: f64,
    pub base_points: usize,
    pub max_spread: f64,
    pub violating_zeta: Vec<Complex64>,
    pub fiber_flags: Vec<Complex64>,
}

impl ScanSummary {
    pub fn from_report(r: &ScanReport, radius: f64) -> Self {
        Self {
            passed: r.passed,
            radius,
            base_points: r.outcomes.len(),
            max_spread: r.max_spread,
            violating_zeta: r.violating_zeta.clone(),
            fiber_flags: r.fiber_flags.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorStep {
    pub passed: bool,
    pub scan: ScanSummary,
    /// Fit of `z̄` in the algebra `[z, F_0]` on the validity disc.
    pub density: ApproxReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetrizeCheck {
    pub passed: bool,
    pub delta: usize,
    pub terms_in: usize,
    pub terms_out: usize,
    pub points: usize,
    pub max_relative_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KallinStep {
    pub passed: bool,
    pub kallin: KallinReport,
    pub symmetrize: SymmetrizeCheck,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub passed: bool,
    pub halted_at: Option<String>,
    pub surface: SurfaceSpec,
    pub certificate: Certificate,
    pub sheets: Option<SheetStep>,
    pub sector: Option<SectorStep>,
    pub kallin: Option<KallinStep>,
}

fn uniform_disc(rng: &mut ChaCha8Rng, r: f64) -> Complex64 {
    let rho = r * rng.gen::<f64>().sqrt();
    Complex64::from_polar(rho, std::f64::consts::TAU * rng.gen::<f64>())
}

/// Max relative residual of `∏_j (w - F_j) = w^Δ - 𝔉` at `pairs` seeded
/// random points.
pub fn random_product_check(sys: &SheetSystem, pairs: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = sys.validity_radius();
    let w_r = 2.0 * sys.c_star().norm() * d.powf(sys.base().k() as f64 / sys.delta() as f64);
    let mut zs = Vec::with_capacity(pairs);
    let mut ws = Vec::with_capacity(pairs);
    for _ in 0..pairs {
        zs.push(uniform_disc(&mut rng, d));
        ws.push(uniform_disc(&mut rng, w_r.max(1e-300)));
    }
    sys.verify_product(&zs, &ws)
}

/// Max relative mismatch of `P(z, w^Δ)` against `(1/Δ) Σ_j g(z, ω_j w)` at
/// seeded random points of the bidisc of radius `r`.
pub fn symmetrize_check(g: &BiPoly, delta: usize, points: usize, r: f64, seed: u64) -> Result<SymmetrizeCheck> {
    let p = symmetrize(g, delta)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..points {
        let z = uniform_disc(&mut rng, r);
        let w = uniform_disc(&mut rng, r);
        let scale: f64 = 1.0
            + g.terms()
                .map(|((mu, nu), v)| v.norm() * z.norm().powi(mu as i32) * w.norm().powi(nu as i32))
                .sum::<f64>();
        let lhs = p.eval(z, w.powu(delta as u32));
        worst = worst.max((lhs - rotation_average(g, delta, z, w)).norm() / scale);
    }
    Ok(SymmetrizeCheck {
        passed: worst <= 1e-12,
        delta,
        terms_in: g.len(),
        terms_out: p.len(),
        points,
        max_relative_residual: worst,
    })
}

pub fn run_pipeline(s: &CRSurface, opts: &PipelineOptions) -> Result<PipelineReport> {
    let grid = CircleGrid::new(opts.samples)?;
    let certificate = match opts.force_m {
        Some(m) => certify_forced(s, &grid, m)?,
        None => certify(s, &grid),
    };
    let mut report = PipelineReport {
        passed: false,
        halted_at: None,
        surface: s.to_spec(),
        certificate,
        sheets: None,
        sector: None,
        kallin: None,
    };
    if !report.certificate.passed {
        report.halted_at = Some("certificate".into());
        return Ok(report);
    }

    let sys = SheetSystem::build(s, &report.certificate)?;
    let delta_r = sys.validity_radius();
    let product_residual = random_product_check(&sys, opts.product_pairs, opts.seed)?;
    let jacobian_min = sys.min_jacobian_gap(delta_r / 100.0, delta_r, 32, 128)?;
    let step1 = SheetStep {
        passed: product_residual <= 1e-9 && jacobian_min > 0.0,
        sheets: sys.summary(),
        product_residual,
        product_pairs: opts.product_pairs,
        jacobian_min,
        jacobian_inner: delta_r / 100.0,
        jacobian_outer: delta_r,
    };
    let ok1 = step1.passed;
    report.sheets = Some(step1);
    if !ok1 {
        report.halted_at = Some("sheets".into());
        return Ok(report);
    }

    let disc = Disc::centered(delta_r)?;
    let f0 = |z: Complex64| sys.f0_unchecked(z);
    let scan = sector_scan(f0, &disc, &ScanConfig::default());
    let density = approx_report(
        f0,
        |z: Complex64| z.conj(),
        &opts.density_schedule,
        &density_grid(&disc, 16, 64),
        &LawsonConfig::default(),
    )?;
    let step2 = SectorStep { passed: scan.passed, scan: ScanSummary::from_report(&scan, delta_r), density };
    let ok2 = step2.passed;
    let g = step2.density.to_bipoly();
    report.sector = Some(step2);
    if !ok2 {
        report.halted_at = Some("sector".into());
        return Ok(report);
    }

    let a = report.certificate.selected.as_ref().expect("passing certificate").a;
    let cfg = EpsilonSearch::default();
    let kallin = match opts.eps {
        None => kallin_report(&sys, a, opts.force_c, &cfg)?,
        Some(eps) => {
            let c = match opts.force_c {
                Some(c) => c,
                None => crate::kallin::choose_c(a, sys.delta())?,
            };
            let checks = epsilon_checks(&sys, c, eps, &cfg)?;
            KallinReport {
                c,
                epsilon: eps,
                vertex_angle: vertex_angle(c),
                wedge_disjoint: wedges_disjoint(c, sys.delta()),
                containment_margins: containment_margins(&sys, c, eps, cfg.margin_radii, cfg.margin_angles)?,
                checks,
            }
        }
    };
    let sym = symmetrize_check(&g, sys.delta(), 1000, 1.0, opts.seed ^ 0x9e37_79b9)?;
    let step3 = KallinStep {
        passed: kallin.checks.passed() && kallin.wedge_disjoint && kallin.containment_margins.all_positive() && sym.passed,
        kallin,
        symmetrize: sym,
    };
    let ok3 = step3.passed;
    report.kallin = Some(step3);
    if !ok3 {
        report.halted_at = Some("kallin".into());
        return Ok(report);
    }
    report.passed = true;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demo::demo_surface;

    #[test]
    fn certified_examples_pass() {
        for name in ["zbar3", "zbar4-0.3"] {
            let rep = run_pipeline(&demo_surface(name).unwrap(), &PipelineOptions::default()).unwrap();
            assert!(rep.passed, "{name}: {:?}", rep.halted_at);
            let k = rep.kallin.as_ref().unwrap();
            assert!(k.kallin.epsilon > 0.0);
        }
        let rep = run_pipeline(&demo_surface("zbar3").unwrap(), &PipelineOptions::default()).unwrap();
        assert_eq!(rep.sheets.unwrap().sheets.validity_radius, 1.0);
    }

    #[test]
    fn uncertified_halts_first() {
        let rep = run_pipeline(&demo_surface("fail-0.9").unwrap(), &PipelineOptions::default()).unwrap();
        assert!(!rep.passed);
        assert_eq!(rep.halted_at.as_deref(), Some("certificate"));
        assert!(rep.sheets.is_none());
    }

    #[test]
    fn symmetrize_round_trip() {
        let g = BiPoly::from_terms([((0, 2), Complex64::new(1.0, 0.0)), ((1, 1), Complex64::new(0.5, -0.5))]);
        let chk = symmetrize_check(&g, 2, 1000, 1.0, 7).unwrap();
        assert!(chk.passed);
        assert_eq!(chk.terms_out, 1);
    }
}
