//! Polynomial-hull probe. A point `q ∈ C²` lies outside the polynomial hull
//! of a compact `K` iff some polynomial has `|P(q)| > sup_K |P|`. Fixing
//! `P(q) = 1`, the value `m_d = min sup_K |P|` over degree `≤ d` falls below
//! 1 exactly when degree `d` already separates. The probe can certify
//! exteriority, never membership.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex::Disc;
use crate::error::{Error, Result};
use crate::minimax::{lawson, BasisMatrix, LawsonConfig, MinimaxFit};
use crate::surface::CRSurface;

/// `m_d` below `1 - OUTSIDE_TOL` certifies that the probe is outside.
pub const OUTSIDE_TOL: f64 = 1e-3;

pub type Point2 = (Complex64, Complex64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Outside,
    Unresolved,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullProbeResult {
    pub probe: Point2,
    pub degrees: Vec<u32>,
    /// Running minimum of the sampled sup of `|P|`, capped at 1.
    pub m_values: Vec<f64>,
    /// Sup of this degree's own fit, uncapped.
    pub step_values: Vec<f64>,
    pub lower_bounds: Vec<f64>,
    pub non_convergence: Vec<bool>,
    pub verdict: Verdict,
    /// Smallest degree at which the probe separated.
    pub witness_degree: Option<u32>,
}

/// Exponents `(α, β)` with `1 <= α + β <= d`, by total degree.
pub fn monomials(d: u32) -> Vec<(u32, u32)> {
    (1..=d).flat_map(|t| (0..=t).rev().map(move |a| (a, t - a))).collect()
}

/// Minimizes the sampled sup of `|1 + Σ c (z - z_0)^α (w - w_0)^β|` over
/// `1 <= α + β <= d`; the polynomial equals 1 at the probe.
pub fn constrained_minimax(samples: &[Point2], probe: Point2, d: u32, cfg: &LawsonConfig) -> Result<MinimaxFit> {
    if samples.is_empty() {
        return Err(Error::invalid("empty sample set"));
    }
    // coordinates rescaled to unit extent for conditioning
    let scale = samples
        .iter()
        .map(|(z, w)| (z - probe.0).norm().max((w - probe.1).norm()))
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let mons = monomials(d);
    let a = BasisMatrix::from_fn(samples.len(), mons.len(), |i, l| {
        let (x, y) = ((samples[i].0 - probe.0) / scale, (samples[i].1 - probe.1) / scale);
        let (al, be) = mons[l];
        x.powu(al) * y.powu(be)
    });
    let b = vec![Complex64::new(-1.0, 0.0); samples.len()];
    lawson(&a, &b, cfg)
}

/// Runs [`constrained_minimax`] for `d = 1..=d_max`.
pub fn hull_probe(samples: &[Point2], probe: Point2, d_max: u32, cfg: &LawsonConfig) -> Result<HullProbeResult> {
    if samples.is_empty() {
        return Err(Error::invalid("empty sample set"));
    }
    if samples.iter().any(|&(z, w)| z == probe.0 && w == probe.1) {
        return Err(Error::invalid("the probe is one of the samples"));
    }
    let mut res = HullProbeResult {
        probe,
        degrees: Vec::new(),
        m_values: Vec::new(),
        step_values: Vec::new(),
        lower_bounds: Vec::new(),
        non_convergence: Vec::new(),
        verdict: Verdict::Unresolved,
        witness_degree: None,
    };
    let mut m = 1.0f64;
    for d in 1..=d_max {
        let fit = constrained_minimax(samples, probe, d, cfg)?;
        m = m.min(fit.sup_error);
        res.degrees.push(d);
        res.m_values.push(m);
        res.step_values.push(fit.sup_error);
        res.lower_bounds.push(fit.lower_bound);
        res.non_convergence.push(fit.non_convergence);
        if m < 1.0 - OUTSIDE_TOL && res.witness_degree.is_none() {
            res.witness_degree = Some(d);
            res.verdict = Verdict::Outside;
        }
    }
    Ok(res)
}

/// Points `(z, φ(z))` over the center plus `n_radii` rings of `n_angles`.
pub fn graph_samples<F>(phi: F, disc: &Disc, n_radii: usize, n_angles: usize) -> Vec<Point2>
where
    F: Fn(Complex64) -> Complex64,
{
    disc.polar_grid(n_radii, n_angles).into_iter().map(|z| (z, phi(z))).collect()
}

/// Probe points `(z, 𝔉(z) + offset)` over a small polar lattice of `z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeLattice {
    /// Rings of base points at radii `eps·i/(2 rings)`, plus the center.
    pub rings: usize,
    pub per_ring: usize,
    pub offsets: Vec<Complex64>,
}

impl ProbeLattice {
    /// Four offsets of modulus `tube` in the axis directions.
    pub fn tube(rings: usize, per_ring: usize, tube: f64) -> Self {
        let offsets = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)]
            .into_iter()
            .map(|(re, im)| Complex64::new(re * tube, im * tube))
            .collect();
        Self { rings, per_ring, offsets }
    }

    pub fn probes<F>(&self, graph: F, eps: f64) -> Vec<Point2>
    where
        F: Fn(Complex64) -> Complex64,
    {
        if self.offsets.is_empty() {
            return Vec::new();
        }
        let mut base = vec![Complex64::new(0.0, 0.0)];
        for i in 1..=self.rings {
            let r = eps * i as f64 / (2 * self.rings) as f64;
            for m in 0..self.per_ring {
                base.push(Complex64::from_polar(r, std::f64::consts::TAU * m as f64 / self.per_ring.max(1) as f64));
            }
        }
        base.into_iter().flat_map(|z| self.offsets.iter().map(move |&o| (z, o))).map(|(z, o)| (z, graph(z) + o)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullConfig {
    pub n_radii: usize,
    pub n_angles: usize,
    pub lawson: LawsonConfig,
}

impl Default for HullConfig {
    fn default() -> Self {
        Self { n_radii: 48, n_angles: 192, lawson: LawsonConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityScanReport {
    pub eps: f64,
    pub outside: usize,
    pub unresolved: Vec<(Point2, f64)>,
    pub probes: Vec<HullProbeResult>,
}

/// Probes a tube around the graph of `Σ + G` over `|z| <= eps`.
pub fn convexity_scan(s: &CRSurface, eps: f64, lattice: &ProbeLattice, d_max: u32, cfg: &HullConfig) -> Result<ConvexityScanReport> {
    let base = s.normalize();
    let disc = Disc::centered(eps)?;
    let samples = graph_samples(|z| base.graph_eval(z), &disc, cfg.n_radii, cfg.n_angles);
    let probes = lattice.probes(|z| base.graph_eval(z), eps);
    let results: Vec<HullProbeResult> = probes
        .par_iter()
        .map(|&p| hull_probe(&samples, p, d_max, &cfg.lawson))
        .collect::<Result<_>>()?;
    let outside = results.iter().filter(|r| r.verdict == Verdict::Outside).count();
    let unresolved = results
        .iter()
        .filter(|r| r.verdict == Verdict::Unresolved)
        .map(|r| (r.probe, r.m_values.last().copied().unwrap_or(1.0)))
        .collect();
    Ok(ConvexityScanReport { eps, outside, unresolved, probes: results })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cfg() -> LawsonConfig {
        LawsonConfig::default()
    }

    #[test]
    fn monomial_count() {
        assert_eq!(monomials(1), vec![(1, 0), (0, 1)]);
        assert_eq!(monomials(8).len(), 44);
    }

    #[test]
    fn totally_real_graph_separates() {
        let samples = graph_samples(|z| z.conj(), &Disc::unit(), 12, 48);
        let res = hull_probe(&samples, (c(0.0, 0.0), c(0.5, 0.0)), 3, &cfg()).unwrap();
        assert_eq!(res.verdict, Verdict::Outside);
        // 0.75 + 0.5 w - 0.5 z w has sup 0.875 on the graph
        assert!(res.m_values[1] <= 0.875 + 1e-9);
        for pair in res.m_values.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-9);
        }
    }

    #[test]
    fn elliptic_probe_is_not_separated() {
        let samples = graph_samples(|z| c(z.norm_sqr(), 0.0), &Disc::unit(), 12, 48);
        let res = hull_probe(&samples, (c(0.0, 0.0), c(0.25, 0.0)), 4, &cfg()).unwrap();
        assert_eq!(res.verdict, Verdict::Unresolved);
        assert!(res.m_values.iter().all(|&m| (1.0 - 1e-6..=1.0).contains(&m)));
    }

    #[test]
    fn sample_probe_is_rejected_and_pinned() {
        let samples = graph_samples(|z| z.conj(), &Disc::unit(), 4, 16);
        let p = samples[5];
        assert!(hull_probe(&samples, p, 2, &cfg()).is_err());
        let fit = constrained_minimax(&samples, p, 3, &cfg()).unwrap();
        assert!(fit.sup_error >= 1.0);
        assert!(hull_probe(&[], p, 2, &cfg()).is_err());
    }

    #[test]
    fn unitary_invariance() {
        let samples = graph_samples(|z| z.conj() + 0.2 * z * z, &Disc::unit(), 6, 24);
        let probe = (c(0.1, 0.0), c(0.4, 0.1));
        let (s, t) = (std::f64::consts::FRAC_1_SQRT_2, c(0.0, 1.0));
        let map = |(z, w): Point2| (s * (z + t * w) + c(0.3, 0.0), s * (t * z + w) - c(0.0, 0.2));
        let moved: Vec<_> = samples.iter().map(|&p| map(p)).collect();
        let a = hull_probe(&samples, probe, 3, &cfg()).unwrap();
        let b = hull_probe(&moved, map(probe), 3, &cfg()).unwrap();
        for (x, y) in a.m_values.iter().zip(&b.m_values) {
            assert!((x - y).abs() < 1e-4, "{x} vs {y}");
        }
    }

    #[test]
    fn convexity_scan_small() {
        let s = CRSurface::from_leading(3, &[(3, c(1.0, 0.0))], 1.0).unwrap();
        let lattice = ProbeLattice::tube(1, 4, 0.05);
        let hc = HullConfig { n_radii: 8, n_angles: 32, lawson: LawsonConfig { max_iterations: 60, ..cfg() } };
        let rep = convexity_scan(&s, 0.5, &lattice, 3, &hc).unwrap();
        assert_eq!(rep.probes.len(), 20);
        assert_eq!(rep.outside + rep.unresolved.len(), 20);
        for p in &rep.probes {
            assert!(p.m_values.iter().all(|&m| m <= 1.0));
        }
        let empty = ProbeLattice { rings: 1, per_ring: 4, offsets: vec![] };
        assert!(convexity_scan(&s, 0.5, &empty, 3, &hc).unwrap().probes.is_empty());
    }
}
