//! CR-singular surface germs `w = C_0 z^k + Σ(z) + G(z)` and the
//! certificate deciding the size and derivative conditions on the ratios
//! `τ_M`.
//!
//! Every quantity is evaluated in closed form. The ratio `τ_M = N / D` has a
//! monomial denominator `D = C_M z^{k-M} z̄^M`, so the Euler-type operators
//! `z ∂/∂z` and `z̄ ∂/∂z̄` act on `N` by rescaling coefficients, which keeps all
//! first and second Wirtinger derivatives exact.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::complex::CircleGrid;
use crate::error::{Error, Result};
use crate::poly::BihomPoly;

/// Default number of circle samples used by [`certify`].
pub const DEFAULT_CIRCLE_SAMPLES: usize = 4096;

/// Tolerance under which `A` is considered to sit exactly on the size bound.
const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CRSurface {
    k: usize,
    coefficients: Vec<Complex64>,
    residual: BihomPoly,
    radius: f64,
}

impl CRSurface {
    /// `coefficients[j]` multiplies `z^{k-j} z̄^j`.
    pub fn new(k: usize, coefficients: Vec<Complex64>, residual: BihomPoly, radius: f64) -> Result<Self> {
        if k <= 2 {
            return Err(Error::Schema(format!("degree k must exceed 2, got {k}")));
        }
        if coefficients.len() != k + 1 {
            return Err(Error::Schema(format!(
                "expected {} coefficients C_0..C_{k}, got {}",
                k + 1,
                coefficients.len()
            )));
        }
        if coefficients.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Schema("non-finite coefficient".into()));
        }
        if let Some(d) = residual.min_total_degree() {
            if (d as usize) < k + 1 {
                return Err(Error::Schema(format!(
                    "residual term of total degree {d} is not O(|z|^{})",
                    k + 1
                )));
            }
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Schema(format!("radius must be positive, got {radius}")));
        }
        Ok(Self { k, coefficients, residual, radius })
    }

    /// Surface with only the given `(j, C_j)` leading coefficients.
    pub fn from_leading(k: usize, nonzero: &[(usize, Complex64)], radius: f64) -> Result<Self> {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); k + 1];
        for &(j, c) in nonzero {
            if j > k {
                return Err(Error::Schema(format!("coefficient index {j} outside 0..={k}")));
            }
            coeffs[j] += c;
        }
        Self::new(k, coeffs, BihomPoly::zero(), radius)
    }

    pub fn with_residual(mut self, residual: BihomPoly) -> Result<Self> {
        self.residual = residual;
        Self::new(self.k, self.coefficients, self.residual, self.radius)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn coefficient(&self, j: usize) -> Complex64 {
        self.coefficients[j]
    }

    pub fn residual(&self) -> &BihomPoly {
        &self.residual
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Drops the holomorphic leading term `C_0 z^k` (the coordinate change
    /// `w ↦ w - C_0 z^k`).
    pub fn normalize(&self) -> Self {
        let mut out = self.clone();
        out.coefficients[0] = Complex64::new(0.0, 0.0);
        out
    }

    /// `Σ(z) = Σ_{j=1}^{k} C_j z^{k-j} z̄^j` as a polynomial.
    pub fn sigma(&self) -> BihomPoly {
        BihomPoly::from_terms(
            self.coefficients
                .iter()
                .enumerate()
                .skip(1)
                .map(|(j, &c)| (((self.k - j) as u32, j as u32), c)),
        )
    }

    pub fn sigma_eval(&self, z: Complex64) -> Complex64 {
        self.sigma().eval(z)
    }

    /// `Σ(z) + G(z)`, the right-hand side after normalization.
    pub fn graph_eval(&self, z: Complex64) -> Complex64 {
        self.sigma().eval(z) + self.residual.eval(z)
    }

    /// Full right-hand side `C_0 z^k + Σ(z) + G(z)`.
    pub fn phi_eval(&self, z: Complex64) -> Complex64 {
        self.coefficients[0] * z.powu(self.k as u32) + self.graph_eval(z)
    }

    /// `I(S) = { j : k/2 < j <= k, C_j != 0 }`, ascending.
    pub fn index_set(&self) -> Vec<usize> {
        (0..=self.k)
            .filter(|&j| 2 * j > self.k)
            .filter(|&j| {
                let c = self.coefficients[j];
                c.re != 0.0 || c.im != 0.0
            })
            .collect()
    }

    /// The ratio `τ_M` in closed form.
    pub fn tau(&self, m: usize) -> Result<Tau> {
        let index_set = self.index_set();
        if !index_set.contains(&m) {
            return Err(Error::IndexNotInSet { m, index_set });
        }
        let sigma = self.sigma();
        let (a, b) = ((self.k - m) as u32, m as u32);
        let c_m = self.coefficients[m];
        let numerator = &sigma - &BihomPoly::monomial(a, b, c_m);
        Ok(Tau::new(numerator, self.residual.clone(), c_m, a, b))
    }

    pub fn tau_eval(&self, m: usize, z: Complex64) -> Result<Complex64> {
        self.tau(m)?.eval(z)
    }

    /// Reads the surface JSON schema. `path` only labels error messages.
    pub fn from_json_str(text: &str, path: &str) -> Result<Self> {
        let spec: SurfaceSpec = serde_json::from_str(text).map_err(|e| Error::Json {
            path: path.to_string(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        spec.into_surface()
    }

    pub fn to_spec(&self) -> SurfaceSpec {
        SurfaceSpec {
            k: self.k,
            coefficients: self
                .coefficients
                .iter()
                .enumerate()
                .filter(|(_, c)| c.re != 0.0 || c.im != 0.0)
                .map(|(j, c)| CoefficientEntry { j, re: c.re, im: c.im })
                .collect(),
            residual: self
                .residual
                .terms()
                .map(|((a, b), c)| ResidualEntry { a, b, re: c.re, im: c.im })
                .collect(),
            radius: self.radius,
        }
    }
}

/// On-disk form of a surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSpec {
    pub k: usize,
    pub coefficients: Vec<CoefficientEntry>,
    #[serde(default)]
    pub residual: Vec<ResidualEntry>,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientEntry {
    pub j: usize,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResidualEntry {
    pub a: u32,
    pub b: u32,
    pub re: f64,
    pub im: f64,
}

impl SurfaceSpec {
    pub fn into_surface(self) -> Result<CRSurface> {
        if self.k <= 2 {
            return Err(Error::Schema(format!("degree k must exceed 2, got {}", self.k)));
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); self.k + 1];
        let mut seen = vec![false; self.k + 1];
        for e in &self.coefficients {
            if e.j > self.k {
                return Err(Error::Schema(format!("coefficient index j = {} outside 0..={}", e.j, self.k)));
            }
            if seen[e.j] {
                return Err(Error::Schema(format!("coefficient index j = {} given twice", e.j)));
            }
            seen[e.j] = true;
            coeffs[e.j] = Complex64::new(e.re, e.im);
        }
        for r in &self.residual {
            if (r.a + r.b) as usize <= self.k {
                return Err(Error::Schema(format!(
                    "residual term z^{} z̄^{} has total degree {} <= k = {}",
                    r.a,
                    r.b,
                    r.a + r.b,
                    self.k
                )));
            }
        }
        let residual =
            BihomPoly::from_terms(self.residual.iter().map(|r| ((r.a, r.b), Complex64::new(r.re, r.im))));
        CRSurface::new(self.k, coeffs, residual, self.radius)
    }
}

/// `τ_M = N / D` with `D = C_M z^a z̄^b`, plus the residual term `G / D`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tau {
    numerator: BihomPoly,
    residual: BihomPoly,
    c_m: Complex64,
    a: u32,
    b: u32,
    // z ∂N/∂z - a N and z̄ ∂N/∂z̄ - b N
    euler_z: BihomPoly,
    euler_zbar: BihomPoly,
}

fn euler(p: &BihomPoly, shift: u32, use_z: bool) -> BihomPoly {
    BihomPoly::from_terms(p.terms().map(|((pa, pb), c)| {
        let e = if use_z { pa as f64 - shift as f64 } else { pb as f64 - shift as f64 };
        ((pa, pb), c * e)
    }))
}

impl Tau {
    fn new(numerator: BihomPoly, residual: BihomPoly, c_m: Complex64, a: u32, b: u32) -> Self {
        let euler_z = euler(&numerator, a, true);
        let euler_zbar = euler(&numerator, b, false);
        Self { numerator, residual, c_m, a, b, euler_z, euler_zbar }
    }

    pub fn numerator(&self) -> &BihomPoly {
        &self.numerator
    }

    fn denominator(&self, z: Complex64) -> Complex64 {
        let mut d = self.c_m;
        if self.a > 0 {
            d *= z.powu(self.a);
        }
        if self.b > 0 {
            d *= z.conj().powu(self.b);
        }
        d
    }

    fn check(z: Complex64) -> Result<()> {
        if z.re == 0.0 && z.im == 0.0 {
            return Err(Error::domain(z, "τ is undefined at z = 0"));
        }
        Ok(())
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        Self::check(z)?;
        Ok(self.numerator.eval(z) / self.denominator(z))
    }

    /// `u(z) = τ_M(z) + G(z) / (C_M z^{k-M} z̄^M)`.
    pub fn u_eval(&self, z: Complex64) -> Result<Complex64> {
        Self::check(z)?;
        Ok((self.numerator.eval(z) + self.residual.eval(z)) / self.denominator(z))
    }

    /// Closed-form `(∂τ/∂z, ∂τ/∂z̄)`.
    pub fn wirtinger(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        Self::check(z)?;
        let d = self.denominator(z);
        let z_dz = self.euler_z.eval(z) / d;
        let zb_dzb = self.euler_zbar.eval(z) / d;
        Ok((z_dz / z, zb_dzb / z.conj()))
    }

    /// `|z| ‖∇τ(z)‖ = |z τ_z| + |z̄ τ_z̄|`.
    pub fn scaled_gradient_norm(&self, z: Complex64) -> Result<f64> {
        Self::check(z)?;
        let d = self.denominator(z);
        Ok((self.euler_z.eval(z) / d).norm() + (self.euler_zbar.eval(z) / d).norm())
    }

    /// Bound on the angular derivative of [`Self::scaled_gradient_norm`] on
    /// the unit circle, from the closed-form second derivatives.
    fn angular_lipschitz_of_gradient(&self, z: Complex64) -> f64 {
        let d = self.denominator(z).norm();
        let terms = [
            euler(&self.euler_z, self.a, true),
            euler(&self.euler_z, self.b, false),
            euler(&self.euler_zbar, self.a, true),
            euler(&self.euler_zbar, self.b, false),
        ];
        terms.iter().map(|p| p.eval(z).norm()).sum::<f64>() / d
    }
}

/// Sampled profile of `τ_M` on the unit circle with certified upper bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauProfile {
    pub m: usize,
    #[serde(skip)]
    pub values: Vec<Complex64>,
    /// Upper estimate of `sup_{|ζ|=1} |τ_M(ζ)|`.
    pub a: f64,
    /// Upper estimate of `sup_{|ζ|=1} |ζ| ‖∇τ_M(ζ)‖`.
    pub grad_sup: f64,
    pub a_sampled: f64,
    pub grad_sup_sampled: f64,
    pub samples: usize,
}

pub fn tau_profile(s: &CRSurface, m: usize, grid: &CircleGrid) -> Result<TauProfile> {
    let tau = s.tau(m)?;
    let half = grid.half_spacing();
    let mut values = Vec::with_capacity(grid.len());
    let (mut a_s, mut g_s, mut lip) = (0.0f64, 0.0f64, 0.0f64);
    for &z in grid.points() {
        let v = tau.eval(z)?;
        let g = tau.scaled_gradient_norm(z)?;
        a_s = a_s.max(v.norm());
        g_s = g_s.max(g);
        lip = lip.max(tau.angular_lipschitz_of_gradient(z));
        values.push(v);
    }
    Ok(TauProfile {
        m,
        values,
        // |∂_θ τ| <= |z τ_z| + |z̄ τ_z̄| on the unit circle
        a: a_s + g_s * half,
        grad_sup: g_s + lip * half,
        a_sampled: a_s,
        grad_sup_sampled: g_s,
        samples: grid.len(),
    })
}

/// Certified upper estimate of `sup_{|ζ|=1} |τ_M(ζ)|`.
pub fn tau_sup(s: &CRSurface, m: usize, grid: &CircleGrid) -> Result<f64> {
    Ok(tau_profile(s, m, grid)?.a)
}

/// Certified upper estimate of `sup_{|ζ|=1} |ζ| ‖∇τ_M(ζ)‖`.
pub fn grad_tau_sup(s: &CRSurface, m: usize, grid: &CircleGrid) -> Result<f64> {
    Ok(tau_profile(s, m, grid)?.grad_sup)
}

/// Right-hand side of the size condition, `sin(π/Δ) / (sin(π/Δ) + cos(π/Δ))`.
pub fn size_rhs(delta: i64) -> Result<f64> {
    if delta <= 0 {
        return Err(Error::invalid(format!("Δ must be positive, got {delta}")));
    }
    if delta == 1 {
        return Ok(0.0);
    }
    let t = PI / delta as f64;
    Ok(t.sin() / (t.sin() + t.cos()))
}

/// Diagnostics of both conditions at one index `M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexDiagnostics {
    pub m: usize,
    pub delta: usize,
    pub a: f64,
    pub grad_sup: f64,
    pub b: f64,
    pub size_rhs: f64,
    pub size_ok: bool,
    pub size_margin: f64,
    pub deriv_lhs: f64,
    pub deriv_ok: bool,
    pub deriv_margin: f64,
    /// `(Δ - LHS) / Δ`.
    pub relative_deriv_margin: f64,
    /// `A` sits on the size bound (within 1e-12).
    pub boundary: bool,
    /// `Δ = 1`, where the size bound is 0.
    pub vacuous_bound: bool,
}

impl IndexDiagnostics {
    pub fn passes(&self) -> bool {
        self.size_ok && self.deriv_ok
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub passed: bool,
    pub reason: Option<String>,
    /// The chosen index (passing, or the best failing one for diagnostics).
    pub selected: Option<IndexDiagnostics>,
    /// Admissible open interval `(A, size_rhs)` for the Kallin constant.
    pub c_range: Option<(f64, f64)>,
    pub per_index: Vec<IndexDiagnostics>,
    pub samples: usize,
}

impl Certificate {
    pub fn m(&self) -> Option<usize> {
        self.selected.as_ref().map(|d| d.m)
    }

    pub fn delta(&self) -> Option<usize> {
        self.selected.as_ref().map(|d| d.delta)
    }
}

pub fn diagnose_index(s: &CRSurface, m: usize, grid: &CircleGrid) -> Result<IndexDiagnostics> {
    let prof = tau_profile(s, m, grid)?;
    let k = s.k() as f64;
    let delta = 2 * m - s.k();
    let df = delta as f64;
    let rhs = size_rhs(delta as i64)?;
    let (a, g) = (prof.a, prof.grad_sup);
    let size_ok = a < rhs;
    let boundary = (a - rhs).abs() <= BOUNDARY_TOL;
    let (deriv_lhs, b) = if a < 1.0 {
        (k * a + g / (1.0 - a), (k / df) * a + g / (df * (1.0 - a)))
    } else {
        (f64::INFINITY, f64::INFINITY)
    };
    let deriv_ok = deriv_lhs < df;
    Ok(IndexDiagnostics {
        m,
        delta,
        a,
        grad_sup: g,
        b,
        size_rhs: rhs,
        size_ok: size_ok && !boundary,
        size_margin: rhs - a,
        deriv_lhs,
        deriv_ok,
        deriv_margin: df - deriv_lhs,
        relative_deriv_margin: (df - deriv_lhs) / df,
        boundary,
        vacuous_bound: delta == 1,
    })
}

fn assemble(per_index: Vec<IndexDiagnostics>, selected: Option<IndexDiagnostics>, samples: usize) -> Certificate {
    let passed = selected.as_ref().is_some_and(|d| d.passes());
    let reason = if per_index.is_empty() {
        Some("empty index set".to_string())
    } else if passed {
        None
    } else {
        let sel = selected.as_ref().expect("nonempty index set");
        let mut why = Vec::new();
        if !sel.size_ok {
            why.push(if sel.boundary { "size condition on the boundary" } else { "size condition fails" });
        }
        if !sel.deriv_ok {
            why.push("derivative condition fails");
        }
        if sel.vacuous_bound {
            why.push("vacuous bound (Δ = 1)");
        }
        Some(format!("M = {}: {}", sel.m, why.join(", ")))
    };
    let c_range = selected.as_ref().filter(|d| d.passes()).map(|d| (d.a, d.size_rhs));
    Certificate { passed, reason, selected, c_range, per_index, samples }
}

/// Decides the size and derivative conditions for every `M ∈ I(S)`. Among
/// passing indices the one with the largest relative derivative margin is
/// selected.
pub fn certify(s: &CRSurface, grid: &CircleGrid) -> Certificate {
    let per_index: Vec<_> = s
        .index_set()
        .into_iter()
        .map(|m| diagnose_index(s, m, grid).expect("index taken from I(S)"))
        .collect();
    let by_margin = |x: &&IndexDiagnostics, y: &&IndexDiagnostics| {
        x.relative_deriv_margin.total_cmp(&y.relative_deriv_margin)
    };
    let selected = per_index
        .iter()
        .filter(|d| d.passes())
        .max_by(by_margin)
        .or_else(|| per_index.iter().max_by(by_margin))
        .cloned();
    assemble(per_index, selected, grid.len())
}

/// [`certify`] with the index forced to `m`.
pub fn certify_forced(s: &CRSurface, grid: &CircleGrid, m: usize) -> Result<Certificate> {
    let index_set = s.index_set();
    if !index_set.contains(&m) {
        return Err(Error::IndexNotInSet { m, index_set });
    }
    let per_index: Vec<_> =
        index_set.iter().map(|&j| diagnose_index(s, j, grid)).collect::<Result<_>>()?;
    let selected = per_index.iter().find(|d| d.m == m).cloned();
    Ok(assemble(per_index, selected, grid.len()))
}
