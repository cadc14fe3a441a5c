//! Discrete complex Chebyshev approximation by Lawson's iteratively
//! reweighted least squares.
//!
//! Given samples `b_i` and basis values `A_{i,l}`, find coefficients `c`
//! minimizing `max_i |b_i - (A c)_i|`. Each sweep solves a weighted
//! least-squares problem and multiplies the weights by the residual moduli.
//! The weighted residual `sqrt(Σ w_i |r_i|²)` of each sweep is a lower bound
//! on the minimax value, so every fit reports a bracket.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rows per chunk of the Gram accumulation. Fixed so the summation order,
/// and hence every bit of the result, does not depend on the thread count.
const GRAM_CHUNK: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LawsonConfig {
    pub max_iterations: usize,
    /// Stop once the relative change of the sup error falls below this.
    pub stagnation_tol: f64,
    /// Relative Tikhonov floor added to the normal equations.
    pub tikhonov: f64,
    /// A capped run whose recent errors swing by more than this (relative)
    /// is flagged as non-converged.
    pub oscillation_tol: f64,
}

impl Default for LawsonConfig {
    fn default() -> Self {
        Self { max_iterations: 200, stagnation_tol: 1e-8, tikhonov: 1e-12, oscillation_tol: 1e-4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimaxFit {
    pub coefficients: Vec<Complex64>,
    /// Sup error on the samples of the returned coefficients.
    pub sup_error: f64,
    /// Best weighted least-squares residual seen; never exceeds the true
    /// discrete minimax value.
    pub lower_bound: f64,
    pub iterations: usize,
    pub converged: bool,
    pub non_convergence: bool,
}

/// Row-major dense complex matrix of basis values.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl BasisMatrix {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for l in 0..cols {
                data.push(f(i, l));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn apply(&self, c: &[Complex64]) -> Vec<Complex64> {
        (0..self.rows).map(|i| self.row(i).iter().zip(c).map(|(a, x)| a * x).sum()).collect()
    }
}

fn sup_residual(a: &BasisMatrix, b: &[Complex64], c: &[Complex64]) -> (Vec<f64>, f64) {
    let fitted = a.apply(c);
    let r: Vec<f64> = b.iter().zip(&fitted).map(|(bi, fi)| (bi - fi).norm()).collect();
    let sup = r.iter().copied().fold(0.0, f64::max);
    (r, sup)
}

/// Solves the weighted normal equations `A^H W A c = A^H W b`.
fn weighted_lsq(a: &BasisMatrix, b: &[Complex64], w: &[f64], tikhonov: f64) -> Result<Vec<Complex64>> {
    let p = a.cols;
    let chunks: Vec<(DMatrix<f64>, DVector<f64>)> = (0..a.rows)
        .step_by(GRAM_CHUNK)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|start| {
            let end = (start + GRAM_CHUNK).min(a.rows);
            let n = end - start;
            // scaled rows [√w Re A, √w Im A] and the matching right-hand sides
            let mut y = DMatrix::<f64>::zeros(n, 2 * p);
            let mut yb_re = DVector::<f64>::zeros(n);
            let mut yb_im = DVector::<f64>::zeros(n);
            for (r, i) in (start..end).enumerate() {
                let s = w[i].sqrt();
                for (l, v) in a.row(i).iter().enumerate() {
                    y[(r, l)] = s * v.re;
                    y[(r, p + l)] = s * v.im;
                }
                yb_re[r] = s * b[i].re;
                yb_im[r] = s * b[i].im;
            }
            let gram = y.tr_mul(&y);
            let mut rhs = DVector::<f64>::zeros(4 * p);
            rhs.rows_mut(0, 2 * p).copy_from(&y.tr_mul(&yb_re));
            rhs.rows_mut(2 * p, 2 * p).copy_from(&y.tr_mul(&yb_im));
            (gram, rhs)
        })
        .collect();
    let mut gram = DMatrix::<f64>::zeros(2 * p, 2 * p);
    let mut rhs = DVector::<f64>::zeros(4 * p);
    for (g, r) in &chunks {
        gram += g;
        rhs += r;
    }
    // A^H W A = (ReᵀRe + ImᵀIm) + i (ReᵀIm - ImᵀRe)
    let mut h = DMatrix::<Complex64>::zeros(p, p);
    for l in 0..p {
        for m in 0..p {
            let re = gram[(l, m)] + gram[(p + l, p + m)];
            let im = gram[(l, p + m)] - gram[(p + l, m)];
            h[(l, m)] = Complex64::new(re, im);
        }
    }
    // A^H W b: Re = Reᵀb_re + Imᵀb_im, Im = Reᵀb_im - Imᵀb_re
    let hb = DVector::<Complex64>::from_fn(p, |l, _| {
        Complex64::new(rhs[l] + rhs[3 * p + l], rhs[2 * p + l] - rhs[p + l])
    });
    let trace: f64 = (0..p).map(|l| h[(l, l)].re).sum::<f64>() / p.max(1) as f64;
    let floor = tikhonov * trace.max(f64::MIN_POSITIVE);
    for l in 0..p {
        h[(l, l)] += Complex64::new(floor, 0.0);
    }
    let chol = h
        .cholesky()
        .ok_or_else(|| Error::Solver("normal equations are not positive definite".into()))?;
    Ok(chol.solve(&hb).iter().copied().collect())
}

/// Lawson iteration for `min_c max_i |b_i - (A c)_i|`.
pub fn lawson(a: &BasisMatrix, b: &[Complex64], cfg: &LawsonConfig) -> Result<MinimaxFit> {
    if a.rows == 0 {
        return Err(Error::invalid("empty sample grid"));
    }
    if b.len() != a.rows {
        return Err(Error::invalid("target and basis sample counts differ"));
    }
    if b.iter().any(|v| !v.re.is_finite() || !v.im.is_finite())
        || a.data.iter().any(|v| !v.re.is_finite() || !v.im.is_finite())
    {
        return Err(Error::Solver("non-finite sample values".into()));
    }
    if a.cols == 0 {
        let sup = b.iter().map(|v| v.norm()).fold(0.0, f64::max);
        return Ok(MinimaxFit {
            coefficients: vec![],
            sup_error: sup,
            lower_bound: sup,
            iterations: 0,
            converged: true,
            non_convergence: false,
        });
    }
    let m = a.rows;
    let mut w = vec![1.0 / m as f64; m];
    let mut best: Option<(Vec<Complex64>, f64)> = None;
    let mut lower = 0.0f64;
    let mut history: Vec<f64> = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    for it in 0..cfg.max_iterations {
        iterations = it + 1;
        let c = weighted_lsq(a, b, &w, cfg.tikhonov)?;
        let (r, sup) = sup_residual(a, b, &c);
        let weighted: f64 = w.iter().zip(&r).map(|(wi, ri)| wi * ri * ri).sum();
        lower = lower.max(weighted.sqrt());
        if best.as_ref().map_or(true, |(_, e)| sup < *e) {
            best = Some((c, sup));
        }
        let prev = history.last().copied();
        history.push(sup);
        let scale = sup.max(f64::MIN_POSITIVE);
        if sup <= 1e-15 * (1.0 + b.iter().map(|v| v.norm()).fold(0.0, f64::max)) {
            converged = true;
            break;
        }
        if let Some(p) = prev {
            if (p - sup).abs() <= cfg.stagnation_tol * scale {
                converged = true;
                break;
            }
        }
        if best.as_ref().is_some_and(|(_, e)| (e - lower) <= cfg.stagnation_tol * e) {
            converged = true;
            break;
        }
        let total: f64 = w.iter().zip(&r).map(|(wi, ri)| wi * ri).sum();
        if total <= 0.0 {
            converged = true;
            break;
        }
        for (wi, ri) in w.iter_mut().zip(&r) {
            *wi *= ri / total;
        }
    }
    let (coefficients, sup_error) = best.expect("at least one sweep ran");
    let non_convergence = !converged && {
        let tail = &history[history.len().saturating_sub(10)..];
        let hi = tail.iter().copied().fold(f64::MIN, f64::max);
        let lo = tail.iter().copied().fold(f64::MAX, f64::min);
        (hi - lo) > cfg.oscillation_tol * hi.max(f64::MIN_POSITIVE)
    };
    Ok(MinimaxFit {
        coefficients,
        sup_error,
        lower_bound: lower.min(sup_error),
        iterations,
        converged,
        non_convergence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn exact_fit_in_span() {
        let pts: Vec<_> = (0..200).map(|i| Complex64::from_polar(0.01 * i as f64, 0.37 * i as f64)).collect();
        let a = BasisMatrix::from_fn(pts.len(), 3, |i, l| match l {
            0 => c(1.0, 0.0),
            1 => pts[i],
            _ => pts[i].conj(),
        });
        let b: Vec<_> = pts.iter().map(|z| 2.0 * z.conj() - c(0.0, 1.0)).collect();
        let fit = lawson(&a, &b, &LawsonConfig::default()).unwrap();
        assert!(fit.sup_error < 1e-10);
        assert!((fit.coefficients[2] - c(2.0, 0.0)).norm() < 1e-9);
        assert!((fit.coefficients[0] - c(0.0, -1.0)).norm() < 1e-9);
    }

    #[test]
    fn best_constant_is_the_chebyshev_center() {
        // values on the real segment [0, 1]: best constant 0.5, error 0.5
        let b: Vec<_> = (0..101).map(|i| c(i as f64 / 100.0, 0.0)).collect();
        let a = BasisMatrix::from_fn(b.len(), 1, |_, _| c(1.0, 0.0));
        let fit = lawson(&a, &b, &LawsonConfig::default()).unwrap();
        assert!((fit.sup_error - 0.5).abs() < 1e-4, "{}", fit.sup_error);
        assert!(fit.lower_bound <= fit.sup_error);
        assert!((fit.coefficients[0] - c(0.5, 0.0)).norm() < 1e-3);
    }

    #[test]
    fn holomorphic_fits_of_conjugate_stall_at_one() {
        // sup over the unit circle of |z̄ - p(z)| >= 1 for every polynomial p
        let pts: Vec<_> = (0..256).map(|i| Complex64::from_polar(1.0, 2.0 * PI * i as f64 / 256.0)).collect();
        let a = BasisMatrix::from_fn(pts.len(), 3, |i, l| pts[i].powu(l as u32));
        let b: Vec<_> = pts.iter().map(|z| z.conj()).collect();
        let fit = lawson(&a, &b, &LawsonConfig::default()).unwrap();
        assert!(fit.sup_error >= 1.0 - 1e-12);
        assert!(fit.sup_error <= 1.0 + 1e-6);
    }

    #[test]
    fn rejects_bad_shapes() {
        let a = BasisMatrix::from_fn(0, 1, |_, _| c(1.0, 0.0));
        assert!(lawson(&a, &[], &LawsonConfig::default()).is_err());
        let a = BasisMatrix::from_fn(2, 1, |_, _| c(1.0, 0.0));
        assert!(lawson(&a, &[c(1.0, 0.0)], &LawsonConfig::default()).is_err());
    }
}
