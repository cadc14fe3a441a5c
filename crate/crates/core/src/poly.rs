//! Sparse polynomials over the complex numbers.
//!
//! [`BihomPoly`] is a polynomial in `z` and `z̄` (a real-analytic function of
//! one complex variable); [`BiPoly`] is a holomorphic polynomial in two
//! complex variables `(z, w)`.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

fn ipow(z: Complex64, n: u32) -> Complex64 {
    if n == 0 {
        Complex64::new(1.0, 0.0)
    } else {
        z.powu(n)
    }
}

fn insert_term(terms: &mut BTreeMap<(u32, u32), Complex64>, key: (u32, u32), c: Complex64) {
    let entry = terms.entry(key).or_insert(Complex64::new(0.0, 0.0));
    *entry += c;
    if entry.re == 0.0 && entry.im == 0.0 {
        terms.remove(&key);
    }
}

/// `Σ c_{a,b} z^a z̄^b` with no stored zero coefficients.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<((u32, u32), Complex64)>", into = "Vec<((u32, u32), Complex64)>")]
pub struct BihomPoly {
    terms: BTreeMap<(u32, u32), Complex64>,
}

impl From<Vec<((u32, u32), Complex64)>> for BihomPoly {
    fn from(v: Vec<((u32, u32), Complex64)>) -> Self {
        Self::from_terms(v)
    }
}

impl From<BihomPoly> for Vec<((u32, u32), Complex64)> {
    fn from(p: BihomPoly) -> Self {
        p.terms.into_iter().collect()
    }
}

impl BihomPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn monomial(a: u32, b: u32, c: Complex64) -> Self {
        Self::from_terms([((a, b), c)])
    }

    /// Builds a polynomial, summing repeated exponents and dropping zeros.
    pub fn from_terms(terms: impl IntoIterator<Item = ((u32, u32), Complex64)>) -> Self {
        let mut map = BTreeMap::new();
        for (k, c) in terms {
            insert_term(&mut map, k, c);
        }
        Self { terms: map }
    }

    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32), Complex64)> + '_ {
        self.terms.iter().map(|(&k, &c)| (k, c))
    }

    pub fn coeff(&self, a: u32, b: u32) -> Complex64 {
        self.terms.get(&(a, b)).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Smallest total degree `a + b` among the terms.
    pub fn min_total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|(a, b)| a + b).min()
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let zb = z.conj();
        self.terms.iter().map(|(&(a, b), &c)| c * ipow(z, a) * ipow(zb, b)).sum()
    }

    /// `∂/∂z`, using `∂(z^a z̄^b)/∂z = a z^{a-1} z̄^b`.
    pub fn d_dz(&self) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .filter(|(&(a, _), _)| a > 0)
                .map(|(&(a, b), &c)| ((a - 1, b), c * a as f64)),
        )
    }

    /// `∂/∂z̄`, using `∂(z^a z̄^b)/∂z̄ = b z^a z̄^{b-1}`.
    pub fn d_dzbar(&self) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .filter(|(&(_, b), _)| b > 0)
                .map(|(&(a, b), &c)| ((a, b - 1), c * b as f64)),
        )
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::from_terms(self.terms.iter().map(|(&k, &c)| (k, c * s)))
    }
}

impl Add for &BihomPoly {
    type Output = BihomPoly;
    fn add(self, rhs: &BihomPoly) -> BihomPoly {
        BihomPoly::from_terms(self.terms().chain(rhs.terms()))
    }
}

impl Sub for &BihomPoly {
    type Output = BihomPoly;
    fn sub(self, rhs: &BihomPoly) -> BihomPoly {
        BihomPoly::from_terms(self.terms().chain(rhs.terms().map(|(k, c)| (k, -c))))
    }
}

impl Mul for &BihomPoly {
    type Output = BihomPoly;
    fn mul(self, rhs: &BihomPoly) -> BihomPoly {
        let mut out = BTreeMap::new();
        for (&(a1, b1), &c1) in &self.terms {
            for (&(a2, b2), &c2) in &rhs.terms {
                insert_term(&mut out, (a1 + a2, b1 + b2), c1 * c2);
            }
        }
        BihomPoly { terms: out }
    }
}

/// Holomorphic polynomial `Σ A_{μ,ν} z^μ w^ν` in two variables.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<((u32, u32), Complex64)>", into = "Vec<((u32, u32), Complex64)>")]
pub struct BiPoly {
    terms: BTreeMap<(u32, u32), Complex64>,
}

impl From<Vec<((u32, u32), Complex64)>> for BiPoly {
    fn from(v: Vec<((u32, u32), Complex64)>) -> Self {
        Self::from_terms(v)
    }
}

impl From<BiPoly> for Vec<((u32, u32), Complex64)> {
    fn from(p: BiPoly) -> Self {
        p.terms.into_iter().collect()
    }
}

impl BiPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_terms(terms: impl IntoIterator<Item = ((u32, u32), Complex64)>) -> Self {
        let mut map = BTreeMap::new();
        for (k, c) in terms {
            insert_term(&mut map, k, c);
        }
        Self { terms: map }
    }

    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32), Complex64)> + '_ {
        self.terms.iter().map(|(&k, &c)| (k, c))
    }

    pub fn coeff(&self, mu: u32, nu: u32) -> Complex64 {
        self.terms.get(&(mu, nu)).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|(a, b)| a + b).max().unwrap_or(0)
    }

    pub fn eval(&self, z: Complex64, w: Complex64) -> Complex64 {
        self.terms.iter().map(|(&(mu, nu), &c)| c * ipow(z, mu) * ipow(w, nu)).sum()
    }
}

impl Add for &BiPoly {
    type Output = BiPoly;
    fn add(self, rhs: &BiPoly) -> BiPoly {
        BiPoly::from_terms(self.terms().chain(rhs.terms()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_terms_are_dropped() {
        let p = BihomPoly::from_terms([((1, 2), c(1.0, 0.0)), ((1, 2), c(-1.0, 0.0)), ((0, 3), c(2.0, 0.0))]);
        assert_eq!(p.len(), 1);
        assert_eq!(p.coeff(1, 2), c(0.0, 0.0));
        assert!(BihomPoly::monomial(2, 2, c(0.0, 0.0)).is_zero());
    }

    #[test]
    fn eval_matches_term_sum() {
        let p = BihomPoly::from_terms([((0, 4), c(1.0, 0.0)), ((1, 3), c(0.3, 0.0))]);
        assert_abs_diff_eq!((p.eval(c(1.0, 0.0)) - c(1.3, 0.0)).norm(), 0.0, epsilon = 1e-15);
        let z = c(0.3, -0.4);
        let manual = z.conj().powu(4) + 0.3 * z * z.conj().powu(3);
        assert_abs_diff_eq!((p.eval(z) - manual).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn wirtinger_closed_forms() {
        // |z|^2 = z z̄
        let p = BihomPoly::monomial(1, 1, c(1.0, 0.0));
        let z = c(1.0, 1.0);
        assert_abs_diff_eq!((p.d_dz().eval(z) - z.conj()).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((p.d_dzbar().eval(z) - z).norm(), 0.0, epsilon = 1e-15);
        assert!(BihomPoly::monomial(3, 0, c(1.0, 0.0)).d_dzbar().is_zero());
    }

    #[test]
    fn closed_form_matches_finite_differences() {
        let p = BihomPoly::from_terms([((2, 1), c(0.5, -1.0)), ((0, 3), c(1.0, 0.2)), ((4, 0), c(-0.1, 0.0))]);
        let z = c(0.37, -0.61);
        let (dz, dzb) = crate::complex::wirtinger_fd_total(|w| p.eval(w), z, 1e-5);
        assert_abs_diff_eq!((p.d_dz().eval(z) - dz).norm(), 0.0, epsilon = 1e-8);
        assert_abs_diff_eq!((p.d_dzbar().eval(z) - dzb).norm(), 0.0, epsilon = 1e-8);
    }

    #[test]
    fn product_and_difference() {
        let p = BihomPoly::monomial(1, 0, c(1.0, 0.0));
        let q = BihomPoly::monomial(0, 1, c(2.0, 0.0));
        let pq = &p * &q;
        assert_eq!(pq.coeff(1, 1), c(2.0, 0.0));
        assert!((&pq - &pq).is_zero());
        let z = c(0.2, 0.9);
        assert_abs_diff_eq!(((&p + &q).eval(z) - (z + 2.0 * z.conj())).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn bipoly_eval() {
        let g = BiPoly::from_terms([((0, 2), c(1.0, 0.0)), ((1, 1), c(1.0, 0.0)), ((1, 0), c(1.0, 0.0))]);
        let (z, w) = (c(0.5, 0.1), c(-0.3, 0.7));
        assert_abs_diff_eq!((g.eval(z, w) - (w * w + z * w + z)).norm(), 0.0, epsilon = 1e-15);
        assert_eq!(g.total_degree(), 2);
    }
}
