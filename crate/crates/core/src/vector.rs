use std::ops::{Index, IndexMut};

use num_complex::Complex64;

/// Finite-dimensional element of l²(n) over the complex numbers.
///
/// The length is fixed at construction; every arithmetic helper checks that
/// its operands agree in length and panics otherwise, since a mismatch there
/// is a programming error rather than bad input.
#[derive(Debug, Clone, PartialEq)]
pub struct CVector(Vec<Complex64>);

impl CVector {
    /// Wraps `entries`. Panics on an empty vector.
    pub fn new(entries: Vec<Complex64>) -> Self {
        assert!(!entries.is_empty(), "CVector must have positive dimension");
        Self(entries)
    }

    pub fn zeros(dim: usize) -> Self {
        Self::new(vec![Complex64::new(0.0, 0.0); dim])
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self::new(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.0
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Complex64> {
        self.0.iter()
    }

    /// ⟨self, other⟩ = Σ selfᵢ · conj(otherᵢ), linear in the first argument.
    pub fn inner(&self, other: &CVector) -> Complex64 {
        self.check(other);
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a * b.conj())
            .sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// ‖self − other‖.
    pub fn distance(&self, other: &CVector) -> f64 {
        self.check(other);
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn sub(&self, other: &CVector) -> CVector {
        self.check(other);
        CVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, factor: f64) -> CVector {
        CVector(self.0.iter().map(|z| z * factor).collect())
    }

    /// self ← self + alpha · other.
    pub fn axpy(&mut self, alpha: f64, other: &CVector) {
        self.check(other);
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += b * alpha;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest |Im| over the entries.
    pub fn max_imag(&self) -> f64 {
        self.0.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    fn check(&self, other: &CVector) {
        assert_eq!(
            self.dim(),
            other.dim(),
            "CVector dimension mismatch ({} vs {})",
            self.dim(),
            other.dim()
        );
    }
}

impl Index<usize> for CVector {
    type Output = Complex64;

    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for CVector {
    fn index_mut(&mut self, i: usize) -> &mut Complex64 {
        &mut self.0[i]
    }
}

impl From<Vec<Complex64>> for CVector {
    fn from(v: Vec<Complex64>) -> Self {
        Self::new(v)
    }
}
