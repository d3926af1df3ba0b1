//! Eigenvalue bounds `(l_min, l_max)` of `B = ω·T*T`, which parameterize the
//! Chebyshev schedule, plus spectral radii of the plain Landweber iteration
//! matrix `I − ω·H^H H`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operator::LinearOperator;
use crate::vector::CVector;

/// Largest dimension accepted by the dense Hermitian eigensolver.
pub const DENSE_LIMIT: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundsSource {
    Exact,
    PowerIteration,
    MarchenkoPastur,
    UserSupplied,
}

impl BoundsSource {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Exact => "exact",
            Self::PowerIteration => "power-iteration",
            Self::MarchenkoPastur => "marchenko-pastur",
            Self::UserSupplied => "user-supplied",
        }
    }
}

/// Eigenvalue interval `[l_min, l_max]` with `0 < l_min ≤ l_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralBounds {
    l_min: f64,
    l_max: f64,
    source: BoundsSource,
    /// `l_min` was raised to the floor because the raw lower edge was too small.
    floored: bool,
}

impl SpectralBounds {
    pub fn new(l_min: f64, l_max: f64, source: BoundsSource) -> Result<Self> {
        if !(l_min.is_finite() && l_max.is_finite() && l_min > 0.0 && l_min <= l_max) {
            return Err(Error::InvalidArgument(format!(
                "spectral bounds need 0 < l_min <= l_max, got ({l_min}, {l_max})"
            )));
        }
        Ok(Self {
            l_min,
            l_max,
            source,
            floored: false,
        })
    }

    pub fn user(l_min: f64, l_max: f64) -> Result<Self> {
        Self::new(l_min, l_max, BoundsSource::UserSupplied)
    }

    /// Builds bounds from a raw (possibly zero or slightly negative) lower edge,
    /// replacing it by `floor_ratio·l_max` when it falls below that.
    pub fn with_floor(raw_min: f64, l_max: f64, floor_ratio: f64, source: BoundsSource) -> Result<Self> {
        if !(floor_ratio > 0.0 && floor_ratio < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "floor ratio must lie in (0, 1), got {floor_ratio}"
            )));
        }
        let floor = floor_ratio * l_max;
        let floored = !(raw_min >= floor);
        let mut b = Self::new(if floored { floor } else { raw_min }, l_max, source)?;
        b.floored = floored;
        Ok(b)
    }

    pub fn l_min(&self) -> f64 {
        self.l_min
    }

    pub fn l_max(&self) -> f64 {
        self.l_max
    }

    pub fn source(&self) -> BoundsSource {
        self.source
    }

    pub fn is_floored(&self) -> bool {
        self.floored
    }

    /// λ₊ = (l_max + l_min)/2.
    pub fn half_sum(&self) -> f64 {
        0.5 * (self.l_max + self.l_min)
    }

    /// λ₋ = (l_max − l_min)/2.
    pub fn half_diff(&self) -> f64 {
        0.5 * (self.l_max - self.l_min)
    }

    /// Bounds of `factor·B` given bounds of `B`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let mut b = Self::new(factor * self.l_min, factor * self.l_max, self.source)?;
        b.floored = self.floored;
        Ok(b)
    }

    pub fn contains(&self, lambda: f64) -> bool {
        lambda >= self.l_min && lambda <= self.l_max
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PowerIterationOptions {
    /// Stop once successive Rayleigh quotients differ by less than `tol` relative.
    pub tol: f64,
    pub max_iter: usize,
    /// Lower edge is floored at `floor_ratio·l_max` (singular operators).
    pub floor_ratio: f64,
}

impl Default for PowerIterationOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 5000,
            floor_ratio: 1e-12,
        }
    }
}

/// Deterministic start vector. Entries are positive and unstructured so the
/// start is not confined to an invariant subspace of a circulant operator.
fn start_vector(n: usize) -> CVector {
    let mut v = CVector::new(
        (0..n)
            .map(|i| Complex64::new(1.0 + ((i * 7919) % 101) as f64 / 101.0, 0.0))
            .collect(),
    );
    let norm = v.norm();
    for z in v.as_mut_slice() {
        *z /= norm;
    }
    v
}

/// Dominant eigenpair of a Hermitian positive semidefinite map by power iteration.
fn power_iterate(
    n: usize,
    what: &'static str,
    opts: &PowerIterationOptions,
    map: impl Fn(&CVector) -> Result<CVector>,
) -> Result<(f64, CVector)> {
    let mut v = start_vector(n);
    let mut previous = f64::NAN;
    for _ in 0..opts.max_iter {
        let w = map(&v)?;
        let rayleigh = w.inner(&v).re;
        let norm = w.norm();
        if norm == 0.0 {
            return Ok((0.0, v));
        }
        if (rayleigh - previous).abs() <= opts.tol * rayleigh.abs() {
            return Ok((rayleigh, v));
        }
        previous = rayleigh;
        v = w.scale(1.0 / norm);
        if !v.is_finite() {
            break;
        }
    }
    Err(Error::NotConverged {
        what,
        iterations: opts.max_iter,
        estimate: previous,
        last_iterate: v,
    })
}

/// Extreme eigenvalues of `ω·T*T` by power iteration.
///
/// `λ_max` comes from plain power iteration. `λ_min` comes from power iteration
/// on the shifted map `λ_max·I − ω·T*T`; the converged vector's Rayleigh quotient
/// in `ω·T*T` is then taken as `λ_min`.
pub fn extreme_eigenvalues(op: &LinearOperator, omega: f64, opts: &PowerIterationOptions) -> Result<SpectralBounds> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::InvalidArgument(format!("scale must be positive, got {omega}")));
    }
    let n = op.in_dim();
    let gram = |v: &CVector| -> Result<CVector> { Ok(op.gram_apply(v)?.scale(omega)) };

    let (l_max, _) = power_iterate(n, "largest-eigenvalue power iteration", opts, gram)?;
    if l_max <= 0.0 {
        return Err(Error::InvalidArgument("operator is zero; no positive spectrum".into()));
    }

    let shifted = |v: &CVector| -> Result<CVector> {
        let mut out = v.scale(l_max);
        out.axpy(-1.0, &gram(v)?);
        Ok(out)
    };
    let (shift_top, v) = power_iterate(n, "smallest-eigenvalue power iteration", opts, shifted)?;
    let l_min = if shift_top == 0.0 {
        // ω·T*T = λ_max·I
        l_max
    } else {
        gram(&v)?.inner(&v).re
    };

    SpectralBounds::with_floor(l_min.min(l_max), l_max, opts.floor_ratio, BoundsSource::PowerIteration)
}

/// Edges of the Marchenko–Pastur law for the Gram matrix of an i.i.d.
/// `CN(0, entry_variance)` matrix: `var·n·(1 ± √(m/n))²`, with the lower edge
/// floored at `floor_ratio·l_max`.
pub fn marchenko_pastur_bounds(n: usize, m: usize, entry_variance: f64, floor_ratio: f64) -> Result<SpectralBounds> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidArgument("dimensions must be positive".into()));
    }
    if !(entry_variance > 0.0 && entry_variance.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "entry variance must be positive, got {entry_variance}"
        )));
    }
    let ratio_sqrt = (m as f64 / n as f64).sqrt();
    let scale = entry_variance * n as f64;
    let l_max = scale * (1.0 + ratio_sqrt).powi(2);
    let raw_min = scale * (1.0 - ratio_sqrt).powi(2);
    SpectralBounds::with_floor(raw_min, l_max, floor_ratio, BoundsSource::MarchenkoPastur)
}

/// Eigenvalues of `H^H H` in ascending order (dense Hermitian eigensolver).
pub fn gram_eigenvalues(h: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    let n = h.ncols();
    if n > DENSE_LIMIT || h.nrows() > DENSE_LIMIT {
        return Err(Error::TooLarge {
            dim: n.max(h.nrows()),
            max: DENSE_LIMIT,
        });
    }
    let gram = h.ad_mul(h);
    let mut eig: Vec<f64> = gram.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

/// Exact bounds of `ω·H^H H` from the dense eigensolver; a numerically zero
/// lower edge is floored at machine epsilon relative to `l_max`.
pub fn exact_bounds(h: &DMatrix<Complex64>, omega: f64) -> Result<SpectralBounds> {
    let eig = gram_eigenvalues(h)?;
    let l_max = omega * eig[eig.len() - 1];
    SpectralBounds::with_floor(omega * eig[0], l_max, f64::EPSILON, BoundsSource::Exact)
}

/// ρ(I − ω·H^H H) = max |1 − ω·λᵢ| over the eigenvalues of `H^H H`.
pub fn iteration_spectral_radius(h: &DMatrix<Complex64>, omega: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {omega}")));
    }
    Ok(gram_eigenvalues(h)?
        .iter()
        .map(|l| (1.0 - omega * l).abs())
        .fold(0.0, f64::max))
}

/// ω_opt = 2/(l_min + l_max).
pub fn omega_opt(bounds: &SpectralBounds) -> f64 {
    2.0 / (bounds.l_min() + bounds.l_max())
}
