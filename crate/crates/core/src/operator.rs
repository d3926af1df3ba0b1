//! Linear forward maps `T` with their adjoints.
//!
//! Two backends are provided: a dense complex matrix, and a cyclic convolution
//! on a uniform grid that discretizes `y(x) = ∫ f(u) g(x − u) du`. The
//! convolution integral is approximated by `Δx` times the length-`n` cyclic
//! convolution of the samples, evaluated with an FFT.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::vector::CVector;

#[derive(Clone)]
pub struct LinearOperator {
    backend: Backend,
}

#[derive(Clone)]
enum Backend {
    Dense(DMatrix<Complex64>),
    Convolution(CyclicConvolution),
}

/// Cyclic convolution with a sampled kernel.
///
/// Kernel sample `i` sits at offset `i·Δx` for `i < n/2` and `(i − n)·Δx`
/// otherwise (FFT wraparound layout, centered at index 0).
#[derive(Clone)]
pub struct CyclicConvolution {
    kernel: Vec<Complex64>,
    bin_width: f64,
    /// Δx · DFT(kernel).
    transfer: Vec<Complex64>,
    /// Real even kernel: the operator is self-adjoint and `adjoint_apply` reuses `apply`.
    self_adjoint: bool,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl CyclicConvolution {
    pub fn new(kernel: Vec<Complex64>, bin_width: f64) -> Result<Self> {
        if kernel.is_empty() {
            return Err(Error::InvalidArgument("convolution kernel is empty".into()));
        }
        if !(bin_width > 0.0 && bin_width.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "bin width must be positive and finite, got {bin_width}"
            )));
        }
        let n = kernel.len();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);

        let mut transfer = kernel.clone();
        forward.process(&mut transfer);
        for t in &mut transfer {
            *t *= bin_width;
        }

        let self_adjoint = (0..n).all(|i| kernel[i].im == 0.0 && kernel[i] == kernel[(n - i) % n]);

        Ok(Self {
            kernel,
            bin_width,
            transfer,
            self_adjoint,
            forward,
            inverse,
        })
    }

    /// Samples `g` at the wraparound offsets of an `n`-point grid with spacing `bin_width`.
    pub fn from_fn(n: usize, bin_width: f64, g: impl Fn(f64) -> f64) -> Result<Self> {
        let kernel = (0..n)
            .map(|i| Complex64::new(g(wrap_offset(i, n) * bin_width), 0.0))
            .collect();
        Self::new(kernel, bin_width)
    }

    pub fn len(&self) -> usize {
        self.kernel.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kernel.is_empty()
    }

    pub fn kernel(&self) -> &[Complex64] {
        &self.kernel
    }

    pub fn bin_width(&self) -> f64 {
        self.bin_width
    }

    pub fn is_self_adjoint(&self) -> bool {
        self.self_adjoint
    }

    /// Eigenvalues of `T*T`, i.e. `|Δx · ĝ|²` for every frequency bin.
    pub fn gram_spectrum(&self) -> Vec<f64> {
        self.transfer.iter().map(|t| t.norm_sqr()).collect()
    }

    fn filter(&self, x: &[Complex64], conjugate: bool) -> Vec<Complex64> {
        let n = self.len();
        let mut buf = x.to_vec();
        self.forward.process(&mut buf);
        for (b, t) in buf.iter_mut().zip(&self.transfer) {
            *b *= if conjugate { t.conj() } else { *t };
        }
        self.inverse.process(&mut buf);
        let scale = 1.0 / n as f64;
        for b in &mut buf {
            *b *= scale;
        }
        buf
    }
}

impl fmt::Debug for CyclicConvolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CyclicConvolution")
            .field("len", &self.len())
            .field("bin_width", &self.bin_width)
            .field("self_adjoint", &self.self_adjoint)
            .finish()
    }
}

/// Signed offset (in bins) of wraparound index `i` on an `n`-point grid.
pub fn wrap_offset(i: usize, n: usize) -> f64 {
    if i < n / 2 {
        i as f64
    } else {
        i as f64 - n as f64
    }
}

impl LinearOperator {
    pub fn dense(matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() == 0 || matrix.ncols() == 0 {
            return Err(Error::InvalidArgument("matrix must be non-empty".into()));
        }
        Ok(Self {
            backend: Backend::Dense(matrix),
        })
    }

    pub fn identity(n: usize) -> Self {
        Self::dense(DMatrix::identity(n, n)).expect("identity of positive size")
    }

    pub fn diagonal(entries: &[f64]) -> Self {
        let d = DVector::from_iterator(entries.len(), entries.iter().map(|&v| Complex64::new(v, 0.0)));
        Self::dense(DMatrix::from_diagonal(&d)).expect("non-empty diagonal")
    }

    pub fn convolution(conv: CyclicConvolution) -> Self {
        Self {
            backend: Backend::Convolution(conv),
        }
    }

    pub fn in_dim(&self) -> usize {
        match &self.backend {
            Backend::Dense(m) => m.ncols(),
            Backend::Convolution(c) => c.len(),
        }
    }

    pub fn out_dim(&self) -> usize {
        match &self.backend {
            Backend::Dense(m) => m.nrows(),
            Backend::Convolution(c) => c.len(),
        }
    }

    pub fn as_dense(&self) -> Option<&DMatrix<Complex64>> {
        match &self.backend {
            Backend::Dense(m) => Some(m),
            Backend::Convolution(_) => None,
        }
    }

    pub fn as_convolution(&self) -> Option<&CyclicConvolution> {
        match &self.backend {
            Backend::Convolution(c) => Some(c),
            Backend::Dense(_) => None,
        }
    }

    /// `T x`.
    pub fn apply(&self, x: &CVector) -> Result<CVector> {
        check_dim("apply", self.in_dim(), x.dim())?;
        Ok(match &self.backend {
            Backend::Dense(m) => {
                let v = DVector::from_column_slice(x.as_slice());
                CVector::new((m * v).data.into())
            }
            Backend::Convolution(c) => CVector::new(c.filter(x.as_slice(), false)),
        })
    }

    /// `T* y`: conjugate transpose for matrices, correlation with the kernel for
    /// convolutions (identical to `apply` for a real even kernel).
    pub fn adjoint_apply(&self, y: &CVector) -> Result<CVector> {
        check_dim("adjoint_apply", self.out_dim(), y.dim())?;
        Ok(match &self.backend {
            Backend::Dense(m) => {
                let v = DVector::from_column_slice(y.as_slice());
                CVector::new(m.ad_mul(&v).data.into())
            }
            Backend::Convolution(c) if c.self_adjoint => CVector::new(c.filter(y.as_slice(), false)),
            Backend::Convolution(c) => CVector::new(c.filter(y.as_slice(), true)),
        })
    }

    /// `T*(T x)`.
    pub fn gram_apply(&self, x: &CVector) -> Result<CVector> {
        let tx = self.apply(x)?;
        self.adjoint_apply(&tx)
    }
}

impl fmt::Debug for LinearOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.backend {
            Backend::Dense(m) => write!(f, "LinearOperator::Dense({}x{})", m.nrows(), m.ncols()),
            Backend::Convolution(c) => write!(f, "LinearOperator::{c:?}"),
        }
    }
}

fn check_dim(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}
