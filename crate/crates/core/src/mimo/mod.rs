//! Square MIMO channel with PSK sources: channel and source sampling, the MMSE
//! baseline, the Gaussian soft projection onto a constellation, and the
//! least-squares and symbol-error-rate experiments built from them.

pub mod lsq;
pub mod ser;

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::solver::Projector;
use crate::spectral::DENSE_LIMIT;
use crate::vector::CVector;

/// Generator for one independent stream of a seeded experiment.
pub fn stream_rng(master_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    points: Vec<Complex64>,
}

impl Constellation {
    pub fn new(points: Vec<Complex64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("constellation needs at least one point".into()));
        }
        Ok(Self { points })
    }

    /// `exp(2πjk/order)`, k = 0..order−1.
    pub fn psk(order: usize) -> Self {
        assert!(order > 0);
        let points = (0..order)
            .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / order as f64))
            .collect();
        Self { points }
    }

    pub fn psk8() -> Self {
        Self::psk(8)
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn order(&self) -> usize {
        self.points.len()
    }

    pub fn max_modulus(&self) -> f64 {
        self.points.iter().map(|p| p.norm()).fold(0.0, f64::max)
    }

    /// Index of the nearest point; near-ties (within 1e-12 relative) go to the lowest index.
    pub fn nearest(&self, r: Complex64) -> usize {
        let mut best = 0;
        let mut best_d = (r - self.points[0]).norm_sqr();
        for (i, p) in self.points.iter().enumerate().skip(1) {
            let d = (r - p).norm_sqr();
            if d < best_d - 1e-12 * best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }

    /// η(r) = Σ p·e^{−|r−p|²/α²} / Σ e^{−|r−p|²/α²}.
    ///
    /// The largest exponent is subtracted before exponentiating.
    pub fn soft_projection(&self, r: Complex64, alpha2: f64) -> Complex64 {
        let mut exps = [0.0f64; 64];
        let exps: &mut [f64] = if self.order() <= exps.len() {
            &mut exps[..self.order()]
        } else {
            return self.soft_projection_alloc(r, alpha2);
        };
        let mut top = f64::NEG_INFINITY;
        for (e, p) in exps.iter_mut().zip(&self.points) {
            *e = -(r - p).norm_sqr() / alpha2;
            top = top.max(*e);
        }
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = 0.0;
        for (e, p) in exps.iter().zip(&self.points) {
            let w = (e - top).exp();
            num += p * w;
            den += w;
        }
        num / den
    }

    fn soft_projection_alloc(&self, r: Complex64, alpha2: f64) -> Complex64 {
        let exps: Vec<f64> = self.points.iter().map(|p| -(r - p).norm_sqr() / alpha2).collect();
        let top = exps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (num, den) = exps
            .iter()
            .zip(&self.points)
            .fold((Complex64::new(0.0, 0.0), 0.0), |(n, d), (e, p)| {
                let w = (e - top).exp();
                (n + p * w, d + w)
            });
        num / den
    }
}

/// Temperature schedule of the soft projection: `early` for k < `switch_at`, then `late`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaSchedule {
    pub early: f64,
    pub late: f64,
    pub switch_at: usize,
}

impl Default for AlphaSchedule {
    fn default() -> Self {
        Self {
            early: 0.5,
            late: 0.25,
            switch_at: 20,
        }
    }
}

impl AlphaSchedule {
    pub fn at(&self, k: usize) -> f64 {
        if k < self.switch_at {
            self.early
        } else {
            self.late
        }
    }
}

/// Element-wise soft projection with an iteration-dependent temperature.
#[derive(Debug, Clone)]
pub struct SoftProjector {
    pub constellation: Constellation,
    pub alpha: AlphaSchedule,
}

impl Projector for SoftProjector {
    fn project(&self, iteration: usize, value: Complex64) -> Complex64 {
        self.constellation.soft_projection(value, self.alpha.at(iteration))
    }
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (0.5 * variance).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// `n × n` matrix with i.i.d. CN(0, 1) entries (real and imaginary parts N(0, ½)).
pub fn sample_channel<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<Complex64> {
    DMatrix::from_fn(n, n, |_, _| complex_normal(rng, 1.0))
}

/// Uniform i.i.d. symbols; returns the point indices and the symbol vector.
pub fn sample_source<R: Rng + ?Sized>(n: usize, constellation: &Constellation, rng: &mut R) -> (Vec<usize>, CVector) {
    let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..constellation.order())).collect();
    let x = CVector::new(idx.iter().map(|&i| constellation.points()[i]).collect());
    (idx, x)
}

/// `σ = √(10^{−snr/10})`.
pub fn noise_sigma(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0).sqrt()
}

/// One draw of `y = Hx + w`, regenerable from its seed and stream.
#[derive(Debug, Clone)]
pub struct ChannelInstance {
    pub h: DMatrix<Complex64>,
    pub symbols: Vec<usize>,
    pub x_true: CVector,
    pub sigma: f64,
    pub y: CVector,
    pub seed: u64,
    pub stream: u64,
}

impl ChannelInstance {
    pub fn generate(n: usize, constellation: &Constellation, sigma: f64, seed: u64, stream: u64) -> Self {
        let mut rng = stream_rng(seed, stream);
        let h = sample_channel(n, &mut rng);
        let (symbols, x_true) = sample_source(n, constellation, &mut rng);
        let hx = &h * DVector::from_column_slice(x_true.as_slice());
        let y = CVector::new(hx.iter().map(|v| v + complex_normal(&mut rng, sigma * sigma)).collect());
        Self {
            h,
            symbols,
            x_true,
            sigma,
            y,
            seed,
            stream,
        }
    }
}

/// `(H^H H + σ² I)^{-1} H^H y` via a Cholesky solve.
pub fn mmse_detect(h: &DMatrix<Complex64>, y: &CVector, sigma2: f64) -> Result<CVector> {
    let n = h.ncols();
    if n > DENSE_LIMIT {
        return Err(Error::TooLarge { dim: n, max: DENSE_LIMIT });
    }
    if y.dim() != h.nrows() {
        return Err(Error::DimensionMismatch {
            context: "mmse observation",
            expected: h.nrows(),
            found: y.dim(),
        });
    }
    let mut gram = h.ad_mul(h);
    for i in 0..n {
        gram[(i, i)] += Complex64::new(sigma2, 0.0);
    }
    let rhs = h.ad_mul(&DVector::from_column_slice(y.as_slice()));
    let chol = gram.cholesky().ok_or(Error::Singular("MMSE normal equations"))?;
    let x = chol.solve(&rhs);
    if x.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::Singular("MMSE normal equations"));
    }
    Ok(CVector::new(x.data.into()))
}

/// Nearest-point symbol index for every entry.
pub fn hard_decision(x: &CVector, constellation: &Constellation) -> Vec<usize> {
    x.iter().map(|&r| constellation.nearest(r)).collect()
}
