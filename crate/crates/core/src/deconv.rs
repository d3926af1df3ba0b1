//! Deconvolution of a blurred 1-D signal on a periodic grid.
//!
//! The source is a sum of Gaussians, the kernel is `g(x) = exp(−x²)`, and the
//! blurred observation is `y = G f`. Both the plain Landweber iteration and
//! Chebyshev-inertial variants start from `s⁽⁰⁾ = y`; errors are measured in the
//! discretized L² norm `√Δx · ‖s⁽ᵏ⁾ − f‖`.

use std::path::Path;

use rayon::prelude::*;

use crate::csvfmt::num;
use crate::error::{Error, Result};
use crate::operator::{CyclicConvolution, LinearOperator};
use crate::schedule::InertialSchedule;
use crate::solver::{self, SolverConfig};
use crate::spectral::SpectralBounds;
use crate::vector::CVector;

/// Uniform grid on `[lo, hi]` with `bins` cells, sampled at the cell midpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    lo: f64,
    hi: f64,
    bins: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            lo: -8.192,
            hi: 8.192,
            bins: 16384,
        }
    }
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::InvalidArgument(format!("grid needs lo < hi, got [{lo}, {hi}]")));
        }
        if !bins.is_power_of_two() {
            return Err(Error::InvalidArgument(format!("bins must be a power of two, got {bins}")));
        }
        Ok(Self { lo, hi, bins })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn bin_width(&self) -> f64 {
        (self.hi - self.lo) / self.bins as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        self.lo + (i as f64 + 0.5) * self.bin_width()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.bins).map(|i| self.point(i)).collect()
    }

    /// Discretized L² norm `√Δx · ‖v‖`.
    pub fn l2_norm(&self, v: &CVector) -> f64 {
        self.bin_width().sqrt() * v.norm()
    }

    fn sample(&self, f: impl Fn(f64) -> f64) -> CVector {
        CVector::from_real(&self.points().into_iter().map(f).collect::<Vec<_>>())
    }
}

/// f(x) = ½e^{−x²} + e^{−(x−2)²} − e^{−(x−3)²} + ½e^{−(x−4)²}
pub fn source_signal(x: f64) -> f64 {
    0.5 * (-x * x).exp() + (-(x - 2.0).powi(2)).exp() - (-(x - 3.0).powi(2)).exp() + 0.5 * (-(x - 4.0).powi(2)).exp()
}

/// g(x) = e^{−x²}
pub fn gaussian_kernel(x: f64) -> f64 {
    (-x * x).exp()
}

/// Samples of the source `f` and kernel `g` at the grid midpoints.
pub fn synthesize_signals(grid: &GridSpec) -> (CVector, CVector) {
    (grid.sample(source_signal), grid.sample(gaussian_kernel))
}

#[derive(Debug, Clone)]
pub struct DeconvConfig {
    pub grid: GridSpec,
    pub omega: f64,
    pub bounds: SpectralBounds,
    /// One Chebyshev run per period.
    pub periods: Vec<usize>,
    pub iters: usize,
    pub snapshot_every: usize,
    /// Chebyshev period whose iterates are snapshotted next to the plain run.
    pub snapshot_period: usize,
}

impl Default for DeconvConfig {
    fn default() -> Self {
        Self {
            grid: GridSpec::default(),
            omega: 0.3,
            bounds: SpectralBounds::user(0.1, 0.9).expect("valid default bounds"),
            periods: vec![1, 2, 8],
            iters: 200,
            snapshot_every: 30,
            snapshot_period: 8,
        }
    }
}

/// A source/kernel pair on a grid with its blurred observation.
pub struct DeconvProblem {
    pub grid: GridSpec,
    pub source: CVector,
    pub kernel: CVector,
    pub observation: CVector,
    pub operator: LinearOperator,
}

impl DeconvProblem {
    pub fn new(grid: GridSpec, source: impl Fn(f64) -> f64, kernel: impl Fn(f64) -> f64 + Copy) -> Result<Self> {
        let conv = CyclicConvolution::from_fn(grid.bins(), grid.bin_width(), kernel)?;
        let operator = LinearOperator::convolution(conv);
        let source = grid.sample(source);
        let observation = operator.apply(&source)?;
        Ok(Self {
            kernel: grid.sample(kernel),
            grid,
            source,
            observation,
            operator,
        })
    }

    pub fn standard(grid: GridSpec) -> Result<Self> {
        Self::new(grid, source_signal, gaussian_kernel)
    }

    /// Extreme eigenvalues of `ω·G*G`, exact for a circulant operator.
    pub fn check_bounds(&self, omega: f64, bounds: &SpectralBounds) -> BoundsCheck {
        let spectrum = self
            .operator
            .as_convolution()
            .expect("deconvolution operator is a convolution")
            .gram_spectrum();
        let actual_min = omega * spectrum.iter().copied().fold(f64::INFINITY, f64::min);
        let actual_max = omega * spectrum.iter().copied().fold(0.0, f64::max);
        let contained = actual_min >= bounds.l_min() && actual_max <= bounds.l_max();
        if !contained {
            log::info!(
                "spectrum of ω·G*G is [{actual_min:e}, {actual_max}], outside the assumed [{}, {}]",
                bounds.l_min(),
                bounds.l_max()
            );
        }
        BoundsCheck {
            actual_min,
            actual_max,
            contained,
        }
    }

    pub fn run(&self, cfg: &DeconvConfig) -> Result<DeconvResult> {
        if cfg.grid != self.grid {
            return Err(Error::InvalidArgument("config grid differs from problem grid".into()));
        }
        if cfg.snapshot_every == 0 {
            return Err(Error::InvalidArgument("snapshot interval must be positive".into()));
        }
        let mut schedules = vec![(Method::Plain, InertialSchedule::constant(1.0))];
        for &t in &cfg.periods {
            schedules.push((Method::Chebyshev(t), InertialSchedule::chebyshev(&cfg.bounds, t)?));
        }

        let runs = schedules
            .par_iter()
            .map(|(method, schedule)| {
                let snap = match method {
                    Method::Plain => true,
                    Method::Chebyshev(t) => *t == cfg.snapshot_period,
                };
                let mut sc = SolverConfig::new(&self.operator, &self.observation, cfg.omega, schedule)
                    .max_iter(cfg.iters)
                    .reference(&self.source)
                    .record_every(1)
                    .initial(self.observation.clone());
                if snap {
                    sc = sc.snapshot_every(cfg.snapshot_every);
                }
                let out = solver::run(&sc)?;
                let scale = self.grid.bin_width().sqrt();
                let errors = out
                    .history
                    .iter()
                    .map(|h| scale * h.error_norm.expect("reference supplied"))
                    .collect();
                let max_imag = out.snapshots.iter().map(|(_, s)| s.max_imag()).fold(out.final_iterate.max_imag(), f64::max);
                Ok(MethodRun {
                    method: *method,
                    errors,
                    snapshots: out.snapshots,
                    max_imag,
                })
            })
            .collect::<Result<Vec<_>>>()?;

        Ok(DeconvResult { runs })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsCheck {
    pub actual_min: f64,
    pub actual_max: f64,
    pub contained: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Plain,
    Chebyshev(usize),
}

impl Method {
    pub fn label(&self) -> String {
        match self {
            Method::Plain => "plain".into(),
            Method::Chebyshev(t) => format!("cheb_T{t}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MethodRun {
    pub method: Method,
    /// `errors[k] = √Δx·‖s⁽ᵏ⁾ − f‖` for k = 0..=iters.
    pub errors: Vec<f64>,
    pub snapshots: Vec<(usize, CVector)>,
    /// Largest imaginary part seen in the snapshots and the final iterate.
    pub max_imag: f64,
}

impl MethodRun {
    /// First iteration index at which the error is at most `threshold`.
    pub fn first_below(&self, threshold: f64) -> Option<usize> {
        self.errors.iter().position(|&e| e <= threshold)
    }
}

#[derive(Debug, Clone)]
pub struct DeconvResult {
    pub runs: Vec<MethodRun>,
}

impl DeconvResult {
    pub fn get(&self, method: Method) -> Option<&MethodRun> {
        self.runs.iter().find(|r| r.method == method)
    }

    /// `k, error_plain, error_cheb_T…` rows.
    pub fn write_error_curves(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["k".to_string()];
        header.extend(self.runs.iter().map(|r| format!("error_{}", r.method.label())));
        w.write_record(&header)?;
        let len = self.runs.iter().map(|r| r.errors.len()).min().unwrap_or(0);
        for k in 0..len {
            let mut row = vec![k.to_string()];
            row.extend(self.runs.iter().map(|r| num(r.errors[k])));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `x, f, g, y` followed by one column per snapshot, `<method>_k<k>` (real parts).
pub fn write_snapshots(path: &Path, problem: &DeconvProblem, result: &DeconvResult) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = ["x", "f", "g", "y"].iter().map(|s| s.to_string()).collect();
    let mut columns: Vec<&CVector> = Vec::new();
    for run in &result.runs {
        for (k, s) in &run.snapshots {
            header.push(format!("{}_k{k}", run.method.label()));
            columns.push(s);
        }
    }
    w.write_record(&header)?;
    for i in 0..problem.grid.bins() {
        let mut row = vec![
            num(problem.grid.point(i)),
            num(problem.source[i].re),
            num(problem.kernel[i].re),
            num(problem.observation[i].re),
        ];
        row.extend(columns.iter().map(|c| num(c[i].re)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
