//! Monte Carlo symbol error rate of the MMSE detector and of projected
//! Landweber detectors (constant and Chebyshev schedules) with the soft
//! constellation projection.
//!
//! Trials run in fixed-size batches. After each batch the point stops once
//! every detector has accumulated `min_errors` symbol errors, or when
//! `max_trials` is reached. Batch boundaries do not depend on the thread
//! count, and every trial draws from its own stream of the master seed, so
//! the counts are reproducible bit-for-bit.

use std::fmt;
use std::path::Path;

use rayon::prelude::*;

use super::{hard_decision, mmse_detect, noise_sigma, AlphaSchedule, ChannelInstance, Constellation, SoftProjector};
use crate::csvfmt::num;
use crate::error::{Error, Result};
use crate::operator::LinearOperator;
use crate::schedule::InertialSchedule;
use crate::solver::{self, ProjectionOrder, SolverConfig};
use crate::spectral::{marchenko_pastur_bounds, omega_opt, SpectralBounds};
use crate::vector::CVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Detector {
    Mmse,
    /// Projected Landweber with the constant schedule ω_k = 1.
    Landweber,
    /// Projected Landweber with Chebyshev factors of the given period.
    Chebyshev(usize),
}

impl fmt::Display for Detector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Detector::Mmse => write!(f, "mmse"),
            Detector::Landweber => write!(f, "landweber"),
            Detector::Chebyshev(t) => write!(f, "cheb_T{t}"),
        }
    }
}

/// Step size of the projected detectors, derived from the Marchenko–Pastur bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StepRule {
    /// 2/(l_min + l_max)
    #[default]
    OmegaOpt,
    /// 1/l_max
    InverseLmax,
}

impl StepRule {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::OmegaOpt => "omega-opt",
            Self::InverseLmax => "inverse-lmax",
        }
    }

    pub fn step(self, bounds: &SpectralBounds) -> f64 {
        match self {
            Self::OmegaOpt => omega_opt(bounds),
            Self::InverseLmax => 1.0 / bounds.l_max(),
        }
    }
}

impl std::str::FromStr for StepRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "omega-opt" => Ok(Self::OmegaOpt),
            "inverse-lmax" => Ok(Self::InverseLmax),
            other => Err(Error::InvalidArgument(format!("unknown step rule '{other}' (expected omega-opt|inverse-lmax)"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SerConfig {
    pub n: usize,
    pub snr_db: Vec<f64>,
    pub iters: usize,
    pub periods: Vec<usize>,
    pub min_errors: u64,
    pub max_trials: usize,
    pub batch: usize,
    pub seed: u64,
    /// Lower Marchenko–Pastur edge is floored at `floor_ratio·l_max`.
    pub floor_ratio: f64,
    pub step: StepRule,
    pub alpha: AlphaSchedule,
    pub order: ProjectionOrder,
}

impl Default for SerConfig {
    fn default() -> Self {
        Self {
            n: 32,
            snr_db: vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0],
            iters: 100,
            periods: vec![4, 8, 16],
            min_errors: 100,
            max_trials: 10_000,
            batch: 100,
            seed: 1,
            floor_ratio: 0.1,
            step: StepRule::OmegaOpt,
            alpha: AlphaSchedule::default(),
            order: ProjectionOrder::ProjectThenCombine,
        }
    }
}

impl SerConfig {
    pub fn detectors(&self) -> Vec<Detector> {
        let mut d = vec![Detector::Mmse, Detector::Landweber];
        d.extend(self.periods.iter().map(|&t| Detector::Chebyshev(t)));
        d
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.iters == 0 || self.batch == 0 || self.max_trials == 0 {
            return Err(Error::InvalidArgument("n, iters, batch and max_trials must be positive".into()));
        }
        if self.snr_db.is_empty() || self.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidArgument("SNR grid must be non-empty and finite".into()));
        }
        if self.periods.contains(&0) {
            return Err(Error::InvalidArgument("Chebyshev periods must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SerPoint {
    pub snr_db: f64,
    pub detector: Detector,
    pub errors: u64,
    pub symbols: u64,
    pub trials: u64,
    /// Trials whose iterate became non-finite (counted as all symbols wrong).
    pub diverged: u64,
}

impl SerPoint {
    pub fn ser(&self) -> f64 {
        self.errors as f64 / self.symbols as f64
    }

    /// 95 % Wilson score interval for the symbol error probability.
    pub fn wilson_interval(&self) -> (f64, f64) {
        let z = 1.959963984540054;
        let n = self.symbols as f64;
        let p = self.ser();
        let denom = 1.0 + z * z / n;
        let centre = (p + z * z / (2.0 * n)) / denom;
        let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
        ((centre - half).max(0.0), (centre + half).min(1.0))
    }
}

/// Detector parameters shared by every trial.
struct Detectors {
    constellation: Constellation,
    projector: SoftProjector,
    omega: f64,
    schedules: Vec<(Detector, InertialSchedule)>,
}

impl Detectors {
    fn new(cfg: &SerConfig) -> Result<Self> {
        let constellation = Constellation::psk8();
        let mp = marchenko_pastur_bounds(cfg.n, cfg.n, 1.0, cfg.floor_ratio)?;
        let omega = cfg.step.step(&mp);
        let b_bounds = mp.scaled(omega)?;
        let mut schedules = vec![(Detector::Landweber, InertialSchedule::constant(1.0))];
        for &t in &cfg.periods {
            schedules.push((Detector::Chebyshev(t), InertialSchedule::chebyshev(&b_bounds, t)?));
        }
        log::debug!(
            "SER detectors: l_min {} l_max {} omega {omega}",
            mp.l_min(),
            mp.l_max()
        );
        Ok(Self {
            projector: SoftProjector {
                constellation: constellation.clone(),
                alpha: cfg.alpha,
            },
            constellation,
            omega,
            schedules,
        })
    }
}

/// Per-detector (errors, diverged) for one trial, in `SerConfig::detectors` order.
fn run_trial(cfg: &SerConfig, det: &Detectors, sigma: f64, stream: u64) -> Result<Vec<(u64, u64)>> {
    let inst = ChannelInstance::generate(cfg.n, &det.constellation, sigma, cfg.seed, stream);
    let n = cfg.n as u64;
    let count = |x: &CVector| -> u64 {
        hard_decision(x, &det.constellation)
            .iter()
            .zip(&inst.symbols)
            .filter(|(a, b)| a != b)
            .count() as u64
    };

    let mut out = Vec::with_capacity(det.schedules.len() + 1);
    out.push(match mmse_detect(&inst.h, &inst.y, sigma * sigma) {
        Ok(x) if x.is_finite() => (count(&x), 0),
        _ => (n, 1),
    });

    let op = LinearOperator::dense(inst.h.clone())?;
    for (_, schedule) in &det.schedules {
        let sc = SolverConfig::new(&op, &inst.y, det.omega, schedule)
            .max_iter(cfg.iters)
            .record_every(cfg.iters.max(1))
            .initial(CVector::zeros(cfg.n))
            .projector(&det.projector, cfg.order);
        out.push(match solver::run(&sc) {
            Ok(r) => (count(&r.final_iterate), 0),
            Err(Error::Diverged { .. }) => (n, 1),
            Err(e) => return Err(e),
        });
    }
    Ok(out)
}

/// Stream id of trial `trial` at SNR index `point`.
fn stream_id(point: usize, trial: usize) -> u64 {
    ((point as u64) << 32) | trial as u64
}

pub fn run_ser_sweep(cfg: &SerConfig) -> Result<Vec<SerPoint>> {
    cfg.validate()?;
    let det = Detectors::new(cfg)?;
    let detectors = cfg.detectors();
    let mut points = Vec::new();

    for (pi, &snr) in cfg.snr_db.iter().enumerate() {
        let sigma = noise_sigma(snr);
        let mut errors = vec![0u64; detectors.len()];
        let mut diverged = vec![0u64; detectors.len()];
        let mut trials = 0usize;
        while trials < cfg.max_trials {
            let end = (trials + cfg.batch).min(cfg.max_trials);
            let batch = (trials..end)
                .into_par_iter()
                .map(|t| run_trial(cfg, &det, sigma, stream_id(pi, t)))
                .collect::<Result<Vec<_>>>()?;
            for trial in batch {
                for (i, (e, d)) in trial.into_iter().enumerate() {
                    errors[i] += e;
                    diverged[i] += d;
                }
            }
            trials = end;
            if errors.iter().all(|&e| e >= cfg.min_errors) {
                break;
            }
        }
        log::info!("snr {snr} dB: {trials} trials, errors {errors:?}");
        let symbols = (trials * cfg.n) as u64;
        for (i, &d) in detectors.iter().enumerate() {
            if diverged[i] > 0 {
                log::warn!("{d} diverged in {} trials at {snr} dB", diverged[i]);
            }
            points.push(SerPoint {
                snr_db: snr,
                detector: d,
                errors: errors[i],
                symbols,
                trials: trials as u64,
                diverged: diverged[i],
            });
        }
    }
    Ok(points)
}

/// Columns: `snr_db, detector, errors, symbols, ser, trials, diverged, ci_low, ci_high`.
pub fn write_ser_table(path: &Path, points: &[SerPoint]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["snr_db", "detector", "errors", "symbols", "ser", "trials", "diverged", "ci_low", "ci_high"])?;
    for p in points {
        let (lo, hi) = p.wilson_interval();
        w.write_record([
            num(p.snr_db),
            p.detector.to_string(),
            p.errors.to_string(),
            p.symbols.to_string(),
            num(p.ser()),
            p.trials.to_string(),
            p.diverged.to_string(),
            num(lo),
            num(hi),
        ])?;
    }
    w.flush()?;
    Ok(())
}
