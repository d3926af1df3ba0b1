//! Convergence of plain and Chebyshev Landweber on the MIMO least-squares
//! problem `min ½‖y − Hx‖²`.
//!
//! Every trial draws a fresh CN(0, 1) channel, 8-PSK source and CN(0, σ²)
//! noise. The plain iteration uses `ω_opt = 2/(λ_min + λ_max)` of `H^H H`;
//! the Chebyshev runs use the exact extreme eigenvalues of `ω_opt·H^H H`.

use std::path::Path;

use rayon::prelude::*;

use super::{ChannelInstance, Constellation};
use crate::csvfmt::num;
use crate::error::{Error, Result};
use crate::operator::LinearOperator;
use crate::schedule::{convergence_bound, InertialSchedule};
use crate::solver::{self, SolverConfig};
use crate::spectral::{gram_eigenvalues, BoundsSource, SpectralBounds};
use crate::vector::CVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitialIterate {
    #[default]
    Zero,
    /// Start at the transmitted symbols.
    Truth,
}

impl std::str::FromStr for InitialIterate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" => Ok(Self::Zero),
            "truth" => Ok(Self::Truth),
            other => Err(Error::InvalidArgument(format!("unknown initial iterate '{other}' (expected zero|truth)"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LsqConfig {
    pub n: usize,
    pub sigma: f64,
    pub trials: usize,
    pub iters: usize,
    pub periods: Vec<usize>,
    /// Periods for the ρ(A) vs U(T) table.
    pub rate_periods: Vec<usize>,
    pub seed: u64,
    pub init: InitialIterate,
    pub record_every: Option<usize>,
}

impl Default for LsqConfig {
    fn default() -> Self {
        Self {
            n: 32,
            sigma: 1e-4,
            trials: 100,
            iters: 50,
            periods: vec![2, 8],
            rate_periods: (1..=16).collect(),
            seed: 1,
            init: InitialIterate::Zero,
            record_every: None,
        }
    }
}

/// Per-trial rates: ρ(A) of the plain iteration and U(T) for each rate period.
#[derive(Debug, Clone)]
pub struct TrialRates {
    pub rho: f64,
    pub u: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct LsqResult {
    pub ks: Vec<usize>,
    /// Trial-averaged ‖s⁽ᵏ⁾ − x‖² for the plain run.
    pub plain: Vec<f64>,
    /// Same for each Chebyshev period, in `periods` order.
    pub chebyshev: Vec<(usize, Vec<f64>)>,
    pub rates: Vec<TrialRates>,
    pub rate_periods: Vec<usize>,
    pub periods: Vec<usize>,
}

struct TrialOutput {
    plain: Vec<f64>,
    chebyshev: Vec<Vec<f64>>,
    rates: TrialRates,
}

fn squared_errors(run: &solver::SolverRun) -> Vec<f64> {
    run.history
        .iter()
        .map(|h| h.error_norm.expect("reference supplied").powi(2))
        .collect()
}

fn run_trial(cfg: &LsqConfig, constellation: &Constellation, trial: usize) -> Result<(Vec<usize>, TrialOutput)> {
    let inst = ChannelInstance::generate(cfg.n, constellation, cfg.sigma, cfg.seed, trial as u64);
    let eig = gram_eigenvalues(&inst.h)?;
    let (lo, hi) = (eig[0], eig[eig.len() - 1]);
    let omega = 2.0 / (lo + hi);
    let bounds = SpectralBounds::with_floor(omega * lo, omega * hi, f64::EPSILON, BoundsSource::Exact)?;
    let rho = eig.iter().map(|l| (1.0 - omega * l).abs()).fold(0.0, f64::max);

    let op = LinearOperator::dense(inst.h.clone())?;
    let initial = match cfg.init {
        InitialIterate::Zero => CVector::zeros(cfg.n),
        InitialIterate::Truth => inst.x_true.clone(),
    };
    let go = |schedule: &InertialSchedule| {
        let mut sc = SolverConfig::new(&op, &inst.y, omega, schedule)
            .max_iter(cfg.iters)
            .reference(&inst.x_true)
            .initial(initial.clone());
        sc.record_every = cfg.record_every;
        solver::run(&sc)
    };

    let plain_run = go(&InertialSchedule::constant(1.0))?;
    let ks = plain_run.history.iter().map(|h| h.k).collect();
    let plain = squared_errors(&plain_run);
    let chebyshev = cfg
        .periods
        .iter()
        .map(|&t| Ok(squared_errors(&go(&InertialSchedule::chebyshev(&bounds, t)?)?)))
        .collect::<Result<Vec<_>>>()?;
    let u = cfg
        .rate_periods
        .iter()
        .map(|&t| Ok(convergence_bound(&bounds, t)?.value))
        .collect::<Result<Vec<_>>>()?;

    Ok((
        ks,
        TrialOutput {
            plain,
            chebyshev,
            rates: TrialRates { rho, u },
        },
    ))
}

pub fn run_lsq_convergence(cfg: &LsqConfig) -> Result<LsqResult> {
    if cfg.n == 0 || cfg.trials == 0 {
        return Err(Error::InvalidArgument("n and trials must be positive".into()));
    }
    if !(cfg.sigma >= 0.0 && cfg.sigma.is_finite()) {
        return Err(Error::InvalidArgument(format!("sigma must be non-negative, got {}", cfg.sigma)));
    }
    let constellation = Constellation::psk8();
    // collect() keeps trial order, so the sums below do not depend on scheduling
    let outputs = (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(cfg, &constellation, t))
        .collect::<Result<Vec<_>>>()?;

    let ks = outputs[0].0.clone();
    let scale = 1.0 / cfg.trials as f64;
    let mean = |pick: &dyn Fn(&TrialOutput) -> &Vec<f64>| -> Vec<f64> {
        let mut acc = vec![0.0; ks.len()];
        for (_, out) in &outputs {
            for (a, v) in acc.iter_mut().zip(pick(out)) {
                *a += v;
            }
        }
        acc.iter().map(|a| a * scale).collect()
    };

    let plain = mean(&|o| &o.plain);
    let chebyshev = cfg
        .periods
        .iter()
        .enumerate()
        .map(|(i, &t)| (t, mean(&|o| &o.chebyshev[i])))
        .collect();

    Ok(LsqResult {
        plain,
        chebyshev,
        rates: outputs.into_iter().map(|(_, o)| o.rates).collect(),
        ks,
        rate_periods: cfg.rate_periods.clone(),
        periods: cfg.periods.clone(),
    })
}

impl LsqResult {
    pub fn mean_rho(&self) -> f64 {
        self.rates.iter().map(|r| r.rho).sum::<f64>() / self.rates.len() as f64
    }

    pub fn mean_u(&self, period: usize) -> Option<f64> {
        let i = self.rate_periods.iter().position(|&t| t == period)?;
        Some(self.rates.iter().map(|r| r.u[i]).sum::<f64>() / self.rates.len() as f64)
    }

    /// Number of trials with U(T) ≥ ρ(A), per rate period. At T = 1 the two coincide
    /// up to rounding.
    pub fn rate_violations(&self) -> Vec<(usize, usize)> {
        self.rate_periods
            .iter()
            .enumerate()
            .map(|(i, &t)| (t, self.rates.iter().filter(|r| r.u[i] >= r.rho).count()))
            .collect()
    }

    /// Trial-mean of `rate^k` for a per-trial rate.
    fn mean_power(&self, rate: impl Fn(&TrialRates) -> f64, exponent: f64) -> f64 {
        self.rates.iter().map(|r| rate(r).powf(exponent)).sum::<f64>() / self.rates.len() as f64
    }

    /// Columns: `k`, `mean_sq_err_plain`, `mean_sq_err_cheb_T…`, `rho_pow_k`, then for each
    /// Chebyshev period `U<T>_pow_k` (raw index) and `U<T>_pow_k_over_T` (end-of-period index).
    pub fn write_curves(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["k".to_string(), "mean_sq_err_plain".to_string()];
        header.extend(self.chebyshev.iter().map(|(t, _)| format!("mean_sq_err_cheb_T{t}")));
        header.push("rho_pow_k".into());
        for &t in &self.periods {
            header.push(format!("U{t}_pow_k"));
            header.push(format!("U{t}_pow_k_over_T"));
        }
        w.write_record(&header)?;

        let u_index: Vec<Option<usize>> = self
            .periods
            .iter()
            .map(|t| self.rate_periods.iter().position(|r| r == t))
            .collect();
        for (i, &k) in self.ks.iter().enumerate() {
            let kf = k as f64;
            let mut row = vec![k.to_string(), num(self.plain[i])];
            row.extend(self.chebyshev.iter().map(|(_, c)| num(c[i])));
            row.push(num(self.mean_power(|r| r.rho, kf)));
            for (&t, idx) in self.periods.iter().zip(&u_index) {
                match idx {
                    Some(j) => {
                        row.push(num(self.mean_power(|r| r.u[*j], kf)));
                        row.push(num(self.mean_power(|r| r.u[*j], kf / t as f64)));
                    }
                    None => {
                        row.push(String::new());
                        row.push(String::new());
                    }
                }
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Columns: `T, rho_a, u_t, violations` (trial means; violations counts U(T) ≥ ρ(A)).
    pub fn write_rates(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["T", "rho_a", "u_t", "violations"])?;
        let rho = self.mean_rho();
        for (t, violations) in self.rate_violations() {
            w.write_record([
                t.to_string(),
                num(rho),
                num(self.mean_u(t).expect("period present")),
                violations.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
