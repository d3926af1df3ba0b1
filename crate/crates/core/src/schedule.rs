//! Periodic inertial-factor schedules and the Chebyshev convergence bound.
//!
//! The factor used at global iteration `k` is `factors[k mod T]`. Chebyshev
//! factors are `ω_k = 1/(λ₊ + λ₋·cos((2k+1)π/(2T)))`, the reciprocals of the
//! roots of the degree-`T` Chebyshev polynomial shifted onto `[l_min, l_max]`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::spectral::SpectralBounds;

#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleKind {
    Constant,
    Chebyshev(SpectralBounds),
}

/// Order in which the Chebyshev factors of one period are applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FactorOrder {
    #[default]
    Natural,
    Reversed,
}

impl std::str::FromStr for FactorOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "natural" => Ok(Self::Natural),
            "reversed" => Ok(Self::Reversed),
            other => Err(Error::InvalidArgument(format!(
                "unknown factor order '{other}' (expected natural|reversed)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InertialSchedule {
    factors: Vec<f64>,
    kind: ScheduleKind,
}

impl InertialSchedule {
    /// Period-1 schedule. Values outside the SOR range (0, 2) are accepted
    /// with a warning.
    pub fn constant(omega: f64) -> Self {
        if !(omega > 0.0 && omega < 2.0) {
            log::warn!("constant inertial factor {omega} lies outside the SOR range (0, 2)");
        }
        Self {
            factors: vec![omega],
            kind: ScheduleKind::Constant,
        }
    }

    pub fn chebyshev(bounds: &SpectralBounds, period: usize) -> Result<Self> {
        Self::chebyshev_ordered(bounds, period, FactorOrder::Natural)
    }

    pub fn chebyshev_ordered(bounds: &SpectralBounds, period: usize, order: FactorOrder) -> Result<Self> {
        if period == 0 {
            return Err(Error::InvalidArgument("period must be at least 1".into()));
        }
        if !(bounds.l_min() > 0.0) {
            return Err(Error::InvalidArgument("Chebyshev factors need l_min > 0".into()));
        }
        let (plus, minus) = (bounds.half_sum(), bounds.half_diff());
        let t = period as f64;
        let mut factors: Vec<f64> = (0..period)
            .map(|k| {
                // cos(π/2) is not exactly zero in floating point; pin the middle root.
                let angle = (2 * k + 1) as f64 * PI / (2.0 * t);
                let cos = if 2 * k + 1 == period { 0.0 } else { angle.cos() };
                1.0 / (plus + minus * cos)
            })
            .collect();
        if order == FactorOrder::Reversed {
            factors.reverse();
        }
        Ok(Self {
            factors,
            kind: ScheduleKind::Chebyshev(*bounds),
        })
    }

    /// Applies `perm` to the factors within a period (`new[i] = old[perm[i]]`).
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.period()];
        if perm.len() != self.period() || perm.iter().any(|&p| p >= seen.len() || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidArgument("not a permutation of the period".into()));
        }
        Ok(Self {
            factors: perm.iter().map(|&p| self.factors[p]).collect(),
            kind: self.kind.clone(),
        })
    }

    pub fn factor(&self, k: usize) -> f64 {
        self.factors[k % self.factors.len()]
    }

    pub fn factors(&self) -> &[f64] {
        &self.factors
    }

    pub fn period(&self) -> usize {
        self.factors.len()
    }

    pub fn kind(&self) -> &ScheduleKind {
        &self.kind
    }

    pub fn bounds(&self) -> Option<&SpectralBounds> {
        match &self.kind {
            ScheduleKind::Chebyshev(b) => Some(b),
            ScheduleKind::Constant => None,
        }
    }

    /// β(λ) = ∏ (1 − ω_k λ) over one period.
    pub fn polynomial_at(&self, lambda: f64) -> f64 {
        self.factors.iter().map(|w| 1.0 - w * lambda).product()
    }

    /// Largest |β(λ)| over the supplied eigenvalues. Equals the spectral radius of
    /// the one-period error propagator when `eigenvalues` is the full spectrum of `B`.
    pub fn empirical_contraction(&self, eigenvalues: &[f64]) -> Contraction {
        let value = eigenvalues
            .iter()
            .map(|&l| self.polynomial_at(l).abs())
            .fold(0.0, f64::max);
        let outside = match self.bounds() {
            Some(b) => eigenvalues.iter().filter(|&&l| !b.contains(l)).count(),
            None => 0,
        };
        Contraction {
            value,
            eigenvalues_outside_bounds: outside,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contraction {
    pub value: f64,
    /// Eigenvalues outside `[l_min, l_max]`; the U(T) guarantee does not cover them.
    pub eigenvalues_outside_bounds: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceBound {
    pub value: f64,
    /// `l_min == l_max`: the value 0 is the continuous extension.
    pub degenerate: bool,
}

/// U(T) = sech(T·acosh(λ₊/λ₋)).
///
/// Evaluated as `sech(T·ln q)` with `q = (√l_max + √l_min)/(√l_max − √l_min)`,
/// which equals `exp(acosh(λ₊/λ₋))` and keeps precision when `λ₊/λ₋` is close to 1.
pub fn convergence_bound(bounds: &SpectralBounds, period: usize) -> Result<ConvergenceBound> {
    if period == 0 {
        return Err(Error::InvalidArgument("period must be at least 1".into()));
    }
    if bounds.l_min() == bounds.l_max() {
        return Ok(ConvergenceBound {
            value: 0.0,
            degenerate: true,
        });
    }
    let (lo, hi) = (bounds.l_min().sqrt(), bounds.l_max().sqrt());
    let log_q = ((hi + lo) / (hi - lo)).ln();
    Ok(ConvergenceBound {
        value: 1.0 / (period as f64 * log_q).cosh(),
        degenerate: false,
    })
}

/// Largest |β(λ)| over `points` equispaced values spanning `[l_min, l_max]`.
pub fn grid_max_polynomial(schedule: &InertialSchedule, bounds: &SpectralBounds, points: usize) -> f64 {
    let (lo, hi) = (bounds.l_min(), bounds.l_max());
    let last = points.saturating_sub(1).max(1) as f64;
    (0..points.max(1))
        .map(|i| schedule.polynomial_at(lo + (hi - lo) * i as f64 / last).abs())
        .fold(0.0, f64::max)
}

/// Columns: `k, factor, root` where `root = 1/factor`.
pub fn write_schedule(path: &std::path::Path, schedule: &InertialSchedule) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["k", "factor", "root"])?;
    for (k, f) in schedule.factors().iter().enumerate() {
        w.write_record([k.to_string(), crate::csvfmt::num(*f), crate::csvfmt::num(1.0 / f)])?;
    }
    w.flush()?;
    Ok(())
}
