//! Plain, Chebyshev-inertial and projected Landweber iterations.
//!
//! One step of the inertial iteration with factor `ω_k` is
//! `x ← x − ω_k·ω·T*(T x − y)`; the plain iteration is the special case `ω_k = 1`.
//! With a projector, the Landweber output `s = x − ω·T*(T x − y)` is projected
//! element-wise and then combined, `x ← x + ω_k·(P(s) − x)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operator::LinearOperator;
use crate::schedule::InertialSchedule;
use crate::vector::CVector;

/// Element-wise map applied to every entry after a Landweber step. The
/// iteration index lets the map change over the run.
pub trait Projector: Sync {
    fn project(&self, iteration: usize, value: Complex64) -> Complex64;
}

impl<F> Projector for F
where
    F: Fn(usize, Complex64) -> Complex64 + Sync,
{
    fn project(&self, iteration: usize, value: Complex64) -> Complex64 {
        self(iteration, value)
    }
}

/// Where the projection sits relative to the inertial combination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProjectionOrder {
    /// `x ← x + ω_k·(P(x − ω·∇) − x)`.
    #[default]
    ProjectThenCombine,
    /// `x ← P(x − ω_k·ω·∇)`. Non-default, kept for comparison.
    CombineThenProject,
}

impl ProjectionOrder {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::ProjectThenCombine => "project-then-combine",
            Self::CombineThenProject => "combine-then-project",
        }
    }
}

impl std::str::FromStr for ProjectionOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "project-then-combine" => Ok(Self::ProjectThenCombine),
            "combine-then-project" => Ok(Self::CombineThenProject),
            other => Err(Error::InvalidArgument(format!(
                "unknown projection order '{other}' (expected project-then-combine|combine-then-project)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryRecord {
    pub k: usize,
    /// ‖T x⁽ᵏ⁾ − y‖
    pub residual_norm: f64,
    /// ‖x⁽ᵏ⁾ − x_ref‖ when a reference was supplied.
    pub error_norm: Option<f64>,
}

pub struct SolverConfig<'a> {
    pub operator: &'a LinearOperator,
    pub observation: &'a CVector,
    pub omega: f64,
    pub schedule: &'a InertialSchedule,
    pub projector: Option<&'a dyn Projector>,
    pub projection_order: ProjectionOrder,
    pub max_iter: usize,
    pub reference: Option<&'a CVector>,
    /// `None` picks 1 for runs of at most 1000 iterations and 10 otherwise.
    pub record_every: Option<usize>,
    /// Keep a copy of the iterate every this many steps (and at the end).
    pub snapshot_every: Option<usize>,
    /// `None` starts from `y` when `T` maps the space to itself, else from zero.
    pub initial: Option<CVector>,
}

impl<'a> SolverConfig<'a> {
    pub fn new(operator: &'a LinearOperator, observation: &'a CVector, omega: f64, schedule: &'a InertialSchedule) -> Self {
        Self {
            operator,
            observation,
            omega,
            schedule,
            projector: None,
            projection_order: ProjectionOrder::default(),
            max_iter: 100,
            reference: None,
            record_every: None,
            snapshot_every: None,
            initial: None,
        }
    }

    pub fn max_iter(mut self, n: usize) -> Self {
        self.max_iter = n;
        self
    }

    pub fn reference(mut self, x: &'a CVector) -> Self {
        self.reference = Some(x);
        self
    }

    pub fn record_every(mut self, n: usize) -> Self {
        self.record_every = Some(n);
        self
    }

    pub fn snapshot_every(mut self, n: usize) -> Self {
        self.snapshot_every = Some(n);
        self
    }

    pub fn initial(mut self, x: CVector) -> Self {
        self.initial = Some(x);
        self
    }

    pub fn projector(mut self, p: &'a dyn Projector, order: ProjectionOrder) -> Self {
        self.projector = Some(p);
        self.projection_order = order;
        self
    }

    fn resolved_record_every(&self) -> usize {
        self.record_every
            .unwrap_or(if self.max_iter <= 1000 { 1 } else { 10 })
    }

    fn validate(&self) -> Result<()> {
        let op = self.operator;
        dim_check("observation", op.out_dim(), self.observation.dim())?;
        if let Some(r) = self.reference {
            dim_check("reference", op.in_dim(), r.dim())?;
        }
        if let Some(x0) = &self.initial {
            dim_check("initial iterate", op.in_dim(), x0.dim())?;
        }
        if !self.omega.is_finite() {
            return Err(Error::InvalidArgument(format!("step {} is not finite", self.omega)));
        }
        if self.record_every == Some(0) || self.snapshot_every == Some(0) {
            return Err(Error::InvalidArgument("record/snapshot interval must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SolverRun {
    pub final_iterate: CVector,
    pub history: Vec<HistoryRecord>,
    pub snapshots: Vec<(usize, CVector)>,
    pub iterations_done: usize,
}

/// `x − ω·T*(T x − y)`.
pub fn landweber_step(op: &LinearOperator, y: &CVector, x: &CVector, omega: f64) -> Result<CVector> {
    inertial_landweber_step(op, y, x, omega, 1.0)
}

/// `x − ω_k·ω·T*(T x − y)`.
pub fn inertial_landweber_step(op: &LinearOperator, y: &CVector, x: &CVector, omega: f64, factor: f64) -> Result<CVector> {
    dim_check("observation", op.out_dim(), y.dim())?;
    let residual = op.apply(x)?.sub(y);
    let grad = op.adjoint_apply(&residual)?;
    let mut next = x.clone();
    next.axpy(-(factor * omega), &grad);
    Ok(next)
}

pub fn run(config: &SolverConfig<'_>) -> Result<SolverRun> {
    config.validate()?;
    let op = config.operator;
    let y = config.observation;
    let record_every = config.resolved_record_every();

    let mut x = match &config.initial {
        Some(x0) => x0.clone(),
        None if op.in_dim() == op.out_dim() => y.clone(),
        None => CVector::zeros(op.in_dim()),
    };

    let mut history = Vec::with_capacity(config.max_iter / record_every + 2);
    let mut snapshots = Vec::new();

    for k in 0..config.max_iter {
        let residual = op.apply(&x)?.sub(y);
        if !residual.norm().is_finite() {
            return Err(Error::Diverged { iteration: k, history });
        }
        if k % record_every == 0 {
            history.push(record(k, &residual, &x, config.reference));
        }
        if config.snapshot_every.is_some_and(|s| k % s == 0) {
            snapshots.push((k, x.clone()));
        }

        let grad = op.adjoint_apply(&residual)?;
        let factor = config.schedule.factor(k);
        match config.projector {
            None => x.axpy(-(factor * config.omega), &grad),
            Some(p) => match config.projection_order {
                ProjectionOrder::ProjectThenCombine => {
                    let mut s = x.clone();
                    s.axpy(-config.omega, &grad);
                    for (xi, si) in x.as_mut_slice().iter_mut().zip(s.iter()) {
                        *xi += (p.project(k, *si) - *xi) * factor;
                    }
                }
                ProjectionOrder::CombineThenProject => {
                    x.axpy(-(factor * config.omega), &grad);
                    for xi in x.as_mut_slice() {
                        *xi = p.project(k, *xi);
                    }
                }
            },
        }

        if !x.is_finite() {
            return Err(Error::Diverged {
                iteration: k + 1,
                history,
            });
        }
    }

    let k = config.max_iter;
    let residual = op.apply(&x)?.sub(y);
    if history.last().is_none_or(|h| h.k != k) {
        history.push(record(k, &residual, &x, config.reference));
    }
    if config.snapshot_every.is_some() && snapshots.last().is_none_or(|(j, _)| *j != k) {
        snapshots.push((k, x.clone()));
    }

    Ok(SolverRun {
        final_iterate: x,
        history,
        snapshots,
        iterations_done: k,
    })
}

fn record(k: usize, residual: &CVector, x: &CVector, reference: Option<&CVector>) -> HistoryRecord {
    HistoryRecord {
        k,
        residual_norm: residual.norm(),
        error_norm: reference.map(|r| x.distance(r)),
    }
}

fn dim_check(context: &'static str, expected: usize, found: usize) -> Result<()> {
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
