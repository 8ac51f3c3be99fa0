//! Delay systems by the method of steps: RK4 marches the uniform grid while
//! a ring buffer of `(state, derivative)` node pairs provides delayed values
//! through cubic Hermite dense output.
//!
//! Before the initial time the history is the initial state held constant.
//! Delayed lookups that fall on a grid node (to a relative 1e-6 of `dt`)
//! return the stored node value without interpolation, so grids with
//! `τ = integer · dt` reproduce node arithmetic bit for bit.

use crate::ode::{GridSpec, OdeError};
use crate::phase::{PendulumState, Trajectory};
use std::collections::VecDeque;
use thiserror::Error;

/// Steps per delay interval required by the method of steps.
pub const MIN_STEPS_PER_DELAY: f64 = 4.0;

#[derive(Debug, Error, PartialEq)]
pub enum DdeError {
    #[error("delay must be positive and finite, got {0}")]
    BadDelay(f64),
    #[error("dt = {dt} must not exceed tau/4 = {max}")]
    StepTooLarge { dt: f64, max: f64 },
    #[error("history lookup at t = {0} is outside the stored window")]
    HistoryRange(f64),
    #[error("level must be positive and finite, got {0}")]
    BadLevel(f64),
    #[error("initial state has {got} components, system needs {want}")]
    Dimension { got: usize, want: usize },
    #[error(transparent)]
    Ode(#[from] OdeError),
}

/// Delay specification. The pre-initial history is always the initial state
/// held constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelaySpec {
    tau: f64,
}

impl DelaySpec {
    pub fn new(tau: f64) -> Result<Self, DdeError> {
        if !tau.is_finite() || tau <= 0.0 {
            return Err(DdeError::BadDelay(tau));
        }
        Ok(Self { tau })
    }

    pub fn tau(self) -> f64 {
        self.tau
    }
}

/// The delayed variants of the two systems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DelayedSystem {
    /// Delay in the third equation: `ẋ3(t) = x1(t-τ) x2(t-τ)`, with
    /// `ẋ1 = x2 x3` and `ẋ2 = -x1 x3` classical. Conserves `(x1²+x2²)/2`.
    EulerTopDelayZ,
    /// Delay in the first equation: `ẋ1(t) = x2(t-τ) x3(t-τ)`, with
    /// `ẋ2 = -x1 x3` and `ẋ3 = x1 x2` classical. Conserves `(x2²+x3²)/2`.
    EulerTopDelayX,
    /// `θ̈(t) + 2·level·sin θ(t-τ) = 0` on the H-family of level surfaces.
    PendulumDelayH { level: f64 },
    /// Same equation tied to the K-family levels.
    PendulumDelayK { level: f64 },
}

impl DelayedSystem {
    pub fn dim(&self) -> usize {
        match self {
            DelayedSystem::EulerTopDelayZ | DelayedSystem::EulerTopDelayX => 3,
            DelayedSystem::PendulumDelayH { .. } | DelayedSystem::PendulumDelayK { .. } => 2,
        }
    }
}

/// Dense solution history over the trailing delay window: node states and
/// derivatives at uniform spacing, cubic Hermite in between, the initial
/// state before `t0`.
#[derive(Debug, Clone)]
pub struct History<const N: usize> {
    t0: f64,
    dt: f64,
    ic: [f64; N],
    first: i64,
    ring: VecDeque<([f64; N], [f64; N])>,
    keep: usize,
}

impl<const N: usize> History<N> {
    pub fn new(t0: f64, dt: f64, tau: f64, ic: [f64; N]) -> Self {
        let keep = (tau / dt).ceil() as usize + 8;
        Self {
            t0,
            dt,
            ic,
            first: 0,
            ring: VecDeque::with_capacity(keep),
            keep,
        }
    }

    /// Append the next node pair, discarding nodes that left the window.
    pub fn push(&mut self, state: [f64; N], deriv: [f64; N]) {
        if self.ring.len() == self.keep {
            self.ring.pop_front();
            self.first += 1;
        }
        self.ring.push_back((state, deriv));
    }

    fn node(&self, j: i64) -> Option<&([f64; N], [f64; N])> {
        if j < self.first {
            return None;
        }
        self.ring.get((j - self.first) as usize)
    }

    /// Value at an arbitrary past time.
    pub fn sample(&self, t: f64) -> Result<[f64; N], DdeError> {
        let rel = (t - self.t0) / self.dt;
        if rel <= 1e-6 {
            return Ok(self.ic);
        }
        let nearest = rel.round();
        if (rel - nearest).abs() <= 1e-6 {
            return self
                .node(nearest as i64)
                .map(|(y, _)| *y)
                .ok_or(DdeError::HistoryRange(t));
        }
        let j0 = rel.floor() as i64;
        let (Some((y0, d0)), Some((y1, d1))) = (self.node(j0), self.node(j0 + 1)) else {
            return Err(DdeError::HistoryRange(t));
        };
        let s = rel - j0 as f64;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        Ok(std::array::from_fn(|i| {
            h00 * y0[i] + h10 * self.dt * d0[i] + h01 * y1[i] + h11 * self.dt * d1[i]
        }))
    }
}

/// Right-hand side of the delayed pendulum: `(θ̇, -2·level·sin θ(t-τ))`.
pub fn delayed_pendulum_rhs(
    t: f64,
    s: PendulumState,
    level: f64,
    d: DelaySpec,
    history: &History<2>,
) -> Result<[f64; 2], DdeError> {
    let past = history.sample(t - d.tau())?;
    Ok([s.omega, -2.0 * level * past[0].sin()])
}

fn check_level(level: f64) -> Result<(), DdeError> {
    if !level.is_finite() || level <= 0.0 {
        Err(DdeError::BadLevel(level))
    } else {
        Ok(())
    }
}

/// Method-of-steps integration over the grid. Requires `dt ≤ τ/4` so every
/// delayed stage lookup lands in already-computed history.
pub fn integrate_dde(
    sys: &DelayedSystem,
    ic: &[f64],
    delay: DelaySpec,
    grid: &GridSpec,
) -> Result<Trajectory, DdeError> {
    let tau = delay.tau();
    let max_dt = tau / MIN_STEPS_PER_DELAY;
    if grid.dt > max_dt {
        return Err(DdeError::StepTooLarge {
            dt: grid.dt,
            max: max_dt,
        });
    }
    let want = sys.dim();
    if ic.len() != want {
        return Err(DdeError::Dimension {
            got: ic.len(),
            want,
        });
    }
    match *sys {
        DelayedSystem::EulerTopDelayZ => run::<3, _>(
            |t, y, hist| {
                let past = hist.sample(t - tau)?;
                Ok([y[1] * y[2], -y[0] * y[2], past[0] * past[1]])
            },
            [ic[0], ic[1], ic[2]],
            tau,
            grid,
        ),
        DelayedSystem::EulerTopDelayX => run::<3, _>(
            |t, y, hist| {
                let past = hist.sample(t - tau)?;
                Ok([past[1] * past[2], -y[0] * y[2], y[0] * y[1]])
            },
            [ic[0], ic[1], ic[2]],
            tau,
            grid,
        ),
        DelayedSystem::PendulumDelayH { level } | DelayedSystem::PendulumDelayK { level } => {
            check_level(level)?;
            run::<2, _>(
                |t, y, hist| {
                    delayed_pendulum_rhs(t, PendulumState::new(y[0], y[1]), level, delay, hist)
                },
                [ic[0], ic[1]],
                tau,
                grid,
            )
        }
    }
}

fn run<const N: usize, R>(
    rhs: R,
    ic: [f64; N],
    tau: f64,
    grid: &GridSpec,
) -> Result<Trajectory, DdeError>
where
    R: Fn(f64, &[f64; N], &History<N>) -> Result<[f64; N], DdeError>,
{
    if ic.iter().any(|v| !v.is_finite()) {
        return Err(OdeError::BadInitial.into());
    }
    let ts = grid.nodes();
    let mut hist = History::<N>::new(grid.t0, grid.dt, tau, ic);
    let mut traj = Trajectory::with_capacity(N, ts.len());
    traj.push(ts[0], &ic).map_err(OdeError::from)?;

    let mut y = ic;
    let mut d = rhs(ts[0], &y, &hist)?;
    hist.push(y, d);

    let axpy = |y: &[f64; N], a: f64, k: &[f64; N]| -> [f64; N] {
        std::array::from_fn(|i| y[i] + a * k[i])
    };

    for w in ts.windows(2) {
        let (t, t_next) = (w[0], w[1]);
        let h = t_next - t;
        let k1 = d;
        let k2 = rhs(t + 0.5 * h, &axpy(&y, 0.5 * h, &k1), &hist)?;
        let k3 = rhs(t + 0.5 * h, &axpy(&y, 0.5 * h, &k2), &hist)?;
        let k4 = rhs(t + h, &axpy(&y, h, &k3), &hist)?;
        let next: [f64; N] =
            std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
        if next.iter().any(|v| !v.is_finite()) {
            return Err(OdeError::NonFinite { t }.into());
        }
        y = next;
        traj.push(t_next, &y).map_err(OdeError::from)?;
        if (h / grid.dt - 1.0).abs() <= 1e-6 {
            // on-grid node: extend the dense history
            d = rhs(t_next, &y, &hist)?;
            hist.push(y, d);
        }
        // a shortened final step only closes the span; nothing samples past it
    }
    Ok(traj)
}
