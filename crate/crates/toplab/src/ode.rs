//! Fixed-step classical RK4 on uniform time grids.
//!
//! Grids run `t0 + i·dt` and always land exactly on `t1`: if the span is not
//! an integer multiple of `dt`, the final step is shortened.

use crate::phase::{
    conserved, euler_top_rhs_raw, pendulum_rhs_raw, ConservedQuantity, PendulumParams, PhaseError,
    Trajectory,
};
use thiserror::Error;

/// Refusal threshold for absurd grids.
pub const MAX_GRID_STEPS: f64 = 1e8;

#[derive(Debug, Error, PartialEq)]
pub enum OdeError {
    #[error("grid requires t1 > t0, got t0 = {0}, t1 = {1}")]
    BadSpan(f64, f64),
    #[error("step size must be positive and finite, got {0}")]
    BadStep(f64),
    #[error("grid would exceed 1e8 steps")]
    TooManySteps,
    #[error("non-finite value produced at t = {t}")]
    NonFinite { t: f64 },
    #[error("initial state is not finite")]
    BadInitial,
    #[error(transparent)]
    Phase(#[from] PhaseError),
}

/// Uniform grid specification over `[t0, t1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub t0: f64,
    pub t1: f64,
    pub dt: f64,
}

impl GridSpec {
    pub fn new(t0: f64, t1: f64, dt: f64) -> Result<Self, OdeError> {
        if !t0.is_finite() || !t1.is_finite() || t1 <= t0 {
            return Err(OdeError::BadSpan(t0, t1));
        }
        if !dt.is_finite() || dt <= 0.0 {
            return Err(OdeError::BadStep(dt));
        }
        if (t1 - t0) / dt > MAX_GRID_STEPS {
            return Err(OdeError::TooManySteps);
        }
        Ok(Self { t0, t1, dt })
    }

    /// Node times. Interior nodes are the exact products `t0 + i·dt`; a node
    /// falling within `dt/2·1e-6` of `t1` is snapped onto `t1` so integer
    /// spans produce exactly `round(span/dt) + 1` nodes.
    pub fn nodes(&self) -> Vec<f64> {
        let approx = ((self.t1 - self.t0) / self.dt).ceil() as usize + 2;
        let mut ts = Vec::with_capacity(approx);
        let mut i = 0u64;
        loop {
            let t = self.t0 + i as f64 * self.dt;
            if t >= self.t1 - 0.5e-6 * self.dt {
                break;
            }
            ts.push(t);
            i += 1;
        }
        ts.push(self.t1);
        ts
    }

    /// Number of steps when the span is an integer multiple of `dt` (to a
    /// relative 1e-6), or `None` for ragged spans.
    pub fn integer_steps(&self) -> Option<usize> {
        let raw = (self.t1 - self.t0) / self.dt;
        let n = raw.round();
        if n >= 1.0 && (raw - n).abs() <= 1e-6 * n.max(1.0) {
            Some(n as usize)
        } else {
            None
        }
    }
}

/// A time-dependent vector field on `R^N`. Implemented by any closure
/// `Fn(f64, &[f64; N]) -> [f64; N]`.
pub trait Field<const N: usize> {
    fn eval(&self, t: f64, y: &[f64; N]) -> [f64; N];
}

impl<F, const N: usize> Field<N> for F
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    fn eval(&self, t: f64, y: &[f64; N]) -> [f64; N] {
        self(t, y)
    }
}

/// The free Euler top as a [`Field`].
pub fn euler_top_field() -> impl Field<3> {
    |_t: f64, y: &[f64; 3]| euler_top_rhs_raw(y)
}

/// A parameterized pendulum as a [`Field`].
pub fn pendulum_field(params: PendulumParams) -> impl Field<2> {
    move |t: f64, y: &[f64; 2]| pendulum_rhs_raw(t, y, &params)
}

#[inline]
fn axpy<const N: usize>(y: &[f64; N], a: f64, k: &[f64; N]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + a * k[i])
}

#[inline]
fn all_finite<const N: usize>(y: &[f64; N]) -> bool {
    y.iter().all(|v| v.is_finite())
}

/// One classical RK4 step of size `h` from `(t, y)`. Errors if any stage
/// leaves the finite range, reporting the step's start time.
pub fn rk4_step<const N: usize>(
    f: &impl Field<N>,
    t: f64,
    y: &[f64; N],
    h: f64,
) -> Result<[f64; N], OdeError> {
    let k1 = f.eval(t, y);
    let k2 = f.eval(t + 0.5 * h, &axpy(y, 0.5 * h, &k1));
    let k3 = f.eval(t + 0.5 * h, &axpy(y, 0.5 * h, &k2));
    let k4 = f.eval(t + h, &axpy(y, h, &k3));
    let next =
        std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
    if all_finite(&next) {
        Ok(next)
    } else {
        Err(OdeError::NonFinite { t })
    }
}

/// Integrate `f` over the grid, recording every node.
pub fn integrate<const N: usize>(
    f: &impl Field<N>,
    y0: [f64; N],
    grid: &GridSpec,
) -> Result<Trajectory, OdeError> {
    if !all_finite(&y0) {
        return Err(OdeError::BadInitial);
    }
    let ts = grid.nodes();
    let mut traj = Trajectory::with_capacity(N, ts.len());
    traj.push(ts[0], &y0)?;
    let mut y = y0;
    for w in ts.windows(2) {
        y = rk4_step(f, w[0], &y, w[1] - w[0])?;
        traj.push(w[1], &y)?;
    }
    Ok(traj)
}

/// Worst absolute drift of a conserved functional along a dim-3 trajectory,
/// relative to its value at the first node.
pub fn conservation_drift(traj: &Trajectory, q: ConservedQuantity) -> Result<f64, OdeError> {
    if traj.dim() != 3 {
        return Err(OdeError::Phase(PhaseError::DimensionMismatch {
            got: traj.dim(),
            want: 3,
        }));
    }
    if traj.is_empty() {
        return Ok(0.0);
    }
    let q0 = conserved(q, traj.state3(0)?);
    let mut worst = 0.0f64;
    for i in 1..traj.len() {
        worst = worst.max((conserved(q, traj.state3(i)?) - q0).abs());
    }
    Ok(worst)
}

/// Convenience: all six functional drifts, in [`ConservedQuantity::ALL`] order.
pub fn all_conservation_drifts(
    traj: &Trajectory,
) -> Result<[(ConservedQuantity, f64); 6], OdeError> {
    let mut out = [(ConservedQuantity::H1, 0.0); 6];
    for (slot, q) in out.iter_mut().zip(ConservedQuantity::ALL) {
        *slot = (q, conservation_drift(traj, q)?);
    }
    Ok(out)
}
