//! The bridge between the two phase spaces: a pendulum on level `h` embeds
//! onto a level surface of the top, and a top trajectory restricted to such
//! a surface reads back as a pendulum. Two embeddings are available, one
//! pinned to the `(x1² + x2²)/2` family (`H`), one to `(x2² + x3²)/2` (`K`).
//!
//! On the `H` surface,
//! `x = (√(2h)·cos(θ/2), √(2h)·sin(θ/2), -ω/2)`; on `K`,
//! `x = (-ω/2, √(2k)·sin(θ/2), √(2k)·cos(θ/2))`. Both are exact: pulled
//! back, the top's equations become `θ̇ = ω`, `ω̇ = -2·level·sin θ`.
//!
//! Recovered angles are unwrapped (the half-angle chart repeats every 4π);
//! a jump the unwrapping cannot bridge is reported instead of silently
//! folded.

use crate::phase::{euler_top_rhs_raw, Trajectory};
use thiserror::Error;

/// How far `½·(pair of squares)` may sit from the nominal level before a
/// state no longer counts as "on" the surface.
pub const ON_SURFACE_TOL: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum CorrError {
    #[error("level must be positive and finite, got {0}")]
    BadLevel(f64),
    #[error("trajectory has dimension {got}, expected {want}")]
    Dimension { got: usize, want: usize },
    #[error("node {index} sits off the level surface by {residual:e}")]
    OffSurface { index: usize, residual: f64 },
    #[error("angle moves {delta} rad into node {index}; too coarse to unwrap")]
    AngleJump { index: usize, delta: f64 },
    #[error("need at least {want} nodes, got {got}")]
    TooShort { got: usize, want: usize },
    #[error("need a uniform time grid")]
    NonUniformGrid,
}

/// Which conserved pair pins the embedding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelSurface {
    /// level = `(x1² + x2²)/2`
    H,
    /// level = `(x2² + x3²)/2`
    K,
}

fn check_level(level: f64) -> Result<(), CorrError> {
    if level.is_finite() && level > 0.0 {
        Ok(())
    } else {
        Err(CorrError::BadLevel(level))
    }
}

/// Embed a single pendulum state onto the chosen surface.
pub fn pendulum_embed(
    surface: LevelSurface,
    level: f64,
    theta: f64,
    omega: f64,
) -> Result<[f64; 3], CorrError> {
    check_level(level)?;
    let r = (2.0 * level).sqrt();
    let (s, c) = (theta / 2.0).sin_cos();
    Ok(match surface {
        LevelSurface::H => [r * c, r * s, -omega / 2.0],
        LevelSurface::K => [-omega / 2.0, r * s, r * c],
    })
}

/// Map a sampled pendulum trajectory `(θ, ω)` onto the top's phase space.
pub fn pendulum_to_euler(
    traj: &Trajectory,
    surface: LevelSurface,
    level: f64,
) -> Result<Trajectory, CorrError> {
    if traj.dim() != 2 {
        return Err(CorrError::Dimension {
            got: traj.dim(),
            want: 2,
        });
    }
    check_level(level)?;
    let mut out = Trajectory::with_capacity(3, traj.len());
    for k in 0..traj.len() {
        let s = traj.state(k);
        let x = pendulum_embed(surface, level, s[0], s[1])?;
        out.push(traj.time(k), &x)
            .expect("times were strictly increasing");
    }
    Ok(out)
}

fn surface_residual(surface: LevelSurface, level: f64, x: &[f64]) -> f64 {
    let pair = match surface {
        LevelSurface::H => x[0] * x[0] + x[1] * x[1],
        LevelSurface::K => x[1] * x[1] + x[2] * x[2],
    };
    (0.5 * pair - level).abs()
}

/// Read a top trajectory lying on a level surface back as a pendulum.
///
/// Every node must sit on the surface to within [`ON_SURFACE_TOL`]. The
/// recovered angle is continuous: each node picks the 4π-branch nearest its
/// predecessor, and a residual step of π or more is an [`CorrError::AngleJump`].
pub fn euler_to_pendulum(
    traj: &Trajectory,
    surface: LevelSurface,
    level: f64,
) -> Result<Trajectory, CorrError> {
    if traj.dim() != 3 {
        return Err(CorrError::Dimension {
            got: traj.dim(),
            want: 3,
        });
    }
    check_level(level)?;
    let mut out = Trajectory::with_capacity(2, traj.len());
    let mut prev = 0.0;
    for k in 0..traj.len() {
        let x = traj.state(k);
        let residual = surface_residual(surface, level, x);
        if residual > ON_SURFACE_TOL {
            return Err(CorrError::OffSurface { index: k, residual });
        }
        let (raw, omega) = match surface {
            LevelSurface::H => (2.0 * x[1].atan2(x[0]), -2.0 * x[2]),
            LevelSurface::K => (2.0 * x[1].atan2(x[2]), -2.0 * x[0]),
        };
        let theta = if k == 0 {
            raw
        } else {
            let period = 4.0 * std::f64::consts::PI;
            let branch = raw + period * ((prev - raw) / period).round();
            let delta = branch - prev;
            if delta.abs() >= std::f64::consts::PI {
                return Err(CorrError::AngleJump { index: k, delta });
            }
            branch
        };
        prev = theta;
        out.push(traj.time(k), &[theta, omega])
            .expect("times were strictly increasing");
    }
    Ok(out)
}

/// Worst interior residuals of the pendulum equations along a sampled
/// trajectory, via the 4th-order central first derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PendulumResiduals {
    /// max |dθ/dt - ω|
    pub angle: f64,
    /// max |dω/dt + 2·level·sin θ|
    pub velocity: f64,
}

fn stencil_d1(f: [f64; 5], dt: f64) -> f64 {
    (-f[4] + 8.0 * f[3] - 8.0 * f[1] + f[0]) / (12.0 * dt)
}

fn require_stencil_grid(traj: &Trajectory) -> Result<f64, CorrError> {
    if traj.len() < 5 {
        return Err(CorrError::TooShort {
            got: traj.len(),
            want: 5,
        });
    }
    traj.uniform_dt().ok_or(CorrError::NonUniformGrid)
}

pub fn residual_report(traj: &Trajectory, level: f64) -> Result<PendulumResiduals, CorrError> {
    if traj.dim() != 2 {
        return Err(CorrError::Dimension {
            got: traj.dim(),
            want: 2,
        });
    }
    check_level(level)?;
    let dt = require_stencil_grid(traj)?;
    let mut angle = 0.0f64;
    let mut velocity = 0.0f64;
    for k in 2..traj.len() - 2 {
        let window: Vec<&[f64]> = (k - 2..=k + 2).map(|i| traj.state(i)).collect();
        let d_theta = stencil_d1(
            [
                window[0][0],
                window[1][0],
                window[2][0],
                window[3][0],
                window[4][0],
            ],
            dt,
        );
        let d_omega = stencil_d1(
            [
                window[0][1],
                window[1][1],
                window[2][1],
                window[3][1],
                window[4][1],
            ],
            dt,
        );
        angle = angle.max((d_theta - window[2][1]).abs());
        velocity = velocity.max((d_omega + 2.0 * level * window[2][0].sin()).abs());
    }
    Ok(PendulumResiduals { angle, velocity })
}

/// Worst interior residual of the top's equations (all components) along a
/// sampled 3-d trajectory.
pub fn top_residual_report(traj: &Trajectory) -> Result<f64, CorrError> {
    if traj.dim() != 3 {
        return Err(CorrError::Dimension {
            got: traj.dim(),
            want: 3,
        });
    }
    let dt = require_stencil_grid(traj)?;
    let mut worst = 0.0f64;
    for k in 2..traj.len() - 2 {
        let x = traj.state(k);
        let f = euler_top_rhs_raw(&[x[0], x[1], x[2]]);
        for c in 0..3 {
            let d = stencil_d1(
                [
                    traj.state(k - 2)[c],
                    traj.state(k - 1)[c],
                    traj.state(k)[c],
                    traj.state(k + 1)[c],
                    traj.state(k + 2)[c],
                ],
                dt,
            );
            worst = worst.max((d - f[c]).abs());
        }
    }
    Ok(worst)
}
