//! Closed-form solutions: the sech/tanh heteroclinic pair of the top, the
//! Jacobi-elliptic orbit between level surfaces, and the libration pendulum.

use crate::elliptic::{complete_k, jacobi_sn_cn_dn, EllipticError, Modulus};
use crate::phase::{euler_top_rhs_raw, PendulumState, State3};
use std::f64::consts::SQRT_2;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum AnalyticError {
    #[error("signs must be +1 or -1, got ({0}, {1}, {2})")]
    SignValue(i8, i8, i8),
    #[error("sign pattern ({0}, {1}, {2}) does not solve the top equations")]
    InvalidSignPattern(i8, i8, i8),
    #[error("level must be positive and finite, got {0}")]
    BadLevel(f64),
    #[error("levels must satisfy 0 < H < K, got H = {0}, K = {1}")]
    LevelOrder(f64, f64),
    #[error("initial angle must lie in (0, pi), got {0}")]
    AngleRange(f64),
    #[error(transparent)]
    Elliptic(#[from] EllipticError),
}

/// Signs `(s1, s2, s3)` attached to the sech/tanh ansatz. Construction
/// evaluates the equations of motion and rejects any pattern that leaves a
/// residual, so a value of this type always denotes an actual orbit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SignPattern {
    s1: i8,
    s2: i8,
    s3: i8,
}

impl SignPattern {
    pub fn new(s1: i8, s2: i8, s3: i8) -> Result<Self, AnalyticError> {
        if ![s1, s2, s3].iter().all(|s| s.abs() == 1) {
            return Err(AnalyticError::SignValue(s1, s2, s3));
        }
        let cand = Self { s1, s2, s3 };
        let worst = [-1.3, -0.4, 0.35, 1.2]
            .iter()
            .map(|&t| cand.residual_at(1.0, t))
            .fold(0.0f64, f64::max);
        if worst < 1e-9 {
            Ok(cand)
        } else {
            Err(AnalyticError::InvalidSignPattern(s1, s2, s3))
        }
    }

    /// The four orbits, in lexicographic sign order.
    pub fn all_valid() -> Vec<SignPattern> {
        let mut out = Vec::new();
        for &s1 in &[-1i8, 1] {
            for &s2 in &[-1i8, 1] {
                for &s3 in &[-1i8, 1] {
                    if let Ok(p) = SignPattern::new(s1, s2, s3) {
                        out.push(p);
                    }
                }
            }
        }
        out
    }

    pub fn signs(self) -> (i8, i8, i8) {
        (self.s1, self.s2, self.s3)
    }

    /// Max component of `ẋ - f(x)` for the ansatz at level `h` and time `t`,
    /// using the closed-form derivative of sech/tanh.
    fn residual_at(self, h: f64, t: f64) -> f64 {
        let a = h * SQRT_2;
        let sech = 1.0 / (a * t).cosh();
        let tanh = (a * t).tanh();
        let x = [
            self.s1 as f64 * a * sech,
            self.s2 as f64 * a * tanh,
            self.s3 as f64 * a * sech,
        ];
        let xdot = [
            -self.s1 as f64 * a * a * sech * tanh,
            self.s2 as f64 * a * a * sech * sech,
            -self.s3 as f64 * a * a * sech * tanh,
        ];
        let f = euler_top_rhs_raw(&x);
        (0..3).map(|i| (xdot[i] - f[i]).abs()).fold(0.0, f64::max)
    }
}

fn check_level(h: f64) -> Result<(), AnalyticError> {
    if !h.is_finite() || h <= 0.0 {
        Err(AnalyticError::BadLevel(h))
    } else {
        Ok(())
    }
}

/// Heteroclinic connection on the coincident level `H = K`:
///
/// ```text
/// x(t) = (s1 a sech(at), s2 a tanh(at), s3 a sech(at)),   a = h√2
/// ```
///
/// joining the saddle equilibria `(0, ∓a, 0)` as `t → ∓∞`.
pub fn heteroclinic(h: f64, t: f64, pattern: SignPattern) -> Result<State3, AnalyticError> {
    check_level(h)?;
    let a = h * SQRT_2;
    let sech = 1.0 / (a * t).cosh();
    let tanh = (a * t).tanh();
    Ok(State3::new(
        pattern.s1 as f64 * a * sech,
        pattern.s2 as f64 * a * tanh,
        pattern.s3 as f64 * a * sech,
    ))
}

/// Periodic orbit through `(h√2, 0, k√2)` for `0 < h < k`:
///
/// ```text
/// x(t) = (h√2 cn(λt; m), -h√2 sn(λt; m), k√2 dn(λt; m)),
/// λ = k√2,  m = h/k.
/// ```
///
/// The frequency and modulus follow from the separated form
/// `ẋ2² = (2h² - x2²)(2k² - x2²)` of the x2 equation.
pub fn jacobi_orbit(h: f64, k: f64, t: f64) -> Result<State3, AnalyticError> {
    check_level(h)?;
    check_level(k)?;
    if h >= k {
        return Err(AnalyticError::LevelOrder(h, k));
    }
    let m = Modulus::new(h / k).expect("0 < h/k < 1");
    let j = jacobi_sn_cn_dn(k * SQRT_2 * t, m);
    Ok(State3::new(
        h * SQRT_2 * j.cn,
        -h * SQRT_2 * j.sn,
        k * SQRT_2 * j.dn,
    ))
}

/// Periods of the [`jacobi_orbit`] components: x1 and x2 share the full
/// period `4K(m)/λ`, x3 oscillates at `2K(m)/λ`.
pub fn jacobi_orbit_periods(h: f64, k: f64) -> Result<(f64, f64), AnalyticError> {
    check_level(h)?;
    check_level(k)?;
    if h >= k {
        return Err(AnalyticError::LevelOrder(h, k));
    }
    let kk = complete_k(Modulus::new(h / k).expect("0 < h/k < 1"))?;
    let lambda = k * SQRT_2;
    Ok((4.0 * kk / lambda, 2.0 * kk / lambda))
}

/// Libration of `θ̈ + 2h sin θ = 0` released from rest at `θ0 ∈ (0, π)`:
///
/// ```text
/// θ(t) = 2 arcsin(m sn(K(m) - ω0 t; m)),  m = sin(θ0/2),  ω0 = √(2h),
/// ```
///
/// with `θ(0) = θ0` and `θ̇(0) = 0`.
pub fn pendulum_analytic(theta0: f64, h: f64, t: f64) -> Result<PendulumState, AnalyticError> {
    check_level(h)?;
    if !(theta0.is_finite() && theta0 > 0.0 && theta0 < std::f64::consts::PI) {
        return Err(AnalyticError::AngleRange(theta0));
    }
    let m = Modulus::new((0.5 * theta0).sin()).expect("sin(theta0/2) in (0,1)");
    let kk = complete_k(m)?;
    let omega0 = (2.0 * h).sqrt();
    let j = jacobi_sn_cn_dn(kk - omega0 * t, m);
    let theta = 2.0 * (m.get() * j.sn).asin();
    let omega = -2.0 * m.get() * omega0 * j.cn;
    Ok(PendulumState::new(theta, omega))
}

/// Libration period `4 K(sin(θ0/2)) / √(2h)`.
pub fn pendulum_analytic_period(theta0: f64, h: f64) -> Result<f64, AnalyticError> {
    check_level(h)?;
    if !(theta0.is_finite() && theta0 > 0.0 && theta0 < std::f64::consts::PI) {
        return Err(AnalyticError::AngleRange(theta0));
    }
    let kk = complete_k(Modulus::new((0.5 * theta0).sin()).expect("modulus in (0,1)"))?;
    Ok(4.0 * kk / (2.0 * h).sqrt())
}
