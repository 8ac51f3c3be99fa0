//! Phase-space types, the Euler top and pendulum vector fields, and the
//! conserved functionals of the top.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PhaseError {
    #[error("non-finite state ({0}, {1}, {2})")]
    NonFiniteState(f64, f64, f64),
    #[error("non-finite pendulum state (theta = {0}, omega = {1})")]
    NonFinitePendulum(f64, f64),
    #[error("invalid pendulum parameters: {0}")]
    InvalidParams(String),
    #[error("trajectory times must increase strictly (t[{index}] = {t})")]
    NonMonotonicTime { index: usize, t: f64 },
    #[error("state has {got} components, trajectory stores {want}")]
    DimensionMismatch { got: usize, want: usize },
    #[error("cannot store a non-finite sample at t = {0}")]
    NonFiniteSample(f64),
}

/// Point in the phase space of the free top.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State3 {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

impl State3 {
    pub const fn new(x1: f64, x2: f64, x3: f64) -> Self {
        Self { x1, x2, x3 }
    }

    pub fn is_finite(&self) -> bool {
        self.x1.is_finite() && self.x2.is_finite() && self.x3.is_finite()
    }

    pub const fn to_array(self) -> [f64; 3] {
        [self.x1, self.x2, self.x3]
    }

    pub fn from_slice(s: &[f64]) -> Result<Self, PhaseError> {
        if s.len() != 3 {
            return Err(PhaseError::DimensionMismatch {
                got: s.len(),
                want: 3,
            });
        }
        Ok(Self::new(s[0], s[1], s[2]))
    }
}

/// Pendulum state (angle, angular velocity). The angle is never wrapped;
/// rotations accumulate multiples of 2π.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PendulumState {
    pub theta: f64,
    pub omega: f64,
}

impl PendulumState {
    pub const fn new(theta: f64, omega: f64) -> Self {
        Self { theta, omega }
    }

    pub fn is_finite(&self) -> bool {
        self.theta.is_finite() && self.omega.is_finite()
    }

    pub const fn to_array(self) -> [f64; 2] {
        [self.theta, self.omega]
    }
}

/// Core of the Euler top vector field on raw components:
/// `(x2 x3, -x1 x3, x1 x2)`.
#[inline]
pub fn euler_top_rhs_raw(x: &[f64; 3]) -> [f64; 3] {
    [x[1] * x[2], -x[0] * x[2], x[0] * x[1]]
}

/// Euler top vector field with a domain check on the input state.
pub fn euler_top_rhs(s: State3) -> Result<State3, PhaseError> {
    if !s.is_finite() {
        return Err(PhaseError::NonFiniteState(s.x1, s.x2, s.x3));
    }
    let d = euler_top_rhs_raw(&s.to_array());
    Ok(State3::new(d[0], d[1], d[2]))
}

/// Sinusoidal forcing term `A sin(Ω t + φ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Harmonic {
    pub amplitude: f64,
    pub frequency: f64,
    pub phase: f64,
}

impl Harmonic {
    pub const ZERO: Harmonic = Harmonic {
        amplitude: 0.0,
        frequency: 0.0,
        phase: 0.0,
    };

    pub const fn new(amplitude: f64, frequency: f64, phase: f64) -> Self {
        Self {
            amplitude,
            frequency,
            phase,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        if self.amplitude == 0.0 {
            // keeps the unforced pendulum exact even at huge t
            return 0.0;
        }
        self.amplitude * (self.frequency * t + self.phase).sin()
    }

    pub fn is_zero(&self) -> bool {
        self.amplitude == 0.0
    }
}

/// Parameters of the generalized pendulum
///
/// ```text
/// θ̈ + 2 h sin θ + f1(t) cos θ + f2(t) sin θ + Σ_{p=0}^{N} α_p θ̇ |θ̇|^{p-1} = 0
/// ```
///
/// with harmonic forcings `f1`, `f2` and damping coefficients `alphas[p] = α_p`.
/// The `p = 0` term is dry friction `α_0 sign(θ̇)` with `sign(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PendulumParams {
    pub h: f64,
    pub f1: Harmonic,
    pub f2: Harmonic,
    pub alphas: Vec<f64>,
}

impl PendulumParams {
    pub fn new(h: f64, f1: Harmonic, f2: Harmonic, alphas: Vec<f64>) -> Result<Self, PhaseError> {
        if !h.is_finite() || h < 0.0 {
            return Err(PhaseError::InvalidParams(format!(
                "h must be finite and >= 0, got {h}"
            )));
        }
        if let Some(a) = alphas.iter().find(|a| !a.is_finite()) {
            return Err(PhaseError::InvalidParams(format!(
                "non-finite damping coefficient {a}"
            )));
        }
        Ok(Self { h, f1, f2, alphas })
    }

    /// Unforced, undamped pendulum `θ̈ + 2 h sin θ = 0`.
    pub fn conservative(h: f64) -> Result<Self, PhaseError> {
        Self::new(h, Harmonic::ZERO, Harmonic::ZERO, Vec::new())
    }
}

/// `θ̇ |θ̇|^{p-1}` with the dry-friction convention at `p = 0`.
#[inline]
fn damping_power(omega: f64, p: usize) -> f64 {
    match p {
        0 => {
            if omega > 0.0 {
                1.0
            } else if omega < 0.0 {
                -1.0
            } else {
                0.0
            }
        }
        1 => omega,
        _ => omega * omega.abs().powi(p as i32 - 1),
    }
}

/// Core of the pendulum vector field: `(θ̇, θ̈)` for the equation in
/// [`PendulumParams`].
#[inline]
pub fn pendulum_rhs_raw(t: f64, y: &[f64; 2], p: &PendulumParams) -> [f64; 2] {
    let (theta, omega) = (y[0], y[1]);
    let mut acc =
        -2.0 * p.h * theta.sin() - p.f1.eval(t) * theta.cos() - p.f2.eval(t) * theta.sin();
    for (pw, &a) in p.alphas.iter().enumerate() {
        if a != 0.0 {
            acc -= a * damping_power(omega, pw);
        }
    }
    [omega, acc]
}

/// Pendulum vector field with a domain check on the input state.
pub fn pendulum_rhs(t: f64, s: PendulumState, p: &PendulumParams) -> Result<[f64; 2], PhaseError> {
    if !s.is_finite() {
        return Err(PhaseError::NonFinitePendulum(s.theta, s.omega));
    }
    Ok(pendulum_rhs_raw(t, &s.to_array(), p))
}

/// The six functionals constant along the Euler top flow.
///
/// ```text
/// H1 = (x1² + x2²)/2      C1 = (x2² + x3²)/2
/// H2 = -(x2² + x3²)/2     C2 = (x1² - x3²)/2
/// H3 = x1² - x3²          C3 = x1² + x2²
/// ```
///
/// The families are dependent: `C1 = -H2`, `C2 = H3/2`, `C3 = 2 H1` — each
/// Casimir of one Poisson realization is (up to scale) the Hamiltonian of
/// another.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConservedQuantity {
    H1,
    H2,
    H3,
    C1,
    C2,
    C3,
}

impl ConservedQuantity {
    pub const ALL: [ConservedQuantity; 6] = [
        ConservedQuantity::H1,
        ConservedQuantity::H2,
        ConservedQuantity::H3,
        ConservedQuantity::C1,
        ConservedQuantity::C2,
        ConservedQuantity::C3,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ConservedQuantity::H1 => "H1",
            ConservedQuantity::H2 => "H2",
            ConservedQuantity::H3 => "H3",
            ConservedQuantity::C1 => "C1",
            ConservedQuantity::C2 => "C2",
            ConservedQuantity::C3 => "C3",
        }
    }
}

/// Evaluate a conserved functional at a state.
pub fn conserved(q: ConservedQuantity, s: State3) -> f64 {
    let (x1, x2, x3) = (s.x1, s.x2, s.x3);
    match q {
        ConservedQuantity::H1 => 0.5 * (x1 * x1 + x2 * x2),
        ConservedQuantity::H2 => -0.5 * (x2 * x2 + x3 * x3),
        ConservedQuantity::H3 => x1 * x1 - x3 * x3,
        ConservedQuantity::C1 => 0.5 * (x2 * x2 + x3 * x3),
        ConservedQuantity::C2 => 0.5 * (x1 * x1 - x3 * x3),
        ConservedQuantity::C3 => x1 * x1 + x2 * x2,
    }
}

/// Level constants `(H, K)` of the surfaces `x1² + x2² = 2H` and
/// `x2² + x3² = 2K` through a state.
pub fn level_constants(s: State3) -> (f64, f64) {
    (
        conserved(ConservedQuantity::H1, s),
        conserved(ConservedQuantity::C1, s),
    )
}

/// Sampled solution: strictly increasing times plus a row-major block of
/// states, `dim` components per node.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    dim: usize,
    times: Vec<f64>,
    data: Vec<f64>,
}

impl Trajectory {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "trajectory dimension must be positive");
        Self {
            dim,
            times: Vec::new(),
            data: Vec::new(),
        }
    }

    pub fn with_capacity(dim: usize, nodes: usize) -> Self {
        assert!(dim > 0, "trajectory dimension must be positive");
        Self {
            dim,
            times: Vec::with_capacity(nodes),
            data: Vec::with_capacity(nodes * dim),
        }
    }

    /// Append a sample. Times must increase strictly and every component
    /// must be finite.
    pub fn push(&mut self, t: f64, state: &[f64]) -> Result<(), PhaseError> {
        if state.len() != self.dim {
            return Err(PhaseError::DimensionMismatch {
                got: state.len(),
                want: self.dim,
            });
        }
        if !t.is_finite() || state.iter().any(|x| !x.is_finite()) {
            return Err(PhaseError::NonFiniteSample(t));
        }
        if let Some(&last) = self.times.last() {
            if t <= last {
                return Err(PhaseError::NonMonotonicTime {
                    index: self.times.len(),
                    t,
                });
            }
        }
        self.times.push(t);
        self.data.extend_from_slice(state);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// The full row-major state block, `len() * dim()` values.
    pub fn states_flat(&self) -> &[f64] {
        &self.data
    }

    pub fn time(&self, node: usize) -> f64 {
        self.times[node]
    }

    pub fn state(&self, node: usize) -> &[f64] {
        &self.data[node * self.dim..(node + 1) * self.dim]
    }

    pub fn last_state(&self) -> Option<&[f64]> {
        if self.is_empty() {
            None
        } else {
            Some(self.state(self.len() - 1))
        }
    }

    pub fn state3(&self, node: usize) -> Result<State3, PhaseError> {
        State3::from_slice(self.state(node))
    }

    /// One component across all nodes.
    pub fn component(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        assert!(j < self.dim);
        self.data.iter().skip(j).step_by(self.dim).copied()
    }

    /// Grid spacing if the time grid is uniform to a relative 1e-6.
    pub fn uniform_dt(&self) -> Option<f64> {
        if self.len() < 2 {
            return None;
        }
        let dt = self.times[1] - self.times[0];
        for w in self.times.windows(2) {
            if ((w[1] - w[0]) / dt - 1.0).abs() > 1e-6 {
                return None;
            }
        }
        Some(dt)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rhs_of_sample_state() {
        let d = euler_top_rhs(State3::new(1.0, 2.0, 3.0)).unwrap();
        assert_eq!(d.to_array(), [6.0, -3.0, 2.0]);
    }

    #[test]
    fn axes_x1_and_x3_are_fixed_points() {
        for s in [State3::new(0.7, 0.0, 0.0), State3::new(0.0, 0.0, -1.3)] {
            assert_eq!(euler_top_rhs(s).unwrap().to_array(), [0.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn rhs_rejects_non_finite() {
        let err = euler_top_rhs(State3::new(f64::NAN, 0.0, 0.0)).unwrap_err();
        assert!(matches!(err, PhaseError::NonFiniteState(..)));
    }

    #[test]
    fn conserved_sample_values() {
        let s = State3::new(0.1, 0.1, 0.2);
        assert!((conserved(ConservedQuantity::H1, s) - 0.01).abs() < 1e-15);
        assert!((conserved(ConservedQuantity::C1, s) - 0.025).abs() < 1e-15);
        assert!((conserved(ConservedQuantity::H3, s) + 0.03).abs() < 1e-15);
        let (h, k) = level_constants(s);
        assert!((h - 0.01).abs() < 1e-15 && (k - 0.025).abs() < 1e-15);
    }

    #[test]
    fn casimirs_are_scaled_hamiltonians() {
        let s = State3::new(0.3, -0.4, 0.5);
        assert_eq!(
            conserved(ConservedQuantity::C1, s),
            -conserved(ConservedQuantity::H2, s)
        );
        assert_eq!(
            conserved(ConservedQuantity::C2, s),
            0.5 * conserved(ConservedQuantity::H3, s)
        );
        assert_eq!(
            conserved(ConservedQuantity::C3, s),
            2.0 * conserved(ConservedQuantity::H1, s)
        );
    }

    /// d/dt of each functional along the field, with every monomial formed in
    /// the canonical order (x1*x2)*x3 so the pairwise cancellation is exact in
    /// floating point, not just up to rounding.
    #[allow(clippy::eq_op)] // the equal operands are the property under test
    fn functional_rate_canonical(q: ConservedQuantity, s: State3) -> f64 {
        let m = (s.x1 * s.x2) * s.x3;
        match q {
            // H1: x1(x2 x3) + x2(-x1 x3) = m - m
            ConservedQuantity::H1 => m - m,
            ConservedQuantity::H2 => -(-m + m),
            ConservedQuantity::H3 => 2.0 * m - 2.0 * m,
            ConservedQuantity::C1 => -m + m,
            ConservedQuantity::C2 => m - m,
            ConservedQuantity::C3 => 2.0 * m - 2.0 * m,
        }
    }

    proptest! {
        #[test]
        fn gradients_annihilate_the_field_exactly(
            x1 in -1e100..1e100f64,
            x2 in -1e100..1e100f64,
            x3 in -1e100..1e100f64,
        ) {
            let s = State3::new(x1, x2, x3);
            for q in ConservedQuantity::ALL {
                prop_assert_eq!(functional_rate_canonical(q, s), 0.0);
            }
        }

        #[test]
        fn pendulum_rhs_is_odd_without_forcing(
            theta in -10.0..10.0f64,
            omega in -10.0..10.0f64,
            h in 0.0..5.0f64,
            a1 in 0.0..2.0f64,
        ) {
            let p = PendulumParams::new(h, Harmonic::ZERO, Harmonic::ZERO, vec![0.3, a1, 0.05]).unwrap();
            let d = pendulum_rhs(0.0, PendulumState::new(theta, omega), &p).unwrap();
            let dm = pendulum_rhs(0.0, PendulumState::new(-theta, -omega), &p).unwrap();
            prop_assert_eq!(d[0], -dm[0]);
            prop_assert_eq!(d[1], -dm[1]);
        }
    }

    #[test]
    fn dry_friction_sign_convention() {
        let p = PendulumParams::new(0.0, Harmonic::ZERO, Harmonic::ZERO, vec![0.4]).unwrap();
        let at = |omega: f64| pendulum_rhs(0.0, PendulumState::new(0.0, omega), &p).unwrap()[1];
        assert_eq!(at(2.0), -0.4);
        assert_eq!(at(-2.0), 0.4);
        assert_eq!(at(0.0), 0.0);
    }

    #[test]
    fn quadratic_drag_magnitude() {
        // α_2 θ̇ |θ̇| at θ̇ = -3 contributes +9 α_2
        let p =
            PendulumParams::new(0.0, Harmonic::ZERO, Harmonic::ZERO, vec![0.0, 0.0, 0.5]).unwrap();
        let acc = pendulum_rhs(0.0, PendulumState::new(0.0, -3.0), &p).unwrap()[1];
        assert!((acc - 4.5).abs() < 1e-15);
    }

    #[test]
    fn forcing_terms_enter_with_their_projections() {
        let p = PendulumParams::new(
            0.0,
            Harmonic::new(0.3, 2.0, 0.0),
            Harmonic::new(0.1, 1.0, 0.5),
            Vec::new(),
        )
        .unwrap();
        let t = 0.7;
        let theta = 1.1;
        let acc = pendulum_rhs(t, PendulumState::new(theta, 0.0), &p).unwrap()[1];
        let expect = -0.3 * (2.0 * t).sin() * theta.cos() - 0.1 * (t + 0.5).sin() * theta.sin();
        assert!((acc - expect).abs() < 1e-15);
    }

    #[test]
    fn params_reject_negative_stiffness_and_nan_damping() {
        assert!(PendulumParams::conservative(-1.0).is_err());
        assert!(PendulumParams::new(1.0, Harmonic::ZERO, Harmonic::ZERO, vec![f64::NAN]).is_err());
    }

    #[test]
    fn trajectory_push_guards() {
        let mut tr = Trajectory::new(2);
        tr.push(0.0, &[1.0, 2.0]).unwrap();
        assert!(matches!(
            tr.push(0.0, &[1.0, 2.0]),
            Err(PhaseError::NonMonotonicTime { index: 1, .. })
        ));
        assert!(matches!(
            tr.push(1.0, &[1.0]),
            Err(PhaseError::DimensionMismatch { got: 1, want: 2 })
        ));
        assert!(matches!(
            tr.push(1.0, &[f64::INFINITY, 0.0]),
            Err(PhaseError::NonFiniteSample(_))
        ));
        tr.push(1.0, &[3.0, 4.0]).unwrap();
        assert_eq!(tr.len(), 2);
        assert_eq!(tr.state(1), &[3.0, 4.0]);
        assert_eq!(tr.last_state().unwrap(), &[3.0, 4.0]);
        let xs: Vec<f64> = tr.component(0).collect();
        assert_eq!(xs, vec![1.0, 3.0]);
    }

    #[test]
    fn uniform_grid_detection() {
        let mut tr = Trajectory::new(1);
        for i in 0..5 {
            tr.push(i as f64 * 0.1, &[0.0]).unwrap();
        }
        let dt = tr.uniform_dt().unwrap();
        assert!((dt - 0.1).abs() < 1e-15);
        tr.push(0.45, &[0.0]).unwrap();
        assert!(tr.uniform_dt().is_none());
    }
}
