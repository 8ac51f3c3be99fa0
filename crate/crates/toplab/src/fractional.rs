//! Caputo fractional systems via the Adams-Bashforth-Moulton predictor-
//! corrector: product-rectangle predictor, product-trapezoid corrector, one
//! corrector pass, full memory.
//!
//! Mixed-order systems advance all components in one sweep per step; each
//! component applies the weights of its own order. Orders 1 and 2 take an
//! O(1)-per-step path through running sums (the scheme then reduces to the
//! classical trapezoid PECE); genuine fractional orders use precomputed
//! kernel tables, O(n) per step. History sums always accumulate in
//! ascending node order so results are independent of anything but the
//! grid.

use crate::ode::GridSpec;
use crate::phase::Trajectory;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FracError {
    #[error("fractional order must lie in (0, 1], got {0}")]
    OrderRange(f64),
    #[error("weights are defined for orders in (0, 2], got {0}")]
    WeightOrderRange(f64),
    #[error("weights need at least one step")]
    BadCount,
    #[error("step size must be positive and finite, got {0}")]
    BadStep(f64),
    #[error(
        "memory kernels need an integer number of uniform steps, got span {span} over dt {dt}"
    )]
    RaggedGrid { span: f64, dt: f64 },
    #[error("level must be positive and finite, got {0}")]
    BadLevel(f64),
    #[error("initial state has {got} components, system needs {want}")]
    Dimension { got: usize, want: usize },
    #[error("initial state is not finite")]
    BadInitial,
    #[error("non-finite value produced at t = {t}")]
    NonFinite { t: f64 },
}

/// Caputo order, validated to lie in `(0, 1]`. The pendulum equation runs at
/// order `α + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionalOrder(f64);

impl FractionalOrder {
    pub fn new(alpha: f64) -> Result<Self, FracError> {
        if alpha.is_finite() && alpha > 0.0 && alpha <= 1.0 {
            Ok(Self(alpha))
        } else {
            Err(FracError::OrderRange(alpha))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// The fractional variants: one component of the top turned Caputo, or the
/// pendulum at order `α + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MixedOrderSystem {
    /// `ẋ1 = x2 x3`, `ẋ2 = -x1 x3`, `D^α x3 = x1 x2`. Conserves `(x1²+x2²)/2`.
    EulerTopFracZ,
    /// `D^α x1 = x2 x3`, `ẋ2 = -x1 x3`, `ẋ3 = x1 x2`. Conserves `(x2²+x3²)/2`.
    EulerTopFracX,
    /// `D^(α+1) θ = -2·level·sin θ` on the H-family of levels. The state is
    /// `(θ, ω)`; ω is advanced as a companion order-α equation over the same
    /// force history, so `ω = θ̇` holds in the continuum limit.
    PendulumFracH { level: f64 },
    /// Same equation tied to the K-family levels.
    PendulumFracK { level: f64 },
}

impl MixedOrderSystem {
    pub fn dim(&self) -> usize {
        match self {
            MixedOrderSystem::EulerTopFracZ | MixedOrderSystem::EulerTopFracX => 3,
            MixedOrderSystem::PendulumFracH { .. } | MixedOrderSystem::PendulumFracK { .. } => 2,
        }
    }
}

fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// Predictor kernel `m^β - (m-1)^β`.
fn pred_kernel(beta: f64, m: f64) -> f64 {
    m.powf(beta) - (m - 1.0).powf(beta)
}

/// Interior corrector kernel `(m+1)^{β+1} + (m-1)^{β+1} - 2 m^{β+1}`.
fn corr_kernel(beta: f64, m: f64) -> f64 {
    let p = beta + 1.0;
    (m + 1.0).powf(p) + (m - 1.0).powf(p) - 2.0 * m.powf(p)
}

/// Leading corrector coefficient `(n-1)^{β+1} - (n-1-β) n^β`.
fn corr_first(beta: f64, n: f64) -> f64 {
    (n - 1.0).powf(beta + 1.0) - (n - 1.0 - beta) * n.powf(beta)
}

/// Quadrature weights for the step onto node `n` of a uniform grid.
///
/// Returns `(b, a)`: `b[j]` multiplies `f(t_j)` in the predictor
/// (`j = 0..n-1`), `a[j]` multiplies `f(t_j)` in the corrector with `a[n]`
/// the implicit weight on the predicted node. Valid for orders in `(0, 2]`;
/// at order 1 the corrector row is exactly the trapezoid rule.
pub fn abm_weights(order: f64, dt: f64, n: usize) -> Result<(Vec<f64>, Vec<f64>), FracError> {
    if !(order.is_finite() && order > 0.0 && order <= 2.0) {
        return Err(FracError::WeightOrderRange(order));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(FracError::BadStep(dt));
    }
    if n == 0 {
        return Err(FracError::BadCount);
    }
    let cb = dt.powf(order) / gamma(order + 1.0);
    let cc = dt.powf(order) / gamma(order + 2.0);
    let nf = n as f64;
    let b: Vec<f64> = (0..n)
        .map(|j| cb * pred_kernel(order, nf - j as f64))
        .collect();
    let mut a = Vec::with_capacity(n + 1);
    a.push(cc * corr_first(order, nf));
    for j in 1..n {
        a.push(cc * corr_kernel(order, nf - j as f64));
    }
    a.push(cc);
    Ok((b, a))
}

/// One scalar equation of a mixed-order system.
#[derive(Debug, Clone, Copy)]
struct FracEq {
    order: f64,
    y0: f64,
    /// initial derivative, used only when `order > 1`
    dy0: f64,
}

enum OrderPath {
    One,
    Two,
    General { kernel: usize },
}

struct Kernel {
    pred: Vec<f64>,
    corr: Vec<f64>,
}

/// Integrate a fractional variant over the grid. The span must be an integer
/// multiple of `dt` (to a relative 1e-6) because the memory weights live on
/// a strictly uniform grid.
pub fn integrate_fractional(
    sys: &MixedOrderSystem,
    ic: &[f64],
    alpha: FractionalOrder,
    grid: &GridSpec,
) -> Result<Trajectory, FracError> {
    let want = sys.dim();
    if ic.len() != want {
        return Err(FracError::Dimension {
            got: ic.len(),
            want,
        });
    }
    if ic.iter().any(|v| !v.is_finite()) {
        return Err(FracError::BadInitial);
    }
    let n_steps = grid.integer_steps().ok_or(FracError::RaggedGrid {
        span: grid.t1 - grid.t0,
        dt: grid.dt,
    })?;
    let a = alpha.get();
    match *sys {
        MixedOrderSystem::EulerTopFracZ => solve(
            &[
                FracEq {
                    order: 1.0,
                    y0: ic[0],
                    dy0: 0.0,
                },
                FracEq {
                    order: 1.0,
                    y0: ic[1],
                    dy0: 0.0,
                },
                FracEq {
                    order: a,
                    y0: ic[2],
                    dy0: 0.0,
                },
            ],
            |_t, y: &[f64], f: &mut [f64]| {
                f[0] = y[1] * y[2];
                f[1] = -y[0] * y[2];
                f[2] = y[0] * y[1];
            },
            grid,
            n_steps,
        ),
        MixedOrderSystem::EulerTopFracX => solve(
            &[
                FracEq {
                    order: a,
                    y0: ic[0],
                    dy0: 0.0,
                },
                FracEq {
                    order: 1.0,
                    y0: ic[1],
                    dy0: 0.0,
                },
                FracEq {
                    order: 1.0,
                    y0: ic[2],
                    dy0: 0.0,
                },
            ],
            |_t, y: &[f64], f: &mut [f64]| {
                f[0] = y[1] * y[2];
                f[1] = -y[0] * y[2];
                f[2] = y[0] * y[1];
            },
            grid,
            n_steps,
        ),
        MixedOrderSystem::PendulumFracH { level } | MixedOrderSystem::PendulumFracK { level } => {
            if !level.is_finite() || level <= 0.0 {
                return Err(FracError::BadLevel(level));
            }
            solve(
                &[
                    FracEq {
                        order: a + 1.0,
                        y0: ic[0],
                        dy0: ic[1],
                    },
                    FracEq {
                        order: a,
                        y0: ic[1],
                        dy0: 0.0,
                    },
                ],
                move |_t, y: &[f64], f: &mut [f64]| {
                    let force = -2.0 * level * y[0].sin();
                    f[0] = force;
                    f[1] = force;
                },
                grid,
                n_steps,
            )
        }
    }
}

fn solve<R>(
    eqs: &[FracEq],
    rhs: R,
    grid: &GridSpec,
    n_steps: usize,
) -> Result<Trajectory, FracError>
where
    R: Fn(f64, &[f64], &mut [f64]),
{
    let d = eqs.len();
    let dt = (grid.t1 - grid.t0) / n_steps as f64;

    // one kernel table per distinct genuinely-fractional order
    let mut kernels: Vec<(f64, Kernel)> = Vec::new();
    let mut paths: Vec<OrderPath> = Vec::with_capacity(d);
    for eq in eqs {
        if eq.order == 1.0 {
            paths.push(OrderPath::One);
        } else if eq.order == 2.0 {
            paths.push(OrderPath::Two);
        } else {
            let idx = match kernels.iter().position(|(o, _)| *o == eq.order) {
                Some(i) => i,
                None => {
                    let mut pred = vec![0.0; n_steps + 1];
                    let mut corr = vec![0.0; n_steps + 1];
                    for m in 1..=n_steps {
                        pred[m] = pred_kernel(eq.order, m as f64);
                        corr[m] = corr_kernel(eq.order, m as f64);
                    }
                    kernels.push((eq.order, Kernel { pred, corr }));
                    kernels.len() - 1
                }
            };
            paths.push(OrderPath::General { kernel: idx });
        }
    }

    let cb: Vec<f64> = eqs
        .iter()
        .map(|e| dt.powf(e.order) / gamma(e.order + 1.0))
        .collect();
    let cc: Vec<f64> = eqs
        .iter()
        .map(|e| dt.powf(e.order) / gamma(e.order + 2.0))
        .collect();

    let mut fhist: Vec<Vec<f64>> = vec![Vec::with_capacity(n_steps + 1); d];
    let mut s0 = vec![0.0f64; d];
    let mut s1 = vec![0.0f64; d];

    let mut traj = Trajectory::with_capacity(d, n_steps + 1);
    let mut y: Vec<f64> = eqs.iter().map(|e| e.y0).collect();
    traj.push(grid.t0, &y)
        .expect("fresh trajectory accepts the initial node");

    let mut f = vec![0.0f64; d];
    rhs(grid.t0, &y, &mut f);
    for c in 0..d {
        fhist[c].push(f[c]);
        s0[c] += f[c];
    }

    let mut taylor = vec![0.0f64; d];
    let mut ypred = vec![0.0f64; d];
    let mut fpred = vec![0.0f64; d];

    for n in 1..=n_steps {
        let elapsed = n as f64 * dt;
        let t_abs = if n == n_steps {
            grid.t1
        } else {
            grid.t0 + elapsed
        };
        let nf = n as f64;

        for c in 0..d {
            let eq = &eqs[c];
            taylor[c] = eq.y0
                + if eq.order > 1.0 {
                    eq.dy0 * elapsed
                } else {
                    0.0
                };
        }

        // predictor and corrector history sums in one ascending pass
        let mut psum = vec![0.0f64; d];
        let mut csum = vec![0.0f64; d];
        for c in 0..d {
            match paths[c] {
                OrderPath::One => {
                    psum[c] = s0[c];
                    csum[c] = 2.0 * s0[c] - fhist[c][0];
                }
                OrderPath::Two => {
                    psum[c] = (2.0 * nf - 1.0) * s0[c] - 2.0 * s1[c];
                    let f0 = fhist[c][0];
                    csum[c] = (3.0 * nf - 1.0) * f0 + 6.0 * (nf * (s0[c] - f0) - s1[c]);
                }
                OrderPath::General { kernel } => {
                    let k = &kernels[kernel].1;
                    let h = &fhist[c];
                    let mut p = 0.0;
                    let mut q = 0.0;
                    p += k.pred[n] * h[0];
                    for j in 1..n {
                        p += k.pred[n - j] * h[j];
                        q += k.corr[n - j] * h[j];
                    }
                    psum[c] = p;
                    csum[c] = corr_first(eqs[c].order, nf) * h[0] + q;
                }
            }
            ypred[c] = taylor[c] + cb[c] * psum[c];
        }

        rhs(t_abs, &ypred, &mut fpred);
        for c in 0..d {
            y[c] = taylor[c] + cc[c] * (fpred[c] + csum[c]);
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(FracError::NonFinite { t: t_abs });
        }

        rhs(t_abs, &y, &mut f);
        for c in 0..d {
            fhist[c].push(f[c]);
            s0[c] += f[c];
            s1[c] += nf * f[c];
        }
        traj.push(t_abs, &y)
            .map_err(|_| FracError::NonFinite { t: t_abs })?;
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::{conservation_drift, euler_top_field, integrate, pendulum_field, GridSpec};
    use crate::phase::{ConservedQuantity, PendulumParams};
    use proptest::prelude::*;

    #[test]
    fn order_one_weights_are_the_trapezoid_rule() {
        let dt = 0.02;
        let (b, a) = abm_weights(1.0, dt, 5).unwrap();
        assert_eq!(b.len(), 5);
        assert_eq!(a.len(), 6);
        for w in &b {
            assert!((w - dt).abs() <= 1e-16 * dt.recip().max(1.0));
        }
        assert!((a[0] - dt / 2.0).abs() <= 1e-17);
        for j in 1..5 {
            assert!((a[j] - dt).abs() <= 1e-16);
        }
        assert!((a[5] - dt / 2.0).abs() <= 1e-17);
    }

    /// The corrector row is the exact hat-function product quadrature of the
    /// memory integral: a_j = (1/Γ(α)) ∫ (t_n - s)^{α-1} φ_j(s) ds. The
    /// oracle integrates in the variable u = (t_n - s)^α, which removes the
    /// endpoint singularity, and never touches the weight formulas.
    #[test]
    fn corrector_weights_match_hat_function_quadrature() {
        fn simpson<F: Fn(f64) -> f64 + Copy>(f: F, a: f64, b: f64, n: usize) -> f64 {
            // composite Simpson on a smooth integrand
            let h = (b - a) / n as f64;
            let mut acc = f(a) + f(b);
            for i in 1..n {
                let x = a + i as f64 * h;
                acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
            }
            acc * h / 3.0
        }

        let alpha = 0.8;
        let dt = 0.7;
        let n = 3;
        let tn = n as f64 * dt;
        let hat = |j: usize, s: f64| -> f64 {
            let tj = j as f64 * dt;
            let w = (s - tj).abs() / dt;
            if w >= 1.0 {
                0.0
            } else {
                1.0 - w
            }
        };
        let (_, a) = abm_weights(alpha, dt, n).unwrap();
        for (j, &got) in a.iter().enumerate().take(n + 1) {
            // integrate φ_j(s) (t_n - s)^{α-1} ds in u, splitting at the hat
            // apex so each Simpson pass sees a smooth integrand
            let apex = j as f64 * dt;
            let lo = (j as f64 - 1.0).max(0.0) * dt;
            let hi = ((j as f64 + 1.0) * dt).min(tn);
            let mut want = 0.0;
            for (s0, s1) in [(lo, apex), (apex, hi)] {
                if s1 <= s0 {
                    continue;
                }
                let u_lo = (tn - s1).powf(alpha);
                let u_hi = (tn - s0).powf(alpha);
                want += simpson(|u: f64| hat(j, tn - u.powf(1.0 / alpha)), u_lo, u_hi, 32768);
            }
            want /= alpha * libm::tgamma(alpha);
            assert!(
                (got - want).abs() <= 1e-11,
                "a[{j}] = {got} vs quadrature {want}"
            );
        }
    }

    /// Re-derivation of the same closed forms, typed independently.
    #[test]
    fn weight_closed_forms_at_a_sample_order() {
        let (alpha, dt, n) = (0.8f64, 0.7f64, 3usize);
        let (b, a) = abm_weights(alpha, dt, n).unwrap();
        let g1 = libm::tgamma(alpha + 1.0);
        let g2 = libm::tgamma(alpha + 2.0);
        for j in 0..n {
            let expect = dt.powf(alpha) / g1
                * ((n as f64 - j as f64).powf(alpha) - (n as f64 - j as f64 - 1.0).powf(alpha));
            assert!((b[j] - expect).abs() <= 1e-14);
        }
        let nf = n as f64;
        let scale = dt.powf(alpha) / g2;
        let a0 = scale * ((nf - 1.0).powf(alpha + 1.0) - (nf - 1.0 - alpha) * nf.powf(alpha));
        assert!((a[0] - a0).abs() <= 1e-14);
        for j in 1..n {
            let m = nf - j as f64;
            let expect = scale
                * ((m + 1.0).powf(alpha + 1.0) + (m - 1.0).powf(alpha + 1.0)
                    - 2.0 * m.powf(alpha + 1.0));
            assert!((a[j] - expect).abs() <= 1e-14);
        }
        assert!((a[n] - scale).abs() <= 1e-16);
    }

    proptest! {
        /// Σ b_j telescopes to t_n^α / Γ(α+1) and the corrector row sums to
        /// the same total mass (the hats partition unity).
        #[test]
        fn weight_rows_have_the_exact_mass(order in 0.05f64..2.0, n in 1usize..80) {
            let dt = 0.1;
            let (b, a) = abm_weights(order, dt, n).unwrap();
            let mass = (n as f64 * dt).powf(order) / libm::tgamma(order + 1.0);
            let bsum: f64 = b.iter().sum();
            let asum: f64 = a.iter().sum();
            prop_assert!((bsum - mass).abs() <= 1e-12 * mass.max(1.0));
            prop_assert!((asum - mass).abs() <= 1e-12 * mass.max(1.0));
        }

        #[test]
        fn weights_are_nonnegative_and_kernels_decay(order in 0.05f64..2.0, n in 2usize..60) {
            let (b, a) = abm_weights(order, 0.05, n).unwrap();
            prop_assert!(b.iter().all(|w| *w >= 0.0));
            prop_assert!(a.iter().all(|w| *w >= 0.0));
            if order <= 1.0 {
                // memory fades: predictor weights grow toward the newest node
                for w in b.windows(2) {
                    prop_assert!(w[1] >= w[0]);
                }
            }
        }
    }

    /// Textbook full-memory PECE written from scratch, no fast paths, no
    /// shared code with the implementation.
    fn naive_pece_top_all_orders_one(ic: [f64; 3], dt: f64, n_steps: usize) -> Vec<[f64; 3]> {
        let rhs = |y: &[f64; 3]| [y[1] * y[2], -y[0] * y[2], y[0] * y[1]];
        let mut fh: Vec<[f64; 3]> = vec![rhs(&ic)];
        let mut out = vec![ic];
        for n in 1..=n_steps {
            let mut pred = ic;
            for c in 0..3 {
                let mut acc = 0.0;
                for fj in fh.iter().take(n) {
                    acc += fj[c];
                }
                pred[c] += dt * acc;
            }
            let fp = rhs(&pred);
            let mut cur = ic;
            for c in 0..3 {
                let mut acc = 0.5 * fh[0][c];
                for fj in fh.iter().take(n).skip(1) {
                    acc += fj[c];
                }
                acc += 0.5 * fp[c];
                cur[c] += dt * acc;
            }
            fh.push(rhs(&cur));
            out.push(cur);
        }
        out
    }

    #[test]
    fn order_one_top_equals_the_naive_scheme() {
        let ic = [0.1, 0.1, 0.3];
        let grid = GridSpec::new(0.0, 5.0, 1e-2).unwrap();
        let tr = integrate_fractional(
            &MixedOrderSystem::EulerTopFracZ,
            &ic,
            FractionalOrder::new(1.0).unwrap(),
            &grid,
        )
        .unwrap();
        let naive = naive_pece_top_all_orders_one(ic, 1e-2, 500);
        assert_eq!(tr.len(), naive.len());
        let mut worst = 0.0f64;
        for i in 0..tr.len() {
            for c in 0..3 {
                worst = worst.max((tr.state(i)[c] - naive[i][c]).abs());
            }
        }
        assert!(
            worst <= 1e-12,
            "fast path deviates from naive PECE by {worst}"
        );
    }

    #[test]
    fn order_one_pendulum_tracks_rk4() {
        let grid = GridSpec::new(0.0, 10.0, 1e-3).unwrap();
        let level = 0.5;
        let tr = integrate_fractional(
            &MixedOrderSystem::PendulumFracH { level },
            &[-3.1, 0.0],
            FractionalOrder::new(1.0).unwrap(),
            &grid,
        )
        .unwrap();
        let params = PendulumParams::conservative(level).unwrap();
        let reference = integrate(&pendulum_field(params), [-3.1, 0.0], &grid).unwrap();
        let mut worst = 0.0f64;
        for i in 0..tr.len() {
            worst = worst.max((tr.state(i)[0] - reference.state(i)[0]).abs());
        }
        assert!(worst <= 1e-4, "order-1 pendulum off RK4 by {worst}");
    }

    #[test]
    fn order_one_top_tracks_rk4() {
        let grid = GridSpec::new(0.0, 10.0, 1e-3).unwrap();
        let ic = [0.1, 0.1, 0.3];
        let tr = integrate_fractional(
            &MixedOrderSystem::EulerTopFracX,
            &ic,
            FractionalOrder::new(1.0).unwrap(),
            &grid,
        )
        .unwrap();
        let reference = integrate(&euler_top_field(), ic, &grid).unwrap();
        let end = tr.last_state().unwrap();
        let end_ref = reference.last_state().unwrap();
        let gap = (0..3)
            .map(|c| (end[c] - end_ref[c]).abs())
            .fold(0.0f64, f64::max);
        assert!(gap <= 1e-4, "gap {gap}");
    }

    /// ω is advanced as its own order-α equation; at α = 1 it must agree
    /// with the finite-difference derivative of θ.
    #[test]
    fn omega_channel_is_the_angle_derivative() {
        let grid = GridSpec::new(0.0, 5.0, 1e-3).unwrap();
        let tr = integrate_fractional(
            &MixedOrderSystem::PendulumFracH { level: 0.5 },
            &[2.0, 0.0],
            FractionalOrder::new(1.0).unwrap(),
            &grid,
        )
        .unwrap();
        let dt = 1e-3;
        let mut worst = 0.0f64;
        for i in 2..tr.len() - 2 {
            let d = (-tr.state(i + 2)[0] + 8.0 * tr.state(i + 1)[0] - 8.0 * tr.state(i - 1)[0]
                + tr.state(i - 2)[0])
                / (12.0 * dt);
            worst = worst.max((d - tr.state(i)[1]).abs());
        }
        assert!(worst <= 1e-5, "omega deviates from dθ/dt by {worst}");
    }

    #[test]
    fn fractional_top_keeps_its_invariant() {
        let grid = GridSpec::new(0.0, 10.0, 1e-3).unwrap();
        let alpha = FractionalOrder::new(0.8).unwrap();
        let tz = integrate_fractional(
            &MixedOrderSystem::EulerTopFracZ,
            &[0.1, 0.1, 0.3],
            alpha,
            &grid,
        )
        .unwrap();
        let dh = conservation_drift(&tz, ConservedQuantity::H1).unwrap();
        assert!(dh <= 1e-6, "H1 drift {dh}");
        let tx = integrate_fractional(
            &MixedOrderSystem::EulerTopFracX,
            &[0.1, 0.1, 0.3],
            alpha,
            &grid,
        )
        .unwrap();
        let dc = conservation_drift(&tx, ConservedQuantity::C1).unwrap();
        assert!(dc <= 1e-6, "C1 drift {dc}");
    }

    #[test]
    fn subunit_order_damps_the_pendulum() {
        let grid = GridSpec::new(0.0, 30.0, 2e-3).unwrap();
        let tr = integrate_fractional(
            &MixedOrderSystem::PendulumFracH { level: 0.5 },
            &[-3.1, 0.0],
            FractionalOrder::new(0.8).unwrap(),
            &grid,
        )
        .unwrap();
        let max_in = |a: f64, b: f64| {
            (0..tr.len())
                .filter(|&i| tr.time(i) >= a && tr.time(i) <= b)
                .map(|i| tr.state(i)[0].abs())
                .fold(0.0f64, f64::max)
        };
        let early = max_in(0.0, 5.0);
        let late = max_in(20.0, 30.0);
        assert!(late < early, "no decay: early {early}, late {late}");
    }

    #[test]
    fn parameter_validation() {
        assert!(matches!(
            FractionalOrder::new(0.0),
            Err(FracError::OrderRange(_))
        ));
        assert!(matches!(
            FractionalOrder::new(1.2),
            Err(FracError::OrderRange(_))
        ));
        assert!(matches!(
            FractionalOrder::new(f64::NAN),
            Err(FracError::OrderRange(_))
        ));
        assert!(matches!(
            abm_weights(2.5, 0.1, 3),
            Err(FracError::WeightOrderRange(_))
        ));
        assert!(matches!(
            abm_weights(0.5, 0.0, 3),
            Err(FracError::BadStep(_))
        ));
        assert!(matches!(abm_weights(0.5, 0.1, 0), Err(FracError::BadCount)));

        let alpha = FractionalOrder::new(0.8).unwrap();
        let ragged = GridSpec::new(0.0, 1.03, 0.25).unwrap();
        assert!(matches!(
            integrate_fractional(
                &MixedOrderSystem::EulerTopFracZ,
                &[0.1, 0.1, 0.3],
                alpha,
                &ragged
            ),
            Err(FracError::RaggedGrid { .. })
        ));
        let grid = GridSpec::new(0.0, 1.0, 0.25).unwrap();
        assert!(matches!(
            integrate_fractional(&MixedOrderSystem::EulerTopFracZ, &[0.1, 0.1], alpha, &grid),
            Err(FracError::Dimension { got: 2, want: 3 })
        ));
        assert!(matches!(
            integrate_fractional(
                &MixedOrderSystem::PendulumFracK { level: 0.0 },
                &[1.0, 0.0],
                alpha,
                &grid
            ),
            Err(FracError::BadLevel(_))
        ));
        assert!(matches!(
            integrate_fractional(
                &MixedOrderSystem::EulerTopFracZ,
                &[f64::NAN, 0.0, 0.0],
                alpha,
                &grid
            ),
            Err(FracError::BadInitial)
        ));
    }

    #[test]
    fn reruns_are_bit_identical() {
        let grid = GridSpec::new(0.0, 3.0, 1e-2).unwrap();
        let alpha = FractionalOrder::new(0.6).unwrap();
        let run = || {
            integrate_fractional(
                &MixedOrderSystem::PendulumFracK { level: 0.3 },
                &[2.0, 0.0],
                alpha,
                &grid,
            )
            .unwrap()
        };
        assert_eq!(run(), run());
    }
}
