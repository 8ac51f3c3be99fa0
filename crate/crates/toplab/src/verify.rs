//! The named verification suites behind `toplab verify`: fixed workloads
//! with explicit numeric bounds, one [`CheckResult`] per bound. Suites are
//! deterministic — fixed seeds, fixed grids — so a report diff means a code
//! change, not luck.

use crate::analytic::{heteroclinic, jacobi_orbit, jacobi_orbit_periods, SignPattern};
use crate::correspondence::{
    euler_to_pendulum, pendulum_to_euler, residual_report, top_residual_report, LevelSurface,
};
use crate::dde::{integrate_dde, DelaySpec, DelayedSystem};
use crate::fractional::{integrate_fractional, FractionalOrder, MixedOrderSystem};
use crate::ode::{
    all_conservation_drifts, conservation_drift, euler_top_field, integrate, pendulum_field,
    GridSpec,
};
use crate::phase::{ConservedQuantity, PendulumParams, Trajectory};
use crate::stochastic::{
    derive_path_seed, ensemble, euler_top_sde_a, euler_top_sde_b, integrate_sde, pendulum_sde,
    Scheme, WienerPath,
};
use serde::Serialize;
use std::time::Instant;
use thiserror::Error;

pub const SUITES: [&str; 7] = [
    "conservation",
    "analytic",
    "correspondence",
    "delay",
    "fractional",
    "sde-convergence",
    "determinism",
];

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("unknown suite `{0}`; expected one of conservation, analytic, correspondence, delay, fractional, sde-convergence, determinism, all")]
    UnknownSuite(String),
}

/// One bound of one suite. `pass` is `observed <= bound` for upper bounds
/// and `observed >= bound` for checks whose name ends in `-min`.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub suite: &'static str,
    pub check: String,
    pub observed: f64,
    pub bound: f64,
    pub pass: bool,
}

fn le(suite: &'static str, check: &str, observed: f64, bound: f64) -> CheckResult {
    CheckResult {
        suite,
        check: check.to_string(),
        observed,
        bound,
        pass: observed <= bound,
    }
}

fn ge(suite: &'static str, check: &str, observed: f64, bound: f64) -> CheckResult {
    CheckResult {
        suite,
        check: check.to_string(),
        observed,
        bound,
        pass: observed >= bound,
    }
}

pub fn run_suite(name: &str) -> Result<Vec<CheckResult>, VerifyError> {
    match name {
        "conservation" => Ok(suite_conservation()),
        "analytic" => Ok(suite_analytic()),
        "correspondence" => Ok(suite_correspondence()),
        "delay" => Ok(suite_delay()),
        "fractional" => Ok(suite_fractional()),
        "sde-convergence" => Ok(suite_sde_convergence()),
        "determinism" => Ok(suite_determinism()),
        other => Err(VerifyError::UnknownSuite(other.to_string())),
    }
}

pub fn run_all() -> Vec<CheckResult> {
    SUITES
        .iter()
        .flat_map(|s| run_suite(s).expect("built-in suite name"))
        .collect()
}

/// Six functionals along the long classical run.
fn suite_conservation() -> Vec<CheckResult> {
    let start = Instant::now();
    let grid = GridSpec::new(0.0, 100.0, 1e-3).expect("static grid");
    let tr = integrate(&euler_top_field(), [0.1, 0.1, 0.2], &grid).expect("classical run");
    let mut out: Vec<CheckResult> = all_conservation_drifts(&tr)
        .expect("three-component trajectory")
        .iter()
        .map(|(q, drift)| {
            le(
                "conservation",
                &format!("{}-drift", q.label().to_lowercase()),
                *drift,
                1e-8,
            )
        })
        .collect();
    out.push(le(
        "conservation",
        "runtime-seconds",
        start.elapsed().as_secs_f64(),
        5.0,
    ));
    out
}

/// Mean spacing of upward crossings of `level` in one component, by linear
/// interpolation between bracketing nodes.
fn upward_crossing_period(traj: &Trajectory, comp: usize, level: f64) -> Option<f64> {
    let mut crossings: Vec<f64> = Vec::new();
    for i in 0..traj.len() - 1 {
        let a = traj.state(i)[comp] - level;
        let b = traj.state(i + 1)[comp] - level;
        if a < 0.0 && b >= 0.0 {
            let frac = a / (a - b);
            crossings.push(traj.time(i) + frac * (traj.time(i + 1) - traj.time(i)));
        }
    }
    if crossings.len() < 2 {
        return None;
    }
    Some((crossings[crossings.len() - 1] - crossings[0]) / (crossings.len() - 1) as f64)
}

/// Closed forms against the integrator: the elliptic orbit for distinct
/// levels, its periods, and the heteroclinic orbit for equal levels.
fn suite_analytic() -> Vec<CheckResult> {
    let mut out = Vec::new();
    let (h, k) = (1.0, 2.0);
    let grid = GridSpec::new(0.0, 10.0, 1e-3).expect("static grid");
    let ic = jacobi_orbit(h, k, 0.0).expect("valid levels").to_array();
    let tr = integrate(&euler_top_field(), ic, &grid).expect("orbit run");
    let mut worst = 0.0f64;
    for i in 0..tr.len() {
        let exact = jacobi_orbit(h, k, tr.time(i))
            .expect("valid levels")
            .to_array();
        for c in 0..3 {
            worst = worst.max((tr.state(i)[c] - exact[c]).abs());
        }
    }
    out.push(le("analytic", "jacobi-orbit-gap", worst, 1e-6));

    let (t12, t3) = jacobi_orbit_periods(h, k).expect("valid levels");
    let p1 = upward_crossing_period(&tr, 0, 0.0).expect("several x1 periods in the window");
    out.push(le(
        "analytic",
        "x1-period-relative-error",
        (p1 - t12).abs() / t12,
        1e-3,
    ));
    let x3: Vec<f64> = tr.component(2).collect();
    let mid = 0.5
        * (x3.iter().cloned().fold(f64::INFINITY, f64::min)
            + x3.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
    let p3 = upward_crossing_period(&tr, 2, mid).expect("several x3 periods in the window");
    out.push(le(
        "analytic",
        "x3-period-relative-error",
        (p3 - t3).abs() / t3,
        1e-3,
    ));

    let hh = std::f64::consts::FRAC_1_SQRT_2;
    let pattern = SignPattern::new(1, 1, -1).expect("valid sign pattern");
    let het_grid = GridSpec::new(0.0, 5.0, 1e-3).expect("static grid");
    let het_ic = heteroclinic(hh, 0.0, pattern)
        .expect("valid level")
        .to_array();
    let het = integrate(&euler_top_field(), het_ic, &het_grid).expect("heteroclinic run");
    let mut worst = 0.0f64;
    for i in 0..het.len() {
        let exact = heteroclinic(hh, het.time(i), pattern)
            .expect("valid level")
            .to_array();
        for c in 0..3 {
            worst = worst.max((het.state(i)[c] - exact[c]).abs());
        }
    }
    out.push(le("analytic", "heteroclinic-shadow-gap", worst, 1e-4));
    out
}

/// Both directions of the level-surface dictionary, both surfaces.
fn suite_correspondence() -> Vec<CheckResult> {
    let mut out = Vec::new();
    let grid = GridSpec::new(0.0, 10.0, 1e-3).expect("static grid");

    let params = PendulumParams::conservative(0.5).expect("positive level");
    let pend = integrate(&pendulum_field(params), [-3.8, 0.0], &grid).expect("pendulum run");
    for (surface, tag) in [(LevelSurface::H, "h"), (LevelSurface::K, "k")] {
        let top = pendulum_to_euler(&pend, surface, 0.5).expect("embedding");
        let res = top_residual_report(&top).expect("uniform grid");
        out.push(le(
            "correspondence",
            &format!("pendulum-to-top-{tag}-residual"),
            res,
            1e-5,
        ));
    }

    let top = integrate(&euler_top_field(), [0.1, 0.1, 0.2], &grid).expect("top run");
    for (surface, level, tag) in [(LevelSurface::H, 0.01, "h"), (LevelSurface::K, 0.025, "k")] {
        let pend = euler_to_pendulum(&top, surface, level).expect("on-surface run");
        let res = residual_report(&pend, level).expect("uniform grid");
        out.push(le(
            "correspondence",
            &format!("top-to-pendulum-{tag}-angle-residual"),
            res.angle,
            1e-5,
        ));
        out.push(le(
            "correspondence",
            &format!("top-to-pendulum-{tag}-velocity-residual"),
            res.velocity,
            1e-5,
        ));
    }
    out
}

/// Delayed invariants, the short-delay limit, and the constant-history
/// windows.
fn suite_delay() -> Vec<CheckResult> {
    let mut out = Vec::new();
    let ic = [0.1, 0.05, 0.2];
    let grid = GridSpec::new(0.0, 50.0, 0.01).expect("static grid");
    let delay = DelaySpec::new(1.0).expect("positive delay");
    let z = integrate_dde(&DelayedSystem::EulerTopDelayZ, &ic, delay, &grid).expect("delayed run");
    out.push(le(
        "delay",
        "delayed-z-h1-drift",
        conservation_drift(&z, ConservedQuantity::H1).expect("dim 3"),
        1e-8,
    ));
    let x = integrate_dde(&DelayedSystem::EulerTopDelayX, &ic, delay, &grid).expect("delayed run");
    out.push(le(
        "delay",
        "delayed-x-c1-drift",
        conservation_drift(&x, ConservedQuantity::C1).expect("dim 3"),
        1e-8,
    ));

    // vanishing delay: the delayed flow collapses onto the classical one
    let short_grid = GridSpec::new(0.0, 1.0, 2.5e-7).expect("static grid");
    let tiny = DelaySpec::new(1e-6).expect("positive delay");
    let delayed =
        integrate_dde(&DelayedSystem::EulerTopDelayZ, &ic, tiny, &short_grid).expect("delayed run");
    let classical = integrate(&euler_top_field(), ic, &short_grid).expect("classical run");
    let mut worst = 0.0f64;
    for i in 0..delayed.len() {
        for c in 0..3 {
            worst = worst.max((delayed.state(i)[c] - classical.state(i)[c]).abs());
        }
    }
    out.push(le("delay", "vanishing-delay-gap", worst, 1e-4));

    // constant history: the first delay window integrates a known parabola
    for (level, theta0, sys, tag) in [
        (0.5, 2.0, DelayedSystem::PendulumDelayH { level: 0.5 }, "h"),
        (0.3, 2.0, DelayedSystem::PendulumDelayK { level: 0.3 }, "k"),
    ] {
        let wgrid = GridSpec::new(0.0, 1.0, 1e-3).expect("static grid");
        let tr = integrate_dde(
            &sys,
            &[theta0, 0.0],
            DelaySpec::new(1.0).expect("positive delay"),
            &wgrid,
        )
        .expect("delayed pendulum run");
        let accel = -level * theta0.sin();
        let mut worst = 0.0f64;
        for i in 0..tr.len() {
            let t = tr.time(i);
            worst = worst.max((tr.state(i)[0] - (theta0 + accel * t * t)).abs());
        }
        out.push(le(
            "delay",
            &format!("pendulum-{tag}-first-window-gap"),
            worst,
            1e-10,
        ));
    }
    out
}

/// Fractional orders: classical reduction at order one, sub-unit damping,
/// and the surviving invariants.
fn suite_fractional() -> Vec<CheckResult> {
    let start = Instant::now();
    let mut out = Vec::new();

    let grid = GridSpec::new(0.0, 50.0, 1e-3).expect("static grid");
    let one = FractionalOrder::new(1.0).expect("valid order");
    let frac = integrate_fractional(
        &MixedOrderSystem::PendulumFracH { level: 0.5 },
        &[-3.1, 0.0],
        one,
        &grid,
    )
    .expect("order-one run");
    let params = PendulumParams::conservative(0.5).expect("positive level");
    let classical = integrate(&pendulum_field(params), [-3.1, 0.0], &grid).expect("classical run");
    let mut worst = 0.0f64;
    for i in 0..frac.len() {
        worst = worst.max((frac.state(i)[0] - classical.state(i)[0]).abs());
    }
    out.push(le(
        "fractional",
        "order-one-pendulum-h-rk4-gap",
        worst,
        1e-3,
    ));

    let kgrid = GridSpec::new(0.0, 10.0, 1e-3).expect("static grid");
    let frac_k = integrate_fractional(
        &MixedOrderSystem::PendulumFracK { level: 0.3 },
        &[2.0, 0.0],
        one,
        &kgrid,
    )
    .expect("order-one run");
    let params_k = PendulumParams::conservative(0.3).expect("positive level");
    let classical_k =
        integrate(&pendulum_field(params_k), [2.0, 0.0], &kgrid).expect("classical run");
    let mut worst = 0.0f64;
    for i in 0..frac_k.len() {
        worst = worst.max((frac_k.state(i)[0] - classical_k.state(i)[0]).abs());
    }
    out.push(le(
        "fractional",
        "order-one-pendulum-k-rk4-gap",
        worst,
        1e-3,
    ));

    let alpha = FractionalOrder::new(0.8).expect("valid order");
    let damped = integrate_fractional(
        &MixedOrderSystem::PendulumFracH { level: 0.5 },
        &[-3.1, 0.0],
        alpha,
        &grid,
    )
    .expect("sub-unit order run");
    let max_in = |lo: f64, hi: f64| {
        (0..damped.len())
            .filter(|&i| damped.time(i) >= lo && damped.time(i) <= hi)
            .map(|i| damped.state(i)[0].abs())
            .fold(0.0f64, f64::max)
    };
    let early = max_in(0.0, 10.0);
    let late = max_in(40.0, 50.0);
    out.push(le("fractional", "amplitude-decay-ratio", late / early, 1.0));

    let cgrid = GridSpec::new(0.0, 10.0, 1e-3).expect("static grid");
    let tz = integrate_fractional(
        &MixedOrderSystem::EulerTopFracZ,
        &[0.1, 0.1, 0.3],
        alpha,
        &cgrid,
    )
    .expect("fractional top run");
    out.push(le(
        "fractional",
        "fractional-z-h1-drift",
        conservation_drift(&tz, ConservedQuantity::H1).expect("dim 3"),
        1e-6,
    ));
    let tx = integrate_fractional(
        &MixedOrderSystem::EulerTopFracX,
        &[0.1, 0.1, 0.3],
        alpha,
        &cgrid,
    )
    .expect("fractional top run");
    out.push(le(
        "fractional",
        "fractional-x-c1-drift",
        conservation_drift(&tx, ConservedQuantity::C1).expect("dim 3"),
        1e-6,
    ));

    out.push(le(
        "fractional",
        "runtime-seconds",
        start.elapsed().as_secs_f64(),
        30.0,
    ));
    out
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    num / den
}

fn endpoint_gap(a: &Trajectory, b: &Trajectory) -> f64 {
    let xa = a.last_state().expect("non-empty");
    let xb = b.last_state().expect("non-empty");
    xa.iter()
        .zip(xb)
        .map(|(p, q)| (p - q) * (p - q))
        .sum::<f64>()
        .sqrt()
}

/// Strong orders against a shared fine path, scheme-vs-scheme convergence
/// across the two readings, and the first-moment identity
/// `d E[x2]/dt = -E[x1 x3]`.
fn suite_sde_convergence() -> Vec<CheckResult> {
    let start = Instant::now();
    let mut out = Vec::new();
    let spec = euler_top_sde_a();
    let ic = [0.1, 0.1, 0.1];

    // strong error at dt = 2^-6..2^-10 vs a Milstein reference at 2^-14
    const REF_EXP: i32 = 14;
    const COARSE: [i32; 5] = [10, 9, 8, 7, 6];
    let m_paths = 200u64;
    let mut err_em = [0.0f64; COARSE.len()];
    let mut err_mil = [0.0f64; COARSE.len()];
    for i in 0..m_paths {
        let seed = derive_path_seed(2024, i);
        let fine =
            WienerPath::generate(seed, 1.0, (-(REF_EXP as f64)).exp2(), 3, 1usize << REF_EXP)
                .expect("valid path parameters");
        let reference = integrate_sde(&spec, &ic, &fine, Scheme::Milstein).expect("reference run");
        let xref = reference.last_state().expect("non-empty").to_vec();
        let mut path = fine;
        let mut exp = REF_EXP;
        while exp > COARSE[COARSE.len() - 1] {
            path = path.coarsen().expect("even step count");
            exp -= 1;
            if let Some(slot) = COARSE.iter().position(|e| *e == exp) {
                let em =
                    integrate_sde(&spec, &ic, &path, Scheme::EulerMaruyama).expect("coarse run");
                let mil = integrate_sde(&spec, &ic, &path, Scheme::Milstein).expect("coarse run");
                let de: f64 = em
                    .last_state()
                    .expect("non-empty")
                    .iter()
                    .zip(&xref)
                    .map(|(p, q)| (p - q) * (p - q))
                    .sum();
                let dm: f64 = mil
                    .last_state()
                    .expect("non-empty")
                    .iter()
                    .zip(&xref)
                    .map(|(p, q)| (p - q) * (p - q))
                    .sum();
                err_em[slot] += de.sqrt();
                err_mil[slot] += dm.sqrt();
            }
        }
    }
    let xs: Vec<f64> = COARSE.iter().map(|e| -(*e as f64)).collect();
    let ys_em: Vec<f64> = err_em.iter().map(|e| (e / m_paths as f64).log2()).collect();
    let ys_mil: Vec<f64> = err_mil
        .iter()
        .map(|e| (e / m_paths as f64).log2())
        .collect();
    let em_slope = least_squares_slope(&xs, &ys_em);
    let mil_slope = least_squares_slope(&xs, &ys_mil);
    out.push(ge(
        "sde-convergence",
        "euler-maruyama-strong-slope-min",
        em_slope,
        0.4,
    ));
    out.push(le(
        "sde-convergence",
        "euler-maruyama-strong-slope-max",
        em_slope,
        0.6,
    ));
    out.push(ge(
        "sde-convergence",
        "milstein-strong-slope-min",
        mil_slope,
        0.85,
    ));
    out.push(le(
        "sde-convergence",
        "milstein-strong-slope-max",
        mil_slope,
        1.15,
    ));

    // the two readings converge to the same process on shared paths
    let strat = euler_top_sde_a().to_stratonovich();
    let mut gaps = Vec::new();
    for e in COARSE {
        let mut acc = 0.0;
        let m = 100u64;
        for i in 0..m {
            let seed = derive_path_seed(777 + e as u64, i);
            let path = WienerPath::generate(seed, 1.0, (-(e as f64)).exp2(), 3, 1usize << e)
                .expect("valid path parameters");
            let ito_run = integrate_sde(&spec, &ic, &path, Scheme::EulerMaruyama).expect("run");
            let strat_run =
                integrate_sde(&strat, &ic, &path, Scheme::StratonovichHeun).expect("run");
            acc += endpoint_gap(&ito_run, &strat_run);
        }
        gaps.push((acc / m as f64).log2());
    }
    let conv_slope = least_squares_slope(&xs, &gaps);
    out.push(ge(
        "sde-convergence",
        "ito-stratonovich-gap-slope-min",
        conv_slope,
        0.5,
    ));

    // d E[x2]/dt = -E[x1 x3], tested path-wise at mid-span
    let n = 1usize << 10;
    let dt = (-(10.0f64)).exp2();
    let m = 10_000u64;
    let mid = n / 2;
    let mut sum = 0.0f64;
    let mut sumsq = 0.0f64;
    for i in 0..m {
        let seed = derive_path_seed(31_337, i);
        let path = WienerPath::generate(seed, 1.0, dt, 3, n).expect("valid path parameters");
        let tr = integrate_sde(&spec, &ic, &path, Scheme::EulerMaruyama).expect("run");
        let ddt_x2 = (tr.state(mid + 1)[1] - tr.state(mid - 1)[1]) / (2.0 * dt);
        let a = tr.state(mid)[0] * tr.state(mid)[2];
        let c = ddt_x2 + a;
        sum += c;
        sumsq += c * c;
    }
    let mean = sum / m as f64;
    let var = (sumsq / m as f64 - mean * mean).max(0.0) * m as f64 / (m as f64 - 1.0);
    let ci = 1.96 * (var / m as f64).sqrt();
    out.push(le(
        "sde-convergence",
        "first-moment-identity-gap",
        mean.abs(),
        3.0 * ci,
    ));

    // square-root model: fraction of visited states clamped at zero noise
    // (informational; the clamp is part of the model)
    let sq_path = WienerPath::generate(5, 1.0, (-10.0f64).exp2(), 3, 1 << 10).expect("valid path");
    let sq = integrate_sde(
        &euler_top_sde_b(),
        &[1.0, 0.8, 0.2],
        &sq_path,
        Scheme::EulerMaruyama,
    )
    .expect("square-root run");
    let mut clamped = 0usize;
    for i in 0..sq.len() {
        for c in 0..3 {
            if sq.state(i)[c] < 0.0 {
                clamped += 1;
            }
        }
    }
    out.push(le(
        "sde-convergence",
        "sqrt-model-clamp-fraction",
        clamped as f64 / (3 * sq.len()) as f64,
        1.0,
    ));

    out.push(le(
        "sde-convergence",
        "runtime-seconds",
        start.elapsed().as_secs_f64(),
        120.0,
    ));
    out
}

fn max_abs_diff(a: &Trajectory, b: &Trajectory) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut worst = 0.0f64;
    for i in 0..a.len() {
        worst = worst.max((a.time(i) - b.time(i)).abs());
        for c in 0..a.dim() {
            worst = worst.max((a.state(i)[c] - b.state(i)[c]).abs());
        }
    }
    worst
}

/// Re-run every family twice and demand zero difference, including the
/// thread-parallel ensemble reduction.
fn suite_determinism() -> Vec<CheckResult> {
    let mut out = Vec::new();

    let grid = GridSpec::new(0.0, 5.0, 1e-3).expect("static grid");
    let a = integrate(&euler_top_field(), [0.1, 0.1, 0.2], &grid).expect("run");
    let b = integrate(&euler_top_field(), [0.1, 0.1, 0.2], &grid).expect("run");
    out.push(le(
        "determinism",
        "classical-rerun-max-diff",
        max_abs_diff(&a, &b),
        0.0,
    ));

    let delay = DelaySpec::new(1.0).expect("positive delay");
    let dgrid = GridSpec::new(0.0, 5.0, 0.01).expect("static grid");
    let a = integrate_dde(
        &DelayedSystem::PendulumDelayH { level: 0.5 },
        &[2.0, 0.0],
        delay,
        &dgrid,
    )
    .expect("run");
    let b = integrate_dde(
        &DelayedSystem::PendulumDelayH { level: 0.5 },
        &[2.0, 0.0],
        delay,
        &dgrid,
    )
    .expect("run");
    out.push(le(
        "determinism",
        "delayed-rerun-max-diff",
        max_abs_diff(&a, &b),
        0.0,
    ));

    let fgrid = GridSpec::new(0.0, 3.0, 1e-2).expect("static grid");
    let alpha = FractionalOrder::new(0.6).expect("valid order");
    let a = integrate_fractional(
        &MixedOrderSystem::PendulumFracH { level: 0.5 },
        &[2.0, 0.0],
        alpha,
        &fgrid,
    )
    .expect("run");
    let b = integrate_fractional(
        &MixedOrderSystem::PendulumFracH { level: 0.5 },
        &[2.0, 0.0],
        alpha,
        &fgrid,
    )
    .expect("run");
    out.push(le(
        "determinism",
        "fractional-rerun-max-diff",
        max_abs_diff(&a, &b),
        0.0,
    ));

    let path1 = WienerPath::generate(12, 1.0, 1.0 / 64.0, 3, 128).expect("valid path");
    let path2 = WienerPath::generate(12, 1.0, 1.0 / 64.0, 3, 128).expect("valid path");
    let spec = euler_top_sde_a();
    let a = integrate_sde(&spec, &[0.1; 3], &path1, Scheme::Milstein).expect("run");
    let b = integrate_sde(&spec, &[0.1; 3], &path2, Scheme::Milstein).expect("run");
    out.push(le(
        "determinism",
        "sde-path-rerun-max-diff",
        max_abs_diff(&a, &b),
        0.0,
    ));

    let pgrid = GridSpec::new(1.0, 2.0, 1.0 / 64.0).expect("static grid");
    let pend = pendulum_sde(0.5).expect("positive level");
    let s1 = ensemble(&pend, &[1.0, 0.8], &pgrid, Scheme::EulerMaruyama, 7, 256).expect("ensemble");
    let s2 = ensemble(&pend, &[1.0, 0.8], &pgrid, Scheme::EulerMaruyama, 7, 256).expect("ensemble");
    let mut worst = 0.0f64;
    for node in 0..s1.len() {
        for c in 0..s1.dim() {
            worst = worst.max((s1.mean(node, c) - s2.mean(node, c)).abs());
            for j in c..s1.dim() {
                worst =
                    worst.max((s1.second_moment(node, c, j) - s2.second_moment(node, c, j)).abs());
            }
        }
    }
    out.push(le(
        "determinism",
        "parallel-ensemble-rerun-max-diff",
        worst,
        0.0,
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite_is_an_error() {
        assert!(matches!(
            run_suite("spectral"),
            Err(VerifyError::UnknownSuite(_))
        ));
    }

    #[test]
    fn fast_suites_pass() {
        for s in ["analytic", "correspondence", "determinism"] {
            let results = run_suite(s).unwrap();
            assert!(!results.is_empty());
            for r in &results {
                assert!(
                    r.pass,
                    "{}/{} observed {} bound {}",
                    r.suite, r.check, r.observed, r.bound
                );
            }
        }
    }

    #[test]
    fn check_results_serialize_with_the_agreed_fields() {
        let r = le("conservation", "h1-drift", 1e-9, 1e-8);
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["suite"], "conservation");
        assert_eq!(json["check"], "h1-drift");
        assert!(json["pass"].as_bool().unwrap());
        assert!(json["observed"].as_f64().is_some());
        assert!(json["bound"].as_f64().is_some());
    }

    #[test]
    fn slope_fit_recovers_a_line() {
        let xs = [-10.0, -9.0, -8.0, -7.0, -6.0];
        let ys: Vec<f64> = xs.iter().map(|x| 0.5 * x + 3.0).collect();
        assert!((least_squares_slope(&xs, &ys) - 0.5).abs() <= 1e-12);
    }

    #[test]
    fn crossing_period_measures_a_sine() {
        let grid = GridSpec::new(0.0, 20.0, 1e-3).unwrap();
        let mut tr = Trajectory::with_capacity(1, 20_001);
        for t in grid.nodes() {
            tr.push(t, &[(1.3 * t).sin()]).unwrap();
        }
        let p = upward_crossing_period(&tr, 0, 0.0).unwrap();
        let want = 2.0 * std::f64::consts::PI / 1.3;
        assert!((p - want).abs() / want <= 1e-6, "got {p}, want {want}");
    }
}
