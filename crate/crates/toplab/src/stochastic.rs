//! Stochastic top and pendulum: refinable Wiener paths, diagonal-noise SDE
//! specifications that carry their Itô/Stratonovich reading, Euler-Maruyama,
//! Milstein and Stratonovich-Heun steppers, and deterministic parallel
//! ensembles.
//!
//! Every Brownian increment is rounded onto a dyadic lattice `2^grid_exp`
//! with `grid_exp ≈ log2(√dt) - 40`, so increments keep about 40 random
//! bits. `refine` halves the step and draws bridge midpoints on the
//! next-finer lattice; the two child increments of a step then sum to the
//! parent increment *exactly* in floating point, and `coarsen` inverts
//! `refine` bitwise. Strong-convergence runs against a shared reference
//! path depend on that exactness.

use crate::ode::GridSpec;
use crate::phase::Trajectory;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SdeError {
    #[error("step size must be positive and finite, got {0}")]
    BadStep(f64),
    #[error("path needs at least one step")]
    BadCount,
    #[error("dimension must be at least 1")]
    BadDim,
    #[error("time origin must be finite, got {0}")]
    BadOrigin(f64),
    #[error("coarsening needs an even number of steps, got {0}")]
    OddSteps(usize),
    #[error("state has {got} components, the equation has {want}")]
    Dimension { got: usize, want: usize },
    #[error("initial state is not finite")]
    BadInitial,
    #[error("level must be positive and finite, got {0}")]
    BadLevel(f64),
    #[error(
        "{scheme:?} reads the equation in the {needs:?} sense, but it is tagged {got:?}; convert it first"
    )]
    InterpretationMismatch {
        scheme: Scheme,
        needs: Interpretation,
        got: Interpretation,
    },
    #[error("ensemble grid must tile the span: span {span} over dt {dt}")]
    RaggedGrid { span: f64, dt: f64 },
    #[error("ensemble needs at least one path")]
    NoPaths,
    #[error("non-finite state produced at t = {t}")]
    NonFinite { t: f64 },
}

/// How the stochastic integral in an equation is meant to be read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interpretation {
    Ito,
    Stratonovich,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    EulerMaruyama,
    Milstein,
    StratonovichHeun,
}

/// Random bits kept per increment after lattice rounding.
pub const QUANT_BITS: i32 = 40;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const BRIDGE_SALT: u64 = 0x8F5C_28F5_C28F_5C29;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for ensemble member `index`: element `index` of the splitmix64
/// stream based at `base`. Members are reproducible individually, without
/// generating their predecessors.
pub fn derive_path_seed(base: u64, index: u64) -> u64 {
    mix64(base.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN)))
}

fn quantize(x: f64, exp: i32) -> f64 {
    let scale = (exp as f64).exp2();
    (x / scale).round() * scale
}

/// A sampled Wiener path: `n_steps` increments of width `dt` per component,
/// time-major, each an exact multiple of `2^grid_exp`.
#[derive(Debug, Clone, PartialEq)]
pub struct WienerPath {
    seed: u64,
    t0: f64,
    dt: f64,
    dim: usize,
    grid_exp: i32,
    increments: Vec<f64>,
}

impl WienerPath {
    pub fn generate(
        seed: u64,
        t0: f64,
        dt: f64,
        dim: usize,
        n_steps: usize,
    ) -> Result<Self, SdeError> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(SdeError::BadStep(dt));
        }
        if !t0.is_finite() {
            return Err(SdeError::BadOrigin(t0));
        }
        if dim == 0 {
            return Err(SdeError::BadDim);
        }
        if n_steps == 0 {
            return Err(SdeError::BadCount);
        }
        let sd = dt.sqrt();
        let grid_exp = sd.log2().floor() as i32 - QUANT_BITS;
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut increments = Vec::with_capacity(n_steps * dim);
        for _ in 0..n_steps * dim {
            let z: f64 = rng.sample(StandardNormal);
            increments.push(quantize(z * sd, grid_exp));
        }
        Ok(Self {
            seed,
            t0,
            dt,
            dim,
            grid_exp,
            increments,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_steps(&self) -> usize {
        self.increments.len() / self.dim
    }

    pub fn grid_exp(&self) -> i32 {
        self.grid_exp
    }

    /// Increments of step `k`, one entry per component.
    pub fn increment(&self, k: usize) -> &[f64] {
        &self.increments[k * self.dim..(k + 1) * self.dim]
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    /// Path values at the nodes (prefix sums, starting at 0).
    pub fn values(&self) -> Vec<f64> {
        let n = self.n_steps();
        let mut out = vec![0.0; (n + 1) * self.dim];
        for k in 0..n {
            for c in 0..self.dim {
                out[(k + 1) * self.dim + c] =
                    out[k * self.dim + c] + self.increments[k * self.dim + c];
            }
        }
        out
    }

    /// Halve the step by Brownian-bridge midpoints. The bridge noise is a
    /// pure function of `(seed, grid_exp)`, so refining the same path twice
    /// gives identical children. Midpoints are drawn on the next-finer
    /// lattice, which makes `d1 + d2 == parent` exact in floating point.
    pub fn refine(&self) -> Self {
        let child_exp = self.grid_exp - 1;
        let mut rng = ChaCha12Rng::seed_from_u64(mix64(
            self.seed ^ BRIDGE_SALT ^ (self.grid_exp as i64 as u64),
        ));
        let half_sd = (self.dt / 4.0).sqrt();
        let n = self.n_steps();
        let mut increments = Vec::with_capacity(2 * n * self.dim);
        let mut xi = vec![0.0; self.dim];
        for k in 0..n {
            for (c, slot) in xi.iter_mut().enumerate() {
                let z: f64 = rng.sample(StandardNormal);
                *slot = quantize(z * half_sd, child_exp);
                let _ = c;
            }
            for c in 0..self.dim {
                increments.push(0.5 * self.increments[k * self.dim + c] + xi[c]);
            }
            for c in 0..self.dim {
                increments.push(0.5 * self.increments[k * self.dim + c] - xi[c]);
            }
        }
        Self {
            seed: self.seed,
            t0: self.t0,
            dt: self.dt / 2.0,
            dim: self.dim,
            grid_exp: child_exp,
            increments,
        }
    }

    /// Merge adjacent steps. Exact: coarse increments are the float sums of
    /// their halves, so `refine` then `coarsen` is the identity.
    pub fn coarsen(&self) -> Result<Self, SdeError> {
        let n = self.n_steps();
        if !n.is_multiple_of(2) {
            return Err(SdeError::OddSteps(n));
        }
        let mut increments = Vec::with_capacity(n / 2 * self.dim);
        for k in 0..n / 2 {
            for c in 0..self.dim {
                increments.push(
                    self.increments[2 * k * self.dim + c]
                        + self.increments[(2 * k + 1) * self.dim + c],
                );
            }
        }
        Ok(Self {
            seed: self.seed,
            t0: self.t0,
            dt: self.dt * 2.0,
            dim: self.dim,
            grid_exp: self.grid_exp + 1,
            increments,
        })
    }
}

type FieldFn = Arc<dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync>;

/// A diagonal-noise SDE `dx_i = f_i dt + γ_i dW_i`. The drift closure is
/// stored in the interpretation the equation was written in; converting the
/// spec to the other reading only flips the tag, and readers compose the
/// `±½ γ_i ∂γ_i` correction on the fly. A round trip is therefore bitwise
/// lossless.
#[derive(Clone)]
pub struct SdeSpec {
    dim: usize,
    written_in: Interpretation,
    interpretation: Interpretation,
    drift: FieldFn,
    diffusion: FieldFn,
    diffusion_partial: FieldFn,
}

impl SdeSpec {
    /// `diffusion_partial` must evaluate `∂γ_i/∂x_i` (diagonal noise only
    /// couples each component to its own Wiener channel).
    pub fn new(
        dim: usize,
        interpretation: Interpretation,
        drift: FieldFn,
        diffusion: FieldFn,
        diffusion_partial: FieldFn,
    ) -> Result<Self, SdeError> {
        if dim == 0 {
            return Err(SdeError::BadDim);
        }
        Ok(Self {
            dim,
            written_in: interpretation,
            interpretation,
            drift,
            diffusion,
            diffusion_partial,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn interpretation(&self) -> Interpretation {
        self.interpretation
    }

    pub fn to_ito(mut self) -> Self {
        self.interpretation = Interpretation::Ito;
        self
    }

    pub fn to_stratonovich(mut self) -> Self {
        self.interpretation = Interpretation::Stratonovich;
        self
    }

    /// Drift as read under the current tag.
    pub fn effective_drift(&self, t: f64, x: &[f64]) -> Result<Vec<f64>, SdeError> {
        if x.len() != self.dim {
            return Err(SdeError::Dimension {
                got: x.len(),
                want: self.dim,
            });
        }
        let mut g = vec![0.0; self.dim];
        let mut gp = vec![0.0; self.dim];
        let mut out = vec![0.0; self.dim];
        self.drift_into(self.interpretation, t, x, &mut g, &mut gp, &mut out);
        Ok(out)
    }

    fn drift_into(
        &self,
        target: Interpretation,
        t: f64,
        x: &[f64],
        g: &mut [f64],
        gp: &mut [f64],
        out: &mut [f64],
    ) {
        (self.drift)(t, x, out);
        if self.written_in != target {
            (self.diffusion)(t, x, g);
            (self.diffusion_partial)(t, x, gp);
            // Itô drift exceeds the Stratonovich drift by ½ γ ∂γ
            let s = match target {
                Interpretation::Ito => 0.5,
                Interpretation::Stratonovich => -0.5,
            };
            for i in 0..self.dim {
                out[i] += s * g[i] * gp[i];
            }
        }
    }
}

pub(crate) struct StepScratch {
    f: Vec<f64>,
    g: Vec<f64>,
    gp: Vec<f64>,
    xbar: Vec<f64>,
    f2: Vec<f64>,
    g2: Vec<f64>,
}

impl StepScratch {
    pub(crate) fn new(dim: usize) -> Self {
        Self {
            f: vec![0.0; dim],
            g: vec![0.0; dim],
            gp: vec![0.0; dim],
            xbar: vec![0.0; dim],
            f2: vec![0.0; dim],
            g2: vec![0.0; dim],
        }
    }
}

fn gate(spec: &SdeSpec, scheme: Scheme, needs: Interpretation) -> Result<(), SdeError> {
    if spec.interpretation != needs {
        return Err(SdeError::InterpretationMismatch {
            scheme,
            needs,
            got: spec.interpretation,
        });
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)] // one argument per term of the step equation
pub(crate) fn step_into(
    spec: &SdeSpec,
    scheme: Scheme,
    t: f64,
    x: &[f64],
    dw: &[f64],
    dt: f64,
    scr: &mut StepScratch,
    out: &mut [f64],
) -> Result<(), SdeError> {
    let d = spec.dim;
    match scheme {
        Scheme::EulerMaruyama => {
            gate(spec, scheme, Interpretation::Ito)?;
            spec.drift_into(
                Interpretation::Ito,
                t,
                x,
                &mut scr.g,
                &mut scr.gp,
                &mut scr.f,
            );
            (spec.diffusion)(t, x, &mut scr.g);
            for i in 0..d {
                out[i] = x[i] + scr.f[i] * dt + scr.g[i] * dw[i];
            }
        }
        Scheme::Milstein => {
            gate(spec, scheme, Interpretation::Ito)?;
            spec.drift_into(
                Interpretation::Ito,
                t,
                x,
                &mut scr.g,
                &mut scr.gp,
                &mut scr.f,
            );
            (spec.diffusion)(t, x, &mut scr.g);
            (spec.diffusion_partial)(t, x, &mut scr.gp);
            for i in 0..d {
                out[i] = x[i]
                    + scr.f[i] * dt
                    + scr.g[i] * dw[i]
                    + 0.5 * scr.g[i] * scr.gp[i] * (dw[i] * dw[i] - dt);
            }
        }
        Scheme::StratonovichHeun => {
            gate(spec, scheme, Interpretation::Stratonovich)?;
            spec.drift_into(
                Interpretation::Stratonovich,
                t,
                x,
                &mut scr.g,
                &mut scr.gp,
                &mut scr.f,
            );
            (spec.diffusion)(t, x, &mut scr.g);
            for i in 0..d {
                scr.xbar[i] = x[i] + scr.f[i] * dt + scr.g[i] * dw[i];
            }
            let tb = t + dt;
            spec.drift_into(
                Interpretation::Stratonovich,
                tb,
                &scr.xbar,
                &mut scr.g2,
                &mut scr.gp,
                &mut scr.f2,
            );
            (spec.diffusion)(tb, &scr.xbar, &mut scr.g2);
            for i in 0..d {
                out[i] =
                    x[i] + 0.5 * (scr.f[i] + scr.f2[i]) * dt + 0.5 * (scr.g[i] + scr.g2[i]) * dw[i];
            }
        }
    }
    Ok(())
}

fn step_alloc(
    spec: &SdeSpec,
    scheme: Scheme,
    t: f64,
    x: &[f64],
    dw: &[f64],
    dt: f64,
) -> Result<Vec<f64>, SdeError> {
    if x.len() != spec.dim {
        return Err(SdeError::Dimension {
            got: x.len(),
            want: spec.dim,
        });
    }
    if dw.len() != spec.dim {
        return Err(SdeError::Dimension {
            got: dw.len(),
            want: spec.dim,
        });
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(SdeError::BadStep(dt));
    }
    let mut scr = StepScratch::new(spec.dim);
    let mut out = vec![0.0; spec.dim];
    step_into(spec, scheme, t, x, dw, dt, &mut scr, &mut out)?;
    Ok(out)
}

pub fn em_step(
    spec: &SdeSpec,
    t: f64,
    x: &[f64],
    dw: &[f64],
    dt: f64,
) -> Result<Vec<f64>, SdeError> {
    step_alloc(spec, Scheme::EulerMaruyama, t, x, dw, dt)
}

pub fn milstein_step(
    spec: &SdeSpec,
    t: f64,
    x: &[f64],
    dw: &[f64],
    dt: f64,
) -> Result<Vec<f64>, SdeError> {
    step_alloc(spec, Scheme::Milstein, t, x, dw, dt)
}

pub fn heun_strat_step(
    spec: &SdeSpec,
    t: f64,
    x: &[f64],
    dw: &[f64],
    dt: f64,
) -> Result<Vec<f64>, SdeError> {
    step_alloc(spec, Scheme::StratonovichHeun, t, x, dw, dt)
}

/// Drive one path of the equation along a sampled Wiener path.
pub fn integrate_sde(
    spec: &SdeSpec,
    ic: &[f64],
    path: &WienerPath,
    scheme: Scheme,
) -> Result<Trajectory, SdeError> {
    if path.dim() != spec.dim {
        return Err(SdeError::Dimension {
            got: path.dim(),
            want: spec.dim,
        });
    }
    if ic.len() != spec.dim {
        return Err(SdeError::Dimension {
            got: ic.len(),
            want: spec.dim,
        });
    }
    if ic.iter().any(|v| !v.is_finite()) {
        return Err(SdeError::BadInitial);
    }
    let n = path.n_steps();
    let mut traj = Trajectory::with_capacity(spec.dim, n + 1);
    let mut x = ic.to_vec();
    let mut out = vec![0.0; spec.dim];
    let mut scr = StepScratch::new(spec.dim);
    traj.push(path.t0(), &x)
        .expect("fresh trajectory accepts the initial node");
    for k in 0..n {
        let t = path.t0() + k as f64 * path.dt();
        step_into(
            spec,
            scheme,
            t,
            &x,
            path.increment(k),
            path.dt(),
            &mut scr,
            &mut out,
        )?;
        let t_next = path.t0() + (k + 1) as f64 * path.dt();
        if out.iter().any(|v| !v.is_finite()) {
            return Err(SdeError::NonFinite { t: t_next });
        }
        traj.push(t_next, &out)
            .map_err(|_| SdeError::NonFinite { t: t_next })?;
        std::mem::swap(&mut x, &mut out);
    }
    Ok(traj)
}

/// Top with linear noise on the first component and additive noise on the
/// third: `γ = (x1, 0, 1)`. Written in the Itô sense.
pub fn euler_top_sde_a() -> SdeSpec {
    SdeSpec::new(
        3,
        Interpretation::Ito,
        Arc::new(|_t, x: &[f64], f: &mut [f64]| {
            f[0] = x[1] * x[2];
            f[1] = -x[0] * x[2];
            f[2] = x[0] * x[1];
        }),
        Arc::new(|_t, x: &[f64], g: &mut [f64]| {
            g[0] = x[0];
            g[1] = 0.0;
            g[2] = 1.0;
        }),
        Arc::new(|_t, _x: &[f64], gp: &mut [f64]| {
            gp[0] = 1.0;
            gp[1] = 0.0;
            gp[2] = 0.0;
        }),
    )
    .expect("dimension is static")
}

fn sqrt_gamma(x: f64) -> f64 {
    x.max(0.0).sqrt()
}

fn sqrt_gamma_partial(x: f64) -> f64 {
    if x > 0.0 {
        0.5 / x.sqrt()
    } else {
        0.0
    }
}

/// Square-root-process top: `γ_i = √max(x_i, 0)` on every component.
/// Written in the Itô sense; the Stratonovich reading shifts each drift
/// component by `-¼` wherever the state is positive.
pub fn euler_top_sde_b() -> SdeSpec {
    SdeSpec::new(
        3,
        Interpretation::Ito,
        Arc::new(|_t, x: &[f64], f: &mut [f64]| {
            f[0] = x[1] * x[2];
            f[1] = -x[0] * x[2];
            f[2] = x[0] * x[1];
        }),
        Arc::new(|_t, x: &[f64], g: &mut [f64]| {
            for i in 0..3 {
                g[i] = sqrt_gamma(x[i]);
            }
        }),
        Arc::new(|_t, x: &[f64], gp: &mut [f64]| {
            for i in 0..3 {
                gp[i] = sqrt_gamma_partial(x[i]);
            }
        }),
    )
    .expect("dimension is static")
}

/// Pendulum `(θ, ω)` on level `h` with square-root noise on both channels.
pub fn pendulum_sde(level: f64) -> Result<SdeSpec, SdeError> {
    if !(level.is_finite() && level > 0.0) {
        return Err(SdeError::BadLevel(level));
    }
    SdeSpec::new(
        2,
        Interpretation::Ito,
        Arc::new(move |_t, x: &[f64], f: &mut [f64]| {
            f[0] = x[1];
            f[1] = -2.0 * level * x[0].sin();
        }),
        Arc::new(|_t, x: &[f64], g: &mut [f64]| {
            g[0] = sqrt_gamma(x[0]);
            g[1] = sqrt_gamma(x[1]);
        }),
        Arc::new(|_t, x: &[f64], gp: &mut [f64]| {
            gp[0] = sqrt_gamma_partial(x[0]);
            gp[1] = sqrt_gamma_partial(x[1]);
        }),
    )
}

/// Paths per accumulation block. Fixing the block size (rather than letting
/// the thread pool pick it) keeps the floating-point reduction order, and
/// hence the ensemble output, independent of the number of worker threads.
pub const ENSEMBLE_CHUNK: usize = 64;

fn pair_index(dim: usize, i: usize, j: usize) -> usize {
    debug_assert!(i <= j);
    i * (2 * dim - i + 1) / 2 + (j - i)
}

/// Per-node first and second moments over an ensemble of paths.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    times: Vec<f64>,
    dim: usize,
    paths: usize,
    mean: Vec<f64>,
    second: Vec<f64>,
}

impl EnsembleStats {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn paths(&self) -> usize {
        self.paths
    }

    pub fn mean(&self, node: usize, c: usize) -> f64 {
        self.mean[node * self.dim + c]
    }

    /// Raw second moment `E[x_i x_j]`.
    pub fn second_moment(&self, node: usize, i: usize, j: usize) -> f64 {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        let npair = self.dim * (self.dim + 1) / 2;
        self.second[node * npair + pair_index(self.dim, a, b)]
    }

    /// Unbiased per-component variance.
    pub fn variance(&self, node: usize, c: usize) -> f64 {
        if self.paths < 2 {
            return 0.0;
        }
        let m = self.mean(node, c);
        let raw = (self.second_moment(node, c, c) - m * m).max(0.0);
        raw * self.paths as f64 / (self.paths as f64 - 1.0)
    }

    /// Half-width of the 95% normal confidence interval for the mean.
    pub fn ci95_half_width(&self, node: usize, c: usize) -> f64 {
        1.96 * (self.variance(node, c) / self.paths as f64).sqrt()
    }

    pub fn nearest_node(&self, t: f64) -> usize {
        let mut best = 0;
        let mut gap = f64::INFINITY;
        for (k, tk) in self.times.iter().enumerate() {
            let g = (tk - t).abs();
            if g < gap {
                gap = g;
                best = k;
            }
        }
        best
    }
}

struct Moments {
    sum: Vec<f64>,
    sumsq: Vec<f64>,
}

/// Integrate `n_paths` independent paths (seeds from the splitmix64 stream
/// at `base_seed`) and accumulate per-node moments. Paths are processed in
/// fixed blocks of [`ENSEMBLE_CHUNK`], blocks in parallel, block results
/// reduced in ascending order — output is bitwise reproducible for a given
/// `base_seed` no matter the thread count.
pub fn ensemble(
    spec: &SdeSpec,
    ic: &[f64],
    grid: &GridSpec,
    scheme: Scheme,
    base_seed: u64,
    n_paths: usize,
) -> Result<EnsembleStats, SdeError> {
    if n_paths == 0 {
        return Err(SdeError::NoPaths);
    }
    if ic.len() != spec.dim {
        return Err(SdeError::Dimension {
            got: ic.len(),
            want: spec.dim,
        });
    }
    let n_steps = grid.integer_steps().ok_or(SdeError::RaggedGrid {
        span: grid.t1 - grid.t0,
        dt: grid.dt,
    })?;
    let dt = (grid.t1 - grid.t0) / n_steps as f64;
    let dim = spec.dim;
    let npair = dim * (dim + 1) / 2;
    let n_nodes = n_steps + 1;

    let n_chunks = n_paths.div_ceil(ENSEMBLE_CHUNK);
    let partials: Result<Vec<Moments>, SdeError> = (0..n_chunks)
        .into_par_iter()
        .map(|ci| {
            let lo = ci * ENSEMBLE_CHUNK;
            let hi = ((ci + 1) * ENSEMBLE_CHUNK).min(n_paths);
            let mut acc = Moments {
                sum: vec![0.0; n_nodes * dim],
                sumsq: vec![0.0; n_nodes * npair],
            };
            for p in lo..hi {
                let seed = derive_path_seed(base_seed, p as u64);
                let path = WienerPath::generate(seed, grid.t0, dt, dim, n_steps)?;
                let tr = integrate_sde(spec, ic, &path, scheme)?;
                for node in 0..n_nodes {
                    let s = tr.state(node);
                    for c in 0..dim {
                        acc.sum[node * dim + c] += s[c];
                    }
                    let base = node * npair;
                    for i in 0..dim {
                        for j in i..dim {
                            acc.sumsq[base + pair_index(dim, i, j)] += s[i] * s[j];
                        }
                    }
                }
            }
            Ok(acc)
        })
        .collect();
    let partials = partials?;

    let mut sum = vec![0.0; n_nodes * dim];
    let mut sumsq = vec![0.0; n_nodes * npair];
    for part in &partials {
        for (dst, src) in sum.iter_mut().zip(&part.sum) {
            *dst += src;
        }
        for (dst, src) in sumsq.iter_mut().zip(&part.sumsq) {
            *dst += src;
        }
    }

    let m = n_paths as f64;
    for v in &mut sum {
        *v /= m;
    }
    for v in &mut sumsq {
        *v /= m;
    }
    let times: Vec<f64> = (0..n_nodes).map(|k| grid.t0 + k as f64 * dt).collect();
    Ok(EnsembleStats {
        times,
        dim,
        paths: n_paths,
        mean: sum,
        second: sumsq,
    })
}
