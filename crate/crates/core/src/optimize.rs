//! Derivative-free maximisation over measurement angles and sharpness.
//!
//! Restarts are independent: restart `r` draws its starting point from ChaCha stream
//! `r` of the configured seed, so results do not depend on scheduling and a larger
//! restart budget only ever adds candidates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bell::{BellFunctional, CompiledFunctional};
use crate::bloch::{fast_value_chain, BlochTensor, Vec3, MAX_FAST_SETTINGS};
use crate::error::{Error, Result};
use crate::measure::Direction;
use crate::seqchain::{value_vector, Scenario, ValueVector};
use crate::states::StateSpec;

/// Most Bobs the fast evaluator handles.
pub const MAX_BOBS: usize = 6;

/// Environment variable holding the default worker-thread count for restarts.
pub const THREADS_ENV: &str = "SEQSHARE_THREADS";

/// Sizes the global restart pool from [`THREADS_ENV`] when set; returns the count in use.
pub fn init_threads_from_env() -> Result<usize> {
    let requested = match std::env::var(THREADS_ENV) {
        Ok(v) => Some(
            v.trim()
                .parse::<usize>()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| {
                    Error::InvalidParameter(format!("{THREADS_ENV}={v} is not a positive integer"))
                })?,
        ),
        Err(_) => None,
    };
    #[cfg(feature = "parallel")]
    {
        if let Some(n) = requested {
            // a pool that already exists keeps its size
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
        Ok(rayon::current_num_threads())
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = requested;
        Ok(1)
    }
}

/// How independent restarts are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    /// Rayon thread pool; identical to `Sequential` without the `parallel` feature.
    #[default]
    Parallel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub restarts: usize,
    /// Stop when the spread of objective values over the simplex falls below this.
    pub simplex_tol: f64,
    pub max_iters: usize,
    pub seed: u64,
    pub lambda_bounds: (f64, f64),
    /// A sharing margin must exceed this to count as feasible.
    pub feasibility_eps: f64,
    pub execution: Execution,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 400,
            simplex_tol: 1e-7,
            max_iters: 5000,
            seed: 0,
            lambda_bounds: (0.02, 1.0),
            feasibility_eps: 1e-4,
            execution: Execution::default(),
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidParameter(
                "restarts must be at least 1".into(),
            ));
        }
        let positive = |x: f64| x > 0.0;
        if !positive(self.simplex_tol) || !positive(self.feasibility_eps) || self.max_iters == 0 {
            return Err(Error::InvalidParameter(
                "tolerances and iteration limits must be positive".into(),
            ));
        }
        let (lo, hi) = self.lambda_bounds;
        if !(lo > 0.0 && lo < hi && hi <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "bad sharpness bounds ({lo}, {hi})"
            )));
        }
        Ok(())
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Outcome of one local search.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalOptimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iters: usize,
    pub evals: usize,
    /// `false` when `max_iters` ran out before the simplex collapsed.
    pub converged: bool,
}

/// Optional per-coordinate clamp.
pub type Bounds = [Option<(f64, f64)>];

fn clamp_into(x: &mut [f64], bounds: &Bounds) {
    for (xi, b) in x.iter_mut().zip(bounds) {
        if let Some((lo, hi)) = *b {
            *xi = xi.clamp(lo, hi);
        }
    }
}

/// Maximises `objective` from `x0` with Nelder–Mead.
///
/// Uses the dimension-adaptive coefficients of Gao and Han (2012). After the
/// simplex collapses a fresh one is built around the best vertex, up to a few
/// times, to get past premature collapse on non-smooth objectives.
pub fn nelder_mead<F>(
    objective: F,
    x0: &[f64],
    step: &[f64],
    bounds: &Bounds,
    cfg: &OptimizerConfig,
) -> LocalOptimum
where
    F: Fn(&[f64]) -> f64,
{
    const MAX_REBUILDS: usize = 8;
    let mut best_x = x0.to_vec();
    clamp_into(&mut best_x, bounds);
    let mut best_f = objective(&best_x);
    let (mut iters, mut evals, mut converged) = (0, 1, false);
    let mut scale = 1.0;
    for _ in 0..MAX_REBUILDS {
        let budget = cfg.max_iters.saturating_sub(iters);
        if budget == 0 {
            converged = false;
            break;
        }
        let step: Vec<f64> = step.iter().map(|s| s * scale).collect();
        let run = nelder_mead_once(&objective, &best_x, &step, bounds, cfg.simplex_tol, budget);
        iters += run.iters;
        evals += run.evals;
        converged = run.converged;
        let gain = run.value - best_f;
        if run.value > best_f {
            best_f = run.value;
            best_x = run.x;
        }
        if !converged || gain <= cfg.simplex_tol {
            break;
        }
        scale *= 0.5;
    }
    LocalOptimum {
        x: best_x,
        value: best_f,
        iters,
        evals,
        converged,
    }
}

fn nelder_mead_once<F>(
    objective: &F,
    x0: &[f64],
    step: &[f64],
    bounds: &Bounds,
    tol: f64,
    max_iters: usize,
) -> LocalOptimum
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    let nf = n as f64;
    let (alpha, gamma, rho, sigma) = if n >= 2 {
        (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf)
    } else {
        (1.0, 2.0, 0.5, 0.5)
    };
    // work with a minimiser of -objective
    let eval = |x: &[f64]| -> f64 {
        let v = objective(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            -v
        }
    };
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += step[i];
        clamp_into(&mut p, bounds);
        if p[i] == x0[i] {
            p[i] -= step[i];
            clamp_into(&mut p, bounds);
        }
        simplex.push(p);
    }
    let mut fvals: Vec<f64> = simplex.iter().map(|p| eval(p)).collect();
    let mut evals = n + 1;
    let mut order: Vec<usize> = (0..=n).collect();
    let mut centroid = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut trial2 = vec![0.0; n];
    let mut iters = 0;
    let mut converged = false;

    while iters < max_iters {
        order.sort_by(|&a, &b| fvals[a].total_cmp(&fvals[b]).then(a.cmp(&b)));
        let (best, worst, second) = (order[0], order[n], order[n - 1]);
        if fvals[worst] - fvals[best] <= tol {
            converged = true;
            break;
        }
        iters += 1;
        centroid.iter_mut().for_each(|c| *c = 0.0);
        for &idx in &order[..n] {
            for (c, x) in centroid.iter_mut().zip(&simplex[idx]) {
                *c += x;
            }
        }
        centroid.iter_mut().for_each(|c| *c /= nf);

        let towards = |out: &mut Vec<f64>, coef: f64, from: &[f64]| {
            for j in 0..n {
                out[j] = centroid[j] + coef * (from[j] - centroid[j]);
            }
            clamp_into(out, bounds);
        };

        towards(&mut trial, -alpha, &simplex[worst]);
        let fr = eval(&trial);
        evals += 1;
        if fr < fvals[best] {
            towards(&mut trial2, -alpha * gamma, &simplex[worst]);
            let fe = eval(&trial2);
            evals += 1;
            if fe < fr {
                simplex[worst].copy_from_slice(&trial2);
                fvals[worst] = fe;
            } else {
                simplex[worst].copy_from_slice(&trial);
                fvals[worst] = fr;
            }
            continue;
        }
        if fr < fvals[second] {
            simplex[worst].copy_from_slice(&trial);
            fvals[worst] = fr;
            continue;
        }
        // contraction: outside if the reflection helped at all, inside otherwise
        let (coef, target) = if fr < fvals[worst] {
            (-alpha * rho, fr)
        } else {
            (rho, fvals[worst])
        };
        towards(&mut trial2, coef, &simplex[worst]);
        let fc = eval(&trial2);
        evals += 1;
        if fc <= target {
            simplex[worst].copy_from_slice(&trial2);
            fvals[worst] = fc;
            continue;
        }
        let anchor = simplex[best].clone();
        for &idx in &order[1..] {
            for j in 0..n {
                simplex[idx][j] = anchor[j] + sigma * (simplex[idx][j] - anchor[j]);
            }
            clamp_into(&mut simplex[idx], bounds);
            fvals[idx] = eval(&simplex[idx]);
        }
        evals += n;
    }
    let best = (0..=n)
        .min_by(|&a, &b| fvals[a].total_cmp(&fvals[b]).then(a.cmp(&b)))
        .expect("non-empty");
    LocalOptimum {
        x: simplex[best].clone(),
        value: -fvals[best],
        iters,
        evals,
        converged,
    }
}

/// Best of several local searches plus a per-restart record.
#[derive(Debug, Clone, PartialEq)]
pub struct MultistartResult {
    pub best: LocalOptimum,
    pub best_restart: usize,
    /// Final objective value of every restart, by restart index.
    pub values: Vec<f64>,
}

/// The RNG for restart `index` under `seed`.
pub fn restart_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Runs `cfg.restarts` local searches, restart `r` starting from `start(r, rng_r)`.
pub fn multistart<F, S>(
    objective: F,
    start: S,
    step: &[f64],
    bounds: &Bounds,
    cfg: &OptimizerConfig,
) -> MultistartResult
where
    F: Fn(&[f64]) -> f64 + Sync,
    S: Fn(usize, &mut ChaCha8Rng) -> Vec<f64> + Sync,
{
    let run = |r: usize| {
        let mut rng = restart_rng(cfg.seed, r);
        let x0 = start(r, &mut rng);
        nelder_mead(&objective, &x0, step, bounds, cfg)
    };
    let results: Vec<LocalOptimum> = match cfg.execution {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..cfg.restarts).into_par_iter().map(run).collect()
        }
        _ => (0..cfg.restarts).map(run).collect(),
    };
    // max by value, ties to the lowest restart index
    let mut best_restart = 0;
    for (r, res) in results.iter().enumerate() {
        if res.value > results[best_restart].value {
            best_restart = r;
        }
    }
    let values = results.iter().map(|r| r.value).collect();
    let best = results
        .into_iter()
        .nth(best_restart)
        .expect("at least one restart");
    MultistartResult {
        best,
        best_restart,
        values,
    }
}

/// Parameter layout of a sequential scenario:
/// `[alice (theta, phi) x n_alice][bob_1 (theta, phi) x n_bob]...[bob_k ...][lambda_1 .. lambda_{k-1}]`.
///
/// Free sharpness values are the non-fixed ones among the first `k - 1` Bobs.
#[derive(Debug, Clone)]
pub struct ScenarioLayout {
    pub state: StateSpec,
    pub functional: BellFunctional,
    compiled: CompiledFunctional,
    initial: BlochTensor,
    pub bobs: usize,
    /// `Some(l)` pins Bob i's sharpness; the last Bob is always pinned to 1.
    pub fixed_lambdas: Vec<Option<f64>>,
}

impl ScenarioLayout {
    pub fn new(state: StateSpec, functional: BellFunctional, bobs: usize) -> Result<Self> {
        let mut fixed = vec![None; bobs];
        if let Some(last) = fixed.last_mut() {
            *last = Some(1.0);
        }
        Self::with_fixed_lambdas(state, functional, fixed)
    }

    pub fn with_fixed_lambdas(
        state: StateSpec,
        functional: BellFunctional,
        fixed: Vec<Option<f64>>,
    ) -> Result<Self> {
        state.validate()?;
        functional.validate()?;
        let bobs = fixed.len();
        if bobs == 0 || bobs > MAX_BOBS {
            return Err(Error::InvalidParameter(format!(
                "Bob count must be in 1..={MAX_BOBS}"
            )));
        }
        if functional.n_alice() > MAX_FAST_SETTINGS || functional.n_bob() > MAX_FAST_SETTINGS {
            return Err(Error::InvalidParameter(format!(
                "the optimiser handles at most {MAX_FAST_SETTINGS} settings per party"
            )));
        }
        if fixed.last() != Some(&Some(1.0)) {
            return Err(Error::InvalidParameter("the last Bob must be sharp".into()));
        }
        if let Some(l) = fixed.iter().flatten().find(|&&l| !(l > 0.0 && l <= 1.0)) {
            return Err(Error::InvalidParameter(format!(
                "sharpness {l} outside (0, 1]"
            )));
        }
        Ok(Self {
            initial: BlochTensor::from_spec(&state),
            compiled: functional.compile(),
            state,
            functional,
            bobs,
            fixed_lambdas: fixed,
        })
    }

    fn n_alice(&self) -> usize {
        self.compiled.n_alice
    }

    fn n_bob(&self) -> usize {
        self.compiled.n_bob
    }

    fn angle_count(&self) -> usize {
        2 * (self.n_alice() + self.bobs * self.n_bob())
    }

    fn free_lambdas(&self) -> usize {
        self.fixed_lambdas.iter().filter(|l| l.is_none()).count()
    }

    pub fn dim(&self) -> usize {
        self.angle_count() + self.free_lambdas()
    }

    pub fn bounds(&self, cfg: &OptimizerConfig) -> Vec<Option<(f64, f64)>> {
        let mut b = vec![None; self.angle_count()];
        b.extend(std::iter::repeat_n(
            Some(cfg.lambda_bounds),
            self.free_lambdas(),
        ));
        b
    }

    pub fn step(&self) -> Vec<f64> {
        let mut s = vec![0.5; self.angle_count()];
        s.extend(std::iter::repeat_n(0.1, self.free_lambdas()));
        s
    }

    /// Uniform angles; free sharpness values in `[0.6, 0.95]`.
    pub fn random_start(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.dim());
        for _ in 0..(self.angle_count() / 2) {
            x.push(rng.random_range(0.0..std::f64::consts::PI));
            x.push(rng.random_range(0.0..std::f64::consts::TAU));
        }
        for _ in 0..self.free_lambdas() {
            x.push(rng.random_range(0.6..0.95));
        }
        x
    }

    fn lambdas_into(&self, x: &[f64], out: &mut [f64; MAX_BOBS]) {
        let mut free = x[self.angle_count()..].iter();
        for (i, fixed) in self.fixed_lambdas.iter().enumerate() {
            out[i] = fixed.unwrap_or_else(|| *free.next().expect("layout"));
        }
    }

    /// Per-Bob functional values at parameter vector `x`, via the Pauli-basis path.
    pub fn fast_values(&self, x: &[f64], out: &mut [f64; MAX_BOBS]) {
        let unit = |t: f64, p: f64| -> Vec3 {
            let (st, ct) = t.sin_cos();
            let (sp, cp) = p.sin_cos();
            [st * cp, st * sp, ct]
        };
        let (na, nb) = (self.n_alice(), self.n_bob());
        let mut alice = [[0.0; 3]; MAX_FAST_SETTINGS];
        for u in 0..na {
            alice[u] = unit(x[2 * u], x[2 * u + 1]);
        }
        let mut bobs = [[[0.0; 3]; MAX_FAST_SETTINGS]; MAX_BOBS];
        for (i, bob) in bobs.iter_mut().enumerate().take(self.bobs) {
            let off = 2 * (na + i * nb);
            for v in 0..nb {
                bob[v] = unit(x[off + 2 * v], x[off + 2 * v + 1]);
            }
        }
        let mut lambdas = [1.0; MAX_BOBS];
        self.lambdas_into(x, &mut lambdas);
        let refs: [&[Vec3]; MAX_BOBS] = std::array::from_fn(|i| &bobs[i][..nb]);
        fast_value_chain(
            &self.compiled,
            &self.initial,
            &alice[..na],
            &refs[..self.bobs],
            &lambdas[..self.bobs],
            &mut out[..self.bobs],
        );
    }

    /// `min_i (value_i - bound)`.
    pub fn margin(&self, x: &[f64]) -> f64 {
        let mut v = [0.0; MAX_BOBS];
        self.fast_values(x, &mut v);
        v[..self.bobs]
            .iter()
            .fold(f64::INFINITY, |m, &vi| m.min(vi - self.compiled.bound))
    }

    pub fn scenario(&self, x: &[f64]) -> Scenario {
        let (na, nb) = (self.n_alice(), self.n_bob());
        let dir = |k: usize| Direction::new(x[2 * k], x[2 * k + 1]);
        let mut lambdas = [1.0; MAX_BOBS];
        self.lambdas_into(x, &mut lambdas);
        Scenario {
            state: self.state,
            functional: self.functional.clone(),
            alice_dirs: (0..na).map(dir).collect(),
            bob_dirs: (0..self.bobs)
                .map(|i| (0..nb).map(|v| dir(na + i * nb + v)).collect())
                .collect(),
            lambdas: lambdas[..self.bobs].to_vec(),
        }
    }

    /// Inverse of [`ScenarioLayout::scenario`] for a scenario of matching shape.
    pub fn encode(&self, s: &Scenario) -> Result<Vec<f64>> {
        s.validate()?;
        if s.bob_count() != self.bobs || s.alice_dirs.len() != self.n_alice() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} Bobs", self.bobs),
                got: format!("{} Bobs", s.bob_count()),
            });
        }
        let mut x = Vec::with_capacity(self.dim());
        for d in s.alice_dirs.iter().chain(s.bob_dirs.iter().flatten()) {
            x.push(d.theta);
            x.push(d.phi);
        }
        for (i, fixed) in self.fixed_lambdas.iter().enumerate() {
            if fixed.is_none() {
                x.push(s.lambdas[i]);
            }
        }
        Ok(x)
    }
}

/// Result of a k-Bob sharing search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharingResult {
    pub k: usize,
    /// `min_i (value_i - bound)` of the best scenario, recomputed with density matrices.
    pub margin: f64,
    pub feasible: bool,
    pub best_scenario: Scenario,
    pub values: ValueVector,
    pub restarts: usize,
    /// Restarts whose local optimum was a feasible witness.
    pub feasible_restarts: usize,
}

/// Largest achievable `min_i (value_i - bound)` over all settings and the first
/// `k - 1` sharpness values.
pub fn sharing_margin(
    state: StateSpec,
    f: &BellFunctional,
    k: usize,
    cfg: &OptimizerConfig,
) -> Result<SharingResult> {
    if k == 0 {
        return Err(Error::InvalidParameter(
            "at least one Bob is required".into(),
        ));
    }
    solve_sharing(ScenarioLayout::new(state, f.clone(), k)?, cfg)
}

/// As [`sharing_margin`] with some sharpness values pinned (`None` = free).
pub fn sharing_margin_fixed(
    state: StateSpec,
    f: &BellFunctional,
    fixed_lambdas: Vec<Option<f64>>,
    cfg: &OptimizerConfig,
) -> Result<SharingResult> {
    solve_sharing(
        ScenarioLayout::with_fixed_lambdas(state, f.clone(), fixed_lambdas)?,
        cfg,
    )
}

pub fn solve_sharing(layout: ScenarioLayout, cfg: &OptimizerConfig) -> Result<SharingResult> {
    cfg.validate()?;
    let bounds = layout.bounds(cfg);
    let ms = multistart(
        |x| layout.margin(x),
        |_, rng| layout.random_start(rng),
        &layout.step(),
        &bounds,
        cfg,
    );
    let scenario = layout.scenario(&ms.best.x);
    let values = value_vector(&scenario)?;
    let bound = layout.functional.bound();
    let margin = values
        .values
        .iter()
        .fold(f64::INFINITY, |m, &v| m.min(v - bound));
    let feasible = margin > cfg.feasibility_eps && values.all_violate();
    Ok(SharingResult {
        k: layout.bobs,
        margin,
        feasible,
        best_scenario: scenario,
        values,
        restarts: cfg.restarts,
        feasible_restarts: ms
            .values
            .iter()
            .filter(|&&v| v > cfg.feasibility_eps)
            .count(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxBobsResult {
    pub max_bobs: usize,
    /// One entry per tested k, ending with the first infeasible one (if any).
    pub per_k: Vec<SharingResult>,
}

/// Largest `k <= k_max` for which k Bobs can all violate; stops at the first failure.
pub fn max_bobs(
    state: StateSpec,
    f: &BellFunctional,
    cfg: &OptimizerConfig,
    k_max: usize,
) -> Result<MaxBobsResult> {
    let mut per_k = Vec::new();
    let mut best = 0;
    for k in 1..=k_max {
        let res = sharing_margin(state, f, k, cfg)?;
        let ok = res.feasible;
        per_k.push(res);
        if !ok {
            break;
        }
        best = k;
    }
    Ok(MaxBobsResult {
        max_bobs: best,
        per_k,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstrainedResult {
    pub value2: f64,
    pub value1: f64,
    pub residual: f64,
    pub scenario: Scenario,
}

/// Largest Bob-2 value given that Bob 1 sits exactly at `target1`.
///
/// The equality is imposed by an exterior quadratic penalty whose weight is raised
/// stage by stage, each stage restarting from the previous optimum. The template
/// supplies the state and functional and, as restart 0, its own settings.
pub fn max_bob2_given_bob1(
    template: &Scenario,
    target1: f64,
    cfg: &OptimizerConfig,
) -> Result<ConstrainedResult> {
    const WEIGHTS: [f64; 5] = [1e1, 1e2, 1e3, 1e4, 1e5];
    const MAX_RESIDUAL: f64 = 1e-3;
    cfg.validate()?;
    template.validate()?;
    if template.bob_count() != 2 {
        return Err(Error::InvalidParameter(
            "the template must have exactly two Bobs".into(),
        ));
    }
    let layout = ScenarioLayout::new(template.state, template.functional.clone(), 2)?;
    let bounds = layout.bounds(cfg);
    let step = layout.step();
    let seed_x = layout.encode(template)?;

    let staged = |x0: Vec<f64>| -> LocalOptimum {
        let mut x = x0;
        let mut last = None;
        for (stage, &mu) in WEIGHTS.iter().enumerate() {
            let penalised = |p: &[f64]| {
                let mut v = [0.0; MAX_BOBS];
                layout.fast_values(p, &mut v);
                v[1] - mu * (v[0] - target1).powi(2)
            };
            let scale = 0.5f64.powi(stage as i32);
            let st: Vec<f64> = step.iter().map(|s| s * scale).collect();
            let res = nelder_mead(penalised, &x, &st, &bounds, cfg);
            x = res.x.clone();
            last = Some(res);
        }
        last.expect("stages")
    };
    let run = |r: usize| -> LocalOptimum {
        let mut rng = restart_rng(cfg.seed, r);
        let x0 = if r == 0 {
            seed_x.clone()
        } else {
            layout.random_start(&mut rng)
        };
        staged(x0)
    };
    let results: Vec<LocalOptimum> = match cfg.execution {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..cfg.restarts).into_par_iter().map(run).collect()
        }
        _ => (0..cfg.restarts).map(run).collect(),
    };

    let mut best: Option<ConstrainedResult> = None;
    let mut best_residual = f64::INFINITY;
    for res in results {
        let scenario = layout.scenario(&res.x);
        let vals = value_vector(&scenario)?;
        let residual = (vals.values[0] - target1).abs();
        best_residual = best_residual.min(residual);
        if residual >= MAX_RESIDUAL {
            continue;
        }
        if best.as_ref().is_none_or(|b| vals.values[1] > b.value2) {
            best = Some(ConstrainedResult {
                value2: vals.values[1],
                value1: vals.values[0],
                residual,
                scenario,
            });
        }
    }
    best.ok_or(Error::Infeasible(best_residual))
}
