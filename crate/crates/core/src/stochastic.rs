//! Stochastic greedy runners over finite sums.
//!
//! * ASJ: Jones steps on a sampled minibatch average.
//! * ASFW: Frank-Wolfe steps on a minibatch gradient.
//! * ARSFW: Frank-Wolfe steps on an accumulated weighted gradient sum plus
//!   the regularizer `Phi(w) = |w - w_1|^2 / 2`.
//!
//! All runners are 1-based: record `k` holds `w_k` together with the schedule
//! values of iteration `k`.

use rand::Rng as _;

use crate::atoms::{project_ball, AtomSet, Oracle, OracleMode};
use crate::error::{check_dim, Error, Result};
use crate::greedy::{jones_step, jones_step_joint};
use crate::objective::{duality_gap, FiniteSumObjective, Objective};
use crate::point::Point;
use crate::recurrence::compute_k;
use crate::rng::{Rng, SAMPLING_STREAM};
use crate::schedule::StochasticSchedules;
use crate::trace::{Record, Trace, TraceMeta, WeightTracker};

/// Inner solve of an ASJ iteration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InnerMode {
    /// `(eta, d)` minimized jointly and exactly.
    ExactJoint,
    /// Schedule step size; atom chosen within `eta_k eps_k`.
    FixedEta,
}

impl std::str::FromStr for InnerMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact_joint" => Ok(InnerMode::ExactJoint),
            "fixed_eta" => Ok(InnerMode::FixedEta),
            other => Err(Error::InvalidInput(format!("unknown inner mode `{other}`"))),
        }
    }
}

/// Shared settings of a stochastic run.
#[derive(Clone, Debug)]
pub struct StochasticRun {
    pub schedules: StochasticSchedules,
    pub iterations: u64,
    pub seed: u64,
    pub oracle: OracleMode,
    pub f_star: Option<f64>,
    pub problem: String,
}

impl StochasticRun {
    pub fn new(schedules: StochasticSchedules, iterations: u64, seed: u64) -> Self {
        StochasticRun {
            schedules,
            iterations,
            seed,
            oracle: OracleMode::Exact,
            f_star: None,
            problem: String::new(),
        }
    }

    pub fn with_f_star(mut self, f_star: Option<f64>) -> Self {
        self.f_star = f_star;
        self
    }

    pub fn with_oracle(mut self, mode: OracleMode) -> Self {
        self.oracle = mode;
        self
    }

    pub fn with_problem(mut self, name: impl Into<String>) -> Self {
        self.problem = name.into();
        self
    }

    fn validate(&self, fsum: &FiniteSumObjective, atoms: &AtomSet, w1: &Point) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidInput("iteration count must be >= 1".into()));
        }
        self.schedules.validate()?;
        check_dim(atoms.dim(), fsum.dim())?;
        check_dim(atoms.dim(), w1.dim())
    }

    fn meta(&self, algorithm: &str) -> TraceMeta {
        TraceMeta {
            problem: self.problem.clone(),
            algorithm: algorithm.into(),
            seed: Some(self.seed),
            schedules: self.schedules.ids(),
            base: 1,
        }
    }
}

/// `b` indices drawn independently and uniformly from `0..n`.
pub fn sample_indices(rng: &mut Rng, n: usize, b: usize) -> Vec<usize> {
    (0..b).map(|_| rng.random_range(0..n)).collect()
}

/// Running `sum_i weight_i w_i / sum_i weight_i`.
#[derive(Clone, Debug)]
struct WeightedAverage {
    sum: Point,
    total: f64,
}

impl WeightedAverage {
    fn new(dim: usize) -> Self {
        WeightedAverage {
            sum: Point::zeros(dim),
            total: 0.0,
        }
    }

    fn push(&mut self, weight: f64, w: &Point) {
        self.sum.axpy(weight, w);
        self.total += weight;
    }

    fn value(&self) -> Option<Point> {
        (self.total > 0.0).then(|| self.sum.scale(1.0 / self.total))
    }
}

#[allow(clippy::too_many_arguments)]
fn push_record(
    trace: &mut Trace,
    fsum: &FiniteSumObjective,
    atoms: &AtomSet,
    run: &StochasticRun,
    k: u64,
    eta: f64,
    eps: f64,
    batch: Option<usize>,
    sigma: Option<f64>,
    w: &Point,
    avg: &WeightedAverage,
) -> Result<()> {
    let f_w = fsum.value(w);
    trace.records.push(Record {
        k,
        eta,
        eps,
        batch,
        sigma,
        f_w,
        f_avg: avg.value().map(|a| fsum.value(&a)),
        gap: duality_gap(fsum, w, atoms)?,
        err: run.f_star.map(|fs| f_w - fs),
    });
    trace.iterates.push(w.clone());
    Ok(())
}

/// Approximate stochastic Jones over a finite atom set.
///
/// The running average weights iterates by the step size actually taken.
pub fn asj_run(
    fsum: &FiniteSumObjective,
    atoms: &AtomSet,
    w1: Point,
    run: &StochasticRun,
    inner: InnerMode,
) -> Result<Trace> {
    if atoms.is_ball() {
        return Err(Error::UnsupportedDomain(
            "stochastic Jones needs a finite atom set".into(),
        ));
    }
    run.validate(fsum, atoms, &w1)?;
    let mut rng = Rng::with_stream(run.seed, SAMPLING_STREAM);
    let mut oracle = Oracle::for_mode(run.oracle, run.seed);
    let mut tracker = WeightTracker::start(atoms, &w1);
    let mut trace = Trace {
        meta: run.meta(match inner {
            InnerMode::ExactJoint => "asj(exact_joint)",
            InnerMode::FixedEta => "asj(fixed_eta)",
        }),
        weights: tracker.as_ref().map(|_| Vec::new()),
        ..Trace::default()
    };
    let mut avg = WeightedAverage::new(w1.dim());
    let mut w = w1;
    for k in 1..=run.iterations {
        let b = run.schedules.batch(k);
        let eps = run.schedules.eps(k);
        let batch = fsum.minibatch(sample_indices(&mut rng, fsum.len(), b));
        let out = match inner {
            InnerMode::ExactJoint => jones_step_joint(&batch, atoms, &w, 0.0, &mut oracle)?,
            InnerMode::FixedEta => {
                jones_step(&batch, atoms, &w, run.schedules.eta(k), eps, &mut oracle)?
            }
        };
        avg.push(out.eta, &w);
        if avg.total == 0.0 {
            // no step taken yet; report the current iterate
            avg.push(f64::MIN_POSITIVE, &w);
        }
        push_record(
            &mut trace, fsum, atoms, run, k, out.eta, eps, Some(b), None, &w, &avg,
        )?;
        if let (Some(t), Some(ws)) = (tracker.as_mut(), trace.weights.as_mut()) {
            ws.push(t.current().to_vec());
            if let Some(j) = out.atom {
                t.step(out.eta, j);
            }
        }
        w = out.w_next;
    }
    Ok(trace)
}

/// Approximate stochastic Frank-Wolfe.
///
/// The oracle sees the minibatch gradient; the recorded gap uses the full one.
pub fn asfw_run(
    fsum: &FiniteSumObjective,
    atoms: &AtomSet,
    w1: Point,
    run: &StochasticRun,
) -> Result<Trace> {
    run.validate(fsum, atoms, &w1)?;
    let mut rng = Rng::with_stream(run.seed, SAMPLING_STREAM);
    let mut oracle = Oracle::for_mode(run.oracle, run.seed);
    let mut trace = Trace {
        meta: run.meta("asfw"),
        ..Trace::default()
    };
    let mut avg = WeightedAverage::new(w1.dim());
    let mut w = w1;
    for k in 1..=run.iterations {
        let b = run.schedules.batch(k);
        let eta = run.schedules.eta(k);
        let eps = run.schedules.eps(k);
        let batch = fsum.minibatch(sample_indices(&mut rng, fsum.len(), b));
        let d = atoms.approx_lmo(&batch.gradient(&w), eps, &mut oracle)?;
        avg.push(eta, &w);
        push_record(
            &mut trace, fsum, atoms, run, k, eta, eps, Some(b), None, &w, &avg,
        )?;
        w = w.toward(&d, eta);
    }
    Ok(trace)
}

/// `<E[d], grad f(w)> - min_S <d, grad f(w)>` where `E[d]` averages the
/// exact per-component oracle answers (single-sample ASFW at `w`).
pub fn expected_lmo_violation(fsum: &FiniteSumObjective, atoms: &AtomSet, w: &Point) -> Result<f64> {
    let mean_d = expected_direction(fsum, atoms, w)?;
    let g = fsum.gradient(w);
    let (_, min) = atoms.lmo(&g)?;
    Ok(mean_d.dot(&g) - min)
}

/// Mean of the exact oracle answers over all single-component gradients.
pub fn expected_direction(fsum: &FiniteSumObjective, atoms: &AtomSet, w: &Point) -> Result<Point> {
    check_dim(atoms.dim(), w.dim())?;
    let mut mean = Point::zeros(w.dim());
    for c in fsum.components() {
        let (d, _) = atoms.lmo(&c.gradient(w))?;
        mean.axpy(1.0, &d);
    }
    Ok(mean.scale(1.0 / fsum.len() as f64))
}

/// How the gradient weight `sigma_k` is set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SigmaMode {
    /// `sigma_k = c eta_k^(3/2)`
    Varying,
    /// `sigma_k = c / t^(3/4)` for horizon `t`.
    Fixed { horizon: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArsfwParams {
    /// `eta_k = k^(-p)`
    pub p: f64,
    pub c: f64,
    pub lambda: f64,
}

/// Replay data of a regularized run, enough to rebuild `F_k` and `w*_k`.
#[derive(Clone, Debug)]
pub struct ArsfwReplay {
    pub w1: Point,
    pub rho: f64,
    pub r2: f64,
    pub lipschitz: f64,
    pub k_constant: f64,
    pub etas: Vec<f64>,
    pub sigmas: Vec<f64>,
    /// `g_k = grad f_{i_k}(w_k)`
    pub gradients: Vec<Point>,
    /// `gbar_k = sum_{i<k} sigma_i g_i`, as maintained by the runner.
    pub g_bars: Vec<Point>,
    /// `F_k(w_k) - F_k(w*_k)` on ball domains.
    pub proxy_errors: Option<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct ArsfwRun {
    pub trace: Trace,
    pub replay: ArsfwReplay,
    pub atoms: AtomSet,
}

/// `R^2 = max_W Phi - Phi(w_1)` as used by the runner: `(2r)^2 / 2` on a ball,
/// the largest `Phi(atom)` on a finite set.
pub fn regularizer_range(atoms: &AtomSet, w1: &Point) -> f64 {
    match atoms {
        AtomSet::Ball { radius, .. } => 2.0 * radius * radius,
        AtomSet::Finite(list) => list
            .iter()
            .map(|a| 0.5 * a.dist(w1).powi(2))
            .fold(0.0, f64::max),
    }
}

/// Approximate regularized stochastic Frank-Wolfe with `Phi(w) = |w - w1|^2/2`
/// (`rho = 1`), `w1` the default start of the atom set.
#[allow(clippy::too_many_arguments)]
pub fn arsfw_run(
    fsum: &FiniteSumObjective,
    atoms: &AtomSet,
    params: ArsfwParams,
    lipschitz: f64,
    iterations: u64,
    seed: u64,
    sigma_mode: SigmaMode,
    f_star: Option<f64>,
) -> Result<ArsfwRun> {
    if !(params.lambda >= 1.0) {
        return Err(Error::InvalidParams(format!(
            "lambda = {} must be >= 1",
            params.lambda
        )));
    }
    let rho = 1.0;
    let w1 = atoms.default_start();
    let r2 = regularizer_range(atoms, &w1);
    let schedules = match sigma_mode {
        SigmaMode::Varying => StochasticSchedules::arsfw(params.p, params.c, params.lambda, r2, rho),
        SigmaMode::Fixed { horizon } => StochasticSchedules::arsfw_fixed_sigma(
            horizon,
            params.p,
            params.c,
            params.lambda,
            r2,
            rho,
        ),
    };
    let run = StochasticRun::new(schedules, iterations, seed).with_f_star(f_star);
    run.validate(fsum, atoms, &w1)?;
    let k_constant = compute_k(rho, params.p, params.lambda, r2, params.c, lipschitz)?;

    let mut rng = Rng::with_stream(seed, SAMPLING_STREAM);
    let mut oracle = Oracle::exact();
    let mut trace = Trace {
        meta: run.meta("arsfw"),
        ..Trace::default()
    };
    let n = iterations as usize;
    let mut replay = ArsfwReplay {
        w1: w1.clone(),
        rho,
        r2,
        lipschitz,
        k_constant,
        etas: Vec::with_capacity(n),
        sigmas: Vec::with_capacity(n),
        gradients: Vec::with_capacity(n),
        g_bars: Vec::with_capacity(n),
        proxy_errors: atoms.is_ball().then(Vec::new),
    };
    let mut avg = WeightedAverage::new(w1.dim());
    let mut g_bar = Point::zeros(w1.dim());
    let mut w = w1.clone();
    for k in 1..=iterations {
        let eta = schedules.eta(k);
        let eps = schedules.eps(k);
        let sigma = schedules.sigma(k);
        let direction = g_bar.add(&w.sub(&w1));
        let d = atoms.approx_lmo(&direction, eps, &mut oracle)?;
        let i = rng.random_range(0..fsum.len());
        let g = fsum.component(i).gradient(&w);
        if let (Some(errs), AtomSet::Ball { center, radius }) = (replay.proxy_errors.as_mut(), atoms)
        {
            errs.push(proxy_error(&g_bar, &w1, center, *radius, &w));
        }
        avg.push(sigma, &w);
        push_record(
            &mut trace, fsum, atoms, &run, k, eta, eps, Some(1), Some(sigma), &w, &avg,
        )?;
        replay.etas.push(eta);
        replay.sigmas.push(sigma);
        replay.g_bars.push(g_bar.clone());
        g_bar.axpy(sigma, &g);
        replay.gradients.push(g);
        w = w.toward(&d, eta);
    }
    Ok(ArsfwRun {
        trace,
        replay,
        atoms: atoms.clone(),
    })
}

/// `F(w) = gbar^T w + |w - w1|^2 / 2`
fn proxy_value(g_bar: &Point, w1: &Point, w: &Point) -> f64 {
    g_bar.dot(w) + 0.5 * w.sub(w1).norm_sq()
}

/// Minimizer of `F` over the ball: the projection of `w1 - gbar`.
fn proxy_minimizer(g_bar: &Point, w1: &Point, center: &Point, radius: f64) -> Point {
    project_ball(center, radius, &w1.sub(g_bar))
}

fn proxy_error(g_bar: &Point, w1: &Point, center: &Point, radius: f64, w: &Point) -> f64 {
    let star = proxy_minimizer(g_bar, w1, center, radius);
    proxy_value(g_bar, w1, w) - proxy_value(g_bar, w1, &star)
}

fn ball_of(run: &ArsfwRun) -> Result<(&Point, f64)> {
    match &run.atoms {
        AtomSet::Ball { center, radius } => Ok((center, *radius)),
        AtomSet::Finite(_) => Err(Error::UnsupportedDomain(
            "closed-form regularized minimizers need a ball domain".into(),
        )),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LazyCheck {
    pub holds: bool,
    /// Largest `lhs - rhs` over all prefixes.
    pub worst_excess: f64,
    pub final_lhs: f64,
    pub final_rhs: f64,
}

/// Checks `sum_k sigma_k g_k^T (w*_k - w) <= sum_k 2 sigma_k^2 |g_k|^2 / rho + R^2`
/// for every prefix `t` of the run (including `t = 0`).
pub fn verify_lemma_lazy(run: &ArsfwRun, w_ref: &Point) -> Result<LazyCheck> {
    let (center, radius) = ball_of(run)?;
    let rp = &run.replay;
    check_dim(rp.w1.dim(), w_ref.dim())?;
    let mut lhs = 0.0;
    let mut rhs = rp.r2;
    let mut check = LazyCheck {
        holds: lhs <= rhs + 1e-9,
        worst_excess: lhs - rhs,
        final_lhs: lhs,
        final_rhs: rhs,
    };
    // gbar is rebuilt from the stored (sigma, g) sequence
    let mut g_bar = Point::zeros(rp.w1.dim());
    for (sigma, g) in rp.sigmas.iter().zip(&rp.gradients) {
        let star = proxy_minimizer(&g_bar, &rp.w1, center, radius);
        lhs += sigma * g.dot(&star.sub(w_ref));
        rhs += 2.0 * sigma * sigma * g.norm_sq() / rp.rho;
        check.worst_excess = check.worst_excess.max(lhs - rhs);
        if lhs > rhs + 1e-9 {
            check.holds = false;
        }
        g_bar.axpy(*sigma, g);
    }
    check.final_lhs = lhs;
    check.final_rhs = rhs;
    Ok(check)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KCheck {
    pub holds: bool,
    /// `max_k e_k / (K eta_k)`
    pub worst_ratio: f64,
    pub worst_k: u64,
}

/// Checks `e_k = F_k(w_k) - F_k(w*_k) <= K eta_k + 1e-9` at every recorded `k`.
pub fn verify_k_bound(run: &ArsfwRun) -> Result<KCheck> {
    let (center, radius) = ball_of(run)?;
    let rp = &run.replay;
    let mut check = KCheck {
        holds: true,
        worst_ratio: 0.0,
        worst_k: 1,
    };
    let mut g_bar = Point::zeros(rp.w1.dim());
    for (i, w) in run.trace.iterates.iter().enumerate() {
        let e = proxy_error(&g_bar, &rp.w1, center, radius, w);
        let bound = rp.k_constant * rp.etas[i];
        if e > bound + 1e-9 {
            check.holds = false;
        }
        let ratio = e / bound;
        if ratio > check.worst_ratio {
            check.worst_ratio = ratio;
            check.worst_k = i as u64 + 1;
        }
        g_bar.axpy(rp.sigmas[i], &rp.gradients[i]);
    }
    Ok(check)
}
