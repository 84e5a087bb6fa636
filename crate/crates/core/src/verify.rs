//! Per-criterion verification reports.
//!
//! Each [`Criterion`] runs a self-contained experiment and returns a
//! [`Report`] of labeled checks, every one carrying the measured value and
//! the bound it was held to. Parameters have defaults and can be overridden
//! by name (the CLI exposes them as `--name value`).

use std::fmt;

use rand::Rng as _;
use rayon::prelude::*;

use crate::atoms::{AtomSet, Oracle, OracleMode};
use crate::curvature::curvature_sample;
use crate::error::{Error, Result};
use crate::greedy::{
    fw_slack_of_jones, fw_step, jones_slack_of_fw, jones_step, Algorithm, DeterministicRun,
    MixPolicy,
};
use crate::objective::{
    bregman, duality_gap, FiniteSumObjective, LeastSquaresComponent, Linear, Objective,
    SquaredNorm,
};
use crate::point::Point;
use crate::problems::{
    make_random_finite_sum, make_triangle_ls, make_two_point_ls, ProblemInstance, RandomDomain,
    TriangleDomain,
};
use crate::recurrence::{greedy_lower_margin, simulate};
use crate::rng::{Rng, PROBLEM_STREAM};
use crate::schedule::{Schedules, SlackRule, StepRule, StochasticSchedules};
use crate::stochastic::{
    arsfw_run, asfw_run, asj_run, expected_direction, expected_lmo_violation, verify_k_bound,
    verify_lemma_lazy, ArsfwParams, InnerMode, SigmaMode, StochasticRun,
};
use crate::trace::Trace;

/// What a measured value is held to.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Bound {
    AtMost(f64),
    AtLeast(f64),
    Within(f64, f64),
    Near { target: f64, tol: f64 },
}

impl Bound {
    fn admits(&self, v: f64) -> bool {
        if !v.is_finite() {
            return false;
        }
        match *self {
            Bound::AtMost(b) => v <= b,
            Bound::AtLeast(b) => v >= b,
            Bound::Within(lo, hi) => lo <= v && v <= hi,
            Bound::Near { target, tol } => (v - target).abs() <= tol,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Bound::AtMost(b) => write!(f, "<= {b:.6e}"),
            Bound::AtLeast(b) => write!(f, ">= {b:.6e}"),
            Bound::Within(lo, hi) => write!(f, "in [{lo:.6e}, {hi:.6e}]"),
            Bound::Near { target, tol } => write!(f, "= {target:.12e} +/- {tol:.1e}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub label: String,
    pub measured: f64,
    pub bound: Bound,
    pub pass: bool,
}

impl Check {
    pub fn new(label: impl Into<String>, measured: f64, bound: Bound) -> Self {
        Check {
            label: label.into(),
            measured,
            bound,
            pass: bound.admits(measured),
        }
    }

    /// A check whose verdict comes from a finer per-step test than the
    /// summary `measured` vs `bound` comparison shown.
    pub fn with_verdict(label: impl Into<String>, measured: f64, bound: Bound, pass: bool) -> Self {
        Check {
            label: label.into(),
            measured,
            bound,
            pass: pass && measured.is_finite(),
        }
    }

    /// Number of failing cases, required to be zero.
    pub fn failures(label: impl Into<String>, count: usize) -> Self {
        Check::new(label, count as f64, Bound::AtMost(0.0))
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: measured = {:.6e}, required {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.label,
            self.measured,
            self.bound
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub criterion: Criterion,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failing(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Criterion {
    Rate,
    Recurrence,
    Optimal,
    Equiv,
    Asj,
    AsjRate,
    AsfwA,
    AsfwB,
    Arsfw,
    Converge,
    Core,
}

impl Criterion {
    pub const ALL: [Criterion; 11] = [
        Criterion::Rate,
        Criterion::Recurrence,
        Criterion::Optimal,
        Criterion::Equiv,
        Criterion::Asj,
        Criterion::AsjRate,
        Criterion::AsfwA,
        Criterion::AsfwB,
        Criterion::Arsfw,
        Criterion::Converge,
        Criterion::Core,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Criterion::Rate => "rate",
            Criterion::Recurrence => "recurrence",
            Criterion::Optimal => "optimal",
            Criterion::Equiv => "equiv",
            Criterion::Asj => "asj",
            Criterion::AsjRate => "asj-rate",
            Criterion::AsfwA => "asfw-a",
            Criterion::AsfwB => "asfw-b",
            Criterion::Arsfw => "arsfw",
            Criterion::Converge => "converge",
            Criterion::Core => "core",
        }
    }

    /// Tunable parameters and their defaults.
    pub fn defaults(self) -> &'static [(&'static str, f64)] {
        match self {
            Criterion::Rate | Criterion::Recurrence => &[("T", 2000.0)],
            Criterion::Optimal => &[("pairs", 100.0), ("T", 1e5), ("seed", 1.0)],
            Criterion::Equiv => &[("instances", 100.0), ("T", 200.0), ("seed", 2.0)],
            Criterion::Asj => &[("seeds", 2000.0), ("T", 100.0), ("seed", 0.0)],
            Criterion::AsjRate => &[("seeds", 50.0), ("c", 0.0), ("seed", 0.0)],
            Criterion::AsfwA => &[("seeds", 500.0), ("T", 1e4), ("seed", 0.0)],
            Criterion::AsfwB => &[("seeds", 200.0), ("T", 1e4), ("r", 0.5), ("seed", 0.0)],
            Criterion::Arsfw => &[
                ("seeds", 20.0),
                ("T", 1e4),
                ("p", 0.5),
                ("lambda", 1.0),
                ("c", 1.0),
                ("seed", 0.0),
            ],
            Criterion::Converge => &[("T", 1e5)],
            Criterion::Core => &[("samples", 500.0), ("seed", 3.0)],
        }
    }

    pub fn run(self, overrides: &[(String, f64)]) -> Result<Report> {
        let p = Params::new(self, overrides)?;
        let checks = match self {
            Criterion::Rate => rate(&p)?,
            Criterion::Recurrence => recurrence(&p)?,
            Criterion::Optimal => optimal(&p)?,
            Criterion::Equiv => equiv(&p)?,
            Criterion::Asj => asj(&p)?,
            Criterion::AsjRate => asj_rate(&p)?,
            Criterion::AsfwA => asfw_a(&p)?,
            Criterion::AsfwB => asfw_b(&p)?,
            Criterion::Arsfw => arsfw(&p)?,
            Criterion::Converge => converge(&p)?,
            Criterion::Core => core(&p)?,
        };
        Ok(Report {
            criterion: self,
            checks,
        })
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Criterion::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown verification `{s}`")))
    }
}

struct Params {
    criterion: Criterion,
    values: Vec<(&'static str, f64)>,
}

impl Params {
    fn new(criterion: Criterion, overrides: &[(String, f64)]) -> Result<Self> {
        let mut values = criterion.defaults().to_vec();
        for (key, v) in overrides {
            let slot = values.iter_mut().find(|(k, _)| k == key).ok_or_else(|| {
                Error::InvalidInput(format!(
                    "`{}` takes no parameter `{key}`",
                    criterion.name()
                ))
            })?;
            if !v.is_finite() {
                return Err(Error::InvalidInput(format!("{key} = {v} is not finite")));
            }
            slot.1 = *v;
        }
        Ok(Params { criterion, values })
    }

    fn get(&self, key: &str) -> f64 {
        self.values
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| *v)
            .unwrap_or_else(|| panic!("{} has no parameter {key}", self.criterion.name()))
    }

    fn count(&self, key: &str) -> Result<u64> {
        let v = self.get(key);
        if v >= 1.0 && v.fract() == 0.0 {
            Ok(v as u64)
        } else {
            Err(Error::InvalidInput(format!("{key} must be a positive integer, got {v}")))
        }
    }

    fn seed(&self) -> Result<u64> {
        let v = self.get("seed");
        if v >= 0.0 && v.fract() == 0.0 {
            Ok(v as u64)
        } else {
            Err(Error::InvalidInput(format!("seed must be a nonnegative integer, got {v}")))
        }
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let (mx, my) = (mean(&lx), mean(&ly));
    let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

fn err_of(trace: &Trace, k: u64) -> Result<f64> {
    trace
        .at(k)
        .and_then(|r| r.err)
        .ok_or_else(|| Error::InvalidInput(format!("no error recorded at k = {k}")))
}

fn avg_err_of(trace: &Trace, k: u64, f_star: f64) -> Result<f64> {
    trace
        .avg_err_at(k, f_star)
        .ok_or_else(|| Error::InvalidInput(format!("no averaged iterate at k = {k}")))
}

struct RateRun {
    label: String,
    c: f64,
    trace: Trace,
}

/// Exact and adversarial (`eps_k = eta_k`) Jones, Frank-Wolfe and alternating
/// runs with `eta_k = 2/(k+2)` on the interior-optimum triangle problem.
fn rate_runs(t: u64) -> Result<(ProblemInstance, f64, Vec<RateRun>)> {
    let inst = make_triangle_ls([1.0; 3], TriangleDomain::Hull)?;
    let m = inst.constants().curvature;
    let f_star = inst.f_star()?;
    let algorithms = [
        ("jones", Algorithm::Jones),
        ("fw", Algorithm::FrankWolfe),
        ("mixed", Algorithm::Mixed(MixPolicy::Alternate)),
    ];
    let mut runs = Vec::new();
    for (name, alg) in algorithms {
        for (mode, c) in [("exact", 0.0), ("adversarial", 1.0)] {
            let schedules = if c == 0.0 {
                Schedules::standard()
            } else {
                Schedules::c_linked(c)
            };
            let mut oracle = if c == 0.0 {
                Oracle::exact()
            } else {
                Oracle::adversarial()
            };
            let trace = DeterministicRun::new(schedules, t, alg)
                .with_f_star(f_star)
                .with_problem(&inst.name)
                .run(&inst.fsum, &inst.atoms, inst.start(), &mut oracle)?;
            runs.push(RateRun {
                label: format!("{name}-{mode}"),
                c,
                trace,
            });
        }
    }
    Ok((inst, m, runs))
}

fn rate(p: &Params) -> Result<Vec<Check>> {
    let t = p.count("T")?;
    let (_, m, runs) = rate_runs(t)?;
    let mut checks = Vec::new();
    for run in runs {
        let coeff = 2.0 * m + 4.0 * run.c;
        let mut worst = 0.0f64;
        let mut ok = true;
        for k in 1..=t {
            let err = err_of(&run.trace, k)?;
            let kk = k as f64 + 2.0;
            worst = worst.max(err * kk);
            ok &= err <= coeff / kk + 1e-9;
        }
        checks.push(Check::with_verdict(
            format!("rate/{} max_k err(k)(k+2)", run.label),
            worst,
            Bound::AtMost(coeff),
            ok,
        ));
    }
    Ok(checks)
}

fn recurrence(p: &Params) -> Result<Vec<Check>> {
    let t = p.count("T")?;
    let (_, m, runs) = rate_runs(t)?;
    let mut checks = Vec::new();
    for run in runs {
        let mut worst = f64::NEG_INFINITY;
        for k in 0..t {
            let r = run.trace.at(k).expect("record present");
            let next = err_of(&run.trace, k + 1)?;
            let cur = r.err.expect("f* known");
            let rhs = (1.0 - r.eta) * cur + r.eta * r.eps + 0.5 * m * r.eta * r.eta;
            worst = worst.max(next - rhs);
        }
        checks.push(Check::new(
            format!("recurrence/{} max_k err(k+1) - rhs(k)", run.label),
            worst,
            Bound::AtMost(1e-9),
        ));
    }
    Ok(checks)
}

fn optimal(p: &Params) -> Result<Vec<Check>> {
    let pairs = p.count("pairs")?;
    let t = p.count("T")?;
    let mut rng = Rng::with_stream(p.seed()?, PROBLEM_STREAM);
    let draws: Vec<(f64, f64)> = (0..pairs)
        .map(|_| {
            let c = 10f64.powf(rng.random_range(-2.0..2.0));
            let e0 = 2.0 * c * rng.random::<f64>();
            (e0, c)
        })
        .collect();
    let results: Vec<Result<(f64, f64)>> = draws
        .par_iter()
        .map(|&(e0, c)| {
            let a = e0.min(c);
            let lower = greedy_lower_margin(e0, c, t)? / a;
            let seq = simulate(e0, c, |k| 2.0 / (k as f64 + 2.0), t)?;
            let upper = seq
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, e)| e * (k as f64 + 2.0) / (4.0 * c))
                .fold(0.0, f64::max);
            Ok((lower, upper))
        })
        .collect();
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for r in results {
        let (l, u) = r?;
        lo = lo.min(l);
        hi = hi.max(u);
    }
    Ok(vec![
        Check::new(
            "optimal/greedy min_k e_k(k+2) / min(e0, C)",
            lo,
            Bound::AtLeast(1.0 - 1e-12),
        ),
        Check::new(
            "optimal/standard-step max_k e_k(k+2) / 4C",
            hi,
            Bound::AtMost(1.0 + 1e-12),
        ),
    ])
}

/// Worst excess of the transferred slack over `eps_k + (M/2) eta_k`.
fn equiv_instance(seed: u64, t: u64) -> Result<(f64, f64)> {
    let mut rng = Rng::with_stream(seed, PROBLEM_STREAM);
    let n = rng.random_range(1..=5);
    let dim = rng.random_range(1..=4);
    let count = rng.random_range(2..=6);
    let inst = make_random_finite_sum(n, dim, RandomDomain::RandomAtoms { count }, &mut rng)?;
    let m = inst.constants().curvature;
    let f = &inst.fsum;
    let atoms = &inst.atoms;
    let mut jones_worst = f64::NEG_INFINITY;
    let mut fw_worst = f64::NEG_INFINITY;
    for mode in [
        OracleMode::Exact,
        OracleMode::Adversarial,
        OracleMode::SeededRandom,
    ] {
        let schedules = if mode == OracleMode::Exact {
            Schedules::standard()
        } else {
            Schedules::c_linked(1.0)
        };
        let mut oracle = Oracle::for_mode(mode, seed);
        let mut w = inst.start();
        for k in 0..t {
            let (eta, eps) = (schedules.eta(k), schedules.eps(k));
            let out = jones_step(f, atoms, &w, eta, eps, &mut oracle)?;
            let slack = fw_slack_of_jones(f, atoms, &w, &out.d)?;
            jones_worst = jones_worst.max(slack - (eps + 0.5 * m * eta));
            w = out.w_next;
        }
        let mut w = inst.start();
        for k in 0..t {
            let (eta, eps) = (schedules.eta(k), schedules.eps(k));
            let out = fw_step(f, atoms, &w, eta, eps, &mut oracle)?;
            let slack = jones_slack_of_fw(f, atoms, &w, &out.d, eta)?;
            fw_worst = fw_worst.max(slack - (eps + 0.5 * m * eta));
            w = out.w_next;
        }
    }
    Ok((jones_worst, fw_worst))
}

fn equiv(p: &Params) -> Result<Vec<Check>> {
    let count = p.count("instances")?;
    let t = p.count("T")?;
    let base = p.seed()?;
    let results: Vec<Result<(f64, f64)>> = (0..count)
        .into_par_iter()
        .map(|i| equiv_instance(base.wrapping_add(i), t))
        .collect();
    let (mut a, mut b) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for r in results {
        let (j, f) = r?;
        a = a.max(j);
        b = b.max(f);
    }
    Ok(vec![
        Check::new(
            "equiv/fw-slack-of-jones minus (eps + M eta/2)",
            a,
            Bound::AtMost(1e-9),
        ),
        Check::new(
            "equiv/jones-slack-of-fw minus (eps + M eta/2)",
            b,
            Bound::AtMost(1e-9),
        ),
    ])
}

fn asj(p: &Params) -> Result<Vec<Check>> {
    let seeds = p.count("seeds")?;
    let t = p.count("T")?;
    let base = p.seed()?;
    let inst = make_triangle_ls([1.0; 3], TriangleDomain::Hull)?;
    let AtomSet::Finite(vertices) = &inst.atoms else {
        unreachable!("triangle problem has a finite atom set")
    };
    let results: Vec<Result<(usize, f64)>> = (0..seeds)
        .into_par_iter()
        .map(|i| {
            let run = StochasticRun::new(StochasticSchedules::single_sample_standard(), t, base + i)
                .with_f_star(inst.f_star)
                .with_problem(&inst.name);
            let trace = asj_run(&inst.fsum, &inst.atoms, inst.start(), &run, InnerMode::ExactJoint)?;
            let off = trace.iterates[1..]
                .iter()
                .filter(|w| !vertices.contains(w))
                .count();
            Ok((off, err_of(&trace, t)?))
        })
        .collect();
    let mut off = 0;
    let mut errs = Vec::new();
    for r in results {
        let (o, e) = r?;
        off += o;
        errs.push(e);
    }
    Ok(vec![
        Check::failures("asj/post-step iterates off the vertex set", off),
        Check::new(
            format!("asj/mean err(w_{t}) over {seeds} seeds"),
            mean(&errs),
            Bound::Within(0.45, 0.55),
        ),
    ])
}

/// Mean `f(avg w_t) - f*` over seeds and the printed bound, per horizon.
fn asj_rate_series(
    inst: &ProblemInstance,
    horizons: &[u64],
    seeds: u64,
    c: f64,
    base: u64,
) -> Result<Vec<(f64, f64)>> {
    let f_star = inst.f_star()?;
    let k = inst.constants();
    let w1 = inst.start();
    let head = inst.fsum.value(&w1) - f_star + k.diameter * k.lipschitz + k.component_curvature + c;
    horizons
        .iter()
        .map(|&t| {
            let results: Vec<Result<f64>> = (0..seeds)
                .into_par_iter()
                .map(|i| {
                    let schedules = StochasticSchedules::asj_fixed_horizon(t, c);
                    let run = StochasticRun::new(schedules, t, base + i).with_f_star(Some(f_star));
                    let trace = asj_run(&inst.fsum, &inst.atoms, w1.clone(), &run, InnerMode::FixedEta)?;
                    avg_err_of(&trace, t, f_star)
                })
                .collect();
            let errs = results.into_iter().collect::<Result<Vec<_>>>()?;
            Ok((mean(&errs), head / (t as f64).sqrt()))
        })
        .collect()
}

fn asj_rate(p: &Params) -> Result<Vec<Check>> {
    let seeds = p.count("seeds")?;
    let c = p.get("c");
    let base = p.seed()?;
    let horizons = [100u64, 400, 1600];
    let ts: Vec<f64> = horizons.iter().map(|&t| t as f64).collect();
    let mut checks = Vec::new();
    // The optimum of the first instance lies inside an edge with a nonzero
    // gradient, so the averaged error is first order in the distance to it.
    // The centroid optimum of the second is a stationary point and its
    // averaged error decays faster than the bound's order.
    let edge = make_triangle_ls([-1.0, 1.0, 1.0], TriangleDomain::Hull)?;
    let centroid = make_triangle_ls([1.0; 3], TriangleDomain::Hull)?;
    for (name, inst, slope) in [("edge-optimum", &edge, true), ("asj-triangle", &centroid, false)] {
        let series = asj_rate_series(inst, &horizons, seeds, c, base)?;
        for (&t, &(m, bound)) in horizons.iter().zip(&series) {
            checks.push(Check::new(
                format!("asj-rate/{name} t={t} mean err(avg w)"),
                m,
                Bound::AtMost(bound),
            ));
        }
        if slope {
            let means: Vec<f64> = series.iter().map(|s| s.0).collect();
            checks.push(Check::new(
                format!("asj-rate/{name} log-log slope of mean err vs t"),
                log_log_slope(&ts, &means),
                Bound::Within(-0.8, -0.3),
            ));
        }
    }
    Ok(checks)
}

fn asfw_a(p: &Params) -> Result<Vec<Check>> {
    let seeds = p.count("seeds")?;
    let t = p.count("T")?;
    let base = p.seed()?;
    let inst = make_two_point_ls()?;
    let results: Vec<Result<f64>> = (0..seeds)
        .into_par_iter()
        .map(|i| {
            let run = StochasticRun::new(StochasticSchedules::single_sample_standard(), t, base + i)
                .with_f_star(inst.f_star);
            err_of(&asfw_run(&inst.fsum, &inst.atoms, inst.start(), &run)?, t)
        })
        .collect();
    let errs = results.into_iter().collect::<Result<Vec<_>>>()?;

    let x = Point::new(vec![1.0, 1.0])?;
    let r = 0.5;
    let half_x = x.scale(0.5);
    let violation = expected_lmo_violation(&inst.fsum, &inst.atoms, &half_x)?;
    let eta_t = StochasticSchedules::single_sample_standard().eta(t);

    // closed form at a feasible point where the per-component answers cancel:
    // violation = -min_S <d, grad f(w)> = r |grad f(w)| = 2 r |x^T w| |x|
    let probe = Point::new(vec![0.3, 0.1])?;
    let closed = 2.0 * r * x.dot(&probe).abs() * x.norm();
    let probe_violation = expected_lmo_violation(&inst.fsum, &inst.atoms, &probe)?;

    let mut rng = Rng::with_stream(base, PROBLEM_STREAM);
    let mut nonzero = 0;
    let mut tried = 0;
    while tried < 100 {
        let w = inst.atoms.sample_feasible(&mut rng);
        if x.dot(&w).abs() >= 1.0 {
            continue;
        }
        tried += 1;
        if expected_direction(&inst.fsum, &inst.atoms, &w)? != Point::zeros(2) {
            nonzero += 1;
        }
    }
    Ok(vec![
        Check::new(
            format!("asfw-a/mean err(w_{t}) over {seeds} seeds"),
            mean(&errs),
            Bound::AtMost(0.01),
        ),
        Check::new(
            "asfw-a/expected_lmo_violation at w = x/2",
            violation,
            Bound::Near {
                target: 2.0 * 2f64.sqrt(),
                tol: 1e-12,
            },
        ),
        Check::new(
            "asfw-a/expected_lmo_violation at (0.3, 0.1) vs 2r|x^T w||x|",
            probe_violation,
            Bound::Near {
                target: closed,
                tol: 1e-12,
            },
        ),
        Check::new(
            format!("asfw-a/violation(x/2) / eta_{t}"),
            violation / eta_t,
            Bound::AtLeast(1e3),
        ),
        Check::failures("asfw-a/E[d] != 0 at 100 feasible w with |x^T w| < 1", nonzero),
    ])
}

fn asfw_b(p: &Params) -> Result<Vec<Check>> {
    let seeds = p.count("seeds")?;
    let t = p.count("T")?;
    let r = p.get("r");
    let base = p.seed()?;
    let inst = make_triangle_ls([1.0, -1.0, -1.0], TriangleDomain::Ball(r))?;
    let limit = Point::new(vec![0.0, 2.0 * r / 3.0])?;
    let results: Vec<Result<(Point, f64)>> = (0..seeds)
        .into_par_iter()
        .map(|i| {
            let run = StochasticRun::new(StochasticSchedules::single_sample_standard(), t, base + i)
                .with_f_star(inst.f_star);
            let trace = asfw_run(&inst.fsum, &inst.atoms, inst.start(), &run)?;
            let w = trace.iterate_at(t).expect("iterate recorded").clone();
            Ok((w, err_of(&trace, t)?))
        })
        .collect();
    let pairs = results.into_iter().collect::<Result<Vec<_>>>()?;
    let near = pairs.iter().filter(|(w, _)| w.dist(&limit) <= 0.05).count();
    let errs: Vec<f64> = pairs.iter().map(|(_, e)| *e).collect();
    let analytic = (1.0 / 3.0) * ((2.0 * r / 3.0 - 1.0).powi(2) + 2.0 * (1.0 - r / 3.0).powi(2))
        - (1.0 / 3.0) * ((r - 1.0).powi(2) + 2.0 * (1.0 - r / 2.0).powi(2));
    Ok(vec![
        Check::new(
            format!("asfw-b/fraction of seeds with |w_{t} - (0, 2r/3)| <= 0.05"),
            near as f64 / seeds as f64,
            Bound::AtLeast(0.9),
        ),
        Check::new(
            format!("asfw-b/mean err(w_{t})"),
            mean(&errs),
            Bound::AtLeast(0.1),
        ),
        Check::new(
            format!("asfw-b/mean err(w_{t}) vs limit gap {analytic:.6} - 0.02"),
            mean(&errs),
            Bound::AtLeast(analytic - 0.02),
        ),
    ])
}

fn arsfw(p: &Params) -> Result<Vec<Check>> {
    let seeds = p.count("seeds")?;
    let t = p.count("T")?;
    let base = p.seed()?;
    let params = ArsfwParams {
        p: p.get("p"),
        c: p.get("c"),
        lambda: p.get("lambda"),
    };
    let inst = make_two_point_ls()?;
    let f_star = inst.f_star()?;
    let lip = inst.constants().lipschitz;
    let r = 0.5;
    let refs = [
        Point::zeros(2),
        Point::basis(2, 0, r),
        Point::basis(2, 0, -r),
        Point::basis(2, 1, r),
        Point::basis(2, 1, -r),
    ];
    let horizons: Vec<u64> = [100u64, 1000, 10_000].into_iter().filter(|&h| h <= t).collect();

    struct SeedOutcome {
        k_ok: bool,
        k_ratio: f64,
        lazy_failures: usize,
        lazy_excess: f64,
        avg_errs: Vec<f64>,
        fixed_errs: Vec<f64>,
        k_constant: f64,
        r2: f64,
    }
    let results: Vec<Result<SeedOutcome>> = (0..seeds)
        .into_par_iter()
        .map(|i| {
            let seed = base + i;
            let run = arsfw_run(
                &inst.fsum,
                &inst.atoms,
                params,
                lip,
                t,
                seed,
                SigmaMode::Varying,
                Some(f_star),
            )?;
            let kc = verify_k_bound(&run)?;
            let mut lazy_failures = 0;
            let mut lazy_excess = f64::NEG_INFINITY;
            for w_ref in &refs {
                let l = verify_lemma_lazy(&run, w_ref)?;
                lazy_failures += usize::from(!l.holds);
                lazy_excess = lazy_excess.max(l.worst_excess);
            }
            let avg_errs = horizons
                .iter()
                .map(|&h| avg_err_of(&run.trace, h, f_star))
                .collect::<Result<Vec<_>>>()?;
            let fixed_errs = horizons
                .iter()
                .map(|&h| {
                    let fixed = arsfw_run(
                        &inst.fsum,
                        &inst.atoms,
                        params,
                        lip,
                        h,
                        seed,
                        SigmaMode::Fixed { horizon: h },
                        Some(f_star),
                    )?;
                    avg_err_of(&fixed.trace, h, f_star)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(SeedOutcome {
                k_ok: kc.holds,
                k_ratio: kc.worst_ratio,
                lazy_failures,
                lazy_excess,
                avg_errs,
                fixed_errs,
                k_constant: run.replay.k_constant,
                r2: run.replay.r2,
            })
        })
        .collect();
    let outcomes = results.into_iter().collect::<Result<Vec<_>>>()?;

    let k_fail = outcomes.iter().filter(|o| !o.k_ok).count();
    let k_ratio = outcomes.iter().map(|o| o.k_ratio).fold(0.0, f64::max);
    let lazy_fail: usize = outcomes.iter().map(|o| o.lazy_failures).sum();
    let lazy_excess = outcomes
        .iter()
        .map(|o| o.lazy_excess)
        .fold(f64::NEG_INFINITY, f64::max);
    let kk = outcomes[0].k_constant;
    let r2 = outcomes[0].r2;
    let (c, rho) = (params.c, 1.0);
    let root = (2.0 * kk / rho).sqrt();

    let mut checks = vec![
        Check::failures(format!("arsfw/k-bound failing seeds (max e_k/(K eta_k) = {k_ratio:.4})"), k_fail),
        Check::failures(
            format!("arsfw/lazy-lemma failing (seed, w_ref) pairs (max lhs - rhs = {lazy_excess:.4e})"),
            lazy_fail,
        ),
    ];
    for (j, &h) in horizons.iter().enumerate() {
        let tf = h as f64;
        let q = tf.powf(0.25);
        let rate2 = (3.0 * lip * root + 2.0 * c * lip * lip / rho) * (tf.ln() + 1.0) / q + r2 / (c * q);
        let rate3 = (4.0 * lip * root + 8.0 * c * lip * lip / (3.0 * rho) + r2 / c) / q;
        let m2 = mean(&outcomes.iter().map(|o| o.avg_errs[j]).collect::<Vec<_>>());
        let m3 = mean(&outcomes.iter().map(|o| o.fixed_errs[j]).collect::<Vec<_>>());
        checks.push(Check::new(
            format!("arsfw/t={h} varying sigma mean err(avg w)"),
            m2,
            Bound::AtMost(rate2),
        ));
        checks.push(Check::new(
            format!("arsfw/t={h} fixed sigma mean err(avg w)"),
            m3,
            Bound::AtMost(rate3),
        ));
    }
    Ok(checks)
}

fn converge(p: &Params) -> Result<Vec<Check>> {
    let t = p.count("T")?;
    let inst = make_triangle_ls([1.0; 3], TriangleDomain::Hull)?;
    let f_star = inst.f_star()?;
    let m = inst.constants().curvature;
    let e0 = inst.fsum.value(&inst.start()) - f_star;
    let qs = [0.5, 0.9];
    let results: Vec<Result<(f64, f64)>> = qs
        .par_iter()
        .map(|&q| {
            let schedules = Schedules {
                eta: StepRule::Power { exponent: q },
                eps: SlackRule::Power {
                    scale: 1.0,
                    exponent: 0.25,
                },
            };
            let trace = DeterministicRun::new(schedules, t, Algorithm::FrankWolfe)
                .with_f_star(f_star)
                .run(&inst.fsum, &inst.atoms, inst.start(), &mut Oracle::adversarial())?;
            let mut e = e0;
            for k in 0..t {
                let (eta, eps) = (schedules.eta(k), schedules.eps(k));
                e = (1.0 - eta) * e + eta * eps + 0.5 * m * eta * eta;
            }
            Ok((err_of(&trace, t)?, e))
        })
        .collect();
    let mut checks = Vec::new();
    for (q, r) in qs.iter().zip(results) {
        let (err, e) = r?;
        checks.push(Check::new(
            format!("converge/q={q} adversarial FW err(w_{t})"),
            err,
            Bound::AtMost(1e-2),
        ));
        checks.push(Check::new(
            format!("converge/q={q} recurrence e_{t}"),
            e,
            Bound::AtMost(1e-3),
        ));
    }
    Ok(checks)
}

fn random_point(dim: usize, scale: f64, rng: &mut Rng) -> Point {
    Point::new((0..dim).map(|_| rng.random_range(-scale..scale)).collect())
        .expect("finite coordinates")
}

fn random_atoms(rng: &mut Rng) -> AtomSet {
    let dim = rng.random_range(1..=4);
    if rng.random::<f64>() < 0.3 {
        AtomSet::ball(random_point(dim, 1.0, rng), rng.random_range(0.1..2.0))
            .expect("positive radius")
    } else {
        let count = rng.random_range(1..=8);
        AtomSet::finite((0..count).map(|_| random_point(dim, 2.0, rng)).collect())
            .expect("nonempty atoms")
    }
}

/// Central-difference gradient check, relative tolerance 1e-6.
fn gradient_mismatch<F: Objective + ?Sized>(f: &F, w: &Point) -> bool {
    let g = f.gradient(w);
    let h = 1e-6;
    (0..w.dim()).any(|i| {
        let e = Point::basis(w.dim(), i, h);
        let fd = (f.value(&w.add(&e)) - f.value(&w.sub(&e))) / (2.0 * h);
        (fd - g[i]).abs() > 1e-6 * (1.0 + g[i].abs())
    })
}

fn core(p: &Params) -> Result<Vec<Check>> {
    let samples = p.count("samples")?;
    let mut rng = Rng::with_stream(p.seed()?, PROBLEM_STREAM);

    let mut lmo_fail = 0;
    let mut slack_fail = 0;
    for _ in 0..samples {
        let atoms = random_atoms(&mut rng);
        let g = random_point(atoms.dim(), 3.0, &mut rng);
        let (d, v) = atoms.lmo(&g)?;
        let scale = 1.0 + v.abs();
        let probes: Vec<Point> = match &atoms {
            AtomSet::Finite(list) => list.clone(),
            AtomSet::Ball { .. } => (0..64).map(|_| atoms.sample_atom(&mut rng)).collect(),
        };
        if probes.iter().any(|a| g.dot(a) < v - 1e-12 * scale) || (g.dot(&d) - v).abs() > 1e-12 * scale {
            lmo_fail += 1;
        }
        if let AtomSet::Ball { center, radius } = &atoms {
            if (v - (g.dot(center) - radius * g.norm())).abs() > 1e-12 * scale {
                lmo_fail += 1;
            }
        }
        let eps = if rng.random::<f64>() < 0.2 {
            0.0
        } else {
            rng.random_range(0.0..2.0)
        };
        for mode in [
            OracleMode::Exact,
            OracleMode::Adversarial,
            OracleMode::SeededRandom,
        ] {
            let mut oracle = Oracle::for_mode(mode, rng.random());
            let a = atoms.approx_lmo(&g, eps, &mut oracle)?;
            let inside = match &atoms {
                AtomSet::Finite(list) => list.contains(&a),
                AtomSet::Ball { center, radius } => {
                    (a.dist(center) - radius).abs() <= 1e-12 * (1.0 + radius)
                }
            };
            if !inside || g.dot(&a) > v + eps + 1e-12 * scale {
                slack_fail += 1;
            }
        }
    }

    let mut bregman_fail = 0;
    let mut gap_fail = 0;
    let mut grad_fail = 0;
    for i in 0..samples {
        let n = rng.random_range(1..=5);
        let dim = rng.random_range(1..=4);
        let domain = if i % 2 == 0 {
            RandomDomain::Ball { radius: 1.0 }
        } else {
            RandomDomain::RandomAtoms { count: rng.random_range(2..=6) }
        };
        let inst = make_random_finite_sum(n, dim, domain, &mut rng)?;
        let f_star = inst.f_star()?;
        let w = inst.atoms.sample_feasible(&mut rng);
        let y = random_point(dim, 2.0, &mut rng);
        let fw = inst.fsum.value(&w);
        if bregman(&inst.fsum, &w, &y)? < -1e-12 * (1.0 + fw.abs()) {
            bregman_fail += 1;
        }
        if duality_gap(&inst.fsum, &w, &inst.atoms)? < fw - f_star - 1e-9 * (1.0 + fw.abs()) {
            gap_fail += 1;
        }
        let batch = inst
            .fsum
            .minibatch((0..3).map(|_| rng.random_range(0..n)).collect());
        let probe = random_point(dim, 2.0, &mut rng);
        let comp = LeastSquaresComponent::new(random_point(dim, 2.0, &mut rng), rng.random_range(-2.0..2.0))?;
        let fsum = FiniteSumObjective::new(vec![comp.clone()])?;
        let lin = Linear(random_point(dim, 2.0, &mut rng));
        let sq = SquaredNorm(dim);
        let objectives: [&dyn Objective; 5] = [&comp, &fsum, &batch, &lin, &sq];
        grad_fail += objectives
            .iter()
            .filter(|f| gradient_mismatch(**f, &probe))
            .count();
    }

    // (1/eta^3) D_f((1-eta) w + eta d, w) = |d - w|^2 / eta for f = |w|^2.
    // Coordinates are multiples of 2^-10 so every segment point with
    // eta = 2^-j, j <= 20, is exact in double precision.
    let mut doubling_fail = 0;
    let mut doubling_worst = 0.0f64;
    let sq = SquaredNorm(3);
    let dyadic = |rng: &mut Rng| {
        Point::new((0..3).map(|_| rng.random_range(-1024i32..=1024) as f64 / 1024.0).collect())
            .expect("finite coordinates")
    };
    for _ in 0..samples.min(100) {
        let w = dyadic(&mut rng);
        let d = dyadic(&mut rng);
        if w == d {
            continue;
        }
        let mut prev: Option<f64> = None;
        for j in 1..=20 {
            let eta = 0.5f64.powi(j);
            let q = curvature_sample(&sq, &w, &d, eta)? / (2.0 * eta);
            if let Some(prev) = prev {
                let rel = (q / prev - 2.0f64).abs() / 2.0;
                doubling_worst = doubling_worst.max(rel);
                if rel > 1e-9 {
                    doubling_fail += 1;
                }
            }
            prev = Some(q);
        }
    }

    Ok(vec![
        Check::failures(format!("core/lmo optimality over {samples} atom sets"), lmo_fail),
        Check::failures("core/approx_lmo slack and membership, all modes", slack_fail),
        Check::failures("core/bregman nonnegativity", bregman_fail),
        Check::failures("core/duality gap >= f(w) - f*", gap_fail),
        Check::failures(
            format!("core/cubic blow-up doubling (worst rel dev {doubling_worst:.2e})"),
            doubling_fail,
        ),
        Check::failures("core/gradient vs central differences, all component types", grad_fail),
    ])
}
