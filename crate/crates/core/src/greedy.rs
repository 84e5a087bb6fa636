//! Deterministic approximate Jones and Frank-Wolfe steps and the run loop.
//!
//! A Jones step picks the atom minimizing `f((1 - eta) w + eta d)` itself;
//! a Frank-Wolfe step minimizes the linearization `grad f(w)^T d`. Both
//! accept an oracle that may return any answer within the allowed slack.

use crate::atoms::{AtomSet, Oracle};
use crate::error::{check_dim, Error, Result};
use crate::objective::{duality_gap, Objective};
use crate::point::Point;
use crate::schedule::Schedules;
use crate::trace::{Record, Trace, TraceMeta, WeightTracker};

/// Interval width at which the golden-section line search stops.
pub const GOLDEN_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome {
    pub w_next: Point,
    pub d: Point,
    /// Index of `d` for finite atom sets.
    pub atom: Option<usize>,
    pub eta: f64,
}

fn check_eta(eta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&eta) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("step size {eta} outside [0, 1]")))
    }
}

fn check_slack(eps: f64) -> Result<()> {
    if eps >= 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("slack {eps} must be >= 0")))
    }
}

fn finite_atoms<'a>(atoms: &'a AtomSet, what: &str) -> Result<&'a [Point]> {
    match atoms {
        AtomSet::Finite(list) => Ok(list),
        AtomSet::Ball { .. } => Err(Error::UnsupportedDomain(format!(
            "{what} needs a finite atom set; the inner problem over a sphere is not solved"
        ))),
    }
}

/// Approximate Jones step with a fixed step size.
///
/// The chosen atom satisfies
/// `f((1-eta) w + eta d) <= min_{d'} f((1-eta) w + eta d') + eps * eta`.
pub fn jones_step<F: Objective + ?Sized>(
    f: &F,
    atoms: &AtomSet,
    w: &Point,
    eta: f64,
    eps: f64,
    oracle: &mut Oracle,
) -> Result<StepOutcome> {
    check_eta(eta)?;
    check_slack(eps)?;
    let list = finite_atoms(atoms, "Jones step")?;
    check_dim(atoms.dim(), w.dim())?;
    let values: Vec<f64> = list.iter().map(|a| f.value(&w.toward(a, eta))).collect();
    let j = oracle.select(&values, eps * eta);
    Ok(StepOutcome {
        w_next: w.toward(&list[j], eta),
        d: list[j].clone(),
        atom: Some(j),
        eta,
    })
}

/// Golden-section minimization of a unimodal `phi` on `[lo, hi]`.
pub fn golden_section(phi: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - inv_phi * (hi - lo);
    let mut b = lo + inv_phi * (hi - lo);
    let mut fa = phi(a);
    let mut fb = phi(b);
    while hi - lo > tol {
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - inv_phi * (hi - lo);
            fa = phi(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + inv_phi * (hi - lo);
            fb = phi(b);
        }
    }
    0.5 * (lo + hi)
}

/// Best step size along the segment from `w` to `d`, and its value.
///
/// Golden section on `[0, 1]`, then the endpoints are compared so that a
/// minimizer at 0 or 1 is returned exactly.
pub fn segment_minimum<F: Objective + ?Sized>(f: &F, w: &Point, d: &Point) -> (f64, f64) {
    let phi = |eta: f64| f.value(&w.toward(d, eta));
    let inner = golden_section(phi, 0.0, 1.0, GOLDEN_TOL);
    let mut best = (0.0, phi(0.0));
    for eta in [1.0, inner] {
        let v = phi(eta);
        if v < best.1 {
            best = (eta, v);
        }
    }
    best
}

/// Jones step with `(eta, d)` chosen jointly; admits an absolute slack.
pub fn jones_step_joint<F: Objective + ?Sized>(
    f: &F,
    atoms: &AtomSet,
    w: &Point,
    abs_eps: f64,
    oracle: &mut Oracle,
) -> Result<StepOutcome> {
    check_slack(abs_eps)?;
    let list = finite_atoms(atoms, "joint Jones step")?;
    check_dim(atoms.dim(), w.dim())?;
    let per_atom: Vec<(f64, f64)> = list.iter().map(|a| segment_minimum(f, w, a)).collect();
    let values: Vec<f64> = per_atom.iter().map(|&(_, v)| v).collect();
    let j = oracle.select(&values, abs_eps);
    let eta = per_atom[j].0;
    Ok(StepOutcome {
        w_next: w.toward(&list[j], eta),
        d: list[j].clone(),
        atom: Some(j),
        eta,
    })
}

/// Approximate Frank-Wolfe step.
pub fn fw_step<F: Objective + ?Sized>(
    f: &F,
    atoms: &AtomSet,
    w: &Point,
    eta: f64,
    eps: f64,
    oracle: &mut Oracle,
) -> Result<StepOutcome> {
    check_eta(eta)?;
    check_dim(atoms.dim(), w.dim())?;
    let g = f.gradient(w);
    let choice = atoms.approx_lmo_choice(&g, eps, oracle)?;
    Ok(StepOutcome {
        w_next: w.toward(&choice.point, eta),
        d: choice.point,
        atom: choice.index,
        eta,
    })
}

/// Linearization slack `grad f(w)^T d - min_S grad f(w)^T d'` of an atom.
pub fn fw_slack_of_jones<F: Objective + ?Sized>(
    f: &F,
    atoms: &AtomSet,
    w: &Point,
    d_chosen: &Point,
) -> Result<f64> {
    let g = f.gradient(w);
    let (_, min) = atoms.lmo(&g)?;
    Ok(g.checked_dot(d_chosen)? - min)
}

/// Per-unit-step Jones slack of an atom:
/// `(f((1-eta) w + eta d) - min_S f((1-eta) w + eta d')) / eta`, 0 at `eta = 0`.
pub fn jones_slack_of_fw<F: Objective + ?Sized>(
    f: &F,
    atoms: &AtomSet,
    w: &Point,
    d_chosen: &Point,
    eta: f64,
) -> Result<f64> {
    check_eta(eta)?;
    let list = finite_atoms(atoms, "Jones slack")?;
    check_dim(atoms.dim(), d_chosen.dim())?;
    if eta == 0.0 {
        return Ok(0.0);
    }
    let min = list
        .iter()
        .map(|a| f.value(&w.toward(a, eta)))
        .fold(f64::INFINITY, f64::min);
    Ok((f.value(&w.toward(d_chosen, eta)) - min) / eta)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepKind {
    Jones,
    FrankWolfe,
}

/// Deterministic rule choosing the step type per iteration.
#[derive(Clone, Copy, Debug)]
pub enum MixPolicy {
    /// Jones on even `k`, Frank-Wolfe on odd `k`.
    Alternate,
    /// Jones when `k % m == 0`, Frank-Wolfe otherwise.
    JonesEvery(u64),
    Custom(fn(u64) -> StepKind),
}

impl MixPolicy {
    pub fn kind(&self, k: u64) -> StepKind {
        match *self {
            MixPolicy::Alternate => {
                if k % 2 == 0 {
                    StepKind::Jones
                } else {
                    StepKind::FrankWolfe
                }
            }
            MixPolicy::JonesEvery(m) => {
                if k % m.max(1) == 0 {
                    StepKind::Jones
                } else {
                    StepKind::FrankWolfe
                }
            }
            MixPolicy::Custom(rule) => rule(k),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub enum Algorithm {
    /// Fixed-step Jones with slack `eps_k * eta_k`.
    Jones,
    /// Joint `(eta, d)` Jones with absolute slack `eps_k`.
    JonesJoint,
    FrankWolfe,
    Mixed(MixPolicy),
}

impl Algorithm {
    pub fn name(&self) -> String {
        match self {
            Algorithm::Jones => "jones".into(),
            Algorithm::JonesJoint => "jones-joint".into(),
            Algorithm::FrankWolfe => "fw".into(),
            Algorithm::Mixed(MixPolicy::Alternate) => "mixed(alternate)".into(),
            Algorithm::Mixed(MixPolicy::JonesEvery(m)) => format!("mixed(jones-every-{m})"),
            Algorithm::Mixed(MixPolicy::Custom(_)) => "mixed(custom)".into(),
        }
    }
}

/// Configuration of a deterministic run. Records are 0-based: record `k`
/// holds `w_k` and the schedule values used to leave it.
#[derive(Clone, Debug)]
pub struct DeterministicRun {
    pub schedules: Schedules,
    pub iterations: u64,
    pub algorithm: Algorithm,
    /// Known optimal value; enables the `err` column.
    pub f_star: Option<f64>,
    pub problem: String,
}

impl DeterministicRun {
    pub fn new(schedules: Schedules, iterations: u64, algorithm: Algorithm) -> Self {
        DeterministicRun {
            schedules,
            iterations,
            algorithm,
            f_star: None,
            problem: String::new(),
        }
    }

    pub fn with_f_star(mut self, f_star: f64) -> Self {
        self.f_star = Some(f_star);
        self
    }

    pub fn with_problem(mut self, name: impl Into<String>) -> Self {
        self.problem = name.into();
        self
    }

    pub fn run<F: Objective + ?Sized>(
        &self,
        f: &F,
        atoms: &AtomSet,
        w0: Point,
        oracle: &mut Oracle,
    ) -> Result<Trace> {
        if self.iterations == 0 {
            return Err(Error::InvalidInput("iteration count must be >= 1".into()));
        }
        self.schedules.validate()?;
        check_dim(atoms.dim(), w0.dim())?;
        let mut tracker = WeightTracker::start(atoms, &w0);
        let mut trace = Trace {
            meta: TraceMeta {
                problem: self.problem.clone(),
                algorithm: self.algorithm.name(),
                seed: None,
                schedules: self.schedules.ids(),
                base: 0,
            },
            weights: tracker.as_ref().map(|_| Vec::new()),
            ..Trace::default()
        };
        let mut w = w0;
        for k in 0..=self.iterations {
            let mut eta = self.schedules.eta(k);
            let eps = self.schedules.eps(k);
            let step = if k < self.iterations {
                let kind = match self.algorithm {
                    Algorithm::Jones | Algorithm::JonesJoint => StepKind::Jones,
                    Algorithm::FrankWolfe => StepKind::FrankWolfe,
                    Algorithm::Mixed(policy) => policy.kind(k),
                };
                let out = match (kind, self.algorithm) {
                    (StepKind::Jones, Algorithm::JonesJoint) => {
                        jones_step_joint(f, atoms, &w, eps, oracle)?
                    }
                    (StepKind::Jones, _) => jones_step(f, atoms, &w, eta, eps, oracle)?,
                    (StepKind::FrankWolfe, _) => fw_step(f, atoms, &w, eta, eps, oracle)?,
                };
                eta = out.eta;
                Some(out)
            } else {
                None
            };
            let f_w = f.value(&w);
            trace.records.push(Record {
                k,
                eta,
                eps,
                batch: None,
                sigma: None,
                f_w,
                f_avg: None,
                gap: duality_gap(f, &w, atoms)?,
                err: self.f_star.map(|fs| f_w - fs),
            });
            if let (Some(t), Some(ws)) = (tracker.as_ref(), trace.weights.as_mut()) {
                ws.push(t.current().to_vec());
            }
            trace.iterates.push(w.clone());
            if let Some(out) = step {
                if let (Some(t), Some(j)) = (tracker.as_mut(), out.atom) {
                    t.step(out.eta, j);
                }
                w = out.w_next;
            }
        }
        Ok(trace)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::{FiniteSumObjective, LeastSquaresComponent, SquaredNorm};

    fn p(v: &[f64]) -> Point {
        Point::new(v.to_vec()).unwrap()
    }

    fn h() -> f64 {
        3.0f64.sqrt() / 2.0
    }

    fn triangle_atoms() -> AtomSet {
        AtomSet::finite(vec![p(&[0.0, 1.0]), p(&[-h(), -0.5]), p(&[h(), -0.5])]).unwrap()
    }

    fn triangle_f() -> FiniteSumObjective {
        let AtomSet::Finite(xs) = triangle_atoms() else {
            unreachable!()
        };
        FiniteSumObjective::new(
            xs.into_iter()
                .map(|x| LeastSquaresComponent::new(x, 1.0).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn jones_step_triangle_example() {
        let f = triangle_f();
        let w = p(&[0.0, 1.0]);
        // candidate values by direct evaluation: 1.5, 1.125, 1.125
        let vals: Vec<f64> = match triangle_atoms() {
            AtomSet::Finite(xs) => xs.iter().map(|a| f.value(&w.toward(a, 0.5))).collect(),
            _ => unreachable!(),
        };
        assert!((vals[0] - 1.5).abs() < 1e-12);
        assert!((vals[1] - 1.125).abs() < 1e-12 && (vals[2] - 1.125).abs() < 1e-12);
        let out = jones_step(&f, &triangle_atoms(), &w, 0.5, 0.0, &mut Oracle::exact()).unwrap();
        assert_eq!(out.d, p(&[-h(), -0.5]));
        assert!((f.value(&out.w_next) - 1.125).abs() < 1e-12);
    }

    #[test]
    fn zero_step_keeps_iterate() {
        let f = triangle_f();
        let w = p(&[0.1, 0.2]);
        let out = jones_step(&f, &triangle_atoms(), &w, 0.0, 0.0, &mut Oracle::exact()).unwrap();
        assert_eq!(out.w_next, w);
        let out = fw_step(&f, &triangle_atoms(), &w, 0.0, 0.3, &mut Oracle::adversarial()).unwrap();
        assert_eq!(out.w_next, w);
    }

    #[test]
    fn jones_adversarial_slack_bounded() {
        let f = triangle_f();
        let w = p(&[0.0, 1.0]);
        let eta = 0.5;
        let eps = 2.0; // admits every atom: spread is 0.375 / 0.5 = 0.75 per unit step
        let out = jones_step(&f, &triangle_atoms(), &w, eta, eps, &mut Oracle::adversarial()).unwrap();
        assert_eq!(out.d, p(&[0.0, 1.0]));
        let slack = jones_slack_of_fw(&f, &triangle_atoms(), &w, &out.d, eta).unwrap();
        assert!(slack * eta <= eps * eta + 1e-12);
    }

    #[test]
    fn jones_rejects_ball() {
        let ball = AtomSet::ball(Point::zeros(2), 1.0).unwrap();
        let r = jones_step(&SquaredNorm(2), &ball, &Point::zeros(2), 0.5, 0.0, &mut Oracle::exact());
        assert!(matches!(r, Err(Error::UnsupportedDomain(_))));
        let r = jones_step_joint(&SquaredNorm(2), &ball, &Point::zeros(2), 0.0, &mut Oracle::exact());
        assert!(matches!(r, Err(Error::UnsupportedDomain(_))));
    }

    #[test]
    fn fw_step_triangle_example() {
        let f = triangle_f();
        let w = p(&[0.0, 1.0]);
        let g = f.gradient(&w);
        assert!(g.dist(&p(&[0.0, 1.0])) < 1e-15);
        let out = fw_step(&f, &triangle_atoms(), &w, 0.5, 0.0, &mut Oracle::exact()).unwrap();
        assert_eq!(out.d, p(&[-h(), -0.5]));
    }

    #[test]
    fn joint_step_at_minimizer_stays() {
        let f = SquaredNorm(2);
        let atoms = AtomSet::finite(vec![p(&[1.0, 0.0]), p(&[-1.0, 0.5]), p(&[0.0, -1.0])]).unwrap();
        let w = Point::zeros(2);
        let out = jones_step_joint(&f, &atoms, &w, 0.0, &mut Oracle::exact()).unwrap();
        assert!(out.eta < 1e-8);
        assert!(out.w_next.norm() < 1e-8);
    }

    #[test]
    fn joint_step_matches_grid_oracle() {
        let f = triangle_f();
        let w = p(&[0.0, 1.0]);
        let out = jones_step_joint(&f, &triangle_atoms(), &w, 0.0, &mut Oracle::exact()).unwrap();
        assert!(out.atom == Some(1) || out.atom == Some(2));
        let value = f.value(&out.w_next);
        assert!(value <= 1.125);
        // 1e-6 grid over eta for each atom
        let mut grid_best = f64::INFINITY;
        if let AtomSet::Finite(xs) = triangle_atoms() {
            for a in &xs {
                for i in 0..=1_000_000u32 {
                    let eta = i as f64 * 1e-6;
                    grid_best = grid_best.min(f.value(&w.toward(a, eta)));
                }
            }
        }
        assert!((value - grid_best).abs() < 1e-8, "{value} vs {grid_best}");
    }

    #[test]
    fn joint_step_single_atom() {
        let f = SquaredNorm(2);
        let atoms = AtomSet::finite(vec![p(&[-2.0, 0.0])]).unwrap();
        let w = p(&[1.0, 0.0]);
        let out = jones_step_joint(&f, &atoms, &w, 0.0, &mut Oracle::exact()).unwrap();
        // minimizer of |1 - 3 eta| is eta = 1/3
        assert!((out.eta - 1.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn fw_slack_zero_for_exact_atom() {
        let f = triangle_f();
        let w = p(&[0.2, -0.1]);
        let (d, _) = triangle_atoms().lmo(&f.gradient(&w)).unwrap();
        assert_eq!(fw_slack_of_jones(&f, &triangle_atoms(), &w, &d).unwrap(), 0.0);
    }

    #[test]
    fn golden_section_finds_quadratic_minimum() {
        let x = golden_section(|t| (t - 0.3) * (t - 0.3), 0.0, 1.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-9);
    }

    #[test]
    fn run_tracks_convex_weights() {
        let f = triangle_f();
        let run = DeterministicRun::new(Schedules::standard(), 50, Algorithm::Mixed(MixPolicy::Alternate))
            .with_f_star(1.0);
        let trace = run
            .run(&f, &triangle_atoms(), p(&[0.0, 1.0]), &mut Oracle::exact())
            .unwrap();
        assert_eq!(trace.records.len(), 51);
        let weights = trace.weights.as_ref().unwrap();
        let AtomSet::Finite(xs) = triangle_atoms() else {
            unreachable!()
        };
        for (lam, w) in weights.iter().zip(&trace.iterates) {
            assert!(lam.iter().all(|&l| l >= 0.0));
            assert!((lam.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let mut rebuilt = Point::zeros(2);
            for (a, l) in xs.iter().zip(lam) {
                rebuilt.axpy(*l, a);
            }
            assert!(rebuilt.dist(w) < 1e-12);
        }
        assert!(trace.records.iter().all(|r| r.f_w.is_finite()));
    }

    #[test]
    fn run_requires_iterations() {
        let run = DeterministicRun::new(Schedules::standard(), 0, Algorithm::FrankWolfe);
        assert!(run
            .run(&triangle_f(), &triangle_atoms(), p(&[0.0, 1.0]), &mut Oracle::exact())
            .is_err());
    }
}
