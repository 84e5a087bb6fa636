//! Seeded property sweeps over the public API, with oracles written here
//! rather than borrowed from the library.

use greedy_opt::atoms::{AtomSet, Oracle, OracleMode};
use greedy_opt::greedy::{Algorithm, DeterministicRun, MixPolicy};
use greedy_opt::objective::{duality_gap, FiniteSumObjective, Objective};
use greedy_opt::point::Point;
use greedy_opt::problems::{
    make_random_finite_sum, make_triangle_ls, make_two_point_ls, ProblemId, ProblemInstance,
    RandomDomain, TriangleDomain,
};
use greedy_opt::recurrence::{verify_arsfw_recurrence, verify_lower_bound, ArsfwRecurrence};
use greedy_opt::rng::Rng;
use greedy_opt::schedule::Schedules;
use proptest::prelude::*;
use rand::Rng as _;

fn pt(v: Vec<f64>) -> Point {
    Point::new(v).unwrap()
}

/// Euclidean projection onto `{w : |w|_1 <= r}` by sorting magnitudes.
fn project_l1(v: &[f64], r: f64) -> Vec<f64> {
    let l1: f64 = v.iter().map(|x| x.abs()).sum();
    if l1 <= r {
        return v.to_vec();
    }
    let mut u: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cum += uj;
        let t = (cum - r) / (j as f64 + 1.0);
        if uj - t > 0.0 {
            theta = t;
        }
    }
    v.iter()
        .map(|x| x.signum() * (x.abs() - theta).max(0.0))
        .collect()
}

fn project_ball(v: &[f64], r: f64) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n <= r {
        v.to_vec()
    } else {
        v.iter().map(|x| x * r / n).collect()
    }
}

/// Plain projected gradient with step `1 / (2 mean |x_i|^2)`.
fn projected_gradient(f: &FiniteSumObjective, project: impl Fn(&[f64]) -> Vec<f64>, iters: usize) -> f64 {
    let smooth: f64 =
        2.0 * f.components().iter().map(|c| c.x.norm_sq()).sum::<f64>() / f.len() as f64;
    let step = 1.0 / smooth;
    let mut w = vec![0.0; f.dim()];
    for _ in 0..iters {
        let g = f.gradient(&pt(w.clone()));
        let moved: Vec<f64> = w.iter().zip(g.coords()).map(|(a, b)| a - step * b).collect();
        w = project(&moved);
    }
    f.value(&pt(w))
}

#[test]
fn random_reference_optimum_matches_projected_gradient() {
    for seed in 0..6u64 {
        let mut rng = Rng::new(seed);
        let (domain, r) = if seed % 2 == 0 {
            (RandomDomain::CrossPolytope { radius: 0.7 }, 0.7)
        } else {
            (RandomDomain::Ball { radius: 0.7 }, 0.7)
        };
        let inst = make_random_finite_sum(4, 3, domain, &mut rng).unwrap();
        let oracle = if seed % 2 == 0 {
            projected_gradient(&inst.fsum, |v| project_l1(v, r), 1_000_000)
        } else {
            projected_gradient(&inst.fsum, |v| project_ball(v, r), 1_000_000)
        };
        let f_star = inst.f_star.unwrap();
        assert!((f_star - oracle).abs() <= 1e-6, "seed {seed}: {f_star} vs {oracle}");
    }
}

fn shipped() -> Vec<ProblemInstance> {
    [
        "asj-triangle",
        "asfw-two-point",
        "asfw-triangle-biased(r=0.5)",
        "random(n=5,dim=3,seed=1)",
        "random(n=4,dim=2,seed=2,ball=0.8)",
        "random(n=6,dim=3,seed=3,atoms=5)",
    ]
    .iter()
    .map(|id| id.parse::<ProblemId>().unwrap().build().unwrap())
    .collect()
}

#[test]
fn shipped_instances_certify_their_optimum() {
    for inst in shipped() {
        let w_star = inst.w_star.clone().unwrap();
        let f_star = inst.f_star.unwrap();
        assert!((inst.fsum.value(&w_star) - f_star).abs() <= 1e-12, "{}", inst.name);
        assert!(duality_gap(&inst.fsum, &w_star, &inst.atoms).unwrap() <= 1e-8, "{}", inst.name);
        let mut rng = Rng::new(11);
        for _ in 0..10_000 {
            let w = inst.atoms.sample_feasible(&mut rng);
            assert!(inst.fsum.value(&w) >= f_star - 1e-12, "{}", inst.name);
        }
    }
}

#[test]
fn rate_bound_holds_in_every_oracle_mode() {
    let inst = make_triangle_ls([1.0; 3], TriangleDomain::Hull).unwrap();
    let m = inst.constants().curvature;
    let f_star = inst.f_star.unwrap();
    for alg in [
        Algorithm::Jones,
        Algorithm::FrankWolfe,
        Algorithm::Mixed(MixPolicy::JonesEvery(3)),
    ] {
        for mode in [OracleMode::Exact, OracleMode::Adversarial, OracleMode::SeededRandom] {
            for c in [0.5, 2.0] {
                let trace = DeterministicRun::new(Schedules::c_linked(c), 500, alg)
                    .with_f_star(f_star)
                    .run(&inst.fsum, &inst.atoms, inst.start(), &mut Oracle::for_mode(mode, 9))
                    .unwrap();
                for r in trace.records.iter().skip(1) {
                    let bound = (2.0 * m + 4.0 * c) / (r.k as f64 + 2.0);
                    assert!(r.err.unwrap() <= bound + 1e-9, "{alg:?} {mode:?} k={}", r.k);
                    assert!(r.gap >= r.err.unwrap() - 1e-12);
                }
                let weights = trace.weights.unwrap();
                for w in weights {
                    assert!(w.iter().all(|&x| x >= 0.0));
                    assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
                }
            }
        }
    }
}

#[test]
fn arsfw_recurrence_parameter_sweep() {
    let mut rng = Rng::new(21);
    for _ in 0..200 {
        let params = ArsfwRecurrence {
            rho: rng.random_range(0.5..=2.0),
            p: [0.25, 0.5, 0.75][rng.random_range(0..3)],
            lambda: [1.0, 2.0][rng.random_range(0..2)],
            c: rng.random_range(0.0..=2.0),
            lipschitz: rng.random_range(0.1..=5.0),
            r2: rng.random_range(0.1..=5.0),
        };
        assert!(verify_arsfw_recurrence(&params, 0.0, 2000).unwrap(), "{params:?}");
    }
}

#[test]
fn two_point_objective_closed_form() {
    let inst = make_two_point_ls().unwrap();
    let mut rng = Rng::new(1);
    for _ in 0..100 {
        let w = inst.atoms.sample_feasible(&mut rng);
        let s = w[0] + w[1];
        assert!((inst.fsum.value(&w) - (s * s + 1.0)).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn approx_lmo_respects_slack(
        g in prop::collection::vec(-5.0f64..5.0, 3),
        atoms in prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 3), 1..7),
        eps in 0.0f64..3.0,
        seed in any::<u64>(),
    ) {
        let set = AtomSet::finite(atoms.into_iter().map(pt).collect()).unwrap();
        let g = pt(g);
        let (_, min) = set.lmo(&g).unwrap();
        for mode in [OracleMode::Exact, OracleMode::Adversarial, OracleMode::SeededRandom] {
            let d = set.approx_lmo(&g, eps, &mut Oracle::for_mode(mode, seed)).unwrap();
            prop_assert!(g.dot(&d) <= min + eps + 1e-12);
        }
    }

    #[test]
    fn ball_approx_lmo_stays_on_sphere(
        g in prop::collection::vec(-5.0f64..5.0, 1..5),
        radius in 0.1f64..3.0,
        eps in 0.0f64..3.0,
        seed in any::<u64>(),
    ) {
        let dim = g.len();
        let set = AtomSet::ball(Point::zeros(dim), radius).unwrap();
        let g = pt(g);
        let (_, min) = set.lmo(&g).unwrap();
        for mode in [OracleMode::Exact, OracleMode::Adversarial, OracleMode::SeededRandom] {
            let d = set.approx_lmo(&g, eps, &mut Oracle::for_mode(mode, seed)).unwrap();
            prop_assert!(g.dot(&d) <= min + eps + 1e-12 * (1.0 + min.abs()));
            prop_assert!((d.norm() - radius).abs() <= 1e-12 * (1.0 + radius));
        }
    }

    #[test]
    fn greedy_lower_bound_holds(e_frac in 0.0f64..=1.0, log_c in -2.0f64..2.0) {
        let c = 10f64.powf(log_c);
        prop_assert!(verify_lower_bound(2.0 * c * e_frac, c, 5_000).unwrap());
    }

    #[test]
    fn toward_is_a_convex_combination(
        w in prop::collection::vec(-3.0f64..3.0, 4),
        d in prop::collection::vec(-3.0f64..3.0, 4),
        eta in 0.0f64..=1.0,
    ) {
        let (w, d) = (pt(w), pt(d));
        let m = w.toward(&d, eta);
        for i in 0..4 {
            let (lo, hi) = (w[i].min(d[i]), w[i].max(d[i]));
            prop_assert!(m[i] >= lo - 1e-15 && m[i] <= hi + 1e-15);
        }
        prop_assert_eq!(w.toward(&d, 0.0), w.clone());
        prop_assert_eq!(w.toward(&d, 1.0), d);
    }
}
