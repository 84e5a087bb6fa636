//! Curvature constants.
//!
//! The curvature of `f` over `S` is
//! `sup_{w in W, d in S, eta in (0,1)} (2 / eta^2) D_f((1 - eta) w + eta d, w)`.

use rand::Rng as _;

use crate::atoms::AtomSet;
use crate::error::{Error, Result};
use crate::objective::{bregman, Objective};
use crate::rng::Rng;

/// `L * diam(S)^2`, the curvature bound of an L-smooth function.
pub fn curvature_bound_smooth(smoothness: f64, atoms: &AtomSet) -> Result<f64> {
    if !(smoothness > 0.0) || !smoothness.is_finite() {
        return Err(Error::InvalidInput(format!(
            "smoothness constant must be positive, got {smoothness}"
        )));
    }
    let d = atoms.diameter();
    Ok(smoothness * d * d)
}

/// One sampled term of the curvature supremum.
pub fn curvature_sample<F: Objective + ?Sized>(
    f: &F,
    w: &crate::point::Point,
    d: &crate::point::Point,
    eta: f64,
) -> Result<f64> {
    let moved = w.toward(d, eta);
    Ok(2.0 / (eta * eta) * bregman(f, &moved, w)?)
}

/// Lower estimate of the curvature from `samples` random `(w, d, eta)`.
pub fn empirical_curvature<F: Objective + ?Sized>(
    f: &F,
    atoms: &AtomSet,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    if samples == 0 {
        return Err(Error::InvalidInput("samples must be >= 1".into()));
    }
    let mut rng = Rng::new(seed);
    let mut best = f64::NEG_INFINITY;
    for _ in 0..samples {
        let w = atoms.sample_feasible(&mut rng);
        let d = atoms.sample_atom(&mut rng);
        let eta = loop {
            let e: f64 = rng.random();
            if e > 0.0 {
                break e;
            }
        };
        best = best.max(curvature_sample(f, &w, &d, eta)?);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::{FiniteSumObjective, LeastSquaresComponent, Linear, SquaredNorm};
    use crate::point::Point;

    fn p(v: &[f64]) -> Point {
        Point::new(v.to_vec()).unwrap()
    }

    fn triangle() -> AtomSet {
        let h = 3.0f64.sqrt() / 2.0;
        AtomSet::finite(vec![p(&[0.0, 1.0]), p(&[-h, -0.5]), p(&[h, -0.5])]).unwrap()
    }

    #[test]
    fn smooth_bound_examples() {
        assert!((curvature_bound_smooth(2.0, &triangle()).unwrap() - 6.0).abs() < 1e-12);
        let ball = AtomSet::ball(Point::zeros(2), 0.5).unwrap();
        assert_eq!(curvature_bound_smooth(4.0, &ball).unwrap(), 4.0);
        let single = AtomSet::finite(vec![p(&[1.0, 1.0])]).unwrap();
        assert_eq!(curvature_bound_smooth(3.0, &single).unwrap(), 0.0);
        assert!(curvature_bound_smooth(0.0, &single).is_err());
    }

    #[test]
    fn linear_objective_has_zero_curvature() {
        let f = Linear(p(&[1.0, -2.0]));
        // only rounding in D_f survives, amplified by 2 / eta^2
        assert!(empirical_curvature(&f, &triangle(), 500, 1).unwrap().abs() < 1e-8);
    }

    #[test]
    fn squared_norm_samples_equal_twice_squared_distance() {
        // D = eta^2 |d - w|^2, so every sample is 2 |d - w|^2 <= 2 diam^2 = 6.
        let mut rng = Rng::new(5);
        for _ in 0..200 {
            let w = triangle().sample_feasible(&mut rng);
            let d = triangle().sample_atom(&mut rng);
            let eta: f64 = rng.random_range(0.01..0.99);
            let s = curvature_sample(&SquaredNorm(2), &w, &d, eta).unwrap();
            let expect = 2.0 * d.sub(&w).norm_sq();
            assert!((s - expect).abs() <= 1e-9 * expect.max(1.0));
        }
        let est = empirical_curvature(&SquaredNorm(2), &triangle(), 20_000, 7).unwrap();
        assert!(est <= 6.0 + 1e-9);
        assert!(est > 5.0, "estimate {est}");
    }

    #[test]
    fn estimate_below_smooth_bound_for_least_squares() {
        let f = FiniteSumObjective::new(vec![
            LeastSquaresComponent::new(p(&[1.0, 0.5]), 1.0).unwrap(),
            LeastSquaresComponent::new(p(&[-0.3, 2.0]), 0.0).unwrap(),
        ])
        .unwrap();
        // smoothness 2 * lambda_max((1/n) sum x x^T), computed by hand for 2x2
        let m = f.second_moment();
        let (a, b, c) = (m[0][0], m[0][1], m[1][1]);
        let lmax = 0.5 * (a + c + ((a - c).powi(2) + 4.0 * b * b).sqrt());
        let bound = curvature_bound_smooth(2.0 * lmax, &triangle()).unwrap();
        let est = empirical_curvature(&f, &triangle(), 5000, 11).unwrap();
        assert!(est <= bound + 1e-9, "{est} > {bound}");
    }
}
