//! Objectives, finite sums and the first-order quantities built on them.

use crate::atoms::AtomSet;
use crate::error::{check_dim, Error, Result};
use crate::point::Point;

/// A differentiable function on R^n.
pub trait Objective {
    fn dim(&self) -> usize;
    fn value(&self, w: &Point) -> f64;
    fn gradient(&self, w: &Point) -> Point;

    /// `D_f(w, y) = f(w) - f(y) - grad f(y)^T (w - y)`.
    ///
    /// Quadratics override this with the closed form, which avoids the
    /// cancellation of the generic formula when `w` is close to `y`.
    fn divergence(&self, w: &Point, y: &Point) -> f64 {
        self.value(w) - self.value(y) - self.gradient(y).dot(&w.sub(y))
    }
}

impl<T: Objective + ?Sized> Objective for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, w: &Point) -> f64 {
        (**self).value(w)
    }
    fn gradient(&self, w: &Point) -> Point {
        (**self).gradient(w)
    }
    fn divergence(&self, w: &Point, y: &Point) -> f64 {
        (**self).divergence(w, y)
    }
}

/// `(x^T w - y)^2`
#[derive(Clone, Debug, PartialEq)]
pub struct LeastSquaresComponent {
    pub x: Point,
    pub y: f64,
}

impl LeastSquaresComponent {
    pub fn new(x: Point, y: f64) -> Result<Self> {
        if !y.is_finite() {
            return Err(Error::InvalidInput(format!("target {y} is not finite")));
        }
        Ok(LeastSquaresComponent { x, y })
    }

    pub fn residual(&self, w: &Point) -> f64 {
        self.x.dot(w) - self.y
    }
}

impl Objective for LeastSquaresComponent {
    fn dim(&self) -> usize {
        self.x.dim()
    }

    fn value(&self, w: &Point) -> f64 {
        let r = self.residual(w);
        r * r
    }

    fn gradient(&self, w: &Point) -> Point {
        self.x.scale(2.0 * self.residual(w))
    }

    fn divergence(&self, w: &Point, y: &Point) -> f64 {
        let t = self.x.dot(&w.sub(y));
        t * t
    }
}

/// `f(w) = (1/n) sum_i f_i(w)` over least-squares components.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteSumObjective {
    components: Vec<LeastSquaresComponent>,
}

impl FiniteSumObjective {
    pub fn new(components: Vec<LeastSquaresComponent>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidInput("finite sum needs at least one component".into()))?;
        let dim = first.dim();
        for c in &components {
            check_dim(dim, c.dim())?;
        }
        Ok(FiniteSumObjective { components })
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn components(&self) -> &[LeastSquaresComponent] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &LeastSquaresComponent {
        &self.components[i]
    }

    /// The sampled average `(1/b) sum_{i in I} f_i` (repeats count).
    pub fn minibatch(&self, indices: Vec<usize>) -> MiniBatch<'_> {
        debug_assert!(!indices.is_empty());
        MiniBatch {
            fsum: self,
            indices,
        }
    }

    /// `(1/n) sum_i x_i x_i^T` as a row-major dense matrix.
    pub fn second_moment(&self) -> Vec<Vec<f64>> {
        let dim = self.dim();
        let mut m = vec![vec![0.0; dim]; dim];
        for c in &self.components {
            for (a, row) in m.iter_mut().enumerate() {
                for (b, entry) in row.iter_mut().enumerate() {
                    *entry += c.x[a] * c.x[b];
                }
            }
        }
        let n = self.len() as f64;
        for row in &mut m {
            for e in row.iter_mut() {
                *e /= n;
            }
        }
        m
    }
}

impl Objective for FiniteSumObjective {
    fn dim(&self) -> usize {
        self.components[0].dim()
    }

    fn value(&self, w: &Point) -> f64 {
        let total: f64 = self.components.iter().map(|c| c.value(w)).sum();
        total / self.len() as f64
    }

    fn gradient(&self, w: &Point) -> Point {
        let mut g = Point::zeros(self.dim());
        for c in &self.components {
            g.axpy(2.0 * c.residual(w), &c.x);
        }
        g.scale(1.0 / self.len() as f64)
    }

    fn divergence(&self, w: &Point, y: &Point) -> f64 {
        let total: f64 = self.components.iter().map(|c| c.divergence(w, y)).sum();
        total / self.len() as f64
    }
}

#[derive(Clone, Debug)]
pub struct MiniBatch<'a> {
    fsum: &'a FiniteSumObjective,
    indices: Vec<usize>,
}

impl MiniBatch<'_> {
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }
}

impl Objective for MiniBatch<'_> {
    fn dim(&self) -> usize {
        self.fsum.dim()
    }

    fn value(&self, w: &Point) -> f64 {
        let total: f64 = self
            .indices
            .iter()
            .map(|&i| self.fsum.component(i).value(w))
            .sum();
        total / self.indices.len() as f64
    }

    fn gradient(&self, w: &Point) -> Point {
        let mut g = Point::zeros(self.dim());
        for &i in &self.indices {
            let c = self.fsum.component(i);
            g.axpy(2.0 * c.residual(w), &c.x);
        }
        g.scale(1.0 / self.indices.len() as f64)
    }

    fn divergence(&self, w: &Point, y: &Point) -> f64 {
        let total: f64 = self
            .indices
            .iter()
            .map(|&i| self.fsum.component(i).divergence(w, y))
            .sum();
        total / self.indices.len() as f64
    }
}

/// `g^T w`
#[derive(Clone, Debug)]
pub struct Linear(pub Point);

impl Objective for Linear {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn value(&self, w: &Point) -> f64 {
        self.0.dot(w)
    }
    fn gradient(&self, _w: &Point) -> Point {
        self.0.clone()
    }
    fn divergence(&self, _w: &Point, _y: &Point) -> f64 {
        0.0
    }
}

/// `|w|_2^2`
#[derive(Clone, Copy, Debug)]
pub struct SquaredNorm(pub usize);

impl Objective for SquaredNorm {
    fn dim(&self) -> usize {
        self.0
    }
    fn value(&self, w: &Point) -> f64 {
        w.norm_sq()
    }
    fn gradient(&self, w: &Point) -> Point {
        w.scale(2.0)
    }
    fn divergence(&self, w: &Point, y: &Point) -> f64 {
        w.sub(y).norm_sq()
    }
}

/// Frank-Wolfe duality gap `max_{d in S} grad f(w)^T (w - d)`.
///
/// Upper-bounds `f(w) - f(w*)` for convex `f` and feasible `w`.
pub fn duality_gap<F: Objective + ?Sized>(f: &F, w: &Point, atoms: &AtomSet) -> Result<f64> {
    check_dim(atoms.dim(), w.dim())?;
    let g = f.gradient(w);
    let (_, min) = atoms.lmo(&g)?;
    Ok(g.dot(w) - min)
}

/// Bregman divergence `D_f(w, y) = f(w) - f(y) - grad f(y)^T (w - y)`.
pub fn bregman<F: Objective + ?Sized>(f: &F, w: &Point, y: &Point) -> Result<f64> {
    check_dim(w.dim(), y.dim())?;
    check_dim(f.dim(), w.dim())?;
    Ok(f.divergence(w, y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;
    use rand::Rng as _;

    fn p(v: &[f64]) -> Point {
        Point::new(v.to_vec()).unwrap()
    }

    fn random_point(dim: usize, rng: &mut Rng) -> Point {
        Point::new((0..dim).map(|_| rng.random_range(-2.0..2.0)).collect()).unwrap()
    }

    fn random_fsum(n: usize, dim: usize, rng: &mut Rng) -> FiniteSumObjective {
        let comps = (0..n)
            .map(|_| {
                LeastSquaresComponent::new(random_point(dim, rng), rng.random_range(-1.0..1.0))
                    .unwrap()
            })
            .collect();
        FiniteSumObjective::new(comps).unwrap()
    }

    #[test]
    fn component_gradient_matches_central_difference() {
        let mut rng = Rng::new(1);
        let h = 1e-5;
        for _ in 0..200 {
            let c = LeastSquaresComponent::new(random_point(3, &mut rng), rng.random_range(-1.0..1.0))
                .unwrap();
            let w = random_point(3, &mut rng);
            let g = c.gradient(&w);
            for i in 0..3 {
                let mut up = w.clone().into_vec();
                let mut dn = w.clone().into_vec();
                up[i] += h;
                dn[i] -= h;
                let fd = (c.value(&p(&up)) - c.value(&p(&dn))) / (2.0 * h);
                assert!((fd - g[i]).abs() < 1e-6, "fd {fd} vs {}", g[i]);
            }
        }
    }

    #[test]
    fn full_sum_is_mean_of_components() {
        let mut rng = Rng::new(2);
        for _ in 0..100 {
            let f = random_fsum(5, 3, &mut rng);
            let w = random_point(3, &mut rng);
            let mean_v: f64 =
                f.components().iter().map(|c| c.value(&w)).sum::<f64>() / f.len() as f64;
            assert!((f.value(&w) - mean_v).abs() <= 1e-12 * mean_v.abs().max(1.0));
            let mut mean_g = Point::zeros(3);
            for c in f.components() {
                mean_g.axpy(1.0 / f.len() as f64, &c.gradient(&w));
            }
            let g = f.gradient(&w);
            assert!(g.dist(&mean_g) <= 1e-12 * mean_g.norm().max(1.0));
        }
    }

    #[test]
    fn minibatch_counts_repeats() {
        let f = FiniteSumObjective::new(vec![
            LeastSquaresComponent::new(p(&[1.0]), 0.0).unwrap(),
            LeastSquaresComponent::new(p(&[1.0]), 1.0).unwrap(),
        ])
        .unwrap();
        let w = p(&[0.0]);
        assert_eq!(f.minibatch(vec![1, 1, 0]).value(&w), 2.0 / 3.0);
        assert_eq!(f.minibatch(vec![0, 1]).value(&w), f.value(&w));
    }

    #[test]
    fn bregman_quadratic_identity() {
        let mut rng = Rng::new(3);
        for _ in 0..100 {
            let w = random_point(4, &mut rng);
            let y = random_point(4, &mut rng);
            let d = bregman(&SquaredNorm(4), &w, &y).unwrap();
            let expect = w.sub(&y).norm_sq();
            assert!((d - expect).abs() <= 1e-9 * expect.max(1.0));
            assert_eq!(bregman(&SquaredNorm(4), &w, &w).unwrap(), 0.0);
        }
    }

    #[test]
    fn bregman_least_squares_nonnegative() {
        let mut rng = Rng::new(4);
        for _ in 0..1000 {
            let f = random_fsum(3, 2, &mut rng);
            let w = random_point(2, &mut rng);
            let y = random_point(2, &mut rng);
            let d = bregman(&f, &w, &y).unwrap();
            let direct = f.value(&w) - f.value(&y) - f.gradient(&y).dot(&w.sub(&y));
            assert!(d >= -1e-12);
            assert!((d - direct).abs() <= 1e-12 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn duality_gap_of_linear_function() {
        let h = 3.0f64.sqrt() / 2.0;
        let atoms = AtomSet::finite(vec![p(&[0.0, 1.0]), p(&[-h, -0.5]), p(&[h, -0.5])]).unwrap();
        let g = p(&[0.4, -1.3]);
        let w = p(&[0.1, 0.2]);
        let (_, min) = atoms.lmo(&g).unwrap();
        let gap = duality_gap(&Linear(g.clone()), &w, &atoms).unwrap();
        assert!((gap - (g.dot(&w) - min)).abs() < 1e-15);
    }

    #[test]
    fn empty_sum_rejected() {
        assert!(FiniteSumObjective::new(vec![]).is_err());
    }
}
