//! Problem instances: the counterexample constructions, random least-squares
//! finite sums, and reference optima.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

use crate::atoms::{project_ball, AtomSet};
use crate::curvature::curvature_bound_smooth;
use crate::error::{Error, Result};
use crate::objective::{duality_gap, FiniteSumObjective, LeastSquaresComponent, Objective};
use crate::point::Point;
use crate::rng::Rng;

/// Gradient-mapping norm at which the reference solver stops.
pub const REFERENCE_TOL: f64 = 1e-10;
/// Iteration cap of the reference solver.
pub const REFERENCE_MAX_ITER: usize = 1_000_000;
/// Duality gap the reference optimum must certify.
pub const REFERENCE_GAP: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemInstance {
    pub name: String,
    pub params: Vec<(String, String)>,
    pub fsum: FiniteSumObjective,
    pub atoms: AtomSet,
    pub w_star: Option<Point>,
    pub f_star: Option<f64>,
}

/// Analytic constants of a least-squares instance over its feasible set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Constants {
    /// Smoothness of the full objective, `2 lambda_max((1/n) sum x x^T)`.
    pub smoothness: f64,
    /// `max_i max_{w in W} |grad f_i(w)|`
    pub lipschitz: f64,
    pub diameter: f64,
    /// Curvature bound of the full objective.
    pub curvature: f64,
    /// Curvature bound valid for every single component,
    /// `2 max_i |x_i|^2 diam^2`.
    pub component_curvature: f64,
}

impl ProblemInstance {
    pub fn constants(&self) -> Constants {
        let smoothness = 2.0 * max_eigenvalue(&self.fsum.second_moment());
        let diameter = self.atoms.diameter();
        let curvature = if smoothness > 0.0 {
            curvature_bound_smooth(smoothness, &self.atoms).unwrap_or(0.0)
        } else {
            0.0
        };
        let max_x2 = self
            .fsum
            .components()
            .iter()
            .map(|c| c.x.norm_sq())
            .fold(0.0, f64::max);
        Constants {
            smoothness,
            lipschitz: lipschitz_bound(&self.fsum, &self.atoms),
            diameter,
            curvature,
            component_curvature: 2.0 * max_x2 * diameter * diameter,
        }
    }

    pub fn f_star(&self) -> Result<f64> {
        self.f_star
            .ok_or_else(|| Error::InvalidInput(format!("{} has no known optimum", self.name)))
    }

    pub fn start(&self) -> Point {
        self.atoms.default_start()
    }
}

fn max_eigenvalue(m: &[Vec<f64>]) -> f64 {
    let dim = m.len();
    let mat = DMatrix::from_fn(dim, dim, |i, j| m[i][j]);
    mat.symmetric_eigen().eigenvalues.max()
}

/// `max_i 2 |x_i| max_{w in W} |x_i^T w - y_i|`; the inner maximum of a
/// convex function is attained at an atom, or at `c +- r x/|x|` on a ball.
pub fn lipschitz_bound(fsum: &FiniteSumObjective, atoms: &AtomSet) -> f64 {
    fsum.components()
        .iter()
        .map(|c| {
            let worst = match atoms {
                AtomSet::Finite(list) => list
                    .iter()
                    .map(|a| c.residual(a).abs())
                    .fold(0.0, f64::max),
                AtomSet::Ball { center, radius } => {
                    c.residual(center).abs() + radius * c.x.norm()
                }
            };
            2.0 * c.x.norm() * worst
        })
        .fold(0.0, f64::max)
}

fn triangle_points() -> [Point; 3] {
    let h = 3.0f64.sqrt() / 2.0;
    [
        Point::from_vec(vec![0.0, 1.0]),
        Point::from_vec(vec![-h, -0.5]),
        Point::from_vec(vec![h, -0.5]),
    ]
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TriangleDomain {
    /// W is the triangle spanned by the three design vectors.
    Hull,
    /// W is the origin-centered ball of the given radius.
    Ball(f64),
}

/// Three least-squares components on the unit-circle design vectors at 120
/// degree spacing.
///
/// `sum_i x_i x_i^T = (3/2) I`, so the unconstrained minimizer is
/// `(2/3) sum_i y_i x_i` and the objective is isotropic: the constrained
/// optimum is the Euclidean projection of that point onto W.
pub fn make_triangle_ls(y: [f64; 3], domain: TriangleDomain) -> Result<ProblemInstance> {
    let xs = triangle_points();
    let comps = xs
        .iter()
        .zip(y)
        .map(|(x, yi)| LeastSquaresComponent::new(x.clone(), yi))
        .collect::<Result<Vec<_>>>()?;
    let fsum = FiniteSumObjective::new(comps)?;
    let mut unconstrained = Point::zeros(2);
    for (x, yi) in xs.iter().zip(y) {
        unconstrained.axpy(2.0 / 3.0 * yi, x);
    }
    let (atoms, w_star, domain_param) = match domain {
        TriangleDomain::Hull => {
            let atoms = AtomSet::finite(xs.to_vec())?;
            let w = project_hull(xs.as_slice(), &unconstrained)?;
            (atoms, w, "hull".to_string())
        }
        TriangleDomain::Ball(r) => {
            let atoms = AtomSet::ball(Point::zeros(2), r)?;
            let w = project_ball(&Point::zeros(2), r, &unconstrained);
            (atoms, w, format!("ball(r={r})"))
        }
    };
    let f_star = fsum.value(&w_star);
    Ok(ProblemInstance {
        name: "triangle-ls".into(),
        params: vec![
            ("y".into(), format!("{y:?}")),
            ("domain".into(), domain_param),
        ],
        fsum,
        atoms,
        w_star: Some(w_star),
        f_star: Some(f_star),
    })
}

/// Two components sharing `x = (1, 1)` with targets `+1` and `-1` on the ball
/// of radius 1/2: `f(w) = (x^T w)^2 + 1`, minimized at the origin.
pub fn make_two_point_ls() -> Result<ProblemInstance> {
    let x = Point::from_vec(vec![1.0, 1.0]);
    let fsum = FiniteSumObjective::new(vec![
        LeastSquaresComponent::new(x.clone(), 1.0)?,
        LeastSquaresComponent::new(x, -1.0)?,
    ])?;
    Ok(ProblemInstance {
        name: "asfw-two-point".into(),
        params: vec![("r".into(), "0.5".into())],
        fsum,
        atoms: AtomSet::ball(Point::zeros(2), 0.5)?,
        w_star: Some(Point::zeros(2)),
        f_star: Some(1.0),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RandomDomain {
    /// Hull of `+- radius e_i`.
    CrossPolytope { radius: f64 },
    /// Origin-centered ball.
    Ball { radius: f64 },
    /// Hull of `count` standard-normal points.
    RandomAtoms { count: usize },
}

/// `n` least-squares components with standard-normal `x_i`, `y_i`; the optimum
/// is attached by [`reference_optimum`].
pub fn make_random_finite_sum(
    n: usize,
    dim: usize,
    domain: RandomDomain,
    rng: &mut Rng,
) -> Result<ProblemInstance> {
    if n == 0 || dim == 0 {
        return Err(Error::InvalidInput("n and dim must be >= 1".into()));
    }
    let mut normal = || -> f64 { StandardNormal.sample(rng) };
    let mut comps = Vec::with_capacity(n);
    for _ in 0..n {
        let x = Point::from_vec((0..dim).map(|_| normal()).collect());
        comps.push(LeastSquaresComponent::new(x, normal())?);
    }
    let atoms = match domain {
        RandomDomain::CrossPolytope { radius } => {
            let mut list = Vec::with_capacity(2 * dim);
            for i in 0..dim {
                list.push(Point::basis(dim, i, radius));
                list.push(Point::basis(dim, i, -radius));
            }
            AtomSet::finite(list)?
        }
        RandomDomain::Ball { radius } => AtomSet::ball(Point::zeros(dim), radius)?,
        RandomDomain::RandomAtoms { count } => {
            if count == 0 {
                return Err(Error::InvalidInput("atom count must be >= 1".into()));
            }
            AtomSet::finite(
                (0..count)
                    .map(|_| Point::from_vec((0..dim).map(|_| normal()).collect()))
                    .collect(),
            )?
        }
    };
    let fsum = FiniteSumObjective::new(comps)?;
    let (w_star, f_star) = reference_optimum(&fsum, &atoms)?;
    Ok(ProblemInstance {
        name: "random".into(),
        params: vec![
            ("n".into(), n.to_string()),
            ("dim".into(), dim.to_string()),
            ("domain".into(), format!("{domain:?}")),
        ],
        fsum,
        atoms,
        w_star: Some(w_star),
        f_star: Some(f_star),
    })
}

/// Minimizer and minimum of a least-squares finite sum over W, certified by
/// a duality gap of at most [`REFERENCE_GAP`].
pub fn reference_optimum(fsum: &FiniteSumObjective, atoms: &AtomSet) -> Result<(Point, f64)> {
    let w = match atoms {
        AtomSet::Ball { center, radius } => ball_optimum(fsum, center, *radius)?,
        AtomSet::Finite(list) => hull_optimum(fsum, list)?,
    };
    let gap = duality_gap(fsum, &w, atoms)?;
    if gap > REFERENCE_GAP {
        return Err(Error::OracleFailure(format!(
            "reference optimum certifies gap {gap:e} > {REFERENCE_GAP:e}"
        )));
    }
    let value = fsum.value(&w);
    Ok((w, value))
}

fn normal_equations(fsum: &FiniteSumObjective) -> (DMatrix<f64>, DVector<f64>) {
    let dim = fsum.dim();
    let n = fsum.len() as f64;
    let mut a = DMatrix::zeros(dim, dim);
    let mut b = DVector::zeros(dim);
    for c in fsum.components() {
        let x = DVector::from_column_slice(c.x.coords());
        a += &x * x.transpose() / n;
        b += &x * (c.y / n);
    }
    (a, b)
}

fn ball_optimum(fsum: &FiniteSumObjective, center: &Point, radius: f64) -> Result<Point> {
    let (a, b) = normal_equations(fsum);
    let smooth = 2.0 * a.clone().symmetric_eigen().eigenvalues.max();
    if smooth == 0.0 {
        return Ok(center.clone());
    }
    if let Ok(sol) = a.clone().svd(true, true).solve(&b, 1e-13) {
        let u = Point::from_vec(sol.iter().copied().collect());
        let grad_scale = fsum.gradient(center).norm().max(1.0);
        if u.is_finite() {
            if u.dist(center) <= radius && fsum.gradient(&u).norm() <= 1e-9 * grad_scale {
                return Ok(u);
            }
            // projection is optimal iff grad f(p) = -mu (p - c) with mu >= 0
            let p = project_ball(center, radius, &u);
            let normal = p.sub(center).scale(1.0 / radius);
            let g = fsum.gradient(&p);
            let along = g.dot(&normal);
            let tangential = g.sub(&normal.scale(along)).norm();
            if along <= 0.0 && tangential <= 1e-12 * grad_scale {
                return Ok(p);
            }
        }
    }
    let project = |w: &Point| project_ball(center, radius, w);
    accelerated_projected_gradient(
        |w| fsum.gradient(w),
        project,
        center.clone(),
        1.0 / smooth,
    )
}

fn hull_optimum(fsum: &FiniteSumObjective, atoms: &[Point]) -> Result<Point> {
    let dim = fsum.dim();
    let m = atoms.len();
    let x = DMatrix::from_fn(dim, m, |i, j| atoms[j][i]);
    let gram_max = (x.transpose() * &x).symmetric_eigen().eigenvalues.max();
    let smooth = 2.0 * max_eigenvalue(&fsum.second_moment()) * gram_max;
    let combine = |lam: &Point| -> Point {
        let mut w = Point::zeros(dim);
        for (a, l) in atoms.iter().zip(lam.coords()) {
            w.axpy(*l, a);
        }
        w
    };
    if smooth == 0.0 {
        return Ok(atoms[0].clone());
    }
    let lam0 = Point::from_vec(vec![1.0 / m as f64; m]);
    let grad = |lam: &Point| -> Point {
        let g = fsum.gradient(&combine(lam));
        Point::from_vec(atoms.iter().map(|a| a.dot(&g)).collect())
    };
    let lam = accelerated_projected_gradient(grad, project_simplex, lam0, 1.0 / smooth)?;
    Ok(combine(&lam))
}

/// Euclidean projection of `p` onto `conv(atoms)`.
pub fn project_hull(atoms: &[Point], p: &Point) -> Result<Point> {
    let dim = p.dim();
    let m = atoms.len();
    let x = DMatrix::from_fn(dim, m, |i, j| atoms[j][i]);
    let gram_max = (x.transpose() * &x).symmetric_eigen().eigenvalues.max();
    let combine = |lam: &Point| -> Point {
        let mut w = Point::zeros(dim);
        for (a, l) in atoms.iter().zip(lam.coords()) {
            w.axpy(*l, a);
        }
        w
    };
    if gram_max == 0.0 {
        return Ok(atoms[0].clone());
    }
    let grad = |lam: &Point| -> Point {
        let r = combine(lam).sub(p);
        Point::from_vec(atoms.iter().map(|a| a.dot(&r)).collect())
    };
    let lam0 = Point::from_vec(vec![1.0 / m as f64; m]);
    let lam = accelerated_projected_gradient(grad, project_simplex, lam0, 1.0 / gram_max)?;
    Ok(combine(&lam))
}

/// Euclidean projection onto the probability simplex (sort-based).
pub fn project_simplex(v: &Point) -> Point {
    let mut u: Vec<f64> = v.coords().to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (i, ui) in u.iter().enumerate() {
        cumsum += ui;
        let t = (cumsum - 1.0) / (i as f64 + 1.0);
        if ui - t > 0.0 {
            theta = t;
        }
    }
    Point::from_vec(v.coords().iter().map(|x| (x - theta).max(0.0)).collect())
}

/// FISTA with gradient-based restart, stopped on the gradient-mapping norm.
fn accelerated_projected_gradient(
    grad: impl Fn(&Point) -> Point,
    project: impl Fn(&Point) -> Point,
    start: Point,
    step: f64,
) -> Result<Point> {
    let mut x = project(&start);
    let mut y = x.clone();
    let mut t = 1.0f64;
    for _ in 0..REFERENCE_MAX_ITER {
        let gx = grad(&x);
        let mut probe = x.clone();
        probe.axpy(-step, &gx);
        let mapped = project(&probe);
        if mapped.dist(&x) / step <= REFERENCE_TOL {
            return Ok(mapped);
        }
        let gy = grad(&y);
        let mut z = y.clone();
        z.axpy(-step, &gy);
        let x_next = project(&z);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        // restart momentum when it points uphill
        let uphill = gy.dot(&x_next.sub(&x)) > 0.0;
        if uphill {
            t = 1.0;
            y = x_next.clone();
        } else {
            let beta = (t - 1.0) / t_next;
            y = x_next.add(&x_next.sub(&x).scale(beta));
            t = t_next;
        }
        x = x_next;
    }
    Err(Error::OracleFailure(format!(
        "projected gradient did not reach mapping norm {REFERENCE_TOL:e} in {REFERENCE_MAX_ITER} iterations"
    )))
}

/// Command-line identifiers of the shipped instances.
#[derive(Clone, Debug, PartialEq)]
pub enum ProblemId {
    AsjTriangle,
    AsfwTwoPoint,
    AsfwTriangleBiased { r: f64 },
    Random { n: usize, dim: usize, seed: u64, domain: RandomDomain },
}

impl ProblemId {
    pub fn build(&self) -> Result<ProblemInstance> {
        let mut inst = match self {
            ProblemId::AsjTriangle => make_triangle_ls([1.0; 3], TriangleDomain::Hull)?,
            ProblemId::AsfwTwoPoint => make_two_point_ls()?,
            ProblemId::AsfwTriangleBiased { r } => {
                make_triangle_ls([1.0, -1.0, -1.0], TriangleDomain::Ball(*r))?
            }
            ProblemId::Random {
                n,
                dim,
                seed,
                domain,
            } => {
                let mut rng = Rng::with_stream(*seed, crate::rng::PROBLEM_STREAM);
                make_random_finite_sum(*n, *dim, *domain, &mut rng)?
            }
        };
        inst.name = self.to_string();
        Ok(inst)
    }
}

impl std::fmt::Display for ProblemId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ProblemId::AsjTriangle => write!(f, "asj-triangle"),
            ProblemId::AsfwTwoPoint => write!(f, "asfw-two-point"),
            ProblemId::AsfwTriangleBiased { r } => write!(f, "asfw-triangle-biased(r={r})"),
            ProblemId::Random {
                n,
                dim,
                seed,
                domain,
            } => {
                write!(f, "random(n={n},dim={dim},seed={seed}")?;
                match domain {
                    RandomDomain::CrossPolytope { radius } if *radius == 1.0 => {}
                    RandomDomain::CrossPolytope { radius } => write!(f, ",r={radius}")?,
                    RandomDomain::Ball { radius } => write!(f, ",ball={radius}")?,
                    RandomDomain::RandomAtoms { count } => write!(f, ",atoms={count}")?,
                }
                write!(f, ")")
            }
        }
    }
}

impl std::str::FromStr for ProblemId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, args) = match s.find('(') {
            Some(i) if s.ends_with(')') => (&s[..i], Some(&s[i + 1..s.len() - 1])),
            Some(_) => return Err(bad_id(s, "unbalanced parentheses")),
            None => (s, None),
        };
        let mut pairs = Vec::new();
        if let Some(args) = args {
            for part in args.split(',').map(str::trim).filter(|p| !p.is_empty()) {
                let (k, v) = part
                    .split_once('=')
                    .ok_or_else(|| bad_id(s, "arguments are key=value"))?;
                pairs.push((k.trim().to_string(), v.trim().to_string()));
            }
        }
        let take = |key: &str| pairs.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
        let num = |key: &str| -> Result<Option<f64>> {
            take(key)
                .map(|v| v.parse::<f64>().map_err(|_| bad_id(s, &format!("{key} is not a number"))))
                .transpose()
        };
        let int = |key: &str| -> Result<Option<u64>> {
            take(key)
                .map(|v| v.parse::<u64>().map_err(|_| bad_id(s, &format!("{key} is not an integer"))))
                .transpose()
        };
        let allow = |keys: &[&str]| -> Result<()> {
            match pairs.iter().find(|(k, _)| !keys.contains(&k.as_str())) {
                Some((k, _)) => Err(bad_id(s, &format!("unknown argument `{k}`"))),
                None => Ok(()),
            }
        };
        match head {
            "asj-triangle" => {
                allow(&[])?;
                Ok(ProblemId::AsjTriangle)
            }
            "asfw-two-point" => {
                allow(&[])?;
                Ok(ProblemId::AsfwTwoPoint)
            }
            "asfw-triangle-biased" => {
                allow(&["r"])?;
                let r = num("r")?.unwrap_or(0.5);
                if !(r > 0.0 && r < 1.0) {
                    return Err(bad_id(s, "r must lie in (0, 1)"));
                }
                Ok(ProblemId::AsfwTriangleBiased { r })
            }
            "random" => {
                allow(&["n", "dim", "seed", "r", "ball", "atoms"])?;
                let n = int("n")?.ok_or_else(|| bad_id(s, "missing n"))? as usize;
                let dim = int("dim")?.ok_or_else(|| bad_id(s, "missing dim"))? as usize;
                let seed = int("seed")?.unwrap_or(0);
                let domain = match (num("r")?, num("ball")?, int("atoms")?) {
                    (r, None, None) => RandomDomain::CrossPolytope {
                        radius: r.unwrap_or(1.0),
                    },
                    (None, Some(radius), None) => RandomDomain::Ball { radius },
                    (None, None, Some(count)) => RandomDomain::RandomAtoms {
                        count: count as usize,
                    },
                    _ => return Err(bad_id(s, "choose one of r, ball, atoms")),
                };
                Ok(ProblemId::Random {
                    n,
                    dim,
                    seed,
                    domain,
                })
            }
            _ => Err(bad_id(s, "unknown problem")),
        }
    }
}

fn bad_id(s: &str, why: &str) -> Error {
    Error::InvalidInput(format!("problem `{s}`: {why}"))
}

/// One line per shipped instance for `list-problems`.
pub fn describe_problems() -> Vec<(&'static str, &'static str)> {
    vec![
        (
            "asj-triangle",
            "triangle atoms, y = (1,1,1), hull domain; w* = (0,0), f* = 1",
        ),
        (
            "asfw-two-point",
            "x = (1,1), y = +-1, ball of radius 1/2; w* = (0,0), f* = 1",
        ),
        (
            "asfw-triangle-biased(r=0.5)",
            "triangle design, y = (1,-1,-1), ball of radius r < 1; w* = (0,r)",
        ),
        (
            "random(n=5,dim=3,seed=0)",
            "standard-normal least squares on the l1 unit ball (r=, ball=, atoms= to change)",
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[f64]) -> Point {
        Point::new(v.to_vec()).unwrap()
    }

    #[test]
    fn triangle_examples() {
        let inst = make_triangle_ls([1.0; 3], TriangleDomain::Hull).unwrap();
        let w = inst.w_star.clone().unwrap();
        assert!(w.norm() < 1e-9);
        assert!((inst.f_star.unwrap() - 1.0).abs() < 1e-12);

        let r = 0.5;
        let inst = make_triangle_ls([1.0, -1.0, -1.0], TriangleDomain::Ball(r)).unwrap();
        assert!(inst.w_star.clone().unwrap().dist(&p(&[0.0, r])) < 1e-15);
        let expect = ((r - 1.0).powi(2) + 2.0 * (1.0 - r / 2.0).powi(2)) / 3.0;
        assert!((inst.f_star.unwrap() - expect).abs() < 1e-12);

        let inst = make_triangle_ls([0.0; 3], TriangleDomain::Hull).unwrap();
        assert!(inst.f_star.unwrap().abs() < 1e-15);
    }

    #[test]
    fn triangle_hull_projection_of_infeasible_minimizer() {
        // (0, 4/3) projects onto the top vertex
        let inst = make_triangle_ls([1.0, -1.0, -1.0], TriangleDomain::Hull).unwrap();
        assert!(inst.w_star.clone().unwrap().dist(&p(&[0.0, 1.0])) < 1e-9);
        let gap = duality_gap(&inst.fsum, inst.w_star.as_ref().unwrap(), &inst.atoms).unwrap();
        assert!(gap <= 1e-8);
    }

    #[test]
    fn two_point_examples() {
        let inst = make_two_point_ls().unwrap();
        assert_eq!(inst.fsum.value(&Point::zeros(2)), 1.0);
        assert!((inst.fsum.value(&p(&[0.5, 0.0])) - 1.25).abs() < 1e-15);
        assert_eq!(inst.fsum.gradient(&Point::zeros(2)), Point::zeros(2));
    }

    #[test]
    fn reference_matches_analytic() {
        let tri = make_triangle_ls([1.0; 3], TriangleDomain::Hull).unwrap();
        let (w, f) = reference_optimum(&tri.fsum, &tri.atoms).unwrap();
        assert!(w.norm() < 1e-8 && (f - 1.0).abs() < 1e-8);

        let two = make_two_point_ls().unwrap();
        let (w, f) = reference_optimum(&two.fsum, &two.atoms).unwrap();
        assert!(w.norm() < 1e-10 && (f - 1.0).abs() < 1e-10);

        let fsum =
            FiniteSumObjective::new(vec![LeastSquaresComponent::new(p(&[1.0]), 5.0).unwrap()])
                .unwrap();
        let ball = AtomSet::ball(p(&[0.0]), 1.0).unwrap();
        let (w, f) = reference_optimum(&fsum, &ball).unwrap();
        assert!((w[0] - 1.0).abs() < 1e-12 && (f - 16.0).abs() < 1e-10);
    }

    #[test]
    fn random_instance_is_reproducible() {
        let id: ProblemId = "random(n=4,dim=3,seed=9)".parse().unwrap();
        assert_eq!(id.build().unwrap(), id.build().unwrap());
    }

    #[test]
    fn random_zero_target_single_component() {
        let mut rng = Rng::new(0);
        let mut inst = make_random_finite_sum(1, 2, RandomDomain::Ball { radius: 1.0 }, &mut rng).unwrap();
        let x = inst.fsum.component(0).x.clone();
        inst.fsum = FiniteSumObjective::new(vec![LeastSquaresComponent::new(x, 0.0).unwrap()]).unwrap();
        let (_, f) = reference_optimum(&inst.fsum, &inst.atoms).unwrap();
        assert!(f.abs() < 1e-15);
    }

    #[test]
    fn simplex_projection() {
        let q = project_simplex(&p(&[0.5, 0.5, 0.5]));
        assert!(q.coords().iter().all(|&v| (v - 1.0 / 3.0).abs() < 1e-15));
        let q = project_simplex(&p(&[2.0, 0.0, -1.0]));
        assert_eq!(q, p(&[1.0, 0.0, 0.0]));
    }

    #[test]
    fn ids_round_trip() {
        for s in [
            "asj-triangle",
            "asfw-two-point",
            "asfw-triangle-biased(r=0.25)",
            "random(n=5,dim=3,seed=7)",
            "random(n=2,dim=2,seed=1,ball=2)",
            "random(n=2,dim=2,seed=1,atoms=6)",
        ] {
            let id: ProblemId = s.parse().unwrap();
            assert_eq!(id.to_string(), s);
        }
        assert_eq!(
            "asfw-triangle-biased".parse::<ProblemId>().unwrap(),
            ProblemId::AsfwTriangleBiased { r: 0.5 }
        );
        assert!("asfw-triangle-biased(r=1.5)".parse::<ProblemId>().is_err());
        assert!("random(n=2)".parse::<ProblemId>().is_err());
        assert!("nope".parse::<ProblemId>().is_err());
    }

    #[test]
    fn constants_of_triangle() {
        let inst = make_triangle_ls([1.0; 3], TriangleDomain::Hull).unwrap();
        let c = inst.constants();
        assert!((c.smoothness - 1.0).abs() < 1e-12);
        assert!((c.diameter - 3.0f64.sqrt()).abs() < 1e-12);
        assert!((c.curvature - 3.0).abs() < 1e-12);
        assert!((c.component_curvature - 6.0).abs() < 1e-12);
        assert!((c.lipschitz - 3.0).abs() < 1e-12);
        let two = make_two_point_ls().unwrap().constants();
        assert!((two.lipschitz - (2.0 * 2.0f64.sqrt() + 2.0)).abs() < 1e-12);
    }
}
