//! Atom sets and (approximate) linear minimization oracles.

use rand::Rng as _;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::{check_dim, Error, Result};
use crate::point::Point;
use crate::rng::Rng;

/// The atom domain S. The feasible set W is its convex hull.
///
/// For `Ball` the atoms are the boundary sphere and W is the closed ball.
#[derive(Clone, Debug, PartialEq)]
pub enum AtomSet {
    Finite(Vec<Point>),
    Ball { center: Point, radius: f64 },
}

/// An oracle answer: the chosen atom and, for finite sets, its index.
#[derive(Clone, Debug, PartialEq)]
pub struct Choice {
    pub point: Point,
    pub index: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OracleMode {
    /// Exact minimizer, ties to the lowest index.
    Exact,
    /// Worst admissible answer within the allowed slack.
    Adversarial,
    /// Uniform draw among admissible answers.
    SeededRandom,
}

impl OracleMode {
    pub fn name(self) -> &'static str {
        match self {
            OracleMode::Exact => "exact",
            OracleMode::Adversarial => "adversarial",
            OracleMode::SeededRandom => "seeded-random",
        }
    }
}

impl std::str::FromStr for OracleMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(OracleMode::Exact),
            "adversarial" => Ok(OracleMode::Adversarial),
            "seeded-random" => Ok(OracleMode::SeededRandom),
            other => Err(Error::InvalidInput(format!("unknown oracle mode `{other}`"))),
        }
    }
}

/// Slack-injecting oracle. Carries its own random stream in `SeededRandom` mode.
#[derive(Clone, Debug)]
pub struct Oracle {
    mode: OracleMode,
    rng: Option<Rng>,
}

impl Oracle {
    pub fn exact() -> Self {
        Oracle {
            mode: OracleMode::Exact,
            rng: None,
        }
    }

    pub fn adversarial() -> Self {
        Oracle {
            mode: OracleMode::Adversarial,
            rng: None,
        }
    }

    pub fn seeded(rng: Rng) -> Self {
        Oracle {
            mode: OracleMode::SeededRandom,
            rng: Some(rng),
        }
    }

    /// Builds an oracle for `mode`; `seed` feeds the oracle stream when random.
    pub fn for_mode(mode: OracleMode, seed: u64) -> Self {
        match mode {
            OracleMode::Exact => Oracle::exact(),
            OracleMode::Adversarial => Oracle::adversarial(),
            OracleMode::SeededRandom => {
                Oracle::seeded(Rng::with_stream(seed, crate::rng::ORACLE_STREAM))
            }
        }
    }

    pub fn mode(&self) -> OracleMode {
        self.mode
    }

    /// Picks an index among `values` whose excess over the minimum is at most
    /// `slack`, according to the mode. Zero slack always yields the exact
    /// lowest-index minimizer.
    pub(crate) fn select(&mut self, values: &[f64], slack: f64) -> usize {
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let exact = values.iter().position(|&v| v == min).unwrap_or(0);
        if slack == 0.0 {
            return exact;
        }
        match self.mode {
            OracleMode::Exact => exact,
            OracleMode::Adversarial => {
                let mut best = exact;
                for (j, &v) in values.iter().enumerate() {
                    if v - min <= slack && v >= values[best] {
                        best = j;
                    }
                }
                best
            }
            OracleMode::SeededRandom => {
                let admissible: Vec<usize> = (0..values.len())
                    .filter(|&j| values[j] - min <= slack)
                    .collect();
                let rng = self.rng.as_mut().expect("seeded oracle carries an rng");
                admissible[rng.random_range(0..admissible.len())]
            }
        }
    }

    fn draw_unit(&mut self) -> f64 {
        match self.rng.as_mut() {
            Some(rng) => rng.random::<f64>(),
            None => 1.0,
        }
    }
}

impl AtomSet {
    pub fn finite(atoms: Vec<Point>) -> Result<Self> {
        let first = atoms
            .first()
            .ok_or_else(|| Error::InvalidInput("atom list is empty".into()))?;
        let dim = first.dim();
        for a in &atoms {
            check_dim(dim, a.dim())?;
        }
        Ok(AtomSet::Finite(atoms))
    }

    pub fn ball(center: Point, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidInput(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        Ok(AtomSet::Ball { center, radius })
    }

    pub fn dim(&self) -> usize {
        match self {
            AtomSet::Finite(atoms) => atoms[0].dim(),
            AtomSet::Ball { center, .. } => center.dim(),
        }
    }

    pub fn is_ball(&self) -> bool {
        matches!(self, AtomSet::Ball { .. })
    }

    /// Max pairwise atom distance, or `2r` on a ball.
    pub fn diameter(&self) -> f64 {
        match self {
            AtomSet::Finite(atoms) => {
                let mut best = 0.0f64;
                for (i, a) in atoms.iter().enumerate() {
                    for b in &atoms[i + 1..] {
                        best = best.max(a.dist(b));
                    }
                }
                best
            }
            AtomSet::Ball { radius, .. } => 2.0 * radius,
        }
    }

    /// First atom for finite sets, the center for balls.
    pub fn default_start(&self) -> Point {
        match self {
            AtomSet::Finite(atoms) => atoms[0].clone(),
            AtomSet::Ball { center, .. } => center.clone(),
        }
    }

    /// Exact linear minimization: `argmin_{d in S} g^T d` and its value.
    pub fn lmo(&self, g: &Point) -> Result<(Point, f64)> {
        let choice = self.lmo_choice(g)?;
        let value = g.dot(&choice.point);
        Ok((choice.point, value))
    }

    pub fn lmo_choice(&self, g: &Point) -> Result<Choice> {
        check_dim(self.dim(), g.dim())?;
        Ok(self.select(g, 0.0, &mut Oracle::exact()))
    }

    /// Returns `d in S` with `g^T d <= min_S g^T d' + eps`.
    pub fn approx_lmo(&self, g: &Point, eps: f64, oracle: &mut Oracle) -> Result<Point> {
        Ok(self.approx_lmo_choice(g, eps, oracle)?.point)
    }

    pub fn approx_lmo_choice(&self, g: &Point, eps: f64, oracle: &mut Oracle) -> Result<Choice> {
        check_dim(self.dim(), g.dim())?;
        if !(eps >= 0.0) || !eps.is_finite() {
            return Err(Error::InvalidInput(format!(
                "oracle slack must be finite and >= 0, got {eps}"
            )));
        }
        Ok(self.select(g, eps, oracle))
    }

    fn select(&self, g: &Point, eps: f64, oracle: &mut Oracle) -> Choice {
        match self {
            AtomSet::Finite(atoms) => {
                let values: Vec<f64> = atoms.iter().map(|a| g.dot(a)).collect();
                let j = oracle.select(&values, eps);
                Choice {
                    point: atoms[j].clone(),
                    index: Some(j),
                }
            }
            AtomSet::Ball { center, radius } => Choice {
                point: ball_select(center, *radius, g, eps, oracle),
                index: None,
            },
        }
    }

    /// A random point of W: Dirichlet(1,...,1) weights over finite atoms, or
    /// a uniform point of the ball.
    pub fn sample_feasible(&self, rng: &mut Rng) -> Point {
        match self {
            AtomSet::Finite(atoms) => {
                let weights: Vec<f64> = atoms
                    .iter()
                    .map(|_| {
                        let e: f64 = Exp1.sample(rng);
                        e
                    })
                    .collect();
                let total: f64 = weights.iter().sum();
                let mut w = Point::zeros(atoms[0].dim());
                for (a, lam) in atoms.iter().zip(&weights) {
                    w.axpy(lam / total, a);
                }
                w
            }
            AtomSet::Ball { center, radius } => {
                let dir = random_unit(center.dim(), rng);
                let u: f64 = rng.random();
                let rad = radius * u.powf(1.0 / center.dim() as f64);
                center.add(&dir.scale(rad))
            }
        }
    }

    /// A random atom: uniform index, or a uniform point on the sphere.
    pub fn sample_atom(&self, rng: &mut Rng) -> Point {
        match self {
            AtomSet::Finite(atoms) => atoms[rng.random_range(0..atoms.len())].clone(),
            AtomSet::Ball { center, radius } => {
                center.add(&random_unit(center.dim(), rng).scale(*radius))
            }
        }
    }
}

pub(crate) fn random_unit(dim: usize, rng: &mut Rng) -> Point {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let p = Point::from_vec(v);
        let n = p.norm();
        if n > 1e-12 {
            return p.scale(1.0 / n);
        }
    }
}

/// `g / |g|`, computed after dividing by the largest magnitude so that
/// gradients differing only by a scalar factor map to the same direction
/// bit for bit.
fn unit_direction(g: &Point) -> Point {
    let m = g.coords().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let s = g.scale(1.0 / m);
    let n = s.norm();
    s.scale(1.0 / n)
}

/// Euclidean projection onto the closed ball.
pub fn project_ball(center: &Point, radius: f64, w: &Point) -> Point {
    let off = w.sub(center);
    let n = off.norm();
    if n <= radius {
        w.clone()
    } else {
        center.add(&off.scale(radius / n))
    }
}

/// Sphere oracle. The exact answer is `c - r g/|g|`; slack is injected by
/// rotating that point toward a fixed unit vector orthogonal to `g`, which
/// raises `g^T d` by `r|g|(1 - cos theta)`.
fn ball_select(center: &Point, radius: f64, g: &Point, eps: f64, oracle: &mut Oracle) -> Point {
    let dim = center.dim();
    let gnorm = g.norm();
    if gnorm == 0.0 {
        return center.add(&Point::basis(dim, 0, radius));
    }
    let ghat = unit_direction(g);
    let exact = center.add(&ghat.scale(-radius));
    if eps == 0.0 || oracle.mode() == OracleMode::Exact {
        return exact;
    }
    let max_slack = 2.0 * radius * gnorm;
    let mut target = eps.min(max_slack);
    if oracle.mode() == OracleMode::SeededRandom {
        target *= oracle.draw_unit();
    }
    let base = g.dot(&exact);

    if dim == 1 {
        // only the antipode is available
        let far = center.add(&ghat.scale(radius));
        return if max_slack <= eps && oracle.mode() == OracleMode::Adversarial {
            far
        } else {
            exact
        };
    }

    // unit vector orthogonal to g from the least-aligned coordinate axis
    let j = (0..dim)
        .min_by(|&a, &b| ghat[a].abs().total_cmp(&ghat[b].abs()))
        .unwrap_or(0);
    let mut u = Point::basis(dim, j, 1.0);
    u.axpy(-ghat[j], &ghat);
    let un = u.norm();
    let u = u.scale(1.0 / un);

    for _ in 0..64 {
        let cos = (1.0 - target / (radius * gnorm)).clamp(-1.0, 1.0);
        let sin = (1.0 - cos * cos).max(0.0).sqrt();
        let mut d = center.clone();
        d.axpy(-radius * cos, &ghat);
        d.axpy(radius * sin, &u);
        if g.dot(&d) - base <= eps {
            return d;
        }
        target *= 1.0 - 1e-9;
    }
    exact
}
