//! Scalar error recurrences behind the rate results.
//!
//! * `e_{k+1} = (1 - eta_k) e_k + C eta_k^2`, whose solutions are `Theta(1/k)`
//!   at best ([`simulate`], [`verify_lower_bound`]).
//! * The implicit recurrence of the regularized stochastic runner,
//!   `e_{k+1} = (1 - eta_k) e_k + (lambda R^2 / rho) eta_k^2
//!   + sqrt(2 / rho) sigma_k L sqrt(e_{k+1})`, bounded by `K eta_k`.

use crate::error::{Error, Result};

fn check_eta(k: u64, eta: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&eta) {
        Ok(eta)
    } else {
        Err(Error::InvalidSchedule(format!(
            "eta_{k} = {eta} outside [0, 1]"
        )))
    }
}

fn check_coefficients(e0: f64, c: f64) -> Result<()> {
    if !(e0 >= 0.0 && e0.is_finite()) {
        return Err(Error::InvalidInput(format!("e0 = {e0} must be >= 0")));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidInput(format!("C = {c} must be > 0")));
    }
    Ok(())
}

/// `e_0, ..., e_T` of `e_{k+1} = (1 - eta_k) e_k + C eta_k^2`.
pub fn simulate(e0: f64, c: f64, eta_rule: impl Fn(u64) -> f64, steps: u64) -> Result<Vec<f64>> {
    check_coefficients(e0, c)?;
    if steps == 0 {
        return Err(Error::InvalidInput("T must be >= 1".into()));
    }
    let mut out = Vec::with_capacity(steps as usize + 1);
    let mut e = e0;
    out.push(e);
    for k in 0..steps {
        let eta = check_eta(k, eta_rule(k))?;
        e = (1.0 - eta) * e + c * eta * eta;
        out.push(e);
    }
    Ok(out)
}

/// Step size minimizing `(1 - eta) e + C eta^2`, i.e. `e / (2C)` clamped to `[0, 1]`.
///
/// The minimum value is `e (1 - e / (4C))` for `e <= 2C`.
pub fn greedy_eta(e: f64, c: f64) -> f64 {
    (e / (2.0 * c)).clamp(0.0, 1.0)
}

/// One step of the recurrence at the greedy step size.
pub fn greedy_next(e: f64, c: f64) -> f64 {
    let eta = greedy_eta(e, c);
    (1.0 - eta) * e + c * eta * eta
}

/// `e_0, ..., e_T` under [`greedy_eta`].
pub fn simulate_greedy(e0: f64, c: f64, steps: u64) -> Result<Vec<f64>> {
    check_coefficients(e0, c)?;
    let mut out = Vec::with_capacity(steps as usize + 1);
    let mut e = e0;
    out.push(e);
    for _ in 0..steps {
        e = greedy_next(e, c);
        out.push(e);
    }
    Ok(out)
}

/// `min_k e_k (k + 2)` along the greedy sequence.
pub fn greedy_lower_margin(e0: f64, c: f64, steps: u64) -> Result<f64> {
    if e0 > 2.0 * c {
        return Err(Error::Precondition(format!("e0 = {e0} exceeds 2C = {}", 2.0 * c)));
    }
    let seq = simulate_greedy(e0, c, steps)?;
    Ok(seq
        .iter()
        .enumerate()
        .map(|(k, e)| e * (k as f64 + 2.0))
        .fold(f64::INFINITY, f64::min))
}

/// Whether the greedily minimized sequence stays above `min(e0, C) / (k + 2)`.
pub fn verify_lower_bound(e0: f64, c: f64, steps: u64) -> Result<bool> {
    let margin = greedy_lower_margin(e0, c, steps)?;
    Ok(margin >= e0.min(c) * (1.0 - 1e-12))
}

/// Parameters of the regularized-runner recurrence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArsfwRecurrence {
    /// Strong convexity of the regularizer.
    pub rho: f64,
    /// `eta_k = k^(-p)`
    pub p: f64,
    pub lambda: f64,
    /// `R^2 = max_W Phi - Phi(w_1)`
    pub r2: f64,
    /// `sigma_k = c eta_k^(3/2)`
    pub c: f64,
    /// Gradient norm bound.
    pub lipschitz: f64,
}

impl ArsfwRecurrence {
    /// The constant `K` with `e_k <= K eta_k`.
    pub fn k_constant(&self) -> Result<f64> {
        compute_k(self.rho, self.p, self.lambda, self.r2, self.c, self.lipschitz)
    }
}

/// `K = ( sqrt(1/(2 rho)) c L / (1-p)
///       + sqrt( (lambda R^2 + c^2 L^2) / (rho (1-p)) + c^2 L^2 / (2 rho (1-p)^2) ) )^2`
pub fn compute_k(rho: f64, p: f64, lambda: f64, r2: f64, c: f64, lipschitz: f64) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::InvalidParams(format!("rho = {rho} must be > 0")));
    }
    if !(0.0..1.0).contains(&p) {
        return Err(Error::InvalidParams(format!("p = {p} must lie in [0, 1)")));
    }
    if !(lambda >= 1.0) {
        return Err(Error::InvalidParams(format!("lambda = {lambda} must be >= 1")));
    }
    if !(c >= 0.0) {
        return Err(Error::InvalidParams(format!("c = {c} must be >= 0")));
    }
    let q = 1.0 - p;
    let cl2 = c * c * lipschitz * lipschitz;
    let first = (1.0 / (2.0 * rho)).sqrt() * c * lipschitz / q;
    let second = ((lambda * r2 + cl2) / (rho * q) + cl2 / (2.0 * rho * q * q)).sqrt();
    Ok((first + second).powi(2))
}

/// Largest `e` solving `e = a + b sqrt(e)` for `a, b >= 0`.
pub fn implicit_root(a: f64, b: f64) -> f64 {
    let s = 0.5 * (b + (b * b + 4.0 * a).sqrt());
    s * s
}

/// Outcome of simulating the worst case of the implicit recurrence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KBoundCheck {
    pub holds: bool,
    /// `max_k e_k / (K eta_k)`
    pub worst_ratio: f64,
    pub worst_k: u64,
    pub k_constant: f64,
}

/// Simulates the implicit recurrence with equality (largest root) from `e1`
/// and reports whether `e_k <= K eta_k` for `k = 1..=T`.
pub fn check_arsfw_recurrence(
    params: &ArsfwRecurrence,
    k_constant: f64,
    e1: f64,
    steps: u64,
) -> Result<KBoundCheck> {
    if !(params.p > 0.0 && params.p < 1.0) {
        return Err(Error::InvalidSchedule(format!(
            "p = {} must lie in (0, 1)",
            params.p
        )));
    }
    let eta = |k: u64| (k as f64).powf(-params.p);
    if e1 > k_constant * eta(1) {
        return Err(Error::Precondition(format!(
            "e1 = {e1} exceeds K eta_1 = {}",
            k_constant * eta(1)
        )));
    }
    let quad = params.lambda * params.r2 / params.rho;
    let lin = (2.0 / params.rho).sqrt() * params.lipschitz;
    let mut e = e1;
    let mut check = KBoundCheck {
        holds: true,
        worst_ratio: 0.0,
        worst_k: 1,
        k_constant,
    };
    for k in 1..=steps {
        let ek = eta(k);
        let bound = k_constant * ek;
        let ratio = if bound > 0.0 { e / bound } else { 0.0 };
        if ratio > check.worst_ratio {
            check.worst_ratio = ratio;
            check.worst_k = k;
        }
        if e > bound * (1.0 + 1e-12) {
            check.holds = false;
        }
        let sigma = params.c * ek.powf(1.5);
        e = implicit_root((1.0 - ek) * e + quad * ek * ek, lin * sigma);
    }
    Ok(check)
}

/// [`check_arsfw_recurrence`] with `K` from [`compute_k`].
pub fn verify_arsfw_recurrence(params: &ArsfwRecurrence, e1: f64, steps: u64) -> Result<bool> {
    let k = params.k_constant()?;
    Ok(check_arsfw_recurrence(params, k, e1, steps)?.holds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;
    use rand::Rng as _;

    fn grid_min(e: f64, c: f64) -> f64 {
        (0..=1_000_000u32)
            .map(|i| {
                let eta = i as f64 * 1e-6;
                (1.0 - eta) * e + c * eta * eta
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn fixed_points() {
        let seq = simulate(1.0, 1.0, |_| 1.0, 50).unwrap();
        assert!(seq[1..].iter().all(|&e| e == 1.0));
        let seq = simulate(0.7, 2.0, |_| 0.0, 50).unwrap();
        assert!(seq.iter().all(|&e| e == 0.7));
    }

    #[test]
    fn rejects_bad_schedule() {
        assert!(matches!(
            simulate(1.0, 1.0, |_| 1.5, 3),
            Err(Error::InvalidSchedule(_))
        ));
    }

    #[test]
    fn standard_schedule_upper_bound() {
        for &(e0, c) in &[(0.5, 1.0), (4.0, 1.0), (2.0, 0.5), (0.0, 3.0)] {
            let seq = simulate(e0, c, |k| 2.0 / (k as f64 + 2.0), 10_000).unwrap();
            for (k, e) in seq.iter().enumerate().skip(1) {
                assert!(*e <= 4.0 * c / (k as f64 + 2.0) * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn greedy_eta_examples() {
        assert_eq!(greedy_eta(0.0, 1.0), 0.0);
        assert_eq!(greedy_next(0.0, 1.0), 0.0);
        let c = 1.7;
        assert_eq!(greedy_eta(c, c), 0.5);
        assert!((greedy_next(c, c) - 0.75 * c).abs() < 1e-12);
        assert!((greedy_next(c, c) - grid_min(c, c)).abs() < 1e-9);
        assert_eq!(greedy_eta(2.0 * c, c), 1.0);
        assert!((greedy_next(2.0 * c, c) - c).abs() < 1e-12);
        assert!((greedy_next(2.0 * c, c) - grid_min(2.0 * c, c)).abs() < 1e-9);
    }

    #[test]
    fn greedy_value_is_grid_minimum() {
        let mut rng = Rng::new(17);
        for _ in 0..20 {
            let c: f64 = rng.random_range(0.1..3.0);
            let e: f64 = rng.random_range(0.0..2.0 * c);
            assert!((greedy_next(e, c) - grid_min(e, c)).abs() < 1e-9);
            assert!((greedy_next(e, c) - e * (1.0 - e / (4.0 * c))).abs() < 1e-12);
        }
    }

    #[test]
    fn lower_bound_examples() {
        assert!(verify_lower_bound(1.0, 1.0, 100_000).unwrap());
        assert!(greedy_lower_margin(1.0, 1.0, 100_000).unwrap() >= 1.0);
        assert!(verify_lower_bound(0.0, 1.0, 100).unwrap());
        assert!(matches!(
            verify_lower_bound(3.0, 1.0, 10),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn greedy_sequence_is_non_increasing() {
        let mut rng = Rng::new(5);
        for _ in 0..50 {
            let c: f64 = rng.random_range(0.1..5.0);
            let e0: f64 = rng.random_range(1e-6..2.0 * c);
            let seq = simulate_greedy(e0, c, 2000).unwrap();
            for pair in seq.windows(2) {
                assert!(pair[1] <= pair[0]);
                assert!(pair[1] > 0.0 && pair[1] <= 2.0 * c);
            }
        }
    }

    #[test]
    fn k_constant_examples() {
        // c = 0 collapses to lambda R^2 / (rho (1 - p))
        let k = compute_k(2.0, 0.25, 1.5, 3.0, 0.0, 7.0).unwrap();
        assert!((k - 1.5 * 3.0 / (2.0 * 0.75)).abs() < 1e-12);
        let k = compute_k(1.0, 0.5, 1.0, 1.0, 1.0, 1.0).unwrap();
        let expect = (2.0f64.sqrt() + 6.0f64.sqrt()).powi(2);
        assert!((k - expect).abs() < 1e-12);
        let tiny = compute_k(1.0, 0.5, 1.0, 1.0, 1.0, 1e-9).unwrap();
        assert!((tiny - 2.0).abs() < 1e-6);
        assert!(compute_k(1.0, 1.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(compute_k(1.0, 0.5, 0.5, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn implicit_root_solves_equation() {
        for &(a, b) in &[(0.0, 0.0), (1.0, 0.0), (0.0, 2.0), (0.3, 1.7)] {
            let e = implicit_root(a, b);
            assert!((e - (a + b * e.sqrt())).abs() < 1e-12);
        }
    }

    #[test]
    fn arsfw_recurrence_examples() {
        let base = ArsfwRecurrence {
            rho: 1.0,
            p: 0.5,
            lambda: 1.0,
            r2: 1.0,
            c: 1.0,
            lipschitz: 1.0,
        };
        assert!(verify_arsfw_recurrence(&base, 0.0, 1).unwrap());
        assert!(verify_arsfw_recurrence(&base, 0.0, 100_000).unwrap());
        let det = ArsfwRecurrence { c: 0.0, ..base };
        assert!((det.k_constant().unwrap() - 2.0).abs() < 1e-12);
        assert!(verify_arsfw_recurrence(&det, 0.0, 100_000).unwrap());
        assert!(matches!(
            verify_arsfw_recurrence(&ArsfwRecurrence { p: 1.0, ..base }, 0.0, 10),
            Err(Error::InvalidSchedule(_)) | Err(Error::InvalidParams(_))
        ));
    }
}
