//! Closed-form step-size, slack, batch and weight schedules.

use crate::error::{Error, Result};

/// Step size `eta_k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepRule {
    /// `2 / (k + 2)`
    Standard,
    /// `max(k, 1)^(-exponent)`
    Power { exponent: f64 },
    Constant(f64),
}

impl StepRule {
    pub fn eval(&self, k: u64) -> f64 {
        match *self {
            StepRule::Standard => 2.0 / (k as f64 + 2.0),
            StepRule::Power { exponent } => (k.max(1) as f64).powf(-exponent),
            StepRule::Constant(v) => v,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            StepRule::Standard => Ok(()),
            StepRule::Power { exponent } if exponent >= 0.0 && exponent.is_finite() => Ok(()),
            StepRule::Constant(v) if (0.0..=1.0).contains(&v) => Ok(()),
            other => Err(Error::InvalidSchedule(format!("{other:?} leaves [0, 1]"))),
        }
    }

    pub fn id(&self) -> String {
        match self {
            StepRule::Standard => "eta=2/(k+2)".into(),
            StepRule::Power { exponent } => format!("eta=k^-{exponent}"),
            StepRule::Constant(v) => format!("eta={v}"),
        }
    }
}

/// Oracle slack `eps_k`, possibly tied to the step size.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SlackRule {
    Zero,
    /// `c * eta_k`, the c-Jones / c-FW regime.
    Linked { c: f64 },
    /// `scale * max(k, 1)^(-exponent)`
    Power { scale: f64, exponent: f64 },
    /// Absolute slack `4c / (k + 2)^2` for the joint Jones rule.
    CorollaryAbs { c: f64 },
    Constant(f64),
}

impl SlackRule {
    pub fn eval(&self, k: u64, eta: f64) -> f64 {
        match *self {
            SlackRule::Zero => 0.0,
            SlackRule::Linked { c } => c * eta,
            SlackRule::Power { scale, exponent } => scale * (k.max(1) as f64).powf(-exponent),
            SlackRule::CorollaryAbs { c } => {
                let d = k as f64 + 2.0;
                4.0 * c / (d * d)
            }
            SlackRule::Constant(v) => v,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            SlackRule::Zero => true,
            SlackRule::Linked { c } | SlackRule::CorollaryAbs { c } => c >= 0.0 && c.is_finite(),
            SlackRule::Power { scale, exponent } => {
                scale >= 0.0 && scale.is_finite() && exponent.is_finite()
            }
            SlackRule::Constant(v) => v >= 0.0 && v.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidSchedule(format!("{self:?} is negative")))
        }
    }

    pub fn id(&self) -> String {
        match self {
            SlackRule::Zero => "eps=0".into(),
            SlackRule::Linked { c } => format!("eps={c}*eta"),
            SlackRule::Power { scale, exponent } => format!("eps={scale}*k^-{exponent}"),
            SlackRule::CorollaryAbs { c } => format!("eps=4*{c}/(k+2)^2"),
            SlackRule::Constant(v) => format!("eps={v}"),
        }
    }
}

/// Deterministic schedules `(eta_k, eps_k)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Schedules {
    pub eta: StepRule,
    pub eps: SlackRule,
}

impl Schedules {
    /// `eta_k = 2/(k+2)`, exact oracles.
    pub fn standard() -> Self {
        Schedules {
            eta: StepRule::Standard,
            eps: SlackRule::Zero,
        }
    }

    /// `eta_k = 2/(k+2)`, `eps_k = c * eta_k`.
    pub fn c_linked(c: f64) -> Self {
        Schedules {
            eta: StepRule::Standard,
            eps: SlackRule::Linked { c },
        }
    }

    /// Absolute slack `4c/(k+2)^2` for joint `(eta, d)` Jones steps.
    pub fn corollary_abs(c: f64) -> Self {
        Schedules {
            eta: StepRule::Standard,
            eps: SlackRule::CorollaryAbs { c },
        }
    }

    pub fn eta(&self, k: u64) -> f64 {
        self.eta.eval(k)
    }

    pub fn eps(&self, k: u64) -> f64 {
        self.eps.eval(k, self.eta(k))
    }

    pub fn validate(&self) -> Result<()> {
        self.eta.validate()?;
        self.eps.validate()
    }

    pub fn ids(&self) -> Vec<String> {
        vec![self.eta.id(), self.eps.id()]
    }
}

/// Minibatch size `b_k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BatchRule {
    Constant(usize),
    /// `b_k = k`
    Linear,
}

impl BatchRule {
    pub fn eval(&self, k: u64) -> usize {
        match *self {
            BatchRule::Constant(b) => b,
            BatchRule::Linear => k.max(1) as usize,
        }
    }

    pub fn id(&self) -> String {
        match self {
            BatchRule::Constant(b) => format!("b={b}"),
            BatchRule::Linear => "b=k".into(),
        }
    }
}

/// Gradient weight `sigma_k` used by the regularized runner.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SigmaRule {
    Zero,
    /// `c * eta_k^(3/2)`
    EtaPower { c: f64 },
    Constant(f64),
}

impl SigmaRule {
    pub fn eval(&self, eta: f64) -> f64 {
        match *self {
            SigmaRule::Zero => 0.0,
            SigmaRule::EtaPower { c } => c * eta.powf(1.5),
            SigmaRule::Constant(v) => v,
        }
    }

    pub fn id(&self) -> String {
        match self {
            SigmaRule::Zero => "sigma=0".into(),
            SigmaRule::EtaPower { c } => format!("sigma={c}*eta^1.5"),
            SigmaRule::Constant(v) => format!("sigma={v}"),
        }
    }
}

/// Schedules of the stochastic runners (1-based `k`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StochasticSchedules {
    pub eta: StepRule,
    pub eps: SlackRule,
    pub batch: BatchRule,
    pub sigma: SigmaRule,
}

impl StochasticSchedules {
    /// `b_k = t`, `eta_k = t^(-1/2)`, `eps_k = c * eta_k`.
    pub fn asj_fixed_horizon(t: u64, c: f64) -> Self {
        StochasticSchedules {
            eta: StepRule::Constant((t as f64).powf(-0.5)),
            eps: SlackRule::Linked { c },
            batch: BatchRule::Constant(t as usize),
            sigma: SigmaRule::Zero,
        }
    }

    /// `b_k = k`, `eta_k = k^(-1/2)`, `eps_k = c * eta_k`.
    pub fn asj_anytime(c: f64) -> Self {
        StochasticSchedules {
            eta: StepRule::Power { exponent: 0.5 },
            eps: SlackRule::Linked { c },
            batch: BatchRule::Linear,
            sigma: SigmaRule::Zero,
        }
    }

    /// Single-sample schedule with `eta_k = 2/(k+2)` and exact oracles.
    pub fn single_sample_standard() -> Self {
        StochasticSchedules {
            eta: StepRule::Standard,
            eps: SlackRule::Zero,
            batch: BatchRule::Constant(1),
            sigma: SigmaRule::Zero,
        }
    }

    /// `eta_k = k^(-p)`, `eps_k = (lambda - 1) R^2 / rho * eta_k`,
    /// `sigma_k = c * eta_k^(3/2)`.
    pub fn arsfw(p: f64, c: f64, lambda: f64, r2: f64, rho: f64) -> Self {
        StochasticSchedules {
            eta: StepRule::Power { exponent: p },
            eps: SlackRule::Linked {
                c: (lambda - 1.0) * r2 / rho,
            },
            batch: BatchRule::Constant(1),
            sigma: SigmaRule::EtaPower { c },
        }
    }

    /// As [`StochasticSchedules::arsfw`] with the constant weight `c / t^(3/4)`.
    pub fn arsfw_fixed_sigma(t: u64, p: f64, c: f64, lambda: f64, r2: f64, rho: f64) -> Self {
        StochasticSchedules {
            sigma: SigmaRule::Constant(c / (t as f64).powf(0.75)),
            ..Self::arsfw(p, c, lambda, r2, rho)
        }
    }

    pub fn eta(&self, k: u64) -> f64 {
        self.eta.eval(k)
    }

    pub fn eps(&self, k: u64) -> f64 {
        self.eps.eval(k, self.eta(k))
    }

    pub fn batch(&self, k: u64) -> usize {
        self.batch.eval(k)
    }

    pub fn sigma(&self, k: u64) -> f64 {
        self.sigma.eval(self.eta(k))
    }

    pub fn validate(&self) -> Result<()> {
        self.eta.validate()?;
        self.eps.validate()?;
        if self.batch == BatchRule::Constant(0) {
            return Err(Error::InvalidSchedule("batch size must be >= 1".into()));
        }
        if let SigmaRule::EtaPower { c } | SigmaRule::Constant(c) = self.sigma {
            if !(c >= 0.0) || !c.is_finite() {
                return Err(Error::InvalidSchedule(format!("sigma parameter {c} < 0")));
            }
        }
        Ok(())
    }

    pub fn ids(&self) -> Vec<String> {
        vec![
            self.eta.id(),
            self.eps.id(),
            self.batch.id(),
            self.sigma.id(),
        ]
    }
}
