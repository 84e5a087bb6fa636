//! Run configuration files and their execution.
//!
//! A config is a flat list of `key = value` lines; `#` starts a comment.
//! Required keys: `problem`, `algorithm`, `T`, `seed`, `output`. Everything
//! else has a default (`oracle_mode = exact`, `replicas = 1`, ...).

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::atoms::{Oracle, OracleMode};
use crate::error::{Error, Result};
use crate::greedy::{Algorithm, DeterministicRun, MixPolicy};
use crate::problems::{lipschitz_bound, ProblemId, ProblemInstance};
use crate::schedule::{BatchRule, Schedules, SigmaRule, SlackRule, StepRule, StochasticSchedules};
use crate::stochastic::{
    arsfw_run, asfw_run, asj_run, ArsfwParams, InnerMode, SigmaMode,
    StochasticRun,
};
use crate::trace::Trace;

pub const CSV_HEADER: &str = "k,eta,eps,b,sigma,f_w,f_avg,gap,err,replica,seed";

const KEYS: [&str; 18] = [
    "problem",
    "algorithm",
    "T",
    "eta",
    "eps",
    "batch",
    "sigma",
    "c",
    "p",
    "lambda",
    "t_horizon",
    "eps_exponent",
    "oracle_mode",
    "inner_mode",
    "mix",
    "seed",
    "replicas",
    "output",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlgorithmKind {
    Jones,
    Fw,
    Mixed,
    Asj,
    Asfw,
    Arsfw,
}

impl AlgorithmKind {
    fn is_deterministic(self) -> bool {
        matches!(self, AlgorithmKind::Jones | AlgorithmKind::Fw | AlgorithmKind::Mixed)
    }
}

/// Step-size preset.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EtaPreset {
    /// `2 / (k + 2)`
    Standard,
    /// `k^(-p)`
    Power,
    /// `t_horizon^(-1/2)`
    FixedHorizon,
    /// `k^(-1/2)`
    Anytime,
}

/// Oracle slack preset.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EpsPreset {
    Zero,
    /// `c * eta_k`
    Linked,
    /// `c * k^(-eps_exponent)`
    Power,
    /// `(lambda - 1) R^2 eta_k`, the regularized runner's own slack.
    Regularized,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BatchPreset {
    One,
    /// `b_k = t_horizon`
    FixedHorizon,
    /// `b_k = k`
    Anytime,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SigmaPreset {
    /// `c eta_k^(3/2)`
    Varying,
    /// `c / t_horizon^(3/4)`
    Fixed,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub problem: ProblemId,
    pub algorithm: AlgorithmKind,
    pub iterations: u64,
    pub eta: EtaPreset,
    pub eps: EpsPreset,
    pub batch: Option<BatchPreset>,
    pub sigma: Option<SigmaPreset>,
    pub c: f64,
    pub p: f64,
    pub lambda: f64,
    pub t_horizon: u64,
    pub eps_exponent: f64,
    pub oracle_mode: OracleMode,
    pub inner_mode: Option<InnerMode>,
    pub mix: Option<MixPolicy>,
    pub seed: u64,
    pub replicas: u64,
    pub output: PathBuf,
}

impl RunConfig {
    /// Deterministic schedules; `None` for the stochastic algorithms.
    pub fn schedules(&self) -> Option<Schedules> {
        self.algorithm.is_deterministic().then(|| Schedules {
            eta: self.step_rule(),
            eps: self.slack_rule(),
        })
    }

    /// Stochastic schedules for ASJ and ASFW.
    pub fn stochastic_schedules(&self) -> Option<StochasticSchedules> {
        let batch = self.batch?;
        Some(StochasticSchedules {
            eta: self.step_rule(),
            eps: self.slack_rule(),
            batch: match batch {
                BatchPreset::One => BatchRule::Constant(1),
                BatchPreset::FixedHorizon => BatchRule::Constant(self.t_horizon as usize),
                BatchPreset::Anytime => BatchRule::Linear,
            },
            sigma: SigmaRule::Zero,
        })
    }

    fn step_rule(&self) -> StepRule {
        match self.eta {
            EtaPreset::Standard => StepRule::Standard,
            EtaPreset::Power => StepRule::Power { exponent: self.p },
            EtaPreset::FixedHorizon => StepRule::Constant((self.t_horizon as f64).powf(-0.5)),
            EtaPreset::Anytime => StepRule::Power { exponent: 0.5 },
        }
    }

    fn slack_rule(&self) -> SlackRule {
        match self.eps {
            EpsPreset::Zero | EpsPreset::Regularized => SlackRule::Zero,
            EpsPreset::Linked => SlackRule::Linked { c: self.c },
            EpsPreset::Power => SlackRule::Power {
                scale: self.c,
                exponent: self.eps_exponent,
            },
        }
    }
}

struct Entry<'a> {
    line: usize,
    key: &'a str,
    value: &'a str,
}

fn perr(line: usize, key: &str, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        key: key.into(),
        message: message.into(),
    }
}

fn parse_value<T: std::str::FromStr>(e: &Entry<'_>, what: &str) -> Result<T> {
    e.value
        .parse()
        .map_err(|_| perr(e.line, e.key, format!("`{}` is not {what}", e.value)))
}

fn choose<T: Copy>(e: &Entry<'_>, options: &[(&str, T)]) -> Result<T> {
    options
        .iter()
        .find(|(name, _)| *name == e.value)
        .map(|(_, v)| *v)
        .ok_or_else(|| {
            let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
            perr(
                e.line,
                e.key,
                format!("`{}` is not one of {}", e.value, names.join(", ")),
            )
        })
}

/// Parses and validates a run configuration.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut entries: Vec<Entry<'_>> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| perr(line, content, "expected `key = value`"))?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(perr(line, key, "unknown key"));
        }
        if let Some(prev) = entries.iter().find(|e| e.key == key) {
            return Err(perr(line, key, format!("already set on line {}", prev.line)));
        }
        if value.is_empty() {
            return Err(perr(line, key, "empty value"));
        }
        entries.push(Entry { line, key, value });
    }
    let last = text.lines().count() + 1;
    let get = |key: &str| entries.iter().find(|e| e.key == key);
    let require = |key: &str| get(key).ok_or_else(|| perr(last, key, "missing required key"));
    let reject_unless = |key: &str, ok: bool, why: &str| -> Result<()> {
        match get(key) {
            Some(e) if !ok => Err(perr(e.line, key, format!("not used {why}"))),
            _ => Ok(()),
        }
    };

    let e = require("problem")?;
    let problem: ProblemId = e
        .value
        .parse()
        .map_err(|err: Error| perr(e.line, e.key, err.to_string()))?;
    let algorithm = choose(
        require("algorithm")?,
        &[
            ("jones", AlgorithmKind::Jones),
            ("fw", AlgorithmKind::Fw),
            ("mixed", AlgorithmKind::Mixed),
            ("asj", AlgorithmKind::Asj),
            ("asfw", AlgorithmKind::Asfw),
            ("arsfw", AlgorithmKind::Arsfw),
        ],
    )?;
    let e = require("T")?;
    let iterations: u64 = parse_value(e, "a positive integer")?;
    if iterations == 0 {
        return Err(perr(e.line, e.key, "must be >= 1"));
    }
    let seed: u64 = parse_value(require("seed")?, "a 64-bit unsigned integer")?;
    let output = PathBuf::from(require("output")?.value);

    let replicas = match get("replicas") {
        Some(e) => {
            let r: u64 = parse_value(e, "a positive integer")?;
            if r == 0 {
                return Err(perr(e.line, e.key, "must be >= 1"));
            }
            r
        }
        None => 1,
    };
    let oracle_mode = match get("oracle_mode") {
        Some(e) => e
            .value
            .parse()
            .map_err(|err: Error| perr(e.line, e.key, err.to_string()))?,
        None => OracleMode::Exact,
    };
    let real = |key: &str, default: f64, check: fn(f64) -> bool, why: &str| -> Result<f64> {
        match get(key) {
            Some(e) => {
                let v: f64 = parse_value(e, "a number")?;
                if v.is_finite() && check(v) {
                    Ok(v)
                } else {
                    Err(perr(e.line, key, why.to_string()))
                }
            }
            None => Ok(default),
        }
    };
    let c_default = if algorithm == AlgorithmKind::Arsfw { 1.0 } else { 0.0 };
    let c = real("c", c_default, |v| v >= 0.0, "must be >= 0")?;
    let p = real("p", 0.5, |v| v > 0.0 && v < 1.0, "must lie in (0, 1)")?;
    let lambda = real("lambda", 1.0, |v| v >= 1.0, "must be >= 1")?;
    let eps_exponent = real("eps_exponent", 0.25, |v| v > 0.0, "must be > 0")?;
    let t_horizon = match get("t_horizon") {
        Some(e) => {
            let t: u64 = parse_value(e, "a positive integer")?;
            if t == 0 {
                return Err(perr(e.line, e.key, "must be >= 1"));
            }
            t
        }
        None => iterations,
    };

    let batch_applies = matches!(algorithm, AlgorithmKind::Asj | AlgorithmKind::Asfw);
    reject_unless("batch", batch_applies, "by this algorithm")?;
    let batch = if batch_applies {
        Some(match get("batch") {
            Some(e) => choose(
                e,
                &[
                    ("one", BatchPreset::One),
                    ("fixed-horizon", BatchPreset::FixedHorizon),
                    ("anytime", BatchPreset::Anytime),
                ],
            )?,
            None => BatchPreset::One,
        })
    } else {
        None
    };

    let is_arsfw = algorithm == AlgorithmKind::Arsfw;
    reject_unless("sigma", is_arsfw, "outside arsfw")?;
    reject_unless("lambda", is_arsfw, "outside arsfw")?;
    let sigma = if is_arsfw {
        Some(match get("sigma") {
            Some(e) => choose(e, &[("varying", SigmaPreset::Varying), ("fixed", SigmaPreset::Fixed)])?,
            None => SigmaPreset::Varying,
        })
    } else {
        None
    };

    let eta = match get("eta") {
        Some(e) if is_arsfw => choose(e, &[("power", EtaPreset::Power)])?,
        Some(e) => choose(
            e,
            &[
                ("standard", EtaPreset::Standard),
                ("power", EtaPreset::Power),
                ("fixed-horizon", EtaPreset::FixedHorizon),
                ("anytime", EtaPreset::Anytime),
            ],
        )?,
        None => match batch {
            _ if is_arsfw => EtaPreset::Power,
            Some(BatchPreset::FixedHorizon) => EtaPreset::FixedHorizon,
            Some(BatchPreset::Anytime) => EtaPreset::Anytime,
            _ => EtaPreset::Standard,
        },
    };
    let eps = match get("eps") {
        Some(e) if is_arsfw => choose(e, &[("regularized", EpsPreset::Regularized)])?,
        Some(e) => choose(
            e,
            &[
                ("zero", EpsPreset::Zero),
                ("linked", EpsPreset::Linked),
                ("power", EpsPreset::Power),
            ],
        )?,
        None if is_arsfw => EpsPreset::Regularized,
        None => EpsPreset::Zero,
    };
    if is_arsfw && oracle_mode != OracleMode::Exact {
        let e = get("oracle_mode").expect("non-default mode was set");
        return Err(perr(e.line, e.key, "arsfw uses the exact oracle with its own slack"));
    }

    reject_unless("inner_mode", algorithm == AlgorithmKind::Asj, "outside asj")?;
    let inner_mode = if algorithm == AlgorithmKind::Asj {
        Some(match get("inner_mode") {
            Some(e) => e
                .value
                .parse()
                .map_err(|err: Error| perr(e.line, e.key, err.to_string()))?,
            None => InnerMode::FixedEta,
        })
    } else {
        None
    };

    reject_unless("mix", algorithm == AlgorithmKind::Mixed, "outside mixed")?;
    let mix = if algorithm == AlgorithmKind::Mixed {
        Some(match get("mix") {
            Some(e) => parse_mix(e)?,
            None => MixPolicy::Alternate,
        })
    } else {
        None
    };

    Ok(RunConfig {
        problem,
        algorithm,
        iterations,
        eta,
        eps,
        batch,
        sigma,
        c,
        p,
        lambda,
        t_horizon,
        eps_exponent,
        oracle_mode,
        inner_mode,
        mix,
        seed,
        replicas,
        output,
    })
}

fn parse_mix(e: &Entry<'_>) -> Result<MixPolicy> {
    if e.value == "alternate" {
        return Ok(MixPolicy::Alternate);
    }
    match e.value.strip_prefix("jones-every-").map(str::parse::<u64>) {
        Some(Ok(m)) if m >= 1 => Ok(MixPolicy::JonesEvery(m)),
        _ => Err(perr(
            e.line,
            e.key,
            format!("`{}` is not `alternate` or `jones-every-<m>`", e.value),
        )),
    }
}

/// Final values of one replica.
#[derive(Clone, Debug, PartialEq)]
pub struct ReplicaSummary {
    pub replica: u64,
    pub seed: u64,
    pub f_w: f64,
    pub gap: f64,
    pub err: Option<f64>,
    pub f_avg: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub replicas: Vec<ReplicaSummary>,
    pub output: PathBuf,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (m, var.sqrt())
}

impl std::fmt::Display for RunSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for r in &self.replicas {
            write!(
                f,
                "replica {} seed {}: final f = {:.10e}, gap = {:.6e}",
                r.replica, r.seed, r.f_w, r.gap
            )?;
            if let Some(e) = r.err {
                write!(f, ", err = {e:.6e}")?;
            }
            writeln!(f)?;
        }
        let fs: Vec<f64> = self.replicas.iter().map(|r| r.f_w).collect();
        let (m, s) = mean_std(&fs);
        write!(f, "mean over {} replicas: f = {m:.10e} (sd {s:.3e})", fs.len())?;
        let gaps: Vec<f64> = self.replicas.iter().map(|r| r.gap).collect();
        let (m, s) = mean_std(&gaps);
        write!(f, ", gap = {m:.6e} (sd {s:.3e})")?;
        let errs: Option<Vec<f64>> = self.replicas.iter().map(|r| r.err).collect();
        if let Some(errs) = errs {
            let (m, s) = mean_std(&errs);
            write!(f, ", err = {m:.6e} (sd {s:.3e})")?;
        }
        writeln!(f, "; csv written to {}", self.output.display())
    }
}

fn fmt_real(out: &mut String, v: f64) {
    let _ = write!(out, "{v:.16e}");
}

fn fmt_opt(out: &mut String, v: Option<f64>) {
    if let Some(v) = v {
        fmt_real(out, v);
    }
}

/// CSV rows (without header) of one replica's trace.
pub fn trace_rows(trace: &Trace, replica: u64, seed: u64) -> String {
    let mut out = String::new();
    for r in &trace.records {
        let _ = write!(out, "{},", r.k);
        fmt_real(&mut out, r.eta);
        out.push(',');
        fmt_real(&mut out, r.eps);
        out.push(',');
        if let Some(b) = r.batch {
            let _ = write!(out, "{b}");
        }
        out.push(',');
        fmt_opt(&mut out, r.sigma);
        out.push(',');
        fmt_real(&mut out, r.f_w);
        out.push(',');
        fmt_opt(&mut out, r.f_avg);
        out.push(',');
        fmt_real(&mut out, r.gap);
        out.push(',');
        fmt_opt(&mut out, r.err);
        let _ = writeln!(out, ",{replica},{seed}");
    }
    out
}

/// Runs one replica with the given seed.
pub fn run_replica(config: &RunConfig, inst: &ProblemInstance, seed: u64) -> Result<Trace> {
    let t = config.iterations;
    match config.algorithm {
        AlgorithmKind::Jones | AlgorithmKind::Fw | AlgorithmKind::Mixed => {
            let algorithm = match config.algorithm {
                AlgorithmKind::Jones => Algorithm::Jones,
                AlgorithmKind::Fw => Algorithm::FrankWolfe,
                _ => Algorithm::Mixed(config.mix.unwrap_or(MixPolicy::Alternate)),
            };
            let schedules = config.schedules().expect("deterministic algorithm");
            let mut run = DeterministicRun::new(schedules, t, algorithm).with_problem(&inst.name);
            run.f_star = inst.f_star;
            let mut oracle = Oracle::for_mode(config.oracle_mode, seed);
            let mut trace = run.run(&inst.fsum, &inst.atoms, inst.start(), &mut oracle)?;
            trace.meta.seed = Some(seed);
            Ok(trace)
        }
        AlgorithmKind::Asj | AlgorithmKind::Asfw => {
            let schedules = config.stochastic_schedules().expect("stochastic algorithm");
            let run = StochasticRun::new(schedules, t, seed)
                .with_f_star(inst.f_star)
                .with_oracle(config.oracle_mode)
                .with_problem(&inst.name);
            if config.algorithm == AlgorithmKind::Asj {
                let inner = config.inner_mode.unwrap_or(InnerMode::FixedEta);
                asj_run(&inst.fsum, &inst.atoms, inst.start(), &run, inner)
            } else {
                asfw_run(&inst.fsum, &inst.atoms, inst.start(), &run)
            }
        }
        AlgorithmKind::Arsfw => {
            let sigma_mode = match config.sigma {
                Some(SigmaPreset::Fixed) => SigmaMode::Fixed {
                    horizon: config.t_horizon,
                },
                _ => SigmaMode::Varying,
            };
            let lip = lipschitz_bound(&inst.fsum, &inst.atoms);
            let params = ArsfwParams {
                p: config.p,
                c: config.c,
                lambda: config.lambda,
            };
            let mut run = arsfw_run(
                &inst.fsum,
                &inst.atoms,
                params,
                lip,
                t,
                seed,
                sigma_mode,
                inst.f_star,
            )?;
            run.trace.meta.problem = inst.name.clone();
            Ok(run.trace)
        }
    }
}

/// Runs every replica, writes the CSV, and returns the per-replica summary.
pub fn execute(config: &RunConfig) -> Result<RunSummary> {
    let inst = config.problem.build()?;
    let results: Vec<Result<(String, ReplicaSummary)>> = (0..config.replicas)
        .into_par_iter()
        .map(|i| {
            let seed = config.seed.wrapping_add(i);
            let trace = run_replica(config, &inst, seed)?;
            let last = trace.last();
            let summary = ReplicaSummary {
                replica: i,
                seed,
                f_w: last.f_w,
                gap: last.gap,
                err: last.err,
                f_avg: last.f_avg,
            };
            Ok((trace_rows(&trace, i, seed), summary))
        })
        .collect();
    let mut csv = String::with_capacity(1 << 16);
    csv.push_str(CSV_HEADER);
    csv.push('\n');
    let mut replicas = Vec::with_capacity(results.len());
    for r in results {
        let (rows, summary) = r?;
        csv.push_str(&rows);
        replicas.push(summary);
    }
    write_file(&config.output, csv.as_bytes())?;
    Ok(RunSummary {
        replicas,
        output: config.output.clone(),
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut file = fs::File::create(path).map_err(io)?;
    file.write_all(bytes).map_err(io)
}

/// Reads and parses a config file.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "problem = asj-triangle\nalgorithm = jones\nT = 10\nseed = 1\noutput = out.csv\n";

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.oracle_mode, OracleMode::Exact);
        assert_eq!(c.replicas, 1);
        assert_eq!(c.eta, EtaPreset::Standard);
        assert_eq!(c.eps, EpsPreset::Zero);
        assert_eq!(c.batch, None);
        let s = c.schedules().unwrap();
        assert_eq!(s.eta(0), 1.0);
        assert_eq!(s.eta(2), 0.5);
    }

    #[test]
    fn standard_eta_for_jones() {
        let c = parse_config(&format!("{MINIMAL}eta = standard\n")).unwrap();
        let s = c.schedules().unwrap();
        for k in 0..50 {
            assert_eq!(s.eta(k), 2.0 / (k as f64 + 2.0));
        }
    }

    #[test]
    fn anytime_batch_for_asj() {
        let text = MINIMAL.replace("jones", "asj") + "batch = anytime\n";
        let c = parse_config(&text).unwrap();
        let s = c.stochastic_schedules().unwrap();
        for k in 1..50u64 {
            assert_eq!(s.batch(k), k as usize);
            assert_eq!(s.eta(k), (k as f64).powf(-0.5));
        }
    }

    #[test]
    fn errors_name_line_and_key() {
        let text = format!("{MINIMAL}# comment\nbogus = 3\n");
        match parse_config(&text) {
            Err(Error::Parse { line, key, .. }) => {
                assert_eq!(line, 7);
                assert_eq!(key, "bogus");
            }
            other => panic!("{other:?}"),
        }
        match parse_config(&MINIMAL.replace("T = 10", "T = ten")) {
            Err(Error::Parse { line, key, .. }) => {
                assert_eq!(line, 3);
                assert_eq!(key, "T");
            }
            other => panic!("{other:?}"),
        }
        match parse_config(&MINIMAL.replace("seed = 1\n", "")) {
            Err(Error::Parse { key, message, .. }) => {
                assert_eq!(key, "seed");
                assert!(message.contains("missing"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_inapplicable_and_duplicate_keys() {
        assert!(parse_config(&format!("{MINIMAL}batch = one\n")).is_err());
        assert!(parse_config(&format!("{MINIMAL}T = 5\n")).is_err());
        assert!(parse_config(&format!("{MINIMAL}oracle_mode = lazy\n")).is_err());
        assert!(parse_config(&format!("{MINIMAL}replicas = 0\n")).is_err());
    }

    #[test]
    fn csv_rows_use_empty_fields() {
        let c = parse_config(MINIMAL).unwrap();
        let inst = c.problem.build().unwrap();
        let trace = run_replica(&c, &inst, 1).unwrap();
        let rows = trace_rows(&trace, 0, 1);
        let first = rows.lines().next().unwrap();
        let fields: Vec<&str> = first.split(',').collect();
        assert_eq!(fields.len(), CSV_HEADER.split(',').count());
        assert_eq!(fields[3], "");
        assert_eq!(fields[4], "");
        assert_eq!(fields[6], "");
        assert!(!fields[8].is_empty());
        let eta: f64 = fields[1].parse().unwrap();
        assert_eq!(eta, 1.0);
    }
}
