//! Per-iteration run records.

use crate::point::Point;

#[derive(Clone, Debug, PartialEq)]
pub struct Record {
    pub k: u64,
    pub eta: f64,
    pub eps: f64,
    pub batch: Option<usize>,
    pub sigma: Option<f64>,
    /// `f(w_k)` on the full objective.
    pub f_w: f64,
    /// `f` at the running weighted average, stochastic runners only.
    pub f_avg: Option<f64>,
    /// Duality gap at `w_k` against the full gradient.
    pub gap: f64,
    /// `f(w_k) - f*` when `f*` is known.
    pub err: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TraceMeta {
    pub problem: String,
    pub algorithm: String,
    pub seed: Option<u64>,
    pub schedules: Vec<String>,
    /// Index of the first record: 0 for the deterministic runner, 1 for the
    /// stochastic ones.
    pub base: u64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trace {
    pub meta: TraceMeta,
    pub records: Vec<Record>,
    /// `w_k` for every record.
    pub iterates: Vec<Point>,
    /// Convex weights of each iterate over a finite atom list, when tracked.
    pub weights: Option<Vec<Vec<f64>>>,
}

impl Trace {
    pub fn last(&self) -> &Record {
        self.records.last().expect("trace has at least one record")
    }

    /// The record with index `k`, if present.
    pub fn at(&self, k: u64) -> Option<&Record> {
        let i = k.checked_sub(self.meta.base)? as usize;
        self.records.get(i)
    }

    pub fn iterate_at(&self, k: u64) -> Option<&Point> {
        let i = k.checked_sub(self.meta.base)? as usize;
        self.iterates.get(i)
    }

    /// `f_avg - f*` at record `k`.
    pub fn avg_err_at(&self, k: u64, f_star: f64) -> Option<f64> {
        self.at(k)?.f_avg.map(|f| f - f_star)
    }
}

/// Tracks convex weights over a finite atom list through `(1 - eta) w + eta a_j`.
#[derive(Clone, Debug)]
pub(crate) struct WeightTracker {
    current: Vec<f64>,
}

impl WeightTracker {
    /// Starts tracking when `w0` is one of the atoms.
    pub(crate) fn start(atoms: &crate::atoms::AtomSet, w0: &Point) -> Option<Self> {
        match atoms {
            crate::atoms::AtomSet::Finite(list) => {
                let j = list.iter().position(|a| a == w0)?;
                let mut current = vec![0.0; list.len()];
                current[j] = 1.0;
                Some(WeightTracker { current })
            }
            crate::atoms::AtomSet::Ball { .. } => None,
        }
    }

    pub(crate) fn step(&mut self, eta: f64, atom: usize) {
        for lam in &mut self.current {
            *lam *= 1.0 - eta;
        }
        self.current[atom] += eta;
    }

    pub(crate) fn current(&self) -> &[f64] {
        &self.current
    }
}
