//! Minimal observability of random CBNs whose dependency graph is a
//! directed Erdős–Rényi graph.
//!
//! `q(p) = (n-1) p (1-p)^(n-1)` is the probability that a node has in-degree
//! one and no self-loop. The expected percentage of nodes that must be
//! observed lies between `100 (1 - q)` and `100 (1 - q/2)`, and `q` peaks at
//! `p = 1/n`.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};
use rayon::prelude::*;
use thiserror::Error;

use crate::minimal::solve_minimal;
use crate::network::Cbn;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error("edge probability {0} is outside [0, 1]")]
    BadProbability(f64),
    #[error("at least one trial is required")]
    NoTrials,
    #[error("at least two nodes are required")]
    TooFewNodes,
    #[error("probability grid is empty")]
    EmptyGrid,
    #[error("CSV output: {0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErConfig {
    pub n: usize,
    pub p: f64,
    pub seed: u64,
    pub trials: usize,
    pub self_loops_allowed: bool,
}

impl ErConfig {
    pub fn new(n: usize, p: f64, seed: u64, trials: usize) -> Result<Self, ExperimentError> {
        let cfg = ErConfig {
            n,
            p,
            seed,
            trials,
            self_loops_allowed: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(ExperimentError::BadProbability(self.p));
        }
        if self.trials == 0 {
            return Err(ExperimentError::NoTrials);
        }
        if self.n < 2 {
            return Err(ExperimentError::TooFewNodes);
        }
        Ok(())
    }

    pub fn with_p(&self, p: f64) -> Self {
        ErConfig { p, ..self.clone() }
    }
}

/// Random stream for one trial. Streams are independent of `p`, so every
/// grid point sees the same sequence of uniforms for a given trial.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// Samples a network in which each ordered pair `(i, j)` is an edge with
/// probability `p`, independently. Nothing is observed.
pub fn generate_random_cbn(cfg: &ErConfig, trial: usize) -> Cbn {
    let n = cfg.n;
    let mut rng = trial_rng(cfg.seed, trial);
    let mut updates = vec![Vec::new(); n];
    let total = (n as u64) * (n as u64);
    let mut push = |pos: u64| {
        let target = (pos / n as u64) as usize;
        let source = (pos % n as u64) as usize;
        if cfg.self_loops_allowed || source != target {
            updates[target].push(source);
        }
    };
    if cfg.p >= 1.0 {
        (0..total).for_each(&mut push);
    } else if cfg.p > 0.0 {
        // Skip over non-edges: gaps between successive edges in the
        // row-major order of all n^2 pairs are geometric.
        let gaps = Geometric::new(cfg.p).expect("p in (0, 1)");
        let mut pos = gaps.sample(&mut rng);
        while pos < total {
            push(pos);
            pos = match pos.checked_add(1 + gaps.sample(&mut rng)) {
                Some(next) => next,
                None => break,
            };
        }
    }
    Cbn::new(updates, []).expect("generated arguments are in range")
}

pub fn q_of_p(n: usize, p: f64) -> f64 {
    let n = n as f64;
    (n - 1.0) * p * (1.0 - p).powf(n - 1.0)
}

/// Lower and upper bounds, in percent, on the expected share of nodes that
/// must be observed.
pub fn bounds(n: usize, p: f64) -> (f64, f64) {
    let q = q_of_p(n, p);
    (100.0 * (1.0 - q), 100.0 * (1.0 - q / 2.0))
}

/// Second derivative of `q` with respect to `p`.
pub fn curvature_at(n: usize, p: f64) -> f64 {
    let nf = n as f64;
    -(nf - 1.0).powi(2) * (1.0 - p).powf(nf - 3.0) * (2.0 - nf * p)
}

/// The maximizer of `q`.
pub fn optimal_p(n: usize) -> f64 {
    1.0 / n as f64
}

/// Grid point of `grid` with the largest `q`.
pub fn argmax_q(n: usize, grid: &[f64]) -> Option<f64> {
    grid.iter()
        .copied()
        .max_by(|a, b| q_of_p(n, *a).total_cmp(&q_of_p(n, *b)))
}

/// `points` log-spaced probabilities from `0.01/n` to `100/n` (clipped to 1).
pub fn default_grid(n: usize, points: usize) -> Vec<f64> {
    let lo = (0.01 / n as f64).ln();
    let hi = (100.0 / n as f64).min(1.0).ln();
    if points <= 1 {
        return vec![optimal_p(n)];
    }
    (0..points)
        .map(|i| (lo + (hi - lo) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub n: usize,
    pub p: f64,
    pub trials: usize,
    /// Mean over trials of `100 k / n`.
    pub mean_s: f64,
    /// Sample standard deviation of `100 k / n`.
    pub std_s: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    /// Minimal solution size of each trial, by trial index.
    pub k: Vec<usize>,
}

impl ExperimentRecord {
    pub fn standard_error(&self) -> f64 {
        self.std_s / (self.trials as f64).sqrt()
    }
}

fn record(cfg: &ErConfig, k: Vec<usize>) -> ExperimentRecord {
    let n = cfg.n as f64;
    let s: Vec<f64> = k.iter().map(|&k| 100.0 * k as f64 / n).collect();
    let t = s.len() as f64;
    let mean = s.iter().sum::<f64>() / t;
    let var = if s.len() > 1 {
        s.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (t - 1.0)
    } else {
        0.0
    };
    let (lower, upper) = bounds(cfg.n, cfg.p);
    ExperimentRecord {
        n: cfg.n,
        p: cfg.p,
        trials: cfg.trials,
        mean_s: mean,
        std_s: var.sqrt(),
        lower_bound: lower,
        upper_bound: upper,
        k,
    }
}

/// Solves `cfg.trials` random networks for each probability in `grid`.
pub fn run_experiment(
    cfg: &ErConfig,
    grid: &[f64],
) -> Result<Vec<ExperimentRecord>, ExperimentError> {
    cfg.validate()?;
    if grid.is_empty() {
        return Err(ExperimentError::EmptyGrid);
    }
    if let Some(&bad) = grid.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(ExperimentError::BadProbability(bad));
    }
    Ok(grid
        .iter()
        .map(|&p| {
            let point = cfg.with_p(p);
            let k: Vec<usize> = (0..cfg.trials)
                .into_par_iter()
                .map(|trial| solve_minimal(&generate_random_cbn(&point, trial)).size())
                .collect();
            record(&point, k)
        })
        .collect())
}

/// Writes `n,p,trials,mean_s,std_s,lower_bound,upper_bound`.
pub fn write_summary_csv(
    records: &[ExperimentRecord],
    out: impl Write,
) -> Result<(), ExperimentError> {
    let err = |e: csv::Error| ExperimentError::Io(e.to_string());
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "n",
        "p",
        "trials",
        "mean_s",
        "std_s",
        "lower_bound",
        "upper_bound",
    ])
    .map_err(err)?;
    for r in records {
        w.write_record([
            r.n.to_string(),
            r.p.to_string(),
            r.trials.to_string(),
            format!("{:.4}", r.mean_s),
            format!("{:.4}", r.std_s),
            format!("{:.4}", r.lower_bound),
            format!("{:.4}", r.upper_bound),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| ExperimentError::Io(e.to_string()))
}

/// Writes the long-format `n,p,trial,k` table.
pub fn write_per_trial_csv(
    records: &[ExperimentRecord],
    out: impl Write,
) -> Result<(), ExperimentError> {
    let err = |e: csv::Error| ExperimentError::Io(e.to_string());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "p", "trial", "k"]).map_err(err)?;
    for r in records {
        for (trial, k) in r.k.iter().enumerate() {
            w.write_record([
                r.n.to_string(),
                r.p.to_string(),
                trial.to_string(),
                k.to_string(),
            ])
            .map_err(err)?;
        }
    }
    w.flush().map_err(|e| ExperimentError::Io(e.to_string()))
}

/// Fraction of nodes, over `trials` sampled graphs, with in-degree one and
/// no self-loop, together with its standard error.
pub fn sample_in_degree_one_fraction(cfg: &ErConfig) -> (f64, f64) {
    let fractions: Vec<f64> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let cbn = generate_random_cbn(cfg, trial);
            let hits = (0..cbn.n())
                .filter(|&v| matches!(cbn.args(v), [u] if *u != v))
                .count();
            hits as f64 / cfg.n as f64
        })
        .collect();
    let t = fractions.len() as f64;
    let mean = fractions.iter().sum::<f64>() / t;
    let var = fractions.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (t - 1.0).max(1.0);
    (mean, (var / t).sqrt())
}
