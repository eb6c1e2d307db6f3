//! Exhaustive observability oracle for small networks.
//!
//! Two initial states are indistinguishable when their output sequences
//! agree forever. The pair `(x(k), y(k))` evolves deterministically over a
//! finite space, so it is enough to simulate until the joint state repeats
//! (Brent cycle detection) or the two trajectories merge. Nothing here looks
//! at the dependency graph.

use rayon::prelude::*;
use thiserror::Error;

use crate::minimal::MinimalSolution;
use crate::network::Cbn;

pub const DEFAULT_ORACLE_MAX_N: usize = 12;
pub const DEFAULT_MINIMALITY_MAX_N: usize = 10;
pub const MINIMALITY_MAX_CHOSEN: usize = 4;

/// Hard ceiling for the state table (2^24 entries).
const TABLE_LIMIT_BITS: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("network has {n} variables; the exhaustive oracle is limited to {max_n}")]
    TooLarge { n: usize, max_n: usize },
    #[error("solution has {size} nodes; brute-force minimality is limited to {max}")]
    SolutionTooLarge { size: usize, max: usize },
}

/// Deterministic finite dynamics with states encoded as bit masks.
pub trait FiniteDynamics: Sync {
    fn state_bits(&self) -> usize;
    fn step(&self, state: u64) -> u64;
    /// Output vector of `state`, encoded as bits.
    fn output(&self, state: u64) -> u64;
}

/// Successor and output of every state.
pub struct StateTable {
    succ: Vec<u32>,
    out: Vec<u64>,
}

impl StateTable {
    pub fn new(dynamics: &impl FiniteDynamics) -> Self {
        let bits = dynamics.state_bits();
        assert!(bits <= TABLE_LIMIT_BITS, "state table too large");
        let size = 1usize << bits;
        let (succ, out) = (0..size as u64)
            .into_par_iter()
            .map(|s| (dynamics.step(s) as u32, dynamics.output(s)))
            .unzip();
        StateTable { succ, out }
    }

    pub fn state_count(&self) -> usize {
        self.succ.len()
    }

    /// True when the output sequences from `a` and `b` agree for all time.
    pub fn indistinguishable(&self, a: u64, b: u64) -> bool {
        let (mut x, mut y) = (a as usize, b as usize);
        if self.out[x] != self.out[y] {
            return false;
        }
        let mut tortoise = (x, y);
        let mut power = 1u64;
        let mut lam = 0u64;
        loop {
            if x == y {
                return true;
            }
            x = self.succ[x] as usize;
            y = self.succ[y] as usize;
            if self.out[x] != self.out[y] {
                return false;
            }
            lam += 1;
            if (x, y) == tortoise {
                return true;
            }
            if lam == power {
                tortoise = (x, y);
                power *= 2;
                lam = 0;
            }
        }
    }

    /// True when the first `samples` outputs from `a` and `b` agree.
    pub fn agree_for(&self, a: u64, b: u64, samples: usize) -> bool {
        let (mut x, mut y) = (a as usize, b as usize);
        for k in 0..samples {
            if self.out[x] != self.out[y] {
                return false;
            }
            if k + 1 < samples {
                x = self.succ[x] as usize;
                y = self.succ[y] as usize;
            }
        }
        true
    }

    /// First pair `a < b` (lexicographic) satisfying `pred`.
    fn first_pair(&self, pred: impl Fn(u64, u64) -> bool + Sync) -> Option<(u64, u64)> {
        let size = self.succ.len() as u64;
        (0..size).into_par_iter().find_map_first(|a| {
            let oa = self.out[a as usize];
            (a + 1..size)
                .filter(|&b| self.out[b as usize] == oa)
                .find(|&b| pred(a, b))
                .map(|b| (a, b))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleVerdict {
    pub observable: bool,
    /// Lexicographically first indistinguishable pair of initial states.
    pub witness: Option<(u64, u64)>,
}

/// Runs the pair-simulation oracle on arbitrary finite dynamics.
pub fn check_dynamics(dynamics: &impl FiniteDynamics) -> OracleVerdict {
    let table = StateTable::new(dynamics);
    let witness = table.first_pair(|a, b| table.indistinguishable(a, b));
    OracleVerdict {
        observable: witness.is_none(),
        witness,
    }
}

/// Synchronous CBN dynamics on bit masks: bit `i` is `x_{i+1}`.
pub struct CbnDynamics {
    masks: Vec<u64>,
    observed_mask: u64,
}

impl CbnDynamics {
    pub fn new(cbn: &Cbn) -> Self {
        assert!(cbn.n() <= 64, "bit-mask dynamics need n <= 64");
        let masks = cbn
            .updates()
            .iter()
            .map(|args| args.iter().fold(0u64, |m, &j| m | (1 << j)))
            .collect();
        let observed_mask = cbn.observed().iter().fold(0u64, |m, &j| m | (1 << j));
        CbnDynamics {
            masks,
            observed_mask,
        }
    }
}

impl FiniteDynamics for CbnDynamics {
    fn state_bits(&self) -> usize {
        self.masks.len()
    }

    fn step(&self, state: u64) -> u64 {
        self.masks.iter().enumerate().fold(0, |next, (i, &m)| {
            if state & m == m {
                next | (1 << i)
            } else {
                next
            }
        })
    }

    fn output(&self, state: u64) -> u64 {
        state & self.observed_mask
    }
}

fn guard(cbn: &Cbn, max_n: usize) -> Result<(), OracleError> {
    let max_n = max_n.min(TABLE_LIMIT_BITS);
    if cbn.n() > max_n {
        Err(OracleError::TooLarge { n: cbn.n(), max_n })
    } else {
        Ok(())
    }
}

pub fn oracle_check(cbn: &Cbn, max_n: usize) -> Result<OracleVerdict, OracleError> {
    guard(cbn, max_n)?;
    Ok(check_dynamics(&CbnDynamics::new(cbn)))
}

pub fn oracle_is_observable(cbn: &Cbn, max_n: usize) -> Result<bool, OracleError> {
    oracle_check(cbn, max_n).map(|v| v.observable)
}

/// First pair of distinct initial states whose first `samples` outputs
/// coincide, if any.
pub fn ambiguous_pair_within(
    cbn: &Cbn,
    samples: usize,
    max_n: usize,
) -> Result<Option<(u64, u64)>, OracleError> {
    guard(cbn, max_n)?;
    let table = StateTable::new(&CbnDynamics::new(cbn));
    Ok(table.first_pair(|a, b| table.agree_for(a, b, samples)))
}

/// Brute-force check that `sol.chosen` is a smallest set of sensors making
/// `cbn` observable: the augmented network passes the oracle, and no set of
/// unobserved nodes with fewer elements does.
pub fn verify_minimality_bruteforce(
    cbn: &Cbn,
    sol: &MinimalSolution,
    max_n: usize,
) -> Result<bool, OracleError> {
    guard(cbn, max_n)?;
    let size = sol.chosen.len();
    if size > MINIMALITY_MAX_CHOSEN {
        return Err(OracleError::SolutionTooLarge {
            size,
            max: MINIMALITY_MAX_CHOSEN,
        });
    }
    let augmented = match cbn.with_observed(sol.chosen.iter().copied()) {
        Ok(c) => c,
        Err(_) => return Ok(false),
    };
    if !oracle_is_observable(&augmented, max_n)? {
        return Ok(false);
    }
    let candidates: Vec<usize> = (0..cbn.n()).filter(|&i| !cbn.is_observed(i)).collect();
    let mut subset = Vec::new();
    for k in 0..size {
        if any_subset_observable(cbn, &candidates, k, 0, &mut subset, max_n)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn any_subset_observable(
    cbn: &Cbn,
    candidates: &[usize],
    k: usize,
    from: usize,
    subset: &mut Vec<usize>,
    max_n: usize,
) -> Result<bool, OracleError> {
    if subset.len() == k {
        let augmented = cbn
            .with_observed(subset.iter().copied())
            .expect("candidates are in range");
        return oracle_is_observable(&augmented, max_n);
    }
    for idx in from..candidates.len() {
        subset.push(candidates[idx]);
        let found = any_subset_observable(cbn, candidates, k, idx + 1, subset, max_n)?;
        subset.pop();
        if found {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Decodes a bit-mask state into a vector, `x1` first.
pub fn state_bits(state: u64, n: usize) -> Vec<bool> {
    (0..n).map(|i| state >> i & 1 == 1).collect()
}
