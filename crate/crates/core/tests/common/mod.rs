#![allow(dead_code)]

use cbn_observe::Cbn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const LOOP3: &str = "x1 <- x2 x3\nx2 <- x1\nx3 <- x2\n";
pub const TWO_CYCLES: &str =
    "x1 <- x2 x4\nx2 <- x3\nx3 <- x2\nx4 <- x6\nx5 <- x4\nx6 <- x5\nobserve x1\n";
pub const TWO_PATHS: &str =
    "x1 <- x3\nx2 <- x5\nx3 <- x4\nx4 <- x2 x3\nx5 <- x1 x5\nobserve x1 x2\n";
pub const SELF_GATE: &str = "x1 <- x2\nx2 <- x1 x2\nobserve x1\n";

/// Random small network with no constant variables. Edge density is drawn
/// per instance so that both sparse (shift-register-like) and dense
/// networks appear.
pub fn random_cbn(rng: &mut ChaCha8Rng, n_min: usize, n_max: usize) -> Cbn {
    random_network(rng, n_min, n_max, false)
}

/// Like [`random_cbn`] but empty updates are kept.
pub fn random_cbn_with_constants(rng: &mut ChaCha8Rng, n_min: usize, n_max: usize) -> Cbn {
    random_network(rng, n_min, n_max, true)
}

fn random_network(rng: &mut ChaCha8Rng, n_min: usize, n_max: usize, constants: bool) -> Cbn {
    let n = rng.random_range(n_min..=n_max);
    let density = [0.1, 0.2, 0.3, 0.5][rng.random_range(0..4)];
    let mut updates = vec![Vec::new(); n];
    for args in updates.iter_mut() {
        // Bias towards in-degree one so that observable instances are common.
        if rng.random_bool(0.5) {
            args.push(rng.random_range(0..n));
        } else {
            for source in 0..n {
                if rng.random_bool(density) {
                    args.push(source);
                }
            }
            if args.is_empty() && !constants {
                args.push(rng.random_range(0..n));
            }
        }
    }
    let observed: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.25)).collect();
    Cbn::new(updates, observed).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Every simple cycle of the graph given by `in_adj`, each listed once
/// starting from its smallest node. Exponential; small graphs only.
pub fn simple_cycles(n: usize, in_adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut out_adj = vec![Vec::new(); n];
    for (t, args) in in_adj.iter().enumerate() {
        for &s in args {
            out_adj[s].push(t);
        }
    }
    let mut cycles = Vec::new();
    for start in 0..n {
        let mut path = vec![start];
        let mut on_path = vec![false; n];
        on_path[start] = true;
        extend(start, start, &out_adj, &mut path, &mut on_path, &mut cycles);
    }
    cycles
}

fn extend(
    start: usize,
    v: usize,
    out_adj: &[Vec<usize>],
    path: &mut Vec<usize>,
    on_path: &mut [bool],
    cycles: &mut Vec<Vec<usize>>,
) {
    for &w in &out_adj[v] {
        if w == start {
            cycles.push(path.clone());
        } else if w > start && !on_path[w] {
            on_path[w] = true;
            path.push(w);
            extend(start, w, out_adj, path, on_path, cycles);
            path.pop();
            on_path[w] = false;
        }
    }
}
