mod common;

use cbn_observe::oracle::{ambiguous_pair_within, state_bits};
use cbn_observe::{
    build_observer, is_observable, parse_cbn, reconstruct_initial_state, simulate, Cbn,
};
use common::*;

fn exhaustive_round_trip(cbn: &Cbn) {
    let plan = build_observer(cbn).unwrap();
    let mut covered = vec![false; cbn.n()];
    for s in &plan.sources {
        assert!(s.offset < plan.horizon);
        assert!(cbn.is_observed(s.output));
    }
    for path in &plan.cover.paths {
        for &v in &path.nodes {
            assert!(!std::mem::replace(&mut covered[v], true));
        }
    }
    assert!(covered.iter().all(|&c| c));

    for state in 0..1u64 << cbn.n() {
        let x0 = state_bits(state, cbn.n());
        let traj = simulate(cbn, &x0, plan.horizon).unwrap();
        assert_eq!(reconstruct_initial_state(&plan, &traj.trace).unwrap(), x0);
    }
}

#[test]
fn every_initial_state_is_recovered() {
    let mut rng = rng(99);
    let mut tested = 0;
    while tested < 80 {
        let cbn = random_cbn_with_constants(&mut rng, 2, 10);
        if !is_observable(&cbn).observable {
            continue;
        }
        exhaustive_round_trip(&cbn);
        tested += 1;
    }
    exhaustive_round_trip(&parse_cbn(TWO_PATHS).unwrap());
}

#[test]
fn horizon_samples_suffice() {
    let mut rng = rng(5);
    let mut tested = 0;
    while tested < 60 {
        let cbn = random_cbn(&mut rng, 2, 8);
        if !is_observable(&cbn).observable {
            continue;
        }
        let plan = build_observer(&cbn).unwrap();
        assert!(ambiguous_pair_within(&cbn, plan.horizon, 12)
            .unwrap()
            .is_none());
        tested += 1;
    }
}

#[test]
fn two_paths_horizon_is_tight() {
    let cbn = parse_cbn(TWO_PATHS).unwrap();
    let plan = build_observer(&cbn).unwrap();
    assert_eq!(plan.horizon, 3);
    assert!(ambiguous_pair_within(&cbn, 3, 12).unwrap().is_none());
    assert!(ambiguous_pair_within(&cbn, 2, 12).unwrap().is_some());
}
