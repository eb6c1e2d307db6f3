use cbn_observe::format::{parse_document, Arg, NetworkDocument};
use cbn_observe::graph::DependencyGraph;
use cbn_observe::network::Connective;
use cbn_observe::{parse_cbn, serialize_cbn, Cbn};
use proptest::prelude::*;

fn arb_cbn() -> impl Strategy<Value = Cbn> {
    (1usize..=12).prop_flat_map(|n| {
        (
            prop::collection::vec(prop::collection::btree_set(0..n, 0..=n), n),
            prop::collection::btree_set(0..n, 0..=n),
        )
            .prop_map(|(updates, observed)| {
                Cbn::new(
                    updates
                        .into_iter()
                        .map(|s| s.into_iter().collect())
                        .collect(),
                    observed,
                )
                .unwrap()
            })
    })
}

fn arb_document() -> impl Strategy<Value = NetworkDocument> {
    (1usize..=6, 0usize..=3, any::<bool>()).prop_flat_map(|(n, inputs, or)| {
        let arg = prop_oneof![
            (0..n).prop_map(Arg::State),
            (0..inputs.max(1)).prop_map(move |u| if inputs == 0 {
                Arg::State(u % n)
            } else {
                Arg::Input(u)
            }),
        ];
        (
            prop::collection::vec(prop::collection::btree_set(arg, 0..=4), n),
            prop::collection::btree_set(0..n, 0..=n),
            prop::collection::vec(prop::collection::btree_set(0..n, 1..=3), 0..=2),
        )
            .prop_map(move |(updates, observed, outputs)| NetworkDocument {
                connective: if or { Connective::Or } else { Connective::And },
                input_count: inputs,
                updates: updates
                    .into_iter()
                    .map(|s| s.into_iter().collect())
                    .collect(),
                observed: observed.into_iter().collect(),
                outputs: outputs
                    .into_iter()
                    .map(|s| s.into_iter().collect())
                    .collect(),
            })
    })
}

proptest! {
    #[test]
    fn cbn_text_round_trip(cbn in arb_cbn()) {
        let text = serialize_cbn(&cbn);
        prop_assert_eq!(parse_cbn(&text).unwrap(), cbn.clone());
        prop_assert_eq!(serialize_cbn(&parse_cbn(&text).unwrap()), text);
    }

    #[test]
    fn document_text_round_trip(doc in arb_document()) {
        prop_assert_eq!(parse_document(&doc.to_text()).unwrap(), doc);
    }

    #[test]
    fn graph_round_trips_to_network(cbn in arb_cbn()) {
        let g = DependencyGraph::new(&cbn);
        prop_assert_eq!(g.to_cbn(), cbn.clone());
        for (s, t) in g.edges() {
            prop_assert!(cbn.args(t).contains(&s));
            prop_assert!(g.out_neighbors(s).contains(&t));
        }
        prop_assert_eq!(g.edge_count(), cbn.edge_count());
    }
}
