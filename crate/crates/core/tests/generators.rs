mod common;

use efce_core::game::{validate, GameDoc, GameTree, Node, Player};
use efce_core::generators::{gen_battleship, gen_sheriff, BattleshipParams, SheriffParams, Ship};
use proptest::prelude::*;

fn depths(g: &GameTree) -> Vec<usize> {
    g.terminals()
        .iter()
        .map(|&z| {
            let (mut v, mut d) = (z, 0);
            while let Some((p, _)) = g.parent(v) {
                v = p;
                d += 1;
            }
            d
        })
        .collect()
}

#[test]
fn battleship_two_by_two_sizes() {
    let g = gen_battleship(&BattleshipParams::new(2, 2, vec![Ship { length: 1, value: 1.0 }], 3, 2.0)).unwrap();
    assert_eq!(g.sequence_counts(), [741, 917]);
}

#[test]
fn battleship_three_by_one_uniform_outcomes() {
    // Uniform play: P1 sinks with 5/9, P2 with 1/3, nobody with 1/9.
    let g = common::battleship_3x1(2.0);
    let poly = efce_core::Polytope::new(&g);
    let xi = efce_core::CorrelationPlan::uniform(&g, &poly.pairs);
    let dist = poly.outcome_distribution(&xi, 1e-12).unwrap();
    let (mut p1, mut p2, mut peace) = (0.0, 0.0, 0.0);
    for (t, pr) in dist.iter().enumerate() {
        match g.payoffs(t) {
            [a, _] if a > 0.0 => p1 += pr,
            [_, b] if b > 0.0 => p2 += pr,
            _ => peace += pr,
        }
    }
    assert!((p1 - 5.0 / 9.0).abs() < 1e-12);
    assert!((p2 - 1.0 / 3.0).abs() < 1e-12);
    assert!((peace - 1.0 / 9.0).abs() < 1e-12);
    assert!((poly.social_welfare(&xi) + 8.0 / 9.0).abs() < 1e-12);
}

#[test]
fn battleship_fleets_are_hidden_but_shots_public() {
    let g = gen_battleship(&BattleshipParams::new(2, 1, vec![Ship { length: 1, value: 1.0 }], 1, 2.0)).unwrap();
    for info in g.infosets() {
        if info.owner == Player::Two && info.actions[0].starts_with("place") {
            // P2 places without seeing where P1 went
            assert_eq!(info.nodes.len(), 2);
        }
    }
}

#[test]
fn serialized_round_trip_validates() {
    for g in [common::sheriff(2, 1, 2), common::battleship_2x1(2)] {
        let mut buf = vec![];
        g.to_doc().write_json(&mut buf).unwrap();
        let doc = GameDoc::from_reader(buf.as_slice()).unwrap();
        assert!(validate(&doc).is_valid());
        let back = GameTree::from_doc(&doc).unwrap();
        assert_eq!(back.sequence_counts(), g.sequence_counts());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sheriff_shape(nmax in 0usize..4, bmax in 0usize..3, rounds in 1usize..3, v in 0.0f64..10.0) {
        let g = gen_sheriff(&SheriffParams::new(v, 1.0, 1.0, nmax, bmax, rounds)).unwrap();
        prop_assert!(validate(&g.to_doc()).is_valid());
        prop_assert!(depths(&g).iter().all(|&d| d == 1 + 2 * rounds));
        for info in g.infosets() {
            if info.owner == Player::Two {
                prop_assert_eq!(info.nodes.len(), nmax + 1);
            }
        }
    }

    #[test]
    fn battleship_shape(h in 1usize..3, w in 1usize..3, rounds in 1usize..3, gamma in 1.0f64..4.0) {
        let params = BattleshipParams::new(h, w, vec![Ship { length: 1, value: 1.0 }], rounds, gamma);
        let g = gen_battleship(&params).unwrap();
        prop_assert!(validate(&g.to_doc()).is_valid());
        for t in 0..g.terminals().len() {
            let [a, b] = g.payoffs(t);
            // at most one fleet is destroyed
            prop_assert!(a == 0.0 && b == 0.0 || (a == 1.0 && b == -gamma) || (a == -gamma && b == 1.0));
        }
        let a = serde_json::to_string(&gen_battleship(&params).unwrap().to_doc()).unwrap();
        prop_assert_eq!(a, serde_json::to_string(&g.to_doc()).unwrap());
        for node in g.nodes() {
            if let Node::Decision { children, .. } = node {
                prop_assert!(!children.is_empty());
            }
        }
    }

    #[test]
    fn random_games_validate(seed in any::<u64>()) {
        let g = common::random_game(seed, 5);
        prop_assert!(validate(&g.to_doc()).is_valid());
    }
}
