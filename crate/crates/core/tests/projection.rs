mod common;

use common::checks::{check_game_systems, dense_oracle_gap, sibling_groups};
use efce_core::brute_force::{xi_from_mu, JointDistribution, DEFAULT_PLAN_CAP};
use efce_core::projection::{factorize, project_x1, project_x2, Projectors};
use efce_core::Polytope;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn assert_report(name: &str, g: &efce_core::GameTree) {
    let r = check_game_systems(g, 11);
    assert!(r.passes(), "{name}: {r:?}");
}

#[test]
fn tiny_game_systems() {
    for (name, g) in common::tiny_games() {
        assert_report(&name, &g);
    }
}

#[test]
fn battleship_and_sheriff_systems() {
    assert_report("battleship 3x1", &common::battleship_3x1(2.0));
    assert_report("sheriff(2,2,2)", &common::sheriff(2, 2, 2));
}

#[test]
fn dense_oracle_on_tiny_games() {
    for (name, g) in common::tiny_games() {
        let gap = dense_oracle_gap(&g, 3, 5);
        assert!(gap <= 1e-8, "{name}: {gap}");
    }
}

#[test]
fn elimination_cost_bounded_by_sibling_groups() {
    for (name, g) in
        common::tiny_games().into_iter().chain([("battleship 3x1".to_string(), common::battleship_3x1(2.0))])
    {
        let poly = Polytope::new(&g);
        for sys in poly.consistency.systems() {
            let chol = factorize(&sys.rows, sys.vars.len()).unwrap();
            let groups = sibling_groups(&sys.rows);
            for (step, &row) in chol.perm.iter().enumerate() {
                // remaining neighbours: the parent row and later siblings
                let bound = (1 + groups[row]).pow(2);
                assert!(chol.ops[step] <= bound, "{name}: step {step} did {} updates", chol.ops[step]);
            }
        }
    }
}

#[test]
fn projection_moves_no_farther_than_feasible_points() {
    for (name, g) in common::tiny_games() {
        let poly = Polytope::new(&g);
        let proj = Projectors::build(&poly.consistency).unwrap();
        let mu = JointDistribution::new(&g, DEFAULT_PLAN_CAP).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for seed in 0..10 {
            let feas = xi_from_mu(&poly, &mu.clone().random(seed)).values;
            let xi: Vec<f64> = feas.iter().map(|v| v + rng.gen_range(-0.5..0.5)).collect();
            let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
            let mut p1 = xi.clone();
            project_x1(&poly.consistency, &proj, &mut p1);
            assert!(dist(&p1, &xi) <= dist(&feas, &xi) + 1e-12, "{name}");
            assert!(poly.consistency.residual_x1(&p1) <= 1e-10);
            let mut p2 = xi.clone();
            project_x2(&poly.consistency, &proj, &mut p2);
            assert!(dist(&p2, &xi) <= dist(&feas, &xi) + 1e-12, "{name}");
            assert!(poly.consistency.residual_x2(&p2) <= 1e-10);
        }
    }
}

#[test]
fn feasible_points_are_fixed() {
    for (name, g) in common::tiny_games() {
        let poly = Polytope::new(&g);
        let proj = Projectors::build(&poly.consistency).unwrap();
        let mu = JointDistribution::new(&g, DEFAULT_PLAN_CAP).unwrap().random(9);
        let feas = xi_from_mu(&poly, &mu).values;
        let mut xi = feas.clone();
        project_x1(&poly.consistency, &proj, &mut xi);
        project_x2(&poly.consistency, &proj, &mut xi);
        let gap = xi.iter().zip(&feas).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(gap <= 1e-12, "{name}: {gap}");
    }
}

#[test]
fn identical_structures_share_factors() {
    let g = common::battleship_3x1(2.0);
    let poly = Polytope::new(&g);
    let proj = Projectors::build(&poly.consistency).unwrap();
    let total = poly.consistency.x1.len() + poly.consistency.x2.len();
    assert!(proj.distinct_factors >= 1 && proj.distinct_factors <= total);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn random_tree_systems(seed in any::<u64>()) {
        let g = common::random_game(seed, 6);
        let r = check_game_systems(&g, seed);
        prop_assert!(r.passes(), "{:?}", r);
        let gap = dense_oracle_gap(&g, 2, seed);
        prop_assert!(gap <= 1e-8, "dense gap {}", gap);
    }
}
