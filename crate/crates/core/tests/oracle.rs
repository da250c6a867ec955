mod common;

use coptw::*;

#[test]
fn six_customers_two_members_match_enumeration() {
    let model = Model::new(common::micro_instance(6, 6, 2));
    let (expected, witness) = common::enumerate_best(&model);
    assert!(check_solution(&model, &witness).feasible());
    let res = exact_solve(&model, OracleConfig::default());
    assert!(res.proven_optimal);
    assert_eq!(res.best_score, expected);
    assert!(check_solution(&model, &res.best_solution).feasible());
}

#[test]
fn heuristic_never_beats_proven_optimum_on_desk_sample() {
    let suite = common::desk_suite(11);
    for d in suite.iter().step_by(16) {
        let model = Model::new(d.instance.clone());
        let exact = exact_solve(
            &model,
            OracleConfig {
                time_limit: std::time::Duration::from_secs(5),
                ..OracleConfig::default()
            },
        );
        let heuristic = solve(&model);
        assert!(
            check_solution(&model, &heuristic.best_solution).feasible(),
            "{}",
            d.name
        );
        if exact.proven_optimal {
            let gap = optimality_gap(heuristic.best_score, exact.best_score);
            assert!((0.0..=100.0).contains(&gap), "{}", d.name);
        }
    }
}
