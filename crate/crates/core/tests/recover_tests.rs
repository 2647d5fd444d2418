use sumrate_hsd::diagnostics::all_members_inverse_z;
use sumrate_hsd::recover::{achieved_rates, recover_power, PowerFixedPoint, RecoverOptions};
use sumrate_hsd::specrad::exp_map;
use sumrate_hsd::{generate_problem, solve_rate, ScenarioParams, SolverConfig};

fn convex_instances(count: usize) -> Vec<sumrate_hsd::UatFProblem> {
    (0u64..)
        .filter_map(|seed| generate_problem(&ScenarioParams::default(), seed).ok())
        .filter(|p| all_members_inverse_z(&p.family().unwrap()))
        .take(count)
        .collect()
}

#[test]
fn solver_output_round_trips_through_powers() {
    for p in convex_instances(5) {
        let model = p.interference_model();
        let trace = solve_rate(&p.family().unwrap(), &SolverConfig::rate_defaults(p.n())).unwrap();
        let sol = recover_power(&model, &trace.solution, &RecoverOptions::default()).unwrap();
        for &i in &sol.support {
            assert!((sol.achieved_rates[i] - trace.solution[i]).abs() <= 1e-6);
        }
        assert!(sol.p_star.iter().all(|x| *x <= p.p_max() * (1.0 + 1e-9)));
        assert!((sol.weighted_sum_rate(p.w()) - trace.solution_objective).abs() <= 1e-4);
        assert!(sol.residual <= 1e-12);
    }
}

#[test]
fn fixed_point_residual_decreases() {
    for p in convex_instances(5) {
        let model = p.interference_model();
        let trace = solve_rate(&p.family().unwrap(), &SolverConfig::rate_defaults(p.n())).unwrap();
        let support: Vec<usize> = (0..p.n()).collect();
        let mut fp = PowerFixedPoint::new(&model, &support, exp_map(&trace.solution));
        let mut prev = fp.residual();
        for _ in 0..200 {
            let next = fp.step();
            if prev < 1e-13 {
                break;
            }
            assert!(next <= prev * (1.0 + 1e-9), "{next} > {prev}");
            prev = next;
        }
    }
}

#[test]
fn interior_rates_use_less_than_full_power() {
    let p = &convex_instances(1)[0];
    let trace = solve_rate(&p.family().unwrap(), &SolverConfig::rate_defaults(p.n())).unwrap();
    let half: Vec<f64> = trace.solution.iter().map(|r| 0.5 * r).collect();
    let sol = recover_power(&p.interference_model(), &half, &RecoverOptions::default()).unwrap();
    assert!(sol.p_star.iter().all(|x| *x < p.p_max()));
    let back = achieved_rates(&p.interference_model(), &sol.p_star).unwrap();
    for (a, b) in back.iter().zip(&half) {
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn solution_json_fields() {
    let p = &convex_instances(1)[0];
    let sol = recover_power(&p.interference_model(), &[0.1, 0.0, 0.2], &RecoverOptions::default()).unwrap();
    let v = serde_json::to_value(&sol).unwrap();
    for key in ["p_star", "support", "residual", "achieved_rates", "sum_rate"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    assert_eq!(v["support"], serde_json::json!([0, 2]));
    assert_eq!(v["p_star"][1], 0.0);
}
