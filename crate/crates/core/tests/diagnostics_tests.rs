mod common;

use sumrate_hsd::diagnostics::{
    all_members_inverse_z, check_rate_convexity_samples, check_sinr_convexity_samples,
    inverse_z_fraction, SampleParams,
};
use sumrate_hsd::{generate_problem, MaxLinearFamily, ScenarioParams};

fn quick(seed: u64) -> SampleParams {
    SampleParams {
        n_pairs: 300,
        n_alpha: 19,
        ..SampleParams::rate_defaults(seed)
    }
}

#[test]
fn inverse_z_instances_pass_rate_check() {
    let mut seen = 0;
    for seed in 0..60 {
        let Ok(p) = generate_problem(&ScenarioParams::default(), seed) else { continue };
        let f = p.family().unwrap();
        if !all_members_inverse_z(&f) {
            continue;
        }
        seen += 1;
        let r = check_rate_convexity_samples(&f, &quick(seed)).unwrap();
        assert_eq!(r.violations, 0, "seed {seed}: worst gap {}", r.worst_gap);
    }
    assert!(seen > 0);
}

#[test]
fn larger_slack_never_adds_violations() {
    let mut r = common::rng(77);
    for _ in 0..5 {
        let f: MaxLinearFamily = common::random_family(&mut r, 3);
        let mut last = usize::MAX;
        for eps in [0.0, 1e-13, 1e-9, 1e-3, f64::INFINITY] {
            let p = SampleParams { eps, ..quick(1) };
            let v = check_sinr_convexity_samples(&f, &p).unwrap().violations;
            assert!(v <= last);
            last = v;
        }
        assert_eq!(last, 0);
    }
}

#[test]
fn symmetric_member_report() {
    let f = MaxLinearFamily::new(vec![common::positive(&[vec![2.0, 1.0], vec![1.0, 2.0]])]).unwrap();
    let r = check_sinr_convexity_samples(&f, &SampleParams::sinr_defaults(3)).unwrap();
    assert_eq!(r.total_checks, 10_000 * 99);
    assert!(r.worst_gap >= 0.0);
}

#[test]
fn fraction_over_generated_batch() {
    let batch: Vec<_> = (0..40)
        .filter_map(|s| generate_problem(&ScenarioParams::default(), s).ok())
        .collect();
    let frac = inverse_z_fraction(&batch).unwrap();
    let direct = batch
        .iter()
        .filter(|p| all_members_inverse_z(&p.family().unwrap()))
        .count() as f64
        / batch.len() as f64;
    assert_eq!(frac, direct);
}
