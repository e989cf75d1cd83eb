mod common;

use std::time::Instant;

use common::{data_instance, dr_surplus, dr_tight, enumerate_optimum, rel_diff, three_bus};
use tepkit::fixtures;
use tepkit::mip::{build_extensive_mip, solve_bnb, BnbOptions, BnbStatus, DEFAULT_ANGLE_BOUND};
use tepkit::Instance;

fn check(inst: &Instance) {
    assert!(inst.num_candidates() <= 12);
    let clock = Instant::now();
    let (best, _) = enumerate_optimum(inst);
    let scenarios: Vec<usize> = (0..inst.scenarios.len()).collect();
    let model = build_extensive_mip(inst, &scenarios, DEFAULT_ANGLE_BOUND).unwrap();
    let out = solve_bnb(inst, &model, None, &BnbOptions::default()).unwrap();
    assert_eq!(out.status, BnbStatus::Optimal);
    assert!(rel_diff(out.upper_bound, best) <= 1e-6, "{}: bnb {} vs enumeration {best}", inst.name, out.upper_bound);
    for op in &out.points {
        assert!(op.kcl_residual(inst) <= 1e-6);
    }
    assert!(clock.elapsed().as_secs() <= 60, "{} took {:?}", inst.name, clock.elapsed());
}

#[test]
fn small_fixtures_match_enumeration() {
    for inst in [fixtures::t2(), three_bus(), dr_surplus(), dr_tight()] {
        check(&inst);
    }
}

#[test]
fn restricted_six_bus_matches_enumeration() {
    check(&fixtures::g6_restricted());
}

#[test]
fn generated_cases_match_enumeration() {
    for name in ["case4.json", "case5.json", "case4_stochastic.json"] {
        check(&data_instance(name));
    }
}

#[test]
fn warm_start_does_not_change_the_optimum() {
    let g = fixtures::g6_restricted();
    let model = build_extensive_mip(&g, &[0], DEFAULT_ANGLE_BOUND).unwrap();
    let cold = solve_bnb(&g, &model, None, &BnbOptions::default()).unwrap();
    let all = g.all_candidates_plan();
    let warm = solve_bnb(&g, &model, Some(&all), &BnbOptions::default()).unwrap();
    assert!(rel_diff(cold.upper_bound, warm.upper_bound) <= 1e-9);
    let capped = solve_bnb(&g, &model, Some(&all), &BnbOptions { node_limit: Some(1), ..Default::default() }).unwrap();
    assert!(capped.upper_bound >= cold.upper_bound - 1e-6);
    assert!(capped.lower_bound <= cold.upper_bound + 1e-6);
}
