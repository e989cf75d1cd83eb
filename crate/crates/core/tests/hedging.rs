mod common;

use std::time::{Duration, Instant};

use common::{data_instance, enumerate_optimum, rel_diff};
use tepkit::fixtures;
use tepkit::hedging::{integrated_solve, run_baseline, run_ph, PhParams, PhResult, SolveParams};
use tepkit::mip::{build_extensive_mip, solve_bnb, BnbOptions, BnbStatus, DEFAULT_ANGLE_BOUND};
use tepkit::scenario_lp::VIOLATION_TOL;
use tepkit::{Instance, Plan};

fn assert_monotone(r: &PhResult) {
    for w in r.iterations.windows(2) {
        assert!(
            w[1].incumbent_cost <= w[0].incumbent_cost,
            "incumbent rose: {} -> {}",
            w[0].incumbent_cost,
            w[1].incumbent_cost
        );
    }
    if let Some(last) = r.iterations.last() {
        assert_eq!(last.incumbent_cost, r.penalized_cost);
    }
}

fn extensive_optimum(inst: &Instance) -> f64 {
    let scenarios: Vec<usize> = (0..inst.scenarios.len()).collect();
    let model = build_extensive_mip(inst, &scenarios, DEFAULT_ANGLE_BOUND).unwrap();
    let out = solve_bnb(inst, &model, None, &BnbOptions::default()).unwrap();
    assert_eq!(out.status, BnbStatus::Optimal);
    out.upper_bound
}

fn params(iterations: usize) -> PhParams {
    PhParams { max_iterations: Some(iterations), ..PhParams::default() }
}

#[test]
fn six_bus_pipeline_is_near_optimal() {
    let g6 = fixtures::g6();
    let (best, _) = enumerate_optimum(&g6);
    let clock = Instant::now();
    let out = integrated_solve(&g6, 0, &g6.all_candidates_plan(), &SolveParams::default(), None).unwrap();
    assert!(clock.elapsed() <= Duration::from_secs(60));
    assert!(out.op.violation() <= VIOLATION_TOL);
    assert!(out.cost <= best * 1.05, "pipeline {} vs optimum {best}", out.cost);
    assert!(out.cost >= best - 1e-6 * best);
    assert!(out.op.kcl_residual(&g6) <= 1e-6);
    let s = &out.stages;
    assert!(s.destroy_repair <= s.start && s.beam <= s.destroy_repair && out.cost <= s.beam);
}

#[test]
fn decomposition_beats_baseline_on_generated_systems() {
    for name in ["case4_stochastic.json", "case5_stochastic.json", "case9_stochastic.json"] {
        let inst = data_instance(name);
        let p = params(5);
        let ph = run_ph(&inst, &p).unwrap();
        let ba = run_baseline(&inst, &p).unwrap();
        assert_monotone(&ph);
        assert_monotone(&ba);
        assert!(ph.assessment.feasible());
        assert!(ph.penalized_cost <= ba.penalized_cost, "{name}: {} > {}", ph.penalized_cost, ba.penalized_cost);
        let opt = extensive_optimum(&inst);
        assert!(ph.penalized_cost <= 1.10 * opt, "{name}: {} vs {opt}", ph.penalized_cost);
        assert!(ph.penalized_cost >= opt * (1.0 - 1e-6));
    }
}

#[test]
fn single_scenario_ph_matches_its_own_pipeline() {
    let g6 = fixtures::g6_restricted();
    let ph = run_ph(&g6, &params(3)).unwrap();
    assert_monotone(&ph);
    let opt = enumerate_optimum(&g6).0;
    assert!(rel_diff(ph.penalized_cost, ph.assessment.expected_cost) < 1e-12);
    assert!(ph.penalized_cost <= opt * 1.05);
}

#[test]
fn zero_budget_returns_all_candidates() {
    let inst = data_instance("case4_stochastic.json");
    let p = PhParams { time_limit: Some(Duration::ZERO), ..PhParams::default() };
    let out = run_ph(&inst, &p).unwrap();
    assert_eq!(out.plan, inst.all_candidates_plan());
    assert!(out.iterations.is_empty());
}

#[test]
fn worker_count_does_not_change_the_answer() {
    let inst = data_instance("case5_stochastic.json");
    let one = run_ph(&inst, &params(3)).unwrap();
    let four = run_ph(&inst, &PhParams { workers: 4, ..params(3) }).unwrap();
    assert_eq!(one.plan, four.plan);
    assert_eq!(one.penalized_cost, four.penalized_cost);
    assert_ne!(one.plan, Plan::empty());
}
