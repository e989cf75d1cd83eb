//! Scenario decomposition: per-scenario subproblems solved by the
//! destroy-and-repair → beam search → branch-and-bound pipeline, combined
//! into consensus plans that are repaired across scenarios.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::beam::{beam_search, BeamParams};
use crate::destroy_repair::{destroy_and_repair, repair, DrParams};
use crate::error::{Error, Result};
use crate::instance::{Instance, LineId, Plan, ScenarioId};
use crate::mip::{build_with_costs, proximal_costs, solve_bnb, BnbOptions, BnbStatus, DEFAULT_ANGLE_BOUND};
use crate::scenario_lp::{OperatingPoint, ScenarioLpModel, VIOLATION_TOL};

/// Settings shared by the single-scenario pipeline.
#[derive(Debug, Clone, Serialize)]
pub struct SolveParams {
    /// Slack penalty; `None` uses [`Instance::default_penalty`].
    pub lambda: Option<f64>,
    pub dr_iterations: usize,
    pub beam: BeamParams,
    pub angle_bound: f64,
    /// Wall-clock budget for the whole pipeline.
    #[serde(skip)]
    pub time_limit: Option<Duration>,
    /// Branch-and-bound node budget (deterministic alternative to time).
    pub bnb_node_limit: Option<usize>,
}

impl Default for SolveParams {
    fn default() -> Self {
        SolveParams {
            lambda: None,
            dr_iterations: 15,
            beam: BeamParams::default(),
            angle_bound: DEFAULT_ANGLE_BOUND,
            time_limit: None,
            bnb_node_limit: None,
        }
    }
}

impl SolveParams {
    pub fn lambda_for(&self, inst: &Instance) -> f64 {
        self.lambda.unwrap_or_else(|| inst.default_penalty())
    }
}

/// Cost reached after each pipeline stage.
#[derive(Debug, Clone, Serialize)]
pub struct StageCosts {
    pub start: f64,
    pub destroy_repair: f64,
    pub beam: f64,
    pub bnb: Option<f64>,
    pub bnb_status: Option<BnbStatus>,
}

#[derive(Debug, Clone)]
pub struct IntegratedResult {
    pub plan: Plan,
    pub op: OperatingPoint,
    /// Dispatch plus investment cost under the costs the pipeline optimized.
    pub cost: f64,
    pub stages: StageCosts,
}

fn remaining(limit: Option<Duration>, clock: &Instant) -> Option<Duration> {
    limit.map(|t| t.saturating_sub(clock.elapsed()))
}

/// Improves the feasible plan `warm` for scenario `s`. `costs` overrides
/// per-candidate investment coefficients (proximal subproblems).
pub fn integrated_solve(
    inst: &Instance,
    s: ScenarioId,
    warm: &Plan,
    params: &SolveParams,
    costs: Option<&BTreeMap<LineId, f64>>,
) -> Result<IntegratedResult> {
    let clock = Instant::now();
    let lambda = params.lambda_for(inst);
    let mut model = ScenarioLpModel::new(inst, s, lambda)?;
    if let Some(c) = costs {
        model.set_invest_costs(c)?;
    }
    let start = model.evaluate(warm)?;
    if !start.feasible() {
        return Err(Error::InfeasibleStart(start.violation));
    }
    let start_cost = start.cost;

    let dr_params = DrParams { iterations: params.dr_iterations, time_limit: remaining(params.time_limit, &clock) };
    let dr = destroy_and_repair(&mut model, warm, &dr_params)?;
    let mut plan = dr.inserted.clone();
    let mut cost = dr.cost;
    let mut stages = StageCosts { start: start_cost, destroy_repair: cost, beam: cost, bnb: None, bnb_status: None };

    let out_of_time = |clock: &Instant| params.time_limit.is_some_and(|t| clock.elapsed() >= t);
    if !out_of_time(&clock) {
        let beam_params = BeamParams { time_limit: remaining(params.time_limit, &clock), ..params.beam.clone() };
        let bs = beam_search(&mut model, &plan, &beam_params)?;
        if bs.cost < cost {
            plan = bs.plan;
            cost = bs.cost;
        }
        stages.beam = cost;
    }

    if !out_of_time(&clock) {
        let coeffs: BTreeMap<LineId, f64> = match costs {
            Some(c) => c.clone(),
            None => inst.candidate_lines().map(|l| (l.id, l.invest_cost)).collect(),
        };
        let mip = build_with_costs(inst, &[s], params.angle_bound, &coeffs)?;
        let opts = BnbOptions { time_limit: remaining(params.time_limit, &clock), node_limit: params.bnb_node_limit };
        let res = solve_bnb(inst, &mip, Some(&plan), &opts)?;
        stages.bnb = Some(res.upper_bound);
        stages.bnb_status = Some(res.status);
        if let Some(candidate) = res.incumbent {
            if candidate != plan {
                let ev = model.evaluate(&candidate)?;
                if ev.feasible() && ev.cost < cost {
                    plan = candidate;
                }
            }
        }
    }

    let ev = model.evaluate(&plan)?;
    Ok(IntegratedResult { plan, op: ev.op, cost: ev.cost, stages })
}

/// `x̄_k = Σ_s p_s·[k ∈ plan_s]` for every candidate of `inst`.
pub fn consensus_average(inst: &Instance, plans: &[Plan], probabilities: &[f64]) -> BTreeMap<LineId, f64> {
    inst.candidate_ids()
        .into_iter()
        .map(|k| {
            let x: f64 = plans.iter().zip(probabilities).filter(|(p, _)| p.contains(k)).map(|(_, &w)| w).sum();
            (k, x.clamp(0.0, 1.0))
        })
        .collect()
}

/// Lines built in at least a fraction `beta` of the plans (unweighted).
pub fn beta_intersection(plans: &[Plan], beta: f64) -> Result<Plan> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::InvalidArgument(format!("beta must lie in (0, 1], got {beta}")));
    }
    let mut counts: BTreeMap<LineId, usize> = BTreeMap::new();
    for p in plans {
        for &k in p.iter() {
            *counts.entry(k).or_default() += 1;
        }
    }
    let n = plans.len() as f64;
    // Small tolerance so that e.g. 1 of 4 meets β = 0.25 despite rounding.
    Ok(counts.into_iter().filter(|&(_, c)| c as f64 / n >= beta - 1e-12).map(|(k, _)| k).collect())
}

pub fn union_plan(plans: &[Plan]) -> Plan {
    plans.iter().fold(Plan::empty(), |acc, p| acc.union(p))
}

/// A plan evaluated on every scenario after cross-scenario repair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanAssessment {
    pub plan: Plan,
    pub investment: f64,
    /// Generation cost per scenario (`None` where no dispatch exists).
    pub generation: Vec<Option<f64>>,
    /// Violation per scenario (infinite where no dispatch exists).
    pub violations: Vec<f64>,
    /// Investment plus expected generation cost.
    pub expected_cost: f64,
    /// `expected_cost + λ · Σ_s p_s · violation_s`.
    pub penalized_cost: f64,
}

impl PlanAssessment {
    pub fn feasible(&self) -> bool {
        self.violations.iter().all(|&v| v <= VIOLATION_TOL)
    }
}

/// Evaluates `plan` on every scenario. Where a scenario is violated, lines
/// are reinserted by the repair step and every reinserted line joins the
/// plan for all scenarios; passes repeat until no scenario adds a line.
pub fn evaluate_plan_all_scenarios(inst: &Instance, plan: &Plan, lambda: f64) -> Result<PlanAssessment> {
    let mut models: Vec<ScenarioLpModel> =
        (0..inst.scenarios.len()).map(|s| ScenarioLpModel::new(inst, s, lambda)).collect::<Result<_>>()?;
    evaluate_with_models(inst, &mut models, plan, lambda)
}

fn evaluate_with_models(
    inst: &Instance,
    models: &mut [ScenarioLpModel],
    plan: &Plan,
    lambda: f64,
) -> Result<PlanAssessment> {
    inst.check_plan(plan)?;
    let all = inst.all_candidates_plan();
    let mut plan = plan.clone();
    loop {
        let mut added = false;
        for model in models.iter_mut() {
            model.set_built_set(&plan)?;
            let op = match model.solve() {
                Ok(op) => op,
                Err(Error::Infeasible(_)) => continue,
                Err(e) => return Err(e),
            };
            let v = op.violation();
            if v <= VIOLATION_TOL {
                continue;
            }
            let rm = all.difference(&plan);
            let fixed = repair(model, &rm, v, op)?;
            let newly = rm.difference(&fixed.removed);
            if !newly.is_empty() {
                plan = plan.union(&newly);
                added = true;
            }
        }
        if !added {
            break;
        }
    }

    let investment = inst.plan_investment_cost(&plan)?;
    let mut generation = Vec::with_capacity(models.len());
    let mut violations = Vec::with_capacity(models.len());
    let mut expected = investment;
    let mut penalty = 0.0;
    for (model, sc) in models.iter_mut().zip(&inst.scenarios) {
        model.set_built_set(&plan)?;
        match model.solve() {
            Ok(op) => {
                let g = op.generation_cost(inst);
                let v = op.violation();
                expected += sc.probability * g;
                penalty += sc.probability * v;
                generation.push(Some(g));
                violations.push(v);
            }
            Err(Error::Infeasible(_)) => {
                expected = f64::INFINITY;
                penalty = f64::INFINITY;
                generation.push(None);
                violations.push(f64::INFINITY);
            }
            Err(e) => return Err(e),
        }
    }
    let penalized = if penalty > 0.0 { expected + lambda * penalty } else { expected };
    Ok(PlanAssessment { plan, investment, generation, violations, expected_cost: expected, penalized_cost: penalized })
}

#[derive(Debug, Clone, Serialize)]
pub struct PhParams {
    pub solve: SolveParams,
    pub beta: f64,
    /// ρ_k = α · C_k; zero disables the proximal term.
    pub alpha: f64,
    pub workers: usize,
    pub seed: u64,
    /// Overall wall-clock budget.
    #[serde(skip)]
    pub time_limit: Option<Duration>,
    /// Iteration cap (deterministic alternative to the time limit).
    pub max_iterations: Option<usize>,
}

impl Default for PhParams {
    fn default() -> Self {
        PhParams {
            solve: SolveParams::default(),
            beta: 0.25,
            alpha: 1.0,
            workers: 1,
            seed: 0,
            time_limit: None,
            max_iterations: None,
        }
    }
}

/// One iteration of the decomposition loop.
#[derive(Debug, Clone, Serialize)]
pub struct PhIteration {
    pub iteration: usize,
    /// Subproblem objective per scenario (including any proximal terms).
    pub scenario_costs: Vec<f64>,
    pub scenario_plans: Vec<Plan>,
    /// Mean of x̄ over candidates.
    pub consensus_mean: f64,
    /// Candidates with 0 < x̄ < 1.
    pub consensus_split: usize,
    pub intersection_size: usize,
    pub union_size: usize,
    pub intersection_cost: f64,
    pub union_cost: f64,
    pub incumbent_cost: f64,
    pub incumbent_size: usize,
    #[serde(skip)]
    pub elapsed: Duration,
}

#[derive(Debug, Clone, Serialize)]
pub struct PhResult {
    pub plan: Plan,
    pub penalized_cost: f64,
    pub assessment: PlanAssessment,
    pub iterations: Vec<PhIteration>,
}

fn scenario_seed(seed: u64, s: usize, iteration: usize) -> u64 {
    seed ^ ((s as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
        ^ ((iteration as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F))
}

/// Runs `tasks` scenarios over `workers` threads; results come back indexed
/// by scenario regardless of completion order.
fn run_parallel<T: Send>(n: usize, workers: usize, task: impl Fn(usize) -> Result<T> + Sync) -> Result<Vec<T>> {
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<T>>>> = Mutex::new((0..n).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers.clamp(1, n.max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= n {
                    break;
                }
                let r = task(i);
                slots.lock().expect("no worker panicked")[i] = Some(r);
            });
        }
    });
    slots.into_inner().expect("no worker panicked").into_iter().map(|r| r.expect("every task ran")).collect()
}

/// Progressive hedging with β-intersection and union consensus plans.
pub fn run_ph(inst: &Instance, params: &PhParams) -> Result<PhResult> {
    decompose(inst, params, true)
}

/// One unaugmented pass: each scenario solved once, the better of the two
/// consensus plans (or the all-candidates plan) returned.
pub fn run_baseline(inst: &Instance, params: &PhParams) -> Result<PhResult> {
    decompose(inst, params, false)
}

fn decompose(inst: &Instance, params: &PhParams, iterate: bool) -> Result<PhResult> {
    let clock = Instant::now();
    let lambda = params.solve.lambda_for(inst);
    if !(params.beta > 0.0 && params.beta <= 1.0) {
        return Err(Error::InvalidArgument(format!("beta must lie in (0, 1], got {}", params.beta)));
    }
    if params.alpha < 0.0 {
        return Err(Error::InvalidArgument(format!("alpha must be nonnegative, got {}", params.alpha)));
    }
    let mut models: Vec<ScenarioLpModel> =
        (0..inst.scenarios.len()).map(|s| ScenarioLpModel::new(inst, s, lambda)).collect::<Result<_>>()?;
    let all = inst.all_candidates_plan();
    let mut incumbent = evaluate_with_models(inst, &mut models, &all, lambda)?;
    if !incumbent.feasible() {
        return Err(Error::Infeasible("building every candidate leaves some scenario violated".into()));
    }
    let probabilities: Vec<f64> = inst.scenarios.iter().map(|s| s.probability).collect();
    let rho: BTreeMap<LineId, f64> = inst.candidate_lines().map(|l| (l.id, params.alpha * l.invest_cost)).collect();
    let mut weights: Vec<BTreeMap<LineId, f64>> = vec![BTreeMap::new(); inst.scenarios.len()];
    let mut consensus: Option<BTreeMap<LineId, f64>> = None;
    let mut log = Vec::new();
    let out_of_time = || params.time_limit.is_some_and(|t| clock.elapsed() >= t);

    let mut iteration = 0usize;
    loop {
        let cap = if iterate { params.max_iterations } else { Some(1) };
        if cap.is_some_and(|m| iteration >= m) || out_of_time() {
            break;
        }
        iteration += 1;

        let warm_plans: Vec<Plan> = incumbent
            .violations
            .iter()
            .map(|&v| if v <= VIOLATION_TOL { incumbent.plan.clone() } else { all.clone() })
            .collect();
        let costs: Vec<Option<BTreeMap<LineId, f64>>> = (0..inst.scenarios.len())
            .map(|s| match &consensus {
                Some(xbar) if iterate => proximal_costs(inst, &weights[s], xbar, &rho).map(Some),
                _ => Ok(None),
            })
            .collect::<Result<_>>()?;
        let results = run_parallel(inst.scenarios.len(), params.workers, |s| {
            let mut sp = params.solve.clone();
            sp.beam.seed = scenario_seed(params.seed, s, iteration);
            integrated_solve(inst, s, &warm_plans[s], &sp, costs[s].as_ref())
        })?;
        let plans: Vec<Plan> = results.iter().map(|r| r.plan.clone()).collect();

        let xbar = consensus_average(inst, &plans, &probabilities);
        for (s, plan) in plans.iter().enumerate() {
            for (&k, &xb) in &xbar {
                let x = if plan.contains(k) { 1.0 } else { 0.0 };
                *weights[s].entry(k).or_insert(0.0) += rho[&k] * (x - xb);
            }
        }

        let inter = evaluate_with_models(inst, &mut models, &beta_intersection(&plans, params.beta)?, lambda)?;
        let uni = evaluate_with_models(inst, &mut models, &union_plan(&plans), lambda)?;
        let (inter_cost, union_cost) = (inter.penalized_cost, uni.penalized_cost);
        let (inter_size, union_size) = (inter.plan.len(), uni.plan.len());
        for cand in [inter, uni] {
            if cand.penalized_cost < incumbent.penalized_cost {
                incumbent = cand;
            }
        }

        let n = xbar.len().max(1) as f64;
        log.push(PhIteration {
            iteration,
            scenario_costs: results.iter().map(|r| r.cost).collect(),
            scenario_plans: plans,
            consensus_mean: xbar.values().sum::<f64>() / n,
            consensus_split: xbar.values().filter(|&&x| x > 1e-12 && x < 1.0 - 1e-12).count(),
            intersection_size: inter_size,
            union_size,
            intersection_cost: inter_cost,
            union_cost,
            incumbent_cost: incumbent.penalized_cost,
            incumbent_size: incumbent.plan.len(),
            elapsed: clock.elapsed(),
        });
        log::info!(
            "iteration {iteration}: intersection {inter_cost:.4} union {union_cost:.4} incumbent {:.4}",
            incumbent.penalized_cost
        );
        consensus = Some(xbar);
    }

    Ok(PhResult {
        plan: incumbent.plan.clone(),
        penalized_cost: incumbent.penalized_cost,
        assessment: incumbent,
        iterations: log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn consensus_and_sets() {
        let t2 = fixtures::t2();
        let plans = [Plan::from_ids([1]), Plan::empty()];
        let xbar = consensus_average(&t2, &plans, &[0.5, 0.5]);
        assert_eq!(xbar[&1], 0.5);
        assert_eq!(consensus_average(&t2, &plans[..1], &[1.0])[&1], 1.0);

        let four = [Plan::from_ids([1, 2]), Plan::from_ids([2]), Plan::empty(), Plan::from_ids([2])];
        assert_eq!(beta_intersection(&four, 0.25).unwrap(), Plan::from_ids([1, 2]));
        assert_eq!(beta_intersection(&four, 1.0).unwrap(), Plan::empty());
        assert_eq!(beta_intersection(&four, 0.75).unwrap(), Plan::from_ids([2]));
        assert!(beta_intersection(&four, 0.0).is_err());
        assert_eq!(union_plan(&four), Plan::from_ids([1, 2]));
        assert_eq!(union_plan(&[]), Plan::empty());
    }

    #[test]
    fn t2_empty_plan_is_repaired() {
        let t2 = fixtures::t2();
        let a = evaluate_plan_all_scenarios(&t2, &Plan::empty(), 100.0).unwrap();
        // Repair reinserts the twin, so the final plan is feasible.
        assert_eq!(a.plan, Plan::from_ids([1]));
        assert!(a.feasible());
        assert!((a.penalized_cost - 60.0).abs() < 1e-6);
    }

    #[test]
    fn t2_integrated() {
        let t2 = fixtures::t2();
        let r = integrated_solve(&t2, 0, &Plan::from_ids([1]), &SolveParams::default(), None).unwrap();
        assert_eq!(r.plan, Plan::from_ids([1]));
        assert!((r.cost - 60.0).abs() < 1e-6);
    }

    #[test]
    fn zero_budget_returns_all_candidates() {
        let g6 = fixtures::g6();
        let params = PhParams { time_limit: Some(Duration::ZERO), ..Default::default() };
        let r = run_ph(&g6, &params).unwrap();
        assert_eq!(r.plan, g6.all_candidates_plan());
        assert!(r.iterations.is_empty());
    }
}
