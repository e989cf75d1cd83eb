//! Residual-flow guided line removal with violation-driven reinsertion.
//!
//! Starting from a feasible built set `I`, each iteration removes the
//! fraction `rt` of `I` with the most spare capacity. A feasible cheaper
//! result raises `rt` by `dt/2`, anything else lowers it by `dt/2`; `dt`
//! halves every iteration, as in a binary search over the removal ratio.

use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::Plan;
use crate::scenario_lp::{OperatingPoint, PlanEvaluation, ScenarioLpModel, VIOLATION_TOL};

/// Number of lines removed for ratio `rt` out of `inserted` lines.
pub fn removal_count(rt: f64, inserted: usize) -> usize {
    if inserted == 0 || rt <= 0.0 {
        return 0;
    }
    ((rt * inserted as f64).round() as usize).clamp(1, inserted)
}

/// The `removal_count(rt, |plan|)` lines of `plan` with the largest residual
/// capacity fraction in `op`. Lines absent from `op`'s active set carry no
/// flow and so have residual 1. Ties go to the lowest id.
pub fn select_by_residual(model: &ScenarioLpModel, op: &OperatingPoint, plan: &Plan, rt: f64) -> Result<Plan> {
    let n = removal_count(rt, plan.len());
    let mut scored = Vec::with_capacity(plan.len());
    for &k in plan.iter() {
        let cap = model.candidate_capacity(k)?;
        let f = op.flow.get(&k).copied().unwrap_or(0.0);
        scored.push(((cap - f.abs()) / cap, k));
    }
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    Ok(scored.into_iter().take(n).map(|(_, k)| k).collect())
}

/// Lines of `rm` whose partner existing line is overloaded in `op`.
fn select_with_violation(model: &ScenarioLpModel, op: &OperatingPoint, rm: &Plan) -> Result<Plan> {
    let mut out = Plan::empty();
    for &k in rm.iter() {
        let overloaded = model.partners(k)?.iter().any(|j| op.slack.get(j).copied().unwrap_or(0.0) > VIOLATION_TOL);
        if overloaded {
            out.insert(k);
        }
    }
    Ok(out)
}

/// Outcome of [`repair`].
#[derive(Debug, Clone)]
pub struct Repaired {
    /// Lines still removed.
    pub removed: Plan,
    pub violation: f64,
    /// Solution under the model's final built set.
    pub op: OperatingPoint,
}

/// Reinserts removed lines whose twin existing line is overloaded while
/// doing so strictly lowers the violation. The model must currently be
/// solved with `rm` removed, `op` being that solution. A reinsertion that
/// fails to help is undone, so on return the model's built set is exactly
/// the entry set plus the accepted reinsertions.
pub fn repair(model: &mut ScenarioLpModel, rm: &Plan, v: f64, op: OperatingPoint) -> Result<Repaired> {
    let mut rm = rm.clone();
    let mut v = v;
    let mut op = op;
    let mut ri = select_with_violation(model, &op, &rm)?;
    while v > VIOLATION_TOL && !ri.is_empty() {
        let before = model.active().clone();
        let trial = before.union(&ri);
        let attempt = model.set_built_set(&trial).and_then(|_| model.solve());
        match attempt {
            Ok(new_op) if new_op.violation() < v => {
                rm = rm.difference(&ri);
                v = new_op.violation();
                op = new_op;
                ri = select_with_violation(model, &op, &rm)?;
            }
            Ok(_) | Err(Error::Infeasible(_)) => {
                model.set_built_set(&before)?;
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Repaired { removed: rm, violation: v, op })
}

#[derive(Debug, Clone, Copy)]
pub struct DrParams {
    pub iterations: usize,
    pub time_limit: Option<Duration>,
}

impl Default for DrParams {
    fn default() -> Self {
        DrParams { iterations: 15, time_limit: None }
    }
}

/// One main-loop iteration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DrTraceRecord {
    pub iteration: usize,
    pub rt: f64,
    pub dt: f64,
    /// Size of the trial removal set before repair.
    pub removed: usize,
    /// Violation after repair (infinite when the trial LP had no solution).
    pub violation: f64,
    /// Best cost after the iteration.
    pub cost: f64,
    pub improved: bool,
    pub rt_next: f64,
}

#[derive(Debug, Clone)]
pub struct DrOutcome {
    /// `I'`: the entry set minus the best removal.
    pub inserted: Plan,
    /// `R'`: the best removal.
    pub removed: Plan,
    pub cost: f64,
    pub trace: Vec<DrTraceRecord>,
}

impl DrOutcome {
    /// Removal ratios in the order they were set: the initial 0.5, then the
    /// value after each iteration.
    pub fn rt_sequence(&self) -> Vec<f64> {
        let mut out = vec![0.5];
        out.extend(self.trace.iter().map(|r| r.rt_next));
        out
    }
}

/// Runs the destroy-and-repair loop from the feasible built set `start`.
/// On return the model's built set is the returned `inserted` set.
pub fn destroy_and_repair(model: &mut ScenarioLpModel, start: &Plan, params: &DrParams) -> Result<DrOutcome> {
    let clock = Instant::now();
    let PlanEvaluation { cost: start_cost, violation, op } = model.evaluate(start)?;
    if violation > VIOLATION_TOL {
        return Err(Error::InfeasibleStart(violation));
    }
    let (mut rt, mut dt) = (0.5, 0.5);
    let mut best_rm = Plan::empty();
    let mut best_cost = start_cost;
    let mut trace = Vec::new();
    let mut rm_trial = select_by_residual(model, &op, start, rt)?;
    let mut prev_len: Option<usize> = None;

    for iteration in 1..=params.iterations.max(1) {
        if rm_trial.is_empty() || prev_len == Some(rm_trial.len()) {
            break;
        }
        if params.time_limit.is_some_and(|t| clock.elapsed() >= t) {
            break;
        }
        prev_len = Some(rm_trial.len());
        let tried = rm_trial.len();
        let rt_used = rt;

        let reduced = start.difference(&rm_trial);
        model.set_built_set(&reduced)?;
        let (v, current) = match model.solve() {
            Ok(op) => {
                let v = op.violation();
                if v > VIOLATION_TOL {
                    let fixed = repair(model, &rm_trial, v, op)?;
                    rm_trial = fixed.removed;
                    (fixed.violation, Some(fixed.op))
                } else {
                    (v, Some(op))
                }
            }
            Err(Error::Infeasible(_)) => (f64::INFINITY, None),
            Err(e) => return Err(e),
        };

        let mut improved = false;
        let mut selection_op = None;
        if v <= VIOLATION_TOL {
            let ev = model.evaluation_of(current.expect("feasible solve has a point"))?;
            if ev.cost < best_cost {
                improved = true;
                best_rm = rm_trial.clone();
                best_cost = ev.cost;
                rt += 0.5 * dt;
                selection_op = Some(ev.op);
            }
        }
        if !improved {
            rt -= 0.5 * dt;
            model.set_built_set(start)?;
            selection_op = Some(model.solve()?);
        }
        trace.push(DrTraceRecord {
            iteration,
            rt: rt_used,
            dt,
            removed: tried,
            violation: v,
            cost: best_cost,
            improved,
            rt_next: rt,
        });
        log::trace!("dr iteration {iteration}: rt {rt:.4} removed {tried} violation {v:.6} cost {best_cost:.6}");
        dt /= 2.0;
        rm_trial = select_by_residual(model, selection_op.as_ref().expect("set above"), start, rt)?;
    }

    let inserted = start.difference(&best_rm);
    model.set_built_set(&inserted)?;
    Ok(DrOutcome { inserted, removed: best_rm, cost: best_cost, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn removal_count_rounds_and_clamps() {
        assert_eq!(removal_count(0.5, 1), 1);
        assert_eq!(removal_count(0.0, 5), 0);
        assert_eq!(removal_count(2.0 / 3.0, 3), 2);
        assert_eq!(removal_count(0.875, 4), 4);
        assert_eq!(removal_count(0.3, 0), 0);
    }

    #[test]
    fn t2_repair_reinserts_the_twin() {
        let t2 = fixtures::t2();
        let mut m = ScenarioLpModel::new(&t2, 0, 100.0).unwrap();
        let rm = Plan::from_ids([1]);
        m.set_built_set(&Plan::empty()).unwrap();
        let op = m.solve().unwrap();
        let out = repair(&mut m, &rm, op.violation(), op).unwrap();
        assert!(out.removed.is_empty());
        assert!(out.violation.abs() < 1e-9);
        assert_eq!(m.active(), &rm);
    }

    #[test]
    fn repair_is_a_no_op_when_feasible() {
        let t2 = fixtures::t2();
        let mut m = ScenarioLpModel::new(&t2, 0, 100.0).unwrap();
        let op = m.solve().unwrap();
        let rm = Plan::from_ids([1]);
        let out = repair(&mut m, &rm, 0.0, op).unwrap();
        assert_eq!(out.removed, rm);
        assert_eq!(out.violation, 0.0);
    }

    #[test]
    fn t2_run_keeps_the_only_feasible_plan() {
        let t2 = fixtures::t2();
        let mut m = ScenarioLpModel::new(&t2, 0, 100.0).unwrap();
        let out = destroy_and_repair(&mut m, &Plan::from_ids([1]), &DrParams::default()).unwrap();
        assert_eq!(out.inserted, Plan::from_ids([1]));
        assert!(out.removed.is_empty());
        assert_eq!(out.rt_sequence(), vec![0.5, 0.25]);
        assert!((out.cost - 60.0).abs() < 1e-6);
    }

    #[test]
    fn infeasible_start_is_rejected() {
        let t2 = fixtures::t2();
        let mut m = ScenarioLpModel::new(&t2, 0, 100.0).unwrap();
        let err = destroy_and_repair(&mut m, &Plan::empty(), &DrParams::default()).unwrap_err();
        assert!(matches!(err, Error::InfeasibleStart(v) if (v - 20.0).abs() < 1e-6));
    }
}
