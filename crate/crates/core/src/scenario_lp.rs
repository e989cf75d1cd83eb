//! Per-scenario DC optimal power flow with penalized capacity slacks.
//!
//! Every candidate line owns a flow variable `f¹` and an auxiliary variable
//! `r` in its voltage-law row `f¹ − B·(θ_from − θ_to) − r = 0`. Building the
//! line fixes `r = 0` and frees `f¹`; unbuilding it fixes `f¹ = 0` and frees
//! `r`. Toggling is therefore a pair of bound changes and the previous basis
//! stays usable as a warm start.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::instance::{Instance, LineId, Plan, ScenarioId};
use crate::lp::{Basis, LinearProgram, LpError, LpSolver, LpStatus, RevisedSimplex, VarId};

const INF: f64 = f64::INFINITY;

/// Violations at or below this are treated as zero.
pub const VIOLATION_TOL: f64 = 1e-9;

/// One scenario's solved dispatch.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatingPoint {
    pub scenario: ScenarioId,
    /// LP objective: generation cost plus λ times total slack.
    pub objective: f64,
    /// Flow per line id (existing and candidate), positive from `from_bus`.
    pub flow: BTreeMap<LineId, f64>,
    /// Capacity slack per line id.
    pub slack: BTreeMap<LineId, f64>,
    /// Output per generator id.
    pub generation: Vec<f64>,
    /// Total generation injected at each bus.
    pub bus_injection: Vec<f64>,
    /// Voltage angle per bus.
    pub theta: Vec<f64>,
}

impl OperatingPoint {
    /// Sum of all capacity slacks; zero means the plan serves the scenario.
    pub fn violation(&self) -> f64 {
        self.slack.values().sum()
    }

    pub fn generation_cost(&self, inst: &Instance) -> f64 {
        inst.generators.iter().zip(&self.generation).map(|(g, &x)| g.cost * x).sum()
    }

    /// Largest absolute current-law mismatch over all buses.
    pub fn kcl_residual(&self, inst: &Instance) -> f64 {
        let s = &inst.scenarios[self.scenario];
        let mut net = self.bus_injection.clone();
        for l in &inst.lines {
            let f = self.flow.get(&l.id).copied().unwrap_or(0.0);
            net[l.from_bus] -= f;
            net[l.to_bus] += f;
        }
        net.iter().zip(&s.demand).map(|(n, d)| (n - d).abs()).fold(0.0, f64::max)
    }
}

/// See [`OperatingPoint::violation`].
pub fn violation(op: &OperatingPoint) -> f64 {
    op.violation()
}

/// Generation cost of `op` plus the investment cost of `plan`, without the
/// slack penalty.
pub fn cost(op: &OperatingPoint, plan: &Plan, inst: &Instance) -> Result<f64> {
    Ok(op.generation_cost(inst) + inst.plan_investment_cost(plan)?)
}

/// `(capacity − |flow|) / capacity` for every built candidate.
pub fn residual_flows(op: &OperatingPoint, plan: &Plan, inst: &Instance) -> Result<BTreeMap<LineId, f64>> {
    let mut out = BTreeMap::new();
    for &k in plan.iter() {
        let line = inst.candidate(k)?;
        let f = op.flow.get(&k).copied().unwrap_or(0.0);
        out.insert(k, (line.capacity - f.abs()) / line.capacity);
    }
    Ok(out)
}

/// Result of evaluating one plan on one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanEvaluation {
    /// Generation cost plus investment cost (no slack penalty).
    pub cost: f64,
    pub violation: f64,
    pub op: OperatingPoint,
}

impl PlanEvaluation {
    pub fn feasible(&self) -> bool {
        self.violation <= VIOLATION_TOL
    }
}

#[derive(Debug, Clone)]
struct CandidateVars {
    id: LineId,
    f: VarId,
    y: VarId,
    r: VarId,
    capacity: f64,
    /// Existing lines whose overload signals this candidate is needed.
    partners: Vec<LineId>,
}

/// Model 1 for one scenario, with a mutable built set.
#[derive(Debug, Clone)]
pub struct ScenarioLpModel {
    scenario: ScenarioId,
    lambda: f64,
    lp: LinearProgram,
    solver: RevisedSimplex,
    warm: Option<Basis>,
    existing: Vec<(LineId, VarId, VarId)>,
    candidates: Vec<CandidateVars>,
    cand_pos: BTreeMap<LineId, usize>,
    invest: BTreeMap<LineId, f64>,
    gen_vars: Vec<VarId>,
    gen_cost: Vec<f64>,
    bus_vars: Vec<VarId>,
    theta_vars: Vec<VarId>,
    active: Plan,
    num_buses: usize,
}

impl ScenarioLpModel {
    /// Builds the LP for scenario `s` with every candidate built.
    pub fn new(inst: &Instance, s: ScenarioId, lambda: f64) -> Result<Self> {
        let sc = inst.scenario(s)?;
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidArgument(format!("penalty must be positive, got {lambda}")));
        }
        let nb = inst.buses.len();
        let mut lp = LinearProgram::new();

        let mut existing = Vec::new();
        for l in inst.existing_lines() {
            let f = lp.add_var(-INF, INF, 0.0)?;
            let y = lp.add_var(0.0, INF, lambda)?;
            existing.push((l.id, f, y));
        }
        let mut candidates = Vec::new();
        for l in inst.candidate_lines() {
            let f = lp.add_var(-INF, INF, 0.0)?;
            let y = lp.add_var(0.0, INF, lambda)?;
            let r = lp.add_var(0.0, 0.0, 0.0)?;
            let partners = match l.twin_existing {
                Some(t) => vec![t],
                None => {
                    let pair = (l.from_bus.min(l.to_bus), l.from_bus.max(l.to_bus));
                    let mut ids: Vec<LineId> = inst
                        .existing_lines()
                        .filter(|e| (e.from_bus.min(e.to_bus), e.from_bus.max(e.to_bus)) == pair)
                        .map(|e| e.id)
                        .collect();
                    ids.sort_unstable();
                    ids
                }
            };
            candidates.push(CandidateVars { id: l.id, f, y, r, capacity: l.capacity, partners });
        }
        let mut gen_vars = Vec::new();
        for (g, (&lo, &hi)) in inst.generators.iter().zip(sc.gen_lower.iter().zip(&sc.gen_upper)) {
            gen_vars.push(lp.add_var(lo, hi, g.cost)?);
        }
        let bus_vars: Vec<VarId> = (0..nb).map(|_| lp.add_var(-INF, INF, 0.0)).collect::<Result<_, _>>()?;
        let theta_vars: Vec<VarId> = (0..nb).map(|_| lp.add_var(-INF, INF, 0.0)).collect::<Result<_, _>>()?;
        for b in reference_buses(inst) {
            lp.set_var_bounds(theta_vars[b], 0.0, 0.0)?;
        }

        // Current law per bus.
        let mut kcl: Vec<Vec<(VarId, f64)>> = (0..nb).map(|b| vec![(bus_vars[b], 1.0)]).collect();
        let line_flow = |id: LineId| -> VarId {
            existing
                .iter()
                .find(|e| e.0 == id)
                .map(|e| e.1)
                .or_else(|| candidates.iter().find(|c| c.id == id).map(|c| c.f))
                .expect("line registered")
        };
        for l in &inst.lines {
            let f = line_flow(l.id);
            kcl[l.from_bus].push((f, -1.0));
            kcl[l.to_bus].push((f, 1.0));
        }
        for (b, row) in kcl.iter().enumerate() {
            lp.add_row(row, sc.demand[b], sc.demand[b])?;
        }

        // Voltage law and capacities.
        for &(id, f, y) in &existing {
            let l = inst.line(id).expect("existing line");
            let (tf, tt) = (theta_vars[l.from_bus], theta_vars[l.to_bus]);
            lp.add_row(&[(f, 1.0), (tf, -l.susceptance), (tt, l.susceptance)], 0.0, 0.0)?;
            lp.add_row(&[(f, 1.0), (y, -1.0)], -INF, l.capacity)?;
            lp.add_row(&[(f, 1.0), (y, 1.0)], -l.capacity, INF)?;
        }
        for c in &candidates {
            let l = inst.line(c.id).expect("candidate line");
            let (tf, tt) = (theta_vars[l.from_bus], theta_vars[l.to_bus]);
            lp.add_row(&[(c.f, 1.0), (tf, -l.susceptance), (tt, l.susceptance), (c.r, -1.0)], 0.0, 0.0)?;
            lp.add_row(&[(c.f, 1.0), (c.y, -1.0)], -INF, l.capacity)?;
            lp.add_row(&[(c.f, 1.0), (c.y, 1.0)], -l.capacity, INF)?;
        }

        // Bus injection equals the sum of its generators.
        let mut link: Vec<Vec<(VarId, f64)>> = (0..nb).map(|b| vec![(bus_vars[b], 1.0)]).collect();
        for (g, &v) in inst.generators.iter().zip(&gen_vars) {
            link[g.bus].push((v, -1.0));
        }
        for row in &link {
            lp.add_row(row, 0.0, 0.0)?;
        }

        let cand_pos = candidates.iter().enumerate().map(|(i, c)| (c.id, i)).collect();
        let invest = inst.candidate_lines().map(|l| (l.id, l.invest_cost)).collect();
        let active = inst.all_candidates_plan();
        Ok(ScenarioLpModel {
            scenario: s,
            lambda,
            lp,
            solver: RevisedSimplex::default(),
            warm: None,
            existing,
            candidates,
            cand_pos,
            invest,
            gen_vars,
            gen_cost: inst.generators.iter().map(|g| g.cost).collect(),
            bus_vars,
            theta_vars,
            active,
            num_buses: nb,
        })
    }

    pub fn scenario(&self) -> ScenarioId {
        self.scenario
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn lp(&self) -> &LinearProgram {
        &self.lp
    }

    pub fn active(&self) -> &Plan {
        &self.active
    }

    pub fn num_buses(&self) -> usize {
        self.num_buses
    }

    pub fn num_candidates(&self) -> usize {
        self.candidates.len()
    }

    /// Investment cost charged for candidate `k` by [`Self::evaluate`].
    pub fn invest_cost_of(&self, k: LineId) -> Result<f64> {
        self.invest.get(&k).copied().ok_or(Error::UnknownCandidate(k))
    }

    pub fn invest_cost(&self, plan: &Plan) -> Result<f64> {
        plan.iter().map(|&k| self.invest_cost_of(k)).sum()
    }

    /// Replaces the per-candidate investment costs used by [`Self::evaluate`]
    /// (the LP itself never sees them). Used for proximal-term subproblems.
    pub fn set_invest_costs(&mut self, costs: &BTreeMap<LineId, f64>) -> Result<()> {
        for (&k, &c) in costs {
            if !self.cand_pos.contains_key(&k) {
                return Err(Error::UnknownCandidate(k));
            }
            if !c.is_finite() {
                return Err(Error::InvalidArgument(format!("non-finite cost for candidate {k}")));
            }
            self.invest.insert(k, c);
        }
        Ok(())
    }

    /// Existing lines checked by the repair step for candidate `k`.
    pub fn partners(&self, k: LineId) -> Result<&[LineId]> {
        let pos = *self.cand_pos.get(&k).ok_or(Error::UnknownCandidate(k))?;
        Ok(&self.candidates[pos].partners)
    }

    pub fn candidate_capacity(&self, k: LineId) -> Result<f64> {
        let pos = *self.cand_pos.get(&k).ok_or(Error::UnknownCandidate(k))?;
        Ok(self.candidates[pos].capacity)
    }

    /// Makes exactly the lines in `built` available.
    pub fn set_built_set(&mut self, built: &Plan) -> Result<()> {
        for &k in built.iter() {
            if !self.cand_pos.contains_key(&k) {
                return Err(Error::UnknownCandidate(k));
            }
        }
        for c in &self.candidates {
            if built.contains(c.id) {
                self.lp.set_var_bounds(c.f, -INF, INF)?;
                self.lp.set_var_bounds(c.r, 0.0, 0.0)?;
            } else {
                self.lp.set_var_bounds(c.f, 0.0, 0.0)?;
                self.lp.set_var_bounds(c.r, -INF, INF)?;
            }
        }
        self.active = built.clone();
        Ok(())
    }

    /// Solves under the current built set, reusing the previous basis.
    pub fn solve(&mut self) -> Result<OperatingPoint> {
        let sol = match self.solver.solve_from(&self.lp, self.warm.as_ref()) {
            Ok(sol) if sol.status != LpStatus::IterationLimit => sol,
            Ok(_) | Err(LpError::Numerical(_)) if self.warm.is_some() => {
                log::debug!("scenario {}: warm solve failed, retrying cold", self.scenario);
                self.solver.solve(&self.lp)?
            }
            Ok(sol) => sol,
            Err(e) => return Err(e.into()),
        };
        match sol.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => {
                return Err(Error::Infeasible(format!(
                    "scenario {}: generation limits cannot balance demand",
                    self.scenario
                )))
            }
            other => return Err(Error::LpStatus(other)),
        }
        self.warm = sol.basis.clone();
        let v = &sol.values;
        let mut flow = BTreeMap::new();
        let mut slack = BTreeMap::new();
        for &(id, f, y) in &self.existing {
            flow.insert(id, v[f]);
            slack.insert(id, v[y].max(0.0));
        }
        for c in &self.candidates {
            flow.insert(c.id, v[c.f]);
            slack.insert(c.id, v[c.y].max(0.0));
        }
        Ok(OperatingPoint {
            scenario: self.scenario,
            objective: sol.objective,
            flow,
            slack,
            generation: self.gen_vars.iter().map(|&g| v[g]).collect(),
            bus_injection: self.bus_vars.iter().map(|&b| v[b]).collect(),
            theta: self.theta_vars.iter().map(|&t| v[t]).collect(),
        })
    }

    /// Sets the built set to `plan`, solves, and reports cost and violation.
    pub fn evaluate(&mut self, plan: &Plan) -> Result<PlanEvaluation> {
        self.set_built_set(plan)?;
        let op = self.solve()?;
        self.evaluation_of(op)
    }

    /// Wraps an operating point solved under the current built set.
    pub fn evaluation_of(&self, op: OperatingPoint) -> Result<PlanEvaluation> {
        let gen: f64 = self.gen_cost.iter().zip(&op.generation).map(|(c, g)| c * g).sum();
        let cost = gen + self.invest_cost(&self.active)?;
        let violation = op.violation();
        Ok(PlanEvaluation { cost, violation, op })
    }

    /// Residual capacity fraction of every built candidate in `op`.
    pub fn residual_flows(&self, op: &OperatingPoint) -> BTreeMap<LineId, f64> {
        self.active
            .iter()
            .map(|&k| {
                let c = &self.candidates[self.cand_pos[&k]];
                let f = op.flow.get(&k).copied().unwrap_or(0.0);
                (k, (c.capacity - f.abs()) / c.capacity)
            })
            .collect()
    }
}

/// Lowest-id bus of each connected component over all lines.
fn reference_buses(inst: &Instance) -> BTreeSet<usize> {
    let n = inst.buses.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for l in &inst.lines {
        let (a, b) = (find(&mut parent, l.from_bus), find(&mut parent, l.to_bus));
        if a != b {
            // Keep the smaller id as root so roots are component minima.
            let (lo, hi) = (a.min(b), a.max(b));
            parent[hi] = lo;
        }
    }
    (0..n).filter(|&b| find(&mut parent, b) == b).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    const LAMBDA: f64 = 1000.0;

    #[test]
    fn t2_sizes() {
        let m = ScenarioLpModel::new(&fixtures::t2(), 0, LAMBDA).unwrap();
        assert_eq!(m.lp().num_vars(), 10);
        // 2 current-law, 2 voltage-law, 4 capacity, 2 injection rows.
        assert_eq!(m.lp().num_rows(), 10);
    }

    #[test]
    fn rejects_bad_penalty_and_scenario() {
        let t2 = fixtures::t2();
        assert!(matches!(ScenarioLpModel::new(&t2, 0, 0.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(ScenarioLpModel::new(&t2, 3, 1.0), Err(Error::UnknownScenario(3))));
    }

    #[test]
    fn t2_toggle_sequence() {
        let t2 = fixtures::t2();
        let mut m = ScenarioLpModel::new(&t2, 0, LAMBDA).unwrap();
        let built = Plan::from_ids([1]);
        for (plan, want_obj, want_viol) in
            [(built.clone(), 50.0, 0.0), (Plan::empty(), 50.0 + 20.0 * LAMBDA, 20.0), (built.clone(), 50.0, 0.0)]
        {
            let ev = m.evaluate(&plan).unwrap();
            assert!((ev.op.objective - want_obj).abs() < 1e-6, "{plan}: {}", ev.op.objective);
            assert!((ev.violation - want_viol).abs() < 1e-6);
            assert!(ev.op.kcl_residual(&t2) < 1e-6);
        }
    }

    #[test]
    fn t2_built_splits_flow_evenly() {
        let t2 = fixtures::t2();
        let mut m = ScenarioLpModel::new(&t2, 0, LAMBDA).unwrap();
        let op = m.solve().unwrap();
        assert!((op.flow[&0] - 25.0).abs() < 1e-6);
        assert!((op.flow[&1] - 25.0).abs() < 1e-6);
        assert!((op.generation[0] - 50.0).abs() < 1e-6);
        let plan = Plan::from_ids([1]);
        assert!((cost(&op, &plan, &t2).unwrap() - 60.0).abs() < 1e-6);
        let res = residual_flows(&op, &plan, &t2).unwrap();
        assert!((res[&1] - 5.0 / 30.0).abs() < 1e-9);
        assert_eq!(m.residual_flows(&op), res);
    }

    #[test]
    fn unknown_candidate_is_rejected() {
        let mut m = ScenarioLpModel::new(&fixtures::t2(), 0, LAMBDA).unwrap();
        assert!(matches!(m.set_built_set(&Plan::from_ids([0])), Err(Error::UnknownCandidate(0))));
    }

    #[test]
    fn no_candidates_means_pure_dispatch() {
        let mut t2 = fixtures::t2();
        t2.lines.retain(|l| !l.is_candidate());
        let mut m = ScenarioLpModel::new(&t2, 0, LAMBDA).unwrap();
        assert_eq!(m.lp().num_vars(), 7);
        let op = m.solve().unwrap();
        assert!((op.violation() - 20.0).abs() < 1e-6);
    }

    #[test]
    fn zero_demand_dispatches_nothing() {
        let mut t2 = fixtures::t2();
        t2.scenarios[0].demand = vec![0.0, 0.0];
        let mut m = ScenarioLpModel::new(&t2, 0, LAMBDA).unwrap();
        let op = m.solve().unwrap();
        assert!(op.objective.abs() < 1e-9);
        assert!(op.flow.values().all(|f| f.abs() < 1e-9));
    }

    #[test]
    fn short_generation_is_infeasible() {
        let mut t2 = fixtures::t2();
        t2.scenarios[0].gen_upper = vec![40.0];
        let mut m = ScenarioLpModel::new(&t2, 0, LAMBDA).unwrap();
        assert!(matches!(m.solve(), Err(Error::Infeasible(_))));
    }
}
