//! Extensive-form investment MIP over a scenario subset, solved by a
//! best-first branch-and-bound on LP relaxations.
//!
//! Candidate voltage laws are linearized with big-M rows
//! `|f¹ − B·(θ_from − θ_to)| ≤ M·(1 − x)`, `M = 2Θ|B|`, with every angle
//! bounded by `Θ`. The bound actually used is raised whenever needed so
//! that no dispatch feasible without angle limits is cut off.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{Instance, LineId, Plan, ScenarioId};
use crate::lp::{Basis, LinearProgram, LpSolution, LpSolver, LpStatus, RevisedSimplex, VarId};
use crate::scenario_lp::{OperatingPoint, ScenarioLpModel};

const INF: f64 = f64::INFINITY;
const INTEGRALITY_TOL: f64 = 1e-6;
/// Relative gap at which a search is declared optimal.
pub const OPTIMALITY_GAP: f64 = 1e-6;
pub const DEFAULT_ANGLE_BOUND: f64 = 2.0 * std::f64::consts::PI;

#[derive(Debug, Clone)]
struct Block {
    scenario: ScenarioId,
    gen: Vec<VarId>,
    flow: Vec<(LineId, VarId)>,
    theta: Vec<VarId>,
}

/// Continuous relaxation of the extensive form plus the binary variable map.
#[derive(Debug, Clone)]
pub struct MipModel {
    lp: LinearProgram,
    /// `(candidate id, x variable)` in ascending id order.
    x_vars: Vec<(LineId, VarId)>,
    blocks: Vec<Block>,
    big_m: BTreeMap<LineId, f64>,
    angle_bound: f64,
    probabilities: Vec<f64>,
}

impl MipModel {
    pub fn lp(&self) -> &LinearProgram {
        &self.lp
    }

    pub fn num_binaries(&self) -> usize {
        self.x_vars.len()
    }

    /// The angle bound in effect (at least the requested one).
    pub fn angle_bound(&self) -> f64 {
        self.angle_bound
    }

    pub fn big_m(&self, k: LineId) -> Option<f64> {
        self.big_m.get(&k).copied()
    }

    pub fn scenarios(&self) -> Vec<ScenarioId> {
        self.blocks.iter().map(|b| b.scenario).collect()
    }

    /// Renormalized probabilities, aligned with [`Self::scenarios`].
    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Objective coefficient of `x_k`.
    pub fn x_cost(&self, k: LineId) -> Option<f64> {
        self.x_vars.iter().find(|(id, _)| *id == k).map(|&(_, v)| self.lp.objective()[v])
    }

    /// Fixes every binary to its value in `plan`.
    pub fn fix_plan(&mut self, plan: &Plan) -> Result<()> {
        for &k in plan.iter() {
            if !self.x_vars.iter().any(|(id, _)| *id == k) {
                return Err(Error::UnknownCandidate(k));
            }
        }
        for &(k, v) in &self.x_vars {
            let val = if plan.contains(k) { 1.0 } else { 0.0 };
            self.lp.set_var_bounds(v, val, val)?;
        }
        Ok(())
    }

    /// Restores `x ∈ [0, 1]` for every binary.
    pub fn relax(&mut self) -> Result<()> {
        for &(_, v) in &self.x_vars {
            self.lp.set_var_bounds(v, 0.0, 1.0)?;
        }
        Ok(())
    }

    fn plan_from(&self, values: &[f64]) -> Plan {
        self.x_vars.iter().filter(|&&(_, v)| values[v] > 0.5).map(|&(k, _)| k).collect()
    }

    fn points_from(&self, inst: &Instance, values: &[f64]) -> Vec<OperatingPoint> {
        self.blocks
            .iter()
            .map(|b| {
                let generation: Vec<f64> = b.gen.iter().map(|&g| values[g]).collect();
                let mut bus_injection = vec![0.0; inst.buses.len()];
                for (g, &x) in inst.generators.iter().zip(&generation) {
                    bus_injection[g.bus] += x;
                }
                let objective = inst.generators.iter().zip(&generation).map(|(g, x)| g.cost * x).sum();
                OperatingPoint {
                    scenario: b.scenario,
                    objective,
                    flow: b.flow.iter().map(|&(id, v)| (id, values[v])).collect(),
                    slack: b.flow.iter().map(|&(id, _)| (id, 0.0)).collect(),
                    generation,
                    bus_injection,
                    theta: b.theta.iter().map(|&t| values[t]).collect(),
                }
            })
            .collect()
    }
}

/// Builds the extensive form over `scenarios` (probabilities renormalized).
pub fn build_extensive_mip(inst: &Instance, scenarios: &[ScenarioId], theta: f64) -> Result<MipModel> {
    let costs: BTreeMap<LineId, f64> = inst.candidate_lines().map(|l| (l.id, l.invest_cost)).collect();
    build_with_costs(inst, scenarios, theta, &costs)
}

/// Single-scenario model whose `x_k` coefficient is
/// `C_k + w_k + ρ_k·(1/2 − x̄_k)`: the proximal objective
/// `w·x + (ρ/2)(x − x̄)²` linearized with `x² = x` for binaries.
pub fn build_ph_subproblem(
    inst: &Instance,
    s: ScenarioId,
    weights: &BTreeMap<LineId, f64>,
    consensus: &BTreeMap<LineId, f64>,
    rho: &BTreeMap<LineId, f64>,
    theta: f64,
) -> Result<MipModel> {
    let costs = proximal_costs(inst, weights, consensus, rho)?;
    build_with_costs(inst, &[s], theta, &costs)
}

/// Per-candidate investment coefficients with the linearized proximal term.
pub fn proximal_costs(
    inst: &Instance,
    weights: &BTreeMap<LineId, f64>,
    consensus: &BTreeMap<LineId, f64>,
    rho: &BTreeMap<LineId, f64>,
) -> Result<BTreeMap<LineId, f64>> {
    let mut out = BTreeMap::new();
    for l in inst.candidate_lines() {
        let r = rho.get(&l.id).copied().unwrap_or(0.0);
        if r < 0.0 || !r.is_finite() {
            return Err(Error::InvalidArgument(format!("rho for candidate {} is {r}", l.id)));
        }
        let w = weights.get(&l.id).copied().unwrap_or(0.0);
        let xbar = consensus.get(&l.id).copied().unwrap_or(0.0);
        out.insert(l.id, l.invest_cost + w + r * (0.5 - xbar));
    }
    Ok(out)
}

pub(crate) fn build_with_costs(
    inst: &Instance,
    scenarios: &[ScenarioId],
    theta: f64,
    costs: &BTreeMap<LineId, f64>,
) -> Result<MipModel> {
    if scenarios.is_empty() {
        return Err(Error::InvalidArgument("empty scenario subset".into()));
    }
    if !(theta > 0.0) || !theta.is_finite() {
        return Err(Error::InvalidArgument(format!("angle bound must be positive, got {theta}")));
    }
    for &s in scenarios {
        inst.scenario(s)?;
    }
    let total_p: f64 = scenarios.iter().map(|&s| inst.scenarios[s].probability).sum();
    let probabilities: Vec<f64> = scenarios
        .iter()
        .map(|&s| if total_p > 0.0 { inst.scenarios[s].probability / total_p } else { 1.0 / scenarios.len() as f64 })
        .collect();

    let angle_bound = theta.max(safe_angle_bound(inst));
    let nb = inst.buses.len();
    let refs = reference_buses(inst);
    let mut lp = LinearProgram::new();
    let mut x_vars = Vec::new();
    let mut big_m = BTreeMap::new();
    let mut cands: Vec<_> = inst.candidate_lines().collect();
    cands.sort_by_key(|l| l.id);
    for l in &cands {
        let c = costs.get(&l.id).copied().unwrap_or(l.invest_cost);
        x_vars.push((l.id, lp.add_var(0.0, 1.0, c)?));
        big_m.insert(l.id, 2.0 * angle_bound * l.susceptance.abs());
    }

    let mut blocks = Vec::new();
    for (&s, &p) in scenarios.iter().zip(&probabilities) {
        let sc = &inst.scenarios[s];
        let gen: Vec<VarId> = inst
            .generators
            .iter()
            .zip(sc.gen_lower.iter().zip(&sc.gen_upper))
            .map(|(g, (&lo, &hi))| lp.add_var(lo, hi, p * g.cost))
            .collect::<Result<_, _>>()?;
        let theta_vars: Vec<VarId> = (0..nb)
            .map(|b| if refs[b] { lp.add_var(0.0, 0.0, 0.0) } else { lp.add_var(-angle_bound, angle_bound, 0.0) })
            .collect::<Result<_, _>>()?;
        let mut flow = Vec::new();
        let mut kcl: Vec<Vec<(VarId, f64)>> = vec![Vec::new(); nb];
        for (g, &v) in inst.generators.iter().zip(&gen) {
            kcl[g.bus].push((v, 1.0));
        }
        for l in &inst.lines {
            let (tf, tt) = (theta_vars[l.from_bus], theta_vars[l.to_bus]);
            let kvl = [(tf, -l.susceptance), (tt, l.susceptance)];
            let f = if l.is_candidate() {
                let f = lp.add_var(-INF, INF, 0.0)?;
                let x = x_vars.iter().find(|(id, _)| *id == l.id).expect("binary exists").1;
                let m = big_m[&l.id];
                lp.add_row(&[(f, 1.0), (x, -l.capacity)], -INF, 0.0)?;
                lp.add_row(&[(f, 1.0), (x, l.capacity)], 0.0, INF)?;
                lp.add_row(&[(f, 1.0), kvl[0], kvl[1], (x, m)], -INF, m)?;
                lp.add_row(&[(f, 1.0), kvl[0], kvl[1], (x, -m)], -m, INF)?;
                f
            } else {
                let f = lp.add_var(-l.capacity, l.capacity, 0.0)?;
                lp.add_row(&[(f, 1.0), kvl[0], kvl[1]], 0.0, 0.0)?;
                f
            };
            kcl[l.from_bus].push((f, -1.0));
            kcl[l.to_bus].push((f, 1.0));
            flow.push((l.id, f));
        }
        for (b, row) in kcl.iter().enumerate() {
            lp.add_row(row, sc.demand[b], sc.demand[b])?;
        }
        blocks.push(Block { scenario: s, gen, flow, theta: theta_vars });
    }
    Ok(MipModel { lp, x_vars, blocks, big_m, angle_bound, probabilities })
}

/// An angle bound that no dispatch respecting the line limits can exceed.
///
/// Each in-service line limits its angle difference to `capacity/|B|`. When
/// the existing network alone spans every connected component, any plan's
/// angles are bounded by shortest-path distances over existing lines;
/// otherwise the sum of the widest difference per bus pair bounds every
/// simple path.
pub fn safe_angle_bound(inst: &Instance) -> f64 {
    let n = inst.buses.len();
    let weight = |l: &crate::instance::Line| l.capacity / l.susceptance.abs();
    let all = components(n, inst.lines.iter().map(|l| (l.from_bus, l.to_bus)));
    let ex = components(n, inst.existing_lines().map(|l| (l.from_bus, l.to_bus)));
    let spanning = (0..n).all(|b| {
        // Same partition iff each bus shares its existing-network root with the
        // root of its full component.
        ex[b] == ex[all[b]]
    });
    let bound = if spanning {
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for l in inst.existing_lines() {
            adj[l.from_bus].push((l.to_bus, weight(l)));
            adj[l.to_bus].push((l.from_bus, weight(l)));
        }
        let mut worst: f64 = 0.0;
        for root in (0..n).filter(|&b| all[b] == b) {
            for d in dijkstra(&adj, root) {
                if d.is_finite() {
                    worst = worst.max(d);
                }
            }
        }
        worst
    } else {
        let mut widest: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for l in &inst.lines {
            let key = (l.from_bus.min(l.to_bus), l.from_bus.max(l.to_bus));
            let e = widest.entry(key).or_insert(0.0);
            *e = e.max(weight(l));
        }
        widest.values().sum()
    };
    bound * (1.0 + 1e-6) + 1e-6
}

/// Component root (lowest bus id) of every bus.
fn components(n: usize, edges: impl Iterator<Item = (usize, usize)>) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    (0..n).map(|b| find(&mut parent, b)).collect()
}

fn reference_buses(inst: &Instance) -> Vec<bool> {
    let roots = components(inst.buses.len(), inst.lines.iter().map(|l| (l.from_bus, l.to_bus)));
    roots.iter().enumerate().map(|(b, &r)| r == b).collect()
}

fn dijkstra(adj: &[Vec<(usize, f64)>], src: usize) -> Vec<f64> {
    let n = adj.len();
    let mut dist = vec![INF; n];
    let mut done = vec![false; n];
    dist[src] = 0.0;
    for _ in 0..n {
        let Some(u) = (0..n).filter(|&v| !done[v] && dist[v].is_finite()).min_by(|&a, &b| dist[a].total_cmp(&dist[b]))
        else {
            break;
        };
        done[u] = true;
        for &(v, w) in &adj[u] {
            if dist[u] + w < dist[v] {
                dist[v] = dist[u] + w;
            }
        }
    }
    dist
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BnbStatus {
    Optimal,
    TimeLimit,
    Infeasible,
}

#[derive(Debug, Clone, Default)]
pub struct BnbOptions {
    pub time_limit: Option<Duration>,
    pub node_limit: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct BnbResult {
    pub status: BnbStatus,
    pub incumbent: Option<Plan>,
    /// One point per scenario of the model, for the incumbent.
    pub points: Vec<OperatingPoint>,
    pub upper_bound: f64,
    pub lower_bound: f64,
    pub gap: f64,
    pub node_count: usize,
}

struct Node {
    bound: f64,
    seq: usize,
    fixings: Vec<(usize, f64)>,
    basis: Option<Basis>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // Max-heap order: the lowest bound, then the oldest node, pops first.
    fn cmp(&self, other: &Self) -> Ordering {
        other.bound.total_cmp(&self.bound).then(other.seq.cmp(&self.seq))
    }
}

fn relative_gap(ub: f64, lb: f64) -> f64 {
    if !ub.is_finite() {
        return INF;
    }
    ((ub - lb) / ub.abs().max(1e-9)).max(0.0)
}

/// Best-first branch-and-bound. `warm`, when given, must have a feasible
/// completion and seeds the incumbent.
pub fn solve_bnb(inst: &Instance, model: &MipModel, warm: Option<&Plan>, opts: &BnbOptions) -> Result<BnbResult> {
    let start = Instant::now();
    let solver = RevisedSimplex::default();
    let mut lp = model.lp.clone();
    let out_of_time = |start: &Instant| opts.time_limit.is_some_and(|t| start.elapsed() >= t);

    let mut ub = INF;
    let mut best: Option<(Plan, Vec<f64>)> = None;
    if let Some(plan) = warm {
        let mut fixed = model.clone();
        fixed.fix_plan(plan)?;
        let sol = solver.solve(&fixed.lp)?;
        if !sol.is_optimal() {
            return Err(Error::Infeasible(format!("warm plan {plan} has no feasible dispatch")));
        }
        ub = sol.objective;
        best = Some((plan.clone(), sol.values));
    }

    // Trivial bound: cheapest generation at lower limits plus every
    // negative investment coefficient.
    let mut lb = 0.0;
    for (j, &c) in model.lp.objective().iter().enumerate() {
        let (lo, hi) = model.lp.var_bounds(j);
        if c != 0.0 {
            lb += if c > 0.0 { c * lo } else { c * hi };
        }
    }
    lb = lb.min(ub);

    let mut heap = BinaryHeap::new();
    let mut seq = 0usize;
    heap.push(Node { bound: lb, seq, fixings: Vec::new(), basis: None });
    let mut nodes = 0usize;
    let mut timed_out = false;

    while let Some(top) = heap.peek() {
        if relative_gap(ub, top.bound) <= OPTIMALITY_GAP {
            // Every open node is dominated by the incumbent within the gap.
            break;
        }
        if out_of_time(&start) || opts.node_limit.is_some_and(|n| nodes >= n) {
            timed_out = true;
            break;
        }
        let node = heap.pop().expect("peeked");
        nodes += 1;
        for &(_, v) in &model.x_vars {
            lp.set_var_bounds(v, 0.0, 1.0)?;
        }
        for &(v, val) in &node.fixings {
            lp.set_var_bounds(v, val, val)?;
        }
        let sol = solve_node(&solver, &lp, node.basis.as_ref())?;
        if sol.status != LpStatus::Optimal {
            continue;
        }
        let bound = sol.objective.max(node.bound);
        if relative_gap(ub, bound) <= OPTIMALITY_GAP {
            continue;
        }
        match most_fractional(model, &sol.values) {
            None => {
                // Integral: re-solve with x fixed exactly for clean values.
                let plan = model.plan_from(&sol.values);
                let mut fixed = lp.clone();
                for &(k, v) in &model.x_vars {
                    let val = if plan.contains(k) { 1.0 } else { 0.0 };
                    fixed.set_var_bounds(v, val, val)?;
                }
                let exact = solve_node(&solver, &fixed, sol.basis.as_ref())?;
                let (obj, values) =
                    if exact.is_optimal() { (exact.objective, exact.values) } else { (sol.objective, sol.values) };
                if obj < ub {
                    ub = obj;
                    best = Some((plan, values));
                }
            }
            Some(v) => {
                for val in [0.0, 1.0] {
                    seq += 1;
                    let mut fixings = node.fixings.clone();
                    fixings.push((v, val));
                    heap.push(Node { bound, seq, fixings, basis: sol.basis.clone() });
                }
            }
        }
    }

    let open_min = heap.iter().map(|n| n.bound).fold(INF, f64::min);
    let lower_bound = if ub.is_finite() {
        open_min.min(ub)
    } else if open_min.is_finite() {
        open_min
    } else {
        lb
    };
    let gap = relative_gap(ub, lower_bound);
    let (status, incumbent, points) = match best {
        Some((plan, values)) => {
            let status = if gap <= OPTIMALITY_GAP { BnbStatus::Optimal } else { BnbStatus::TimeLimit };
            (status, Some(plan), model.points_from(inst, &values))
        }
        None if timed_out => (BnbStatus::TimeLimit, None, Vec::new()),
        None => (BnbStatus::Infeasible, None, Vec::new()),
    };
    Ok(BnbResult { status, incumbent, points, upper_bound: ub, lower_bound, gap, node_count: nodes })
}

fn solve_node(solver: &RevisedSimplex, lp: &LinearProgram, basis: Option<&Basis>) -> Result<LpSolution> {
    match solver.solve_from(lp, basis) {
        Ok(sol) if sol.status != LpStatus::IterationLimit => Ok(sol),
        _ if basis.is_some() => Ok(solver.solve(lp)?),
        Ok(sol) => Ok(sol),
        Err(e) => Err(e.into()),
    }
}

/// Binary with value farthest from integrality; ties go to the lowest id.
fn most_fractional(model: &MipModel, values: &[f64]) -> Option<VarId> {
    let mut best: Option<(f64, VarId)> = None;
    for &(_, v) in &model.x_vars {
        let frac = (values[v] - values[v].round()).abs();
        if frac > INTEGRALITY_TOL && best.is_none_or(|(f, _)| frac > f + 1e-12) {
            best = Some((frac, v));
        }
    }
    best.map(|(_, v)| v)
}

/// Per-scenario feasibility of a fixed plan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub feasible: Vec<bool>,
    /// Largest scaled constraint residual over the feasible scenarios'
    /// dispatches, or over the slack of infeasible ones.
    pub max_residual: f64,
}

impl FeasibilityReport {
    pub fn all_feasible(&self) -> bool {
        self.feasible.iter().all(|&f| f)
    }
}

/// Decides, scenario by scenario, whether `plan` admits a dispatch that
/// satisfies the hard-capacity model with the binaries fixed.
pub fn check_mip_feasible(inst: &Instance, scenarios: &[ScenarioId], plan: &Plan) -> Result<FeasibilityReport> {
    inst.check_plan(plan)?;
    let solver = RevisedSimplex::default();
    let mut feasible = Vec::with_capacity(scenarios.len());
    let mut max_residual: f64 = 0.0;
    for &s in scenarios {
        let mut model = build_extensive_mip(inst, &[s], DEFAULT_ANGLE_BOUND)?;
        model.fix_plan(plan)?;
        let sol = solver.solve(&model.lp)?;
        match sol.status {
            LpStatus::Optimal => {
                feasible.push(true);
                max_residual = max_residual.max(model.lp.max_scaled_violation(&sol.values));
            }
            _ => {
                feasible.push(false);
                let mut m1 = ScenarioLpModel::new(inst, s, 1.0)?;
                m1.set_built_set(plan)?;
                if let Ok(op) = m1.solve() {
                    max_residual = max_residual.max(op.violation());
                }
            }
        }
    }
    Ok(FeasibilityReport { feasible, max_residual })
}
