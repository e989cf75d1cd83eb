//! Level-wise beam search over feasible built sets.
//!
//! Children are formed by removing subsets of a node's built lines. A
//! removal that breaks feasibility or raises the cost is undone: the child
//! keeps its parent's lines but records the worse bound, which pushes it
//! down the selection order. Two partition strategies run one after the
//! other, each until `iterations` consecutive levels bring no improvement.

use std::time::{Duration, Instant};

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{LineId, Plan};
use crate::scenario_lp::{ScenarioLpModel, VIOLATION_TOL};

/// Cost and violation of one plan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Assessment {
    /// Dispatch plus investment cost.
    pub cost: f64,
    /// Total slack; infinite when no dispatch balances the network at all.
    pub violation: f64,
}

/// What beam search needs from a scenario model. Implemented by
/// [`ScenarioLpModel`]; tests may script it.
pub trait PlanEvaluator {
    fn assess(&mut self, plan: &Plan) -> Result<Assessment>;
    fn invest_cost_of(&self, k: LineId) -> Result<f64>;
    fn penalty(&self) -> f64;
    fn num_buses(&self) -> usize;
    fn num_candidates(&self) -> usize;
}

impl PlanEvaluator for ScenarioLpModel {
    fn assess(&mut self, plan: &Plan) -> Result<Assessment> {
        match self.evaluate(plan) {
            Ok(ev) => Ok(Assessment { cost: ev.cost, violation: ev.violation }),
            Err(Error::Infeasible(_)) => Ok(Assessment { cost: f64::INFINITY, violation: f64::INFINITY }),
            Err(e) => Err(e),
        }
    }

    fn invest_cost_of(&self, k: LineId) -> Result<f64> {
        ScenarioLpModel::invest_cost_of(self, k)
    }

    fn penalty(&self) -> f64 {
        self.lambda()
    }

    fn num_buses(&self) -> usize {
        ScenarioLpModel::num_buses(self)
    }

    fn num_candidates(&self) -> usize {
        ScenarioLpModel::num_candidates(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Random permutation of the built lines.
    RandomPerm,
    /// Built lines by non-increasing investment cost.
    CostDesc,
}

#[derive(Debug, Clone, Serialize)]
pub struct BeamParams {
    /// Levels without improvement before a strategy stops.
    pub iterations: usize,
    pub eta: f64,
    /// Children per branched node.
    pub omega: usize,
    /// Nodes branched per level.
    pub width: usize,
    pub gamma: f64,
    pub seed: u64,
    #[serde(skip)]
    pub time_limit: Option<Duration>,
}

impl Default for BeamParams {
    fn default() -> Self {
        BeamParams { iterations: 15, eta: 0.005, omega: 2, width: 3, gamma: 0.5, seed: 0, time_limit: None }
    }
}

impl BeamParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.iterations >= 1 && self.eta > 0.0 && self.omega >= 1 && self.width >= 1 && self.gamma >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid beam parameters {self:?}")))
        }
    }
}

/// Lines per removal subset: `max(round(η · |I|/|K| · |B|/1000), 1)`.
pub fn subset_size(inserted: usize, candidates: usize, buses: usize, eta: f64) -> Result<usize> {
    if candidates == 0 {
        return Err(Error::InvalidArgument("no candidate lines".into()));
    }
    let raw = eta * (inserted as f64 / candidates as f64) * (buses as f64 / 1000.0);
    Ok((raw.round() as usize).max(1))
}

/// A removal subset and its total investment cost.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Subset {
    pub lines: Vec<LineId>,
    pub z: f64,
}

/// Orders the removable lines (built minus `excluded`) by `strategy` and
/// chunks them into consecutive subsets of `size`.
pub fn partition<E: PlanEvaluator + ?Sized>(
    eval: &E,
    inserted: &Plan,
    excluded: &Plan,
    strategy: Strategy,
    size: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Subset>> {
    let mut lines: Vec<LineId> = inserted.iter().copied().filter(|k| !excluded.contains(*k)).collect();
    match strategy {
        Strategy::RandomPerm => lines.shuffle(rng),
        Strategy::CostDesc => {
            let mut keyed = Vec::with_capacity(lines.len());
            for k in lines {
                keyed.push((eval.invest_cost_of(k)?, k));
            }
            keyed.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            lines = keyed.into_iter().map(|(_, k)| k).collect();
        }
    }
    let mut out = Vec::new();
    for chunk in lines.chunks(size.max(1)) {
        let mut z = 0.0;
        for &k in chunk {
            z += eval.invest_cost_of(k)?;
        }
        out.push(Subset { lines: chunk.to_vec(), z });
    }
    Ok(out)
}

/// One node of the search tree.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BeamNode {
    pub id: usize,
    pub parent: Option<usize>,
    pub level: usize,
    pub strategy: Strategy,
    /// Built lines at this node (always a feasible set).
    pub inserted: Plan,
    /// Cost of `inserted`.
    pub cost: f64,
    /// Bookkeeping bound used for selection.
    pub ub: f64,
    /// Lines banned from later removal in this lineage.
    pub excluded: Plan,
    /// Subset whose removal created this node (empty for roots).
    pub removed: Vec<LineId>,
    pub z: f64,
    /// Whether the removal was kept.
    pub accepted: bool,
    pub selected: bool,
}

/// Picks up to `width` nodes uniformly from the `⌊(1+γ)·width⌋` lowest-`ub`
/// nodes of `level` (ties by node id). Returns positions into `level` in
/// ascending order.
pub fn select_nodes(level: &[BeamNode], width: usize, gamma: f64, rng: &mut ChaCha8Rng) -> Vec<usize> {
    if level.len() <= width {
        return (0..level.len()).collect();
    }
    let mut order: Vec<usize> = (0..level.len()).collect();
    order.sort_by(|&a, &b| level[a].ub.total_cmp(&level[b].ub).then(level[a].id.cmp(&level[b].id)));
    let pool = (((1.0 + gamma) * width as f64).floor() as usize).clamp(width, level.len());
    let mut picked: Vec<usize> = index::sample(rng, pool, width).into_iter().map(|i| order[i]).collect();
    picked.sort_unstable();
    picked
}

#[derive(Debug, Clone, Serialize)]
pub struct BeamOutcome {
    pub plan: Plan,
    pub cost: f64,
    pub levels: usize,
    pub tree: Vec<BeamNode>,
}

/// Children of `node`: one per subset among the `omega` largest-`Z`
/// subsets (ties by smallest line id).
pub fn branch<E: PlanEvaluator + ?Sized>(
    eval: &mut E,
    node: &BeamNode,
    subsets: &[Subset],
    omega: usize,
    next_id: &mut usize,
) -> Result<Vec<BeamNode>> {
    let mut order: Vec<&Subset> = subsets.iter().collect();
    let min_id = |s: &Subset| s.lines.iter().copied().min().unwrap_or(usize::MAX);
    order.sort_by(|a, b| b.z.total_cmp(&a.z).then(min_id(a).cmp(&min_id(b))));
    let mut children = Vec::new();
    for subset in order.into_iter().take(omega) {
        let mut trial = node.inserted.clone();
        for &k in &subset.lines {
            trial.remove(k);
        }
        let a = eval.assess(&trial)?;
        let feasible = a.violation <= VIOLATION_TOL;
        let accepted = feasible && a.cost <= node.cost;
        let (inserted, cost, ub, mut excluded) = if accepted {
            (trial, a.cost, a.cost, node.excluded.clone())
        } else {
            let ub = if feasible { a.cost } else { node.cost + eval.penalty() * a.violation };
            (node.inserted.clone(), node.cost, ub, node.excluded.clone())
        };
        if !accepted && node.strategy == Strategy::CostDesc {
            for &k in &subset.lines {
                excluded.insert(k);
            }
        }
        children.push(BeamNode {
            id: *next_id,
            parent: Some(node.id),
            level: node.level + 1,
            strategy: node.strategy,
            inserted,
            cost,
            ub,
            excluded,
            removed: subset.lines.clone(),
            z: subset.z,
            accepted,
            selected: false,
        });
        *next_id += 1;
    }
    Ok(children)
}

/// Runs both strategies from the feasible built set `start`.
pub fn beam_search<E: PlanEvaluator + ?Sized>(eval: &mut E, start: &Plan, params: &BeamParams) -> Result<BeamOutcome> {
    params.validate()?;
    let clock = Instant::now();
    let timed_out = || params.time_limit.is_some_and(|t| clock.elapsed() >= t);
    let first = eval.assess(start)?;
    if first.violation > VIOLATION_TOL {
        return Err(Error::InfeasibleStart(first.violation));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut best_plan = start.clone();
    let mut best_cost = first.cost;
    let mut tree: Vec<BeamNode> = Vec::new();
    let mut next_id = 0usize;
    let mut levels = 0usize;
    let total = eval.num_candidates();
    let buses = eval.num_buses();

    for strategy in [Strategy::RandomPerm, Strategy::CostDesc] {
        if timed_out() {
            break;
        }
        let root = BeamNode {
            id: next_id,
            parent: None,
            level: 0,
            strategy,
            inserted: best_plan.clone(),
            cost: best_cost,
            ub: best_cost,
            excluded: Plan::empty(),
            removed: Vec::new(),
            z: 0.0,
            accepted: true,
            selected: false,
        };
        next_id += 1;
        tree.push(root.clone());
        let mut level = vec![root];
        let mut stall = 0usize;
        while stall < params.iterations && !level.is_empty() && !timed_out() {
            let picked = select_nodes(&level, params.width, params.gamma, &mut rng);
            let mut next_level = Vec::new();
            let mut improved = false;
            for &pos in &picked {
                if timed_out() {
                    break;
                }
                let node = &level[pos];
                if let Some(n) = tree.iter_mut().find(|n| n.id == node.id) {
                    n.selected = true;
                }
                if node.inserted.is_empty() {
                    continue;
                }
                let size = subset_size(node.inserted.len(), total, buses, params.eta)?;
                let subsets = partition(&*eval, &node.inserted, &node.excluded, strategy, size, &mut rng)?;
                let children = branch(eval, node, &subsets, params.omega, &mut next_id)?;
                for child in children {
                    if child.accepted && child.cost < best_cost {
                        best_cost = child.cost;
                        best_plan = child.inserted.clone();
                        improved = true;
                    }
                    tree.push(child.clone());
                    next_level.push(child);
                }
            }
            levels += 1;
            stall = if improved { 0 } else { stall + 1 };
            log::trace!("beam {strategy:?} level {levels}: {} nodes, best {best_cost:.6}", next_level.len());
            level = next_level;
        }
    }
    Ok(BeamOutcome { plan: best_plan, cost: best_cost, levels, tree })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn subset_size_formula() {
        assert_eq!(subset_size(1000, 1000, 1000, 0.005).unwrap(), 1);
        assert_eq!(subset_size(10, 10, 3000, 2.0).unwrap(), 6);
        assert_eq!(subset_size(3, 10, 30, 0.005).unwrap(), 1);
        assert!(subset_size(3, 0, 30, 0.005).is_err());
    }

    #[test]
    fn selection_without_surplus_takes_everything() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let node = |id, ub| BeamNode {
            id,
            parent: None,
            level: 1,
            strategy: Strategy::RandomPerm,
            inserted: Plan::empty(),
            cost: ub,
            ub,
            excluded: Plan::empty(),
            removed: vec![],
            z: 0.0,
            accepted: true,
            selected: false,
        };
        assert_eq!(select_nodes(&[node(0, 1.0)], 3, 0.5, &mut rng), vec![0]);
        let level: Vec<BeamNode> = (0..6).map(|i| node(i, 10.0 - i as f64)).collect();
        // γ = 0 keeps exactly the three lowest bounds.
        assert_eq!(select_nodes(&level, 3, 0.0, &mut rng), vec![3, 4, 5]);
        for _ in 0..20 {
            let picked = select_nodes(&level, 3, 0.5, &mut rng);
            assert_eq!(picked.len(), 3);
            assert!(picked.iter().all(|&p| p >= 2), "pool is the four best: {picked:?}");
        }
    }

    #[test]
    fn t2_has_nothing_to_remove() {
        let t2 = fixtures::t2();
        let mut m = ScenarioLpModel::new(&t2, 0, 100.0).unwrap();
        let out = beam_search(&mut m, &Plan::from_ids([1]), &BeamParams::default()).unwrap();
        assert_eq!(out.plan, Plan::from_ids([1]));
        assert!((out.cost - 60.0).abs() < 1e-6);
        assert!(out.tree.iter().all(|n| n.inserted == Plan::from_ids([1])));
    }
}
