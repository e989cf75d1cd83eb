//! Independent oracles and small fixtures shared by the integration tests
//! and the acceptance suite.
#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tepkit::beam::{Assessment, PlanEvaluator};
use tepkit::instance::{InstanceBuilder, LineId};
use tepkit::lp::LinearProgram;
use tepkit::scenario_lp::{ScenarioLpModel, VIOLATION_TOL};
use tepkit::{Instance, Plan, Result};

// ---------------------------------------------------------------- LP oracle

/// Solves `a x = b` by Gaussian elimination with partial pivoting; `None`
/// when the system is singular.
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-9 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Minimum of a bounded LP by enumerating every basic solution: each choice
/// of `n` linearly independent tight constraints (row sides and variable
/// bounds) is solved and kept if feasible. `None` when no vertex is
/// feasible. Requires every variable to have finite bounds.
pub fn vertex_enumeration(lp: &LinearProgram) -> Option<f64> {
    let n = lp.num_vars();
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    for row in lp.rows() {
        let mut dense = vec![0.0; n];
        for &(v, c) in &row.coeffs {
            dense[v] += c;
        }
        for side in [row.lo, row.hi] {
            if side.is_finite() {
                planes.push((dense.clone(), side));
            }
        }
    }
    for v in 0..n {
        let (lo, hi) = lp.var_bounds(v);
        assert!(lo.is_finite() && hi.is_finite(), "oracle needs bounded variables");
        let mut e = vec![0.0; n];
        e[v] = 1.0;
        planes.push((e.clone(), lo));
        planes.push((e, hi));
    }
    let mut best: Option<f64> = None;
    let mut pick = Vec::with_capacity(n);
    choose(&planes, n, 0, &mut pick, &mut |idx| {
        let a = idx.iter().map(|&i| planes[i].0.clone()).collect();
        let b = idx.iter().map(|&i| planes[i].1).collect();
        if let Some(x) = solve_square(a, b) {
            if lp.max_scaled_violation(&x) <= 1e-9 {
                let obj = lp.objective_value(&x);
                best = Some(best.map_or(obj, |b: f64| b.min(obj)));
            }
        }
    });
    best
}

fn choose(planes: &[(Vec<f64>, f64)], k: usize, start: usize, pick: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if pick.len() == k {
        f(pick);
        return;
    }
    for i in start..planes.len() {
        if planes.len() - i < k - pick.len() {
            break;
        }
        pick.push(i);
        choose(planes, k, i + 1, pick, f);
        pick.pop();
    }
}

/// A random bounded LP with `n ≤ 6` variables. Rows are built around a
/// random interior point so most instances are feasible; `infeasible`
/// adds a contradictory pair of rows.
pub fn random_lp(rng: &mut ChaCha8Rng, infeasible: bool) -> LinearProgram {
    let mut lp = LinearProgram::new();
    let n = rng.gen_range(1..=6);
    let mut x0 = Vec::with_capacity(n);
    for _ in 0..n {
        let lo = -(rng.gen_range(0..=4) as f64);
        let hi = lo + rng.gen_range(1..=8) as f64;
        let cost = rng.gen_range(-6..=6) as f64;
        lp.add_var(lo, hi, cost).unwrap();
        x0.push(rng.gen_range(lo..hi));
    }
    let m = rng.gen_range(1..=5);
    for _ in 0..m {
        let mut coeffs = Vec::new();
        for v in 0..n {
            if rng.gen_bool(0.7) {
                coeffs.push((v, rng.gen_range(-5..=5) as f64));
            }
        }
        let at: f64 = coeffs.iter().map(|&(v, c)| c * x0[v]).sum();
        let (lo, hi) = match rng.gen_range(0..4) {
            0 => (f64::NEG_INFINITY, (at + rng.gen_range(0.0..3.0)).round()),
            1 => ((at - rng.gen_range(0.0..3.0)).round(), f64::INFINITY),
            2 => ((at - rng.gen_range(0.5..2.0)).floor(), (at + rng.gen_range(0.5..2.0)).ceil()),
            _ => (at, at),
        };
        lp.add_row(&coeffs, lo, hi).unwrap();
    }
    if infeasible {
        let coeffs: Vec<(usize, f64)> = (0..n).map(|v| (v, 1.0)).collect();
        lp.add_row(&coeffs, f64::NEG_INFINITY, -100.0).unwrap();
        lp.add_row(&coeffs, 100.0, f64::INFINITY).unwrap();
    }
    lp
}

// ------------------------------------------------------ enumeration oracle

pub fn plan_from_mask(ids: &[LineId], mask: u64) -> Plan {
    ids.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &k)| k).collect()
}

/// Cheapest plan over all `2^|K|` subsets that serves every scenario, with
/// its expected cost. Each scenario's dispatch is a fresh LP per plan.
pub fn enumerate_optimum(inst: &Instance) -> (f64, Plan) {
    let ids = inst.candidate_ids();
    assert!(ids.len() <= 20, "enumeration oracle is exponential");
    let mut models: Vec<ScenarioLpModel> =
        (0..inst.scenarios.len()).map(|s| ScenarioLpModel::new(inst, s, 1e6).unwrap()).collect();
    let mut best = (f64::INFINITY, Plan::empty());
    'plans: for mask in 0..(1u64 << ids.len()) {
        let plan = plan_from_mask(&ids, mask);
        let mut cost = inst.plan_investment_cost(&plan).unwrap();
        if cost >= best.0 {
            continue;
        }
        for (m, sc) in models.iter_mut().zip(&inst.scenarios) {
            let ev = match m.evaluate(&plan) {
                Ok(ev) => ev,
                Err(tepkit::Error::Infeasible(_)) => continue 'plans,
                Err(e) => panic!("{e}"),
            };
            if !ev.feasible() {
                continue 'plans;
            }
            cost += sc.probability * ev.op.generation_cost(inst);
        }
        if cost < best.0 {
            best = (cost, plan);
        }
    }
    best
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

pub fn random_plan(rng: &mut ChaCha8Rng, ids: &[LineId]) -> Plan {
    let p = rng.gen_range(0.0..1.0);
    ids.iter().copied().filter(|_| rng.gen_bool(p)).collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ----------------------------------------------------------------- fixtures

/// Two buses, an existing line that alone carries the load, and four
/// candidates that are never needed: every removal is an improvement.
pub fn dr_surplus() -> Instance {
    let mut b = InstanceBuilder::new("dr-surplus", 2);
    b.generator(0, 1.0);
    let j = b.existing(0, 1, 1.0, 100.0);
    for cost in [10.0, 20.0, 30.0, 40.0] {
        b.candidate(0, 1, 1.0, 100.0, cost, Some(j));
    }
    b.scenario(1.0, vec![0.0, 50.0], vec![0.0], vec![100.0]);
    b.build().unwrap()
}

/// Two buses where every one of four candidates is needed: any removal
/// overloads the existing line.
pub fn dr_tight() -> Instance {
    let mut b = InstanceBuilder::new("dr-tight", 2);
    b.generator(0, 1.0);
    let j = b.existing(0, 1, 1.0, 10.0);
    for _ in 0..4 {
        b.candidate(0, 1, 1.0, 10.0, 5.0, Some(j));
    }
    b.scenario(1.0, vec![0.0, 50.0], vec![0.0], vec![100.0]);
    b.build().unwrap()
}

/// Three buses in a triangle with one candidate on a corridor that has no
/// existing line.
pub fn three_bus() -> Instance {
    let mut b = InstanceBuilder::new("three-bus", 3);
    b.generator(0, 1.0);
    b.generator(1, 3.0);
    b.existing(0, 1, 10.0, 100.0);
    b.existing(1, 2, 10.0, 100.0);
    b.candidate(0, 2, 10.0, 100.0, 25.0, None);
    b.scenario(1.0, vec![0.0, 20.0, 60.0], vec![0.0, 0.0], vec![200.0, 200.0]);
    b.build().unwrap()
}

/// A scripted evaluator for the twelve-line walkthrough tree: investment
/// costs per line and a table of known plan costs; any other plan is
/// reported infeasible.
pub struct ScriptedTree {
    pub invest: BTreeMap<LineId, f64>,
    pub costs: BTreeMap<Plan, f64>,
    pub calls: usize,
}

impl ScriptedTree {
    pub fn all() -> Plan {
        Plan::from_ids(1..=12)
    }

    pub fn without(ids: &[LineId]) -> Plan {
        Self::all().difference(&Plan::from_ids(ids.iter().copied()))
    }

    pub fn new() -> Self {
        let invest: BTreeMap<LineId, f64> = [
            (1, 36.0),
            (2, 99.0),
            (3, 99.0),
            (4, 99.0),
            (5, 101.0),
            (6, 99.0),
            (7, 101.0),
            (8, 21.0),
            (9, 21.0),
            (10, 94.0),
            (11, 94.0),
            (12, 36.0),
        ]
        .into_iter()
        .collect();
        let costs = [
            (Self::all(), 30521.0),
            (Self::without(&[7]), 30419.0),
            (Self::without(&[5]), 30419.0),
            (Self::without(&[5, 7]), 30318.0),
            (Self::without(&[2, 7]), 32124.0),
        ]
        .into_iter()
        .collect();
        ScriptedTree { invest, costs, calls: 0 }
    }
}

impl PlanEvaluator for ScriptedTree {
    fn assess(&mut self, plan: &Plan) -> Result<Assessment> {
        self.calls += 1;
        Ok(match self.costs.get(plan) {
            Some(&cost) => Assessment { cost, violation: 0.0 },
            None => Assessment { cost: 40000.0, violation: 1.0 },
        })
    }

    fn invest_cost_of(&self, k: LineId) -> Result<f64> {
        self.invest.get(&k).copied().ok_or(tepkit::Error::UnknownCandidate(k))
    }

    fn penalty(&self) -> f64 {
        1000.0
    }

    fn num_buses(&self) -> usize {
        5
    }

    fn num_candidates(&self) -> usize {
        12
    }
}

/// Whether `plan` serves scenario `s` (zero violation in the dispatch LP).
pub fn serves(inst: &Instance, s: usize, plan: &Plan) -> bool {
    let mut m = ScenarioLpModel::new(inst, s, 1e6).unwrap();
    match m.evaluate(plan) {
        Ok(ev) => ev.violation <= VIOLATION_TOL,
        Err(_) => false,
    }
}

/// An instance from the repository's `data` directory.
pub fn data_instance(name: &str) -> Instance {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name);
    tepkit::instance::load_instance_file(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn data_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}
