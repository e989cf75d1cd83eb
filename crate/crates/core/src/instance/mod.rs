//! Power-system instances: buses, generators, existing and candidate lines,
//! and probability-weighted operating scenarios.
//!
//! Flow sign convention used throughout the crate: a positive flow on a line
//! runs from `from_bus` to `to_bus`.

mod builder;
mod io;
mod validate;

pub use builder::InstanceBuilder;
pub use io::{format_float, load_instance, load_instance_file, serialize_instance, to_canonical_json};
pub use validate::{validate, Diagnostic};

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type BusId = usize;
pub type GenId = usize;
pub type LineId = usize;
pub type ScenarioId = usize;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    pub id: BusId,
    pub name: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum RenewableKind {
    #[default]
    None,
    Solar,
    Wind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub id: GenId,
    pub bus: BusId,
    /// Operating cost per MW.
    pub cost: f64,
    #[serde(default)]
    pub renewable: RenewableKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LineKind {
    Existing,
    Candidate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Line {
    pub id: LineId,
    pub from_bus: BusId,
    pub to_bus: BusId,
    /// Position among the lines of the same kind joining the same bus pair.
    pub parallel_index: usize,
    pub susceptance: f64,
    /// Thermal limit in MW.
    pub capacity: f64,
    pub kind: LineKind,
    /// Zero for existing lines.
    pub invest_cost: f64,
    /// For candidates: the existing line this candidate duplicates.
    pub twin_existing: Option<LineId>,
}

impl Line {
    pub fn is_candidate(&self) -> bool {
        self.kind == LineKind::Candidate
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: ScenarioId,
    pub probability: f64,
    /// MW per bus, indexed by bus id.
    pub demand: Vec<f64>,
    /// MW per generator, indexed by generator id.
    pub gen_lower: Vec<f64>,
    pub gen_upper: Vec<f64>,
}

impl Scenario {
    pub fn total_demand(&self) -> f64 {
        self.demand.iter().sum()
    }

    pub fn total_capacity(&self) -> f64 {
        self.gen_upper.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub name: String,
    pub buses: Vec<Bus>,
    pub generators: Vec<Generator>,
    /// Existing lines followed by candidates is conventional but not required.
    pub lines: Vec<Line>,
    pub scenarios: Vec<Scenario>,
}

impl Instance {
    pub fn existing_lines(&self) -> impl Iterator<Item = &Line> {
        self.lines.iter().filter(|l| l.kind == LineKind::Existing)
    }

    pub fn candidate_lines(&self) -> impl Iterator<Item = &Line> {
        self.lines.iter().filter(|l| l.kind == LineKind::Candidate)
    }

    /// Candidate ids in ascending order.
    pub fn candidate_ids(&self) -> Vec<LineId> {
        let mut ids: Vec<LineId> = self.candidate_lines().map(|l| l.id).collect();
        ids.sort_unstable();
        ids
    }

    pub fn num_candidates(&self) -> usize {
        self.candidate_lines().count()
    }

    pub fn line(&self, id: LineId) -> Option<&Line> {
        self.lines.iter().find(|l| l.id == id)
    }

    pub fn candidate(&self, id: LineId) -> Result<&Line> {
        self.line(id).filter(|l| l.is_candidate()).ok_or(Error::UnknownCandidate(id))
    }

    pub fn scenario(&self, id: ScenarioId) -> Result<&Scenario> {
        self.scenarios.get(id).ok_or(Error::UnknownScenario(id))
    }

    pub fn all_candidates_plan(&self) -> Plan {
        Plan::from_ids(self.candidate_lines().map(|l| l.id))
    }

    /// Sum of investment costs of the built candidates.
    pub fn plan_investment_cost(&self, plan: &Plan) -> Result<f64> {
        let mut total = 0.0;
        for &k in plan.iter() {
            total += self.candidate(k)?.invest_cost;
        }
        Ok(total)
    }

    /// Errors with [`Error::UnknownCandidate`] on the first id in `plan` that
    /// is not a candidate line.
    pub fn check_plan(&self, plan: &Plan) -> Result<()> {
        for &k in plan.iter() {
            self.candidate(k)?;
        }
        Ok(())
    }

    /// Default slack penalty: the largest `gen_upper · cost` over all
    /// generators and scenarios. Falls back to 1e4 when that product is zero
    /// everywhere (no costly generation).
    pub fn default_penalty(&self) -> f64 {
        let mut best: f64 = 0.0;
        for s in &self.scenarios {
            for (g, &hi) in self.generators.iter().zip(&s.gen_upper) {
                best = best.max(hi * g.cost);
            }
        }
        if best > 0.0 && best.is_finite() {
            best
        } else {
            1e4
        }
    }

    /// Copy of the instance keeping only the listed scenarios, with
    /// probabilities renormalized and scenario ids renumbered densely.
    pub fn restrict_scenarios(&self, ids: &[ScenarioId]) -> Result<Instance> {
        if ids.is_empty() {
            return Err(Error::InvalidArgument("empty scenario subset".into()));
        }
        let mut picked = Vec::with_capacity(ids.len());
        for &s in ids {
            picked.push(self.scenario(s)?.clone());
        }
        let total: f64 = picked.iter().map(|s| s.probability).sum();
        let n = picked.len() as f64;
        for (i, s) in picked.iter_mut().enumerate() {
            s.id = i;
            s.probability = if total > 0.0 { s.probability / total } else { 1.0 / n };
        }
        Ok(Instance { scenarios: picked, ..self.clone() })
    }
}

/// An investment decision: the set of built candidate lines.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Plan {
    built: BTreeSet<LineId>,
}

impl Plan {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_ids(ids: impl IntoIterator<Item = LineId>) -> Self {
        Plan { built: ids.into_iter().collect() }
    }

    pub fn contains(&self, k: LineId) -> bool {
        self.built.contains(&k)
    }

    pub fn insert(&mut self, k: LineId) -> bool {
        self.built.insert(k)
    }

    pub fn remove(&mut self, k: LineId) -> bool {
        self.built.remove(&k)
    }

    pub fn len(&self) -> usize {
        self.built.len()
    }

    pub fn is_empty(&self) -> bool {
        self.built.is_empty()
    }

    /// Ascending iteration over built ids.
    pub fn iter(&self) -> impl Iterator<Item = &LineId> + '_ {
        self.built.iter()
    }

    pub fn ids(&self) -> Vec<LineId> {
        self.built.iter().copied().collect()
    }

    pub fn as_set(&self) -> &BTreeSet<LineId> {
        &self.built
    }

    pub fn is_subset(&self, other: &Plan) -> bool {
        self.built.is_subset(&other.built)
    }

    pub fn union(&self, other: &Plan) -> Plan {
        Plan { built: self.built.union(&other.built).copied().collect() }
    }

    pub fn difference(&self, other: &Plan) -> Plan {
        Plan { built: self.built.difference(&other.built).copied().collect() }
    }
}

impl FromIterator<LineId> for Plan {
    fn from_iter<T: IntoIterator<Item = LineId>>(iter: T) -> Self {
        Plan::from_ids(iter)
    }
}

impl std::fmt::Display for Plan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let ids: Vec<String> = self.built.iter().map(|k| k.to_string()).collect();
        write!(f, "{{{}}}", ids.join(","))
    }
}
