use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{Instance, LineKind};

/// One violated instance invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    /// The offending entity, e.g. `line 4` or `scenario 2`.
    pub entity: String,
    /// Short stable rule name, e.g. `probability-sum`.
    pub rule: &'static str,
    pub detail: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} ({})", self.entity, self.rule, self.detail)
    }
}

const PROBABILITY_TOL: f64 = 1e-9;

/// Checks every instance invariant. Returns an empty list iff the instance
/// is valid; never panics on malformed data.
pub fn validate(inst: &Instance) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut push = |entity: String, rule: &'static str, detail: String| {
        out.push(Diagnostic { entity, rule, detail });
    };

    let nb = inst.buses.len();
    let ng = inst.generators.len();

    for (pos, b) in inst.buses.iter().enumerate() {
        if b.id != pos {
            push(format!("bus {}", b.id), "bus-ids-dense", format!("expected id {pos} at position {pos}"));
        }
    }

    for (pos, g) in inst.generators.iter().enumerate() {
        let who = format!("generator {}", g.id);
        if g.id != pos {
            push(who.clone(), "generator-ids-dense", format!("expected id {pos} at position {pos}"));
        }
        if g.bus >= nb {
            push(who.clone(), "generator-bus-exists", format!("bus {} does not exist", g.bus));
        }
        if !(g.cost >= 0.0) || !g.cost.is_finite() {
            push(who, "generator-cost-nonnegative", format!("cost = {}", g.cost));
        }
    }

    let mut seen_ids = BTreeSet::new();
    let mut kinds = BTreeMap::new();
    for l in &inst.lines {
        if !seen_ids.insert(l.id) {
            push(format!("line {}", l.id), "line-ids-unique", "id used more than once".into());
        }
        kinds.entry(l.id).or_insert(l.kind);
    }

    let mut parallel: BTreeMap<(LineKind, usize, usize, usize), usize> = BTreeMap::new();
    for l in &inst.lines {
        let who = match l.kind {
            LineKind::Existing => format!("existing line {}", l.id),
            LineKind::Candidate => format!("candidate line {}", l.id),
        };
        for (end, b) in [("from_bus", l.from_bus), ("to_bus", l.to_bus)] {
            if b >= nb {
                push(who.clone(), "line-bus-exists", format!("{end} {b} does not exist"));
            }
        }
        if l.from_bus == l.to_bus {
            push(who.clone(), "line-endpoints-distinct", format!("both ends at bus {}", l.from_bus));
        }
        if l.susceptance == 0.0 || !l.susceptance.is_finite() {
            push(who.clone(), "susceptance-nonzero", format!("susceptance = {}", l.susceptance));
        }
        if !(l.capacity > 0.0) || !l.capacity.is_finite() {
            push(who.clone(), "capacity-positive", format!("capacity = {}", l.capacity));
        }
        let key = (l.kind, l.from_bus.min(l.to_bus), l.from_bus.max(l.to_bus), l.parallel_index);
        if parallel.insert(key, l.id).is_some() {
            push(
                who.clone(),
                "parallel-index-unique",
                format!("parallel_index {} repeated on this bus pair", l.parallel_index),
            );
        }
        match l.kind {
            LineKind::Existing => {
                if l.invest_cost != 0.0 {
                    push(who.clone(), "existing-invest-cost-zero", format!("invest_cost = {}", l.invest_cost));
                }
                if l.twin_existing.is_some() {
                    push(who, "existing-has-no-twin", "twin_existing must be absent".into());
                }
            }
            LineKind::Candidate => {
                if !(l.invest_cost >= 0.0) || !l.invest_cost.is_finite() {
                    push(who.clone(), "invest-cost-nonnegative", format!("invest_cost = {}", l.invest_cost));
                }
                if let Some(t) = l.twin_existing {
                    if kinds.get(&t) != Some(&LineKind::Existing) {
                        push(who, "twin-is-existing", format!("line {t} is not an existing line"));
                    }
                }
            }
        }
    }

    if inst.scenarios.is_empty() {
        push("instance".into(), "scenario-count", "at least one scenario is required".into());
    }
    let mut total_p = 0.0;
    for (pos, s) in inst.scenarios.iter().enumerate() {
        let who = format!("scenario {}", s.id);
        if s.id != pos {
            push(who.clone(), "scenario-ids-dense", format!("expected id {pos} at position {pos}"));
        }
        if !(0.0..=1.0).contains(&s.probability) {
            push(who.clone(), "probability-range", format!("probability = {}", s.probability));
        }
        total_p += s.probability;
        if s.demand.len() != nb {
            push(who.clone(), "demand-length", format!("{} entries for {nb} buses", s.demand.len()));
        }
        for (b, &d) in s.demand.iter().enumerate() {
            if !(d >= 0.0) || !d.is_finite() {
                push(who.clone(), "demand-nonnegative", format!("bus {b}: demand = {d}"));
            }
        }
        if s.gen_lower.len() != ng || s.gen_upper.len() != ng {
            push(
                who.clone(),
                "generator-bounds-length",
                format!("{}/{} entries for {ng} generators", s.gen_lower.len(), s.gen_upper.len()),
            );
        }
        for (i, (&lo, &hi)) in s.gen_lower.iter().zip(&s.gen_upper).enumerate() {
            if !(lo >= 0.0 && lo <= hi && hi.is_finite()) {
                push(who.clone(), "generator-bounds-order", format!("generator {i}: [{lo}, {hi}]"));
            }
        }
    }
    if !inst.scenarios.is_empty() && !((total_p - 1.0).abs() <= PROBABILITY_TOL) {
        push("instance".into(), "probability-sum", format!("probabilities sum to {total_p}"));
    }

    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn rules(inst: &Instance) -> Vec<&'static str> {
        validate(inst).into_iter().map(|d| d.rule).collect()
    }

    #[test]
    fn fixture_is_clean() {
        assert!(validate(&fixtures::t2()).is_empty());
    }

    #[test]
    fn duplicated_line_id() {
        let mut inst = fixtures::t2();
        inst.lines[1].id = inst.lines[0].id;
        assert_eq!(rules(&inst), vec!["line-ids-unique"]);
    }

    #[test]
    fn generator_on_missing_bus() {
        let mut inst = fixtures::t2();
        inst.generators[0].bus = 9;
        assert_eq!(rules(&inst), vec!["generator-bus-exists"]);
    }

    #[test]
    fn probabilities_must_sum_to_one() {
        let mut inst = fixtures::t2();
        inst.scenarios[0].probability = 0.8;
        assert_eq!(rules(&inst), vec!["probability-sum"]);
    }

    #[test]
    fn nan_values_do_not_panic() {
        let mut inst = fixtures::t2();
        inst.scenarios[0].demand[1] = f64::NAN;
        inst.lines[0].capacity = f64::NAN;
        inst.generators[0].cost = f64::NAN;
        let r = rules(&inst);
        assert!(r.contains(&"demand-nonnegative"));
        assert!(r.contains(&"capacity-positive"));
        assert!(r.contains(&"generator-cost-nonnegative"));
    }

    #[test]
    fn every_problem_is_reported() {
        let mut inst = fixtures::t2();
        inst.lines[1].capacity = 0.0;
        inst.lines[0].invest_cost = 3.0;
        inst.scenarios[0].gen_upper.clear();
        let r = rules(&inst);
        assert_eq!(r.len(), 3, "{r:?}");
    }
}
