//! Benchmark construction from a base grid case: candidate duplication,
//! scaling, renewable designation and multi-scenario synthesis.

mod case;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

pub use case::{parse_case, BaseBranch, BaseBus, BaseCase, BaseGenerator};

use crate::error::{Error, Result};
use crate::instance::{validate, Instance, InstanceBuilder, RenewableKind};

/// Investment cost per unit reactance of a candidate line.
pub const COST_PER_REACTANCE: f64 = 1e4 / 3.0;

/// One scenario's renewable and demand levels, all relative to total
/// generation capacity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioProfile {
    pub solar_ratio: f64,
    pub wind_ratio: f64,
    pub demand_ratio: f64,
}

/// Contents of a profile file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSet {
    #[serde(default)]
    pub label: String,
    #[serde(flatten)]
    pub renewables: RenewableOptions,
    pub profiles: Vec<ScenarioProfile>,
}

/// Renewable fleet of the base case.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RenewableOptions {
    /// Target share of base capacity designated solar.
    #[serde(default)]
    pub solar_share: f64,
    #[serde(default)]
    pub wind_share: f64,
    /// Typical unit size; defaults to the mean capacity of the base fleet.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solar_avg_cap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wind_avg_cap: Option<f64>,
}

/// Designates generators one at a time, each time the remaining one whose
/// capacity is closest to `avg_cap` (ties to the lowest index), until their
/// capacity reaches `target_share` of the base fleet. Generators out of
/// service, with no capacity, or listed in `exclude` are skipped.
pub fn designate_renewables(
    base: &BaseCase,
    target_share: f64,
    avg_cap: f64,
    exclude: &BTreeSet<usize>,
) -> Result<BTreeSet<usize>> {
    if !(0.0..=1.0).contains(&target_share) {
        return Err(Error::InvalidArgument(format!("renewable share must lie in [0, 1], got {target_share}")));
    }
    let total = base.total_capacity();
    let mut pool: Vec<(usize, f64)> = base
        .active_generators()
        .filter(|(g, gen)| gen.pmax > 0.0 && !exclude.contains(g))
        .map(|(g, gen)| (g, gen.pmax))
        .collect();
    let mut chosen = BTreeSet::new();
    let mut designated = 0.0;
    while designated < target_share * total {
        let Some(pos) = (0..pool.len()).min_by(|&a, &b| {
            let (da, db) = ((pool[a].1 - avg_cap).abs(), (pool[b].1 - avg_cap).abs());
            da.total_cmp(&db).then(pool[a].0.cmp(&pool[b].0))
        }) else {
            return Err(Error::InvalidArgument(format!(
                "renewable share {target_share} unreachable: only {:.6} of capacity available",
                designated / total
            )));
        };
        let (g, cap) = pool.swap_remove(pos);
        chosen.insert(g);
        designated += cap;
    }
    Ok(chosen)
}

enum Source {
    Base(usize),
    /// Negative demand modelled as fixed injection (MW at base scale).
    Injection(f64),
}

/// Generators of the instance in order, with their origin.
fn generators(base: &BaseCase, b: &mut InstanceBuilder, kind: impl Fn(usize) -> RenewableKind) -> Vec<Source> {
    let mut out = Vec::new();
    for (g, gen) in base.active_generators() {
        b.generator_kind(gen.bus, gen.cost, kind(g));
        out.push(Source::Base(g));
    }
    for (i, bus) in base.buses.iter().enumerate() {
        if bus.demand < 0.0 {
            b.generator(i, 0.0);
            out.push(Source::Injection(-bus.demand));
        }
    }
    out
}

/// Adds existing lines and their two twin candidates. Unlimited ratings
/// become `unlimited`.
fn lines(base: &BaseCase, b: &mut InstanceBuilder, unlimited: f64) -> Result<()> {
    let kept: Vec<&BaseBranch> = base.branches.iter().filter(|br| br.in_service && br.reactance != 0.0).collect();
    if kept.is_empty() {
        return Err(Error::InvalidArgument("no branch with nonzero reactance remains".into()));
    }
    let existing: Vec<usize> = kept
        .iter()
        .map(|br| {
            let cap = if br.rating > 0.0 { br.rating } else { unlimited };
            b.existing(br.from, br.to, 1.0 / br.reactance, cap)
        })
        .collect();
    for (br, id) in kept.iter().zip(existing) {
        b.twin_candidates(id, COST_PER_REACTANCE * br.reactance.abs());
    }
    Ok(())
}

fn builder(base: &BaseCase) -> InstanceBuilder {
    InstanceBuilder::new(&base.name, base.buses.len())
}

fn finish(base: &BaseCase, b: InstanceBuilder) -> Result<Instance> {
    let mut inst = b.build_unchecked();
    for (bus, src) in inst.buses.iter_mut().zip(&base.buses) {
        bus.name = format!("b{}", src.number);
    }
    let diags = validate(&inst);
    if diags.is_empty() {
        Ok(inst)
    } else {
        Err(Error::Validation(diags))
    }
}

/// A rating that no DC flow can reach: flows run from high to low angle,
/// so no line carries more than the total injection.
fn unlimited_rating(uppers: &[Vec<f64>]) -> f64 {
    uppers.iter().map(|u| u.iter().sum::<f64>()).fold(1.0, f64::max).ceil()
}

/// Single-scenario instance: zero-reactance branches dropped, two
/// candidates per remaining branch, demand and generation bounds doubled.
pub fn adapt_deterministic(base: &BaseCase) -> Result<Instance> {
    let mut b = builder(base);
    let sources = generators(base, &mut b, |_| RenewableKind::None);
    let (mut lower, mut upper) = (Vec::new(), Vec::new());
    for s in &sources {
        match *s {
            Source::Base(g) => {
                lower.push(2.0 * base.generators[g].pmin);
                upper.push(2.0 * base.generators[g].pmax);
            }
            Source::Injection(mw) => {
                lower.push(2.0 * mw);
                upper.push(2.0 * mw);
            }
        }
    }
    lines(base, &mut b, unlimited_rating(std::slice::from_ref(&upper)))?;
    let demand = base.buses.iter().map(|bus| 2.0 * bus.demand.max(0.0)).collect();
    b.scenario(1.0, demand, lower, upper);
    finish(base, b)
}

/// 1-based index into the demand-sorted scenarios that anchors the
/// rescaling: `round(0.8·n)` clamped to `[1, n]`.
pub fn percentile_index(n: usize) -> usize {
    ((0.8 * n as f64).round() as usize).clamp(1, n.max(1))
}

/// Multi-scenario instance. Each profile scales the designated solar and
/// wind units to its renewable ratios and sets total demand to its ratio of
/// total capacity. All scenarios are then rescaled together so that the
/// scenario at [`percentile_index`] has twice the base demand. Lower
/// generation bounds are zero and scenarios equiprobable.
pub fn build_stochastic(base: &BaseCase, profiles: &[ScenarioProfile], opts: &RenewableOptions) -> Result<Instance> {
    if profiles.is_empty() {
        return Err(Error::InvalidArgument("at least one scenario profile is required".into()));
    }
    for p in profiles {
        if p.solar_ratio < 0.0 || p.wind_ratio < 0.0 || p.demand_ratio < 0.0 {
            return Err(Error::InvalidArgument(format!("negative ratio in profile {p:?}")));
        }
    }
    let total_cap = base.total_capacity();
    let total_demand = base.total_demand();
    if total_cap <= 0.0 || total_demand <= 0.0 {
        return Err(Error::InvalidArgument("base case needs positive demand and generation capacity".into()));
    }
    let mean_cap = {
        let caps: Vec<f64> = base.active_generators().map(|(_, g)| g.pmax).filter(|&c| c > 0.0).collect();
        caps.iter().sum::<f64>() / caps.len().max(1) as f64
    };
    let solar = designate_renewables(base, opts.solar_share, opts.solar_avg_cap.unwrap_or(mean_cap), &BTreeSet::new())?;
    let wind = designate_renewables(base, opts.wind_share, opts.wind_avg_cap.unwrap_or(mean_cap), &solar)?;
    let share = |set: &BTreeSet<usize>| set.iter().map(|&g| base.generators[g].pmax).sum::<f64>() / total_cap;
    let (solar_share, wind_share) = (share(&solar), share(&wind));

    let mut b = builder(base);
    let kind = |g: usize| {
        if solar.contains(&g) {
            RenewableKind::Solar
        } else if wind.contains(&g) {
            RenewableKind::Wind
        } else {
            RenewableKind::None
        }
    };
    let sources = generators(base, &mut b, kind);

    let mut demands = Vec::with_capacity(profiles.len());
    let mut uppers = Vec::with_capacity(profiles.len());
    for p in profiles {
        let factor = |g: usize| match kind(g) {
            RenewableKind::Solar => p.solar_ratio / solar_share,
            RenewableKind::Wind => p.wind_ratio / wind_share,
            RenewableKind::None => 1.0,
        };
        let gen_upper: Vec<f64> = sources
            .iter()
            .map(|s| match *s {
                Source::Base(g) => base.generators[g].pmax * factor(g),
                Source::Injection(mw) => mw,
            })
            .collect();
        let scale = p.demand_ratio * gen_upper.iter().sum::<f64>() / total_demand;
        demands.push(base.buses.iter().map(|bus| scale * bus.demand.max(0.0)).collect::<Vec<f64>>());
        uppers.push(gen_upper);
    }

    let mut order: Vec<usize> = (0..profiles.len()).collect();
    let totals: Vec<f64> = demands.iter().map(|d| d.iter().sum()).collect();
    order.sort_by(|&a, &b| totals[a].total_cmp(&totals[b]).then(a.cmp(&b)));
    let anchor = order[percentile_index(profiles.len()) - 1];
    if totals[anchor] <= 0.0 {
        return Err(Error::InvalidArgument("the anchoring scenario has no demand".into()));
    }
    let phi = 2.0 * total_demand / totals[anchor];
    for (d, u) in demands.iter_mut().zip(uppers.iter_mut()) {
        d.iter_mut().for_each(|x| *x *= phi);
        u.iter_mut().for_each(|x| *x *= phi);
    }

    lines(base, &mut b, unlimited_rating(&uppers))?;
    let p = 1.0 / profiles.len() as f64;
    for (d, u) in demands.into_iter().zip(uppers) {
        let lower = vec![0.0; u.len()];
        b.scenario(p, d, lower, u);
    }
    finish(base, b)
}

/// A day-shaped profile sequence over `hours` hourly steps: solar follows
/// daylight, wind a slow swing, demand a morning and evening peak. Purely
/// synthetic.
pub fn synthetic_profiles(hours: usize) -> Vec<ScenarioProfile> {
    use std::f64::consts::PI;
    (0..hours)
        .map(|t| {
            let h = (t % 24) as f64;
            let day = (t / 24) as f64;
            let daylight = ((h - 6.0) * PI / 12.0).sin().max(0.0);
            let solar = 0.12 * daylight * (1.0 - 0.15 * (day % 3.0) / 2.0);
            let wind = 0.10 + 0.05 * ((h + 3.0 + 5.0 * day) * 2.0 * PI / 24.0).cos();
            let peaks = 0.6 * (-(h - 9.0).powi(2) / 8.0).exp() + (-(h - 19.0).powi(2) / 6.0).exp();
            let demand = 0.40 + 0.18 * peaks + 0.02 * (day % 2.0);
            let r = |x: f64| (x * 1e6).round() / 1e6;
            ScenarioProfile { solar_ratio: r(solar), wind_ratio: r(wind), demand_ratio: r(demand) }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fleet(caps: &[f64]) -> BaseCase {
        BaseCase {
            name: "fleet".into(),
            buses: vec![BaseBus { number: 1, demand: 10.0 }],
            branches: vec![],
            generators: caps
                .iter()
                .map(|&pmax| BaseGenerator { bus: 0, pmin: 0.0, pmax, cost: 1.0, in_service: true })
                .collect(),
            warnings: vec![],
        }
    }

    #[test]
    fn designation_follows_closest_capacity() {
        let base = fleet(&[100.0, 50.0, 10.0]);
        let none = BTreeSet::new();
        assert!(designate_renewables(&base, 0.0, 45.0, &none).unwrap().is_empty());
        assert_eq!(designate_renewables(&base, 0.3, 45.0, &none).unwrap(), BTreeSet::from([1]));
        assert_eq!(designate_renewables(&base, 1.0, 45.0, &none).unwrap(), BTreeSet::from([0, 1, 2]));
        let err = designate_renewables(&base, 0.9, 45.0, &BTreeSet::from([0])).unwrap_err();
        assert!(err.to_string().contains("unreachable"));
    }

    #[test]
    fn percentile_index_is_one_based() {
        assert_eq!(percentile_index(10), 8);
        assert_eq!(percentile_index(1), 1);
        assert_eq!(percentile_index(96), 77);
        assert_eq!(percentile_index(3), 2);
    }

    #[test]
    fn synthetic_profiles_are_valid() {
        let p = synthetic_profiles(96);
        assert_eq!(p.len(), 96);
        assert!(p.iter().all(|x| x.solar_ratio >= 0.0 && x.wind_ratio > 0.0 && x.demand_ratio < 1.0));
        assert_eq!(p[0].solar_ratio, 0.0);
        assert!(p[12].solar_ratio > 0.1);
    }
}
