use super::{validate, Bus, GenId, Generator, Instance, Line, LineId, LineKind, RenewableKind, Scenario};
use crate::error::{Error, Result};

/// Incremental construction of an [`Instance`]. Ids are assigned densely in
/// insertion order; lines share one id space. `build` validates.
#[derive(Debug, Clone)]
pub struct InstanceBuilder {
    inst: Instance,
}

impl InstanceBuilder {
    pub fn new(name: &str, num_buses: usize) -> Self {
        let buses = (0..num_buses).map(|id| Bus { id, name: format!("b{id}") }).collect();
        InstanceBuilder {
            inst: Instance {
                name: name.to_string(),
                buses,
                generators: Vec::new(),
                lines: Vec::new(),
                scenarios: Vec::new(),
            },
        }
    }

    pub fn generator(&mut self, bus: usize, cost: f64) -> GenId {
        self.generator_kind(bus, cost, RenewableKind::None)
    }

    pub fn generator_kind(&mut self, bus: usize, cost: f64, renewable: RenewableKind) -> GenId {
        let id = self.inst.generators.len();
        self.inst.generators.push(Generator { id, bus, cost, renewable });
        id
    }

    pub fn existing(&mut self, from: usize, to: usize, susceptance: f64, capacity: f64) -> LineId {
        self.line(from, to, susceptance, capacity, LineKind::Existing, 0.0, None)
    }

    pub fn candidate(
        &mut self,
        from: usize,
        to: usize,
        susceptance: f64,
        capacity: f64,
        invest_cost: f64,
        twin: Option<LineId>,
    ) -> LineId {
        self.line(from, to, susceptance, capacity, LineKind::Candidate, invest_cost, twin)
    }

    /// Adds two candidates duplicating existing line `twin`.
    pub fn twin_candidates(&mut self, twin: LineId, invest_cost: f64) -> [LineId; 2] {
        let l = self.inst.lines.iter().find(|l| l.id == twin).expect("twin line exists").clone();
        let a = self.candidate(l.from_bus, l.to_bus, l.susceptance, l.capacity, invest_cost, Some(twin));
        let b = self.candidate(l.from_bus, l.to_bus, l.susceptance, l.capacity, invest_cost, Some(twin));
        [a, b]
    }

    #[allow(clippy::too_many_arguments)]
    fn line(
        &mut self,
        from: usize,
        to: usize,
        susceptance: f64,
        capacity: f64,
        kind: LineKind,
        invest_cost: f64,
        twin_existing: Option<LineId>,
    ) -> LineId {
        let id = self.inst.lines.len();
        let pair = (from.min(to), from.max(to));
        let parallel_index = self
            .inst
            .lines
            .iter()
            .filter(|l| l.kind == kind && (l.from_bus.min(l.to_bus), l.from_bus.max(l.to_bus)) == pair)
            .count();
        self.inst.lines.push(Line {
            id,
            from_bus: from,
            to_bus: to,
            parallel_index,
            susceptance,
            capacity,
            kind,
            invest_cost,
            twin_existing,
        });
        id
    }

    pub fn scenario(&mut self, probability: f64, demand: Vec<f64>, gen_lower: Vec<f64>, gen_upper: Vec<f64>) -> usize {
        let id = self.inst.scenarios.len();
        self.inst.scenarios.push(Scenario { id, probability, demand, gen_lower, gen_upper });
        id
    }

    /// The instance built so far.
    pub fn build_ref(&self) -> &Instance {
        &self.inst
    }

    /// The instance without validation.
    pub fn build_unchecked(self) -> Instance {
        self.inst
    }

    pub fn build(self) -> Result<Instance> {
        let diags = validate(&self.inst);
        if diags.is_empty() {
            Ok(self.inst)
        } else {
            Err(Error::Validation(diags))
        }
    }
}
