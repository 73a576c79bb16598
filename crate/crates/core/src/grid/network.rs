use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    pub id: usize,
    pub load_mw: f64,
    pub is_reference: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub from_bus: usize,
    pub to_bus: usize,
    pub reactance_pu: f64,
    pub flow_limit_mw: f64,
}

/// A dispatchable unit with polynomial cost `c2·P² + c1·P + c0` (P in MW).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub bus: usize,
    pub p_min_mw: f64,
    pub p_max_mw: f64,
    pub cost_c0: f64,
    pub cost_c1: f64,
    pub cost_c2: f64,
}

impl Generator {
    pub fn cost(&self, p_mw: f64) -> f64 {
        self.cost_c2 * p_mw * p_mw + self.cost_c1 * p_mw + self.cost_c0
    }
}

/// Physical grid description in MW and per-unit reactances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerNetwork {
    pub base_mva: f64,
    pub buses: Vec<Bus>,
    pub branches: Vec<Branch>,
    pub generators: Vec<Generator>,
}

impl PowerNetwork {
    /// Builds a network and checks its invariants.
    pub fn new(
        base_mva: f64,
        buses: Vec<Bus>,
        branches: Vec<Branch>,
        generators: Vec<Generator>,
    ) -> Result<Self> {
        let net = PowerNetwork { base_mva, buses, branches, generators };
        net.validate()?;
        Ok(net)
    }

    pub fn num_buses(&self) -> usize {
        self.buses.len()
    }

    pub fn num_branches(&self) -> usize {
        self.branches.len()
    }

    pub fn num_generators(&self) -> usize {
        self.generators.len()
    }

    /// Position of each bus id in `buses`.
    pub fn bus_index(&self) -> HashMap<usize, usize> {
        self.buses.iter().enumerate().map(|(i, b)| (b.id, i)).collect()
    }

    pub fn reference_bus(&self) -> Option<usize> {
        self.buses.iter().position(|b| b.is_reference)
    }

    pub fn total_load_mw(&self) -> f64 {
        self.buses.iter().map(|b| b.load_mw).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.base_mva.is_finite() && self.base_mva > 0.0) {
            return Err(Error::Validation(format!("base MVA must be positive, got {}", self.base_mva)));
        }
        if self.buses.is_empty() {
            return Err(Error::Validation("network has no buses".into()));
        }
        if self.generators.is_empty() {
            return Err(Error::Validation("network has no generators".into()));
        }
        let index = self.bus_index();
        if index.len() != self.buses.len() {
            return Err(Error::Validation("duplicate bus ids".into()));
        }
        match self.buses.iter().filter(|b| b.is_reference).count() {
            1 => {}
            0 => return Err(Error::Validation("no reference bus".into())),
            k => return Err(Error::Validation(format!("{k} reference buses, expected exactly one"))),
        }
        for (k, br) in self.branches.iter().enumerate() {
            for bus in [br.from_bus, br.to_bus] {
                if !index.contains_key(&bus) {
                    return Err(Error::Validation(format!("branch {k} names unknown bus {bus}")));
                }
            }
            if br.from_bus == br.to_bus {
                return Err(Error::Validation(format!("branch {k} is a self-loop at bus {}", br.from_bus)));
            }
            if !(br.reactance_pu.is_finite() && br.reactance_pu > 0.0) {
                return Err(Error::Validation(format!(
                    "branch {k} ({}-{}) has non-positive reactance {}",
                    br.from_bus, br.to_bus, br.reactance_pu
                )));
            }
            if !(br.flow_limit_mw.is_finite() && br.flow_limit_mw > 0.0) {
                return Err(Error::Validation(format!("branch {k} has non-positive flow limit {}", br.flow_limit_mw)));
            }
        }
        for (k, gen) in self.generators.iter().enumerate() {
            if !index.contains_key(&gen.bus) {
                return Err(Error::Validation(format!("generator {k} sits on unknown bus {}", gen.bus)));
            }
            if !(gen.p_min_mw <= gen.p_max_mw) {
                return Err(Error::Validation(format!(
                    "generator {k} has p_min {} > p_max {}",
                    gen.p_min_mw, gen.p_max_mw
                )));
            }
            if gen.cost_c2 < 0.0 {
                return Err(Error::Validation(format!("generator {k} has a concave cost (c2 = {})", gen.cost_c2)));
            }
        }
        if !self.is_connected(&index) {
            return Err(Error::Validation("network graph is disconnected".into()));
        }
        Ok(())
    }

    fn is_connected(&self, index: &HashMap<usize, usize>) -> bool {
        let n = self.buses.len();
        let mut adj = vec![Vec::new(); n];
        for br in &self.branches {
            let (f, t) = (index[&br.from_bus], index[&br.to_bus]);
            adj[f].push(t);
            adj[t].push(f);
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == n
    }
}

/// Multiplies every bus load by `factor`.
pub fn scale_loads(net: &PowerNetwork, factor: f64) -> Result<PowerNetwork> {
    if !(factor.is_finite() && factor > 0.0) {
        return Err(Error::Domain(format!("load scale must be positive, got {factor}")));
    }
    let mut out = net.clone();
    for bus in &mut out.buses {
        bus.load_mw *= factor;
    }
    Ok(out)
}
