//! Compilation of a [`PowerNetwork`] into the standard-form QP.
//!
//! Variables (all ≥ 0 after shifting), in order:
//!
//! ```text
//! p̃_g = p_g − P_min      θ̃ = θ + π      p̃_ij = p_ij + P̄_ij
//! s̄_g  s̲_g  s̄_θ  s̲_θ  s̄_L  s̲_L
//! ```
//!
//! Equality rows, in order: nodal balance (b), line-flow definitions (L),
//! reference angle (1), then the six slack families
//! `p_g + s̄_g = P̄_g`, `−p_g + s̲_g = −P_min`, `θ + s̄_θ = π`, `−θ + s̲_θ = π`,
//! `p_ij + s̄_L = P̄_ij`, `−p_ij + s̲_L = P̄_ij`.
//!
//! Matrices are per-unit on `base_mva`; costs are rescaled accordingly so that
//! the QP objective plus [`VariableMap::objective_constant`] is the generation
//! cost in the case's cost units.

use std::f64::consts::PI;
use std::ops::Range;

use faer::Mat;
use serde::{Deserialize, Serialize};

use super::network::PowerNetwork;
use crate::error::{dim_check, Result};
use crate::qp::QpProblem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Block {
    Generation,
    Angle,
    Flow,
    GenUpperSlack,
    GenLowerSlack,
    AngleUpperSlack,
    AngleLowerSlack,
    FlowUpperSlack,
    FlowLowerSlack,
}

impl Block {
    pub const ALL: [Block; 9] = [
        Block::Generation,
        Block::Angle,
        Block::Flow,
        Block::GenUpperSlack,
        Block::GenLowerSlack,
        Block::AngleUpperSlack,
        Block::AngleLowerSlack,
        Block::FlowUpperSlack,
        Block::FlowLowerSlack,
    ];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RowBlock {
    Balance,
    FlowDefinition,
    Reference,
    GenUpper,
    GenLower,
    AngleUpper,
    AngleLower,
    FlowUpper,
    FlowLower,
}

impl RowBlock {
    pub const ALL: [RowBlock; 9] = [
        RowBlock::Balance,
        RowBlock::FlowDefinition,
        RowBlock::Reference,
        RowBlock::GenUpper,
        RowBlock::GenLower,
        RowBlock::AngleUpper,
        RowBlock::AngleLower,
        RowBlock::FlowUpper,
        RowBlock::FlowLower,
    ];
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenCost {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

/// Index layout and affine shifts of the standard-form variables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariableMap {
    pub gens: usize,
    pub buses: usize,
    pub branches: usize,
    pub reference_bus: usize,
    pub base_mva: f64,
    /// `physical = standard-form value + offset`, per-unit / radians.
    pub offsets: Vec<f64>,
    /// Generation cost at `x = 0` that the QP objective omits.
    pub objective_constant: f64,
    pub costs: Vec<GenCost>,
}

impl VariableMap {
    pub fn n(&self) -> usize {
        3 * (self.gens + self.buses + self.branches)
    }

    pub fn m(&self) -> usize {
        self.buses + self.branches + 1 + 2 * (self.gens + self.buses + self.branches)
    }

    fn block_len(&self, block: Block) -> usize {
        match block {
            Block::Generation | Block::GenUpperSlack | Block::GenLowerSlack => self.gens,
            Block::Angle | Block::AngleUpperSlack | Block::AngleLowerSlack => self.buses,
            Block::Flow | Block::FlowUpperSlack | Block::FlowLowerSlack => self.branches,
        }
    }

    pub fn range(&self, block: Block) -> Range<usize> {
        let mut start = 0;
        for b in Block::ALL {
            let len = self.block_len(b);
            if b == block {
                return start..start + len;
            }
            start += len;
        }
        unreachable!()
    }

    pub fn block_of(&self, index: usize) -> Option<Block> {
        Block::ALL.into_iter().find(|&b| self.range(b).contains(&index))
    }

    pub fn row_range(&self, block: RowBlock) -> Range<usize> {
        let len = |b: RowBlock| match b {
            RowBlock::Balance => self.buses,
            RowBlock::FlowDefinition => self.branches,
            RowBlock::Reference => 1,
            RowBlock::GenUpper | RowBlock::GenLower => self.gens,
            RowBlock::AngleUpper | RowBlock::AngleLower => self.buses,
            RowBlock::FlowUpper | RowBlock::FlowLower => self.branches,
        };
        let mut start = 0;
        for b in RowBlock::ALL {
            if b == block {
                return start..start + len(b);
            }
            start += len(b);
        }
        unreachable!()
    }
}

/// Physical dispatch recovered from a standard-form primal vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DispatchSolution {
    pub p_g: Vec<f64>,
    pub theta: Vec<f64>,
    pub flows: Vec<f64>,
    pub objective: f64,
}

/// Builds the standard-form QP of the DC OPF.
pub fn build_dcopf_qp(net: &PowerNetwork) -> Result<QpProblem> {
    net.validate()?;
    let base = net.base_mva;
    let index = net.bus_index();
    let reference_bus = net.reference_bus().expect("validated network has a reference bus");
    let map0 = VariableMap {
        gens: net.num_generators(),
        buses: net.num_buses(),
        branches: net.num_branches(),
        reference_bus,
        base_mva: base,
        offsets: Vec::new(),
        objective_constant: 0.0,
        costs: net.generators.iter().map(|g| GenCost { c0: g.cost_c0, c1: g.cost_c1, c2: g.cost_c2 }).collect(),
    };
    let (n, m) = (map0.n(), map0.m());
    let pg = map0.range(Block::Generation).start;
    let th = map0.range(Block::Angle).start;
    let fl = map0.range(Block::Flow).start;

    // Physical-variable system G x_phys = J_phys.
    let mut g = Mat::<f64>::zeros(m, n);
    let mut j_phys = vec![0.0; m];

    let balance = map0.row_range(RowBlock::Balance).start;
    for (i, bus) in net.buses.iter().enumerate() {
        j_phys[balance + i] = bus.load_mw / base;
    }
    for (k, gen) in net.generators.iter().enumerate() {
        g[(balance + index[&gen.bus], pg + k)] += 1.0;
    }
    let flow_def = map0.row_range(RowBlock::FlowDefinition).start;
    for (l, br) in net.branches.iter().enumerate() {
        let (f, t) = (index[&br.from_bus], index[&br.to_bus]);
        g[(balance + f, fl + l)] -= 1.0;
        g[(balance + t, fl + l)] += 1.0;
        let b = 1.0 / br.reactance_pu;
        g[(flow_def + l, fl + l)] = 1.0;
        g[(flow_def + l, th + f)] -= b;
        g[(flow_def + l, th + t)] += b;
    }
    g[(map0.row_range(RowBlock::Reference).start, th + reference_bus)] = 1.0;

    let slack_rows = [
        (RowBlock::GenUpper, Block::Generation, Block::GenUpperSlack, 1.0),
        (RowBlock::GenLower, Block::Generation, Block::GenLowerSlack, -1.0),
        (RowBlock::AngleUpper, Block::Angle, Block::AngleUpperSlack, 1.0),
        (RowBlock::AngleLower, Block::Angle, Block::AngleLowerSlack, -1.0),
        (RowBlock::FlowUpper, Block::Flow, Block::FlowUpperSlack, 1.0),
        (RowBlock::FlowLower, Block::Flow, Block::FlowLowerSlack, -1.0),
    ];
    for (rows, var, slack, sign) in slack_rows {
        let (r0, v0, s0) = (map0.row_range(rows).start, map0.range(var).start, map0.range(slack).start);
        for k in 0..map0.block_len(var) {
            g[(r0 + k, v0 + k)] = sign;
            g[(r0 + k, s0 + k)] = 1.0;
            j_phys[r0 + k] = match rows {
                RowBlock::GenUpper => net.generators[k].p_max_mw / base,
                RowBlock::GenLower => -net.generators[k].p_min_mw / base,
                RowBlock::AngleUpper | RowBlock::AngleLower => PI,
                _ => net.branches[k].flow_limit_mw / base,
            };
        }
    }

    // physical = std + offset
    let mut offsets = vec![0.0; n];
    for (k, gen) in net.generators.iter().enumerate() {
        offsets[pg + k] = gen.p_min_mw / base;
    }
    for i in 0..map0.buses {
        offsets[th + i] = -PI;
    }
    for (l, br) in net.branches.iter().enumerate() {
        offsets[fl + l] = -br.flow_limit_mw / base;
    }

    // J_std = J_phys − G·offset
    let mut j = j_phys;
    for col in 0..n {
        if offsets[col] != 0.0 {
            for row in 0..m {
                j[row] -= g[(row, col)] * offsets[col];
            }
        }
    }

    // Cost in per-unit: c2·base²·p² + c1·base·p + c0, then shift p = p̃ + P_min.
    let mut c = vec![0.0; n];
    let mut q = vec![0.0; n];
    let mut constant = 0.0;
    for (k, gen) in net.generators.iter().enumerate() {
        let qk = 2.0 * gen.cost_c2 * base * base;
        let ck = gen.cost_c1 * base;
        let shift = offsets[pg + k];
        q[pg + k] = qk;
        c[pg + k] = ck + qk * shift;
        constant += 0.5 * qk * shift * shift + ck * shift + gen.cost_c0;
    }

    let map = VariableMap { offsets, objective_constant: constant, ..map0 };
    Ok(QpProblem::new(c, q, g, j)?.with_map(map))
}

/// Maps a standard-form primal vector back to MW, radians and cost.
pub fn recover_solution(qp: &QpProblem, x: &[f64]) -> Result<DispatchSolution> {
    dim_check("x length", qp.n(), x.len())?;
    let map = qp
        .map
        .as_ref()
        .ok_or_else(|| crate::Error::Domain("QP carries no variable map".into()))?;
    dim_check("variable map size", map.n(), qp.n())?;
    let phys = |i: usize| x[i] + map.offsets[i];
    let base = map.base_mva;
    let p_g: Vec<f64> = map.range(Block::Generation).map(|i| phys(i) * base).collect();
    let theta: Vec<f64> = map.range(Block::Angle).map(phys).collect();
    let flows: Vec<f64> = map.range(Block::Flow).map(|i| phys(i) * base).collect();
    let objective = p_g.iter().zip(&map.costs).map(|(p, c)| c.c2 * p * p + c.c1 * p + c.c0).sum();
    Ok(DispatchSolution { p_g, theta, flows, objective })
}

/// Inverse of [`recover_solution`]: encodes a physical dispatch (MW, radians),
/// filling every slack from its defining row.
pub fn encode_dispatch(qp: &QpProblem, p_g: &[f64], theta: &[f64], flows: &[f64]) -> Result<Vec<f64>> {
    let map = qp
        .map
        .as_ref()
        .ok_or_else(|| crate::Error::Domain("QP carries no variable map".into()))?;
    dim_check("generator count", map.gens, p_g.len())?;
    dim_check("bus count", map.buses, theta.len())?;
    dim_check("branch count", map.branches, flows.len())?;
    let base = map.base_mva;
    let mut x = vec![0.0; qp.n()];
    let blocks = [
        (Block::Generation, p_g.iter().map(|p| p / base).collect::<Vec<_>>()),
        (Block::Angle, theta.to_vec()),
        (Block::Flow, flows.iter().map(|f| f / base).collect()),
    ];
    for (block, values) in &blocks {
        for (i, v) in map.range(*block).zip(values) {
            x[i] = v - map.offsets[i];
        }
    }
    // Each slack row is `±var + slack = J`; solve for the slack.
    let pairs = [
        (RowBlock::GenUpper, Block::Generation, Block::GenUpperSlack),
        (RowBlock::GenLower, Block::Generation, Block::GenLowerSlack),
        (RowBlock::AngleUpper, Block::Angle, Block::AngleUpperSlack),
        (RowBlock::AngleLower, Block::Angle, Block::AngleLowerSlack),
        (RowBlock::FlowUpper, Block::Flow, Block::FlowUpperSlack),
        (RowBlock::FlowLower, Block::Flow, Block::FlowLowerSlack),
    ];
    for (rows, var, slack) in pairs {
        for ((r, v), s) in map.row_range(rows).zip(map.range(var)).zip(map.range(slack)) {
            x[s] = qp.j[r] - qp.g[(r, v)] * x[v];
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::network::fixtures::two_bus;
    use crate::grid::scale_loads;
    use crate::qp::{inf_norm, objective, primal_residual};

    #[test]
    fn two_bus_dimensions() {
        let qp = build_dcopf_qp(&two_bus()).unwrap();
        assert_eq!((qp.n(), qp.m()), (12, 12));
        let map = qp.map.as_ref().unwrap();
        assert_eq!((map.n(), map.m()), (12, 12));
    }

    #[test]
    fn blocks_partition_indices() {
        let qp = build_dcopf_qp(&two_bus()).unwrap();
        let map = qp.map.as_ref().unwrap();
        let mut owner = vec![0; map.n()];
        for b in Block::ALL {
            for i in map.range(b) {
                owner[i] += 1;
            }
        }
        assert!(owner.iter().all(|&c| c == 1));
        assert_eq!(map.block_of(0), Some(Block::Generation));
        assert_eq!(map.block_of(map.n()), None);
    }

    #[test]
    fn q_holds_quadratic_costs() {
        let net = two_bus();
        let qp = build_dcopf_qp(&net).unwrap();
        let map = qp.map.as_ref().unwrap();
        let nonzero: Vec<usize> = (0..qp.n()).filter(|&i| qp.q[i] != 0.0).collect();
        assert_eq!(nonzero, map.range(Block::Generation).collect::<Vec<_>>());
        let base = net.base_mva;
        assert_eq!(qp.q[0], 2.0 * net.generators[0].cost_c2 * base * base);
    }

    #[test]
    fn reference_angle_recovers_to_zero() {
        let qp = build_dcopf_qp(&two_bus()).unwrap();
        let map = qp.map.as_ref().unwrap();
        let mut x = vec![0.0; qp.n()];
        x[map.range(Block::Angle).start + map.reference_bus] = PI;
        let sol = recover_solution(&qp, &x).unwrap();
        assert_eq!(sol.theta[map.reference_bus], 0.0);
        assert!(matches!(recover_solution(&qp, &x[1..]), Err(crate::Error::Dimension(_))));
    }

    #[test]
    fn feasible_dispatch_round_trip() {
        let net = two_bus();
        let qp = build_dcopf_qp(&net).unwrap();
        // 100 MW across x = 0.1 pu: θ₂ = −0.1 rad.
        let (p_g, theta, flows) = (vec![100.0], vec![0.0, -0.1], vec![100.0]);
        let x = encode_dispatch(&qp, &p_g, &theta, &flows).unwrap();
        assert!(inf_norm(&primal_residual(&qp, &x)) < 1e-12);
        assert!(x.iter().all(|&v| v > 0.0));
        let sol = recover_solution(&qp, &x).unwrap();
        for (a, b) in sol.p_g.iter().zip(&p_g).chain(sol.theta.iter().zip(&theta)).chain(sol.flows.iter().zip(&flows)) {
            assert!((a - b).abs() <= 1e-12);
        }
        let cost = net.generators[0].cost(100.0);
        assert!((sol.objective - cost).abs() < 1e-9);
        let map = qp.map.as_ref().unwrap();
        let via_qp = objective(&qp, &x).unwrap() + map.objective_constant;
        assert!((via_qp - cost).abs() < 1e-9);
    }

    #[test]
    fn load_scaling_touches_only_balance_rows() {
        let net = two_bus();
        let a = build_dcopf_qp(&net).unwrap();
        let b = build_dcopf_qp(&scale_loads(&net, 1.2).unwrap()).unwrap();
        assert_eq!(a.g, b.g);
        let balance = a.map.as_ref().unwrap().row_range(RowBlock::Balance);
        for r in 0..a.m() {
            if balance.contains(&r) {
                let load = net.buses[r].load_mw / net.base_mva;
                assert!((b.j[r] - a.j[r] - 0.2 * load).abs() < 1e-12);
            } else {
                assert_eq!(a.j[r], b.j[r]);
            }
        }
    }
}
