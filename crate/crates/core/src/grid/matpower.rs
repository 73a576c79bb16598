//! Reader for the subset of the MATPOWER case format used by DC OPF.
//!
//! Recognised statements are `baseMVA = <scalar>;` and the `bus`, `gen`,
//! `branch` and `gencost` matrices, with or without the `mpc.` prefix. All
//! other statements (`function ...`, `mpc.version`, extra matrices) are
//! skipped. Only these columns are read (1-based, as in MATPOWER):
//!
//! | matrix  | columns                                          |
//! |---------|--------------------------------------------------|
//! | bus     | BUS_I=1, BUS_TYPE=2 (3 = reference), PD=3        |
//! | gen     | GEN_BUS=1, PMAX=9, PMIN=10                       |
//! | branch  | F_BUS=1, T_BUS=2, BR_X=4, RATE_A=6               |
//! | gencost | MODEL=1 (must be 2), NCOST=4 (≤ 3), coefficients |
//!
//! `RATE_A = 0` means "unlimited" in MATPOWER. Such branches receive the total
//! generation capacity as their limit, which no DC flow can exceed.

use std::collections::HashMap;
use std::path::Path;

use super::network::{Branch, Bus, Generator, PowerNetwork};
use crate::error::{Error, Result};

const BUS_I: usize = 0;
const BUS_TYPE: usize = 1;
const PD: usize = 2;
const GEN_BUS: usize = 0;
const PMAX: usize = 8;
const PMIN: usize = 9;
const F_BUS: usize = 0;
const T_BUS: usize = 1;
const BR_X: usize = 3;
const RATE_A: usize = 5;
const MODEL: usize = 0;
const NCOST: usize = 3;
const COST: usize = 4;

const REF_BUS_TYPE: f64 = 3.0;
const POLYNOMIAL_MODEL: f64 = 2.0;

struct Matrix {
    rows: Vec<Vec<f64>>,
    lines: Vec<usize>,
}

impl Matrix {
    fn require(&self, name: &str, cols: usize) -> Result<()> {
        for (row, &line) in self.rows.iter().zip(&self.lines) {
            if row.len() < cols {
                return Err(Error::Parse {
                    line,
                    msg: format!("{name} row has {} columns, need at least {cols}", row.len()),
                });
            }
        }
        Ok(())
    }
}

/// Parses MATPOWER case text into a validated network.
pub fn parse_case(text: &str) -> Result<PowerNetwork> {
    let mut base_mva = None;
    let mut matrices: HashMap<String, Matrix> = HashMap::new();

    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, strip_comment(l)));
    while let Some((line_no, line)) = lines.next() {
        let Some((lhs, rhs)) = line.split_once('=') else { continue };
        let name = lhs.trim().trim_start_matches("mpc.").trim();
        let rhs = rhs.trim();
        match name {
            "baseMVA" => {
                let value = rhs.trim_end_matches(';').trim();
                base_mva = Some(parse_number(value, line_no)?);
            }
            "bus" | "gen" | "branch" | "gencost" => {
                let Some(body) = rhs.strip_prefix('[') else {
                    return Err(Error::Parse { line: line_no, msg: format!("expected '[' after {name} =") });
                };
                let mut rows = Vec::new();
                let mut row_lines = Vec::new();
                let mut pending = body.to_string();
                let mut pending_line = line_no;
                loop {
                    let (chunk, closed) = match pending.find(']') {
                        Some(pos) => (pending[..pos].to_string(), true),
                        None => (pending.clone(), false),
                    };
                    for row in chunk.split(';') {
                        let values = parse_row(row, pending_line)?;
                        if !values.is_empty() {
                            rows.push(values);
                            row_lines.push(pending_line);
                        }
                    }
                    if closed {
                        break;
                    }
                    match lines.next() {
                        Some((n, l)) => {
                            pending = l;
                            pending_line = n;
                        }
                        None => {
                            return Err(Error::Parse {
                                line: pending_line,
                                msg: format!("unterminated {name} matrix"),
                            })
                        }
                    }
                }
                matrices.insert(name.to_string(), Matrix { rows, lines: row_lines });
            }
            _ => {}
        }
    }

    let base_mva = base_mva.ok_or(Error::Parse { line: 0, msg: "missing baseMVA".into() })?;
    let take = |name: &str| -> Result<&Matrix> {
        let m = matrices
            .get(name)
            .ok_or_else(|| Error::Parse { line: 0, msg: format!("missing {name} matrix") })?;
        if m.rows.is_empty() {
            return Err(Error::Parse { line: 0, msg: format!("{name} matrix is empty") });
        }
        Ok(m)
    };
    let bus = take("bus")?;
    let gen = take("gen")?;
    let branch = take("branch")?;
    let gencost = take("gencost")?;
    bus.require("bus", PD + 1)?;
    gen.require("gen", PMIN + 1)?;
    branch.require("branch", RATE_A + 1)?;
    gencost.require("gencost", NCOST + 1)?;

    if gencost.rows.len() != gen.rows.len() {
        return Err(Error::Parse {
            line: gencost.lines[0],
            msg: format!("{} gencost rows for {} generators", gencost.rows.len(), gen.rows.len()),
        });
    }

    let buses = bus
        .rows
        .iter()
        .zip(&bus.lines)
        .map(|(r, &line)| {
            Ok(Bus { id: to_id(r[BUS_I], line)?, load_mw: r[PD], is_reference: r[BUS_TYPE] == REF_BUS_TYPE })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut generators = Vec::with_capacity(gen.rows.len());
    for ((g, c), &line) in gen.rows.iter().zip(&gencost.rows).zip(&gencost.lines) {
        if c[MODEL] != POLYNOMIAL_MODEL {
            return Err(Error::Parse { line, msg: format!("cost model {} is not polynomial (2)", c[MODEL]) });
        }
        let ncost = c[NCOST];
        if !(ncost.fract() == 0.0 && (1.0..=3.0).contains(&ncost)) {
            return Err(Error::Parse { line, msg: format!("NCOST = {ncost} unsupported (must be 1..=3)") });
        }
        let ncost = ncost as usize;
        if c.len() < COST + ncost {
            return Err(Error::Parse { line, msg: format!("gencost row declares {ncost} coefficients") });
        }
        // Coefficients are stored highest degree first.
        let mut coeffs = [0.0; 3];
        for (k, &v) in c[COST..COST + ncost].iter().enumerate() {
            coeffs[ncost - 1 - k] = v;
        }
        generators.push(Generator {
            bus: to_id(g[GEN_BUS], line)?,
            p_min_mw: g[PMIN],
            p_max_mw: g[PMAX],
            cost_c0: coeffs[0],
            cost_c1: coeffs[1],
            cost_c2: coeffs[2],
        });
    }

    let capacity: f64 = generators.iter().map(|g| g.p_max_mw.abs().max(g.p_min_mw.abs())).sum();
    let branches = branch
        .rows
        .iter()
        .zip(&branch.lines)
        .map(|(r, &line)| {
            let limit = if r[RATE_A] == 0.0 { capacity } else { r[RATE_A] };
            Ok(Branch {
                from_bus: to_id(r[F_BUS], line)?,
                to_bus: to_id(r[T_BUS], line)?,
                reactance_pu: r[BR_X],
                flow_limit_mw: limit,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    PowerNetwork::new(base_mva, buses, branches, generators)
}

/// Reads and parses a case file.
pub fn load_case(path: impl AsRef<Path>) -> Result<PowerNetwork> {
    let text = std::fs::read_to_string(path)?;
    parse_case(&text)
}

fn strip_comment(line: &str) -> String {
    match line.find('%') {
        Some(pos) => line[..pos].to_string(),
        None => line.to_string(),
    }
}

fn parse_row(row: &str, line: usize) -> Result<Vec<f64>> {
    row.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| parse_number(t, line))
        .collect()
}

fn parse_number(token: &str, line: usize) -> Result<f64> {
    match token {
        "Inf" | "inf" => Ok(f64::INFINITY),
        "-Inf" | "-inf" => Ok(f64::NEG_INFINITY),
        _ => token
            .parse::<f64>()
            .map_err(|_| Error::Parse { line, msg: format!("malformed number {token:?}") }),
    }
}

fn to_id(value: f64, line: usize) -> Result<usize> {
    if value.fract() == 0.0 && value >= 0.0 && value.is_finite() {
        Ok(value as usize)
    } else {
        Err(Error::Parse { line, msg: format!("bus number {value} is not a non-negative integer") })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_BUS: &str = "
function mpc = two_bus
mpc.version = '2';
mpc.baseMVA = 100;
% bus_i type Pd
mpc.bus = [
    1   3   0   0;
    2   1   100 0;   % load bus
];
mpc.gen = [
    1   0   0   0   0   1   100 1   200 0;
];
mpc.branch = [
    1   2   0   0.1 0   150;
];
mpc.gencost = [
    2   0   0   3   0.01    20  0;
];
";

    #[test]
    fn two_bus_counts_and_values() {
        let net = parse_case(TWO_BUS).unwrap();
        assert_eq!((net.num_generators(), net.num_buses(), net.num_branches()), (1, 2, 1));
        assert_eq!(net.base_mva, 100.0);
        assert_eq!(net.buses[1].load_mw, 100.0);
        assert!(net.buses[0].is_reference);
        assert_eq!(net.branches[0].reactance_pu, 0.1);
        assert_eq!(net.branches[0].flow_limit_mw, 150.0);
        let g = &net.generators[0];
        assert_eq!((g.p_min_mw, g.p_max_mw), (0.0, 200.0));
        assert_eq!((g.cost_c2, g.cost_c1, g.cost_c0), (0.01, 20.0, 0.0));
    }

    #[test]
    fn empty_bus_matrix_is_parse_error() {
        let text = TWO_BUS.replace("    1   3   0   0;\n    2   1   100 0;   % load bus\n", "");
        assert!(matches!(parse_case(&text), Err(Error::Parse { .. })));
    }

    #[test]
    fn malformed_row_is_parse_error() {
        let text = TWO_BUS.replace("2   1   100 0;", "2   1   1x0 0;");
        assert!(matches!(parse_case(&text), Err(Error::Parse { .. })));
    }

    #[test]
    fn validation_errors_surface() {
        let text = TWO_BUS.replace("1   3   0   0;", "1   1   0   0;");
        assert!(matches!(parse_case(&text), Err(Error::Validation(_))));
        let text = TWO_BUS.replace("1   2   0   0.1 0   150;", "1   2   0   -0.1 0   150;");
        assert!(matches!(parse_case(&text), Err(Error::Validation(_))));
    }

    #[test]
    fn unlimited_rating_gets_capacity() {
        let text = TWO_BUS.replace("0.1 0   150;", "0.1 0   0;");
        let net = parse_case(&text).unwrap();
        assert_eq!(net.branches[0].flow_limit_mw, 200.0);
    }

    #[test]
    fn linear_cost_rows() {
        let text = TWO_BUS.replace("2   0   0   3   0.01    20  0;", "2   0   0   2   14  3;");
        let g = &parse_case(&text).unwrap().generators[0];
        assert_eq!((g.cost_c2, g.cost_c1, g.cost_c0), (0.0, 14.0, 3.0));
        let text = TWO_BUS.replace("2   0   0   3   0.01    20  0;", "1   0   0   3   0 0 1 1 2 2;");
        assert!(matches!(parse_case(&text), Err(Error::Parse { .. })));
    }
}
