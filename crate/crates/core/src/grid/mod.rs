//! Power-network model, MATPOWER reader and compilation into the standard-form QP.

mod compile;
mod matpower;
mod network;

pub use compile::{
    build_dcopf_qp, encode_dispatch, recover_solution, Block, DispatchSolution, GenCost, RowBlock, VariableMap,
};
pub use matpower::{load_case, parse_case};
pub use network::{scale_loads, Branch, Bus, Generator, PowerNetwork};
