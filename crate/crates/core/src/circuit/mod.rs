//! Mode-domain model of the faulted line: Thevenin reduction, per-fault-type
//! network assembly and closed-form currents after fault initiation.

mod network;
mod params;
mod solution;
mod thevenin;

pub use network::{
    build_mode_network, build_mode_network_with, LlgBranch, ModeNetwork, ModeSources,
};
pub use params::{LineParameters, PhaseParameters, SequenceParameters, SourceImpedance};
pub use solution::{
    max_terminal_current, solve_fault_current, solve_network, solve_terminal_current, FaultCurrent,
    TerminalCurrent,
};
pub use thevenin::{thevenin_parallel, TheveninBranch, TheveninReduction};
