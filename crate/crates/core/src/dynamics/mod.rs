mod flow;
mod leibniz;

pub use flow::{
    evolve_classical, evolve_quantum, integrate, order_check, rk4_step, FlowProblem, FlowState,
    FlowVector, QuantumTrajectory, Trajectory,
};
pub use leibniz::{
    binary_bracket_matrix, leibniz_multibracket, multibracket_matrix, BracketOperator, BracketOutput,
    HamiltonianSlot, Slot, RESIDUAL_WARN,
};
