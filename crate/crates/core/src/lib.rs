//! Perfect discrimination of pairs of single-qubit unitary gates.
//!
//! Synthesizes parallel (entangled multi-copy) and sequential (single-qubit,
//! one auxiliary gate) schemes, compiles them to `{u3, cx, measure}` circuits,
//! emits and parses OpenQASM 2.0, and runs the schemes on a noisy
//! state-vector simulator.

pub mod circuits;
pub mod discrimination;
pub mod harness;
pub mod qasm;
pub mod qmath;
pub mod sim;

pub use circuits::{Circuit, Gate};
pub use discrimination::{analyze, synthesize_parallel, synthesize_sequential, Guess, OutcomeRule, Truth};
pub use qmath::{Complex, PureState, U3Params, Unitary2};
pub use sim::{run_shots, NoiseModel, ShotCounts};
