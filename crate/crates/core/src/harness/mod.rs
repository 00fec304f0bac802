//! Experiment orchestration: scheme circuits per oracle choice, seeded rounds,
//! device-width outcome projection, aggregation and noise fitting.

mod experiment;
mod fit;
mod gates;
mod stats;

#[cfg(feature = "cli")]
pub mod cli;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use experiment::{
    run_experiment, run_round, truth_for_round, DeviceLayout, ExperimentConfig, Report,
    RoundResult, SchemeReport,
};
pub use fit::{fit_noise, load_noise, predict, FitResult, FitSettings, FitTargets, NoiseGrid, Scenario};
pub use gates::GateSpec;
pub use stats::{aggregate, BoxStats};

use crate::circuits::{
    measure_basis_1q, oracle_gate, prep_1q, prep_2q, walgate_measurement_circuit, Circuit,
    CircuitError, Gate,
};
use crate::discrimination::{
    synthesize_parallel, synthesize_sequential, DiscriminationError, OutcomeRule, Truth,
};
use crate::qasm::QasmError;
use crate::qmath::{u3_params, Unitary2};
use crate::sim::SimError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("unknown gate {0}")]
    UnknownGate(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("empty input")]
    EmptyInput,
    #[error("{copies}-copy parallel schemes have no measurement circuit (supported: 1 or 2)")]
    UnsupportedCopies { copies: usize },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Discrimination(#[from] DiscriminationError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Qasm(#[from] QasmError),
}

impl HarnessError {
    /// Process exit code: 1 usage, 2 synthesis/validation, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::UnknownGate(_) | HarnessError::Config(_) => 1,
            HarnessError::Io { .. } => 3,
            _ => 2,
        }
    }

    #[cfg(feature = "cli")]
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    Parallel,
    Sequential,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 2] = [SchemeKind::Parallel, SchemeKind::Sequential];

    fn tag(self) -> u64 {
        match self {
            SchemeKind::Parallel => 1,
            SchemeKind::Sequential => 2,
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchemeKind::Parallel => "parallel",
            SchemeKind::Sequential => "sequential",
        })
    }
}

impl FromStr for SchemeKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "parallel" => Ok(SchemeKind::Parallel),
            "sequential" => Ok(SchemeKind::Sequential),
            other => Err(HarnessError::Config(format!(
                "unknown scheme `{other}` (expected parallel or sequential)"
            ))),
        }
    }
}

/// Executable circuits for both oracle choices of one scheme.
#[derive(Clone, Debug, PartialEq)]
pub struct SchemeCircuits {
    pub kind: SchemeKind,
    pub rule: OutcomeRule,
    first: Circuit,
    second: Circuit,
}

impl SchemeCircuits {
    pub fn build(kind: SchemeKind, u: &Unitary2, v: &Unitary2) -> Result<Self, HarnessError> {
        let with_oracle = |g: &Unitary2| -> Result<Circuit, HarnessError> {
            match kind {
                SchemeKind::Parallel => parallel_circuit(u, v, g),
                SchemeKind::Sequential => sequential_circuit(u, v, g),
            }
        };
        let rule = match kind {
            SchemeKind::Parallel => synthesize_parallel(u, v)?.outcome_rule,
            SchemeKind::Sequential => synthesize_sequential(u, v)?.outcome_rule,
        };
        Ok(SchemeCircuits {
            kind,
            rule,
            first: with_oracle(u)?,
            second: with_oracle(v)?,
        })
    }

    pub fn circuit(&self, truth: Truth) -> &Circuit {
        match truth {
            Truth::FirstGate => &self.first,
            Truth::SecondGate => &self.second,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.first.num_qubits()
    }
}

fn push_oracle(circuit: &mut Circuit, oracle: &Unitary2, qubit: usize) -> Result<(), CircuitError> {
    if let Some(Gate::U3 { params, .. }) = oracle_gate(oracle) {
        circuit.push(Gate::u3(params, qubit))?;
    }
    Ok(())
}

/// `U_p · O^⊗N · U_m`, with the oracle slots filled by `oracle`.
pub fn parallel_circuit(
    u: &Unitary2,
    v: &Unitary2,
    oracle: &Unitary2,
) -> Result<Circuit, HarnessError> {
    let scheme = synthesize_parallel(u, v)?;
    let [m_u, m_v] = &scheme.measurement_states;
    let (prep, meas) = match scheme.copies {
        1 => (prep_1q(&scheme.input)?, measure_basis_1q(m_u, m_v)?),
        2 => (
            prep_2q(&scheme.input)?,
            walgate_measurement_circuit(m_u, m_v, &scheme.outcome_rule)?,
        ),
        copies => return Err(HarnessError::UnsupportedCopies { copies }),
    };
    let n = scheme.copies;
    let mut circuit = Circuit::new(n, n);
    circuit.append(&prep)?;
    for q in 0..n {
        push_oracle(&mut circuit, oracle, q)?;
    }
    circuit.append(&meas)?;
    Ok(circuit)
}

/// `U_p · O · X · O · U_m`, with both oracle slots filled by `oracle`.
pub fn sequential_circuit(
    u: &Unitary2,
    v: &Unitary2,
    oracle: &Unitary2,
) -> Result<Circuit, HarnessError> {
    let scheme = synthesize_sequential(u, v)?;
    let [m_u, m_v] = &scheme.measurement_states;
    let mut circuit = Circuit::new(1, 1);
    circuit.append(&prep_1q(&scheme.input)?)?;
    push_oracle(&mut circuit, oracle, 0)?;
    circuit.push(Gate::u3(u3_params(&scheme.aux), 0))?;
    push_oracle(&mut circuit, oracle, 0)?;
    circuit.append(&measure_basis_1q(m_u, m_v)?)?;
    Ok(circuit)
}

/// SplitMix64 finalizer; derives independent sub-seeds.
pub(crate) fn mix_seed(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
