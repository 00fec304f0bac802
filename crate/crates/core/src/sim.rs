//! State-vector simulation with shot sampling and Monte-Carlo noise.
//!
//! Noise is unravelled into Pauli trajectories: after every U3 the target, and
//! after every CX each participant, suffers a uniformly random X, Y or Z with
//! the gate-class probability. Measured bits are then flipped independently
//! with the readout probability.
//!
//! Each shot owns a ChaCha stream keyed by `(seed, shot index)` and consumes a
//! fixed number of draws regardless of the noise rates, so shots are
//! order-independent and different noise models see common random numbers.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuits::{Circuit, Gate};
use crate::discrimination::{OutcomeRule, Truth};
use crate::qmath::{apply_1q, apply_cx, c, Complex, Matrix2, PureState, MAX_QUBITS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("circuit acts on {circuit} qubits but the state has {state}")]
    DimensionMismatch { circuit: usize, state: usize },
    #[error("circuit has {0} qubits; at most {MAX_QUBITS} are simulated")]
    TooManyQubits(usize),
    #[error("circuit contains a measurement; expected a purely unitary circuit")]
    UnexpectedMeasure,
    #[error("circuit has no measurements")]
    NoMeasurement,
    #[error("shot count must be at least 1")]
    NoShots,
    #[error("noise rate {name} = {value} is outside [0, 1]")]
    InvalidRate { name: &'static str, value: f64 },
}

/// Depolarizing rates per gate class plus a readout flip rate.
/// Omitted fields default to zero.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseModel {
    pub p1: f64,
    pub p2: f64,
    pub readout_eps: f64,
}

impl NoiseModel {
    pub fn new(p1: f64, p2: f64, readout_eps: f64) -> Result<Self, SimError> {
        let model = NoiseModel {
            p1,
            p2,
            readout_eps,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn noiseless() -> Self {
        NoiseModel::default()
    }

    pub fn is_noiseless(&self) -> bool {
        self.p1 == 0.0 && self.p2 == 0.0 && self.readout_eps == 0.0
    }

    pub fn validate(&self) -> Result<(), SimError> {
        for (name, value) in [("p1", self.p1), ("p2", self.p2), ("readout_eps", self.readout_eps)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(SimError::InvalidRate { name, value });
            }
        }
        Ok(())
    }
}

/// Outcome tally; bitstrings list clbit 0 first.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotCounts {
    pub total: u64,
    pub counts: BTreeMap<String, u64>,
}

impl ShotCounts {
    pub fn get(&self, bits: &str) -> u64 {
        self.counts.get(bits).copied().unwrap_or(0)
    }

    pub fn frequency(&self, bits: &str) -> f64 {
        self.get(bits) as f64 / self.total as f64
    }

    /// Number of shots whose outcome `rule` maps to the correct guess.
    pub fn correct(&self, rule: &OutcomeRule, truth: Truth) -> u64 {
        self.counts
            .iter()
            .filter(|(bits, _)| truth.is_correct(rule.classify(bits)))
            .map(|(_, n)| n)
            .sum()
    }
}

fn apply_gate(amps: &mut [Complex], n: usize, gate: &Gate, cache: &Matrix2) {
    match *gate {
        Gate::U3 { target, .. } => apply_1q(amps, n, target, cache),
        Gate::Cx { control, target } => apply_cx(amps, n, control, target),
        Gate::Measure { .. } => {}
    }
}

fn gate_matrices(circuit: &Circuit) -> Vec<Matrix2> {
    circuit
        .gates()
        .iter()
        .map(|g| match g {
            Gate::U3 { params, .. } => *params.gate().entries(),
            _ => [[c(0.0, 0.0); 2]; 2],
        })
        .collect()
}

fn check_width(circuit: &Circuit) -> Result<(), SimError> {
    if circuit.num_qubits() > MAX_QUBITS || circuit.num_qubits() == 0 {
        return Err(SimError::TooManyQubits(circuit.num_qubits()));
    }
    Ok(())
}

/// Exact unitary evolution of `state` through a measurement-free circuit.
pub fn apply_circuit(state: &PureState, circuit: &Circuit) -> Result<PureState, SimError> {
    if circuit.num_qubits() != state.num_qubits() {
        return Err(SimError::DimensionMismatch {
            circuit: circuit.num_qubits(),
            state: state.num_qubits(),
        });
    }
    if circuit.count_measure() > 0 {
        return Err(SimError::UnexpectedMeasure);
    }
    let mats = gate_matrices(circuit);
    let mut out = state.clone();
    let n = state.num_qubits();
    for (g, m) in circuit.gates().iter().zip(&mats) {
        apply_gate(out.amplitudes_mut(), n, g, m);
    }
    Ok(out)
}

/// Row-major matrix of the circuit's unitary part.
pub fn unitary_matrix(circuit: &Circuit) -> Result<Vec<Complex>, SimError> {
    check_width(circuit)?;
    let n = circuit.num_qubits();
    let dim = 1usize << n;
    let body = circuit.unitary_part();
    let mut out = vec![c(0.0, 0.0); dim * dim];
    for col in 0..dim {
        let basis = PureState::basis(n, col).expect("width checked");
        let image = apply_circuit(&basis, &body)?;
        for (row, a) in image.amplitudes().iter().enumerate() {
            out[row * dim + col] = *a;
        }
    }
    Ok(out)
}

/// Largest entrywise difference between square matrices after removing the
/// best global phase.
pub fn matrix_distance_up_to_phase(a: &[Complex], b: &[Complex]) -> f64 {
    let t: Complex = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    let phase = if t.norm() > 1e-12 {
        t.conj() / t.norm()
    } else {
        c(1.0, 0.0)
    };
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y * phase).norm())
        .fold(0.0, f64::max)
}

/// RNG for one shot.
pub fn shot_rng(seed: u64, shot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shot);
    rng
}

/// A circuit prepared for repeated noisy sampling.
struct ShotKernel<'a> {
    circuit: &'a Circuit,
    mats: Vec<Matrix2>,
    measures: Vec<(usize, usize)>,
    noise: NoiseModel,
}

const PAULIS: [Matrix2; 3] = [
    [
        [Complex::new(0.0, 0.0), Complex::new(1.0, 0.0)],
        [Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)],
    ],
    [
        [Complex::new(0.0, 0.0), Complex::new(0.0, -1.0)],
        [Complex::new(0.0, 1.0), Complex::new(0.0, 0.0)],
    ],
    [
        [Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)],
        [Complex::new(0.0, 0.0), Complex::new(-1.0, 0.0)],
    ],
];

impl<'a> ShotKernel<'a> {
    fn new(circuit: &'a Circuit, noise: NoiseModel) -> Result<Self, SimError> {
        check_width(circuit)?;
        noise.validate()?;
        let measures = circuit.measurements();
        if measures.is_empty() {
            return Err(SimError::NoMeasurement);
        }
        Ok(ShotKernel {
            circuit,
            mats: gate_matrices(circuit),
            measures,
            noise,
        })
    }

    fn depolarize(amps: &mut [Complex], n: usize, qubit: usize, p: f64, rng: &mut ChaCha8Rng) {
        let draw: f64 = rng.gen();
        if draw < p {
            let which = ((draw / p) * 3.0) as usize;
            apply_1q(amps, n, qubit, &PAULIS[which.min(2)]);
        }
    }

    /// Outcome of one shot as an integer, clbit 0 in the most significant place.
    fn shot(&self, rng: &mut ChaCha8Rng) -> usize {
        let n = self.circuit.num_qubits();
        let mut amps = vec![c(0.0, 0.0); 1 << n];
        amps[0] = c(1.0, 0.0);
        for (g, m) in self.circuit.gates().iter().zip(&self.mats) {
            apply_gate(&mut amps, n, g, m);
            match *g {
                Gate::U3 { target, .. } => {
                    Self::depolarize(&mut amps, n, target, self.noise.p1, rng)
                }
                Gate::Cx { control, target } => {
                    Self::depolarize(&mut amps, n, control, self.noise.p2, rng);
                    Self::depolarize(&mut amps, n, target, self.noise.p2, rng);
                }
                Gate::Measure { .. } => {}
            }
        }
        let r: f64 = rng.gen();
        let mut acc = 0.0;
        let mut index = amps.len() - 1;
        for (i, a) in amps.iter().enumerate() {
            acc += a.norm_sqr();
            if r < acc {
                index = i;
                break;
            }
        }
        let nc = self.circuit.num_clbits();
        let mut out = 0usize;
        for &(q, cbit) in &self.measures {
            let mut bit = (index >> (n - 1 - q)) & 1;
            let flip: f64 = rng.gen();
            if flip < self.noise.readout_eps {
                bit ^= 1;
            }
            let mask = 1usize << (nc - 1 - cbit);
            out = (out & !mask) | (bit << (nc - 1 - cbit));
        }
        out
    }

    fn histogram(&self, shots: u64, seed: u64) -> Vec<u64> {
        let bins = 1usize << self.circuit.num_clbits();
        let run_block = |start: u64, end: u64| {
            let mut h = vec![0u64; bins];
            for s in start..end {
                let mut rng = shot_rng(seed, s);
                h[self.shot(&mut rng)] += 1;
            }
            h
        };
        const BLOCK: u64 = 2048;
        let blocks: Vec<(u64, u64)> = (0..shots.div_ceil(BLOCK))
            .map(|b| (b * BLOCK, ((b + 1) * BLOCK).min(shots)))
            .collect();
        let merge = |mut a: Vec<u64>, b: Vec<u64>| {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
            a
        };
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            blocks
                .into_par_iter()
                .map(|(s, e)| run_block(s, e))
                .reduce(|| vec![0u64; bins], merge)
        }
        #[cfg(not(feature = "parallel"))]
        {
            blocks
                .into_iter()
                .map(|(s, e)| run_block(s, e))
                .fold(vec![0u64; bins], merge)
        }
    }
}

fn to_counts(hist: &[u64], width: usize, total: u64) -> ShotCounts {
    let counts = hist
        .iter()
        .enumerate()
        .filter(|(_, &n)| n > 0)
        .map(|(i, &n)| (format!("{i:0width$b}"), n))
        .collect();
    ShotCounts { total, counts }
}

/// Samples `shots` noisy executions. Deterministic in `(circuit, shots, noise, seed)`.
pub fn run_shots(
    circuit: &Circuit,
    shots: u64,
    noise: &NoiseModel,
    seed: u64,
) -> Result<ShotCounts, SimError> {
    if shots == 0 {
        return Err(SimError::NoShots);
    }
    let kernel = ShotKernel::new(circuit, *noise)?;
    let hist = kernel.histogram(shots, seed);
    Ok(to_counts(&hist, circuit.num_clbits(), shots))
}

/// Fraction of shots classified as `truth` under `rule`.
pub fn success_probability(
    circuit: &Circuit,
    rule: &OutcomeRule,
    truth: Truth,
    shots: u64,
    noise: &NoiseModel,
    seed: u64,
) -> Result<f64, SimError> {
    let counts = run_shots(circuit, shots, noise, seed)?;
    Ok(counts.correct(rule, truth) as f64 / shots as f64)
}
