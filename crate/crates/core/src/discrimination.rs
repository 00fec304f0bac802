//! Perfect-discrimination schemes for a pair of single-qubit unitaries.
//!
//! Two strategies are synthesized:
//!
//! * **parallel** is one entangled input over `N` qubits, the unknown gate
//!   applied to every qubit at once, chosen so that `u^⊗N|Ψ⟩ ⊥ v^⊗N|Ψ⟩`;
//! * **sequential** is a single qubit passing through `O · X · O` with a fixed
//!   auxiliary gate `X`, chosen so that `uXu|Φ⟩ ⊥ vXv|Φ⟩`.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qmath::{
    arc_distance, c, cis, eig_unitary2, phase_spread, Complex, PureState, QMathError, Unitary2,
};

/// Spreads at or below this are treated as zero (gates equal up to phase).
pub const SPREAD_TOL: f64 = 1e-9;

/// Largest copy count the parallel synthesizer handles.
pub const MAX_PARALLEL_COPIES: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiscriminationError {
    #[error("gates are equal up to a global phase and cannot be distinguished")]
    NotDistinguishable,
    #[error("parallel scheme needs {copies} copies, more than the supported {MAX_PARALLEL_COPIES}")]
    CopiesOutOfScope { copies: usize },
    #[error("eigenphase spread {spread:.6} is below π/2; one auxiliary gate is not enough")]
    SpreadTooSmall { spread: f64 },
    #[error("no phasor weights cancel for the given phases")]
    NoCancellingWeights,
    #[error("outcome sets overlap on {0:?}")]
    OverlappingRule(String),
    #[error(transparent)]
    Math(#[from] QMathError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistinguishabilityReport {
    pub spread: f64,
    /// `⌈π / spread⌉`; `None` when the gates are not distinguishable.
    pub min_parallel_copies: Option<usize>,
    pub perfectly_distinguishable: bool,
}

pub fn analyze(u: &Unitary2, v: &Unitary2) -> DistinguishabilityReport {
    let spread = phase_spread(u, v);
    let distinguishable = spread > SPREAD_TOL;
    DistinguishabilityReport {
        spread,
        min_parallel_copies: distinguishable.then(|| copies_for_spread(spread)),
        perfectly_distinguishable: distinguishable,
    }
}

fn copies_for_spread(spread: f64) -> usize {
    // Slack absorbs rounding when π/spread is an exact integer.
    ((PI / spread) - 1e-9).ceil().max(1.0) as usize
}

/// Which of the two candidate gates is (or is guessed to be) behind the oracle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Truth {
    FirstGate,
    SecondGate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Guess {
    FirstGate,
    SecondGate,
    Failure,
}

impl Truth {
    pub fn is_correct(self, guess: Guess) -> bool {
        matches!(
            (self, guess),
            (Truth::FirstGate, Guess::FirstGate) | (Truth::SecondGate, Guess::SecondGate)
        )
    }
}

/// Maps measured bitstrings to a guess. Strings in neither set are failures.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeRule {
    pub accept_u: BTreeSet<String>,
    pub accept_v: BTreeSet<String>,
}

impl OutcomeRule {
    pub fn new<I, J, S>(accept_u: I, accept_v: J) -> Result<Self, DiscriminationError>
    where
        I: IntoIterator<Item = S>,
        J: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let accept_u: BTreeSet<String> = accept_u.into_iter().map(Into::into).collect();
        let accept_v: BTreeSet<String> = accept_v.into_iter().map(Into::into).collect();
        if let Some(dup) = accept_u.intersection(&accept_v).next() {
            return Err(DiscriminationError::OverlappingRule(dup.clone()));
        }
        Ok(OutcomeRule { accept_u, accept_v })
    }

    /// One measured bit: `0` for the first gate, `1` for the second.
    pub fn single_bit() -> Self {
        Self::new(["0"], ["1"]).expect("disjoint")
    }

    /// Odd parity for the first gate, even parity for the second, over `n` bits.
    pub fn parity(n: usize) -> Self {
        let (mut odd, mut even) = (BTreeSet::new(), BTreeSet::new());
        for i in 0..(1usize << n) {
            let s = format!("{i:0n$b}");
            if i.count_ones() % 2 == 1 {
                odd.insert(s);
            } else {
                even.insert(s);
            }
        }
        OutcomeRule {
            accept_u: odd,
            accept_v: even,
        }
    }

    pub fn classify(&self, bits: &str) -> Guess {
        if self.accept_u.contains(bits) {
            Guess::FirstGate
        } else if self.accept_v.contains(bits) {
            Guess::SecondGate
        } else {
            Guess::Failure
        }
    }
}

pub fn classify(bits: &str, rule: &OutcomeRule) -> Guess {
    rule.classify(bits)
}

/// Probability mass placed on product eigenstates with `excitations` factors
/// of the second eigenvector of `u†v`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseWeight {
    pub excitations: usize,
    pub phase: f64,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParallelScheme {
    pub copies: usize,
    pub input: PureState,
    /// `(u^⊗N|Ψ⟩, v^⊗N|Ψ⟩)`.
    pub measurement_states: [PureState; 2],
    pub outcome_rule: OutcomeRule,
    pub weights: Vec<PhaseWeight>,
}

impl ParallelScheme {
    pub fn phasor_residual(&self) -> f64 {
        self.weights
            .iter()
            .map(|w| cis(w.phase) * w.weight)
            .sum::<Complex>()
            .norm()
    }
}

/// Finds a probability vector over `phases` whose phasor sum vanishes, using
/// the smallest support available: an antipodal pair, otherwise a triangle
/// containing the origin.
pub fn cancelling_weights(phases: &[f64]) -> Option<Vec<f64>> {
    let n = phases.len();
    let z: Vec<Complex> = phases.iter().map(|&p| cis(p)).collect();
    for a in 0..n {
        for b in (a + 1)..n {
            if (z[a] + z[b]).norm() <= 1e-12 {
                let mut w = vec![0.0; n];
                w[a] = 0.5;
                w[b] = 0.5;
                return Some(w);
            }
        }
    }
    for a in 0..n {
        for b in (a + 1)..n {
            for k in (b + 1)..n {
                let (ea, eb) = (z[a] - z[k], z[b] - z[k]);
                let det = ea.re * eb.im - ea.im * eb.re;
                if det.abs() < 1e-14 {
                    continue;
                }
                // Solve pa·ea + pb·eb = -z[k] by Cramer's rule.
                let rhs = -z[k];
                let pa = (rhs.re * eb.im - rhs.im * eb.re) / det;
                let pb = (ea.re * rhs.im - ea.im * rhs.re) / det;
                let pk = 1.0 - pa - pb;
                if pa < -1e-12 || pb < -1e-12 || pk < -1e-12 {
                    continue;
                }
                let mut w = vec![0.0; n];
                w[a] = pa.max(0.0);
                w[b] = pb.max(0.0);
                w[k] = pk.max(0.0);
                let total: f64 = w.iter().sum();
                w.iter_mut().for_each(|x| *x /= total);
                return Some(w);
            }
        }
    }
    None
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

pub fn synthesize_parallel(u: &Unitary2, v: &Unitary2) -> Result<ParallelScheme, DiscriminationError> {
    let report = analyze(u, v);
    let copies = report
        .min_parallel_copies
        .ok_or(DiscriminationError::NotDistinguishable)?;
    if copies > MAX_PARALLEL_COPIES {
        return Err(DiscriminationError::CopiesOutOfScope { copies });
    }
    let eig = eig_unitary2(&(u.adjoint() * *v));
    let delta = eig.phases[1] - eig.phases[0];
    let phases: Vec<f64> = (0..=copies).map(|k| k as f64 * delta).collect();
    let probs = cancelling_weights(&phases).ok_or(DiscriminationError::NoCancellingWeights)?;

    // Amplitudes in the product eigenbasis: bit = 1 selects the second eigenvector.
    let amps: Vec<Complex> = (0..(1usize << copies))
        .map(|idx| {
            let k = idx.count_ones() as usize;
            c((probs[k] / binomial(copies, k) as f64).sqrt(), 0.0)
        })
        .collect();
    let mut input = PureState::new(amps)?;
    let basis = eig.basis();
    for q in 0..copies {
        input = input.apply_local(&basis, q)?;
    }
    let m_u = input.apply_all(u);
    let m_v = input.apply_all(v);
    let outcome_rule = if copies == 1 {
        OutcomeRule::single_bit()
    } else {
        OutcomeRule::parity(copies)
    };
    let weights = phases
        .iter()
        .zip(&probs)
        .enumerate()
        .filter(|(_, (_, &w))| w > 0.0)
        .map(|(k, (&phase, &weight))| PhaseWeight {
            excitations: k,
            phase,
            weight,
        })
        .collect();
    Ok(ParallelScheme {
        copies,
        input,
        measurement_states: [m_u, m_v],
        outcome_rule,
        weights,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SequentialScheme {
    /// The auxiliary gate placed between the two oracle calls.
    pub aux: Unitary2,
    /// The real rotation, in the eigenbasis of `D = v†u`, that makes `W` traceless.
    /// Equals `aux` when `v` is the identity.
    pub rotation: Unitary2,
    /// `|rotation₀₀|² = 1 / (1 - cos Θ)`.
    pub diagonal_weight: f64,
    /// `W = Y†DYD` with `Y = rotation`.
    pub w: Unitary2,
    pub w_eigvecs: [PureState; 2],
    pub input: PureState,
    /// `(uXu|Φ⟩, vXv|Φ⟩)`.
    pub measurement_states: [PureState; 2],
    pub outcome_rule: OutcomeRule,
}

/// One-auxiliary-gate sequential scheme. Requires an eigenphase spread of at
/// least π/2.
///
/// With `D = v†u`, the rotation `Y` lives in the eigenbasis of `D` and the
/// physical auxiliary gate is `X = Y v†`, so that
/// `(vXv)†(uXu) = Y†DYD = W`. `W` is traceless, its eigenphases are antipodal,
/// and the equal superposition of its eigenvectors has `⟨Φ|W|Φ⟩ = 0`.
pub fn synthesize_sequential(
    u: &Unitary2,
    v: &Unitary2,
) -> Result<SequentialScheme, DiscriminationError> {
    let d = v.adjoint() * *u;
    let eig = eig_unitary2(&d);
    let spread = arc_distance(eig.phases[0], eig.phases[1]);
    if spread <= SPREAD_TOL {
        return Err(DiscriminationError::NotDistinguishable);
    }
    let weight = 1.0 / (1.0 - spread.cos());
    if weight > 1.0 + 1e-12 {
        return Err(DiscriminationError::SpreadTooSmall { spread });
    }
    let weight = weight.min(1.0);
    let alpha = weight.sqrt().acos();
    let basis = eig.basis();
    let rotation = basis * Unitary2::rotation(alpha) * basis.adjoint();
    let aux = rotation * v.adjoint();
    let w = rotation.adjoint() * d * rotation * d;

    let w_eig = eig_unitary2(&w);
    let [e0, e1] = [w_eig.vectors[0].as_qubit()?, w_eig.vectors[1].as_qubit()?];
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let input = PureState::qubit([(e0[0] + e1[0]) * h, (e0[1] + e1[1]) * h])?;

    let run = |g: &Unitary2| {
        let s = input.apply_local(g, 0)?;
        let s = s.apply_local(&aux, 0)?;
        s.apply_local(g, 0)
    };
    let m_u = run(u)?;
    let m_v = run(v)?;
    Ok(SequentialScheme {
        aux,
        rotation,
        diagonal_weight: weight,
        w,
        w_eigvecs: w_eig.vectors,
        input,
        measurement_states: [m_u, m_v],
        outcome_rule: OutcomeRule::single_bit(),
    })
}
