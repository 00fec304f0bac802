use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{mix_seed, GateSpec, HarnessError, SchemeCircuits, SchemeKind};
use crate::discrimination::Truth;
use crate::sim::{success_probability, NoiseModel};

/// One labeled success rate: a scheme run with one of the two gates as the oracle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub scheme: SchemeKind,
    pub truth: Truth,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario {
            scheme: SchemeKind::Parallel,
            truth: Truth::FirstGate,
        },
        Scenario {
            scheme: SchemeKind::Parallel,
            truth: Truth::SecondGate,
        },
        Scenario {
            scheme: SchemeKind::Sequential,
            truth: Truth::FirstGate,
        },
        Scenario {
            scheme: SchemeKind::Sequential,
            truth: Truth::SecondGate,
        },
    ];
}

fn default_gate_u() -> GateSpec {
    GateSpec::R(2.0 * PI / 3.0)
}

fn default_gate_v() -> GateSpec {
    GateSpec::Id
}

/// Observed success rates for the four scenarios, read from TOML.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitTargets {
    #[serde(default = "default_gate_u")]
    pub gate_u: GateSpec,
    #[serde(default = "default_gate_v")]
    pub gate_v: GateSpec,
    pub parallel_first: f64,
    pub parallel_second: f64,
    pub sequential_first: f64,
    pub sequential_second: f64,
}

impl FitTargets {
    pub fn uniform(gate_u: GateSpec, gate_v: GateSpec, rate: f64) -> Self {
        FitTargets {
            gate_u,
            gate_v,
            parallel_first: rate,
            parallel_second: rate,
            sequential_first: rate,
            sequential_second: rate,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let t: FitTargets = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        for r in t.rates() {
            if !(r > 0.0 && r <= 1.0) {
                return Err(HarnessError::Config(format!("target rate {r} is outside (0, 1]")));
            }
        }
        Ok(t)
    }

    /// Rates in [`Scenario::ALL`] order.
    pub fn rates(&self) -> [f64; 4] {
        [
            self.parallel_first,
            self.parallel_second,
            self.sequential_first,
            self.sequential_second,
        ]
    }
}

/// Candidate values per noise parameter; searched as a full product.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseGrid {
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
    pub readout_eps: Vec<f64>,
}

impl Default for NoiseGrid {
    /// p1 in 0..=0.01 by 0.001, p2 in 0..=0.05 by 0.005, readout in 0..=0.08 by 0.01.
    fn default() -> Self {
        NoiseGrid {
            p1: (0..=10).map(|i| i as f64 / 1000.0).collect(),
            p2: (0..=10).map(|i| i as f64 * 5.0 / 1000.0).collect(),
            readout_eps: (0..=8).map(|i| i as f64 / 100.0).collect(),
        }
    }
}

impl NoiseGrid {
    /// Candidates with p1 varying slowest and readout fastest.
    pub fn candidates(&self) -> Vec<NoiseModel> {
        let mut out = Vec::with_capacity(self.p1.len() * self.p2.len() * self.readout_eps.len());
        for &p1 in &self.p1 {
            for &p2 in &self.p2 {
                for &readout_eps in &self.readout_eps {
                    out.push(NoiseModel { p1, p2, readout_eps });
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitSettings {
    pub shots: u64,
    pub seed: u64,
    pub grid: NoiseGrid,
}

impl Default for FitSettings {
    fn default() -> Self {
        FitSettings {
            shots: 10_000,
            seed: 0,
            grid: NoiseGrid::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: NoiseModel,
    pub rms: f64,
    /// Predicted rates in [`Scenario::ALL`] order.
    pub predictions: [f64; 4],
    pub targets: [f64; 4],
}

impl FitResult {
    /// Noise file: the model's fields at top level plus a `[fit]` summary table.
    pub fn to_toml(&self) -> String {
        #[derive(Serialize)]
        struct Summary {
            rms: f64,
            scenarios: Vec<String>,
            targets: [f64; 4],
            predictions: [f64; 4],
        }
        #[derive(Serialize)]
        struct File<'a> {
            #[serde(flatten)]
            model: &'a NoiseModel,
            fit: Summary,
        }
        let scenarios = Scenario::ALL
            .iter()
            .map(|s| {
                let t = match s.truth {
                    Truth::FirstGate => "first",
                    Truth::SecondGate => "second",
                };
                format!("{}_{t}", s.scheme)
            })
            .collect();
        toml::to_string(&File {
            model: &self.model,
            fit: Summary {
                rms: self.rms,
                scenarios,
                targets: self.targets,
                predictions: self.predictions,
            },
        })
        .expect("fit result serializes")
    }
}

/// Reads a noise file; extra tables such as `[fit]` are ignored.
pub fn load_noise(text: &str) -> Result<NoiseModel, HarnessError> {
    let model: NoiseModel = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
    model.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
    Ok(model)
}

struct Bench {
    circuits: [SchemeCircuits; 2],
}

impl Bench {
    fn new(gate_u: &GateSpec, gate_v: &GateSpec) -> Result<Self, HarnessError> {
        let (u, v) = (gate_u.unitary(), gate_v.unitary());
        Ok(Bench {
            circuits: [
                SchemeCircuits::build(SchemeKind::Parallel, &u, &v)?,
                SchemeCircuits::build(SchemeKind::Sequential, &u, &v)?,
            ],
        })
    }

    fn predict(&self, noise: &NoiseModel, shots: u64, seed: u64) -> Result<[f64; 4], HarnessError> {
        let mut out = [0.0; 4];
        for (i, s) in Scenario::ALL.iter().enumerate() {
            let c = &self.circuits[match s.scheme {
                SchemeKind::Parallel => 0,
                SchemeKind::Sequential => 1,
            }];
            // Same seed per scenario across candidates: common random numbers.
            out[i] = success_probability(
                c.circuit(s.truth),
                &c.rule,
                s.truth,
                shots,
                noise,
                mix_seed(seed, i as u64),
            )?;
        }
        Ok(out)
    }
}

fn rms(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    (a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / 4.0).sqrt()
}

/// Success rates of the four scenarios under `noise`.
pub fn predict(
    gate_u: &GateSpec,
    gate_v: &GateSpec,
    noise: &NoiseModel,
    shots: u64,
    seed: u64,
) -> Result<[f64; 4], HarnessError> {
    Bench::new(gate_u, gate_v)?.predict(noise, shots, seed)
}

/// Exhaustive grid search for the noise model whose simulated rates best
/// match `targets` in root-mean-square error. Ties go to the earliest candidate.
pub fn fit_noise(targets: &FitTargets, settings: &FitSettings) -> Result<FitResult, HarnessError> {
    let bench = Bench::new(&targets.gate_u, &targets.gate_v)?;
    let goal = targets.rates();
    let candidates = settings.grid.candidates();
    if candidates.is_empty() {
        return Err(HarnessError::EmptyInput);
    }
    let score = |m: &NoiseModel| -> Result<(f64, [f64; 4]), HarnessError> {
        let p = bench.predict(m, settings.shots, settings.seed)?;
        Ok((rms(&p, &goal), p))
    };
    #[cfg(feature = "parallel")]
    let scored: Result<Vec<_>, _> = {
        use rayon::prelude::*;
        candidates.par_iter().map(score).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let scored: Result<Vec<_>, _> = candidates.iter().map(score).collect();
    let scored = scored?;
    let mut best = 0;
    for (i, (r, _)) in scored.iter().enumerate() {
        if *r < scored[best].0 {
            best = i;
        }
    }
    Ok(FitResult {
        model: candidates[best],
        rms: scored[best].0,
        predictions: scored[best].1,
        targets: goal,
    })
}
