use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{aggregate, mix_seed, BoxStats, GateSpec, HarnessError, SchemeCircuits, SchemeKind};
use crate::discrimination::Truth;
use crate::sim::{run_shots, NoiseModel, ShotCounts};

const TRUTH_SALT: u64 = 0x7472_7574_6820_636f;

fn default_shots() -> u64 {
    1024
}

fn default_rounds() -> u64 {
    10
}

fn default_device_qubits() -> usize {
    5
}

fn default_qubit_map() -> Vec<usize> {
    vec![0, 1]
}

fn default_schemes() -> Vec<SchemeKind> {
    SchemeKind::ALL.to_vec()
}

/// Experiment description, read from TOML.
///
/// ```toml
/// gate_u = "r(2.0943951023931953)"
/// gate_v = "id"
/// schemes = ["parallel", "sequential"]
/// shots = 1024
/// rounds = 10
/// seed = 2018
/// device_qubits = 5
/// qubit_map = [0, 1]
///
/// [noise]
/// p1 = 0.0
/// p2 = 0.0
/// readout_eps = 0.0
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub gate_u: GateSpec,
    pub gate_v: GateSpec,
    #[serde(default = "default_schemes")]
    pub schemes: Vec<SchemeKind>,
    #[serde(default = "default_shots")]
    pub shots: u64,
    #[serde(default = "default_rounds")]
    pub rounds: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub noise: NoiseModel,
    #[serde(default = "default_device_qubits")]
    pub device_qubits: usize,
    #[serde(default = "default_qubit_map")]
    pub qubit_map: Vec<usize>,
}

impl ExperimentConfig {
    pub fn new(gate_u: GateSpec, gate_v: GateSpec) -> Self {
        ExperimentConfig {
            gate_u,
            gate_v,
            schemes: default_schemes(),
            shots: default_shots(),
            rounds: default_rounds(),
            seed: 0,
            noise: NoiseModel::noiseless(),
            device_qubits: default_device_qubits(),
            qubit_map: default_qubit_map(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.shots == 0 {
            return Err(HarnessError::Config("shots must be at least 1".into()));
        }
        if self.rounds == 0 {
            return Err(HarnessError::Config("rounds must be at least 1".into()));
        }
        if self.schemes.is_empty() {
            return Err(HarnessError::Config("no schemes selected".into()));
        }
        self.noise
            .validate()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        DeviceLayout::new(self.device_qubits, self.qubit_map.clone())?;
        Ok(())
    }

    pub fn layout(&self) -> Result<DeviceLayout, HarnessError> {
        DeviceLayout::new(self.device_qubits, self.qubit_map.clone())
    }
}

/// Placement of a scheme's logical qubits (and clbits) on a wider device.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeviceLayout {
    device_qubits: usize,
    map: Vec<usize>,
}

impl DeviceLayout {
    pub fn new(device_qubits: usize, map: Vec<usize>) -> Result<Self, HarnessError> {
        for (i, &p) in map.iter().enumerate() {
            if p >= device_qubits {
                return Err(HarnessError::Config(format!(
                    "qubit_map entry {p} is outside a {device_qubits}-qubit device"
                )));
            }
            if map[..i].contains(&p) {
                return Err(HarnessError::Config(format!(
                    "qubit_map lists physical qubit {p} twice"
                )));
            }
        }
        Ok(DeviceLayout { device_qubits, map })
    }

    pub fn device_qubits(&self) -> usize {
        self.device_qubits
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    /// Prefix of the map covering `n` logical qubits.
    pub fn restrict(&self, n: usize) -> Result<DeviceLayout, HarnessError> {
        if n > self.map.len() {
            return Err(HarnessError::Config(format!(
                "scheme needs {n} qubits but qubit_map has {} entries",
                self.map.len()
            )));
        }
        Ok(DeviceLayout {
            device_qubits: self.device_qubits,
            map: self.map[..n].to_vec(),
        })
    }

    /// Device-width strings; bits the scheme never measures read `0`.
    pub fn widen(&self, counts: &ShotCounts) -> ShotCounts {
        let mut out = BTreeMap::new();
        for (bits, &n) in &counts.counts {
            let mut wide = vec![b'0'; self.device_qubits];
            for (i, b) in bits.bytes().enumerate() {
                wide[self.map[i]] = b;
            }
            *out.entry(String::from_utf8(wide).expect("ascii")).or_insert(0) += n;
        }
        ShotCounts {
            total: counts.total,
            counts: out,
        }
    }

    /// Keeps only the mapped bits, in logical order.
    pub fn project(&self, counts: &ShotCounts) -> ShotCounts {
        let mut out = BTreeMap::new();
        for (bits, &n) in &counts.counts {
            let b = bits.as_bytes();
            let narrow: String = self.map.iter().map(|&p| b[p] as char).collect();
            *out.entry(narrow).or_insert(0) += n;
        }
        ShotCounts {
            total: counts.total,
            counts: out,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundResult {
    pub round: u64,
    pub truth: Truth,
    /// Device-width outcome strings.
    pub counts: ShotCounts,
    pub success_count: u64,
    pub success_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeReport {
    pub scheme: SchemeKind,
    pub rounds: Vec<RoundResult>,
    pub stats: BoxStats,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: ExperimentConfig,
    pub schemes: Vec<SchemeReport>,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }
}

/// Fair coin for `round`, drawn from a stream reserved for truth selection.
pub fn truth_for_round(seed: u64, round: u64) -> Truth {
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, TRUTH_SALT));
    rng.set_stream(round);
    if rng.gen::<bool>() {
        Truth::SecondGate
    } else {
        Truth::FirstGate
    }
}

fn shot_seed(seed: u64, scheme: SchemeKind, round: u64) -> u64 {
    mix_seed(mix_seed(seed, round), scheme.tag())
}

fn round_with(
    circuits: &SchemeCircuits,
    layout: &DeviceLayout,
    config: &ExperimentConfig,
    round: u64,
) -> Result<RoundResult, HarnessError> {
    let truth = truth_for_round(config.seed, round);
    let layout = layout.restrict(circuits.num_qubits())?;
    let raw = run_shots(
        circuits.circuit(truth),
        config.shots,
        &config.noise,
        shot_seed(config.seed, circuits.kind, round),
    )?;
    let counts = layout.widen(&raw);
    let success_count = layout.project(&counts).correct(&circuits.rule, truth);
    Ok(RoundResult {
        round,
        truth,
        counts,
        success_count,
        success_rate: success_count as f64 / config.shots as f64,
    })
}

/// One round of `scheme` under `config`.
pub fn run_round(
    config: &ExperimentConfig,
    scheme: SchemeKind,
    round: u64,
) -> Result<RoundResult, HarnessError> {
    config.validate()?;
    let circuits = SchemeCircuits::build(scheme, &config.gate_u.unitary(), &config.gate_v.unitary())?;
    round_with(&circuits, &config.layout()?, config, round)
}

/// All rounds of every configured scheme, ordered by scheme then round.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Report, HarnessError> {
    config.validate()?;
    let layout = config.layout()?;
    let (u, v) = (config.gate_u.unitary(), config.gate_v.unitary());
    let mut schemes = Vec::with_capacity(config.schemes.len());
    for &kind in &config.schemes {
        let circuits = SchemeCircuits::build(kind, &u, &v)?;
        let one = |r: u64| round_with(&circuits, &layout, config, r);
        #[cfg(feature = "parallel")]
        let rounds: Result<Vec<_>, _> = {
            use rayon::prelude::*;
            (0..config.rounds).into_par_iter().map(one).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let rounds: Result<Vec<_>, _> = (0..config.rounds).map(one).collect();
        let rounds = rounds?;
        let rates: Vec<f64> = rounds.iter().map(|r| r.success_rate).collect();
        schemes.push(SchemeReport {
            scheme: kind,
            stats: aggregate(&rates)?,
            rounds,
        });
    }
    Ok(Report {
        config: config.clone(),
        schemes,
    })
}
