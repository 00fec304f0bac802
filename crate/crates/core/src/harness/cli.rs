//! Command-line front end. Exit codes: 0 success, 1 usage, 2 synthesis or
//! validation failure, 3 I/O failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use super::{
    aggregate, fit_noise, load_noise, BoxStats, DeviceLayout, ExperimentConfig, FitSettings,
    FitTargets, GateSpec, HarnessError, Report, RoundResult, SchemeCircuits, SchemeKind,
};
use crate::discrimination::{analyze, Truth};
use crate::qasm::emit;
use crate::sim::{run_shots, NoiseModel};

#[derive(Parser, Debug)]
#[command(name = "unidisc", version, about = "Perfect discrimination of single-qubit unitary gates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SchemeArg {
    Parallel,
    Sequential,
}

impl From<SchemeArg> for SchemeKind {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Parallel => SchemeKind::Parallel,
            SchemeArg::Sequential => SchemeKind::Sequential,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TruthArg {
    First,
    Second,
}

impl From<TruthArg> for Truth {
    fn from(t: TruthArg) -> Self {
        match t {
            TruthArg::First => Truth::FirstGate,
            TruthArg::Second => Truth::SecondGate,
        }
    }
}

#[derive(clap::Args, Debug)]
struct GatePair {
    /// First gate: id, h, x, z, r(angle) or u3(a,b,c).
    #[arg(long)]
    u: String,
    /// Second gate, same grammar.
    #[arg(long)]
    v: String,
}

impl GatePair {
    fn parse(&self) -> Result<(GateSpec, GateSpec), HarnessError> {
        Ok((self.u.parse()?, self.v.parse()?))
    }
}

#[derive(clap::Args, Debug)]
struct Placement {
    #[arg(long, default_value_t = 5)]
    device_qubits: usize,
    /// Physical qubit for each logical qubit, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0,1")]
    qubit_map: Vec<usize>,
}

impl Placement {
    fn layout(&self) -> Result<DeviceLayout, HarnessError> {
        DeviceLayout::new(self.device_qubits, self.qubit_map.clone())
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Eigenphase spread and minimal parallel copy count.
    Analyze {
        #[command(flatten)]
        gates: GatePair,
    },
    /// Write one QASM file per oracle choice.
    Synthesize {
        #[arg(long, value_enum)]
        scheme: SchemeArg,
        #[command(flatten)]
        gates: GatePair,
        #[arg(long)]
        emit_qasm: PathBuf,
        #[command(flatten)]
        placement: Placement,
    },
    /// One round with a fixed oracle; prints the round as JSON.
    Simulate {
        #[arg(long, value_enum)]
        scheme: SchemeArg,
        #[command(flatten)]
        gates: GatePair,
        #[arg(long, value_enum)]
        truth: TruthArg,
        #[arg(long, default_value_t = 1024)]
        shots: u64,
        /// Noise TOML file; noiseless when omitted.
        #[arg(long)]
        noise: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        placement: Placement,
    },
    /// Run every configured round and write a JSON report.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Grid-search a noise model against four observed success rates.
    FitNoise {
        #[arg(long)]
        targets: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        shots: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Summarize a report: box statistics and a histogram per scheme.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        /// Per-round CSV instead of the summary.
        #[arg(long)]
        csv: bool,
    },
}

fn read(path: &Path) -> Result<String, HarnessError> {
    fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))
}

fn write(path: &Path, text: &str) -> Result<(), HarnessError> {
    fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

fn stdout_err(e: std::io::Error) -> HarnessError {
    HarnessError::io("<stdout>", e)
}

/// Runs the CLI with `argv` (program name first), writing to `out` and `err`.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.exit_code() == 1 {
                let _ = writeln!(err, "run `unidisc --help` for usage");
            }
            e.exit_code()
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<(), HarnessError> {
    match command {
        Command::Analyze { gates } => {
            let (u, v) = gates.parse()?;
            let r = analyze(&u.unitary(), &v.unitary());
            writeln!(out, "spread: {:.12}", r.spread).map_err(stdout_err)?;
            match r.min_parallel_copies {
                Some(n) => writeln!(out, "min_parallel_copies: {n}"),
                None => writeln!(out, "min_parallel_copies: none"),
            }
            .map_err(stdout_err)?;
            writeln!(out, "perfectly_distinguishable: {}", r.perfectly_distinguishable)
                .map_err(stdout_err)?;
            let seq = r.spread >= std::f64::consts::FRAC_PI_2 - 1e-12;
            writeln!(out, "sequential_one_aux: {seq}").map_err(stdout_err)
        }
        Command::Synthesize {
            scheme,
            gates,
            emit_qasm,
            placement,
        } => {
            let (u, v) = gates.parse()?;
            let kind = SchemeKind::from(scheme);
            let circuits = SchemeCircuits::build(kind, &u.unitary(), &v.unitary())?;
            let layout = placement.layout()?.restrict(circuits.num_qubits())?;
            fs::create_dir_all(&emit_qasm).map_err(|e| HarnessError::io(&emit_qasm, e))?;
            for (truth, label) in [(Truth::FirstGate, "first"), (Truth::SecondGate, "second")] {
                let c = circuits.circuit(truth);
                let text = emit(c, layout.device_qubits(), layout.map())?;
                let path = emit_qasm.join(format!("{kind}_{label}.qasm"));
                write(&path, &text)?;
                writeln!(
                    out,
                    "{}: {} u3, {} cx, {} measure",
                    path.display(),
                    c.count_u3(),
                    c.count_cx(),
                    c.count_measure()
                )
                .map_err(stdout_err)?;
            }
            Ok(())
        }
        Command::Simulate {
            scheme,
            gates,
            truth,
            shots,
            noise,
            seed,
            placement,
        } => {
            let (u, v) = gates.parse()?;
            if shots == 0 {
                return Err(HarnessError::Config("shots must be at least 1".into()));
            }
            let noise = match noise {
                Some(path) => load_noise(&read(&path)?)?,
                None => NoiseModel::noiseless(),
            };
            let circuits = SchemeCircuits::build(scheme.into(), &u.unitary(), &v.unitary())?;
            let layout = placement.layout()?.restrict(circuits.num_qubits())?;
            let truth = Truth::from(truth);
            let counts = layout.widen(&run_shots(circuits.circuit(truth), shots, &noise, seed)?);
            let success_count = layout.project(&counts).correct(&circuits.rule, truth);
            let result = RoundResult {
                round: 0,
                truth,
                counts,
                success_count,
                success_rate: success_count as f64 / shots as f64,
            };
            let json = serde_json::to_string_pretty(&result).expect("round serializes");
            writeln!(out, "{json}").map_err(stdout_err)
        }
        Command::Experiment { config, out: path } => {
            let cfg = ExperimentConfig::from_toml(&read(&config)?)?;
            let report = super::run_experiment(&cfg)?;
            write(&path, &report.to_json())?;
            for s in &report.schemes {
                writeln!(
                    out,
                    "{}: median {:.4}, mean {:.4}, stddev {:.4}",
                    s.scheme, s.stats.median, s.stats.mean, s.stats.stddev
                )
                .map_err(stdout_err)?;
            }
            Ok(())
        }
        Command::FitNoise {
            targets,
            out: path,
            shots,
            seed,
        } => {
            let targets = FitTargets::from_toml(&read(&targets)?)?;
            if shots == 0 {
                return Err(HarnessError::Config("shots must be at least 1".into()));
            }
            let settings = FitSettings {
                shots,
                seed,
                ..FitSettings::default()
            };
            let fit = fit_noise(&targets, &settings)?;
            write(&path, &fit.to_toml())?;
            writeln!(
                out,
                "p1 = {}, p2 = {}, readout_eps = {}, rms = {:.4}",
                fit.model.p1, fit.model.p2, fit.model.readout_eps, fit.rms
            )
            .map_err(stdout_err)
        }
        Command::Report { input, csv } => {
            let report = Report::from_json(&read(&input)?)?;
            let text = if csv {
                report_csv(&report)
            } else {
                report_text(&report)?
            };
            out.write_all(text.as_bytes()).map_err(stdout_err)
        }
    }
}

fn report_csv(report: &Report) -> String {
    let mut s = String::from("scheme,round,truth,success_count,shots,success_rate\n");
    for sr in &report.schemes {
        for r in &sr.rounds {
            let truth = match r.truth {
                Truth::FirstGate => "first_gate",
                Truth::SecondGate => "second_gate",
            };
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                sr.scheme, r.round, truth, r.success_count, r.counts.total, r.success_rate
            ));
        }
    }
    s
}

const BIN_WIDTH: f64 = 0.02;

/// Text histogram of `rates` in fixed-width bins.
pub fn histogram(rates: &[f64]) -> String {
    let bin = |x: f64| (x / BIN_WIDTH + 1e-9).floor() as i64;
    let (lo, hi) = rates
        .iter()
        .fold((i64::MAX, i64::MIN), |(lo, hi), &x| (lo.min(bin(x)), hi.max(bin(x))));
    let mut s = String::new();
    for b in lo..=hi {
        let n = rates.iter().filter(|&&x| bin(x) == b).count();
        s.push_str(&format!(
            "  [{:.2}, {:.2}) {:>3} {}\n",
            b as f64 * BIN_WIDTH,
            (b + 1) as f64 * BIN_WIDTH,
            n,
            "#".repeat(n)
        ));
    }
    s
}

fn stats_line(s: &BoxStats) -> String {
    format!(
        "  min {:.4}  q25 {:.4}  median {:.4}  q75 {:.4}  max {:.4}  mean {:.4}  stddev {:.4}\n",
        s.min, s.q25, s.median, s.q75, s.max, s.mean, s.stddev
    )
}

fn report_text(report: &Report) -> Result<String, HarnessError> {
    let mut s = format!(
        "gates: u = {}, v = {}; {} rounds x {} shots\n",
        report.config.gate_u, report.config.gate_v, report.config.rounds, report.config.shots
    );
    for sr in &report.schemes {
        let rates: Vec<f64> = sr.rounds.iter().map(|r| r.success_rate).collect();
        let stats = aggregate(&rates)?;
        s.push_str(&format!("{}\n", sr.scheme));
        s.push_str(&stats_line(&stats));
        s.push_str(&histogram(&rates));
    }
    Ok(s)
}
