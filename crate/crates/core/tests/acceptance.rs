//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use unidisc::circuits::{walgate_measurement_circuit, Circuit, Gate};
use unidisc::discrimination::{analyze, synthesize_sequential, OutcomeRule, Truth};
use unidisc::harness::{
    fit_noise, run_experiment, ExperimentConfig, FitSettings, FitTargets, GateSpec, SchemeCircuits,
    SchemeKind,
};
use unidisc::qasm::{emit, parse};
use unidisc::qmath::{schmidt_decompose, u3_params, PureState, U3Params, Unitary2};
use unidisc::sim::{apply_circuit, success_probability, NoiseModel};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn r() -> Unitary2 {
    Unitary2::phase(2.0 * PI / 3.0)
}

fn reference_gates() -> (GateSpec, GateSpec) {
    (GateSpec::R(2.0 * PI / 3.0), GateSpec::Id)
}

fn within(limit: Duration, start: Instant) -> (bool, String) {
    let t = start.elapsed();
    (t < limit, format!("{:.2}s of {}s", t.as_secs_f64(), limit.as_secs()))
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rates = Vec::new();
    for kind in SchemeKind::ALL {
        let c = SchemeCircuits::build(kind, &r(), &Unitary2::identity()).unwrap();
        for t in [Truth::FirstGate, Truth::SecondGate] {
            let p = success_probability(c.circuit(t), &c.rule, t, 10_000, &NoiseModel::noiseless(), 1)
                .unwrap();
            rates.push(p);
        }
    }
    let (fast, time) = within(Duration::from_secs(5), start);
    outcome(
        rates.iter().all(|&p| p == 1.0) && fast,
        format!("rates {rates:?}, {time}"),
    )
}

fn criterion_2() -> Outcome {
    let (a, b) = (1.0 / 3f64.sqrt(), 1.0 / 6f64.sqrt());
    let psi = PureState::new(vec![C::new(a, 0.0), C::new(-b, 0.0), C::new(b, 0.0), C::new(a, 0.0)])
        .unwrap();
    let orth = psi.inner(&psi.apply_all(&r())).norm();

    let (x0, x1) = ((2.0f64 / 3.0).sqrt(), 1.0 / 3f64.sqrt());
    let reference_x = [[C::new(x0, 0.0), C::new(-x1, 0.0)], [C::new(x1, 0.0), C::new(x0, 0.0)]];
    let (s3, s6, s2) = (3f64.sqrt(), 6f64.sqrt(), 2f64.sqrt());
    let reference_w = [
        [C::new(0.5, s3 / 6.0), C::new(0.0, -s6 / 3.0)],
        [C::new(-s2 / 2.0, s6 / 6.0), C::new(-0.5, -s3 / 6.0)],
    ];
    let seq = synthesize_sequential(&r(), &Unitary2::identity()).unwrap();
    let mut dx: f64 = 0.0;
    let mut dw: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            dx = dx.max((seq.aux.get(i, j) - reference_x[i][j]).norm());
            dw = dw.max((seq.w.get(i, j) - reference_w[i][j]).norm());
        }
    }
    let tr = seq.w.trace().norm();
    outcome(
        orth <= 1e-12 && dx <= 1e-10 && dw <= 1e-10 && tr <= 1e-12,
        format!("|<Psi|R⊗R|Psi>| = {orth:.1e}, X err {dx:.1e}, W err {dw:.1e}, |Tr W| = {tr:.1e}"),
    )
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let n = analyze(&Unitary2::identity(), &r()).min_parallel_copies;
    let mut min = f64::INFINITY;
    for i in 0..100 {
        for j in 0..100 {
            let theta = PI * i as f64 / 99.0;
            let phi = 2.0 * PI * j as f64 / 100.0;
            let s = PureState::qubit([
                C::new((theta / 2.0).cos(), 0.0),
                C::from_polar((theta / 2.0).sin(), phi),
            ])
            .unwrap();
            let moved = PureState::qubit(r().apply(s.as_qubit().unwrap())).unwrap();
            min = min.min(s.inner(&moved).norm());
        }
    }
    let (fast, time) = within(Duration::from_secs(10), start);
    outcome(
        n == Some(2) && min > 0.49 && fast,
        format!("N = {n:?}, single-copy grid min overlap {min:.4}, {time}"),
    )
}

fn reference_targets() -> FitTargets {
    let (u, v) = reference_gates();
    FitTargets {
        gate_u: u,
        gate_v: v,
        parallel_first: 834.0 / 1024.0,
        parallel_second: 875.0 / 1024.0,
        sequential_first: 857.0 / 1024.0,
        sequential_second: 1007.0 / 1024.0,
    }
}

fn criterion_4() -> (Outcome, NoiseModel) {
    let start = Instant::now();
    let fit = fit_noise(&reference_targets(), &FitSettings::default()).unwrap();
    let (fast, time) = within(Duration::from_secs(600), start);
    let p = fit.predictions;
    let seq_i_best = p[3] >= p[0] && p[3] >= p[1] && p[3] >= p[2];
    let m = fit.model;
    (
        outcome(
            fit.rms <= 0.05 && seq_i_best && fast,
            format!(
                "model p1={} p2={} eps={}, rms {:.4}, predictions {:.4?}, {time}",
                m.p1, m.p2, m.readout_eps, fit.rms, p
            ),
        ),
        fit.model,
    )
}

fn criterion_5(model: NoiseModel) -> Outcome {
    let (u, v) = reference_gates();
    let mut cfg = ExperimentConfig::new(u, v);
    cfg.noise = model;
    let (mut par, mut seq) = (0.0, 0.0);
    for rep in 0..20u64 {
        cfg.seed = 1000 + rep;
        let report = run_experiment(&cfg).unwrap();
        for s in &report.schemes {
            match s.scheme {
                SchemeKind::Parallel => par += s.stats.stddev / 20.0,
                SchemeKind::Sequential => seq += s.stats.stddev / 20.0,
            }
        }
    }
    outcome(
        seq > par,
        format!("mean stddev sequential {seq:.4} vs parallel {par:.4}"),
    )
}

fn random_state2(rng: &mut ChaCha8Rng) -> PureState {
    loop {
        let amps: Vec<C> = (0..4)
            .map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        if let Ok(s) = PureState::normalized(amps) {
            return s;
        }
    }
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let rule = OutcomeRule::parity(2);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let a = random_state2(&mut rng);
        let b = loop {
            let c = random_state2(&mut rng);
            let ov = a.inner(&c);
            let amps: Vec<C> = c.amplitudes().iter().zip(a.amplitudes()).map(|(y, x)| y - x * ov).collect();
            if let Ok(s) = PureState::normalized(amps) {
                break s;
            }
        };
        let circ = walgate_measurement_circuit(&a, &b, &rule).unwrap();
        for (s, accept) in [(&a, &rule.accept_u), (&b, &rule.accept_v)] {
            let out = apply_circuit(s, &circ.unitary_part()).unwrap();
            let leak: f64 = out
                .amplitudes()
                .iter()
                .enumerate()
                .filter(|(i, _)| !accept.contains(&format!("{i:02b}")))
                .map(|(_, z)| z.norm_sqr())
                .sum();
            worst = worst.max(leak);
        }
    }
    let (fast, time) = within(Duration::from_secs(5), start);
    outcome(worst <= 1e-9 && fast, format!("worst misclassification {worst:.1e}, {time}"))
}

fn random_circuit(rng: &mut ChaCha8Rng) -> Circuit {
    let mut c = Circuit::new(3, 3);
    let mut measured = [false; 3];
    for _ in 0..rng.gen_range(0..25) {
        let (a, b) = (rng.gen_range(0..3), rng.gen_range(0..3));
        if measured[a] {
            continue;
        }
        match rng.gen_range(0..3) {
            0 => {
                let scale = 10f64.powi(-rng.gen_range(0..20));
                let p = U3Params::new(
                    rng.gen_range(-7.0..7.0) * scale,
                    rng.gen_range(-7.0..7.0),
                    rng.gen_range(-7.0..7.0),
                );
                c.push(Gate::u3(p, a)).unwrap();
            }
            1 if a != b && !measured[b] => c.cx(a, b).unwrap(),
            1 => {}
            _ => {
                c.measure(a, b).unwrap();
                measured[a] = true;
            }
        }
    }
    c
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut ok, mut deterministic) = (0, true);
    for _ in 0..1000 {
        let c = random_circuit(&mut rng);
        let text = emit(&c, 5, &[0, 1, 2]).unwrap();
        deterministic &= text == emit(&c, 5, &[0, 1, 2]).unwrap();
        let p = parse(&text).unwrap();
        let logical: Vec<usize> = p.qubit_map.clone();
        let back: Vec<Gate> = p
            .circuit
            .gates()
            .iter()
            .map(|g| match *g {
                Gate::U3 { params, target } => Gate::U3 { params, target: logical[target] },
                Gate::Cx { control, target } => Gate::Cx { control: logical[control], target: logical[target] },
                Gate::Measure { qubit, clbit } => Gate::Measure { qubit: logical[qubit], clbit: logical[clbit] },
            })
            .collect();
        if back.len() == c.gates().len() && back.iter().zip(c.gates()).all(|(x, y)| x.approx_eq(y, 1e-12)) {
            ok += 1;
        }
    }
    outcome(
        ok == 1000 && deterministic,
        format!("{ok}/1000 round-trips, byte-deterministic: {deterministic}"),
    )
}

fn random_unitary(rng: &mut ChaCha8Rng) -> Unitary2 {
    Unitary2::from_u3(
        rng.gen_range(0.0..PI),
        rng.gen_range(-PI..PI),
        rng.gen_range(-PI..PI),
    )
    .scaled(C::from_polar(1.0, rng.gen_range(-PI..PI)))
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut unit, mut norm, mut schmidt, mut u3): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..1000 {
        let (a, b) = (random_unitary(&mut rng), random_unitary(&mut rng));
        unit = unit.max((a * b).unitarity_error());

        let p = u3_params(&a);
        u3 = u3.max(p.gate().scaled(C::from_polar(1.0, p.global_phase)).max_abs_diff(&a));

        let s = random_state2(&mut rng);
        schmidt = schmidt.max(schmidt_decompose(&s).unwrap().reassemble().distance_up_to_phase(&s));

        let mut c = Circuit::new(3, 0);
        for _ in 0..100 {
            let (q, t) = (rng.gen_range(0..3), rng.gen_range(0..3));
            if rng.gen_bool(0.3) && q != t {
                c.cx(q, t).unwrap();
            } else {
                c.push_unitary(&random_unitary(&mut rng), q).unwrap();
            }
        }
        let out = apply_circuit(&PureState::zero(3).unwrap(), &c).unwrap();
        norm = norm.max((out.norm() - 1.0).abs());
    }
    let (fast, time) = within(Duration::from_secs(10), start);
    outcome(
        unit <= 1e-10 && norm <= 1e-12 && schmidt <= 1e-10 && u3 <= 1e-10 && fast,
        format!(
            "unitarity {unit:.1e}, norm {norm:.1e}, Schmidt {schmidt:.1e}, U3 {u3:.1e}, {time}"
        ),
    )
}

fn main() {
    let mut results: Vec<(u32, &str, Outcome)> = vec![
        (1, "scheme correctness", criterion_1()),
        (2, "reference-state validation", criterion_2()),
        (3, "minimal copies", criterion_3()),
    ];
    let (c4, model) = criterion_4();
    results.push((4, "hardware-statistics reproduction", c4));
    results.push((5, "variability ordering", criterion_5(model)));
    results.push((6, "walgate synthesis", criterion_6()));
    results.push((7, "qasm round-trip", criterion_7()));
    results.push((8, "numerics suite", criterion_8()));

    let mut failed = 0;
    for (n, name, o) in &results {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {n} ({name}): {tag} - {}", o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
