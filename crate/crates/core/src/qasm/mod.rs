//! OpenQASM 2.0 export and import for `{u3, cx, measure}` circuits.
//!
//! Emitted documents always declare device-sized registers:
//!
//! ```text
//! OPENQASM 2.0;
//! include "qelib1.inc";
//! qreg q[5];
//! creg c[5];
//! u3(1.5707963267949,0,3.14159265358979) q[0];
//! cx q[0],q[1];
//! measure q[0] -> c[0];
//! ```
//!
//! Angles are radians printed like C's `%.15g`. Logical qubit `i` is written
//! as physical qubit `qubit_map[i]`, and a measurement into clbit `k` targets
//! `c[qubit_map[k]]`.

mod lexer;
mod parser;

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

pub use lexer::Pos;

use crate::circuits::{Circuit, CircuitError, Gate};
use crate::qmath::U3Params;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QasmError {
    #[error("syntax error at {pos}: {message}")]
    SyntaxError { pos: Pos, message: String },
    #[error("unsupported gate `{name}` at {pos}")]
    UnsupportedGate { name: String, pos: Pos },
    #[error("register mismatch at {pos}: {message}")]
    RegisterMismatch { pos: Pos, message: String },
    #[error("qubit map is invalid: {0}")]
    MapOutOfRange(String),
    #[error("angle {0} is not finite")]
    NonFiniteAngle(f64),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

impl QasmError {
    pub(crate) fn syntax(pos: Pos, message: impl Into<String>) -> Self {
        QasmError::SyntaxError {
            pos,
            message: message.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Register {
    pub name: String,
    pub size: usize,
}

/// One statement with physical operand indices.
#[derive(Clone, Debug, PartialEq)]
pub enum Statement {
    U3 { angles: [f64; 3], qubit: usize },
    Cx { control: usize, target: usize },
    Measure { qubit: usize, clbit: usize },
}

/// A parsed or to-be-emitted program.
#[derive(Clone, Debug, PartialEq)]
pub struct QasmDocument {
    pub version: String,
    pub includes: Vec<String>,
    pub qreg: Register,
    pub creg: Option<Register>,
    pub statements: Vec<Statement>,
}

/// A circuit recovered from QASM together with its device placement.
#[derive(Clone, Debug, PartialEq)]
pub struct ParsedCircuit {
    pub circuit: Circuit,
    pub device_qubits: usize,
    /// Physical index of each logical qubit (ascending).
    pub qubit_map: Vec<usize>,
}

/// Formats like C's `%.15g`: 15 significant digits, trailing zeros removed,
/// exponent form only below 1e-4 or from 1e15 up.
pub fn format_angle(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{x:.14e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..15).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (14 - exp) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

impl QasmDocument {
    /// Places `circuit` on a `device_qubits`-wide device.
    pub fn from_circuit(
        circuit: &Circuit,
        device_qubits: usize,
        qubit_map: &[usize],
    ) -> Result<Self, QasmError> {
        let needed = circuit.num_qubits().max(circuit.num_clbits());
        if device_qubits < circuit.num_qubits() {
            return Err(QasmError::MapOutOfRange(format!(
                "device has {device_qubits} qubits, circuit needs {}",
                circuit.num_qubits()
            )));
        }
        if qubit_map.len() < needed {
            return Err(QasmError::MapOutOfRange(format!(
                "map has {} entries, circuit needs {needed}",
                qubit_map.len()
            )));
        }
        let mut seen = BTreeSet::new();
        for &p in qubit_map {
            if p >= device_qubits {
                return Err(QasmError::MapOutOfRange(format!(
                    "physical qubit {p} outside device of {device_qubits}"
                )));
            }
            if !seen.insert(p) {
                return Err(QasmError::MapOutOfRange(format!("physical qubit {p} mapped twice")));
            }
        }
        let statements = circuit
            .gates()
            .iter()
            .map(|g| match *g {
                Gate::U3 { params, target } => {
                    for a in [params.theta, params.phi, params.lam] {
                        if !a.is_finite() {
                            return Err(QasmError::NonFiniteAngle(a));
                        }
                    }
                    Ok(Statement::U3 {
                        angles: [params.theta, params.phi, params.lam],
                        qubit: qubit_map[target],
                    })
                }
                Gate::Cx { control, target } => Ok(Statement::Cx {
                    control: qubit_map[control],
                    target: qubit_map[target],
                }),
                Gate::Measure { qubit, clbit } => Ok(Statement::Measure {
                    qubit: qubit_map[qubit],
                    clbit: qubit_map[clbit],
                }),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(QasmDocument {
            version: "2.0".into(),
            includes: vec!["qelib1.inc".into()],
            qreg: Register {
                name: "q".into(),
                size: device_qubits,
            },
            creg: Some(Register {
                name: "c".into(),
                size: device_qubits,
            }),
            statements,
        })
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let q = &self.qreg.name;
        let _ = writeln!(out, "OPENQASM {};", self.version);
        for inc in &self.includes {
            let _ = writeln!(out, "include \"{inc}\";");
        }
        let _ = writeln!(out, "qreg {q}[{}];", self.qreg.size);
        let cname = self.creg.as_ref().map_or("c", |c| c.name.as_str());
        if let Some(c) = &self.creg {
            let _ = writeln!(out, "creg {}[{}];", c.name, c.size);
        }
        for st in &self.statements {
            let _ = match st {
                Statement::U3 { angles, qubit } => writeln!(
                    out,
                    "u3({},{},{}) {q}[{qubit}];",
                    format_angle(angles[0]),
                    format_angle(angles[1]),
                    format_angle(angles[2])
                ),
                Statement::Cx { control, target } => {
                    writeln!(out, "cx {q}[{control}],{q}[{target}];")
                }
                Statement::Measure { qubit, clbit } => {
                    writeln!(out, "measure {q}[{qubit}] -> {cname}[{clbit}];")
                }
            };
        }
        out
    }

    /// Recovers the logical circuit. Logical indices enumerate the used
    /// physical indices (qubits and clbits together) in ascending order.
    pub fn to_circuit(&self) -> Result<ParsedCircuit, QasmError> {
        let mut used = BTreeSet::new();
        for st in &self.statements {
            match *st {
                Statement::U3 { qubit, .. } => {
                    used.insert(qubit);
                }
                Statement::Cx { control, target } => {
                    used.insert(control);
                    used.insert(target);
                }
                Statement::Measure { qubit, clbit } => {
                    used.insert(qubit);
                    used.insert(clbit);
                }
            }
        }
        let qubit_map: Vec<usize> = used.into_iter().collect();
        let logical = |p: usize| qubit_map.binary_search(&p).expect("collected above");
        let n = qubit_map.len();
        let gates = self.statements.iter().map(|st| match *st {
            Statement::U3 { angles, qubit } => Gate::u3(
                U3Params::new(angles[0], angles[1], angles[2]),
                logical(qubit),
            ),
            Statement::Cx { control, target } => Gate::Cx {
                control: logical(control),
                target: logical(target),
            },
            Statement::Measure { qubit, clbit } => Gate::Measure {
                qubit: logical(qubit),
                clbit: logical(clbit),
            },
        });
        let circuit = Circuit::from_gates(n, n, gates)?;
        Ok(ParsedCircuit {
            circuit,
            device_qubits: self.qreg.size,
            qubit_map,
        })
    }
}

/// Serializes `circuit` for a `device_qubits`-wide device.
pub fn emit(circuit: &Circuit, device_qubits: usize, qubit_map: &[usize]) -> Result<String, QasmError> {
    Ok(QasmDocument::from_circuit(circuit, device_qubits, qubit_map)?.render())
}

pub fn parse_document(text: &str) -> Result<QasmDocument, QasmError> {
    parser::Parser::new(text)?.document()
}

pub fn parse(text: &str) -> Result<ParsedCircuit, QasmError> {
    parse_document(text)?.to_circuit()
}

/// Evaluates a standalone angle expression such as `2*pi/3`.
pub fn parse_angle(text: &str) -> Result<f64, QasmError> {
    let mut p = parser::Parser::new(text)?;
    let v = p.expr()?;
    p.expect_eof()?;
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn angle_format() {
        assert_eq!(format_angle(PI / 2.0), "1.5707963267949");
        assert_eq!(format_angle(PI), "3.14159265358979");
        assert_eq!(format_angle(0.0), "0");
        assert_eq!(format_angle(-0.0), "0");
        assert_eq!(format_angle(1e-3), "0.001");
        assert_eq!(format_angle(2.5e-5), "2.5e-05");
        assert_eq!(format_angle(999.5), "999.5");
        assert_eq!(format_angle(-1.25), "-1.25");
        assert_eq!(format_angle(1e20), "1e+20");
    }

    #[test]
    fn empty_circuit_is_four_lines() {
        let text = emit(&Circuit::new(1, 1), 5, &[0]).unwrap();
        assert_eq!(
            text,
            "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[5];\ncreg c[5];\n"
        );
    }

    #[test]
    fn expression_grammar() {
        let parsed = parse("OPENQASM 2.0;\nqreg q[1];\nu3(pi/2,0,pi) q[0];").unwrap();
        match parsed.circuit.gates()[0] {
            Gate::U3 { params, target } => {
                assert_eq!(target, 0);
                assert!((params.theta - PI / 2.0).abs() < 1e-15);
                assert_eq!(params.phi, 0.0);
                assert!((params.lam - PI).abs() < 1e-15);
            }
            _ => panic!(),
        }
        assert!((parse_angle("-(2*pi)/3 + 1").unwrap() - (1.0 - 2.0 * PI / 3.0)).abs() < 1e-15);
        assert!((parse_angle("--1.5e1").unwrap() - 15.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_unknown_gate() {
        let err = parse("OPENQASM 2.0;\nqreg q[2];\ncz q[0],q[1];").unwrap_err();
        assert!(matches!(err, QasmError::UnsupportedGate { ref name, pos } if name == "cz" && pos.line == 3));
    }

    #[test]
    fn register_errors() {
        let err = parse("OPENQASM 2.0;\nqreg q[2];\ncx q[0],q[2];").unwrap_err();
        assert!(matches!(err, QasmError::RegisterMismatch { .. }));
        let err = parse("OPENQASM 2.0;\nqreg q[2];\ncx r[0],q[1];").unwrap_err();
        assert!(matches!(err, QasmError::RegisterMismatch { .. }));
        let err = parse("OPENQASM 2.0;\nqreg q[2];\nmeasure q[0] -> c[0];").unwrap_err();
        assert!(matches!(err, QasmError::RegisterMismatch { .. }));
        let err = parse("OPENQASM 2.0;\nu3(0,0,0) q[0];").unwrap_err();
        assert!(matches!(err, QasmError::RegisterMismatch { .. }));
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = parse("OPENQASM 2.0;\nqreg q[2];\ncx q[0] q[1];").unwrap_err();
        match err {
            QasmError::SyntaxError { pos, .. } => assert_eq!((pos.line, pos.col), (3, 9)),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("OPENQASM 3.0;"), Err(QasmError::SyntaxError { .. })));
        assert!(matches!(parse_angle("pi/"), Err(QasmError::SyntaxError { .. })));
    }

    #[test]
    fn comments_and_whitespace() {
        let src = "// exported\nOPENQASM 2.0;\n  include \"qelib1.inc\"; // std\n\nqreg q[5];creg c[5];\n\tu3( 0.5 , 0 , 0 )  q[3] ;\nmeasure q[3]->c[3];\n";
        let parsed = parse(src).unwrap();
        assert_eq!(parsed.device_qubits, 5);
        assert_eq!(parsed.qubit_map, vec![3]);
        assert_eq!(parsed.circuit.num_qubits(), 1);
        assert_eq!(parsed.circuit.gates().len(), 2);
    }

    #[test]
    fn emit_validates_map() {
        let mut c = Circuit::new(2, 2);
        c.cx(0, 1).unwrap();
        assert!(matches!(emit(&c, 5, &[0]), Err(QasmError::MapOutOfRange(_))));
        assert!(matches!(emit(&c, 5, &[0, 5]), Err(QasmError::MapOutOfRange(_))));
        assert!(matches!(emit(&c, 5, &[1, 1]), Err(QasmError::MapOutOfRange(_))));
        assert!(matches!(emit(&c, 1, &[0, 1]), Err(QasmError::MapOutOfRange(_))));
        assert_eq!(emit(&c, 5, &[3, 1]).unwrap().lines().last(), Some("cx q[3],q[1];"));
    }
}
