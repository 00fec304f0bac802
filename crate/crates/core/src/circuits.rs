//! Compilation of states and measurements into `{U3, CX, measure}` circuits.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::discrimination::OutcomeRule;
use crate::qmath::{
    c, complement, fix_phase, mat_adjoint, mat_mul, mat_trace, schmidt_decompose, u3_params,
    Complex, Matrix2, PureState, QMathError, U3Params, Unitary2,
};

/// Tolerance below which a local gate is dropped as identity.
const IDENTITY_TOL: f64 = 1e-12;

/// Conditional branch norms below this are treated as empty.
const DEGENERATE_BRANCH: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("qubit {index} out of range for a {num_qubits}-qubit circuit")]
    QubitOutOfRange { index: usize, num_qubits: usize },
    #[error("clbit {index} out of range for {num_clbits} classical bits")]
    ClbitOutOfRange { index: usize, num_clbits: usize },
    #[error("cx control and target are both qubit {0}")]
    SameControlTarget(usize),
    #[error("gate on qubit {0} after it was measured")]
    GateAfterMeasure(usize),
    #[error("states are not orthogonal (|overlap| = {0:e})")]
    NotOrthogonal(f64),
    #[error("matrix is not traceless (|trace| = {0:e})")]
    NotTraceless(f64),
    #[error("outcome rule must be the two-bit parity rule")]
    UnsupportedRule,
    #[error("circuit widths differ: {0} vs {1} qubits")]
    WidthMismatch(usize, usize),
    #[error(transparent)]
    Math(#[from] QMathError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "gate", rename_all = "snake_case")]
pub enum Gate {
    U3 { params: U3Params, target: usize },
    Cx { control: usize, target: usize },
    Measure { qubit: usize, clbit: usize },
}

impl Gate {
    pub fn u3(params: U3Params, target: usize) -> Gate {
        Gate::U3 { params, target }
    }

    pub fn is_unitary(&self) -> bool {
        !matches!(self, Gate::Measure { .. })
    }

    /// Same gate kind and operands, angles within `tol` (global phase ignored).
    pub fn approx_eq(&self, other: &Gate, tol: f64) -> bool {
        match (self, other) {
            (Gate::U3 { params: a, target: t }, Gate::U3 { params: b, target: s }) => {
                t == s && a.angles_close(b, tol)
            }
            _ => self == other,
        }
    }
}

/// An ordered gate list over `num_qubits` qubits and `num_clbits` classical bits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    num_qubits: usize,
    num_clbits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(num_qubits: usize, num_clbits: usize) -> Self {
        Circuit {
            num_qubits,
            num_clbits,
            gates: Vec::new(),
        }
    }

    pub fn from_gates(
        num_qubits: usize,
        num_clbits: usize,
        gates: impl IntoIterator<Item = Gate>,
    ) -> Result<Self, CircuitError> {
        let mut circuit = Circuit::new(num_qubits, num_clbits);
        for g in gates {
            circuit.push(g)?;
        }
        Ok(circuit)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_clbits(&self) -> usize {
        self.num_clbits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    fn check_qubit(&self, q: usize) -> Result<(), CircuitError> {
        if q >= self.num_qubits {
            return Err(CircuitError::QubitOutOfRange {
                index: q,
                num_qubits: self.num_qubits,
            });
        }
        if self.is_measured(q) {
            return Err(CircuitError::GateAfterMeasure(q));
        }
        Ok(())
    }

    pub fn is_measured(&self, qubit: usize) -> bool {
        self.gates
            .iter()
            .any(|g| matches!(g, Gate::Measure { qubit: q, .. } if *q == qubit))
    }

    pub fn push(&mut self, gate: Gate) -> Result<(), CircuitError> {
        match gate {
            Gate::U3 { target, .. } => self.check_qubit(target)?,
            Gate::Cx { control, target } => {
                if control == target {
                    return Err(CircuitError::SameControlTarget(control));
                }
                self.check_qubit(control)?;
                self.check_qubit(target)?;
            }
            Gate::Measure { qubit, clbit } => {
                self.check_qubit(qubit)?;
                if clbit >= self.num_clbits {
                    return Err(CircuitError::ClbitOutOfRange {
                        index: clbit,
                        num_clbits: self.num_clbits,
                    });
                }
            }
        }
        self.gates.push(gate);
        Ok(())
    }

    /// Pushes `u` on `target` unless it is the identity up to phase.
    pub fn push_unitary(&mut self, u: &Unitary2, target: usize) -> Result<(), CircuitError> {
        if u.is_identity_up_to_phase(IDENTITY_TOL) {
            self.check_qubit(target)?;
            return Ok(());
        }
        self.push(Gate::u3(u3_params(u), target))
    }

    pub fn u3(&mut self, theta: f64, phi: f64, lam: f64, target: usize) -> Result<(), CircuitError> {
        self.push(Gate::u3(U3Params::new(theta, phi, lam), target))
    }

    pub fn cx(&mut self, control: usize, target: usize) -> Result<(), CircuitError> {
        self.push(Gate::Cx { control, target })
    }

    pub fn measure(&mut self, qubit: usize, clbit: usize) -> Result<(), CircuitError> {
        self.push(Gate::Measure { qubit, clbit })
    }

    /// Appends `other` gate by gate; widths must match.
    pub fn append(&mut self, other: &Circuit) -> Result<(), CircuitError> {
        if other.num_qubits != self.num_qubits {
            return Err(CircuitError::WidthMismatch(self.num_qubits, other.num_qubits));
        }
        self.num_clbits = self.num_clbits.max(other.num_clbits);
        for g in &other.gates {
            self.push(*g)?;
        }
        Ok(())
    }

    /// Copy of `self` with every qubit index sent through `map` and a new width.
    pub fn remap(&self, num_qubits: usize, map: &[usize]) -> Result<Circuit, CircuitError> {
        let m = |q: usize| -> Result<usize, CircuitError> {
            map.get(q).copied().ok_or(CircuitError::QubitOutOfRange {
                index: q,
                num_qubits: map.len(),
            })
        };
        let mut out = Circuit::new(num_qubits, self.num_clbits);
        for g in &self.gates {
            let g = match *g {
                Gate::U3 { params, target } => Gate::U3 {
                    params,
                    target: m(target)?,
                },
                Gate::Cx { control, target } => Gate::Cx {
                    control: m(control)?,
                    target: m(target)?,
                },
                Gate::Measure { qubit, clbit } => Gate::Measure {
                    qubit: m(qubit)?,
                    clbit,
                },
            };
            out.push(g)?;
        }
        Ok(out)
    }

    pub fn count_u3(&self) -> usize {
        self.gates.iter().filter(|g| matches!(g, Gate::U3 { .. })).count()
    }

    pub fn count_cx(&self) -> usize {
        self.gates.iter().filter(|g| matches!(g, Gate::Cx { .. })).count()
    }

    pub fn count_measure(&self) -> usize {
        self.gates.iter().filter(|g| !g.is_unitary()).count()
    }

    /// `(qubit, clbit)` pairs of all measurements, in order.
    pub fn measurements(&self) -> Vec<(usize, usize)> {
        self.gates
            .iter()
            .filter_map(|g| match *g {
                Gate::Measure { qubit, clbit } => Some((qubit, clbit)),
                _ => None,
            })
            .collect()
    }

    /// The circuit with measurements removed.
    pub fn unitary_part(&self) -> Circuit {
        Circuit {
            num_qubits: self.num_qubits,
            num_clbits: self.num_clbits,
            gates: self.gates.iter().copied().filter(Gate::is_unitary).collect(),
        }
    }
}

/// Prepares a one-qubit state from `|0⟩` with at most one U3.
pub fn prep_1q(target: &PureState) -> Result<Circuit, CircuitError> {
    let v = fix_phase(target.as_qubit()?);
    let u = Unitary2::from_columns(v, complement(v))?;
    let mut circuit = Circuit::new(1, 1);
    circuit.push_unitary(&u, 0)?;
    Ok(circuit)
}

/// Prepares a two-qubit state from `|00⟩`: load the Schmidt weights on qubit 0,
/// entangle with one CX, then rotate each side into its Schmidt basis.
pub fn prep_2q(target: &PureState) -> Result<Circuit, CircuitError> {
    let s = schmidt_decompose(target)?;
    let mut circuit = Circuit::new(2, 2);
    if s.coeffs[1] > IDENTITY_TOL {
        let theta = 2.0 * s.coeffs[1].atan2(s.coeffs[0]);
        circuit.push(Gate::u3(U3Params::new(theta, 0.0, 0.0), 0))?;
        circuit.cx(0, 1)?;
    }
    circuit.push_unitary(&s.local_a, 0)?;
    circuit.push_unitary(&s.local_b, 1)?;
    Ok(circuit)
}

/// Unitary sending `first → |0⟩` and `second → |1⟩`. `second` is replaced by
/// the exact orthogonal complement of `first`, phase-aligned to it.
fn basis_change(first: [Complex; 2], second: [Complex; 2]) -> Result<Unitary2, CircuitError> {
    let mut perp = complement(first);
    let overlap = perp[0].conj() * second[0] + perp[1].conj() * second[1];
    if overlap.norm() > 0.0 {
        let ph = overlap / overlap.norm();
        perp = [perp[0] * ph, perp[1] * ph];
    }
    Ok(Unitary2::from_columns(first, perp)?.adjoint())
}

/// Rotates `m_u → |0⟩`, `m_v → |1⟩` and measures.
pub fn measure_basis_1q(m_u: &PureState, m_v: &PureState) -> Result<Circuit, CircuitError> {
    let (a, b) = (m_u.as_qubit()?, m_v.as_qubit()?);
    let overlap = m_u.inner(m_v).norm();
    if overlap > 1e-9 {
        return Err(CircuitError::NotOrthogonal(overlap));
    }
    let mut circuit = Circuit::new(1, 1);
    circuit.push_unitary(&basis_change(a, b)?, 0)?;
    circuit.measure(0, 0)?;
    Ok(circuit)
}

/// Finds `V` with zero diagonal in `V m V†` for a traceless `m`.
///
/// Splits `m = H + iK` into Hermitian parts with Bloch vectors `h`, `k`; the
/// first row of `V` is the state whose Bloch vector is orthogonal to both.
pub fn zero_diagonal_conjugation(m: &Matrix2) -> Result<Unitary2, CircuitError> {
    let tr = mat_trace(m).norm();
    if tr > 1e-9 {
        return Err(CircuitError::NotTraceless(tr));
    }
    if m[0][0].norm() <= 1e-12 && m[1][1].norm() <= 1e-12 {
        return Ok(Unitary2::identity());
    }
    let md = mat_adjoint(m);
    let half = c(0.5, 0.0);
    let herm = |a: Complex, b: Complex| (a + b) * half;
    let anti = |a: Complex, b: Complex| (a - b) * c(0.0, -0.5);
    let hm = [
        [herm(m[0][0], md[0][0]), herm(m[0][1], md[0][1])],
        [herm(m[1][0], md[1][0]), herm(m[1][1], md[1][1])],
    ];
    let km = [
        [anti(m[0][0], md[0][0]), anti(m[0][1], md[0][1])],
        [anti(m[1][0], md[1][0]), anti(m[1][1], md[1][1])],
    ];
    // Traceless Hermitian [[z, x - iy], [x + iy, -z]] ↦ (x, y, z).
    let bloch = |a: &Matrix2| -> [f64; 3] {
        [a[1][0].re, a[1][0].im, (a[0][0].re - a[1][1].re) / 2.0]
    };
    let (h, k) = (bloch(&hm), bloch(&km));
    let cross = [
        h[1] * k[2] - h[2] * k[1],
        h[2] * k[0] - h[0] * k[2],
        h[0] * k[1] - h[1] * k[0],
    ];
    let norm = |v: [f64; 3]| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    let r = if norm(cross) > 1e-12 * norm(h).max(norm(k)).max(1e-300) {
        cross
    } else {
        // h and k are parallel: any direction perpendicular to the larger one.
        let a = if norm(h) >= norm(k) { h } else { k };
        let t = if a[1].abs() <= a[0].abs() && a[1].abs() <= a[2].abs() {
            [0.0, 1.0, 0.0]
        } else if a[0].abs() <= a[2].abs() {
            [1.0, 0.0, 0.0]
        } else {
            [0.0, 0.0, 1.0]
        };
        [
            t[1] * a[2] - t[2] * a[1],
            t[2] * a[0] - t[0] * a[2],
            t[0] * a[1] - t[1] * a[0],
        ]
    };
    let n = norm(r);
    let (x, y, z) = (r[0] / n, r[1] / n, r[2] / n);
    let polar = z.clamp(-1.0, 1.0).acos();
    let azimuth = y.atan2(x);
    let state = [
        c((polar / 2.0).cos(), 0.0),
        crate::qmath::cis(azimuth) * (polar / 2.0).sin(),
    ];
    // Rows of V are ⟨x| and ⟨x⊥|.
    Ok(Unitary2::from_columns(state, complement(state))?.adjoint())
}

/// Controlled-`u` (control qubit 0, target qubit 1) as `A·CX·B·CX·C` plus a
/// phase on the control, using at most two CX gates.
pub fn controlled_u_decompose(u: &Unitary2) -> Result<Circuit, CircuitError> {
    let p = u3_params(u);
    let mut circuit = Circuit::new(2, 0);
    let control_phase = Unitary2::phase(p.global_phase);
    if u.is_identity_up_to_phase(IDENTITY_TOL) {
        circuit.push_unitary(&control_phase, 0)?;
        return Ok(circuit);
    }
    if u.distance_up_to_phase(&Unitary2::pauli_x()) <= IDENTITY_TOL {
        // u = e^{iα}X; compute α directly from the off-diagonal.
        let alpha = u.get(1, 0).arg();
        circuit.cx(0, 1)?;
        circuit.push_unitary(&Unitary2::phase(alpha), 0)?;
        return Ok(circuit);
    }
    // u = e^{iα} Rz(φ) Ry(θ) Rz(λ).
    let a = Unitary2::from_u3(p.theta / 2.0, p.phi, 0.0);
    let b = Unitary2::from_u3(-p.theta / 2.0, 0.0, -(p.lam + p.phi) / 2.0);
    let cc = Unitary2::from_u3(0.0, 0.0, (p.lam - p.phi) / 2.0);
    circuit.push_unitary(&cc, 1)?;
    circuit.cx(0, 1)?;
    circuit.push_unitary(&b, 1)?;
    circuit.cx(0, 1)?;
    circuit.push_unitary(&a, 1)?;
    circuit.push_unitary(&control_phase, 0)?;
    Ok(circuit)
}

/// Unitary sending `cond_v → |k⟩` and `cond_u → |1⊕k⟩`, ignoring branches
/// that are empty for one or both states.
fn branch_unitary(
    cond_u: [Complex; 2],
    cond_v: [Complex; 2],
    k: usize,
) -> Result<Unitary2, CircuitError> {
    let norm = |v: [Complex; 2]| (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    let unit = |v: [Complex; 2]| {
        let n = norm(v);
        [v[0] / n, v[1] / n]
    };
    let (nu, nv) = (norm(cond_u), norm(cond_v));
    // Basis change sending (first → |0⟩, second → |1⟩), then swap for k = 0.
    let to_v_first = match (nv >= DEGENERATE_BRANCH, nu >= DEGENERATE_BRANCH) {
        (true, true) | (true, false) => {
            let v = unit(cond_v);
            let u = if nu >= DEGENERATE_BRANCH {
                unit(cond_u)
            } else {
                complement(v)
            };
            basis_change(v, u)?
        }
        (false, true) => {
            let u = unit(cond_u);
            basis_change(complement(u), u)?
        }
        (false, false) => return Ok(Unitary2::identity()),
    };
    // to_v_first sends v → |0⟩, u → |1⟩; that is the k = 0 target.
    Ok(if k == 0 {
        to_v_first
    } else {
        Unitary2::pauli_x() * to_v_first
    })
}

/// Local discrimination circuit for two orthogonal two-qubit states: `s_u`
/// yields odd-parity outcomes, `s_v` even-parity outcomes.
pub fn walgate_measurement_circuit(
    s_u: &PureState,
    s_v: &PureState,
    rule: &OutcomeRule,
) -> Result<Circuit, CircuitError> {
    if *rule != OutcomeRule::parity(2) {
        return Err(CircuitError::UnsupportedRule);
    }
    let p = s_u.amplitude_matrix()?;
    let q = s_v.amplitude_matrix()?;
    let overlap = s_u.inner(s_v).norm();
    if overlap > 1e-9 {
        return Err(CircuitError::NotOrthogonal(overlap));
    }
    let m = mat_mul(&p, &mat_adjoint(&q));
    let va = zero_diagonal_conjugation(&m)?;
    let p2 = mat_mul(va.entries(), &p);
    let q2 = mat_mul(va.entries(), &q);
    let vb0 = branch_unitary(p2[0], q2[0], 0)?;
    let vb1 = branch_unitary(p2[1], q2[1], 1)?;

    let mut circuit = Circuit::new(2, 2);
    circuit.push_unitary(&va, 0)?;
    circuit.push_unitary(&vb0, 1)?;
    circuit.append(&controlled_u_decompose(&(vb1 * vb0.adjoint()))?)?;
    circuit.measure(0, 0)?;
    circuit.measure(1, 1)?;
    Ok(circuit)
}

/// Single-qubit gate for an oracle slot, or `None` for the identity (no gates).
pub fn oracle_gate(u: &Unitary2) -> Option<Gate> {
    (!u.is_identity_up_to_phase(IDENTITY_TOL)).then(|| Gate::u3(u3_params(u), 0))
}
