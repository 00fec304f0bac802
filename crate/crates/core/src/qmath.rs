//! Complex linear algebra for single-qubit unitaries and few-qubit pure states.
//!
//! Qubit ordering: qubit 0 is the leftmost tensor factor, i.e. the most
//! significant bit of a basis index. A bitstring `"01"` means qubit 0 reads 0
//! and qubit 1 reads 1.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::ops::Mul;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Complex = num_complex::Complex64;

/// A general 2×2 complex matrix, row-major.
pub type Matrix2 = [[Complex; 2]; 2];

/// Largest register a [`PureState`] may describe.
pub const MAX_QUBITS: usize = 3;

/// Unitarity tolerance enforced when building a [`Unitary2`].
pub const UNITARY_TOL: f64 = 1e-10;

/// Normalization tolerance enforced when building a [`PureState`].
pub const NORM_TOL: f64 = 1e-10;

/// Components smaller than this are treated as exact zeros when fixing phases.
const ZERO_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QMathError {
    #[error("matrix is not unitary (max |U†U - I| = {0:e})")]
    NotUnitary(f64),
    #[error("state is not normalized (|<ψ|ψ> - 1| = {0:e})")]
    NotNormalized(f64),
    #[error("state has zero norm")]
    ZeroNorm,
    #[error("amplitude vector of length {0} is not 2^n for 1 <= n <= {MAX_QUBITS}")]
    BadLength(usize),
    #[error("expected a {expected}-qubit state, got {actual} qubits")]
    WrongQubitCount { expected: usize, actual: usize },
    #[error("qubit index {index} out of range for a {num_qubits}-qubit state")]
    QubitOutOfRange { index: usize, num_qubits: usize },
}

pub(crate) fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

/// `e^{iθ}`.
pub fn cis(theta: f64) -> Complex {
    Complex::from_polar(1.0, theta)
}

/// Reduces an angle to `[0, 2π)`. Values within 1e-12 of 2π snap to 0.
pub fn canonical_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if TAU - r < 1e-12 {
        0.0
    } else {
        r
    }
}

/// Shorter-arc distance between two angles, in `[0, π]`.
pub fn arc_distance(a: f64, b: f64) -> f64 {
    let d = canonical_angle(a - b);
    d.min(TAU - d)
}

/// The unit vector orthogonal to `v` with the standard orientation
/// `(-v₁*, v₀*)`; `[v, complement(v)]` has determinant 1.
pub fn complement(v: [Complex; 2]) -> [Complex; 2] {
    [-v[1].conj(), v[0].conj()]
}

fn norm2(v: [Complex; 2]) -> f64 {
    (v[0].norm_sqr() + v[1].norm_sqr()).sqrt()
}

fn scale2(v: [Complex; 2], s: Complex) -> [Complex; 2] {
    [v[0] * s, v[1] * s]
}

fn inner2(a: [Complex; 2], b: [Complex; 2]) -> Complex {
    a[0].conj() * b[0] + a[1].conj() * b[1]
}

/// Phase factor `f` (|f| = 1) such that `f · z` is real and positive, where
/// `z` is the first component of `v` above the zero threshold.
fn leading_phase(v: &[Complex]) -> Complex {
    v.iter()
        .find(|z| z.norm() > ZERO_TOL)
        .map(|z| z.conj() / z.norm())
        .unwrap_or(Complex::new(1.0, 0.0))
}

/// Rotates the global phase of `v` so the first nonzero component is real positive.
pub fn fix_phase(v: [Complex; 2]) -> [Complex; 2] {
    scale2(v, leading_phase(&v))
}

pub fn mat_mul(a: &Matrix2, b: &Matrix2) -> Matrix2 {
    let mut out = [[Complex::new(0.0, 0.0); 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate() {
            *entry = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn mat_adjoint(a: &Matrix2) -> Matrix2 {
    [
        [a[0][0].conj(), a[1][0].conj()],
        [a[0][1].conj(), a[1][1].conj()],
    ]
}

pub fn mat_trace(a: &Matrix2) -> Complex {
    a[0][0] + a[1][1]
}

/// A 2×2 unitary matrix. Unitarity is checked on construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Unitary2(Matrix2);

impl Unitary2 {
    pub fn new(m: Matrix2) -> Result<Self, QMathError> {
        let u = Unitary2(m);
        let err = u.unitarity_error();
        if err > UNITARY_TOL {
            return Err(QMathError::NotUnitary(err));
        }
        Ok(u)
    }

    /// Builds the unitary whose columns are `a` and `b`.
    pub fn from_columns(a: [Complex; 2], b: [Complex; 2]) -> Result<Self, QMathError> {
        Self::new([[a[0], b[0]], [a[1], b[1]]])
    }

    pub(crate) fn from_columns_unchecked(a: [Complex; 2], b: [Complex; 2]) -> Self {
        Unitary2([[a[0], b[0]], [a[1], b[1]]])
    }

    pub fn identity() -> Self {
        Unitary2([[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]])
    }

    /// `diag(1, e^{iθ})`.
    pub fn phase(theta: f64) -> Self {
        Unitary2([[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), cis(theta)]])
    }

    pub fn hadamard() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Unitary2([[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]])
    }

    pub fn pauli_x() -> Self {
        Unitary2([[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]])
    }

    pub fn pauli_y() -> Self {
        Unitary2([[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]])
    }

    pub fn pauli_z() -> Self {
        Unitary2([[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]])
    }

    /// Real rotation `[[cos α, -sin α], [sin α, cos α]]`.
    pub fn rotation(alpha: f64) -> Self {
        let (s, co) = alpha.sin_cos();
        Unitary2([[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]])
    }

    /// The three-angle gate `U(θ, φ, λ) = Rz(φ) Ry(θ) Rz(λ)` with
    /// `Rz(a) = diag(e^{-ia/2}, e^{ia/2})`.
    pub fn from_u3(theta: f64, phi: f64, lam: f64) -> Self {
        let (s, co) = (theta / 2.0).sin_cos();
        Unitary2([
            [cis(-(phi + lam) / 2.0) * co, -cis(-(phi - lam) / 2.0) * s],
            [cis((phi - lam) / 2.0) * s, cis((phi + lam) / 2.0) * co],
        ])
    }

    pub fn entries(&self) -> &Matrix2 {
        &self.0
    }

    pub fn get(&self, row: usize, col: usize) -> Complex {
        self.0[row][col]
    }

    pub fn column(&self, col: usize) -> [Complex; 2] {
        [self.0[0][col], self.0[1][col]]
    }

    pub fn adjoint(&self) -> Self {
        Unitary2(mat_adjoint(&self.0))
    }

    pub fn trace(&self) -> Complex {
        mat_trace(&self.0)
    }

    pub fn det(&self) -> Complex {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn apply(&self, v: [Complex; 2]) -> [Complex; 2] {
        [
            self.0[0][0] * v[0] + self.0[0][1] * v[1],
            self.0[1][0] * v[0] + self.0[1][1] * v[1],
        ]
    }

    pub fn scaled(&self, phase: Complex) -> Self {
        let m = self.0;
        Unitary2([
            [m[0][0] * phase, m[0][1] * phase],
            [m[1][0] * phase, m[1][1] * phase],
        ])
    }

    /// Largest entry of `|U†U - I|`.
    pub fn unitarity_error(&self) -> f64 {
        let p = mat_mul(&mat_adjoint(&self.0), &self.0);
        let mut err: f64 = 0.0;
        for (i, row) in p.iter().enumerate() {
            for (j, z) in row.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                err = err.max((z - target).norm());
            }
        }
        err
    }

    pub fn max_abs_diff(&self, other: &Unitary2) -> f64 {
        let mut err: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                err = err.max((self.0[i][j] - other.0[i][j]).norm());
            }
        }
        err
    }

    /// Entrywise distance after removing the best global phase.
    pub fn distance_up_to_phase(&self, other: &Unitary2) -> f64 {
        // Tr(A†B) = |Tr| e^{iγ}; align B by e^{-iγ}.
        let t = mat_trace(&mat_mul(&mat_adjoint(&self.0), &other.0));
        let phase = if t.norm() > ZERO_TOL {
            t.conj() / t.norm()
        } else {
            c(1.0, 0.0)
        };
        self.max_abs_diff(&other.scaled(phase))
    }

    pub fn is_identity_up_to_phase(&self, tol: f64) -> bool {
        self.distance_up_to_phase(&Unitary2::identity()) <= tol
    }
}

impl Mul for Unitary2 {
    type Output = Unitary2;

    fn mul(self, rhs: Unitary2) -> Unitary2 {
        Unitary2(mat_mul(&self.0, &rhs.0))
    }
}

impl fmt::Display for Unitary2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = &self.0;
        for (i, row) in m.iter().enumerate() {
            write!(f, "{}", if i == 0 { "[[" } else { " [" })?;
            write!(
                f,
                "{:+.6}{:+.6}i, {:+.6}{:+.6}i",
                row[0].re, row[0].im, row[1].re, row[1].im
            )?;
            write!(f, "{}", if i == 0 { "]\n" } else { "]]" })?;
        }
        Ok(())
    }
}

/// Normalized amplitude vector over 1 to [`MAX_QUBITS`] qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    num_qubits: usize,
    amps: Vec<Complex>,
}

impl PureState {
    pub fn new(amps: Vec<Complex>) -> Result<Self, QMathError> {
        let num_qubits = qubits_for_len(amps.len())?;
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(QMathError::NotNormalized((norm - 1.0).abs()));
        }
        Ok(PureState { num_qubits, amps })
    }

    /// Normalizes `amps` before validating.
    pub fn normalized(amps: Vec<Complex>) -> Result<Self, QMathError> {
        let num_qubits = qubits_for_len(amps.len())?;
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-300 {
            return Err(QMathError::ZeroNorm);
        }
        let amps = amps.into_iter().map(|a| a / norm).collect();
        Ok(PureState { num_qubits, amps })
    }

    pub(crate) fn from_raw(num_qubits: usize, amps: Vec<Complex>) -> Self {
        debug_assert_eq!(amps.len(), 1 << num_qubits);
        PureState { num_qubits, amps }
    }

    pub fn zero(num_qubits: usize) -> Result<Self, QMathError> {
        Self::basis(num_qubits, 0)
    }

    pub fn basis(num_qubits: usize, index: usize) -> Result<Self, QMathError> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(QMathError::BadLength(1 << num_qubits));
        }
        let mut amps = vec![c(0.0, 0.0); 1 << num_qubits];
        amps[index] = c(1.0, 0.0);
        Ok(PureState { num_qubits, amps })
    }

    pub fn qubit(v: [Complex; 2]) -> Result<Self, QMathError> {
        Self::new(v.to_vec())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex] {
        &mut self.amps
    }

    /// The two amplitudes of a single-qubit state.
    pub fn as_qubit(&self) -> Result<[Complex; 2], QMathError> {
        self.expect_qubits(1)?;
        Ok([self.amps[0], self.amps[1]])
    }

    /// The amplitude matrix of a two-qubit state: row = qubit 0, column = qubit 1.
    pub fn amplitude_matrix(&self) -> Result<Matrix2, QMathError> {
        self.expect_qubits(2)?;
        let a = &self.amps;
        Ok([[a[0], a[1]], [a[2], a[3]]])
    }

    pub fn expect_qubits(&self, n: usize) -> Result<(), QMathError> {
        if self.num_qubits != n {
            return Err(QMathError::WrongQubitCount {
                expected: n,
                actual: self.num_qubits,
            });
        }
        Ok(())
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &PureState) -> Complex {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn fidelity(&self, other: &PureState) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// `self ⊗ other`, with `self` as the leading (more significant) factor.
    pub fn tensor(&self, other: &PureState) -> Result<PureState, QMathError> {
        let n = self.num_qubits + other.num_qubits;
        if n > MAX_QUBITS {
            return Err(QMathError::BadLength(1 << n));
        }
        let amps = self
            .amps
            .iter()
            .flat_map(|a| other.amps.iter().map(move |b| a * b))
            .collect();
        Ok(PureState { num_qubits: n, amps })
    }

    /// Applies `u` to one qubit.
    pub fn apply_local(&self, u: &Unitary2, qubit: usize) -> Result<PureState, QMathError> {
        if qubit >= self.num_qubits {
            return Err(QMathError::QubitOutOfRange {
                index: qubit,
                num_qubits: self.num_qubits,
            });
        }
        let mut out = self.clone();
        apply_1q(&mut out.amps, self.num_qubits, qubit, u.entries());
        Ok(out)
    }

    /// Applies `u` to every qubit.
    pub fn apply_all(&self, u: &Unitary2) -> PureState {
        let mut out = self.clone();
        for q in 0..self.num_qubits {
            apply_1q(&mut out.amps, self.num_qubits, q, u.entries());
        }
        out
    }

    /// Entrywise distance after removing the best global phase.
    pub fn distance_up_to_phase(&self, other: &PureState) -> f64 {
        if self.amps.len() != other.amps.len() {
            return f64::INFINITY;
        }
        let t = self.inner(other);
        let phase = if t.norm() > ZERO_TOL {
            t.conj() / t.norm()
        } else {
            c(1.0, 0.0)
        };
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b * phase).norm())
            .fold(0.0, f64::max)
    }
}

fn qubits_for_len(len: usize) -> Result<usize, QMathError> {
    if !len.is_power_of_two() || len < 2 {
        return Err(QMathError::BadLength(len));
    }
    let n = len.trailing_zeros() as usize;
    if n > MAX_QUBITS {
        return Err(QMathError::BadLength(len));
    }
    Ok(n)
}

/// In-place single-qubit gate on an `n`-qubit amplitude vector (qubit 0 = MSB).
pub(crate) fn apply_1q(amps: &mut [Complex], num_qubits: usize, qubit: usize, m: &Matrix2) {
    let stride = 1usize << (num_qubits - 1 - qubit);
    for base in 0..amps.len() {
        if base & stride != 0 {
            continue;
        }
        let a0 = amps[base];
        let a1 = amps[base | stride];
        amps[base] = m[0][0] * a0 + m[0][1] * a1;
        amps[base | stride] = m[1][0] * a0 + m[1][1] * a1;
    }
}

/// In-place CNOT.
pub(crate) fn apply_cx(amps: &mut [Complex], num_qubits: usize, control: usize, target: usize) {
    let cbit = 1usize << (num_qubits - 1 - control);
    let tbit = 1usize << (num_qubits - 1 - target);
    for i in 0..amps.len() {
        if i & cbit != 0 && i & tbit == 0 {
            amps.swap(i, i | tbit);
        }
    }
}

/// Eigenphases in `[0, 2π)` (ascending) and the matching orthonormal eigenvectors.
#[derive(Clone, Debug, PartialEq)]
pub struct Eigen2 {
    pub phases: [f64; 2],
    pub vectors: [PureState; 2],
}

impl Eigen2 {
    /// The unitary whose columns are the eigenvectors.
    pub fn basis(&self) -> Unitary2 {
        let a = [self.vectors[0].amps[0], self.vectors[0].amps[1]];
        let b = [self.vectors[1].amps[0], self.vectors[1].amps[1]];
        Unitary2::from_columns_unchecked(a, b)
    }
}

/// Closed-form eigendecomposition of a 2×2 unitary.
///
/// Each eigenvector's first nonzero component is real and positive. For
/// `u = e^{iγ}I` the computational basis is returned.
pub fn eig_unitary2(u: &Unitary2) -> Eigen2 {
    let m = u.entries();
    let (a, b, cc, d) = (m[0][0], m[0][1], m[1][0], m[1][1]);
    let degenerate = b.norm() < 1e-14 && cc.norm() < 1e-14 && (a - d).norm() < 1e-14;
    let (v0, v1) = if degenerate {
        ([c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)])
    } else {
        let half_tr = (a + d) / 2.0;
        let disc = ((a - d) * (a - d) / 4.0 + b * cc).sqrt();
        let lambda = half_tr + disc;
        let cand1 = [b, lambda - a];
        let cand2 = [lambda - d, cc];
        let v = if norm2(cand1) >= norm2(cand2) { cand1 } else { cand2 };
        let v0 = scale2(v, c(1.0 / norm2(v), 0.0));
        (v0, complement(v0))
    };
    let phase_of = |v: [Complex; 2]| canonical_angle(inner2(v, u.apply(v)).arg());
    let (p0, p1) = (phase_of(v0), phase_of(v1));
    let (first, second) = if degenerate || p0 <= p1 {
        ((p0, v0), (p1, v1))
    } else {
        ((p1, v1), (p0, v0))
    };
    Eigen2 {
        phases: [first.0, second.0],
        vectors: [
            PureState::from_raw(1, fix_phase(first.1).to_vec()),
            PureState::from_raw(1, fix_phase(second.1).to_vec()),
        ],
    }
}

/// Arc between the two eigenphases of `u†v`, folded to `[0, π]`.
pub fn phase_spread(u: &Unitary2, v: &Unitary2) -> f64 {
    let e = eig_unitary2(&(u.adjoint() * *v));
    arc_distance(e.phases[0], e.phases[1])
}

/// `Σᵢ coeffs[i] · (local_a|i⟩) ⊗ (local_b|i⟩)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SchmidtForm {
    pub coeffs: [f64; 2],
    pub local_a: Unitary2,
    pub local_b: Unitary2,
}

impl SchmidtForm {
    pub fn reassemble(&self) -> PureState {
        let mut amps = vec![c(0.0, 0.0); 4];
        for i in 0..2 {
            let a = self.local_a.column(i);
            let b = self.local_b.column(i);
            for j in 0..2 {
                for k in 0..2 {
                    amps[2 * j + k] += a[j] * b[k] * self.coeffs[i];
                }
            }
        }
        PureState::from_raw(2, amps)
    }
}

/// Schmidt decomposition of a two-qubit state via the singular vectors of its
/// amplitude matrix.
pub fn schmidt_decompose(s: &PureState) -> Result<SchmidtForm, QMathError> {
    let a = s.amplitude_matrix()?;
    // Left singular vectors from the Hermitian AA†, diagonalized by a single
    // Jacobi rotation.
    let h = mat_mul(&a, &mat_adjoint(&a));
    let off = h[0][1];
    let u0 = if off.norm() == 0.0 {
        if h[0][0].re >= h[1][1].re {
            [c(1.0, 0.0), c(0.0, 0.0)]
        } else {
            [c(0.0, 0.0), c(1.0, 0.0)]
        }
    } else {
        let t = 0.5 * (2.0 * off.norm()).atan2(h[0][0].re - h[1][1].re);
        let omega = off.arg();
        [c(t.cos(), 0.0), cis(-omega) * t.sin()]
    };
    let mut u1 = complement(u0);
    // Rows of U†A: the qubit-1 factor of each term.
    let row = |u: [Complex; 2]| -> [Complex; 2] {
        [
            u[0].conj() * a[0][0] + u[1].conj() * a[1][0],
            u[0].conj() * a[0][1] + u[1].conj() * a[1][1],
        ]
    };
    let r0 = row(u0);
    let r1 = row(u1);
    let s0 = norm2(r0);
    let b0 = scale2(r0, c(1.0 / s0, 0.0));
    let b1 = complement(b0);
    let c1 = inner2(b1, r1);
    let s1 = c1.norm();
    if s1 > 0.0 {
        u1 = scale2(u1, c1 / s1);
    }
    let mut terms = [(s0, u0, b0), (s1, u1, b1)];
    if terms[1].0 > terms[0].0 {
        terms.swap(0, 1);
    }
    for t in terms.iter_mut() {
        let f = leading_phase(&t.1);
        t.1 = scale2(t.1, f);
        t.2 = scale2(t.2, f.conj());
    }
    Ok(SchmidtForm {
        coeffs: [terms[0].0, terms[1].0],
        local_a: Unitary2::from_columns(terms[0].1, terms[1].1)?,
        local_b: Unitary2::from_columns(terms[0].2, terms[1].2)?,
    })
}

/// Angles of the three-angle gate plus the global phase needed to recover the
/// source matrix: `source = e^{i·global_phase} · U(θ, φ, λ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct U3Params {
    pub theta: f64,
    pub phi: f64,
    pub lam: f64,
    #[serde(default)]
    pub global_phase: f64,
}

impl U3Params {
    pub fn new(theta: f64, phi: f64, lam: f64) -> Self {
        U3Params {
            theta,
            phi,
            lam,
            global_phase: 0.0,
        }
    }

    /// `U(θ, φ, λ)` without the global phase.
    pub fn gate(&self) -> Unitary2 {
        Unitary2::from_u3(self.theta, self.phi, self.lam)
    }

    /// `e^{i·global_phase} · U(θ, φ, λ)`.
    pub fn matrix(&self) -> Unitary2 {
        self.gate().scaled(cis(self.global_phase))
    }

    pub fn angles_close(&self, other: &U3Params, tol: f64) -> bool {
        (self.theta - other.theta).abs() <= tol
            && (self.phi - other.phi).abs() <= tol
            && (self.lam - other.lam).abs() <= tol
    }
}

/// Inverts [`Unitary2::from_u3`]. `theta ∈ [0, π]`, the other angles in `[0, 2π)`.
///
/// Diagonal inputs get `theta = 0, phi = 0`; anti-diagonal inputs get `lam = 0`.
pub fn u3_params(u: &Unitary2) -> U3Params {
    const EXACT_ZERO: f64 = 1e-14;
    let m = u.entries();
    let (u00, u01, u10, u11) = (m[0][0], m[0][1], m[1][0], m[1][1]);
    let (theta, phi, lam, gamma);
    if u10.norm() <= EXACT_ZERO {
        theta = 0.0;
        phi = 0.0;
        lam = u11.arg() - u00.arg();
        gamma = u00.arg() + lam / 2.0;
    } else if u00.norm() <= EXACT_ZERO {
        theta = PI;
        lam = 0.0;
        phi = u10.arg() - (-u01).arg();
        gamma = u10.arg() - phi / 2.0;
    } else {
        theta = 2.0 * u10.norm().atan2(u00.norm());
        phi = u10.arg() - u00.arg();
        lam = u11.arg() - u10.arg();
        gamma = u00.arg() + (phi + lam) / 2.0;
    }
    // Shifting phi or lam by 2π flips the sign of U(θ,φ,λ); absorb it in γ.
    let phi_c = canonical_angle(phi);
    let lam_c = canonical_angle(lam);
    let wraps = ((phi_c - phi) / TAU).round() + ((lam_c - lam) / TAU).round();
    let gamma = gamma - wraps * PI;
    U3Params {
        theta,
        phi: phi_c,
        lam: lam_c,
        global_phase: canonical_angle(gamma),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn r23() -> Unitary2 {
        Unitary2::phase(2.0 * PI / 3.0)
    }

    #[test]
    fn rejects_non_unitary() {
        let m = [[c(1.0, 0.0), c(0.1, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]];
        assert!(matches!(Unitary2::new(m), Err(QMathError::NotUnitary(_))));
    }

    #[test]
    fn rejects_unnormalized_state() {
        assert!(PureState::new(vec![c(1.0, 0.0), c(1.0, 0.0)]).is_err());
        assert!(PureState::new(vec![c(1.0, 0.0); 3]).is_err());
        assert!(PureState::new(vec![c(0.0, 0.0); 16]).is_err());
    }

    #[test]
    fn eig_of_identity() {
        let e = eig_unitary2(&Unitary2::identity());
        assert_eq!(e.phases, [0.0, 0.0]);
        assert_eq!(e.vectors[0].amplitudes(), &[c(1.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(e.vectors[1].amplitudes(), &[c(0.0, 0.0), c(1.0, 0.0)]);
    }

    #[test]
    fn eig_of_phase_gate() {
        let e = eig_unitary2(&r23());
        assert!(e.phases[0].abs() < 1e-12);
        assert!((e.phases[1] - 2.0 * PI / 3.0).abs() < 1e-12);
        assert!(e.vectors[0].distance_up_to_phase(&PureState::basis(1, 0).unwrap()) < 1e-12);
        assert!(e.vectors[1].distance_up_to_phase(&PureState::basis(1, 1).unwrap()) < 1e-12);
    }

    #[test]
    fn eig_vectors_have_positive_leading_component() {
        let u = Unitary2::from_u3(0.7, 1.9, 4.2);
        let e = eig_unitary2(&u);
        for v in &e.vectors {
            let lead = v.amplitudes()[0];
            assert!(lead.im.abs() < 1e-15 && lead.re > 0.0);
        }
        for k in 0..2 {
            let v = e.vectors[k].as_qubit().unwrap();
            let uv = u.apply(v);
            let want = scale2(v, cis(e.phases[k]));
            assert!((uv[0] - want[0]).norm() < 1e-12 && (uv[1] - want[1]).norm() < 1e-12);
        }
    }

    #[test]
    fn spread_examples() {
        let i = Unitary2::identity();
        assert!((phase_spread(&i, &r23()) - 2.0 * PI / 3.0).abs() < 1e-12);
        assert!((phase_spread(&i, &Unitary2::pauli_z()) - PI).abs() < 1e-12);
        let h = Unitary2::hadamard();
        assert!(phase_spread(&h, &h) < 1e-12);
    }

    #[test]
    fn schmidt_of_product_and_bell() {
        let s = schmidt_decompose(&PureState::zero(2).unwrap()).unwrap();
        assert!((s.coeffs[0] - 1.0).abs() < 1e-15 && s.coeffs[1].abs() < 1e-15);

        let h = FRAC_1_SQRT_2;
        let bell = PureState::new(vec![c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)]).unwrap();
        let s = schmidt_decompose(&bell).unwrap();
        assert!((s.coeffs[0] - h).abs() < 1e-12 && (s.coeffs[1] - h).abs() < 1e-12);
        assert!(s.reassemble().distance_up_to_phase(&bell) < 1e-12);
    }

    #[test]
    fn schmidt_rejects_single_qubit() {
        let s = PureState::zero(1).unwrap();
        assert!(schmidt_decompose(&s).is_err());
    }

    #[test]
    fn u3_identity_and_phase_gate() {
        let p = u3_params(&Unitary2::identity());
        assert_eq!((p.theta, p.phi, p.lam, p.global_phase), (0.0, 0.0, 0.0, 0.0));

        let p = u3_params(&r23());
        assert_eq!(p.theta, 0.0);
        assert_eq!(p.phi, 0.0);
        assert!((p.lam - 2.0 * PI / 3.0).abs() < 1e-12);
        assert!((p.global_phase - PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn u3_anti_diagonal() {
        for u in [Unitary2::pauli_x(), Unitary2::pauli_y()] {
            let p = u3_params(&u);
            assert_eq!(p.theta, PI);
            assert_eq!(p.lam, 0.0);
            assert!(p.matrix().max_abs_diff(&u) < 1e-12);
        }
    }

    #[test]
    fn canonical_angle_snaps() {
        assert_eq!(canonical_angle(-1e-17), 0.0);
        assert!((canonical_angle(-PI / 2.0) - 1.5 * PI).abs() < 1e-15);
        assert!((arc_distance(0.1, TAU - 0.1) - 0.2).abs() < 1e-12);
    }
}
