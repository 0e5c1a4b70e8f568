//! Statevector simulator.
//!
//! Qubit indices are 0-based and little-endian: qubit 0 is the least
//! significant bit of a basis-state index. States that have only seen
//! single-qubit gates are held as a list of independent 2-amplitude factors
//! and only expanded to a dense `2^n` vector when an entangling gate or a
//! full readout needs it.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A single probability amplitude.
pub type ComplexAmp = Complex64;

/// Normalization tolerance for states.
pub const NORM_TOL: f64 = 1e-9;
/// Tolerance for gate algebra (unitarity, involutions).
pub const GATE_TOL: f64 = 1e-12;
/// Default dense qubit cap: 2^24 amplitudes of 16 bytes is 256 MiB.
pub const DEFAULT_MAX_QUBITS: usize = 24;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QsimError {
    #[error("qubit count {requested} outside 1..={cap}")]
    QubitCapExceeded { requested: usize, cap: usize },
    #[error("rotation angle is not finite: {0}")]
    NonFiniteAngle(f64),
    #[error("qubit index {index} out of range for {n_qubits}-qubit state")]
    IndexOutOfRange { index: usize, n_qubits: usize },
    #[error("qubit index {0} used more than once in one operation")]
    DuplicateQubitIndex(usize),
}

pub type Result<T> = std::result::Result<T, QsimError>;

/// A 2x2 single-qubit gate, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gate1Q {
    m: [[Complex64; 2]; 2],
}

impl Gate1Q {
    /// Wraps a matrix without checking unitarity.
    pub const fn from_matrix(m: [[Complex64; 2]; 2]) -> Self {
        Self { m }
    }

    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        self.m
    }

    pub fn adjoint(&self) -> Self {
        let m = self.m;
        Self {
            m: [[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]],
        }
    }

    /// Matrix product `self * rhs`; applying the result equals applying `rhs` first.
    pub fn compose(&self, rhs: &Gate1Q) -> Self {
        let (a, b) = (self.m, rhs.m);
        let mut out = [[ZERO; 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Self { m: out }
    }

    /// Largest elementwise deviation of `G * G^dagger` from the identity.
    pub fn unitarity_error(&self) -> f64 {
        let p = self.compose(&self.adjoint()).m;
        let mut worst: f64 = 0.0;
        for (r, row) in p.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                let expect = if r == c { ONE } else { ZERO };
                worst = worst.max((v - expect).norm());
            }
        }
        worst
    }

    #[inline]
    fn mix(&self, a: Complex64, b: Complex64) -> (Complex64, Complex64) {
        (
            self.m[0][0] * a + self.m[0][1] * b,
            self.m[1][0] * a + self.m[1][1] * b,
        )
    }
}

fn check_angle(theta: f64) -> Result<f64> {
    if theta.is_finite() {
        Ok(theta)
    } else {
        Err(QsimError::NonFiniteAngle(theta))
    }
}

/// Rotation about X: `[[cos t/2, -i sin t/2], [-i sin t/2, cos t/2]]`.
pub fn rx_gate(theta: f64) -> Result<Gate1Q> {
    let half = check_angle(theta)? / 2.0;
    let (s, c) = half.sin_cos();
    let c = Complex64::new(c, 0.0);
    let ms = Complex64::new(0.0, -s);
    Ok(Gate1Q::from_matrix([[c, ms], [ms, c]]))
}

/// Rotation about Y: `[[cos t/2, -sin t/2], [sin t/2, cos t/2]]`.
pub fn ry_gate(theta: f64) -> Result<Gate1Q> {
    let half = check_angle(theta)? / 2.0;
    let (s, c) = half.sin_cos();
    Ok(Gate1Q::from_matrix([
        [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
        [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
    ]))
}

/// Rotation about Z: `diag(e^{-i t/2}, e^{i t/2})`.
pub fn rz_gate(theta: f64) -> Result<Gate1Q> {
    let half = check_angle(theta)? / 2.0;
    Ok(Gate1Q::from_matrix([
        [Complex64::from_polar(1.0, -half), ZERO],
        [ZERO, Complex64::from_polar(1.0, half)],
    ]))
}

pub fn hadamard() -> Gate1Q {
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    Gate1Q::from_matrix([[h, h], [h, -h]])
}

pub fn pauli_x() -> Gate1Q {
    Gate1Q::from_matrix([[ZERO, ONE], [ONE, ZERO]])
}

pub fn s_gate() -> Gate1Q {
    Gate1Q::from_matrix([[ONE, ZERO], [ZERO, Complex64::new(0.0, 1.0)]])
}

/// One step of a circuit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CircuitOp {
    Single { gate: Gate1Q, target: usize },
    Cnot { control: usize, target: usize },
    Swap { a: usize, b: usize },
    Toffoli { c1: usize, c2: usize, target: usize },
}

impl CircuitOp {
    fn qubits(&self) -> ([usize; 3], usize) {
        match *self {
            CircuitOp::Single { target, .. } => ([target, 0, 0], 1),
            CircuitOp::Cnot { control, target } => ([control, target, 0], 2),
            CircuitOp::Swap { a, b } => ([a, b, 0], 2),
            CircuitOp::Toffoli { c1, c2, target } => ([c1, c2, target], 3),
        }
    }

    fn validate(&self, n_qubits: usize) -> Result<()> {
        let (qs, len) = self.qubits();
        let qs = &qs[..len];
        for (i, &q) in qs.iter().enumerate() {
            if q >= n_qubits {
                return Err(QsimError::IndexOutOfRange { index: q, n_qubits });
            }
            if qs[..i].contains(&q) {
                return Err(QsimError::DuplicateQubitIndex(q));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    Dense,
    Product,
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Dense(Vec<Complex64>),
    /// factors[q] = (amp of |0>, amp of |1>) for qubit q.
    Product(Vec<[Complex64; 2]>),
}

/// An n-qubit pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    repr: Repr,
}

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n == 0 || n > cap {
        Err(QsimError::QubitCapExceeded { requested: n, cap })
    } else {
        Ok(())
    }
}

/// Expands independent single-qubit factors into the full amplitude vector.
fn expand_factors(factors: &[[Complex64; 2]]) -> Vec<Complex64> {
    let mut amps = Vec::with_capacity(1usize << factors.len());
    amps.push(ONE);
    for f in factors {
        let half = amps.len();
        amps.extend_from_within(..half);
        for a in &mut amps[..half] {
            *a *= f[0];
        }
        for a in &mut amps[half..] {
            *a *= f[1];
        }
    }
    amps
}

impl StateVector {
    /// `|0...0>` with the default qubit cap.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::zero_capped(n_qubits, DEFAULT_MAX_QUBITS)
    }

    pub fn zero_capped(n_qubits: usize, cap: usize) -> Result<Self> {
        check_cap(n_qubits, cap)?;
        Ok(Self {
            n_qubits,
            repr: Repr::Product(vec![[ONE, ZERO]; n_qubits]),
        })
    }

    /// Product state from per-qubit factors (qubit 0 first). Factors are
    /// taken as given; callers are responsible for normalization.
    pub fn from_factors(factors: Vec<[Complex64; 2]>, cap: usize) -> Result<Self> {
        check_cap(factors.len(), cap)?;
        Ok(Self {
            n_qubits: factors.len(),
            repr: Repr::Product(factors),
        })
    }

    /// Dense state from raw amplitudes; length must be a power of two.
    pub fn from_amplitudes(amps: Vec<Complex64>, cap: usize) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(QsimError::QubitCapExceeded {
                requested: if len < 2 { 0 } else { len.ilog2() as usize + 1 },
                cap,
            });
        }
        let n = len.trailing_zeros() as usize;
        check_cap(n, cap)?;
        Ok(Self {
            n_qubits: n,
            repr: Repr::Dense(amps),
        })
    }

    /// Single computational basis state `|index>` in product layout.
    pub fn basis(n_qubits: usize, index: usize, cap: usize) -> Result<Self> {
        check_cap(n_qubits, cap)?;
        let factors = (0..n_qubits)
            .map(|q| {
                if (index >> q) & 1 == 1 {
                    [ZERO, ONE]
                } else {
                    [ONE, ZERO]
                }
            })
            .collect();
        Ok(Self {
            n_qubits,
            repr: Repr::Product(factors),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1usize << self.n_qubits
    }

    pub fn layout(&self) -> Layout {
        match self.repr {
            Repr::Dense(_) => Layout::Dense,
            Repr::Product(_) => Layout::Product,
        }
    }

    /// Per-qubit factors when in product layout.
    pub fn factors(&self) -> Option<&[[Complex64; 2]]> {
        match &self.repr {
            Repr::Product(f) => Some(f),
            Repr::Dense(_) => None,
        }
    }

    /// Amplitude of basis state `index`.
    pub fn amp(&self, index: usize) -> Complex64 {
        assert!(index < self.dim(), "basis index {index} out of range");
        match &self.repr {
            Repr::Dense(a) => a[index],
            Repr::Product(f) => f
                .iter()
                .enumerate()
                .fold(ONE, |acc, (q, fq)| acc * fq[(index >> q) & 1]),
        }
    }

    /// Full amplitude vector (expands product layout).
    pub fn amplitudes(&self) -> Vec<Complex64> {
        match &self.repr {
            Repr::Dense(a) => a.clone(),
            Repr::Product(f) => expand_factors(f),
        }
    }

    /// Converts to dense layout in place.
    pub fn densify(&mut self) {
        if let Repr::Product(f) = &self.repr {
            self.repr = Repr::Dense(expand_factors(f));
        }
    }

    pub fn into_dense(mut self) -> Self {
        self.densify();
        self
    }

    /// Sum of squared amplitude magnitudes.
    pub fn norm_sqr(&self) -> f64 {
        match &self.repr {
            Repr::Dense(a) => a.iter().map(|c| c.norm_sqr()).sum(),
            Repr::Product(f) => f.iter().map(|p| p[0].norm_sqr() + p[1].norm_sqr()).product(),
        }
    }

    /// Returns a new state with `op` applied.
    pub fn apply(&self, op: &CircuitOp) -> Result<Self> {
        let mut out = self.clone();
        out.apply_mut(op)?;
        Ok(out)
    }

    /// Applies `op` to this state in place.
    pub fn apply_mut(&mut self, op: &CircuitOp) -> Result<()> {
        op.validate(self.n_qubits)?;
        match *op {
            CircuitOp::Single { gate, target } => match &mut self.repr {
                Repr::Product(f) => {
                    let (a, b) = gate.mix(f[target][0], f[target][1]);
                    f[target] = [a, b];
                }
                Repr::Dense(amps) => apply_single_dense(amps, &gate, target),
            },
            CircuitOp::Cnot { control, target } => {
                let amps = self.dense_mut();
                let (cb, tb) = (1usize << control, 1usize << target);
                for i in 0..amps.len() {
                    if i & cb != 0 && i & tb == 0 {
                        amps.swap(i, i | tb);
                    }
                }
            }
            CircuitOp::Swap { a, b } => {
                let amps = self.dense_mut();
                let (ab, bb) = (1usize << a, 1usize << b);
                for i in 0..amps.len() {
                    if i & ab != 0 && i & bb == 0 {
                        amps.swap(i, i ^ ab ^ bb);
                    }
                }
            }
            CircuitOp::Toffoli { c1, c2, target } => {
                let amps = self.dense_mut();
                let cmask = (1usize << c1) | (1usize << c2);
                let tb = 1usize << target;
                for i in 0..amps.len() {
                    if i & cmask == cmask && i & tb == 0 {
                        amps.swap(i, i | tb);
                    }
                }
            }
        }
        Ok(())
    }

    fn dense_mut(&mut self) -> &mut Vec<Complex64> {
        self.densify();
        match &mut self.repr {
            Repr::Dense(a) => a,
            Repr::Product(_) => unreachable!("densify leaves a dense state"),
        }
    }

    /// Measurement probabilities `|amp_i|^2` over all basis states.
    pub fn probabilities(&self) -> Vec<f64> {
        match &self.repr {
            Repr::Dense(a) => a.iter().map(|c| c.norm_sqr()).collect(),
            Repr::Product(f) => {
                let pf: Vec<[f64; 2]> = f.iter().map(|p| [p[0].norm_sqr(), p[1].norm_sqr()]).collect();
                let mut probs = Vec::with_capacity(self.dim());
                probs.push(1.0);
                for p in &pf {
                    let half = probs.len();
                    probs.extend_from_within(..half);
                    for v in &mut probs[..half] {
                        *v *= p[0];
                    }
                    for v in &mut probs[half..] {
                        *v *= p[1];
                    }
                }
                probs
            }
        }
    }

    /// `<Z>` on one qubit: P(bit = 0) - P(bit = 1).
    pub fn expectation_z(&self, qubit: usize) -> Result<f64> {
        if qubit >= self.n_qubits {
            return Err(QsimError::IndexOutOfRange {
                index: qubit,
                n_qubits: self.n_qubits,
            });
        }
        Ok(match &self.repr {
            Repr::Product(f) => {
                let (p0, p1) = (f[qubit][0].norm_sqr(), f[qubit][1].norm_sqr());
                (p0 - p1) / (p0 + p1)
            }
            Repr::Dense(a) => {
                let bit = 1usize << qubit;
                a.iter()
                    .enumerate()
                    .map(|(i, c)| if i & bit == 0 { c.norm_sqr() } else { -c.norm_sqr() })
                    .sum()
            }
        })
    }

    /// Largest elementwise amplitude difference.
    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        assert_eq!(self.n_qubits, other.n_qubits, "qubit counts differ");
        match (&self.repr, &other.repr) {
            (Repr::Dense(a), Repr::Dense(b)) => {
                a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
            }
            _ => self
                .amplitudes()
                .iter()
                .zip(other.amplitudes())
                .map(|(x, y)| (x - y).norm())
                .fold(0.0, f64::max),
        }
    }

    /// Largest amplitude difference after removing the relative global phase.
    pub fn max_abs_diff_up_to_phase(&self, other: &StateVector) -> f64 {
        let a = self.amplitudes();
        let b = other.amplitudes();
        let overlap: Complex64 = a.iter().zip(&b).map(|(x, y)| x.conj() * y).sum();
        let phase = if overlap.norm() > 0.0 {
            overlap / overlap.norm()
        } else {
            ONE
        };
        a.iter()
            .zip(&b)
            .map(|(x, y)| (x * phase - y).norm())
            .fold(0.0, f64::max)
    }
}

/// Stride/bitmask kernel: mixes each pair `(i, i | 1<<target)` with bit clear/set.
fn apply_single_dense(amps: &mut [Complex64], gate: &Gate1Q, target: usize) {
    let stride = 1usize << target;
    for block in amps.chunks_exact_mut(stride << 1) {
        let (lo, hi) = block.split_at_mut(stride);
        for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
            let (x, y) = gate.mix(*a, *b);
            *a = x;
            *b = y;
        }
    }
}

/// `|a> (x) |b>`: b occupies the low qubits, `amps[(i << n_b) | j] = a[i] * b[j]`.
pub fn tensor_product(a: &StateVector, b: &StateVector) -> Result<StateVector> {
    tensor_product_capped(a, b, DEFAULT_MAX_QUBITS)
}

pub fn tensor_product_capped(a: &StateVector, b: &StateVector, cap: usize) -> Result<StateVector> {
    let n = a.n_qubits + b.n_qubits;
    check_cap(n, cap)?;
    let repr = match (&a.repr, &b.repr) {
        (Repr::Product(fa), Repr::Product(fb)) => {
            Repr::Product(fb.iter().chain(fa.iter()).copied().collect())
        }
        _ => {
            let (aa, ba) = (a.amplitudes(), b.amplitudes());
            let mut out = Vec::with_capacity(aa.len() * ba.len());
            for x in &aa {
                out.extend(ba.iter().map(|y| x * y));
            }
            Repr::Dense(out)
        }
    };
    Ok(StateVector { n_qubits: n, repr })
}

impl fmt::Display for StateVector {
    /// Lists nonzero amplitudes as kets written most significant qubit first.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.n_qubits;
        let mut first = true;
        for (i, a) in self.amplitudes().iter().enumerate() {
            if a.norm() < 1e-15 {
                continue;
            }
            if !first {
                writeln!(f)?;
            }
            first = false;
            write!(f, "|{:0width$b}>  {:+.6}{:+.6}i", i, a.re, a.im, width = n)?;
        }
        Ok(())
    }
}
