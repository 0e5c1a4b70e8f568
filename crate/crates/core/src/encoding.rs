//! Classical-to-quantum encodings and the readouts that turn encoded states
//! back into classical feature vectors.
//!
//! Bitstrings are written most significant qubit first, the way kets are
//! printed: the leftmost character of `"101"` lands on qubit `n - 1`.

use std::collections::HashSet;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::FeatureMatrix;
use crate::qsim::{self, Gate1Q, QsimError, StateVector, DEFAULT_MAX_QUBITS};

/// Bits emitted per character by [`basis_encode_text`].
pub const ASCII_BITS: usize = 7;
pub const DEFAULT_BITS_PER_FEATURE: usize = 4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EncodingError {
    #[error("input is empty")]
    EmptyInput,
    #[error("value {value} at position {position} is not a bit")]
    NonBinaryInput { position: usize, value: String },
    #[error("character {ch:?} at position {position} is not ASCII")]
    NonAsciiCharacter { position: usize, ch: char },
    #[error("bitstring {index} has length {got}, expected {expected}")]
    LengthMismatch { index: usize, expected: usize, got: usize },
    #[error("bitstring {0} listed twice")]
    DuplicateString(String),
    #[error("feature {index} = {value} outside [0, 1]")]
    OutOfRangeFeature { index: usize, value: f64 },
    #[error("feature {0} is not finite")]
    NonFiniteInput(usize),
    #[error("all-zero vector cannot be amplitude encoded")]
    ZeroVector,
    #[error("basis encoding of continuous features needs a fitted quantizer")]
    MissingQuantizer,
    #[error("{0} encoding is not defined for feature rows")]
    UnsupportedForRows(&'static str),
    #[error("quantizer fitted for {expected} features, row has {got}")]
    QuantizerWidth { expected: usize, got: usize },
    #[error("row {row}: {source}")]
    Row {
        row: usize,
        #[source]
        source: Box<EncodingError>,
    },
    #[error(transparent)]
    Sim(#[from] QsimError),
}

pub type Result<T> = std::result::Result<T, EncodingError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    #[default]
    X,
    Y,
    Z,
}

/// How a feature value becomes a rotation angle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngleMap {
    /// `theta = pi * x` for `x` in `[0, 1]`.
    #[default]
    LinearPi,
    /// `theta = x` radians.
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReadoutMode {
    /// `2^n` measurement probabilities.
    ProbabilityVector,
    /// `<Z>` per qubit, qubit 0 first.
    ZExpectations,
    /// All real parts followed by all imaginary parts, `2 * 2^n` values.
    AmplitudeParts,
}

fn default_bits() -> usize {
    DEFAULT_BITS_PER_FEATURE
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EncodingKind {
    Basis {
        #[serde(default = "default_bits")]
        bits_per_feature: usize,
    },
    Superposition,
    Angle {
        #[serde(default)]
        axis: Axis,
        #[serde(default)]
        map: AngleMap,
    },
    Amplitude,
}

/// One encoding plus its readout. A missing readout takes the per-kind
/// default: Z expectations for angle, probabilities otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EncodingScheme {
    #[serde(flatten)]
    pub kind: EncodingKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub readout: Option<ReadoutMode>,
}

impl EncodingScheme {
    pub fn new(kind: EncodingKind) -> Self {
        Self { kind, readout: None }
    }

    pub fn with_readout(mut self, readout: ReadoutMode) -> Self {
        self.readout = Some(readout);
        self
    }

    pub fn basis(bits_per_feature: usize) -> Self {
        Self::new(EncodingKind::Basis { bits_per_feature })
    }

    pub fn angle(axis: Axis, map: AngleMap) -> Self {
        Self::new(EncodingKind::Angle { axis, map })
    }

    pub fn amplitude() -> Self {
        Self::new(EncodingKind::Amplitude)
    }

    pub fn readout(&self) -> ReadoutMode {
        self.readout.unwrap_or(match self.kind {
            EncodingKind::Angle { .. } => ReadoutMode::ZExpectations,
            _ => ReadoutMode::ProbabilityVector,
        })
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            EncodingKind::Basis { .. } => "basis",
            EncodingKind::Superposition => "superposition",
            EncodingKind::Angle { .. } => "angle",
            EncodingKind::Amplitude => "amplitude",
        }
    }
}

fn basis_factor(bit: bool) -> [Complex64; 2] {
    if bit {
        [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]
    } else {
        [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]
    }
}

/// Computational basis state for `bits`, leftmost bit on the highest qubit.
pub fn basis_encode(bits: &[u8]) -> Result<StateVector> {
    basis_encode_capped(bits, DEFAULT_MAX_QUBITS)
}

pub fn basis_encode_capped(bits: &[u8], cap: usize) -> Result<StateVector> {
    if bits.is_empty() {
        return Err(EncodingError::EmptyInput);
    }
    if let Some(position) = bits.iter().position(|&b| b > 1) {
        return Err(EncodingError::NonBinaryInput {
            position,
            value: bits[position].to_string(),
        });
    }
    let factors = bits.iter().rev().map(|&b| basis_factor(b == 1)).collect();
    Ok(StateVector::from_factors(factors, cap)?)
}

/// One 7-qubit basis state per ASCII character.
pub fn basis_encode_text(text: &str) -> Result<Vec<StateVector>> {
    if text.is_empty() {
        return Err(EncodingError::EmptyInput);
    }
    text.chars()
        .enumerate()
        .map(|(position, ch)| {
            if !ch.is_ascii() {
                return Err(EncodingError::NonAsciiCharacter { position, ch });
            }
            let code = ch as u8;
            let bits: Vec<u8> = (0..ASCII_BITS).rev().map(|k| (code >> k) & 1).collect();
            basis_encode(&bits)
        })
        .collect()
}

fn parse_bitstring(s: &str) -> Result<usize> {
    s.chars().enumerate().try_fold(0usize, |acc, (position, ch)| match ch {
        '0' => Ok(acc << 1),
        '1' => Ok((acc << 1) | 1),
        other => Err(EncodingError::NonBinaryInput {
            position,
            value: other.to_string(),
        }),
    })
}

/// Uniform superposition over the listed basis states.
pub fn superposition_encode<S: AsRef<str>>(strings: &[S]) -> Result<StateVector> {
    superposition_encode_capped(strings, DEFAULT_MAX_QUBITS)
}

pub fn superposition_encode_capped<S: AsRef<str>>(strings: &[S], cap: usize) -> Result<StateVector> {
    let first = strings.first().ok_or(EncodingError::EmptyInput)?.as_ref();
    let n = first.len();
    if n == 0 {
        return Err(EncodingError::EmptyInput);
    }
    if n > cap {
        return Err(QsimError::QubitCapExceeded { requested: n, cap }.into());
    }
    let mut seen = HashSet::with_capacity(strings.len());
    let mut indices = Vec::with_capacity(strings.len());
    for (index, s) in strings.iter().enumerate() {
        let s = s.as_ref();
        if s.len() != n {
            return Err(EncodingError::LengthMismatch { index, expected: n, got: s.len() });
        }
        let idx = parse_bitstring(s)?;
        if !seen.insert(idx) {
            return Err(EncodingError::DuplicateString(s.to_string()));
        }
        indices.push(idx);
    }
    if indices.len() == 1 {
        return Ok(StateVector::basis(n, indices[0], cap)?);
    }
    let amp = Complex64::new(1.0 / (indices.len() as f64).sqrt(), 0.0);
    let mut amps = vec![Complex64::new(0.0, 0.0); 1usize << n];
    for i in indices {
        amps[i] = amp;
    }
    Ok(StateVector::from_amplitudes(amps, cap)?)
}

fn rotation(axis: Axis, theta: f64) -> std::result::Result<Gate1Q, QsimError> {
    match axis {
        Axis::X => qsim::rx_gate(theta),
        Axis::Y => qsim::ry_gate(theta),
        Axis::Z => qsim::rz_gate(theta),
    }
}

/// One qubit per feature; qubit `i` is `R_axis(theta_i)|0>`.
pub fn angle_encode(x: &[f64], axis: Axis, map: AngleMap) -> Result<StateVector> {
    angle_encode_capped(x, axis, map, DEFAULT_MAX_QUBITS)
}

pub fn angle_encode_capped(x: &[f64], axis: Axis, map: AngleMap, cap: usize) -> Result<StateVector> {
    if x.is_empty() {
        return Err(EncodingError::EmptyInput);
    }
    let mut factors = Vec::with_capacity(x.len());
    for (index, &value) in x.iter().enumerate() {
        if !value.is_finite() {
            return Err(EncodingError::NonFiniteInput(index));
        }
        let theta = match map {
            AngleMap::LinearPi => {
                if !(0.0..=1.0).contains(&value) {
                    return Err(EncodingError::OutOfRangeFeature { index, value });
                }
                PI * value
            }
            AngleMap::Raw => value,
        };
        // first column of the rotation matrix is R|0>
        let m = rotation(axis, theta)?.matrix();
        factors.push([m[0][0], m[1][0]]);
    }
    Ok(StateVector::from_factors(factors, cap)?)
}

/// `x / ||x||` on `ceil(log2 d)` qubits (at least one), zero-padded.
pub fn amplitude_encode(x: &[f64]) -> Result<StateVector> {
    amplitude_encode_capped(x, DEFAULT_MAX_QUBITS)
}

pub fn amplitude_encode_capped(x: &[f64], cap: usize) -> Result<StateVector> {
    if x.is_empty() {
        return Err(EncodingError::EmptyInput);
    }
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(EncodingError::NonFiniteInput(i));
    }
    let n = (x.len().next_power_of_two().trailing_zeros() as usize).max(1);
    if n > cap {
        return Err(QsimError::QubitCapExceeded { requested: n, cap }.into());
    }
    // scale by the largest magnitude first so the norm cannot overflow
    let peak = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return Err(EncodingError::ZeroVector);
    }
    let norm = x.iter().map(|v| (v / peak).powi(2)).sum::<f64>().sqrt();
    let mut amps = vec![Complex64::new(0.0, 0.0); 1usize << n];
    for (a, v) in amps.iter_mut().zip(x) {
        *a = Complex64::new(v / peak / norm, 0.0);
    }
    Ok(StateVector::from_amplitudes(amps, cap)?)
}

/// Fixed-point quantizer for basis-encoding continuous features.
///
/// Each feature is min-max scaled on the training rows, clamped to `[0, 1]`
/// and written as `bits_per_feature` bits, most significant first. When
/// `features * bits_per_feature` would exceed the qubit cap the bit width
/// shrinks to fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantizer {
    pub scaler: crate::scale::MinMaxScaler,
    pub bits_per_feature: usize,
}

impl Quantizer {
    pub fn fit(train: &FeatureMatrix, bits_per_feature: usize, max_qubits: usize) -> Result<Self> {
        let d = train.cols();
        if d == 0 || train.rows() == 0 || bits_per_feature == 0 {
            return Err(EncodingError::EmptyInput);
        }
        if d > max_qubits {
            return Err(QsimError::QubitCapExceeded { requested: d, cap: max_qubits }.into());
        }
        Ok(Self {
            scaler: crate::scale::MinMaxScaler::fit(train, true),
            bits_per_feature: bits_per_feature.min(max_qubits / d),
        })
    }

    pub fn n_features(&self) -> usize {
        self.scaler.min.len()
    }

    pub fn n_qubits(&self) -> usize {
        self.n_features() * self.bits_per_feature
    }

    pub fn quantize(&self, row: &[f64]) -> Result<Vec<u8>> {
        if row.len() != self.n_features() {
            return Err(EncodingError::QuantizerWidth {
                expected: self.n_features(),
                got: row.len(),
            });
        }
        let b = self.bits_per_feature;
        let top = (1u64 << b) - 1;
        let mut bits = Vec::with_capacity(row.len() * b);
        for (j, &v) in row.iter().enumerate() {
            if !v.is_finite() {
                return Err(EncodingError::NonFiniteInput(j));
            }
            let s = self.scaler.scale_value(j, v);
            let level = ((s * (1u64 << b) as f64).floor() as u64).min(top);
            bits.extend((0..b).rev().map(|k| ((level >> k) & 1) as u8));
        }
        Ok(bits)
    }
}

/// An encoded sample and its classical readout.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedSample {
    pub state: StateVector,
    pub features: Vec<f64>,
    pub scheme: EncodingScheme,
}

pub fn readout(state: &StateVector, mode: ReadoutMode) -> Result<Vec<f64>> {
    Ok(match mode {
        ReadoutMode::ProbabilityVector => {
            if state.n_qubits() > DEFAULT_MAX_QUBITS {
                return Err(QsimError::QubitCapExceeded {
                    requested: state.n_qubits(),
                    cap: DEFAULT_MAX_QUBITS,
                }
                .into());
            }
            state.probabilities()
        }
        ReadoutMode::ZExpectations => (0..state.n_qubits())
            .map(|q| state.expectation_z(q))
            .collect::<std::result::Result<_, _>>()?,
        ReadoutMode::AmplitudeParts => {
            let amps = state.amplitudes();
            amps.iter().map(|a| a.re).chain(amps.iter().map(|a| a.im)).collect()
        }
    })
}

/// Rows that are already 0/1 can be basis encoded without a quantizer.
fn binary_row(x: &[f64]) -> Result<Vec<u8>> {
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(EncodingError::NonFiniteInput(i));
    }
    if x.iter().all(|&v| v == 0.0 || v == 1.0) {
        Ok(x.iter().map(|&v| v as u8).collect())
    } else {
        Err(EncodingError::MissingQuantizer)
    }
}

/// Encodes one feature row with `scheme` and applies its readout.
pub fn embed_sample(x: &[f64], scheme: &EncodingScheme, quantizer: Option<&Quantizer>) -> Result<EmbeddedSample> {
    let state = match scheme.kind {
        EncodingKind::Basis { .. } => {
            let bits = match quantizer {
                Some(q) => q.quantize(x)?,
                None => binary_row(x)?,
            };
            basis_encode(&bits)?
        }
        EncodingKind::Superposition => return Err(EncodingError::UnsupportedForRows("superposition")),
        EncodingKind::Angle { axis, map } => angle_encode(x, axis, map)?,
        EncodingKind::Amplitude => amplitude_encode(x)?,
    };
    let features = readout(&state, scheme.readout())?;
    Ok(EmbeddedSample { state, features, scheme: *scheme })
}

/// Row-wise [`embed_sample`]; rows are encoded in parallel.
pub fn embed_matrix(x: &FeatureMatrix, scheme: &EncodingScheme, quantizer: Option<&Quantizer>) -> Result<FeatureMatrix> {
    let rows: Vec<Vec<f64>> = (0..x.rows())
        .into_par_iter()
        .map(|i| {
            embed_sample(x.row(i), scheme, quantizer)
                .map(|s| s.features)
                .map_err(|e| EncodingError::Row { row: i, source: Box::new(e) })
        })
        .collect::<Result<_>>()?;
    let cols = rows.first().map_or(0, Vec::len);
    let prefix = scheme.name();
    let names = (0..cols).map(|j| format!("{prefix}_{j}")).collect();
    let data = rows.into_iter().flatten().collect();
    Ok(x.with_data(cols, data, names).expect("readouts are finite with constant width"))
}
