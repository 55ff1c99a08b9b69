//! Dense statevector simulation.
//!
//! Qubit 0 is the most significant bit of a basis index: on three qubits the
//! basis state `|q0 q1 q2>` = `|110>` has index 6.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};

/// Default cap on register width. 2^20 amplitudes is 16 MiB.
pub const DEFAULT_MAX_QUBITS: usize = 20;

const NORM_TOLERANCE: f64 = 1e-9;
const MEASURE_NORM_TOLERANCE: f64 = 1e-6;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Pseudo-random stream used for every measurement.
///
/// ChaCha8 has a fixed, platform-independent output for a given seed, so
/// measurement results are reproducible everywhere.
pub type MeasurementRng = ChaCha8Rng;

pub fn measurement_rng(seed: u64) -> MeasurementRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Computational basis state `|basis_index>` on `n_qubits` qubits.
    pub fn basis(n_qubits: usize, basis_index: usize) -> Result<Self> {
        Self::basis_capped(n_qubits, basis_index, DEFAULT_MAX_QUBITS)
    }

    pub fn basis_capped(n_qubits: usize, basis_index: usize, max_qubits: usize) -> Result<Self> {
        if n_qubits == 0 {
            return invalid("a register needs at least one qubit");
        }
        if n_qubits > max_qubits {
            return invalid(format!(
                "{n_qubits} qubits exceeds the configured cap of {max_qubits}"
            ));
        }
        let dim = 1usize << n_qubits;
        if basis_index >= dim {
            return invalid(format!(
                "basis index {basis_index} out of range for {n_qubits} qubits"
            ));
        }
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[basis_index] = ONE;
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Builds a state from raw amplitudes. The vector must have power-of-two
    /// length and unit norm.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim < 2 || !dim.is_power_of_two() {
            return invalid(format!("amplitude count {dim} is not a power of two >= 2"));
        }
        let state = Self {
            n_qubits: dim.trailing_zeros() as usize,
            amplitudes,
        };
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Integrity(format!(
                "state norm^2 is {norm}, expected 1"
            )));
        }
        Ok(state)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Born-rule probability of observing `basis_index`.
    pub fn probability_of(&self, basis_index: usize) -> Result<f64> {
        self.amplitudes
            .get(basis_index)
            .map(|a| a.norm_sqr())
            .ok_or_else(|| {
                Error::InvalidInput(format!(
                    "basis index {basis_index} out of range for dimension {}",
                    self.dim()
                ))
            })
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Applies `gate` to the listed qubits, identity elsewhere. `targets[0]`
    /// is the most significant qubit of the gate's own basis.
    pub fn apply_gate(&self, gate: &Gate, targets: &[usize]) -> Result<Self> {
        let mut out = self.clone();
        out.apply_gate_in_place(gate, targets)?;
        Ok(out)
    }

    pub fn apply_gate_in_place(&mut self, gate: &Gate, targets: &[usize]) -> Result<()> {
        if targets.len() != gate.arity {
            return invalid(format!(
                "gate of arity {} given {} targets",
                gate.arity,
                targets.len()
            ));
        }
        for (i, &t) in targets.iter().enumerate() {
            if t >= self.n_qubits {
                return invalid(format!("target qubit {t} out of range"));
            }
            if targets[..i].contains(&t) {
                return invalid(format!("duplicate target qubit {t}"));
            }
        }

        let n = self.n_qubits;
        let gdim = gate.dim();
        let bits: Vec<usize> = targets.iter().map(|&q| 1usize << (n - 1 - q)).collect();
        let mask: usize = bits.iter().sum();

        // Offsets of the 2^k amplitudes in one group, relative to its base index.
        let offsets: Vec<usize> = (0..gdim)
            .map(|s| {
                bits.iter()
                    .enumerate()
                    .filter(|(j, _)| s & (1 << (gate.arity - 1 - j)) != 0)
                    .map(|(_, b)| b)
                    .sum()
            })
            .collect();

        let mut gathered = vec![ZERO; gdim];
        for base in (0..self.dim()).filter(|b| b & mask == 0) {
            for (g, off) in gathered.iter_mut().zip(&offsets) {
                *g = self.amplitudes[base + off];
            }
            for (r, off) in offsets.iter().enumerate() {
                let row = &gate.matrix[r * gdim..(r + 1) * gdim];
                self.amplitudes[base + off] = row.iter().zip(&gathered).map(|(m, a)| m * a).sum();
            }
        }
        debug_assert!((self.norm_sqr() - 1.0).abs() < NORM_TOLERANCE);
        Ok(())
    }

    /// Multiplies the amplitude of every index selected by `flip` by -1.
    pub(crate) fn phase_flip_where(&mut self, mut flip: impl FnMut(usize) -> bool) {
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            if flip(i) {
                *a = -*a;
            }
        }
    }

    /// Samples a full-register measurement from a stream seeded by `seed`.
    pub fn measure_all(&self, seed: u64) -> Result<MeasurementOutcome> {
        self.measure_with(&mut measurement_rng(seed))
    }

    pub fn measure_with<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<MeasurementOutcome> {
        let norm = self.norm_sqr();
        if (norm - 1.0).abs() > MEASURE_NORM_TOLERANCE {
            return Err(Error::Integrity(format!(
                "cannot measure an unnormalized state (norm^2 = {norm})"
            )));
        }
        let u: f64 = rng.random::<f64>() * norm;
        let mut acc = 0.0;
        let mut last_nonzero = 0;
        for (i, a) in self.amplitudes.iter().enumerate() {
            let p = a.norm_sqr();
            if p > 0.0 {
                last_nonzero = i;
            }
            acc += p;
            if u < acc {
                return Ok(MeasurementOutcome {
                    basis_index: i,
                    probability: p,
                });
            }
        }
        // Rounding left u just above the cumulative total.
        Ok(MeasurementOutcome {
            basis_index: last_nonzero,
            probability: self.amplitudes[last_nonzero].norm_sqr(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementOutcome {
    pub basis_index: usize,
    pub probability: f64,
}

/// A k-qubit unitary stored as a dense row-major 2^k x 2^k matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    arity: usize,
    matrix: Vec<Complex64>,
}

impl Gate {
    /// Checked constructor: the matrix must be square of side 2^arity and
    /// unitary to within 1e-12 entrywise.
    pub fn new(arity: usize, matrix: Vec<Complex64>) -> Result<Self> {
        if arity == 0 {
            return invalid("gate arity must be positive");
        }
        let dim = 1usize << arity;
        if matrix.len() != dim * dim {
            return invalid(format!(
                "arity {arity} needs {} entries, got {}",
                dim * dim,
                matrix.len()
            ));
        }
        let gate = Self { arity, matrix };
        if !gate.is_unitary(1e-12) {
            return invalid("gate matrix is not unitary");
        }
        Ok(gate)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn dim(&self) -> usize {
        1 << self.arity
    }

    pub fn matrix(&self) -> &[Complex64] {
        &self.matrix
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[row * self.dim() + col]
    }

    pub fn adjoint(&self) -> Gate {
        let d = self.dim();
        let mut m = vec![ZERO; d * d];
        for r in 0..d {
            for c in 0..d {
                m[c * d + r] = self.matrix[r * d + c].conj();
            }
        }
        Gate {
            arity: self.arity,
            matrix: m,
        }
    }

    /// Matrix product `self * other`; both must have the same arity.
    pub fn compose(&self, other: &Gate) -> Result<Gate> {
        if self.arity != other.arity {
            return invalid("cannot multiply gates of different arity");
        }
        let d = self.dim();
        let mut m = vec![ZERO; d * d];
        for r in 0..d {
            for k in 0..d {
                let a = self.matrix[r * d + k];
                if a == ZERO {
                    continue;
                }
                for c in 0..d {
                    m[r * d + c] += a * other.matrix[k * d + c];
                }
            }
        }
        Ok(Gate {
            arity: self.arity,
            matrix: m,
        })
    }

    /// Largest entrywise deviation of `U U^dagger` from the identity.
    pub fn unitarity_error(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for r in 0..d {
            for c in 0..d {
                let dot: Complex64 = (0..d)
                    .map(|k| self.matrix[r * d + k] * self.matrix[c * d + k].conj())
                    .sum();
                let target = if r == c { ONE } else { ZERO };
                worst = worst.max((dot - target).norm());
            }
        }
        worst
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_error() <= tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StandardGate {
    Id,
    X,
    Y,
    Z,
    H,
    /// Controlled NOT; the first target is the control.
    Xor,
    Swap,
}

impl StandardGate {
    pub const ALL: [StandardGate; 7] = [
        StandardGate::Id,
        StandardGate::X,
        StandardGate::Y,
        StandardGate::Z,
        StandardGate::H,
        StandardGate::Xor,
        StandardGate::Swap,
    ];

    pub fn gate(self) -> Gate {
        let r = |v: f64| Complex64::new(v, 0.0);
        let h = FRAC_1_SQRT_2;
        let (arity, matrix) = match self {
            StandardGate::Id => (1, vec![ONE, ZERO, ZERO, ONE]),
            StandardGate::X => (1, vec![ZERO, ONE, ONE, ZERO]),
            StandardGate::Y => (1, vec![ZERO, -I, I, ZERO]),
            StandardGate::Z => (1, vec![ONE, ZERO, ZERO, -ONE]),
            StandardGate::H => (1, vec![r(h), r(h), r(h), r(-h)]),
            #[rustfmt::skip]
            StandardGate::Xor => (2, vec![
                ONE, ZERO, ZERO, ZERO,
                ZERO, ONE, ZERO, ZERO,
                ZERO, ZERO, ZERO, ONE,
                ZERO, ZERO, ONE, ZERO,
            ]),
            #[rustfmt::skip]
            StandardGate::Swap => (2, vec![
                ONE, ZERO, ZERO, ZERO,
                ZERO, ZERO, ONE, ZERO,
                ZERO, ONE, ZERO, ZERO,
                ZERO, ZERO, ZERO, ONE,
            ]),
        };
        Gate { arity, matrix }
    }

    pub fn name(self) -> &'static str {
        match self {
            StandardGate::Id => "Id",
            StandardGate::X => "X",
            StandardGate::Y => "Y",
            StandardGate::Z => "Z",
            StandardGate::H => "H",
            StandardGate::Xor => "XOR",
            StandardGate::Swap => "SWAP",
        }
    }
}

impl fmt::Display for StandardGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StandardGate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "ID" | "I" => Ok(StandardGate::Id),
            "X" => Ok(StandardGate::X),
            "Y" => Ok(StandardGate::Y),
            "Z" => Ok(StandardGate::Z),
            "H" => Ok(StandardGate::H),
            "XOR" | "CNOT" => Ok(StandardGate::Xor),
            "SWAP" => Ok(StandardGate::Swap),
            _ => invalid(format!("unknown gate name {s:?}")),
        }
    }
}

/// Looks a gate up by name (`Id`, `X`, `Y`, `Z`, `H`, `XOR`, `SWAP`).
pub fn standard_gate(name: &str) -> Result<Gate> {
    name.parse::<StandardGate>().map(StandardGate::gate)
}

/// Quantum Fourier transform on `n_qubits`: entry (j, k) is
/// `exp(2 pi i j k / N) / sqrt(N)` with `N = 2^n_qubits`.
pub fn qft(n_qubits: usize) -> Result<Gate> {
    if n_qubits == 0 {
        return invalid("qft needs at least one qubit");
    }
    if n_qubits > DEFAULT_MAX_QUBITS / 2 {
        return invalid(format!("qft matrix on {n_qubits} qubits is too large"));
    }
    let dim = 1usize << n_qubits;
    let scale = 1.0 / (dim as f64).sqrt();
    let mut matrix = Vec::with_capacity(dim * dim);
    for j in 0..dim {
        for k in 0..dim {
            // Reduce j*k mod N first so the angle stays accurate.
            let angle = 2.0 * PI * ((j * k) % dim) as f64 / dim as f64;
            matrix.push(Complex64::from_polar(scale, angle));
        }
    }
    Ok(Gate {
        arity: n_qubits,
        matrix,
    })
}
