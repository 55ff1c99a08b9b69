//! Grover search over the basis indices of an n-qubit register.
//!
//! One iteration is the phase query `Q_f` followed by the diffusion
//! `H^n . Q_0 . H^n`, where `Q_0` reflects about `|0...0>`. Over `(Z_2)^n`
//! the Fourier transform is `H^n`, so the diffusion is the transform-conjugated
//! zero query.

use std::f64::consts::FRAC_PI_4;
use std::fmt;

use rand::Rng;

use crate::error::{invalid, Result};
use crate::quantum::{measurement_rng, StandardGate, StateVector};

/// Growth factor of the iteration-count range between rounds (Boyer, Brassard,
/// Hoyer and Tapp use 6/5; any value in (1, 4/3) works).
const SCHEDULE_GROWTH: f64 = 6.0 / 5.0;

/// Marks basis indices of a `2^n` domain.
pub struct Oracle<'a> {
    domain_size: usize,
    predicate: Box<dyn Fn(usize) -> bool + Send + Sync + 'a>,
}

impl<'a> Oracle<'a> {
    pub fn new(
        domain_size: usize,
        predicate: impl Fn(usize) -> bool + Send + Sync + 'a,
    ) -> Result<Self> {
        if domain_size < 2 || !domain_size.is_power_of_two() {
            return invalid(format!(
                "oracle domain {domain_size} is not a power of two >= 2"
            ));
        }
        Ok(Self {
            domain_size,
            predicate: Box::new(predicate),
        })
    }

    pub fn from_marked(domain_size: usize, marked: &[usize]) -> Result<Oracle<'static>> {
        if let Some(&bad) = marked.iter().find(|&&m| m >= domain_size) {
            return invalid(format!("marked index {bad} outside domain {domain_size}"));
        }
        let set: Vec<usize> = marked.to_vec();
        Oracle::new(domain_size, move |i| set.contains(&i))
    }

    pub fn domain_size(&self) -> usize {
        self.domain_size
    }

    pub fn n_qubits(&self) -> usize {
        self.domain_size.trailing_zeros() as usize
    }

    pub fn is_marked(&self, index: usize) -> bool {
        index < self.domain_size && (self.predicate)(index)
    }

    pub fn marked_count(&self) -> usize {
        (0..self.domain_size).filter(|&i| self.is_marked(i)).count()
    }
}

impl fmt::Debug for Oracle<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Oracle")
            .field("domain_size", &self.domain_size)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GroverResult {
    pub found_index: Option<usize>,
    /// Total Grover iterations executed across all rounds.
    pub iterations_used: usize,
    /// Quantum queries plus classical verifications.
    pub oracle_calls: usize,
    pub rounds: usize,
    pub verified: bool,
}

/// Uniform superposition over the oracle's domain, prepared with H on every qubit.
pub fn uniform_state(n_qubits: usize) -> Result<StateVector> {
    let mut s = StateVector::basis(n_qubits, 0)?;
    hadamard_all(&mut s)?;
    Ok(s)
}

fn hadamard_all(state: &mut StateVector) -> Result<()> {
    let h = StandardGate::H.gate();
    for q in 0..state.n_qubits() {
        state.apply_gate_in_place(&h, &[q])?;
    }
    Ok(())
}

/// Reflection `2|0><0| - I`.
fn zero_query(state: &mut StateVector) {
    state.phase_flip_where(|i| i != 0);
}

fn iterate_in_place(state: &mut StateVector, oracle: &Oracle<'_>) -> Result<()> {
    state.phase_flip_where(|i| oracle.is_marked(i));
    hadamard_all(state)?;
    zero_query(state);
    hadamard_all(state)
}

/// One Grover iteration: phase flip on marked indices, then inversion about
/// the mean.
pub fn grover_iterate(state: &StateVector, oracle: &Oracle<'_>) -> Result<StateVector> {
    if state.dim() != oracle.domain_size() {
        return invalid(format!(
            "state dimension {} does not match oracle domain {}",
            state.dim(),
            oracle.domain_size()
        ));
    }
    let mut out = state.clone();
    iterate_in_place(&mut out, oracle)?;
    Ok(out)
}

/// Total probability mass on marked indices.
pub fn marked_probability(state: &StateVector, oracle: &Oracle<'_>) -> f64 {
    state
        .probabilities()
        .into_iter()
        .enumerate()
        .filter(|(i, _)| oracle.is_marked(*i))
        .map(|(_, p)| p)
        .sum()
}

fn check_counts(n: usize, m: usize) -> Result<()> {
    if m == 0 {
        return invalid("success probability is undefined with no marked items");
    }
    if m > n {
        return invalid(format!("marked count {m} exceeds domain size {n}"));
    }
    Ok(())
}

/// `sin^2((2k + 1) theta)` with `theta = asin(sqrt(M / N))`.
pub fn success_probability(n: usize, m: usize, k: usize) -> Result<f64> {
    check_counts(n, m)?;
    let theta = (m as f64 / n as f64).sqrt().asin();
    Ok(((2 * k + 1) as f64 * theta).sin().powi(2))
}

/// `floor(pi / (4 theta))` with `theta = asin(sqrt(M / N))`.
///
/// This equals `floor((pi/4) sqrt(N/M))` whenever `M << N` and guarantees
/// `success_probability(N, M, k) >= 1 - M/N` for every `M`.
pub fn optimal_iterations(n: usize, m: usize) -> Result<usize> {
    check_counts(n, m)?;
    let theta = (m as f64 / n as f64).sqrt().asin();
    Ok((FRAC_PI_4 / theta).floor() as usize)
}

/// Searches for a marked index without knowing how many there are.
///
/// Each round draws an iteration count uniformly from `[0, m)`, runs that many
/// Grover iterations on a fresh uniform superposition, measures, and checks the
/// outcome against the oracle classically. `m` grows by 6/5 per round up to
/// `sqrt(N)`. Returns no index if `max_rounds` rounds all fail, which is
/// always the case when nothing is marked.
pub fn grover_search(
    oracle: &Oracle<'_>,
    n_qubits: usize,
    seed: u64,
    max_rounds: usize,
) -> Result<GroverResult> {
    if oracle.domain_size() != 1usize << n_qubits {
        return invalid(format!(
            "oracle domain {} is not 2^{n_qubits}",
            oracle.domain_size()
        ));
    }
    let mut rng = measurement_rng(seed);
    let cap = (oracle.domain_size() as f64).sqrt();
    let mut range = 1.0f64;
    let mut result = GroverResult::default();

    let start = uniform_state(n_qubits)?;
    for _ in 0..max_rounds {
        result.rounds += 1;
        let iterations = rng.random_range(0..range.ceil() as usize);
        let mut state = start.clone();
        for _ in 0..iterations {
            iterate_in_place(&mut state, oracle)?;
        }
        result.iterations_used += iterations;
        result.oracle_calls += iterations + 1;

        let candidate = state.measure_with(&mut rng)?.basis_index;
        if oracle.is_marked(candidate) {
            result.found_index = Some(candidate);
            result.verified = true;
            return Ok(result);
        }
        range = (range * SCHEDULE_GROWTH).min(cap);
    }
    Ok(result)
}
