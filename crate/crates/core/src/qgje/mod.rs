//! Exact Gauss-Jordan elimination with a pluggable pivot search.
//!
//! The reduced row-echelon form of a matrix is unique, so any nonzero row in
//! the active column is an acceptable pivot. This is what lets the Grover
//! backend, which returns an arbitrary verified nonzero row, produce results
//! identical to the classical first-nonzero scan.

mod matrix;

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};

pub use matrix::{
    parse_rational, rational_from_f64, rational_to_f64, weighted_cross, weighted_gram, DyadicSum,
    Matrix, Rational,
};

use crate::error::{invalid, Error, Result};
use crate::grover::{grover_search, Oracle};

/// Rounds of randomized Grover search before a column is declared pivot-free.
/// Each round past the warm-up succeeds with probability at least 1/4 when a
/// nonzero entry exists.
pub const PIVOT_SEARCH_ROUNDS: usize = 96;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Backend {
    #[default]
    Classical,
    QuantumSim,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Classical => "classical",
            Backend::QuantumSim => "quantum-sim",
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "classical" => Ok(Backend::Classical),
            "quantum-sim" | "quantum" => Ok(Backend::QuantumSim),
            other => invalid(format!(
                "unknown backend {other:?} (expected classical or quantum-sim)"
            )),
        }
    }
}

/// Work counters for the pivot searches performed by one elimination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BackendStats {
    pub pivot_searches: usize,
    /// Entries inspected by the classical scan.
    pub comparisons: usize,
    pub oracle_calls: usize,
    pub grover_rounds: usize,
    pub grover_iterations: usize,
}

impl BackendStats {
    pub fn merge(&mut self, other: &BackendStats) {
        self.pivot_searches += other.pivot_searches;
        self.comparisons += other.comparisons;
        self.oracle_calls += other.oracle_calls;
        self.grover_rounds += other.grover_rounds;
        self.grover_iterations += other.grover_iterations;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PivotSearch {
    pub offset: Option<usize>,
    pub stats: BackendStats,
}

/// Locates a nonzero entry in `column_slice`.
///
/// The classical backend returns the first nonzero offset. The quantum backend
/// pads the slice with zeros to a power of two (at least 2), marks the nonzero
/// offsets, and returns whatever verified index Grover search produces.
pub fn find_pivot(column_slice: &[Rational], backend: Backend, seed: u64) -> Result<PivotSearch> {
    let mut stats = BackendStats {
        pivot_searches: 1,
        ..BackendStats::default()
    };
    let offset = match backend {
        Backend::Classical => {
            let found = column_slice.iter().position(|v| !v.is_zero());
            stats.comparisons = found.map_or(column_slice.len(), |i| i + 1);
            found
        }
        Backend::QuantumSim => {
            if column_slice.is_empty() {
                None
            } else {
                let domain = column_slice.len().next_power_of_two().max(2);
                let oracle = Oracle::new(domain, |i| {
                    column_slice.get(i).is_some_and(|v| !v.is_zero())
                })?;
                let result = grover_search(&oracle, oracle.n_qubits(), seed, PIVOT_SEARCH_ROUNDS)?;
                stats.oracle_calls = result.oracle_calls;
                stats.grover_rounds = result.rounds;
                stats.grover_iterations = result.iterations_used;
                result.found_index
            }
        }
    };
    Ok(PivotSearch { offset, stats })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RrefResult {
    pub rref: Matrix,
    pub pivot_cols: Vec<usize>,
    pub rank: usize,
    pub stats: BackendStats,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Reduced row-echelon form over the rationals.
pub fn rref(m: &Matrix, backend: Backend, seed: u64) -> Result<RrefResult> {
    let mut a = m.clone();
    let mut pivot_cols = Vec::new();
    let mut stats = BackendStats::default();
    let mut row = 0;

    for col in 0..a.cols() {
        if row == a.rows() {
            break;
        }
        let slice: Vec<Rational> = (row..a.rows()).map(|r| a.get(r, col).clone()).collect();
        let search = find_pivot(&slice, backend, splitmix64(seed ^ col as u64))?;
        stats.merge(&search.stats);
        let Some(offset) = search.offset else {
            continue;
        };

        a.swap_rows(row, row + offset);
        let inv = a.get(row, col).recip();
        a.scale_row(row, &inv);
        for r in 0..a.rows() {
            if r != row && !a.get(r, col).is_zero() {
                let factor = a.get(r, col).clone();
                a.sub_scaled_row(r, row, &factor);
            }
        }
        pivot_cols.push(col);
        row += 1;
    }

    Ok(RrefResult {
        rank: pivot_cols.len(),
        rref: a,
        pivot_cols,
        stats,
    })
}

fn check_rhs(a: &Matrix, b: &[Rational]) -> Result<()> {
    if b.len() != a.rows() {
        return invalid(format!(
            "right-hand side has length {}, matrix has {} rows",
            b.len(),
            a.rows()
        ));
    }
    Ok(())
}

/// Kronecker-Capelli test: the system is consistent iff the augmented column
/// is not a pivot column of `rref([A | b])`.
pub fn is_consistent(a: &Matrix, b: &[Rational], backend: Backend) -> Result<bool> {
    check_rhs(a, b)?;
    let reduced = rref(&a.augment(b)?, backend, 0)?;
    Ok(reduced.pivot_cols.last() != Some(&a.cols()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolutionSet {
    pub consistent: bool,
    /// Solution with every free variable set to zero.
    pub particular: Option<Vec<Rational>>,
    pub nullspace_basis: Vec<Vec<Rational>>,
    pub rank: usize,
    pub stats: BackendStats,
}

impl SolutionSet {
    pub fn is_unique(&self) -> bool {
        self.consistent && self.nullspace_basis.is_empty()
    }
}

/// All solutions of `A x = b`: a particular solution plus a nullspace basis.
pub fn solve(a: &Matrix, b: &[Rational], backend: Backend, seed: u64) -> Result<SolutionSet> {
    check_rhs(a, b)?;
    let n = a.cols();
    let reduced = rref(&a.augment(b)?, backend, seed)?;
    let consistent = reduced.pivot_cols.last() != Some(&n);

    let mut nullspace_basis = Vec::new();
    let particular = if consistent {
        let r = &reduced.rref;
        let mut x = vec![Rational::zero(); n];
        for (i, &pc) in reduced.pivot_cols.iter().enumerate() {
            x[pc] = r.get(i, n).clone();
        }
        for free in (0..n).filter(|c| !reduced.pivot_cols.contains(c)) {
            let mut v = vec![Rational::zero(); n];
            v[free] = Rational::one();
            for (i, &pc) in reduced.pivot_cols.iter().enumerate() {
                v[pc] = -r.get(i, free).clone();
            }
            nullspace_basis.push(v);
        }
        Some(x)
    } else {
        None
    };

    let rank = reduced.rank - usize::from(!consistent);
    Ok(SolutionSet {
        consistent,
        particular,
        nullspace_basis,
        rank,
        stats: reduced.stats,
    })
}

/// Inverse of a square matrix, or `None` when it is singular.
pub fn inverse(a: &Matrix) -> Result<Option<Matrix>> {
    inverse_with(a, Backend::Classical, 0)
}

/// Gauss-Jordan on `[A | I]` with the given pivot backend.
pub fn inverse_with(a: &Matrix, backend: Backend, seed: u64) -> Result<Option<Matrix>> {
    if a.rows() != a.cols() {
        return invalid(format!("cannot invert a {}x{} matrix", a.rows(), a.cols()));
    }
    let n = a.rows();
    let mut entries = Vec::with_capacity(n * 2 * n);
    let id = Matrix::identity(n);
    for r in 0..n {
        entries.extend_from_slice(a.row(r));
        entries.extend_from_slice(id.row(r));
    }
    let reduced = rref(&Matrix::new(n, 2 * n, entries)?, backend, seed)?;
    if reduced.pivot_cols.iter().take_while(|&&c| c < n).count() < n {
        return Ok(None);
    }
    let cols: Vec<usize> = (n..2 * n).collect();
    Ok(Some(reduced.rref.select_columns(&cols)))
}

/// Moore-Penrose pseudoinverse via the rank factorization `A = C F`, where
/// `C` holds the pivot columns of `A` and `F` the nonzero rows of its RREF:
/// `A+ = F^T (F F^T)^-1 (C^T C)^-1 C^T`.
pub fn pseudoinverse(a: &Matrix) -> Matrix {
    pseudoinverse_with(a, Backend::Classical, 0)
        .expect("classical elimination of a well-formed matrix cannot fail")
}

pub fn pseudoinverse_with(a: &Matrix, backend: Backend, seed: u64) -> Result<Matrix> {
    let reduced = rref(a, backend, seed)?;
    if reduced.rank == 0 {
        return Ok(Matrix::zeros(a.cols(), a.rows()));
    }
    let c = a.select_columns(&reduced.pivot_cols);
    let f = reduced.rref.top_rows(reduced.rank);
    let ct = c.transpose();
    let ft = f.transpose();
    let gram_c = inverse(&(&ct * &c))?
        .ok_or_else(|| Error::Integrity("pivot columns are not independent".into()))?;
    let gram_f = inverse(&(&f * &ft))?
        .ok_or_else(|| Error::Integrity("RREF rows are not independent".into()))?;
    Ok(&(&(&ft * &gram_f) * &gram_c) * &ct)
}
