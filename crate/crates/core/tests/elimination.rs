use num_bigint::BigInt;
use num_traits::Zero;
use proptest::prelude::*;
use qnpr_core::qgje::{is_consistent, pseudoinverse, rref, solve, Backend, Matrix, Rational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_matrix(rng: &mut ChaCha8Rng, max_rows: usize, max_cols: usize) -> Matrix {
    let rows = rng.random_range(1..=max_rows);
    let cols = rng.random_range(1..=max_cols);
    let entries = (0..rows * cols)
        .map(|_| {
            let num: i64 = rng.random_range(-3..=3);
            let den: i64 = [1, 2, 3][rng.random_range(0..3)];
            Rational::new(BigInt::from(num), BigInt::from(den))
        })
        .collect();
    let mut m = Matrix::new(rows, cols, entries).unwrap();
    // Force rank deficiency in about a third of the cases.
    if rows >= 2 && rng.random_bool(0.33) {
        let src = rng.random_range(0..rows);
        let dst = (src + 1) % rows;
        let k = Rational::from_integer(BigInt::from(rng.random_range(-2..=2)));
        for c in 0..cols {
            let v = m.get(src, c) * &k;
            m.set(dst, c, v);
        }
    }
    m
}

fn corpus(count: usize) -> Vec<Matrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(20240601);
    (0..count).map(|_| random_matrix(&mut rng, 6, 8)).collect()
}

fn assert_is_rref(m: &Matrix, pivots: &[usize]) {
    for (i, &pc) in pivots.iter().enumerate() {
        assert!(m.get(i, pc) == &Rational::from_integer(1.into()));
        for r in 0..m.rows() {
            if r != i {
                assert!(m.get(r, pc).is_zero());
            }
        }
        // Nothing to the left of a pivot in its row.
        for c in 0..pc {
            assert!(m.get(i, c).is_zero());
        }
    }
    for r in pivots.len()..m.rows() {
        assert!(m.row(r).iter().all(Zero::is_zero));
    }
}

#[test]
fn backends_agree_on_random_corpus() {
    for (k, m) in corpus(200).iter().enumerate() {
        let a = rref(m, Backend::Classical, 0).unwrap();
        let b = rref(m, Backend::QuantumSim, k as u64).unwrap();
        assert_eq!(a.rref, b.rref, "matrix {k}");
        assert_eq!(a.pivot_cols, b.pivot_cols, "matrix {k}");
        assert_is_rref(&a.rref, &a.pivot_cols);
        assert_eq!(a.rank, a.pivot_cols.len());
        assert!(b.stats.oracle_calls > 0);
    }
}

#[test]
fn rref_is_idempotent_and_rank_is_transpose_invariant() {
    for m in corpus(200) {
        let r = rref(&m, Backend::Classical, 0).unwrap();
        let rr = rref(&r.rref, Backend::Classical, 0).unwrap();
        assert_eq!(rr.rref, r.rref);
        let rt = rref(&m.transpose(), Backend::Classical, 0).unwrap();
        assert_eq!(rt.rank, r.rank);
    }
}

#[test]
fn penrose_identities_hold_exactly() {
    for m in corpus(100) {
        let p = pseudoinverse(&m);
        let ap = &m * &p;
        let pa = &p * &m;
        assert_eq!(&ap * &m, m);
        assert_eq!(&pa * &p, p);
        assert_eq!(ap.transpose(), ap);
        assert_eq!(pa.transpose(), pa);
    }
}

#[test]
fn solve_agrees_with_consistency_test() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for m in corpus(150) {
        let b: Vec<Rational> = (0..m.rows())
            .map(|_| Rational::from_integer(BigInt::from(rng.random_range(-4..=4))))
            .collect();
        for backend in [Backend::Classical, Backend::QuantumSim] {
            let s = solve(&m, &b, backend, 5).unwrap();
            assert_eq!(s.consistent, is_consistent(&m, &b, backend).unwrap());
            if let Some(x) = &s.particular {
                assert_eq!(m.mul_vec(x).unwrap(), b);
                for v in &s.nullspace_basis {
                    assert!(m.mul_vec(v).unwrap().iter().all(Zero::is_zero));
                }
                assert_eq!(s.nullspace_basis.len(), m.cols() - s.rank);
            }
        }
    }
}

#[test]
fn nullspace_basis_is_independent() {
    for m in corpus(100) {
        let zero = vec![Rational::zero(); m.rows()];
        let s = solve(&m, &zero, Backend::Classical, 0).unwrap();
        assert!(s.consistent);
        if s.nullspace_basis.is_empty() {
            continue;
        }
        let rows = s.nullspace_basis.clone();
        let basis = Matrix::from_rows(rows).unwrap();
        assert_eq!(
            rref(&basis, Backend::Classical, 0).unwrap().rank,
            basis.rows()
        );
    }
}

fn small_rational() -> impl Strategy<Value = Rational> {
    (-5i64..=5, 1i64..=4).prop_map(|(n, d)| Rational::new(n.into(), d.into()))
}

fn small_matrix() -> impl Strategy<Value = Matrix> {
    (1usize..=4, 1usize..=5).prop_flat_map(|(r, c)| {
        prop::collection::vec(small_rational(), r * c)
            .prop_map(move |e| Matrix::new(r, c, e).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quantum_backend_matches_for_any_seed(m in small_matrix(), seed in any::<u64>()) {
        let a = rref(&m, Backend::Classical, 0).unwrap();
        let b = rref(&m, Backend::QuantumSim, seed).unwrap();
        prop_assert_eq!(a.rref, b.rref);
        prop_assert_eq!(a.pivot_cols, b.pivot_cols);
    }

    #[test]
    fn pseudoinverse_of_pseudoinverse_is_original(m in small_matrix()) {
        prop_assert_eq!(pseudoinverse(&pseudoinverse(&m)), m);
    }
}
