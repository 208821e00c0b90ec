use dtb_core::dtb::{chebyshev_derivative, finite_difference_derivative};
use dtb_core::forward::{synthesize_dense, DataSet};
use dtb_core::gram::GramPair;
use dtb_core::inversion::{envelope, impedance_estimates};
use dtb_core::linalg::sparse::SparseMatrix;
use dtb_core::linalg::{polar_left, BlockMatrix, DenseMatrix};
use dtb_core::mimo_rom::{self, block_cholesky, QPolicy};
use dtb_core::siso_rom;
use proptest::prelude::*;

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = DenseMatrix> {
    proptest::collection::vec(-1.0f64..1.0, rows * cols)
        .prop_map(move |v| DenseMatrix::from_row_major(rows, cols, v).unwrap())
}

fn spd(size: usize) -> impl Strategy<Value = DenseMatrix> {
    matrix(size, size).prop_map(move |a| {
        let mut x = a.t_matmul(&a);
        for i in 0..size {
            x[(i, i)] += 0.5;
        }
        x
    })
}

/// Tridiagonal operator with spectrum inside `(0, 3)` and a few sensor vectors.
fn operator_and_sensors(m: usize) -> impl Strategy<Value = (SparseMatrix, DenseMatrix)> {
    (10usize..24)
        .prop_flat_map(move |n| {
            (proptest::collection::vec(0.6f64..1.4, n), proptest::collection::vec(0.1f64..0.5, n - 1), matrix(n, m))
        })
        .prop_map(|(diag, off, b)| {
            let n = diag.len();
            let mut t = Vec::new();
            for i in 0..n {
                t.push((i, i, diag[i]));
                if i + 1 < n {
                    t.push((i, i + 1, -off[i]));
                    t.push((i + 1, i, -off[i]));
                }
            }
            (SparseMatrix::from_triplets(n, &t).unwrap(), b)
        })
}

fn random_frames(m: usize, count: usize) -> impl Strategy<Value = DataSet> {
    proptest::collection::vec(matrix(m, m), count)
        .prop_map(|fs| DataSet::new(1.0, fs.into_iter().map(|f| f.symmetrized()).collect()).unwrap())
}

fn bidiagonal_blocks(n: usize, m: usize) -> impl Strategy<Value = DenseMatrix> {
    proptest::collection::vec(-0.2f64..0.2, 2 * n * m * m).prop_map(move |noise| {
        let mut l = DenseMatrix::zeros(n * m, n * m);
        let mut it = noise.into_iter();
        for j in 0..n {
            for a in 0..m {
                for b in 0..m {
                    let eye = if a == b { 1.0 } else { 0.0 };
                    l[(j * m + a, j * m + b)] = -eye + it.next().unwrap();
                    let sub = eye + it.next().unwrap();
                    if j + 1 < n {
                        l[((j + 1) * m + a, j * m + b)] = sub;
                    }
                }
            }
        }
        l
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gram_matrices_are_symmetric_with_data_on_the_first_block_row(data in random_frames(2, 8)) {
        let g = GramPair::from_data(&data, 4).unwrap();
        prop_assert_eq!(g.mass.dense().asymmetry(), 0.0);
        prop_assert_eq!(g.stiff.dense().asymmetry(), 0.0);
        for j in 0..4 {
            prop_assert!(g.mass.block(0, j).sub(data.frame(j)).max_abs() <= 1e-15);
        }
    }

    #[test]
    fn block_cholesky_reconstructs(x in spd(6), triangular in any::<bool>()) {
        let policy = if triangular { QPolicy::Triangular } else { QPolicy::Identity };
        let blocks = BlockMatrix::from_dense(3, 2, x.clone());
        let r = block_cholesky(&blocks, policy).unwrap();
        let back = r.dense().t_matmul(r.dense());
        prop_assert!(back.sub(&x).max_abs() <= 1e-11 * x.max_abs());
        for i in 1..3 {
            for j in 0..i {
                prop_assert_eq!(r.block(i, j).max_abs(), 0.0);
            }
        }
    }

    #[test]
    fn polar_factors_are_spd_and_orthogonal(a in spd(4), q in matrix(4, 4)) {
        let orth = polar_left(&q.add(&DenseMatrix::identity(4).scale(2.0))).unwrap().orth_part;
        let m = a.matmul(&orth);
        let p = polar_left(&m).unwrap();
        let defect = p.orth_part.t_matmul(&p.orth_part).sub(&DenseMatrix::identity(4)).max_abs();
        prop_assert!(defect <= 1e-12);
        prop_assert!(p.spd_part.asymmetry() <= 1e-12);
        prop_assert!(p.spd_part.matmul(&p.orth_part).sub(&m).max_abs() <= 1e-10 * m.max_abs());
    }

    #[test]
    fn scalar_rom_matches_its_data((op, b) in operator_and_sensors(1)) {
        let n = 4;
        let data = synthesize_dense(&op, &b, 1.0, 2 * n).unwrap();
        let rom = siso_rom::build_rom(&data, n);
        prop_assume!(rom.is_ok());
        let rom = rom.unwrap();
        let fit = siso_rom::rom_data(&rom, 2 * n).unwrap();
        prop_assert!(fit.relative_distance(&data).unwrap() <= 1e-7);
        let factor = siso_rom::factorize(&rom).unwrap();
        let rebuilt = factor.l_tilde.to_dense();
        let xi = siso_rom::xi(&rom.p_tilde, rom.tau);
        prop_assert!(rebuilt.matmul(&rebuilt.transpose()).sub(&xi).max_abs() <= 1e-9 * xi.max_abs());
    }

    #[test]
    fn block_rom_matches_its_data((op, b) in operator_and_sensors(2)) {
        let n = 3;
        let data = synthesize_dense(&op, &b, 1.0, 2 * n).unwrap();
        let rom = mimo_rom::build_rom(&data, n);
        prop_assume!(rom.is_ok());
        let rom = rom.unwrap();
        let fit = mimo_rom::rom_data(&rom, 2 * n).unwrap();
        prop_assert!(fit.relative_distance(&data).unwrap() <= 1e-7);
        prop_assert!(fit.frames().iter().all(|f| f.asymmetry() <= 1e-10));
    }

    #[test]
    fn chain_rule_agrees_with_finite_differences(l0 in bidiagonal_blocks(5, 2), l1 in bidiagonal_blocks(5, 2)) {
        let l = l0.add(&l1.sub(&l0).scale(0.1));
        let chain = chebyshev_derivative(&l, &l0, 1.0, 10, 2).unwrap();
        let fd = finite_difference_derivative(&l, &l0, 1.0, 10, 2, 1e-6).unwrap();
        let scale = fd.iter().fold(0.0f64, |a, f| a.max(f.max_abs())).max(1e-12);
        for (c, f) in chain.frames.iter().zip(&fd) {
            prop_assert!(c.sub(f).max_abs() <= 1e-5 * scale);
        }
    }

    #[test]
    fn reference_impedance_is_unity((op, b) in operator_and_sensors(1)) {
        let data = synthesize_dense(&op, &b, 1.0, 8).unwrap();
        let factor = siso_rom::build_rom(&data, 4).and_then(|r| siso_rom::factorize(&r));
        prop_assume!(factor.is_ok());
        let factor = factor.unwrap();
        let est = impedance_estimates(&factor, &factor).unwrap();
        prop_assert!(est.primary_values.iter().chain(&est.dual_values).all(|&v| v == 1.0));
        for j in 1..4 {
            prop_assert!(est.dual_nodes[j - 1] < est.primary_nodes[j]);
            prop_assert!(est.primary_nodes[j] < est.dual_nodes[j]);
        }
    }

    #[test]
    fn envelope_dominates_the_trace(trace in proptest::collection::vec(-1.0f64..1.0, 4..64)) {
        let env = envelope(&trace);
        for (e, t) in env.iter().zip(&trace) {
            prop_assert!(*e >= t.abs() - 1e-12);
        }
    }
}
