use cothp::numerics::{lower_triangular_solve, lq_decompose, off_diagonal_frobenius, CMatrix};
use cothp::sigproc::{modulo_reduce, Constellation, Modulation};
use cothp::Complex;
use proptest::prelude::*;

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = CMatrix<f64>> {
    prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), rows * cols).prop_map(move |v| {
        let data = v.into_iter().map(|(re, im)| Complex::new(re, im)).collect();
        CMatrix::new(rows, cols, data).unwrap()
    })
}

fn wide_matrix() -> impl Strategy<Value = CMatrix<f64>> {
    (1usize..=6, 0usize..=4).prop_flat_map(|(m, extra)| matrix(m, m + extra))
}

fn modulation() -> impl Strategy<Value = Modulation> {
    prop_oneof![Just(Modulation::Qpsk), Just(Modulation::Qam16)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn lq_reconstructs_with_orthonormal_rows(a in wide_matrix()) {
        // random entries are full rank with probability one
        let f = lq_decompose(&a).unwrap();
        let m = a.rows();
        prop_assert!((&(&f.l * &f.q) - &a).frobenius_norm() <= 1e-10 * a.frobenius_norm().max(1.0));
        prop_assert!((&(&f.q * &f.q.adjoint()) - &CMatrix::identity(m)).max_abs() < 1e-10);
        for i in 0..m {
            prop_assert!(f.l[(i, i)].im == 0.0 && f.l[(i, i)].re > 0.0);
            for j in i + 1..m {
                prop_assert!(f.l[(i, j)].norm() == 0.0);
            }
        }
    }

    #[test]
    fn modulo_lands_in_box_and_is_congruent(re in -50.0f64..50.0, im in -50.0f64..50.0, m in modulation()) {
        let tau = m.default_tau();
        let x = Complex::new(re, im);
        let y = modulo_reduce(x, tau);
        prop_assert!(y.re >= -tau / 2.0 && y.re < tau / 2.0);
        prop_assert!(y.im >= -tau / 2.0 && y.im < tau / 2.0);
        prop_assert_eq!(modulo_reduce(y, tau), y);
        let k = (x - y) / tau;
        prop_assert!((k.re - k.re.round()).abs() < 1e-9 && (k.im - k.im.round()).abs() < 1e-9);
    }

    #[test]
    fn detection_inverts_mapping_under_lattice_shifts(
        m in modulation(),
        symbols in 1usize..8,
        seed_bits in prop::collection::vec(any::<bool>(), 32),
        shifts in prop::collection::vec((-3i32..=3, -3i32..=3), 8),
    ) {
        let c = Constellation::<f64>::new(m);
        let bits = &seed_bits[..symbols * c.bits_per_symbol()];
        let frame = c.map_bits(bits).unwrap();
        let tau = c.tau();
        let shifted: Vec<_> = frame
            .symbols
            .iter()
            .zip(&shifts)
            .map(|(&s, &(a, b))| s + Complex::new(a as f64 * tau, b as f64 * tau))
            .collect();
        let out = c.detect_symbols(&shifted);
        prop_assert_eq!(&out.bits[..], bits);
        prop_assert_eq!(c.slice(&frame.symbols).bits, bits.to_vec());
    }

    #[test]
    fn triangular_solve_has_small_residual(
        (b, v) in (1usize..=8).prop_flat_map(|n| (matrix(n, n), prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), n))),
    ) {
        let n = b.rows();
        // strengthen the diagonal so the system is well posed
        let b = CMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Less => Complex::new(0.0, 0.0),
            std::cmp::Ordering::Equal => b[(i, j)] + Complex::new(4.0, 0.0),
            std::cmp::Ordering::Greater => b[(i, j)],
        });
        let v: Vec<_> = v.into_iter().map(|(re, im)| Complex::new(re, im)).collect();
        let u = lower_triangular_solve(&b, &v).unwrap();
        let r = b.mul_vec(&u);
        for (x, y) in r.iter().zip(&v) {
            prop_assert!((x - y).norm() < 1e-10);
        }
    }

    #[test]
    fn off_diagonal_norm_vanishes_only_for_diagonal(a in (1usize..=6).prop_flat_map(|n| matrix(n, n)), keep_off in any::<bool>()) {
        let n = a.rows();
        let a = if keep_off { a } else { CMatrix::from_fn(n, n, |i, j| if i == j { a[(i, j)] } else { Complex::new(0.0, 0.0) }) };
        let off = off_diagonal_frobenius(&a).unwrap();
        let is_diag = (0..n).all(|i| (0..n).all(|j| i == j || a[(i, j)].norm() == 0.0));
        prop_assert_eq!(off == 0.0, is_diag);
    }
}
