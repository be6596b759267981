use nalgebra::{Complex, DMatrix, DVector};
use tpmeasure::hs_extension::*;
use tpmeasure::linalg::*;
use tpmeasure::tensor_norms::hs_norm;
use tpmeasure::vector_measures::{total_variation_product, Scalars, VectorMeasure};
use tpmeasure::finite_algebra::FiniteAlgebra;
use tpmeasure::Error;
use proptest::prelude::*;

fn c(x: f64) -> C64 {
    Complex::new(x, 0.0)
}

fn diag(xs: &[f64]) -> OpMatrix {
    DMatrix::from_fn(xs.len(), xs.len(), |i, j| c(if i == j { xs[i] } else { 0.0 }))
}

/// Direct double loop over atom pairs.
fn brute_total_variation(xi: &VectorMeasure, eta: &VectorMeasure, t: &OpMatrix) -> f64 {
    let mut total = 0.0;
    for a in xi.atoms() {
        for b in eta.atoms() {
            let tb = t * b;
            let mut inner = c(0.0);
            for i in 0..a.len() {
                inner += a[i].conj() * tb[i];
            }
            total += inner.norm();
        }
    }
    total
}

fn assert_construction(con: &HsConstruction) {
    let scale = 1.0 + operator_norm(&con.t);
    assert!((con.achieved - con.hs).abs() <= 1e-8 * scale, "achieved {} vs hs {}", con.achieved, con.hs);
    assert!(con.xi.is_orthogonal() && con.eta.is_orthogonal());
    assert!((con.xi_norm() - 1.0).abs() <= 1e-10);
    if !con.eta_degenerate {
        assert!((con.eta_norm() - 1.0).abs() <= 1e-10);
    }
}

#[test]
fn one_by_one_operator() {
    let con = construct_hs_measures(&diag(&[2.5]), Variant::ComplexDft).unwrap();
    assert!((con.achieved - 2.5).abs() < 1e-12);
    assert!((con.xi.atoms()[0].norm() - 1.0).abs() < 1e-12);
    assert!((con.eta.atoms()[0].norm() - 1.0).abs() < 1e-12);
}

#[test]
fn diag_three_four_reaches_five() {
    let t = diag(&[3.0, 4.0]);
    for variant in [Variant::ComplexDft, Variant::RealHadamard] {
        let con = construct_hs_measures(&t, variant).unwrap();
        assert!((brute_total_variation(&con.xi, &con.eta, &t) - 5.0).abs() < 1e-12);
        assert_construction(&con);
    }
}

#[test]
fn identity_reaches_root_n() {
    for n in 1..=9 {
        let con = construct_hs_measures(&OpMatrix::identity(n, n), Variant::ComplexDft).unwrap();
        assert!((con.achieved - (n as f64).sqrt()).abs() < 1e-10);
        for a in con.xi.atoms() {
            for b in con.eta.atoms() {
                // |(ξ_j|η_k)| = |(e_j|g_k)| / n = n^{-3/2} for the identity.
                assert!((a.dotc(b).norm() - (n as f64).powf(-1.5)).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn rotation_entries_are_flat() {
    for (variant, n) in [(Variant::ComplexDft, 7), (Variant::RealHadamard, 8)] {
        let r = rotation_matrix(variant, n).unwrap();
        let gram = r.adjoint() * &r;
        assert!((gram - OpMatrix::identity(n, n)).norm() < 1e-12);
        assert!(r.iter().all(|z| (z.norm() - 1.0 / (n as f64).sqrt()).abs() < 1e-14));
    }
    let h = rotation_matrix(Variant::RealHadamard, 2).unwrap();
    let s = 1.0 / 2f64.sqrt();
    assert_eq!(h, DMatrix::from_row_slice(2, 2, &[c(s), c(s), c(s), c(-s)]));
}

#[test]
fn hadamard_variant_is_real() {
    let mut rng = seeded_rng(11);
    let g = random_real_matrix(&mut rng, 8, 8);
    let t = &g * g.adjoint();
    let con = construct_hs_measures(&t, Variant::RealHadamard).unwrap();
    assert_eq!(con.xi.scalars(), Scalars::Real);
    assert!(con.xi.atoms().iter().chain(con.eta.atoms()).all(|v| v.iter().all(|z| z.im == 0.0)));
    assert_construction(&con);
}

#[test]
fn rejections() {
    assert!(matches!(
        construct_hs_measures(&diag(&[1.0, 2.0, 3.0]), Variant::RealHadamard),
        Err(Error::NotPowerOfTwo(3))
    ));
    assert!(matches!(
        construct_hs_measures(&diag(&[1.0, -0.5]), Variant::ComplexDft),
        Err(Error::NotPositive { .. })
    ));
    let skew = DMatrix::from_row_slice(2, 2, &[c(1.0), c(2.0), c(0.0), c(1.0)]);
    assert!(matches!(
        construct_hs_measures(&skew, Variant::ComplexDft),
        Err(Error::NotHermitian { .. })
    ));
    let complex = DMatrix::from_row_slice(2, 2, &[c(1.0), Complex::new(0.0, 0.5), Complex::new(0.0, -0.5), c(1.0)]);
    assert!(matches!(
        construct_hs_measures(&complex, Variant::RealHadamard),
        Err(Error::ComplexCoefficients)
    ));
    assert!(construct_hs_measures(&complex, Variant::ComplexDft).is_ok());
}

#[test]
fn tiny_negative_eigenvalues_are_clipped() {
    let con = construct_hs_measures(&diag(&[1.0, -1e-12]), Variant::ComplexDft).unwrap();
    assert!((con.achieved - 1.0).abs() < 1e-12);
}

#[test]
fn zero_operator_is_degenerate() {
    let con = construct_hs_measures(&OpMatrix::zeros(3, 3), Variant::ComplexDft).unwrap();
    assert_eq!(con.achieved, 0.0);
    assert!(con.eta_degenerate);
    assert_eq!(con.eta_norm(), 0.0);
    assert!((con.xi_norm() - 1.0).abs() < 1e-12);
}

#[test]
fn two_hundred_random_positive_operators() {
    let mut rng = seeded_rng(2024);
    for i in 0..200 {
        let n = 1 + i % 8;
        let rank = 1 + (i / 8) % n;
        let t = random_psd(&mut rng, n, rank);
        let con = construct_hs_measures(&t, Variant::ComplexDft).unwrap();
        assert_construction(&con);
        assert!((brute_total_variation(&con.xi, &con.eta, &t) - con.achieved).abs() < 1e-9 * (1.0 + con.hs));
    }
}

#[test]
fn general_operators_use_polar_route() {
    let mut rng = seeded_rng(5);
    for (m, n) in [(3, 5), (5, 3), (4, 4)] {
        let t = random_complex_matrix(&mut rng, m, n);
        let con = construct_hs_measures_general(&t, Variant::ComplexDft).unwrap();
        assert_eq!(con.route, Route::Polar);
        assert_eq!(con.xi.n_atoms(), m.min(n));
        assert_eq!((con.xi.dim(), con.eta.dim()), (m, n));
        assert_construction(&con);
    }
    let t = random_real_matrix(&mut rng, 4, 6);
    let con = construct_hs_measures_general(&t, Variant::RealHadamard).unwrap();
    assert_eq!(con.xi.scalars(), Scalars::Real);
    assert_construction(&con);
    let psd = random_psd(&mut rng, 4, 2);
    assert_eq!(construct_hs_measures_general(&psd, Variant::ComplexDft).unwrap().route, Route::Positive);
}

#[test]
fn optimality_examples() {
    let r = optimality_check(&diag(&[1.0, 1.0]), 400, 1).unwrap();
    assert!(r.max_found <= 2f64.sqrt() + 1e-8 && !r.exceeded);
    assert!((r.constructed - 2f64.sqrt()).abs() < 1e-10);

    let u = DVector::from_vec(vec![c(0.6), Complex::new(0.0, 0.8), c(0.0)]);
    let t = (&u * u.adjoint()) * c(2.5);
    let r = optimality_check(&t, 50, 2).unwrap();
    assert!((r.max_found - 2.5).abs() < 1e-9);

    let r = optimality_check(&OpMatrix::zeros(2, 2), 10, 3).unwrap();
    assert_eq!(r.max_found, 0.0);
    assert!(matches!(
        optimality_check(&OpMatrix::identity(7, 7), 1, 0),
        Err(Error::EnumerationCap { size: 7, cap: 6 })
    ));
}

#[test]
fn optimality_on_random_operators() {
    let mut rng = seeded_rng(8);
    for n in 2..=6 {
        let t = random_psd(&mut rng, n, n);
        let r = optimality_check(&t, 200, n as u64).unwrap();
        assert!(!r.exceeded, "n = {n}: {} > {}", r.max_found, r.hs);
    }
}

/// Orthogonal measure with atoms `w_j u_j` for orthonormal columns `u_j`.
fn random_orthogonal_measure(rng: &mut rand_chacha::ChaCha8Rng, dim: usize, atoms: usize) -> VectorMeasure {
    let u = random_unitary(rng, dim);
    let w = random_complex_vector(rng, atoms);
    let vs = (0..atoms).map(|j| u.column(j) * w[j]).collect();
    VectorMeasure::complex(FiniteAlgebra::new(atoms).unwrap(), vs).unwrap().into_orthogonal().unwrap()
}

#[test]
fn boundedness_obstruction() {
    let mut rng = seeded_rng(99);
    for _ in 0..100 {
        let (m, n) = (5, 4);
        let xi = random_orthogonal_measure(&mut rng, m, 3);
        let eta = random_orthogonal_measure(&mut rng, n, 4);
        let t = random_complex_matrix(&mut rng, m, n);
        let tv = total_variation_product(&xi, &eta, &t).unwrap();
        assert!(tv <= hs_norm(&t) * xi.total_norm() * eta.total_norm() * (1.0 + 1e-12));
    }
}

#[test]
fn divergence_single_block() {
    let w = divergence_witness(&BlockSpec::Identity(vec![16]), 1, Some(&[0.5])).unwrap();
    assert_eq!(w.blocks[0].dim, 16);
    assert!((w.blocks[0].achieved - 1.0).abs() < 1e-12);
    assert!((w.blocks[0].xi_norm - 0.5).abs() < 1e-12);
    assert_eq!(w.tail_bound, 0.0);
    let dense = w.materialize(1).unwrap();
    assert!((dense.achieved - 1.0).abs() < 1e-10);
    assert!((dense.xi_norm() - 0.5).abs() < 1e-12);
}

#[test]
fn divergence_defaults() {
    let w = divergence_witness(&BlockSpec::MinimalIdentity, 5, None).unwrap();
    let dims: Vec<usize> = w.blocks.iter().map(|b| b.dim).collect();
    assert_eq!(dims, vec![16, 64, 256, 1024, 4096]);
    for (i, s) in w.partial_sums.iter().enumerate() {
        assert!(*s >= (i + 1) as f64 - 1e-8, "partial sum {i}: {s}");
    }
    assert!(w.diverges(1e-8));
    // Σ_{n≤5} 2^{-(n+1)} = 1/2 − 1/64.
    assert!((w.xi_norm_sq - (0.5 - 1.0 / 64.0)).abs() < 1e-12);
    assert!(w.xi_norm_sq + w.tail_bound.powi(2) < 1.0);
    for b in &w.blocks {
        assert!((b.achieved - b.eps * b.eps * b.hs).abs() < 1e-9);
    }
}

#[test]
fn divergence_structured_matches_dense() {
    let w = divergence_witness(&BlockSpec::MinimalIdentity, 3, None).unwrap();
    for i in 1..=3 {
        let dense = w.materialize(i).unwrap();
        let b = &w.blocks[i - 1];
        assert!((dense.achieved - b.achieved).abs() < 1e-9);
        assert!((dense.xi_norm() - b.xi_norm).abs() < 1e-12);
        assert!((dense.eta_norm() - b.eta_norm).abs() < 1e-12);
    }
    let m = w.xi_measure().unwrap();
    assert!((m.total_norm() - 0.5f64.sqrt()).abs() < 1e-12);
    let sq = tpmeasure::vector_measures::squeezing_witness(&m);
    assert!(sq.monotone && sq.bessel_holds);
    let diag_w =
        divergence_witness(&BlockSpec::Diagonal(vec![vec![3.0, 4.0, 0.0]]), 1, Some(&[0.5])).unwrap();
    assert!((diag_w.blocks[0].achieved - 0.25 * 25.0 / (3f64.sqrt() * 5.0) * 3f64.sqrt()).abs() < 1e-12);
    assert!((diag_w.materialize(1).unwrap().achieved - diag_w.blocks[0].achieved).abs() < 1e-12);
}

#[test]
fn divergence_edge_cases() {
    let w = divergence_witness(&BlockSpec::MinimalIdentity, 0, None).unwrap();
    assert!(w.blocks.is_empty() && w.partial_sums.is_empty());
    assert!(matches!(
        divergence_witness(&BlockSpec::MinimalIdentity, 6, None),
        Err(Error::BlockTooLarge { block: 6, required: 16384, cap: 4096 })
    ));
    assert!(matches!(
        divergence_witness(&BlockSpec::Identity(vec![16, 32]), 2, None),
        Err(Error::BlockTooSmall { block: 2, required: 64, actual: 32 })
    ));
    assert!(divergence_witness(&BlockSpec::Identity(vec![16]), 2, None).is_err());
    assert!(divergence_witness(&BlockSpec::MinimalIdentity, 1, Some(&[-1.0])).is_err());
    assert!(matches!(
        w.materialize(1),
        Err(Error::InvalidParameter(_))
    ));
}

#[test]
fn spectral_trivial_cases() {
    let mut rng = seeded_rng(3);
    let h = random_hermitian(&mut rng, 4);
    let t = random_complex_matrix(&mut rng, 4, 4);
    let xi = random_complex_vector(&mut rng, 4);
    let eta = random_complex_vector(&mut rng, 4);
    let r = spectral_demo(&h, &t, &xi, &eta, &[0.0]).unwrap();
    let expected = xi.dotc(&(&t * &eta));
    assert!((r.direct[0] - expected).norm() < 1e-12);
    assert!((r.product[0] - expected).norm() < 1e-12);

    let h = diag(&[1.0, -2.0, 0.5]);
    let v = DVector::from_vec(vec![c(1.0), Complex::new(0.0, 2.0), c(-1.0)]);
    let times: Vec<f64> = (0..10).map(|k| k as f64 * 0.7).collect();
    let r = spectral_demo(&h, &OpMatrix::identity(3, 3), &v, &v, &times).unwrap();
    for (a, b) in r.direct.iter().zip(&r.product) {
        assert!((a - c(6.0)).norm() < 1e-12 && (b - c(6.0)).norm() < 1e-12);
    }
    // With T = I only the diagonal pairs survive.
    assert!((r.total_variation - 6.0).abs() < 1e-12);
}

#[test]
fn spectral_random_and_degenerate() {
    let mut rng = seeded_rng(21);
    let times: Vec<f64> = (1..=20).map(|k| k as f64 * 0.5).collect();
    for _ in 0..10 {
        let h = random_hermitian(&mut rng, 5);
        let t = random_complex_matrix(&mut rng, 5, 5);
        let xi = random_complex_vector(&mut rng, 5);
        let eta = random_complex_vector(&mut rng, 5);
        let r = spectral_demo(&h, &t, &xi, &eta, &times).unwrap();
        assert!(r.passed, "max discrepancy {}", r.max_discrepancy);
        assert_eq!(r.eigenvalues.len(), 5);
    }
    let u = random_unitary(&mut rng, 4);
    let h = &u * diag(&[2.0, 2.0, -1.0, -1.0]) * u.adjoint();
    let h = (&h + h.adjoint()) * c(0.5);
    let r = spectral_demo(&h, &random_complex_matrix(&mut rng, 4, 4), &random_complex_vector(&mut rng, 4), &random_complex_vector(&mut rng, 4), &times).unwrap();
    assert_eq!(r.eigenvalues.len(), 2);
    assert!(r.passed, "max discrepancy {}", r.max_discrepancy);
}

#[test]
fn spectral_rejections() {
    let skew = DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]);
    let v = DVector::from_element(2, c(1.0));
    assert!(matches!(
        spectral_demo(&skew, &OpMatrix::identity(2, 2), &v, &v, &[1.0]),
        Err(Error::NotHermitian { .. })
    ));
    assert!(matches!(
        spectral_demo(&OpMatrix::identity(3, 3), &OpMatrix::identity(2, 2), &v, &v, &[1.0]),
        Err(Error::DimensionMismatch(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn construction_attains_hs_norm(seed in any::<u64>(), n in 1usize..8, rank_frac in 0.0f64..1.0) {
        let mut rng = seeded_rng(seed);
        let rank = 1 + ((n as f64 - 1.0) * rank_frac) as usize;
        let t = random_psd(&mut rng, n, rank);
        let con = construct_hs_measures(&t, Variant::ComplexDft).unwrap();
        prop_assert!((con.achieved - con.hs).abs() <= 1e-8 * (1.0 + operator_norm(&t)));
        prop_assert!((con.xi_norm() - 1.0).abs() <= 1e-10);
        prop_assert!((con.eta_norm() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn polar_route_attains_hs_norm(seed in any::<u64>(), m in 1usize..6, n in 1usize..6) {
        let mut rng = seeded_rng(seed);
        let t = random_complex_matrix(&mut rng, m, n);
        let con = construct_hs_measures_general(&t, Variant::ComplexDft).unwrap();
        prop_assert!((con.achieved - con.hs).abs() <= 1e-8 * (1.0 + operator_norm(&t)));
    }
}
