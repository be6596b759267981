use nalgebra::{Complex, DVector};
use std::f64::consts::PI;
use tpmeasure::vector_measures::*;
use tpmeasure::finite_algebra::{partitions, AtomSet, FiniteAlgebra, ProductAlgebra};
use tpmeasure::linalg::{gaussian, random_complex_vector, random_unitary, seeded_rng, CVector, OpMatrix, C64};
use tpmeasure::{Error, OptConfig};
use rand::Rng;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

fn real_measure(vectors: &[&[f64]]) -> VectorMeasure {
    let atoms = vectors.iter().map(|v| DVector::from_column_slice(v)).collect();
    VectorMeasure::real(FiniteAlgebra::new(vectors.len()).unwrap(), atoms).unwrap()
}

/// Brute-force `sup { |λ(A)| }` straight from the definition.
fn brute_subset_sup(values: &[C64]) -> f64 {
    (0u32..(1 << values.len()))
        .map(|mask| {
            values
                .iter()
                .enumerate()
                .filter(|(k, _)| mask >> k & 1 == 1)
                .map(|(_, z)| *z)
                .sum::<C64>()
                .norm()
        })
        .fold(0.0, f64::max)
}

/// Brute-force real semi-variation over every sign vector.
fn brute_sign_max(vectors: &[DVector<f64>]) -> f64 {
    let n = vectors.len();
    let d = vectors[0].len();
    (0u32..(1 << n))
        .map(|mask| {
            let mut s = DVector::<f64>::zeros(d);
            for (k, v) in vectors.iter().enumerate() {
                if mask >> k & 1 == 1 {
                    s -= v;
                } else {
                    s += v;
                }
            }
            s.norm()
        })
        .fold(0.0, f64::max)
}

#[test]
fn variation_examples() {
    let lam = ComplexMeasure::from_values(vec![c(1.0, 0.0), c(-1.0, 0.0)]).unwrap();
    assert_eq!(lam.variation(&AtomSet::full(2)).unwrap(), 2.0);
    let lam = ComplexMeasure::from_values(vec![c(3.0, 0.0), c(0.0, 4.0)]).unwrap();
    assert_eq!(lam.variation(&AtomSet::full(2)).unwrap(), 7.0);
    let z = c(-0.3, 1.7);
    let lam = ComplexMeasure::from_values(vec![z]).unwrap();
    assert_eq!(lam.variation(&AtomSet::full(1)).unwrap(), z.norm());
}

#[test]
fn variation_is_the_sup_over_partitions() {
    let mut rng = seeded_rng(21);
    let values: Vec<C64> = (0..6).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    let lam = ComplexMeasure::from_values(values).unwrap();
    let set = AtomSet::from_indices([0, 1, 3, 4, 5]);
    let sup = partitions(lam.algebra(), &set)
        .unwrap()
        .map(|p| p.iter().map(|b| lam.value(b).unwrap().norm()).sum::<f64>())
        .fold(0.0, f64::max);
    assert!((sup - lam.variation(&set).unwrap()).abs() < 1e-12);
}

#[test]
fn additivity_on_disjoint_sets() {
    let mut rng = seeded_rng(4);
    let alg = FiniteAlgebra::new(9).unwrap();
    let atoms = (0..9).map(|_| random_complex_vector(&mut rng, 3)).collect();
    let phi = VectorMeasure::complex(alg, atoms).unwrap();
    let a = AtomSet::from_indices([0, 2, 5]);
    let b = AtomSet::from_indices([1, 7, 8]);
    let lhs = phi.value(&a.union(&b)).unwrap();
    let rhs = phi.value(&a).unwrap() + phi.value(&b).unwrap();
    assert!((lhs - rhs).norm() < 1e-12);
}

#[test]
fn pi_ratio_four_phases() {
    let lam = ComplexMeasure::from_values(vec![c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)]).unwrap();
    let r = pi_ratio(&lam, &AtomSet::full(4)).unwrap();
    let oracle = 4.0 / brute_subset_sup(lam.atom_values());
    assert!((oracle - 4.0 / 2f64.sqrt()).abs() < 1e-12);
    assert!((r.ratio - oracle).abs() < 1e-12);
    assert!(r.holds);
    assert_eq!(r.best_subset.len(), 2);
}

#[test]
fn pi_ratio_single_atom_and_errors() {
    let lam = ComplexMeasure::from_values(vec![c(0.0, -2.5)]).unwrap();
    assert!((pi_ratio(&lam, &AtomSet::full(1)).unwrap().ratio - 1.0).abs() < 1e-15);
    let zero = ComplexMeasure::from_values(vec![c(0.0, 0.0); 3]).unwrap();
    assert_eq!(pi_ratio(&zero, &AtomSet::full(3)).unwrap_err(), Error::VanishingMeasure);
    let big = ComplexMeasure::from_values(vec![c(1.0, 0.0); 25]).unwrap();
    assert!(matches!(pi_ratio(&big, &AtomSet::full(25)), Err(Error::EnumerationCap { .. })));
}

#[test]
fn pi_ratio_sixty_four_phases() {
    let values = (0..64).map(|k| C64::from_polar(1.0, 2.0 * PI * k as f64 / 64.0)).collect();
    let lam = ComplexMeasure::from_values(values).unwrap();
    let set = AtomSet::full(16).union(&AtomSet::from_indices(16..64));
    // 2^64 subsets are out of reach, so the sup is taken over arcs: the best
    // subset of equally spaced phases is a contiguous half circle.
    let best_arc = (1..=64)
        .map(|len| (0..len).map(|k| lam.atom_values()[k]).sum::<C64>().norm())
        .fold(0.0, f64::max);
    let ratio = lam.variation(&set).unwrap() / best_arc;
    assert!((3.0..=PI).contains(&ratio), "ratio {ratio}");
    let planar = pi_ratio_planar(&lam, &set).unwrap();
    assert!((planar.ratio - ratio).abs() < 1e-12);
    assert!((planar.ratio - 64.0 * (PI / 64.0).sin()).abs() < 1e-12);
    assert_eq!(planar.best_subset.len(), 32);
}

#[test]
fn planar_subset_sup_matches_enumeration() {
    let mut rng = seeded_rng(31);
    for n in 1..=14 {
        let values: Vec<C64> = (0..n).map(|_| c(gaussian(&mut rng), gaussian(&mut rng))).collect();
        let lam = ComplexMeasure::from_values(values.clone()).unwrap();
        let set = AtomSet::full(n);
        let (planar, subset) = lam.subset_sup_planar(&set).unwrap();
        assert!((planar - brute_subset_sup(&values)).abs() < 1e-12);
        assert!((lam.value(&subset).unwrap().norm() - planar).abs() < 1e-12);
        assert_eq!(pi_ratio(&lam, &set).unwrap().subset_sup, lam.subset_sup(&set).unwrap().0);
    }
    let zero = ComplexMeasure::from_values(vec![C64::new(0.0, 0.0); 3]).unwrap();
    assert_eq!(zero.subset_sup_planar(&AtomSet::full(3)).unwrap().0, 0.0);
    assert!(matches!(pi_ratio_planar(&zero, &AtomSet::full(3)), Err(Error::VanishingMeasure)));
}

#[test]
fn orthogonal_semivariation_equals_norm() {
    let phi = real_measure(&[&[1.0, 0.0], &[0.0, 1.0]]).into_orthogonal().unwrap();
    let sv = semivariation_iterative(&phi, &AtomSet::full(2), &OptConfig::default()).unwrap();
    assert!((sv.lower - 2f64.sqrt()).abs() < 1e-12);
    assert!(sv.exact);
}

#[test]
fn semivariation_single_atom_and_opposite_atoms() {
    let phi = real_measure(&[&[3.0, -4.0]]);
    let sv = semivariation(&phi, &AtomSet::full(1), &OptConfig::default()).unwrap();
    assert!((sv.lower - 5.0).abs() < 1e-12);
    let phi = real_measure(&[&[1.0, 0.0], &[-1.0, 0.0]]);
    let oracle = brute_sign_max(&[DVector::from_column_slice(&[1.0, 0.0]), DVector::from_column_slice(&[-1.0, 0.0])]);
    assert_eq!(oracle, 2.0);
    let exact = semivariation_enumerated(&phi, &AtomSet::full(2)).unwrap();
    let iter = semivariation_iterative(&phi, &AtomSet::full(2), &OptConfig::default()).unwrap();
    assert!((exact.lower - 2.0).abs() < 1e-12);
    assert!((iter.lower - 2.0).abs() < 1e-12);
    // φ(A) itself vanishes; semi-variation sees both atoms.
    assert_eq!(phi.value(&AtomSet::full(2)).unwrap().norm(), 0.0);
}

#[test]
fn complex_scalars_can_exceed_real_semivariation() {
    // Three unit vectors at 120°: real value 2, complex value 3/√2.
    let vs: Vec<DVector<f64>> = (0..3)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / 3.0;
            DVector::from_column_slice(&[t.cos(), t.sin()])
        })
        .collect();
    let alg = FiniteAlgebra::new(3).unwrap();
    let real = VectorMeasure::real(alg.clone(), vs.clone()).unwrap();
    let cplx = VectorMeasure::complex(alg, vs.iter().map(|v| v.map(|x| c(x, 0.0))).collect()).unwrap();
    let set = AtomSet::full(3);
    let r = semivariation(&real, &set, &OptConfig::default()).unwrap();
    let z = semivariation(&cplx, &set, &OptConfig::default()).unwrap();
    assert!((r.lower - brute_sign_max(&vs)).abs() < 1e-12);
    assert!((r.lower - 2.0).abs() < 1e-12);
    assert!((z.lower - 3.0 / 2f64.sqrt()).abs() < 1e-9, "{}", z.lower);
}

#[test]
fn enumeration_matches_brute_force() {
    let mut rng = seeded_rng(8);
    for n in [1usize, 2, 5, 9, 14] {
        let vs: Vec<DVector<f64>> = (0..n).map(|_| DVector::from_fn(3, |_, _| rng.random_range(-1.0..1.0))).collect();
        let phi = VectorMeasure::real(FiniteAlgebra::new(n).unwrap(), vs.clone()).unwrap();
        let sv = semivariation_enumerated(&phi, &AtomSet::full(n)).unwrap();
        assert!((sv.lower - brute_sign_max(&vs)).abs() < 1e-12);
    }
}

#[test]
fn enumeration_rejects_complex_and_large_sets() {
    let phi = VectorMeasure::complex(FiniteAlgebra::new(1).unwrap(), vec![DVector::from_element(2, c(1.0, 1.0))]).unwrap();
    assert_eq!(semivariation_enumerated(&phi, &AtomSet::full(1)).unwrap_err(), Error::ComplexCoefficients);
    let vs = vec![DVector::from_element(1, 1.0); 21];
    let phi = VectorMeasure::real(FiniteAlgebra::new(21).unwrap(), vs).unwrap();
    assert!(matches!(semivariation_enumerated(&phi, &AtomSet::full(21)), Err(Error::EnumerationCap { .. })));
    // The dispatcher falls back to the solver; d = 1 has a closed form.
    let sv = semivariation(&phi, &AtomSet::full(21), &OptConfig::default()).unwrap();
    assert!((sv.lower - 21.0).abs() < 1e-12 && sv.exact);
}

#[test]
fn construction_errors() {
    let alg = FiniteAlgebra::new(2).unwrap();
    assert!(VectorMeasure::real(alg.clone(), vec![DVector::from_element(2, 1.0)]).is_err());
    let err = real_measure(&[&[1.0, 0.0], &[1.0, 1.0]]).into_orthogonal().unwrap_err();
    assert!(matches!(err, Error::NotOrthogonal { i: 0, j: 1, .. }));
    let phi = real_measure(&[&[1.0, 0.0], &[1.0, 1.0]]);
    assert!(phi.value(&AtomSet::singleton(2)).is_err());
}

#[test]
fn total_variation_product_examples() {
    let u = DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 2.0)]);
    let v = DVector::from_vec(vec![c(0.5, 0.0), c(1.0, -1.0), c(0.0, 1.0)]);
    let mut rng = seeded_rng(2);
    let t = tpmeasure::linalg::random_complex_matrix(&mut rng, 2, 3);
    let xi = VectorMeasure::complex(FiniteAlgebra::new(1).unwrap(), vec![u.clone()]).unwrap();
    let eta = VectorMeasure::complex(FiniteAlgebra::new(1).unwrap(), vec![v.clone()]).unwrap();
    let tv = total_variation_product(&xi, &eta, &t).unwrap();
    assert!((tv - u.dotc(&(&t * &v)).norm()).abs() < 1e-12);
    assert_eq!(total_variation_product(&xi, &eta, &OpMatrix::zeros(2, 3)).unwrap(), 0.0);
    assert!(total_variation_product(&xi, &eta, &OpMatrix::zeros(3, 2)).is_err());

    let e = real_measure(&[&[1.0, 0.0], &[0.0, 1.0]]);
    let tv = total_variation_product(&e, &e, &OpMatrix::identity(2, 2)).unwrap();
    // Direct 2×2 sum: |<e_j, e_k>| = δ_jk.
    assert!((tv - 2.0).abs() < 1e-15);
}

#[test]
fn product_measure_on_rectangles() {
    let mut rng = seeded_rng(17);
    let alg = FiniteAlgebra::new(4).unwrap();
    let xi = VectorMeasure::complex(alg.clone(), (0..4).map(|_| random_complex_vector(&mut rng, 3)).collect()).unwrap();
    let eta = VectorMeasure::complex(alg, (0..4).map(|_| random_complex_vector(&mut rng, 2)).collect()).unwrap();
    let t = tpmeasure::linalg::random_complex_matrix(&mut rng, 3, 2);
    let prod = ProductAlgebra::new(xi.algebra().clone(), eta.algebra().clone());
    let a = AtomSet::from_indices([0, 3]);
    let b = AtomSet::from_indices([1, 2]);
    let rect = tpmeasure::finite_algebra::rectangle(&prod, &a, &b).unwrap();
    let via_product = product_measure_value(&xi, &eta, &t, &rect).unwrap();
    let direct = xi.value(&a).unwrap().dotc(&(&t * eta.value(&b).unwrap()));
    assert!((via_product - direct).norm() < 1e-12);
}

#[test]
fn control_measure_examples() {
    let phi = real_measure(&[&[1.0, 0.0], &[0.0, 1.0]]);
    let mu = control_measure(&phi);
    assert_eq!(mu.atom_values(), &[c(0.5, 0.0), c(0.5, 0.0)]);

    let zero = real_measure(&[&[0.0, 0.0], &[0.0, 0.0]]);
    assert!(control_measure(&zero).atom_values().iter().all(|z| *z == c(0.0, 0.0)));

    let s = 1.0 / 2f64.sqrt();
    let phi = real_measure(&[&[s, s]]);
    let mu = control_measure(&phi).value(&AtomSet::full(1)).unwrap().re;
    assert!((mu - s).abs() < 1e-15);
    let sv = semivariation(&phi, &AtomSet::full(1), &OptConfig::default()).unwrap().lower;
    assert!((sv - 1.0).abs() < 1e-15 && mu <= sv);
}

#[test]
fn control_measure_dominance_and_null_sets() {
    let mut rng = seeded_rng(99);
    let mut atoms: Vec<CVector> = (0..8).map(|_| random_complex_vector(&mut rng, 3)).collect();
    atoms[5] = DVector::from_element(3, c(0.0, 0.0));
    let phi = VectorMeasure::complex(FiniteAlgebra::new(8).unwrap(), atoms).unwrap();
    let cfg = OptConfig {
        restarts: 8,
        ..OptConfig::default()
    };
    let check = check_control_measure(&phi, &cfg).unwrap();
    assert_eq!(check.sets_checked, 256);
    assert!(check.passed(), "{check:?}");
    assert!(check.max_ratio <= 1.0);
}

#[test]
fn squeezing_examples() {
    let m = TruncatedMeasure::new(Vec::new(), 0.0).unwrap();
    let r = squeezing_witness(&m);
    assert_eq!(r.tail_norms, vec![0.0]);
    assert!(r.monotone);

    let block = real_measure(&[&[0.6, 0.0], &[0.0, 0.8]]);
    let m = TruncatedMeasure::new(vec![block], 0.0).unwrap();
    let r = squeezing_witness(&m);
    assert!((r.tail_norms[0] - 1.0).abs() < 1e-15);
    assert_eq!(r.tail_norms[1], 0.0);

    // Block norms 1, 1/2, 1/4, ...: tails are geometric sums.
    let blocks: Vec<_> = (0..6).map(|n| real_measure(&[&[0.5f64.powi(n)]])).collect();
    let m = TruncatedMeasure::new(blocks, 0.0).unwrap();
    let r = squeezing_witness(&m);
    for k in 0..6 {
        let closed = ((4f64.powi(-(k as i32)) - 4f64.powi(-6)) / (1.0 - 0.25)).sqrt();
        assert!((r.tail_norms[k] - closed).abs() < 1e-14, "k = {k}");
    }
    assert!(r.monotone && r.bessel_holds);
}

fn arb_complex_measure(max_atoms: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b)| c(a, b)), 1..=max_atoms)
}

fn arb_real_vectors(max_atoms: usize, dim: usize) -> impl Strategy<Value = Vec<DVector<f64>>> {
    prop::collection::vec(prop::collection::vec(-1.0f64..1.0, dim).prop_map(DVector::from_vec), 1..=max_atoms)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pi_inequality(values in arb_complex_measure(12)) {
        let lam = ComplexMeasure::from_values(values.clone()).unwrap();
        let set = AtomSet::full(values.len());
        let sup = brute_subset_sup(&values);
        prop_assume!(sup > 1e-9);
        let var = lam.variation(&set).unwrap();
        prop_assert!(sup <= var + 1e-12);
        prop_assert!(var <= PI * sup + 1e-10);
        prop_assert!((lam.subset_sup(&set).unwrap().0 - sup).abs() < 1e-12);
    }

    #[test]
    fn semivariation_monotone_subadditive(vs in arb_real_vectors(10, 3), split in 0usize..10) {
        let n = vs.len();
        let phi = VectorMeasure::real(FiniteAlgebra::new(n).unwrap(), vs).unwrap();
        let cfg = OptConfig::default();
        let a: AtomSet = (0..split.min(n)).collect();
        let b: AtomSet = (split.min(n)..n).filter(|k| k % 2 == 0).collect();
        let sa = semivariation(&phi, &a, &cfg).unwrap().lower;
        let sb = semivariation(&phi, &b, &cfg).unwrap().lower;
        let sab = semivariation(&phi, &a.union(&b), &cfg).unwrap().lower;
        prop_assert!(sa <= sab + 1e-12);
        prop_assert!(sab <= sa + sb + 1e-12);
    }

    #[test]
    fn semivariation_sandwich(seed in 0u64..1000, n in 1usize..9, d in 1usize..4) {
        let mut rng = seeded_rng(seed);
        let atoms: Vec<CVector> = (0..n).map(|_| random_complex_vector(&mut rng, d)).collect();
        let phi = VectorMeasure::complex(FiniteAlgebra::new(n).unwrap(), atoms.clone()).unwrap();
        let set = AtomSet::full(n);
        let sv = semivariation(&phi, &set, &OptConfig::with_seed(seed)).unwrap();
        let sup = phi.algebra().subsets(&set).unwrap().map(|s| phi.value(&s).unwrap().norm()).fold(0.0, f64::max);
        prop_assert!(sup <= sv.lower * (1.0 + 1e-12));
        prop_assert!(sv.lower <= sv.upper);
        prop_assert!(sv.lower <= PI * sup + 1e-10);
    }

    #[test]
    fn orthogonal_measures_attain_norm(seed in 0u64..1000, n in 1usize..6, extra in 0usize..3) {
        let mut rng = seeded_rng(seed);
        let d = n + extra;
        let u = random_unitary(&mut rng, d);
        let atoms: Vec<CVector> = (0..n).map(|k| u.column(k) * c(rng.random_range(0.0..2.0), 0.0)).collect();
        let phi = VectorMeasure::complex(FiniteAlgebra::new(n).unwrap(), atoms).unwrap().into_orthogonal().unwrap();
        let set = AtomSet::full(n);
        let sv = semivariation(&phi, &set, &OptConfig::with_seed(seed)).unwrap();
        prop_assert!((sv.lower - phi.value(&set).unwrap().norm()).abs() <= 1e-8);
    }

    #[test]
    fn isometry_invariance(seed in 0u64..1000, n in 1usize..6, d in 1usize..4, extra in 0usize..3) {
        let mut rng = seeded_rng(seed);
        let atoms: Vec<CVector> = (0..n).map(|_| random_complex_vector(&mut rng, d)).collect();
        let phi = VectorMeasure::complex(FiniteAlgebra::new(n).unwrap(), atoms).unwrap();
        let u = random_unitary(&mut rng, d + extra).columns(0, d).into_owned();
        let mapped = phi.map(&u).unwrap();
        let set = AtomSet::full(n);
        let cfg = OptConfig::with_seed(seed);
        let a = semivariation(&phi, &set, &cfg).unwrap().lower;
        let b = semivariation(&mapped, &set, &cfg).unwrap().lower;
        prop_assert!((a - b).abs() <= 1e-8 * a.max(1.0), "{} vs {}", a, b);
    }
}
