//! Orthogonal measures realising `‖(ξ|Tη)‖ = ‖T‖₂`.
//!
//! For a positive `T = Σ t_k |g_k)(g_k|` take `η_k = (t_k/‖t‖) g_k` and
//! `ξ_j = e_j / √n`, where `{e_j}` is a rotation of `{g_k}` whose overlaps
//! `(e_j|g_k)` all have modulus `1/√n` (a DFT matrix, or a tensor power of
//! the 2×2 Hadamard rotation in the real case). Then
//! `|(ξ_j|Tη_k)| = t_k² / (n ‖t‖)` and the total variation sums to `‖t‖`.
//!
//! General operators go through the polar decomposition: the construction
//! is applied to `|T|` and `ξ` is carried over by the polar isometry, which
//! amounts to using the left and right singular vectors.

mod divergence;
mod spectral;

pub use divergence::{default_eps, divergence_witness, BlockSpec, DivergenceWitness, WitnessBlock, BLOCK_DIM_CAP};
pub use spectral::{spectral_demo, SpectralReport, DISCREPANCY_TOL};

use crate::error::{Error, Result};
use crate::finite_algebra::FiniteAlgebra;
use crate::linalg::{hermitian_deviation, hermitian_eigen, operator_norm, random_unitary, seeded_rng, sorted_svd, CVector, OpMatrix, C64};
use crate::tensor_norms::hs_norm;
use crate::vector_measures::{total_variation_product, Scalars, VectorMeasure};
use nalgebra::{Complex, DMatrix, DVector};
use std::f64::consts::PI;

/// Eigenvalues above `-POSITIVITY_TOL · max(1, ‖T‖)` are clipped to zero.
pub const POSITIVITY_TOL: f64 = 1e-10;
/// Largest dimension handled by [`optimality_check`].
pub const OPTIMALITY_SEARCH_CAP: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// `(e_j|g_k) = e^{2πijk/n} / √n`.
    ComplexDft,
    /// `(e_j|g_k)` is the m-fold tensor power of the rotation by π/4; needs
    /// `n = 2^m` and a real operator.
    RealHadamard,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Self::ComplexDft => "dft",
            Self::RealHadamard => "hadamard",
        }
    }
}

/// How the operator was reduced to the positive case.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    Positive,
    Polar,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HsConstruction {
    pub t: OpMatrix,
    pub xi: VectorMeasure,
    pub eta: VectorMeasure,
    /// `Σ_{j,k} |(ξ_j|Tη_k)|` evaluated on the constructed atoms.
    pub achieved: f64,
    pub hs: f64,
    pub variant: Variant,
    pub route: Route,
    /// `T = 0`: `η` is the zero measure and cannot have unit norm.
    pub eta_degenerate: bool,
}

impl HsConstruction {
    pub fn xi_norm(&self) -> f64 {
        self.xi.total_norm()
    }

    pub fn eta_norm(&self) -> f64 {
        self.eta.total_norm()
    }
}

/// Entry `(j, k)` of the rotation, i.e. the overlap `(e_j|g_k)`.
pub fn rotation_entry(variant: Variant, n: usize, j: usize, k: usize) -> C64 {
    let scale = 1.0 / (n as f64).sqrt();
    match variant {
        Variant::ComplexDft => {
            // Reduce jk mod n first so the angle stays accurate for large n.
            let angle = 2.0 * PI * ((j * k) % n) as f64 / n as f64;
            C64::from_polar(scale, angle)
        }
        Variant::RealHadamard => {
            let sign = if (j & k).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
            Complex::new(sign * scale, 0.0)
        }
    }
}

pub fn rotation_matrix(variant: Variant, n: usize) -> Result<OpMatrix> {
    if variant == Variant::RealHadamard && !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    Ok(DMatrix::from_fn(n, n, |j, k| rotation_entry(variant, n, j, k)))
}

/// `ξ_j = (1/√k) Σ_l conj(R_jl) left_l`, `η_l = (w_l/‖w‖) right_l`.
fn assemble(
    left: &[CVector],
    right: &[CVector],
    weights: &[f64],
    variant: Variant,
    scalars: Scalars,
) -> Result<(VectorMeasure, VectorMeasure, bool)> {
    let k = weights.len();
    let rot = rotation_matrix(variant, k)?;
    let scale = Complex::new(1.0 / (k as f64).sqrt(), 0.0);
    let dim_left = left[0].len();
    let xi_atoms: Vec<CVector> = (0..k)
        .map(|j| {
            let mut e = DVector::from_element(dim_left, Complex::new(0.0, 0.0));
            for (l, g) in left.iter().enumerate() {
                e += g * rot[(j, l)].conj();
            }
            e * scale
        })
        .collect();
    let wnorm = weights.iter().map(|w| w * w).sum::<f64>().sqrt();
    let degenerate = wnorm == 0.0;
    let eta_atoms: Vec<CVector> = right
        .iter()
        .zip(weights)
        .map(|(g, &w)| g * Complex::new(if degenerate { 0.0 } else { w / wnorm }, 0.0))
        .collect();
    let algebra = FiniteAlgebra::new(k)?;
    let build = |atoms: Vec<CVector>| -> Result<VectorMeasure> {
        match scalars {
            Scalars::Complex => VectorMeasure::complex(algebra.clone(), atoms),
            Scalars::Real => VectorMeasure::real(algebra.clone(), atoms.iter().map(|v| v.map(|z| z.re)).collect()),
        }
    };
    let xi = build(xi_atoms)?.into_orthogonal()?;
    let eta = build(eta_atoms)?.into_orthogonal()?;
    Ok((xi, eta, degenerate))
}

fn is_real_matrix(t: &OpMatrix) -> bool {
    t.iter().all(|z| z.im == 0.0)
}

fn real_part(t: &OpMatrix) -> DMatrix<f64> {
    t.map(|z| z.re)
}

fn to_complex_columns(m: &DMatrix<f64>) -> Vec<CVector> {
    (0..m.ncols()).map(|k| m.column(k).map(|x| Complex::new(x, 0.0))).collect()
}

/// Spectral data of a positive operator: clipped eigenvalues (descending)
/// and eigenvectors, or an error if `T` is not positive semidefinite.
fn positive_spectrum(t: &OpMatrix, real: bool) -> Result<(Vec<f64>, Vec<CVector>)> {
    if !t.is_square() {
        return Err(Error::DimensionMismatch(format!("positive operator must be square, got {}×{}", t.nrows(), t.ncols())));
    }
    let scale = operator_norm(t).max(1.0);
    let dev = hermitian_deviation(t);
    if dev > POSITIVITY_TOL * scale {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let (values, vectors) = if real {
        let r = real_part(t);
        let eig = r.symmetric_eigen();
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
        let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect::<Vec<_>>();
        let vecs = order
            .iter()
            .map(|&i| {
                let mut v = eig.eigenvectors.column(i).into_owned();
                // Deterministic sign: largest entry positive.
                let pivot = v.iter().cloned().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
                if pivot < 0.0 {
                    v = -v;
                }
                v.map(|x| Complex::new(x, 0.0))
            })
            .collect();
        (vals, vecs)
    } else {
        let (vals, vecs) = hermitian_eigen(t);
        (vals, (0..vecs.ncols()).map(|k| vecs.column(k).into_owned()).collect())
    };
    if let Some(&min) = values.iter().min_by(|a, b| a.total_cmp(b)) {
        if min < -POSITIVITY_TOL * scale {
            return Err(Error::NotPositive { eigenvalue: min });
        }
    }
    Ok((values.into_iter().map(|l| l.max(0.0)).collect(), vectors))
}

/// The orthogonal-measure construction for a positive semidefinite `T`.
pub fn construct_hs_measures(t: &OpMatrix, variant: Variant) -> Result<HsConstruction> {
    let real = variant == Variant::RealHadamard;
    if real {
        if !is_real_matrix(t) {
            return Err(Error::ComplexCoefficients);
        }
        if !t.nrows().is_power_of_two() {
            return Err(Error::NotPowerOfTwo(t.nrows()));
        }
    }
    let (values, vectors) = positive_spectrum(t, real)?;
    let scalars = if real { Scalars::Real } else { Scalars::Complex };
    let (xi, eta, eta_degenerate) = assemble(&vectors, &vectors, &values, variant, scalars)?;
    let achieved = total_variation_product(&xi, &eta, t)?;
    Ok(HsConstruction {
        t: t.clone(),
        xi,
        eta,
        achieved,
        hs: hs_norm(t),
        variant,
        route: Route::Positive,
        eta_degenerate,
    })
}

/// Construction for an arbitrary `T: C^n → C^m` through the polar
/// decomposition; uses `min(m, n)` atoms. Positive inputs take the direct
/// route.
pub fn construct_hs_measures_general(t: &OpMatrix, variant: Variant) -> Result<HsConstruction> {
    if t.is_square() {
        match construct_hs_measures(t, variant) {
            Err(Error::NotPositive { .. }) | Err(Error::NotHermitian { .. }) => {}
            other => return other,
        }
    }
    let k = t.nrows().min(t.ncols());
    if k == 0 {
        return Err(Error::InvalidParameter("operator has an empty dimension".into()));
    }
    let real = variant == Variant::RealHadamard;
    if real {
        if !is_real_matrix(t) {
            return Err(Error::ComplexCoefficients);
        }
        if !k.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(k));
        }
    }
    let (s, left, right) = if real {
        let svd = real_part(t).svd(true, true);
        let u = svd.u.expect("requested U");
        let v = svd.v_t.expect("requested V^T").transpose();
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]).then(a.cmp(&b)));
        let uc = to_complex_columns(&u);
        let vc = to_complex_columns(&v);
        (
            order.iter().map(|&i| svd.singular_values[i]).collect::<Vec<_>>(),
            order.iter().map(|&i| uc[i].clone()).collect::<Vec<_>>(),
            order.iter().map(|&i| vc[i].clone()).collect::<Vec<_>>(),
        )
    } else {
        let svd = sorted_svd(t);
        (
            svd.s.clone(),
            (0..k).map(|i| svd.u.column(i).into_owned()).collect(),
            (0..k).map(|i| svd.v.column(i).into_owned()).collect(),
        )
    };
    let scalars = if real { Scalars::Real } else { Scalars::Complex };
    let (xi, eta, eta_degenerate) = assemble(&left, &right, &s, variant, scalars)?;
    let achieved = total_variation_product(&xi, &eta, t)?;
    Ok(HsConstruction {
        t: t.clone(),
        xi,
        eta,
        achieved,
        hs: hs_norm(t),
        variant,
        route: Route::Polar,
        eta_degenerate,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimalityReport {
    /// Best `‖[e|Tf]‖` over sampled orthonormal bases.
    pub max_found: f64,
    pub constructed: f64,
    pub hs: f64,
    pub samples: usize,
    /// Whether some sample exceeded `‖T‖₂ + 1e-8`.
    pub exceeded: bool,
}

/// Random search over orthonormal bases `{e_j}`, `{f_k}`: the optimal
/// weights for fixed bases give `‖[e|Tf]‖`, the operator norm of the matrix
/// `|(e_j|Tf_k)|`, which never exceeds `‖T‖₂`.
pub fn optimality_check(t: &OpMatrix, samples: usize, seed: u64) -> Result<OptimalityReport> {
    let n = t.nrows();
    if n > OPTIMALITY_SEARCH_CAP {
        return Err(Error::EnumerationCap {
            size: n,
            cap: OPTIMALITY_SEARCH_CAP,
        });
    }
    let construction = construct_hs_measures(t, Variant::ComplexDft)?;
    let hs = construction.hs;
    let mut rng = seeded_rng(seed);
    let mut max_found: f64 = 0.0;
    for _ in 0..samples {
        let e = random_unitary(&mut rng, n);
        let f = random_unitary(&mut rng, n);
        let m = (e.adjoint() * t * f).map(|z| Complex::new(z.norm(), 0.0));
        max_found = max_found.max(operator_norm(&m));
    }
    Ok(OptimalityReport {
        max_found,
        constructed: construction.achieved,
        hs,
        samples,
        exceeded: max_found > hs + 1e-8,
    })
}
