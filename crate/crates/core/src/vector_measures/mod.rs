//! Scalar and vector measures on finite algebras.
//!
//! A measure on an atomic algebra is determined by its atom values and is
//! additive by construction. Variation of a complex measure is attained on
//! the finest partition, so it is a plain sum of moduli; semi-variation of a
//! vector measure needs an optimisation over unit functionals and lives in
//! [`semivariation`].

mod semivariation;

pub use semivariation::{
    dual_sup, semivariation, semivariation_enumerated, semivariation_iterative, DualSup, SemiVariation,
    SIGN_ENUMERATION_CAP,
};

use crate::error::{Error, Result};
use crate::finite_algebra::{AtomSet, FiniteAlgebra, ProductAlgebra};
use crate::half_average::{half_average_subset, HalfAverageConfig, VectorFamily};
use crate::linalg::{CVector, OpMatrix, C64, ZERO};
use crate::OptConfig;
use nalgebra::{Complex, DMatrix, DVector};
use std::f64::consts::PI;

/// Largest set for which `pi_ratio` enumerates subsets.
pub const SUBSET_ENUMERATION_CAP: usize = 24;

/// Tolerance for the orthogonality check on construction.
pub const ORTHOGONALITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMeasure {
    algebra: FiniteAlgebra,
    atom_values: Vec<C64>,
}

impl ComplexMeasure {
    pub fn new(algebra: FiniteAlgebra, atom_values: Vec<C64>) -> Result<Self> {
        if atom_values.len() != algebra.n_atoms() {
            return Err(Error::DimensionMismatch(format!(
                "{} atom values for {} atoms",
                atom_values.len(),
                algebra.n_atoms()
            )));
        }
        Ok(Self { algebra, atom_values })
    }

    /// Measure on a fresh algebra with one atom per value.
    pub fn from_values(values: Vec<C64>) -> Result<Self> {
        Self::new(FiniteAlgebra::new(values.len())?, values)
    }

    pub fn algebra(&self) -> &FiniteAlgebra {
        &self.algebra
    }

    pub fn atom_values(&self) -> &[C64] {
        &self.atom_values
    }

    pub fn value(&self, set: &AtomSet) -> Result<C64> {
        self.algebra.check(set)?;
        Ok(set.iter().map(|i| self.atom_values[i]).sum())
    }

    /// `|λ|(A)`, the supremum of `Σ |λ(A_j)|` over partitions of `A`.
    pub fn variation(&self, set: &AtomSet) -> Result<f64> {
        self.algebra.check(set)?;
        Ok(set.iter().map(|i| self.atom_values[i].norm()).sum())
    }

    /// `sup { |λ(A)| : A ⊆ B }` by Gray-code enumeration of the subsets of `B`.
    pub fn subset_sup(&self, set: &AtomSet) -> Result<(f64, AtomSet)> {
        self.algebra.check(set)?;
        let atoms = set.to_vec();
        if atoms.len() > SUBSET_ENUMERATION_CAP {
            return Err(Error::EnumerationCap {
                size: atoms.len(),
                cap: SUBSET_ENUMERATION_CAP,
            });
        }
        let values: Vec<C64> = atoms.iter().map(|&i| self.atom_values[i]).collect();
        let (best, mask) = max_subset_modulus(&values);
        let subset = atoms
            .iter()
            .enumerate()
            .filter(|(k, _)| mask >> k & 1 == 1)
            .map(|(_, &a)| a)
            .collect();
        Ok((best, subset))
    }

    /// `sup { |λ(A)| : A ⊆ B }` for sets of any size. Viewing atom values as
    /// vectors in `R^2`, the supremum is attained on a half-plane set, and
    /// the exact half-plane sweep of [`crate::half_average`] finds it.
    pub fn subset_sup_planar(&self, set: &AtomSet) -> Result<(f64, AtomSet)> {
        self.algebra.check(set)?;
        let atoms = set.to_vec();
        let points = atoms
            .iter()
            .map(|&i| DVector::from_vec(vec![self.atom_values[i].re, self.atom_values[i].im]))
            .collect();
        let family = VectorFamily::new(2, points)?;
        if family.is_empty() {
            return Ok((0.0, AtomSet::empty()));
        }
        let best = half_average_subset(&family, &HalfAverageConfig::default())?;
        Ok((best.subset_norm, best.subset.iter().map(|&k| atoms[k]).collect()))
    }
}

/// Max of `|Σ_{k∈S} z_k|` over subsets `S`, with the maximising mask.
fn max_subset_modulus(values: &[C64]) -> (f64, u64) {
    let n = values.len();
    let mut sum = ZERO;
    let mut gray = 0u64;
    let mut best = 0.0;
    let mut best_mask = 0u64;
    for g in 1u64..(1u64 << n) {
        let bit = g.trailing_zeros() as usize;
        gray ^= 1 << bit;
        if gray >> bit & 1 == 1 {
            sum += values[bit];
        } else {
            sum -= values[bit];
        }
        // Refresh periodically to keep round-off bounded.
        if g & 0x3ff == 0 {
            sum = (0..n).filter(|k| gray >> k & 1 == 1).map(|k| values[k]).sum();
        }
        let m = sum.norm();
        if m > best {
            best = m;
            best_mask = gray;
        }
    }
    (best, best_mask)
}

/// Outcome of the π-inequality check on one set.
#[derive(Debug, Clone, PartialEq)]
pub struct PiRatio {
    pub variation: f64,
    pub subset_sup: f64,
    pub best_subset: AtomSet,
    /// `variation / subset_sup`.
    pub ratio: f64,
    /// Whether `ratio ≤ π + 1e-12`.
    pub holds: bool,
}

pub fn pi_ratio(lambda: &ComplexMeasure, set: &AtomSet) -> Result<PiRatio> {
    ratio_from(lambda.variation(set)?, lambda.subset_sup(set)?)
}

/// [`pi_ratio`] without the enumeration cap, using
/// [`ComplexMeasure::subset_sup_planar`].
pub fn pi_ratio_planar(lambda: &ComplexMeasure, set: &AtomSet) -> Result<PiRatio> {
    ratio_from(lambda.variation(set)?, lambda.subset_sup_planar(set)?)
}

fn ratio_from(variation: f64, (subset_sup, best_subset): (f64, AtomSet)) -> Result<PiRatio> {
    if variation == 0.0 || subset_sup == 0.0 {
        return Err(Error::VanishingMeasure);
    }
    let ratio = variation / subset_sup;
    Ok(PiRatio {
        variation,
        subset_sup,
        best_subset,
        ratio,
        holds: ratio <= PI + 1e-12,
    })
}

/// Scalar field over which a vector measure's range space is taken. It
/// decides which functionals enter the semi-variation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scalars {
    Real,
    Complex,
}

/// Measure with values in `C^dim` (or `R^dim` when `scalars` is real).
#[derive(Debug, Clone, PartialEq)]
pub struct VectorMeasure {
    algebra: FiniteAlgebra,
    dim: usize,
    atoms: Vec<CVector>,
    scalars: Scalars,
    orthogonal: bool,
}

impl VectorMeasure {
    pub fn complex(algebra: FiniteAlgebra, atoms: Vec<CVector>) -> Result<Self> {
        Self::build(algebra, atoms, Scalars::Complex)
    }

    pub fn real(algebra: FiniteAlgebra, atoms: Vec<DVector<f64>>) -> Result<Self> {
        let atoms = atoms.into_iter().map(|v| v.map(|x| Complex::new(x, 0.0))).collect();
        Self::build(algebra, atoms, Scalars::Real)
    }

    fn build(algebra: FiniteAlgebra, atoms: Vec<CVector>, scalars: Scalars) -> Result<Self> {
        if atoms.len() != algebra.n_atoms() {
            return Err(Error::DimensionMismatch(format!(
                "{} atom vectors for {} atoms",
                atoms.len(),
                algebra.n_atoms()
            )));
        }
        let dim = atoms[0].len();
        if dim == 0 {
            return Err(Error::InvalidParameter("vector dimension must be positive".into()));
        }
        if let Some(bad) = atoms.iter().find(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch(format!("atom of length {} in dimension {dim}", bad.len())));
        }
        Ok(Self {
            algebra,
            dim,
            atoms,
            scalars,
            orthogonal: false,
        })
    }

    /// Marks the measure orthogonal after checking `<φ_i, φ_j> = 0` for
    /// distinct atoms, relative to `max(1, |φ_i| |φ_j|)`.
    pub fn into_orthogonal(mut self) -> Result<Self> {
        for i in 0..self.atoms.len() {
            for j in i + 1..self.atoms.len() {
                let inner = self.atoms[i].dotc(&self.atoms[j]).norm();
                let scale = (self.atoms[i].norm() * self.atoms[j].norm()).max(1.0);
                if inner > ORTHOGONALITY_TOL * scale {
                    return Err(Error::NotOrthogonal { i, j, inner });
                }
            }
        }
        self.orthogonal = true;
        Ok(self)
    }

    pub fn algebra(&self) -> &FiniteAlgebra {
        &self.algebra
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn atoms(&self) -> &[CVector] {
        &self.atoms
    }

    pub fn scalars(&self) -> Scalars {
        self.scalars
    }

    pub fn is_orthogonal(&self) -> bool {
        self.orthogonal
    }

    pub fn value(&self, set: &AtomSet) -> Result<CVector> {
        self.algebra.check(set)?;
        let mut out = DVector::from_element(self.dim, ZERO);
        for i in set.iter() {
            out += &self.atoms[i];
        }
        Ok(out)
    }

    /// `‖φ(S)‖` on the whole ground set.
    pub fn total_norm(&self) -> f64 {
        self.value(&self.algebra.top()).map(|v| v.norm()).unwrap_or(0.0)
    }

    /// Matrix whose columns are the atom vectors.
    pub fn atom_matrix(&self) -> OpMatrix {
        DMatrix::from_columns(&self.atoms)
    }

    /// `A ↦ U φ(A)` for a linear map `U` of shape `new_dim × dim`. Real
    /// scalars are kept only when `U` is real.
    pub fn map(&self, u: &OpMatrix) -> Result<Self> {
        if u.ncols() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "map with {} columns applied in dimension {}",
                u.ncols(),
                self.dim
            )));
        }
        let scalars = if self.scalars == Scalars::Real && u.iter().all(|z| z.im == 0.0) {
            Scalars::Real
        } else {
            Scalars::Complex
        };
        let atoms = self.atoms.iter().map(|v| u * v).collect();
        Self::build(self.algebra.clone(), atoms, scalars)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.atoms.iter_mut().for_each(|v| *v *= Complex::new(factor, 0.0));
        out
    }
}

/// Matrix of `(ξ_j | T η_k)` over atom pairs. `T` maps the range space of
/// `η` into that of `ξ`.
pub fn product_measure_matrix(xi: &VectorMeasure, eta: &VectorMeasure, t: &OpMatrix) -> Result<OpMatrix> {
    if t.nrows() != xi.dim() || t.ncols() != eta.dim() {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}×{}, measures live in dimensions {} and {}",
            t.nrows(),
            t.ncols(),
            xi.dim(),
            eta.dim()
        )));
    }
    let t_eta = t * eta.atom_matrix();
    Ok(xi.atom_matrix().adjoint() * t_eta)
}

/// Value of the product semi-measure `(ξ|Tη)` on a set of the product algebra.
pub fn product_measure_value(
    xi: &VectorMeasure,
    eta: &VectorMeasure,
    t: &OpMatrix,
    set: &AtomSet,
) -> Result<C64> {
    let m = product_measure_matrix(xi, eta, t)?;
    let prod = ProductAlgebra::new(xi.algebra().clone(), eta.algebra().clone());
    prod.as_algebra().check(set)?;
    Ok(set
        .iter()
        .map(|k| {
            let (i, j) = prod.atom_pair(k);
            m[(i, j)]
        })
        .sum())
}

/// Total variation `‖(ξ|Tη)‖ = Σ_{j,k} |(ξ_j | T η_k)|` on the atomic
/// product algebra.
pub fn total_variation_product(xi: &VectorMeasure, eta: &VectorMeasure, t: &OpMatrix) -> Result<f64> {
    Ok(product_measure_matrix(xi, eta, t)?.iter().map(|z| z.norm()).sum())
}

/// Nonnegative control measure `μ = (1/d) Σ_k |<b_k, φ>|` over the
/// standard basis.
pub fn control_measure(phi: &VectorMeasure) -> ComplexMeasure {
    let d = phi.dim() as f64;
    let values = phi
        .atoms()
        .iter()
        .map(|v| Complex::new(v.iter().map(|z| z.norm()).sum::<f64>() / d, 0.0))
        .collect();
    ComplexMeasure::new(phi.algebra().clone(), values).expect("one value per atom")
}

/// Exhaustive check of the control-measure properties.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlCheck {
    pub sets_checked: usize,
    /// Sets where `μ(A)` exceeded the semi-variation lower bound.
    pub dominance_violations: usize,
    /// Sets with `μ(A) = 0` but `φ(B) ≠ 0` for some `B ⊆ A`.
    pub null_violations: usize,
    /// Largest `μ(A) / |φ|(A)` seen (0 when `|φ|` vanishes everywhere).
    pub max_ratio: f64,
}

impl ControlCheck {
    pub fn passed(&self) -> bool {
        self.dominance_violations == 0 && self.null_violations == 0
    }
}

/// Largest algebra for which [`check_control_measure`] visits every set.
pub const CONTROL_CHECK_CAP: usize = 12;

pub fn check_control_measure(phi: &VectorMeasure, cfg: &OptConfig) -> Result<ControlCheck> {
    let n = phi.n_atoms();
    if n > CONTROL_CHECK_CAP {
        return Err(Error::EnumerationCap {
            size: n,
            cap: CONTROL_CHECK_CAP,
        });
    }
    let mu = control_measure(phi);
    let mut check = ControlCheck {
        sets_checked: 0,
        dominance_violations: 0,
        null_violations: 0,
        max_ratio: 0.0,
    };
    for set in phi.algebra().subsets(&phi.algebra().top())? {
        check.sets_checked += 1;
        let m = mu.value(&set)?.re;
        let sv = semivariation(phi, &set, cfg)?.lower;
        if m > sv * (1.0 + 1e-12) + 1e-14 {
            check.dominance_violations += 1;
        }
        if sv > 0.0 {
            check.max_ratio = check.max_ratio.max(m / sv);
        }
        // μ(A) = 0 forces every atom in A to vanish, hence φ(B) = 0 for B ⊆ A.
        if m == 0.0 && set.iter().any(|i| phi.atoms()[i].norm() > 0.0) {
            check.null_violations += 1;
        }
    }
    Ok(check)
}

/// Countably atomic orthogonal measure truncated to finitely many blocks.
///
/// Blocks occupy mutually orthogonal subspaces (a direct sum), each block is
/// itself orthogonal, and `tail_bound` bounds the norm of everything not
/// enumerated.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedMeasure {
    blocks: Vec<(VectorMeasure, f64)>,
    tail_bound: f64,
}

impl TruncatedMeasure {
    pub fn new(blocks: Vec<VectorMeasure>, tail_bound: f64) -> Result<Self> {
        if !(tail_bound >= 0.0 && tail_bound.is_finite()) {
            return Err(Error::InvalidParameter(format!("tail bound {tail_bound}")));
        }
        let blocks = blocks
            .into_iter()
            .map(|b| {
                let b = if b.is_orthogonal() { b } else { b.into_orthogonal()? };
                let norm = b.total_norm();
                Ok((b, norm))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { blocks, tail_bound })
    }

    pub fn blocks(&self) -> &[(VectorMeasure, f64)] {
        &self.blocks
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// `‖m(S)‖² = Σ block_norm² + tail²` by orthogonality.
    pub fn total_norm(&self) -> f64 {
        (self.blocks.iter().map(|(_, n)| n * n).sum::<f64>() + self.tail_bound.powi(2)).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SqueezingReport {
    /// `tail_norms[k] = ‖m(blocks k..)‖`; the last entry is the tail bound.
    pub tail_norms: Vec<f64>,
    /// `‖m(A_n)‖` for the disjoint block supports `A_n`.
    pub block_norms: Vec<f64>,
    pub monotone: bool,
    /// `Σ ‖m(A_n)‖² ≤ ‖m(S)‖²`, which forces `‖m(A_n)‖ → 0`.
    pub bessel_holds: bool,
}

pub fn squeezing_witness(m: &TruncatedMeasure) -> SqueezingReport {
    let block_norms: Vec<f64> = m.blocks.iter().map(|(_, n)| *n).collect();
    let mut tail_sq = m.tail_bound.powi(2);
    let mut tail_norms = vec![m.tail_bound];
    for n in block_norms.iter().rev() {
        tail_sq += n * n;
        tail_norms.push(tail_sq.sqrt());
    }
    tail_norms.reverse();
    let monotone = tail_norms.windows(2).all(|w| w[0] >= w[1]) && tail_norms.last().copied() <= Some(m.tail_bound);
    let total = m.total_norm();
    let bessel_holds = block_norms.iter().map(|n| n * n).sum::<f64>() <= total * total * (1.0 + 1e-12);
    SqueezingReport {
        tail_norms,
        block_norms,
        monotone,
        bessel_holds,
    }
}
