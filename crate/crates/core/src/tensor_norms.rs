//! Cross norms on `C^m ⊗ C^n` and p-summing norms of matrices.
//!
//! In the Hilbert case the injective and projective norms are the operator
//! and trace norms of the coefficient matrix. The Jacobs norms `‖·‖_l`,
//! `‖·‖_r` and their mean `‖·‖_m` are infima over representations with no
//! known closed form; they are reported as intervals whose lower end is the
//! injective norm and whose upper end comes from a representation search.

use crate::error::{Error, Result};
use crate::linalg::{
    lp_norm, operator_norm, random_complex_matrix, random_complex_vector, random_unitary, seeded_rng, singular_values,
    sorted_svd, CVector, OpMatrix,
};
use crate::vector_measures::{dual_sup, Scalars};
use crate::OptConfig;
use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;

/// Element of `C^m ⊗ C^n`; `coeffs[(j, k)]` is the coefficient of `e_j ⊗ f_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorElement {
    coeffs: OpMatrix,
}

impl TensorElement {
    pub fn new(coeffs: OpMatrix) -> Result<Self> {
        if coeffs.nrows() == 0 || coeffs.ncols() == 0 {
            return Err(Error::InvalidParameter("tensor factors must have positive dimension".into()));
        }
        Ok(Self { coeffs })
    }

    /// `x ⊗ y`, with coefficients `x_j y_k`.
    pub fn elementary(x: &CVector, y: &CVector) -> Result<Self> {
        Self::new(x * y.transpose())
    }

    pub fn coeffs(&self) -> &OpMatrix {
        &self.coeffs
    }

    pub fn shape(&self) -> (usize, usize) {
        self.coeffs.shape()
    }

    /// The flip `C^m ⊗ C^n → C^n ⊗ C^m`.
    pub fn transpose(&self) -> Self {
        Self {
            coeffs: self.coeffs.transpose(),
        }
    }

    pub fn singular_values(&self) -> Vec<f64> {
        singular_values(&self.coeffs)
    }
}

/// A representation `z = Σ_l x_l ⊗ y_l`.
#[derive(Debug, Clone, PartialEq)]
pub struct Representation {
    pub pairs: Vec<(CVector, CVector)>,
}

impl Representation {
    /// `x_l = s_l u_l`, `y_l = conj(v_l)` from the singular value
    /// decomposition, dropping zero singular values.
    pub fn from_svd(z: &TensorElement) -> Self {
        let svd = sorted_svd(z.coeffs());
        let cutoff = svd.s.first().copied().unwrap_or(0.0) * 1e-14;
        let pairs = svd
            .s
            .iter()
            .enumerate()
            .filter(|(_, &s)| s > cutoff && s > 0.0)
            .map(|(k, &s)| {
                let x = svd.u.column(k) * Complex::new(s, 0.0);
                let y = svd.v.column(k).map(|w| w.conj());
                (x, y)
            })
            .collect();
        Self { pairs }
    }

    pub fn from_factors(x: &OpMatrix, y: &OpMatrix) -> Self {
        let pairs = (0..x.ncols())
            .map(|l| (x.column(l).into_owned(), y.column(l).into_owned()))
            .collect();
        Self { pairs }
    }

    pub fn reconstruct(&self, m: usize, n: usize) -> OpMatrix {
        let mut out = OpMatrix::zeros(m, n);
        for (x, y) in &self.pairs {
            out += x * y.transpose();
        }
        out
    }

    /// `Σ_l ‖x_l‖ ‖y_l‖`, an upper bound for the projective norm.
    pub fn projective_cost(&self) -> f64 {
        self.pairs.iter().map(|(x, y)| x.norm() * y.norm()).sum()
    }

    /// Whether the representation reproduces `z` to `1e-10` (relative to
    /// `max(1, ‖z‖_F)`).
    pub fn represents(&self, z: &TensorElement) -> bool {
        let (m, n) = z.shape();
        let err = (self.reconstruct(m, n) - z.coeffs()).norm();
        err <= 1e-10 * z.coeffs().norm().max(1.0)
    }
}

/// Least reasonable cross norm: the largest singular value.
pub fn injective_norm(z: &TensorElement) -> f64 {
    operator_norm(z.coeffs())
}

/// Greatest cross norm: the trace norm (sum of singular values).
pub fn projective_norm(z: &TensorElement) -> f64 {
    z.singular_values().iter().sum()
}

/// Hilbert-Schmidt norm `√(Σ |T_jk|²)`.
pub fn hs_norm(t: &OpMatrix) -> f64 {
    t.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Interval `lower ≤ ‖z‖ ≤ upper` for one of the Jacobs norms.
#[derive(Debug, Clone, PartialEq)]
pub struct NormBounds {
    pub lower: f64,
    /// Smallest representation value found by the search.
    pub upper: f64,
    /// Value of the singular value representation, `‖z‖_HS`, which needs no
    /// inner optimisation and is therefore certified.
    pub certified_upper: f64,
    /// Every inner solve that produced `upper` reached a fixed point.
    pub converged: bool,
    /// Length of the representation attaining `upper`.
    pub best_len: usize,
}

impl NormBounds {
    fn mean(a: &Self, b: &Self) -> Self {
        Self {
            lower: 0.5 * (a.lower + b.lower),
            upper: 0.5 * (a.upper + b.upper),
            certified_upper: 0.5 * (a.certified_upper + b.certified_upper),
            converged: a.converged && b.converged,
            best_len: a.best_len.max(b.best_len),
        }
    }
}

/// Budget for the representation search behind the Jacobs norms.
#[derive(Debug, Clone, PartialEq)]
pub struct RepresentationSearch {
    /// Random multiplicative perturbations tried per representation length.
    pub steps: usize,
    /// Extra lengths beyond the rank (search covers `rank..=min(m,n)+extra`).
    pub extra_len: usize,
    /// Solver settings for the inner supremum over functionals.
    pub inner: OptConfig,
}

impl Default for RepresentationSearch {
    fn default() -> Self {
        Self {
            steps: 40,
            extra_len: 2,
            inner: OptConfig {
                restarts: 6,
                max_iters: 200,
                ..OptConfig::default()
            },
        }
    }
}

impl RepresentationSearch {
    pub fn with_seed(seed: u64) -> Self {
        let mut s = Self::default();
        s.inner.seed = seed;
        s
    }
}

/// `sup_{|α_i|≤1} ‖Σ α_i ‖y_i‖ x_i‖ = sup_{‖v‖≤1} Σ ‖y_i‖ |<v, x_i>|`.
fn l_value(x: &OpMatrix, y: &OpMatrix, hint: &CVector, cfg: &OptConfig) -> (f64, bool) {
    let vectors: Vec<CVector> = (0..x.ncols())
        .map(|l| x.column(l) * Complex::new(y.column(l).norm(), 0.0))
        .filter(|v: &CVector| v.norm() > 0.0)
        .collect();
    if vectors.is_empty() {
        return (0.0, true);
    }
    let sup = dual_sup(&vectors, x.nrows(), Scalars::Complex, cfg, std::slice::from_ref(hint));
    (sup.value, sup.converged)
}

/// Bounds for `‖z‖_l`.
pub fn l_norm_bounds(z: &TensorElement, search: &RepresentationSearch) -> NormBounds {
    let (m, n) = z.shape();
    let svd = sorted_svd(z.coeffs());
    let s_max = svd.s.first().copied().unwrap_or(0.0);
    let rank = svd.s.iter().filter(|&&s| s > s_max * 1e-12 && s > 0.0).count();
    if rank == 0 {
        return NormBounds {
            lower: 0.0,
            upper: 0.0,
            certified_upper: 0.0,
            converged: true,
            best_len: 0,
        };
    }
    let lower = s_max;
    // Orthogonal family {s_l u_l}: the supremum is √(Σ s_l²) by Cauchy-Schwarz.
    let hs = svd.s.iter().map(|s| s * s).sum::<f64>().sqrt();
    let mut best = NormBounds {
        lower,
        upper: hs,
        certified_upper: hs,
        converged: true,
        best_len: rank,
    };
    // The top left singular vector keeps every inner value ≥ the injective norm.
    let hint: CVector = svd.u.column(0).into_owned();
    let mut rng = seeded_rng(search.inner.seed ^ 0x5eed_1ab5);
    let max_len = m.min(n) + search.extra_len;
    for len in rank..=max_len.max(rank) {
        let mut x0 = OpMatrix::zeros(m, len);
        let mut y0 = OpMatrix::zeros(n, len);
        for k in 0..rank {
            x0.set_column(k, &(svd.u.column(k) * Complex::new(svd.s[k], 0.0)));
            y0.set_column(k, &svd.v.column(k).map(|w| w.conj()));
        }
        // X = X0 G, Y = Y0 G^{-T} keeps X Yᵀ = z.
        let mut g = OpMatrix::identity(len, len);
        if len > rank {
            g += random_complex_matrix(&mut rng, len, len) * Complex::new(0.3, 0.0);
        }
        let eval = |g: &OpMatrix| -> Option<(f64, bool)> {
            let g_inv = g.clone().try_inverse()?;
            let x = &x0 * g;
            let y = &y0 * g_inv.transpose();
            Some(l_value(&x, &y, &hint, &search.inner))
        };
        let Some((mut current, mut conv)) = eval(&g) else { continue };
        let mut step = 0.3;
        for _ in 0..search.steps {
            let e = random_complex_matrix(&mut rng, len, len) * Complex::new(step, 0.0);
            let candidate = &g * (OpMatrix::identity(len, len) + e);
            match eval(&candidate) {
                Some((v, c)) if v < current => {
                    current = v;
                    conv = c;
                    g = candidate;
                    step = (step * 1.2).min(1.0);
                }
                _ => step *= 0.7,
            }
        }
        if current < best.upper {
            best.upper = current;
            best.converged = conv;
            best.best_len = len;
        }
    }
    best.upper = best.upper.max(best.lower);
    best
}

/// Bounds for `‖z‖_r`, the l-norm of the flipped tensor.
pub fn r_norm_bounds(z: &TensorElement, search: &RepresentationSearch) -> NormBounds {
    l_norm_bounds(&z.transpose(), search)
}

/// Bounds for `‖z‖_m = (‖z‖_l + ‖z‖_r) / 2`.
pub fn m_norm_bounds(z: &TensorElement, search: &RepresentationSearch) -> NormBounds {
    NormBounds::mean(&l_norm_bounds(z, search), &r_norm_bounds(z, search))
}

/// All five cross norms of one tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossNorms {
    pub injective: f64,
    pub projective: f64,
    pub hilbert_schmidt: f64,
    pub l: NormBounds,
    pub r: NormBounds,
    pub m: NormBounds,
}

impl CrossNorms {
    /// `injective ≤ lower ≤ upper ≤ projective` for `l`, `r`, `m`, at `tol`.
    pub fn sandwich_holds(&self, tol: f64) -> bool {
        [&self.l, &self.r, &self.m].iter().all(|b| {
            self.injective <= b.lower + tol && b.lower <= b.upper + tol && b.upper <= self.projective + tol
        })
    }
}

pub fn cross_norms(z: &TensorElement, search: &RepresentationSearch) -> CrossNorms {
    let l = l_norm_bounds(z, search);
    let r = r_norm_bounds(z, search);
    let m = NormBounds::mean(&l, &r);
    CrossNorms {
        injective: injective_norm(z),
        projective: projective_norm(z),
        hilbert_schmidt: hs_norm(z.coeffs()),
        l,
        r,
        m,
    }
}

// ---------------------------------------------------------------------------
// p-summing norms
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    Orthonormal,
    Singular,
    Repeated,
    Gaussian,
}

impl FamilyKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Orthonormal => "orthonormal",
            Self::Singular => "singular",
            Self::Repeated => "repeated",
            Self::Gaussian => "gaussian",
        }
    }
}

/// Finite family `{v_j}` in the domain of an operator.
#[derive(Debug, Clone, PartialEq)]
pub struct Family {
    pub vectors: Vec<CVector>,
    pub kind: FamilyKind,
    /// Mutually orthogonal members; the weak norm is then exact.
    pub orthogonal: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyConfig {
    pub orthonormal: bool,
    pub singular: bool,
    pub repeated: bool,
    pub gaussian_families: usize,
    pub max_len: usize,
    pub seed: u64,
}

impl Default for FamilyConfig {
    fn default() -> Self {
        Self {
            orthonormal: true,
            singular: true,
            repeated: true,
            gaussian_families: 16,
            max_len: 8,
            seed: 0,
        }
    }
}

impl FamilyConfig {
    /// Only the right singular vectors of the operator.
    pub fn singular_only() -> Self {
        Self {
            orthonormal: false,
            singular: true,
            repeated: false,
            gaussian_families: 0,
            ..Self::default()
        }
    }
}

/// Families used by the p-summing bounds: prefixes of the standard basis
/// and of a random orthonormal basis, the right singular vectors of `t`,
/// repeated copies of single vectors, and Gaussian families.
pub fn sample_families(t: &OpMatrix, cfg: &FamilyConfig) -> Vec<Family> {
    let n = t.ncols();
    let mut rng = seeded_rng(cfg.seed);
    let mut out = Vec::new();
    if cfg.orthonormal {
        let u = random_unitary(&mut rng, n);
        for k in 1..=n {
            let std_basis = (0..k)
                .map(|j| {
                    let mut e = DVector::from_element(n, Complex::new(0.0, 0.0));
                    e[j] = Complex::new(1.0, 0.0);
                    e
                })
                .collect();
            out.push(Family {
                vectors: std_basis,
                kind: FamilyKind::Orthonormal,
                orthogonal: true,
            });
            out.push(Family {
                vectors: (0..k).map(|j| u.column(j).into_owned()).collect(),
                kind: FamilyKind::Orthonormal,
                orthogonal: true,
            });
        }
    }
    if cfg.singular {
        let svd = sorted_svd(t);
        // Complete the right singular vectors to a basis of the domain.
        let mut basis: Vec<CVector> = (0..svd.v.ncols()).map(|k| svd.v.column(k).into_owned()).collect();
        if basis.len() < n {
            let full = t.adjoint() * t;
            let (_, vecs) = crate::linalg::hermitian_eigen(&full);
            basis = (0..n).map(|k| vecs.column(k).into_owned()).collect();
        }
        for k in 1..=basis.len() {
            out.push(Family {
                vectors: basis[..k].to_vec(),
                kind: FamilyKind::Singular,
                orthogonal: true,
            });
        }
    }
    if cfg.repeated {
        let v = random_complex_vector(&mut rng, n);
        for k in [2usize, cfg.max_len.max(2)] {
            out.push(Family {
                vectors: vec![v.clone(); k],
                kind: FamilyKind::Repeated,
                orthogonal: false,
            });
        }
    }
    for _ in 0..cfg.gaussian_families {
        let len = rng.random_range(1..=cfg.max_len.max(1));
        out.push(Family {
            vectors: (0..len).map(|_| random_complex_vector(&mut rng, n)).collect(),
            kind: FamilyKind::Gaussian,
            orthogonal: false,
        });
    }
    out
}

/// `(Σ_j ‖T v_j‖^p)^{1/p}`.
pub fn strong_norm(t: &OpMatrix, family: &[CVector], p: f64) -> f64 {
    let norms: Vec<f64> = family.iter().map(|v| (t * v).norm()).collect();
    lp_norm(&norms, p)
}

/// Certified upper bound for the weak norm
/// `sup_{‖u‖≤1} (Σ_j |<u, v_j>|^p)^{1/p}`, exact for orthogonal families.
pub fn weak_norm_upper(family: &Family, p: f64) -> f64 {
    let norms: Vec<f64> = family.vectors.iter().map(|v| v.norm()).collect();
    if family.orthogonal {
        return if p >= 2.0 {
            norms.iter().fold(0.0, |m: f64, x| m.max(*x))
        } else {
            lp_norm(&norms, 2.0 * p / (2.0 - p))
        };
    }
    let k = family.vectors.len() as f64;
    let v = DMatrix::from_columns(&family.vectors);
    let spectral = operator_norm(&v) * if p >= 2.0 { 1.0 } else { k.powf(1.0 / p - 0.5) };
    spectral.min(lp_norm(&norms, p))
}

/// A certified lower bound for the p-summing norm.
#[derive(Debug, Clone, PartialEq)]
pub struct SummingBound {
    pub p: f64,
    pub lower: f64,
    /// Known upper bound: the Hilbert-Schmidt norm when `p = 2`.
    pub upper: Option<f64>,
    pub family_kind: FamilyKind,
    pub family_len: usize,
    /// Number of Hölder reweightings applied to the best family.
    pub reweighted: usize,
}

#[derive(Clone)]
struct Candidate {
    family: Family,
    // Certified weak-norm bound at the current exponent.
    weak: f64,
    reweighted: usize,
}

fn check_exponent(p: f64) -> Result<()> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("p-summing exponent must be finite and ≥ 1, got {p}")));
    }
    Ok(())
}

/// Lower bounds for the p-summing norms of `t` on a grid of exponents.
///
/// Exponents are visited in decreasing order. At each exponent every family
/// is scored directly, and every candidate of the previous (larger) exponent
/// `q` is carried down by the Hölder reweighting `v_j ↦ ‖T v_j‖^{(q-p)/p} v_j`,
/// whose ratio at `p` is at least its ratio at `q`. A bound at `q` is also a
/// bound at `p`, so each exponent keeps the larger of the two and the
/// reported bounds are non-increasing in `p`.
pub fn p_summing_profile(t: &OpMatrix, ps: &[f64], cfg: &FamilyConfig) -> Result<Vec<SummingBound>> {
    for &p in ps {
        check_exponent(p)?;
    }
    let families = sample_families(t, cfg);
    let hs = hs_norm(t);
    let mut order: Vec<usize> = (0..ps.len()).collect();
    order.sort_by(|&a, &b| ps[b].total_cmp(&ps[a]));
    let mut out: Vec<Option<SummingBound>> = vec![None; ps.len()];
    let mut carried: Vec<Candidate> = Vec::new();
    let mut prev_p: Option<f64> = None;
    let mut prev_best: Option<SummingBound> = None;
    for &idx in &order {
        let p = ps[idx];
        let mut candidates: Vec<Candidate> = Vec::new();
        if let Some(q) = prev_p {
            for c in &carried {
                if p == q {
                    candidates.push(c.clone());
                    continue;
                }
                let exponent = (q - p) / p;
                let r = p * q / (q - p);
                let weights: Vec<f64> = c.family.vectors.iter().map(|v| (t * v).norm().powf(exponent)).collect();
                if weights.iter().all(|&w| w == 0.0) {
                    continue;
                }
                let family = Family {
                    vectors: c.family.vectors.iter().zip(&weights).map(|(v, w)| v * Complex::new(*w, 0.0)).collect(),
                    kind: c.family.kind,
                    orthogonal: c.family.orthogonal,
                };
                let weak = weak_norm_upper(&family, p).min(lp_norm(&weights, r) * c.weak);
                candidates.push(Candidate {
                    family,
                    weak,
                    reweighted: c.reweighted + 1,
                });
            }
        }
        for f in &families {
            candidates.push(Candidate {
                weak: weak_norm_upper(f, p),
                family: f.clone(),
                reweighted: 0,
            });
        }
        let mut best: Option<SummingBound> = None;
        for c in &candidates {
            if c.weak <= 0.0 {
                continue;
            }
            let ratio = strong_norm(t, &c.family.vectors, p) / c.weak;
            if best.as_ref().is_none_or(|b| ratio > b.lower) {
                best = Some(SummingBound {
                    p,
                    lower: ratio,
                    upper: (p == 2.0).then_some(hs),
                    family_kind: c.family.kind,
                    family_len: c.family.vectors.len(),
                    reweighted: c.reweighted,
                });
            }
        }
        let mut best = best.unwrap_or(SummingBound {
            p,
            lower: 0.0,
            upper: (p == 2.0).then_some(hs),
            family_kind: FamilyKind::Orthonormal,
            family_len: 0,
            reweighted: 0,
        });
        // π_p is non-increasing in p, so a bound at a larger exponent holds here too.
        if let Some(prev) = prev_best.filter(|b: &SummingBound| b.lower > best.lower) {
            best = SummingBound {
                p,
                upper: (p == 2.0).then_some(hs),
                ..prev
            };
        }
        prev_best = Some(best.clone());
        out[idx] = Some(best);
        carried = candidates;
        prev_p = Some(p);
    }
    Ok(out.into_iter().map(|b| b.expect("every exponent visited")).collect())
}

/// Lower bound for the p-summing norm of `t`. Families scored at `p = 2`
/// are also carried down to `p < 2` by reweighting.
pub fn p_summing_lower_bound(t: &OpMatrix, p: f64, cfg: &FamilyConfig) -> Result<SummingBound> {
    check_exponent(p)?;
    let grid: Vec<f64> = if p < 2.0 { vec![2.0, p] } else { vec![p] };
    let profile = p_summing_profile(t, &grid, cfg)?;
    Ok(profile.into_iter().find(|b| b.p == p).expect("p is on the grid"))
}

/// `12√π`, the lower Khintchine constant for `p = 1`.
pub fn khintchine_l1_constant() -> f64 {
    12.0 * std::f64::consts::PI.sqrt()
}

/// Largest coordinate dimension for the exact sign supremum.
pub const SUMMING_CHECK_DIM_CAP: usize = 20;

/// Result of checking that `ℓ¹ → ℓ²` is 1-summing on sampled families.
#[derive(Debug, Clone, PartialEq)]
pub struct SummingCheck {
    pub constant: f64,
    /// `Σ ‖x_j‖₂ / sup_{‖x*‖∞≤1} Σ |x*(x_j)|` per family.
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    pub passed: bool,
}

/// `sup { Σ_j |x*(x_j)| : ‖x*‖_∞ ≤ 1 }` for real vectors; the supremum of
/// a convex function sits at a sign vector.
pub fn weak_l1_norm(family: &[Vec<f64>]) -> Result<f64> {
    let dim = family.first().map_or(0, |x| x.len());
    if dim > SUMMING_CHECK_DIM_CAP {
        return Err(Error::EnumerationCap {
            size: dim,
            cap: SUMMING_CHECK_DIM_CAP,
        });
    }
    if family.iter().any(|x| x.len() != dim) {
        return Err(Error::DimensionMismatch("family vectors differ in length".into()));
    }
    if dim == 0 {
        return Ok(0.0);
    }
    let mut best: f64 = 0.0;
    // x* and -x* give the same value, so the first sign is fixed to +1.
    for mask in 0u64..(1u64 << (dim - 1)) {
        let total: f64 = family
            .iter()
            .map(|x| {
                x.iter()
                    .enumerate()
                    .map(|(k, &xk)| if k > 0 && mask >> (k - 1) & 1 == 1 { -xk } else { xk })
                    .sum::<f64>()
                    .abs()
            })
            .sum();
        best = best.max(total);
    }
    Ok(best)
}

/// Ratio `Σ ‖x_j‖₂ / ‖(x_j)‖_{1,w}` for one family of real vectors.
pub fn summing_ratio(family: &[Vec<f64>]) -> Result<f64> {
    let strong: f64 = family.iter().map(|x| x.iter().map(|v| v * v).sum::<f64>().sqrt()).sum();
    let weak = weak_l1_norm(family)?;
    Ok(if weak == 0.0 { 0.0 } else { strong / weak })
}

/// Samples `samples` random families of `family_len` vectors in `R^dim` and
/// checks `Σ ‖x_j‖₂ ≤ 12√π · ‖(x_j)‖_{1,w}` on each.
pub fn khintchine_summing_check(dim: usize, family_len: usize, samples: usize, seed: u64) -> Result<SummingCheck> {
    if dim == 0 || family_len == 0 {
        return Err(Error::InvalidParameter("dimension and family length must be positive".into()));
    }
    let mut rng = seeded_rng(seed);
    let constant = khintchine_l1_constant();
    let mut ratios = Vec::with_capacity(samples);
    for _ in 0..samples {
        let family: Vec<Vec<f64>> = (0..family_len)
            .map(|_| (0..dim).map(|_| crate::linalg::gaussian(&mut rng)).collect())
            .collect();
        ratios.push(summing_ratio(&family)?);
    }
    let max_ratio = ratios.iter().fold(0.0, |m: f64, r| m.max(*r));
    Ok(SummingCheck {
        constant,
        passed: max_ratio <= constant,
        ratios,
        max_ratio,
    })
}
