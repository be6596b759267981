//! Dense complex linear algebra helpers and seeded random instances.

use nalgebra::{Complex, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex<f64>;
pub type CVector = DVector<C64>;
/// Dense operator between finite-dimensional Hilbert spaces, `rows × cols`
/// mapping `C^cols → C^rows`.
pub type OpMatrix = DMatrix<C64>;

pub const ZERO: C64 = Complex { re: 0.0, im: 0.0 };
pub const ONE: C64 = Complex { re: 1.0, im: 0.0 };

/// Unit-modulus phase of `z`; the phase of zero is 1.
#[inline]
pub fn phase(z: C64) -> C64 {
    let r = z.norm();
    if r == 0.0 {
        ONE
    } else {
        z / r
    }
}

/// Seeded generator used throughout the crate.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent generator for shard `stream` of a computation seeded by `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

pub fn random_complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    Complex::new(gaussian(rng), gaussian(rng))
}

pub fn random_complex_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CVector {
    DVector::from_fn(n, |_, _| random_complex(rng))
}

pub fn random_real_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CVector {
    DVector::from_fn(n, |_, _| Complex::new(gaussian(rng), 0.0))
}

pub fn random_complex_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> OpMatrix {
    DMatrix::from_fn(rows, cols, |_, _| random_complex(rng))
}

pub fn random_real_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> OpMatrix {
    DMatrix::from_fn(rows, cols, |_, _| Complex::new(gaussian(rng), 0.0))
}

/// Haar-distributed unitary via QR of a complex Ginibre matrix with the
/// diagonal phases of `R` divided out.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> OpMatrix {
    let g = random_complex_matrix(rng, n, n);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let ph = phase(r[(j, j)]);
        for i in 0..n {
            q[(i, j)] *= ph;
        }
    }
    q
}

/// Random positive semidefinite matrix `G G*` with `G` of size `n × rank`.
pub fn random_psd<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> OpMatrix {
    let g = random_complex_matrix(rng, n, rank);
    &g * g.adjoint()
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> OpMatrix {
    let g = random_complex_matrix(rng, n, n);
    (&g + g.adjoint()).scale(0.5)
}

/// Largest entry modulus of `H - H*`.
pub fn hermitian_deviation(h: &OpMatrix) -> f64 {
    if !h.is_square() {
        return f64::INFINITY;
    }
    let n = h.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            dev = dev.max((h[(i, j)] - h[(j, i)].conj()).norm());
        }
    }
    dev
}

/// Singular values in descending order.
pub fn singular_values(m: &OpMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Largest singular value (operator norm).
pub fn operator_norm(m: &OpMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Thin SVD with singular triples sorted by descending singular value:
/// `m = Σ_k s_k u_k v_k*`.
pub struct SortedSvd {
    pub u: OpMatrix,
    pub s: Vec<f64>,
    pub v: OpMatrix,
}

pub fn sorted_svd(m: &OpMatrix) -> SortedSvd {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]).then(a.cmp(&b)));
    let k = order.len();
    let mut su = DMatrix::zeros(m.nrows(), k);
    let mut sv = DMatrix::zeros(m.ncols(), k);
    let mut s = Vec::with_capacity(k);
    for (dst, &src) in order.iter().enumerate() {
        su.set_column(dst, &u.column(src));
        // v_t rows are v_k^*; store v_k as columns.
        let row = v_t.row(src).adjoint();
        sv.set_column(dst, &row);
        s.push(svd.singular_values[src]);
    }
    SortedSvd { u: su, s, v: sv }
}

/// Eigendecomposition of a hermitian matrix with eigenvalues in descending
/// order. Ties are broken by comparing eigenvector components
/// lexicographically; each eigenvector is rotated so that its first entry of
/// largest modulus is real and positive.
pub fn hermitian_eigen(h: &OpMatrix) -> (Vec<f64>, OpMatrix) {
    let n = h.nrows();
    let eig = h.clone().symmetric_eigen();
    let mut cols: Vec<(f64, CVector)> = (0..n)
        .map(|k| {
            let mut v: CVector = eig.eigenvectors.column(k).into_owned();
            normalize_phase(&mut v);
            (eig.eigenvalues[k], v)
        })
        .collect();
    cols.sort_by(|(la, va), (lb, vb)| {
        lb.total_cmp(la).then_with(|| {
            for (a, b) in va.iter().zip(vb.iter()) {
                let c = a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im));
                if c != std::cmp::Ordering::Equal {
                    return c;
                }
            }
            std::cmp::Ordering::Equal
        })
    });
    let values = cols.iter().map(|(l, _)| *l).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (k, (_, v)) in cols.iter().enumerate() {
        vectors.set_column(k, v);
    }
    (values, vectors)
}

fn normalize_phase(v: &mut CVector) {
    let mut best = 0;
    let mut best_abs = -1.0;
    for (i, z) in v.iter().enumerate() {
        // Small slack so that round-off does not flip the pivot between runs.
        if z.norm() > best_abs * (1.0 + 1e-12) {
            best = i;
            best_abs = z.norm();
        }
    }
    if best_abs > 0.0 {
        let ph = phase(v[best]).conj();
        v.iter_mut().for_each(|z| *z *= ph);
    }
}

pub fn is_real(v: &CVector) -> bool {
    v.iter().all(|z| z.im == 0.0)
}

/// `(Σ_i |x_i|^p)^{1/p}` for `p ≥ 1`, `max |x_i|` for infinite `p`.
pub fn lp_norm(xs: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return xs.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    }
    let scale = xs.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    let s: f64 = xs.iter().map(|x| (x.abs() / scale).powf(p)).sum();
    scale * s.powf(1.0 / p)
}
