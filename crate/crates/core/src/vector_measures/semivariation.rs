//! Semi-variation `|φ|(A) = sup_{‖v‖≤1} Σ_{i∈A} |<v, φ_i>|`.
//!
//! The objective is convex in `v`, so its maximum over the ball sits on the
//! sphere. For fixed `v` the optimal phases are closed form, which gives the
//! ascent `v ← normalize(Σ_i conj(phase <v, φ_i>) φ_i)`: the new value is at
//! least `‖Σ α_i φ_i‖`, itself a lower bound by the partition/phase form of
//! the semi-variation. Over the reals the phases are signs and the exact
//! value is a maximum over `2^(n-1)` sign patterns.

use super::{Scalars, VectorMeasure};
use crate::error::{Error, Result};
use crate::finite_algebra::AtomSet;
use crate::linalg::{phase, random_complex_vector, random_real_vector, seeded_rng, CVector, ONE, ZERO};
use crate::OptConfig;
use nalgebra::{Complex, DVector};
use rayon::prelude::*;
use std::f64::consts::PI;

/// Largest set for which real semi-variation is computed by sign enumeration.
pub const SIGN_ENUMERATION_CAP: usize = 20;

/// Complex sets up to this size also get the `π · sup ‖φ(B)‖` certificate.
const PI_CERTIFICATE_CAP: usize = 16;

/// Bracket `lower ≤ |φ|(A) ≤ upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct SemiVariation {
    pub lower: f64,
    pub upper: f64,
    /// `lower == upper` by construction (enumeration or a closed form).
    pub exact: bool,
    /// The best restart reached a fixed point within `max_iters`.
    pub converged: bool,
    /// Total fixed-point iterations over all restarts.
    pub iterations: usize,
    /// Unit functional attaining `lower` (zero when the measure vanishes).
    pub direction: CVector,
    /// `(upper - lower) / lower`, zero when both vanish.
    pub gap: f64,
    /// `gap ≤ cfg.gap_tol`.
    pub within_gap: bool,
}

/// Result of maximising `Σ_i |<v, w_i>|` over unit `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSup {
    pub value: f64,
    pub direction: CVector,
    pub converged: bool,
    pub iterations: usize,
}

fn objective(v: &CVector, vectors: &[CVector]) -> f64 {
    vectors.iter().map(|w| v.dotc(w).norm()).sum()
}

fn ascent(start: CVector, vectors: &[CVector], scalars: Scalars, cfg: &OptConfig) -> DualSup {
    let dim = start.len();
    let mut v = start;
    let n0 = v.norm();
    if n0 == 0.0 {
        v = DVector::from_element(dim, ZERO);
        v[0] = ONE;
    } else {
        v /= Complex::new(n0, 0.0);
    }
    let mut best = objective(&v, vectors);
    let mut best_v = v.clone();
    let mut converged = false;
    let mut iterations = 0;
    for _ in 0..cfg.max_iters {
        iterations += 1;
        let mut w = DVector::from_element(dim, ZERO);
        for phi in vectors {
            let c = v.dotc(phi);
            let alpha = match scalars {
                Scalars::Real => {
                    if c.re >= 0.0 {
                        ONE
                    } else {
                        -ONE
                    }
                }
                Scalars::Complex => phase(c).conj(),
            };
            w += phi * alpha;
        }
        let wn = w.norm();
        if wn == 0.0 {
            converged = true;
            break;
        }
        let next = w / Complex::new(wn, 0.0);
        let value = objective(&next, vectors).max(wn);
        let prev = best;
        if value > best {
            best = value;
            best_v = next.clone();
        }
        v = next;
        if value - prev <= cfg.tol * prev.max(f64::MIN_POSITIVE) {
            converged = true;
            break;
        }
    }
    DualSup {
        value: best,
        direction: best_v,
        converged,
        iterations,
    }
}

/// Multistart maximisation of `Σ_i |<v, w_i>|` over unit `v`.
///
/// `hints` are tried first (in order), then the vectors themselves by
/// decreasing norm, then seeded random directions, `cfg.restarts` starts in
/// total (never fewer than the hints). Restarts run in parallel; the
/// reduction keeps the largest value with the lowest restart index.
pub fn dual_sup(vectors: &[CVector], dim: usize, scalars: Scalars, cfg: &OptConfig, hints: &[CVector]) -> DualSup {
    let total = cfg.restarts.max(hints.len()).max(1);
    let mut starts: Vec<CVector> = hints.iter().filter(|h| h.norm() > 0.0).cloned().collect();
    let mut by_norm: Vec<&CVector> = vectors.iter().filter(|v| v.norm() > 0.0).collect();
    by_norm.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    for v in by_norm {
        if starts.len() >= total.div_ceil(2).max(hints.len()) {
            break;
        }
        starts.push(v.clone());
    }
    let mut rng = seeded_rng(cfg.seed);
    while starts.len() < total {
        starts.push(match scalars {
            Scalars::Real => random_real_vector(&mut rng, dim),
            Scalars::Complex => random_complex_vector(&mut rng, dim),
        });
    }
    let runs: Vec<DualSup> = starts
        .into_par_iter()
        .map(|s| ascent(s, vectors, scalars, cfg))
        .collect();
    let iterations = runs.iter().map(|r| r.iterations).sum();
    let mut best = runs
        .into_iter()
        .reduce(|a, b| if b.value > a.value { b } else { a })
        .expect("at least one start");
    best.iterations = iterations;
    best
}

fn atoms_on(phi: &VectorMeasure, set: &AtomSet) -> Result<Vec<CVector>> {
    phi.algebra().check(set)?;
    Ok(set.iter().map(|i| phi.atoms()[i].clone()).collect())
}

fn finish(lower: f64, upper: f64, exact: bool, dual: Option<DualSup>, dim: usize, cfg: &OptConfig) -> SemiVariation {
    let upper = upper.max(lower);
    let gap = if lower > 0.0 {
        (upper - lower) / lower
    } else if upper > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    let (direction, converged, iterations) = match dual {
        Some(d) => (d.direction, d.converged, d.iterations),
        None => (DVector::from_element(dim, ZERO), true, 0),
    };
    SemiVariation {
        lower,
        upper,
        exact,
        converged,
        iterations,
        direction,
        gap,
        within_gap: gap <= cfg.gap_tol,
    }
}

/// Certified upper bound available without solving.
fn certified_upper(phi: &VectorMeasure, vectors: &[CVector], set: &AtomSet) -> Result<(f64, bool)> {
    let triangle: f64 = vectors.iter().map(|v| v.norm()).sum();
    if phi.dim() == 1 {
        return Ok((triangle, true));
    }
    if phi.is_orthogonal() {
        return Ok((phi.value(set)?.norm(), true));
    }
    let mut upper = triangle;
    if phi.scalars() == Scalars::Complex && vectors.len() <= PI_CERTIFICATE_CAP {
        upper = upper.min(PI * max_subset_norm(vectors));
    }
    Ok((upper, false))
}

fn max_subset_norm(vectors: &[CVector]) -> f64 {
    let n = vectors.len();
    if n == 0 {
        return 0.0;
    }
    let dim = vectors[0].len();
    let mut sum = DVector::from_element(dim, ZERO);
    let mut gray = 0u64;
    let mut best: f64 = 0.0;
    for g in 1u64..(1u64 << n) {
        let bit = g.trailing_zeros() as usize;
        gray ^= 1 << bit;
        if gray >> bit & 1 == 1 {
            sum += &vectors[bit];
        } else {
            sum -= &vectors[bit];
        }
        best = best.max(sum.norm());
    }
    // Round-off along the Gray path is at most n additions deep per entry.
    best * (1.0 + 1e-12)
}

/// Iterative lower bound with a certified upper bound.
pub fn semivariation_iterative(phi: &VectorMeasure, set: &AtomSet, cfg: &OptConfig) -> Result<SemiVariation> {
    let vectors = atoms_on(phi, set)?;
    if vectors.iter().all(|v| v.norm() == 0.0) {
        return Ok(finish(0.0, 0.0, true, None, phi.dim(), cfg));
    }
    let total = phi.value(set)?;
    let dual = dual_sup(&vectors, phi.dim(), phi.scalars(), cfg, &[total]);
    let (upper, closed_form) = certified_upper(phi, &vectors, set)?;
    let exact = closed_form && dual.value >= upper * (1.0 - 1e-12);
    Ok(finish(dual.value, upper, exact, Some(dual), phi.dim(), cfg))
}

/// Exact real semi-variation `max_ε ‖Σ ε_i φ_i‖` over sign patterns.
pub fn semivariation_enumerated(phi: &VectorMeasure, set: &AtomSet) -> Result<SemiVariation> {
    if phi.scalars() != Scalars::Real {
        return Err(Error::ComplexCoefficients);
    }
    let vectors = atoms_on(phi, set)?;
    if vectors.len() > SIGN_ENUMERATION_CAP {
        return Err(Error::EnumerationCap {
            size: vectors.len(),
            cap: SIGN_ENUMERATION_CAP,
        });
    }
    let real: Vec<Vec<f64>> = vectors.iter().map(|v| v.iter().map(|z| z.re).collect()).collect();
    let (value, signs) = max_signed_sum(&real, phi.dim());
    let mut direction = DVector::from_element(phi.dim(), ZERO);
    for (v, s) in vectors.iter().zip(&signs) {
        direction += v * Complex::new(*s, 0.0);
    }
    let dn = direction.norm();
    if dn > 0.0 {
        direction /= Complex::new(dn, 0.0);
    }
    Ok(SemiVariation {
        lower: value,
        upper: value,
        exact: true,
        converged: true,
        iterations: 0,
        direction,
        gap: 0.0,
        within_gap: true,
    })
}

/// `max_ε ‖Σ ε_i x_i‖` with `ε_0 = +1` fixed by symmetry. Gray-code walk in
/// chunks of `2^12` patterns, each chunk re-summed from scratch.
fn max_signed_sum(vectors: &[Vec<f64>], dim: usize) -> (f64, Vec<f64>) {
    let n = vectors.len();
    if n == 0 {
        return (0.0, Vec::new());
    }
    let free = n - 1;
    let chunk_bits = free.min(12);
    let n_chunks = 1u64 << (free - chunk_bits);
    let per_chunk = 1u64 << chunk_bits;
    // Pattern bit k (k < free) is the sign of vector k + 1; set bit = minus.
    let signs_of = |gray: u64| -> Vec<f64> {
        std::iter::once(1.0)
            .chain((0..free).map(|k| if gray >> k & 1 == 1 { -1.0 } else { 1.0 }))
            .collect()
    };
    let results: Vec<(f64, u64)> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * per_chunk;
            let mut gray = start ^ (start >> 1);
            let mut sum = vec![0.0; dim];
            for (x, s) in vectors.iter().zip(signs_of(gray)) {
                for (acc, xi) in sum.iter_mut().zip(x) {
                    *acc += s * xi;
                }
            }
            let norm2 = |s: &[f64]| s.iter().map(|x| x * x).sum::<f64>();
            let mut best = (norm2(&sum), gray);
            for g in start + 1..start + per_chunk {
                let bit = g.trailing_zeros() as usize;
                gray ^= 1 << bit;
                let s = if gray >> bit & 1 == 1 { -2.0 } else { 2.0 };
                for (acc, xi) in sum.iter_mut().zip(&vectors[bit + 1]) {
                    *acc += s * xi;
                }
                let v = norm2(&sum);
                if v > best.0 {
                    best = (v, gray);
                }
            }
            best
        })
        .collect();
    let (_, gray) = results
        .into_iter()
        .reduce(|a, b| if b.0 > a.0 { b } else { a })
        .expect("at least one chunk");
    // Recompute the winner directly so the reported value carries no drift.
    let signs = signs_of(gray);
    let mut sum = vec![0.0; dim];
    for (x, s) in vectors.iter().zip(&signs) {
        for (acc, xi) in sum.iter_mut().zip(x) {
            *acc += s * xi;
        }
    }
    (sum.iter().map(|x| x * x).sum::<f64>().sqrt(), signs)
}

/// Semi-variation of `φ` on `A`: exact by sign enumeration for real measures
/// on at most [`SIGN_ENUMERATION_CAP`] atoms, iterative otherwise.
pub fn semivariation(phi: &VectorMeasure, set: &AtomSet, cfg: &OptConfig) -> Result<SemiVariation> {
    if phi.scalars() == Scalars::Real && set.len() <= SIGN_ENUMERATION_CAP {
        semivariation_enumerated(phi, set)
    } else {
        semivariation_iterative(phi, set, cfg)
    }
}

