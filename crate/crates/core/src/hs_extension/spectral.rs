//! `(U(t)*ξ | T U(t)*η)` as an integral against the product of spectral
//! measures: for `H = Σ τ_j P_j`,
//! `(U(t)*ξ | T U(t)*η) = Σ_{j,k} e^{it(τ_j − τ_k)} (P_j ξ | T P_k η)`.

use crate::error::{Error, Result};
use crate::linalg::{hermitian_deviation, hermitian_eigen, CVector, OpMatrix, C64};
use nalgebra::Complex;
use rayon::prelude::*;

/// Largest admissible `‖H − H*‖`.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Eigenvalues closer than this (relative to `max(1, |τ|)`) share a projection.
pub const CLUSTER_TOL: f64 = 1e-9;
/// Largest admissible `|direct − product|`.
pub const DISCREPANCY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralReport {
    pub times: Vec<f64>,
    /// Distinct eigenvalues `τ_j` of `H`, descending.
    pub eigenvalues: Vec<f64>,
    /// `(U(t)*ξ | T U(t)*η)` with `U(t) = exp(itH)`.
    pub direct: Vec<C64>,
    pub product: Vec<C64>,
    pub discrepancies: Vec<f64>,
    pub max_discrepancy: f64,
    /// `Σ_{j,k} |(P_j ξ | T P_k η)|`.
    pub total_variation: f64,
    pub passed: bool,
}

pub fn spectral_demo(h: &OpMatrix, t: &OpMatrix, xi: &CVector, eta: &CVector, times: &[f64]) -> Result<SpectralReport> {
    let n = h.nrows();
    if !h.is_square() {
        return Err(Error::DimensionMismatch(format!("H is {}×{}", h.nrows(), h.ncols())));
    }
    if t.nrows() != n || t.ncols() != n || xi.len() != n || eta.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "H is {n}×{n}, T is {}×{}, ξ has {} and η has {} entries",
            t.nrows(),
            t.ncols(),
            xi.len(),
            eta.len()
        )));
    }
    let deviation = hermitian_deviation(h);
    if deviation > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let (values, vectors) = hermitian_eigen(h);
    let mut clusters: Vec<(Vec<usize>, f64)> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        match clusters.last_mut() {
            Some((members, _)) if (values[members[0]] - v).abs() <= CLUSTER_TOL * v.abs().max(1.0) => members.push(i),
            _ => clusters.push((vec![i], 0.0)),
        }
    }
    for (members, tau) in clusters.iter_mut() {
        *tau = members.iter().map(|&i| values[i]).sum::<f64>() / members.len() as f64;
    }
    let project = |v: &CVector, members: &[usize]| -> CVector {
        let mut out = CVector::zeros(n);
        for &i in members {
            let g = vectors.column(i);
            out += g * g.dotc(v);
        }
        out
    };
    let p_xi: Vec<CVector> = clusters.iter().map(|(m, _)| project(xi, m)).collect();
    let t_p_eta: Vec<CVector> = clusters.iter().map(|(m, _)| t * project(eta, m)).collect();
    let amplitudes: Vec<Vec<C64>> = p_xi.iter().map(|a| t_p_eta.iter().map(|b| a.dotc(b)).collect()).collect();
    let total_variation = amplitudes.iter().flatten().map(|z| z.norm()).sum();

    let rows: Vec<(C64, C64)> = times
        .par_iter()
        .map(|&time| {
            let u = (h * Complex::new(0.0, time)).exp();
            let u_star = u.adjoint();
            let a = (&u_star * xi).dotc(&(t * (&u_star * eta)));
            let mut b = Complex::new(0.0, 0.0);
            for (j, (_, tau_j)) in clusters.iter().enumerate() {
                for (k, (_, tau_k)) in clusters.iter().enumerate() {
                    b += Complex::from_polar(1.0, time * (tau_j - tau_k)) * amplitudes[j][k];
                }
            }
            (a, b)
        })
        .collect();
    let discrepancies: Vec<f64> = rows.iter().map(|(a, b)| (a - b).norm()).collect();
    let max_discrepancy = discrepancies.iter().cloned().fold(0.0, f64::max);
    Ok(SpectralReport {
        times: times.to_vec(),
        eigenvalues: clusters.iter().map(|(_, tau)| *tau).collect(),
        direct: rows.iter().map(|r| r.0).collect(),
        product: rows.iter().map(|r| r.1).collect(),
        discrepancies,
        max_discrepancy,
        total_variation,
        passed: max_discrepancy <= DISCREPANCY_TOL,
    })
}
