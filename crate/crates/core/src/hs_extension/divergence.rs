//! Finite witness that `‖(ξ|Tη)‖` diverges for operators outside the
//! Hilbert–Schmidt class.
//!
//! Block `n` is a positive diagonal operator `T_n` on its own coordinate
//! block with `ε_n² ‖T_n‖₂ ≥ 1`. The construction scaled by `ε_n` contributes
//! `ε_n² ‖T_n‖₂ ≥ 1` to the total variation while `Σ ‖ξ_n‖² = Σ ε_n²` stays
//! bounded. Blocks are evaluated from the closed form of their atoms, which
//! costs `O(d²)` per block instead of materialising `d × d` matrices.

use super::{assemble, rotation_entry, HsConstruction, Route, Variant};
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::tensor_norms::hs_norm;
use crate::vector_measures::{total_variation_product, Scalars, TruncatedMeasure, VectorMeasure};
use nalgebra::{Complex, DMatrix, DVector};
use rayon::prelude::*;

/// Largest block dimension the witness will build.
pub const BLOCK_DIM_CAP: usize = 4096;
/// Largest block turned into dense vectors by [`DivergenceWitness::materialize`].
pub const MATERIALIZE_CAP: usize = 512;

const FLOOR_TOL: f64 = 1e-12;

/// `ε_n = 2^{-(n+1)/2}` for `n ≥ 1`; block `n` needs an identity of
/// dimension `4^{n+1}`, so five blocks fit under [`BLOCK_DIM_CAP`].
pub fn default_eps(n: usize) -> f64 {
    (-((n + 1) as f64) / 2.0).exp2()
}

/// Block operators of the witness.
#[derive(Debug, Clone, PartialEq)]
pub enum BlockSpec {
    /// Identity blocks of the smallest admissible dimension `⌈ε_n^{-4}⌉`.
    MinimalIdentity,
    /// Identity blocks of the given dimensions.
    Identity(Vec<usize>),
    /// Diagonal positive blocks with the given entries.
    Diagonal(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessBlock {
    /// 1-based block index.
    pub index: usize,
    pub eps: f64,
    pub dim: usize,
    pub diagonal: Vec<f64>,
    /// `‖T_n‖₂`.
    pub hs: f64,
    /// `Σ_{j,k} |(ξ_j|T_n η_k)|` for the scaled atoms.
    pub achieved: f64,
    pub xi_norm: f64,
    pub eta_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceWitness {
    pub eps: Vec<f64>,
    pub blocks: Vec<WitnessBlock>,
    /// `partial_sums[k] = Σ_{n ≤ k+1} achieved_n`.
    pub partial_sums: Vec<f64>,
    /// `Σ_n ‖ξ_n‖²`.
    pub xi_norm_sq: f64,
    /// `Σ_n ‖η_n‖²`.
    pub eta_norm_sq: f64,
    /// Norm of the part of `ξ` beyond the listed blocks: `(Σ_{n>N} ε_n²)^{1/2}
    /// = 2^{-(N+1)/2}` for the default sequence, zero for an explicit one.
    pub tail_bound: f64,
}

fn identity_required(eps: f64) -> usize {
    (eps.powi(-4) * (1.0 - FLOOR_TOL)).ceil().max(1.0) as usize
}

fn block_diagonals(spec: &BlockSpec, eps: &[f64]) -> Result<Vec<Vec<f64>>> {
    let n = eps.len();
    let diagonals: Vec<Vec<f64>> = match spec {
        BlockSpec::MinimalIdentity => eps
            .iter()
            .enumerate()
            .map(|(i, &e)| {
                let required = identity_required(e);
                if required > BLOCK_DIM_CAP {
                    return Err(Error::BlockTooLarge {
                        block: i + 1,
                        required,
                        cap: BLOCK_DIM_CAP,
                    });
                }
                Ok(vec![1.0; required])
            })
            .collect::<Result<_>>()?,
        BlockSpec::Identity(dims) => {
            if dims.len() < n {
                return Err(Error::InvalidParameter(format!("{} block dimensions for {n} blocks", dims.len())));
            }
            dims[..n].iter().map(|&d| vec![1.0; d]).collect()
        }
        BlockSpec::Diagonal(diags) => {
            if diags.len() < n {
                return Err(Error::InvalidParameter(format!("{} diagonal blocks for {n} blocks", diags.len())));
            }
            diags[..n].to_vec()
        }
    };
    for (i, (diag, &e)) in diagonals.iter().zip(eps).enumerate() {
        let block = i + 1;
        if let Some(&bad) = diag.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(Error::InvalidParameter(format!("block {block} has diagonal entry {bad}")));
        }
        let peak = diag.iter().cloned().fold(0.0, f64::max);
        let hs = diag.iter().map(|x| x * x).sum::<f64>().sqrt();
        if e * e * hs < 1.0 - FLOOR_TOL {
            let required = if peak > 0.0 {
                ((e.powi(-4) / (peak * peak)) * (1.0 - FLOOR_TOL)).ceil() as usize
            } else {
                usize::MAX
            };
            if required > BLOCK_DIM_CAP {
                return Err(Error::BlockTooLarge {
                    block,
                    required,
                    cap: BLOCK_DIM_CAP,
                });
            }
            return Err(Error::BlockTooSmall {
                block,
                required,
                actual: diag.len(),
            });
        }
        if diag.len() > BLOCK_DIM_CAP {
            return Err(Error::BlockTooLarge {
                block,
                required: diag.len(),
                cap: BLOCK_DIM_CAP,
            });
        }
    }
    Ok(diagonals)
}

/// Scaled DFT construction on `diag(t)` in the standard basis:
/// `(ξ_j|T η_k) = ε² R_jk t_k² / (√d ‖t‖)` and `ξ = (ε/√d) Σ_j e_j`.
fn evaluate_block(index: usize, eps: f64, diagonal: Vec<f64>) -> WitnessBlock {
    let d = diagonal.len();
    let hs = diagonal.iter().map(|x| x * x).sum::<f64>().sqrt();
    let root_d = (d as f64).sqrt();
    let eps2 = eps * eps;
    let weights: Vec<f64> = diagonal.iter().map(|t| eps2 * t * t / (root_d * hs)).collect();
    // Row sums are collected in order and added sequentially so the result
    // does not depend on the thread schedule.
    let rows: Vec<f64> = (0..d)
        .into_par_iter()
        .map(|j| {
            (0..d)
                .map(|k| rotation_entry(Variant::ComplexDft, d, j, k).norm() * weights[k])
                .sum::<f64>()
        })
        .collect();
    let achieved = rows.iter().sum::<f64>();
    // Coordinate k of Σ_j e_j is Σ_j conj(R_jk).
    let columns: Vec<f64> = (0..d)
        .into_par_iter()
        .map(|k| {
            (0..d)
                .map(|j| rotation_entry(Variant::ComplexDft, d, j, k).conj())
                .sum::<C64>()
                .norm_sqr()
        })
        .collect();
    let xi_norm = eps / root_d * columns.iter().sum::<f64>().sqrt();
    WitnessBlock {
        index,
        eps,
        dim: d,
        diagonal,
        hs,
        achieved,
        xi_norm,
        eta_norm: eps,
    }
}

/// Builds the first `n_blocks` blocks. `eps` overrides the default sequence
/// and must have at least `n_blocks` positive entries.
pub fn divergence_witness(spec: &BlockSpec, n_blocks: usize, eps: Option<&[f64]>) -> Result<DivergenceWitness> {
    let tail_bound = if eps.is_none() { (-((n_blocks + 1) as f64) / 2.0).exp2() } else { 0.0 };
    let eps: Vec<f64> = match eps {
        Some(e) => {
            if e.len() < n_blocks {
                return Err(Error::InvalidParameter(format!("{} eps values for {n_blocks} blocks", e.len())));
            }
            if let Some(bad) = e.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
                return Err(Error::InvalidParameter(format!("eps value {bad}")));
            }
            e[..n_blocks].to_vec()
        }
        None => (1..=n_blocks).map(default_eps).collect(),
    };
    let diagonals = block_diagonals(spec, &eps)?;
    let blocks: Vec<WitnessBlock> = diagonals
        .into_iter()
        .zip(&eps)
        .enumerate()
        .map(|(i, (diag, &e))| evaluate_block(i + 1, e, diag))
        .collect();
    let mut total = 0.0;
    let partial_sums = blocks
        .iter()
        .map(|b| {
            total += b.achieved;
            total
        })
        .collect();
    Ok(DivergenceWitness {
        xi_norm_sq: blocks.iter().map(|b| b.xi_norm * b.xi_norm).sum(),
        eta_norm_sq: blocks.iter().map(|b| b.eta_norm * b.eta_norm).sum(),
        eps,
        blocks,
        partial_sums,
        tail_bound,
    })
}

impl DivergenceWitness {
    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Whether every block contributes at least 1 and the partial sums grow
    /// at least linearly, within `tol` per block.
    pub fn diverges(&self, tol: f64) -> bool {
        self.blocks.iter().all(|b| b.achieved >= 1.0 - tol)
            && self.partial_sums.iter().enumerate().all(|(i, s)| *s >= (i + 1) as f64 * (1.0 - tol))
    }

    /// Dense construction for block `index` (1-based), scaled by `ε_n`.
    pub fn materialize(&self, index: usize) -> Result<HsConstruction> {
        let block = self
            .blocks
            .get(index.wrapping_sub(1))
            .ok_or_else(|| Error::InvalidParameter(format!("no block {index}")))?;
        if block.dim > MATERIALIZE_CAP {
            return Err(Error::BlockTooLarge {
                block: index,
                required: block.dim,
                cap: MATERIALIZE_CAP,
            });
        }
        let d = block.dim;
        let basis: Vec<_> = (0..d)
            .map(|k| DVector::from_fn(d, |i, _| Complex::new(if i == k { 1.0 } else { 0.0 }, 0.0)))
            .collect();
        let (xi, eta, eta_degenerate) = assemble(&basis, &basis, &block.diagonal, Variant::ComplexDft, Scalars::Complex)?;
        let (xi, eta) = (xi.scaled(block.eps), eta.scaled(block.eps));
        let t = DMatrix::from_fn(d, d, |i, j| Complex::new(if i == j { block.diagonal[i] } else { 0.0 }, 0.0));
        let achieved = total_variation_product(&xi, &eta, &t)?;
        Ok(HsConstruction {
            hs: hs_norm(&t),
            t,
            xi,
            eta,
            achieved,
            variant: Variant::ComplexDft,
            route: Route::Positive,
            eta_degenerate,
        })
    }

    /// The `ξ` blocks as a direct sum with this witness's tail bound. Every
    /// block must be within [`MATERIALIZE_CAP`].
    pub fn xi_measure(&self) -> Result<TruncatedMeasure> {
        let blocks: Vec<VectorMeasure> = (1..=self.blocks.len())
            .map(|i| self.materialize(i).map(|c| c.xi))
            .collect::<Result<_>>()?;
        TruncatedMeasure::new(blocks, self.tail_bound)
    }
}
