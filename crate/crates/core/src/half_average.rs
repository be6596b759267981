//! Subsets `J` with `|Σ_{j∈J} v_j| ≥ C_d Σ_j |v_j|` for vectors in `R^d`.
//!
//! `J = {j : (v_j, e₀) > 0}` for a maximiser `e₀` of
//! `g(e) = Σ_j (v_j, e)₊` on the unit sphere. Averaging `g` over the sphere
//! with its normalised surface measure gives `C_d = Γ(d/2) / (2√π Γ((d+1)/2))`.

use crate::error::{Error, Result};
use crate::linalg::{gaussian, stream_rng};
use nalgebra::DVector;
use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;
use std::f64::consts::{PI, TAU};

const MC_SHARD: usize = 8192;
/// Events processed between full recomputations of the sweep sum.
const SWEEP_REFRESH: usize = 64;

/// Nonzero vectors in `R^d`; zero inputs are dropped but their original
/// indices are remembered.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorFamily {
    d: usize,
    vectors: Vec<DVector<f64>>,
    indices: Vec<usize>,
    dropped: usize,
}

impl VectorFamily {
    pub fn new(d: usize, vectors: Vec<DVector<f64>>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        let mut kept = Vec::new();
        let mut indices = Vec::new();
        let mut dropped = 0;
        for (i, v) in vectors.into_iter().enumerate() {
            if v.len() != d {
                return Err(Error::DimensionMismatch(format!("vector {i} has length {} in R^{d}", v.len())));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidParameter(format!("vector {i} has a non-finite entry")));
            }
            if v.iter().all(|&x| x == 0.0) {
                dropped += 1;
            } else {
                kept.push(v);
                indices.push(i);
            }
        }
        Ok(Self {
            d,
            vectors: kept,
            indices,
            dropped,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        Self::new(d, rows.iter().map(|r| DVector::from_column_slice(r)).collect())
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn vectors(&self) -> &[DVector<f64>] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dropped(&self) -> usize {
        self.dropped
    }

    /// `g(e) = Σ_j (v_j, e)₊`.
    pub fn g(&self, e: &DVector<f64>) -> f64 {
        self.vectors.iter().map(|v| v.dot(e).max(0.0)).sum()
    }

    pub fn total_norm(&self) -> f64 {
        self.vectors.iter().map(|v| v.norm()).sum()
    }

    /// Positions (within the kept vectors) with `(v_j, e) > 0`.
    fn positive_set(&self, e: &DVector<f64>) -> Vec<usize> {
        (0..self.len()).filter(|&j| self.vectors[j].dot(e) > 0.0).collect()
    }

    fn subset_sum(&self, set: &[usize]) -> DVector<f64> {
        let mut s = DVector::zeros(self.d);
        for &j in set {
            s += &self.vectors[j];
        }
        s
    }
}

/// `Γ(d/2) / (2√π Γ((d+1)/2))`: the mean of `(v, e)₊` over the unit sphere
/// for a unit vector `v`. Equals `1/2`, `1/π`, `1/4` for `d = 1, 2, 3`.
pub fn cd_closed_form(d: usize) -> f64 {
    let d = d as f64;
    // Log-gamma difference so large d does not overflow.
    (ln_gamma(d / 2.0) - ln_gamma((d + 1.0) / 2.0)).exp() / (2.0 * PI.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfAverageConfig {
    /// Multistart count for `d ≥ 3`.
    pub restarts: usize,
    pub max_iters: usize,
    /// Allowed shortfall of the ratio below `C_d`.
    pub slack: f64,
    pub seed: u64,
}

impl Default for HalfAverageConfig {
    fn default() -> Self {
        Self {
            restarts: 64,
            max_iters: 200,
            slack: 1e-9,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HalfAverage {
    /// `J` as indices into the family's input list, ascending.
    pub subset: Vec<usize>,
    /// The maximiser `e₀` found.
    pub direction: DVector<f64>,
    /// `g(e₀)`.
    pub g_value: f64,
    /// `|Σ_{j∈J} v_j|`.
    pub subset_norm: f64,
    /// `Σ_j |v_j|`.
    pub total_norm: f64,
    pub ratio: f64,
    pub constant: f64,
    pub holds: bool,
    /// Whether the maximiser is exact (`d ≤ 2`) rather than a multistart
    /// local optimum.
    pub exact: bool,
}

/// `d = 2`: `g` is linear in `e` on each arc between critical angles, where
/// the half-plane set is constant, and its maximum over all `e` is
/// `max_J |Σ_J v_j|` over these sets. Returns the best subset sum.
fn sweep_plane(fam: &VectorFamily) -> DVector<f64> {
    let angle = |v: &DVector<f64>| v[1].atan2(v[0]);
    // (critical angle in [0, 2π), index, entering)
    let mut events: Vec<(f64, usize, bool)> = Vec::with_capacity(2 * fam.len());
    for (j, v) in fam.vectors.iter().enumerate() {
        let phi = angle(v);
        events.push(((phi - PI / 2.0).rem_euclid(TAU), j, true));
        events.push(((phi + PI / 2.0).rem_euclid(TAU), j, false));
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let unit = |theta: f64| DVector::from_vec(vec![theta.cos(), theta.sin()]);
    let first = events[0].0;
    let last = events[events.len() - 1].0;
    let start = (last - TAU + first) / 2.0;
    let mut members = vec![false; fam.len()];
    let reset = |members: &mut Vec<bool>, theta: f64| -> DVector<f64> {
        let e = unit(theta);
        members.iter_mut().enumerate().for_each(|(j, m)| *m = fam.vectors[j].dot(&e) > 0.0);
        fam.subset_sum(&(0..fam.len()).filter(|&j| members[j]).collect::<Vec<_>>())
    };
    let mut sum = reset(&mut members, start);
    let mut best = sum.clone();
    let mut i = 0;
    let mut groups = 0;
    while i < events.len() {
        let theta = events[i].0;
        while i < events.len() && events[i].0 == theta {
            let (_, j, entering) = events[i];
            if entering && !members[j] {
                members[j] = true;
                sum += &fam.vectors[j];
            } else if !entering && members[j] {
                members[j] = false;
                sum -= &fam.vectors[j];
            }
            i += 1;
        }
        groups += 1;
        if groups % SWEEP_REFRESH == 0 {
            let next = if i < events.len() { events[i].0 } else { first + TAU };
            sum = reset(&mut members, (theta + next) / 2.0);
        }
        if sum.norm() > best.norm() {
            best = sum.clone();
        }
    }
    best
}

/// Fixed-point ascent `e ← normalize(Σ_{(v_j,e)>0} v_j)`; `g` never
/// decreases along the iteration.
fn ascend(fam: &VectorFamily, mut e: DVector<f64>, max_iters: usize) -> (f64, DVector<f64>) {
    let mut set = fam.positive_set(&e);
    for _ in 0..max_iters {
        let s = fam.subset_sum(&set);
        let n = s.norm();
        if n == 0.0 {
            break;
        }
        e = s / n;
        let next = fam.positive_set(&e);
        if next == set {
            break;
        }
        set = next;
    }
    (fam.g(&e), e)
}

fn multistart(fam: &VectorFamily, cfg: &HalfAverageConfig) -> DVector<f64> {
    let d = fam.d;
    let mut starts: Vec<DVector<f64>> = Vec::new();
    let total = fam.subset_sum(&(0..fam.len()).collect::<Vec<_>>());
    if total.norm() > 0.0 {
        starts.push(total.normalize());
    }
    let mut by_norm: Vec<usize> = (0..fam.len()).collect();
    by_norm.sort_by(|&a, &b| fam.vectors[b].norm().total_cmp(&fam.vectors[a].norm()).then(a.cmp(&b)));
    starts.extend(by_norm.iter().take(cfg.restarts / 2).map(|&j| fam.vectors[j].normalize()));
    let random = cfg.restarts.saturating_sub(starts.len()).max(1);
    starts.extend((0..random).map(|r| {
        let mut rng = stream_rng(cfg.seed, r as u64);
        loop {
            let v = DVector::from_fn(d, |_, _| gaussian(&mut rng));
            if v.norm() > 0.0 {
                break v.normalize();
            }
        }
    }));
    let results: Vec<(f64, DVector<f64>)> = starts.into_par_iter().map(|e| ascend(fam, e, cfg.max_iters)).collect();
    results
        .into_iter()
        .reduce(|best, cand| if cand.0 > best.0 { cand } else { best })
        .map(|(_, e)| e)
        .expect("at least one start")
}

pub fn half_average_subset(fam: &VectorFamily, cfg: &HalfAverageConfig) -> Result<HalfAverage> {
    if fam.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let (direction, exact) = match fam.d {
        1 => {
            let up = DVector::from_element(1, 1.0);
            let down = DVector::from_element(1, -1.0);
            (if fam.g(&up) >= fam.g(&down) { up } else { down }, true)
        }
        2 => (sweep_plane(fam).normalize(), true),
        _ => (multistart(fam, cfg), false),
    };
    let set = fam.positive_set(&direction);
    let subset_norm = fam.subset_sum(&set).norm();
    let total_norm = fam.total_norm();
    let ratio = subset_norm / total_norm;
    let constant = cd_closed_form(fam.d);
    Ok(HalfAverage {
        subset: set.iter().map(|&j| fam.indices[j]).collect(),
        g_value: fam.g(&direction),
        direction,
        subset_norm,
        total_norm,
        ratio,
        constant,
        holds: ratio >= constant - cfg.slack,
        exact,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdEstimate {
    pub d: usize,
    /// Mean of `(e₁, e)₊` over uniform unit `e`.
    pub estimate: f64,
    pub stderr: f64,
    pub closed_form: f64,
    /// `|estimate − closed_form| ≤ 4·stderr`.
    pub agrees: bool,
}

/// Monte Carlo estimate of `C_d` against its closed form. Deterministic in
/// `seed`.
pub fn estimate_cd(d: usize, samples: usize, seed: u64) -> Result<CdEstimate> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("C_d estimation needs d ≥ 2, got {d}")));
    }
    if samples < 2 {
        return Err(Error::InvalidParameter("at least two samples are required".into()));
    }
    let shards: Vec<(f64, f64)> = (0..samples.div_ceil(MC_SHARD))
        .into_par_iter()
        .map(|shard| {
            let mut rng = stream_rng(seed, shard as u64);
            let count = MC_SHARD.min(samples - shard * MC_SHARD);
            let (mut sum, mut sum_sq) = (0.0, 0.0);
            for _ in 0..count {
                let x: Vec<f64> = (0..d).map(|_| gaussian(&mut rng)).collect();
                let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                let value = if norm > 0.0 { (x[0] / norm).max(0.0) } else { 0.0 };
                sum += value;
                sum_sq += value * value;
            }
            (sum, sum_sq)
        })
        .collect();
    let (sum, sum_sq) = shards.iter().fold((0.0, 0.0), |acc, s| (acc.0 + s.0, acc.1 + s.1));
    let n = samples as f64;
    let estimate = sum / n;
    let variance = ((sum_sq - n * estimate * estimate) / (n - 1.0)).max(0.0);
    let stderr = (variance / n).sqrt();
    let closed_form = cd_closed_form(d);
    Ok(CdEstimate {
        d,
        estimate,
        stderr,
        closed_form,
        agrees: (estimate - closed_form).abs() <= 4.0 * stderr,
    })
}
