//! Rademacher sign sums `Σ a_n s_n`, their `L^p` norms and the Khintchine
//! constants.
//!
//! Exact moments enumerate sign patterns in Gray-code order. Since
//! `|S(−ε)| = |S(ε)|`, only patterns with `ε_1 = +1` are visited.

use crate::error::{Error, Result};
use crate::linalg::{stream_rng, C64};
use nalgebra::Complex;
use rand::Rng;
use rayon::prelude::*;
use statrs::function::gamma::gamma;
use std::f64::consts::{PI, SQRT_2};

/// Largest `n` for which moments are computed by enumeration.
pub const EXACT_CAP: usize = 24;
/// Dyadic precision cap for [`rademacher`].
pub const RADEMACHER_CAP: u32 = 62;
/// Patterns visited between full recomputations of the running sum.
const REFRESH: u64 = 4096;
/// Samples per Monte Carlo shard; shard `i` draws from stream `i`.
const MC_SHARD: usize = 8192;

/// `r_k(t) = r_1(2^{k-1} t)` with `r_1 = 1` on `[0, 1/2)` and `−1` on
/// `[1/2, 1)`, extended with period 1.
pub fn rademacher(k: u32, t: f64) -> Result<i8> {
    if k == 0 || k > RADEMACHER_CAP {
        return Err(Error::InvalidParameter(format!("Rademacher index {k} outside 1..={RADEMACHER_CAP}")));
    }
    if !t.is_finite() {
        return Err(Error::InvalidParameter(format!("Rademacher argument {t}")));
    }
    // Scaling by a power of two and taking the fractional part are exact.
    let x = (t.rem_euclid(1.0) * (k as f64 - 1.0).exp2()).rem_euclid(1.0);
    Ok(if x < 0.5 { 1 } else { -1 })
}

/// Sign patterns `(r_1(t), …, r_n(t))` at the midpoints of the `2^n` dyadic
/// intervals of length `2^{-n}`; bit `k−1` is set when `r_k = −1`.
pub fn rademacher_patterns(n: u32) -> Result<Vec<u64>> {
    if n == 0 || n > RADEMACHER_CAP {
        return Err(Error::InvalidParameter(format!("pattern length {n}")));
    }
    if n > EXACT_CAP as u32 {
        return Err(Error::EnumerationCap {
            size: n as usize,
            cap: EXACT_CAP,
        });
    }
    let cells = 1u64 << n;
    (0..cells)
        .map(|m| {
            let t = (m as f64 + 0.5) / cells as f64;
            let mut bits = 0u64;
            for k in 1..=n {
                if rademacher(k, t)? < 0 {
                    bits |= 1 << (k - 1);
                }
            }
            Ok(bits)
        })
        .collect()
}

/// Coefficients `a = (a_1, …, a_n)` of a sign sum.
#[derive(Debug, Clone, PartialEq)]
pub struct SignSum {
    coeffs: Vec<C64>,
}

impl SignSum {
    pub fn new(coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidParameter("sign sum needs at least one coefficient".into()));
        }
        if coeffs.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidParameter("non-finite coefficient".into()));
        }
        Ok(Self { coeffs })
    }

    pub fn real(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&x| Complex::new(x, 0.0)).collect())
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_real(&self) -> bool {
        self.coeffs.iter().all(|z| z.im == 0.0)
    }

    pub fn norm2(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `(‖Re a‖₂, ‖Im a‖₂)`.
    pub fn split_norms(&self) -> (f64, f64) {
        let re = self.coeffs.iter().map(|z| z.re * z.re).sum::<f64>().sqrt();
        let im = self.coeffs.iter().map(|z| z.im * z.im).sum::<f64>().sqrt();
        (re, im)
    }

    fn check_exact(&self) -> Result<()> {
        if self.len() > EXACT_CAP {
            return Err(Error::EnumerationCap {
                size: self.len(),
                cap: EXACT_CAP,
            });
        }
        Ok(())
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::InvalidParameter(format!("exponent {p} must be finite and at least 1")));
    }
    Ok(())
}

/// Visits `S(ε) = Σ ε_k a_k` for every `ε` with `ε_1 = +1`. The free signs
/// are split into shards on their top bits; each shard walks its low bits in
/// Gray-code order. Shard results come back in shard order.
fn enumerate_half<A, I, V>(a: &[C64], init: I, visit: V) -> Vec<A>
where
    A: Send,
    I: Fn() -> A + Sync,
    V: Fn(&mut A, C64) + Sync,
{
    let free = a.len() - 1;
    let shard_bits = free.min(6);
    let low_bits = free - shard_bits;
    let sum_for = |pattern: u64| -> C64 {
        let mut s = a[0];
        for (k, &ak) in a[1..].iter().enumerate() {
            if pattern >> k & 1 == 1 {
                s -= ak;
            } else {
                s += ak;
            }
        }
        s
    };
    (0..1u64 << shard_bits)
        .into_par_iter()
        .map(|shard| {
            let high = shard << low_bits;
            let mut acc = init();
            let mut gray = 0u64;
            let mut s = sum_for(high);
            visit(&mut acc, s);
            for step in 1..1u64 << low_bits {
                let bit = step.trailing_zeros() as usize;
                gray ^= 1 << bit;
                if step % REFRESH == 0 {
                    s = sum_for(high | gray);
                } else if gray >> bit & 1 == 1 {
                    s -= a[bit + 1] * 2.0;
                } else {
                    s += a[bit + 1] * 2.0;
                }
                visit(&mut acc, s);
            }
            acc
        })
        .collect()
}

/// Sum of `|S|^p` over a shard, accumulated in blocks to limit rounding.
#[derive(Default)]
struct BlockSum {
    total: f64,
    block: f64,
    count: u32,
}

impl BlockSum {
    fn add(&mut self, x: f64) {
        self.block += x;
        self.count += 1;
        if self.count == 1024 {
            self.total += self.block;
            self.block = 0.0;
            self.count = 0;
        }
    }

    fn value(&self) -> f64 {
        self.total + self.block
    }
}

/// `(2^{-n} Σ_ε |Σ_k ε_k a_k|^p)^{1/p}`, the `L^p` norm of the sign sum.
pub fn exact_moment(a: &SignSum, p: f64) -> Result<f64> {
    check_exponent(p)?;
    a.check_exact()?;
    let shards = enumerate_half(a.coeffs(), BlockSum::default, |acc, s| {
        let m = s.norm();
        acc.add(if p == 2.0 { m * m } else { m.powf(p) })
    });
    let total: f64 = shards.iter().map(BlockSum::value).sum();
    Ok((total / (1u64 << (a.len() - 1)) as f64).powf(1.0 / p))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McMoment {
    /// Sample mean of `|S|^p` (the moment before taking the root).
    pub estimate: f64,
    pub stderr: f64,
    pub samples: usize,
}

/// Monte Carlo estimate of `E|S|^p`. Deterministic in `seed`; infinite
/// standard error for a single sample.
pub fn mc_moment(a: &SignSum, p: f64, samples: usize, seed: u64) -> Result<McMoment> {
    check_exponent(p)?;
    if samples == 0 {
        return Err(Error::InvalidParameter("at least one sample is required".into()));
    }
    let n_shards = samples.div_ceil(MC_SHARD);
    let coeffs = a.coeffs();
    // Per-shard (count, mean, M2), merged in shard order.
    let shards: Vec<(f64, f64, f64)> = (0..n_shards)
        .into_par_iter()
        .map(|shard| {
            let mut rng = stream_rng(seed, shard as u64);
            let count = MC_SHARD.min(samples - shard * MC_SHARD);
            let (mut mean, mut m2) = (0.0, 0.0);
            for i in 0..count {
                let mut s = Complex::new(0.0, 0.0);
                let mut bits = 0u64;
                for (k, &ak) in coeffs.iter().enumerate() {
                    if k % 64 == 0 {
                        bits = rng.random::<u64>();
                    }
                    if bits >> (k % 64) & 1 == 1 {
                        s -= ak;
                    } else {
                        s += ak;
                    }
                }
                let x = s.norm().powf(p);
                let delta = x - mean;
                mean += delta / (i + 1) as f64;
                m2 += delta * (x - mean);
            }
            (count as f64, mean, m2)
        })
        .collect();
    let (mut n, mut mean, mut m2) = (0.0, 0.0, 0.0);
    for (nb, mb, m2b) in shards {
        let total = n + nb;
        let delta = mb - mean;
        mean += delta * nb / total;
        m2 += m2b + delta * delta * n * nb / total;
        n = total;
    }
    let stderr = if samples < 2 {
        f64::INFINITY
    } else {
        (m2 / (n - 1.0) / n).sqrt()
    };
    Ok(McMoment {
        estimate: mean,
        stderr,
        samples,
    })
}

/// `√2 p^{1/p} Γ(p/2)^{1/p}`: the bound for real coefficients.
pub fn real_upper_constant(p: f64) -> f64 {
    SQRT_2 * (p * gamma(p / 2.0)).powf(1.0 / p)
}

/// `2 p^{1/p} Γ(p/2)^{1/p}`, the bound on `C_p` for `p ≥ 2`.
pub fn upper_constant(p: f64) -> f64 {
    2.0 * (p * gamma(p / 2.0)).powf(1.0 / p)
}

/// `B_{4−p}^{4/p − 1}` with `B_q` the upper constant, for `1 ≤ p < 2`.
pub fn lower_constant(p: f64) -> f64 {
    upper_constant(4.0 - p).powf(4.0 / p - 1.0)
}

/// `12√π`, the value of [`lower_constant`] at `p = 1`.
pub fn l1_lower_constant() -> f64 {
    12.0 * PI.sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstantCheck {
    pub p: f64,
    /// `‖Σ a_n s_n‖_p`.
    pub moment: f64,
    pub norm2: f64,
    /// `moment / ‖a‖₂` for the upper check, `‖a‖₂ / moment` for the lower.
    pub ratio: f64,
    pub constant: f64,
    pub holds: bool,
    /// Upper check: `√2 p^{1/p} Γ(p/2)^{1/p} (‖Re a‖₂ + ‖Im a‖₂)`, the
    /// intermediate bound after splitting into real and imaginary parts.
    pub split_bound: Option<f64>,
    /// Lower check at `p = 1`: whether `‖a‖₂ ≤ 12√π ‖Σ a_n s_n‖₁`.
    pub l1_holds: Option<bool>,
}

/// `‖Σ a_n s_n‖_p ≤ 2 p^{1/p} Γ(p/2)^{1/p} ‖a‖₂` for `p ≥ 2`.
pub fn check_upper_constant(a: &SignSum, p: f64) -> Result<ConstantCheck> {
    if !(p.is_finite() && p >= 2.0) {
        return Err(Error::InvalidParameter(format!("upper Khintchine check needs p ≥ 2, got {p}")));
    }
    let moment = exact_moment(a, p)?;
    let norm2 = a.norm2();
    let constant = upper_constant(p);
    let (re, im) = a.split_norms();
    let split_bound = real_upper_constant(p) * (re + im);
    Ok(ConstantCheck {
        p,
        moment,
        norm2,
        ratio: if norm2 > 0.0 { moment / norm2 } else { 0.0 },
        constant,
        holds: moment <= constant * norm2 + 1e-12 && moment <= split_bound * (1.0 + 1e-12) + 1e-12,
        split_bound: Some(split_bound),
        l1_holds: None,
    })
}

/// `‖a‖₂ ≤ C ‖Σ a_n s_n‖_p` with `C` from [`lower_constant`], `1 ≤ p < 2`.
pub fn check_lower_constant(a: &SignSum, p: f64) -> Result<ConstantCheck> {
    if !(p.is_finite() && (1.0..2.0).contains(&p)) {
        return Err(Error::InvalidParameter(format!("lower Khintchine check needs 1 ≤ p < 2, got {p}")));
    }
    let moment = exact_moment(a, p)?;
    let norm2 = a.norm2();
    let constant = lower_constant(p);
    Ok(ConstantCheck {
        p,
        moment,
        norm2,
        ratio: if moment > 0.0 { norm2 / moment } else { 0.0 },
        constant,
        holds: norm2 <= constant * moment * (1.0 + 1e-12) + 1e-12,
        split_bound: None,
        l1_holds: (p == 1.0).then(|| norm2 <= l1_lower_constant() * moment * (1.0 + 1e-12) + 1e-12),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailPoint {
    pub t: f64,
    /// `μ(|Σ a_n s_n| > t)`.
    pub tail: f64,
    /// `2 exp(−t² / (2 (a|a)))`.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailCheck {
    pub points: Vec<TailPoint>,
    pub holds: bool,
}

/// Exact tail probabilities against the sub-Gaussian bound. Real
/// coefficients only.
pub fn tail_bound_check(a: &SignSum, ts: &[f64]) -> Result<TailCheck> {
    if !a.is_real() {
        return Err(Error::ComplexCoefficients);
    }
    a.check_exact()?;
    if let Some(bad) = ts.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(Error::InvalidParameter(format!("tail threshold {bad}")));
    }
    let mut grid: Vec<f64> = ts.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    // counts[i] = patterns whose |S| exceeds exactly the thresholds grid[..i].
    let shards = enumerate_half(
        a.coeffs(),
        || vec![0u64; grid.len() + 1],
        |counts, s| counts[grid.partition_point(|&t| t < s.re.abs())] += 1,
    );
    let mut counts = vec![0u64; grid.len() + 1];
    for shard in shards {
        counts.iter_mut().zip(shard).for_each(|(c, x)| *c += x);
    }
    let total = (1u64 << (a.len() - 1)) as f64;
    let mut above = vec![0u64; grid.len()];
    let mut running = 0u64;
    for i in (0..grid.len()).rev() {
        running += counts[i + 1];
        above[i] = running;
    }
    let norm_sq = a.norm2().powi(2);
    let points: Vec<TailPoint> = ts
        .iter()
        .map(|&t| {
            let i = grid.partition_point(|&g| g < t);
            TailPoint {
                t,
                tail: above[i] as f64 / total,
                bound: 2.0 * (-t * t / (2.0 * norm_sq)).exp(),
            }
        })
        .collect();
    let holds = points.iter().all(|p| p.tail <= p.bound);
    Ok(TailCheck { points, holds })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementaryPoint {
    pub x: f64,
    /// `ln(e^x + e^{−x})`.
    pub log_lhs: f64,
    /// `ln 2 + x²/2`.
    pub log_rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElementaryCheck {
    pub points: Vec<ElementaryPoint>,
    pub min_margin: f64,
    pub holds: bool,
}

/// `e^x + e^{−x} ≤ 2 e^{x²/2}` in logarithmic form, so large `x` does not
/// overflow.
pub fn elementary_inequality_check(xs: &[f64]) -> Result<ElementaryCheck> {
    if let Some(bad) = xs.iter().find(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter(format!("grid point {bad}")));
    }
    let points: Vec<ElementaryPoint> = xs
        .iter()
        .map(|&x| {
            let ax = x.abs();
            ElementaryPoint {
                x,
                log_lhs: ax + (-2.0 * ax).exp().ln_1p(),
                log_rhs: std::f64::consts::LN_2 + x * x / 2.0,
            }
        })
        .collect();
    let min_margin = points.iter().map(|p| p.log_rhs - p.log_lhs).fold(f64::INFINITY, f64::min);
    let holds = points.iter().all(|p| p.log_lhs <= p.log_rhs + 4.0 * f64::EPSILON * p.log_rhs.abs().max(1.0));
    Ok(ElementaryCheck {
        points,
        min_margin,
        holds,
    })
}
