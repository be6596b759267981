//! Acceptance criteria 1–9. Criterion 10 (repeated `accept` runs produce
//! identical bytes) needs two processes and is checked by the caller.
//!
//! Every criterion draws its randomness from its own stream of the global
//! seed. Reports carry no timings, so a report is a pure function of the
//! seed.

use crate::commands::{CmdError, CmdResult, Globals};
use crate::report::{num, Assertion, Relation, Report};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};
use std::f64::consts::PI;
use tpmeasure::half_average::{cd_closed_form, estimate_cd, half_average_subset, HalfAverageConfig, VectorFamily};
use tpmeasure::hs_extension::{construct_hs_measures, Variant};
use tpmeasure::khintchine::{check_lower_constant, check_upper_constant, exact_moment, tail_bound_check, SignSum};
use tpmeasure::linalg::{
    gaussian, random_complex_matrix, random_complex_vector, random_psd, random_real_matrix, random_unitary, stream_rng,
};
use tpmeasure::tensor_norms::{
    cross_norms, hs_norm, p_summing_lower_bound, p_summing_profile, FamilyConfig, RepresentationSearch, TensorElement,
};
use tpmeasure::vector_measures::{
    semivariation_enumerated, semivariation_iterative, ComplexMeasure, VectorMeasure,
};
use tpmeasure::{AtomSet, CVector, FiniteAlgebra, OptConfig, C64};

pub const TITLES: [&str; 10] = [
    "HS construction",
    "Divergence witness",
    "Pi inequality",
    "Semi-variation",
    "Cross norms",
    "p-summing",
    "Khintchine",
    "Half-average",
    "Spectral demo",
    "Determinism",
];

/// Seed of the fixed Khintchine corpus; independent of `--seed`.
const KHINTCHINE_CORPUS_SEED: u64 = 0x4b48_494e;

#[derive(Debug, Clone, PartialEq)]
pub struct Criterion {
    pub id: u8,
    pub title: &'static str,
    pub assertions: Vec<Assertion>,
    pub details: Map<String, Value>,
}

impl Criterion {
    fn new(id: u8) -> Self {
        Self {
            id,
            title: TITLES[id as usize - 1],
            assertions: Vec::new(),
            details: Map::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    fn check(&mut self, a: Assertion) {
        self.assertions.push(a);
    }

    fn detail(&mut self, key: &str, value: impl Into<Value>) {
        self.details.insert(key.to_string(), value.into());
    }

    /// One line: `criterion N  PASS|FAIL  title`, then failing assertions.
    pub fn summary(&self) -> String {
        let mut s = format!(
            "criterion {:>2}  {}  {}",
            self.id,
            if self.passed() { "PASS" } else { "FAIL" },
            self.title
        );
        for a in self.assertions.iter().filter(|a| !a.passed) {
            s.push_str(&format!("\n    failed: {} (lhs {}, rhs {}, tol {})", a.name, a.lhs, a.rhs, a.tol));
        }
        s
    }
}

fn rng_for(g: Globals, id: u8) -> ChaCha8Rng {
    stream_rng(g.seed, 100 + id as u64)
}

/// Runs a subcommand in-process and returns its report.
fn run_cli(args: &[&str], g: Globals) -> CmdResult {
    let seed = g.seed.to_string();
    let mut argv = vec!["tpm"];
    argv.extend_from_slice(args);
    argv.extend_from_slice(&["--seed", &seed]);
    let outcome = crate::run(argv);
    outcome
        .report
        .ok_or_else(|| CmdError::Invalid(format!("`{}` failed: {}", args.join(" "), outcome.stderr.trim())))
}

fn output_f64(r: &Report, key: &str) -> Result<f64, CmdError> {
    r.outputs
        .get(key)
        .and_then(Value::as_f64)
        .ok_or_else(|| CmdError::Invalid(format!("`{}` report has no number `{key}`", r.command)))
}

fn c1(g: Globals) -> Result<Criterion, CmdError> {
    let mut c = Criterion::new(1);
    let r = run_cli(&["hs-construct", "--matrix", "diag:3,4"], g)?;
    let achieved = output_f64(&r, "achieved")?;
    c.check(Assertion::new("diag_3_4_achieved_eq_5", achieved, Relation::Eq, 5.0, 1e-8));
    c.check(Assertion::new("diag_3_4_hs_eq_5", output_f64(&r, "hs")?, Relation::Eq, 5.0, 1e-8));
    let mut rng = rng_for(g, 1);
    let (mut max_rel, mut max_unit) = (0.0f64, 0.0f64);
    for _ in 0..200 {
        let n = rng.random_range(1..=8);
        let rank = rng.random_range(1..=n);
        let t = random_psd(&mut rng, n, rank);
        let con = construct_hs_measures(&t, Variant::ComplexDft)?;
        max_rel = max_rel.max((con.achieved - con.hs).abs() / con.hs);
        max_unit = max_unit.max((con.xi_norm() - 1.0).abs()).max((con.eta_norm() - 1.0).abs());
    }
    c.check(Assertion::new("random_psd_max_relative_error", max_rel, Relation::Le, 1e-8, 0.0));
    c.check(Assertion::new("random_psd_max_unit_norm_deviation", max_unit, Relation::Le, 1e-10, 0.0));
    c.detail("diag_achieved", num(achieved));
    c.detail("random_cases", 200);
    c.detail("max_relative_error", num(max_rel));
    Ok(c)
}

fn c2(g: Globals) -> Result<Criterion, CmdError> {
    let mut c = Criterion::new(2);
    let r = run_cli(&["hs-diverge", "--blocks", "5"], g)?;
    let sums: Vec<f64> = r.outputs["partial_sums"]
        .as_array()
        .map(|xs| xs.iter().filter_map(Value::as_f64).collect())
        .unwrap_or_default();
    c.check(Assertion::new("block_count", sums.len() as f64, Relation::Eq, 5.0, 0.0));
    for (i, s) in sums.iter().enumerate() {
        let k = (i + 1) as f64;
        c.check(Assertion::new(format!("partial_sum_{}_ge_{}", i + 1, i + 1), *s, Relation::Ge, k, 0.0));
    }
    let xi_sq = output_f64(&r, "xi_norm_sq")?;
    c.check(Assertion::new("xi_norm_sq_lt_1", xi_sq, Relation::Lt, 1.0, 0.0));
    c.detail("partial_sums", sums.iter().map(|&x| num(x)).collect::<Vec<_>>());
    c.detail("xi_norm_sq", num(xi_sq));
    Ok(c)
}

fn c3(g: Globals) -> Result<Criterion, CmdError> {
    let mut c = Criterion::new(3);
    let mut rng = rng_for(g, 3);
    let mut max_excess = f64::NEG_INFINITY;
    let mut max_ratio = 0.0f64;
    for i in 0..500 {
        let n = rng.random_range(1..=12);
        let values: Vec<C64> = match i % 3 {
            0 => random_complex_vector(&mut rng, n).iter().cloned().collect(),
            1 => (0..n).map(|_| C64::from_polar(1.0, rng.random_range(0.0..2.0 * PI))).collect(),
            _ => (0..n)
                .map(|k| C64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64 + 0.05 * gaussian(&mut rng)))
                .collect(),
        };
        let lambda = ComplexMeasure::from_values(values)?;
        let set = AtomSet::full(n);
        let variation = lambda.variation(&set)?;
        let (sup, _) = lambda.subset_sup(&set)?;
        max_excess = max_excess.max(variation - PI * sup);
        max_ratio = max_ratio.max(variation / sup);
    }
    c.check(Assertion::new("variation_minus_pi_sup", max_excess, Relation::Le, 0.0, 1e-10));
    let r = run_cli(&["pi-ratio", "--phases", "64"], g)?;
    let ratio64 = output_f64(&r, "ratio")?;
    c.check(Assertion::new("phases_64_ratio_ge_3", ratio64, Relation::Ge, 3.0, 0.0));
    c.check(Assertion::new("phases_64_ratio_le_pi", ratio64, Relation::Le, PI, 1e-12));
    c.detail("cases", 500);
    c.detail("max_random_ratio", num(max_ratio));
    c.detail("phases_64_ratio", num(ratio64));
    Ok(c)
}

fn orthogonal_measure(rng: &mut ChaCha8Rng, real: bool) -> Result<VectorMeasure, CmdError> {
    let d = rng.random_range(1..=8);
    let k = rng.random_range(1..=d);
    let algebra = FiniteAlgebra::new(k)?;
    let phi = if real {
        let q = random_real_matrix(rng, d, d).map(|z| z.re).qr().q();
        let atoms = (0..k).map(|j| q.column(j) * gaussian(rng)).collect();
        VectorMeasure::real(algebra, atoms)?
    } else {
        let u = random_unitary(rng, d);
        let w = random_complex_vector(rng, k);
        VectorMeasure::complex(algebra, (0..k).map(|j| u.column(j) * w[j]).collect())?
    };
    Ok(phi.into_orthogonal()?)
}

fn c4(g: Globals) -> Result<Criterion, CmdError> {
    let mut c = Criterion::new(4);
    let mut rng = rng_for(g, 4);
    let cfg = OptConfig::with_seed(g.seed);
    let mut max_dev = 0.0f64;
    for i in 0..100 {
        let phi = orthogonal_measure(&mut rng, i % 2 == 0)?;
        let k = phi.n_atoms();
        let mut set: AtomSet = (0..k).filter(|_| rng.random_bool(0.6)).collect();
        if set.is_empty() {
            set.insert(rng.random_range(0..k));
        }
        let sv = semivariation_iterative(&phi, &set, &cfg)?;
        let norm = phi.value(&set)?.norm();
        max_dev = max_dev.max((sv.lower - norm).abs()).max((sv.upper - norm).abs());
    }
    c.check(Assertion::new("orthogonal_semivariation_minus_norm", max_dev, Relation::Le, 1e-8, 0.0));

    let cases = 300;
    let (mut matched, mut bracketed) = (0usize, 0usize);
    for _ in 0..cases {
        let n = rng.random_range(1..=16);
        let d = rng.random_range(1..=5);
        let atoms = (0..n).map(|_| random_real_matrix(&mut rng, d, 1).column(0).map(|z| z.re)).collect();
        let phi = VectorMeasure::real(FiniteAlgebra::new(n)?, atoms)?;
        let set = AtomSet::full(n);
        let it = semivariation_iterative(&phi, &set, &cfg)?;
        let exact = semivariation_enumerated(&phi, &set)?.lower;
        if (it.lower - exact).abs() <= 1e-8 {
            matched += 1;
        }
        let scale = 1e-12 * exact.max(1.0);
        if it.lower <= exact + scale && exact <= it.upper + scale {
            bracketed += 1;
        }
    }
    let fraction = matched as f64 / cases as f64;
    c.check(Assertion::new("real_iterative_match_fraction", fraction, Relation::Ge, 0.99, 0.0));
    c.check(Assertion::new("real_iterative_brackets", bracketed as f64, Relation::Eq, cases as f64, 0.0));
    c.detail("max_orthogonal_deviation", num(max_dev));
    c.detail("real_matched", matched);
    c.detail("real_cases", cases);
    Ok(c)
}

fn c5(g: Globals) -> Result<Criterion, CmdError> {
    let mut c = Criterion::new(5);
    let mut rng = rng_for(g, 5);
    let mut worst = f64::NEG_INFINITY;
    for i in 0..500u64 {
        let m = rng.random_range(1..=6);
        let n = rng.random_range(1..=6);
        let z = TensorElement::new(random_complex_matrix(&mut rng, m, n))?;
        let norms = cross_norms(&z, &RepresentationSearch::with_seed(g.seed ^ i));
        for b in [&norms.l, &norms.r, &norms.m] {
            worst = worst
                .max(norms.injective - b.lower)
                .max(norms.injective - b.upper)
                .max(b.lower - b.upper)
                .max(b.upper - norms.projective);
        }
    }
    c.check(Assertion::new("sandwich_worst_violation", worst, Relation::Le, 0.0, 1e-8));
    let mut worst_elem = 0.0f64;
    for i in 0..50u64 {
        let m = rng.random_range(1..=6);
        let n = rng.random_range(1..=6);
        let x: CVector = random_complex_vector(&mut rng, m);
        let y: CVector = random_complex_vector(&mut rng, n);
        let target = x.norm() * y.norm();
        let norms = cross_norms(&TensorElement::elementary(&x, &y)?, &RepresentationSearch::with_seed(g.seed ^ i));
        let values = [
            norms.injective,
            norms.projective,
            norms.hilbert_schmidt,
            norms.l.lower,
            norms.l.upper,
            norms.r.lower,
            norms.r.upper,
            norms.m.lower,
            norms.m.upper,
        ];
        for v in values {
            worst_elem = worst_elem.max((v - target).abs());
        }
    }
    c.check(Assertion::new("elementary_max_deviation", worst_elem, Relation::Le, 1e-10, 0.0));
    c.detail("random_tensors", 500);
    c.detail("elementary_tensors", 50);
    c.detail("sandwich_worst", num(worst));
    Ok(c)
}

fn c6(g: Globals) -> Result<Criterion, CmdError> {
    let mut c = Criterion::new(6);
    let mut rng = rng_for(g, 6);
    let grid = [1.0, 1.25, 1.5, 2.0, 3.0, 4.0, 6.0];
    let (mut max_dev, mut max_rise) = (0.0f64, f64::NEG_INFINITY);
    for i in 0..100u64 {
        let m = rng.random_range(1..=6);
        let n = rng.random_range(1..=6);
        let t = random_complex_matrix(&mut rng, m, n);
        let hs = hs_norm(&t);
        let b = p_summing_lower_bound(&t, 2.0, &FamilyConfig::singular_only())?;
        max_dev = max_dev.max((b.lower - hs).abs());
        let cfg = FamilyConfig {
            seed: g.seed ^ i,
            ..FamilyConfig::default()
        };
        let profile = p_summing_profile(&t, &grid, &cfg)?;
        for w in profile.windows(2) {
            max_rise = max_rise.max(w[1].lower - w[0].lower);
        }
    }
    c.check(Assertion::new("p2_singular_family_minus_hs", max_dev, Relation::Le, 1e-8, 0.0));
    c.check(Assertion::new("max_increase_in_p", max_rise, Relation::Le, 0.0, 0.0));
    c.detail("matrices", 100);
    c.detail("p_grid", grid.iter().map(|&p| num(p)).collect::<Vec<_>>());
    Ok(c)
}

/// Fixed real coefficient sequences: Gaussian, flat, geometric, one
/// dominant entry and random-sign flat.
pub fn khintchine_corpus() -> Vec<Vec<f64>> {
    let mut rng = stream_rng(KHINTCHINE_CORPUS_SEED, 0);
    (0..50)
        .map(|i| {
            let n = 1 + (i * 7) % 16;
            match i % 5 {
                0 => (0..n).map(|_| gaussian(&mut rng)).collect(),
                1 => vec![1.0; n],
                2 => (0..n).map(|k| 0.5f64.powi(k as i32)).collect(),
                3 => (0..n).map(|k| if k == 0 { 1.0 } else { 1e-3 * gaussian(&mut rng) }).collect(),
                _ => (0..n).map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 }).collect(),
            }
        })
        .collect()
}

/// The `khintchine` table run used by criterion 7.
pub fn khintchine_table_args(seed: u64) -> Vec<String> {
    ["khintchine", "--p", "1,1.5,3,4", "--coeffs"]
        .iter()
        .map(|s| s.to_string())
        .chain([format!("rand:24:{seed}")])
        .collect()
}

fn c7(g: Globals) -> Result<Criterion, CmdError> {
    let mut c = Criterion::new(7);
    let mut rng = rng_for(g, 7);
    let mut max_dev = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(1..=16);
        let a = SignSum::new(random_complex_vector(&mut rng, n).iter().cloned().collect())?;
        max_dev = max_dev.max((exact_moment(&a, 2.0)? - a.norm2()).abs());
    }
    c.check(Assertion::new("moment_p2_minus_norm2", max_dev, Relation::Le, 1e-12, 0.0));
    let (mut checks, mut failures) = (0usize, 0usize);
    for coeffs in khintchine_corpus() {
        let a = SignSum::real(&coeffs)?;
        for p in [2.0, 3.0, 4.0, 6.0] {
            checks += 1;
            failures += usize::from(!check_upper_constant(&a, p)?.holds);
        }
        for p in [1.0, 1.5] {
            let check = check_lower_constant(&a, p)?;
            checks += 1;
            failures += usize::from(!check.holds || check.l1_holds == Some(false));
        }
        let norm = a.norm2();
        let ts: Vec<f64> = (0..=16).map(|k| k as f64 * 0.25 * norm).collect();
        checks += 1;
        failures += usize::from(!tail_bound_check(&a, &ts)?.holds);
    }
    c.check(Assertion::new("corpus_failures", failures as f64, Relation::Eq, 0.0, 0.0));
    let seed = rng.random::<u32>() as u64;
    let args = khintchine_table_args(seed);
    let r = run_cli(&args.iter().map(String::as_str).collect::<Vec<_>>(), g)?;
    c.check(Assertion::holds("table_p_1_1.5_3_4_passed", r.passed));
    c.detail("corpus_cases", 50);
    c.detail("corpus_checks", checks);
    c.detail("table_rows", r.outputs.get("table").cloned().unwrap_or(Value::Null));
    Ok(c)
}

fn c8(g: Globals) -> Result<Criterion, CmdError> {
    let mut c = Criterion::new(8);
    let mut rng = rng_for(g, 8);
    for d in [2usize, 3] {
        let e = estimate_cd(d, 1_000_000, g.seed ^ d as u64)?;
        c.check(Assertion::new(format!("cd_{d}_within_4_stderr"), e.estimate, Relation::Eq, e.closed_form, 4.0 * e.stderr));
        c.detail(&format!("cd_{d}"), json!({"estimate": num(e.estimate), "stderr": num(e.stderr)}));
    }
    let cfg = HalfAverageConfig {
        seed: g.seed,
        ..HalfAverageConfig::default()
    };
    let mut worst = f64::INFINITY;
    for _ in 0..1000 {
        let d = rng.random_range(1..=5);
        let n = rng.random_range(1..=50);
        let fam = VectorFamily::new(
            d,
            (0..n).map(|_| nalgebra::DVector::from_fn(d, |_, _| gaussian(&mut rng))).collect(),
        )?;
        let h = half_average_subset(&fam, &cfg)?;
        worst = worst.min(h.ratio - cd_closed_form(d));
    }
    c.check(Assertion::new("min_ratio_minus_cd", worst, Relation::Ge, 0.0, cfg.slack));
    c.detail("families", 1000);
    c.detail("min_ratio_minus_cd", num(worst));
    Ok(c)
}

fn c9(g: Globals) -> Result<Criterion, CmdError> {
    let mut c = Criterion::new(9);
    let r = run_cli(&["spectral-demo", "--n", "5", "--times", "20"], g)?;
    let d = output_f64(&r, "max_discrepancy")?;
    c.check(Assertion::new("max_discrepancy", d, Relation::Le, 1e-10, 0.0));
    c.detail("max_discrepancy", num(d));
    Ok(c)
}

/// Runs criterion `id` (1–9).
pub fn criterion(id: u8, g: Globals) -> Result<Criterion, CmdError> {
    match id {
        1 => c1(g),
        2 => c2(g),
        3 => c3(g),
        4 => c4(g),
        5 => c5(g),
        6 => c6(g),
        7 => c7(g),
        8 => c8(g),
        9 => c9(g),
        _ => Err(CmdError::Invalid(format!("criterion {id} cannot run in-process"))),
    }
}

pub fn accept(g: Globals) -> CmdResult {
    let mut r = Report::new("accept");
    r.input("seed", g.seed);
    let mut rows = Vec::new();
    for id in 1..=9 {
        let c = criterion(id, g)?;
        rows.push(json!({
            "id": c.id,
            "title": c.title,
            "passed": c.passed(),
            "details": Value::Object(c.details.clone()),
        }));
        for mut a in c.assertions {
            a.name = format!("c{id}.{}", a.name);
            r.assert(a);
        }
    }
    r.output("criteria", rows);
    r.output("determinism", "criterion 10: compare the bytes of two runs with the same seed");
    Ok(r)
}
