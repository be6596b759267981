//! One function per subcommand; each returns a finished report.

use crate::input::{matrix_arg, real_list, vector_arg, InputError};
use crate::report::{complexes, num, nums, Assertion, Relation, Report};
use nalgebra::DVector;
use serde_json::{json, Value};
use std::f64::consts::PI;
use thiserror::Error;
use tpmeasure::half_average::{estimate_cd, half_average_subset, HalfAverageConfig, VectorFamily};
use tpmeasure::hs_extension::{
    construct_hs_measures, construct_hs_measures_general, divergence_witness, spectral_demo, BlockSpec, HsConstruction,
    Route, Variant, DISCREPANCY_TOL,
};
use tpmeasure::khintchine::{
    check_lower_constant, check_upper_constant, elementary_inequality_check, exact_moment, mc_moment,
    tail_bound_check, SignSum, EXACT_CAP,
};
use tpmeasure::linalg::{operator_norm, random_complex_matrix, random_complex_vector, random_hermitian, random_real_matrix, seeded_rng, stream_rng};
use tpmeasure::tensor_norms::{
    cross_norms, hs_norm, p_summing_lower_bound, p_summing_profile, FamilyConfig, NormBounds, RepresentationSearch,
    TensorElement,
};
use tpmeasure::vector_measures::{pi_ratio, pi_ratio_planar, semivariation, ComplexMeasure, VectorMeasure, SIGN_ENUMERATION_CAP, SUBSET_ENUMERATION_CAP};
use tpmeasure::{AtomSet, CVector, FiniteAlgebra, OpMatrix, OptConfig, C64};

#[derive(Debug, Error)]
pub enum CmdError {
    #[error(transparent)]
    Input(#[from] InputError),
    #[error(transparent)]
    Library(#[from] tpmeasure::Error),
    #[error("{0}")]
    Invalid(String),
}

pub type CmdResult = Result<Report, CmdError>;

/// Parameters shared by every subcommand.
#[derive(Debug, Clone, Copy)]
pub struct Globals {
    pub seed: u64,
    pub tol: f64,
}

fn start(command: &str, g: Globals) -> Report {
    let mut r = Report::new(command);
    r.input("seed", g.seed).input("tol", num(g.tol));
    r
}

fn real_entries(m: &OpMatrix, what: &str) -> Result<(), CmdError> {
    if m.iter().any(|z| z.im != 0.0) {
        return Err(CmdError::Invalid(format!("{what} must be real")));
    }
    Ok(())
}

fn parse_set(spec: Option<&str>, n: usize) -> Result<AtomSet, CmdError> {
    let Some(spec) = spec else {
        return Ok(AtomSet::full(n));
    };
    spec.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .ok()
                .filter(|&i| i < n)
                .ok_or_else(|| CmdError::Invalid(format!("atom `{t}` is not an index below {n}")))
        })
        .collect()
}

fn vector_json(v: &CVector) -> Value {
    complexes(v.iter())
}

fn bounds_json(b: &NormBounds) -> Value {
    json!({
        "lower": num(b.lower),
        "upper": num(b.upper),
        "certified_upper": num(b.certified_upper),
        "converged": b.converged,
        "best_len": b.best_len,
    })
}

pub struct SemivarArgs<'a> {
    pub measure: Option<&'a str>,
    pub real: bool,
    pub dim: usize,
    pub atoms: usize,
    pub set: Option<&'a str>,
}

pub fn semivar(g: Globals, a: &SemivarArgs) -> CmdResult {
    let mut r = start("semivar", g);
    let m = match a.measure {
        Some(spec) => {
            r.input("measure", spec);
            matrix_arg(spec, g.seed)?
        }
        None => {
            r.input("dim", a.dim).input("atoms", a.atoms);
            if a.dim == 0 || a.atoms == 0 {
                return Err(CmdError::Invalid("dim and atoms must be positive".into()));
            }
            let mut rng = seeded_rng(g.seed);
            if a.real {
                random_real_matrix(&mut rng, a.dim, a.atoms)
            } else {
                random_complex_matrix(&mut rng, a.dim, a.atoms)
            }
        }
    };
    r.input("real", a.real);
    let algebra = FiniteAlgebra::new(m.ncols())?;
    let columns: Vec<CVector> = (0..m.ncols()).map(|k| m.column(k).into_owned()).collect();
    let phi = if a.real {
        real_entries(&m, "a real measure")?;
        VectorMeasure::real(algebra, columns.iter().map(|v| v.map(|z| z.re)).collect())?
    } else {
        VectorMeasure::complex(algebra, columns)?
    };
    let set = parse_set(a.set, m.ncols())?;
    r.input("set", set.to_vec());
    let sv = semivariation(&phi, &set, &OptConfig::with_seed(g.seed))?;
    let value_norm = phi.value(&set)?.norm();
    let triangle: f64 = set.iter().map(|i| phi.atoms()[i].norm()).sum();
    let method = if a.real && set.len() <= SIGN_ENUMERATION_CAP { "enumeration" } else { "iterative" };
    r.number("lower", sv.lower)
        .number("upper", sv.upper)
        .number("gap", sv.gap)
        .number("value_norm", value_norm)
        .number("triangle_bound", triangle)
        .output("exact", sv.exact)
        .output("converged", sv.converged)
        .output("within_gap", sv.within_gap)
        .output("iterations", sv.iterations)
        .output("method", method)
        .output("direction", vector_json(&sv.direction))
        .output("dim", phi.dim())
        .output("n_atoms", phi.n_atoms());
    r.assert(Assertion::new("lower_le_upper", sv.lower, Relation::Le, sv.upper, g.tol))
        .assert(Assertion::new("value_norm_le_semivariation", value_norm, Relation::Le, sv.lower, g.tol))
        .assert(Assertion::new("upper_le_triangle_bound", sv.upper, Relation::Le, triangle, g.tol));
    Ok(r)
}

pub fn pi_ratio_cmd(g: Globals, values: Option<&str>, phases: Option<usize>) -> CmdResult {
    let mut r = start("pi-ratio", g);
    let vals: Vec<C64> = match (values, phases) {
        (Some(_), Some(_)) => return Err(CmdError::Invalid("give either --values or --phases".into())),
        (Some(spec), None) => {
            r.input("values", spec);
            vector_arg(spec, g.seed)?.iter().cloned().collect()
        }
        (None, m) => {
            let m = m.unwrap_or(64);
            if m == 0 {
                return Err(CmdError::Invalid("--phases must be positive".into()));
            }
            r.input("phases", m);
            (0..m).map(|k| C64::from_polar(1.0, 2.0 * PI * k as f64 / m as f64)).collect()
        }
    };
    let n = vals.len();
    let lambda = ComplexMeasure::from_values(vals)?;
    let set = AtomSet::full(n);
    let (ratio, method) = if n <= SUBSET_ENUMERATION_CAP {
        (pi_ratio(&lambda, &set)?, "enumeration")
    } else {
        (pi_ratio_planar(&lambda, &set)?, "half-plane sweep")
    };
    r.number("variation", ratio.variation)
        .number("subset_sup", ratio.subset_sup)
        .number("ratio", ratio.ratio)
        .output("best_subset", ratio.best_subset.to_vec())
        .output("method", method)
        .output("n_atoms", n);
    r.assert(Assertion::new("ratio_le_pi", ratio.ratio, Relation::Le, PI, 1e-12));
    Ok(r)
}

pub fn crossnorm(g: Globals, matrix: &str, steps: usize) -> CmdResult {
    let mut r = start("crossnorm", g);
    r.input("matrix", matrix).input("steps", steps);
    let z = TensorElement::new(matrix_arg(matrix, g.seed)?)?;
    let mut search = RepresentationSearch::with_seed(g.seed);
    search.steps = steps;
    let c = cross_norms(&z, &search);
    r.number("injective", c.injective)
        .number("projective", c.projective)
        .number("hilbert_schmidt", c.hilbert_schmidt)
        .output("l", bounds_json(&c.l))
        .output("r", bounds_json(&c.r))
        .output("m", bounds_json(&c.m))
        .output("shape", vec![z.shape().0, z.shape().1]);
    for (name, b) in [("l", &c.l), ("r", &c.r), ("m", &c.m)] {
        r.assert(Assertion::new(format!("injective_le_{name}"), c.injective, Relation::Le, b.lower, g.tol))
            .assert(Assertion::new(format!("{name}_le_projective"), b.upper, Relation::Le, c.projective, g.tol));
    }
    r.assert(Assertion::new("injective_le_hs", c.injective, Relation::Le, c.hilbert_schmidt, g.tol))
        .assert(Assertion::new("hs_le_projective", c.hilbert_schmidt, Relation::Le, c.projective, g.tol));
    Ok(r)
}

pub fn psumming(g: Globals, matrix: &str, ps: &str, gaussian_families: usize) -> CmdResult {
    let mut r = start("psumming", g);
    r.input("matrix", matrix).input("p", ps).input("gaussian_families", gaussian_families);
    let t = matrix_arg(matrix, g.seed)?;
    let grid = real_list(ps)?;
    let cfg = FamilyConfig {
        gaussian_families,
        seed: g.seed,
        ..FamilyConfig::default()
    };
    let profile = p_summing_profile(&t, &grid, &cfg)?;
    let hs = hs_norm(&t);
    let rows: Vec<Value> = profile
        .iter()
        .map(|b| {
            json!({
                "p": num(b.p),
                "lower": num(b.lower),
                "upper": b.upper.map(num),
                "family": b.family_kind.name(),
                "family_len": b.family_len,
                "reweighted": b.reweighted,
            })
        })
        .collect();
    r.output("profile", rows).number("hilbert_schmidt", hs);
    let singular = p_summing_lower_bound(&t, 2.0, &FamilyConfig::singular_only())?;
    r.number("singular_family_p2", singular.lower);
    r.assert(Assertion::new("singular_family_p2_eq_hs", singular.lower, Relation::Eq, hs, g.tol * (1.0 + hs)));
    let mut order: Vec<&_> = profile.iter().collect();
    order.sort_by(|a, b| a.p.total_cmp(&b.p));
    let monotone = order.windows(2).all(|w| w[0].lower >= w[1].lower - g.tol);
    r.assert(Assertion::holds("lower_bounds_non_increasing_in_p", monotone));
    for b in &profile {
        if b.p == 2.0 {
            r.assert(Assertion::new("p2_lower_le_hs", b.lower, Relation::Le, hs, g.tol * (1.0 + hs)));
        }
    }
    Ok(r)
}

fn measure_json(m: &VectorMeasure) -> Value {
    Value::Array(m.atoms().iter().map(vector_json).collect())
}

pub fn hs_construct(g: Globals, matrix: &str, variant: Variant, polar: bool) -> CmdResult {
    let mut r = start("hs-construct", g);
    r.input("matrix", matrix).input("variant", variant.name()).input("polar", polar);
    let t = matrix_arg(matrix, g.seed)?;
    let con: HsConstruction = if polar {
        construct_hs_measures_general(&t, variant)?
    } else {
        construct_hs_measures(&t, variant)?
    };
    r.number("achieved", con.achieved)
        .number("hs", con.hs)
        .number("xi_norm", con.xi_norm())
        .number("eta_norm", con.eta_norm())
        .output("eta_degenerate", con.eta_degenerate)
        .output("route", if con.route == Route::Polar { "polar" } else { "positive" })
        .output("n_atoms", con.xi.n_atoms())
        .output("xi", measure_json(&con.xi))
        .output("eta", measure_json(&con.eta));
    let scale = 1.0 + operator_norm(&t);
    r.assert(Assertion::new("achieved_eq_hs", con.achieved, Relation::Eq, con.hs, g.tol * scale))
        .assert(Assertion::new("xi_unit_norm", con.xi_norm(), Relation::Eq, 1.0, 1e-10))
        .assert(Assertion::holds("xi_orthogonal", con.xi.is_orthogonal()))
        .assert(Assertion::holds("eta_orthogonal", con.eta.is_orthogonal()));
    if !con.eta_degenerate {
        r.assert(Assertion::new("eta_unit_norm", con.eta_norm(), Relation::Eq, 1.0, 1e-10));
    }
    Ok(r)
}

pub fn hs_diverge(g: Globals, blocks: usize, eps: Option<&str>, dims: Option<&str>) -> CmdResult {
    let mut r = start("hs-diverge", g);
    r.input("blocks", blocks);
    let eps_values = eps.map(real_list).transpose()?;
    if let Some(e) = eps {
        r.input("eps", e);
    }
    let spec = match dims {
        Some(d) => {
            r.input("dims", d);
            let dims = d
                .split(',')
                .map(|t| t.trim().parse::<usize>().map_err(|_| CmdError::Invalid(format!("bad dimension `{t}`"))))
                .collect::<Result<Vec<_>, _>>()?;
            BlockSpec::Identity(dims)
        }
        None => BlockSpec::MinimalIdentity,
    };
    let w = divergence_witness(&spec, blocks, eps_values.as_deref())?;
    let table: Vec<Value> = w
        .blocks
        .iter()
        .zip(&w.partial_sums)
        .map(|(b, s)| {
            json!({
                "index": b.index,
                "eps": num(b.eps),
                "dim": b.dim,
                "hs": num(b.hs),
                "achieved": num(b.achieved),
                "partial_sum": num(*s),
                "xi_norm": num(b.xi_norm),
                "eta_norm": num(b.eta_norm),
            })
        })
        .collect();
    r.output("blocks", table)
        .output("partial_sums", nums(&w.partial_sums))
        .number("xi_norm_sq", w.xi_norm_sq)
        .number("eta_norm_sq", w.eta_norm_sq)
        .number("tail_bound", w.tail_bound);
    for (i, (b, s)) in w.blocks.iter().zip(&w.partial_sums).enumerate() {
        r.assert(Assertion::new(format!("block_{}_achieved_ge_1", i + 1), b.achieved, Relation::Ge, 1.0, g.tol))
            .assert(Assertion::new(
                format!("partial_sum_{}_ge_{}", i + 1, i + 1),
                *s,
                Relation::Ge,
                (i + 1) as f64,
                g.tol,
            ));
    }
    if eps_values.is_none() {
        r.assert(Assertion::new("xi_norm_sq_lt_1", w.xi_norm_sq, Relation::Lt, 1.0, 0.0));
    }
    Ok(r)
}

pub struct SpectralArgs<'a> {
    pub n: usize,
    pub times: usize,
    pub dt: f64,
    pub h: Option<&'a str>,
    pub t: Option<&'a str>,
    pub xi: Option<&'a str>,
    pub eta: Option<&'a str>,
}

pub fn spectral(g: Globals, a: &SpectralArgs) -> CmdResult {
    let mut r = start("spectral-demo", g);
    r.input("n", a.n).input("times", a.times).input("dt", num(a.dt));
    if a.n == 0 {
        return Err(CmdError::Invalid("--n must be positive".into()));
    }
    let mut rng = stream_rng(g.seed, 9);
    let h = match a.h {
        Some(s) => {
            r.input("h", s);
            matrix_arg(s, g.seed)?
        }
        None => random_hermitian(&mut rng, a.n),
    };
    let n = h.nrows();
    let mut pick_matrix = |spec: Option<&str>, key: &str, r: &mut Report| -> Result<OpMatrix, CmdError> {
        match spec {
            Some(s) => {
                r.input(key, s);
                Ok(matrix_arg(s, g.seed)?)
            }
            None => Ok(random_complex_matrix(&mut rng, n, n)),
        }
    };
    let t = pick_matrix(a.t, "t", &mut r)?;
    let mut rng = stream_rng(g.seed, 10);
    let mut pick_vector = |spec: Option<&str>, key: &str, r: &mut Report| -> Result<CVector, CmdError> {
        match spec {
            Some(s) => {
                r.input(key, s);
                Ok(vector_arg(s, g.seed)?)
            }
            None => Ok(random_complex_vector(&mut rng, n)),
        }
    };
    let xi = pick_vector(a.xi, "xi", &mut r)?;
    let eta = pick_vector(a.eta, "eta", &mut r)?;
    let times: Vec<f64> = (1..=a.times).map(|k| k as f64 * a.dt).collect();
    let rep = spectral_demo(&h, &t, &xi, &eta, &times)?;
    r.output("times", nums(&rep.times))
        .output("eigenvalues", nums(&rep.eigenvalues))
        .output("direct", complexes(&rep.direct))
        .output("product", complexes(&rep.product))
        .output("discrepancies", nums(&rep.discrepancies))
        .number("max_discrepancy", rep.max_discrepancy)
        .number("total_variation", rep.total_variation);
    r.assert(Assertion::new("max_discrepancy", rep.max_discrepancy, Relation::Le, DISCREPANCY_TOL, 0.0));
    Ok(r)
}

pub struct KhintchineArgs<'a> {
    pub coeffs: &'a str,
    pub p: &'a str,
    pub samples: usize,
    pub t: Option<&'a str>,
    pub x: Option<&'a str>,
}

pub fn khintchine(g: Globals, a: &KhintchineArgs) -> CmdResult {
    let mut r = start("khintchine", g);
    r.input("coeffs", a.coeffs).input("p", a.p).input("samples", a.samples);
    let coeffs = vector_arg(a.coeffs, g.seed)?;
    let sum = SignSum::new(coeffs.iter().cloned().collect())?;
    let ps = real_list(a.p)?;
    r.number("norm2", sum.norm2()).output("n", sum.len());
    let mut rows = Vec::new();
    for &p in &ps {
        if sum.len() <= EXACT_CAP {
            let (kind, check) = if p >= 2.0 {
                ("upper", check_upper_constant(&sum, p)?)
            } else {
                ("lower", check_lower_constant(&sum, p)?)
            };
            rows.push(json!({
                "p": num(p),
                "moment": num(check.moment),
                "constant": num(check.constant),
                "ratio": num(check.ratio),
                "kind": kind,
                "holds": check.holds,
                "method": "exact",
            }));
            if kind == "upper" {
                r.assert(Assertion::new(
                    format!("upper_p{p}"),
                    check.moment,
                    Relation::Le,
                    check.constant * check.norm2,
                    1e-12,
                ));
            } else {
                r.assert(Assertion::new(
                    format!("lower_p{p}"),
                    check.norm2,
                    Relation::Le,
                    check.constant * check.moment,
                    1e-12,
                ));
            }
            if let Some(ok) = check.l1_holds {
                r.assert(Assertion::holds("lower_l1_12_sqrt_pi", ok));
            }
            if p == 2.0 {
                r.assert(Assertion::new("moment_p2_eq_norm2", check.moment, Relation::Eq, check.norm2, 1e-12));
            }
        } else {
            let samples = if a.samples == 0 { 100_000 } else { a.samples };
            let mc = mc_moment(&sum, p, samples, g.seed)?;
            rows.push(json!({
                "p": num(p),
                "moment_p": num(mc.estimate),
                "moment_p_stderr": num(mc.stderr),
                "moment": num(mc.estimate.powf(1.0 / p)),
                "samples": samples,
                "method": "monte-carlo",
            }));
        }
        if a.samples > 0 && sum.len() <= EXACT_CAP {
            let mc = mc_moment(&sum, p, a.samples, g.seed)?;
            let exact = exact_moment(&sum, p)?.powf(p);
            r.assert(Assertion::new(format!("mc_p{p}_within_4_stderr"), mc.estimate, Relation::Eq, exact, 4.0 * mc.stderr));
        }
    }
    r.output("table", rows);
    if let Some(ts) = a.t {
        r.input("t", ts);
        let check = tail_bound_check(&sum, &real_list(ts)?)?;
        let pts: Vec<Value> = check
            .points
            .iter()
            .map(|p| json!({"t": num(p.t), "tail": num(p.tail), "bound": num(p.bound)}))
            .collect();
        r.output("tail", pts);
        r.assert(Assertion::holds("tail_bound", check.holds));
    }
    if let Some(xs) = a.x {
        r.input("x", xs);
        let check = elementary_inequality_check(&real_list(xs)?)?;
        r.number("elementary_min_log_margin", check.min_margin);
        r.assert(Assertion::holds("cosh_le_exp_half_square", check.holds));
    }
    Ok(r)
}

pub struct HalfavgArgs<'a> {
    pub vectors: Option<&'a str>,
    pub d: usize,
    pub n: usize,
    pub cd_samples: usize,
}

pub fn halfavg(g: Globals, a: &HalfavgArgs) -> CmdResult {
    let mut r = start("halfavg", g);
    let fam = match a.vectors {
        Some(spec) => {
            r.input("vectors", spec);
            let m = matrix_arg(spec, g.seed)?;
            real_entries(&m, "half-average vectors")?;
            VectorFamily::new(m.ncols(), (0..m.nrows()).map(|i| m.row(i).transpose().map(|z| z.re)).collect())?
        }
        None => {
            r.input("d", a.d).input("n", a.n);
            if a.d == 0 {
                return Err(CmdError::Invalid("--d must be positive".into()));
            }
            let m = random_real_matrix(&mut seeded_rng(g.seed), a.n, a.d);
            VectorFamily::new(a.d, (0..a.n).map(|i| m.row(i).transpose().map(|z| z.re)).collect())?
        }
    };
    let cfg = HalfAverageConfig {
        seed: g.seed,
        ..HalfAverageConfig::default()
    };
    let h = half_average_subset(&fam, &cfg)?;
    let direction: DVector<f64> = h.direction.clone();
    r.output("subset", h.subset.clone())
        .number("ratio", h.ratio)
        .number("constant", h.constant)
        .number("g_value", h.g_value)
        .number("subset_norm", h.subset_norm)
        .number("total_norm", h.total_norm)
        .output("direction", nums(direction.as_slice()))
        .output("exact", h.exact)
        .output("dropped", fam.dropped())
        .output("d", fam.dim());
    r.assert(Assertion::new("ratio_ge_cd", h.ratio, Relation::Ge, h.constant, cfg.slack))
        .assert(Assertion::new("subset_norm_ge_g", h.subset_norm, Relation::Ge, h.g_value, g.tol * (1.0 + h.g_value)));
    if a.cd_samples > 0 {
        r.input("cd_samples", a.cd_samples);
        let e = estimate_cd(fam.dim(), a.cd_samples, g.seed)?;
        r.number("cd_estimate", e.estimate).number("cd_stderr", e.stderr);
        r.assert(Assertion::new("cd_estimate_within_4_stderr", e.estimate, Relation::Eq, e.closed_form, 4.0 * e.stderr));
    }
    Ok(r)
}
