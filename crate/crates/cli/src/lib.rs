//! Command-line front end for `tpmeasure`.
//!
//! [`run`] parses arguments, executes one subcommand and renders its report.
//! Exit codes: 0 success, 2 usage error, 3 bad input, 4 failed assertion.

pub mod acceptance;
pub mod commands;
pub mod input;
pub mod report;

use clap::{Parser, Subcommand, ValueEnum};
use commands::{CmdError, Globals};
use report::Report;
use std::io::Write;
use std::path::{Path, PathBuf};
use tpmeasure::hs_extension::Variant;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_ASSERTION: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Dft,
    Hadamard,
}

#[derive(Debug, Parser)]
#[command(name = "tpm", version, about = "Vector measures, cross norms and Hilbert-Schmidt constructions at finite scale")]
pub struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Report format; CSV lists the outputs only.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Tolerance for the report's assertions.
    #[arg(long, global = true, default_value_t = 1e-8, value_parser = parse_tol, allow_hyphen_values = true)]
    pub tol: f64,
    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Semi-variation bounds of a vector measure.
    Semivar {
        /// Matrix whose columns are the atom vectors; random if omitted.
        #[arg(long)]
        measure: Option<String>,
        /// Treat the measure as real (real functionals only).
        #[arg(long)]
        real: bool,
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long, default_value_t = 8)]
        atoms: usize,
        /// Comma-separated atom indices; all atoms if omitted.
        #[arg(long)]
        set: Option<String>,
    },
    /// Ratio of variation to the largest subset value of a complex measure.
    PiRatio {
        /// Atom values of the measure.
        #[arg(long)]
        values: Option<String>,
        /// Use the m unit phases e^{2πik/m} (default 64).
        #[arg(long)]
        phases: Option<usize>,
    },
    /// Injective, projective, Hilbert-Schmidt and Jacobs norms of a tensor.
    Crossnorm {
        #[arg(long, default_value = "rand:3")]
        matrix: String,
        /// Representation-search steps per length.
        #[arg(long, default_value_t = 40)]
        steps: usize,
    },
    /// Lower bounds for p-summing norms over a grid of exponents.
    Psumming {
        #[arg(long, default_value = "rand:3")]
        matrix: String,
        #[arg(long, default_value = "1,1.5,2,3,4")]
        p: String,
        #[arg(long, default_value_t = 16)]
        gaussian_families: usize,
    },
    /// Orthogonal measures with total variation equal to the Hilbert-Schmidt norm.
    HsConstruct {
        #[arg(long, default_value = "diag:3,4")]
        matrix: String,
        #[arg(long, value_enum, default_value_t = VariantArg::Dft)]
        variant: VariantArg,
        /// Accept any operator through its polar decomposition.
        #[arg(long)]
        polar: bool,
    },
    /// Partial sums of the divergence witness for identity blocks.
    HsDiverge {
        #[arg(long, default_value_t = 5)]
        blocks: usize,
        /// Comma-separated ε_n; defaults to 2^{-(n+1)/2}.
        #[arg(long)]
        eps: Option<String>,
        /// Comma-separated identity block dimensions; minimal if omitted.
        #[arg(long)]
        dims: Option<String>,
    },
    /// Direct evolution against the spectral product-measure sum.
    SpectralDemo {
        #[arg(long, default_value_t = 5)]
        n: usize,
        /// Number of time points t = dt, 2dt, ….
        #[arg(long, default_value_t = 20)]
        times: usize,
        #[arg(long, default_value_t = 0.5)]
        dt: f64,
        #[arg(long)]
        h: Option<String>,
        #[arg(long)]
        t: Option<String>,
        #[arg(long)]
        xi: Option<String>,
        #[arg(long)]
        eta: Option<String>,
    },
    /// Khintchine moments and constants over a grid of p.
    Khintchine {
        #[arg(long, default_value = "1,1,1,1")]
        coeffs: String,
        #[arg(long, default_value = "1,1.5,2,3,4")]
        p: String,
        /// Monte Carlo samples (cross-check, or estimate beyond 24 terms).
        #[arg(long, default_value_t = 0)]
        samples: usize,
        /// Thresholds for the tail bound (real coefficients only).
        #[arg(long)]
        t: Option<String>,
        /// Grid for cosh x ≤ e^{x²/2}.
        #[arg(long)]
        x: Option<String>,
    },
    /// Half-average subset of a family of real vectors.
    Halfavg {
        /// Matrix whose rows are the vectors; random if omitted.
        #[arg(long)]
        vectors: Option<String>,
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[arg(long, default_value_t = 20)]
        n: usize,
        /// Monte Carlo samples for estimating C_d (0 to skip).
        #[arg(long, default_value_t = 0)]
        cd_samples: usize,
    },
    /// The acceptance suite.
    Accept,
}

/// Result of one invocation.
#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub report: Option<Report>,
    /// Text for stdout (empty when the report went to `--out`).
    pub stdout: String,
    /// Text for stderr.
    pub stderr: String,
}

impl Outcome {
    fn error(code: i32, message: String) -> Self {
        Self {
            code,
            report: None,
            stdout: String::new(),
            stderr: message,
        }
    }
}

fn parse_tol(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(t) if t.is_finite() && t >= 0.0 => Ok(t),
        _ => Err(format!("expected a nonnegative number, got `{s}`")),
    }
}

pub fn execute(cli: &Cli) -> Result<Report, CmdError> {
    let g = Globals {
        seed: cli.seed,
        tol: cli.tol,
    };
    match &cli.command {
        Command::Semivar {
            measure,
            real,
            dim,
            atoms,
            set,
        } => commands::semivar(
            g,
            &commands::SemivarArgs {
                measure: measure.as_deref(),
                real: *real,
                dim: *dim,
                atoms: *atoms,
                set: set.as_deref(),
            },
        ),
        Command::PiRatio { values, phases } => commands::pi_ratio_cmd(g, values.as_deref(), *phases),
        Command::Crossnorm { matrix, steps } => commands::crossnorm(g, matrix, *steps),
        Command::Psumming {
            matrix,
            p,
            gaussian_families,
        } => commands::psumming(g, matrix, p, *gaussian_families),
        Command::HsConstruct { matrix, variant, polar } => {
            let v = match variant {
                VariantArg::Dft => Variant::ComplexDft,
                VariantArg::Hadamard => Variant::RealHadamard,
            };
            commands::hs_construct(g, matrix, v, *polar)
        }
        Command::HsDiverge { blocks, eps, dims } => commands::hs_diverge(g, *blocks, eps.as_deref(), dims.as_deref()),
        Command::SpectralDemo {
            n,
            times,
            dt,
            h,
            t,
            xi,
            eta,
        } => commands::spectral(
            g,
            &commands::SpectralArgs {
                n: *n,
                times: *times,
                dt: *dt,
                h: h.as_deref(),
                t: t.as_deref(),
                xi: xi.as_deref(),
                eta: eta.as_deref(),
            },
        ),
        Command::Khintchine { coeffs, p, samples, t, x } => commands::khintchine(
            g,
            &commands::KhintchineArgs {
                coeffs,
                p,
                samples: *samples,
                t: t.as_deref(),
                x: x.as_deref(),
            },
        ),
        Command::Halfavg {
            vectors,
            d,
            n,
            cd_samples,
        } => commands::halfavg(
            g,
            &commands::HalfavgArgs {
                vectors: vectors.as_deref(),
                d: *d,
                n: *n,
                cd_samples: *cd_samples,
            },
        ),
        Command::Accept => acceptance::accept(g),
    }
}

/// Writes via a temporary file in the target directory and a rename, so
/// readers never see a partial report.
fn write_atomically(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file().set_permissions(std::fs::Permissions::from_mode(0o644))?;
    }
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Parses `argv` (including the program name) and runs the subcommand.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Outcome {
                    code,
                    report: None,
                    stdout: text,
                    stderr: String::new(),
                }
            } else {
                Outcome::error(code, text)
            };
        }
    };
    let report = match execute(&cli) {
        Ok(r) => r,
        Err(e) => return Outcome::error(EXIT_INPUT, format!("error: {e}\n")),
    };
    let rendered = match cli.format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    };
    let code = if report.passed { EXIT_OK } else { EXIT_ASSERTION };
    let mut stderr = String::new();
    if !report.passed {
        for a in report.assertions.iter().filter(|a| !a.passed) {
            stderr.push_str(&format!("assertion failed: {} ({} {:?} {}, tol {})\n", a.name, a.lhs, a.relation, a.rhs, a.tol));
        }
    }
    let stdout = match &cli.out {
        Some(path) => {
            if let Err(e) = write_atomically(path, &rendered) {
                return Outcome::error(EXIT_INPUT, format!("error: cannot write {}: {e}\n", path.display()));
            }
            String::new()
        }
        None => rendered,
    };
    Outcome {
        code,
        report: Some(report),
        stdout,
        stderr,
    }
}
