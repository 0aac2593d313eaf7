//! `realsft` — batch front end for the toolkit. Every subcommand reads
//! flags (plus an optional key=value config file and the REAL_SFT_SEED
//! environment variable), runs one computation, and writes one artifact:
//! a JSON envelope {command, seed, timestamp?, result} or, where it makes
//! sense, CSV. Exit codes: 0 success, 1 usage error, 2 domain error (with
//! a structured error record on stdout).

mod commands;
mod parse;

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "realsft", version, about = "Real structures on quadrics: involutions, lines, symmetric orbits, disk energies")]
struct Cli {
    /// Seed for randomized fixtures (overrides config file and REAL_SFT_SEED)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// key=value config file layered under the flags
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Write the artifact here instead of stdout
    #[arg(long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,
    /// Artifact format; csv is available for gw-count and find-orbit
    #[arg(long, global = true, value_parser = ["json", "csv"])]
    format: Option<String>,
    /// Omit the timestamp so identical runs are byte-identical
    #[arg(long, global = true)]
    no_timestamp: bool,
    /// Gate for accepting a matrix as an anti-involution
    #[arg(long, global = true, value_name = "TOL")]
    tol_classification: Option<f64>,
    /// Gate for orbit / conjugation residuals
    #[arg(long, global = true, value_name = "TOL")]
    tol_residual: Option<f64>,
    /// Gate for quadrature checks
    #[arg(long, global = true, value_name = "TOL")]
    tol_quadrature: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a 2x2 anti-involution and name its fixed-point set
    ClassifyInvolution {
        /// Row-major 2x2 complex matrix, entries as a+bi tokens
        #[arg(long)]
        matrix: String,
    },
    /// Report the fixed circle of a type I anti-involution on the sphere
    FixedCircle {
        #[arg(long)]
        matrix: String,
    },
    /// Conjugate a type I anti-involution to the standard conjugation
    Conjugator {
        #[arg(long)]
        matrix: String,
    },
    /// Test projective quadric membership
    QuadricContains {
        /// Homogeneous coordinates, comma-separated a+bi tokens
        #[arg(long)]
        point: String,
        /// Row-major symmetric complex matrix; standard form if omitted
        #[arg(long)]
        form: Option<String>,
    },
    /// Span a line on the quadric through two of its points
    MakeLine {
        #[arg(long)]
        p: String,
        #[arg(long)]
        q: String,
        #[arg(long)]
        form: Option<String>,
    },
    /// Count lines through a point meeting a cycle inside a hyperplane
    GwCount {
        /// Complex dimension of the quadric (at least 3)
        #[arg(long, default_value_t = 3)]
        quadric_dim: usize,
        /// Number of rotated configurations to sample
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
    /// Convert between oriented 2-planes and points of the standard quadric
    Grassmannian {
        /// Real span vector (with --y); unit length, orthogonal to --y
        #[arg(long)]
        x: Option<String>,
        #[arg(long)]
        y: Option<String>,
        /// Quadric point to decompose instead
        #[arg(long)]
        point: Option<String>,
    },
    /// Convert between affine quadric points and cotangent/symplectization data
    MapCotangent {
        /// Affine complex point (forward direction)
        #[arg(long)]
        point: Option<String>,
        /// Base point (backward direction, with --p)
        #[arg(long)]
        q: Option<String>,
        /// Covector (backward direction, with --q)
        #[arg(long)]
        p: Option<String>,
        /// Which affine model: the smooth quadric or the cone
        #[arg(long, default_value = "smooth", value_parser = ["smooth", "cone"])]
        variant: String,
    },
    /// Sample the chart maps and check they pull the forms back correctly
    PullbackCheck {
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Ambient real dimension of the base sphere
        #[arg(long, default_value_t = 4)]
        dim: usize,
    },
    /// Anti-average the canonical primitive under a linear anti-symplectic involution
    AntiAverageCheck {
        /// Row-major real matrix of even size squaring to the identity
        #[arg(long)]
        matrix: String,
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
    /// Push a line on the quadric through an ambient real structure
    InvoluteLine {
        #[arg(long)]
        p: String,
        #[arg(long)]
        q: String,
        /// Coordinate permutation, comma-separated indices
        #[arg(long)]
        perm: String,
        /// Signs (+1/-1) applied after the permutation
        #[arg(long)]
        signs: String,
        #[arg(long)]
        form: Option<String>,
    },
    /// Decide whether a line is fixed, pseudo-fixed, or moved by a real structure
    DetectPseudoFixed {
        #[arg(long)]
        p: String,
        #[arg(long)]
        q: String,
        #[arg(long)]
        perm: String,
        #[arg(long)]
        signs: String,
        #[arg(long)]
        form: Option<String>,
    },
    /// Reparametrize a type I pseudo-fixed line to a genuinely fixed one
    NormalizeFixed {
        #[arg(long)]
        p: String,
        #[arg(long)]
        q: String,
        #[arg(long)]
        perm: String,
        #[arg(long)]
        signs: String,
        #[arg(long)]
        form: Option<String>,
    },
    /// Count and locate the intersection of a line with a hyperplane section
    SigmaCount {
        #[arg(long)]
        p: String,
        #[arg(long)]
        q: String,
        /// Hyperplane coefficients, comma-separated a+bi tokens
        #[arg(long)]
        sigma: String,
        #[arg(long)]
        form: Option<String>,
    },
    /// Shoot for a symmetric periodic orbit of a builtin reversible system
    FindOrbit {
        #[arg(long)]
        system: String,
        /// Single chart parameter (sugar for --chart with one entry)
        #[arg(long)]
        seed_angle: Option<f64>,
        /// Chart parameters on the fixed locus, comma-separated reals
        #[arg(long)]
        chart: Option<String>,
        #[arg(long, default_value_t = 3.0)]
        t_half_guess: f64,
    },
    /// Re-integrate an orbit file and report its residuals
    VerifyOrbit {
        /// Orbit JSON (an envelope from find-orbit or its bare result)
        #[arg(long, value_name = "PATH")]
        input: PathBuf,
    },
    /// List the builtin reversible systems
    ListSystems,
    /// Lower-bound the SFT energy of a disk file over a nested profile family
    SftEnergy {
        /// Disk mesh record (JSON)
        #[arg(long, value_name = "PATH")]
        disk: PathBuf,
        #[arg(long, default_value_t = 8)]
        family_size: usize,
    },
    /// Compare the interior symplectic integral of a disk with its boundary circulation
    StokesCheck {
        #[arg(long, value_name = "PATH")]
        disk: PathBuf,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::ClassifyInvolution { .. } => "classify-involution",
            Command::FixedCircle { .. } => "fixed-circle",
            Command::Conjugator { .. } => "conjugator",
            Command::QuadricContains { .. } => "quadric-contains",
            Command::MakeLine { .. } => "make-line",
            Command::GwCount { .. } => "gw-count",
            Command::Grassmannian { .. } => "grassmannian",
            Command::MapCotangent { .. } => "map-cotangent",
            Command::PullbackCheck { .. } => "pullback-check",
            Command::AntiAverageCheck { .. } => "anti-average-check",
            Command::InvoluteLine { .. } => "involute-line",
            Command::DetectPseudoFixed { .. } => "detect-pseudo-fixed",
            Command::NormalizeFixed { .. } => "normalize-fixed",
            Command::SigmaCount { .. } => "sigma-count",
            Command::FindOrbit { .. } => "find-orbit",
            Command::VerifyOrbit { .. } => "verify-orbit",
            Command::ListSystems => "list-systems",
            Command::SftEnergy { .. } => "sft-energy",
            Command::StokesCheck { .. } => "stokes-check",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

/// Resolved run settings: flag > config file > REAL_SFT_SEED > default.
pub struct RunConfig {
    pub seed: u64,
    pub tol_classification: f64,
    pub tol_residual: f64,
    pub tol_quadrature: f64,
    pub format: Format,
    pub no_timestamp: bool,
}

pub enum Output {
    Json(Value),
    Csv(String),
}

/// A rejected computation: `name` is a stable machine-readable string.
pub struct CliError {
    pub name: String,
    pub message: String,
}

pub enum Failure {
    /// Malformed invocation — message to stderr, exit 1.
    Usage(String),
    /// Well-formed invocation the mathematics rejected — record, exit 2.
    Domain(CliError),
}

impl Failure {
    pub fn domain(name: &str, message: impl Into<String>) -> Failure {
        Failure::Domain(CliError {
            name: name.to_string(),
            message: message.into(),
        })
    }

    pub fn parse(message: impl Into<String>) -> Failure {
        Failure::domain("ParseError", message)
    }

    pub fn io(message: impl std::fmt::Display) -> Failure {
        Failure::domain("IoError", message.to_string())
    }
}

macro_rules! domain_error_from {
    ($($t:ty),* $(,)?) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Failure::Domain(CliError {
                    name: e.name().to_string(),
                    message: e.to_string(),
                })
            }
        }
    )*};
}

domain_error_from!(
    realsft_core::mobius::MobiusError,
    realsft_core::quadric::QuadricError,
    realsft_core::holcurve::HolError,
    realsft_core::cotangent::CotangentError,
    realsft_core::orbits::OrbitError,
    realsft_core::energy::EnergyError,
);

fn resolve_config(cli: &Cli) -> Result<RunConfig, String> {
    let file = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read config file {}: {e}", path.display()))?;
            parse::parse_config_file(&text)?
        }
        None => parse::FileConfig::default(),
    };
    let env_seed = match std::env::var("REAL_SFT_SEED") {
        Ok(v) => Some(v.trim().parse::<u64>().map_err(|_| {
            format!("REAL_SFT_SEED must be a 64-bit unsigned integer, got '{v}'")
        })?),
        Err(_) => None,
    };
    let format = match cli
        .format
        .as_deref()
        .or(file.format.as_deref())
        .unwrap_or("json")
    {
        "csv" => Format::Csv,
        _ => Format::Json,
    };
    let cfg = RunConfig {
        seed: cli.seed.or(file.seed).or(env_seed).unwrap_or(0),
        tol_classification: cli
            .tol_classification
            .or(file.tol_classification)
            .unwrap_or(1e-8),
        tol_residual: cli.tol_residual.or(file.tol_residual).unwrap_or(1e-6),
        tol_quadrature: cli.tol_quadrature.or(file.tol_quadrature).unwrap_or(1e-6),
        format,
        no_timestamp: cli.no_timestamp || file.no_timestamp.unwrap_or(false),
    };
    for (label, value) in [
        ("classification", cfg.tol_classification),
        ("residual", cfg.tol_residual),
        ("quadrature", cfg.tol_quadrature),
    ] {
        if !(value > 0.0 && value.is_finite()) {
            return Err(format!("tolerance {label} must be positive, got {value}"));
        }
    }
    Ok(cfg)
}

fn unix_now() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Write to stdout, treating a closed pipe (e.g. `| head`) as success.
fn print_stdout(text: &str) -> Result<(), Failure> {
    match std::io::stdout().write_all(text.as_bytes()) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        Err(e) => Err(Failure::io(format!("cannot write to stdout: {e}"))),
    }
}

fn write_artifact(path: Option<&PathBuf>, artifact: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, artifact)
            .map_err(|e| Failure::io(format!("cannot write {}: {e}", p.display()))),
        None => print_stdout(artifact),
    }
}

fn emit_domain_error(command: &str, seed: u64, err: &CliError) {
    let record = json!({
        "command": command,
        "seed": seed,
        "error": { "name": err.name, "message": err.message },
    });
    let mut text =
        serde_json::to_string_pretty(&record).expect("error record serializes");
    text.push('\n');
    let _ = print_stdout(&text);
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let ok = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            return ExitCode::from(if ok { 0 } else { 1 });
        }
    };
    let cfg = match resolve_config(&cli) {
        Ok(cfg) => cfg,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    };
    let name = cli.command.name();
    let code = match commands::run(&cli.command, &cfg) {
        Ok(Output::Json(result)) => {
            let mut envelope = json!({
                "command": name,
                "seed": cfg.seed,
                "result": result,
            });
            if !cfg.no_timestamp {
                envelope["timestamp"] = json!(unix_now());
            }
            let mut artifact =
                serde_json::to_string_pretty(&envelope).expect("envelope serializes");
            artifact.push('\n');
            match write_artifact(cli.output.as_ref(), &artifact) {
                Ok(()) => 0,
                Err(Failure::Domain(err)) => {
                    emit_domain_error(name, cfg.seed, &err);
                    2
                }
                Err(Failure::Usage(msg)) => {
                    eprintln!("error: {msg}");
                    1
                }
            }
        }
        Ok(Output::Csv(body)) => {
            let artifact = format!("# command: {name}\n# seed: {}\n{body}", cfg.seed);
            match write_artifact(cli.output.as_ref(), &artifact) {
                Ok(()) => 0,
                Err(Failure::Domain(err)) => {
                    emit_domain_error(name, cfg.seed, &err);
                    2
                }
                Err(Failure::Usage(msg)) => {
                    eprintln!("error: {msg}");
                    1
                }
            }
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(Failure::Domain(err)) => {
            emit_domain_error(name, cfg.seed, &err);
            2
        }
    };
    let _ = std::io::stdout().flush();
    ExitCode::from(code)
}
