//! `lgc`: analyze, reconstruct, verify and generate curves of Lagrangian
//! planes stored as JSON jet files.
//!
//! Exit codes: 0 success, 1 input error, 2 analyzability failure (or a
//! failed verification suite).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use lagrangian_curves::diagram::YoungDiagram;
use lagrangian_curves::flag::analyze_flag;
use lagrangian_curves::generators::{flat_curve, linear_hamiltonian_jacobi, random_curve};
use lagrangian_curves::io::{to_json, AnalysisFile, CurveFile, SpecFile};
use lagrangian_curves::normal_frame::{normal_frame_with, required_order, verify_normal, NormalizeOptions};
use lagrangian_curves::quiver::extract_quiver;
use lagrangian_curves::reconstruction::reconstruct;
use lagrangian_curves::subspace::Tol;
use lagrangian_curves::verify::{run_suite, Suite};
use lagrangian_curves::Error;
use nalgebra::DMatrix;

#[derive(Parser)]
#[command(name = "lgc", version, about = "Symplectic invariants of curves in Lagrange Grassmannians")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Flag, normal frame, curvature and quiver of a curve file.
    Analyze {
        input: PathBuf,
        /// Truncate the input jet to this order first.
        #[arg(long)]
        order: Option<usize>,
        /// Tolerance for the normal-form checks.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Curve file from a curvature spec file.
    Reconstruct {
        spec: PathBuf,
        /// Jet order of the output (default: the order needed to analyze it).
        #[arg(long)]
        order: Option<usize>,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        center: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run a self-check suite on a curve file.
    Verify {
        input: PathBuf,
        #[arg(long)]
        suite: Suite,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Pass threshold (default: 1e-8 for duality, 1e-6 otherwise).
        #[arg(long)]
        tol: Option<f64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write a test curve file.
    Generate {
        #[arg(long, value_enum, default_value_t = Kind::Flat)]
        kind: Kind,
        /// Young diagram rows, e.g. `2,1`.
        #[arg(long, value_delimiter = ',')]
        rows: Vec<usize>,
        /// Inertia per level for `random`, e.g. `1:0,0:1` (default: all positive).
        #[arg(long, value_delimiter = ',')]
        inertia: Vec<String>,
        /// JSON file with the symmetric matrix `H` (list of rows) for `jacobi`.
        #[arg(long)]
        hamiltonian: Option<PathBuf>,
        #[arg(long)]
        order: Option<usize>,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        center: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.3)]
        amplitude: f64,
        /// Also write the prescribed curvature of a `random` curve here.
        #[arg(long)]
        spec_out: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    /// Zero curvature.
    Flat,
    /// Random curvature moved by a random symplectic map.
    Random,
    /// Jacobi curve of `x' = ΩHx`.
    Jacobi,
}

/// Error with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_analyzability() { 2 } else { 1 },
            message: e.to_string(),
        }
    }
}

fn input_error(message: String) -> Failure {
    Failure { code: 1, message }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn write_out(output: Option<&Path>, text: &str) -> Result<(), Failure> {
    match output {
        Some(p) => fs::write(p, text).map_err(|e| input_error(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_curve(path: &Path, order: Option<usize>) -> Result<lagrangian_curves::flag::CurveJet, Failure> {
    let file: CurveFile = read_json(path)?;
    let curve = file.to_curve(Tol::default())?;
    Ok(match order {
        Some(n) => curve.truncate(n.min(curve.order())),
        None => curve,
    })
}

fn parse_inertia(items: &[String], d: &YoungDiagram) -> Result<Vec<(usize, usize)>, Failure> {
    let levels = d.reduce().levels;
    if items.is_empty() {
        return Ok(levels.iter().map(|l| (l.r, 0)).collect());
    }
    let parsed = items
        .iter()
        .map(|s| {
            let (p, m) = s.split_once(':').ok_or_else(|| input_error(format!("inertia {s:?} is not plus:minus")))?;
            let num = |x: &str| x.trim().parse::<usize>().map_err(|e| input_error(format!("inertia {s:?}: {e}")));
            Ok((num(p)?, num(m)?))
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    if parsed.len() != levels.len() || parsed.iter().zip(&levels).any(|(&(p, m), l)| p + m != l.r) {
        return Err(input_error(format!(
            "inertia must give plus:minus summing to the level sizes {:?}",
            levels.iter().map(|l| l.r).collect::<Vec<_>>()
        )));
    }
    Ok(parsed)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Analyze { input, order, tol, output } => {
            let curve = read_curve(&input, order)?;
            let opts = NormalizeOptions::default();
            let report = analyze_flag(&curve, opts.tol).map_err(|e| e.at("flag"))?;
            let res = normal_frame_with(&curve, opts)?;
            let check = verify_normal(&res, &curve, tol)?;
            let quiver = extract_quiver(&res, tol).map_err(|e| e.at("quiver"))?;
            write_out(output.as_deref(), &to_json(&AnalysisFile::new(&report, &res, &quiver, &check))?)
        }
        Command::Reconstruct { spec, order, center, output } => {
            let file: SpecFile = read_json(&spec)?;
            let order = match order {
                Some(n) => n,
                None => required_order(&file.spec.reduced())?,
            };
            let (curve, _) = reconstruct(&file.spec, center, order)?;
            write_out(output.as_deref(), &to_json(&CurveFile::from_curve(&curve))?)
        }
        Command::Verify { input, suite, seed, tol, output } => {
            let curve = read_curve(&input, None)?;
            let tol = tol.unwrap_or(suite.default_tol());
            let report = run_suite(suite, &curve, NormalizeOptions::default(), seed, tol)?;
            write_out(output.as_deref(), &to_json(&report)?)?;
            if report.passed {
                Ok(())
            } else {
                let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
                Err(Failure {
                    code: 2,
                    message: format!("suite failed: {}", failed.join(", ")),
                })
            }
        }
        Command::Generate {
            kind,
            rows,
            inertia,
            hamiltonian,
            order,
            center,
            seed,
            amplitude,
            spec_out,
            output,
        } => {
            let curve = match kind {
                Kind::Jacobi => {
                    let path = hamiltonian.ok_or_else(|| input_error("--hamiltonian is required for jacobi".into()))?;
                    let h: Vec<Vec<f64>> = read_json(&path)?;
                    let m = h.len();
                    if h.iter().any(|r| r.len() != m) {
                        return Err(input_error("hamiltonian must be a square list of rows".into()));
                    }
                    let h = DMatrix::from_fn(m, m, |i, j| h[i][j]);
                    linear_hamiltonian_jacobi(&h, center, order.unwrap_or(12))?
                }
                Kind::Flat | Kind::Random => {
                    let d = YoungDiagram::new(rows)?;
                    let order = match order {
                        Some(n) => n,
                        None => required_order(&d.reduce())?,
                    };
                    if matches!(kind, Kind::Flat) {
                        flat_curve(&d, center, order)?
                    } else {
                        let inertia = parse_inertia(&inertia, &d)?;
                        let g = random_curve(&d, &inertia, seed, amplitude, center, order)?;
                        if let Some(p) = spec_out {
                            write_out(Some(&p), &to_json(&SpecFile::new(g.spec))?)?;
                        }
                        g.curve
                    }
                }
            };
            write_out(output.as_deref(), &to_json(&CurveFile::from_curve(&curve))?)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Usage errors are input errors; help and version are not errors.
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("lgc: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
