//! `jointspec` command-line front end.
//!
//! Exit codes: 0 yes, 1 no, 2 inconclusive, 64 usage, 65 data, 70 numeric.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use jointspec::almost::{almost_common_eigenvector, commutant_bound};
use jointspec::decompose::{
    common_eigenspace_test, curve_decomposability_test, psi_residue, ContourSpec, DecomposeOptions,
};
use jointspec::gallery::{GeneratorKind, GeneratorSpec};
use jointspec::io::{matrix_from_value, poly_from_value, poly_to_value, to_canonical_json, write_matrix, write_poly};
use jointspec::pencil::{curve_samples, pencil_polynomial};
use jointspec::poly::line_containment;
use jointspec::plot::{zero_set_svg, PlotBox};
use jointspec::{BiPoly, Error, Hermitian, Line, PolyDisk};

const EX_USAGE: u8 = 64;
const EX_DATAERR: u8 = 65;
const EX_SOFTWARE: u8 = 70;

#[derive(Parser, Debug)]
#[command(name = "jointspec", version, about = "Joint spectra of Hermitian matrix pairs")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Relative coefficient tolerance of line containment.
    #[arg(long, global = true, default_value_t = 1e-7)]
    tol_contain: f64,
    /// Relative invariance residual accepted for a yes verdict.
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol_resid: f64,
    /// Trapezoid nodes on residue contours.
    #[arg(long, global = true, default_value_t = 256)]
    contour_nodes: usize,
    /// Sampling resolution of curves and Hausdorff distances.
    #[arg(long, global = true, default_value_t = 64)]
    resolution: usize,
    /// Seed of the gallery generators.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Pencil determinant det(x A + y B - I) as polynomial JSON.
    Pencil {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// CSV samples of the joint spectrum in a polydisk.
    Spectrum {
        a: PathBuf,
        b: PathBuf,
        /// Center and radius: cx cy r.
        #[arg(long, num_args = 3, value_names = ["CX", "CY", "R"], allow_negative_numbers = true, required = true)]
        disk: Vec<f64>,
        /// Fibers per direction; overrides --resolution.
        #[arg(long)]
        res: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Multiplicity of the line {alpha x + beta y = 1} in a polynomial.
    /// Exits 0 when contained, 1 otherwise.
    LineCheck {
        p: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long, allow_negative_numbers = true)]
        beta: f64,
    },
    /// Common invariant subspace test; exits with the verdict.
    Decompose {
        a: PathBuf,
        b: PathBuf,
        /// Subspace dimension of the curve test (with --gamma).
        #[arg(long, requires = "gamma", conflicts_with_all = ["lam", "a_value"])]
        k: Option<usize>,
        /// Polynomial JSON of the candidate component.
        #[arg(long, requires = "k")]
        gamma: Option<PathBuf>,
        /// Eigenvalue of A for the eigenspace test (with --a).
        #[arg(long, allow_negative_numbers = true, requires = "a_value")]
        lam: Option<f64>,
        /// Eigenvalue of B on that eigenspace.
        #[arg(long = "a", id = "a_value", allow_negative_numbers = true, requires = "lam")]
        a_value: Option<f64>,
        /// Radius of the Hausdorff diagnostic around (1/lam, 0).
        #[arg(long, default_value_t = 0.2)]
        rho: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Table of residue norms for m = 1..m-max at the eigenvalue lam of A.
    Residues {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        lam: f64,
        /// Eigenvalue of B for the line R = lam x + a y - 1.
        #[arg(long = "a", id = "a_value", allow_negative_numbers = true, conflicts_with = "gamma")]
        a_value: Option<f64>,
        /// Polynomial JSON of R instead of a line.
        #[arg(long)]
        gamma: Option<PathBuf>,
        #[arg(long, default_value_t = 4)]
        m_max: usize,
    },
    /// Almost common eigenvector certificate.
    Almost {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long, allow_negative_numbers = true)]
        beta: f64,
        #[arg(long, default_value_t = 0.2)]
        rho: f64,
        /// Allowed gap between ||B|| and |beta|.
        #[arg(long)]
        slack: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Commutator norm bound from distances to a line family.
    Commutant {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 0.2)]
        rho: f64,
        /// Write the full report as JSON here; stdout gets a table.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a generated pair and its ground truth as JSON files.
    Gallery {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
        /// Files are named <stem>_A.json, <stem>_B.json, <stem>_basis.json, <stem>_gamma.json.
        #[arg(long, default_value = "pair")]
        stem: String,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// SVG of the real zero set of a polynomial.
    Plot {
        p: PathBuf,
        #[arg(long = "box", num_args = 4, value_names = ["X0", "X1", "Y0", "Y1"], allow_negative_numbers = true, required = true)]
        bounds: Vec<f64>,
        #[arg(long, default_value_t = 400)]
        grid: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    IntroExample,
    CirclePair,
    Decomposable,
    Perturbed,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    msg: String,
}

type Outcome = Result<u8, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure { code: EX_USAGE, msg: msg.into() }
}

fn lib_error(context: &str, e: Error) -> Failure {
    let code = match e {
        Error::Invalid(_) | Error::Precondition(_) => EX_DATAERR,
        Error::Numerical(_) => EX_SOFTWARE,
    };
    Failure { code, msg: format!("{context}: {e}") }
}

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: cannot read: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{}: malformed JSON: {e}", path.display())))
}

fn read_hermitian(path: &Path) -> Result<Hermitian<f64>, Failure> {
    let ctx = path.display().to_string();
    let file = matrix_from_value(&read_json(path)?).map_err(|e| lib_error(&ctx, e))?;
    Hermitian::new(file.matrix).map_err(|e| lib_error(&ctx, e))
}

fn read_poly(path: &Path) -> Result<BiPoly<f64>, Failure> {
    poly_from_value(&read_json(path)?).map_err(|e| lib_error(&path.display().to_string(), e))
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure { code: EX_SOFTWARE, msg: format!("{}: {e}", p.display()) }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| Failure { code: EX_SOFTWARE, msg: format!("stdout: {e}") })
        }
    }
}

fn canonical<S: serde::Serialize>(v: &S) -> Result<String, Failure> {
    to_canonical_json(v).map_err(|e| lib_error("output", e))
}

fn run(cli: Cli) -> Outcome {
    let g = &cli.global;
    match cli.command {
        Command::Pencil { a, b, out } => {
            let (a, b) = (read_hermitian(&a)?, read_hermitian(&b)?);
            let p = pencil_polynomial(&a, &b).map_err(|e| lib_error("pencil", e))?;
            emit(&write_poly(&p).map_err(|e| lib_error("output", e))?, out.as_deref())?;
            Ok(0)
        }
        Command::Spectrum { a, b, disk, res, out } => {
            let (a, b) = (read_hermitian(&a)?, read_hermitian(&b)?);
            let d = PolyDisk::new(disk[0], disk[1], disk[2]).map_err(|e| lib_error("--disk", e))?;
            let p = pencil_polynomial(&a, &b).map_err(|e| lib_error("pencil", e))?;
            let pts = curve_samples(&p, &d, res.unwrap_or(g.resolution)).map_err(|e| lib_error("spectrum", e))?;
            let mut w = csv::Writer::from_writer(Vec::new());
            let io_err = |e: csv::Error| Failure { code: EX_SOFTWARE, msg: format!("csv: {e}") };
            w.write_record(["re_x", "im_x", "re_y", "im_y", "abs_P"]).map_err(io_err)?;
            for cp in pts {
                let row = [cp.x.re, cp.x.im, cp.y.re, cp.y.im, cp.abs_p].map(|v| format!("{v:.16e}"));
                w.write_record(&row).map_err(io_err)?;
            }
            let bytes = w.into_inner().map_err(|e| Failure { code: EX_SOFTWARE, msg: format!("csv: {e}") })?;
            emit(&String::from_utf8(bytes).expect("CSV is UTF-8"), out.as_deref())?;
            Ok(0)
        }
        Command::LineCheck { p, alpha, beta } => {
            let poly = read_poly(&p)?;
            let line = Line::new(alpha, beta).map_err(|e| lib_error("line", e))?;
            let m = line_containment(&poly, &line, g.tol_contain).map_err(|e| lib_error("line-check", e))?;
            emit(&canonical(&json!({"alpha": alpha, "beta": beta, "multiplicity": m}))?, None)?;
            Ok(if m >= 1 { 0 } else { 1 })
        }
        Command::Decompose { a, b, k, gamma, lam, a_value, rho, out } => {
            let (a, b) = (read_hermitian(&a)?, read_hermitian(&b)?);
            let opts = DecomposeOptions {
                tol_contain: g.tol_contain,
                tol_resid: g.tol_resid,
                resolution: g.resolution,
                ..DecomposeOptions::default()
            };
            let report = match (k, gamma, lam, a_value) {
                (Some(k), Some(gp), _, _) => {
                    let gamma = read_poly(&gp)?;
                    curve_decomposability_test(&a, &b, k, &gamma, &opts)
                }
                (_, _, Some(lam), Some(av)) => common_eigenspace_test(&a, &b, lam, av, rho, &opts),
                _ => return Err(usage("decompose needs either --k with --gamma, or --lam with --a")),
            }
            .map_err(|e| lib_error("decompose", e))?;
            emit(&canonical(&report)?, out.as_deref())?;
            Ok(report.verdict.exit_code() as u8)
        }
        Command::Residues { a, b, lam, a_value, gamma, m_max } => {
            let (a, b) = (read_hermitian(&a)?, read_hermitian(&b)?);
            let r = match (a_value, gamma) {
                (Some(av), None) => BiPoly::from_terms(&[(1, 0, lam), (0, 1, av), (0, 0, -1.0)]),
                (None, Some(gp)) => read_poly(&gp)?,
                _ => return Err(usage("residues needs exactly one of --a or --gamma")),
            };
            if m_max == 0 {
                return Err(usage("--m-max must be at least 1"));
            }
            let contour = ContourSpec::around(&a, lam, g.contour_nodes).map_err(|e| lib_error("contour", e))?;
            // the residue conditions assume a nonsingular, non-tangent point (1/lam, 0)
            let p = pencil_polynomial(&a, &b).map_err(|e| lib_error("pencil", e))?;
            let fx = p.dx().eval_real(1.0 / lam, 0.0).abs();
            if fx <= 1e-8 * p.coef_norm() * (1.0 + 1.0 / lam.abs()).powi(p.degree() as i32) {
                eprintln!("jointspec: warning: dP/dx vanishes at (1/lam, 0) = ({}, 0); residues may not be meaningful", 1.0 / lam);
            }
            let mut table = String::from("m\tresidue_norm\n");
            for m in 1..=m_max {
                let v = psi_residue(&a, &b, &r, m, lam, &contour).map_err(|e| lib_error(&format!("residue m={m}"), e))?;
                table.push_str(&format!("{m}\t{v:.6e}\n"));
            }
            emit(&table, None)?;
            Ok(0)
        }
        Command::Almost { a, b, alpha, beta, rho, slack, out } => {
            let (a, b) = (read_hermitian(&a)?, read_hermitian(&b)?);
            let r = almost_common_eigenvector(&a, &b, alpha, beta, rho, g.resolution, slack)
                .map_err(|e| lib_error("almost", e))?;
            emit(&canonical(&r)?, out.as_deref())?;
            Ok(0)
        }
        Command::Commutant { a, b, rho, out } => {
            let (a, b) = (read_hermitian(&a)?, read_hermitian(&b)?);
            let r = commutant_bound(&a, &b, rho, g.resolution).map_err(|e| lib_error("commutant", e))?;
            let mut table = String::from("level\tdim\trho\tepsilon\tC\tterm\tcommutator\tinequality\n");
            for (i, l) in r.per_level.iter().enumerate() {
                table.push_str(&format!(
                    "{i}\t{}\t{:.3e}\t{:.3e}\t{:.3e}\t{:.3e}\t{:.3e}\t{}\n",
                    l.dimension, l.rho, l.epsilon, l.c, l.term, l.commutator, l.inequality_ok
                ));
            }
            match r.bound {
                Some(bd) => table.push_str(&format!("bound {bd:.6e}\nactual {:.6e}\n", r.actual)),
                None => table.push_str(&format!("bound diverged\nactual {:.6e}\n", r.actual)),
            }
            emit(&table, None)?;
            if let Some(p) = out {
                emit(&canonical(&r)?, Some(&p))?;
            }
            Ok(0)
        }
        Command::Gallery { kind, n, k, eps, stem, out_dir } => {
            let kind = match kind {
                Kind::IntroExample => GeneratorKind::IntroExample,
                Kind::CirclePair => GeneratorKind::CirclePair,
                Kind::Decomposable => GeneratorKind::Decomposable,
                Kind::Perturbed => GeneratorKind::Perturbed,
            };
            let spec = GeneratorSpec { kind, n, k, seed: g.seed, eps };
            let entry = spec.generate::<f64>().map_err(|e| lib_error("gallery", e))?;
            fs::create_dir_all(&out_dir)
                .map_err(|e| Failure { code: EX_SOFTWARE, msg: format!("{}: {e}", out_dir.display()) })?;
            let mut written = Vec::new();
            let mut save = |suffix: &str, text: String| -> Result<(), Failure> {
                let path = out_dir.join(format!("{stem}_{suffix}.json"));
                emit(&text, Some(&path))?;
                written.push(path.display().to_string());
                Ok(())
            };
            let out_err = |e| lib_error("output", e);
            save("A", write_matrix(entry.a.matrix(), None).map_err(out_err)?)?;
            save("B", write_matrix(entry.b.matrix(), None).map_err(out_err)?)?;
            if let Some(basis) = &entry.basis {
                save("basis", canonical(basis)?)?;
            }
            if let Some(gamma) = &entry.gamma {
                save("gamma", canonical(&poly_to_value(gamma))?)?;
            }
            emit(&canonical(&json!({"spec": spec, "files": written}))?, None)?;
            Ok(0)
        }
        Command::Plot { p, bounds, grid, out } => {
            let poly = read_poly(&p)?;
            let bx = PlotBox::new(bounds[0], bounds[1], bounds[2], bounds[3]).map_err(|e| lib_error("--box", e))?;
            let svg = zero_set_svg(&poly, &bx, grid).map_err(|e| lib_error("plot", e))?;
            emit(&svg, Some(&out))?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EX_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("jointspec: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
