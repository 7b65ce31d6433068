//! Command-line front end: file-based wrappers around the library kernels,
//! plus the experiment harnesses (lambda convergence sweeps and kernel
//! benchmarks). Exit codes: 0 success, 1 numeric failure, 2 usage error.
//! Orchestration here is single-threaded; kernels parallelize internally,
//! capped by WPC_THREADS.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use wpc::analytic::{alpha_map, analytic_norm, boundary_trace, pre_schwarzian, AnalyticNormKind};
use wpc::beltrami::{
    beurling_ahlfors_extension, carleson_norm, mp_norm, vanishing_profile, BeltramiField,
    HalfPlaneGrid,
};
use wpc::curve::{
    arc_length_defect, chord_arc_constant, curve_from_log_derivative, j_inverse, j_map,
    normalize_log_derivative, q_transform, PlaneCurve,
};
use num_complex::Complex64;
use wpc::family::{
    random_field_profile, random_profile, sample_profile_circle, seeded_profiles, Bump,
};
use wpc::grid::SampledFunction;
use wpc::io;
use wpc::spaces::{
    a_infty_constant, besov_seminorm, bmo_norm, conjugate_circle, hilbert_line, vmo_defect,
};
use wpc::welding::{eval_lambda, eval_lambda_inverse, weld_decompose_with};
use wpc::{CircleGrid, Grid, LineGrid, Result, WpcError};

fn input_path(s: &str) -> std::result::Result<PathBuf, String> {
    let p = PathBuf::from(s);
    if p.is_file() {
        Ok(p)
    } else {
        Err(format!("input path {s} is not a readable file"))
    }
}

#[derive(Parser)]
#[command(name = "wpc", version, about = "Curves, seminorms, weldings and dilatation fields")]
struct Cli {
    /// Report errors as JSON on stderr.
    #[arg(long, global = true)]
    json_errors: bool,

    /// Exit 1 when an iteration fails to converge instead of just flagging it.
    #[arg(long, global = true)]
    strict: bool,

    /// Seed for randomized inputs; recorded in every table that uses it.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormKind {
    Besov,
    Bmo,
    Vmo,
    Ainfty,
}

#[derive(Clone, Copy, ValueEnum)]
enum AnormKind {
    Besov,
    Bloch,
    Ap,
    Ainf,
}

#[derive(Clone, Copy, ValueEnum)]
enum DiagKind {
    Arclen,
    Chordarc,
}

#[derive(Clone, Copy, ValueEnum)]
enum Direction {
    Forward,
    Inverse,
}

#[derive(Clone, Copy, ValueEnum)]
enum BeltramiKind {
    Mpnorm,
    Carleson,
    Profile,
}

#[derive(Clone, Copy, ValueEnum)]
enum BenchKernel {
    Besov,
    Bmo,
    Hilbert,
    Conjugate,
    Lambda,
    Mp,
    Carleson,
}

#[derive(Subcommand)]
enum Cmd {
    /// Norm report for sampled boundary data (JSON on stdout).
    Norm {
        #[arg(long, value_enum)]
        kind: NormKind,
        /// Integrability exponent; required for --kind besov.
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, value_parser = input_path)]
        input: PathBuf,
        /// Interval-length cutoff; required for --kind vmo.
        #[arg(long)]
        scale: Option<f64>,
        /// Positivity floor for --kind ainfty weights.
        #[arg(long, default_value_t = 1e-12)]
        floor: f64,
    },
    /// Conjugate function: Hilbert transform on the line, conjugate series on the circle.
    Hilbert {
        #[arg(long, value_parser = input_path)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reconstruct the plane curve from log-derivative samples and emit plot CSV.
    Curve {
        #[arg(long = "from-w", value_parser = input_path)]
        from_w: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Change of parameter: push w through the homeomorphism generated by u.
    Reparam {
        #[arg(long, value_parser = input_path)]
        u: PathBuf,
        #[arg(long, value_parser = input_path)]
        w: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Combine real u and v into the normalized log-derivative of the composed curve.
    Jmap {
        #[arg(long, value_parser = input_path)]
        u: PathBuf,
        #[arg(long, value_parser = input_path)]
        v: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Split a log-derivative into its real part u and conjugated imaginary part v.
    Jinv {
        #[arg(long, value_parser = input_path)]
        w: PathBuf,
        #[arg(long)]
        out_u: Option<PathBuf>,
        #[arg(long)]
        out_v: Option<PathBuf>,
    },
    /// Curve diagnostics from plot CSV.
    Diag {
        #[arg(long, value_parser = input_path)]
        input: PathBuf,
        #[arg(long, value_enum)]
        kind: DiagKind,
    },
    /// Arc-length welding fixed point, forward or inverse.
    Lambda {
        #[arg(long, value_enum)]
        direction: Direction,
        #[arg(long, value_parser = input_path)]
        input: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 50)]
        max_iter: usize,
        #[arg(long, default_value_t = 1.0)]
        damping: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full welding factorization of a log-derivative file.
    Weld {
        #[arg(long, value_parser = input_path)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 50)]
        max_iter: usize,
        #[arg(long, default_value_t = 1.0)]
        damping: f64,
    },
    /// Schwarzian-type derivative of the series with derivative g'.
    Schwarzian {
        #[arg(long, value_parser = input_path)]
        gprime: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Norm report for an analytic power series.
    Anorm {
        #[arg(long, value_enum)]
        kind: AnormKind,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, value_parser = input_path)]
        input: PathBuf,
    },
    /// Boundary values of a disk series on a circle grid.
    Trace {
        #[arg(long, value_parser = input_path)]
        input: PathBuf,
        #[arg(long, default_value_t = 2048)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dilatation-field estimates: integral norm, box sup, or decay profile.
    Beltrami {
        #[arg(long, value_enum)]
        kind: BeltramiKind,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, value_parser = input_path)]
        input: PathBuf,
        /// Box scales for --kind profile, largest first, comma separated.
        #[arg(long, value_delimiter = ',')]
        scales: Vec<f64>,
    },
    /// Quasiconformal extension jet of a boundary homeomorphism.
    Extend {
        #[arg(long, value_parser = input_path)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 64)]
        x_intervals: usize,
        #[arg(long, default_value_t = 1e-3)]
        y_min: f64,
        /// Defaults to four times the window half-width.
        #[arg(long)]
        y_max: Option<f64>,
        #[arg(long, default_value_t = 256)]
        y_count: usize,
    },
    /// Kernel timing table (CSV on stdout).
    Bench {
        #[arg(long, value_enum)]
        kernel: BenchKernel,
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
    },
    /// Lambda convergence sweep over bump amplitudes (CSV on stdout).
    Sweep {
        /// Positive increasing amplitudes, comma separated; empty gives an empty table.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        amplitudes: Vec<f64>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 50)]
        max_iter: usize,
        #[arg(long, default_value_t = 1.0)]
        damping: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit_error(json: bool, kind: &str, message: &str) {
    if json {
        eprintln!(
            "{}",
            serde_json::json!({ "error": kind, "message": message })
        );
    } else {
        eprintln!("error: {message}");
    }
}

fn usage_exit(json: bool, message: &str) -> ! {
    emit_error(json, "usage", message);
    std::process::exit(2);
}

fn write_out(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)
        .map_err(|e| WpcError::Io { path: path.display().to_string(), source: e })
}

fn print_or_write(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => write_out(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn report_text<T: serde::Serialize>(report: &T) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
    s.push('\n');
    s
}

/// Rebuilds the symmetric uniform grid a plot CSV was written on.
fn grid_of_csv(xs: &[f64]) -> Result<LineGrid> {
    if xs.len() < 2 {
        return Err(WpcError::Invalid("curve CSV needs at least two rows".into()));
    }
    let h = xs[1] - xs[0];
    for j in 1..xs.len() {
        if (xs[j] - xs[j - 1] - h).abs() > 1e-9 * h.abs().max(1.0) {
            return Err(WpcError::Invalid(format!(
                "curve CSV is not uniformly spaced near row {j}"
            )));
        }
    }
    if (xs[0] + xs[xs.len() - 1]).abs() > 1e-9 * xs[xs.len() - 1].abs().max(1.0) {
        return Err(WpcError::Invalid("curve CSV window is not symmetric".into()));
    }
    LineGrid::new(0.5 * (xs[xs.len() - 1] - xs[0]), xs.len() - 1)
}

fn csv_float(v: f64) -> String {
    format!("{v:.6e}")
}

fn run_bench(kernel: BenchKernel, sizes: &[usize], seed: u64) -> Result<String> {
    let mut csv = String::from("kernel,size,seconds,seed\n");
    let name = match kernel {
        BenchKernel::Besov => "besov",
        BenchKernel::Bmo => "bmo",
        BenchKernel::Hilbert => "hilbert",
        BenchKernel::Conjugate => "conjugate",
        BenchKernel::Lambda => "lambda",
        BenchKernel::Mp => "mp",
        BenchKernel::Carleson => "carleson",
    };
    for &size in sizes {
        let runs = match kernel {
            BenchKernel::Lambda => 1,
            _ => 3,
        };
        let mut best = f64::INFINITY;
        for _ in 0..runs {
            let elapsed = match kernel {
                BenchKernel::Besov | BenchKernel::Bmo | BenchKernel::Hilbert => {
                    let grid = LineGrid::new(8.0, size)?;
                    let u = seeded_profiles(seed, 1, -3.5, 3.5, 0.3)[0].sample(grid, true);
                    let t = Instant::now();
                    match kernel {
                        BenchKernel::Besov => {
                            std::hint::black_box(besov_seminorm(&u, 2.0)?);
                        }
                        BenchKernel::Bmo => {
                            std::hint::black_box(bmo_norm(&u)?);
                        }
                        _ => {
                            std::hint::black_box(hilbert_line(&u)?);
                        }
                    }
                    t.elapsed()
                }
                BenchKernel::Conjugate => {
                    let grid = CircleGrid::new(size)?;
                    let profile = {
                        let mut rng = ChaCha8Rng::seed_from_u64(seed);
                        random_profile(&mut rng, 0.5, std::f64::consts::TAU - 0.5, 0.3)
                    };
                    let u = sample_profile_circle(&profile, grid, true);
                    let t = Instant::now();
                    std::hint::black_box(conjugate_circle(&u)?);
                    t.elapsed()
                }
                BenchKernel::Lambda => {
                    let grid = LineGrid::new(32.0, size)?;
                    let v = seeded_profiles(seed, 1, -2.0, 2.0, 0.25)[0].sample(grid, false);
                    let t = Instant::now();
                    std::hint::black_box(eval_lambda(&v, 1e-8, 50, 1.0)?);
                    t.elapsed()
                }
                BenchKernel::Mp | BenchKernel::Carleson => {
                    let grid = HalfPlaneGrid::with_defaults(4.0, size)?;
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    let profile =
                        random_field_profile(&mut rng, (-3.5, 3.5), (0.01, 8.0), 0.5);
                    let mu = BeltramiField::from_fn(grid, profile)?;
                    let t = Instant::now();
                    match kernel {
                        BenchKernel::Mp => {
                            std::hint::black_box(mp_norm(&mu, 2.0)?);
                        }
                        _ => {
                            std::hint::black_box(carleson_norm(&mu)?);
                        }
                    }
                    t.elapsed()
                }
            };
            best = best.min(elapsed.as_secs_f64());
        }
        csv.push_str(&format!("{name},{size},{},{seed}\n", csv_float(best)));
    }
    Ok(csv)
}

/// Per-amplitude welding convergence table on the wide solver window, driven
/// by a single smooth bump supported in [-1.8, 1.8] whose height is the
/// requested amplitude.
fn run_sweep(
    amplitudes: &[f64],
    tol: f64,
    max_iter: usize,
    damping: f64,
    seed: u64,
) -> Result<(String, bool)> {
    let mut csv = String::from("amplitude,iterations,residual,round_trip_error,converged,flag,seed\n");
    if amplitudes.is_empty() {
        return Ok((csv, true));
    }
    let grid = LineGrid::new(32.0, 8192)?;
    let mut flagged = false;
    let mut all_converged = true;
    for &a in amplitudes {
        let bump = Bump { center: 0.0, width: 1.8, height: a };
        let v = SampledFunction::sample_line(grid, |x| Complex64::new(bump.eval(x), 0.0), false);
        let lam = eval_lambda(&v, tol, max_iter, damping)?;
        let round_trip = eval_lambda_inverse(&lam.log_f_prime)?.sup_distance(&v)?;
        let flag = if !lam.converged && !flagged {
            flagged = true;
            "first_nonconverged"
        } else {
            ""
        };
        all_converged &= lam.converged;
        csv.push_str(&format!(
            "{a},{},{},{},{},{flag},{seed}\n",
            lam.iterations,
            csv_float(lam.residual),
            csv_float(round_trip),
            lam.converged,
        ));
    }
    Ok((csv, all_converged))
}

fn run(cli: &Cli) -> Result<i32> {
    match &cli.cmd {
        Cmd::Norm { kind, p, input, scale, floor } => {
            let u = io::read_sampled(input)?;
            let report = match kind {
                NormKind::Besov => {
                    let p = p.unwrap_or_else(|| {
                        usage_exit(cli.json_errors, "--kind besov needs --p")
                    });
                    besov_seminorm(&u, p)?
                }
                NormKind::Bmo => bmo_norm(&u)?,
                NormKind::Vmo => {
                    let s = scale.unwrap_or_else(|| {
                        usage_exit(cli.json_errors, "--kind vmo needs --scale")
                    });
                    vmo_defect(&u, s)?
                }
                NormKind::Ainfty => a_infty_constant(&u, *floor)?,
            };
            print!("{}", report_text(&report));
            Ok(0)
        }
        Cmd::Hilbert { input, out } => {
            let u = io::read_sampled(input)?;
            let moved = match u.grid {
                Grid::Line(_) => hilbert_line(&u)?,
                Grid::Circle(_) => conjugate_circle(&u)?,
            };
            print_or_write(out, &io::sampled_text(&moved))?;
            Ok(0)
        }
        Cmd::Curve { from_w, out } => {
            let w = io::read_sampled(from_w)?;
            let param = normalize_log_derivative(&w)?;
            let curve = curve_from_log_derivative(&param)?;
            io::write_curve_csv(out, &curve.grid.nodes(), &curve.points)?;
            Ok(0)
        }
        Cmd::Reparam { u, w, out } => {
            let u = io::read_sampled(u)?;
            let w = io::read_sampled(w)?;
            let moved = q_transform(&u, &w)?;
            print_or_write(out, &io::sampled_text(&moved))?;
            Ok(0)
        }
        Cmd::Jmap { u, v, out } => {
            let u = io::read_sampled(u)?;
            let v = io::read_sampled(v)?;
            let param = j_map(&u, &v)?;
            print_or_write(out, &io::sampled_text(&param.w))?;
            Ok(0)
        }
        Cmd::Jinv { w, out_u, out_v } => {
            let w = io::read_sampled(w)?;
            let param = normalize_log_derivative(&w)?;
            let (u, v) = j_inverse(&param)?;
            match (out_u, out_v) {
                (Some(pu), Some(pv)) => {
                    io::write_sampled(pu, &u)?;
                    io::write_sampled(pv, &v)?;
                }
                (None, None) => {
                    let merged = serde_json::json!({
                        "u": serde_json::from_str::<serde_json::Value>(&io::sampled_text(&u))
                            .expect("schema text parses"),
                        "v": serde_json::from_str::<serde_json::Value>(&io::sampled_text(&v))
                            .expect("schema text parses"),
                    });
                    print!("{}", report_text(&merged));
                }
                _ => usage_exit(cli.json_errors, "--out-u and --out-v go together"),
            }
            Ok(0)
        }
        Cmd::Diag { input, kind } => {
            let (xs, points) = io::read_curve_csv(input)?;
            let grid = grid_of_csv(&xs)?;
            let curve = PlaneCurve::new(grid, points)?;
            let (name, value) = match kind {
                DiagKind::Arclen => ("arclen", arc_length_defect(&curve)),
                DiagKind::Chordarc => ("chordarc", chord_arc_constant(&curve)?),
            };
            print!(
                "{}",
                report_text(&serde_json::json!({ "kind": name, "value": value }))
            );
            Ok(0)
        }
        Cmd::Lambda { direction, input, tol, max_iter, damping, out } => {
            let f = io::read_sampled(input)?;
            match direction {
                Direction::Forward => {
                    let lam = eval_lambda(&f, *tol, *max_iter, *damping)?;
                    let ok = lam.converged;
                    print_or_write(out, &io::welding_text(&lam))?;
                    if !ok && cli.strict {
                        emit_error(
                            cli.json_errors,
                            "numeric",
                            &format!(
                                "fixed point not reached: residual {:.3e} after {} iterations",
                                lam.residual, lam.iterations
                            ),
                        );
                        return Ok(1);
                    }
                    Ok(0)
                }
                Direction::Inverse => {
                    let v = eval_lambda_inverse(&f)?;
                    print_or_write(out, &io::sampled_text(&v))?;
                    Ok(0)
                }
            }
        }
        Cmd::Weld { input, out, tol, max_iter, damping } => {
            let w = io::read_sampled(input)?;
            let param = normalize_log_derivative(&w)?;
            let welded = weld_decompose_with(&param, *tol, *max_iter, *damping)?;
            let ok = welded.converged;
            print_or_write(out, &io::welding_text(&welded))?;
            if !ok && cli.strict {
                emit_error(
                    cli.json_errors,
                    "numeric",
                    &format!("welding stopped at residual {:.3e}", welded.residual),
                );
                return Ok(1);
            }
            Ok(0)
        }
        Cmd::Schwarzian { gprime, out } => {
            let g = io::read_series(gprime)?;
            let s = alpha_map(&pre_schwarzian(&g)?)?;
            print_or_write(out, &io::series_text(&s))?;
            Ok(0)
        }
        Cmd::Anorm { kind, p, input } => {
            let phi = io::read_series(input)?;
            let kind = match kind {
                AnormKind::Besov => AnalyticNormKind::BesovP,
                AnormKind::Bloch => AnalyticNormKind::Bloch,
                AnormKind::Ap => AnalyticNormKind::AP,
                AnormKind::Ainf => AnalyticNormKind::AInf,
            };
            let report = analytic_norm(&phi, kind, *p)?;
            print!("{}", report_text(&report));
            Ok(0)
        }
        Cmd::Trace { input, n, out } => {
            let phi = io::read_series(input)?;
            let grid = CircleGrid::new(*n)?;
            let (trace, warning) = boundary_trace(&phi, &grid)?;
            if let Some(msg) = warning {
                eprintln!("warning: {msg}");
            }
            print_or_write(out, &io::sampled_text(&trace))?;
            Ok(0)
        }
        Cmd::Beltrami { kind, p, input, scales } => {
            let mu = io::read_field(input)?;
            match kind {
                BeltramiKind::Mpnorm => {
                    print!("{}", report_text(&mp_norm(&mu, *p)?));
                }
                BeltramiKind::Carleson => {
                    print!("{}", report_text(&carleson_norm(&mu)?));
                }
                BeltramiKind::Profile => {
                    if scales.is_empty() {
                        usage_exit(cli.json_errors, "--kind profile needs --scales");
                    }
                    let values = vanishing_profile(&mu, scales)?;
                    print!(
                        "{}",
                        report_text(&serde_json::json!({
                            "scales": scales,
                            "values": values,
                        }))
                    );
                }
            }
            Ok(0)
        }
        Cmd::Extend { input, out, x_intervals, y_min, y_max, y_count } => {
            let f = io::read_monotone(input)?;
            let hw = f.grid().half_width();
            let grid = HalfPlaneGrid::new(
                hw,
                *x_intervals,
                *y_min,
                y_max.unwrap_or(4.0 * hw),
                *y_count,
            )?;
            let jet = beurling_ahlfors_extension(&f, &grid)?;
            io::write_jet(out, &jet)?;
            Ok(0)
        }
        Cmd::Bench { kernel, sizes } => {
            print!("{}", run_bench(*kernel, sizes, cli.seed)?);
            Ok(0)
        }
        Cmd::Sweep { amplitudes, tol, max_iter, damping, out } => {
            for pair in amplitudes.windows(2) {
                if pair[1] <= pair[0] {
                    usage_exit(cli.json_errors, "--amplitudes must be increasing");
                }
            }
            if amplitudes.iter().any(|&a| !(a > 0.0)) {
                usage_exit(cli.json_errors, "--amplitudes must be positive");
            }
            let (csv, all_converged) =
                run_sweep(amplitudes, *tol, *max_iter, *damping, cli.seed)?;
            print_or_write(out, &csv)?;
            if !all_converged && cli.strict {
                emit_error(cli.json_errors, "numeric", "sweep hit a non-converged amplitude");
                return Ok(1);
            }
            Ok(0)
        }
    }
}

fn main() {
    let wants_json = std::env::args().any(|a| a == "--json-errors");
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    std::process::exit(0);
                }
                _ => {
                    if wants_json {
                        emit_error(true, "usage", &e.to_string());
                    } else {
                        eprint!("{e}");
                    }
                    std::process::exit(2);
                }
            }
        }
    };
    match run(&cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            emit_error(cli.json_errors, "run", &err.to_string());
            std::process::exit(1);
        }
    }
}
