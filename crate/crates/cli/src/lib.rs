//! Command-line driver: JSON in, JSON out, plus scripted reproductions of the
//! worked examples.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use extremal_core::calderon::{calderon, proportional};
use extremal_core::extremal::{
    extremality_rank_test_with_tol, face_of_q, find_zeros, local_minimum, perturbed_example_phi, DEFAULT_GRID, DEFAULT_RANK_TOL,
    DEFAULT_REFINE_TOL,
};
use extremal_core::functional::{lf, lf_via_measure};
use extremal_core::io::{self, FaceJson, MatrixJson, MeasureJson, MembershipJson, PhiJson, PolyJson, RankJson, ZerosJson};
use extremal_core::sos::{q_membership, verify_sos, MembershipStatus, DEFAULT_MAX_ITERS, DEFAULT_TOL};
use extremal_core::toeplitz::{analytic_to_vector, build_matrix, is_psd, kernel_basis, projector_distance};
use extremal_core::{fixtures, DegreeBox, Error, TrigPoly};
use num_complex::Complex;
use serde::de::DeserializeOwned;

/// Malformed input: unreadable file, bad JSON, inconsistent data or bad usage.
pub const EXIT_INPUT: i32 = 64;
/// The computation itself failed.
pub const EXIT_NUMERICAL: i32 = 65;

#[derive(Parser, Debug)]
#[command(name = "extremal", version, about = "Extremal nonnegative trigonometric polynomials in three variables")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Block-Toeplitz matrix of a lattice function.
    BuildMatrix {
        #[arg(long)]
        phi: PathBuf,
    },
    /// Face of the sum-of-squares cone cut out by a lattice function.
    Face {
        #[arg(long)]
        phi: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Zeros of a nonnegative trigonometric polynomial.
    Zeros {
        #[arg(long)]
        poly: PathBuf,
        #[arg(long, default_value_t = DEFAULT_GRID)]
        grid: usize,
    },
    /// Rank certificate for extremality in the nonnegative cone.
    RankTest {
        #[arg(long)]
        poly: PathBuf,
        /// Zeros as written by `zeros`; found on a grid when omitted.
        #[arg(long)]
        zeros: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
        tol: f64,
    },
    /// Power polynomial obtained by the Calderon substitution.
    Calderon {
        #[arg(long)]
        poly: PathBuf,
        /// Power polynomial the result must be a positive multiple of.
        #[arg(long)]
        compare: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Value of the linear functional on a polynomial.
    Lf {
        #[arg(long, conflicts_with = "measure", required_unless_present = "measure")]
        phi: Option<PathBuf>,
        #[arg(long)]
        measure: Option<PathBuf>,
        #[arg(long)]
        poly: PathBuf,
        /// Rescale the measure to total mass (2 pi)^3.
        #[arg(long, requires = "measure")]
        normalize: bool,
    },
    /// Membership in the cone of sums of squared moduli.
    QMember {
        #[arg(long)]
        poly: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
        max_iters: usize,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Runs a worked example end to end and reports each check.
    Reproduce {
        #[arg(value_enum)]
        name: Example,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Example {
    Example1,
    Example2,
    Example3,
}

/// Result of one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self { code: 0, stdout, stderr: String::new() }
    }
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Malformed(_)
            | Error::IndexOutOfBox { .. }
            | Error::IncompleteTable(_)
            | Error::NotHermitianSymmetric(_)
            | Error::BoxMismatch(_)
            | Error::LengthMismatch { .. }
            | Error::EmptyMeasure
            | Error::InvalidAtom(_)
            | Error::BadResolution(_) => EXIT_INPUT,
            _ => EXIT_NUMERICAL,
        };
        Failure { code, message: e.to_string() }
    }
}

fn read<D: DeserializeOwned>(path: &Path) -> Result<D, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure { code: EXIT_INPUT, message: format!("{}: {e}", path.display()) })?;
    io::parse(&text).map_err(|e| Failure { code: EXIT_INPUT, message: format!("{}: {e}", path.display()) })
}

fn read_trig(path: &Path) -> Result<TrigPoly, Failure> {
    Ok(read::<PolyJson>(path)?.to_trig()?)
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, S>(args: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome { code: EXIT_INPUT, stdout: String::new(), stderr: text }
            } else {
                Outcome::ok(text)
            };
        }
    };
    match dispatch(cli.command) {
        Ok(out) => out,
        Err(f) => Outcome { code: f.code, stdout: String::new(), stderr: format!("error: {}\n", f.message) },
    }
}

fn json<S: serde::Serialize>(value: &S) -> String {
    io::to_string(value) + "\n"
}

fn dispatch(command: Command) -> Result<Outcome, Failure> {
    match command {
        Command::BuildMatrix { phi } => {
            let table = read::<PhiJson>(&phi)?.to_table()?;
            let a = build_matrix(&table)?;
            Ok(Outcome::ok(json(&MatrixJson::from_matrix(a.entries()))))
        }
        Command::Face { phi, tol } => {
            let table = read::<PhiJson>(&phi)?.to_table()?;
            Ok(Outcome::ok(json(&FaceJson::from_report(&face_of_q(&table, tol)?))))
        }
        Command::Zeros { poly, grid } => {
            let f = read_trig(&poly)?;
            Ok(Outcome::ok(json(&ZerosJson::from_zeros(&find_zeros(&f, grid, DEFAULT_REFINE_TOL)?))))
        }
        Command::RankTest { poly, zeros, tol } => {
            let f = read_trig(&poly)?;
            let zeros = match zeros {
                Some(path) => read::<ZerosJson>(&path)?.to_zeros(),
                None => find_zeros(&f, DEFAULT_GRID, DEFAULT_REFINE_TOL)?,
            };
            Ok(Outcome::ok(json(&RankJson::from_certificate(&extremality_rank_test_with_tol(&f, &zeros, tol)?))))
        }
        Command::Calderon { poly, compare, tol } => {
            let f = read_trig(&poly)?;
            let result = calderon(&f)?;
            let stdout = json(&PolyJson::from_power(&result.power));
            let Some(target) = compare else {
                return Ok(Outcome::ok(stdout));
            };
            let target = read::<PolyJson>(&target)?.to_power()?;
            let (ok, ratio) = proportional(&result.power, &target, tol)?;
            if ok && ratio > 0.0 {
                Ok(Outcome { code: 0, stdout, stderr: format!("proportional, ratio {ratio}\n") })
            } else {
                Ok(Outcome { code: 1, stdout, stderr: format!("not a positive multiple of the target (ratio {ratio})\n") })
            }
        }
        Command::Lf { phi, measure, poly, normalize } => {
            let f = read_trig(&poly)?;
            let value = match (phi, measure) {
                (Some(phi), _) => {
                    let table = read::<PhiJson>(&phi)?.to_table()?;
                    let v = lf(&table, &f)?;
                    if v.im.abs() > 1e-9 * (1.0 + v.re.abs()) {
                        return Err(Failure { code: EXIT_NUMERICAL, message: format!("functional value {v} is not real") });
                    }
                    v.re
                }
                (None, Some(measure)) => {
                    let mu = read::<MeasureJson>(&measure)?.to_measure()?;
                    let mu = if normalize { mu.normalized_total() } else { mu };
                    lf_via_measure(&mu, &f)?
                }
                (None, None) => unreachable!("clap requires --phi or --measure"),
            };
            Ok(Outcome::ok(json(&value)))
        }
        Command::QMember { poly, max_iters, tol } => {
            let f = read_trig(&poly)?;
            let result = q_membership(&f, max_iters, tol)?;
            let code = match result.status {
                MembershipStatus::Member => 0,
                MembershipStatus::NonMember => 1,
                MembershipStatus::Unknown => 2,
            };
            Ok(Outcome { code, stdout: json(&MembershipJson::from_result(&result)), stderr: String::new() })
        }
        Command::Reproduce { name } => {
            let report = match name {
                Example::Example1 => example1(),
                Example::Example2 => example2(),
                Example::Example3 => example3(),
            }?;
            let code = if report.failed == 0 { 0 } else { EXIT_NUMERICAL };
            Ok(Outcome { code, stdout: report.text, stderr: String::new() })
        }
    }
}

#[derive(Default)]
struct Report {
    text: String,
    failed: usize,
}

impl Report {
    fn item(&mut self, pass: bool, line: impl std::fmt::Display) {
        if !pass {
            self.failed += 1;
        }
        let _ = writeln!(self.text, "{} {line}", if pass { "PASS" } else { "FAIL" });
    }

    fn finish(mut self) -> Self {
        let _ = writeln!(self.text, "failed: {}", self.failed);
        self
    }
}

fn example1() -> Result<Report, Failure> {
    let mut r = Report::default();
    let phi = fixtures::example1_phi();
    let a = build_matrix(&phi)?;
    r.item(a.dim() == 8, format_args!("matrix_dim: {}", a.dim()));
    let (psd, min) = is_psd(&a, 1e-9)?;
    r.item(psd, format_args!("psd: {psd} (min eigenvalue {min:.3e})"));
    let kernel = kernel_basis(&a, 1e-9)?;
    r.item(kernel.nu == 4, format_args!("kernel_dim: {}", kernel.nu));
    let factors = fixtures::kernel_factors();
    let expected: Vec<_> = factors.iter().map(analytic_to_vector).collect();
    let dist = projector_distance(&kernel.vectors, &expected, a.dim());
    r.item(dist <= 1e-9, format_args!("kernel_distance: {dist:.3e}"));
    for (k, f) in factors.iter().enumerate() {
        let v = lf(&phi, &f.mod_square())?.norm();
        r.item(v <= 1e-10, format_args!("lf_f{}: {v:.3e}", k + 1));
    }
    let half = Complex::new(0.5, 0.0);
    for j in 0..4 {
        let mut g = [half; 4];
        g[j] = Complex::new(1.0, 0.0);
        let report = face_of_q(&perturbed_example_phi(g[0], g[1], g[2], g[3]), 1e-9)?;
        let kernel = kernel_basis(&build_matrix(&report.phi)?, 1e-9)?;
        let dist = projector_distance(&kernel.vectors, &expected[j..=j], a.dim());
        r.item(report.nu == 1 && dist <= 1e-9, format_args!("perturbed_gamma{}: kernel_dim {} distance {dist:.3e}", j + 1, report.nu));
    }
    Ok(r.finish())
}

fn example2() -> Result<Report, Failure> {
    let mut r = Report::default();
    for (k, (f, p)) in fixtures::kernel_factors().iter().zip(fixtures::power_targets()).enumerate() {
        let c = calderon(&f.mod_square())?;
        let (ok, ratio) = proportional(&c.power, &p, 1e-9)?;
        r.item(ok && ratio > 0.0, format_args!("calderon_p{}: proportional {ok} ratio {ratio:.6}", k + 1));
    }
    Ok(r.finish())
}

fn example3() -> Result<Report, Failure> {
    let mut r = Report::default();
    let target = 4.0 - 2f64.powf(1.5);
    let f0 = fixtures::f0();
    let (grid_min, _) = f0.min_on_grid(DEFAULT_GRID)?;
    r.item((grid_min - target).abs() <= 1e-2, format_args!("f0_grid_min: {grid_min:.6}"));
    let (refined, _) = local_minimum(&f0, DEFAULT_GRID)?;
    r.item((refined - target).abs() <= 1e-8, format_args!("f0_min: {refined:.10}"));
    let f = fixtures::f_extremal();
    let zeros = find_zeros(&f, DEFAULT_GRID, DEFAULT_REFINE_TOL)?;
    r.item(zeros.len() == 8, format_args!("zeros: {}", zeros.len()));
    for z in &zeros {
        let [a, b, c] = z.point.as_array();
        r.item(z.residual <= 1e-9 && z.gradient_norm <= 1e-6, format_args!("zero: ({a:.6}, {b:.6}, {c:.6})"));
    }
    let cert = extremality_rank_test_with_tol(&f, &zeros, DEFAULT_RANK_TOL)?;
    r.item(cert.equations == 32, format_args!("equations: {}", cert.equations));
    r.item(cert.unknowns == 27, format_args!("unknowns: {}", cert.unknowns));
    r.item(cert.rank == 26, format_args!("rank: {}", cert.rank));
    r.item(cert.extremal, format_args!("extremal: {}", cert.extremal));
    let c = calderon(&f)?;
    let (ok, ratio) = proportional(&c.power, &fixtures::target_extremal(), 1e-8)?;
    r.item(ok && ratio > 0.0, format_args!("calderon_target: proportional {ok} ratio {ratio:.6}"));
    let phi = fixtures::example1_phi();
    let bx = DegreeBox::new(1, 1, 1);
    for m in [0.1, 0.5, 1.0] {
        let v = lf(&phi, &(&f0 - &TrigPoly::constant(bx, m)))?.re;
        r.item((v + m).abs() <= 1e-12, format_args!("lf_f0_minus_{m}: {v:.12}"));
    }
    let g = &f0 - &TrigPoly::constant(bx, 0.5);
    let res = q_membership(&g, DEFAULT_MAX_ITERS, DEFAULT_TOL)?;
    let certified = match &res.separator {
        Some(sep) => {
            let (psd, _) = is_psd(&build_matrix(sep)?, 1e-9)?;
            psd && lf(sep, &g)?.re < -1e-2
        }
        None => false,
    };
    r.item(res.status == MembershipStatus::NonMember && certified, format_args!("f0_minus_half: {}", res.status.as_str()));
    let f1 = fixtures::kernel_factors()[0].mod_square();
    let res = q_membership(&f1, DEFAULT_MAX_ITERS, DEFAULT_TOL)?;
    let verified = res.factors.as_deref().is_some_and(|fs| verify_sos(&f1, fs, 1e-7));
    r.item(res.status == MembershipStatus::Member && verified, format_args!("f1: {}", res.status.as_str()));
    Ok(r.finish())
}
