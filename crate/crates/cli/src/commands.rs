//! Implementations of the three subcommands. Argument structs double as
//! the clap definitions; the functions are plain so integration tests
//! can drive them without spawning a process.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use matperturb::{
    default_scales, dk_first_order_term, dk_fractional_power, eigh, matrix_modulus, matrix_power,
    modulus_approx, modulus_approx_invertible, modulus_approx_psd, power_approx, power_approx_s,
    run_campaign, spectral_norm, trial_seed, validate_scales, wihler_check, ComplexMatrix, Error,
    ExpectedOrder, HermitianMatrix, Problem, Tolerances,
};

use crate::format::{parse_scales, FormatError, MatrixFile, MatrixKind};
use crate::report::{write_error_csv, ConfigEcho, NamedMatrix, RunReport, Summary};

/// Environment variable that overrides `--seed` when set.
pub const SEED_ENV_VAR: &str = "MATPERTURB_SEED";

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or inputs that violate a documented precondition.
    Usage(String),
    /// A numerical backend failure.
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Numerical(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Usage(e.to_string())
        }
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(format!("i/o error: {e}"))
    }
}

/// Exit code signalled by `order`/`wihler` when every computation
/// succeeded but an asserted bound did not hold.
pub const EXIT_ORDER_FAILED: i32 = 3;

#[derive(Debug, Clone, Copy, Args)]
pub struct TolArgs {
    /// Hermitian symmetry tolerance.
    #[arg(long, default_value_t = 1e-10)]
    pub hermitian_tol: f64,
    /// Unitarity tolerance for factor checks.
    #[arg(long, default_value_t = 1e-10)]
    pub unitary_tol: f64,
    /// Factorization reconstruction tolerance.
    #[arg(long, default_value_t = 1e-10)]
    pub recon_tol: f64,
    /// How far below zero an eigenvalue may sit and still count as zero.
    #[arg(long, default_value_t = 1e-10)]
    pub psd_tol: f64,
    /// Relative kernel decision threshold.
    #[arg(long, default_value_t = 1e-8)]
    pub rank_tol: f64,
    /// Relative threshold for coincident eigenvalue pairs.
    #[arg(long, default_value_t = 1e-12)]
    pub pair_tol: f64,
}

impl TolArgs {
    pub fn to_tolerances(self) -> Tolerances {
        Tolerances {
            hermitian_tol: self.hermitian_tol,
            unitary_tol: self.unitary_tol,
            recon_tol: self.recon_tol,
            psd_tol: self.psd_tol,
            rank_tol: self.rank_tol,
            pair_tol: self.pair_tol,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ApproxMode {
    Dk,
    Power,
    #[value(name = "power-s")]
    PowerS,
    Modulus,
    #[value(name = "modulus-psd")]
    ModulusPsd,
    #[value(name = "modulus-inv")]
    ModulusInv,
}

impl ApproxMode {
    fn as_str(&self) -> &'static str {
        match self {
            ApproxMode::Dk => "dk",
            ApproxMode::Power => "power",
            ApproxMode::PowerS => "power-s",
            ApproxMode::Modulus => "modulus",
            ApproxMode::ModulusPsd => "modulus-psd",
            ApproxMode::ModulusInv => "modulus-inv",
        }
    }
}

#[derive(Debug, Args)]
pub struct ApproxArgs {
    /// Which first-order formula to evaluate.
    #[arg(long, value_enum)]
    pub mode: ApproxMode,
    /// Base matrix file (A or X).
    #[arg(long)]
    pub input: PathBuf,
    /// Perturbation matrix file (E or Z).
    #[arg(long)]
    pub perturb: PathBuf,
    /// Root exponent for dk/power modes: the approximated function is
    /// t^(1/p).
    #[arg(long)]
    pub p: Option<f64>,
    /// Growth exponent for power-s mode (s > 1).
    #[arg(long)]
    pub s: Option<f64>,
    /// Report destination (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Omit the timestamp so identical runs produce identical bytes.
    #[arg(long)]
    pub no_timestamp: bool,
    #[command(flatten)]
    pub tol: TolArgs,
}

fn load_matrix(path: &std::path::Path, tol: &Tolerances) -> Result<ComplexMatrix, CliError> {
    let file = MatrixFile::load(path)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    file.validate_kind(tol)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    Ok(file.to_matrix()?)
}

fn as_hermitian(m: ComplexMatrix, tol: &Tolerances, role: &str) -> Result<HermitianMatrix, CliError> {
    HermitianMatrix::new(m, tol.hermitian_tol)
        .map_err(|e| CliError::Usage(format!("{role}: {e}")))
}

struct ApproxOutput {
    base: HermitianMatrix,
    term: HermitianMatrix,
    approximation: HermitianMatrix,
    exact: HermitianMatrix,
}

fn run_approx_mode(
    mode: ApproxMode,
    a: ComplexMatrix,
    e: ComplexMatrix,
    p: Option<f64>,
    s: Option<f64>,
    tol: &Tolerances,
) -> Result<ApproxOutput, CliError> {
    if !a.is_square() {
        return Err(CliError::Usage(format!(
            "--input must be square, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if a.rows() != e.rows() || a.cols() != e.cols() {
        return Err(CliError::Usage(format!(
            "--perturb is {}x{} but --input is {}x{}",
            e.rows(),
            e.cols(),
            a.rows(),
            a.cols()
        )));
    }
    let need_p = || {
        p.ok_or_else(|| CliError::Usage("this mode requires --p".to_string()))
    };
    match mode {
        ApproxMode::Dk => {
            let p = need_p()?;
            let a = as_hermitian(a, tol, "--input")?;
            let e = as_hermitian(e, tol, "--perturb")?;
            let dec = eigh(&a, tol)?;
            let exponent = 1.0 / p;
            let approximation = dk_fractional_power(&dec, &e, p, tol)?;
            let base = dec.apply(|t: f64| t.powf(exponent))?;
            let term = dk_first_order_term(
                &dec,
                &e,
                |t: f64| t.powf(exponent),
                |t: f64| exponent * t.powf(exponent - 1.0),
                tol,
            )?;
            let perturbed = HermitianMatrix::symmetrize(&(a.matrix() + e.matrix()));
            let exact = matrix_power(&perturbed, exponent, tol)?;
            Ok(ApproxOutput {
                base,
                term,
                approximation,
                exact,
            })
        }
        ApproxMode::Power | ApproxMode::PowerS => {
            let a = as_hermitian(a, tol, "--input")?;
            let e = as_hermitian(e, tol, "--perturb")?;
            let dec = eigh(&a, tol)?;
            let (result, exponent) = if mode == ApproxMode::Power {
                let p = need_p()?;
                (power_approx(&dec, &e, p, tol)?, 1.0 / p)
            } else {
                let s = s.ok_or_else(|| CliError::Usage("power-s requires --s".to_string()))?;
                (power_approx_s(&dec, &e, s, tol)?, s)
            };
            let perturbed = HermitianMatrix::symmetrize(&(a.matrix() + e.matrix()));
            let exact = matrix_power(&perturbed, exponent, tol)?;
            Ok(ApproxOutput {
                base: result.base,
                term: result.first_order_term,
                approximation: result.approximation,
                exact,
            })
        }
        ApproxMode::Modulus | ApproxMode::ModulusPsd | ApproxMode::ModulusInv => {
            let perturbed = ComplexMatrix::from_dmatrix(a.matrix() + e.matrix())
                .map_err(CliError::from)?;
            let result = match mode {
                ApproxMode::Modulus => modulus_approx(&a, &e, tol)?,
                ApproxMode::ModulusPsd => {
                    let x = as_hermitian(a, tol, "--input")?;
                    let z = as_hermitian(e, tol, "--perturb")?;
                    modulus_approx_psd(&x, &z, tol)?
                }
                _ => {
                    let x = as_hermitian(a, tol, "--input")?;
                    let z = as_hermitian(e, tol, "--perturb")?;
                    modulus_approx_invertible(&x, &z, tol)?
                }
            };
            let exact = matrix_modulus(&perturbed)?;
            Ok(ApproxOutput {
                base: result.base,
                term: result.first_order_term,
                approximation: result.approximation,
                exact,
            })
        }
    }
}

pub fn cmd_approx(args: &ApproxArgs) -> Result<RunReport, CliError> {
    let tol = args.tol.to_tolerances();
    let a = load_matrix(&args.input, &tol)?;
    let e = load_matrix(&args.perturb, &tol)?;
    let output = run_approx_mode(args.mode, a, e, args.p, args.s, &tol)?;

    let diff = output.exact.matrix() - output.approximation.matrix();
    let err_spectral =
        spectral_norm(&ComplexMatrix::from_dmatrix(diff.clone()).map_err(CliError::from)?);
    let err_frobenius = diff.norm();

    let mut flags = BTreeMap::new();
    flags.insert("mode".into(), args.mode.as_str().to_string());
    flags.insert("input".into(), args.input.display().to_string());
    flags.insert("perturb".into(), args.perturb.display().to_string());
    if let Some(p) = args.p {
        flags.insert("p".into(), format!("{p}"));
    }
    if let Some(s) = args.s {
        flags.insert("s".into(), format!("{s}"));
    }

    let mut report = RunReport::new(
        "approx".to_string(),
        ConfigEcho {
            tolerances: tol,
            seed: None,
            seed_from_env: None,
            flags,
        },
        !args.no_timestamp,
    );
    report.results.push(NamedMatrix::from_matrix(
        "approximation",
        output.approximation.as_complex(),
        Some(MatrixKind::Hermitian),
    ));
    report.results.push(NamedMatrix::from_matrix(
        "first_order_term",
        output.term.as_complex(),
        Some(MatrixKind::Hermitian),
    ));
    report.results.push(NamedMatrix::from_matrix(
        "base",
        output.base.as_complex(),
        Some(MatrixKind::Hermitian),
    ));
    report.results.push(NamedMatrix::from_matrix(
        "exact",
        output.exact.as_complex(),
        Some(MatrixKind::Hermitian),
    ));
    report
        .summary
        .metrics
        .insert("error_spectral".into(), err_spectral);
    report
        .summary
        .metrics
        .insert("error_frobenius".into(), err_frobenius);
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProblemArg {
    Dk,
    Power,
    #[value(name = "power-s")]
    PowerS,
    Modulus,
    #[value(name = "modulus-psd")]
    ModulusPsd,
    #[value(name = "modulus-inv")]
    ModulusInv,
    /// Projector linearization order.
    #[value(name = "lemma-gt")]
    LemmaGt,
    /// Projected kernel power order.
    #[value(name = "lemma-gt1")]
    LemmaGt1,
    /// Projector cross/range product bounds.
    #[value(name = "lemma-gt2")]
    LemmaGt2,
}

impl ProblemArg {
    fn as_str(&self) -> &'static str {
        match self {
            ProblemArg::Dk => "dk",
            ProblemArg::Power => "power",
            ProblemArg::PowerS => "power-s",
            ProblemArg::Modulus => "modulus",
            ProblemArg::ModulusPsd => "modulus-psd",
            ProblemArg::ModulusInv => "modulus-inv",
            ProblemArg::LemmaGt => "lemma-gt",
            ProblemArg::LemmaGt1 => "lemma-gt1",
            ProblemArg::LemmaGt2 => "lemma-gt2",
        }
    }
}

#[derive(Debug, Args)]
pub struct OrderArgs {
    /// Which order claim to measure.
    #[arg(long, value_enum)]
    pub problem: ProblemArg,
    /// Matrix dimension.
    #[arg(long, default_value_t = 6)]
    pub n: usize,
    /// Rank of the unperturbed matrix (defaults to n).
    #[arg(long)]
    pub rank: Option<usize>,
    /// Root exponent where applicable.
    #[arg(long)]
    pub p: Option<f64>,
    /// Growth exponent for power-s.
    #[arg(long)]
    pub s: Option<f64>,
    /// Number of independent instances.
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    /// Campaign seed (overridden by MATPERTURB_SEED).
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Comma-separated decreasing scale ladder (at least 6 entries).
    #[arg(long)]
    pub scales: Option<String>,
    /// Lower end of the positive spectrum of generated instances.
    #[arg(long, default_value_t = 0.5)]
    pub spectrum_lo: f64,
    /// Upper end of the positive spectrum of generated instances.
    #[arg(long, default_value_t = 2.0)]
    pub spectrum_hi: f64,
    /// Report destination (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write a scale,error,trial table.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Permit exponents outside the proven range; the claimed order is
    /// then reported as unguaranteed.
    #[arg(long)]
    pub force: bool,
    /// Slack subtracted from the expected order before the pass check.
    #[arg(long, default_value_t = matperturb::DEFAULT_SLOPE_MARGIN, allow_negative_numbers = true)]
    pub slope_margin: f64,
    /// Omit the timestamp so identical runs produce identical bytes.
    #[arg(long)]
    pub no_timestamp: bool,
    #[command(flatten)]
    pub tol: TolArgs,
}

/// Resolve the seed, honoring the environment override.
fn resolve_seed(flag_seed: u64) -> Result<(u64, bool), CliError> {
    match std::env::var(SEED_ENV_VAR) {
        Ok(text) => {
            let seed: u64 = text.trim().parse().map_err(|e| {
                CliError::Usage(format!("{SEED_ENV_VAR}={text:?} is not a valid seed: {e}"))
            })?;
            Ok((seed, true))
        }
        Err(_) => Ok((flag_seed, false)),
    }
}

fn problems_for(args: &OrderArgs) -> Result<(Vec<Problem>, usize), CliError> {
    let n = args.n;
    if n == 0 || n > 64 {
        return Err(CliError::Usage(format!(
            "--n {n} outside the supported range 1..=64"
        )));
    }
    let rank = args.rank.unwrap_or(n);
    if rank > n {
        return Err(CliError::Usage(format!("--rank {rank} exceeds --n {n}")));
    }
    let need_p = || {
        args.p
            .ok_or_else(|| CliError::Usage("this problem requires --p".to_string()))
    };
    let check_power_range = |p: f64| -> Result<(), CliError> {
        if !p.is_finite() || p <= 1.0 {
            return Err(CliError::Usage(format!(
                "--p {p} must exceed 1 (use power-s for exponents above 1)"
            )));
        }
        if p >= 3.0 && !args.force {
            return Err(CliError::Usage(format!(
                "--p {p} is outside (1, 3); no order is proven there — pass --force to run anyway"
            )));
        }
        Ok(())
    };
    let problems = match args.problem {
        ProblemArg::Dk => {
            let p = need_p()?;
            if !p.is_finite() || p <= 0.0 {
                return Err(CliError::Usage("--p must be positive for dk".to_string()));
            }
            if rank != n {
                return Err(CliError::Usage(
                    "dk requires a nonsingular base: --rank must equal --n".to_string(),
                ));
            }
            vec![Problem::Dk { p }]
        }
        ProblemArg::Power => {
            let p = need_p()?;
            check_power_range(p)?;
            vec![Problem::Power { p }]
        }
        ProblemArg::PowerS => {
            let s = args
                .s
                .ok_or_else(|| CliError::Usage("power-s requires --s".to_string()))?;
            if !s.is_finite() || s <= 1.0 {
                return Err(CliError::Usage("--s must exceed 1".to_string()));
            }
            vec![Problem::PowerS { s }]
        }
        ProblemArg::Modulus => vec![Problem::Modulus],
        ProblemArg::ModulusPsd => vec![Problem::ModulusPsd],
        ProblemArg::ModulusInv => {
            if rank != n {
                return Err(CliError::Usage(
                    "modulus-inv requires an invertible base: --rank must equal --n".to_string(),
                ));
            }
            vec![Problem::ModulusInvertible]
        }
        ProblemArg::LemmaGt => vec![Problem::ProjectorLinearization],
        ProblemArg::LemmaGt1 => {
            let p = need_p()?;
            check_power_range(p)?;
            vec![Problem::ProjectedKernelPower { p }]
        }
        ProblemArg::LemmaGt2 => vec![Problem::ProjectorCrossTerm, Problem::ProjectorRangeTerm],
    };
    Ok((problems, rank))
}

pub fn cmd_order(args: &OrderArgs) -> Result<RunReport, CliError> {
    let tol = args.tol.to_tolerances();
    let (problems, rank) = problems_for(args)?;
    let (seed, seed_from_env) = resolve_seed(args.seed)?;

    if args.trials == 0 {
        return Err(CliError::Usage("--trials must be positive".to_string()));
    }
    let spectrum_ok = args.spectrum_lo.is_finite()
        && args.spectrum_hi.is_finite()
        && args.spectrum_lo > 0.0
        && args.spectrum_lo <= args.spectrum_hi;
    if !spectrum_ok {
        return Err(CliError::Usage(format!(
            "spectrum range [{}, {}] must satisfy 0 < lo <= hi",
            args.spectrum_lo, args.spectrum_hi
        )));
    }

    let scales = match &args.scales {
        Some(text) => parse_scales(text).map_err(CliError::Usage)?,
        None => default_scales(),
    };
    validate_scales(&scales).map_err(|e| CliError::Usage(e.to_string()))?;

    let mut fits = Vec::new();
    for problem in &problems {
        let reports = run_campaign(
            problem,
            args.n,
            rank,
            (args.spectrum_lo, args.spectrum_hi),
            args.trials,
            seed,
            &scales,
            args.slope_margin,
            &tol,
        )?;
        fits.extend(reports);
    }

    let pass = fits.iter().all(|r| r.pass);
    let min_slope = fits
        .iter()
        .map(|r| r.fitted_slope)
        .fold(f64::INFINITY, f64::min);

    let mut flags = BTreeMap::new();
    flags.insert("problem".into(), args.problem.as_str().to_string());
    flags.insert("n".into(), args.n.to_string());
    flags.insert("rank".into(), rank.to_string());
    flags.insert("trials".into(), args.trials.to_string());
    flags.insert(
        "scales".into(),
        scales
            .iter()
            .map(|t| format!("{t}"))
            .collect::<Vec<_>>()
            .join(","),
    );
    flags.insert(
        "spectrum".into(),
        format!("[{}, {}]", args.spectrum_lo, args.spectrum_hi),
    );
    flags.insert("force".into(), args.force.to_string());
    flags.insert("slope_margin".into(), format!("{}", args.slope_margin));
    if let Some(p) = args.p {
        flags.insert("p".into(), format!("{p}"));
    }
    if let Some(s) = args.s {
        flags.insert("s".into(), format!("{s}"));
    }

    let mut report = RunReport::new(
        "order".to_string(),
        ConfigEcho {
            tolerances: tol,
            seed: Some(seed),
            seed_from_env: seed_from_env.then_some(true),
            flags,
        },
        !args.no_timestamp,
    );
    report.order_fits = fits;
    report.summary = Summary {
        pass,
        notes: problems
            .iter()
            .map(|p| match p.expected_order() {
                ExpectedOrder::Known(r) => {
                    format!("{}: expected order {r}", p.name())
                }
                ExpectedOrder::Unguaranteed => {
                    format!("{}: no proven order, slope reported as-is", p.name())
                }
            })
            .collect(),
        metrics: {
            let mut m = BTreeMap::new();
            if min_slope.is_finite() {
                m.insert("min_slope".into(), min_slope);
            }
            m
        },
    };

    if let Some(csv) = &args.csv {
        write_error_csv(csv, &report.order_fits)?;
    }
    Ok(report)
}

#[derive(Debug, Args)]
pub struct WihlerArgs {
    /// Largest matrix dimension in the sweep; trials cycle 1..=n.
    #[arg(long, default_value_t = 8)]
    pub n: usize,
    /// Hölder exponent (p >= 1).
    #[arg(long)]
    pub p: f64,
    /// Number of random PSD pairs.
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// Campaign seed (overridden by MATPERTURB_SEED).
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Report destination (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Omit the timestamp so identical runs produce identical bytes.
    #[arg(long)]
    pub no_timestamp: bool,
    #[command(flatten)]
    pub tol: TolArgs,
}

pub fn cmd_wihler(args: &WihlerArgs) -> Result<RunReport, CliError> {
    let tol = args.tol.to_tolerances();
    if !args.p.is_finite() || args.p < 1.0 {
        return Err(CliError::Usage(format!(
            "--p {} must be at least 1 for the Hölder bound",
            args.p
        )));
    }
    if args.n == 0 || args.n > 64 {
        return Err(CliError::Usage(format!(
            "--n {} outside the supported range 1..=64",
            args.n
        )));
    }
    if args.trials == 0 {
        return Err(CliError::Usage("--trials must be positive".to_string()));
    }
    let (seed, seed_from_env) = resolve_seed(args.seed)?;

    let mut max_ratio: f64 = 0.0;
    let mut violations = 0usize;

    // the scalar sharp pair realizes the bound with equality and is
    // always part of the sweep
    let sharp = wihler_check(
        &HermitianMatrix::diagonal(&[0.0]),
        &HermitianMatrix::diagonal(&[0.37]),
        args.p,
        &tol,
    )?;
    max_ratio = max_ratio.max(sharp.ratio);
    if !sharp.holds {
        violations += 1;
    }

    for trial in 0..args.trials {
        let n = 1 + trial % args.n;
        let (a, z) = matperturb::random_psd_pair(n, trial_seed(seed, trial as u64))?;
        let check = wihler_check(&a, &z, args.p, &tol)?;
        max_ratio = max_ratio.max(check.ratio);
        if !check.holds {
            violations += 1;
        }
    }

    let mut flags = BTreeMap::new();
    flags.insert("n".into(), args.n.to_string());
    flags.insert("p".into(), format!("{}", args.p));
    flags.insert("trials".into(), args.trials.to_string());

    let mut report = RunReport::new(
        "wihler".to_string(),
        ConfigEcho {
            tolerances: tol,
            seed: Some(seed),
            seed_from_env: seed_from_env.then_some(true),
            flags,
        },
        !args.no_timestamp,
    );
    report.summary = Summary {
        pass: violations == 0,
        notes: vec![
            "the Hölder bound is stated and checked in the Frobenius norm".to_string(),
            "the scalar sharp pair (0, t) is included in every sweep".to_string(),
        ],
        metrics: {
            let mut m = BTreeMap::new();
            m.insert("max_ratio".into(), max_ratio);
            m.insert("violations".into(), violations as f64);
            m
        },
    };
    Ok(report)
}
