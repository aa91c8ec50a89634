use clap::{Args, Parser, Subcommand, ValueEnum};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use wrmt::kernels::{density_curve, CurveMeta, DensityCurve, Grid, KernelSet};
use wrmt::microscopic::{partition_nf1_micro, MicroDensity};
use wrmt::montecarlo::{
    sample_spectra, write_archive, ArchiveHeader, Ensemble, Histogram, Model2Params, RngConfig, Window,
};
use wrmt::{MicroParams, ModelParams};

mod verify;

const EXIT_INVALID: u8 = 1;
const EXIT_VERIFY: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
/// Fraction of histogram bins that must lie within three standard errors.
const COMPARE_PASS_FRACTION: f64 = 0.95;

#[derive(Parser, Debug)]
#[command(name = "wrmt", version, about = "Spectral densities of the Hermitian Wilson Dirac operator random matrix model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Finite-n density rho_1, or a slice of rho_k with --k and --points
    Density {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        out: OutputArgs,
        /// Order of the correlation function
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Comma-separated fixed arguments of rho_k (k - 1 values)
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        points: Vec<f64>,
    },
    /// Microscopic density in rescaled units
    DensityMicro {
        #[command(flatten)]
        micro: MicroArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Monte Carlo histogram of the eigenvalues
    Mc {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        out: OutputArgs,
        #[command(flatten)]
        rng: RngArgs,
        /// Which ensemble to sample
        #[arg(long, value_enum, default_value_t = EnsembleArg::One)]
        ensemble: EnsembleArg,
        /// Bin in microscopic units sqrt(2n) * lambda
        #[arg(long)]
        rescale: bool,
        /// Also write the sampled spectra to this binary archive
        #[arg(long)]
        archive: Option<PathBuf>,
    },
    /// Analytic density against a Monte Carlo histogram, with per-bin z-scores
    Compare {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        out: OutputArgs,
        #[command(flatten)]
        rng: RngArgs,
    },
    /// One-flavour microscopic partition function in both representations
    Partition {
        #[command(flatten)]
        micro: MicroArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Run the invariant suite and write a report
    Verify {
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Args, Debug, Clone, Copy)]
struct ModelArgs {
    #[arg(long, default_value_t = 4)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    nu: usize,
    #[arg(long, default_value_t = 0.3)]
    a: f64,
    #[arg(long, default_value_t = 0.0)]
    m: f64,
    /// Grid (or histogram window and bin count) as min:max:points
    #[arg(long, default_value = "-4:4:201", allow_hyphen_values = true)]
    grid: Grid,
}

#[derive(Args, Debug)]
struct MicroArgs {
    #[arg(long, default_value_t = 0)]
    nu: usize,
    #[arg(long, default_value_t = 1.0)]
    mhat: f64,
    #[arg(long, default_value_t = 0.1)]
    ahat: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    zhat: f64,
    #[arg(long, default_value = "-6:6:121", allow_hyphen_values = true)]
    grid: Grid,
}

#[derive(Args, Debug)]
struct RngArgs {
    #[arg(long, default_value_t = 100_000)]
    draws: u64,
    #[arg(long, default_value_t = RngConfig::default().seed)]
    seed: u64,
    #[arg(long, default_value_t = RngConfig::default().streams)]
    streams: u64,
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Output file; standard output if absent
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum EnsembleArg {
    One,
    Two,
}

#[derive(Debug)]
enum Failure {
    Invalid(String),
    Verify(String),
    Numerical(String),
}

impl From<wrmt::Error> for Failure {
    fn from(e: wrmt::Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Invalid(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn emit(out: &OutputArgs, text: &str) -> Outcome {
    match &out.out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn emit_curve(out: &OutputArgs, curve: &DensityCurve) -> Outcome {
    if let Some(k) = curve.values.iter().position(|v| !v.is_finite()) {
        return Err(Failure::Numerical(format!("non-finite value at x = {}", curve.grid[k])));
    }
    let text = match out.format {
        Format::Csv => curve.to_csv(),
        Format::Json => curve.to_json() + "\n",
    };
    emit(out, &text)
}

fn json_text(v: &serde_json::Value) -> Result<String, Failure> {
    serde_json::to_string_pretty(v)
        .map(|s| s + "\n")
        .map_err(|e| Failure::Invalid(e.to_string()))
}

fn model(args: &ModelArgs) -> Result<ModelParams, Failure> {
    Ok(ModelParams::new(args.n, args.nu, args.a, args.m)?)
}

fn grid_checked(grid: &Grid) -> Result<Grid, Failure> {
    if grid.points < 2 {
        return Err(Failure::Invalid("grid needs at least 2 points".into()));
    }
    Ok(*grid)
}

fn rng(args: &RngArgs) -> Result<RngConfig, Failure> {
    Ok(RngConfig::new(args.seed, args.streams)?)
}

fn density(model_args: &ModelArgs, out: &OutputArgs, k: usize, points: &[f64]) -> Outcome {
    let p = model(model_args)?;
    let grid = grid_checked(&model_args.grid)?;
    if k == 0 || points.len() + 1 != k {
        return Err(Failure::Invalid(format!("--k {k} needs {} fixed --points", k.saturating_sub(1))));
    }
    if k == 1 {
        return emit_curve(out, &density_curve(&p, &grid)?);
    }
    let ks = KernelSet::new(p)?;
    let xs = grid.abscissae();
    let values = xs
        .iter()
        .map(|&x| {
            let mut args = vec![x];
            args.extend_from_slice(points);
            ks.rho_k(&args)
        })
        .collect::<wrmt::Result<Vec<f64>>>()?;
    let params = serde_json::json!({ "model": p, "k": k, "fixed": points });
    emit_curve(out, &DensityCurve::new(xs, values, CurveMeta::new("rho_k_slice", params)))
}

fn density_micro(args: &MicroArgs, out: &OutputArgs) -> Outcome {
    let mp = MicroParams::new(args.mhat, args.ahat, args.nu)?;
    let grid = grid_checked(&args.grid)?;
    let d = MicroDensity::new(mp)?;
    let xs = grid.abscissae();
    let values = xs.iter().map(|&x| d.density(x)).collect::<wrmt::Result<Vec<f64>>>()?;
    let kind = if mp.nu == 0 { "rho_s" } else { "rho_s_nu1" };
    let params = serde_json::to_value(mp).map_err(|e| Failure::Invalid(e.to_string()))?;
    emit_curve(out, &DensityCurve::new(xs, values, CurveMeta::new(kind, params)))
}

fn window(grid: &Grid) -> Result<(Window, usize), Failure> {
    let g = grid_checked(grid)?;
    Ok((Window::new(g.min, g.max)?, g.points))
}

fn mc(model_args: &ModelArgs, out: &OutputArgs, rng_args: &RngArgs, ensemble: EnsembleArg, rescale: bool, archive: Option<&PathBuf>) -> Outcome {
    let cfg = rng(rng_args)?;
    let (w, bins) = window(&model_args.grid)?;
    let ens = match ensemble {
        EnsembleArg::One => Ensemble::Model1(model(model_args)?),
        EnsembleArg::Two => {
            let ModelArgs { n, nu, a, m, .. } = *model_args;
            Ensemble::Model2(Model2Params::new(n, nu, a, m)?)
        }
    };
    let scale = rescale.then(|| (2.0 * model_args.n as f64).sqrt());
    let (h, skipped) = match (archive, ens) {
        (Some(path), Ensemble::Model1(p)) => {
            let run = sample_spectra(&ens, &cfg, rng_args.draws)?;
            write_archive(path, &ArchiveHeader::new(&p, run.samples.len() as u64)?, &run.samples)?;
            let mut h = Histogram::new(w, bins, scale)?;
            for s in &run.samples {
                h.add(&s.eigenvalues);
            }
            (h, run.skipped)
        }
        (Some(_), Ensemble::Model2(_)) => {
            return Err(Failure::Invalid("archives hold the first ensemble only".into()));
        }
        (None, _) => Histogram::sample(&ens, &cfg, rng_args.draws, w, bins, scale)?,
    };
    if skipped > 0 {
        eprintln!("{skipped} draws skipped after eigensolver failures");
    }
    let params = serde_json::json!({ "ensemble": ens, "rng": cfg, "skipped": skipped });
    emit_curve(out, &h.to_curve("mc_histogram", params)?)
}

fn compare(model_args: &ModelArgs, out: &OutputArgs, rng_args: &RngArgs) -> Outcome {
    let p = model(model_args)?;
    let cfg = rng(rng_args)?;
    let (w, bins) = window(&model_args.grid)?;
    let (h, skipped) = Histogram::sample(&Ensemble::Model1(p), &cfg, rng_args.draws, w, bins, None)?;
    let ks = KernelSet::new(p)?;
    let centres = h.centres();
    let analytic = centres.iter().map(|&x| ks.rho1(x)).collect::<wrmt::Result<Vec<f64>>>()?;
    // z-scores against bin averages of the analytic density
    let mut failure = None;
    let z = h.z_scores(|x| {
        ks.rho1(x).unwrap_or_else(|e| {
            failure.get_or_insert(e);
            f64::NAN
        })
    });
    if let Some(e) = failure {
        return Err(e.into());
    }
    let within = z.iter().filter(|z| z.abs() <= 3.0).count();
    let fraction = within as f64 / bins as f64;
    let pass = fraction >= COMPARE_PASS_FRACTION;
    let summary = format!(
        "{} {within}/{bins} bins within 3 sigma ({:.1}%), {} draws",
        if pass { "PASS" } else { "FAIL" },
        100.0 * fraction,
        h.draws
    );
    let density = h.density();
    let errors = h.standard_errors();
    let text = match out.format {
        Format::Csv => {
            let mut s = String::from("x,analytic,mc,se,z\n");
            for k in 0..bins {
                s += &format!("{},{},{},{},{}\n", centres[k], analytic[k], density[k], errors[k], z[k]);
            }
            s
        }
        Format::Json => json_text(&serde_json::json!({
            "meta": CurveMeta::new("compare", serde_json::json!({ "model": p, "rng": cfg, "draws": rng_args.draws, "skipped": skipped })),
            "x": centres,
            "analytic": analytic,
            "mc": density,
            "se": errors,
            "z": z,
            "fraction_within_3_sigma": fraction,
            "pass": pass,
        }))?,
    };
    emit(out, &text)?;
    eprintln!("{summary}");
    if pass {
        Ok(())
    } else {
        Err(Failure::Verify(summary))
    }
}

fn partition(args: &MicroArgs, out: &OutputArgs) -> Outcome {
    let mp = MicroParams::new(args.mhat, args.ahat, args.nu)?.with_z(args.zhat);
    let v = partition_nf1_micro(&mp)?;
    let text = match out.format {
        Format::Csv => format!(
            "m_hat,z_hat,a_hat,nu,angular,gaussian,relative_discrepancy\n{},{},{},{},{},{},{}\n",
            mp.m_hat, mp.z_hat, mp.a_hat, mp.nu, v.angular, v.gaussian, v.relative_discrepancy
        ),
        Format::Json => json_text(&serde_json::json!({ "params": mp, "values": v }))?,
    };
    emit(out, &text)
}

fn run(cli: Cli) -> Outcome {
    match &cli.command {
        Command::Density { model, out, k, points } => density(model, out, *k, points),
        Command::DensityMicro { micro, out } => density_micro(micro, out),
        Command::Mc { model, out, rng, ensemble, rescale, archive } => mc(model, out, rng, *ensemble, *rescale, archive.as_ref()),
        Command::Compare { model, out, rng } => compare(model, out, rng),
        Command::Partition { micro, out } => partition(micro, out),
        Command::Verify { out } => {
            let report = verify::run_suite();
            let text = match out.format {
                Format::Csv => report.to_csv(),
                Format::Json => json_text(&serde_json::to_value(&report).map_err(|e| Failure::Invalid(e.to_string()))?)?,
            };
            emit(out, &text)?;
            report.outcome()
        }
    }
}

fn configure_threads() -> Outcome {
    let Ok(value) = std::env::var("WRMT_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Failure::Invalid(format!("WRMT_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::Invalid(e.to_string()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match configure_threads().and_then(|_| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INVALID)
        }
        Err(Failure::Verify(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(EXIT_VERIFY)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical diagnostic: {msg}");
            ExitCode::from(EXIT_NUMERICAL)
        }
    }
}
