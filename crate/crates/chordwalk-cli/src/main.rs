//! Command-line front end: construct bodies, run chains, evaluate
//! convergence bounds, and compare chain output against ground-truth
//! oracles.
//!
//! Exit codes are part of the contract: 2 bad arguments, 3 body
//! construction failure, 4 runtime sampling/IO failure, 5 oracle
//! unavailable; `compare` exits 1 when a statistical band fails.

use chordwalk::bounds::{body_bound, log10_steps_for_tv, steps_for_tv, tv_envelope, BoundVariant};
use chordwalk::diagnostics::{autocorrelation, clt_batch_means, lil_envelope, moment_report, projected_tv};
use chordwalk::geometry::{make_body, Body, BodyDescriptor};
use chordwalk::oracle::oracle_for;
use chordwalk::sampler::{child_seed, run_chain, Algorithm, Chain, ChainConfig, RandomSource};
use clap::{Args, Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(
    name = "chordwalk",
    version,
    about = "Uniform sampling inside convex bodies via chord-walk Markov chains"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a chain and write the points as CSV or JSONL
    Sample(SampleArgs),
    /// Print the Doeblin convergence bound for a body
    Bound(BoundArgs),
    /// Run chain and oracle side by side and report diagnostics
    Compare(CompareArgs),
}

#[derive(Args)]
struct SampleArgs {
    /// Body descriptor, e.g. ball:d=3, simplex:n=5, birkhoff:n=3, ppt:k=2
    descriptor: String,
    #[arg(long, default_value = "random_direction")]
    algorithm: String,
    /// Kernel steps after burn-in (accepts scientific notation, e.g. 1e6)
    #[arg(long, default_value = "1000", value_parser = parse_count)]
    steps: u64,
    #[arg(long = "burn-in", default_value = "0", value_parser = parse_count)]
    burn_in: u64,
    /// Emit every thin-th point
    #[arg(long, default_value = "1", value_parser = parse_count)]
    thin: u64,
    #[arg(long, default_value = "0")]
    seed: u64,
    /// Independent chains with derived seeds; rows grouped by chain id
    #[arg(long, default_value = "1", value_parser = parse_count)]
    chains: u64,
    #[arg(long, value_enum, default_value = "csv")]
    format: OutputFormat,
    /// Output file; stdout when omitted. A <out>.manifest.json sidecar
    /// records the run parameters and the output digest.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Emit natural (ambient) coordinates: matrix entries for
    /// stochastic/birkhoff bodies, re,im pairs for spectral bodies
    #[arg(long)]
    ambient: bool,
    /// Assert that a lifted body's density is quasi-concave (required to
    /// sample lifted bodies; chords of non-quasi-concave lifts are not
    /// intervals and the walk would be biased)
    #[arg(long = "assert-quasiconcave")]
    assert_quasiconcave: bool,
}

#[derive(Args)]
struct BoundArgs {
    descriptor: String,
    #[arg(long, default_value = "random_direction")]
    algorithm: String,
    /// as_stated keeps the published 2/d prefactor; conservative halves it
    #[arg(long, default_value = "conservative")]
    variant: String,
    /// Also print the step count n with C*alpha^n <= eps
    #[arg(long)]
    eps: Option<f64>,
}

#[derive(Args)]
struct CompareArgs {
    descriptor: String,
    #[arg(long, default_value = "random_direction")]
    algorithm: String,
    #[arg(long, default_value = "100000", value_parser = parse_count)]
    steps: u64,
    #[arg(long = "burn-in", default_value = "1000", value_parser = parse_count)]
    burn_in: u64,
    #[arg(long, default_value = "1", value_parser = parse_count)]
    thin: u64,
    #[arg(long, default_value = "0")]
    seed: u64,
    /// Bins per axis for projected histograms; 0 picks bins from the
    /// sample count so the multinomial noise floor stays under the band
    #[arg(long, default_value = "0", value_parser = parse_count)]
    bins: u64,
    /// Pass band for projected 2-D total variation
    #[arg(long = "tv-band", default_value_t = 0.05)]
    tv_band: f64,
    /// Pass band (in combined standard errors) for mean gaps
    #[arg(long = "mean-sigmas", default_value_t = 4.0)]
    mean_sigmas: f64,
    #[arg(long, value_enum, default_value = "text")]
    format: ReportFormat,
    #[arg(long = "assert-quasiconcave")]
    assert_quasiconcave: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Jsonl,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

/// Counts accept plain integers and scientific notation ("1e6", "2.5e5").
fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    let x: f64 = s.parse().map_err(|_| format!("not a count: {s:?}"))?;
    if x >= 0.0 && x.fract() == 0.0 && x <= u64::MAX as f64 {
        Ok(x as u64)
    } else {
        Err(format!("not a non-negative integer count: {s:?}"))
    }
}

enum CliError {
    BadArgs(String),
    Construction(String),
    Runtime(String),
    OracleUnavailable(String),
    BandsFailed,
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::BandsFailed => 1,
            CliError::BadArgs(_) => 2,
            CliError::Construction(_) => 3,
            CliError::Runtime(_) => 4,
            CliError::OracleUnavailable(_) => 5,
        }
    }

    fn message(&self) -> Option<&str> {
        match self {
            CliError::BadArgs(m)
            | CliError::Construction(m)
            | CliError::Runtime(m)
            | CliError::OracleUnavailable(m) => Some(m),
            CliError::BandsFailed => None,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sample(args) => cmd_sample(args),
        Command::Bound(args) => cmd_bound(args),
        Command::Compare(args) => cmd_compare(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            if let Some(msg) = err.message() {
                eprintln!("error: {msg}");
            }
            ExitCode::from(err.exit_code())
        }
    }
}

fn parse_descriptor(text: &str) -> Result<BodyDescriptor, CliError> {
    text.parse::<BodyDescriptor>()
        .map_err(|e| CliError::BadArgs(e.to_string()))
}

fn parse_algorithm(text: &str) -> Result<Algorithm, CliError> {
    text.parse::<Algorithm>().map_err(CliError::BadArgs)
}

fn build_body(descriptor: &BodyDescriptor) -> Result<Box<dyn Body>, CliError> {
    make_body(descriptor).map_err(|e| CliError::Construction(e.to_string()))
}

fn guard_lifted(descriptor: &BodyDescriptor, asserted: bool) -> Result<(), CliError> {
    if matches!(descriptor, BodyDescriptor::Lifted { .. }) && !asserted {
        return Err(CliError::BadArgs(
            "sampling a lifted body requires --assert-quasiconcave: chords of \
             non-quasi-concave densities are not intervals"
                .into(),
        ));
    }
    Ok(())
}

fn guard_fixed_basis(body: &dyn Body, algorithm: Algorithm) -> Result<(), CliError> {
    if algorithm == Algorithm::FixedBasis && body.metadata().basis().is_none() {
        return Err(CliError::BadArgs(format!(
            "{} has no catalogued accessibility constant/move set; \
             use --algorithm random_direction",
            body.descriptor()
        )));
    }
    Ok(())
}

fn cmd_sample(args: SampleArgs) -> Result<(), CliError> {
    let descriptor = parse_descriptor(&args.descriptor)?;
    let algorithm = parse_algorithm(&args.algorithm)?;
    guard_lifted(&descriptor, args.assert_quasiconcave)?;
    if args.steps == 0 || args.thin == 0 || args.chains == 0 {
        return Err(CliError::BadArgs("steps, thin and chains must be >= 1".into()));
    }
    let body = build_body(&descriptor)?;
    guard_fixed_basis(body.as_ref(), algorithm)?;

    // Every chain derives its own stream from the user seed, chain 0
    // included, so adding chains never perturbs existing ones.
    let chain_outputs: Vec<Result<Vec<(u64, Vec<f64>)>, CliError>> = std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for chain_id in 0..args.chains {
            let body = body.as_ref();
            let args = &args;
            handles.push(scope.spawn(move || {
                let cfg = ChainConfig {
                    algorithm,
                    steps: args.steps,
                    burn_in: args.burn_in,
                    thin: args.thin,
                    seed: child_seed(args.seed, chain_id),
                    start: None,
                };
                let chain =
                    Chain::new(body, &cfg).map_err(|e| CliError::Runtime(e.to_string()))?;
                let mut rows = Vec::new();
                for (index, point) in chain.enumerate() {
                    let point = point.map_err(|e| CliError::Runtime(e.to_string()))?;
                    let step = (index as u64 + 1) * args.thin;
                    let coords = if args.ambient {
                        body.ambient(&point).map_err(|e| CliError::Runtime(e.to_string()))?
                    } else {
                        point
                    };
                    rows.push((step, coords));
                }
                Ok(rows)
            }));
        }
        handles.into_iter().map(|h| h.join().expect("chain thread panicked")).collect()
    });

    let mut buffer: Vec<u8> = Vec::new();
    let width = chain_outputs
        .first()
        .and_then(|r| r.as_ref().ok())
        .and_then(|rows| rows.first())
        .map(|(_, coords)| coords.len());
    match args.format {
        OutputFormat::Csv => {
            writeln!(
                buffer,
                "# chordwalk v{VERSION} body={descriptor} algorithm={algorithm} seed={}",
                args.seed
            )
            .unwrap();
            let labels: Vec<String> =
                (0..width.unwrap_or(0)).map(|i| format!("c{i}")).collect();
            writeln!(buffer, "chain,step,{}", labels.join(",")).unwrap();
            for (chain_id, rows) in chain_outputs.iter().enumerate() {
                let rows = rows.as_ref().map_err(clone_err)?;
                for (step, coords) in rows {
                    write!(buffer, "{chain_id},{step}").unwrap();
                    for v in coords {
                        // 17 significant digits: round-trips f64 exactly.
                        write!(buffer, ",{v:.16e}").unwrap();
                    }
                    buffer.push(b'\n');
                }
            }
        }
        OutputFormat::Jsonl => {
            for (chain_id, rows) in chain_outputs.iter().enumerate() {
                let rows = rows.as_ref().map_err(clone_err)?;
                for (step, coords) in rows {
                    let obj = serde_json::json!({
                        "chain": chain_id as u64,
                        "step": step,
                        "coords": coords,
                    });
                    writeln!(buffer, "{obj}").unwrap();
                }
            }
        }
    }

    match &args.out {
        Some(path) => {
            std::fs::write(path, &buffer).map_err(|e| CliError::Runtime(e.to_string()))?;
            write_manifest(path, &args, &descriptor, algorithm, &buffer)?;
        }
        None => {
            std::io::stdout()
                .write_all(&buffer)
                .map_err(|e| CliError::Runtime(e.to_string()))?;
        }
    }
    Ok(())
}

fn clone_err(e: &CliError) -> CliError {
    match e {
        CliError::BadArgs(m) => CliError::BadArgs(m.clone()),
        CliError::Construction(m) => CliError::Construction(m.clone()),
        CliError::Runtime(m) => CliError::Runtime(m.clone()),
        CliError::OracleUnavailable(m) => CliError::OracleUnavailable(m.clone()),
        CliError::BandsFailed => CliError::BandsFailed,
    }
}

fn write_manifest(
    out: &Path,
    args: &SampleArgs,
    descriptor: &BodyDescriptor,
    algorithm: Algorithm,
    data: &[u8],
) -> Result<(), CliError> {
    let mut hasher = Sha256::new();
    hasher.update(data);
    let digest: String = hasher.finalize().iter().map(|b| format!("{b:02x}")).collect();
    let manifest = serde_json::json!({
        "tool": "chordwalk",
        "version": VERSION,
        "body": descriptor.to_string(),
        "algorithm": algorithm.to_string(),
        "seed": args.seed,
        "steps": args.steps,
        "burn_in": args.burn_in,
        "thin": args.thin,
        "chains": args.chains,
        "format": match args.format { OutputFormat::Csv => "csv", OutputFormat::Jsonl => "jsonl" },
        "ambient": args.ambient,
        "timestamp": chrono::Utc::now().to_rfc3339(),
        "sha256": digest,
    });
    let mut path = out.as_os_str().to_owned();
    path.push(".manifest.json");
    std::fs::write(
        PathBuf::from(path),
        serde_json::to_string_pretty(&manifest).unwrap(),
    )
    .map_err(|e| CliError::Runtime(e.to_string()))
}

fn cmd_bound(args: BoundArgs) -> Result<(), CliError> {
    let descriptor = parse_descriptor(&args.descriptor)?;
    let algorithm = parse_algorithm(&args.algorithm)?;
    let variant: BoundVariant = args.variant.parse().map_err(CliError::BadArgs)?;
    let body = build_body(&descriptor)?;
    let bound = body_bound(body.metadata(), algorithm, variant)
        .map_err(|e| CliError::BadArgs(e.to_string()))?;
    println!("body        = {descriptor}");
    println!("algorithm   = {algorithm}");
    if algorithm == Algorithm::RandomDirection {
        let variant_name = match variant {
            BoundVariant::AsStated => "as_stated",
            BoundVariant::Conservative => "conservative",
        };
        println!("variant     = {variant_name}");
    }
    println!("M           = {}", bound.m);
    println!("theta       = {:.17e}", bound.theta);
    println!("log10_theta = {:.6}", bound.log_theta / std::f64::consts::LN_10);
    println!("alpha       = {:.17}", bound.alpha);
    println!("C           = {:.17}", bound.c);
    if let Some(eps) = args.eps {
        if !(eps > 0.0) {
            return Err(CliError::BadArgs("--eps must be positive".into()));
        }
        match steps_for_tv(&bound, eps).map_err(|e| CliError::BadArgs(e.to_string()))? {
            Some(n) => {
                println!("n(eps={eps:.3e}) = {n}  [C*alpha^n = {:.3e}]", tv_envelope(&bound, n))
            }
            None => {
                let log10_n = log10_steps_for_tv(&bound, eps)
                    .map_err(|e| CliError::BadArgs(e.to_string()))?;
                println!("n(eps={eps:.3e}) ~ 10^{log10_n:.2}");
            }
        }
    }
    Ok(())
}

struct CheckRow {
    name: String,
    value: f64,
    band: String,
    pass: bool,
}

fn cmd_compare(args: CompareArgs) -> Result<(), CliError> {
    let descriptor = parse_descriptor(&args.descriptor)?;
    let algorithm = parse_algorithm(&args.algorithm)?;
    guard_lifted(&descriptor, args.assert_quasiconcave)?;
    let body = build_body(&descriptor)?;
    guard_fixed_basis(body.as_ref(), algorithm)?;
    let mut oracle = oracle_for(body.as_ref()).ok_or_else(|| {
        CliError::OracleUnavailable(format!("no exact or rejection oracle for {descriptor}"))
    })?;

    let cfg = ChainConfig {
        algorithm,
        steps: args.steps,
        burn_in: args.burn_in,
        thin: args.thin,
        seed: child_seed(args.seed, 0),
        start: None,
    };
    let chain = run_chain(body.as_ref(), &cfg).map_err(|e| CliError::Runtime(e.to_string()))?;
    // Dedicated oracle stream, disjoint from every chain stream.
    let mut oracle_rng = RandomSource::from_seed(child_seed(args.seed, 0x4F52_4143_4C45));
    let reference = oracle
        .draw_many(chain.len(), &mut oracle_rng)
        .map_err(|e| CliError::Runtime(e.to_string()))?;

    let d = body.dim();
    let chain_moments = moment_report(&chain).map_err(|e| CliError::Runtime(e.to_string()))?;
    let oracle_moments =
        moment_report(&reference).map_err(|e| CliError::Runtime(e.to_string()))?;

    let mut checks: Vec<CheckRow> = Vec::new();

    // Mean gaps in combined standard errors; the chain's standard error is
    // inflated by its integrated autocorrelation time.
    for i in 0..d {
        let series: Vec<f64> = chain.iter().map(|p| p[i]).collect();
        let tau = integrated_autocorrelation(&series);
        let se_chain = chain_moments.std_errors[i] * tau.sqrt();
        let se = (se_chain.powi(2) + oracle_moments.std_errors[i].powi(2)).sqrt();
        let gap = (chain_moments.mean[i] - oracle_moments.mean[i]).abs();
        let sigmas = if se > 0.0 { gap / se } else { 0.0 };
        checks.push(CheckRow {
            name: format!("mean_gap_sigma[c{i}]"),
            value: sigmas,
            band: format!("<{}", args.mean_sigmas),
            pass: sigmas < args.mean_sigmas,
        });
    }

    // Variance ratios (chain vs oracle) on each coordinate.
    for i in 0..d {
        let vc = chain_moments.covariance[(i, i)];
        let vo = oracle_moments.covariance[(i, i)];
        let ratio = if vo > 0.0 { vc / vo } else { 1.0 };
        checks.push(CheckRow {
            name: format!("variance_ratio[c{i}]"),
            value: ratio,
            band: "in [0.9, 1.1]".into(),
            pass: (0.9..=1.1).contains(&ratio),
        });
    }

    // Projected 2-D total variation on leading coordinate pairs. The TV
    // noise floor of two empirical histograms is about 0.56 sqrt(B/n) for
    // B occupied cells, so the automatic grid keeps B <= 0.002 n.
    let bins = if args.bins == 0 {
        (((0.002 * chain.len() as f64).sqrt()) as u64).clamp(5, 20)
    } else {
        args.bins
    };
    let axes: Vec<(usize, usize)> = match d {
        1 => vec![],
        2 => vec![(0, 1)],
        _ => vec![(0, 1), (1, 2), (0, 2)],
    };
    for pair in axes {
        let tv = projected_tv(&chain, &reference, pair, bins as usize)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        checks.push(CheckRow {
            name: format!("projected_tv[c{},c{}]", pair.0, pair.1),
            value: tv,
            band: format!("<={}", args.tv_band),
            pass: tv <= args.tv_band,
        });
    }

    // Mixing diagnostics on the first coordinate.
    let series: Vec<f64> = chain.iter().map(|p| p[0]).collect();
    if let Ok(rho) = autocorrelation(&series, 1) {
        checks.push(CheckRow {
            name: "autocorrelation_lag1[c0]".into(),
            value: rho[1],
            band: "|rho| < 0.99".into(),
            pass: rho[1].abs() < 0.99,
        });
    }
    if series.len() >= 20_000 {
        let short = clt_batch_means(&series, series.len() / 100).unwrap();
        let long = clt_batch_means(&series, series.len() / 1000).unwrap();
        let ratio = (short.batch_variance * short.batch_len as f64)
            / (long.batch_variance * long.batch_len as f64);
        checks.push(CheckRow {
            name: "clt_variance_scaling".into(),
            value: ratio,
            band: "in [0.5, 2]".into(),
            pass: (0.5..=2.0).contains(&ratio),
        });
    }
    let centered: Vec<f64> = series.iter().map(|x| x - oracle_moments.mean[0]).collect();
    if let Ok(lil) = lil_envelope(&centered) {
        checks.push(CheckRow {
            name: "lil_envelope[c0]".into(),
            value: lil,
            band: "<=3".into(),
            pass: lil <= 3.0,
        });
    }

    let overall = checks.iter().all(|c| c.pass);
    match args.format {
        ReportFormat::Text => {
            println!(
                "# chordwalk compare body={descriptor} algorithm={algorithm} seed={} n={} bins={bins}",
                args.seed,
                chain.len()
            );
            if let Some(est) = oracle.acceptance() {
                println!(
                    "# oracle acceptance rate: {:.4} +- {:.4} ({}/{})",
                    est.rate, est.std_error, est.accepted, est.proposed
                );
            }
            println!("{:<28} {:>12} {:>16} {:>8}", "statistic", "value", "band", "verdict");
            for c in &checks {
                println!(
                    "{:<28} {:>12.5} {:>16} {:>8}",
                    c.name,
                    c.value,
                    c.band,
                    if c.pass { "PASS" } else { "FAIL" }
                );
            }
            println!("overall: {}", if overall { "PASS" } else { "FAIL" });
        }
        ReportFormat::Json => {
            let report = serde_json::json!({
                "body": descriptor.to_string(),
                "algorithm": algorithm.to_string(),
                "seed": args.seed,
                "samples": chain.len(),
                "bins": bins,
                "oracle_acceptance": oracle.acceptance().map(|e| {
                    serde_json::json!({
                        "rate": e.rate,
                        "std_error": e.std_error,
                        "accepted": e.accepted,
                        "proposed": e.proposed,
                    })
                }),
                "checks": checks.iter().map(|c| serde_json::json!({
                    "statistic": c.name,
                    "value": c.value,
                    "band": c.band,
                    "pass": c.pass,
                })).collect::<Vec<_>>(),
                "overall": overall,
            });
            println!("{}", serde_json::to_string_pretty(&report).unwrap());
        }
    }
    if overall {
        Ok(())
    } else {
        Err(CliError::BandsFailed)
    }
}

/// Integrated autocorrelation time `1 + 2 sum rho_k`, truncated at the
/// first non-positive estimate (initial positive sequence rule).
fn integrated_autocorrelation(series: &[f64]) -> f64 {
    let max_lag = 200.min(series.len() / 10);
    match autocorrelation(series, max_lag) {
        Ok(rho) => {
            let mut tau = 1.0;
            for r in rho.iter().skip(1) {
                if *r <= 0.0 {
                    break;
                }
                tau += 2.0 * r;
            }
            tau
        }
        Err(_) => 1.0,
    }
}
