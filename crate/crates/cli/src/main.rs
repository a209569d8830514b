//! `skago`: batch command line for the secret key agreement toolkit.
//!
//! Exit codes: 0 success, 2 usage or validation, 3 resource cap, 4
//! infeasible parameters.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use skago::bounds::exact::{exact_protocol_eval, ExactOptions, MIN_SEED_SAMPLES};
use skago::bounds::mixed::{bsc_component, mixed_source_rates, mixture_spectral_rate};
use skago::bounds::np::beta_epsilon;
use skago::bounds::second_order::{to_csv, BerryEsseen, BoundPoint};
use skago::bounds::theorems::{theorem2_bounds, theorem5_bounds};
use skago::prob::{density_stats, example1_pmf, Example1ClosedForms, JointPmf, Pmf};
use skago::protocol::{monte_carlo_traced, Protocol, SessionConfig, Variant};
use skago::reconciliation::{SliceSpec, DEFAULT_DECODE_CAP};
use skago::source::SourceModel;
use skago::spectrum::{block_spectrum, DensityKind, DEFAULT_ATOM_CAP};
use skago::{Error, Result};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "skago", version, about = "Secret key agreement: simulation, exact evaluation and finite-length bounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Second-order lower and upper key-length curves.
    Bounds(BoundsArgs),
    /// Monte Carlo over protocol sessions.
    Simulate(SimulateArgs),
    /// Exact reliability and secrecy with the matching theorem bounds.
    Exact(ExactArgs),
    /// Neyman-Pearson β_ε between two pmfs.
    Beta(BetaArgs),
    /// Rates for the two-component binary mixed source.
    Mixed(MixedArgs),
    /// Information-density statistics of a single-letter source.
    Stats(StatsArgs),
}

#[derive(Args, Serialize, Clone)]
struct SourceArgs {
    /// JSON source file: `{"nx","ny","nz","p"}` or `{"components": [{"weight", ...}]}`.
    #[arg(long, conflicts_with = "example1")]
    source: Option<PathBuf>,
    /// Doubly symmetric source with crossovers α₀ (Y from Z) and α₁ (X from Y).
    #[arg(long, num_args = 2, value_names = ["A0", "A1"])]
    example1: Option<Vec<f64>>,
}

#[derive(Args, Clone)]
struct OutputArgs {
    /// Output path; a directory for per-curve CSV files.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn parse_seed(s: &str) -> std::result::Result<u64, String> {
    let t = s.trim();
    let t = t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")).unwrap_or(t);
    u64::from_str_radix(t, 16).map_err(|e| format!("seed must be hex: {e}"))
}

#[derive(Args, Serialize, Clone)]
struct SeedArgs {
    /// Master seed in hex.
    #[arg(long, env = "SKAGO_SEED", value_parser = parse_seed, default_value = "0")]
    seed: u64,
}

#[derive(Args, Serialize, Clone)]
struct BoundsArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long, value_delimiter = ',', default_value = "1000,3000,10000,30000,100000,1000000")]
    n: Vec<u64>,
    #[arg(long = "eps-plus-delta", value_delimiter = ',', default_value = "0.01,0.05,0.1")]
    eps_plus_delta: Vec<f64>,
    /// Slice width.
    #[arg(long = "Delta", default_value_t = 1.0)]
    width: f64,
    /// Use the standard Berry-Esseen remainder instead of the printed one.
    #[arg(long)]
    standard_berry_esseen: bool,
    #[command(flatten)]
    seed: SeedArgs,
    #[command(flatten)]
    #[serde(skip)]
    output: OutputArgs,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum, Serialize)]
enum VariantArg {
    P1,
    P2Secrecy,
    P2Reliability,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::P1 => Variant::P1,
            VariantArg::P2Secrecy => Variant::P2Secrecy,
            VariantArg::P2Reliability => Variant::P2Reliability,
        }
    }
}

#[derive(Args, Serialize, Clone)]
struct ProtocolArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Blocklength.
    #[arg(long, default_value_t = 8)]
    n: usize,
    #[arg(long, value_enum, default_value_t = VariantArg::P1)]
    variant: VariantArg,
    #[arg(long, default_value_t = 0.0)]
    lambda_min: f64,
    /// Defaults to the largest block density value plus Δ.
    #[arg(long)]
    lambda_max: Option<f64>,
    #[arg(long = "Delta", default_value_t = 1.0)]
    width: f64,
    #[arg(long, default_value_t = 4.0)]
    gamma: f64,
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    #[arg(long, default_value_t = 1)]
    key_bits: usize,
}

#[derive(Args, Serialize, Clone)]
struct SimulateArgs {
    #[command(flatten)]
    protocol: ProtocolArgs,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    /// Candidate enumeration cap per decode.
    #[arg(long, default_value_t = DEFAULT_DECODE_CAP)]
    cap: usize,
    /// Per-session JSON-lines trace.
    #[arg(long)]
    #[serde(skip)]
    trace: Option<PathBuf>,
    #[command(flatten)]
    seed: SeedArgs,
    #[command(flatten)]
    #[serde(skip)]
    output: OutputArgs,
}

#[derive(Args, Serialize, Clone)]
struct ExactArgs {
    #[command(flatten)]
    protocol: ProtocolArgs,
    /// Cap on source cells times seed draws.
    #[arg(long, default_value_t = 1u128 << 34)]
    cap: u128,
    /// Seed draws when the seed space is too large to enumerate.
    #[arg(long, default_value_t = MIN_SEED_SAMPLES)]
    samples: usize,
    #[command(flatten)]
    seed: SeedArgs,
    #[command(flatten)]
    #[serde(skip)]
    output: OutputArgs,
}

#[derive(Args, Serialize, Clone)]
struct BetaArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    p: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    q: Vec<f64>,
    #[arg(long)]
    eps: f64,
    #[command(flatten)]
    #[serde(skip)]
    output: OutputArgs,
}

#[derive(Args, Serialize, Clone)]
struct MixedArgs {
    #[arg(long, default_value_t = 0.05)]
    p1: f64,
    #[arg(long, default_value_t = 0.15)]
    p2: f64,
    #[arg(long, default_value_t = 0.1)]
    q: f64,
    #[command(flatten)]
    #[serde(skip)]
    output: OutputArgs,
}

#[derive(Args, Serialize, Clone)]
struct StatsArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    #[serde(skip)]
    output: OutputArgs,
}

#[derive(Deserialize)]
struct TableSpec {
    nx: usize,
    ny: usize,
    #[serde(default = "one")]
    nz: usize,
    p: Vec<f64>,
}

fn one() -> usize {
    1
}

#[derive(Deserialize)]
struct WeightedTable {
    weight: f64,
    #[serde(flatten)]
    table: TableSpec,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SourceFile {
    Mixture { components: Vec<WeightedTable> },
    Iid(TableSpec),
}

impl TableSpec {
    fn pmf(self) -> Result<JointPmf> {
        JointPmf::new(self.nx, self.ny, self.nz, self.p)
    }
}

/// Components of the source with their weights.
fn load_source(args: &SourceArgs) -> Result<Vec<(f64, JointPmf)>> {
    match (&args.source, &args.example1) {
        (Some(path), None) => {
            let text = fs::read_to_string(path)?;
            match serde_json::from_str::<SourceFile>(&text)? {
                SourceFile::Iid(t) => Ok(vec![(1.0, t.pmf()?)]),
                SourceFile::Mixture { components } => components
                    .into_iter()
                    .map(|c| c.table.pmf().map(|p| (c.weight, p)))
                    .collect(),
            }
        }
        (None, Some(a)) => Ok(vec![(1.0, example1_pmf(a[0], a[1])?)]),
        (None, None) => Ok(vec![(1.0, example1_pmf(0.25, 0.125)?)]),
        (Some(_), Some(_)) => Err(Error::Usage("give --source or --example1, not both".into())),
    }
}

fn iid_pmf(args: &SourceArgs) -> Result<JointPmf> {
    let mut comps = load_source(args)?;
    if comps.len() != 1 {
        return Err(Error::Usage("this command needs an IID source".into()));
    }
    Ok(comps.remove(0).1)
}

fn source_model(args: &SourceArgs, n: usize) -> Result<SourceModel> {
    let mut comps = load_source(args)?;
    if comps.len() == 1 {
        SourceModel::iid(comps.remove(0).1, n)
    } else {
        SourceModel::mixture(comps, n)
    }
}

fn config_hash(command: &str, inputs: &Value) -> String {
    let text = serde_json::to_string(&json!({ "command": command, "inputs": inputs })).expect("json");
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// JSON report envelope. Every key but `runtime-seconds` is a pure function
/// of the inputs.
fn envelope(command: &str, inputs: &Value, seed: Option<u64>, result: Value, started: Instant) -> String {
    let mut doc = json!({
        "tool": "skago",
        "version": VERSION,
        "command": command,
        "config-hash": config_hash(command, inputs),
        "inputs": inputs,
        "result": result,
    });
    if let Some(s) = seed {
        doc["seed"] = json!(format!("{s:#x}"));
    }
    let mut text = serde_json::to_string_pretty(&doc).expect("json");
    // timing goes last, on its own line
    text.truncate(text.len() - 2);
    text.push_str(&format!(",\n  \"runtime-seconds\": {:.6}\n}}\n", started.elapsed().as_secs_f64()));
    text
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent)?;
            }
            fs::write(path, text)?;
        }
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn cmd_bounds(args: &BoundsArgs) -> Result<()> {
    let started = Instant::now();
    if args.n.is_empty() || args.eps_plus_delta.is_empty() {
        return Err(Error::Usage("grids must be non-empty".into()));
    }
    let pmf = iid_pmf(&args.source)?;
    if !pmf.is_markov(1e-10) {
        return Err(Error::Usage("the curves assume a Markov chain X − Y − Z".into()));
    }
    let stats = density_stats(&pmf);
    let be = if args.standard_berry_esseen {
        BerryEsseen::Standard
    } else {
        BerryEsseen::Printed
    };
    let mut curves = Vec::new();
    for &total in &args.eps_plus_delta {
        let points = args
            .n
            .iter()
            .map(|&n| BoundPoint::compute(&stats, n, total, args.width, be))
            .collect::<Result<Vec<_>>>()?;
        curves.push((total, points));
    }
    let inputs = serde_json::to_value(args)?;
    let hash = config_hash("bounds", &inputs);
    match args.output.format {
        Format::Json => {
            let result = json!({
                "stats": stats,
                "curves": curves.iter().map(|(t, p)| json!({"eps_plus_delta": t, "points": p})).collect::<Vec<_>>(),
            });
            emit(&args.output.out, &envelope("bounds", &inputs, Some(args.seed.seed), result, started))
        }
        Format::Csv => {
            let header = format!(
                "# tool=skago version={VERSION} command=bounds config-hash={hash} seed={:#x}\n",
                args.seed.seed
            );
            let mut all = String::new();
            for (total, points) in &curves {
                let body = format!("{header}{}", to_csv(points));
                match &args.output.out {
                    Some(dir) => {
                        fs::create_dir_all(dir)?;
                        let text = format!("{body}# runtime-seconds={:.6}\n", started.elapsed().as_secs_f64());
                        fs::write(dir.join(format!("curve_eps_plus_delta_{total}.csv")), text)?;
                    }
                    None => all.push_str(&body),
                }
            }
            if args.output.out.is_none() {
                all.push_str(&format!("# runtime-seconds={:.6}\n", started.elapsed().as_secs_f64()));
                emit(&None, &all)?;
            }
            Ok(())
        }
    }
}

fn session_config(p: &ProtocolArgs, source: &SourceModel, decode_cap: usize) -> Result<SessionConfig> {
    let variant: Variant = p.variant.into();
    let lambda_max = match p.lambda_max {
        Some(v) => v,
        None => {
            let kind = if variant.is_p2() {
                DensityKind::SelfInfo
            } else {
                DensityKind::CondLogLikelihood
            };
            let (spec, _) = source.spectrum(kind, DEFAULT_ATOM_CAP, 1 << 20)?;
            spec.max_value().unwrap_or(0.0) + p.width
        }
    };
    let slices = SliceSpec::new(p.lambda_min, lambda_max, p.width)?;
    Ok(SessionConfig::new(slices, p.gamma, p.lambda, p.key_bits, variant)?.with_decode_cap(decode_cap))
}

fn theorem_bounds(source: &SourceModel, config: &SessionConfig) -> Value {
    let r = if config.variant.is_p2() {
        theorem5_bounds(source, config).map(|b| json!({"theorem": "one-way", "bounds": b}))
    } else {
        theorem2_bounds(source, config).map(|b| json!({"theorem": "interactive", "bounds": b}))
    };
    r.unwrap_or_else(|e| json!({ "unavailable": e.to_string() }))
}

fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let started = Instant::now();
    let source = source_model(&args.protocol.source, args.protocol.n)?;
    let config = session_config(&args.protocol, &source, args.cap)?;
    let protocol = Protocol::new(source.clone(), config)?;
    let hash = config.config_hash();
    let mut trace = String::new();
    let want_trace = args.trace.is_some();
    let report = monte_carlo_traced(&protocol, args.trials, args.seed.seed, |t, out| {
        if want_trace {
            trace.push_str(&json!({"session": t}).to_string());
            trace.push('\n');
            trace.push_str(&out.to_jsonl(&hash));
        }
    })?;
    if let Some(path) = &args.trace {
        emit(&Some(path.clone()), &trace)?;
    }
    let inputs = serde_json::to_value(args)?;
    let result = json!({
        "session-config": config,
        "session-config-hash": hash,
        "report": report,
        "theorem-bounds": theorem_bounds(&source, &config),
    });
    emit(&args.output.out, &envelope("simulate", &inputs, Some(args.seed.seed), result, started))
}

fn cmd_exact(args: &ExactArgs) -> Result<()> {
    let started = Instant::now();
    let source = source_model(&args.protocol.source, args.protocol.n)?;
    let config = session_config(&args.protocol, &source, DEFAULT_DECODE_CAP)?;
    let protocol = Protocol::new(source.clone(), config)?;
    let opts = ExactOptions {
        work_cap: args.cap,
        samples: args.samples,
        master: args.seed.seed,
        ..ExactOptions::default()
    };
    let eval = exact_protocol_eval(&protocol, &opts)?;
    let bounds = theorem_bounds(&source, &config);
    let dominated = bounds
        .get("bounds")
        .map(|b| eval.eps <= b["eps"].as_f64().unwrap_or(f64::NAN) && eval.delta <= b["delta"].as_f64().unwrap_or(f64::NAN));
    let inputs = serde_json::to_value(args)?;
    let result = json!({
        "session-config": config,
        "exact": eval,
        "theorem-bounds": bounds,
        "bounds-dominate": dominated,
    });
    emit(&args.output.out, &envelope("exact", &inputs, Some(args.seed.seed), result, started))
}

fn cmd_beta(args: &BetaArgs) -> Result<()> {
    let started = Instant::now();
    let (beta, test) = beta_epsilon(&Pmf::new(args.p.clone())?, &Pmf::new(args.q.clone())?, args.eps)?;
    let inputs = serde_json::to_value(args)?;
    let result = json!({ "beta": beta, "test": test });
    emit(&args.output.out, &envelope("beta", &inputs, None, result, started))
}

fn cmd_mixed(args: &MixedArgs) -> Result<()> {
    let started = Instant::now();
    let rates = mixed_source_rates(args.p1, args.p2, args.q)?;
    let spectral = mixture_spectral_rate(&[bsc_component(args.p1, args.q)?, bsc_component(args.p2, args.q)?])?;
    let inputs = serde_json::to_value(args)?;
    let result = json!({ "closed-form": rates, "component-minimum": spectral });
    emit(&args.output.out, &envelope("mixed", &inputs, None, result, started))
}

fn cmd_stats(args: &StatsArgs) -> Result<()> {
    let started = Instant::now();
    let pmf = iid_pmf(&args.source)?;
    let stats = density_stats(&pmf);
    let spectrum = block_spectrum(&pmf, DensityKind::CondInfo, 1, DEFAULT_ATOM_CAP)?;
    let mut result = json!({
        "stats": stats,
        "markov": pmf.is_markov(1e-10),
        "single-letter-spectrum": spectrum.atoms(),
    });
    if let Some(a) = &args.source.example1 {
        result["closed-forms"] = json!(Example1ClosedForms::new(a[0], a[1]));
    }
    let inputs = serde_json::to_value(args)?;
    emit(&args.output.out, &envelope("stats", &inputs, None, result, started))
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Bounds(a) => cmd_bounds(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Exact(a) => cmd_exact(a),
        Command::Beta(a) => cmd_beta(a),
        Command::Mixed(a) => cmd_mixed(a),
        Command::Stats(a) => cmd_stats(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("skago: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
