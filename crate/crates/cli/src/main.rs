use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use perron_lattice::analysis::{DEFAULT_MAX_PARTS, DEFAULT_MAX_WEIGHT, DEFAULT_PAIR_CAP};
use perron_lattice::config::{
    certificate_json, concavity_json, heuristic_json, map_from_value, real, report_json,
    scalability_json,
};
use perron_lattice::models::{paper_example, simulate};
use perron_lattice::{
    certify_constants, check_scalability, enumerate_slice_parallel, find_best, format_rational,
    heuristic_iterate, parse_rational, verify_concavity, verify_corollary, CertifyOptions, Error,
    IntegerMap, LatticeVector, Rational, Sampling, SphereSlice,
};

#[derive(Parser, Debug)]
#[command(name = "perron-lattice", version, about = "Approximate Perron-Frobenius eigenvectors of integer maps")]
struct Cli {
    /// Worker threads for partitionable scans; results do not depend on it.
    #[arg(long, global = true, env = "PERRON_LATTICE_THREADS")]
    threads: Option<usize>,

    /// Also write a run manifest (JSON) to this path.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Certify L, a, b and c on a sphere slice.
    Analyze(AnalyzeArgs),
    /// Find the best approximate eigenvector on a slice and check the bound.
    Find(FindArgs),
    /// Look for a counterexample to discrete concavity in a window.
    Concavity(ConcavityArgs),
    /// Iterate a map and write the trajectory as CSV.
    Simulate(SimulateArgs),
    /// List the points of a slice as CSV, or count them.
    Enumerate(EnumerateArgs),
    /// The constants of the three-country SIS example.
    PaperExample,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[arg(long)]
    map: PathBuf,
    #[arg(long)]
    k: u64,
    /// Clip the slice at x ≥ c·k. Defaults to the config's "c" field.
    #[arg(long)]
    c: Option<String>,
    /// Scan every pair (the default).
    #[arg(long, conflicts_with = "sample")]
    exhaustive: bool,
    /// Scan this many random pairs; the resulting L is a lower estimate.
    #[arg(long)]
    sample: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_PAIR_CAP)]
    pair_cap: u128,
}

#[derive(Args, Debug)]
struct FindArgs {
    #[arg(long)]
    map: PathBuf,
    #[arg(long)]
    k: u64,
    #[arg(long)]
    c: Option<String>,
    /// Also check the growth inequalities with the certified a and b.
    #[arg(long)]
    verify_corollary: bool,
    /// Iterate from --start instead of scanning the slice.
    #[arg(long, requires = "start")]
    heuristic: bool,
    #[arg(long, value_parser = parse_vector)]
    start: Option<LatticeVector>,
    #[arg(long, default_value_t = 1000)]
    max_steps: usize,
    #[arg(long, default_value_t = DEFAULT_PAIR_CAP)]
    pair_cap: u128,
}

#[derive(Args, Debug)]
struct ConcavityArgs {
    #[arg(long)]
    map: PathBuf,
    /// Largest coordinate of the points tried.
    #[arg(long, default_value_t = 4)]
    window: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_PARTS)]
    parts: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_WEIGHT)]
    max_weight: u64,
    /// Also test A(mx) ≤ m·A(x) for m up to this value.
    #[arg(long)]
    scalability: Option<u64>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    map: PathBuf,
    #[arg(long, value_parser = parse_vector)]
    x0: LatticeVector,
    #[arg(long, default_value_t = 100)]
    steps: usize,
}

#[derive(Args, Debug)]
struct EnumerateArgs {
    #[arg(long)]
    d: usize,
    #[arg(long)]
    k: u64,
    #[arg(long)]
    c: Option<String>,
    #[arg(long)]
    count_only: bool,
}

fn parse_vector(s: &str) -> Result<LatticeVector, String> {
    s.split(',')
        .map(|t| t.trim().parse::<u64>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()
        .map(LatticeVector::new)
}

/// A failed run: exit code 1 for usage and validation, 2 for a refuted
/// hypothesis. `detail` is printed as JSON on stdout when present.
struct Failure {
    code: u8,
    message: String,
    detail: Option<Value>,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: 1, message: message.into(), detail: None }
    }

    fn refuted(message: impl Into<String>, detail: Value) -> Self {
        Failure { code: 2, message: message.into(), detail: Some(detail) }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match &e {
            Error::CertificationFailed { witness, .. } => {
                Failure::refuted(e.to_string(), json!({ "error": e.to_string(), "witness": witness }))
            }
            Error::Domain { point, .. } => {
                Failure::refuted(e.to_string(), json!({ "error": e.to_string(), "witness": [point] }))
            }
            _ => Failure::usage(e.to_string()),
        }
    }
}

type Outcome = Result<Output, Failure>;

enum Output {
    Json(Value),
    Text(String),
}

struct MapInput {
    map: IntegerMap,
    c: Option<Rational>,
    digest: String,
}

fn load_map(path: &Path) -> Result<MapInput, Failure> {
    let bytes =
        std::fs::read(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    let digest = hex::encode(Sha256::digest(&bytes));
    let text = String::from_utf8(bytes)
        .map_err(|_| Failure::usage(format!("{}: not UTF-8", path.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| Failure::usage(format!("{}: invalid JSON: {e}", path.display())))?;
    let c = match value.get("c") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(parse_c(s)?),
        Some(Value::Number(n)) => Some(parse_c(&n.to_string())?),
        Some(other) => return Err(Failure::usage(format!("\"c\" must be a rational, got {other}"))),
    };
    let map = map_from_value(value)?;
    Ok(MapInput { map, c, digest })
}

fn parse_c(s: &str) -> Result<Rational, Failure> {
    parse_rational(s).map_err(Failure::from)
}

fn slice_for(input: &MapInput, k: u64, c: Option<&str>) -> Result<SphereSlice, Failure> {
    let c = match c {
        Some(s) => Some(parse_c(s)?),
        None => input.c.clone(),
    };
    Ok(SphereSlice::new(input.map.dim(), k, c)?)
}

fn analyze(args: &AnalyzeArgs, threads: Option<usize>, digest: &mut Option<String>) -> Outcome {
    let input = load_map(&args.map)?;
    *digest = Some(input.digest.clone());
    let slice = slice_for(&input, args.k, args.c.as_deref())?;
    let opts = CertifyOptions {
        pair_cap: args.pair_cap,
        sampling: args.sample.map(|pairs| Sampling { pairs, seed: args.seed }),
        threads,
    };
    let cert = certify_constants(&input.map, &slice, &opts)?;
    Ok(Output::Json(certificate_json(&cert)))
}

fn find(args: &FindArgs, threads: Option<usize>, digest: &mut Option<String>) -> Outcome {
    let input = load_map(&args.map)?;
    *digest = Some(input.digest.clone());
    let slice = slice_for(&input, args.k, args.c.as_deref())?;
    let Some(c) = slice.c().cloned() else {
        return Err(Failure::usage("find needs --c or a \"c\" field in the config"));
    };
    let opts = CertifyOptions { pair_cap: args.pair_cap, sampling: None, threads };
    let cert = certify_constants(&input.map, &slice, &opts)?;
    if cert.c < c {
        let (x, i) = &cert.c_witness;
        return Err(Failure::refuted(
            format!(
                "images leave D: coordinate {i} of A{x} has share {} < c = {}",
                format_rational(&cert.c),
                format_rational(&c)
            ),
            json!({ "error": "images leave D", "certificate": certificate_json(&cert) }),
        ));
    }

    if args.heuristic {
        let start = args.start.as_ref().expect("clap requires --start");
        let run = heuristic_iterate(&input.map, &slice, start, args.max_steps, Some(&cert))?;
        return Ok(Output::Json(heuristic_json(&run)));
    }

    let mut report = find_best(&input.map, &slice, &cert, threads)?;
    if args.verify_corollary {
        report = verify_corollary(report, Some(&cert.a), Some(&cert.b))?;
    }
    let json = report_json(&report);
    let corollary_ok = report
        .corollary
        .as_ref()
        .is_none_or(|c| c.lower_pass != Some(false) && c.upper_pass != Some(false));
    if report.theorem_pass == Some(true) && corollary_ok {
        Ok(Output::Json(json))
    } else {
        Err(Failure::refuted("the residual bound does not hold", json))
    }
}

fn concavity(args: &ConcavityArgs, digest: &mut Option<String>) -> Outcome {
    let input = load_map(&args.map)?;
    *digest = Some(input.digest.clone());
    let report = verify_concavity(&input.map, args.window, args.parts, args.max_weight)?;
    let mut passed = report.passed();
    let mut json = concavity_json(&report);
    if let Some(max_m) = args.scalability {
        let s = check_scalability(&input.map, args.window, max_m)?;
        passed &= s.passed();
        json["scalability"] = scalability_json(&s);
    }
    if passed {
        Ok(Output::Json(json))
    } else {
        Err(Failure::refuted("counterexample found", json))
    }
}

fn simulate_cmd(args: &SimulateArgs, digest: &mut Option<String>) -> Outcome {
    let input = load_map(&args.map)?;
    *digest = Some(input.digest.clone());
    let tr = simulate(&input.map, &args.x0, args.steps)?;
    Ok(Output::Text(tr.to_csv()))
}

fn enumerate(args: &EnumerateArgs, threads: Option<usize>) -> Outcome {
    let c = args.c.as_deref().map(parse_c).transpose()?;
    let slice = SphereSlice::new(args.d, args.k, c)?;
    if args.count_only {
        return Ok(Output::Text(format!("{}\n", slice.count())));
    }
    let points = match threads {
        Some(t) if t > 1 => enumerate_slice_parallel(&slice, t),
        _ => slice.points(),
    };
    let mut out = String::new();
    out.push_str(&(1..=args.d).map(|i| format!("x{i}")).collect::<Vec<_>>().join(","));
    out.push('\n');
    for p in points {
        let row: Vec<String> = p.entries().iter().map(u64::to_string).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(Output::Text(out))
}

fn paper_example_cmd() -> Outcome {
    let ex = paper_example();
    Ok(Output::Json(json!({
        "d": ex.d,
        "L": ex.lipschitz,
        "a": ex.a,
        "b": ex.b,
        "c": ex.c,
        "numerator": real(ex.numerator),
        "sqrt_d_numerator": real(ex.sqrt_d_numerator),
        "corollary_error": real(ex.corollary_error),
    })))
}

fn manifest(cli: &Cli, digest: Option<String>) -> Value {
    let (name, seed) = match &cli.command {
        Command::Analyze(a) => ("analyze", a.sample.map(|_| a.seed)),
        Command::Find(_) => ("find", None),
        Command::Concavity(_) => ("concavity", None),
        Command::Simulate(_) => ("simulate", None),
        Command::Enumerate(_) => ("enumerate", None),
        Command::PaperExample => ("paper-example", None),
    };
    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    json!({
        "subcommand": name,
        "flags": std::env::args().skip(1).collect::<Vec<_>>(),
        "threads": cli.threads,
        "config_sha256": digest,
        "version": env!("CARGO_PKG_VERSION"),
        "timestamp": timestamp,
        "seed": seed,
    })
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON values serialize") + "\n"
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if cli.threads == Some(0) {
        eprintln!("error: --threads must be positive");
        return ExitCode::from(1);
    }

    let mut digest = None;
    let outcome = match &cli.command {
        Command::Analyze(a) => analyze(a, cli.threads, &mut digest),
        Command::Find(a) => find(a, cli.threads, &mut digest),
        Command::Concavity(a) => concavity(a, &mut digest),
        Command::Simulate(a) => simulate_cmd(a, &mut digest),
        Command::Enumerate(a) => enumerate(a, cli.threads),
        Command::PaperExample => paper_example_cmd(),
    };

    if let Some(path) = &cli.manifest {
        if let Err(e) = std::fs::write(path, pretty(&manifest(&cli, digest))) {
            eprintln!("error: {}: {e}", path.display());
            return ExitCode::from(1);
        }
    }

    match outcome {
        Ok(Output::Json(v)) => {
            print!("{}", pretty(&v));
            ExitCode::SUCCESS
        }
        Ok(Output::Text(s)) => {
            print!("{s}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            if let Some(detail) = &f.detail {
                print!("{}", pretty(detail));
            }
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
