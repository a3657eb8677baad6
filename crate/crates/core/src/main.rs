//! Command-line front end. Every command prints one JSON report carrying the
//! tool version and the configuration it ran with.
//!
//! Exit codes: 0 all checks passed, 1 a check failed, 2 bad input or
//! configuration.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Value};

use gframe::controlled_frames::{
    canonical_dual, check_frame, frame_operator, generate_unit_interval, multiplier_summary, operator_dual_check,
    optimal_scalar_bounds, random_system, verify_theorem, CheckMode, Family, GFrameSystem, InstanceKind, Mutation,
    RandomSpec, Symbol, TheoremId,
};
use gframe::report::{Status, TheoremReport};
use gframe::stability::{run_perturbation, PerturbationKind, PerturbationParams};
use gframe::star_algebra::{AlgebraDescriptor, AlgebraKind};
use gframe::{hilbert_module::AdjointableOperator, GFrameError};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Command {
    Validate,
    Bounds,
    FrameOp,
    Dual,
    Reconstruct,
    Multiplier,
    Theorem,
    Perturb,
    Example,
    Random,
}

#[derive(Debug, Parser)]
#[command(name = "gframe", version, about = "Controlled continuous *-g-frames: bounds, duals, multipliers and theorem checks")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// System file, then any auxiliary descriptor the command takes.
    inputs: Vec<PathBuf>,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    samples: usize,
    /// Theorem row, or `all`.
    #[arg(long)]
    id: Option<String>,
    /// Mutation for `theorem`: none, scale_member, break_commutation, wrong_k.
    #[arg(long, default_value = "none")]
    mutation: String,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value_t = 3)]
    rank: usize,
    #[arg(long, default_value_t = 11)]
    nodes: usize,
    /// `random` only: number of atoms.
    #[arg(long, default_value_t = 4)]
    atoms: usize,
    /// `random` only: `matrix:D` or `diagonal:K`.
    #[arg(long, default_value = "matrix:2")]
    algebra: String,
    /// `random` only: instance kind, e.g. commuting or general.
    #[arg(long, default_value = "commuting")]
    kind: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Config(String),
    Check(String),
}

impl From<GFrameError> for Failure {
    fn from(e: GFrameError) -> Self {
        match e {
            GFrameError::Domain(_) => Failure::Check(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

type Outcome = Result<(Value, bool), Failure>;

fn config_err<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Config(msg.into()))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn input(cli: &Cli, k: usize, what: &str) -> Result<PathBuf, Failure> {
    cli.inputs.get(k).cloned().ok_or_else(|| Failure::Config(format!("missing {what} file")))
}

fn system(cli: &Cli) -> Result<GFrameSystem, Failure> {
    read_json(&input(cli, 0, "system")?)
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn report_value(r: &TheoremReport) -> (Value, bool) {
    (to_value(r), r.status == Status::Pass)
}

fn parse_algebra(s: &str) -> Result<AlgebraDescriptor, Failure> {
    let (kind, dim) = s.split_once(':').ok_or_else(|| Failure::Config(format!("algebra {s:?} is not KIND:DIM")))?;
    let kind = match kind {
        "matrix" => AlgebraKind::Matrix,
        "diagonal" => AlgebraKind::Diagonal,
        _ => return config_err(format!("unknown algebra kind {kind:?}")),
    };
    let dim: usize = dim.parse().map_err(|_| Failure::Config(format!("bad algebra dimension {dim:?}")))?;
    Ok(AlgebraDescriptor::new(kind, dim)?)
}

fn validate(cli: &Cli) -> Outcome {
    let sys = system(cli)?;
    let c = sys.controls();
    Ok((
        json!({
            "valid": true,
            "algebra": sys.algebra(),
            "module_rank": sys.module_rank(),
            "atoms": sys.measure().len(),
            "commute_each_other": c.commute_each_other,
            "commute_with_family": c.commute_with_family,
            "each_other_residual": c.each_other_residual,
            "family_residual": c.family_residual,
        }),
        true,
    ))
}

fn bounds(cli: &Cli) -> Outcome {
    let sys = system(cli)?;
    let fb = optimal_scalar_bounds(&sys, cli.tol)?;
    let check = check_frame(&sys, &fb, CheckMode::ExactScalar, cli.samples, cli.seed, cli.tol)?;
    let ok = fb.frame && check.status == Status::Pass;
    Ok((json!({"bounds": fb, "check": check}), ok))
}

fn frame_op(cli: &Cli) -> Outcome {
    let sys = system(cli)?;
    let s = frame_operator(&sys);
    let f = s.flatten();
    let defect = gframe::dense::hermitian_defect(&f);
    let eig = gframe::dense::hermitian_eigenvalues(&f);
    let ok = defect <= cli.tol * gframe::dense::spectral_norm(&f).max(1.0);
    Ok((
        json!({"frame_operator": s, "self_adjoint_residual": defect, "eigenvalues": eig}),
        ok,
    ))
}

fn dual(cli: &Cli) -> Outcome {
    let sys = system(cli)?;
    let cert = canonical_dual(&sys, cli.seed)?;
    let ok = cert.passed;
    Ok((to_value(&cert), ok))
}

#[derive(Deserialize)]
struct DualFile {
    dual: Family,
    #[serde(rename = "K")]
    k: Option<AdjointableOperator>,
}

fn reconstruct(cli: &Cli) -> Outcome {
    let sys = system(cli)?;
    let Some(path) = cli.inputs.get(1) else {
        return dual(cli);
    };
    let d: DualFile = read_json(path)?;
    let k = d.k.unwrap_or_else(|| AdjointableOperator::identity(sys.algebra(), sys.module_rank()));
    let cert = operator_dual_check(&sys, &d.dual, &k, cli.seed)?;
    let ok = cert.passed;
    Ok((to_value(&cert), ok))
}

#[derive(Deserialize)]
struct MultiplierFile {
    symbol: Symbol,
    theta: Family,
}

fn multiplier(cli: &Cli) -> Outcome {
    let sys = system(cli)?;
    let m: MultiplierFile = read_json(&input(cli, 1, "multiplier descriptor")?)?;
    let (op, summary) = multiplier_summary(&m.symbol, sys.family(), &m.theta, sys.measure(), cli.tol)?;
    let ok = summary.within_bound;
    Ok((json!({"multiplier": op, "summary": summary}), ok))
}

fn theorem(cli: &Cli) -> Outcome {
    let mutation = Mutation::parse(&cli.mutation)?;
    let supplied = match cli.inputs.first() {
        Some(p) => Some(read_json::<GFrameSystem>(p)?),
        None => None,
    };
    let ids = match cli.id.as_deref() {
        None | Some("all") => TheoremId::ALL.to_vec(),
        Some(s) => vec![TheoremId::parse(s)?],
    };
    let mut reports = Vec::new();
    for id in ids {
        reports.push(verify_theorem(id, supplied.as_ref(), cli.seed, cli.tol, mutation)?);
    }
    reports.sort_by(|a, b| (&a.theorem_id, a.seed).cmp(&(&b.theorem_id, b.seed)));
    let ok = reports.iter().all(|r| r.status == Status::Pass);
    Ok((json!({"reports": reports}), ok))
}

#[derive(Deserialize)]
struct PerturbFile {
    kind: PerturbationKind,
    #[serde(default)]
    params: serde_json::Map<String, Value>,
    #[serde(rename = "systemA")]
    system_a: PathBuf,
    #[serde(rename = "systemB")]
    system_b: PathBuf,
    samples: Option<usize>,
    seed: Option<u64>,
}

fn perturb(cli: &Cli) -> Outcome {
    let path = input(cli, 0, "perturbation descriptor")?;
    let d: PerturbFile = read_json(&path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let sys_a: GFrameSystem = read_json(&base.join(&d.system_a))?;
    let sys_b: GFrameSystem = read_json(&base.join(&d.system_b))?;
    let mut params = d.params;
    params.insert("kind".into(), to_value(&d.kind));
    let params: PerturbationParams =
        serde_json::from_value(Value::Object(params)).map_err(|e| Failure::Config(format!("params: {e}")))?;
    let samples = d.samples.unwrap_or(cli.samples);
    let seed = d.seed.unwrap_or(cli.seed);
    let r = run_perturbation(&params, &sys_a, &sys_b, samples, seed, cli.tol)?;
    Ok(report_value(&r))
}

fn example(cli: &Cli) -> Outcome {
    let sys = generate_unit_interval(cli.alpha, cli.beta, cli.rank, cli.nodes)?;
    Ok((to_value(&sys), true))
}

fn random(cli: &Cli) -> Outcome {
    let spec = RandomSpec {
        algebra: parse_algebra(&cli.algebra)?,
        rank: cli.rank,
        atoms: cli.atoms,
        kind: InstanceKind::parse(&cli.kind)?,
    };
    if spec.rank == 0 || spec.atoms == 0 {
        return config_err("rank and atoms must be at least 1");
    }
    let sys = random_system(spec, cli.seed)?;
    Ok((to_value(&sys), true))
}

fn config_echo(cli: &Cli) -> Value {
    json!({
        "command": cli.command.to_possible_value().expect("no skipped variants").get_name(),
        "inputs": cli.inputs,
        "tol": cli.tol,
        "seed": cli.seed,
        "samples": cli.samples,
        "id": cli.id,
        "mutation": cli.mutation,
        "alpha": cli.alpha,
        "beta": cli.beta,
        "rank": cli.rank,
        "nodes": cli.nodes,
        "atoms": cli.atoms,
        "algebra": cli.algebra,
        "kind": cli.kind,
    })
}

fn run(cli: &Cli) -> Outcome {
    if !(cli.tol > 0.0 && cli.tol.is_finite()) {
        return config_err(format!("--tol must be positive, got {}", cli.tol));
    }
    if cli.samples == 0 {
        return config_err("--samples must be at least 1");
    }
    match cli.command {
        Command::Validate => validate(cli),
        Command::Bounds => bounds(cli),
        Command::FrameOp => frame_op(cli),
        Command::Dual => dual(cli),
        Command::Reconstruct => reconstruct(cli),
        Command::Multiplier => multiplier(cli),
        Command::Theorem => theorem(cli),
        Command::Perturb => perturb(cli),
        Command::Example => example(cli),
        Command::Random => random(cli),
    }
}

fn emit(cli: &Cli, doc: &Value) -> Result<(), String> {
    let text = serde_json::to_string_pretty(doc).expect("json value serializes") + "\n";
    match &cli.out {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (result, passed, error, code) = match run(&cli) {
        Ok((v, ok)) => (v, ok, None, if ok { 0 } else { 1 }),
        Err(Failure::Check(m)) => (Value::Null, false, Some(m), 1),
        Err(Failure::Config(m)) => (Value::Null, false, Some(m), 2),
    };
    // `example` and `random` emit a bare system file so it can be fed back in.
    let doc = match (cli.command, &error) {
        (Command::Example | Command::Random, None) => result,
        _ => json!({
            "tool": "gframe",
            "version": env!("CARGO_PKG_VERSION"),
            "config": config_echo(&cli),
            "passed": passed,
            "error": error,
            "result": result,
        }),
    };
    if let Some(m) = &error {
        eprintln!("gframe: {m}");
    }
    if let Err(m) = emit(&cli, &doc) {
        eprintln!("gframe: {m}");
        return ExitCode::from(2);
    }
    ExitCode::from(code)
}
