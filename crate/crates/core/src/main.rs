use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use qnet_core::checks::{
    causal_witness_json, dual_causality_check, is_causal, is_local, is_strictly_local,
    mismatch_json, CausalitySpec,
};
use qnet_core::cli_formats::{
    exit, exit_code, parse_graph, parse_name, parse_operator, parse_restriction, parse_universe,
    state_vector_from_json, state_vector_json, to_pretty, write_json, RunConfig,
};
use qnet_core::dynamics::{
    block_decompose, block_decompose_no_ancilla, chain_universe, key_pair_neighbourhood,
    name_neighbourhood, versioned_chain, MOVERS,
};
use qnet_core::graphs::{induced_edges, Universe};
use qnet_core::hilbert::StateVector;
use qnet_core::names::Name;
use qnet_core::restrict::Restriction;
use qnet_core::tensor_trace::laws::{chain_law_universe, LawId, LawOptions, LawStatus};
use qnet_core::tensor_trace::run_law;
use qnet_core::{QnetError, Result};

#[derive(Parser)]
#[command(
    name = "qnet",
    version,
    about = "Checks laws, locality and causality of quantum dynamics over named graphs"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run laws (`L1`..`L11`, `P1`, `P2`, `P8`, `P10a`, aliases, `all`) or a
    /// checker (`locality`, `strict-locality`, `causality`, `dual-causality`).
    Check(CheckArgs),
    /// Apply an operator repeatedly to an initial state.
    Evolve(EvolveArgs),
    /// Block-decompose a causal unitary on a chain.
    Decompose(DecomposeArgs),
    /// Print the edges a graph's names induce.
    Edges { graph: String },
    /// Print the canonical form of a name, graph or restriction.
    Normalize {
        text: String,
        #[arg(long, default_value = "auto", value_parser = ["auto", "name", "graph", "restriction"])]
        kind: String,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    seed: Option<u64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Zero every timing field, for byte-identical replays.
    #[arg(long)]
    no_timing: bool,
    /// Start from a saved run configuration; flags given here override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Save the effective run configuration.
    #[arg(long)]
    save_config: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    /// Comma-separated suites.
    suite: Option<String>,
    #[arg(long)]
    universe: Option<String>,
    #[arg(long)]
    zeta: Option<String>,
    #[arg(long)]
    chi: Option<String>,
    #[arg(long)]
    op: Option<String>,
    #[arg(long)]
    np_only: bool,
    #[arg(long)]
    samples: Option<usize>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct EvolveArgs {
    #[arg(long)]
    op: Option<String>,
    /// Initial graph literal.
    #[arg(long)]
    init: Option<String>,
    /// Initial state as StateVector JSON.
    #[arg(long)]
    init_file: Option<PathBuf>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    universe: Option<String>,
    #[arg(long)]
    chain: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct DecomposeArgs {
    #[arg(long)]
    op: Option<String>,
    #[arg(long)]
    chain: Option<usize>,
    #[arg(long, conflicts_with = "no_ancilla")]
    ancilla: bool,
    #[arg(long)]
    no_ancilla: bool,
    /// Cause region per vertex: `near` (name neighbourhood), `disk` (radius
    /// one) or `zeta` (the vertex itself).
    #[arg(long, value_parser = ["near", "disk", "zeta"])]
    cause: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
    #[command(flatten)]
    common: Common,
}

fn base_config(common: &Common, command: &str) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig {
            seed: 1,
            timing: true,
            ..RunConfig::default()
        },
    };
    if !cfg.command.is_empty() && cfg.command != command {
        return Err(QnetError::Usage(format!(
            "config is for '{}', not '{command}'",
            cfg.command
        )));
    }
    cfg.command = command.into();
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if common.no_timing {
        cfg.timing = false;
    }
    if let Some(o) = &common.out {
        cfg.output = Some(o.display().to_string());
    }
    Ok(cfg)
}

fn set<T>(slot: &mut Option<T>, v: Option<T>) {
    if v.is_some() {
        *slot = v;
    }
}

fn finish_config(cfg: &mut RunConfig, common: &Common) -> Result<()> {
    cfg.apply_env()?;
    if let Some(p) = &common.save_config {
        cfg.save(p)?;
    }
    Ok(())
}

/// Writes `body` with the run configuration embedded. The output path is
/// left out so that replays to another file stay byte-identical.
fn emit(cfg: &RunConfig, mut body: Value) -> Result<()> {
    let replay = RunConfig {
        output: None,
        ..cfg.clone()
    };
    body["config"] = serde_json::to_value(replay).expect("config serializes");
    let v = &body;
    match &cfg.output {
        Some(p) => write_json(&PathBuf::from(p), v),
        None => {
            print!("{}", to_pretty(v));
            Ok(())
        }
    }
}

fn universe_of(text: Option<&str>) -> Result<Universe> {
    match text {
        Some(t) => parse_universe(t)?.build(),
        None => Ok(Universe::default_small()),
    }
}

fn restriction_arg(text: Option<&str>, flag: &str) -> Result<Restriction> {
    let t = text.ok_or_else(|| QnetError::Usage(format!("--{flag} is required")))?;
    parse_restriction(t)
}

fn cmd_check(a: CheckArgs) -> Result<i32> {
    let mut cfg = base_config(&a.common, "check")?;
    if let Some(s) = &a.suite {
        cfg.laws = s
            .split(',')
            .map(|x| x.trim().to_string())
            .filter(|x| !x.is_empty())
            .collect();
    }
    set(&mut cfg.universe, a.universe);
    set(&mut cfg.zeta, a.zeta);
    set(&mut cfg.chi, a.chi);
    set(&mut cfg.op, a.op);
    set(&mut cfg.samples, a.samples);
    cfg.np_only |= a.np_only;
    finish_config(&mut cfg, &a.common)?;
    if cfg.laws.is_empty() {
        return Err(QnetError::Usage(
            "name a suite, e.g. `qnet check L2` or `qnet check all`".into(),
        ));
    }

    let mut reports = Vec::new();
    let mut statuses = Vec::new();
    for suite in cfg.laws.clone() {
        match suite.as_str() {
            "locality" | "strict-locality" | "causality" | "dual-causality" => {
                let (v, status) = run_checker(&suite, &cfg)?;
                reports.push(v);
                statuses.push(status);
            }
            _ => {
                let laws: Vec<LawId> = if suite == "all" {
                    LawId::ALL.to_vec()
                } else {
                    vec![suite.parse::<LawId>()?]
                };
                let opts = LawOptions {
                    seed: cfg.seed,
                    np_only: cfg.np_only,
                    zeta: cfg.zeta.as_deref().map(parse_restriction).transpose()?,
                    chi: cfg.chi.as_deref().map(parse_restriction).transpose()?,
                    samples: cfg.samples.unwrap_or(LawOptions::default().samples),
                    timing: cfg.timing,
                };
                if opts.zeta.is_some() != opts.chi.is_some() {
                    return Err(QnetError::Usage("--zeta and --chi go together".into()));
                }
                let base = universe_of(cfg.universe.as_deref())?;
                let chain = laws
                    .iter()
                    .any(|l| l.needs_chain())
                    .then(chain_law_universe)
                    .transpose()?;
                for law in laws {
                    let u = match (&chain, law.needs_chain(), &cfg.universe, suite == "all") {
                        (Some(c), true, None, _) | (Some(c), true, _, true) => c,
                        _ => &base,
                    };
                    let r = run_law(law, u, &opts)?;
                    eprintln!(
                        "{} {}: {} (checked {}, satisfied {}, vacuous {}, failed {})",
                        law.code(),
                        law.alias(),
                        r.status.label(),
                        r.checked,
                        r.satisfied,
                        r.vacuous,
                        r.failed
                    );
                    statuses.push(match r.status {
                        LawStatus::Pass => "PASS",
                        LawStatus::Fail => "FAIL",
                        LawStatus::Inconclusive => "INCONCLUSIVE",
                    });
                    reports.push(serde_json::to_value(&r).expect("report serializes"));
                }
            }
        }
    }
    emit(&cfg, json!({"reports": reports}))?;
    Ok(if statuses.contains(&"FAIL") {
        exit::FAIL
    } else if statuses.contains(&"INCONCLUSIVE") {
        exit::INCONCLUSIVE
    } else {
        exit::PASS
    })
}

fn run_checker(suite: &str, cfg: &RunConfig) -> Result<(Value, &'static str)> {
    let u = universe_of(cfg.universe.as_deref())?;
    let op = parse_operator(
        cfg.op
            .as_deref()
            .ok_or_else(|| QnetError::Usage("--op is required".into()))?,
    )?;
    let chi = restriction_arg(cfg.chi.as_deref(), "chi")?;
    let (check, status, witness) = match suite {
        "locality" => {
            let w = is_local(&op, &chi, &u)?;
            (
                format!("{op} local on {chi}"),
                w.is_none(),
                w.map(|m| mismatch_json(&m)),
            )
        }
        "strict-locality" => {
            let r = is_strictly_local(&op, &chi, &u)?;
            (
                format!("{op} strictly local on {chi}"),
                r.passed(),
                r.witness,
            )
        }
        "causality" => {
            let zeta = restriction_arg(cfg.zeta.as_deref(), "zeta")?;
            let spec = CausalitySpec::new(chi.clone(), zeta.clone(), cfg.np_only);
            let w = is_causal(&op, &spec, &u)?;
            let sector = if cfg.np_only { "n.p. " } else { "" };
            (
                format!("{op} {sector}causal from {chi} to {zeta}"),
                w.is_none(),
                w.as_ref().map(causal_witness_json),
            )
        }
        _ => {
            let zeta = restriction_arg(cfg.zeta.as_deref(), "zeta")?;
            let r = dual_causality_check(
                &op,
                &CausalitySpec::new(chi.clone(), zeta.clone(), cfg.np_only),
                &u,
            )?;
            let ok = r.passed();
            (r.check, ok, r.witness)
        }
    };
    let label = if status { "PASS" } else { "FAIL" };
    eprintln!("{suite}: {label}");
    Ok((
        json!({"check": check, "universe": u.label(), "status": label, "witness": witness}),
        label,
    ))
}

fn cmd_evolve(a: EvolveArgs) -> Result<i32> {
    let mut cfg = base_config(&a.common, "evolve")?;
    set(&mut cfg.op, a.op);
    set(&mut cfg.init, a.init);
    set(&mut cfg.steps, a.steps);
    set(&mut cfg.universe, a.universe);
    set(&mut cfg.chain, a.chain);
    set(&mut cfg.tolerance, a.tol);
    if let Some(p) = &a.init_file {
        let text = std::fs::read_to_string(p)
            .map_err(|e| QnetError::Io(format!("{}: {e}", p.display())))?;
        cfg.init = Some(text.trim().to_string());
    }
    finish_config(&mut cfg, &a.common)?;

    let op = parse_operator(
        cfg.op
            .as_deref()
            .ok_or_else(|| QnetError::Usage("--op is required".into()))?,
    )?;
    let init = cfg
        .init
        .as_deref()
        .ok_or_else(|| QnetError::Usage("--init or --init-file is required".into()))?;
    let psi0 = if init.trim_start().starts_with("{\"") {
        let v: Value = serde_json::from_str(init).map_err(|e| QnetError::Usage(e.to_string()))?;
        state_vector_from_json(&v)?
    } else {
        StateVector::basis(parse_graph(init)?)
    };
    let universe = match (&cfg.universe, cfg.chain) {
        (Some(t), _) => Some(parse_universe(t)?.build()?),
        (None, Some(n)) => Some(chain_universe(n, &MOVERS)?),
        (None, None) => None,
    };
    let tol = cfg.tolerance.unwrap_or(1e-9);
    let steps = cfg.steps.unwrap_or(1);
    let norm0 = psi0.norm();
    let mut psi = psi0;
    let mut traj = Vec::new();
    for t in 0..=steps {
        if t > 0 {
            psi = op.apply(&psi);
        }
        if let Some(u) = &universe {
            if let Some(g) = psi.support().into_iter().find(|g| !u.contains(g)) {
                return Err(QnetError::SupportEscape {
                    graph: g.to_string(),
                });
            }
        }
        let norm = psi.norm();
        if (norm - norm0).abs() > tol {
            return Err(QnetError::NormDrift { step: t, norm });
        }
        traj.push(json!({"t": t, "norm": norm, "state": state_vector_json(&psi)}));
    }
    let label = universe.as_ref().map(|u| u.label().to_string());
    emit(
        &cfg,
        json!({"operator": op.to_string(), "universe": label, "trajectory": traj}),
    )?;
    Ok(exit::PASS)
}

fn cmd_decompose(a: DecomposeArgs) -> Result<i32> {
    let mut cfg = base_config(&a.common, "decompose")?;
    set(&mut cfg.op, a.op);
    set(&mut cfg.chain, a.chain);
    set(&mut cfg.cause, a.cause);
    set(&mut cfg.tolerance, a.tol);
    if a.ancilla || a.no_ancilla {
        cfg.ancilla = Some(a.ancilla);
    }
    finish_config(&mut cfg, &a.common)?;

    let ancilla = cfg
        .ancilla
        .ok_or_else(|| QnetError::Usage("pass --ancilla or --no-ancilla".into()))?;
    let op = parse_operator(
        cfg.op
            .as_deref()
            .ok_or_else(|| QnetError::Usage("--op is required".into()))?,
    )?;
    let n = cfg.chain.unwrap_or(2);
    if n == 0 {
        return Err(QnetError::Usage("--chain must be positive".into()));
    }
    let result = if ancilla {
        let u = chain_universe(n, &MOVERS)?;
        let cover = u.vertex_names();
        let cause: fn(&Name) -> Restriction = match cfg.cause.as_deref().unwrap_or("near") {
            "disk" => |v| Restriction::disk(Restriction::zeta(v.clone()), 1, false),
            "zeta" => |v| Restriction::zeta(v.clone()),
            _ => name_neighbourhood,
        };
        block_decompose(&op, &u, &cover, &cause, cfg.seed)?
    } else {
        let (plain, versioned) = versioned_chain(n, &MOVERS)?;
        block_decompose_no_ancilla(&op, &plain, &versioned, &key_pair_neighbourhood, cfg.seed)?
    };
    let tol = cfg.tolerance.unwrap_or(1e-9);
    let passed = result.passed(tol);
    eprintln!(
        "decompose {} ({}): {} (residual {:e}, commutators {:e} / {:e})",
        result.operator,
        result.variant,
        if passed { "PASS" } else { "FAIL" },
        result.residual,
        result.max_commutator_k,
        result.max_commutator_tau
    );
    emit(&cfg, json!({"result": result}))?;
    Ok(if passed { exit::PASS } else { exit::FAIL })
}

fn cmd_normalize(text: &str, kind: &str) -> Result<i32> {
    let out = match kind {
        "name" => parse_name(text)?.to_string(),
        "graph" => parse_graph(text)?.to_string(),
        "restriction" => parse_restriction(text)?.to_string(),
        _ if text.trim_start().starts_with('{') => parse_graph(text)?.to_string(),
        _ => match parse_name(text) {
            Ok(n) => n.to_string(),
            Err(e) => parse_restriction(text).map_err(|_| e)?.to_string(),
        },
    };
    println!("{out}");
    Ok(exit::PASS)
}

fn cmd_edges(text: &str) -> Result<i32> {
    let g = parse_graph(text)?;
    let edges: Vec<Value> = induced_edges(&g)
        .into_iter()
        .map(|(a, b)| json!([a.to_string(), b.to_string()]))
        .collect();
    print!(
        "{}",
        to_pretty(&json!({"graph": g.to_string(), "edges": edges}))
    );
    Ok(exit::PASS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE as u8 } else { 0 });
        }
    };
    let res = match cli.cmd {
        Cmd::Check(a) => cmd_check(a),
        Cmd::Evolve(a) => cmd_evolve(a),
        Cmd::Decompose(a) => cmd_decompose(a),
        Cmd::Edges { graph } => cmd_edges(&graph),
        Cmd::Normalize { text, kind } => cmd_normalize(&text, &kind),
    };
    match res {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
