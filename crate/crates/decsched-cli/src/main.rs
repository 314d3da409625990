//! decsched command line: solve instances, run the verification
//! oracles, and sweep experiments to CSV.
//!
//! Exit codes: 0 ok, 1 input error, 2 enumeration guard exceeded,
//! 3 internal invariant failure (including oracle check failures).

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use decsched::allocation::{allocate, delay_of_fixed_allocation, min_delay, AllocError};
use decsched::experiment::{
    run_experiment, solve, write_csv, ExperimentError, ExperimentKind, ExperimentSpec, PolicyName,
    SelectPolicy, SolveError,
};
use decsched::model::{
    generate_instance, parse_instance, render_instance, Instance, ModelError, Profile,
};
use decsched::ordering::{
    counterexample, heuristic_order, objective_v, optimized_plan, order_by_rate,
    order_descending_delay, order_exhaustive, order_for, verify_ratio, CounterexampleKind,
    Direction, OrderError, OrderPolicy, SuffixFill,
};
use decsched::selection::{select_exhaustive, select_greedy, select_linear, RankBy, SelectError};
use decsched::timeline::{render_gantt, sample_adversarial, validate, Features, TimelineError};
use decsched::tol::approx_ge;
use decsched::{CommPlan, EnumGuard};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "decsched", version, about = "Delay-minimal scheduling for distributed edge computing over a shared channel")]
struct Cli {
    /// Instance file (JSON)
    #[arg(long, global = true, value_name = "PATH")]
    instance: Option<PathBuf>,

    /// Seed for anything randomized
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Write the primary artifact here instead of stdout
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Communication-order policy: exhaustive | greedy:K | ldf | rate | aco
    #[arg(long, global = true, default_value = "exhaustive")]
    order: String,

    /// How greedy:K fills the unoptimized positions: ascending | heuristic
    #[arg(long, global = true, default_value = "ascending")]
    suffix: String,

    /// Node-selection method: all | linear:comm | linear:rate | greedy | exhaustive
    #[arg(long, global = true, default_value = "all")]
    select: String,

    /// Disable the enumeration guards entirely
    #[arg(long, global = true)]
    guard_override: bool,

    /// Override the instance workload
    #[arg(long, global = true)]
    workload: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded random instance
    Gen(GenArgs),
    /// Full pipeline: select, order, allocate, build the timeline
    Solve(SolveArgs),
    /// Optimal three-phase allocation for the chosen orders
    Allocate,
    /// Optimize one direction's communication order
    Order(OrderArgs),
    /// Choose which nodes execute the workload
    Select,
    /// Run the verification oracles against an instance
    Oracle(OracleArgs),
    /// Sweep experiments to CSV
    Experiment(ExperimentArgs),
    /// Build an appendix counterexample instance
    Counterexample(CounterexampleArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Number of nodes
    #[arg(long)]
    n: usize,
    /// Parameter profile: UMUC | UMDC | DMUC | DMDC
    #[arg(long)]
    profile: String,
}

#[derive(Args)]
struct SolveArgs {
    /// Also print a plain-text Gantt chart to stderr
    #[arg(long)]
    gantt: bool,
}

#[derive(Args)]
struct OrderArgs {
    /// fwd | bwd
    #[arg(long, default_value = "bwd")]
    direction: String,
    /// Also compute the exhaustive optimum v* for comparison
    #[arg(long)]
    vstar: bool,
}

#[derive(Args)]
struct OracleArgs {
    /// Random feasible allocations sampled for the dominance check
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    /// Adversarial timelines sampled for the structural check
    #[arg(long, default_value_t = 200)]
    timeline_samples: usize,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment spec file (JSON); overrides the inline flags
    #[arg(long, value_name = "PATH")]
    spec: Option<PathBuf>,
    /// ALLOC_VS_W | ORDER_VS_W | DELAY_VS_N
    #[arg(long)]
    kind: Option<String>,
    /// UMUC | UMDC | DMUC | DMDC
    #[arg(long)]
    profile: Option<String>,
    /// Sweep values: "0,2,4" or "start:end:step"
    #[arg(long)]
    sweep: Option<String>,
    /// Seeds: "1,2,3" or "1..20"
    #[arg(long, default_value = "1..20")]
    seeds: String,
    /// Comma-separated policy names
    #[arg(long, default_value = "OCA,ECA")]
    policies: String,
    /// Instance size for workload sweeps
    #[arg(long, default_value_t = 3)]
    n: usize,
}

#[derive(Args)]
struct CounterexampleArgs {
    /// ldf | fcl
    #[arg(long)]
    kind: String,
    /// Number of nodes
    #[arg(long, default_value_t = 3)]
    n: usize,
    /// Rate (ldf) or delay (fcl) scale factor
    #[arg(long, default_value_t = 100.0)]
    scale: f64,
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }

    fn guard(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    fn internal(message: impl Into<String>) -> Self {
        Self { code: 3, message: message.into() }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        Self::input(e.to_string())
    }
}

impl From<OrderError> for CliError {
    fn from(e: OrderError) -> Self {
        match e {
            OrderError::GuardExceeded { .. } => Self::guard(format!(
                "{e}; raise DECSCHED_GUARD or pass --guard-override"
            )),
            other => Self::input(other.to_string()),
        }
    }
}

impl From<AllocError> for CliError {
    fn from(e: AllocError) -> Self {
        Self::input(e.to_string())
    }
}

impl From<SelectError> for CliError {
    fn from(e: SelectError) -> Self {
        match e {
            SelectError::GuardExceeded { .. } => Self::guard(format!(
                "{e}; raise DECSCHED_GUARD or pass --guard-override"
            )),
            SelectError::Order(o) => o.into(),
            other => Self::input(other.to_string()),
        }
    }
}

impl From<TimelineError> for CliError {
    fn from(e: TimelineError) -> Self {
        Self::input(e.to_string())
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::Select(s) => s.into(),
            SolveError::Timeline(t) => t.into(),
            SolveError::Internal(msg) => Self::internal(msg),
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Order(o) => o.into(),
            ExperimentError::Select(s) => s.into(),
            other => Self::input(other.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        Self::input(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = u8::from(e.use_stderr());
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let guard = if cli.guard_override {
        EnumGuard::unlimited()
    } else {
        EnumGuard::from_env()
    };
    let fill = parse_suffix(&cli.suffix)?;
    let order_policy = parse_order_policy(&cli.order, fill)?;

    match &cli.command {
        Command::Gen(args) => {
            let profile: Profile = args.profile.parse()?;
            let mut inst = generate_instance(args.n, cli.seed, profile)?;
            if let Some(w) = cli.workload {
                inst = inst.with_workload(w)?;
            }
            emit(&cli.out, &render_instance(&inst))
        }
        Command::Counterexample(args) => {
            let kind = parse_counterexample_kind(&args.kind)?;
            let mut inst = counterexample(kind, args.n, args.scale)?;
            if let Some(w) = cli.workload {
                inst = inst.with_workload(w)?;
            }
            emit(&cli.out, &render_instance(&inst))
        }
        Command::Solve(args) => {
            let inst = load_instance(&cli)?;
            let select = parse_select(&cli.select)?;
            let solution = solve(&inst, select, order_policy, &guard)?;
            if args.gantt {
                eprint!("{}", render_gantt(&solution.timeline));
            }
            emit(&cli.out, &solution.to_json().to_string())
        }
        Command::Allocate => {
            let inst = load_instance(&cli)?;
            let ids: Vec<usize> = (0..inst.len()).collect();
            let plan = optimized_plan(&inst, &ids, order_policy, &guard)?;
            let alloc = allocate(&inst, &plan)?;
            let delay = min_delay(&inst, &plan)?;
            let report = serde_json::to_string(&alloc.report(delay))
                .map_err(|e| CliError::internal(e.to_string()))?;
            emit(&cli.out, &report)
        }
        Command::Order(args) => {
            let inst = load_instance(&cli)?;
            let direction = parse_direction(&args.direction)?;
            let ids: Vec<usize> = (0..inst.len()).collect();
            let order = order_for(&inst, &ids, direction, order_policy, &guard)?;
            let v = objective_v(&inst, &ids, &order, direction)?.value;
            let mut body = serde_json::json!({
                "direction": direction,
                "order": order,
                "v": v,
            });
            if args.vstar || order_policy == OrderPolicy::Exhaustive {
                let v_star = if order_policy == OrderPolicy::Exhaustive {
                    v
                } else {
                    order_exhaustive(&inst, &ids, direction, &guard)?.value
                };
                body["v_star"] = serde_json::json!(v_star);
            }
            emit(&cli.out, &body.to_string())
        }
        Command::Select => {
            let inst = load_instance(&cli)?;
            let result = match parse_select(&cli.select)? {
                SelectPolicy::All => {
                    let ids: Vec<usize> = (0..inst.len()).collect();
                    let plan = optimized_plan(&inst, &ids, order_policy, &guard)?;
                    let delay = min_delay(&inst, &plan)?;
                    serde_json::json!({ "plan": plan, "delay": delay, "method": "ALL", "trace": [] })
                }
                SelectPolicy::Linear(rank) => {
                    serde_json::to_value(select_linear(&inst, rank)?)
                        .map_err(|e| CliError::internal(e.to_string()))?
                }
                SelectPolicy::Greedy => {
                    serde_json::to_value(select_greedy(&inst, order_policy, &guard)?)
                        .map_err(|e| CliError::internal(e.to_string()))?
                }
                SelectPolicy::Exhaustive => {
                    serde_json::to_value(select_exhaustive(&inst, order_policy, &guard)?)
                        .map_err(|e| CliError::internal(e.to_string()))?
                }
            };
            emit(&cli.out, &result.to_string())
        }
        Command::Oracle(args) => {
            let inst = load_instance(&cli)?;
            run_oracle(&inst, args, cli.seed, &guard, &cli.out)
        }
        Command::Experiment(args) => {
            let spec = build_experiment_spec(&cli, args)?;
            let rows = run_experiment(&spec, &guard)?;
            let mut csv = Vec::new();
            write_csv(&rows, &mut csv).map_err(|e| CliError::internal(e.to_string()))?;
            emit_bytes(&cli.out, &csv)
        }
    }
}

fn load_instance(cli: &Cli) -> Result<Instance, CliError> {
    let path = cli
        .instance
        .as_ref()
        .ok_or_else(|| CliError::input("--instance PATH is required for this command"))?;
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let mut inst = parse_instance(&text)?;
    if let Some(w) = cli.workload {
        inst = inst.with_workload(w)?;
    }
    Ok(inst)
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    let mut body = text.to_string();
    if !body.ends_with('\n') {
        body.push('\n');
    }
    emit_bytes(out, body.as_bytes())
}

fn emit_bytes(out: &Option<PathBuf>, bytes: &[u8]) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, bytes)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display()))),
        None => {
            io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}

fn parse_order_policy(text: &str, fill: SuffixFill) -> Result<OrderPolicy, CliError> {
    let lower = text.to_ascii_lowercase();
    match lower.as_str() {
        "exhaustive" => Ok(OrderPolicy::Exhaustive),
        "ldf" => Ok(OrderPolicy::DescendingDelay),
        "rate" => Ok(OrderPolicy::ByRate),
        "aco" => Ok(OrderPolicy::Identity),
        _ => match lower.strip_prefix("greedy:") {
            Some(k) => {
                let k: usize = k
                    .parse()
                    .map_err(|_| CliError::input(format!("invalid greedy prefix length {k:?}")))?;
                if k == 0 {
                    return Err(CliError::input("greedy prefix length must be >= 1"));
                }
                Ok(OrderPolicy::GreedyPrefix { k, fill })
            }
            None => Err(CliError::input(format!(
                "unknown order policy {text:?} (expected exhaustive, greedy:K, ldf, rate, or aco)"
            ))),
        },
    }
}

fn parse_suffix(text: &str) -> Result<SuffixFill, CliError> {
    match text.to_ascii_lowercase().as_str() {
        "ascending" => Ok(SuffixFill::AscendingId),
        "heuristic" => Ok(SuffixFill::DescendingDelay),
        _ => Err(CliError::input(format!(
            "unknown suffix fill {text:?} (expected ascending or heuristic)"
        ))),
    }
}

fn parse_select(text: &str) -> Result<SelectPolicy, CliError> {
    match text.to_ascii_lowercase().as_str() {
        "all" => Ok(SelectPolicy::All),
        "linear:comm" => Ok(SelectPolicy::Linear(RankBy::CommDelay)),
        "linear:rate" => Ok(SelectPolicy::Linear(RankBy::Rate)),
        "greedy" => Ok(SelectPolicy::Greedy),
        "exhaustive" => Ok(SelectPolicy::Exhaustive),
        _ => Err(CliError::input(format!(
            "unknown selection method {text:?} (expected all, linear:comm, linear:rate, greedy, or exhaustive)"
        ))),
    }
}

fn parse_direction(text: &str) -> Result<Direction, CliError> {
    match text.to_ascii_lowercase().as_str() {
        "fwd" | "forward" => Ok(Direction::Forward),
        "bwd" | "backward" => Ok(Direction::Backward),
        _ => Err(CliError::input(format!(
            "unknown direction {text:?} (expected fwd or bwd)"
        ))),
    }
}

fn parse_counterexample_kind(text: &str) -> Result<CounterexampleKind, CliError> {
    match text.to_ascii_lowercase().as_str() {
        "ldf" => Ok(CounterexampleKind::Ldf),
        "fcl" => Ok(CounterexampleKind::Fcl),
        _ => Err(CliError::input(format!(
            "unknown counterexample kind {text:?} (expected ldf or fcl)"
        ))),
    }
}

fn parse_sweep(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = |msg: String| CliError::input(msg);
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(bad(format!("sweep range {text:?} must be start:end:step")));
        }
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| bad(format!("invalid sweep number {s:?}")))
        };
        let (start, end, step) = (parse(parts[0])?, parse(parts[1])?, parse(parts[2])?);
        if step <= 0.0 {
            return Err(bad("sweep step must be > 0".into()));
        }
        let mut values = Vec::new();
        let mut k = 0u32;
        loop {
            let value = start + f64::from(k) * step;
            if value > end + 1e-9 * end.abs().max(1.0) {
                break;
            }
            values.push(value);
            k += 1;
        }
        Ok(values)
    } else {
        text.split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| bad(format!("invalid sweep number {s:?}")))
            })
            .collect()
    }
}

fn parse_seeds(text: &str) -> Result<Vec<u64>, CliError> {
    if let Some((a, b)) = text.split_once("..") {
        let lo: u64 = a
            .trim()
            .parse()
            .map_err(|_| CliError::input(format!("invalid seed {a:?}")))?;
        let hi: u64 = b
            .trim()
            .parse()
            .map_err(|_| CliError::input(format!("invalid seed {b:?}")))?;
        if hi < lo {
            return Err(CliError::input(format!("empty seed range {text:?}")));
        }
        Ok((lo..=hi).collect())
    } else {
        text.split(',')
            .map(|s| {
                s.trim()
                    .parse::<u64>()
                    .map_err(|_| CliError::input(format!("invalid seed {s:?}")))
            })
            .collect()
    }
}

fn build_experiment_spec(cli: &Cli, args: &ExperimentArgs) -> Result<ExperimentSpec, CliError> {
    if let Some(path) = &args.spec {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        let spec: ExperimentSpec =
            serde_json::from_str(&text).map_err(|e| CliError::input(e.to_string()))?;
        return Ok(spec);
    }
    let kind: ExperimentKind = args
        .kind
        .as_deref()
        .ok_or_else(|| CliError::input("--kind (or --spec) is required"))?
        .parse()?;
    let profile: Profile = args
        .profile
        .as_deref()
        .ok_or_else(|| CliError::input("--profile (or --spec) is required"))?
        .parse()?;
    let sweep = parse_sweep(
        args.sweep
            .as_deref()
            .ok_or_else(|| CliError::input("--sweep (or --spec) is required"))?,
    )?;
    let policies = args
        .policies
        .split(',')
        .map(|s| s.trim().parse::<PolicyName>())
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ExperimentSpec {
        kind,
        profile,
        sweep,
        seeds: parse_seeds(&args.seeds)?,
        policies,
        nodes: args.n,
        workload: cli.workload.unwrap_or(10.0),
    })
}

// The verification report: every check the instance qualifies for,
// one PASS/FAIL line each, with observed margins.
fn run_oracle(
    inst: &Instance,
    args: &OracleArgs,
    seed: u64,
    guard: &EnumGuard,
    out: &Option<PathBuf>,
) -> Result<(), CliError> {
    let mut lines = Vec::new();
    let mut failures = 0usize;
    let mut check = |ok: bool, name: &str, detail: String| {
        lines.push(format!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" }));
        if !ok {
            failures += 1;
        }
    };

    let ids: Vec<usize> = (0..inst.len()).collect();
    let plan = optimized_plan(inst, &ids, OrderPolicy::Exhaustive, guard)?;
    let optimum = min_delay(inst, &plan)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Proposition 1: the three-phase allocation realizes the closed
    // form, and no sampled feasible allocation beats it.
    let alloc = allocate(inst, &plan)?;
    let achieved = delay_of_fixed_allocation(inst, &plan, alloc.totals())?;
    check(
        approx_ge(achieved, optimum) && approx_ge(optimum, achieved),
        "allocation-consistency",
        format!("three-phase delay {achieved} vs closed form {optimum}"),
    );
    let mut worst = f64::INFINITY;
    let mut dominated = true;
    for _ in 0..args.samples {
        let raw: Vec<f64> = (0..inst.len())
            .map(|_| -rng.random_range(0.0f64..1.0).ln())
            .collect();
        let total: f64 = raw.iter().sum();
        let loads: Vec<f64> = raw.iter().map(|&x| x * inst.workload() / total).collect();
        let d = delay_of_fixed_allocation(inst, &plan, &loads)?;
        worst = worst.min((d - optimum) / optimum.max(1.0));
        dominated &= approx_ge(d, optimum);
    }
    check(
        dominated,
        "allocation-dominance",
        format!("{} sampled allocations, worst relative margin {worst:+.3e}", args.samples),
    );

    // Proposition 4: greedy prefix ratio for every k, both directions.
    let mut ratio_ok = true;
    let mut ratio_detail = String::from("all k in 1..=n");
    'ratio: for direction in Direction::BOTH {
        for k in 1..=inst.len() {
            let r = verify_ratio(inst, &ids, direction, k, guard)?;
            if !r.holds {
                ratio_ok = false;
                ratio_detail = format!(
                    "{direction:?} k={k}: prefix {} < bound {}",
                    r.prefix_value, r.bound
                );
                break 'ratio;
            }
        }
    }
    check(ratio_ok, "greedy-ratio", ratio_detail);

    // Propositions 2/3 apply only when the instance qualifies.
    if inst.rates_uniform() {
        let mut ok = true;
        let mut detail = String::from("descending-delay order attains v* in both directions");
        for direction in Direction::BOTH {
            let closed = order_descending_delay(inst, &ids, direction)?;
            let v = objective_v(inst, &ids, &closed, direction)?.value;
            let best = order_exhaustive(inst, &ids, direction, guard)?;
            if !(approx_ge(v, best.value)) {
                ok = false;
                detail = format!("{direction:?}: closed form v={v} < v*={}", best.value);
            }
        }
        check(ok, "uniform-rate-order", detail);
    }
    if inst.delays_uniform() {
        let mut ok = true;
        let mut detail = String::from("rate order attains v* in both directions");
        for direction in Direction::BOTH {
            let closed = order_by_rate(inst, &ids, direction)?;
            let v = objective_v(inst, &ids, &closed, direction)?.value;
            let best = order_exhaustive(inst, &ids, direction, guard)?;
            if !(approx_ge(v, best.value)) {
                ok = false;
                detail = format!("{direction:?}: closed form v={v} < v*={}", best.value);
            }
        }
        check(ok, "uniform-delay-order", detail);
    }

    // Lemmas 1-3: adversarial valid timelines never beat the optimum.
    let combos = [
        (true, false, false),
        (false, true, false),
        (false, false, true),
        (true, true, true),
    ];
    let mut dominated = true;
    let mut worst = f64::INFINITY;
    let mut invalid = 0usize;
    for sample in 0..args.timeline_samples {
        let (preempt, idle, interleave) = combos[sample % combos.len()];
        let features = Features {
            preempt,
            idle,
            interleave: interleave && inst.len() >= 2,
        };
        let mut fwd = ids.clone();
        let mut bwd = ids.clone();
        fwd.shuffle(&mut rng);
        bwd.shuffle(&mut rng);
        let random_plan = CommPlan::new(ids.clone(), fwd, bwd)?;
        let raw: Vec<f64> = (0..inst.len())
            .map(|_| -rng.random_range(0.0f64..1.0).ln())
            .collect();
        let total: f64 = raw.iter().sum();
        let loads: Vec<f64> = raw.iter().map(|&x| x * inst.workload() / total).collect();
        let timeline = sample_adversarial(inst, &random_plan, &loads, rng.random(), features)?;
        if !validate(&timeline, inst, &random_plan, &loads).is_empty() {
            invalid += 1;
            continue;
        }
        worst = worst.min((timeline.horizon - optimum) / optimum.max(1.0));
        dominated &= approx_ge(timeline.horizon, optimum);
    }
    check(
        dominated && invalid == 0,
        "schedule-dominance",
        format!(
            "{} adversarial timelines ({invalid} invalid), worst relative margin {worst:+.3e}",
            args.timeline_samples
        ),
    );

    // Heuristic-order quality, reported for reference.
    for (kind, name) in [
        (CounterexampleKind::Ldf, "ldf-order-ratio"),
        (CounterexampleKind::Fcl, "fcl-order-ratio"),
    ] {
        let order = heuristic_order(kind, inst, &ids, Direction::Backward)?;
        let v = objective_v(inst, &ids, &order, Direction::Backward)?.value;
        let best = order_exhaustive(inst, &ids, Direction::Backward, guard)?;
        let detail = if best.value > 0.0 {
            format!("v/v* = {:.6e}", v / best.value)
        } else {
            "degenerate (v* = 0)".to_string()
        };
        check(true, name, detail);
    }

    let mut body = lines.join("\n");
    body.push('\n');
    emit_bytes(out, body.as_bytes())?;
    if failures > 0 {
        Err(CliError::internal(format!("{failures} oracle check(s) failed")))
    } else {
        Ok(())
    }
}
