//! Command-line interface. Exit codes: 0 success, 1 domain error or
//! malformed input, 2 result cut short by a budget.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use density_forge_core::arrays::{
    array_collapse, hypersimple_gaps, normalize_array, trace_hit_report, weak_trace_from_perm, GapOptions, StrongArray,
};
use density_forge_core::coding::{factorial_code, oscillator, oscillator_bounds, ruler_collapse, ruler_set, Bound};
use density_forge_core::density::{density_profile, smallness_report, Schedule, SmallnessOptions, SmallnessVerdict};
use density_forge_core::describe::oracle::{oracle_collapse, CollapseMode, OracleMachine};
use density_forge_core::describe::{combine_total, evaluate_description, Answer, ViolationKind};
use density_forge_core::forge::{
    factorial_swap, injective_to_permutation, range_patch, star_injective_to_injective, thin_ce_subset, ForgeError,
    ForgeOptions,
};
use density_forge_core::oracle_sim::{
    designated_diagonal, doubling_checks, jump_strategy, JumpHalt, JumpOptions, Rejection, Suitability,
};
use density_forge_core::set_calculus::{Mapping, Verdict};
use density_forge_core::{Budget, Density, Nat, DEFAULT_BUDGET};
use serde_json::{json, Value};

use crate::output::{
    density_json, lossy, nats, profile_json, profile_rows, verdict_str, write_bytes, write_json, Format, Report,
    PROFILE_HEADER,
};
use crate::spec_file::{
    load_description, load_func, load_func_list, load_mapping_list, load_perm, load_set, load_set_list, read_json,
    LoadError,
};

/// Environment variable for the default step budget.
pub const BUDGET_ENV: &str = "DENSITY_FORGE_BUDGET";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error("{0}")]
    Domain(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

fn domain<T>(message: impl std::fmt::Display) -> Result<T, CliError> {
    Err(CliError::Domain(message.to_string()))
}

/// Whether a finished command was cut short by a budget.
pub enum Status {
    Complete,
    Partial,
}

#[derive(Parser, Debug)]
#[command(name = "density-forge", version, about = "Exact partial densities and explicit constructions on step-budgeted sets")]
pub struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Steps per membership or evaluation query (default from DENSITY_FORGE_BUDGET, else 1048576).
    #[arg(long, global = true)]
    budget: Option<Budget>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format; csv by default, json for simulate-jump.
    #[arg(long, value_enum, global = true)]
    format: Option<Format>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact partial densities at each checkpoint of a schedule.
    DensityProfile {
        #[arg(long)]
        set: String,
        /// upto:N, factorials:K, alternating:K or a comma list.
        #[arg(long, default_value = "upto:100")]
        schedule: Schedule,
    },
    /// Densities of a set's images under permutations and functions.
    Smallness {
        #[arg(long)]
        set: String,
        /// Permutation specs (repeatable).
        #[arg(long)]
        perm: Vec<String>,
        /// Function specs (repeatable).
        #[arg(long)]
        func: Vec<String>,
        #[arg(long, default_value_t = 1000)]
        window: Nat,
        #[arg(long)]
        tail_start: Option<Nat>,
        /// Exact threshold such as 1/10.
        #[arg(long, default_value = "1/10")]
        threshold: String,
        #[arg(long)]
        admit_oracle_backed: bool,
    },
    /// Turn functions into permutations or injections on a window.
    BuildPerm {
        #[arg(long, value_enum)]
        construction: Construction,
        #[arg(long)]
        func: Option<String>,
        /// The infinite set whose elements fill the gaps.
        #[arg(long)]
        h: Option<String>,
        /// The set for factorial-swap.
        #[arg(long)]
        set: Option<String>,
        #[arg(long, default_value_t = 1000)]
        window: Nat,
        #[arg(long, default_value_t = 1 << 20)]
        search_limit: Nat,
        /// Also write a JSON spec that loads the CSV written to --out.
        #[arg(long, requires = "out")]
        spec_out: Option<PathBuf>,
    },
    /// A thin subset of an enumerable set.
    ThinCe {
        #[arg(long)]
        set: String,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 1 << 20)]
        limit: Nat,
    },
    /// The factorial-code set of X and its refusing description.
    FactorialCode {
        #[arg(long)]
        set: String,
        #[arg(long, default_value_t = 720)]
        window: Nat,
    },
    /// The oscillating set built from C, or its bound table.
    Oscillator {
        #[arg(long)]
        base: String,
        #[arg(long, default_value = "factorials:6")]
        schedule: Schedule,
        /// Check both factorial bounds up to the schedule's last checkpoint.
        #[arg(long)]
        check_bounds: bool,
    },
    /// A ruler set's profile, or the ruler partition of a window.
    Ruler {
        /// Profile the ruler set with this index.
        #[arg(long)]
        e: Option<Nat>,
        #[arg(long, default_value = "upto:64")]
        schedule: Schedule,
        /// Partition window when --e is absent.
        #[arg(long, default_value_t = 64)]
        window: Nat,
    },
    /// Gaps of the hypersimple-style construction (e, u, m).
    Gaps {
        #[arg(long)]
        set: String,
        #[arg(long, default_value_t = 4)]
        stages: usize,
        /// Enumeration stages allowed per gap.
        #[arg(long, default_value_t = 1 << 22)]
        stage_budget: u64,
        #[arg(long, default_value_t = 1 << 26)]
        value_limit: Nat,
        /// Also profile W on this schedule.
        #[arg(long)]
        schedule: Option<Schedule>,
    },
    /// Hit counts of a permutation's weak trace against a set.
    Trace {
        #[arg(long)]
        perm: String,
        #[arg(long)]
        set: String,
        #[arg(long, default_value_t = 720)]
        window: Nat,
        /// Emit the trace cells up to this factorial index instead.
        #[arg(long)]
        cells: Option<Nat>,
    },
    /// Normalize a strong array and collapse it to a function.
    ArrayCollapse {
        /// JSON file holding an array of arrays of naturals.
        #[arg(long)]
        array: PathBuf,
        #[arg(long, default_value_t = 100)]
        window: Nat,
        /// Normalize to this many cells first.
        #[arg(long)]
        normalize: Option<usize>,
    },
    /// Run the stage-by-stage jump strategy.
    SimulateJump {
        /// A spec or JSON array of func/perm specs.
        #[arg(long)]
        family: String,
        /// A JSON array of set specs, a single spec, or rulers:K.
        #[arg(long)]
        targets: String,
        #[arg(long, default_value_t = 5)]
        stages: usize,
        #[arg(long, default_value_t = 1 << 20)]
        search_limit: Nat,
        #[arg(long, default_value_t = 256)]
        admission_window: Nat,
        /// Write the constructed set as an explicit finite set spec.
        #[arg(long)]
        set_out: Option<PathBuf>,
    },
    /// Flip a set at designated points against a list of machines.
    Diagonal {
        #[arg(long)]
        set: String,
        /// A spec or JSON array of func specs, one per index.
        #[arg(long)]
        machines: String,
        /// Comma list of index:point pairs.
        #[arg(long)]
        designated: String,
        /// Write the diagonal set as a patch spec.
        #[arg(long)]
        set_out: Option<PathBuf>,
    },
    /// Evaluate a description against a set on a window.
    DescribeEval {
        #[arg(long)]
        desc: String,
        #[arg(long)]
        set: String,
        #[arg(long, default_value_t = 100)]
        window: Nat,
        /// Wrap the description so it is total at this fixed resolution.
        #[arg(long)]
        total: Option<Budget>,
    },
    /// Search injective graph prefixes for a built-in oracle machine.
    OracleCollapse {
        #[arg(long, value_enum)]
        machine: MachineKind,
        /// Output of the constant machine.
        #[arg(long, default_value_t = 0)]
        value: Nat,
        /// Set read by echo machines.
        #[arg(long)]
        set: Option<String>,
        #[arg(long, default_value_t = 0)]
        refuse_below: Nat,
        #[arg(long, default_value_t = 0)]
        extra_reads: Nat,
        /// Column read by copy-bit.
        #[arg(long, default_value_t = 0)]
        column: Nat,
        /// Inputs 0..n.
        #[arg(long, default_value_t = 8)]
        n: Nat,
        #[arg(long, default_value_t = 64)]
        sigma_bound: Nat,
        /// Accept only answers 0 and 1.
        #[arg(long)]
        decisive: bool,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Construction {
    /// Injective f with decidable range into a permutation.
    Permutation,
    /// Star-injective f into an injection.
    Injection,
    /// Injective f patched so its range becomes decidable.
    RangePatch,
    /// Swap n! and the n-th element of a set.
    FactorialSwap,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MachineKind {
    Constant,
    Echo,
    MixedEcho,
    CopyBit,
}

/// Parse arguments, run, print errors to stderr, and return the exit code.
pub fn run(args: impl IntoIterator<Item = std::ffi::OsString>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => return clap_exit(e),
    };
    match execute(cli.command, &cli.common) {
        Ok(Status::Complete) => 0,
        Ok(Status::Partial) => 2,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn clap_exit(e: clap::Error) -> i32 {
    let _ = e.print();
    if e.use_stderr() {
        1
    } else {
        0
    }
}

struct Context<'a> {
    budget: Budget,
    out: Option<&'a Path>,
    format: Format,
}

impl Context<'_> {
    fn emit(&self, report: Report) -> Result<Status, CliError> {
        write_bytes(self.out, &report.render(self.format)?)?;
        Ok(if report.partial { Status::Partial } else { Status::Complete })
    }
}

fn resolve_budget(flag: Option<Budget>) -> Result<Budget, CliError> {
    if let Some(b) = flag {
        return Ok(b);
    }
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v.trim().parse().or_else(|_| domain(format!("{BUDGET_ENV}={v:?} is not a step count"))),
        Err(_) => Ok(DEFAULT_BUDGET),
    }
}

fn checkpoints(schedule: &Schedule) -> Result<Vec<Nat>, CliError> {
    schedule.checkpoints().or_else(domain)
}

fn positive_window(window: Nat) -> Result<(), CliError> {
    if window == 0 {
        return domain("window must be positive");
    }
    Ok(())
}

fn execute(command: Command, common: &Common) -> Result<Status, CliError> {
    let default_format = if matches!(command, Command::SimulateJump { .. }) { Format::Json } else { Format::Csv };
    let format = common.format.unwrap_or(default_format);
    let ctx = Context { budget: resolve_budget(common.budget)?, out: common.out.as_deref(), format };
    let report = match command {
        Command::DensityProfile { set, schedule } => density_profile_cmd(&ctx, &set, &schedule)?,
        Command::Smallness { set, perm, func, window, tail_start, threshold, admit_oracle_backed } => {
            let threshold = parse_ratio(&threshold)?;
            let mut opts = SmallnessOptions::new(window);
            opts.tail_start = tail_start;
            opts.threshold = threshold;
            opts.budget = ctx.budget;
            opts.admit_oracle_backed = admit_oracle_backed;
            smallness_cmd(&set, &perm, &func, &opts)?
        }
        Command::BuildPerm { construction, func, h, set, window, search_limit, spec_out } => {
            let opts = ForgeOptions { window, budget: ctx.budget, search_limit };
            return build_perm_cmd(&ctx, construction, func, h, set, &opts, spec_out.as_deref());
        }
        Command::ThinCe { set, count, limit } => {
            let (c, _) = load_set(&set)?;
            let thin = thin_ce_subset(&c, count, ctx.budget, limit);
            let rows = thin.values.iter().enumerate().map(|(i, v)| vec![i.to_string(), v.to_string()]).collect();
            Report::new(json!({"set": c.name(), "values": nats(&thin.values)}), vec!["index", "value"], rows, thin.partial)
        }
        Command::FactorialCode { set, window } => factorial_code_cmd(&ctx, &set, window)?,
        Command::Oscillator { base, schedule, check_bounds } => oscillator_cmd(&ctx, &base, &schedule, check_bounds)?,
        Command::Ruler { e, schedule, window } => ruler_cmd(&ctx, e, &schedule, window)?,
        Command::Gaps { set, stages, stage_budget, value_limit, schedule } => {
            let opts = GapOptions { stages, budget: stage_budget, horizon: ctx.budget, value_limit };
            gaps_cmd(&ctx, &set, &opts, schedule.as_ref())?
        }
        Command::Trace { perm, set, window, cells } => trace_cmd(&ctx, &perm, &set, window, cells)?,
        Command::ArrayCollapse { array, window, normalize } => array_cmd(&array, window, normalize)?,
        Command::SimulateJump { family, targets, stages, search_limit, admission_window, set_out } => {
            let opts = JumpOptions { stages, budget: ctx.budget, search_limit, admission_window };
            jump_cmd(&family, &targets, &opts, set_out.as_deref())?
        }
        Command::Diagonal { set, machines, designated, set_out } => {
            diagonal_cmd(&ctx, &set, &machines, &designated, set_out.as_deref())?
        }
        Command::DescribeEval { desc, set, window, total } => describe_cmd(&ctx, &desc, &set, window, total)?,
        Command::OracleCollapse { machine, value, set, refuse_below, extra_reads, column, n, sigma_bound, decisive } => {
            let machine = match machine {
                MachineKind::Constant => OracleMachine::Constant { value },
                MachineKind::CopyBit => OracleMachine::CopyBit { column },
                MachineKind::Echo | MachineKind::MixedEcho => {
                    let Some(set) = set else { return domain("echo machines need --set") };
                    let (set, _) = load_set(&set)?;
                    if matches!(machine, MachineKind::Echo) {
                        OracleMachine::Echo { set }
                    } else {
                        OracleMachine::MixedEcho { set, refuse_below, extra_reads }
                    }
                }
            };
            let mode = if decisive { CollapseMode::Decisive } else { CollapseMode::Convergence };
            collapse_cmd(&ctx, &machine, n, sigma_bound, mode)
        }
    };
    ctx.emit(report)
}

fn parse_ratio(s: &str) -> Result<Density, CliError> {
    let parsed = match s.split_once('/') {
        Some((a, b)) => a.trim().parse::<u64>().ok().zip(b.trim().parse::<u64>().ok()),
        None => s.trim().parse::<u64>().ok().map(|a| (a, 1)),
    };
    match parsed {
        Some((a, b)) if b > 0 => Ok(Density::new(a, b)),
        _ => domain(format!("{s:?} is not a ratio a/b with b > 0")),
    }
}

fn density_profile_cmd(ctx: &Context<'_>, set: &str, schedule: &Schedule) -> Result<Report, CliError> {
    let (set, _) = load_set(set)?;
    let points = checkpoints(schedule)?;
    let profile = density_profile(&set, &points, ctx.budget).or_else(domain)?;
    let json = json!({"set": set.name(), "schedule": schedule.to_string(), "rows": profile_json(&profile)});
    Ok(Report::new(json, PROFILE_HEADER.to_vec(), profile_rows(&profile), !profile.is_exact()))
}

fn smallness_cmd(set: &str, perms: &[String], funcs: &[String], opts: &SmallnessOptions) -> Result<Report, CliError> {
    positive_window(opts.window)?;
    let (set, _) = load_set(set)?;
    let mut family = Vec::new();
    for p in perms {
        family.push(Mapping::Perm(load_perm(p)?));
    }
    for f in funcs {
        family.push(Mapping::Func(load_func(f)?));
    }
    if family.is_empty() {
        family.push(Mapping::Perm(density_forge_core::set_calculus::PermSpec::identity()));
    }
    let report = smallness_report(&set, &family, opts);
    let witness = |w: Option<density_forge_core::density::Witness>| match w {
        Some(w) => json!({"n": w.n, "value": density_json(w.value)}),
        None => Value::Null,
    };
    let mut partial = false;
    let mut rows = Vec::new();
    let mut json_rows = Vec::new();
    for r in &report.rows {
        let (verdict, refuted_at) = match r.verdict {
            SmallnessVerdict::ConsistentWithDensityZero => ("consistent", None),
            SmallnessVerdict::RefutedOnWindow { witness } => ("refuted", Some(witness)),
            SmallnessVerdict::Inconclusive => {
                partial = true;
                ("inconclusive", None)
            }
        };
        let max = r.max_tail;
        rows.push(vec![
            r.name.clone(),
            verdict.to_string(),
            r.window.to_string(),
            r.tail_start.to_string(),
            r.certified_below.to_string(),
            max.map(|w| w.n.to_string()).unwrap_or_default(),
            max.map(|w| w.value.numer().to_string()).unwrap_or_default(),
            max.map(|w| w.value.denom().to_string()).unwrap_or_default(),
            max.map(|w| lossy(w.value)).unwrap_or_default(),
        ]);
        json_rows.push(json!({
            "name": r.name,
            "verdict": verdict,
            "refuted_at": witness(refuted_at),
            "window": r.window,
            "tail_start": r.tail_start,
            "certified_below": r.certified_below,
            "max_tail": witness(r.max_tail),
            "min_tail": witness(r.min_tail),
        }));
    }
    let header = vec![
        "name",
        "verdict",
        "window",
        "tail_start",
        "certified_below",
        "max_tail_n",
        "max_tail_numerator",
        "max_tail_denominator",
        "max_tail_decimal_lossy",
    ];
    let json = json!({
        "set": report.set,
        "threshold": density_json(opts.threshold),
        "excluded": report.excluded,
        "rows": json_rows,
    });
    Ok(Report::new(json, header, rows, partial))
}

fn forge_failure(e: ForgeError) -> Result<Status, CliError> {
    eprintln!("error: {e}");
    Ok(match e {
        ForgeError::Undefined { .. } | ForgeError::Unresolved { .. } | ForgeError::HExhausted { .. } => Status::Partial,
        _ => return Err(CliError::Domain(e.to_string())),
    })
}

fn build_perm_cmd(
    ctx: &Context<'_>,
    construction: Construction,
    func: Option<String>,
    h: Option<String>,
    set: Option<String>,
    opts: &ForgeOptions,
    spec_out: Option<&Path>,
) -> Result<Status, CliError> {
    positive_window(opts.window)?;
    let need = |arg: Option<String>, flag: &str| match arg {
        Some(a) => Ok(a),
        None => domain(format!("{construction:?} needs --{flag}").to_lowercase()),
    };
    let (kind, table, extra) = match construction {
        Construction::FactorialSwap | Construction::Permutation => {
            let forged = if let Construction::FactorialSwap = construction {
                factorial_swap(&load_set(&need(set, "set")?)?.0, opts)
            } else {
                let f = load_func(&need(func, "func")?)?;
                injective_to_permutation(&f, &load_set(&need(h, "h")?)?.0, opts)
            };
            let forged = match forged {
                Ok(p) => p,
                Err(e) => return forge_failure(e),
            };
            let table: Vec<Option<Nat>> = forged.forward.clone();
            (
                "perm",
                table,
                json!({"name": forged.perm.name(), "covered_below": forged.covered_below}),
            )
        }
        Construction::Injection | Construction::RangePatch => {
            let f = load_func(&need(func, "func")?)?;
            let h = load_set(&need(h, "h")?)?.0;
            let forged = if let Construction::Injection = construction {
                star_injective_to_injective(&f, &h, opts)
            } else {
                range_patch(&f, &h, opts)
            };
            let forged = match forged {
                Ok(f) => f,
                Err(e) => return forge_failure(e),
            };
            (
                "func",
                forged.table.iter().map(|&v| Some(v)).collect(),
                json!({"name": forged.func.name(), "replaced": nats(&forged.replaced)}),
            )
        }
    };
    // A table_file spec needs every value; a window with gaps is partial.
    let complete: Option<Vec<Nat>> = table.iter().copied().collect();
    let rows = table
        .iter()
        .enumerate()
        .map(|(n, v)| vec![n.to_string(), v.map(|v| v.to_string()).unwrap_or_default()])
        .collect();
    let mut json = json!({"construction": format!("{construction:?}").to_lowercase(), "kind": kind, "window": opts.window,
        "table": table.iter().map(|v| v.map(Value::from).unwrap_or(Value::Null)).collect::<Vec<_>>()});
    if let (Value::Object(map), Value::Object(more)) = (&mut json, extra) {
        map.extend(more);
    }
    let status = ctx.emit(Report::new(json, vec!["n", "value"], rows, complete.is_none()))?;
    if let (Some(spec_out), Some(out)) = (spec_out, ctx.out) {
        if complete.is_none() {
            return domain("the table has unresolved entries, so no table_file spec was written");
        }
        if ctx.format != Format::Csv {
            return domain("--spec-out needs --format csv so the table file is loadable");
        }
        let spec = json!({"kind": kind, "combinator": "table_file", "args": [out.display().to_string()]});
        write_json(spec_out, &spec)?;
    }
    Ok(status)
}

fn answer_str(a: Answer) -> &'static str {
    match a {
        Answer::Zero => "0",
        Answer::One => "1",
        Answer::Box => "box",
        Answer::Diverged => "diverged",
    }
}

fn factorial_code_cmd(ctx: &Context<'_>, set: &str, window: Nat) -> Result<Report, CliError> {
    let (x, _) = load_set(set)?;
    let (a, d) = factorial_code(&x);
    let mut members = Vec::new();
    let mut rows = Vec::new();
    let mut partial = false;
    for n in 0..window {
        let v = a.membership(n, ctx.budget);
        partial |= !v.is_resolved();
        if v == Verdict::In {
            members.push(n);
        }
        rows.push(vec![n.to_string(), verdict_str(v).to_string(), answer_str(d.answer(n, ctx.budget)).to_string()]);
    }
    let report = evaluate_description(&d, &a, window, ctx.budget);
    let json = json!({
        "base": x.name(),
        "set": a.name(),
        "members": nats(&members),
        "description": d.name(),
        "mode": format!("{:?}", d.mode()),
        "errors": report.errors.len(),
        "valid": report.is_valid(),
    });
    Ok(Report::new(json, vec!["n", "membership", "answer"], rows, partial))
}

fn oscillator_cmd(ctx: &Context<'_>, base: &str, schedule: &Schedule, check: bool) -> Result<Report, CliError> {
    let (c, _) = load_set(base)?;
    let w = oscillator(&c);
    let points = checkpoints(schedule)?;
    if !check {
        let profile = density_profile(&w, &points, ctx.budget).or_else(domain)?;
        let json = json!({"set": w.name(), "schedule": schedule.to_string(), "rows": profile_json(&profile)});
        return Ok(Report::new(json, PROFILE_HEADER.to_vec(), profile_rows(&profile), !profile.is_exact()));
    }
    let limit = points.last().copied().unwrap_or(0);
    let checks = oscillator_bounds(&w, limit, ctx.budget);
    let partial = checks.iter().any(|c| c.unresolved > 0);
    if let Some(bad) = checks.iter().find(|c| !c.holds && c.unresolved == 0) {
        return domain(format!("bound fails at j = {}, checkpoint {}: {} vs {}", bad.j, bad.checkpoint, bad.value, bad.bound));
    }
    let kind = |b: Bound| match b {
        Bound::Lower => "lower",
        Bound::Upper => "upper",
    };
    let rows = checks
        .iter()
        .map(|c| {
            vec![
                c.j.to_string(),
                kind(c.kind).to_string(),
                c.checkpoint.to_string(),
                c.count.to_string(),
                c.value.numer().to_string(),
                c.value.denom().to_string(),
                c.bound.numer().to_string(),
                c.bound.denom().to_string(),
                c.unresolved.to_string(),
                c.holds.to_string(),
            ]
        })
        .collect();
    let json_rows: Vec<Value> = checks
        .iter()
        .map(|c| {
            json!({"j": c.j, "kind": kind(c.kind), "checkpoint": c.checkpoint, "count": c.count,
                "value": density_json(c.value), "bound": density_json(c.bound), "unresolved": c.unresolved, "holds": c.holds})
        })
        .collect();
    let header = vec![
        "j",
        "kind",
        "checkpoint",
        "count",
        "numerator",
        "denominator",
        "bound_numerator",
        "bound_denominator",
        "unresolved",
        "holds",
    ];
    Ok(Report::new(json!({"set": w.name(), "limit": limit, "checks": json_rows}), header, rows, partial))
}

fn ruler_cmd(ctx: &Context<'_>, e: Option<Nat>, schedule: &Schedule, window: Nat) -> Result<Report, CliError> {
    if let Some(e) = e {
        let set = ruler_set(e);
        let points = checkpoints(schedule)?;
        let profile = density_profile(&set, &points, ctx.budget).or_else(domain)?;
        let json = json!({"set": set.name(), "schedule": schedule.to_string(), "rows": profile_json(&profile)});
        return Ok(Report::new(json, PROFILE_HEADER.to_vec(), profile_rows(&profile), !profile.is_exact()));
    }
    let collapse = ruler_collapse();
    let mut rows = Vec::new();
    let mut cells = Vec::new();
    for n in 1..window {
        let Some(index) = collapse.evaluate(n, ctx.budget).ok().and_then(|v| v.defined()) else {
            return domain(format!("the ruler collapse did not resolve at {n}"));
        };
        let owners: Vec<Nat> = (0..64).filter(|&k| ruler_set(k).membership(n, ctx.budget) == Verdict::In).collect();
        if owners != [index] {
            return domain(format!("{n} lies in ruler sets {owners:?}, expected only {index}"));
        }
        rows.push(vec![n.to_string(), index.to_string()]);
        cells.push(json!({"n": n, "ruler": index}));
    }
    Ok(Report::new(json!({"window": window, "partition": cells}), vec!["n", "ruler"], rows, false))
}

fn gaps_cmd(ctx: &Context<'_>, set: &str, opts: &GapOptions, schedule: Option<&Schedule>) -> Result<Report, CliError> {
    let (c, _) = load_set(set)?;
    let built = hypersimple_gaps(&c, opts);
    let rows = built
        .gaps
        .iter()
        .enumerate()
        .map(|(e, g)| vec![e.to_string(), g.start.to_string(), g.width.to_string()])
        .collect();
    let gaps: Vec<Value> = built
        .gaps
        .iter()
        .zip(&built.found_at)
        .enumerate()
        .map(|(e, (g, at))| json!({"e": e, "u": g.start, "m": g.width, "found_at": at}))
        .collect();
    let diagnostic = built.partial.map(|d| {
        json!({"gap": d.gap, "stages_spent": d.stages_spent, "enumerated": d.enumerated,
            "enumeration_exhausted": d.enumeration_exhausted})
    });
    let mut json = json!({"set": c.name(), "gaps": gaps, "exact_below": built.exact_below, "diagnostic": diagnostic});
    let mut partial = built.partial.is_some();
    if let Some(schedule) = schedule {
        let points = checkpoints(schedule)?;
        let profile = density_profile(&built.w, &points, ctx.budget).or_else(domain)?;
        partial |= !profile.is_exact();
        json["w_profile"] = profile_json(&profile);
    }
    Ok(Report::new(json, vec!["e", "u", "m"], rows, partial))
}

fn trace_cmd(ctx: &Context<'_>, perm: &str, set: &str, window: Nat, cells: Option<Nat>) -> Result<Report, CliError> {
    let pi = load_perm(perm)?;
    if let Some(n_max) = cells {
        let trace = weak_trace_from_perm(&pi, n_max, ctx.budget).or_else(domain)?;
        let rows = trace
            .cells
            .iter()
            .zip(&trace.bounds)
            .enumerate()
            .map(|(n, (c, b))| vec![n.to_string(), b.to_string(), c.len().to_string()])
            .collect();
        let json = json!({"perm": pi.name(), "cells": trace.cells, "bounds": nats(&trace.bounds),
            "respects_bounds": trace.respects_bounds()});
        return Ok(Report::new(json, vec!["n", "bound", "size"], rows, false));
    }
    let (a, _) = load_set(set)?;
    let report = trace_hit_report(&pi, &a, window, ctx.budget).or_else(domain)?;
    if !report.all_hold() {
        let bad = report.rows.iter().find(|r| !r.holds).expect("some row fails");
        return domain(format!(
            "hit bound fails at n = {}: {} hits against {}/{}",
            bad.n, bad.count, bad.bound_numerator, bad.bound_denominator
        ));
    }
    let rows = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                r.count.to_string(),
                r.m.to_string(),
                r.bound_numerator.to_string(),
                r.bound_denominator.to_string(),
                r.holds.to_string(),
            ]
        })
        .collect();
    let json_rows: Vec<Value> = report
        .rows
        .iter()
        .map(|r| {
            json!({"n": r.n, "count": r.count, "m": r.m, "bound_numerator": r.bound_numerator,
                "bound_denominator": r.bound_denominator, "holds": r.holds})
        })
        .collect();
    let json = json!({"perm": pi.name(), "set": a.name(), "s": report.s, "hits": report.hits, "rows": json_rows});
    Ok(Report::new(json, vec!["n", "count", "m", "bound_numerator", "bound_denominator", "holds"], rows, false))
}

fn array_cmd(path: &Path, window: Nat, normalize: Option<usize>) -> Result<Report, CliError> {
    let value = read_json(path)?;
    let cells: Vec<Vec<Nat>> = serde_json::from_value(value)
        .or_else(|e| domain(format!("{}: expected an array of arrays of naturals: {e}", path.display())))?;
    let mut array = StrongArray::new(cells).or_else(domain)?;
    let mut partial = false;
    if let Some(count) = normalize {
        let normalized = normalize_array(&array, count);
        partial = normalized.partial;
        array = normalized.array;
    }
    let collapse = array_collapse(&array, window).or_else(domain)?;
    let mut sizes = Vec::new();
    let rows = collapse
        .table
        .iter()
        .enumerate()
        .map(|(n, &v)| {
            let size = collapse.size_witness.evaluate(v, 1 << 20).ok().and_then(|e| e.defined());
            sizes.push(size);
            vec![n.to_string(), v.to_string(), size.map(|s| s.to_string()).unwrap_or_default()]
        })
        .collect();
    let json = json!({"cells": array.cells(), "table": nats(&collapse.table), "sizes": sizes,
        "certified_below": collapse.certified_below});
    Ok(Report::new(json, vec!["n", "f", "fibre_size"], rows, partial))
}

fn suitability_json(s: &Suitability) -> Value {
    match *s {
        Suitability::Suitable => json!("suitable"),
        Suitability::NotYetEligible => json!("not_yet_eligible"),
        Suitability::Rejected => json!("rejected"),
        Suitability::DomainUnresolved { input } => json!({"domain_unresolved": input}),
        Suitability::RangeUnresolved { value } => json!({"range_unresolved": value}),
    }
}

fn jump_cmd(family: &str, targets: &str, opts: &JumpOptions, set_out: Option<&Path>) -> Result<Report, CliError> {
    let family = load_mapping_list(family)?;
    let targets = load_set_list(targets)?;
    let run = jump_strategy(&family, &targets, opts);
    let log = &run.log;
    let rejected: Vec<Value> = log
        .rejected
        .iter()
        .map(|(i, r)| {
            let reason = match r {
                Rejection::NotPermutation(v) => format!("not a permutation: {v:?}"),
                Rejection::NotInjective { first, second, value } => format!("f({first}) = f({second}) = {value}"),
            };
            json!({"index": i, "name": family[*i].name(), "reason": reason})
        })
        .collect();
    let stages: Vec<Value> = log
        .stages
        .iter()
        .map(|s| {
            json!({"stage": s.stage, "chosen": s.chosen, "restraint": s.restraint, "budget_spent": s.budget_spent,
                "suitability": s.suitability.iter().map(suitability_json).collect::<Vec<_>>()})
        })
        .collect();
    let halted = log.halted.map(|h| match h {
        JumpHalt::NoTarget { stage } => json!({"no_target": stage}),
        JumpHalt::TargetExhausted { stage, restraint } => json!({"target_exhausted": {"stage": stage, "restraint": restraint}}),
    });
    let doubling: Vec<Value> = doubling_checks(&family, log, opts.budget)
        .iter()
        .map(|d| json!({"member": d.member, "stage": d.stage, "image": d.image, "previous_max": d.previous_max, "holds": d.holds}))
        .collect();
    let picks = log.picks();
    if let Some(path) = set_out {
        write_json(path, &json!({"kind": "set", "combinator": "finite", "args": [picks], "name": "jump_strategy"}))?;
    }
    let rows = log
        .stages
        .iter()
        .map(|s| {
            let suitable = s.suitability.iter().filter(|v| **v == Suitability::Suitable).count();
            vec![s.stage.to_string(), s.chosen.to_string(), s.restraint.to_string(), suitable.to_string(), s.budget_spent.to_string()]
        })
        .collect();
    let json = json!({
        "picks": nats(&picks),
        "rejected": rejected,
        "stages": stages,
        "halted": halted,
        "monotone": log.is_monotone(),
        "under_approximated": log.under_approximated(),
        "doubling": doubling,
    });
    Ok(Report::new(json, vec!["stage", "chosen", "restraint", "suitable", "budget_spent"], rows, log.halted.is_some()))
}

fn diagonal_cmd(
    ctx: &Context<'_>,
    set: &str,
    machines: &str,
    designated: &str,
    set_out: Option<&Path>,
) -> Result<Report, CliError> {
    let (a, source) = load_set(set)?;
    let machines = load_func_list(machines)?;
    let designated = designated
        .split(',')
        .map(|pair| {
            let parsed = pair.split_once(':').and_then(|(e, p)| e.trim().parse::<usize>().ok().zip(p.trim().parse::<Nat>().ok()));
            parsed.ok_or_else(|| CliError::Domain(format!("{pair:?} is not index:point")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let diagonal = designated_diagonal(&a, &designated, &machines, ctx.budget).or_else(domain)?;
    let flips: Vec<Value> = diagonal
        .rows
        .iter()
        .filter_map(|r| r.flipped_to.map(|b| json!([r.point, b])))
        .collect();
    if let Some(path) = set_out {
        write_json(path, &json!({"kind": "set", "combinator": "patch", "args": [source, flips], "name": diagonal.set.name()}))?;
    }
    let rows = diagonal
        .rows
        .iter()
        .map(|r| {
            vec![
                r.index.to_string(),
                r.point.to_string(),
                r.machine_output.map(|v| v.to_string()).unwrap_or_default(),
                r.flipped_to.map(|b| u8::from(b).to_string()).unwrap_or_default(),
                r.is_witness().to_string(),
            ]
        })
        .collect();
    let json_rows: Vec<Value> = diagonal
        .rows
        .iter()
        .map(|r| {
            json!({"index": r.index, "point": r.point, "machine_output": r.machine_output,
                "flipped_to": r.flipped_to, "witness": r.is_witness()})
        })
        .collect();
    let json = json!({"set": diagonal.set.name(), "rows": json_rows, "warnings": diagonal.warnings});
    let partial = !diagonal.warnings.is_empty();
    Ok(Report::new(json, vec!["index", "point", "machine_output", "flipped_to", "witness"], rows, partial))
}

fn describe_cmd(ctx: &Context<'_>, desc: &str, set: &str, window: Nat, total: Option<Budget>) -> Result<Report, CliError> {
    positive_window(window)?;
    let mut d = load_description(desc)?;
    if let Some(resolution) = total {
        d = combine_total(&d, resolution);
    }
    let (a, _) = load_set(set)?;
    let report = evaluate_description(&d, &a, window, ctx.budget);
    let rows = (0..report.error_profile.len())
        .map(|i| {
            let (e, g, dom) = (&report.error_profile, &report.agreement_profile, &report.domain_profile);
            vec![
                e.checkpoints[i].to_string(),
                e.counts[i].to_string(),
                e.values[i].numer().to_string(),
                e.values[i].denom().to_string(),
                g.counts[i].to_string(),
                dom.counts[i].to_string(),
            ]
        })
        .collect();
    let kind = |k: ViolationKind| match k {
        ViolationKind::WrongAnswer => "wrong_answer",
        ViolationKind::Diverged => "diverged",
        ViolationKind::UnexpectedBox => "unexpected_box",
    };
    let last = |p: &density_forge_core::density::DensityProfile| p.values.last().copied().map(density_json);
    let json = json!({
        "description": d.name(),
        "set": a.name(),
        "mode": format!("{:?}", report.mode),
        "window": report.window,
        "errors": nats(&report.errors),
        "unresolved": nats(&report.unresolved),
        "violations": report.violations.iter().map(|v| json!({"n": v.n, "kind": kind(v.kind)})).collect::<Vec<_>>(),
        "valid": report.is_valid(),
        "error_density": last(&report.error_profile),
        "agreement_density": last(&report.agreement_profile),
        "domain_density": last(&report.domain_profile),
    });
    let header = vec!["n", "errors", "error_numerator", "error_denominator", "agreements", "answered"];
    Ok(Report::new(json, header, rows, !report.unresolved.is_empty()))
}

fn collapse_cmd(ctx: &Context<'_>, machine: &OracleMachine, n: Nat, sigma_bound: Nat, mode: CollapseMode) -> Report {
    let mut partial = false;
    let mut rows = Vec::new();
    let mut json_rows = Vec::new();
    for k in 0..n {
        let result = oracle_collapse(machine, k, sigma_bound, ctx.budget, mode);
        partial |= result.exhausted;
        let w = result.witness.as_ref();
        let sigma: Option<String> = w.map(|w| w.sigma.iter().map(|&b| if b { '1' } else { '0' }).collect());
        rows.push(vec![
            k.to_string(),
            verdict_str(result.verdict).to_string(),
            w.map(|w| w.answer.to_string()).unwrap_or_default(),
            w.map(|w| w.image.to_string()).unwrap_or_default(),
            sigma.clone().unwrap_or_default(),
            result.exhausted.to_string(),
        ]);
        json_rows.push(json!({
            "n": k,
            "verdict": verdict_str(result.verdict),
            "answer": w.map(|w| w.answer),
            "image": w.map(|w| w.image),
            "sigma": sigma,
            "used": w.map(|w| w.used.iter().copied().collect::<Vec<_>>()),
            "exhausted": result.exhausted,
        }));
    }
    let json = json!({"sigma_bound": sigma_bound, "decisive": mode == CollapseMode::Decisive, "rows": json_rows});
    Report::new(json, vec!["n", "verdict", "answer", "image", "sigma", "exhausted"], rows, partial)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratios_parse_exactly() {
        assert_eq!(parse_ratio("1/10").unwrap(), Density::new(1, 10));
        assert_eq!(parse_ratio("3").unwrap(), Density::new(3, 1));
        assert!(parse_ratio("1/0").is_err());
    }
}
