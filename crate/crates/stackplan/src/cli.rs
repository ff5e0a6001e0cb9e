//! Command-line front end.
//!
//! Exit codes: 0 success, 1 no plan / violations / unstable, 2 usage errors
//! and unreadable or malformed inputs.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use stackplan_core::closure::{self, DerivedRelations};
use stackplan_core::planner::{self, Outcome, SearchError, SearchLimits};
use stackplan_core::stability::{self, StabilityVerdict};
use stackplan_core::validator::validate_plan;
use stackplan_core::{Edge, Location, ProblemInstance, WorldState};

use crate::corpus::{self, Corpus, RunOptions};
use crate::format::{self, parse_instance, parse_plan, serialize_plan, serialize_plans};
use crate::render::{render_plan, render_state, RenderFormat, RenderSpec};

#[derive(Parser, Debug)]
#[command(name = "stackplan", version, about = "Stability-aware multi-gripper block construction planner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SeedOrder {
    /// Grippers in declaration order; picks before places; by block, then
    /// target column.
    Default,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Ascii,
    Svg,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Search for a plan of minimal makespan.
    Plan {
        instance: PathBuf,
        /// Override the instance's horizon.
        #[arg(long)]
        makespan: Option<u32>,
        /// Emit every plan within the horizon instead of the first.
        #[arg(long)]
        all: bool,
        #[arg(long)]
        max_nodes: Option<u64>,
        /// Wall-clock limit in seconds.
        #[arg(long)]
        time_limit: Option<f64>,
        #[arg(long, value_enum, default_value = "default")]
        seed_order: SeedOrder,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay a plan and report every violation.
    Validate { instance: PathBuf, plan: PathBuf },
    /// Check a state (an instance document; goal and horizon are ignored).
    CheckStability {
        state: PathBuf,
        /// Print the equilibrium LP.
        #[arg(long)]
        dump_lp: bool,
    },
    /// Print the derived relations of a state.
    Inspect {
        instance: PathBuf,
        /// Inspect the state after replaying this plan.
        #[arg(long)]
        plan: Option<PathBuf>,
    },
    /// Draw the initial state, or the states of a plan.
    Render {
        instance: PathBuf,
        #[arg(long)]
        plan: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "ascii")]
        format: FormatArg,
        #[arg(long)]
        per_step: bool,
        #[arg(long, default_value_t = 1)]
        scale: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Benchmark corpus.
    Corpus {
        #[command(subcommand)]
        command: CorpusCommand,
    },
}

#[derive(Subcommand, Debug)]
enum CorpusCommand {
    /// List the instances and their expected outcomes.
    List {
        #[arg(long)]
        dir: Option<PathBuf>,
    },
    /// Plan, validate and check every instance; prints a pass/fail table.
    Run {
        #[arg(long)]
        dir: Option<PathBuf>,
        /// Worker threads; 1 runs instances one after another.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Write `<name>.plan.json` and `<name>.txt` renders here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run only these instances.
        #[arg(long)]
        only: Vec<String>,
        #[arg(long)]
        max_nodes: Option<u64>,
        /// Per-instance wall-clock limit in seconds.
        #[arg(long)]
        time_limit: Option<f64>,
    },
}

/// Bad input: reported and mapped to exit code 2.
struct InputError(anyhow::Error);

impl<E: Into<anyhow::Error>> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.into())
    }
}

type CmdResult = Result<i32, InputError>;

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_instance(path: &Path) -> anyhow::Result<ProblemInstance> {
    let text = read(path)?;
    parse_instance(&text).with_context(|| format!("in {}", path.display()))
}

fn emit(out: &mut dyn Write, dest: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match dest {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => out.write_all(text.as_bytes()).context("writing output"),
    }
}

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.command {
        Command::Plan { instance, makespan, all, max_nodes, time_limit, seed_order: _, out: dest } => {
            cmd_plan(&instance, makespan, all, max_nodes, time_limit, dest.as_deref(), out, err)
        }
        Command::Validate { instance, plan } => cmd_validate(&instance, &plan, out, err),
        Command::CheckStability { state, dump_lp } => cmd_check_stability(&state, dump_lp, out),
        Command::Inspect { instance, plan } => cmd_inspect(&instance, plan.as_deref(), out),
        Command::Render { instance, plan, format, per_step, scale, out: dest } => {
            let spec = RenderSpec {
                format: match format {
                    FormatArg::Ascii => RenderFormat::Ascii,
                    FormatArg::Svg => RenderFormat::Svg,
                },
                per_step,
                scale,
            };
            cmd_render(&instance, plan.as_deref(), spec, dest.as_deref(), out)
        }
        Command::Corpus { command } => match command {
            CorpusCommand::List { dir } => cmd_corpus_list(dir.as_deref(), out),
            CorpusCommand::Run { dir, jobs, out: dest, only, max_nodes, time_limit } => {
                let opts = RunOptions { max_nodes, time_limit: time_limit.map(Duration::from_secs_f64) };
                cmd_corpus_run(dir.as_deref(), jobs, dest.as_deref(), &only, &opts, out)
            }
        },
    };
    match result {
        Ok(code) => code,
        Err(InputError(e)) => {
            let _ = writeln!(err, "error: {e:#}");
            2
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_plan(
    path: &Path,
    makespan: Option<u32>,
    all: bool,
    max_nodes: Option<u64>,
    time_limit: Option<f64>,
    dest: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CmdResult {
    let mut inst = load_instance(path)?;
    if let Some(t) = makespan {
        inst.makespan = t;
    }
    let start = Instant::now();
    let deadline = time_limit.map(|s| start + Duration::from_secs_f64(s));
    let stop = move || deadline.is_some_and(|d| Instant::now() >= d);
    let limits = SearchLimits { max_nodes, should_stop: Some(&stop) };
    if all {
        return match planner::enumerate_plans(&inst, limits) {
            Ok(plans) => {
                emit(out, dest, &serialize_plans(&inst, &plans, None))?;
                let _ = writeln!(err, "{} plans within {} steps", plans.len(), inst.makespan);
                Ok(if plans.is_empty() { 1 } else { 0 })
            }
            Err(e) => search_failure(e, err),
        };
    }
    match planner::plan_with(&inst, limits) {
        Ok(r) => {
            let _ = writeln!(
                err,
                "expanded {} nodes, {} successors, {} pruned as unstable, {} duplicates, {:.3}s",
                r.stats.nodes_expanded,
                r.stats.successors,
                r.stats.pruned_unstable,
                r.stats.duplicates,
                start.elapsed().as_secs_f64()
            );
            match r.outcome {
                Outcome::Plan(p) => {
                    emit(out, dest, &serialize_plan(&inst, &p, Some(&r.stats)))?;
                    Ok(0)
                }
                Outcome::Unsat(t) => {
                    let _ = writeln!(err, "Unsat({t}): no plan within {t} steps");
                    Ok(1)
                }
            }
        }
        Err(e) => search_failure(e, err),
    }
}

fn search_failure(e: SearchError, err: &mut dyn Write) -> CmdResult {
    match e {
        SearchError::Invalid(v) => Err(anyhow::anyhow!("invalid instance: {v}").into()),
        SearchError::ResourceLimit(_) => {
            let _ = writeln!(err, "ResourceLimit: {e}");
            Ok(1)
        }
    }
}

fn cmd_validate(inst_path: &Path, plan_path: &Path, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let inst = load_instance(inst_path)?;
    let text = read(plan_path)?;
    let plan = parse_plan(&inst, &text).with_context(|| format!("in {}", plan_path.display()))?;
    let violations = validate_plan(&inst, &plan);
    if violations.is_empty() {
        let _ = writeln!(out, "ok: {} steps", plan.makespan());
        return Ok(0);
    }
    for v in &violations {
        let _ = writeln!(err, "{v}");
    }
    let _ = writeln!(err, "{} violation(s)", violations.len());
    Ok(1)
}

fn describe_verdict(inst: &ProblemInstance, v: &StabilityVerdict) -> String {
    if v.stable {
        "stable".into()
    } else {
        match v.witness {
            Some(b) => format!("unstable (witness: {})", inst.block(b).id),
            None => "unstable".into(),
        }
    }
}

fn cmd_check_stability(path: &Path, dump_lp: bool, out: &mut dyn Write) -> CmdResult {
    let inst = load_instance(path)?;
    let state = inst.initial_state();
    let problem = stability::extract_contacts(&inst, &state);
    if dump_lp {
        let _ = write!(out, "{}", stability::describe_lp(&problem));
    }
    let verdict = stability::check_static_equilibrium(&problem)
        .map_err(|e| anyhow::anyhow!("stability check failed: {e}"))?;
    let _ = writeln!(out, "grounded: {}", describe_verdict(&inst, &verdict));
    let mut stable = verdict.stable;
    for g in inst.gripper_ids() {
        if state.held(g).is_none() {
            continue;
        }
        let hv = stability::check_held_stability(&inst, &state, g)
            .map_err(|e| anyhow::anyhow!("stability check failed: {e}"))?;
        let _ = writeln!(out, "held by {}: {}", inst.grippers[g.index()], describe_verdict(&inst, &hv));
        stable &= hv.stable;
    }
    Ok(if stable { 0 } else { 1 })
}

fn replay(inst: &ProblemInstance, plan_path: Option<&Path>) -> anyhow::Result<(WorldState, Option<stackplan_core::Plan>)> {
    let Some(p) = plan_path else { return Ok((inst.initial_state(), None)) };
    let plan = parse_plan(inst, &read(p)?).with_context(|| format!("in {}", p.display()))?;
    let state = corpus::final_state(inst, &plan).context("the plan cannot be replayed")?;
    Ok((state, Some(plan)))
}

fn cmd_inspect(path: &Path, plan_path: Option<&Path>, out: &mut dyn Write) -> CmdResult {
    let inst = load_instance(path)?;
    let (state, _) = replay(&inst, plan_path)?;
    let rel = DerivedRelations::compute(&inst, &state).map_err(|e| anyhow::anyhow!("circular support at block {}", e.0 .0))?;
    let name = |l: Location| inst.location_name(l).to_string();
    let mut text = String::new();
    text.push_str("on:\n");
    for o in &rel.on {
        text.push_str(&format!("  on({}, {}, {}, {})\n", inst.block(o.block).id, name(o.on), o.u, o.v));
    }
    text.push_str("above:\n");
    for a in &rel.above {
        text.push_str(&format!("  above({}, {}, {}, {})\n", a.h, inst.block(a.block).id, a.v, a.x));
    }
    text.push_str("supported:\n");
    for (b, l) in &rel.supported {
        text.push_str(&format!("  supported({}, {})\n", inst.block(*b).id, name(*l)));
    }
    text.push_str("connected:\n");
    for (a, b) in rel.connectivity.pairs() {
        if a < b {
            text.push_str(&format!("  connected({}, {})\n", name(a), name(b)));
        }
    }
    text.push_str("overhang:\n");
    for s in inst.surface_ids() {
        let l = closure::overhang_extent(&inst, &state, s, Edge::Left);
        let r = closure::overhang_extent(&inst, &state, s, Edge::Right);
        text.push_str(&format!("  {}: left {l}, right {r}\n", inst.surface(s).id));
    }
    emit(out, None, &text)?;
    Ok(0)
}

fn cmd_render(
    path: &Path,
    plan_path: Option<&Path>,
    spec: RenderSpec,
    dest: Option<&Path>,
    out: &mut dyn Write,
) -> CmdResult {
    let inst = load_instance(path)?;
    let text = match plan_path {
        None => render_state(&inst, &inst.initial_state(), spec),
        Some(p) => {
            let plan = parse_plan(&inst, &read(p)?).with_context(|| format!("in {}", p.display()))?;
            render_plan(&inst, &plan, spec).map_err(|e| anyhow::anyhow!("the plan cannot be replayed: {e}"))?
        }
    };
    emit(out, dest, &text)?;
    Ok(0)
}

fn load_corpus(dir: Option<&Path>) -> anyhow::Result<Corpus> {
    match dir {
        Some(d) => Corpus::from_dir(d),
        None => Corpus::default_source(),
    }
}

fn cmd_corpus_list(dir: Option<&Path>, out: &mut dyn Write) -> CmdResult {
    let c = load_corpus(dir)?;
    let mut text = format!("corpus: {}\n", c.source);
    for (e, body) in &c.entries {
        let desc = format::parse_instance_file(body)
            .ok()
            .and_then(|f| f.description)
            .unwrap_or_default();
        text.push_str(&format!("{:<24} {:<6} {}\n", e.name, format!("{:?}", e.expect).to_lowercase(), desc));
    }
    emit(out, None, &text)?;
    Ok(0)
}

fn cmd_corpus_run(
    dir: Option<&Path>,
    jobs: usize,
    dest: Option<&Path>,
    only: &[String],
    opts: &RunOptions,
    out: &mut dyn Write,
) -> CmdResult {
    let c = load_corpus(dir)?;
    for name in only {
        if c.get(name).is_none() {
            return Err(anyhow::anyhow!("no corpus instance named {name:?}").into());
        }
    }
    let reports = corpus::run_corpus(&c, only, jobs, opts);
    if let Some(d) = dest {
        std::fs::create_dir_all(d).with_context(|| format!("creating {}", d.display()))?;
        for r in &reports {
            if let Some(p) = &r.plan_doc {
                std::fs::write(d.join(format!("{}.plan.json", r.name)), p)?;
            }
            if let Some(t) = &r.render {
                std::fs::write(d.join(format!("{}.txt", r.name)), t)?;
            }
        }
    }
    emit(out, None, &corpus::format_table(&reports))?;
    Ok(if reports.iter().all(|r| r.passed) { 0 } else { 1 })
}
