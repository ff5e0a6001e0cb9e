//! Benchmark scenarios with expected outcomes.
//!
//! The default corpus is compiled into the binary; `STACKPLAN_CORPUS` or an
//! explicit directory selects another one with the same `manifest.json`
//! layout.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use anyhow::{bail, Context};
use serde::Deserialize;
use stackplan_core::closure::overhang_extent;
use stackplan_core::planner::{self, JointAction, Outcome, SearchLimits, SearchStats};
use stackplan_core::validator::validate_plan;
use stackplan_core::{GoalAtom, Plan, ProblemInstance, WorldState};

use crate::format::{parse_instance_file, serialize_plan};
use crate::render::{render_plan, RenderSpec};

pub const CORPUS_ENV: &str = "STACKPLAN_CORPUS";

const EMBEDDED: &[(&str, &str)] = &[
    ("manifest.json", include_str!("../corpus/manifest.json")),
    ("fig1a_unlevel_bridge.json", include_str!("../corpus/fig1a_unlevel_bridge.json")),
    ("fig1b_ordered_bridge.json", include_str!("../corpus/fig1b_ordered_bridge.json")),
    ("fig2a_subassembly.json", include_str!("../corpus/fig2a_subassembly.json")),
    ("fig2b_stacked_overhang.json", include_str!("../corpus/fig2b_stacked_overhang.json")),
    ("fig3_symmetric_bridge.json", include_str!("../corpus/fig3_symmetric_bridge.json")),
    ("overhang4.json", include_str!("../corpus/overhang4.json")),
    ("fig5a_subassembly_move.json", include_str!("../corpus/fig5a_subassembly_move.json")),
    ("fig5b_counterweight.json", include_str!("../corpus/fig5b_counterweight.json")),
    ("fig5c_scaffold.json", include_str!("../corpus/fig5c_scaffold.json")),
    ("fig5c_without_scaffold.json", include_str!("../corpus/fig5c_without_scaffold.json")),
    ("fig5d_true_concurrency.json", include_str!("../corpus/fig5d_true_concurrency.json")),
    ("unsat_tiny.json", include_str!("../corpus/unsat_tiny.json")),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expect {
    Plan,
    Unsat,
}

/// Checks beyond "a valid plan exists".
#[derive(Clone, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Features {
    /// Exact overhang of the final state past the edge named by the goal.
    #[serde(default)]
    pub overhang_extent: Option<u32>,
    /// Every valid plan needs a step with at least two placements; checked
    /// by enumerating all plans.
    #[serde(default)]
    pub every_plan_concurrent: bool,
    /// Some step of the found plan has at least two placements.
    #[serde(default)]
    pub concurrent_placements: bool,
    /// Found plan length.
    #[serde(default)]
    pub makespan: Option<usize>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestDoc {
    format: u32,
    instances: Vec<Entry>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Entry {
    pub name: String,
    pub file: String,
    pub expect: Expect,
    #[serde(default)]
    pub features: Features,
}

#[derive(Clone, Debug)]
pub struct Corpus {
    pub entries: Vec<(Entry, String)>,
    pub source: String,
}

impl Corpus {
    pub fn embedded() -> Corpus {
        let get = |name: &str| EMBEDDED.iter().find(|(n, _)| *n == name).map(|(_, t)| t.to_string());
        let manifest = get("manifest.json").expect("embedded manifest");
        Corpus::from_manifest(&manifest, |f| get(f).with_context(|| format!("{f} is not embedded")), "built-in".into())
            .expect("embedded corpus is well formed")
    }

    pub fn from_dir(dir: &Path) -> anyhow::Result<Corpus> {
        let manifest = std::fs::read_to_string(dir.join("manifest.json"))
            .with_context(|| format!("reading {}", dir.join("manifest.json").display()))?;
        Corpus::from_manifest(
            &manifest,
            |f| std::fs::read_to_string(dir.join(f)).with_context(|| format!("reading {f}")),
            dir.display().to_string(),
        )
    }

    /// Directory from the environment, else the embedded corpus.
    pub fn default_source() -> anyhow::Result<Corpus> {
        match std::env::var_os(CORPUS_ENV) {
            Some(d) => Corpus::from_dir(&PathBuf::from(d)),
            None => Ok(Corpus::embedded()),
        }
    }

    fn from_manifest(
        manifest: &str,
        read: impl Fn(&str) -> anyhow::Result<String>,
        source: String,
    ) -> anyhow::Result<Corpus> {
        let doc: ManifestDoc = serde_json::from_str(manifest).context("parsing manifest")?;
        if doc.format != 1 {
            bail!("unsupported manifest format {}", doc.format);
        }
        let mut entries = Vec::new();
        for e in doc.instances {
            let text = read(&e.file)?;
            entries.push((e, text));
        }
        Ok(Corpus { entries, source })
    }

    pub fn get(&self, name: &str) -> Option<&(Entry, String)> {
        self.entries.iter().find(|(e, _)| e.name == name)
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub max_nodes: Option<u64>,
    pub time_limit: Option<Duration>,
}

#[derive(Clone, Debug)]
pub struct EntryReport {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub makespan: Option<usize>,
    pub stats: SearchStats,
    pub elapsed: Duration,
    pub plan: Option<Plan>,
    pub plan_doc: Option<String>,
    pub render: Option<String>,
}

/// Final state of a plan, replayed with the planner's successor function.
pub fn final_state(inst: &ProblemInstance, plan: &Plan) -> Option<WorldState> {
    let mut s = inst.initial_state();
    for step in &plan.steps {
        s = planner::apply(inst, &s, &JointAction(step.clone())).ok()?;
    }
    Some(s)
}

fn check_features(inst: &ProblemInstance, entry: &Entry, plan: &Plan) -> Result<(), String> {
    let f = &entry.features;
    if let Some(n) = f.makespan {
        if plan.makespan() != n {
            return Err(format!("makespan {} (expected {n})", plan.makespan()));
        }
    }
    if let Some(n) = f.overhang_extent {
        let end = final_state(inst, plan).ok_or("plan does not replay")?;
        let atom = inst.goal.atoms.iter().find_map(|a| match a {
            GoalAtom::Overhang { surface, edge, .. } => Some((*surface, *edge)),
            _ => None,
        });
        let (s, e) = atom.ok_or("no overhang goal")?;
        let got = overhang_extent(inst, &end, s, e);
        if got != n {
            return Err(format!("overhang {got} (expected {n})"));
        }
    }
    let concurrent = |p: &Plan| p.steps.iter().any(|s| s.iter().filter(|a| a.is_place()).count() >= 2);
    if f.concurrent_placements && !concurrent(plan) {
        return Err("no step with simultaneous placements".into());
    }
    if f.every_plan_concurrent {
        let all = planner::enumerate_plans(inst, SearchLimits { max_nodes: Some(2_000_000), should_stop: None })
            .map_err(|e| format!("enumerating plans: {e}"))?;
        if all.is_empty() {
            return Err("no plans enumerated".into());
        }
        if let Some(p) = all.iter().find(|p| !concurrent(p)) {
            return Err(format!("a {}-step plan without simultaneous placements exists", p.makespan()));
        }
    }
    Ok(())
}

pub fn run_entry(entry: &Entry, text: &str, opts: &RunOptions) -> EntryReport {
    let start = Instant::now();
    let mut report = EntryReport {
        name: entry.name.clone(),
        passed: false,
        detail: String::new(),
        makespan: None,
        stats: SearchStats::default(),
        elapsed: Duration::ZERO,
        plan: None,
        plan_doc: None,
        render: None,
    };
    let inst = match parse_instance_file(text) {
        Ok(f) => f.instance,
        Err(e) => {
            report.detail = format!("parse error: {e}");
            return report;
        }
    };
    let deadline = opts.time_limit.map(|d| start + d);
    let stop = move || deadline.is_some_and(|d| Instant::now() >= d);
    let limits = SearchLimits { max_nodes: opts.max_nodes, should_stop: Some(&stop) };
    let result = planner::plan_with(&inst, limits);
    report.elapsed = start.elapsed();
    let result = match result {
        Ok(r) => r,
        Err(e) => {
            report.detail = e.to_string();
            return report;
        }
    };
    report.stats = result.stats;
    match (result.outcome, entry.expect) {
        (Outcome::Unsat(t), Expect::Unsat) => {
            report.passed = true;
            report.detail = format!("unsat within {t} steps, as expected");
        }
        (Outcome::Unsat(t), Expect::Plan) => {
            report.detail = format!("no plan within {t} steps");
        }
        (Outcome::Plan(p), expect) => {
            report.makespan = Some(p.makespan());
            report.plan_doc = Some(serialize_plan(&inst, &p, None));
            report.render = render_plan(&inst, &p, RenderSpec::default()).ok();
            let violations = validate_plan(&inst, &p);
            report.detail = if expect == Expect::Unsat {
                "found a plan for an instance expected to be unsat".into()
            } else if let Some(v) = violations.first() {
                format!("validator: {v}")
            } else if let Err(e) = check_features(&inst, entry, &p) {
                e
            } else {
                report.passed = true;
                "ok".into()
            };
            report.plan = Some(p);
        }
    }
    report.elapsed = start.elapsed();
    report
}

/// Runs every entry (or those named in `only`) on `jobs` worker threads.
/// Reports come back in manifest order regardless of scheduling.
pub fn run_corpus(corpus: &Corpus, only: &[String], jobs: usize, opts: &RunOptions) -> Vec<EntryReport> {
    let selected: Vec<&(Entry, String)> = corpus
        .entries
        .iter()
        .filter(|(e, _)| only.is_empty() || only.contains(&e.name))
        .collect();
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<EntryReport>>> = Mutex::new(vec![None; selected.len()]);
    std::thread::scope(|scope| {
        for _ in 0..jobs.max(1).min(selected.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some((entry, text)) = selected.get(i) else { break };
                let r = run_entry(entry, text, opts);
                slots.lock().expect("no worker panicked")[i] = Some(r);
            });
        }
    });
    slots.into_inner().expect("no worker panicked").into_iter().flatten().collect()
}

pub fn format_table(reports: &[EntryReport]) -> String {
    let width = reports.iter().map(|r| r.name.len()).max().unwrap_or(4).max(8);
    let mut out = format!("{:<width$}  {:<4}  {:>3}  {:>10}  {:>9}  detail\n", "instance", "ok", "T", "nodes", "ms");
    for r in reports {
        out.push_str(&format!(
            "{:<width$}  {:<4}  {:>3}  {:>10}  {:>9}  {}\n",
            r.name,
            if r.passed { "PASS" } else { "FAIL" },
            r.makespan.map_or("-".to_string(), |m| m.to_string()),
            r.stats.nodes_expanded,
            r.elapsed.as_millis(),
            r.detail
        ));
    }
    let passed = reports.iter().filter(|r| r.passed).count();
    out.push_str(&format!("{passed}/{} passed\n", reports.len()));
    out
}
