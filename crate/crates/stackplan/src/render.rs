//! Text and SVG pictures of world states.
//!
//! ASCII layout: one row per level, highest first. A surface's top shows as
//! `=` in the row just below the level it carries, the pedestal under a
//! raised surface as `#`, blocks by a one-character glyph.

use std::fmt::Write as _;

use stackplan_core::planner::{self, JointAction};
use stackplan_core::{BlockId, Cell, Plan, ProblemInstance, WorldState};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RenderFormat {
    Ascii,
    Svg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RenderSpec {
    pub format: RenderFormat,
    /// Render every state of a plan instead of only the final one.
    pub per_step: bool,
    /// Characters per column (ASCII) or pixels per column (SVG).
    pub scale: u32,
}

impl Default for RenderSpec {
    fn default() -> Self {
        RenderSpec { format: RenderFormat::Ascii, per_step: false, scale: 1 }
    }
}

/// Single-character glyph per block: the first character of each id when
/// those are distinct, otherwise letters in declaration order.
pub fn glyphs(inst: &ProblemInstance) -> Vec<char> {
    let firsts: Vec<char> = inst.blocks.iter().map(|b| b.id.chars().next().unwrap_or('?')).collect();
    let mut sorted = firsts.clone();
    sorted.sort_unstable();
    sorted.dedup();
    let reserved = ['=', '#', '.', ' '];
    if sorted.len() == firsts.len() && !firsts.iter().any(|c| reserved.contains(c) || c.is_whitespace()) {
        return firsts;
    }
    let pool: Vec<char> = ('A'..='Z').chain('a'..='z').chain('0'..='9').collect();
    (0..inst.blocks.len()).map(|i| pool.get(i).copied().unwrap_or('*')).collect()
}

/// Column range worth drawing: every surface and block plus one column of
/// margin each side.
fn extent(inst: &ProblemInstance, state: &WorldState) -> (i32, i32, i32) {
    let mut lo = inst.surfaces.iter().map(|s| s.lo).min().unwrap_or(0);
    let mut hi = inst.surfaces.iter().map(|s| s.hi).max().unwrap_or(0);
    let mut top = inst.surfaces.iter().map(|s| s.level).max().unwrap_or(0);
    for (c, _, _) in state.cells() {
        lo = lo.min(c.x);
        hi = hi.max(c.x);
        top = top.max(c.level);
    }
    (lo - 1, hi + 1, top)
}

pub fn render_state(inst: &ProblemInstance, state: &WorldState, spec: RenderSpec) -> String {
    match spec.format {
        RenderFormat::Ascii => ascii(inst, state, spec.scale.max(1) as usize),
        RenderFormat::Svg => svg(inst, state, spec.scale.max(1)),
    }
}

fn ascii(inst: &ProblemInstance, state: &WorldState, scale: usize) -> String {
    let glyph = glyphs(inst);
    let (lo, hi, top) = extent(inst, state);
    let mut out = String::new();
    for level in (-1..=top).rev() {
        let mut row = String::new();
        for x in lo..=hi {
            let c = Cell::new(x, level);
            let ch = if let Some((b, _)) = state.occupant(c) {
                glyph[b.index()]
            } else if inst.surface_under(Cell::new(x, level + 1)).is_some() {
                '='
            } else if level >= 0 && inst.is_solid(c) {
                '#'
            } else {
                ' '
            };
            for _ in 0..scale {
                row.push(ch);
            }
        }
        out.push_str(row.trim_end());
        out.push('\n');
    }
    let _ = writeln!(out, "columns {lo}..{hi}");
    let renamed = inst.blocks.iter().zip(&glyph).any(|(b, g)| !b.id.starts_with(*g) || b.id.chars().count() > 1);
    if renamed {
        let pairs: Vec<String> = inst.blocks.iter().zip(&glyph).map(|(b, g)| format!("{g}={}", b.id)).collect();
        let _ = writeln!(out, "legend {}", pairs.join(" "));
    }
    for (g, asm) in state.held_assemblies() {
        let members: Vec<String> = asm
            .members
            .iter()
            .map(|(b, o)| format!("{}@({},{})", inst.block(*b).id, o.dx, o.dh))
            .collect();
        let _ = writeln!(out, "held by {}: {}", inst.grippers[g.index()], members.join(" "));
    }
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn svg(inst: &ProblemInstance, state: &WorldState, scale: u32) -> String {
    let u = scale.max(1) as i64 * 20;
    let (lo, hi, top) = extent(inst, state);
    let width = (hi - lo + 1) as i64 * u;
    let height = (top + 2) as i64 * u;
    // Level `h` has its bottom edge at y = (top + 1 - h) * u.
    let y_of = |level: i32| (top + 1 - level) as i64 * u;
    let x_of = |x: i32| (x - lo) as i64 * u;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    for s in &inst.surfaces {
        let y = y_of(s.level);
        let _ = writeln!(
            out,
            r##"  <rect class="surface" x="{}" y="{}" width="{}" height="{}" fill="#999999"/>"##,
            x_of(s.lo),
            y,
            (s.hi - s.lo + 1) as i64 * u,
            height - y
        );
        let _ = writeln!(
            out,
            r#"  <text x="{}" y="{}" font-size="{}">{}</text>"#,
            x_of(s.lo) + 2,
            height - 2,
            u / 2,
            escape(&s.id)
        );
    }
    let mut anchored: Vec<(BlockId, Cell)> = state.anchored().collect();
    anchored.sort();
    for (b, c) in anchored {
        let w = inst.size(b) as i64 * u;
        let y = y_of(c.level) - u;
        let _ = writeln!(
            out,
            r##"  <rect class="block" x="{}" y="{}" width="{}" height="{}" fill="#d9b38c" stroke="#000000"/>"##,
            x_of(c.x),
            y,
            w,
            u
        );
        let _ = writeln!(
            out,
            r#"  <text x="{}" y="{}" font-size="{}" text-anchor="middle">{}</text>"#,
            x_of(c.x) + w / 2,
            y + u * 3 / 4,
            u / 2,
            escape(&inst.block(b).id)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Replays `plan` and renders the final state, or every state when
/// `spec.per_step` is set. Fails with a description if a step cannot be
/// applied.
pub fn render_plan(inst: &ProblemInstance, plan: &Plan, spec: RenderSpec) -> Result<String, String> {
    let mut state = inst.initial_state();
    let mut frames = vec![(0usize, state.clone())];
    for (k, step) in plan.steps.iter().enumerate() {
        state = planner::apply(inst, &state, &JointAction(step.clone()))
            .map_err(|e| format!("step {}: {e}", k + 1))?;
        frames.push((k + 1, state.clone()));
    }
    if !spec.per_step {
        frames.drain(..frames.len() - 1);
    }
    let mut out = String::new();
    for (t, s) in &frames {
        if spec.per_step && spec.format == RenderFormat::Ascii {
            let _ = writeln!(out, "t = {t}");
        }
        out.push_str(&render_state(inst, s, spec));
    }
    Ok(out)
}
