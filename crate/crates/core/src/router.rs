//! Arrow geometry: endpoint scanning, box clipping, trims, shaft breaks,
//! suppression and named points.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dsl::{ArrowMods, Cell, Code, DiagramAst, DiagramKind, Diagnostic, DirCode, JoinSpec, Label, Loc, Slide, Target};
use crate::fixedmath::{clip_distance, octant, segment_length, MathError, Octant, Sp};
use crate::labels::{self, LabelAnchor, Shaft};
use crate::layout::{axis_coord, graph_coords, BoxMap, Layout};
use crate::settings::Settings;
use crate::styles::{BoxSize, Metrics, Param, TextContext, RULE_CELL};
use crate::units::FRACTION_ONE;

/// One end of an arrow before positions are known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum End {
    /// A grid cell; clipped against its box when it has one.
    Cell { row: usize, col: usize },
    /// A fractional or out-of-grid position in 16.16 row/column units.
    Grid { row: i64, col: i64 },
    /// An absolute `Graph` coordinate, 16.16, y upward.
    Graph { x: i32, y: i32 },
    Point(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Endpoints {
    pub tail: End,
    pub head: End,
}

/// Walks from `(row, col)` in `step` until a recorded box, or the last in-bounds cell.
fn scan(row: usize, col: usize, step: (i32, i32), boxes: &BoxMap) -> (usize, usize) {
    let (mut r, mut c) = (row as i64, col as i64);
    loop {
        let (nr, nc) = (r + i64::from(step.0), c + i64::from(step.1));
        if nr < 0 || nc < 0 || nr >= boxes.rows() as i64 || nc >= boxes.cols() as i64 {
            return (r as usize, c as usize);
        }
        (r, c) = (nr, nc);
        if boxes.has(r as usize, c as usize) {
            return (r as usize, c as usize);
        }
    }
}

/// Resolves an arrow cell's ends. Compass arrows scan both ways from the
/// cell; `a` runs from the cell to its target and `b` from the target back.
/// Targets are `x` columns right and `y` rows up, or absolute in a `Graph`.
pub fn resolve_endpoints(
    row: usize,
    col: usize,
    dir: DirCode,
    target: Option<&Target>,
    boxes: &BoxMap,
    graph: bool,
) -> Endpoints {
    match dir {
        DirCode::Compass(o) => {
            let (sr, sc) = o.step();
            let (hr, hc) = scan(row, col, (sr, sc), boxes);
            let (tr, tc) = scan(row, col, (-sr, -sc), boxes);
            Endpoints { tail: End::Cell { row: tr, col: tc }, head: End::Cell { row: hr, col: hc } }
        }
        DirCode::A | DirCode::B => {
            let here = End::Cell { row, col };
            let there = match target {
                None => here.clone(),
                Some(Target::Point(name)) => End::Point(name.clone()),
                Some(Target::Offset { x, y }) if graph => End::Graph { x: *x, y: *y },
                Some(Target::Offset { x, y }) => {
                    let one = i64::from(FRACTION_ONE);
                    let r = row as i64 * one - i64::from(*y);
                    let c = col as i64 * one + i64::from(*x);
                    let integral = r % one == 0 && c % one == 0;
                    let inside = r >= 0 && c >= 0 && r / one < boxes.rows() as i64 && c / one < boxes.cols() as i64;
                    if integral && inside {
                        End::Cell { row: (r / one) as usize, col: (c / one) as usize }
                    } else {
                        End::Grid { row: r, col: c }
                    }
                }
            };
            if dir == DirCode::A {
                Endpoints { tail: here, head: there }
            } else {
                Endpoints { tail: there, head: here }
            }
        }
    }
}

/// Named points registered by `\pt`, in sp.
pub type PointTable = BTreeMap<String, (Sp, Sp)>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub x1: Sp,
    pub y1: Sp,
    pub x2: Sp,
    pub y2: Sp,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArrowGeometry {
    pub row: usize,
    pub col: usize,
    pub style: String,
    pub rule: bool,
    /// Untrimmed ends after endpoint offsets.
    pub from: (Sp, Sp),
    pub to: (Sp, Sp),
    /// Trimmed ends.
    pub start: (Sp, Sp),
    pub end: (Sp, Sp),
    pub length: Sp,
    pub qb: Sp,
    pub py: Sp,
    pub us: Sp,
    pub octant: Option<Octant>,
    pub spans: Vec<Span>,
    pub labels: Vec<LabelAnchor>,
    pub suppressed: bool,
    pub gray: Option<i32>,
    pub rule_width: Option<Sp>,
}

impl ArrowGeometry {
    pub fn dx(&self) -> Sp {
        self.to.0 - self.from.0
    }

    pub fn dy(&self) -> Sp {
        self.to.1 - self.from.1
    }
}

/// Half-extents of a padded box seen from its center, toward `(dx, dy)` (y downward).
pub fn clip_extents(b: BoxSize, dy: Sp, hpad: Sp, vpad: Sp) -> (Sp, Sp) {
    let ex = b.w / 2 + hpad;
    let ey = if dy < 0 { b.h } else { b.d } + vpad;
    (ex, ey)
}

/// Distance from a box center to its padded boundary along `(dx, dy)`.
pub fn clip_for(b: BoxSize, dx: Sp, dy: Sp, len: Sp, hpad: Sp, vpad: Sp) -> Result<Sp, MathError> {
    let (ex, ey) = clip_extents(b, dy, hpad, vpad);
    clip_distance(ex, ey, dx.abs(), dy.abs(), len)
}

/// Trim at one end: joinpush when joined, clip plus cellpush at a box, otherwise ptpush plus atpush.
pub fn end_trim(
    joined: bool,
    boxed: Option<BoxSize>,
    toward: (Sp, Sp),
    len: Sp,
    style: &str,
    settings: &Settings,
) -> Result<Sp, MathError> {
    if joined {
        return Ok(settings.effective(Param::JoinPush, style));
    }
    match boxed {
        Some(b) => {
            let clip = clip_for(b, toward.0, toward.1, len, settings.global(Param::Hpad), settings.global(Param::Vpad))?;
            Ok(clip.saturating_add(settings.effective(Param::CellPush, style)))
        }
        None => Ok(settings.effective(Param::PtPush, style).saturating_add(settings.effective(Param::AtPush, style))),
    }
}

/// Point at distance `s` along `a -> b`, where `total` is the distance `a -> b`.
pub fn along(a: (Sp, Sp), b: (Sp, Sp), s: i64, total: i64) -> (Sp, Sp) {
    if total == 0 {
        return a;
    }
    let f = |p: Sp, q: Sp| {
        let v = i64::from(p) + (i64::from(q) - i64::from(p)) * s / total;
        v.clamp(i64::from(i32::MIN), i64::from(i32::MAX)) as Sp
    };
    (f(a.0, b.0), f(a.1, b.1))
}

/// Width of the gap cut into a shaft for an on-line label.
pub fn hole_width(label_w: Sp, style: &str, lw: Sp, settings: &Settings) -> Sp {
    label_w + 2 * (settings.effective(Param::LabelPad, style) + settings.effective(Param::BreakPad, style) + lw)
}

/// Splits `[0, us]` around holes `(center, width)`; empty pieces are dropped.
pub fn break_spans(us: Sp, holes: &[(Sp, Sp)]) -> Vec<(Sp, Sp)> {
    let mut cuts: Vec<(i64, i64)> = holes
        .iter()
        .map(|&(c, w)| (i64::from(c) - i64::from(w) / 2, i64::from(c) + i64::from(w) - i64::from(w) / 2))
        .collect();
    cuts.sort_unstable();
    let mut out = Vec::new();
    let mut pos = 0i64;
    for (a, b) in cuts {
        if a > pos {
            out.push((pos, a.min(i64::from(us))));
        }
        pos = pos.max(b);
    }
    if pos < i64::from(us) {
        out.push((pos, i64::from(us)));
    }
    out.into_iter().filter(|(a, b)| b > a).map(|(a, b)| (a as Sp, b as Sp)).collect()
}

/// Result of routing every arrow of a diagram.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Routed {
    pub arrows: Vec<ArrowGeometry>,
    pub points: PointTable,
    pub diagnostics: Vec<Diagnostic>,
}

struct ArrowParts<'a> {
    style: &'a str,
    rule: bool,
    labels: &'a [Label],
    slide: Option<&'a Slide>,
    mods: &'a ArrowMods,
    dir: DirCode,
    target: Option<&'a Target>,
    loc: Loc,
}

fn parts(cell: &Cell) -> Option<ArrowParts<'_>> {
    match cell {
        Cell::Arrow(a) => Some(ArrowParts {
            style: &a.style,
            rule: false,
            labels: &a.labels,
            slide: a.slide.as_ref(),
            mods: &a.mods,
            dir: a.dir,
            target: a.target.as_ref(),
            loc: a.loc,
        }),
        Cell::Rule(r) => Some(ArrowParts {
            style: RULE_CELL,
            rule: true,
            labels: &[],
            slide: None,
            mods: &r.mods,
            dir: r.dir,
            target: r.target.as_ref(),
            loc: r.loc,
        }),
        _ => None,
    }
}

/// Routes every arrow and Rule cell in row-major order. Points must be
/// registered by an earlier arrow than the one that uses them.
pub fn route(ast: &DiagramAst, layout: &Layout, settings: &Settings, metrics: &dyn Metrics) -> Routed {
    let mut out = Routed::default();
    let graph = ast.kind == DiagramKind::Graph;
    let grid = &layout.grid;
    for (row, col, cell) in ast.cells() {
        let Some(p) = parts(cell) else { continue };
        let ends = resolve_endpoints(row, col, p.dir, p.target, &layout.box_map, graph);
        let position = |end: &End, points: &PointTable| -> Option<(Sp, Sp)> {
            match end {
                End::Cell { row, col } => Some((grid.x[*col], grid.y[*row])),
                End::Grid { row, col } => {
                    Some((axis_coord(&grid.x, layout.xgrid, *col), axis_coord(&grid.y, layout.ygrid, *row)))
                }
                End::Graph { x, y } => Some(graph_coords(grid, layout.xgrid, layout.ygrid, *x, *y)),
                End::Point(name) => points.get(name).copied(),
            }
        };
        let boxed = |end: &End| match end {
            End::Cell { row, col } => layout.box_map.get(*row, *col),
            _ => None,
        };
        let (Some(mut from), Some(mut to)) = (position(&ends.tail, &out.points), position(&ends.head, &out.points)) else {
            let name = match (&ends.tail, &ends.head) {
                (End::Point(n), _) | (_, End::Point(n)) => n.clone(),
                _ => String::new(),
            };
            out.diagnostics.push(Diagnostic::new(Code::UnknownPoint, p.loc, format!("unknown point `{name}`")));
            continue;
        };
        let m = p.mods;
        let add = |pt: &mut (Sp, Sp), x: Option<Sp>, y: Option<Sp>| {
            pt.0 = pt.0.saturating_add(x.unwrap_or(0));
            pt.1 = pt.1.saturating_sub(y.unwrap_or(0));
        };
        add(&mut from, m.tx, m.ty);
        add(&mut from, m.fx, m.fy);
        add(&mut to, m.hx, m.hy);
        add(&mut to, m.fx, m.fy);

        let (dx, dy) = (to.0.wrapping_sub(from.0), to.1.wrapping_sub(from.1));
        let mut geo = ArrowGeometry {
            row,
            col,
            style: p.style.to_string(),
            rule: p.rule,
            from,
            to,
            start: from,
            end: to,
            length: 0,
            qb: 0,
            py: 0,
            us: 0,
            octant: octant(dx, -dy),
            spans: Vec::new(),
            labels: Vec::new(),
            suppressed: true,
            gray: m.gray,
            rule_width: p.rule.then(|| m.rw.unwrap_or_else(|| settings.global(Param::RuleWidth))),
        };
        let math_err = |e: MathError| Diagnostic::new(Code::Layout, p.loc, format!("arrow geometry: {e}"));
        let result: Result<(), MathError> = (|| {
            if dx == 0 && dy == 0 {
                return Ok(());
            }
            let len = segment_length(dx, dy)?;
            let join = m.join.unwrap_or(if settings.joined { JoinSpec::Both } else { JoinSpec::None });
            let qb = end_trim(join.tail(), boxed(&ends.tail), (dx, dy), len, p.style, settings)?;
            let py = end_trim(join.head(), boxed(&ends.head), (-dx, -dy), len, p.style, settings)?;
            let us = (i64::from(len) - i64::from(qb) - i64::from(py)).clamp(i64::from(i32::MIN), i64::from(i32::MAX)) as Sp;
            geo.length = len;
            geo.qb = qb;
            geo.py = py;
            geo.us = us;
            geo.start = along(from, to, i64::from(qb), i64::from(len));
            geo.end = along(from, to, i64::from(len) - i64::from(py), i64::from(len));
            geo.suppressed = us < settings.global(Param::MinimumCellLength);
            Ok(())
        })();
        if let Err(e) = result {
            out.diagnostics.push(math_err(e));
            continue;
        }

        if let Some((name, frac)) = &m.point {
            let t = frac.unwrap_or_else(|| settings.effective(Param::PtPoint, p.style));
            let pt = (labels::lerp(geo.start.0, geo.end.0, t), labels::lerp(geo.start.1, geo.end.1, t));
            if out.points.contains_key(name) {
                out.diagnostics.push(Diagnostic::new(Code::DuplicatePoint, p.loc, format!("point `{name}` already defined")));
            } else {
                out.points.insert(name.clone(), pt);
            }
        }

        if !geo.suppressed {
            let shaft = Shaft { start: geo.start, end: geo.end, dx, dy, len: geo.length };
            let horizontal = geo.octant.is_some_and(Octant::is_horizontal);
            let mut holes = Vec::new();
            for label in p.labels {
                let on_line = m.brk || (horizontal && matches!(label.code, crate::dsl::LabelCode::Lt | crate::dsl::LabelCode::Gt));
                let anchor = labels::place_label(label, &shaft, p.style, p.slide, on_line, settings, metrics);
                if on_line {
                    let w = metrics.measure(&label.text, TextContext::Label).w;
                    holes.push((anchor.along, hole_width(w, p.style, m.lw.unwrap_or(0), settings)));
                }
                geo.labels.push(anchor);
            }
            let pieces = break_spans(geo.us, &holes);
            if pieces.is_empty() {
                out.diagnostics.push(Diagnostic::new(
                    Code::LabelHoleTooWide,
                    p.loc,
                    "label gap is wider than the shaft; shaft not drawn",
                ));
            }
            geo.spans = pieces
                .into_iter()
                .map(|(a, b)| {
                    let (x1, y1) = along(geo.start, geo.end, i64::from(a), i64::from(geo.us));
                    let (x2, y2) = along(geo.start, geo.end, i64::from(b), i64::from(geo.us));
                    Span { x1, y1, x2, y2 }
                })
                .collect();
        }
        out.arrows.push(geo);
    }
    out
}
