//! Column and row positions: the fixed grid, or the flexible solver with
//! stretches, bindings, gravity and movement operators.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::dsl::{Cell, Code, DiagramAst, DiagramKind, Diagnostic, Gravitate, Loc, MoveKind, MoveValue};
use crate::fixedmath::Sp;
use crate::router::{self, End};
use crate::settings::Settings;
use crate::styles::{BoxSize, Metrics, Param, TextContext};
use crate::units::{scale_by_fraction, FRACTION_ONE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexBox {
    pub row: usize,
    pub col: usize,
    pub w: Sp,
    pub h: Sp,
    pub d: Sp,
}

impl VertexBox {
    pub fn size(&self) -> BoxSize {
        BoxSize { w: self.w, h: self.h, d: self.d }
    }
}

/// Recorded boxes indexed by cell.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BoxMap {
    rows: usize,
    cols: usize,
    cells: Vec<Option<BoxSize>>,
}

impl BoxMap {
    pub fn new(rows: usize, cols: usize, boxes: &[VertexBox]) -> Self {
        let mut cells = vec![None; rows * cols];
        for b in boxes {
            if b.row < rows && b.col < cols {
                cells[b.row * cols + b.col] = Some(b.size());
            }
        }
        BoxMap { rows, cols, cells }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> Option<BoxSize> {
        if row < self.rows && col < self.cols {
            self.cells[row * self.cols + col]
        } else {
            None
        }
    }

    pub fn has(&self, row: usize, col: usize) -> bool {
        self.get(row, col).is_some()
    }

    /// Width of the box at a cell, zero when there is none.
    pub fn width(&self, row: usize, col: usize) -> Sp {
        self.get(row, col).map_or(0, |b| b.w)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Grid {
    /// Column centers.
    pub x: Vec<Sp>,
    /// Row axes, growing downward.
    pub y: Vec<Sp>,
    pub width: Sp,
    pub height: Sp,
    pub margin_left: Sp,
    pub margin_right: Sp,
    pub ext_top: Sp,
    pub ext_bottom: Sp,
    pub baseline_row: Option<usize>,
    /// Tenths of a column.
    pub gravity: i32,
}

impl Grid {
    pub fn dx(&self, i: usize) -> Sp {
        self.x[i + 1] - self.x[i]
    }

    pub fn dy(&self, j: usize) -> Sp {
        self.y[j + 1] - self.y[j]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConstraintKind {
    /// Arrow length.
    A,
    /// Span width.
    W,
    /// Adjacent clearance.
    C,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraint {
    pub kind: ConstraintKind,
    pub c1: usize,
    pub c2: usize,
    pub required: Sp,
    pub order: usize,
}

impl Constraint {
    /// How far the columns are from meeting the constraint; positive when violated.
    pub fn deficiency(&self, x: &[Sp]) -> i64 {
        i64::from(self.required) - (i64::from(x[self.c2]) - i64::from(x[self.c1]))
    }
}

/// Columns coupled by constraint splits.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Bindings {
    adj: Vec<BTreeSet<usize>>,
}

impl Bindings {
    pub fn new(columns: usize) -> Self {
        Bindings { adj: vec![BTreeSet::new(); columns] }
    }

    pub fn bind(&mut self, a: usize, b: usize) {
        if a != b {
            self.adj[a].insert(b);
            self.adj[b].insert(a);
        }
    }

    pub fn is_empty(&self) -> bool {
        self.adj.iter().all(BTreeSet::is_empty)
    }

    /// `start` and every column transitively bound to it, never entering `exclude`.
    pub fn bound_set(&self, start: usize, exclude: Option<usize>) -> Vec<usize> {
        let mut seen = vec![false; self.adj.len()];
        let mut out = Vec::new();
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        if let Some(e) = exclude {
            if e < seen.len() {
                seen[e] = true;
            }
        }
        while let Some(c) = queue.pop_front() {
            out.push(c);
            for &n in &self.adj[c] {
                if !seen[n] {
                    seen[n] = true;
                    queue.push_back(n);
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// Measures every vertex cell. A box is recorded when it is nonempty or the cell has `\stop`.
pub fn collect_vertices(ast: &DiagramAst, metrics: &dyn Metrics) -> Vec<VertexBox> {
    ast.cells()
        .filter_map(|(row, col, cell)| match cell {
            Cell::Vertex(v) => {
                let b = metrics.measure(&v.text, TextContext::Vertex);
                (!b.is_empty() || v.stop).then_some(VertexBox { row, col, w: b.w, h: b.h, d: b.d })
            }
            _ => None,
        })
        .collect()
}

/// Uniform grid: `X[c] = c * xgrid`, `Y[r] = r * ygrid` for `c in 0..=last_col`.
pub fn fixed_positions(last_col: usize, last_row: usize, xgrid: Sp, ygrid: Sp) -> (Vec<Sp>, Vec<Sp>) {
    let x = (0..=last_col).map(|c| (c as i64 * i64::from(xgrid)) as Sp).collect();
    let y = (0..=last_row).map(|r| (r as i64 * i64::from(ygrid)) as Sp).collect();
    (x, y)
}

/// Gravity in tenths of a column: the middle by default, an edge when
/// gravitating, or the column of a `\grav` cell.
pub fn gravity_default(last_col: usize, gravitate: Option<Gravitate>, grav_col: Option<usize>) -> i32 {
    if let Some(c) = grav_col {
        return 10 * c as i32;
    }
    match gravitate {
        Some(Gravitate::Left) => 0,
        Some(Gravitate::Right) => 10 * last_col as i32,
        None => 5 * last_col as i32,
    }
}

/// Width reserved for an arrow's labels along its length.
pub fn label_measure(arrow: &crate::dsl::Arrow, settings: &Settings, metrics: &dyn Metrics) -> Sp {
    let style = arrow.style.as_str();
    let pads = settings.effective(Param::LabelPad, style)
        + settings.effective(Param::LabelWidthPad, style)
        + arrow.mods.lw.unwrap_or(0);
    arrow
        .labels
        .iter()
        .map(|l| metrics.measure(&l.text, TextContext::Label).w + 2 * pads)
        .max()
        .unwrap_or(0)
}

/// Registers A (arrow length), W (span width) and C (clearance) constraints, in that order.
pub fn build_constraints(
    ast: &DiagramAst,
    boxes: &BoxMap,
    settings: &Settings,
    metrics: &dyn Metrics,
) -> Vec<Constraint> {
    let graph = ast.kind == DiagramKind::Graph;
    let mut a_list = Vec::new();
    let mut w_list = Vec::new();
    for (row, col, cell) in ast.cells() {
        let (dir, target, mods, label_w) = match cell {
            Cell::Arrow(a) => (a.dir, a.target.as_ref(), &a.mods, label_measure(a, settings, metrics)),
            Cell::Rule(r) => (r.dir, r.target.as_ref(), &r.mods, 0),
            _ => continue,
        };
        if mods.nowidth {
            continue;
        }
        let ends = router::resolve_endpoints(row, col, dir, target, boxes, graph);
        let (End::Cell { row: r1, col: k1 }, End::Cell { row: r2, col: k2 }) = (&ends.tail, &ends.head) else {
            continue;
        };
        let (r1, k1, r2, k2) = (*r1, *k1, *r2, *k2);
        if k1 == k2 {
            continue;
        }
        let (c1, c2) = (k1.min(k2), k1.max(k2));
        if r1 == r2 {
            let required = boxes.width(r1, k1) / 2
                + boxes.width(r2, k2) / 2
                + label_w.max(settings.global(Param::CellWidth));
            a_list.push((c1, c2, required));
        } else {
            let braced = settings.braced != mods.span_mode.is_some();
            let required = if braced {
                settings.global(Param::BraceWidth)
            } else if settings.loose {
                0
            } else {
                settings.global(Param::ColumnDist)
            };
            w_list.push((c1, c2, required));
        }
    }
    let mut c_list: Vec<(usize, usize, Sp)> = Vec::new();
    let xgrid = settings.global(Param::Xgrid);
    let upsert = |list: &mut Vec<(usize, usize, Sp)>, c1: usize, c2: usize, req: Sp| {
        match list.iter_mut().find(|e| e.0 == c1 && e.1 == c2) {
            Some(e) => e.2 = e.2.max(req),
            None => list.push((c1, c2, req)),
        }
    };
    for c in 0..boxes.cols().saturating_sub(1) {
        upsert(&mut c_list, c, c + 1, xgrid);
    }
    for r in 0..boxes.rows() {
        let mut prev: Option<usize> = None;
        for c in 0..boxes.cols() {
            if let Some(b) = boxes.get(r, c) {
                if let Some(p) = prev {
                    let req = (boxes.width(r, p) / 2 + b.w / 2).max(xgrid);
                    upsert(&mut c_list, p, c, req);
                }
                prev = Some(c);
            }
        }
    }
    let tag = |kind| move |(i, (c1, c2, required)): (usize, (usize, usize, Sp))| (kind, c1, c2, required, i);
    a_list
        .into_iter()
        .enumerate()
        .map(tag(ConstraintKind::A))
        .chain(w_list.into_iter().enumerate().map(tag(ConstraintKind::W)))
        .chain(c_list.into_iter().enumerate().map(tag(ConstraintKind::C)))
        .enumerate()
        .map(|(order, (kind, c1, c2, required, _))| Constraint { kind, c1, c2, required, order })
        .collect()
}

/// Outcome of the flexible solver.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub x: Vec<Sp>,
    pub bindings: Bindings,
    pub passes: usize,
    /// Set when the binding-aware passes hit their cap and the unbound repair pass ran.
    pub repaired: bool,
}

fn shift(x: &mut [Sp], cols: &[usize], by: Sp) {
    for &c in cols {
        x[c] = x[c].saturating_add(by);
    }
}

/// Applies constraints in registration order until none is violated.
///
/// A violated constraint with deficiency `δ` moves `c1` left by `δ` when both
/// columns sit left of gravity, `c2` right by `δ` when both sit right, and
/// otherwise splits: `c1` left by `floor(δ/2)`, `c2` right by the rest, after
/// which the two columns are bound. Moves carry bound columns along.
pub fn flexible_solve(constraints: &[Constraint], columns: usize, gravity: i32) -> Solution {
    let mut x = vec![0; columns];
    let mut bindings = Bindings::new(columns);
    if columns == 0 {
        return Solution { x, bindings, passes: 0, repaired: false };
    }
    let cap = (10 * (columns - 1)).max(10);
    let mut passes = 0;
    let mut settled = false;
    while passes < cap {
        passes += 1;
        let mut changed = false;
        for con in constraints {
            let delta = con.deficiency(&x);
            if delta <= 0 {
                continue;
            }
            let delta = delta.min(i64::from(i32::MAX)) as Sp;
            changed = true;
            let di = 10 * con.c1 as i64 - i64::from(gravity);
            let dj = 10 * con.c2 as i64 - i64::from(gravity);
            if di * dj < 0 {
                let left = delta / 2;
                let right = delta - left;
                shift(&mut x, &bindings.bound_set(con.c1, Some(con.c2)), -left);
                shift(&mut x, &bindings.bound_set(con.c2, Some(con.c1)), right);
                bindings.bind(con.c1, con.c2);
            } else if di < 0 {
                shift(&mut x, &bindings.bound_set(con.c1, Some(con.c2)), -delta);
            } else {
                shift(&mut x, &bindings.bound_set(con.c2, Some(con.c1)), delta);
            }
        }
        if !changed {
            settled = true;
            break;
        }
    }
    let mut repaired = false;
    if !settled && constraints.iter().any(|c| c.deficiency(&x) > 0) {
        // Constraints always point rightward (c1 < c2), so one pass in order of c2 satisfies all.
        repaired = true;
        let mut order: Vec<&Constraint> = constraints.iter().collect();
        order.sort_by_key(|c| (c.c2, c.order));
        for con in order {
            let delta = con.deficiency(&x);
            if delta > 0 {
                x[con.c2] = x[con.c2].saturating_add(delta.min(i64::from(i32::MAX)) as Sp);
            }
        }
    }
    Solution { x, bindings, passes, repaired }
}

/// Resolves a movement's amount in sp. Fractions scale the gap to the next
/// column (or to the row above, for rows); edge moves align box edges with
/// the nearest box in the same row.
pub fn movement_amount(
    kind: MoveKind,
    value: MoveValue,
    row: usize,
    col: usize,
    x: &[Sp],
    y: &[Sp],
    boxes: &BoxMap,
) -> Sp {
    match value {
        MoveValue::Length(v) => v,
        MoveValue::Fraction(f) => {
            let gap = if kind.is_row() {
                if row == 0 || row >= y.len() {
                    0
                } else {
                    y[row] - y[row - 1]
                }
            } else if col + 1 < x.len() {
                x[col + 1] - x[col]
            } else {
                0
            };
            scale_by_fraction(gap, f)
        }
        MoveValue::Edge => {
            let w = boxes.width(row, col);
            let left_edge = x[col] - w / 2;
            let right_edge = x[col] + (w - w / 2);
            match kind {
                MoveKind::Dl | MoveKind::Ml | MoveKind::Al => (0..col)
                    .rev()
                    .find(|&c| boxes.has(row, c))
                    .map_or(0, |c| x[c] + (boxes.width(row, c) - boxes.width(row, c) / 2) - left_edge),
                _ => (col + 1..boxes.cols())
                    .find(|&c| boxes.has(row, c))
                    .map_or(0, |c| x[c] - boxes.width(row, c) / 2 - right_edge),
            }
        }
    }
}

/// Applies one movement. Column kinds: `d*` shifts the column and all to its
/// right, `m*` the column alone, `a*` the column and its bound set. Row kinds
/// take upward-positive amounts: `dy` shifts the row and all rows above it,
/// `my` the row alone.
pub fn apply_movement(kind: MoveKind, index: usize, amount: Sp, x: &mut [Sp], y: &mut [Sp], bindings: &Bindings) {
    match kind {
        MoveKind::Dx | MoveKind::Dl | MoveKind::Dr => {
            for v in x.iter_mut().skip(index) {
                *v = v.saturating_add(amount);
            }
        }
        MoveKind::Mx | MoveKind::Ml | MoveKind::Mr => {
            if let Some(v) = x.get_mut(index) {
                *v = v.saturating_add(amount);
            }
        }
        MoveKind::Ax | MoveKind::Al | MoveKind::Ar => {
            if index < x.len() {
                let set = if bindings.adj.len() == x.len() { bindings.bound_set(index, None) } else { vec![index] };
                shift(x, &set, amount);
            }
        }
        MoveKind::Dy => {
            for v in y.iter_mut().take(index + 1) {
                *v = v.saturating_sub(amount);
            }
        }
        MoveKind::My => {
            if let Some(v) = y.get_mut(index) {
                *v = v.saturating_sub(amount);
            }
        }
    }
}

/// Position of a decimal graph coordinate (16.16 fixed point).
///
/// The integer part of `x` indexes the columns and the fraction interpolates
/// into the next gap; past the last column, and below zero, `xgrid` is the
/// unit. `y` counts rows upward from the bottom row.
pub fn graph_coords(grid: &Grid, xgrid: Sp, ygrid: Sp, x: i32, y: i32) -> (Sp, Sp) {
    let px = axis_coord(&grid.x, xgrid, i64::from(x));
    let last_row = grid.y.len().saturating_sub(1) as i64;
    let down = last_row * i64::from(FRACTION_ONE) - i64::from(y);
    let py = axis_coord(&grid.y, ygrid, down);
    (px, py)
}

/// Interpolated position along one axis at a 16.16 index.
pub fn axis_coord(lines: &[Sp], unit: Sp, at: i64) -> Sp {
    let one = i64::from(FRACTION_ONE);
    let scale = |len: i64, frac: i64| (len * frac / one) as Sp;
    if at < 0 || lines.is_empty() {
        let base = lines.first().copied().unwrap_or(0);
        return base.saturating_add(scale(i64::from(unit), at));
    }
    let i = (at / one) as usize;
    let frac = at % one;
    let last = lines.len() - 1;
    if i < last {
        lines[i] + scale(i64::from(lines[i + 1] - lines[i]), frac)
    } else {
        let beyond = at - last as i64 * one;
        lines[last].saturating_add(scale(i64::from(unit), beyond))
    }
}

/// Layout of one diagram.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    pub grid: Grid,
    pub boxes: Vec<VertexBox>,
    pub box_map: BoxMap,
    pub constraints: Vec<Constraint>,
    pub bindings: Bindings,
    pub xgrid: Sp,
    pub ygrid: Sp,
    pub warnings: Vec<Diagnostic>,
}

/// Grid dimensions, widened in a `Graph` to cover its declared ranges.
fn dimensions(ast: &DiagramAst) -> (usize, usize) {
    let mut cols = ast.column_count();
    let mut rows = ast.row_count();
    if ast.kind == DiagramKind::Graph {
        if let Some(r) = ast.graph.xrange {
            cols = cols.max(r.max(0) as usize + 1);
        }
        if let Some(r) = ast.graph.yrange {
            rows = rows.max(r.max(0) as usize + 1);
        }
    }
    (rows, cols)
}

/// Grid units, taking a `Graph`'s width/height over its ranges when both are given.
fn grid_units(ast: &DiagramAst, settings: &Settings) -> (Sp, Sp) {
    let mut xgrid = settings.global(Param::Xgrid);
    let mut ygrid = settings.global(Param::Ygrid);
    if ast.kind == DiagramKind::Graph {
        if let (Some(w), Some(r)) = (ast.graph.width, ast.graph.xrange) {
            if r > 0 {
                xgrid = w / r;
            }
        }
        if let (Some(h), Some(r)) = (ast.graph.height, ast.graph.yrange) {
            if r > 0 {
                ygrid = h / r;
            }
        }
    }
    (xgrid, ygrid)
}

pub fn layout(ast: &DiagramAst, settings: &Settings, metrics: &dyn Metrics) -> Layout {
    let (rows, cols) = dimensions(ast);
    let boxes = collect_vertices(ast, metrics);
    let box_map = BoxMap::new(rows, cols, &boxes);
    let (xgrid, ygrid) = grid_units(ast, settings);
    let last_col = cols.saturating_sub(1);
    let mut warnings = Vec::new();

    let mut grav_col = None;
    let mut baseline_row = None;
    let mut moves = Vec::new();
    for (r, c, cell) in ast.cells() {
        if let Cell::Vertex(v) = cell {
            if v.grav {
                grav_col = Some(c);
            }
            if v.base && baseline_row.is_none() {
                baseline_row = Some(r);
            }
            moves.extend(v.movements.iter().map(|m| (m.kind, m.value, r, c)));
        }
    }
    let gravity = gravity_default(last_col, settings.gravitate, grav_col);

    let (mut x, mut y) = if cols == 0 { (Vec::new(), Vec::new()) } else { fixed_positions(last_col, rows.saturating_sub(1), xgrid, ygrid) };
    let mut settings_for_constraints = settings.clone();
    settings_for_constraints.registry.set_param(Param::Xgrid, None, xgrid, crate::styles::SetMode::Absolute).ok();
    let constraints = build_constraints(ast, &box_map, &settings_for_constraints, metrics);
    let mut bindings = Bindings::new(cols);
    if settings.flexible && cols > 0 {
        let sol = flexible_solve(&constraints, cols, gravity);
        if sol.repaired {
            warnings.push(Diagnostic::new(
                Code::Unsatisfied,
                Loc::default(),
                format!("column solver did not settle in {} passes; bindings dropped", sol.passes),
            ));
        }
        x = sol.x;
        bindings = sol.bindings;
    }

    moves.sort_by_key(|m| MoveKind::ORDER.iter().position(|k| *k == m.0));
    for (kind, value, r, c) in moves {
        if c >= x.len() || r >= y.len() {
            continue;
        }
        let amount = movement_amount(kind, value, r, c, &x, &y, &box_map);
        let index = if kind.is_row() { r } else { c };
        apply_movement(kind, index, amount, &mut x, &mut y, &bindings);
    }

    // Normalize: the leftmost box edge or column at 0, the topmost box edge or row at 0.
    let left = boxes.iter().map(|b| x[b.col] - b.w / 2).chain(x.iter().copied()).min().unwrap_or(0);
    let top = boxes.iter().map(|b| y[b.row] - b.h).chain(y.iter().copied()).min().unwrap_or(0);
    x.iter_mut().for_each(|v| *v -= left);
    y.iter_mut().for_each(|v| *v -= top);

    let right = boxes.iter().map(|b| x[b.col] + (b.w - b.w / 2)).chain(x.iter().copied()).max().unwrap_or(0);
    let bottom = boxes.iter().map(|b| y[b.row] + b.d).chain(y.iter().copied()).max().unwrap_or(0);
    let grid = Grid {
        width: right,
        height: bottom,
        margin_left: x.first().copied().unwrap_or(0),
        margin_right: right - x.last().copied().unwrap_or(0),
        ext_top: y.first().copied().unwrap_or(0),
        ext_bottom: bottom - y.last().copied().unwrap_or(0),
        x,
        y,
        baseline_row,
        gravity,
    };
    Layout { grid, boxes, box_map, constraints, bindings, xgrid, ygrid, warnings }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;
    use crate::settings::CompileOptions;
    use crate::styles::EmMetrics;

    const PT: Sp = 65536;

    fn run(src: &str) -> Layout {
        let ast = parse(src).unwrap();
        let settings = CompileOptions::default().resolve(&ast).unwrap();
        layout(&ast, &settings, &EmMetrics::default())
    }

    #[test]
    fn vertex_boxes() {
        let ast = parse(r"A & & \stop").unwrap();
        let boxes = collect_vertices(&ast, &EmMetrics::default());
        assert_eq!(boxes[0], VertexBox { row: 0, col: 0, w: 5 * PT, h: 7 * PT, d: 2 * PT });
        assert_eq!(boxes[1], VertexBox { row: 0, col: 2, w: 0, h: 0, d: 0 });
        assert_eq!(boxes.len(), 2);
    }

    #[test]
    fn fixed_grid() {
        let (x, y) = fixed_positions(2, 1, 1_864_679, 1_864_679);
        assert_eq!(x, [0, 1_864_679, 3_729_358]);
        assert_eq!(y, [0, 1_864_679]);
        let (x, _) = fixed_positions(2, 0, 0, 0);
        assert_eq!(x, [0, 0, 0]);
    }

    #[test]
    fn gravity() {
        assert_eq!(gravity_default(2, None, None), 10);
        assert_eq!(gravity_default(2, Some(Gravitate::Left), None), 0);
        assert_eq!(gravity_default(2, Some(Gravitate::Right), None), 20);
        assert_eq!(gravity_default(4, None, Some(2)), 20);
    }

    #[test]
    fn split_and_normalize() {
        let con = [Constraint { kind: ConstraintKind::A, c1: 0, c2: 2, required: 31 * PT, order: 0 }];
        let sol = flexible_solve(&con, 3, 10);
        assert_eq!(sol.x[2] - sol.x[0], 31 * PT);
        assert_eq!(sol.x[0], -(31 * PT / 2));
        assert_eq!(sol.bound_pair(), Some((0, 2)));
    }

    #[test]
    fn gravitate_left_moves_right_column() {
        let con = [Constraint { kind: ConstraintKind::C, c1: 0, c2: 1, required: 10 * PT, order: 0 }];
        let sol = flexible_solve(&con, 2, 0);
        assert_eq!(sol.x, [0, 10 * PT]);
        let sol = flexible_solve(&con, 2, 10);
        assert_eq!(sol.x, [-10 * PT, 0]);
    }

    #[test]
    fn bindings_propagate() {
        let mut b = Bindings::new(4);
        b.bind(0, 2);
        b.bind(2, 3);
        assert_eq!(b.bound_set(0, None), [0, 2, 3]);
        assert_eq!(b.bound_set(0, Some(2)), [0]);
        let mut x = vec![0, 10, 20, 30];
        let mut y = vec![];
        apply_movement(MoveKind::Ax, 3, 5, &mut x, &mut y, &b);
        assert_eq!(x, [5, 10, 25, 35]);
    }

    #[test]
    fn movements() {
        let b = Bindings::new(3);
        let mut y = vec![0, 100];
        let mut x = vec![0, 20 * PT, 40 * PT];
        apply_movement(MoveKind::Dx, 1, 10 * PT, &mut x, &mut y, &b);
        assert_eq!(x, [0, 30 * PT, 50 * PT]);
        let mut x = vec![0, 20 * PT, 40 * PT];
        apply_movement(MoveKind::Mx, 1, 10 * PT, &mut x, &mut y, &b);
        assert_eq!(x, [0, 30 * PT, 40 * PT]);
        let x = vec![0, 20 * PT, 40 * PT];
        let boxes = BoxMap::default();
        assert_eq!(movement_amount(MoveKind::Dx, MoveValue::Fraction(32768), 0, 1, &x, &y, &boxes), 10 * PT);
        assert_eq!(movement_amount(MoveKind::Dx, MoveValue::Fraction(32768), 0, 2, &x, &y, &boxes), 0);
        apply_movement(MoveKind::Dy, 0, 7, &mut x.clone(), &mut y, &b);
        assert_eq!(y, [-7, 100]);
    }

    #[test]
    fn edge_alignment() {
        let boxes = BoxMap::new(1, 3, &[
            VertexBox { row: 0, col: 0, w: 10 * PT, h: 0, d: 0 },
            VertexBox { row: 0, col: 2, w: 4 * PT, h: 0, d: 0 },
        ]);
        let x = vec![0, 20 * PT, 40 * PT];
        // Right edge of column 0 is at 5pt; left edge of column 2 box sits at 38pt.
        assert_eq!(movement_amount(MoveKind::Dl, MoveValue::Edge, 0, 2, &x, &[0], &boxes), 5 * PT - 38 * PT);
        assert_eq!(movement_amount(MoveKind::Mr, MoveValue::Edge, 0, 0, &x, &[0], &boxes), 38 * PT - 5 * PT);
        assert_eq!(movement_amount(MoveKind::Ar, MoveValue::Edge, 0, 2, &x, &[0], &boxes), 0);
    }

    #[test]
    fn graph_interpolation() {
        let grid = Grid { x: vec![0, 100, 200], y: vec![0, 100], ..Grid::default() };
        assert_eq!(graph_coords(&grid, 1000, 1000, 3 * 32768, 65536).0, 150);
        assert_eq!(graph_coords(&grid, 1000, 1000, 0, 65536), (0, 0));
        assert_eq!(graph_coords(&grid, 1000, 1000, 2 * 65536 + 16384, 0), (450, 100));
        assert_eq!(graph_coords(&grid, 1000, 1000, -32768, -65536), (-500, 1100));
    }

    #[test]
    fn square_layout() {
        let l = run(r"\Diag A & \rTo^{f} & B \\ \dTo & & \dTo \\ C & \rTo & D");
        assert!(l.constraints.iter().all(|c| c.deficiency(&l.grid.x) <= 0));
        assert_eq!(l.grid.x[0], 5 * PT / 2);
        let left = l.boxes.iter().map(|b| l.grid.x[b.col] - b.w / 2).min().unwrap();
        assert_eq!(left, 0);
    }

    #[test]
    fn fixed_mode_keeps_grid() {
        let l = run(r"A & \rTo & B \\ & & C");
        assert_eq!(l.grid.dx(0), 1_864_679);
        assert_eq!(l.grid.dx(1), 1_864_679);
    }

    #[test]
    fn constraint_registration() {
        let ast = parse(r"\Diag[cellwidth=20pt] A\dx{0pt} & \rTo^{f} & B \\ \dTo & & \rdTo").unwrap();
        let settings = CompileOptions::default().resolve(&ast).unwrap();
        let metrics = EmMetrics { vertex_em: 20 * PT, label_em: 10 * PT };
        let boxes = collect_vertices(&ast, &metrics);
        let map = BoxMap::new(2, 3, &boxes);
        let cons = build_constraints(&ast, &map, &settings, &metrics);
        let a: Vec<_> = cons.iter().filter(|c| c.kind == ConstraintKind::A).collect();
        assert_eq!(a.len(), 1);
        // 10/2 + 10/2 + max(5 + 2*(3+5), 20)
        assert_eq!(a[0].required, 31 * PT);
        assert!(cons.iter().any(|c| c.kind == ConstraintKind::C && c.c1 == 0 && c.c2 == 2 && c.required == 10 * PT));
    }
}

#[cfg(test)]
impl Solution {
    fn bound_pair(&self) -> Option<(usize, usize)> {
        (0..self.bindings.adj.len()).find_map(|a| self.bindings.adj[a].iter().next().map(|&b| (a, b)))
    }
}
