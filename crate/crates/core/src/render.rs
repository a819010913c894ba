//! Placed items, SVG output and the JSON layout dump.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dsl::{Cell, DiagramAst};
use crate::fixedmath::{Sp, PT};
use crate::labels::emitted_rotation;
use crate::layout::{Grid, Layout, VertexBox};
use crate::router::{ArrowGeometry, PointTable, Routed};
use crate::settings::Settings;
use crate::styles::{BoxSize, Glyph, Param, Shaft};
use crate::units::{format_pt, format_ratio, FRACTION_ONE};

/// Bumped whenever the dump or item schema changes.
pub const SCHEMA_VERSION: u32 = 1;

/// Stroke width of shafts, glyphs and grid lines.
pub const LINE_WIDTH: Sp = 26_214;
/// Half the distance between the two strokes of a double shaft.
pub const DOUBLE_OFFSET: Sp = 52_428;
pub const DOT_RADIUS: Sp = 98_304;
/// Half-extent of the `=` drawn by Equals shafts.
const EQUALS_REACH: Sp = 4 * PT;
const VERTEX_FONT: Sp = 10 * PT;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ItemKind {
    Gridline,
    Dot,
    Vertex,
    ShaftSpan,
    TailGlyph,
    HeadGlyph,
    Label,
    Rule,
}

/// One drawable thing. `(x, y)` is the anchor: a segment's first end, a
/// glyph's tip, a text's anchor point, a dot's center.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PlacedItem {
    pub kind: ItemKind,
    pub x: Sp,
    pub y: Sp,
    /// Second end of segments; equal to `(x, y)` otherwise.
    pub x2: Sp,
    pub y2: Sp,
    pub anchor_code: u8,
    /// 16.16 gray level, 0 black.
    pub gray: i32,
    /// Emitted rotation in SVG degrees, 0 for none.
    pub rotation: i32,
    /// Stroke width, or the radius of a dot.
    pub width: Sp,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shaft: Option<Shaft>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub glyph: Option<Glyph>,
    /// Facing direction of a glyph.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<(Sp, Sp)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, rename = "box", skip_serializing_if = "Option::is_none")]
    pub size: Option<BoxSize>,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub font: Sp,
}

fn is_zero(v: &Sp) -> bool {
    *v == 0
}

impl PlacedItem {
    fn at(kind: ItemKind, x: Sp, y: Sp) -> Self {
        PlacedItem {
            kind,
            x,
            y,
            x2: x,
            y2: y,
            anchor_code: 1,
            gray: 0,
            rotation: 0,
            width: 0,
            shaft: None,
            glyph: None,
            dir: None,
            text: None,
            size: None,
            font: 0,
        }
    }

    fn segment(kind: ItemKind, a: (Sp, Sp), b: (Sp, Sp), width: Sp, gray: i32) -> Self {
        PlacedItem { x2: b.0, y2: b.1, width, gray, ..PlacedItem::at(kind, a.0, a.1) }
    }

    /// Conservative bounding box `(x0, y0, x1, y1)`.
    pub fn bbox(&self) -> (i64, i64, i64, i64) {
        let (x, y) = (i64::from(self.x), i64::from(self.y));
        let around = |r: i64| (x - r, y - r, x + r, y + r);
        match self.kind {
            ItemKind::Gridline | ItemKind::ShaftSpan | ItemKind::Rule => {
                if self.shaft == Some(Shaft::Equals) {
                    return around(i64::from(EQUALS_REACH));
                }
                let (x2, y2) = (i64::from(self.x2), i64::from(self.y2));
                let r = i64::from(self.width) / 2 + i64::from(DOUBLE_OFFSET) + i64::from(LINE_WIDTH);
                (x.min(x2) - r, y.min(y2) - r, x.max(x2) + r, y.max(y2) + r)
            }
            ItemKind::TailGlyph | ItemKind::HeadGlyph => glyph_bbox(self.glyph.unwrap_or(Glyph::None), self.dir.unwrap_or((1, 0)), x, y),
            ItemKind::Dot => around(i64::from(self.width)),
            ItemKind::Vertex | ItemKind::Label => {
                let b = self.size.unwrap_or_default();
                let (w, h, d) = (i64::from(b.w), i64::from(b.h), i64::from(b.d));
                if self.rotation != 0 {
                    return around(w + h + d);
                }
                let (x0, x1) = match self.anchor_code {
                    0 => (x, x + w),
                    2 => (x - w, x),
                    _ => (x - w / 2, x + w - w / 2),
                };
                if self.kind == ItemKind::Vertex {
                    (x0, y - h, x1, y + d)
                } else {
                    // Label anchors sit at the box center.
                    let top = y - (h + d) / 2;
                    (x0, top, x1, top + h + d)
                }
            }
        }
    }
}

/// Everything the SVG needs; the unit the cache stores and replays.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Drawing {
    pub width: Sp,
    pub height: Sp,
    pub rows: usize,
    pub baseline_row: Option<usize>,
    pub gravity: i32,
    pub items: Vec<PlacedItem>,
}

impl Drawing {
    /// Union of the diagram rectangle and every item's box.
    pub fn bounds(&self) -> (i64, i64, i64, i64) {
        self.items.iter().map(PlacedItem::bbox).fold(
            (0, 0, i64::from(self.width), i64::from(self.height)),
            |(a, b, c, d), (x0, y0, x1, y1)| (a.min(x0), b.min(y0), c.max(x1), d.max(y1)),
        )
    }
}

/// One stroke per column line and per row line, spanning the diagram.
pub fn grid_overlay(grid: &Grid, gray: i32) -> Vec<PlacedItem> {
    let vertical = grid.x.iter().map(|&x| PlacedItem::segment(ItemKind::Gridline, (x, 0), (x, grid.height), LINE_WIDTH, gray));
    let horizontal = grid.y.iter().map(|&y| PlacedItem::segment(ItemKind::Gridline, (0, y), (grid.width, y), LINE_WIDTH, gray));
    vertical.chain(horizontal).collect()
}

/// A dot at each intersection whose cell has no box and no `\nodot`.
pub fn dotted_overlay(ast: &DiagramAst, layout: &Layout) -> Vec<PlacedItem> {
    let mut out = Vec::new();
    for (r, &y) in layout.grid.y.iter().enumerate() {
        for (c, &x) in layout.grid.x.iter().enumerate() {
            if layout.box_map.has(r, c) {
                continue;
            }
            let nodot = match ast.cell(r, c) {
                Some(Cell::Vertex(v)) => v.nodot,
                Some(Cell::Arrow(a)) => a.mods.nodot,
                Some(Cell::Rule(rule)) => rule.mods.nodot,
                _ => false,
            };
            if !nodot {
                out.push(PlacedItem { width: DOT_RADIUS, ..PlacedItem::at(ItemKind::Dot, x, y) });
            }
        }
    }
    out
}

/// Does an arrowhead-like glyph at the tail point away from the shaft?
fn faces_out(g: Glyph) -> bool {
    matches!(g, Glyph::Arrowhead | Glyph::DoubleArrowhead | Glyph::EqualsHead | Glyph::HarpoonUp | Glyph::HarpoonDown)
}

fn arrow_items(a: &ArrowGeometry, settings: &Settings, out: &mut Vec<PlacedItem>) {
    if a.suppressed {
        return;
    }
    let gray = a.gray.unwrap_or(0);
    let cell = settings.registry.cell(&a.style);
    let (dx, dy) = (a.dx(), a.dy());
    if a.rule {
        let w = a.rule_width.unwrap_or(0);
        out.extend(a.spans.iter().map(|s| PlacedItem::segment(ItemKind::Rule, (s.x1, s.y1), (s.x2, s.y2), w, gray)));
    } else if let Some(cell) = cell.filter(|c| c.drawable) {
        let fill = cell.fill;
        match fill.shaft {
            Shaft::None => {}
            Shaft::Equals => {
                let mid = ((a.start.0 + a.end.0) / 2, (a.start.1 + a.end.1) / 2);
                let mut item = PlacedItem::segment(ItemKind::ShaftSpan, mid, mid, LINE_WIDTH, gray);
                item.shaft = Some(Shaft::Equals);
                item.dir = Some((dx, dy));
                out.push(item);
            }
            shaft => out.extend(a.spans.iter().map(|s| PlacedItem {
                shaft: Some(shaft),
                ..PlacedItem::segment(ItemKind::ShaftSpan, (s.x1, s.y1), (s.x2, s.y2), LINE_WIDTH, gray)
            })),
        }
        if fill.tail != Glyph::None {
            let dir = if faces_out(fill.tail) { (-dx, -dy) } else { (dx, dy) };
            out.push(PlacedItem {
                glyph: Some(fill.tail),
                dir: Some(dir),
                ..PlacedItem::segment(ItemKind::TailGlyph, a.start, a.start, LINE_WIDTH, gray)
            });
        }
        if fill.head != Glyph::None {
            out.push(PlacedItem {
                glyph: Some(fill.head),
                dir: Some((dx, dy)),
                ..PlacedItem::segment(ItemKind::HeadGlyph, a.end, a.end, LINE_WIDTH, gray)
            });
        }
    }
    for l in &a.labels {
        let font = if l.size.h == 0 { 0 } else { (i64::from(l.size.h) * 10 / 7) as Sp };
        out.push(PlacedItem {
            anchor_code: l.anchor_code,
            gray,
            rotation: emitted_rotation(l.rotation).unwrap_or(0),
            text: Some(l.text.clone()),
            size: Some(l.size),
            font,
            ..PlacedItem::at(ItemKind::Label, l.x, l.y)
        });
    }
}

fn vertex_items(ast: &DiagramAst, boxes: &[VertexBox], grid: &Grid) -> Vec<PlacedItem> {
    boxes
        .iter()
        .filter_map(|b| {
            let Some(Cell::Vertex(v)) = ast.cell(b.row, b.col) else { return None };
            if v.text.is_empty() {
                return None;
            }
            let font = if b.h == 0 { VERTEX_FONT } else { (i64::from(b.h) * 10 / 7) as Sp };
            Some(PlacedItem {
                gray: v.gray.unwrap_or(0),
                text: Some(v.text.clone()),
                size: Some(b.size()),
                font,
                ..PlacedItem::at(ItemKind::Vertex, grid.x[b.col], grid.y[b.row])
            })
        })
        .collect()
}

/// Assembles the draw list: underlay grid lines, dots, vertices, arrows in
/// cell order, then overlay grid lines.
pub fn draw(ast: &DiagramAst, settings: &Settings, layout: &Layout, routed: &Routed) -> Drawing {
    let grid = &layout.grid;
    let mut items = Vec::new();
    let lines = || grid_overlay(grid, settings.global(Param::GridGray));
    if settings.gridlines && !settings.overgrid {
        items.extend(lines());
    }
    if settings.dotted {
        items.extend(dotted_overlay(ast, layout));
    }
    items.extend(vertex_items(ast, &layout.boxes, grid));
    for a in &routed.arrows {
        arrow_items(a, settings, &mut items);
    }
    if settings.overgrid {
        items.extend(lines());
    }
    Drawing {
        width: grid.width,
        height: grid.height,
        rows: grid.y.len(),
        baseline_row: grid.baseline_row,
        gravity: grid.gravity,
        items,
    }
}

/// `round(255 g)` for a 16.16 gray level.
pub fn gray_channel(gray: i32) -> u8 {
    let g = i64::from(gray.clamp(0, FRACTION_ONE));
    ((255 * g + 32_768) / 65_536) as u8
}

pub fn gray_color(gray: i32) -> String {
    let c = gray_channel(gray);
    format!("rgb({c},{c},{c})")
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for ch in text.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            c => out.push(c),
        }
    }
    out
}

/// Control points of each outline in tenths of a pt. Curves stay inside their hull.
fn glyph_hull(g: Glyph) -> &'static [(i64, i64)] {
    match g {
        Glyph::None => &[(0, 0)],
        Glyph::Arrowhead | Glyph::Monotail => &[(-40, -25), (-15, -5), (0, 0), (-15, 5), (-40, 25)],
        Glyph::DoubleArrowhead => &[(-40, -25), (0, 0), (-40, 25), (-70, -25), (-30, 0), (-70, 25)],
        Glyph::EqualsHead => &[(-45, -35), (-15, -10), (0, 0), (-15, 10), (-45, 35)],
        // Either bulge of the half circle.
        Glyph::Hook => &[(-20, 0), (20, 0), (-20, -40), (20, -40)],
        Glyph::Bar => &[(0, -25), (0, 25)],
        Glyph::HarpoonUp => &[(-40, -25), (-15, -5), (0, 0)],
        Glyph::HarpoonDown => &[(0, 0), (-15, 5), (-40, 25)],
    }
}

/// Box around a glyph turned to face `dir`, with stroke and rounding margin.
fn glyph_bbox(g: Glyph, dir: (Sp, Sp), x: i64, y: i64) -> (i64, i64, i64, i64) {
    let (dx, dy) = (i64::from(dir.0), i64::from(dir.1));
    let len = (((dx * dx + dy * dy) as u64).isqrt() as i64).max(1);
    let pt = i64::from(PT);
    let margin = i64::from(LINE_WIDTH) / 2 + pt / 100;
    let mut b = (i64::MAX, i64::MAX, i64::MIN, i64::MIN);
    for &(px, py) in glyph_hull(g) {
        let (px, py) = (px * pt / 10, py * pt / 10);
        // matrix(ux uy -uy ux)
        let wx = x + (dx * px - dy * py) / len;
        let wy = y + (dy * px + dx * py) / len;
        b = (b.0.min(wx), b.1.min(wy), b.2.max(wx), b.3.max(wy));
    }
    (b.0 - margin, b.1 - margin, b.2 + margin, b.3 + margin)
}

/// Glyph outlines in pt, tip at the origin, facing +x.
fn glyph_path(g: Glyph) -> &'static str {
    match g {
        Glyph::None => "",
        Glyph::Arrowhead => "M-4,-2.5 Q-1.5,-0.5 0,0 Q-1.5,0.5 -4,2.5",
        Glyph::DoubleArrowhead => "M-4,-2.5 Q-1.5,-0.5 0,0 Q-1.5,0.5 -4,2.5 M-7,-2.5 Q-4.5,-0.5 -3,0 Q-4.5,0.5 -7,2.5",
        Glyph::EqualsHead => "M-4.5,-3.5 Q-1.5,-1 0,0 Q-1.5,1 -4.5,3.5",
        Glyph::Hook => "M0,0 A2,2 0 0 1 0,-4",
        Glyph::Monotail => "M-4,-2.5 Q-1.5,-0.5 0,0 Q-1.5,0.5 -4,2.5",
        Glyph::Bar => "M0,-2.5 L0,2.5",
        Glyph::HarpoonUp => "M-4,-2.5 Q-1.5,-0.5 0,0",
        Glyph::HarpoonDown => "M0,0 Q-1.5,0.5 -4,2.5",
    }
}

struct Frame {
    ox: i64,
    oy: i64,
}

impl Frame {
    fn x(&self, v: Sp) -> String {
        format_pt((i64::from(v) + self.ox) as Sp)
    }
    fn y(&self, v: Sp) -> String {
        format_pt((i64::from(v) + self.oy) as Sp)
    }
}

fn unit(dir: (Sp, Sp)) -> (String, String) {
    let (dx, dy) = (i64::from(dir.0), i64::from(dir.1));
    let len = ((dx * dx + dy * dy) as u64).isqrt() as i64;
    (format_ratio(dx, len.max(1)), format_ratio(dy, len.max(1)))
}

fn write_item(svg: &mut String, f: &Frame, it: &PlacedItem) {
    let color = gray_color(it.gray);
    let w = format_pt(it.width);
    match it.kind {
        ItemKind::Gridline | ItemKind::Rule => {
            let _ = writeln!(
                svg,
                r#"<path d="M{},{} L{},{}" stroke="{color}" stroke-width="{w}" fill="none"/>"#,
                f.x(it.x),
                f.y(it.y),
                f.x(it.x2),
                f.y(it.y2)
            );
        }
        ItemKind::ShaftSpan => match it.shaft.unwrap_or(Shaft::Single) {
            Shaft::Double => {
                let (dx, dy) = (i64::from(it.x2) - i64::from(it.x), i64::from(it.y2) - i64::from(it.y));
                let len = ((dx * dx + dy * dy) as u64).isqrt() as i64;
                let (ox, oy) = if len == 0 {
                    (0, 0)
                } else {
                    ((-dy * i64::from(DOUBLE_OFFSET) / len) as Sp, (dx * i64::from(DOUBLE_OFFSET) / len) as Sp)
                };
                for s in [1, -1] {
                    let _ = writeln!(
                        svg,
                        r#"<path d="M{},{} L{},{}" stroke="{color}" stroke-width="{w}" fill="none"/>"#,
                        f.x(it.x + s * ox),
                        f.y(it.y + s * oy),
                        f.x(it.x2 + s * ox),
                        f.y(it.y2 + s * oy)
                    );
                }
            }
            Shaft::Equals => {
                let _ = writeln!(
                    svg,
                    r#"<text x="{}" y="{}" text-anchor="middle" dominant-baseline="central" font-size="10.000" fill="{color}">=</text>"#,
                    f.x(it.x),
                    f.y(it.y)
                );
            }
            shaft => {
                let dash = if shaft == Shaft::Dots { r#" stroke-dasharray="0.400,2.000" stroke-linecap="round""# } else { "" };
                let _ = writeln!(
                    svg,
                    r#"<path d="M{},{} L{},{}" stroke="{color}" stroke-width="{w}" fill="none"{dash}/>"#,
                    f.x(it.x),
                    f.y(it.y),
                    f.x(it.x2),
                    f.y(it.y2)
                );
            }
        },
        ItemKind::TailGlyph | ItemKind::HeadGlyph => {
            let g = it.glyph.unwrap_or(Glyph::None);
            let (ux, uy) = unit(it.dir.unwrap_or((1, 0)));
            let neg = |s: &str| match s.strip_prefix('-') {
                Some(pos) => pos.to_string(),
                None if s == "0.0000" => s.to_string(),
                None => format!("-{s}"),
            };
            let _ = writeln!(
                svg,
                r#"<path class="{}" d="{}" transform="matrix({ux} {uy} {} {ux} {} {})" stroke="{color}" stroke-width="{w}" fill="none"/>"#,
                g.name(),
                glyph_path(g),
                neg(&uy),
                f.x(it.x),
                f.y(it.y)
            );
        }
        ItemKind::Dot => {
            let _ = writeln!(svg, r#"<circle cx="{}" cy="{}" r="{w}" fill="{color}"/>"#, f.x(it.x), f.y(it.y));
        }
        ItemKind::Vertex | ItemKind::Label => {
            let b = it.size.unwrap_or_default();
            let base = if it.kind == ItemKind::Vertex { it.y } else { it.y - (b.h + b.d) / 2 + b.h };
            let anchor = match it.anchor_code {
                0 => "start",
                2 => "end",
                _ => "middle",
            };
            let transform = if it.rotation != 0 {
                format!(r#" transform="rotate({} {} {})""#, it.rotation, f.x(it.x), f.y(it.y))
            } else {
                String::new()
            };
            let _ = writeln!(
                svg,
                r#"<text x="{}" y="{}" text-anchor="{anchor}" font-size="{}" fill="{color}"{transform}>{}</text>"#,
                f.x(it.x),
                f.y(base),
                format_pt(it.font),
                escape(it.text.as_deref().unwrap_or(""))
            );
        }
    }
}

/// SVG document in pt. The view box is the item bounds grown by `pad` on
/// each side, with its top-left corner at the origin.
pub fn render_svg(drawing: &Drawing, pad: Sp) -> String {
    let (x0, y0, x1, y1) = drawing.bounds();
    let pad = i64::from(pad.max(0));
    let frame = Frame { ox: pad - x0, oy: pad - y0 };
    let w = format_pt((x1 - x0 + 2 * pad) as Sp);
    let h = format_pt((y1 - y0 + 2 * pad) as Sp);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}pt" height="{h}pt" viewBox="0 0 {w} {h}">"#
    );
    svg.push_str("<g font-family=\"serif\">\n");
    for it in &drawing.items {
        write_item(&mut svg, &frame, it);
    }
    svg.push_str("</g>\n</svg>\n");
    svg
}

/// The full structural dump of a fresh compile.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dump {
    pub version: u32,
    pub grid: Grid,
    pub boxes: Vec<VertexBox>,
    pub arrows: Vec<ArrowGeometry>,
    pub points: PointTable,
    pub bounds: (i64, i64, i64, i64),
    pub drawing: Drawing,
}

impl Dump {
    pub fn new(layout: &Layout, routed: &Routed, drawing: &Drawing) -> Self {
        Dump {
            version: SCHEMA_VERSION,
            grid: layout.grid.clone(),
            boxes: layout.boxes.clone(),
            arrows: routed.arrows.clone(),
            points: routed.points.clone(),
            bounds: drawing.bounds(),
            drawing: drawing.clone(),
        }
    }
}

/// Pretty JSON with keys sorted at every level.
pub fn render_json(dump: &Dump) -> String {
    let value = serde_json::to_value(dump).expect("dump is plain data");
    let mut text = serde_json::to_string_pretty(&value).expect("value serializes");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gray_levels() {
        assert_eq!(gray_channel(0), 0);
        assert_eq!(gray_channel(FRACTION_ONE), 255);
        assert_eq!(gray_channel(32_768), 128);
        assert_eq!(gray_color(FRACTION_ONE), "rgb(255,255,255)");
    }

    #[test]
    fn label_boxes() {
        let item = PlacedItem {
            size: Some(BoxSize { w: 10, h: 6, d: 2 }),
            anchor_code: 2,
            ..PlacedItem::at(ItemKind::Label, 100, 100)
        };
        assert_eq!(item.bbox(), (90, 96, 100, 104));
    }

    #[test]
    fn empty_drawing() {
        let d = Drawing::default();
        assert_eq!(d.bounds(), (0, 0, 0, 0));
        assert!(render_svg(&d, 5 * PT).contains(r#"viewBox="0 0 10.000 10.000""#));
    }
}
