use std::fmt::Write;

use crate::units::{format_fraction, format_length};

use super::ast::*;

/// Deterministic text form of a diagram. Parsing the result yields an equal AST.
pub fn canonicalize(ast: &DiagramAst) -> String {
    let mut out = String::new();
    out.push('\\');
    out.push_str(ast.kind.name());
    let opts = option_items(ast);
    let rows: Vec<String> = ast.rows.iter().map(|row| row.iter().map(cell).collect::<Vec<_>>().join(" & ")).collect();
    // A body opening with `[` would read as the option block.
    let bracket = ast.new_cells.is_empty() && rows.first().is_some_and(|r| r.starts_with('['));
    if !opts.is_empty() || bracket {
        let _ = write!(out, "[{}]", opts.join(","));
    }
    out.push('\n');
    for decl in &ast.new_cells {
        let _ = writeln!(out, "\\newcell{{{}}}{{{}}}", decl.name, decl.fill);
    }
    out.push_str(&rows.join(" \\\\\n"));
    // A lone trailing empty row is dropped by the parser; keep it with an extra separator.
    if ast.rows.last().is_some_and(|r| r.len() == 1 && r[0] == Cell::Empty) {
        out.push_str(" \\\\");
    }
    out.push('\n');
    out
}

fn option_items(ast: &DiagramAst) -> Vec<String> {
    let o = &ast.options;
    let mut items = Vec::new();
    match o.layout {
        Some(LayoutMode::Flexible) => items.push("flexible".to_string()),
        Some(LayoutMode::Fixed) => items.push("fixed".to_string()),
        None => {}
    }
    match o.gravitate {
        Some(Gravitate::Left) => items.push("gravitateleft".to_string()),
        Some(Gravitate::Right) => items.push("gravitateright".to_string()),
        None => {}
    }
    for (on, name) in [
        (o.rotated_labels, "rotatedlabels"),
        (o.dotted, "dotted"),
        (o.joined, "joined"),
        (o.gridlines, "gridlines"),
        (o.overgrid, "overgrid"),
        (o.braced, "braced"),
        (o.loose, "loose"),
    ] {
        if on {
            items.push(name.to_string());
        }
    }
    let g = &ast.graph;
    if let Some(v) = g.width {
        items.push(format!("width={}", format_length(v)));
    }
    if let Some(v) = g.height {
        items.push(format!("height={}", format_length(v)));
    }
    if let Some(v) = g.xrange {
        items.push(format!("xrange={v}"));
    }
    if let Some(v) = g.yrange {
        items.push(format!("yrange={v}"));
    }
    for a in &o.assignments {
        let key = match &a.cell {
            Some(c) => format!("{}{{{c}}}", a.param.name()),
            None => a.param.name().to_string(),
        };
        let op = match a.mode {
            crate::styles::SetMode::Absolute => "=",
            crate::styles::SetMode::Relative => "+=",
        };
        items.push(format!("{key}{op}{}", a.param.quantity(a.value)));
    }
    items
}

fn cell(c: &Cell) -> String {
    match c {
        Cell::Empty => String::new(),
        Cell::Vertex(v) => vertex(v),
        Cell::Arrow(a) => {
            let mut s = format!("\\{}{}", a.dir.prefix(), a.style);
            for l in &a.labels {
                let _ = write!(s, "{}{{{}}}", l.code.symbol(), l.text);
            }
            if let Some(t) = &a.target {
                s.push_str(&target(t));
            }
            if let Some(sl) = &a.slide {
                let opt = |v: Option<i32>, f: fn(i32) -> String| v.map(f).unwrap_or_default();
                let _ = write!(
                    s,
                    ":{{{};{},{}}}",
                    opt(sl.point, format_fraction),
                    opt(sl.offx, format_length),
                    opt(sl.offy, format_length)
                );
            }
            mods(&mut s, &a.mods);
            s
        }
        Cell::Rule(r) => {
            let mut s = format!("\\{}{}", r.dir.prefix(), crate::styles::RULE_CELL);
            if let Some(t) = &r.target {
                s.push_str(&target(t));
            }
            mods(&mut s, &r.mods);
            s
        }
    }
}

fn target(t: &Target) -> String {
    match t {
        Target::Offset { x, y } => format!("({},{})", format_fraction(*x), format_fraction(*y)),
        Target::Point(name) => format!("({name})"),
    }
}

fn mods(s: &mut String, m: &ArrowMods) {
    for (name, v) in [("hx", m.hx), ("hy", m.hy), ("tx", m.tx), ("ty", m.ty), ("fx", m.fx), ("fy", m.fy), ("lw", m.lw), ("rw", m.rw)] {
        if let Some(v) = v {
            let _ = write!(s, "\\{name}{{{}}}", format_length(v));
        }
    }
    if m.nowidth {
        s.push_str("\\nw");
    }
    if m.brk {
        s.push_str("\\br");
    }
    if m.nodot {
        s.push_str("\\nodot");
    }
    match m.join {
        None => {}
        Some(JoinSpec::None) => s.push_str("\\jn"),
        Some(JoinSpec::Tail) => s.push_str("\\jt"),
        Some(JoinSpec::Head) => s.push_str("\\jh"),
        Some(JoinSpec::Both) => s.push_str("\\joined"),
    }
    if let Some((name, frac)) = &m.point {
        let _ = write!(s, "\\pt{{{name}}}");
        if let Some(f) = frac {
            let _ = write!(s, "{{{}}}", format_fraction(*f));
        }
    }
    if m.span_mode.is_some() {
        s.push_str("\\db");
    }
    if let Some(g) = m.gray {
        let _ = write!(s, "\\gr{{{}}}", format_fraction(g));
    }
    for raw in &m.ignored {
        s.push_str(raw);
    }
}

fn vertex(v: &Vertex) -> String {
    let mut cmds = String::new();
    for (on, name) in [(v.stop, "\\stop"), (v.nodot, "\\nodot"), (v.grav, "\\grav"), (v.base, "\\base")] {
        if on {
            cmds.push_str(name);
        }
    }
    if let Some(g) = v.gray {
        let _ = write!(cmds, "\\gr{{{}}}", format_fraction(g));
    }
    for m in &v.movements {
        let _ = write!(cmds, "\\{}", m.kind.name());
        match m.value {
            MoveValue::Length(l) => {
                let _ = write!(cmds, "{{{}}}", format_length(l));
            }
            MoveValue::Fraction(f) => {
                let _ = write!(cmds, "{{{}}}", format_fraction(f));
            }
            MoveValue::Edge => {}
        }
    }
    match (cmds.is_empty(), v.text.is_empty()) {
        (true, _) => v.text.clone(),
        (false, true) => cmds,
        (false, false) => format!("{cmds} {}", v.text),
    }
}
