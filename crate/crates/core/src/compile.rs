//! Source to drawing: parse, resolve settings, lay out, route, draw.

use crate::dsl::{self, Cell, Code, DiagramAst, Diagnostic, Diagnostics, Loc};
use crate::fixedmath::Sp;
use crate::layout::{self, Layout};
use crate::render::{self, Drawing, Dump};
use crate::router::{self, Routed};
use crate::settings::{CompileOptions, Settings};
use crate::styles::{Metrics, Param, StyleError};

/// A parsed diagram with its resolved settings.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub ast: DiagramAst,
    pub settings: Settings,
    pub warnings: Vec<Diagnostic>,
}

#[derive(Debug, Clone)]
pub struct Compiled {
    pub ast: DiagramAst,
    pub settings: Settings,
    pub layout: Layout,
    pub routed: Routed,
    pub drawing: Drawing,
    pub warnings: Vec<Diagnostic>,
}

impl Compiled {
    pub fn svg(&self) -> String {
        render::render_svg(&self.drawing, self.settings.global(Param::DiagramPad))
    }

    pub fn dump(&self) -> Dump {
        Dump::new(&self.layout, &self.routed, &self.drawing)
    }

    pub fn json(&self) -> String {
        render::render_json(&self.dump())
    }
}

fn style_diagnostic(e: &StyleError, loc: Loc) -> Diagnostic {
    let code = match e {
        StyleError::UnknownParam(_) | StyleError::NotPerCell(_) => Code::UnknownOption,
        StyleError::DuplicateCell { .. } => Code::DuplicateCell,
        StyleError::UnknownCell(_) => Code::UnknownCellType,
        StyleError::Unit(_) => Code::MalformedLength,
        StyleError::InvalidCellName(_) | StyleError::UnknownFillPart(_) => Code::MalformedArgument,
    };
    Diagnostic::new(code, loc, e.to_string())
}

/// Parses and resolves settings, checking every arrow names a known cell type.
pub fn prepare(source: &str, options: &CompileOptions) -> Result<Prepared, Diagnostics> {
    let out = dsl::parse_full(source)?;
    let ast = out.ast;
    let settings = options.resolve(&ast).map_err(|e| Diagnostics(vec![style_diagnostic(&e, Loc::new(1, 1))]))?;
    let unknown: Vec<Diagnostic> = ast
        .cells()
        .filter_map(|(_, _, cell)| match cell {
            Cell::Arrow(a) if settings.registry.cell(&a.style).is_none() => {
                Some(Diagnostic::new(Code::UnknownCellType, a.loc, format!("unknown cell type `{}`", a.style)))
            }
            _ => None,
        })
        .collect();
    if !unknown.is_empty() {
        return Err(Diagnostics(unknown));
    }
    Ok(Prepared { ast, settings, warnings: out.warnings })
}

/// Lays out, routes and draws a prepared diagram.
pub fn compile_prepared(p: Prepared, metrics: &dyn Metrics) -> Result<Compiled, Diagnostics> {
    let Prepared { ast, settings, mut warnings } = p;
    let layout = layout::layout(&ast, &settings, metrics);
    warnings.extend(layout.warnings.iter().cloned());
    let routed = router::route(&ast, &layout, &settings, metrics);
    let (errors, routing_warnings): (Vec<_>, Vec<_>) = routed.diagnostics.iter().cloned().partition(Diagnostic::is_error);
    if !errors.is_empty() {
        return Err(Diagnostics(errors));
    }
    warnings.extend(routing_warnings);
    let drawing = render::draw(&ast, &settings, &layout, &routed);
    Ok(Compiled { ast, settings, layout, routed, drawing, warnings })
}

pub fn compile(source: &str, options: &CompileOptions, metrics: &dyn Metrics) -> Result<Compiled, Diagnostics> {
    compile_prepared(prepare(source, options)?, metrics)
}

/// Compiles straight to SVG text.
pub fn compile_svg(source: &str, options: &CompileOptions, metrics: &dyn Metrics) -> Result<String, Diagnostics> {
    compile(source, options, metrics).map(|c| c.svg())
}

/// The padding the SVG view box adds around a diagram.
pub fn diagram_pad(settings: &Settings) -> Sp {
    settings.global(Param::DiagramPad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::render::ItemKind;
    use crate::styles::EmMetrics;

    fn run(src: &str) -> Result<Compiled, Diagnostics> {
        compile(src, &CompileOptions::default(), &EmMetrics::default())
    }

    #[test]
    fn square() {
        let c = run(r"A & \rTo & B \\ \dTo & & \dTo \\ C & \rTo & D").unwrap();
        assert_eq!(c.routed.arrows.len(), 4);
        assert!(c.routed.arrows.iter().all(|a| a.us > 0));
        let heads = c.drawing.items.iter().filter(|i| i.kind == ItemKind::HeadGlyph).count();
        assert_eq!(heads, 4);
        assert_eq!(c.svg(), run(r"A&\rTo&B\\\dTo&&\dTo\\C&\rTo&D").unwrap().svg());
    }

    #[test]
    fn unknown_style_is_reported() {
        let err = run(r"A & \rFoo & B").unwrap_err();
        assert_eq!(err.0[0].code, Code::UnknownCellType);
    }

    #[test]
    fn empty_diagram() {
        let c = run("").unwrap();
        assert!(c.drawing.items.is_empty());
        assert_eq!((c.drawing.width, c.drawing.height), (0, 0));
    }
}
