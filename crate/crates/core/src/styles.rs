//! Cell types, arrow fills and the additive parameter registry.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fixedmath::Sp;
use crate::units::{self, Quantity, UnitError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StyleError {
    #[error("unknown parameter `{0}`")]
    UnknownParam(String),
    #[error("parameter `{0}` has no per-cell value")]
    NotPerCell(String),
    #[error("cell `{name}` is already registered (as {prior})")]
    DuplicateCell { name: String, prior: String },
    #[error("invalid cell name `{0}` (expected a capitalized identifier)")]
    InvalidCellName(String),
    #[error("unknown cell type `{0}`")]
    UnknownCell(String),
    #[error("unknown fill part `{0}`")]
    UnknownFillPart(String),
    #[error(transparent)]
    Unit(#[from] UnitError),
}

/// Glyphs a fill can put at either end of its shaft.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Glyph {
    None,
    Arrowhead,
    DoubleArrowhead,
    Hook,
    Monotail,
    Bar,
    EqualsHead,
    HarpoonUp,
    HarpoonDown,
}

impl Glyph {
    pub const ALL: [Glyph; 9] = [
        Glyph::None,
        Glyph::Arrowhead,
        Glyph::DoubleArrowhead,
        Glyph::Hook,
        Glyph::Monotail,
        Glyph::Bar,
        Glyph::EqualsHead,
        Glyph::HarpoonUp,
        Glyph::HarpoonDown,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Glyph::None => "none",
            Glyph::Arrowhead => "arrowhead",
            Glyph::DoubleArrowhead => "double-arrowhead",
            Glyph::Hook => "hook",
            Glyph::Monotail => "monotail",
            Glyph::Bar => "bar",
            Glyph::EqualsHead => "equals-head",
            Glyph::HarpoonUp => "harpoon-up",
            Glyph::HarpoonDown => "harpoon-down",
        }
    }
}

impl FromStr for Glyph {
    type Err = StyleError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Glyph::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| StyleError::UnknownFillPart(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shaft {
    Single,
    Double,
    Dots,
    None,
    /// A single centered `=` that does not stretch with the arrow.
    Equals,
}

impl Shaft {
    pub const ALL: [Shaft; 5] = [Shaft::Single, Shaft::Double, Shaft::Dots, Shaft::None, Shaft::Equals];

    pub fn name(self) -> &'static str {
        match self {
            Shaft::Single => "single",
            Shaft::Double => "double",
            Shaft::Dots => "dots",
            Shaft::None => "none",
            Shaft::Equals => "equals",
        }
    }
}

impl FromStr for Shaft {
    type Err = StyleError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Shaft::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| StyleError::UnknownFillPart(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FillSpec {
    pub tail: Glyph,
    pub shaft: Shaft,
    pub head: Glyph,
}

impl FillSpec {
    pub const fn new(tail: Glyph, shaft: Shaft, head: Glyph) -> Self {
        FillSpec { tail, shaft, head }
    }

    pub fn is_invisible(&self) -> bool {
        self.tail == Glyph::None && self.head == Glyph::None && self.shaft == Shaft::None
    }
}

impl fmt::Display for FillSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.tail.name(), self.shaft.name(), self.head.name())
    }
}

impl FromStr for FillSpec {
    type Err = StyleError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        match parts.as_slice() {
            [tail, shaft, head] => Ok(FillSpec { tail: tail.parse()?, shaft: shaft.parse()?, head: head.parse()? }),
            _ => Err(StyleError::UnknownFillPart(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKind {
    Length,
    Fraction,
    Integer,
}

macro_rules! params {
    ($( $variant:ident => $name:literal, $kind:ident, $per_cell:literal; )*) => {
        /// Every tunable parameter the engine knows.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum Param { $($variant,)* }

        impl Param {
            pub const ALL: &'static [Param] = &[$(Param::$variant,)*];

            pub fn name(self) -> &'static str {
                match self { $(Param::$variant => $name,)* }
            }

            pub fn kind(self) -> ParamKind {
                match self { $(Param::$variant => ParamKind::$kind,)* }
            }

            /// Whether the parameter has per-cell additive overrides.
            pub fn per_cell(self) -> bool {
                match self { $(Param::$variant => $per_cell,)* }
            }
        }
    };
}

params! {
    Grid => "grid", Length, false;
    Xgrid => "xgrid", Length, false;
    Ygrid => "ygrid", Length, false;
    Range => "range", Integer, false;
    DiagramPad => "Diagrampad", Length, false;
    FigurePad => "Figurepad", Length, false;
    GraphPad => "Graphpad", Length, false;
    Vpad => "vpad", Length, false;
    Hpad => "hpad", Length, false;
    GridGray => "gridgray", Fraction, false;
    FrameGray => "framegray", Fraction, false;
    ShadeGray => "shadegray", Fraction, false;
    GrayGray => "graygray", Fraction, false;
    FramePad => "framepad", Length, false;
    FrameRuleWidth => "framerulewidth", Length, false;
    OuterFrameRuleWidth => "Framerulewidth", Length, false;
    RuleWidth => "Rulewidth", Length, false;
    CellLength => "celllength", Length, false;
    CellWidth => "cellwidth", Length, false;
    ColumnDist => "columndist", Length, false;
    BraceWidth => "bracewidth", Length, false;
    MinimumCellLength => "MinimumCellLength", Length, false;
    LabelPoint => "labelpoint", Fraction, true;
    PtPoint => "ptpoint", Fraction, true;
    LabelWidthPad => "labelwidthpad", Length, true;
    LabelPad => "labelpad", Length, true;
    BreakPad => "breakpad", Length, true;
    CellPush => "cellpush", Length, true;
    PtPush => "ptpush", Length, true;
    AtPush => "atpush", Length, true;
    JoinPush => "joinpush", Length, true;
}

impl Param {
    pub fn lookup(name: &str) -> Result<Param, StyleError> {
        Param::ALL
            .iter()
            .copied()
            .find(|p| p.name() == name)
            .ok_or_else(|| StyleError::UnknownParam(name.to_string()))
    }

    /// Parses a value of this parameter's kind.
    pub fn parse_value(self, text: &str) -> Result<i32, UnitError> {
        match self.kind() {
            ParamKind::Length => units::parse_length(text),
            ParamKind::Fraction => units::parse_fraction(text),
            ParamKind::Integer => units::parse_integer(text),
        }
    }

    pub fn quantity(self, raw: i32) -> Quantity {
        match self.kind() {
            ParamKind::Length => Quantity::Length(raw),
            ParamKind::Fraction => Quantity::Fraction(raw),
            ParamKind::Integer => Quantity::Integer(raw),
        }
    }

    fn default_text(self) -> Option<&'static str> {
        Some(match self {
            Param::Grid => "1cm",
            Param::Xgrid | Param::Ygrid => return None,
            Param::Range => "1",
            Param::DiagramPad => "5pt",
            Param::FigurePad | Param::GraphPad | Param::Vpad | Param::Hpad => "0pt",
            Param::GridGray | Param::GrayGray => ".5",
            Param::FrameGray | Param::ShadeGray => "0",
            Param::FramePad => "5pt",
            Param::FrameRuleWidth | Param::OuterFrameRuleWidth => ".4pt",
            Param::RuleWidth => "5pt",
            Param::CellLength | Param::CellWidth | Param::BraceWidth => "1cm",
            Param::ColumnDist => "15mm",
            Param::MinimumCellLength => "0pt",
            Param::LabelPoint | Param::PtPoint => ".5",
            Param::LabelWidthPad => "5pt",
            Param::LabelPad => "3pt",
            Param::BreakPad => "2.5pt",
            Param::CellPush => "2pt",
            Param::PtPush => "0pt",
            Param::AtPush => "3pt",
            Param::JoinPush => "-1pt",
        })
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How a parameter update combines with the current value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SetMode {
    Absolute,
    Relative,
}

/// A registered cell type: its fill and its per-cell parameter overrides.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellStyle {
    pub name: String,
    pub fill: FillSpec,
    /// Whether arrows of this type are drawn; Fillcell/Boxcell only carry parameters.
    pub drawable: bool,
    pub overrides: BTreeMap<Param, i32>,
    pub origin: String,
}

impl CellStyle {
    fn new(name: &str, fill: FillSpec, origin: &str) -> Self {
        CellStyle {
            name: name.to_string(),
            fill,
            drawable: true,
            overrides: BTreeMap::new(),
            origin: origin.to_string(),
        }
    }
}

/// Cell catalog plus the global and per-cell parameter tables.
///
/// Effective values are additive: `global + per_cell`, where a missing
/// per-cell entry counts as zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StyleRegistry {
    globals: BTreeMap<Param, i32>,
    cells: BTreeMap<String, CellStyle>,
}

/// Name of the thick-bar cell type.
pub const RULE_CELL: &str = "Rule";

pub fn is_valid_cell_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_uppercase()) && chars.all(|c| c.is_ascii_alphabetic())
}

impl StyleRegistry {
    /// A registry holding only the global defaults and no cell types.
    pub fn empty() -> Self {
        let globals = Param::ALL
            .iter()
            .filter_map(|&p| {
                p.default_text().map(|t| (p, p.parse_value(t).expect("default parameter values parse")))
            })
            .collect();
        StyleRegistry { globals, cells: BTreeMap::new() }
    }

    /// The built-in catalog: every standard cell type with its overrides.
    pub fn builtin() -> Self {
        use Glyph as G;
        use Shaft as S;
        let mut reg = StyleRegistry::empty();
        let single = |tail, head| FillSpec::new(tail, S::Single, head);
        let table: [(&str, FillSpec); 14] = [
            ("To", single(G::None, G::Arrowhead)),
            ("One", single(G::None, G::Arrowhead)),
            ("Bij", single(G::Arrowhead, G::Arrowhead)),
            ("Mapsto", single(G::Bar, G::Arrowhead)),
            ("Into", single(G::Hook, G::Arrowhead)),
            ("Epi", single(G::None, G::DoubleArrowhead)),
            ("Line", single(G::None, G::None)),
            ("Nul", FillSpec::new(G::None, S::None, G::None)),
            ("Dots", FillSpec::new(G::None, S::Dots, G::None)),
            ("Two", FillSpec::new(G::None, S::Double, G::EqualsHead)),
            ("Impl", FillSpec::new(G::None, S::Double, G::EqualsHead)),
            ("Bar", FillSpec::new(G::None, S::Double, G::None)),
            ("Null", FillSpec::new(G::None, S::None, G::None)),
            ("Eq", FillSpec::new(G::None, S::Equals, G::None)),
        ];
        for (name, fill) in table {
            reg.cells.insert(name.to_string(), CellStyle::new(name, fill, "builtin"));
        }
        let point_eight = units::parse_length(".8pt").expect("literal");
        for name in ["Two", "Impl", "Bar", "Null", "Eq"] {
            let cell = reg.cells.get_mut(name).expect("registered above");
            for p in [Param::LabelPad, Param::AtPush, Param::BreakPad] {
                cell.overrides.insert(p, point_eight);
            }
        }
        let mut rule = CellStyle::new(RULE_CELL, FillSpec::new(G::None, S::None, G::None), "builtin");
        for p in [Param::CellPush, Param::PtPush, Param::JoinPush] {
            rule.overrides.insert(p, crate::fixedmath::PT);
        }
        reg.cells.insert(RULE_CELL.to_string(), rule);
        for name in ["Fillcell", "Boxcell"] {
            let mut cell = CellStyle::new(name, FillSpec::new(G::None, S::None, G::None), "builtin");
            cell.drawable = false;
            reg.cells.insert(name.to_string(), cell);
        }
        reg
    }

    /// Registers a new cell type. Fails without touching the registry on duplicates.
    pub fn register_cell(&mut self, name: &str, fill: FillSpec) -> Result<(), StyleError> {
        self.register_cell_from(name, fill, "user")
    }

    pub fn register_cell_from(&mut self, name: &str, fill: FillSpec, origin: &str) -> Result<(), StyleError> {
        if let Some(prior) = self.cells.get(name) {
            return Err(StyleError::DuplicateCell {
                name: name.to_string(),
                prior: format!("{} registration, fill {}", prior.origin, prior.fill),
            });
        }
        if !is_valid_cell_name(name) {
            return Err(StyleError::InvalidCellName(name.to_string()));
        }
        self.cells.insert(name.to_string(), CellStyle::new(name, fill, origin));
        Ok(())
    }

    pub fn cell(&self, name: &str) -> Option<&CellStyle> {
        self.cells.get(name)
    }

    pub fn cells(&self) -> impl Iterator<Item = &CellStyle> {
        self.cells.values()
    }

    /// Global value of a parameter. `xgrid`/`ygrid` fall back to `grid`.
    pub fn global(&self, param: Param) -> i32 {
        match self.globals.get(&param) {
            Some(&v) => v,
            None => match param {
                Param::Xgrid | Param::Ygrid => self.global(Param::Grid),
                _ => 0,
            },
        }
    }

    /// Whether `xgrid`/`ygrid` carry their own value rather than inheriting.
    pub fn is_set(&self, param: Param) -> bool {
        self.globals.contains_key(&param)
    }

    pub fn per_cell(&self, param: Param, cell: &str) -> i32 {
        self.cells.get(cell).and_then(|c| c.overrides.get(&param)).copied().unwrap_or(0)
    }

    /// `global + per_cell` for the given cell type.
    pub fn effective(&self, param: Param, cell: &str) -> i32 {
        self.global(param).saturating_add(self.per_cell(param, cell))
    }

    pub fn quantity(&self, param: Param) -> Quantity {
        param.quantity(self.global(param))
    }

    /// Updates a global (`cell = None`) or per-cell value.
    pub fn set_param(&mut self, param: Param, cell: Option<&str>, value: i32, mode: SetMode) -> Result<(), StyleError> {
        match cell {
            None => {
                let current = self.global(param);
                let next = match mode {
                    SetMode::Absolute => value,
                    SetMode::Relative => current.saturating_add(value),
                };
                self.globals.insert(param, next);
            }
            Some(name) => {
                if !param.per_cell() {
                    return Err(StyleError::NotPerCell(param.name().to_string()));
                }
                let style = self.cells.get_mut(name).ok_or_else(|| StyleError::UnknownCell(name.to_string()))?;
                let current = style.overrides.get(&param).copied().unwrap_or(0);
                let next = match mode {
                    SetMode::Absolute => value,
                    SetMode::Relative => current.saturating_add(value),
                };
                style.overrides.insert(param, next);
            }
        }
        Ok(())
    }

    /// Parses `text` in the parameter's unit and applies it.
    pub fn set_param_text(&mut self, name: &str, cell: Option<&str>, text: &str, mode: SetMode) -> Result<(), StyleError> {
        let param = Param::lookup(name)?;
        let value = param.parse_value(text)?;
        self.set_param(param, cell, value, mode)
    }
}

impl Default for StyleRegistry {
    fn default() -> Self {
        StyleRegistry::builtin()
    }
}

/// Which text style a box is measured in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TextContext {
    Vertex,
    Label,
}

impl TextContext {
    pub fn name(self) -> &'static str {
        match self {
            TextContext::Vertex => "vertexstyle",
            TextContext::Label => "labelstyle",
        }
    }
}

/// A measured box: width, height above the baseline, depth below it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct BoxSize {
    pub w: Sp,
    pub h: Sp,
    pub d: Sp,
}

impl BoxSize {
    pub fn is_empty(&self) -> bool {
        self.w == 0 && self.h == 0 && self.d == 0
    }
}

/// Text measurement used for vertices and labels.
pub trait Metrics: Send + Sync {
    fn measure(&self, text: &str, context: TextContext) -> BoxSize;

    /// Stable description of the model, mixed into cache digests.
    fn fingerprint(&self) -> String;
}

/// Width = half an em per character, height .7em, depth .2em.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmMetrics {
    pub vertex_em: Sp,
    pub label_em: Sp,
}

impl Default for EmMetrics {
    fn default() -> Self {
        EmMetrics { vertex_em: 10 * crate::fixedmath::PT, label_em: 7 * crate::fixedmath::PT }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("metrics file line {line}: {message}")]
pub struct MetricsFileError {
    pub line: usize,
    pub message: String,
}

impl EmMetrics {
    pub fn em(&self, context: TextContext) -> Sp {
        match context {
            TextContext::Vertex => self.vertex_em,
            TextContext::Label => self.label_em,
        }
    }

    /// Reads `em <context> <pt-value>` lines on top of the defaults.
    /// Blank lines and lines starting with `#` or `%` are skipped.
    pub fn from_metrics_file(text: &str) -> Result<EmMetrics, MetricsFileError> {
        let mut m = EmMetrics::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with('%') {
                continue;
            }
            let err = |message: String| MetricsFileError { line: i + 1, message };
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [keyword, context, value] = fields.as_slice() else {
                return Err(err(format!("expected `em <context> <pt-value>`, got `{line}`")));
            };
            if *keyword != "em" {
                return Err(err(format!("unknown directive `{keyword}`")));
            }
            let length = if value.ends_with("pt") || value.ends_with("sp") || value.ends_with("mm") || value.ends_with("cm") {
                units::parse_length(value)
            } else {
                units::parse_length(&format!("{value}pt"))
            }
            .map_err(|e| err(e.to_string()))?;
            if length < 0 {
                return Err(err("em must not be negative".to_string()));
            }
            match *context {
                "vertexstyle" | "vertex" => m.vertex_em = length,
                "labelstyle" | "label" => m.label_em = length,
                other => return Err(err(format!("unknown context `{other}`"))),
            }
        }
        Ok(m)
    }
}

impl Metrics for EmMetrics {
    fn measure(&self, text: &str, context: TextContext) -> BoxSize {
        let n = text.chars().count() as i64;
        if n == 0 {
            return BoxSize::default();
        }
        let em = i64::from(self.em(context));
        let clamp = |v: i64| v.min(i64::from(i32::MAX)) as i32;
        BoxSize { w: clamp(n * em / 2), h: clamp(em * 7 / 10), d: clamp(em * 2 / 10) }
    }

    fn fingerprint(&self) -> String {
        format!("em-metrics vertex={} label={}", self.vertex_em, self.label_em)
    }
}
