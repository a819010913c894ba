use crate::fixedmath::Sp;
use crate::styles::{FillSpec, Param, SetMode};

/// A 1-based source position. Positions never take part in equality, so
/// two parses of differently spaced sources compare equal.
#[derive(Debug, Clone, Copy, Default, Eq, Hash, PartialOrd, Ord)]
pub struct Loc {
    pub line: usize,
    pub col: usize,
}

impl PartialEq for Loc {
    fn eq(&self, _other: &Self) -> bool {
        true
    }
}

impl Loc {
    pub fn new(line: usize, col: usize) -> Self {
        Loc { line, col }
    }
}

impl std::fmt::Display for Loc {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum DiagramKind {
    #[default]
    Diagram,
    Diag,
    Dg,
    Long,
    Graph,
}

impl DiagramKind {
    pub const ALL: [DiagramKind; 5] =
        [DiagramKind::Diagram, DiagramKind::Diag, DiagramKind::Dg, DiagramKind::Long, DiagramKind::Graph];

    pub fn name(self) -> &'static str {
        match self {
            DiagramKind::Diagram => "Diagram",
            DiagramKind::Diag => "Diag",
            DiagramKind::Dg => "Dg",
            DiagramKind::Long => "Long",
            DiagramKind::Graph => "Graph",
        }
    }

    pub fn from_name(name: &str) -> Option<DiagramKind> {
        DiagramKind::ALL.into_iter().find(|k| k.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LayoutMode {
    Flexible,
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gravitate {
    Left,
    Right,
}

/// One `name=value`, `name+=value` or `name{Cell}=value` option.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub param: Param,
    pub cell: Option<String>,
    pub mode: SetMode,
    pub value: i32,
}

impl Assignment {
    /// Sort key for the canonical option order. The grid family shares a
    /// key because `xgrid`/`ygrid` read `grid` when they are first set.
    pub fn sort_key(&self) -> (&'static str, &str) {
        let name = match self.param {
            Param::Grid | Param::Xgrid | Param::Ygrid => "grid",
            p => p.name(),
        };
        (name, self.cell.as_deref().unwrap_or(""))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Options {
    pub layout: Option<LayoutMode>,
    pub gravitate: Option<Gravitate>,
    pub rotated_labels: bool,
    pub dotted: bool,
    pub joined: bool,
    pub gridlines: bool,
    pub overgrid: bool,
    pub braced: bool,
    pub loose: bool,
    /// Stable-sorted by [`Assignment::sort_key`].
    pub assignments: Vec<Assignment>,
}

/// Canvas settings of a `Graph` diagram.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GraphSpec {
    pub width: Option<Sp>,
    pub height: Option<Sp>,
    pub xrange: Option<i32>,
    pub yrange: Option<i32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellDecl {
    pub name: String,
    pub fill: FillSpec,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DiagramAst {
    pub kind: DiagramKind,
    pub options: Options,
    pub graph: GraphSpec,
    pub new_cells: Vec<CellDecl>,
    pub rows: Vec<Vec<Cell>>,
}

impl DiagramAst {
    /// Number of columns: the longest row.
    pub fn column_count(&self) -> usize {
        self.rows.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn cell(&self, row: usize, col: usize) -> Option<&Cell> {
        self.rows.get(row).and_then(|r| r.get(col))
    }

    /// Cells in row-major order with their coordinates.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, &Cell)> {
        self.rows.iter().enumerate().flat_map(|(r, row)| row.iter().enumerate().map(move |(c, cell)| (r, c, cell)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Cell {
    Empty,
    Vertex(Vertex),
    Arrow(Arrow),
    Rule(RuleCell),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Vertex {
    pub text: String,
    pub stop: bool,
    pub nodot: bool,
    pub grav: bool,
    pub base: bool,
    /// Gray level in 16.16, when set with `\gr{..}` or `\white`.
    pub gray: Option<i32>,
    pub movements: Vec<Movement>,
    pub loc: Loc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MoveKind {
    Dl,
    Dr,
    Ml,
    Mr,
    Al,
    Ar,
    Dx,
    Mx,
    Ax,
    Dy,
    My,
}

impl MoveKind {
    /// Application order after the solver.
    pub const ORDER: [MoveKind; 11] = [
        MoveKind::Dl,
        MoveKind::Dr,
        MoveKind::Ml,
        MoveKind::Mr,
        MoveKind::Al,
        MoveKind::Ar,
        MoveKind::Dx,
        MoveKind::Mx,
        MoveKind::Ax,
        MoveKind::Dy,
        MoveKind::My,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MoveKind::Dl => "dl",
            MoveKind::Dr => "dr",
            MoveKind::Ml => "ml",
            MoveKind::Mr => "mr",
            MoveKind::Al => "al",
            MoveKind::Ar => "ar",
            MoveKind::Dx => "dx",
            MoveKind::Mx => "mx",
            MoveKind::Ax => "ax",
            MoveKind::Dy => "dy",
            MoveKind::My => "my",
        }
    }

    pub fn from_name(name: &str) -> Option<MoveKind> {
        MoveKind::ORDER.into_iter().find(|k| k.name() == name)
    }

    /// Edge-alignment kinds take no argument.
    pub fn takes_value(self) -> bool {
        matches!(self, MoveKind::Dx | MoveKind::Mx | MoveKind::Ax | MoveKind::Dy | MoveKind::My)
    }

    pub fn is_row(self) -> bool {
        matches!(self, MoveKind::Dy | MoveKind::My)
    }
}

/// Movement amount: an absolute length, or a fraction of the gap to the next line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MoveValue {
    Length(Sp),
    Fraction(i32),
    Edge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Movement {
    pub kind: MoveKind,
    pub value: MoveValue,
}

/// Direction commands: the eight compass codes plus `a` (0) and `b` (10).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DirCode {
    Compass(crate::fixedmath::Octant),
    /// From this cell to the target.
    A,
    /// From the target to this cell.
    B,
}

impl DirCode {
    pub fn code(self) -> u8 {
        match self {
            DirCode::A => 0,
            DirCode::B => 10,
            DirCode::Compass(o) => o.code(),
        }
    }

    pub fn prefix(self) -> &'static str {
        match self {
            DirCode::A => "a",
            DirCode::B => "b",
            DirCode::Compass(o) => o.name(),
        }
    }

    /// Prefixes longest first so `rd` wins over `r`.
    pub const PREFIXES: [(&'static str, DirCode); 10] = [
        ("rd", DirCode::Compass(crate::fixedmath::Octant::Rd)),
        ("ld", DirCode::Compass(crate::fixedmath::Octant::Ld)),
        ("lu", DirCode::Compass(crate::fixedmath::Octant::Lu)),
        ("ru", DirCode::Compass(crate::fixedmath::Octant::Ru)),
        ("a", DirCode::A),
        ("r", DirCode::Compass(crate::fixedmath::Octant::R)),
        ("d", DirCode::Compass(crate::fixedmath::Octant::D)),
        ("l", DirCode::Compass(crate::fixedmath::Octant::L)),
        ("u", DirCode::Compass(crate::fixedmath::Octant::U)),
        ("b", DirCode::B),
    ];

    pub fn needs_target(self) -> bool {
        matches!(self, DirCode::A | DirCode::B)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelCode {
    Lt = 0,
    Gt = 1,
    Under = 2,
    Caret = 3,
}

impl LabelCode {
    pub fn symbol(self) -> char {
        match self {
            LabelCode::Lt => '<',
            LabelCode::Gt => '>',
            LabelCode::Under => '_',
            LabelCode::Caret => '^',
        }
    }

    pub fn from_symbol(c: char) -> Option<LabelCode> {
        match c {
            '<' => Some(LabelCode::Lt),
            '>' => Some(LabelCode::Gt),
            '_' => Some(LabelCode::Under),
            '^' => Some(LabelCode::Caret),
            _ => None,
        }
    }

    pub fn code(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Label {
    pub code: LabelCode,
    pub text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Slide {
    pub point: Option<i32>,
    pub offx: Option<Sp>,
    pub offy: Option<Sp>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Target {
    /// Columns rightward and rows upward from the arrow's cell. In a
    /// `Graph` these are absolute canvas coordinates instead; both parts
    /// are 16.16 fixed point.
    Offset { x: i32, y: i32 },
    /// A named point registered by an earlier arrow.
    Point(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum JoinSpec {
    #[default]
    None,
    Tail,
    Head,
    Both,
}

impl JoinSpec {
    pub fn tail(self) -> bool {
        matches!(self, JoinSpec::Tail | JoinSpec::Both)
    }
    pub fn head(self) -> bool {
        matches!(self, JoinSpec::Head | JoinSpec::Both)
    }
    pub fn with_tail(self) -> JoinSpec {
        if self.head() {
            JoinSpec::Both
        } else {
            JoinSpec::Tail
        }
    }
    pub fn with_head(self) -> JoinSpec {
        if self.tail() {
            JoinSpec::Both
        } else {
            JoinSpec::Head
        }
    }
}

/// Width-stretch mode selected per arrow with `\db`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpanMode {
    /// Use the diagram's alternate mode (braced when loose, loose when braced).
    Alternate,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ArrowMods {
    pub hx: Option<Sp>,
    pub hy: Option<Sp>,
    pub tx: Option<Sp>,
    pub ty: Option<Sp>,
    pub fx: Option<Sp>,
    pub fy: Option<Sp>,
    pub lw: Option<Sp>,
    pub rw: Option<Sp>,
    pub nowidth: bool,
    pub brk: bool,
    /// `None` inherits the diagram's `joined` flag.
    pub join: Option<JoinSpec>,
    pub point: Option<(String, Option<i32>)>,
    pub span_mode: Option<SpanMode>,
    pub gray: Option<i32>,
    pub nodot: bool,
    /// Recognized but unimplemented modifiers, kept verbatim.
    pub ignored: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arrow {
    pub dir: DirCode,
    pub style: String,
    pub labels: Vec<Label>,
    pub target: Option<Target>,
    pub slide: Option<Slide>,
    pub mods: ArrowMods,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleCell {
    pub dir: DirCode,
    pub target: Option<Target>,
    pub mods: ArrowMods,
    pub loc: Loc,
}
