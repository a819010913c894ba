use crate::styles::{FillSpec, Param, SetMode};
use crate::units;

use super::ast::*;
use super::diag::{Code, Diagnostic, Diagnostics};

/// Modifiers the engine accepts inside arrow cells but this compiler does not implement.
pub const IGNORED_MODIFIERS: [&str; 23] = [
    "dh", "dt", "up", "rt", "mv", "nl", "ru", "rr", "rm", "ro", "fd", "rl", "pp", "ts", "hs", "fs", "tr", "hr", "fr",
    "tl", "hd", "pl", "pd",
];

/// A successful parse together with its warnings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseOutput {
    pub ast: DiagramAst,
    pub warnings: Vec<Diagnostic>,
}

/// Parses diagram source, discarding warnings.
pub fn parse(source: &str) -> Result<DiagramAst, Diagnostics> {
    parse_full(source).map(|out| out.ast)
}

/// Parses diagram source. On failure every error found is returned, along
/// with any warnings collected up to that point.
pub fn parse_full(source: &str) -> Result<ParseOutput, Diagnostics> {
    let stripped = strip_comments(source);
    let lines = LineIndex::new(source);
    if let Some(d) = check_braces(&stripped, &lines) {
        return Err(Diagnostics(vec![d]));
    }
    let mut p = Parser { src: &stripped, lines: &lines, diags: Vec::new() };
    let mut ast = DiagramAst::default();
    let body_start = p.header(&mut ast);
    ast.rows = p.body(body_start);
    if p.diags.iter().any(Diagnostic::is_error) {
        return Err(Diagnostics(p.diags));
    }
    Ok(ParseOutput { ast, warnings: p.diags })
}

/// Blanks `%` comments byte for byte so offsets still match the original text.
fn strip_comments(source: &str) -> String {
    let mut out = String::with_capacity(source.len());
    let mut chars = source.chars();
    while let Some(c) = chars.next() {
        match c {
            '\\' => {
                out.push(c);
                if let Some(n) = chars.next() {
                    out.push(n);
                }
            }
            '%' => {
                out.push(' ');
                for n in chars.by_ref() {
                    if n == '\n' {
                        out.push('\n');
                        break;
                    }
                    out.extend(std::iter::repeat(' ').take(n.len_utf8()));
                }
            }
            _ => out.push(c),
        }
    }
    out
}

struct LineIndex<'a> {
    text: &'a str,
    starts: Vec<usize>,
}

impl<'a> LineIndex<'a> {
    fn new(text: &'a str) -> Self {
        let mut starts = vec![0];
        starts.extend(text.match_indices('\n').map(|(i, _)| i + 1));
        LineIndex { text, starts }
    }

    fn loc(&self, offset: usize) -> Loc {
        let line = self.starts.partition_point(|&s| s <= offset) - 1;
        let start = self.starts[line];
        let end = offset.min(self.text.len());
        let col = self.text.get(start..end).map_or(end - start, |s| s.chars().count());
        Loc::new(line + 1, col + 1)
    }
}

fn check_braces(src: &str, lines: &LineIndex) -> Option<Diagnostic> {
    let mut open = Vec::new();
    let mut it = src.char_indices();
    while let Some((i, c)) = it.next() {
        match c {
            '\\' => {
                it.next();
            }
            '{' => open.push(i),
            '}' => {
                if open.pop().is_none() {
                    return Some(Diagnostic::new(Code::UnbalancedBraces, lines.loc(i), "unmatched `}`"));
                }
            }
            _ => {}
        }
    }
    open.pop().map(|i| Diagnostic::new(Code::UnbalancedBraces, lines.loc(i), "unclosed `{`"))
}

/// A position within `src[..end]`.
#[derive(Clone, Copy)]
struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    end: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..self.end].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn at_end(&self) -> bool {
        self.pos >= self.end
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.bump();
        }
    }

    /// Reads `\name` (letters) or a control symbol such as `\,`.
    fn command(&mut self) -> Option<&'a str> {
        if self.peek() != Some('\\') {
            return None;
        }
        let start = self.pos + 1;
        let rest = &self.src[start..self.end];
        let letters = rest.bytes().take_while(u8::is_ascii_alphabetic).count();
        // A lone trailing backslash still consumes input, as an empty name.
        let len = if letters > 0 { letters } else { rest.chars().next().map_or(0, char::len_utf8) };
        self.pos = start + len;
        Some(&self.src[start..start + len])
    }

    fn peek_command(&self) -> Option<&'a str> {
        let mut c = *self;
        c.command()
    }

    /// Reads a `{...}` group and returns the inner text. Braces are known balanced.
    fn group(&mut self) -> Option<&'a str> {
        self.delimited('{', '}')
    }

    /// Reads `open ... close` with nesting of the same pair and of braces.
    fn delimited(&mut self, open: char, close: char) -> Option<&'a str> {
        if self.peek() != Some(open) {
            return None;
        }
        let save = self.pos;
        self.bump();
        let start = self.pos;
        let mut depth = 0usize;
        let mut braces = 0usize;
        while let Some(c) = self.peek() {
            match c {
                '\\' => {
                    self.bump();
                    self.bump();
                    continue;
                }
                '{' if open != '{' => braces += 1,
                '}' if open != '{' => braces = braces.saturating_sub(1),
                c if c == open => depth += 1,
                c if c == close && braces == 0 => {
                    if depth == 0 {
                        let inner = &self.src[start..self.pos];
                        self.bump();
                        return Some(inner);
                    }
                    depth -= 1;
                }
                _ => {}
            }
            self.bump();
        }
        self.pos = save;
        None
    }

    /// Skips to the end of the span.
    fn finish(&mut self) {
        self.pos = self.end;
    }
}

fn collapse_ws(s: &str) -> String {
    let mut out = s.split_whitespace().collect::<Vec<_>>().join(" ");
    // Keep an escaped trailing space: `\ ` must not become a bare `\`.
    let slashes = out.len() - out.trim_end_matches('\\').len();
    if slashes % 2 == 1 {
        out.push(' ');
    }
    out
}

struct Parser<'a> {
    src: &'a str,
    lines: &'a LineIndex<'a>,
    diags: Vec<Diagnostic>,
}

impl<'a> Parser<'a> {
    fn cursor(&self, pos: usize, end: usize) -> Cursor<'a> {
        Cursor { src: self.src, pos, end }
    }

    fn loc(&self, pos: usize) -> Loc {
        self.lines.loc(pos)
    }

    fn error(&mut self, code: Code, pos: usize, message: impl Into<String>) {
        let loc = self.loc(pos);
        self.diags.push(Diagnostic::new(code, loc, message));
    }

    /// Environment command, options and `\newcell` declarations. Returns the body offset.
    fn header(&mut self, ast: &mut DiagramAst) -> usize {
        let mut cur = self.cursor(0, self.src.len());
        let mut seen_env = false;
        loop {
            cur.skip_ws();
            let at = cur.pos;
            let Some(name) = cur.peek_command() else { break };
            if let Some(kind) = DiagramKind::from_name(name) {
                cur.command();
                if seen_env {
                    self.error(Code::DuplicateEnvironment, at, format!("second environment command `\\{name}`"));
                }
                seen_env = true;
                ast.kind = kind;
                cur.skip_ws();
                if cur.peek() == Some('[') {
                    let opt_start = cur.pos + 1;
                    match cur.delimited('[', ']') {
                        Some(inner) => self.options(inner, opt_start, ast),
                        None => {
                            self.error(Code::MalformedArgument, cur.pos, "unclosed `[` in option block");
                            cur.finish();
                        }
                    }
                }
            } else if name == "newcell" {
                cur.command();
                cur.skip_ws();
                let cell = cur.group();
                cur.skip_ws();
                let fill_pos = cur.pos;
                let fill = cur.group();
                match (cell, fill) {
                    (Some(cell), Some(fill)) => {
                        let cell = cell.trim();
                        if !crate::styles::is_valid_cell_name(cell) {
                            self.error(Code::MalformedArgument, at, format!("invalid cell name `{cell}`"));
                        } else if let Some(prior) = ast.new_cells.iter().find(|c| c.name == cell) {
                            let msg = format!("cell `{cell}` already declared at {}", prior.loc);
                            self.error(Code::DuplicateCell, at, msg);
                        } else {
                            match fill.parse::<FillSpec>() {
                                Ok(fill) => {
                                    let loc = self.loc(at);
                                    ast.new_cells.push(CellDecl { name: cell.to_string(), fill, loc });
                                }
                                Err(e) => self.error(Code::MalformedArgument, fill_pos, e.to_string()),
                            }
                        }
                    }
                    _ => self.error(Code::MalformedArgument, at, "expected `\\newcell{Name}{tail,shaft,head}`"),
                }
            } else {
                break;
            }
        }
        ast.options.assignments.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        cur.pos
    }

    fn options(&mut self, text: &str, base: usize, ast: &mut DiagramAst) {
        let mut depth = 0i32;
        let mut start = 0;
        let mut items = Vec::new();
        for (i, c) in text.char_indices() {
            match c {
                '{' => depth += 1,
                '}' => depth -= 1,
                ',' if depth == 0 => {
                    items.push((start, &text[start..i]));
                    start = i + 1;
                }
                _ => {}
            }
        }
        items.push((start, &text[start..]));
        for (off, raw) in items {
            let item = raw.trim();
            if item.is_empty() {
                continue;
            }
            let pos = base + off + (raw.len() - raw.trim_start().len());
            self.option(item, pos, ast);
        }
    }

    fn option(&mut self, item: &str, pos: usize, ast: &mut DiagramAst) {
        let opts = &mut ast.options;
        let (key, mode, value) = if let Some((k, v)) = item.split_once("+=") {
            (k.trim(), Some(SetMode::Relative), v.trim())
        } else if let Some((k, v)) = item.split_once('=') {
            (k.trim(), Some(SetMode::Absolute), v.trim())
        } else {
            (item, None, "")
        };
        let Some(mode) = mode else {
            match key {
                "flexible" => opts.layout = Some(LayoutMode::Flexible),
                "fixed" => opts.layout = Some(LayoutMode::Fixed),
                "gravitateleft" => opts.gravitate = Some(Gravitate::Left),
                "gravitateright" => opts.gravitate = Some(Gravitate::Right),
                "rotatedlabels" => opts.rotated_labels = true,
                "dotted" => opts.dotted = true,
                "joined" => opts.joined = true,
                "gridlines" => opts.gridlines = true,
                "overgrid" => opts.overgrid = true,
                "braced" => opts.braced = true,
                "loose" => opts.loose = true,
                _ => self.error(Code::UnknownOption, pos, format!("unknown option `{key}`")),
            }
            return;
        };
        if ast.kind == DiagramKind::Graph && matches!(key, "width" | "height" | "xrange" | "yrange") {
            if mode == SetMode::Relative {
                self.error(Code::UnknownOption, pos, format!("`{key}` takes an absolute value"));
                return;
            }
            let g = &mut ast.graph;
            let result = match key {
                "width" => units::parse_length(value).map(|v| g.width = Some(v)),
                "height" => units::parse_length(value).map(|v| g.height = Some(v)),
                "xrange" => units::parse_integer(value).map(|v| g.xrange = Some(v)),
                _ => units::parse_integer(value).map(|v| g.yrange = Some(v)),
            };
            if let Err(e) = result {
                self.error(Code::MalformedLength, pos, e.to_string());
            }
            return;
        }
        let (name, cell) = match key.split_once('{') {
            Some((n, rest)) => match rest.strip_suffix('}') {
                Some(c) => (n.trim(), Some(c.trim().to_string())),
                None => {
                    self.error(Code::UnknownOption, pos, format!("malformed option key `{key}`"));
                    return;
                }
            },
            None => (key, None),
        };
        let param = match Param::lookup(name) {
            Ok(p) => p,
            Err(e) => {
                self.error(Code::UnknownOption, pos, e.to_string());
                return;
            }
        };
        if cell.is_some() && !param.per_cell() {
            self.error(Code::UnknownOption, pos, format!("parameter `{name}` has no per-cell value"));
            return;
        }
        match param.parse_value(value) {
            Ok(value) => opts.assignments.push(Assignment { param, cell, mode, value }),
            Err(e) => self.error(Code::MalformedLength, pos, e.to_string()),
        }
    }

    /// Splits the body into rows and cells at brace depth 0.
    fn body(&mut self, start: usize) -> Vec<Vec<Cell>> {
        let mut spans: Vec<Vec<(usize, usize)>> = vec![Vec::new()];
        let mut cell_start = start;
        let mut depth = 0usize;
        let mut it = self.src[start..].char_indices().map(|(i, c)| (i + start, c)).peekable();
        while let Some((i, c)) = it.next() {
            match c {
                '{' => depth += 1,
                '}' => depth = depth.saturating_sub(1),
                '\\' => {
                    let next = it.next();
                    if depth == 0 && matches!(next, Some((_, '\\'))) {
                        spans.last_mut().expect("nonempty").push((cell_start, i));
                        spans.push(Vec::new());
                        cell_start = i + 2;
                    }
                }
                '&' if depth == 0 => {
                    spans.last_mut().expect("nonempty").push((cell_start, i));
                    cell_start = i + 1;
                }
                _ => {}
            }
        }
        spans.last_mut().expect("nonempty").push((cell_start, self.src.len()));
        if let Some(last) = spans.last() {
            if last.len() == 1 && self.src[last[0].0..last[0].1].trim().is_empty() {
                spans.pop();
            }
        }
        spans.into_iter().map(|row| row.into_iter().map(|(s, e)| self.cell(s, e)).collect()).collect()
    }

    fn cell(&mut self, start: usize, end: usize) -> Cell {
        let mut cur = self.cursor(start, end);
        cur.skip_ws();
        if cur.at_end() {
            return Cell::Empty;
        }
        if let Some(name) = cur.peek_command() {
            if let Some((dir, style)) = split_arrow_command(name) {
                let at = cur.pos;
                cur.command();
                return self.arrow(cur, dir, style, at);
            }
        }
        self.vertex(cur)
    }

    fn arrow(&mut self, mut cur: Cursor<'a>, dir: DirCode, style: &str, at: usize) -> Cell {
        let mut arrow = Arrow {
            dir,
            style: style.to_string(),
            labels: Vec::new(),
            target: None,
            slide: None,
            mods: ArrowMods::default(),
            loc: self.loc(at),
        };
        loop {
            cur.skip_ws();
            let Some(c) = cur.peek() else { break };
            let pos = cur.pos;
            match c {
                '^' | '_' | '<' | '>' => {
                    cur.bump();
                    let code = LabelCode::from_symbol(c).expect("label symbol");
                    match self.label_text(&mut cur) {
                        Some(text) => arrow.labels.push(Label { code, text }),
                        None => {
                            self.error(Code::MalformedArgument, pos, format!("missing text after `{c}`"));
                            cur.finish();
                        }
                    }
                }
                '(' => {
                    let target = self.target(&mut cur);
                    if arrow.target.is_some() {
                        self.error(Code::MalformedArgument, pos, "arrow has more than one target");
                    }
                    if target.is_some() {
                        arrow.target = target;
                    }
                }
                ':' => {
                    cur.bump();
                    let slide = self.slide(&mut cur, pos);
                    if arrow.slide.is_some() {
                        self.error(Code::MalformedArgument, pos, "arrow has more than one slide");
                    }
                    if slide.is_some() {
                        arrow.slide = slide;
                    }
                }
                '\\' => self.modifier(&mut cur, &mut arrow.mods),
                _ => {
                    let rest: String = cur.src[cur.pos..cur.end].trim().chars().take(20).collect();
                    self.error(Code::UnexpectedText, pos, format!("unexpected text `{rest}` in arrow cell"));
                    cur.finish();
                }
            }
        }
        match (dir.needs_target(), &arrow.target) {
            (true, None) => {
                let msg = format!("`\\{}{}` needs a target `(x,y)` or `(point)`", dir.prefix(), style);
                self.error(Code::MissingTarget, at, msg);
            }
            (false, Some(_)) => {
                let msg = format!("compass arrow `\\{}{}` cannot take a target", dir.prefix(), style);
                self.error(Code::TargetOnCompassArrow, at, msg);
            }
            _ => {}
        }
        if style == crate::styles::RULE_CELL {
            if !arrow.labels.is_empty() || arrow.slide.is_some() {
                self.error(Code::UnexpectedText, at, "Rule cells take no labels");
            }
            return Cell::Rule(RuleCell { dir, target: arrow.target, mods: arrow.mods, loc: arrow.loc });
        }
        Cell::Arrow(arrow)
    }

    fn label_text(&mut self, cur: &mut Cursor<'a>) -> Option<String> {
        cur.skip_ws();
        match cur.peek()? {
            '{' => cur.group().map(collapse_ws),
            '[' => cur.delimited('[', ']').map(collapse_ws),
            '\\' => cur.command().map(|name| collapse_ws(&format!("\\{name}"))),
            '}' => None,
            _ => cur.bump().map(String::from),
        }
    }

    fn target(&mut self, cur: &mut Cursor<'a>) -> Option<Target> {
        let pos = cur.pos;
        let Some(inner) = cur.delimited('(', ')') else {
            self.error(Code::MalformedArgument, pos, "unclosed `(`");
            cur.finish();
            return None;
        };
        let inner = inner.trim();
        if let Some((x, y)) = inner.split_once(',') {
            match (units::parse_fraction(x), units::parse_fraction(y)) {
                (Ok(x), Ok(y)) => Some(Target::Offset { x, y }),
                _ => {
                    self.error(Code::MalformedArgument, pos, format!("malformed target `({inner})`"));
                    None
                }
            }
        } else if is_point_name(inner) {
            Some(Target::Point(inner.to_string()))
        } else {
            self.error(Code::MalformedArgument, pos, format!("malformed target `({inner})`"));
            None
        }
    }

    fn slide(&mut self, cur: &mut Cursor<'a>, pos: usize) -> Option<Slide> {
        cur.skip_ws();
        let Some(inner) = cur.group() else {
            self.error(Code::MalformedArgument, pos, "expected `:{t;x,y}`");
            return None;
        };
        let (t, offsets) = match inner.split_once(';') {
            Some((t, o)) => (t, o),
            None if inner.contains(',') => ("", inner),
            None => (inner, ""),
        };
        let mut slide = Slide::default();
        let mut ok = true;
        let t = t.trim();
        if !t.is_empty() {
            match units::parse_fraction(t) {
                Ok(v) if (0..=units::FRACTION_ONE).contains(&v) => slide.point = Some(v),
                _ => ok = false,
            }
        }
        let offsets = offsets.trim();
        if !offsets.is_empty() {
            let (x, y) = offsets.split_once(',').unwrap_or((offsets, ""));
            for (text, slot) in [(x.trim(), &mut slide.offx), (y.trim(), &mut slide.offy)] {
                if !text.is_empty() {
                    match units::parse_length(text) {
                        Ok(v) => *slot = Some(v),
                        Err(_) => ok = false,
                    }
                }
            }
        }
        if !ok {
            self.error(Code::MalformedArgument, pos, format!("malformed slide `:{{{inner}}}`"));
            return None;
        }
        Some(slide)
    }

    fn length_arg(&mut self, cur: &mut Cursor<'a>, name: &str, pos: usize) -> Option<i32> {
        cur.skip_ws();
        let Some(text) = cur.group() else {
            self.error(Code::MalformedArgument, pos, format!("`\\{name}` expects a `{{length}}` argument"));
            return None;
        };
        match units::parse_length(text) {
            Ok(v) => Some(v),
            Err(e) => {
                self.error(Code::MalformedLength, pos, e.to_string());
                None
            }
        }
    }

    fn gray_arg(&mut self, cur: &mut Cursor<'a>, pos: usize) -> Option<i32> {
        cur.skip_ws();
        let Some(text) = cur.group() else {
            self.error(Code::MalformedArgument, pos, "`\\gr` expects a `{gray}` argument");
            return None;
        };
        match units::parse_fraction(text) {
            Ok(v) if (0..=units::FRACTION_ONE).contains(&v) => Some(v),
            Ok(v) => {
                let loc = self.loc(pos);
                let msg = format!("gray level `{}` outside [0,1] clamped", text.trim());
                self.diags.push(Diagnostic::new(Code::IgnoredModifier, loc, msg));
                Some(v.clamp(0, units::FRACTION_ONE))
            }
            Err(e) => {
                self.error(Code::MalformedArgument, pos, e.to_string());
                None
            }
        }
    }

    fn modifier(&mut self, cur: &mut Cursor<'a>, mods: &mut ArrowMods) {
        let pos = cur.pos;
        let name = cur.command().unwrap_or("");
        match name {
            "hx" => mods.hx = self.length_arg(cur, name, pos).or(mods.hx),
            "hy" => mods.hy = self.length_arg(cur, name, pos).or(mods.hy),
            "tx" => mods.tx = self.length_arg(cur, name, pos).or(mods.tx),
            "ty" => mods.ty = self.length_arg(cur, name, pos).or(mods.ty),
            "fx" => mods.fx = self.length_arg(cur, name, pos).or(mods.fx),
            "fy" => mods.fy = self.length_arg(cur, name, pos).or(mods.fy),
            "lw" => mods.lw = self.length_arg(cur, name, pos).or(mods.lw),
            "rw" => mods.rw = self.length_arg(cur, name, pos).or(mods.rw),
            "nw" => mods.nowidth = true,
            "br" => mods.brk = true,
            "nodot" => mods.nodot = true,
            "jt" => mods.join = Some(mods.join.unwrap_or_default().with_tail()),
            "jh" => mods.join = Some(mods.join.unwrap_or_default().with_head()),
            "jn" => mods.join = Some(JoinSpec::None),
            "joined" => mods.join = Some(JoinSpec::Both),
            "db" => mods.span_mode = Some(SpanMode::Alternate),
            "lb" | "rb" => {
                self.error(Code::UnsupportedSpanMode, pos, format!("span mode `\\{name}` is not supported"));
            }
            "white" => mods.gray = Some(units::FRACTION_ONE),
            "gr" => mods.gray = self.gray_arg(cur, pos).or(mods.gray),
            "pt" => {
                cur.skip_ws();
                let Some(point) = cur.group().map(str::trim) else {
                    self.error(Code::MalformedArgument, pos, "`\\pt` expects `{name}`");
                    return;
                };
                if !is_point_name(point) {
                    self.error(Code::MalformedArgument, pos, format!("invalid point name `{point}`"));
                    return;
                }
                cur.skip_ws();
                let mut fraction = None;
                if cur.peek() == Some('{') {
                    let text = cur.group().unwrap_or("");
                    match units::parse_fraction(text) {
                        Ok(v) => fraction = Some(v),
                        Err(e) => self.error(Code::MalformedArgument, pos, e.to_string()),
                    }
                }
                mods.point = Some((point.to_string(), fraction));
            }
            _ if IGNORED_MODIFIERS.contains(&name) => {
                let mut raw = format!("\\{name}");
                loop {
                    let save = *cur;
                    cur.skip_ws();
                    match cur.group() {
                        Some(arg) => raw.push_str(&format!("{{{}}}", collapse_ws(arg))),
                        None => {
                            *cur = save;
                            break;
                        }
                    }
                }
                let loc = self.loc(pos);
                self.diags.push(Diagnostic::new(Code::IgnoredModifier, loc, format!("modifier `\\{name}` is ignored")));
                mods.ignored.push(raw);
            }
            _ => {
                self.error(Code::UnknownCommand, pos, format!("unknown command `\\{name}` in arrow cell"));
                // Skip its arguments so one mistake gives one diagnostic.
                loop {
                    cur.skip_ws();
                    if cur.group().is_none() {
                        break;
                    }
                }
            }
        }
    }

    fn vertex(&mut self, mut cur: Cursor<'a>) -> Cell {
        let mut v = Vertex { loc: self.loc(cur.pos), ..Vertex::default() };
        let mut text = String::new();
        // Set once a modifier is lifted out, so the text on either side cannot fuse into one command.
        let mut cut = false;
        while let Some(c) = cur.peek() {
            if c != '\\' {
                if std::mem::take(&mut cut) && c.is_ascii_alphabetic() && ends_with_command(&text) {
                    text.push(' ');
                }
                text.push(c);
                cur.bump();
                continue;
            }
            let pos = cur.pos;
            let save = cur;
            let name = cur.command().unwrap_or("");
            cut = true;
            match name {
                "stop" => v.stop = true,
                "nodot" => v.nodot = true,
                "grav" => v.grav = true,
                "base" => v.base = true,
                "white" => v.gray = Some(units::FRACTION_ONE),
                "gr" => v.gray = self.gray_arg(&mut cur, pos).or(v.gray),
                _ => match MoveKind::from_name(name) {
                    Some(kind) if kind.takes_value() => {
                        cur.skip_ws();
                        let Some(arg) = cur.group() else {
                            self.error(Code::MalformedArgument, pos, format!("`\\{name}` expects a value"));
                            continue;
                        };
                        let value = match units::parse_length(arg) {
                            Ok(len) => Some(MoveValue::Length(len)),
                            Err(_) => units::parse_fraction(arg).ok().map(MoveValue::Fraction),
                        };
                        match value {
                            Some(value) => v.movements.push(Movement { kind, value }),
                            None => self.error(Code::MalformedLength, pos, format!("malformed movement `{}`", arg.trim())),
                        }
                    }
                    Some(kind) => v.movements.push(Movement { kind, value: MoveValue::Edge }),
                    None => {
                        text.push_str(&self.src[save.pos..cur.pos]);
                        cut = false;
                    }
                },
            }
        }
        v.text = collapse_ws(&text);
        // Only ignored modifiers: nothing left to distinguish it from a blank cell.
        if v == (Vertex { loc: v.loc, ..Vertex::default() }) {
            return Cell::Empty;
        }
        Cell::Vertex(v)
    }
}

/// True when `s` ends in `\\letters`.
fn ends_with_command(s: &str) -> bool {
    let stem = s.trim_end_matches(|c: char| c.is_ascii_alphabetic());
    stem.len() < s.len() && stem.ends_with('\\')
}

fn is_point_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '-')
}

/// Splits `rdTo` into its direction and style name.
pub fn split_arrow_command(name: &str) -> Option<(DirCode, &str)> {
    DirCode::PREFIXES.iter().find_map(|&(prefix, dir)| {
        let style = name.strip_prefix(prefix)?;
        crate::styles::is_valid_cell_name(style).then_some((dir, style))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixedmath::Octant;

    fn arrow(cell: &Cell) -> &Arrow {
        match cell {
            Cell::Arrow(a) => a,
            other => panic!("expected arrow, got {other:?}"),
        }
    }

    fn codes(src: &str) -> Vec<&'static str> {
        parse(src).unwrap_err().0.iter().map(|d| d.code.as_str()).collect()
    }

    #[test]
    fn simple_row() {
        let ast = parse(r"A & \rTo^{f} & B").unwrap();
        assert_eq!(ast.rows.len(), 1);
        let row = &ast.rows[0];
        assert!(matches!(&row[0], Cell::Vertex(v) if v.text == "A"));
        let a = arrow(&row[1]);
        assert_eq!(a.dir, DirCode::Compass(Octant::R));
        assert_eq!(a.style, "To");
        assert_eq!(a.labels, vec![Label { code: LabelCode::Caret, text: "f".into() }]);
        assert!(matches!(&row[2], Cell::Vertex(v) if v.text == "B"));
    }

    #[test]
    fn direction_prefixes() {
        let a = parse(r"\dTo<{g}").unwrap();
        let a = arrow(&a.rows[0][0]);
        assert_eq!(a.dir.code(), 3);
        assert_eq!(a.labels[0].code, LabelCode::Lt);
        for (src, code) in [(r"\rdTo", 2), (r"\ldEpi", 4), (r"\luTo", 6), (r"\ruTo", 8), (r"\uTo", 7), (r"\lTo", 5)] {
            let ast = parse(src).unwrap();
            assert_eq!(arrow(&ast.rows[0][0]).dir.code(), code, "{src}");
        }
    }

    #[test]
    fn targets() {
        let ast = parse(r"\aTo(2,1)").unwrap();
        let a = arrow(&ast.rows[0][0]);
        assert_eq!(a.dir.code(), 0);
        assert_eq!(a.target, Some(Target::Offset { x: 2 * 65536, y: 65536 }));
        let ast = parse(r"\bTo(p)").unwrap();
        assert_eq!(arrow(&ast.rows[0][0]).target, Some(Target::Point("p".into())));
        assert_eq!(codes(r"\rTo(1,0)"), ["E003"]);
        assert_eq!(codes(r"\aTo"), ["E004"]);
    }

    #[test]
    fn labels_and_slides() {
        let ast = parse(r"\rTo^[x]_y>{\alpha}:{.25;0pt,2pt}").unwrap();
        let a = arrow(&ast.rows[0][0]);
        let texts: Vec<_> = a.labels.iter().map(|l| (l.code, l.text.as_str())).collect();
        assert_eq!(texts, [(LabelCode::Caret, "x"), (LabelCode::Under, "y"), (LabelCode::Gt, r"\alpha")]);
        assert_eq!(a.slide, Some(Slide { point: Some(16384), offx: Some(0), offy: Some(131072) }));
        let ast = parse(r"\rTo^f:{;,1pt}").unwrap();
        assert_eq!(arrow(&ast.rows[0][0]).slide, Some(Slide { point: None, offx: None, offy: Some(65536) }));
    }

    #[test]
    fn modifiers() {
        let ast = parse(r"\rTo\hx{2pt}\nw\br\jt\jh\pt{m}{.25}\gr{.5}\dh{3pt}").unwrap();
        let m = &arrow(&ast.rows[0][0]).mods;
        assert_eq!(m.hx, Some(131072));
        assert!(m.nowidth && m.brk);
        assert_eq!(m.join, Some(JoinSpec::Both));
        assert_eq!(m.point, Some(("m".into(), Some(16384))));
        assert_eq!(m.gray, Some(32768));
        assert_eq!(m.ignored, vec![r"\dh{3pt}".to_string()]);
        let out = parse_full(r"\rTo\dh{3pt}").unwrap();
        assert_eq!(out.warnings[0].code, Code::IgnoredModifier);
        assert_eq!(codes(r"\rTo\frob"), ["E001"]);
        assert_eq!(codes(r"\rTo\lb"), ["E008"]);
        assert_eq!(codes(r"\rTo\hx{2em}"), ["E005"]);
        assert_eq!(codes(r"\rTo junk"), ["E006"]);
    }

    #[test]
    fn vertices() {
        let ast = parse(r"\stop & \nodot & X\grav \base & \dx{10pt}\mx{.5}\dl Y").unwrap();
        let row = &ast.rows[0];
        let Cell::Vertex(a) = &row[0] else { panic!() };
        assert!(a.stop && a.text.is_empty());
        let Cell::Vertex(c) = &row[2] else { panic!() };
        assert!(c.grav && c.base && c.text == "X");
        let Cell::Vertex(d) = &row[3] else { panic!() };
        assert_eq!(
            d.movements,
            vec![
                Movement { kind: MoveKind::Dx, value: MoveValue::Length(655360) },
                Movement { kind: MoveKind::Mx, value: MoveValue::Fraction(32768) },
                Movement { kind: MoveKind::Dl, value: MoveValue::Edge },
            ]
        );
        assert_eq!(d.text, "Y");
        let ast = parse(r"\mathbb{Z}  /  2 & \rho").unwrap();
        assert!(matches!(&ast.rows[0][0], Cell::Vertex(v) if v.text == r"\mathbb{Z} / 2"));
        assert!(matches!(&ast.rows[0][1], Cell::Vertex(v) if v.text == r"\rho"));
    }

    #[test]
    fn rows_and_comments() {
        let ast = parse("A & B \\\\ % comment & x\n C & \\\\").unwrap();
        assert_eq!(ast.rows.len(), 2);
        assert_eq!(ast.rows[1].len(), 2);
        assert_eq!(ast.rows[1][1], Cell::Empty);
        assert_eq!(ast.column_count(), 2);
        assert!(parse("").unwrap().rows.is_empty());
        let ast = parse("{A & B} & C").unwrap();
        assert_eq!(ast.rows[0].len(), 2);
    }

    #[test]
    fn header() {
        let src = r"\Dg[flexible, gravitateleft, labelpad{Two}+=1pt, grid=2cm, ygrid=3mm, dotted]
            \newcell{Onto}{none,single,double-arrowhead}
            A & \rOnto & B";
        let ast = parse(src).unwrap();
        assert_eq!(ast.kind, DiagramKind::Dg);
        assert_eq!(ast.options.layout, Some(LayoutMode::Flexible));
        assert_eq!(ast.options.gravitate, Some(Gravitate::Left));
        assert!(ast.options.dotted);
        let keys: Vec<_> = ast.options.assignments.iter().map(|a| a.param.name()).collect();
        assert_eq!(keys, ["grid", "ygrid", "labelpad"]);
        assert_eq!(ast.new_cells[0].name, "Onto");
        assert_eq!(arrow(&ast.rows[0][1]).style, "Onto");
        assert_eq!(codes(r"\Diag[wobbly] A"), ["E007"]);
        assert_eq!(codes(r"\Diag\Dg A"), ["E014"]);
        assert_eq!(codes(r"\Diag[grid=3] A"), ["E005"]);
        assert_eq!(codes(r"\newcell{A}{none,single,none}\newcell{A}{none,single,none}"), ["E009"]);
        let g = parse(r"\Graph[width=3cm,xrange=4] A").unwrap();
        assert_eq!(g.graph.xrange, Some(4));
        assert_eq!(g.graph.width, Some(3 * 1_864_679));
    }

    #[test]
    fn diagnostics_carry_positions() {
        let err = parse("A & B \\\\\n  C & \\rTo{").unwrap_err();
        assert_eq!(err.0.len(), 1);
        assert_eq!(err.0[0].code, Code::UnbalancedBraces);
        assert_eq!((err.0[0].loc.line, err.0[0].loc.col), (2, 11));
        let err = parse("A\n & \\rTo\\zap").unwrap_err();
        assert_eq!((err.0[0].loc.line, err.0[0].loc.col), (2, 8));
        let err = parse("\\rTo\\zap & \\rTo junk").unwrap_err();
        assert_eq!(err.0.len(), 2, "errors in separate cells are all reported");
    }

    #[test]
    fn rule_cells() {
        let ast = parse(r"\rRule\rw{2pt}").unwrap();
        assert!(matches!(&ast.rows[0][0], Cell::Rule(r) if r.mods.rw == Some(131072)));
        assert_eq!(codes(r"\rRule^f"), ["E006"]);
    }

    #[test]
    fn trailing_backslash_terminates() {
        assert_eq!(codes(r"\rRule\"), ["E001"]);
        assert!(parse("(\\").is_ok());
        assert!(parse(r"\rTo(\").is_err());
    }
}
