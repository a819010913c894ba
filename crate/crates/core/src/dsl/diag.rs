use std::fmt;

use super::ast::Loc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Warning,
}

/// Stable diagnostic codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Code {
    UnknownCommand,
    UnbalancedBraces,
    TargetOnCompassArrow,
    MissingTarget,
    MalformedLength,
    UnexpectedText,
    UnknownOption,
    UnsupportedSpanMode,
    DuplicateCell,
    MalformedArgument,
    UnknownCellType,
    UnknownPoint,
    DuplicatePoint,
    DuplicateEnvironment,
    Layout,
    IgnoredModifier,
    LabelHoleTooWide,
    Unsatisfied,
    CacheUnwritable,
}

impl Code {
    pub fn as_str(self) -> &'static str {
        match self {
            Code::UnknownCommand => "E001",
            Code::UnbalancedBraces => "E002",
            Code::TargetOnCompassArrow => "E003",
            Code::MissingTarget => "E004",
            Code::MalformedLength => "E005",
            Code::UnexpectedText => "E006",
            Code::UnknownOption => "E007",
            Code::UnsupportedSpanMode => "E008",
            Code::DuplicateCell => "E009",
            Code::MalformedArgument => "E010",
            Code::UnknownCellType => "E011",
            Code::UnknownPoint => "E012",
            Code::DuplicatePoint => "E013",
            Code::DuplicateEnvironment => "E014",
            Code::Layout => "E015",
            Code::IgnoredModifier => "W101",
            Code::LabelHoleTooWide => "W102",
            Code::Unsatisfied => "W103",
            Code::CacheUnwritable => "W104",
        }
    }

    pub fn severity(self) -> Severity {
        if self.as_str().starts_with('W') {
            Severity::Warning
        } else {
            Severity::Error
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub code: Code,
    pub loc: Loc,
    pub message: String,
}

impl Diagnostic {
    pub fn new(code: Code, loc: Loc, message: impl Into<String>) -> Self {
        Diagnostic { code, loc, message: message.into() }
    }

    pub fn severity(&self) -> Severity {
        self.code.severity()
    }

    pub fn is_error(&self) -> bool {
        self.severity() == Severity::Error
    }

    /// `file:line:col: error[E001]: message`
    pub fn render(&self, file: &str) -> String {
        format!("{file}:{}:{}: {self}", self.loc.line, self.loc.col)
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let level = match self.severity() {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{level}[{}]: {}", self.code.as_str(), self.message)
    }
}

/// A failed parse or compile: every error found, plus any warnings.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{}", summarize(.0))]
pub struct Diagnostics(pub Vec<Diagnostic>);

fn summarize(d: &[Diagnostic]) -> String {
    match d.iter().find(|d| d.is_error()).or(d.first()) {
        Some(first) => format!("{}:{}: {first}", first.loc.line, first.loc.col),
        None => "no diagnostics".to_string(),
    }
}

impl Diagnostics {
    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.0.iter().filter(|d| d.is_error())
    }
}
