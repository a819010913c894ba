//! Diagram source language: AST, parser, diagnostics and canonical form.

mod ast;
mod canonical;
mod diag;
mod parse;

pub use ast::*;
pub use canonical::canonicalize;
pub use diag::{Code, Diagnostic, Diagnostics, Severity};
pub use parse::{parse, parse_full, split_arrow_command, ParseOutput, IGNORED_MODIFIERS};
