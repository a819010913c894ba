//! Resolved compile settings: the parameter registry plus diagram-wide flags.

use std::fmt;

use thiserror::Error;

use crate::dsl::{DiagramAst, DiagramKind, Gravitate, LayoutMode, Options};
use crate::styles::{Param, SetMode, StyleError, StyleRegistry};
use crate::units;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Settings {
    pub registry: StyleRegistry,
    pub flexible: bool,
    pub gravitate: Option<Gravitate>,
    pub rotated_labels: bool,
    pub dotted: bool,
    pub joined: bool,
    pub gridlines: bool,
    pub overgrid: bool,
    pub braced: bool,
    pub loose: bool,
}

impl Settings {
    pub fn new(registry: StyleRegistry) -> Self {
        Settings {
            registry,
            flexible: false,
            gravitate: None,
            rotated_labels: false,
            dotted: false,
            joined: false,
            gridlines: false,
            overgrid: false,
            braced: false,
            loose: false,
        }
    }

    /// Applies an environment preset's parameter deltas.
    pub fn apply_preset(&mut self, kind: DiagramKind) {
        let reg = &mut self.registry;
        let mm = |v: &str| units::parse_length(v).expect("preset literal");
        let rel = |reg: &mut StyleRegistry, p, v| reg.set_param(p, None, v, SetMode::Relative).expect("global param");
        match kind {
            DiagramKind::Diagram | DiagramKind::Graph => return,
            DiagramKind::Diag | DiagramKind::Dg | DiagramKind::Long => {}
        }
        self.flexible = true;
        reg.set_param(Param::Xgrid, None, 0, SetMode::Absolute).expect("global param");
        match kind {
            DiagramKind::Dg => {
                rel(reg, Param::Ygrid, mm("-2mm"));
                rel(reg, Param::CellWidth, mm("3mm"));
                rel(reg, Param::BraceWidth, mm("-2.5mm"));
            }
            DiagramKind::Long => {
                rel(reg, Param::Ygrid, mm("-5mm"));
                rel(reg, Param::BraceWidth, mm("-2.5mm"));
            }
            _ => {}
        }
    }

    /// Applies the option block of a diagram: flags, then assignments in order.
    pub fn apply_options(&mut self, opts: &Options) -> Result<(), StyleError> {
        match opts.layout {
            Some(LayoutMode::Flexible) => self.flexible = true,
            Some(LayoutMode::Fixed) => self.flexible = false,
            None => {}
        }
        if opts.gravitate.is_some() {
            self.gravitate = opts.gravitate;
        }
        self.rotated_labels |= opts.rotated_labels;
        self.dotted |= opts.dotted;
        self.joined |= opts.joined;
        self.gridlines |= opts.gridlines;
        self.overgrid |= opts.overgrid;
        self.braced |= opts.braced;
        self.loose |= opts.loose;
        for a in &opts.assignments {
            self.registry.set_param(a.param, a.cell.as_deref(), a.value, a.mode)?;
        }
        Ok(())
    }

    pub fn global(&self, p: Param) -> i32 {
        self.registry.global(p)
    }

    pub fn effective(&self, p: Param, cell: &str) -> i32 {
        self.registry.effective(p, cell)
    }
}

/// A textual parameter update: `name=value`, `name+=value` or `name{Cell}=value`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SettingText {
    pub name: String,
    pub cell: Option<String>,
    pub mode: SetMode,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed setting `{0}` (expected name=value, name+=value or name{{Cell}}=value)")]
pub struct SettingSyntaxError(pub String);

impl std::str::FromStr for SettingText {
    type Err = SettingSyntaxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SettingSyntaxError(s.to_string());
        let (key, mode, value) = if let Some((k, v)) = s.split_once("+=") {
            (k, SetMode::Relative, v)
        } else if let Some((k, v)) = s.split_once('=') {
            (k, SetMode::Absolute, v)
        } else {
            return Err(bad());
        };
        let key = key.trim();
        let (name, cell) = match key.split_once('{') {
            Some((n, rest)) => (n.trim(), Some(rest.strip_suffix('}').ok_or_else(bad)?.trim().to_string())),
            None => (key, None),
        };
        if name.is_empty() || value.trim().is_empty() {
            return Err(bad());
        }
        Ok(SettingText { name: name.to_string(), cell, mode, value: value.trim().to_string() })
    }
}

impl fmt::Display for SettingText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if let Some(c) = &self.cell {
            write!(f, "{{{c}}}")?;
        }
        let op = if self.mode == SetMode::Relative { "+=" } else { "=" };
        write!(f, "{op}{}", self.value)
    }
}

impl SettingText {
    pub fn apply(&self, reg: &mut StyleRegistry) -> Result<(), StyleError> {
        reg.set_param_text(&self.name, self.cell.as_deref(), &self.value, self.mode)
    }
}

/// Caller-side overrides layered over a diagram's own header.
///
/// Application order: preset, the file's options, `config`, the flag
/// fields, then `sets`. Later layers win.
#[derive(Debug, Clone, PartialEq, Eq, Default, Hash)]
pub struct CompileOptions {
    /// Replaces the preset named by the file's environment command.
    pub preset: Option<DiagramKind>,
    pub config: Vec<SettingText>,
    pub flexible: Option<bool>,
    pub gravitate: Option<Gravitate>,
    pub gridlines: bool,
    pub overgrid: bool,
    pub dotted: bool,
    pub rotated_labels: bool,
    pub grid: Option<i32>,
    pub xgrid: Option<i32>,
    pub ygrid: Option<i32>,
    pub sets: Vec<SettingText>,
}

impl CompileOptions {
    /// Stable text mixed into cache digests.
    pub fn fingerprint(&self) -> String {
        let mut parts = Vec::new();
        if let Some(p) = self.preset {
            parts.push(format!("preset={}", p.name()));
        }
        parts.extend(self.config.iter().map(|s| format!("config:{s}")));
        if let Some(f) = self.flexible {
            parts.push(format!("flexible={f}"));
        }
        if let Some(g) = self.gravitate {
            parts.push(format!("gravitate={g:?}"));
        }
        for (on, name) in [
            (self.gridlines, "gridlines"),
            (self.overgrid, "overgrid"),
            (self.dotted, "dotted"),
            (self.rotated_labels, "rotatedlabels"),
        ] {
            if on {
                parts.push(name.to_string());
            }
        }
        for (v, name) in [(self.grid, "grid"), (self.xgrid, "xgrid"), (self.ygrid, "ygrid")] {
            if let Some(v) = v {
                parts.push(format!("{name}={v}sp"));
            }
        }
        parts.extend(self.sets.iter().map(|s| format!("set:{s}")));
        parts.join(";")
    }

    /// Builds the settings for one diagram.
    pub fn resolve(&self, ast: &DiagramAst) -> Result<Settings, StyleError> {
        let mut reg = StyleRegistry::builtin();
        for decl in &ast.new_cells {
            reg.register_cell_from(&decl.name, decl.fill, &format!("\\newcell at {}", decl.loc))?;
        }
        let mut s = Settings::new(reg);
        s.apply_preset(self.preset.unwrap_or(ast.kind));
        s.apply_options(&ast.options)?;
        for c in &self.config {
            c.apply(&mut s.registry)?;
        }
        if let Some(f) = self.flexible {
            s.flexible = f;
        }
        if self.gravitate.is_some() {
            s.gravitate = self.gravitate;
        }
        s.gridlines |= self.gridlines;
        s.overgrid |= self.overgrid;
        s.dotted |= self.dotted;
        s.rotated_labels |= self.rotated_labels;
        for (v, p) in [(self.grid, Param::Grid), (self.xgrid, Param::Xgrid), (self.ygrid, Param::Ygrid)] {
            if let Some(v) = v {
                s.registry.set_param(p, None, v, SetMode::Absolute)?;
            }
        }
        for c in &self.sets {
            c.apply(&mut s.registry)?;
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;

    fn resolve(src: &str, opts: &CompileOptions) -> Settings {
        opts.resolve(&parse(src).unwrap()).unwrap()
    }

    #[test]
    fn presets() {
        let dg = resolve(r"\Dg A", &CompileOptions::default());
        assert!(dg.flexible);
        assert_eq!(dg.global(Param::Xgrid), 0);
        assert_eq!(dg.global(Param::Ygrid), 1_864_679 - 372_934);
        assert_eq!(dg.global(Param::CellWidth), 1_864_679 + 559_401);
        assert_eq!(dg.global(Param::BraceWidth), 1_864_679 - 466_167);
        let long = resolve(r"\Long A", &CompileOptions::default());
        assert_eq!(long.global(Param::Ygrid), 1_864_679 - 932_335);
        let plain = resolve("A", &CompileOptions::default());
        assert!(!plain.flexible);
        assert_eq!(plain.global(Param::Xgrid), 1_864_679);
    }

    #[test]
    fn layering() {
        let opts = CompileOptions {
            preset: Some(DiagramKind::Diag),
            config: vec!["labelpad=1pt".parse().unwrap()],
            flexible: Some(false),
            sets: vec!["labelpad+=1pt".parse().unwrap(), "cellpush{Two}=1pt".parse().unwrap()],
            ..CompileOptions::default()
        };
        let s = resolve(r"\Diagram[labelpad=9pt] A", &opts);
        assert!(!s.flexible);
        assert_eq!(s.global(Param::Xgrid), 0);
        assert_eq!(s.global(Param::LabelPad), 2 * 65536);
        assert_eq!(s.effective(Param::CellPush, "Two"), 3 * 65536);
    }

    #[test]
    fn setting_syntax() {
        let s: SettingText = "labelpad{Two}+=.5pt".parse().unwrap();
        assert_eq!(s.cell.as_deref(), Some("Two"));
        assert_eq!(s.mode, SetMode::Relative);
        assert_eq!(s.to_string(), "labelpad{Two}+=.5pt");
        assert!("labelpad".parse::<SettingText>().is_err());
        assert!("=3pt".parse::<SettingText>().is_err());
    }
}
