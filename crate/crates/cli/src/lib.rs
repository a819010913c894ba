//! The `cdiag` command line.
//!
//! Exit codes: 0 success, 1 diagnostics, 2 usage, 3 I/O.

use std::ffi::OsString;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use cdiag_core::batch;
use cdiag_core::cache;
use cdiag_core::compile;
use cdiag_core::dsl::{Diagnostic, DiagramKind, Gravitate};
use cdiag_core::settings::{CompileOptions, SettingText};
use cdiag_core::styles::{EmMetrics, Metrics};
use cdiag_core::units;
use clap::{Args, Parser, Subcommand, ValueEnum};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DIAGNOSTICS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "cdiag", version, about = "Compile grid-based commutative diagrams to SVG")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compile diagrams to SVG or a JSON layout dump.
    Compile {
        #[command(flatten)]
        common: Common,
        /// Output file; a directory when several inputs are given. Defaults to stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Svg)]
        format: Format,
        /// Where cache files go. Defaults to `.cdiag-cache` beside each input.
        #[arg(long)]
        cache_dir: Option<PathBuf>,
        #[arg(long)]
        no_cache: bool,
        /// Report the cache status of each input on stderr.
        #[arg(short, long)]
        verbose: bool,
    },
    /// Parse and lay out, printing diagnostics only.
    Check {
        #[command(flatten)]
        common: Common,
    },
    /// Print the JSON layout dump.
    Dump {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Svg,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Preset {
    Diagram,
    Diag,
    Dg,
    Long,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Side {
    Left,
    Right,
}

#[derive(Debug, Args)]
struct Common {
    /// Input files; `-` reads stdin.
    #[arg(required = true)]
    inputs: Vec<String>,
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    #[arg(long, overrides_with = "fixed")]
    flexible: bool,
    #[arg(long, overrides_with = "flexible")]
    fixed: bool,
    #[arg(long, value_parser = parse_len)]
    grid: Option<i32>,
    #[arg(long, value_parser = parse_len)]
    xgrid: Option<i32>,
    #[arg(long, value_parser = parse_len)]
    ygrid: Option<i32>,
    /// `param=value`, `param+=value` or `param{Cell}=value`; applied last, in order.
    #[arg(long = "set", value_name = "PARAM=VALUE")]
    sets: Vec<SettingText>,
    /// File of `param = value` lines, applied after the diagram's own options.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    gridlines: bool,
    #[arg(long)]
    overgrid: bool,
    #[arg(long)]
    dotted: bool,
    #[arg(long)]
    rotated_labels: bool,
    #[arg(long, value_enum)]
    gravitate: Option<Side>,
    /// Font metrics file of `em <context> <size>` lines.
    #[arg(long)]
    metrics: Option<PathBuf>,
}

fn parse_len(s: &str) -> Result<i32, String> {
    units::parse_length(s).map_err(|e| e.to_string())
}

/// A failure that ends the run with an exit code.
struct Fail(i32, String);

/// Parses a config file: `param = value` lines, `#` or `%` comments.
pub fn parse_config(text: &str) -> Result<Vec<SettingText>, String> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#') && !t.starts_with('%')
        })
        .map(|(i, l)| l.trim().parse::<SettingText>().map_err(|e| format!("line {}: {e}", i + 1)))
        .collect()
}

impl Common {
    fn options(&self) -> Result<CompileOptions, Fail> {
        let config = match &self.config {
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| Fail(EXIT_IO, format!("{}: {e}", p.display())))?;
                parse_config(&text).map_err(|e| Fail(EXIT_USAGE, format!("{}: {e}", p.display())))?
            }
            None => Vec::new(),
        };
        let flexible = match (self.flexible, self.fixed) {
            (true, _) => Some(true),
            (_, true) => Some(false),
            _ => None,
        };
        Ok(CompileOptions {
            preset: self.preset.map(|p| match p {
                Preset::Diagram => DiagramKind::Diagram,
                Preset::Diag => DiagramKind::Diag,
                Preset::Dg => DiagramKind::Dg,
                Preset::Long => DiagramKind::Long,
            }),
            config,
            flexible,
            gravitate: self.gravitate.map(|g| match g {
                Side::Left => Gravitate::Left,
                Side::Right => Gravitate::Right,
            }),
            gridlines: self.gridlines,
            overgrid: self.overgrid,
            dotted: self.dotted,
            rotated_labels: self.rotated_labels,
            grid: self.grid,
            xgrid: self.xgrid,
            ygrid: self.ygrid,
            sets: self.sets.clone(),
        })
    }

    fn metrics(&self) -> Result<EmMetrics, Fail> {
        match &self.metrics {
            None => Ok(EmMetrics::default()),
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| Fail(EXIT_IO, format!("{}: {e}", p.display())))?;
                EmMetrics::from_metrics_file(&text).map_err(|e| Fail(EXIT_USAGE, format!("{}: {e}", p.display())))
            }
        }
    }
}

struct Input {
    name: String,
    path: Option<PathBuf>,
    source: String,
}

fn read_inputs(names: &[String], stdin: &mut dyn Read) -> Result<Vec<Input>, Fail> {
    let mut out = Vec::new();
    for name in names {
        let (path, source) = if name == "-" {
            let mut s = String::new();
            stdin.read_to_string(&mut s).map_err(|e| Fail(EXIT_IO, format!("<stdin>: {e}")))?;
            (None, s)
        } else {
            let s = fs::read_to_string(name).map_err(|e| Fail(EXIT_IO, format!("{name}: {e}")))?;
            (Some(PathBuf::from(name)), s)
        };
        let name = if path.is_some() { name.clone() } else { "<stdin>".to_string() };
        out.push(Input { name, path, source });
    }
    Ok(out)
}

/// What one input produced.
#[derive(Default)]
struct Outcome {
    output: Option<String>,
    messages: Vec<String>,
    failed: bool,
}

fn report(out: &mut Outcome, file: &str, diags: &[Diagnostic]) {
    out.messages.extend(diags.iter().map(|d| d.render(file)));
}

enum Mode {
    Compile { format: Format, cache_dir: Option<PathBuf>, no_cache: bool, verbose: bool },
    Check,
    Dump,
}

fn cache_path(input: &Input, dir: Option<&Path>) -> Option<PathBuf> {
    let path = input.path.as_ref()?;
    let file = path.file_name()?;
    let dir = match dir {
        Some(d) => d.to_path_buf(),
        None => path.parent().unwrap_or(Path::new("")).join(".cdiag-cache"),
    };
    let mut name = file.to_os_string();
    name.push(".cache");
    Some(dir.join(name))
}

fn process(input: &Input, mode: &Mode, options: &CompileOptions, metrics: &dyn Metrics) -> Outcome {
    let mut out = Outcome::default();
    let file = input.name.as_str();
    if let Mode::Compile { format: Format::Svg, cache_dir, no_cache: false, verbose } = mode {
        if let Some(path) = cache_path(input, cache_dir.as_deref()) {
            match cache::compile_with_cache(&input.source, &path, options, metrics) {
                Ok(c) => {
                    report(&mut out, file, &c.warnings);
                    if *verbose {
                        out.messages.push(format!("{file}: cache {}", c.status.name()));
                    }
                    out.output = Some(c.svg());
                }
                Err(d) => {
                    report(&mut out, file, &d.0);
                    out.failed = true;
                }
            }
            return out;
        }
    }
    match compile::compile(&input.source, options, metrics) {
        Ok(c) => {
            report(&mut out, file, &c.warnings);
            out.output = match mode {
                Mode::Check => None,
                Mode::Dump | Mode::Compile { format: Format::Json, .. } => Some(c.json()),
                Mode::Compile { .. } => Some(c.svg()),
            };
        }
        Err(d) => {
            report(&mut out, file, &d.0);
            out.failed = true;
        }
    }
    out
}

fn output_name(input: &Input, format: Format) -> PathBuf {
    let stem = input.path.as_ref().and_then(|p| p.file_stem()).map(|s| s.to_os_string()).unwrap_or_else(|| "stdin".into());
    let mut name = stem;
    name.push(if format == Format::Json { ".json" } else { ".svg" });
    PathBuf::from(name)
}

fn execute(cli: Cli, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, Fail> {
    let (common, mode, output) = match cli.command {
        Command::Compile { common, output, format, cache_dir, no_cache, verbose } => {
            (common, Mode::Compile { format, cache_dir, no_cache, verbose }, output)
        }
        Command::Check { common } => (common, Mode::Check, None),
        Command::Dump { common } => (common, Mode::Dump, None),
    };
    let options = common.options()?;
    let metrics = common.metrics()?;
    let inputs = read_inputs(&common.inputs, stdin)?;
    let outcomes = batch::map(&inputs, |i| process(i, &mode, &options, &metrics));

    let mut code = EXIT_OK;
    let format = match mode {
        Mode::Compile { format, .. } => format,
        _ => Format::Json,
    };
    for (input, o) in inputs.iter().zip(&outcomes) {
        for m in &o.messages {
            let _ = writeln!(stderr, "{m}");
        }
        if o.failed {
            code = EXIT_DIAGNOSTICS;
        }
        let Some(text) = &o.output else { continue };
        match &output {
            None => stdout.write_all(text.as_bytes()).map_err(|e| Fail(EXIT_IO, format!("stdout: {e}")))?,
            Some(path) => {
                let target = if inputs.len() > 1 {
                    fs::create_dir_all(path).map_err(|e| Fail(EXIT_IO, format!("{}: {e}", path.display())))?;
                    path.join(output_name(input, format))
                } else {
                    path.clone()
                };
                fs::write(&target, text).map_err(|e| Fail(EXIT_IO, format!("{}: {e}", target.display())))?;
            }
        }
    }
    Ok(code)
}

/// Runs the command line with explicit streams.
pub fn run_with<I, T>(argv: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli, stdin, stdout, stderr) {
        Ok(code) => code,
        Err(Fail(code, msg)) => {
            let _ = writeln!(stderr, "cdiag: {msg}");
            code
        }
    }
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(argv, &mut std::io::stdin().lock(), &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_lines() {
        let sets = parse_config("# pads\nlabelpad = 2pt\n\ncellpush{Two} += 1pt\n").unwrap();
        assert_eq!(sets.len(), 2);
        assert_eq!(sets[1].to_string(), "cellpush{Two}+=1pt");
        assert!(parse_config("labelpad\n").unwrap_err().starts_with("line 1"));
    }
}
