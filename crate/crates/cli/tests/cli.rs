use std::fs;
use std::path::Path;

use cdiag::{run_with, EXIT_DIAGNOSTICS, EXIT_IO, EXIT_OK, EXIT_USAGE};

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn cdiag(args: &[&str], stdin: &str) -> Run {
    let argv = std::iter::once("cdiag").chain(args.iter().copied());
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run_with(argv, &mut stdin.as_bytes(), &mut out, &mut err);
    Run { code, out: String::from_utf8(out).unwrap(), err: String::from_utf8(err).unwrap() }
}

fn dump_grid(args: &[&str], src: &str) -> serde_like::Grid {
    let mut full = vec!["dump"];
    full.extend_from_slice(args);
    full.push("-");
    let r = cdiag(&full, src);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    serde_like::grid(&r.out)
}

/// Just enough JSON reading to pull the column and row positions.
mod serde_like {
    pub struct Grid {
        pub x: Vec<i64>,
        pub y: Vec<i64>,
    }

    fn array(json: &str, key: &str) -> Vec<i64> {
        let grid = &json[json.find("\"grid\"").unwrap()..];
        let at = grid.find(&format!("\"{key}\": [")).unwrap() + key.len() + 5;
        let body = &grid[at..at + grid[at..].find(']').unwrap()];
        body.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|s| s.parse().unwrap()).collect()
    }

    pub fn grid(json: &str) -> Grid {
        Grid { x: array(json, "x"), y: array(json, "y") }
    }
}

const SQUARE: &str = "A & \\rTo^{f} & B \\\\\n\\dTo & & \\dTo \\\\\nC & \\rTo_{g} & D\n";

#[test]
fn compiles_stdin_to_svg() {
    let r = cdiag(&["compile", "-"], SQUARE);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    assert!(r.out.starts_with("<svg "));
    assert_eq!(r.out.matches("class=\"arrowhead\"").count(), 4);
    assert!(r.err.is_empty());
}

#[test]
fn exit_codes() {
    let bad = cdiag(&["check", "-"], "A & \\rTo{ & B");
    assert_eq!(bad.code, EXIT_DIAGNOSTICS);
    assert!(bad.err.contains("<stdin>:1:9: error[E002]"), "{}", bad.err);
    assert_eq!(cdiag(&["check", "/nonexistent/x.kd"], "").code, EXIT_IO);
    assert_eq!(cdiag(&["compile", "--bogus", "-"], "").code, EXIT_USAGE);
    assert_eq!(cdiag(&["compile", "--grid", "3", "-"], "").code, EXIT_USAGE);
    assert_eq!(cdiag(&["--help"], "").code, EXIT_OK);
    assert_eq!(cdiag(&["check", "-"], SQUARE).code, EXIT_OK);
}

#[test]
fn warnings_do_not_fail() {
    let r = cdiag(&["check", "-"], "A\\gr{2} & B");
    assert_eq!(r.code, EXIT_OK);
    assert!(r.err.contains("warning[W101]"), "{}", r.err);
}

#[test]
fn presets_and_overrides() {
    let src = "A & \\rTo & B";
    // The fixed preset spaces columns by xgrid, 1cm by default.
    let fixed = dump_grid(&[], src);
    assert_eq!(fixed.x[1] - fixed.x[0], 1_864_679);
    let wide = dump_grid(&["--xgrid", "2cm"], src);
    // Lengths scale the truncated unit: 2 x 1864679.
    assert_eq!(wide.x[1] - wide.x[0], 3_729_358);
    // --set comes after --preset and the preset's own values.
    let set = dump_grid(&["--preset", "diagram", "--set", "xgrid=30pt"], src);
    assert_eq!(set.x[1] - set.x[0], 30 * 65536);
    // Only flexible layout makes room for a long label.
    let long = "A & \\rTo^{a rather long label} & B";
    let flex = dump_grid(&["--flexible"], long);
    let rigid = dump_grid(&[], long);
    assert_eq!(rigid.x, fixed.x);
    assert!(flex.x[2] - flex.x[0] > rigid.x[2] - rigid.x[0]);
    let back = dump_grid(&["--flexible", "--fixed"], long);
    assert_eq!(back.x, rigid.x);
    let dg = dump_grid(&["--preset", "dg"], src);
    let diag = dump_grid(&[], &format!("\\Dg {src}"));
    assert_eq!(dg.x, diag.x);
}

#[test]
fn config_file_applies() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cdiag.conf");
    fs::write(&cfg, "# spacing\nxgrid = 40pt\n% rows\nygrid=20pt\n").unwrap();
    let g = dump_grid(&["--config", cfg.to_str().unwrap()], "A & B \\\\ C & D");
    assert_eq!(g.x[1] - g.x[0], 40 * 65536);
    assert_eq!(g.y[1] - g.y[0], 20 * 65536);
    fs::write(&cfg, "xgrid 40pt\n").unwrap();
    assert_eq!(cdiag(&["check", "--config", cfg.to_str().unwrap(), "-"], "A").code, EXIT_USAGE);
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn cache_is_used_and_invisible() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "square.kd", SQUARE);
    let first = cdiag(&["compile", "-v", &file], "");
    assert!(first.err.contains("cache miss"), "{}", first.err);
    let second = cdiag(&["compile", "-v", &file], "");
    assert!(second.err.contains("cache hit"), "{}", second.err);
    assert!(dir.path().join(".cdiag-cache/square.kd.cache").exists());
    let uncached = cdiag(&["compile", "--no-cache", &file], "");
    assert_eq!(first.out, second.out);
    assert_eq!(first.out, uncached.out);
    // Options are part of the key.
    let dotted = cdiag(&["compile", "-v", "--dotted", &file], "");
    assert!(dotted.err.contains("cache stale"), "{}", dotted.err);
    assert_ne!(dotted.out, first.out);
}

#[test]
fn several_inputs_to_a_directory() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.kd", SQUARE);
    let b = write(dir.path(), "b.kd", "X & \\rEpi & Y");
    let out = dir.path().join("out");
    let r = cdiag(&["compile", "--no-cache", "-o", out.to_str().unwrap(), &a, &b], "");
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    assert!(fs::read_to_string(out.join("a.svg")).unwrap().starts_with("<svg "));
    assert!(fs::read_to_string(out.join("b.svg")).unwrap().contains(">Y</text>"));
    let json = cdiag(&["compile", "--format", "json", &b], "");
    assert!(json.out.contains("\"version\": 1"), "{}", json.out);
}

#[test]
fn one_bad_input_does_not_stop_the_rest() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "good.kd", SQUARE);
    let bad = write(dir.path(), "bad.kd", "A & \\rFoo & B");
    let r = cdiag(&["compile", "--no-cache", &bad, &good], "");
    assert_eq!(r.code, EXIT_DIAGNOSTICS);
    assert!(r.err.contains("bad.kd:1:5: error[E011]"), "{}", r.err);
    assert!(r.out.starts_with("<svg "));
}
