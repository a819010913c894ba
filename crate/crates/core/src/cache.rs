//! Digest-guarded layout cache.
//!
//! A cache file is line-oriented UTF-8:
//!
//! ```text
//! cdiag-cache 1
//! sha256 <64 hex digits>
//! <width> <height> <rows> <baseline_row or -1> <gravity>
//! <x> <y> <anchor_code> <json payload>      (one per item)
//! end <item count>
//! ```
//!
//! All numbers are sp integers. The trailer makes truncation detectable.

use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::compile::{self, Compiled, Prepared};
use crate::dsl::{self, Diagnostic, Diagnostics};
use crate::fixedmath::Sp;
use crate::render::{self, Drawing, PlacedItem};
use crate::settings::CompileOptions;
use crate::styles::{Metrics, Param};

pub const MAGIC: &str = "cdiag-cache";
pub const VERSION: u32 = 1;
pub const ALGORITHM: &str = "sha256";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CacheStatus {
    Hit,
    Miss,
    Stale,
    Corrupt,
}

impl CacheStatus {
    pub fn name(self) -> &'static str {
        match self {
            CacheStatus::Hit => "hit",
            CacheStatus::Miss => "miss",
            CacheStatus::Stale => "stale",
            CacheStatus::Corrupt => "corrupt",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("not a cache file")]
    Magic,
    #[error("cache format version {0}, expected {VERSION}")]
    Version(u32),
    #[error("line {0}: {1}")]
    Malformed(usize, String),
    #[error("truncated cache file")]
    Truncated,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Digest of a diagram's canonical form; unchanged by whitespace and comments.
pub fn digest(source: &str) -> Result<String, Diagnostics> {
    let ast = dsl::parse(source)?;
    Ok(hex(&Sha256::digest(dsl::canonicalize(&ast).as_bytes())))
}

/// Digest guarding a cached compile: the canonical source plus everything
/// else that changes the output.
pub fn compile_digest(prepared: &Prepared, options: &CompileOptions, metrics: &dyn Metrics) -> String {
    let mut h = Sha256::new();
    for part in [
        dsl::canonicalize(&prepared.ast),
        options.fingerprint(),
        metrics.fingerprint(),
        format!("schema {}", render::SCHEMA_VERSION),
    ] {
        h.update(part.as_bytes());
        h.update([0u8]);
    }
    hex(&h.finalize())
}

pub fn encode(digest: &str, drawing: &Drawing) -> String {
    let mut out = format!("{MAGIC} {VERSION}\n{ALGORITHM} {digest}\n");
    out.push_str(&format!(
        "{} {} {} {} {}\n",
        drawing.width,
        drawing.height,
        drawing.rows,
        drawing.baseline_row.map_or(-1, |r| r as i64),
        drawing.gravity
    ));
    for item in &drawing.items {
        let Value::Object(mut map) = serde_json::to_value(item).expect("item serializes") else {
            unreachable!("items serialize as objects")
        };
        for key in ["x", "y", "anchor_code"] {
            map.remove(key);
        }
        out.push_str(&format!("{} {} {} {}\n", item.x, item.y, item.anchor_code, Value::Object(map)));
    }
    out.push_str(&format!("end {}\n", drawing.items.len()));
    out
}

/// Parses a cache file into its digest and drawing.
pub fn decode(text: &str) -> Result<(String, Drawing), DecodeError> {
    let mut lines = text.split('\n').enumerate().map(|(i, l)| (i + 1, l));
    let bad = |n: usize, what: &str| DecodeError::Malformed(n, what.to_string());
    let (_, first) = lines.next().ok_or(DecodeError::Magic)?;
    let version = first.strip_prefix(MAGIC).and_then(|v| v.strip_prefix(' ')).ok_or(DecodeError::Magic)?;
    let version: u32 = version.parse().map_err(|_| DecodeError::Magic)?;
    if version != VERSION {
        return Err(DecodeError::Version(version));
    }
    let (n, line) = lines.next().ok_or(DecodeError::Truncated)?;
    let digest = line
        .strip_prefix(ALGORITHM)
        .and_then(|d| d.strip_prefix(' '))
        .filter(|d| d.len() == 64 && d.bytes().all(|b| b.is_ascii_hexdigit()))
        .ok_or_else(|| bad(n, "digest"))?
        .to_string();
    let (n, line) = lines.next().ok_or(DecodeError::Truncated)?;
    let h: Vec<i64> = line.split(' ').map(str::parse).collect::<Result<_, _>>().map_err(|_| bad(n, "header"))?;
    let [w, ht, rows, base, gravity] = h[..] else { return Err(bad(n, "header")) };
    let sp = |v: i64| Sp::try_from(v).map_err(|_| bad(n, "header"));
    let mut drawing = Drawing {
        width: sp(w)?,
        height: sp(ht)?,
        rows: usize::try_from(rows).map_err(|_| bad(n, "header"))?,
        baseline_row: usize::try_from(base).ok(),
        gravity: sp(gravity)?,
        items: Vec::new(),
    };
    for (n, line) in lines.by_ref() {
        if let Some(count) = line.strip_prefix("end ") {
            if count.parse::<usize>().ok() != Some(drawing.items.len()) {
                return Err(DecodeError::Truncated);
            }
            return match lines.next() {
                Some((_, "")) if lines.next().is_none() => Ok((digest, drawing)),
                _ => Err(bad(n, "data after trailer")),
            };
        }
        if line.is_empty() {
            return Err(DecodeError::Truncated);
        }
        let mut fields = line.splitn(4, ' ');
        let mut num = || -> Result<i64, DecodeError> {
            fields.next().and_then(|f| f.parse().ok()).ok_or_else(|| bad(n, "item"))
        };
        let (x, y, anchor) = (num()?, num()?, num()?);
        let payload = fields.next().ok_or_else(|| bad(n, "item payload"))?;
        let Ok(Value::Object(mut map)) = serde_json::from_str::<Value>(payload) else {
            return Err(bad(n, "item payload"));
        };
        let mut put = |k: &str, v: i64| map.insert(k.to_string(), Value::from(v));
        put("x", x);
        put("y", y);
        put("anchor_code", anchor);
        let item: PlacedItem = serde_json::from_value(Value::Object(map)).map_err(|e| bad(n, &e.to_string()))?;
        drawing.items.push(item);
    }
    Err(DecodeError::Truncated)
}

/// Reads and checks a cache file against the expected digest.
pub fn lookup(path: &Path, expected: &str) -> (CacheStatus, Option<Drawing>) {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if matches!(e.kind(), io::ErrorKind::NotFound | io::ErrorKind::NotADirectory) => return (CacheStatus::Miss, None),
        Err(_) => return (CacheStatus::Corrupt, None),
    };
    match decode(&text) {
        Ok((digest, drawing)) if digest == expected => (CacheStatus::Hit, Some(drawing)),
        Ok(_) | Err(DecodeError::Version(_)) => (CacheStatus::Stale, None),
        Err(_) => (CacheStatus::Corrupt, None),
    }
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(suffix);
    path.with_file_name(name)
}

/// Writes through a temporary file and a rename, under an advisory lock.
pub fn write_atomic(path: &Path, text: &str) -> io::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let lock = OpenOptions::new().create(true).truncate(false).write(true).open(sibling(path, ".lock"))?;
    lock.lock()?;
    let tmp = sibling(path, &format!(".tmp{}", std::process::id()));
    let result = (|| {
        let mut f = File::create(&tmp)?;
        f.write_all(text.as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    lock.unlock()?;
    result
}

/// Result of a cached compile. On a hit only the drawing is available.
#[derive(Debug, Clone)]
pub struct Cached {
    pub status: CacheStatus,
    pub drawing: Drawing,
    pub pad: Sp,
    pub compiled: Option<Compiled>,
    pub warnings: Vec<Diagnostic>,
}

impl Cached {
    pub fn svg(&self) -> String {
        render::render_svg(&self.drawing, self.pad)
    }
}

/// Replays `cache_path` when its digest matches, else compiles and rewrites
/// it. A cache that cannot be written only adds a warning.
pub fn compile_with_cache(
    source: &str,
    cache_path: &Path,
    options: &CompileOptions,
    metrics: &dyn Metrics,
) -> Result<Cached, Diagnostics> {
    let prepared = compile::prepare(source, options)?;
    let key = compile_digest(&prepared, options, metrics);
    let pad = prepared.settings.global(Param::DiagramPad);
    let (status, hit) = lookup(cache_path, &key);
    if let Some(drawing) = hit {
        return Ok(Cached { status, drawing, pad, compiled: None, warnings: prepared.warnings });
    }
    let compiled = compile::compile_prepared(prepared, metrics)?;
    let mut warnings = compiled.warnings.clone();
    if let Err(e) = write_atomic(cache_path, &encode(&key, &compiled.drawing)) {
        warnings.push(Diagnostic::new(
            dsl::Code::CacheUnwritable,
            dsl::Loc::default(),
            format!("cannot write cache {}: {e}", cache_path.display()),
        ));
    }
    Ok(Cached { status, drawing: compiled.drawing.clone(), pad, compiled: Some(compiled), warnings })
}
