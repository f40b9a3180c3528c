//! Source-line counting for the programming-effort comparison.
//!
//! Every physical line is exactly one of:
//!
//! - **blank**: only whitespace (also inside a block comment),
//! - **comment**: otherwise entirely comment syntax,
//! - **code**: anything else, including code followed by a trailing comment.
//!
//! Lines between a `SLOC-REGION:<name>` marker and the next `SLOC-END` are
//! also tallied under `<name>`; the marker lines themselves are not. LF and
//! CRLF line endings count identically.

use std::collections::BTreeMap;
use std::fs;
use std::ops::AddAssign;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::{Error, Result};

const REGION_START: &str = "SLOC-REGION:";
const REGION_END: &str = "SLOC-END";

/// Comment syntax of one language family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommentProfile {
    pub name: &'static str,
    pub line_prefixes: &'static [&'static str],
    pub block: Option<(&'static str, &'static str)>,
    /// Block comments nest (Rust) rather than end at the first closer (C).
    pub nested_blocks: bool,
    /// Quote characters that open single-line string literals.
    pub quotes: &'static [char],
    pub extensions: &'static [&'static str],
}

pub const C_PROFILE: CommentProfile = CommentProfile {
    name: "c",
    line_prefixes: &["//"],
    block: Some(("/*", "*/")),
    nested_blocks: false,
    quotes: &['"'],
    extensions: &["c", "h", "cc", "cpp", "hpp", "cxx"],
};

pub const RUST_PROFILE: CommentProfile = CommentProfile {
    name: "rust",
    line_prefixes: &["//"],
    block: Some(("/*", "*/")),
    nested_blocks: true,
    quotes: &['"'],
    extensions: &["rs"],
};

pub const HASH_PROFILE: CommentProfile = CommentProfile {
    name: "hash",
    line_prefixes: &["#"],
    block: None,
    nested_blocks: false,
    quotes: &['"', '\''],
    extensions: &["py", "sh", "toml", "yml", "yaml"],
};

impl CommentProfile {
    pub fn builtin() -> [&'static CommentProfile; 3] {
        [&C_PROFILE, &RUST_PROFILE, &HASH_PROFILE]
    }

    pub fn by_name(name: &str) -> Option<&'static CommentProfile> {
        let name = if name == "python" { "hash" } else { name };
        Self::builtin().into_iter().find(|p| p.name == name)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LineCounts {
    pub code: usize,
    pub comment: usize,
    pub blank: usize,
}

impl LineCounts {
    pub fn total(&self) -> usize {
        self.code + self.comment + self.blank
    }
}

impl AddAssign for LineCounts {
    fn add_assign(&mut self, rhs: Self) {
        self.code += rhs.code;
        self.comment += rhs.comment;
        self.blank += rhs.blank;
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct FileCounts {
    pub counts: LineCounts,
    pub regions: BTreeMap<String, LineCounts>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FileReport {
    pub path: PathBuf,
    #[serde(flatten)]
    pub counts: Option<LineCounts>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub regions: BTreeMap<String, LineCounts>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SlocReport {
    pub profile: String,
    pub files: Vec<FileReport>,
    pub totals: LineCounts,
    pub regions: BTreeMap<String, LineCounts>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    Blank,
    Comment,
    Code,
}

/// Counts one file's text.
pub fn count_text(text: &str, profile: &CommentProfile) -> FileCounts {
    let mut out = FileCounts::default();
    let mut depth = 0usize;
    let mut open_regions: Vec<String> = Vec::new();

    for raw in text.split_inclusive('\n') {
        let line = raw.strip_suffix('\n').unwrap_or(raw);
        let line = line.strip_suffix('\r').unwrap_or(line);
        let kind = classify(line, profile, &mut depth);

        let counts = match kind {
            Kind::Blank => LineCounts {
                blank: 1,
                ..Default::default()
            },
            Kind::Comment => LineCounts {
                comment: 1,
                ..Default::default()
            },
            Kind::Code => LineCounts {
                code: 1,
                ..Default::default()
            },
        };
        out.counts += counts;

        let marker = kind == Kind::Comment;
        if marker && line.contains(REGION_END) {
            open_regions.pop();
            continue;
        }
        if let Some(name) = marker.then(|| region_name(line)).flatten() {
            out.regions.entry(name.clone()).or_default();
            open_regions.push(name);
            continue;
        }
        for name in &open_regions {
            *out.regions.get_mut(name).expect("opened region") += counts;
        }
    }
    out
}

fn region_name(line: &str) -> Option<String> {
    let rest = &line[line.find(REGION_START)? + REGION_START.len()..];
    let name: String = rest.chars().take_while(|c| !c.is_whitespace() && *c != '*').collect();
    (!name.is_empty()).then_some(name)
}

/// Classifies one line, updating the block-comment nesting depth.
fn classify(line: &str, profile: &CommentProfile, depth: &mut usize) -> Kind {
    if line.trim().is_empty() {
        return Kind::Blank;
    }
    let mut code = false;
    let mut rest = line;
    while !rest.is_empty() {
        if *depth > 0 {
            let (open, close) = profile.block.expect("depth > 0 implies block syntax");
            let next_close = rest.find(close);
            let next_open = if profile.nested_blocks { rest.find(open) } else { None };
            match (next_open, next_close) {
                (Some(o), c) if c.is_none_or(|c| o < c) => {
                    *depth += 1;
                    rest = &rest[o + open.len()..];
                }
                (_, Some(c)) => {
                    *depth -= 1;
                    rest = &rest[c + close.len()..];
                }
                (_, None) => break,
            }
            continue;
        }

        let trimmed = rest.trim_start();
        if trimmed.is_empty() {
            break;
        }
        if profile.line_prefixes.iter().any(|p| trimmed.starts_with(p)) {
            break;
        }
        if let Some((open, _)) = profile.block {
            if let Some(after) = trimmed.strip_prefix(open) {
                *depth += 1;
                rest = after;
                continue;
            }
        }
        code = true;
        rest = skip_token(trimmed, profile);
    }
    if code {
        Kind::Code
    } else {
        Kind::Comment
    }
}

/// Advances past one code character, or a whole string literal.
fn skip_token<'a>(s: &'a str, profile: &CommentProfile) -> &'a str {
    let mut chars = s.char_indices();
    let (_, first) = chars.next().expect("non-empty");
    if profile.quotes.contains(&first) {
        let mut escaped = false;
        for (i, c) in chars {
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == first {
                return &s[i + c.len_utf8()..];
            }
        }
        // unterminated literal: rest of the line is code
        return "";
    }
    &s[first.len_utf8()..]
}

/// Counts every path (directories are walked for files matching the
/// profile's extensions). Unreadable files become per-file error entries.
pub fn count_sloc(paths: &[PathBuf], profile: &CommentProfile) -> SlocReport {
    let mut report = SlocReport {
        profile: profile.name.to_owned(),
        ..Default::default()
    };
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            collect_dir(p, profile, &mut files);
        } else {
            files.push(p.clone());
        }
    }
    for path in files {
        match fs::read(&path) {
            Ok(bytes) => {
                let counts = count_text(&String::from_utf8_lossy(&bytes), profile);
                report.totals += counts.counts;
                for (name, c) in &counts.regions {
                    *report.regions.entry(name.clone()).or_default() += *c;
                }
                report.files.push(FileReport {
                    path,
                    counts: Some(counts.counts),
                    regions: counts.regions,
                    error: None,
                });
            }
            Err(e) => report.files.push(FileReport {
                path,
                counts: None,
                regions: BTreeMap::new(),
                error: Some(e.to_string()),
            }),
        }
    }
    report
}

fn collect_dir(dir: &Path, profile: &CommentProfile, out: &mut Vec<PathBuf>) {
    let Ok(entries) = fs::read_dir(dir) else {
        out.push(dir.to_path_buf());
        return;
    };
    let mut entries: Vec<PathBuf> = entries.filter_map(|e| e.ok().map(|e| e.path())).collect();
    entries.sort();
    for p in entries {
        if p.is_dir() {
            collect_dir(&p, profile, out);
        } else if p
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| profile.extensions.contains(&e))
        {
            out.push(p);
        }
    }
}

pub fn write_report(report: &SlocReport, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(report).map_err(|e| Error::Serialization(e.to_string()))?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}
