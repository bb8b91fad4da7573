use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::corpus::is_valid_tag;
use crate::error::{Error, Result};

/// Tag/text pairs of a corpus file plus the lines that could not be parsed.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ParsedCorpus {
    pub pairs: Vec<(String, String)>,
    /// 1-based numbers of lines without a tab separator.
    pub skipped: Vec<usize>,
}

impl ParsedCorpus {
    pub fn summary(&self) -> String {
        format!("parsed:{} skipped:{}", self.pairs.len(), self.skipped.len())
    }
}

/// Parses `<tag>\t<text>` lines. Blank lines are ignored; lines without a
/// tab are skipped and recorded.
pub fn parse_corpus_str(text: &str) -> ParsedCorpus {
    let mut out = ParsedCorpus::default();
    for (i, line) in text.split('\n').enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() {
            continue;
        }
        match line.split_once('\t') {
            Some((tag, body)) => out.pairs.push((tag.to_string(), body.to_string())),
            None => out.skipped.push(i + 1),
        }
    }
    out
}

pub(crate) fn read_utf8(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    String::from_utf8(bytes).map_err(|e| Error::Encoding {
        path: path.to_path_buf(),
        offset: e.utf8_error().valid_up_to(),
    })
}

pub fn parse_corpus_file(path: impl AsRef<Path>) -> Result<ParsedCorpus> {
    let path = path.as_ref();
    let parsed = parse_corpus_str(&read_utf8(path)?);
    if !parsed.skipped.is_empty() {
        log::warn!(
            "{}: skipped {} malformed line(s), first at line {}",
            path.display(),
            parsed.skipped.len(),
            parsed.skipped[0]
        );
    }
    Ok(parsed)
}

/// Speaker-population tier of a language, which fixes its character budget.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SpeakerGroup {
    Large,
    Medium,
    Small,
}

impl SpeakerGroup {
    pub fn cap(self) -> usize {
        match self {
            SpeakerGroup::Large => 10_000_000,
            SpeakerGroup::Medium => 5_000_000,
            SpeakerGroup::Small => 1_000_000,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SpeakerGroup::Large => "large",
            SpeakerGroup::Medium => "medium",
            SpeakerGroup::Small => "small",
        }
    }
}

impl fmt::Display for SpeakerGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SpeakerGroup {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "large" => Ok(SpeakerGroup::Large),
            "medium" => Ok(SpeakerGroup::Medium),
            "small" => Ok(SpeakerGroup::Small),
            other => Err(format!("unknown speaker group `{other}` (expected large, medium or small)")),
        }
    }
}

/// One language of a training build.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManifestEntry {
    pub tag: String,
    pub group: SpeakerGroup,
    pub sources: Vec<PathBuf>,
}

/// Parses `<tag>\t<group>\t<path1>[,<path2>...]` lines. Relative paths are
/// resolved against `base`. Blank lines and `#` comments are ignored.
pub fn parse_manifest_str(text: &str, path: &Path, base: &Path) -> Result<Vec<ManifestEntry>> {
    let mut out: Vec<ManifestEntry> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let err = |message: String| Error::Format {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(err(format!(
                "expected 3 tab-separated fields (tag, group, paths), found {}",
                fields.len()
            )));
        }
        let tag = fields[0].trim();
        if !is_valid_tag(tag) {
            return Err(err(format!("invalid language tag `{tag}`")));
        }
        if out.iter().any(|e| e.tag == tag) {
            return Err(err(format!("language `{tag}` listed twice")));
        }
        let group: SpeakerGroup = fields[1].trim().parse().map_err(err)?;
        let sources: Vec<PathBuf> = fields[2]
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| base.join(s))
            .collect();
        if sources.is_empty() {
            return Err(err("no source files listed".into()));
        }
        out.push(ManifestEntry {
            tag: tag.to_string(),
            group,
            sources,
        });
    }
    Ok(out)
}

pub fn parse_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestEntry>> {
    let path = path.as_ref();
    let text = read_utf8(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_manifest_str(&text, path, base)
}
