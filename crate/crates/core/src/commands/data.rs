use std::str::FromStr;

use crate::corpus::{cap_lines, dedup_sources, interleave, parse_corpus_file, ManifestEntry, SpeakerGroup};
use crate::error::Result;

/// Lines of one language after deduplication, interleaving and capping.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LanguageLines {
    pub tag: String,
    pub group: SpeakerGroup,
    /// Lines read from all sources, tag matches only.
    pub read: usize,
    /// Lines carrying another tag, ignored.
    pub foreign: usize,
    /// Lines left after deduplication.
    pub unique: usize,
    pub lines: Vec<String>,
}

impl LanguageLines {
    pub fn chars(&self) -> usize {
        self.lines.iter().map(|l| l.chars().count()).sum()
    }
}

/// Reads the sources of one manifest entry and applies dedup, round-robin
/// interleave and the group cap.
pub fn load_language(entry: &ManifestEntry) -> Result<LanguageLines> {
    let mut sources = Vec::with_capacity(entry.sources.len());
    let (mut read, mut foreign) = (0, 0);
    for path in &entry.sources {
        let parsed = parse_corpus_file(path)?;
        let mut lines = Vec::with_capacity(parsed.pairs.len());
        for (tag, text) in parsed.pairs {
            if tag == entry.tag {
                lines.push(text);
            } else {
                foreign += 1;
            }
        }
        read += lines.len();
        sources.push(lines);
    }
    if foreign > 0 {
        log::warn!("{}: ignored {foreign} line(s) tagged with another language", entry.tag);
    }
    let sources = dedup_sources(sources);
    let unique = sources.iter().map(Vec::len).sum();
    let lines = cap_lines(interleave(sources), entry.group.cap());
    Ok(LanguageLines {
        tag: entry.tag.clone(),
        group: entry.group,
        read,
        foreign,
        unique,
        lines,
    })
}

/// How documents are separated in prediction input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Delimiter {
    /// One or more blank lines end a document.
    BlankLine,
    /// Every line is a document.
    Line,
    /// An arbitrary separator string.
    Literal(String),
}

impl FromStr for Delimiter {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "blank" => Ok(Delimiter::BlankLine),
            "line" => Ok(Delimiter::Line),
            _ => match s.strip_prefix("literal:") {
                Some(lit) if !lit.is_empty() => Ok(Delimiter::Literal(unescape(lit))),
                _ => Err(format!("unknown delimiter `{s}` (expected blank, line or literal:<text>)")),
            },
        }
    }
}

fn unescape(s: &str) -> String {
    s.replace("\\n", "\n").replace("\\t", "\t")
}

/// Splits input text into documents. With [`Delimiter::BlankLine`] each
/// extra blank line yields an empty document, so that gaps stay visible
/// in the output ids.
pub fn split_documents(text: &str, delimiter: &Delimiter) -> Vec<String> {
    match delimiter {
        Delimiter::Line => text.lines().map(str::to_string).collect(),
        Delimiter::BlankLine => {
            let mut docs = Vec::new();
            let mut current: Vec<&str> = Vec::new();
            let mut open = false;
            for line in text.lines() {
                if line.trim().is_empty() {
                    if open {
                        docs.push(current.join("\n"));
                        current.clear();
                        open = false;
                    } else if !docs.is_empty() {
                        docs.push(String::new());
                    }
                } else {
                    current.push(line);
                    open = true;
                }
            }
            if open {
                docs.push(current.join("\n"));
            }
            // Blank lines at the very end are not documents.
            while docs.last().is_some_and(String::is_empty) {
                docs.pop();
            }
            docs
        }
        Delimiter::Literal(sep) => {
            let mut docs: Vec<String> = text
                .split(sep.as_str())
                .map(|d| d.trim_matches(|c| c == '\n' || c == '\r').to_string())
                .collect();
            if docs.last().is_some_and(String::is_empty) {
                docs.pop();
            }
            docs
        }
    }
}
