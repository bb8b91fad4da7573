use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::commands::load_language;
use crate::corpus::{parse_manifest, split_lines};
use crate::error::{Error, Result};
use crate::numerics::Rng;

#[derive(Clone, Debug, PartialEq)]
pub struct BuildOptions {
    pub manifest: PathBuf,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub dev_fraction: f64,
    pub test_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LanguageSummary {
    pub tag: String,
    pub group: String,
    pub cap: usize,
    pub read: usize,
    pub foreign: usize,
    pub unique: usize,
    pub lines: usize,
    pub chars: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BuildSummary {
    pub languages: Vec<LanguageSummary>,
    /// `(name, lines, chars)` for train, dev and test.
    pub splits: Vec<(String, usize, usize)>,
}

impl BuildSummary {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for l in &self.languages {
            let _ = writeln!(
                s,
                "language:{} group:{} cap:{} read:{} foreign:{} unique:{} lines:{} chars:{}",
                l.tag, l.group, l.cap, l.read, l.foreign, l.unique, l.lines, l.chars
            );
        }
        for (name, lines, chars) in &self.splits {
            let _ = writeln!(s, "split:{name} lines:{lines} chars:{chars}");
        }
        s
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Runs dedup, interleave and capping per language, shuffles all lines
/// together and writes `train.txt`, `dev.txt`, `test.txt` (corpus format)
/// and `summary.txt` into `out_dir`.
pub fn cmd_build_corpus(options: &BuildOptions) -> Result<BuildSummary> {
    let entries = parse_manifest(&options.manifest)?;
    if entries.is_empty() {
        return Err(Error::Input(format!("{}: manifest lists no languages", options.manifest.display())));
    }
    let mut languages = Vec::new();
    let mut pairs: Vec<(String, String)> = Vec::new();
    for entry in &entries {
        let lang = load_language(entry)?;
        languages.push(LanguageSummary {
            tag: lang.tag.clone(),
            group: entry.group.name().to_string(),
            cap: entry.group.cap(),
            read: lang.read,
            foreign: lang.foreign,
            unique: lang.unique,
            lines: lang.lines.len(),
            chars: lang.chars(),
        });
        pairs.extend(lang.lines.into_iter().map(|l| (entry.tag.clone(), l)));
    }
    let mut rng = Rng::new(options.seed);
    rng.shuffle(&mut pairs);
    let (train, dev, test) = split_lines(pairs, options.dev_fraction, options.test_fraction, &mut rng)?;
    std::fs::create_dir_all(&options.out_dir).map_err(|e| Error::io(&options.out_dir, e))?;
    let mut splits = Vec::new();
    for (name, part) in [("train", &train), ("dev", &dev), ("test", &test)] {
        let mut text = String::new();
        let mut chars = 0;
        for (tag, line) in part.iter() {
            text.push_str(tag);
            text.push('\t');
            text.push_str(line);
            text.push('\n');
            chars += line.chars().count();
        }
        write_file(&options.out_dir.join(format!("{name}.txt")), &text)?;
        splits.push((name.to_string(), part.len(), chars));
    }
    let summary = BuildSummary { languages, splits };
    write_file(&options.out_dir.join("summary.txt"), &summary.to_text())?;
    Ok(summary)
}
