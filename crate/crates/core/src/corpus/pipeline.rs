use std::collections::HashSet;

use unicode_script::{Script, UnicodeScript};

use crate::corpus::{LabelSet, SpeakerGroup};
use crate::error::{Error, Result};
use crate::numerics::Rng;

/// Newline-free character sequence with one label index per character.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LabeledStream {
    chars: Vec<char>,
    labels: Vec<u32>,
}

impl LabeledStream {
    pub fn new(chars: Vec<char>, labels: Vec<u32>) -> Result<Self> {
        if chars.len() != labels.len() {
            return Err(Error::Dimension {
                op: "LabeledStream::new",
                left: (chars.len(), 1),
                right: (labels.len(), 1),
            });
        }
        if let Some(pos) = chars.iter().position(|&c| c == '\n' || c == '\r') {
            return Err(Error::Input(format!("line break at stream position {pos}")));
        }
        Ok(LabeledStream { chars, labels })
    }

    pub fn chars(&self) -> &[char] {
        &self.chars
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.chars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chars.is_empty()
    }
}

/// Codepoints removed from every line before it enters a stream.
pub fn is_line_break(c: char) -> bool {
    matches!(
        c,
        '\n' | '\r' | '\u{0B}' | '\u{0C}' | '\u{85}' | '\u{2028}' | '\u{2029}'
    )
}

/// Drops exact duplicates, keeping first occurrences in order.
pub fn dedup_lines(lines: Vec<String>) -> Vec<String> {
    let mut seen = HashSet::with_capacity(lines.len());
    lines.into_iter().filter(|l| seen.insert(l.clone())).collect()
}

/// Deduplicates across all sources of one language; a line already seen in
/// an earlier source (or earlier in the same source) is dropped.
pub fn dedup_sources(sources: Vec<Vec<String>>) -> Vec<Vec<String>> {
    let mut seen = HashSet::new();
    sources
        .into_iter()
        .map(|src| src.into_iter().filter(|l| seen.insert(l.clone())).collect())
        .collect()
}

/// Round-robin merge: first line of every source, then every second line,
/// and so on. Exhausted sources are skipped.
pub fn interleave(sources: Vec<Vec<String>>) -> Vec<String> {
    let total = sources.iter().map(Vec::len).sum();
    let mut iters: Vec<_> = sources.into_iter().map(Vec::into_iter).collect();
    let mut out = Vec::with_capacity(total);
    while out.len() < total {
        for it in iters.iter_mut() {
            if let Some(line) = it.next() {
                out.push(line);
            }
        }
    }
    out
}

/// Longest prefix of whole lines whose total character count is `<= cap`.
pub fn cap_lines(lines: Vec<String>, cap: usize) -> Vec<String> {
    let mut used = 0usize;
    let mut out = Vec::new();
    for line in lines {
        let n = line.chars().count();
        if used + n > cap {
            break;
        }
        used += n;
        out.push(line);
    }
    out
}

/// Interleaves the sources of one language and truncates to the character
/// budget of its speaker group.
pub fn cap_language(sources: Vec<Vec<String>>, group: SpeakerGroup) -> Vec<String> {
    cap_lines(interleave(sources), group.cap())
}

/// Concatenates line texts into one stream, optionally shuffling the lines
/// first. Line breaks inside texts are dropped; every character carries the
/// label of its line.
pub fn build_stream(
    pairs: &[(String, String)],
    labels: &LabelSet,
    shuffle: bool,
    rng: &mut Rng,
) -> Result<LabeledStream> {
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    if shuffle {
        rng.shuffle(&mut order);
    }
    let mut chars = Vec::new();
    let mut ids = Vec::new();
    for i in order {
        let (tag, text) = &pairs[i];
        let label = labels.index_of(tag)?;
        for c in text.chars().filter(|&c| !is_line_break(c)) {
            chars.push(c);
            ids.push(label);
        }
    }
    LabeledStream::new(chars, ids)
}

/// Seeded line-level split into `(train, dev, test)`, each keeping the input
/// order. Part sizes are `round(fraction * n)`.
pub fn split_lines<T>(items: Vec<T>, dev_fraction: f64, test_fraction: f64, rng: &mut Rng) -> Result<(Vec<T>, Vec<T>, Vec<T>)> {
    let ok = |f: f64| (0.0..1.0).contains(&f);
    if !ok(dev_fraction) || !ok(test_fraction) || dev_fraction + test_fraction >= 1.0 {
        return Err(Error::Parameter(format!(
            "split fractions must be in [0, 1) with sum < 1, got dev {dev_fraction} test {test_fraction}"
        )));
    }
    let n = items.len();
    let n_dev = (dev_fraction * n as f64).round() as usize;
    let n_test = ((test_fraction * n as f64).round() as usize).min(n - n_dev);
    let mut order: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut order);
    // 0 = train, 1 = dev, 2 = test
    let mut part = vec![0u8; n];
    for &i in &order[..n_dev] {
        part[i] = 1;
    }
    for &i in &order[n_dev..n_dev + n_test] {
        part[i] = 2;
    }
    let (mut train, mut dev, mut test) = (Vec::new(), Vec::new(), Vec::new());
    for (item, p) in items.into_iter().zip(part) {
        match p {
            1 => dev.push(item),
            2 => test.push(item),
            _ => train.push(item),
        }
    }
    Ok((train, dev, test))
}

fn counts_as_script(s: Script) -> bool {
    !matches!(s, Script::Common | Script::Inherited | Script::Unknown)
}

/// Most frequent script among the characters of `text`, ignoring common
/// characters (digits, punctuation, spaces). Ties go to the script seen first.
pub fn majority_script(text: &str) -> Option<Script> {
    let mut counts: Vec<(Script, usize)> = Vec::new();
    for c in text.chars() {
        let s = c.script();
        if !counts_as_script(s) {
            continue;
        }
        match counts.iter_mut().find(|(k, _)| *k == s) {
            Some((_, n)) => *n += 1,
            None => counts.push((s, 1)),
        }
    }
    let mut best: Option<(Script, usize)> = None;
    for (s, n) in counts {
        if best.is_none_or(|(_, m)| n > m) {
            best = Some((s, n));
        }
    }
    best.map(|(s, _)| s)
}

/// Majority script over all lines of a language.
pub fn dominant_script(lines: &[String]) -> Option<Script> {
    majority_script(&lines.join(" "))
}

/// Keeps lines whose majority script is `expected`; lines without any
/// script-bearing character are kept. Returns the kept lines and the number
/// dropped.
pub fn filter_majority_script(lines: Vec<String>, expected: Script) -> (Vec<String>, usize) {
    let before = lines.len();
    let kept: Vec<String> = lines
        .into_iter()
        .filter(|l| majority_script(l).is_none_or(|s| s == expected))
        .collect();
    let dropped = before - kept.len();
    (kept, dropped)
}

/// Drops every line that contains a character of the `forbidden` script.
pub fn filter_foreign_script(lines: Vec<String>, forbidden: Script) -> (Vec<String>, usize) {
    let before = lines.len();
    let kept: Vec<String> = lines
        .into_iter()
        .filter(|l| !l.chars().any(|c| c.script() == forbidden))
        .collect();
    let dropped = before - kept.len();
    (kept, dropped)
}
