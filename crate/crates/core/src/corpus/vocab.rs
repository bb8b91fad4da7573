use std::collections::HashMap;

use crate::corpus::LabeledStream;
use crate::error::{Error, Result};

/// Index of the padding entry.
pub const PAD: u32 = 0;
/// Index every out-of-vocabulary codepoint encodes to.
pub const UNK: u32 = 1;

const RESERVED: usize = 2;

/// Bijection between codepoints and dense indices, after the reserved
/// `PAD` and `UNK` entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    codepoints: Vec<char>,
    index: HashMap<char, u32>,
}

impl Vocabulary {
    /// Builds from codepoints in index order; the first gets index 2.
    pub fn from_codepoints(codepoints: Vec<char>) -> Result<Self> {
        let mut index = HashMap::with_capacity(codepoints.len());
        for (i, &c) in codepoints.iter().enumerate() {
            if index.insert(c, (i + RESERVED) as u32).is_some() {
                return Err(Error::Input(format!(
                    "duplicate codepoint U+{:04X} in vocabulary",
                    c as u32
                )));
            }
        }
        Ok(Vocabulary { codepoints, index })
    }

    /// Total number of indices, reserved entries included.
    pub fn len(&self) -> usize {
        self.codepoints.len() + RESERVED
    }

    pub fn is_empty(&self) -> bool {
        self.codepoints.is_empty()
    }

    /// Real codepoints in index order (index `i + 2`).
    pub fn codepoints(&self) -> &[char] {
        &self.codepoints
    }

    #[inline]
    pub fn encode_char(&self, c: char) -> u32 {
        self.index.get(&c).copied().unwrap_or(UNK)
    }

    pub fn encode(&self, chars: &[char]) -> Vec<u32> {
        chars.iter().map(|&c| self.encode_char(c)).collect()
    }

    pub fn encode_str(&self, text: &str) -> Vec<u32> {
        text.chars().map(|c| self.encode_char(c)).collect()
    }

    /// `None` for the reserved entries and out-of-range ids.
    pub fn decode(&self, id: u32) -> Option<char> {
        (id as usize)
            .checked_sub(RESERVED)
            .and_then(|i| self.codepoints.get(i).copied())
    }
}

/// Codepoints seen at least `min_count` times, most frequent first (ties by
/// codepoint value).
pub fn build_vocab<'a, I>(streams: I, min_count: usize) -> Vocabulary
where
    I: IntoIterator<Item = &'a LabeledStream>,
{
    let mut counts: HashMap<char, usize> = HashMap::new();
    for s in streams {
        for &c in s.chars() {
            *counts.entry(c).or_default() += 1;
        }
    }
    let mut items: Vec<(char, usize)> = counts
        .into_iter()
        .filter(|&(_, n)| n >= min_count.max(1))
        .collect();
    items.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    Vocabulary::from_codepoints(items.into_iter().map(|(c, _)| c).collect())
        .expect("counted codepoints are unique")
}

/// Ordered language tags. The order is the canonical tie-break order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelSet {
    tags: Vec<String>,
    index: HashMap<String, u32>,
}

/// Three lowercase ASCII letters, or the literal `html`.
pub fn is_valid_tag(tag: &str) -> bool {
    tag == "html" || (tag.len() == 3 && tag.bytes().all(|b| b.is_ascii_lowercase()))
}

impl LabelSet {
    pub fn new<S: Into<String>>(tags: impl IntoIterator<Item = S>) -> Result<Self> {
        let mut out = LabelSet {
            tags: Vec::new(),
            index: HashMap::new(),
        };
        for t in tags {
            let t: String = t.into();
            if !is_valid_tag(&t) {
                return Err(Error::InvalidLabel(t));
            }
            if out.index.contains_key(&t) {
                return Err(Error::Input(format!("duplicate language tag `{t}`")));
            }
            out.index.insert(t.clone(), out.tags.len() as u32);
            out.tags.push(t);
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn tags(&self) -> &[String] {
        &self.tags
    }

    pub fn tag(&self, index: u32) -> &str {
        &self.tags[index as usize]
    }

    pub fn get(&self, tag: &str) -> Option<u32> {
        self.index.get(tag).copied()
    }

    pub fn index_of(&self, tag: &str) -> Result<u32> {
        self.get(tag).ok_or_else(|| Error::UnknownLabel(tag.to_string()))
    }

    pub fn contains(&self, tag: &str) -> bool {
        self.index.contains_key(tag)
    }
}
