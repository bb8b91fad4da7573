//! Decisions derived from per-character labels: one language per document,
//! the set of languages in a document, and contiguous language spans.

use serde::{Deserialize, Serialize};

use crate::corpus::LabelSet;
use crate::error::{Error, Result};
use crate::model::Model;
use crate::numerics::argmax;
use crate::scalar::Scalar;

/// Share of characters a language must exceed to be reported as present.
pub const DEFAULT_THRESHOLD: f64 = 0.03;

/// Argmax label per character, optionally with the full posteriors.
#[derive(Clone, Debug, PartialEq)]
pub struct CharPrediction<'a> {
    labels: &'a LabelSet,
    argmax: Vec<u32>,
    /// `len x label_count`, renormalized over the restriction when one was
    /// given (excluded labels are zero).
    posteriors: Option<Vec<f64>>,
}

impl<'a> CharPrediction<'a> {
    /// Builds a prediction from label indices alone.
    pub fn from_labels(labels: &'a LabelSet, argmax: Vec<u32>) -> Result<Self> {
        if let Some(&bad) = argmax.iter().find(|&&i| i as usize >= labels.len()) {
            return Err(Error::Index {
                index: bad as usize,
                len: labels.len(),
            });
        }
        Ok(CharPrediction {
            labels,
            argmax,
            posteriors: None,
        })
    }

    pub fn label_set(&self) -> &'a LabelSet {
        self.labels
    }

    pub fn labels(&self) -> &[u32] {
        &self.argmax
    }

    pub fn len(&self) -> usize {
        self.argmax.len()
    }

    pub fn is_empty(&self) -> bool {
        self.argmax.is_empty()
    }

    pub fn posterior(&self, i: usize) -> Option<&[f64]> {
        let l = self.labels.len();
        self.posteriors.as_ref().map(|p| &p[i * l..(i + 1) * l])
    }

    /// Characters assigned to each label, in label order.
    pub fn counts(&self) -> Vec<usize> {
        let mut c = vec![0usize; self.labels.len()];
        for &i in &self.argmax {
            c[i as usize] += 1;
        }
        c
    }

    fn require_nonempty(&self) -> Result<()> {
        if self.argmax.is_empty() {
            Err(Error::Input("empty prediction".into()))
        } else {
            Ok(())
        }
    }
}

/// Runs the tagger over `text` and labels every character.
///
/// With `restrict_to`, the argmax only ranges over those tags and their
/// posteriors are renormalized to sum to one.
pub fn predict_chars<'m, T: Scalar>(
    model: &'m Model<T>,
    text: &str,
    restrict_to: Option<&[String]>,
    keep_posteriors: bool,
) -> Result<CharPrediction<'m>> {
    if text.is_empty() {
        return Err(Error::Input("cannot predict an empty text".into()));
    }
    let allowed: Option<Vec<usize>> = match restrict_to {
        Some(tags) => {
            if tags.is_empty() {
                return Err(Error::Input("empty label restriction".into()));
            }
            let mut idx = tags
                .iter()
                .map(|t| model.labels.index_of(t).map(|i| i as usize))
                .collect::<Result<Vec<_>>>()?;
            idx.sort_unstable();
            idx.dedup();
            Some(idx)
        }
        None => None,
    };
    let ids = model.vocab.encode_str(text);
    let post = model.posteriors(&ids)?;
    let l = model.config.label_count;
    let mut argmax_out = Vec::with_capacity(ids.len());
    let mut kept = keep_posteriors.then(|| Vec::with_capacity(ids.len() * l));
    for row in post.chunks(l) {
        let row: Vec<f64> = row.iter().map(|v| v.as_f64()).collect();
        match &allowed {
            None => {
                argmax_out.push(argmax(&row) as u32);
                if let Some(k) = kept.as_mut() {
                    k.extend_from_slice(&row);
                }
            }
            Some(idx) => {
                let sub: Vec<f64> = idx.iter().map(|&i| row[i]).collect();
                argmax_out.push(idx[argmax(&sub)] as u32);
                if let Some(k) = kept.as_mut() {
                    let total: f64 = sub.iter().sum();
                    let mut full = vec![0.0; l];
                    for (&i, &p) in idx.iter().zip(&sub) {
                        full[i] = if total > 0.0 { p / total } else { 1.0 / idx.len() as f64 };
                    }
                    k.extend_from_slice(&full);
                }
            }
        }
    }
    Ok(CharPrediction {
        labels: &model.labels,
        argmax: argmax_out,
        posteriors: kept,
    })
}

/// Tag assigned to most characters; ties go to the earlier label.
pub fn classify_document<'a>(pred: &CharPrediction<'a>) -> Result<&'a str> {
    pred.require_nonempty()?;
    let counts = pred.counts();
    Ok(pred.labels.tag(argmax(&counts) as u32))
}

/// Languages detected in a document, with the share of characters of every
/// label that occurs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LanguageSet {
    /// Detected tags in label order.
    pub tags: Vec<String>,
    /// `(tag, fraction)` for every label predicted at least once.
    pub fractions: Vec<(String, f64)>,
}

impl LanguageSet {
    pub fn contains(&self, tag: &str) -> bool {
        self.tags.iter().any(|t| t == tag)
    }
}

/// Every tag whose character share is strictly greater than `threshold`.
pub fn detect_languages(pred: &CharPrediction<'_>, threshold: f64) -> Result<LanguageSet> {
    pred.require_nonempty()?;
    let total = pred.len() as f64;
    let mut set = LanguageSet {
        tags: Vec::new(),
        fractions: Vec::new(),
    };
    for (i, &n) in pred.counts().iter().enumerate() {
        if n == 0 {
            continue;
        }
        let tag = pred.labels.tag(i as u32).to_string();
        let frac = n as f64 / total;
        if frac > threshold {
            set.tags.push(tag.clone());
        }
        set.fractions.push((tag, frac));
    }
    Ok(set)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    /// Inclusive character offset.
    pub start: usize,
    /// Exclusive character offset.
    pub end: usize,
    pub tag: String,
}

/// Posterior of `first` against `second`, renormalized over the pair, per
/// character. `1 - p` is the share of `second`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairTrace {
    pub first: String,
    pub second: String,
    pub probs: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpanReport {
    pub spans: Vec<Span>,
    pub trace: Option<PairTrace>,
}

impl SpanReport {
    /// Checks that the spans tile `[0, len)` with distinct adjacent tags.
    pub fn check(&self, len: usize) -> Result<()> {
        let mut pos = 0;
        for (i, s) in self.spans.iter().enumerate() {
            if s.start != pos || s.end <= s.start {
                return Err(Error::Invariant(format!(
                    "span {i} [{}, {}) does not continue at {pos}",
                    s.start, s.end
                )));
            }
            if i > 0 && self.spans[i - 1].tag == s.tag {
                return Err(Error::Invariant(format!("spans {} and {i} share tag {}", i - 1, s.tag)));
            }
            pos = s.end;
        }
        if pos != len {
            return Err(Error::Invariant(format!("spans cover {pos} of {len} characters")));
        }
        Ok(())
    }
}

/// Maximal runs of equal labels, after folding runs shorter than `min_span`
/// into a neighbor.
///
/// Folding repeatedly takes the shortest run below `min_span` (leftmost on
/// ties) and merges it into whichever neighbor is longer (the left one on
/// ties), until every run is long enough or only one run remains.
pub fn partition_text(pred: &CharPrediction<'_>, min_span: usize) -> Result<SpanReport> {
    pred.require_nonempty()?;
    let mut runs: Vec<(u32, usize)> = Vec::new();
    for &l in pred.labels() {
        match runs.last_mut() {
            Some((tag, n)) if *tag == l => *n += 1,
            _ => runs.push((l, 1)),
        }
    }
    loop {
        let short = runs
            .iter()
            .enumerate()
            .filter(|(_, r)| r.1 < min_span)
            .min_by_key(|(i, r)| (r.1, *i))
            .map(|(i, _)| i);
        let Some(i) = short else { break };
        if runs.len() == 1 {
            break;
        }
        let left = i.checked_sub(1).map(|j| runs[j].1);
        let right = runs.get(i + 1).map(|r| r.1);
        let target = match (left, right) {
            (Some(a), Some(b)) => {
                if b > a {
                    i + 1
                } else {
                    i - 1
                }
            }
            (Some(_), None) => i - 1,
            (None, _) => i + 1,
        };
        let n = runs[i].1;
        runs[target].1 += n;
        runs.remove(i);
        // Coalesce equal neighbors created by the removal.
        let mut merged: Vec<(u32, usize)> = Vec::with_capacity(runs.len());
        for r in runs {
            match merged.last_mut() {
                Some(last) if last.0 == r.0 => last.1 += r.1,
                _ => merged.push(r),
            }
        }
        runs = merged;
    }
    let mut spans = Vec::with_capacity(runs.len());
    let mut pos = 0;
    for (label, n) in runs {
        spans.push(Span {
            start: pos,
            end: pos + n,
            tag: pred.labels.tag(label).to_string(),
        });
        pos += n;
    }
    Ok(SpanReport { spans, trace: None })
}

/// Per-character posterior of `first` renormalized over `{first, second}`.
/// Needs a prediction made with `keep_posteriors`.
pub fn posterior_trace(pred: &CharPrediction<'_>, first: &str, second: &str) -> Result<PairTrace> {
    let a = pred.labels.index_of(first)? as usize;
    let b = pred.labels.index_of(second)? as usize;
    if pred.posteriors.is_none() {
        return Err(Error::Input("prediction was made without posteriors".into()));
    }
    let probs = (0..pred.len())
        .map(|i| {
            let p = pred.posterior(i).expect("checked above");
            let s = p[a] + p[b];
            if s > 0.0 {
                p[a] / s
            } else {
                0.5
            }
        })
        .collect();
    Ok(PairTrace {
        first: first.to_string(),
        second: second.to_string(),
        probs,
    })
}
