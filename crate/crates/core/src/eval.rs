//! Accuracy, multilabel precision/recall/F and confusion tables.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::LabeledStream;
use crate::error::{Error, Result};
use crate::tasks::{CharPrediction, LanguageSet};

fn same_len(op: &'static str, a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::Dimension {
            op,
            left: (a, 1),
            right: (b, 1),
        });
    }
    Ok(())
}

/// Fraction of positions where `preds` equals `golds`.
pub fn accuracy<T: PartialEq>(golds: &[T], preds: &[T]) -> Result<f64> {
    same_len("accuracy", golds.len(), preds.len())?;
    if golds.is_empty() {
        return Err(Error::Input("accuracy over zero items".into()));
    }
    let hits = golds.iter().zip(preds).filter(|(g, p)| g == p).count();
    Ok(hits as f64 / golds.len() as f64)
}

/// Share of characters whose predicted label matches the stream label.
pub fn per_char_accuracy(gold: &LabeledStream, pred: &CharPrediction<'_>) -> Result<f64> {
    accuracy(gold.labels(), pred.labels())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl Tally {
    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn f_score(&self) -> f64 {
        f_score(self.precision(), self.recall())
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Harmonic mean of `p` and `r`, zero when both are zero.
pub fn f_score(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiEvalResult {
    pub macro_p: f64,
    pub macro_r: f64,
    /// Mean of per-label F scores.
    pub macro_f: f64,
    pub micro_p: f64,
    pub micro_r: f64,
    pub micro_f: f64,
    /// Labels that occur in a gold or predicted set, sorted by tag.
    pub per_label: BTreeMap<String, Tally>,
}

/// Precision, recall and F over document language sets.
///
/// Macro averages run over labels seen in at least one gold or predicted
/// set.
pub fn multi_prf(golds: &[LanguageSet], preds: &[LanguageSet]) -> Result<MultiEvalResult> {
    same_len("multi_prf", golds.len(), preds.len())?;
    let mut per_label: BTreeMap<String, Tally> = BTreeMap::new();
    for (g, p) in golds.iter().zip(preds) {
        let g: BTreeSet<&str> = g.tags.iter().map(String::as_str).collect();
        let p: BTreeSet<&str> = p.tags.iter().map(String::as_str).collect();
        for t in g.union(&p) {
            let e = per_label.entry(t.to_string()).or_default();
            match (g.contains(t), p.contains(t)) {
                (true, true) => e.tp += 1,
                (false, true) => e.fp += 1,
                (true, false) => e.fn_ += 1,
                (false, false) => unreachable!(),
            }
        }
    }
    let mut pooled = Tally::default();
    let (mut sp, mut sr, mut sf) = (0.0, 0.0, 0.0);
    for t in per_label.values() {
        pooled.tp += t.tp;
        pooled.fp += t.fp;
        pooled.fn_ += t.fn_;
        sp += t.precision();
        sr += t.recall();
        sf += t.f_score();
    }
    let n = per_label.len();
    let mean = |s: f64| if n == 0 { 0.0 } else { s / n as f64 };
    Ok(MultiEvalResult {
        macro_p: mean(sp),
        macro_r: mean(sr),
        macro_f: mean(sf),
        micro_p: pooled.precision(),
        micro_r: pooled.recall(),
        micro_f: pooled.f_score(),
        per_label,
    })
}

/// Count of one unordered pair of confused tags, `first < second`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub first: String,
    pub second: String,
    pub count: usize,
}

/// The `top_k` most frequent unordered {gold, predicted} pairs among the
/// misclassified items, by count and then by pair.
pub fn confusion_pairs<S: AsRef<str>>(golds: &[S], preds: &[S], top_k: usize) -> Result<Vec<Confusion>> {
    same_len("confusion_pairs", golds.len(), preds.len())?;
    let mut counts: BTreeMap<(String, String), usize> = BTreeMap::new();
    for (g, p) in golds.iter().zip(preds) {
        let (g, p) = (g.as_ref(), p.as_ref());
        if g == p {
            continue;
        }
        let key = if g < p { (g, p) } else { (p, g) };
        *counts.entry((key.0.to_string(), key.1.to_string())).or_default() += 1;
    }
    let mut all: Vec<Confusion> = counts
        .into_iter()
        .map(|((first, second), count)| Confusion { first, second, count })
        .collect();
    // Stable sort keeps the map's lexicographic order among equal counts.
    all.sort_by_key(|c| std::cmp::Reverse(c.count));
    all.truncate(top_k);
    Ok(all)
}
