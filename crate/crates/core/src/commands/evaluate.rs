use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::commands::Precision;
use crate::corpus::{is_line_break, parse_corpus_str, read_utf8};
use crate::error::{Error, Result};
use crate::eval::{accuracy, confusion_pairs, multi_prf, Confusion, MultiEvalResult};
use crate::model::Model;
use crate::model_file::load_model;
use crate::records::Task;
use crate::scalar::Scalar;
use crate::tasks::{classify_document, detect_languages, partition_text, predict_chars, LanguageSet};

#[derive(Clone, Debug, PartialEq)]
pub struct EvalOptions {
    pub model: PathBuf,
    /// Labeled corpus. `mono`: `tag\ttext` per line, one document each.
    /// `multi`: `tag1,tag2\ttext`. `spans`: `tag\ttext` lines, documents
    /// separated by blank lines, gold labels per character.
    pub input: PathBuf,
    pub task: Task,
    pub threshold: f64,
    /// Keep only documents whose gold tags all lie in this set, and predict
    /// among these tags only.
    pub restrict: Option<Vec<String>>,
    pub min_span: usize,
    pub top_k: usize,
    /// Also write the report as JSON here.
    pub json: Option<PathBuf>,
    pub precision: Precision,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub task: Task,
    /// Documents scored.
    pub documents: usize,
    /// Documents dropped by the restriction.
    pub filtered: usize,
    /// Documents without text, not scored.
    pub empty: usize,
    /// Scored documents with a gold tag the model does not know.
    pub unknown_gold: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multi: Option<MultiEvalResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub characters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub char_accuracy: Option<f64>,
    pub confusions: Vec<Confusion>,
}

impl EvalReport {
    fn new(task: Task) -> Self {
        EvalReport {
            task,
            documents: 0,
            filtered: 0,
            empty: 0,
            unknown_gold: 0,
            accuracy: None,
            multi: None,
            characters: None,
            char_accuracy: None,
            confusions: Vec::new(),
        }
    }

    /// Flat `key:value` lines.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "task:{}", self.task);
        let _ = writeln!(s, "documents:{}", self.documents);
        let _ = writeln!(s, "filtered:{}", self.filtered);
        let _ = writeln!(s, "empty:{}", self.empty);
        let _ = writeln!(s, "unknown_gold:{}", self.unknown_gold);
        if let Some(a) = self.accuracy {
            let _ = writeln!(s, "accuracy:{a:.6}");
        }
        if let Some(m) = &self.multi {
            for (k, v) in [
                ("macro_p", m.macro_p),
                ("macro_r", m.macro_r),
                ("macro_f", m.macro_f),
                ("micro_p", m.micro_p),
                ("micro_r", m.micro_r),
                ("micro_f", m.micro_f),
            ] {
                let _ = writeln!(s, "{k}:{v:.6}");
            }
            let _ = writeln!(s, "macro_labels:gold_or_predicted");
            for (tag, t) in &m.per_label {
                let _ = writeln!(s, "label:{tag} tp:{} fp:{} fn:{}", t.tp, t.fp, t.fn_);
            }
        }
        if let Some(n) = self.characters {
            let _ = writeln!(s, "characters:{n}");
        }
        if let Some(a) = self.char_accuracy {
            let _ = writeln!(s, "char_accuracy:{a:.6}");
        }
        for c in &self.confusions {
            let _ = writeln!(s, "confusion:{}/{}:{}", c.first, c.second, c.count);
        }
        s
    }
}

fn allowed(restrict: &Option<Vec<String>>, tags: &[String]) -> bool {
    restrict
        .as_ref()
        .is_none_or(|r| tags.iter().all(|t| r.contains(t)))
}

fn flatten(text: &str) -> String {
    text.chars().map(|c| if is_line_break(c) { ' ' } else { c }).collect()
}

/// Scores `model` on a labeled corpus given as text.
pub fn evaluate_model<T: Scalar>(model: &Model<T>, corpus: &str, options: &EvalOptions) -> Result<EvalReport> {
    if let Some(tags) = &options.restrict {
        for t in tags {
            model.labels.index_of(t)?;
        }
    }
    let restrict = options.restrict.as_deref();
    let mut report = EvalReport::new(options.task);
    match options.task {
        Task::Mono | Task::Multi => {
            let parsed = parse_corpus_str(corpus);
            if !parsed.skipped.is_empty() {
                log::warn!("skipped {} line(s) without a tab", parsed.skipped.len());
            }
            let (mut gold_tags, mut pred_tags) = (Vec::new(), Vec::new());
            let (mut gold_sets, mut pred_sets) = (Vec::new(), Vec::new());
            for (tag_field, text) in &parsed.pairs {
                let mut gold: Vec<String> = tag_field
                    .split(',')
                    .map(|t| t.trim().to_string())
                    .filter(|t| !t.is_empty())
                    .collect();
                if options.task == Task::Mono && gold.len() != 1 {
                    return Err(Error::Input(format!("mono evaluation needs one gold tag, got `{tag_field}`")));
                }
                gold.sort_by_key(|t| model.labels.get(t).unwrap_or(u32::MAX));
                gold.dedup();
                if !allowed(&options.restrict, &gold) {
                    report.filtered += 1;
                    continue;
                }
                if text.is_empty() {
                    report.empty += 1;
                    continue;
                }
                if gold.iter().any(|t| !model.labels.contains(t)) {
                    report.unknown_gold += 1;
                }
                let pred = predict_chars(model, &flatten(text), restrict, false)?;
                report.documents += 1;
                if options.task == Task::Mono {
                    gold_tags.push(gold.remove(0));
                    pred_tags.push(classify_document(&pred)?.to_string());
                } else {
                    gold_sets.push(LanguageSet {
                        tags: gold,
                        fractions: Vec::new(),
                    });
                    pred_sets.push(detect_languages(&pred, options.threshold)?);
                }
            }
            if report.unknown_gold > 0 {
                log::warn!("{} document(s) have gold tags unknown to the model", report.unknown_gold);
            }
            if report.documents == 0 {
                return Err(Error::Input("no documents to evaluate".into()));
            }
            if options.task == Task::Mono {
                report.accuracy = Some(accuracy(&gold_tags, &pred_tags)?);
                report.confusions = confusion_pairs(&gold_tags, &pred_tags, options.top_k)?;
            } else {
                report.multi = Some(multi_prf(&gold_sets, &pred_sets)?);
            }
        }
        Task::Spans => {
            let (mut hits, mut total) = (0usize, 0usize);
            for block in corpus_blocks(corpus) {
                let parsed = parse_corpus_str(&block);
                let tags: Vec<String> = parsed.pairs.iter().map(|(t, _)| t.clone()).collect();
                if !allowed(&options.restrict, &tags) {
                    report.filtered += 1;
                    continue;
                }
                let mut text = String::new();
                let mut gold: Vec<Option<u32>> = Vec::new();
                for (tag, line) in &parsed.pairs {
                    let idx = model.labels.get(tag);
                    for c in line.chars().filter(|&c| !is_line_break(c)) {
                        text.push(c);
                        gold.push(idx);
                    }
                }
                if text.is_empty() {
                    report.empty += 1;
                    continue;
                }
                if gold.iter().any(Option::is_none) {
                    report.unknown_gold += 1;
                }
                let pred = predict_chars(model, &text, restrict, false)?;
                let spans = partition_text(&pred, options.min_span)?;
                let mut pos = 0;
                for s in &spans.spans {
                    let idx = model.labels.get(&s.tag);
                    hits += gold[s.start..s.end].iter().filter(|g| **g == idx).count();
                    pos = s.end;
                }
                debug_assert_eq!(pos, gold.len());
                total += gold.len();
                report.documents += 1;
            }
            if total == 0 {
                return Err(Error::Input("no characters to evaluate".into()));
            }
            report.characters = Some(total);
            report.char_accuracy = Some(hits as f64 / total as f64);
        }
    }
    Ok(report)
}

/// Groups of non-blank lines.
fn corpus_blocks(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur: Vec<&str> = Vec::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            if !cur.is_empty() {
                out.push(cur.join("\n"));
                cur.clear();
            }
        } else {
            cur.push(line);
        }
    }
    if !cur.is_empty() {
        out.push(cur.join("\n"));
    }
    out
}

/// Prints the report as `key:value` lines and optionally writes it as JSON.
pub fn cmd_eval(options: &EvalOptions, out: &mut dyn Write) -> Result<EvalReport> {
    let model = load_model(&options.model)?;
    let corpus = read_utf8(&options.input)?;
    let report = match options.precision {
        Precision::Single => evaluate_model(&model, &corpus, options)?,
        Precision::Double => evaluate_model(&model.cast::<f64>(), &corpus, options)?,
    };
    out.write_all(report.to_text().as_bytes())
        .map_err(|e| Error::io("<output>", e))?;
    if let Some(path) = &options.json {
        let json = serde_json::to_string_pretty(&report).expect("reports always serialize");
        std::fs::write(path, json + "\n").map_err(|e| Error::io(path, e))?;
    }
    Ok(report)
}
