use std::io::{Read, Write};
use std::path::PathBuf;

use crate::commands::{split_documents, Delimiter, Precision};
use crate::corpus::{is_line_break, read_utf8};
use crate::error::{Error, Result};
use crate::model::Model;
use crate::model_file::load_model;
use crate::records::{LanguageShare, PredictionRecord, Task};
use crate::scalar::Scalar;
use crate::tasks::{classify_document, detect_languages, partition_text, predict_chars};

#[derive(Clone, Debug, PartialEq)]
pub struct PredictOptions {
    pub model: PathBuf,
    /// Standard input when `None`.
    pub input: Option<PathBuf>,
    pub task: Task,
    pub threshold: f64,
    pub restrict: Option<Vec<String>>,
    pub min_span: usize,
    pub delimiter: Delimiter,
    pub precision: Precision,
}

/// Record for one document. Line breaks count as spaces so that span
/// offsets index the characters of the document as given.
pub fn predict_document<T: Scalar>(
    model: &Model<T>,
    id: usize,
    doc: &str,
    options: &PredictOptions,
) -> Result<PredictionRecord> {
    if doc.is_empty() {
        return Ok(PredictionRecord::error(id, options.task, "empty document".into()));
    }
    let text: String = doc.chars().map(|c| if is_line_break(c) { ' ' } else { c }).collect();
    let pred = predict_chars(model, &text, options.restrict.as_deref(), false)?;
    Ok(match options.task {
        Task::Mono => PredictionRecord::mono(id, classify_document(&pred)?.to_string()),
        Task::Multi => {
            let set = detect_languages(&pred, options.threshold)?;
            let languages = set
                .fractions
                .into_iter()
                .filter(|(t, _)| set.tags.contains(t))
                .map(|(tag, fraction)| LanguageShare { tag, fraction })
                .collect();
            PredictionRecord::multi(id, languages)
        }
        Task::Spans => PredictionRecord::spans(id, partition_text(&pred, options.min_span)?.spans),
    })
}

fn read_input(input: &Option<PathBuf>) -> Result<String> {
    match input {
        Some(p) => read_utf8(p),
        None => {
            let mut bytes = Vec::new();
            std::io::stdin()
                .read_to_end(&mut bytes)
                .map_err(|e| Error::io("<stdin>", e))?;
            String::from_utf8(bytes).map_err(|e| Error::Encoding {
                path: "<stdin>".into(),
                offset: e.utf8_error().valid_up_to(),
            })
        }
    }
}

fn run<T: Scalar>(model: &Model<T>, docs: &[String], options: &PredictOptions, out: &mut dyn Write) -> Result<usize> {
    for (id, doc) in docs.iter().enumerate() {
        let record = predict_document(model, id, doc, options)?;
        writeln!(out, "{}", record.to_json()).map_err(|e| Error::io("<output>", e))?;
    }
    Ok(docs.len())
}

/// Writes one JSON record per input document to `out` and returns the
/// document count.
pub fn cmd_predict(options: &PredictOptions, out: &mut dyn Write) -> Result<usize> {
    let model = load_model(&options.model)?;
    if let Some(tags) = &options.restrict {
        for t in tags {
            model.labels.index_of(t)?;
        }
    }
    let docs = split_documents(&read_input(&options.input)?, &options.delimiter);
    match options.precision {
        Precision::Single => run(&model, &docs, options, out),
        Precision::Double => run(&model.cast::<f64>(), &docs, options, out),
    }
}
